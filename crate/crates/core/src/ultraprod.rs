//! Finite-stage diagnostics for sequences of normed groups.
//!
//! Ultrafilter limits are not computable; every quantity here is evaluated
//! stage by stage and summarized by a cofinite-filter interval over the
//! stored prefix.

use std::fmt;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::finite::FiniteNormedGroup;
use crate::group::Group;
use crate::rational::Q;
use crate::words::{enumerate_ball, Letter, Signature, Word};

/// A finitely supported permutation of `{1, 2, …}`; `images[i - 1] = p(i)`
/// and points beyond `images.len()` are fixed.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinPerm {
    images: Vec<usize>,
}

impl FinPerm {
    pub fn identity() -> Self {
        FinPerm { images: Vec::new() }
    }

    /// From the images of `1..=k`, which must permute `1..=k`.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let k = images.len();
        let mut seen = vec![false; k + 1];
        for &x in &images {
            if x == 0 || x > k || seen[x] {
                return Err(Error::Domain(format!("{images:?} is not a permutation of 1..={k}")));
            }
            seen[x] = true;
        }
        Ok(FinPerm { images }.trimmed())
    }

    /// The transposition of `i` and `j`.
    pub fn transposition(i: usize, j: usize) -> Self {
        let k = i.max(j);
        let mut images: Vec<usize> = (1..=k).collect();
        images.swap(i - 1, j - 1);
        FinPerm { images }.trimmed()
    }

    /// The cycle `c[0] ↦ c[1] ↦ … ↦ c[0]`.
    pub fn cycle(c: &[usize]) -> Self {
        let k = c.iter().copied().max().unwrap_or(0);
        let mut images: Vec<usize> = (1..=k).collect();
        for (i, &x) in c.iter().enumerate() {
            images[x - 1] = c[(i + 1) % c.len()];
        }
        FinPerm { images }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.images.last().is_some_and(|&x| x == self.images.len()) {
            self.images.pop();
        }
        self
    }

    /// Every point above this bound is fixed.
    pub fn support_bound(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images.get(i.wrapping_sub(1)).copied().unwrap_or(i)
    }

    /// `self ∘ other`: `other` is applied first.
    pub fn compose(&self, other: &FinPerm) -> FinPerm {
        let k = self.support_bound().max(other.support_bound());
        FinPerm { images: (1..=k).map(|i| self.apply(other.apply(i))).collect() }.trimmed()
    }

    pub fn inverse(&self) -> FinPerm {
        let mut images = vec![0; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x - 1] = i + 1;
        }
        FinPerm { images }
    }

    /// The least moved point.
    pub fn min_moved(&self) -> Option<usize> {
        (1..=self.images.len()).find(|&i| self.apply(i) != i)
    }

    /// `λ(p) = max{1/k : p(k) ≠ k}`.
    pub fn lambda(&self) -> Q {
        self.min_moved().map_or_else(Q::zero, |k| Q::frac(1, k as i64))
    }

    pub fn is_identity(&self) -> bool {
        self.images.is_empty()
    }
}

impl fmt::Debug for FinPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.images)
    }
}

/// `(g⁻¹ x g, |g⁻¹ x g|/n)` for a generator `x ∉ {w₁, w₁⁻¹}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapseWitness {
    pub x: Letter,
    pub conjugate: Word,
    pub value: Q,
    /// `g⁻¹ x g` is reduced as written, so `|g⁻¹ x g| = 2|g| + 1`.
    pub no_cancellation: bool,
}

/// For nonidentity reduced `g ∈ F₂` and the scaled length `|·|/n`.
pub fn scaled_f2_collapse_witness(g: &Word, n: usize) -> Result<CollapseWitness> {
    let sig = Signature::free(2);
    g.check(&sig)?;
    if n == 0 {
        return Err(Error::Domain("stage index starts at 1".into()));
    }
    let first = g.first().ok_or_else(|| Error::Domain("g must be nontrivial".into()))?;
    let x = sig.generators().into_iter().find(|l| *l != first.base()).expect("rank 2");
    let raw: Vec<Letter> =
        g.inv().letters().iter().copied().chain(std::iter::once(x)).chain(g.letters().iter().copied()).collect();
    let conjugate = g.inv().mul(&Word::letter(x)).mul(g);
    let no_cancellation = conjugate.len() == raw.len() && conjugate.len() == 2 * g.len() + 1;
    Ok(CollapseWitness { x, value: Q::frac(conjugate.len() as i64, n as i64), conjugate, no_cancellation })
}

/// Both directions of the continuity bound for conjugation by `p` in `S∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SinfDelta {
    pub m: usize,
    pub delta: Q,
    pub forward_checked: usize,
    /// `s` with `λ(s) < δ` but `λ(p⁻¹sp) ≥ 1/n`.
    pub forward_counterexamples: Vec<FinPerm>,
    pub converse: FinPerm,
    pub converse_lambda: Q,
    pub converse_conjugate_lambda: Q,
}

impl SinfDelta {
    /// Forward bound holds on the check set and the converse witness is sharp.
    pub fn sharp(&self, n: usize) -> bool {
        let bound = Q::frac(1, n as i64);
        self.forward_counterexamples.is_empty()
            && self.converse_lambda >= self.delta
            && self.converse_conjugate_lambda >= bound
    }
}

/// `δ = 1/m` with `m = max{p(l) : l ≤ n}`.
///
/// The forward direction is checked on every transposition and 3-cycle of
/// `{m+1, …, W}` with `W` three past the support of `p`; the converse witness
/// is the transposition of `p(n)` and `m + 1`.
pub fn sinf_delta(p: &FinPerm, n: usize) -> Result<SinfDelta> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let m = (1..=n).map(|l| p.apply(l)).max().expect("n ≥ 1");
    let delta = Q::frac(1, m as i64);
    let bound = Q::frac(1, n as i64);
    let pinv = p.inverse();
    let conj = |s: &FinPerm| pinv.compose(s).compose(p);
    let top = m.max(p.support_bound()) + 3;
    let window: Vec<usize> = (m + 1..=top).collect();
    let mut checks = Vec::new();
    for (i, &a) in window.iter().enumerate() {
        for (j, &b) in window.iter().enumerate().skip(i + 1) {
            checks.push(FinPerm::transposition(a, b));
            for &c in &window[j + 1..] {
                checks.push(FinPerm::cycle(&[a, b, c]));
                checks.push(FinPerm::cycle(&[a, c, b]));
            }
        }
    }
    let forward_counterexamples =
        checks.iter().filter(|s| s.lambda() < delta && conj(s).lambda() >= bound).cloned().collect();
    let converse = FinPerm::transposition(p.apply(n), m + 1);
    Ok(SinfDelta {
        m,
        delta,
        forward_checked: checks.len(),
        forward_counterexamples,
        converse_lambda: converse.lambda(),
        converse_conjugate_lambda: conj(&converse).lambda(),
        converse,
    })
}

/// A sequence of normed groups indexed from stage 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSequence {
    /// `F_rank` with `λ_n = |·|/n`.
    ScaledFree { rank: usize, prefix: usize },
    /// Stage `n` is `groups[n - 1]`.
    Explicit(Vec<FiniteNormedGroup>),
    /// The constant sequence `S∞` with `λ(p) = max{1/k : p(k) ≠ k}`.
    FinitarySymmetric { prefix: usize },
}

/// An element of one stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StageElem {
    Word(Word),
    Index(usize),
    Perm(FinPerm),
}

/// Which conjugate attains a distortion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `g⁻¹ h g`.
    Left,
    /// `g h g⁻¹`.
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distortion {
    pub stage: usize,
    pub value: Q,
    pub witness: StageElem,
    pub side: Side,
}

impl GroupSequence {
    pub fn prefix(&self) -> usize {
        match self {
            GroupSequence::ScaledFree { prefix, .. } | GroupSequence::FinitarySymmetric { prefix } => *prefix,
            GroupSequence::Explicit(groups) => groups.len(),
        }
    }

    fn check_stage(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.prefix() {
            return Err(Error::Domain(format!("stage {n} outside the prefix 1..={}", self.prefix())));
        }
        Ok(())
    }

    /// `λ_n(x)`.
    pub fn norm(&self, n: usize, x: &StageElem) -> Result<Q> {
        self.check_stage(n)?;
        match (self, x) {
            (GroupSequence::ScaledFree { rank, .. }, StageElem::Word(w)) => {
                w.check(&Signature::free(*rank))?;
                Ok(Q::frac(w.len() as i64, n as i64))
            }
            (GroupSequence::Explicit(groups), StageElem::Index(i)) => {
                let g = &groups[n - 1];
                g.norm.get(*i).cloned().ok_or_else(|| Error::Domain(format!("no element {i} at stage {n}")))
            }
            (GroupSequence::FinitarySymmetric { .. }, StageElem::Perm(p)) => Ok(p.lambda()),
            _ => Err(Error::SignatureMismatch("element kind does not match the sequence".into())),
        }
    }
}

fn better(best: &mut Option<(Q, StageElem, Side)>, v: Q, h: StageElem, side: Side) {
    if best.as_ref().is_none_or(|(b, _, _)| v > *b) {
        *best = Some((v, h, side));
    }
}

/// Maximum of `λ_n(g⁻¹hg)` and `λ_n(ghg⁻¹)` over `{h : λ_n(h) ≤ δ}`, with a
/// witness `h`.
pub fn conjugation_distortion(
    seq: &GroupSequence,
    g: &StageElem,
    delta: &Q,
    n: usize,
    cap: usize,
    exec: Execution,
) -> Result<Distortion> {
    seq.norm(n, g)?;
    let mut best: Option<(Q, StageElem, Side)> = None;
    match (seq, g) {
        (GroupSequence::ScaledFree { rank, .. }, StageElem::Word(gw)) => {
            let radius = if delta.is_negative() { 0 } else { (delta * &Q::from(n)).floor_usize().unwrap_or(usize::MAX) };
            let ball = enumerate_ball(&Signature::free(*rank), radius, cap)?;
            let lens = exec.map(&ball, |h| (gw.inv().mul(h).mul(gw).len(), gw.mul(h).mul(&gw.inv()).len()));
            for (h, (l, r)) in ball.iter().zip(lens) {
                better(&mut best, Q::frac(l as i64, n as i64), StageElem::Word(h.clone()), Side::Left);
                better(&mut best, Q::frac(r as i64, n as i64), StageElem::Word(h.clone()), Side::Right);
            }
        }
        (GroupSequence::Explicit(groups), StageElem::Index(x)) => {
            let grp = &groups[n - 1];
            let xi = grp.group.inv(x);
            for h in grp.group.elements().filter(|h| grp.norm[*h] <= *delta) {
                let l = grp.group.mul(&xi, &grp.group.mul(&h, x));
                let r = grp.group.mul(x, &grp.group.mul(&h, &xi));
                better(&mut best, grp.norm[l].clone(), StageElem::Index(h), Side::Left);
                better(&mut best, grp.norm[r].clone(), StageElem::Index(h), Side::Right);
            }
        }
        (GroupSequence::FinitarySymmetric { .. }, StageElem::Perm(p)) => {
            // λ(h) ≤ δ iff h fixes 1..k-1; the least moved point of g⁻¹hg is
            // the least g⁻¹-image of a point moved by h.
            if !delta.is_positive() {
                best = Some((Q::zero(), StageElem::Perm(FinPerm::identity()), Side::Left));
            } else {
                let k = delta.recip().ceil_usize().unwrap_or(usize::MAX).max(1);
                let far = k.max(p.support_bound() + 1);
                let pinv = p.inverse();
                for (side, map) in [(Side::Left, &pinv), (Side::Right, p)] {
                    let j = (k..=far).min_by_key(|&j| map.apply(j)).expect("nonempty range");
                    let h = FinPerm::transposition(j, far + 1);
                    let c = match side {
                        Side::Left => pinv.compose(&h).compose(p),
                        Side::Right => p.compose(&h).compose(&pinv),
                    };
                    better(&mut best, c.lambda(), StageElem::Perm(h), side);
                }
            }
        }
        _ => return Err(Error::SignatureMismatch("element kind does not match the sequence".into())),
    }
    let (value, witness, side) = best.expect("the identity is always in the ball");
    Ok(Distortion { stage: n, value, witness, side })
}

/// Cofinite-filter bounds over a finite prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilterLimitInterval {
    pub liminf: Q,
    pub limsup: Q,
    /// 0-based start of the tail the bounds are taken over.
    pub tail_start: usize,
}

/// Bounds over the longest suffix in which every value recurs, or over the
/// last value alone when no suffix has that property.
pub fn filter_limit(values: &[Q]) -> Result<FilterLimitInterval> {
    if values.is_empty() {
        return Err(Error::Domain("empty prefix".into()));
    }
    let recurring = |t: usize| {
        let tail = &values[t..];
        tail.iter().all(|v| tail.iter().filter(|u| *u == v).count() >= 2)
    };
    let tail_start = (0..values.len()).find(|&t| recurring(t)).unwrap_or(values.len() - 1);
    let tail = &values[tail_start..];
    Ok(FilterLimitInterval {
        liminf: tail.iter().min().expect("nonempty").clone(),
        limsup: tail.iter().max().expect("nonempty").clone(),
        tail_start,
    })
}

/// Conjugation distortion at every stage of the prefix for the element
/// sequence `g`, with its filter interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagnosticReport {
    pub delta: Q,
    pub stages: Vec<Distortion>,
    pub norms: Vec<Q>,
    pub norm_limit: FilterLimitInterval,
    pub distortion_limit: FilterLimitInterval,
}

pub fn diagnose(seq: &GroupSequence, g: &[StageElem], delta: &Q, cap: usize, exec: Execution) -> Result<DiagnosticReport> {
    if g.len() != seq.prefix() {
        return Err(Error::Domain(format!("{} elements for a prefix of {}", g.len(), seq.prefix())));
    }
    let mut stages = Vec::new();
    let mut norms = Vec::new();
    for (i, x) in g.iter().enumerate() {
        norms.push(seq.norm(i + 1, x)?);
        stages.push(conjugation_distortion(seq, x, delta, i + 1, cap, exec)?);
    }
    let values: Vec<Q> = stages.iter().map(|d| d.value.clone()).collect();
    Ok(DiagnosticReport {
        delta: delta.clone(),
        norm_limit: filter_limit(&norms)?,
        distortion_limit: filter_limit(&values)?,
        stages,
        norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::symmetric_discrete;
    use proptest::prelude::*;

    fn a() -> Letter {
        Letter::gen(0, 1)
    }
    fn b() -> Letter {
        Letter::gen(0, 2)
    }

    #[test]
    fn collapse_examples() {
        let w = scaled_f2_collapse_witness(&Word::from_letters([a(), b()]), 1).unwrap();
        assert_eq!(w.x, b());
        assert_eq!(w.value, Q::int(5));
        assert_eq!(w.conjugate, Word::from_letters([b().inv(), a().inv(), b(), a(), b()]));
        let w = scaled_f2_collapse_witness(&Word::letter(a()), 2).unwrap();
        assert_eq!((w.x, w.value), (b(), Q::frac(3, 2)));
        assert!(scaled_f2_collapse_witness(&Word::identity(), 1).is_err());
    }

    #[test]
    fn sinf_examples() {
        let d = sinf_delta(&FinPerm::identity(), 3).unwrap();
        assert_eq!((d.m, d.delta.clone()), (3, Q::frac(1, 3)));
        let t = FinPerm::transposition(1, 2);
        let d = sinf_delta(&t, 2).unwrap();
        assert_eq!((d.m, d.delta.clone()), (2, Q::frac(1, 2)));
        assert!(d.sharp(2));
        // s = (1 3) is another converse witness.
        let s = FinPerm::transposition(1, 3);
        assert!(t.inverse().compose(&s).compose(&t).lambda() >= Q::frac(1, 2));
    }

    #[test]
    fn filter_examples() {
        let c = filter_limit(&vec![Q::int(2); 5]).unwrap();
        assert_eq!((c.liminf, c.limsup), (Q::int(2), Q::int(2)));
        let alt: Vec<Q> = (0..8).map(|i| Q::int(i % 2)).collect();
        let c = filter_limit(&alt).unwrap();
        assert_eq!((c.liminf, c.limsup), (Q::zero(), Q::one()));
        let h: Vec<Q> = (1..=7).map(|n| Q::frac(1, n)).collect();
        let c = filter_limit(&h).unwrap();
        assert_eq!((c.liminf, c.limsup, c.tail_start), (Q::frac(1, 7), Q::frac(1, 7), 6));
    }

    #[test]
    fn trivial_distortions() {
        let ex = Execution::default();
        let seq = GroupSequence::ScaledFree { rank: 2, prefix: 4 };
        let d = conjugation_distortion(&seq, &StageElem::Word(Word::identity()), &Q::frac(1, 2), 4, 1000, ex).unwrap();
        assert_eq!(d.value, Q::frac(1, 2));
        let (s3, _) = symmetric_discrete(3);
        let seq = GroupSequence::Explicit(vec![s3.clone(); 2]);
        for x in s3.group.elements() {
            let d = conjugation_distortion(&seq, &StageElem::Index(x), &Q::frac(1, 2), 2, 1000, ex).unwrap();
            assert_eq!(d.value, Q::zero());
        }
        let seq = GroupSequence::FinitarySymmetric { prefix: 1 };
        let d = conjugation_distortion(&seq, &StageElem::Perm(FinPerm::identity()), &Q::frac(2, 7), 1, 1000, ex).unwrap();
        assert_eq!(d.value, Q::frac(1, 4));
    }

    #[test]
    fn scaled_free_collapse_bound() {
        let seq = GroupSequence::ScaledFree { rank: 2, prefix: 5 };
        let g = Word::from_letters([a(), b(), b()]);
        for n in 1..=5 {
            let d = conjugation_distortion(&seq, &StageElem::Word(g.clone()), &Q::frac(1, n), n as usize, 1000, Execution::default())
                .unwrap();
            assert!(d.value >= Q::frac(7, n));
        }
    }

    fn finperm() -> impl Strategy<Value = FinPerm> {
        (1usize..9).prop_flat_map(|k| Just((1..=k).collect::<Vec<_>>()).prop_shuffle()).prop_map(|v| FinPerm::from_images(v).unwrap())
    }

    fn brute_sinf(p: &FinPerm, delta: &Q) -> Q {
        // Transpositions fixing everything below ⌈1/δ⌉, on a window that
        // contains the support of p and two fresh points.
        let k = delta.recip().ceil_usize().unwrap().max(1);
        let top = k.max(p.support_bound() + 1) + 2;
        let pinv = p.inverse();
        let mut best = Q::zero();
        for i in k..=top {
            for j in i + 1..=top {
                let h = FinPerm::transposition(i, j);
                best = Q::max_of(&best, &pinv.compose(&h).compose(p).lambda());
                best = Q::max_of(&best, &p.compose(&h).compose(&pinv).lambda());
            }
        }
        best
    }

    proptest! {
        #[test]
        fn sinf_distortion_matches_search(p in finperm(), k in 1i64..10) {
            let seq = GroupSequence::FinitarySymmetric { prefix: 1 };
            let delta = Q::frac(1, k);
            let d = conjugation_distortion(&seq, &StageElem::Perm(p.clone()), &delta, 1, 10, Execution::default()).unwrap();
            prop_assert_eq!(d.value, brute_sinf(&p, &delta));
        }

        #[test]
        fn sinf_composition_bound(p in finperm(), q in finperm(), k in 1i64..10) {
            // (pq)⁻¹h(pq) = q⁻¹(p⁻¹hp)q and (pq)h(pq)⁻¹ = p(qhq⁻¹)p⁻¹.
            let seq = GroupSequence::FinitarySymmetric { prefix: 1 };
            let ex = Execution::default();
            let dist = |x: &FinPerm, d: &Q| conjugation_distortion(&seq, &StageElem::Perm(x.clone()), d, 1, 10, ex).unwrap().value;
            let delta = Q::frac(1, k);
            let bound = Q::max_of(&dist(&q, &dist(&p, &delta)), &dist(&p, &dist(&q, &delta)));
            prop_assert!(dist(&p.compose(&q), &delta) <= bound);
        }

        #[test]
        fn filter_interval_contains_tail(v in prop::collection::vec(0i64..4, 1..20)) {
            let vals: Vec<Q> = v.iter().map(|&x| Q::int(x)).collect();
            let c = filter_limit(&vals).unwrap();
            prop_assert!(c.liminf <= c.limsup);
            for x in &vals[c.tail_start..] {
                prop_assert!(c.liminf <= *x && *x <= c.limsup);
            }
        }
    }
}
