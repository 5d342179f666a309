//! Moduli of continuity on a bounded domain `[0, r_max]`.
//!
//! A [`Moc`] is piecewise: on each piece `[from_k, from_{k+1})` it is the
//! maximum of finitely many affine terms `s·r + b` with `s ≥ 0`. Minimal
//! moduli are right-continuous steps joined with the diagonal (terms `r` and
//! a constant); doubling, adding the identity and `2Γ + ε·id` stay in the
//! same class, so every transform is exact.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::finite::FiniteNormedGroup;
use crate::group::Group;
use crate::norms::NormBall;
use crate::rational::Q;

/// `slope · r + intercept`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Affine {
    pub slope: Q,
    pub intercept: Q,
}

impl Affine {
    pub fn new(slope: Q, intercept: Q) -> Self {
        Affine { slope, intercept }
    }

    pub fn identity() -> Self {
        Affine::new(Q::one(), Q::zero())
    }

    pub fn constant(c: Q) -> Self {
        Affine::new(Q::zero(), c)
    }

    pub fn at(&self, r: &Q) -> Q {
        &self.slope * r + &self.intercept
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub from: Q,
    pub terms: Vec<Affine>,
}

impl Piece {
    fn at(&self, r: &Q) -> Q {
        self.terms.iter().map(|t| t.at(r)).max().expect("piece has terms")
    }
}

/// Drop dominated terms and sort, giving a canonical term list.
fn normalize_terms(mut terms: Vec<Affine>) -> Vec<Affine> {
    terms.sort();
    terms.dedup();
    let keep: Vec<bool> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            !terms.iter().enumerate().any(|(j, u)| j != i && u.slope >= t.slope && u.intercept >= t.intercept)
        })
        .collect();
    terms.into_iter().zip(keep).filter(|(_, k)| *k).map(|(t, _)| t).collect()
}

/// Drop terms that another single term dominates on `[a, b]` (checked at
/// both ends, which suffices for affine functions).
fn prune_terms(terms: Vec<Affine>, a: &Q, b: &Q) -> Vec<Affine> {
    let vals: Vec<(Q, Q)> = terms.iter().map(|t| (t.at(a), t.at(b))).collect();
    let keep: Vec<bool> = (0..terms.len())
        .map(|i| {
            !(0..terms.len()).any(|j| {
                j != i
                    && vals[j].0 >= vals[i].0
                    && vals[j].1 >= vals[i].1
                    && (vals[j] != vals[i] || j > i)
            })
        })
        .collect();
    terms.into_iter().zip(keep).filter(|(_, k)| *k).map(|(t, _)| t).collect()
}

/// A nondecreasing function `Γ` on `[0, r_max]` with `Γ(r) ≥ r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MocDoc", into = "MocDoc")]
pub struct Moc {
    r_max: Q,
    pieces: Vec<Piece>,
}

/// A point where `Γ(r) < r`, a drop, or another shape violation.
fn shape_error(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

impl Moc {
    /// Validates slopes `≥ 0`, monotonicity across pieces and `Γ(r) ≥ r`;
    /// `Γ(0)` may be positive (used for upper-bound candidates).
    pub fn from_pieces(r_max: Q, pieces: Vec<Piece>) -> Result<Self> {
        if r_max.is_negative() {
            return Err(shape_error("negative r_max"));
        }
        if pieces.is_empty() || !pieces[0].from.is_zero() {
            return Err(shape_error("first piece must start at 0"));
        }
        for w in pieces.windows(2) {
            if w[1].from <= w[0].from {
                return Err(shape_error("piece starts are not increasing"));
            }
        }
        let ends: Vec<Q> = pieces.iter().skip(1).map(|p| p.from.clone()).chain([r_max.clone()]).collect();
        let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
        for (p, end) in pieces.into_iter().zip(ends) {
            if p.terms.is_empty() {
                return Err(shape_error("piece without terms"));
            }
            if p.terms.iter().any(|t| t.slope.is_negative()) {
                return Err(shape_error("negative slope"));
            }
            if p.from > r_max {
                return Err(shape_error("piece starts beyond r_max"));
            }
            let terms = prune_terms(normalize_terms(p.terms), &p.from, &end);
            let here = Piece { from: p.from, terms };
            if let Some(prev) = out.last() {
                if prev.at(&here.from) > here.at(&here.from) {
                    return Err(shape_error(format!("Γ drops at {}", here.from)));
                }
                // Same function on the new piece: extend the previous one.
                let same = prune_terms(prev.terms.clone(), &here.from, &end);
                if same == here.terms {
                    continue;
                }
            }
            out.push(here);
        }
        let m = Moc { r_max, pieces: out };
        if let Some(r) = m.below_diagonal() {
            return Err(shape_error(format!("Γ({r}) < {r}")));
        }
        Ok(m)
    }

    /// As [`Moc::from_pieces`], additionally requiring `Γ(0) = 0`.
    pub fn new(r_max: Q, pieces: Vec<Piece>) -> Result<Self> {
        let m = Moc::from_pieces(r_max, pieces)?;
        if !m.at(&Q::zero())?.is_zero() {
            return Err(shape_error("Γ(0) must be 0"));
        }
        Ok(m)
    }

    pub fn identity(r_max: Q) -> Self {
        Moc { r_max, pieces: vec![Piece { from: Q::zero(), terms: vec![Affine::identity()] }] }
    }

    /// `r ↦ c + r`, the generic upper bound with `c = 2λ(x)`.
    pub fn shifted_identity(c: Q, r_max: Q) -> Result<Self> {
        if c.is_negative() {
            return Err(shape_error("negative shift"));
        }
        Moc::from_pieces(r_max, vec![Piece { from: Q::zero(), terms: vec![Affine::new(Q::one(), c)] }])
    }

    /// Right-continuous step function `max(r, v_k)` for `r ∈ [r_k, r_{k+1})`;
    /// the first step must start at 0.
    pub fn step(r_max: Q, steps: &[(Q, Q)]) -> Result<Self> {
        let pieces = steps
            .iter()
            .map(|(r, v)| Piece { from: r.clone(), terms: vec![Affine::identity(), Affine::constant(v.clone())] })
            .collect();
        Moc::new(r_max, pieces)
    }

    pub fn r_max(&self) -> &Q {
        &self.r_max
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    fn piece_end(&self, k: usize) -> &Q {
        self.pieces.get(k + 1).map(|p| &p.from).unwrap_or(&self.r_max)
    }

    fn piece_index(&self, r: &Q) -> usize {
        self.pieces.partition_point(|p| p.from <= *r) - 1
    }

    pub fn at(&self, r: &Q) -> Result<Q> {
        if r.is_negative() || *r > self.r_max {
            return Err(Error::Domain(format!("{r} outside [0, {}]", self.r_max)));
        }
        Ok(self.pieces[self.piece_index(r)].at(r))
    }

    /// Piece starts (the only places where the formula changes).
    pub fn breakpoints(&self) -> Vec<(Q, Q)> {
        self.pieces.iter().map(|p| (p.from.clone(), p.at(&p.from))).collect()
    }

    /// Some `r` with `Γ(r) < r`, if any.
    fn below_diagonal(&self) -> Option<Q> {
        let id = Moc::identity(self.r_max.clone());
        id.first_exceedance(self)
    }

    fn map_terms(&self, f: impl Fn(&Affine) -> Affine) -> Moc {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece { from: p.from.clone(), terms: p.terms.iter().map(&f).collect() })
            .collect();
        Moc::from_pieces(self.r_max.clone(), pieces).expect("transform preserves the shape")
    }

    /// `2Γ`.
    pub fn double(&self) -> Moc {
        let two = Q::int(2);
        self.map_terms(|t| Affine::new(&t.slope * &two, &t.intercept * &two))
    }

    /// `Γ + id`.
    pub fn add_identity(&self) -> Moc {
        self.map_terms(|t| Affine::new(&t.slope + &Q::one(), t.intercept.clone()))
    }

    /// `2Γ + ε·id`.
    pub fn scale_shift(&self, eps: &Q) -> Result<Moc> {
        if eps.is_negative() {
            return Err(Error::Domain("negative ε".into()));
        }
        let two = Q::int(2);
        Ok(self.map_terms(|t| Affine::new(&t.slope * &two + eps, &t.intercept * &two)))
    }

    fn merged_starts(&self, other: &Moc) -> Vec<Q> {
        let s: BTreeSet<Q> = self.pieces.iter().chain(&other.pieces).map(|p| p.from.clone()).collect();
        s.into_iter().collect()
    }

    /// `max(Γ, Δ)`; both must share `r_max`.
    pub fn pointwise_max(&self, other: &Moc) -> Result<Moc> {
        if self.r_max != other.r_max {
            return Err(Error::Domain(format!("domain mismatch: {} vs {}", self.r_max, other.r_max)));
        }
        let pieces = self
            .merged_starts(other)
            .into_iter()
            .map(|from| {
                let mut terms = self.pieces[self.piece_index(&from)].terms.clone();
                terms.extend(other.pieces[other.piece_index(&from)].terms.iter().cloned());
                Piece { from, terms }
            })
            .collect();
        Moc::from_pieces(self.r_max.clone(), pieces)
    }

    /// Restrict to `[0, r_max']` with `r_max' ≤ r_max`.
    pub fn restrict(&self, r_max: &Q) -> Result<Moc> {
        if *r_max > self.r_max || r_max.is_negative() {
            return Err(Error::Domain(format!("cannot restrict to {r_max}")));
        }
        let pieces = self.pieces.iter().filter(|p| p.from <= *r_max).cloned().collect();
        Ok(Moc { r_max: r_max.clone(), pieces })
    }

    /// Smallest-in-scan-order `r ∈ [0, min(r_max)]` with `self(r) > other(r)`,
    /// or `None` when `self ≤ other` on the common domain.
    ///
    /// On each merged piece `other − t` is convex piecewise linear for every
    /// term `t` of `self`, so its minimum sits at a piece end or at a crossing
    /// of two terms of `other`.
    pub fn first_exceedance(&self, other: &Moc) -> Option<Q> {
        let end = Q::min_of(&self.r_max, &other.r_max);
        let starts: Vec<Q> = self.merged_starts(other).into_iter().filter(|s| *s <= end).collect();
        for (k, a) in starts.iter().enumerate() {
            let b = starts.get(k + 1).cloned().unwrap_or_else(|| end.clone());
            let mine = &self.pieces[self.piece_index(a)];
            let theirs = &other.pieces[other.piece_index(a)];
            let mut probes = vec![a.clone(), b.clone()];
            for (i, s) in theirs.terms.iter().enumerate() {
                for u in &theirs.terms[i + 1..] {
                    if s.slope != u.slope {
                        let x = (&u.intercept - &s.intercept) / (&s.slope - &u.slope);
                        if x > *a && x < b {
                            probes.push(x);
                        }
                    }
                }
            }
            probes.sort();
            for x in probes {
                // Closed at b only for the final piece; elsewhere b is the
                // left limit, where the continuous extension is compared.
                if mine.at(&x) > theirs.at(&x) {
                    let r = if x == b && k + 1 < starts.len() { a.clone() } else { x };
                    return Some(r);
                }
            }
        }
        None
    }

    pub fn le(&self, other: &Moc) -> bool {
        self.first_exceedance(other).is_none()
    }

    /// Least `r` such that `Γ(t) ≥ c + t` for every `t ∈ [r, r_max]`;
    /// `None` when the inequality fails at `r_max` itself.
    pub fn eventual_domination_radius(&self, c: &Q) -> Option<Q> {
        let mut sup = Q::zero();
        for (k, p) in self.pieces.iter().enumerate() {
            let last = k + 1 == self.pieces.len();
            let end = self.piece_end(k).clone();
            // Bad set on the piece: every term has (s−1)t + b − c < 0.
            let mut lo = p.from.clone();
            let mut lo_incl = true;
            let mut hi = end;
            let mut hi_incl = last;
            let mut empty = false;
            for t in &p.terms {
                let s1 = &t.slope - &Q::one();
                let rhs = c - &t.intercept;
                if s1.is_zero() {
                    if !rhs.is_positive() {
                        empty = true;
                    }
                } else if s1.is_positive() {
                    let bound = &rhs / &s1;
                    if bound < hi || (bound == hi && hi_incl) {
                        hi = bound;
                        hi_incl = false;
                    }
                } else {
                    let bound = &rhs / &s1;
                    if bound > lo || (bound == lo && lo_incl) {
                        lo = bound;
                        lo_incl = false;
                    }
                }
            }
            if empty || lo > hi || (lo == hi && !(lo_incl && hi_incl)) {
                continue;
            }
            if last && hi_incl {
                return None;
            }
            if hi > sup {
                sup = hi;
            }
        }
        Some(sup)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceDoc {
    from: Q,
    /// `[slope, intercept]` pairs.
    terms: Vec<(Q, Q)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MocDoc {
    r_max: Q,
    breakpoints: Vec<(Q, Q)>,
    pieces: Vec<PieceDoc>,
}

impl From<Moc> for MocDoc {
    fn from(m: Moc) -> Self {
        MocDoc {
            breakpoints: m.breakpoints(),
            pieces: m
                .pieces
                .iter()
                .map(|p| PieceDoc {
                    from: p.from.clone(),
                    terms: p.terms.iter().map(|t| (t.slope.clone(), t.intercept.clone())).collect(),
                })
                .collect(),
            r_max: m.r_max,
        }
    }
}

impl TryFrom<MocDoc> for Moc {
    type Error = Error;

    fn try_from(d: MocDoc) -> Result<Self> {
        let pieces: Vec<Piece> = if d.pieces.is_empty() {
            d.breakpoints
                .iter()
                .map(|(r, v)| Piece { from: r.clone(), terms: vec![Affine::identity(), Affine::constant(v.clone())] })
                .collect()
        } else {
            d.pieces
                .into_iter()
                .map(|p| Piece { from: p.from, terms: p.terms.into_iter().map(|(s, b)| Affine::new(s, b)).collect() })
                .collect()
        };
        let m = Moc::from_pieces(d.r_max, pieces)?;
        if !d.breakpoints.is_empty() && m.breakpoints() != d.breakpoints {
            return Err(Error::Parse("breakpoints disagree with pieces".into()));
        }
        Ok(m)
    }
}

/// Minimal modulus of `x` on `[0, r_max]`:
/// `Γ(r) = max(r, sup{λ(x^ε g x^{-ε}) : λ(g) ≤ r, ε = ±1})`.
///
/// `ball` must be complete at radius `≥ r_max`; `norm_of` evaluates the norm
/// of an arbitrary conjugate.
pub fn minimal_moc<G, F>(group: &G, x: &G::Elem, ball: &NormBall<G::Elem>, r_max: &Q, norm_of: F, exec: Execution) -> Result<Moc>
where
    G: Group,
    F: Fn(&G::Elem) -> Result<Q> + Sync,
{
    if !ball.covers(r_max) {
        return Err(Error::Domain(format!("ball does not cover radius {r_max}")));
    }
    let entries: Vec<(G::Elem, Q)> = ball.by_value().into_iter().filter(|(_, v)| v <= r_max).collect();
    let conj = exec.try_map(&entries, |(g, _)| -> Result<Q> {
        let a = norm_of(&group.conj(x, g, true))?;
        let b = norm_of(&group.conj(x, g, false))?;
        Ok(Q::max_of(&a, &b))
    })?;
    let mut steps: Vec<(Q, Q)> = Vec::new();
    let mut running = Q::zero();
    for ((_, v), c) in entries.iter().zip(conj) {
        if c > running {
            running = c;
        }
        match steps.last_mut() {
            Some((r, s)) if r == v => *s = running.clone(),
            _ => steps.push((v.clone(), running.clone())),
        }
    }
    if steps.first().is_none_or(|(r, _)| !r.is_zero()) {
        steps.insert(0, (Q::zero(), Q::zero()));
    }
    Moc::step(r_max.clone(), &steps)
}

/// A lookup closure into a larger ball, failing for elements outside it.
pub fn ball_lookup<E>(ball: &NormBall<E>) -> impl Fn(&E) -> Result<Q> + Sync + '_
where
    E: Ord + Clone + std::fmt::Debug + Sync + Send,
{
    move |e: &E| {
        ball.get(e)
            .cloned()
            .ok_or_else(|| Error::cap(format!("conjugate {e:?} outside the tabulated ball"), ball.len()))
    }
}

/// Minimal modulus of `x` in a finite normed group on `[0, max λ]`.
pub fn minimal_moc_finite(g: &FiniteNormedGroup, x: usize) -> Result<Moc> {
    let ball = NormBall { radius: None, table: g.group.elements().map(|e| (e, g.norm[e].clone())).collect() };
    let r_max = g.norm.iter().max().cloned().unwrap_or_else(Q::zero);
    minimal_moc(&g.group, &x, &ball, &r_max, |e| Ok(g.norm[*e].clone()), Execution::Sequential)
}

/// A violated inequality `λ(x^ε g x^{-ε}) ≤ Γ(λ(g))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MocViolation<E> {
    pub g: E,
    /// `+1` for `x g x⁻¹`, `-1` for `x⁻¹ g x`.
    pub sign: i8,
    pub conjugate_norm: Q,
    pub bound: Q,
}

/// Check `λ(x^ε g x^{-ε}) ≤ Γ(λ(g))` for both signs and every `g` in `ball`.
pub fn verify_moc<G, F>(
    candidate: &Moc,
    group: &G,
    x: &G::Elem,
    ball: &NormBall<G::Elem>,
    norm_of: F,
    exec: Execution,
) -> Result<Option<MocViolation<G::Elem>>>
where
    G: Group,
    F: Fn(&G::Elem) -> Result<Q> + Sync,
{
    let entries = ball.by_value();
    let found = exec.try_map(&entries, |(g, v)| -> Result<Option<MocViolation<G::Elem>>> {
        let bound = candidate.at(v)?;
        for positive in [true, false] {
            let c = norm_of(&group.conj(x, g, positive))?;
            if c > bound {
                return Ok(Some(MocViolation {
                    g: g.clone(),
                    sign: if positive { 1 } else { -1 },
                    conjugate_norm: c,
                    bound,
                }));
            }
        }
        Ok(None)
    })?;
    Ok(found.into_iter().flatten().next())
}
