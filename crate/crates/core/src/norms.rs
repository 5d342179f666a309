//! Finitely generated norms, norm balls, partial-norm checks, seminorm
//! pullbacks and seminorm-kernel quotients.
//!
//! A seed `λ′` on a finite symmetric set `A` generates
//! `λ(x) = min { λ′(a_1) + … + λ′(a_k) : x = a_1 ⋯ a_k, a_i ∈ A }`.
//! That minimum is a shortest path from the identity to `x` in the Cayley
//! graph whose edges are right multiplications by `a ∈ A` weighted by
//! `λ′(a)`, so [`GeneratedNorm`] runs Dijkstra on it. The seed is symmetric,
//! so the graph is undirected and single values come from a bidirectional
//! search between `1` and `x`. Nodes settle in `(value, element order)`
//! order, which makes witnesses deterministic.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::finite::FiniteNormedGroup;
use crate::group::{FreeGroup, Group, IntLattice, TableGroup};
use crate::rational::Q;
use crate::words::{Letter, Signature, Word};

/// A finite table `{g : λ(g) ≤ radius} → λ(g)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormBall<E: Ord> {
    /// `None` when the search exhausted a finite group.
    pub radius: Option<Q>,
    pub table: BTreeMap<E, Q>,
}

impl<E: Ord + Clone> NormBall<E> {
    pub fn get(&self, e: &E) -> Option<&Q> {
        self.table.get(e)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Entries sorted by `(value, element)`.
    pub fn by_value(&self) -> Vec<(E, Q)> {
        let mut v: Vec<(E, Q)> = self.table.iter().map(|(e, q)| (e.clone(), q.clone())).collect();
        v.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        v
    }

    /// True when `e` lies in the ball (for lookups past the radius, `None`
    /// means the value exceeds the radius).
    pub fn covers(&self, value: &Q) -> bool {
        self.radius.as_ref().is_none_or(|r| value <= r)
    }

    /// Restrict to entries with value `≤ r`.
    pub fn restrict(&self, r: &Q) -> NormBall<E> {
        NormBall {
            radius: Some(r.clone()),
            table: self.table.iter().filter(|(_, v)| *v <= r).map(|(e, v)| (e.clone(), v.clone())).collect(),
        }
    }
}

/// One optimal factorization `x = a_1 ⋯ a_k` with its cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation<E> {
    pub value: Q,
    pub factors: Vec<E>,
}

/// The norm generated by a finite seed inside a group.
#[derive(Clone, Debug)]
pub struct GeneratedNorm<'g, G: Group> {
    group: &'g G,
    seed: Vec<(G::Elem, Q)>,
    cap: usize,
}

enum Stop {
    /// Settle everything with value `≤ r`.
    Radius(Q),
    Exhaust,
}

/// One direction of the bidirectional search.
struct Side<E> {
    dist: HashMap<E, Q>,
    parent: HashMap<E, Option<(E, usize)>>,
    done: HashSet<E>,
    heap: BinaryHeap<Reverse<(Q, E)>>,
}

impl<E: Clone + Eq + std::hash::Hash + Ord> Side<E> {
    fn start(e: E) -> Self {
        Side {
            dist: HashMap::from([(e.clone(), Q::zero())]),
            parent: HashMap::from([(e.clone(), None)]),
            done: HashSet::new(),
            heap: BinaryHeap::from([Reverse((Q::zero(), e))]),
        }
    }

    fn discard_stale(&mut self) {
        while let Some(Reverse((v, e))) = self.heap.peek() {
            if self.done.contains(e) || self.dist.get(e).is_some_and(|d| d < v) {
                self.heap.pop();
            } else {
                break;
            }
        }
    }

    fn top(&self) -> Option<&Q> {
        self.heap.peek().map(|Reverse((v, _))| v)
    }
}

impl<'g, G: Group> GeneratedNorm<'g, G> {
    /// `seed` must hold positive values; identity entries are dropped.
    pub fn new(group: &'g G, seed: impl IntoIterator<Item = (G::Elem, Q)>, cap: usize) -> Result<Self> {
        let id = group.identity();
        let mut map: BTreeMap<G::Elem, Q> = BTreeMap::new();
        for (e, v) in seed {
            if e == id {
                if !v.is_zero() {
                    return Err(Error::InvalidSeed("identity must have value 0".into()));
                }
                continue;
            }
            if !v.is_positive() {
                return Err(Error::InvalidSeed(format!("non-identity element {e:?} has value {v}")));
            }
            if let Some(old) = map.insert(e.clone(), v.clone()) {
                if old != v {
                    return Err(Error::InvalidSeed(format!("conflicting values for {e:?}")));
                }
            }
        }
        for (e, v) in &map {
            match map.get(&group.inv(e)) {
                Some(w) if w == v => {}
                _ => return Err(Error::InvalidSeed(format!("seed is not symmetric at {e:?}"))),
            }
        }
        let mut seed: Vec<(G::Elem, Q)> = map.into_iter().collect();
        seed.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        Ok(GeneratedNorm { group, seed, cap })
    }

    pub fn group(&self) -> &'g G {
        self.group
    }

    /// Seed entries in `(value, element)` order.
    pub fn seed(&self) -> &[(G::Elem, Q)] {
        &self.seed
    }

    pub fn max_seed(&self) -> Q {
        self.seed.iter().map(|(_, v)| v.clone()).max().unwrap_or_else(Q::zero)
    }

    pub fn min_seed(&self) -> Option<Q> {
        self.seed.iter().map(|(_, v)| v.clone()).min()
    }

    fn search(&self, stop: Stop) -> Result<Vec<(G::Elem, Q)>> {
        let id = self.group.identity();
        let mut dist: HashMap<G::Elem, Q> = HashMap::new();
        let mut done: HashSet<G::Elem> = HashSet::new();
        let mut settled = Vec::new();
        let mut heap = BinaryHeap::new();
        dist.insert(id.clone(), Q::zero());
        heap.push(Reverse((Q::zero(), id)));

        while let Some(Reverse((v, e))) = heap.pop() {
            if done.contains(&e) || dist.get(&e).is_some_and(|d| *d < v) {
                continue;
            }
            if let Stop::Radius(r) = &stop {
                if v > *r {
                    break;
                }
            }
            done.insert(e.clone());
            settled.push((e.clone(), v.clone()));
            // Seeds ascend in value, so the first one past the radius ends the scan.
            for (a, w) in &self.seed {
                let nv = &v + w;
                if matches!(&stop, Stop::Radius(r) if nv > *r) {
                    break;
                }
                let next = self.group.mul(&e, a);
                if done.contains(&next) {
                    continue;
                }
                if dist.get(&next).is_none_or(|d| nv < *d) {
                    dist.insert(next.clone(), nv.clone());
                    heap.push(Reverse((nv, next)));
                    if dist.len() > self.cap {
                        return Err(Error::cap("norm search", self.cap));
                    }
                }
            }
        }
        Ok(settled)
    }

    /// Cheapest factorization of `x`, optionally only below `limit`.
    ///
    /// Dijkstra runs from `1` and from `x` at once, always advancing the side
    /// with the smaller frontier value; once the two frontier values sum to at
    /// least the best meeting cost, no cheaper path can exist.
    fn meet(&self, x: &G::Elem, limit: Option<&Q>) -> Result<Option<Evaluation<G::Elem>>> {
        let id = self.group.identity();
        let mut sides: [Side<G::Elem>; 2] = [Side::start(id), Side::start(x.clone())];
        let mut best: Option<(Q, G::Elem)> = None;
        if *x == self.group.identity() {
            best = Some((Q::zero(), x.clone()));
        }
        loop {
            sides.iter_mut().for_each(Side::discard_stale);
            let (Some(a), Some(b)) = (sides[0].top().cloned(), sides[1].top().cloned()) else { break };
            let reach = &a + &b;
            if best.as_ref().is_some_and(|(m, _)| reach >= *m) || limit.is_some_and(|l| reach >= *l) {
                break;
            }
            let k = if a <= b { 0 } else { 1 };
            let Reverse((v, e)) = sides[k].heap.pop().expect("nonempty");
            sides[k].done.insert(e.clone());
            for (i, (s, w)) in self.seed.iter().enumerate() {
                let nv = &v + w;
                if limit.is_some_and(|l| nv >= *l) {
                    break;
                }
                let next = self.group.mul(&e, s);
                if sides[k].done.contains(&next) {
                    continue;
                }
                if sides[k].dist.get(&next).is_none_or(|d| nv < *d) {
                    if let Some(other) = sides[1 - k].dist.get(&next) {
                        let total = &nv + other;
                        if best.as_ref().is_none_or(|(m, _)| total < *m) {
                            best = Some((total, next.clone()));
                        }
                    }
                    sides[k].dist.insert(next.clone(), nv.clone());
                    sides[k].parent.insert(next.clone(), Some((e.clone(), i)));
                    sides[k].heap.push(Reverse((nv, next)));
                    if sides[0].dist.len() + sides[1].dist.len() > self.cap {
                        return Err(Error::cap("norm search", self.cap));
                    }
                }
            }
        }
        let Some((value, mid)) = best else { return Ok(None) };
        if limit.is_some_and(|l| value >= *l) {
            return Ok(None);
        }
        let mut factors = self.witness(&sides[0].parent, &mid);
        // The backward chain runs `mid = u·a` toward `x`: each step contributes `a⁻¹`.
        let mut cur = mid;
        while let Some(Some((prev, i))) = sides[1].parent.get(&cur) {
            factors.push(self.group.inv(&self.seed[*i].0));
            cur = prev.clone();
        }
        Ok(Some(Evaluation { value, factors }))
    }

    fn witness(&self, parent: &HashMap<G::Elem, Option<(G::Elem, usize)>>, x: &G::Elem) -> Vec<G::Elem> {
        let mut factors = Vec::new();
        let mut cur = x.clone();
        while let Some(Some((prev, i))) = parent.get(&cur) {
            factors.push(self.seed[*i].0.clone());
            cur = prev.clone();
        }
        factors.reverse();
        factors
    }

    /// Exact value of the generated norm at `x`, with an optimal factorization.
    pub fn evaluate(&self, x: &G::Elem) -> Result<Evaluation<G::Elem>> {
        self.meet(x, None)?.ok_or_else(|| Error::Domain(format!("{x:?} is not generated by the seed")))
    }

    pub fn value(&self, x: &G::Elem) -> Result<Q> {
        Ok(self.evaluate(x)?.value)
    }

    /// A factorization of `x` with cost strictly below `bound`, if any.
    pub fn cheaper_than(&self, x: &G::Elem, bound: &Q) -> Result<Option<Evaluation<G::Elem>>> {
        self.meet(x, Some(bound))
    }

    /// The complete closed ball `{g : λ(g) ≤ r}`.
    pub fn ball(&self, r: &Q) -> Result<NormBall<G::Elem>> {
        if r.is_negative() {
            return Err(Error::Domain("negative radius".into()));
        }
        let settled = self.search(Stop::Radius(r.clone()))?;
        Ok(NormBall { radius: Some(r.clone()), table: settled.into_iter().collect() })
    }

    /// Every element reachable from the seed; terminates only for finite
    /// groups (or hits the cap).
    pub fn exhaust(&self) -> Result<NormBall<G::Elem>> {
        let settled = self.search(Stop::Exhaust)?;
        Ok(NormBall { radius: None, table: settled.into_iter().collect() })
    }
}

/// A partial pre-norm on a free product: a symmetric positive seed on a
/// finite set containing every generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialPreNorm {
    pub signature: Signature,
    entries: BTreeMap<Word, Q>,
}

impl PartialPreNorm {
    pub fn new(signature: Signature, entries: impl IntoIterator<Item = (Word, Q)>) -> Result<Self> {
        signature.validate()?;
        let mut map = BTreeMap::new();
        for (w, v) in entries {
            w.check(&signature)?;
            if w.is_identity() {
                if !v.is_zero() {
                    return Err(Error::InvalidSeed("identity must have value 0".into()));
                }
                continue;
            }
            if !v.is_positive() {
                return Err(Error::InvalidSeed(format!("{w} has non-positive value {v}")));
            }
            if let Some(old) = map.insert(w.clone(), v.clone()) {
                if old != v {
                    return Err(Error::InvalidSeed(format!("conflicting values for {w}")));
                }
            }
        }
        for (w, v) in &map {
            if map.get(&w.inv()) != Some(v) {
                return Err(Error::InvalidSeed(format!("not symmetric at {w}")));
            }
        }
        for g in signature.generators() {
            if !map.contains_key(&Word::letter(g)) {
                return Err(Error::InvalidSeed(format!("generator {g} missing from the seed")));
            }
        }
        Ok(PartialPreNorm { signature, entries: map })
    }

    /// Seed listing each word once; inverses are added with the same value.
    pub fn symmetric(signature: Signature, entries: impl IntoIterator<Item = (Word, Q)>) -> Result<Self> {
        let mut all = Vec::new();
        for (w, v) in entries {
            all.push((w.inv(), v.clone()));
            all.push((w, v));
        }
        PartialPreNorm::new(signature, all)
    }

    /// Every generator gets value 1: the word-length norm.
    pub fn word_length(signature: Signature) -> Self {
        let gens: Vec<_> = signature.generators().into_iter().map(|g| (Word::letter(g), Q::one())).collect();
        PartialPreNorm::symmetric(signature, gens).expect("unit seed is valid")
    }

    pub fn entries(&self) -> &BTreeMap<Word, Q> {
        &self.entries
    }

    pub fn get(&self, w: &Word) -> Option<&Q> {
        if w.is_identity() {
            None
        } else {
            self.entries.get(w)
        }
    }

    pub fn max_value(&self) -> Q {
        self.entries.values().max().cloned().unwrap_or_else(Q::zero)
    }

    pub fn min_value(&self) -> Q {
        self.entries.values().min().cloned().unwrap_or_else(Q::zero)
    }

    pub fn max_word_len(&self) -> usize {
        self.entries.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn value_of(&self, l: Letter) -> &Q {
        &self.entries[&Word::letter(l)]
    }

    pub fn group(&self) -> FreeGroup {
        FreeGroup::new(self.signature.clone())
    }

    pub fn engine<'g>(&self, group: &'g FreeGroup, cap: usize) -> GeneratedNorm<'g, FreeGroup> {
        GeneratedNorm::new(group, self.entries.iter().map(|(w, v)| (w.clone(), v.clone())), cap)
            .expect("validated seed")
    }
}

/// `λ(x)` for the norm generated by `seed`, with an optimal factorization.
pub fn generated_norm(seed: &PartialPreNorm, x: &Word, cap: usize) -> Result<Evaluation<Word>> {
    x.check(&seed.signature)?;
    let g = seed.group();
    seed.engine(&g, cap).evaluate(x)
}

/// `{g : λ(g) ≤ r}` for the norm generated by `seed`.
pub fn norm_ball(seed: &PartialPreNorm, r: &Q, cap: usize) -> Result<NormBall<Word>> {
    let g = seed.group();
    seed.engine(&g, cap).ball(r)
}

/// Outcome of [`check_partial_norm`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialNormVerdict<E> {
    pub holds: bool,
    /// `⌈M/m⌉`: no cheaper factorization can use more factors than this.
    pub factor_bound: usize,
    pub counterexample: Option<PartialNormCounterexample<E>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialNormCounterexample<E> {
    pub element: E,
    pub seed_value: Q,
    pub factors: Vec<E>,
    pub factor_sum: Q,
}

/// Decide whether `λ′(x_1⋯x_k) ≤ Σ λ′(x_i)` for every factorization inside
/// the seed set.
///
/// A violating factorization has cost below `λ′(x) ≤ M` with every factor at
/// least `m`, hence at most `⌈M/m⌉` factors; the generated-norm search cut
/// off strictly below `λ′(x)` finds one exactly when it exists.
pub fn check_partial_norm<G: Group>(
    group: &G,
    seed: &[(G::Elem, Q)],
    cap: usize,
) -> Result<PartialNormVerdict<G::Elem>> {
    let engine = GeneratedNorm::new(group, seed.iter().cloned(), cap)?;
    let factor_bound = match engine.min_seed() {
        Some(m) => (engine.max_seed() / m).ceil_usize().unwrap_or(usize::MAX),
        None => 0,
    };
    let mut entries: Vec<(G::Elem, Q)> = engine.seed().to_vec();
    entries.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    for (x, v) in entries {
        if let Some(ev) = engine.cheaper_than(&x, &v)? {
            return Ok(PartialNormVerdict {
                holds: false,
                factor_bound,
                counterexample: Some(PartialNormCounterexample {
                    element: x,
                    seed_value: v,
                    factor_sum: ev.value,
                    factors: ev.factors,
                }),
            });
        }
    }
    Ok(PartialNormVerdict { holds: true, factor_bound, counterexample: None })
}

/// A violated norm axiom inside a ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomViolation<E> {
    Asymmetric(E),
    ZeroOffIdentity(E),
    Triangle(E, E),
}

/// Check symmetry, the zero set and subadditivity over every pair of ball
/// elements whose product is also tabulated.
pub fn check_ball_axioms<G: Group>(group: &G, ball: &NormBall<G::Elem>, exec: Execution) -> Vec<AxiomViolation<G::Elem>> {
    let id = group.identity();
    let elems: Vec<(G::Elem, Q)> = ball.table.iter().map(|(e, v)| (e.clone(), v.clone())).collect();
    let per = exec.map(&elems, |(x, vx)| {
        let mut out = Vec::new();
        match ball.table.get(&group.inv(x)) {
            Some(vi) if vi == vx => {}
            _ => out.push(AxiomViolation::Asymmetric(x.clone())),
        }
        if *x != id && vx.is_zero() {
            out.push(AxiomViolation::ZeroOffIdentity(x.clone()));
        }
        for (y, vy) in &elems {
            let xy = group.mul(x, y);
            let sum = vx + vy;
            match ball.table.get(&xy) {
                Some(v) if *v <= sum => {}
                Some(_) => out.push(AxiomViolation::Triangle(x.clone(), y.clone())),
                // Outside the ball: λ(xy) > radius; a violation only if sum ≥ it,
                // which the radius alone cannot decide when sum > radius.
                None => {
                    if ball.covers(&sum) {
                        out.push(AxiomViolation::Triangle(x.clone(), y.clone()));
                    }
                }
            }
        }
        out
    });
    per.into_iter().flatten().collect()
}

/// A normed group whose elements the pullback can evaluate words into.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormedTarget {
    /// A finite group with a norm table.
    Finite(FiniteNormedGroup),
    /// `ℤ^k` with the weighted ℓ¹ norm `Σ w_i |v_i|`.
    IntLattice { weights: Vec<Q> },
    /// A free group with a finitely generated norm.
    Free(PartialPreNorm),
}

/// An element of a [`NormedTarget`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetElem {
    Index(usize),
    Vector(Vec<i64>),
    Word(Word),
}

impl NormedTarget {
    pub fn identity(&self) -> TargetElem {
        match self {
            NormedTarget::Finite(g) => TargetElem::Index(g.group.identity),
            NormedTarget::IntLattice { weights } => TargetElem::Vector(vec![0; weights.len()]),
            NormedTarget::Free(_) => TargetElem::Word(Word::identity()),
        }
    }

    pub fn mul(&self, a: &TargetElem, b: &TargetElem) -> Result<TargetElem> {
        match (self, a, b) {
            (NormedTarget::Finite(g), TargetElem::Index(x), TargetElem::Index(y)) => {
                Ok(TargetElem::Index(g.group.mul(x, y)))
            }
            (NormedTarget::IntLattice { weights }, TargetElem::Vector(x), TargetElem::Vector(y)) => {
                let l = IntLattice { rank: weights.len() };
                let mut out = Vec::with_capacity(x.len());
                for (p, q) in x.iter().zip(y) {
                    out.push(p.checked_add(*q).ok_or_else(|| Error::cap("lattice coordinate", i64::MAX as usize))?);
                }
                debug_assert_eq!(out.len(), l.rank);
                Ok(TargetElem::Vector(out))
            }
            (NormedTarget::Free(_), TargetElem::Word(x), TargetElem::Word(y)) => Ok(TargetElem::Word(x.mul(y))),
            _ => Err(Error::SignatureMismatch("element does not belong to the target".into())),
        }
    }

    pub fn inv(&self, a: &TargetElem) -> Result<TargetElem> {
        match (self, a) {
            (NormedTarget::Finite(g), TargetElem::Index(x)) => Ok(TargetElem::Index(g.group.inv(x))),
            (NormedTarget::IntLattice { .. }, TargetElem::Vector(x)) => {
                Ok(TargetElem::Vector(x.iter().map(|v| -v).collect()))
            }
            (NormedTarget::Free(_), TargetElem::Word(x)) => Ok(TargetElem::Word(x.inv())),
            _ => Err(Error::SignatureMismatch("element does not belong to the target".into())),
        }
    }

    pub fn check_elem(&self, a: &TargetElem) -> Result<()> {
        match (self, a) {
            (NormedTarget::Finite(g), TargetElem::Index(x)) if *x < g.order() => Ok(()),
            (NormedTarget::IntLattice { weights }, TargetElem::Vector(v)) if v.len() == weights.len() => Ok(()),
            (NormedTarget::Free(s), TargetElem::Word(w)) => w.check(&s.signature),
            _ => Err(Error::SignatureMismatch(format!("{a:?} does not belong to the target"))),
        }
    }

    pub fn norm(&self, a: &TargetElem, cap: usize) -> Result<Q> {
        match (self, a) {
            (NormedTarget::Finite(g), TargetElem::Index(x)) => Ok(g.norm[*x].clone()),
            (NormedTarget::IntLattice { weights }, TargetElem::Vector(v)) => {
                Ok(weights.iter().zip(v).map(|(w, x)| w * &Q::int(x.abs())).sum())
            }
            (NormedTarget::Free(s), TargetElem::Word(w)) => Ok(generated_norm(s, w, cap)?.value),
            _ => Err(Error::SignatureMismatch("element does not belong to the target".into())),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, NormedTarget::Finite(_))
    }
}

/// `λ′(w) = λ(w_H)`: the seminorm on the free group over `gens` obtained by
/// evaluating words in the target.
#[derive(Clone, Debug)]
pub struct Seminorm {
    pub target: NormedTarget,
    pub gens: Vec<TargetElem>,
    pub cap: usize,
}

impl Seminorm {
    pub fn new(target: NormedTarget, gens: Vec<TargetElem>, cap: usize) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::Domain("pullback needs at least one generator".into()));
        }
        for g in &gens {
            target.check_elem(g)?;
        }
        Ok(Seminorm { target, gens, cap })
    }

    /// The free group the seminorm lives on: one factor, one generator per
    /// target element.
    pub fn signature(&self) -> Signature {
        Signature::free(self.gens.len())
    }

    pub fn evaluate(&self, w: &Word) -> Result<TargetElem> {
        let mut acc = self.target.identity();
        for l in w.letters() {
            if l.factor != 0 || l.index == 0 || l.index as usize > self.gens.len() {
                return Err(Error::UnknownGenerator { factor: l.factor as usize, index: l.index as usize });
            }
            let g = &self.gens[l.index as usize - 1];
            let g = if l.inverse { self.target.inv(g)? } else { g.clone() };
            acc = self.target.mul(&acc, &g)?;
        }
        Ok(acc)
    }

    pub fn value(&self, w: &Word) -> Result<Q> {
        let e = self.evaluate(w)?;
        self.target.norm(&e, self.cap)
    }
}

/// Pull a norm on `target` back along `gens` to the free group on `gens`.
pub fn pullback_seminorm(target: NormedTarget, gens: Vec<TargetElem>, cap: usize) -> Result<Seminorm> {
    Seminorm::new(target, gens, cap)
}

/// `G/N` for `N = {λ = 0}` with the induced norm.
///
/// Verifies that `N` is a normal subgroup and that `λ` is constant on left
/// cosets `xN`; quotient elements are numbered by the least index in their
/// coset.
pub fn seminorm_kernel_quotient(g: &FiniteNormedGroup) -> Result<(FiniteNormedGroup, Vec<usize>)> {
    let grp = &g.group;
    let kernel: Vec<usize> = grp.elements().filter(|&e| g.norm[e].is_zero()).collect();
    let in_kernel: HashSet<usize> = kernel.iter().copied().collect();
    for &a in &kernel {
        for &b in &kernel {
            if !in_kernel.contains(&grp.mul(&a, &b)) {
                return Err(Error::NotNormal(format!("kernel not closed: {a}·{b}")));
            }
        }
        if !in_kernel.contains(&grp.inv(&a)) {
            return Err(Error::NotNormal(format!("kernel not closed under inverse at {a}")));
        }
    }
    for x in grp.elements() {
        for &k in &kernel {
            if !in_kernel.contains(&grp.conj(&x, &k, true)) {
                return Err(Error::NotNormal(format!("conjugate of {k} by {x} leaves the kernel")));
            }
        }
    }
    // coset_of[e] = quotient index
    let mut coset_of = vec![usize::MAX; grp.order()];
    let mut reps = Vec::new();
    for x in grp.elements() {
        if coset_of[x] != usize::MAX {
            continue;
        }
        let idx = reps.len();
        reps.push(x);
        for &k in &kernel {
            let y = grp.mul(&x, &k);
            if g.norm[y] != g.norm[x] {
                return Err(Error::NormAxiom(format!("norm not constant on the coset of {x}")));
            }
            coset_of[y] = idx;
        }
    }
    let table: Vec<Vec<usize>> =
        reps.iter().map(|a| reps.iter().map(|b| coset_of[grp.mul(a, b)]).collect()).collect();
    let quotient = TableGroup::new(coset_of[grp.identity], table)?;
    let norm = reps.iter().map(|&r| g.norm[r].clone()).collect();
    let mut q = FiniteNormedGroup::new(quotient, norm)?;
    if let Some(labels) = &g.labels {
        q = q.with_labels(reps.iter().map(|&r| format!("{}N", labels[r])).collect());
    }
    Ok((q, coset_of))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::symmetric_discrete;
    use crate::group::{symmetric_group, Perm};

    fn a() -> Letter {
        Letter::gen(0, 1)
    }

    fn f1_seed(entries: &[(i64, Q)]) -> PartialPreNorm {
        PartialPreNorm::symmetric(Signature::free(1), entries.iter().map(|(k, v)| (Word::power(a(), *k), v.clone())))
            .unwrap()
    }

    #[test]
    fn word_metric_on_f1() {
        let s = f1_seed(&[(1, Q::one())]);
        assert_eq!(generated_norm(&s, &Word::power(a(), 3), 1000).unwrap().value, Q::int(3));
        assert_eq!(generated_norm(&s, &Word::identity(), 1000).unwrap().value, Q::zero());
    }

    #[test]
    fn cheap_square_is_used() {
        let s = f1_seed(&[(1, Q::one()), (2, Q::frac(3, 2))]);
        let ev = generated_norm(&s, &Word::power(a(), 3), 1000).unwrap();
        assert_eq!(ev.value, Q::frac(5, 2));
        let prod = ev.factors.iter().fold(Word::identity(), |acc, f| acc.mul(f));
        assert_eq!(prod, Word::power(a(), 3));
        assert_eq!(ev.factors.len(), 2);
    }

    #[test]
    fn ball_examples() {
        let s = f1_seed(&[(1, Q::one())]);
        let b = norm_ball(&s, &Q::int(2), 1000).unwrap();
        assert_eq!(b.len(), 5);
        assert_eq!(b.get(&Word::power(a(), -2)), Some(&Q::int(2)));
        let b0 = norm_ball(&s, &Q::zero(), 1000).unwrap();
        assert_eq!(b0.len(), 1);
        let f2 = PartialPreNorm::word_length(Signature::free(2));
        assert_eq!(norm_ball(&f2, &Q::int(2), 1000).unwrap().len(), 17);
    }

    #[test]
    fn partial_norm_examples() {
        let g = FreeGroup::new(Signature::free(1));
        let check = |entries: &[(i64, Q)]| {
            let s = f1_seed(entries);
            let seed: Vec<_> = s.entries().iter().map(|(w, v)| (w.clone(), v.clone())).collect();
            check_partial_norm(&g, &seed, 1000).unwrap()
        };
        assert!(check(&[(1, Q::one()), (2, Q::int(2))]).holds);
        assert!(check(&[(1, Q::one()), (2, Q::frac(3, 2))]).holds);
        let bad = check(&[(1, Q::one()), (2, Q::frac(5, 2))]);
        assert!(!bad.holds);
        let cx = bad.counterexample.unwrap();
        assert_eq!(cx.element.len(), 2);
        assert_eq!(cx.factor_sum, Q::int(2));
        assert_eq!(cx.factors, vec![cx.factors[0].clone(); 2]);
    }

    #[test]
    fn seed_validation() {
        let sig = Signature::free(2);
        // missing generator b
        assert!(PartialPreNorm::symmetric(sig.clone(), [(Word::letter(a()), Q::one())]).is_err());
        // asymmetric
        assert!(PartialPreNorm::new(sig.clone(), [(Word::letter(a()), Q::one())]).is_err());
        // zero value off identity
        assert!(PartialPreNorm::symmetric(Signature::free(1), [(Word::letter(a()), Q::zero())]).is_err());
    }

    #[test]
    fn generated_norm_axioms_on_ball() {
        let s = f1_seed(&[(1, Q::one()), (2, Q::frac(3, 2))]);
        let g = s.group();
        let ball = s.engine(&g, 10_000).ball(&Q::int(5)).unwrap();
        assert!(check_ball_axioms(&g, &ball, Execution::default()).is_empty());
    }

    #[test]
    fn pullback_examples() {
        let z = NormedTarget::IntLattice { weights: vec![Q::one()] };
        let sn = pullback_seminorm(z, vec![TargetElem::Vector(vec![1])], 100).unwrap();
        assert_eq!(sn.value(&Word::power(a(), 3)).unwrap(), Q::int(3));
        assert_eq!(sn.value(&Word::identity()).unwrap(), Q::zero());

        let (s3, perms) = symmetric_discrete(3);
        let t = perms.iter().position(|p| *p == Perm(vec![1, 0, 2])).unwrap();
        let c = perms.iter().position(|p| *p == Perm(vec![1, 2, 0])).unwrap();
        let sn = pullback_seminorm(NormedTarget::Finite(s3), vec![TargetElem::Index(t), TargetElem::Index(c)], 100)
            .unwrap();
        assert_eq!(sn.value(&Word::power(a(), 2)).unwrap(), Q::zero());
        assert_eq!(sn.value(&Word::letter(a())).unwrap(), Q::one());
        let c3 = Word::power(Letter::gen(0, 2), 3);
        assert_eq!(sn.value(&c3).unwrap(), Q::zero());
    }

    #[test]
    fn kernel_quotient_examples() {
        let (s3, perms) = symmetric_discrete(3);
        let (q, _) = seminorm_kernel_quotient(&s3).unwrap();
        assert_eq!(q.order(), 6);

        let (g, _) = symmetric_group(3);
        let zero = FiniteNormedGroup::seminormed(g.clone(), vec![Q::zero(); 6]).unwrap();
        assert_eq!(seminorm_kernel_quotient(&zero).unwrap().0.order(), 1);

        // λ = 0 on A_3, 1 on transpositions.
        let parity = |p: &Perm| {
            let mut inv = 0;
            for i in 0..3 {
                for j in i + 1..3 {
                    if p.0[i] > p.0[j] {
                        inv += 1;
                    }
                }
            }
            inv % 2
        };
        let norm: Vec<Q> = perms.iter().map(|p| Q::int(parity(p))).collect();
        let sg = FiniteNormedGroup::seminormed(g, norm).unwrap();
        let (q, coset_of) = seminorm_kernel_quotient(&sg).unwrap();
        assert_eq!(q.order(), 2);
        assert_eq!(q.norm.iter().filter(|v| v.is_zero()).count(), 1);
        for (e, p) in perms.iter().enumerate() {
            assert_eq!(q.norm[coset_of[e]], Q::int(parity(p)));
        }
    }

    #[test]
    fn non_normal_kernel_rejected() {
        // λ vanishing on {id, (1 2)} only: not a seminorm kernel of a
        // continuous seminorm, the subgroup is not normal.
        let (g, perms) = symmetric_group(3);
        let t = Perm(vec![1, 0, 2]);
        let norm: Vec<Q> = perms.iter().map(|p| if p.is_identity() || *p == t { Q::zero() } else { Q::one() }).collect();
        let sg = FiniteNormedGroup { group: g, norm, labels: None };
        assert!(matches!(seminorm_kernel_quotient(&sg), Err(Error::NotNormal(_))));
    }
}
