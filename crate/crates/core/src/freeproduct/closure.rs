//! Lightest-derivation closure computing `λ̃` below a budget.
//!
//! Derivations build group elements from axioms (`σ′` on `B′`, and the
//! identity at 0) with two rules: the product `u·v` costs `λ̃(u) + λ̃(v)`, and
//! conjugation `ℓ y ℓ⁻¹` by a letter costs `Γ_ℓ(λ̃(y))`. Both rule costs are
//! monotone and at least as large as their inputs, so elements can be
//! settled in increasing order of value as in Dijkstra's algorithm.
//!
//! Every derivation is a product of atoms (axioms or conjugation results),
//! hence only products `u·a` with an atom `a` on the right are generated:
//! when `u` settles it is multiplied by every settled atom, and when an atom
//! settles every settled element is multiplied by it.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::rational::Q;
use crate::words::{Letter, Word};

use super::GammaFamily;

/// How an element's value was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    Axiom,
    Product(Word, Word),
    Conjugate(Letter, Word),
}

impl Derivation {
    fn is_atom(&self) -> bool {
        !matches!(self, Derivation::Product(..))
    }
}

/// `λ̃` on `{x : λ̃(x) ≤ budget}`, exact on that set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TildeTable {
    pub budget: Q,
    pub table: BTreeMap<Word, Q>,
    pub derivations: BTreeMap<Word, Derivation>,
}

impl TildeTable {
    pub fn get(&self, w: &Word) -> Option<&Q> {
        self.table.get(w)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

struct State {
    dist: HashMap<Word, Q>,
    how: HashMap<Word, Derivation>,
    heap: BinaryHeap<Reverse<(Q, Word)>>,
    budget: Q,
    cap: usize,
}

impl State {
    fn relax(&mut self, w: Word, v: Q, how: Derivation) -> Result<()> {
        if v > self.budget {
            return Ok(());
        }
        if self.dist.get(&w).is_some_and(|d| *d <= v) {
            return Ok(());
        }
        self.dist.insert(w.clone(), v.clone());
        self.how.insert(w.clone(), how);
        self.heap.push(Reverse((v, w)));
        if self.dist.len() > self.cap {
            return Err(Error::cap("derivation closure", self.cap));
        }
        Ok(())
    }
}

/// Settle every element with `λ̃ ≤ budget`.
///
/// `letters` are the conjugating letters (both signs of every generator);
/// `gamma` supplies `Γ_ℓ`, which must be defined at least on `[0, budget/2]`.
pub fn step2_tilde(
    axioms: &BTreeMap<Word, Q>,
    letters: &[Letter],
    gamma: &GammaFamily,
    budget: &Q,
    cap: usize,
) -> Result<TildeTable> {
    if budget.is_negative() {
        return Err(Error::Domain("negative budget".into()));
    }
    let mut st = State { dist: HashMap::new(), how: HashMap::new(), heap: BinaryHeap::new(), budget: budget.clone(), cap };
    st.relax(Word::identity(), Q::zero(), Derivation::Axiom)?;
    for (w, v) in axioms {
        st.relax(w.clone(), v.clone(), Derivation::Axiom)?;
    }
    let mut settled: Vec<(Word, Q)> = Vec::new();
    let mut atoms: Vec<(Word, Q)> = Vec::new();
    let mut table = BTreeMap::new();
    let mut derivations = BTreeMap::new();

    while let Some(Reverse((v, w))) = st.heap.pop() {
        if table.contains_key(&w) || st.dist.get(&w).is_some_and(|d| *d < v) {
            continue;
        }
        let how = st.how[&w].clone();
        table.insert(w.clone(), v.clone());
        derivations.insert(w.clone(), how.clone());
        settled.push((w.clone(), v.clone()));
        if how.is_atom() {
            atoms.push((w.clone(), v.clone()));
            for (s, sv) in &settled {
                let p = s.mul(&w);
                if !table.contains_key(&p) {
                    st.relax(p, sv + &v, Derivation::Product(s.clone(), w.clone()))?;
                }
            }
        }
        for (a, av) in &atoms {
            let p = w.mul(a);
            if !table.contains_key(&p) {
                st.relax(p, &v + av, Derivation::Product(w.clone(), a.clone()))?;
            }
        }
        for &l in letters {
            if let Some(c) = gamma.bounded(l, &v, budget)? {
                let x = Word::letter(l);
                let conj = w.conjugate_by(&x);
                if !table.contains_key(&conj) {
                    st.relax(conj, c, Derivation::Conjugate(l, w.clone()))?;
                }
            }
        }
    }
    Ok(TildeTable { budget: budget.clone(), table, derivations })
}
