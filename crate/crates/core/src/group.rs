//! Group contexts the norm engines search over.

use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Signature, Word};

/// A group with computable multiplication, enough to walk its Cayley graph.
pub trait Group: Sync {
    type Elem: Clone + Eq + Hash + Ord + Debug + Send + Sync;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;

    /// `x^ε · g · x^{-ε}` with `ε = +1` when `positive`.
    fn conj(&self, x: &Self::Elem, g: &Self::Elem, positive: bool) -> Self::Elem {
        if positive {
            self.mul(&self.mul(x, g), &self.inv(x))
        } else {
            let xi = self.inv(x);
            self.mul(&self.mul(&xi, g), x)
        }
    }
}

/// The free product over `signature`, realised as reduced words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeGroup {
    pub signature: Signature,
}

impl FreeGroup {
    pub fn new(signature: Signature) -> Self {
        FreeGroup { signature }
    }
}

impl Group for FreeGroup {
    type Elem = Word;

    fn identity(&self) -> Word {
        Word::identity()
    }

    fn mul(&self, a: &Word, b: &Word) -> Word {
        a.mul(b)
    }

    fn inv(&self, a: &Word) -> Word {
        a.inv()
    }
}

/// A permutation of `0..n`, stored as its image vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm(pub Vec<u32>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n as u32).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&i| self.0[i as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut out = vec![0u32; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            out[j as usize] = i as u32;
        }
        Perm(out)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &j in &images {
            let j = j as usize;
            if j >= n || seen[j] {
                return Err(Error::GroupAxiom("image vector is not a permutation".into()));
            }
            seen[j] = true;
        }
        Ok(Perm(images))
    }
}

impl Debug for Perm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Permutations of a fixed finite set under composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermGroup {
    pub degree: usize,
}

impl Group for PermGroup {
    type Elem = Perm;

    fn identity(&self) -> Perm {
        Perm::identity(self.degree)
    }

    fn mul(&self, a: &Perm, b: &Perm) -> Perm {
        a.compose(b)
    }

    fn inv(&self, a: &Perm) -> Perm {
        a.inverse()
    }
}

/// `ℤ^rank` under addition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntLattice {
    pub rank: usize,
}

impl Group for IntLattice {
    type Elem = Vec<i64>;

    fn identity(&self) -> Vec<i64> {
        vec![0; self.rank]
    }

    fn mul(&self, a: &Vec<i64>, b: &Vec<i64>) -> Vec<i64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn inv(&self, a: &Vec<i64>) -> Vec<i64> {
        a.iter().map(|x| -x).collect()
    }
}

/// A finite group given by its multiplication table over indices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableGroup {
    pub identity: usize,
    pub table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
}

impl TableGroup {
    /// Validate the group axioms (closure, identity, inverses, associativity).
    pub fn new(identity: usize, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || identity >= n {
            return Err(Error::GroupAxiom("empty table or identity out of range".into()));
        }
        if table.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(Error::GroupAxiom("table is not closed".into()));
        }
        for (a, row) in table.iter().enumerate() {
            if row[identity] != a || table[identity][a] != a {
                return Err(Error::GroupAxiom(format!("{identity} is not a two-sided identity at {a}")));
            }
        }
        let mut inverse = vec![usize::MAX; n];
        for (a, inv) in inverse.iter_mut().enumerate() {
            match (0..n).find(|&b| table[a][b] == identity && table[b][a] == identity) {
                Some(b) => *inv = b,
                None => return Err(Error::GroupAxiom(format!("element {a} has no inverse"))),
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(Error::GroupAxiom(format!("associativity fails at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(TableGroup { identity, table, inverse })
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.table.len()
    }

    /// Cayley table of the group of permutations `perms` (which must be closed
    /// under composition and contain the identity).
    pub fn from_perms(perms: &[Perm]) -> Result<Self> {
        let index: std::collections::HashMap<&Perm, usize> =
            perms.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let identity = perms
            .iter()
            .position(|p| p.is_identity())
            .ok_or_else(|| Error::GroupAxiom("identity permutation missing".into()))?;
        let mut table = Vec::with_capacity(perms.len());
        for p in perms {
            let mut row = Vec::with_capacity(perms.len());
            for q in perms {
                let pq = p.compose(q);
                row.push(*index.get(&pq).ok_or_else(|| Error::GroupAxiom("permutation set not closed".into()))?);
            }
            table.push(row);
        }
        TableGroup::new(identity, table)
    }
}

impl Group for TableGroup {
    type Elem = usize;

    fn identity(&self) -> usize {
        self.identity
    }

    fn mul(&self, a: &usize, b: &usize) -> usize {
        self.table[*a][*b]
    }

    fn inv(&self, a: &usize) -> usize {
        self.inverse[*a]
    }
}

/// All permutations of `0..n` in lexicographic order (identity first).
pub fn all_permutations(n: usize) -> Vec<Perm> {
    fn rec(prefix: &mut Vec<u32>, used: &mut Vec<bool>, n: usize, out: &mut Vec<Perm>) {
        if prefix.len() == n {
            out.push(Perm(prefix.clone()));
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                prefix.push(i as u32);
                rec(prefix, used, n, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], n, &mut out);
    out
}

/// The symmetric group on `n` points as a table group, with its elements.
pub fn symmetric_group(n: usize) -> (TableGroup, Vec<Perm>) {
    let perms = all_permutations(n);
    let g = TableGroup::from_perms(&perms).expect("symmetric group is a group");
    (g, perms)
}
