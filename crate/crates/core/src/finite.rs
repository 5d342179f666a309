//! Finite groups carrying an exact (semi)norm table.

use crate::error::{Error, Result};
use crate::group::{symmetric_group, Group, Perm, TableGroup};
use crate::rational::Q;

/// A finite group in table form together with a norm value per element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteNormedGroup {
    pub group: TableGroup,
    pub norm: Vec<Q>,
    /// Optional display labels, one per element.
    pub labels: Option<Vec<String>>,
}

/// Which zero-set is acceptable when validating a norm table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// Zero exactly at the identity.
    Norm,
    /// Zero at the identity, possibly elsewhere.
    Seminorm,
}

impl FiniteNormedGroup {
    pub fn new(group: TableGroup, norm: Vec<Q>) -> Result<Self> {
        Self::with_kind(group, norm, NormKind::Norm)
    }

    pub fn seminormed(group: TableGroup, norm: Vec<Q>) -> Result<Self> {
        Self::with_kind(group, norm, NormKind::Seminorm)
    }

    pub fn with_kind(group: TableGroup, norm: Vec<Q>, kind: NormKind) -> Result<Self> {
        let g = FiniteNormedGroup { group, norm, labels: None };
        g.check_axioms(kind)?;
        Ok(g)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn value(&self, e: usize) -> &Q {
        &self.norm[e]
    }

    /// Exact check of symmetry, subadditivity on all pairs, and the zero set.
    pub fn check_axioms(&self, kind: NormKind) -> Result<()> {
        let g = &self.group;
        let n = g.order();
        if self.norm.len() != n {
            return Err(Error::NormAxiom(format!("norm table has {} entries for {n} elements", self.norm.len())));
        }
        for a in g.elements() {
            let v = &self.norm[a];
            if v.is_negative() {
                return Err(Error::NormAxiom(format!("negative value at {a}")));
            }
            if a == g.identity && !v.is_zero() {
                return Err(Error::NormAxiom("identity has nonzero norm".into()));
            }
            if kind == NormKind::Norm && a != g.identity && v.is_zero() {
                return Err(Error::NormAxiom(format!("element {a} has zero norm")));
            }
            if *v != self.norm[g.inv(&a)] {
                return Err(Error::NormAxiom(format!("asymmetric at {a}")));
            }
            for b in g.elements() {
                if self.norm[g.mul(&a, &b)] > v + &self.norm[b] {
                    return Err(Error::NormAxiom(format!("triangle inequality fails at ({a},{b})")));
                }
            }
        }
        Ok(())
    }

    /// True when `λ(g⁻¹ h g) = λ(h)` for all `g, h`.
    pub fn is_conjugacy_invariant(&self) -> bool {
        let g = &self.group;
        g.elements().all(|x| g.elements().all(|h| self.norm[g.conj(&x, &h, false)] == self.norm[h]))
    }
}

/// `S_n` with the discrete norm (1 off the identity).
pub fn symmetric_discrete(n: usize) -> (FiniteNormedGroup, Vec<Perm>) {
    let (g, perms) = symmetric_group(n);
    let norm = g.elements().map(|e| if e == g.identity { Q::zero() } else { Q::one() }).collect();
    let labels = perms.iter().map(perm_label).collect();
    (FiniteNormedGroup::new(g, norm).expect("discrete norm").with_labels(labels), perms)
}

/// Cycle notation on 1-based points, `()` for the identity.
pub fn perm_label(p: &Perm) -> String {
    let n = p.degree();
    let mut seen = vec![false; n];
    let mut out = String::new();
    for start in 0..n {
        if seen[start] || p.apply(start) == start {
            continue;
        }
        out.push('(');
        let mut i = start;
        let mut first = true;
        while !seen[i] {
            seen[i] = true;
            if !first {
                out.push(' ');
            }
            out.push_str(&(i + 1).to_string());
            first = false;
            i = p.apply(i);
        }
        out.push(')');
    }
    if out.is_empty() {
        out.push_str("()");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_s3_is_invariant() {
        let (g, _) = symmetric_discrete(3);
        assert!(g.is_conjugacy_invariant());
        assert_eq!(g.order(), 6);
    }

    #[test]
    fn zero_off_identity_rejected_as_norm() {
        let (g, _) = symmetric_group(3);
        let mut norm = vec![Q::one(); 6];
        norm[g.identity] = Q::zero();
        norm[(g.identity + 1) % 6] = Q::zero();
        assert!(FiniteNormedGroup::new(g, norm).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(perm_label(&Perm(vec![1, 0, 2])), "(1 2)");
        assert_eq!(perm_label(&Perm(vec![1, 2, 0])), "(1 2 3)");
        assert_eq!(perm_label(&Perm(vec![0, 1, 2])), "()");
    }
}
