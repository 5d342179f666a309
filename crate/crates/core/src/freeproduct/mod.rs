//! A finitely generated norm on a free product `F_1 * … * F_n` of free
//! groups extending given factor norms, with generator moduli controlled by
//! twice the minimal moduli in the factors.
//!
//! The construction runs in three stages:
//! 1. merge the factor seeds into one seed `σ′` on `B′` (norm `σ`);
//! 2. close `σ′` under products and the conjugation rules `Γ_{i,j} = Γ_i^j + id`
//!    to get `λ̃` below a budget ([`closure`]), cross-checked by the
//!    match-calculus oracle ([`matches`]);
//! 3. regenerate a finitely generated norm from `λ̃` on `B′ ∪ Y`.

pub mod closure;
pub mod matches;

use std::collections::BTreeMap;

use crate::error::{Caps, Error, Result};
use crate::exec::Execution;
use crate::moc::{ball_lookup, minimal_moc, verify_moc, Moc};
use crate::norms::{NormBall, PartialPreNorm};
use crate::rational::Q;
use crate::words::{Letter, Signature, Word};

pub use closure::{step2_tilde, Derivation, TildeTable};
pub use matches::{
    count_matches, enumerate_matches, lambda_rho, min_over_matches, step2_tilde_oracle, Match, MatchOracle,
};

/// `Γ_ℓ` per positive generator letter, applied for both signs.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GammaFamily {
    map: BTreeMap<Letter, Moc>,
}

impl GammaFamily {
    pub fn new(map: BTreeMap<Letter, Moc>) -> Self {
        GammaFamily { map: map.into_iter().map(|(l, m)| (l.base(), m)).collect() }
    }

    pub fn get(&self, l: Letter) -> Option<&Moc> {
        self.map.get(&l.base())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Letter, &Moc)> {
        self.map.iter()
    }

    /// Exact `Γ_ℓ(v)`.
    pub fn value(&self, l: Letter, v: &Q) -> Result<Q> {
        self.get(l).ok_or_else(|| Error::Domain(format!("no modulus for {l}")))?.at(v)
    }

    /// `Γ_ℓ(v)` when it is at most `budget`, `None` when it provably exceeds
    /// it (`Γ_ℓ(v) ≥ 2v`). Fails when `v` lies beyond the tabulated domain but
    /// the value could still be within budget.
    pub fn bounded(&self, l: Letter, v: &Q, budget: &Q) -> Result<Option<Q>> {
        let m = self.get(l).ok_or_else(|| Error::Domain(format!("no modulus for {l}")))?;
        if v <= m.r_max() {
            let c = m.at(v)?;
            return Ok((c <= *budget).then_some(c));
        }
        if v + v > *budget {
            return Ok(None);
        }
        Err(Error::Domain(format!("Γ for {l} is tabulated to {} but needed at {v}", m.r_max())))
    }
}

/// The signature of the free product of the given single-factor seeds.
pub fn product_signature(factors: &[PartialPreNorm]) -> Result<Signature> {
    if factors.is_empty() {
        return Err(Error::InvalidSeed("no factors".into()));
    }
    let mut ranks = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        if f.signature.factor_count() != 1 {
            return Err(Error::SignatureMismatch(format!("factor {i} must be a single free group")));
        }
        ranks.push(f.signature.rank());
    }
    Signature::new(ranks)
}

/// `σ′ = ∪ λ′_i` on `B′ = ∪ A_i`, with factor `i` relabelled into position `i`.
pub fn step1_merge(factors: &[PartialPreNorm]) -> Result<PartialPreNorm> {
    let sig = product_signature(factors)?;
    let mut entries = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        for (w, v) in f.entries() {
            entries.push((w.relabel_factor(0, i), v.clone()));
        }
    }
    PartialPreNorm::new(sig, entries)
}

/// Minimal moduli `Γ_i^j` of the generators of one factor on `[0, domain]`,
/// keyed by letters relabelled into factor `i`.
pub fn factor_minimal_mocs(
    factor: &PartialPreNorm,
    i: usize,
    domain: &Q,
    caps: &Caps,
    exec: Execution,
) -> Result<BTreeMap<Letter, Moc>> {
    let g = factor.group();
    let eng = factor.engine(&g, caps.ball);
    let gens = factor.signature.generators();
    let mut lam = Vec::new();
    for &x in &gens {
        lam.push(eng.value(&Word::letter(x))?);
    }
    let reach = lam.iter().max().cloned().unwrap_or_else(Q::zero);
    let small = eng.ball(domain)?;
    let big = eng.ball(&(domain + &(&reach + &reach)))?;
    let mut out = BTreeMap::new();
    for &x in &gens {
        let m = minimal_moc(&g, &Word::letter(x), &small, domain, ball_lookup(&big), exec)?;
        out.insert(Letter::gen(i, x.index as usize), m);
    }
    Ok(out)
}

/// One line of the moduli transcript: the worst conjugate of the final ball
/// against `Γ_{i,j}` and `2Γ_i^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MocCheck {
    pub generator: Letter,
    /// Ball elements examined (each for both signs).
    pub checked: usize,
    pub violation_gamma: Option<(Word, i8)>,
    pub violation_double: Option<(Word, i8)>,
}

/// Restriction of the final norm to one factor's ball, compared exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionCheck {
    pub factor: usize,
    pub radius: Q,
    pub checked: usize,
    /// `(x, λ_i(x), λ(x))` for each disagreement.
    pub mismatches: Vec<(Word, Q, Q)>,
}

/// Everything the construction produces.
#[derive(Clone, Debug)]
pub struct FreeProductNorm {
    pub signature: Signature,
    pub factors: Vec<PartialPreNorm>,
    pub sigma_prime: PartialPreNorm,
    /// `λ_i(x_{i,j})`.
    pub generator_norms: BTreeMap<Letter, Q>,
    /// `Γ_i^j` on `[0, budget]`.
    pub factor_mocs: BTreeMap<Letter, Moc>,
    /// `Γ_{i,j} = Γ_i^j + id`.
    pub gamma: GammaFamily,
    pub r_ij: BTreeMap<Letter, Q>,
    pub r_prime: Q,
    pub r: Q,
    pub budget: Q,
    pub tilde: TildeTable,
    pub y: BTreeMap<Word, Q>,
    /// Final seed on `B = B′ ∪ Y`, valued by `λ̃`.
    pub seed: PartialPreNorm,
    pub moc_checks: Vec<MocCheck>,
    pub extension_checks: Vec<ExtensionCheck>,
    /// Elements where `λ ≠ λ̃` on `Y` or `λ > λ̃` on the table.
    pub tilde_mismatches: Vec<Word>,
}

impl FreeProductNorm {
    pub fn passed(&self) -> bool {
        self.tilde_mismatches.is_empty()
            && self.moc_checks.iter().all(|c| c.violation_gamma.is_none() && c.violation_double.is_none())
            && self.extension_checks.iter().all(|c| c.mismatches.is_empty())
    }

    /// Final norm of an element.
    pub fn value(&self, x: &Word, cap: usize) -> Result<Q> {
        crate::norms::generated_norm(&self.seed, x, cap).map(|e| e.value)
    }
}

/// `Γ_{i,j} = Γ_i^j + id` for every generator, tabulated on `[0, domain]`.
pub fn conjugation_family(factors: &[PartialPreNorm], domain: &Q, caps: &Caps, exec: Execution) -> Result<GammaFamily> {
    let mut mocs = BTreeMap::new();
    for (i, f) in factors.iter().enumerate() {
        mocs.extend(factor_minimal_mocs(f, i, domain, caps, exec)?);
    }
    Ok(gamma_from(&mocs))
}

fn gamma_from(factor_mocs: &BTreeMap<Letter, Moc>) -> GammaFamily {
    GammaFamily::new(factor_mocs.iter().map(|(l, m)| (*l, m.add_identity())).collect())
}

fn domination_radii(gamma: &GammaFamily, lam: &BTreeMap<Letter, Q>) -> Result<BTreeMap<Letter, Q>> {
    let mut out = BTreeMap::new();
    for (l, m) in gamma.iter() {
        let c = &lam[l] + &lam[l];
        let r = m
            .eventual_domination_radius(&c)
            .ok_or_else(|| Error::Domain(format!("Γ for {l} never dominates {c} + id on its domain")))?;
        out.insert(*l, r);
    }
    Ok(out)
}

/// Run all three stages. `budget` is a lower bound on the radius to which
/// `λ̃` is tabulated; it is raised to cover `r` and every seed value.
pub fn free_product_norm(factors: &[PartialPreNorm], budget: &Q, caps: &Caps, exec: Execution) -> Result<FreeProductNorm> {
    let sigma_prime = step1_merge(factors)?;
    let sig = sigma_prime.signature.clone();

    let mut lam = BTreeMap::new();
    for (i, f) in factors.iter().enumerate() {
        let g = f.group();
        let eng = f.engine(&g, caps.ball);
        for x in f.signature.generators() {
            lam.insert(Letter::gen(i, x.index as usize), eng.value(&Word::letter(x))?);
        }
    }
    let two_max = lam.values().max().cloned().unwrap_or_else(Q::zero) * Q::int(2);

    // Radii only need Γ on [0, 2 max λ]: r_{i,j} ≤ 2λ_i(x_{i,j}).
    let mut first = BTreeMap::new();
    for (i, f) in factors.iter().enumerate() {
        first.extend(factor_minimal_mocs(f, i, &two_max, caps, exec)?);
    }
    let r_ij = domination_radii(&gamma_from(&first), &lam)?;
    let r_prime = r_ij.values().max().cloned().unwrap_or_else(Q::zero);
    let mut r = Q::zero();
    for (_, m) in gamma_from(&first).iter() {
        r = Q::max_of(&r, &m.at(&r_prime)?);
    }

    let budget = [budget.clone(), r.clone(), sigma_prime.max_value()].into_iter().max().expect("nonempty");
    let mut factor_mocs = BTreeMap::new();
    for (i, f) in factors.iter().enumerate() {
        factor_mocs.extend(factor_minimal_mocs(f, i, &budget, caps, exec)?);
    }
    let gamma = gamma_from(&factor_mocs);

    let tilde = step2_tilde(sigma_prime.entries(), &sig.letters(), &gamma, &budget, caps.ball)?;
    let y: BTreeMap<Word, Q> = tilde.table.iter().filter(|(_, v)| **v <= r).map(|(w, v)| (w.clone(), v.clone())).collect();
    let mut seed_entries: BTreeMap<Word, Q> = y.clone();
    for w in sigma_prime.entries().keys() {
        let v = tilde.get(w).ok_or_else(|| Error::Domain(format!("λ̃ table misses seed element {w}")))?;
        seed_entries.insert(w.clone(), v.clone());
    }
    let seed = PartialPreNorm::new(sig.clone(), seed_entries)?;

    let g = seed.group();
    let eng = seed.engine(&g, caps.ball);
    let reach = &r + &two_max;
    let big = eng.ball(&Q::max_of(&reach, &budget))?;

    let mut tilde_mismatches = Vec::new();
    for (w, v) in &tilde.table {
        match big.get(w) {
            Some(l) if (y.contains_key(w) && l == v) || (!y.contains_key(w) && l <= v) => {}
            _ => tilde_mismatches.push(w.clone()),
        }
    }

    let inner = big.restrict(&r);
    let mut moc_checks = Vec::new();
    for (l, m) in gamma.iter() {
        let x = Word::letter(*l);
        let v1 = verify_moc(m, &g, &x, &inner, ball_lookup(&big), exec)?;
        let doubled = factor_mocs[l].double();
        let v2 = verify_moc(&doubled, &g, &x, &inner, ball_lookup(&big), exec)?;
        moc_checks.push(MocCheck {
            generator: *l,
            checked: inner.len(),
            violation_gamma: v1.map(|v| (v.g, v.sign)),
            violation_double: v2.map(|v| (v.g, v.sign)),
        });
    }

    let extension_checks = extension_checks(factors, &eng, &Q::int(2), caps, exec)?;

    Ok(FreeProductNorm {
        signature: sig,
        factors: factors.to_vec(),
        sigma_prime,
        generator_norms: lam,
        factor_mocs,
        gamma,
        r_ij,
        r_prime,
        r,
        budget,
        tilde,
        y,
        seed,
        moc_checks,
        extension_checks,
        tilde_mismatches,
    })
}

/// Compare a norm on the product with each factor norm on the factor's
/// `radius`-ball.
pub fn extension_checks(
    factors: &[PartialPreNorm],
    product: &crate::norms::GeneratedNorm<'_, crate::group::FreeGroup>,
    radius: &Q,
    caps: &Caps,
    exec: Execution,
) -> Result<Vec<ExtensionCheck>> {
    let mut out = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        let g = f.group();
        let ball: NormBall<Word> = f.engine(&g, caps.ball).ball(radius)?;
        let entries: Vec<(Word, Q)> = ball.table.into_iter().collect();
        let vals = exec.try_map(&entries, |(w, v)| -> Result<Option<(Word, Q, Q)>> {
            let lifted = w.relabel_factor(0, i);
            let l = product.value(&lifted)?;
            Ok((l != *v).then(|| (lifted, v.clone(), l)))
        })?;
        out.push(ExtensionCheck {
            factor: i,
            radius: radius.clone(),
            checked: entries.len(),
            mismatches: vals.into_iter().flatten().collect(),
        });
    }
    Ok(out)
}
