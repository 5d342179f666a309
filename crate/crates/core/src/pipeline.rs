//! ε-homomorphisms from finite subsets of evaluable normed groups into
//! finite normed groups, with the moduli side condition.
//!
//! [`approximate`] pulls the target norm back to a free group `E` on chosen
//! generators, restricts it to the word ball `C_n`, rationalizes it into a
//! partial norm and then produces a finite group `H`:
//! * if no nontrivial word of `C_n` has pulled-back value 0, `H` comes from
//!   [`finite_approx`] on the rational norm ([`Route::BallAction`]);
//! * otherwise, for finite targets, `H` is the subgroup generated by the
//!   images of the generators, normed by the quotient of the rational norm
//!   along evaluation ([`Route::EvaluationQuotient`]).
//!
//! The second route exists because the tiny increments given to kernel words
//! make the word-ball radius of [`finite_approx`] grow like `|C_n|`, which is
//! far beyond any tractable permutation degree.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Caps, Error, Result};
use crate::exec::Execution;
use crate::finite::FiniteNormedGroup;
use crate::finite_approx::finite_approx;
use crate::group::{FreeGroup, Group, TableGroup};
use crate::moc::{ball_lookup, minimal_moc, Moc};
use crate::norms::{check_partial_norm, GeneratedNorm, NormedTarget, PartialPreNorm, Seminorm, TargetElem};
use crate::rational::Q;
use crate::words::{ball_size, enumerate_ball, Letter, Signature, Word};

/// A rational partial norm `σ′ ≥ ρ` on a finite symmetric word set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalizedSeed {
    pub words: Vec<Word>,
    pub rho: Vec<Q>,
    pub sigma: Vec<Q>,
    /// `m = |C|`.
    pub m: usize,
    pub c_min: Q,
    /// Distinct `ρ` values of nonidentity words, descending.
    pub classes: Vec<Q>,
    /// Increment of each class.
    pub deltas: Vec<Q>,
}

impl RationalizedSeed {
    pub fn gap_bound(&self) -> Q {
        Q::one() / Q::from(self.m)
    }

    pub fn partial_norm(&self, sig: &Signature) -> Result<PartialPreNorm> {
        PartialPreNorm::new(
            sig.clone(),
            self.words.iter().zip(&self.sigma).filter(|(w, _)| !w.is_identity()).map(|(w, v)| (w.clone(), v.clone())),
        )
    }
}

/// `σ′(w) = ρ(w) + δ_k` where `k` is the rank of `ρ(w)` among the distinct
/// values (largest first) and `δ_k = C_min·k/(2K+2)`; `σ′(1) = 0`.
pub fn rationalize(words: &[Word], rho: &[Q]) -> Result<RationalizedSeed> {
    if words.len() != rho.len() {
        return Err(Error::InvalidSeed("one value per word is required".into()));
    }
    let index: BTreeMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    if index.len() != words.len() {
        return Err(Error::InvalidSeed("duplicate words".into()));
    }
    for (i, w) in words.iter().enumerate() {
        if rho[i].is_negative() {
            return Err(Error::InvalidSeed(format!("negative value at {w}")));
        }
        if w.is_identity() && !rho[i].is_zero() {
            return Err(Error::InvalidSeed("ρ(1) must be 0".into()));
        }
        match index.get(&w.inv()) {
            Some(&j) if rho[j] == rho[i] => {}
            Some(_) => return Err(Error::InvalidSeed(format!("ρ is not symmetric at {w}"))),
            None => return Err(Error::InvalidSeed(format!("word set is not symmetric at {w}"))),
        }
    }
    let m = words.len();
    let zero = Q::zero();
    let distinct: BTreeSet<&Q> = rho.iter().chain(std::iter::once(&zero)).collect();
    let sorted: Vec<&Q> = distinct.into_iter().collect();
    let mut c_min = Q::one() / Q::from(m.max(1));
    for pair in sorted.windows(2) {
        c_min = Q::min_of(&c_min, &(pair[1] - pair[0]));
    }
    let mut classes: Vec<Q> =
        words.iter().zip(rho).filter(|(w, _)| !w.is_identity()).map(|(_, v)| v.clone()).collect();
    classes.sort();
    classes.dedup();
    classes.reverse();
    let k = classes.len();
    let denom = Q::from(2 * k + 2);
    let deltas: Vec<Q> = (1..=k).map(|i| &c_min * &Q::from(i) / denom.clone()).collect();
    let sigma = words
        .iter()
        .zip(rho)
        .map(|(w, v)| {
            if w.is_identity() {
                Q::zero()
            } else {
                let pos = classes.iter().position(|c| c == v).expect("value is a class");
                v + &deltas[pos]
            }
        })
        .collect();
    Ok(RationalizedSeed { words: words.to_vec(), rho: rho.to_vec(), sigma, m, c_min, classes, deltas })
}

/// One failed condition of an ε-homomorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EpsViolation {
    /// `σ(φ(gh)⁻¹ φ(g) φ(h)) ≥ ε`, by indices into `F`.
    Relation { g: usize, h: usize, defect: Q },
    /// `|σ(φ(g)) − λ(g)| ≥ ε`.
    Norm { g: usize, lambda: Q, sigma: Q },
}

/// Result of [`eps_hom_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsHomCertificate {
    pub epsilon: Q,
    pub relation_checks: usize,
    pub norm_checks: usize,
    pub max_relation_defect: Q,
    pub max_norm_defect: Q,
    pub violations: Vec<EpsViolation>,
}

impl EpsHomCertificate {
    pub fn valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check both ε-homomorphism conditions for `φ: F → H` with strict
/// inequalities: relations for every `g, h ∈ F` with `gh ∈ F`, norms for
/// every `g ∈ F`.
pub fn eps_hom_check<H, S>(
    target: &NormedTarget,
    subset: &[TargetElem],
    h: &H,
    phi: &[H::Elem],
    sigma: S,
    eps: &Q,
    cap: usize,
) -> Result<EpsHomCertificate>
where
    H: Group,
    S: Fn(&H::Elem) -> Result<Q>,
{
    if !eps.is_positive() {
        return Err(Error::Domain("ε must be positive".into()));
    }
    if phi.len() != subset.len() {
        return Err(Error::Domain("φ must be defined on all of F".into()));
    }
    let pos: BTreeMap<&TargetElem, usize> = subset.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut violations = Vec::new();
    let mut max_rel = Q::zero();
    let mut max_norm = Q::zero();
    let mut relation_checks = 0;
    for (i, g) in subset.iter().enumerate() {
        for (j, k) in subset.iter().enumerate() {
            let gk = target.mul(g, k)?;
            if let Some(&l) = pos.get(&gk) {
                relation_checks += 1;
                let defect_elem = h.mul(&h.inv(&phi[l]), &h.mul(&phi[i], &phi[j]));
                let d = sigma(&defect_elem)?;
                if d >= *eps {
                    violations.push(EpsViolation::Relation { g: i, h: j, defect: d.clone() });
                }
                max_rel = Q::max_of(&max_rel, &d);
            }
        }
    }
    for (i, g) in subset.iter().enumerate() {
        let lambda = target.norm(g, cap)?;
        let s = sigma(&phi[i])?;
        let d = (&s - &lambda).abs();
        if d >= *eps {
            violations.push(EpsViolation::Norm { g: i, lambda, sigma: s });
        }
        max_norm = Q::max_of(&max_norm, &d);
    }
    Ok(EpsHomCertificate {
        epsilon: eps.clone(),
        relation_checks,
        norm_checks: subset.len(),
        max_relation_defect: max_rel,
        max_norm_defect: max_norm,
        violations,
    })
}

/// How `H` was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    BallAction,
    EvaluationQuotient,
}

/// `Γ^H_{φ(f)}` against `2Γ_f + ε·id` on `[0, radius]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MocBound {
    pub f: usize,
    pub gamma_h: Moc,
    pub gamma_target: Moc,
    pub bound: Moc,
    /// A radius where `Γ^H` exceeds the bound.
    pub violation: Option<Q>,
}

/// Stage-by-stage record of a pipeline run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineTrace {
    pub generators: Vec<TargetElem>,
    /// `w_f` for each element of `F`.
    pub words: Vec<Word>,
    pub n: usize,
    pub c_size: usize,
    pub kernel_words: usize,
    pub c_min: Q,
    pub classes: usize,
    pub gap_bound: Q,
    /// `None` when the partial-norm check was skipped (quotient route).
    pub partial_norm_holds: Option<bool>,
    pub route: Route,
    /// Word-ball radius for the ball-action route.
    pub ball_radius: Option<usize>,
    pub h_order: Option<usize>,
    pub moc_radius: Q,
    pub notes: Vec<String>,
}

/// The finite group produced by [`approximate`].
#[derive(Clone, Debug)]
pub enum FiniteModel {
    /// Permutations of a word ball, with `σ` on the discovered ball.
    Permutations(Box<crate::finite_approx::FiniteApprox>),
    /// An explicit normed table.
    Table(FiniteNormedGroup),
}

#[derive(Clone, Debug)]
pub struct Approximation {
    pub model: FiniteModel,
    /// `φ(f)`, as a permutation (ball-action route) or a table index.
    pub phi: Vec<PhiImage>,
    pub certificate: EpsHomCertificate,
    pub moc_report: Vec<MocBound>,
    pub trace: PipelineTrace,
    pub seed: RationalizedSeed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PhiImage {
    Perm(crate::group::Perm),
    Index(usize),
}

impl Approximation {
    pub fn valid(&self) -> bool {
        self.certificate.valid() && self.moc_report.iter().all(|m| m.violation.is_none())
    }
}

/// Elements of a finite table group generated by `gens`, and a word over the
/// generators for each (breadth-first, letters in signature order).
fn finite_words(g: &TableGroup, gens: &[usize]) -> BTreeMap<usize, Word> {
    let sig = Signature::free(gens.len().max(1));
    let letters = sig.letters();
    let mut seen = BTreeMap::new();
    seen.insert(g.identity, Word::identity());
    let mut queue = VecDeque::from([g.identity]);
    while let Some(e) = queue.pop_front() {
        let w = seen[&e].clone();
        for &l in &letters {
            let gi = gens[l.index as usize - 1];
            let s = if l.inverse { g.inv(&gi) } else { gi };
            let next = g.mul(&e, &s);
            if let std::collections::btree_map::Entry::Vacant(v) = seen.entry(next) {
                v.insert(w.mul(&Word::letter(l)));
                queue.push_back(next);
            }
        }
    }
    seen
}

/// Generators of `E` (as target elements) and `w_f` for each `f ∈ F`.
fn choose_generators(target: &NormedTarget, subset: &[TargetElem]) -> Result<(Vec<TargetElem>, Vec<Word>)> {
    match target {
        NormedTarget::Finite(fg) => {
            let g = &fg.group;
            let mut gens: Vec<usize> = Vec::new();
            let mut span: BTreeSet<usize> = BTreeSet::from([g.identity]);
            for f in subset {
                let TargetElem::Index(x) = f else { unreachable!("checked by caller") };
                if !span.contains(x) {
                    gens.push(*x);
                    span = finite_words(g, &gens).into_keys().collect();
                }
            }
            if gens.is_empty() {
                gens.push(g.identity);
            }
            let words = finite_words(g, &gens);
            let ws = subset
                .iter()
                .map(|f| match f {
                    TargetElem::Index(x) => words[x].clone(),
                    _ => unreachable!("checked by caller"),
                })
                .collect();
            Ok((gens.into_iter().map(TargetElem::Index).collect(), ws))
        }
        NormedTarget::IntLattice { weights } => {
            let k = weights.len();
            let gens = (0..k)
                .map(|i| {
                    let mut v = vec![0; k];
                    v[i] = 1;
                    TargetElem::Vector(v)
                })
                .collect();
            let ws = subset
                .iter()
                .map(|f| match f {
                    TargetElem::Vector(v) => v
                        .iter()
                        .enumerate()
                        .fold(Word::identity(), |acc, (i, &c)| acc.mul(&Word::power(Letter::gen(0, i + 1), c))),
                    _ => unreachable!("checked by caller"),
                })
                .collect();
            Ok((gens, ws))
        }
        NormedTarget::Free(s) => {
            let gens: Vec<Letter> = s.signature.generators();
            let pos: BTreeMap<Letter, usize> = gens.iter().enumerate().map(|(i, l)| (*l, i + 1)).collect();
            let ws = subset
                .iter()
                .map(|f| match f {
                    TargetElem::Word(w) => Word::from_letters(
                        w.letters().iter().map(|l| Letter::new(0, pos[&l.base()], l.inverse)),
                    ),
                    _ => unreachable!("checked by caller"),
                })
                .collect();
            Ok((gens.into_iter().map(|l| TargetElem::Word(Word::letter(l))).collect(), ws))
        }
    }
}

fn target_moc(target: &NormedTarget, f: &TargetElem, radius: &Q, caps: &Caps, exec: Execution) -> Result<Moc> {
    match (target, f) {
        (NormedTarget::Finite(g), TargetElem::Index(x)) => {
            let ball = crate::norms::NormBall {
                radius: None,
                table: g.group.elements().map(|e| (e, g.norm[e].clone())).collect(),
            };
            minimal_moc(&g.group, x, &ball, radius, |e| Ok(g.norm[*e].clone()), exec)
        }
        // Abelian: conjugation is trivial.
        (NormedTarget::IntLattice { .. }, _) => Ok(Moc::identity(radius.clone())),
        (NormedTarget::Free(s), TargetElem::Word(w)) => {
            let g = s.group();
            let eng = s.engine(&g, caps.ball);
            let lam = eng.value(w)?;
            let small = eng.ball(radius)?;
            let big = eng.ball(&(radius + &(&lam + &lam)))?;
            minimal_moc(&g, w, &small, radius, ball_lookup(&big), exec)
        }
        _ => Err(Error::SignatureMismatch("element does not belong to the target".into())),
    }
}

/// Build a finite normed group and a certified ε-homomorphism on `subset`.
pub fn approximate(target: &NormedTarget, subset: &[TargetElem], eps: &Q, caps: &Caps, exec: Execution) -> Result<Approximation> {
    if !eps.is_positive() {
        return Err(Error::Domain("ε must be positive".into()));
    }
    if subset.is_empty() {
        return Err(Error::Domain("F must be nonempty".into()));
    }
    for f in subset {
        target.check_elem(f)?;
    }
    let mut subset_dedup = subset.to_vec();
    subset_dedup.dedup();
    let (gens, words) = choose_generators(target, subset)?;
    let k = gens.len();
    let esig = Signature::free(k);
    let seminorm = Seminorm::new(target.clone(), gens.clone(), caps.ball)?;

    // n ≥ 3 covering the F-words and the relation words, with |C_n| > 2/ε.
    let pos: BTreeMap<&TargetElem, usize> = subset.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut need = words.iter().map(Word::len).max().unwrap_or(0);
    for (i, g) in subset.iter().enumerate() {
        for (j, h) in subset.iter().enumerate() {
            if let Some(&l) = pos.get(&target.mul(g, h)?) {
                need = need.max(words[i].mul(&words[j]).mul(&words[l].inv()).len());
            }
        }
    }
    let mut n = need.max(3);
    loop {
        let size = ball_size(k, n).filter(|&s| s <= caps.ball).ok_or_else(|| Error::cap(format!("word ball C_{n}"), caps.ball))?;
        if Q::from(size) * eps > Q::int(2) {
            break;
        }
        n += 1;
    }
    let c_n = enumerate_ball(&esig, n, caps.ball)?;
    let rho = exec.try_map(&c_n, |w| seminorm.value(w))?;
    let seed = rationalize(&c_n, &rho)?;
    let kernel_words = c_n.iter().zip(&rho).filter(|(w, v)| !w.is_identity() && v.is_zero()).count();
    let sigma_prime = seed.partial_norm(&esig)?;

    let radius = Q::max_of(&Q::one(), &(subset.iter().map(|f| target.norm(f, caps.ball)).collect::<Result<Vec<_>>>()?.into_iter().max().expect("nonempty")));
    let mut notes = vec!["finite-stage composition: the ultraproduct extraction is replaced by one sufficient stage".to_string()];

    let (model, phi, certificate, moc_report, route, ball_radius, h_order, partial_norm_holds) = if kernel_words == 0 {
        let fgroup = FreeGroup::new(esig.clone());
        let entries: Vec<(Word, Q)> = sigma_prime.entries().iter().map(|(w, v)| (w.clone(), v.clone())).collect();
        let verdict = check_partial_norm(&fgroup, &entries, caps.ball)?;
        let fa = finite_approx(&sigma_prime, &c_n, &[], caps, exec)?;
        let perms: Vec<crate::group::Perm> = words.iter().map(|w| fa.phi.map[w].clone()).collect();
        let h = fa.engine(caps.ball);
        let cert = eps_hom_check(target, subset, &fa.group, &perms, |p| h.value(p), eps, caps.ball)?;
        let mut report = Vec::new();
        for (i, f) in subset.iter().enumerate() {
            let sx = h.value(&perms[i])?;
            let small = h.ball(&radius)?;
            let big = h.ball(&(&radius + &(&sx + &sx)))?;
            let gh = minimal_moc(&fa.group, &perms[i], &small, &radius, ball_lookup(&big), exec)?;
            report.push(moc_bound(i, gh, target_moc(target, f, &radius, caps, exec)?, eps)?);
        }
        let order = if fa.action.degree() <= MATERIALIZE_DEGREE {
            fa.materialize(MATERIALIZE_ORDER).ok().map(|(g, _)| g.order())
        } else {
            None
        };
        let n_ball = fa.n;
        let phi = perms.into_iter().map(PhiImage::Perm).collect();
        (FiniteModel::Permutations(Box::new(fa)), phi, cert, report, Route::BallAction, Some(n_ball), order, Some(verdict.holds))
    } else {
        let NormedTarget::Finite(fg) = target else {
            return Err(Error::Unsupported(format!(
                "{kernel_words} words of C_{n} evaluate to norm 0 and the target is infinite"
            )));
        };
        notes.push(format!("{kernel_words} kernel words in C_{n}: H is the evaluation image with the quotient norm"));
        notes.push("partial-norm check skipped: kernel increments make the factor bound intractable".into());
        let mut fiber: BTreeMap<usize, Q> = BTreeMap::new();
        for (w, v) in c_n.iter().zip(&seed.sigma) {
            if w.is_identity() {
                continue;
            }
            let TargetElem::Index(e) = seminorm.evaluate(w)? else { unreachable!("finite target") };
            if e == fg.group.identity {
                continue;
            }
            let slot = fiber.entry(e).or_insert_with(|| v.clone());
            if *v < *slot {
                *slot = v.clone();
            }
        }
        let eng = GeneratedNorm::new(&fg.group, fiber, caps.ball)?;
        let all = eng.exhaust()?;
        let elems: Vec<usize> = all.table.keys().copied().collect();
        let local: BTreeMap<usize, usize> = elems.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let table: Vec<Vec<usize>> =
            elems.iter().map(|a| elems.iter().map(|b| local[&fg.group.mul(a, b)]).collect()).collect();
        let sub = TableGroup::new(local[&fg.group.identity], table)?;
        let norm: Vec<Q> = elems.iter().map(|e| all.table[e].clone()).collect();
        let mut h = FiniteNormedGroup::new(sub, norm)?;
        if let Some(labels) = &fg.labels {
            h = h.with_labels(elems.iter().map(|&e| labels[e].clone()).collect());
        }
        let idx: Vec<usize> = subset
            .iter()
            .map(|f| match f {
                TargetElem::Index(e) => local[e],
                _ => unreachable!("finite target"),
            })
            .collect();
        let cert = eps_hom_check(target, subset, &h.group, &idx, |e| Ok(h.norm[*e].clone()), eps, caps.ball)?;
        let mut report = Vec::new();
        for (i, f) in subset.iter().enumerate() {
            let ball = crate::norms::NormBall {
                radius: None,
                table: h.group.elements().map(|e| (e, h.norm[e].clone())).collect(),
            };
            let gh = minimal_moc(&h.group, &idx[i], &ball, &radius, |e| Ok(h.norm[*e].clone()), exec)?;
            report.push(moc_bound(i, gh, target_moc(target, f, &radius, caps, exec)?, eps)?);
        }
        let order = h.order();
        (FiniteModel::Table(h), idx.into_iter().map(PhiImage::Index).collect(), cert, report, Route::EvaluationQuotient, None, Some(order), None)
    };

    let trace = PipelineTrace {
        generators: gens,
        words,
        n,
        c_size: c_n.len(),
        kernel_words,
        c_min: seed.c_min.clone(),
        classes: seed.classes.len(),
        gap_bound: seed.gap_bound(),
        partial_norm_holds,
        route,
        ball_radius,
        h_order,
        moc_radius: radius,
        notes,
    };
    Ok(Approximation { model, phi, certificate, moc_report, trace, seed })
}

const MATERIALIZE_DEGREE: usize = 4096;
const MATERIALIZE_ORDER: usize = 2000;

fn moc_bound(f: usize, gamma_h: Moc, gamma_target: Moc, eps: &Q) -> Result<MocBound> {
    let bound = gamma_target.scale_shift(eps)?;
    let violation = gamma_h.first_exceedance(&bound);
    Ok(MocBound { f, gamma_h, gamma_target, bound, violation })
}
