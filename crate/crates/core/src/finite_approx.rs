//! Isometric partial monomorphisms from balls of a normed free group into
//! finite permutation groups.
//!
//! The free group acts partially on the word ball `B_N` by left
//! multiplication, `w ↦ reduce(g w)` whenever the result still has length
//! `≤ N`. Completing each generator's partial map to a permutation (pairing
//! the leftover domain and range vertices in shortlex order) yields a
//! homomorphism `Φ` into `Sym(B_N)` with `Φ(w)(1) = w` for every `|w| ≤ N`,
//! so `Φ` is injective on `B_N`. `H` is the subgroup generated by the images
//! of the requested set, normed by the seed `σ′(Φ(x)) = λ(x)`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Caps, Error, Result};
use crate::exec::Execution;
use crate::finite::FiniteNormedGroup;
use crate::group::{FreeGroup, Group, Perm, PermGroup, TableGroup};
use crate::moc::Moc;
use crate::norms::{GeneratedNorm, NormBall, PartialPreNorm};
use crate::rational::Q;
use crate::words::{ball_size, enumerate_ball, Letter, Signature, Word};

/// The completed left action of the free group on `B_N`.
#[derive(Clone, Debug)]
pub struct BallAction {
    pub signature: Signature,
    pub radius: usize,
    /// `B_N` in shortlex order; vertex 0 is the identity.
    pub vertices: Vec<Word>,
    index: HashMap<Word, u32>,
    /// Permutation of each positive generator.
    pub generators: BTreeMap<Letter, Perm>,
    inverses: BTreeMap<Letter, Perm>,
}

impl BallAction {
    pub fn new(sig: &Signature, radius: usize, cap: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::Domain("ball radius must be at least 1".into()));
        }
        let vertices = enumerate_ball(sig, radius, cap)?;
        let index: HashMap<Word, u32> = vertices.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        let n = vertices.len();
        let mut generators = BTreeMap::new();
        let mut inverses = BTreeMap::new();
        for g in sig.generators() {
            let gw = Word::letter(g);
            let mut images: Vec<Option<u32>> = vec![None; n];
            let mut hit = vec![false; n];
            for (i, w) in vertices.iter().enumerate() {
                let v = gw.mul(w);
                if v.len() <= radius {
                    let j = index[&v];
                    images[i] = Some(j);
                    hit[j as usize] = true;
                }
            }
            let free_range: Vec<u32> = (0..n as u32).filter(|&j| !hit[j as usize]).collect();
            let mut spare = free_range.into_iter();
            let images: Vec<u32> = images
                .into_iter()
                .map(|im| im.unwrap_or_else(|| spare.next().expect("domain and range leftovers have equal size")))
                .collect();
            let p = Perm::from_images(images)?;
            inverses.insert(g, p.inverse());
            generators.insert(g, p);
        }
        Ok(BallAction { signature: sig.clone(), radius, vertices, index, generators, inverses })
    }

    pub fn degree(&self) -> usize {
        self.vertices.len()
    }

    pub fn letter_perm(&self, l: Letter) -> &Perm {
        if l.inverse {
            &self.inverses[&l.base()]
        } else {
            &self.generators[&l]
        }
    }

    /// `Φ(w) = Φ(w_1) ∘ … ∘ Φ(w_k)`.
    pub fn image(&self, w: &Word) -> Result<Perm> {
        w.check(&self.signature)?;
        let mut p = Perm::identity(self.degree());
        for &l in w.letters().iter().rev() {
            p = self.letter_perm(l).compose(&p);
        }
        Ok(p)
    }

    /// The vertex `Φ(w)` sends the identity to.
    pub fn orbit_point(&self, w: &Word) -> Result<&Word> {
        Ok(&self.vertices[self.image(w)?.apply(0)])
    }

    pub fn vertex_index(&self, w: &Word) -> Option<usize> {
        self.index.get(w).map(|&i| i as usize)
    }
}

/// `Φ` restricted to a finite domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialMonomorphism {
    pub map: BTreeMap<Word, Perm>,
}

impl PartialMonomorphism {
    pub fn get(&self, w: &Word) -> Option<&Perm> {
        self.map.get(w)
    }

    pub fn is_injective(&self) -> bool {
        let mut seen: Vec<&Perm> = self.map.values().collect();
        seen.sort();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    /// Triples `(x, y)` with `x, y, xy` in the domain and `φ(xy) ≠ φ(x)φ(y)`.
    pub fn multiplicativity_failures(&self) -> Vec<(Word, Word)> {
        let mut out = Vec::new();
        for (x, px) in &self.map {
            for (y, py) in &self.map {
                if let Some(pxy) = self.map.get(&x.mul(y)) {
                    if *pxy != px.compose(py) {
                        out.push((x.clone(), y.clone()));
                    }
                }
            }
        }
        out
    }
}

/// A modulus to preserve for one generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MocRequest {
    pub generator: Letter,
    pub gamma: Moc,
}

/// Outcome of checking one modulus in `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MocPreservation {
    pub generator: Letter,
    /// `Γ` dominates `2λ(x) + id` on `(r′, r_max]`; `H` is checked directly
    /// on `σ ≤ r′`.
    pub r_prime: Q,
    /// `Γ(r′)`: the `λ`-ball radius the word ball must cover.
    pub r: Q,
    /// True when `Γ` never dominates on its domain and `r′ = r_max`.
    pub direct_only: bool,
    pub checked: usize,
    /// `(y, sign, σ(conjugate), Γ(σ(y)))`.
    pub violation: Option<(Perm, i8, Q, Q)>,
    pub generator_isometric: bool,
}

impl MocPreservation {
    pub fn passed(&self) -> bool {
        self.violation.is_none() && self.generator_isometric
    }
}

/// Output of [`finite_approx`].
#[derive(Clone, Debug)]
pub struct FiniteApprox {
    pub action: BallAction,
    pub group: PermGroup,
    /// `K·⌈M/m⌉`.
    pub n0: usize,
    /// Word-length bound after covering the moduli balls.
    pub n: usize,
    pub m_max: Q,
    pub m_min: Q,
    pub k: usize,
    pub phi: PartialMonomorphism,
    /// `σ′(Φ(x)) = λ(x)` on the requested set.
    pub seed: Vec<(Perm, Q)>,
    /// `(x, λ(x), σ(Φ(x)))`.
    pub isometry: Vec<(Word, Q, Q)>,
    pub moc: Vec<MocPreservation>,
    /// Elements of `H` with `σ ≤ M`, as discovered.
    pub sigma_ball: NormBall<Perm>,
}

impl FiniteApprox {
    pub fn isometric(&self) -> bool {
        self.isometry.iter().all(|(_, l, s)| l == s)
    }

    pub fn passed(&self) -> bool {
        self.isometric() && self.moc.iter().all(MocPreservation::passed)
    }

    /// The norm `σ` on `H`.
    pub fn engine(&self, cap: usize) -> GeneratedNorm<'_, PermGroup> {
        GeneratedNorm::new(&self.group, self.seed.iter().cloned(), cap).expect("validated seed")
    }

    /// `H` in table form when `|H| ≤ cap`.
    pub fn materialize(&self, cap: usize) -> Result<(FiniteNormedGroup, Vec<Perm>)> {
        let all = self.engine(cap).exhaust()?;
        let perms: Vec<Perm> = all.table.keys().cloned().collect();
        let table = TableGroup::from_perms(&perms)?;
        let norm = perms.iter().map(|p| all.table[p].clone()).collect();
        Ok((FiniteNormedGroup::new(table, norm)?, perms))
    }
}

/// Symmetrize `req`, add the generators and the identity, and check words.
fn requested_domain(sig: &Signature, req: &[Word]) -> Result<Vec<Word>> {
    let mut out: Vec<Word> = vec![Word::identity()];
    for g in sig.generators() {
        out.push(Word::letter(g));
        out.push(Word::letter(g.inv()));
    }
    for w in req {
        w.check(sig)?;
        out.push(w.clone());
        out.push(w.inv());
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Build `H`, `φ` and the isometry and moduli reports.
///
/// `lambda` is a finitely generated norm on the free group; `req` the set `A`
/// on which `φ` must be isometric (closed under inverses and extended by the
/// generators automatically).
pub fn finite_approx(
    lambda: &PartialPreNorm,
    req: &[Word],
    requests: &[MocRequest],
    caps: &Caps,
    exec: Execution,
) -> Result<FiniteApprox> {
    let sig = &lambda.signature;
    let fg = FreeGroup::new(sig.clone());
    let eng = lambda.engine(&fg, caps.ball);
    let domain = requested_domain(sig, req)?;
    let values = exec.try_map(&domain, |w| eng.value(w))?;
    let m_max = values.iter().max().cloned().unwrap_or_else(Q::zero);
    let m_min = values.iter().filter(|v| v.is_positive()).min().cloned().expect("generators are present");
    let k = domain.iter().map(Word::len).max().unwrap_or(0);
    let ratio = (&m_max / &m_min).ceil_usize().ok_or_else(|| Error::cap("M/m", usize::MAX))?;
    let n0 = k.checked_mul(ratio).ok_or_else(|| Error::cap("word ball radius", usize::MAX))?;

    struct Plan {
        lam_x: Q,
        r_prime: Q,
        r: Q,
        direct_only: bool,
    }
    let mut plans = Vec::new();
    let mut n = n0.max(1);
    for req in requests {
        sig.check_letter(req.generator)?;
        let x = Word::letter(req.generator);
        let lam_x = eng.value(&x)?;
        let c = &lam_x + &lam_x;
        let (r_prime, direct_only) = match req.gamma.eventual_domination_radius(&c) {
            Some(r) => (r, false),
            None => (req.gamma.r_max().clone(), true),
        };
        let r = req.gamma.at(&r_prime)?;
        let ball = eng.ball(&r)?;
        n = n.max(ball.table.keys().map(Word::len).max().unwrap_or(0));
        plans.push(Plan { lam_x, r_prime, r, direct_only });
    }
    if ball_size(sig.rank(), n).is_none_or(|s| s > caps.ball) {
        return Err(Error::cap(format!("word ball of radius {n}"), caps.ball));
    }

    let action = BallAction::new(sig, n, caps.ball)?;
    let mut map = BTreeMap::new();
    for w in &domain {
        map.insert(w.clone(), action.image(w)?);
    }
    let phi = PartialMonomorphism { map };
    let seed: Vec<(Perm, Q)> = domain
        .iter()
        .zip(&values)
        .filter(|(w, _)| !w.is_identity())
        .map(|(w, v)| (phi.map[w].clone(), v.clone()))
        .collect();
    let group = PermGroup { degree: action.degree() };
    let h = GeneratedNorm::new(&group, seed.iter().cloned(), caps.ball)?;
    let sigma_ball = h.ball(&m_max)?;
    let isometry: Vec<(Word, Q, Q)> = domain
        .iter()
        .zip(&values)
        .map(|(w, v)| {
            let s = sigma_ball.get(&phi.map[w]).cloned().expect("σ(φ(x)) ≤ λ(x) ≤ M");
            (w.clone(), v.clone(), s)
        })
        .collect();

    let mut moc = Vec::new();
    for (req, plan) in requests.iter().zip(plans) {
        let px = action.image(&Word::letter(req.generator))?;
        let sigma_x = sigma_ball.get(&px).cloned().expect("generator image is seeded");
        let reach = &plan.r_prime + &(&sigma_x + &sigma_x);
        let big = h.ball(&reach)?;
        let inner = big.by_value().into_iter().filter(|(_, v)| *v <= plan.r_prime).collect::<Vec<_>>();
        let found = exec.try_map(&inner, |(y, v)| -> Result<Option<(Perm, i8, Q, Q)>> {
            let bound = req.gamma.at(v)?;
            for positive in [true, false] {
                let c = group.conj(&px, y, positive);
                let cv = big.get(&c).cloned();
                match cv {
                    Some(cv) if cv <= bound => {}
                    Some(cv) => return Ok(Some((y.clone(), if positive { 1 } else { -1 }, cv, bound))),
                    // σ(conjugate) ≤ σ(y) + 2σ(x) ≤ reach, so this means a bug.
                    None => return Err(Error::Certificate("conjugate outside the covering ball".into())),
                }
            }
            Ok(None)
        })?;
        moc.push(MocPreservation {
            generator: req.generator,
            r_prime: plan.r_prime,
            r: plan.r,
            direct_only: plan.direct_only,
            checked: inner.len(),
            violation: found.into_iter().flatten().next(),
            generator_isometric: sigma_x == plan.lam_x,
        });
    }

    Ok(FiniteApprox { action, group, n0, n, m_max, m_min, k, phi, seed, isometry, moc, sigma_ball })
}

/// Minimal moduli of every generator of `lambda` on `[0, 2λ(x)]`.
pub fn minimal_moc_requests(lambda: &PartialPreNorm, caps: &Caps, exec: Execution) -> Result<Vec<MocRequest>> {
    let g = lambda.group();
    let eng = lambda.engine(&g, caps.ball);
    let mut out = Vec::new();
    for x in lambda.signature.generators() {
        let xw = Word::letter(x);
        let lam = eng.value(&xw)?;
        let d = &lam + &lam;
        let small = eng.ball(&d)?;
        let big = eng.ball(&(&d + &d))?;
        let gamma = crate::moc::minimal_moc(&g, &xw, &small, &d, crate::moc::ball_lookup(&big), exec)?;
        out.push(MocRequest { generator: x, gamma });
    }
    Ok(out)
}
