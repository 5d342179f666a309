//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Every tolerance and instance family is pinned below.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use normgroup::finite::{symmetric_discrete, FiniteNormedGroup};
use normgroup::finite_approx::{finite_approx, minimal_moc_requests};
use normgroup::freeproduct::{
    conjugation_family, free_product_norm, step1_merge, step2_tilde, FreeProductNorm, MatchOracle,
};
use normgroup::group::{symmetric_group, FreeGroup, Group, Perm};
use normgroup::moc::{minimal_moc_finite, Moc};
use normgroup::norms::{check_partial_norm, seminorm_kernel_quotient, NormedTarget, PartialPreNorm, TargetElem};
use normgroup::pipeline::{approximate, rationalize, Approximation, FiniteModel, PhiImage};
use normgroup::ultraprod::{scaled_f2_collapse_witness, sinf_delta, FinPerm};
use normgroup::words::{enumerate_ball, Letter, Signature, Word};
use normgroup::{Caps, Execution, Q};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Wall-clock limit for evaluating the 25 randomized free-group norms.
const NORM_TIME_LIMIT: Duration = Duration::from_secs(60);
/// Element cap for the independent Bellman-Ford ball.
const ORACLE_BALL_CAP: usize = 2_000_000;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn caps() -> Caps {
    Caps { ball: 3_000_000, matches: 200_000 }
}

fn exec() -> Execution {
    Execution::default()
}

fn lib<T>(r: normgroup::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn unit_free(rank: usize) -> PartialPreNorm {
    let sig = Signature::free(rank);
    let gens: Vec<(Word, Q)> = sig.generators().into_iter().map(|l| (Word::letter(l), Q::one())).collect();
    PartialPreNorm::symmetric(sig, gens).unwrap()
}

// ---------------------------------------------------------------------------
// Independent free-group arithmetic: letters are ±1, ±2, … as i8.

fn to_i8(w: &Word) -> Vec<i8> {
    w.letters()
        .iter()
        .map(|l| {
            let v = l.index as i8;
            if l.inverse {
                -v
            } else {
                v
            }
        })
        .collect()
}

fn concat(a: &[i8], b: &[i8]) -> Vec<i8> {
    let mut out = a.to_vec();
    for &x in b {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

fn invert(a: &[i8]) -> Vec<i8> {
    a.iter().rev().map(|x| -x).collect()
}

/// Shortest seed-product cost (half-units) of every element reachable with
/// cost ≤ `radius`, by Bellman-Ford relaxation from the identity.
fn bf_ball(seeds: &[(Vec<i8>, u32)], radius: u32) -> Option<HashMap<Vec<i8>, u32>> {
    let mut dist: HashMap<Vec<i8>, u32> = HashMap::from([(Vec::new(), 0)]);
    let mut frontier = vec![Vec::new()];
    while !frontier.is_empty() {
        let mut changed: BTreeSet<Vec<i8>> = BTreeSet::new();
        for x in &frontier {
            let c = dist[x];
            for (s, v) in seeds {
                let nc = c + v;
                if nc > radius {
                    continue;
                }
                let y = concat(x, s);
                if dist.get(&y).is_none_or(|&old| nc < old) {
                    dist.insert(y.clone(), nc);
                    changed.insert(y);
                }
            }
        }
        if dist.len() > ORACLE_BALL_CAP {
            return None;
        }
        frontier = changed.into_iter().collect();
    }
    Some(dist)
}

/// Cost of the cheapest way to cut `x` into consecutive seed words.
fn segment_bound(seeds: &HashMap<Vec<i8>, u32>, x: &[i8]) -> u32 {
    let mut best = vec![u32::MAX; x.len() + 1];
    best[0] = 0;
    for i in 1..=x.len() {
        for j in 0..i {
            if let (Some(v), true) = (seeds.get(&x[j..i]), best[j] < u32::MAX) {
                best[i] = best[i].min(best[j] + v);
            }
        }
    }
    best[x.len()]
}

/// Exact norm (half-units) of each target. A factorization of cost
/// `c ≤ U_x` splits at its first prefix of cost `≥ U_x/2`: that prefix costs
/// less than `U_x/2 + max seed` and the rest at most `⌊U_x/2⌋`, so
/// `x = p·s` with both parts in one ball. Every such `p·s` found is a genuine
/// factorization, so the bounds `U_x` shrink while the radius grows until it
/// covers them.
fn brute_force_norms(seeds: &[(Vec<i8>, u32)], targets: &[Vec<i8>]) -> Option<Vec<u32>> {
    let top = seeds.iter().map(|s| s.1).max().unwrap_or(0);
    let by_word: HashMap<Vec<i8>, u32> = seeds.iter().cloned().collect();
    let mut bound: Vec<u32> = targets.iter().map(|x| segment_bound(&by_word, x)).collect();
    let mut radius = top;
    loop {
        let needed = bound.iter().map(|u| u.div_ceil(2) + top).max().unwrap_or(0);
        let r = radius.min(needed);
        let ball = bf_ball(seeds, r)?;
        let mut suffixes: Vec<(u32, Vec<i8>)> = ball.iter().map(|(s, c)| (*c, invert(s))).collect();
        suffixes.sort();
        for (x, u) in targets.iter().zip(bound.iter_mut()) {
            let half = *u / 2;
            let limit = suffixes.partition_point(|(c, _)| *c <= half);
            let best = suffixes[..limit].iter().filter_map(|(c, si)| ball.get(&concat(x, si)).map(|d| c + d)).min();
            *u = best.map_or(*u, |b| b.min(*u));
        }
        if r == needed {
            return Some(bound);
        }
        radius = r + top;
    }
}

fn half_units(q: &Q) -> u32 {
    let h = q * &Q::int(2);
    let n = h.floor_usize().expect("nonnegative seed");
    assert_eq!(Q::from(n), h, "half-integral seed");
    n as u32
}

const HALVES: [i64; 6] = [1, 2, 3, 4, 5, 6];

fn random_f2_seed(rng: &mut ChaCha8Rng) -> PartialPreNorm {
    let sig = Signature::free(2);
    let mut entries: Vec<(Word, Q)> = sig
        .generators()
        .into_iter()
        .map(|l| (Word::letter(l), Q::frac(*HALVES.choose(rng).unwrap(), 2)))
        .collect();
    let letters = sig.letters();
    let extra = rng.gen_range(0..=2);
    while entries.len() < 2 + extra {
        let len = rng.gen_range(2..=3);
        let raw: Vec<Letter> = (0..len).map(|_| *letters.choose(rng).unwrap()).collect();
        let w = Word::from_letters(raw);
        if w.len() >= 2 && entries.iter().all(|(e, _)| *e != w && *e != w.inv()) {
            entries.push((w, Q::frac(*HALVES.choose(rng).unwrap(), 2)));
        }
    }
    PartialPreNorm::symmetric(sig, entries).unwrap()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sig = Signature::free(2);
    let targets = lib(enumerate_ball(&sig, 4, 1000))?;
    let targets_i8: Vec<Vec<i8>> = targets.iter().map(to_i8).collect();
    let mut library = Duration::ZERO;
    let mut oracle = Duration::ZERO;
    let mut compared = 0;
    for instance in 0..25 {
        let seed = random_f2_seed(&mut rng);
        let g = FreeGroup::new(sig.clone());
        let eng = seed.engine(&g, caps().ball);
        let start = Instant::now();
        let got = lib(exec().try_map(&targets, |w| eng.value(w)))?;
        library += start.elapsed();
        let seeds: Vec<(Vec<i8>, u32)> = seed.entries().iter().map(|(w, v)| (to_i8(w), half_units(v))).collect();
        let start = Instant::now();
        let want = brute_force_norms(&seeds, &targets_i8)
            .ok_or_else(|| format!("instance {instance}: oracle ball exceeds {ORACLE_BALL_CAP}"))?;
        oracle += start.elapsed();
        for ((w, a), b) in targets.iter().zip(&got).zip(&want) {
            ensure!(*a == Q::frac(*b as i64, 2), "instance {instance}: λ({w}) = {a}, brute force {b}/2");
            compared += 1;
        }
    }
    ensure!(library < NORM_TIME_LIMIT, "evaluation took {library:?}, limit {NORM_TIME_LIMIT:?}");
    Ok(format!(
        "25 seeds, {compared} values exact; evaluation {:.1}s, oracle {:.1}s",
        library.as_secs_f64(),
        oracle.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------

fn criterion_2() -> Outcome {
    let factors = vec![unit_free(1), unit_free(1)];
    let budget = Q::int(3);
    let max_len = 8;
    let sigma_prime = lib(step1_merge(&factors))?;
    let sig = sigma_prime.signature.clone();
    let gamma = lib(conjugation_family(&factors, &budget, &caps(), exec()))?;
    let g = sigma_prime.group();
    let sigma = lib(sigma_prime.engine(&g, caps().ball).ball(&budget))?;
    let oracle = MatchOracle { sigma: &sigma, gamma: &gamma, budget: budget.clone() };
    let table = lib(oracle.table(&sig, max_len, caps().matches, exec()))?;
    let closure = lib(step2_tilde(sigma_prime.entries(), &sig.letters(), &gamma, &budget, caps().ball))?;
    for (w, v) in &closure.table {
        ensure!(w.len() <= max_len, "settled element {w} is longer than {max_len}");
        ensure!(table.get(w) == Some(v), "{w}: closure {v}, oracle {:?}", table.get(w));
    }
    let below: usize = table.values().filter(|v| **v <= budget).count();
    ensure!(below == closure.len(), "oracle settles {below} elements, closure {}", closure.len());
    Ok(format!("{} settled elements agree with the match oracle", closure.len()))
}

// ---------------------------------------------------------------------------

/// Generator values for the random factors; the ratio sets the table sizes.
const FACTOR_VALUES: [(i64, i64); 3] = [(1, 1), (5, 4), (3, 2)];

/// `F₁` with a random generator value and, half the time, a random value on
/// `a²` or `a³`.
fn random_factor(rng: &mut ChaCha8Rng) -> PartialPreNorm {
    let sig = Signature::free(1);
    let a = sig.generators()[0];
    let pick = |rng: &mut ChaCha8Rng| {
        let (p, q) = *FACTOR_VALUES.choose(rng).unwrap();
        Q::frac(p, q)
    };
    let mut entries = vec![(Word::letter(a), pick(rng))];
    if rng.gen_bool(0.5) {
        entries.push((Word::power(a, rng.gen_range(2..=3)), pick(rng)));
    }
    PartialPreNorm::symmetric(sig, entries).unwrap()
}

fn random_products() -> Result<Vec<FreeProductNorm>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..10)
        .map(|_| {
            let factors = vec![random_factor(&mut rng), random_factor(&mut rng)];
            lib(free_product_norm(&factors, &Q::zero(), &caps(), exec()))
        })
        .collect()
}

fn criterion_3(products: &[FreeProductNorm]) -> Outcome {
    let mut checked = 0;
    for (i, fp) in products.iter().enumerate() {
        let g = fp.seed.group();
        let eng = fp.seed.engine(&g, caps().ball);
        for (k, f) in fp.factors.iter().enumerate() {
            let fg = f.group();
            let ball = lib(f.engine(&fg, caps().ball).ball(&Q::int(2)))?;
            for (w, v) in &ball.table {
                let lifted = w.relabel_factor(0, k);
                let l = lib(eng.value(&lifted))?;
                ensure!(l == *v, "instance {i}: λ({lifted}) = {l} but factor norm {v}");
                checked += 1;
            }
        }
        ensure!(fp.extension_checks.iter().all(|c| c.mismatches.is_empty()), "instance {i}: library extension check");
    }
    Ok(format!("10 instances, {checked} factor elements restrict exactly"))
}

fn criterion_4(products: &[FreeProductNorm]) -> Outcome {
    let mut checked = 0;
    for (i, fp) in products.iter().enumerate() {
        let g = fp.seed.group();
        let eng = fp.seed.engine(&g, caps().ball);
        let two_max = fp.generator_norms.values().max().cloned().unwrap() * Q::int(2);
        let big = lib(eng.ball(&(&fp.r + &two_max)))?;
        for (l, moc) in &fp.factor_mocs {
            let x = Word::letter(*l);
            for (y, v) in big.table.iter().filter(|(_, v)| **v <= fp.r) {
                let bound = lib(moc.at(v))? * Q::int(2);
                for c in [y.conjugate_by(&x), y.conjugate_by(&x.inv())] {
                    let lc = big.get(&c).ok_or_else(|| format!("instance {i}: {c} outside the ball"))?;
                    ensure!(*lc <= bound, "instance {i}: λ({c}) = {lc} > 2Γ({v}) = {bound} for {l}");
                    checked += 1;
                }
            }
        }
        ensure!(fp.moc_checks.iter().all(|c| c.violation_double.is_none()), "instance {i}: library modulus check");
    }
    Ok(format!("{checked} conjugates within 2Γ on the radius-r tables"))
}

// ---------------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let mut detail = Vec::new();
    for rank in [1, 2] {
        let lambda = unit_free(rank);
        let req = lib(enumerate_ball(&lambda.signature, 2, 1000))?;
        let requests = lib(minimal_moc_requests(&lambda, &caps(), exec()))?;
        let fa = lib(finite_approx(&lambda, &req, &requests, &caps(), exec()))?;
        let eng = fa.engine(caps().ball);
        for x in &req {
            let s = lib(eng.value(&lib(fa.action.image(x))?))?;
            ensure!(s == Q::from(x.len()), "F{rank}: σ(φ({x})) = {s}, |x| = {}", x.len());
        }
        ensure!(fa.isometric(), "F{rank}: library isometry report");
        for m in &fa.moc {
            ensure!(m.passed(), "F{rank}: modulus of {} not preserved: {:?}", m.generator, m.violation);
        }
        detail.push(format!("F{rank}: degree {}, {} requests", fa.action.degree(), fa.moc.len()));
    }
    Ok(detail.join("; "))
}

// ---------------------------------------------------------------------------

fn recheck_certificate(a: &Approximation, target: &NormedTarget, subset: &[TargetElem], eps: &Q) -> Result<usize, String> {
    let sigma_of = |i: usize, j: Option<usize>, k: Option<usize>| -> Result<Q, String> {
        // σ(φ(i)), or the relation defect σ((φ(j)φ(k))⁻¹ φ(i)).
        match &a.model {
            FiniteModel::Permutations(fa) => {
                let h = &fa.group;
                let p = |n: usize| match &a.phi[n] {
                    PhiImage::Perm(p) => p.clone(),
                    PhiImage::Index(_) => unreachable!(),
                };
                let e = match (j, k) {
                    (Some(j), Some(k)) => h.mul(&h.inv(&h.mul(&p(j), &p(k))), &p(i)),
                    _ => p(i),
                };
                lib(fa.engine(caps().ball).value(&e))
            }
            FiniteModel::Table(fg) => {
                let h = &fg.group;
                let p = |n: usize| match &a.phi[n] {
                    PhiImage::Index(x) => *x,
                    PhiImage::Perm(_) => unreachable!(),
                };
                let e = match (j, k) {
                    (Some(j), Some(k)) => h.mul(&h.inv(&h.mul(&p(j), &p(k))), &p(i)),
                    _ => p(i),
                };
                Ok(fg.norm[e].clone())
            }
        }
    };
    let pos: BTreeMap<&TargetElem, usize> = subset.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut checks = 0;
    for (gi, g) in subset.iter().enumerate() {
        let lam = lib(target.norm(g, caps().ball))?;
        let s = sigma_of(gi, None, None)?;
        ensure!((&s - &lam).abs() < *eps, "norm defect at {g:?}: σ = {s}, λ = {lam}");
        for (hi, h) in subset.iter().enumerate() {
            let Some(&ki) = pos.get(&lib(target.mul(g, h))?) else { continue };
            let d = sigma_of(ki, Some(gi), Some(hi))?;
            ensure!(d < *eps, "relation defect {d} at {g:?}, {h:?}");
            ensure!(d <= a.seed.gap_bound(), "relation defect {d} above 1/m = {}", a.seed.gap_bound());
            checks += 1;
        }
    }
    Ok(checks)
}

fn criterion_6() -> Outcome {
    let cases = [
        (
            "Z",
            NormedTarget::IntLattice { weights: vec![Q::one()] },
            [0, 1, -1, 2, -2].iter().map(|&v| TargetElem::Vector(vec![v])).collect::<Vec<_>>(),
            Q::frac(1, 4),
        ),
        ("S3", NormedTarget::Finite(symmetric_discrete(3).0), (0..6).map(TargetElem::Index).collect(), Q::frac(1, 2)),
    ];
    let mut detail = Vec::new();
    for (name, target, subset, eps) in cases {
        let a = lib(approximate(&target, &subset, &eps, &caps(), exec()))?;
        ensure!(a.certificate.violations.is_empty(), "{name}: violations {:?}", a.certificate.violations);
        for m in &a.moc_report {
            ensure!(m.violation.is_none(), "{name}: modulus bound exceeded at {:?}", m.violation);
        }
        ensure!(
            a.certificate.max_relation_defect <= a.trace.gap_bound,
            "{name}: relation defect {} above traced {}",
            a.certificate.max_relation_defect,
            a.trace.gap_bound
        );
        let checks = recheck_certificate(&a, &target, &subset, &eps)?;
        detail.push(format!("{name}: {checks} relations, max defect {}", a.certificate.max_relation_defect));
    }
    Ok(detail.join("; "))
}

// ---------------------------------------------------------------------------

/// `C = {1} ∪ {w, w⁻¹}` for up to five random nonidentity words.
fn random_symmetric_set(rng: &mut ChaCha8Rng, sig: &Signature) -> Vec<Word> {
    let letters = sig.letters();
    let mut set: BTreeSet<Word> = BTreeSet::from([Word::identity()]);
    let pairs = rng.gen_range(1..=5);
    for _ in 0..pairs {
        let len = rng.gen_range(1..=3);
        let w = Word::from_letters((0..len).map(|_| *letters.choose(rng).unwrap()));
        if !w.is_identity() {
            set.insert(w.inv());
            set.insert(w);
        }
    }
    set.into_iter().collect()
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut zero_valued = 0;
    for run in 0..50 {
        let (sig, words, rho) = if run % 2 == 0 {
            // Pullback of the scaled cyclic distance on ℤ/k along a ↦ s.
            let sig = Signature::free(1);
            let a = sig.generators()[0];
            let mut exponents: Vec<i64> = (1..=5).collect();
            exponents.shuffle(&mut rng);
            exponents.truncate(rng.gen_range(1..=5));
            let mut words: Vec<Word> = exponents.iter().flat_map(|&t| [Word::power(a, t), Word::power(a, -t)]).collect();
            words.push(Word::identity());
            words.sort();
            let k: i64 = rng.gen_range(2..=5);
            let s: i64 = rng.gen_range(1..k);
            let weight = Q::frac(*HALVES.choose(&mut rng).unwrap(), 2);
            let rho = words
                .iter()
                .map(|w| {
                    let e: i64 = to_i8(w).iter().map(|&x| x.signum() as i64).sum();
                    let r = (e * s).rem_euclid(k);
                    &weight * &Q::int(r.min(k - r))
                })
                .collect::<Vec<_>>();
            (sig, words, rho)
        } else {
            let sig = Signature::free(2);
            let words = random_symmetric_set(&mut rng, &sig);
            let seed = random_f2_seed(&mut rng);
            let g = FreeGroup::new(sig.clone());
            let eng = seed.engine(&g, caps().ball);
            let rho = lib(words.iter().map(|w| eng.value(w)).collect())?;
            (sig, words, rho)
        };
        ensure!(words.len() <= 11, "run {run}: |C| = {}", words.len());
        zero_valued += words.iter().zip(&rho).filter(|(w, v)| !w.is_identity() && v.is_zero()).count();
        let r = lib(rationalize(&words, &rho))?;
        let gap = Q::frac(1, words.len() as i64);
        for ((w, s), p) in words.iter().zip(&r.sigma).zip(&rho) {
            let d = s - p;
            ensure!(!d.is_negative() && d <= gap, "run {run}: σ′ − ρ = {d} at {w}, bound {gap}");
        }
        let seed: Vec<(Word, Q)> = r
            .words
            .iter()
            .zip(&r.sigma)
            .filter(|(w, _)| !w.is_identity())
            .map(|(w, v)| (w.clone(), v.clone()))
            .collect();
        let verdict = lib(check_partial_norm(&FreeGroup::new(sig), &seed, caps().ball))?;
        ensure!(verdict.holds, "run {run}: not a partial norm: {:?}", verdict.counterexample);
    }
    Ok(format!("50 inputs ({zero_valued} zero-valued words) within 1/|C| and subadditive"))
}

// ---------------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let sig = Signature::free(2);
    let words = lib(enumerate_ball(&sig, 6, 10_000))?;
    let mut checked = 0;
    for g in words.iter().filter(|w| !w.is_identity()) {
        let gi = to_i8(g);
        for n in 1..=10 {
            let w = lib(scaled_f2_collapse_witness(g, n))?;
            let x: Vec<i8> = to_i8(&Word::letter(w.x));
            let len = concat(&concat(&invert(&gi), &x), &gi).len();
            ensure!(len == 2 * g.len() + 1, "|g⁻¹xg| = {len} for g = {g}");
            let exact = Q::frac(len as i64, n as i64);
            ensure!(w.value == exact, "g = {g}, n = {n}: value {} ≠ {exact}", w.value);
            ensure!(w.value > Q::frac(2 * g.len() as i64, n as i64), "g = {g}, n = {n}: not above 2λ_n(g)");
            checked += 1;
        }
    }
    Ok(format!("{checked} (g, n) pairs give (2|g|+1)/n"))
}

// ---------------------------------------------------------------------------

/// `i ↦ p⁻¹(s(p(i)))` on 1-based points, as an image vector long enough for
/// all three maps.
fn conjugate_images(p: &[usize], s: &[usize]) -> Vec<usize> {
    let size = p.len().max(s.len());
    let at = |v: &[usize], i: usize| if i <= v.len() { v[i - 1] } else { i };
    let mut pinv = vec![0; size];
    for i in 1..=size {
        pinv[at(p, i) - 1] = i;
    }
    (1..=size).map(|i| pinv[at(s, at(p, i)) - 1]).collect()
}

fn min_moved(v: &[usize]) -> Option<usize> {
    (1..=v.len()).find(|&i| v[i - 1] != i)
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut sampled = 0;
    for trial in 0..100 {
        let support = rng.gen_range(1..=12);
        let mut images: Vec<usize> = (1..=support).collect();
        images.shuffle(&mut rng);
        let p = lib(FinPerm::from_images(images.clone()))?;
        for n in 1..=10 {
            let d = lib(sinf_delta(&p, n))?;
            ensure!(d.forward_counterexamples.is_empty(), "trial {trial}, n = {n}: {:?}", d.forward_counterexamples);
            ensure!(d.sharp(n), "trial {trial}, n = {n}: converse witness {:?} not sharp", d.converse);
            let m = (1..=n).map(|l| if l <= support { images[l - 1] } else { l }).max().unwrap();
            ensure!(d.delta == Q::frac(1, m as i64), "trial {trial}, n = {n}: δ = {}, expected 1/{m}", d.delta);
            // Random s moving only points above m.
            for _ in 0..5 {
                let top = m + rng.gen_range(1..=10);
                let mut s: Vec<usize> = (1..=top).collect();
                s[m..].shuffle(&mut rng);
                let c = conjugate_images(&images, &s);
                ensure!(min_moved(&c).is_none_or(|i| i > n), "trial {trial}, n = {n}: conjugate of {s:?} moves {c:?}");
                sampled += 1;
            }
            // (p(n) m+1) has λ = 1/p(n) ≥ δ and its conjugate moves n.
            let mut t: Vec<usize> = (1..=m + 1).collect();
            let pn = if n <= support { images[n - 1] } else { n };
            t.swap(pn - 1, m);
            ensure!(min_moved(&t) == Some(pn) && pn <= m, "trial {trial}: witness shape");
            let c = conjugate_images(&images, &t);
            ensure!(min_moved(&c).is_some_and(|i| i <= n), "trial {trial}, n = {n}: converse conjugate too small");
        }
    }
    Ok(format!("100 permutations × n ≤ 10 sharp, {sampled} random forward samples"))
}

// ---------------------------------------------------------------------------

/// `max(r, max{λ(x^±g x^∓) : λ(g) ≤ r})` by direct search.
fn brute_moc(fg: &FiniteNormedGroup, x: usize, r: &Q) -> Q {
    let g = &fg.group;
    let mut best = r.clone();
    for e in g.elements().filter(|&e| fg.norm[e] <= *r) {
        for c in [g.conj(&x, &e, true), g.conj(&x, &e, false)] {
            best = Q::max_of(&best, &fg.norm[c]);
        }
    }
    best
}

fn moc_matches_brute(fg: &FiniteNormedGroup, x: usize, m: &Moc) -> Result<bool, String> {
    let mut identity = true;
    let mut radii: Vec<Q> = fg.norm.clone();
    radii.extend(m.breakpoints().into_iter().map(|b| b.0));
    for r in radii.iter().filter(|r| *r <= m.r_max()) {
        let want = brute_moc(fg, x, r);
        ensure!(lib(m.at(r))? == want, "Γ_{x}({r}) = {}, direct {want}", lib(m.at(r))?);
        identity &= want == *r;
    }
    Ok(identity)
}

fn criterion_10() -> Outcome {
    let (discrete, perms) = symmetric_discrete(3);
    for x in discrete.group.elements() {
        let m = lib(minimal_moc_finite(&discrete, x))?;
        ensure!(m.breakpoints() == Moc::identity(m.r_max().clone()).breakpoints(), "Γ_{x} is not the identity: {m:?}");
        ensure!(moc_matches_brute(&discrete, x, &m)?, "direct search disagrees for {x}");
    }
    // Word length for the generators (1 2), (2 3): not conjugation invariant.
    let (table, _) = symmetric_group(3);
    let find = |images: [u32; 3]| perms.iter().position(|p| *p == Perm(images.to_vec())).unwrap();
    let gens = [find([1, 0, 2]), find([0, 2, 1])];
    let mut norm = vec![None; table.order()];
    norm[table.identity] = Some(0i64);
    let mut layer = vec![table.identity];
    let mut d = 0;
    while !layer.is_empty() {
        d += 1;
        let mut next = Vec::new();
        for &e in &layer {
            for &s in &gens {
                let y = table.mul(&e, &s);
                if norm[y].is_none() {
                    norm[y] = Some(d);
                    next.push(y);
                }
            }
        }
        layer = next;
    }
    let fg = lib(FiniteNormedGroup::new(table, norm.into_iter().map(|v| Q::int(v.unwrap())).collect()))?;
    ensure!(!fg.is_conjugacy_invariant(), "word length on S3 should not be invariant");
    let mut differs = 0;
    for x in fg.group.elements() {
        let m = lib(minimal_moc_finite(&fg, x))?;
        if !moc_matches_brute(&fg, x, &m)? {
            differs += 1;
        }
    }
    ensure!(differs > 0, "every modulus is the identity for a non-invariant norm");
    Ok(format!("discrete: 6 identity moduli; word length: {differs} non-identity"))
}

// ---------------------------------------------------------------------------

fn criterion_11() -> Outcome {
    let (table, perms) = symmetric_group(3);
    let parity = |p: &Perm| {
        let v = &p.0;
        (0..v.len()).flat_map(|i| (i + 1..v.len()).map(move |j| (i, j))).filter(|&(i, j)| v[i] > v[j]).count() % 2
    };
    let norm: Vec<Q> = perms.iter().map(|p| Q::from(parity(p))).collect();
    let fg = lib(FiniteNormedGroup::seminormed(table, norm))?;
    let (q, coset) = lib(seminorm_kernel_quotient(&fg))?;
    ensure!(q.order() == 2, "quotient order {}", q.order());
    for a in fg.group.elements() {
        ensure!(q.norm[coset[a]] == fg.norm[a], "induced norm differs at {a}");
        for b in fg.group.elements() {
            let ab = fg.group.mul(&a, &b);
            ensure!(coset[ab] == q.group.mul(&coset[a], &coset[b]), "quotient map not multiplicative");
        }
    }
    let values: BTreeSet<&Q> = q.norm.iter().collect();
    ensure!(values == BTreeSet::from([&Q::zero(), &Q::one()]), "quotient norm values {values:?}");
    Ok("S3/A3 has order 2 with norm {0, 1}".into())
}

// ---------------------------------------------------------------------------

fn run(name: &str, index: usize, f: impl FnOnce() -> Outcome, failed: &mut Vec<usize>) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => println!("PASS {index:>2} {name}: {detail} [{secs:.1}s]"),
        Err(why) => {
            println!("FAIL {index:>2} {name}: {why} [{secs:.1}s]");
            failed.push(index);
        }
    }
}

fn main() {
    let mut failed = Vec::new();
    run("generated norm vs brute force on F2", 1, criterion_1, &mut failed);
    run("closure vs match oracle", 2, criterion_2, &mut failed);
    let products = catch_unwind(random_products).unwrap_or_else(|_| Err("panic while building products".into()));
    run("free-product extension", 3, || criterion_3(products.as_deref().map_err(Clone::clone)?), &mut failed);
    run("free-product conjugation modulus", 4, || criterion_4(products.as_deref().map_err(Clone::clone)?), &mut failed);
    run("finite approximation of F1 and F2", 5, criterion_5, &mut failed);
    run("approximate Z and S3", 6, criterion_6, &mut failed);
    run("rationalization", 7, criterion_7, &mut failed);
    run("scaled F2 collapse", 8, criterion_8, &mut failed);
    run("S-infinity conjugation continuity", 9, criterion_9, &mut failed);
    run("minimal modulus on S3", 10, criterion_10, &mut failed);
    run("kernel quotient of S3", 11, criterion_11, &mut failed);
    if failed.is_empty() {
        println!("acceptance: 11/11 criteria passed");
    } else {
        println!("acceptance: failed {failed:?}");
        std::process::exit(1);
    }
}
