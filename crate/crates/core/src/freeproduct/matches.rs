//! Matches on raw words, the recursive value `λ_ρ`, and the bounded-length
//! brute-force evaluator of `λ̃` built on an interval dynamic program.
//!
//! Positions are 0-based. A match is stored as its involution `ρ`.
//!
//! The recursion on `w_0 … w_{n-1}` with match `ρ`:
//! * `n = 0`: 0; `ρ = id`: `σ(w′)`;
//! * `ρ(0) = n-1`: `Γ_{w_0}(λ_{ρ′}(w_1 … w_{n-2}))`;
//! * `0 < ρ(0) < n-1`: split after `ρ(0)` and add;
//! * `ρ(0) = 0`, `ρ ≠ id`: the maximal fixed prefix `w_0 … w_{t-1}` is valued
//!   `σ` of its reduction and added to the value of the rest.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::norms::NormBall;
use crate::rational::Q;
use crate::words::{reduce_letters, Letter, Signature, Word};

use super::GammaFamily;

/// A non-crossing involution on the positions of a word pairing mutually
/// inverse letters.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Match {
    rho: Vec<usize>,
}

impl Match {
    pub fn identity(n: usize) -> Self {
        Match { rho: (0..n).collect() }
    }

    /// Validate `rho` as a match for `word`.
    pub fn new(word: &[Letter], rho: Vec<usize>) -> Result<Self> {
        let n = word.len();
        if rho.len() != n {
            return Err(Error::InvalidMatch(format!("length {} for a word of length {n}", rho.len())));
        }
        for (i, &j) in rho.iter().enumerate() {
            if j >= n || rho[j] != i {
                return Err(Error::InvalidMatch(format!("not an involution at {i}")));
            }
            if j != i && !word[i].is_inverse_of(word[j]) {
                return Err(Error::InvalidMatch(format!("positions {i} and {j} are not mutually inverse")));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if j < rho[i] && rho[i] < rho[j] && i < rho[i] {
                    return Err(Error::InvalidMatch(format!("pairs at {i} and {j} cross")));
                }
            }
        }
        Ok(Match { rho })
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn partner(&self, i: usize) -> usize {
        self.rho[i]
    }

    pub fn is_identity(&self) -> bool {
        self.rho.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.rho
    }

    /// `ρ` restricted to `[a, b)`, shifted to start at 0. The interval must
    /// be closed under `ρ`.
    fn restrict(&self, a: usize, b: usize) -> Match {
        Match { rho: self.rho[a..b].iter().map(|&j| j - a).collect() }
    }
}

/// Number of matches of every segment `[i, j)`, as `count[i][j]`.
fn count_table(w: &[Letter]) -> Vec<Vec<u128>> {
    let n = w.len();
    let mut c = vec![vec![0u128; n + 1]; n + 1];
    for i in (0..=n).rev() {
        c[i][i] = 1;
        for j in i + 1..=n {
            let mut total = c[i + 1][j];
            for k in i + 1..j {
                if w[i].is_inverse_of(w[k]) {
                    total = total.saturating_add(c[i + 1][k].saturating_mul(c[k + 1][j]));
                }
            }
            c[i][j] = total;
        }
    }
    c
}

/// Number of matches for `w`, without enumerating them.
pub fn count_matches(w: &[Letter]) -> u128 {
    count_table(w)[0][w.len()]
}

/// All matches for `w`, in lexicographic order of `ρ`.
pub fn enumerate_matches(w: &[Letter], cap: usize) -> Result<Vec<Match>> {
    let total = count_matches(w);
    if total > cap as u128 {
        return Err(Error::cap(format!("matches of a word of length {}", w.len()), cap));
    }
    // Partner lists for the positions of [i, j), in absolute coordinates.
    fn seg(w: &[Letter], i: usize, j: usize) -> Vec<Vec<usize>> {
        if i == j {
            return vec![Vec::new()];
        }
        let mut out: Vec<Vec<usize>> = seg(w, i + 1, j)
            .into_iter()
            .map(|rest| std::iter::once(i).chain(rest).collect())
            .collect();
        for k in i + 1..j {
            if w[i].is_inverse_of(w[k]) {
                let right = seg(w, k + 1, j);
                for inner in seg(w, i + 1, k) {
                    for r in &right {
                        let mut m = Vec::with_capacity(j - i);
                        m.push(k);
                        m.extend(&inner);
                        m.push(i);
                        m.extend(r);
                        out.push(m);
                    }
                }
            }
        }
        out
    }
    let mut out = seg(w, 0, w.len());
    out.sort();
    Ok(out.into_iter().map(|rho| Match { rho }).collect())
}

/// `λ_ρ(w)` by structural recursion. `sigma` evaluates the Step-1 norm on
/// reduced words.
pub fn lambda_rho<F>(w: &[Letter], rho: &Match, sigma: &F, gamma: &GammaFamily) -> Result<Q>
where
    F: Fn(&Word) -> Result<Q>,
{
    if rho.len() != w.len() {
        return Err(Error::InvalidMatch("match length differs from word length".into()));
    }
    let n = w.len();
    if n == 0 {
        return Ok(Q::zero());
    }
    if rho.is_identity() {
        return sigma(&reduce_letters(w.iter().copied()));
    }
    let p = rho.partner(0);
    if p == n - 1 {
        let inner = lambda_rho(&w[1..n - 1], &rho.restrict(1, n - 1), sigma, gamma)?;
        return gamma.value(w[0], &inner);
    }
    if p > 0 {
        let left = lambda_rho(&w[..=p], &rho.restrict(0, p + 1), sigma, gamma)?;
        let right = lambda_rho(&w[p + 1..], &rho.restrict(p + 1, n), sigma, gamma)?;
        return Ok(left + right);
    }
    let t = (0..n).find(|&i| rho.partner(i) != i).expect("non-identity match");
    let head = sigma(&reduce_letters(w[..t].iter().copied()))?;
    let tail = lambda_rho(&w[t..], &rho.restrict(t, n), sigma, gamma)?;
    Ok(head + tail)
}

/// Minimum of `λ_ρ(w)` over all matches `ρ`, by brute force.
pub fn min_over_matches<F>(w: &[Letter], sigma: &F, gamma: &GammaFamily, cap: usize) -> Result<Q>
where
    F: Fn(&Word) -> Result<Q>,
{
    let mut best: Option<Q> = None;
    for m in enumerate_matches(w, cap)? {
        let v = lambda_rho(w, &m, sigma, gamma)?;
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
    }
    Ok(best.expect("the identity match always exists"))
}

/// Bounded brute-force evaluator of `λ̃`.
///
/// Values above `budget` are treated as infinite; `sigma` must tabulate the
/// Step-1 norm on every reduced word of length `≤ max_len`.
pub struct MatchOracle<'a> {
    pub sigma: &'a NormBall<Word>,
    pub gamma: &'a GammaFamily,
    pub budget: Q,
}

type Cost = Option<Q>;

fn add(a: &Cost, b: &Cost) -> Cost {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    }
}

fn min_into(slot: &mut Cost, c: Cost) {
    if let Some(v) = c {
        if slot.as_ref().is_none_or(|s| v < *s) {
            *slot = Some(v);
        }
    }
}

impl MatchOracle<'_> {
    fn cap_budget(&self, c: Cost) -> Cost {
        c.filter(|v| *v <= self.budget)
    }

    fn sigma_of(&self, letters: &[Letter]) -> Cost {
        let v = self.sigma.get(&reduce_letters(letters.iter().copied())).cloned();
        self.cap_budget(v)
    }

    /// `min_ρ λ_ρ(w)` (or `None` when above the budget) by an interval DP:
    /// `f[i][j]` is the best value of the segment `[i, j)` and `nf[t][j]` the
    /// best value among matches with `ρ(t) ≠ t`.
    pub fn word_min(&self, w: &[Letter]) -> Result<Cost> {
        let n = w.len();
        let mut f: Vec<Vec<Cost>> = vec![vec![None; n + 1]; n + 1];
        let mut nf: Vec<Vec<Cost>> = vec![vec![None; n + 1]; n + 1];
        for (i, row) in f.iter_mut().enumerate() {
            row[i] = Some(Q::zero());
        }
        for len in 1..=n {
            for i in 0..=n - len {
                let j = i + len;
                let mut best_nf: Cost = None;
                for k in i + 1..j {
                    if w[i].is_inverse_of(w[k]) {
                        let pair = match &f[i + 1][k] {
                            Some(v) => self.cap_budget(self.gamma.bounded(w[i], v, &self.budget)?),
                            None => None,
                        };
                        min_into(&mut best_nf, self.cap_budget(add(&pair, &f[k + 1][j])));
                    }
                }
                nf[i][j] = best_nf;
                let mut best = self.sigma_of(&w[i..j]);
                min_into(&mut best, nf[i][j].clone());
                for t in i + 1..j {
                    min_into(&mut best, self.cap_budget(add(&self.sigma_of(&w[i..t]), &nf[t][j])));
                }
                f[i][j] = best;
            }
        }
        Ok(f[0][n].clone())
    }

    /// `min λ_ρ(w)` over every raw word of length `≤ max_len` and every
    /// match, grouped by the reduced word `w′`; only values `≤ budget` kept.
    pub fn table(&self, sig: &Signature, max_len: usize, cap: usize, exec: Execution) -> Result<BTreeMap<Word, Q>> {
        let letters = sig.letters();
        let k = letters.len();
        let mut total: usize = 0;
        let mut layer: usize = 1;
        for _ in 0..=max_len {
            total = total.checked_add(layer).ok_or_else(|| Error::cap("raw words", cap))?;
            layer = layer.checked_mul(k).ok_or_else(|| Error::cap("raw words", cap))?;
        }
        if total > cap {
            return Err(Error::cap(format!("raw words of length ≤ {max_len}"), cap));
        }
        const CHUNK: usize = 4096;
        let mut out: BTreeMap<Word, Q> = BTreeMap::new();
        let mut count: usize = 1;
        for len in 0..=max_len {
            let chunks = count.div_ceil(CHUNK);
            let parts = exec.map_range(chunks, |c| -> Result<BTreeMap<Word, Q>> {
                let mut local: BTreeMap<Word, Q> = BTreeMap::new();
                let mut raw = vec![letters[0]; len];
                for idx in c * CHUNK..((c + 1) * CHUNK).min(count) {
                    let mut x = idx;
                    for slot in raw.iter_mut().rev() {
                        *slot = letters[x % k];
                        x /= k;
                    }
                    if let Some(v) = self.word_min(&raw)? {
                        let red = reduce_letters(raw.iter().copied());
                        match local.get_mut(&red) {
                            Some(old) if *old <= v => {}
                            Some(old) => *old = v,
                            None => {
                                local.insert(red, v);
                            }
                        }
                    }
                }
                Ok(local)
            });
            for part in parts {
                for (w, v) in part? {
                    match out.get_mut(&w) {
                        Some(old) if *old <= v => {}
                        Some(old) => *old = v,
                        None => {
                            out.insert(w, v);
                        }
                    }
                }
            }
            count *= k;
        }
        Ok(out)
    }
}

/// `λ̃(x)` restricted to raw words of length `≤ max_len` (an upper value,
/// nonincreasing in `max_len`); `None` when above the oracle's budget.
pub fn step2_tilde_oracle(oracle: &MatchOracle<'_>, sig: &Signature, x: &Word, max_len: usize, cap: usize, exec: Execution) -> Result<Option<Q>> {
    if max_len < x.len() {
        return Err(Error::Domain(format!("search length {max_len} shorter than |x| = {}", x.len())));
    }
    Ok(oracle.table(sig, max_len, cap, exec)?.remove(x))
}
