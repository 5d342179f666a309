//! Alphabets, reduced words, and free-product word arithmetic.
//!
//! A free product of free groups `F_1 * ... * F_n` is itself free on the
//! union of the factor generators, so elements are reduced words over the
//! letters `x_{i,j}^{±1}`. Factors are numbered from 0, generators within a
//! factor from 1, matching the I/O token syntax `g<i>.<j>` / `g<i>.<j>^-1`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A signed generator symbol `x_{factor,index}^{±1}`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub factor: u16,
    pub index: u16,
    pub inverse: bool,
}

impl Letter {
    pub fn new(factor: usize, index: usize, inverse: bool) -> Self {
        Letter { factor: factor as u16, index: index as u16, inverse }
    }

    pub fn gen(factor: usize, index: usize) -> Self {
        Letter::new(factor, index, false)
    }

    pub fn inv(self) -> Self {
        Letter { inverse: !self.inverse, ..self }
    }

    /// The positive letter of the same generator.
    pub fn base(self) -> Self {
        Letter { inverse: false, ..self }
    }

    pub fn is_inverse_of(self, other: Letter) -> bool {
        self.factor == other.factor && self.index == other.index && self.inverse != other.inverse
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}.{}", self.factor, self.index)?;
        if self.inverse {
            write!(f, "^-1")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Shape of a free product: the number of free generators of each factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Signature {
    pub generators_per_factor: Vec<usize>,
}

impl Signature {
    pub fn new(generators_per_factor: Vec<usize>) -> Result<Self> {
        if generators_per_factor.is_empty() {
            return Err(Error::SignatureMismatch("a signature needs at least one factor".into()));
        }
        if generators_per_factor.contains(&0) {
            return Err(Error::SignatureMismatch("every factor needs at least one generator".into()));
        }
        Ok(Signature { generators_per_factor })
    }

    /// A single free factor of the given rank.
    pub fn free(rank: usize) -> Self {
        Signature::new(vec![rank]).expect("rank must be positive")
    }

    pub fn factor_count(&self) -> usize {
        self.generators_per_factor.len()
    }

    pub fn validate(&self) -> Result<()> {
        Signature::new(self.generators_per_factor.clone()).map(|_| ())
    }

    pub fn contains(&self, letter: Letter) -> bool {
        let f = letter.factor as usize;
        f < self.generators_per_factor.len()
            && letter.index >= 1
            && (letter.index as usize) <= self.generators_per_factor[f]
    }

    pub fn check_letter(&self, letter: Letter) -> Result<()> {
        if self.contains(letter) {
            Ok(())
        } else {
            Err(Error::UnknownGenerator { factor: letter.factor as usize, index: letter.index as usize })
        }
    }

    /// Positive generators in canonical order.
    pub fn generators(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for (f, &n) in self.generators_per_factor.iter().enumerate() {
            for j in 1..=n {
                out.push(Letter::gen(f, j));
            }
        }
        out
    }

    /// All letters `x^{±1}` in canonical order.
    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for g in self.generators() {
            out.push(g);
            out.push(g.inv());
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.generators_per_factor.iter().sum()
    }
}

/// A reduced word; the empty word is the identity.
///
/// Words are ordered shortlex (length first, then letters), which is the
/// canonical tie-break order used throughout the crate.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Free reduction by a single left-to-right stack pass.
pub fn reduce_letters(raw: impl IntoIterator<Item = Letter>) -> Word {
    let mut out: Vec<Letter> = Vec::new();
    for l in raw {
        if out.last().is_some_and(|&top| top.is_inverse_of(l)) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

/// Reduce a raw letter sequence, checking every symbol against `sig`.
pub fn reduce(sig: &Signature, raw: &[Letter]) -> Result<Word> {
    for &l in raw {
        sig.check_letter(l)?;
    }
    Ok(reduce_letters(raw.iter().copied()))
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    /// `x^k` for a single generator letter (negative `k` uses the inverse).
    pub fn power(l: Letter, k: i64) -> Self {
        let base = if k < 0 { l.inv() } else { l };
        Word(vec![base; k.unsigned_abs() as usize])
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        reduce_letters(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn mul(&self, other: &Word) -> Word {
        // Cancel only at the seam; both operands are already reduced.
        let mut k = 0;
        let (a, b) = (&self.0, &other.0);
        while k < a.len() && k < b.len() && a[a.len() - 1 - k].is_inverse_of(b[k]) {
            k += 1;
        }
        let mut out = Vec::with_capacity(a.len() + b.len() - 2 * k);
        out.extend_from_slice(&a[..a.len() - k]);
        out.extend_from_slice(&b[k..]);
        Word(out)
    }

    pub fn inv(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// `x · self · x⁻¹`.
    pub fn conjugate_by(&self, x: &Word) -> Word {
        x.mul(self).mul(&x.inv())
    }

    /// Relabel every letter of factor `from` into factor `to`.
    pub fn relabel_factor(&self, from: usize, to: usize) -> Word {
        Word(
            self.0
                .iter()
                .map(|l| if l.factor as usize == from { Letter { factor: to as u16, ..*l } } else { *l })
                .collect(),
        )
    }

    pub fn check(&self, sig: &Signature) -> Result<()> {
        self.0.iter().try_for_each(|&l| sig.check_letter(l))
    }

    /// True when every letter belongs to `factor`.
    pub fn in_factor(&self, factor: usize) -> bool {
        self.0.iter().all(|l| l.factor as usize == factor)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

/// Optional human-readable names for generators, used by the I/O layer only.
pub type Aliases = BTreeMap<String, String>;

fn parse_token(tok: &str) -> Result<Letter> {
    let bad = || Error::Parse(format!("bad generator token {tok:?}"));
    let (body, inverse) = match tok.strip_suffix("^-1") {
        Some(b) => (b, true),
        None => (tok, false),
    };
    let body = body.strip_prefix('g').ok_or_else(bad)?;
    let (i, j) = body.split_once('.').ok_or_else(bad)?;
    let factor: usize = i.parse().map_err(|_| bad())?;
    let index: usize = j.parse().map_err(|_| bad())?;
    if index == 0 {
        return Err(bad());
    }
    Ok(Letter::new(factor, index, inverse))
}

/// Parse the whitespace-separated token syntax into a raw letter sequence.
///
/// Aliases map a bare name (e.g. `a`) to a canonical token (`g0.1`); an alias
/// may also carry `^-1`.
pub fn parse_raw(s: &str, aliases: &Aliases) -> Result<Vec<Letter>> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for tok in s.split_whitespace() {
        if tok == "1" {
            continue;
        }
        let (name, inverse) = match tok.strip_suffix("^-1") {
            Some(b) => (b, true),
            None => (tok, false),
        };
        let letter = match aliases.get(name) {
            Some(canon) => parse_token(canon)?,
            None => parse_token(name)?,
        };
        out.push(if inverse { letter.inv() } else { letter });
    }
    Ok(out)
}

pub fn parse_word(s: &str, sig: &Signature, aliases: &Aliases) -> Result<Word> {
    reduce(sig, &parse_raw(s, aliases)?)
}

/// Every reduced word of length at most `max_len`, in shortlex order.
///
/// Fails with [`Error::CapExceeded`] before allocating when the closed-form
/// ball size exceeds `cap`.
pub fn enumerate_ball(sig: &Signature, max_len: usize, cap: usize) -> Result<Vec<Word>> {
    let size = ball_size(sig.rank(), max_len);
    if size.is_none_or(|s| s > cap) {
        return Err(Error::cap(format!("word ball of radius {max_len}"), cap));
    }
    let letters = sig.letters();
    let mut out = vec![Word::identity()];
    let mut layer = vec![Word::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &letters {
                if w.0.last().is_some_and(|&t| t.is_inverse_of(l)) {
                    continue;
                }
                let mut v = w.0.clone();
                v.push(l);
                next.push(Word(v));
            }
        }
        next.sort();
        out.extend(next.iter().cloned());
        layer = next;
    }
    Ok(out)
}

/// Closed-form size of the radius-`len` ball in a free group of rank `rank`:
/// `1 + Σ_{k=1}^{len} 2r(2r-1)^{k-1}`.
pub fn ball_size(rank: usize, len: usize) -> Option<usize> {
    let mut total: usize = 1;
    let mut sphere: usize = 0;
    for k in 1..=len {
        sphere = if k == 1 { 2 * rank } else { sphere.checked_mul(2 * rank - 1)? };
        total = total.checked_add(sphere)?;
    }
    Some(total)
}
