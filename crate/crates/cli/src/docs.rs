//! Wire documents. Every document carries `schema_version`, rejects unknown
//! fields and writes rationals as `"p/q"` strings.

use std::collections::BTreeMap;

use normgroup::finite::{perm_label, FiniteNormedGroup};
use normgroup::group::{symmetric_group, TableGroup};
use normgroup::moc::Moc;
use normgroup::norms::{NormedTarget, PartialPreNorm, TargetElem};
use normgroup::ultraprod::FinPerm;
use normgroup::words::{parse_word, Aliases, Letter, Signature, Word};
use normgroup::{Error, Q, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

pub fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Parse(format!("schema_version {v} is not supported (expected {SCHEMA_VERSION})")));
    }
    Ok(())
}

fn yes() -> bool {
    true
}

/// A finitely generated norm on a free group (or free product of free
/// groups) given by its values on finitely many words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedDoc {
    /// Free generators per factor.
    pub signature: Vec<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub aliases: Aliases,
    pub values: BTreeMap<String, Q>,
    /// Add `w⁻¹ ↦ v` for every entry.
    #[serde(default = "yes")]
    pub symmetric: bool,
}

impl SeedDoc {
    pub fn signature(&self) -> Result<Signature> {
        Signature::new(self.signature.clone())
    }

    pub fn word(&self, s: &str) -> Result<Word> {
        parse_word(s, &self.signature()?, &self.aliases)
    }

    pub fn build(&self) -> Result<PartialPreNorm> {
        let sig = self.signature()?;
        let entries = self
            .values
            .iter()
            .map(|(k, v)| Ok((parse_word(k, &sig, &self.aliases)?, v.clone())))
            .collect::<Result<Vec<_>>>()?;
        if self.symmetric {
            PartialPreNorm::symmetric(sig, entries)
        } else {
            PartialPreNorm::new(sig, entries)
        }
    }

    /// Render with aliases when they name single generators unambiguously.
    pub fn show(&self, w: &Word) -> String {
        show_word(w, &self.aliases)
    }
}

pub fn show_word(w: &Word, aliases: &Aliases) -> String {
    let mut back: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for (name, canon) in aliases {
        back.entry(canon.clone()).or_default().push(name);
    }
    if w.is_identity() {
        return "1".into();
    }
    w.letters()
        .iter()
        .map(|l| {
            let base = l.base().to_string();
            match back.get(&base).map(Vec::as_slice) {
                Some([name]) => {
                    if l.inverse {
                        format!("{name}^-1")
                    } else {
                        name.to_string()
                    }
                }
                _ => l.to_string(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn show_letter(l: Letter) -> String {
    l.to_string()
}

/// Norm values for a finite group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormSpec {
    /// `"discrete"`.
    Named(String),
    /// One value per element, in element order.
    Values(Vec<Q>),
    /// Values keyed by label; missing labels are an error.
    ByLabel(BTreeMap<String, Q>),
}

/// A finite group given as `S_n` or a multiplication table, with a norm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteGroupDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub norm: NormSpec,
    /// Accept zero values off the identity.
    #[serde(default)]
    pub seminorm: bool,
}

impl FiniteGroupDoc {
    pub fn build(&self) -> Result<FiniteNormedGroup> {
        let (group, default_labels) = match (&self.symmetric, &self.table) {
            (Some(n), None) => {
                if !(1..=7).contains(n) {
                    return Err(Error::Domain(format!("S_{n} is outside 1..=7")));
                }
                let (g, perms) = symmetric_group(*n);
                (g, Some(perms.iter().map(perm_label).collect::<Vec<_>>()))
            }
            (None, Some(t)) => (TableGroup::new(self.identity.unwrap_or(0), t.clone())?, None),
            _ => return Err(Error::Parse("exactly one of `symmetric` and `table` is required".into())),
        };
        let labels = self.labels.clone().or(default_labels);
        if let Some(l) = &labels {
            if l.len() != group.order() {
                return Err(Error::Parse(format!("{} labels for a group of order {}", l.len(), group.order())));
            }
        }
        let norm: Vec<Q> = match &self.norm {
            NormSpec::Named(name) if name == "discrete" => {
                group.elements().map(|e| if e == group.identity { Q::zero() } else { Q::one() }).collect()
            }
            NormSpec::Named(name) => return Err(Error::Parse(format!("unknown norm {name:?}"))),
            NormSpec::Values(v) => v.clone(),
            NormSpec::ByLabel(m) => {
                let l = labels.as_ref().ok_or_else(|| Error::Parse("norm by label needs labels".into()))?;
                if m.len() != l.len() {
                    return Err(Error::Parse("norm by label must list every element once".into()));
                }
                l.iter()
                    .map(|x| m.get(x).cloned().ok_or_else(|| Error::Parse(format!("no norm value for {x:?}"))))
                    .collect::<Result<_>>()?
            }
        };
        let g = if self.seminorm {
            FiniteNormedGroup::seminormed(group, norm)?
        } else {
            FiniteNormedGroup::new(group, norm)?
        };
        Ok(match labels {
            Some(l) => g.with_labels(l),
            None => g,
        })
    }
}

/// An element of a finite group by index or label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElemRef {
    Index(usize),
    Label(String),
}

impl ElemRef {
    pub fn resolve(&self, g: &FiniteNormedGroup) -> Result<usize> {
        match self {
            ElemRef::Index(i) if *i < g.order() => Ok(*i),
            ElemRef::Index(i) => Err(Error::Domain(format!("no element {i} in a group of order {}", g.order()))),
            ElemRef::Label(s) => g
                .labels
                .as_ref()
                .and_then(|l| l.iter().position(|x| x == s))
                .ok_or_else(|| Error::Domain(format!("no element labelled {s:?}"))),
        }
    }
}

pub fn show_index(g: &FiniteNormedGroup, i: usize) -> Value {
    match &g.labels {
        Some(l) => Value::String(l[i].clone()),
        None => Value::from(i),
    }
}

fn parse_value<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("{v}: {e}")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeDoc {
    pub weights: Vec<Q>,
}

/// The normed group a subset `F` lives in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetDoc {
    Finite(FiniteGroupDoc),
    IntLattice(LatticeDoc),
    Free(SeedDoc),
}

/// A built target with the document it came from, for element I/O.
pub struct Target {
    pub doc: TargetDoc,
    pub target: NormedTarget,
}

impl Target {
    pub fn new(doc: TargetDoc) -> Result<Self> {
        let target = match &doc {
            TargetDoc::Finite(f) => NormedTarget::Finite(f.build()?),
            TargetDoc::IntLattice(l) => {
                if l.weights.is_empty() || l.weights.iter().any(|w| !w.is_positive()) {
                    return Err(Error::InvalidSeed("lattice weights must be positive".into()));
                }
                NormedTarget::IntLattice { weights: l.weights.clone() }
            }
            TargetDoc::Free(s) => NormedTarget::Free(s.build()?),
        };
        Ok(Target { doc, target })
    }

    pub fn parse(&self, v: &Value) -> Result<TargetElem> {
        let e = match (&self.doc, &self.target) {
            (TargetDoc::Finite(_), NormedTarget::Finite(g)) => TargetElem::Index(parse_value::<ElemRef>(v)?.resolve(g)?),
            (TargetDoc::IntLattice(l), _) => match v {
                Value::Number(_) if l.weights.len() == 1 => TargetElem::Vector(vec![parse_value(v)?]),
                _ => TargetElem::Vector(parse_value(v)?),
            },
            (TargetDoc::Free(s), _) => TargetElem::Word(s.word(&parse_value::<String>(v)?)?),
            _ => unreachable!("target built from its document"),
        };
        self.target.check_elem(&e)?;
        Ok(e)
    }

    pub fn show(&self, e: &TargetElem) -> Value {
        match (e, &self.target, &self.doc) {
            (TargetElem::Index(i), NormedTarget::Finite(g), _) => show_index(g, *i),
            (TargetElem::Vector(v), _, _) if v.len() == 1 => Value::from(v[0]),
            (TargetElem::Vector(v), _, _) => Value::from(v.clone()),
            (TargetElem::Word(w), _, TargetDoc::Free(s)) => Value::String(s.show(w)),
            (TargetElem::Word(w), _, _) => Value::String(w.to_string()),
            (TargetElem::Index(i), _, _) => Value::from(*i),
        }
    }
}

/// A sequence of normed groups for the finite-stage diagnostics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceDoc {
    ScaledFree { rank: usize, prefix: usize },
    Explicit { groups: Vec<FiniteGroupDoc> },
    FinitarySymmetric { prefix: usize },
}

pub fn parse_finperm(v: &Value) -> Result<FinPerm> {
    FinPerm::from_images(parse_value(v)?)
}

// ---- input documents ----

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormEvalIn {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: Option<SeedDoc>,
    #[serde(default)]
    pub word: Option<String>,
    #[serde(default)]
    pub words: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormBallIn {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: Option<SeedDoc>,
    pub radius: Q,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MocIn {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: Option<SeedDoc>,
    #[serde(default)]
    pub finite: Option<FiniteGroupDoc>,
    pub element: Value,
    #[serde(default)]
    pub r_max: Option<Q>,
    /// A modulus to verify instead of only reporting the minimal one.
    #[serde(default)]
    pub candidate: Option<Moc>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeProductIn {
    pub schema_version: u32,
    pub factors: Vec<SeedDoc>,
    #[serde(default)]
    pub budget: Option<Q>,
    /// Product words (canonical tokens) to evaluate.
    #[serde(default)]
    pub evaluate: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchOracleIn {
    pub schema_version: u32,
    pub factors: Vec<SeedDoc>,
    pub budget: Q,
    pub max_len: usize,
    #[serde(default)]
    pub words: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MocRequestMode {
    #[default]
    Minimal,
    None,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteApproxIn {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: Option<SeedDoc>,
    #[serde(default)]
    pub req: Vec<String>,
    /// Add every word of at most this length to `req`.
    #[serde(default)]
    pub req_radius: Option<usize>,
    #[serde(default)]
    pub moc_requests: MocRequestMode,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproximateIn {
    pub schema_version: u32,
    pub target: TargetDoc,
    pub subset: Vec<Value>,
    pub epsilon: Q,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsCheckIn {
    pub schema_version: u32,
    pub target: TargetDoc,
    pub subset: Vec<Value>,
    pub h: FiniteGroupDoc,
    pub phi: Vec<ElemRef>,
    pub epsilon: Q,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UltraIn {
    pub schema_version: u32,
    pub sequence: SequenceDoc,
    pub elements: Vec<Value>,
    pub delta: Q,
}

// ---- output documents ----

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordValue {
    pub word: String,
    pub value: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalRow {
    pub word: String,
    pub value: Q,
    pub factors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormEvalOut {
    pub schema_version: u32,
    pub command: String,
    pub results: Vec<EvalRow>,
    /// Present when a single `word` was requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormBallOut {
    pub schema_version: u32,
    pub command: String,
    pub radius: Q,
    pub size: usize,
    pub axiom_violations: usize,
    pub entries: Vec<WordValue>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugateViolation {
    pub g: Value,
    pub sign: i8,
    pub conjugate_norm: Q,
    pub bound: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateOut {
    pub holds: bool,
    pub checked: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<ConjugateViolation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MocOut {
    pub schema_version: u32,
    pub command: String,
    pub element: Value,
    pub norm: Q,
    pub moc: Moc,
    pub identity: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<CandidateOut>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignedWord {
    pub word: String,
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MocCheckOut {
    pub generator: String,
    pub checked: usize,
    pub violation_gamma: Option<SignedWord>,
    pub violation_double: Option<SignedWord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mismatch {
    pub word: String,
    pub factor_value: Q,
    pub product_value: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionOut {
    pub factor: usize,
    pub radius: Q,
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TildeRow {
    pub word: String,
    pub value: Q,
    pub derivation: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeProductOut {
    pub schema_version: u32,
    pub command: String,
    pub signature: Vec<usize>,
    pub generator_norms: BTreeMap<String, Q>,
    pub gamma: BTreeMap<String, Moc>,
    pub r_ij: BTreeMap<String, Q>,
    pub r_prime: Q,
    pub r: Q,
    pub budget: Q,
    pub tilde_size: usize,
    pub y: Vec<WordValue>,
    pub seed_size: usize,
    pub moc_checks: Vec<MocCheckOut>,
    pub extension_checks: Vec<ExtensionOut>,
    pub tilde_mismatches: Vec<String>,
    pub values: Vec<WordValue>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilde: Option<Vec<TildeRow>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleMismatch {
    pub word: String,
    pub closure: Q,
    pub oracle: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchOracleOut {
    pub schema_version: u32,
    pub command: String,
    pub budget: Q,
    pub max_len: usize,
    pub oracle_size: usize,
    pub closure_size: usize,
    pub compared: usize,
    pub mismatches: Vec<OracleMismatch>,
    pub agree: bool,
    pub values: Vec<OracleValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<WordValue>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleValue {
    pub word: String,
    /// `None` when above the budget or not reached within `max_len`.
    pub value: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsometryRow {
    pub word: String,
    pub lambda: Q,
    pub sigma: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermViolation {
    pub perm: Vec<u32>,
    pub sign: i8,
    pub conjugate_norm: Q,
    pub bound: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MocPreservationOut {
    pub generator: String,
    pub r_prime: Q,
    pub r: Q,
    pub direct_only: bool,
    pub checked: usize,
    pub generator_isometric: bool,
    pub violation: Option<PermViolation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermImage {
    pub word: String,
    pub perm: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteApproxOut {
    pub schema_version: u32,
    pub command: String,
    pub n0: usize,
    pub n: usize,
    pub degree: usize,
    pub m_max: Q,
    pub m_min: Q,
    pub k: usize,
    pub isometry: Vec<IsometryRow>,
    pub moc: Vec<MocPreservationOut>,
    pub h_order: Option<usize>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<PermImage>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EpsViolationOut {
    Relation { g: Value, h: Value, defect: Q },
    Norm { g: Value, lambda: Q, sigma: Q },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateOut {
    pub epsilon: Q,
    pub relation_checks: usize,
    pub norm_checks: usize,
    pub max_relation_defect: Q,
    pub max_norm_defect: Q,
    pub violations: Vec<EpsViolationOut>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiOut {
    pub element: Value,
    pub word: String,
    /// A table element, or permutation images under `--trace`.
    pub image: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MocBoundOut {
    pub element: Value,
    pub gamma_h: Moc,
    pub bound: Moc,
    pub violation: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceOut {
    pub generators: Vec<Value>,
    pub words: Vec<String>,
    pub n: usize,
    pub c_size: usize,
    pub kernel_words: usize,
    pub c_min: Q,
    pub classes: usize,
    pub gap_bound: Q,
    pub partial_norm_holds: Option<bool>,
    pub route: String,
    pub ball_radius: Option<usize>,
    pub h_order: Option<usize>,
    pub moc_radius: Q,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelOut {
    Table {
        order: usize,
        labels: Option<Vec<String>>,
        norm: Vec<Q>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<Vec<Vec<usize>>>,
    },
    Permutations {
        degree: usize,
        ball_radius: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<Vec<u32>>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproximateOut {
    pub schema_version: u32,
    pub command: String,
    pub valid: bool,
    pub certificate: CertificateOut,
    pub phi: Vec<PhiOut>,
    pub moc_report: Vec<MocBoundOut>,
    pub model: ModelOut,
    pub trace: TraceOut,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsCheckOut {
    pub schema_version: u32,
    pub command: String,
    pub valid: bool,
    pub certificate: CertificateOut,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitOut {
    pub liminf: Q,
    pub limsup: Q,
    pub tail_start: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageOut {
    pub stage: usize,
    pub element: Value,
    pub norm: Q,
    pub distortion: Q,
    pub witness: Value,
    pub side: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseOut {
    pub stage: usize,
    pub x: String,
    pub conjugate: String,
    pub value: Q,
    pub no_cancellation: bool,
    pub exceeds_twice_norm: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinfOut {
    pub stage: usize,
    pub m: usize,
    pub delta: Q,
    pub forward_checked: usize,
    pub forward_counterexamples: Vec<Vec<usize>>,
    pub converse: Vec<usize>,
    pub converse_lambda: Q,
    pub converse_conjugate_lambda: Q,
    pub sharp: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UltraOut {
    pub schema_version: u32,
    pub command: String,
    pub delta: Q,
    pub semantics: String,
    pub stages: Vec<StageOut>,
    pub norm_limit: LimitOut,
    pub distortion_limit: LimitOut,
    pub collapse: Vec<CollapseOut>,
    pub sinf: Vec<SinfOut>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorOut {
    pub schema_version: u32,
    pub error: String,
    pub message: String,
}
