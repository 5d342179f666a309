use std::collections::BTreeMap;

use normgroup::finite::FiniteNormedGroup;
use normgroup::finite_approx::{finite_approx, minimal_moc_requests};
use normgroup::freeproduct::{conjugation_family, free_product_norm, step1_merge, step2_tilde, Derivation, MatchOracle};
use normgroup::group::Perm;
use normgroup::moc::{ball_lookup, minimal_moc, verify_moc, Moc};
use normgroup::norms::{check_ball_axioms, NormBall, PartialPreNorm, TargetElem};
use normgroup::pipeline::{approximate, eps_hom_check, EpsHomCertificate, EpsViolation, FiniteModel, PhiImage, Route};
use normgroup::ultraprod::{diagnose, scaled_f2_collapse_witness, sinf_delta, FilterLimitInterval, GroupSequence, Side, StageElem};
use normgroup::words::{enumerate_ball, Aliases, Signature, Word};
use normgroup::{Caps, Error, Execution, Q};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::docs::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    NormEval,
    NormBall,
    Moc,
    FreeProduct,
    MatchOracle,
    FiniteApprox,
    Approximate,
    EpsCheck,
    UltraDiagnose,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::NormEval => "norm-eval",
            Command::NormBall => "norm-ball",
            Command::Moc => "moc",
            Command::FreeProduct => "free-product",
            Command::MatchOracle => "match-oracle",
            Command::FiniteApprox => "finite-approx",
            Command::Approximate => "approximate",
            Command::EpsCheck => "eps-check",
            Command::UltraDiagnose => "ultra-diagnose",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub caps: Caps,
    pub trace: bool,
    pub seed_doc: Option<SeedDoc>,
    pub exec: Execution,
}

/// A successful run; `certified` is false when a reported check failed.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub document: String,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    Input(String),
    Certificate(String),
    Cap(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Certificate(_) => 2,
            Failure::Cap(_) => 3,
        }
    }

    pub fn document(&self) -> String {
        let (error, message) = match self {
            Failure::Input(m) => ("input", m),
            Failure::Certificate(m) => ("certificate", m),
            Failure::Cap(m) => ("cap", m),
        };
        render(&ErrorOut { schema_version: SCHEMA_VERSION, error: error.into(), message: message.clone() })
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CapExceeded { .. } => Failure::Cap(e.to_string()),
            Error::Certificate(_) => Failure::Certificate(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn parse<T: DeserializeOwned>(input: &str) -> Res<T> {
    serde_json::from_str(input).map_err(|e| Failure::Input(format!("invalid input document: {e}")))
}

/// Pretty JSON with a trailing newline.
pub fn render<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn done<T: Serialize>(doc: &T, certified: bool) -> Res<Outcome> {
    Ok(Outcome { document: render(doc), certified })
}

fn seed_of(own: Option<SeedDoc>, opts: &Options) -> Res<SeedDoc> {
    opts.seed_doc
        .clone()
        .or(own)
        .ok_or_else(|| Failure::Input("a `seed` is required (in the input or via --seed-doc)".into()))
}

/// Run one command on an input document.
pub fn run(cmd: Command, input: &str, opts: &Options) -> Res<Outcome> {
    let name = cmd.name().to_string();
    match cmd {
        Command::NormEval => norm_eval(parse(input)?, name, opts),
        Command::NormBall => norm_ball(parse(input)?, name, opts),
        Command::Moc => moc(parse(input)?, name, opts),
        Command::FreeProduct => free_product(parse(input)?, name, opts),
        Command::MatchOracle => match_oracle(parse(input)?, name, opts),
        Command::FiniteApprox => finite_approx_cmd(parse(input)?, name, opts),
        Command::Approximate => approximate_cmd(parse(input)?, name, opts),
        Command::EpsCheck => eps_check(parse(input)?, name, opts),
        Command::UltraDiagnose => ultra(parse(input)?, name, opts),
    }
}

/// Re-parse an output document under its schema and re-render it.
pub fn reparse(cmd: Command, output: &str) -> Res<String> {
    fn again<T: Serialize + DeserializeOwned>(s: &str) -> Res<String> {
        Ok(render(&parse::<T>(s)?))
    }
    match cmd {
        Command::NormEval => again::<NormEvalOut>(output),
        Command::NormBall => again::<NormBallOut>(output),
        Command::Moc => again::<MocOut>(output),
        Command::FreeProduct => again::<FreeProductOut>(output),
        Command::MatchOracle => again::<MatchOracleOut>(output),
        Command::FiniteApprox => again::<FiniteApproxOut>(output),
        Command::Approximate => again::<ApproximateOut>(output),
        Command::EpsCheck => again::<EpsCheckOut>(output),
        Command::UltraDiagnose => again::<UltraOut>(output),
    }
}

fn norm_eval(doc: NormEvalIn, command: String, opts: &Options) -> Res<Outcome> {
    check_version(doc.schema_version)?;
    let seed_doc = seed_of(doc.seed, opts)?;
    let seed = seed_doc.build()?;
    let g = seed.group();
    let eng = seed.engine(&g, opts.caps.ball);
    let single = doc.word.is_some() && doc.words.is_empty();
    let words: Vec<String> = doc.word.into_iter().chain(doc.words).collect();
    if words.is_empty() {
        return Err(Failure::Input("no `word` or `words` given".into()));
    }
    let mut results = Vec::new();
    for s in &words {
        let w = seed_doc.word(s)?;
        let ev = eng.evaluate(&w)?;
        results.push(EvalRow {
            word: seed_doc.show(&w),
            value: ev.value,
            factors: ev.factors.iter().map(|f| seed_doc.show(f)).collect(),
        });
    }
    let value = single.then(|| results[0].value.clone());
    done(&NormEvalOut { schema_version: SCHEMA_VERSION, command, results, value }, true)
}

fn norm_ball(doc: NormBallIn, command: String, opts: &Options) -> Res<Outcome> {
    check_version(doc.schema_version)?;
    let seed_doc = seed_of(doc.seed, opts)?;
    let seed = seed_doc.build()?;
    let g = seed.group();
    let ball = seed.engine(&g, opts.caps.ball).ball(&doc.radius)?;
    let violations = check_ball_axioms(&g, &ball, opts.exec);
    let entries =
        ball.by_value().into_iter().map(|(w, value)| WordValue { word: seed_doc.show(&w), value }).collect::<Vec<_>>();
    done(
        &NormBallOut {
            schema_version: SCHEMA_VERSION,
            command,
            radius: doc.radius,
            size: entries.len(),
            axiom_violations: violations.len(),
            entries,
        },
        violations.is_empty(),
    )
}

fn moc(doc: MocIn, command: String, opts: &Options) -> Res<Outcome> {
    check_version(doc.schema_version)?;
    let exec = opts.exec;
    let finite = doc.finite.as_ref().map(FiniteGroupDoc::build).transpose()?;
    let (element, norm, gamma, candidate) = match finite {
        Some(fg) => {
            if doc.seed.is_some() {
                return Err(Failure::Input("give either `seed` or `finite`, not both".into()));
            }
            let x = serde_json::from_value::<ElemRef>(doc.element.clone())
                .map_err(|e| Failure::Input(format!("element: {e}")))?
                .resolve(&fg)?;
            let full = NormBall { radius: None, table: fg.group.elements().map(|e| (e, fg.norm[e].clone())).collect() };
            let r_max = doc.r_max.clone().unwrap_or_else(|| fg.norm.iter().max().cloned().unwrap_or_else(Q::zero));
            let norm_of = |e: &usize| Ok(fg.norm[*e].clone());
            let gamma = minimal_moc(&fg.group, &x, &full, &r_max, norm_of, exec)?;
            let candidate = match &doc.candidate {
                Some(c) => {
                    let ball = full.restrict(c.r_max());
                    let v = verify_moc(c, &fg.group, &x, &ball, norm_of, exec)?;
                    Some(candidate_out(ball.len(), v.map(|v| (show_index(&fg, v.g), v.sign, v.conjugate_norm, v.bound))))
                }
                None => None,
            };
            (show_index(&fg, x), fg.norm[x].clone(), gamma, candidate)
        }
        None => {
            let seed_doc = seed_of(doc.seed.clone(), opts)?;
            let seed = seed_doc.build()?;
            let g = seed.group();
            let eng = seed.engine(&g, opts.caps.ball);
            let s = doc.element.as_str().ok_or_else(|| Failure::Input("element must be a word".into()))?;
            let x = seed_doc.word(s)?;
            let lam = eng.value(&x)?;
            let r_max = doc
                .r_max
                .clone()
                .or_else(|| doc.candidate.as_ref().map(|c| c.r_max().clone()))
                .ok_or_else(|| Failure::Input("`r_max` is required for free groups".into()))?;
            let reach = |r: &Q| r + &(&lam + &lam);
            let small = eng.ball(&r_max)?;
            let big = eng.ball(&reach(&r_max))?;
            let gamma = minimal_moc(&g, &x, &small, &r_max, ball_lookup(&big), exec)?;
            let candidate = match &doc.candidate {
                Some(c) => {
                    let ball = eng.ball(c.r_max())?;
                    let big = eng.ball(&reach(c.r_max()))?;
                    let v = verify_moc(c, &g, &x, &ball, ball_lookup(&big), exec)?;
                    Some(candidate_out(
                        ball.len(),
                        v.map(|v| (Value::String(seed_doc.show(&v.g)), v.sign, v.conjugate_norm, v.bound)),
                    ))
                }
                None => None,
            };
            (Value::String(seed_doc.show(&x)), lam, gamma, candidate)
        }
    };
    let identity = gamma == Moc::identity(gamma.r_max().clone());
    let certified = candidate.as_ref().is_none_or(|c| c.holds);
    done(&MocOut { schema_version: SCHEMA_VERSION, command, element, norm, moc: gamma, identity, candidate }, certified)
}

fn candidate_out(checked: usize, v: Option<(Value, i8, Q, Q)>) -> CandidateOut {
    CandidateOut {
        holds: v.is_none(),
        checked,
        violation: v.map(|(g, sign, conjugate_norm, bound)| ConjugateViolation { g, sign, conjugate_norm, bound }),
    }
}

fn factor_norms(factors: &[SeedDoc]) -> Res<Vec<PartialPreNorm>> {
    if factors.is_empty() {
        return Err(Failure::Input("no factors".into()));
    }
    Ok(factors.iter().map(SeedDoc::build).collect::<normgroup::Result<Vec<_>>>()?)
}

fn word_values(table: &BTreeMap<Word, Q>) -> Vec<WordValue> {
    let mut rows: Vec<(&Word, &Q)> = table.iter().collect();
    rows.sort_by(|a, b| a.1.cmp(b.1).then_with(|| a.0.cmp(b.0)));
    rows.into_iter().map(|(w, v)| WordValue { word: w.to_string(), value: v.clone() }).collect()
}

fn free_product(doc: FreeProductIn, command: String, opts: &Options) -> Res<Outcome> {
    check_version(doc.schema_version)?;
    let factors = factor_norms(&doc.factors)?;
    let budget = doc.budget.clone().unwrap_or_else(Q::zero);
    let fp = free_product_norm(&factors, &budget, &opts.caps, opts.exec)?;
    let none: Aliases = Aliases::new();
    let mut values = Vec::new();
    for s in &doc.evaluate {
        let w = normgroup::words::parse_word(s, &fp.signature, &none)?;
        values.push(WordValue { value: fp.value(&w, opts.caps.ball)?, word: w.to_string() });
    }
    let tilde = opts.trace.then(|| {
        fp.tilde
            .table
            .iter()
            .map(|(w, v)| TildeRow {
                word: w.to_string(),
                value: v.clone(),
                derivation: match &fp.tilde.derivations[w] {
                    Derivation::Axiom => "axiom".into(),
                    Derivation::Product(a, b) => format!("product({a}; {b})"),
                    Derivation::Conjugate(l, y) => format!("conjugate({l}; {y})"),
                },
            })
            .collect()
    });
    let signed = |v: &Option<(Word, i8)>| v.as_ref().map(|(w, s)| SignedWord { word: w.to_string(), sign: *s });
    let out = FreeProductOut {
        schema_version: SCHEMA_VERSION,
        command,
        signature: fp.signature.generators_per_factor.clone(),
        generator_norms: fp.generator_norms.iter().map(|(l, v)| (l.to_string(), v.clone())).collect(),
        gamma: fp.gamma.iter().map(|(l, m)| (l.to_string(), m.clone())).collect(),
        r_ij: fp.r_ij.iter().map(|(l, v)| (l.to_string(), v.clone())).collect(),
        r_prime: fp.r_prime.clone(),
        r: fp.r.clone(),
        budget: fp.budget.clone(),
        tilde_size: fp.tilde.len(),
        y: word_values(&fp.y),
        seed_size: fp.seed.entries().len(),
        moc_checks: fp
            .moc_checks
            .iter()
            .map(|c| MocCheckOut {
                generator: c.generator.to_string(),
                checked: c.checked,
                violation_gamma: signed(&c.violation_gamma),
                violation_double: signed(&c.violation_double),
            })
            .collect(),
        extension_checks: fp
            .extension_checks
            .iter()
            .map(|c| ExtensionOut {
                factor: c.factor,
                radius: c.radius.clone(),
                checked: c.checked,
                mismatches: c
                    .mismatches
                    .iter()
                    .map(|(w, a, b)| Mismatch { word: w.to_string(), factor_value: a.clone(), product_value: b.clone() })
                    .collect(),
            })
            .collect(),
        tilde_mismatches: fp.tilde_mismatches.iter().map(Word::to_string).collect(),
        values,
        passed: fp.passed(),
        tilde,
    };
    done(&out, fp.passed())
}

fn match_oracle(doc: MatchOracleIn, command: String, opts: &Options) -> Res<Outcome> {
    check_version(doc.schema_version)?;
    let factors = factor_norms(&doc.factors)?;
    if doc.budget.is_negative() {
        return Err(Failure::Input("negative budget".into()));
    }
    let sigma_prime = step1_merge(&factors)?;
    let sig = sigma_prime.signature.clone();
    let gamma = conjugation_family(&factors, &doc.budget, &opts.caps, opts.exec)?;
    let g = sigma_prime.group();
    let sigma = sigma_prime.engine(&g, opts.caps.ball).ball(&doc.budget)?;
    let oracle = MatchOracle { sigma: &sigma, gamma: &gamma, budget: doc.budget.clone() };
    let table = oracle.table(&sig, doc.max_len, opts.caps.matches, opts.exec)?;
    let closure = step2_tilde(sigma_prime.entries(), &sig.letters(), &gamma, &doc.budget, opts.caps.ball)?;
    let mut mismatches = Vec::new();
    let mut compared = 0;
    for (w, v) in &closure.table {
        if w.len() > doc.max_len {
            continue;
        }
        compared += 1;
        if table.get(w) != Some(v) {
            mismatches.push(OracleMismatch { word: w.to_string(), closure: v.clone(), oracle: table.get(w).cloned() });
        }
    }
    let none = Aliases::new();
    let values = doc
        .words
        .iter()
        .map(|s| {
            let w = normgroup::words::parse_word(s, &sig, &none)?;
            Ok(OracleValue { value: table.get(&w).cloned(), word: w.to_string() })
        })
        .collect::<normgroup::Result<Vec<_>>>()?;
    let agree = mismatches.is_empty();
    let out = MatchOracleOut {
        schema_version: SCHEMA_VERSION,
        command,
        budget: doc.budget,
        max_len: doc.max_len,
        oracle_size: table.len(),
        closure_size: closure.len(),
        compared,
        mismatches,
        agree,
        values,
        oracle: opts.trace.then(|| word_values(&table)),
    };
    done(&out, agree)
}

fn finite_approx_cmd(doc: FiniteApproxIn, command: String, opts: &Options) -> Res<Outcome> {
    check_version(doc.schema_version)?;
    let seed_doc = seed_of(doc.seed, opts)?;
    let lambda = seed_doc.build()?;
    let sig = lambda.signature.clone();
    let mut req = doc.req.iter().map(|s| seed_doc.word(s)).collect::<normgroup::Result<Vec<_>>>()?;
    if let Some(r) = doc.req_radius {
        req.extend(enumerate_ball(&sig, r, opts.caps.ball)?);
    }
    let requests = match doc.moc_requests {
        MocRequestMode::Minimal => minimal_moc_requests(&lambda, &opts.caps, opts.exec)?,
        MocRequestMode::None => Vec::new(),
    };
    let fa = finite_approx(&lambda, &req, &requests, &opts.caps, opts.exec)?;
    let h_order = small_order(&fa);
    let perm = |p: &Perm| p.0.clone();
    let out = FiniteApproxOut {
        schema_version: SCHEMA_VERSION,
        command,
        n0: fa.n0,
        n: fa.n,
        degree: fa.action.degree(),
        m_max: fa.m_max.clone(),
        m_min: fa.m_min.clone(),
        k: fa.k,
        isometry: fa
            .isometry
            .iter()
            .map(|(w, l, s)| IsometryRow { word: seed_doc.show(w), lambda: l.clone(), sigma: s.clone() })
            .collect(),
        moc: fa
            .moc
            .iter()
            .map(|m| MocPreservationOut {
                generator: seed_doc.show(&Word::letter(m.generator)),
                r_prime: m.r_prime.clone(),
                r: m.r.clone(),
                direct_only: m.direct_only,
                checked: m.checked,
                generator_isometric: m.generator_isometric,
                violation: m.violation.as_ref().map(|(p, sign, c, b)| PermViolation {
                    perm: perm(p),
                    sign: *sign,
                    conjugate_norm: c.clone(),
                    bound: b.clone(),
                }),
            })
            .collect(),
        h_order,
        passed: fa.passed(),
        phi: opts.trace.then(|| fa.phi.map.iter().map(|(w, p)| PermImage { word: seed_doc.show(w), perm: perm(p) }).collect()),
    };
    done(&out, fa.passed())
}

fn small_order(fa: &normgroup::finite_approx::FiniteApprox) -> Option<usize> {
    if fa.action.degree() > 4096 {
        return None;
    }
    fa.materialize(2000).ok().map(|(g, _)| g.order())
}

fn certificate_out(c: &EpsHomCertificate, show: &dyn Fn(usize) -> Value) -> CertificateOut {
    CertificateOut {
        epsilon: c.epsilon.clone(),
        relation_checks: c.relation_checks,
        norm_checks: c.norm_checks,
        max_relation_defect: c.max_relation_defect.clone(),
        max_norm_defect: c.max_norm_defect.clone(),
        violations: c
            .violations
            .iter()
            .map(|v| match v {
                EpsViolation::Relation { g, h, defect } => {
                    EpsViolationOut::Relation { g: show(*g), h: show(*h), defect: defect.clone() }
                }
                EpsViolation::Norm { g, lambda, sigma } => {
                    EpsViolationOut::Norm { g: show(*g), lambda: lambda.clone(), sigma: sigma.clone() }
                }
            })
            .collect(),
    }
}

fn subset_of(target: &Target, raw: &[Value]) -> Res<Vec<TargetElem>> {
    if raw.is_empty() {
        return Err(Failure::Input("the subset F is empty".into()));
    }
    let mut out: Vec<TargetElem> = Vec::new();
    for v in raw {
        let e = target.parse(v)?;
        if out.contains(&e) {
            return Err(Failure::Input(format!("{v} is listed twice in F")));
        }
        out.push(e);
    }
    Ok(out)
}

fn approximate_cmd(doc: ApproximateIn, command: String, opts: &Options) -> Res<Outcome> {
    check_version(doc.schema_version)?;
    let target = Target::new(doc.target)?;
    let subset = subset_of(&target, &doc.subset)?;
    let ap = approximate(&target.target, &subset, &doc.epsilon, &opts.caps, opts.exec)?;
    let show = |i: usize| target.show(&subset[i]);
    let word_show = |w: &Word| w.to_string();
    let (model, phi) = match &ap.model {
        FiniteModel::Table(h) => {
            let phi = ap
                .phi
                .iter()
                .enumerate()
                .map(|(i, p)| PhiOut {
                    element: show(i),
                    word: word_show(&ap.trace.words[i]),
                    image: match p {
                        PhiImage::Index(x) => Some(show_index(h, *x)),
                        PhiImage::Perm(q) => Some(Value::from(q.0.clone())),
                    },
                })
                .collect();
            let model = ModelOut::Table {
                order: h.order(),
                labels: h.labels.clone(),
                norm: h.norm.clone(),
                table: opts.trace.then(|| table_of(h)),
            };
            (model, phi)
        }
        FiniteModel::Permutations(fa) => {
            let phi = ap
                .phi
                .iter()
                .enumerate()
                .map(|(i, p)| PhiOut {
                    element: show(i),
                    word: word_show(&ap.trace.words[i]),
                    image: match p {
                        PhiImage::Perm(q) => opts.trace.then(|| Value::from(q.0.clone())),
                        PhiImage::Index(x) => Some(Value::from(*x)),
                    },
                })
                .collect();
            let model = ModelOut::Permutations {
                degree: fa.action.degree(),
                ball_radius: fa.n,
                generators: opts.trace.then(|| fa.action.generators.values().map(|p| p.0.clone()).collect()),
            };
            (model, phi)
        }
    };
    let t = &ap.trace;
    let trace = TraceOut {
        generators: t.generators.iter().map(|g| target.show(g)).collect(),
        words: t.words.iter().map(word_show).collect(),
        n: t.n,
        c_size: t.c_size,
        kernel_words: t.kernel_words,
        c_min: t.c_min.clone(),
        classes: t.classes,
        gap_bound: t.gap_bound.clone(),
        partial_norm_holds: t.partial_norm_holds,
        route: match t.route {
            Route::BallAction => "ball_action".into(),
            Route::EvaluationQuotient => "evaluation_quotient".into(),
        },
        ball_radius: t.ball_radius,
        h_order: t.h_order,
        moc_radius: t.moc_radius.clone(),
        notes: t.notes.clone(),
    };
    let out = ApproximateOut {
        schema_version: SCHEMA_VERSION,
        command,
        valid: ap.valid(),
        certificate: certificate_out(&ap.certificate, &show),
        phi,
        moc_report: ap
            .moc_report
            .iter()
            .map(|m| MocBoundOut {
                element: show(m.f),
                gamma_h: m.gamma_h.clone(),
                bound: m.bound.clone(),
                violation: m.violation.clone(),
            })
            .collect(),
        model,
        trace,
    };
    done(&out, ap.valid())
}

fn table_of(h: &FiniteNormedGroup) -> Vec<Vec<usize>> {
    use normgroup::group::Group;
    h.group.elements().map(|a| h.group.elements().map(|b| h.group.mul(&a, &b)).collect()).collect()
}

fn eps_check(doc: EpsCheckIn, command: String, opts: &Options) -> Res<Outcome> {
    check_version(doc.schema_version)?;
    let target = Target::new(doc.target)?;
    let subset = subset_of(&target, &doc.subset)?;
    let h = doc.h.build()?;
    let phi = doc.phi.iter().map(|r| r.resolve(&h)).collect::<normgroup::Result<Vec<_>>>()?;
    let c = eps_hom_check(&target.target, &subset, &h.group, &phi, |e| Ok(h.norm[*e].clone()), &doc.epsilon, opts.caps.ball)?;
    let show = |i: usize| target.show(&subset[i]);
    let out = EpsCheckOut { schema_version: SCHEMA_VERSION, command, valid: c.valid(), certificate: certificate_out(&c, &show) };
    done(&out, c.valid())
}

fn limit_out(l: &FilterLimitInterval) -> LimitOut {
    LimitOut { liminf: l.liminf.clone(), limsup: l.limsup.clone(), tail_start: l.tail_start }
}

fn stage_value(e: &StageElem, groups: &[FiniteNormedGroup], stage: usize) -> Value {
    match e {
        StageElem::Word(w) => Value::String(w.to_string()),
        StageElem::Index(i) => show_index(&groups[stage - 1], *i),
        StageElem::Perm(p) => Value::from(p.images().to_vec()),
    }
}

fn ultra(doc: UltraIn, command: String, opts: &Options) -> Res<Outcome> {
    check_version(doc.schema_version)?;
    let (seq, groups) = match &doc.sequence {
        SequenceDoc::ScaledFree { rank, prefix } => {
            if *rank == 0 {
                return Err(Failure::Input("rank must be positive".into()));
            }
            (GroupSequence::ScaledFree { rank: *rank, prefix: *prefix }, Vec::new())
        }
        SequenceDoc::Explicit { groups } => {
            let gs = groups.iter().map(FiniteGroupDoc::build).collect::<normgroup::Result<Vec<_>>>()?;
            (GroupSequence::Explicit(gs.clone()), gs)
        }
        SequenceDoc::FinitarySymmetric { prefix } => (GroupSequence::FinitarySymmetric { prefix: *prefix }, Vec::new()),
    };
    let mut elems = Vec::new();
    for (i, v) in doc.elements.iter().enumerate() {
        elems.push(match &doc.sequence {
            SequenceDoc::ScaledFree { rank, .. } => {
                let s = v.as_str().ok_or_else(|| Failure::Input(format!("stage {}: expected a word", i + 1)))?;
                let sig = Signature::free(*rank);
                let aliases: Aliases = ["a", "b", "c", "d"]
                    .iter()
                    .enumerate()
                    .take(*rank)
                    .map(|(j, n)| (n.to_string(), format!("g0.{}", j + 1)))
                    .collect();
                StageElem::Word(normgroup::words::parse_word(s, &sig, &aliases)?)
            }
            SequenceDoc::Explicit { .. } => {
                let g = groups.get(i).ok_or_else(|| Failure::Input("more elements than stages".into()))?;
                let r: ElemRef = serde_json::from_value(v.clone()).map_err(|e| Failure::Input(format!("stage {}: {e}", i + 1)))?;
                StageElem::Index(r.resolve(g)?)
            }
            SequenceDoc::FinitarySymmetric { .. } => StageElem::Perm(parse_finperm(v)?),
        });
    }
    let report = diagnose(&seq, &elems, &doc.delta, opts.caps.ball, opts.exec)?;
    let stages = report
        .stages
        .iter()
        .zip(&report.norms)
        .zip(&elems)
        .map(|((d, norm), e)| StageOut {
            stage: d.stage,
            element: stage_value(e, &groups, d.stage),
            norm: norm.clone(),
            distortion: d.value.clone(),
            witness: stage_value(&d.witness, &groups, d.stage),
            side: match d.side {
                Side::Left => "g^-1 h g".into(),
                Side::Right => "g h g^-1".into(),
            },
        })
        .collect();
    let mut collapse = Vec::new();
    let mut sinf = Vec::new();
    for (i, e) in elems.iter().enumerate() {
        let n = i + 1;
        match (&doc.sequence, e) {
            (SequenceDoc::ScaledFree { rank: 2, .. }, StageElem::Word(w)) if !w.is_identity() => {
                let c = scaled_f2_collapse_witness(w, n)?;
                collapse.push(CollapseOut {
                    stage: n,
                    x: c.x.to_string(),
                    conjugate: c.conjugate.to_string(),
                    exceeds_twice_norm: c.value > Q::frac(2 * w.len() as i64, n as i64),
                    value: c.value,
                    no_cancellation: c.no_cancellation,
                });
            }
            (SequenceDoc::FinitarySymmetric { .. }, StageElem::Perm(p)) => {
                let d = sinf_delta(p, n)?;
                sinf.push(SinfOut {
                    stage: n,
                    m: d.m,
                    sharp: d.sharp(n),
                    delta: d.delta,
                    forward_checked: d.forward_checked,
                    forward_counterexamples: d.forward_counterexamples.iter().map(|s| s.images().to_vec()).collect(),
                    converse: d.converse.images().to_vec(),
                    converse_lambda: d.converse_lambda,
                    converse_conjugate_lambda: d.converse_conjugate_lambda,
                });
            }
            _ => {}
        }
    }
    let certified = collapse.iter().all(|c| c.no_cancellation && c.exceeds_twice_norm) && sinf.iter().all(|s| s.sharp);
    let out = UltraOut {
        schema_version: SCHEMA_VERSION,
        command,
        delta: doc.delta,
        semantics: "cofinite-filter bounds over the stored prefix; not an ultrafilter limit".into(),
        stages,
        norm_limit: limit_out(&report.norm_limit),
        distortion_limit: limit_out(&report.distortion_limit),
        collapse,
        sinf,
    };
    done(&out, certified)
}
