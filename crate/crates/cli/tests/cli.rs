use std::io::Write;
use std::process::{Command as Proc, Stdio};

use normgroup_cli::{reparse, run, Command, Options};
use serde_json::{json, Value};

fn exe(args: &[&str], input: &Value) -> (i32, String, String) {
    let mut child = Proc::new(env!("CARGO_BIN_EXE_normgroup"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.to_string().as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn unit_f1() -> Value {
    json!({"signature": [1], "aliases": {"a": "g0.1"}, "values": {"a": "1"}})
}

fn s3_discrete() -> Value {
    json!({"symmetric": 3, "norm": "discrete"})
}

fn round_trip(cmd: Command, doc: &Value) -> Value {
    let out = run(cmd, &doc.to_string(), &Options::default()).unwrap();
    assert_eq!(reparse(cmd, &out.document).unwrap(), out.document, "{cmd:?} output does not round-trip");
    serde_json::from_str(&out.document).unwrap()
}

#[test]
fn norm_eval_cube() {
    let (code, out, _) = exe(&["norm-eval"], &json!({"schema_version": 1, "seed": unit_f1(), "word": "a a a"}));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["value"], "3");
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn seed_doc_flag() {
    let dir = std::env::temp_dir().join(format!("normgroup-seed-{}", std::process::id()));
    std::fs::write(&dir, unit_f1().to_string()).unwrap();
    let (code, out, _) = exe(&["norm-eval", "--seed-doc", dir.to_str().unwrap()], &json!({"schema_version": 1, "words": ["a^-1 a^-1"]}));
    std::fs::remove_file(&dir).ok();
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["results"][0]["value"], "2");
}

#[test]
fn exit_codes() {
    let (code, _, err) = exe(&["norm-eval"], &json!({"schema_version": 1, "seed": unit_f1(), "word": "a", "extra": 1}));
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("\"error\": \"input\""));
    let (code, _, _) = exe(&["norm-eval"], &json!({"schema_version": 2, "seed": unit_f1(), "word": "a"}));
    assert_eq!(code, 1);
    let (code, _, err) =
        exe(&["norm-ball", "--cap-ball", "10"], &json!({"schema_version": 1, "seed": unit_f1(), "radius": "50"}));
    assert_eq!(code, 3, "{err}");
    // φ sends every element of S₃ to the identity: norm defects of 1.
    let bad = json!({
        "schema_version": 1, "target": {"finite": s3_discrete()}, "subset": ["()", "(1 2)"],
        "h": s3_discrete(), "phi": ["()", "()"], "epsilon": "1/2"
    });
    let (code, out, _) = exe(&["eps-check"], &bad);
    assert_eq!(code, 2);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["certificate"]["violations"][0]["kind"], "norm");
}

#[test]
fn eps_check_identity_embedding() {
    let labels = ["()", "(2 3)", "(1 2)", "(1 2 3)", "(1 3 2)", "(1 3)"];
    let doc = json!({
        "schema_version": 1, "target": {"finite": s3_discrete()}, "subset": labels,
        "h": s3_discrete(), "phi": labels, "epsilon": "1/100"
    });
    let (code, out, err) = exe(&["eps-check"], &doc);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["certificate"]["violations"], json!([]));
    assert_eq!(v["certificate"]["relation_checks"], 36);
}

#[test]
fn approximate_integers_is_stable() {
    let doc = json!({"schema_version": 1, "target": {"int_lattice": {"weights": ["1"]}}, "subset": [0, 1, -1, 2, -2], "epsilon": "1/4"});
    let (code, first, err) = exe(&["approximate"], &doc);
    assert_eq!(code, 0, "{err}");
    let (_, second, _) = exe(&["approximate", "--sequential"], &doc);
    assert_eq!(first, second);
    let v: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["valid"], true);
    assert_eq!(v["trace"]["route"], "ball_action");
}

#[test]
fn approximate_s3() {
    let v = round_trip(
        Command::Approximate,
        &json!({"schema_version": 1, "target": {"finite": s3_discrete()}, "subset": [0, 1, 2, 3, 4, 5], "epsilon": "1/2"}),
    );
    assert_eq!(v["valid"], true);
    assert_eq!(v["model"]["kind"], "table");
    assert_eq!(v["model"]["order"], 6);
}

#[test]
fn moc_documents() {
    let v = round_trip(Command::Moc, &json!({"schema_version": 1, "finite": s3_discrete(), "element": "(1 2)"}));
    assert_eq!(v["identity"], true);
    let f2 = json!({"signature": [2], "aliases": {"a": "g0.1", "b": "g0.2"}, "values": {"a": "1", "b": "1"}});
    let v = round_trip(Command::Moc, &json!({"schema_version": 1, "seed": f2, "element": "a", "r_max": "3"}));
    assert_eq!(v["identity"], false);
    // id is not a modulus of a in F₂: a b a⁻¹ has norm 3.
    let doc = json!({
        "schema_version": 1, "seed": f2, "element": "a",
        "candidate": {"r_max": "1", "breakpoints": [["0", "0"]], "pieces": [{"from": "0", "terms": [["1", "0"]]}]}
    });
    let out = run(Command::Moc, &doc.to_string(), &Options::default()).unwrap();
    assert!(!out.certified);
}

#[test]
fn free_product_and_oracle() {
    let f = json!({"signature": [1], "values": {"g0.1": "1"}});
    let v = round_trip(
        Command::FreeProduct,
        &json!({"schema_version": 1, "factors": [f, f], "evaluate": ["g0.1 g1.1", "g0.1 g1.1 g0.1^-1"]}),
    );
    assert_eq!(v["passed"], true);
    assert_eq!(v["r_prime"], "2");
    assert_eq!(v["values"][0]["value"], "2");
    let v = round_trip(
        Command::MatchOracle,
        &json!({"schema_version": 1, "factors": [f, f], "budget": "2", "max_len": 5, "words": ["g0.1 g1.1"]}),
    );
    assert_eq!(v["agree"], true);
    assert_eq!(v["values"][0]["value"], "2");
}

#[test]
fn finite_approx_f1() {
    let v = round_trip(Command::FiniteApprox, &json!({"schema_version": 1, "seed": unit_f1(), "req_radius": 2}));
    assert_eq!(v["passed"], true);
    assert_eq!(v["degree"], 2 * v["n"].as_u64().unwrap() + 1);
}

#[test]
fn ultra_documents() {
    let v = round_trip(
        Command::UltraDiagnose,
        &json!({"schema_version": 1, "sequence": {"kind": "scaled_free", "rank": 2, "prefix": 3}, "elements": ["a b", "a b", "a b"], "delta": "1"}),
    );
    assert_eq!(v["collapse"][0]["value"], "5");
    assert_eq!(v["collapse"][2]["value"], "5/3");
    let v = round_trip(
        Command::UltraDiagnose,
        &json!({"schema_version": 1, "sequence": {"kind": "finitary_symmetric", "prefix": 2}, "elements": [[2, 1], [2, 1]], "delta": "1/2"}),
    );
    assert_eq!(v["sinf"][1]["delta"], "1/2");
    assert_eq!(v["sinf"][1]["sharp"], true);
    assert_eq!(v["distortion_limit"]["tail_start"], 0);
    let v = round_trip(
        Command::UltraDiagnose,
        &json!({"schema_version": 1, "sequence": {"kind": "explicit", "groups": [s3_discrete()]}, "elements": ["(1 2)"], "delta": "1"}),
    );
    assert_eq!(v["stages"][0]["distortion"], "1");
}

#[test]
fn norm_ball_and_table_format() {
    let v = round_trip(Command::NormBall, &json!({"schema_version": 1, "seed": unit_f1(), "radius": "2"}));
    assert_eq!(v["size"], 5);
    assert_eq!(v["axiom_violations"], 0);
    let (code, out, _) = exe(&["norm-ball", "--format", "table"], &json!({"schema_version": 1, "seed": unit_f1(), "radius": "1"}));
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l.starts_with("size") && l.ends_with('3')));
}
