//! The binary end to end: exit codes, error bodies, JSON round trips.

use std::path::PathBuf;
use std::process::Command;

use hermcone::gen::{random_complex, random_structure, rng};
use hermcone_cli::bundle::Bundle;
use proptest::prelude::*;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hermcone"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli_contract");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Runs the binary, returns (exit code, stdout).
fn hc(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().expect("binary runs");
    (out.status.code().expect("exit code"), String::from_utf8(out.stdout).unwrap())
}

fn sample_to(kind: &str, extra: &[&str], file: &str) -> String {
    let p = tmp(file);
    let mut args = vec!["sample", kind];
    args.extend_from_slice(extra);
    let (code, text) = hc(&args);
    assert_eq!(code, 0, "{text}");
    std::fs::write(&p, &text).unwrap();
    p.to_str().unwrap().to_string()
}

fn error_body(text: &str, code: i32) {
    let v: Value = serde_json::from_str(text).expect("error body is json");
    assert_eq!(v["exit"], code);
    assert!(v["error"].is_string() && v["message"].is_string());
}

#[test]
fn tau_of_sample_generator() {
    let p = sample_to("ea", &["--a", "-0.5"], "ea.json");
    let (code, text) = hc(&["tau", "--bundle", &p, "--name", "ea"]);
    assert_eq!(code, 0);
    assert_eq!(text.trim(), "-0.500000000000");
    let (_, j) = hc(&["tau", "--bundle", &p, "--name", "ea", "--format", "json"]);
    let v: Value = serde_json::from_str(&j).unwrap();
    assert_eq!(v["tau"].as_f64().unwrap(), -0.5);
}

#[test]
fn meager_sample_is_zero() {
    let p = sample_to("meager", &["--a", "2.5"], "meager.json");
    let (code, text) = hc(&["tau", "--bundle", &p, "--name", "meager"]);
    assert_eq!(code, 0);
    assert_eq!(text.trim(), "0.000000000000");
}

#[test]
fn exit_code_table() {
    let point = sample_to("point", &[], "point.json");
    let (code, text) = hc(&["tau", "--bundle", &point, "--name", "point"]);
    assert_eq!(code, 3);
    error_body(&text, 3);

    let (code, text) = hc(&["tau", "--bundle", &point, "--name", "nope"]);
    assert_eq!(code, 2);
    error_body(&text, 2);

    let missing = tmp("does-not-exist.json");
    let (code, _) = hc(&["tau", "--bundle", missing.to_str().unwrap(), "--name", "x"]);
    assert_eq!(code, 2);

    let garbage = tmp("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    let (code, text) = hc(&["tau", "--bundle", garbage.to_str().unwrap(), "--name", "x"]);
    assert_eq!(code, 2);
    error_body(&text, 2);

    let (code, _) = hc(&["verify", "--suite", "no-such-suite"]);
    assert_eq!(code, 2);

    let (code, text) = hc(&["verify", "--suite", "genera", "--cases", "0"]);
    assert_eq!(code, 0);
    assert!(text.trim().is_empty());
}

#[test]
fn non_chain_map_is_invalid() {
    let text = r#"{
      "complexes": {"e": {"lo": 0, "hi": 1, "spaces": {"0": {"dim": 1, "gram": [[[1.0, 0.0]]]}, "1": {"dim": 1, "gram": [[[1.0, 0.0]]]}},
                         "diffs": {"0": [[[1.0, 0.0]]]}}},
      "maps": {"bad": {"source": "e", "target": "e", "maps": {"0": [[[1.0, 0.0]]], "1": [[[2.0, 0.0]]]}}}
    }"#;
    let p = tmp("nonchain.json");
    std::fs::write(&p, text).unwrap();
    let (code, out) = hc(&["tau", "--bundle", p.to_str().unwrap(), "--name", "e"]);
    assert_eq!(code, 2, "{out}");
    error_body(&out, 2);
}

#[test]
fn corrupted_rule_fails_with_inputs() {
    let (code, text) = hc(&["verify", "--suite", "cone-welldef", "--cases", "2", "--corrupt-rule", "torsor-distance"]);
    assert_eq!(code, 1);
    let recs: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let bad: Vec<&Value> = recs.iter().filter(|r| r["pass"] == false).collect();
    assert_eq!(bad.len(), 2);
    assert!(bad.iter().all(|r| r["rule"] == "torsor-distance" && r["inputs"].is_object()));
    assert!(recs.iter().filter(|r| r["pass"] == true).all(|r| r.get("inputs").is_none()));
}

#[test]
fn sample_bundles_round_trip_bit_exact() {
    for kind in ["iso", "triangle", "ea", "meager"] {
        let p = sample_to(kind, &["--seed", "4"], &format!("rt-{kind}.json"));
        let text = std::fs::read_to_string(&p).unwrap();
        let b = Bundle::from_json(&text).unwrap();
        assert_eq!(format!("{}\n", b.to_json()), text, "{kind}");
    }
}

#[test]
fn cone_output_round_trips_and_reloads() {
    let p = sample_to("triangle", &["--a", "0.3"], "cone-in.json");
    let out = tmp("cone-out.json");
    let (code, text) = hc(&[
        "cone", "--bundle", &p, "--source", "h1", "--target", "h2", "--map", "t.u", "--out", out.to_str().unwrap(),
    ]);
    // t.u joins the triangle's objects, not h1 → h2: the ends disagree
    assert_ne!(code, 0, "{text}");
    let (code, text) = hc(&["cone", "--bundle", &p, "--source", "t.a", "--target", "t.b", "--map", "t.u", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
    let written = std::fs::read_to_string(&out).unwrap();
    let b = Bundle::from_json(&written).unwrap();
    assert_eq!(format!("{}\n", b.to_json()), written);
    assert!(b.structure("cone").is_ok());
}

#[test]
fn class_and_distance_commands() {
    let p = sample_to("iso", &[], "iso.json");
    for roof in ["id", "iso"] {
        let (code, text) = hc(&["class-iso", "--bundle", &p, "--roof", roof, "--format", "text"]);
        assert_eq!(code, 0);
        assert!(text.trim().parse::<f64>().unwrap().abs() < 1e-9, "{roof}: {text}");
    }
    let t = sample_to("triangle", &["--a", "0.75"], "tri.json");
    let (code, text) = hc(&["class-triangle", "--bundle", &t, "--triangle", "t", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(text.trim().parse::<f64>().unwrap().abs() < 1e-9);
    let (_, text) = hc(&["distance", "--bundle", &t, "--a", "h2", "--b", "h1", "--format", "text"]);
    assert_eq!(text.trim(), "0.750000000000");
}

#[test]
fn todd_and_genus_commands() {
    let (code, text) = hc(&["todd", "--order", "12"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 13);
    assert!(lines[12].contains("-691/1307674368000"), "{}", lines[12]);

    let spec = sample_to("genus", &[], "genus.json");
    let e = tmp("single-ea.json");
    let bundle = Bundle::from_json(&std::fs::read_to_string(sample_to("ea", &["--a", "1.5"], "g-ea.json")).unwrap()).unwrap();
    std::fs::write(&e, serde_json::to_string(&bundle.complexes["ea"]).unwrap()).unwrap();
    let (code, text) = hc(&["genus", "eval", "--spec", &spec, "--input", e.to_str().unwrap()]);
    assert_eq!(code, 0, "{text}");
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!((v["point_class"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(v["genus"].as_f64().unwrap(), 0.0);
}

#[test]
fn compose_chain_with_associativity() {
    let c = sample_to("chain", &["--seed", "8"], "chain.json");
    let (code, text) = hc(&["compose", "--chain", &c, "--check-assoc"]);
    assert_eq!(code, 0, "{text}");
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-8);

    // the composite chain document is itself a valid chain input
    let (code, text) = hc(&["compose", "--chain", &c]);
    assert_eq!(code, 0);
    let again = tmp("composite.json");
    std::fs::write(&again, &text).unwrap();
    let (code, _) = hc(&["compose", "--chain", again.to_str().unwrap()]);
    assert_eq!(code, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn structure_bundles_round_trip(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let u = random_complex(&mut r, 3, 3);
        let h = random_structure(&mut r, &u);
        let mut b = Bundle::default();
        b.put_structure("h", &h);
        let text = b.to_json();
        let back = Bundle::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        let h2 = back.structure("h").unwrap();
        prop_assert_eq!(h2.metric(), h.metric());
        prop_assert_eq!(h2.underlying(), h.underlying());
    }
}
