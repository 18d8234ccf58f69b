//! Contract tests for the command-line interface: exit codes
//! (0 accept/OK, 1 reject/failure, 2 usage or input error), the frozen
//! JSON field names, and the proof-emission round trip.

use std::io::Write;
use std::process::Command;

use tempfile::NamedTempFile;

fn cli(args: &[&str]) -> (String, String, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_cirquent"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
        out.status.code(),
    )
}

fn temp_with(content: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(content.as_bytes()).unwrap();
    f.flush().unwrap();
    f
}

fn fixture_path(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn decide_accepts_top_with_exit_zero() {
    let f = temp_with("T\n");
    let (stdout, _, code) = cli(&["decide", f.path().to_str().unwrap()]);
    assert_eq!(code, Some(0));
    assert!(stdout.starts_with("ACCEPT"), "stdout: {stdout}");
}

#[test]
fn decide_rejects_distinct_clusters_with_exit_one() {
    let (stdout, _, code) = cli(&["decide", &fixture_path("distinct_clusters.cl")]);
    assert_eq!(code, Some(1));
    assert_eq!(stdout.trim(), "REJECT");
}

#[test]
fn decide_emits_a_proof_file_that_checks() {
    let out = NamedTempFile::new().unwrap();
    let out_path = out.path().to_str().unwrap().to_string();
    let (stdout, _, code) = cli(&[
        "decide",
        &fixture_path("merged_clusters.cl"),
        "--proof",
        &out_path,
    ]);
    assert_eq!(code, Some(0));
    assert!(stdout.starts_with("ACCEPT"), "stdout: {stdout}");

    let (stdout, _, code) = cli(&["check", &out_path]);
    assert_eq!(code, Some(0), "emitted proof must check: {stdout}");
    assert!(stdout.starts_with("OK "), "stdout: {stdout}");
}

#[test]
fn decide_requires_a_closed_cirquent() {
    let f = temp_with("p(x)\n");
    let (_, stderr, code) = cli(&["decide", f.path().to_str().unwrap()]);
    assert_eq!(code, Some(2));
    assert!(stderr.contains("free variable"), "stderr: {stderr}");
}

#[test]
fn check_reports_the_shipped_theorem() {
    let (stdout, _, code) = cli(&["check", &fixture_path("example_4_1.clproof")]);
    assert_eq!(code, Some(0));
    assert_eq!(
        stdout.trim(),
        "OK all[a] x. ~p(x) & all[a] x. ~p(x) | ex[c] x. p(x)"
    );
}

#[test]
fn check_names_the_line_with_a_tampered_rule() {
    let shipped = std::fs::read_to_string(fixture_path("example_4_1.clproof")).unwrap();

    // A recognized rule that does not justify the step: check-level failure
    // naming the line.
    let wrong_rule = shipped.replace("PandDistribution", "PandIdentity");
    let f = temp_with(&wrong_rule);
    let (stdout, _, code) = cli(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code, Some(1));
    assert!(stdout.starts_with("line 5:"), "stdout: {stdout}");

    // An unknown rule name: parse-level failure naming the file line.
    let unknown_rule = shipped.replace("PandDistribution", "PandRedistribution");
    let f = temp_with(&unknown_rule);
    let (_, stderr, code) = cli(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code, Some(2));
    assert!(stderr.contains("unknown rule name"), "stderr: {stderr}");
}

#[test]
fn check_rejects_forward_premise_references_at_parse_level() {
    let f = temp_with("1. T & T ; PandIdentity: 2 ; path=/\n2. T ; Axiom\n");
    let (_, stderr, code) = cli(&["check", f.path().to_str().unwrap()]);
    assert_eq!(code, Some(2), "stderr: {stderr}");
    assert!(stderr.contains("premise reference"), "stderr: {stderr}");
}

#[test]
fn usage_errors_exit_two() {
    let (_, _, code) = cli(&["decide"]);
    assert_eq!(code, Some(2));
    let (_, _, code) = cli(&["no-such-subcommand"]);
    assert_eq!(code, Some(2));
    let f = temp_with("p |\n");
    let (_, stderr, code) = cli(&["parse", f.path().to_str().unwrap()]);
    assert_eq!(code, Some(2));
    assert!(!stderr.is_empty());
}

#[test]
fn json_output_uses_the_frozen_field_names() {
    let f = temp_with("p &[a] q\n");
    let path = f.path().to_str().unwrap().to_string();

    let (stdout, _, _) = cli(&["parse", &path, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    for key in ["ok", "cirquent", "closed", "clusters"] {
        assert!(v.get(key).is_some(), "parse json missing {key}: {stdout}");
    }

    let (stdout, _, _) = cli(&["rank", &path, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    for key in ["overflow", "rank"] {
        assert!(v.get(key).is_some(), "rank json missing {key}: {stdout}");
    }
    assert_eq!(v["rank"], "2");

    let (stdout, _, _) = cli(&["decide", &path, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    for key in ["verdict", "proof_lines", "trace"] {
        assert!(v.get(key).is_some(), "decide json missing {key}: {stdout}");
    }
    assert_eq!(v["verdict"], "reject");

    let (stdout, _, _) = cli(&["purify", &path, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    for key in ["pure", "rewrites", "derivation_steps"] {
        assert!(v.get(key).is_some(), "purify json missing {key}: {stdout}");
    }
}

#[test]
fn oracle_reports_validity_with_matching_exit_codes() {
    let valid = temp_with("(~p &[a] ~q) | (p |[c] q)\n");
    let (stdout, _, code) = cli(&["oracle", valid.path().to_str().unwrap()]);
    assert_eq!((stdout.trim(), code), ("VALID", Some(0)));

    let invalid = temp_with("p |[a] ~p\n");
    let (stdout, _, code) = cli(&["oracle", invalid.path().to_str().unwrap()]);
    assert_eq!((stdout.trim(), code), ("INVALID", Some(1)));
}

#[test]
fn residue_applies_a_run_and_reports_the_win() {
    let c = temp_with("p &[a] q\n");
    let (stdout, _, code) = cli(&[
        "residue",
        c.path().to_str().unwrap(),
        "--run",
        "E:a.1",
        "--interpretation",
        "q",
    ]);
    assert_eq!(code, Some(0), "stdout: {stdout}");
    assert!(stdout.contains("residue: q"), "stdout: {stdout}");
    assert!(stdout.contains("won: true"), "stdout: {stdout}");
}

#[test]
fn purify_emits_a_replayable_derivation_fragment() {
    let f = temp_with("(p & T) | B\n");
    let frag = NamedTempFile::new().unwrap();
    let frag_path = frag.path().to_str().unwrap().to_string();
    let (_, stderr, code) = cli(&[
        "purify",
        f.path().to_str().unwrap(),
        "--derivation",
        &frag_path,
    ]);
    assert_eq!(code, Some(0), "stderr: {stderr}");

    let (stdout, _, code) = cli(&["check", &frag_path]);
    assert_eq!(code, Some(0), "fragment must check: {stdout}");
    assert!(stdout.contains("from premise"), "stdout: {stdout}");
}
