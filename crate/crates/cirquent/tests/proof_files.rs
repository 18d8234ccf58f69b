//! The shipped proof and input fixtures parse, check, and round-trip.

use cirquent::calculus::{check_proof, format_proof, parse_proof};
use cirquent::parse;

fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {path}: {e}"))
}

#[test]
fn shipped_proof_checks_with_the_stated_theorem() {
    let proof = parse_proof(&fixture("example_4_1.clproof")).expect("fixture parses");
    assert_eq!(proof.lines.len(), 13);
    let theorem = check_proof(&proof).expect("fixture checks");
    let stated = parse("(all[a] x. ~p(x) & all[a] x. ~p(x)) | ex[c] x. p(x)").unwrap();
    assert!(theorem.alpha_eq(&stated), "theorem is {}", cirquent::print(&theorem));
}

#[test]
fn shipped_proof_round_trips_through_the_text_format() {
    let proof = parse_proof(&fixture("example_4_1.clproof")).unwrap();
    let reprinted = format_proof(&proof);
    let reparsed = parse_proof(&reprinted).expect("formatted proof parses");
    assert_eq!(proof, reparsed);
    check_proof(&reparsed).expect("formatted proof still checks");
}

#[test]
fn shipped_inputs_parse_and_differ_only_in_one_cluster() {
    let merged = parse(fixture("merged_clusters.cl").trim()).expect("merged input parses");
    let distinct = parse(fixture("distinct_clusters.cl").trim()).expect("distinct input parses");
    assert!(merged.is_closed() && distinct.is_closed());
    assert!(!merged.alpha_eq(&distinct));
    assert!(merged.clusters_of().len() < distinct.clusters_of().len());
}
