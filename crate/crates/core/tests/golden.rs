//! Frozen reference outputs. Regenerate with `RECNET_BLESS=1 cargo test --test golden`.

use std::fs;
use std::path::PathBuf;

use recnet::{derive_stream, generate, AttractivenessKind, ModelParams, ParetoParams, SeedSpec};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn check_or_bless(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("RECNET_BLESS").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden file {name} differs");
}

#[test]
fn stream_42_0_reference_sequence() {
    let mut s = derive_stream(SeedSpec::new(42, 0));
    let mut out = String::new();
    for _ in 0..10 {
        let u = s.uniform();
        out.push_str(&format!("{:016x} {u}\n", u.to_bits()));
    }
    check_or_bless("stream_42_0.txt", &out);
}

#[test]
fn small_graph_reference_edges() {
    let p = ModelParams::new(
        12,
        2,
        AttractivenessKind::Exponential { scale: 4 },
        ParetoParams::new(2.5, 1.0).unwrap(),
        SeedSpec::new(42, 0),
    )
    .unwrap();
    let g = generate(&p).unwrap();
    let mut out = String::new();
    for e in &g.edges {
        out.push_str(&format!("{} {}\n", e.source, e.target));
    }
    check_or_bless("graph_exp_n12_seed42.txt", &out);
}
