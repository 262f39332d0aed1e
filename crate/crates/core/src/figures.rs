//! Built-in example m-DAGs used throughout the tests, benches, and docs.
//!
//! `fig1` and `fig3a`..`fig3e` carry a colluder at `R_Y` whose conditional
//! distribution becomes identifiable under `R_X >= R_Y`; `fig2a` and `fig2b`
//! carry monotone self-censoring chains that destroy identifiability.

use crate::graph::{MDag, MonotoneSpec};

fn build(
    partial: &[&str],
    observed: &[&str],
    edges: &[(&str, &str)],
    mono: &[(&str, &str)],
) -> (MDag, MonotoneSpec) {
    let g = MDag::build(observed, partial, edges).expect("fixture graph");
    let m = MonotoneSpec::new(&g, mono).expect("fixture mono");
    (g, m)
}

/// Two partial variables; colluder `X -> R_Y <- R_X` with `R_X >= R_Y`.
pub fn fig1() -> (MDag, MonotoneSpec) {
    build(
        &["X", "Y"],
        &[],
        &[("X", "Y"), ("X", "R_Y"), ("R_X", "R_Y")],
        &[("R_X", "R_Y")],
    )
}

/// Bivariate self-censoring chain: `Y -> R_X` with `R_X >= R_Y`.
pub fn fig2a() -> (MDag, MonotoneSpec) {
    build(
        &["X", "Y"],
        &[],
        &[("X", "Y"), ("Y", "R_X"), ("R_X", "R_Y")],
        &[("R_X", "R_Y")],
    )
}

/// Length-4 self-censoring chain `X4 -> R_X1 -> .. -> R_X4`, fully monotone.
pub fn fig2b() -> (MDag, MonotoneSpec) {
    build(
        &["X1", "X2", "X3", "X4"],
        &[],
        &[
            ("X1", "X2"),
            ("X2", "X3"),
            ("X3", "X4"),
            ("X4", "R_X1"),
            ("R_X1", "R_X2"),
            ("R_X2", "R_X3"),
            ("R_X3", "R_X4"),
        ],
        &[("R_X1", "R_X2"), ("R_X2", "R_X3"), ("R_X3", "R_X4")],
    )
}

/// Colluder plus an extra partial parent `Z` of `R_Y` whose indicator is free.
pub fn fig3a() -> (MDag, MonotoneSpec) {
    build(
        &["X", "Y", "Z"],
        &[],
        &[
            ("X", "Y"),
            ("Y", "Z"),
            ("X", "R_Y"),
            ("X", "R_Z"),
            ("Z", "R_Y"),
            ("R_X", "R_Y"),
        ],
        &[("R_X", "R_Y")],
    )
}

/// `fig3a` plus `R_Y -> R_Z`.
pub fn fig3b() -> (MDag, MonotoneSpec) {
    build(
        &["X", "Y", "Z"],
        &[],
        &[
            ("X", "Y"),
            ("Y", "Z"),
            ("X", "R_Y"),
            ("X", "R_Z"),
            ("Z", "R_Y"),
            ("R_X", "R_Y"),
            ("R_Y", "R_Z"),
        ],
        &[("R_X", "R_Y")],
    )
}

/// `fig3b` plus a fully observed `W` confounding `Z` and `R_Z`.
pub fn fig3c() -> (MDag, MonotoneSpec) {
    build(
        &["X", "Y", "Z"],
        &["W"],
        &[
            ("X", "Y"),
            ("Y", "Z"),
            ("X", "R_Y"),
            ("X", "R_Z"),
            ("Z", "R_Y"),
            ("W", "Z"),
            ("W", "R_Z"),
            ("R_X", "R_Y"),
            ("R_Y", "R_Z"),
        ],
        &[("R_X", "R_Y")],
    )
}

/// Like `fig3c` but `W` is partially observed and `R_W` is a parent of `R_Y`.
pub fn fig3d() -> (MDag, MonotoneSpec) {
    build(
        &["X", "Y", "Z", "W"],
        &[],
        &[
            ("X", "Y"),
            ("Y", "Z"),
            ("X", "R_Y"),
            ("X", "R_Z"),
            ("Z", "R_Y"),
            ("W", "Z"),
            ("W", "R_Z"),
            ("R_X", "R_Y"),
            ("R_Y", "R_Z"),
            ("R_W", "R_Y"),
        ],
        &[("R_X", "R_Y")],
    )
}

/// Like `fig3d` but `R_W` hangs off `R_X` instead of entering `R_Y`.
pub fn fig3e() -> (MDag, MonotoneSpec) {
    build(
        &["X", "Y", "Z", "W"],
        &[],
        &[
            ("X", "Y"),
            ("Y", "Z"),
            ("X", "R_Y"),
            ("X", "R_Z"),
            ("Z", "R_Y"),
            ("W", "Z"),
            ("W", "R_Z"),
            ("R_X", "R_Y"),
            ("R_Y", "R_Z"),
            ("R_X", "R_W"),
        ],
        &[("R_X", "R_Y")],
    )
}

/// The self-censoring chain graph of length `k >= 1`:
/// `X1 -> .. -> Xk`, `Xk -> R_X1`, and a fully monotone indicator chain.
/// `chain(2)` has the same shape as [`fig2a`] up to renaming; `chain(4)` is
/// [`fig2b`].
pub fn chain(k: usize) -> (MDag, MonotoneSpec) {
    assert!(k >= 1);
    let names: Vec<String> = (1..=k).map(|i| format!("X{i}")).collect();
    let partial: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut edges: Vec<(String, String)> = Vec::new();
    for i in 1..k {
        edges.push((format!("X{i}"), format!("X{}", i + 1)));
    }
    edges.push((format!("X{k}"), "R_X1".to_string()));
    let mut mono: Vec<(String, String)> = Vec::new();
    for j in 2..=k {
        let e = (format!("R_X{}", j - 1), format!("R_X{j}"));
        edges.push(e.clone());
        mono.push(e);
    }
    let eref: Vec<(&str, &str)> = edges
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let mref: Vec<(&str, &str)> = mono.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    build(&partial, &[], &eref, &mref)
}

/// All eight example graphs with their monotone annotations, keyed by name.
pub fn all() -> Vec<(&'static str, MDag, MonotoneSpec)> {
    let mut out = Vec::new();
    for (name, f) in [
        ("fig1", fig1 as fn() -> (MDag, MonotoneSpec)),
        ("fig2a", fig2a),
        ("fig2b", fig2b),
        ("fig3a", fig3a),
        ("fig3b", fig3b),
        ("fig3c", fig3c),
        ("fig3d", fig3d),
        ("fig3e", fig3e),
    ] {
        let (g, m) = f();
        out.push((name, g, m));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate_mdag;

    #[test]
    fn all_figures_are_valid_mdags() {
        for (name, g, _) in all() {
            let report = validate_mdag(&g);
            assert!(report.is_valid(), "{name}: {:?}", report.violations);
        }
    }

    #[test]
    fn chain_matches_fig2b() {
        let (g4, m4) = chain(4);
        let (gb, mb) = fig2b();
        assert_eq!(g4, gb);
        assert_eq!(m4, mb);
    }
}
