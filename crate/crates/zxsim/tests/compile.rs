mod common;

use common::{random_circuit, repetition_code, CircuitShape};
use zxsim::circuit::parse_circuit;
use zxsim::compile::{compile, export_dem};
use zxsim::lower::SampleMode;
use zxsim::oracle::oracle_distribution;
use zxsim::sampler::probability_of;

fn all_outcomes(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1usize << n).map(move |m| (0..n).map(|i| (m >> i) & 1 == 1).collect())
}

fn check_against_oracle(text: &str, mode: SampleMode) -> f64 {
    let c = parse_circuit(text).unwrap();
    let cs = compile(&c, mode).unwrap_or_else(|e| panic!("{e}\n{text}"));
    let want = oracle_distribution(&c, mode).unwrap();
    let mut worst = 0.0f64;
    for bits in all_outcomes(cs.num_outputs()) {
        let got = probability_of(&cs, &bits, None).unwrap_or_else(|e| panic!("{e}\n{text}"));
        worst = worst.max((got - want.prob(&bits)).abs());
    }
    worst
}

#[test]
fn small_circuits_match_oracle() {
    for text in [
        "H 0\nM 0",
        "H 0\nT 0\nH 0\nM 0",
        "H 0\nCNOT 0 1\nM 0 1",
        "X_ERROR(0.1) 0\nM 0\nDETECTOR rec[-1]",
        "RX 0\nT 0\nMX 0\nDETECTOR rec[-1]",
        "H 0\nT 0 0 0 0 0 0\nH 0\nM 0",
        "H 0 1 2 3 4\nT 0 1 2 3 4\nCNOT 0 1 1 2 2 3 3 4\nH 0 1 2 3 4\nM 0 1 2 3 4",
    ] {
        for mode in [SampleMode::Measurements, SampleMode::Detectors] {
            let d = check_against_oracle(text, mode);
            assert!(d < 1e-9, "{mode:?} diff {d}\n{text}");
        }
    }
}

#[test]
fn random_circuits_match_oracle() {
    for seed in 0..40 {
        let text = random_circuit(1000 + seed, CircuitShape::default());
        for mode in [SampleMode::Measurements, SampleMode::Detectors] {
            let d = check_against_oracle(&text, mode);
            assert!(d < 1e-9, "seed {seed} {mode:?} diff {d}\n{text}");
        }
    }
}

#[test]
fn merge_fixture_exports_single_line() {
    let c = parse_circuit("X_ERROR(0.1) 0\nX_ERROR(0.2) 0\nM 0\nDETECTOR rec[-1]").unwrap();
    let cs = compile(&c, SampleMode::Detectors).unwrap();
    assert_eq!(cs.model.mechanisms.len(), 1);
    assert_eq!(export_dem(&cs), "error(0.26) D0\n");
}

#[test]
fn repetition_code_is_fully_separated() {
    let c = parse_circuit(&repetition_code(3, 3, 0.01)).unwrap();
    let cs = compile(&c, SampleMode::Detectors).unwrap();
    assert!(cs.is_deterministic());
    assert!(cs.separation_complete());
    assert_eq!(cs.stats.chi, 1);
    let dem = export_dem(&cs);
    assert!(
        dem.lines().any(|l| l.starts_with("error(") && l.ends_with("L0")),
        "{dem}"
    );
    assert!(dem.contains("detector(0, 0) D0"), "{dem}");
}

#[test]
fn nondeterministic_detector_is_sampled_sequentially() {
    let c = parse_circuit("RX 0\nT 0\nMX 0\nDETECTOR rec[-1]").unwrap();
    let cs = compile(&c, SampleMode::Detectors).unwrap();
    assert_eq!(cs.components.len(), 1);
    assert_eq!(cs.stats.unseparated_detectors, 1);
}
