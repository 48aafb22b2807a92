mod common;

use common::{histogram, max_sigma, random_circuit, repetition_code, two_sample_chi_square, CircuitShape};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use zxsim::circuit::parse_circuit;
use zxsim::compile::{compile, CompiledSampler};
use zxsim::encoding::{encode_shots, OutputEncoding};
use zxsim::lower::SampleMode;
use zxsim::oracle::oracle_distribution;
use zxsim::sampler::{probability_of, sample_detectors, sample_measurements, ErrorPath, SampleError, SampleOptions};

const LISTING: &str = "RX 0
R 1
R_Z(0.125) 0
PAULI_CHANNEL_1(0.1, 0.1, 0.2) 0 1
H 0
CNOT 0 1
DEPOLARIZE2(0.01) 0 1
M 0 1
DETECTOR rec[-1] rec[-2]
";

fn compiled(text: &str, mode: SampleMode) -> CompiledSampler {
    compile(&parse_circuit(text).expect("parse"), mode).expect("compile")
}

fn opts() -> SampleOptions {
    SampleOptions::default()
}

#[test]
fn hadamard_measurement_is_fair() {
    let cs = compiled("H 0\nM 0\n", SampleMode::Measurements);
    let rec = sample_measurements(&cs, 1_000_000, 11, &opts()).unwrap();
    assert!(max_sigma(&histogram(&rec), &[0.5, 0.5]) < 5.0);
    assert!((probability_of(&cs, &[false], None).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn t_between_hadamards() {
    let cs = compiled("H 0\nT 0\nH 0\nM 0\n", SampleMode::Measurements);
    let p0 = (std::f64::consts::PI / 8.0).cos().powi(2);
    assert!((probability_of(&cs, &[false], None).unwrap() - p0).abs() < 1e-9);
    let rec = sample_measurements(&cs, 1_000_000, 5, &opts()).unwrap();
    assert!(max_sigma(&histogram(&rec), &[p0, 1.0 - p0]) < 5.0);
}

#[test]
fn bell_pairs_are_correlated() {
    let cs = compiled("H 0\nCNOT 0 1\nM 0 1\n", SampleMode::Measurements);
    let counts = histogram(&sample_measurements(&cs, 200_000, 3, &opts()).unwrap());
    assert_eq!(counts[1] + counts[2], 0);
    assert!(max_sigma(&counts, &[0.5, 0.0, 0.0, 0.5]) < 5.0);
}

#[test]
fn noiseless_memory_detectors_are_zero() {
    let cs = compiled(&repetition_code(3, 3, 0.0), SampleMode::Detectors);
    let rec = sample_detectors(&cs, 10_000, 1, &opts()).unwrap();
    assert!(rec.bits.data().iter().all(|&w| w == 0));
    assert_eq!(rec.bits_per_shot(), cs.num_outputs());
}

#[test]
fn listing_detector_distribution_matches_oracle() {
    let c = parse_circuit(LISTING).unwrap();
    let oracle = oracle_distribution(&c, SampleMode::Detectors).unwrap();
    let cs = compile(&c, SampleMode::Detectors).unwrap();
    for (idx, &q) in oracle.probs.iter().enumerate() {
        let bits: Vec<bool> = (0..oracle.num_outputs).map(|i| (idx >> i) & 1 == 1).collect();
        assert!((probability_of(&cs, &bits, None).unwrap() - q).abs() < 1e-9);
    }
    let rec = sample_detectors(&cs, 1_000_000, 17, &opts()).unwrap();
    assert!(max_sigma(&histogram(&rec), &oracle.probs) < 5.0);
}

#[test]
fn random_circuits_sample_like_the_oracle() {
    let shape = CircuitShape {
        qubits: 3,
        instructions: 16,
        max_measurements: 4,
        ..CircuitShape::default()
    };
    for seed in 0..12 {
        let c = parse_circuit(&random_circuit(500 + seed, shape)).unwrap();
        let oracle = oracle_distribution(&c, SampleMode::Measurements).unwrap();
        let cs = compile(&c, SampleMode::Measurements).unwrap();
        let rec = sample_measurements(&cs, 200_000, seed, &opts()).unwrap();
        let s = max_sigma(&histogram(&rec), &oracle.probs);
        assert!(s < 5.0, "seed {seed}: {s:.2} sigma");
    }
}

#[test]
fn conditional_probabilities_normalize() {
    let shape = CircuitShape {
        qubits: 3,
        instructions: 14,
        max_measurements: 4,
        ..CircuitShape::default()
    };
    for seed in 0..10u64 {
        let c = parse_circuit(&random_circuit(900 + seed, shape)).unwrap();
        let cs = compile(&c, SampleMode::Measurements).unwrap();
        let n = cs.num_outputs();
        let num_e = cs.basis.num_e();
        for k in 0..10u64 {
            let noise: Vec<bool> = (0..num_e)
                .map(|i| (seed.wrapping_mul(31).wrapping_add(k * 7 + i as u64 * 13) % 5) == 0)
                .collect();
            let total: f64 = (0..1usize << n)
                .map(|idx| {
                    let bits: Vec<bool> = (0..n).map(|i| (idx >> i) & 1 == 1).collect();
                    probability_of(&cs, &bits, Some(&noise)).unwrap()
                })
                .sum();
            assert!((total - 1.0).abs() < 1e-9, "seed {seed} noise {k}: {total}");
        }
    }
}

#[test]
fn sparse_and_dense_paths_agree() {
    let cs = compiled(&repetition_code(3, 3, 0.01), SampleMode::Detectors);
    let run = |path| {
        let o = SampleOptions { path, ..opts() };
        histogram(&sample_detectors(&cs, 300_000, 23, &o).unwrap())
    };
    let (stat, df) = two_sample_chi_square(&run(ErrorPath::Dense), &run(ErrorPath::Sparse));
    let p = 1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "chi-square {stat:.1} on {df} dof, p={p:.2e}");
}

#[test]
fn output_is_independent_of_threads_and_reruns() {
    let cs = compiled(&common::two_block_example(0.05, 0.1), SampleMode::Detectors);
    let bytes = |threads| {
        let o = SampleOptions {
            batch_size: 1000,
            threads: Some(threads),
            ..opts()
        };
        encode_shots(&sample_detectors(&cs, 10_500, 99, &o).unwrap().bits, OutputEncoding::B8)
    };
    let one = bytes(1);
    assert_eq!(one, bytes(1));
    assert_eq!(one, bytes(3));
    assert_ne!(one, {
        let o = SampleOptions {
            batch_size: 1000,
            ..opts()
        };
        encode_shots(
            &sample_detectors(&cs, 10_500, 100, &o).unwrap().bits,
            OutputEncoding::B8,
        )
    });
}

#[test]
fn wrong_mode_and_zero_batch_are_errors() {
    let cs = compiled("H 0\nM 0\n", SampleMode::Measurements);
    assert!(matches!(
        sample_detectors(&cs, 10, 0, &opts()),
        Err(SampleError::ModeMismatch { .. })
    ));
    let o = SampleOptions {
        batch_size: 0,
        ..opts()
    };
    assert!(matches!(
        sample_measurements(&cs, 10, 0, &o),
        Err(SampleError::EmptyBatch)
    ));
    assert!(matches!(
        probability_of(&cs, &[false, true], None),
        Err(SampleError::OutcomeWidth { .. })
    ));
}
