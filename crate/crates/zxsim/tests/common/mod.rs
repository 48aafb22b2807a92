//! Shared helpers for integration tests: random circuits and brute-force sums.
#![allow(dead_code)]

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zxsim::lower::LoweredProgram;
use zxsim::zx::to_tensor;

#[derive(Clone, Copy, Debug)]
pub struct CircuitShape {
    pub qubits: u32,
    pub instructions: usize,
    pub max_magic: usize,
    pub max_noise_bits: usize,
    pub max_measurements: usize,
    pub max_prob: f64,
}

impl Default for CircuitShape {
    fn default() -> Self {
        Self {
            qubits: 4,
            instructions: 24,
            max_magic: 3,
            max_noise_bits: 8,
            max_measurements: 5,
            max_prob: 0.3,
        }
    }
}

fn angle(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.25) {
        f64::from(rng.gen_range(0..8)) * 0.25
    } else {
        (rng.gen_range(0.0..2.0f64) * 1000.0).round() / 1000.0
    }
}

fn prob(rng: &mut ChaCha8Rng, max: f64) -> f64 {
    (rng.gen_range(0.0..max) * 1000.0).round() / 1000.0
}

fn two(rng: &mut ChaCha8Rng, n: u32) -> (u32, u32) {
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Random circuit text mixing Clifford gates, rotations, noise and measurements,
/// ending with detectors and observables over random record subsets.
pub fn random_circuit(seed: u64, shape: CircuitShape) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.qubits.max(2);
    let mut s = String::new();
    let (mut magic, mut noise, mut meas) = (0usize, 0usize, 0usize);
    for _ in 0..shape.instructions {
        let q = rng.gen_range(0..n);
        let p = prob(&mut rng, shape.max_prob);
        match rng.gen_range(0..30) {
            0 => writeln!(s, "H {q}"),
            1 => writeln!(s, "S {q}"),
            2 => writeln!(s, "S_DAG {q}"),
            3 => writeln!(s, "X {q}"),
            4 => writeln!(s, "Y {q}"),
            5 => writeln!(s, "Z {q}"),
            6 => writeln!(s, "SQRT_X {q}"),
            7 => writeln!(s, "SQRT_X_DAG {q}"),
            8 | 9 => {
                let (a, b) = two(&mut rng, n);
                writeln!(s, "CNOT {a} {b}")
            }
            10 => {
                let (a, b) = two(&mut rng, n);
                writeln!(s, "CZ {a} {b}")
            }
            11 => {
                let (a, b) = two(&mut rng, n);
                writeln!(s, "SWAP {a} {b}")
            }
            12..=15 if magic < shape.max_magic => {
                magic += 1;
                match rng.gen_range(0..6) {
                    0 => writeln!(s, "T {q}"),
                    1 => writeln!(s, "T_DAG {q}"),
                    2 => writeln!(s, "R_Z({}) {q}", angle(&mut rng)),
                    3 => writeln!(s, "R_X({}) {q}", angle(&mut rng)),
                    4 => writeln!(s, "R_Y({}) {q}", angle(&mut rng)),
                    _ => writeln!(
                        s,
                        "U3({}, {}, {}) {q}",
                        angle(&mut rng),
                        angle(&mut rng),
                        angle(&mut rng)
                    ),
                }
            }
            16 => writeln!(s, "R {q}"),
            17 => writeln!(s, "RX {q}"),
            18..=21 if meas < shape.max_measurements => {
                meas += 1;
                match rng.gen_range(0..6) {
                    0 => writeln!(s, "MX {q}"),
                    1 => writeln!(s, "MR {q}"),
                    2 if noise < shape.max_noise_bits => {
                        noise += 1;
                        writeln!(s, "M({p}) {q}")
                    }
                    3 => {
                        let (a, b) = two(&mut rng, n);
                        let l = ['X', 'Y', 'Z'];
                        writeln!(s, "MPP {}{a}*{}{b}", l[rng.gen_range(0..3)], l[rng.gen_range(0..3)])
                    }
                    _ => writeln!(s, "M {q}"),
                }
            }
            22 if meas > 0 => {
                let k = rng.gen_range(1..=meas);
                let g = if rng.gen_bool(0.5) { "CX" } else { "CZ" };
                writeln!(s, "{g} rec[-{k}] {q}")
            }
            23 if noise < shape.max_noise_bits => {
                noise += 1;
                let g = ["X_ERROR", "Y_ERROR", "Z_ERROR"][rng.gen_range(0..3)];
                writeln!(s, "{g}({p}) {q}")
            }
            24 if noise + 2 <= shape.max_noise_bits => {
                noise += 2;
                writeln!(s, "DEPOLARIZE1({p}) {q}")
            }
            25 if noise + 2 <= shape.max_noise_bits => {
                noise += 2;
                let a = prob(&mut rng, shape.max_prob / 3.0);
                let b = prob(&mut rng, shape.max_prob / 3.0);
                let c = prob(&mut rng, shape.max_prob / 3.0);
                writeln!(s, "PAULI_CHANNEL_1({a}, {b}, {c}) {q}")
            }
            26 if noise + 4 <= shape.max_noise_bits => {
                noise += 4;
                let (a, b) = two(&mut rng, n);
                writeln!(s, "DEPOLARIZE2({p}) {a} {b}")
            }
            27 if noise + 4 <= shape.max_noise_bits => {
                noise += 4;
                let (a, b) = two(&mut rng, n);
                let args: Vec<String> = (0..15)
                    .map(|_| prob(&mut rng, shape.max_prob / 15.0).to_string())
                    .collect();
                writeln!(s, "PAULI_CHANNEL_2({}) {a} {b}", args.join(", "))
            }
            28 if noise < shape.max_noise_bits => {
                noise += 1;
                let (a, b) = two(&mut rng, n);
                let l = ['X', 'Y', 'Z'];
                writeln!(s, "E({p}) {}{a} {}{b}", l[rng.gen_range(0..3)], l[rng.gen_range(0..3)])
            }
            _ => writeln!(s, "H {q}"),
        }
        .expect("write to string");
    }
    while meas < 2 {
        meas += 1;
        writeln!(s, "M {}", rng.gen_range(0..n)).expect("write");
    }
    let ndet = rng.gen_range(1..=3);
    for _ in 0..ndet {
        let mut recs: Vec<usize> = (1..=meas).filter(|_| rng.gen_bool(0.4)).collect();
        if recs.is_empty() {
            recs.push(rng.gen_range(1..=meas));
        }
        let t: Vec<String> = recs.iter().map(|k| format!("rec[-{k}]")).collect();
        writeln!(s, "DETECTOR {}", t.join(" ")).expect("write");
    }
    if rng.gen_bool(0.7) {
        let k = rng.gen_range(1..=meas);
        writeln!(s, "OBSERVABLE_INCLUDE(0) rec[-{k}]").expect("write");
    }
    s
}

/// Exact output distribution of a lowered program by summing its tensor over noise patterns.
pub fn lowered_distribution(p: &LoweredProgram) -> Vec<f64> {
    let n = p.e_param_count;
    let mut acc = vec![0.0; 1 << p.outputs.len()];
    for pattern in 0..(1usize << n) {
        let bits: Vec<bool> = (0..n).map(|i| (pattern >> i) & 1 == 1).collect();
        let weight: f64 = p
            .channels
            .iter()
            .map(|g| {
                let idx = g
                    .param_indices
                    .iter()
                    .enumerate()
                    .fold(0, |a, (j, &e)| a | (usize::from(bits[e]) << j));
                g.table[idx]
            })
            .product();
        if weight == 0.0 {
            continue;
        }
        let t = to_tensor(&p.diagram, &bits).expect("small diagram");
        for (a, v) in acc.iter_mut().zip(&t.data) {
            *a += weight * v.re;
        }
    }
    acc
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Repetition-code memory experiment with bit-flip noise on data and ancillas.
///
/// Data qubits sit on even indices, ancillas on odd ones. Every round flips
/// each data qubit with probability `p`, extracts the neighboring parities,
/// flips each ancilla before measurement and compares with the previous round.
pub fn repetition_code(distance: usize, rounds: usize, p: f64) -> String {
    let d = distance;
    let data: Vec<usize> = (0..d).map(|i| 2 * i).collect();
    let anc: Vec<usize> = (0..d - 1).map(|i| 2 * i + 1).collect();
    let join = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    let mut s = String::new();
    writeln!(s, "R {}", join(&(0..2 * d - 1).collect::<Vec<_>>())).expect("write");
    for r in 0..rounds {
        writeln!(s, "X_ERROR({p}) {}", join(&data)).expect("write");
        let left: Vec<String> = anc.iter().map(|&a| format!("{} {a}", a - 1)).collect();
        let right: Vec<String> = anc.iter().map(|&a| format!("{} {a}", a + 1)).collect();
        writeln!(s, "CNOT {}", left.join(" ")).expect("write");
        writeln!(s, "CNOT {}", right.join(" ")).expect("write");
        writeln!(s, "X_ERROR({p}) {}", join(&anc)).expect("write");
        writeln!(s, "MR {}", join(&anc)).expect("write");
        let m = anc.len();
        for k in 0..m {
            let back = m - k;
            if r == 0 {
                writeln!(s, "DETECTOR({k}, {r}) rec[-{back}]").expect("write");
            } else {
                writeln!(s, "DETECTOR({k}, {r}) rec[-{back}] rec[-{}]", back + m).expect("write");
            }
        }
    }
    writeln!(s, "X_ERROR({p}) {}", join(&data)).expect("write");
    writeln!(s, "M {}", join(&data)).expect("write");
    let m = anc.len();
    for k in 0..m {
        let a = d - k;
        let b = d - k - 1;
        let c = d + m - k;
        writeln!(s, "DETECTOR({k}, {rounds}) rec[-{a}] rec[-{b}] rec[-{c}]").expect("write");
    }
    writeln!(s, "OBSERVABLE_INCLUDE(0) rec[-{d}]").expect("write");
    s
}

/// Two distance-2 repetition blocks: a stabilizer round, a logical π/8 X
/// rotation on each block with phase-flip noise in between, a transversal
/// CNOT, a second round, and terminal readout of both blocks.
pub fn two_block_example(p_flip: f64, p_phase: f64) -> String {
    format!(
        "R 0 1 2 3 4 5
X_ERROR({p_flip}) 0 1 3 4
CNOT 0 2 1 2 3 5 4 5
MR 2 5
CNOT 0 1
R_X(0.125) 0
CNOT 0 1
Z_ERROR({p_phase}) 0 1 3 4
CNOT 3 4
R_X(0.125) 3
CNOT 3 4
CNOT 0 3 1 4
X_ERROR({p_flip}) 0 1 3 4
CNOT 0 2 1 2 3 5 4 5
MR 2 5
M 0 1 3 4
DETECTOR rec[-8]
DETECTOR rec[-7]
DETECTOR rec[-6] rec[-8]
DETECTOR rec[-5] rec[-7] rec[-8]
DETECTOR rec[-4] rec[-3] rec[-6]
DETECTOR rec[-2] rec[-1] rec[-5]
OBSERVABLE_INCLUDE(0) rec[-4]
OBSERVABLE_INCLUDE(1) rec[-2]
"
    )
}

/// Histogram of shot indices; bit `i` of the index is output `i`.
pub fn histogram(record: &zxsim::sampler::SampleRecord) -> Vec<u64> {
    let width = record.bits_per_shot();
    assert!(width <= 20, "histogram width {width} too large");
    let mut counts = vec![0u64; 1 << width];
    for s in 0..record.num_shots() {
        let idx = record.bits.row(s).first().copied().unwrap_or(0) as usize;
        counts[idx] += 1;
    }
    counts
}

/// Largest deviation of sampled frequencies from `probs`, in standard deviations.
///
/// Outcomes with probability 0 or 1 must be matched exactly; otherwise they report infinity.
pub fn max_sigma(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let n = n as f64;
    counts
        .iter()
        .zip(probs)
        .map(|(&k, &q)| {
            let q = q.clamp(0.0, 1.0);
            let sd = (q * (1.0 - q) / n).sqrt();
            let dev = (k as f64 / n - q).abs();
            if sd == 0.0 {
                if dev < 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                dev / sd
            }
        })
        .fold(0.0, f64::max)
}

/// Pearson statistic and degrees of freedom for two samples over the same bins.
///
/// Bins with fewer than 20 combined counts are pooled into one.
pub fn two_sample_chi_square(a: &[u64], b: &[u64]) -> (f64, usize) {
    let mut pooled = (0u64, 0u64);
    let mut cells = Vec::new();
    for (&x, &y) in a.iter().zip(b) {
        if x + y < 20 {
            pooled.0 += x;
            pooled.1 += y;
        } else {
            cells.push((x, y));
        }
    }
    if pooled.0 + pooled.1 > 0 {
        cells.push(pooled);
    }
    let na: u64 = cells.iter().map(|c| c.0).sum();
    let nb: u64 = cells.iter().map(|c| c.1).sum();
    let (na, nb) = (na as f64, nb as f64);
    let mut stat = 0.0;
    for &(x, y) in &cells {
        let total = (x + y) as f64;
        let ea = total * na / (na + nb);
        let eb = total * nb / (na + nb);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    (stat, cells.len().saturating_sub(1))
}
