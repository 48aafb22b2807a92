//! Brute-force reference simulators for small circuits.
//!
//! Nothing here shares code with the ZX pipeline except the circuit parser:
//! noise is enumerated pattern by pattern, and each pattern is evolved as a
//! statevector that branches on every measurement.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuit::{Circuit, OpKind, Pauli, Target};
use crate::lower::SampleMode;
use crate::zx::{contract, ContractionOrder, ParamZXDiagram, ZxError};

pub const MAX_QUBITS: usize = 12;
pub const MAX_NOISE_BITS: f64 = 20.0;
pub const MAX_MEASUREMENTS: usize = 16;
pub const MAX_OUTPUTS: usize = 20;
pub const MAX_DENSITY_QUBITS: usize = 6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("circuit has {0} qubits, oracle limit is {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("noise entropy {0:.1} bits exceeds oracle limit {MAX_NOISE_BITS}")]
    TooMuchNoise(f64),
    #[error("circuit has {0} measurements, oracle limit is {MAX_MEASUREMENTS}")]
    TooManyMeasurements(usize),
    #[error("{0} outputs exceed oracle limit {MAX_OUTPUTS}")]
    TooManyOutputs(usize),
    #[error("density-matrix oracle is limited to {MAX_DENSITY_QUBITS} qubits")]
    DensityTooLarge,
    #[error("diagram is not closed")]
    OpenDiagram,
    #[error(transparent)]
    Zx(#[from] ZxError),
}

/// Exact distribution over output bitstrings; bit `i` of the index is output `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    pub num_outputs: usize,
    pub probs: Vec<f64>,
}

impl OutcomeDistribution {
    #[must_use]
    pub fn prob(&self, bits: &[bool]) -> f64 {
        let idx = bits
            .iter()
            .enumerate()
            .fold(0usize, |a, (i, &b)| a | (usize::from(b) << i));
        self.probs[idx]
    }

    #[must_use]
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Marginal probability that output `i` is 1.
    #[must_use]
    pub fn marginal(&self, i: usize) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(idx, _)| (idx >> i) & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }
}

type Matrix2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gate_matrix(kind: OpKind, args: &[f64]) -> Matrix2 {
    let h = FRAC_1_SQRT_2;
    let (z, o, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    let rz = |t: f64| [[Complex64::cis(-t / 2.0), z], [z, Complex64::cis(t / 2.0)]];
    let rx = |t: f64| {
        let (s, co) = (t / 2.0).sin_cos();
        [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
    };
    let ry = |t: f64| {
        let (s, co) = (t / 2.0).sin_cos();
        [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
    };
    match kind {
        OpKind::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        OpKind::S => [[o, z], [z, i]],
        OpKind::SDag => [[o, z], [z, -i]],
        OpKind::X => [[z, o], [o, z]],
        OpKind::Y => [[z, -i], [i, z]],
        OpKind::Z => [[o, z], [z, -o]],
        OpKind::SqrtX => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
        OpKind::SqrtXDag => [[c(0.5, -0.5), c(0.5, 0.5)], [c(0.5, 0.5), c(0.5, -0.5)]],
        OpKind::T => [[o, z], [z, Complex64::cis(PI / 4.0)]],
        OpKind::TDag => [[o, z], [z, Complex64::cis(-PI / 4.0)]],
        OpKind::RotZ => rz(args[0] * PI),
        OpKind::RotX => rx(args[0] * PI),
        OpKind::RotY => ry(args[0] * PI),
        OpKind::U3 => {
            let (t, p, l) = (args[0] * PI, args[1] * PI, args[2] * PI);
            let (s, co) = (t / 2.0).sin_cos();
            [
                [c(co, 0.0), -Complex64::cis(l) * s],
                [Complex64::cis(p) * s, Complex64::cis(p + l) * co],
            ]
        }
        other => unreachable!("{} is not a one-qubit gate", other.name()),
    }
}

#[derive(Clone, Debug)]
struct NoiseOutcome {
    prob: f64,
    /// (qubit, x, z)
    paulis: Vec<(usize, bool, bool)>,
    flip: bool,
}

#[derive(Clone, Debug)]
enum Step {
    Unitary(usize, Matrix2),
    Cnot(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
    /// Record index controlling a Pauli on a qubit.
    Controlled {
        record: usize,
        qubit: usize,
        x: bool,
    },
    Noise(usize),
    Reset {
        qubit: usize,
        x_basis: bool,
    },
    Measure {
        product: Vec<(Pauli, usize)>,
        flip: Option<usize>,
    },
}

struct Program {
    steps: Vec<Step>,
    events: Vec<Vec<NoiseOutcome>>,
    num_qubits: usize,
}

fn one_qubit_outcomes(table: &[(f64, bool, bool)], q: usize) -> Vec<NoiseOutcome> {
    table
        .iter()
        .filter(|t| t.0 > 0.0)
        .map(|&(prob, x, z)| NoiseOutcome {
            prob,
            paulis: vec![(q, x, z)],
            flip: false,
        })
        .collect()
}

fn letter_xz(letter: usize) -> (bool, bool) {
    [(false, false), (true, false), (true, true), (false, true)][letter]
}

fn compile_program(c: &Circuit) -> Program {
    let mut steps = Vec::new();
    let mut events: Vec<Vec<NoiseOutcome>> = Vec::new();
    let mut records = 0usize;
    let flip_event = |p: f64, events: &mut Vec<Vec<NoiseOutcome>>| -> Option<usize> {
        (p > 0.0).then(|| {
            events.push(
                [(1.0 - p, false), (p, true)]
                    .iter()
                    .filter(|t| t.0 > 0.0)
                    .map(|&(prob, flip)| NoiseOutcome {
                        prob,
                        paulis: Vec::new(),
                        flip,
                    })
                    .collect(),
            );
            events.len() - 1
        })
    };
    for inst in &c.instructions {
        let qs: Vec<usize> = inst.qubits().map(|q| q as usize).collect();
        let flip_p = inst.args.first().copied().unwrap_or(0.0);
        match inst.kind {
            OpKind::H
            | OpKind::S
            | OpKind::SDag
            | OpKind::X
            | OpKind::Y
            | OpKind::Z
            | OpKind::SqrtX
            | OpKind::SqrtXDag
            | OpKind::T
            | OpKind::TDag
            | OpKind::RotX
            | OpKind::RotY
            | OpKind::RotZ
            | OpKind::U3 => {
                let m = gate_matrix(inst.kind, &inst.args);
                steps.extend(qs.iter().map(|&q| Step::Unitary(q, m)));
            }
            OpKind::Cnot | OpKind::Cz => {
                for pair in inst.targets.chunks(2) {
                    let x = inst.kind == OpKind::Cnot;
                    steps.push(match (pair[0], pair[1]) {
                        (Target::Qubit(a), Target::Qubit(b)) if x => Step::Cnot(a as usize, b as usize),
                        (Target::Qubit(a), Target::Qubit(b)) => Step::Cz(a as usize, b as usize),
                        (Target::Rec(k), Target::Qubit(q)) | (Target::Qubit(q), Target::Rec(k)) => Step::Controlled {
                            record: records - k as usize,
                            qubit: q as usize,
                            x,
                        },
                        _ => unreachable!("validated by the parser"),
                    });
                }
            }
            OpKind::Swap => {
                for p in qs.chunks(2) {
                    steps.push(Step::Swap(p[0], p[1]));
                }
            }
            OpKind::ResetZ | OpKind::ResetX => {
                for &q in &qs {
                    steps.push(Step::Reset {
                        qubit: q,
                        x_basis: inst.kind == OpKind::ResetX,
                    });
                }
            }
            OpKind::MeasureZ | OpKind::MeasureX | OpKind::MeasureReset => {
                let p = if inst.kind == OpKind::MeasureX {
                    Pauli::X
                } else {
                    Pauli::Z
                };
                for &q in &qs {
                    let flip = flip_event(flip_p, &mut events);
                    steps.push(Step::Measure {
                        product: vec![(p, q)],
                        flip,
                    });
                    if inst.kind == OpKind::MeasureReset {
                        steps.push(Step::Reset {
                            qubit: q,
                            x_basis: false,
                        });
                    }
                    records += 1;
                }
            }
            OpKind::Mpp => {
                for prod in inst.pauli_products() {
                    let flip = flip_event(flip_p, &mut events);
                    steps.push(Step::Measure {
                        product: prod.iter().map(|&(p, q)| (p, q as usize)).collect(),
                        flip,
                    });
                    records += 1;
                }
            }
            OpKind::XError | OpKind::YError | OpKind::ZError => {
                let p = inst.args[0];
                let (x, z) = match inst.kind {
                    OpKind::XError => (true, false),
                    OpKind::YError => (true, true),
                    _ => (false, true),
                };
                for &q in &qs {
                    push_event(
                        &mut events,
                        &mut steps,
                        one_qubit_outcomes(&[(1.0 - p, false, false), (p, x, z)], q),
                    );
                }
            }
            OpKind::Depolarize1 | OpKind::PauliChannel1 => {
                let (px, py, pz) = if inst.kind == OpKind::Depolarize1 {
                    let t = inst.args[0] / 3.0;
                    (t, t, t)
                } else {
                    (inst.args[0], inst.args[1], inst.args[2])
                };
                let id = (1.0 - px - py - pz).max(0.0);
                for &q in &qs {
                    let table = [
                        (id, false, false),
                        (px, true, false),
                        (py, true, true),
                        (pz, false, true),
                    ];
                    push_event(&mut events, &mut steps, one_qubit_outcomes(&table, q));
                }
            }
            OpKind::Depolarize2 | OpKind::PauliChannel2 => {
                let probs: Vec<f64> = if inst.kind == OpKind::Depolarize2 {
                    vec![inst.args[0] / 15.0; 15]
                } else {
                    inst.args.clone()
                };
                let id = (1.0 - probs.iter().sum::<f64>()).max(0.0);
                for pair in qs.chunks(2) {
                    let mut outs = Vec::new();
                    for code in 0..16usize {
                        let prob = if code == 0 { id } else { probs[code - 1] };
                        if prob <= 0.0 {
                            continue;
                        }
                        let (xa, za) = letter_xz(code / 4);
                        let (xb, zb) = letter_xz(code % 4);
                        outs.push(NoiseOutcome {
                            prob,
                            paulis: vec![(pair[0], xa, za), (pair[1], xb, zb)],
                            flip: false,
                        });
                    }
                    push_event(&mut events, &mut steps, outs);
                }
            }
            OpKind::CorrelatedError => {
                let p = inst.args[0];
                let paulis: Vec<(usize, bool, bool)> = inst
                    .targets
                    .iter()
                    .filter_map(|t| match *t {
                        Target::Pauli(p, q) => Some((q as usize, p != Pauli::Z, p != Pauli::X)),
                        _ => None,
                    })
                    .collect();
                let outs: Vec<NoiseOutcome> = [(1.0 - p, Vec::new()), (p, paulis)]
                    .into_iter()
                    .filter(|t| t.0 > 0.0)
                    .map(|(prob, paulis)| NoiseOutcome {
                        prob,
                        paulis,
                        flip: false,
                    })
                    .collect();
                push_event(&mut events, &mut steps, outs);
            }
            OpKind::Detector | OpKind::ObservableInclude | OpKind::Tick | OpKind::QubitCoords => {}
        }
    }
    Program {
        steps,
        events,
        num_qubits: c.num_qubits,
    }
}

fn push_event(events: &mut Vec<Vec<NoiseOutcome>>, steps: &mut Vec<Step>, outs: Vec<NoiseOutcome>) {
    events.push(outs);
    steps.push(Step::Noise(events.len() - 1));
}

fn apply_1q(state: &mut [Complex64], q: usize, m: &Matrix2) {
    let bit = 1usize << q;
    for i in 0..state.len() {
        if i & bit == 0 {
            let (a, b) = (state[i], state[i | bit]);
            state[i] = m[0][0] * a + m[0][1] * b;
            state[i | bit] = m[1][0] * a + m[1][1] * b;
        }
    }
}

fn apply_pauli(state: &mut [Complex64], q: usize, x: bool, z: bool) {
    let bit = 1usize << q;
    if z {
        for (i, a) in state.iter_mut().enumerate() {
            if i & bit != 0 {
                *a = -*a;
            }
        }
    }
    if x {
        for i in 0..state.len() {
            if i & bit == 0 {
                state.swap(i, i | bit);
            }
        }
    }
}

fn pauli_image(state: &[Complex64], product: &[(Pauli, usize)]) -> Vec<Complex64> {
    let mut out = state.to_vec();
    for &(p, q) in product {
        match p {
            Pauli::X => apply_pauli(&mut out, q, true, false),
            Pauli::Z => apply_pauli(&mut out, q, false, true),
            Pauli::Y => {
                // Y = i X Z
                apply_pauli(&mut out, q, true, true);
                for a in &mut out {
                    *a *= Complex64::i();
                }
            }
        }
    }
    out
}

/// Projects onto the ±1 eigenspaces of a Pauli product; returns (prob, state) per outcome.
fn project(state: &[Complex64], product: &[(Pauli, usize)]) -> [(f64, Vec<Complex64>); 2] {
    let image = pauli_image(state, product);
    let plus: Vec<Complex64> = state.iter().zip(&image).map(|(a, b)| (a + b) * 0.5).collect();
    let minus: Vec<Complex64> = state.iter().zip(&image).map(|(a, b)| (a - b) * 0.5).collect();
    let norm = |v: &[Complex64]| v.iter().map(Complex64::norm_sqr).sum::<f64>();
    let (p0, p1) = (norm(&plus), norm(&minus));
    [(p0, plus), (p1, minus)]
}

fn normalize(v: &mut [Complex64], p: f64) {
    let s = 1.0 / p.sqrt();
    for a in v {
        *a *= s;
    }
}

const BRANCH_EPS: f64 = 1e-15;

struct Walker<'a> {
    program: &'a Program,
    choice: &'a [usize],
    sink: &'a mut dyn FnMut(&[bool], f64),
}

impl Walker<'_> {
    fn run(&mut self, from: usize, mut state: Vec<Complex64>, records: &mut Vec<bool>, weight: f64) {
        for (offset, step) in self.program.steps[from..].iter().enumerate() {
            match step {
                Step::Unitary(q, m) => apply_1q(&mut state, *q, m),
                Step::Cnot(a, b) => {
                    let (ba, bb) = (1usize << a, 1usize << b);
                    for i in 0..state.len() {
                        if i & ba != 0 && i & bb == 0 {
                            state.swap(i, i | bb);
                        }
                    }
                }
                Step::Cz(a, b) => {
                    let mask = (1usize << a) | (1usize << b);
                    for (i, amp) in state.iter_mut().enumerate() {
                        if i & mask == mask {
                            *amp = -*amp;
                        }
                    }
                }
                Step::Swap(a, b) => {
                    let (ba, bb) = (1usize << a, 1usize << b);
                    for i in 0..state.len() {
                        if i & ba != 0 && i & bb == 0 {
                            state.swap(i, (i & !ba) | bb);
                        }
                    }
                }
                Step::Controlled { record, qubit, x } => {
                    if records[*record] {
                        apply_pauli(&mut state, *qubit, *x, !*x);
                    }
                }
                Step::Noise(e) => {
                    let out = &self.program.events[*e][self.choice[*e]];
                    for &(q, x, z) in &out.paulis {
                        apply_pauli(&mut state, q, x, z);
                    }
                }
                Step::Reset { qubit, x_basis } => {
                    let mut live: Vec<(usize, Vec<Complex64>, f64)> = project(&state, &[(Pauli::Z, *qubit)])
                        .into_iter()
                        .enumerate()
                        .filter(|(_, b)| b.0 > BRANCH_EPS)
                        .map(|(outcome, (p, mut v))| {
                            normalize(&mut v, p);
                            if outcome == 1 {
                                apply_pauli(&mut v, *qubit, true, false);
                            }
                            if *x_basis {
                                apply_1q(&mut v, *qubit, &gate_matrix(OpKind::H, &[]));
                            }
                            (outcome, v, p)
                        })
                        .collect();
                    if live.len() == 1 {
                        state = live.pop().expect("one branch").1;
                        continue;
                    }
                    // The discarded outcome keeps the two branches distinguishable.
                    for (_, v, p) in live {
                        self.run(from + offset + 1, v, records, weight * p);
                    }
                    return;
                }
                Step::Measure { product, flip } => {
                    let flipped = flip.is_some_and(|e| self.program.events[e][self.choice[e]].flip);
                    let branches = project(&state, product);
                    for (outcome, (p, mut v)) in branches.into_iter().enumerate() {
                        if p <= BRANCH_EPS {
                            continue;
                        }
                        normalize(&mut v, p);
                        records.push((outcome == 1) ^ flipped);
                        self.run(from + offset + 1, v, records, weight * p);
                        records.pop();
                    }
                    return;
                }
            }
        }
        (self.sink)(records, weight);
    }
}

fn outputs_of(c: &Circuit, mode: SampleMode, records: &[bool]) -> usize {
    match mode {
        SampleMode::Measurements => records
            .iter()
            .enumerate()
            .fold(0, |a, (i, &b)| a | (usize::from(b) << i)),
        SampleMode::Detectors => {
            let sets = c
                .detectors
                .iter()
                .map(|d| &d.records)
                .chain(c.observables.iter().map(|o| &o.records));
            sets.enumerate().fold(0, |a, (i, recs)| {
                let bit = recs.iter().fold(false, |x, &r| x ^ records[r]);
                a | (usize::from(bit) << i)
            })
        }
    }
}

fn output_count(c: &Circuit, mode: SampleMode) -> usize {
    match mode {
        SampleMode::Measurements => c.num_measurements,
        SampleMode::Detectors => c.detectors.len() + c.observables.len(),
    }
}

/// Kahan-compensated accumulator over a dense vector.
struct KahanVec {
    sum: Vec<f64>,
    comp: Vec<f64>,
}

impl KahanVec {
    fn new(n: usize) -> Self {
        Self {
            sum: vec![0.0; n],
            comp: vec![0.0; n],
        }
    }

    fn add(&mut self, i: usize, x: f64) {
        let y = x - self.comp[i];
        let t = self.sum[i] + y;
        self.comp[i] = (t - self.sum[i]) - y;
        self.sum[i] = t;
    }
}

const PATTERN_CHUNK: usize = 64;

/// Exact output distribution by noise-pattern enumeration and measurement branching.
///
/// # Errors
/// Size guards on qubits, measurements, outputs and noise entropy.
pub fn oracle_distribution(c: &Circuit, mode: SampleMode) -> Result<OutcomeDistribution, OracleError> {
    if c.num_qubits > MAX_QUBITS {
        return Err(OracleError::TooManyQubits(c.num_qubits));
    }
    if c.num_measurements > MAX_MEASUREMENTS {
        return Err(OracleError::TooManyMeasurements(c.num_measurements));
    }
    let n_out = output_count(c, mode);
    if n_out > MAX_OUTPUTS {
        return Err(OracleError::TooManyOutputs(n_out));
    }
    let program = compile_program(c);
    let entropy: f64 = program.events.iter().map(|e| (e.len() as f64).log2()).sum();
    if entropy > MAX_NOISE_BITS + 1e-9 {
        return Err(OracleError::TooMuchNoise(entropy));
    }
    let radices: Vec<usize> = program.events.iter().map(Vec::len).collect();
    let total: usize = radices.iter().product();
    let chunks = total.div_ceil(PATTERN_CHUNK);
    let partials: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = KahanVec::new(1 << n_out);
            let lo = chunk * PATTERN_CHUNK;
            let hi = (lo + PATTERN_CHUNK).min(total);
            let mut choice = vec![0usize; radices.len()];
            for pattern in lo..hi {
                let mut rest = pattern;
                let mut w = 1.0;
                for (e, &r) in radices.iter().enumerate() {
                    choice[e] = rest % r;
                    rest /= r;
                    w *= program.events[e][choice[e]].prob;
                }
                if w == 0.0 {
                    continue;
                }
                let mut state = vec![Complex64::new(0.0, 0.0); 1 << program.num_qubits];
                state[0] = Complex64::new(1.0, 0.0);
                let mut sink = |records: &[bool], p: f64| acc.add(outputs_of(c, mode, records), w * p);
                let mut walker = Walker {
                    program: &program,
                    choice: &choice,
                    sink: &mut sink,
                };
                walker.run(0, state, &mut Vec::new(), 1.0);
            }
            acc.sum
        })
        .collect();
    let mut total_acc = KahanVec::new(1 << n_out);
    for part in partials {
        for (i, x) in part.into_iter().enumerate() {
            if x != 0.0 {
                total_acc.add(i, x);
            }
        }
    }
    Ok(OutcomeDistribution {
        num_outputs: n_out,
        probs: total_acc.sum,
    })
}

type Density = Vec<Complex64>;

fn density_apply_1q(rho: &mut Density, n: usize, q: usize, m: &Matrix2) {
    let dim = 1usize << n;
    for col in 0..dim {
        let mut v: Vec<Complex64> = (0..dim).map(|r| rho[r * dim + col]).collect();
        apply_1q(&mut v, q, m);
        for r in 0..dim {
            rho[r * dim + col] = v[r];
        }
    }
    let mc = [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]];
    for r in 0..dim {
        apply_1q(&mut rho[r * dim..(r + 1) * dim], q, &mc);
    }
}

fn density_map(rho: &Density, n: usize, f: &dyn Fn(&mut [Complex64])) -> Density {
    let dim = 1usize << n;
    let mut out = rho.clone();
    for col in 0..dim {
        let mut v: Vec<Complex64> = (0..dim).map(|r| out[r * dim + col]).collect();
        f(&mut v);
        for r in 0..dim {
            out[r * dim + col] = v[r];
        }
    }
    for r in 0..dim {
        let mut row: Vec<Complex64> = out[r * dim..(r + 1) * dim].iter().map(|a| a.conj()).collect();
        f(&mut row);
        for (dst, s) in out[r * dim..(r + 1) * dim].iter_mut().zip(row) {
            *dst = s.conj();
        }
    }
    out
}

fn density_trace(rho: &Density, n: usize) -> f64 {
    let dim = 1usize << n;
    (0..dim).map(|i| rho[i * dim + i].re).sum()
}

/// Density-matrix cross-check: classical records branch, noise is applied as a mixture.
///
/// # Errors
/// More than [`MAX_DENSITY_QUBITS`] qubits, or the guards of [`oracle_distribution`].
pub fn oracle_distribution_density(c: &Circuit, mode: SampleMode) -> Result<OutcomeDistribution, OracleError> {
    let n = c.num_qubits;
    if n > MAX_DENSITY_QUBITS {
        return Err(OracleError::DensityTooLarge);
    }
    if c.num_measurements > MAX_MEASUREMENTS {
        return Err(OracleError::TooManyMeasurements(c.num_measurements));
    }
    let n_out = output_count(c, mode);
    if n_out > MAX_OUTPUTS {
        return Err(OracleError::TooManyOutputs(n_out));
    }
    let program = compile_program(c);
    let dim = 1usize << n;
    let mut rho0 = vec![Complex64::new(0.0, 0.0); dim * dim];
    rho0[0] = Complex64::new(1.0, 0.0);
    // Unnormalized density matrix per measurement-record history.
    let mut branches: Vec<(Vec<bool>, Density)> = vec![(Vec::new(), rho0)];
    for step in &program.steps {
        let mut next: Vec<(Vec<bool>, Density)> = Vec::with_capacity(branches.len());
        for (recs, rho) in branches {
            match step {
                Step::Unitary(q, m) => {
                    let mut r = rho;
                    density_apply_1q(&mut r, n, *q, m);
                    next.push((recs, r));
                }
                Step::Cnot(a, b) => {
                    let (a, b) = (*a, *b);
                    let r = density_map(&rho, n, &|v| {
                        for i in 0..v.len() {
                            if i >> a & 1 == 1 && i >> b & 1 == 0 {
                                v.swap(i, i | 1 << b);
                            }
                        }
                    });
                    next.push((recs, r));
                }
                Step::Cz(a, b) => {
                    let mask = (1usize << a) | (1usize << b);
                    let r = density_map(&rho, n, &|v| {
                        for (i, x) in v.iter_mut().enumerate() {
                            if i & mask == mask {
                                *x = -*x;
                            }
                        }
                    });
                    next.push((recs, r));
                }
                Step::Swap(a, b) => {
                    let (a, b) = (*a, *b);
                    let r = density_map(&rho, n, &|v| {
                        for i in 0..v.len() {
                            if i >> a & 1 == 1 && i >> b & 1 == 0 {
                                v.swap(i, (i & !(1 << a)) | 1 << b);
                            }
                        }
                    });
                    next.push((recs, r));
                }
                Step::Controlled { record, qubit, x } => {
                    let r = if recs[*record] {
                        let (q, x) = (*qubit, *x);
                        density_map(&rho, n, &|v| apply_pauli(v, q, x, !x))
                    } else {
                        rho
                    };
                    next.push((recs, r));
                }
                Step::Noise(e) => {
                    let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
                    for out in &program.events[*e] {
                        let paulis = out.paulis.clone();
                        let r = density_map(&rho, n, &|v| {
                            for &(q, x, z) in &paulis {
                                apply_pauli(v, q, x, z);
                            }
                        });
                        for (a, b) in acc.iter_mut().zip(r) {
                            *a += b * out.prob;
                        }
                    }
                    next.push((recs, acc));
                }
                Step::Reset { qubit, x_basis } => {
                    let q = *qubit;
                    let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
                    for outcome in [false, true] {
                        let r = density_map(&rho, n, &|v| {
                            for (i, a) in v.iter_mut().enumerate() {
                                if (i >> q & 1 == 1) != outcome {
                                    *a = Complex64::new(0.0, 0.0);
                                }
                            }
                            if outcome {
                                apply_pauli(v, q, true, false);
                            }
                        });
                        for (a, b) in acc.iter_mut().zip(r) {
                            *a += b;
                        }
                    }
                    if *x_basis {
                        density_apply_1q(&mut acc, n, q, &gate_matrix(OpKind::H, &[]));
                    }
                    next.push((recs, acc));
                }
                Step::Measure { product, flip } => {
                    let flips: Vec<(f64, bool)> = match flip {
                        Some(e) => program.events[*e].iter().map(|o| (o.prob, o.flip)).collect(),
                        None => vec![(1.0, false)],
                    };
                    for (sign, outcome) in [(1.0, false), (-1.0, true)] {
                        let prod = product.clone();
                        let r = density_map(&rho, n, &|v| {
                            let image = pauli_image(v, &prod);
                            for (a, b) in v.iter_mut().zip(image) {
                                *a = (*a + b * sign) * 0.5;
                            }
                        });
                        if density_trace(&r, n) <= BRANCH_EPS {
                            continue;
                        }
                        for &(p, f) in &flips {
                            let mut rec = recs.clone();
                            rec.push(outcome ^ f);
                            next.push((rec, r.iter().map(|a| a * p).collect()));
                        }
                    }
                }
            }
        }
        branches = next;
    }
    let mut probs = vec![0.0; 1 << n_out];
    for (recs, rho) in branches {
        probs[outputs_of(c, mode, &recs)] += density_trace(&rho, n);
    }
    Ok(OutcomeDistribution {
        num_outputs: n_out,
        probs,
    })
}

/// Scalar of a closed diagram, contracted in decreasing vertex order.
///
/// # Errors
/// The diagram has boundaries, or the contraction exceeds the leg guard.
pub fn oracle_zx_value(d: &ParamZXDiagram, assignment: &[bool]) -> Result<Complex64, OracleError> {
    if !d.inputs().is_empty() || !d.outputs().is_empty() {
        return Err(OracleError::OpenDiagram);
    }
    let t = contract(d, assignment, ContractionOrder::Reverse)?;
    Ok(t.data[0])
}

/// Dense tensor of an open diagram, contracted in decreasing vertex order.
///
/// # Errors
/// The contraction exceeds the leg guard.
pub fn oracle_zx_tensor(d: &ParamZXDiagram, assignment: &[bool]) -> Result<crate::zx::Tensor, OracleError> {
    Ok(contract(d, assignment, ContractionOrder::Reverse)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    fn dist(text: &str, mode: SampleMode) -> OutcomeDistribution {
        oracle_distribution(&parse_circuit(text).unwrap(), mode).unwrap()
    }

    #[test]
    fn hadamard_measure() {
        let d = dist("H 0\nM 0", SampleMode::Measurements);
        assert!((d.probs[0] - 0.5).abs() < 1e-15 && (d.probs[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn flip_detector() {
        let d = dist("X_ERROR(0.1) 0\nM 0\nDETECTOR rec[-1]", SampleMode::Detectors);
        assert!((d.probs[1] - 0.1).abs() < 1e-15);
        assert!((d.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_support() {
        let d = dist(
            "R 0 1\nCNOT 0 1\nM 0 1\nDETECTOR rec[-1] rec[-2]",
            SampleMode::Detectors,
        );
        assert_eq!(d.probs, vec![1.0, 0.0]);
    }

    #[test]
    fn density_agrees() {
        let text = "H 0\nT 0\nCNOT 0 1\nDEPOLARIZE2(0.1) 0 1\nMR(0.05) 1\nCZ rec[-1] 0\nMX 0\nR_Y(0.3) 1\nM 1";
        let c = parse_circuit(text).unwrap();
        let a = oracle_distribution(&c, SampleMode::Measurements).unwrap();
        let b = oracle_distribution_density(&c, SampleMode::Measurements).unwrap();
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert!((x - y).abs() < 1e-12, "{a:?} {b:?}");
        }
    }

    #[test]
    fn closed_diagram_value() {
        let mut d = ParamZXDiagram::new(0);
        d.scalar.constant = Complex64::new(3.0, 0.0);
        assert_eq!(oracle_zx_value(&d, &[]).unwrap(), Complex64::new(3.0, 0.0));
    }
}
