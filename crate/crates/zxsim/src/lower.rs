//! Circuit to doubled parameterized ZX diagram.
//!
//! Quantum wires are doubled; measurement records, detectors and observables
//! live on classical wires. Every scalar is chosen so that contracting the
//! lowered diagram at a noise assignment gives the exact outcome probability.

use crate::circuit::{Circuit, Instruction, OpKind, Pauli, Target};
use crate::zx::{Angle, Color, EdgeKind, Layer, ParamZXDiagram, Parity, Phase};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum SampleMode {
    Detectors,
    Measurements,
}

/// Independent noise source: its own parameters and a joint table over them.
#[derive(Clone, PartialEq, Debug)]
pub struct ChannelGroup {
    pub param_indices: Vec<usize>,
    /// Probability per bit pattern; bit `j` of the index is parameter `j`.
    pub table: Vec<f64>,
}

impl ChannelGroup {
    #[must_use]
    pub fn width(&self) -> usize {
        self.param_indices.len()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OutputLabel {
    Detector(usize),
    Observable(usize),
    Measurement(usize),
}

#[derive(Clone, Debug)]
pub struct LoweredProgram {
    pub diagram: ParamZXDiagram,
    pub channels: Vec<ChannelGroup>,
    pub e_param_count: usize,
    pub mode: SampleMode,
    pub outputs: Vec<OutputLabel>,
    pub num_detectors: usize,
    pub num_observables: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LowerError {
    #[error("{0} cannot be lowered")]
    Unsupported(String),
    #[error("channel probabilities sum to {0} > 1")]
    ProbabilitySum(f64),
    #[error("{kind} expects {expected} arguments, got {got}")]
    Arity { kind: String, expected: usize, got: usize },
}

fn pauli_bits(letter: usize) -> (usize, usize) {
    // I, X, Y, Z as (x, z)
    [(0, 0), (1, 0), (1, 1), (0, 1)][letter]
}

/// Probability table of a noise instruction, indexed little-endian by its bits.
///
/// One-qubit Pauli channels use bits `(x, z)`; two-qubit channels use
/// `(x_a, z_a, x_b, z_b)`.
///
/// # Errors
/// Wrong argument count, or probabilities summing past 1.
pub fn channel_table(kind: OpKind, args: &[f64]) -> Result<Vec<f64>, LowerError> {
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(LowerError::Arity {
                kind: kind.name().into(),
                expected: n,
                got: args.len(),
            })
        }
    };
    let finish = |mut table: Vec<f64>| {
        let rest: f64 = table[1..].iter().sum();
        if rest > 1.0 + 1e-12 {
            return Err(LowerError::ProbabilitySum(rest));
        }
        table[0] = (1.0 - rest).max(0.0);
        Ok(table)
    };
    match kind {
        OpKind::XError
        | OpKind::YError
        | OpKind::ZError
        | OpKind::CorrelatedError
        | OpKind::MeasureZ
        | OpKind::MeasureX
        | OpKind::MeasureReset
        | OpKind::Mpp => {
            arity(1)?;
            finish(vec![0.0, args[0]])
        }
        OpKind::Depolarize1 => {
            arity(1)?;
            let q = args[0] / 3.0;
            finish(vec![0.0, q, q, q])
        }
        OpKind::PauliChannel1 => {
            arity(3)?;
            finish(vec![0.0, args[0], args[2], args[1]])
        }
        OpKind::Depolarize2 => {
            arity(1)?;
            let q = args[0] / 15.0;
            let mut t = vec![q; 16];
            t[0] = 0.0;
            finish(t)
        }
        OpKind::PauliChannel2 => {
            arity(15)?;
            let mut t = vec![0.0; 16];
            for (k, &p) in args.iter().enumerate() {
                let code = k + 1;
                let (xa, za) = pauli_bits(code / 4);
                let (xb, zb) = pauli_bits(code % 4);
                t[xa | za << 1 | xb << 2 | zb << 3] = p;
            }
            finish(t)
        }
        other => Err(LowerError::Unsupported(other.name().into())),
    }
}

struct Wire {
    last: usize,
    pending: EdgeKind,
}

struct Lowerer {
    d: ParamZXDiagram,
    wires: Vec<Option<Wire>>,
    channels: Vec<ChannelGroup>,
    next_param: usize,
    records: Vec<usize>,
    referenced: Vec<bool>,
}

impl Lowerer {
    fn new_params(&mut self, n: usize, table: Vec<f64>) -> Vec<usize> {
        let ids: Vec<usize> = (self.next_param..self.next_param + n).collect();
        self.next_param += n;
        self.channels.push(ChannelGroup {
            param_indices: ids.clone(),
            table,
        });
        ids
    }

    fn prep(&mut self, q: usize, color: Color) {
        let v = self.d.add_spider(color, Layer::Quantum, Phase::zero());
        self.d.scalar.scale_real(0.5);
        self.wires[q] = Some(Wire {
            last: v,
            pending: EdgeKind::Plain,
        });
    }

    fn ensure(&mut self, q: usize) {
        if self.wires[q].is_none() {
            self.prep(q, Color::X);
        }
    }

    /// Appends `v` to wire `q`.
    fn attach(&mut self, q: usize, v: usize) {
        self.ensure(q);
        let w = self.wires[q].as_mut().expect("wire exists");
        let (last, kind) = (w.last, w.pending);
        w.last = v;
        w.pending = EdgeKind::Plain;
        self.d.add_edge(last, v, kind);
    }

    fn spider(&mut self, q: usize, color: Color, phase: Phase) -> usize {
        let v = self.d.add_spider(color, Layer::Quantum, phase);
        self.attach(q, v);
        v
    }

    fn rotate(&mut self, q: usize, color: Color, angle: Angle) {
        self.spider(q, color, Phase::constant(angle));
    }

    fn hadamard(&mut self, q: usize) {
        self.ensure(q);
        let w = self.wires[q].as_mut().expect("wire exists");
        w.pending = w.pending.toggled();
    }

    fn cnot(&mut self, c: usize, t: usize) {
        let a = self.spider(c, Color::Z, Phase::zero());
        let b = self.spider(t, Color::X, Phase::zero());
        self.d.add_edge(a, b, EdgeKind::Plain);
        self.d.scalar.scale_real(2.0);
    }

    fn cz(&mut self, a: usize, b: usize) {
        let u = self.spider(a, Color::Z, Phase::zero());
        let v = self.spider(b, Color::Z, Phase::zero());
        self.d.add_edge(u, v, EdgeKind::Hadamard);
        self.d.scalar.scale_real(2.0);
    }

    fn last_is_classical(&self, q: usize) -> bool {
        self.wires[q]
            .as_ref()
            .is_some_and(|w| self.d.vertex(w.last).layer == Layer::Classical)
    }

    /// Discards the wire. A wire ending in a measurement spider is already traced.
    fn trace(&mut self, q: usize) {
        if self.last_is_classical(q) {
            self.wires[q] = None;
        }
        if let Some(w) = self.wires[q].take() {
            let t = self.d.add_spider(Color::Z, Layer::Classical, Phase::zero());
            self.d.add_edge(w.last, t, w.pending);
        }
    }

    fn measure_z(&mut self, q: usize, flip: Option<f64>) {
        if self.last_is_classical(q) {
            // Two classical spiders cannot share a doubled wire directly.
            self.spider(q, Color::Z, Phase::zero());
        }
        let m = self.d.add_spider(Color::Z, Layer::Classical, Phase::zero());
        self.attach(q, m);
        let index = self.records.len();
        let mut record = m;
        if let Some(p) = flip.filter(|_| self.referenced[index]) {
            let e = self.new_params(1, vec![1.0 - p, p])[0];
            let x = self
                .d
                .add_spider(Color::X, Layer::Classical, Phase::from_parity(Parity::single(e)));
            let r = self.d.add_spider(Color::Z, Layer::Classical, Phase::zero());
            self.d.add_edge(m, x, EdgeKind::Plain);
            self.d.add_edge(x, r, EdgeKind::Plain);
            record = r;
        }
        self.records.push(record);
    }

    fn controlled_pauli(&mut self, rec: usize, q: usize, color: Color) {
        let c = self.d.add_spider(Color::Z, Layer::Classical, Phase::zero());
        self.d.add_edge(self.records[rec], c, EdgeKind::Plain);
        let v = self.spider(q, color, Phase::zero());
        let kind = if color == Color::X {
            EdgeKind::Plain
        } else {
            EdgeKind::Hadamard
        };
        self.d.add_edge(c, v, kind);
        self.d.scalar.scale_real(2.0);
    }

    fn pauli_noise(&mut self, q: usize, x: Option<usize>, z: Option<usize>) {
        if let Some(e) = x {
            self.spider(q, Color::X, Phase::from_parity(Parity::single(e)));
        }
        if let Some(e) = z {
            self.spider(q, Color::Z, Phase::from_parity(Parity::single(e)));
        }
    }

    fn mpp(&mut self, product: &[(Pauli, u32)], flip: Option<f64>) {
        let qs: Vec<usize> = product.iter().map(|&(_, q)| q as usize).collect();
        for &(p, q) in product {
            let q = q as usize;
            match p {
                Pauli::X => self.hadamard(q),
                Pauli::Y => {
                    self.rotate(q, Color::Z, Angle::quarter_turns(-2));
                    self.hadamard(q);
                }
                Pauli::Z => {}
            }
        }
        for &q in &qs[1..] {
            self.cnot(q, qs[0]);
        }
        self.measure_z(qs[0], flip);
        for &q in qs[1..].iter().rev() {
            self.cnot(q, qs[0]);
        }
        for &(p, q) in product {
            let q = q as usize;
            match p {
                Pauli::X => self.hadamard(q),
                Pauli::Y => {
                    self.hadamard(q);
                    self.rotate(q, Color::Z, Angle::quarter_turns(2));
                }
                Pauli::Z => {}
            }
        }
    }

    fn xor_output(&mut self, records: &[usize]) -> usize {
        let x = self.d.add_spider(Color::X, Layer::Classical, Phase::zero());
        for &r in records {
            self.d.add_edge(self.records[r], x, EdgeKind::Plain);
        }
        let o = self.d.add_boundary(Layer::Classical);
        self.d.add_edge(x, o, EdgeKind::Plain);
        let legs = i32::try_from(records.len() + 1).expect("small");
        self.d.scalar.scale_sqrt2(legs - 2);
        o
    }

    fn instruction(&mut self, inst: &Instruction) -> Result<(), LowerError> {
        use OpKind::*;
        let qubits: Vec<usize> = inst.qubits().map(|q| q as usize).collect();
        let flip = inst.args.first().copied().filter(|&p| p > 0.0);
        match inst.kind {
            H => qubits.iter().for_each(|&q| self.hadamard(q)),
            S => self.each_rotation(&qubits, Color::Z, Angle::quarter_turns(2)),
            SDag => self.each_rotation(&qubits, Color::Z, Angle::quarter_turns(-2)),
            X => self.each_rotation(&qubits, Color::X, Angle::PI),
            Z => self.each_rotation(&qubits, Color::Z, Angle::PI),
            Y => {
                for &q in &qubits {
                    self.rotate(q, Color::X, Angle::PI);
                    self.rotate(q, Color::Z, Angle::PI);
                }
            }
            SqrtX => self.each_rotation(&qubits, Color::X, Angle::quarter_turns(2)),
            SqrtXDag => self.each_rotation(&qubits, Color::X, Angle::quarter_turns(-2)),
            T => self.each_rotation(&qubits, Color::Z, Angle::quarter_turns(1)),
            TDag => self.each_rotation(&qubits, Color::Z, Angle::quarter_turns(-1)),
            RotZ => self.each_rotation(&qubits, Color::Z, Angle::from_pi_units(inst.args[0])),
            RotX => self.each_rotation(&qubits, Color::X, Angle::from_pi_units(inst.args[0])),
            RotY => {
                let a = Angle::from_pi_units(inst.args[0]);
                for &q in &qubits {
                    self.rotate(q, Color::Z, Angle::quarter_turns(-2));
                    self.rotate(q, Color::X, a);
                    self.rotate(q, Color::Z, Angle::quarter_turns(2));
                }
            }
            U3 => {
                let (theta, phi, lambda) = (inst.args[0], inst.args[1], inst.args[2]);
                for &q in &qubits {
                    self.rotate(q, Color::Z, Angle::from_pi_units(lambda - 0.5));
                    self.rotate(q, Color::X, Angle::from_pi_units(theta));
                    self.rotate(q, Color::Z, Angle::from_pi_units(phi + 0.5));
                }
            }
            Cnot | Cz => {
                for pair in inst.targets.chunks(2) {
                    let base = self.records.len();
                    match (pair[0], pair[1]) {
                        (Target::Qubit(a), Target::Qubit(b)) => {
                            if inst.kind == Cnot {
                                self.cnot(a as usize, b as usize);
                            } else {
                                self.cz(a as usize, b as usize);
                            }
                        }
                        (Target::Rec(k), Target::Qubit(q)) | (Target::Qubit(q), Target::Rec(k)) => {
                            let color = if inst.kind == Cnot { Color::X } else { Color::Z };
                            self.controlled_pauli(base - k as usize, q as usize, color);
                        }
                        _ => return Err(LowerError::Unsupported(inst.to_string())),
                    }
                }
            }
            Swap => {
                for pair in qubits.chunks(2) {
                    self.wires.swap(pair[0], pair[1]);
                }
            }
            ResetZ | ResetX => {
                let color = if inst.kind == ResetZ { Color::X } else { Color::Z };
                for &q in &qubits {
                    self.trace(q);
                    self.prep(q, color);
                }
            }
            MeasureZ => qubits.iter().for_each(|&q| self.measure_z(q, flip)),
            MeasureX => {
                for &q in &qubits {
                    self.hadamard(q);
                    self.measure_z(q, flip);
                    self.hadamard(q);
                }
            }
            MeasureReset => {
                for &q in &qubits {
                    self.measure_z(q, flip);
                    self.trace(q);
                    self.prep(q, Color::X);
                }
            }
            Mpp => {
                for product in inst.pauli_products() {
                    self.mpp(&product, flip);
                }
            }
            XError | YError | ZError => {
                let p = inst.args[0];
                for &q in &qubits {
                    let e = self.new_params(1, channel_table(inst.kind, &[p])?)[0];
                    let x = (inst.kind != ZError).then_some(e);
                    let z = (inst.kind != XError).then_some(e);
                    self.pauli_noise(q, x, z);
                }
            }
            Depolarize1 | PauliChannel1 => {
                let table = channel_table(inst.kind, &inst.args)?;
                for &q in &qubits {
                    let e = self.new_params(2, table.clone());
                    self.pauli_noise(q, Some(e[0]), Some(e[1]));
                }
            }
            Depolarize2 | PauliChannel2 => {
                let table = channel_table(inst.kind, &inst.args)?;
                for pair in qubits.chunks(2) {
                    let e = self.new_params(4, table.clone());
                    self.pauli_noise(pair[0], Some(e[0]), Some(e[1]));
                    self.pauli_noise(pair[1], Some(e[2]), Some(e[3]));
                }
            }
            CorrelatedError => {
                let e = self.new_params(1, channel_table(inst.kind, &inst.args)?)[0];
                for t in &inst.targets {
                    if let Target::Pauli(p, q) = *t {
                        let x = (p != Pauli::Z).then_some(e);
                        let z = (p != Pauli::X).then_some(e);
                        self.pauli_noise(q as usize, x, z);
                    }
                }
            }
            Detector | ObservableInclude | Tick | QubitCoords => {}
        }
        Ok(())
    }

    fn each_rotation(&mut self, qubits: &[usize], color: Color, angle: Angle) {
        for &q in qubits {
            self.rotate(q, color, angle);
        }
    }
}

/// Lowers a normalized circuit.
///
/// In detector mode the outputs are the detectors then the observables, in
/// declaration order. In measurement mode every measurement is an output.
///
/// # Errors
/// Instructions that cannot be lowered, which the parser already rejects.
pub fn lower(c: &Circuit, mode: SampleMode) -> Result<LoweredProgram, LowerError> {
    let mut referenced = vec![mode == SampleMode::Measurements; c.num_measurements];
    if mode == SampleMode::Detectors {
        for r in c
            .detectors
            .iter()
            .flat_map(|d| &d.records)
            .chain(c.observables.iter().flat_map(|o| &o.records))
        {
            referenced[*r] = true;
        }
    }
    let mut seen = 0usize;
    for inst in &c.instructions {
        for t in &inst.targets {
            if let Target::Rec(k) = *t {
                if matches!(inst.kind, OpKind::Cnot | OpKind::Cz) {
                    referenced[seen - k as usize] = true;
                }
            }
        }
        seen += inst.measurement_count();
    }

    let mut lw = Lowerer {
        d: ParamZXDiagram::new(0),
        wires: (0..c.num_qubits).map(|_| None).collect(),
        channels: Vec::new(),
        next_param: 0,
        records: Vec::with_capacity(c.num_measurements),
        referenced,
    };
    for inst in &c.instructions {
        lw.instruction(inst)?;
    }
    for q in 0..c.num_qubits {
        lw.trace(q);
    }

    let mut outputs = Vec::new();
    let mut boundary = Vec::new();
    match mode {
        SampleMode::Detectors => {
            for (i, det) in c.detectors.iter().enumerate() {
                boundary.push(lw.xor_output(&det.records));
                outputs.push(OutputLabel::Detector(i));
            }
            for (i, obs) in c.observables.iter().enumerate() {
                boundary.push(lw.xor_output(&obs.records));
                outputs.push(OutputLabel::Observable(i));
            }
        }
        SampleMode::Measurements => {
            for i in 0..c.num_measurements {
                let o = lw.d.add_boundary(Layer::Classical);
                lw.d.add_edge(lw.records[i], o, EdgeKind::Plain);
                boundary.push(o);
                outputs.push(OutputLabel::Measurement(i));
            }
        }
    }
    lw.d.set_outputs(boundary);
    lw.d.set_num_params(lw.next_param);
    let (num_detectors, num_observables) = match mode {
        SampleMode::Detectors => (c.detectors.len(), c.observables.len()),
        SampleMode::Measurements => (0, 0),
    };
    Ok(LoweredProgram {
        diagram: lw.d,
        channels: lw.channels,
        e_param_count: lw.next_param,
        mode,
        outputs,
        num_detectors,
        num_observables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;
    use crate::zx::to_tensor;

    fn lowered(text: &str, mode: SampleMode) -> LoweredProgram {
        lower(&parse_circuit(text).unwrap(), mode).unwrap()
    }

    /// Noise-averaged output distribution by brute force over the channel tables.
    fn distribution(p: &LoweredProgram) -> Vec<f64> {
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
            let t = to_tensor(&p.diagram, &bits).unwrap();
            for (a, v) in acc.iter_mut().zip(&t.data) {
                assert!(v.im.abs() < 1e-12);
                *a += weight * v.re;
            }
        }
        acc
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn x_error_vertex_and_table() {
        let p = lowered("X_ERROR(0.1) 0", SampleMode::Detectors);
        assert_eq!(p.channels.len(), 1);
        assert!(close(&p.channels[0].table, &[0.9, 0.1]));
        let flagged: Vec<_> = p
            .diagram
            .vertex_ids()
            .filter(|&v| !p.diagram.phase(v).parity.is_empty())
            .collect();
        assert_eq!(flagged.len(), 1);
        assert_eq!(p.diagram.vertex(flagged[0]).color(), Some(Color::X));
    }

    #[test]
    fn channel_tables() {
        assert!(close(&channel_table(OpKind::XError, &[0.25]).unwrap(), &[0.75, 0.25]));
        let d1 = channel_table(OpKind::Depolarize1, &[0.3]).unwrap();
        assert!(close(&d1, &[0.7, 0.1, 0.1, 0.1]));
        let pc = channel_table(OpKind::PauliChannel1, &[0.1, 0.1, 0.2]).unwrap();
        assert!(close(&pc, &[0.6, 0.1, 0.2, 0.1]));
        let d2 = channel_table(OpKind::Depolarize2, &[0.01]).unwrap();
        assert_eq!(d2.iter().filter(|&&x| (x - 0.01 / 15.0).abs() < 1e-15).count(), 15);
        assert!(matches!(
            channel_table(OpKind::PauliChannel1, &[0.5, 0.5, 0.5]),
            Err(LowerError::ProbabilitySum(_))
        ));
    }

    #[test]
    fn hadamard_measurement_is_uniform() {
        let p = lowered("H 0\nM 0", SampleMode::Measurements);
        assert!(close(&distribution(&p), &[0.5, 0.5]));
    }

    #[test]
    fn bell_pair() {
        let p = lowered("H 0\nCNOT 0 1\nM 0 1", SampleMode::Measurements);
        assert!(close(&distribution(&p), &[0.5, 0.0, 0.0, 0.5]));
    }

    #[test]
    fn t_gate_bias() {
        let p = lowered("H 0\nT 0\nH 0\nM 0", SampleMode::Measurements);
        let c = (std::f64::consts::PI / 8.0).cos().powi(2);
        assert!(close(&distribution(&p), &[c, 1.0 - c]));
    }

    #[test]
    fn flip_detector() {
        let p = lowered("X_ERROR(0.1) 0\nM 0\nDETECTOR rec[-1]", SampleMode::Detectors);
        assert!(close(&distribution(&p), &[0.9, 0.1]));
    }

    #[test]
    fn correlated_error_shares_one_bit() {
        let p = lowered(
            "RX 1\nE(0.2) X0 Z1\nM 0\nMX 1\nDETECTOR rec[-2]\nDETECTOR rec[-1]",
            SampleMode::Detectors,
        );
        assert_eq!(p.e_param_count, 1);
        let got = distribution(&p);
        assert!(close(&got, &[0.8, 0.0, 0.0, 0.2]), "{got:?}");
    }

    #[test]
    fn classically_controlled_x() {
        let p = lowered("H 0\nM 0\nCX rec[-1] 1\nM 1", SampleMode::Measurements);
        assert!(close(&distribution(&p), &[0.5, 0.0, 0.0, 0.5]));
    }

    #[test]
    fn mpp_parity() {
        let p = lowered("H 0\nCNOT 0 1\nMPP X0*X1 Z0*Z1", SampleMode::Measurements);
        assert!(close(&distribution(&p), &[1.0, 0.0, 0.0, 0.0]));
        let p = lowered("H 0\nCNOT 0 1\nMPP Y0*Y1", SampleMode::Measurements);
        assert!(close(&distribution(&p), &[0.0, 1.0]));
    }

    #[test]
    fn noisy_measurement_and_reset() {
        let p = lowered("X 0\nMR(0.25) 0\nM 0", SampleMode::Measurements);
        assert!(close(&distribution(&p), &[0.25, 0.75, 0.0, 0.0]));
    }
}
