//! Circuit text format: parsing, validation, normalization and printing.

use std::fmt::{self, Write as _};

use crate::zx::Angle;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum OpKind {
    H,
    S,
    SDag,
    X,
    Y,
    Z,
    SqrtX,
    SqrtXDag,
    T,
    TDag,
    RotX,
    RotY,
    RotZ,
    U3,
    Cnot,
    Cz,
    Swap,
    ResetZ,
    ResetX,
    MeasureZ,
    MeasureX,
    MeasureReset,
    Mpp,
    XError,
    YError,
    ZError,
    Depolarize1,
    Depolarize2,
    PauliChannel1,
    PauliChannel2,
    CorrelatedError,
    Detector,
    ObservableInclude,
    Tick,
    QubitCoords,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OpCategory {
    Gate,
    Measurement,
    Reset,
    Noise,
    Annotation,
}

impl OpKind {
    const TABLE: [(OpKind, &'static str); 35] = [
        (OpKind::H, "H"),
        (OpKind::S, "S"),
        (OpKind::SDag, "S_DAG"),
        (OpKind::X, "X"),
        (OpKind::Y, "Y"),
        (OpKind::Z, "Z"),
        (OpKind::SqrtX, "SQRT_X"),
        (OpKind::SqrtXDag, "SQRT_X_DAG"),
        (OpKind::T, "T"),
        (OpKind::TDag, "T_DAG"),
        (OpKind::RotX, "R_X"),
        (OpKind::RotY, "R_Y"),
        (OpKind::RotZ, "R_Z"),
        (OpKind::U3, "U3"),
        (OpKind::Cnot, "CNOT"),
        (OpKind::Cz, "CZ"),
        (OpKind::Swap, "SWAP"),
        (OpKind::ResetZ, "R"),
        (OpKind::ResetX, "RX"),
        (OpKind::MeasureZ, "M"),
        (OpKind::MeasureX, "MX"),
        (OpKind::MeasureReset, "MR"),
        (OpKind::Mpp, "MPP"),
        (OpKind::XError, "X_ERROR"),
        (OpKind::YError, "Y_ERROR"),
        (OpKind::ZError, "Z_ERROR"),
        (OpKind::Depolarize1, "DEPOLARIZE1"),
        (OpKind::Depolarize2, "DEPOLARIZE2"),
        (OpKind::PauliChannel1, "PAULI_CHANNEL_1"),
        (OpKind::PauliChannel2, "PAULI_CHANNEL_2"),
        (OpKind::CorrelatedError, "E"),
        (OpKind::Detector, "DETECTOR"),
        (OpKind::ObservableInclude, "OBSERVABLE_INCLUDE"),
        (OpKind::Tick, "TICK"),
        (OpKind::QubitCoords, "QUBIT_COORDS"),
    ];

    const ALIASES: [(&'static str, OpKind); 7] = [
        ("CX", OpKind::Cnot),
        ("ZCX", OpKind::Cnot),
        ("ZCZ", OpKind::Cz),
        ("RZ", OpKind::ResetZ),
        ("MZ", OpKind::MeasureZ),
        ("H_XZ", OpKind::H),
        ("CORRELATED_ERROR", OpKind::CorrelatedError),
    ];

    /// Canonical instruction name.
    #[must_use]
    pub fn name(self) -> &'static str {
        Self::TABLE
            .iter()
            .find(|(k, _)| *k == self)
            .map(|(_, n)| *n)
            .expect("every kind is named")
    }

    /// Looks up a name or alias, case-insensitively.
    #[must_use]
    pub fn from_name(name: &str) -> Option<OpKind> {
        let upper = name.to_ascii_uppercase();
        Self::TABLE
            .iter()
            .find(|(_, n)| *n == upper)
            .map(|(k, _)| *k)
            .or_else(|| Self::ALIASES.iter().find(|(n, _)| *n == upper).map(|(_, k)| *k))
    }

    #[must_use]
    pub fn category(self) -> OpCategory {
        use OpKind::*;
        match self {
            H | S | SDag | X | Y | Z | SqrtX | SqrtXDag | T | TDag | RotX | RotY | RotZ | U3 | Cnot | Cz | Swap => {
                OpCategory::Gate
            }
            MeasureZ | MeasureX | MeasureReset | Mpp => OpCategory::Measurement,
            ResetZ | ResetX => OpCategory::Reset,
            XError | YError | ZError | Depolarize1 | Depolarize2 | PauliChannel1 | PauliChannel2 | CorrelatedError => {
                OpCategory::Noise
            }
            Detector | ObservableInclude | Tick | QubitCoords => OpCategory::Annotation,
        }
    }

    /// True for instructions acting on qubit pairs.
    #[must_use]
    pub fn is_two_qubit(self) -> bool {
        matches!(
            self,
            OpKind::Cnot | OpKind::Cz | OpKind::Swap | OpKind::Depolarize2 | OpKind::PauliChannel2
        )
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    fn letter(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Target {
    Qubit(u32),
    /// `rec[-k]`, stored as `k`.
    Rec(u32),
    Pauli(Pauli, u32),
    /// `*` joining Pauli terms of one product.
    Combiner,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Qubit(q) => write!(f, "{q}"),
            Target::Rec(k) => write!(f, "rec[-{k}]"),
            Target::Pauli(p, q) => write!(f, "{}{q}", p.letter()),
            Target::Combiner => f.write_str("*"),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct Instruction {
    pub kind: OpKind,
    pub targets: Vec<Target>,
    pub args: Vec<f64>,
}

impl Instruction {
    #[must_use]
    pub fn new(kind: OpKind, targets: Vec<Target>, args: Vec<f64>) -> Self {
        Self { kind, targets, args }
    }

    /// Measurements recorded by this instruction.
    #[must_use]
    pub fn measurement_count(&self) -> usize {
        match self.kind {
            OpKind::MeasureZ | OpKind::MeasureX | OpKind::MeasureReset => self.targets.len(),
            OpKind::Mpp => self.pauli_products().len(),
            _ => 0,
        }
    }

    /// MPP targets split into products.
    #[must_use]
    pub fn pauli_products(&self) -> Vec<Vec<(Pauli, u32)>> {
        let mut out: Vec<Vec<(Pauli, u32)>> = Vec::new();
        let mut join = false;
        for t in &self.targets {
            match *t {
                Target::Combiner => join = true,
                Target::Pauli(p, q) => {
                    if join {
                        out.last_mut().expect("combiner follows a term").push((p, q));
                    } else {
                        out.push(vec![(p, q)]);
                    }
                    join = false;
                }
                _ => {}
            }
        }
        out
    }

    /// Qubit indices named by the targets.
    pub fn qubits(&self) -> impl Iterator<Item = u32> + '_ {
        self.targets.iter().filter_map(|t| match *t {
            Target::Qubit(q) | Target::Pauli(_, q) => Some(q),
            _ => None,
        })
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        if !self.args.is_empty() {
            let args: Vec<String> = self.args.iter().map(ToString::to_string).collect();
            write!(f, "({})", args.join(", "))?;
        }
        let mut glue = false;
        for t in &self.targets {
            match t {
                Target::Combiner => {
                    f.write_char('*')?;
                    glue = true;
                }
                _ => {
                    if !glue {
                        f.write_char(' ')?;
                    }
                    write!(f, "{t}")?;
                    glue = false;
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Debug, Default)]
pub struct Detector {
    /// Absolute measurement indices, sorted, duplicates cancelled.
    pub records: Vec<usize>,
    pub coords: Vec<f64>,
}

#[derive(Clone, PartialEq, Debug, Default)]
pub struct Observable {
    pub index: usize,
    /// Absolute measurement indices, sorted, duplicates cancelled.
    pub records: Vec<usize>,
}

/// Normalized circuit: REPEAT blocks expanded and record lookbacks resolved.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct Circuit {
    pub instructions: Vec<Instruction>,
    pub num_qubits: usize,
    pub num_measurements: usize,
    pub detectors: Vec<Detector>,
    /// One entry per index `0..=max`, missing indices left empty.
    pub observables: Vec<Observable>,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CircuitStats {
    pub num_gates: usize,
    pub num_magic: usize,
    pub num_measurements: usize,
    pub num_error_locations: usize,
    pub num_detectors: usize,
    pub num_observables: usize,
}

impl fmt::Display for CircuitStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "num_gates={}", self.num_gates)?;
        writeln!(f, "num_magic={}", self.num_magic)?;
        writeln!(f, "num_measurements={}", self.num_measurements)?;
        writeln!(f, "num_error_locations={}", self.num_error_locations)?;
        writeln!(f, "num_detectors={}", self.num_detectors)?;
        writeln!(f, "num_observables={}", self.num_observables)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("line {line}: unknown instruction `{name}`")]
    UnknownInstruction { line: usize, name: String },
    #[error("line {line}: {name} is not supported")]
    Unsupported { line: usize, name: String },
    #[error("line {line}: malformed arguments: {reason}")]
    MalformedArgs { line: usize, reason: String },
    #[error("line {line}: bad target `{target}`: {reason}")]
    BadTarget {
        line: usize,
        target: String,
        reason: String,
    },
    #[error("line {line}: rec[-{lookback}] reaches past the {available} measurements recorded so far")]
    RecOutOfRange {
        line: usize,
        lookback: u32,
        available: usize,
    },
    #[error("line {line}: probability {value} outside [0, 1]")]
    ProbabilityOutOfRange { line: usize, value: f64 },
    #[error("line {line}: channel probabilities sum to {sum} > 1")]
    ProbabilitySum { line: usize, sum: f64 },
    #[error("line {line}: unbalanced REPEAT block")]
    UnbalancedBlock { line: usize },
}

enum Item {
    Op { line: usize, inst: Instruction },
    Repeat { count: u64, body: Vec<Item> },
}

/// Parses and normalizes circuit text.
///
/// # Errors
/// Any syntax or validation failure, tagged with its 1-based line number.
pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut pieces: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let spaced = line.replace('{', " {\n").replace('}', "\n}\n");
        for p in spaced.lines() {
            let p = p.trim();
            if !p.is_empty() {
                pieces.push((i + 1, p.to_string()));
            }
        }
    }
    let mut pos = 0;
    let items = parse_block(&pieces, &mut pos, false)?;
    let mut builder = Builder::default();
    builder.expand(&items)?;
    Ok(builder.finish())
}

fn parse_block(pieces: &[(usize, String)], pos: &mut usize, nested: bool) -> Result<Vec<Item>, CircuitError> {
    let mut items = Vec::new();
    while *pos < pieces.len() {
        let (line, ref text) = pieces[*pos];
        *pos += 1;
        if text == "}" {
            if nested {
                return Ok(items);
            }
            return Err(CircuitError::UnbalancedBlock { line });
        }
        if let Some(header) = text.strip_suffix('{') {
            let words: Vec<&str> = header.split_whitespace().collect();
            let count = match words.as_slice() {
                [w, n] if w.eq_ignore_ascii_case("REPEAT") => {
                    n.parse::<u64>().map_err(|_| CircuitError::MalformedArgs {
                        line,
                        reason: format!("bad repeat count `{n}`"),
                    })?
                }
                _ => {
                    return Err(CircuitError::MalformedArgs {
                        line,
                        reason: format!("bad block header `{header}`"),
                    })
                }
            };
            let body = parse_block(pieces, pos, true)?;
            items.push(Item::Repeat { count, body });
            continue;
        }
        items.push(Item::Op {
            line,
            inst: parse_instruction(line, text)?,
        });
    }
    if nested {
        let line = pieces.last().map_or(0, |p| p.0);
        return Err(CircuitError::UnbalancedBlock { line });
    }
    Ok(items)
}

fn parse_instruction(line: usize, text: &str) -> Result<Instruction, CircuitError> {
    let name_end = text.find(|c: char| c == '(' || c.is_whitespace()).unwrap_or(text.len());
    let name = &text[..name_end];
    let mut rest = text[name_end..].trim_start();
    let kind = match OpKind::from_name(name) {
        Some(k) => k,
        None if name.eq_ignore_ascii_case("ELSE_CORRELATED_ERROR") => {
            return Err(CircuitError::Unsupported {
                line,
                name: name.to_string(),
            })
        }
        None => {
            return Err(CircuitError::UnknownInstruction {
                line,
                name: name.to_string(),
            })
        }
    };
    let mut args = Vec::new();
    if let Some(after) = rest.strip_prefix('(') {
        let close = after.find(')').ok_or_else(|| CircuitError::MalformedArgs {
            line,
            reason: "missing `)`".into(),
        })?;
        let inner = after[..close].trim();
        if !inner.is_empty() {
            for a in inner.split(',') {
                let v: f64 = a.trim().parse().map_err(|_| CircuitError::MalformedArgs {
                    line,
                    reason: format!("`{}` is not a number", a.trim()),
                })?;
                if !v.is_finite() {
                    return Err(CircuitError::MalformedArgs {
                        line,
                        reason: format!("`{}` is not finite", a.trim()),
                    });
                }
                args.push(v);
            }
        }
        rest = after[close + 1..].trim_start();
    }
    let mut targets = Vec::new();
    for word in rest.split_whitespace() {
        let mut first = true;
        for part in word.split('*') {
            if !first {
                targets.push(Target::Combiner);
            }
            first = false;
            if !part.is_empty() {
                targets.push(parse_target(line, part)?);
            }
        }
    }
    Ok(Instruction { kind, targets, args })
}

fn parse_target(line: usize, word: &str) -> Result<Target, CircuitError> {
    let bad = |reason: &str| CircuitError::BadTarget {
        line,
        target: word.to_string(),
        reason: reason.to_string(),
    };
    if let Some(inner) = word.strip_prefix("rec[-").and_then(|s| s.strip_suffix(']')) {
        let k: u32 = inner.parse().map_err(|_| bad("lookback is not an integer"))?;
        if k == 0 {
            return Err(bad("lookback must be at least 1"));
        }
        return Ok(Target::Rec(k));
    }
    let mut chars = word.chars();
    let first = chars.next().ok_or_else(|| bad("empty"))?;
    let pauli = match first.to_ascii_uppercase() {
        'X' => Some(Pauli::X),
        'Y' => Some(Pauli::Y),
        'Z' => Some(Pauli::Z),
        _ => None,
    };
    if let Some(p) = pauli {
        let q: u32 = chars.as_str().parse().map_err(|_| bad("expected a qubit index"))?;
        return Ok(Target::Pauli(p, q));
    }
    if first == '!' {
        return Err(bad("inverted targets are not supported"));
    }
    word.parse::<u32>()
        .map(Target::Qubit)
        .map_err(|_| bad("expected a qubit, rec[-k] or Pauli target"))
}

#[derive(Default)]
struct Builder {
    out: Circuit,
}

impl Builder {
    fn expand(&mut self, items: &[Item]) -> Result<(), CircuitError> {
        for item in items {
            match item {
                Item::Op { line, inst } => self.push(*line, inst.clone())?,
                Item::Repeat { count, body } => {
                    for _ in 0..*count {
                        self.expand(body)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn resolve(&self, line: usize, k: u32) -> Result<usize, CircuitError> {
        let have = self.out.num_measurements;
        if (k as usize) > have {
            return Err(CircuitError::RecOutOfRange {
                line,
                lookback: k,
                available: have,
            });
        }
        Ok(have - k as usize)
    }

    fn push(&mut self, line: usize, inst: Instruction) -> Result<(), CircuitError> {
        validate(line, &inst)?;
        for t in &inst.targets {
            if let Target::Rec(k) = *t {
                self.resolve(line, k)?;
            }
        }
        for q in inst.qubits() {
            self.out.num_qubits = self.out.num_qubits.max(q as usize + 1);
        }
        match inst.kind {
            OpKind::Detector => {
                let mut recs = Vec::new();
                for t in &inst.targets {
                    if let Target::Rec(k) = *t {
                        recs.push(self.resolve(line, k)?);
                    }
                }
                self.out.detectors.push(Detector {
                    records: cancel_pairs(recs),
                    coords: inst.args.clone(),
                });
            }
            OpKind::ObservableInclude => {
                let index = inst.args[0] as usize;
                while self.out.observables.len() <= index {
                    let i = self.out.observables.len();
                    self.out.observables.push(Observable {
                        index: i,
                        records: Vec::new(),
                    });
                }
                let mut recs = std::mem::take(&mut self.out.observables[index].records);
                for t in &inst.targets {
                    if let Target::Rec(k) = *t {
                        recs.push(self.resolve(line, k)?);
                    }
                }
                self.out.observables[index].records = cancel_pairs(recs);
            }
            _ => {}
        }
        self.out.num_measurements += inst.measurement_count();
        self.out.instructions.push(inst);
        Ok(())
    }

    fn finish(self) -> Circuit {
        self.out
    }
}

fn cancel_pairs(mut recs: Vec<usize>) -> Vec<usize> {
    recs.sort_unstable();
    let mut out: Vec<usize> = Vec::with_capacity(recs.len());
    for r in recs {
        if out.last() == Some(&r) {
            out.pop();
        } else {
            out.push(r);
        }
    }
    out
}

fn validate(line: usize, inst: &Instruction) -> Result<(), CircuitError> {
    use OpKind::*;
    let args_err = |reason: String| CircuitError::MalformedArgs { line, reason };
    let target_err = |t: &Target, reason: &str| CircuitError::BadTarget {
        line,
        target: t.to_string(),
        reason: reason.to_string(),
    };
    let expect_args = |n: usize| -> Result<(), CircuitError> {
        if inst.args.len() == n {
            Ok(())
        } else {
            Err(args_err(format!(
                "{} takes {n} argument(s), got {}",
                inst.kind.name(),
                inst.args.len()
            )))
        }
    };
    let probability = |p: f64| -> Result<(), CircuitError> {
        if (0.0..=1.0).contains(&p) {
            Ok(())
        } else {
            Err(CircuitError::ProbabilityOutOfRange { line, value: p })
        }
    };
    let only = |allowed: fn(&Target) -> bool, reason: &str| -> Result<(), CircuitError> {
        match inst.targets.iter().find(|t| !allowed(t)) {
            Some(t) => Err(target_err(t, reason)),
            None => Ok(()),
        }
    };
    let is_qubit = |t: &Target| matches!(t, Target::Qubit(_));
    match inst.kind {
        H | S | SDag | X | Y | Z | SqrtX | SqrtXDag | T | TDag | ResetZ | ResetX => {
            expect_args(0)?;
            only(is_qubit, "expected a qubit")?;
        }
        RotX | RotY | RotZ => {
            expect_args(1)?;
            only(is_qubit, "expected a qubit")?;
        }
        U3 => {
            expect_args(3)?;
            only(is_qubit, "expected a qubit")?;
        }
        MeasureZ | MeasureX | MeasureReset => {
            if inst.args.len() > 1 {
                return Err(args_err("measurements take at most one flip probability".into()));
            }
            inst.args.iter().try_for_each(|&p| probability(p))?;
            only(is_qubit, "expected a qubit")?;
        }
        Mpp => {
            if inst.args.len() > 1 {
                return Err(args_err("MPP takes at most one flip probability".into()));
            }
            inst.args.iter().try_for_each(|&p| probability(p))?;
            only(
                |t| matches!(t, Target::Pauli(..) | Target::Combiner),
                "expected a Pauli product",
            )?;
            let mut prev_term = false;
            for t in &inst.targets {
                let is_term = matches!(t, Target::Pauli(..));
                if !is_term && !prev_term {
                    return Err(target_err(t, "misplaced `*`"));
                }
                prev_term = is_term;
            }
            if inst.targets.last() == Some(&Target::Combiner) {
                return Err(target_err(&Target::Combiner, "dangling `*`"));
            }
            for prod in inst.pauli_products() {
                let mut qs: Vec<u32> = prod.iter().map(|&(_, q)| q).collect();
                qs.sort_unstable();
                if qs.windows(2).any(|w| w[0] == w[1]) {
                    return Err(args_err("MPP product repeats a qubit".into()));
                }
            }
        }
        Cnot | Cz | Swap | Depolarize2 | PauliChannel2 => {
            match inst.kind {
                Depolarize2 => {
                    expect_args(1)?;
                    probability(inst.args[0])?;
                }
                PauliChannel2 => {
                    expect_args(15)?;
                    inst.args.iter().try_for_each(|&p| probability(p))?;
                    let sum: f64 = inst.args.iter().sum();
                    if sum > 1.0 + 1e-12 {
                        return Err(CircuitError::ProbabilitySum { line, sum });
                    }
                }
                _ => expect_args(0)?,
            }
            if !inst.targets.len().is_multiple_of(2) {
                return Err(args_err("two-qubit instruction needs an even number of targets".into()));
            }
            for pair in inst.targets.chunks(2) {
                let ok = match (inst.kind, pair[0], pair[1]) {
                    (_, Target::Qubit(a), Target::Qubit(b)) => a != b,
                    (Cnot, Target::Rec(_), Target::Qubit(_))
                    | (Cz, Target::Rec(_), Target::Qubit(_))
                    | (Cz, Target::Qubit(_), Target::Rec(_)) => true,
                    _ => false,
                };
                if !ok {
                    return Err(target_err(&pair[0], "invalid target pair"));
                }
            }
        }
        XError | YError | ZError | Depolarize1 => {
            expect_args(1)?;
            probability(inst.args[0])?;
            only(is_qubit, "expected a qubit")?;
        }
        PauliChannel1 => {
            expect_args(3)?;
            inst.args.iter().try_for_each(|&p| probability(p))?;
            let sum: f64 = inst.args.iter().sum();
            if sum > 1.0 + 1e-12 {
                return Err(CircuitError::ProbabilitySum { line, sum });
            }
            only(is_qubit, "expected a qubit")?;
        }
        CorrelatedError => {
            expect_args(1)?;
            probability(inst.args[0])?;
            only(|t| matches!(t, Target::Pauli(..)), "expected a Pauli target")?;
            let mut qs: Vec<u32> = inst.qubits().collect();
            qs.sort_unstable();
            if qs.windows(2).any(|w| w[0] == w[1]) {
                return Err(args_err("E repeats a qubit".into()));
            }
        }
        Detector => {
            if inst.targets.is_empty() {
                return Err(args_err("DETECTOR needs at least one rec target".into()));
            }
            only(|t| matches!(t, Target::Rec(_)), "expected rec[-k]")?;
        }
        ObservableInclude => {
            expect_args(1)?;
            let k = inst.args[0];
            if k < 0.0 || k.fract() != 0.0 || k > 1e6 {
                return Err(args_err(format!("observable index {k} is not a small integer")));
            }
            if inst.targets.is_empty() {
                return Err(args_err("OBSERVABLE_INCLUDE needs at least one rec target".into()));
            }
            only(|t| matches!(t, Target::Rec(_)), "expected rec[-k]")?;
        }
        Tick => {
            expect_args(0)?;
            if let Some(t) = inst.targets.first() {
                return Err(target_err(t, "TICK takes no targets"));
            }
        }
        QubitCoords => only(is_qubit, "expected a qubit")?,
    }
    Ok(())
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for inst in &self.instructions {
            writeln!(f, "{inst}")?;
        }
        Ok(())
    }
}

/// True when a rotation by `x·π` is not a Clifford.
fn is_magic_angle(x: f64) -> bool {
    !Angle::from_pi_units(x).is_clifford()
}

impl Instruction {
    /// True when this instruction applies a non-Clifford rotation.
    #[must_use]
    pub fn is_magic(&self) -> bool {
        match self.kind {
            OpKind::T | OpKind::TDag => true,
            OpKind::RotX | OpKind::RotY | OpKind::RotZ => is_magic_angle(self.args[0]),
            OpKind::U3 => self.args.iter().any(|&a| is_magic_angle(a)),
            _ => false,
        }
    }

    /// Number of independent noise channels this instruction introduces.
    #[must_use]
    pub fn channel_count(&self) -> usize {
        match self.kind {
            OpKind::XError | OpKind::YError | OpKind::ZError | OpKind::Depolarize1 | OpKind::PauliChannel1 => {
                self.targets.len()
            }
            OpKind::Depolarize2 | OpKind::PauliChannel2 => self.targets.len() / 2,
            OpKind::CorrelatedError => 1,
            OpKind::MeasureZ | OpKind::MeasureX | OpKind::MeasureReset | OpKind::Mpp if !self.args.is_empty() => {
                self.measurement_count()
            }
            _ => 0,
        }
    }
}

/// Counts gates, magic rotations, measurements and error locations.
#[must_use]
pub fn circuit_stats(c: &Circuit) -> CircuitStats {
    let mut s = CircuitStats {
        num_measurements: c.num_measurements,
        num_detectors: c.detectors.len(),
        num_observables: c.observables.len(),
        ..CircuitStats::default()
    };
    for inst in &c.instructions {
        if inst.kind.category() == OpCategory::Gate {
            let applications = if inst.kind.is_two_qubit() {
                inst.targets.len() / 2
            } else {
                inst.targets.len()
            };
            if inst.is_magic() {
                s.num_magic += applications;
            } else {
                s.num_gates += applications;
            }
        }
        s.num_error_locations += inst.channel_count();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING: &str = "\
R 0 1
H 0
CNOT 0 1
R_Z(0.125) 0
X_ERROR(0.01) 0 1
M 0 1
DETECTOR rec[-1] rec[-2]
";

    #[test]
    fn minimal_program() {
        let c = parse_circuit("H 0\nM 0").unwrap();
        assert_eq!(c.instructions.len(), 2);
        assert_eq!(c.num_qubits, 1);
        assert_eq!(c.num_measurements, 1);
    }

    #[test]
    fn listing_circuit() {
        let c = parse_circuit(LISTING).unwrap();
        assert_eq!(c.num_qubits, 2);
        assert_eq!(c.num_measurements, 2);
        assert_eq!(c.detectors.len(), 1);
        assert_eq!(c.detectors[0].records, vec![0, 1]);
        let rz = &c.instructions[3];
        assert_eq!(rz.kind, OpKind::RotZ);
        assert_eq!(rz.args, vec![0.125]);
        let s = circuit_stats(&c);
        assert_eq!((s.num_magic, s.num_measurements, s.num_detectors), (1, 2, 1));
    }

    #[test]
    fn repeat_expands() {
        let c = parse_circuit("REPEAT 3 { X 0\n }").unwrap();
        assert_eq!(c.instructions.len(), 3);
        assert!(c.instructions.iter().all(|i| i.kind == OpKind::X));
    }

    #[test]
    fn nested_repeat_records() {
        let c = parse_circuit("REPEAT 2 {\nM 0\nREPEAT 2 {\nM 1\nDETECTOR rec[-1] rec[-2]\n}\n}").unwrap();
        assert_eq!(c.num_measurements, 6);
        let recs: Vec<Vec<usize>> = c.detectors.iter().map(|d| d.records.clone()).collect();
        assert_eq!(recs, vec![vec![0, 1], vec![1, 2], vec![3, 4], vec![4, 5]]);
    }

    #[test]
    fn magic_counting() {
        let s = circuit_stats(&parse_circuit("T 0\nT_DAG 1\nR_Z(0.5) 0").unwrap());
        assert_eq!(s.num_magic, 2);
        assert_eq!(s.num_gates, 1);
        assert_eq!(circuit_stats(&parse_circuit("").unwrap()), CircuitStats::default());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_circuit("FOO 0"),
            Err(CircuitError::UnknownInstruction { .. })
        ));
        assert!(matches!(
            parse_circuit("M 0\nDETECTOR rec[-2]"),
            Err(CircuitError::RecOutOfRange { .. })
        ));
        assert!(matches!(
            parse_circuit("X_ERROR(1.5) 0"),
            Err(CircuitError::ProbabilityOutOfRange { .. })
        ));
        assert!(matches!(
            parse_circuit("R_Z 0"),
            Err(CircuitError::MalformedArgs { .. })
        ));
        assert!(matches!(
            parse_circuit("PAULI_CHANNEL_1(0.5,0.4,0.3) 0"),
            Err(CircuitError::ProbabilitySum { .. })
        ));
        assert!(matches!(
            parse_circuit("ELSE_CORRELATED_ERROR(0.1) X0"),
            Err(CircuitError::Unsupported { .. })
        ));
        assert!(matches!(
            parse_circuit("REPEAT 2 {\nH 0"),
            Err(CircuitError::UnbalancedBlock { .. })
        ));
        assert!(matches!(parse_circuit("CNOT 0 0"), Err(CircuitError::BadTarget { .. })));
    }

    #[test]
    fn round_trip() {
        let text = "MPP X0*Z1 Y2\nE(0.2) X0 Z1\nCX rec[-1] 3\nOBSERVABLE_INCLUDE(1) rec[-2]\nU3(0.1, 0.2, 0.3) 0\n";
        let c = parse_circuit(text).unwrap();
        let printed = c.to_string();
        assert!(printed.starts_with("MPP X0*Z1 Y2\n"));
        assert_eq!(parse_circuit(&printed).unwrap(), c);
        assert_eq!(c.observables.len(), 2);
        assert!(c.observables[0].records.is_empty());
        assert_eq!(c.observables[1].records, vec![0]);
    }
}
