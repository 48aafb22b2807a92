//! Dense tensor semantics for small diagrams.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use super::diagram::{Color, EdgeKind, Layer, ParamZXDiagram, VertexKind};
use super::phase::Angle;
use super::ZxError;

/// Largest number of simultaneously open legs allowed during contraction.
pub const MAX_OPEN_LEGS: usize = 24;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ContractionOrder {
    /// Increasing vertex id.
    Forward,
    /// Decreasing vertex id.
    Reverse,
}

/// Dense tensor over boundary legs, little-endian in (inputs, outputs) order.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub legs: usize,
    pub data: Vec<Complex64>,
}

impl Tensor {
    #[must_use]
    pub fn scalar(&self) -> Option<Complex64> {
        (self.legs == 0).then(|| self.data[0])
    }

    /// Largest entrywise distance to `other`; infinite on shape mismatch.
    #[must_use]
    pub fn max_diff(&self, other: &Tensor) -> f64 {
        if self.legs != other.legs {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

type Label = usize;

/// Sparse local tensor: legs and the non-zero entries over them.
struct Node {
    legs: Vec<Label>,
    entries: Vec<(u32, Complex64)>,
}

fn z_node(legs: Vec<Label>, weight: Complex64) -> Node {
    let all = if legs.is_empty() { 0 } else { (1u32 << legs.len()) - 1 };
    let mut entries = vec![(0, Complex64::new(1.0, 0.0))];
    if legs.is_empty() {
        entries[0].1 += weight;
    } else {
        entries.push((all, weight));
    }
    Node { legs, entries }
}

fn h_node(a: Label, b: Label) -> Node {
    let h = FRAC_1_SQRT_2;
    Node {
        legs: vec![a, b],
        entries: vec![
            (0b00, Complex64::new(h, 0.0)),
            (0b01, Complex64::new(h, 0.0)),
            (0b10, Complex64::new(h, 0.0)),
            (0b11, Complex64::new(-h, 0.0)),
        ],
    }
}

/// Running contraction: a dense tensor over the currently open labels.
struct Contraction {
    labels: Vec<Label>,
    data: Vec<Complex64>,
}

impl Contraction {
    fn new() -> Self {
        Self {
            labels: Vec::new(),
            data: vec![Complex64::new(1.0, 0.0)],
        }
    }

    fn absorb(&mut self, node: &Node) -> Result<(), ZxError> {
        let shared: Vec<(usize, usize)> = node
            .legs
            .iter()
            .enumerate()
            .filter_map(|(i, l)| self.labels.iter().position(|c| c == l).map(|p| (i, p)))
            .collect();
        let mut fresh: Vec<Label> = Vec::new();
        let mut fresh_pos: Vec<Option<usize>> = vec![None; node.legs.len()];
        for (i, l) in node.legs.iter().enumerate() {
            if self.labels.contains(l) {
                continue;
            }
            let repeated = node.legs.iter().filter(|x| *x == l).count() > 1;
            if !repeated {
                fresh_pos[i] = Some(fresh.len());
                fresh.push(*l);
            }
        }
        let kept: Vec<usize> = (0..self.labels.len())
            .filter(|p| !shared.iter().any(|&(_, q)| q == *p))
            .collect();
        let out_legs = kept.len() + fresh.len();
        if out_legs > MAX_OPEN_LEGS {
            return Err(ZxError::TooLarge {
                legs: out_legs,
                max: MAX_OPEN_LEGS,
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); 1usize << out_legs];
        let mut scatter = vec![0usize; 1usize << kept.len()];
        for rest in 1..scatter.len() {
            let low = rest.trailing_zeros() as usize;
            scatter[rest] = scatter[rest & (rest - 1)] | (1 << kept[low]);
        }
        'entry: for &(bits, value) in &node.entries {
            for (i, a) in node.legs.iter().enumerate() {
                for (j, b) in node.legs.iter().enumerate().skip(i + 1) {
                    if a == b && ((bits >> i) & 1) != ((bits >> j) & 1) {
                        continue 'entry;
                    }
                }
            }
            let mut base = 0usize;
            for &(i, p) in &shared {
                if (bits >> i) & 1 == 1 {
                    base |= 1 << p;
                }
            }
            let mut fresh_bits = 0usize;
            for (i, fp) in fresh_pos.iter().enumerate() {
                if let Some(f) = fp {
                    if (bits >> i) & 1 == 1 {
                        fresh_bits |= 1 << (kept.len() + f);
                    }
                }
            }
            for (rest, &offset) in scatter.iter().enumerate() {
                let cur = self.data[base | offset];
                if cur.re != 0.0 || cur.im != 0.0 {
                    out[rest | fresh_bits] += cur * value;
                }
            }
        }
        let mut labels: Vec<Label> = kept.iter().map(|&p| self.labels[p]).collect();
        labels.extend(fresh);
        self.labels = labels;
        self.data = out;
        Ok(())
    }
}

/// Per-vertex node ids in the undoubled network.
struct Copies {
    first: usize,
    second: Option<usize>,
}

/// Contracts the diagram at a parameter assignment, including its scalar.
///
/// Doubled vertices are expanded into two conjugate copies; X spiders are
/// realized as Z spiders with a Hadamard on every leg.
///
/// # Errors
/// [`ZxError::TooLarge`] when an intermediate tensor exceeds the leg guard.
pub fn to_tensor(d: &ParamZXDiagram, assignment: &[bool]) -> Result<Tensor, ZxError> {
    contract(d, assignment, ContractionOrder::Forward)
}

/// Same as [`to_tensor`] with an explicit vertex order.
///
/// # Errors
/// [`ZxError::TooLarge`] when an intermediate tensor exceeds the leg guard.
pub fn contract(d: &ParamZXDiagram, assignment: &[bool], order: ContractionOrder) -> Result<Tensor, ZxError> {
    if assignment.len() < d.num_params() {
        return Err(ZxError::AssignmentWidth {
            got: assignment.len(),
            need: d.num_params(),
        });
    }
    let bound = d.id_bound();
    let mut copies: Vec<Option<Copies>> = (0..bound).map(|_| None).collect();
    let mut next_copy = 0usize;
    for v in d.vertex_ids() {
        let q = d.vertex(v).layer == Layer::Quantum;
        copies[v] = Some(Copies {
            first: next_copy,
            second: q.then_some(next_copy + 1),
        });
        next_copy += if q { 2 } else { 1 };
    }

    // Wire labels: one per (copy, copy) connection, plus one extra per Hadamard.
    let mut next_label = 0usize;
    let mut fresh = || {
        next_label += 1;
        next_label - 1
    };
    let mut legs: Vec<Vec<Label>> = vec![Vec::new(); next_copy];
    let mut hadamards: Vec<(usize, usize, Label, Label)> = Vec::new();
    let x_leg = |v: usize| matches!(d.vertex(v).kind, VertexKind::Spider(Color::X));
    for u in d.vertex_ids() {
        for (v, kind) in d.neighbors(u) {
            if v < u {
                continue;
            }
            let cu = copies[u].as_ref().expect("live");
            let cv = copies[v].as_ref().expect("live");
            let pairs: Vec<(usize, usize)> = match (cu.second, cv.second) {
                (Some(u2), Some(v2)) => vec![(cu.first, cv.first), (u2, v2)],
                (None, Some(v2)) => vec![(cu.first, cv.first), (cu.first, v2)],
                (Some(u2), None) => vec![(cu.first, cv.first), (u2, cv.first)],
                (None, None) => vec![(cu.first, cv.first)],
            };
            let hcount = usize::from(kind == EdgeKind::Hadamard) + usize::from(x_leg(u)) + usize::from(x_leg(v));
            for (a, b) in pairs {
                if hcount % 2 == 0 {
                    let l = fresh();
                    legs[a].push(l);
                    legs[b].push(l);
                } else {
                    let la = fresh();
                    let lb = fresh();
                    legs[a].push(la);
                    legs[b].push(lb);
                    hadamards.push((a.min(b), a.max(b), la, lb));
                }
            }
        }
    }

    let mut open_of_copy: Vec<Option<Label>> = vec![None; next_copy];
    let mut nodes: Vec<Vec<Node>> = (0..next_copy).map(|_| Vec::new()).collect();
    for v in d.vertex_ids() {
        let vx = d.vertex(v);
        let c = copies[v].as_ref().expect("live");
        let flip = if vx.phase.parity.eval(assignment) {
            Angle::PI
        } else {
            Angle::ZERO
        };
        let base = vx.phase.angle;
        let mut emit = |copy: usize, phase: Complex64, legs_here: Vec<Label>| match vx.kind {
            VertexKind::Boundary => {
                let open = fresh();
                open_of_copy[copy] = Some(open);
                let mut l = legs_here;
                l.push(open);
                nodes[copy].push(z_node(l, Complex64::new(1.0, 0.0)));
            }
            VertexKind::Spider(_) => nodes[copy].push(z_node(legs_here, phase)),
        };
        emit(c.first, (base + flip).unit(), legs[c.first].clone());
        if let Some(s) = c.second {
            emit(s, (-base + flip).unit(), legs[s].clone());
        }
    }
    let mut net = Contraction::new();
    let ids: Vec<usize> = match order {
        ContractionOrder::Forward => (0..next_copy).collect(),
        ContractionOrder::Reverse => (0..next_copy).rev().collect(),
    };
    // A Hadamard joins the network right after the later of its two endpoints.
    let mut h_after: Vec<Vec<Node>> = (0..next_copy).map(|_| Vec::new()).collect();
    for (lo, hi, la, lb) in hadamards {
        let later = if order == ContractionOrder::Forward { hi } else { lo };
        h_after[later].push(h_node(la, lb));
    }
    for &copy in &ids {
        for n in nodes[copy].iter().chain(&h_after[copy]) {
            net.absorb(n)?;
        }
    }

    let mut boundary_labels = Vec::new();
    for &b in d.inputs().iter().chain(d.outputs()) {
        let c = copies[b].as_ref().expect("boundary is live");
        boundary_labels.push(open_of_copy[c.first].expect("boundary copy"));
        if let Some(s) = c.second {
            boundary_labels.push(open_of_copy[s].expect("boundary copy"));
        }
    }
    if boundary_labels.len() != net.labels.len() {
        return Err(ZxError::UnlistedBoundary);
    }
    let n = boundary_labels.len();
    let perm: Vec<usize> = boundary_labels
        .iter()
        .map(|l| net.labels.iter().position(|x| x == l).expect("open label"))
        .collect();
    let scalar = d.scalar.eval(assignment);
    let mut data = vec![Complex64::new(0.0, 0.0); 1usize << n];
    for (idx, slot) in data.iter_mut().enumerate() {
        let mut src = 0usize;
        for (k, &p) in perm.iter().enumerate() {
            if (idx >> k) & 1 == 1 {
                src |= 1 << p;
            }
        }
        *slot = net.data[src] * scalar;
    }
    Ok(Tensor { legs: n, data })
}
