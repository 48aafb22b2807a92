//! Clifford rewriting of parameterized diagrams.
//!
//! Rewrites only look at phase constants, never at parities, so one reduction
//! serves every noise configuration. Doubled diagrams are split into their two
//! copies first; everything below works on single-layer Z-spider graphs.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_4, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::zx::{
    to_tensor, Angle, Color, EdgeKind, Layer, ParamZXDiagram, Parity, Phase, ScalarTerm, VertexKind, ZxError,
};

/// Counts of rewrites applied during a reduction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RewriteTrace {
    pub color_change: usize,
    pub fusion: usize,
    pub identity: usize,
    pub local_complementation: usize,
    pub pivot: usize,
    pub boundary_pivot: usize,
    pub gadget_pivot: usize,
    pub hopf: usize,
    pub copy: usize,
    pub final_vertices: usize,
    pub final_edges: usize,
}

impl RewriteTrace {
    fn absorb(&mut self, other: &RewriteTrace) {
        self.color_change += other.color_change;
        self.fusion += other.fusion;
        self.identity += other.identity;
        self.local_complementation += other.local_complementation;
        self.pivot += other.pivot;
        self.boundary_pivot += other.boundary_pivot;
        self.gadget_pivot += other.gadget_pivot;
        self.hopf += other.hopf;
        self.copy += other.copy;
    }
}

fn is_spider(d: &ParamZXDiagram, v: usize) -> bool {
    !d.is_boundary(v)
}

/// Non-Clifford spider hanging off a single spider neighbor.
fn is_leaf(d: &ParamZXDiagram, v: usize) -> bool {
    is_spider(d, v)
        && d.degree(v) == 1
        && !d.phase(v).angle.is_clifford()
        && d.neighbors(v).all(|(n, _)| is_spider(d, n))
}

fn has_leaf(d: &ParamZXDiagram, v: usize) -> bool {
    d.neighbors(v).any(|(n, _)| is_leaf(d, n))
}

fn is_interior(d: &ParamZXDiagram, v: usize) -> bool {
    is_spider(d, v) && !d.touches_boundary(v)
}

fn all_hadamard(d: &ParamZXDiagram, v: usize) -> bool {
    d.neighbors(v).all(|(_, k)| k == EdgeKind::Hadamard)
}

/// Multiplies in the `(-1)^{xy}` factor between two spiders as a Hadamard edge.
fn toggle(d: &mut ParamZXDiagram, x: usize, y: usize, trace: &mut RewriteTrace) {
    if d.edge(x, y).is_some() {
        trace.hopf += 1;
    }
    d.scalar.scale_real(SQRT_2);
    d.add_edge(x, y, EdgeKind::Hadamard);
}

/// Splits doubled vertices, turns X spiders into Z spiders, fuses plain Z-Z
/// edges and removes phase-free degree-2 spiders.
#[must_use]
pub fn to_graph_like(d: &ParamZXDiagram) -> ParamZXDiagram {
    let mut trace = RewriteTrace::default();
    graph_like_with_trace(d, &mut trace)
}

fn graph_like_with_trace(d: &ParamZXDiagram, trace: &mut RewriteTrace) -> ParamZXDiagram {
    let doubled = d.vertex_ids().any(|v| d.vertex(v).layer == Layer::Quantum);
    let mut g = if doubled { d.undouble() } else { d.clone() };
    color_change(&mut g, trace);
    fuse_all(&mut g, trace);
    remove_identities(&mut g, trace);
    g
}

fn color_change(d: &mut ParamZXDiagram, trace: &mut RewriteTrace) {
    let xs: Vec<usize> = d
        .vertex_ids()
        .filter(|&v| d.vertex(v).color() == Some(Color::X))
        .collect();
    let is_x: BTreeSet<usize> = xs.iter().copied().collect();
    for &v in &xs {
        for (n, k) in d.neighbors(v).collect::<Vec<_>>() {
            if !is_x.contains(&n) {
                d.set_edge_kind(v, n, k.toggled());
            }
        }
    }
    for &v in &xs {
        d.set_color(v, Color::Z);
        trace.color_change += 1;
    }
}

/// Merges spider `v` into spider `u` across a plain edge.
fn fuse(d: &mut ParamZXDiagram, u: usize, v: usize, trace: &mut RewriteTrace) {
    let phase = d.phase(v).clone();
    d.add_to_phase(u, &phase);
    let nbrs: Vec<(usize, EdgeKind)> = d.neighbors(v).filter(|&(n, _)| n != u).collect();
    d.remove_vertex(v);
    for (n, k) in nbrs {
        if d.edge(u, n).is_some() {
            trace.hopf += 1;
        }
        d.add_edge(u, n, k);
    }
    trace.fusion += 1;
}

fn plain_spider_neighbor(d: &ParamZXDiagram, u: usize) -> Option<usize> {
    d.neighbors(u)
        .find(|&(n, k)| k == EdgeKind::Plain && is_spider(d, n))
        .map(|(n, _)| n)
}

fn fuse_all(d: &mut ParamZXDiagram, trace: &mut RewriteTrace) {
    let ids: Vec<usize> = d.vertex_ids().collect();
    for u in ids {
        if !d.contains(u) || !is_spider(d, u) {
            continue;
        }
        while let Some(v) = plain_spider_neighbor(d, u) {
            fuse(d, u, v, trace);
        }
    }
}

fn remove_identities(d: &mut ParamZXDiagram, trace: &mut RewriteTrace) -> bool {
    let mut changed = false;
    let ids: Vec<usize> = d.vertex_ids().collect();
    for u in ids {
        if !d.contains(u) || !is_spider(d, u) || d.degree(u) != 2 || !d.phase(u).is_zero() {
            continue;
        }
        let nbrs: Vec<(usize, EdgeKind)> = d.neighbors(u).collect();
        let (n1, k1) = nbrs[0];
        let (n2, k2) = nbrs[1];
        d.remove_vertex(u);
        if d.edge(n1, n2).is_some() {
            trace.hopf += 1;
        }
        let kind = k1.then(k2);
        d.add_edge(n1, n2, kind);
        trace.identity += 1;
        changed = true;
        if kind == EdgeKind::Plain && is_spider(d, n1) && is_spider(d, n2) && d.edge(n1, n2).is_some() {
            let (a, b) = (n1.min(n2), n1.max(n2));
            fuse(d, a, b, trace);
            while let Some(v) = plain_spider_neighbor(d, a) {
                fuse(d, a, v, trace);
            }
        }
    }
    changed
}

fn lc_eligible(d: &ParamZXDiagram, u: usize) -> bool {
    is_interior(d, u) && d.phase(u).angle.is_proper_clifford() && all_hadamard(d, u)
}

/// Local complementation about an interior ±π/2 spider.
fn local_complement(d: &mut ParamZXDiagram, u: usize, trace: &mut RewriteTrace) {
    let phase = d.phase(u).clone();
    let sigma: i64 = if phase.angle.exact() == 2 { 1 } else { -1 };
    let nbrs = d.neighbor_ids(u);
    let n = nbrs.len();
    d.remove_vertex(u);
    let factor = 2f64.powf(-(n as f64) / 2.0) * SQRT_2;
    d.scalar.scale(Complex64::from_polar(factor, sigma as f64 * FRAC_PI_4));
    if !phase.parity.is_empty() {
        d.scalar.push(ScalarTerm::HalfPi {
            positive: sigma == -1,
            a: phase.parity.clone(),
        });
    }
    let delta = Phase::new(Angle::quarter_turns(-2 * sigma), phase.parity.clone());
    for &v in &nbrs {
        d.add_to_phase(v, &delta);
    }
    for i in 0..n {
        for j in i + 1..n {
            toggle(d, nbrs[i], nbrs[j], trace);
        }
    }
    trace.local_complementation += 1;
}

fn pauli_parts(p: &Phase) -> (bool, Parity) {
    (p.angle.exact() == 4, p.parity.clone())
}

/// Pivot along the Hadamard edge between two interior Pauli spiders.
fn pivot(d: &mut ParamZXDiagram, u: usize, v: usize, trace: &mut RewriteTrace) {
    let (cu, a) = pauli_parts(d.phase(u));
    let (cv, b) = pauli_parts(d.phase(v));
    let nu: Vec<usize> = d.neighbor_ids(u).into_iter().filter(|&w| w != v).collect();
    let nv: Vec<usize> = d.neighbor_ids(v).into_iter().filter(|&w| w != u).collect();
    let (du, dv) = (d.degree(u), d.degree(v));
    d.remove_vertex(u);
    d.remove_vertex(v);
    let mut factor = 2.0 * 2f64.powf(-((du + dv - 1) as f64) / 2.0);
    if cu && cv {
        factor = -factor;
    }
    d.scalar.scale_real(factor);
    if cu && !b.is_empty() {
        d.scalar.push(ScalarTerm::PiPair {
            a: b.clone(),
            b: b.clone(),
        });
    }
    if cv && !a.is_empty() {
        d.scalar.push(ScalarTerm::PiPair {
            a: a.clone(),
            b: a.clone(),
        });
    }
    if !a.is_empty() && !b.is_empty() {
        d.scalar.push(ScalarTerm::PiPair {
            a: a.clone(),
            b: b.clone(),
        });
    }
    let to_v = Phase::new(if cu { Angle::PI } else { Angle::ZERO }, a);
    let to_u = Phase::new(if cv { Angle::PI } else { Angle::ZERO }, b);
    let set_u: BTreeSet<usize> = nu.iter().copied().collect();
    let set_v: BTreeSet<usize> = nv.iter().copied().collect();
    for &z in &nv {
        d.add_to_phase(z, &to_v);
    }
    for &w in &nu {
        d.add_to_phase(w, &to_u);
        if set_v.contains(&w) {
            d.add_to_phase(w, &Phase::quarter_turns(4));
        }
    }
    for &w in &nu {
        for &z in &nv {
            if w == z || (set_v.contains(&w) && set_u.contains(&z)) {
                continue;
            }
            toggle(d, w, z, trace);
        }
    }
}

fn pivot_candidate(d: &ParamZXDiagram, v: usize) -> bool {
    is_interior(d, v) && d.phase(v).angle.is_pauli() && all_hadamard(d, v) && !has_leaf(d, v)
}

fn try_pivot(d: &mut ParamZXDiagram, trace: &mut RewriteTrace) -> bool {
    let mut applied = false;
    let ids: Vec<usize> = d.vertex_ids().collect();
    for u in ids {
        if !d.contains(u) || !pivot_candidate(d, u) {
            continue;
        }
        let partner = d.neighbor_ids(u).into_iter().find(|&v| pivot_candidate(d, v));
        if let Some(v) = partner {
            pivot(d, u, v, trace);
            trace.pivot += 1;
            applied = true;
        }
    }
    applied
}

fn try_local_complement(d: &mut ParamZXDiagram, trace: &mut RewriteTrace) -> bool {
    let mut applied = false;
    let ids: Vec<usize> = d.vertex_ids().collect();
    for u in ids {
        if d.contains(u) && lc_eligible(d, u) {
            local_complement(d, u, trace);
            applied = true;
        }
    }
    applied
}

/// Boundary-adjacent Pauli spider with one boundary neighbor, usable after unfusing.
fn boundary_candidate(d: &ParamZXDiagram, v: usize) -> Option<usize> {
    if !is_spider(d, v) || !d.phase(v).angle.is_pauli() || has_leaf(d, v) {
        return None;
    }
    let mut boundary = None;
    for (n, k) in d.neighbors(v) {
        if d.is_boundary(n) {
            if boundary.is_some() {
                return None;
            }
            boundary = Some(n);
        } else if k != EdgeKind::Hadamard {
            return None;
        }
    }
    boundary
}

fn try_boundary_pivot(d: &mut ParamZXDiagram, trace: &mut RewriteTrace) -> bool {
    let ids: Vec<usize> = d.vertex_ids().collect();
    for u in ids {
        if !d.contains(u) || !pivot_candidate(d, u) {
            continue;
        }
        let partner = d
            .neighbor_ids(u)
            .into_iter()
            .find_map(|v| boundary_candidate(d, v).map(|b| (v, b)));
        if let Some((v, b)) = partner {
            let kind = d.edge(v, b).expect("boundary edge");
            d.remove_edge(v, b);
            let p = d.add_spider(Color::Z, Layer::Classical, Phase::zero());
            d.insert_edge_raw(v, p, EdgeKind::Hadamard);
            d.insert_edge_raw(p, b, kind.toggled());
            pivot(d, u, v, trace);
            trace.boundary_pivot += 1;
            return true;
        }
    }
    false
}

fn gadget_candidate(d: &ParamZXDiagram, v: usize) -> bool {
    is_interior(d, v) && !d.phase(v).angle.is_clifford() && d.degree(v) > 1 && all_hadamard(d, v) && !has_leaf(d, v)
}

fn try_gadget_pivot(d: &mut ParamZXDiagram, trace: &mut RewriteTrace) -> bool {
    let ids: Vec<usize> = d.vertex_ids().collect();
    for u in ids {
        if !d.contains(u) || !pivot_candidate(d, u) {
            continue;
        }
        let partner = d.neighbor_ids(u).into_iter().find(|&v| gadget_candidate(d, v));
        if let Some(v) = partner {
            let phase = d.phase(v).clone();
            d.set_phase(v, Phase::from_parity(phase.parity.clone()));
            let hub = d.add_spider(Color::Z, Layer::Classical, Phase::zero());
            let leaf = d.add_spider(Color::Z, Layer::Classical, Phase::constant(phase.angle));
            d.insert_edge_raw(v, hub, EdgeKind::Hadamard);
            d.insert_edge_raw(hub, leaf, EdgeKind::Hadamard);
            pivot(d, u, v, trace);
            trace.gadget_pivot += 1;
            return true;
        }
    }
    false
}

fn try_isolated(d: &mut ParamZXDiagram, trace: &mut RewriteTrace) -> bool {
    let mut applied = false;
    let ids: Vec<usize> = d.vertex_ids().collect();
    for u in ids {
        if !d.contains(u) || !is_spider(d, u) {
            continue;
        }
        match d.degree(u) {
            0 => {
                let p = d.phase(u).clone();
                d.remove_vertex(u);
                d.scalar.push(ScalarTerm::Node {
                    alpha: p.angle,
                    a: p.parity,
                });
                trace.copy += 1;
                applied = true;
            }
            1 => {
                let (v, kind) = d.neighbors(u).next().expect("degree one");
                if !is_spider(d, v) || d.degree(v) != 1 {
                    continue;
                }
                let pu = d.phase(u).clone();
                let pv = d.phase(v).clone();
                d.remove_vertex(u);
                d.remove_vertex(v);
                match kind {
                    EdgeKind::Hadamard => {
                        d.scalar.scale_sqrt2(-1);
                        d.scalar.push(ScalarTerm::PhasePair {
                            alpha: pu.angle,
                            beta: pv.angle,
                            a: pu.parity,
                            b: pv.parity,
                        });
                    }
                    EdgeKind::Plain => {
                        let sum = &pu + &pv;
                        d.scalar.push(ScalarTerm::Node {
                            alpha: sum.angle,
                            a: sum.parity,
                        });
                    }
                }
                trace.copy += 1;
                applied = true;
            }
            _ => {}
        }
    }
    applied
}

/// Applies Clifford rewrites until none applies.
///
/// Accepts any well-formed diagram; non-graph-like input is normalized first.
#[must_use]
pub fn clifford_simplify(d: &ParamZXDiagram) -> (ParamZXDiagram, RewriteTrace) {
    let mut trace = RewriteTrace::default();
    let mut g = graph_like_with_trace(d, &mut trace);
    reduce_in_place(&mut g, &mut trace);
    (g, trace)
}

/// Reduction loop on a diagram that is already graph-like.
pub fn reduce_in_place(g: &mut ParamZXDiagram, trace: &mut RewriteTrace) {
    loop {
        let mut step = RewriteTrace::default();
        let progressed = remove_identities(g, &mut step)
            || try_local_complement(g, &mut step)
            || try_pivot(g, &mut step)
            || try_boundary_pivot(g, &mut step)
            || try_gadget_pivot(g, &mut step)
            || try_isolated(g, &mut step);
        trace.absorb(&step);
        if !progressed {
            break;
        }
    }
    trace.final_vertices = g.num_vertices();
    trace.final_edges = g.num_edges();
}

/// True when no interior ±π/2 spider and no pivotable interior Pauli pair remains.
#[must_use]
pub fn is_fixed_point(d: &ParamZXDiagram) -> bool {
    d.vertex_ids().all(|u| {
        !lc_eligible(d, u) && !(pivot_candidate(d, u) && d.neighbor_ids(u).into_iter().any(|v| pivot_candidate(d, v)))
    })
}

/// True when every spider is Z and every spider-spider edge is a Hadamard edge.
#[must_use]
pub fn is_graph_like(d: &ParamZXDiagram) -> bool {
    d.vertex_ids().all(|v| match d.vertex(v).kind {
        VertexKind::Boundary => true,
        VertexKind::Spider(Color::X) => false,
        VertexKind::Spider(Color::Z) => {
            d.vertex(v).layer == Layer::Classical && {
                d.neighbors(v).all(|(n, k)| d.is_boundary(n) || k == EdgeKind::Hadamard)
            }
        }
    })
}

const VERIFY_TOLERANCE: f64 = 1e-9;
const EXHAUSTIVE_PARAMS: usize = 10;
const RANDOM_ASSIGNMENTS: usize = 64;

/// Compares the tensors of two diagrams, ledgers included, over parameter assignments.
///
/// Every assignment is tried when there are at most ten parameters, otherwise
/// a fixed set of 64 pseudo-random ones.
///
/// # Errors
/// If either diagram is too large for dense contraction.
pub fn verify_semantics(before: &ParamZXDiagram, after: &ParamZXDiagram) -> Result<bool, ZxError> {
    let n = before.num_params().max(after.num_params());
    let assignments: Vec<Vec<bool>> = if n <= EXHAUSTIVE_PARAMS {
        (0..1usize << n)
            .map(|m| (0..n).map(|i| (m >> i) & 1 == 1).collect())
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        (0..RANDOM_ASSIGNMENTS)
            .map(|_| (0..n).map(|_| rng.gen::<bool>()).collect())
            .collect()
    };
    for a in &assignments {
        let x = to_tensor(before, a)?;
        let y = to_tensor(after, a)?;
        if x.legs != y.legs || x.max_diff(&y) > VERIFY_TOLERANCE {
            return Ok(false);
        }
    }
    Ok(true)
}
