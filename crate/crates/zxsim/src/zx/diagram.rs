use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use super::phase::{Parity, Phase};
use super::scalar::ScalarLedger;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Color {
    Z,
    X,
}

/// Doubled (quantum) objects stand for two conjugate copies; classical ones for one.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Layer {
    Quantum,
    Classical,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum EdgeKind {
    Plain,
    Hadamard,
}

impl EdgeKind {
    #[must_use]
    pub fn toggled(self) -> EdgeKind {
        match self {
            EdgeKind::Plain => EdgeKind::Hadamard,
            EdgeKind::Hadamard => EdgeKind::Plain,
        }
    }

    /// Kind of the wire obtained by joining two wires end to end.
    #[must_use]
    pub fn then(self, other: EdgeKind) -> EdgeKind {
        if self == other {
            EdgeKind::Plain
        } else {
            EdgeKind::Hadamard
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum VertexKind {
    Boundary,
    Spider(Color),
}

/// A spider as stored in a diagram.
#[derive(Clone, PartialEq, Debug)]
pub struct Spider {
    pub color: Color,
    pub layer: Layer,
    pub phase: Phase,
}

#[derive(Clone, PartialEq, Debug)]
pub struct Vertex {
    pub kind: VertexKind,
    pub layer: Layer,
    pub phase: Phase,
}

impl Vertex {
    #[must_use]
    pub fn is_boundary(&self) -> bool {
        self.kind == VertexKind::Boundary
    }

    #[must_use]
    pub fn color(&self) -> Option<Color> {
        match self.kind {
            VertexKind::Spider(c) => Some(c),
            VertexKind::Boundary => None,
        }
    }
}

/// Open ZX diagram whose phases may depend on binary parameters.
///
/// Vertex ids are stable: removed vertices leave a hole. Adjacency lists are
/// ordered maps so that every traversal is deterministic.
#[derive(Clone, Debug)]
pub struct ParamZXDiagram {
    vertices: Vec<Option<Vertex>>,
    adjacency: Vec<BTreeMap<usize, EdgeKind>>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    pub scalar: ScalarLedger,
    num_params: usize,
    live: usize,
}

impl Default for ParamZXDiagram {
    fn default() -> Self {
        Self::new(0)
    }
}

impl ParamZXDiagram {
    #[must_use]
    pub fn new(num_params: usize) -> Self {
        Self {
            vertices: Vec::new(),
            adjacency: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            scalar: ScalarLedger::one(),
            num_params,
            live: 0,
        }
    }

    #[must_use]
    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn set_num_params(&mut self, n: usize) {
        self.num_params = n;
    }

    /// Upper bound (exclusive) on vertex ids ever allocated.
    #[must_use]
    pub fn id_bound(&self) -> usize {
        self.vertices.len()
    }

    #[must_use]
    pub fn num_vertices(&self) -> usize {
        self.live
    }

    #[must_use]
    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn add_vertex(&mut self, kind: VertexKind, layer: Layer, phase: Phase) -> usize {
        self.num_params = self.num_params.max(phase.parity.width());
        self.vertices.push(Some(Vertex { kind, layer, phase }));
        self.adjacency.push(BTreeMap::new());
        self.live += 1;
        self.vertices.len() - 1
    }

    pub fn add_spider(&mut self, color: Color, layer: Layer, phase: Phase) -> usize {
        self.add_vertex(VertexKind::Spider(color), layer, phase)
    }

    pub fn add_z(&mut self, phase: Phase) -> usize {
        self.add_spider(Color::Z, Layer::Classical, phase)
    }

    pub fn add_boundary(&mut self, layer: Layer) -> usize {
        self.add_vertex(VertexKind::Boundary, layer, Phase::zero())
    }

    pub fn remove_vertex(&mut self, v: usize) {
        let nbrs: Vec<usize> = self.adjacency[v].keys().copied().collect();
        for n in nbrs {
            self.adjacency[n].remove(&v);
        }
        self.adjacency[v].clear();
        if self.vertices[v].take().is_some() {
            self.live -= 1;
        }
    }

    #[must_use]
    pub fn contains(&self, v: usize) -> bool {
        v < self.vertices.len() && self.vertices[v].is_some()
    }

    /// # Panics
    /// If `v` is not a live vertex.
    #[must_use]
    pub fn vertex(&self, v: usize) -> &Vertex {
        self.vertices[v].as_ref().expect("vertex removed")
    }

    #[must_use]
    pub fn phase(&self, v: usize) -> &Phase {
        &self.vertex(v).phase
    }

    /// # Panics
    /// If `v` is not a live vertex.
    pub fn phase_mut(&mut self, v: usize) -> &mut Phase {
        &mut self.vertices[v].as_mut().expect("vertex removed").phase
    }

    pub fn set_phase(&mut self, v: usize, phase: Phase) {
        self.num_params = self.num_params.max(phase.parity.width());
        *self.phase_mut(v) = phase;
    }

    pub fn add_to_phase(&mut self, v: usize, delta: &Phase) {
        self.num_params = self.num_params.max(delta.parity.width());
        *self.phase_mut(v) += delta;
    }

    pub fn set_color(&mut self, v: usize, color: Color) {
        self.vertices[v].as_mut().expect("vertex removed").kind = VertexKind::Spider(color);
    }

    pub fn set_layer(&mut self, v: usize, layer: Layer) {
        self.vertices[v].as_mut().expect("vertex removed").layer = layer;
    }

    #[must_use]
    pub fn is_boundary(&self, v: usize) -> bool {
        self.vertex(v).is_boundary()
    }

    /// Live vertex ids in increasing order.
    pub fn vertex_ids(&self) -> impl DoubleEndedIterator<Item = usize> + '_ {
        self.vertices
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.as_ref().map(|_| i))
    }

    #[must_use]
    pub fn edge(&self, u: usize, v: usize) -> Option<EdgeKind> {
        self.adjacency[u].get(&v).copied()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, EdgeKind)> + '_ {
        self.adjacency[v].iter().map(|(&n, &k)| (n, k))
    }

    #[must_use]
    pub fn neighbor_ids(&self, v: usize) -> Vec<usize> {
        self.adjacency[v].keys().copied().collect()
    }

    #[must_use]
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// True if some neighbor of `v` is a boundary vertex.
    #[must_use]
    pub fn touches_boundary(&self, v: usize) -> bool {
        self.adjacency[v].keys().any(|&n| self.is_boundary(n))
    }

    /// Inserts an edge with no parallel-edge bookkeeping. `u` and `v` must not be adjacent.
    pub fn insert_edge_raw(&mut self, u: usize, v: usize, kind: EdgeKind) {
        debug_assert!(u != v && !self.adjacency[u].contains_key(&v));
        self.adjacency[u].insert(v, kind);
        self.adjacency[v].insert(u, kind);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.adjacency[u].remove(&v);
        self.adjacency[v].remove(&u);
    }

    pub fn set_edge_kind(&mut self, u: usize, v: usize, kind: EdgeKind) {
        debug_assert!(self.adjacency[u].contains_key(&v));
        self.adjacency[u].insert(v, kind);
        self.adjacency[v].insert(u, kind);
    }

    /// Adds an edge, resolving self-loops and parallel edges on the spot.
    ///
    /// Scalars from the resolution are multiplied into the ledger. When either
    /// endpoint is doubled, the resolution happens in both copies, so the
    /// scalar is squared.
    ///
    /// # Panics
    /// If the new edge would be parallel to an edge at a boundary vertex.
    pub fn add_edge(&mut self, u: usize, v: usize, kind: EdgeKind) {
        let doubled = self.vertex(u).layer == Layer::Quantum || self.vertex(v).layer == Layer::Quantum;
        let mult = if doubled { 2 } else { 1 };
        if u == v {
            if kind == EdgeKind::Hadamard {
                self.add_to_phase(u, &Phase::quarter_turns(4));
                self.scalar.scale_sqrt2(-mult);
            }
            return;
        }
        let Some(old) = self.edge(u, v) else {
            self.insert_edge_raw(u, v, kind);
            return;
        };
        let (cu, cv) = match (self.vertex(u).color(), self.vertex(v).color()) {
            (Some(a), Some(b)) => (a, b),
            _ => panic!("parallel edge at boundary vertex {u}-{v}"),
        };
        let same = cu == cv;
        let (result, pi, power) = match (same, old == kind) {
            (true, true) if kind == EdgeKind::Plain => (Some(EdgeKind::Plain), false, 0),
            (true, true) => (None, false, -2),
            (true, false) => (Some(EdgeKind::Plain), true, -1),
            (false, true) if kind == EdgeKind::Plain => (None, false, -2),
            (false, true) => (Some(EdgeKind::Hadamard), false, 0),
            (false, false) => (Some(EdgeKind::Hadamard), true, -1),
        };
        match result {
            Some(k) => self.set_edge_kind(u, v, k),
            None => self.remove_edge(u, v),
        }
        if pi {
            let target = if self.vertex(v).layer == Layer::Quantum { v } else { u };
            self.add_to_phase(target, &Phase::quarter_turns(4));
        }
        self.scalar.scale_sqrt2(power * mult);
    }

    #[must_use]
    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    #[must_use]
    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn set_inputs(&mut self, inputs: Vec<usize>) {
        self.inputs = inputs;
    }

    pub fn set_outputs(&mut self, outputs: Vec<usize>) {
        self.outputs = outputs;
    }

    /// Every parity referenced by a vertex phase, by vertex id.
    pub fn parities(&self) -> impl Iterator<Item = &Parity> + '_ {
        self.vertex_ids().map(|v| &self.vertex(v).phase.parity)
    }

    /// Rewrites every vertex parity (not the ledger) through `map`.
    pub fn substitute_parities(&mut self, map: &[Parity], num_params: usize) {
        for v in self.vertices.iter_mut().flatten() {
            v.phase.parity = v.phase.parity.substitute(map);
        }
        self.num_params = num_params;
    }

    /// Splits every doubled vertex into two conjugate copies.
    ///
    /// Each quantum vertex `v` becomes `v₁` (same phase) and `v₂` (negated
    /// constant, same parity); quantum edges are copied into both layers, and
    /// classical vertices attach to both copies of a quantum neighbor. A
    /// doubled boundary becomes two boundaries, first copy first.
    #[must_use]
    pub fn undouble(&self) -> ParamZXDiagram {
        let mut out = ParamZXDiagram::new(self.num_params);
        out.scalar = self.scalar.clone();
        let mut map: Vec<Option<(usize, Option<usize>)>> = vec![None; self.vertices.len()];
        for v in self.vertex_ids() {
            let vx = self.vertex(v);
            let first = out.add_vertex(vx.kind, Layer::Classical, vx.phase.clone());
            let second =
                (vx.layer == Layer::Quantum).then(|| out.add_vertex(vx.kind, Layer::Classical, vx.phase.conjugate()));
            map[v] = Some((first, second));
        }
        for u in self.vertex_ids() {
            for (v, kind) in self.neighbors(u) {
                if v < u {
                    continue;
                }
                let (u1, u2) = map[u].expect("mapped");
                let (v1, v2) = map[v].expect("mapped");
                match (u2, v2) {
                    (Some(u2), Some(v2)) => {
                        out.add_edge(u1, v1, kind);
                        out.add_edge(u2, v2, kind);
                    }
                    (None, Some(v2)) => {
                        out.add_edge(u1, v1, kind);
                        out.add_edge(u1, v2, kind);
                    }
                    (Some(u2), None) => {
                        out.add_edge(u1, v1, kind);
                        out.add_edge(u2, v1, kind);
                    }
                    (None, None) => out.add_edge(u1, v1, kind),
                }
            }
        }
        let expand = |ids: &[usize]| -> Vec<usize> {
            ids.iter()
                .flat_map(|&b| {
                    let (b1, b2) = map[b].expect("mapped");
                    std::iter::once(b1).chain(b2)
                })
                .collect()
        };
        out.inputs = expand(&self.inputs);
        out.outputs = expand(&self.outputs);
        out
    }

    /// Sequential composition: outputs of `self` feed inputs of `next`.
    ///
    /// # Panics
    /// If the boundary counts or layers disagree.
    #[must_use]
    pub fn compose(&self, next: &ParamZXDiagram) -> ParamZXDiagram {
        assert_eq!(self.outputs.len(), next.inputs.len(), "boundary mismatch");
        let mut out = self.clone();
        out.num_params = self.num_params.max(next.num_params);
        out.scalar.absorb(&next.scalar);
        let offset = out.vertices.len();
        for v in &next.vertices {
            out.vertices.push(v.clone());
            out.adjacency.push(BTreeMap::new());
        }
        out.live += next.live;
        for u in next.vertex_ids() {
            for (v, kind) in next.neighbors(u) {
                if v > u {
                    out.insert_edge_raw(u + offset, v + offset, kind);
                }
            }
        }
        for (&b1, &b2) in self.outputs.iter().zip(&next.inputs) {
            let b2 = b2 + offset;
            let layer = out.vertex(b1).layer;
            assert_eq!(layer, out.vertex(b2).layer, "layer mismatch");
            let (n1, k1) = out.neighbors(b1).next().expect("boundary has a neighbor");
            let (n2, k2) = out.neighbors(b2).next().expect("boundary has a neighbor");
            out.remove_vertex(b1);
            out.remove_vertex(b2);
            let mid = out.add_spider(Color::Z, layer, Phase::zero());
            let n1 = if n1 == b2 { mid } else { n1 };
            let n2 = if n2 == b1 { mid } else { n2 };
            if n1 != mid {
                out.add_edge(mid, n1, k1);
            }
            if n2 != mid {
                out.add_edge(mid, n2, k2);
            }
        }
        out.outputs = next.outputs.iter().map(|&b| b + offset).collect();
        out
    }

    /// Rewrites every vertex parity through `f` and sets the parameter count.
    pub fn map_parities(&mut self, num_params: usize, mut f: impl FnMut(&Parity) -> Parity) {
        for v in self.vertices.iter_mut().flatten() {
            v.phase.parity = f(&v.phase.parity);
        }
        self.num_params = num_params;
    }

    /// Connected components as sorted vertex lists, ordered by smallest id.
    #[must_use]
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.vertices.len()];
        let mut out = Vec::new();
        for start in self.vertex_ids() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &n in self.adjacency[v].keys() {
                    if !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Copy of the subgraph induced by `vertices` with a unit scalar.
    ///
    /// Vertex ids are renumbered in the order given; `outputs` uses old ids.
    #[must_use]
    pub fn subdiagram(&self, vertices: &[usize], outputs: &[usize]) -> ParamZXDiagram {
        let mut out = ParamZXDiagram::new(self.num_params);
        let mut map = vec![usize::MAX; self.vertices.len()];
        for &v in vertices {
            let vx = self.vertex(v);
            map[v] = out.add_vertex(vx.kind, vx.layer, vx.phase.clone());
        }
        for &u in vertices {
            for (v, kind) in self.neighbors(u) {
                if v > u && map[v] != usize::MAX {
                    out.insert_edge_raw(map[u], map[v], kind);
                }
            }
        }
        out.outputs = outputs.iter().map(|&b| map[b]).collect();
        out.num_params = self.num_params;
        out
    }

    /// Turns boundary `b` into a one-legged Z spider with `phase`, optionally
    /// toggling the kind of its edge. The vertex keeps its id and leaves the
    /// input and output lists.
    pub fn cap_boundary(&mut self, b: usize, phase: Phase, toggle_edge: bool) {
        assert!(self.is_boundary(b), "vertex {b} is not a boundary");
        if toggle_edge {
            let first = self.neighbors(b).next();
            if let Some((n, k)) = first {
                self.set_edge_kind(b, n, k.toggled());
            }
        }
        self.num_params = self.num_params.max(phase.parity.width());
        let vx = self.vertices[b].as_mut().expect("vertex removed");
        vx.kind = VertexKind::Spider(Color::Z);
        vx.phase = phase;
        self.inputs.retain(|&x| x != b);
        self.outputs.retain(|&x| x != b);
    }

    /// Plain-text adjacency dump used by golden tests.
    #[must_use]
    pub fn to_debug_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "zx params={} vertices={} edges={}",
            self.num_params,
            self.num_vertices(),
            self.num_edges()
        );
        for v in self.vertex_ids() {
            let vx = self.vertex(v);
            let kind = match vx.kind {
                VertexKind::Boundary => "B",
                VertexKind::Spider(Color::Z) => "Z",
                VertexKind::Spider(Color::X) => "X",
            };
            let layer = match vx.layer {
                Layer::Quantum => "q",
                Layer::Classical => "c",
            };
            let _ = write!(s, "v {v} {kind} {layer} {}", vx.phase);
            for (n, k) in self.neighbors(v) {
                let _ = write!(s, " {}{n}", if k == EdgeKind::Hadamard { "h" } else { "-" });
            }
            s.push('\n');
        }
        let list = |ids: &[usize]| ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "in {}", list(&self.inputs));
        let _ = writeln!(s, "out {}", list(&self.outputs));
        let _ = writeln!(
            s,
            "scalar {:.12} {:.12}",
            self.scalar.constant.re, self.scalar.constant.im
        );
        for t in &self.scalar.terms {
            let _ = writeln!(s, "t {t}");
        }
        s
    }
}

impl fmt::Display for ParamZXDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_debug_string())
    }
}
