//! Splitting a reduced diagram into directly readable outputs and the rest.

use crate::lower::OutputLabel;
use crate::zx::{EdgeKind, ParamZXDiagram, Parity};

/// Output whose value is a fixed bit XOR a parity of noise parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectOutput {
    pub output: usize,
    pub flip: bool,
    pub parity: Parity,
}

/// Connected piece of the diagram holding outputs that must be sampled in sequence.
#[derive(Clone, Debug)]
pub struct ComponentDiagram {
    /// Global output indices, in sampling order.
    pub outputs: Vec<usize>,
    /// Closed except for `outputs`, listed in the same order; unit scalar.
    pub diagram: ParamZXDiagram,
}

#[derive(Clone, Debug, Default)]
pub struct Separation {
    pub direct: Vec<DirectOutput>,
    pub components: Vec<ComponentDiagram>,
}

impl Separation {
    /// Number of detector outputs that ended up in sequential components.
    #[must_use]
    pub fn unseparated_detectors(&self, labels: &[OutputLabel]) -> usize {
        self.components
            .iter()
            .flat_map(|c| &c.outputs)
            .filter(|&&o| matches!(labels[o], OutputLabel::Detector(_)))
            .count()
    }
}

fn sampling_rank(label: OutputLabel) -> u8 {
    match label {
        OutputLabel::Observable(_) | OutputLabel::Measurement(_) => 0,
        OutputLabel::Detector(_) => 1,
    }
}

/// Classifies each output of a reduced diagram.
///
/// An output is direct when its component is just the boundary joined by a
/// Hadamard edge to a single Pauli spider. Every other component with outputs
/// is returned as a sub-diagram; observables are sampled before detectors
/// inside a component. Components without outputs only scale the whole
/// distribution and are dropped.
#[must_use]
pub fn separate_components(reduced: &ParamZXDiagram, labels: &[OutputLabel]) -> Separation {
    let outputs = reduced.outputs();
    let mut position = vec![usize::MAX; reduced.id_bound()];
    for (i, &b) in outputs.iter().enumerate() {
        position[b] = i;
    }
    let mut sep = Separation::default();
    for comp in reduced.connected_components() {
        let mut outs: Vec<usize> = comp
            .iter()
            .filter(|&&v| position[v] != usize::MAX)
            .map(|&v| position[v])
            .collect();
        if outs.is_empty() {
            continue;
        }
        if outs.len() == 1 && comp.len() == 2 {
            let b = outputs[outs[0]];
            let (s, kind) = reduced.neighbors(b).next().expect("output has a neighbor");
            let phase = reduced.phase(s);
            if kind == EdgeKind::Hadamard && !reduced.is_boundary(s) && phase.angle.is_pauli() {
                sep.direct.push(DirectOutput {
                    output: outs[0],
                    flip: phase.angle.exact() == 4,
                    parity: phase.parity.clone(),
                });
                continue;
            }
        }
        outs.sort_by_key(|&o| (sampling_rank(labels[o]), o));
        let boundary: Vec<usize> = outs.iter().map(|&o| outputs[o]).collect();
        sep.components.push(ComponentDiagram {
            diagram: reduced.subdiagram(&comp, &boundary),
            outputs: outs,
        });
    }
    sep.direct.sort_by_key(|d| d.output);
    sep.components.sort_by_key(|c| c.outputs.iter().min().copied());
    sep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zx::{Color, Layer, Phase};

    #[test]
    fn direct_and_joint_outputs() {
        let mut d = ParamZXDiagram::new(2);
        let o0 = d.add_boundary(Layer::Classical);
        let s0 = d.add_spider(Color::Z, Layer::Classical, Phase::from_parity(Parity::single(1)));
        d.add_edge(o0, s0, EdgeKind::Hadamard);
        let o1 = d.add_boundary(Layer::Classical);
        let o2 = d.add_boundary(Layer::Classical);
        let s1 = d.add_spider(Color::Z, Layer::Classical, Phase::zero());
        let s2 = d.add_spider(Color::Z, Layer::Classical, Phase::quarter_turns(1));
        d.add_edge(o1, s1, EdgeKind::Hadamard);
        d.add_edge(o2, s2, EdgeKind::Hadamard);
        d.add_edge(s1, s2, EdgeKind::Hadamard);
        d.set_outputs(vec![o0, o1, o2]);
        let labels = [
            OutputLabel::Detector(0),
            OutputLabel::Detector(1),
            OutputLabel::Observable(0),
        ];
        let sep = separate_components(&d, &labels);
        assert_eq!(sep.direct.len(), 1);
        assert_eq!(sep.direct[0].parity, Parity::single(1));
        assert_eq!(sep.components.len(), 1);
        assert_eq!(sep.components[0].outputs, vec![2, 1]);
        assert_eq!(sep.components[0].diagram.num_vertices(), 4);
        assert_eq!(sep.unseparated_detectors(&labels), 1);
    }
}
