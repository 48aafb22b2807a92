//! Turning a lowered circuit into a fast sampler.

pub mod basis;
pub mod chain;
pub mod channels;
pub mod components;
pub mod decompose;
pub mod dem;
pub mod tensors;

use std::fmt;

use crate::bits::{BitMatrix, BitVec};
use crate::circuit::{circuit_stats, Circuit};
use crate::lower::{lower, LowerError, LoweredProgram, OutputLabel, SampleMode};
use crate::simplify::{clifford_simplify, RewriteTrace};
use crate::zx::Parity;

pub use basis::{basis_reduce, BasisTransform};
pub use chain::{build_marginal_chain, marginal_diagram, ChainError, MarginalChain};
pub use channels::{reduce_channels, ErrorMechanism, ErrorModel, JointMechanism};
pub use components::{separate_components, ComponentDiagram, DirectOutput, Separation};
pub use decompose::{
    decompose_group, decompose_magic, gadget_identity_error, plan_decomposition, DecompositionPlan, GroupKind,
};
pub use dem::export_dem;
pub use tensors::{assemble_tensors, PhaseTermTensors};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error(transparent)]
    Lower(#[from] LowerError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("parity {0} is outside the noise basis")]
    Inexpressible(String),
}

/// Output read as a fixed bit XOR a parity of f-parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectReadout {
    pub output: usize,
    pub flip: bool,
    /// f-parameters whose XOR flips the output.
    pub combo: Vec<usize>,
}

/// A component sampled output by output.
#[derive(Clone, Debug)]
pub struct CompiledComponent {
    /// Global output indices in sampling order.
    pub outputs: Vec<usize>,
    /// Global f-index of each local noise parameter.
    pub f_indices: Vec<usize>,
    pub chain: MarginalChain,
}

/// Which outputs each mechanism flips; rows are outputs, columns mechanisms.
///
/// Columns list single mechanisms first, then every joint-group bit in order.
/// Outputs of sequential components have empty rows.
#[derive(Clone, Debug, PartialEq)]
pub struct FlipMatrix {
    pub rows: BitMatrix,
    /// Sparse column view: flipped output indices per mechanism.
    pub columns: Vec<Vec<usize>>,
}

/// Summary of a compilation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CompiledStats {
    /// Largest planned term count over all marginal diagrams.
    pub chi: u64,
    /// Largest planned rate over all marginal diagrams.
    pub rate: f64,
    pub num_magic: usize,
    pub num_mechanisms: usize,
    pub num_joint_groups: usize,
    pub rank: usize,
    pub max_weight: usize,
    pub mean_flips: f64,
    pub num_direct: usize,
    /// Detectors left to sequential sampling.
    pub unseparated_detectors: usize,
    /// Per component: planned χ and actual term count per chain entry.
    pub components: Vec<ComponentStats>,
    pub trace: RewriteTrace,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComponentStats {
    pub outputs: usize,
    pub planned_terms: Vec<u64>,
    pub term_counts: Vec<usize>,
}

impl fmt::Display for CompiledStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "chi={}", self.chi)?;
        writeln!(f, "rate={:.6}", self.rate)?;
        writeln!(f, "num_magic={}", self.num_magic)?;
        writeln!(f, "num_error_mechanisms={}", self.num_mechanisms)?;
        writeln!(f, "num_joint_groups={}", self.num_joint_groups)?;
        writeln!(f, "rank={}", self.rank)?;
        writeln!(f, "max_flip_weight={}", self.max_weight)?;
        writeln!(f, "mean_flips_per_shot={:.6e}", self.mean_flips)?;
        writeln!(f, "direct_outputs={}", self.num_direct)?;
        writeln!(f, "unseparated_detectors={}", self.unseparated_detectors)?;
        writeln!(f, "components={}", self.components.len())?;
        for (i, c) in self.components.iter().enumerate() {
            let join = |v: Vec<String>| v.join(",");
            writeln!(
                f,
                "component.{i} outputs={} planned_terms={} term_counts={}",
                c.outputs,
                join(c.planned_terms.iter().map(ToString::to_string).collect()),
                join(c.term_counts.iter().map(ToString::to_string).collect()),
            )?;
        }
        Ok(())
    }
}

/// Everything needed to sample a circuit, fixed after compilation.
#[derive(Clone, Debug)]
pub struct CompiledSampler {
    pub mode: SampleMode,
    pub labels: Vec<OutputLabel>,
    pub num_detectors: usize,
    pub num_observables: usize,
    pub basis: BasisTransform,
    pub model: ErrorModel,
    pub direct: Vec<DirectReadout>,
    pub components: Vec<CompiledComponent>,
    /// Coordinates per detector, possibly empty.
    pub detector_coords: Vec<Vec<f64>>,
    pub stats: CompiledStats,
}

impl CompiledSampler {
    #[must_use]
    pub fn num_outputs(&self) -> usize {
        self.labels.len()
    }

    /// True when every output is a parity of noise bits.
    #[must_use]
    pub fn is_deterministic(&self) -> bool {
        self.components.is_empty()
    }

    /// True when no detector needs sequential sampling.
    #[must_use]
    pub fn separation_complete(&self) -> bool {
        self.stats.unseparated_detectors == 0
    }

    /// Output rows flipped by an f-signature, through the direct readouts.
    #[must_use]
    pub fn output_signature(&self, f_sig: &BitVec) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .direct
            .iter()
            .filter(|d| d.combo.iter().filter(|&&i| f_sig.get(i)).count() % 2 == 1)
            .map(|d| d.output)
            .collect();
        out.sort_unstable();
        out
    }

    /// Mechanism-to-output incidence.
    #[must_use]
    pub fn flip_matrix(&self) -> FlipMatrix {
        let sigs: Vec<&BitVec> = self
            .model
            .mechanisms
            .iter()
            .map(|m| &m.signature)
            .chain(self.model.joint.iter().flat_map(|j| j.signatures.iter()))
            .collect();
        let mut rows = BitMatrix::zeros(self.num_outputs(), sigs.len());
        let mut columns = Vec::with_capacity(sigs.len());
        for (c, s) in sigs.iter().enumerate() {
            let col = self.output_signature(s);
            for &r in &col {
                rows.set(r, c, true);
            }
            columns.push(col);
        }
        FlipMatrix { rows, columns }
    }
}

fn express(basis: &BasisTransform, p: &Parity) -> Result<Parity, CompileError> {
    basis
        .express(p)
        .ok_or_else(|| CompileError::Inexpressible(p.to_string()))
}

/// Lowers and compiles a circuit.
///
/// # Errors
/// Lowering failures, or internal failures during decomposition.
pub fn compile(c: &Circuit, mode: SampleMode) -> Result<CompiledSampler, CompileError> {
    let program = lower(c, mode)?;
    let coords = c.detectors.iter().map(|d| d.coords.clone()).collect();
    let mut cs = compile_program(&program, coords)?;
    cs.stats.num_magic = circuit_stats(c).num_magic;
    Ok(cs)
}

/// Compiles an already lowered program.
///
/// # Errors
/// Internal failures during decomposition or basis rewriting.
pub fn compile_program(p: &LoweredProgram, detector_coords: Vec<Vec<f64>>) -> Result<CompiledSampler, CompileError> {
    let (reduced, trace) = clifford_simplify(&p.diagram);
    let sep = separate_components(&reduced, &p.outputs);
    let component_parities: Vec<Parity> = sep
        .components
        .iter()
        .flat_map(|c| c.diagram.parities().cloned().collect::<Vec<_>>())
        .collect();
    let basis = basis_reduce(
        p.e_param_count,
        sep.direct.iter().map(|d| &d.parity).chain(&component_parities),
    );
    let rank = basis.rank();

    let mut direct = Vec::with_capacity(sep.direct.len());
    for d in &sep.direct {
        direct.push(DirectReadout {
            output: d.output,
            flip: d.flip,
            combo: express(&basis, &d.parity)?.indices().collect(),
        });
    }

    let mut components = Vec::with_capacity(sep.components.len());
    let mut stats = CompiledStats::default();
    for comp in &sep.components {
        let mut g = comp.diagram.clone();
        let mut failure = None;
        g.map_parities(rank, |q| {
            basis.express(q).unwrap_or_else(|| {
                failure = Some(q.to_string());
                Parity::empty()
            })
        });
        if let Some(q) = failure {
            return Err(CompileError::Inexpressible(q));
        }
        let mut f_indices: Vec<usize> = g.parities().flat_map(Parity::indices).collect();
        f_indices.sort_unstable();
        f_indices.dedup();
        let mut local = vec![usize::MAX; rank];
        for (i, &f) in f_indices.iter().enumerate() {
            local[f] = i;
        }
        g.map_parities(f_indices.len(), |q| Parity::from_indices(q.indices().map(|f| local[f])));
        let chain = build_marginal_chain(&g, f_indices.len())?;
        stats.components.push(ComponentStats {
            outputs: comp.outputs.len(),
            planned_terms: chain.plans.iter().map(DecompositionPlan::total_terms).collect(),
            term_counts: chain.term_counts(),
        });
        for plan in &chain.plans {
            stats.chi = stats.chi.max(plan.total_terms());
            stats.rate = stats.rate.max(plan.rate());
        }
        components.push(CompiledComponent {
            outputs: comp.outputs.clone(),
            f_indices,
            chain,
        });
    }
    stats.chi = stats.chi.max(1);

    let signatures: Vec<BitVec> = (0..p.e_param_count).map(|j| basis.column(j)).collect();
    let model = reduce_channels(&p.channels, &signatures, rank);

    stats.num_mechanisms = model.num_mechanisms();
    stats.num_joint_groups = model.joint.len();
    stats.rank = rank;
    stats.max_weight = model.max_weight();
    stats.mean_flips = model.mean_flip_weight();
    stats.num_direct = direct.len();
    stats.unseparated_detectors = sep.unseparated_detectors(&p.outputs);
    stats.trace = trace;

    Ok(CompiledSampler {
        mode: p.mode,
        labels: p.outputs.clone(),
        num_detectors: p.num_detectors,
        num_observables: p.num_observables,
        basis,
        model,
        direct,
        components,
        detector_coords,
        stats,
    })
}
