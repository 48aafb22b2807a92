//! Marginal diagrams for sequential sampling of a component's outputs.

use std::f64::consts::FRAC_1_SQRT_2;

use super::decompose::{decompose_magic, DecomposeError, DecompositionPlan};
use super::tensors::{assemble_tensors, PhaseTermTensors, TensorError};
use crate::simplify::{clifford_simplify, RewriteTrace};
use crate::zx::{ParamZXDiagram, Parity, Phase};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChainError {
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Tensors for the normalization followed by one entry per output.
#[derive(Clone, Debug, Default)]
pub struct MarginalChain {
    /// Parameters: `num_local` noise bits, then one bit per earlier output.
    pub num_local: usize,
    pub entries: Vec<PhaseTermTensors>,
    pub plans: Vec<DecompositionPlan>,
    pub trace: RewriteTrace,
}

impl MarginalChain {
    #[must_use]
    pub fn num_outputs(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    #[must_use]
    pub fn num_params(&self) -> usize {
        self.num_local + self.num_outputs()
    }

    /// Clifford term count of each entry.
    #[must_use]
    pub fn term_counts(&self) -> Vec<usize> {
        self.entries.iter().map(PhaseTermTensors::num_terms).collect()
    }

    /// Probability of `outcome` given the local noise bits `noise`, as a complex
    /// ratio whose imaginary part should vanish.
    #[must_use]
    pub fn outcome_ratio(&self, noise: &[bool], outcome: &[bool]) -> num_complex::Complex64 {
        let mut params = noise.to_vec();
        params.resize(self.num_params(), false);
        let norm = self.entries[0].eval(&params);
        let mut prev = norm;
        for (j, &bit) in outcome.iter().enumerate() {
            let p0 = self.entries[j + 1].eval(&params);
            prev = if bit { prev - p0 } else { p0 };
            params[self.num_local + j] = bit;
        }
        prev / norm
    }
}

/// Closes every output of `component`.
///
/// `upto = None` traces all outputs. `upto = Some(j)` fixes outputs before `j`
/// to their sampled-bit parameters, fixes output `j` to 0 and traces the rest.
#[must_use]
pub fn marginal_diagram(component: &ParamZXDiagram, num_local: usize, upto: Option<usize>) -> ParamZXDiagram {
    let outputs = component.outputs().to_vec();
    let mut d = component.clone();
    d.set_num_params(num_local + outputs.len());
    for (i, &b) in outputs.iter().enumerate() {
        match upto {
            Some(j) if i < j => {
                d.cap_boundary(b, Phase::from_parity(Parity::single(num_local + i)), true);
                d.scalar.scale_real(FRAC_1_SQRT_2);
            }
            Some(j) if i == j => {
                d.cap_boundary(b, Phase::zero(), true);
                d.scalar.scale_real(FRAC_1_SQRT_2);
            }
            _ => d.cap_boundary(b, Phase::zero(), false),
        }
    }
    d
}

/// Builds, reduces and decomposes every marginal diagram of a component.
///
/// # Errors
/// When decomposition fails or a parity falls outside the parameter range.
pub fn build_marginal_chain(component: &ParamZXDiagram, num_local: usize) -> Result<MarginalChain, ChainError> {
    let m = component.outputs().len();
    let mut chain = MarginalChain {
        num_local,
        ..MarginalChain::default()
    };
    for upto in std::iter::once(None).chain((0..m).map(Some)) {
        let closed = marginal_diagram(component, num_local, upto);
        let (reduced, trace) = clifford_simplify(&closed);
        let dec = decompose_magic(&reduced)?;
        chain.trace.fusion += trace.fusion + dec.trace.fusion;
        chain.trace.pivot += trace.pivot + dec.trace.pivot;
        chain.trace.local_complementation += trace.local_complementation + dec.trace.local_complementation;
        chain.entries.push(assemble_tensors(&dec.terms, num_local + m)?);
        chain.plans.push(dec.plan);
    }
    Ok(chain)
}
