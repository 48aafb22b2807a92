//! Parameterized ZX diagrams: phases, scalars, graph structure and tensor semantics.

pub mod diagram;
pub mod phase;
pub mod scalar;
pub mod tensor;

pub use diagram::{Color, EdgeKind, Layer, ParamZXDiagram, Spider, Vertex, VertexKind};
pub use phase::{Angle, Parity, Phase};
pub use scalar::{eval_scalar_term, phase_pair_value, ScalarLedger, ScalarTerm};
pub use tensor::{contract, to_tensor, ContractionOrder, Tensor};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZxError {
    #[error("tensor contraction needs {legs} open legs, limit is {max}")]
    TooLarge { legs: usize, max: usize },
    #[error("assignment has {got} bits, diagram references {need} parameters")]
    AssignmentWidth { got: usize, need: usize },
    #[error("diagram has a boundary vertex missing from its input/output lists")]
    UnlistedBoundary,
}
