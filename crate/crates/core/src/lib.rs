//! Remote two-qubit state creation through boundary-tuned XY spin chains.

pub mod basis;
pub mod chainopt;
pub mod disorder;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod inverse;
pub mod optim;
pub mod probing;
pub mod receiver;
pub mod reference;

pub use basis::{ExcitationBasis, SenderState};
pub use chainopt::{optimize_boundary, BoundaryOptimum, BoundarySearch};
pub use dynamics::{diagonalize, EvolvedState, SpectralData, TransferAmplitudes};
pub use error::{Error, Result};
pub use hamiltonian::{ChainSpec, HamiltonianBlocks};
pub use inverse::{solve_general, solve_werner, InverseSolution, SolveOptions, TargetState};
pub use receiver::{
    assemble_rho, compute_line_params, Family, LineParams, ParamKey, ReceiverState,
};
