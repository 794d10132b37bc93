//! Process matrices, causal-order cones and witnesses of causal nonseparability.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: Hermitian operators on labelled tensor-product spaces, partial
//!   traces, the trace-and-replace map and the Pauli basis.
//! * [`spaces`]: validity and causal-order subspaces for the bipartite scenario
//!   and the tripartite scenario where the third party has no output.
//! * [`conic`]: a small dense primal-dual interior-point solver for semidefinite
//!   programs with Hermitian matrix blocks.
//! * [`robustness`]: random and generalised robustness, witness construction
//!   (optionally restricted) and witness verification.
//! * [`catalog`]: concrete processes and witnesses (the `W_{η1,η2}` family, the
//!   quantum switch and its noisy variants, tabulated switch witnesses).
//! * [`born`]: instruments, the generalised Born rule and Monte-Carlo
//!   estimation of witness values.

pub mod born;
pub mod catalog;
pub mod conic;
mod error;
pub mod robustness;
pub mod spaces;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{Layout, Operator, Party, Pauli, PauliExpansion, PauliString, Subsystem, Tolerance};
