//! Hermitian operators over labelled tensor-product spaces.

mod json;
mod layout;
mod operator;
mod pauli;
mod trace_replace;

pub use json::{layout_from_json, layout_to_json, OperatorJson, SubsystemJson};
pub use layout::{Layout, Party, Subsystem, MAX_DIMENSION};
pub use operator::{hermitian_deviation, CMat, Operator, C64};
pub use pauli::{from_pauli, pauli_string_matrix, to_pauli, Pauli, PauliExpansion, PauliString};
pub use trace_replace::TraceReplace;

pub(crate) use operator::{hermitian_part, hs_inner_matrices};

/// Threshold for PSD and Hermiticity checks: relative to a scale (usually the
/// operator norm) unless an absolute override is set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: Option<f64>,
}

impl Tolerance {
    pub const fn relative(relative: f64) -> Self {
        Tolerance { relative, absolute: None }
    }

    pub const fn absolute(absolute: f64) -> Self {
        Tolerance { relative: 0.0, absolute: Some(absolute) }
    }

    pub fn threshold(&self, scale: f64) -> f64 {
        self.absolute.unwrap_or(self.relative * scale)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::relative(1e-9)
    }
}
