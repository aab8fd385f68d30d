//! Numerical thresholds shared by the state and operator checks.
//!
//! Every invariant check in the crate reads its threshold from a
//! [`Tolerances`] value. [`Tolerances::default`] carries the values below;
//! tests that probe the edges construct their own.

/// Max elementwise `|ρ - ρ†|` for a density matrix.
pub const HERMITIAN: f64 = 1e-12;
/// Smallest eigenvalue a density matrix may carry.
pub const MIN_EIGENVALUE: f64 = -1e-10;
/// Allowed excess of the trace above one.
pub const TRACE_EXCESS: f64 = 1e-12;
/// Max elementwise `|U†U - I|` for a unitary.
pub const UNITARY: f64 = 1e-10;
/// Traces below this cannot be normalized (impossible heralding branch).
pub const MIN_TRACE: f64 = 1e-14;
/// First moments above this signal a circuit bug.
pub const FIRST_MOMENT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub min_eigenvalue: f64,
    pub trace_excess: f64,
    pub unitary: f64,
    pub min_trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: HERMITIAN,
            min_eigenvalue: MIN_EIGENVALUE,
            trace_excess: TRACE_EXCESS,
            unitary: UNITARY,
            min_trace: MIN_TRACE,
        }
    }
}
