//! Closed-form reference models for the distilled and degraded states.
//!
//! These are the first-order (single-photon-level) predictions that the
//! numeric Fock-space circuit is validated against. Correlation signs follow
//! the crate convention: `⟨X_A X_B⟩ ≥ 0` and `v_diff` is the squeezed
//! variance.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::quad::{apply_detection_efficiency, CovarianceSummary};

/// `β = r/(γτ) = 1/(gγτ)`, the ratio of vacuum to two-photon amplitude in
/// the distilled state.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct BetaParam(f64);

/// `β` minimizing the ideal difference variance.
pub const OPTIMAL_BETA: f64 = 1.0 + std::f64::consts::SQRT_2;

/// Detector efficiency assumed when modelling the undistilled, degraded
/// states.
pub const DEFAULT_DETECTION_EFFICIENCY: f64 = 0.5;

impl BetaParam {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta > 0.0 {
            Ok(Self(beta))
        } else {
            Err(Error::OutOfRange {
                name: "beta",
                value: beta,
                range: "(0, ∞)",
            })
        }
    }

    pub fn from_gain(gamma: f64, tau: f64, gain: f64) -> Result<Self> {
        Self::new(1.0 / (gain * gamma * tau))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Position sum and difference variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumDiff {
    pub v_diff: f64,
    pub v_sum: f64,
}

impl From<&CovarianceSummary> for SumDiff {
    fn from(cov: &CovarianceSummary) -> Self {
        Self {
            v_diff: cov.v_diff(),
            v_sum: cov.v_sum(),
        }
    }
}

/// Moments of the pure state `(β|00⟩ + |11⟩)/√(1+β²)`:
/// diagonal `(β²+3)/(2(β²+1))`, cross `β/(β²+1)`.
pub fn ideal_covariance(beta: BetaParam) -> CovarianceSummary {
    let b = beta.value();
    let b2 = b * b;
    CovarianceSummary::phase_symmetric(
        (b2 + 3.0) / (2.0 * (b2 + 1.0)),
        (b2 + 3.0) / (2.0 * (b2 + 1.0)),
        b / (b2 + 1.0),
    )
}

/// `(β² + 3 ∓ 2β)/(β² + 1)`.
pub fn ideal_variances(beta: BetaParam) -> SumDiff {
    let b = beta.value();
    let b2 = b * b;
    SumDiff {
        v_diff: (b2 + 3.0 - 2.0 * b) / (b2 + 1.0),
        v_sum: (b2 + 3.0 + 2.0 * b) / (b2 + 1.0),
    }
}

/// Gain maximizing two-mode squeezing in the ideal model,
/// `g = 1/(γτ(1+√2))`.
pub fn optimal_gain(gamma: f64, tau: f64) -> Result<f64> {
    let gt = gamma * tau;
    if !(gt.is_finite() && gt > 0.0) {
        return Err(Error::OutOfRange {
            name: "gamma*tau",
            value: gt,
            range: "(0, ∞)",
        });
    }
    Ok(1.0 / (gt * OPTIMAL_BETA))
}

fn check_model_inputs(gamma: f64, tau: f64, gain: f64, eta: f64) -> Result<()> {
    check_range("gamma", gamma, 0.0, 1.0, "[0, 1)")?;
    check_range("tau", tau, 0.0, 1.0, "[0, 1]")?;
    check_range("eta", eta, 0.0, 1.0, "[0, 1]")?;
    if !(gain.is_finite() && gain >= 1.0) {
        return Err(Error::OutOfRange {
            name: "gain",
            value: gain,
            range: "[1, ∞)",
        });
    }
    Ok(())
}

/// Single-photon-level model of the distilled state with ancilla efficiency
/// `η`, before detector losses:
///
/// `ρ' = η(r|00⟩ + γτ|11⟩)(⋯)† + (1-η)(γτ)²|10⟩⟨10|`.
///
/// Written in `x = γτ/r = 1/β` so `γτ = 0` stays finite. Fails when the
/// heralding probability vanishes (`γτ = 0` with `η = 0`).
pub fn sp_model_covariance(gamma: f64, tau: f64, gain: f64, eta: f64) -> Result<CovarianceSummary> {
    check_model_inputs(gamma, tau, gain, eta)?;
    let x = gamma * tau * gain;
    let x2 = x * x;
    let den = x2 + eta;
    if den <= 0.0 {
        return Err(Error::HeraldingImpossible { probability: 0.0 });
    }
    let diag_a = (eta * (1.0 + 3.0 * x2) + 3.0 * (1.0 - eta) * x2) / (2.0 * den);
    let diag_b = (eta * (1.0 + 3.0 * x2) + (1.0 - eta) * x2) / (2.0 * den);
    let cross = eta * x / den;
    Ok(CovarianceSummary::phase_symmetric(diag_a, diag_b, cross))
}

/// Trace of the single-photon-level branch, `(ηr² + (γτ)²)/(1 + γ²)`.
pub fn sp_model_herald_probability(gamma: f64, tau: f64, gain: f64, eta: f64) -> Result<f64> {
    check_model_inputs(gamma, tau, gain, eta)?;
    let r = 1.0 / gain;
    let gt = gamma * tau;
    Ok((eta * r * r + gt * gt) / (1.0 + gamma * gamma))
}

/// Trace of the first-order ideal branch including the loss term,
/// `(r² + (γτ)² + r²γ²(1-τ²))/(1 + γ²)`.
pub fn ideal_herald_probability(gamma: f64, tau: f64, gain: f64) -> Result<f64> {
    check_model_inputs(gamma, tau, gain, 1.0)?;
    let r = 1.0 / gain;
    let gt = gamma * tau;
    let g2 = gamma * gamma;
    Ok((r * r + gt * gt + r * r * g2 * (1.0 - tau * tau)) / (1.0 + g2))
}

/// Best inseparability reachable by sending any state through a loss
/// channel of amplitude transmissivity `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterministicBound {
    /// `(1 - τ²)/(1 + τ²)`
    pub value: f64,
    /// Set when `τ = 0`: the channel destroys all correlations.
    pub degenerate: bool,
}

pub fn deterministic_bound(tau: f64) -> Result<DeterministicBound> {
    check_range("tau", tau, 0.0, 1.0, "[0, 1]")?;
    let t2 = tau * tau;
    Ok(DeterministicBound {
        value: (1.0 - t2) / (1.0 + t2),
        degenerate: tau == 0.0,
    })
}

/// Moments of the untruncated two-mode squeezed vacuum with `γ = tanh s`:
/// diagonal `cosh(2s)/2`, cross `sinh(2s)/2`.
pub fn tmsv_covariance(gamma: f64) -> Result<CovarianceSummary> {
    if !(gamma.is_finite() && (0.0..1.0).contains(&gamma)) {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
            range: "[0, 1)",
        });
    }
    let g2 = gamma * gamma;
    let diag = (1.0 + g2) / (2.0 * (1.0 - g2));
    Ok(CovarianceSummary::phase_symmetric(
        diag,
        diag,
        gamma / (1.0 - g2),
    ))
}

/// Undistilled squeezed vacuum after loss `τ` on mode B and detectors of
/// efficiency `η_A`, `η_B`.
pub fn degraded_covariance(
    gamma: f64,
    tau: f64,
    eta_a: f64,
    eta_b: f64,
) -> Result<CovarianceSummary> {
    check_range("tau", tau, 0.0, 1.0, "[0, 1]")?;
    check_range("eta_b", eta_b, 0.0, 1.0, "[0, 1]")?;
    apply_detection_efficiency(&tmsv_covariance(gamma)?, eta_a, tau * tau * eta_b)
}

pub fn degraded_variances(gamma: f64, tau: f64, eta_a: f64, eta_b: f64) -> Result<SumDiff> {
    Ok(SumDiff::from(&degraded_covariance(gamma, tau, eta_a, eta_b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ideal_optimum() {
        let v = ideal_variances(BetaParam::new(OPTIMAL_BETA).unwrap());
        assert_abs_diff_eq!(v.v_diff, 2.0 - 2f64.sqrt(), epsilon = 1e-14);
        assert!((v.v_diff - 0.5858).abs() < 1e-4);
    }

    #[test]
    fn ideal_limits() {
        let v = ideal_variances(BetaParam::new(1e8).unwrap());
        assert_abs_diff_eq!(v.v_diff, 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(v.v_sum, 1.0, epsilon = 1e-7);
        let v = ideal_variances(BetaParam::new(1.0).unwrap());
        assert_eq!((v.v_diff, v.v_sum), (1.0, 3.0));
        assert!(BetaParam::new(0.0).is_err());
        assert!(BetaParam::new(f64::INFINITY).is_err());
    }

    #[test]
    fn ideal_covariance_is_consistent_with_variances() {
        for b in [0.3, 1.0, OPTIMAL_BETA, 7.0] {
            let beta = BetaParam::new(b).unwrap();
            let cov = ideal_covariance(beta);
            let v = ideal_variances(beta);
            assert_abs_diff_eq!(cov.v_diff(), v.v_diff, epsilon = 1e-14);
            assert_abs_diff_eq!(cov.v_sum(), v.v_sum, epsilon = 1e-14);
            assert!(v.v_diff * v.v_sum >= 1.0);
        }
    }

    #[test]
    fn optimal_gain_examples() {
        let g = optimal_gain(0.135, 0.05f64.sqrt()).unwrap();
        assert!((g - 13.7).abs() < 0.05, "{g}");
        let g = optimal_gain(0.18 * 0.22, 1.0).unwrap();
        assert!((g - 10.5).abs() < 0.05, "{g}");
        let g = optimal_gain(1.0 / OPTIMAL_BETA, 1.0).unwrap();
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-15);
        assert!(optimal_gain(0.0, 1.0).is_err());
    }

    #[test]
    fn sp_model_reduces_to_ideal_at_unit_efficiency() {
        let (gamma, tau, gain) = (0.1, 0.5, 12.0);
        let cov = sp_model_covariance(gamma, tau, gain, 1.0).unwrap();
        let ideal = ideal_covariance(BetaParam::from_gain(gamma, tau, gain).unwrap());
        for (a, b) in [
            (cov.xx_a, ideal.xx_a),
            (cov.xx_b, ideal.xx_b),
            (cov.xa_xb, ideal.xa_xb),
            (cov.pa_pb, ideal.pa_pb),
        ] {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn sp_model_without_ancilla() {
        let cov = sp_model_covariance(0.1, 0.5, 12.0, 0.0).unwrap();
        assert_abs_diff_eq!(cov.xx_a, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cov.xx_b, 0.5, epsilon = 1e-15);
        assert_eq!(cov.xa_xb, 0.0);
        assert!(sp_model_covariance(0.0, 0.5, 12.0, 0.0).is_err());
    }

    #[test]
    fn herald_probability_without_squeezing() {
        for eta in [0.0, 0.5, 1.0] {
            let p = sp_model_herald_probability(0.0, 1.0, 10.0, eta).unwrap();
            assert_abs_diff_eq!(p, eta * 0.01, epsilon = 1e-16);
        }
        assert_abs_diff_eq!(ideal_herald_probability(0.0, 1.0, 4.0).unwrap(), 1.0 / 16.0);
    }

    #[test]
    fn deterministic_bound_examples() {
        let b = deterministic_bound(0.05f64.sqrt()).unwrap();
        assert_abs_diff_eq!(b.value, 0.95 / 1.05, epsilon = 1e-15);
        assert!((b.value - 0.905).abs() < 5e-4);
        assert_eq!(deterministic_bound(1.0).unwrap().value, 0.0);
        assert_abs_diff_eq!(deterministic_bound(0.5f64.sqrt()).unwrap().value, 1.0 / 3.0, epsilon = 1e-15);
        let z = deterministic_bound(0.0).unwrap();
        assert!(z.degenerate);
        assert_eq!(z.value, 1.0);
        assert!(deterministic_bound(1.01).is_err());
    }

    #[test]
    fn tmsv_covariance_hyperbolic_form() {
        let gamma: f64 = 0.18;
        let s = gamma.atanh();
        let cov = tmsv_covariance(gamma).unwrap();
        assert_abs_diff_eq!(cov.v_diff(), (-2.0 * s).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(cov.v_diff(), (1.0 - gamma) / (1.0 + gamma), epsilon = 1e-14);
        assert_abs_diff_eq!(cov.v_sum(), (1.0 + gamma) / (1.0 - gamma), epsilon = 1e-14);
    }

    #[test]
    fn degraded_vacuum_limit() {
        let v = degraded_variances(0.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!((v.v_diff, v.v_sum), (1.0, 1.0));
    }

    #[test]
    fn degraded_pump_rotation_prediction() {
        let gamma = 0.18 * 76f64.to_radians().cos();
        let v = degraded_variances(gamma, 1.0, 0.5, 0.5).unwrap();
        assert!((v.v_diff - 0.966).abs() < 0.01, "{v:?}");
        assert!((v.v_sum - 1.044).abs() < 0.01, "{v:?}");
    }
}
