//! State preparation and optical channels: the two-mode squeezed vacuum
//! source, photon loss, the ancilla photon, the beamsplitter, click
//! heralding, and the composed catalysis (NLA) step.
//!
//! Sign conventions:
//! - The two-mode squeezed vacuum is `Σ_n γⁿ |nn⟩` with a positive
//!   coefficient, so `⟨X_A X_B⟩ > 0` and `X_A - X_B` is the squeezed
//!   combination.
//! - The beamsplitter acts on annihilation operators as
//!   `a → t·a + r·b`, `b → t·b - r·a` with `t = √(1 - r²)`; a photon entering
//!   in mode `a` leaves as `t|1,0⟩ - r|0,1⟩`.
//! - The catalysis step mixes the signal (mode B) as the beamsplitter's `a`
//!   input with the ancilla as its `b` input, heralds on the `a` output port
//!   and keeps the `b` output port. With these choices the distilled state
//!   keeps the sign of the input correlation: `r|00⟩ + γτ|11⟩`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{check_range, Error, Result};
use crate::fock::{max_abs_diff, DensityMatrix, HilbertConfig, OperatorMatrix};
use crate::tolerance;

/// Ratio `γ` between consecutive `|nn⟩` amplitudes of a two-mode squeezed
/// vacuum; `γ = tanh s` for squeezing strength `s`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SqueezingParam(f64);

impl SqueezingParam {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && (0.0..1.0).contains(&gamma) {
            Ok(Self(gamma))
        } else {
            Err(Error::OutOfRange {
                name: "gamma",
                value: gamma,
                range: "[0, 1)",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Hyperbolic squeezing strength `s = atanh γ`.
    pub fn strength(self) -> f64 {
        self.0.atanh()
    }
}

/// Loss and catalysis parameters for one distillation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Amplitude transmissivity of the loss channel on mode B.
    pub tau: f64,
    /// Amplitude reflectivity of the catalysis beamsplitter; gain is `1/r`.
    pub reflectivity: f64,
    /// Single-photon preparation efficiency of the ancilla.
    pub eta_ancilla: f64,
}

impl ChannelParams {
    pub fn new(tau: f64, reflectivity: f64, eta_ancilla: f64) -> Result<Self> {
        check_range("tau", tau, 0.0, 1.0, "[0, 1]")?;
        if !(reflectivity.is_finite() && reflectivity > 0.0 && reflectivity <= 1.0) {
            return Err(Error::OutOfRange {
                name: "reflectivity",
                value: reflectivity,
                range: "(0, 1]",
            });
        }
        check_range("eta_ancilla", eta_ancilla, 0.0, 1.0, "[0, 1]")?;
        Ok(Self {
            tau,
            reflectivity,
            eta_ancilla,
        })
    }

    /// Parameters for NLA gain `g = 1/r`, which must be at least 1.
    pub fn from_gain(tau: f64, gain: f64, eta_ancilla: f64) -> Result<Self> {
        if !(gain.is_finite() && gain >= 1.0) {
            return Err(Error::OutOfRange {
                name: "gain",
                value: gain,
                range: "[1, ∞)",
            });
        }
        Self::new(tau, 1.0 / gain, eta_ancilla)
    }

    pub fn gain(&self) -> f64 {
        1.0 / self.reflectivity
    }
}

fn require_modes(config: &HilbertConfig, modes: usize, what: &str) -> Result<()> {
    if config.mode_count() == modes {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "{what} needs a {modes}-mode space, got {} modes",
            config.mode_count()
        )))
    }
}

/// Two-mode squeezed vacuum `∝ Σ_{n ≤ n_max} γⁿ |nn⟩`, normalized within the
/// cutoff.
pub fn tmsv_state(gamma: SqueezingParam, config: HilbertConfig) -> Result<DensityMatrix> {
    require_modes(&config, 2, "tmsv_state")?;
    let g = gamma.value();
    let mut psi = nalgebra::DVector::zeros(config.dim());
    let mut amp = 1.0;
    for n in 0..=config.n_max() {
        psi[config.index(&[n, n])] = C64::new(amp, 0.0);
        amp *= g;
    }
    let norm = psi.norm();
    DensityMatrix::from_pure(config, &(psi / C64::new(norm, 0.0)))
}

/// Squeezing after rotating the pump polarization by `theta` radians:
/// `γ cos θ`. `theta` is expected in `[0, π/2]`.
pub fn pump_rotation_degrade(gamma: SqueezingParam, theta: f64) -> SqueezingParam {
    SqueezingParam(gamma.value() * theta.cos().clamp(0.0, 1.0))
}

/// Single-mode photon-loss Kraus operators
/// `K_k = Σ_n √C(n,k) τ^{n-k} (1-τ²)^{k/2} |n-k⟩⟨n|`, `k = 0..=n_max`.
pub fn loss_kraus_operators(n_max: usize, tau: f64) -> Result<Vec<DMatrix<C64>>> {
    check_range("tau", tau, 0.0, 1.0, "[0, 1]")?;
    let d = n_max + 1;
    let leak = (1.0 - tau * tau).max(0.0).sqrt();
    let ops = (0..d)
        .map(|k| {
            let mut op = DMatrix::zeros(d, d);
            for n in k..d {
                let amp = binomial(n, k).sqrt() * tau.powi((n - k) as i32) * leak.powi(k as i32);
                op[(n - k, n)] = C64::new(amp, 0.0);
            }
            op
        })
        .collect();
    Ok(ops)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Max elementwise `|Σ K†K - I|` of a Kraus family.
pub fn kraus_completeness_deviation(ops: &[DMatrix<C64>]) -> f64 {
    let Some(first) = ops.first() else {
        return f64::INFINITY;
    };
    let d = first.nrows();
    let sum = ops
        .iter()
        .fold(DMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
    max_abs_diff(&sum, &DMatrix::identity(d, d))
}

/// Photon loss with amplitude transmissivity `tau` on `mode`.
pub fn loss_channel(state: &DensityMatrix, mode: usize, tau: f64) -> Result<DensityMatrix> {
    let config = state.config();
    config.check_mode(mode)?;
    let ops = loss_kraus_operators(config.n_max(), tau)?;
    let deviation = kraus_completeness_deviation(&ops);
    if deviation > tolerance::HERMITIAN {
        return Err(Error::InvalidState(format!(
            "loss Kraus family incomplete (deviation {deviation:e})"
        )));
    }
    let mut out = DensityMatrix::zeros(config);
    for k in &ops {
        let full = OperatorMatrix::embed(config, &[mode], k)?;
        out.accumulate(&state.sandwich(full.matrix()));
    }
    Ok(out)
}

/// Ancilla prepared as `η|1⟩⟨1| + (1-η)|0⟩⟨0|` in a single-mode space.
pub fn ancilla_photon(eta: f64, config: HilbertConfig) -> Result<DensityMatrix> {
    require_modes(&config, 1, "ancilla_photon")?;
    check_range("eta", eta, 0.0, 1.0, "[0, 1]")?;
    let mut weights = vec![0.0; config.dim()];
    weights[0] = 1.0 - eta;
    weights[1] = eta;
    DensityMatrix::diagonal(config, &weights)
}

/// Beamsplitter unitary `exp[θ(a†b - b†a)]`, `sin θ = r`, acting on
/// `mode_a` and `mode_b` of `config`.
///
/// The generator is truncated at the cutoff, so the result is exactly
/// unitary on the truncated space and exact on every subspace with total
/// photon number `≤ n_max`.
pub fn beamsplitter_unitary(
    config: HilbertConfig,
    mode_a: usize,
    mode_b: usize,
    r: f64,
) -> Result<OperatorMatrix> {
    config.check_mode(mode_a)?;
    config.check_mode(mode_b)?;
    if mode_a == mode_b {
        return Err(Error::SameMode(mode_a));
    }
    check_range("reflectivity", r, 0.0, 1.0, "[0, 1]")?;
    let pair = config.with_mode_count(2)?;
    let a = OperatorMatrix::annihilation(pair, 0)?;
    let b = OperatorMatrix::annihilation(pair, 1)?;
    // H = i(a†b - b†a), so exp(-iθH) = exp[θ(a†b - b†a)].
    let hop = (&a.adjoint() * &b).sub(&(&b.adjoint() * &a))?;
    let generator = hop.scale(C64::new(0.0, 1.0));
    let local = OperatorMatrix::unitary_from_hermitian(&generator, r.asin())?;
    OperatorMatrix::embed(config, &[mode_a, mode_b], local.matrix())
}

pub fn beamsplitter(
    state: &DensityMatrix,
    mode_a: usize,
    mode_b: usize,
    r: f64,
) -> Result<DensityMatrix> {
    let u = beamsplitter_unitary(state.config(), mode_a, mode_b, r)?;
    state.apply_unitary(&u)
}

/// Unnormalized reduced branch after a click on `mode`:
/// `Tr_mode[(I⊗E) ρ (I⊗E)]` with `E = I - |0⟩⟨0|`. Its trace is the click
/// probability.
pub fn herald_click_branch(state: &DensityMatrix, mode: usize) -> Result<DensityMatrix> {
    let config = state.config();
    config.check_mode(mode)?;
    let dim = config.dim();
    let lit: Vec<bool> = (0..dim).map(|i| config.occupation(i, mode) > 0).collect();
    let m = state.matrix();
    let masked = DMatrix::from_fn(dim, dim, |i, j| {
        if lit[i] && lit[j] {
            m[(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    DensityMatrix::from_raw(config, masked)?.partial_trace(mode)
}

/// Conditions on a non-number-resolving click on `mode`, traces that mode
/// out, and returns the normalized conditional state with the click
/// probability.
pub fn herald_click(state: &DensityMatrix, mode: usize) -> Result<(DensityMatrix, f64)> {
    let branch = herald_click_branch(state, mode)?;
    let p = branch.trace();
    if !(p >= tolerance::MIN_TRACE) {
        return Err(Error::HeraldingImpossible { probability: p });
    }
    branch.normalize()
}

/// Quantum catalysis on mode B of a two-mode state: an ancilla photon of
/// efficiency `η` meets mode B on a beamsplitter of reflectivity `r`, and a
/// click in the port fed by B's transmission heralds success. Returns the
/// distilled `(A, B)` state and the heralding probability.
///
/// Only `reflectivity` and `eta_ancilla` of `params` are used here; the
/// loss `tau` belongs to the preceding channel (see [`distill`]).
pub fn nla_catalysis(
    epr: &DensityMatrix,
    params: &ChannelParams,
) -> Result<(DensityMatrix, f64)> {
    let (branch, p) = nla_catalysis_branch(epr, params)?;
    if !(p >= tolerance::MIN_TRACE) {
        return Err(Error::HeraldingImpossible { probability: p });
    }
    branch.normalize()
}

/// Unnormalized heralded branch of [`nla_catalysis`] and its trace.
pub fn nla_catalysis_branch(
    epr: &DensityMatrix,
    params: &ChannelParams,
) -> Result<(DensityMatrix, f64)> {
    let config = epr.config();
    require_modes(&config, 2, "nla_catalysis")?;
    let ancilla = ancilla_photon(params.eta_ancilla, config.with_mode_count(1)?)?;
    let joint = epr.tensor(&ancilla)?;
    let mixed = beamsplitter(&joint, 1, 2, params.reflectivity)?;
    let branch = herald_click_branch(&mixed, 1)?;
    let p = branch.trace();
    Ok((branch, p))
}

/// Full distillation chain: squeezed vacuum, loss `τ` on mode B, catalysis.
pub fn distill(
    gamma: SqueezingParam,
    params: &ChannelParams,
    config: HilbertConfig,
) -> Result<(DensityMatrix, f64)> {
    let epr = tmsv_state(gamma, config)?;
    let lossy = loss_channel(&epr, 1, params.tau)?;
    nla_catalysis(&lossy, params)
}
