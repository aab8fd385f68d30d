//! Quadrature statistics of two-mode states.
//!
//! Quadratures are `X = (a + a†)/√2` and `P = (a - a†)/(i√2)`, so the vacuum
//! has `⟨X²⟩ = 1/2` and the sum/difference combinations have shot-noise
//! level 1.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::fock::{DensityMatrix, HilbertConfig, OperatorMatrix};
use crate::tolerance;

/// `(X, P)` for `mode`.
pub fn quadrature_operators(
    config: HilbertConfig,
    mode: usize,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let a = OperatorMatrix::annihilation(config, mode)?;
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = a.add(&ad)?.scale(C64::new(s, 0.0));
    // (a - a†)/(i√2) = -i(a - a†)/√2
    let p = a.sub(&ad)?.scale(C64::new(0.0, -s));
    Ok((x, p))
}

/// Second moments of `(X_A, P_A, X_B, P_B)` for a state with vanishing
/// first moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSummary {
    pub xx_a: f64,
    pub pp_a: f64,
    pub xx_b: f64,
    pub pp_b: f64,
    /// `⟨X_A X_B⟩`
    pub xa_xb: f64,
    /// `⟨P_A P_B⟩`
    pub pa_pb: f64,
}

impl CovarianceSummary {
    /// Two-mode vacuum.
    pub fn vacuum() -> Self {
        Self::phase_symmetric(0.5, 0.5, 0.0)
    }

    /// Moments of a state with `⟨X²⟩ = ⟨P²⟩` per mode and
    /// `⟨X_A X_B⟩ = -⟨P_A P_B⟩ = cross`.
    pub fn phase_symmetric(diag_a: f64, diag_b: f64, cross: f64) -> Self {
        Self {
            xx_a: diag_a,
            pp_a: diag_a,
            xx_b: diag_b,
            pp_b: diag_b,
            xa_xb: cross,
            pa_pb: -cross,
        }
    }

    /// `⟨(X_A - X_B)²⟩`
    pub fn v_diff(&self) -> f64 {
        self.xx_a + self.xx_b - 2.0 * self.xa_xb
    }

    /// `⟨(X_A + X_B)²⟩`
    pub fn v_sum(&self) -> f64 {
        self.xx_a + self.xx_b + 2.0 * self.xa_xb
    }

    /// `⟨(P_A + P_B)²⟩`, the momentum partner of [`v_diff`](Self::v_diff).
    pub fn p_sum(&self) -> f64 {
        self.pp_a + self.pp_b + 2.0 * self.pa_pb
    }

    /// `⟨(P_A - P_B)²⟩`
    pub fn p_diff(&self) -> f64 {
        self.pp_a + self.pp_b - 2.0 * self.pa_pb
    }

    fn values(&self) -> [f64; 6] {
        [
            self.xx_a, self.pp_a, self.xx_b, self.pp_b, self.xa_xb, self.pa_pb,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Second moments of a two-mode state. Fails if any first moment exceeds
/// `1e-9`.
pub fn covariance_summary(state: &DensityMatrix) -> Result<CovarianceSummary> {
    let config = state.config();
    if config.mode_count() != 2 {
        return Err(Error::InvalidConfig(format!(
            "covariance_summary needs two modes, got {}",
            config.mode_count()
        )));
    }
    let (xa, pa) = quadrature_operators(config, 0)?;
    let (xb, pb) = quadrature_operators(config, 1)?;
    for (name, op) in [("X_A", &xa), ("P_A", &pa), ("X_B", &xb), ("P_B", &pb)] {
        let m = state.expectation(op)?;
        if m.norm() > tolerance::FIRST_MOMENT {
            return Err(Error::NonZeroFirstMoment {
                quadrature: name,
                value: m.norm(),
            });
        }
    }
    let cross = |a: &OperatorMatrix, b: &OperatorMatrix| -> Result<f64> {
        Ok(state.expectation(&(a * b))?.re)
    };
    let (xx_a, pp_a) = single_mode_moments(state, 0)?;
    let (xx_b, pp_b) = single_mode_moments(state, 1)?;
    Ok(CovarianceSummary {
        xx_a,
        pp_a,
        xx_b,
        pp_b,
        xa_xb: cross(&xa, &xb)?,
        pa_pb: cross(&pa, &pb)?,
    })
}

/// `(⟨X²⟩, ⟨P²⟩)` of one mode from the normal-ordered forms
/// `(±(a² + a†²) + 2a†a + 1)/2`, which stay exact on the top Fock level
/// where the truncated product `a a†` does not.
pub fn single_mode_moments(state: &DensityMatrix, mode: usize) -> Result<(f64, f64)> {
    let config = state.config();
    let a = OperatorMatrix::annihilation(config, mode)?;
    let a2 = state.expectation(&(&a * &a))?.re;
    let n = state.expectation(&OperatorMatrix::number(config, mode)?)?.re;
    let tr = state.trace();
    Ok((a2 + n + 0.5 * tr, -a2 + n + 0.5 * tr))
}

/// Homodyne detector efficiencies as a map on moments:
/// `m → η·m + (1-η)/2` on the diagonal, `√(η_A η_B)` on cross terms.
pub fn apply_detection_efficiency(
    cov: &CovarianceSummary,
    eta_a: f64,
    eta_b: f64,
) -> Result<CovarianceSummary> {
    check_range("eta_a", eta_a, 0.0, 1.0, "[0, 1]")?;
    check_range("eta_b", eta_b, 0.0, 1.0, "[0, 1]")?;
    let diag = |eta: f64, m: f64| eta * m + 0.5 * (1.0 - eta);
    let cross = (eta_a * eta_b).sqrt();
    Ok(CovarianceSummary {
        xx_a: diag(eta_a, cov.xx_a),
        pp_a: diag(eta_a, cov.pp_a),
        xx_b: diag(eta_b, cov.xx_b),
        pp_b: diag(eta_b, cov.pp_b),
        xa_xb: cross * cov.xa_xb,
        pa_pb: cross * cov.pa_pb,
    })
}

/// Optimized Duan inseparability parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuanResult {
    /// `I`; below 1 certifies inseparability.
    pub value: f64,
    /// Optimal weight `a` on mode B.
    pub a_star: f64,
}

/// `I(a) = [⟨(X_A - a X_B)²⟩ + ⟨(P_A + a P_B)²⟩] / (1 + a²)`.
pub fn duan_objective(cov: &CovarianceSummary, a: f64) -> f64 {
    let (n_a, n_b, k) = duan_terms(cov);
    if a.is_infinite() {
        return n_b;
    }
    (n_a + a * a * n_b - 2.0 * a * k) / (1.0 + a * a)
}

fn duan_terms(cov: &CovarianceSummary) -> (f64, f64, f64) {
    (
        cov.xx_a + cov.pp_a,
        cov.xx_b + cov.pp_b,
        cov.xa_xb - cov.pa_pb,
    )
}

/// Minimizes [`duan_objective`] in closed form.
///
/// Stationary points solve `k a² + (n_B - n_A) a - k = 0` with
/// `n_i = ⟨X_i²⟩ + ⟨P_i²⟩` and `k = ⟨X_A X_B⟩ - ⟨P_A P_B⟩`. The two roots
/// multiply to -1; the minimum is the one with the sign of `k` (positive for
/// the correlations produced in this crate). Without correlations (`k = 0`)
/// the infimum sits at `a = 0` or `a = ∞`, and `a* = 1` when every `a` ties.
pub fn duan_inseparability(cov: &CovarianceSummary) -> DuanResult {
    let (n_a, n_b, k) = duan_terms(cov);
    let delta = n_b - n_a;
    if k == 0.0 {
        return if delta == 0.0 {
            DuanResult {
                value: n_a,
                a_star: 1.0,
            }
        } else if delta > 0.0 {
            DuanResult {
                value: n_a,
                a_star: 0.0,
            }
        } else {
            DuanResult {
                value: n_b,
                a_star: f64::INFINITY,
            }
        };
    }
    let disc = (delta * delta + 4.0 * k * k).sqrt();
    // (√D - δ)/(2k), written to avoid cancellation
    let a_star = if delta >= 0.0 {
        2.0 * k / (delta + disc)
    } else {
        (disc - delta) / (2.0 * k)
    };
    DuanResult {
        value: duan_objective(cov, a_star),
        a_star,
    }
}

/// Golden-section minimization of [`duan_objective`] on `[lo, hi]`; the
/// numerical counterpart of [`duan_inseparability`].
pub fn duan_golden_section(cov: &CovarianceSummary, lo: f64, hi: f64) -> DuanResult {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |a: f64| duan_objective(cov, a);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-12 * (1.0 + a.abs() + b.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = DuanResult {
        value: f(mid),
        a_star: mid,
    };
    for edge in [lo, hi] {
        if f(edge) < best.value {
            best = DuanResult {
                value: f(edge),
                a_star: edge,
            };
        }
    }
    best
}

/// Hermite functions `ψ_0(x) .. ψ_{n_max}(x)` for the `X` convention above,
/// `ψ_n(x) = (2ⁿ n! √π)^{-1/2} H_n(x) e^{-x²/2}`.
pub fn hermite_functions(x: f64, n_max: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(n_max + 1);
    psi.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n_max >= 1 {
        psi.push(std::f64::consts::SQRT_2 * x * psi[0]);
    }
    for n in 1..n_max {
        let next = (2.0 / (n + 1) as f64).sqrt() * x * psi[n]
            - (n as f64 / (n + 1) as f64).sqrt() * psi[n - 1];
        psi.push(next);
    }
    psi
}

/// Joint position-quadrature density `P(x_A, x_B) = ⟨x_A, x_B|ρ|x_A, x_B⟩`
/// of a two-mode state.
#[derive(Debug, Clone)]
pub struct QuadraturePdf {
    config: HilbertConfig,
    real_part: DMatrix<f64>,
}

impl QuadraturePdf {
    pub fn new(state: &DensityMatrix) -> Result<Self> {
        let config = state.config();
        if config.mode_count() != 2 {
            return Err(Error::InvalidConfig(format!(
                "quadrature density needs two modes, got {}",
                config.mode_count()
            )));
        }
        // ψ_n are real, so the imaginary parts of a Hermitian ρ cancel.
        Ok(Self {
            config,
            real_part: state.matrix().map(|z| z.re),
        })
    }

    pub fn density(&self, x_a: f64, x_b: f64) -> f64 {
        let n_max = self.config.n_max();
        let ha = hermite_functions(x_a, n_max);
        let hb = hermite_functions(x_b, n_max);
        let d = self.config.mode_dim();
        let u: Vec<f64> = (0..d * d).map(|i| ha[i / d] * hb[i % d]).collect();
        let mut acc = 0.0;
        for (i, ui) in u.iter().enumerate() {
            let row: f64 = u
                .iter()
                .enumerate()
                .map(|(j, uj)| self.real_part[(i, j)] * uj)
                .sum();
            acc += ui * row;
        }
        acc
    }
}

/// Convenience wrapper around [`QuadraturePdf`].
pub fn joint_quadrature_pdf(state: &DensityMatrix, x_a: f64, x_b: f64) -> Result<f64> {
    Ok(QuadraturePdf::new(state)?.density(x_a, x_b))
}

/// Rejection sampler for the joint position quadratures.
///
/// The envelope is a product of centered Gaussians whose variance is 1.5
/// times the largest of `⟨X_A²⟩`, `⟨X_B²⟩`; the envelope bound is the grid
/// maximum of the density ratio on `[-8, 8]²` with a 10% margin.
#[derive(Debug, Clone)]
pub struct QuadratureSampler {
    pdf: QuadraturePdf,
    sigma: f64,
    bound: f64,
}

const MIN_ACCEPTANCE: f64 = 1e-3;

impl QuadratureSampler {
    pub fn new(state: &DensityMatrix) -> Result<Self> {
        let (normalized, _) = state.normalize()?;
        let (var_a, _) = single_mode_moments(&normalized, 0)?;
        let (var_b, _) = single_mode_moments(&normalized, 1)?;
        let sigma = (1.5 * var_a.max(var_b)).sqrt();
        let pdf = QuadraturePdf::new(&normalized)?;

        let envelope = |x: f64, y: f64| {
            (-(x * x + y * y) / (2.0 * sigma * sigma)).exp()
                / (2.0 * std::f64::consts::PI * sigma * sigma)
        };
        let step: f64 = 0.05;
        let half: f64 = 8.0;
        let n = (2.0 * half / step).round() as usize;
        let mut ratio: f64 = 0.0;
        for i in 0..=n {
            let x = -half + i as f64 * step;
            for j in 0..=n {
                let y = -half + j as f64 * step;
                ratio = ratio.max(pdf.density(x, y) / envelope(x, y));
            }
        }
        let bound = 1.1 * ratio;
        let sampler = Self { pdf, sigma, bound };
        let rate = sampler.expected_acceptance();
        if !(rate >= MIN_ACCEPTANCE) {
            return Err(Error::LowAcceptance { rate });
        }
        Ok(sampler)
    }

    /// Expected fraction of accepted proposals, `1/M`.
    pub fn expected_acceptance(&self) -> f64 {
        1.0 / self.bound
    }

    pub fn envelope_sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<(f64, f64)>> {
        let normal = Normal::new(0.0, self.sigma).expect("positive envelope width");
        let norm = 2.0 * std::f64::consts::PI * self.sigma * self.sigma;
        let mut out = Vec::with_capacity(count);
        let mut proposals: u64 = 0;
        while out.len() < count {
            let x = normal.sample(rng);
            let y = normal.sample(rng);
            proposals += 1;
            let envelope = (-(x * x + y * y) / (2.0 * self.sigma * self.sigma)).exp() / norm;
            let u: f64 = rng.random();
            if u * self.bound * envelope < self.pdf.density(x, y) {
                out.push((x, y));
            }
            if proposals >= 10_000 && (out.len() as f64) < MIN_ACCEPTANCE * proposals as f64 {
                return Err(Error::LowAcceptance {
                    rate: out.len() as f64 / proposals as f64,
                });
            }
        }
        Ok(out)
    }
}

/// `count` i.i.d. `(x_A, x_B)` samples, deterministic in `seed`.
pub fn sample_quadratures(
    state: &DensityMatrix,
    count: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if count == 0 {
        return Err(Error::OutOfRange {
            name: "count",
            value: 0.0,
            range: "[1, ∞)",
        });
    }
    let sampler = QuadratureSampler::new(state)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sampler.sample(count, &mut rng)
}

/// Empirical `(⟨x_A²⟩, ⟨x_B²⟩, ⟨(x_A - x_B)²⟩, ⟨(x_A + x_B)²⟩)` of a sample.
pub fn empirical_moments(samples: &[(f64, f64)]) -> [f64; 4] {
    let n = samples.len() as f64;
    let mut acc = [0.0; 4];
    for &(a, b) in samples {
        acc[0] += a * a;
        acc[1] += b * b;
        acc[2] += (a - b) * (a - b);
        acc[3] += (a + b) * (a + b);
    }
    acc.map(|s| s / n)
}
