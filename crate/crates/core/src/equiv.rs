//! Equivalent EPR state: the pure squeezed vacuum plus two-sided loss whose
//! position sum and difference variances match a given pair.
//!
//! With `D = (v_sum + v_diff)/2 - 1` and `E = (v_sum - v_diff)/2` the forward
//! model reads
//!
//! ```text
//! D = (η_A + η_B)/2 · (cosh 2γ - 1)
//! E = √(η_A η_B) · sinh 2γ
//! ```
//!
//! For fixed `η_A` the second line gives `η_B = E² / (η_A sinh² 2γ)`, and
//! substituting into the first leaves one equation in `γ`,
//!
//! ```text
//! f(γ) = η_A (cosh 2γ - 1)/2 + E² / (4 η_A cosh² γ) - D = 0,
//! ```
//!
//! which is convex in `cosh² γ` and so has at most two roots. Each monotone
//! branch is bracketed and bisected; roots with `η_B > 1` are rejected.

use serde::{Deserialize, Serialize};

use crate::analytic::SumDiff;
use crate::error::{Error, Result};

/// Upper end of the squeezing bracket.
pub const MAX_GAMMA_EQ: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalentState {
    /// Hyperbolic squeezing strength; pure-state variances are `e^{∓2γ}`.
    pub gamma_eq: f64,
    pub eta_a_eq: f64,
    pub eta_b_eq: f64,
}

impl EquivalentState {
    pub fn new(gamma_eq: f64, eta_a_eq: f64, eta_b_eq: f64) -> Result<Self> {
        if !(gamma_eq.is_finite() && gamma_eq >= 0.0) {
            return Err(Error::OutOfRange {
                name: "gamma_eq",
                value: gamma_eq,
                range: "[0, ∞)",
            });
        }
        check_efficiency("eta_a_eq", eta_a_eq)?;
        check_efficiency("eta_b_eq", eta_b_eq)?;
        Ok(Self {
            gamma_eq,
            eta_a_eq,
            eta_b_eq,
        })
    }
}

fn check_efficiency(name: &'static str, eta: f64) -> Result<()> {
    if eta.is_finite() && eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: eta,
            range: "(0, 1]",
        })
    }
}

/// `1 + (η_A + η_B)/2 · (cosh 2γ - 1) ∓ √(η_A η_B) · sinh 2γ`.
pub fn equivalent_variances(eq: &EquivalentState) -> SumDiff {
    let c = (2.0 * eq.gamma_eq).cosh();
    let s = (2.0 * eq.gamma_eq).sinh();
    let common = 1.0 + 0.5 * (eq.eta_a_eq + eq.eta_b_eq) * (c - 1.0);
    let cross = (eq.eta_a_eq * eq.eta_b_eq).sqrt() * s;
    SumDiff {
        v_diff: common - cross,
        v_sum: common + cross,
    }
}

/// Why no physical equivalent state exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Infeasibility {
    /// The forward model needs `v_sum > v_diff` and `v_sum + v_diff > 2`.
    NotCorrelated { v_diff: f64, v_sum: f64 },
    /// The reduced equation has no root for `γ > 0`: the variances are more
    /// mixed than any lossy squeezed vacuum with the given `η_A` allows.
    NoRoot,
    /// Every root needs `η_B > 1`; the smallest required value is reported.
    EfficiencyAboveOne { eta_b_eq: f64 },
    /// The only root lies beyond [`MAX_GAMMA_EQ`].
    SqueezingOutOfRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EquivalenceOutcome {
    /// A physical solution. The forward map is not injective: when a second
    /// physical root exists it is returned as `alternate`; `state` is the one
    /// with the smaller `γ_eq`.
    Solved {
        state: EquivalentState,
        alternate: Option<EquivalentState>,
    },
    /// `v_diff = v_sum = 1`: `γ_eq = 0` and `η_B,eq` is indeterminate.
    Degenerate { eta_a_eq: f64 },
    Infeasible(Infeasibility),
}

impl EquivalenceOutcome {
    pub fn state(&self) -> Option<&EquivalentState> {
        match self {
            Self::Solved { state, .. } => Some(state),
            _ => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Self::Infeasible(_))
    }
}

/// Variances within this distance of shot noise count as shot noise.
const DEGENERATE_TOL: f64 = 1e-12;

/// Solves for `(γ_eq, η_B,eq)` given the measured variances and a fixed
/// `η_A,eq`.
pub fn solve_equivalent(v_diff: f64, v_sum: f64, eta_a_eq: f64) -> Result<EquivalenceOutcome> {
    if !(v_diff.is_finite() && v_sum.is_finite()) {
        return Err(Error::OutOfRange {
            name: "variances",
            value: if v_diff.is_finite() { v_sum } else { v_diff },
            range: "finite values",
        });
    }
    check_efficiency("eta_a_eq", eta_a_eq)?;

    if (v_diff - 1.0).abs() <= DEGENERATE_TOL && (v_sum - 1.0).abs() <= DEGENERATE_TOL {
        return Ok(EquivalenceOutcome::Degenerate { eta_a_eq });
    }
    let d = 0.5 * (v_sum + v_diff) - 1.0;
    let e = 0.5 * (v_sum - v_diff);
    // Every lossy squeezed vacuum has D > 0 and E > 0. With strongly
    // unequal efficiencies v_diff itself may exceed 1.
    if !(d > 0.0 && e > 0.0) {
        return Ok(EquivalenceOutcome::Infeasible(Infeasibility::NotCorrelated {
            v_diff,
            v_sum,
        }));
    }
    let eta_a = eta_a_eq;
    let f = |g: f64| {
        let ch = g.cosh();
        eta_a * (ch * ch - 1.0) + e * e / (4.0 * eta_a * ch * ch) - d
    };
    let eta_b_of = |g: f64| {
        let s = (2.0 * g).sinh();
        e * e / (eta_a * s * s)
    };

    // Minimum of f sits at cosh² γ = E / (2 η_A).
    let u_min = e / (2.0 * eta_a);
    let mut brackets = Vec::with_capacity(2);
    if u_min > 1.0 {
        let g_min = u_min.sqrt().acosh();
        if g_min < MAX_GAMMA_EQ {
            brackets.push((0.0, g_min));
            brackets.push((g_min, MAX_GAMMA_EQ));
        } else {
            brackets.push((0.0, MAX_GAMMA_EQ));
        }
    } else {
        brackets.push((0.0, MAX_GAMMA_EQ));
    }

    let mut roots: Vec<f64> = Vec::new();
    for &(lo, hi) in &brackets {
        if let Some(root) = bisect(&f, lo, hi) {
            if root > 0.0 && !roots.iter().any(|r| (r - root).abs() < 1e-12) {
                roots.push(root);
            }
        }
    }
    if roots.is_empty() {
        let beyond = brackets
            .last()
            .map(|&(_, hi)| f(hi) < 0.0)
            .unwrap_or(false);
        return Ok(EquivalenceOutcome::Infeasible(if beyond {
            Infeasibility::SqueezingOutOfRange
        } else {
            Infeasibility::NoRoot
        }));
    }
    roots.sort_by(f64::total_cmp);

    let mut physical = Vec::new();
    let mut smallest_excess = f64::INFINITY;
    for g in roots {
        let eta_b = eta_b_of(g);
        if eta_b <= 1.0 + 1e-12 {
            physical.push(EquivalentState {
                gamma_eq: g,
                eta_a_eq: eta_a,
                eta_b_eq: eta_b.min(1.0),
            });
        } else {
            smallest_excess = smallest_excess.min(eta_b);
        }
    }
    match physical.as_slice() {
        [] => Ok(EquivalenceOutcome::Infeasible(
            Infeasibility::EfficiencyAboveOne {
                eta_b_eq: smallest_excess,
            },
        )),
        [state] => Ok(EquivalenceOutcome::Solved {
            state: *state,
            alternate: None,
        }),
        [state, alternate, ..] => Ok(EquivalenceOutcome::Solved {
            state: *state,
            alternate: Some(*alternate),
        }),
    }
}

/// Bisection on `[lo, hi]`. Returns `None` without a sign change; an
/// endpoint within `1e-14` of zero counts as a root (double roots touch zero
/// only to rounding).
fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    let touch = 1e-14;
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return if f_hi.abs() < touch && hi < MAX_GAMMA_EQ {
            Some(hi)
        } else if f_lo.abs() < touch && lo > 0.0 {
            Some(lo)
        } else {
            None
        };
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
