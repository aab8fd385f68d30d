//! Dense linear algebra over truncated multimode Fock spaces.
//!
//! A basis state `|n_0, n_1, ..., n_{M-1}⟩` has the flat index
//! `Σ_k n_k · d^(M-1-k)` with `d = n_max + 1`, so mode 0 is the slowest
//! index. Ladder operators are plainly truncated at `n_max`; nothing is
//! renormalized at the cutoff.

use std::ops::Mul;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tolerance::{self, Tolerances};

/// Default photon-number cutoff: the zero- to three-photon subspace.
pub const DEFAULT_N_MAX: usize = 3;
/// Largest cutoff accepted, for convergence studies.
pub const MAX_N_MAX: usize = 6;
/// Largest number of modes a space may hold.
pub const MAX_MODES: usize = 3;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Shape of a truncated multimode Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertConfig {
    n_max: usize,
    mode_count: usize,
}

impl HilbertConfig {
    pub fn new(n_max: usize, mode_count: usize) -> Result<Self> {
        if !(1..=MAX_N_MAX).contains(&n_max) {
            return Err(Error::InvalidConfig(format!(
                "n_max = {n_max} must lie in 1..={MAX_N_MAX}"
            )));
        }
        if !(1..=MAX_MODES).contains(&mode_count) {
            return Err(Error::InvalidConfig(format!(
                "mode_count = {mode_count} must lie in 1..={MAX_MODES}"
            )));
        }
        Ok(Self { n_max, mode_count })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    /// Dimension of a single mode, `n_max + 1`.
    pub fn mode_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Total dimension, `(n_max + 1)^mode_count`.
    pub fn dim(&self) -> usize {
        self.mode_dim().pow(self.mode_count as u32)
    }

    /// Same cutoff with a different number of modes.
    pub fn with_mode_count(&self, mode_count: usize) -> Result<Self> {
        Self::new(self.n_max, mode_count)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.mode_count {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                mode,
                mode_count: self.mode_count,
            })
        }
    }

    fn stride(&self, mode: usize) -> usize {
        self.mode_dim().pow((self.mode_count - 1 - mode) as u32)
    }

    /// Flat index of the basis state with the given occupations.
    ///
    /// Panics if the slice length differs from the mode count or an
    /// occupation exceeds the cutoff.
    pub fn index(&self, occupations: &[usize]) -> usize {
        assert_eq!(occupations.len(), self.mode_count, "occupation count");
        occupations.iter().fold(0, |acc, &n| {
            assert!(n <= self.n_max, "occupation {n} above cutoff {}", self.n_max);
            acc * self.mode_dim() + n
        })
    }

    /// Photon number of `mode` in basis state `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.stride(mode)) % self.mode_dim()
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.mode_count)
            .map(|m| self.occupation(index, m))
            .collect()
    }

    /// Total photon number of basis state `index`.
    pub fn total_photons(&self, index: usize) -> usize {
        (0..self.mode_count).map(|m| self.occupation(index, m)).sum()
    }
}

fn check_distinct(config: &HilbertConfig, modes: &[usize]) -> Result<()> {
    for (i, &m) in modes.iter().enumerate() {
        config.check_mode(m)?;
        if modes[..i].contains(&m) {
            return Err(Error::SameMode(m));
        }
    }
    Ok(())
}

/// Single-mode truncated annihilation operator, `⟨n-1|a|n⟩ = √n`.
pub fn local_annihilation(n_max: usize) -> DMatrix<C64> {
    let d = n_max + 1;
    DMatrix::from_fn(d, d, |m, n| {
        if n == m + 1 {
            C64::new((n as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

/// Operator on a truncated multimode Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    config: HilbertConfig,
    elements: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(config: HilbertConfig, elements: DMatrix<C64>) -> Result<Self> {
        let dim = config.dim();
        if elements.nrows() != dim || elements.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: elements.nrows().max(elements.ncols()),
            });
        }
        Ok(Self { config, elements })
    }

    pub fn identity(config: HilbertConfig) -> Self {
        let dim = config.dim();
        Self {
            config,
            elements: DMatrix::identity(dim, dim),
        }
    }

    /// Annihilation operator of `mode`, identity on the other modes.
    pub fn annihilation(config: HilbertConfig, mode: usize) -> Result<Self> {
        Self::embed(config, &[mode], &local_annihilation(config.n_max()))
    }

    pub fn creation(config: HilbertConfig, mode: usize) -> Result<Self> {
        Ok(Self::annihilation(config, mode)?.adjoint())
    }

    /// Photon-number operator of `mode`.
    pub fn number(config: HilbertConfig, mode: usize) -> Result<Self> {
        let d = config.mode_dim();
        let local = DMatrix::from_fn(d, d, |m, n| {
            if m == n {
                C64::new(n as f64, 0.0)
            } else {
                ZERO
            }
        });
        Self::embed(config, &[mode], &local)
    }

    /// Lifts an operator acting on `modes` (in the listed order) to the
    /// full space, acting as identity elsewhere.
    pub fn embed(config: HilbertConfig, modes: &[usize], local: &DMatrix<C64>) -> Result<Self> {
        check_distinct(&config, modes)?;
        let d = config.mode_dim();
        let local_dim = d.pow(modes.len() as u32);
        if local.nrows() != local_dim || local.ncols() != local_dim {
            return Err(Error::DimensionMismatch {
                expected: local_dim,
                found: local.nrows(),
            });
        }
        let dim = config.dim();
        let mut local_index = vec![0usize; dim];
        let mut rest_key = vec![0usize; dim];
        for i in 0..dim {
            let mut li = 0;
            let mut rest = i;
            for &m in modes {
                let n = config.occupation(i, m);
                li = li * d + n;
                rest -= n * config.stride(m);
            }
            local_index[i] = li;
            rest_key[i] = rest;
        }
        let elements = DMatrix::from_fn(dim, dim, |i, j| {
            if rest_key[i] == rest_key[j] {
                local[(local_index[i], local_index[j])]
            } else {
                ZERO
            }
        });
        Ok(Self { config, elements })
    }

    /// `exp(-i·t·H)` for a Hermitian generator `H`, via its eigendecomposition.
    pub fn unitary_from_hermitian(generator: &OperatorMatrix, t: f64) -> Result<Self> {
        let dev = generator.hermitian_deviation();
        if dev > tolerance::HERMITIAN {
            return Err(Error::InvalidState(format!(
                "generator is not Hermitian (deviation {dev:e})"
            )));
        }
        let eig = generator.elements.clone().symmetric_eigen();
        let phases = DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -t * l)),
        );
        let v = &eig.eigenvectors;
        let elements = v * DMatrix::from_diagonal(&phases) * v.adjoint();
        Ok(Self {
            config: generator.config,
            elements,
        })
    }

    pub fn config(&self) -> HilbertConfig {
        self.config
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.elements
    }

    pub fn adjoint(&self) -> Self {
        Self {
            config: self.config,
            elements: self.elements.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            config: self.config,
            elements: &self.elements * factor,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same(&self.config, &other.config)?;
        Ok(Self {
            config: self.config,
            elements: &self.elements + &other.elements,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same(&self.config, &other.config)?;
        Ok(Self {
            config: self.config,
            elements: &self.elements - &other.elements,
        })
    }

    /// Max elementwise `|O - O†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        max_abs_diff(&self.elements, &self.elements.adjoint())
    }

    /// Max elementwise `|U†U - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let dim = self.config.dim();
        max_abs_diff(
            &(self.elements.adjoint() * &self.elements),
            &DMatrix::identity(dim, dim),
        )
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;

    /// Panics on a dimension mismatch; use matching configs.
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.config, rhs.config, "operator configs differ");
        OperatorMatrix {
            config: self.config,
            elements: &self.elements * &rhs.elements,
        }
    }
}

fn check_same(a: &HilbertConfig, b: &HilbertConfig) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        })
    }
}

/// Max elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Density matrix over a truncated Fock space.
///
/// The trace may be below one: a sub-normalized matrix encodes a heralded
/// branch whose trace is the success probability.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    config: HilbertConfig,
    elements: DMatrix<C64>,
}

impl DensityMatrix {
    /// Wraps a matrix after checking the density-matrix invariants with the
    /// default tolerances.
    pub fn new(config: HilbertConfig, elements: DMatrix<C64>) -> Result<Self> {
        let state = Self::from_raw(config, elements)?;
        state.validate(&Tolerances::default())?;
        Ok(state)
    }

    /// Wraps a matrix checking only its shape.
    pub(crate) fn from_raw(config: HilbertConfig, elements: DMatrix<C64>) -> Result<Self> {
        let dim = config.dim();
        if elements.nrows() != dim || elements.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: elements.nrows().max(elements.ncols()),
            });
        }
        Ok(Self { config, elements })
    }

    /// `|ψ⟩⟨ψ|` for an amplitude vector in the flat basis. The vector is
    /// used as given; its squared norm becomes the trace.
    pub fn from_pure(config: HilbertConfig, psi: &DVector<C64>) -> Result<Self> {
        if psi.len() != config.dim() {
            return Err(Error::DimensionMismatch {
                expected: config.dim(),
                found: psi.len(),
            });
        }
        Self::new(config, psi * psi.adjoint())
    }

    /// Fock basis state `|n_0, ..., n_{M-1}⟩⟨n_0, ..., n_{M-1}|`.
    pub fn fock(config: HilbertConfig, occupations: &[usize]) -> Result<Self> {
        if occupations.len() != config.mode_count() {
            return Err(Error::DimensionMismatch {
                expected: config.mode_count(),
                found: occupations.len(),
            });
        }
        if let Some(&n) = occupations.iter().find(|&&n| n > config.n_max()) {
            return Err(Error::InvalidState(format!(
                "occupation {n} above cutoff {}",
                config.n_max()
            )));
        }
        let dim = config.dim();
        let idx = config.index(occupations);
        let mut elements = DMatrix::zeros(dim, dim);
        elements[(idx, idx)] = ONE;
        Ok(Self { config, elements })
    }

    pub fn vacuum(config: HilbertConfig) -> Self {
        let dim = config.dim();
        let mut elements = DMatrix::zeros(dim, dim);
        elements[(0, 0)] = ONE;
        Self { config, elements }
    }

    /// Single-mode state diagonal in the Fock basis.
    pub fn diagonal(config: HilbertConfig, weights: &[f64]) -> Result<Self> {
        if weights.len() != config.dim() {
            return Err(Error::DimensionMismatch {
                expected: config.dim(),
                found: weights.len(),
            });
        }
        let diag = DVector::from_iterator(weights.len(), weights.iter().map(|&w| C64::new(w, 0.0)));
        Self::new(config, DMatrix::from_diagonal(&diag))
    }

    pub fn config(&self) -> HilbertConfig {
        self.config
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.elements
    }

    /// Matrix element `⟨row|ρ|col⟩` addressed by occupations.
    pub fn element(&self, row: &[usize], col: &[usize]) -> C64 {
        self.elements[(self.config.index(row), self.config.index(col))]
    }

    pub fn trace(&self) -> f64 {
        self.elements.trace().re
    }

    pub fn hermitian_deviation(&self) -> f64 {
        max_abs_diff(&self.elements, &self.elements.adjoint())
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.elements + self.elements.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let herm = self.hermitian_deviation();
        if herm > tol.hermitian {
            return Err(Error::InvalidState(format!(
                "not Hermitian: max |ρ - ρ†| = {herm:e}"
            )));
        }
        let tr = self.trace();
        if !(tr > 0.0 && tr <= 1.0 + tol.trace_excess) {
            return Err(Error::InvalidState(format!("trace {tr} outside (0, 1]")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < tol.min_eigenvalue {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(())
    }

    /// `ρ ⊗ σ`, with this state's modes first.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        if self.config.n_max() != other.config.n_max() {
            return Err(Error::InvalidConfig(format!(
                "cutoffs differ: {} vs {}",
                self.config.n_max(),
                other.config.n_max()
            )));
        }
        let config = self
            .config
            .with_mode_count(self.config.mode_count() + other.config.mode_count())?;
        Ok(Self {
            config,
            elements: self.elements.kronecker(&other.elements),
        })
    }

    /// `U ρ U†`, rejecting non-unitary `U`.
    pub fn apply_unitary(&self, u: &OperatorMatrix) -> Result<Self> {
        check_same(&self.config, &u.config)?;
        let deviation = u.unitarity_deviation();
        if deviation > tolerance::UNITARY {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(self.sandwich(&u.elements))
    }

    /// `K ρ K†` for any operator `K` of matching shape.
    pub(crate) fn sandwich(&self, k: &DMatrix<C64>) -> Self {
        Self {
            config: self.config,
            elements: k * &self.elements * k.adjoint(),
        }
    }

    /// Elementwise sum of two states over the same space (used to accumulate
    /// Kraus branches).
    pub(crate) fn accumulate(&mut self, other: &DensityMatrix) {
        self.elements += &other.elements;
    }

    pub(crate) fn zeros(config: HilbertConfig) -> Self {
        let dim = config.dim();
        Self {
            config,
            elements: DMatrix::zeros(dim, dim),
        }
    }

    /// Reduced state with `mode` traced out; remaining modes keep their order.
    pub fn partial_trace(&self, mode: usize) -> Result<Self> {
        self.config.check_mode(mode)?;
        if self.config.mode_count() < 2 {
            return Err(Error::InvalidConfig(
                "partial trace needs at least two modes".into(),
            ));
        }
        let reduced = self.config.with_mode_count(self.config.mode_count() - 1)?;
        let d = self.config.mode_dim();
        let stride = self.config.stride(mode);
        // full index = high * (d * stride) + n * stride + low
        let lift = |r: usize, n: usize| (r / stride) * d * stride + n * stride + r % stride;
        let rdim = reduced.dim();
        let elements = DMatrix::from_fn(rdim, rdim, |i, j| {
            (0..d).map(|n| self.elements[(lift(i, n), lift(j, n))]).sum()
        });
        Ok(Self {
            config: reduced,
            elements,
        })
    }

    /// `Tr(ρ O)`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        check_same(&self.config, &op.config)?;
        let dim = self.config.dim();
        let mut acc = ZERO;
        for i in 0..dim {
            for j in 0..dim {
                acc += self.elements[(i, j)] * op.elements[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Splits a (possibly sub-normalized) state into its normalized version
    /// and its trace.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        let tr = self.trace();
        if !(tr > tolerance::MIN_TRACE) {
            return Err(Error::VanishingTrace { trace: tr });
        }
        Ok((
            Self {
                config: self.config,
                elements: &self.elements / C64::new(tr, 0.0),
            },
            tr,
        ))
    }

    /// `⟨ψ|ρ|ψ⟩ / (Tr ρ · ⟨ψ|ψ⟩)`.
    pub fn fidelity_with_pure(&self, psi: &DVector<C64>) -> Result<f64> {
        if psi.len() != self.config.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.config.dim(),
                found: psi.len(),
            });
        }
        let norm2 = psi.norm_squared();
        let tr = self.trace();
        if norm2 <= 0.0 || tr <= 0.0 {
            return Err(Error::VanishingTrace { trace: tr.min(norm2) });
        }
        let overlap = (psi.adjoint() * &self.elements * psi)[(0, 0)];
        Ok(overlap.re / (tr * norm2))
    }

    /// Population of basis states holding more than `n` photons in some
    /// mode.
    pub fn weight_above(&self, n: usize) -> f64 {
        (0..self.config.dim())
            .filter(|&i| (0..self.config.mode_count()).any(|m| self.config.occupation(i, m) > n))
            .map(|i| self.elements[(i, i)].re)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn config_bounds() {
        assert!(HilbertConfig::new(0, 1).is_err());
        assert!(HilbertConfig::new(7, 1).is_err());
        assert!(HilbertConfig::new(3, 4).is_err());
        let cfg = HilbertConfig::new(3, 3).unwrap();
        assert_eq!(cfg.mode_dim(), 4);
        assert_eq!(cfg.dim(), 64);
    }

    #[test]
    fn index_is_mode_zero_slowest() {
        let cfg = HilbertConfig::new(3, 2).unwrap();
        assert_eq!(cfg.index(&[1, 0]), 4);
        assert_eq!(cfg.index(&[0, 1]), 1);
        assert_eq!(cfg.occupations(cfg.index(&[2, 3])), vec![2, 3]);
    }

    #[test]
    fn annihilation_single_mode_qubit() {
        let cfg = HilbertConfig::new(1, 1).unwrap();
        let a = OperatorMatrix::annihilation(cfg, 0).unwrap();
        let m = a.matrix();
        assert_eq!(m[(0, 1)], c(1.0));
        assert_eq!(m[(0, 0)], c(0.0));
        assert_eq!(m[(1, 0)], c(0.0));
        assert_eq!(m[(1, 1)], c(0.0));
    }

    #[test]
    fn annihilation_lowers_two_photons() {
        let cfg = HilbertConfig::new(3, 1).unwrap();
        let a = OperatorMatrix::annihilation(cfg, 0).unwrap();
        let mut ket = DVector::zeros(4);
        ket[2] = c(1.0);
        let out = a.matrix() * ket;
        assert_abs_diff_eq!(out[1].re, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(out.norm(), 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn commutator_is_identity_below_cutoff() {
        let cfg = HilbertConfig::new(3, 1).unwrap();
        let a = OperatorMatrix::annihilation(cfg, 0).unwrap();
        let ad = a.adjoint();
        let comm = (&a * &ad).sub(&(&ad * &a)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j && i < 3 { 1.0 } else { 0.0 };
                if i < 3 && j < 3 {
                    assert_abs_diff_eq!(comm.matrix()[(i, j)].re, expected, epsilon = 1e-14);
                }
            }
        }
        // The cutoff row carries -n_max instead of 1.
        assert_abs_diff_eq!(comm.matrix()[(3, 3)].re, -3.0, epsilon = 1e-14);
    }

    #[test]
    fn annihilation_rejects_bad_mode() {
        let cfg = HilbertConfig::new(3, 2).unwrap();
        assert!(matches!(
            OperatorMatrix::annihilation(cfg, 2),
            Err(Error::ModeOutOfRange { mode: 2, .. })
        ));
    }

    #[test]
    fn embedded_ladder_acts_on_its_mode() {
        let cfg = HilbertConfig::new(2, 3).unwrap();
        let a1 = OperatorMatrix::annihilation(cfg, 1).unwrap();
        let src = cfg.index(&[1, 2, 0]);
        let dst = cfg.index(&[1, 1, 0]);
        assert_abs_diff_eq!(a1.matrix()[(dst, src)].re, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(
            a1.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>(),
            // Σ_n n over mode 1, times 9 configurations of the others
            (0 + 1 + 2) as f64 * 9.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn identity_unitary_leaves_state() {
        let cfg = HilbertConfig::new(2, 2).unwrap();
        let rho = DensityMatrix::fock(cfg, &[1, 2]).unwrap();
        let out = rho.apply_unitary(&OperatorMatrix::identity(cfg)).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn non_unitary_rejected() {
        let cfg = HilbertConfig::new(2, 1).unwrap();
        let rho = DensityMatrix::vacuum(cfg);
        let a = OperatorMatrix::annihilation(cfg, 0).unwrap();
        assert!(matches!(rho.apply_unitary(&a), Err(Error::NotUnitary { .. })));
        let other = OperatorMatrix::identity(HilbertConfig::new(3, 1).unwrap());
        assert!(matches!(
            rho.apply_unitary(&other),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn vacuum_fixed_by_number_conserving_unitary() {
        let cfg = HilbertConfig::new(3, 2).unwrap();
        let n0 = OperatorMatrix::number(cfg, 0).unwrap();
        let n1 = OperatorMatrix::number(cfg, 1).unwrap();
        let gen = (&n0 * &n1).add(&n0).unwrap();
        let u = OperatorMatrix::unitary_from_hermitian(&gen, 0.7).unwrap();
        let out = DensityMatrix::vacuum(cfg).apply_unitary(&u).unwrap();
        assert!(max_abs_diff(out.matrix(), DensityMatrix::vacuum(cfg).matrix()) < 1e-14);
    }

    #[test]
    fn partial_trace_of_product() {
        let cfg1 = HilbertConfig::new(2, 1).unwrap();
        let rho_a = DensityMatrix::diagonal(cfg1, &[0.5, 0.3, 0.2]).unwrap();
        let rho_b = DensityMatrix::diagonal(cfg1, &[0.1, 0.0, 0.9]).unwrap();
        let joint = rho_a.tensor(&rho_b).unwrap();
        let back_a = joint.partial_trace(1).unwrap();
        let back_b = joint.partial_trace(0).unwrap();
        assert!(max_abs_diff(back_a.matrix(), rho_a.matrix()) < 1e-15);
        assert!(max_abs_diff(back_b.matrix(), rho_b.matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_like_state() {
        let cfg = HilbertConfig::new(3, 2).unwrap();
        let mut psi = DVector::zeros(cfg.dim());
        psi[cfg.index(&[0, 0])] = c(0.5f64.sqrt());
        psi[cfg.index(&[1, 1])] = c(0.5f64.sqrt());
        let rho = DensityMatrix::from_pure(cfg, &psi).unwrap();
        for mode in 0..2 {
            let red = rho.partial_trace(mode).unwrap();
            let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![
                c(0.5),
                c(0.5),
                c(0.0),
                c(0.0),
            ]));
            assert!(max_abs_diff(red.matrix(), &expected) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_middle_mode_of_three() {
        let cfg1 = HilbertConfig::new(1, 1).unwrap();
        let a = DensityMatrix::fock(cfg1, &[1]).unwrap();
        let b = DensityMatrix::diagonal(cfg1, &[0.25, 0.75]).unwrap();
        let c0 = DensityMatrix::fock(cfg1, &[0]).unwrap();
        let joint = a.tensor(&b).unwrap().tensor(&c0).unwrap();
        let red = joint.partial_trace(1).unwrap();
        let expected = a.tensor(&c0).unwrap();
        assert!(max_abs_diff(red.matrix(), expected.matrix()) < 1e-15);
        assert!(joint.partial_trace(3).is_err());
        assert!(a.partial_trace(0).is_err());
    }

    #[test]
    fn expectation_examples() {
        let cfg = HilbertConfig::new(3, 1).unwrap();
        let n = OperatorMatrix::number(cfg, 0).unwrap();
        let vac = DensityMatrix::vacuum(cfg);
        let one = DensityMatrix::fock(cfg, &[1]).unwrap();
        assert_eq!(vac.expectation(&n).unwrap(), c(0.0));
        assert_abs_diff_eq!(one.expectation(&n).unwrap().re, 1.0, epsilon = 1e-15);
        let mixed = DensityMatrix::diagonal(cfg, &[0.1, 0.2, 0.3, 0.1]).unwrap();
        let id = OperatorMatrix::identity(cfg);
        assert_abs_diff_eq!(mixed.expectation(&id).unwrap().re, 0.7, epsilon = 1e-15);
        let wrong = OperatorMatrix::identity(HilbertConfig::new(2, 1).unwrap());
        assert!(vac.expectation(&wrong).is_err());
    }

    #[test]
    fn normalize_examples() {
        let cfg = HilbertConfig::new(2, 1).unwrap();
        let vac = DensityMatrix::vacuum(cfg);
        let (same, p) = vac.normalize().unwrap();
        assert_eq!(same, vac);
        assert_eq!(p, 1.0);
        let quarter = DensityMatrix::diagonal(cfg, &[0.25, 0.0, 0.0]).unwrap();
        let (out, p) = quarter.normalize().unwrap();
        assert_abs_diff_eq!(p, 0.25, epsilon = 1e-16);
        assert_eq!(out, vac);
        let empty = DensityMatrix::zeros(cfg);
        assert!(matches!(empty.normalize(), Err(Error::VanishingTrace { .. })));
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let cfg = HilbertConfig::new(1, 1).unwrap();
        let not_herm = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.3), c(0.0), c(0.5)]);
        assert!(DensityMatrix::new(cfg, not_herm).is_err());
        let negative = DMatrix::from_row_slice(2, 2, &[c(1.2), c(0.0), c(0.0), c(-0.2)]);
        assert!(DensityMatrix::new(cfg, negative).is_err());
        let heavy = DMatrix::from_row_slice(2, 2, &[c(0.7), c(0.0), c(0.0), c(0.7)]);
        assert!(DensityMatrix::new(cfg, heavy).is_err());
        let loose = Tolerances {
            trace_excess: 0.5,
            ..Tolerances::default()
        };
        let heavy = DensityMatrix::from_raw(
            cfg,
            DMatrix::from_row_slice(2, 2, &[c(0.7), c(0.0), c(0.0), c(0.7)]),
        )
        .unwrap();
        assert!(heavy.validate(&loose).is_ok());
    }

    #[test]
    fn fidelity_with_own_vector() {
        let cfg = HilbertConfig::new(2, 2).unwrap();
        let mut psi = DVector::zeros(cfg.dim());
        psi[0] = c(0.6);
        psi[cfg.index(&[2, 1])] = C64::new(0.0, 0.8);
        let rho = DensityMatrix::from_pure(cfg, &psi).unwrap();
        assert_abs_diff_eq!(rho.fidelity_with_pure(&psi).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            rho.fidelity_with_pure(&(psi.clone() * c(3.0))).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }
}
