#![allow(dead_code)]

use cvdistill::fock::{DensityMatrix, HilbertConfig};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

/// Random density matrix `G G† / tr(G G†)` from a flat list of real and
/// imaginary parts. With `even_parity` the support is restricted to basis
/// states of even total photon number, which makes every first moment vanish.
pub fn density_from_parts(config: HilbertConfig, parts: &[f64], even_parity: bool) -> DensityMatrix {
    let d = config.dim();
    let mut g = DMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        C64::new(parts[k], parts[k + 1])
    });
    if even_parity {
        for i in 0..d {
            if config.total_photons(i) % 2 == 1 {
                g.row_mut(i).fill(C64::new(0.0, 0.0));
            }
        }
    }
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    DensityMatrix::new(config, rho / C64::new(tr, 0.0)).expect("valid random state")
}

pub fn random_state(config: HilbertConfig, even_parity: bool) -> impl Strategy<Value = DensityMatrix> {
    let d = config.dim();
    prop::collection::vec(-1.0f64..1.0, 2 * d * d)
        .prop_map(move |parts| density_from_parts(config, &parts, even_parity))
}

pub fn cfg(n_max: usize, modes: usize) -> HilbertConfig {
    HilbertConfig::new(n_max, modes).unwrap()
}
