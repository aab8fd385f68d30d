mod common;

use common::{cfg, random_state};
use cvdistill::channels::{distill, loss_channel, tmsv_state, ChannelParams, SqueezingParam};
use cvdistill::fock::DensityMatrix;
use cvdistill::quad::{
    apply_detection_efficiency, covariance_summary, duan_inseparability, duan_objective, empirical_moments,
    sample_quadratures, CovarianceSummary, QuadraturePdf,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense scan over `a = tan φ` followed by a local ternary refinement.
fn scanned_minimum(cov: &CovarianceSummary) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let n = 20_000;
    let objective = |phi: f64| duan_objective(cov, phi.tan());
    let (mut best_phi, mut best) = (0.0, f64::INFINITY);
    for i in 1..n {
        let phi = -half_pi + std::f64::consts::PI * i as f64 / n as f64;
        let v = objective(phi);
        if v < best {
            best = v;
            best_phi = phi;
        }
    }
    let h = std::f64::consts::PI / n as f64;
    let (mut lo, mut hi) = ((best_phi - h).max(-half_pi + 1e-12), (best_phi + h).min(half_pi - 1e-12));
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if objective(m1) < objective(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.min(objective(0.5 * (lo + hi)))
}

fn random_covariance(rng: &mut ChaCha8Rng) -> CovarianceSummary {
    CovarianceSummary {
        xx_a: rng.random_range(0.5..3.0),
        pp_a: rng.random_range(0.5..3.0),
        xx_b: rng.random_range(0.5..3.0),
        pp_b: rng.random_range(0.5..3.0),
        xa_xb: rng.random_range(-1.5..1.5),
        pa_pb: rng.random_range(-1.5..1.5),
    }
}

#[test]
fn duan_closed_form_matches_dense_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let cov = random_covariance(&mut rng);
        let closed = duan_inseparability(&cov);
        let scanned = scanned_minimum(&cov);
        assert!((closed.value - scanned).abs() < 1e-8, "{cov:?}: {} vs {scanned}", closed.value);
        if closed.a_star.is_finite() {
            assert!((duan_objective(&cov, closed.a_star) - closed.value).abs() < 1e-12);
        }
    }
}

#[test]
fn duan_closed_form_is_a_lower_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let cov = random_covariance(&mut rng);
        let value = duan_inseparability(&cov).value;
        for _ in 0..200 {
            let a = rng.random_range(-50.0..50.0);
            assert!(duan_objective(&cov, a) >= value - 1e-12);
        }
    }
}

#[test]
fn squeezed_vacuum_difference_variance() {
    for gamma in [0.05, 0.1, 0.135, 0.2] {
        for n_max in [5, 6] {
            let state = tmsv_state(SqueezingParam::new(gamma).unwrap(), cfg(n_max, 2)).unwrap();
            let cov = covariance_summary(&state).unwrap();
            let expected = (1.0 - gamma) / (1.0 + gamma);
            assert!((cov.v_diff() - expected).abs() < 1e-3, "gamma {gamma}, n_max {n_max}");
            assert!((cov.v_sum() - 1.0 / expected).abs() < 1e-3);
        }
    }
}

fn grid_integrals(state: &DensityMatrix) -> (f64, f64) {
    let pdf = QuadraturePdf::new(state).unwrap();
    let step = 0.05;
    let n = 240;
    let (mut total, mut xa2) = (0.0, 0.0);
    for i in 0..=n {
        let x = -6.0 + i as f64 * step;
        for j in 0..=n {
            let y = -6.0 + j as f64 * step;
            let p = pdf.density(x, y);
            total += p;
            xa2 += x * x * p;
        }
    }
    (total * step * step, xa2 * step * step)
}

fn test_states() -> Vec<DensityMatrix> {
    let c = cfg(3, 2);
    let tmsv = tmsv_state(SqueezingParam::new(0.3).unwrap(), c).unwrap();
    let (distilled, _) = distill(
        SqueezingParam::new(0.135).unwrap(),
        &ChannelParams::from_gain(0.05f64.sqrt(), 10.0, 0.65).unwrap(),
        c,
    )
    .unwrap();
    vec![
        DensityMatrix::vacuum(c),
        DensityMatrix::fock(c, &[1, 2]).unwrap(),
        DensityMatrix::fock(c, &[3, 3]).unwrap(),
        tmsv,
        distilled,
    ]
}

#[test]
fn pdf_integrates_to_trace() {
    for state in test_states() {
        let (total, xa2) = grid_integrals(&state);
        assert!((total - state.trace()).abs() < 1e-6, "{total}");
        let cov = covariance_summary(&state).unwrap();
        assert!((xa2 - cov.xx_a).abs() < 1e-4, "{xa2} vs {}", cov.xx_a);
    }
}

#[test]
fn pdf_scales_with_unnormalized_trace() {
    let c = cfg(3, 2);
    let state = DensityMatrix::diagonal(c, &{
        let mut w = vec![0.0; c.dim()];
        w[0] = 0.2;
        w[c.index(&[1, 1])] = 0.1;
        w
    })
    .unwrap();
    let (total, _) = grid_integrals(&state);
    assert!((total - 0.3).abs() < 1e-6, "{total}");
}

#[test]
fn sampler_matches_model_moments() {
    let c = cfg(5, 2);
    let tmsv = tmsv_state(SqueezingParam::new(0.3).unwrap(), c).unwrap();
    let n = 40_000;
    for (state, seed) in [(DensityMatrix::vacuum(c), 3), (tmsv, 4)] {
        let cov = covariance_summary(&state).unwrap();
        let samples = sample_quadratures(&state, n, seed).unwrap();
        let [xa, xb, diff, sum] = empirical_moments(&samples);
        // Gaussian fourth moments: Var(x²) = 2σ⁴.
        let band = |v: f64| 4.0 * v * 2f64.sqrt() / (n as f64).sqrt();
        for (emp, model) in [(xa, cov.xx_a), (xb, cov.xx_b), (diff, cov.v_diff()), (sum, cov.v_sum())] {
            assert!((emp - model).abs() < band(model), "{emp} vs {model}");
        }
    }
}

#[test]
fn sampler_is_reproducible_and_seed_sensitive() {
    let state = tmsv_state(SqueezingParam::new(0.2).unwrap(), cfg(3, 2)).unwrap();
    let a = sample_quadratures(&state, 500, 9).unwrap();
    assert_eq!(a, sample_quadratures(&state, 500, 9).unwrap());
    assert_ne!(a, sample_quadratures(&state, 500, 10).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn detection_efficiency_equals_loss_channels(
        state in random_state(cfg(3, 2), true),
        eta_a in 0.0f64..=1.0,
        eta_b in 0.0f64..=1.0,
    ) {
        let mapped = apply_detection_efficiency(&covariance_summary(&state).unwrap(), eta_a, eta_b).unwrap();
        let lossy = loss_channel(&loss_channel(&state, 0, eta_a.sqrt()).unwrap(), 1, eta_b.sqrt()).unwrap();
        let direct = covariance_summary(&lossy).unwrap();
        for (m, d) in [
            (mapped.xx_a, direct.xx_a),
            (mapped.pp_a, direct.pp_a),
            (mapped.xx_b, direct.xx_b),
            (mapped.pp_b, direct.pp_b),
            (mapped.xa_xb, direct.xa_xb),
            (mapped.pa_pb, direct.pa_pb),
        ] {
            prop_assert!((m - d).abs() < 1e-10, "{m} vs {d}");
        }
    }

    #[test]
    fn duan_value_is_at_most_the_unweighted_objective(state in random_state(cfg(3, 2), true)) {
        let cov = covariance_summary(&state).unwrap();
        let duan = duan_inseparability(&cov);
        prop_assert!(duan.value.is_finite());
        prop_assert!(duan.value <= duan_objective(&cov, 1.0) + 1e-12);
        prop_assert!(duan.value <= duan_objective(&cov, -1.0) + 1e-12);
    }
}
