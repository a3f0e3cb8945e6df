//! Bridges between sampled continuous systems and their discrete transfer
//! matrices: coefficient sampling, Toeplitz moments, and exponentiated
//! log-densities, each checked against an independent reference path.

mod common;

use common::{disc_point, frob_diff};
use krein::accelerant::{accelerant_from_logdensity, h_to_a, AccelerantH};
use krein::core::{Grid1D, SampledFunction, C64};
use krein::krein_ode::propagate;
use krein::opuc::*;
use proptest::prelude::*;

fn smooth_fixture() -> SampledFunction {
    let g = Grid1D::from_range(0.0, 1.0, 1e-3).unwrap();
    SampledFunction::from_fn(g, |x| {
        C64::new(0.4 * x.cos(), 0.25 * (2.0 * x).sin())
    })
    .unwrap()
}

/// Transfer products of the sampled coefficient converge to the continuous
/// transfer matrix, with error strictly shrinking under refinement.
#[test]
fn discrete_products_approach_continuous_transfer() {
    let a = smooth_fixture();
    for &lambda in &[
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
    ] {
        let x = propagate(&a, 1.0, lambda).unwrap();
        let mut prev = f64::INFINITY;
        for &n in &[100usize, 200, 400, 800] {
            let h = 1.0 / n as f64;
            let seq = bridge_from_coefficient(&a, 1.0, n, BridgeScheme::Direct).unwrap();
            let z = (C64::new(0.0, 1.0) * lambda * h).exp();
            let m = discrete_transfer(&seq, z);
            let err = frob_diff(&m, &x.entries);
            assert!(
                err < prev,
                "error not shrinking at n = {n}, lambda = {lambda}: {err} vs {prev}"
            );
            prev = err;
        }
        assert!(prev < 2e-3, "residual error {prev} at n = 800, lambda = {lambda}");
    }
}

#[test]
fn constant_coefficient_thousand_step_product() {
    let g = Grid1D::from_range(0.0, 1.0, 1e-3).unwrap();
    let a = SampledFunction::constant(g, C64::new(1.0, 0.0)).unwrap();
    let lambda = C64::new(1.0, 0.0);
    let x = propagate(&a, 1.0, lambda).unwrap();
    let seq = bridge_from_coefficient(&a, 1.0, 1000, BridgeScheme::Direct).unwrap();
    let z = (C64::new(0.0, 1.0) * lambda * 1e-3).exp();
    let m = discrete_transfer(&seq, z);
    assert!(frob_diff(&m, &x.entries) < 1e-2);
}

/// The zero-interleaved sampling, evaluated at the half-step phase, converges
/// to the same limit as the direct sampling.
#[test]
fn zero_padded_scheme_shares_the_limit() {
    let a = smooth_fixture();
    let lambda = C64::new(1.0, 0.0);
    let x = propagate(&a, 1.0, lambda).unwrap();
    let mut prev = f64::INFINITY;
    for &n in &[100usize, 200, 400, 800] {
        let h = 1.0 / n as f64;
        let seq = bridge_from_coefficient(&a, 1.0, n, BridgeScheme::ZeroPadded).unwrap();
        assert_eq!(seq.len(), 2 * n);
        let z = (C64::new(0.0, 1.0) * lambda * (h / 2.0)).exp();
        let m = discrete_transfer(&seq, z);
        let err = frob_diff(&m, &x.entries);
        assert!(err < prev, "error not shrinking at n = {n}: {err} vs {prev}");
        prev = err;
    }
    assert!(prev < 2e-3, "residual error {prev} at n = 800");
}

/// Toeplitz moments of the constant accelerant recover the rational
/// coefficient 1/(2 + r). The constant kernel admits the uniform discrete
/// solution, so the bridge is exact here at every step, not merely O(h).
#[test]
fn toeplitz_bridge_recovers_rational_coefficient() {
    let g = Grid1D::from_range(0.0, 2.0, 1e-3).unwrap();
    let h = AccelerantH::new(SampledFunction::constant(g.clone(), C64::new(0.5, 0.0)).unwrap())
        .unwrap();
    let a_ref = SampledFunction::from_fn(g, |x| C64::new(1.0 / (2.0 + x), 0.0)).unwrap();
    for &n in &[50usize, 200] {
        let seq = bridge_from_moments(&h, 2.0, n).unwrap();
        let dev = bridge_deviation(&a_ref, &seq, 2.0, 0.2);
        assert!(dev < 1e-12, "deviation {dev:.3e} at n = {n}");
    }
}

/// For a generic smooth accelerant the Toeplitz bridge converges to the
/// coefficient produced by the resolvent-boundary direction, an independent
/// code path through the same moment data.
#[test]
fn toeplitz_bridge_agrees_with_resolvent_direction() {
    let g = Grid1D::from_range(0.0, 1.0, 1e-2).unwrap();
    let h = AccelerantH::new(
        SampledFunction::from_fn(g, |x| {
            C64::new(0.35 * (2.0 * x).cos(), 0.25 * (3.0 * x).sin())
        })
        .unwrap(),
    )
    .unwrap();
    let a_ref = h_to_a(&h, 2.5e-3).unwrap();
    let mut prev = f64::INFINITY;
    for &n in &[25usize, 50, 100] {
        let seq = bridge_from_moments(&h, 1.0, n).unwrap();
        let dev = bridge_deviation(&a_ref, &seq, 1.0, 0.1);
        assert!(dev < prev, "deviation not shrinking at n = {n}: {dev} vs {prev}");
        prev = dev;
    }
    assert!(prev < 3e-2, "residual deviation {prev} at n = 100");
}

/// The exponentiated log-density bridge agrees with an independent reference:
/// the accelerant built from the same log-density by series expansion, pushed
/// through the Toeplitz direction.
#[test]
fn logdensity_bridge_matches_accelerant_series() {
    let g = Grid1D::from_range(0.0, 1.5, 5e-3).unwrap();
    let l = SampledFunction::from_fn(g, |x| {
        let u = (x - 0.4) / 0.25;
        C64::new(0.3 * (-u * u).exp(), 0.0)
    })
    .unwrap();
    let h_ref = accelerant_from_logdensity(&l, &[]).unwrap();
    let a_ref = h_to_a(&h_ref, 5e-3).unwrap();
    let mut prev = f64::INFINITY;
    for &n in &[60usize, 120] {
        let seq = bridge_from_logdensity(&l, 1.5, n).unwrap();
        let dev = bridge_deviation(&a_ref, &seq, 1.5, 0.15);
        assert!(dev < prev, "deviation not shrinking at n = {n}: {dev} vs {prev}");
        prev = dev;
    }
    assert!(prev < 3e-2, "residual deviation {prev} at n = 120");
}

/// An eight-parameter measure with explicit density
/// prod(1 - |a_j|^2) / (2 pi |Phi*_8|^2) round-trips through quadrature
/// moments back to the same parameters.
#[test]
fn explicit_density_round_trips_to_parameters() {
    let params = vec![
        C64::new(0.3, -0.1),
        C64::new(-0.25, 0.2),
        C64::new(0.1, 0.4),
        C64::new(-0.35, 0.0),
        C64::new(0.15, -0.15),
        C64::new(0.2, 0.1),
        C64::new(-0.1, -0.3),
        C64::new(0.05, 0.45),
    ];
    let a = VerblunskySeq::new(params.clone()).unwrap();
    let norm: f64 = params.iter().map(|v| 1.0 - v.norm_sqr()).product();
    let quad = 8192;
    let mut moments = vec![C64::new(0.0, 0.0); 9];
    for q in 0..quad {
        let theta = std::f64::consts::TAU * q as f64 / quad as f64;
        let z = C64::new(0.0, theta).exp();
        let (_, phi_star) = szego_recursion(&a, z);
        let density = norm / phi_star.norm_sqr();
        for (k, m) in moments.iter_mut().enumerate() {
            *m += density * C64::new(0.0, -(k as f64) * theta).exp();
        }
    }
    for m in moments.iter_mut() {
        *m /= quad as f64;
    }
    assert!(
        (moments[0] - C64::new(1.0, 0.0)).norm() < 1e-12,
        "normalization constant is off: c_0 = {}",
        moments[0]
    );
    let back = verblunsky_from_moments(&MomentSeq::new(moments).unwrap()).unwrap();
    for (j, &expect) in params.iter().enumerate() {
        assert!(
            (back.get(j) - expect).norm() < 1e-8,
            "parameter {j}: {} vs {expect}",
            back.get(j)
        );
    }
}

#[test]
fn zero_accelerant_bridges_to_zero_parameters() {
    let g = Grid1D::from_range(0.0, 1.0, 1e-2).unwrap();
    let h = AccelerantH::new(SampledFunction::zero(g)).unwrap();
    let seq = bridge_from_moments(&h, 1.0, 40).unwrap();
    assert!(seq.params().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn coarse_sampling_of_large_coefficient_is_rejected() {
    let g = Grid1D::from_range(0.0, 1.0, 1e-2).unwrap();
    let a = SampledFunction::constant(g, C64::new(1.0, 0.0)).unwrap();
    match bridge_from_coefficient(&a, 1.0, 1, BridgeScheme::Direct) {
        Err(OpucError::StepCoefficientTooLarge { max_abs, .. }) => {
            assert!((max_abs - 1.0).abs() < 1e-12)
        }
        other => panic!("expected step rejection, got {other:?}"),
    }
}

#[test]
fn range_beyond_sampled_data_is_rejected() {
    let g = Grid1D::from_range(0.0, 1.0, 1e-2).unwrap();
    let h = AccelerantH::new(SampledFunction::zero(g)).unwrap();
    match bridge_from_moments(&h, 1.5, 10) {
        Err(OpucError::RangeBeyondData { .. }) => {}
        other => panic!("expected range rejection, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// det M(0, n, z) = z^n prod(1 - |a_j|^2): each Z contributes z, each
    /// elementary factor 1 - |a_j|^2.
    #[test]
    fn transfer_determinant_factorizes(
        params in prop::collection::vec(disc_point(), 0..6),
        z in complex_on_circle(),
    ) {
        let n = params.len();
        let seq = VerblunskySeq::new(params.clone()).unwrap();
        let m = discrete_transfer(&seq, z);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let expect = z.powu(n as u32)
            * params.iter().map(|a| 1.0 - a.norm_sqr()).product::<f64>();
        prop_assert!((det - expect).norm() < 1e-12 * (1.0 + expect.norm()));
    }
}

fn complex_on_circle() -> impl Strategy<Value = C64> {
    (0.0..std::f64::consts::TAU).prop_map(|t| C64::new(0.0, t).exp())
}
