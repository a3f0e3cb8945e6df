//! Algebraic invariants of the transfer matrix, the polynomial quadruple,
//! and the Wall functions, checked over random smooth coefficients.

mod common;

use common::{coeff_one, disc_point, frob_diff, smooth_coeff};
use krein::core::{Grid1D, SampledFunction, C64};
use krein::krein_ode::{
    eval_polys, mat2_mul, propagate, propagate_from, pseudohyperbolic, schur_evolve_backward,
    wall, OdeConfig,
};
use proptest::prelude::*;

fn budget_lambda(re: f64, im: f64, real_axis: bool) -> C64 {
    if real_axis {
        C64::new(re, 0.0)
    } else {
        C64::new(re, im)
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    // |lambda| <= 10, r <= 2, step 1e-3: the declared residual budget
    #[test]
    fn determinant_and_j_unitarity(
        a in smooth_coeff(),
        re in -8.0..8.0f64,
        im in 0.0..6.0f64,
        r in 0.0..2.0f64,
        real_axis in any::<bool>(),
    ) {
        let lam = budget_lambda(re, im, real_axis);
        let x = propagate(&a, r, lam).unwrap();
        prop_assert!(x.det_residual() < 1e-8);
        if lam.im == 0.0 {
            prop_assert!(x.j_residual() < 1e-7);
        } else {
            let w = x.wall();
            prop_assert!(w.a_w.norm_sqr() - w.b_w.norm_sqr() >= 1.0 - 1e-7 * (1.0 + w.a_w.norm_sqr()));
        }
    }

    #[test]
    fn dual_sign_symmetry(
        a in smooth_coeff(),
        re in -8.0..8.0f64,
        im in 0.0..6.0f64,
        r in 0.0..2.0f64,
    ) {
        // flipping the sign of A conjugates the flow by J = diag(1, -1)
        let lam = C64::new(re, im);
        let neg = a.map(|v| -v);
        let x = propagate(&a, r, lam).unwrap();
        let y = propagate(&neg, r, lam).unwrap();
        let mut jxj = x.entries;
        jxj[0][1] = -jxj[0][1];
        jxj[1][0] = -jxj[1][0];
        prop_assert!(frob_diff(&jxj, &y.entries) < 1e-10 * (1.0 + x.entries[0][0].norm()));
    }

    #[test]
    fn semigroup_composition(
        a in smooth_coeff(),
        re in -8.0..8.0f64,
        im in 0.0..4.0f64,
        r1 in 0.0..1.0f64,
        dr in 0.0..1.0f64,
    ) {
        let lam = C64::new(re, im);
        let cfg = OdeConfig::default();
        let x02 = propagate(&a, r1 + dr, lam).unwrap();
        let x01 = propagate(&a, r1, lam).unwrap();
        let x12 = propagate_from(&a, r1, r1 + dr, lam, &cfg).unwrap();
        let prod = mat2_mul(&x12.entries, &x01.entries);
        let scale = 1.0 + x02.entries.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(frob_diff(&prod, &x02.entries) < 1e-8 * scale);
    }

    #[test]
    fn polynomial_pairing_identity(
        a in smooth_coeff(),
        re in -8.0..8.0f64,
        im in 0.0..6.0f64,
        r in 0.0..2.0f64,
    ) {
        // P P-hat-star + P-star P-hat = 2 e^{i lambda r}
        let lam = C64::new(re, im);
        let p = eval_polys(&a, r, lam).unwrap();
        let want = 2.0 * (C64::i() * lam * r).exp();
        let resid = (p.p * p.p_hat_star + p.p_star * p.p_hat - want).norm();
        prop_assert!(resid < 1e-8 * want.norm().max(1.0));
    }

    #[test]
    fn star_reflection(
        a in smooth_coeff(),
        re in -8.0..8.0f64,
        im in -4.0..4.0f64,
        r in 0.0..2.0f64,
    ) {
        // P(r, lambda) = e^{i lambda r} conj(P*(r, conj lambda))
        let lam = C64::new(re, im);
        let p = eval_polys(&a, r, lam).unwrap();
        let q = eval_polys(&a, r, lam.conj()).unwrap();
        let want = (C64::i() * lam * r).exp() * q.p_star.conj();
        prop_assert!((p.p - want).norm() < 1e-8 * (1.0 + want.norm()));
        if lam.im == 0.0 {
            prop_assert!((p.p.norm() - p.p_star.norm()).abs() < 1e-9 * (1.0 + p.p.norm()));
        }
    }

    #[test]
    fn wall_identities(
        a in smooth_coeff(),
        re in -8.0..8.0f64,
        im in 0.0..6.0f64,
        r in 0.0..2.0f64,
        real_axis in any::<bool>(),
    ) {
        let lam = budget_lambda(re, im, real_axis);
        let w = wall(&a, r, lam).unwrap();
        // energy identity at every lambda
        let want = (C64::i() * lam * r).exp();
        let resid = (w.a_w * w.a_w_star - w.b_w * w.b_w_star - want).norm();
        prop_assert!(resid < 1e-8 * want.norm().max(1.0));
        if lam.im == 0.0 {
            prop_assert!((w.a_w.norm_sqr() - w.b_w.norm_sqr() - 1.0).abs() < 1e-8 * (1.0 + w.a_w.norm_sqr()));
            prop_assert!((w.a_w.norm() - w.a_w_star.norm()).abs() < 1e-8 * (1.0 + w.a_w.norm()));
            prop_assert!((w.b_w.norm() - w.b_w_star.norm()).abs() < 1e-8 * (1.0 + w.b_w.norm()));
        }
    }

    #[test]
    fn gronwall_envelope(
        a in smooth_coeff(),
        re in -15.0..15.0f64,
        r in 0.0..2.0f64,
    ) {
        // e^{-Int |A|} <= |P*(r, lambda)| <= e^{Int |A|} on the real axis
        let lam = C64::new(re, 0.0);
        let p = eval_polys(&a, r, lam).unwrap();
        // knot-aligned trapezoid of |A| over [0, r]; |A| is convex on each
        // cell, so this over-estimates the integral and both envelope bounds
        // stay valid
        let budget: f64 = {
            let h = a.grid().step();
            let mut xs: Vec<f64> = Vec::new();
            let mut x = 0.0;
            while x < r - 1e-12 {
                xs.push(x);
                x += h;
            }
            xs.push(r);
            let f: Vec<f64> = xs.iter().map(|&x| a.eval_linear(x).norm()).collect();
            (0..xs.len() - 1)
                .map(|i| 0.5 * (f[i] + f[i + 1]) * (xs[i + 1] - xs[i]))
                .sum()
        };
        prop_assert!(p.p_star.norm() <= (budget).exp() * (1.0 + 1e-6));
        prop_assert!(p.p_star.norm() >= (-budget).exp() * (1.0 - 1e-6));
    }

    #[test]
    fn backward_schur_is_a_contraction(
        a in smooth_coeff(),
        z1 in disc_point(),
        z2 in disc_point(),
        re in -5.0..5.0f64,
        im in 0.0..3.0f64,
        real_axis in any::<bool>(),
    ) {
        let lam = budget_lambda(re, im, real_axis);
        let f1 = schur_evolve_backward(&a, z1, lam).unwrap();
        let f2 = schur_evolve_backward(&a, z2, lam).unwrap();
        prop_assert!(f1.norm() <= 1.0 + 1e-9);
        let before = pseudohyperbolic(z1, z2);
        let after = pseudohyperbolic(f1, f2);
        if lam.im == 0.0 {
            // J-unitary on the real axis: the distance is preserved
            prop_assert!((after - before).abs() < 1e-7 * (1.0 + before));
        } else {
            prop_assert!(after <= before + 1e-9);
        }
    }
}

#[test]
fn p_star_zero_free_on_test_lattice() {
    let fixtures: Vec<SampledFunction> = vec![coeff_one(), {
        let g = Grid1D::from_range(0.0, 1.5, 1e-3).unwrap();
        SampledFunction::from_fn(g, |x| C64::new(0.8 * (2.0 * x).cos(), 0.5 * x.sin())).unwrap()
    }];
    for a in &fixtures {
        let r = a.grid().end();
        let mut min_abs = f64::INFINITY;
        for i in -20..=20 {
            for j in 0..=10 {
                let lam = C64::new(i as f64 * 0.5, j as f64 * 0.5);
                let p = eval_polys(a, r, lam).unwrap();
                min_abs = min_abs.min(p.p_star.norm());
            }
        }
        assert!(min_abs > 1e-6, "min |P*| on lattice = {min_abs:.3e}");
    }
}

#[test]
fn p_bounded_high_in_upper_plane() {
    // P(r, iy) = e^{-yr} - Int_0^r A(r, s) e^{-ys} ds, so |P(r, iy)| stays
    // bounded (by 1 + ||A(r, .)||_1 <= 1 + e^{Int |A|}) and decays as the
    // kernel gets cut down to s ~ 1/y
    let a = coeff_one();
    let budget: f64 = 1.0; // Int_0^1 |A| for A = 1
    let cap = 1.0 + budget.exp();
    let mut prev = f64::INFINITY;
    for &im in &[10.0, 100.0] {
        let p = eval_polys(&a, 1.0, C64::new(0.0, im)).unwrap();
        let m = p.p.norm();
        assert!(m <= cap, "|P(1, {im} i)| = {m}");
        assert!(m < prev, "|P(1, iy)| should shrink as y grows");
        prev = m;
    }
}

#[test]
fn wall_energy_spec_point() {
    let w = wall(&coeff_one(), 1.0, C64::new(1.0, 0.5)).unwrap();
    let want = (C64::i() * C64::new(1.0, 0.5)).exp();
    assert!((w.a_w * w.a_w_star - w.b_w * w.b_w_star - want).norm() < 1e-8);
}

#[test]
fn gronwall_spec_interval() {
    for &l in &[-7.3, -2.0, 0.0, 1.1, 4.9, 12.0] {
        let p = eval_polys(&coeff_one(), 1.0, C64::new(l, 0.0)).unwrap();
        let m = p.p_star.norm();
        assert!(m <= 1.0f64.exp() * (1.0 + 1e-9) && m >= (-1.0f64).exp() * (1.0 - 1e-9));
    }
}
