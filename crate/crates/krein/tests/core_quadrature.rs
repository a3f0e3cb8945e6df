//! Quadrature and transform contracts of the shared numerics layer.

mod common;

use common::complex_in;
use krein::core::{
    fourier_integral, hermitian_symbol, inverse_fourier_halfline, read_measure, read_sampled,
    trapezoid, write_measure, write_sampled, Grid1D, SampledFunction, SpectralMeasure, C64,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn trapezoid_exact_for_affine(
        a in complex_in(3.0),
        b in complex_in(3.0),
        start in -2.0..2.0f64,
        span in 0.1..4.0f64,
    ) {
        let g = Grid1D::new(start, span / 64.0, 65).unwrap();
        let f = SampledFunction::from_fn(g.clone(), |x| a + b * x).unwrap();
        let got = trapezoid(&f);
        let end = g.end();
        let want = a * (end - start) + b * 0.5 * (end * end - start * start);
        prop_assert!((got - want).norm() <= 1e-13 * (1.0 + want.norm()));
    }

    #[test]
    fn fourier_integral_is_linear(
        seed_f in prop::collection::vec(complex_in(1.0), 33),
        seed_g in prop::collection::vec(complex_in(1.0), 33),
        alpha in complex_in(1.0),
        beta in complex_in(1.0),
        re in -5.0..5.0f64,
        im in -0.5..0.5f64,
    ) {
        let grid = Grid1D::new(0.0, 1.0 / 32.0, 33).unwrap();
        let f = SampledFunction::new(grid.clone(), seed_f).unwrap();
        let g = SampledFunction::new(grid.clone(), seed_g).unwrap();
        let lambda = C64::new(re, im);
        let combo = SampledFunction::new(
            grid,
            f.values()
                .iter()
                .zip(g.values())
                .map(|(&fv, &gv)| alpha * fv + beta * gv)
                .collect(),
        )
        .unwrap();
        let lhs = fourier_integral(&combo, lambda).unwrap();
        let rhs = alpha * fourier_integral(&f, lambda).unwrap()
            + beta * fourier_integral(&g, lambda).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (f.norm_l1() + g.norm_l1() + 1e-30));
    }

    #[test]
    fn csv_round_trip_is_bit_exact(
        vals in prop::collection::vec(complex_in(1e6), 2..40),
        start in -10.0..10.0f64,
        step in 1e-6..1e3f64,
    ) {
        let grid = Grid1D::new(start, step, vals.len()).unwrap();
        let f = SampledFunction::new(grid, vals).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_sampled(&path, &f).unwrap();
        let back = read_sampled(&path).unwrap();
        prop_assert_eq!(f.values(), back.values());
    }

    #[test]
    fn hermitian_symbol_stays_real(
        cr in prop::array::uniform3(-1.0f64..1.0),
        ci in prop::array::uniform2(-1.0f64..1.0),
        lambda in -15.0..15.0f64,
    ) {
        // Hermitian data: real part even-generated, imaginary part vanishing
        // at x = 0 so the extension H(-x) = conj(H(x)) is continuous
        let g = Grid1D::from_range(0.0, 3.0, 0.005).unwrap();
        let h = SampledFunction::from_fn(g, |x| {
            let decay = (-x).exp();
            C64::new(
                decay * (cr[0] + cr[1] * (2.0 * x).cos() + cr[2] * x.cos()),
                decay * (ci[0] * x.sin() + ci[1] * (3.0 * x).sin()),
            )
        })
        .unwrap();
        let s = hermitian_symbol(&h, lambda);
        prop_assert!(s.im.abs() < 1e-10);
    }
}

#[test]
fn gaussian_bump_round_trip() {
    // forward transform on [0, 1], inversion back on the x-grid
    let xg = Grid1D::from_range(0.0, 1.0, 0.01).unwrap();
    let f = SampledFunction::from_fn(xg.clone(), |x| {
        C64::new((-((x - 0.5) / 0.15).powi(2)).exp(), 0.0)
    })
    .unwrap();
    let lg = Grid1D::from_range(-60.0, 60.0, 0.05).unwrap();
    let g = SampledFunction::from_fn(lg, |l| {
        fourier_integral(&f, C64::new(l, 0.0)).unwrap()
    })
    .unwrap();
    let (back, report) = inverse_fourier_halfline(&g, &xg, 1e-6);
    assert!(!report.truncated, "tails {:.2e}/{:.2e}", report.left, report.right);
    let worst = f
        .values()
        .iter()
        .zip(back.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "round-trip error {worst:.3e}");
}

#[test]
fn measure_files_round_trip() {
    let g = Grid1D::from_range(-5.0, 5.0, 0.1).unwrap();
    let density = SampledFunction::from_fn(g, |l| C64::new(1.0 / (1.0 + l * l), 0.0)).unwrap();
    let m = SpectralMeasure::new(density, vec![(-1.5, 0.25), (0.0, 1.0)]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let dpath = dir.path().join("density.csv");
    let mpath = dir.path().join("masses.txt");
    write_measure(&dpath, &mpath, &m).unwrap();
    let back = read_measure(&dpath, &mpath).unwrap();
    assert_eq!(m, back);
}
