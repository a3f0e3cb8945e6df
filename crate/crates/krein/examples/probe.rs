//! Scratch probe for acceptance-tolerance measurements.

use krein::accelerant::{a_to_h, accelerant_from_logdensity, c_transfer, h_to_a, AccelerantH};
use krein::core::{Grid1D, SampledFunction, C64};
use krein::krein_ode::propagate;
use krein::opuc::{bridge_from_coefficient, discrete_transfer, BridgeScheme};
use krein::scattering::schrodinger_reduce;
use krein::spectral::{strong_szego, trace_formulas};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn frob_diff(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += (a[i][j] - b[i][j]).norm_sqr();
        }
    }
    s.sqrt()
}

fn main() {
    // criterion 5: constant pair round trip, both directions, both steps
    for &step in &[1e-3f64, 5e-4] {
        let t = Instant::now();
        let g = Grid1D::from_range(0.0, 4.0, step).unwrap();
        let h = AccelerantH::new(SampledFunction::constant(g.clone(), C64::new(0.5, 0.0)).unwrap())
            .unwrap();
        let a = h_to_a(&h, step).unwrap();
        let mut sup = 0.0f64;
        for i in 0..a.len() {
            let r = a.grid().point(i);
            if r >= 0.2 {
                sup = sup.max((a.value(i) - C64::new(1.0 / (2.0 + r), 0.0)).norm());
            }
        }
        println!("c5 fwd step {step:.0e}: sup {sup:.3e}  ({:.2}s)", t.elapsed().as_secs_f64());
        let t = Instant::now();
        let coeff =
            SampledFunction::from_fn(g, |r| C64::new(1.0 / (2.0 + r), 0.0)).unwrap();
        let h2 = a_to_h(&coeff).unwrap();
        let mut sup = 0.0f64;
        for i in 0..h2.h_plus.len() {
            let x = h2.h_plus.grid().point(i);
            if x >= 0.2 {
                sup = sup.max((h2.h_plus.value(i) - C64::new(0.5, 0.0)).norm());
            }
        }
        println!("c5 inv step {step:.0e}: sup {sup:.3e}  ({:.2}s)", t.elapsed().as_secs_f64());
    }

    // criterion 6: constant coefficient bridge at lambda = 1
    let t = Instant::now();
    let g = Grid1D::from_range(0.0, 1.0, 1e-3).unwrap();
    let a = SampledFunction::constant(g, C64::new(1.0, 0.0)).unwrap();
    let lambda = C64::new(1.0, 0.0);
    let x = propagate(&a, 1.0, lambda).unwrap();
    for &n in &[100usize, 200, 400, 800] {
        let h = 1.0 / n as f64;
        let seq = bridge_from_coefficient(&a, 1.0, n, BridgeScheme::Direct).unwrap();
        let z = (C64::new(0.0, 1.0) * lambda * h).exp();
        let m = discrete_transfer(&seq, z);
        println!("c6 n {n}: diff {:.4e}", frob_diff(&m, &x.entries));
    }
    println!("c6 total ({:.2}s)", t.elapsed().as_secs_f64());

    // criterion 8: eigenvalue-route det2 against exp(-1/2)
    let t = Instant::now();
    let g = Grid1D::from_range(0.0, 1.0, 2e-3).unwrap();
    let a = SampledFunction::constant(g, C64::new(1.0, 0.0)).unwrap();
    let h = a_to_h(&a).unwrap();
    let report = strong_szego(&a, &h, None).unwrap();
    let expect = (-0.5f64).exp();
    println!(
        "c8: det2_eigen {:.8} rel gap {:.3e}  ({:.2}s)",
        report.det2_eigen,
        (report.det2_eigen - expect).abs() / expect,
        t.elapsed().as_secs_f64()
    );

    // criterion 9: log-density pipeline with a centered Gaussian bump
    let t = Instant::now();
    let g = Grid1D::from_range(0.0, 8.0, 4e-3).unwrap();
    let l = SampledFunction::from_fn(g, |x| {
        if x <= 1.0 {
            C64::new(0.25 * (-(x / 0.3) * (x / 0.3)).exp(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
    .unwrap();
    let h = accelerant_from_logdensity(&l, &[]).unwrap();
    let a = h_to_a(&h, 4e-3).unwrap();
    let report = strong_szego(&a, &h, Some(&l)).unwrap();
    let l_energy = report.l.unwrap();
    println!(
        "c9: G {:.6e} L {:.6e} rel {:.3e}  ({:.2}s)",
        report.g,
        l_energy,
        (report.g - l_energy).abs() / l_energy,
        t.elapsed().as_secs_f64()
    );
    for &r in &[1.0f64, 2.0, 4.0, 8.0] {
        let i = ((r - report.t_grid.start()) / report.t_grid.step()).round() as usize;
        println!("c9: T_{r} = {:.8}", report.t_r[i]);
    }

    // criterion 10: boundary value of the dual transfer kernel, random fixtures
    let t = Instant::now();
    for seed in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(11 + seed);
        let (c1, c2, c3) = (
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
        );
        let g = Grid1D::from_range(0.0, 1.0, 2e-3).unwrap();
        let a = SampledFunction::from_fn(g, |x| {
            C64::new(
                c1 + c2 * (std::f64::consts::PI * x).cos() + c3 * (2.0 * x).sin(),
                0.0,
            )
        })
        .unwrap();
        let h = a_to_h(&a).unwrap();
        let c = c_transfer(&h);
        println!(
            "c10 seed {seed}: |C(0)+A(0)| = {:.3e}",
            (c.value(0) + a.value(0)).norm()
        );
    }
    println!("c10 total ({:.2}s)", t.elapsed().as_secs_f64());

    // criterion 14: Riccati family potential residual at fine step
    let t = Instant::now();
    let g = Grid1D::from_range(0.0, 2.0, 1e-4).unwrap();
    let a = SampledFunction::from_fn(g, |x| C64::new(-1.0 / (2.0 + x), 0.0)).unwrap();
    let red = schrodinger_reduce(&a).unwrap();
    let sup = red.q1.max_abs();
    println!("c14: sup |q1| {:.3e}  ({:.2}s)", sup, t.elapsed().as_secs_f64());

    // criterion 7: trace formula on the wide acceptance grid
    let t = Instant::now();
    let g = Grid1D::from_range(0.0, 1.0, 1e-3).unwrap();
    let a = SampledFunction::constant(g, C64::new(1.0, 0.0)).unwrap();
    let lg = Grid1D::from_range(-200.0, 200.0, 0.01).unwrap();
    let report = trace_formulas(&a, lg).unwrap();
    let (lhs, rhs) = report.log_modulus;
    println!(
        "c7: lhs {:.6} rhs {:.6} rel {:.3e}  ({:.2}s)",
        lhs,
        rhs,
        (lhs - rhs).abs() / rhs,
        t.elapsed().as_secs_f64()
    );
}
