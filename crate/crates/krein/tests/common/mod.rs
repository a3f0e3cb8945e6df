#![allow(dead_code)]

use krein::core::{Grid1D, SampledFunction, C64};
use proptest::prelude::*;

/// Random smooth complex coefficient on [0, 2], step 1e-3: three trig modes
/// with bounded amplitudes. Small enough that no fixture approaches an
/// accelerant positivity boundary.
pub fn smooth_coeff() -> impl Strategy<Value = SampledFunction> {
    (
        prop::array::uniform3(-0.6f64..0.6),
        prop::array::uniform3(-0.6f64..0.6),
    )
        .prop_map(|(cr, ci)| {
            let g = Grid1D::from_range(0.0, 2.0, 1e-3).unwrap();
            SampledFunction::from_fn(g, |x| {
                let mut v = C64::new(0.0, 0.0);
                for k in 0..3 {
                    let w = (k + 1) as f64;
                    v += C64::new(cr[k] * (w * x).cos(), ci[k] * (w * x).sin());
                }
                v
            })
            .unwrap()
        })
}

/// Complex number in the square [-m, m]^2.
pub fn complex_in(m: f64) -> impl Strategy<Value = C64> {
    (-m..m, -m..m).prop_map(|(re, im)| C64::new(re, im))
}

/// Complex number in the open unit disc (radius capped at 0.95).
pub fn disc_point() -> impl Strategy<Value = C64> {
    (0.0..0.95f64, 0.0..std::f64::consts::TAU)
        .prop_map(|(r, th)| C64::new(r * th.cos(), r * th.sin()))
}

/// The constant coefficient A = 1 on [0, 1] at step 1e-3.
pub fn coeff_one() -> SampledFunction {
    let g = Grid1D::from_range(0.0, 1.0, 1e-3).unwrap();
    SampledFunction::constant(g, C64::new(1.0, 0.0)).unwrap()
}

pub fn frob_diff(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            acc += (a[i][j] - b[i][j]).norm_sqr();
        }
    }
    acc.sqrt()
}
