//! End-to-end verification suites over the public API: each criterion pins a
//! fixture, a comparison route, and a tolerance, and reports pass or fail with
//! the measured numbers. `core` exercises the propagator, `identities` the
//! exact relations every run must honor, `bridges` the maps between
//! representations.

use crate::accelerant::{a_to_h, accelerant_from_logdensity, c_transfer, h_to_a, AccelerantH};
use crate::core::{Grid1D, SampledFunction, C64};
use crate::krein_ode::{
    propagate, reproducing_kernel, reproducing_kernel_confluent, reproducing_kernel_quadrature,
};
use crate::opuc::{bridge_from_coefficient, discrete_transfer, BridgeScheme};
use crate::scattering::{
    dirac_density, gelfand_levitan_check, hankel_inverse_scattering, scattering_data_dirac,
    scattering_datum, schrodinger_reduce,
};
use crate::spectral::{bernstein_szego_density, strong_szego, trace_formulas};
use crate::zeros::{count_zeros, find_zeros, zero_asymptote, Rectangle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::time::Instant;

/// Outcome of one pinned check: the measured detail string always carries the
/// numbers that decided `passed`.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:2}. {} ({:.2}s): {}",
            if self.passed { "pass" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

/// Named groups of criteria; `All` runs every check in id order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Core,
    Identities,
    Bridges,
    All,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Suite> {
        match name {
            "core" => Some(Suite::Core),
            "identities" => Some(Suite::Identities),
            "bridges" => Some(Suite::Bridges),
            "all" => Some(Suite::All),
            _ => None,
        }
    }

    pub fn criteria(&self) -> &'static [usize] {
        match self {
            Suite::Core => &[1, 2, 3, 4],
            Suite::Identities => &[7, 8, 10, 11, 12, 14, 16],
            Suite::Bridges => &[5, 6, 9, 13, 15],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Core => "core",
            Suite::Identities => "identities",
            Suite::Bridges => "bridges",
            Suite::All => "all",
        })
    }
}

/// Runs one criterion by id (1..=16). Internal errors on the pinned fixtures
/// are reported as failures, never panics.
pub fn run_criterion(id: usize) -> CriterionResult {
    let (name, body): (&'static str, fn() -> Outcome) = match id {
        1 => ("constant coefficient closed form", c01),
        2 => ("determinant phase law", c02),
        3 => ("signature matrix invariance", c03),
        4 => ("reproducing kernel routes", c04),
        5 => ("constant pair round trip", c05),
        6 => ("discrete transfer convergence", c06),
        7 => ("log modulus trace formula", c07),
        8 => ("regularized determinant routes", c08),
        9 => ("szego energy balance", c09),
        10 => ("dual kernel boundary value", c10),
        11 => ("zero chart consistency", c11),
        12 => ("scattering energy and density", c12),
        13 => ("inverse scattering round trip", c13),
        14 => ("riccati flat potential", c14),
        15 => ("gelfand levitan cross route", c15),
        16 => ("accelerant covariances", c16),
        _ => panic!("criterion id {id} out of range 1..=16"),
    };
    let t = Instant::now();
    let (passed, detail) = body().unwrap_or_else(|e| (false, e));
    CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds: t.elapsed().as_secs_f64(),
    }
}

/// Runs a suite in id order.
pub fn run_suite(suite: Suite) -> Vec<CriterionResult> {
    suite.criteria().iter().map(|&id| run_criterion(id)).collect()
}

type Outcome = Result<(bool, String), String>;

fn err_str<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

fn constant_one(end: f64, step: f64) -> SampledFunction {
    let g = Grid1D::from_range(0.0, end, step).unwrap();
    SampledFunction::constant(g, C64::new(1.0, 0.0)).unwrap()
}

fn frob_diff(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += (a[i][j] - b[i][j]).norm_sqr();
        }
    }
    s.sqrt()
}

/// X(1, 0) for the unit coefficient is the hyperbolic rotation by the
/// coefficient mass, entrywise to 1e-8, inside one second.
fn c01() -> Outcome {
    let t = Instant::now();
    let a = constant_one(1.0, 1e-3);
    let x = propagate(&a, 1.0, C64::new(0.0, 0.0)).map_err(err_str)?;
    let (c, s) = (1.0f64.cosh(), 1.0f64.sinh());
    let want = [
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(-s, 0.0), C64::new(c, 0.0)],
    ];
    let mut err = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            err = err.max((x.entries[i][j] - want[i][j]).norm());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    Ok((
        err < 1e-8 && secs < 1.0,
        format!("entry error {err:.3e} (tol 1e-8) in {secs:.3}s (limit 1s)"),
    ))
}

/// det X(r, lambda) = e^{i lambda r} to 1e-8 across real and complex lambda.
fn c02() -> Outcome {
    let a = constant_one(2.0, 1e-3);
    let lambdas = [
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(5.0, 0.0),
        C64::new(2.0, 3.0),
    ];
    let mut worst = 0.0f64;
    for &lam in &lambdas {
        for &r in &[0.5, 1.0, 2.0] {
            let x = propagate(&a, r, lam).map_err(err_str)?;
            let res = (x.det() - (C64::new(0.0, 1.0) * lam * r).exp()).norm();
            worst = worst.max(res);
        }
    }
    Ok((worst < 1e-8, format!("worst |det - phase| {worst:.3e} (tol 1e-8)")))
}

/// X* J X = J on the real axis to 1e-7 in Frobenius norm.
fn c03() -> Outcome {
    let a = constant_one(2.0, 1e-3);
    let mut worst = 0.0f64;
    for &lam in &[-5.0, 0.0, 5.0] {
        for &r in &[0.5, 1.0, 2.0] {
            let x = propagate(&a, r, C64::new(lam, 0.0)).map_err(err_str)?;
            worst = worst.max(x.j_residual());
        }
    }
    Ok((worst < 1e-7, format!("worst J residual {worst:.3e} (tol 1e-7)")))
}

/// Christoffel-Darboux closed form against direct quadrature, at a separated
/// pair and at a confluent one.
fn c04() -> Outcome {
    let a = constant_one(1.0, 1e-3);
    let (lp, lam) = (C64::new(0.0, 2.0), C64::new(0.0, 1.0));
    let closed = reproducing_kernel(&a, 1.0, lp, lam).map_err(err_str)?;
    let quad = reproducing_kernel_quadrature(&a, 1.0, lp, lam).map_err(err_str)?;
    let sep = (closed - quad).norm();
    let one = C64::new(1.0, 0.0);
    let conf = reproducing_kernel_confluent(&a, 1.0, one).map_err(err_str)?;
    let quad_c = reproducing_kernel_quadrature(&a, 1.0, one, one).map_err(err_str)?;
    let con = (conf - quad_c).norm();
    Ok((
        sep < 1e-7 && con < 1e-7,
        format!("separated gap {sep:.3e}, confluent gap {con:.3e} (tol 1e-7)"),
    ))
}

/// The constant accelerant 1/2 and the coefficient 1/(2+r) map onto each
/// other within 2e-3 on [0.2, 4], and halving the step does not lose
/// accuracy. Both directions sit at rounding level or improve strictly.
fn c05() -> Outcome {
    let mut fwd = [0.0f64; 2];
    let mut inv = [0.0f64; 2];
    for (k, &step) in [1e-3f64, 5e-4].iter().enumerate() {
        let g = Grid1D::from_range(0.0, 4.0, step).map_err(err_str)?;
        let half = SampledFunction::constant(g.clone(), C64::new(0.5, 0.0)).map_err(err_str)?;
        let a = h_to_a(&AccelerantH::new(half).map_err(err_str)?, step).map_err(err_str)?;
        let mut sup = 0.0f64;
        for (i, r) in a.grid().points().enumerate() {
            if r >= 0.2 {
                sup = sup.max((a.value(i) - C64::new(1.0 / (2.0 + r), 0.0)).norm());
            }
        }
        fwd[k] = sup;
        let coeff =
            SampledFunction::from_fn(g, |r| C64::new(1.0 / (2.0 + r), 0.0)).map_err(err_str)?;
        let h = a_to_h(&coeff).map_err(err_str)?;
        let mut sup = 0.0f64;
        for (i, x) in h.h_plus.grid().points().enumerate() {
            if x >= 0.2 {
                sup = sup.max((h.h_plus.value(i) - C64::new(0.5, 0.0)).norm());
            }
        }
        inv[k] = sup;
    }
    // the refinement clause is read above a rounding floor: the forward
    // solve reproduces 1/(2+r) exactly on this family, so both sups are
    // accumulation dust
    let floor = 1e-10;
    let refines = |s: &[f64; 2]| s[1] < s[0] || (s[0] < floor && s[1] < floor);
    let ok = fwd[0] < 2e-3 && inv[0] < 2e-3 && refines(&fwd) && refines(&inv);
    Ok((
        ok,
        format!(
            "forward sup {:.3e} -> {:.3e}, inverse sup {:.3e} -> {:.3e} (tol 2e-3, refining)",
            fwd[0], fwd[1], inv[0], inv[1]
        ),
    ))
}

/// Discrete transfer products along sampled parameters converge to the
/// continuous matrix: strictly shrinking over n = 100..800, below 1e-2 at
/// 800, inside five seconds.
fn c06() -> Outcome {
    let t = Instant::now();
    let a = constant_one(1.0, 1e-3);
    let lambda = C64::new(1.0, 0.0);
    let x = propagate(&a, 1.0, lambda).map_err(err_str)?;
    let mut diffs = Vec::new();
    for &n in &[100usize, 200, 400, 800] {
        let h = 1.0 / n as f64;
        let seq = bridge_from_coefficient(&a, 1.0, n, BridgeScheme::Direct).map_err(err_str)?;
        let z = (C64::new(0.0, 1.0) * lambda * h).exp();
        let m = discrete_transfer(&seq, z);
        diffs.push(frob_diff(&m, &x.entries));
    }
    let shrinking = diffs.windows(2).all(|w| w[1] < w[0]);
    let secs = t.elapsed().as_secs_f64();
    let ok = shrinking && diffs[3] < 1e-2 && secs < 5.0;
    Ok((
        ok,
        format!(
            "diffs {:.3e} / {:.3e} / {:.3e} / {:.3e} (final tol 1e-2) in {secs:.2}s",
            diffs[0], diffs[1], diffs[2], diffs[3]
        ),
    ))
}

/// Integrated log modulus of the wall function balances the coefficient
/// energy within 1%, on a wide axis window.
fn c07() -> Outcome {
    let a = constant_one(1.0, 1e-3);
    let lg = Grid1D::from_range(-200.0, 200.0, 0.01).map_err(err_str)?;
    let report = trace_formulas(&a, lg).map_err(err_str)?;
    let (lhs, rhs) = report.log_modulus;
    let rel = (lhs - rhs).abs() / rhs;
    Ok((
        rel < 1e-2,
        format!("log modulus {lhs:.6} vs energy {rhs:.6}, relative {rel:.3e} (tol 1e-2)"),
    ))
}

/// Eigenvalue-product route to the regularized determinant lands within 1e-3
/// relative of the closed-form e^{-1/2} for the unit coefficient.
fn c08() -> Outcome {
    let a = constant_one(1.0, 2e-3);
    let h = a_to_h(&a).map_err(err_str)?;
    let report = strong_szego(&a, &h, None).map_err(err_str)?;
    let expect = (-0.5f64).exp();
    let rel = (report.det2_eigen - expect).abs() / expect;
    Ok((
        rel < 1e-3,
        format!(
            "eigen route {:.8} vs {expect:.8}, relative {rel:.3e} (tol 1e-3)",
            report.det2_eigen
        ),
    ))
}

/// Szego energy functional computed from the coefficient matches the
/// log-density quadratic form within 2%, and the tail weights T_r never
/// decrease.
fn c09() -> Outcome {
    let g = Grid1D::from_range(0.0, 8.0, 4e-3).map_err(err_str)?;
    let l = SampledFunction::from_fn(g, |x| {
        if x <= 1.0 {
            C64::new(0.25 * (-(x / 0.3) * (x / 0.3)).exp(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
    .map_err(err_str)?;
    let h = accelerant_from_logdensity(&l, &[]).map_err(err_str)?;
    let a = h_to_a(&h, 4e-3).map_err(err_str)?;
    let report = strong_szego(&a, &h, Some(&l)).map_err(err_str)?;
    let l_energy = report.l.ok_or("missing log-density energy")?;
    let rel = (report.g - l_energy).abs() / l_energy;
    let mut ts = Vec::new();
    for &r in &[1.0f64, 2.0, 4.0, 8.0] {
        let i = ((r - report.t_grid.start()) / report.t_grid.step()).round() as usize;
        ts.push(report.t_r[i]);
    }
    let monotone = ts.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    Ok((
        rel < 0.02 && monotone,
        format!(
            "G {:.6e} vs L {l_energy:.6e}, relative {rel:.3e} (tol 2e-2); T {:.8}/{:.8}/{:.8}/{:.8}",
            report.g, ts[0], ts[1], ts[2], ts[3]
        ),
    ))
}

/// The dual transfer kernel starts at minus the coefficient, checked on
/// three seeded random smooth fixtures.
fn c10() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(11 + seed);
        let (c1, c2, c3) = (
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
        );
        let g = Grid1D::from_range(0.0, 1.0, 2e-3).map_err(err_str)?;
        let a = SampledFunction::from_fn(g, |x| {
            C64::new(
                c1 + c2 * (std::f64::consts::PI * x).cos() + c3 * (2.0 * x).sin(),
                0.0,
            )
        })
        .map_err(err_str)?;
        let h = a_to_h(&a).map_err(err_str)?;
        let c = c_transfer(&h);
        worst = worst.max((c.value(0) + a.value(0)).norm());
    }
    Ok((
        worst < 1e-6,
        format!("worst |C(0) + A(0)| {worst:.3e} over 3 fixtures (tol 1e-6)"),
    ))
}

/// Argument-principle count agrees with the Newton-refined list in the box,
/// every zero sits in the upper half plane, and deviations from the lattice
/// asymptote shrink outward.
fn c11() -> Outcome {
    let a = constant_one(1.0, 1e-3);
    let rect = Rectangle::new(-20.0, 20.0, 0.01, 5.0).map_err(err_str)?;
    let counted = count_zeros(&a, 1.0, &rect).map_err(err_str)?;
    let report = find_zeros(&a, 1.0, &rect).map_err(err_str)?;
    let found = report.set.len();
    let clean = report.unresolved.is_empty() && report.set.multiplicity_checked();
    let upper = report.set.zeros().iter().all(|z| z.im > 0.0);
    // deviation of each zero from the nearest lattice asymptote; mirror
    // pairs share a modulus level, so compare level by level
    let mut dev_by_mod: Vec<(f64, f64)> = Vec::new();
    for &z in report.set.zeros() {
        let mut dev = f64::INFINITY;
        for n in -15..=15i64 {
            let asym = zero_asymptote(&a, 1.0, n).map_err(err_str)?;
            dev = dev.min((z - asym).norm());
        }
        dev_by_mod.push((z.norm(), dev));
    }
    dev_by_mod.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut levels: Vec<f64> = Vec::new();
    let mut cur_mod = f64::NEG_INFINITY;
    for &(m, d) in &dev_by_mod {
        if (m - cur_mod).abs() > 1e-6 {
            levels.push(d);
            cur_mod = m;
        } else {
            let last = levels.last_mut().unwrap();
            *last = last.max(d);
        }
    }
    let shrinking = levels.windows(2).all(|w| w[1] < w[0]);
    let ok = counted == found && clean && upper && shrinking;
    let lev: Vec<String> = levels.iter().map(|d| format!("{d:.3e}")).collect();
    Ok((
        ok,
        format!(
            "counted {counted}, refined {found}; asymptote deviations by level {}",
            lev.join(" > ")
        ),
    ))
}

/// Wall energy identity and the density doubling between the axis measure
/// and its half-line reduction, both to 1e-8.
fn c12() -> Outcome {
    let a = constant_one(1.0, 1e-3);
    let lg = Grid1D::from_range(-30.0, 30.0, 0.5).map_err(err_str)?;
    let data = scattering_data_dirac(&a, &lg).map_err(err_str)?;
    let energy = data.energy_residual();
    let dens = dirac_density(&data);
    let krein = bernstein_szego_density(&a, 1.0, lg.clone()).map_err(err_str)?;
    let mut doubling = 0.0f64;
    for i in 0..lg.count() {
        doubling = doubling.max((dens.value(i).re - 2.0 * krein.density_at(i)).abs());
    }
    Ok((
        energy < 1e-8 && doubling < 1e-8,
        format!("energy residual {energy:.3e}, density doubling {doubling:.3e} (tol 1e-8)"),
    ))
}

/// Forward scattering datum of the unit coefficient inverts back within
/// 5e-2 on the support and 1e-2 beyond it.
fn c13() -> Outcome {
    let coeff = constant_one(1.0, 1e-2);
    let lambdas = Grid1D::from_range(-200.0, 200.0, 0.25).map_err(err_str)?;
    let xs = Grid1D::from_range(0.0, 2.0, 1e-2).map_err(err_str)?;
    let (d, tail) = scattering_datum(&coeff, &lambdas, &xs, 1e-3).map_err(err_str)?;
    let rec = hankel_inverse_scattering(&d).map_err(err_str)?;
    let mut inside = 0.0f64;
    let mut outside = 0.0f64;
    for (i, r) in rec.grid().points().enumerate() {
        if r <= 1.0 {
            inside = inside.max((rec.value(i) - C64::new(1.0, 0.0)).norm());
        } else {
            outside = outside.max(rec.value(i).norm());
        }
    }
    Ok((
        !tail.truncated && inside < 5e-2 && outside < 1e-2,
        format!("sup on support {inside:.3e} (tol 5e-2), beyond {outside:.3e} (tol 1e-2)"),
    ))
}

/// The coefficient -1/(2+x) has an exactly flat mixed-boundary potential:
/// the Riccati residual stays below 1e-8 pointwise.
fn c14() -> Outcome {
    let g = Grid1D::from_range(0.0, 2.0, 1e-4).map_err(err_str)?;
    let a = SampledFunction::from_fn(g, |x| C64::new(-1.0 / (2.0 + x), 0.0)).map_err(err_str)?;
    let red = schrodinger_reduce(&a).map_err(err_str)?;
    let sup = red.q1.max_abs();
    Ok((sup < 1e-8, format!("sup |q1| {sup:.3e} (tol 1e-8)")))
}

/// Inverse-problem kernel route and the Riccati route produce the same
/// potential within 1e-2 for a Gaussian bump coefficient.
fn c15() -> Outcome {
    let g = Grid1D::from_range(0.0, 1.5, 5e-3).map_err(err_str)?;
    let coeff = SampledFunction::from_fn(g, |x| {
        C64::new(0.3 * (-((x - 0.5) / 0.2).powi(2)).exp(), 0.0)
    })
    .map_err(err_str)?;
    let h = a_to_h(&coeff).map_err(err_str)?;
    let report = gelfand_levitan_check(&h.h_plus, &coeff).map_err(err_str)?;
    Ok((
        report.potential_residual < 1e-2,
        format!(
            "potential sup {:.3e} (tol 1e-2), resolvent {:.3e}, boundary {:.3e}",
            report.potential_residual, report.resolvent_residual, report.boundary_mismatch
        ),
    ))
}

/// Shift, dilation, and conjugation of the constant accelerant act on the
/// coefficient exactly as the covariance laws demand, within 1e-6.
fn c16() -> Outcome {
    let step = 1e-2;
    let t = 1.0;
    let g = Grid1D::from_range(0.0, 2.0, step).map_err(err_str)?;
    let base = SampledFunction::constant(g.clone(), C64::new(0.5, 0.0)).map_err(err_str)?;
    let a = h_to_a(&AccelerantH::new(base.clone()).map_err(err_str)?, step).map_err(err_str)?;

    let shifted = SampledFunction::from_fn(g.clone(), |x| {
        C64::new(0.5, 0.0) * C64::new(0.0, -t * x).exp()
    })
    .map_err(err_str)?;
    let a_shifted =
        h_to_a(&AccelerantH::new(shifted).map_err(err_str)?, step).map_err(err_str)?;
    let mut shift_defect = 0.0f64;
    for (i, r) in a.grid().points().enumerate() {
        let want = a.value(i) * C64::new(0.0, r * t).exp();
        shift_defect = shift_defect.max((a_shifted.value(i) - want).norm());
    }

    let g2 = Grid1D::from_range(0.0, 1.0, step / 2.0).map_err(err_str)?;
    let doubled =
        SampledFunction::constant(g2, C64::new(1.0, 0.0)).map_err(err_str)?;
    let a2 = h_to_a(&AccelerantH::new(doubled).map_err(err_str)?, step / 2.0).map_err(err_str)?;
    let mut dilation_defect = 0.0f64;
    for i in 0..a.len() {
        dilation_defect = dilation_defect.max((a2.value(i) - 2.0 * a.value(i)).norm());
    }

    let conj = AccelerantH::new(base.map(|v| v.conj())).map_err(err_str)?;
    let ac = h_to_a(&conj, step).map_err(err_str)?;
    let mut conj_defect = 0.0f64;
    for i in 0..a.len() {
        conj_defect = conj_defect.max((ac.value(i) - a.value(i).conj()).norm());
    }

    let worst = shift_defect.max(dilation_defect).max(conj_defect);
    Ok((
        worst < 1e-6,
        format!(
            "shift {shift_defect:.3e}, dilation {dilation_defect:.3e}, conjugation {conj_defect:.3e} (tol 1e-6)"
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_partition_the_catalog() {
        let mut ids: Vec<usize> = Suite::Core
            .criteria()
            .iter()
            .chain(Suite::Identities.criteria())
            .chain(Suite::Bridges.criteria())
            .copied()
            .collect();
        ids.sort_unstable();
        assert_eq!(ids, Suite::All.criteria());
        assert_eq!(Suite::All.criteria().len(), 16);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Core, Suite::Identities, Suite::Bridges, Suite::All] {
            assert_eq!(Suite::parse(&s.to_string()), Some(s));
        }
        assert_eq!(Suite::parse("everything"), None);
    }

    #[test]
    fn fast_core_criteria_pass() {
        for id in Suite::Core.criteria() {
            let r = run_criterion(*id);
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn display_carries_the_verdict() {
        let r = CriterionResult {
            id: 3,
            name: "signature matrix invariance",
            passed: false,
            detail: "worst J residual 1.0e0".into(),
            seconds: 0.25,
        };
        let line = r.to_string();
        assert!(line.starts_with("[FAIL]  3. signature matrix invariance"));
        assert!(line.contains("worst J residual"));
    }
}
