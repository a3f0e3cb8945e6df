//! The accelerant H(x) and its two-way correspondence with the coefficient
//! A(r), together with the dual accelerant, the transfer function C(x), and
//! the log-density route to H.
//!
//! H lives on a half-line grid with the Hermitian extension
//! H(-x) = conj(H(x)) implied. The forward direction H -> A solves, per
//! truncation radius r = jh, the discrete resolvent system
//!
//! ```text
//! (I + h T_j) gamma = [H(+0), H(h), ..., H(jh)]^t,
//! T_j Hermitian Toeplitz, (T_j)_{pq} = H((p-q)h) off the diagonal,
//! ```
//!
//! whose last component converges to conj(A(jh)). The reverse direction
//! integrates A against the squared reciprocal of P* and inverts a Fourier
//! transform.

use crate::core::{
    inverse_fourier_halfline, CoreError, Grid1D, SampledFunction, C64,
};
use crate::krein_ode::{polys_scan, OdeError};
use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

/// Truncation rule for the convolution-exponential of a log-density.
pub const SERIES_TERM_TOL: f64 = 1e-14;
/// Maximum number of convolution powers before giving up.
pub const SERIES_MAX_TERMS: usize = 50;

#[derive(Debug, Error)]
pub enum AccelerantError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(
        "discrete accelerant operator I + H loses positive definiteness at \
         r = {radius}; A blows up at or before this radius"
    )]
    PositivityLoss { radius: f64 },
    #[error(
        "spectral tail ~{tail:.3e} at |lambda| = {lambda_max} exceeds \
         {tol:.1e}; widen the lambda grid to ~{suggested}"
    )]
    TailTruncation {
        tail: f64,
        tol: f64,
        lambda_max: f64,
        suggested: f64,
    },
    #[error(
        "convolution series still has term sup-norm {last_sup:.3e} after \
         {terms} terms; the log-density is too large for this expansion"
    )]
    SeriesDivergence { terms: usize, last_sup: f64 },
    #[error("a Hermitian function needs a real value at x = 0, got {value}")]
    NotHermitian { value: C64 },
    #[error("half-line data must start at x = 0, got {start}")]
    BadStart { start: f64 },
}

/// Accelerant samples H(x) for x >= 0; H(-x) = conj(H(x)) is implied.
///
/// Positivity of the discretized I + H_r operators is not checked here (it
/// costs a full factorization); [`h_to_a`] performs the level-by-level minor
/// sign test and reports the blow-up radius on failure.
#[derive(Debug, Clone)]
pub struct AccelerantH {
    pub h_plus: SampledFunction,
}

impl AccelerantH {
    pub fn new(h_plus: SampledFunction) -> Result<Self, AccelerantError> {
        require_halfline(h_plus.grid())?;
        Ok(AccelerantH { h_plus })
    }

    pub fn grid(&self) -> &Grid1D {
        self.h_plus.grid()
    }

    /// H(+0), the right-sided boundary value.
    pub fn at_zero(&self) -> C64 {
        self.h_plus.value(0)
    }
}

/// Boundary values gamma_j ~= Gamma_{r_j}(r_j, 0) = conj(A(r_j)) of the
/// resolvent column, one per truncation level r_j = j h.
#[derive(Debug, Clone)]
pub struct ResolventDiag {
    pub gamma0: SampledFunction,
}

fn require_halfline(grid: &Grid1D) -> Result<(), AccelerantError> {
    if grid.start() != 0.0 {
        return Err(AccelerantError::BadStart {
            start: grid.start(),
        });
    }
    Ok(())
}

/// Resample half-line data onto a grid of the requested step (no-op when the
/// steps already agree).
fn resample(f: &SampledFunction, step: f64) -> Result<SampledFunction, AccelerantError> {
    if (f.grid().step() - step).abs() <= 1e-12 * step {
        return Ok(f.clone());
    }
    let grid = Grid1D::from_range(0.0, f.grid().end(), step)?;
    Ok(SampledFunction::from_fn(grid, |x| f.eval_linear(x))?)
}

/// Resolvent boundary values by a Levinson sweep over all truncation levels.
///
/// The Hermitian Toeplitz structure is shared between levels, so one O(n^2)
/// pass yields gamma_j for every j. The level-j reflection denominator
/// 1 - |eps|^2 is det T_j / det T_{j-1} up to positive factors; the sweep
/// aborts with the blow-up radius when it turns nonpositive (the discrete
/// minor sign test). A nearly singular level falls back to a dense
/// factorization before continuing.
pub fn resolvent_boundary(
    h: &AccelerantH,
    step: f64,
) -> Result<ResolventDiag, AccelerantError> {
    let hs = resample(&h.h_plus, step)?;
    let n = hs.len();
    let hv = hs.values();
    let s = hs.grid().step();
    // t[k] = matrix entry on sub-diagonal k; unit main diagonal
    let t: Vec<C64> = (0..n)
        .map(|k| {
            if k == 0 {
                C64::new(1.0, 0.0)
            } else {
                s * hv[k]
            }
        })
        .collect();
    let b = hv;
    let mut gamma = Vec::with_capacity(n);
    // f solves T_lvl f = e_0; x solves T_lvl x = b[0..=lvl]
    let mut f = vec![C64::new(1.0, 0.0)];
    let mut x = vec![b[0]];
    gamma.push(b[0]);
    for lvl in 1..n {
        let eps: C64 = (0..lvl).map(|i| t[lvl - i] * f[i]).sum();
        let den = 1.0 - eps.norm_sqr();
        if den <= 0.0 {
            return Err(AccelerantError::PositivityLoss {
                radius: lvl as f64 * s,
            });
        }
        if den < 1e-10 {
            // conditioning is gone; refresh both vectors from a dense
            // factorization of this level and keep sweeping
            let (fd, xd) = dense_level(&t, b, lvl, s)?;
            f = fd;
            x = xd;
        } else {
            let mut fnew = Vec::with_capacity(lvl + 1);
            fnew.push(f[0] / den);
            for i in 1..lvl {
                fnew.push((f[i] - eps * f[lvl - i].conj()) / den);
            }
            fnew.push(-eps * f[0].conj() / den);
            let eta: C64 = (0..lvl).map(|i| t[lvl - i] * x[i]).sum::<C64>() - b[lvl];
            x.push(C64::new(0.0, 0.0));
            for i in 0..=lvl {
                x[i] -= eta * fnew[lvl - i].conj();
            }
            f = fnew;
        }
        gamma.push(x[lvl]);
    }
    Ok(ResolventDiag {
        gamma0: SampledFunction::new(hs.grid().clone(), gamma)?,
    })
}

/// Dense Cholesky refresh of the level-`lvl` forward and solution vectors.
fn dense_level(
    t: &[C64],
    b: &[C64],
    lvl: usize,
    s: f64,
) -> Result<(Vec<C64>, Vec<C64>), AccelerantError> {
    let m = lvl + 1;
    let mat = DMatrix::from_fn(m, m, |p, q| {
        if p >= q {
            t[p - q]
        } else {
            t[q - p].conj()
        }
    });
    let chol = Cholesky::new(mat).ok_or(AccelerantError::PositivityLoss {
        radius: lvl as f64 * s,
    })?;
    let mut e0 = DVector::from_element(m, C64::new(0.0, 0.0));
    e0[0] = C64::new(1.0, 0.0);
    let f = chol.solve(&e0);
    let x = chol.solve(&DVector::from_row_slice(&b[..m]));
    Ok((f.as_slice().to_vec(), x.as_slice().to_vec()))
}

/// Coefficient A on the grid of H (resampled to `step`) by the Levinson sweep.
pub fn h_to_a(h: &AccelerantH, step: f64) -> Result<SampledFunction, AccelerantError> {
    let diag = resolvent_boundary(h, step)?;
    Ok(diag.gamma0.map(|g| g.conj()))
}

/// Reference path for [`h_to_a`]: every truncation level is factorized
/// densely (Cholesky, so the positivity test is the factorization itself) and
/// the levels run concurrently. Agrees with the Levinson sweep to 1e-10 on
/// well-conditioned data.
pub fn h_to_a_dense(h: &AccelerantH, step: f64) -> Result<SampledFunction, AccelerantError> {
    let hs = resample(&h.h_plus, step)?;
    let n = hs.len();
    let hv = hs.values();
    let s = hs.grid().step();
    let t: Vec<C64> = (0..n)
        .map(|k| {
            if k == 0 {
                C64::new(1.0, 0.0)
            } else {
                s * hv[k]
            }
        })
        .collect();
    let gamma: Vec<Result<C64, AccelerantError>> = (0..n)
        .into_par_iter()
        .map(|lvl| {
            let (_, x) = dense_level(&t, hv, lvl, s)?;
            Ok(x[lvl])
        })
        .collect();
    let vals: Vec<C64> = gamma
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?
        .iter()
        .map(|g| g.conj())
        .collect();
    Ok(SampledFunction::new(hs.grid().clone(), vals)?)
}

/// Lambda-grid and tail policy for the coefficient-to-accelerant transform.
#[derive(Debug, Clone)]
pub struct AtoHConfig {
    /// Half-width of the symmetric lambda grid.
    pub lambda_max: f64,
    pub lambda_step: f64,
    /// Largest admissible |g - g_A| at the grid ends.
    pub tail_tol: f64,
}

impl Default for AtoHConfig {
    fn default() -> Self {
        AtoHConfig {
            lambda_max: 200.0,
            lambda_step: 0.025,
            tail_tol: 5e-3,
        }
    }
}

/// Accelerant of a compactly supported coefficient, via
///
/// ```text
/// g(lambda) = Int_0^R A(s) e^{i lambda s} P*^{-2}(s, lambda) ds
///           = Fourier transform of conj(H) restricted to x >= 0.
/// ```
///
/// The transform of A alone is subtracted before inverting: both share the
/// jump at x = 0, so the difference decays fast enough in lambda to be
/// inverted on a truncated grid, and it is accumulated at the identical
/// quadrature nodes so that the phase-resolution error of the two integrals
/// cancels. H(+0) = conj(A(0)) is exact by construction.
pub fn a_to_h(a: &SampledFunction) -> Result<AccelerantH, AccelerantError> {
    a_to_h_with(a, &AtoHConfig::default())
}

pub fn a_to_h_with(
    a: &SampledFunction,
    cfg: &AtoHConfig,
) -> Result<AccelerantH, AccelerantError> {
    require_halfline(a.grid())?;
    let r_end = a.grid().end();
    let n_half = (cfg.lambda_max / cfg.lambda_step).round().max(1.0) as usize;
    let lam_grid = Grid1D::new(
        -(n_half as f64) * cfg.lambda_step,
        cfg.lambda_step,
        2 * n_half + 1,
    )?;
    let real_input = a.values().iter().all(|v| v.im == 0.0);
    let mut diff = vec![C64::new(0.0, 0.0); lam_grid.count()];
    for j in 0..lam_grid.count() {
        let lam = lam_grid.point(j);
        if real_input && lam < 0.0 {
            continue;
        }
        diff[j] = g_minus_ga(a, r_end, lam);
    }
    if real_input {
        for j in 0..n_half {
            diff[j] = diff[2 * n_half - j].conj();
        }
    }
    let g_diff = SampledFunction::new(lam_grid, diff)?;
    let (c, report) = inverse_fourier_halfline(&g_diff, a.grid(), cfg.tail_tol);
    if report.truncated {
        return Err(AccelerantError::TailTruncation {
            tail: report.left.max(report.right),
            tol: cfg.tail_tol,
            lambda_max: cfg.lambda_max,
            suggested: 2.0 * cfg.lambda_max,
        });
    }
    // conj(H) = A + c on [0, R]; the x = 0 value is known exactly
    let mut vals: Vec<C64> = a
        .values()
        .iter()
        .zip(c.values())
        .map(|(&av, &cv)| (av + cv).conj())
        .collect();
    vals[0] = a.value(0).conj();
    AccelerantH::new(SampledFunction::new(a.grid().clone(), vals)?)
}

/// One sweep accumulating g(lambda) - g_A(lambda) at shared nodes.
fn g_minus_ga(a: &SampledFunction, r_end: f64, lam_re: f64) -> C64 {
    let lam = C64::new(lam_re, 0.0);
    let target = {
        let labs = lam_re.abs();
        if labs > 0.0 {
            a.grid().step().min(0.5 / labs)
        } else {
            a.grid().step()
        }
    };
    let mut acc = C64::new(0.0, 0.0);
    polys_scan(a, r_end, lam, target, &mut |t, w, _p, p_star| {
        let av = a.eval_linear(t);
        if av.norm_sqr() == 0.0 {
            return;
        }
        let e = C64::new(0.0, lam_re * t).exp();
        let inv = 1.0 / (p_star * p_star);
        acc += (w * av * e) * (inv - 1.0);
    });
    acc
}

/// Solve f + k * (H conv f) = -H forward on the grid of H (trapezoid
/// convolution weights). The discrete convolution is symmetric in its two
/// factors, which makes the k = 2 dual an exact involution and the k = 1
/// transfer relation exactly self-inverse.
fn volterra_conv_solve(hv: &SampledFunction, k: f64) -> SampledFunction {
    let grid = hv.grid().clone();
    let n = hv.len();
    let h = grid.step();
    let v = hv.values();
    let mut out: Vec<C64> = Vec::with_capacity(n);
    for j in 0..n {
        if j == 0 {
            out.push(-v[0]);
            continue;
        }
        let mut acc = C64::new(0.0, 0.0);
        for (i, oi) in out.iter().enumerate() {
            let w = if i == 0 { 0.5 * h } else { h };
            acc += w * v[j - i] * oi;
        }
        let denom = C64::new(1.0, 0.0) + k * 0.5 * h * v[0];
        out.push((-v[j] - k * acc) / denom);
    }
    SampledFunction::new(grid, out).expect("convolution of finite data is finite")
}

/// Dual accelerant: the solution of H + H^ + 2 Int_0^x H(x-s) H^(s) ds = 0.
/// Applying it twice returns H (exactly, at the discrete level).
pub fn dual_accelerant(h: &AccelerantH) -> AccelerantH {
    AccelerantH {
        h_plus: volterra_conv_solve(&h.h_plus, 2.0),
    }
}

/// Transfer function C: the solution of H + C + Int_0^x C(x-u) H(u) du = 0.
/// C(0) = -H(+0) = -conj(A(0)).
pub fn c_transfer(h: &AccelerantH) -> SampledFunction {
    volterra_conv_solve(&h.h_plus, 1.0)
}

/// Inverse of [`c_transfer`]; the relation between H and C is symmetric, so
/// this is the same Volterra solve.
pub fn c_transfer_inverse(c: &SampledFunction) -> Result<AccelerantH, AccelerantError> {
    require_halfline(c.grid())?;
    AccelerantH::new(volterra_conv_solve(c, 1.0))
}

/// Accelerant of the measure with log a.c. density transform l and singular
/// point masses: conj(H) = sum_k l^{*k} / k! (full-line convolutions under
/// the Hermitian extension of l), plus sum_j w_j e^{i lambda_j x} added to H
/// for each mass w_j at lambda_j. The series is truncated when a term's
/// sup-norm falls below [`SERIES_TERM_TOL`].
pub fn accelerant_from_logdensity(
    l: &SampledFunction,
    masses: &[(f64, f64)],
) -> Result<AccelerantH, AccelerantError> {
    require_halfline(l.grid())?;
    if l.value(0).im != 0.0 {
        return Err(AccelerantError::NotHermitian { value: l.value(0) });
    }
    let n = l.len();
    let h = l.grid().step();
    // full-line extension on indices -(n-1)..=(n-1), trimmed to the nonzero
    // span so convolution cost tracks the actual support
    let mut l_ext: Vec<C64> = (0..2 * n - 1)
        .map(|i| {
            let j = i as i64 - (n as i64 - 1);
            if j >= 0 {
                l.value(j as usize)
            } else {
                l.value((-j) as usize).conj()
            }
        })
        .collect();
    let mut l_off = -(n as i64 - 1);
    while l_ext.len() > 1 && l_ext[0].norm_sqr() == 0.0 {
        l_ext.remove(0);
        l_off += 1;
    }
    while l_ext.len() > 1 && l_ext.last().unwrap().norm_sqr() == 0.0 {
        l_ext.pop();
    }
    let mut sum_win = vec![C64::new(0.0, 0.0); n];
    let mut term = l_ext.clone();
    let mut term_off = l_off;
    let mut k = 1usize;
    loop {
        for (i, sw) in sum_win.iter_mut().enumerate() {
            let idx = i as i64 - term_off;
            if idx >= 0 && (idx as usize) < term.len() {
                *sw += term[idx as usize];
            }
        }
        let sup = term.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if sup < SERIES_TERM_TOL {
            break;
        }
        if k >= SERIES_MAX_TERMS {
            return Err(AccelerantError::SeriesDivergence {
                terms: k,
                last_sup: sup,
            });
        }
        k += 1;
        // next term: (term * l_ext) * h / k
        let mut next = vec![C64::new(0.0, 0.0); term.len() + l_ext.len() - 1];
        for (i, &tv) in term.iter().enumerate() {
            if tv.norm_sqr() == 0.0 {
                continue;
            }
            for (j, &lv) in l_ext.iter().enumerate() {
                next[i + j] += tv * lv;
            }
        }
        let scale = h / k as f64;
        for v in &mut next {
            *v *= scale;
        }
        term = next;
        term_off += l_off;
    }
    let mut vals: Vec<C64> = sum_win.iter().map(|s| s.conj()).collect();
    for (i, v) in vals.iter_mut().enumerate() {
        let x = l.grid().point(i);
        for &(loc, w) in masses {
            *v += w * C64::new(0.0, loc * x).exp();
        }
    }
    AccelerantH::new(SampledFunction::new(l.grid().clone(), vals)?)
}
