//! Grids, sampled functions, spectral measures, quadrature, oscillatory
//! Fourier integrals, and file I/O shared by every other module.
//!
//! Quadrature is composite trapezoid throughout. The kernels of this theory
//! are at most C^1 across the diagonal, so higher-order rules buy nothing
//! guaranteed; trapezoid is exact for affine data and second order otherwise.
//! Grids are closed intervals with both endpoints included.
//!
//! Accelerants are stored on the half-line x >= 0 only. The negative side is
//! implied by the Hermitian convention H(-x) = conj(H(x)), and
//! [`hermitian_symbol`] is the one place that convention is spelled out.

use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

pub type C64 = Complex64;

/// Relative tolerance for detecting a non-uniform x column when reading CSV.
pub const SPACING_RTOL: f64 = 1e-12;

/// Natural-log exponent magnitude beyond which e^{i lambda x} is not
/// representable in f64 and the oscillatory integral reports a range error.
pub const EXP_RANGE_LIMIT: f64 = 700.0;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("grid step must be positive and finite, got {step}")]
    BadStep { step: f64 },
    #[error("grid needs at least one point")]
    EmptyGrid,
    #[error("grid span from {start} to {end} is not a whole number of steps {step}")]
    MisalignedSpan { start: f64, end: f64, step: f64 },
    #[error("value list has length {got}, grid has {want} points")]
    LengthMismatch { got: usize, want: usize },
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("e^{{i lambda x}} exponent {exponent:.1} exceeds the f64 range on this grid")]
    ExponentRange { exponent: f64 },
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("{path}: row {row}: x deviates from uniform spacing by {deviation:.3e} relative")]
    NonUniformSpacing {
        path: String,
        row: usize,
        deviation: f64,
    },
    #[error("spectral density at index {index}: {reason}")]
    BadDensity { index: usize, reason: String },
    #[error("point mass {index}: weights must be positive and locations strictly increasing")]
    BadPointMass { index: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Uniform one-dimensional grid, both endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    start: f64,
    step: f64,
    count: usize,
}

impl Grid1D {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self, CoreError> {
        if !(step > 0.0) || !step.is_finite() || !start.is_finite() {
            return Err(CoreError::BadStep { step });
        }
        if count == 0 {
            return Err(CoreError::EmptyGrid);
        }
        Ok(Grid1D { start, step, count })
    }

    /// Grid covering [start, end] with the given step. The span must be a
    /// whole number of steps to one part in 1e6.
    pub fn from_range(start: f64, end: f64, step: f64) -> Result<Self, CoreError> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(CoreError::BadStep { step });
        }
        let span = end - start;
        let n = (span / step).round();
        if n < 0.0 || (span / step - n).abs() > 1e-6 * n.max(1.0) {
            return Err(CoreError::MisalignedSpan { start, end, step });
        }
        Grid1D::new(start, step, n as usize + 1)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }

    /// Trapezoid weights: h/2 at both ends, h inside; a single-point grid
    /// carries zero weight.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![0.0];
        }
        let mut w = vec![self.step; self.count];
        w[0] = 0.5 * self.step;
        w[self.count - 1] = 0.5 * self.step;
        w
    }
}

/// Complex-valued function sampled on a uniform grid. Carrier of the
/// coefficient A(r), accelerant H(x), transfer kernel C(x), log-density l(x),
/// Fourier tail gamma(x), and scattering datum D(x).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid1D,
    values: Vec<C64>,
}

impl SampledFunction {
    pub fn new(grid: Grid1D, values: Vec<C64>) -> Result<Self, CoreError> {
        if values.len() != grid.count() {
            return Err(CoreError::LengthMismatch {
                got: values.len(),
                want: grid.count(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(CoreError::NonFinite { index: i });
            }
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> C64) -> Result<Self, CoreError> {
        let values = grid.points().map(f).collect();
        SampledFunction::new(grid, values)
    }

    pub fn constant(grid: Grid1D, c: C64) -> Result<Self, CoreError> {
        let values = vec![c; grid.count()];
        SampledFunction::new(grid, values)
    }

    pub fn zero(grid: Grid1D) -> Self {
        let values = vec![C64::new(0.0, 0.0); grid.count()];
        SampledFunction { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> C64 {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Linear interpolation inside the grid; zero beyond the right endpoint
    /// (every carrier here is treated as compactly supported on its grid).
    /// Arguments left of the grid by more than a step-rounding slack panic:
    /// that is always a caller bug, not data.
    pub fn eval_linear(&self, x: f64) -> C64 {
        let t = (x - self.grid.start) / self.grid.step;
        let slack = 1e-9;
        assert!(t > -slack, "argument {x} lies before the grid start");
        if t >= (self.grid.count - 1) as f64 {
            // up to rounding slack, the right endpoint itself still reads off
            // the last sample
            if t <= (self.grid.count - 1) as f64 + slack {
                return self.values[self.grid.count - 1];
            }
            return C64::new(0.0, 0.0);
        }
        let t = t.max(0.0);
        let i = t.floor() as usize;
        let frac = t - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Pointwise map keeping the grid.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> SampledFunction {
        SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Trapezoid L1 norm over the grid.
    pub fn norm_l1(&self) -> f64 {
        let w = self.grid.trapezoid_weights();
        self.values
            .iter()
            .zip(&w)
            .map(|(v, &wi)| wi * v.norm())
            .sum()
    }

    /// Trapezoid L2 norm squared over the grid.
    pub fn norm_l2_sq(&self) -> f64 {
        let w = self.grid.trapezoid_weights();
        self.values
            .iter()
            .zip(&w)
            .map(|(v, &wi)| wi * v.norm_sqr())
            .sum()
    }
}

/// Trapezoid integral of a sampled function over its grid.
pub fn trapezoid(f: &SampledFunction) -> C64 {
    let w = f.grid().trapezoid_weights();
    f.values()
        .iter()
        .zip(&w)
        .map(|(v, &wi)| v * wi)
        .sum()
}

/// Trapezoid integral of real samples over a grid.
pub fn trapezoid_real(grid: &Grid1D, values: &[f64]) -> f64 {
    let w = grid.trapezoid_weights();
    values.iter().zip(&w).map(|(v, wi)| v * wi).sum()
}

/// Oscillatory moment Int f(x) e^{i lambda x} dx over the grid of `f` by
/// trapezoid rule.
pub fn fourier_integral(f: &SampledFunction, lambda: C64) -> Result<C64, CoreError> {
    // magnitude of e^{i lambda x} is e^{-Im lambda * x}; check both ends
    let worst = (-lambda.im * f.grid().start())
        .max(-lambda.im * f.grid().end());
    if worst > EXP_RANGE_LIMIT {
        return Err(CoreError::ExponentRange { exponent: worst });
    }
    let w = f.grid().trapezoid_weights();
    let mut acc = C64::new(0.0, 0.0);
    for (i, (&v, &wi)) in f.values().iter().zip(&w).enumerate() {
        let x = f.grid().point(i);
        acc += v * wi * (C64::i() * lambda * x).exp();
    }
    Ok(acc)
}

/// Tail diagnostics attached to a half-line Fourier inversion.
#[derive(Debug, Clone)]
pub struct TailReport {
    /// |g| at the left end of the lambda-grid.
    pub left: f64,
    /// |g| at the right end.
    pub right: f64,
    /// Declared decay tolerance the tails were checked against.
    pub tol: f64,
    /// True when either tail exceeds the tolerance: the result then carries
    /// an unquantified truncation error.
    pub truncated: bool,
}

/// Numerical inversion h(x) = (2 pi)^{-1} Int g(lambda) e^{-i lambda x}
/// d lambda over the (truncated) grid of `g`, evaluated on `x_grid`.
///
/// A non-decaying integrand is not an error: the inversion is still returned,
/// flagged in the [`TailReport`].
pub fn inverse_fourier_halfline(
    g: &SampledFunction,
    x_grid: &Grid1D,
    tail_tol: f64,
) -> (SampledFunction, TailReport) {
    let left = g.value(0).norm();
    let right = g.value(g.len() - 1).norm();
    let report = TailReport {
        left,
        right,
        tol: tail_tol,
        truncated: left > tail_tol || right > tail_tol,
    };
    let w = g.grid().trapezoid_weights();
    let inv_2pi = 1.0 / (2.0 * std::f64::consts::PI);
    let values: Vec<C64> = x_grid
        .points()
        .map(|x| {
            let mut acc = C64::new(0.0, 0.0);
            for (i, (&gv, &wi)) in g.values().iter().zip(&w).enumerate() {
                let lam = g.grid().point(i);
                acc += gv * wi * C64::new(0.0, -lam * x).exp();
            }
            acc * inv_2pi
        })
        .collect();
    let h = SampledFunction::new(x_grid.clone(), values)
        .expect("inversion of finite data is finite");
    (h, report)
}

/// Symbol 1 + rho(lambda) of the Wiener-Hopf factorization, where rho is the
/// full-line Fourier transform of conj(H) under the Hermitian extension
/// H(-x) = conj(H(x)). Real on the real axis; this is the designated test
/// point for the extension convention.
pub fn hermitian_symbol(h_plus: &SampledFunction, lambda: f64) -> C64 {
    let w = h_plus.grid().trapezoid_weights();
    let mut acc = C64::new(0.0, 0.0);
    for (i, (&hv, &wi)) in h_plus.values().iter().zip(&w).enumerate() {
        let x = h_plus.grid().point(i);
        let s = hv.conj();
        // x > 0 contributes s(x) e^{i lambda x}; the mirrored point
        // contributes conj(s(x)) e^{-i lambda x}. The two half-line trapezoid
        // end-weights at x = 0 add up to the full interior weight.
        acc += s * wi * C64::new(0.0, lambda * x).exp();
        acc += s.conj() * wi * C64::new(0.0, -lambda * x).exp();
    }
    C64::new(1.0, 0.0) + acc
}

/// Nonnegative a.c. density on a lambda-grid plus finitely many point masses.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    density: SampledFunction,
    point_masses: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    pub fn new(
        density: SampledFunction,
        point_masses: Vec<(f64, f64)>,
    ) -> Result<Self, CoreError> {
        for (i, v) in density.values().iter().enumerate() {
            if v.im != 0.0 {
                return Err(CoreError::BadDensity {
                    index: i,
                    reason: format!("imaginary part {} must be exactly zero", v.im),
                });
            }
            if v.re < 0.0 {
                return Err(CoreError::BadDensity {
                    index: i,
                    reason: format!("negative value {}", v.re),
                });
            }
        }
        for (i, &(loc, w)) in point_masses.iter().enumerate() {
            let increasing = i == 0 || point_masses[i - 1].0 < loc;
            if !(w > 0.0) || !loc.is_finite() || !increasing {
                return Err(CoreError::BadPointMass { index: i });
            }
        }
        Ok(SpectralMeasure {
            density,
            point_masses,
        })
    }

    pub fn ac_only(density: SampledFunction) -> Result<Self, CoreError> {
        SpectralMeasure::new(density, Vec::new())
    }

    pub fn density(&self) -> &SampledFunction {
        &self.density
    }

    pub fn density_at(&self, i: usize) -> f64 {
        self.density.value(i).re
    }

    pub fn point_masses(&self) -> &[(f64, f64)] {
        &self.point_masses
    }

    /// Measure of [a, b] ignoring any mass outside the density grid.
    pub fn mass_on(&self, a: f64, b: f64) -> f64 {
        let grid = self.density.grid();
        let w = grid.trapezoid_weights();
        let mut acc = 0.0;
        // trapezoid restricted to samples inside [a, b]; endpoint cells are
        // clipped by dropping them, which keeps the estimate second order
        // when a, b are grid points
        for i in 0..grid.count() {
            let x = grid.point(i);
            if x >= a && x <= b {
                acc += w[i] * self.density.value(i).re;
            }
        }
        for &(loc, wt) in &self.point_masses {
            if loc >= a && loc <= b {
                acc += wt;
            }
        }
        acc
    }
}

fn format_float(x: f64) -> String {
    // {:.16e} carries 17 significant digits: enough for bit-exact f64 round trip
    format!("{x:.16e}")
}

/// Write a sampled function as CSV `x,re,im` with full round-trip precision.
pub fn write_sampled(path: &Path, f: &SampledFunction) -> Result<(), CoreError> {
    let mut out = String::new();
    out.push_str("x,re,im\n");
    for (i, v) in f.values().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_float(f.grid().point(i)),
            format_float(v.re),
            format_float(v.im)
        );
    }
    std::fs::write(path, out).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Read a sampled function from CSV `x,re,im`. The x column must be uniform
/// to [`SPACING_RTOL`] relative to the grid span.
pub fn read_sampled(path: &Path) -> Result<SampledFunction, CoreError> {
    let text = std::fs::read_to_string(path).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let pathstr = path.display().to_string();
    let parse = |line: usize, reason: &str| CoreError::Parse {
        path: pathstr.clone(),
        line,
        reason: reason.to_string(),
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse(1, "empty file"))?;
    if header.trim() != "x,re,im" {
        return Err(parse(1, "expected header `x,re,im`"));
    }
    let mut xs: Vec<f64> = Vec::new();
    let mut values: Vec<C64> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(parse(lineno, "expected three comma-separated fields"));
        }
        let mut nums = [0.0f64; 3];
        for (k, field) in fields.iter().enumerate() {
            nums[k] = field
                .trim()
                .parse::<f64>()
                .map_err(|e| parse(lineno, &format!("bad number `{}`: {e}", field.trim())))?;
        }
        xs.push(nums[0]);
        values.push(C64::new(nums[1], nums[2]));
    }
    if xs.is_empty() {
        return Err(parse(1, "no data rows"));
    }
    let grid = if xs.len() == 1 {
        Grid1D::new(xs[0], 1.0, 1)?
    } else {
        let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        if !(step > 0.0) {
            return Err(parse(2, "x column must be strictly increasing"));
        }
        let scale = (xs[xs.len() - 1] - xs[0]).abs().max(xs[0].abs()).max(1e-300);
        for (i, &x) in xs.iter().enumerate() {
            let expect = xs[0] + i as f64 * step;
            let dev = (x - expect).abs() / scale;
            if dev > SPACING_RTOL {
                return Err(CoreError::NonUniformSpacing {
                    path: pathstr.clone(),
                    row: i + 1,
                    deviation: dev,
                });
            }
        }
        Grid1D::new(xs[0], step, xs.len())?
    };
    SampledFunction::new(grid, values)
}

/// Write a spectral measure as a density CSV plus a `lambda,weight` text file
/// of point masses.
pub fn write_measure(
    density_path: &Path,
    masses_path: &Path,
    m: &SpectralMeasure,
) -> Result<(), CoreError> {
    write_sampled(density_path, m.density())?;
    let mut out = String::new();
    out.push_str("lambda,weight\n");
    for &(loc, w) in m.point_masses() {
        let _ = writeln!(out, "{},{}", format_float(loc), format_float(w));
    }
    std::fs::write(masses_path, out).map_err(|source| CoreError::Io {
        path: masses_path.display().to_string(),
        source,
    })
}

/// Read a spectral measure written by [`write_measure`].
pub fn read_measure(
    density_path: &Path,
    masses_path: &Path,
) -> Result<SpectralMeasure, CoreError> {
    let density = read_sampled(density_path)?;
    let text = std::fs::read_to_string(masses_path).map_err(|source| CoreError::Io {
        path: masses_path.display().to_string(),
        source,
    })?;
    let pathstr = masses_path.display().to_string();
    let mut masses = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line.trim() != "lambda,weight" {
                return Err(CoreError::Parse {
                    path: pathstr,
                    line: 1,
                    reason: "expected header `lambda,weight`".to_string(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = |reason: String| CoreError::Parse {
            path: pathstr.clone(),
            line: idx + 1,
            reason,
        };
        if fields.len() != 2 {
            return Err(bad("expected two comma-separated fields".to_string()));
        }
        let loc = fields[0]
            .trim()
            .parse::<f64>()
            .map_err(|e| bad(format!("bad number: {e}")))?;
        let w = fields[1]
            .trim()
            .parse::<f64>()
            .map_err(|e| bad(format!("bad number: {e}")))?;
        masses.push((loc, w));
    }
    SpectralMeasure::new(density, masses)
}
