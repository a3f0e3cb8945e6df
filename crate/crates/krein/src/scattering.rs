//! Dirac-operator dictionary and scattering theory: potential and
//! eigenfunction translation at doubled radius, stationary scattering data
//! read off the transfer matrix past the support, Schrodinger reductions
//! with their spectral dictionaries, a Gelfand-Levitan consistency check,
//! and inverse scattering by inverting a contractive Hankel system.
//!
//! The half-line Dirac operator with potential a(r) = 2 Re A(2r),
//! b(r) = 2 Im A(2r) shares its spectral data with the Krein system at
//! doubled radius, so radii halve and measures double throughout; the
//! reflection coefficient is the Schur function and the Jost function is
//! the frozen dual P*(R, .).

use crate::core::{
    fourier_integral, inverse_fourier_halfline, CoreError, Grid1D, SampledFunction,
    SpectralMeasure, TailReport, C64,
};
use crate::krein_ode::{mat2_identity, mat2_mul, propagate, propagate_from, OdeConfig, OdeError};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Imaginary dust tolerated (relative to 1 + max |value|) when an operation
/// requires real-valued data. Real inputs that passed through Fourier
/// round trips carry this much.
pub const REAL_SLACK: f64 = 1e-9;
/// Relative residual ceiling for an accepted dense linear solve; beyond it
/// the discretized operator is treated as singular.
pub const SOLVE_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum ScatteringError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("{what} must be real-valued; largest imaginary part is {max_im:.3e}")]
    ComplexValued { what: &'static str, max_im: f64 },
    #[error("{what} grid must start at 0, got {start}")]
    BadStart { what: &'static str, start: f64 },
    #[error("{what} needs at least {need} samples, got {got}")]
    TooFewSamples {
        what: &'static str,
        need: usize,
        got: usize,
    },
    #[error("energy grid must be nonnegative, starts at {start}")]
    NegativeEnergy { start: f64 },
    #[error("discretized operator {what} is singular at {at}")]
    SingularSystem { what: &'static str, at: f64 },
    #[error(
        "Hankel operator of the datum has norm {norm:.6} >= 1; \
         not a scattering datum of any coefficient"
    )]
    NotAScatteringDatum { norm: f64 },
}

/// Real parts of `f`, requiring the imaginary part to be numerical dust.
fn require_real(f: &SampledFunction, what: &'static str) -> Result<Vec<f64>, ScatteringError> {
    let max_im = f.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if max_im > REAL_SLACK * (1.0 + f.max_abs()) {
        return Err(ScatteringError::ComplexValued { what, max_im });
    }
    Ok(f.values().iter().map(|v| v.re).collect())
}

fn require_halfline(f: &SampledFunction, what: &'static str) -> Result<(), ScatteringError> {
    if f.grid().start() != 0.0 {
        return Err(ScatteringError::BadStart {
            what,
            start: f.grid().start(),
        });
    }
    Ok(())
}

/// d/dr of real samples: central differences inside, second-order one-sided
/// stencils at the ends. Caller guarantees at least three samples.
fn derivative(step: f64, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut d = Vec::with_capacity(n);
    d.push((-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * step));
    for i in 1..n - 1 {
        d.push((v[i + 1] - v[i - 1]) / (2.0 * step));
    }
    d.push((3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * step));
    d
}

/// Dirac potential entries on the halved radius grid:
///
/// ```text
/// a(r) = 2 Re A(2r),   b(r) = 2 Im A(2r).
/// ```
///
/// Samples sit at r_i = x_i / 2 for the coefficient grid points x_i, so the
/// map is exact in both directions with no interpolation.
#[derive(Debug, Clone)]
pub struct DiracPotential {
    a: SampledFunction,
    b: SampledFunction,
    resampled: bool,
}

impl DiracPotential {
    /// Both entries must be real and start at r = 0. When the grids differ,
    /// `b` is resampled onto the grid of `a` by linear interpolation and the
    /// pair is flagged; callers should surface [`Self::resampled`] as a
    /// warning.
    pub fn new(a: SampledFunction, b: SampledFunction) -> Result<Self, ScatteringError> {
        require_real(&a, "Dirac potential entry a")?;
        require_real(&b, "Dirac potential entry b")?;
        require_halfline(&a, "Dirac potential")?;
        require_halfline(&b, "Dirac potential")?;
        let same = a.grid().step() == b.grid().step() && a.grid().count() == b.grid().count();
        if same {
            return Ok(DiracPotential {
                a,
                b,
                resampled: false,
            });
        }
        let b = SampledFunction::from_fn(a.grid().clone(), |r| b.eval_linear(r))?;
        Ok(DiracPotential {
            a,
            b,
            resampled: true,
        })
    }

    pub fn a(&self) -> &SampledFunction {
        &self.a
    }

    pub fn b(&self) -> &SampledFunction {
        &self.b
    }

    /// True when construction had to resample `b` onto the grid of `a`.
    pub fn resampled(&self) -> bool {
        self.resampled
    }
}

/// Dirac potential of a coefficient; exact sample-for-sample relabeling.
pub fn dirac_potential(coeff: &SampledFunction) -> Result<DiracPotential, ScatteringError> {
    require_halfline(coeff, "coefficient")?;
    let g = coeff.grid();
    let half = Grid1D::new(0.0, g.step() / 2.0, g.count())?;
    let a = SampledFunction::new(
        half.clone(),
        coeff.values().iter().map(|v| C64::new(2.0 * v.re, 0.0)).collect(),
    )?;
    let b = SampledFunction::new(
        half,
        coeff.values().iter().map(|v| C64::new(2.0 * v.im, 0.0)).collect(),
    )?;
    Ok(DiracPotential {
        a,
        b,
        resampled: false,
    })
}

/// Coefficient of a Dirac potential; exact inverse of [`dirac_potential`]
/// on shared grid points.
pub fn krein_coefficient(p: &DiracPotential) -> Result<SampledFunction, ScatteringError> {
    let g = p.a.grid();
    let full = Grid1D::new(0.0, 2.0 * g.step(), g.count())?;
    let values = p
        .a
        .values()
        .iter()
        .zip(p.b.values())
        .map(|(av, bv)| C64::new(av.re / 2.0, bv.re / 2.0))
        .collect();
    Ok(SampledFunction::new(full, values)?)
}

/// Generalized eigenfunctions of the Dirac operator at real `lambda` on the
/// halved grid: phi = Re E and psi = Im E with E(r) = e^{-i lambda r}
/// P(2r, lambda), so phi(0) = 1, psi(0) = 0. For a real coefficient these
/// solve the Dirac system with the Dirichlet condition on the second
/// component; for complex coefficients they are the same real sections of E
/// but no longer individually eigenfunctions.
pub fn dirac_eigenfunctions(
    coeff: &SampledFunction,
    lambda: f64,
) -> Result<(SampledFunction, SampledFunction), ScatteringError> {
    require_halfline(coeff, "coefficient")?;
    let g = coeff.grid();
    let lam = C64::new(lambda, 0.0);
    let cfg = OdeConfig::default();
    let mut x = mat2_identity();
    let mut phi = Vec::with_capacity(g.count());
    let mut psi = Vec::with_capacity(g.count());
    for i in 0..g.count() {
        if i > 0 {
            let seg = propagate_from(coeff, g.point(i - 1), g.point(i), lam, &cfg)?;
            x = mat2_mul(&seg.entries, &x);
        }
        let p = x[0][0] + x[0][1];
        let r = g.point(i) / 2.0;
        let e = C64::new(0.0, -lambda * r).exp() * p;
        phi.push(C64::new(e.re, 0.0));
        psi.push(C64::new(e.im, 0.0));
    }
    let half = Grid1D::new(0.0, g.step() / 2.0, g.count())?;
    Ok((
        SampledFunction::new(half.clone(), phi)?,
        SampledFunction::new(half, psi)?,
    ))
}

/// Stationary scattering data on a real lambda grid.
///
/// For the Dirac operator the entries are exact for every real lambda; the
/// Schrodinger variant keeps a list of masked cells around lambda = 0 where
/// its data has a genuine pole (masked samples are stored as zero and must
/// not be read as values).
#[derive(Debug, Clone)]
pub struct ScatteringData {
    a_scat: SampledFunction,
    b_scat: SampledFunction,
    reflection: SampledFunction,
    jost: SampledFunction,
    masked: Vec<usize>,
}

impl ScatteringData {
    /// Transmission-side amplitude; script-A of the Krein system in the
    /// Dirac case.
    pub fn a_scat(&self) -> &SampledFunction {
        &self.a_scat
    }

    /// Reflection-side amplitude; script-B in the Dirac case.
    pub fn b_scat(&self) -> &SampledFunction {
        &self.b_scat
    }

    /// Reflection coefficient b/a; the Schur function in the Dirac case.
    pub fn reflection(&self) -> &SampledFunction {
        &self.reflection
    }

    /// Jost function; equals a + b (never masked).
    pub fn jost(&self) -> &SampledFunction {
        &self.jost
    }

    /// Indices (ascending) of masked lambda cells.
    pub fn masked(&self) -> &[usize] {
        &self.masked
    }

    pub fn is_masked(&self, i: usize) -> bool {
        self.masked.binary_search(&i).is_ok()
    }

    /// Largest | |a|^2 - |b|^2 - 1 | over unmasked grid points.
    pub fn energy_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.a_scat.len() {
            if self.is_masked(i) {
                continue;
            }
            let gap =
                self.a_scat.value(i).norm_sqr() - self.b_scat.value(i).norm_sqr() - 1.0;
            worst = worst.max(gap.abs());
        }
        worst
    }
}

fn wall_on_grid(
    coeff: &SampledFunction,
    lambdas: &Grid1D,
) -> Result<Vec<crate::krein_ode::WallFunctions>, ScatteringError> {
    let r_end = coeff.grid().end();
    let cfg = OdeConfig::default();
    lambdas
        .points()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|l| {
            Ok(crate::krein_ode::propagate_with(coeff, r_end, C64::new(l, 0.0), &cfg)?.wall())
        })
        .collect()
}

/// Scattering data of the Dirac operator built from a compactly supported
/// coefficient: a and b are the Wall functions at the right end of the grid
/// (constant past the support), the reflection coefficient is their ratio,
/// and the Jost function is their sum, the frozen dual P*(R, .).
pub fn scattering_data_dirac(
    coeff: &SampledFunction,
    lambdas: &Grid1D,
) -> Result<ScatteringData, ScatteringError> {
    require_halfline(coeff, "coefficient")?;
    let walls = wall_on_grid(coeff, lambdas)?;
    let a: Vec<C64> = walls.iter().map(|w| w.a_w).collect();
    let b: Vec<C64> = walls.iter().map(|w| w.b_w).collect();
    let refl: Vec<C64> = walls.iter().map(|w| w.b_w / w.a_w).collect();
    let jost: Vec<C64> = walls.iter().map(|w| w.a_w + w.b_w).collect();
    Ok(ScatteringData {
        a_scat: SampledFunction::new(lambdas.clone(), a)?,
        b_scat: SampledFunction::new(lambdas.clone(), b)?,
        reflection: SampledFunction::new(lambdas.clone(), refl)?,
        jost: SampledFunction::new(lambdas.clone(), jost)?,
        masked: Vec::new(),
    })
}

/// Scattering data of the half-line Schrodinger operator with Dirichlet
/// boundary condition generated by a real compactly supported coefficient:
///
/// ```text
/// A_s = a + a(0)(a + b) / (2 i lambda),   B_s = b - a(0)(a + b) / (2 i lambda)
/// ```
///
/// with a(0) = 2 A(0). The Jost function stays a + b. When a(0) is nonzero
/// the amplitudes have a pole at lambda = 0, and grid cells containing 0 are
/// masked rather than interpolated.
pub fn scattering_data_schrodinger(
    coeff: &SampledFunction,
    lambdas: &Grid1D,
) -> Result<ScatteringData, ScatteringError> {
    let av = require_real(coeff, "coefficient")?;
    require_halfline(coeff, "coefficient")?;
    let a0 = 2.0 * av[0];
    let walls = wall_on_grid(coeff, lambdas)?;
    let n = lambdas.count();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut refl = Vec::with_capacity(n);
    let mut jost = Vec::with_capacity(n);
    let mut masked = Vec::new();
    let zero = C64::new(0.0, 0.0);
    for (i, w) in walls.iter().enumerate() {
        let l = lambdas.point(i);
        let sum = w.a_w + w.b_w;
        jost.push(sum);
        if a0 != 0.0 && l.abs() < 0.5 * lambdas.step() {
            masked.push(i);
            a.push(zero);
            b.push(zero);
            refl.push(zero);
            continue;
        }
        let correction = if a0 == 0.0 {
            zero
        } else {
            a0 * sum / (2.0 * C64::i() * l)
        };
        let a_s = w.a_w + correction;
        let b_s = w.b_w - correction;
        a.push(a_s);
        b.push(b_s);
        refl.push(b_s / a_s);
    }
    Ok(ScatteringData {
        a_scat: SampledFunction::new(lambdas.clone(), a)?,
        b_scat: SampledFunction::new(lambdas.clone(), b)?,
        reflection: SampledFunction::new(lambdas.clone(), refl)?,
        jost: SampledFunction::new(lambdas.clone(), jost)?,
        masked,
    })
}

/// Spectral density of the Dirac operator on the data grid,
/// 1 / (pi |jost|^2); equal to twice the density of the Krein system.
pub fn dirac_density(data: &ScatteringData) -> SampledFunction {
    data.jost
        .map(|j| C64::new(1.0 / (PI * j.norm_sqr()), 0.0))
}

/// Write scattering data as four CSVs plus a `manifest.csv` mapping roles to
/// file names and recording the masked cells.
pub fn write_scattering(dir: &Path, data: &ScatteringData) -> Result<(), CoreError> {
    let files: [(&str, &SampledFunction); 4] = [
        ("a_scat", &data.a_scat),
        ("b_scat", &data.b_scat),
        ("reflection", &data.reflection),
        ("jost", &data.jost),
    ];
    let mut manifest = String::from("key,value\n");
    for (role, f) in files {
        let name = format!("{role}.csv");
        crate::core::write_sampled(&dir.join(&name), f)?;
        let _ = writeln!(manifest, "{role},{name}");
    }
    let masked: Vec<String> = data.masked.iter().map(|i| i.to_string()).collect();
    let _ = writeln!(manifest, "masked,{}", masked.join(";"));
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Read scattering data written by [`write_scattering`].
pub fn read_scattering(dir: &Path) -> Result<ScatteringData, CoreError> {
    let path = dir.join("manifest.csv");
    let text = std::fs::read_to_string(&path).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let pathstr = path.display().to_string();
    let parse = |line: usize, reason: &str| CoreError::Parse {
        path: pathstr.clone(),
        line,
        reason: reason.to_string(),
    };
    let mut roles: [Option<PathBuf>; 4] = [None, None, None, None];
    let order = ["a_scat", "b_scat", "reflection", "jost"];
    let mut masked: Vec<usize> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line.trim() != "key,value" {
                return Err(parse(1, "expected header `key,value`"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(',')
            .ok_or_else(|| parse(idx + 1, "expected `key,value`"))?;
        if key == "masked" {
            for piece in value.split(';').filter(|p| !p.is_empty()) {
                masked.push(piece.trim().parse::<usize>().map_err(|e| {
                    parse(idx + 1, &format!("bad masked index `{piece}`: {e}"))
                })?);
            }
        } else if let Some(slot) = order.iter().position(|r| *r == key) {
            roles[slot] = Some(dir.join(value.trim()));
        } else {
            return Err(parse(idx + 1, &format!("unknown key `{key}`")));
        }
    }
    let read = |slot: usize| -> Result<SampledFunction, CoreError> {
        let p = roles[slot]
            .as_ref()
            .ok_or_else(|| parse(1, &format!("manifest is missing `{}`", order[slot])))?;
        crate::core::read_sampled(p)
    };
    masked.sort_unstable();
    Ok(ScatteringData {
        a_scat: read(0)?,
        b_scat: read(1)?,
        reflection: read(2)?,
        jost: read(3)?,
        masked,
    })
}

/// Schrodinger potentials of a real coefficient, on the halved grid.
///
/// The square of the Dirac operator splits into two half-line Schrodinger
/// operators: q1 = a^2 - a' with the mixed boundary condition
/// f'(0) = h f(0), h = -2A(0), acting on first components, and q2 = a^2 + a'
/// with the Dirichlet condition on second components.
#[derive(Debug, Clone)]
pub struct SchrodingerReduction {
    /// Potential for the mixed boundary condition (a Riccati image of a).
    pub q1: SampledFunction,
    /// Potential for the Dirichlet boundary condition.
    pub q2: SampledFunction,
    /// Mixed boundary constant, -2 A(0).
    pub h: f64,
}

/// Both Schrodinger reductions of a real coefficient. The derivative of
/// a(r) = 2A(2r) is taken by central differences, one-sided at the ends.
pub fn schrodinger_reduce(
    coeff: &SampledFunction,
) -> Result<SchrodingerReduction, ScatteringError> {
    let av = require_real(coeff, "coefficient")?;
    require_halfline(coeff, "coefficient")?;
    if av.len() < 3 {
        return Err(ScatteringError::TooFewSamples {
            what: "coefficient",
            need: 3,
            got: av.len(),
        });
    }
    let half = Grid1D::new(0.0, coeff.grid().step() / 2.0, av.len())?;
    let a: Vec<f64> = av.iter().map(|v| 2.0 * v).collect();
    let da = derivative(half.step(), &a);
    let q = |sign: f64| -> Result<SampledFunction, CoreError> {
        SampledFunction::new(
            half.clone(),
            a.iter()
                .zip(&da)
                .map(|(ai, di)| C64::new(ai * ai + sign * di, 0.0))
                .collect(),
        )
    };
    Ok(SchrodingerReduction {
        q1: q(-1.0)?,
        q2: q(1.0)?,
        h: -a[0],
    })
}

/// Piecewise-linear integral of density x weight over [lo, hi] clipped to
/// the grid; Simpson per overlap segment is exact for the cubic integrand.
fn clipped_moment(
    density: &SampledFunction,
    lo: f64,
    hi: f64,
    weight: impl Fn(f64) -> f64,
) -> f64 {
    let g = density.grid();
    let mut acc = 0.0;
    for i in 0..g.count().saturating_sub(1) {
        let a = g.point(i).max(lo);
        let b = g.point(i + 1).min(hi);
        if a >= b {
            continue;
        }
        let f = |x: f64| density.eval_linear(x).re * weight(x);
        acc += (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
    }
    acc
}

/// Spectral measures of the two Schrodinger reductions on an energy grid:
///
/// ```text
/// rho1(E) = 4 sigma(sqrt E),   rho2(E) = 4 Int_0^{sqrt E} xi^2 d sigma(xi),
/// ```
///
/// where sigma is the odd-normalized distribution of the Krein measure, so
/// both right sides equal twice the (plain or second-moment) mass of
/// [-sqrt E, sqrt E].
pub fn schrodinger_measures(
    measure: &SpectralMeasure,
    energies: &Grid1D,
) -> Result<(SampledFunction, SampledFunction), ScatteringError> {
    if energies.start() < 0.0 {
        return Err(ScatteringError::NegativeEnergy {
            start: energies.start(),
        });
    }
    let mut rho1 = Vec::with_capacity(energies.count());
    let mut rho2 = Vec::with_capacity(energies.count());
    for e in energies.points() {
        let s = e.sqrt();
        let mut m0 = clipped_moment(measure.density(), -s, s, |_| 1.0);
        let mut m2 = clipped_moment(measure.density(), -s, s, |x| x * x);
        for &(loc, w) in measure.point_masses() {
            if loc.abs() <= s {
                m0 += w;
                m2 += w * loc * loc;
            }
        }
        rho1.push(C64::new(2.0 * m0, 0.0));
        rho2.push(C64::new(2.0 * m2, 0.0));
    }
    Ok((
        SampledFunction::new(energies.clone(), rho1)?,
        SampledFunction::new(energies.clone(), rho2)?,
    ))
}

/// Solution values of a dense linear system with a residual acceptance
/// test; near-singular systems that slip past LU pivoting are rejected.
fn solve_checked(
    m: &DMatrix<f64>,
    rhs: &DVector<f64>,
    what: &'static str,
    at: f64,
) -> Result<DVector<f64>, ScatteringError> {
    let sol = m
        .clone()
        .lu()
        .solve(rhs)
        .ok_or(ScatteringError::SingularSystem { what, at })?;
    let resid = (m * &sol - rhs).amax();
    if resid > SOLVE_RESIDUAL * (1.0 + rhs.amax()) {
        return Err(ScatteringError::SingularSystem { what, at });
    }
    Ok(sol)
}

/// Gelfand-Levitan kernel K(x, y) on the triangle 0 <= y <= x <= X.
#[derive(Debug, Clone)]
pub struct GLKernel {
    grid: Grid1D,
    rows: Vec<Vec<f64>>,
}

impl GLKernel {
    /// Grid of the x (row) coordinate; rows hold y = 0 ... x.
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// K(x_i, y_j) for j <= i.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    /// Diagonal samples K(x, x).
    pub fn diagonal(&self) -> Vec<f64> {
        self.rows.iter().map(|r| *r.last().expect("row")).collect()
    }

    /// Potential q(x) = 2 dK(x, x)/dx, with the same difference stencils as
    /// [`schrodinger_reduce`].
    pub fn potential(&self) -> Result<SampledFunction, ScatteringError> {
        let diag = self.diagonal();
        if diag.len() < 3 {
            return Err(ScatteringError::TooFewSamples {
                what: "kernel diagonal",
                need: 3,
                got: diag.len(),
            });
        }
        let dd = derivative(self.grid.step(), &diag);
        Ok(SampledFunction::new(
            self.grid.clone(),
            dd.iter().map(|d| C64::new(2.0 * d, 0.0)).collect(),
        )?)
    }
}

/// Write a triangle kernel as CSV `x,y,re`, row by row.
pub fn write_gl_kernel(path: &Path, k: &GLKernel) -> Result<(), CoreError> {
    let mut out = String::from("x,y,re\n");
    for (i, row) in k.rows.iter().enumerate() {
        let x = k.grid.point(i);
        for (j, v) in row.iter().enumerate() {
            let _ = writeln!(out, "{x:.16e},{:.16e},{v:.16e}", k.grid.point(j));
        }
    }
    std::fs::write(path, out).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Residual report of the Gelfand-Levitan consistency check.
#[derive(Debug)]
pub struct GLReport {
    pub kernel: GLKernel,
    /// Largest defect of -K(x, y) = Gamma_{2x}(x+y, 0) + Gamma_{2x}(x-y, 0)
    /// against independently solved Toeplitz resolvent columns.
    pub resolvent_residual: f64,
    /// Largest gap between 2 dK(x,x)/dx and the Riccati potential q1 of the
    /// coefficient.
    pub potential_residual: f64,
    /// |K(0,0) + 2 A(0)|; the mixed boundary constant read two ways.
    pub boundary_mismatch: f64,
}

/// Solve the Gelfand-Levitan equation for the kernel rows and report its
/// consistency with the accelerant resolvent and the Riccati potential.
///
/// The input kernel F of the integral equation is built from the accelerant
/// as F(x, y) = H(x+y) + H(x-y) (the spectral-side F equals 2H). Row x is
/// the dense solve of
///
/// ```text
/// K(x, y) + F(x, y) + Int_0^x K(x, t) F(t, y) dt = 0,   0 <= y <= x,
/// ```
///
/// on trapezoid weights; a singular row means the data violates the
/// accelerant positivity property. The kernel triangle spans half the grid
/// of `h` so that every needed H(x+y) stays on the carrier.
pub fn gelfand_levitan_check(
    h: &SampledFunction,
    coeff: &SampledFunction,
) -> Result<GLReport, ScatteringError> {
    let hv = require_real(h, "accelerant")?;
    let av = require_real(coeff, "coefficient")?;
    require_halfline(h, "accelerant")?;
    require_halfline(coeff, "coefficient")?;
    if hv.len() < 5 {
        return Err(ScatteringError::TooFewSamples {
            what: "accelerant",
            need: 5,
            got: hv.len(),
        });
    }
    let s = h.grid().step();
    let m = (hv.len() - 1) / 2;
    let grid = Grid1D::new(0.0, s, m + 1)?;

    // kernel rows: K(x_i, .) solves (I + F W) k = -F(x_i, .)
    let rows: Vec<Vec<f64>> = (0..=m)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>, ScatteringError> {
            if i == 0 {
                return Ok(vec![-2.0 * hv[0]]);
            }
            let n = i + 1;
            let w = Grid1D::new(0.0, s, n)?.trapezoid_weights();
            let f2 = |p: usize, q: usize| hv[p + q] + hv[p.abs_diff(q)];
            let mat = DMatrix::from_fn(n, n, |p, q| {
                let delta = if p == q { 1.0 } else { 0.0 };
                delta + w[q] * f2(q, p)
            });
            let rhs = DVector::from_fn(n, |p, _| -f2(i, p));
            let sol = solve_checked(&mat, &rhs, "I + F", i as f64 * s)?;
            Ok(sol.as_slice().to_vec())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let kernel = GLKernel {
        grid: grid.clone(),
        rows,
    };

    // resolvent columns Gamma_{2x}(., 0) from the Toeplitz side, solved
    // independently of the kernel rows
    let resolvent_residual = (1..=m)
        .into_par_iter()
        .map(|i| -> Result<f64, ScatteringError> {
            let n = 2 * i + 1;
            let w = Grid1D::new(0.0, s, n)?.trapezoid_weights();
            let mat = DMatrix::from_fn(n, n, |p, q| {
                let delta = if p == q { 1.0 } else { 0.0 };
                delta + w[q] * hv[p.abs_diff(q)]
            });
            let rhs = DVector::from_fn(n, |p, _| hv[p]);
            let gamma = solve_checked(&mat, &rhs, "I + H", 2.0 * i as f64 * s)?;
            let mut worst = 0.0f64;
            for p in 0..=i {
                let lhs = -kernel.value(i, p);
                worst = worst.max((lhs - gamma[i + p] - gamma[i - p]).abs());
            }
            Ok(worst)
        })
        .try_reduce(|| 0.0, |x, y| Ok(x.max(y)))?;

    // potential route: 2 dK/dx against the Riccati image of the coefficient
    let q_gl = kernel.potential()?;
    let reduction = schrodinger_reduce(coeff)?;
    let x_top = grid.end().min(reduction.q1.grid().end());
    let mut potential_residual = 0.0f64;
    for (i, x) in grid.points().enumerate() {
        if x > x_top {
            break;
        }
        let gap = (q_gl.value(i).re - reduction.q1.eval_linear(x).re).abs();
        potential_residual = potential_residual.max(gap);
    }

    let boundary_mismatch = (kernel.value(0, 0) + 2.0 * av[0]).abs();
    Ok(GLReport {
        kernel,
        resolvent_residual,
        potential_residual,
        boundary_mismatch,
    })
}

/// Transform Int f(x) e^{i lambda x} dx, exact for the piecewise-linear
/// interpolant of `f`. Interior nodes carry the sinc^2 window of the hat
/// function; the end nodes carry one-sided half-hat moments. Plain
/// trapezoid quadrature is off by O((lambda step)^2), which at the top of
/// the lambda window would swamp the symbol it is subtracted from; this
/// variant matches the interpolant the ODE solver integrates.
fn fourier_piecewise_linear(f: &SampledFunction, lambda: f64) -> C64 {
    let g = f.grid();
    let s = g.step();
    let u = lambda * s;
    let i = C64::i();
    // W0 = Int_0^1 (1-t) e^{iut} dt, W1 = Int_0^1 t e^{iut} dt
    let (w0, w1, hat) = if u.abs() < 1e-4 {
        let w0 = C64::new(0.5 - u * u / 24.0, u / 6.0 - u * u * u / 120.0);
        let w1 = C64::new(0.5 - u * u / 8.0, u / 3.0 - u * u * u / 30.0);
        let half = 0.5 * u;
        (w0, w1, 1.0 - half * half / 3.0)
    } else {
        let eiu = C64::new(0.0, u).exp();
        let iu = i * u;
        let w1 = eiu / iu - (eiu - 1.0) / (iu * iu);
        let w0 = (eiu - 1.0) / iu - w1;
        let sc = (0.5 * u).sin() / (0.5 * u);
        (w0, w1, sc * sc)
    };
    let n = f.len();
    let phase = |x: f64| (i * lambda * x).exp();
    let mut acc = f.value(0) * w0 * phase(g.point(0));
    acc += f.value(n - 1) * w1 * (-i * u).exp() * phase(g.point(n - 1));
    for k in 1..n - 1 {
        acc += f.value(k) * hat * phase(g.point(k));
    }
    acc * s
}

/// Fourier symbol of the scattering datum on a real grid: g = b / conj(a)
/// from the Wall functions at the right end of the support.
pub fn scattering_symbol(
    coeff: &SampledFunction,
    lambdas: &Grid1D,
) -> Result<SampledFunction, ScatteringError> {
    require_halfline(coeff, "coefficient")?;
    let walls = wall_on_grid(coeff, lambdas)?;
    let values = walls.iter().map(|w| w.b_w / w.a_w.conj()).collect();
    Ok(SampledFunction::new(lambdas.clone(), values)?)
}

/// Scattering datum D on `x_grid`, with g(lambda) = Int D(x) e^{i lambda x} dx.
///
/// The symbol decays only like 1/lambda because D inherits the support-edge
/// jumps of -A (the two agree at first order in the coefficient). The
/// transform of A is added before inverting and the coefficient subtracted
/// after, so only the smoother remainder passes through the truncated
/// lambda window; the tail report describes that remainder.
pub fn scattering_datum(
    coeff: &SampledFunction,
    lambdas: &Grid1D,
    x_grid: &Grid1D,
    tail_tol: f64,
) -> Result<(SampledFunction, TailReport), ScatteringError> {
    let g = scattering_symbol(coeff, lambdas)?;
    let mut shifted = Vec::with_capacity(g.len());
    for (i, l) in lambdas.points().enumerate() {
        shifted.push(g.value(i) + fourier_piecewise_linear(coeff, l));
    }
    let shifted = SampledFunction::new(lambdas.clone(), shifted)?;
    let (smooth, tail) = inverse_fourier_halfline(&shifted, x_grid, tail_tol);
    let values = x_grid
        .points()
        .zip(smooth.values())
        .map(|(x, v)| v - coeff.eval_linear(x))
        .collect();
    Ok((SampledFunction::new(x_grid.clone(), values)?, tail))
}

/// Largest singular value of the weighted Hankel matrix
/// sqrt(w_p) D(x_p + x_q) sqrt(w_q) over the full grid of the datum.
pub fn hankel_norm(d: &SampledFunction) -> f64 {
    let w = d.grid().trapezoid_weights();
    let n = d.len();
    let m = DMatrix::from_fn(n, n, |p, q| {
        if p + q < n {
            (w[p] * w[q]).sqrt() * d.value(p + q)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let sym = m.adjoint() * &m;
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &e| acc.max(e))
        .sqrt()
}

/// Coefficient recovered from a scattering datum by the layered Hankel
/// systems: for each radius r the block system
///
/// ```text
/// (I + [[0, D*],[D, 0]])(I + L) = I    on [r/2, infinity)^2,
/// ```
///
/// with Hankel kernel D(x + u) reduces to (I - D D*) L_21 = -D, and
/// A(r) is the (2,1) kernel of L at the corner (r/2, r/2). The datum must
/// be contractive; its support bound makes every system finite. Radii run
/// over the grid of `d` and solve independently.
pub fn hankel_inverse_scattering(
    d: &SampledFunction,
) -> Result<SampledFunction, ScatteringError> {
    require_halfline(d, "scattering datum")?;
    let norm = hankel_norm(d);
    if norm >= 1.0 {
        return Err(ScatteringError::NotAScatteringDatum { norm });
    }
    let s = d.grid().step();
    let n_last = d.len() - 1;
    let values: Vec<C64> = (0..d.len())
        .into_par_iter()
        .map(|j| -> Result<C64, ScatteringError> {
            // nodes x_k = r/2 + k s; two zero-padded nodes keep the trapezoid
            // weights off the degenerate single-node case near the support end
            let n = n_last - j + 3;
            let w = Grid1D::new(0.0, s, n)?.trapezoid_weights();
            let entry = |p: usize, q: usize| {
                let idx = j + p + q;
                if idx <= n_last {
                    d.value(idx)
                } else {
                    C64::new(0.0, 0.0)
                }
            };
            let dw = DMatrix::from_fn(n, n, |p, q| entry(p, q) * w[q]);
            let dw_conj = DMatrix::from_fn(n, n, |p, q| entry(p, q).conj() * w[q]);
            let mat = DMatrix::identity(n, n) - &dw * &dw_conj;
            let rhs = DVector::from_fn(n, |p, _| entry(p, 0) * w[0]);
            let sol = mat
                .lu()
                .solve(&rhs)
                .ok_or(ScatteringError::SingularSystem {
                    what: "I - D D*",
                    at: j as f64 * s,
                })?;
            Ok(-sol[0] / w[0])
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SampledFunction::new(d.grid().clone(), values)?)
}

/// Two routes to |P*(2R, lambda)|: the ODE and the regularized-determinant
/// factorization over the dissipative layer operator.
#[derive(Debug, Clone, Copy)]
pub struct DeterminantComparison {
    /// |P*(2R, lambda)| from the transfer matrix.
    pub direct: f64,
    /// |prefactor x det2(I + resolvent Q)| from the discretized layer.
    pub factorized: f64,
}

impl DeterminantComparison {
    pub fn relative_gap(&self) -> f64 {
        (self.direct - self.factorized).abs() / self.direct.max(1e-300)
    }
}

/// Free-resolvent kernel of the dissipative layer operator on [0, R] with
/// absorbing right boundary, evaluated at (r, s); the diagonal takes the
/// mean of the one-sided limits.
fn layer_resolvent(r: f64, s: f64, lambda: C64) -> [[C64; 2]; 2] {
    let i = C64::i();
    let above = |r: f64, s: f64| {
        let e = (i * lambda * s).exp();
        let (c, sn) = ((lambda * r).cos(), (lambda * r).sin());
        [[i * c * e, c * e], [i * sn * e, sn * e]]
    };
    let below = |r: f64, s: f64| {
        let e = (i * lambda * r).exp();
        let (c, sn) = ((lambda * s).cos(), (lambda * s).sin());
        [[i * e * c, i * e * sn], [e * c, e * sn]]
    };
    if s > r {
        above(r, s)
    } else if s < r {
        below(r, s)
    } else {
        let (u, v) = (above(r, s), below(r, s));
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for p in 0..2 {
            for q in 0..2 {
                out[p][q] = 0.5 * (u[p][q] + v[p][q]);
            }
        }
        out
    }
}

/// Modulus cross-check of the determinant factorization
///
/// ```text
/// P*(2R, lambda) = exp[ -Int_0^{2R} A(u) e^{i lambda u} du ]
///                  det2( I + (layer resolvent) Q )
/// ```
///
/// on an `n`-node mesh of [0, R], R = half the coefficient support. The
/// Hilbert-Schmidt discretization error of the kernel (discontinuous on the
/// diagonal) dominates, so this is a coarse smoke test; only the modulus is
/// compared because the discrete determinant phase is not trustworthy.
/// det2(I + T) is evaluated as det(I + T) e^{-tr T}, the finite-dimensional
/// form of the eigenvalue product prod (1 + mu_k) e^{-mu_k}.
pub fn dissipative_det2(
    coeff: &SampledFunction,
    lambda: C64,
    n: usize,
) -> Result<DeterminantComparison, ScatteringError> {
    require_halfline(coeff, "coefficient")?;
    if n < 2 {
        return Err(ScatteringError::TooFewSamples {
            what: "layer mesh",
            need: 2,
            got: n,
        });
    }
    let big_r = coeff.grid().end();
    let r_d = big_r / 2.0;
    let mesh = Grid1D::new(0.0, r_d / (n - 1) as f64, n)?;
    let w = mesh.trapezoid_weights();
    let q_at = |r: f64| {
        let a2 = coeff.eval_linear(2.0 * r);
        let (a, b) = (2.0 * a2.re, 2.0 * a2.im);
        [
            [C64::new(-b, 0.0), C64::new(-a, 0.0)],
            [C64::new(-a, 0.0), C64::new(b, 0.0)],
        ]
    };
    let mut t = DMatrix::from_element(2 * n, 2 * n, C64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let block = mat2_mul(&layer_resolvent(mesh.point(i), mesh.point(j), lambda), &q_at(mesh.point(j)));
            for p in 0..2 {
                for q in 0..2 {
                    t[(2 * i + p, 2 * j + q)] = block[p][q] * w[j];
                }
            }
        }
    }
    let tr = t.trace();
    let det = (DMatrix::identity(2 * n, 2 * n) + &t).lu().determinant();
    let det2 = det * (-tr).exp();
    let prefactor = (-fourier_integral(coeff, lambda)?).exp();
    let direct = propagate(coeff, big_r, lambda)?.polys().p_star.norm();
    Ok(DeterminantComparison {
        direct,
        factorized: (prefactor * det2).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(end: f64, step: f64) -> Grid1D {
        Grid1D::from_range(0.0, end, step).unwrap()
    }

    fn real_coeff(end: f64, step: f64, f: impl Fn(f64) -> f64) -> SampledFunction {
        SampledFunction::from_fn(grid(end, step), |x| C64::new(f(x), 0.0)).unwrap()
    }

    #[test]
    fn dirac_potential_round_trips() {
        let coeff = SampledFunction::from_fn(grid(1.0, 1e-2), |x| {
            C64::new(0.3 * (2.0 * x).cos(), 0.4 * x.sin())
        })
        .unwrap();
        let p = dirac_potential(&coeff).unwrap();
        assert!(!p.resampled());
        assert_eq!(p.a().grid().step(), 0.5e-2);
        for (i, x) in coeff.grid().points().enumerate() {
            assert_eq!(p.a().value(i).re, 2.0 * coeff.value(i).re);
            assert_eq!(p.b().value(i).re, 2.0 * coeff.value(i).im);
            assert_eq!(p.a().grid().point(i), x / 2.0);
        }
        let back = krein_coefficient(&p).unwrap();
        assert_eq!(back.values(), coeff.values());
        assert_eq!(back.grid().step(), coeff.grid().step());
    }

    #[test]
    fn purely_imaginary_coefficient_fills_only_b() {
        let coeff = SampledFunction::constant(grid(1.0, 1e-2), C64::i()).unwrap();
        let p = dirac_potential(&coeff).unwrap();
        assert_eq!(p.a().max_abs(), 0.0);
        for v in p.b().values() {
            assert_eq!(*v, C64::new(2.0, 0.0));
        }
    }

    #[test]
    fn mismatched_grids_resample_with_notice() {
        let a = SampledFunction::constant(grid(1.0, 1e-2), C64::new(0.5, 0.0)).unwrap();
        let b = SampledFunction::from_fn(grid(1.0, 2e-2), |x| C64::new(x, 0.0)).unwrap();
        let p = DiracPotential::new(a, b).unwrap();
        assert!(p.resampled());
        assert_eq!(p.b().len(), p.a().len());
        // linear data is reproduced exactly by linear resampling
        for (i, r) in p.a().grid().points().enumerate() {
            assert!((p.b().value(i).re - r).abs() < 1e-12);
        }
    }

    #[test]
    fn free_eigenfunctions_are_circular() {
        let coeff = SampledFunction::zero(grid(2.0, 1e-2));
        let lambda = 1.7;
        let (phi, psi) = dirac_eigenfunctions(&coeff, lambda).unwrap();
        assert_eq!(phi.value(0), C64::new(1.0, 0.0));
        assert_eq!(psi.value(0), C64::new(0.0, 0.0));
        for (i, r) in phi.grid().points().enumerate() {
            assert!((phi.value(i).re - (lambda * r).cos()).abs() < 1e-12);
            assert!((psi.value(i).re - (lambda * r).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn free_scattering_data_is_inert() {
        let coeff = SampledFunction::zero(grid(1.0, 1e-2));
        let lambdas = Grid1D::from_range(-5.0, 5.0, 0.5).unwrap();
        let data = scattering_data_dirac(&coeff, &lambdas).unwrap();
        for i in 0..lambdas.count() {
            assert!((data.a_scat().value(i) - 1.0).norm() < 1e-12);
            assert!(data.b_scat().value(i).norm() < 1e-12);
            assert!(data.reflection().value(i).norm() < 1e-12);
            assert!((data.jost().value(i) - 1.0).norm() < 1e-12);
        }
        assert!(data.masked().is_empty());
        assert_eq!(data.energy_residual(), 0.0);
    }

    #[test]
    fn energy_identity_on_the_real_grid() {
        let coeff = SampledFunction::from_fn(grid(1.0, 1e-3), |x| {
            C64::new(0.8 * (PI * x).sin().powi(2), 0.3 * x)
        })
        .unwrap();
        let lambdas = Grid1D::from_range(-30.0, 30.0, 0.5).unwrap();
        let data = scattering_data_dirac(&coeff, &lambdas).unwrap();
        assert!(
            data.energy_residual() < 1e-8,
            "energy residual {:.3e}",
            data.energy_residual()
        );
        // the Jost function is the sum of the amplitudes, bitwise
        for i in 0..lambdas.count() {
            let gap = (data.jost().value(i) - data.a_scat().value(i) - data.b_scat().value(i))
                .norm();
            assert!(gap < 1e-10);
        }
    }

    #[test]
    fn schrodinger_data_masks_the_origin_cell() {
        let coeff = real_coeff(1.0, 1e-3, |_| 0.5);
        let lambdas = Grid1D::from_range(-2.0, 2.0, 0.5).unwrap();
        let data = scattering_data_schrodinger(&coeff, &lambdas).unwrap();
        let zero_idx = 4;
        assert_eq!(lambdas.point(zero_idx), 0.0);
        assert_eq!(data.masked(), &[zero_idx]);
        assert!(data.is_masked(zero_idx));
        assert_eq!(data.a_scat().value(zero_idx), C64::new(0.0, 0.0));
        // the Jost function has no pole and stays unmasked
        assert!(data.jost().value(zero_idx).norm() > 0.0);
        assert!(
            data.energy_residual() < 1e-8,
            "energy residual {:.3e}",
            data.energy_residual()
        );
    }

    #[test]
    fn schrodinger_data_without_boundary_term_is_dirac_data() {
        // A(0) = 0: the 1/lambda correction vanishes identically
        let coeff = real_coeff(1.0, 1e-3, |x| 0.4 * (PI * x).sin());
        let lambdas = Grid1D::from_range(-2.0, 2.0, 0.5).unwrap();
        let s = scattering_data_schrodinger(&coeff, &lambdas).unwrap();
        let d = scattering_data_dirac(&coeff, &lambdas).unwrap();
        assert!(s.masked().is_empty());
        for i in 0..lambdas.count() {
            assert_eq!(s.a_scat().value(i), d.a_scat().value(i));
            assert_eq!(s.b_scat().value(i), d.b_scat().value(i));
        }
    }

    #[test]
    fn scattering_csv_round_trips() {
        let coeff = real_coeff(1.0, 1e-2, |_| 0.5);
        let lambdas = Grid1D::from_range(-2.0, 2.0, 0.5).unwrap();
        let data = scattering_data_schrodinger(&coeff, &lambdas).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_scattering(dir.path(), &data).unwrap();
        let back = read_scattering(dir.path()).unwrap();
        assert_eq!(back.masked(), data.masked());
        for i in 0..lambdas.count() {
            assert_eq!(back.a_scat().value(i), data.a_scat().value(i));
            assert_eq!(back.jost().value(i), data.jost().value(i));
        }
    }

    #[test]
    fn riccati_family_has_flat_mixed_potential() {
        // a(r) = -1/(1+r) solves q = a^2 - a' = 0; the generating
        // coefficient is A(x) = -1/(2+x) and the boundary constant is 1
        let coeff = real_coeff(2.0, 2e-3, |x| -1.0 / (2.0 + x));
        let red = schrodinger_reduce(&coeff).unwrap();
        assert!((red.h - 1.0).abs() < 1e-12);
        assert!(
            red.q1.max_abs() < 1e-5,
            "sup |q1| = {:.3e}",
            red.q1.max_abs()
        );
        // the Dirichlet partner is 2 a^2, nowhere zero
        let a0sq = 2.0 * (1.0f64).powi(2);
        assert!((red.q2.value(0).re - a0sq).abs() < 1e-5);
    }

    #[test]
    fn reduce_rejects_complex_coefficients() {
        let coeff = SampledFunction::constant(grid(1.0, 1e-2), C64::new(0.1, 0.2)).unwrap();
        match schrodinger_reduce(&coeff) {
            Err(ScatteringError::ComplexValued { .. }) => {}
            other => panic!("expected ComplexValued, got {other:?}"),
        }
    }

    #[test]
    fn difference_stencils_match_an_analytic_slope() {
        // a(r) = tanh r gives q1 = tanh^2 - sech^2 and q2 = 1 exactly
        let coeff = real_coeff(2.0, 2e-3, |x| 0.5 * (x / 2.0).tanh());
        let red = schrodinger_reduce(&coeff).unwrap();
        let mut worst = 0.0f64;
        for (i, r) in red.q1.grid().points().enumerate() {
            let t = r.tanh();
            let sech2 = 1.0 - t * t;
            let q1 = t * t - sech2;
            worst = worst.max((red.q1.value(i).re - q1).abs());
            worst = worst.max((red.q2.value(i).re - 1.0).abs());
        }
        assert!(worst < 1e-4, "stencil error {worst:.3e}");
    }

    #[test]
    fn free_measure_dictionary_matches_closed_forms() {
        let dens = SampledFunction::constant(
            Grid1D::from_range(-10.0, 10.0, 0.01).unwrap(),
            C64::new(1.0 / (2.0 * PI), 0.0),
        )
        .unwrap();
        let measure = SpectralMeasure::ac_only(dens).unwrap();
        let energies = Grid1D::from_range(0.0, 4.0, 0.25).unwrap();
        let (rho1, rho2) = schrodinger_measures(&measure, &energies).unwrap();
        for (i, e) in energies.points().enumerate() {
            let s = e.sqrt();
            assert!((rho1.value(i).re - 2.0 * s / PI).abs() < 1e-12);
            assert!((rho2.value(i).re - 2.0 * s.powi(3) / (3.0 * PI)).abs() < 1e-9);
        }
    }

    #[test]
    fn point_mass_at_zero_jumps_the_first_measure() {
        let dens = SampledFunction::zero(Grid1D::from_range(-1.0, 1.0, 0.1).unwrap());
        let measure = SpectralMeasure::new(dens, vec![(0.0, 0.5)]).unwrap();
        let energies = Grid1D::from_range(0.0, 1.0, 0.5).unwrap();
        let (rho1, rho2) = schrodinger_measures(&measure, &energies).unwrap();
        for i in 0..energies.count() {
            assert_eq!(rho1.value(i).re, 1.0);
            assert_eq!(rho2.value(i).re, 0.0);
        }
    }

    #[test]
    fn measures_reject_negative_energies() {
        let dens = SampledFunction::zero(Grid1D::from_range(-1.0, 1.0, 0.1).unwrap());
        let measure = SpectralMeasure::ac_only(dens).unwrap();
        let energies = Grid1D::from_range(-1.0, 1.0, 0.5).unwrap();
        match schrodinger_measures(&measure, &energies) {
            Err(ScatteringError::NegativeEnergy { .. }) => {}
            other => panic!("expected NegativeEnergy, got {other:?}"),
        }
    }

    #[test]
    fn gl_zero_accelerant_is_inert() {
        let h = SampledFunction::zero(grid(2.0, 1e-2));
        let coeff = SampledFunction::zero(grid(2.0, 1e-2));
        let report = gelfand_levitan_check(&h, &coeff).unwrap();
        assert_eq!(report.resolvent_residual, 0.0);
        assert_eq!(report.potential_residual, 0.0);
        assert_eq!(report.boundary_mismatch, 0.0);
        for (i, row) in report.kernel.rows.iter().enumerate() {
            assert_eq!(row.len(), i + 1);
            assert!(row.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn gl_constant_accelerant_matches_closed_forms() {
        // H = 1/2 pairs with A(r) = 1/(2+r); K(x,y) = -1/(1+x) and the
        // resolvent column is flat at 1/(2+2x)
        let h = real_coeff(2.0, 5e-3, |_| 0.5);
        let coeff = real_coeff(2.0, 5e-3, |x| 1.0 / (2.0 + x));
        let report = gelfand_levitan_check(&h, &coeff).unwrap();
        let k = &report.kernel;
        for (i, x) in k.grid().points().enumerate() {
            for j in 0..=i {
                assert!((k.value(i, j) + 1.0 / (1.0 + x)).abs() < 1e-10);
            }
        }
        assert!(
            report.resolvent_residual < 1e-3,
            "eeer residual {:.3e}",
            report.resolvent_residual
        );
        assert!(
            report.potential_residual < 1e-2,
            "q residual {:.3e}",
            report.potential_residual
        );
        assert!(report.boundary_mismatch < 1e-10);
    }

    #[test]
    fn gl_detects_a_non_accelerant() {
        // 1 + H_r acquires a nonpositive eigenvalue once r crosses 1/2, so
        // some row of I + F must turn singular on [0, 1]
        let h = real_coeff(2.0, 1e-2, |_| -1.0);
        let coeff = real_coeff(2.0, 1e-2, |_| 0.0);
        match gelfand_levitan_check(&h, &coeff) {
            Err(ScatteringError::SingularSystem { .. }) => {}
            other => panic!("expected SingularSystem, got {other:?}"),
        }
    }

    #[test]
    fn gl_kernel_csv_has_triangle_rows() {
        let h = real_coeff(1.0, 0.25, |_| 0.5);
        let coeff = real_coeff(1.0, 0.25, |x| 1.0 / (2.0 + x));
        let report = gelfand_levitan_check(&h, &coeff).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kernel.csv");
        write_gl_kernel(&path, &report.kernel).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let rows = text.lines().count() - 1;
        let m = report.kernel.grid().count();
        assert_eq!(rows, m * (m + 1) / 2);
        assert!(text.starts_with("x,y,re\n"));
    }

    #[test]
    fn hankel_zero_datum_is_inert() {
        let d = SampledFunction::zero(grid(1.0, 2e-2));
        let a = hankel_inverse_scattering(&d).unwrap();
        assert_eq!(a.max_abs(), 0.0);
    }

    #[test]
    fn hankel_rejects_supercritical_data() {
        let d = SampledFunction::constant(grid(2.0, 2e-2), C64::new(1.0, 0.0)).unwrap();
        match hankel_inverse_scattering(&d) {
            Err(ScatteringError::NotAScatteringDatum { norm }) => assert!(norm >= 1.0),
            other => panic!("expected NotAScatteringDatum, got {other:?}"),
        }
    }

    #[test]
    fn hankel_small_datum_inverts_to_minus_itself() {
        // first order in the datum: L_21 = -D, so A(r) = -D(r) + O(|D|^2)
        let eps = 1e-3;
        let d = real_coeff(1.0, 1e-2, |x| eps * (PI * x).sin());
        let a = hankel_inverse_scattering(&d).unwrap();
        let mut worst = 0.0f64;
        for i in 0..d.len() {
            worst = worst.max((a.value(i) + d.value(i)).norm());
        }
        assert!(worst < 10.0 * eps * eps, "Born gap {worst:.3e}");
    }

    #[test]
    fn layer_determinant_is_exact_for_the_free_case() {
        let coeff = SampledFunction::zero(grid(1.0, 1e-2));
        let cmp = dissipative_det2(&coeff, C64::new(2.0, 0.5), 41).unwrap();
        assert!((cmp.direct - 1.0).abs() < 1e-12);
        assert!((cmp.factorized - 1.0).abs() < 1e-12);
    }

    #[test]
    fn layer_determinant_smoke_test_on_a_coarse_mesh() {
        let coeff = SampledFunction::constant(grid(1.0, 1e-3), C64::new(1.0, 0.0)).unwrap();
        for lambda in [C64::new(2.0, 0.0), C64::new(1.0, 0.5)] {
            let cmp = dissipative_det2(&coeff, lambda, 161).unwrap();
            assert!(
                cmp.relative_gap() < 0.05,
                "lambda {lambda}: direct {:.6}, factorized {:.6}",
                cmp.direct,
                cmp.factorized
            );
        }
    }

    #[test]
    fn datum_of_the_free_coefficient_vanishes() {
        let coeff = SampledFunction::zero(grid(1.0, 1e-2));
        let lambdas = Grid1D::from_range(-50.0, 50.0, 0.25).unwrap();
        let xs = grid(2.0, 1e-2);
        let (d, tail) = scattering_datum(&coeff, &lambdas, &xs, 1e-3).unwrap();
        assert!(!tail.truncated);
        assert!(d.max_abs() < 1e-12);
    }
}
