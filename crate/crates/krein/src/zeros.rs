//! Zero location for P(r, .) in the upper half-plane: argument-principle
//! counting on adaptively refined boundary walks, Newton refinement seeded
//! by cell subdivision, the large-n asymptote of the zero lattice, and the
//! Fejer-type exclusion certificates.
//!
//! P(r, .) is entire with zeros in the open upper half-plane only, while
//! P*(r, .) never vanishes on the closed upper half-plane; the counting and
//! refinement below never needs to look at the real axis, and rectangles
//! touching it are lifted off by a fixed margin.

use crate::core::{CoreError, SampledFunction, SpectralMeasure, C64};
use crate::krein_ode::{propagate_dlambda_with, propagate_with, OdeConfig, OdeError};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

/// Minimum height above the real axis for counting rectangles. Zeros reach
/// the axis only in the r -> infinity limit and boundary evaluation
/// degrades there.
pub const AXIS_LIFT: f64 = 1e-3;
/// Relative |P| floor on a boundary walk below which a zero is considered
/// to sit on (or hug) the boundary.
pub const BOUNDARY_CLEARANCE: f64 = 1e-6;
/// Residual acceptance for a refined zero, relative to the boundary
/// maximum of |P|.
pub const ZERO_RESIDUAL: f64 = 1e-9;
/// Sample budget for a single boundary walk.
pub const WALK_BUDGET: usize = 65_536;
/// Newton iteration cap per seed.
pub const NEWTON_STEPS: usize = 50;
/// Winding-one cells are split further until no longer than this, so the
/// center seed starts inside the Newton basin of its zero.
pub const NEWTON_CELL: f64 = 2.0;

#[derive(Debug, Error)]
pub enum ZerosError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("rectangle [{re_min}, {re_max}] x [{im_min}, {im_max}] is not ordered")]
    BadRectangle {
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
    },
    #[error(
        "phase increments still exceed pi/2 after refining the boundary \
         walk to {points} samples"
    )]
    PhaseJumpAmbiguity { points: usize },
    #[error(
        "|P| dips to {min_rel:.3e} of its boundary maximum on the walk; \
         a zero sits too close to the rectangle boundary"
    )]
    BoundaryZero { min_rel: f64 },
    #[error("coefficient vanishes at r = {r}; the zero lattice has no anchor")]
    CoefficientVanishes { r: f64 },
    #[error(
        "modulus equation has no sign change on (0, {y_max}]; \
         index too small for the asymptotic regime"
    )]
    NoSignChange { y_max: f64 },
}

/// Axis-aligned rectangle in the open upper half-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Rectangle {
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
}

impl Rectangle {
    /// Rectangles touching the real axis are lifted to im >= AXIS_LIFT.
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, ZerosError> {
        let lifted = im_min.max(AXIS_LIFT);
        if !(re_min < re_max) || !(lifted < im_max) || !re_min.is_finite() || !im_max.is_finite() {
            return Err(ZerosError::BadRectangle {
                re_min,
                re_max,
                im_min,
                im_max,
            });
        }
        Ok(Rectangle {
            re_min,
            re_max,
            im_min: lifted,
            im_max,
        })
    }

    pub fn re_min(&self) -> f64 {
        self.re_min
    }

    pub fn re_max(&self) -> f64 {
        self.re_max
    }

    pub fn im_min(&self) -> f64 {
        self.im_min
    }

    pub fn im_max(&self) -> f64 {
        self.im_max
    }

    pub fn contains(&self, lambda: C64) -> bool {
        self.re_min <= lambda.re
            && lambda.re <= self.re_max
            && self.im_min <= lambda.im
            && lambda.im <= self.im_max
    }

    fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    /// Outward expansion by the given fractions of each dimension; the
    /// bottom edge never drops below AXIS_LIFT.
    fn expanded(&self, fx: f64, fy: f64) -> Rectangle {
        let dx = fx * self.width();
        let dy = fy * self.height();
        Rectangle {
            re_min: self.re_min - dx,
            re_max: self.re_max + dx,
            im_min: (self.im_min - dy).max(AXIS_LIFT),
            im_max: self.im_max + dy,
        }
    }
}

/// Zeros of P(r, .) inside a rectangle, sorted by modulus.
#[derive(Debug, Clone)]
pub struct ZeroSet {
    zeros: Vec<C64>,
    residuals: Vec<f64>,
    region: Rectangle,
    multiplicity_checked: bool,
}

impl ZeroSet {
    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    /// |P(r, lambda_k)| at each accepted zero.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn region(&self) -> &Rectangle {
        &self.region
    }

    /// True when every zero came out of a winding-one cell, so each is
    /// simple and isolated.
    pub fn multiplicity_checked(&self) -> bool {
        self.multiplicity_checked
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }
}

/// Outcome of [`find_zeros`]: the accepted zeros plus any cells whose
/// winding could not be resolved into a converged Newton zero.
#[derive(Debug, Clone)]
pub struct ZeroFindReport {
    pub set: ZeroSet,
    pub unresolved: Vec<Rectangle>,
}

/// One boundary sample of P on a walk.
#[derive(Clone, Copy)]
struct Sample {
    lambda: C64,
    p: C64,
}

fn eval_p(a: &SampledFunction, r: f64, lambda: C64, cfg: &OdeConfig) -> Result<C64, ZerosError> {
    Ok(propagate_with(a, r, lambda, cfg)?.polys().p)
}

/// Counterclockwise boundary loop of the rectangle, n samples per side.
fn boundary_loop(rect: &Rectangle, n: usize) -> Vec<C64> {
    let mut pts = Vec::with_capacity(4 * n);
    let corners = [
        C64::new(rect.re_min, rect.im_min),
        C64::new(rect.re_max, rect.im_min),
        C64::new(rect.re_max, rect.im_max),
        C64::new(rect.re_min, rect.im_max),
    ];
    for s in 0..4 {
        let (from, to) = (corners[s], corners[(s + 1) % 4]);
        for k in 0..n {
            let t = k as f64 / n as f64;
            pts.push(from + t * (to - from));
        }
    }
    pts
}

struct Walk {
    winding: i64,
    max_abs: f64,
}

/// Winding number of P(r, .) along the rectangle boundary. The walk is
/// refined by midpoint insertion until every consecutive phase increment is
/// below pi/2, which pins the branch of the argument without derivative
/// bounds. A relative |P| dip below BOUNDARY_CLEARANCE aborts: a zero hugs
/// the boundary and the winding is unreliable.
fn boundary_walk(
    a: &SampledFunction,
    r: f64,
    rect: &Rectangle,
    cfg: &OdeConfig,
) -> Result<Walk, ZerosError> {
    let per_side = ((rect.width().max(rect.height()) * (r + 1.0) * 1.3).ceil() as usize)
        .clamp(9, 1024);
    let lambdas = boundary_loop(rect, per_side);
    let evals: Result<Vec<Sample>, ZerosError> = lambdas
        .par_iter()
        .map(|&lambda| Ok(Sample {
            lambda,
            p: eval_p(a, r, lambda, cfg)?,
        }))
        .collect();
    let mut samples = evals?;
    loop {
        let max_abs = samples.iter().map(|s| s.p.norm()).fold(0.0, f64::max);
        let min_abs = samples.iter().map(|s| s.p.norm()).fold(f64::MAX, f64::min);
        let min_rel = min_abs / max_abs;
        if min_rel < BOUNDARY_CLEARANCE {
            return Err(ZerosError::BoundaryZero { min_rel });
        }
        let n = samples.len();
        let mut split_after: Vec<usize> = Vec::new();
        for k in 0..n {
            let delta = (samples[(k + 1) % n].p / samples[k].p).arg();
            if delta.abs() >= PI / 2.0 {
                split_after.push(k);
            }
        }
        if split_after.is_empty() {
            let total: f64 = (0..n)
                .map(|k| (samples[(k + 1) % n].p / samples[k].p).arg())
                .sum();
            let winding = (total / (2.0 * PI)).round();
            if (total - 2.0 * PI * winding).abs() > PI / 2.0 {
                return Err(ZerosError::PhaseJumpAmbiguity { points: n });
            }
            return Ok(Walk {
                winding: winding as i64,
                max_abs,
            });
        }
        if n + split_after.len() > WALK_BUDGET {
            return Err(ZerosError::PhaseJumpAmbiguity { points: n });
        }
        let mids: Result<Vec<Sample>, ZerosError> = split_after
            .par_iter()
            .map(|&k| {
                let lambda = 0.5 * (samples[k].lambda + samples[(k + 1) % n].lambda);
                Ok(Sample {
                    lambda,
                    p: eval_p(a, r, lambda, cfg)?,
                })
            })
            .collect();
        let mids = mids?;
        let mut refined = Vec::with_capacity(n + mids.len());
        let mut next_split = 0usize;
        for (k, s) in samples.iter().enumerate() {
            refined.push(*s);
            if next_split < split_after.len() && split_after[next_split] == k {
                refined.push(mids[next_split]);
                next_split += 1;
            }
        }
        samples = refined;
    }
}

/// Number of zeros of P(r, .) inside the rectangle, by the argument
/// principle. A zero hugging the boundary triggers an outward perturbation
/// of the rectangle before counting is retried.
pub fn count_zeros(a: &SampledFunction, r: f64, rect: &Rectangle) -> Result<usize, ZerosError> {
    count_zeros_with(a, r, rect, &OdeConfig::default())
}

pub fn count_zeros_with(
    a: &SampledFunction,
    r: f64,
    rect: &Rectangle,
    cfg: &OdeConfig,
) -> Result<usize, ZerosError> {
    let mut region = rect.clone();
    let mut last = None;
    for attempt in 0..5 {
        match boundary_walk(a, r, &region, cfg) {
            Ok(walk) => return Ok(walk.winding.max(0) as usize),
            Err(ZerosError::BoundaryZero { min_rel }) => {
                last = Some(ZerosError::BoundaryZero { min_rel });
                let f = 0.007 * (attempt + 1) as f64;
                region = region.expanded(f, f);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("loop ran"))
}

/// Split the longer side at a jittered midpoint; jitter dodges zeros that
/// would otherwise sit on the internal edge.
fn split(rect: &Rectangle, jitter: f64) -> (Rectangle, Rectangle) {
    if rect.width() >= rect.height() {
        let mid = rect.re_min + (0.5 + jitter) * rect.width();
        (
            Rectangle {
                re_max: mid,
                ..rect.clone()
            },
            Rectangle {
                re_min: mid,
                ..rect.clone()
            },
        )
    } else {
        let mid = rect.im_min + (0.5 + jitter) * rect.height();
        (
            Rectangle {
                im_max: mid,
                ..rect.clone()
            },
            Rectangle {
                im_min: mid,
                ..rect.clone()
            },
        )
    }
}

/// Depth-first subdivision into winding-one cells. Cells whose count
/// cannot be split cleanly (boundary zeros on every jittered cut, or
/// multiple zeros inside a cell at the size floor) are reported unresolved.
fn subdivide(
    a: &SampledFunction,
    r: f64,
    rect: &Rectangle,
    count: usize,
    cfg: &OdeConfig,
    cells: &mut Vec<Rectangle>,
    unresolved: &mut Vec<Rectangle>,
) -> Result<(), ZerosError> {
    if count == 0 {
        return Ok(());
    }
    if count == 1 && rect.width().max(rect.height()) <= NEWTON_CELL {
        cells.push(rect.clone());
        return Ok(());
    }
    if rect.width().max(rect.height()) < 1e-7 {
        unresolved.push(rect.clone());
        return Ok(());
    }
    for attempt in 0..4 {
        let jitter = [0.0, 0.06, -0.06, 0.11][attempt];
        let (left, right) = split(rect, jitter);
        let cl = match boundary_walk(a, r, &left, cfg) {
            Ok(w) => w.winding.max(0) as usize,
            Err(ZerosError::BoundaryZero { .. }) => continue,
            Err(e) => return Err(e),
        };
        let cr = match boundary_walk(a, r, &right, cfg) {
            Ok(w) => w.winding.max(0) as usize,
            Err(ZerosError::BoundaryZero { .. }) => continue,
            Err(e) => return Err(e),
        };
        if cl + cr != count {
            continue;
        }
        subdivide(a, r, &left, cl, cfg, cells, unresolved)?;
        subdivide(a, r, &right, cr, cfg, cells, unresolved)?;
        return Ok(());
    }
    unresolved.push(rect.clone());
    Ok(())
}

/// Newton refinement of the single zero inside a winding-one cell, seeded
/// at the center and re-seeded from quadrant centers on stall.
fn newton_in_cell(
    a: &SampledFunction,
    r: f64,
    cell: &Rectangle,
    outer: &Rectangle,
    max_boundary: f64,
    cfg: &OdeConfig,
) -> Result<Option<C64>, ZerosError> {
    let seeds = [
        (0.5, 0.5),
        (0.25, 0.25),
        (0.75, 0.25),
        (0.25, 0.75),
        (0.75, 0.75),
    ];
    for (sx, sy) in seeds {
        let mut lambda = C64::new(
            cell.re_min + sx * cell.width(),
            cell.im_min + sy * cell.height(),
        );
        for _ in 0..NEWTON_STEPS {
            let (x, dx) = propagate_dlambda_with(a, r, lambda, cfg)?;
            let p = x.entries[0][0] + x.entries[0][1];
            let dp = dx[0][0] + dx[0][1];
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            lambda -= step;
            if lambda.im <= 0.0 || !outer.expanded(0.5, 0.5).contains(lambda) {
                break;
            }
            if step.norm() < 1e-13 * (1.0 + lambda.norm()) {
                let p_final = eval_p(a, r, lambda, cfg)?;
                if p_final.norm() < ZERO_RESIDUAL * max_boundary && outer.contains(lambda) {
                    return Ok(Some(lambda));
                }
                break;
            }
        }
    }
    Ok(None)
}

/// Locate all zeros of P(r, .) inside the rectangle: argument-principle
/// count, subdivision into winding-one cells, then parallel Newton runs
/// merged in cell order. Accepted zeros satisfy
/// |P(r, lambda_k)| < ZERO_RESIDUAL * max_boundary |P|.
pub fn find_zeros(
    a: &SampledFunction,
    r: f64,
    rect: &Rectangle,
) -> Result<ZeroFindReport, ZerosError> {
    find_zeros_with(a, r, rect, &OdeConfig::default())
}

pub fn find_zeros_with(
    a: &SampledFunction,
    r: f64,
    rect: &Rectangle,
    cfg: &OdeConfig,
) -> Result<ZeroFindReport, ZerosError> {
    let walk = {
        let mut region = rect.clone();
        let mut out = None;
        for attempt in 0..5 {
            match boundary_walk(a, r, &region, cfg) {
                Ok(w) => {
                    out = Some((w, region));
                    break;
                }
                Err(ZerosError::BoundaryZero { min_rel }) => {
                    if attempt == 4 {
                        return Err(ZerosError::BoundaryZero { min_rel });
                    }
                    let f = 0.007 * (attempt + 1) as f64;
                    region = region.expanded(f, f);
                }
                Err(e) => return Err(e),
            }
        }
        out.expect("loop sets or returns")
    };
    let (top_walk, region) = walk;
    let total = top_walk.winding.max(0) as usize;
    let mut cells = Vec::new();
    let mut unresolved = Vec::new();
    subdivide(a, r, &region, total, cfg, &mut cells, &mut unresolved)?;
    let refined: Result<Vec<Option<C64>>, ZerosError> = cells
        .par_iter()
        .map(|cell| newton_in_cell(a, r, cell, &region, top_walk.max_abs, cfg))
        .collect();
    let refined = refined?;
    let mut zeros: Vec<C64> = Vec::new();
    for (cell, z) in cells.iter().zip(&refined) {
        match z {
            Some(lambda) => {
                let duplicate = zeros
                    .iter()
                    .any(|w| (w - lambda).norm() < 1e-7 * (1.0 + lambda.norm()));
                if duplicate {
                    unresolved.push(cell.clone());
                } else {
                    zeros.push(*lambda);
                }
            }
            None => unresolved.push(cell.clone()),
        }
    }
    zeros.sort_by(|u, v| {
        u.norm()
            .partial_cmp(&v.norm())
            .unwrap()
            .then(u.re.partial_cmp(&v.re).unwrap())
    });
    let residuals: Result<Vec<f64>, ZerosError> = zeros
        .iter()
        .map(|&z| Ok(eval_p(a, r, z, cfg)?.norm()))
        .collect();
    let multiplicity_checked = unresolved.is_empty() && zeros.len() == total;
    Ok(ZeroFindReport {
        set: ZeroSet {
            zeros,
            residuals: residuals?,
            region,
            multiplicity_checked,
        },
        unresolved,
    })
}

/// Large-n asymptote of the zero lattice for smooth A with A(r) != 0:
///
/// ```text
/// x_n = r^{-1} [pi/2 + pi n - Arg A(r)],    n in Z,
/// x_n^2 + y_n^2 = |A(r)|^2 exp(2 r y_n).
/// ```
///
/// The height y_n solves the scalar modulus equation by bisection on a
/// bracket grown from below; the bracket search gives up at y = 50/r.
/// The lattice over-counts by a parity constraint: the imaginary part of
/// the limiting equation forces (-1)^n = sign(x_n), so actual zeros sit on
/// alternating lattice points of each half-axis. Comparators should match
/// a computed zero to its nearest lattice point rather than walk n.
pub fn zero_asymptote(a: &SampledFunction, r: f64, n: i64) -> Result<C64, ZerosError> {
    let a_r = a.eval_linear(r);
    let modulus = a_r.norm();
    if modulus < 1e-14 {
        return Err(ZerosError::CoefficientVanishes { r });
    }
    let x = (PI / 2.0 + PI * n as f64 - a_r.arg()) / r;
    let g = |y: f64| x * x + y * y - modulus * modulus * (2.0 * r * y).exp();
    let y_cap = 50.0 / r;
    let mut lo = 0.0f64;
    let mut hi = 1.0 / r;
    loop {
        if g(lo).signum() != g(hi).signum() {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > y_cap {
            return Err(ZerosError::NoSignChange { y_max: y_cap });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid).signum() == g(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * (1.0 + hi) {
            break;
        }
    }
    // one Newton polish squeezes the residual to evaluation roundoff
    let mut y = 0.5 * (lo + hi);
    let dg = 2.0 * y - 2.0 * r * modulus * modulus * (2.0 * r * y).exp();
    if dg != 0.0 {
        y -= g(y) / dg;
    }
    Ok(C64::new(x, y))
}

/// Fejer-type exclusion certificate at one point.
#[derive(Debug, Clone)]
pub struct FejerReport {
    /// Poisson integral of the measure at lambda.
    pub poisson: f64,
    /// Edge-density allowance for the mass the sampling grid cannot see.
    pub tail_allowance: f64,
    /// exp(-2 Int |A|), a computable lower bound for M_r^{-2}.
    pub bound: f64,
    /// Certified inside the zero-free region.
    pub excluded: bool,
}

/// Integral of |A| over [0, min(r, grid end)].
fn l1_norm_to(a: &SampledFunction, r: f64) -> f64 {
    let grid = a.grid();
    let w = grid.trapezoid_weights();
    let mut total = 0.0;
    for (i, x) in grid.points().enumerate() {
        if x > r {
            break;
        }
        total += w[i] * a.values()[i].norm();
    }
    total
}

/// Zero-free certificate from the continuous Fejer theorem: P(r, .) has no
/// zero where the Poisson integral of the measure stays below M_r^{-2},
/// with M_r <= exp(Int |A|). The sampled Poisson integral underestimates
/// the true one, so the certificate only claims exclusion when the integral
/// plus an edge-density tail allowance stays under the bound; truncation
/// can never manufacture a certificate.
pub fn fejer_exclusion(
    measure: &SpectralMeasure,
    a: &SampledFunction,
    r: f64,
    lambda: C64,
) -> Result<FejerReport, ZerosError> {
    let (x, y) = (lambda.re, lambda.im);
    let density = measure.density();
    let grid = density.grid();
    let w = grid.trapezoid_weights();
    let mut poisson = 0.0;
    for (i, s) in grid.points().enumerate() {
        let d = density.values()[i].re;
        poisson += w[i] * 2.0 * y * d / ((s - x).powi(2) + y * y);
    }
    for &(s, mass) in measure.point_masses() {
        poisson += 2.0 * y * mass / ((s - x).powi(2) + y * y);
    }
    let d_left = density.values()[0].re.max(0.0);
    let d_right = density.values()[density.len() - 1].re.max(0.0);
    let tail_left = 2.0 * (PI / 2.0 + ((grid.start() - x) / y).atan());
    let tail_right = 2.0 * (PI / 2.0 - ((grid.end() - x) / y).atan());
    let tail_allowance = 1.05 * (d_left * tail_left + d_right * tail_right);
    let bound = (-2.0 * l1_norm_to(a, r)).exp();
    Ok(FejerReport {
        poisson,
        tail_allowance,
        bound,
        excluded: poisson + tail_allowance < bound,
    })
}

/// Companion disc exclusion: once z1 is a zero, no other zero lies in
/// |lambda - conj(z1)| < Dist(lambda, supp sigma). The support is read off
/// the sampled density (strictly positive cells) and the point masses.
pub fn fejer_disc_excludes(z1: C64, lambda: C64, measure: &SpectralMeasure) -> bool {
    if lambda.im <= 0.0 {
        return false;
    }
    let density = measure.density();
    let mut dist = f64::INFINITY;
    for (i, s) in density.grid().points().enumerate() {
        if density.values()[i].re > 0.0 {
            dist = dist.min((lambda - C64::new(s, 0.0)).norm());
        }
    }
    for &(s, _) in measure.point_masses() {
        dist = dist.min((lambda - C64::new(s, 0.0)).norm());
    }
    (lambda - z1.conj()).norm() < dist
}

/// CSV rows `k,re,im,residual` for each zero.
pub fn write_zero_set(path: &Path, set: &ZeroSet) -> Result<(), CoreError> {
    use std::fmt::Write as _;
    let mut buf = String::from("k,re,im,residual\n");
    for (k, (z, res)) in set.zeros.iter().zip(&set.residuals).enumerate() {
        writeln!(buf, "{k},{:.16e},{:.16e},{:.3e}", z.re, z.im, res).expect("string write");
    }
    std::fs::write(path, buf).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads zeros back from the CSV produced by [`write_zero_set`]; the region
/// is reconstructed as the bounding box and the multiplicity flag is not
/// persisted.
pub fn read_zero_set(path: &Path) -> Result<ZeroSet, ZerosError> {
    let text = std::fs::read_to_string(path).map_err(|source| CoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut zeros = Vec::new();
    let mut residuals = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        let fail = |reason: &str| CoreError::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            reason: reason.to_string(),
        };
        let mut parts = line.split(',');
        let k: usize = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| fail("bad index"))?;
        if k != zeros.len() {
            return Err(fail("indices must be consecutive from 0").into());
        }
        let re: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| fail("bad re"))?;
        let im: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| fail("bad im"))?;
        let res: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| fail("bad residual"))?;
        zeros.push(C64::new(re, im));
        residuals.push(res);
    }
    let re_min = zeros.iter().map(|z| z.re).fold(f64::MAX, f64::min);
    let re_max = zeros.iter().map(|z| z.re).fold(f64::MIN, f64::max);
    let im_min = zeros.iter().map(|z| z.im).fold(f64::MAX, f64::min);
    let im_max = zeros.iter().map(|z| z.im).fold(f64::MIN, f64::max);
    let region = Rectangle::new(
        re_min - 1.0,
        re_max + 1.0,
        (im_min - 1.0).max(AXIS_LIFT),
        im_max + 1.0,
    )?;
    Ok(ZeroSet {
        zeros,
        residuals,
        region,
        multiplicity_checked: false,
    })
}
