//! Well-posed auxiliary boundary-value problem used to strip the source
//! term and the side data from a non-homogeneous Cauchy problem.
//!
//! Given `w_xx + w_yy = f` with `w(x,0) = g0(x)`, `w(x,1) = g1(x)` and Cauchy
//! data `w(0,y) = w0(y)`, `w_x(0,y) = w1(y)`, the auxiliary field `ũ` solves
//!
//! ```text
//! ũ_xx + ũ_yy = f              in (0,1)²
//! ũ(x,0) = g0(x), ũ(x,1) = g1(x)
//! ũ_x(0,y) = w1(y)
//! ũ(1,y) = (1 − y) g0(1) + y g1(1)
//! ```
//!
//! and `u = w − ũ` then solves the homogeneous Cauchy problem with
//! `u(0,·) = w0 − ũ(0,·)` and `u_x(0,·) = 0`.
//!
//! The discretization is the 5-point Laplacian with the Neumann side closed
//! by a ghost node. The linear system is solved directly: a discrete sine
//! transform in `y` decouples it into one tridiagonal system in `x` per mode.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::basis::LineFunction;
use crate::field::{Field, FieldError, Grid};

pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_REFINEMENT_STEPS: usize = 3;

pub type ScalarFn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ScalarFn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BvpError {
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("solve did not reach backward error {tol:e} (got {backward_error:e})")]
    NotConverged { backward_error: f64, tol: f64 },
    #[error("refinement factor must be positive")]
    InvalidRefinement,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Data of the non-homogeneous Cauchy problem.
#[derive(Clone)]
pub struct NonHomogeneousSpec {
    pub f: ScalarFn2,
    pub g0: ScalarFn1,
    pub g1: ScalarFn1,
    pub w0: ScalarFn1,
    pub w1: ScalarFn1,
}

impl fmt::Debug for NonHomogeneousSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonHomogeneousSpec").finish_non_exhaustive()
    }
}

impl NonHomogeneousSpec {
    pub fn new(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        g0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        w0: impl Fn(f64) -> f64 + Send + Sync + 'static,
        w1: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { f: Arc::new(f), g0: Arc::new(g0), g1: Arc::new(g1), w0: Arc::new(w0), w1: Arc::new(w1) }
    }

    /// Linear Dirichlet closure `(1 − y) g0(1) + y g1(1)` at `x = 1`.
    pub fn right_closure(&self, y: f64) -> f64 {
        (1.0 - y) * (self.g0)(1.0) + y * (self.g1)(1.0)
    }

    pub fn auxiliary_problem(&self) -> MixedBvp {
        let (a, b) = ((self.g0)(1.0), (self.g1)(1.0));
        MixedBvp {
            f: self.f.clone(),
            bottom: self.g0.clone(),
            top: self.g1.clone(),
            flux_left: self.w1.clone(),
            right: Arc::new(move |y| (1.0 - y) * a + y * b),
        }
    }
}

/// Poisson problem on the unit square with Dirichlet data on `y = 0`,
/// `y = 1`, `x = 1` and Neumann data `u_x(0, y)` on `x = 0`.
#[derive(Clone)]
pub struct MixedBvp {
    pub f: ScalarFn2,
    pub bottom: ScalarFn1,
    pub top: ScalarFn1,
    pub flux_left: ScalarFn1,
    pub right: ScalarFn1,
}

impl fmt::Debug for MixedBvp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MixedBvp").finish_non_exhaustive()
    }
}

impl MixedBvp {
    pub fn new(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        bottom: impl Fn(f64) -> f64 + Send + Sync + 'static,
        top: impl Fn(f64) -> f64 + Send + Sync + 'static,
        flux_left: impl Fn(f64) -> f64 + Send + Sync + 'static,
        right: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            bottom: Arc::new(bottom),
            top: Arc::new(top),
            flux_left: Arc::new(flux_left),
            right: Arc::new(right),
        }
    }
}

/// Sine-transform / tridiagonal solver for the interior unknowns
/// `m = 0..M-1`, `n = 1..N-1` with homogeneous boundary values.
struct SpectralSolver {
    grid: Grid,
    /// `sin(j n π / N)` for `j, n = 1..N-1`, row-major in `j`.
    sines: Vec<f64>,
    /// Eigenvalues of the Dirichlet second difference in `y`.
    lambda: Vec<f64>,
}

impl SpectralSolver {
    fn new(grid: Grid) -> Self {
        let k = grid.n - 1;
        let mut sines = Vec::with_capacity(k * k);
        for j in 1..grid.n {
            for n in 1..grid.n {
                sines.push(((j * n) as f64 * PI / grid.n as f64).sin());
            }
        }
        let dy = grid.dy();
        let lambda = (1..grid.n)
            .map(|j| {
                let s = (j as f64 * PI / (2.0 * grid.n as f64)).sin();
                -4.0 * s * s / (dy * dy)
            })
            .collect();
        Self { grid, sines, lambda }
    }

    /// Solves `A u = rhs` where `rhs` is indexed `[m * (N-1) + (n-1)]`.
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (mm, k) = (self.grid.m, self.grid.n - 1);
        let scale = 2.0 / self.grid.n as f64;

        // forward transform along y, one x-row at a time
        let mut hat = vec![0.0; mm * k];
        for m in 0..mm {
            let row = &rhs[m * k..(m + 1) * k];
            for j in 0..k {
                let s = &self.sines[j * k..(j + 1) * k];
                hat[m * k + j] = scale * row.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
            }
        }

        let inv_dx2 = 1.0 / (self.grid.dx() * self.grid.dx());
        let mut col = vec![0.0; mm];
        let mut work = vec![0.0; mm];
        for j in 0..k {
            for m in 0..mm {
                col[m] = hat[m * k + j];
            }
            thomas_mixed(mm, -2.0 * inv_dx2 + self.lambda[j], inv_dx2, &mut col, &mut work);
            for m in 0..mm {
                hat[m * k + j] = col[m];
            }
        }

        // inverse transform
        let mut out = vec![0.0; mm * k];
        for m in 0..mm {
            let coeffs = &hat[m * k..(m + 1) * k];
            for n in 0..k {
                let mut acc = 0.0;
                for (j, c) in coeffs.iter().enumerate() {
                    acc += c * self.sines[j * k + n];
                }
                out[m * k + n] = acc;
            }
        }
        out
    }
}

/// Tridiagonal solve for rows `0..len` with constant diagonal `d` and
/// off-diagonal `o`, except the first row whose super-diagonal is `2o`
/// (ghost-node Neumann row). Overwrites `rhs` with the solution.
fn thomas_mixed(len: usize, d: f64, o: f64, rhs: &mut [f64], c_prime: &mut [f64]) {
    let sup = |i: usize| if i == 0 { 2.0 * o } else { o };
    let mut denom = d;
    c_prime[0] = if len > 1 { sup(0) / denom } else { 0.0 };
    rhs[0] /= denom;
    for i in 1..len {
        denom = d - o * c_prime[i - 1];
        c_prime[i] = if i + 1 < len { sup(i) / denom } else { 0.0 };
        rhs[i] = (rhs[i] - o * rhs[i - 1]) / denom;
    }
    for i in (0..len.saturating_sub(1)).rev() {
        rhs[i] -= c_prime[i] * rhs[i + 1];
    }
}

/// Discrete right-hand side on the unknowns, with all boundary data folded in.
fn assemble_rhs(problem: &MixedBvp, boundary: &Field) -> Vec<f64> {
    let grid = boundary.grid();
    let (mm, nn, k) = (grid.m, grid.n, grid.n - 1);
    let (dx, dy) = (grid.dx(), grid.dy());
    let (inv_dx2, inv_dy2) = (1.0 / (dx * dx), 1.0 / (dy * dy));
    let mut rhs = vec![0.0; mm * k];
    for m in 0..mm {
        let x = grid.x(m);
        for n in 1..nn {
            let y = grid.y(n);
            let mut b = (problem.f)(x, y);
            if n == 1 {
                b -= boundary.get(m, 0) * inv_dy2;
            }
            if n == nn - 1 {
                b -= boundary.get(m, nn) * inv_dy2;
            }
            if m == 0 {
                b += 2.0 * (problem.flux_left)(y) / dx;
            }
            if m == mm - 1 {
                let coupling = if mm == 1 { 2.0 } else { 1.0 };
                b -= coupling * boundary.get(mm, n) * inv_dx2;
            }
            rhs[m * k + (n - 1)] = b;
        }
    }
    rhs
}

/// Residual `A u − b` of the discrete system at every unknown, together with
/// the backward-error scale `‖A‖∞ ‖u‖∞ + ‖b‖∞`.
fn residual(problem: &MixedBvp, u: &Field) -> (Vec<f64>, f64) {
    let grid = u.grid();
    let (mm, nn, k) = (grid.m, grid.n, grid.n - 1);
    let (dx, dy) = (grid.dx(), grid.dy());
    let (inv_dx2, inv_dy2) = (1.0 / (dx * dx), 1.0 / (dy * dy));
    let mut r = vec![0.0; mm * k];
    let mut b_max = 0.0_f64;
    for m in 0..mm {
        let x = grid.x(m);
        for n in 1..nn {
            let y = grid.y(n);
            let c = u.get(m, n);
            let uyy = (u.get(m, n + 1) - 2.0 * c + u.get(m, n - 1)) * inv_dy2;
            let (uxx, b) = if m == 0 {
                let g = 2.0 * (problem.flux_left)(y) / dx;
                ((2.0 * u.get(1, n) - 2.0 * c) * inv_dx2, (problem.f)(x, y) + g)
            } else {
                ((u.get(m + 1, n) - 2.0 * c + u.get(m - 1, n)) * inv_dx2, (problem.f)(x, y))
            };
            b_max = b_max.max(b.abs());
            r[m * k + (n - 1)] = uxx + uyy - b;
        }
    }
    let a_norm = 4.0 * (inv_dx2 + inv_dy2);
    (r, a_norm * u.max_abs() + b_max)
}

/// Solves a [`MixedBvp`] to normwise backward error `tol`.
pub fn solve_mixed(problem: &MixedBvp, grid: Grid, tol: f64) -> Result<Field, BvpError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(BvpError::InvalidTolerance(tol));
    }
    let (mm, nn, k) = (grid.m, grid.n, grid.n - 1);

    let mut u = Field::zeros(grid);
    for m in 0..=mm {
        let x = grid.x(m);
        u.set(m, 0, (problem.bottom)(x));
        u.set(m, nn, (problem.top)(x));
    }
    for n in 1..nn {
        u.set(mm, n, (problem.right)(grid.y(n)));
    }

    let solver = SpectralSolver::new(grid);
    let interior = solver.solve(&assemble_rhs(problem, &u));
    write_interior(&mut u, &interior, k);

    let mut steps = 0;
    loop {
        let (r, scale) = residual(problem, &u);
        let r_max = r.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let backward_error = if scale == 0.0 { 0.0 } else { r_max / scale };
        if backward_error <= tol {
            return Ok(u);
        }
        if steps == MAX_REFINEMENT_STEPS {
            return Err(BvpError::NotConverged { backward_error, tol });
        }
        let correction = solver.solve(&r);
        for m in 0..mm {
            for n in 1..nn {
                let v = u.get(m, n) - correction[m * k + (n - 1)];
                u.set(m, n, v);
            }
        }
        steps += 1;
    }
}

fn write_interior(u: &mut Field, interior: &[f64], k: usize) {
    let grid = u.grid();
    for m in 0..grid.m {
        let line = u.line_mut(m);
        line[1..=k].copy_from_slice(&interior[m * k..(m + 1) * k]);
    }
}

/// Solves the auxiliary problem `ũ` on `grid`.
pub fn solve_auxiliary_bvp(spec: &NonHomogeneousSpec, grid: Grid, tol: f64) -> Result<Field, BvpError> {
    solve_mixed(&spec.auxiliary_problem(), grid, tol)
}

/// Splits the problem into the clean homogeneous Cauchy datum
/// `u0 = w0 − ũ(0, ·)` and the auxiliary field `ũ`.
pub fn decompose(spec: &NonHomogeneousSpec, grid: Grid, tol: f64) -> Result<(LineFunction, Field), BvpError> {
    decompose_refined(spec, grid, 1, tol)
}

/// As [`decompose`], with the auxiliary problem solved on `grid.refine(refine)`
/// and injected back onto `grid`.
pub fn decompose_refined(
    spec: &NonHomogeneousSpec,
    grid: Grid,
    refine: usize,
    tol: f64,
) -> Result<(LineFunction, Field), BvpError> {
    if refine == 0 {
        return Err(BvpError::InvalidRefinement);
    }
    let fine = solve_auxiliary_bvp(spec, grid.refine(refine), tol)?;
    let aux = if refine == 1 { fine } else { fine.restrict(grid)? };
    let line = aux.line(0);
    let u0 = LineFunction::sample(grid.n, |y| (spec.w0)(y))
        .values()
        .iter()
        .zip(line)
        .map(|(w, a)| w - a)
        .collect();
    let mut u0 = LineFunction::from_values(u0).expect("grid has at least two y nodes");
    // both ends are w0 − g0(0) and w0 − g1(0), exactly zero for consistent data
    let n = u0.n_intervals();
    for i in [0, n] {
        if u0.values()[i].abs() < 1e-12 * (1.0 + line[i].abs()) {
            u0.values_mut()[i] = 0.0;
        }
    }
    Ok((u0, aux))
}
