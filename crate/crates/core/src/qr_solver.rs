//! Explicit finite-difference march for the linearized regularized problem
//!
//! ```text
//! k ≥ 1:  ∂²_x u^k − ∂²_y u^k = −P u^{k−1},   u^0 = 0,
//!         u^k(x,0) = u^k(x,1) = 0,  u^k(0,·) = u0^ε,  ∂_x u^k(0,·) = 0,
//! ```
//!
//! treating `x` as time. Each iterate marches
//! `U_{m+1} = K U_m − U_{m−1} + F(U_m^{k−1})` over the interior nodes, with
//! `K = tridiag(r², 2 − 2r², r²)` and `U_0 = U_1 = u0^ε`.

use thiserror::Error;

use crate::basis::{self, discrete_norm, LineFunction, NormKind, Quadrature, SineCoeffs};
use crate::data::CauchyData;
use crate::field::{Field, Grid};
use crate::params::RegParams;

/// Max-norm above which a march is declared unstable.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// Mesh-ratio slack accepted on top of the stability bound `r ≤ 1`.
const RATIO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QrError {
    #[error("mesh ratio r = {0} violates r <= 1")]
    UnstableRatio(f64),
    #[error("vector length {actual} does not match {expected} interior nodes")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("grid dx = {grid_dx} is coarser than the parameter policy allows ({params_dx})")]
    GridTooCoarse { grid_dx: f64, params_dx: f64 },
    #[error("data has {data} y intervals but the grid has {grid}")]
    DataGridMismatch { data: usize, grid: usize },
    #[error("iterate {k} blew up at x-line {m} (max |u| = {max_abs:e})")]
    Unstable { k: usize, m: usize, max_abs: f64 },
}

/// How the first two x-lines are initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialLines {
    /// `U_0 = U_1 = u0^ε`: zero x-flux to first order.
    #[default]
    Repeated,
    /// Ghost-line start `U_1 = (K U_0 + F_0)/2`, second order.
    SecondOrder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub start: InitialLines,
    pub quadrature: Quadrature,
    pub blowup_threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { start: InitialLines::Repeated, quadrature: Quadrature::Riemann, blowup_threshold: BLOWUP_THRESHOLD }
    }
}

/// The matrix `K` of the explicit march.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TridiagStencil {
    pub r: f64,
    pub diag: f64,
    pub off: f64,
}

impl TridiagStencil {
    pub fn new(r: f64) -> Result<Self, QrError> {
        if !(r > 0.0 && r <= 1.0 + RATIO_TOL) {
            return Err(QrError::UnstableRatio(r));
        }
        let r2 = r * r;
        Ok(Self { r, diag: 2.0 - 2.0 * r2, off: r2 })
    }

    pub fn for_grid(grid: Grid) -> Result<Self, QrError> {
        Self::new(grid.ratio())
    }

    /// `out = K u` with zero values beyond both ends.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let len = u.len();
        debug_assert_eq!(out.len(), len);
        for i in 0..len {
            let left = if i > 0 { u[i - 1] } else { 0.0 };
            let right = if i + 1 < len { u[i + 1] } else { 0.0 };
            out[i] = self.diag * u[i] + self.off * (left + right);
        }
    }
}

/// Two consecutive interior columns of one iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct MarchState {
    pub prev: Vec<f64>,
    pub curr: Vec<f64>,
    /// Index of `curr`.
    pub m: usize,
    /// Linearization iterate being marched.
    pub k: usize,
}

impl MarchState {
    /// The state at `m = 1` with `U_0 = U_1 = data`.
    pub fn start(data_interior: &[f64], k: usize) -> Self {
        Self { prev: data_interior.to_vec(), curr: data_interior.to_vec(), m: 1, k }
    }
}

/// `U_{m+1} = K U_m − U_{m−1} + source`.
pub fn march_step(state: &MarchState, stencil: &TridiagStencil, source: &[f64]) -> Result<Vec<f64>, QrError> {
    let len = state.curr.len();
    for actual in [state.prev.len(), source.len()] {
        if actual != len {
            return Err(QrError::DimensionMismatch { expected: len, actual });
        }
    }
    let mut next = vec![0.0; len];
    stencil.apply(&state.curr, &mut next);
    for ((v, p), s) in next.iter_mut().zip(&state.prev).zip(source) {
        *v += s - p;
    }
    Ok(next)
}

/// Precomputed `φ_j(y_n)` for the retained modes.
struct SourceAssembler {
    j_max: usize,
    scale: f64,
    quadrature: Quadrature,
    phi: Vec<Vec<f64>>,
}

impl SourceAssembler {
    fn new(j_max: usize, dx: f64, n_intervals: usize, quadrature: Quadrature) -> Self {
        let h = 1.0 / n_intervals as f64;
        let phi = (1..=j_max)
            .map(|j| {
                let p = basis::mode(j);
                (0..=n_intervals).map(|n| p.phi(n as f64 * h)).collect()
            })
            .collect();
        Self { j_max, scale: 2.0 * dx * dx, quadrature, phi }
    }

    /// Interior entries `2Δx² Σ_j μ_j ⟨u, φ_j⟩ φ_j(y_n)`, `n = 1..N-1`.
    fn assemble(&self, line: &[f64]) -> Vec<f64> {
        let n_int = line.len() - 1;
        let mut out = vec![0.0; n_int - 1];
        if self.j_max == 0 {
            return out;
        }
        let h = 1.0 / n_int as f64;
        for (jm1, phi) in self.phi.iter().enumerate() {
            let j = jm1 + 1;
            let c: f64 = match self.quadrature {
                Quadrature::Riemann => h * line.iter().zip(phi).map(|(u, p)| u * p).sum::<f64>(),
                quad => {
                    let lf = LineFunction::from_values(line.to_vec()).expect("line has two nodes");
                    basis::sine_coefficient(&lf, j, quad).unwrap_or(0.0)
                }
            };
            let w = self.scale * basis::mu(j) * c;
            for (o, p) in out.iter_mut().zip(&phi[1..n_int]) {
                *o += w * p;
            }
        }
        out
    }
}

/// Source vector `F(U_m^{k−1})` added to the right-hand side of the march.
pub fn assemble_source(params: &RegParams, dx: f64, line: &LineFunction) -> Vec<f64> {
    SourceAssembler::new(params.j_max, dx, line.n_intervals(), Quadrature::Riemann).assemble(line.values())
}

/// Runs all linearization iterates and returns the last one.
pub fn linearized_solve(params: &RegParams, data: &CauchyData, grid: Grid) -> Result<Field, QrError> {
    let mut all = linearized_iterates(params, &data.values, grid, &SolverOptions::default())?;
    Ok(all.pop().expect("at least one iterate"))
}

/// All iterates `u^0 = 0, u^1, …, u^{k_iters}` for the measured values `u0`.
pub fn linearized_iterates(
    params: &RegParams,
    u0: &LineFunction,
    grid: Grid,
    options: &SolverOptions,
) -> Result<Vec<Field>, QrError> {
    if u0.n_intervals() != grid.n {
        return Err(QrError::DataGridMismatch { data: u0.n_intervals(), grid: grid.n });
    }
    if grid.dx() > params.dx * (1.0 + 1e-9) {
        return Err(QrError::GridTooCoarse { grid_dx: grid.dx(), params_dx: params.dx });
    }
    let stencil = TridiagStencil::for_grid(grid)?;
    let assembler = SourceAssembler::new(params.j_max, grid.dx(), grid.n, options.quadrature);
    let interior = u0.interior();

    let mut iterates = Vec::with_capacity(params.k_iters + 1);
    iterates.push(Field::zeros(grid));
    for k in 1..=params.k_iters {
        let lagged = &iterates[k - 1];
        let mut u = Field::zeros(grid);
        u.line_mut(0)[1..grid.n].copy_from_slice(interior);

        let mut state = MarchState::start(interior, k);
        if options.start == InitialLines::SecondOrder {
            let f0 = assembler.assemble(lagged.line(0));
            let mut ku = vec![0.0; interior.len()];
            stencil.apply(interior, &mut ku);
            state.curr = ku.iter().zip(&f0).map(|(a, b)| 0.5 * (a + b)).collect();
        }
        if grid.m >= 1 {
            u.line_mut(1)[1..grid.n].copy_from_slice(&state.curr);
        }

        for m in 1..grid.m {
            let source = assembler.assemble(lagged.line(m));
            let next = march_step(&state, &stencil, &source)?;
            let max_abs = next.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if max_abs.is_nan() || max_abs > options.blowup_threshold {
                return Err(QrError::Unstable { k, m: m + 1, max_abs });
            }
            u.line_mut(m + 1)[1..grid.n].copy_from_slice(&next);
            state = MarchState { prev: std::mem::take(&mut state.curr), curr: next, m: m + 1, k };
        }
        iterates.push(u);
    }
    Ok(iterates)
}

/// Exact per-mode solution of the regularized (non-linearized) problem:
/// kept modes grow like `cosh(√μ_j x)`, the rest oscillate like `cos(√μ_j x)`.
pub fn mode_oracle(params: &RegParams, u0: &SineCoeffs, x: f64) -> SineCoeffs {
    SineCoeffs::new(
        u0.modes()
            .map(|(p, c)| {
                let s = p.sqrt_mu() * x;
                if p.j <= params.j_max {
                    s.cosh() * c
                } else {
                    s.cos() * c
                }
            })
            .collect(),
    )
}

/// `sup_{x_m ≤ x̄} ( ‖v_m‖²_{H¹} + ‖(v_m − v_{m−1})/Δx‖² )^{1/2}`, the
/// discrete analogue of the linearization's contraction norm.
pub fn window_norm(v: &Field, x_bar: f64) -> f64 {
    let grid = v.grid();
    let dx = grid.dx();
    let last = ((x_bar / dx) * (1.0 + 1e-12)).floor().min(grid.m as f64) as usize;
    let mut sup = 0.0_f64;
    for m in 0..=last {
        let line = v.line_function(m);
        let h1 = discrete_norm(&line, NormKind::H1).unwrap_or(0.0);
        let dxv = if m == 0 {
            0.0
        } else {
            let d = LineFunction::from_values(v.line(m).iter().zip(v.line(m - 1)).map(|(a, b)| (a - b) / dx).collect())
                .expect("line has two nodes");
            discrete_norm(&d, NormKind::L2).unwrap_or(0.0)
        };
        sup = sup.max((h1 * h1 + dxv * dxv).sqrt());
    }
    sup
}

/// Window norms of `u^{k+1} − u^k` for consecutive iterates.
pub fn iterate_differences(iterates: &[Field], x_bar: f64) -> Vec<f64> {
    iterates
        .windows(2)
        .map(|w| window_norm(&w[1].sub(&w[0]).expect("iterates share a grid"), x_bar))
        .collect()
}
