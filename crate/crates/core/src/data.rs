//! Synthetic test problems, noisy Cauchy data, and the spectral description
//! of the true homogeneous solution.

use std::io::{self, BufRead, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::basis::{discrete_norm, LineFunction, NormKind, SineCoeffs};
use crate::field::{Field, Grid};
use crate::forward_bvp::{self, BvpError, NonHomogeneousSpec, ScalarFn2};
use crate::params::RegParams;

/// Largest `√μ_j x` whose `cosh` is still comfortably finite.
const GROWTH_LIMIT: f64 = 700.0;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("noise level must be non-negative and finite, got {0}")]
    InvalidNoise(f64),
    #[error("values and derivative have different lengths ({values} vs {derivative})")]
    LengthMismatch { values: usize, derivative: usize },
    #[error("measurement spacing {spacing:.4} leaves fewer than two measurement points on [0, 1]")]
    DegenerateMeasurementGrid { spacing: f64 },
    #[error("measurement grid has {actual} intervals, the parameter policy asks for {expected}")]
    MeasurementGridMismatch { expected: usize, actual: usize },
    #[error("mode {j} grows beyond floating-point range at x = {x}")]
    UnrepresentableGrowth { j: usize, x: f64 },
    #[error("unknown test problem {0:?}")]
    UnknownTest(String),
    #[error("malformed Cauchy data file: {0}")]
    Parse(String),
    #[error(transparent)]
    Bvp(#[from] BvpError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Measured Cauchy datum `u0^ε` and its y-derivative on the solver mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub values: LineFunction,
    pub derivative: LineFunction,
    pub eps: f64,
    pub seed: u64,
}

impl CauchyData {
    /// Noise-free data.
    pub fn clean(values: LineFunction, derivative: LineFunction) -> Self {
        Self { values, derivative, eps: 0.0, seed: 0 }
    }

    /// `sqrt(‖Δvalues‖² + ‖Δderivative‖²)` against a clean datum.
    pub fn h1_distance(&self, clean_values: &LineFunction, clean_derivative: &LineFunction) -> f64 {
        let dv = self.values.axpby(1.0, clean_values, -1.0);
        let dd = self.derivative.axpby(1.0, clean_derivative, -1.0);
        let a = discrete_norm(&dv, NormKind::L2).unwrap_or_else(|_| dv.max_abs());
        let b = discrete_norm(&dd, NormKind::L2).unwrap_or_else(|_| dd.max_abs());
        (a * a + b * b).sqrt()
    }

    /// Two-column `y,value` CSV preceded by `# eps=` and `# seed=` lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# eps={:.16e}", self.eps)?;
        writeln!(out, "# seed={}", self.seed)?;
        writeln!(out, "y,value")?;
        for (n, v) in self.values.values().iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.values.y(n), v)?;
        }
        Ok(())
    }

    /// Reads the format written by [`CauchyData::write_csv`]. The file
    /// carries values only, so the derivative is rebuilt by one-sided
    /// differences.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, DataError> {
        let mut eps = None;
        let mut seed = None;
        let mut nodes = Vec::new();
        let mut vals = Vec::new();
        let mut saw_header = false;
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let (key, value) = meta.trim().split_once('=').ok_or_else(|| DataError::Parse(line.to_string()))?;
                match key.trim() {
                    "eps" => eps = Some(value.trim().parse::<f64>().map_err(|e| DataError::Parse(e.to_string()))?),
                    "seed" => seed = Some(value.trim().parse::<u64>().map_err(|e| DataError::Parse(e.to_string()))?),
                    _ => {}
                }
                continue;
            }
            if !saw_header {
                if line != "y,value" {
                    return Err(DataError::Parse(format!("expected header `y,value`, found `{line}`")));
                }
                saw_header = true;
                continue;
            }
            let (y, v) = line.split_once(',').ok_or_else(|| DataError::Parse(line.to_string()))?;
            nodes.push(y.trim().parse::<f64>().map_err(|e| DataError::Parse(e.to_string()))?);
            vals.push(v.trim().parse::<f64>().map_err(|e| DataError::Parse(e.to_string()))?);
        }
        let values = LineFunction::from_nodes(&nodes, vals).map_err(|e| DataError::Parse(e.to_string()))?;
        let derivative = one_sided_derivative(&values);
        Ok(Self {
            values,
            derivative,
            eps: eps.ok_or_else(|| DataError::Parse("missing eps".into()))?,
            seed: seed.ok_or_else(|| DataError::Parse("missing seed".into()))?,
        })
    }
}

/// Forward differences, with a backward difference at the last node.
fn one_sided_derivative(values: &LineFunction) -> LineFunction {
    let v = values.values();
    let h = values.dy();
    let n = values.n_intervals();
    let d = (0..=n)
        .map(|i| if i < n { (v[i + 1] - v[i]) / h } else { (v[n] - v[n - 1]) / h })
        .collect();
    LineFunction::from_values(d).expect("same length as values")
}

/// Second-order differences: centered inside, one-sided at the ends.
fn centered_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len() - 1;
    (0..=n)
        .map(|i| {
            if n == 1 {
                (values[1] - values[0]) / h
            } else if i == 0 {
                (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
            } else if i == n {
                (3.0 * values[n] - 4.0 * values[n - 1] + values[n - 2]) / (2.0 * h)
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Adds i.i.d. uniform `[−ε, ε]` noise to values and derivative, then
/// shrinks the noise so that the H¹-type distance to the clean datum is at
/// most `ε`.
pub fn make_noisy_data(
    clean_values: &LineFunction,
    clean_derivative: &LineFunction,
    eps: f64,
    seed: u64,
) -> Result<CauchyData, DataError> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(DataError::InvalidNoise(eps));
    }
    let len = clean_values.values().len();
    if clean_derivative.values().len() != len {
        return Err(DataError::LengthMismatch { values: len, derivative: clean_derivative.values().len() });
    }
    if eps == 0.0 {
        return Ok(CauchyData { values: clean_values.clone(), derivative: clean_derivative.clone(), eps, seed });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dv: Vec<f64> = (0..len).map(|_| eps * rng.gen_range(-1.0..=1.0)).collect();
    let mut dd: Vec<f64> = (0..len).map(|_| eps * rng.gen_range(-1.0..=1.0)).collect();

    let h = clean_values.dy();
    let energy = h * (dv.iter().map(|v| v * v).sum::<f64>() + dd.iter().map(|v| v * v).sum::<f64>());
    let dist = energy.sqrt();
    if dist > eps {
        let shrink = eps / dist;
        dv.iter_mut().chain(dd.iter_mut()).for_each(|v| *v *= shrink);
    }

    let values = clean_values.values().iter().zip(&dv).map(|(a, b)| a + b).collect();
    let derivative = clean_derivative.values().iter().zip(&dd).map(|(a, b)| a + b).collect();
    Ok(CauchyData {
        values: LineFunction::from_values(values).expect("nonempty"),
        derivative: LineFunction::from_values(derivative).expect("nonempty"),
        eps,
        seed,
    })
}

/// Spacing `3 / (C₁ log γ)` of the sparse measurement mesh that keeps the
/// amplified derivative noise below `ε ρ_β`.
pub fn measurement_spacing(params: &RegParams) -> f64 {
    3.0 / (params.c1 * params.log_gamma())
}

/// Number of whole measurement intervals that fit in `[0, 1]`.
pub fn measurement_intervals(params: &RegParams) -> usize {
    let s = measurement_spacing(params);
    if s.is_finite() {
        (1.0 / s).floor() as usize
    } else {
        0
    }
}

/// Estimates `∂_y u0^ε` from values alone on the sparse measurement mesh and
/// interpolates it linearly onto a mesh with `solver_intervals` intervals.
pub fn estimate_derivative_from_values(
    values: &LineFunction,
    params: &RegParams,
    solver_intervals: usize,
) -> Result<LineFunction, DataError> {
    let expected = measurement_intervals(params);
    if expected < 1 {
        return Err(DataError::DegenerateMeasurementGrid { spacing: measurement_spacing(params) });
    }
    if values.n_intervals() != expected {
        return Err(DataError::MeasurementGridMismatch { expected, actual: values.n_intervals() });
    }
    Ok(one_sided_derivative(values).resample(solver_intervals))
}

/// A manufactured non-homogeneous problem with known solution `w_true`.
#[derive(Clone)]
pub struct TestProblem {
    pub name: &'static str,
    pub w_true: ScalarFn2,
    pub w_true_y: ScalarFn2,
    pub spec: NonHomogeneousSpec,
}

impl std::fmt::Debug for TestProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestProblem").field("name", &self.name).finish_non_exhaustive()
    }
}

impl TestProblem {
    pub fn truth(&self, grid: Grid) -> Field {
        let w = self.w_true.clone();
        Field::from_fn(grid, move |x, y| w(x, y))
    }

    /// Looks a problem up by name or number (`test1`, `1`, `sinusoidal_humps`, …).
    pub fn by_name(name: &str) -> Result<Self, DataError> {
        let key = name.trim().to_ascii_lowercase();
        let idx = match key.as_str() {
            "1" | "test1" | "sinusoidal_humps" => 0,
            "2" | "test2" | "box_protrusion" => 1,
            _ => return Err(DataError::UnknownTest(name.to_string())),
        };
        Ok(builtin_tests().swap_remove(idx))
    }
}

/// `sin(6x) sin(6y)`.
fn sinusoidal_humps() -> TestProblem {
    let w = |x: f64, y: f64| (6.0 * x).sin() * (6.0 * y).sin();
    TestProblem {
        name: "test1",
        w_true: Arc::new(w),
        w_true_y: Arc::new(|x: f64, y: f64| 6.0 * (6.0 * x).sin() * (6.0 * y).cos()),
        spec: NonHomogeneousSpec::new(
            move |x, y| -72.0 * w(x, y),
            |_| 0.0,
            |x| (6.0 * x).sin() * 6f64.sin(),
            |_| 0.0,
            |y| 6.0 * (6.0 * y).sin(),
        ),
    }
}

/// `1 / (0.001 + (x − ½)⁴ + (y − ½)⁴)`.
fn box_protrusion() -> TestProblem {
    let d = |x: f64, y: f64| 0.001 + (x - 0.5).powi(4) + (y - 0.5).powi(4);
    let w = move |x: f64, y: f64| 1.0 / d(x, y);
    // ∂_a (1/D) = −4a³/D², ∂²_a (1/D) = −12a²/D² + 32a⁶/D³
    let second = move |a: f64, dd: f64| -12.0 * a * a / (dd * dd) + 32.0 * a.powi(6) / (dd * dd * dd);
    TestProblem {
        name: "test2",
        w_true: Arc::new(w),
        w_true_y: Arc::new(move |x: f64, y: f64| -4.0 * (y - 0.5).powi(3) / d(x, y).powi(2)),
        spec: NonHomogeneousSpec::new(
            move |x, y| {
                let dd = d(x, y);
                second(x - 0.5, dd) + second(y - 0.5, dd)
            },
            move |x| w(x, 0.0),
            move |x| w(x, 1.0),
            move |y| w(0.0, y),
            move |y| -4.0 * (-0.5f64).powi(3) / d(0.0, y).powi(2),
        ),
    }
}

pub fn builtin_tests() -> Vec<TestProblem> {
    vec![sinusoidal_humps(), box_protrusion()]
}

/// Clean homogeneous Cauchy datum for a test problem.
#[derive(Debug, Clone)]
pub struct CleanDatum {
    pub values: LineFunction,
    pub derivative: LineFunction,
    pub aux: Field,
}

/// Solves the auxiliary problem and returns `u0 = w0 − ũ(0, ·)` with its
/// derivative `∂_y w0 − ∂_y ũ(0, ·)`.
pub fn clean_datum(problem: &TestProblem, grid: Grid, refine: usize, tol: f64) -> Result<CleanDatum, DataError> {
    let (values, aux) = forward_bvp::decompose_refined(&problem.spec, grid, refine, tol)?;
    let daux = centered_derivative(aux.line(0), grid.dy());
    let wy = problem.w_true_y.clone();
    let derivative = (0..=grid.n).map(|n| wy(0.0, grid.y(n)) - daux[n]).collect();
    Ok(CleanDatum { values, derivative: LineFunction::from_values(derivative).expect("nonempty"), aux })
}

/// Coefficients of `u(x, ·)` and `u_x(x, ·)` for the exact harmonic solution
/// with `u(0, ·) = u0`, `u_x(0, ·) = 0`.
pub fn spectral_true_coeffs(u0: &SineCoeffs, x: f64) -> Result<(SineCoeffs, SineCoeffs), DataError> {
    let mut c = Vec::with_capacity(u0.j_max());
    let mut d = Vec::with_capacity(u0.j_max());
    for (p, a) in u0.modes() {
        let s = p.sqrt_mu() * x;
        if s.abs() > GROWTH_LIMIT {
            return Err(DataError::UnrepresentableGrowth { j: p.j, x });
        }
        c.push(s.cosh() * a);
        d.push(p.sqrt_mu() * s.sinh() * a);
    }
    Ok((SineCoeffs::new(c), SineCoeffs::new(d)))
}

/// Both sides of the per-mode identity
/// `μ_j e^{(1−x)√μ_j} (c_j(x) + d_j(x)/√μ_j) = μ_j c_j(1) + √μ_j d_j(1)`.
pub fn gevrey_identity_sides(u0: &SineCoeffs, x: f64) -> Result<Vec<(f64, f64)>, DataError> {
    let (cx, dx) = spectral_true_coeffs(u0, x)?;
    let (c1, d1) = spectral_true_coeffs(u0, 1.0)?;
    Ok(u0
        .modes()
        .map(|(p, _)| {
            let j = p.j;
            let lhs = p.mu * ((1.0 - x) * p.sqrt_mu()).exp() * (cx.get(j) + dx.get(j) / p.sqrt_mu());
            let rhs = p.mu * c1.get(j) + p.sqrt_mu() * d1.get(j);
            (lhs, rhs)
        })
        .collect())
}
