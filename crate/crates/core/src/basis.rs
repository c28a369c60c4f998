//! Dirichlet sine eigen-elements on (0, 1) and the discrete quadratures and
//! norms built on them.
//!
//! The eigenfunctions are `φ_j(y) = √2 sin(jπy)` with eigenvalues
//! `μ_j = j²π²`, indexed from `j = 1`. Grid functions live on the uniform
//! mesh `y_n = n/N`, `n = 0..=N`, and are represented by [`LineFunction`].

use std::f64::consts::{PI, SQRT_2};

use thiserror::Error;

/// Relative tolerance used when deciding whether sampled nodes are uniform.
const UNIFORM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("mode index must be at least 1 (the j = 0 sine mode is identically zero)")]
    ZeroMode,
    #[error("empty sample vector")]
    Empty,
    #[error("need at least {required} intervals, got {actual}")]
    TooFewIntervals { required: usize, actual: usize },
    #[error("nodes are not a uniform mesh of [0, 1] (node {index} = {value})")]
    NonUniform { index: usize, value: f64 },
    #[error("node and value vectors differ in length ({nodes} vs {values})")]
    LengthMismatch { nodes: usize, values: usize },
    #[error("coefficient vectors have different lengths ({left} vs {right})")]
    ShapeMismatch { left: usize, right: usize },
    #[error("Simpson quadrature needs an even number of intervals, got {0}")]
    OddIntervals(usize),
}

/// One Dirichlet eigenpair `(μ_j, φ_j)` of `-d²/dy²` on (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub j: usize,
    pub mu: f64,
}

impl EigenPair {
    /// `φ_j(y) = √2 sin(jπy)`.
    #[inline]
    pub fn phi(&self, y: f64) -> f64 {
        SQRT_2 * (self.j as f64 * PI * y).sin()
    }

    /// `φ_j'(y) = √2 jπ cos(jπy)`.
    #[inline]
    pub fn dphi(&self, y: f64) -> f64 {
        let k = self.j as f64 * PI;
        SQRT_2 * k * (k * y).cos()
    }

    #[inline]
    pub fn sqrt_mu(&self) -> f64 {
        self.j as f64 * PI
    }
}

pub fn eigenpair(j: usize) -> Result<EigenPair, BasisError> {
    if j == 0 {
        return Err(BasisError::ZeroMode);
    }
    Ok(mode(j))
}

/// Infallible constructor for internal loops that already start at `j = 1`.
#[inline]
pub(crate) fn mode(j: usize) -> EigenPair {
    debug_assert!(j >= 1);
    let k = j as f64 * PI;
    EigenPair { j, mu: k * k }
}

/// `μ_j = j²π²`.
#[inline]
pub fn mu(j: usize) -> f64 {
    let k = j as f64 * PI;
    k * k
}

/// Samples of a function on the uniform mesh `y_n = n/N`, `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFunction {
    values: Vec<f64>,
}

impl LineFunction {
    /// Wraps samples taken at `y_n = n / (len - 1)`.
    pub fn from_values(values: Vec<f64>) -> Result<Self, BasisError> {
        match values.len() {
            0 => Err(BasisError::Empty),
            1 => Err(BasisError::TooFewIntervals { required: 1, actual: 0 }),
            _ => Ok(Self { values }),
        }
    }

    /// Builds a line function from explicit node positions, rejecting
    /// anything other than a uniform mesh of `[0, 1]`.
    pub fn from_nodes(nodes: &[f64], values: Vec<f64>) -> Result<Self, BasisError> {
        if nodes.len() != values.len() {
            return Err(BasisError::LengthMismatch { nodes: nodes.len(), values: values.len() });
        }
        let line = Self::from_values(values)?;
        let n = line.n_intervals() as f64;
        for (i, &y) in nodes.iter().enumerate() {
            if (y - i as f64 / n).abs() > UNIFORM_TOL {
                return Err(BasisError::NonUniform { index: i, value: y });
            }
        }
        Ok(line)
    }

    /// Samples `f` at every node of an `n_intervals`-interval mesh.
    pub fn sample(n_intervals: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(n_intervals >= 1, "a line mesh needs at least one interval");
        let h = 1.0 / n_intervals as f64;
        Self { values: (0..=n_intervals).map(|n| f(n as f64 * h)).collect() }
    }

    pub fn zeros(n_intervals: usize) -> Self {
        assert!(n_intervals >= 1, "a line mesh needs at least one interval");
        Self { values: vec![0.0; n_intervals + 1] }
    }

    #[inline]
    pub fn n_intervals(&self) -> usize {
        self.values.len() - 1
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        1.0 / self.n_intervals() as f64
    }

    #[inline]
    pub fn y(&self, n: usize) -> f64 {
        n as f64 / self.n_intervals() as f64
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values at the interior nodes `n = 1..N-1`.
    pub fn interior(&self) -> &[f64] {
        &self.values[1..self.values.len() - 1]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// `a·self + b·other`, pointwise.
    pub fn axpby(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!(self.values.len(), other.values.len(), "line functions on different meshes");
        Self {
            values: self.values.iter().zip(&other.values).map(|(u, v)| a * u + b * v).collect(),
        }
    }

    /// Piecewise-linear interpolation onto a mesh with `n_intervals` intervals.
    pub fn resample(&self, n_intervals: usize) -> Self {
        let src = self.n_intervals() as f64;
        Self::sample(n_intervals, |y| {
            let s = (y * src).clamp(0.0, src);
            let i = (s.floor() as usize).min(self.n_intervals() - 1);
            let t = s - i as f64;
            (1.0 - t) * self.values[i] + t * self.values[i + 1]
        })
    }
}

/// Quadrature rule used for the inner products `⟨u, φ_j⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// `Δy Σ_{n=0}^{N} u_n φ_j(y_n)`.
    #[default]
    Riemann,
    /// Endpoint-halved weights. Because `φ_j` vanishes at both endpoints this
    /// agrees with [`Quadrature::Riemann`] up to rounding.
    Trapezoid,
    /// Composite Simpson rule; requires an even number of intervals.
    Simpson,
}

fn quadrature_weight(quad: Quadrature, n: usize, n_intervals: usize, h: f64) -> f64 {
    match quad {
        Quadrature::Riemann => h,
        Quadrature::Trapezoid => {
            if n == 0 || n == n_intervals {
                0.5 * h
            } else {
                h
            }
        }
        Quadrature::Simpson => {
            if n == 0 || n == n_intervals {
                h / 3.0
            } else if n % 2 == 1 {
                4.0 * h / 3.0
            } else {
                2.0 * h / 3.0
            }
        }
    }
}

/// Discrete approximation of `⟨u, φ_j⟩`.
pub fn sine_coefficient(samples: &LineFunction, j: usize, quad: Quadrature) -> Result<f64, BasisError> {
    let pair = eigenpair(j)?;
    let n_int = samples.n_intervals();
    if quad == Quadrature::Simpson && n_int % 2 == 1 {
        return Err(BasisError::OddIntervals(n_int));
    }
    let h = samples.dy();
    Ok(samples
        .values
        .iter()
        .enumerate()
        .map(|(n, u)| quadrature_weight(quad, n, n_int, h) * u * pair.phi(n as f64 * h))
        .sum())
}

/// Coefficients `⟨u, φ_j⟩` for `j = 1..=j_max`.
pub fn sine_coefficients(samples: &LineFunction, j_max: usize, quad: Quadrature) -> Result<SineCoeffs, BasisError> {
    let coeffs = (1..=j_max)
        .map(|j| sine_coefficient(samples, j, quad))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SineCoeffs::new(coeffs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `sqrt(Δy Σ u_n²)`.
    L2,
    /// L² plus forward-difference derivative energy.
    H1,
    /// Forward-difference derivative energy only.
    H1Seminorm,
}

pub fn discrete_norm(samples: &LineFunction, kind: NormKind) -> Result<f64, BasisError> {
    let n_int = samples.n_intervals();
    if n_int < 2 {
        return Err(BasisError::TooFewIntervals { required: 2, actual: n_int });
    }
    let h = samples.dy();
    let l2_sq = || h * samples.values.iter().map(|v| v * v).sum::<f64>();
    let semi_sq = || {
        samples
            .values
            .windows(2)
            .map(|w| {
                let d = (w[1] - w[0]) / h;
                d * d
            })
            .sum::<f64>()
            * h
    };
    Ok(match kind {
        NormKind::L2 => l2_sq().sqrt(),
        NormKind::H1 => (l2_sq() + semi_sq()).sqrt(),
        NormKind::H1Seminorm => semi_sq().sqrt(),
    })
}

/// Fourier-sine coefficients `c_1, …, c_J` (stored zero-based).
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct SineCoeffs {
    coeffs: Vec<f64>,
}

impl SineCoeffs {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(j_max: usize) -> Self {
        Self { coeffs: vec![0.0; j_max] }
    }

    /// The unit vector `e_j` of length `j_max`.
    pub fn unit(j: usize, j_max: usize) -> Self {
        assert!(j >= 1 && j <= j_max, "unit mode {j} outside 1..={j_max}");
        let mut c = Self::zeros(j_max);
        c.coeffs[j - 1] = 1.0;
        c
    }

    /// Highest retained mode `J`.
    #[inline]
    pub fn j_max(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of mode `j` (1-based); zero beyond `J`.
    #[inline]
    pub fn get(&self, j: usize) -> f64 {
        assert!(j >= 1, "sine modes are 1-based");
        self.coeffs.get(j - 1).copied().unwrap_or(0.0)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Iterates `(j, c_j)` pairs.
    pub fn modes(&self) -> impl Iterator<Item = (EigenPair, f64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, &c)| (mode(i + 1), c))
    }

    /// `Σ c_j φ_j` sampled on an `n_intervals`-interval mesh.
    pub fn reconstruct(&self, n_intervals: usize) -> LineFunction {
        let mut line = LineFunction::zeros(n_intervals);
        let h = 1.0 / n_intervals as f64;
        for (pair, c) in self.modes() {
            if c == 0.0 {
                continue;
            }
            for (n, v) in line.values.iter_mut().enumerate() {
                *v += c * pair.phi(n as f64 * h);
            }
        }
        // exact zeros at the Dirichlet ends
        line.values[0] = 0.0;
        line.values[n_intervals] = 0.0;
        line
    }

    /// `sqrt(Σ c_j²)`, the L² norm of the reconstruction by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `‖(−Δ e^{√−Δ}) u‖² = Σ μ_j² e^{2√μ_j} c_j²`.
    pub fn gevrey_norm_sq(&self) -> f64 {
        self.modes()
            .map(|(p, c)| p.mu * p.mu * (2.0 * p.sqrt_mu()).exp() * c * c)
            .sum()
    }
}

/// `Σ_j μ_j² e^{2(1−x)√μ_j} (c_j + d_j/√μ_j)²` for the coefficients `c` of
/// `u(x, ·)` and `d` of `u_x(x, ·)`.
pub fn gevrey_weighted_norm(u: &SineCoeffs, ux: &SineCoeffs, x: f64) -> Result<f64, BasisError> {
    if u.j_max() != ux.j_max() {
        return Err(BasisError::ShapeMismatch { left: u.j_max(), right: ux.j_max() });
    }
    Ok(u.modes()
        .zip(ux.as_slice())
        .map(|((p, c), d)| {
            let s = c + d / p.sqrt_mu();
            p.mu * p.mu * (2.0 * (1.0 - x) * p.sqrt_mu()).exp() * s * s
        })
        .sum())
}
