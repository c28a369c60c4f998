//! Uniform grids over the unit square and node-valued fields on them.

use thiserror::Error;

use crate::basis::LineFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("grid needs at least {required} intervals per direction, got {m}x{n}")]
    TooCoarse { m: usize, n: usize, required: usize },
    #[error("field dimensions differ: {left:?} vs {right:?}")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("{fine:?} is not an integer refinement of {coarse:?}")]
    NotARefinement { fine: (usize, usize), coarse: (usize, usize) },
    #[error("expected {expected} values, got {actual}")]
    WrongLength { expected: usize, actual: usize },
}

/// Uniform mesh `x_m = m/M`, `y_n = n/N` of `[0, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    pub m: usize,
    pub n: usize,
}

impl Grid {
    pub fn new(m: usize, n: usize) -> Result<Self, FieldError> {
        if m < 1 || n < 2 {
            return Err(FieldError::TooCoarse { m, n, required: 2 });
        }
        Ok(Self { m, n })
    }

    /// Square grid with `M = N = intervals`.
    pub fn square(intervals: usize) -> Result<Self, FieldError> {
        Self::new(intervals, intervals)
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        1.0 / self.m as f64
    }

    #[inline]
    pub fn dy(&self) -> f64 {
        1.0 / self.n as f64
    }

    #[inline]
    pub fn x(&self, m: usize) -> f64 {
        m as f64 / self.m as f64
    }

    #[inline]
    pub fn y(&self, n: usize) -> f64 {
        n as f64 / self.n as f64
    }

    /// Mesh ratio `Δx/Δy`.
    #[inline]
    pub fn ratio(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        (self.m + 1) * (self.n + 1)
    }

    pub fn refine(&self, factor: usize) -> Self {
        assert!(factor >= 1, "refinement factor must be positive");
        Self { m: self.m * factor, n: self.n * factor }
    }

    fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }
}

/// Node values `u(x_m, y_n)` stored row-major by x-line.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.node_count()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.node_count());
        for m in 0..=grid.m {
            let x = grid.x(m);
            for n in 0..=grid.n {
                values.push(f(x, grid.y(n)));
            }
        }
        Self { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.node_count() {
            return Err(FieldError::WrongLength { expected: grid.node_count(), actual: values.len() });
        }
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    fn idx(&self, m: usize, n: usize) -> usize {
        debug_assert!(m <= self.grid.m && n <= self.grid.n);
        m * (self.grid.n + 1) + n
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.values[self.idx(m, n)]
    }

    #[inline]
    pub fn set(&mut self, m: usize, n: usize, v: f64) {
        let i = self.idx(m, n);
        self.values[i] = v;
    }

    /// All `N + 1` values on the x-line `m`.
    #[inline]
    pub fn line(&self, m: usize) -> &[f64] {
        let w = self.grid.n + 1;
        &self.values[m * w..(m + 1) * w]
    }

    #[inline]
    pub fn line_mut(&mut self, m: usize) -> &mut [f64] {
        let w = self.grid.n + 1;
        &mut self.values[m * w..(m + 1) * w]
    }

    pub fn line_function(&self, m: usize) -> LineFunction {
        LineFunction::from_values(self.line(m).to_vec()).expect("grid lines have at least two nodes")
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    fn check_same(&self, other: &Self) -> Result<(), FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::DimensionMismatch { left: self.grid.dims(), right: other.grid.dims() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, FieldError> {
        self.check_same(other)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Injects this field onto `coarse` by exact index matching.
    pub fn restrict(&self, coarse: Grid) -> Result<Self, FieldError> {
        let fine = self.grid;
        if coarse.m == 0 || !fine.m.is_multiple_of(coarse.m) || !fine.n.is_multiple_of(coarse.n) || fine.m / coarse.m != fine.n / coarse.n {
            return Err(FieldError::NotARefinement { fine: fine.dims(), coarse: coarse.dims() });
        }
        let (sx, sy) = (fine.m / coarse.m, fine.n / coarse.n);
        let mut out = Field::zeros(coarse);
        for m in 0..=coarse.m {
            for n in 0..=coarse.n {
                out.set(m, n, self.get(m * sx, n * sy));
            }
        }
        Ok(out)
    }
}
