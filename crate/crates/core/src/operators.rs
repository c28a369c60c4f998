//! Truncated-Fourier perturbing and stabilized operators.
//!
//! With cutoff `J` (the largest `j` with `μ_j ≤ log²(γ)/16`):
//!
//! ```text
//! P u = −2 Σ_{j ≤ J} μ_j ⟨u, φ_j⟩ φ_j        (stabilized)
//! Q u =  2 Σ_{j > J} μ_j ⟨u, φ_j⟩ φ_j        (perturbing)
//! ```
//!
//! so that `P − Q = 2 ∂²_y`. `P` acts grid-to-grid. `Q` only touches modes
//! the ε-coupled mesh cannot resolve, so it is exposed on coefficients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::basis::{self, discrete_norm, BasisError, LineFunction, NormKind, Quadrature, SineCoeffs};
use crate::params::RegParams;

/// Slack allowed on an estimate ratio before it counts as a violation.
pub const ESTIMATE_TOL: f64 = 1e-6;

/// Fraction of coefficient energy above `N/4` tolerated in a trial function.
const ALIAS_ENERGY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("operator is {actual:?}, expected {expected:?}")]
    WrongKind { expected: OperatorKind, actual: OperatorKind },
    #[error("trial function {index} is not resolved on its mesh ({high_fraction:.3e} of its energy above N/4)")]
    Aliased { index: usize, high_fraction: f64 },
    #[error("trial function {index} does not vanish at y = 0, 1")]
    NotDirichlet { index: usize },
    #[error(transparent)]
    Basis(#[from] BasisError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Perturbing,
    Stabilized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOperator {
    pub kind: OperatorKind,
    /// Stabilized acts on `j ≤ j_max`, perturbing on `j > j_max`.
    pub j_max: usize,
    pub quadrature: Quadrature,
}

impl SpectralOperator {
    pub fn stabilized(params: &RegParams) -> Self {
        Self::with_cutoff(OperatorKind::Stabilized, params.j_max)
    }

    pub fn perturbing(params: &RegParams) -> Self {
        Self::with_cutoff(OperatorKind::Perturbing, params.j_max)
    }

    pub fn with_cutoff(kind: OperatorKind, j_max: usize) -> Self {
        Self { kind, j_max, quadrature: Quadrature::Riemann }
    }

    pub fn with_quadrature(mut self, quadrature: Quadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    fn expect(&self, expected: OperatorKind) -> Result<(), OperatorError> {
        if self.kind != expected {
            return Err(OperatorError::WrongKind { expected, actual: self.kind });
        }
        Ok(())
    }

    /// `P u` on the mesh of `u`; the zero function when `j_max = 0`.
    pub fn apply_stabilized(&self, u: &LineFunction) -> Result<LineFunction, OperatorError> {
        self.expect(OperatorKind::Stabilized)?;
        let mut coeffs = basis::sine_coefficients(u, self.j_max, self.quadrature)?;
        for (c, j) in coeffs.as_mut_slice().iter_mut().zip(1..) {
            *c *= -2.0 * basis::mu(j);
        }
        Ok(coeffs.reconstruct(u.n_intervals()))
    }

    /// `Q` on coefficients: modes `j ≤ j_max` are annihilated, the rest
    /// scaled by `2μ_j`.
    pub fn apply_perturbing(&self, coeffs: &SineCoeffs) -> Result<SineCoeffs, OperatorError> {
        self.expect(OperatorKind::Perturbing)?;
        let out = coeffs
            .modes()
            .map(|(p, c)| if p.j <= self.j_max { 0.0 } else { 2.0 * p.mu * c })
            .collect();
        Ok(SineCoeffs::new(out))
    }
}

/// Ratios of each conditional estimate's left side to its right side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRatios {
    /// `‖P u‖ / (C₁ log γ ‖u‖_{H¹})`.
    pub stabilized: f64,
    /// `γ² ‖Q u‖² / ‖(−Δ e^{√−Δ}) u‖²` with `C₀ = 1`.
    pub perturbing: f64,
}

impl EstimateRatios {
    pub fn stabilized_holds(&self) -> bool {
        self.stabilized <= 1.0 + ESTIMATE_TOL
    }

    pub fn perturbing_holds(&self) -> bool {
        self.perturbing <= 1.0 + ESTIMATE_TOL
    }
}

/// Evaluates both conditional estimates on each trial function.
///
/// Trials must be band-limited sine combinations resolved on their mesh
/// (modes `j ≤ N/4`); anything else is rejected.
pub fn check_conditional_estimates(
    params: &RegParams,
    trials: &[LineFunction],
) -> Result<Vec<EstimateRatios>, OperatorError> {
    let p_op = SpectralOperator::stabilized(params);
    let q_op = SpectralOperator::perturbing(params);
    let log_gamma = params.log_gamma();

    trials
        .iter()
        .enumerate()
        .map(|(index, u)| {
            let n = u.n_intervals();
            let scale = u.max_abs();
            let vals = u.values();
            if vals[0].abs() > 1e-12 * scale.max(1.0) || vals[n].abs() > 1e-12 * scale.max(1.0) {
                return Err(OperatorError::NotDirichlet { index });
            }
            // the discrete sine transform is exact for modes 1..N-1
            let all = basis::sine_coefficients(u, n.saturating_sub(1), Quadrature::Riemann)?;
            let resolved = n / 4;
            let total: f64 = all.as_slice().iter().map(|c| c * c).sum();
            if total == 0.0 {
                return Ok(EstimateRatios { stabilized: 0.0, perturbing: 0.0 });
            }
            let high: f64 = all.as_slice()[resolved.min(all.j_max())..].iter().map(|c| c * c).sum();
            if high > ALIAS_ENERGY_TOL * total {
                return Err(OperatorError::Aliased { index, high_fraction: high / total });
            }

            let pu = p_op.apply_stabilized(u)?;
            let p_num = discrete_norm(&pu, NormKind::L2)?;
            let p_den = params.c1 * log_gamma * discrete_norm(u, NormKind::H1)?;
            let stabilized = if p_num == 0.0 { 0.0 } else { p_num / p_den };

            // drop rounding-level coefficients before the exponential weights see them
            let floor = 1e-13 * all.as_slice().iter().fold(0.0_f64, |a, c| a.max(c.abs()));
            let band = SineCoeffs::new(
                all.as_slice()[..resolved]
                    .iter()
                    .map(|&c| if c.abs() <= floor { 0.0 } else { c })
                    .collect(),
            );
            let qc = q_op.apply_perturbing(&band)?;
            let q_sq: f64 = qc.as_slice().iter().map(|c| c * c).sum();
            let gevrey = band.gevrey_norm_sq();
            let perturbing = if q_sq == 0.0 { 0.0 } else { params.gamma * params.gamma * q_sq / gevrey };

            Ok(EstimateRatios { stabilized, perturbing })
        })
        .collect()
}

/// Smallest `C₀²` with `‖Q u‖² ≤ C₀² γ^{−2} ‖(−Δ e^{√−Δ}) u‖²` for every `u`:
/// the per-mode maximum `4 γ² e^{−2√μ_j}` over `j > j_max`, attained at
/// the first perturbed mode.
pub fn perturbing_constant_sq(params: &RegParams) -> f64 {
    let first = basis::mode(params.j_max + 1);
    4.0 * params.gamma * params.gamma * (-2.0 * first.sqrt_mu()).exp()
}

/// Seeded trial functions `Σ_{j ≤ L} a_j φ_j` sampled on `n_intervals`
/// intervals, with the band limit `L` uniform in `1..=max_mode` and `a_j`
/// uniform in `[−1, 1]`. Drawing `L` per trial keeps low-mode functions,
/// where the estimates are tightest, in the sample.
pub fn random_band_limited(count: usize, n_intervals: usize, max_mode: usize, seed: u64) -> Vec<LineFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let band = rng.gen_range(1..=max_mode.max(1));
            SineCoeffs::new((0..band).map(|_| rng.gen_range(-1.0..=1.0)).collect()).reconstruct(n_intervals)
        })
        .collect()
}
