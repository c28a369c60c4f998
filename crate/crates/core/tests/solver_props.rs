use std::f64::consts::PI;

use proptest::prelude::*;
use qr_cauchy::basis::{LineFunction, SineCoeffs};
use qr_cauchy::data::CauchyData;
use qr_cauchy::field::{Field, Grid};
use qr_cauchy::params::RegParams;
use qr_cauchy::qr_solver::{iterate_differences, linearized_iterates, linearized_solve, SolverOptions};

fn band(c: &[f64], n: usize) -> LineFunction {
    SineCoeffs::new(c.to_vec()).reconstruct(n)
}

fn data(values: LineFunction) -> CauchyData {
    let d = LineFunction::zeros(values.n_intervals());
    CauchyData::clean(values, d)
}

/// Source-free parameters valid on grids down to 20 intervals.
fn coarse_params() -> RegParams {
    RegParams::small_noise(0.1).unwrap()
}

/// `U_0 = U_1` start of `U_{m+1} = 2cos θ U_m − U_{m−1}` for the mode
/// `sin(jπy)` at `r = 1`: `cos mθ + tan(θ/2) sin mθ`, `θ = jπΔy`.
fn discrete_mode(j: usize, n: usize, m: usize) -> f64 {
    let theta = j as f64 * PI / n as f64;
    (m as f64 * theta).cos() + (theta / 2.0).tan() * (m as f64 * theta).sin()
}

#[test]
fn march_matches_discrete_mode_solution() {
    let n = 40;
    let p = coarse_params();
    let g = Grid::square(n).unwrap();
    let c = [0.4, -1.0, 0.25, 0.0, 0.6];
    let u = linearized_solve(&p, &data(band(&c, n)), g).unwrap();
    for m in 0..=n {
        for k in 0..=n {
            let y = k as f64 / n as f64;
            let exact: f64 = c
                .iter()
                .enumerate()
                .map(|(i, a)| a * 2f64.sqrt() * ((i + 1) as f64 * PI * y).sin() * discrete_mode(i + 1, n, m))
                .sum();
            assert!((u.get(m, k) - exact).abs() < 1e-11, "m={m} n={k}");
        }
    }
}

#[test]
fn gap_to_cosine_oracle_halves_with_the_mesh() {
    let c = [1.0, -0.5, 0.3];
    let p = coarse_params();
    let gaps: Vec<f64> = [20usize, 40, 80, 160]
        .iter()
        .map(|&n| {
            let u = linearized_solve(&p, &data(band(&c, n)), Grid::square(n).unwrap()).unwrap();
            let mut gap = 0.0_f64;
            for m in 0..=n {
                let x = m as f64 / n as f64;
                for k in 0..=n {
                    let y = k as f64 / n as f64;
                    let oracle: f64 = c
                        .iter()
                        .enumerate()
                        .map(|(i, a)| {
                            let s = (i + 1) as f64 * PI;
                            a * 2f64.sqrt() * (s * y).sin() * (s * x).cos()
                        })
                        .sum();
                    gap = gap.max((u.get(m, k) - oracle).abs());
                }
            }
            gap
        })
        .collect();
    for w in gaps.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "gaps {gaps:?}");
    }
}

/// Staggered leapfrog energy, conserved exactly by the source-free march.
fn energy(u: &Field, m: usize) -> f64 {
    let g = u.grid();
    let (dx, dy) = (g.dx(), g.dy());
    let (a, b) = (u.line(m), u.line(m + 1));
    let kinetic: f64 = a.iter().zip(b).map(|(p, q)| ((q - p) / dx).powi(2)).sum::<f64>() * dy;
    let potential: f64 = (0..g.n).map(|k| (b[k + 1] - b[k]) * (a[k + 1] - a[k]) / (dy * dy)).sum::<f64>() * dy;
    kinetic + potential
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn source_free_energy_is_conserved(
        c in prop::collection::vec(-1.0f64..1.0, 1..8),
        (m, n) in (16usize..60).prop_flat_map(|m| (Just(m), 8usize..=m)),
    ) {
        let p = RegParams::from_gamma(1.0, 0.5, 1).unwrap();
        let g = Grid::new(m, n).unwrap();
        let u = linearized_solve(&p, &data(band(&c, n)), g).unwrap();
        let e0 = energy(&u, 0);
        for k in 1..g.m {
            let e = energy(&u, k);
            prop_assert!((e - e0).abs() <= 1e-9 * e0.abs().max(1.0), "line {}: {} vs {}", k, e, e0);
        }
    }

    #[test]
    fn band_limited_data_stays_bounded(c in prop::collection::vec(-1.0f64..1.0, 1..8)) {
        let n = 200;
        let mut u0 = band(&c, n);
        let scale = u0.max_abs();
        prop_assume!(scale > 1e-6);
        u0.values_mut().iter_mut().for_each(|v| *v /= scale);
        let p = RegParams::small_noise(1e-2).unwrap();
        let u = linearized_solve(&p, &data(u0), Grid::square(n).unwrap()).unwrap();
        prop_assert!(u.max_abs() <= 10.0);
    }

    #[test]
    fn solve_is_linear_and_deterministic(
        c in prop::collection::vec(-1.0f64..1.0, 1..6),
        d in prop::collection::vec(-1.0f64..1.0, 1..6),
        s in -3.0f64..3.0,
        j_max in 0usize..3,
    ) {
        let n = 40;
        let p = coarse_params().with_j_max(j_max);
        let g = Grid::square(n).unwrap();
        let (u, v) = (band(&c, n), band(&d, n));
        let a = linearized_solve(&p, &data(u.clone()), g).unwrap();
        let b = linearized_solve(&p, &data(v.clone()), g).unwrap();
        let sum = linearized_solve(&p, &data(u.axpby(1.0, &v, s)), g).unwrap();
        let again = linearized_solve(&p, &data(u), g).unwrap();
        prop_assert_eq!(a.values(), again.values());
        let scale = 1.0 + a.max_abs() + s.abs() * b.max_abs();
        for ((x, y), z) in a.values().iter().zip(b.values()).zip(sum.values()) {
            prop_assert!((x + s * y - z).abs() <= 1e-10 * scale);
        }
    }
}

#[test]
fn iterates_coincide_without_source() {
    let p = RegParams::small_noise(1e-2).unwrap().with_k_iters(4);
    let g = Grid::square(200).unwrap();
    let it = linearized_iterates(&p, &band(&[1.0, 0.2], 200), g, &SolverOptions::default()).unwrap();
    assert_eq!(it.len(), 5);
    assert!(it[0].max_abs() == 0.0);
    for k in 2..it.len() {
        assert_eq!(it[k].values(), it[1].values());
    }
}

#[test]
fn iterate_differences_contract_within_window() {
    let p0 = RegParams::small_noise(1e-2).unwrap();
    let n = p0.x_intervals();
    let g = Grid::square(n).unwrap();
    let u0 = band(&[1.0, 0.3, -0.2], n);
    for j_max in [1usize, 2] {
        let p = p0.with_j_max(j_max).with_k_iters(6);
        let it = linearized_iterates(&p, &u0, g, &SolverOptions::default()).unwrap();
        for x_bar in [0.05, 0.1] {
            let eta = p.contraction_factor_sq(x_bar).sqrt();
            assert!(eta < 1.0);
            let d = iterate_differences(&it, x_bar);
            for k in 1..=5 {
                assert!(d[k] <= eta * d[k - 1], "j_max {j_max} x_bar {x_bar} k {k}: {d:?} eta {eta}");
            }
        }
    }
}

#[test]
fn lines_settle_one_per_iteration() {
    // u^k and u^{k−1} agree on the first k x-lines
    let p = RegParams::small_noise(1e-2).unwrap().with_j_max(1).with_k_iters(5);
    let n = p.x_intervals();
    let it = linearized_iterates(&p, &band(&[1.0], n), Grid::square(n).unwrap(), &SolverOptions::default()).unwrap();
    for k in 2..it.len() {
        for m in 0..k {
            assert_eq!(it[k].line(m), it[k - 1].line(m), "k {k} m {m}");
        }
        assert_ne!(it[k].line(k), it[k - 1].line(k));
    }
}
