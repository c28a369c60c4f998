use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use qr_cauchy::operators::{check_conditional_estimates, perturbing_constant_sq, random_band_limited};
use qr_cauchy_cli::{reference_errors, run_convergence_sweep, run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "qrcauchy", version, about = "Quasi-reversibility reconstruction for the Laplace Cauchy problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct every (test, eps, seed) case and write artifacts.
    Run(Common),
    /// Median errors over seeds for each eps, plus a log-log rate fit.
    Sweep(Common),
    /// Parameter policy and operator estimate diagnostics.
    Check {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e-1, 1e-2])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Test problems, e.g. `test1,test2`.
    #[arg(long, value_delimiter = ',')]
    test: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Size grids from eps but inject no noise.
    #[arg(long)]
    noiseless: bool,
    /// Skip PNG heatmaps.
    #[arg(long)]
    no_images: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if !self.test.is_empty() {
            c.tests = self.test.clone();
        }
        if !self.eps.is_empty() {
            c.eps = self.eps.clone();
        }
        if !self.seed.is_empty() {
            c.seeds = self.seed.clone();
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        c.noiseless |= self.noiseless;
        c.write_images &= !self.no_images;
        c.validate()?;
        Ok(c)
    }
}

fn reference_cell(test: &str, eps: f64) -> String {
    match reference_errors(test, eps) {
        Some((l2, rel)) => format!("{l2:>8.3} {rel:>7.2}%"),
        None => format!("{:>17}", "-"),
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let cfg = args.config()?;
            let bundle = run_experiment(&cfg).context("experiment failed")?;
            println!("{:<6} {:>8} {:>5} {:>5} {:>12} {:>9} {:>9}", "test", "eps", "seed", "M", "l2", "rel", "time");
            for r in &bundle.results {
                println!(
                    "{:<6} {:>8.1e} {:>5} {:>5} {:>12.5} {:>8.3}% {:>8.3}s",
                    r.case.test, r.case.eps, r.case.seed, r.grid.m, r.report.l2, r.report.rel_pct, r.runtime_s
                );
            }
            println!("errors table: {}", bundle.errors_csv.display());
        }
        Command::Sweep(args) => {
            let cfg = args.config()?;
            let report = run_convergence_sweep(&cfg, true).context("sweep failed")?;
            for t in &report.tests {
                println!("{}  (reference columns: l2, rel)", t.test);
                for r in &t.rows {
                    println!(
                        "  eps {:>8.1e}  gamma {:>8.1}  median l2 {:>10.5}  rel {:>7.3}%  l2(x=1) {:>9.5}   reference {}",
                        r.eps,
                        r.gamma,
                        r.median_l2,
                        r.median_rel_pct,
                        r.median_l2_final,
                        reference_cell(&r.test, r.eps)
                    );
                }
                println!(
                    "  slope of log l2^2 vs log gamma: {:.4}  (x=1: {:.4}; envelope {:.4}; span {:.2} decades)",
                    t.fit_l2.slope, t.fit_final.slope, t.fit_l2.predicted, t.fit_l2.span_decades
                );
                println!("  median rel monotone nonincreasing: {}", t.monotone_rel());
            }
            if let Some(p) = report.csv {
                println!("sweep table: {}", p.display());
            }
        }
        Command::Check { eps, trials, seed } => {
            for e in eps {
                let cfg = ExperimentConfig::default();
                let p = cfg.params(e)?;
                println!("eps = {e:e}");
                println!(
                    "  gamma {:.4}  dx {:.6}  M {}  j_max {}  eta^2 {:.6}  rho {:.4}  rate hypothesis {}",
                    p.gamma,
                    p.dx,
                    p.x_intervals(),
                    p.j_max,
                    p.eta_sq,
                    p.rho,
                    p.satisfies_rate_hypothesis()
                );
                println!("  Holder factor at x=1: {:.6}", p.holder_rate_prediction(1.0));
                let n = p.x_intervals().max(64);
                let funcs = random_band_limited(trials, n, n / 8, seed);
                let ratios = check_conditional_estimates(&p, &funcs)?;
                let pmax = ratios.iter().map(|r| r.stabilized).fold(0.0, f64::max);
                let qmax = ratios.iter().map(|r| r.perturbing).fold(0.0, f64::max);
                println!("  max stabilized ratio {pmax:.4e} over {trials} trials (bound 1)");
                println!("  max perturbing ratio {qmax:.4e} (sharp constant C0^2 = {:.4e})", perturbing_constant_sq(&p));
            }
        }
    }
    Ok(())
}
