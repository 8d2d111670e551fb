//! Exact conditional goodness-of-fit test of THMC.

pub mod fit;
pub mod mcmc;
pub mod stats;

use std::fmt::Write as _;

use serde::Serialize;

use crate::basis::MoveGenerator;
use crate::error::Result;
use crate::table::PathTable;

pub use fit::{fit_thmc_mle, FitOptions, SliceFit, ThmcFit};
pub use mcmc::{batch_means_se, exact_p, histogram, run_chain, run_chains, ChainConfig, ChainRun, Proposal};
pub use stats::{asymptotic_p, Evaluator, Statistic};

/// Number of histogram bins in reports.
pub const HISTOGRAM_BINS: usize = 50;

/// Outcome of an exact conditional test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport {
    pub statistic: Statistic,
    pub chi2_observed: f64,
    pub df: usize,
    pub p_asymptotic: f64,
    pub p_exact: f64,
    pub mcse: f64,
    pub n_samples: u64,
    pub n_burnin: u64,
    pub chains: usize,
    pub seed: u64,
    pub proposal: Proposal,
    pub acceptance_rate: f64,
    pub fit_iterations: usize,
    pub fit_residual: f64,
    pub fit_converged: bool,
    /// `(left, right, count)` per bin.
    pub histogram: Vec<(f64, f64, u64)>,
}

impl TestReport {
    /// `key: value` lines, one per scalar field.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k}: {v}");
        };
        line("statistic", self.statistic.to_string());
        line("chi2_observed", format!("{:.6}", self.chi2_observed));
        line("df", self.df.to_string());
        line("p_asymptotic", format!("{:.6}", self.p_asymptotic));
        line("p_exact", format!("{:.6}", self.p_exact));
        line("mcse", format!("{:.6}", self.mcse));
        line("n_samples", self.n_samples.to_string());
        line("n_burnin", self.n_burnin.to_string());
        line("chains", self.chains.to_string());
        line("seed", self.seed.to_string());
        line("proposal", self.proposal.to_string());
        line("acceptance_rate", format!("{:.6}", self.acceptance_rate));
        line("fit_iterations", self.fit_iterations.to_string());
        line("fit_residual", format!("{:.3e}", self.fit_residual));
        line("fit_converged", self.fit_converged.to_string());
        out
    }

    /// `bin_left,bin_right,count` CSV with header.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,count\n");
        for (l, r, c) in &self.histogram {
            let _ = writeln!(out, "{l:.6},{r:.6},{c}");
        }
        out
    }
}

/// Exact conditional test of THMC on `table`: fits once, samples the
/// fiber of `table` with `basis` starting from the data, and compares the
/// observed statistic with the sampled ones.
pub fn exact_test(
    table: &PathTable,
    basis: &dyn MoveGenerator,
    statistic: Statistic,
    config: &ChainConfig,
) -> Result<TestReport> {
    let evaluator = Evaluator::new(statistic, table, FitOptions::default())?;
    let observed = evaluator.evaluate(table);
    let df = statistic.degrees_of_freedom(table.shape())?;
    let runs = run_chains(table, basis, config, |x| evaluator.evaluate(x))?;
    let samples: Vec<f64> = runs.iter().flat_map(|r| r.values.iter().copied()).collect();
    let accepted: u64 = runs.iter().map(|r| r.accepted).sum();
    let steps: u64 = runs.iter().map(|r| r.steps).sum();
    let fit = evaluator.fit();
    Ok(TestReport {
        statistic,
        chi2_observed: observed,
        df,
        p_asymptotic: asymptotic_p(observed, df)?,
        p_exact: exact_p(&samples, observed),
        mcse: batch_means_se(&samples, observed),
        n_samples: samples.len() as u64,
        n_burnin: config.burnin,
        chains: runs.len(),
        seed: config.seed,
        proposal: config.proposal.resolve(basis),
        acceptance_rate: if steps == 0 { 0.0 } else { accepted as f64 / steps as f64 },
        fit_iterations: fit.iterations,
        fit_residual: fit.residual,
        fit_converged: fit.converged,
        histogram: histogram(&samples, observed, HISTOGRAM_BINS),
    })
}
