//! Metropolis sampling of the conditional distribution on a fiber.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basis::MoveGenerator;
use crate::error::{Error, Result};
use crate::moves::Move;
use crate::par;
use crate::table::PathTable;

/// `ln k!` for `k = 0..=n`.
pub fn log_factorials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `ln(Π x! / Π x′!)` for `x′ = x + sign·z`, or `None` if `x′` has a
/// negative cell.
pub fn log_acceptance(table: &PathTable, mv: &Move, sign: i64, lf: &[f64]) -> Option<f64> {
    // Check every cell first: a positive entry can exceed N when the
    // move is infeasible elsewhere.
    if !table.can_apply(mv, sign) {
        return None;
    }
    let mut acc = 0.0;
    for (index, v) in mv.iter() {
        let before = table.count_index(index) as i64;
        let after = (before + sign * v) as usize;
        acc += lf[before as usize] - lf.get(after).copied()?;
    }
    Some(acc)
}

/// How a chain proposes its next state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Proposal {
    /// Each step is a `Template` step followed by a `Local` step.
    #[default]
    Combined,
    /// Pick a kernel and a random subset of the table's paths, then a
    /// uniform move among those the kernel supports on them. Accepted
    /// with the Hastings ratio of the two local neighbourhoods.
    Local,
    /// A table-independent basis move with a fair random sign.
    Template,
}

impl Proposal {
    pub fn name(&self) -> &'static str {
        match self {
            Proposal::Combined => "combined",
            Proposal::Local => "local",
            Proposal::Template => "template",
        }
    }

    /// Generators without local kernels only support `Template`.
    pub fn resolve(self, basis: &dyn MoveGenerator) -> Proposal {
        if basis.local_kernels() == 0 {
            Proposal::Template
        } else {
            self
        }
    }
}

impl fmt::Display for Proposal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Proposal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "combined" => Ok(Proposal::Combined),
            "local" => Ok(Proposal::Local),
            "template" => Ok(Proposal::Template),
            _ => Err(Error::InvalidParams(format!("unknown proposal {s:?} (combined, local, template)"))),
        }
    }
}

/// Sampler settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainConfig {
    pub burnin: u64,
    pub samples: u64,
    pub seed: u64,
    /// Independent chains, each on its own random stream of `seed`.
    pub chains: usize,
    /// Worker threads for the chains; 0 uses the global pool.
    pub threads: usize,
    pub proposal: Proposal,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            burnin: 50_000,
            samples: 100_000,
            seed: 0,
            chains: 1,
            threads: 0,
            proposal: Proposal::Combined,
        }
    }
}

/// Output of one chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainRun {
    /// Statistic after each post-burn-in step.
    pub values: Vec<f64>,
    /// Steps that changed the table, burn-in included.
    pub accepted: u64,
    pub steps: u64,
    /// State at the end of the run.
    pub last: PathTable,
}

impl ChainRun {
    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps as f64
        }
    }
}

/// `ln Π_ω u(ω)!` for a sorted multiset `units`.
fn log_multiplicities(units: &[u64], lf: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut run = 0;
    for (k, u) in units.iter().enumerate() {
        run += 1;
        if units.get(k + 1) != Some(u) {
            acc += lf[run];
            run = 0;
        }
    }
    acc
}

/// Log Hastings ratio of the local move `τ → τ′` given both
/// neighbourhood lists, or `None` if `τ` cannot be reached back.
fn local_log_ratio(tau: &[u64], pick: &[u64], forward: &[Vec<u64>], backward: &[Vec<u64>], lf: &[f64]) -> Option<f64> {
    let there = forward.iter().filter(|y| *y == pick).count() as f64;
    let back = backward.iter().filter(|y| *y == tau).count() as f64;
    if back == 0.0 || there == 0.0 {
        return None;
    }
    Some(
        (back / backward.len() as f64).ln() - (there / forward.len() as f64).ln() + log_multiplicities(tau, lf)
            - log_multiplicities(pick, lf),
    )
}

type Neighbourhood = Rc<Vec<Vec<u64>>>;

/// Largest number of cached neighbourhoods before the cache is reset.
const NEIGHBOURHOOD_CACHE: usize = 1 << 14;

/// Labelled paths and a cache of kernel neighbourhoods.
struct LocalState {
    units: Vec<u64>,
    cache: HashMap<(usize, Vec<u64>), Neighbourhood>,
}

impl LocalState {
    fn new(units: Vec<u64>) -> Self {
        LocalState { units, cache: HashMap::new() }
    }

    fn neighbourhood(&mut self, basis: &dyn MoveGenerator, kernel: usize, tau: &[u64]) -> Result<Neighbourhood> {
        if let Some(found) = self.cache.get(&(kernel, tau.to_vec())) {
            return Ok(Rc::clone(found));
        }
        let mut out = Vec::new();
        basis.kernel_neighbors(kernel, tau, &mut out)?;
        if self.cache.len() >= NEIGHBOURHOOD_CACHE {
            self.cache.clear();
        }
        let out = Rc::new(out);
        self.cache.insert((kernel, tau.to_vec()), Rc::clone(&out));
        Ok(out)
    }

    /// One local Metropolis–Hastings step. Returns whether `x` changed.
    ///
    /// A kernel `f` and `k` distinct path slots are chosen independently
    /// of `x`; with `τ` the paths in those slots and `L(τ)` the kernel's
    /// neighbours of `τ`, `τ′` is uniform on `L(τ)` and accepted with
    /// probability `min(1, c(τ′→τ)/|L(τ′)| · Πτ! / (c(τ→τ′)/|L(τ)| · Πτ′!))`,
    /// where `c` counts repeats in the lists.
    fn step(
        &mut self,
        x: &mut PathTable,
        basis: &dyn MoveGenerator,
        lf: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Result<bool> {
        let n = self.units.len();
        let kernel = rng.random_range(0..basis.local_kernels());
        let k = basis.kernel_degree(kernel).min(n);
        if k == 0 {
            return Ok(false);
        }
        let slots = index::sample(rng, n, k).into_vec();
        let mut tau: Vec<u64> = slots.iter().map(|&i| self.units[i]).collect();
        tau.sort_unstable();
        let forward = self.neighbourhood(basis, kernel, &tau)?;
        if forward.is_empty() {
            return Ok(false);
        }
        let pick = forward[rng.random_range(0..forward.len())].clone();
        if pick == tau {
            return Ok(false);
        }
        let backward = self.neighbourhood(basis, kernel, &pick)?;
        let Some(log_ratio) = local_log_ratio(&tau, &pick, &forward, &backward, lf) else {
            return Ok(false);
        };
        if log_ratio < 0.0 && rng.random::<f64>().ln() >= log_ratio {
            return Ok(false);
        }
        let mv = Move::from_parts(x.shape(), &pick, &tau)?;
        x.apply_move_in_place(&mv, 1)?;
        for (&slot, &u) in slots.iter().zip(&pick) {
            self.units[slot] = u;
        }
        Ok(true)
    }
}

/// Runs one chain from `start` targeting `P(x) ∝ 1/Π x(ω)!` on the fiber
/// of `start`.
///
/// With [`Proposal::Template`] each step draws a basis move and a fair
/// sign and accepts with `min(1, Π x! / Π x′!)`; see [`Proposal`] for the
/// others. Both kinds of step satisfy detailed balance, so their
/// composition leaves the target invariant. Rejected or infeasible
/// proposals repeat the current state. `statistic` is evaluated after
/// every post-burn-in step (only recomputed when the state changes).
pub fn run_chain<F>(
    start: &PathTable,
    basis: &dyn MoveGenerator,
    proposal: Proposal,
    burnin: u64,
    samples: u64,
    rng: &mut ChaCha8Rng,
    statistic: F,
) -> Result<ChainRun>
where
    F: Fn(&PathTable) -> f64,
{
    basis.shape().check_same(&start.shape())?;
    let lf = log_factorials(start.total());
    let mut x = start.clone();
    let proposal = proposal.resolve(basis);
    let mut local = LocalState::new(start.units());
    let mut current = None;
    let mut values = Vec::with_capacity(samples as usize);
    let mut accepted = 0;
    for step in 0..burnin + samples {
        let mut moved = false;
        if proposal != Proposal::Local && template_step(&mut x, basis, &lf, rng)? {
            moved = true;
            if proposal == Proposal::Combined {
                // Slots are drawn uniformly, so their order is irrelevant.
                local.units = x.units();
            }
        }
        if proposal != Proposal::Template && local.step(&mut x, basis, &lf, rng)? {
            moved = true;
        }
        if moved {
            accepted += 1;
            current = None;
        }
        if step >= burnin {
            let v = *current.get_or_insert_with(|| statistic(&x));
            values.push(v);
        }
    }
    Ok(ChainRun {
        values,
        accepted,
        steps: burnin + samples,
        last: x,
    })
}

fn template_step(x: &mut PathTable, basis: &dyn MoveGenerator, lf: &[f64], rng: &mut ChaCha8Rng) -> Result<bool> {
    let mv = basis.random_move(rng);
    let sign = if rng.random_bool(0.5) { 1 } else { -1 };
    if mv.is_zero() {
        return Ok(false);
    }
    let Some(log_ratio) = log_acceptance(x, &mv, sign, lf) else {
        return Ok(false);
    };
    if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
        x.apply_move_in_place(&mv, sign)?;
        return Ok(true);
    }
    Ok(false)
}

/// Runs `config.chains` independent chains, chain `k` on stream `k` of
/// `config.seed`. Results do not depend on the thread count.
pub fn run_chains<F>(
    start: &PathTable,
    basis: &dyn MoveGenerator,
    config: &ChainConfig,
    statistic: F,
) -> Result<Vec<ChainRun>>
where
    F: Fn(&PathTable) -> f64 + Sync,
{
    let ids: Vec<u64> = (0..config.chains.max(1) as u64).collect();
    par::map(&ids, config.threads, |&k| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(k);
        run_chain(start, basis, config.proposal, config.burnin, config.samples, &mut rng, &statistic)
    })
    .into_iter()
    .collect()
}

/// Monte Carlo p-value `#{v ≥ observed − 1e−12} / n`.
pub fn exact_p(samples: &[f64], observed: f64) -> f64 {
    if samples.is_empty() {
        return f64::NAN;
    }
    let hits = samples.iter().filter(|&&v| v >= observed - 1e-12).count();
    hits as f64 / samples.len() as f64
}

/// Batch-means standard error of the p-value estimate, with
/// `⌊√n⌋` batches.
pub fn batch_means_se(samples: &[f64], observed: f64) -> f64 {
    let n = samples.len();
    let batches = (n as f64).sqrt().floor() as usize;
    if batches < 2 {
        return f64::NAN;
    }
    let size = n / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| exact_p(&samples[b * size..(b + 1) * size], observed))
        .collect();
    let mean = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// `bins` equal-width bins over `[0, max(sample max, observed)·1.05]`.
/// Non-finite values land in the last bin.
pub fn histogram(samples: &[f64], observed: f64, bins: usize) -> Vec<(f64, f64, u64)> {
    let bins = bins.max(1);
    let top = samples
        .iter()
        .copied()
        .chain(std::iter::once(observed))
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        * 1.05;
    let width = if top > 0.0 { top / bins as f64 } else { 1.0 / bins as f64 };
    let mut counts = vec![0u64; bins];
    for &v in samples {
        let k = if v.is_finite() {
            ((v.max(0.0) / width) as usize).min(bins - 1)
        } else {
            bins - 1
        };
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (k as f64 * width, (k + 1) as f64 * width, c))
        .collect()
}
