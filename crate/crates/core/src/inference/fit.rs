//! Maximum likelihood fits under THMC and under the non-homogeneous chain.

use crate::error::{Error, Result};
use crate::path::Shape;
use crate::table::PathTable;

/// Stopping rule for iterative scaling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    /// Largest allowed `|A·m̂ − b|` entry.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tolerance: 1e-10,
            max_iterations: 100_000,
        }
    }
}

/// THMC maximum likelihood fit `m̂(ω) = γ_{s₁} Π_t β_{s_t s_{t+1}}`.
///
/// `γ` absorbs the sample size, so `Σ_ω m̂(ω) = N` at convergence.
#[derive(Clone, Debug, PartialEq)]
pub struct ThmcFit {
    shape: Shape,
    gamma: Vec<f64>,
    beta: Vec<f64>,
    pub iterations: usize,
    /// Max-norm of `A·m̂ − b` at exit.
    pub residual: f64,
    pub converged: bool,
}

/// Expected initial and pooled transition counts of `γ_{s₁} Π β` summed
/// over all paths, by forward and backward recursions.
fn margins(s: usize, len: usize, gamma: &[f64], beta: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut backward = vec![vec![1.0f64; s]; len];
    for t in (0..len - 1).rev() {
        for i in 0..s {
            backward[t][i] = (0..s).map(|j| beta[i * s + j] * backward[t + 1][j]).sum();
        }
    }
    let initial: Vec<f64> = (0..s).map(|i| gamma[i] * backward[0][i]).collect();
    let mut forward = gamma.to_vec();
    let mut trans = vec![0.0f64; s * s];
    for t in 0..len - 1 {
        let mut next = vec![0.0f64; s];
        for i in 0..s {
            for j in 0..s {
                let flow = forward[i] * beta[i * s + j];
                trans[i * s + j] += flow * backward[t + 1][j];
                next[j] += flow;
            }
        }
        forward = next;
    }
    (initial, trans)
}

/// Fits THMC by generalised iterative scaling on `A/T`, whose columns sum
/// to exactly one. Rows with `b = 0` pin their parameter to zero, which
/// zeroes every cell touching them.
///
/// Non-convergence is not an error: the residual is reported in the fit.
pub fn fit_thmc_mle(table: &PathTable, options: FitOptions) -> Result<ThmcFit> {
    if table.is_empty() {
        return Err(Error::InvalidShape("cannot fit an empty table".into()));
    }
    let shape = table.shape();
    let (s, len) = (shape.states(), shape.length());
    let b = table.suff_stat();
    let target_init: Vec<f64> = b.initial().iter().map(|&v| v as f64).collect();
    let target_trans: Vec<f64> = b.transitions().iter().map(|&v| v as f64).collect();
    let n = table.total() as f64;

    let mut gamma: Vec<f64> = target_init.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
    let mut beta: Vec<f64> = target_trans.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
    let exponent = 1.0 / len as f64;

    let residual_of = |init: &[f64], trans: &[f64]| {
        init.iter()
            .zip(&target_init)
            .chain(trans.iter().zip(&target_trans))
            .map(|(m, b)| (m - b).abs())
            .fold(0.0f64, f64::max)
    };

    // Start from the uniform distribution over the allowed cells.
    let (init, _) = margins(s, len, &gamma, &beta);
    let total: f64 = init.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidShape("no cell is compatible with the statistic".into()));
    }
    gamma.iter_mut().for_each(|g| *g *= n / total);

    let mut iterations = 0;
    let (mut init, mut trans) = margins(s, len, &gamma, &beta);
    let mut residual = residual_of(&init, &trans);
    while residual >= options.tolerance && iterations < options.max_iterations {
        for i in 0..s {
            if gamma[i] > 0.0 {
                gamma[i] *= (target_init[i] / init[i]).powf(exponent);
            }
        }
        for k in 0..s * s {
            if beta[k] > 0.0 {
                beta[k] *= (target_trans[k] / trans[k]).powf(exponent);
            }
        }
        // Keep the transition weights near unit scale; the fit is
        // unchanged when β is scaled by c and γ by c^−(T−1).
        let scale = beta.iter().copied().fold(0.0f64, f64::max);
        if scale > 0.0 {
            beta.iter_mut().for_each(|v| *v /= scale);
            let back = scale.powi(len as i32 - 1);
            gamma.iter_mut().for_each(|g| *g *= back);
        }
        (init, trans) = margins(s, len, &gamma, &beta);
        residual = residual_of(&init, &trans);
        iterations += 1;
        if !residual.is_finite() {
            return Err(Error::InvalidShape("iterative scaling diverged".into()));
        }
    }
    Ok(ThmcFit {
        shape,
        gamma,
        beta,
        iterations,
        residual,
        converged: residual < options.tolerance,
    })
}

impl ThmcFit {
    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Fitted count of a 1-based state sequence.
    pub fn fitted(&self, states: &[u8]) -> f64 {
        let s = self.shape.states();
        let mut v = self.gamma[states[0] as usize - 1];
        for w in states.windows(2) {
            v *= self.beta[(w[0] as usize - 1) * s + (w[1] as usize - 1)];
        }
        v
    }

    pub fn fitted_index(&self, index: u64) -> f64 {
        self.fitted(&self.shape.decode(index))
    }

    /// Fitted counts for every cell in lexicographic order.
    pub fn dense(&self, cap: u64) -> Result<Vec<f64>> {
        if self.shape.cells() > cap {
            return Err(Error::CapExceeded {
                what: "fitted cells S^T",
                requested: self.shape.cells() as u128,
                limit: cap as u128,
            });
        }
        let mut buf = vec![0u8; self.shape.length()];
        Ok(self
            .shape
            .all_indices()
            .map(|i| {
                self.shape.decode_into(i, &mut buf);
                self.fitted(&buf)
            })
            .collect())
    }

    /// `A·m̂`: fitted initial counts followed by pooled transition counts.
    pub fn fitted_statistic(&self) -> Vec<f64> {
        let (init, trans) = margins(self.shape.states(), self.shape.length(), &self.gamma, &self.beta);
        init.into_iter().chain(trans).collect()
    }
}

/// Fit of the non-homogeneous chain (one transition matrix per step):
/// `m̂₁(ω) = Π_t x^t_{s_t s_{t+1}} / Π_{t=2}^{T−1} n_t(s_t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceFit {
    shape: Shape,
    /// Per step `t = 1..T−1`, row-major `S × S` counts.
    slices: Vec<Vec<u64>>,
}

impl SliceFit {
    pub fn new(table: &PathTable) -> Self {
        let shape = table.shape();
        let s = shape.states();
        let counts = table.edge_counts();
        let slices = counts.chunks(s * s).map(<[u64]>::to_vec).collect();
        SliceFit { shape, slices }
    }

    fn occupancy(&self, t: usize, i: usize) -> u64 {
        let s = self.shape.states();
        self.slices[t][i * s..(i + 1) * s].iter().sum()
    }

    pub fn fitted(&self, states: &[u8]) -> f64 {
        let s = self.shape.states();
        let mut v = 1.0;
        for (t, w) in states.windows(2).enumerate() {
            let (i, j) = (w[0] as usize - 1, w[1] as usize - 1);
            let c = self.slices[t][i * s + j];
            if c == 0 {
                return 0.0;
            }
            v *= c as f64;
            if t > 0 {
                v /= self.occupancy(t, i) as f64;
            }
        }
        v
    }

    /// Calls `f(states, m̂₁)` for every cell with a positive fit.
    pub fn for_each_support(&self, mut f: impl FnMut(&[u8], f64)) {
        let (s, len) = (self.shape.states(), self.shape.length());
        let mut states = vec![0u8; len];
        fn rec(
            fit: &SliceFit,
            s: usize,
            t: usize,
            value: f64,
            states: &mut [u8],
            f: &mut dyn FnMut(&[u8], f64),
        ) {
            if t + 1 == states.len() {
                f(states, value);
                return;
            }
            let i = states[t] as usize - 1;
            let occ = if t > 0 { fit.occupancy(t, i) as f64 } else { 1.0 };
            for j in 0..s {
                let c = fit.slices[t][i * s + j];
                if c > 0 {
                    states[t + 1] = j as u8 + 1;
                    rec(fit, s, t + 1, value * c as f64 / occ, states, f);
                }
            }
        }
        for first in 1..=s {
            states[0] = first as u8;
            rec(self, s, 0, 1.0, &mut states, &mut f);
        }
    }
}
