//! Chain parameterisations and the path simulator.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::Shape;
use crate::table::PathTable;

const STOCHASTIC_TOL: f64 = 1e-9;

/// Parameters of one of the three chain models.
///
/// * `Homogeneous`: `p(ω) = π_{s1} Π_t p_{s_t s_{t+1}}`.
/// * `Toric`: `p(ω) = c·γ_{s1} Π_t β_{s_t s_{t+1}}` with free nonnegative
///   `γ, β`; `c` is computed on demand.
/// * `Nonhomogeneous`: one transition matrix per time step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Homogeneous {
        initial: Vec<f64>,
        transition: Vec<Vec<f64>>,
    },
    Toric {
        gamma: Vec<f64>,
        beta: Vec<Vec<f64>>,
    },
    Nonhomogeneous {
        initial: Vec<f64>,
        transitions: Vec<Vec<Vec<f64>>>,
    },
}

impl ModelParams {
    pub fn states(&self) -> usize {
        match self {
            ModelParams::Homogeneous { initial, .. } | ModelParams::Nonhomogeneous { initial, .. } => {
                initial.len()
            }
            ModelParams::Toric { gamma, .. } => gamma.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.states();
        if s < 2 {
            return Err(Error::InvalidParams(format!("need at least 2 states, got {s}")));
        }
        match self {
            ModelParams::Homogeneous { initial, transition } => {
                check_distribution("initial", initial)?;
                check_stochastic("transition", transition, s)
            }
            ModelParams::Toric { gamma, beta } => {
                check_nonnegative("gamma", gamma)?;
                check_square("beta", beta, s)?;
                for row in beta {
                    check_nonnegative("beta", row)?;
                }
                Ok(())
            }
            ModelParams::Nonhomogeneous { initial, transitions } => {
                check_distribution("initial", initial)?;
                if transitions.is_empty() {
                    return Err(Error::InvalidParams("no transition matrices".into()));
                }
                for (t, m) in transitions.iter().enumerate() {
                    check_stochastic(&format!("transitions[{t}]"), m, s)?;
                }
                Ok(())
            }
        }
    }

    /// Per-step sampling weights for paths of length `length`:
    /// initial weights and one weight matrix per transition.
    fn step_weights(&self, length: usize) -> Result<(Vec<f64>, Vec<Vec<Vec<f64>>>)> {
        match self {
            ModelParams::Homogeneous { initial, transition } => {
                Ok((initial.clone(), vec![transition.clone(); length - 1]))
            }
            ModelParams::Nonhomogeneous { initial, transitions } => {
                if transitions.len() != length - 1 {
                    return Err(Error::InvalidParams(format!(
                        "{} transition matrices for T={length}",
                        transitions.len()
                    )));
                }
                Ok((initial.clone(), transitions.clone()))
            }
            ModelParams::Toric { gamma, beta } => {
                // Backward weights h_t(i) = Σ_j β_ij h_{t+1}(j) turn the
                // toric product into an equivalent sequential sampler.
                let s = gamma.len();
                let mut h = vec![1.0f64; s];
                let mut steps = Vec::with_capacity(length - 1);
                for _ in 0..length - 1 {
                    let step: Vec<Vec<f64>> = (0..s)
                        .map(|i| (0..s).map(|j| beta[i][j] * h[j]).collect())
                        .collect();
                    h = step.iter().map(|row| row.iter().sum()).collect();
                    steps.push(step);
                }
                steps.reverse();
                let initial: Vec<f64> = (0..s).map(|i| gamma[i] * h[i]).collect();
                if initial.iter().sum::<f64>() <= 0.0 {
                    return Err(Error::InvalidParams("toric model has zero total mass".into()));
                }
                Ok((initial, steps))
            }
        }
    }

    /// Probability of a 1-based state sequence under the model.
    pub fn path_probability(&self, states: &[u8]) -> Result<f64> {
        self.validate()?;
        let (initial, steps) = self.step_weights(states.len())?;
        let norm = |w: &[f64]| w.iter().sum::<f64>();
        let mut p = initial[states[0] as usize - 1] / norm(&initial);
        for (t, w) in states.windows(2).enumerate() {
            let row = &steps[t][w[0] as usize - 1];
            let z = norm(row);
            if z <= 0.0 {
                return Ok(0.0);
            }
            p *= row[w[1] as usize - 1] / z;
        }
        Ok(p)
    }
}

fn check_nonnegative(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidParams(format!("{name} has negative or non-finite entries")));
    }
    Ok(())
}

fn check_distribution(name: &str, v: &[f64]) -> Result<()> {
    check_nonnegative(name, v)?;
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidParams(format!("{name} sums to {sum}, not 1")));
    }
    Ok(())
}

fn check_square(name: &str, m: &[Vec<f64>], s: usize) -> Result<()> {
    if m.len() != s || m.iter().any(|row| row.len() != s) {
        return Err(Error::InvalidParams(format!("{name} must be {s}x{s}")));
    }
    Ok(())
}

fn check_stochastic(name: &str, m: &[Vec<f64>], s: usize) -> Result<()> {
    check_square(name, m, s)?;
    for (i, row) in m.iter().enumerate() {
        check_distribution(&format!("{name} row {}", i + 1), row)?;
    }
    Ok(())
}

fn weighted(w: &[f64]) -> Option<WeightedIndex<f64>> {
    WeightedIndex::new(w).ok()
}

/// Draws `n` i.i.d. paths of length `length` by sequential sampling.
/// Deterministic for a given `seed`.
pub fn simulate_paths(params: &ModelParams, n: u64, length: usize, seed: u64) -> Result<PathTable> {
    params.validate()?;
    let shape = Shape::new(params.states(), length)?;
    let (initial, steps) = params.step_weights(length)?;
    let init = weighted(&initial)
        .ok_or_else(|| Error::InvalidParams("initial weights are all zero".into()))?;
    let rows: Vec<Vec<Option<WeightedIndex<f64>>>> = steps
        .iter()
        .map(|m| m.iter().map(|row| weighted(row)).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = PathTable::new(shape);
    let mut states = vec![0u8; length];
    for _ in 0..n {
        states[0] = init.sample(&mut rng) as u8 + 1;
        for t in 1..length {
            let prev = states[t - 1] as usize - 1;
            let dist = rows[t - 1][prev].as_ref().ok_or_else(|| {
                Error::InvalidParams(format!("state {} has no outgoing mass at step {t}", prev + 1))
            })?;
            states[t] = dist.sample(&mut rng) as u8 + 1;
        }
        table.add_index(shape.encode(&states), 1)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn homogeneous(initial: Vec<f64>, transition: Vec<Vec<f64>>) -> ModelParams {
        ModelParams::Homogeneous { initial, transition }
    }

    #[test]
    fn degenerate_chains() {
        let p = homogeneous(vec![1.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let t = simulate_paths(&p, 5, 4, 7).unwrap();
        assert_eq!(t, PathTable::from_digit_counts(t.shape(), &[("1111", 5)]).unwrap());

        let p = homogeneous(vec![0.0, 1.0], vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        let t = simulate_paths(&p, 9, 3, 1).unwrap();
        assert_eq!(t, PathTable::from_digit_counts(t.shape(), &[("211", 9)]).unwrap());
    }

    #[test]
    fn seeded_runs_repeat() {
        let p = homogeneous(vec![0.5, 0.5], vec![vec![0.7, 0.3], vec![0.4, 0.6]]);
        assert_eq!(simulate_paths(&p, 200, 5, 3).unwrap(), simulate_paths(&p, 200, 5, 3).unwrap());
        assert_ne!(simulate_paths(&p, 200, 5, 3).unwrap(), simulate_paths(&p, 200, 5, 4).unwrap());
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = homogeneous(vec![0.5, 0.6], vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(simulate_paths(&p, 1, 3, 0).is_err());
        let p = homogeneous(vec![0.5, 0.5], vec![vec![1.0, 0.1], vec![0.0, 1.0]]);
        assert!(p.validate().is_err());
        let p = ModelParams::Toric {
            gamma: vec![1.0, -1.0],
            beta: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        };
        assert!(p.validate().is_err());
        let p = ModelParams::Nonhomogeneous {
            initial: vec![0.5, 0.5],
            transitions: vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]],
        };
        assert!(simulate_paths(&p, 1, 4, 0).is_err());
    }

    #[test]
    fn toric_probabilities_normalise() {
        let p = ModelParams::Toric {
            gamma: vec![2.0, 1.0],
            beta: vec![vec![3.0, 1.0], vec![0.5, 2.0]],
        };
        let shape = Shape::new(2, 4).unwrap();
        let mut total = 0.0;
        for idx in shape.all_indices() {
            total += p.path_probability(&shape.decode(idx)).unwrap();
        }
        approx::assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);

        // Ratio of two path probabilities equals the ratio of raw products.
        let a = p.path_probability(&[1, 1, 2, 2]).unwrap();
        let b = p.path_probability(&[2, 1, 1, 1]).unwrap();
        let raw_a = 2.0 * 3.0 * 1.0 * 2.0;
        let raw_b = 1.0 * 0.5 * 3.0 * 3.0;
        approx::assert_relative_eq!(a / b, raw_a / raw_b, max_relative = 1e-12);
    }
}
