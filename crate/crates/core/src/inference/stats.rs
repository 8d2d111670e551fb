//! Goodness-of-fit statistics and their reference distributions.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::fit::{fit_thmc_mle, FitOptions, SliceFit, ThmcFit};
use crate::config::{degrees_of_freedom, DEFAULT_CELL_CAP};
use crate::error::{Error, Result};
use crate::path::Shape;
use crate::table::PathTable;

/// Cells with a fitted value at or below this are treated as structural
/// zeros.
pub const CELL_EPSILON: f64 = 1e-9;

/// Goodness-of-fit statistic for THMC.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    /// Pearson distance between the non-homogeneous fit and the THMC fit,
    /// `Σ_ω (m̂₁ − m̂₀)²/m̂₀`.
    #[default]
    Pearson,
    /// Pearson distance between the data and the THMC fit over all cells.
    PearsonFull,
    /// Per-step transition counts against pooled transition probabilities.
    AndersonGoodman,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::Pearson, Statistic::PearsonFull, Statistic::AndersonGoodman];

    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Pearson => "pearson",
            Statistic::PearsonFull => "pearson-full",
            Statistic::AndersonGoodman => "anderson-goodman",
        }
    }

    /// Degrees of freedom of the asymptotic chi-square reference.
    ///
    /// The Pearson forms use `rank(non-homogeneous design) − rank(A)`;
    /// Anderson–Goodman uses `(T − 2)·S·(S − 1)`.
    pub fn degrees_of_freedom(&self, shape: Shape) -> Result<usize> {
        match self {
            Statistic::Pearson | Statistic::PearsonFull => degrees_of_freedom(shape, DEFAULT_CELL_CAP),
            Statistic::AndersonGoodman => {
                let s = shape.states();
                Ok((shape.length() - 2) * s * (s - 1))
            }
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown statistic {s:?}")))
    }
}

/// Evaluates one statistic on tables of a fixed fiber.
///
/// The THMC fit depends only on the sufficient statistic, so it is
/// computed once from the reference table and reused.
#[derive(Clone, Debug)]
pub struct Evaluator {
    statistic: Statistic,
    fit: ThmcFit,
    /// Dense `m̂₀` when the shape is small enough, else computed per cell.
    dense: Option<Vec<f64>>,
    /// `Σ m̂₀` over cells above the epsilon.
    mass: f64,
    /// Pooled transition probabilities, row-major.
    pooled: Vec<f64>,
}

impl Evaluator {
    pub fn new(statistic: Statistic, reference: &PathTable, options: FitOptions) -> Result<Self> {
        let fit = fit_thmc_mle(reference, options)?;
        let shape = reference.shape();
        let dense = fit.dense(DEFAULT_CELL_CAP).ok();
        let mass = match &dense {
            Some(d) => d.iter().filter(|m| **m > CELL_EPSILON).sum(),
            None => reference.total() as f64,
        };
        let s = shape.states();
        let b = reference.suff_stat();
        let mut pooled = vec![0.0; s * s];
        for i in 0..s {
            let row: u64 = (0..s).map(|j| b.transitions()[i * s + j]).sum();
            for j in 0..s {
                if row > 0 {
                    pooled[i * s + j] = b.transitions()[i * s + j] as f64 / row as f64;
                }
            }
        }
        Ok(Evaluator { statistic, fit, dense, mass, pooled })
    }

    pub fn statistic(&self) -> Statistic {
        self.statistic
    }

    pub fn fit(&self) -> &ThmcFit {
        &self.fit
    }

    fn null_fit(&self, index: u64, states: &[u8]) -> f64 {
        match &self.dense {
            Some(d) => d[index as usize],
            None => self.fit.fitted(states),
        }
    }

    /// Value of the statistic on `table`; `+∞` when an observed or
    /// alternative-fit cell has null fit at or below [`CELL_EPSILON`].
    pub fn evaluate(&self, table: &PathTable) -> f64 {
        let shape = self.fit.shape();
        match self.statistic {
            Statistic::Pearson => {
                let mut acc = 0.0;
                let mut infinite = false;
                SliceFit::new(table).for_each_support(|states, m1| {
                    let m0 = self.null_fit(shape.encode(states), states);
                    if m0 > CELL_EPSILON {
                        acc += (m1 - m0) * (m1 - m0) / m0 - m0;
                    } else {
                        infinite = true;
                    }
                });
                if infinite {
                    f64::INFINITY
                } else {
                    (acc + self.mass).max(0.0)
                }
            }
            Statistic::PearsonFull => {
                let mut acc = 0.0;
                let mut buf = vec![0u8; shape.length()];
                for (index, count) in table.iter() {
                    shape.decode_into(index, &mut buf);
                    let m0 = self.null_fit(index, &buf);
                    if m0 <= CELL_EPSILON {
                        return f64::INFINITY;
                    }
                    let x = count as f64;
                    acc += (x - m0) * (x - m0) / m0 - m0;
                }
                (acc + self.mass).max(0.0)
            }
            Statistic::AndersonGoodman => {
                let s = shape.states();
                let edges = table.edge_counts();
                let mut acc = 0.0;
                for slice in edges.chunks(s * s) {
                    for i in 0..s {
                        let row: u64 = slice[i * s..(i + 1) * s].iter().sum();
                        for j in 0..s {
                            let expected = row as f64 * self.pooled[i * s + j];
                            let observed = slice[i * s + j] as f64;
                            if expected > CELL_EPSILON {
                                acc += (observed - expected).powi(2) / expected;
                            } else if observed > 0.0 {
                                return f64::INFINITY;
                            }
                        }
                    }
                }
                acc
            }
        }
    }
}

/// Upper tail `P(χ²_df ≥ x)`.
pub fn asymptotic_p(chi2: f64, df: usize) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidParams("chi-square needs df >= 1".into()));
    }
    if chi2.is_nan() {
        return Err(Error::InvalidParams("statistic is NaN".into()));
    }
    if chi2 <= 0.0 {
        return Ok(1.0);
    }
    if chi2.is_infinite() {
        return Ok(0.0);
    }
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::InvalidParams(e.to_string()))?;
    Ok(dist.sf(chi2).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_tails() {
        for x in [1.0f64, 2.0, 5.0] {
            assert_abs_diff_eq!(asymptotic_p(x, 2).unwrap(), (-x / 2.0).exp(), epsilon = 1e-12);
            assert_abs_diff_eq!(
                asymptotic_p(x, 4).unwrap(),
                (-x / 2.0).exp() * (1.0 + x / 2.0),
                epsilon = 1e-12
            );
        }
        assert_eq!(asymptotic_p(0.0, 3).unwrap(), 1.0);
        assert_eq!(asymptotic_p(f64::INFINITY, 3).unwrap(), 0.0);
        assert!(asymptotic_p(1.0, 0).is_err());
    }

    #[test]
    fn names_round_trip() {
        for s in Statistic::ALL {
            assert_eq!(s.name().parse::<Statistic>().unwrap(), s);
        }
        assert!("chi".parse::<Statistic>().is_err());
    }

    #[test]
    fn model_table_scores_zero() {
        // a single path type satisfies both models exactly
        let sh = Shape::new(2, 4).unwrap();
        let x = PathTable::from_digit_counts(sh, &[("1212", 5)]).unwrap();
        for s in Statistic::ALL {
            let e = Evaluator::new(s, &x, FitOptions::default()).unwrap();
            assert_abs_diff_eq!(e.evaluate(&x), 0.0, epsilon = 1e-7);
        }
    }
}
