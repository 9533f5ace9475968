//! Batch-means standard errors and goodness-of-fit helpers for the
//! Monte-Carlo gates.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

use crate::error::{Error, Result};

/// Batches used for batch-means standard errors.
pub const DEFAULT_BATCHES: usize = 30;

/// Point estimate with a batch-means standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchEstimate {
    /// Statistic over the full series.
    pub estimate: f64,
    pub se: f64,
    pub batches: usize,
}

impl BatchEstimate {
    /// `|estimate - target| / se`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.estimate - target).abs() / self.se
    }
}

/// Apply `stat` to the full series and to `batches` contiguous blocks; the
/// standard error is the block standard deviation over `sqrt(batches)`.
pub fn batch_means<T, F>(data: &[T], batches: usize, stat: F) -> Result<BatchEstimate>
where
    F: Fn(&[T]) -> f64,
{
    if batches < 2 || data.len() < 2 * batches {
        return Err(Error::InvalidArgument(format!(
            "{} observations cannot form {batches} batches",
            data.len()
        )));
    }
    let size = data.len() / batches;
    let vals: Vec<f64> = (0..batches)
        .map(|b| stat(&data[b * size..(b + 1) * size]))
        .collect();
    let mean = vals.iter().sum::<f64>() / batches as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok(BatchEstimate {
        estimate: stat(data),
        se: (var / batches as f64).sqrt(),
        batches,
    })
}

/// Chi-square goodness of fit against `Binomial(m, p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareFit {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub observations: usize,
    /// Pooled cells as `(first value, last value, observed, expected)`.
    pub cells: Vec<(u32, u32, u64, f64)>,
}

/// Pools adjacent values until every cell expects at least five counts.
pub fn chi_square_binomial(values: &[u32], m: u32, p: f64) -> Result<ChiSquareFit> {
    let n = values.len();
    let dist = Binomial::new(p, m as u64)
        .map_err(|e| Error::InvalidArgument(format!("binomial({m}, {p}): {e}")))?;
    let mut observed = vec![0u64; m as usize + 1];
    for &v in values {
        if v > m {
            return Err(Error::InvalidArgument(format!("count {v} exceeds M = {m}")));
        }
        observed[v as usize] += 1;
    }
    let mut cells: Vec<(u32, u32, u64, f64)> = Vec::new();
    let mut cur: Option<(u32, u32, u64, f64)> = None;
    for y in 0..=m {
        let e = n as f64 * dist.pmf(y as u64);
        let o = observed[y as usize];
        let c = match cur.take() {
            Some((a, _, co, ce)) => (a, y, co + o, ce + e),
            None => (y, y, o, e),
        };
        if c.3 >= 5.0 {
            cells.push(c);
        } else {
            cur = Some(c);
        }
    }
    if let Some(rest) = cur {
        match cells.last_mut() {
            Some(last) => {
                last.1 = rest.1;
                last.2 += rest.2;
                last.3 += rest.3;
            }
            None => cells.push(rest),
        }
    }
    if cells.len() < 2 {
        return Err(Error::InvalidArgument(
            "too few observations for a chi-square test".into(),
        ));
    }
    let statistic = cells
        .iter()
        .map(|&(_, _, o, e)| (o as f64 - e).powi(2) / e)
        .sum::<f64>();
    let dof = cells.len() - 1;
    let chi = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Ok(ChiSquareFit {
        statistic,
        dof,
        p_value: chi.sf(statistic),
        observations: n,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_means_of_constant_has_zero_se() {
        let est = batch_means(&[2.0f64; 300], 30, |x| {
            x.iter().sum::<f64>() / x.len() as f64
        })
        .unwrap();
        assert_eq!(est.estimate, 2.0);
        assert_eq!(est.se, 0.0);
        assert!(batch_means(&[1.0f64; 10], 30, |_| 0.0).is_err());
    }

    #[test]
    fn exact_binomial_counts_fit() {
        // 16 draws laid out exactly as Binomial(4, 1/2) frequencies, repeated
        let pattern = [0u32, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 4];
        let values: Vec<u32> = pattern.iter().cycle().take(16 * 100).copied().collect();
        let fit = chi_square_binomial(&values, 4, 0.5).unwrap();
        assert!(fit.statistic < 1e-9);
        assert!(fit.p_value > 0.999);
        assert_eq!(fit.dof, 4);
    }

    #[test]
    fn wrong_binomial_is_rejected() {
        let values = vec![4u32; 1000];
        let fit = chi_square_binomial(&values, 4, 0.5).unwrap();
        assert!(fit.p_value < 1e-10);
        assert!(chi_square_binomial(&[5], 4, 0.5).is_err());
    }
}
