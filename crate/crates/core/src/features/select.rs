use serde::{Deserialize, Serialize};

use super::matrix::FeatureMatrix;
use crate::error::{Error, Result};

/// Per-feature chi-squared association with a binary target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chi2Scores(pub Vec<f64>);

impl Chi2Scores {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Elementwise maximum, used to share one selection across several targets.
    pub fn max_with(&mut self, other: &Chi2Scores) {
        for (a, &b) in self.0.iter_mut().zip(&other.0) {
            *a = a.max(b);
        }
    }
}

/// Observed class mass against the mass expected from class proportions.
///
/// For feature `f`, `O_c` is the summed weight of `f` over rows of class `c`
/// and `E_c = (rows in c / rows) * (total weight of f)`. The score is
/// `sum_c (O_c - E_c)^2 / E_c`, skipping classes with no rows. Columns with
/// no mass score 0.
pub fn chi2_scores(x: &FeatureMatrix, y: &[u8]) -> Result<Chi2Scores> {
    if x.n_rows() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} rows but {} targets",
            x.n_rows(),
            y.len()
        )));
    }
    let n_cols = x.n_cols();
    let mut observed = [vec![0.0f64; n_cols], vec![0.0f64; n_cols]];
    let mut class_rows = [0usize; 2];
    for (r, (row, &label)) in x.rows().iter().zip(y).enumerate() {
        let class = usize::from(label != 0);
        class_rows[class] += 1;
        for &(c, v) in row {
            if v < 0.0 {
                return Err(Error::NegativeFeature { row: r, col: c });
            }
            observed[class][c] += v;
        }
    }
    let n = y.len() as f64;
    let scores = (0..n_cols)
        .map(|f| {
            let total = observed[0][f] + observed[1][f];
            if total == 0.0 {
                return 0.0;
            }
            (0..2)
                .filter(|&c| class_rows[c] > 0)
                .map(|c| {
                    let expected = class_rows[c] as f64 / n * total;
                    let diff = observed[c][f] - expected;
                    diff * diff / expected
                })
                .sum()
        })
        .collect();
    Ok(Chi2Scores(scores))
}

/// Columns of the `k` highest scores, ties to the lower column, returned ascending.
pub fn select_k_best(scores: &Chi2Scores, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > scores.len() {
        return Err(Error::KOutOfRange {
            k,
            max: scores.len(),
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores.0[b].total_cmp(&scores.0[a]).then(a.cmp(&b)));
    let mut chosen = order[..k].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}
