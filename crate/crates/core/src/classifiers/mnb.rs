//! Multinomial naive Bayes over nonnegative feature mass.
//!
//! Per class `c` the model keeps `log P(c) = log(n_c / n)` and, for each
//! feature `f`,
//!
//! ```text
//! P(f | c) = (mass_cf + alpha) / (mass_c + alpha * V)
//! ```
//!
//! where `mass_cf` sums the feature's weight over rows of class `c` and `V`
//! is the number of features. A row is scored by
//! `log P(c) + sum_f x_f * log P(f | c)`, summing only over the row's nonzero
//! entries so that a zero likelihood (possible with `alpha = 0`) never meets a
//! zero weight.

use serde::{Deserialize, Serialize};

use super::{check_targets, Explanation, FeatureWeight};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MnbModel {
    alpha: f64,
    class_count: [usize; 2],
    class_log_prior: [f64; 2],
    feature_log_prob: [Vec<f64>; 2],
}

pub fn mnb_fit(x: &FeatureMatrix, y: &[u8], alpha: f64) -> Result<MnbModel> {
    check_targets(x, y)?;
    let v = x.n_cols();
    let mut mass = [vec![0.0f64; v], vec![0.0f64; v]];
    let mut class_count = [0usize; 2];
    for (r, (row, &label)) in x.rows().iter().zip(y).enumerate() {
        let c = usize::from(label);
        class_count[c] += 1;
        for &(f, w) in row {
            if w < 0.0 {
                return Err(Error::NegativeFeature { row: r, col: f });
            }
            mass[c][f] += w;
        }
    }
    let n = y.len() as f64;
    let class_log_prior = class_count.map(|count| (count as f64 / n).ln());
    let feature_log_prob = mass.map(|m| {
        let total: f64 = m.iter().sum();
        let denom = total + alpha * v as f64;
        m.iter()
            .map(|&mf| {
                if denom > 0.0 {
                    ((mf + alpha) / denom).ln()
                } else {
                    // No mass and no smoothing: nothing distinguishes the features.
                    (1.0 / v as f64).ln()
                }
            })
            .collect()
    });
    Ok(MnbModel {
        alpha,
        class_count,
        class_log_prior,
        feature_log_prob,
    })
}

impl MnbModel {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_features(&self) -> usize {
        self.feature_log_prob[0].len()
    }

    pub fn class_count(&self) -> [usize; 2] {
        self.class_count
    }

    pub fn class_log_prior(&self) -> [f64; 2] {
        self.class_log_prior
    }

    pub fn feature_log_prob(&self, class: u8) -> &[f64] {
        &self.feature_log_prob[usize::from(class)]
    }

    /// True when training saw only one class; the model then always predicts it.
    pub fn is_constant(&self) -> bool {
        self.class_count.contains(&0)
    }

    /// Unnormalized log posterior per class.
    pub fn joint_log_likelihood(&self, x: &FeatureMatrix) -> Result<Vec<[f64; 2]>> {
        x.check_cols(self.n_features())?;
        Ok(x.rows()
            .iter()
            .map(|row| {
                [0, 1].map(|c| {
                    let flp = &self.feature_log_prob[c];
                    row.iter()
                        .filter(|&&(_, w)| w != 0.0)
                        .fold(self.class_log_prior[c], |acc, &(f, w)| acc + w * flp[f])
                })
            })
            .collect())
    }

    /// Labels (ties go to class 0) and posteriors that sum to one.
    pub fn predict_with_posterior(&self, x: &FeatureMatrix) -> Result<(Vec<u8>, Vec<[f64; 2]>)> {
        let jll = self.joint_log_likelihood(x)?;
        let labels = jll.iter().map(|s| u8::from(s[1] > s[0])).collect();
        let posteriors = jll
            .iter()
            .map(|s| {
                let m = s[0].max(s[1]);
                if m == f64::NEG_INFINITY {
                    return [0.5, 0.5];
                }
                let e = s.map(|v| (v - m).exp());
                let z = e[0] + e[1];
                e.map(|v| v / z)
            })
            .collect();
        Ok((labels, posteriors))
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        Ok(self.predict_with_posterior(x)?.0)
    }

    pub(super) fn explain(&self, top_n: usize, name: &dyn Fn(usize) -> String) -> Explanation {
        let ratio: Vec<f64> = self.feature_log_prob[1]
            .iter()
            .zip(&self.feature_log_prob[0])
            .map(|(a, b)| a - b)
            .collect();
        let mut order: Vec<usize> = (0..ratio.len()).filter(|&f| ratio[f].is_finite()).collect();
        order.sort_by(|&a, &b| ratio[b].total_cmp(&ratio[a]).then(a.cmp(&b)));
        let weight = |f: usize| FeatureWeight {
            feature: name(f),
            column: f,
            weight: ratio[f],
        };
        let toward_class1 = order.iter().take(top_n).map(|&f| weight(f)).collect();
        let toward_class0 = order.iter().rev().take(top_n).map(|&f| weight(f)).collect();
        Explanation::Mnb {
            class_count: self.class_count,
            toward_class1,
            toward_class0,
        }
    }
}
