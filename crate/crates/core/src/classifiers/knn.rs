//! Exact k-nearest-neighbour voting over the stored training matrix.
//!
//! Neighbours are ranked by `(distance, training row)`, so distance ties at
//! the k-th place go to the earlier row. A tied vote (even `k`) goes to the
//! class of the single nearest neighbour.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check_targets;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Squared Euclidean distance (same ranking as Euclidean).
    #[default]
    Euclidean,
    /// `1 - cos(a, b)`; a zero row has distance 1 to everything.
    Cosine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    train: FeatureMatrix,
    labels: Vec<u8>,
    norms: Vec<f64>,
    k: usize,
    metric: Metric,
}

pub fn knn_fit(x: &FeatureMatrix, y: &[u8], k: usize, metric: Metric) -> Result<KnnModel> {
    check_targets(x, y)?;
    if k == 0 {
        return Err(Error::Config("knn k must be >= 1".into()));
    }
    let norms = x.rows().iter().map(|r| norm(r)).collect();
    Ok(KnnModel {
        train: x.clone(),
        labels: y.to_vec(),
        norms,
        k,
        metric,
    })
}

fn norm(row: &[(usize, f64)]) -> f64 {
    row.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt()
}

/// `sum_i (a_i - b_i)^2` accumulated in ascending column order.
pub(crate) fn squared_euclidean(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < a.len() || j < b.len() {
        let d = match (a.get(i), b.get(j)) {
            (Some(&(ca, va)), Some(&(cb, vb))) => match ca.cmp(&cb) {
                Ordering::Less => {
                    i += 1;
                    va
                }
                Ordering::Greater => {
                    j += 1;
                    -vb
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    va - vb
                }
            },
            (Some(&(_, va)), None) => {
                i += 1;
                va
            }
            (None, Some(&(_, vb))) => {
                j += 1;
                -vb
            }
            (None, None) => unreachable!(),
        };
        acc += d * d;
    }
    acc
}

fn dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

impl KnnModel {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn n_train(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.train.n_cols()
    }

    /// `k` after clamping to the number of training rows.
    pub fn effective_k(&self) -> usize {
        self.k.min(self.n_train())
    }

    fn distance(&self, query: &[(usize, f64)], query_norm: f64, row: usize) -> f64 {
        let train = self.train.row(row);
        match self.metric {
            Metric::Euclidean => squared_euclidean(query, train),
            Metric::Cosine => {
                let denom = query_norm * self.norms[row];
                if denom == 0.0 {
                    1.0
                } else {
                    1.0 - dot(query, train) / denom
                }
            }
        }
    }

    /// Training rows of the `effective_k()` nearest neighbours, nearest first.
    pub fn neighbors(&self, query: &[(usize, f64)]) -> Vec<usize> {
        let qn = norm(query);
        let mut scored: Vec<(f64, usize)> = (0..self.n_train())
            .map(|r| (self.distance(query, qn, r), r))
            .collect();
        let k = self.effective_k();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_by(cmp);
        scored.into_iter().map(|(_, r)| r).collect()
    }

    fn vote(&self, neighbors: &[usize]) -> u8 {
        let ones = neighbors.iter().filter(|&&r| self.labels[r] == 1).count();
        match (2 * ones).cmp(&neighbors.len()) {
            Ordering::Greater => 1,
            Ordering::Less => 0,
            Ordering::Equal => self.labels[neighbors[0]],
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<u8>> {
        x.check_cols(self.n_features())?;
        if self.k > self.n_train() {
            log::warn!(
                "knn k = {} exceeds the {} training rows; using k = {}",
                self.k,
                self.n_train(),
                self.n_train()
            );
        }
        Ok(x.rows()
            .par_iter()
            .map(|q| self.vote(&self.neighbors(q)))
            .collect())
    }
}
