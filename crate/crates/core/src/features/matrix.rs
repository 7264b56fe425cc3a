use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse row: `(column, weight)` pairs with strictly increasing columns.
pub type SparseRow = Vec<(usize, f64)>;

/// Row-major sparse matrix of nonnegative document weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    n_cols: usize,
    rows: Vec<SparseRow>,
}

impl FeatureMatrix {
    pub fn new(n_cols: usize, rows: Vec<SparseRow>) -> Result<FeatureMatrix> {
        for (r, row) in rows.iter().enumerate() {
            for w in row.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(Error::BadColumns(format!(
                        "row {r} columns not strictly increasing"
                    )));
                }
            }
            if let Some(&(c, _)) = row.last() {
                if c >= n_cols {
                    return Err(Error::BadColumns(format!("row {r} column {c} >= {n_cols}")));
                }
            }
        }
        Ok(FeatureMatrix { n_cols, rows })
    }

    /// Builds from dense rows, dropping zeros.
    pub fn from_dense(n_cols: usize, dense: &[Vec<f64>]) -> Result<FeatureMatrix> {
        let rows = dense
            .iter()
            .map(|r| {
                if r.len() != n_cols {
                    return Err(Error::DimensionMismatch {
                        expected: n_cols,
                        got: r.len(),
                    });
                }
                Ok(r.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(c, &v)| (c, v))
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureMatrix { n_cols, rows })
    }

    pub fn empty(n_cols: usize) -> FeatureMatrix {
        FeatureMatrix {
            n_cols,
            rows: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![0.0; self.n_cols];
                for &(c, v) in row {
                    d[c] = v;
                }
                d
            })
            .collect()
    }

    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            n_cols: self.n_cols,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Column slice onto `cols` (ascending). Rows are not re-normalized.
    pub fn project(&self, cols: &[usize]) -> Result<FeatureMatrix> {
        if cols.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadColumns(
                "columns must be strictly ascending".into(),
            ));
        }
        if let Some(&last) = cols.last() {
            if last >= self.n_cols {
                return Err(Error::BadColumns(format!(
                    "column {last} >= {}",
                    self.n_cols
                )));
            }
        }
        let mut remap = vec![usize::MAX; self.n_cols];
        for (new, &old) in cols.iter().enumerate() {
            remap[old] = new;
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .filter_map(|&(c, v)| (remap[c] != usize::MAX).then_some((remap[c], v)))
                    .collect()
            })
            .collect();
        Ok(FeatureMatrix {
            n_cols: cols.len(),
            rows,
        })
    }

    /// Column-major copy: for each column, `(row, value)` pairs.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                cols[c].push((r, v));
            }
        }
        cols
    }

    pub(crate) fn check_cols(&self, expected: usize) -> Result<()> {
        if self.n_cols != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.n_cols,
            });
        }
        Ok(())
    }
}

pub fn project(x: &FeatureMatrix, cols: &[usize]) -> Result<FeatureMatrix> {
    x.project(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn project_examples() {
        let x = FeatureMatrix::from_dense(2, &[vec![0.6, 0.8], vec![0.0, 0.0], vec![1.0, 0.0]])
            .unwrap();
        assert_eq!(x.project(&[0, 1]).unwrap(), x);
        let p = x.project(&[1]).unwrap();
        assert_eq!(p.to_dense(), [vec![0.8], vec![0.0], vec![0.0]]);
        assert!(p.row(2).is_empty());
        assert!(matches!(x.project(&[1, 0]), Err(Error::BadColumns(_))));
        assert!(matches!(x.project(&[2]), Err(Error::BadColumns(_))));
    }

    #[test]
    fn new_validates_rows() {
        assert!(FeatureMatrix::new(3, vec![vec![(2, 1.0), (1, 1.0)]]).is_err());
        assert!(FeatureMatrix::new(3, vec![vec![(3, 1.0)]]).is_err());
        assert!(FeatureMatrix::new(3, vec![vec![(0, 1.0), (2, 1.0)]]).is_ok());
    }

    #[test]
    fn columns_transpose() {
        let x = FeatureMatrix::from_dense(2, &[vec![1.0, 0.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(x.columns(), [vec![(0, 1.0), (1, 2.0)], vec![(1, 3.0)]]);
    }
}
