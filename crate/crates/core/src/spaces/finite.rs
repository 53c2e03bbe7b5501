use serde::{Deserialize, Serialize};

use super::SpaceError;

// Relative slack for the triangle scan, so matrices produced by float
// arithmetic are not rejected over the last bit.
const TRIANGLE_REL_TOL: f64 = 1e-12;

/// A validated distance matrix on the points `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixDocument", into = "MatrixDocument")]
pub struct FiniteMetric {
    n: usize,
    entries: Vec<f64>,
}

/// JSON form: `{"matrix": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDocument {
    matrix: Vec<Vec<f64>>,
}

impl TryFrom<MatrixDocument> for FiniteMetric {
    type Error = SpaceError;

    fn try_from(doc: MatrixDocument) -> Result<Self, SpaceError> {
        FiniteMetric::new(doc.matrix)
    }
}

impl From<FiniteMetric> for MatrixDocument {
    fn from(m: FiniteMetric) -> Self {
        MatrixDocument { matrix: m.rows() }
    }
}

impl FiniteMetric {
    /// Checks shape, entries, zero diagonal, positivity off the diagonal,
    /// symmetry, and every triangle `d(i,k) <= d(i,j) + d(j,k)`.
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self, SpaceError> {
        let n = matrix.len();
        if n == 0 {
            return Err(SpaceError::Empty);
        }
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != n {
                return Err(SpaceError::NotSquare {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
            for (j, &value) in r.iter().enumerate() {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(SpaceError::BadEntry { i: row, j, value });
                }
            }
        }
        for (i, row) in matrix.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(SpaceError::NonZeroDiagonal { i, value: row[i] });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (dij, dji) = (matrix[i][j], matrix[j][i]);
                if dij != dji {
                    return Err(SpaceError::Asymmetric { i, j, dij, dji });
                }
                if dij == 0.0 {
                    return Err(SpaceError::ZeroDistance { i, j });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let dik = matrix[i][k];
                    let sum = matrix[i][j] + matrix[j][k];
                    if dik > sum * (1.0 + TRIANGLE_REL_TOL) {
                        return Err(SpaceError::Triangle { i, j, k, dik, sum });
                    }
                }
            }
        }
        Ok(Self {
            n,
            entries: matrix.into_iter().flatten().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}
