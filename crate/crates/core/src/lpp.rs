//! Directed last-passage percolation with Exponential(1) weights.
//!
//! `G(i, j) = w(i, j) + max(G(i-1, j), G(i, j-1))`. In the exclusion process
//! started from a step, `G(i, j)` is the time of the `j`-th jump of the
//! `i`-th particle from the right, which makes `G(yn, (1-y)n)` an
//! independent sample of a finishing-time proxy.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::clock::{Domain, StreamKey};
use crate::error::{invalid, Result};
use crate::limits::tw_scaling;

/// A weight array with its passage times, both `rows × cols`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LppGrid {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub passage: Vec<f64>,
}

impl LppGrid {
    pub fn from_weights(rows: usize, cols: usize, weights: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid("grid needs at least one row and one column");
        }
        if weights.len() != rows * cols {
            return invalid(format!("expected {} weights, got {}", rows * cols, weights.len()));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return invalid("weights must be nonnegative");
        }
        let mut passage = vec![0.0f64; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                let up = if i > 0 { passage[(i - 1) * cols + j] } else { 0.0 };
                let left = if j > 0 { passage[i * cols + j - 1] } else { 0.0 };
                passage[i * cols + j] = weights[i * cols + j] + up.max(left);
            }
        }
        Ok(LppGrid { rows, cols, weights, passage })
    }

    /// Weights drawn row by row from the seeded stream, as in [`lpp_time`].
    pub fn sample(rows: usize, cols: usize, key: StreamKey) -> Result<Self> {
        let mut rng = key.rng(Domain::LppWeights, 0);
        let weights = (0..rows * cols).map(|_| Exp1.sample(&mut rng)).collect();
        Self::from_weights(rows, cols, weights)
    }

    /// `G(i, j)` with 1-based indices.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.passage[(i - 1) * self.cols + (j - 1)]
    }

    pub fn last(&self) -> f64 {
        *self.passage.last().expect("nonempty grid")
    }

    pub fn transpose(&self) -> Self {
        let mut w = vec![0.0; self.weights.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                w[j * self.rows + i] = self.weights[i * self.cols + j];
            }
        }
        Self::from_weights(self.cols, self.rows, w).expect("transposed weights are valid")
    }
}

/// `G(rows, cols)` keeping one row of passage times.
pub fn lpp_time_from<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Result<f64> {
    if rows == 0 || cols == 0 {
        return invalid("grid needs at least one row and one column");
    }
    let mut row = vec![0.0f64; cols];
    for _ in 0..rows {
        let mut left = 0.0f64;
        for g in row.iter_mut() {
            let w: f64 = Exp1.sample(rng);
            left = w + left.max(*g);
            *g = left;
        }
    }
    Ok(row[cols - 1])
}

/// `G(rows, cols)` for the weights keyed by `(seed, replicate)`.
pub fn lpp_time(rows: usize, cols: usize, seed: u64, replicate: u64) -> Result<f64> {
    lpp_time_from(rows, cols, &mut StreamKey::new(seed, replicate).rng(Domain::LppWeights, 0))
}

/// `(G - γ_y n) / scale(y, n)` for a grid of shape `(k or k-1, n-k or n-k+1)`
/// with `k = round(yn)`, in either orientation.
pub fn johansson_scaled(g: f64, y: f64, n: usize, dims: (usize, usize)) -> Result<f64> {
    let t = tw_scaling(y, n as f64)?;
    let k = (y * n as f64).round() as usize;
    let rest = n.saturating_sub(k);
    let ok = |a: usize, b: usize| (a == k || a + 1 == k) && (b == rest || b == rest + 1);
    if !(ok(dims.0, dims.1) || ok(dims.1, dims.0)) {
        return invalid(format!("grid {}x{} does not match y = {y}, n = {n}", dims.0, dims.1));
    }
    Ok((g - t.center) / t.scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let g = LppGrid::sample(1, 1, StreamKey::new(3, 0)).unwrap();
        assert_eq!(g.last(), g.weights[0]);
        assert_eq!(lpp_time(1, 1, 3, 0).unwrap(), g.last());
    }

    #[test]
    fn unit_weights_count_path_length() {
        let g = LppGrid::from_weights(4, 7, vec![1.0; 28]).unwrap();
        assert_eq!(g.last(), 10.0);
    }

    #[test]
    fn rolling_row_matches_full_grid() {
        for rep in 0..5 {
            let g = LppGrid::sample(13, 29, StreamKey::new(1, rep)).unwrap();
            assert_eq!(lpp_time(13, 29, 1, rep).unwrap(), g.last());
            for i in 1..=13 {
                for j in 1..=29 {
                    if i > 1 {
                        assert!(g.at(i, j) >= g.at(i - 1, j));
                    }
                    if j > 1 {
                        assert!(g.at(i, j) >= g.at(i, j - 1));
                    }
                }
            }
        }
    }

    #[test]
    fn transpose_transposes_passage() {
        let g = LppGrid::sample(6, 9, StreamKey::new(2, 0)).unwrap();
        let t = g.transpose();
        for i in 1..=6 {
            for j in 1..=9 {
                assert_eq!(g.at(i, j), t.at(j, i));
            }
        }
    }

    #[test]
    fn scaling_checks() {
        assert_eq!(johansson_scaled(4000.0, 0.5, 2000, (1000, 1000)).unwrap(), 0.0);
        assert!(johansson_scaled(4000.0, 0.5, 2000, (999, 1000)).is_ok());
        assert!(johansson_scaled(4000.0, 0.5, 2000, (1000, 1001)).is_ok());
        assert!(johansson_scaled(4000.0, 0.5, 2000, (1000, 1002)).is_err());
        assert!(johansson_scaled(4000.0, 0.5, 2000, (900, 1000)).is_err());
        let a = johansson_scaled(1700.0, 0.3, 1000, (300, 700)).unwrap();
        let b = johansson_scaled(1700.0, 0.7, 1000, (300, 700)).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(LppGrid::from_weights(2, 2, vec![1.0; 3]).is_err());
    }
}
