//! Fixtures shared by the criterion benches.

use batchprop::rng::SeededRng;
use batchprop::Matrix;

/// Uniform `[-1, 1)` matrix from `seed`.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = SeededRng::new(seed);
    Matrix::new(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0)).collect(),
    )
    .expect("finite values")
}

/// Targets uniform in `[0, 1)`.
pub fn random_targets(rows: usize, cols: usize, seed: u64) -> Matrix {
    random_matrix(rows, cols, seed).map(|v| 0.5 * (v + 1.0))
}
