//! Sum-of-squares error over a batch.
//!
//! For a `(b, n)` output `ψ` and target `t`, the per-element error is
//! `Ê = (t − ψ)² / (2b)`. The scalar objective is `E = ΣÊ`, which is the
//! batch mean of the per-item `½Σ(t − ψ)²`, so its magnitude does not depend
//! on batch size. With `b = 1` this is exactly the sequential `½Σ(t − ψ)²`.

use crate::error::{Error, Result};
use crate::tensor::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// `Ê`, shape `(b, n)`.
    pub per_element: Matrix,
    /// Row sums of `Ê`, one per batch item.
    pub per_row_total: Vec<f64>,
    /// Column means of `Ê`, one per output.
    pub per_output_mean: Vec<f64>,
    /// `ΣÊ`; the quantity backprop differentiates.
    pub total: f64,
}

pub fn sse(psi: &Matrix, targets: &Matrix) -> Result<ErrorReport> {
    if psi.shape() != targets.shape() {
        return Err(Error::shape("sse", psi.shape(), targets.shape()));
    }
    let (b, _) = psi.shape();
    if b == 0 {
        return Err(Error::InvalidArgument("error of an empty batch".into()));
    }
    let denom = 2.0 * b as f64;
    let per_element = targets.sub(psi)?.map(|d| d * d / denom);
    let per_row_total: Vec<f64> = per_element.iter_rows().map(|r| r.iter().sum()).collect();
    let per_output_mean = per_element
        .column_sums()
        .into_iter()
        .map(|s| s / b as f64)
        .collect();
    let total = per_row_total.iter().sum();
    Ok(ErrorReport {
        per_element,
        per_row_total,
        per_output_mean,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_at_targets() {
        let t = Matrix::new(2, 2, vec![0.1, 0.9, 0.4, 0.6]).unwrap();
        let r = sse(&t, &t).unwrap();
        assert_eq!(r.per_element, Matrix::zeros(2, 2));
        assert_eq!(r.total, 0.0);
        assert_eq!(r.per_row_total, vec![0.0, 0.0]);
        assert_eq!(r.per_output_mean, vec![0.0, 0.0]);
    }

    #[test]
    fn single_item_matches_sequential_form() {
        let psi = Matrix::new(1, 2, vec![0.5, 0.5]).unwrap();
        let t = Matrix::new(1, 2, vec![1.0, 0.0]).unwrap();
        let r = sse(&psi, &t).unwrap();
        // ½(1 − 0.5)² = 0.125 for each output.
        assert_eq!(r.per_element.as_slice(), &[0.125, 0.125]);
        assert_eq!(r.per_row_total, vec![0.25]);
        assert_eq!(r.total, 0.25);

        let psi = Matrix::new(1, 3, vec![0.2, 0.73, 0.51]).unwrap();
        let t = Matrix::new(1, 3, vec![0.9, 0.1, 0.5]).unwrap();
        let sequential: f64 = 0.5 * [0.7f64, -0.63, -0.01].iter().map(|d| d * d).sum::<f64>();
        assert!((sse(&psi, &t).unwrap().total - sequential).abs() < 1e-16);
    }

    #[test]
    fn batch_scaling_and_reductions() {
        let psi = Matrix::new(2, 2, vec![0.5, 0.5, 0.2, 0.8]).unwrap();
        let t = Matrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let r = sse(&psi, &t).unwrap();
        // (t−ψ)²/4
        let expected = [0.0625, 0.0625, 0.01, 0.01];
        for (a, e) in r.per_element.as_slice().iter().zip(expected) {
            assert!((a - e).abs() < 1e-17);
        }
        assert!((r.per_row_total[0] - 0.125).abs() < 1e-17);
        assert!((r.per_row_total[1] - 0.02).abs() < 1e-17);
        assert!((r.per_output_mean[0] - 0.03625).abs() < 1e-17);
        assert!((r.total - 0.145).abs() < 1e-16);
    }

    #[test]
    fn shape_mismatch() {
        assert!(sse(&Matrix::zeros(2, 2), &Matrix::zeros(2, 1)).is_err());
    }

    fn pair() -> impl Strategy<Value = (Matrix, Matrix)> {
        (1usize..6, 1usize..4).prop_flat_map(|(b, n)| {
            (
                prop::collection::vec(0.0f64..1.0, b * n),
                prop::collection::vec(0.0f64..1.0, b * n),
            )
                .prop_map(move |(p, t)| {
                    (Matrix::new(b, n, p).unwrap(), Matrix::new(b, n, t).unwrap())
                })
        })
    }

    proptest! {
        #[test]
        fn non_negative_and_symmetric((psi, t) in pair()) {
            let r = sse(&psi, &t).unwrap();
            prop_assert!(r.per_element.as_slice().iter().all(|&v| v >= 0.0));
            prop_assert!(r.per_row_total.iter().chain(&r.per_output_mean).all(|&v| v >= 0.0));
            prop_assert!(r.total >= 0.0);
            prop_assert_eq!(r.total, sse(&t, &psi).unwrap().total);
        }

        #[test]
        fn row_permutation((psi, t) in pair(), shift in 0usize..6) {
            let b = psi.rows();
            let order: Vec<usize> = (0..b).map(|i| (i + shift) % b).collect();
            let permute = |m: &Matrix| {
                let rows: Vec<Vec<f64>> = order.iter().map(|&i| m.row(i).to_vec()).collect();
                Matrix::from_rows(&rows).unwrap()
            };
            let r = sse(&psi, &t).unwrap();
            let p = sse(&permute(&psi), &permute(&t)).unwrap();
            let expected_rows: Vec<f64> = order.iter().map(|&i| r.per_row_total[i]).collect();
            prop_assert_eq!(p.per_row_total, expected_rows);
            for (a, b) in p.per_output_mean.iter().zip(&r.per_output_mean) {
                prop_assert!((a - b).abs() <= 1e-15);
            }
            prop_assert!((p.total - r.total).abs() <= 1e-15);
        }
    }
}
