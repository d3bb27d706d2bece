//! RMSE and classification accuracy.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// sqrt( (1/(N m)) * sum of squared entrywise errors )
pub fn rmse(pred: &Matrix, target: &Matrix) -> Result<f64> {
    if pred.rows() != target.rows() || pred.cols() != target.cols() {
        return Err(Error::DimensionMismatch(format!(
            "rmse over {}x{} vs {}x{}",
            pred.rows(),
            pred.cols(),
            target.rows(),
            target.cols()
        )));
    }
    Ok(residual_rmse(&pred.sub(target)?))
}

/// RMSE of an already-formed residual matrix.
pub fn residual_rmse(residual: &Matrix) -> f64 {
    let n = residual.rows() * residual.cols();
    if n == 0 {
        return 0.0;
    }
    residual.frob_norm() / (n as f64).sqrt()
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

/// Fraction of rows whose prediction argmax hits the one-hot target argmax.
/// Ties break to the lowest index.
pub fn accuracy(pred: &Matrix, target_onehot: &Matrix) -> Result<f64> {
    if pred.rows() != target_onehot.rows() || pred.cols() != target_onehot.cols() {
        return Err(Error::DimensionMismatch(
            "accuracy shape mismatch".into(),
        ));
    }
    if pred.rows() == 0 {
        return Ok(0.0);
    }
    let hits = (0..pred.rows())
        .filter(|&i| argmax(pred.row(i)) == argmax(target_onehot.row(i)))
        .count();
    Ok(hits as f64 / pred.rows() as f64)
}
