//! Linear readout `y = W_out·x` and its one-shot training.
//!
//! With `ridge == 0` the weights are `Y·pinv(X)`, the plain least-squares
//! solution over the harvested state matrix. With `ridge > 0` they are
//! `Y·Xᵀ·(X·Xᵀ + λI)⁻¹`, which stays well conditioned when noisy states make
//! `X` nearly rank deficient.

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ridge strength used when none is configured.
pub const DEFAULT_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub samples: usize,
    pub ridge: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutWeights {
    w_out: DMatrix<f64>,
    pub trained_on: TrainingInfo,
}

impl ReadoutWeights {
    pub fn new(w_out: DMatrix<f64>, trained_on: TrainingInfo) -> Result<Self> {
        if w_out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("readout weights"));
        }
        Ok(Self { w_out, trained_on })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w_out
    }

    /// Output dimension p.
    pub fn outputs(&self) -> usize {
        self.w_out.nrows()
    }

    /// Reservoir size n the weights were trained for.
    pub fn inputs(&self) -> usize {
        self.w_out.ncols()
    }

    /// `y = W_out·x`.
    pub fn apply(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.w_out.ncols() {
            return Err(Error::dim("readout state", self.w_out.ncols(), x.len()));
        }
        let mut y = DVector::zeros(self.w_out.nrows());
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.w_out.row(r).iter().zip(x).map(|(w, v)| w * v).sum();
        }
        Ok(y)
    }

    /// Applies the readout to every column of a state matrix.
    pub fn apply_matrix(&self, states: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if states.nrows() != self.w_out.ncols() {
            return Err(Error::dim("readout state rows", self.w_out.ncols(), states.nrows()));
        }
        Ok(&self.w_out * states)
    }
}

/// `y = W_out·x`.
pub fn readout(w: &ReadoutWeights, x: &[f64]) -> Result<DVector<f64>> {
    w.apply(x)
}

/// Default relative cutoff: `max(rows, cols) · ε`.
pub fn default_rcond(m: &DMatrix<f64>) -> f64 {
    m.nrows().max(m.ncols()) as f64 * f64::EPSILON
}

/// Moore-Penrose pseudo-inverse by SVD.
///
/// Singular values at or below `rcond · σ_max` are treated as zero;
/// `rcond = None` uses [`default_rcond`].
pub fn pinv(m: &DMatrix<f64>, rcond: Option<f64>) -> Result<DMatrix<f64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("pinv input"));
    }
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(DMatrix::zeros(cols, rows));
    }
    let rcond = rcond.unwrap_or_else(|| default_rcond(m));
    if !(rcond >= 0.0) {
        return Err(Error::InvalidParam(format!("pinv cutoff must be >= 0, got {rcond}")));
    }

    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::InvalidParam("SVD did not converge".into()))?;
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    let cutoff = rcond * sigma_max;

    // V · Σ⁺ · Uᵀ, skipping the zeroed singular directions.
    let mut out = DMatrix::zeros(cols, rows);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            let v_k = v_t.row(k).transpose();
            let u_k = u.column(k);
            out.ger(1.0 / s, &v_k, &u_k, 1.0);
        }
    }
    Ok(out)
}

/// One-shot readout training from harvested states `x` (n×T) and targets
/// `y` (p×T).
pub fn train_readout(x: &DMatrix<f64>, y: &DMatrix<f64>, ridge: f64) -> Result<ReadoutWeights> {
    let samples = x.ncols();
    if samples == 0 {
        return Err(Error::InvalidParam("training needs at least one sample".into()));
    }
    if y.ncols() != samples {
        return Err(Error::dim("target columns", samples, y.ncols()));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidParam(format!("ridge must be >= 0, got {ridge}")));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training data"));
    }

    let w_out = if ridge == 0.0 {
        y * pinv(x, None)?
    } else {
        let n = x.nrows();
        let gram = x * x.transpose() + DMatrix::identity(n, n) * ridge;
        let rhs = x * y.transpose();
        let solved = match gram.clone().cholesky() {
            Some(chol) => chol.solve(&rhs),
            None => gram
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::InvalidParam("ridge system is singular".into()))?,
        };
        solved.transpose()
    };

    ReadoutWeights::new(
        w_out,
        TrainingInfo {
            samples,
            ridge,
            seed: None,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use rand::Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_from(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    fn weights(m: DMatrix<f64>) -> ReadoutWeights {
        ReadoutWeights::new(m, TrainingInfo { samples: 0, ridge: 0.0, seed: None }).unwrap()
    }

    #[test]
    fn identity_readout() {
        let y = weights(DMatrix::identity(3, 3)).apply(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(y.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn zero_readout() {
        let y = weights(DMatrix::zeros(2, 3)).apply(&[4.0, -2.0, 9.0]).unwrap();
        assert_eq!(y.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn row_difference_readout() {
        let y = readout(&weights(DMatrix::from_row_slice(1, 2, &[1.0, -1.0])), &[0.5, 0.2]).unwrap();
        assert!((y[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn readout_dimension_mismatch() {
        assert!(matches!(
            weights(DMatrix::identity(3, 3)).apply(&[1.0, 2.0]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn pinv_of_rank_deficient_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let p = pinv(&m, None).unwrap();
        assert_eq!(p, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn pinv_of_identity() {
        let p = pinv(&DMatrix::identity(4, 4), None).unwrap();
        assert!(max_abs(&(p - DMatrix::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn pinv_matches_normal_equations_on_tall_full_rank() {
        let m = random(5, 3, 1);
        let oracle = (m.transpose() * &m).try_inverse().unwrap() * m.transpose();
        assert!(max_abs(&(pinv(&m, None).unwrap() - oracle)) < 1e-10);
    }

    #[test]
    fn pinv_rejects_nan() {
        let mut m = DMatrix::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(pinv(&m, None), Err(Error::NonFinite(_))));
    }

    #[test]
    fn pinv_of_empty_is_empty_transpose() {
        assert_eq!(pinv(&DMatrix::zeros(0, 3), None).unwrap().shape(), (3, 0));
    }

    #[test]
    fn training_on_identity_states_returns_targets() {
        let y = random(2, 4, 2);
        let w = train_readout(&DMatrix::identity(4, 4), &y, 0.0).unwrap();
        assert!(max_abs(&(w.matrix() - &y)) < 1e-12);
    }

    #[test]
    fn training_recovers_planted_weights() {
        let x = random(8, 60, 3);
        let planted = random(2, 8, 4);
        let y = &planted * &x;
        let w = train_readout(&x, &y, 0.0).unwrap();
        assert!(max_abs(&(w.matrix() - planted)) < 1e-8);
        assert_eq!(w.trained_on.samples, 60);
    }

    #[test]
    fn huge_ridge_shrinks_to_zero() {
        let x = random(5, 40, 5);
        let y = random(1, 40, 6);
        let w = train_readout(&x, &y, 1e15).unwrap();
        assert!(max_abs(w.matrix()) < 1e-12);
    }

    #[test]
    fn ridge_approaches_pinv_solution() {
        let x = random(6, 50, 7);
        let y = random(2, 50, 8);
        let exact = train_readout(&x, &y, 0.0).unwrap();
        let gaps: Vec<f64> = [1e-2, 1e-6, 1e-10]
            .iter()
            .map(|&l| max_abs(&(train_readout(&x, &y, l).unwrap().matrix() - exact.matrix())))
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] < 1e-8);
    }

    #[test]
    fn training_errors() {
        let x = DMatrix::zeros(3, 0);
        let y = DMatrix::zeros(1, 0);
        assert!(matches!(train_readout(&x, &y, 0.0), Err(Error::InvalidParam(_))));
        assert!(matches!(
            train_readout(&random(3, 10, 1), &random(1, 9, 2), 0.0),
            Err(Error::Dimension { .. })
        ));
        assert!(train_readout(&random(3, 10, 1), &random(1, 10, 2), -1.0).is_err());
    }
}
