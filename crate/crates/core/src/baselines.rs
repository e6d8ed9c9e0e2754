//! Closed-form predictors for the Gaussian process with covariance
//! `e^{-|t|/2}`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::objective::ForecastDesign;

/// Second-order structure of `(X(t), X(T_f))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSecondOrder {
    /// Covariance matrix of the forecast sample.
    pub cov: DMatrix<f64>,
    /// Covariances between the target and each forecast point.
    pub cross: DVector<f64>,
    pub target_variance: f64,
}

impl GaussianSecondOrder {
    pub fn new(cov: DMatrix<f64>, cross: DVector<f64>, target_variance: f64) -> Result<Self> {
        let n = cov.nrows();
        if cov.ncols() != n {
            return Err(Error::LengthMismatch { left: n, right: cov.ncols() });
        }
        if cross.len() != n {
            return Err(Error::LengthMismatch { left: n, right: cross.len() });
        }
        if !(target_variance > 0.0) || !target_variance.is_finite() {
            return Err(Error::InvalidParameter(format!("target variance must be > 0, got {target_variance}")));
        }
        if (&cov - cov.transpose()).amax() > 1e-12 {
            return Err(Error::InvalidParameter("covariance matrix is not symmetric".into()));
        }
        Ok(Self {
            cov,
            cross,
            target_variance,
        })
    }

    fn cholesky(&self) -> Result<Cholesky<f64, Dyn>> {
        Cholesky::new(self.cov.clone()).ok_or(Error::SingularCovariance)
    }

    /// Correlation between `X(t)` and `λᵀX(T_f)`.
    pub fn correlation(&self, lambda: &[f64]) -> f64 {
        let l = DVector::from_column_slice(lambda);
        let var = (l.transpose() * &self.cov * &l)[0];
        l.dot(&self.cross) / (var * self.target_variance).sqrt()
    }
}

/// `Σ_ij = e^{-|t_i − t_j|/2}`, `c_i = e^{-|t − t_i|/2}`, unit variance.
pub fn covariances_exp(design: &ForecastDesign) -> Result<GaussianSecondOrder> {
    let pts = &design.forecast_points;
    let c = |d: f64| (-d.abs() / 2.0).exp();
    let n = pts.len();
    let cov = DMatrix::from_fn(n, n, |i, j| c(pts[i] - pts[j]));
    let cross = DVector::from_iterator(n, pts.iter().map(|p| c(design.target - p)));
    GaussianSecondOrder::new(cov, cross, 1.0)
}

/// Simple kriging weights `Σ⁻¹c`.
pub fn simple_kriging_weights(so: &GaussianSecondOrder) -> Result<Vec<f64>> {
    Ok(so.cholesky()?.solve(&so.cross).as_slice().to_vec())
}

/// Weights minimizing the excursion metric among linear predictors with the
/// target's variance: `σ_t Σ⁻¹c / √(cᵀΣ⁻¹c)`.
pub fn exact_excursion_weights(so: &GaussianSecondOrder) -> Result<Vec<f64>> {
    let w = so.cholesky()?.solve(&so.cross);
    let q = so.cross.dot(&w);
    if !(q > 0.0) {
        return Err(Error::DegenerateData);
    }
    let scale = so.target_variance.sqrt() / q.sqrt();
    Ok(w.iter().map(|v| v * scale).collect())
}
