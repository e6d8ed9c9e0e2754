//! Seedable simulators for stationary processes on a regular 1-D grid.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::distributions::MarginalModel;
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::rng::RngStream;

/// Grid-alignment tolerance in time units.
pub const GRID_TOL: f64 = 1e-9;

/// Number of kernel taps of the α-stable moving-average kernels.
///
/// Taps `0..=250` make `‖m‖_α = 1` exactly for the published normalizing
/// constants; including tap 251 would overshoot by about 1.3e-4.
pub const KERNEL_TAPS: usize = 251;

/// Converts `t` to an integer grid index `t / h`, failing if `t` is not on
/// the grid.
pub fn grid_index(t: f64, h: f64) -> Result<i64> {
    let k = t / h;
    let r = k.round();
    if !r.is_finite() || (k - r).abs() * h > GRID_TOL {
        return Err(Error::GridMisaligned(format!("{t} is not a multiple of {h}")));
    }
    Ok(r as i64)
}

/// Process values on the grid `t0 + i·h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub h: f64,
    pub values: Vec<f64>,
    /// Declared law of `X(t)`; `None` when the marginal is not known in
    /// closed form (autoregressions).
    pub marginal: Option<MarginalModel>,
}

impl Trajectory {
    pub fn new(t0: f64, h: f64, values: Vec<f64>, marginal: Option<MarginalModel>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidGrid(format!("t0 = {t0}, h = {h}")));
        }
        if values.is_empty() {
            return Err(Error::InvalidGrid("empty trajectory".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self {
            t0,
            h,
            values,
            marginal,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.h
    }

    /// Integer grid index (relative to zero) of the first value.
    pub fn first_index(&self) -> i64 {
        (self.t0 / self.h).round() as i64
    }

    /// Value at absolute grid index `k`, if covered.
    pub fn at_index(&self, k: i64) -> Option<f64> {
        let i = k - self.first_index();
        if i < 0 {
            return None;
        }
        self.values.get(i as usize).copied()
    }

    /// Value at time `t`, if `t` is a covered grid point.
    pub fn at(&self, t: f64) -> Option<f64> {
        grid_index(t, self.h).ok().and_then(|k| self.at_index(k))
    }

    /// Writes the `t,value` CSV form.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", fmt_f64(self.time(i)), fmt_f64(*v))?;
        }
        Ok(())
    }
}

/// Process families used by the experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    /// Stationary Gaussian process, N(0,1) marginal, covariance `e^{-|t|/2}`.
    GaussExpCov,
    /// `X(t) = Σ_x m(t/h − x) ξ(x)` with i.i.d. Cauchy (α = 1) or Lévy
    /// (α = 1/2) innovations.
    StableMovingAverage {
        alpha: f64,
        /// Kernel taps `m(0), m(1), …`; defaults to [`default_kernel`].
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kernel: Option<Vec<f64>>,
    },
    /// `X_i = φ₁ X_{i−p·s} + … + φ_p X_{i−s} + ξ_i`, where `s = lag_steps`
    /// grid steps.
    ArStudentT {
        coefficients: Vec<f64>,
        innovation: MarginalModel,
        #[serde(default = "default_lag_steps")]
        lag_steps: usize,
        #[serde(default = "default_burn_in")]
        burn_in: usize,
    },
}

fn default_lag_steps() -> usize {
    1
}

fn default_burn_in() -> usize {
    10_000
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::GaussExpCov => Ok(()),
            ProcessSpec::StableMovingAverage { alpha, kernel } => {
                let k = match kernel {
                    Some(k) => k.clone(),
                    None => default_kernel(*alpha)?,
                };
                innovation_law(*alpha)?;
                let norm = alpha_norm(&k, *alpha);
                if (norm - 1.0).abs() > 1e-6 || k.iter().any(|m| !(*m >= 0.0)) {
                    return Err(Error::InvalidParameter(format!(
                        "kernel must be non-negative with ‖m‖_α = 1, got {norm}"
                    )));
                }
                Ok(())
            }
            ProcessSpec::ArStudentT {
                coefficients,
                innovation,
                lag_steps,
                ..
            } => {
                innovation.validate()?;
                if *lag_steps == 0 {
                    return Err(Error::InvalidParameter("lag_steps must be ≥ 1".into()));
                }
                check_stationary(coefficients)
            }
        }
    }

    /// Declared marginal of the simulated process, when known.
    pub fn marginal(&self) -> Option<MarginalModel> {
        match self {
            ProcessSpec::GaussExpCov => Some(MarginalModel::standard_normal()),
            ProcessSpec::StableMovingAverage { alpha, kernel } => {
                let k = kernel.clone().or_else(|| default_kernel(*alpha).ok())?;
                stable_ma_marginal(*alpha, alpha_norm(&k, *alpha)).ok()
            }
            ProcessSpec::ArStudentT { .. } => None,
        }
    }

    /// Simulates `length` consecutive grid values starting at `t0`.
    pub fn simulate(&self, t0: f64, h: f64, length: usize, rng: &mut RngStream) -> Result<Trajectory> {
        match self {
            ProcessSpec::GaussExpCov => simulate_gauss_exp_cov(t0, h, length, rng),
            ProcessSpec::StableMovingAverage { .. } => simulate_stable_ma(self, t0, h, length, rng),
            ProcessSpec::ArStudentT { burn_in, .. } => simulate_ar(self, t0, h, length, *burn_in, rng),
        }
    }
}

fn check_grid(h: f64, length: usize) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidGrid(format!("step must be > 0, got {h}")));
    }
    if length == 0 {
        return Err(Error::InvalidGrid("length must be ≥ 1".into()));
    }
    Ok(())
}

/// Exact simulation of the N(0,1) process with covariance `e^{-|t|/2}`.
///
/// The exponential covariance is Markov, so `X(t+h) = r X(t) + √(1−r²) Z`
/// with `r = e^{-h/2}` is an exact sampler.
pub fn simulate_gauss_exp_cov(t0: f64, h: f64, length: usize, rng: &mut RngStream) -> Result<Trajectory> {
    check_grid(h, length)?;
    let r = (-h / 2.0).exp();
    let s = (1.0 - r * r).sqrt();
    let mut values = Vec::with_capacity(length);
    let mut x: f64 = rng.sample(StandardNormal);
    values.push(x);
    for _ in 1..length {
        let z: f64 = rng.sample(StandardNormal);
        x = r * x + s * z;
        values.push(x);
    }
    Trajectory::new(t0, h, values, Some(MarginalModel::standard_normal()))
}

/// The published moving-average kernel for α ∈ {1, 1/2}.
pub fn default_kernel(alpha: f64) -> Result<Vec<f64>> {
    let taps = (0..KERNEL_TAPS).map(|x| (-0.02 * x as f64).exp());
    if alpha == 1.0 {
        let c = (1.0 - (-0.02f64).exp()) / (1.0 - (-5.02f64).exp());
        Ok(taps.map(|e| e * c).collect())
    } else if alpha == 0.5 {
        let c = ((1.0 - (-0.01f64).exp()) / (1.0 - (-2.51f64).exp())).powi(2);
        Ok(taps.map(|e| e * c).collect())
    } else {
        Err(Error::Unsupported(format!("no default kernel for alpha = {alpha}")))
    }
}

/// `‖m‖_α = (Σ m^α)^{1/α}`.
pub fn alpha_norm(kernel: &[f64], alpha: f64) -> f64 {
    kernel.iter().map(|m| m.powf(alpha)).sum::<f64>().powf(1.0 / alpha)
}

fn innovation_law(alpha: f64) -> Result<MarginalModel> {
    if alpha == 1.0 {
        Ok(MarginalModel::standard_cauchy())
    } else if alpha == 0.5 {
        Ok(MarginalModel::Levy { c: 1.0 })
    } else {
        Err(Error::Unsupported(format!("stable moving average needs alpha in {{0.5, 1}}, got {alpha}")))
    }
}

fn stable_ma_marginal(alpha: f64, norm: f64) -> Result<MarginalModel> {
    if alpha == 1.0 {
        Ok(MarginalModel::Cauchy { mu: 0.0, sigma: norm })
    } else if alpha == 0.5 {
        Ok(MarginalModel::Levy { c: norm })
    } else {
        innovation_law(alpha)
    }
}

/// Causal convolution `out[i] = Σ_k kernel[k] · innovations[i + L − 1 − k]`
/// where `L = kernel.len()`; `innovations` must have `len + L − 1` entries.
pub fn ma_convolve(kernel: &[f64], innovations: &[f64]) -> Vec<f64> {
    let l = kernel.len();
    let len = innovations.len() + 1 - l;
    (0..len)
        .map(|i| {
            let last = i + l - 1;
            kernel
                .iter()
                .enumerate()
                .map(|(k, m)| m * innovations[last - k])
                .sum()
        })
        .collect()
}

/// Simulates the α-stable moving average on `t0 + i·h`, `i < length`.
///
/// Innovations live on the integer lattice; the grid index of `t0` must be
/// an integer so that the window maps onto it.
pub fn simulate_stable_ma(
    spec: &ProcessSpec,
    t0: f64,
    h: f64,
    length: usize,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    let ProcessSpec::StableMovingAverage { alpha, kernel } = spec else {
        return Err(Error::InvalidParameter("expected a stable moving-average spec".into()));
    };
    check_grid(h, length)?;
    grid_index(t0, h)?;
    spec.validate()?;
    let kernel = match kernel {
        Some(k) => k.clone(),
        None => default_kernel(*alpha)?,
    };
    let law = innovation_law(*alpha)?;
    let xi = law.sample(rng, length + kernel.len() - 1)?;
    let values = ma_convolve(&kernel, &xi);
    let marginal = stable_ma_marginal(*alpha, alpha_norm(&kernel, *alpha))?;
    Trajectory::new(t0, h, values, Some(marginal))
}

/// Minimum modulus over the roots of `1 − φ_p z − φ_{p−1} z² − … − φ₁ z^p`,
/// the characteristic polynomial of the recursion.
///
/// Computed as the reciprocal of the largest eigenvalue modulus of the
/// companion matrix.
pub fn min_root_modulus(coefficients: &[f64]) -> f64 {
    let p = coefficients.len();
    if p == 0 || coefficients.iter().all(|c| *c == 0.0) {
        return f64::INFINITY;
    }
    // X_i = a_1 X_{i-1} + … + a_p X_{i-p} with a_k = φ_{p-k+1}
    let companion = nalgebra::DMatrix::from_fn(p, p, |r, c| {
        if r == 0 {
            coefficients[p - 1 - c]
        } else if r == c + 1 {
            1.0
        } else {
            0.0
        }
    });
    let spectral_radius = companion
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    1.0 / spectral_radius
}

fn check_stationary(coefficients: &[f64]) -> Result<()> {
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter("AR coefficients must be finite".into()));
    }
    let m = min_root_modulus(coefficients);
    if m <= 1.0 + 1e-12 {
        return Err(Error::NonStationaryCoefficients { min_root_modulus: m });
    }
    Ok(())
}

/// Runs the AR recursion from a zero state and drops the first `burn_in`
/// outputs. `innovations.len()` must exceed `burn_in`.
pub fn ar_recursion(coefficients: &[f64], lag_steps: usize, innovations: &[f64], burn_in: usize) -> Vec<f64> {
    let p = coefficients.len();
    let mut x = Vec::with_capacity(innovations.len());
    for (i, xi) in innovations.iter().enumerate() {
        let mut v = *xi;
        for (k, phi) in coefficients.iter().enumerate() {
            let lag = (p - k) * lag_steps;
            if i >= lag {
                v += phi * x[i - lag];
            }
        }
        x.push(v);
    }
    x.split_off(burn_in)
}

/// Simulates the autoregression with the spec's innovation law.
pub fn simulate_ar(
    spec: &ProcessSpec,
    t0: f64,
    h: f64,
    length: usize,
    burn_in: usize,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    let ProcessSpec::ArStudentT {
        coefficients,
        innovation,
        lag_steps,
        ..
    } = spec
    else {
        return Err(Error::InvalidParameter("expected an AR spec".into()));
    };
    check_grid(h, length)?;
    spec.validate()?;
    let xi = innovation.sample(rng, burn_in + length)?;
    let values = ar_recursion(coefficients, *lag_steps, &xi, burn_in);
    Trajectory::new(t0, h, values, None)
}
