//! Parametric marginal laws.
//!
//! A [`MarginalModel`] serves twice: as the one-dimensional law `F_θ` of the
//! simulated process and as the weighting measure of the excursion metric.
//! All families expose cdf, density, quantile and an i.i.d. sampler.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::beta::checked_beta_reg;
use libm::erfc;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;

use crate::error::{ensure_finite, Error, Result};
use crate::quad;
use crate::rng::RngStream;

/// Family names accepted by [`estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    Cauchy,
    Levy,
    AlphaStableSymmetric,
    StudentT,
}

/// A parametric marginal law.
///
/// Serializes as `{"family": "...", "params": {...}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
#[serde(deny_unknown_fields)]
pub enum MarginalModel {
    Gaussian { mu: f64, sigma: f64 },
    Cauchy { mu: f64, sigma: f64 },
    /// One-sided Lévy law on `(0, ∞)`, i.e. `S_{1/2}(c, 1, 0)`.
    Levy { c: f64 },
    /// Symmetric α-stable law `S_α(σ, 0, 0)`.
    AlphaStableSymmetric { alpha: f64, sigma: f64 },
    /// Location-scale Student t with real degrees of freedom.
    StudentT { mu: f64, sigma: f64, nu: f64 },
}

impl MarginalModel {
    pub fn standard_normal() -> Self {
        MarginalModel::Gaussian { mu: 0.0, sigma: 1.0 }
    }

    pub fn standard_cauchy() -> Self {
        MarginalModel::Cauchy { mu: 0.0, sigma: 1.0 }
    }

    pub fn family(&self) -> Family {
        match self {
            MarginalModel::Gaussian { .. } => Family::Gaussian,
            MarginalModel::Cauchy { .. } => Family::Cauchy,
            MarginalModel::Levy { .. } => Family::Levy,
            MarginalModel::AlphaStableSymmetric { .. } => Family::AlphaStableSymmetric,
            MarginalModel::StudentT { .. } => Family::StudentT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
            }
        };
        match *self {
            MarginalModel::Gaussian { mu, sigma } | MarginalModel::Cauchy { mu, sigma } => {
                finite("mu", mu)?;
                positive("sigma", sigma)
            }
            MarginalModel::Levy { c } => positive("c", c),
            MarginalModel::AlphaStableSymmetric { alpha, sigma } => {
                if !(alpha > 0.0 && alpha <= 2.0) {
                    return Err(Error::InvalidParameter(format!(
                        "alpha must lie in (0, 2], got {alpha}"
                    )));
                }
                positive("sigma", sigma)
            }
            MarginalModel::StudentT { mu, sigma, nu } => {
                finite("mu", mu)?;
                positive("sigma", sigma)?;
                positive("nu", nu)
            }
        }
    }

    /// Open support interval `(lo, hi)`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            MarginalModel::Levy { .. } => (0.0, f64::INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        ensure_finite(x)?;
        Ok(match *self {
            MarginalModel::Gaussian { mu, sigma } => normal_cdf((x - mu) / sigma),
            MarginalModel::Cauchy { mu, sigma } => cauchy_cdf((x - mu) / sigma),
            MarginalModel::Levy { c } => levy_cdf(x, c),
            MarginalModel::StudentT { mu, sigma, nu } => student_cdf((x - mu) / sigma, nu),
            MarginalModel::AlphaStableSymmetric { alpha, sigma } => {
                stable_sym_cdf(x / sigma, alpha)?
            }
        })
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        ensure_finite(x)?;
        Ok(match *self {
            MarginalModel::Gaussian { mu, sigma } => normal_pdf((x - mu) / sigma) / sigma,
            MarginalModel::Cauchy { mu, sigma } => {
                let z = (x - mu) / sigma;
                1.0 / (PI * sigma * (1.0 + z * z))
            }
            MarginalModel::Levy { c } => levy_pdf(x, c),
            MarginalModel::StudentT { mu, sigma, nu } => student_pdf((x - mu) / sigma, nu) / sigma,
            MarginalModel::AlphaStableSymmetric { alpha, sigma } => {
                stable_sym_pdf(x / sigma, alpha)? / sigma
            }
        })
    }

    /// Inverse cdf for `p ∈ (0, 1)`, accurate to `cdf(quantile(p)) = p ± 1e-9`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::DomainError(format!("quantile level must lie in (0,1), got {p}")));
        }
        let x = match *self {
            MarginalModel::Gaussian { mu, sigma } => mu + sigma * normal_quantile(p),
            MarginalModel::Cauchy { mu, sigma } => mu + sigma * (PI * (p - 0.5)).tan(),
            MarginalModel::Levy { c } => {
                let e = erfc_inv(p);
                c / (2.0 * e * e)
            }
            MarginalModel::StudentT { .. } | MarginalModel::AlphaStableSymmetric { .. } => {
                return self.quantile_by_search(p);
            }
        };
        self.polish(x, p)
    }

    /// Two Newton steps against the cdf; no-op where the density vanishes.
    fn polish(&self, mut x: f64, p: f64) -> Result<f64> {
        for _ in 0..2 {
            let d = self.pdf(x)?;
            if !(d > 0.0) || !d.is_finite() {
                break;
            }
            let step = (self.cdf(x)? - p) / d;
            let next = x - step;
            if !next.is_finite() || !(self.support().0 < next) {
                break;
            }
            x = next;
        }
        Ok(x)
    }

    fn quantile_by_search(&self, p: f64) -> Result<f64> {
        // bracket around the median (0 for the symmetric families handled here)
        let (center, scale) = match *self {
            MarginalModel::StudentT { mu, sigma, .. } => (mu, sigma),
            MarginalModel::AlphaStableSymmetric { sigma, .. } => (0.0, sigma),
            _ => unreachable!("closed-form quantiles handled by caller"),
        };
        let mut lo = center - scale;
        let mut hi = center + scale;
        while self.cdf(lo)? > p {
            lo = center - 2.0 * (center - lo);
            if !lo.is_finite() {
                return Err(Error::DomainError(format!("quantile {p} beyond f64 range")));
            }
        }
        while self.cdf(hi)? < p {
            hi = center + 2.0 * (hi - center);
            if !hi.is_finite() {
                return Err(Error::DomainError(format!("quantile {p} beyond f64 range")));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.cdf(mid)? < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= 1e-13 * (1.0 + mid.abs()) {
                break;
            }
        }
        self.polish(0.5 * (lo + hi), p)
    }

    /// Draws one value.
    pub fn draw(&self, rng: &mut RngStream) -> f64 {
        match *self {
            MarginalModel::Gaussian { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                mu + sigma * z
            }
            MarginalModel::Cauchy { mu, sigma } => {
                let u: f64 = rng.random();
                mu + sigma * (PI * (u - 0.5)).tan()
            }
            MarginalModel::Levy { c } => {
                let z: f64 = rng.sample(StandardNormal);
                c / (z * z)
            }
            MarginalModel::StudentT { mu, sigma, nu } => {
                let z: f64 = rng.sample(StandardNormal);
                let chi = ChiSquared::new(nu).expect("validated nu").sample(rng);
                mu + sigma * z / (chi / nu).sqrt()
            }
            MarginalModel::AlphaStableSymmetric { alpha, sigma } => {
                sigma * chambers_mallows_stuck(alpha, rng)
            }
        }
    }

    /// Draws `count` i.i.d. values.
    pub fn sample(&self, rng: &mut RngStream, count: usize) -> Result<Vec<f64>> {
        self.validate()?;
        Ok((0..count).map(|_| self.draw(rng)).collect())
    }
}

/// Standard symmetric α-stable draw (`β = 0`, unit scale).
fn chambers_mallows_stuck(alpha: f64, rng: &mut RngStream) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    if (alpha - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

pub(crate) fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal quantile.
pub(crate) fn normal_quantile(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

fn cauchy_cdf(z: f64) -> f64 {
    if z < -1.0 {
        // arctan(z) + π/2 = arctan(-1/z) for z < 0, without cancellation
        (-1.0 / z).atan() / PI
    } else {
        0.5 + z.atan() / PI
    }
}

fn levy_cdf(x: f64, c: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        erfc((c / (2.0 * x)).sqrt())
    }
}

fn levy_pdf(x: f64, c: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let e = (-c / (2.0 * x)).exp();
    if e == 0.0 {
        return 0.0;
    }
    (c / (2.0 * PI)).sqrt() * x.powf(-1.5) * e
}

fn student_cdf(t: f64, nu: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let x = nu / (nu + t * t);
    let tail = 0.5 * checked_beta_reg(0.5 * nu, 0.5, x).expect("x in [0,1]");
    if t < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

fn student_pdf(t: f64, nu: f64) -> f64 {
    let log_norm = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
    (log_norm - 0.5 * (nu + 1.0) * (t * t / nu).ln_1p()).exp()
}

// Symmetric stable laws via Nolan's integral representation (β = 0, so
// θ₀ = 0 and the integration range is (0, π/2)).

fn stable_v(theta: f64, alpha: f64) -> f64 {
    let e = alpha / (alpha - 1.0);
    (theta.cos() / (alpha * theta).sin()).powf(e) * ((alpha - 1.0) * theta).cos() / theta.cos()
}

/// Break points for the stable integrands: the θ where `xe · V(θ)` crosses
/// a ladder of levels around 1. Both integrands live where `xe · V = O(1)`,
/// which for extreme `x` is too narrow a band for the quadrature to find
/// unaided. `V` is monotone on `(0, π/2)` when `β = 0`.
fn stable_breaks(xe: f64, alpha: f64) -> Vec<f64> {
    let mut breaks: Vec<f64> = [1e-3, 0.1, 1.0, 5.0, 40.0]
        .iter()
        .map(|level| stable_level_crossing(xe, alpha, *level))
        .collect();
    breaks.push(0.0);
    breaks.push(PI / 2.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

fn stable_level_crossing(xe: f64, alpha: f64, level: f64) -> f64 {
    let g = |theta: f64| (xe * stable_v(theta, alpha) / level).ln();
    let increasing = alpha < 1.0;
    let (mut lo, mut hi) = (1e-15, PI / 2.0 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = g(mid);
        if v.is_nan() {
            break;
        }
        if (v < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn stable_sym_cdf(z: f64, alpha: f64) -> Result<f64> {
    if (alpha - 1.0).abs() < 1e-12 {
        return Ok(cauchy_cdf(z));
    }
    if (alpha - 2.0).abs() < 1e-12 {
        return Ok(normal_cdf(z / SQRT_2));
    }
    if (alpha - 1.0).abs() < 1e-3 {
        return Err(Error::Unsupported(format!(
            "symmetric stable cdf too close to alpha = 1 (alpha = {alpha})"
        )));
    }
    if z == 0.0 {
        return Ok(0.5);
    }
    let x = z.abs();
    let xe = x.powf(alpha / (alpha - 1.0));
    let integral = quad::integrate_with_breaks(
        |theta| {
            let v = stable_v(theta, alpha);
            let r = (-xe * v).exp();
            if r.is_finite() {
                r
            } else {
                0.0
            }
        },
        &stable_breaks(xe, alpha),
        1e-13,
    ) / PI;
    let upper = if alpha < 1.0 { 0.5 + integral } else { 1.0 - integral };
    Ok(if z > 0.0 { upper } else { 1.0 - upper })
}

fn stable_sym_pdf(z: f64, alpha: f64) -> Result<f64> {
    if (alpha - 1.0).abs() < 1e-12 {
        return Ok(1.0 / (PI * (1.0 + z * z)));
    }
    if (alpha - 2.0).abs() < 1e-12 {
        return Ok(normal_pdf(z / SQRT_2) / SQRT_2);
    }
    if (alpha - 1.0).abs() < 1e-3 {
        return Err(Error::Unsupported(format!(
            "symmetric stable density too close to alpha = 1 (alpha = {alpha})"
        )));
    }
    let x = z.abs().max(1e-8);
    let xe = x.powf(alpha / (alpha - 1.0));
    let integral = quad::integrate_with_breaks(
        |theta| {
            let v = stable_v(theta, alpha);
            let r = v * (-xe * v).exp();
            if r.is_finite() {
                r
            } else {
                0.0
            }
        },
        &stable_breaks(xe, alpha),
        1e-14,
    );
    Ok(alpha * x.powf(1.0 / (alpha - 1.0)) / (PI * (alpha - 1.0).abs()) * integral)
}

/// Sample quantile with linear interpolation between order statistics.
pub fn sample_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let i = pos.floor() as usize;
    if i + 1 >= n {
        return sorted[n - 1];
    }
    let frac = pos - i as f64;
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

fn sorted_finite(data: &[f64]) -> Result<Vec<f64>> {
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Quantile-matching plug-in estimator of `family` from `data`.
///
/// Needs at least 50 observations. Heavy-tailed families are fitted from
/// the median and interquartile-type spreads, never from moments.
pub fn estimate(family: Family, data: &[f64]) -> Result<MarginalModel> {
    const MIN_LEN: usize = 50;
    if data.len() < MIN_LEN {
        return Err(Error::InsufficientData {
            needed: MIN_LEN,
            got: data.len(),
        });
    }
    let sorted = sorted_finite(data)?;
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegenerateData);
    }
    let q = |p: f64| sample_quantile(&sorted, p);
    let model = match family {
        Family::Gaussian => {
            let n = sorted.len() as f64;
            let mean = sorted.iter().sum::<f64>() / n;
            let var = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            MarginalModel::Gaussian {
                mu: mean,
                sigma: var.sqrt(),
            }
        }
        Family::Cauchy => {
            let sigma = 0.5 * (q(0.75) - q(0.25));
            if !(sigma > 0.0) {
                return Err(Error::DegenerateData);
            }
            MarginalModel::Cauchy { mu: q(0.5), sigma }
        }
        Family::Levy => {
            let med = q(0.5);
            if !(med > 0.0) {
                return Err(Error::DomainError(
                    "Levy fit needs a positive sample median".into(),
                ));
            }
            let e = erfc_inv(0.5);
            MarginalModel::Levy { c: 2.0 * med * e * e }
        }
        Family::StudentT => fit_student_t(q(0.5), q(0.75), q(0.95))?,
        Family::AlphaStableSymmetric => {
            return Err(Error::Unsupported(
                "no estimator for the general symmetric stable family".into(),
            ))
        }
    };
    model.validate()?;
    Ok(model)
}

/// Two-point quantile matching for (σ, ν) with location fixed at the median.
///
/// The ratio `t_ν⁻¹(0.95) / t_ν⁻¹(0.75)` is decreasing in ν, from ∞ at
/// ν → 0 to about 2.4387 in the Gaussian limit, so ν is found by bisection
/// on `log ν` and σ follows from the 0.75 quantile.
fn fit_student_t(median: f64, q75: f64, q95: f64) -> Result<MarginalModel> {
    let spread = q75 - median;
    if !(spread > 0.0) {
        return Err(Error::DegenerateData);
    }
    let target = (q95 - median) / spread;
    let ratio = |nu: f64| -> Result<f64> {
        let t = MarginalModel::StudentT {
            mu: 0.0,
            sigma: 1.0,
            nu,
        };
        Ok(t.quantile(0.95)? / t.quantile(0.75)?)
    };
    let (nu_min, nu_max) = (0.05_f64, 1000.0_f64);
    let nu = if target >= ratio(nu_min)? {
        nu_min
    } else if target <= ratio(nu_max)? {
        nu_max
    } else {
        let (mut lo, mut hi) = (nu_min.ln(), nu_max.ln());
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid.exp())? > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-10 {
                break;
            }
        }
        (0.5 * (lo + hi)).exp()
    };
    let unit = MarginalModel::StudentT {
        mu: 0.0,
        sigma: 1.0,
        nu,
    };
    Ok(MarginalModel::StudentT {
        mu: median,
        sigma: spread / unit.quantile(0.75)?,
        nu,
    })
}

/// Kolmogorov–Smirnov statistic of `data` against `model`.
pub fn ks_statistic(model: &MarginalModel, data: &[f64]) -> Result<f64> {
    let sorted = sorted_finite(data)?;
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = model.cdf(x)?;
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn families() -> Vec<MarginalModel> {
        vec![
            MarginalModel::Gaussian { mu: 0.5, sigma: 2.0 },
            MarginalModel::Cauchy { mu: -1.0, sigma: 0.5 },
            MarginalModel::Levy { c: 1.0 },
            MarginalModel::StudentT { mu: 0.0, sigma: 10.0, nu: 0.7 },
            MarginalModel::StudentT { mu: 1.0, sigma: 1.0, nu: 3.5 },
            MarginalModel::AlphaStableSymmetric { alpha: 1.5, sigma: 1.0 },
            MarginalModel::AlphaStableSymmetric { alpha: 0.7, sigma: 2.0 },
        ]
    }

    #[test]
    fn cdf_examples() {
        assert_abs_diff_eq!(MarginalModel::standard_cauchy().cdf(0.0).unwrap(), 0.5, epsilon = 1e-15);
        let g = MarginalModel::Gaussian { mu: 3.0, sigma: 2.0 };
        assert_abs_diff_eq!(g.cdf(3.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(MarginalModel::Levy { c: 1.0 }.cdf(1.0).unwrap(), 0.317_310_507_862_914_1, epsilon = 1e-12);
        assert_eq!(MarginalModel::Levy { c: 1.0 }.cdf(-2.0).unwrap(), 0.0);
    }

    #[test]
    fn levy_cdf_matches_quadrature_of_density() {
        // oracle: integrate (2π)^{-1/2} y^{-3/2} e^{-1/(2y)} over (0, 1]
        let v = quad::integrate(&
            |y| (2.0 * PI).powf(-0.5) * y.powf(-1.5) * (-0.5 / y).exp(),
            0.0,
            1.0,
            1e-13,
        );
        assert_abs_diff_eq!(v, 0.317_310_507_862_914_1, epsilon = 1e-10);
        assert_abs_diff_eq!(MarginalModel::Levy { c: 1.0 }.cdf(1.0).unwrap(), v, epsilon = 1e-10);
    }

    #[test]
    fn pdf_examples() {
        let c = MarginalModel::standard_cauchy();
        assert_abs_diff_eq!(c.pdf(0.0).unwrap(), 1.0 / PI, epsilon = 1e-15);
        let l = MarginalModel::Levy { c: 1.0 };
        assert!(l.pdf(1e-3).unwrap() < 1e-200);
        assert_eq!(l.pdf(1e-6).unwrap(), 0.0);
        let t1 = MarginalModel::StudentT { mu: 0.0, sigma: 1.0, nu: 1.0 };
        for i in -50..=50 {
            let x = i as f64 * 0.37;
            assert_abs_diff_eq!(t1.pdf(x).unwrap(), c.pdf(x).unwrap(), epsilon = 1e-13);
        }
    }

    #[test]
    fn nan_and_domain_errors() {
        let g = MarginalModel::standard_normal();
        assert_eq!(g.cdf(f64::NAN), Err(Error::NonFiniteInput));
        assert_eq!(g.pdf(f64::NAN), Err(Error::NonFiniteInput));
        assert!(matches!(g.quantile(0.0), Err(Error::DomainError(_))));
        assert!(matches!(g.quantile(1.0), Err(Error::DomainError(_))));
        assert!(matches!(
            MarginalModel::AlphaStableSymmetric { alpha: 1.0005, sigma: 1.0 }.cdf(1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn quantile_examples() {
        assert_abs_diff_eq!(MarginalModel::standard_cauchy().quantile(0.5).unwrap(), 0.0, epsilon = 1e-15);
        let g = MarginalModel::standard_normal();
        assert_abs_diff_eq!(g.quantile(g.cdf(1.3).unwrap()).unwrap(), 1.3, epsilon = 1e-9);
        let l = MarginalModel::Levy { c: 1.0 };
        assert_abs_diff_eq!(l.quantile(erfc(FRAC_1_SQRT_2)).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn quantile_cdf_round_trip() {
        for m in families() {
            for k in 1..=99 {
                let p = k as f64 / 100.0;
                let x = m.quantile(p).unwrap();
                assert_abs_diff_eq!(m.cdf(x).unwrap(), p, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn cdf_quantile_round_trip_in_interior() {
        for m in families() {
            for k in 1..50 {
                let p = k as f64 / 50.0;
                let x = m.quantile(p).unwrap();
                let back = m.quantile(m.cdf(x).unwrap()).unwrap();
                assert!((back - x).abs() <= 1e-9 * (1.0 + x.abs()), "{m:?} {x} {back}");
            }
        }
    }

    #[test]
    fn cdf_strictly_increasing_on_support() {
        for m in families() {
            let lo = m.quantile(1e-4).unwrap();
            let hi = m.quantile(1.0 - 1e-4).unwrap();
            let mut prev = m.cdf(lo).unwrap();
            for i in 1..1000 {
                let x = lo + (hi - lo) * i as f64 / 999.0;
                let f = m.cdf(x).unwrap();
                assert!(f > prev, "{m:?} not increasing at {x}");
                prev = f;
            }
        }
    }

    #[test]
    fn cdf_limits() {
        for m in families() {
            let lo = m.quantile(1e-7).unwrap();
            let hi = m.quantile(1.0 - 1e-7).unwrap();
            assert!(m.cdf(lo).unwrap() < 1e-6);
            assert!(m.cdf(hi).unwrap() > 1.0 - 1e-6);
        }
    }

    #[test]
    fn student_one_dof_equals_cauchy() {
        let t1 = MarginalModel::StudentT { mu: 0.0, sigma: 1.0, nu: 1.0 };
        let c = MarginalModel::standard_cauchy();
        for i in 0..100 {
            let x = -25.0 + 0.5 * i as f64;
            assert_abs_diff_eq!(t1.cdf(x).unwrap(), c.cdf(x).unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn stable_density_integrates_to_cdf_increment() {
        for alpha in [0.6, 1.3, 1.8] {
            let m = MarginalModel::AlphaStableSymmetric { alpha, sigma: 1.0 };
            let (a, b) = (-0.7, 2.2);
            let mass = quad::integrate(&|x| m.pdf(x).unwrap(), a, b, 1e-11);
            let diff = m.cdf(b).unwrap() - m.cdf(a).unwrap();
            assert_abs_diff_eq!(mass, diff, epsilon = 1e-7);
        }
    }

    #[test]
    fn stable_tail_matches_power_law() {
        // P(X > x) ~ Γ(α) sin(πα/2) / π · x^{-α} for symmetric S_α(1,0,0)
        for alpha in [0.6f64, 1.5] {
            let m = MarginalModel::AlphaStableSymmetric { alpha, sigma: 1.0 };
            let c = statrs::function::gamma::gamma(alpha) * (PI * alpha / 2.0).sin() / PI;
            let x = 1e5;
            let tail = 1.0 - m.cdf(x).unwrap();
            let asym = c * x.powf(-alpha);
            assert!((tail / asym - 1.0).abs() < 1e-3, "alpha {alpha}: {tail} vs {asym}");
        }
    }

    #[test]
    fn stable_cdf_is_continuous_in_alpha() {
        // near-Cauchy and near-Gaussian members approach the closed forms
        let near_cauchy = MarginalModel::AlphaStableSymmetric { alpha: 0.995, sigma: 1.0 };
        let near_gauss = MarginalModel::AlphaStableSymmetric { alpha: 1.999, sigma: 1.0 };
        for x in [-3.0, -0.5, 0.4, 2.0] {
            assert_abs_diff_eq!(near_cauchy.cdf(x).unwrap(), cauchy_cdf(x), epsilon = 5e-3);
            assert_abs_diff_eq!(near_gauss.cdf(x).unwrap(), normal_cdf(x / SQRT_2), epsilon = 5e-3);
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        for m in families() {
            // integrate over the central mass, add the analytic tail masses
            // break points only steer the quadrature toward the bulk
            let breaks: Vec<f64> = [1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0 - 1e-6]
                .iter()
                .map(|p| m.quantile(*p).unwrap())
                .collect();
            let (lo, hi) = (breaks[0], breaks[breaks.len() - 1]);
            let mass = quad::integrate_with_breaks(|x| m.pdf(x).unwrap(), &breaks, 1e-10);
            let tails = m.cdf(lo).unwrap() + 1.0 - m.cdf(hi).unwrap();
            assert!((mass + tails - 1.0).abs() < 1e-6, "{m:?}: {}", mass + tails);
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        for m in families() {
            let a = m.sample(&mut RngStream::new(5, 9), 100).unwrap();
            let b = m.sample(&mut RngStream::new(5, 9), 100).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sampler_matches_cdf() {
        let n = 100_000;
        let c = MarginalModel::standard_cauchy()
            .sample(&mut RngStream::new(1, 0), n)
            .unwrap();
        let frac = c.iter().filter(|&&x| x <= 0.0).count() as f64 / n as f64;
        assert_abs_diff_eq!(frac, 0.5, epsilon = 0.01);
        let l = MarginalModel::Levy { c: 1.0 }
            .sample(&mut RngStream::new(1, 1), n)
            .unwrap();
        let frac = l.iter().filter(|&&x| x <= 1.0).count() as f64 / n as f64;
        assert_abs_diff_eq!(frac, 0.317_31, epsilon = 0.01);
    }

    #[test]
    fn ks_sampler_pass_rate() {
        // 1.95/√n is roughly the 0.1% critical value; demand ≥ 95% of seeds pass
        let n = 100_000;
        let crit = 1.95 / (n as f64).sqrt();
        for m in [
            MarginalModel::standard_normal(),
            MarginalModel::standard_cauchy(),
            MarginalModel::Levy { c: 1.0 },
            MarginalModel::StudentT { mu: 0.0, sigma: 1.0, nu: 0.8 },
        ] {
            let passes = (0..20)
                .filter(|&seed| {
                    let x = m.sample(&mut RngStream::new(seed, 0), n).unwrap();
                    ks_statistic(&m, &x).unwrap() < crit
                })
                .count();
            assert!(passes >= 19, "{m:?}: {passes}/20");
        }
    }

    #[test]
    fn ks_stable_sampler() {
        let m = MarginalModel::AlphaStableSymmetric { alpha: 1.5, sigma: 1.0 };
        let x = m.sample(&mut RngStream::new(3, 0), 20_000).unwrap();
        assert!(ks_statistic(&m, &x).unwrap() < 1.63 / (20_000f64).sqrt());
    }

    #[test]
    fn estimators() {
        let c = MarginalModel::standard_cauchy()
            .sample(&mut RngStream::new(2, 0), 10_000)
            .unwrap();
        match estimate(Family::Cauchy, &c).unwrap() {
            MarginalModel::Cauchy { mu, sigma } => {
                assert_abs_diff_eq!(mu, 0.0, epsilon = 0.05);
                assert_abs_diff_eq!(sigma, 1.0, epsilon = 0.1);
            }
            other => panic!("{other:?}"),
        }
        let g = MarginalModel::Gaussian { mu: 2.0, sigma: 3.0 }
            .sample(&mut RngStream::new(2, 1), 10_000)
            .unwrap();
        match estimate(Family::Gaussian, &g).unwrap() {
            MarginalModel::Gaussian { mu, sigma } => {
                assert_abs_diff_eq!(mu, 2.0, epsilon = 0.1);
                assert_abs_diff_eq!(sigma, 3.0, epsilon = 0.1);
            }
            other => panic!("{other:?}"),
        }
        let l = MarginalModel::Levy { c: 2.5 }
            .sample(&mut RngStream::new(2, 2), 10_000)
            .unwrap();
        match estimate(Family::Levy, &l).unwrap() {
            MarginalModel::Levy { c } => assert_abs_diff_eq!(c, 2.5, epsilon = 0.15),
            other => panic!("{other:?}"),
        }
        let t = MarginalModel::StudentT { mu: 1.0, sigma: 2.0, nu: 0.8 }
            .sample(&mut RngStream::new(2, 3), 50_000)
            .unwrap();
        match estimate(Family::StudentT, &t).unwrap() {
            MarginalModel::StudentT { mu, sigma, nu } => {
                assert_abs_diff_eq!(mu, 1.0, epsilon = 0.05);
                assert_abs_diff_eq!(sigma, 2.0, epsilon = 0.15);
                assert_abs_diff_eq!(nu, 0.8, epsilon = 0.08);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn estimator_errors() {
        assert_eq!(estimate(Family::Gaussian, &[1.0; 80]), Err(Error::DegenerateData));
        assert_eq!(
            estimate(Family::Cauchy, &[1.0, 2.0]),
            Err(Error::InsufficientData { needed: 50, got: 2 })
        );
    }

    #[test]
    fn json_shape() {
        let m = MarginalModel::StudentT { mu: 0.0, sigma: 10.0, nu: 0.7 };
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"family":"student_t","params":{"mu":0.0,"sigma":10.0,"nu":0.7}}"#);
        let back: MarginalModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<MarginalModel>(r#"{"family":"levy","params":{"c":1,"x":2}}"#).is_err());
    }
}
