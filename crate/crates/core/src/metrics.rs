//! Excursion metric, Gini metric, copula diagonal and 2-Wasserstein
//! distances, computed from paired samples or in closed form.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;

use crate::distributions::{normal_quantile, sample_quantile, MarginalModel};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::quad;
use crate::rng::RngStream;

/// Grid size used for the empirical copula diagonal.
pub const DIAGONAL_GRID: usize = 512;

/// Paired realizations `(a_i, b_i)` of `(Y₁, Y₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PairedSample {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        if a.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if a.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { a, b })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn swapped(&self) -> PairedSample {
        PairedSample {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }
}

/// `E_m(Y₁, Y₂) = E|F_U(Y₂) − F_U(Y₁)|` with `F_U` the weight cdf.
pub fn excursion_metric_empirical(s: &PairedSample, weight: &MarginalModel) -> Result<f64> {
    let mut acc = 0.0;
    for (x, y) in s.a.iter().zip(&s.b) {
        acc += (weight.cdf(*y)? - weight.cdf(*x)?).abs();
    }
    Ok(acc / s.len() as f64)
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Number of entries of a sorted slice strictly greater than `u`.
fn count_above(sorted: &[f64], u: f64) -> usize {
    sorted.len() - sorted.partition_point(|x| *x <= u)
}

/// Empirical `Δ(u) = P(exactly one of Y₁, Y₂ exceeds u)` at each level.
pub fn delta_curve(s: &PairedSample, levels: &[f64]) -> Vec<f64> {
    let a = sorted(&s.a);
    let b = sorted(&s.b);
    let mins = sorted(&s.a.iter().zip(&s.b).map(|(x, y)| x.min(*y)).collect::<Vec<_>>());
    let n = s.len() as f64;
    levels
        .iter()
        .map(|&u| {
            let either = count_above(&a, u) + count_above(&b, u);
            let both = count_above(&mins, u);
            (either - 2 * both) as f64 / n
        })
        .collect()
}

/// Level-integral form `∫ Δ(u) m(du)`, by the midpoint rule in the
/// probability scale of the weight (`points` levels `F_U⁻¹((k+½)/points)`).
pub fn excursion_metric_level_integral(s: &PairedSample, weight: &MarginalModel, points: usize) -> Result<f64> {
    let levels = (0..points)
        .map(|k| weight.quantile((k as f64 + 0.5) / points as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(delta_curve(s, &levels).iter().sum::<f64>() / points as f64)
}

/// 1-based ranks, ties receiving the average of their positions.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && v[idx[end]] == v[idx[start]] {
            end += 1;
        }
        let r = 0.5 * ((start + 1) + end) as f64;
        for &k in &idx[start..end] {
            ranks[k] = r;
        }
        start = end;
    }
    ranks
}

/// Empirical copula diagonal `Ĉ(x, x)` on the uniform grid
/// `x_k = k / (grid − 1)`.
pub fn copula_diagonal(s: &PairedSample, grid: usize) -> Vec<(f64, f64)> {
    let n = s.len() as f64;
    let ra = average_ranks(&s.a);
    let rb = average_ranks(&s.b);
    let maxima = sorted(&ra.iter().zip(&rb).map(|(u, v)| u.max(*v) / n).collect::<Vec<_>>());
    (0..grid)
        .map(|k| {
            let x = k as f64 / (grid - 1) as f64;
            // small slack so that rank/n == x counts despite rounding
            let c = maxima.partition_point(|m| *m <= x + 1e-12) as f64 / n;
            (x, c)
        })
        .collect()
}

/// Gini metric `1 − 2 ∫₀¹ Ĉ(x,x) dx`, trapezoidal on the 512-point grid,
/// clipped to `[0, 1/2]`.
pub fn gini_empirical(s: &PairedSample) -> Result<f64> {
    if s.len() < 10 {
        return Err(Error::InsufficientData { needed: 10, got: s.len() });
    }
    let diag = copula_diagonal(s, DIAGONAL_GRID);
    let step = 1.0 / (DIAGONAL_GRID - 1) as f64;
    let integral = diag.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * step).sum::<f64>();
    Ok((1.0 - 2.0 * integral).clamp(0.0, 0.5))
}

/// Largest excursion distance over Dirac weights when `Y₁ =d Y₂`:
/// `2 · max_x (x − Ĉ(x,x))`, with the maximizing level mapped back to the
/// data scale through the pooled empirical quantile.
pub fn max_excursion_distance_empirical(s: &PairedSample) -> Result<(f64, f64)> {
    let diag = copula_diagonal(s, DIAGONAL_GRID);
    let (x_star, gap) = diag
        .iter()
        .map(|(x, c)| (*x, x - c))
        .max_by(|p, q| p.1.total_cmp(&q.1))
        .ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    let pooled = sorted(&s.a.iter().chain(&s.b).copied().collect::<Vec<_>>());
    Ok((2.0 * gap, sample_quantile(&pooled, x_star)))
}

/// Squared 2-Wasserstein distance between the empirical law of `y` and
/// U(0,1), integrated exactly over the quantile step function.
pub fn wasserstein2_to_uniform(y: &[f64]) -> f64 {
    let ys = sorted(y);
    let n = ys.len() as f64;
    ys.iter()
        .enumerate()
        .map(|(i, v)| {
            let hi = (i + 1) as f64 / n - v;
            let lo = i as f64 / n - v;
            (hi * hi * hi - lo * lo * lo) / 3.0
        })
        .sum()
}

/// The same distance as `1/3 + E Y² − E[Y ∨ Y']`, with `Y'` an independent
/// resample (with replacement) of `y`.
pub fn wasserstein2_to_uniform_resampled(y: &[f64], rng: &mut RngStream) -> f64 {
    let n = y.len();
    let mut sq = 0.0;
    let mut mx = 0.0;
    for v in y {
        let other = y[rng.random_range(0..n)];
        sq += v * v;
        mx += v.max(other);
    }
    1.0 / 3.0 + (sq - mx) / n as f64
}

/// The same distance as `1/3 + ∫₀¹ F(y)(F(y) − 2y) dy` with `F` the
/// empirical cdf, by the midpoint rule on `points` cells.
pub fn wasserstein2_to_uniform_cdf_form(y: &[f64], points: usize) -> f64 {
    let ys = sorted(y);
    let n = ys.len() as f64;
    let step = 1.0 / points as f64;
    let integral: f64 = (0..points)
        .map(|k| {
            let u = (k as f64 + 0.5) * step;
            let f = ys.partition_point(|v| *v <= u) as f64 / n;
            f * (f - 2.0 * u)
        })
        .sum::<f64>()
        * step;
    1.0 / 3.0 + integral
}

/// 2-Wasserstein distance between two empirical laws.
///
/// Integrates `(F_a⁻¹ − F_b⁻¹)²` exactly over the common refinement of the
/// two quantile step functions, so unequal sample sizes are handled too.
pub fn wasserstein2_samples(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let sa = sorted(a);
    let sb = sorted(b);
    let (n, m) = (sa.len() as u128, sb.len() as u128);
    let total = (n * m) as f64;
    let (mut i, mut j) = (0usize, 0usize);
    let mut pos: u128 = 0;
    let mut acc = 0.0;
    while i < sa.len() && j < sb.len() {
        let next_a = (i as u128 + 1) * m;
        let next_b = (j as u128 + 1) * n;
        let next = next_a.min(next_b);
        let d = sa[i] - sb[j];
        acc += d * d * (next - pos) as f64;
        pos = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    Ok((acc / total).sqrt())
}

/// Diagonal `C(x,x)` of the bivariate Gaussian copula with correlation `rho`:
/// `x² + (1/2π) ∫₀^{asin ρ} exp(−q² / (1 + sin θ)) dθ`, `q = Φ⁻¹(x)`.
pub fn gaussian_copula_diag(rho: f64, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::DomainError(format!("correlation must lie in [-1,1], got {rho}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::DomainError(format!("x must lie in [0,1], got {x}")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let q = normal_quantile(x);
    // (1 − sin θ)/cos²θ = 1/(1 + sin θ)
    let integral = quad::integrate(&|theta: f64| (-q * q / (1.0 + theta.sin())).exp(), 0.0, rho.asin(), 1e-13);
    Ok((x * x + integral / (2.0 * PI)).clamp(0.0, x))
}

/// `1 − 2 ∫₀¹ C(x,x) dx` for the Gaussian copula.
pub fn gaussian_gini(rho: f64) -> Result<f64> {
    gaussian_copula_diag(rho, 0.5)?;
    let integral = quad::integrate(&|x| gaussian_copula_diag(rho, x).unwrap_or(0.0), 0.0, 1.0, 1e-11);
    Ok(1.0 - 2.0 * integral)
}

/// Writes `u,delta` rows.
pub fn write_delta_csv<W: Write>(s: &PairedSample, levels: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "u,delta")?;
    for (u, d) in levels.iter().zip(delta_curve(s, levels)) {
        writeln!(out, "{},{}", fmt_f64(*u), fmt_f64(d))?;
    }
    Ok(())
}

/// Writes `x,Cxx` rows of the empirical copula diagonal.
pub fn write_diagonal_csv<W: Write>(s: &PairedSample, mut out: W) -> Result<()> {
    writeln!(out, "x,Cxx")?;
    for (x, c) in copula_diagonal(s, DIAGONAL_GRID) {
        writeln!(out, "{},{}", fmt_f64(x), fmt_f64(c))?;
    }
    Ok(())
}
