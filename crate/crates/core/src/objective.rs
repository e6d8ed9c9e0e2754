//! Learning samples drawn from one trajectory and the empirical prediction
//! functionals with their subgradients.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::MarginalModel;
use crate::error::{Error, Result};
use crate::processes::{grid_index, Trajectory, GRID_TOL};
use crate::rng::RngStream;

/// Where the forecast sample sits relative to the target point.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastDesign {
    /// Times of the observed values the predictor combines.
    pub forecast_points: Vec<f64>,
    /// Time of the value to predict.
    pub target: f64,
    pub h: f64,
    /// Closed observation window `[lo, hi]`; together with the forecast
    /// points it forms the set of observed times.
    pub window: (f64, f64),
}

impl ForecastDesign {
    pub fn new(forecast_points: Vec<f64>, target: f64, h: f64, window: (f64, f64)) -> Result<Self> {
        let d = Self {
            forecast_points,
            target,
            h,
            window,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidGrid(format!("step must be > 0, got {}", self.h)));
        }
        if self.forecast_points.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let pts = self.point_indices()?;
        let t = grid_index(self.target, self.h)?;
        if pts.contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "target {} belongs to the forecast sample",
                self.target
            )));
        }
        let (lo, hi) = (grid_index(self.window.0, self.h)?, grid_index(self.window.1, self.h)?);
        if lo > hi {
            return Err(Error::InvalidGrid(format!("empty window {:?}", self.window)));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.forecast_points.len()
    }

    /// Same geometry, different target.
    pub fn with_target(&self, target: f64) -> Result<Self> {
        Self::new(self.forecast_points.clone(), target, self.h, self.window)
    }

    fn point_indices(&self) -> Result<Vec<i64>> {
        self.forecast_points.iter().map(|t| grid_index(*t, self.h)).collect()
    }
}

/// Rows `(X(t + s_j), X(T_f + s_j))` for every admissible shift `s_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningSamples {
    targets: Vec<f64>,
    rows: Vec<f64>,
    shifts: Vec<f64>,
    n: usize,
}

impl LearningSamples {
    pub fn new(targets: Vec<f64>, rows: Vec<Vec<f64>>, shifts: Vec<f64>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if rows.len() != targets.len() {
            return Err(Error::LengthMismatch {
                left: targets.len(),
                right: rows.len(),
            });
        }
        if shifts.len() != targets.len() {
            return Err(Error::LengthMismatch {
                left: targets.len(),
                right: shifts.len(),
            });
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch { left: n, right: r.len() });
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        if targets.iter().chain(&flat).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self {
            targets,
            rows: flat,
            shifts,
            n,
        })
    }

    /// Number of rows `N`.
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Number of forecast points `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j * self.n..(j + 1) * self.n]
    }
}

/// Enumerates the grid shifts `s` with `s + (T_f ∪ {t})` inside the observed
/// times (window grid plus forecast points, as covered by `traj`), in
/// increasing order. With `max_n`, keeps a uniform subsample without
/// replacement, still in time order.
pub fn extract_learning_samples(
    traj: &Trajectory,
    design: &ForecastDesign,
    max_n: Option<usize>,
    rng: &mut RngStream,
) -> Result<LearningSamples> {
    design.validate()?;
    if (traj.h - design.h).abs() > GRID_TOL {
        return Err(Error::GridMisaligned(format!(
            "trajectory step {} differs from design step {}",
            traj.h, design.h
        )));
    }
    let pts = design.point_indices()?;
    let target = grid_index(design.target, design.h)?;
    let (w_lo, w_hi) = (grid_index(design.window.0, design.h)?, grid_index(design.window.1, design.h)?);
    let observed: BTreeSet<i64> = (w_lo..=w_hi)
        .chain(pts.iter().copied())
        .filter(|k| traj.at_index(*k).is_some())
        .collect();
    let (Some(&obs_lo), Some(&obs_hi)) = (observed.first(), observed.last()) else {
        return Err(Error::NoValidShifts);
    };
    let all: Vec<i64> = pts.iter().copied().chain(std::iter::once(target)).collect();
    let lo = *all.iter().min().unwrap_or(&target);
    let hi = *all.iter().max().unwrap_or(&target);

    let mut shifts: Vec<i64> = (obs_lo - lo..=obs_hi - hi)
        .filter(|s| all.iter().all(|k| observed.contains(&(k + s))))
        .collect();
    if shifts.is_empty() {
        return Err(Error::NoValidShifts);
    }
    if let Some(m) = max_n {
        if shifts.len() > m {
            let mut keep = index::sample(rng, shifts.len(), m).into_vec();
            keep.sort_unstable();
            shifts = keep.into_iter().map(|i| shifts[i]).collect();
        }
    }

    let value = |k: i64| traj.at_index(k).ok_or(Error::NoValidShifts);
    let mut targets = Vec::with_capacity(shifts.len());
    let mut rows = Vec::with_capacity(shifts.len());
    for s in &shifts {
        targets.push(value(target + s)?);
        rows.push(pts.iter().map(|k| value(k + s)).collect::<Result<Vec<_>>>()?);
    }
    let shift_times = shifts.iter().map(|s| *s as f64 * design.h).collect();
    LearningSamples::new(targets, rows, shift_times)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorKind {
    /// `λ · x`
    Linear,
    /// `λ² · x` with the square taken componentwise; keeps the predictor
    /// sign-preserving for positive data without projection.
    SquaredWeightLinear,
    /// `max_j λ_j x_j`
    MaxLinear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    pub kind: PredictorKind,
    pub weights: Vec<f64>,
}

impl Predictor {
    pub fn new(kind: PredictorKind, weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { kind, weights })
    }

    /// Value of the predictor on a design row.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let w = &self.weights;
        match self.kind {
            PredictorKind::Linear => w.iter().zip(x).map(|(l, v)| l * v).sum(),
            PredictorKind::SquaredWeightLinear => w.iter().zip(x).map(|(l, v)| l * l * v).sum(),
            PredictorKind::MaxLinear => w
                .iter()
                .zip(x)
                .map(|(l, v)| l * v)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Adds `scale · ∇_λ g(λ, x)` to `out`.
    pub fn add_gradient(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        if scale == 0.0 {
            return;
        }
        let w = &self.weights;
        match self.kind {
            PredictorKind::Linear => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o += scale * v;
                }
            }
            PredictorKind::SquaredWeightLinear => {
                for ((o, v), l) in out.iter_mut().zip(x).zip(w) {
                    *o += scale * 2.0 * l * v;
                }
            }
            PredictorKind::MaxLinear => {
                // ties go to the lowest index
                let mut best = 0;
                for i in 1..w.len() {
                    if w[i] * x[i] > w[best] * x[best] {
                        best = i;
                    }
                }
                out[best] += scale * x[best];
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.weights.len()];
        self.add_gradient(x, 1.0, &mut g);
        g
    }
}

/// `λ · x`, `λ² · x` or `max_j λ_j x_j` depending on the predictor kind.
pub fn predict(p: &Predictor, x_row: &[f64]) -> f64 {
    p.predict(x_row)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveVariant {
    /// Unconstrained prediction.
    Q2,
    /// Law-preserving penalty with a bootstrapped independent copy.
    Q3,
    /// Law-preserving penalty through running pairwise maxima.
    Q4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub variant: ObjectiveVariant,
    /// Penalty weight; ignored by `Q2`.
    pub gamma: f64,
    pub marginal: MarginalModel,
}

impl ObjectiveSpec {
    pub fn new(variant: ObjectiveVariant, gamma: f64, marginal: MarginalModel) -> Result<Self> {
        let s = Self {
            variant,
            gamma,
            marginal,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.marginal.validate()?;
        let ok = match self.variant {
            ObjectiveVariant::Q2 => self.gamma.is_finite() && self.gamma >= 0.0,
            _ => self.gamma.is_finite() && self.gamma > 0.0,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "penalty must be finite and positive for {:?}, got {}",
                self.variant, self.gamma
            )));
        }
        Ok(())
    }

    fn penalty(&self) -> f64 {
        match self.variant {
            ObjectiveVariant::Q2 => 0.0,
            _ => self.gamma,
        }
    }

    /// Shift turning the mean of `Q_j` into the excursion-metric scale:
    /// `−1/2` plus `γ/3` for the penalized variants.
    pub fn centering(&self) -> f64 {
        self.penalty() / 3.0 - 0.5
    }
}

/// Predictor values with their `F` and density images for every row.
struct RowImages {
    g: Vec<f64>,
    f: Vec<f64>,
    p: Vec<f64>,
}

fn images(spec: &ObjectiveSpec, pred: &Predictor, s: &LearningSamples, with_density: bool) -> Result<RowImages> {
    let n = s.len();
    let mut g = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(if with_density { n } else { 0 });
    for j in 0..n {
        let v = pred.predict(s.row(j));
        g.push(v);
        f.push(spec.marginal.cdf(v)?);
        if with_density {
            p.push(spec.marginal.pdf(v)?);
        }
    }
    Ok(RowImages { g, f, p })
}

fn check_row(s: &LearningSamples, j: usize) -> Result<()> {
    if j >= s.len() {
        return Err(Error::IndexOutOfRange { index: j, len: s.len() });
    }
    Ok(())
}

fn check_dim(pred: &Predictor, s: &LearningSamples) -> Result<()> {
    if pred.weights.len() != s.dim() {
        return Err(Error::LengthMismatch {
            left: pred.weights.len(),
            right: s.dim(),
        });
    }
    Ok(())
}

fn q2_from(spec: &ObjectiveSpec, y: f64, g: f64, fg: f64) -> Result<f64> {
    Ok(2.0 * spec.marginal.cdf(y.max(g))? - fg)
}

/// `Q_j` for row `j`.
///
/// `bootstrap` is the independent copy `Y_j` (an `F`-value of the predictor
/// at a resampled row) and is required by `Q3`.
pub fn q_value(
    spec: &ObjectiveSpec,
    pred: &Predictor,
    s: &LearningSamples,
    j: usize,
    bootstrap: Option<f64>,
) -> Result<f64> {
    check_row(s, j)?;
    check_dim(pred, s)?;
    let g = pred.predict(s.row(j));
    let fg = spec.marginal.cdf(g)?;
    let q2 = q2_from(spec, s.targets()[j], g, fg)?;
    let gamma = spec.gamma;
    match spec.variant {
        ObjectiveVariant::Q2 => Ok(q2),
        ObjectiveVariant::Q3 => {
            let y = bootstrap.ok_or(Error::MissingBootstrap)?;
            Ok(q2 + gamma * (fg * fg - fg.max(y)))
        }
        ObjectiveVariant::Q4 => {
            let mut running = 0.0;
            for i in 0..j {
                let fi = spec.marginal.cdf(pred.predict(s.row(i)))?;
                running += fi.max(fg);
            }
            let n = s.len() as f64;
            Ok(q2 + gamma * fg * fg - gamma / n * (fg + 2.0 * running))
        }
    }
}

/// Uniform bootstrap row indices, one per row.
pub fn bootstrap_indices(n: usize, rng: &mut RngStream) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Mean of `Q_j` over all rows. `Q3` draws one bootstrap resample of the
/// rows from `rng`.
pub fn objective_value(spec: &ObjectiveSpec, pred: &Predictor, s: &LearningSamples, rng: &mut RngStream) -> Result<f64> {
    check_dim(pred, s)?;
    let im = images(spec, pred, s, false)?;
    let n = s.len();
    let mut q2 = 0.0;
    for j in 0..n {
        q2 += q2_from(spec, s.targets()[j], im.g[j], im.f[j])?;
    }
    let nf = n as f64;
    let gamma = spec.gamma;
    let mean = match spec.variant {
        ObjectiveVariant::Q2 => q2 / nf,
        ObjectiveVariant::Q3 => {
            let boot = bootstrap_indices(n, rng);
            let pen: f64 = (0..n).map(|j| im.f[j] * im.f[j] - im.f[j].max(im.f[boot[j]])).sum();
            (q2 + gamma * pen) / nf
        }
        ObjectiveVariant::Q4 => {
            // Σ_j [F_j + 2 Σ_{i<j} F_i ∨ F_j] = Σ_{i,j} F_i ∨ F_j = Σ_k (2k − 1) F_(k)
            let mut sorted = im.f.clone();
            sorted.sort_by(f64::total_cmp);
            let pairs: f64 = sorted.iter().enumerate().map(|(k, v)| (2 * k + 1) as f64 * v).sum();
            let sq: f64 = im.f.iter().map(|v| v * v).sum();
            (q2 + gamma * sq - gamma * pairs / nf) / nf
        }
    };
    Ok(mean)
}

/// Objective on the excursion-metric scale: the mean of `Q_j` minus `1/2`,
/// plus `γ/3` for the penalized variants.
pub fn centered_objective_value(
    spec: &ObjectiveSpec,
    pred: &Predictor,
    s: &LearningSamples,
    rng: &mut RngStream,
) -> Result<f64> {
    Ok(objective_value(spec, pred, s, rng)? + spec.centering())
}

fn add_q2_gradient(pred: &Predictor, x: &[f64], y: f64, g: f64, dens: f64, out: &mut [f64]) {
    let sign = if y < g { 1.0 } else { -1.0 };
    pred.add_gradient(x, sign * dens, out);
}

/// Subgradient of `Q_j` with respect to the weights.
///
/// `bootstrap` is the resampled row `k` whose predictor value plays the
/// independent copy; it is required by `Q3`.
pub fn subgradient(
    spec: &ObjectiveSpec,
    pred: &Predictor,
    s: &LearningSamples,
    j: usize,
    bootstrap: Option<usize>,
) -> Result<Vec<f64>> {
    check_row(s, j)?;
    check_dim(pred, s)?;
    let m = &spec.marginal;
    let x = s.row(j);
    let g = pred.predict(x);
    let dens = m.pdf(g)?;
    let mut out = vec![0.0; s.dim()];
    add_q2_gradient(pred, x, s.targets()[j], g, dens, &mut out);
    let gamma = spec.gamma;
    match spec.variant {
        ObjectiveVariant::Q2 => {}
        ObjectiveVariant::Q3 => {
            let k = bootstrap.ok_or(Error::MissingBootstrap)?;
            check_row(s, k)?;
            let fj = m.cdf(g)?;
            let xk = s.row(k);
            let gk = pred.predict(xk);
            if gk < g {
                pred.add_gradient(x, gamma * (2.0 * fj - 1.0) * dens, &mut out);
            } else {
                pred.add_gradient(x, gamma * 2.0 * fj * dens, &mut out);
                pred.add_gradient(xk, -gamma * m.pdf(gk)?, &mut out);
            }
        }
        ObjectiveVariant::Q4 => {
            let fj = m.cdf(g)?;
            let n = s.len() as f64;
            let mut below = 0usize;
            for i in 0..j {
                let xi = s.row(i);
                let gi = pred.predict(xi);
                let fi = m.cdf(gi)?;
                if fi < fj {
                    below += 1;
                } else if fi > fj {
                    pred.add_gradient(xi, -2.0 * gamma / n * m.pdf(gi)?, &mut out);
                }
            }
            let coef = 2.0 * fj - 1.0 / n - 2.0 * below as f64 / n;
            pred.add_gradient(x, gamma * coef * dens, &mut out);
        }
    }
    Ok(out)
}

/// Mean of the row subgradients; `Q3` draws its bootstrap rows from `rng`.
pub fn mean_subgradient(spec: &ObjectiveSpec, pred: &Predictor, s: &LearningSamples, rng: &mut RngStream) -> Result<Vec<f64>> {
    check_dim(pred, s)?;
    let n = s.len();
    let nf = n as f64;
    let gamma = spec.gamma;
    let im = images(spec, pred, s, true)?;
    let mut out = vec![0.0; s.dim()];
    for j in 0..n {
        add_q2_gradient(pred, s.row(j), s.targets()[j], im.g[j], im.p[j], &mut out);
    }
    match spec.variant {
        ObjectiveVariant::Q2 => {}
        ObjectiveVariant::Q3 => {
            let boot = bootstrap_indices(n, rng);
            for (j, &k) in boot.iter().enumerate() {
                if im.g[k] < im.g[j] {
                    pred.add_gradient(s.row(j), gamma * (2.0 * im.f[j] - 1.0) * im.p[j], &mut out);
                } else {
                    pred.add_gradient(s.row(j), gamma * 2.0 * im.f[j] * im.p[j], &mut out);
                    pred.add_gradient(s.row(k), -gamma * im.p[k], &mut out);
                }
            }
        }
        ObjectiveVariant::Q4 => {
            // row k is the larger element of 2·#{i : F_i < F_k} + 1 ordered pairs
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|a, b| im.f[*a].total_cmp(&im.f[*b]));
            let mut below = vec![0usize; n];
            let mut start = 0;
            while start < n {
                let mut end = start + 1;
                while end < n && im.f[order[end]] == im.f[order[start]] {
                    end += 1;
                }
                for &k in &order[start..end] {
                    below[k] = start;
                }
                start = end;
            }
            for (k, b) in below.iter().enumerate() {
                let coef = 2.0 * im.f[k] - (2 * b + 1) as f64 / nf;
                pred.add_gradient(s.row(k), gamma * coef * im.p[k], &mut out);
            }
        }
    }
    for o in &mut out {
        *o /= nf;
    }
    Ok(out)
}
