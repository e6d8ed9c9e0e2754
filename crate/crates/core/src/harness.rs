//! Experiment orchestration: simulate a training path, fit weights at each
//! prediction point, and score them on fresh replicate paths.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{covariances_exp, exact_excursion_weights, simple_kriging_weights};
use crate::distributions::{estimate, Family, MarginalModel};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::metrics::{excursion_metric_empirical, wasserstein2_samples, PairedSample};
use crate::objective::{
    extract_learning_samples, ForecastDesign, LearningSamples, ObjectiveSpec, ObjectiveVariant, Predictor,
    PredictorKind,
};
use crate::optimize::{init_candidates, solve_problem, DescentConfig, InitStrategy, ObjectiveProblem, SolveResult};
use crate::processes::{grid_index, ProcessSpec, Trajectory};
use crate::rng::RngStream;

/// Prediction step and observation window shared by every preset.
pub const GRID_STEP: f64 = 0.02;
pub const WINDOW: (f64, f64) = (0.0, 29.98);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Minimizer of the unpenalized functional.
    Unconstrained,
    /// Minimizer of the law-preserving penalized functional.
    Penalized,
    /// Simple kriging (Gaussian process only).
    Kriging,
    /// Closed-form excursion optimum (Gaussian process only).
    Exact,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Unconstrained => "unconstrained",
            Method::Penalized => "penalized",
            Method::Kriging => "kriging",
            Method::Exact => "exact",
        }
    }

    fn is_baseline(&self) -> bool {
        matches!(self, Method::Kriging | Method::Exact)
    }
}

/// How the law `F` used by the objective and the metric is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum MarginalMode {
    /// The process's declared marginal.
    Known,
    /// Fitted on the training window.
    Estimated { family: Family },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionPoints {
    /// Every grid point of the closed interval.
    Grid([f64; 2]),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WassersteinScale {
    /// Distances between `F(X(t))` and `F(X̂(t))`.
    Probability,
    /// Distances between the raw values.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    pub unit_vectors: bool,
    /// Add the weights fitted at the previous prediction point.
    pub warm_start: bool,
    pub random_simplex: usize,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            unit_vectors: true,
            warm_start: true,
            random_simplex: 0,
        }
    }
}

fn default_gamma() -> f64 {
    5.0
}

fn default_replicates() -> usize {
    1000
}

fn default_wasserstein() -> WassersteinScale {
    WassersteinScale::Probability
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub process: ProcessSpec,
    pub h: f64,
    pub window: [f64; 2],
    pub forecast_points: Vec<f64>,
    pub prediction: PredictionPoints,
    pub predictor: PredictorKind,
    /// Variant behind the penalized method.
    pub penalized_variant: ObjectiveVariant,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub descent: DescentConfig,
    #[serde(default)]
    pub init: InitConfig,
    pub marginal: MarginalMode,
    /// Cap on learning rows per point (uniform subsample).
    #[serde(default)]
    pub max_rows: Option<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    pub seed: u64,
    #[serde(default = "default_wasserstein")]
    pub wasserstein: WassersteinScale,
}

fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn grid_points(lo: f64, hi: f64, h: f64) -> Result<Vec<f64>> {
    let (a, b) = (grid_index(lo, h)?, grid_index(hi, h)?);
    Ok((a..=b).map(|k| k as f64 * h).collect())
}

fn extrapolation_points() -> Vec<f64> {
    (0..10).map(|k| 30.0 + 0.1 * k as f64).collect()
}

fn interpolation_points() -> Vec<f64> {
    (0..10).map(|k| 30.0 + 0.5 * k as f64).collect()
}

impl ExperimentSpec {
    fn base(name: &str, process: ProcessSpec, forecast_points: Vec<f64>, predictor: PredictorKind, methods: Vec<Method>) -> Self {
        Self {
            name: name.to_string(),
            process,
            h: GRID_STEP,
            window: [WINDOW.0, WINDOW.1],
            forecast_points,
            prediction: PredictionPoints::Grid([30.0, 35.0]),
            predictor,
            penalized_variant: ObjectiveVariant::Q3,
            gamma: default_gamma(),
            methods,
            descent: DescentConfig::default(),
            init: InitConfig::default(),
            marginal: MarginalMode::Known,
            max_rows: None,
            replicates: default_replicates(),
            seed: 1,
            wasserstein: WassersteinScale::Probability,
        }
    }

    fn gauss(name: &str, pts: Vec<f64>) -> Self {
        let methods = vec![Method::Unconstrained, Method::Penalized, Method::Kriging, Method::Exact];
        Self::base(name, ProcessSpec::GaussExpCov, pts, PredictorKind::Linear, methods)
    }

    fn stable(name: &str, alpha: f64, pts: Vec<f64>, predictor: PredictorKind) -> Self {
        let process = ProcessSpec::StableMovingAverage { alpha, kernel: None };
        Self::base(name, process, pts, predictor, vec![Method::Unconstrained, Method::Penalized])
    }

    pub fn gauss_extrapolation() -> Self {
        Self::gauss("gauss_extrap", extrapolation_points())
    }

    pub fn gauss_interpolation() -> Self {
        Self::gauss("gauss_interp", interpolation_points())
    }

    pub fn cauchy_extrapolation() -> Self {
        Self::stable("cauchy_extrap", 1.0, extrapolation_points(), PredictorKind::Linear)
    }

    pub fn cauchy_interpolation() -> Self {
        Self::stable("cauchy_interp", 1.0, interpolation_points(), PredictorKind::Linear)
    }

    pub fn levy_extrapolation() -> Self {
        Self::stable("levy_extrap", 0.5, extrapolation_points(), PredictorKind::SquaredWeightLinear)
    }

    pub fn levy_interpolation() -> Self {
        Self::stable("levy_interp", 0.5, interpolation_points(), PredictorKind::SquaredWeightLinear)
    }

    /// AR(3) with Student-t innovations, lag 0.1 on the 0.02 grid.
    pub fn ar3() -> Self {
        let process = ProcessSpec::ArStudentT {
            coefficients: vec![0.1, 0.25, 0.5],
            innovation: MarginalModel::StudentT {
                mu: 0.0,
                sigma: 1.0,
                nu: 0.8,
            },
            lag_steps: 5,
            burn_in: 10_000,
        };
        let mut s = Self::base(
            "ar3",
            process,
            vec![30.0, 30.1, 30.2],
            PredictorKind::Linear,
            vec![Method::Unconstrained, Method::Penalized],
        );
        s.prediction = PredictionPoints::List(vec![30.3, 30.4, 30.5, 30.6]);
        s.marginal = MarginalMode::Estimated {
            family: Family::StudentT,
        };
        s
    }

    pub fn presets() -> Vec<Self> {
        vec![
            Self::gauss_interpolation(),
            Self::gauss_extrapolation(),
            Self::cauchy_interpolation(),
            Self::cauchy_extrapolation(),
            Self::levy_interpolation(),
            Self::levy_extrapolation(),
            Self::ar3(),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        self.process
            .validate()
            .map_err(|e| config_err("process", e.to_string()))?;
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(config_err("h", "must be a positive number"));
        }
        let [lo, hi] = self.window;
        if !(lo <= hi) {
            return Err(config_err("window", "lower end exceeds upper end"));
        }
        grid_index(lo, self.h)
            .and(grid_index(hi, self.h))
            .map_err(|e| config_err("window", e.to_string()))?;
        if self.forecast_points.is_empty() {
            return Err(config_err("forecast_points", "must not be empty"));
        }
        for t in &self.forecast_points {
            grid_index(*t, self.h).map_err(|e| config_err("forecast_points", e.to_string()))?;
        }
        let targets = self.targets().map_err(|e| config_err("prediction", e.to_string()))?;
        if targets.is_empty() {
            return Err(config_err("prediction", "no prediction points"));
        }
        if self.methods.is_empty() {
            return Err(config_err("methods", "must not be empty"));
        }
        if self.methods.iter().any(Method::is_baseline) && self.process != ProcessSpec::GaussExpCov {
            return Err(config_err("methods", "kriging and exact need the Gaussian process"));
        }
        if self.penalized_variant == ObjectiveVariant::Q2 {
            return Err(config_err("penalized_variant", "must be Q3 or Q4"));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(config_err("gamma", "must be positive"));
        }
        self.descent
            .validate()
            .map_err(|e| config_err("descent", e.to_string()))?;
        if self.marginal == MarginalMode::Known && self.process.marginal().is_none() {
            return Err(config_err("marginal", "the process has no closed-form marginal; use estimated"));
        }
        if let MarginalMode::Estimated {
            family: Family::AlphaStableSymmetric,
        } = self.marginal
        {
            return Err(config_err("marginal", "stable laws cannot be estimated"));
        }
        if self.max_rows == Some(0) {
            return Err(config_err("max_rows", "must be ≥ 1"));
        }
        if self.replicates == 0 {
            return Err(config_err("replicates", "must be ≥ 1"));
        }
        Ok(())
    }

    /// Prediction points in increasing order, forecast points included.
    pub fn targets(&self) -> Result<Vec<f64>> {
        let mut t = match &self.prediction {
            PredictionPoints::Grid([lo, hi]) => grid_points(*lo, *hi, self.h)?,
            PredictionPoints::List(v) => {
                let mut out = Vec::with_capacity(v.len());
                for t in v {
                    out.push(grid_index(*t, self.h)? as f64 * self.h);
                }
                out
            }
        };
        t.sort_by(f64::total_cmp);
        t.dedup();
        Ok(t)
    }

    fn design(&self, target: f64) -> Result<ForecastDesign> {
        ForecastDesign::new(self.forecast_points.clone(), target, self.h, (self.window[0], self.window[1]))
    }

    fn forecast_slot(&self, t: f64) -> Option<usize> {
        self.forecast_points
            .iter()
            .position(|p| (p - t).abs() < self.h * 1e-6)
    }

    fn master(&self) -> RngStream {
        RngStream::new(self.seed, 0)
    }
}

/// Simulates the path observed at training time (window plus forecast
/// points).
pub fn simulate_training(spec: &ExperimentSpec) -> Result<Trajectory> {
    let start = spec.window[0];
    let end = spec
        .forecast_points
        .iter()
        .copied()
        .fold(spec.window[1], f64::max);
    let len = (grid_index(end, spec.h)? - grid_index(start, spec.h)?) as usize + 1;
    spec.process
        .simulate(start, spec.h, len, &mut spec.master().substream(1))
}

/// Law used by the objective and the metric.
pub fn fit_marginal(spec: &ExperimentSpec, training: &Trajectory) -> Result<MarginalModel> {
    match spec.marginal {
        MarginalMode::Known => spec
            .process
            .marginal()
            .ok_or_else(|| config_err("marginal", "process marginal is unknown")),
        MarginalMode::Estimated { family } => {
            let window: Vec<f64> = (0..training.len())
                .filter(|i| training.time(*i) <= spec.window[1] + 1e-9)
                .map(|i| training.values[i])
                .collect();
            estimate(family, &window)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointFit {
    pub t: f64,
    pub method: Method,
    pub kind: PredictorKind,
    pub weights: Vec<f64>,
    /// Objective of the weights on the excursion-metric scale.
    pub objective: f64,
    /// Descent output for optimized methods off the forecast sample.
    pub solve: Option<SolveResult>,
}

impl PointFit {
    pub fn predictor(&self) -> Predictor {
        Predictor {
            kind: self.kind,
            weights: self.weights.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub marginal: MarginalModel,
    pub training: Trajectory,
    /// Sorted by prediction point, then by method.
    pub points: Vec<PointFit>,
}

impl FitReport {
    pub fn get(&self, t: f64, method: Method) -> Option<&PointFit> {
        self.points
            .iter()
            .find(|p| p.method == method && (p.t - t).abs() < 1e-9)
    }

    /// Writes `t,method,lambda_1..lambda_n,objective` rows.
    pub fn write_weights_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.points.first().map_or(0, |p| p.weights.len());
        let head: Vec<String> = (1..=n).map(|i| format!("lambda_{i}")).collect();
        writeln!(out, "t,method,{},objective", head.join(","))?;
        for p in &self.points {
            let w: Vec<String> = p.weights.iter().map(|v| fmt_f64(*v)).collect();
            writeln!(out, "{},{},{},{}", fmt_f64(p.t), p.method.name(), w.join(","), fmt_f64(p.objective))?;
        }
        Ok(())
    }
}

struct FitContext<'a> {
    spec: &'a ExperimentSpec,
    training: &'a Trajectory,
    marginal: &'a MarginalModel,
    targets: &'a [f64],
}

impl FitContext<'_> {
    fn samples(&self, design: &ForecastDesign, rng: &mut RngStream) -> Result<LearningSamples> {
        extract_learning_samples(self.training, design, self.spec.max_rows, rng)
    }

    fn objective_spec(&self, method: Method) -> Result<ObjectiveSpec> {
        let (variant, gamma) = match method {
            Method::Penalized => (self.spec.penalized_variant, self.spec.gamma),
            _ => (ObjectiveVariant::Q2, 0.0),
        };
        ObjectiveSpec::new(variant, gamma, *self.marginal)
    }

    fn kind(&self, method: Method) -> PredictorKind {
        if method.is_baseline() {
            PredictorKind::Linear
        } else {
            self.spec.predictor
        }
    }

    fn unit(&self, k: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.spec.forecast_points.len()];
        e[k] = 1.0;
        e
    }

    /// Sweeps the prediction points in increasing order for one method.
    fn sweep(&self, method: Method, method_index: u64) -> Result<Vec<PointFit>> {
        let root = self.spec.master().substream(10 + method_index);
        let obj = self.objective_spec(method)?;
        let kind = self.kind(method);
        let mut previous: Option<Vec<f64>> = None;
        let mut out = Vec::with_capacity(self.targets.len());
        for (i, &t) in self.targets.iter().enumerate() {
            if let Some(k) = self.spec.forecast_slot(t) {
                out.push(PointFit {
                    t,
                    method,
                    kind,
                    weights: self.unit(k),
                    objective: 0.0,
                    solve: None,
                });
                continue;
            }
            let point = root.substream(i as u64);
            let design = self.spec.design(t)?;
            let samples = self.samples(&design, &mut point.substream(0))?;
            let problem = ObjectiveProblem {
                spec: &obj,
                samples: &samples,
                kind,
            };
            let fit = match method {
                Method::Kriging | Method::Exact => {
                    let so = covariances_exp(&design)?;
                    let w = if method == Method::Kriging {
                        simple_kriging_weights(&so)?
                    } else {
                        exact_excursion_weights(&so)?
                    };
                    let p = Predictor::new(kind, w)?;
                    let v = crate::objective::objective_value(&obj, &p, &samples, &mut point.substream(2))?;
                    PointFit {
                        t,
                        method,
                        kind,
                        weights: p.weights,
                        objective: v + obj.centering(),
                        solve: None,
                    }
                }
                Method::Unconstrained | Method::Penalized => {
                    let strategy = InitStrategy {
                        unit_vectors: self.spec.init.unit_vectors,
                        warm_start: if self.spec.init.warm_start { previous.clone() } else { None },
                        random_simplex: self.spec.init.random_simplex,
                    };
                    let cands = init_candidates(&problem, &strategy, &mut point.substream(1))?;
                    let start = cands.first().map(|c| c.0.clone()).unwrap_or_else(|| self.unit(self.spec.forecast_points.len() - 1));
                    let r = solve_problem(&problem, &start, &self.spec.descent, &point.substream(2))?;
                    previous = Some(r.weights.clone());
                    PointFit {
                        t,
                        method,
                        kind,
                        weights: r.weights.clone(),
                        objective: r.objective + obj.centering(),
                        solve: Some(r),
                    }
                }
            };
            out.push(fit);
        }
        Ok(out)
    }
}

/// Fits every method at every prediction point from one training path.
pub fn run_fit(spec: &ExperimentSpec) -> Result<FitReport> {
    spec.validate()?;
    let training = simulate_training(spec)?;
    let marginal = fit_marginal(spec, &training)?;
    let targets = spec.targets()?;
    let ctx = FitContext {
        spec,
        training: &training,
        marginal: &marginal,
        targets: &targets,
    };
    let per_method = spec
        .methods
        .par_iter()
        .enumerate()
        .map(|(m, method)| ctx.sweep(*method, m as u64))
        .collect::<Result<Vec<_>>>()?;
    let mut points: Vec<PointFit> = per_method.into_iter().flatten().collect();
    points.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.method.cmp(&b.method)));
    Ok(FitReport {
        marginal,
        training,
        points,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub t: f64,
    pub method: Method,
    pub excursion_metric: f64,
    pub wasserstein: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub replicates: usize,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn get(&self, t: f64, method: Method) -> Option<&EvalRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && (r.t - t).abs() < 1e-9)
    }

    /// Writes `t,method,excursion_metric,wasserstein` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,method,excursion_metric,wasserstein")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(r.t),
                r.method.name(),
                fmt_f64(r.excursion_metric),
                fmt_f64(r.wasserstein)
            )?;
        }
        Ok(())
    }
}

/// Values of one replicate path at the forecast points and the targets.
struct Replicate {
    forecast: Vec<f64>,
    targets: Vec<f64>,
}

fn simulate_replicate(spec: &ExperimentSpec, targets: &[f64], r: usize) -> Result<Replicate> {
    let lo = spec
        .forecast_points
        .iter()
        .chain(targets)
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = spec
        .forecast_points
        .iter()
        .chain(targets)
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let k0 = grid_index(lo, spec.h)?;
    let len = (grid_index(hi, spec.h)? - k0) as usize + 1;
    let mut rng = spec.master().substream(2).substream(r as u64);
    let path = spec
        .process
        .simulate(k0 as f64 * spec.h, spec.h, len, &mut rng)?;
    let at = |t: f64| {
        grid_index(t, spec.h)
            .ok()
            .and_then(|k| path.at_index(k))
            .ok_or_else(|| Error::InvalidGrid(format!("replicate does not cover {t}")))
    };
    Ok(Replicate {
        forecast: spec.forecast_points.iter().map(|t| at(*t)).collect::<Result<_>>()?,
        targets: targets.iter().map(|t| at(*t)).collect::<Result<_>>()?,
    })
}

/// Scores fixed fitted weights on `spec.replicates` fresh paths.
pub fn run_eval(spec: &ExperimentSpec, fit: &FitReport) -> Result<EvalReport> {
    spec.validate()?;
    let targets = spec.targets()?;
    let reps = (0..spec.replicates)
        .into_par_iter()
        .map(|r| simulate_replicate(spec, &targets, r))
        .collect::<Result<Vec<_>>>()?;
    let f = &fit.marginal;
    let rows = fit
        .points
        .par_iter()
        .map(|p| {
            let i = targets
                .iter()
                .position(|t| (t - p.t).abs() < 1e-9)
                .ok_or_else(|| Error::InvalidParameter(format!("fit point {} is not a prediction point", p.t)))?;
            let pred = p.predictor();
            let truth: Vec<f64> = reps.iter().map(|r| r.targets[i]).collect();
            let guess: Vec<f64> = reps.iter().map(|r| pred.predict(&r.forecast)).collect();
            if guess.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteInput);
            }
            let pair = PairedSample::new(truth, guess)?;
            let excursion_metric = excursion_metric_empirical(&pair, f)?;
            let wasserstein = match spec.wasserstein {
                WassersteinScale::Raw => wasserstein2_samples(pair.a(), pair.b())?,
                WassersteinScale::Probability => {
                    let fa = pair.a().iter().map(|v| f.cdf(*v)).collect::<Result<Vec<_>>>()?;
                    let fb = pair.b().iter().map(|v| f.cdf(*v)).collect::<Result<Vec<_>>>()?;
                    wasserstein2_samples(&fa, &fb)?
                }
            };
            Ok(EvalRow {
                t: p.t,
                method: p.method,
                excursion_metric,
                wasserstein,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        replicates: spec.replicates,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    pub t: f64,
    pub rows: usize,
    pub seconds: f64,
    /// Set when the solve aborted; the timing is still reported.
    pub error: Option<Error>,
}

/// Times one unpenalized solve at the prediction point `t` (the first
/// point off the forecast sample when `None`).
pub fn run_table1_benchmark(spec: &ExperimentSpec, t: Option<f64>) -> Result<BenchmarkResult> {
    spec.validate()?;
    let training = simulate_training(spec)?;
    let marginal = fit_marginal(spec, &training)?;
    let t = match t {
        Some(t) => t,
        None => spec
            .targets()?
            .into_iter()
            .find(|t| spec.forecast_slot(*t).is_none())
            .ok_or_else(|| config_err("prediction", "every prediction point is a forecast point"))?,
    };
    let design = spec.design(t)?;
    let samples = extract_learning_samples(&training, &design, spec.max_rows, &mut spec.master().substream(3))?;
    let obj = ObjectiveSpec::new(ObjectiveVariant::Q2, 0.0, marginal)?;
    Ok(time_solve(&obj, &samples, spec.predictor, &spec.descent, &spec.master().substream(4), t))
}

/// Times a single solve from the last unit vector.
pub fn time_solve(
    obj: &ObjectiveSpec,
    samples: &LearningSamples,
    kind: PredictorKind,
    cfg: &DescentConfig,
    rng: &RngStream,
    t: f64,
) -> BenchmarkResult {
    let problem = ObjectiveProblem {
        spec: obj,
        samples,
        kind,
    };
    let mut start = vec![0.0; samples.dim()];
    if let Some(last) = start.last_mut() {
        *last = 1.0;
    }
    let clock = Instant::now();
    let outcome = solve_problem(&problem, &start, cfg, rng);
    BenchmarkResult {
        t,
        rows: samples.len(),
        seconds: clock.elapsed().as_secs_f64(),
        error: outcome.err(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quick(mut s: ExperimentSpec) -> ExperimentSpec {
        s.replicates = 100;
        s.max_rows = Some(400);
        s.descent.max_iter = 60;
        s
    }

    #[test]
    fn presets_validate_and_round_trip() {
        for p in ExperimentSpec::presets() {
            p.validate().unwrap();
            let json = serde_json::to_string_pretty(&p).unwrap();
            let back: ExperimentSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back, p);
        }
        let g = ExperimentSpec::gauss_extrapolation();
        let t = g.targets().unwrap();
        assert_eq!(t.len(), 251);
        assert_abs_diff_eq!(t[0], 30.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t[250], 35.0, epsilon = 1e-12);
    }

    #[test]
    fn config_errors_name_the_key() {
        let mut s = ExperimentSpec::cauchy_extrapolation();
        s.methods.push(Method::Kriging);
        assert!(matches!(s.validate(), Err(Error::InvalidConfig { key, .. }) if key == "methods"));
        let mut s = ExperimentSpec::ar3();
        s.marginal = MarginalMode::Known;
        assert!(matches!(s.validate(), Err(Error::InvalidConfig { key, .. }) if key == "marginal"));
        let mut s = ExperimentSpec::gauss_interpolation();
        s.replicates = 0;
        assert!(matches!(s.validate(), Err(Error::InvalidConfig { key, .. }) if key == "replicates"));
        let bad = r#"{"name": "x", "bogus": 1}"#;
        let e = serde_json::from_str::<ExperimentSpec>(bad).unwrap_err().to_string();
        assert!(e.contains("bogus"));
    }

    #[test]
    fn forecast_points_are_reproduced_exactly() {
        let mut s = quick(ExperimentSpec::gauss_extrapolation());
        s.prediction = PredictionPoints::Grid([30.0, 31.0]);
        let fit = run_fit(&s).unwrap();
        for (k, t) in s.forecast_points.iter().enumerate() {
            for m in &s.methods {
                let p = fit.get(*t, *m).unwrap();
                let mut e = vec![0.0; 10];
                e[k] = 1.0;
                assert_eq!(p.weights, e);
                assert_eq!(p.predictor().predict(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]), (k + 1) as f64);
            }
        }
        let eval = run_eval(&s, &fit).unwrap();
        for t in &s.forecast_points {
            let r = eval.get(*t, Method::Unconstrained).unwrap();
            assert_eq!(r.excursion_metric, 0.0);
            assert_eq!(r.wasserstein, 0.0);
        }
        assert!(eval.rows.iter().all(|r| (0.0..=1.0).contains(&r.excursion_metric) && r.wasserstein >= 0.0));
    }

    #[test]
    fn fit_and_eval_are_reproducible() {
        let mut s = quick(ExperimentSpec::cauchy_extrapolation());
        s.prediction = PredictionPoints::List(vec![30.92, 31.5]);
        let a = run_fit(&s).unwrap();
        let b = run_fit(&s).unwrap();
        let strip = |f: &FitReport| -> Vec<_> {
            f.points
                .iter()
                .map(|p| (p.t, p.method, p.weights.clone(), p.objective, p.solve.as_ref().map(|r| r.trace.clone())))
                .collect()
        };
        assert_eq!(strip(&a), strip(&b));
        let ea = run_eval(&s, &a).unwrap();
        let eb = run_eval(&s, &b).unwrap();
        assert_eq!(ea, eb);
        let mut csv = Vec::new();
        ea.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("t,method,excursion_metric,wasserstein\n"));
        assert_eq!(text.lines().count(), 1 + 2 * 2);
        let mut csv = Vec::new();
        a.write_weights_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("t,method,lambda_1,"));
        assert!(text.lines().next().unwrap().ends_with("lambda_10,objective"));
    }

    #[test]
    fn estimated_marginal_uses_training_window() {
        let s = ExperimentSpec::ar3();
        let training = simulate_training(&s).unwrap();
        assert_abs_diff_eq!(training.time(training.len() - 1), 30.2, epsilon = 1e-9);
        let m = fit_marginal(&s, &training).unwrap();
        assert_eq!(m.family(), Family::StudentT);
    }

    #[test]
    fn benchmark_reports_timing_even_on_failure() {
        let s = quick(ExperimentSpec::gauss_extrapolation());
        let r = run_table1_benchmark(&s, None).unwrap();
        assert!(r.error.is_none());
        assert!(r.seconds >= 0.0);

        let samples = LearningSamples::new(vec![0.0], vec![vec![1.0]], vec![0.0]).unwrap();
        let obj = ObjectiveSpec::new(ObjectiveVariant::Q2, 0.0, MarginalModel::standard_normal()).unwrap();
        let r = time_solve(&obj, &samples, PredictorKind::Linear, &DescentConfig::default(), &RngStream::new(1, 0), 31.0);
        assert!(r.seconds <= 0.05);
        let bad = DescentConfig {
            max_iter: 0,
            ..DescentConfig::default()
        };
        let r = time_solve(&obj, &samples, PredictorKind::Linear, &bad, &RngStream::new(1, 0), 31.0);
        assert!(r.error.is_some());
        assert!(r.seconds >= 0.0);
    }

    #[test]
    fn perfect_predictor_scores_zero() {
        // a "prediction" of a forecast point by its own unit vector
        let mut s = quick(ExperimentSpec::levy_extrapolation());
        s.prediction = PredictionPoints::List(vec![30.0, 30.5]);
        let fit = run_fit(&s).unwrap();
        let eval = run_eval(&s, &fit).unwrap();
        for m in &s.methods {
            assert_eq!(eval.get(30.5, *m).unwrap().excursion_metric, 0.0);
        }
    }
}
