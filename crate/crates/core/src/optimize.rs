//! Projected subgradient descent, batch and online, with iterate selection.

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::objective::{self, LearningSamples, ObjectiveSpec, ObjectiveVariant, Predictor, PredictorKind};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentMode {
    /// Full mean subgradient per step.
    Batch,
    /// One uniformly drawn row per step.
    Online,
}

/// `η_l = a · (b + l)^{−β}`, `l = 0, 1, …`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSchedule {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
}

impl StepSchedule {
    pub fn step(&self, l: usize) -> f64 {
        self.a * (self.b + l as f64).powf(-self.beta)
    }
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self {
            a: 10.0,
            b: 10.0,
            beta: 0.7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    LastIterate,
    /// Average of the iterates after the burn-in.
    PolyakRuppert,
    /// Iterate with the smallest full objective among those evaluated
    /// every `trace_stride` steps.
    BestObjective,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSet {
    Unconstrained,
    NonNegativeOrthant,
    Ball { radius: f64 },
}

/// Euclidean projection onto the constraint set.
pub fn project(set: &ConstraintSet, lambda: &[f64]) -> Vec<f64> {
    match set {
        ConstraintSet::Unconstrained => lambda.to_vec(),
        ConstraintSet::NonNegativeOrthant => lambda.iter().map(|v| v.max(0.0)).collect(),
        ConstraintSet::Ball { radius } => {
            let norm = lambda.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > *radius {
                lambda.iter().map(|v| v * radius / norm).collect()
            } else {
                lambda.to_vec()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescentConfig {
    pub mode: DescentMode,
    pub schedule: StepSchedule,
    /// Iteration cap `L`.
    pub max_iter: usize,
    /// Stop once a step moves the weights by less than this.
    pub tolerance: f64,
    /// Iterates before this index are excluded from averaging.
    pub burn_in: usize,
    pub selection: SelectionRule,
    pub constraint: ConstraintSet,
    pub trace_stride: usize,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            mode: DescentMode::Online,
            schedule: StepSchedule::default(),
            max_iter: 300,
            tolerance: 0.0,
            burn_in: 0,
            selection: SelectionRule::BestObjective,
            constraint: ConstraintSet::Unconstrained,
            trace_stride: 10,
        }
    }
}

impl DescentConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.schedule;
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(s.a > 0.0) || !s.a.is_finite() {
            return bad("step scale a must be > 0");
        }
        if !(s.b >= 0.0) || !s.b.is_finite() {
            return bad("step offset b must be ≥ 0");
        }
        if self.mode == DescentMode::Online && !(s.beta > 0.5 && s.beta <= 1.0) {
            return bad("online descent needs 0.5 < beta ≤ 1");
        }
        if !(s.beta >= 0.0) || !s.beta.is_finite() {
            return bad("beta must be ≥ 0");
        }
        if s.b == 0.0 && s.beta > 0.0 {
            return bad("b = 0 makes the first step infinite");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be ≥ 1");
        }
        if self.burn_in >= self.max_iter {
            return bad("burn_in must be < max_iter");
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be ≥ 0");
        }
        if self.trace_stride == 0 {
            return bad("trace_stride must be ≥ 1");
        }
        if let ConstraintSet::Ball { radius } = self.constraint {
            if !(radius > 0.0) || !radius.is_finite() {
                return bad("ball radius must be > 0");
            }
        }
        Ok(())
    }
}

/// Anything the descent loop can minimize: a mean of per-row terms with
/// per-row subgradients.
pub trait DescentProblem {
    fn dim(&self) -> usize;
    fn num_rows(&self) -> usize;
    /// Full objective; randomized problems draw from `rng`.
    fn value(&self, lambda: &[f64], rng: &mut RngStream) -> Result<f64>;
    fn row_subgradient(&self, lambda: &[f64], row: usize, rng: &mut RngStream) -> Result<Vec<f64>>;
    fn mean_subgradient(&self, lambda: &[f64], rng: &mut RngStream) -> Result<Vec<f64>>;
}

/// Empirical prediction functional over learning samples.
pub struct ObjectiveProblem<'a> {
    pub spec: &'a ObjectiveSpec,
    pub samples: &'a LearningSamples,
    pub kind: PredictorKind,
}

impl ObjectiveProblem<'_> {
    fn predictor(&self, lambda: &[f64]) -> Result<Predictor> {
        Predictor::new(self.kind, lambda.to_vec())
    }
}

impl DescentProblem for ObjectiveProblem<'_> {
    fn dim(&self) -> usize {
        self.samples.dim()
    }

    fn num_rows(&self) -> usize {
        self.samples.len()
    }

    fn value(&self, lambda: &[f64], rng: &mut RngStream) -> Result<f64> {
        objective::objective_value(self.spec, &self.predictor(lambda)?, self.samples, rng)
    }

    fn row_subgradient(&self, lambda: &[f64], row: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
        let boot = match self.spec.variant {
            ObjectiveVariant::Q3 => Some(rng.random_range(0..self.samples.len())),
            _ => None,
        };
        objective::subgradient(self.spec, &self.predictor(lambda)?, self.samples, row, boot)
    }

    fn mean_subgradient(&self, lambda: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        objective::mean_subgradient(self.spec, &self.predictor(lambda)?, self.samples, rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub iter: usize,
    pub objective: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub weights: Vec<f64>,
    /// Full objective of the returned weights.
    pub objective: f64,
    pub trace: Vec<TracePoint>,
    /// Number of descent steps taken.
    pub iterations: usize,
    pub selection: SelectionRule,
    pub seconds: f64,
}

impl SolveResult {
    /// Writes `iter,objective,lambda_1..lambda_n` rows.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.weights.len();
        let head: Vec<String> = (1..=n).map(|i| format!("lambda_{i}")).collect();
        writeln!(out, "iter,objective,{}", head.join(","))?;
        for p in &self.trace {
            let w: Vec<String> = p.weights.iter().map(|v| fmt_f64(*v)).collect();
            writeln!(out, "{},{},{}", p.iter, fmt_f64(p.objective), w.join(","))?;
        }
        Ok(())
    }
}

/// Starting points for the descent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitStrategy {
    pub unit_vectors: bool,
    pub warm_start: Option<Vec<f64>>,
    /// Number of uniform draws from the simplex `{λ ≥ 0, ‖λ‖₁ = 1}`.
    pub random_simplex: usize,
}

/// Candidate starting weights with their objective values, best first.
pub fn init_candidates<P: DescentProblem>(
    problem: &P,
    strategy: &InitStrategy,
    rng: &mut RngStream,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let n = problem.dim();
    let mut cands: Vec<Vec<f64>> = Vec::new();
    if strategy.unit_vectors {
        for k in 0..n {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            cands.push(e);
        }
    }
    if let Some(w) = &strategy.warm_start {
        if w.len() != n {
            return Err(Error::LengthMismatch { left: n, right: w.len() });
        }
        cands.push(w.clone());
    }
    let mut draws = rng.substream(0);
    for _ in 0..strategy.random_simplex {
        let e: Vec<f64> = (0..n).map(|_| draws.sample::<f64, _>(Exp1)).collect();
        let total: f64 = e.iter().sum();
        cands.push(e.into_iter().map(|v| v / total).collect());
    }
    let mut scored = cands
        .into_iter()
        .map(|c| {
            let v = problem.value(&c, &mut rng.substream(1))?;
            Ok((c, v))
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(scored)
}

/// Runs the descent from `start`.
///
/// Row choices and bootstrap draws come from substreams 0 and 1 of `rng`;
/// full-objective evaluations reuse substream 2 each time, so every
/// evaluated iterate sees the same bootstrap resample.
pub fn solve_problem<P: DescentProblem>(
    problem: &P,
    start: &[f64],
    cfg: &DescentConfig,
    rng: &RngStream,
) -> Result<SolveResult> {
    let started = Instant::now();
    cfg.validate()?;
    if start.len() != problem.dim() {
        return Err(Error::LengthMismatch {
            left: problem.dim(),
            right: start.len(),
        });
    }
    if problem.num_rows() == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut rows = rng.substream(0);
    let mut boot = rng.substream(1);
    let evaluate = |w: &[f64]| problem.value(w, &mut rng.substream(2));

    let track = cfg.selection == SelectionRule::BestObjective;
    let mut lambda = project(&cfg.constraint, start);
    if lambda.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let mut trace = Vec::new();
    if track {
        trace.push(TracePoint {
            iter: 0,
            objective: evaluate(&lambda)?,
            weights: lambda.clone(),
        });
    }
    let mut sum = vec![0.0; lambda.len()];
    let mut averaged = 0usize;
    let mut steps = 0;
    for l in 0..cfg.max_iter {
        if l >= cfg.burn_in {
            for (s, v) in sum.iter_mut().zip(&lambda) {
                *s += v;
            }
            averaged += 1;
        }
        let grad = match cfg.mode {
            DescentMode::Batch => problem.mean_subgradient(&lambda, &mut boot)?,
            DescentMode::Online => {
                let j = rows.random_range(0..problem.num_rows());
                problem.row_subgradient(&lambda, j, &mut boot)?
            }
        };
        let eta = cfg.schedule.step(l);
        let stepped: Vec<f64> = lambda.iter().zip(&grad).map(|(v, g)| v - eta * g).collect();
        let next = project(&cfg.constraint, &stepped);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::DivergedToNonFinite {
                iteration: l + 1,
                last_finite: lambda,
            });
        }
        let moved = next.iter().zip(&lambda).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        lambda = next;
        steps = l + 1;
        if track && steps % cfg.trace_stride == 0 {
            trace.push(TracePoint {
                iter: steps,
                objective: evaluate(&lambda)?,
                weights: lambda.clone(),
            });
        }
        if moved < cfg.tolerance {
            break;
        }
    }

    let (weights, objective) = match cfg.selection {
        SelectionRule::LastIterate => {
            let v = evaluate(&lambda)?;
            (lambda, v)
        }
        SelectionRule::PolyakRuppert => {
            let w = if averaged == 0 {
                lambda
            } else {
                sum.iter().map(|s| s / averaged as f64).collect()
            };
            let v = evaluate(&w)?;
            (w, v)
        }
        SelectionRule::BestObjective => {
            // first minimum wins, so longer runs never pick a worse point
            let mut best = &trace[0];
            for p in &trace[1..] {
                if p.objective < best.objective {
                    best = p;
                }
            }
            (best.weights.clone(), best.objective)
        }
    };
    Ok(SolveResult {
        weights,
        objective,
        trace,
        iterations: steps,
        selection: cfg.selection,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Minimizes the empirical functional of `spec` starting from `p0`.
pub fn solve(
    spec: &ObjectiveSpec,
    samples: &LearningSamples,
    p0: &Predictor,
    cfg: &DescentConfig,
    rng: &RngStream,
) -> Result<SolveResult> {
    let problem = ObjectiveProblem {
        spec,
        samples,
        kind: p0.kind,
    };
    solve_problem(&problem, &p0.weights, cfg, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::MarginalModel;
    use approx::assert_abs_diff_eq;

    /// `(1/N) Σ_j ½ (λ − c_j)ᵀ A (λ − c_j)` with diagonal `A`.
    struct Quadratic {
        curvature: Vec<f64>,
        centers: Vec<Vec<f64>>,
    }

    impl Quadratic {
        fn minimizer(&self) -> Vec<f64> {
            let n = self.centers.len() as f64;
            (0..self.curvature.len())
                .map(|i| self.centers.iter().map(|c| c[i]).sum::<f64>() / n)
                .collect()
        }
    }

    impl DescentProblem for Quadratic {
        fn dim(&self) -> usize {
            self.curvature.len()
        }
        fn num_rows(&self) -> usize {
            self.centers.len()
        }
        fn value(&self, l: &[f64], _: &mut RngStream) -> Result<f64> {
            let mut v = 0.0;
            for c in &self.centers {
                for i in 0..l.len() {
                    v += 0.5 * self.curvature[i] * (l[i] - c[i]).powi(2);
                }
            }
            Ok(v / self.centers.len() as f64)
        }
        fn row_subgradient(&self, l: &[f64], j: usize, _: &mut RngStream) -> Result<Vec<f64>> {
            Ok((0..l.len()).map(|i| self.curvature[i] * (l[i] - self.centers[j][i])).collect())
        }
        fn mean_subgradient(&self, l: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
            let mut g = vec![0.0; l.len()];
            for j in 0..self.centers.len() {
                for (a, b) in g.iter_mut().zip(self.row_subgradient(l, j, rng)?) {
                    *a += b / self.centers.len() as f64;
                }
            }
            Ok(g)
        }
    }

    struct Flat(usize);

    impl DescentProblem for Flat {
        fn dim(&self) -> usize {
            self.0
        }
        fn num_rows(&self) -> usize {
            5
        }
        fn value(&self, _: &[f64], _: &mut RngStream) -> Result<f64> {
            Ok(0.0)
        }
        fn row_subgradient(&self, l: &[f64], _: usize, _: &mut RngStream) -> Result<Vec<f64>> {
            Ok(vec![0.0; l.len()])
        }
        fn mean_subgradient(&self, l: &[f64], _: &mut RngStream) -> Result<Vec<f64>> {
            Ok(vec![0.0; l.len()])
        }
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project(&ConstraintSet::Unconstrained, &[-3.0, 7.0]), vec![-3.0, 7.0]);
        assert_eq!(project(&ConstraintSet::NonNegativeOrthant, &[-1.0, 2.0]), vec![0.0, 2.0]);
        let b = project(&ConstraintSet::Ball { radius: 1.0 }, &[3.0, 4.0]);
        assert_abs_diff_eq!(b[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn step_schedule_values() {
        let s = StepSchedule::default();
        assert_abs_diff_eq!(s.step(0), 10.0 * 10f64.powf(-0.7), epsilon = 1e-15);
        assert_abs_diff_eq!(s.step(90), 10.0 * 100f64.powf(-0.7), epsilon = 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(DescentConfig::default().validate().is_ok());
        let mut c = DescentConfig::default();
        c.schedule.beta = 0.4;
        assert!(c.validate().is_err());
        c.mode = DescentMode::Batch;
        assert!(c.validate().is_ok());
        let c = DescentConfig {
            burn_in: 300,
            ..DescentConfig::default()
        };
        assert!(c.validate().is_err());
        let c = DescentConfig {
            max_iter: 0,
            ..DescentConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn online_converges_on_quadratic() {
        let q = Quadratic {
            curvature: vec![1.0, 0.5, 0.8],
            centers: vec![vec![0.3, -1.2, 2.0]; 4],
        };
        let cfg = DescentConfig {
            max_iter: 10_000,
            selection: SelectionRule::LastIterate,
            ..DescentConfig::default()
        };
        let r = solve_problem(&q, &[5.0, 5.0, 5.0], &cfg, &RngStream::new(1, 0)).unwrap();
        for (a, b) in r.weights.iter().zip(q.minimizer()) {
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn averaged_online_converges_on_noisy_quadratic() {
        let mut rng = RngStream::new(2, 0);
        let q = Quadratic {
            curvature: vec![1.0, 1.0],
            centers: (0..50).map(|_| vec![rng.random_range(-0.05..0.05), 1.0 + rng.random_range(-0.05..0.05)]).collect(),
        };
        let cfg = DescentConfig {
            max_iter: 10_000,
            burn_in: 1000,
            selection: SelectionRule::PolyakRuppert,
            ..DescentConfig::default()
        };
        let r = solve_problem(&q, &[0.0, 0.0], &cfg, &RngStream::new(3, 0)).unwrap();
        for (a, b) in r.weights.iter().zip(q.minimizer()) {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn batch_converges_and_stops_on_tolerance() {
        let q = Quadratic {
            curvature: vec![1.0, 0.5],
            centers: vec![vec![1.0, 2.0], vec![3.0, 0.0]],
        };
        let cfg = DescentConfig {
            mode: DescentMode::Batch,
            schedule: StepSchedule { a: 1.0, b: 1.0, beta: 0.0 },
            max_iter: 10_000,
            tolerance: 1e-12,
            selection: SelectionRule::LastIterate,
            ..DescentConfig::default()
        };
        let r = solve_problem(&q, &[0.0, 0.0], &cfg, &RngStream::new(4, 0)).unwrap();
        assert!(r.iterations < 10_000);
        assert_abs_diff_eq!(r.weights[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.weights[1], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        for sel in [SelectionRule::LastIterate, SelectionRule::PolyakRuppert, SelectionRule::BestObjective] {
            let cfg = DescentConfig {
                selection: sel,
                ..DescentConfig::default()
            };
            let r = solve_problem(&Flat(3), &[0.2, -0.4, 0.9], &cfg, &RngStream::new(5, 0)).unwrap();
            for (a, b) in r.weights.iter().zip([0.2, -0.4, 0.9]) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn divergence_is_reported() {
        struct Explode;
        impl DescentProblem for Explode {
            fn dim(&self) -> usize {
                1
            }
            fn num_rows(&self) -> usize {
                1
            }
            fn value(&self, _: &[f64], _: &mut RngStream) -> Result<f64> {
                Ok(0.0)
            }
            fn row_subgradient(&self, l: &[f64], _: usize, _: &mut RngStream) -> Result<Vec<f64>> {
                Ok(vec![if l[0] > 1e300 { f64::INFINITY } else { -1e300 }])
            }
            fn mean_subgradient(&self, l: &[f64], r: &mut RngStream) -> Result<Vec<f64>> {
                self.row_subgradient(l, 0, r)
            }
        }
        let err = solve_problem(&Explode, &[0.0], &DescentConfig::default(), &RngStream::new(6, 0)).unwrap_err();
        match err {
            Error::DivergedToNonFinite { last_finite, .. } => assert!(last_finite[0].is_finite()),
            e => panic!("unexpected {e:?}"),
        }
    }

    fn gaussian_samples() -> LearningSamples {
        use crate::objective::{extract_learning_samples, ForecastDesign};
        use crate::processes::ProcessSpec;
        let pts = (0..10).map(|k| 30.0 + 0.1 * k as f64).collect();
        let d = ForecastDesign::new(pts, 31.0, 0.02, (0.0, 29.98)).unwrap();
        let traj = ProcessSpec::GaussExpCov
            .simulate(0.0, 0.02, 1551, &mut RngStream::new(7, 0))
            .unwrap();
        extract_learning_samples(&traj, &d, None, &mut RngStream::new(7, 1)).unwrap()
    }

    #[test]
    fn statistical_solve_is_deterministic_and_never_worse_than_start() {
        let s = gaussian_samples();
        let spec = ObjectiveSpec::new(ObjectiveVariant::Q2, 0.0, MarginalModel::standard_normal()).unwrap();
        let problem = ObjectiveProblem {
            spec: &spec,
            samples: &s,
            kind: PredictorKind::Linear,
        };
        let strategy = InitStrategy {
            unit_vectors: true,
            ..InitStrategy::default()
        };
        let cands = init_candidates(&problem, &strategy, &mut RngStream::new(8, 0)).unwrap();
        assert_eq!(cands.len(), 10);
        assert!(cands.windows(2).all(|w| w[0].1 <= w[1].1));
        let p0 = Predictor::new(PredictorKind::Linear, cands[0].0.clone()).unwrap();
        let cfg = DescentConfig::default();
        let a = solve(&spec, &s, &p0, &cfg, &RngStream::new(9, 0)).unwrap();
        let b = solve(&spec, &s, &p0, &cfg, &RngStream::new(9, 0)).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.trace, b.trace);
        assert!(a.objective <= cands[0].1);
        assert_eq!(a.trace.len(), 31);
        assert!(a.trace.len() <= cfg.max_iter);

        // longer budgets never select a worse iterate
        let mut last = f64::INFINITY;
        for l in [10, 50, 120, 300] {
            let cfg = DescentConfig {
                max_iter: l,
                ..DescentConfig::default()
            };
            let r = solve(&spec, &s, &p0, &cfg, &RngStream::new(9, 0)).unwrap();
            assert!(r.objective <= last);
            last = r.objective;
        }
    }

    #[test]
    fn candidate_strategies() {
        let q = Quadratic {
            curvature: vec![1.0; 4],
            centers: vec![vec![0.25; 4]],
        };
        let strategy = InitStrategy {
            unit_vectors: true,
            warm_start: Some(vec![0.1, 0.2, 0.3, 0.4]),
            random_simplex: 20,
        };
        let cands = init_candidates(&q, &strategy, &mut RngStream::new(10, 0)).unwrap();
        assert_eq!(cands.len(), 25);
        assert!(cands.iter().any(|(c, _)| c == &vec![0.1, 0.2, 0.3, 0.4]));
        for k in 0..4 {
            let mut e = vec![0.0; 4];
            e[k] = 1.0;
            assert!(cands.iter().any(|(c, _)| *c == e));
        }
        for (c, _) in &cands {
            assert!(c.iter().all(|v| *v >= 0.0));
            assert_abs_diff_eq!(c.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
        assert!(cands.windows(2).all(|w| w[0].1 <= w[1].1));
    }

    #[test]
    fn trace_csv_layout() {
        let q = Quadratic {
            curvature: vec![1.0, 1.0],
            centers: vec![vec![1.0, 1.0]],
        };
        let r = solve_problem(&q, &[0.0, 0.0], &DescentConfig::default(), &RngStream::new(11, 0)).unwrap();
        let mut buf = Vec::new();
        r.write_trace_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,objective,lambda_1,lambda_2\n"));
        assert_eq!(text.lines().count(), 1 + r.trace.len());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn sets() -> impl Strategy<Value = ConstraintSet> {
            prop_oneof![
                Just(ConstraintSet::Unconstrained),
                Just(ConstraintSet::NonNegativeOrthant),
                (0.1f64..10.0).prop_map(|radius| ConstraintSet::Ball { radius }),
            ]
        }

        proptest! {
            #[test]
            fn projection_is_idempotent(set in sets(), l in proptest::collection::vec(-100.0f64..100.0, 1..8)) {
                let once = project(&set, &l);
                let twice = project(&set, &once);
                for (a, b) in once.iter().zip(&twice) {
                    prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
                }
            }

            #[test]
            fn projection_lands_in_set(set in sets(), l in proptest::collection::vec(-100.0f64..100.0, 1..8)) {
                let p = project(&set, &l);
                match set {
                    ConstraintSet::Unconstrained => prop_assert_eq!(p, l),
                    ConstraintSet::NonNegativeOrthant => prop_assert!(p.iter().all(|v| *v >= 0.0)),
                    ConstraintSet::Ball { radius } => {
                        prop_assert!(p.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius * (1.0 + 1e-12));
                    }
                }
            }
        }
    }
}
