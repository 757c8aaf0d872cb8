//! Decision-quality metrics, solver-call trade-off curves and the per-asset
//! risk/skewness decomposition of the cubic portfolio objective.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::diffmodels::dot;
use crate::error::{Error, Result};
use crate::lancer::{HistoryRow, TargetModel};
use crate::problems::{
    coskew_terms, eval_objective, minlp_value, Dataset, MinlpPortfolio, ProblemDescriptor, ProblemFamily,
};
use crate::rng::{self, streams};
use crate::solvers::{
    exhaustive_true_optimum, solve_dag_shortest_path, solve_family, solve_surrogate, Solution, SolverStats,
};

/// Denominator guard of the normalized regret.
pub const REGRET_EPS: f64 = 1e-7;
/// Random cost draws averaged per instance for the random baseline.
pub const RANDOM_DRAWS: usize = 10;

fn same_len(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::dim(format!("{what}: {a} vs {b} entries")));
    }
    Ok(())
}

/// True objectives of `solutions` under the matching descriptors.
pub fn objectives(family: &ProblemFamily, solutions: &[Solution], zs: &[&ProblemDescriptor]) -> Result<Vec<f64>> {
    same_len(solutions.len(), zs.len(), "solutions and descriptors")?;
    solutions
        .iter()
        .zip(zs)
        .enumerate()
        .map(|(i, (s, z))| eval_objective(family, s, z).map_err(|e| Error::at(i, e)))
        .collect()
}

/// Per-instance regret `loss(f) − loss(f*)` in the minimize convention.
/// Differences below zero (solver tolerance) are reported as zero.
pub fn regrets(family: &ProblemFamily, objectives: &[f64], optimal: &[f64]) -> Result<Vec<f64>> {
    same_len(objectives.len(), optimal.len(), "objectives and optima")?;
    Ok(objectives
        .iter()
        .zip(optimal)
        .map(|(f, o)| (family.to_loss(*f) - family.to_loss(*o)).max(0.0))
        .collect())
}

/// `Σ_i regret_i / (Σ_i |f*_i| + ε)` from precomputed objectives.
pub fn normalized_regret_from_objectives(family: &ProblemFamily, objectives: &[f64], optimal: &[f64]) -> Result<f64> {
    let r = regrets(family, objectives, optimal)?;
    let denom: f64 = optimal.iter().map(|o| o.abs()).sum::<f64>() + REGRET_EPS;
    Ok(r.iter().sum::<f64>() / denom)
}

/// Normalized regret of `solutions` against the optimal objectives.
pub fn normalized_regret(
    family: &ProblemFamily,
    solutions: &[Solution],
    zs: &[&ProblemDescriptor],
    optimal: &[f64],
) -> Result<f64> {
    let f = objectives(family, solutions, zs)?;
    normalized_regret_from_objectives(family, &f, optimal)
}

fn mean_loss(family: &ProblemFamily, objectives: &[f64]) -> f64 {
    objectives.iter().map(|f| family.to_loss(*f)).sum::<f64>() / objectives.len() as f64
}

/// `(DL − DL_opt) / (DL_random − DL_opt)` with `DL` the mean loss. Exactly 0
/// for the optimal objectives and exactly 1 for the random baseline.
pub fn normalized_decision_loss(
    family: &ProblemFamily,
    objectives: &[f64],
    random: &[f64],
    optimal: &[f64],
) -> Result<f64> {
    same_len(objectives.len(), optimal.len(), "objectives and optima")?;
    same_len(random.len(), optimal.len(), "random baseline and optima")?;
    if objectives.is_empty() {
        return Err(Error::invalid("no instances to score"));
    }
    let dl = mean_loss(family, objectives);
    let dl_rand = mean_loss(family, random);
    let dl_opt = mean_loss(family, optimal);
    let span = dl_rand - dl_opt;
    if span.abs() <= 1e-12 * (1.0 + dl_opt.abs()) {
        return Err(Error::Numerical(
            "random baseline matches the optimum; decision loss cannot be normalized".into(),
        ));
    }
    Ok((dl - dl_opt) / span)
}

/// Best decision under the true objective where an exact method exists:
/// the exact solver on true costs for linear families, the quadratic solver
/// for the mean-variance portfolio, and path enumeration for the stochastic
/// shortest path. The cubic portfolio has no exact oracle.
pub fn true_optimum(family: &ProblemFamily, z: &ProblemDescriptor) -> Result<Solution> {
    match z {
        ProblemDescriptor::ShortestPath { grid_n, costs } => solve_dag_shortest_path(*grid_n, costs),
        ProblemDescriptor::MultiKnapsack { .. } => {
            let c = crate::problems::regression_target(family, z).expect("knapsack has values");
            solve_surrogate(family, &c, z)
        }
        ProblemDescriptor::PortfolioQp { mu, .. } => solve_surrogate(family, mu, z),
        ProblemDescriptor::StochasticSp { .. } => exhaustive_true_optimum(family, z),
        ProblemDescriptor::PortfolioMinlp(_) => Err(Error::invalid(
            "the cubic portfolio problem has no exact optimum oracle",
        )),
    }
}

/// True optimal objective of every instance.
pub fn optimal_objectives(dataset: &Dataset) -> Result<Vec<f64>> {
    let family = dataset.family();
    dataset
        .instances()
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            true_optimum(&family, &inst.z)
                .and_then(|s| eval_objective(&family, &s, &inst.z))
                .map_err(|e| Error::at(i, e))
        })
        .collect()
}

/// Per-instance mean objective over [`RANDOM_DRAWS`] decisions made from
/// i.i.d. standard normal cost vectors. Calls are recorded in `stats`.
pub fn random_baseline_objectives(dataset: &Dataset, seed: u64, stats: &mut SolverStats) -> Result<Vec<f64>> {
    use rand_distr::{Distribution, StandardNormal};
    let family = dataset.family();
    let mut r = rng::stream(seed, streams::RANDOM_BASELINE);
    let mut out = Vec::with_capacity(dataset.len());
    for (i, inst) in dataset.instances().iter().enumerate() {
        let m = inst.z.surrogate_dim();
        let mut total = 0.0;
        for _ in 0..RANDOM_DRAWS {
            let c: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut r)).collect();
            let s = solve_family(&family, &c, &inst.z, stats).map_err(|e| Error::at(i, e))?;
            total += eval_objective(&family, &s, &inst.z).map_err(|e| Error::at(i, e))?;
        }
        out.push(total / RANDOM_DRAWS as f64);
    }
    Ok(out)
}

/// Per-instance evaluation of one method on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub family: ProblemFamily,
    pub objectives: Vec<f64>,
    pub optimal: Vec<f64>,
    pub regrets: Vec<f64>,
    pub normalized_regret: f64,
    pub normalized_decision_loss: Option<f64>,
    pub solver_calls: u64,
    /// Seconds; zero unless timing was requested.
    pub wall_time: f64,
}

impl EvalReport {
    /// Assembles a report and its aggregates from per-instance data.
    pub fn new(
        method: impl Into<String>,
        family: ProblemFamily,
        objectives: Vec<f64>,
        optimal: Vec<f64>,
        random: Option<&[f64]>,
        solver_calls: u64,
    ) -> Result<Self> {
        let regrets = regrets(&family, &objectives, &optimal)?;
        let normalized_regret = normalized_regret_from_objectives(&family, &objectives, &optimal)?;
        let normalized_decision_loss = match random {
            Some(r) => Some(normalized_decision_loss(&family, &objectives, r, &optimal)?),
            None => None,
        };
        Ok(EvalReport {
            method: method.into(),
            family,
            objectives,
            optimal,
            regrets,
            normalized_regret,
            normalized_decision_loss,
            solver_calls,
            wall_time: 0.0,
        })
    }

    pub fn mean_objective(&self) -> f64 {
        self.objectives.iter().sum::<f64>() / self.objectives.len().max(1) as f64
    }
}

/// Objectives of `x = g(c_θ(y))` on every instance (one call each).
pub fn evaluate_target(target: &TargetModel, dataset: &Dataset, stats: &mut SolverStats) -> Result<Vec<f64>> {
    let family = dataset.family();
    dataset
        .instances()
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            crate::lancer::predict_solve(target, &inst.y, &family, &inst.z, stats)
                .map(|(_, f)| f)
                .map_err(|e| Error::at(i, e))
        })
        .collect()
}

/// One point of a solver-call trade-off curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub method: String,
    pub epoch: usize,
    pub solver_calls: u64,
    pub metric: f64,
}

/// Flattens per-method training histories into `(calls, metric)` points.
/// The metric is the history's decision loss.
pub fn tradeoff_curve(histories: &[(&str, &[HistoryRow])]) -> Vec<CurvePoint> {
    histories
        .iter()
        .flat_map(|(method, rows)| {
            rows.iter().map(move |r| CurvePoint {
                method: method.to_string(),
                epoch: r.iteration,
                solver_calls: r.solver_calls,
                metric: r.mean_decision_loss,
            })
        })
        .collect()
}

fn write_rows<T: Serialize>(rows: &[T], header: &[&str], out: impl Write, comment: Option<&str>) -> Result<()> {
    let mut out = out;
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(input: impl Read, header: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(input);
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(Error::Format(format!("expected header {header:?}, found {found:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

pub const CURVE_HEADER: [&str; 4] = ["method", "epoch", "solver_calls", "metric"];
pub const HISTORY_HEADER: [&str; 6] = [
    "iteration",
    "buffer_size",
    "surrogate_mse",
    "mean_decision_loss",
    "solver_calls",
    "wall_time",
];

/// Writes curve points as CSV (`method,epoch,solver_calls,metric`), after
/// optional `#`-prefixed comment lines.
pub fn write_curve_csv(points: &[CurvePoint], out: impl Write, comment: Option<&str>) -> Result<()> {
    write_rows(points, &CURVE_HEADER, out, comment)
}

pub fn read_curve_csv(input: impl Read) -> Result<Vec<CurvePoint>> {
    read_rows(input, &CURVE_HEADER)
}

pub fn write_history_csv(rows: &[HistoryRow], out: impl Write, comment: Option<&str>) -> Result<()> {
    write_rows(rows, &HISTORY_HEADER, out, comment)
}

pub fn read_history_csv(input: impl Read) -> Result<Vec<HistoryRow>> {
    let rows: Vec<HistoryRow> = read_rows(input, &HISTORY_HEADER)?;
    for (i, r) in rows.iter().enumerate() {
        if !(r.surrogate_mse.is_finite() || r.surrogate_mse.is_nan()) || !r.wall_time.is_finite() {
            return Err(Error::Format(format!("row {i}: non-finite value")));
        }
    }
    Ok(rows)
}

/// Per-asset risk and skewness contributions of a cubic-portfolio decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskSkewness {
    /// `α x ⊙ (Gx) − β x ⊙ (S x⊗x)`.
    pub scores: Vec<f64>,
    /// `μ ⊙ x`.
    pub returns: Vec<f64>,
}

/// Splits the risk and skewness terms of the cubic objective by asset. The
/// objective equals `Σ scores + γ‖x − x₀‖₁ − Σ returns`.
pub fn risk_skewness_scores(x: &[f64], z: &ProblemDescriptor) -> Result<RiskSkewness> {
    let ProblemDescriptor::PortfolioMinlp(p) = z else {
        return Err(Error::invalid(format!(
            "risk/skewness scores need a portfolio_minlp descriptor, got {}",
            z.tag().name()
        )));
    };
    let p: &MinlpPortfolio = p;
    if x.len() != p.k() {
        return Err(Error::dim(format!("{} weights for {} assets", x.len(), p.k())));
    }
    let gx = p.covariance.matvec(x)?;
    let skew = coskew_terms(p, x);
    let scores = (0..p.k())
        .map(|i| p.alpha * x[i] * gx[i] - p.beta * skew[i])
        .collect();
    let returns = x.iter().zip(&p.mu).map(|(a, m)| a * m).collect();
    Ok(RiskSkewness { scores, returns })
}

/// `Σ scores + γ‖x − x₀‖₁ − Σ returns`, which equals the cubic objective.
pub fn reconstruct_minlp_objective(x: &[f64], p: &MinlpPortfolio, parts: &RiskSkewness) -> f64 {
    let turnover: f64 = x.iter().zip(&p.x0).map(|(a, b)| (a - b).abs()).sum();
    parts.scores.iter().sum::<f64>() + p.gamma * turnover - parts.returns.iter().sum::<f64>()
}

/// Unchecked cubic objective, exposed for diagnostics.
pub fn minlp_objective_unchecked(x: &[f64], p: &MinlpPortfolio) -> f64 {
    minlp_value(p, x)
}

/// Mean-variance objective `α xᵀGx − μᵀx` without feasibility checks.
pub fn qp_objective_unchecked(x: &[f64], mu: &[f64], g: &crate::diffmodels::DenseMatrix, alpha: f64) -> Result<f64> {
    Ok(alpha * g.quad_form(x)? - dot(mu, x))
}
