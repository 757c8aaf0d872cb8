//! Exact and iterative solvers for the linear surrogate problems
//! `argmin_{x ∈ Ω} cᵀx` of every family, plus call accounting.

mod knapsack;
mod oracle;
mod portfolio;
mod shortest_path;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use knapsack::{solve_multiknapsack, solve_multiknapsack_certified, KnapsackCertificate};
pub use oracle::{
    brute_force_oracle, exhaustive_true_optimum, for_each_combination, for_each_path, vertex_lp,
    ENUMERATION_LIMIT,
};
pub use portfolio::{
    project_simplex, qp_kkt_residual, qp_objective, solve_portfolio_milp, solve_portfolio_qp, QP_MAX_ITER, QP_TOL,
};
pub use shortest_path::solve_dag_shortest_path;

use crate::error::{Error, Result};
use crate::problems::{ProblemDescriptor, ProblemFamily, Sense};

/// A decision: continuous part `x`, binary part `v`, and the surrogate value
/// `cᵀx` (or `cᵀv`) the solver optimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<f64>,
    pub v: Vec<bool>,
    pub objective_surrogate: f64,
}

impl Solution {
    /// The vector paired with the surrogate cost: `v` as 0/1 for the
    /// knapsack family, `x` otherwise.
    pub fn decision_vector(&self) -> Vec<f64> {
        if self.x.is_empty() {
            self.v.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
        } else {
            self.x.clone()
        }
    }
}

/// Solver invocation counter with wall-clock timings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverStats {
    call_count: u64,
    wall_time_total: Duration,
    per_call_times: Vec<Duration>,
}

impl SolverStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, elapsed: Duration) {
        self.call_count += 1;
        self.wall_time_total += elapsed;
        self.per_call_times.push(elapsed);
    }

    pub fn merge(&mut self, other: &SolverStats) {
        self.call_count += other.call_count;
        self.wall_time_total += other.wall_time_total;
        self.per_call_times.extend_from_slice(&other.per_call_times);
    }

    pub fn call_count(&self) -> u64 {
        self.call_count
    }

    pub fn wall_time_total(&self) -> Duration {
        self.wall_time_total
    }

    pub fn per_call_times(&self) -> &[Duration] {
        &self.per_call_times
    }
}

/// Solves `argmin_{x ∈ Ω(z)} cᵀx` (or argmax for maximization families)
/// without touching any counter.
pub fn solve_surrogate(family: &ProblemFamily, c: &[f64], z: &ProblemDescriptor) -> Result<Solution> {
    if family.tag() != z.tag() {
        return Err(Error::invalid(format!(
            "{} family given a {} descriptor",
            family.tag().name(),
            z.tag().name()
        )));
    }
    if c.len() != z.surrogate_dim() {
        return Err(Error::dim(format!(
            "surrogate cost of length {} for dimension {}",
            c.len(),
            z.surrogate_dim()
        )));
    }
    match z {
        ProblemDescriptor::ShortestPath { grid_n, .. } | ProblemDescriptor::StochasticSp { grid_n, .. } => {
            solve_dag_shortest_path(*grid_n, c)
        }
        ProblemDescriptor::MultiKnapsack {
            weights, capacities, ..
        } => match family.sense() {
            Sense::Maximize => solve_multiknapsack(c, weights, capacities),
            Sense::Minimize => {
                let neg: Vec<f64> = c.iter().map(|v| -v).collect();
                let mut s = solve_multiknapsack(&neg, weights, capacities)?;
                s.objective_surrogate = -s.objective_surrogate;
                Ok(s)
            }
        },
        ProblemDescriptor::PortfolioQp {
            covariance, alpha, ..
        } => solve_portfolio_qp(c, covariance, *alpha, QP_TOL, QP_MAX_ITER),
        ProblemDescriptor::PortfolioMinlp(_) => solve_portfolio_milp(c, z),
    }
}

/// [`solve_surrogate`] with its wall time.
pub fn solve_timed(family: &ProblemFamily, c: &[f64], z: &ProblemDescriptor) -> (Result<Solution>, Duration) {
    let start = Instant::now();
    let out = solve_surrogate(family, c, z);
    (out, start.elapsed())
}

/// Dispatches to the family's solver and records exactly one call in
/// `stats`, whether or not the solve succeeds.
pub fn solve_family(
    family: &ProblemFamily,
    c: &[f64],
    z: &ProblemDescriptor,
    stats: &mut SolverStats,
) -> Result<Solution> {
    let (out, elapsed) = solve_timed(family, c, z);
    stats.record(elapsed);
    out
}
