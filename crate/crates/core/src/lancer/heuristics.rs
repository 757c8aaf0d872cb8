use crate::error::{Error, Result};
use crate::problems::{regression_target, ProblemDescriptor, ProblemFamily};

/// Risk-adjusted edge costs `μ + γ·σ` for the stochastic shortest path.
/// `γ = 0` is the mean-time path that also defines the deadline.
pub fn risk_averse_costs(z: &ProblemDescriptor, gamma: f64) -> Result<Vec<f64>> {
    match z {
        ProblemDescriptor::StochasticSp { means, variances, .. } => {
            Ok(means.iter().zip(variances).map(|(m, v)| m + gamma * v).collect())
        }
        other => Err(Error::invalid(format!(
            "risk-adjusted costs need a stochastic_sp descriptor, got {}",
            other.tag().name()
        ))),
    }
}

/// Domain starting point for single-instance optimization: edge means for
/// the stochastic shortest path, negated expected returns for the cubic
/// portfolio, and the true cost vector where `z` is one.
pub fn heuristic_costs(family: &ProblemFamily, z: &ProblemDescriptor) -> Result<Vec<f64>> {
    match z {
        ProblemDescriptor::StochasticSp { means, .. } => Ok(means.clone()),
        ProblemDescriptor::PortfolioMinlp(p) => Ok(p.mu.iter().map(|m| -m).collect()),
        _ => regression_target(family, z)
            .ok_or_else(|| Error::invalid(format!("no heuristic costs for {}", family.tag().name()))),
    }
}
