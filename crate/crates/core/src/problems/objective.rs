use super::grid::Grid;
use super::types::{FamilyTag, MinlpPortfolio, ProblemDescriptor, ProblemFamily, Sense};
use crate::diffmodels::dot;
use crate::error::{Error, Result};
use crate::solvers::Solution;

/// Feasibility tolerance used before evaluating an objective.
pub const EVAL_TOL: f64 = 1e-7;

/// Standard normal CDF.
pub fn gaussian_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}

/// Probability that a path with the given mean/variance totals meets the
/// deadline. A zero-variance path meets it with certainty iff its mean does.
pub fn on_time_probability(mean_total: f64, variance_total: f64, deadline: f64) -> f64 {
    if variance_total <= 0.0 {
        if mean_total <= deadline {
            1.0
        } else {
            0.0
        }
    } else {
        gaussian_cdf((deadline - mean_total) / variance_total.sqrt())
    }
}

/// `Σ_{ijl} S_ijl x_i x_j x_l`, and per-asset terms `x_i (S x⊗x)_i`.
pub(crate) fn coskew_terms(p: &MinlpPortfolio, x: &[f64]) -> Vec<f64> {
    let k = p.k();
    (0..k)
        .map(|i| {
            if x[i] == 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for j in 0..k {
                if x[j] == 0.0 {
                    continue;
                }
                let row = &p.coskewness[(i * k + j) * k..(i * k + j + 1) * k];
                s += x[j] * dot(row, x);
            }
            x[i] * s
        })
        .collect()
}

/// Cubic portfolio objective
/// `α xᵀGx + γ‖x − x₀‖₁ − μᵀx − β Σ S_ijl x_i x_j x_l` without feasibility checks.
pub(crate) fn minlp_value(p: &MinlpPortfolio, x: &[f64]) -> f64 {
    let risk = p.alpha * dot(x, &p.covariance.matvec(x).expect("validated dims"));
    let turnover: f64 = x.iter().zip(&p.x0).map(|(a, b)| (a - b).abs()).sum();
    let skew: f64 = coskew_terms(p, x).iter().sum();
    risk + p.gamma * turnover - dot(&p.mu, x) - p.beta * skew
}

fn check_dims(family: &ProblemFamily, x: &Solution, z: &ProblemDescriptor) -> Result<()> {
    if family.tag() != z.tag() {
        return Err(Error::invalid(format!(
            "{} family given a {} descriptor",
            family.tag().name(),
            z.tag().name()
        )));
    }
    let n = z.surrogate_dim();
    let (xlen, vlen) = match family.tag() {
        FamilyTag::ShortestPathLp | FamilyTag::StochasticSp | FamilyTag::PortfolioQp => (n, 0),
        FamilyTag::MultiKnapsack => (0, n),
        FamilyTag::PortfolioMinlp => (n, n),
    };
    if x.x.len() != xlen || x.v.len() != vlen {
        return Err(Error::dim(format!(
            "{} expects x of length {xlen} and v of length {vlen}, got {} and {}",
            family.tag().name(),
            x.x.len(),
            x.v.len()
        )));
    }
    Ok(())
}

/// True objective `f(x; z)` in the family's natural sense.
pub fn eval_objective(family: &ProblemFamily, x: &Solution, z: &ProblemDescriptor) -> Result<f64> {
    check_dims(family, x, z)?;
    if !is_feasible(family, x, z, EVAL_TOL) {
        return Err(Error::Infeasible(format!(
            "decision is outside the {} feasible region",
            family.tag().name()
        )));
    }
    let value = match z {
        ProblemDescriptor::ShortestPath { costs, .. } => dot(costs, &x.x),
        ProblemDescriptor::MultiKnapsack { values, .. } => {
            let total: f64 = values.iter().zip(&x.v).filter(|(_, &s)| s).map(|(v, _)| v).sum();
            match family.sense() {
                Sense::Maximize => total,
                Sense::Minimize => -total,
            }
        }
        ProblemDescriptor::StochasticSp {
            means,
            variances,
            deadline,
            ..
        } => on_time_probability(dot(means, &x.x), dot(variances, &x.x), *deadline),
        ProblemDescriptor::PortfolioQp {
            mu,
            covariance,
            alpha,
        } => alpha * covariance.quad_form(&x.x)? - dot(mu, &x.x),
        ProblemDescriptor::PortfolioMinlp(p) => minlp_value(p, &x.x),
    };
    Ok(value)
}

fn is_path(grid_n: usize, x: &[f64], tol: f64) -> bool {
    let Ok(grid) = Grid::new(grid_n) else {
        return false;
    };
    if x.len() != grid.num_edges() {
        return false;
    }
    if x.iter().any(|&e| !(e.abs() <= tol || (e - 1.0).abs() <= tol)) {
        return false;
    }
    let mut balance = vec![0.0; grid.num_nodes()];
    for (&(u, v), &flow) in grid.edges().iter().zip(x) {
        balance[u] += flow;
        balance[v] -= flow;
    }
    balance.iter().enumerate().all(|(node, &b)| {
        let want = if node == grid.source() {
            1.0
        } else if node == grid.sink() {
            -1.0
        } else {
            0.0
        };
        (b - want).abs() <= tol * 4.0
    })
}

fn on_simplex(x: &[f64], tol: f64) -> bool {
    x.iter().all(|&v| v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
}

/// Whether `x` satisfies every constraint of the family within `tol`.
pub fn is_feasible(family: &ProblemFamily, x: &Solution, z: &ProblemDescriptor, tol: f64) -> bool {
    if check_dims(family, x, z).is_err() || x.x.iter().any(|v| !v.is_finite()) {
        return false;
    }
    match z {
        ProblemDescriptor::ShortestPath { grid_n, .. }
        | ProblemDescriptor::StochasticSp { grid_n, .. } => is_path(*grid_n, &x.x, tol),
        ProblemDescriptor::MultiKnapsack {
            weights,
            capacities,
            ..
        } => (0..capacities.len()).all(|d| {
            let load: f64 = weights
                .row(d)
                .iter()
                .zip(&x.v)
                .filter(|(_, &s)| s)
                .map(|(w, _)| w)
                .sum();
            load <= capacities[d] + tol
        }),
        ProblemDescriptor::PortfolioQp { .. } => on_simplex(&x.x, tol),
        ProblemDescriptor::PortfolioMinlp(p) => {
            let selected = x.v.iter().filter(|&&s| s).count();
            on_simplex(&x.x, tol)
                && selected >= p.min_assets
                && selected <= p.max_assets
                && x.x.iter().zip(&x.v).all(|(&xi, &vi)| {
                    let (lo, hi) = if vi { (p.f_min, p.f_max) } else { (0.0, 0.0) };
                    xi >= lo - tol && xi <= hi + tol
                })
        }
    }
}
