use std::cmp::Ordering;

use super::Solution;
use crate::diffmodels::{dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::problems::ProblemDescriptor;

/// Default stationarity tolerance for the quadratic portfolio solver.
pub const QP_TOL: f64 = 1e-8;
/// Default iteration cap for the quadratic portfolio solver.
pub const QP_MAX_ITER: usize = 50_000;

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn qp_gradient(mu_hat: &[f64], g: &DenseMatrix, alpha: f64, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| 2.0 * alpha * dot(g.row(i), x) - mu_hat[i])
        .collect()
}

/// `α xᵀGx − μ̂ᵀx`.
pub fn qp_objective(mu_hat: &[f64], g: &DenseMatrix, alpha: f64, x: &[f64]) -> f64 {
    let gx: Vec<f64> = (0..x.len()).map(|i| dot(g.row(i), x)).collect();
    alpha * dot(x, &gx) - dot(mu_hat, x)
}

/// Projected-gradient stationarity residual `‖x − Π(x − ∇f(x))‖∞`.
pub fn qp_kkt_residual(mu_hat: &[f64], g: &DenseMatrix, alpha: f64, x: &[f64]) -> f64 {
    let grad = qp_gradient(mu_hat, g, alpha, x);
    let step: Vec<f64> = x.iter().zip(&grad).map(|(a, b)| a - b).collect();
    project_simplex(&step)
        .iter()
        .zip(x)
        .map(|(p, a)| (p - a).abs())
        .fold(0.0, f64::max)
}

fn argmax_vertex(mu_hat: &[f64]) -> Vec<f64> {
    let mut best = 0;
    for (i, &m) in mu_hat.iter().enumerate() {
        if m > mu_hat[best] {
            best = i;
        }
    }
    let mut x = vec![0.0; mu_hat.len()];
    x[best] = 1.0;
    x
}

/// Minimizes `α xᵀGx − μ̂ᵀx` over the probability simplex with accelerated
/// projected gradient and gradient-based restarts. Terminates once the
/// stationarity residual drops to `tol`; otherwise returns
/// [`Error::NotConverged`] carrying the best iterate found.
pub fn solve_portfolio_qp(
    mu_hat: &[f64],
    g: &DenseMatrix,
    alpha: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Solution> {
    let k = mu_hat.len();
    if k == 0 {
        return Err(Error::invalid("portfolio needs at least one asset"));
    }
    if g.rows() != k || g.cols() != k {
        return Err(Error::dim(format!("covariance {}x{} for {k} assets", g.rows(), g.cols())));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::invalid(format!("alpha must be finite and non-negative, got {alpha}")));
    }
    if mu_hat.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("expected returns must be finite"));
    }
    let scale = g.as_slice().iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    if !g.is_symmetric(1e-9 * scale) {
        return Err(Error::invalid("covariance must be symmetric"));
    }
    if !g.cholesky_succeeds(1e-8 * scale) {
        return Err(Error::invalid("covariance must be positive semidefinite"));
    }

    let lambda = g.spectral_radius_estimate(2000);
    // Power iteration approaches the top eigenvalue from below.
    let lipschitz = 2.0 * alpha * lambda * 1.05;
    if lipschitz <= f64::MIN_POSITIVE {
        let x = argmax_vertex(mu_hat);
        let objective_surrogate = qp_objective(mu_hat, g, alpha, &x);
        return Ok(Solution {
            x,
            v: Vec::new(),
            objective_surrogate,
        });
    }
    let step = 1.0 / lipschitz;

    let mut x = vec![1.0 / k as f64; k];
    let mut y = x.clone();
    let mut t = 1.0_f64;
    let mut best_x = x.clone();
    let mut best_res = qp_kkt_residual(mu_hat, g, alpha, &x);
    if best_res <= tol {
        let objective_surrogate = qp_objective(mu_hat, g, alpha, &x);
        return Ok(Solution {
            x,
            v: Vec::new(),
            objective_surrogate,
        });
    }
    for _ in 0..max_iter {
        let grad_y = qp_gradient(mu_hat, g, alpha, &y);
        let trial: Vec<f64> = y.iter().zip(&grad_y).map(|(a, b)| a - step * b).collect();
        let x_next = project_simplex(&trial);
        let restart = grad_y
            .iter()
            .zip(x_next.iter().zip(&x))
            .map(|(gy, (xn, xo))| gy * (xn - xo))
            .sum::<f64>()
            > 0.0;
        if restart {
            t = 1.0;
            y = x_next.clone();
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            y = x_next
                .iter()
                .zip(&x)
                .map(|(xn, xo)| xn + beta * (xn - xo))
                .collect();
            t = t_next;
        }
        x = x_next;
        let res = qp_kkt_residual(mu_hat, g, alpha, &x);
        if res < best_res {
            best_res = res;
            best_x.clone_from(&x);
        }
        if res <= tol {
            if let Some(p) = polish_on_support(mu_hat, g, alpha, &x) {
                if qp_kkt_residual(mu_hat, g, alpha, &p) <= res {
                    x = p;
                }
            }
            let objective_surrogate = qp_objective(mu_hat, g, alpha, &x);
            return Ok(Solution {
                x,
                v: Vec::new(),
                objective_surrogate,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: best_res,
        best: best_x,
    })
}

/// Solves the equality-constrained KKT system on the support of `x`,
/// `2αG_SS x_S + ν1 = μ̂_S`, `1ᵀx_S = 1`, by Gaussian elimination with
/// partial pivoting. Returns `None` when the system is singular or the
/// solution leaves the simplex.
fn polish_on_support(mu_hat: &[f64], g: &DenseMatrix, alpha: f64, x: &[f64]) -> Option<Vec<f64>> {
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
    let n = support.len() + 1;
    let mut a = vec![0.0; n * (n + 1)];
    let w = n + 1;
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            a[r * w + c] = 2.0 * alpha * g.get(i, j);
        }
        a[r * w + n - 1] = 1.0;
        a[r * w + n] = mu_hat[i];
        a[(n - 1) * w + r] = 1.0;
    }
    a[(n - 1) * w + n] = 1.0;
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| a[p * w + col].abs().total_cmp(&a[q * w + col].abs()))?;
        if a[piv * w + col].abs() <= 1e-12 * scale {
            return None;
        }
        if piv != col {
            for c in 0..w {
                a.swap(piv * w + c, col * w + c);
            }
        }
        for r in 0..n {
            if r != col {
                let f = a[r * w + col] / a[col * w + col];
                if f != 0.0 {
                    for c in col..w {
                        a[r * w + c] -= f * a[col * w + c];
                    }
                }
            }
        }
    }
    let mut out = vec![0.0; x.len()];
    for (r, &i) in support.iter().enumerate() {
        let v = a[r * w + n] / a[r * w + r];
        if !(v.is_finite() && v >= 0.0) {
            return None;
        }
        out[i] = v;
    }
    Some(out)
}

fn lex_cmp(a: &[usize], b: &[usize]) -> Ordering {
    a.cmp(b)
}

/// Best allocation restricted to `support`: every held asset starts at the
/// minimum fraction and the remainder is poured into the cheapest assets up
/// to the maximum fraction. Returns `None` when the support cannot sum to one.
pub(crate) fn fill_support(c: &[f64], support: &[usize], f_min: f64, f_max: f64) -> Option<Vec<f64>> {
    let s = support.len() as f64;
    if s * f_min > 1.0 + 1e-12 || s * f_max < 1.0 - 1e-12 {
        return None;
    }
    let mut by_cost = support.to_vec();
    by_cost.sort_by(|&a, &b| c[a].total_cmp(&c[b]).then(a.cmp(&b)));
    let mut x = vec![0.0; c.len()];
    for &i in support {
        x[i] = f_min;
    }
    let mut residual = 1.0 - s * f_min;
    for &i in &by_cost {
        if residual <= 0.0 {
            break;
        }
        let add = (f_max - f_min).min(residual);
        x[i] += add;
        residual -= add;
    }
    Some(x)
}

/// Solves the linear surrogate of the cardinality-constrained portfolio:
/// minimize `cᵀx` over `Σx = 1`, `f_min·v ≤ x ≤ f_max·v`, `m ≤ Σv ≤ M`.
///
/// For a fixed support size the cheapest assets form an optimal support (an
/// exchange argument), so each size is checked once. Ties between equal
/// objectives resolve to the lexicographically smallest support.
pub fn solve_portfolio_milp(c: &[f64], z: &ProblemDescriptor) -> Result<Solution> {
    let p = match z {
        ProblemDescriptor::PortfolioMinlp(p) => p,
        other => {
            return Err(Error::invalid(format!(
                "expected a portfolio_minlp descriptor, got {}",
                other.tag().name()
            )))
        }
    };
    let k = p.k();
    if c.len() != k {
        return Err(Error::dim(format!("{} costs for {k} assets", c.len())));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("surrogate costs must be finite"));
    }
    let (lo, hi) = p
        .support_size_range()
        .ok_or_else(|| Error::invalid("no support size satisfies the cardinality and fraction bounds"))?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| c[a].total_cmp(&c[b]).then(a.cmp(&b)));

    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    for s in lo..=hi {
        let mut support = order[..s].to_vec();
        support.sort_unstable();
        let Some(x) = fill_support(c, &support, p.f_min, p.f_max) else {
            continue;
        };
        let value: f64 = support.iter().map(|&i| c[i] * x[i]).sum();
        let better = match &best {
            None => true,
            Some((bv, bs, _)) => value < *bv || (value == *bv && lex_cmp(&support, bs) == Ordering::Less),
        };
        if better {
            best = Some((value, support, x));
        }
    }
    let (value, support, x) =
        best.ok_or_else(|| Error::invalid("no feasible support for the given fraction bounds"))?;
    let mut v = vec![false; k];
    for &i in &support {
        v[i] = true;
    }
    Ok(Solution {
        x,
        v,
        objective_surrogate: value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection_basics() {
        assert_eq!(project_simplex(&[0.2, 0.3, 0.5]), vec![0.2, 0.3, 0.5]);
        assert_eq!(project_simplex(&[5.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[1.0, 1.0, 1.0, 1.0]);
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn two_asset_closed_form() {
        // f(x) = α(x₁² + x₂²) − μ₁x₁ − μ₂x₂ on x₁ + x₂ = 1:
        // x₁ = 1/2 + (μ₁ − μ₂)/(4α).
        let g = DenseMatrix::identity(2);
        let s = solve_portfolio_qp(&[0.3, 0.1], &g, 1.0, QP_TOL, QP_MAX_ITER).unwrap();
        assert!((s.x[0] - 0.55).abs() < 1e-7, "{:?}", s.x);
    }

    #[test]
    fn zero_risk_picks_best_vertex() {
        let g = DenseMatrix::zeros(3, 3);
        let s = solve_portfolio_qp(&[0.1, 0.4, 0.4], &g, 0.1, QP_TOL, QP_MAX_ITER).unwrap();
        assert_eq!(s.x, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn indefinite_covariance_is_rejected() {
        let g = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_portfolio_qp(&[0.0, 0.0], &g, 1.0, QP_TOL, QP_MAX_ITER),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let g = DenseMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 2.0]]).unwrap();
        match solve_portfolio_qp(&[0.1, 0.09], &g, 1.0, 1e-300, 3) {
            Err(Error::NotConverged { iterations, best, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(best.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fill_respects_bounds() {
        let x = fill_support(&[3.0, 1.0, 2.0, 0.0], &[0, 1, 2], 0.1, 0.5).unwrap();
        assert_eq!(x[3], 0.0);
        assert!((x[1] - 0.5).abs() < 1e-15);
        assert!((x[2] - 0.4).abs() < 1e-15);
        assert!((x[0] - 0.1).abs() < 1e-15);
        assert!(fill_support(&[0.0; 4], &[0, 1], 0.1, 0.2).is_none());
    }
}
