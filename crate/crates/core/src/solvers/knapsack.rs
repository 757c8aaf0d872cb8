use super::Solution;
use crate::diffmodels::DenseMatrix;
use crate::error::{Error, Result};

/// Proof data returned alongside a knapsack optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackCertificate {
    /// Search nodes expanded.
    pub nodes: u64,
    /// Largest relaxation bound of any pruned subtree (or the optimum when
    /// nothing was pruned). Never exceeds the optimum by more than round-off.
    pub bound: f64,
}

struct Search<'a> {
    values: &'a [f64],
    weights: &'a DenseMatrix,
    capacities: &'a [f64],
    /// Candidate items in branching order.
    order: Vec<usize>,
    /// Surrogate (averaged, capacity-normalized) weight per item.
    agg: Vec<f64>,
    /// Per-dimension candidate orderings by value density.
    dim_orders: Vec<Vec<usize>>,
    /// Position of each item in `order`.
    position: Vec<usize>,
    best_value: f64,
    best: Vec<bool>,
    current: Vec<bool>,
    nodes: u64,
    pruned_bound: f64,
}

const PRUNE_EPS: f64 = 1e-12;

impl Search<'_> {
    /// Upper bound on the value reachable from branching position `pos`
    /// with residual capacities `resid`: the minimum of the averaged
    /// surrogate relaxation and every single-dimension fractional relaxation.
    fn bound(&self, pos: usize, resid: &[f64]) -> f64 {
        let dims = self.capacities.len() as f64;
        let mut cap: f64 = resid
            .iter()
            .zip(self.capacities)
            .map(|(r, c)| if *c > 0.0 { r / c } else { 0.0 })
            .sum::<f64>()
            / dims;
        let mut best = 0.0;
        for &i in &self.order[pos..] {
            let w = self.agg[i];
            if w <= cap {
                best += self.values[i];
                cap -= w;
            } else {
                best += self.values[i] * cap / w;
                break;
            }
        }
        for (d, ord) in self.dim_orders.iter().enumerate() {
            let mut cap = resid[d];
            let mut b = 0.0;
            for &i in ord {
                if self.position[i] < pos {
                    continue;
                }
                let w = self.weights.get(d, i);
                if w <= cap {
                    b += self.values[i];
                    cap -= w;
                } else {
                    b += self.values[i] * cap / w;
                    break;
                }
            }
            best = f64::min(best, b);
        }
        best
    }

    fn dfs(&mut self, pos: usize, value: f64, resid: &mut Vec<f64>) {
        self.nodes += 1;
        if value > self.best_value + PRUNE_EPS {
            self.best_value = value;
            self.best.clone_from(&self.current);
        }
        if pos == self.order.len() {
            return;
        }
        let bound = value + self.bound(pos, resid);
        if bound <= self.best_value + PRUNE_EPS * (1.0 + self.best_value.abs()) {
            self.pruned_bound = self.pruned_bound.max(bound);
            return;
        }
        let item = self.order[pos];
        let fits = (0..resid.len()).all(|d| self.weights.get(d, item) <= resid[d]);
        if fits {
            for (d, r) in resid.iter_mut().enumerate() {
                *r -= self.weights.get(d, item);
            }
            self.current[item] = true;
            self.dfs(pos + 1, value + self.values[item], resid);
            self.current[item] = false;
            for (d, r) in resid.iter_mut().enumerate() {
                *r += self.weights.get(d, item);
            }
        }
        self.dfs(pos + 1, value, resid);
    }
}

fn check(values: &[f64], weights: &DenseMatrix, capacities: &[f64]) -> Result<()> {
    if weights.rows() != capacities.len() || weights.cols() != values.len() {
        return Err(Error::dim(format!(
            "weights {}x{} vs {} dims and {} items",
            weights.rows(),
            weights.cols(),
            capacities.len(),
            values.len()
        )));
    }
    if capacities.is_empty() {
        return Err(Error::invalid("knapsack needs at least one dimension"));
    }
    if values.iter().chain(capacities).any(|v| !v.is_finite()) {
        return Err(Error::invalid("knapsack values and capacities must be finite"));
    }
    if capacities.iter().any(|&c| c < 0.0) || weights.as_slice().iter().any(|&w| w < 0.0) {
        return Err(Error::invalid("weights and capacities must be non-negative"));
    }
    Ok(())
}

/// Exact 0/1 multidimensional knapsack (maximize `valuesᵀv` subject to
/// `weights · v ≤ capacities`) by depth-first branch and bound.
pub fn solve_multiknapsack(values: &[f64], weights: &DenseMatrix, capacities: &[f64]) -> Result<Solution> {
    Ok(solve_multiknapsack_certified(values, weights, capacities)?.0)
}

pub fn solve_multiknapsack_certified(
    values: &[f64],
    weights: &DenseMatrix,
    capacities: &[f64],
) -> Result<(Solution, KnapsackCertificate)> {
    check(values, weights, capacities)?;
    let k = values.len();
    let dims = capacities.len();
    // Non-positive values never help a maximization with non-negative
    // weights; items that cannot fit alone are dropped as well.
    let candidates: Vec<usize> = (0..k)
        .filter(|&i| values[i] > 0.0 && (0..dims).all(|d| weights.get(d, i) <= capacities[d]))
        .collect();
    let agg: Vec<f64> = (0..k)
        .map(|i| {
            (0..dims)
                .map(|d| {
                    let c = capacities[d];
                    if c > 0.0 {
                        weights.get(d, i) / c
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
                / dims as f64
        })
        .collect();
    let density = |v: f64, w: f64| if w > 0.0 { v / w } else { f64::INFINITY };
    let mut order = candidates.clone();
    order.sort_by(|&a, &b| {
        density(values[b], agg[b])
            .total_cmp(&density(values[a], agg[a]))
            .then(a.cmp(&b))
    });
    let dim_orders = (0..dims)
        .map(|d| {
            let mut o = candidates.clone();
            o.sort_by(|&a, &b| {
                density(values[b], weights.get(d, b))
                    .total_cmp(&density(values[a], weights.get(d, a)))
                    .then(a.cmp(&b))
            });
            o
        })
        .collect();
    let mut position = vec![usize::MAX; k];
    for (p, &i) in order.iter().enumerate() {
        position[i] = p;
    }

    // Greedy incumbent.
    let mut resid = capacities.to_vec();
    let mut greedy = vec![false; k];
    let mut greedy_value = 0.0;
    for &i in &order {
        if (0..dims).all(|d| weights.get(d, i) <= resid[d]) {
            for (d, r) in resid.iter_mut().enumerate() {
                *r -= weights.get(d, i);
            }
            greedy[i] = true;
            greedy_value += values[i];
        }
    }

    let mut search = Search {
        values,
        weights,
        capacities,
        order,
        agg,
        dim_orders,
        position,
        best_value: greedy_value,
        best: greedy,
        current: vec![false; k],
        nodes: 0,
        pruned_bound: f64::NEG_INFINITY,
    };
    let mut resid = capacities.to_vec();
    search.dfs(0, 0.0, &mut resid);

    // Recompute the value in index order so equal selections give equal bits.
    let objective: f64 = (0..k).filter(|&i| search.best[i]).map(|i| values[i]).sum();
    let bound = search.pruned_bound.max(objective);
    Ok((
        Solution {
            x: Vec::new(),
            v: search.best,
            objective_surrogate: objective,
        },
        KnapsackCertificate {
            nodes: search.nodes,
            bound,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(rows: &[Vec<f64>]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn negative_values_select_nothing() {
        let s = solve_multiknapsack(&[-1.0, -0.5, 0.0], &w(&[vec![0.1, 0.2, 0.3]]), &[10.0]).unwrap();
        assert_eq!(s.v, vec![false; 3]);
        assert_eq!(s.objective_surrogate, 0.0);
    }

    #[test]
    fn ample_capacity_selects_everything() {
        let weights = w(&[vec![0.5, 0.5, 0.5], vec![1.0, 0.2, 0.3]]);
        let s = solve_multiknapsack(&[1.0, 2.0, 3.0], &weights, &[1.5, 1.5]).unwrap();
        assert_eq!(s.v, vec![true; 3]);
    }

    #[test]
    fn single_item() {
        let s = solve_multiknapsack(&[2.0], &w(&[vec![0.5]]), &[1.0]).unwrap();
        assert_eq!(s.v, vec![true]);
        let s = solve_multiknapsack(&[2.0], &w(&[vec![1.5]]), &[1.0]).unwrap();
        assert_eq!(s.v, vec![false]);
    }

    #[test]
    fn classic_small_instance() {
        // Greedy by density takes items 0 and 1 (value 10); optimum is 1 + 2.
        let weights = w(&[vec![1.0, 2.0, 3.0]]);
        let (s, cert) = solve_multiknapsack_certified(&[6.0, 4.0, 5.0], &weights, &[4.0]).unwrap();
        assert_eq!(s.objective_surrogate, 11.0);
        assert_eq!(s.v, vec![true, false, true]);
        assert!(cert.bound <= 11.0 + 1e-9);
    }
}
