//! Exhaustive reference solvers for small instances.

use super::portfolio::fill_support;
use super::Solution;
use crate::diffmodels::DenseMatrix;
use crate::error::{Error, Result};
use crate::problems::{on_time_probability, FamilyTag, Grid, ProblemDescriptor, ProblemFamily, Sense};

/// Largest number of candidates an exhaustive search will visit.
pub const ENUMERATION_LIMIT: u128 = 1 << 20;

/// Calls `visit` with the edge list of every source→sink path, in
/// depth-first order (right before down).
pub fn for_each_path(grid: &Grid, mut visit: impl FnMut(&[usize])) -> Result<()> {
    if grid.path_count() > ENUMERATION_LIMIT {
        return Err(Error::TooLarge(format!("{} paths", grid.path_count())));
    }
    let mut outgoing = vec![Vec::new(); grid.num_nodes()];
    for (e, &(tail, _)) in grid.edges().iter().enumerate() {
        outgoing[tail].push(e);
    }
    fn rec(
        grid: &Grid,
        outgoing: &[Vec<usize>],
        node: usize,
        path: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if node == grid.sink() {
            visit(path);
            return;
        }
        for &e in &outgoing[node] {
            path.push(e);
            rec(grid, outgoing, grid.edges()[e].1, path, visit);
            path.pop();
        }
    }
    let mut path = Vec::with_capacity(2 * grid.side());
    rec(grid, &outgoing, grid.source(), &mut path, &mut visit);
    Ok(())
}

fn indicator(len: usize, on: &[usize]) -> Vec<f64> {
    let mut x = vec![0.0; len];
    for &e in on {
        x[e] = 1.0;
    }
    x
}

fn path_oracle(grid_n: usize, c: &[f64]) -> Result<Solution> {
    let grid = Grid::new(grid_n)?;
    if c.len() != grid.num_edges() {
        return Err(Error::dim(format!("{} costs for {} edges", c.len(), grid.num_edges())));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_path(&grid, |path| {
        let mut cost = 0.0;
        for &e in path {
            cost += c[e];
        }
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, path.to_vec()));
        }
    })?;
    let (cost, path) = best.expect("grid has at least one path");
    Ok(Solution {
        x: indicator(grid.num_edges(), &path),
        v: Vec::new(),
        objective_surrogate: cost,
    })
}

fn subset_oracle(values: &[f64], weights: &DenseMatrix, capacities: &[f64], sense: Sense) -> Result<Solution> {
    let k = values.len();
    if k > 20 {
        return Err(Error::TooLarge(format!("2^{k} subsets")));
    }
    if weights.cols() != k || weights.rows() != capacities.len() {
        return Err(Error::dim("knapsack weights do not match values and capacities"));
    }
    let sign = match sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut best_mask = 0u32;
    let mut best_value = 0.0;
    for mask in 1u32..(1u32 << k) {
        let fits = (0..capacities.len()).all(|d| {
            let load: f64 = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| weights.get(d, i)).sum();
            load <= capacities[d]
        });
        if !fits {
            continue;
        }
        let value: f64 = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).sum();
        if sign * value > sign * best_value {
            best_value = value;
            best_mask = mask;
        }
    }
    Ok(Solution {
        x: Vec::new(),
        v: (0..k).map(|i| best_mask >> i & 1 == 1).collect(),
        objective_surrogate: best_value,
    })
}

fn binomial(n: usize, r: usize) -> u128 {
    let r = r.min(n - r.min(n));
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Calls `visit` with every `r`-subset of `0..n` in lexicographic order.
pub fn for_each_combination(n: usize, r: usize, mut visit: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        visit(&idx);
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Minimizes `cᵀx` over `{Σx = 1, lo ≤ x_i ≤ hi}` on `support` by checking
/// every vertex: all coordinates but one sit at a bound.
pub fn vertex_lp(c: &[f64], support: &[usize], lo: f64, hi: f64) -> Option<(f64, Vec<f64>)> {
    let s = support.len();
    if s == 0 || s > 16 {
        return None;
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for free in 0..s {
        for mask in 0u32..(1u32 << (s - 1)) {
            let mut x = vec![0.0; c.len()];
            let mut total = 0.0;
            let mut bit = 0;
            for (pos, &i) in support.iter().enumerate() {
                if pos == free {
                    continue;
                }
                x[i] = if mask >> bit & 1 == 1 { hi } else { lo };
                total += x[i];
                bit += 1;
            }
            let rest = 1.0 - total;
            if rest < lo - 1e-12 || rest > hi + 1e-12 {
                continue;
            }
            x[support[free]] = rest.clamp(lo, hi);
            let value: f64 = support.iter().map(|&i| c[i] * x[i]).sum();
            if best.as_ref().is_none_or(|(b, _)| value < *b - 1e-15) {
                best = Some((value, x));
            }
        }
    }
    best
}

fn support_oracle(c: &[f64], z: &ProblemDescriptor) -> Result<Solution> {
    let ProblemDescriptor::PortfolioMinlp(p) = z else {
        unreachable!("checked by caller")
    };
    let k = p.k();
    if c.len() != k {
        return Err(Error::dim(format!("{} costs for {k} assets", c.len())));
    }
    let (lo, hi) = p
        .support_size_range()
        .ok_or_else(|| Error::invalid("no feasible support size"))?;
    if hi > 16 {
        return Err(Error::TooLarge(format!("supports of size {hi}")));
    }
    let total: u128 = (lo..=hi).map(|s| binomial(k, s)).sum();
    if total > ENUMERATION_LIMIT {
        return Err(Error::TooLarge(format!("{total} supports")));
    }
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    for s in lo..=hi {
        for_each_combination(k, s, |support| {
            let Some((value, x)) = vertex_lp(c, support, p.f_min, p.f_max) else {
                return;
            };
            if best.as_ref().is_none_or(|(b, _, _)| value < *b - 1e-12) {
                best = Some((value, support.to_vec(), x));
            }
        });
    }
    let (value, support, x) = best.ok_or_else(|| Error::invalid("no feasible support"))?;
    debug_assert!(fill_support(c, &support, p.f_min, p.f_max).is_some());
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

/// Solves the linear surrogate problem by exhaustive enumeration. Refuses
/// instances beyond [`ENUMERATION_LIMIT`] candidates and the continuous
/// quadratic family.
pub fn brute_force_oracle(family: &ProblemFamily, z: &ProblemDescriptor, c: &[f64]) -> Result<Solution> {
    if family.tag() != z.tag() {
        return Err(Error::invalid("family does not match descriptor"));
    }
    match z {
        ProblemDescriptor::ShortestPath { grid_n, .. } | ProblemDescriptor::StochasticSp { grid_n, .. } => {
            path_oracle(*grid_n, c)
        }
        ProblemDescriptor::MultiKnapsack {
            weights, capacities, ..
        } => subset_oracle(c, weights, capacities, family.sense()),
        ProblemDescriptor::PortfolioQp { .. } => Err(Error::invalid(
            "the quadratic portfolio problem is continuous and cannot be enumerated",
        )),
        ProblemDescriptor::PortfolioMinlp(_) => support_oracle(c, z),
    }
}

/// Best decision under the true objective, by enumeration. Supported for
/// the shortest-path, stochastic shortest-path and knapsack families.
pub fn exhaustive_true_optimum(family: &ProblemFamily, z: &ProblemDescriptor) -> Result<Solution> {
    match (family.tag(), z) {
        (FamilyTag::ShortestPathLp, ProblemDescriptor::ShortestPath { grid_n, costs }) => path_oracle(*grid_n, costs),
        (
            FamilyTag::MultiKnapsack,
            ProblemDescriptor::MultiKnapsack {
                values,
                weights,
                capacities,
            },
        ) => {
            let mut s = subset_oracle(values, weights, capacities, Sense::Maximize)?;
            if family.sense() == Sense::Minimize {
                s.objective_surrogate = -s.objective_surrogate;
            }
            Ok(s)
        }
        (
            FamilyTag::StochasticSp,
            ProblemDescriptor::StochasticSp {
                grid_n,
                means,
                variances,
                deadline,
            },
        ) => {
            let grid = Grid::new(*grid_n)?;
            let mut best: Option<(f64, Vec<usize>)> = None;
            for_each_path(&grid, |path| {
                let (mut m, mut v) = (0.0, 0.0);
                for &e in path {
                    m += means[e];
                    v += variances[e];
                }
                let p = on_time_probability(m, v, *deadline);
                if best.as_ref().is_none_or(|(b, _)| p > *b) {
                    best = Some((p, path.to_vec()));
                }
            })?;
            let (p, path) = best.expect("grid has at least one path");
            Ok(Solution {
                x: indicator(grid.num_edges(), &path),
                v: Vec::new(),
                objective_surrogate: p,
            })
        }
        _ => Err(Error::invalid(format!(
            "no exhaustive true optimum for {}",
            family.tag().name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_are_counted() {
        for (n, r) in [(5, 0), (5, 2), (6, 3), (4, 4)] {
            let mut count = 0u128;
            let mut last: Option<Vec<usize>> = None;
            for_each_combination(n, r, |s| {
                if let Some(l) = &last {
                    assert!(l.as_slice() < s);
                }
                last = Some(s.to_vec());
                count += 1;
            });
            assert_eq!(count, binomial(n, r), "n={n} r={r}");
        }
    }

    #[test]
    fn path_enumeration_count() {
        for n in 2..=5 {
            let g = Grid::new(n).unwrap();
            let mut count = 0u128;
            for_each_path(&g, |p| {
                assert_eq!(p.len(), 2 * (n - 1));
                count += 1;
            })
            .unwrap();
            assert_eq!(count, g.path_count());
        }
    }

    #[test]
    fn vertex_lp_fills_cheapest() {
        let (value, x) = vertex_lp(&[1.0, 0.0, 2.0], &[0, 1, 2], 0.1, 0.6).unwrap();
        assert!((x[1] - 0.6).abs() < 1e-12);
        assert!((x[0] - 0.3).abs() < 1e-12);
        assert!((value - (0.3 + 0.2)).abs() < 1e-12);
    }
}
