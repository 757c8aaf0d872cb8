//! Test oracles written independently of the library code they check. They
//! take plain slices so no library type or routine is reused.

/// Cheapest source→sink path cost by depth-first enumeration of every path
/// over an explicit edge list.
pub fn min_path_cost(edges: &[(usize, usize)], source: usize, sink: usize, c: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    visit_paths(edges, source, sink, &mut Vec::new(), &mut |p| {
        let cost: f64 = p.iter().map(|&e| c[e]).sum();
        best = best.min(cost);
    });
    best
}

/// Calls `f` with the edge indices of every source→sink path.
pub fn visit_paths(edges: &[(usize, usize)], node: usize, sink: usize, stack: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if node == sink {
        f(stack);
        return;
    }
    for (e, &(u, v)) in edges.iter().enumerate() {
        if u == node {
            stack.push(e);
            visit_paths(edges, v, sink, stack, f);
            stack.pop();
        }
    }
}

/// Best knapsack value over all `2^n` subsets; `weights[d][i]`.
pub fn knapsack_max(values: &[f64], weights: &[Vec<f64>], capacities: &[f64]) -> f64 {
    let n = values.len();
    assert!(n <= 24, "subset enumeration limited to 24 items");
    let mut best = 0.0f64;
    for mask in 0u32..1 << n {
        let fits = weights.iter().zip(capacities).all(|(row, cap)| {
            (0..n).filter(|i| mask >> i & 1 == 1).map(|i| row[i]).sum::<f64>() <= *cap
        });
        if fits {
            let v: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).sum();
            best = best.max(v);
        }
    }
    best
}

/// Minimum of `cᵀx` over `{Σx = 1, f_min ≤ x_i ≤ f_max on the support, x_i = 0
/// off it, min_assets ≤ |support| ≤ max_assets}` by enumerating every support
/// and every vertex of its box-simplex slice (all coordinates at a bound but
/// at most one).
pub fn cardinality_lp_min(c: &[f64], f_min: f64, f_max: f64, min_assets: usize, max_assets: usize) -> Option<f64> {
    let k = c.len();
    assert!(k <= 16, "support enumeration limited to 16 assets");
    let mut best: Option<f64> = None;
    for mask in 1u32..1 << k {
        let support: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        let s = support.len();
        if s < min_assets || s > max_assets {
            continue;
        }
        for free in 0..=s {
            let fixed: Vec<usize> = (0..s).filter(|&j| j != free).collect();
            for hi_mask in 0u32..1 << fixed.len() {
                let mut x = vec![0.0; s];
                let mut total = 0.0;
                for (b, &j) in fixed.iter().enumerate() {
                    x[j] = if hi_mask >> b & 1 == 1 { f_max } else { f_min };
                    total += x[j];
                }
                if free < s {
                    x[free] = 1.0 - total;
                    if x[free] < f_min - 1e-12 || x[free] > f_max + 1e-12 {
                        continue;
                    }
                } else if (total - 1.0).abs() > 1e-12 {
                    continue;
                }
                let v: f64 = support.iter().zip(&x).map(|(&i, xi)| c[i] * xi).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    }
    best
}

fn density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (density(lm), density(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive_simpson(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive_simpson(m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Standard normal CDF as `1/2 + ∫₀ᵗ φ` by adaptive Simpson quadrature.
pub fn normal_cdf_quadrature(t: f64) -> f64 {
    let (fa, fm, fb) = (density(0.0), density(0.5 * t), density(t));
    let whole = t / 6.0 * (fa + 4.0 * fm + fb);
    0.5 + adaptive_simpson(0.0, t, fa, fm, fb, whole, 1e-15, 60)
}

/// Central finite-difference gradient of `f` at `x` with step `h`.
pub fn central_difference(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `max_i |a_i − b_i| / max(max_i |b_i|, floor)`.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(floor, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// Minimizer of `α xᵀGx − μᵀx` over the 2-asset simplex in closed form.
pub fn two_asset_qp(mu: [f64; 2], g: [[f64; 2]; 2], alpha: f64) -> [f64; 2] {
    let curvature = 2.0 * alpha * (g[0][0] - 2.0 * g[0][1] + g[1][1]);
    let slope0 = mu[0] - mu[1] + 2.0 * alpha * (g[1][1] - g[0][1]);
    let x0 = if curvature > 0.0 {
        (slope0 / curvature).clamp(0.0, 1.0)
    } else if slope0 >= 0.0 {
        1.0
    } else {
        0.0
    };
    [x0, 1.0 - x0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_paths_on_a_square() {
        // 0 → 1 → 3 and 0 → 2 → 3.
        let edges = [(0, 1), (0, 2), (1, 3), (2, 3)];
        let mut count = 0;
        visit_paths(&edges, 0, 3, &mut Vec::new(), &mut |_| count += 1);
        assert_eq!(count, 2);
        assert_eq!(min_path_cost(&edges, 0, 3, &[1.0, 5.0, 4.0, -1.0]), 4.0);
    }

    #[test]
    fn tiny_knapsack() {
        let v = knapsack_max(&[3.0, 4.0, 5.0], &[vec![2.0, 3.0, 4.0]], &[5.0]);
        assert_eq!(v, 7.0);
    }

    #[test]
    fn cardinality_lp_on_three_assets() {
        let best = cardinality_lp_min(&[1.0, 2.0, 3.0], 0.1, 0.8, 2, 3).unwrap();
        assert!((best - (0.8 + 2.0 * 0.2)).abs() < 1e-12);
    }

    #[test]
    fn quadrature_reference_value() {
        assert!((normal_cdf_quadrature(1.96) - 0.9750021048517795).abs() < 1e-13);
    }
}
