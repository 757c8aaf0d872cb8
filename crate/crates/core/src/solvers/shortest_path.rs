use super::Solution;
use crate::error::{Error, Result};
use crate::problems::Grid;

/// Minimum-cost source→sink path on the directed grid by dynamic programming
/// over the row-major topological order. Costs may have any sign. Ties go to
/// the lowest incoming edge index.
pub fn solve_dag_shortest_path(grid_n: usize, c: &[f64]) -> Result<Solution> {
    let grid = Grid::new(grid_n)?;
    shortest_path_on(&grid, c)
}

pub(crate) fn shortest_path_on(grid: &Grid, c: &[f64]) -> Result<Solution> {
    if c.len() != grid.num_edges() {
        return Err(Error::dim(format!(
            "{0}x{0} grid has {1} edges, got {2} costs",
            grid.side(),
            grid.num_edges(),
            c.len()
        )));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("edge costs must be finite"));
    }
    let n = grid.num_nodes();
    let mut dist = vec![f64::INFINITY; n];
    let mut via = vec![usize::MAX; n];
    dist[grid.source()] = 0.0;
    for node in 1..n {
        for &(edge, from) in grid.incoming(node) {
            let cand = dist[from] + c[edge];
            if cand < dist[node] {
                dist[node] = cand;
                via[node] = edge;
            }
        }
    }
    let mut x = vec![0.0; grid.num_edges()];
    let mut node = grid.sink();
    while node != grid.source() {
        let edge = via[node];
        x[edge] = 1.0;
        node = grid.edges()[edge].0;
    }
    Ok(Solution {
        x,
        v: Vec::new(),
        objective_surrogate: dist[grid.sink()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_costs_on_2x2() {
        let s = solve_dag_shortest_path(2, &[1.0; 4]).unwrap();
        assert_eq!(s.objective_surrogate, 2.0);
        assert_eq!(s.x.iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn dominant_negative_edge_is_used() {
        let grid = Grid::new(4).unwrap();
        for edge in 0..grid.num_edges() {
            let mut c = vec![1.0; grid.num_edges()];
            c[edge] = -10.0;
            let s = shortest_path_on(&grid, &c).unwrap();
            assert_eq!(s.x[edge], 1.0, "edge {edge}");
        }
    }

    #[test]
    fn wrong_length_is_an_error() {
        assert!(matches!(solve_dag_shortest_path(3, &[1.0; 5]), Err(Error::Dimension(_))));
    }
}
