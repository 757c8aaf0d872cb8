use crate::error::{Error, Result};

/// Directed `n × n` grid: every node links to its right and lower neighbour.
/// Nodes are numbered row-major; the source is the top-left node, the sink the
/// bottom-right one. Edges are numbered by visiting nodes row-major and
/// emitting the right edge before the down edge, which also makes row-major
/// node order a topological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    n: usize,
    edges: Vec<(usize, usize)>,
    incoming: Vec<Vec<(usize, usize)>>,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("grid side must be at least 2, got {n}")));
        }
        if n > 4096 {
            return Err(Error::invalid(format!("grid side {n} is too large")));
        }
        let mut edges = Vec::with_capacity(2 * n * (n - 1));
        let mut incoming = vec![Vec::new(); n * n];
        for r in 0..n {
            for c in 0..n {
                let u = r * n + c;
                if c + 1 < n {
                    incoming[u + 1].push((edges.len(), u));
                    edges.push((u, u + 1));
                }
                if r + 1 < n {
                    incoming[u + n].push((edges.len(), u));
                    edges.push((u, u + n));
                }
            }
        }
        Ok(Grid { n, edges, incoming })
    }

    /// Recovers the grid side from an edge count `2n(n-1)`.
    pub fn side_for_edges(num_edges: usize) -> Option<usize> {
        (2..=4096).find(|&n| 2 * n * (n - 1) == num_edges)
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn num_nodes(&self) -> usize {
        self.n * self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        self.n * self.n - 1
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `(edge index, tail node)` pairs entering `node`, lowest edge index first.
    pub fn incoming(&self, node: usize) -> &[(usize, usize)] {
        &self.incoming[node]
    }

    /// Number of monotone source-to-sink paths, `C(2(n-1), n-1)`.
    pub fn path_count(&self) -> u128 {
        let k = (self.n - 1) as u128;
        (1..=k).fold(1u128, |acc, i| acc * (k + i) / i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts() {
        assert_eq!(Grid::new(5).unwrap().num_edges(), 40);
        assert_eq!(Grid::new(2).unwrap().num_edges(), 4);
        assert_eq!(Grid::new(2).unwrap().path_count(), 2);
        assert_eq!(Grid::new(5).unwrap().path_count(), 70);
        assert_eq!(Grid::side_for_edges(40), Some(5));
        assert!(Grid::new(1).is_err());
    }

    #[test]
    fn edges_point_forward() {
        let g = Grid::new(4).unwrap();
        assert!(g.edges().iter().all(|&(u, v)| v == u + 1 || v == u + 4));
    }
}
