//! Synthetic instance generators. Every generator is a pure function of its
//! arguments and seed.

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::grid::Grid;
use super::types::{
    DeadlineMode, Dataset, FamilyTag, GeneratorParams, Instance, MinlpPortfolio, ProblemDescriptor,
    ProblemFamily,
};
use crate::diffmodels::{DenseMatrix, MlpModel};
use crate::error::{Error, Result};
use crate::rng::{self, streams};
use crate::solvers::solve_dag_shortest_path;

/// Knapsack capacity used when none is configured. The main-text figure of 45
/// remains available through configuration.
pub const DEFAULT_KNAPSACK_CAPACITY: f64 = 40.0;

fn normal_vec(rng: &mut rng::Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Shortest-path instances on a `grid_n × grid_n` grid with features
/// `y ~ N(0, I)` and edge costs
/// `z_j = [((B y)_j / √p + 3)^deg / 3.5^deg + 1] · ε_j`,
/// `B ∈ {±1}^{E×p}` fixed per dataset and `ε_j ~ U(1 − h, 1 + h)`.
pub fn gen_shortest_path_dataset(
    grid_n: usize,
    n_instances: usize,
    feat_dim: usize,
    poly_deg: u32,
    noise_halfwidth: f64,
    seed: u64,
) -> Result<Dataset> {
    let grid = Grid::new(grid_n)?;
    if feat_dim == 0 || n_instances == 0 || poly_deg == 0 {
        return Err(Error::invalid(
            "feat_dim, n_instances and poly_deg must be positive",
        ));
    }
    if !(0.0..1.0).contains(&noise_halfwidth) {
        return Err(Error::invalid("noise half-width must lie in [0, 1)"));
    }
    let edges = grid.num_edges();
    let mut proj_rng = rng::stream(seed, streams::GRID_PROJECTION);
    let projection: Vec<f64> = (0..edges * feat_dim)
        .map(|_| if proj_rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let projection = DenseMatrix::from_vec(edges, feat_dim, projection)?;

    let mut feat_rng = rng::stream(seed, streams::GRID_FEATURES);
    let mut noise_rng = rng::stream(seed, streams::GRID_NOISE);
    let scale = (feat_dim as f64).sqrt();
    let denom = 3.5f64.powi(poly_deg as i32);
    let instances = (0..n_instances)
        .map(|_| {
            let y = normal_vec(&mut feat_rng, feat_dim);
            let by = projection.matvec(&y).expect("matching dims");
            let costs = by
                .iter()
                .map(|&v| {
                    let eps = if noise_halfwidth > 0.0 {
                        noise_rng.random_range(1.0 - noise_halfwidth..1.0 + noise_halfwidth)
                    } else {
                        1.0
                    };
                    ((v / scale + 3.0).powi(poly_deg as i32) / denom + 1.0) * eps
                })
                .collect();
            Instance {
                y,
                z: ProblemDescriptor::ShortestPath { grid_n, costs },
            }
        })
        .collect();
    Dataset::new(
        ProblemFamily::new(FamilyTag::ShortestPathLp),
        seed,
        GeneratorParams::ShortestPath {
            grid_n,
            feat_dim,
            poly_deg,
            noise_halfwidth,
        },
        instances,
    )
}

/// Multidimensional knapsack instances. Item values are `U(0, 5)` per
/// instance; weights `U(0, 1)` and the capacity vector are shared by the whole
/// dataset; features come from a fixed random one-hidden-layer tanh network
/// applied to the values.
pub fn gen_knapsack_dataset(
    n_items: usize,
    dims: usize,
    capacity: f64,
    feat_dim: usize,
    hidden: usize,
    n_instances: usize,
    seed: u64,
) -> Result<Dataset> {
    if n_items == 0 || dims == 0 || feat_dim == 0 || hidden == 0 || n_instances == 0 {
        return Err(Error::invalid("knapsack sizes must be positive"));
    }
    if !(capacity.is_finite() && capacity >= 0.0) {
        return Err(Error::invalid("capacity must be finite and non-negative"));
    }
    let mut rng = rng::stream(seed, streams::KNAPSACK);
    let weights: Vec<f64> = (0..dims * n_items).map(|_| rng.random::<f64>()).collect();
    let weights = DenseMatrix::from_vec(dims, n_items, weights)?;
    let capacities = vec![capacity; dims];
    let net = MlpModel::glorot(&[n_items, hidden, feat_dim], &mut rng)?;
    let instances = (0..n_instances)
        .map(|_| {
            let values: Vec<f64> = (0..n_items).map(|_| rng.random_range(0.0..5.0)).collect();
            let y = net.forward(&values)?;
            Ok(Instance {
                y,
                z: ProblemDescriptor::MultiKnapsack {
                    values,
                    weights: weights.clone(),
                    capacities: capacities.clone(),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(
        ProblemFamily::new(FamilyTag::MultiKnapsack),
        seed,
        GeneratorParams::Knapsack {
            n_items,
            dims,
            capacity,
            feat_dim,
            hidden,
        },
        instances,
    )
}

/// One stochastic shortest-path instance: edge means `U(0.1, 0.2)`,
/// variances `U(0.1, 0.3)·(1 − μ)`, deadline `κ ·` (shortest path under the
/// means). Fully observed: `y = (μ, σ, W)`.
pub fn gen_stochastic_sp_instance(grid_n: usize, deadline_mode: DeadlineMode, seed: u64) -> Result<Instance> {
    let grid = Grid::new(grid_n)?;
    let mut rng = rng::stream(seed, streams::STOCHASTIC_SP);
    let m = grid.num_edges();
    let means: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..0.2)).collect();
    let variances: Vec<f64> = means
        .iter()
        .map(|mu| rng.random_range(0.1..0.3) * (1.0 - mu))
        .collect();
    let shortest = solve_dag_shortest_path(grid_n, &means)?.objective_surrogate;
    let z = ProblemDescriptor::StochasticSp {
        grid_n,
        means,
        variances,
        deadline: deadline_mode.factor() * shortest,
    };
    Ok(Instance {
        y: z.context_features(),
        z,
    })
}

/// `n_instances` independent stochastic shortest-path instances.
pub fn gen_stochastic_sp_dataset(
    grid_n: usize,
    deadline_mode: DeadlineMode,
    n_instances: usize,
    seed: u64,
) -> Result<Dataset> {
    if n_instances == 0 {
        return Err(Error::invalid("n_instances must be positive"));
    }
    let instances = (0..n_instances)
        .map(|i| gen_stochastic_sp_instance(grid_n, deadline_mode, rng::derive(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(
        ProblemFamily::new(FamilyTag::StochasticSp),
        seed,
        GeneratorParams::StochasticSp {
            grid_n,
            deadline_mode,
        },
        instances,
    )
}

/// Latent factors driving the synthetic market.
pub const MARKET_FACTORS: usize = 3;
/// AR(1) persistence of the latent factors.
pub const FACTOR_PERSISTENCE: f64 = 0.8;
/// Idiosyncratic return noise scale.
pub const IDIOSYNCRATIC_SCALE: f64 = 0.05;
/// Noise added to the conditional next-step mean.
pub const MEAN_NOISE_SCALE: f64 = 0.02;

/// Sample covariance `(1/T) Σ (r − r̄)(r − r̄)ᵀ`.
pub fn sample_covariance(history: &[Vec<f64>]) -> DenseMatrix {
    let k = history[0].len();
    let centered = center(history);
    let t = history.len() as f64;
    let mut g = DenseMatrix::zeros(k, k);
    for r in &centered {
        for i in 0..k {
            for j in 0..=i {
                let v = g.get(i, j) + r[i] * r[j] / t;
                g.set(i, j, v);
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            g.set(j, i, g.get(i, j));
        }
    }
    g
}

/// Sample co-skewness `(1/T) Σ (r − r̄)_i (r − r̄)_j (r − r̄)_l`, row-major k³.
pub fn sample_coskewness(history: &[Vec<f64>]) -> Vec<f64> {
    let k = history[0].len();
    let centered = center(history);
    let t = history.len() as f64;
    let mut s = vec![0.0; k * k * k];
    for r in &centered {
        for i in 0..k {
            let ri = r[i] / t;
            for j in 0..k {
                let rj = r[j];
                let row = &mut s[(i * k + j) * k..(i * k + j + 1) * k];
                for (e, rl) in row.iter_mut().zip(r) {
                    *e += ri * (rj * rl);
                }
            }
        }
    }
    s
}

fn center(history: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = history[0].len();
    let t = history.len() as f64;
    let mean: Vec<f64> = (0..k)
        .map(|i| history.iter().map(|r| r[i]).sum::<f64>() / t)
        .collect();
    history
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(a, m)| a - m).collect())
        .collect()
}

/// Portfolio instances from a synthetic factor market
/// `r_t = B f_t + 0.05 η_t` with three AR(1) factors (marginally standard
/// normal), `B ~ N(0, 0.1²)`. Instance `i` sees the window of `history_len`
/// returns ending at step `i + history_len`; `μ` is the conditional
/// next-step mean plus noise, `G` (and `S`) are sample moments of the window.
///
/// Without co-skewness the instances are quadratic predict-then-optimize
/// problems with `y` = the last `feat_dim` returns flattened. With co-skewness
/// they are cubic combinatorial problems observed through `y = μ`.
pub fn gen_portfolio_dataset(
    k: usize,
    n_instances: usize,
    history_len: usize,
    feat_dim: usize,
    with_coskewness: bool,
    seed: u64,
) -> Result<Dataset> {
    if k < 2 || n_instances == 0 || feat_dim == 0 {
        return Err(Error::invalid("need k >= 2 and positive n_instances, feat_dim"));
    }
    if history_len < 2 || (with_coskewness && history_len < k + 1) {
        return Err(Error::invalid(format!(
            "history_len {history_len} too short for {k} assets"
        )));
    }
    if feat_dim > history_len {
        return Err(Error::invalid("feat_dim cannot exceed history_len"));
    }
    let mut rng = rng::stream(seed, streams::MARKET);
    let loading = Normal::new(0.0, 0.1).expect("valid sd");
    let b: Vec<f64> = (0..k * MARKET_FACTORS).map(|_| loading.sample(&mut rng)).collect();
    let b = DenseMatrix::from_vec(k, MARKET_FACTORS, b)?;
    let innovation = (1.0 - FACTOR_PERSISTENCE * FACTOR_PERSISTENCE).sqrt();

    let steps = history_len + n_instances;
    let mut factors = normal_vec(&mut rng, MARKET_FACTORS);
    let mut returns = Vec::with_capacity(steps);
    let mut factor_path = Vec::with_capacity(steps);
    for _ in 0..steps {
        let noise = normal_vec(&mut rng, k);
        let r: Vec<f64> = b
            .matvec(&factors)?
            .iter()
            .zip(&noise)
            .map(|(m, e)| m + IDIOSYNCRATIC_SCALE * e)
            .collect();
        returns.push(r);
        factor_path.push(factors.clone());
        let xi = normal_vec(&mut rng, MARKET_FACTORS);
        factors = factors
            .iter()
            .zip(&xi)
            .map(|(f, e)| FACTOR_PERSISTENCE * f + innovation * e)
            .collect();
    }

    let mut instances = Vec::with_capacity(n_instances);
    for i in 0..n_instances {
        let window = &returns[i..i + history_len];
        let last_f: Vec<f64> = factor_path[i + history_len - 1]
            .iter()
            .map(|f| FACTOR_PERSISTENCE * f)
            .collect();
        let mu: Vec<f64> = b
            .matvec(&last_f)?
            .into_iter()
            .map(|m| m + MEAN_NOISE_SCALE * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        let covariance = sample_covariance(window);
        if with_coskewness {
            let draws: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
            let total: f64 = draws.iter().sum();
            let x0 = draws.iter().map(|d| d / total).collect();
            let max_assets = k.min(10);
            let p = MinlpPortfolio {
                mu: mu.clone(),
                covariance,
                coskewness: sample_coskewness(window),
                x0,
                alpha: 0.1,
                beta: 0.5,
                gamma: 0.01,
                f_min: 0.01,
                f_max: 0.2f64.max(1.0 / max_assets as f64),
                min_assets: k.min(3),
                max_assets,
            };
            instances.push(Instance {
                y: mu,
                z: ProblemDescriptor::PortfolioMinlp(Box::new(p)),
            });
        } else {
            let y = window[history_len - feat_dim..].concat();
            instances.push(Instance {
                y,
                z: ProblemDescriptor::PortfolioQp {
                    mu,
                    covariance,
                    alpha: 0.1,
                },
            });
        }
    }
    let tag = if with_coskewness {
        FamilyTag::PortfolioMinlp
    } else {
        FamilyTag::PortfolioQp
    };
    Dataset::new(
        ProblemFamily::new(tag),
        seed,
        GeneratorParams::Portfolio {
            k,
            history_len,
            feat_dim,
            with_coskewness,
        },
        instances,
    )
}
