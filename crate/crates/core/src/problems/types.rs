use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::diffmodels::DenseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    ShortestPathLp,
    MultiKnapsack,
    StochasticSp,
    PortfolioQp,
    PortfolioMinlp,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 5] = [
        FamilyTag::ShortestPathLp,
        FamilyTag::MultiKnapsack,
        FamilyTag::StochasticSp,
        FamilyTag::PortfolioQp,
        FamilyTag::PortfolioMinlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::ShortestPathLp => "shortest_path_lp",
            FamilyTag::MultiKnapsack => "multi_knapsack",
            FamilyTag::StochasticSp => "stochastic_sp",
            FamilyTag::PortfolioQp => "portfolio_qp",
            FamilyTag::PortfolioMinlp => "portfolio_minlp",
        }
    }

    /// Families whose observable features carry the full description.
    pub fn is_fully_observed(self) -> bool {
        matches!(self, FamilyTag::StochasticSp | FamilyTag::PortfolioMinlp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A benchmark family together with the direction of its true objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr")]
pub struct ProblemFamily {
    tag: FamilyTag,
    sense: Sense,
}

#[derive(Deserialize)]
struct FamilyRepr {
    tag: FamilyTag,
    sense: Sense,
}

impl TryFrom<FamilyRepr> for ProblemFamily {
    type Error = Error;
    fn try_from(r: FamilyRepr) -> Result<Self> {
        ProblemFamily::with_sense(r.tag, r.sense)
    }
}

impl ProblemFamily {
    /// Default sense: knapsack in value form is maximized, the stochastic
    /// shortest path maximizes on-time probability, everything else minimizes.
    pub fn new(tag: FamilyTag) -> Self {
        let sense = match tag {
            FamilyTag::MultiKnapsack | FamilyTag::StochasticSp => Sense::Maximize,
            _ => Sense::Minimize,
        };
        ProblemFamily { tag, sense }
    }

    /// Only the knapsack family may flip its sense (cost form minimizes the
    /// negated value).
    pub fn with_sense(tag: FamilyTag, sense: Sense) -> Result<Self> {
        let default = Self::new(tag);
        if sense != default.sense && tag != FamilyTag::MultiKnapsack {
            return Err(Error::invalid(format!(
                "{} is always {:?}",
                tag.name(),
                default.sense
            )));
        }
        Ok(ProblemFamily { tag, sense })
    }

    pub fn tag(&self) -> FamilyTag {
        self.tag
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Converts a natural-sense objective into a loss to minimize.
    pub fn to_loss(&self, objective: f64) -> f64 {
        match self.sense {
            Sense::Minimize => objective,
            Sense::Maximize => -objective,
        }
    }

    /// Inverse of [`to_loss`](Self::to_loss).
    pub fn from_loss(&self, loss: f64) -> f64 {
        self.to_loss(loss)
    }
}

/// Parameters of the cubic combinatorial portfolio problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinlpPortfolio {
    pub mu: Vec<f64>,
    pub covariance: DenseMatrix,
    /// Row-major `k × k × k`; entry `(i, j, l)` at `i·k² + j·k + l`.
    pub coskewness: Vec<f64>,
    pub x0: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub min_assets: usize,
    pub max_assets: usize,
}

impl MinlpPortfolio {
    pub fn k(&self) -> usize {
        self.mu.len()
    }

    #[inline]
    pub fn s(&self, i: usize, j: usize, l: usize) -> f64 {
        let k = self.k();
        self.coskewness[(i * k + j) * k + l]
    }

    /// Support sizes compatible with the fraction bounds and the cardinality
    /// limits.
    pub fn support_size_range(&self) -> Option<(usize, usize)> {
        let lo = self.min_assets.max((1.0 / self.f_max - 1e-12).ceil() as usize).max(1);
        let hi = self
            .max_assets
            .min((1.0 / self.f_min + 1e-12).floor() as usize)
            .min(self.k());
        (lo <= hi).then_some((lo, hi))
    }
}

/// The cost vector a perfect prediction would hand to the solver: `z` itself
/// for cost-vector families, negated knapsack values in the cost form, and
/// `None` where `z` is not a linear cost.
pub fn regression_target(family: &ProblemFamily, z: &ProblemDescriptor) -> Option<Vec<f64>> {
    let c = z.cost_vector()?;
    if family.tag() == FamilyTag::MultiKnapsack && family.sense() == Sense::Minimize {
        Some(c.iter().map(|v| -v).collect())
    } else {
        Some(c.to_vec())
    }
}

/// Ground-truth description `z` of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemDescriptor {
    ShortestPath {
        grid_n: usize,
        costs: Vec<f64>,
    },
    MultiKnapsack {
        values: Vec<f64>,
        /// `dims × items`.
        weights: DenseMatrix,
        capacities: Vec<f64>,
    },
    StochasticSp {
        grid_n: usize,
        means: Vec<f64>,
        variances: Vec<f64>,
        deadline: f64,
    },
    PortfolioQp {
        mu: Vec<f64>,
        covariance: DenseMatrix,
        alpha: f64,
    },
    PortfolioMinlp(Box<MinlpPortfolio>),
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl ProblemDescriptor {
    pub fn tag(&self) -> FamilyTag {
        match self {
            ProblemDescriptor::ShortestPath { .. } => FamilyTag::ShortestPathLp,
            ProblemDescriptor::MultiKnapsack { .. } => FamilyTag::MultiKnapsack,
            ProblemDescriptor::StochasticSp { .. } => FamilyTag::StochasticSp,
            ProblemDescriptor::PortfolioQp { .. } => FamilyTag::PortfolioQp,
            ProblemDescriptor::PortfolioMinlp(_) => FamilyTag::PortfolioMinlp,
        }
    }

    /// Length of the linear surrogate cost vector handed to the solver.
    pub fn surrogate_dim(&self) -> usize {
        match self {
            ProblemDescriptor::ShortestPath { costs, .. } => costs.len(),
            ProblemDescriptor::MultiKnapsack { values, .. } => values.len(),
            ProblemDescriptor::StochasticSp { means, .. } => means.len(),
            ProblemDescriptor::PortfolioQp { mu, .. } => mu.len(),
            ProblemDescriptor::PortfolioMinlp(p) => p.k(),
        }
    }

    /// Ground-truth cost vector in solver units, for families where `z` is
    /// itself a cost vector (the two-stage regression target).
    pub fn cost_vector(&self) -> Option<&[f64]> {
        match self {
            ProblemDescriptor::ShortestPath { costs, .. } => Some(costs),
            ProblemDescriptor::MultiKnapsack { values, .. } => Some(values),
            ProblemDescriptor::PortfolioQp { mu, .. } => Some(mu),
            _ => None,
        }
    }

    /// Flattened description used as surrogate context.
    pub fn context_features(&self) -> Vec<f64> {
        match self {
            ProblemDescriptor::ShortestPath { costs, .. } => costs.clone(),
            ProblemDescriptor::MultiKnapsack {
                values,
                weights,
                capacities,
            } => [values.as_slice(), weights.as_slice(), capacities].concat(),
            ProblemDescriptor::StochasticSp {
                means,
                variances,
                deadline,
                ..
            } => {
                let mut f = [means.as_slice(), variances].concat();
                f.push(*deadline);
                f
            }
            ProblemDescriptor::PortfolioQp { mu, covariance, .. } => {
                let k = mu.len();
                let mut f = mu.clone();
                f.extend((0..k).map(|i| covariance.get(i, i)));
                f
            }
            ProblemDescriptor::PortfolioMinlp(p) => {
                let k = p.k();
                let mut f = p.mu.clone();
                f.extend((0..k).map(|i| p.covariance.get(i, i)));
                f.extend_from_slice(&p.x0);
                f
            }
        }
    }

    /// Checks every structural invariant of the descriptor.
    pub fn validate(&self) -> Result<()> {
        match self {
            ProblemDescriptor::ShortestPath { grid_n, costs } => {
                let g = Grid::new(*grid_n)?;
                if costs.len() != g.num_edges() {
                    return Err(Error::dim(format!(
                        "{}x{} grid has {} edges, got {} costs",
                        grid_n,
                        grid_n,
                        g.num_edges(),
                        costs.len()
                    )));
                }
                if !all_finite(costs) {
                    return Err(Error::invalid("edge costs must be finite"));
                }
            }
            ProblemDescriptor::MultiKnapsack {
                values,
                weights,
                capacities,
            } => {
                if values.is_empty() || capacities.is_empty() {
                    return Err(Error::invalid("knapsack needs at least one item and one dimension"));
                }
                if weights.rows() != capacities.len() || weights.cols() != values.len() {
                    return Err(Error::dim(format!(
                        "weights are {}x{}, expected {}x{}",
                        weights.rows(),
                        weights.cols(),
                        capacities.len(),
                        values.len()
                    )));
                }
                if !all_finite(values) || !all_finite(capacities) {
                    return Err(Error::invalid("knapsack data must be finite"));
                }
                if weights.as_slice().iter().any(|&w| w < 0.0) || capacities.iter().any(|&c| c < 0.0) {
                    return Err(Error::invalid("weights and capacities must be non-negative"));
                }
            }
            ProblemDescriptor::StochasticSp {
                grid_n,
                means,
                variances,
                deadline,
            } => {
                let g = Grid::new(*grid_n)?;
                if means.len() != g.num_edges() || variances.len() != g.num_edges() {
                    return Err(Error::dim("edge means/variances must match the grid edge count"));
                }
                if !all_finite(means) || !all_finite(variances) || !deadline.is_finite() {
                    return Err(Error::invalid("stochastic edge data must be finite"));
                }
                if variances.iter().any(|&s| s < 0.0) {
                    return Err(Error::invalid("edge variances must be non-negative"));
                }
            }
            ProblemDescriptor::PortfolioQp {
                mu,
                covariance,
                alpha,
            } => {
                check_portfolio_common(mu, covariance)?;
                if !(alpha.is_finite() && *alpha >= 0.0) {
                    return Err(Error::invalid("risk weight must be finite and non-negative"));
                }
            }
            ProblemDescriptor::PortfolioMinlp(p) => {
                let k = p.k();
                check_portfolio_common(&p.mu, &p.covariance)?;
                if p.coskewness.len() != k * k * k || p.x0.len() != k {
                    return Err(Error::dim("co-skewness must be k³ and x0 of length k"));
                }
                if !all_finite(&p.coskewness) || !all_finite(&p.x0) {
                    return Err(Error::invalid("portfolio data must be finite"));
                }
                for i in 0..k {
                    for j in 0..k {
                        for l in 0..j {
                            if (p.s(i, j, l) - p.s(i, l, j)).abs() > 1e-10 {
                                return Err(Error::invalid(
                                    "co-skewness must be symmetric in its last two indices",
                                ));
                            }
                        }
                    }
                }
                if p.x0.iter().any(|&v| v < 0.0) || (p.x0.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid("x0 must be a probability vector"));
                }
                let scalars = [p.alpha, p.beta, p.gamma, p.f_min, p.f_max];
                if !all_finite(&scalars) || p.alpha < 0.0 || p.beta < 0.0 || p.gamma < 0.0 {
                    return Err(Error::invalid("alpha, beta, gamma must be finite and non-negative"));
                }
                if !(0.0 < p.f_min && p.f_min < p.f_max && p.f_max <= 1.0) {
                    return Err(Error::invalid("fraction bounds need 0 < f_min < f_max <= 1"));
                }
                if !(1 <= p.min_assets && p.min_assets <= p.max_assets && p.max_assets <= k) {
                    return Err(Error::invalid("cardinality bounds need 1 <= m <= M <= k"));
                }
                let (m, mm) = (p.min_assets as f64, p.max_assets as f64);
                if m * p.f_min > 1.0 + 1e-12 || mm * p.f_max < 1.0 - 1e-12 {
                    return Err(Error::invalid("need m·f_min <= 1 <= M·f_max"));
                }
            }
        }
        Ok(())
    }
}

fn check_portfolio_common(mu: &[f64], covariance: &DenseMatrix) -> Result<()> {
    let k = mu.len();
    if k == 0 {
        return Err(Error::invalid("portfolio needs at least one asset"));
    }
    if covariance.rows() != k || covariance.cols() != k {
        return Err(Error::dim(format!(
            "covariance is {}x{}, expected {k}x{k}",
            covariance.rows(),
            covariance.cols()
        )));
    }
    if !all_finite(mu) || !all_finite(covariance.as_slice()) {
        return Err(Error::invalid("portfolio data must be finite"));
    }
    if !covariance.is_symmetric(1e-10) {
        return Err(Error::invalid("covariance must be symmetric"));
    }
    Ok(())
}

/// One observable/ground-truth pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub y: Vec<f64>,
    pub z: ProblemDescriptor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeadlineMode {
    Tight,
    Normal,
    Loose,
}

impl DeadlineMode {
    pub fn factor(self) -> f64 {
        match self {
            DeadlineMode::Tight => 0.9,
            DeadlineMode::Normal => 1.0,
            DeadlineMode::Loose => 1.1,
        }
    }
}

/// Arguments a dataset was generated from, kept for the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum GeneratorParams {
    ShortestPath {
        grid_n: usize,
        feat_dim: usize,
        poly_deg: u32,
        noise_halfwidth: f64,
    },
    Knapsack {
        n_items: usize,
        dims: usize,
        capacity: f64,
        feat_dim: usize,
        hidden: usize,
    },
    StochasticSp {
        grid_n: usize,
        deadline_mode: DeadlineMode,
    },
    Portfolio {
        k: usize,
        history_len: usize,
        feat_dim: usize,
        with_coskewness: bool,
    },
    Manual,
}

/// A non-empty, dimension-consistent collection of instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr")]
pub struct Dataset {
    family: ProblemFamily,
    seed: u64,
    generator: GeneratorParams,
    instances: Vec<Instance>,
}

#[derive(Deserialize)]
struct DatasetRepr {
    family: ProblemFamily,
    seed: u64,
    generator: GeneratorParams,
    instances: Vec<Instance>,
}

impl TryFrom<DatasetRepr> for Dataset {
    type Error = Error;
    fn try_from(r: DatasetRepr) -> Result<Self> {
        Dataset::new(r.family, r.seed, r.generator, r.instances)
    }
}

impl Dataset {
    pub fn new(
        family: ProblemFamily,
        seed: u64,
        generator: GeneratorParams,
        instances: Vec<Instance>,
    ) -> Result<Self> {
        let ds = Dataset {
            family,
            seed,
            generator,
            instances,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .instances
            .first()
            .ok_or_else(|| Error::invalid("dataset must contain at least one instance"))?;
        let y_dim = first.y.len();
        let z_dim = first.z.surrogate_dim();
        let ctx_dim = first.z.context_features().len();
        for (i, inst) in self.instances.iter().enumerate() {
            if inst.z.tag() != self.family.tag() {
                return Err(Error::at(
                    i,
                    Error::invalid(format!(
                        "descriptor is {} in a {} dataset",
                        inst.z.tag().name(),
                        self.family.tag().name()
                    )),
                ));
            }
            inst.z.validate().map_err(|e| Error::at(i, e))?;
            if inst.y.len() != y_dim
                || inst.z.surrogate_dim() != z_dim
                || inst.z.context_features().len() != ctx_dim
            {
                return Err(Error::at(i, Error::dim("instance dimensions differ from instance 0")));
            }
            if !all_finite(&inst.y) {
                return Err(Error::at(i, Error::invalid("features must be finite")));
            }
        }
        Ok(())
    }

    pub fn family(&self) -> ProblemFamily {
        self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator(&self) -> &GeneratorParams {
        &self.generator
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.instances[0].y.len()
    }

    pub fn surrogate_dim(&self) -> usize {
        self.instances[0].z.surrogate_dim()
    }

    /// Instances `range` as a new dataset with the same metadata.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Dataset> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::invalid(format!(
                "slice {:?} of a dataset with {} instances",
                range,
                self.len()
            )));
        }
        Ok(Dataset {
            family: self.family,
            seed: self.seed,
            generator: self.generator.clone(),
            instances: self.instances[range].to_vec(),
        })
    }

    /// Observable features, one row per instance.
    pub fn feature_matrix(&self) -> Result<DenseMatrix> {
        DenseMatrix::from_vec(
            self.len(),
            self.feature_dim(),
            self.instances.iter().flat_map(|i| i.y.iter().copied()).collect(),
        )
    }

    /// Ground-truth cost vectors in the solver's convention, one row per
    /// instance.
    pub fn cost_matrix(&self) -> Result<DenseMatrix> {
        let mut data = Vec::with_capacity(self.len() * self.surrogate_dim());
        for (i, inst) in self.instances.iter().enumerate() {
            let c = regression_target(&self.family, &inst.z).ok_or_else(|| {
                Error::at(
                    i,
                    Error::invalid(format!(
                        "{} descriptors are not cost vectors",
                        self.family.tag().name()
                    )),
                )
            })?;
            data.extend_from_slice(&c);
        }
        DenseMatrix::from_vec(self.len(), self.surrogate_dim(), data)
    }
}
