//! Benchmark families: descriptors, true objectives, feasibility and
//! synthetic generators.

mod generate;
mod grid;
mod io;
mod objective;
mod types;

pub use generate::{
    gen_knapsack_dataset, gen_portfolio_dataset, gen_shortest_path_dataset, gen_stochastic_sp_dataset,
    gen_stochastic_sp_instance, sample_coskewness, sample_covariance, DEFAULT_KNAPSACK_CAPACITY,
};
pub use grid::Grid;
pub use io::{DATASET_SCHEMA, DATASET_SCHEMA_VERSION};
pub use objective::{eval_objective, gaussian_cdf, is_feasible, on_time_probability, EVAL_TOL};
pub(crate) use objective::{coskew_terms, minlp_value};
pub use types::{
    Dataset, DeadlineMode, FamilyTag, GeneratorParams, Instance, MinlpPortfolio, ProblemDescriptor,
    ProblemFamily, Sense,
};
pub use types::regression_target;
