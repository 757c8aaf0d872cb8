//! Alternating optimization of a target model `c_θ` and a landscape model
//! `M_w` that learns the decision loss of the solver's output.

mod buffer;
mod config;
mod heuristics;
mod surrogate;
mod train;

pub use buffer::{BufferEntry, ReplayBuffer};
pub use config::LancerConfig;
pub use heuristics::{heuristic_costs, risk_averse_costs};
pub use surrogate::{ContextKind, SurrogateModel};
pub use train::{
    deploy_reused_m, predict_solve, pretrain_landscape, theta_objective_and_gradient, theta_step, train_predict_optimize,
    train_predict_optimize_with, train_prior, train_prior_with, train_two_stage, train_zero, w_step, DeployOutcome,
    HistoryRow, LancerState, Observer, Penalty, PretrainOutcome, TargetModel, TrainOutcome, ZeroInit, ZeroOutcome,
};
