use std::path::PathBuf;

use lancer_core::problems::{
    gen_knapsack_dataset, gen_portfolio_dataset, gen_shortest_path_dataset, gen_stochastic_sp_dataset, Dataset,
    GeneratorParams, ProblemFamily,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Context};
use crate::files::{self, MANIFEST_FILE, TEST_FILE, TRAIN_FILE};

pub const MANIFEST_FORMAT: &str = "lancer-data-manifest";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEntry {
    pub file: String,
    pub instances: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub family: ProblemFamily,
    pub generator: GeneratorParams,
    pub train: SplitEntry,
    pub test: SplitEntry,
}

#[derive(Debug, Clone)]
pub struct GenerateOutcome {
    pub train: PathBuf,
    pub test: PathBuf,
    pub manifest: Manifest,
}

/// Generates `n_train + n_test` instances in one draw and splits them in
/// order. For the portfolio families the split is chronological.
pub fn build_splits(cfg: &RunConfig) -> CliResult<(Dataset, Dataset)> {
    let (n_train, n_test) = (cfg.data.n_train, cfg.data.n_test);
    let total = n_train + n_test;
    let seed = cfg.seed;
    let all = match cfg.data.generator {
        GeneratorParams::ShortestPath {
            grid_n,
            feat_dim,
            poly_deg,
            noise_halfwidth,
        } => gen_shortest_path_dataset(grid_n, total, feat_dim, poly_deg, noise_halfwidth, seed),
        GeneratorParams::Knapsack {
            n_items,
            dims,
            capacity,
            feat_dim,
            hidden,
        } => gen_knapsack_dataset(n_items, dims, capacity, feat_dim, hidden, total, seed),
        GeneratorParams::StochasticSp { grid_n, deadline_mode } => {
            gen_stochastic_sp_dataset(grid_n, deadline_mode, total, seed)
        }
        GeneratorParams::Portfolio {
            k,
            history_len,
            feat_dim,
            with_coskewness,
        } => gen_portfolio_dataset(k, total, history_len, feat_dim, with_coskewness, seed),
        GeneratorParams::Manual => return Err(CliError::config("the manual generator cannot be run")),
    }
    .map_err(|e| CliError::config(format!("generator rejected its arguments: {e}")))?;
    let family = cfg.problem_family();
    let all = if all.family() == family {
        all
    } else {
        Dataset::new(family, all.seed(), all.generator().clone(), all.instances().to_vec())?
    };
    Ok((all.slice(0..n_train)?, all.slice(n_train..total)?))
}

pub fn run(cfg: &RunConfig) -> CliResult<GenerateOutcome> {
    let (train, test) = build_splits(cfg)?;
    let train_bytes = train.to_json_with_provenance(&files::provenance(cfg, "train"))?;
    let test_bytes = test.to_json_with_provenance(&files::provenance(cfg, "test"))?;
    let train_path = files::data_path(cfg, TRAIN_FILE);
    let test_path = files::data_path(cfg, TEST_FILE);
    files::write_atomic(&train_path, &train_bytes).ctx("writing training split")?;
    files::write_atomic(&test_path, &test_bytes).ctx("writing test split")?;
    let manifest = Manifest {
        format: MANIFEST_FORMAT.to_string(),
        version: 1,
        config_hash: cfg.hash(),
        seed: cfg.seed,
        family: cfg.problem_family(),
        generator: cfg.data.generator.clone(),
        train: SplitEntry {
            file: TRAIN_FILE.to_string(),
            instances: train.len(),
            sha256: files::sha256_hex(&train_bytes),
        },
        test: SplitEntry {
            file: TEST_FILE.to_string(),
            instances: test.len(),
            sha256: files::sha256_hex(&test_bytes),
        },
    };
    files::write_atomic(&files::data_path(cfg, MANIFEST_FILE), &files::pretty_json(&manifest)?)?;
    Ok(GenerateOutcome {
        train: train_path,
        test: test_path,
        manifest,
    })
}
