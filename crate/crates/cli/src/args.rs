use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Overrides;

#[derive(Debug, Parser)]
#[command(name = "lancer", version, about = "Generate data, train and evaluate landscape-surrogate models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct RunArgs {
    /// Run config JSON; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// `dotted.path=value` override, value parsed as JSON; repeatable.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    pub sets: Vec<String>,
}

impl RunArgs {
    pub fn overrides(&self, seed: Option<u64>) -> Overrides {
        Overrides {
            family: self.family.clone(),
            mode: self.mode.clone(),
            seed,
            data_dir: self.data_dir.clone(),
            output_dir: self.output_dir.clone(),
            sets: self.sets.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    Table4,
    Table5,
    Custom,
}

impl Grid {
    pub fn name(self) -> &'static str {
        match self {
            Grid::Table4 => "table4",
            Grid::Table5 => "table5",
            Grid::Custom => "custom",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write train/test dataset files and a manifest.
    Generate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        seed: u64,
    },
    /// Train one mode; writes checkpoint, history, summary and timing.
    Train {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        seed: u64,
    },
    /// Score a checkpoint or baseline mode on the test split.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to `<output_dir>/checkpoint.json`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Train and evaluate every cell of a hyperparameter grid.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        grid: Grid,
        /// `path=v1;v2;...` for the custom grid; repeatable.
        #[arg(long = "axis")]
        axes: Vec<String>,
    },
    /// Merge run directories into a trade-off curve.
    Report {
        #[arg(long = "run", required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}
