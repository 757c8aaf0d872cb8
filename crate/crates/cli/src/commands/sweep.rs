use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, CliResult, Context};
use crate::files;

use super::evaluate::{evaluate_in_memory, EvalOutput};
use super::train::{train_in_memory, Summary};

pub const SWEEP_FORMAT: &str = "lancer-sweep";

/// One named grid axis; each value sets one or more config paths.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub paths: Vec<String>,
    pub values: Vec<Value>,
}

/// Learning rates by inner-iteration budgets.
pub fn table4() -> Vec<Axis> {
    vec![
        Axis {
            name: "lr".into(),
            paths: vec!["lancer.lr_w".into(), "lancer.lr_theta".into()],
            values: [0.0005, 0.001, 0.01].map(Value::from).to_vec(),
        },
        Axis {
            name: "max_itr".into(),
            paths: vec!["lancer.w_updates".into(), "lancer.theta_updates".into()],
            values: [5u64, 10, 20].map(Value::from).to_vec(),
        },
    ]
}

/// Landscape-model depth by width.
pub fn table5() -> Vec<Axis> {
    vec![
        Axis {
            name: "layers".into(),
            paths: Vec::new(),
            values: [1u64, 2, 3].map(Value::from).to_vec(),
        },
        Axis {
            name: "width".into(),
            paths: Vec::new(),
            values: [50u64, 100, 200].map(Value::from).to_vec(),
        },
    ]
}

/// Parses `path=v1;v2;...`, each value JSON with a plain-string fallback.
pub fn parse_axis(spec: &str) -> CliResult<Axis> {
    let (path, values) = spec
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--axis expects path=v1;v2;..., got {spec:?}")))?;
    let values: Vec<Value> = values
        .split(';')
        .filter(|v| !v.trim().is_empty())
        .map(|v| serde_json::from_str(v.trim()).unwrap_or_else(|_| Value::String(v.trim().to_string())))
        .collect();
    if path.trim().is_empty() || values.is_empty() {
        return Err(CliError::config(format!("--axis {spec:?} has no path or no values")));
    }
    Ok(Axis {
        name: path.trim().to_string(),
        paths: vec![path.trim().to_string()],
        values,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub params: Vec<(String, Value)>,
    pub sets: Vec<String>,
}

/// Cross product of the axes, first axis outermost.
pub fn cells(grid: &str, axes: &[Axis]) -> CliResult<Vec<Cell>> {
    if axes.is_empty() || axes.iter().any(|a| a.values.is_empty()) {
        return Err(CliError::config("sweep grid is empty"));
    }
    let mut combos: Vec<Vec<Value>> = vec![Vec::new()];
    for axis in axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                axis.values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }
    Ok(combos
        .into_iter()
        .enumerate()
        .map(|(index, vals)| {
            let params: Vec<(String, Value)> = axes.iter().map(|a| a.name.clone()).zip(vals.iter().cloned()).collect();
            let sets = if grid == "table5" {
                let layers = vals[0].as_u64().unwrap_or(0) as usize;
                let width = vals[1].clone();
                let hidden = Value::Array(vec![width; layers]);
                vec![format!("lancer.surrogate_hidden={hidden}")]
            } else {
                axes.iter()
                    .zip(&vals)
                    .flat_map(|(a, v)| a.paths.iter().map(move |p| format!("{p}={v}")))
                    .collect()
            };
            Cell { index, params, sets }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub index: usize,
    pub params: serde_json::Map<String, Value>,
    pub status: String,
    pub config_hash: Option<String>,
    pub final_objective: Option<f64>,
    pub normalized_regret: Option<f64>,
    pub solver_calls: Option<u64>,
    pub error: Option<String>,
    pub summary: Option<Summary>,
    pub eval: Option<EvalOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub format: String,
    pub version: u32,
    pub grid: String,
    pub base_config_hash: String,
    pub seed: u64,
    pub cells: Vec<CellResult>,
    pub succeeded: usize,
    pub failed: usize,
    pub min_objective: Option<f64>,
    pub max_objective: Option<f64>,
    pub mean_objective: Option<f64>,
    /// `(max − min) / |mean|` of the final objective over successful cells.
    pub relative_spread: Option<f64>,
}

fn run_cell(base: &RunConfig, cell: &Cell) -> CliResult<(RunConfig, Summary, EvalOutput)> {
    let ov = Overrides {
        sets: cell.sets.clone(),
        ..Default::default()
    };
    let cfg = RunConfig::resolve(Some(&base.to_json()), &ov)?;
    let art = train_in_memory(&cfg, &mut |_, _| Ok(()))?;
    let eval = evaluate_in_memory(&cfg, Some(&art.checkpoint), None)?;
    Ok((cfg, art.summary, eval))
}

/// Runs every cell, in parallel, and merges results by cell index. A failing
/// cell is recorded and the sweep continues.
pub fn sweep_in_memory(base: &RunConfig, grid: &str, axes: &[Axis]) -> CliResult<SweepOutput> {
    if !base.mode.is_trainable() {
        return Err(CliError::config(format!("mode {} has nothing to sweep", base.mode.name())));
    }
    let cells = cells(grid, axes)?;
    let results: Vec<CellResult> = cells
        .par_iter()
        .map(|cell| {
            let params = cell.params.iter().cloned().collect();
            match run_cell(base, cell) {
                Ok((cfg, summary, eval)) => CellResult {
                    index: cell.index,
                    params,
                    status: "ok".into(),
                    config_hash: Some(cfg.hash()),
                    final_objective: Some(eval.mean_objective),
                    normalized_regret: eval.report.as_ref().map(|r| r.normalized_regret),
                    solver_calls: Some(summary.solver_calls),
                    error: None,
                    summary: Some(summary),
                    eval: Some(eval),
                },
                Err(e) => CellResult {
                    index: cell.index,
                    params,
                    status: "failed".into(),
                    config_hash: None,
                    final_objective: None,
                    normalized_regret: None,
                    solver_calls: None,
                    error: Some(e.to_string()),
                    summary: None,
                    eval: None,
                },
            }
        })
        .collect();
    let objs: Vec<f64> = results.iter().filter_map(|r| r.final_objective).collect();
    let (min, max, mean) = if objs.is_empty() {
        (None, None, None)
    } else {
        let min = objs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = objs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (Some(min), Some(max), Some(objs.iter().sum::<f64>() / objs.len() as f64))
    };
    let relative_spread = match (min, max, mean) {
        (Some(lo), Some(hi), Some(m)) if m != 0.0 => Some((hi - lo) / m.abs()),
        _ => None,
    };
    Ok(SweepOutput {
        format: SWEEP_FORMAT.to_string(),
        version: 1,
        grid: grid.to_string(),
        base_config_hash: base.hash(),
        seed: base.seed,
        succeeded: objs.len(),
        failed: results.len() - objs.len(),
        cells: results,
        min_objective: min,
        max_objective: max,
        mean_objective: mean,
        relative_spread,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(lancer_core::json::fmt_f64).unwrap_or_default()
}

/// One row per cell: `cell,<axis names>,status,final_objective,
/// normalized_regret,solver_calls,config_hash,error`.
pub fn sweep_csv(base: &RunConfig, out: &SweepOutput, axes: &[Axis]) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    for line in files::csv_comment(base, &[("grid", out.grid.clone())]).lines() {
        buf.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let mut header = vec!["cell".to_string()];
        header.extend(axes.iter().map(|a| a.name.clone()));
        header.extend(
            ["status", "final_objective", "normalized_regret", "solver_calls", "config_hash", "error"].map(String::from),
        );
        w.write_record(&header).map_err(lancer_core::Error::from).ctx("writing sweep table")?;
        for r in &out.cells {
            let mut rec = vec![r.index.to_string()];
            rec.extend(axes.iter().map(|a| match r.params.get(&a.name) {
                Some(Value::String(s)) => s.clone(),
                Some(v) => v.to_string(),
                None => String::new(),
            }));
            rec.push(r.status.clone());
            rec.push(opt(r.final_objective));
            rec.push(opt(r.normalized_regret));
            rec.push(r.solver_calls.map(|c| c.to_string()).unwrap_or_default());
            rec.push(r.config_hash.clone().unwrap_or_default());
            rec.push(r.error.clone().unwrap_or_default());
            w.write_record(&rec).map_err(lancer_core::Error::from).ctx("writing sweep table")?;
        }
        w.flush().map_err(lancer_core::Error::from).ctx("writing sweep table")?;
    }
    Ok(buf)
}

pub fn run(base: &RunConfig, grid: &str, axes: &[Axis]) -> CliResult<(PathBuf, SweepOutput)> {
    let out = sweep_in_memory(base, grid, axes)?;
    let csv_path = files::output_path(base, &format!("sweep_{grid}.csv"));
    files::write_atomic(&csv_path, &sweep_csv(base, &out, axes)?).ctx("writing sweep table")?;
    files::write_atomic(&files::output_path(base, &format!("sweep_{grid}.json")), &files::pretty_json(&out)?)
        .ctx("writing sweep results")?;
    Ok((csv_path, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_grids_have_nine_cells() {
        let t4 = cells("table4", &table4()).unwrap();
        assert_eq!(t4.len(), 9);
        assert_eq!(
            t4[1].sets,
            vec!["lancer.lr_w=0.0005", "lancer.lr_theta=0.0005", "lancer.w_updates=10", "lancer.theta_updates=10"]
        );
        let t5 = cells("table5", &table5()).unwrap();
        assert_eq!(t5.len(), 9);
        assert_eq!(t5[8].sets, vec!["lancer.surrogate_hidden=[200,200,200]"]);
    }

    #[test]
    fn custom_axes_parse_and_reject_empty() {
        let a = parse_axis("lancer.surrogate_hidden=[50];[50,50]").unwrap();
        assert_eq!(a.values, vec![serde_json::json!([50]), serde_json::json!([50, 50])]);
        assert!(parse_axis("lancer.lr_w=").is_err());
        assert!(parse_axis("nothing").is_err());
        assert!(cells("custom", &[]).is_err());
    }
}
