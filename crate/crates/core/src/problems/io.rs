//! Dataset files.
//!
//! JSON schema (`schema_version` 1):
//!
//! ```text
//! {
//!   "schema": "lancer-dataset",
//!   "schema_version": 1,
//!   "dataset": {
//!     "family":    {"tag": "<family>", "sense": "minimize" | "maximize"},
//!     "seed":      <u64>,
//!     "generator": {"generator": "<name>", ...generator arguments},
//!     "instances": [{"y": [..], "z": {"kind": "<family kind>", ...payload}}, ..]
//!   },
//!   "provenance": {"<key>": "<value>", ..}      optional
//! }
//! ```
//!
//! Floats are written with 17 significant digits. CSV export is long-form:
//! `instance,field,index,value`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::types::{Dataset, ProblemDescriptor};
use crate::error::{Error, Result};
use crate::json;

pub const DATASET_SCHEMA: &str = "lancer-dataset";
pub const DATASET_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct DatasetFileOut<'a> {
    schema: &'static str,
    schema_version: u32,
    dataset: &'a Dataset,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    provenance: &'a BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct DatasetFileIn {
    schema: String,
    schema_version: u32,
    dataset: Dataset,
    #[serde(default)]
    provenance: BTreeMap<String, String>,
}

impl Dataset {
    pub fn to_json(&self) -> Result<Vec<u8>> {
        self.to_json_with_provenance(&BTreeMap::new())
    }

    /// Dataset file carrying free-form provenance entries (config hash,
    /// seed, split name).
    pub fn to_json_with_provenance(&self, provenance: &BTreeMap<String, String>) -> Result<Vec<u8>> {
        json::to_vec(&DatasetFileOut {
            schema: DATASET_SCHEMA,
            schema_version: DATASET_SCHEMA_VERSION,
            dataset: self,
            provenance,
        })
    }

    /// Parses and validates a dataset file.
    pub fn from_json(bytes: &[u8]) -> Result<Dataset> {
        Self::from_json_with_provenance(bytes).map(|(d, _)| d)
    }

    pub fn from_json_with_provenance(bytes: &[u8]) -> Result<(Dataset, BTreeMap<String, String>)> {
        let file: DatasetFileIn = serde_json::from_slice(bytes)?;
        if file.schema != DATASET_SCHEMA || file.schema_version != DATASET_SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "expected {DATASET_SCHEMA} v{DATASET_SCHEMA_VERSION}, found {} v{}",
                file.schema, file.schema_version
            )));
        }
        Ok((file.dataset, file.provenance))
    }

    /// Long-form CSV of every descriptor field.
    pub fn write_descriptor_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["instance", "field", "index", "value"])?;
        for (i, inst) in self.instances().iter().enumerate() {
            let mut emit = |field: &str, values: &[f64]| -> Result<()> {
                for (j, v) in values.iter().enumerate() {
                    w.write_record([i.to_string(), field.to_string(), j.to_string(), json::fmt_f64(*v)])?;
                }
                Ok(())
            };
            emit("y", &inst.y)?;
            match &inst.z {
                ProblemDescriptor::ShortestPath { costs, .. } => emit("costs", costs)?,
                ProblemDescriptor::MultiKnapsack {
                    values,
                    weights,
                    capacities,
                } => {
                    emit("values", values)?;
                    emit("weights", weights.as_slice())?;
                    emit("capacities", capacities)?;
                }
                ProblemDescriptor::StochasticSp {
                    means,
                    variances,
                    deadline,
                    ..
                } => {
                    emit("means", means)?;
                    emit("variances", variances)?;
                    emit("deadline", &[*deadline])?;
                }
                ProblemDescriptor::PortfolioQp {
                    mu,
                    covariance,
                    alpha,
                } => {
                    emit("mu", mu)?;
                    emit("covariance", covariance.as_slice())?;
                    emit("alpha", &[*alpha])?;
                }
                ProblemDescriptor::PortfolioMinlp(p) => {
                    emit("mu", &p.mu)?;
                    emit("covariance", p.covariance.as_slice())?;
                    emit("coskewness", &p.coskewness)?;
                    emit("x0", &p.x0)?;
                    emit(
                        "scalars",
                        &[
                            p.alpha,
                            p.beta,
                            p.gamma,
                            p.f_min,
                            p.f_max,
                            p.min_assets as f64,
                            p.max_assets as f64,
                        ],
                    )?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}
