//! File layout and atomic output.
//!
//! ```text
//! <data_dir>/train.json  test.json  manifest.json
//! <output_dir>/checkpoint.json  history.csv  summary.json  timing.json
//!              eval_<mode>.json  sweep_<grid>.csv  sweep_<grid>.json
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lancer_core::problems::Dataset;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Context, ErrorKind};

pub const TRAIN_FILE: &str = "train.json";
pub const TEST_FILE: &str = "test.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const HISTORY_FILE: &str = "history.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMING_FILE: &str = "timing.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`, so
/// readers only ever see a complete file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).ctx(format!("creating {}", dir.display()))?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| CliError::new(ErrorKind::Io, anyhow::anyhow!("{} has no file name", path.display())))?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp).ctx(format!("creating {}", tmp.display()))?;
        f.write_all(bytes).ctx(format!("writing {}", tmp.display()))?;
        f.sync_all().ctx(format!("syncing {}", tmp.display()))?;
    }
    fs::rename(&tmp, path).ctx(format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| {
        let kind = if e.kind() == std::io::ErrorKind::NotFound { ErrorKind::Data } else { ErrorKind::Io };
        CliError::new(kind, e).context(format!("reading {}", path.display()))
    })
}

/// Comment block prepended to CSV outputs.
pub fn csv_comment(cfg: &RunConfig, extra: &[(&str, String)]) -> String {
    let mut lines = vec![
        format!("config_hash={}", cfg.hash()),
        format!("seed={}", cfg.seed),
        format!("mode={}", cfg.mode.name()),
        format!("family={}", cfg.family.name()),
    ];
    lines.extend(extra.iter().map(|(k, v)| format!("{k}={v}")));
    lines.join("\n")
}

pub fn provenance(cfg: &RunConfig, split: &str) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("config_hash".to_string(), cfg.hash()),
        ("seed".to_string(), cfg.seed.to_string()),
        ("split".to_string(), split.to_string()),
    ])
}

pub fn data_path(cfg: &RunConfig, file: &str) -> PathBuf {
    cfg.data_dir.join(file)
}

pub fn output_path(cfg: &RunConfig, file: &str) -> PathBuf {
    cfg.output_dir.join(file)
}

/// A dataset split with the SHA-256 of its file.
pub struct LoadedSplit {
    pub dataset: Dataset,
    pub sha256: String,
}

pub fn load_split(cfg: &RunConfig, file: &str) -> CliResult<LoadedSplit> {
    let path = data_path(cfg, file);
    let bytes = read(&path)?;
    let dataset = Dataset::from_json(&bytes)
        .map_err(|e| CliError::new(ErrorKind::Data, e).context(format!("parsing {}", path.display())))?;
    let want = cfg.problem_family();
    if dataset.family() != want {
        return Err(CliError::data(format!(
            "{} holds {} ({:?}) instances but the config asks for {} ({:?})",
            path.display(),
            dataset.family().tag().name(),
            dataset.family().sense(),
            want.tag().name(),
            want.sense()
        )));
    }
    if dataset.seed() != cfg.seed || dataset.generator() != &cfg.data.generator {
        return Err(CliError::data(format!(
            "{} was generated with seed {} and {:?}, the config asks for seed {} and {:?}",
            path.display(),
            dataset.seed(),
            dataset.generator(),
            cfg.seed,
            cfg.data.generator
        )));
    }
    Ok(LoadedSplit {
        dataset,
        sha256: sha256_hex(&bytes),
    })
}

pub fn pretty_json<T: serde::Serialize>(value: &T) -> CliResult<Vec<u8>> {
    lancer_core::json::to_vec_pretty(value).map_err(CliError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temporary() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested").join("a.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        let names: Vec<_> = fs::read_dir(p.parent().unwrap()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec![std::ffi::OsString::from("a.json")]);
    }

    #[test]
    fn missing_files_are_data_errors() {
        let err = read(Path::new("/definitely/not/here.json")).unwrap_err();
        assert_eq!(err.kind, ErrorKind::Data);
    }
}
