//! Run configuration.
//!
//! A run is described by one JSON object (schema `lancer-run-config`,
//! version 1). Fields missing from the file take family- and mode-specific
//! defaults; command-line flags and `--set path=value` overrides are applied
//! on top before the object is validated. The config hash is the SHA-256 of
//! the resolved object with the two directory fields removed, so equal hashes
//! mean equal inputs regardless of where files live.

use std::path::PathBuf;

use lancer_core::lancer::LancerConfig;
use lancer_core::problems::{DeadlineMode, FamilyTag, GeneratorParams, ProblemFamily, Sense};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const CONFIG_SCHEMA: &str = "lancer-run-config";
pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Training or evaluation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    TwoStage,
    LancerPo,
    LancerZero,
    LancerPrior,
    ReusedM,
    /// Evaluation only: the exact optimum of every instance.
    Optimal,
    /// Evaluation only: decisions from random cost vectors.
    Random,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::TwoStage,
        Mode::LancerPo,
        Mode::LancerZero,
        Mode::LancerPrior,
        Mode::ReusedM,
        Mode::Optimal,
        Mode::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::TwoStage => "two_stage",
            Mode::LancerPo => "lancer_po",
            Mode::LancerZero => "lancer_zero",
            Mode::LancerPrior => "lancer_prior",
            Mode::ReusedM => "reused_m",
            Mode::Optimal => "optimal",
            Mode::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn is_trainable(self) -> bool {
        !matches!(self, Mode::Optimal | Mode::Random)
    }

    /// Modes that optimize per instance or learn from fully observed
    /// instances use the longer single-instance defaults.
    fn uses_zero_defaults(self) -> bool {
        matches!(self, Mode::LancerZero | Mode::LancerPrior | Mode::ReusedM)
    }

    pub fn check_family(self, family: FamilyTag) -> CliResult<()> {
        let ok = match self {
            Mode::TwoStage | Mode::LancerPo => !family.is_fully_observed(),
            Mode::LancerZero | Mode::LancerPrior | Mode::ReusedM => family.is_fully_observed(),
            Mode::Optimal => family != FamilyTag::PortfolioMinlp,
            Mode::Random => true,
        };
        if ok {
            Ok(())
        } else {
            let why = match self {
                Mode::TwoStage | Mode::LancerPo => "needs a family with hidden problem parameters",
                Mode::Optimal => "needs a family with an exact optimum oracle",
                _ => "needs a fully observed family",
            };
            Err(CliError::config(format!(
                "mode {} is not available for {}: it {why}",
                self.name(),
                family.name()
            )))
        }
    }
}

fn family_from_name(s: &str) -> Option<FamilyTag> {
    FamilyTag::ALL.into_iter().find(|f| f.name() == s)
}

/// Dataset sizes and generator arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataParams {
    pub n_train: usize,
    pub n_test: usize,
    pub generator: GeneratorParams,
}

impl DataParams {
    pub fn defaults_for(family: FamilyTag) -> Self {
        let (n_train, n_test) = if family.is_fully_observed() { (50, 25) } else { (1000, 1000) };
        let generator = match family {
            FamilyTag::ShortestPathLp => GeneratorParams::ShortestPath {
                grid_n: 5,
                feat_dim: 5,
                poly_deg: 6,
                noise_halfwidth: 0.5,
            },
            FamilyTag::MultiKnapsack => GeneratorParams::Knapsack {
                n_items: 100,
                dims: 5,
                capacity: 40.0,
                feat_dim: 256,
                hidden: 500,
            },
            FamilyTag::StochasticSp => GeneratorParams::StochasticSp {
                grid_n: 5,
                deadline_mode: DeadlineMode::Normal,
            },
            FamilyTag::PortfolioQp => GeneratorParams::Portfolio {
                k: 20,
                history_len: 60,
                feat_dim: 5,
                with_coskewness: false,
            },
            FamilyTag::PortfolioMinlp => GeneratorParams::Portfolio {
                k: 10,
                history_len: 60,
                feat_dim: 5,
                with_coskewness: true,
            },
        };
        DataParams {
            n_train,
            n_test,
            generator,
        }
    }

    fn check_family(&self, family: FamilyTag) -> CliResult<()> {
        let ok = matches!(
            (&self.generator, family),
            (GeneratorParams::ShortestPath { .. }, FamilyTag::ShortestPathLp)
                | (GeneratorParams::Knapsack { .. }, FamilyTag::MultiKnapsack)
                | (GeneratorParams::StochasticSp { .. }, FamilyTag::StochasticSp)
                | (GeneratorParams::Portfolio { with_coskewness: false, .. }, FamilyTag::PortfolioQp)
                | (GeneratorParams::Portfolio { with_coskewness: true, .. }, FamilyTag::PortfolioMinlp)
        );
        if !ok {
            return Err(CliError::config(format!(
                "data.generator {:?} does not produce {} instances",
                self.generator,
                family.name()
            )));
        }
        if self.n_train == 0 || self.n_test == 0 {
            return Err(CliError::config("data.n_train and data.n_test must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalParams {
    /// Also score random decisions so the normalized decision loss can be
    /// reported. Their solver calls are reported separately.
    pub random_baseline: bool,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub schema_version: u32,
    pub family: FamilyTag,
    pub sense: Sense,
    pub mode: Mode,
    pub seed: u64,
    pub data: DataParams,
    pub lancer: LancerConfig,
    pub evaluation: EvalParams,
    /// Write wall-clock seconds into the history file. Timing always goes to
    /// the `timing.json` sidecar; with this off every other output is
    /// bit-reproducible.
    pub record_wall_time: bool,
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
}

/// Values supplied on the command line, applied over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub family: Option<String>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub data_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    /// `dotted.path=value`; the value is parsed as JSON, falling back to a
    /// plain string.
    pub sets: Vec<String>,
}

fn defaults_value(family: FamilyTag, mode: Mode) -> Value {
    let lancer = if mode.uses_zero_defaults() {
        LancerConfig::zero_defaults()
    } else {
        LancerConfig::default()
    };
    let mut lancer = serde_json::to_value(lancer).expect("config serializes");
    if let Value::Object(m) = &mut lancer {
        m.remove("seed");
    }
    serde_json::json!({
        "schema": CONFIG_SCHEMA,
        "schema_version": CONFIG_SCHEMA_VERSION,
        "family": family,
        "sense": ProblemFamily::new(family).sense(),
        "mode": mode,
        "data": DataParams::defaults_for(family),
        "lancer": lancer,
        "evaluation": EvalParams { random_baseline: true },
        "record_wall_time": false,
        "data_dir": "data",
        "output_dir": "runs",
    })
}

/// Recursively overlays `top` onto `base`. Objects merge key by key; any
/// other value replaces. A generator with a different tag replaces the
/// default generator wholesale.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            let replace = match (b.get("generator"), t.get("generator")) {
                (Some(Value::String(x)), Some(Value::String(y))) => x != y,
                _ => false,
            };
            if replace {
                b.clear();
            }
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn set_path(root: &mut Value, path: &str, value: Value) -> CliResult<()> {
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(format!("bad override path {path:?}")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::config(format!("override {path:?} descends into a non-object")))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| CliError::config(format!("override {path:?} descends into a non-object")))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_set(s: &str) -> CliResult<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--set expects path=value, got {s:?}")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

impl RunConfig {
    /// Resolves a config from optional file contents and overrides.
    pub fn resolve(file: Option<&[u8]>, ov: &Overrides) -> CliResult<RunConfig> {
        let mut user = match file {
            Some(bytes) => serde_json::from_slice::<Value>(bytes)
                .map_err(|e| CliError::config(format!("config is not valid JSON: {e}")))?,
            None => Value::Object(Map::new()),
        };
        if !user.is_object() {
            return Err(CliError::config("config must be a JSON object"));
        }
        if let Some(f) = &ov.family {
            set_path(&mut user, "family", Value::String(f.clone()))?;
        }
        if let Some(m) = &ov.mode {
            set_path(&mut user, "mode", Value::String(m.clone()))?;
        }
        if let Some(s) = ov.seed {
            set_path(&mut user, "seed", Value::from(s))?;
        }
        if let Some(d) = &ov.data_dir {
            set_path(&mut user, "data_dir", Value::String(d.display().to_string()))?;
        }
        if let Some(d) = &ov.output_dir {
            set_path(&mut user, "output_dir", Value::String(d.display().to_string()))?;
        }
        for s in &ov.sets {
            let (k, v) = parse_set(s)?;
            set_path(&mut user, &k, v)?;
        }

        let family = match user.get("family") {
            Some(Value::String(s)) => {
                family_from_name(s).ok_or_else(|| CliError::config(format!("unknown family {s:?}")))?
            }
            Some(_) => return Err(CliError::config("family must be a string")),
            None => return Err(CliError::config("no family given (config field `family` or --family)")),
        };
        let mode = match user.get("mode") {
            Some(Value::String(s)) => Mode::parse(s).ok_or_else(|| CliError::config(format!("unknown mode {s:?}")))?,
            Some(_) => return Err(CliError::config("mode must be a string")),
            None => return Err(CliError::config("no mode given (config field `mode` or --mode)")),
        };
        if user.get("seed").is_none() {
            return Err(CliError::config("no seed given (config field `seed` or --seed)"));
        }
        if let Some(s) = user.pointer("/lancer/seed") {
            if Some(s) != user.get("seed") {
                return Err(CliError::config("lancer.seed is taken from the run seed; drop it or make it equal"));
            }
        }
        if let Some(Value::Object(l)) = user.get_mut("lancer") {
            l.remove("seed");
        }

        let mut merged = defaults_value(family, mode);
        merge(&mut merged, user);
        let mut cfg: RunConfig =
            serde_json::from_value(merged).map_err(|e| CliError::config(format!("invalid config: {e}")))?;
        cfg.lancer.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema != CONFIG_SCHEMA || self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::config(format!(
                "expected schema {CONFIG_SCHEMA} v{CONFIG_SCHEMA_VERSION}, found {} v{}",
                self.schema, self.schema_version
            )));
        }
        ProblemFamily::with_sense(self.family, self.sense).map_err(|e| CliError::config(e.to_string()))?;
        self.mode.check_family(self.family)?;
        self.data.check_family(self.family)?;
        self.lancer.validate().map_err(|e| CliError::config(format!("lancer: {e}")))?;
        if self.lancer.outer_iters == 0 && matches!(self.mode, Mode::LancerZero | Mode::LancerPrior | Mode::ReusedM) {
            return Err(CliError::config(format!("mode {} needs lancer.outer_iters >= 1", self.mode.name())));
        }
        if self.lancer.seed != self.seed {
            return Err(CliError::config("lancer.seed must equal the run seed"));
        }
        Ok(())
    }

    pub fn problem_family(&self) -> ProblemFamily {
        ProblemFamily::with_sense(self.family, self.sense).expect("validated")
    }

    /// The config without its directory fields: what the hash covers and
    /// what outputs echo.
    pub fn echo(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(m) = &mut v {
            m.remove("data_dir");
            m.remove("output_dir");
        }
        v
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.echo()).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    /// Pretty JSON of the full resolved config.
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("config serializes");
        out.push(b'\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(family: &str, mode: &str, seed: u64) -> Overrides {
        Overrides {
            family: Some(family.into()),
            mode: Some(mode.into()),
            seed: Some(seed),
            ..Default::default()
        }
    }

    #[test]
    fn defaults_resolve_for_every_compatible_pair() {
        for f in FamilyTag::ALL {
            for m in Mode::ALL {
                let res = RunConfig::resolve(None, &ov(f.name(), m.name(), 1));
                assert_eq!(res.is_ok(), m.check_family(f).is_ok(), "{} {}", f.name(), m.name());
            }
        }
    }

    #[test]
    fn shortest_path_defaults() {
        let cfg = RunConfig::resolve(None, &ov("shortest_path_lp", "lancer_po", 3)).unwrap();
        assert_eq!((cfg.data.n_train, cfg.data.n_test), (1000, 1000));
        assert_eq!(cfg.lancer.outer_iters, 10);
        assert_eq!(cfg.lancer.seed, 3);
        let zero = RunConfig::resolve(None, &ov("stochastic_sp", "lancer_zero", 3)).unwrap();
        assert_eq!(zero.lancer.outer_iters, 40);
        assert_eq!(zero.lancer.surrogate_hidden, vec![200, 200]);
    }

    #[test]
    fn file_flags_and_sets_layer_in_order() {
        let file = br#"{"family":"shortest_path_lp","mode":"two_stage","seed":1,
            "data":{"n_train":20,"generator":{"grid_n":3}},"lancer":{"lr_w":0.01}}"#;
        let o = Overrides {
            mode: Some("lancer_po".into()),
            seed: Some(9),
            sets: vec!["lancer.outer_iters=3".into(), "data.n_test=7".into()],
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Some(file), &o).unwrap();
        assert_eq!(cfg.mode, Mode::LancerPo);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.data.n_train, 20);
        assert_eq!(cfg.data.n_test, 7);
        assert_eq!(cfg.lancer.lr_w, 0.01);
        assert_eq!(cfg.lancer.outer_iters, 3);
        match cfg.data.generator {
            GeneratorParams::ShortestPath { grid_n, poly_deg, .. } => assert_eq!((grid_n, poly_deg), (3, 6)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_configs_are_config_errors() {
        let cases: Vec<(&[u8], Overrides)> = vec![
            (b"[1]", Overrides::default()),
            (b"{", Overrides::default()),
            (br#"{"family":"shortest_path_lp","mode":"lancer_zero","seed":1}"#, Overrides::default()),
            (br#"{"family":"shortest_path_lp","mode":"two_stage"}"#, Overrides::default()),
            (br#"{"family":"nope","mode":"two_stage","seed":1}"#, Overrides::default()),
            (br#"{"family":"shortest_path_lp","mode":"two_stage","seed":1,"bogus":2}"#, Overrides::default()),
            (br#"{"family":"shortest_path_lp","mode":"two_stage","seed":1,"lancer":{"seed":2}}"#, Overrides::default()),
            (br#"{"family":"stochastic_sp","mode":"lancer_zero","seed":1,"sense":"minimize"}"#, Overrides::default()),
            (br#"{"family":"portfolio_qp","mode":"two_stage","seed":1,"data":{"generator":{"with_coskewness":true}}}"#, Overrides::default()),
            (br#"{"family":"shortest_path_lp","mode":"two_stage","seed":1,"schema_version":2}"#, Overrides::default()),
        ];
        for (bytes, o) in cases {
            let err = RunConfig::resolve(Some(bytes), &o).unwrap_err();
            assert_eq!(err.kind, crate::error::ErrorKind::Config, "{}", String::from_utf8_lossy(bytes));
        }
    }

    #[test]
    fn hash_ignores_directories_only() {
        let a = RunConfig::resolve(None, &ov("shortest_path_lp", "lancer_po", 1)).unwrap();
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        b.data_dir = "other".into();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.lancer.lr_w = 0.5;
        assert_ne!(a.hash(), c.hash());
        let back = RunConfig::resolve(Some(&a.to_json()), &Overrides::default()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.hash(), a.hash());
    }

    #[test]
    fn switching_generator_kind_replaces_defaults() {
        let mut base = serde_json::json!({"generator": "shortest_path", "grid_n": 5});
        merge(&mut base, serde_json::json!({"generator": "knapsack", "n_items": 3}));
        assert_eq!(base, serde_json::json!({"generator": "knapsack", "n_items": 3}));
    }
}
