//! Flat key=value config files. Every key maps one-to-one onto a
//! command-line flag; flags win when both are given.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use rsgan::{Error, Result};

/// Every key a config file may contain. Global keys are bare; per-subcommand
/// keys are namespaced as `<subcommand>.<flag>` with dashes as underscores.
pub const KNOWN_KEYS: &[&str] = &[
    "seed",
    "out",
    "threads",
    "prepare.ratings",
    "prepare.social",
    "prepare.threshold",
    "prepare.folds",
    "seed.ratings",
    "seed.social",
    "seed.threshold",
    "seed.holdout_frac",
    "seed.meta_paths",
    "seed.walks",
    "seed.walk_length",
    "seed.dim",
    "seed.window",
    "seed.neg",
    "seed.sg_epochs",
    "seed.sg_lr",
    "seed.k_seed",
    "seed.min_sim",
    "train.ratings",
    "train.seeds",
    "train.manifest",
    "train.threshold",
    "train.model",
    "train.fold",
    "train.dim",
    "train.hidden",
    "train.tau",
    "train.lambda",
    "train.lr_d",
    "train.lr_g",
    "train.lr_decay",
    "train.batch_size",
    "train.pretrain_epochs",
    "train.pretrain_lr",
    "train.pretrain_negatives",
    "train.q_corrupt",
    "train.epochs",
    "train.d_steps",
    "train.patience",
    "train.warmup_epochs",
    "train.epoch_alternation",
    "train.hard_z",
    "train.freeze_checks",
    "eval.ratings",
    "eval.manifest",
    "eval.threshold",
    "eval.model",
    "eval.fold",
    "eval.checkpoint",
    "eval.ks",
    "eval.cold_max",
    "linkpred.ratings",
    "linkpred.social",
    "linkpred.seeds",
    "linkpred.threshold",
    "linkpred.checkpoint",
    "linkpred.baseline_checkpoint",
    "linkpred.holdout_frac",
    "linkpred.k",
    "analyze.ratings",
    "analyze.social",
    "analyze.seeds",
    "analyze.threshold",
    "analyze.checkpoint",
    "analyze.top",
];

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn empty() -> Self {
        ConfigFile::default()
    }

    /// Parse a config file. Blank lines and `#` comments are skipped;
    /// everything else must be `key=value` with a known key, each key at
    /// most once.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    msg: format!("expected key=value, got {line:?}"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    msg: format!("unknown config key `{key}`"),
                });
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    msg: format!("duplicate config key `{key}`"),
                });
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        debug_assert!(KNOWN_KEYS.contains(&key), "unregistered key {key}");
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                Error::Config(format!("config key {key}={raw}: {e}"))
            }),
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        debug_assert!(KNOWN_KEYS.contains(&key), "unregistered key {key}");
        match self.values.get(key).map(String::as_str) {
            None => Ok(None),
            Some("true") => Ok(Some(true)),
            Some("false") => Ok(Some(false)),
            Some(other) => Err(Error::Config(format!(
                "config key {key}={other}: expected true or false"
            ))),
        }
    }
}

/// Flag beats config beats default.
pub fn resolve<T>(flag: Option<T>, cfg: &ConfigFile, key: &str, default: T) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    match flag {
        Some(v) => Ok(v),
        None => Ok(cfg.get(key)?.unwrap_or(default)),
    }
}

/// Flag beats config; absent everywhere stays absent.
pub fn resolve_opt<T>(flag: Option<T>, cfg: &ConfigFile, key: &str) -> Result<Option<T>>
where
    T: FromStr,
    T::Err: Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.get(key),
    }
}

/// Flag beats config; absent everywhere is an input error.
pub fn resolve_req<T>(flag: Option<T>, cfg: &ConfigFile, key: &str, flag_name: &str) -> Result<T>
where
    T: FromStr,
    T::Err: Display,
{
    resolve_opt(flag, cfg, key)?.ok_or_else(|| {
        Error::Config(format!("{flag_name} is required (config key {key})"))
    })
}

/// Boolean switch: the flag can only turn it on; config supplies the rest.
pub fn resolve_switch(flag: bool, cfg: &ConfigFile, key: &str) -> Result<bool> {
    if flag {
        Ok(true)
    } else {
        Ok(cfg.get_bool(key)?.unwrap_or(false))
    }
}
