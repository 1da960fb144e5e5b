//! Layered settings: command-line flag, then `UNITSCAN_<KEY>` environment
//! variable, then a `key = value` file, then the built-in default.

use std::collections::BTreeMap;
use std::env;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const KEYS: [&str; 7] = [
    "shards",
    "checkpoint_interval",
    "step_budget",
    "report",
    "filter",
    "precision_cap",
    "bernoulli_bound",
];

pub struct Settings {
    file: BTreeMap<String, String>,
    file_path: Option<PathBuf>,
    effective: Vec<String>,
}

pub fn env_name(key: &str) -> String {
    format!("UNITSCAN_{}", key.to_ascii_uppercase())
}

fn parse_file(text: &str, path: &Path) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key = value", path.display(), i + 1))?;
        let k = k.trim().replace('-', "_");
        if !KEYS.contains(&k.as_str()) {
            return Err(format!("{}:{}: unknown key {k:?}", path.display(), i + 1));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    /// Reads the file named by `--config`, else by `UNITSCAN_CONFIG`, if any.
    pub fn load(flag: Option<&Path>) -> Result<Self, String> {
        let path = flag
            .map(Path::to_path_buf)
            .or_else(|| env::var_os("UNITSCAN_CONFIG").map(PathBuf::from));
        let file = match &path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| format!("config {}: {e}", p.display()))?;
                parse_file(&text, p)?
            }
            None => BTreeMap::new(),
        };
        Ok(Settings { file, file_path: path, effective: Vec::new() })
    }

    pub fn resolve<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, String>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        debug_assert!(KEYS.contains(&key));
        let parse = |raw: &str, from: &str| {
            raw.parse::<T>().map_err(|e| format!("{key} from {from}: {e}"))
        };
        let (value, source) = if let Some(v) = flag {
            (v, "flag".to_string())
        } else if let Ok(raw) = env::var(env_name(key)) {
            (parse(&raw, &env_name(key))?, "env".to_string())
        } else if let Some(raw) = self.file.get(key) {
            (parse(raw, "config file")?, "file".to_string())
        } else {
            (default, "default".to_string())
        };
        self.effective.push(format!("{key}={value} ({source})"));
        Ok(value)
    }

    /// One line for the log stream.
    pub fn describe(&self) -> String {
        let file = match &self.file_path {
            Some(p) => format!(" file={}", p.display()),
            None => String::new(),
        };
        format!("config:{file} {}", self.effective.join(" "))
    }
}
