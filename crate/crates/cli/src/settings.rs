//! Run settings merged from a `key = value` file and command-line flags.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sidecast::{Error, Result};

/// Keys accepted as input, in manifest order.
pub const INPUT_KEYS: &[&str] = &[
    "problem",
    "f",
    "g",
    "mode",
    "epsilon",
    "gamma",
    "m",
    "spectral-nodes",
    "spectral-coverage",
    "noise",
    "seed",
    "data-grid",
    "grid",
    "tail-energy",
    "N",
    "index-set",
    "sinc-points",
    "v-eps",
    "eps-list",
    "timing",
    "points",
    "out",
];

/// Keys that manifests record as results; they are accepted in a config file and ignored.
const DERIVED_KEYS: &[&str] = &[
    "b_eps",
    "a_eps",
    "kappa",
    "data_term_coefficient",
    "C",
    "noise_term",
    "sinc_a_eps",
    "sinc_mesh",
    "sinc_deviation",
    "sinc_node_error",
    "square_deviation",
    "triangular_deviation",
    "dropped_energy",
    "measured_error",
    "exact_norm",
    "eta_hat",
    "bound",
];

#[derive(Debug, Clone, Default)]
pub struct Settings {
    entries: Vec<(String, String)>,
}

fn parse_config(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: e.to_string(),
    })?;
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: k + 1,
            msg,
        };
        let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
        let (key, value) = (key.trim(), value.trim());
        if DERIVED_KEYS.contains(&key) {
            log::debug!("{}: ignoring recorded result {key}", path.display());
            continue;
        }
        if !INPUT_KEYS.contains(&key) {
            return Err(err(format!("unknown key {key:?}")));
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

impl Settings {
    /// Config file entries overridden by the flags that were given.
    pub fn load(config: Option<&Path>, flags: &[(&str, Option<String>)]) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(path) = config {
            for (k, v) in parse_config(path)? {
                s.set(&k, v);
            }
        }
        for (k, v) in flags {
            if let Some(v) = v {
                s.set(k, v.clone());
            }
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, value: String) {
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn has(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    pub fn parse<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Parameter(format!("{key}: cannot parse {v:?}: {e}")))
            })
            .transpose()
    }

    pub fn parse_or<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key).map(|v| v.to_ascii_lowercase()) {
            None => Ok(default),
            Some(v) if matches!(v.as_str(), "true" | "1" | "yes" | "on") => Ok(true),
            Some(v) if matches!(v.as_str(), "false" | "0" | "no" | "off") => Ok(false),
            Some(v) => Err(Error::Parameter(format!("{key}: expected true or false, got {v:?}"))),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }
}

/// `"a,b,c"` as numbers; blank entries are rejected.
pub fn parse_list(key: &str, text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Err(Error::Parameter(format!("{key}: empty list")));
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parameter(format!("{key}: cannot parse {s:?}: {e}")))
        })
        .collect()
}

/// `"z,r;z,r"` as frequency points.
pub fn parse_points(text: &str) -> Result<Vec<(f64, f64)>> {
    let pts: Vec<(f64, f64)> = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| match parse_list("points", pair)?.as_slice() {
            &[z, r] => Ok((z, r)),
            _ => Err(Error::Parameter(format!("points: expected z,r pairs, got {pair:?}"))),
        })
        .collect::<Result<_>>()?;
    if pts.is_empty() {
        return Err(Error::Parameter("points: empty list".into()));
    }
    Ok(pts)
}
