//! Flat key=value configuration files with command-line override semantics.
//!
//! A config file is a sequence of `key = value` lines; `#` starts a comment
//! and blank lines are ignored.  Every subcommand declares the keys it
//! understands, and unknown keys are rejected so typos fail loudly instead
//! of silently running a default.  Values given on the command line always
//! win over file entries.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Engines the harness can drive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    /// Split/crunch gas, constant crunch rate.
    AlgaConst,
    /// Split/crunch gas, per-cell adaptive crunch rate.
    AlgaAdaptive,
    /// BGK relaxation reference.
    Lbm,
    /// Monte Carlo pair-collision gas.
    Mclga,
    /// Statevector quantum implementation of the split/crunch gas.
    Qalga,
}

impl FromStr for Engine {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alga-const" => Ok(Self::AlgaConst),
            "alga-adaptive" => Ok(Self::AlgaAdaptive),
            "lbm" => Ok(Self::Lbm),
            "mclga" => Ok(Self::Mclga),
            "qalga" => Ok(Self::Qalga),
            other => bail!(
                "unknown engine '{other}' (expected alga-const, alga-adaptive, lbm, mclga, or qalga)"
            ),
        }
    }
}

impl Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::AlgaConst => "alga-const",
            Self::AlgaAdaptive => "alga-adaptive",
            Self::Lbm => "lbm",
            Self::Mclga => "mclga",
            Self::Qalga => "qalga",
        })
    }
}

/// Initial-condition families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitProfile {
    /// Half-period sine envelope with a uniform velocity bias.
    Sine,
    /// Full-period cosine density wave at rest.
    Cosine,
}

impl FromStr for InitProfile {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(Self::Sine),
            "cosine" => Ok(Self::Cosine),
            other => bail!("unknown init profile '{other}' (expected sine or cosine)"),
        }
    }
}

/// Parsed config file plus the subcommand's override layer.
pub struct Settings {
    file: HashMap<String, String>,
}

impl Settings {
    /// Load `path` (or start empty) and reject keys outside `allowed`.
    pub fn load(path: Option<&Path>, allowed: &[&str]) -> Result<Self> {
        let mut file = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config file {}", path.display()))?;
            for (index, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    anyhow!("{}:{}: expected 'key = value', got '{line}'", path.display(), index + 1)
                })?;
                let key = key.trim().to_owned();
                if !allowed.contains(&key.as_str()) {
                    bail!(
                        "{}:{}: unknown key '{key}' (allowed: {})",
                        path.display(),
                        index + 1,
                        allowed.join(", ")
                    );
                }
                file.insert(key, value.trim().to_owned());
            }
        }
        Ok(Self { file })
    }

    /// Resolve one value: command-line override, then file entry, then
    /// `default`.
    pub fn resolve<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(value) => Ok(value),
            None => self.parsed(key)?.map_or(Ok(default), Ok),
        }
    }

    /// Like [`Settings::resolve`] but with no default: the key must come
    /// from either the command line or the file.
    pub fn require<T>(&self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(value) => Ok(value),
            None => self
                .parsed(key)?
                .ok_or_else(|| anyhow!("missing required setting '{key}' (flag or config file)")),
        }
    }

    /// Optional value: command line, then file, then `None`.
    pub fn optional<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(value) => Ok(Some(value)),
            None => self.parsed(key),
        }
    }

    fn parsed<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.file
            .get(key)
            .map(|raw| {
                raw.parse::<T>()
                    .map_err(|err| anyhow!("config key '{key}': cannot parse '{raw}': {err}"))
            })
            .transpose()
    }
}

/// Comma-separated list of time indices, e.g. `0,250,500`.
#[derive(Clone, Debug)]
pub struct TimeList(pub Vec<usize>);

impl FromStr for TimeList {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut times = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            times.push(
                part.parse::<usize>()
                    .map_err(|_| anyhow!("invalid time index '{part}' in list '{s}'"))?,
            );
        }
        if times.is_empty() {
            bail!("empty time list '{s}'");
        }
        times.sort_unstable();
        times.dedup();
        Ok(Self(times))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file
    }

    #[test]
    fn parses_values_comments_and_blanks() {
        let file = write_temp("# header\nsites = 64\n\nn_max = 12.5 # trailing\n");
        let s = Settings::load(Some(file.path()), &["sites", "n_max"]).unwrap();
        assert_eq!(s.resolve::<usize>("sites", None, 8).unwrap(), 64);
        assert_eq!(s.resolve::<f64>("n_max", None, 1.0).unwrap(), 12.5);
    }

    #[test]
    fn flag_overrides_file_and_default() {
        let file = write_temp("steps = 10\n");
        let s = Settings::load(Some(file.path()), &["steps"]).unwrap();
        assert_eq!(s.resolve::<usize>("steps", Some(99), 1).unwrap(), 99);
        assert_eq!(s.resolve::<usize>("steps", None, 1).unwrap(), 10);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        let file = write_temp("bogus = 3\n");
        assert!(Settings::load(Some(file.path()), &["sites"]).is_err());
        let file = write_temp("no equals sign\n");
        assert!(Settings::load(Some(file.path()), &["sites"]).is_err());
    }

    #[test]
    fn engine_and_init_names_round_trip() {
        for name in ["alga-const", "alga-adaptive", "lbm", "mclga", "qalga"] {
            assert_eq!(name.parse::<Engine>().unwrap().to_string(), name);
        }
        assert!("sine".parse::<InitProfile>().is_ok());
        assert!("square".parse::<InitProfile>().is_err());
    }

    #[test]
    fn time_lists_sort_and_dedupe() {
        let list: TimeList = "500,0,250,250".parse().unwrap();
        assert_eq!(list.0, vec![0, 250, 500]);
        assert!("".parse::<TimeList>().is_err());
        assert!("1,x".parse::<TimeList>().is_err());
    }
}
