//! Flat `key = value` config files. Flags win over file values; keys the
//! command does not read are errors.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, (String, usize)>,
    read: Vec<String>,
}

fn norm(key: &str) -> String {
    let k = key.trim().replace('_', "-");
    if k == "mc-trials" { "trials".to_string() } else { k }
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut file = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Usage(format!("config line {}: expected key=value, got {raw:?}", i + 1)));
            };
            let key = norm(k);
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
            }
            if file.insert(key.clone(), (v.trim().to_string(), i + 1)).is_some() {
                return Err(CliError::Usage(format!("config line {}: duplicate key {key}", i + 1)));
            }
        }
        Ok(Self { file, read: Vec::new() })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.read.push(key.to_string());
        self.file.get(key).cloned()
    }

    /// The flag if given, else the file value, else `default`.
    pub fn value<T: FromStr>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.opt(key, flag)?.unwrap_or(default))
    }

    pub fn opt<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let file = self.raw(key);
        if flag.is_some() {
            return Ok(flag);
        }
        file.map(|(v, line)| {
            v.parse::<T>()
                .map_err(|e| CliError::Usage(format!("config line {line}: bad value for {key}: {e}")))
        })
        .transpose()
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&mut self, key: &str, flag: Vec<T>, default: Vec<T>) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let file = self.raw(key);
        if !flag.is_empty() {
            return Ok(flag);
        }
        match file {
            None => Ok(default),
            Some((v, line)) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<T>()
                        .map_err(|e| CliError::Usage(format!("config line {line}: bad value for {key}: {e}")))
                })
                .collect(),
        }
    }

    /// Fails on any file key no lookup asked for.
    pub fn finish(self) -> Result<(), CliError> {
        match self.file.keys().find(|k| !self.read.contains(k)) {
            Some(k) => Err(CliError::Usage(format!("unknown config key {k}"))),
            None => Ok(()),
        }
    }
}

/// Counts written as integers or in scientific notation (`1e6`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let f: f64 = s.parse().map_err(|_| format!("not a count: {s}"))?;
    if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(format!("not a non-negative integer: {s}"))
    }
}

/// Newtype so counts read from files accept the same spellings as flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Count(pub u64);

impl FromStr for Count {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_count(s).map(Count)
    }
}
