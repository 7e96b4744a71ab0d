//! Run configuration: defaults, then a key=value file, then command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Convention {
    OmitHalf,
    Full,
}

/// Usage or configuration error; reported with exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(Usage(msg.into()).into())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub family: Option<String>,
    pub g: Option<usize>,
    pub mode: Mode,
    pub seed: u64,
    pub points: usize,
    /// Drift and float-residual tolerance.
    pub tol: f64,
    pub sup_tol: f64,
    pub identity_tol: f64,
    pub constraint_tol: f64,
    pub t_end: Option<f64>,
    pub step: f64,
    pub every: usize,
    pub direction: Option<Vec<f64>>,
    pub gauge: String,
    pub sweep_gauge: Option<Vec<String>>,
    pub gmax: usize,
    pub kind: Option<String>,
    pub convention: Convention,
    pub point: Option<PathBuf>,
    pub compare: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            family: None,
            g: None,
            mode: Mode::Exact,
            seed: 0,
            points: 20,
            tol: 1e-8,
            sup_tol: 1e-6,
            identity_tol: 1e-9,
            constraint_tol: 1e-10,
            t_end: None,
            step: 1e-3,
            every: 1,
            direction: None,
            gauge: "1".into(),
            sweep_gauge: None,
            gmax: 6,
            kind: None,
            convention: Convention::OmitHalf,
            point: None,
            compare: None,
            output: None,
            format: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("invalid value {value:?} for '{key}'"))
}

fn positive(key: &str, value: &str) -> Result<f64, String> {
    let x: f64 = parse(key, value)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{key}' must be positive, got {value}"))
    }
}

fn choice<T: clap::ValueEnum>(key: &str, value: &str) -> Result<T, String> {
    T::from_str(value, true).map_err(|_| format!("invalid value {value:?} for '{key}'"))
}

pub fn split_list(value: &str) -> Vec<String> {
    value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "family" => self.family = Some(value.to_string()),
            "g" => self.g = Some(parse(key, value)?),
            "mode" => self.mode = choice(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "points" => self.points = parse(key, value)?,
            "tol" => self.tol = positive(key, value)?,
            "sup_tol" => self.sup_tol = positive(key, value)?,
            "identity_tol" => self.identity_tol = positive(key, value)?,
            "constraint_tol" => self.constraint_tol = positive(key, value)?,
            "t_end" => self.t_end = Some(parse(key, value)?),
            "step" => self.step = positive(key, value)?,
            "every" => self.every = parse(key, value)?,
            "direction" => {
                self.direction =
                    Some(split_list(value).iter().map(|s| parse(key, s)).collect::<Result<_, _>>()?)
            }
            "gauge" => self.gauge = value.to_string(),
            "sweep_gauge" => self.sweep_gauge = Some(split_list(value)),
            "gmax" => self.gmax = parse(key, value)?,
            "kind" => self.kind = Some(value.to_string()),
            "convention" => self.convention = choice(key, value)?,
            "point" => self.point = Some(value.into()),
            "compare" => self.compare = Some(value.into()),
            "output" => self.output = Some(value.into()),
            "format" => self.format = Some(choice(key, value)?),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Applies a key=value document. Blank lines and `#` comments are skipped.
    pub fn apply_str(&mut self, text: &str, origin: &str) -> anyhow::Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return usage(format!("{origin}:{}: expected key = value", n + 1));
            };
            let key = k.trim().replace('-', "_");
            if let Err(e) = self.set(&key, v.trim()) {
                return usage(format!("{origin}:{}: {e}", n + 1));
            }
        }
        Ok(())
    }
}

/// Defaults merged with the file at `path`.
pub fn parse_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return usage(format!("cannot read config {}: {e}", path.display())),
    };
    let mut cfg = RunConfig::default();
    cfg.apply_str(&text, &path.display().to_string())?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from(text: &str) -> anyhow::Result<RunConfig> {
        let mut c = RunConfig::default();
        c.apply_str(text, "test.cfg")?;
        Ok(c)
    }

    #[test]
    fn empty_file_gives_defaults() {
        let c = from("").unwrap();
        assert_eq!(c.mode, Mode::Exact);
        assert_eq!(c.seed, 0);
        assert_eq!(c.tol, 1e-8);
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn settings_and_comments() {
        let c = from("# run\ng = 3\nmode=float\nsweep-gauge = 1, 2/3\ndirection = 1,0.5\n").unwrap();
        assert_eq!(c.g, Some(3));
        assert_eq!(c.mode, Mode::Float);
        assert_eq!(c.sweep_gauge, Some(vec!["1".to_string(), "2/3".to_string()]));
        assert_eq!(c.direction, Some(vec![1.0, 0.5]));
    }

    #[test]
    fn unknown_key_is_named() {
        let e = from("g = 1\ncolour = red\n").unwrap_err().to_string();
        assert!(e.contains("colour") && e.contains(":2:"), "{e}");
    }

    #[test]
    fn malformed_line_reports_line() {
        let e = from("g = 1\n\njust words\n").unwrap_err().to_string();
        assert!(e.contains("test.cfg:3"), "{e}");
    }

    #[test]
    fn bad_values_rejected() {
        assert!(from("tol = -1").is_err());
        assert!(from("mode = fuzzy").is_err());
        assert!(from("g = two").is_err());
    }
}
