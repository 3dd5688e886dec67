//! Experiment configuration: defaults, the flat `key=value` file format and
//! layering of file, command line and `BPRE_SEED`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asymptotics::Method;
use crate::branching::Mode;
use crate::error::{Error, Result};
use crate::heavytail::{parse_law, TailLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    LawCheck,
    Simulate,
    Tail,
    RwreVerify,
    Disteq,
    Psae,
    Perpetuity,
}

impl Kind {
    pub const ALL: [Kind; 7] =
        [Kind::LawCheck, Kind::Simulate, Kind::Tail, Kind::RwreVerify, Kind::Disteq, Kind::Psae, Kind::Perpetuity];

    pub fn name(self) -> &'static str {
        match self {
            Kind::LawCheck => "law-check",
            Kind::Simulate => "simulate",
            Kind::Tail => "tail",
            Kind::RwreVerify => "rwre-verify",
            Kind::Disteq => "disteq",
            Kind::Psae => "psae",
            Kind::Perpetuity => "perpetuity",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidArgument(format!("unknown format '{s}' (csv|json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

pub fn parse_method(s: &str) -> Result<Method> {
    match s {
        "crude" => Ok(Method::Crude),
        "importance" => Ok(Method::Importance),
        "exact" => Ok(Method::Exact),
        _ => Err(Error::InvalidArgument(format!("unknown method '{s}' (crude|importance|exact)"))),
    }
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Crude => "crude",
        Method::Importance => "importance",
        Method::Exact => "exact",
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub law: String,
    pub n: u64,
    pub m: f64,
    pub reps: u64,
    pub mode: Mode,
    pub method: Method,
    pub c: f64,
    pub eps: f64,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const DEFAULT_N: u64 = 10;
pub const DEFAULT_M: f64 = 1e6;
pub const DEFAULT_REPS: u64 = 10_000;
pub const DEFAULT_C: f64 = 50.0;
pub const DEFAULT_EPS: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 1;

impl ExperimentConfig {
    pub fn new(kind: Kind, law: impl Into<String>) -> Self {
        Self {
            kind,
            law: law.into(),
            n: DEFAULT_N,
            m: DEFAULT_M,
            reps: DEFAULT_REPS,
            mode: Mode::Size1,
            method: Method::Crude,
            c: DEFAULT_C,
            eps: DEFAULT_EPS,
            seed: DEFAULT_SEED,
            workers: 1,
            out: None,
            format: Format::Json,
        }
    }

    pub fn parsed_law(&self) -> Result<TailLaw<f64>> {
        parse_law(&self.law)
    }

    /// Flat `key=value` text that [`ConfigLayer::parse`] reads back.
    pub fn to_config_text(&self) -> String {
        let mut s = format!(
            "kind={}\nlaw={}\nn={}\nm={:?}\nreps={}\nmode={}\nmethod={}\nc={:?}\neps={:?}\nseed={}\nworkers={}\nformat={}\n",
            self.kind,
            self.law,
            self.n,
            self.m,
            self.reps,
            self.mode,
            method_name(self.method),
            self.c,
            self.eps,
            self.seed,
            self.workers,
            self.format
        );
        if let Some(out) = &self.out {
            s.push_str(&format!("out={}\n", out.display()));
        }
        s
    }
}

/// A partial configuration from one source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub kind: Option<Kind>,
    pub law: Option<String>,
    pub n: Option<u64>,
    pub m: Option<f64>,
    pub reps: Option<u64>,
    pub mode: Option<Mode>,
    pub method: Option<Method>,
    pub c: Option<f64>,
    pub eps: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

fn config_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Config { line, column, message: message.into() }
}

impl ConfigLayer {
    /// Parses the flat format: one `key=value` per line, `#` comments and
    /// blank lines ignored. Diagnostics carry 1-based line and column.
    pub fn parse(text: &str) -> Result<Self> {
        let mut layer = ConfigLayer::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let eq = content
                .find('=')
                .ok_or_else(|| config_err(line, raw.len() - raw.trim_start().len() + 1, "expected key=value"))?;
            let key_raw = &content[..eq];
            let key = key_raw.trim();
            let key_col = key_raw.len() - key_raw.trim_start().len() + 1;
            let value_raw = &content[eq + 1..];
            let value = value_raw.trim();
            let value_col = eq + 2 + (value_raw.len() - value_raw.trim_start().len());
            let bad = |what: &str| config_err(line, value_col, format!("invalid {what} '{value}'"));
            match key {
                "kind" => layer.kind = Some(value.parse().map_err(|_| bad("kind"))?),
                "law" => {
                    if let Err(Error::LawSyntax { column, token, message }) = parse_law::<f64>(value) {
                        return Err(config_err(
                            line,
                            value_col + column - 1,
                            format!("law: {message} (near `{token}`)"),
                        ));
                    }
                    layer.law = Some(value.to_string());
                }
                "n" => layer.n = Some(value.parse().map_err(|_| bad("n"))?),
                "m" => layer.m = Some(value.parse().map_err(|_| bad("m"))?),
                "reps" => layer.reps = Some(value.parse().map_err(|_| bad("reps"))?),
                "mode" => layer.mode = Some(value.parse().map_err(|_| bad("mode"))?),
                "method" => layer.method = Some(parse_method(value).map_err(|_| bad("method"))?),
                "c" => layer.c = Some(value.parse().map_err(|_| bad("c"))?),
                "eps" => layer.eps = Some(value.parse().map_err(|_| bad("eps"))?),
                "seed" => layer.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "workers" => layer.workers = Some(value.parse().map_err(|_| bad("workers"))?),
                "out" => layer.out = Some(PathBuf::from(value)),
                "format" => layer.format = Some(value.parse().map_err(|_| bad("format"))?),
                _ => return Err(config_err(line, key_col, format!("unknown key '{key}'"))),
            }
        }
        Ok(layer)
    }

    /// `self` wins where both are set.
    pub fn over(self, base: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            kind: self.kind.or(base.kind),
            law: self.law.or(base.law),
            n: self.n.or(base.n),
            m: self.m.or(base.m),
            reps: self.reps.or(base.reps),
            mode: self.mode.or(base.mode),
            method: self.method.or(base.method),
            c: self.c.or(base.c),
            eps: self.eps.or(base.eps),
            seed: self.seed.or(base.seed),
            workers: self.workers.or(base.workers),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
        }
    }

    /// Fills defaults. `env_seed` is the `BPRE_SEED` fallback.
    pub fn resolve(self, env_seed: Option<&str>) -> Result<ExperimentConfig> {
        let kind = self.kind.ok_or_else(|| Error::InvalidArgument("experiment kind is required".into()))?;
        let law = self.law.ok_or_else(|| Error::InvalidArgument("--law is required".into()))?;
        parse_law::<f64>(&law)?;
        let seed = match (self.seed, env_seed) {
            (Some(s), _) => s,
            (None, Some(s)) => s
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("BPRE_SEED is not an unsigned integer: '{s}'")))?,
            (None, None) => DEFAULT_SEED,
        };
        let mut cfg = ExperimentConfig::new(kind, law);
        cfg.n = self.n.unwrap_or(cfg.n);
        cfg.m = self.m.unwrap_or(cfg.m);
        cfg.reps = self.reps.unwrap_or(cfg.reps);
        cfg.mode = self.mode.unwrap_or(cfg.mode);
        cfg.method = self.method.unwrap_or(cfg.method);
        cfg.c = self.c.unwrap_or(cfg.c);
        cfg.eps = self.eps.unwrap_or(cfg.eps);
        cfg.seed = seed;
        cfg.workers = self.workers.unwrap_or(cfg.workers).max(1);
        cfg.out = self.out;
        cfg.format = self.format.unwrap_or(cfg.format);
        Ok(cfg)
    }
}
