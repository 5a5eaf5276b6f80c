//! Run settings from config files and command-line flags, and the run
//! manifest.
//!
//! Config files are flat `key = value` lines grouped under `[section]`
//! headers; `#` starts a comment. Sections and their keys:
//!
//! ```text
//! [case]    case, nx, ny, nz, p
//! [time]    rk, dt, courant, t_final, t_final_days, alpha_mode
//! [output]  out, dump_every
//! [engine]  threads
//! ```
//!
//! Keys before any header are looked up in every section.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cases::{CaseConfig, CaseId, DAY};
use crate::error::{Error, Result};
use crate::sim::AlphaChoice;
use crate::time::StepSize;

const SECTIONS: [(&str, &[&str]); 4] = [
    ("case", &["case", "nx", "ny", "nz", "p"]),
    (
        "time",
        &["rk", "dt", "courant", "t_final", "t_final_days", "alpha_mode"],
    ),
    ("output", &["out", "dump_every"]),
    ("engine", &["threads"]),
];

/// Partially specified settings; `None` means "not given at this layer".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub case: Option<CaseId>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub nz: Option<usize>,
    pub p: Option<usize>,
    pub rk: Option<usize>,
    pub dt: Option<f64>,
    pub courant: Option<f64>,
    /// Seconds.
    pub t_final: Option<f64>,
    pub alpha: Option<AlphaChoice>,
    pub out: Option<PathBuf>,
    pub dump_every: Option<usize>,
    pub threads: Option<usize>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("bad value '{value}' for '{key}': {e}")))
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Settings::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Settings> {
        let mut section: Option<String> = None;
        let mut seen = BTreeMap::new();
        let mut s = Settings::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_ascii_lowercase();
                if !SECTIONS.iter().any(|(sec, _)| *sec == name) {
                    return Err(Error::Config(format!("line {}: unknown section [{name}]", n + 1)));
                }
                section = Some(name);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", n + 1)))?;
            let key = key.trim().to_ascii_lowercase().replace('-', "_");
            let value = value.trim().trim_matches('"');
            let known = SECTIONS
                .iter()
                .any(|(sec, keys)| section.as_deref().is_none_or(|cur| cur == *sec) && keys.contains(&key.as_str()));
            if !known {
                let place = section.as_deref().map(|c| format!(" in [{c}]")).unwrap_or_default();
                return Err(Error::Config(format!("line {}: unknown key '{key}'{place}", n + 1)));
            }
            if seen.insert(key.clone(), n + 1).is_some() {
                return Err(Error::Config(format!("line {}: '{key}' given twice", n + 1)));
            }
            s.set(&key, value)?;
        }
        if s.dt.is_some() && s.courant.is_some() {
            return Err(Error::Config("'dt' and 'courant' are mutually exclusive".into()));
        }
        Ok(s)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "case" => self.case = Some(value.parse()?),
            "nx" => self.nx = Some(parse_value(key, value)?),
            "ny" => self.ny = Some(parse_value(key, value)?),
            "nz" => self.nz = Some(parse_value(key, value)?),
            "p" => self.p = Some(parse_value(key, value)?),
            "rk" => self.rk = Some(parse_value(key, value)?),
            "dt" => self.dt = Some(parse_value(key, value)?),
            "courant" => self.courant = Some(parse_value(key, value)?),
            "t_final" => {
                if self.t_final.is_some() {
                    return Err(Error::Config(
                        "'t_final' and 't_final_days' are mutually exclusive".into(),
                    ));
                }
                self.t_final = Some(parse_value(key, value)?)
            }
            "t_final_days" => {
                if self.t_final.is_some() {
                    return Err(Error::Config(
                        "'t_final' and 't_final_days' are mutually exclusive".into(),
                    ));
                }
                self.t_final = Some(parse_value::<f64>(key, value)? * DAY)
            }
            "alpha_mode" => self.alpha = Some(value.parse()?),
            "out" => self.out = Some(PathBuf::from(value)),
            "dump_every" => self.dump_every = Some(parse_value(key, value)?),
            "threads" => self.threads = Some(parse_value(key, value)?),
            _ => unreachable!("key validated against the section table"),
        }
        Ok(())
    }

    /// `self` with every value given in `over` replaced. A step size in
    /// `over` (dt or Courant) replaces both of `self`'s.
    pub fn overlay(mut self, over: &Settings) -> Settings {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f.clone(); } )* };
        }
        take!(case, nx, ny, nz, p, rk, t_final, alpha, out, dump_every, threads);
        if over.dt.is_some() || over.courant.is_some() {
            self.dt = over.dt;
            self.courant = over.courant;
        }
        self
    }

    /// Fills the gaps from the defaults of the selected case.
    pub fn resolve(&self) -> Result<Resolved> {
        let case = self
            .case
            .ok_or_else(|| Error::Config("no case given (use --case or 'case =')".into()))?;
        let mut config = CaseConfig::defaults(case);
        if let Some(v) = self.nx {
            config.nx = v;
        }
        if let Some(v) = self.ny {
            config.ny = v;
        }
        if let Some(v) = self.nz {
            config.nz = v;
        }
        if let Some(v) = self.p {
            config.p = v;
        }
        if let Some(v) = self.rk {
            config.rk = v;
        }
        match (self.dt, self.courant) {
            (Some(_), Some(_)) => return Err(Error::Config("dt and Courant number are mutually exclusive".into())),
            (Some(dt), None) => config.step = StepSize::Fixed(dt),
            (None, Some(c)) => config.step = StepSize::Courant(c),
            (None, None) => {}
        }
        if let Some(t) = self.t_final {
            config.t_final = t;
        }
        if config.nx == 0 || config.ny == 0 || config.nz == 0 {
            return Err(Error::Config("mesh sizes must be positive".into()));
        }
        if !(1..=crate::dg::MAX_P).contains(&config.p) {
            return Err(Error::Config(format!("p must be in 1..={}", crate::dg::MAX_P)));
        }
        if !(1..=4).contains(&config.rk) {
            return Err(Error::Config("rk must be in 1..=4".into()));
        }
        if !(config.t_final >= 0.0 && config.t_final.is_finite()) {
            return Err(Error::Config(format!("invalid final time {}", config.t_final)));
        }
        Ok(Resolved {
            config,
            alpha: self.alpha.unwrap_or_default(),
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("dgswe_out")),
            dump_every: self.dump_every.unwrap_or(0),
            threads: self.threads.unwrap_or(0),
        })
    }
}

/// Fully specified settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: CaseConfig,
    pub alpha: AlphaChoice,
    pub out: PathBuf,
    /// Field dump cadence in steps; `0` dumps the initial and final state only.
    pub dump_every: usize,
    /// Engine threads; `0` lets rayon decide.
    pub threads: usize,
}

impl Resolved {
    /// Flat key/value view, as written to the manifest.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let c = &self.config;
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("case", c.case.name().into());
        put("nx", c.nx.to_string());
        put("ny", c.ny.to_string());
        put("nz", c.nz.to_string());
        put("p", c.p.to_string());
        put("rk", c.rk.to_string());
        match c.step {
            StepSize::Fixed(dt) => put("dt", dt.to_string()),
            StepSize::Courant(cn) => put("courant", cn.to_string()),
        }
        put("t_final", c.t_final.to_string());
        put(
            "alpha_mode",
            match self.alpha {
                AlphaChoice::Local => "local",
                AlphaChoice::Global => "global",
            }
            .into(),
        );
        put("out", self.out.display().to_string());
        put("dump_every", self.dump_every.to_string());
        put("threads", self.threads.to_string());
        m
    }
}

/// Record of one CLI invocation, written as `manifest.json`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub artifacts: Vec<String>,
    pub wall_seconds: f64,
    pub exit_status: i32,
    pub error: Option<String>,
    pub version: String,
    pub git: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            git: option_env!("DGSWE_GIT_REV").map(str::to_string),
            ..Default::default()
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::io(&path, std::io::Error::other(e)))?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// Process exit code for an error: 2 usage, 3 divergence, 4 I/O.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Divergence { .. } | Error::Model(_) => 3,
        Error::Io { .. } => 4,
        Error::Config(_) | Error::Field(_) | Error::Basis(_) => 2,
    }
}
