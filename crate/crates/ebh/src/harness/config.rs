// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::matfun::FunctionSpec;
use crate::operators::{gallery, FactorizedOperator, GallerySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Matfun,
    Shifted,
    Curves,
    Flops,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Matfun => "matfun",
            Self::Shifted => "shifted",
            Self::Curves => "curves",
            Self::Flops => "flops",
        }
    }
}

/// Uniformly spaced shifts `lo, …, hi` (`count` values, both ends included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl ShiftRange {
    /// Parse `lo:hi:count`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::BadConfig(format!("shifts must be lo:hi:count, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(Self {
            lo: parts[0].trim().parse().map_err(|_| bad())?,
            hi: parts[1].trim().parse().map_err(|_| bad())?,
            count: parts[2].trim().parse().map_err(|_| bad())?,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.lo],
            k => (0..k)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (k - 1) as f64)
                .collect(),
        }
    }
}

impl fmt::Display for ShiftRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
    }
}

/// Everything a run needs. Values come from defaults, then an optional
/// `key=value` file, then command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub gallery: String,
    pub input: Option<PathBuf>,
    pub n: usize,
    /// Grid points per side for the convection–diffusion operators.
    pub grid: usize,
    pub p: usize,
    pub m: Vec<usize>,
    pub funcs: Vec<String>,
    pub methods: Vec<String>,
    pub shifts: ShiftRange,
    pub eps: f64,
    pub max_restarts: usize,
    pub seed: u64,
    pub repeat: usize,
    pub audit: usize,
    pub errors: bool,
    pub nnz: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        let (gallery, m) = match command {
            Command::Shifted => ("convdiff_l1", vec![10]),
            _ => ("toeplitz", vec![10, 15]),
        };
        Self {
            command,
            gallery: gallery.into(),
            input: None,
            n: 2000,
            grid: 50,
            p: 5,
            m,
            funcs: FunctionSpec::standard_set().iter().map(|f| f.name().to_string()).collect(),
            methods: vec!["EBH".into(), "EBA".into()],
            shifts: ShiftRange {
                lo: 0.0,
                hi: 5.0,
                count: 500,
            },
            eps: 2e-8,
            max_restarts: 50,
            seed: 7,
            repeat: 10,
            audit: 10,
            errors: true,
            nnz: None,
            out: None,
        }
    }

    /// Set one option by name. Names match the long command-line flags.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::BadConfig(format!("{key}: expected {what}, got '{value}'"));
        let uint = |v: &str| v.trim().parse::<usize>().map_err(|_| bad("a non-negative integer"));
        let list = |v: &str| -> Vec<String> {
            v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
        };
        match key.trim().replace('-', "_").as_str() {
            "gallery" => self.gallery = value.trim().to_string(),
            "input" => self.input = Some(PathBuf::from(value.trim())),
            "n" => self.n = uint(value)?,
            "grid" => self.grid = uint(value)?,
            "p" => self.p = uint(value)?,
            "m" => self.m = list(value).iter().map(|s| uint(s)).collect::<Result<_>>()?,
            "funcs" => self.funcs = list(value),
            "methods" => self.methods = list(value).into_iter().map(|s| s.to_ascii_uppercase()).collect(),
            "shifts" => self.shifts = ShiftRange::parse(value)?,
            "eps" => self.eps = value.trim().parse().map_err(|_| bad("a number"))?,
            "max_restarts" => self.max_restarts = uint(value)?,
            "seed" => self.seed = value.trim().parse().map_err(|_| bad("an unsigned integer"))?,
            "repeat" => self.repeat = uint(value)?,
            "audit" => self.audit = uint(value)?,
            "errors" => self.errors = value.trim().parse().map_err(|_| bad("true or false"))?,
            "nnz" => self.nnz = Some(uint(value)?),
            "out" => self.out = Some(PathBuf::from(value.trim())),
            _ => return Err(Error::BadConfig(format!("unknown option '{key}'"))),
        }
        Ok(())
    }

    /// Apply a `key=value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)?;
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: no + 1,
                message: "expected key=value".into(),
            })?;
            self.apply(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeat == 0 {
            return Err(Error::BadConfig("repeat must be at least 1".into()));
        }
        if self.p == 0 {
            return Err(Error::BadConfig("p must be at least 1".into()));
        }
        if self.m.is_empty() || self.m.contains(&0) {
            return Err(Error::BadConfig("m must be a non-empty list of positive integers".into()));
        }
        for f in &self.funcs {
            FunctionSpec::from_name(f)?;
        }
        for method in &self.methods {
            if method != "EBH" && method != "EBA" {
                return Err(Error::BadConfig(format!("unknown method '{method}'")));
            }
        }
        Ok(())
    }

    pub fn function_specs(&self) -> Result<Vec<FunctionSpec>> {
        self.funcs.iter().map(|f| FunctionSpec::from_name(f)).collect()
    }

    /// The operator named by `input` or `gallery`.
    pub fn operator(&self) -> Result<FactorizedOperator> {
        let spec = match &self.input {
            Some(path) => GallerySpec::MatrixMarket { path: path.clone() },
            None => {
                let lower = self.gallery.to_ascii_lowercase();
                let size = if lower.starts_with("convdiff") || lower == "l1" || lower == "l2" {
                    self.grid
                } else {
                    self.n
                };
                GallerySpec::from_name(&self.gallery, size, None)?
            }
        };
        gallery(&spec)
    }

    /// One-line echo for output headers.
    pub fn echo(&self) -> String {
        let source = match &self.input {
            Some(p) => format!("input={}", p.display()),
            None => format!("gallery={} n={} grid={}", self.gallery, self.n, self.grid),
        };
        let m: Vec<String> = self.m.iter().map(|m| m.to_string()).collect();
        format!(
            "command={} {} p={} m={} funcs={} methods={} shifts={} eps={:e} max_restarts={} repeat={} audit={} errors={}",
            self.command.name(),
            source,
            self.p,
            m.join(","),
            self.funcs.join(","),
            self.methods.join(","),
            self.shifts,
            self.eps,
            self.max_restarts,
            self.repeat,
            self.audit,
            self.errors
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_range_parsing() {
        let r = ShiftRange::parse("0:5:6").unwrap();
        assert_eq!(r.values(), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(ShiftRange::parse("1:2:1").unwrap().values(), vec![1.0]);
        assert!(ShiftRange::parse("0:5").is_err());
    }

    #[test]
    fn file_then_flags() {
        let dir = std::env::temp_dir().join(format!("ebh-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        fs::write(&path, "# rotation run\ngallery = rot2\nn=5000\nm=10,15\nseed=3\n").unwrap();
        let mut cfg = RunConfig::new(Command::Matfun);
        cfg.apply_file(&path).unwrap();
        cfg.apply("seed", "11").unwrap();
        assert_eq!(cfg.gallery, "rot2");
        assert_eq!(cfg.n, 5000);
        assert_eq!(cfg.m, vec![10, 15]);
        assert_eq!(cfg.seed, 11);
        fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut cfg = RunConfig::new(Command::Matfun);
        assert!(cfg.apply("colour", "red").is_err());
        assert!(cfg.apply("p", "five").is_err());
        cfg.apply("funcs", "exp,tanh").unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::new(Command::Matfun);
        cfg.apply("repeat", "0").unwrap();
        assert!(cfg.validate().is_err());
    }
}
