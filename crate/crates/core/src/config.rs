//! Run configuration: flat key-value text with sections, every key
//! overridable from the command line as `section.key=value` (or bare
//! `key=value` when unambiguous).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Result, SolverError};
use crate::problems::{self, parse_preset};
use crate::real::Real;

/// Snapshot file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotFormat {
    /// Columnar text (1D runs).
    Text,
    /// Legacy structured-grid visualization text (2D runs).
    Vtk,
}

/// Fully parsed run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig<R> {
    pub problem: String,
    pub p: usize,
    pub counts: [usize; 2],
    pub c_mu: Option<R>,
    pub c_max: R,
    pub cfl: R,
    pub cfl_visc: R,
    pub t_end: Option<R>,
    pub gamma: Option<R>,
    pub lambda_hat: Option<R>,
    pub out_dir: PathBuf,
    pub format: Option<SnapshotFormat>,
    /// Snapshot cadence in steps; 0 writes only the final state.
    pub every: usize,
}

impl<R: Real> Default for RunConfig<R> {
    fn default() -> Self {
        RunConfig {
            problem: String::new(),
            p: 3,
            counts: [1, 1],
            c_mu: None,
            c_max: R::of(100.0),
            cfl: R::of(0.4),
            cfl_visc: R::of(0.2),
            t_end: None,
            gamma: None,
            lambda_hat: None,
            out_dir: PathBuf::from("out"),
            format: None,
            every: 0,
        }
    }
}

/// Known keys, qualified by section.
const KEYS: &[&str] = &[
    "problem.id",
    "problem.t_end",
    "problem.gamma",
    "problem.lambda_hat",
    "discretization.p",
    "discretization.nx",
    "discretization.ny",
    "discretization.cfl",
    "discretization.cfl_visc",
    "trvisc.c_mu",
    "trvisc.c_max",
    "output.dir",
    "output.format",
    "output.every",
];

fn resolve_key(raw: &str) -> Result<&'static str> {
    if let Some(full) = KEYS.iter().find(|k| **k == raw) {
        return Ok(full);
    }
    let matches: Vec<&&str> = KEYS
        .iter()
        .filter(|k| k.rsplit_once('.').map(|(_, tail)| tail) == Some(raw))
        .collect();
    match matches.as_slice() {
        [one] => Ok(**one),
        [] => Err(SolverError::Config(format!("unknown config key '{raw}'"))),
        _ => Err(SolverError::Config(format!(
            "ambiguous config key '{raw}'; qualify it with a section"
        ))),
    }
}

/// Key-value map with qualified keys, parsed from sectioned text.
pub fn parse_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            SolverError::Config(format!("line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim();
        let qualified = if section.is_empty() || key.contains('.') {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        let canonical = resolve_key(&qualified)?;
        out.insert(canonical.to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    let signed: i64 = v
        .parse()
        .map_err(|_| SolverError::Config(format!("{key}: '{v}' is not an integer")))?;
    usize::try_from(signed)
        .map_err(|_| SolverError::Config(format!("{key}: must be nonnegative, got {v}")))
}

fn parse_real<R: Real>(key: &str, v: &str) -> Result<R> {
    let x: f64 = v
        .parse()
        .map_err(|_| SolverError::Config(format!("{key}: '{v}' is not a number")))?;
    Ok(R::of(x))
}

impl<R: Real> RunConfig<R> {
    /// Apply one qualified key-value pair.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let key = resolve_key(key)?;
        match key {
            "problem.id" => self.problem = value.to_string(),
            "problem.t_end" => self.t_end = Some(parse_real(key, value)?),
            "problem.gamma" => self.gamma = Some(parse_real(key, value)?),
            "problem.lambda_hat" => self.lambda_hat = Some(parse_real(key, value)?),
            "discretization.p" => self.p = parse_usize(key, value)?,
            "discretization.nx" => self.counts[0] = parse_usize(key, value)?,
            "discretization.ny" => self.counts[1] = parse_usize(key, value)?,
            "discretization.cfl" => self.cfl = parse_real(key, value)?,
            "discretization.cfl_visc" => self.cfl_visc = parse_real(key, value)?,
            "trvisc.c_mu" => self.c_mu = Some(parse_real(key, value)?),
            "trvisc.c_max" => self.c_max = parse_real(key, value)?,
            "output.dir" => self.out_dir = PathBuf::from(value),
            "output.format" => {
                self.format = Some(match value {
                    "text" => SnapshotFormat::Text,
                    "vtk" => SnapshotFormat::Vtk,
                    other => {
                        return Err(SolverError::Config(format!(
                            "output.format: expected text|vtk, got '{other}'"
                        )))
                    }
                })
            }
            "output.every" => self.every = parse_usize(key, value)?,
            _ => unreachable!("resolve_key covers all keys"),
        }
        Ok(())
    }

    /// Load from a config file or a `<problem>-p<P>-n<N>` preset name, then
    /// apply `key=value` overrides in order.
    pub fn load(source: &str, overrides: &[String]) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let path = Path::new(source);
        if path.is_file() {
            let text = std::fs::read_to_string(path)?;
            for (k, v) in parse_text(&text)? {
                cfg.apply(&k, &v)?;
            }
        } else if let Some((problem, p, n)) = parse_preset(source) {
            problems::by_id::<R>(&problem, None)?;
            cfg.problem = problem;
            cfg.p = p;
            cfg.counts = [n, n];
        } else {
            return Err(SolverError::Config(format!(
                "'{source}' is neither a config file nor a preset name"
            )));
        }
        for item in overrides {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                SolverError::Config(format!("override '{item}' is not key=value"))
            })?;
            cfg.apply(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.problem.is_empty() {
            return Err(SolverError::Config("problem.id is required".into()));
        }
        problems::by_id::<R>(&self.problem, self.gamma)?;
        if self.counts[0] < 1 || self.counts[1] < 1 {
            return Err(SolverError::Config("mesh counts must be >= 1".into()));
        }
        if let Some(c_mu) = self.c_mu {
            if !(c_mu > R::zero()) {
                return Err(SolverError::Config("c_mu must be positive".into()));
            }
        }
        if !(self.c_max > R::zero()) {
            return Err(SolverError::Config("c_max must be positive".into()));
        }
        if !(self.cfl > R::zero()) || !(self.cfl_visc > R::zero()) {
            return Err(SolverError::Config("CFL numbers must be positive".into()));
        }
        if let Some(t) = self.t_end {
            if !(t > R::zero()) {
                return Err(SolverError::Config("t_end must be positive".into()));
            }
        }
        if let Some(l) = self.lambda_hat {
            if !(l > R::zero()) {
                return Err(SolverError::Config("lambda_hat must be positive".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# sample run
[problem]
id = sod
t_end = 0.2
[discretization]
p = 3
nx = 50
[trvisc]
c_mu = 5
[output]
dir = /tmp/sodrun
format = text
";

    #[test]
    fn parses_sections_and_comments() {
        let map = parse_text(SAMPLE).unwrap();
        assert_eq!(map["problem.id"], "sod");
        assert_eq!(map["discretization.p"], "3");
        assert_eq!(map["trvisc.c_mu"], "5");
    }

    #[test]
    fn load_with_overrides() {
        let dir = std::env::temp_dir().join("fr_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sod.cfg");
        std::fs::write(&path, SAMPLE).unwrap();
        let cfg = RunConfig::<f64>::load(
            path.to_str().unwrap(),
            &["c_mu=2.5".to_string(), "discretization.nx=20".to_string()],
        )
        .unwrap();
        assert_eq!(cfg.problem, "sod");
        assert_eq!(cfg.counts[0], 20);
        assert_eq!(cfg.c_mu, Some(2.5));
    }

    #[test]
    fn preset_load() {
        let cfg = RunConfig::<f64>::load("sod-p3-n50", &[]).unwrap();
        assert_eq!(cfg.problem, "sod");
        assert_eq!(cfg.p, 3);
        assert_eq!(cfg.counts, [50, 50]);
    }

    #[test]
    fn negative_p_is_a_config_error() {
        let mut cfg = RunConfig::<f64>::default();
        cfg.problem = "sod".into();
        assert!(cfg.apply("discretization.p", "-1").is_err());
    }

    #[test]
    fn bad_keys_and_values_rejected() {
        let mut cfg = RunConfig::<f64>::default();
        assert!(cfg.apply("nonsense.key", "1").is_err());
        assert!(cfg.apply("output.format", "hdf5").is_err());
        let err = RunConfig::<f64>::load("no-such-preset", &[]);
        assert!(err.is_err());
    }

    #[test]
    fn bare_keys_must_be_unambiguous() {
        let mut cfg = RunConfig::<f64>::default();
        cfg.problem = "sod".into();
        cfg.apply("p", "4").unwrap();
        assert_eq!(cfg.p, 4);
        cfg.apply("c_mu", "3").unwrap();
        assert_eq!(cfg.c_mu, Some(3.0));
    }

    #[test]
    fn validation_catches_bad_configs() {
        let mut cfg = RunConfig::<f64>::default();
        cfg.problem = "unknown".into();
        assert!(cfg.validate().is_err());
        cfg.problem = "sod".into();
        cfg.counts = [0, 1];
        assert!(cfg.validate().is_err());
        cfg.counts = [10, 1];
        cfg.c_mu = Some(-1.0);
        assert!(cfg.validate().is_err());
    }
}
