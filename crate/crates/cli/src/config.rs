use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use laguerre_core::hermitian::HermitianMatrix;
use laguerre_core::process::LaguerreModel;
use serde::Serialize;

use crate::CliError;

/// Flags shared by every subcommand. Any of them may also come from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Matrix size
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Dimension parameter
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Index, delta - m
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub nu: Option<f64>,
    /// Initial state: m eigenvalues, or m*m real symmetric entries row by row
    #[arg(long, global = true, value_delimiter = ',')]
    pub x0: Option<Vec<f64>>,
    /// Time horizon
    #[arg(long, global = true)]
    pub t: Option<f64>,
    /// Time step (default 1e-4 * t)
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Number of paths
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Master seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid: `a:b:n`, `log:a:b:n` or a comma list
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Tolerance for series and quadrature
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output directory; stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Plain-text `key = value` file of defaults
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

pub const KEYS: [&str; 12] = ["m", "delta", "nu", "x0", "t", "dt", "paths", "seed", "grid", "tol", "out", "threads"];

/// Points at which a law is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Grid {
    Linear { from: f64, to: f64, n: usize },
    Log { from: f64, to: f64, n: usize },
    List { points: Vec<f64> },
}

impl Grid {
    pub fn parse(s: &str) -> Result<Self, String> {
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("bad number `{p}` in grid `{s}`"));
        let count = |p: &str| p.trim().parse::<usize>().map_err(|_| format!("bad point count `{p}` in grid `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            ["log", a, b, n] => Grid::Log { from: num(a)?, to: num(b)?, n: count(n)? },
            [a, b, n] => Grid::Linear { from: num(a)?, to: num(b)?, n: count(n)? },
            [list] => Grid::List { points: list.split(',').map(num).collect::<Result<_, _>>()? },
            _ => return Err(format!("unrecognised grid `{s}`")),
        };
        match &grid {
            Grid::Linear { n, .. } | Grid::Log { n, .. } if *n == 0 => Err("grid needs at least one point".into()),
            Grid::Log { from, to, .. } if !(*from > 0.0 && *to > 0.0) => Err("log grid needs positive ends".into()),
            Grid::List { points } if points.iter().any(|p| !p.is_finite()) => Err("grid points must be finite".into()),
            _ => Ok(grid),
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let lerp = |a: f64, b: f64, n: usize, i: usize| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 };
        match self {
            Grid::Linear { from, to, n } => (0..*n).map(|i| lerp(*from, *to, *n, i)).collect(),
            Grid::Log { from, to, n } => (0..*n).map(|i| lerp(from.ln(), to.ln(), *n, i).exp()).collect(),
            Grid::List { points } => points.clone(),
        }
    }
}

/// Validated settings of one run. Serialized into every metadata record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub m: usize,
    pub delta: f64,
    pub nu: f64,
    /// Row-major real entries of the initial state.
    pub x0: Vec<f64>,
    pub t: f64,
    pub dt: f64,
    pub paths: Option<usize>,
    pub seed: u64,
    pub grid: Option<Grid>,
    pub tol: Option<f64>,
    /// Where files go does not affect them, so it stays out of the record.
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn config_error(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

/// Reads `key = value` lines; `#` starts a comment. Keys are the long flag names.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config_text(&text, &path.display().to_string())
}

pub fn parse_config_text(text: &str, origin: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("{origin}:{lineno}: expected `key = value`")));
        };
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("{origin}:{lineno}: unknown key `{}`", k.trim())));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("{origin}:{lineno}: `{key}` set twice")));
        }
    }
    Ok(map)
}

/// Fills every flag left unset from the config file.
pub fn merge(mut args: CommonArgs, file: &BTreeMap<String, String>) -> Result<CommonArgs, CliError> {
    fn take<T: std::str::FromStr>(file: &BTreeMap<String, String>, key: &str, slot: &mut Option<T>) -> Result<(), CliError> {
        if slot.is_none() {
            if let Some(v) = file.get(key) {
                *slot = Some(v.parse().map_err(|_| config_error(key, format!("cannot parse `{v}`")))?);
            }
        }
        Ok(())
    }
    take(file, "m", &mut args.m)?;
    take(file, "delta", &mut args.delta)?;
    take(file, "nu", &mut args.nu)?;
    take(file, "t", &mut args.t)?;
    take(file, "dt", &mut args.dt)?;
    take(file, "paths", &mut args.paths)?;
    take(file, "seed", &mut args.seed)?;
    take(file, "grid", &mut args.grid)?;
    take(file, "tol", &mut args.tol)?;
    take(file, "out", &mut args.out)?;
    take(file, "threads", &mut args.threads)?;
    if args.x0.is_none() {
        if let Some(v) = file.get("x0") {
            let xs = v.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>();
            args.x0 = Some(xs.map_err(|_| config_error("x0", format!("cannot parse `{v}`")))?);
        }
    }
    Ok(args)
}

impl RunConfig {
    /// Checks the flags for consistency before any computation.
    /// `needs_model` is false for commands that ignore the model parameters.
    pub fn resolve(args: &CommonArgs, needs_model: bool) -> Result<Self, CliError> {
        let (m, x0) = match (&args.x0, args.m) {
            (Some(x), m) => {
                let n = m.unwrap_or(x.len());
                if x.len() == n {
                    let mut full = vec![0.0; n * n];
                    for (i, v) in x.iter().enumerate() {
                        full[i * n + i] = *v;
                    }
                    (n, full)
                } else if x.len() == n * n {
                    (n, x.clone())
                } else {
                    return Err(config_error("x0", format!("{} values fit neither {n} eigenvalues nor a {n}x{n} matrix", x.len())));
                }
            }
            (None, Some(n)) => {
                let mut full = vec![0.0; n * n];
                (0..n).for_each(|i| full[i * n + i] = 1.0);
                (n, full)
            }
            (None, None) if needs_model => return Err(config_error("x0", "give --x0 or --m")),
            (None, None) => (1, vec![1.0]),
        };
        if m == 0 {
            return Err(config_error("m", "must be at least 1"));
        }
        let mf = m as f64;
        let delta = match (args.delta, args.nu) {
            (Some(d), Some(nu)) if (nu - (d - mf)).abs() > 1e-12 * d.abs().max(1.0) => {
                return Err(config_error("nu", format!("{nu} is not delta - m = {}", d - mf)));
            }
            (Some(d), _) => d,
            (None, Some(nu)) => nu + mf,
            (None, None) if needs_model => return Err(config_error("delta", "give --delta or --nu")),
            (None, None) => mf,
        };
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(config_error("delta", format!("must be finite and >= 0, got {delta}")));
        }
        let t = args.t.unwrap_or(1.0);
        if !(t > 0.0 && t.is_finite()) {
            return Err(config_error("t", format!("must be positive, got {t}")));
        }
        let dt = args.dt.unwrap_or(1e-4 * t);
        if !(dt > 0.0 && dt <= t) {
            return Err(config_error("dt", format!("must lie in (0, t], got {dt}")));
        }
        if args.paths == Some(0) {
            return Err(config_error("paths", "must be at least 1"));
        }
        if let Some(tol) = args.tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(config_error("tol", format!("must lie in (0, 1), got {tol}")));
            }
        }
        if args.threads == Some(0) {
            return Err(config_error("threads", "must be at least 1"));
        }
        let grid = args.grid.as_deref().map(Grid::parse).transpose().map_err(|e| config_error("grid", e))?;
        let cfg = Self {
            m,
            delta,
            nu: delta - mf,
            x0,
            t,
            dt,
            paths: args.paths,
            seed: args.seed.unwrap_or(1),
            grid,
            tol: args.tol,
            out: args.out.clone(),
            threads: args.threads,
        };
        if needs_model {
            cfg.model()?;
        }
        Ok(cfg)
    }

    pub fn x0_matrix(&self) -> Result<HermitianMatrix, CliError> {
        HermitianMatrix::from_real(self.m, &self.x0).map_err(|e| config_error("x0", e))
    }

    pub fn model(&self) -> Result<LaguerreModel, CliError> {
        LaguerreModel::new(self.delta, self.x0_matrix()?).map_err(|e| config_error("model", e))
    }

    /// Eigenvalues of the initial state, largest first.
    pub fn spectrum(&self) -> Result<Vec<f64>, CliError> {
        Ok(self.model()?.spectrum())
    }

    pub fn grid_points(&self) -> Result<Vec<f64>, CliError> {
        self.grid.as_ref().map(Grid::points).ok_or_else(|| config_error("grid", "this command needs --grid"))
    }
}
