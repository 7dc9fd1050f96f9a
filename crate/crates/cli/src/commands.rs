use laguerre_core::hermitian::HermitianMatrix;
use laguerre_core::laws::{self, HwDensity, QuadratureSpec};
use laguerre_core::mc::McRun;
use laguerre_core::process::{self, PathSeed};
use laguerre_core::specfun::{gross_richards, ScalarHypParams};
use laguerre_core::symfun::{hyp_matrix_series, SeriesOptions};
use serde_json::{json, Value};

use crate::config::{CommonArgs, RunConfig};
use crate::output::{csv, Sink};
use crate::suite::{self, MIN_POWERED_PATHS};
use crate::{CliError, Law, Scheme};

fn metadata(command: &str, cfg: &RunConfig, extra: Value) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "details": extra,
    })
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn simulate(args: &CommonArgs, scheme: Scheme) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args, true)?;
    let model = cfg.model()?;
    let paths = cfg.paths.unwrap_or(1);
    let sink = Sink::new(cfg.out.clone())?;
    if sink.to_stdout() && paths > 1 {
        return Err(usage("more than one path needs --out"));
    }
    let seeds: Vec<PathSeed> = (0..paths as u64).map(|i| PathSeed::new(cfg.seed, i)).collect();
    let mut files = Vec::with_capacity(paths);
    for (i, seed) in seeds.iter().enumerate() {
        let mut buf = Vec::new();
        match scheme {
            Scheme::Eigen => process::simulate_eigen(&model, cfg.dt, cfg.t, *seed)?.write_csv(&mut buf)?,
            Scheme::Matrix => process::simulate_matrix(&model, cfg.dt, cfg.t, *seed)?.write_csv(&mut buf)?,
        }
        let name = format!("path_{i:05}.csv");
        sink.data(&name, std::str::from_utf8(&buf).expect("CSV is ASCII"))?;
        files.push(name);
    }
    let kind = match scheme {
        Scheme::Eigen => "eigen",
        Scheme::Matrix => "matrix",
    };
    let mut extra = process::path_metadata(&model, cfg.dt, cfg.t, &seeds, kind);
    extra["files"] = json!(files);
    sink.metadata("metadata.json", &metadata("simulate", &cfg, extra))
}

fn pairs(points: &[f64], strict: bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &a in points {
        for &b in points {
            if a > b || (!strict && a == b) {
                out.push((a, b));
            }
        }
    }
    out
}

fn spectrum_pair(cfg: &RunConfig, what: &str) -> Result<(f64, f64), CliError> {
    let x = cfg.spectrum()?;
    if x.len() != 2 {
        return Err(CliError::Config(format!("x0: {what} is implemented for m = 2")));
    }
    Ok((x[0], x[1]))
}

/// Index of `δ = m - ν` for the hitting-time laws, from `ν = δ - m`.
fn hitting_index(cfg: &RunConfig) -> Result<f64, CliError> {
    let nu = -cfg.nu;
    if !(nu > 0.0 && nu < 1.0) {
        return Err(CliError::Config(format!("delta: the T0 laws need m - 1 < delta < m, got delta = {}", cfg.delta)));
    }
    Ok(nu)
}

pub fn law(args: &CommonArgs, which: Law, u: Option<&[f64]>, lambda: Option<&[f64]>) -> Result<(), CliError> {
    let needs_model = !matches!(which, Law::Hw);
    let cfg = RunConfig::resolve(args, needs_model)?;
    let grid = cfg.grid_points()?;
    let tol = cfg.tol.unwrap_or(1e-10);
    let name = serde_json::to_value(which).expect("law names serialize").as_str().unwrap_or("law").to_string();
    let mut extra = json!({ "law": name });
    let (header, rows): (Vec<&str>, Vec<Vec<f64>>) = match which {
        Law::Laplace => {
            let model = cfg.model()?;
            let u = u.ok_or_else(|| usage("laplace needs --u"))?;
            if u.len() != cfg.m {
                return Err(CliError::Config(format!("u: expected {} values, got {}", cfg.m, u.len())));
            }
            let um = HermitianMatrix::from_diag(u);
            let rows = grid.iter().map(|&t| Ok(vec![t, laws::laplace_transform(&model, t, &um)?])).collect::<Result<_, CliError>>()?;
            extra["u"] = json!(u);
            (vec!["t", "laplace"], rows)
        }
        Law::Density | Law::Qt => {
            let model = cfg.model()?;
            let flat = which == Law::Density;
            extra["measure"] = json!(if flat {
                "flat Hermitian measure, evaluated at diagonal matrices"
            } else {
                "Lebesgue measure on ordered eigenvalues"
            });
            let eval = |y: &[f64]| -> Result<f64, CliError> {
                Ok(if flat {
                    laws::transition_density(&model, cfg.t, &HermitianMatrix::from_diag(y))?
                } else {
                    laws::eigen_semigroup(&model, cfg.t, y)?
                })
            };
            match cfg.m {
                1 => (vec!["v", "f_v"], grid.iter().map(|&v| Ok(vec![v, eval(&[v])?])).collect::<Result<_, CliError>>()?),
                2 => {
                    let rows = pairs(&grid, !flat).into_iter().map(|(a, b)| Ok(vec![a, b, eval(&[a, b])?])).collect::<Result<_, CliError>>()?;
                    (vec!["y1", "y2", "f"], rows)
                }
                m => return Err(CliError::Config(format!("m: density grids are tabulated for m <= 2, got {m}"))),
            }
        }
        Law::Hw => {
            let l = lambda.ok_or_else(|| usage("hw needs --lambda"))?;
            let (l1, l2) = match l {
                [a] => (*a, *a),
                [a, b] => (*a, *b),
                _ => return Err(CliError::Config("lambda: give one or two values".into())),
            };
            let spec = QuadratureSpec { rel_tol: cfg.tol.unwrap_or(QuadratureSpec::default().rel_tol), ..Default::default() };
            let hw = HwDensity::new(l1, l2, spec)?;
            let mut rows = Vec::new();
            let mut stats = Vec::new();
            for &v in &grid {
                let r = hw.density(v)?;
                rows.push(vec![v, r.value]);
                stats.push(json!({ "v": v, "diagonal_cells": r.diagonal_cells, "axis_cells": r.axis_cells, "y_max": r.y_max }));
            }
            extra["lambda"] = json!([l1, l2]);
            extra["equal_branch"] = json!(hw.is_equal());
            extra["denominator"] = json!(hw.denominator());
            extra["quadrature"] = json!(spec);
            extra["cells"] = json!(stats);
            (vec!["v", "f_v"], rows)
        }
        Law::T0 => {
            let nu = hitting_index(&cfg)?;
            let x = cfg.spectrum()?;
            let rows = grid.iter().map(|&t| Ok(vec![t, laws::t0_tail(nu, &x, t)?])).collect::<Result<_, CliError>>()?;
            (vec!["t", "tail"], rows)
        }
        Law::S0 => {
            let nu = hitting_index(&cfg)?;
            let (l1, l2) = spectrum_pair(&cfg, "the S0 density")?;
            let rows = grid.iter().map(|&u| Ok(vec![u, laws::s0_density(nu, l1, l2, u)?])).collect::<Result<_, CliError>>()?;
            (vec!["u", "f_u"], rows)
        }
        Law::Detmoment => {
            let model = cfg.model()?;
            let rows = grid.iter().map(|&s| Ok(vec![s, laws::det_moment(&model, cfg.t, s)?])).collect::<Result<_, CliError>>()?;
            (vec!["s", "moment"], rows)
        }
    };
    extra["tol"] = json!(tol);
    let sink = Sink::new(cfg.out.clone())?;
    sink.data(&format!("{name}.csv"), &csv(&header, &rows))?;
    sink.metadata(&format!("{name}.json"), &metadata("law", &cfg, extra))
}

pub fn verify(args: &CommonArgs, names: &[String]) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args, false)?;
    let checks: Vec<&suite::Check> = if names.is_empty() {
        suite::CHECKS.iter().collect()
    } else {
        names.iter().map(|n| suite::find(n).ok_or_else(|| usage(format!("unknown check `{n}`; see `verify --list`")))).collect::<Result<_, _>>()?
    };
    let sink = Sink::new(cfg.out.clone())?;
    let mut all = Vec::new();
    let mut runs = Vec::new();
    for c in checks {
        let run = McRun::new(args.paths.unwrap_or(c.paths), args.seed.unwrap_or(c.seed), args.dt.unwrap_or(c.dt))?;
        if run.paths < MIN_POWERED_PATHS {
            eprintln!("warning: {} with {} paths is underpowered (fewer than {MIN_POWERED_PATHS})", c.name, run.paths);
        }
        let outcome = c.run(&run)?;
        for r in &outcome.reports {
            eprintln!("{} {}: z = {:+.2}", if r.pass { "PASS" } else if r.gating { "FAIL" } else { "MISS" }, r.name, r.z);
        }
        if let Some(d) = &outcome.density {
            let mut buf = Vec::new();
            d.write_csv(&mut buf)?;
            if !sink.to_stdout() {
                sink.data(&format!("{}_bins.csv", c.name), std::str::from_utf8(&buf).expect("CSV is ASCII"))?;
            }
        }
        runs.push(json!({ "check": c.name, "run": run }));
        all.extend(outcome.reports);
    }
    let mut text = serde_json::to_string_pretty(&all).expect("reports serialize");
    text.push('\n');
    sink.data("report.json", &text)?;
    sink.metadata("metadata.json", &metadata("verify", &cfg, json!({ "runs": runs })))?;
    let failed: Vec<&str> = all.iter().filter(|r| r.gating && !r.pass).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

pub fn hypergeom(args: &CommonArgs, a: &[f64], b: &[f64]) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args, false)?;
    if args.x0.is_none() {
        return Err(usage("hypergeom needs the argument spectrum as --x0"));
    }
    let x = cfg.x0_matrix()?.eigenvalues();
    let tol = cfg.tol.unwrap_or(1e-14);
    let series = hyp_matrix_series(a, b, &x, SeriesOptions { tol, ..Default::default() });
    let det = gross_richards(&ScalarHypParams::new(a.to_vec(), b.to_vec())?, &x, tol);
    let mut out = json!({ "a": a, "b": b, "x": x, "tol": tol });
    match &series {
        Ok(s) => out["series"] = json!({ "value": s.value, "tail": s.tail, "weight": s.weight, "converged": s.converged }),
        Err(e) => out["series"] = json!({ "error": e.to_string() }),
    }
    match &det {
        Ok(d) => out["determinant"] = json!({ "value": d.value, "jittered": d.jittered }),
        Err(e) => out["determinant"] = json!({ "error": e.to_string() }),
    }
    if let (Ok(s), Ok(d)) = (&series, &det) {
        out["relative_difference"] = json!((s.value - d.value).abs() / d.value.abs().max(f64::MIN_POSITIVE));
    }
    let sink = Sink::new(cfg.out.clone())?;
    let mut text = serde_json::to_string_pretty(&out).expect("values serialize");
    text.push('\n');
    sink.data("hypergeom.json", &text)?;
    sink.metadata("metadata.json", &metadata("hypergeom", &cfg, Value::Null))?;
    match (series, det) {
        (Err(e), Err(_)) => Err(e.into()),
        _ => Ok(()),
    }
}
