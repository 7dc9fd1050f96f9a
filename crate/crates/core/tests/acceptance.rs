//! End-to-end acceptance checks. Each prints one PASS/FAIL line; the test
//! fails if any gating check fails.

use std::io::Write;
use std::time::Instant;

use laguerre_core::hermitian::HermitianMatrix;
use laguerre_core::laws::{self, QuadratureSpec};
use laguerre_core::mc::{self, McRun};
use laguerre_core::numeric::gamma_lr;
use laguerre_core::process::{self, LaguerreModel, PathSeed};
use laguerre_core::specfun::{bessel_i, gross_richards, ScalarHypParams};
use laguerre_core::symfun::{enumerate_partitions, hyp_matrix_series, zonal, SeriesOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: u32,
    gating: bool,
    pass: bool,
}

fn report(id: u32, title: &str, pass: bool, detail: String, start: Instant, budget_s: f64) -> Outcome {
    let secs = start.elapsed().as_secs_f64();
    let status = if pass { "PASS" } else { "FAIL" };
    // Straight to the handle so the line survives test output capture.
    let line = format!("{status} [{id:>2}] {title}: {detail} ({secs:.1}s, budget {budget_s}s)\n");
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    Outcome { id, gating: true, pass }
}

fn spectrum(rng: &mut ChaCha8Rng, m: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..m).map(|_| rng.random_range(lo..hi)).collect();
    x.sort_by(|a, b| b.total_cmp(a));
    x
}

fn series_vs_determinant() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let opts = SeriesOptions { tol: 1e-15, max_weight: 60 };
    let cases: [(&[f64], &[f64]); 2] = [(&[], &[2.7]), (&[0.7], &[3.2])];
    let mut worst: f64 = 0.0;
    for m in [2, 3] {
        for _ in 0..50 {
            let x = spectrum(&mut rng, m, 0.0, 0.8);
            for (a, b) in cases {
                let s = hyp_matrix_series(a, b, &x, opts).unwrap().value;
                let p = ScalarHypParams::new(a.to_vec(), b.to_vec()).unwrap();
                let d = gross_richards(&p, &x, 1e-15).unwrap().value;
                worst = worst.max((s - d).abs() / s.abs());
            }
        }
    }
    report(1, "series vs determinant, 0F1 and 1F1, m in {2,3}", worst < 1e-8, format!("max rel dev {worst:.2e} < 1e-8"), start, 30.0)
}

fn zonal_completeness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst: f64 = 0.0;
    for m in 1..=3 {
        for _ in 0..20 {
            let x = spectrum(&mut rng, m, 0.0, 2.0);
            let tr: f64 = x.iter().sum();
            for k in 0..=6u32 {
                let s: f64 = enumerate_partitions(k, m).iter().map(|t| zonal(t, &x).unwrap()).sum();
                worst = worst.max((s - tr.powi(k as i32)).abs() / tr.powi(k as i32));
            }
        }
    }
    report(2, "zonal completeness k <= 6, m <= 3", worst < 1e-10, format!("max rel err {worst:.2e} < 1e-10"), start, 5.0)
}

fn laplace_mc() -> Outcome {
    let start = Instant::now();
    let model = LaguerreModel::new(2.5, HermitianMatrix::from_diag(&[1.0, 2.0])).unwrap();
    let u = HermitianMatrix::from_diag(&[0.3, 0.1]);
    let r = mc::check_laplace(&model, 1.0, &u, &McRun::new(100_000, 20_240_003, 1e-3).unwrap()).unwrap();
    let detail = format!("estimate {:.6} ± {:.1e} vs {:.6}, z = {:+.2}", r.estimate, r.se, r.reference, r.z);
    report(3, "Laplace transform MC, 1e5 paths", r.z.abs() <= 3.0, detail, start, 120.0)
}

fn chamber_normalization() -> Outcome {
    let start = Instant::now();
    let mass = laws::chamber_integral_m2(2.5, 1.0, &[2.0, 1.0], 200.0, 1e-9, |_, _| 1.0).unwrap();
    let dev = (mass - 1.0).abs();
    report(4, "eigenvalue density normalization", dev < 1e-4, format!("mass {mass:.10}, |dev| {dev:.1e} < 1e-4"), start, 60.0)
}

fn hartman_watson() -> Outcome {
    let start = Instant::now();
    let nus = [0.0, 0.25, 0.5, 1.0];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (l1, l2) in [(2.0, 1.0), (1.5, 1.5)] {
        let got = laws::hw_laplace_numeric(l1, l2, &nus, &QuadratureSpec::default()).unwrap();
        for (nu, g) in nus.iter().zip(&got) {
            let z = [l1 * l1 / 4.0, l2 * l2 / 4.0];
            let e = if *nu == 0.0 {
                1.0
            } else if l1 == l2 {
                laws::hw_laplace_bessel(*nu, l1, l2)
            } else {
                laws::hw_laplace(*nu, &z).unwrap()
            };
            worst = worst.max((g - e).abs());
        }
        parts.push(format!("mass({l1},{l2}) = {:.8}", got[0]));
    }
    let detail = format!("{}, max |transform dev| {worst:.1e} < 1e-3", parts.join(", "));
    report(5, "Hartman-Watson density: mass and Laplace transform", worst < 1e-3, detail, start, 300.0)
}

fn t0_mc() -> Outcome {
    let start = Instant::now();
    let model = LaguerreModel::new(1.5, HermitianMatrix::from_diag(&[2.0, 1.0])).unwrap();
    let grid = [0.25, 0.5, 1.0, 2.0];
    let reports = mc::check_t0(&model, &grid, 2.0, &McRun::new(10_000, 20_240_006, 1e-5).unwrap()).unwrap();
    let pass = reports.iter().all(|r| r.pass);
    let detail = reports
        .iter()
        .map(|r| format!("{:.4} vs {:.4} (z {:+.2})", r.estimate, r.reference, r.z))
        .collect::<Vec<_>>()
        .join(", ");
    report(6, "T0 survival MC, 1e4 paths", pass, detail, start, 300.0)
}

fn s0_duality() -> Outcome {
    let start = Instant::now();
    let (nu, x) = (0.5, [2.0, 1.0]);
    let total = laws::s0_total_mass(nu, x[0], x[1]).unwrap();
    let mut worst = (total - 1.0).abs();
    for t in [0.5, 1.0, 2.0] {
        let head = laws::s0_mass(nu, x[0], x[1], 0.0, 1.0 / (2.0 * t)).unwrap();
        let tail = laws::t0_tail(nu, &x, t).unwrap();
        worst = worst.max((head - tail).abs());
    }
    report(7, "S0/T0 duality and S0 mass", worst < 1e-6, format!("mass {total:.10}, max dev {worst:.1e} < 1e-6"), start, 10.0)
}

fn girsanov() -> Outcome {
    let start = Instant::now();
    let base = LaguerreModel::new(2.0, HermitianMatrix::from_diag(&[1.0, 2.0])).unwrap();
    let u = HermitianMatrix::from_diag(&[0.2, 0.2]);
    let r = mc::check_girsanov(&base, 0.5, 1.0, &u, &McRun::new(100_000, 20_240_008, 1e-3).unwrap()).unwrap();
    let detail = format!("estimate {:.6} ± {:.1e} vs {:.6}, z = {:+.2}", r.estimate, r.se, r.reference, r.z);
    report(8, "change of measure, 1e5 paths", r.z.abs() <= 3.0, detail, start, 180.0)
}

fn non_collision() -> Outcome {
    let start = Instant::now();
    let model = LaguerreModel::from_spectrum(2.0, &[2.0, 1.0]).unwrap();
    let mut min_gap = f64::INFINITY;
    let mut failures = 0;
    for i in 0..1000 {
        let mut lo = f64::INFINITY;
        let r = process::simulate_eigen_with(&model, 1e-4, 1.0, PathSeed::new(20_240_009, i), |s| {
            lo = lo.min(s.raw[0] - s.raw[1]);
            std::ops::ControlFlow::Continue(())
        });
        if r.is_err() {
            failures += 1;
        }
        min_gap = min_gap.min(lo);
    }
    let pass = failures == 0 && min_gap > 0.0;
    report(9, "eigenvalues never collide, 1e3 paths", pass, format!("min gap {min_gap:.3e}, errors {failures}"), start, 60.0)
}

fn scalar_reductions() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for nu in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for x in [0.2, 1.0, 3.0] {
            for t in [0.05, 0.5, 1.0, 4.0, 20.0] {
                let a = laws::t0_tail(nu, &[x], t).unwrap();
                worst = worst.max((a - gamma_lr(nu, x / (2.0 * t))).abs());
            }
        }
    }
    for nu in [0.0, 0.25, 0.5, 1.0, 2.5] {
        for z in [0.01, 0.5, 2.0, 10.0, 100.0] {
            let l = 2.0 * f64::sqrt(z);
            let a = laws::hw_laplace(nu, &[z]).unwrap();
            worst = worst.max((a - bessel_i(nu, l) / bessel_i(0.0, l)).abs());
        }
    }
    report(10, "single-size reductions", worst < 1e-10, format!("max abs err {worst:.1e} < 1e-10"), start, 5.0)
}

fn log_asymptotic() -> Outcome {
    let start = Instant::now();
    let model = LaguerreModel::from_spectrum(2.0, &[2.0, 1.0]).unwrap();
    let reports = mc::check_log_asymptotic(&model, 1e4, &[0.5, 1.0], &McRun::new(2_000, 20_240_011, 1e-2).unwrap()).unwrap();
    let pass = reports.iter().all(|r| r.pass);
    let detail = reports
        .iter()
        .map(|r| format!("{:.4} ± {:.1e} vs {:.4} (z {:+.2})", r.estimate, r.se, r.reference, r.z))
        .collect::<Vec<_>>()
        .join(", ");
    let mut o = report(11, "log-scale asymptotics (stretch, non-gating)", pass, detail, start, f64::INFINITY);
    o.gating = false;
    o
}

#[test]
fn acceptance() {
    let _ = std::io::stdout().lock().write_all(b"\n");
    let checks: [fn() -> Outcome; 11] = [
        series_vs_determinant,
        zonal_completeness,
        laplace_mc,
        chamber_normalization,
        hartman_watson,
        t0_mc,
        s0_duality,
        girsanov,
        non_collision,
        scalar_reductions,
        log_asymptotic,
    ];
    let outcomes: Vec<Outcome> = checks.iter().map(|c| c()).collect();
    let failed: Vec<u32> = outcomes.iter().filter(|o| o.gating && !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "gating criteria failed: {failed:?}");
}
