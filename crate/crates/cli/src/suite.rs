use laguerre_core::hermitian::HermitianMatrix;
use laguerre_core::mc::{self, DensityCheck, McReport, McRun};
use laguerre_core::process::LaguerreModel;
use laguerre_core::Result;

/// Default size and step of one check; `--paths`, `--seed` and `--dt` override.
pub struct Check {
    pub name: &'static str,
    pub about: &'static str,
    pub paths: usize,
    pub seed: u64,
    pub dt: f64,
    run: fn(&McRun) -> Result<Outcome>,
}

pub struct Outcome {
    pub reports: Vec<McReport>,
    pub density: Option<DensityCheck>,
}

impl Check {
    pub fn run(&self, run: &McRun) -> Result<Outcome> {
        (self.run)(run)
    }
}

fn reports(r: Result<Vec<McReport>>) -> Result<Outcome> {
    Ok(Outcome { reports: r?, density: None })
}

fn one(r: Result<McReport>) -> Result<Outcome> {
    reports(r.map(|r| vec![r]))
}

fn model(delta: f64, x: &[f64]) -> Result<LaguerreModel> {
    LaguerreModel::new(delta, HermitianMatrix::from_diag(x))
}

/// Fewer paths than this and the suite warns that a check is underpowered.
pub const MIN_POWERED_PATHS: usize = 1000;

pub const CHECKS: [Check; 10] = [
    Check {
        name: "laplace",
        about: "E exp(-tr(uX_t)) against the closed form, m=2",
        paths: 100_000,
        seed: 20_240_003,
        dt: 1e-3,
        run: |r| one(mc::check_laplace(&model(2.5, &[1.0, 2.0])?, 1.0, &HermitianMatrix::from_diag(&[0.3, 0.1]), r)),
    },
    Check {
        name: "trace_besq",
        about: "tr X_t is BESQ(2 delta m)",
        paths: 20_000,
        seed: 20_240_101,
        dt: 1e-3,
        run: |r| one(mc::check_trace_besq(&model(2.5, &[1.0, 2.0])?, 1.0, 0.4, r)),
    },
    Check {
        name: "additivity",
        about: "sum of independent processes has the summed law",
        paths: 20_000,
        seed: 20_240_102,
        dt: 1e-3,
        run: |r| {
            let u = HermitianMatrix::from_diag(&[0.3, 0.2]);
            one(mc::check_additivity(&model(1.5, &[1.0, 0.5])?, &model(1.0, &[0.5, 1.0])?, 1.0, &u, r))
        },
    },
    Check {
        name: "t0",
        about: "P(T0 > t) for delta = m - 1/2",
        paths: 10_000,
        seed: 20_240_006,
        dt: 1e-5,
        run: |r| reports(mc::check_t0(&model(1.5, &[2.0, 1.0])?, &[0.25, 0.5, 1.0, 2.0], 2.0, r)),
    },
    Check {
        name: "eigen_density",
        about: "chi-square of chamber counts against the eigenvalue density",
        paths: 20_000,
        seed: 20_240_103,
        dt: 1e-3,
        run: |r| {
            let d = mc::check_eigen_density(&model(2.5, &[2.0, 1.0])?, 1.0, 6, r)?;
            Ok(Outcome { reports: vec![d.report.clone()], density: Some(d) })
        },
    },
    Check {
        name: "girsanov",
        about: "change of measure from delta = m to delta = m + 1/2",
        paths: 100_000,
        seed: 20_240_008,
        dt: 1e-3,
        run: |r| one(mc::check_girsanov(&model(2.0, &[1.0, 2.0])?, 0.5, 1.0, &HermitianMatrix::from_diag(&[0.2, 0.2]), r)),
    },
    Check {
        name: "martingale",
        about: "the Laplace transform run backwards along paths has constant mean",
        paths: 20_000,
        seed: 20_240_104,
        dt: 1e-3,
        run: |r| {
            let u = HermitianMatrix::from_diag(&[0.3, 0.1]);
            reports(mc::check_martingale(&model(2.5, &[1.0, 2.0])?, 1.0, &u, &[0.25, 0.5, 0.75], r))
        },
    },
    Check {
        name: "diagonal_besq",
        about: "a diagonal entry is BESQ(2 delta)",
        paths: 20_000,
        seed: 20_240_105,
        dt: 1e-3,
        run: |r| reports(mc::check_diagonal_besq(&model(2.5, &[1.0, 2.0])?, 0, 1.0, r)),
    },
    Check {
        name: "det_moment",
        about: "E det X_t against the closed form",
        paths: 20_000,
        seed: 20_240_106,
        dt: 1e-3,
        run: |r| one(mc::check_det_moment(&model(2.5, &[1.0, 1.0])?, 1.0, 1.0, r)),
    },
    Check {
        name: "log_asymptotic",
        about: "large-time log-scale limit (not gating)",
        paths: 2_000,
        seed: 20_240_011,
        dt: 1e-2,
        run: |r| reports(mc::check_log_asymptotic(&model(2.0, &[2.0, 1.0])?, 1e4, &[0.5, 1.0], r)),
    },
];

pub fn find(name: &str) -> Option<&'static Check> {
    CHECKS.iter().find(|c| c.name == name)
}

pub fn list() {
    for c in &CHECKS {
        println!("{:<15} {:>7} paths  {}", c.name, c.paths, c.about);
    }
}
