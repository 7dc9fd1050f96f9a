//! Euler schemes for the Laguerre matrix SDE and for its eigenvalue system.
//!
//! Both schemes use full truncation: the diffusion coefficient is evaluated on
//! the positive part of the state, while the state itself is carried forward
//! unprojected. Stored states are projected.
//!
//! Random numbers come from a ChaCha8 stream selected by `(master seed, path
//! index)`. Within a step the matrix scheme consumes the entries of `ΔB` in
//! row-major order, real part before imaginary part; the eigenvalue scheme
//! consumes one normal per eigenvalue, largest eigenvalue first.

use std::io::Write;
use std::ops::ControlFlow;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{matmul, Eigen, HermitianMatrix};

/// Largest negative eigenvalue tolerated in an initial state.
pub const PSD_TOL: f64 = 1e-10;

/// Laguerre process of size `m`, dimension `delta` and initial state `x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreModel {
    m: usize,
    delta: f64,
    x0: HermitianMatrix,
}

impl LaguerreModel {
    pub fn new(delta: f64, x0: HermitianMatrix) -> Result<Self> {
        let m = x0.size();
        if m == 0 {
            return Err(Error::Config("size must be at least 1".into()));
        }
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::Config(format!("dimension must be a finite number >= 0, got {delta}")));
        }
        let scale = x0.eigenvalues().iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let min = x0.min_eigenvalue();
        if min < -PSD_TOL * scale {
            return Err(Error::Config(format!("initial state not positive semidefinite (min eigenvalue {min:e})")));
        }
        Ok(Self { m, delta, x0 })
    }

    /// Model started from `diag(spectrum)`.
    pub fn from_spectrum(delta: f64, spectrum: &[f64]) -> Result<Self> {
        Self::new(delta, HermitianMatrix::from_diag(spectrum))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Index `ν = δ - m`.
    pub fn nu(&self) -> f64 {
        self.delta - self.m as f64
    }

    pub fn x0(&self) -> &HermitianMatrix {
        &self.x0
    }

    /// Eigenvalues of the initial state, largest first, clipped at zero.
    pub fn spectrum(&self) -> Vec<f64> {
        self.x0.eigenvalues().into_iter().map(|v| v.max(0.0)).collect()
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(delta, self.x0.clone())
    }

    /// `δ ≥ m`: the matrix stays invertible and the SDE has a unique strong solution.
    pub fn strong_invertible(&self) -> bool {
        self.delta >= self.m as f64
    }

    /// `δ > m - 1`: the eigenvalues never collide and the transition density exists.
    pub fn eigen_regular(&self) -> bool {
        self.delta > self.m as f64 - 1.0
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.m;
        let entries: Vec<[f64; 2]> = (0..n * n).map(|k| {
            let z = self.x0.get(k / n, k % n);
            [z.re, z.im]
        }).collect();
        serde_json::json!({
            "m": self.m,
            "delta": self.delta,
            "nu": self.nu(),
            "x0": entries,
            "x0_spectrum": self.spectrum(),
        })
    }
}

/// RNG provenance of one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathSeed {
    pub master: u64,
    pub path: u64,
}

impl PathSeed {
    pub fn new(master: u64, path: u64) -> Self {
        Self { master, path }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.path);
        rng
    }
}

/// Uniform grid `t_k = k T / N` with `N = round(T / dt)`.
pub fn time_grid(dt: f64, t_end: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(t_end >= dt) || !t_end.is_finite() {
        return Err(Error::Config(format!("need 0 < dt <= T, got dt = {dt}, T = {t_end}")));
    }
    let n = (t_end / dt).round().max(1.0) as usize;
    Ok((0..=n).map(|k| t_end * k as f64 / n as f64).collect())
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws `ΔB` for one step: each real and imaginary part is `N(0, dt)`.
pub fn draw_matrix_increment(rng: &mut ChaCha8Rng, m: usize, dt: f64) -> Vec<Complex64> {
    let s = dt.sqrt();
    (0..m * m)
        .map(|_| {
            let re = normal(rng) * s;
            let im = normal(rng) * s;
            Complex64::new(re, im)
        })
        .collect()
}

/// One Euler step `X + √X⁺ ΔB + ΔB^* √X⁺ + 2δ I dt`, Hermitian by construction.
pub fn matrix_step(x: &HermitianMatrix, sqrt_pos: &HermitianMatrix, db: &[Complex64], dt: f64, delta: f64) -> HermitianMatrix {
    let m = x.size();
    let prod = matmul(sqrt_pos.data(), db, m);
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let mut v = x.get(i, j) + prod[i * m + j] + prod[j * m + i].conj();
            if i == j {
                v = Complex64::new(v.re + 2.0 * delta * dt, 0.0);
            }
            out.push(v);
        }
    }
    // Entries (i,j) and (j,i) are conjugate up to addition order; make it exact.
    let mut h = HermitianMatrix::new_unchecked(m, out);
    h.symmetrize();
    h
}

/// `√(X⁺)` from a decomposition of `X`.
pub fn sqrt_from_eigen(e: &Eigen) -> HermitianMatrix {
    let v: Vec<f64> = e.values.iter().map(|x| x.max(0.0).sqrt()).collect();
    HermitianMatrix::from_spectral(&v, &e.vectors)
}

/// Projection `X⁺` from a decomposition of `X`.
pub fn positive_from_eigen(e: &Eigen) -> HermitianMatrix {
    let v: Vec<f64> = e.values.iter().map(|x| x.max(0.0)).collect();
    HermitianMatrix::from_spectral(&v, &e.vectors)
}

/// State handed to matrix-path observers: the unprojected state and its spectrum.
pub struct MatrixState<'a> {
    pub step: usize,
    pub t: f64,
    pub raw: &'a HermitianMatrix,
    pub eigen: &'a Eigen,
}

impl MatrixState<'_> {
    pub fn projected(&self) -> HermitianMatrix {
        positive_from_eigen(self.eigen)
    }
}

/// Runs the matrix scheme, calling `observe` at every grid time including `t = 0`.
/// Returns the grid.
pub fn simulate_matrix_with<F>(model: &LaguerreModel, dt: f64, t_end: f64, seed: PathSeed, mut observe: F) -> Result<Vec<f64>>
where
    F: FnMut(&MatrixState<'_>) -> ControlFlow<()>,
{
    let times = time_grid(dt, t_end)?;
    let h = times[1] - times[0];
    let m = model.m();
    let mut rng = seed.rng();
    let mut x = model.x0().clone();
    let mut eig = x.eigen();
    if observe(&MatrixState { step: 0, t: 0.0, raw: &x, eigen: &eig }).is_break() {
        return Ok(times);
    }
    for (k, &t) in times.iter().enumerate().skip(1) {
        let s = sqrt_from_eigen(&eig);
        let db = draw_matrix_increment(&mut rng, m, h);
        x = matrix_step(&x, &s, &db, h, model.delta());
        eig = x.eigen();
        if observe(&MatrixState { step: k, t, raw: &x, eigen: &eig }).is_break() {
            break;
        }
    }
    Ok(times)
}

/// Matrix-valued path with projected states.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPath {
    pub times: Vec<f64>,
    pub states: Vec<HermitianMatrix>,
    /// One seed per superposed component.
    pub seeds: Vec<PathSeed>,
}

pub fn simulate_matrix(model: &LaguerreModel, dt: f64, t_end: f64, seed: PathSeed) -> Result<MatrixPath> {
    let mut states = Vec::new();
    let times = simulate_matrix_with(model, dt, t_end, seed, |s| {
        states.push(s.projected());
        ControlFlow::Continue(())
    })?;
    Ok(MatrixPath { times, states, seeds: vec![seed] })
}

/// Final unprojected state of the matrix scheme.
pub fn terminal_matrix(model: &LaguerreModel, dt: f64, t_end: f64, seed: PathSeed) -> Result<HermitianMatrix> {
    let mut last = None;
    simulate_matrix_with(model, dt, t_end, seed, |s| {
        if s.t == t_end {
            last = Some(s.projected());
        }
        ControlFlow::Continue(())
    })?;
    last.ok_or_else(|| Error::Config("grid does not end at T".into()))
}

/// Pointwise sum of two independent paths on the same grid.
pub fn superpose(a: &MatrixPath, b: &MatrixPath) -> Result<MatrixPath> {
    if a.times != b.times {
        return Err(Error::GridMismatch(format!("{} vs {} grid points", a.times.len(), b.times.len())));
    }
    if a.states.first().map(HermitianMatrix::size) != b.states.first().map(HermitianMatrix::size) {
        return Err(Error::GridMismatch("matrix sizes differ".into()));
    }
    if a.seeds.iter().any(|s| b.seeds.contains(s)) {
        return Err(Error::Config("paths share a seed and are not independent".into()));
    }
    let states = a.states.iter().zip(&b.states).map(|(x, y)| x.add(y)).collect();
    let mut seeds = a.seeds.clone();
    seeds.extend_from_slice(&b.seeds);
    Ok(MatrixPath { times: a.times.clone(), states, seeds })
}

/// Interaction drift `2 Σ_{k≠i} (λ_i⁺ + λ_k⁺)/(λ_i - λ_k)`, tamed by `1/(1 + dt|·|)`.
fn tamed_interaction(lambda: &[f64], i: usize, dt: f64) -> f64 {
    let li = lambda[i];
    let mut s = 0.0;
    for (k, &lk) in lambda.iter().enumerate() {
        if k != i {
            s += (li.max(0.0) + lk.max(0.0)) / (li - lk);
        }
    }
    let d = 2.0 * s;
    d / (1.0 + dt * d.abs())
}

/// One step of the eigenvalue scheme on the unprojected state, with one
/// Brownian increment (variance `dt`) per eigenvalue. For `m = 1` this is the
/// squared Bessel Euler step `λ + 2√λ⁺ dβ + 2δ dt`.
pub fn eigen_step(lambda: &[f64], dbeta: &[f64], dt: f64, delta: f64) -> Vec<f64> {
    (0..lambda.len())
        .map(|i| {
            let li = lambda[i];
            li + 2.0 * li.max(0.0).sqrt() * dbeta[i] + (2.0 * delta + tamed_interaction(lambda, i, dt)) * dt
        })
        .collect()
}

/// State handed to eigenvalue-path observers.
pub struct EigenState<'a> {
    pub step: usize,
    pub t: f64,
    /// Unprojected eigenvalues, largest first.
    pub raw: &'a [f64],
}

/// Runs the eigenvalue scheme. `observe` sees every grid time including `t = 0`.
///
/// A step that leaves the eigenvalues out of order is re-sorted; the number
/// of such re-orderings is returned with the grid.
pub fn simulate_eigen_with<F>(model: &LaguerreModel, dt: f64, t_end: f64, seed: PathSeed, mut observe: F) -> Result<(Vec<f64>, usize)>
where
    F: FnMut(&EigenState<'_>) -> ControlFlow<()>,
{
    let times = time_grid(dt, t_end)?;
    let h = times[1] - times[0];
    let m = model.m();
    let mut lambda = model.spectrum();
    if m >= 2 && lambda.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Config("initial eigenvalues must be distinct".into()));
    }
    let mut rng = seed.rng();
    let sd = h.sqrt();
    let mut dbeta = vec![0.0; m];
    let mut reorders = 0;
    if observe(&EigenState { step: 0, t: 0.0, raw: &lambda }).is_break() {
        return Ok((times, reorders));
    }
    for (k, &t) in times.iter().enumerate().skip(1) {
        for d in dbeta.iter_mut() {
            *d = normal(&mut rng) * sd;
        }
        let mut next = eigen_step(&lambda, &dbeta, h, model.delta());
        if next.windows(2).any(|w| w[0] < w[1]) {
            next.sort_by(|a, b| b.total_cmp(a));
            reorders += 1;
        }
        if let Some(w) = next.windows(2).find(|w| !(w[0] > w[1])) {
            return Err(Error::Collision { step: k, gap: w[0] - w[1] });
        }
        lambda = next;
        if observe(&EigenState { step: k, t, raw: &lambda }).is_break() {
            break;
        }
    }
    Ok((times, reorders))
}

/// Ordered eigenvalue path with projected states.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPath {
    pub times: Vec<f64>,
    /// `λ⁺` at each grid time, largest first.
    pub lambdas: Vec<Vec<f64>>,
    /// Smallest eigenvalue before truncation, kept for boundary detection.
    pub raw_min: Vec<f64>,
    pub reorders: usize,
    pub seed: PathSeed,
}

pub fn simulate_eigen(model: &LaguerreModel, dt: f64, t_end: f64, seed: PathSeed) -> Result<EigenPath> {
    let mut lambdas = Vec::new();
    let mut raw_min = Vec::new();
    let (times, reorders) = simulate_eigen_with(model, dt, t_end, seed, |s| {
        lambdas.push(s.raw.iter().map(|v| v.max(0.0)).collect());
        raw_min.push(*s.raw.last().unwrap());
        ControlFlow::Continue(())
    })?;
    Ok(EigenPath { times, lambdas, raw_min, reorders, seed })
}

impl EigenPath {
    /// Smallest gap between consecutive eigenvalues over the whole path.
    pub fn min_gap(&self) -> f64 {
        self.lambdas
            .iter()
            .flat_map(|l| l.windows(2).map(|w| w[0] - w[1]).collect::<Vec<_>>())
            .fold(f64::INFINITY, f64::min)
    }
}

/// First time the smallest eigenvalue reaches zero, interpolated linearly
/// across the crossing step. Zero when the path starts on the boundary.
pub fn first_crossing(times: &[f64], raw_min: &[f64]) -> Option<f64> {
    if raw_min.first().is_some_and(|&v| v <= 0.0) {
        return Some(times[0]);
    }
    for k in 1..raw_min.len() {
        if raw_min[k] <= 0.0 {
            let (a, b) = (raw_min[k - 1], raw_min[k]);
            let frac = a / (a - b);
            return Some(times[k - 1] + frac * (times[k] - times[k - 1]));
        }
    }
    None
}

/// Hitting time of `det X = 0` along an eigenvalue path.
pub fn detect_t0(path: &EigenPath) -> Option<f64> {
    first_crossing(&path.times, &path.raw_min)
}

/// Streams the eigenvalue scheme until the first boundary hit or `T`.
pub fn hitting_time(model: &LaguerreModel, dt: f64, t_end: f64, seed: PathSeed) -> Result<Option<f64>> {
    let mut prev: Option<(f64, f64)> = None;
    let mut hit = None;
    simulate_eigen_with(model, dt, t_end, seed, |s| {
        let low = *s.raw.last().unwrap();
        if low <= 0.0 {
            hit = Some(match prev {
                None => s.t,
                Some((t0, a)) => t0 + a / (a - low) * (s.t - t0),
            });
            return ControlFlow::Break(());
        }
        prev = Some((s.t, low));
        ControlFlow::Continue(())
    })?;
    Ok(hit)
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl EigenPath {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let m = self.lambdas.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        header.extend((1..=m).map(|i| format!("lambda{i}")));
        writeln!(w, "{}", header.join(","))?;
        for (t, l) in self.times.iter().zip(&self.lambdas) {
            let mut row = vec![fmt17(*t)];
            row.extend(l.iter().map(|&v| fmt17(v)));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

impl MatrixPath {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let m = self.states.first().map_or(0, HermitianMatrix::size);
        let mut header = vec!["t".to_string()];
        for i in 1..=m {
            for j in i..=m {
                header.push(format!("re_{i}{j}"));
                header.push(format!("im_{i}{j}"));
            }
        }
        writeln!(w, "{}", header.join(","))?;
        for (t, x) in self.times.iter().zip(&self.states) {
            let mut row = vec![fmt17(*t)];
            for i in 0..m {
                for j in i..m {
                    let z = x.get(i, j);
                    row.push(fmt17(z.re));
                    row.push(fmt17(z.im));
                }
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Sidecar record for an exported path.
pub fn path_metadata(model: &LaguerreModel, dt: f64, t_end: f64, seeds: &[PathSeed], kind: &str) -> serde_json::Value {
    serde_json::json!({
        "kind": kind,
        "model": model.to_json(),
        "dt": dt,
        "t_end": t_end,
        "seeds": seeds,
        "scheme": "full-truncation Euler",
        "rng": "ChaCha8, stream = path index",
        "version": env!("CARGO_PKG_VERSION"),
    })
}
