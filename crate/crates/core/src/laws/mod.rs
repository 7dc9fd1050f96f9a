//! Closed-form laws of the Laguerre process: Laplace transform, transition
//! densities, the Hartman–Watson type transform, hitting-time laws, moments
//! of the determinant and change-of-measure weights.

mod hw;

pub use hw::{
    hw_denominator, hw_denominator_closed, hw_density, hw_density_equal, hw_density_m2, hw_laplace_numeric,
    hw_tail_moments, g_equal, HwDensity, HwQuery, HwValue, QuadratureSpec,
};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::numeric::{gamma, rgamma, vandermonde, NeumaierSum};
use crate::process::{EigenPath, LaguerreModel, MatrixPath};
use crate::quad;
use crate::specfun::{
    bessel_i_scaled, gamma_multivariate, gross_richards, hyp_scalar, with_jitter, ScalarHypParams, DEFAULT_TOL,
    JITTER_GAP_TOL,
};
use crate::symfun::{hyp_matrix_series, max_abs, min_gap, SeriesOptions};

/// `E exp(-tr(u X_t))` for a process of dimension `delta` started at `x`.
pub fn laplace_transform_from(delta: f64, x: &HermitianMatrix, t: f64, u: &HermitianMatrix) -> Result<f64> {
    if x.size() != u.size() {
        return Err(Error::Domain("state and argument sizes differ".into()));
    }
    if t == 0.0 {
        return Ok((-x.trace_product(u)).exp());
    }
    let e = u.eigen();
    let mut log_det = 0.0;
    let mut shrunk = Vec::with_capacity(e.values.len());
    for &mu in &e.values {
        let d = 1.0 + 2.0 * t * mu;
        if !(d > 0.0) {
            return Err(Error::Domain(format!("I + 2tu not positive definite (eigenvalue {mu})")));
        }
        log_det += d.ln();
        shrunk.push(mu / d);
    }
    // (I + 2tu)^{-1} u shares eigenvectors with u.
    let w = HermitianMatrix::from_spectral(&shrunk, &e.vectors);
    Ok((-delta * log_det - x.trace_product(&w)).exp())
}

/// `E_{x0} exp(-tr(u X_t)) = det(I + 2tu)^{-δ} exp(-tr(x0 (I + 2tu)^{-1} u))`.
pub fn laplace_transform(model: &LaguerreModel, t: f64, u: &HermitianMatrix) -> Result<f64> {
    laplace_transform_from(model.delta(), model.x0(), t, u)
}

/// Laplace transform of `tr X_t`, a squared Bessel process of dimension `2δm`.
pub fn trace_laplace(model: &LaguerreModel, t: f64, u: f64) -> f64 {
    let d = 1.0 + 2.0 * t * u;
    d.powf(-model.delta() * model.m() as f64) * (-u * model.x0().trace() / d).exp()
}

/// Matrix `₀F₁(b; Z)` on a spectrum, through the determinantal formula, or
/// through the zonal series when the spectrum is nearly degenerate and small.
pub fn matrix_0f1(b: f64, z: &[f64]) -> Result<f64> {
    let scale = max_abs(z);
    if scale == 0.0 {
        return Ok(1.0);
    }
    if z.len() > 1 && min_gap(z) < JITTER_GAP_TOL * scale && scale <= 10.0 {
        let opts = SeriesOptions { tol: 1e-14, max_weight: 60 };
        if let Ok(v) = hyp_matrix_series(&[], &[b], z, opts) {
            return Ok(v.value);
        }
    }
    let p = ScalarHypParams::new(vec![], vec![b])?;
    Ok(gross_richards(&p, z, 1e-15)?.value)
}

/// Spectrum of `x^{1/2} y x^{1/2}`, the eigenvalues of `xy`.
fn product_spectrum(x: &HermitianMatrix, y: &HermitianMatrix) -> Vec<f64> {
    let s = x.sqrt_positive();
    let m = x.size();
    let sy = crate::hermitian::matmul(s.data(), y.data(), m);
    let sys = crate::hermitian::matmul(&sy, s.data(), m);
    let mut h = HermitianMatrix::zeros(m);
    h = h.add(&HermitianMatrix::new(m, sys).unwrap_or(h.clone()));
    h.eigenvalues().into_iter().map(|v| v.max(0.0)).collect()
}

/// Transition density `p_t(x0, y)` with respect to the flat measure on
/// Hermitian matrices, `dy = Π dy_ii Π_{i<j} d Re y_ij d Im y_ij`.
pub fn transition_density(model: &LaguerreModel, t: f64, y: &HermitianMatrix) -> Result<f64> {
    let m = model.m();
    let mf = m as f64;
    let delta = model.delta();
    if !(delta > mf - 1.0) {
        return Err(Error::Domain(format!("transition density needs δ > m - 1, got δ = {delta}")));
    }
    if y.size() != m {
        return Err(Error::Domain("size mismatch".into()));
    }
    let ys = y.eigenvalues();
    if ys.iter().any(|&v| v <= 0.0) {
        return Ok(0.0);
    }
    let x = model.x0();
    let log_det_y: f64 = ys.iter().map(|v| v.ln()).sum();
    let log_pref = -(mf * delta) * (2.0 * t).ln() - (x.trace() + y.trace()) / (2.0 * t) + (delta - mf) * log_det_y;
    let z: Vec<f64> = product_spectrum(x, y).iter().map(|v| v / (4.0 * t * t)).collect();
    let f = matrix_0f1(delta, &z)?;
    Ok(log_pref.exp() * f / gamma_multivariate(delta, m)?)
}

/// Weyl constant turning a unitarily invariant flat density into the joint
/// density of ordered eigenvalues: `q(y) = C_m V(y)^2 p(diag y)`.
pub fn weyl_constant(m: usize) -> Result<f64> {
    let mf = m as f64;
    Ok(PI.powf(mf * (mf - 1.0)) / gamma_multivariate(mf, m)?)
}

/// Single-eigenvalue kernel `(1/2t)(y/x)^{ν/2} e^{-(x+y)/2t} I_ν(√(xy)/t)`.
fn besq_kernel(nu: f64, t: f64, x: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return (nu * y.ln() - (nu + 1.0) * (2.0 * t).ln() - y / (2.0 * t)).exp() * rgamma(nu + 1.0);
    }
    let z = (x * y).sqrt() / t;
    let d = x.sqrt() - y.sqrt();
    (0.5 / t) * (y / x).powf(0.5 * nu) * (-d * d / (2.0 * t)).exp() * bessel_i_scaled(nu, z)
}

/// Joint density of the ordered eigenvalues at time `t` on the chamber
/// `y_1 > ... > y_m > 0`, started from the spectrum `x`.
pub fn eigen_semigroup_from(delta: f64, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let m = x.len();
    if y.len() != m {
        return Err(Error::Domain("size mismatch".into()));
    }
    let nu = delta - m as f64;
    if !(nu > -1.0) {
        return Err(Error::Domain(format!("eigenvalue density needs ν > -1, got {nu}")));
    }
    if y.windows(2).any(|w| w[0] <= w[1]) || y[m - 1] <= 0.0 {
        return Ok(0.0);
    }
    if m == 1 {
        return Ok(besq_kernel(nu, t, x[0], y[0]));
    }
    if x.iter().all(|&v| v == 0.0) {
        let model = LaguerreModel::from_spectrum(delta, x)?;
        let v = vandermonde(y);
        return Ok(weyl_constant(m)? * v * v * transition_density(&model, t, &HermitianMatrix::from_diag(y))?);
    }
    let vy = vandermonde(y);
    let out = with_jitter(x, |xs| {
        if xs.iter().any(|&v| v < 0.0) {
            return Err(Error::Domain("repeated zero eigenvalue in the initial state".into()));
        }
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                a[i * m + j] = besq_kernel(nu, t, xs[i], y[j]);
            }
        }
        let mut sorted = xs.to_vec();
        sorted.sort_by(|p, q| q.total_cmp(p));
        // Row order must match the ordering used in V(x).
        let mut rows: Vec<usize> = (0..m).collect();
        rows.sort_by(|&p, &q| xs[q].total_cmp(&xs[p]));
        let mut b = vec![0.0; m * m];
        for (r, &src) in rows.iter().enumerate() {
            b[r * m..(r + 1) * m].copy_from_slice(&a[src * m..(src + 1) * m]);
        }
        Ok(crate::numeric::det(&b, m) * vy / vandermonde(&sorted))
    })?;
    Ok(out.value)
}

pub fn eigen_semigroup(model: &LaguerreModel, t: f64, y: &[f64]) -> Result<f64> {
    eigen_semigroup_from(model.delta(), t, &model.spectrum(), y)
}

/// Mass of the eigenvalue density over `{y_1 > y_2 > 0, y_1 < y_max}` for `m = 2`,
/// with an optional weight `w(y_1, y_2)`.
pub fn chamber_integral_m2<W>(delta: f64, t: f64, x: &[f64], y_max: f64, tol: f64, w: W) -> Result<f64>
where
    W: Fn(f64, f64) -> f64,
{
    if x.len() != 2 {
        return Err(Error::Domain("chamber integral implemented for m = 2".into()));
    }
    let mut failure = None;
    let outer = quad::adaptive_points(
        |y1| {
            let inner = quad::adaptive_points(
                |y2| match eigen_semigroup_from(delta, t, x, &[y1, y2]) {
                    Ok(q) => q * w(y1, y2),
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                &[0.0, 0.5 * y1, y1],
                tol * 1e-2,
                tol * 1e-2,
                400,
            );
            match inner {
                Ok(v) => v.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        &breakpoints(y_max),
        tol,
        tol,
        2000,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(outer.value)
}

fn breakpoints(y_max: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut b = 1.0;
    while b < y_max {
        pts.push(b);
        b *= 2.0;
    }
    pts.push(y_max);
    pts
}

/// Laplace transform of the conditional law of `∫ tr(X_s^{-1}) ds` given the
/// endpoints, `Γ_m(m)/Γ_m(m+ν) det(z)^{ν/2} ₀F₁(m+ν; z) / ₀F₁(m; z)` at
/// `z = spectrum of xy/4t²`.
pub fn hw_laplace(nu: f64, z: &[f64]) -> Result<f64> {
    if nu < 0.0 {
        return Err(Error::Domain(format!("index must be >= 0, got {nu}")));
    }
    if z.iter().any(|&v| v < 0.0) {
        return Err(Error::Domain("argument spectrum must be nonnegative".into()));
    }
    if nu == 0.0 {
        return Ok(1.0);
    }
    let m = z.len();
    let mf = m as f64;
    let log_det: f64 = z.iter().map(|v| v.ln()).sum();
    let ratio = gamma_multivariate(mf, m)? / gamma_multivariate(mf + nu, m)?;
    let num = matrix_0f1(mf + nu, z)?;
    let den = matrix_0f1(mf, z)?;
    Ok(ratio * (0.5 * nu * log_det).exp() * num / den)
}

/// Bessel form of the `m = 2` transform, with `λ_i = 2√z_i`. Uses the
/// confluent limit when the two arguments coincide to relative `1e-7`.
pub fn hw_laplace_bessel(nu: f64, lambda1: f64, lambda2: f64) -> f64 {
    let (l1, l2) = (lambda1.max(lambda2), lambda1.min(lambda2));
    // Scaled Bessel functions: common factor e^{-(λ1+λ2)} cancels.
    let i = bessel_i_scaled;
    if l1 - l2 < JITTER_GAP_TOL * l1 {
        let l = 0.5 * (l1 + l2);
        let num = i(nu, l) * i(nu, l) - i(nu + 1.0, l) * i(nu - 1.0, l);
        let den = i(0.0, l) * i(0.0, l) - i(1.0, l) * i(-1.0, l);
        return num / den;
    }
    let num = l1 * i(nu + 1.0, l1) * i(nu, l2) - l2 * i(nu + 1.0, l2) * i(nu, l1);
    let den = l1 * i(1.0, l1) * i(0.0, l2) - l2 * i(1.0, l2) * i(0.0, l1);
    num / den
}

/// `Q^{m-ν}_x(T_0 > t) = Γ_m(m)/Γ_m(m+ν) det(x/2t)^ν ₁F₁(ν; m+ν; -x/2t)`.
pub fn t0_tail(nu: f64, x: &[f64], t: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::Domain(format!("T0 law needs 0 < ν < 1, got {nu}")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain("t must be positive".into()));
    }
    if x.iter().any(|&v| v <= 0.0) {
        return Err(Error::Domain("initial state must be positive definite".into()));
    }
    let m = x.len();
    let mf = m as f64;
    let z: Vec<f64> = x.iter().map(|v| -v / (2.0 * t)).collect();
    let log_det: f64 = x.iter().map(|v| (v / (2.0 * t)).ln()).sum();
    let p = ScalarHypParams::new(vec![nu], vec![mf + nu])?;
    let f = gross_richards(&p, &z, 1e-15)?.value;
    let ratio = gamma_multivariate(mf, m)? / gamma_multivariate(mf + nu, m)?;
    let tail = (ratio * (nu * log_det).exp() * f).clamp(0.0, 1.0);
    if m == 2 && tail > 1.0 - T0_COMPLEMENT_SWITCH {
        // The determinant resolves 1 - tail only to about 1e-12 absolute;
        // the S0 mass beyond 1/2t has full relative accuracy.
        return Ok(1.0 - s0_upper_mass(nu, x[0], x[1], 1.0 / (2.0 * t))?);
    }
    Ok(tail)
}

/// Below `1 - tail` of this size, `t0_tail` for `m = 2` goes through the `S_0` law.
const T0_COMPLEMENT_SWITCH: f64 = 1e-6;

/// `∫_a^∞ f_{S_0}(u) du` to relative accuracy.
fn s0_upper_mass(nu: f64, lambda1: f64, lambda2: f64, a: f64) -> Result<f64> {
    let mut failure = None;
    let out = quad::adaptive_to_infinity(
        |u| match s0_density(nu, lambda1, lambda2, u) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        a,
        0.0,
        1e-12,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(out.value)
}

/// `E det(X_t)^s = (2t)^{ms} Γ_m(s+δ)/Γ_m(δ) ₁F₁(-s; δ; -x/2t)`.
pub fn det_moment(model: &LaguerreModel, t: f64, s: f64) -> Result<f64> {
    let m = model.m();
    let delta = model.delta();
    let x = model.spectrum();
    let pref = (2.0 * t).powf(m as f64 * s) * gamma_multivariate(s + delta, m)? / gamma_multivariate(delta, m)?;
    if s == 0.0 {
        return Ok(1.0);
    }
    let z: Vec<f64> = x.iter().map(|v| -v / (2.0 * t)).collect();
    let p = ScalarHypParams::new(vec![-s], vec![delta])?;
    Ok(pref * gross_richards(&p, &z, 1e-15)?.value)
}

/// Same moment through the Kummer form `e^{-tr x/2t} ₁F₁(δ+s; δ; x/2t)`.
pub fn det_moment_kummer(model: &LaguerreModel, t: f64, s: f64) -> Result<f64> {
    let m = model.m();
    let delta = model.delta();
    let x = model.spectrum();
    let pref = (2.0 * t).powf(m as f64 * s) * gamma_multivariate(s + delta, m)? / gamma_multivariate(delta, m)?;
    let z: Vec<f64> = x.iter().map(|v| v / (2.0 * t)).collect();
    let tr: f64 = z.iter().sum();
    let p = ScalarHypParams::new(vec![delta + s], vec![delta])?;
    Ok(pref * (-tr).exp() * gross_richards(&p, &z, 1e-15)?.value)
}

/// `Σ_{n≥1} (2)_n/((ν+1)_n n!) u^n (λ1^n - λ2^n)/(λ1 - λ2)`, free of cancellation.
fn s0_difference_series(nu: f64, l1: f64, l2: f64, u: f64) -> Result<f64> {
    let mut coef = 1.0;
    let mut sum = NeumaierSum::new();
    // h_{n-1}(λ1, λ2) = (λ1^n - λ2^n)/(λ1 - λ2), built by h_n = λ1 h_{n-1} + λ2^n.
    let mut h = 1.0;
    let mut l2pow = 1.0;
    for n in 1..2000 {
        let nf = n as f64;
        coef *= (1.0 + nf) / ((nu + nf) * nf) * u;
        if n > 1 {
            l2pow *= l2;
            h = l1 * h + l2pow;
        }
        let term = coef * h;
        sum.add(term);
        if term.abs() < 1e-17 * sum.value().abs() {
            return Ok(sum.value());
        }
    }
    Err(Error::NonConverged { terms: 2000, tail: f64::NAN })
}

/// Density of `S_0 = 1/(2 T_0)` for `m = 2`, with `λ_i` the eigenvalues of
/// the initial state and `δ = 2 - ν`.
pub fn s0_density(nu: f64, lambda1: f64, lambda2: f64, u: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::Domain(format!("S0 law needs 0 < ν < 1, got {nu}")));
    }
    let (l1, l2) = (lambda1.max(lambda2), lambda1.min(lambda2));
    if !(l2 > 0.0) {
        return Err(Error::Domain("eigenvalues must be positive".into()));
    }
    if u <= 0.0 {
        return Ok(0.0);
    }
    if l1 - l2 < JITTER_GAP_TOL * l1 {
        let l = 0.5 * (l1 + l2);
        let f = hyp_scalar(&ScalarHypParams::new(vec![nu - 1.0], vec![nu + 2.0])?, -l * u, 1e-15)?;
        let log = (2.0 * nu) * l.ln() + (2.0 * nu - 1.0) * u.ln() - l * u;
        return Ok(2.0 * log.exp() * f / (gamma(nu + 2.0) * gamma(nu)));
    }
    let log_pref = nu * (l1 * l2).ln() + (2.0 * nu - 2.0) * u.ln();
    let norm = gamma(nu + 1.0) * gamma(nu);
    let diff = if l1 * u < 20.0 {
        (-(l1 + l2) * u).exp() * s0_difference_series(nu, l1, l2, u)?
    } else {
        // e^{-(λ1+λ2)u} ₁F₁(2; ν+1; λu) = e^{-λ' u} ₁F₁(ν-1; ν+1; -λu).
        let p = ScalarHypParams::new(vec![nu - 1.0], vec![nu + 1.0])?;
        let a = (-l2 * u).exp() * hyp_scalar(&p, -l1 * u, 1e-15)?;
        let b = (-l1 * u).exp() * hyp_scalar(&p, -l2 * u, 1e-15)?;
        (a - b) / (l1 - l2)
    };
    Ok(log_pref.exp() * diff / norm)
}

/// `∫_a^b f_{S_0}(u) du` using `w = u^{2ν}` near the origin.
pub fn s0_mass(nu: f64, lambda1: f64, lambda2: f64, a: f64, b: f64) -> Result<f64> {
    let mut failure = None;
    let mut eval = |u: f64| match s0_density(nu, lambda1, lambda2, u) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let k = 2.0 * nu;
    let (wa, wb) = (a.powf(k), b.powf(k));
    let out = quad::adaptive(
        |w| {
            if w <= 0.0 {
                return 0.0;
            }
            let u = w.powf(1.0 / k);
            // du = u / (k w) dw
            eval(u) * u / (k * w)
        },
        wa,
        wb,
        1e-13,
        1e-12,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(out.value)
}

/// Total mass of the `S_0` density.
pub fn s0_total_mass(nu: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    let split = 1.0 / lambda1.min(lambda2);
    let head = s0_mass(nu, lambda1, lambda2, 0.0, split)?;
    let mut failure = None;
    let tail = quad::adaptive_to_infinity(
        |u| match s0_density(nu, lambda1, lambda2, u) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        split,
        1e-13,
        1e-12,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(head + tail.value)
}

/// Any stored path viewed through the spectra of its states.
pub trait SpectralPath {
    fn times(&self) -> &[f64];
    fn spectrum_at(&self, k: usize) -> Vec<f64>;
}

impl SpectralPath for MatrixPath {
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn spectrum_at(&self, k: usize) -> Vec<f64> {
        self.states[k].eigenvalues()
    }
}

impl SpectralPath for EigenPath {
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn spectrum_at(&self, k: usize) -> Vec<f64> {
        self.lambdas[k].clone()
    }
}

/// Smallest eigenvalue accepted by the change-of-measure weight.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Streaming form of [`girsanov_weight`]: feed the spectrum at each grid time.
#[derive(Debug, Clone)]
pub struct GirsanovAccumulator {
    nu: f64,
    log_det0: Option<f64>,
    log_det: f64,
    prev_t: Option<f64>,
    prev_tr_inv: Option<f64>,
    integral: NeumaierSum,
    step: usize,
}

impl GirsanovAccumulator {
    pub fn new(nu: f64) -> Self {
        Self { nu, log_det0: None, log_det: 0.0, prev_t: None, prev_tr_inv: None, integral: NeumaierSum::new(), step: 0 }
    }

    /// Spectrum at time `t`. Index `ν = 0` gives weight 1 on every path, singular or not.
    pub fn push(&mut self, t: f64, spectrum: &[f64]) -> Result<()> {
        let dt = self.prev_t.map(|t0| t - t0);
        self.prev_t = Some(t);
        self.record(dt.unwrap_or(0.0), spectrum)
    }

    /// Spectrum after a step of length `dt`. For schemes whose steps can fall
    /// below the resolution of the running time. The first call sets the start
    /// and ignores `dt`.
    pub fn advance(&mut self, dt: f64, spectrum: &[f64]) -> Result<()> {
        self.record(dt, spectrum)
    }

    fn record(&mut self, dt: f64, spectrum: &[f64]) -> Result<()> {
        if self.nu == 0.0 {
            self.step += 1;
            return Ok(());
        }
        let min = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min >= SINGULAR_TOL) {
            return Err(Error::SingularState { step: self.step, min_eig: min });
        }
        let tr_inv: f64 = spectrum.iter().map(|v| 1.0 / v).sum();
        let log_det: f64 = spectrum.iter().map(|v| v.ln()).sum();
        if self.log_det0.is_none() {
            self.log_det0 = Some(log_det);
        }
        if let Some(f0) = self.prev_tr_inv {
            self.integral.add(dt * f0);
        }
        self.prev_tr_inv = Some(tr_inv);
        self.log_det = log_det;
        self.step += 1;
        Ok(())
    }

    /// `∫ tr(X_s^{-1}) ds` so far.
    pub fn integral(&self) -> f64 {
        self.integral.value()
    }

    pub fn log_weight(&self) -> f64 {
        let Some(l0) = self.log_det0 else { return 0.0 };
        if self.nu == 0.0 {
            return 0.0;
        }
        0.5 * self.nu * (self.log_det - l0) - 0.5 * self.nu * self.nu * self.integral()
    }

    pub fn weight(&self) -> f64 {
        self.log_weight().exp()
    }
}

/// `(det X_t / det x)^{ν/2} exp(-(ν²/2) ∫_0^t tr(X_s^{-1}) ds)` along a path,
/// with the time integral as a left-point sum on the path grid. Left points
/// keep the discrete weight a martingale when the scheme's drift in `log det`
/// vanishes, as it does in the log-spectral scheme at `δ = m`.
pub fn girsanov_weight<P: SpectralPath>(path: &P, nu: f64) -> Result<f64> {
    let mut acc = GirsanovAccumulator::new(nu);
    for (k, &t) in path.times().iter().enumerate() {
        acc.push(t, &path.spectrum_at(k))?;
    }
    Ok(acc.weight())
}

/// Scalar `₁F₂(1/2; 1; 2; λ²)`.
pub fn hyp_1f2_equal(lambda: f64) -> Result<f64> {
    hyp_scalar(&ScalarHypParams::new(vec![0.5], vec![1.0, 2.0])?, lambda * lambda, DEFAULT_TOL)
}
