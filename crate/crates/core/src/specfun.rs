//! Scalar special functions and determinantal evaluators for matrix-argument
//! hypergeometric functions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::{det_in_place, gamma, is_nonpositive_integer, ln_gamma, rgamma, vandermonde};
use crate::symfun::max_abs;

/// Complex multivariate gamma `π^{m(m-1)/2} Π_{j=1}^m Γ(a - j + 1)`.
pub fn gamma_multivariate(a: f64, m: usize) -> Result<f64> {
    let mut g = PI.powf((m * (m.saturating_sub(1))) as f64 / 2.0);
    for j in 0..m {
        let arg = a - j as f64;
        if is_nonpositive_integer(arg) {
            return Err(Error::Pole(format!("Γ_{m}({a}) hits Γ({arg})")));
        }
        g *= gamma(arg);
    }
    Ok(g)
}

/// `ln |Γ_m(a)|` without the sign.
pub fn ln_gamma_multivariate(a: f64, m: usize) -> Result<f64> {
    let mut g = (m * (m.saturating_sub(1))) as f64 / 2.0 * PI.ln();
    for j in 0..m {
        let arg = a - j as f64;
        if is_nonpositive_integer(arg) {
            return Err(Error::Pole(format!("Γ_{m}({a}) hits Γ({arg})")));
        }
        g += ln_gamma(arg);
    }
    Ok(g)
}

const BESSEL_ASYMPTOTIC_Z: f64 = 30.0;

/// Modified Bessel function `I_ν(z)` for `z ≥ 0`.
pub fn bessel_i(nu: f64, z: f64) -> f64 {
    let s = bessel_i_scaled(nu, z);
    if z == 0.0 { s } else { s * z.exp() }
}

/// `e^{-z} I_ν(z)`, finite for every `z ≥ 0`.
pub fn bessel_i_scaled(nu: f64, z: f64) -> f64 {
    assert!(z >= 0.0, "bessel_i needs z >= 0, got {z}");
    if nu < 0.0 && nu == nu.round() {
        return bessel_i_scaled(-nu, z);
    }
    if nu < -1.0 {
        // Downward recurrence I_{ν} = I_{ν+2} + 2(ν+1)/z I_{ν+1}.
        if z == 0.0 {
            return f64::INFINITY;
        }
        let a = bessel_i_scaled(nu + 2.0, z);
        let b = bessel_i_scaled(nu + 1.0, z);
        return a + 2.0 * (nu + 1.0) / z * b;
    }
    if z == 0.0 {
        return if nu == 0.0 { 1.0 } else if nu > 0.0 { 0.0 } else { f64::INFINITY };
    }
    if z > BESSEL_ASYMPTOTIC_Z.max(nu * nu) {
        return bessel_i_asymptotic_scaled(nu, z);
    }
    // Series, first term carried in log form.
    let half = 0.5 * z;
    let log_first = nu * half.ln() - ln_gamma(nu + 1.0) - z;
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..1000 {
        let kf = k as f64;
        term *= q / ((kf + 1.0) * (nu + kf + 1.0));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    // Γ(ν+1) < 0 for ν in (-1, 0) never happens; ln_gamma is of |Γ|.
    log_first.exp() * sum
}

fn bessel_i_asymptotic_scaled(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (8.0 * kf * z);
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * z).sqrt()
}

/// Modified Struve function `L_ν(z)` by its power series.
pub fn struve_l(nu: f64, z: f64) -> f64 {
    assert!(z >= 0.0, "struve_l needs z >= 0, got {z}");
    if z == 0.0 {
        return 0.0;
    }
    let half = 0.5 * z;
    let q = half * half;
    // k = 0 term: (z/2)^{ν+1} / (Γ(3/2) Γ(ν + 3/2)).
    let mut term = half.powf(nu + 1.0) * rgamma(1.5) * rgamma(nu + 1.5);
    let mut sum = term;
    for k in 0..1000 {
        let kf = k as f64;
        term *= q / ((kf + 1.5) * (nu + kf + 1.5));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Parameters of a scalar `ₚF_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarHypParams {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl ScalarHypParams {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = b.iter().find(|&&x| is_nonpositive_integer(x)) {
            return Err(Error::Pole(format!("denominator parameter {bad}")));
        }
        if a.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite parameter".into()));
        }
        Ok(Self { a, b })
    }

    /// Every parameter shifted by `s`.
    pub fn shifted(&self, s: f64) -> Result<Self> {
        Self::new(
            self.a.iter().map(|x| x + s).collect(),
            self.b.iter().map(|x| x + s).collect(),
        )
    }
}

pub const SCALAR_TERM_CAP: usize = 500;
pub const DEFAULT_TOL: f64 = 1e-12;

fn terminates(a: &[f64]) -> bool {
    a.iter().any(|&x| is_nonpositive_integer(x))
}

fn hyp_series(a: &[f64], b: &[f64], z: f64, tol: f64, cap: usize) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut quiet = 0;
    for n in 0..cap {
        let nf = n as f64;
        let mut r = z / (nf + 1.0);
        for &ai in a {
            r *= ai + nf;
        }
        for &bj in b {
            r /= bj + nf;
        }
        term *= r;
        sum += term;
        if !sum.is_finite() {
            return Err(Error::NonConverged { terms: n + 1, tail: f64::INFINITY });
        }
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= tol * sum.abs() {
            quiet += 1;
            if quiet == 2 {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConverged { terms: cap, tail: term.abs() })
}

/// Large-negative-argument expansion of `₁F₁(a; b; -x)`, dropping the
/// exponentially small `e^{-x}` branch. `None` when it cannot reach `tol`.
fn hyp1f1_asymptotic_neg(a: f64, b: f64, x: f64, tol: f64) -> Option<f64> {
    let pref = gamma(b) * rgamma(b - a) * x.powf(-a);
    if pref == 0.0 {
        return None;
    }
    let c = 1.0 + a - b;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for s in 0..200 {
        let sf = s as f64;
        term *= (a + sf) * (c + sf) / ((sf + 1.0) * x);
        if term == 0.0 {
            return Some(pref * sum);
        }
        if term.abs() >= prev {
            return None;
        }
        sum += term;
        prev = term.abs();
        if term.abs() <= tol * sum.abs() {
            return Some(pref * sum);
        }
    }
    None
}

/// Scalar generalized hypergeometric function `ₚF_q(a; b; z)`.
pub fn hyp_scalar(params: &ScalarHypParams, z: f64, tol: f64) -> Result<f64> {
    let (a, b) = (&params.a[..], &params.b[..]);
    let (p, q) = (a.len(), b.len());
    if z == 0.0 {
        return Ok(1.0);
    }
    if !terminates(a) {
        if p > q + 1 {
            return Err(Error::Divergence(format!("{p}F{q} with p > q + 1")));
        }
        if p == q + 1 && z.abs() >= 1.0 {
            return Err(Error::Divergence(format!("{p}F{q} at |z| = {} >= 1", z.abs())));
        }
    }
    if p == 1 && q == 1 {
        return hyp1f1(a[0], b[0], z, tol);
    }
    hyp_series(a, b, z, tol, SCALAR_TERM_CAP)
}

fn hyp1f1(a: f64, b: f64, z: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(z.exp());
    }
    if z < 0.0 && !terminates(&[a]) {
        let x = -z;
        if x > 50.0 {
            if let Some(v) = hyp1f1_asymptotic_neg(a, b, x, tol) {
                return Ok(v);
            }
        }
        // Kummer: e^z ₁F₁(b - a; b; -z), free of cancellation when b - a ≥ 0.
        if x > 30.0 || (x > 1.0 && b - a >= 0.0) {
            let cap = SCALAR_TERM_CAP.max((x + 20.0 * x.sqrt()) as usize + 50);
            return Ok(z.exp() * hyp_series(&[b - a], &[b], x, tol, cap)?);
        }
    }
    hyp_series(&[a], &[b], z, tol, SCALAR_TERM_CAP)
}

/// Determinantal value together with a flag telling whether the spectrum was
/// perturbed to get away from a repeated eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetValue {
    pub value: f64,
    pub jittered: bool,
}

/// Relative gap below which equal eigenvalues are pulled apart.
pub const JITTER_GAP_TOL: f64 = 1e-7;

/// Groups of (sorted-descending) indices whose consecutive gaps are below the threshold.
fn clusters(x: &[f64], thresh: f64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[j].total_cmp(&x[i]));
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &i in &idx {
        match out.last_mut() {
            Some(c) if x[*c.last().unwrap()] - x[i] < thresh => c.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Evaluates a symmetric function `f` of `x` that is only defined for distinct
/// entries. Near-coincident entries are spread symmetrically about their mean
/// by `±h` and `±2h`, and the two evaluations are combined by Richardson
/// extrapolation, which cancels the even `O(h²)` error.
pub fn with_jitter<F>(x: &[f64], mut f: F) -> Result<DetValue>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let scale = max_abs(x);
    let groups = clusters(x, JITTER_GAP_TOL * scale);
    if scale == 0.0 || groups.iter().all(|g| g.len() == 1) {
        if scale == 0.0 && x.len() > 1 {
            return Err(Error::Domain("all eigenvalues vanish".into()));
        }
        return Ok(DetValue { value: f(x)?, jittered: false });
    }
    let largest = groups.iter().map(Vec::len).max().unwrap();
    // Balances the O(h^4) remainder against cancellation in V(x) ~ h^{n(n-1)/2}.
    let pairs = (largest * (largest - 1) / 2) as f64;
    let h = scale * f64::EPSILON.powf(1.0 / (pairs + 4.0));
    let spread = |step: f64| -> Vec<f64> {
        let mut y = x.to_vec();
        for g in &groups {
            if g.len() < 2 {
                continue;
            }
            let mean = g.iter().map(|&i| x[i]).sum::<f64>() / g.len() as f64;
            let mid = (g.len() - 1) as f64 / 2.0;
            for (r, &i) in g.iter().enumerate() {
                y[i] = mean + step * (mid - r as f64);
            }
        }
        y
    };
    let f1 = f(&spread(h))?;
    let f2 = f(&spread(2.0 * h))?;
    Ok(DetValue { value: (4.0 * f1 - f2) / 3.0, jittered: true })
}

/// Matrix `ₚF_q(a; b; X)` by the determinantal formula
/// `det(x_i^{m-j} ₚF_q(a - j + 1; b - j + 1; x_i)) / V(x)`.
pub fn gross_richards(params: &ScalarHypParams, x: &[f64], tol: f64) -> Result<DetValue> {
    let m = x.len();
    if m == 0 {
        return Err(Error::Domain("empty spectrum".into()));
    }
    if max_abs(x) == 0.0 {
        return Ok(DetValue { value: 1.0, jittered: false });
    }
    let shifted: Vec<ScalarHypParams> =
        (0..m).map(|j| params.shifted(-(j as f64))).collect::<Result<_>>()?;
    with_jitter(x, |y| {
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                let pw = y[i].powi((m - 1 - j) as i32);
                a[i * m + j] = pw * hyp_scalar(&shifted[j], y[i], tol)?;
            }
        }
        Ok(det_in_place(&mut a, m) / vandermonde(y))
    })
}

/// Two-argument `ₚF_q(m + μ; m + φ; B, C)` through the scalar kernel
/// `ₚF_q(μ + 1; φ + 1; b_l c_f)`.
pub fn two_matrix_determinantal(mu: &[f64], phi: &[f64], bx: &[f64], cx: &[f64], tol: f64) -> Result<DetValue> {
    let m = bx.len();
    if cx.len() != m || m == 0 {
        return Err(Error::Domain("spectra of different sizes".into()));
    }
    if mu.iter().chain(phi).any(|&v| v <= -1.0) {
        return Err(Error::Domain("parameters must exceed -1".into()));
    }
    if max_abs(bx) == 0.0 || max_abs(cx) == 0.0 {
        return Ok(DetValue { value: 1.0, jittered: false });
    }
    let (p, q) = (mu.len() as f64, phi.len() as f64);
    let mf = m as f64;
    let mut pref = PI.powf(mf * (mf - 1.0) * (p - q - 1.0) / 2.0) * gamma_multivariate(mf, m)?;
    for &u in mu {
        pref *= gamma(u + 1.0).powi(m as i32) / gamma_multivariate(mf + u, m)?;
    }
    for &f in phi {
        pref *= gamma_multivariate(mf + f, m)? / gamma(f + 1.0).powi(m as i32);
    }
    let kernel = ScalarHypParams::new(
        mu.iter().map(|u| u + 1.0).collect(),
        phi.iter().map(|f| f + 1.0).collect(),
    )?;
    let mut jittered = false;
    let outer = with_jitter(bx, |b| {
        let inner = with_jitter(cx, |c| {
            let mut a = vec![0.0; m * m];
            for l in 0..m {
                for f in 0..m {
                    a[l * m + f] = hyp_scalar(&kernel, b[l] * c[f], tol)?;
                }
            }
            Ok(det_in_place(&mut a, m) / (vandermonde(b) * vandermonde(c)))
        })?;
        jittered |= inner.jittered;
        Ok(inner.value)
    })?;
    Ok(DetValue { value: pref * outer.value, jittered: jittered || outer.jittered })
}

/// Harish-Chandra / Itzykson–Zuber form of `₀F₀(B, C)`.
pub fn harish_chandra_0f0(bx: &[f64], cx: &[f64]) -> Result<DetValue> {
    two_matrix_determinantal(&[], &[], bx, cx, DEFAULT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::{hyp_matrix_series, hyp_matrix_series_two, SeriesOptions};

    fn params(a: &[f64], b: &[f64]) -> ScalarHypParams {
        ScalarHypParams::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn multivariate_gamma_examples() {
        assert!((gamma_multivariate(3.3, 1).unwrap() - gamma(3.3)).abs() < 1e-12);
        assert!((gamma_multivariate(2.0, 2).unwrap() - PI).abs() < 1e-14);
        let nu = 0.7;
        let r = gamma_multivariate(2.0, 2).unwrap() / gamma_multivariate(2.0 + nu, 2).unwrap();
        let expected = 1.0 / (gamma(2.0 + nu) * gamma(1.0 + nu));
        assert!((r - expected).abs() < 1e-14);
        assert!(matches!(gamma_multivariate(1.0, 2), Err(Error::Pole(_))));
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_i(0.0, 0.0), 1.0);
        let closed = (2.0 / PI).sqrt() * 1f64.sinh();
        assert!((bessel_i(0.5, 1.0) - closed).abs() < 1e-14);
        assert!((bessel_i(1.0, 1e-8) / 1e-8 - 0.5).abs() < 1e-12);
        assert!((bessel_i(-1.0, 2.3) - bessel_i(1.0, 2.3)).abs() < 1e-14);
        // I_{-1/2}(z) = sqrt(2/(πz)) cosh z.
        let z = 3.1;
        let c = (2.0 / (PI * z)).sqrt() * z.cosh();
        assert!((bessel_i(-0.5, z) - c).abs() < 1e-12 * c);
    }

    #[test]
    fn bessel_branches_agree_at_switch() {
        for nu in [0.0, 0.25, 1.0, 2.0, 3.5] {
            for z in [29.0f64, 30.5, 45.0, 80.0] {
                let closed = if nu == 0.5 { Some((2.0 / (PI * z)).sqrt() * z.sinh()) } else { None };
                let s = bessel_i_scaled(nu, z);
                // Wronskian-type check I_{ν-1} - I_{ν+1} = 2ν/z I_ν.
                let lhs = bessel_i_scaled(nu - 1.0, z) - bessel_i_scaled(nu + 1.0, z);
                assert!((lhs - 2.0 * nu / z * s).abs() < 1e-13, "nu={nu} z={z}");
                if let Some(c) = closed {
                    assert!((s * z.exp() - c).abs() < 1e-12 * c);
                }
            }
        }
        let c = (2.0 / (PI * 40.0)).sqrt() * 40f64.sinh();
        assert!((bessel_i(0.5, 40.0) - c).abs() < 1e-13 * c);
    }

    #[test]
    fn struve_small_argument() {
        assert_eq!(struve_l(2.0, 0.0), 0.0);
        let z: f64 = 1e-3;
        let lead = z.powi(3) / (gamma(1.5) * gamma(3.5) * 8.0);
        assert!((struve_l(2.0, z) - lead).abs() < 1e-6 * lead);
        // L_{1/2}(z) = sqrt(2/(πz)) (cosh z - 1).
        let z = 2.2;
        let c = (2.0 / (PI * z)).sqrt() * (z.cosh() - 1.0);
        assert!((struve_l(0.5, z) - c).abs() < 1e-13);
    }

    #[test]
    fn scalar_hyp_examples() {
        assert!((hyp_scalar(&params(&[1.3], &[1.3]), -2.0, 1e-14).unwrap() - (-2f64).exp()).abs() < 1e-15);
        let v = hyp_scalar(&params(&[], &[1.5]), 0.25, 1e-14).unwrap();
        assert!((v - 1f64.sinh()).abs() < 1e-13);
        assert_eq!(hyp_scalar(&params(&[0.5], &[1.0, 2.0]), 0.0, 1e-12).unwrap(), 1.0);
        assert!(ScalarHypParams::new(vec![], vec![-2.0]).is_err());
    }

    #[test]
    fn kummer_branch_matches_incomplete_gamma() {
        // γ(a, x)/Γ(a) = x^a e^{-x}/Γ(a+1) ₁F₁(1; a+1; x) = x^a/Γ(a+1) ₁F₁(a; a+1; -x)
        for &a in &[0.3, 0.5, 0.9] {
            for &x in &[0.5, 5.0, 31.0, 60.0, 400.0] {
                let f = hyp_scalar(&params(&[a], &[a + 1.0]), -x, 1e-14).unwrap();
                let v = x.powf(a) / gamma(a + 1.0) * f;
                let p = crate::numeric::gamma_lr(a, x);
                assert!((v - p).abs() < 1e-11, "a={a} x={x} {v} {p}");
            }
        }
    }

    #[test]
    fn gross_richards_simple_cases() {
        let x = [0.9, 0.2];
        let v = gross_richards(&params(&[], &[]), &x, 1e-14).unwrap();
        assert!((v.value - 1.1f64.exp()).abs() < 1e-13);
        assert!(!v.jittered);
        let one = gross_richards(&params(&[], &[2.5]), &[0.7], 1e-14).unwrap();
        let s = hyp_scalar(&params(&[], &[2.5]), 0.7, 1e-14).unwrap();
        assert!((one.value - s).abs() < 1e-15);
    }

    #[test]
    fn gross_richards_matches_series_pinned_case() {
        let nu = 0.5;
        let x = [-1.0, -0.5];
        let p = params(&[nu], &[2.0 + nu]);
        let det = gross_richards(&p, &x, 1e-14).unwrap().value;
        let ser = hyp_matrix_series(&[nu], &[2.0 + nu], &x, SeriesOptions { tol: 1e-10, max_weight: 60 })
            .unwrap()
            .value;
        assert!((det - ser).abs() < 1e-9 * ser.abs(), "{det} vs {ser}");
    }

    #[test]
    fn jitter_handles_repeated_eigenvalues() {
        let p = params(&[0.7], &[3.2]);
        let x = [0.4, 0.4, 0.1];
        let det = gross_richards(&p, &x, 1e-14).unwrap();
        assert!(det.jittered);
        let ser = hyp_matrix_series(&[0.7], &[3.2], &x, SeriesOptions::default()).unwrap().value;
        assert!((det.value - ser).abs() < 1e-8 * ser.abs(), "{} vs {ser}", det.value);
    }

    #[test]
    fn harish_chandra_examples() {
        let v = harish_chandra_0f0(&[0.8], &[0.5]).unwrap();
        assert!((v.value - 0.4f64.exp()).abs() < 1e-14);
        let v = harish_chandra_0f0(&[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((v.value - (1f64.exp() - 1.0)).abs() < 1e-14);
        let b = [0.9, 0.35];
        let c = [0.6, 0.15];
        let hc = harish_chandra_0f0(&b, &c).unwrap().value;
        let ser = hyp_matrix_series_two(&[], &[], &b, &c, SeriesOptions::default()).unwrap().value;
        assert!((hc - ser).abs() < 1e-10 * ser);
    }

    #[test]
    fn two_matrix_bessel_kernel() {
        // ₀F₁(m + ν; B, C) with the scalar kernel ₀F₁(ν + 1; b c).
        let nu = 0.5;
        let b = [0.7, 0.3];
        let c = [0.5, 0.2];
        let det = two_matrix_determinantal(&[], &[nu], &b, &c, 1e-14).unwrap().value;
        let ser = hyp_matrix_series_two(&[], &[2.0 + nu], &b, &c, SeriesOptions::default()).unwrap().value;
        assert!((det - ser).abs() < 1e-10 * ser);
        let zero = two_matrix_determinantal(&[], &[nu], &[0.0, 0.0], &c, 1e-14).unwrap();
        assert_eq!(zero.value, 1.0);
    }
}
