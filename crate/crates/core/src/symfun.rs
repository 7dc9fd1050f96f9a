//! Partitions, Schur and zonal polynomials, generalized Pochhammer symbols and
//! matrix-argument hypergeometric series.
//!
//! Zonal polynomials follow the complex normalization
//! `C_τ(X) = k! d_τ / (m)_τ · s_τ(x)`, so that `Σ_{|τ|=k} C_τ(X) = (tr X)^k`.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::numeric::{det_in_place, is_nonpositive_integer, NeumaierSum};

/// An integer partition with non-increasing parts. Trailing zeros are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain(format!("parts not non-increasing: {parts:?}")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Self { parts })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Nonzero parts, largest first.
    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Part `i` (0-based), zero past the length.
    pub fn part(&self, i: usize) -> u32 {
        self.parts.get(i).copied().unwrap_or(0)
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn conjugate(&self) -> Partition {
        let n = self.part(0) as usize;
        let parts = (1..=n as u32)
            .map(|j| self.parts.iter().filter(|&&p| p >= j).count() as u32)
            .collect();
        Partition { parts }
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Real spectrum sorted in non-increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumVector {
    values: Vec<f64>,
}

impl SpectrumVector {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty spectrum".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite eigenvalue".into()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    /// Smallest gap between consecutive entries (infinite for m = 1).
    pub fn min_gap(&self) -> f64 {
        min_gap(&self.values)
    }
}

impl Deref for SpectrumVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

pub(crate) fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Smallest pairwise distance between entries, in any order.
pub(crate) fn min_gap(x: &[f64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            g = g.min((x[i] - x[j]).abs());
        }
    }
    g
}

/// All partitions of `k` with at most `m` parts, lexicographically decreasing.
pub fn enumerate_partitions(k: u32, m: usize) -> Vec<Partition> {
    fn rec(rem: u32, max_part: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        if slots == 0 {
            return;
        }
        for p in (1..=rem.min(max_part)).rev() {
            // The remaining slots must be able to absorb what is left.
            if (p as u64) * (slots as u64) < rem as u64 {
                break;
            }
            cur.push(p);
            rec(rem - p, p, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, k, m, &mut Vec::new(), &mut out);
    out
}

/// Generalized Pochhammer symbol `(a)_τ = Π_i (a - i + 1)_{τ_i}` over `m` rows.
///
/// The product of rising factorials is entire in `a`; only non-finite input or
/// a partition longer than `m` is rejected. A vanishing value signals that a
/// gamma ratio in the quotient form has a pole in its denominator.
pub fn gen_pochhammer(a: f64, tau: &Partition, m: usize) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::Pole(format!("non-finite parameter {a}")));
    }
    if tau.len() > m {
        return Err(Error::Domain(format!("partition {tau} longer than m = {m}")));
    }
    let mut r = 1.0;
    for (i, &k) in tau.parts().iter().enumerate() {
        let base = a - i as f64;
        for j in 0..k {
            r *= base + j as f64;
        }
    }
    Ok(r)
}

/// Relative gap below which the bialternant gives way to Jacobi–Trudi.
pub const SCHUR_GAP_TOL: f64 = 1e-2;

/// Schur polynomial `s_τ(x)`.
pub fn schur(tau: &Partition, x: &[f64]) -> f64 {
    let m = x.len();
    if tau.len() > m {
        return 0.0;
    }
    if tau.is_empty() {
        return 1.0;
    }
    if m == 1 {
        return x[0].powi(tau.part(0) as i32);
    }
    let scale = max_abs(x);
    if scale == 0.0 || min_gap(x) < SCHUR_GAP_TOL * scale {
        schur_jacobi_trudi(tau, x)
    } else {
        schur_bialternant(tau, x)
    }
}

/// `det(x_i^{τ_j + m - j}) / det(x_i^{m - j})`. Undefined for repeated entries.
pub fn schur_bialternant(tau: &Partition, x: &[f64]) -> f64 {
    let m = x.len();
    let mut num = vec![0.0; m * m];
    let mut den = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let shift = (m - 1 - j) as i32;
            num[i * m + j] = x[i].powi(tau.part(j) as i32 + shift);
            den[i * m + j] = x[i].powi(shift);
        }
    }
    det_in_place(&mut num, m) / det_in_place(&mut den, m)
}

/// Complete homogeneous symmetric polynomials `h_0..=h_n` of `x`.
pub fn complete_homogeneous(x: &[f64], n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n + 1];
    h[0] = 1.0;
    for &xi in x {
        for r in 1..=n {
            h[r] += xi * h[r - 1];
        }
    }
    h
}

/// `s_τ = det(h_{τ_i - i + j})`, free of any Vandermonde division.
pub fn schur_jacobi_trudi(tau: &Partition, x: &[f64]) -> f64 {
    let l = tau.len();
    if l == 0 {
        return 1.0;
    }
    let h = complete_homogeneous(x, tau.part(0) as usize + l);
    let mut a = vec![0.0; l * l];
    for i in 0..l {
        for j in 0..l {
            let idx = tau.part(i) as i64 - i as i64 + j as i64;
            a[i * l + j] = if idx < 0 { 0.0 } else { h[idx as usize] };
        }
    }
    det_in_place(&mut a, l)
}

/// `d_τ = s_τ(1, ..., 1)` by the hook-content product.
pub fn schur_dimension(tau: &Partition, m: usize) -> f64 {
    if tau.len() > m {
        return 0.0;
    }
    let mut d = 1.0;
    for i in 0..m {
        for j in i + 1..m {
            let num = tau.part(i) as f64 - tau.part(j) as f64 + (j - i) as f64;
            d *= num / (j - i) as f64;
        }
    }
    d
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Zonal polynomial `C_τ(X)` on the spectrum `x`.
pub fn zonal(tau: &Partition, x: &[f64]) -> Result<f64> {
    let m = x.len();
    let k = tau.weight();
    let poch = gen_pochhammer(m as f64, tau, m)?;
    Ok(factorial(k) * schur_dimension(tau, m) / poch * schur(tau, x))
}

/// Truncation policy for the weight-graded series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    pub tol: f64,
    pub max_weight: u32,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_weight: 60 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Absolute sum of the last weight layer included.
    pub tail: f64,
    /// Highest weight summed.
    pub weight: u32,
    pub converged: bool,
}

fn check_convergence_domain(p: usize, q: usize, radius: f64) -> Result<()> {
    if p > q + 1 {
        return Err(Error::Divergence(format!("p = {p} exceeds q + 1 = {}", q + 1)));
    }
    if p == q + 1 && radius >= 1.0 {
        return Err(Error::Divergence(format!("spectral radius {radius} not below 1")));
    }
    Ok(())
}

/// Coefficient `Π(a_i)_τ / Π(b_j)_τ`, or `None` when the numerator vanishes.
fn pochhammer_ratio(a: &[f64], b: &[f64], tau: &Partition, m: usize) -> Result<Option<f64>> {
    let mut num = 1.0;
    for &ai in a {
        num *= gen_pochhammer(ai, tau, m)?;
    }
    if num == 0.0 {
        return Ok(None);
    }
    let mut den = 1.0;
    for &bj in b {
        den *= gen_pochhammer(bj, tau, m)?;
    }
    if den == 0.0 {
        return Err(Error::Pole(format!("denominator parameters {b:?} vanish at {tau}")));
    }
    Ok(Some(num / den))
}

fn graded_sum<F>(opts: SeriesOptions, m: usize, mut term: F) -> Result<SeriesValue>
where
    F: FnMut(&Partition) -> Result<f64>,
{
    let mut acc = NeumaierSum::new();
    let mut quiet = 0;
    let mut tail = 0.0;
    for k in 0..=opts.max_weight {
        let mut layer = NeumaierSum::new();
        let mut layer_abs = 0.0;
        for tau in enumerate_partitions(k, m) {
            let t = term(&tau)?;
            layer.add(t);
            layer_abs += t.abs();
        }
        acc.add(layer.value());
        tail = layer_abs;
        if !acc.value().is_finite() {
            return Err(Error::NonConverged { terms: k as usize, tail: f64::INFINITY });
        }
        if k > 0 && layer_abs <= opts.tol * acc.value().abs() {
            quiet += 1;
            if quiet == 2 {
                return Ok(SeriesValue { value: acc.value(), tail, weight: k, converged: true });
            }
        } else {
            quiet = 0;
        }
    }
    let value = acc.value();
    if tail > opts.tol * value.abs() {
        return Err(Error::NonConverged { terms: opts.max_weight as usize, tail });
    }
    Ok(SeriesValue { value, tail, weight: opts.max_weight, converged: true })
}

/// `ₚF_q(a; b; X)` by the zonal expansion, grouped by total weight.
pub fn hyp_matrix_series(a: &[f64], b: &[f64], x: &[f64], opts: SeriesOptions) -> Result<SeriesValue> {
    let m = x.len();
    check_convergence_domain(a.len(), b.len(), max_abs(x))?;
    graded_sum(opts, m, |tau| {
        let Some(c) = pochhammer_ratio(a, b, tau, m)? else {
            return Ok(0.0);
        };
        let mpoch = gen_pochhammer(m as f64, tau, m)?;
        Ok(c * schur_dimension(tau, m) / mpoch * schur(tau, x))
    })
}

/// Two-argument series `Σ Π(a)_τ/Π(b)_τ · C_τ(B) C_τ(C) / (C_τ(I) k!)`.
pub fn hyp_matrix_series_two(
    a: &[f64],
    b: &[f64],
    bx: &[f64],
    cx: &[f64],
    opts: SeriesOptions,
) -> Result<SeriesValue> {
    let m = bx.len();
    if cx.len() != m {
        return Err(Error::Domain(format!("spectra of sizes {m} and {}", cx.len())));
    }
    check_convergence_domain(a.len(), b.len(), max_abs(bx) * max_abs(cx))?;
    graded_sum(opts, m, |tau| {
        let Some(c) = pochhammer_ratio(a, b, tau, m)? else {
            return Ok(0.0);
        };
        let mpoch = gen_pochhammer(m as f64, tau, m)?;
        Ok(c * schur(tau, bx) * schur(tau, cx) / mpoch)
    })
}

/// True if any denominator parameter sits on a gamma pole.
pub fn has_pole_parameter(b: &[f64]) -> bool {
    b.iter().any(|&x| is_nonpositive_integer(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn partitions_small_cases() {
        assert_eq!(enumerate_partitions(0, 3), vec![Partition::empty()]);
        assert_eq!(enumerate_partitions(3, 2), vec![p(&[3]), p(&[2, 1])]);
        assert_eq!(enumerate_partitions(4, 4).len(), 5);
        assert_eq!(enumerate_partitions(10, 10).len(), 42);
        assert_eq!(enumerate_partitions(6, 2).len(), 4);
    }

    #[test]
    fn partition_rejects_increasing_parts() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert_eq!(p(&[2, 1, 0, 0]).len(), 2);
        assert_eq!(p(&[3, 1]).conjugate(), p(&[2, 1, 1]));
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(gen_pochhammer(3.7, &Partition::empty(), 2).unwrap(), 1.0);
        assert_eq!(gen_pochhammer(2.0, &p(&[3]), 1).unwrap(), 24.0);
        assert_eq!(gen_pochhammer(3.0, &p(&[2, 1]), 2).unwrap(), 24.0);
        assert!(gen_pochhammer(f64::NAN, &p(&[1]), 1).is_err());
    }

    #[test]
    fn schur_examples() {
        let x = [0.3, -1.2, 2.5];
        assert!((schur(&p(&[1]), &x) - 1.6).abs() < 1e-14);
        assert!((schur(&p(&[2, 1]), &[2.0, 1.0]) - 6.0).abs() < 1e-12);
        assert!((schur(&p(&[2]), &[1.0, 1.0]) - 3.0).abs() < 1e-14);
        assert_eq!(schur(&p(&[1, 1, 1]), &[1.0, 2.0]), 0.0);
    }

    #[test]
    fn schur_near_coincidence_is_continuous() {
        let tau = p(&[3, 1]);
        let a = schur(&tau, &[1.0, 1.0 + 1e-10, 0.5]);
        let b = schur_jacobi_trudi(&tau, &[1.0, 1.0, 0.5]);
        assert!((a - b).abs() < 1e-8 * b.abs());
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(schur_dimension(&Partition::empty(), 4), 1.0);
        assert_eq!(schur_dimension(&p(&[2]), 2), 3.0);
        assert_eq!(schur_dimension(&p(&[2, 1]), 2), 2.0);
        for tau in enumerate_partitions(5, 3) {
            let jt = schur_jacobi_trudi(&tau, &[1.0; 3]);
            assert!((schur_dimension(&tau, 3) - jt).abs() < 1e-10);
        }
    }

    #[test]
    fn zonal_examples() {
        let x = [2.0, 1.0];
        assert!((zonal(&p(&[1]), &x).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(zonal(&Partition::empty(), &x).unwrap(), 1.0);
        let s: f64 = enumerate_partitions(2, 2).iter().map(|t| zonal(t, &x).unwrap()).sum();
        assert!((s - 9.0).abs() < 1e-12);
    }

    #[test]
    fn series_basic_identities() {
        let x = [0.7, -0.2, 0.4];
        let e = hyp_matrix_series(&[], &[], &x, SeriesOptions::default()).unwrap();
        assert!((e.value - 0.9f64.exp()).abs() < 1e-13);
        let z = hyp_matrix_series(&[], &[2.5], &[0.0, 0.0], SeriesOptions::default()).unwrap();
        assert_eq!(z.value, 1.0);
        // 0F1(2; z) = I_1(2 sqrt z) / sqrt z
        let s = hyp_matrix_series(&[], &[2.0], &[0.8], SeriesOptions::default()).unwrap();
        let exact = 1.0 + 0.8 / 2.0 + 0.64 / 12.0 + 0.512 / 144.0 + 0.4096 / 2880.0
            + 0.32768 / 86400.0 + 0.262144 / 3628800.0;
        assert!((s.value - exact).abs() < 1e-8);
    }

    #[test]
    fn series_divergence_rules() {
        let err = hyp_matrix_series(&[1.0, 1.0, 1.0], &[1.0], &[0.1], SeriesOptions::default());
        assert!(matches!(err, Err(Error::Divergence(_))));
        let err = hyp_matrix_series(&[1.0], &[], &[1.2, 0.1], SeriesOptions::default());
        assert!(matches!(err, Err(Error::Divergence(_))));
        let ok = hyp_matrix_series(&[1.0], &[], &[0.5], SeriesOptions::default()).unwrap();
        assert!((ok.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn series_reports_non_convergence() {
        let opts = SeriesOptions { tol: 1e-12, max_weight: 5 };
        let err = hyp_matrix_series(&[], &[1.0], &[5.0], opts);
        assert!(matches!(err, Err(Error::NonConverged { .. })));
    }

    #[test]
    fn two_argument_series_reduces() {
        let b = [0.6, 0.2];
        let opts = SeriesOptions::default();
        let one = hyp_matrix_series(&[0.5], &[3.0], &b, opts).unwrap();
        let two = hyp_matrix_series_two(&[0.5], &[3.0], &b, &[1.0, 1.0], opts).unwrap();
        assert!((one.value - two.value).abs() < 1e-10 * one.value.abs());
        let zero = hyp_matrix_series_two(&[0.5], &[3.0], &[0.0, 0.0], &[0.3, 0.2], opts).unwrap();
        assert_eq!(zero.value, 1.0);
    }

    #[test]
    fn denominator_pole_is_reported() {
        let err = hyp_matrix_series(&[], &[1.0], &[0.3, 0.1], SeriesOptions::default());
        assert!(matches!(err, Err(Error::Pole(_))));
    }
}
