//! Density of the `m = 2` generalized Hartman–Watson law by contour quadrature.
//!
//! The numerator `∫_0^∞ e^{-2(y²-π²)/v} sin(4πy/v) sinh(y) K(c cosh y) dy` is
//! `Im ∫_0^∞ F(y) dy` with `F(y) = e^{-2(y-iπ)²/v} sinh(y) K(c cosh y)`.
//! `F` is entire and `F dy` is real on `[0, iπ]`, so the real half-line is
//! traded for the segment `iπ → π` (where the Gaussian factor is a pure phase)
//! followed by `[π, ∞)` (where it decays from 1). This avoids the `e^{2π²/v}`
//! cancellation of the original integral.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::quad::{self, GaussLegendre};
use crate::specfun::{bessel_i, bessel_i_scaled, hyp_scalar, struve_l, ScalarHypParams, JITTER_GAP_TOL};

/// Cell policy and tolerances for the oscillatory integrals.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// The real-axis piece stops once its envelope is below `envelope_cutoff · abs_tol`.
    pub envelope_cutoff: f64,
    pub max_subdivisions: usize,
    /// Cells of half a period of `sin(4πy/v)`; otherwise cells of fixed width.
    pub oscillation_aware: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-8, envelope_cutoff: 1e-3, max_subdivisions: 20_000, oscillation_aware: true }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.envelope_cutoff > 0.0) {
            return Err(Error::Config("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Config("max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

/// Point of evaluation: `λ1 ≥ λ2 > 0` are the eigenvalues of `√(xy)` at `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HwQuery {
    pub lambda1: f64,
    pub lambda2: f64,
    pub v: f64,
}

impl HwQuery {
    pub fn new(lambda1: f64, lambda2: f64, v: f64) -> Result<Self> {
        let (l1, l2) = (lambda1.max(lambda2), lambda1.min(lambda2));
        if !(l2 > 0.0) || !l1.is_finite() {
            return Err(Error::Domain(format!("eigenvalues must be positive, got ({lambda1}, {lambda2})")));
        }
        if !(v > 0.0) {
            return Err(Error::Domain(format!("v must be positive, got {v}")));
        }
        Ok(Self { lambda1: l1, lambda2: l2, v })
    }

    pub fn p(&self) -> f64 {
        self.lambda1 - self.lambda2
    }

    pub fn is_equal(&self) -> bool {
        self.p() < JITTER_GAP_TOL * self.lambda1
    }
}

/// `sinh(p s)/p`, continuous at `p = 0`.
fn sinh_over(p: f64, s: f64) -> f64 {
    let x = p * s;
    if x.abs() < 1e-4 {
        s * (1.0 + x * x / 6.0)
    } else {
        x.sinh() / p
    }
}

/// Size of the `θ`-panels for `K` at complex argument.
const KP_PANEL: f64 = 8.0;
const KP_ASYMPTOTIC: f64 = 400.0;

/// `K_p(ζ) = ∫_0^{π/2} cos θ sin θ sinh(p sin θ)/p e^{-ζ cos θ} dθ`, the inner
/// integral of the numerator after `z = cos θ`.
pub(crate) fn kp(p: f64, zeta: Complex64, gl: &GaussLegendre) -> Complex64 {
    if zeta.im == 0.0 {
        return Complex64::new(kp_real(p, zeta.re, gl), 0.0);
    }
    let panels = (zeta.norm() / KP_PANEL).ceil() as usize + 1;
    let h = FRAC_PI_2 / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        acc += gl.integrate_complex(k as f64 * h, (k + 1) as f64 * h, |th| {
            let (s, c) = th.sin_cos();
            (-zeta * c).exp() * (c * s * sinh_over(p, s))
        });
    }
    acc
}

fn kp_real(p: f64, zeta: f64, gl: &GaussLegendre) -> f64 {
    if zeta >= KP_ASYMPTOTIC {
        // Watson's lemma in z = cos θ.
        let (sh, ch) = (sinh_over(p, 1.0), p.cosh());
        let z2 = 1.0 / (zeta * zeta);
        return z2 * (sh - 3.0 * ch * z2 + 15.0 * (p * p * sh - ch) * z2 * z2);
    }
    if zeta >= 60.0 {
        // Mass sits within a few 1/ζ of z = 0.
        let top = 40.0 / zeta;
        let h = top / 4.0;
        return (0..4)
            .map(|k| {
                gl.integrate(k as f64 * h, (k + 1) as f64 * h, |z| {
                    z * sinh_over(p, (1.0 - z * z).sqrt()) * (-zeta * z).exp()
                })
            })
            .sum();
    }
    let panels = (zeta.abs() / KP_PANEL).ceil() as usize + 1;
    let h = FRAC_PI_2 / panels as f64;
    (0..panels)
        .map(|k| {
            gl.integrate(k as f64 * h, (k + 1) as f64 * h, |th| {
                let (s, c) = th.sin_cos();
                c * s * sinh_over(p, s) * (-zeta * c).exp()
            })
        })
        .sum()
}

/// `g(y)` of the equal-eigenvalue form at `w = 2λ cosh y`:
/// `∫_0^{π/2} cos θ sin²θ e^{-w cos θ} dθ = 1/3 - (π/2)(I_2(w) - L_2(w))/w`.
pub fn g_equal(w: f64) -> f64 {
    if w == 0.0 {
        return 1.0 / 3.0;
    }
    if w <= 6.0 {
        return 1.0 / 3.0 - FRAC_PI_2 * (bessel_i(2.0, w) - struve_l(2.0, w)) / w;
    }
    kp_real(0.0, w, &GaussLegendre::new(20))
}

/// `A_0 = ∫_0^1 ∫_0^{π/2} u cosh(p u cos θ) I_0(c u sin θ) dθ du`, the
/// denominator after `x = sin θ`, by a 32×32 Gauss–Legendre product rule.
pub fn hw_denominator(lambda1: f64, lambda2: f64) -> f64 {
    let (p, c) = ((lambda1 - lambda2).abs(), 2.0 * (lambda1 * lambda2).sqrt());
    let gl = GaussLegendre::new(32);
    gl.integrate(0.0, 1.0, |u| {
        u * gl.integrate(0.0, FRAC_PI_2, |th| {
            let (s, co) = th.sin_cos();
            (p * u * co).cosh() * bessel_i(0.0, c * u * s)
        })
    })
}

/// Closed form of [`hw_denominator`]:
/// `(π/2)(λ1 I_1(λ1) I_0(λ2) - λ2 I_1(λ2) I_0(λ1))/(λ1² - λ2²)`, and
/// `(π/4) ₁F₂(1/2; 1, 2; λ²)` for equal eigenvalues.
pub fn hw_denominator_closed(lambda1: f64, lambda2: f64) -> Result<f64> {
    let (l1, l2) = (lambda1.max(lambda2), lambda1.min(lambda2));
    if l1 - l2 < JITTER_GAP_TOL * l1 {
        let l = 0.5 * (l1 + l2);
        let f = hyp_scalar(&ScalarHypParams::new(vec![0.5], vec![1.0, 2.0])?, l * l, 1e-15)?;
        return Ok(0.25 * PI * f);
    }
    let i = bessel_i_scaled;
    let num = l1 * i(1.0, l1) * i(0.0, l2) - l2 * i(1.0, l2) * i(0.0, l1);
    Ok(FRAC_PI_2 * num * (l1 + l2).exp() / ((l1 - l2) * (l1 + l2)))
}

/// Value together with the cell counts used to compute it.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HwValue {
    pub value: f64,
    pub diagonal_cells: usize,
    pub axis_cells: usize,
    pub y_max: f64,
}

/// Fixed `(λ1, λ2)`: caches the constants shared by every `v`.
#[derive(Debug, Clone)]
pub struct HwDensity {
    lambda1: f64,
    lambda2: f64,
    p: f64,
    c: f64,
    a0: f64,
    equal: bool,
    spec: QuadratureSpec,
    gl_cell: GaussLegendre,
    gl_kp: GaussLegendre,
}

const CELL_NODES: usize = 16;
const AXIS_MAX_CELL: f64 = 0.5;
const DIAGONAL_MAX_CELL: f64 = 0.25;

/// Splits every interval of `cuts` into equal pieces no wider than `width`.
fn refine(cuts: &[f64], width: f64) -> Vec<f64> {
    let mut out = vec![cuts[0]];
    for w in cuts.windows(2) {
        let n = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / n as f64;
        out.extend((1..n).map(|k| w[0] + k as f64 * h));
        out.push(w[1]);
    }
    out
}

impl HwDensity {
    pub fn new(lambda1: f64, lambda2: f64, spec: QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let q = HwQuery::new(lambda1, lambda2, 1.0)?;
        let equal = q.is_equal();
        let (l1, l2) = if equal {
            let l = 0.5 * (q.lambda1 + q.lambda2);
            (l, l)
        } else {
            (q.lambda1, q.lambda2)
        };
        let a0 = if equal { hw_denominator_closed(l1, l2)? } else { hw_denominator(l1, l2) };
        Ok(Self {
            lambda1: l1,
            lambda2: l2,
            p: l1 - l2,
            c: 2.0 * (l1 * l2).sqrt(),
            a0,
            equal,
            spec,
            gl_cell: GaussLegendre::new(CELL_NODES),
            gl_kp: GaussLegendre::new(20),
        })
    }

    pub fn lambdas(&self) -> (f64, f64) {
        (self.lambda1, self.lambda2)
    }

    pub fn is_equal(&self) -> bool {
        self.equal
    }

    pub fn denominator(&self) -> f64 {
        self.a0
    }

    fn kernel_real(&self, y: f64) -> f64 {
        let w = self.c * y.cosh();
        if self.equal && w <= 6.0 {
            return g_equal(w);
        }
        kp_real(self.p, w, &self.gl_kp)
    }

    /// `c / (2 √(2π³ v) A_0)`.
    fn prefactor(&self, v: f64) -> f64 {
        self.c / (2.0 * (2.0 * PI.powi(3) * v).sqrt() * self.a0)
    }

    /// Density at `v > 0`.
    pub fn density(&self, v: f64) -> Result<HwValue> {
        if !(v > 0.0) {
            return Err(Error::Domain(format!("v must be positive, got {v}")));
        }
        let pref = self.prefactor(v);
        let cap = self.spec.max_subdivisions;

        // Segment y = x + i(π - x), x ∈ [0, π]; the Gaussian factor is e^{4ix²/v}.
        let mut cuts = vec![0.0];
        if self.spec.oscillation_aware {
            let mut k = 1.0;
            loop {
                let x = (k * PI * v / 4.0).sqrt();
                if x >= PI {
                    break;
                }
                cuts.push(x);
                k += 1.0;
                if cuts.len() > cap {
                    return Err(Error::Quadrature(format!("v = {v}: diagonal needs more than {cap} cells")));
                }
            }
        } else {
            cuts.extend((1..16).map(|k| k as f64 * PI / 16.0));
        }
        cuts.push(PI);
        let cuts = refine(&cuts, DIAGONAL_MAX_CELL);
        let one_minus_i = Complex64::new(1.0, -1.0);
        let mut diag = NeumaierSum::new();
        for w in cuts.windows(2) {
            let part = self.gl_cell.integrate_complex(w[0], w[1], |x| {
                let y = Complex64::new(x, PI - x);
                let phase = Complex64::new(0.0, 4.0 * x * x / v).exp();
                phase * y.sinh() * kp(self.p, self.c * y.cosh(), &self.gl_kp) * one_minus_i
            });
            diag.add(part.im);
        }

        // Real half-line from π: e^{-2(y² - π²)/v} sin(4πy/v) sinh y K(c cosh y).
        let width = if self.spec.oscillation_aware { (v / 4.0).min(AXIS_MAX_CELL) } else { AXIS_MAX_CELL };
        let stop = self.spec.envelope_cutoff * self.spec.abs_tol;
        let mut axis = NeumaierSum::new();
        let mut a = PI;
        let mut cells = 0;
        loop {
            let env = (-2.0 * (a * a - PI * PI) / v).exp() * a.sinh() * self.kernel_real(a);
            if cells > 0 && pref * env * v < stop {
                break;
            }
            if cells >= cap {
                return Err(Error::Quadrature(format!("v = {v}: axis needs more than {cap} cells")));
            }
            let b = a + width;
            axis.add(self.gl_cell.integrate(a, b, |y| {
                (-2.0 * (y * y - PI * PI) / v).exp() * (4.0 * PI * y / v).sin() * y.sinh() * self.kernel_real(y)
            }));
            a = b;
            cells += 1;
        }
        Ok(HwValue {
            value: pref * (diag.value() + axis.value()),
            diagonal_cells: cuts.len() - 1,
            axis_cells: cells,
            y_max: a,
        })
    }

    /// `∫ y^k sinh(y) c K(c cosh y) dy` over `[0, ∞)` for `k = 1, 3, 5`.
    pub fn tail_moments(&self) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (slot, k) in out.iter_mut().zip([1, 3, 5]) {
            let r = quad::adaptive_points(
                |y| y.powi(k) * y.sinh() * self.c * self.kernel_real(y),
                &[0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0],
                1e-14,
                1e-12,
                4000,
            )?;
            *slot = r.value;
        }
        Ok(out)
    }

    /// Coefficients of `f(v) ≈ Σ_j b_j v^{-(2j+1)/2}` for large `v`, with the
    /// prefactor folded in.
    fn tail_coefficients(&self) -> Result<[f64; 3]> {
        let [m1, m3, m5] = self.tail_moments()?;
        let k0 = 1.0 / (2.0 * (2.0 * PI.powi(3)).sqrt() * self.a0);
        let pi3 = PI.powi(3);
        Ok([
            k0 * 4.0 * PI * m1,
            k0 * (8.0 * pi3 * m1 - 8.0 * PI * m3),
            k0 * (8.0 * PI.powi(5) * m1 + 8.0 * PI * m5 - 80.0 / 3.0 * pi3 * m3),
        ])
    }

    /// `∫_0^∞ e^{-s v} f(v) dv` for each `s ≥ 0`. `s = 0` is the total mass.
    pub fn laplace(&self, s: &[f64]) -> Result<Vec<f64>> {
        if s.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::Domain("Laplace arguments must be nonnegative".into()));
        }
        // f is below 1e-20 on (0, V_LO]; beyond V_HI the three-term expansion is used.
        const V_LO: f64 = 0.04;
        const V_HI: f64 = 400.0;
        const PANELS: usize = 64;
        let gl = GaussLegendre::new(20);
        let (w0, w1) = (V_LO.ln(), V_HI.ln());
        let h = (w1 - w0) / PANELS as f64;
        let mut sums: Vec<NeumaierSum> = s.iter().map(|_| NeumaierSum::new()).collect();
        for k in 0..PANELS {
            let a = w0 + k as f64 * h;
            for (w, wt) in gl.mapped(a, a + h) {
                let v = w.exp();
                let f = self.density(v)?.value * v * wt;
                for (acc, &si) in sums.iter_mut().zip(s) {
                    acc.add((-si * v).exp() * f);
                }
            }
        }
        let b = self.tail_coefficients()?;
        let mut out = Vec::with_capacity(s.len());
        for (acc, &si) in sums.iter().zip(s) {
            let tail = if si == 0.0 {
                2.0 * b[0] * V_HI.powf(-0.5) + (2.0 / 3.0) * b[1] * V_HI.powf(-1.5) + 0.4 * b[2] * V_HI.powf(-2.5)
            } else {
                quad::adaptive_to_infinity(
                    |v| (-si * v).exp() * (b[0] * v.powf(-1.5) + b[1] * v.powf(-2.5) + b[2] * v.powf(-3.5)),
                    V_HI,
                    1e-14,
                    1e-10,
                )?
                .value
            };
            out.push(acc.value() + tail);
        }
        Ok(out)
    }
}

/// Density of the `m = 2` law for distinct eigenvalues of `√(xy)`.
pub fn hw_density_m2(q: &HwQuery, spec: &QuadratureSpec) -> Result<HwValue> {
    if q.is_equal() {
        return Err(Error::Domain("eigenvalues coincide; use hw_density_equal".into()));
    }
    HwDensity::new(q.lambda1, q.lambda2, *spec)?.density(q.v)
}

/// Density for the confluent case `λ1 = λ2 = λ`.
pub fn hw_density_equal(lambda: f64, v: f64, spec: &QuadratureSpec) -> Result<HwValue> {
    HwDensity::new(lambda, lambda, *spec)?.density(v)
}

/// Either branch, chosen by the relative gap of the eigenvalues.
pub fn hw_density(q: &HwQuery, spec: &QuadratureSpec) -> Result<HwValue> {
    HwDensity::new(q.lambda1, q.lambda2, *spec)?.density(q.v)
}

/// `∫ e^{-ν² v/2} f(v) dv` for each `ν`, by quadrature of the density.
pub fn hw_laplace_numeric(lambda1: f64, lambda2: f64, nus: &[f64], spec: &QuadratureSpec) -> Result<Vec<f64>> {
    let s: Vec<f64> = nus.iter().map(|n| 0.5 * n * n).collect();
    HwDensity::new(lambda1, lambda2, *spec)?.laplace(&s)
}

/// Tail moments `M_1, M_3, M_5` used for the large-`v` expansion.
pub fn hw_tail_moments(lambda1: f64, lambda2: f64) -> Result<[f64; 3]> {
    HwDensity::new(lambda1, lambda2, QuadratureSpec::default())?.tail_moments()
}
