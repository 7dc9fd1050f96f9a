//! Dense complex Hermitian matrices of small size with a spectral decomposition.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major `n x n` complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

/// Eigenvalues in non-increasing order; column `j` of `vectors` belongs to `values[j]`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Complex64>,
}

pub const HERMITIAN_TOL: f64 = 1e-12;

impl HermitianMatrix {
    /// Checks Hermiticity to [`HERMITIAN_TOL`] (relative to the largest entry)
    /// and then symmetrizes exactly.
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Config(format!("expected {} entries, got {}", n * n, data.len())));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Config("non-finite matrix entry".into()));
        }
        let scale = data.iter().fold(1.0f64, |s, z| s.max(z.norm()));
        for i in 0..n {
            for j in i..n {
                if (data[i * n + j] - data[j * n + i].conj()).norm() > HERMITIAN_TOL * scale {
                    return Err(Error::Config(format!("matrix not Hermitian at ({i}, {j})")));
                }
            }
        }
        let mut h = Self { n, data };
        h.symmetrize();
        Ok(h)
    }

    /// Wraps entries without checking Hermiticity.
    pub(crate) fn new_unchecked(n: usize, data: Vec<Complex64>) -> Self {
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut h = Self::zeros(n);
        for (i, &v) in d.iter().enumerate() {
            h.data[i * n + i] = Complex64::new(v, 0.0);
        }
        h
    }

    /// Real symmetric input in row-major order.
    pub fn from_real(n: usize, a: &[f64]) -> Result<Self> {
        Self::new(n, a.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `V diag(values) V^H` for a unitary `V` given column-wise.
    pub fn from_spectral(values: &[f64], vectors: &[Complex64]) -> Self {
        let n = values.len();
        let mut h = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += vectors[i * n + k] * values[k] * vectors[j * n + k].conj();
                }
                h.data[i * n + j] = s;
            }
        }
        h.symmetrize_from_upper();
        h
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.n + i].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag().iter().sum()
    }

    /// Replaces the matrix with `(A + A^H) / 2`.
    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in i + 1..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg.conj();
            }
        }
    }

    fn symmetrize_from_upper(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in i + 1..n {
                self.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let mut d = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                d = d.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        d
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// `Re tr(A B)` for Hermitian `A`, `B`.
    pub fn trace_product(&self, other: &Self) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for k in 0..n {
                s += (self.data[i * n + k] * other.data[k * n + i]).re;
            }
        }
        s
    }

    pub fn eigen(&self) -> Eigen {
        match self.n {
            1 => Eigen { values: vec![self.data[0].re], vectors: vec![Complex64::new(1.0, 0.0)] },
            2 => eigen_2x2(self.data[0].re, self.data[1], self.data[3].re),
            _ => eigen_jacobi(self),
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        match self.n {
            1 => vec![self.data[0].re],
            2 => {
                let (a, b, d) = (self.data[0].re, self.data[1], self.data[3].re);
                let mean = 0.5 * (a + d);
                let r = (0.5 * (a - d)).hypot(b.norm());
                vec![mean + r, mean - r]
            }
            _ => self.eigen().values,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("non-empty")
    }

    /// `f` applied to the spectrum.
    pub fn map_spectrum<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        let e = self.eigen();
        let v: Vec<f64> = e.values.iter().map(|&x| f(x)).collect();
        Self::from_spectral(&v, &e.vectors)
    }

    /// `max(X, 0)`.
    pub fn positive_part(&self) -> Self {
        self.map_spectrum(|x| x.max(0.0))
    }

    /// `sqrt(max(X, 0))`.
    pub fn sqrt_positive(&self) -> Self {
        self.map_spectrum(|x| x.max(0.0).sqrt())
    }

    pub fn det(&self) -> f64 {
        self.eigenvalues().iter().product()
    }

    pub fn inverse(&self) -> Result<Self> {
        let e = self.eigen();
        if e.values.iter().any(|&x| x == 0.0) {
            return Err(Error::Domain("singular matrix".into()));
        }
        let v: Vec<f64> = e.values.iter().map(|x| 1.0 / x).collect();
        Ok(Self::from_spectral(&v, &e.vectors))
    }
}

fn eigen_2x2(a: f64, b: Complex64, d: f64) -> Eigen {
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = half.hypot(b.norm());
    let (l1, l2) = (mean + r, mean - r);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if b.norm() == 0.0 {
        // Already diagonal.
        let vectors = if a >= d { vec![one, zero, zero, one] } else { vec![zero, one, one, zero] };
        return Eigen { values: vec![l1, l2], vectors };
    }
    // Pick the null vector of A - l1 that avoids cancellation.
    let (v0, v1) = if half >= 0.0 {
        (Complex64::new(l1 - d, 0.0), b.conj())
    } else {
        (b, Complex64::new(l1 - a, 0.0))
    };
    let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    let (v0, v1) = (v0 / norm, v1 / norm);
    let (w0, w1) = (-v1.conj(), v0.conj());
    Eigen { values: vec![l1, l2], vectors: vec![v0, w0, v1, w1] }
}

fn eigen_jacobi(h: &HermitianMatrix) -> Eigen {
    let n = h.n;
    let mut a = h.data.clone();
    let mut v = HermitianMatrix::identity(n).data;
    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-16 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let (app, aqq) = (a[p * n + p].re, a[q * n + q].re);
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on rows/cols (p, q).
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = -phase.conj() * s;
                let uqq = phase.conj() * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = akp * upp + akq * uqp;
                    a[k * n + q] = akp * upq + akq * uqq;
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = vkp * upp + vkq * uqp;
                    v[k * n + q] = vkp * upq + vkq * uqq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = upp.conj() * apk + uqp.conj() * aqk;
                    a[q * n + k] = upq.conj() * apk + uqq.conj() * aqk;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = vec![Complex64::new(0.0, 0.0); n * n];
    for (newc, &oldc) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + newc] = v[r * n + oldc];
        }
    }
    Eigen { values, vectors }
}

/// `A B` for row-major `n x n` complex matrices.
pub fn matmul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: u64) -> HermitianMatrix {
        // Deterministic pseudo-random entries without pulling in an RNG.
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut d = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            d[i * n + i] = Complex64::new(next(), 0.0);
            for j in i + 1..n {
                let z = Complex64::new(next(), next());
                d[i * n + j] = z;
                d[j * n + i] = z.conj();
            }
        }
        HermitianMatrix::new(n, d).unwrap()
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        for n in 1..=4 {
            for seed in 0..5 {
                let h = sample(n, seed);
                let e = h.eigen();
                assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
                let back = HermitianMatrix::from_spectral(&e.values, &e.vectors);
                for (x, y) in h.data().iter().zip(back.data()) {
                    assert!((x - y).norm() < 1e-13, "n={n} seed={seed}");
                }
                let tr: f64 = e.values.iter().sum();
                assert!((tr - h.trace()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let h = sample(3, 7);
        let p = h.positive_part();
        let s = h.sqrt_positive();
        let sq = matmul(s.data(), s.data(), 3);
        for (x, y) in sq.iter().zip(p.data()) {
            assert!((x - y).norm() < 1e-13);
        }
        assert!(p.min_eigenvalue() >= -1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let d = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
        ];
        assert!(HermitianMatrix::new(2, d).is_err());
    }

    #[test]
    fn inverse_and_det() {
        let h = HermitianMatrix::from_real(2, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        assert!((h.det() - 5.0).abs() < 1e-13);
        let inv = h.inverse().unwrap();
        assert!((inv.get(0, 0).re - 0.6).abs() < 1e-14);
        assert!((inv.get(0, 1).re + 0.2).abs() < 1e-14);
    }
}
