//! Dense complex matrices and a cyclic Jacobi eigensolver for Hermitian input.
//!
//! Storage is row-major. The tensor product follows the convention
//! `index(i ⊗ j) = i * dim(b) + j`, which fixes the meaning of every
//! multi-index in the crate.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::MAX_DIM;

pub type C64 = Complex64;

/// Offdiagonal Frobenius norm at which the Jacobi sweep stops (scaled by `max(1, ‖M‖_F)`).
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Input to the eigensolver must be Hermitian to this absolute tolerance.
pub const EIGEN_HERMITIAN_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting NaN and infinities.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite(k / cols.max(1), k % cols.max(1)));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Outer product `|v⟩⟨v|`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest entrywise modulus of `M - M†`; `None` for non-square matrices.
    pub fn hermitian_deviation(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        Some(worst)
    }

    /// `tr(M²)` for square `M`, computed without forming the product.
    pub fn trace_of_square(&self) -> C64 {
        let n = self.rows;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self[(i, j)] * self[(j, i)];
            }
        }
        acc
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Tensor product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    if rows > MAX_DIM || cols > MAX_DIM {
        return Err(Error::DimensionGuard(rows.max(cols)));
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a[(i, j)];
            if x.re == 0.0 && x.im == 0.0 {
                continue;
            }
            for k in 0..b.rows {
                let base = (i * b.rows + k) * cols + j * b.cols;
                for l in 0..b.cols {
                    out.data[base + l] = x * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues, eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self, values: &[f64]) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in values.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * lam;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    jacobi(m, false).map(|e| e.values)
}

pub fn hermitian_eigh(m: &ComplexMatrix) -> Result<HermitianEigen> {
    jacobi(m, true)
}

fn jacobi(m: &ComplexMatrix, want_vectors: bool) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "eigensolver needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let dev = m.hermitian_deviation().unwrap_or(0.0);
    if dev > EIGEN_HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let n = m.rows;
    // Work on the Hermitian part so rounding in the input does not leak into the spectrum.
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = if want_vectors {
        ComplexMatrix::identity(n)
    } else {
        ComplexMatrix::zeros(0, 0)
    };
    let threshold = JACOBI_TOL * m.frobenius_norm().max(1.0);

    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged || off_diagonal_norm(&a) < threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q, want_vectors);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) >= threshold {
        return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = if want_vectors {
        ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])])
    } else {
        v
    };
    Ok(HermitianEigen { values, vectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`: `A ← U† A U` with
/// `U = diag(1, e^{-iφ}) · R(θ)` restricted to the `(p, q)` plane.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, want_vectors: bool) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b < 1e-300 {
        return;
    }
    let phase = apq / b; // e^{iφ}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = 0.5 * (2.0 * b).atan2(aqq - app);
    let (s, c) = theta.sin_cos();
    let n = a.rows;

    // Columns p, q.
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)] * phase.conj();
        a[(k, p)] = akp * c - akq * s;
        a[(k, q)] = akp * s + akq * c;
    }
    // Rows p, q.
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)] * phase;
        a[(p, k)] = apk * c - aqk * s;
        a[(q, k)] = apk * s + aqk * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    if want_vectors {
        for k in 0..n {
            let vkp = v[(k, p)];
            let vkq = v[(k, q)] * phase.conj();
            v[(k, p)] = vkp * c - vkq * s;
            v[(k, q)] = vkp * s + vkq * c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let g = random_matrix(n, rng);
        g.add(&g.adjoint()).unwrap().scale(0.5)
    }

    #[test]
    fn kron_identity_and_diagonal() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), ComplexMatrix::identity(4));
        let a = ComplexMatrix::from_diagonal(&[1.0, 0.0]);
        let b = ComplexMatrix::from_diagonal(&[0.5, 0.5]);
        assert_eq!(
            kron(&a, &b).unwrap(),
            ComplexMatrix::from_diagonal(&[0.5, 0.5, 0.0, 0.0])
        );
    }

    #[test]
    fn kron_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(3, &mut rng);
        let b = random_matrix(3, &mut rng);
        let k = kron(&a, &b).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for r in 0..3 {
                    for s in 0..3 {
                        assert_eq!(k[(i * 3 + r, j * 3 + s)], a[(i, j)] * b[(r, s)]);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_respects_guard() {
        let a = ComplexMatrix::identity(64);
        let b = ComplexMatrix::identity(32);
        assert!(matches!(kron(&a, &b), Err(Error::DimensionGuard(2048))));
    }

    #[test]
    fn diagonal_spectrum() {
        let m = ComplexMatrix::from_diagonal(&[0.8, 0.2]);
        let ev = hermitian_eigenvalues(&m).unwrap();
        assert_eq!(ev, vec![0.2, 0.8]);
    }

    #[test]
    fn rank_one_projector_spectrum() {
        let s = 0.5f64.sqrt();
        let psi = [c(0.0, 0.0), c(s, 0.0), c(s, 0.0), c(0.0, 0.0)];
        let ev = hermitian_eigenvalues(&ComplexMatrix::outer(&psi)).unwrap();
        for (got, want) in ev.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-14, "{ev:?}");
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            hermitian_eigenvalues(&m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn reconstruction_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 5, 16, 33] {
            let m = random_hermitian(n, &mut rng);
            let e = hermitian_eigh(&m).unwrap();
            let r = e.reconstruct(&e.values);
            let resid = m.sub(&r).unwrap().frobenius_norm();
            assert!(
                resid <= 1e-10 * m.frobenius_norm().max(1.0),
                "n={n} residual {resid}"
            );
            let tr: f64 = e.values.iter().sum();
            assert!((tr - m.trace().re).abs() < 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    /// det(M - λI) by complex Gaussian elimination with partial pivoting.
    /// For Hermitian M the determinant is real.
    fn char_poly(m: &ComplexMatrix, lambda: f64) -> f64 {
        let n = m.rows();
        let mut a = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                m[(i, j)] - lambda
            } else {
                m[(i, j)]
            }
        });
        let mut det = c(1.0, 0.0);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
                .unwrap();
            if a[(piv, col)].norm() == 0.0 {
                return 0.0;
            }
            if piv != col {
                for k in 0..n {
                    let t = a[(col, k)];
                    a[(col, k)] = a[(piv, k)];
                    a[(piv, k)] = t;
                }
                det = -det;
            }
            let d = a[(col, col)];
            det *= d;
            for r in col + 1..n {
                let f = a[(r, col)] / d;
                for k in col..n {
                    let t = a[(col, k)];
                    a[(r, k)] -= f * t;
                }
            }
        }
        det.re
    }

    #[test]
    fn eigenvalues_match_characteristic_polynomial_bisection() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_hermitian(8, &mut rng);
        let ev = hermitian_eigenvalues(&m).unwrap();
        // Bracket every root by a fine sign-change scan, then bisect.
        let bound = m.frobenius_norm() + 1.0;
        let steps = 20_000;
        let mut oracle = Vec::new();
        let mut prev_x = -bound;
        let mut prev_f = char_poly(&m, prev_x);
        for k in 1..=steps {
            let x = -bound + 2.0 * bound * k as f64 / steps as f64;
            let f = char_poly(&m, x);
            if prev_f == 0.0 || prev_f.signum() != f.signum() {
                let (mut lo, mut hi, mut flo) = (prev_x, x, prev_f);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = char_poly(&m, mid);
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                oracle.push(0.5 * (lo + hi));
            }
            prev_x = x;
            prev_f = f;
        }
        assert_eq!(oracle.len(), 8, "oracle found {oracle:?}");
        for (got, want) in ev.iter().zip(&oracle) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }
}
