//! Self-contained dense complex matrix kernel.
//!
//! Everything downstream works with small matrices (N <= 64): unitaries,
//! projectors, convex combinations of them, and resolvent values. The kernel
//! provides products, inverses, Hermitian eigendecomposition (cyclic Jacobi),
//! the spectral norm, and a branch-tracked principal log-determinant.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense square complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for CMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMat {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix is not square".into()));
        }
        let data: Vec<Complex64> = rows.iter().flatten().copied().collect();
        let m = CMat { n, data };
        if !m.is_finite() {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        Ok(m)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(d: &[Complex64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, z) in d.iter().enumerate() {
            m[(i, i)] = *z;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn add(&self, other: &CMat) -> CMat {
        debug_assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        CMat { n: self.n, data }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        debug_assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        CMat { n: self.n, data }
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat { n: self.n, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn axpy(&mut self, s: Complex64, other: &CMat) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn matmul(&self, other: &CMat) -> CMat {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += aik * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        let n = self.n;
        CMat::from_fn(n, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute entry; cheap scale estimate used for pivoting thresholds.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hermitian symmetrization (A + A*)/2.
    pub fn hermitian_part(&self) -> CMat {
        let adj = self.adjoint();
        self.add(&adj).scale(Complex64::new(0.5, 0.0))
    }

    /// Column j as a vector.
    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    /// Outer product u v* as an N x N matrix.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> CMat {
        let n = u.len();
        debug_assert_eq!(n, v.len());
        CMat::from_fn(n, |i, j| u[i] * v[j].conj())
    }

    /// Spectral norm (largest singular value) via the Hermitian eigenproblem
    /// for A*A; accurate to ~1e-14 relative for the sizes used here.
    pub fn op_norm(&self) -> Result<f64> {
        if !self.is_finite() {
            return Err(Error::InvalidInput("op_norm: non-finite entries".into()));
        }
        if self.n == 0 {
            return Ok(0.0);
        }
        if self.n == 1 {
            return Ok(self.data[0].norm());
        }
        let g = self.adjoint().matmul(self).hermitian_part();
        let (vals, _) = jacobi_hermitian(&g)?;
        let lam = vals.last().copied().unwrap_or(0.0).max(0.0);
        Ok(lam.sqrt())
    }

    /// Distance to the Hermitian part in Frobenius norm, relative gauge for
    /// the `herm_eig` precondition.
    pub fn herm_defect(&self) -> f64 {
        self.sub(&self.adjoint()).fro_norm()
    }

    /// Hermitian eigendecomposition: eigenvalues ascending, orthonormal
    /// eigenvector columns. Errors if the input is not Hermitian to
    /// 1e-10 relative.
    pub fn herm_eig(&self) -> Result<(Vec<f64>, CMat)> {
        if !self.is_finite() {
            return Err(Error::InvalidInput("herm_eig: non-finite entries".into()));
        }
        let scale = self.fro_norm().max(1.0);
        if self.herm_defect() > 1e-10 * scale {
            return Err(Error::ContractViolation(format!(
                "herm_eig: input not Hermitian (defect {:.3e}, scale {:.3e})",
                self.herm_defect(),
                scale
            )));
        }
        jacobi_hermitian(&self.hermitian_part())
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    /// Errors when the condition estimate exceeds 1e12.
    pub fn inverse(&self) -> Result<CMat> {
        if !self.is_finite() {
            return Err(Error::InvalidInput("inverse: non-finite entries".into()));
        }
        let n = self.n;
        let mut a = self.clone();
        let mut inv = CMat::identity(n);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let mut piv = col;
            let mut best = a[(col, col)].norm();
            for r in col + 1..n {
                let v = a[(r, col)].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-14 * scale {
                return Err(Error::Singular(format!(
                    "pivot {:.3e} below threshold at column {col}",
                    best
                )));
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(col * n + j, piv * n + j);
                    inv.data.swap(col * n + j, piv * n + j);
                }
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let u = a[(col, j)];
                    let v = inv[(col, j)];
                    a[(r, j)] -= f * u;
                    inv[(r, j)] -= f * v;
                }
            }
        }
        let cond = self.op_norm()? * inv.op_norm()?;
        if cond > 1e12 {
            return Err(Error::Singular(format!("condition estimate {cond:.3e} exceeds 1e12")));
        }
        Ok(inv)
    }

    /// Principal log-determinant: the sum of principal-branch logarithms of
    /// the eigenvalues, computed as the trace of the principal matrix
    /// logarithm (inverse scaling by Denman-Beavers square roots, then the
    /// Mercator series). Requires the spectrum inside the open unit disc
    /// around 1, i.e. ||A - I|| < 1.
    pub fn principal_log_det(&self) -> Result<Complex64> {
        if !self.is_finite() {
            return Err(Error::InvalidInput("principal_log_det: non-finite entries".into()));
        }
        let n = self.n;
        let eye = CMat::identity(n);
        let dist = self.sub(&eye).op_norm()?;
        if dist >= 1.0 {
            return Err(Error::Domain(format!(
                "principal_log_det requires ||A - I|| < 1, got {dist:.6}"
            )));
        }
        if dist == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        // Square-root until the Mercator series converges fast.
        let mut a = self.clone();
        let mut scale = 1.0;
        for _ in 0..64 {
            if a.sub(&eye).op_norm()? <= 0.30 {
                break;
            }
            a = sqrtm_db(&a)?;
            scale *= 2.0;
        }
        let x = a.sub(&eye);
        // tr log(I+X) = sum_{k>=1} (-1)^{k+1} tr(X^k)/k
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p = x.clone();
        let mut sign = 1.0;
        for k in 1..=200 {
            acc += p.trace() * (sign / k as f64);
            let pn = p.fro_norm();
            if pn < 1e-18 * (k as f64) {
                break;
            }
            p = p.matmul(&x);
            sign = -sign;
        }
        Ok(acc * scale)
    }
}

/// Matrix square root by the coupled Denman-Beavers iteration. Valid for
/// matrices with no spectrum on the closed negative real axis; the callers
/// guarantee spectrum in the right half-plane.
fn sqrtm_db(a: &CMat) -> Result<CMat> {
    let mut x = a.clone();
    let mut y = CMat::identity(a.dim());
    for _ in 0..60 {
        let xi = x.inverse()?;
        let yi = y.inverse()?;
        let xn = x.add(&yi).scale(Complex64::new(0.5, 0.0));
        let yn = y.add(&xi).scale(Complex64::new(0.5, 0.0));
        let step = xn.sub(&x).fro_norm();
        x = xn;
        y = yn;
        if step <= 1e-15 * x.fro_norm().max(1.0) {
            break;
        }
    }
    Ok(x)
}

/// Cyclic complex Jacobi for a Hermitian matrix. Returns eigenvalues in
/// ascending order and the matching orthonormal eigenvector columns.
fn jacobi_hermitian(a0: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a0.dim();
    let mut a = a0.clone();
    let mut v = CMat::identity(n);
    let anorm = a.fro_norm().max(f64::MIN_POSITIVE);
    let tol = 1e-15 * anorm;

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b <= 1e-300 {
                    continue;
                }
                // Unitary 2x2 block J = [[c, s], [-d*s, d*c]] with d the
                // phase of conj(a_pq); zeroes a_pq.
                let d = apq.conj() / b;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns: col_p' = c*col_p - d*s*col_q ; col_q' = s*col_p + d*c*col_q
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * (d * s);
                    a[(k, q)] = akp * s + akq * (d * c);
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * (d * s);
                    v[(k, q)] = vkp * s + vkq * (d * c);
                }
                // rows with J*
                let dc = d.conj();
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * (dc * s);
                    a[(q, k)] = apk * s + aqk * (dc * c);
                }
            }
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    idx.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
    let sorted_vals: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
    let vectors = CMat::from_fn(n, |i, j| v[(i, idx[j])]);
    Ok((sorted_vals, vectors))
}
