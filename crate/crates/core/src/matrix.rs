//! Dense complex matrices, q-commutators, tensor-product builders and
//! residual metrics.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{one, r, zero, QParams, Real};

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<R: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<R>>,
}

impl<R: Real> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex<R>>>) -> Self {
        let nr = rows.len();
        let nc = if nr == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(nr * nc);
        for row in rows {
            assert_eq!(row.len(), nc, "ragged rows");
            data.extend(row);
        }
        Self {
            rows: nr,
            cols: nc,
            data,
        }
    }

    pub fn diag(entries: &[Complex<R>]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
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

    pub fn data(&self) -> &[Complex<R>] {
        &self.data
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= *b;
        }
        out
    }

    pub fn scale(&self, s: Complex<R>) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Commutator `AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> R {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(R::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn frobenius(&self) -> R {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(R::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn column(&self, j: usize) -> Vec<Complex<R>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[Complex<R>]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let mut out = Self::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                out[(i - r0, j - c0)] = self[(i, j)];
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<R>]) -> Vec<Complex<R>> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![zero(); self.rows];
        for i in 0..self.rows {
            let mut s = zero();
            for j in 0..self.cols {
                s += self[(i, j)] * v[j];
            }
            out[i] = s;
        }
        out
    }

    /// LU factorization with partial pivoting; `None` on exact singularity.
    pub fn lu(&self) -> Option<Lu<R>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == R::zero() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let s = f * lu[(k, j)];
                    lu[(i, j)] -= s;
                }
            }
        }
        Some(Lu { lu, perm })
    }

    /// Solve `self * x = b` via LU.
    pub fn solve(&self, b: &[Complex<R>]) -> Result<Vec<Complex<R>>> {
        let lu = self
            .lu()
            .ok_or_else(|| Error::InvalidInput("singular matrix in solve".into()))?;
        Ok(lu.solve(b))
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.rows;
        let lu = self
            .lu()
            .ok_or_else(|| Error::InvalidInput("singular matrix in inverse".into()))?;
        let mut out = Self::zeros(n, n);
        let mut e = vec![zero(); n];
        for j in 0..n {
            e[j] = one();
            let x = lu.solve(&e);
            out.set_column(j, &x);
            e[j] = zero();
        }
        Ok(out)
    }
}

impl<R: Real> std::ops::Index<(usize, usize)> for Matrix<R> {
    type Output = Complex<R>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<R> {
        &self.data[i * self.cols + j]
    }
}

impl<R: Real> std::ops::IndexMut<(usize, usize)> for Matrix<R> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<R> {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factors with the row permutation applied during elimination.
pub struct Lu<R: Real> {
    lu: Matrix<R>,
    perm: Vec<usize>,
}

impl<R: Real> Lu<R> {
    pub fn solve(&self, b: &[Complex<R>]) -> Vec<Complex<R>> {
        let n = self.lu.rows();
        let mut x: Vec<Complex<R>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }
}

/// Residual summary with a pass/fail verdict at a fixed tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport<R: Real> {
    pub max_abs: R,
    pub frobenius: R,
    pub tolerance: R,
    pub passed: bool,
}

impl<R: Real> ResidualReport<R> {
    pub fn from_matrix(m: &Matrix<R>, tolerance: R) -> Self {
        let max_abs = m.max_abs();
        Self {
            max_abs,
            frobenius: m.frobenius(),
            tolerance,
            passed: max_abs <= tolerance,
        }
    }

    pub fn from_max(max_abs: R, tolerance: R) -> Self {
        Self {
            max_abs,
            frobenius: max_abs,
            tolerance,
            passed: max_abs <= tolerance,
        }
    }
}

/// Single-site operator selector for [`pauli_chain_op`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliKind {
    X,
    Y,
    Z,
    Plus,
    Minus,
    /// `diag(q^{1/2}, q^{-1/2})`, i.e. `q^{sigma_3/2}`.
    QExpPlus,
    /// `diag(q^{-1/2}, q^{1/2})`.
    QExpMinus,
}

/// The requested one-site 2x2 matrix.
pub fn pauli_site<R: Real>(which: PauliKind, q: &QParams<R>) -> Matrix<R> {
    let (a, b, cc, d) = match which {
        PauliKind::X => (c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)),
        PauliKind::Y => (c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)),
        PauliKind::Z => (c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)),
        PauliKind::Plus => (c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)),
        PauliKind::Minus => (c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)),
        PauliKind::QExpPlus => (q.q_half, c64(0.0, 0.0), c64(0.0, 0.0), q.q_half.finv()),
        PauliKind::QExpMinus => (q.q_half.finv(), c64(0.0, 0.0), c64(0.0, 0.0), q.q_half),
    };
    Matrix::from_rows(vec![vec![a, b], vec![cc, d]])
}

#[inline]
fn c64<R: Real>(re: f64, im: f64) -> Complex<R> {
    Complex::new(r(re), r(im))
}

/// `I (x) ... (x) M_site (x) ... (x) I` on `2^sites` dimensions; `site` is
/// 1-based with site 1 in the first tensor slot.
pub fn pauli_chain_op<R: Real>(
    site: usize,
    which: PauliKind,
    sites: usize,
    q: &QParams<R>,
) -> Result<Matrix<R>> {
    if site == 0 || site > sites {
        return Err(Error::SiteOutOfRange { site, sites });
    }
    let m = pauli_site(which, q);
    let mut out = Matrix::identity(1);
    for s in 1..=sites {
        let factor = if s == site {
            m.clone()
        } else {
            Matrix::identity(2)
        };
        out = out.kron(&factor);
    }
    Ok(out)
}

/// q-commutator `[X, Y]_q = q^{1/2} X Y - q^{-1/2} Y X`.
pub fn q_commutator<R: Real>(x: &Matrix<R>, y: &Matrix<R>, q: &QParams<R>) -> Result<Matrix<R>> {
    if !x.is_square() || !y.is_square() || x.rows() != y.rows() {
        return Err(Error::DimensionMismatch(format!(
            "q_commutator needs equal square matrices, got {}x{} and {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    let qinv_half = q.q_half.finv();
    Ok(x.mul(y).scale(q.q_half).sub(&y.mul(x).scale(qinv_half)))
}

/// q^{-1}-commutator `[X, Y]_{q^{-1}} = q^{-1/2} X Y - q^{1/2} Y X`.
pub fn q_inv_commutator<R: Real>(
    x: &Matrix<R>,
    y: &Matrix<R>,
    q: &QParams<R>,
) -> Result<Matrix<R>> {
    if !x.is_square() || !y.is_square() || x.rows() != y.rows() {
        return Err(Error::DimensionMismatch(
            "q_inv_commutator needs equal square matrices".into(),
        ));
    }
    Ok(x.mul(y)
        .scale(q.q_half.finv())
        .sub(&y.mul(x).scale(q.q_half)))
}

/// Left-hand sides of the two tridiagonal (q-Dolan-Grady) relations minus
/// their right-hand sides, reported as residuals.
///
/// First report: `[W0,[W0,[W0,W1]_q]_{q^-1}] - rho [W0,W1]`;
/// second: the same with `W0 <-> W1` and `rho*`.
pub fn tridiag_residual<R: Real>(
    w0: &Matrix<R>,
    w1: &Matrix<R>,
    rho: Complex<R>,
    rho_star: Complex<R>,
    q: &QParams<R>,
    tolerance: R,
) -> Result<(ResidualReport<R>, ResidualReport<R>)> {
    if !w0.is_square() || !w1.is_square() || w0.rows() != w1.rows() {
        return Err(Error::DimensionMismatch(
            "tridiag_residual needs equal square matrices".into(),
        ));
    }
    let first = {
        let inner = q_inv_commutator(w0, &q_commutator(w0, w1, q)?, q)?;
        w0.commutator(&inner).sub(&w0.commutator(w1).scale(rho))
    };
    let second = {
        let inner = q_inv_commutator(w1, &q_commutator(w1, w0, q)?, q)?;
        w1.commutator(&inner).sub(&w1.commutator(w0).scale(rho_star))
    };
    Ok((
        ResidualReport::from_matrix(&first, tolerance),
        ResidualReport::from_matrix(&second, tolerance),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = Matrix<f64>;

    fn qp() -> QParams<f64> {
        QParams::from_phi(c(0.23, 0.11)).unwrap()
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> M {
        let mut m = M::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        m
    }

    #[test]
    fn q_commutator_identity_case() {
        let q = qp();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = random_matrix(3, &mut rng);
        let id = M::identity(3);
        let got = q_commutator(&id, &y, &q).unwrap();
        let want = y.scale(q.q_half - q.q_half.finv());
        assert!(got.sub(&want).max_abs() < 1e-14);
    }

    #[test]
    fn q_commutator_equal_arguments() {
        let q = qp();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_matrix(4, &mut rng);
        let got = q_commutator(&x, &x, &q).unwrap();
        let want = x.mul(&x).scale(q.q_half - q.q_half.finv());
        assert!(got.sub(&want).max_abs() < 1e-13);
    }

    #[test]
    fn q_commutator_sigma_pm() {
        // [sigma_+, sigma_-]_q = diag(q^{1/2}, -q^{-1/2}), by direct 2x2 multiplication
        let q = qp();
        let sp = pauli_site(PauliKind::Plus, &q);
        let sm = pauli_site(PauliKind::Minus, &q);
        let got = q_commutator(&sp, &sm, &q).unwrap();
        let want = M::diag(&[q.q_half, -q.q_half.finv()]);
        assert!(got.sub(&want).max_abs() < 1e-15);
    }

    #[test]
    fn q_commutator_antisymmetry() {
        // [X,Y]_q = -[Y,X]_{q^{-1}}
        let q = qp();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..4 {
            let x = random_matrix(5, &mut rng);
            let y = random_matrix(5, &mut rng);
            let a = q_commutator(&x, &y, &q).unwrap();
            let b = q_inv_commutator(&y, &x, &q).unwrap();
            assert!(a.add(&b).max_abs() < 1e-12);
        }
    }

    #[test]
    fn q_commutator_rejects_mismatch() {
        let q = qp();
        let a = M::zeros(2, 2);
        let b = M::zeros(3, 3);
        assert!(matches!(
            q_commutator(&a, &b, &q),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn tridiag_residual_commuting_inputs() {
        let q = qp();
        let id = M::identity(4);
        let (r1, r2) = tridiag_residual(&id, &id, c(1.0, 0.0), c(1.0, 0.0), &q, 1e-12).unwrap();
        assert_eq!(r1.max_abs, 0.0);
        assert_eq!(r2.max_abs, 0.0);
        assert!(r1.passed && r2.passed);
    }

    #[test]
    fn tridiag_residual_generic_failure() {
        let q = qp();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_matrix(4, &mut rng);
        let b = random_matrix(4, &mut rng);
        let (r1, r2) = tridiag_residual(&a, &b, c(1.0, 0.0), c(1.0, 0.0), &q, 1e-10).unwrap();
        assert!(!r1.passed || !r2.passed);
    }

    #[test]
    fn pauli_chain_basics() {
        let q = qp();
        let z1 = pauli_chain_op(1, PauliKind::Z, 1, &q).unwrap();
        assert!(z1.sub(&M::diag(&[c(1.0, 0.0), c(-1.0, 0.0)])).max_abs() == 0.0);

        let qe = pauli_chain_op(1, PauliKind::QExpPlus, 1, &q).unwrap();
        assert!(qe.sub(&M::diag(&[q.q_half, q.q_half.finv()])).max_abs() == 0.0);

        // kron(I, sigma_+): ones at (0,1) and (2,3) in 0-based indexing
        let p2 = pauli_chain_op(2, PauliKind::Plus, 2, &q).unwrap();
        let mut want = M::zeros(4, 4);
        want[(0, 1)] = c(1.0, 0.0);
        want[(2, 3)] = c(1.0, 0.0);
        assert!(p2.sub(&want).max_abs() == 0.0);
    }

    #[test]
    fn pauli_chain_site_out_of_range() {
        let q = qp();
        assert!(matches!(
            pauli_chain_op(3, PauliKind::X, 2, &q),
            Err(Error::SiteOutOfRange { .. })
        ));
    }

    #[test]
    fn operators_on_distinct_sites_commute() {
        let q = qp();
        let a = pauli_chain_op(1, PauliKind::Plus, 3, &q).unwrap();
        let b = pauli_chain_op(3, PauliKind::Y, 3, &q).unwrap();
        assert!(a.commutator(&b).max_abs() == 0.0);
    }

    #[test]
    fn lu_solve_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(6, &mut rng);
        let x: Vec<_> = (0..6)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let b = a.matvec(&x);
        let got = a.solve(&b).unwrap();
        for (u, v) in got.iter().zip(x.iter()) {
            assert!((u - v).norm() < 1e-11);
        }
        let ainv = a.inverse().unwrap();
        assert!(a.mul(&ainv).sub(&M::identity(6)).max_abs() < 1e-11);
    }
}
