//! The conserved charge `I1` in the functional representation.
//!
//! `I1 = kappa W0 + kappa* W1 + (kappa_+/k_+)[W1,W0]_q + (kappa_-/k_-)[W0,W1]_q`
//! acts as a second-order q-difference operator
//!
//! ```text
//! A(z) Psi(qz) + Abar(z) Psi(z/q) + B(z) Psi(z) = Lambda_1 Psi(z),
//! A    = (kappa + (q-1/q)(u q^{-1/2}/z + v q^{1/2} z)) phi(z),
//! Abar = (kappa + (q-1/q)(u q^{-1/2} z + v q^{1/2}/z)) phibar(z),
//! B    = kappa mu + kappa* x + (q^{1/2}-q^{-1/2}) x (u + v) mu,
//! ```
//!
//! with `u = kappa_+/k_+`, `v = kappa_-/k_-`. On the eigenbasis of `W0` the
//! charge is block tridiagonal; beyond the algebraic sector its eigenvectors
//! are found from the truncated recurrence system, inside the sector from the
//! finite invariant polynomial subspace.

use num_complex::Complex;

use crate::bethe::{aw_coeffs, build_psi_capped, eigenvalue_ladder, monic_recurrence_coeffs, BetheState};
use crate::eigen::{eig_dense, eig_dense_uncertified, poly_roots, EigenLadder};
use crate::error::{Error, Result};
use crate::functional::TridiagFamily;
use crate::laurent::SymLaurentPoly;
use crate::matrix::Matrix;
use crate::scalar::{one, r, zero, QParams, Real};

/// The coupling constants entering the hierarchy.
#[derive(Debug, Clone, Copy)]
pub struct CouplingSet<R: Real> {
    pub kappa: Complex<R>,
    pub kappa_star: Complex<R>,
    pub kappa_plus: Complex<R>,
    pub kappa_minus: Complex<R>,
    pub k_plus: Complex<R>,
    pub k_minus: Complex<R>,
}

impl<R: Real> CouplingSet<R> {
    pub fn validate(&self) -> Result<()> {
        if self.k_plus.norm() < r::<R>(1e-14) || self.k_minus.norm() < r::<R>(1e-14) {
            return Err(Error::PreconditionViolated(
                "k_+ and k_- must be nonzero (they divide in I1)".into(),
            ));
        }
        Ok(())
    }

    /// `kappa_+ / k_+`.
    pub fn u(&self) -> Complex<R> {
        self.kappa_plus / self.k_plus
    }

    /// `kappa_- / k_-`.
    pub fn v(&self) -> Complex<R> {
        self.kappa_minus / self.k_minus
    }
}

/// `I1` as a q-difference operator: coefficient functions and pointwise
/// application.
#[derive(Debug, Clone)]
pub struct I1FunctionalOp<R: Real> {
    pub fam: TridiagFamily<R>,
    pub couplings: CouplingSet<R>,
}

impl<R: Real> I1FunctionalOp<R> {
    pub fn new(fam: TridiagFamily<R>, couplings: CouplingSet<R>) -> Result<Self> {
        couplings.validate()?;
        Ok(Self { fam, couplings })
    }

    fn a_prefactor(&self, z: Complex<R>) -> Complex<R> {
        let q = self.fam.q.q;
        let qh = self.fam.q.q_half;
        self.couplings.kappa
            + (q - q.finv()) * (self.couplings.u() * qh.finv() * z.finv()
                + self.couplings.v() * qh * z)
    }

    fn abar_prefactor(&self, z: Complex<R>) -> Complex<R> {
        let q = self.fam.q.q;
        let qh = self.fam.q.q_half;
        self.couplings.kappa
            + (q - q.finv()) * (self.couplings.u() * qh.finv() * z
                + self.couplings.v() * qh * z.finv())
    }

    /// `A(z)`.
    pub fn coeff_a(&self, z: Complex<R>) -> Result<Complex<R>> {
        Ok(self.a_prefactor(z) * self.fam.phi().eval(z)?)
    }

    /// `Abar(z)`.
    pub fn coeff_abar(&self, z: Complex<R>) -> Result<Complex<R>> {
        Ok(self.abar_prefactor(z) * self.fam.phibar().eval(z)?)
    }

    /// `B(z, 1/z)`.
    pub fn coeff_b(&self, z: Complex<R>) -> Result<Complex<R>> {
        let op = self.fam.qdiff_operator();
        let mu = op.mu(z)?;
        let x = z + z.finv();
        let qh = self.fam.q.q_half;
        Ok(self.couplings.kappa * mu
            + self.couplings.kappa_star * x
            + (qh - qh.finv()) * x * (self.couplings.u() + self.couplings.v()) * mu)
    }

    /// Pointwise residual of the spectral problem for a candidate eigenpair.
    pub fn qdiff_residual<F: Fn(Complex<R>) -> Complex<R>>(
        &self,
        psi: F,
        lambda1: Complex<R>,
        z: Complex<R>,
    ) -> Result<Complex<R>> {
        let q = self.fam.q.q;
        let lhs = self.coeff_a(z)? * psi(q * z)
            + self.coeff_abar(z)? * psi(z / q)
            + self.coeff_b(z)? * psi(z);
        Ok(lhs - lambda1 * psi(z))
    }

    /// Matrix of `I1` on the symmetric basis `{1, z^k + z^{-k}}` up to the
    /// given degree, with one extra row because the charge raises the
    /// polynomial degree by one.
    pub fn matrix(&self, max_degree: usize) -> Result<Matrix<R>> {
        let fam = &self.fam;
        let ker = fam.kernels();
        let q = fam.q.q;
        let qh = fam.q.q_half;
        let u = self.couplings.u();
        let v = self.couplings.v();
        let qmq = q - q.finv();
        // Laurent prefactors of the shift parts
        let afac = crate::laurent::LaurentPoly::from_terms([
            (0, self.couplings.kappa),
            (-1, qmq * u * qh.finv()),
            (1, qmq * v * qh),
        ]);
        let abfac = crate::laurent::LaurentPoly::from_terms([
            (0, self.couplings.kappa),
            (1, qmq * u * qh.finv()),
            (-1, qmq * v * qh),
        ]);
        let xpoly = crate::laurent::LaurentPoly::from_terms([(1, one::<R>()), (-1, one::<R>())]);
        let n = max_degree + 1;
        let mut m = Matrix::zeros(n + 1, n);
        for j in 0..n {
            let mut e = vec![zero::<R>(); j + 1];
            e[j] = one();
            let xj = SymLaurentPoly::from_sym_coeffs(e).to_laurent();
            let num = afac
                .mul(&ker.phi_part)
                .mul(&xj.scale_arg(q))
                .add(&abfac.mul(&ker.phibar_part).mul(&xj.scale_arg(q.finv())))
                .add(&ker.mu_part.scale(self.couplings.kappa).mul(&xj))
                .add(&xpoly.mul(&ker.dd).scale(self.couplings.kappa_star).mul(&xj))
                .add(
                    &xpoly
                        .mul(&ker.mu_part)
                        .scale((qh - qh.finv()) * (u + v))
                        .mul(&xj),
                );
            let (quot, rem) = num.div_exact(&ker.dd)?;
            let scale = num.max_coeff_norm() + r::<R>(1e-30);
            if rem / scale > r::<R>(1e-8) {
                return Err(Error::InvalidInput(format!(
                    "I1 application left a nonpolynomial remainder ({:e}); invalid family",
                    (rem / scale).to_f64().unwrap_or(f64::NAN)
                )));
            }
            let sym = SymLaurentPoly::from_laurent(&quot, r::<R>(1e-8))?;
            let sc = sym.sym_coeffs();
            if sc.len() > n + 1 {
                return Err(Error::InvalidInput(
                    "I1 raised the degree by more than one".into(),
                ));
            }
            for (i, &c) in sc.iter().enumerate() {
                m[(i, j)] = c;
            }
        }
        Ok(m)
    }
}

/// The three coefficient blocks of the recurrence system at index `n`:
/// `(B_n, C_n, A_n)`, each `rows x cols` for the respective target block.
///
/// For N = 1 they are scalars built on the closed-form recurrence
/// coefficients; for N = 2 the underlying `b, c, a` come from the numerically
/// constructed eigenfunctions (monic normalization).
pub fn coeffs_abc<R: Real>(
    fam: &TridiagFamily<R>,
    couplings: &CouplingSet<R>,
    n: usize,
) -> Result<(Complex<R>, Complex<R>, Complex<R>)> {
    couplings.validate()?;
    let (b_n, c_n, a_n) = base_recurrence_coeffs(fam, n)?;
    Ok((
        prefactor_b(fam, couplings, n) * b_n,
        prefactor_c(fam, couplings, n) * c_n,
        prefactor_a(fam, couplings, n) * a_n,
    ))
}

/// `b_n, c_n, a_n` of the underlying `W1` action in the working
/// normalization (closed-form for N = 1, numeric monic for N = 2).
pub fn base_recurrence_coeffs<R: Real>(
    fam: &TridiagFamily<R>,
    n: usize,
) -> Result<(Complex<R>, Complex<R>, Complex<R>)> {
    if fam.family_n == 1 {
        let w = aw_coeffs(fam, n)?;
        Ok((w.b, w.c, w.a))
    } else {
        // monic normalization: b_n = 1, diagonal alpha_n, sub-diagonal beta_n
        let (alpha, beta) = monic_recurrence_coeffs(fam, n)?;
        Ok((one::<R>(), beta, alpha))
    }
}

fn prefactor_b<R: Real>(fam: &TridiagFamily<R>, cp: &CouplingSet<R>, n: usize) -> Complex<R> {
    let qh = fam.q.q_half;
    let lam_n = eigenvalue_ladder(fam, n);
    let lam_n1 = eigenvalue_ladder(fam, n + 1);
    cp.kappa_star + (cp.u() * qh - cp.v() * qh.finv()) * lam_n
        + (cp.v() * qh - cp.u() * qh.finv()) * lam_n1
}

fn prefactor_c<R: Real>(fam: &TridiagFamily<R>, cp: &CouplingSet<R>, n: usize) -> Complex<R> {
    let qh = fam.q.q_half;
    let lam_n = eigenvalue_ladder(fam, n);
    let lam_m1 = if n == 0 {
        zero::<R>()
    } else {
        eigenvalue_ladder(fam, n - 1)
    };
    cp.kappa_star + (cp.u() * qh - cp.v() * qh.finv()) * lam_n
        + (cp.v() * qh - cp.u() * qh.finv()) * lam_m1
}

fn prefactor_a<R: Real>(fam: &TridiagFamily<R>, cp: &CouplingSet<R>, n: usize) -> Complex<R> {
    let qh = fam.q.q_half;
    cp.kappa_star + (qh - qh.finv()) * (cp.u() + cp.v()) * eigenvalue_ladder(fam, n)
}

/// One eigenpair of the truncated recurrence system with its
/// truncation-stability certificate.
#[derive(Debug, Clone)]
pub struct TruncatedEig<R: Real> {
    pub lambda1: Complex<R>,
    /// Expansion coefficients over `psi_0 .. psi_{n_max}`.
    pub coefficients: Vec<Complex<R>>,
    /// `|Lambda_1(n_max) - Lambda_1(n_max + 4)|` after nearest matching.
    pub stability: R,
    /// Relative magnitude of the last two expansion coefficients; a mode the
    /// truncation has actually converged decays to the edge.
    pub edge_fraction: R,
    /// `|M f - Lambda_1 f|` of the truncated system.
    pub eigen_residual: R,
    pub stable: bool,
}

/// Recurrence matrix of (the transpose action of) `I1` on the coefficient
/// vector `f`, truncated at `n_max`.
fn recurrence_matrix<R: Real>(
    fam: &TridiagFamily<R>,
    couplings: &CouplingSet<R>,
    n_max: usize,
) -> Result<Matrix<R>> {
    let dim = n_max + 1;
    let mut m = Matrix::zeros(dim, dim);
    for n in 0..dim {
        let (bb, cc, aa) = coeffs_abc(fam, couplings, n)?;
        let diag = couplings.kappa * eigenvalue_ladder(fam, n) + aa;
        m[(n, n)] = diag;
        // row n couples f_{n-1} through B_{n-1} and f_{n+1} through C_{n+1}
        if n + 1 < dim {
            m[(n + 1, n)] = bb; // B_n enters row n+1, column n
        }
        if n > 0 {
            m[(n - 1, n)] = cc; // C_n enters row n-1, column n
        }
    }
    Ok(m)
}

/// Diagonalize the truncated recurrence system, tagging each eigenvalue with
/// its change under growing the cutoff by 4.
pub fn solve_nonalgebraic<R: Real>(
    fam: &TridiagFamily<R>,
    couplings: &CouplingSet<R>,
    n_max: usize,
) -> Result<Vec<TruncatedEig<R>>> {
    if n_max < 4 {
        return Err(Error::InvalidInput("cutoff must be at least 4".into()));
    }
    couplings.validate()?;
    let m_small = recurrence_matrix(fam, couplings, n_max)?;
    let m_large = recurrence_matrix(fam, couplings, n_max + 4)?;
    // truncated recurrence matrices develop nearly parallel eigenvectors at
    // large cutoff; stable modes are certified by the pointwise q-difference
    // residual instead of the global reconstruction gate
    let eig_small = eig_dense_uncertified(&m_small, None)?;
    let big_vals: Vec<Complex<R>> = eig_dense_uncertified(&m_large, None)?.eigenvalues();
    let scale = eig_small
        .eigenvalues()
        .iter()
        .map(|v| v.norm())
        .fold(R::zero(), R::max)
        + r::<R>(1e-30);
    let mut out = Vec::new();
    let vmat = eig_small.vector_matrix();
    for (idx, lam) in eig_small.eigenvalues().into_iter().enumerate() {
        let stability = big_vals
            .iter()
            .map(|&b| (b - lam).norm())
            .fold(R::infinity(), R::min);
        let coefficients = vmat.column(idx);
        let head = coefficients
            .iter()
            .map(|v| v.norm())
            .fold(R::zero(), R::max)
            + r::<R>(1e-30);
        let edge = coefficients[coefficients.len().saturating_sub(2)..]
            .iter()
            .map(|v| v.norm())
            .fold(R::zero(), R::max)
            / head;
        let mf = m_small.matvec(&coefficients);
        let mut eres = R::zero();
        for (i, &fi) in coefficients.iter().enumerate() {
            eres = eres + (mf[i] - lam * fi).norm_sqr();
        }
        let eres = eres.sqrt() / head;
        out.push(TruncatedEig {
            lambda1: lam,
            coefficients,
            stability,
            edge_fraction: edge,
            eigen_residual: eres,
            stable: stability < r::<R>(1e-8) * scale.max(R::one())
                && edge < r::<R>(1e-8)
                && eres < r::<R>(1e-8) * scale.max(R::one()),
        });
    }
    out.sort_by(|a, b| {
        (a.edge_fraction.max(a.stability), a.lambda1.norm())
            .partial_cmp(&(b.edge_fraction.max(b.stability), b.lambda1.norm()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

/// The scalar whose vanishing marks the algebraic sector at level `n`:
/// `kappa* + (q-1/q) u q^{-1/2} q^{-n} + (q-1/q) v q^{1/2} C q^n`, where `C`
/// is the eigenvalue-ladder constant `prod(chi)/(q prod(xi))`.
pub fn sector_scalar<R: Real>(
    fam: &TridiagFamily<R>,
    couplings: &CouplingSet<R>,
    n: usize,
) -> Complex<R> {
    let q = fam.q.q;
    let qh = fam.q.q_half;
    let qmq = q - q.finv();
    couplings.kappa_star
        + qmq * couplings.u() * qh.finv() * q.powi(-(n as i32))
        + qmq * couplings.v() * qh * fam.ladder_constant() * q.powi(n as i32)
}

/// Detect the (unique, if any) nonnegative integer `n` in the algebraic
/// sector condition, scanning up to `n_cap`.
pub fn algebraic_sector_n<R: Real>(
    fam: &TridiagFamily<R>,
    couplings: &CouplingSet<R>,
    n_cap: usize,
) -> Option<usize> {
    let scale = couplings.kappa_star.norm().max(R::one());
    (0..=n_cap).find(|&n| sector_scalar(fam, couplings, n).norm() < r::<R>(1e-8) * scale)
}

/// Inverse of [`algebraic_sector_n`]: the `kappa*` that puts the system in
/// sector `n` (the condition is linear in `kappa*`).
pub fn kappa_star_for_sector<R: Real>(
    fam: &TridiagFamily<R>,
    couplings: &CouplingSet<R>,
    n: usize,
) -> Complex<R> {
    let q = fam.q.q;
    let qh = fam.q.q_half;
    let qmq = q - q.finv();
    -(qmq * couplings.u() * qh.finv() * q.powi(-(n as i32))
        + qmq * couplings.v() * qh * fam.ladder_constant() * q.powi(n as i32))
}

/// Solve the algebraic-sector spectral problem at level `n`: the degree-`n`
/// polynomial eigenfunction of `I1`, its Bethe roots with the generalized
/// Bethe-equation residuals, and the eigenvalue.
pub fn solve_algebraic<R: Real>(
    fam: &TridiagFamily<R>,
    couplings: &CouplingSet<R>,
    n: usize,
) -> Result<(BetheState<R>, Complex<R>)> {
    couplings.validate()?;
    let scond = sector_scalar(fam, couplings, n).norm();
    if scond > r::<R>(1e-8) * couplings.kappa_star.norm().max(R::one()) {
        return Err(Error::PreconditionViolated(format!(
            "couplings are not in the algebraic sector at n = {n} (condition residual {:e})",
            scond.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let op = I1FunctionalOp::new(fam.clone(), *couplings)?;
    let m = op.matrix(n.max(1))?;
    // invariance certificate: the block below degree n must vanish
    let mut leak = R::zero();
    for i in n + 1..m.rows() {
        for j in 0..=n.min(m.cols() - 1) {
            leak = leak.max(m[(i, j)].norm());
        }
    }
    let mscale = m.max_abs() + r::<R>(1e-30);
    if leak / mscale > r::<R>(1e-9) {
        return Err(Error::PreconditionViolated(format!(
            "span(psi_0..psi_{n}) is not invariant (leak {:e})",
            (leak / mscale).to_f64().unwrap_or(f64::NAN)
        )));
    }
    let sub = m.block(0, n + 1, 0, n + 1);
    let ladder = eig_dense(&sub, None)?;
    // the degree-n eigenvector: top coefficient bounded away from zero
    let mut best: Option<(Complex<R>, Vec<Complex<R>>)> = None;
    for block in &ladder.blocks {
        for j in 0..block.multiplicity() {
            let col = block.vectors.column(j);
            let top = col[n].norm();
            if top > r::<R>(1e-8) {
                let better = match &best {
                    Some((_, prev)) => top > prev[n].norm(),
                    None => true,
                };
                if better {
                    best = Some((block.value, col));
                }
            }
        }
    }
    let (lambda1, col) = best.ok_or_else(|| {
        Error::NonConvergence(format!("no degree-{n} eigenvector of the reduced charge"))
    })?;
    let lead = col[n];
    let sym_coeffs: Vec<Complex<R>> = col.iter().map(|&c| c / lead).collect();
    let state = bethe_state_for_i1(fam, couplings, n, sym_coeffs, lambda1)?;
    Ok((state, lambda1))
}

/// Build a state from x-power coefficients, certifying the generalized Bethe
/// equations of the charge on the roots.
fn bethe_state_for_i1<R: Real>(
    fam: &TridiagFamily<R>,
    couplings: &CouplingSet<R>,
    n: usize,
    sym_coeffs: Vec<Complex<R>>,
    _lambda1: Complex<R>,
) -> Result<BetheState<R>> {
    let x_coeffs = SymLaurentPoly::from_sym_coeffs(sym_coeffs.clone()).x_power_coeffs();
    let mut xroots = poly_roots(&x_coeffs)?;
    if xroots.len() != n {
        return Err(Error::NonConvergence(format!(
            "root extraction returned {} roots for degree {n}",
            xroots.len()
        )));
    }
    // plain Newton polish
    for x in xroots.iter_mut() {
        for _ in 0..3 {
            let mut p = zero::<R>();
            let mut dp = zero::<R>();
            for (j, &cj) in x_coeffs.iter().enumerate() {
                p += cj * x.powi(j as i32);
                if j > 0 {
                    dp += cj
                        * Complex::new(R::from_usize(j).unwrap(), R::zero())
                        * x.powi(j as i32 - 1);
                }
            }
            if dp.norm() < r::<R>(1e-14) {
                break;
            }
            *x -= p / dp;
        }
    }
    let two = Complex::new(r::<R>(2.0), R::zero());
    let four = Complex::new(r::<R>(4.0), R::zero());
    let mut roots: Vec<Complex<R>> = xroots
        .iter()
        .map(|&x| {
            let s = (x * x - four).sqrt();
            let z1 = (x + s) / two;
            let z2 = (x - s) / two;
            if z1.norm() >= z2.norm() {
                z1
            } else {
                z2
            }
        })
        .collect();
    roots.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    // generalized Bethe equations:
    // Psi(qz_i)/Psi(z_i/q) = -[Abar-prefactor/A-prefactor](z_i) phibar/phi
    let op = I1FunctionalOp::new(fam.clone(), *couplings)?;
    let num = fam.phi_numerator();
    let den = fam.phi_denominator();
    let q = fam.q.q;
    let psi_prod = |w: Complex<R>| -> Complex<R> {
        let xw = w + w.finv();
        xroots.iter().fold(one::<R>(), |acc, &xj| acc * (xw - xj))
    };
    let mut residuals = Vec::with_capacity(n);
    for &z in &roots {
        let apre = op.a_prefactor(z);
        let phi_v = num.eval(z) * den.eval(z.finv());
        let psi_dn = psi_prod(z / q);
        if apre.norm() < r::<R>(1e-12) || phi_v.norm() < r::<R>(1e-12) || psi_dn.norm() < r::<R>(1e-12)
        {
            return Err(Error::PoleProximity {
                magnitude: apre
                    .norm()
                    .min(phi_v.norm())
                    .min(psi_dn.norm())
                    .to_f64()
                    .unwrap_or(0.0),
            });
        }
        let rhs = -(op.abar_prefactor(z) / apre) * (num.eval(z.finv()) * den.eval(z)) / phi_v;
        let lhs = psi_prod(q * z) / psi_dn;
        residuals.push((lhs - rhs).norm() / (R::one() + rhs.norm()));
    }
    Ok(BetheState {
        n,
        roots,
        residuals,
        lambda: eigenvalue_ladder(fam, n),
        sym_coeffs,
        x_coeffs,
    })
}

/// Closed-form eigenvalue on the algebraic sector:
///
/// ```text
/// Lambda_1 = (kappa F+ - (q-1/q) v q^{1/2} G+) q^n
///          + (kappa F- - (q-1/q) u q^{-1/2} G-) q^{-n}
///          + (q-1/q)(q^{1/2}-q^{-1/2}) (v F+ q^n - u F- q^{-n}) sum_i (z_i + 1/z_i)
///          + (q^{1/2}-q^{-1/2}) (u + v) (G+ + G-)
/// ```
///
/// with `F+ = prod(chi)/(q prod(xi))`, `F- = 1`,
/// `G+ = F+ (sum 1/chi - sum 1/xi)`, `G- = sum chi - sum xi`.
pub fn spectrum_formula<R: Real>(
    fam: &TridiagFamily<R>,
    couplings: &CouplingSet<R>,
    n: usize,
    roots: &[Complex<R>],
) -> Result<Complex<R>> {
    if roots.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} roots, got {}",
            roots.len()
        )));
    }
    let q = fam.q.q;
    let qh = fam.q.q_half;
    let qmq = q - q.finv();
    let u = couplings.u();
    let v = couplings.v();
    let f_plus = fam.ladder_constant();
    let f_minus = one::<R>();
    let mut inv_sum = zero::<R>();
    for &c in &fam.chi {
        inv_sum += c.finv();
    }
    for &x in &fam.xi {
        inv_sum -= x.finv();
    }
    let g_plus = f_plus * inv_sum;
    let mut g_minus = zero::<R>();
    for &c in &fam.chi {
        g_minus += c;
    }
    for &x in &fam.xi {
        g_minus -= x;
    }
    let root_sum = roots
        .iter()
        .fold(zero::<R>(), |acc, &z| acc + z + z.finv());
    let qn = q.powi(n as i32);
    Ok((couplings.kappa * f_plus - qmq * v * qh * g_plus) * qn
        + (couplings.kappa * f_minus - qmq * u * qh.finv() * g_minus) * qn.finv()
        + qmq * (qh - qh.finv()) * (v * f_plus * qn - u * f_minus * qn.finv()) * root_sum
        + (qh - qh.finv()) * (u + v) * (g_plus + g_minus))
}

/// Leading coefficient of `psi_n` in the normalization the recurrence
/// coefficients refer to: `prod_{k<n} 1/b_k` for the closed-form N = 1
/// coefficients, `1` (monic) for the numeric N = 2 route.
pub fn basis_leading_coeff<R: Real>(fam: &TridiagFamily<R>, n: usize) -> Result<Complex<R>> {
    let mut acc = one::<R>();
    for k in 0..n {
        let (b_k, _, _) = base_recurrence_coeffs(fam, k)?;
        acc /= b_k;
    }
    Ok(acc)
}

/// Reconstruct `Psi(z) = sum f_n psi_n(z)` from expansion coefficients, in
/// the basis normalization matching [`coeffs_abc`].
pub fn reconstruct_psi<R: Real>(
    fam: &TridiagFamily<R>,
    coefficients: &[Complex<R>],
) -> Result<SymLaurentPoly<R>> {
    let cap = coefficients.len().saturating_sub(1);
    let mut acc = SymLaurentPoly::from_sym_coeffs(vec![zero::<R>()]);
    for (n, &f) in coefficients.iter().enumerate() {
        let psi = &build_psi_capped(fam, n, cap.max(crate::bethe::DEGREE_CAP))?[0];
        let scale = basis_leading_coeff(fam, n)?;
        acc = acc.add(&psi.poly().scale(f * scale));
    }
    Ok(acc)
}

/// Grouped spectrum helper for external callers.
pub fn eig_ladder_of<R: Real>(m: &Matrix<R>) -> Result<EigenLadder<R>> {
    eig_dense(m, None)
}

/// Applying `I1` to `psi_n` must leak into `psi_{n+1}` for generic couplings
/// (no invariant finite subspace); returns the `n -> n+1` coupling block
/// magnitude relative to the matrix scale.
pub fn offdiagonal_leak<R: Real>(
    fam: &TridiagFamily<R>,
    couplings: &CouplingSet<R>,
    n: usize,
) -> Result<R> {
    let (bb, _, _) = coeffs_abc(fam, couplings, n)?;
    Ok(bb.norm())
}

/// Parameters of `QParams` re-exported for sector detection convenience.
pub fn q_of<R: Real>(fam: &TridiagFamily<R>) -> QParams<R> {
    fam.q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{make_family, sample_points};
    use crate::scalar::c;

    type C = Complex<f64>;

    fn fam1() -> TridiagFamily<f64> {
        // |q| > 1 localizes the expansion coefficients, so truncation
        // converges fast; the functional tests at |q| = 1 cover the other
        // regime
        let q = QParams::from_phi(c(0.239, 0.083)).unwrap();
        make_family(
            1,
            vec![c(0.41, 0.11), c(-0.57, 0.21), c(0.88, 0.19), c(0.67, -0.39)],
            vec![],
            q,
        )
        .unwrap()
    }

    fn generic_couplings() -> CouplingSet<f64> {
        // moderate kappa_-/kappa keeps the expansion-coefficient decay rate
        // well inside the unit disk, so cutoff 24 converges far past 1e-8
        CouplingSet {
            kappa: c(0.9, -0.2),
            kappa_star: c(-0.55, 0.37),
            kappa_plus: c(0.44, 0.31),
            kappa_minus: c(-0.15, 0.05),
            k_plus: c(1.0, 0.0),
            k_minus: c(1.0, 0.0),
        }
    }

    #[test]
    fn coupling_shutoff_reduces_to_w1_blocks() {
        let fam = fam1();
        let mut cp = generic_couplings();
        cp.kappa_plus = c(0.0, 0.0);
        cp.kappa_minus = c(0.0, 0.0);
        for n in 0..5 {
            let (bb, cc, aa) = coeffs_abc(&fam, &cp, n).unwrap();
            let w = aw_coeffs(&fam, n).unwrap();
            assert!((bb - cp.kappa_star * w.b).norm() < 1e-13);
            assert!((cc - cp.kappa_star * w.c).norm() < 1e-13);
            assert!((aa - cp.kappa_star * w.a).norm() < 1e-13);
        }
    }

    #[test]
    fn prefactors_reevaluated_independently() {
        // direct re-substitution of the coefficient formulas with the ladder
        let fam = fam1();
        let cp = generic_couplings();
        let qh = fam.q.q_half;
        for n in [1usize, 2, 4] {
            let (bb, _, _) = coeffs_abc(&fam, &cp, n).unwrap();
            let lam_n = eigenvalue_ladder(&fam, n);
            let lam_n1 = eigenvalue_ladder(&fam, n + 1);
            let pref = cp.kappa_star
                + (cp.u() * qh - cp.v() * qh.finv()) * lam_n
                + (cp.v() * qh - cp.u() * qh.finv()) * lam_n1;
            let w = aw_coeffs(&fam, n).unwrap();
            assert!((bb - pref * w.b).norm() < 1e-13);
        }
    }

    #[test]
    fn sector_scalar_equals_b_prefactor() {
        let fam = fam1();
        let cp = generic_couplings();
        for n in 0..6 {
            let s = sector_scalar(&fam, &cp, n);
            let p = super::prefactor_b(&fam, &cp, n);
            assert!((s - p).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn tuned_kappa_star_kills_b_block() {
        let fam = fam1();
        let mut cp = generic_couplings();
        let n = 3;
        cp.kappa_star = kappa_star_for_sector(&fam, &cp, n);
        assert_eq!(algebraic_sector_n(&fam, &cp, 16), Some(n));
        let (bb, _, _) = coeffs_abc(&fam, &cp, n).unwrap();
        assert!(bb.norm() < 1e-12, "B_n = {}", bb.norm());
    }

    #[test]
    fn generic_couplings_have_no_sector() {
        let fam = fam1();
        let cp = generic_couplings();
        assert_eq!(algebraic_sector_n(&fam, &cp, 24), None);
        // sector dichotomy: every n -> n+1 coupling block is nonzero
        for n in 0..10 {
            assert!(offdiagonal_leak(&fam, &cp, n).unwrap() > 1e-8);
        }
    }

    #[test]
    fn diagonal_limit_spectrum() {
        let fam = fam1();
        let cp = CouplingSet {
            kappa: c(0.9, -0.3),
            kappa_star: c(0.0, 0.0),
            kappa_plus: c(0.0, 0.0),
            kappa_minus: c(0.0, 0.0),
            k_plus: c(1.0, 0.0),
            k_minus: c(1.0, 0.0),
        };
        let eigs = solve_nonalgebraic(&fam, &cp, 8).unwrap();
        // spectrum must be exactly {kappa lambda_n}
        for e in &eigs {
            let best = (0..=8)
                .map(|n| (cp.kappa * eigenvalue_ladder(&fam, n) - e.lambda1).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-12, "diagonal system eigenvalue off by {best}");
        }
    }

    #[test]
    fn truncation_stable_modes_satisfy_qdiff_pointwise() {
        let fam = fam1();
        let cp = generic_couplings();
        let eigs = solve_nonalgebraic(&fam, &cp, 24).unwrap();
        let op = I1FunctionalOp::new(fam.clone(), cp).unwrap();
        let mut checked = 0;
        for e in eigs.iter().filter(|e| e.stable).take(3) {
            let psi = reconstruct_psi(&fam, &e.coefficients).unwrap();
            for z in sample_points::<f64>(6) {
                let qv = fam.q.q;
                let (Ok(a), Ok(ab), Ok(b)) = (op.coeff_a(z), op.coeff_abar(z), op.coeff_b(z))
                else {
                    continue;
                };
                let terms = a * psi.eval(qv * z) + ab * psi.eval(z / qv) + b * psi.eval(z)
                    - e.lambda1 * psi.eval(z);
                let scale = (a * psi.eval(qv * z)).norm()
                    + (ab * psi.eval(z / qv)).norm()
                    + (b * psi.eval(z)).norm()
                    + (e.lambda1 * psi.eval(z)).norm();
                assert!(
                    terms.norm() / scale < 1e-6,
                    "qdiff residual {} at {z}",
                    terms.norm() / scale
                );
                checked += 1;
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn algebraic_sector_eigenvalue_appears_in_truncated_spectrum() {
        let fam = fam1();
        let mut cp = generic_couplings();
        let n = 2;
        cp.kappa_star = kappa_star_for_sector(&fam, &cp, n);
        let (state, lam1) = solve_algebraic(&fam, &cp, n).unwrap();
        assert_eq!(state.n, n);
        for &res in &state.residuals {
            assert!(res < 1e-8, "generalized Bethe residual {res}");
        }
        // cross-check against the closed spectrum formula
        let formula = spectrum_formula(&fam, &cp, n, &state.roots).unwrap();
        assert!(
            (formula - lam1).norm() < 1e-8,
            "formula deviation {}",
            (formula - lam1).norm()
        );
        // and against the truncated recurrence spectrum
        let eigs = solve_nonalgebraic(&fam, &cp, 20).unwrap();
        let best = eigs
            .iter()
            .map(|e| (e.lambda1 - lam1).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-8, "sector eigenvalue missing from spectrum: {best}");
    }

    #[test]
    fn sector_n0_state_is_constant() {
        let fam = fam1();
        let mut cp = generic_couplings();
        cp.kappa_star = kappa_star_for_sector(&fam, &cp, 0);
        let (state, lam1) = solve_algebraic(&fam, &cp, 0).unwrap();
        assert!(state.roots.is_empty());
        // Lambda_1 = kappa lambda_0 + A_0 in the scalar case
        let (_, _, a0) = coeffs_abc(&fam, &cp, 0).unwrap();
        let want = cp.kappa * eigenvalue_ladder(&fam, 0) + a0;
        assert!((lam1 - want).norm() < 1e-10);
        let formula = spectrum_formula(&fam, &cp, 0, &[]).unwrap();
        assert!((formula - lam1).norm() < 1e-10);
    }

    #[test]
    fn spectrum_formula_coupling_shutoff() {
        // kappa_pm = 0: Lambda_1 = kappa (F+ q^n + F- q^{-n}) = kappa lambda_n
        let fam = fam1();
        let cp = CouplingSet {
            kappa: c(0.8, 0.1),
            kappa_star: c(0.0, 0.0),
            kappa_plus: c(0.0, 0.0),
            kappa_minus: c(0.0, 0.0),
            k_plus: c(1.0, 0.0),
            k_minus: c(1.0, 0.0),
        };
        for n in [0usize, 1, 3] {
            let roots = vec![c(1.1, 0.2); n];
            let lam = spectrum_formula(&fam, &cp, n, &roots).unwrap();
            let want = cp.kappa * eigenvalue_ladder(&fam, n);
            assert!((lam - want).norm() < 1e-13);
        }
    }

    #[test]
    fn truncation_convergence_between_24_and_32() {
        let fam = fam1();
        let cp = generic_couplings();
        let a = solve_nonalgebraic(&fam, &cp, 24).unwrap();
        let b = solve_nonalgebraic(&fam, &cp, 28).unwrap();
        let stable_a: Vec<C> = a.iter().filter(|e| e.stable).map(|e| e.lambda1).collect();
        assert!(!stable_a.is_empty());
        let scale = stable_a.iter().map(|v| v.norm()).fold(1.0f64, f64::max);
        for v in &stable_a {
            let best = b
                .iter()
                .map(|e| (e.lambda1 - v).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8 * scale, "stable eigenvalue drifted by {best}");
        }
    }
}
