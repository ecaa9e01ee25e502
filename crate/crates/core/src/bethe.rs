//! Polynomial eigenfunctions of `W0`, their Bethe roots, and the three-term
//! recurrence (Askey-Wilson) coefficients.
//!
//! Eigenfunctions are symmetric polynomials `psi_n(z) = prod_j (z - z_j)
//! (1/z - z_j)`, degree `n` in `x = z + 1/z`. They are built from the finite
//! linear eigenproblem of `W0` on the x-power basis, which is upper
//! triangular there, and the Bethe equations are verified a posteriori as a
//! certificate on the extracted roots.

use num_complex::Complex;

use crate::eigen::{eig_dense, poly_roots};
use crate::error::{Error, Result};
use crate::functional::{apply_w0_poly, w0_matrix, TridiagFamily};
use crate::laurent::SymLaurentPoly;
use crate::scalar::{one, r, zero, Real};

/// Default cap on the eigenfunction degree.
pub const DEGREE_CAP: usize = 12;

/// A polynomial eigenfunction described by its Bethe roots.
#[derive(Debug, Clone)]
pub struct BetheState<R: Real> {
    /// Polynomial degree in `x = z + 1/z`.
    pub n: usize,
    /// Roots `z_j`, canonical representative `|z_j| >= 1`.
    pub roots: Vec<Complex<R>>,
    /// Per-root residual of the Bethe equation
    /// `psi(q z_i)/psi(z_i/q) + phibar(z_i)/phi(z_i) = 0`, normalized by the
    /// term magnitude.
    pub residuals: Vec<R>,
    /// Eigenvalue `lambda_n`.
    pub lambda: Complex<R>,
    /// Coefficients in the symmetric basis `{1, z^k + z^{-k}}`, with unit
    /// top coefficient (equivalently monic in `x`).
    pub sym_coeffs: Vec<Complex<R>>,
    /// Coefficients in powers of `x`, monic (`coeff[n] = 1`).
    pub x_coeffs: Vec<Complex<R>>,
}

impl<R: Real> BetheState<R> {
    pub fn poly(&self) -> SymLaurentPoly<R> {
        SymLaurentPoly::from_sym_coeffs(self.sym_coeffs.clone())
    }
}

/// `lambda_n = C q^n + q^{-n}` with `C = prod(chi)/(q prod(xi))`.
pub fn eigenvalue_ladder<R: Real>(fam: &TridiagFamily<R>, n: usize) -> Complex<R> {
    let q = fam.q.q;
    fam.ladder_constant() * q.powi(n as i32) + q.powi(-(n as i32))
}

/// Construct the degree-`n` eigenfunction(s) of `W0`, one per degeneracy of
/// `lambda_n` (a single state for generic parameters).
pub fn build_psi<R: Real>(fam: &TridiagFamily<R>, n: usize) -> Result<Vec<BetheState<R>>> {
    build_psi_capped(fam, n, DEGREE_CAP)
}

/// [`build_psi`] with an explicit degree cap.
pub fn build_psi_capped<R: Real>(
    fam: &TridiagFamily<R>,
    n: usize,
    cap: usize,
) -> Result<Vec<BetheState<R>>> {
    if n > cap {
        return Err(Error::InvalidInput(format!(
            "degree {n} exceeds the configured cap {cap}"
        )));
    }
    let lam_n = eigenvalue_ladder(fam, n);
    // ladder collisions up to the cap decide between the generic
    // back-substitution path and the degenerate eigensolver path
    let scale = (0..=cap)
        .map(|m| eigenvalue_ladder(fam, m).norm())
        .fold(R::zero(), R::max)
        + r::<R>(1e-30);
    let collision = (0..=cap)
        .filter(|&m| m != n)
        .any(|m| (eigenvalue_ladder(fam, m) - lam_n).norm() < r::<R>(1e-9) * scale);

    if !collision {
        let m = w0_matrix(fam, n)?;
        // (W0 - lambda_n) c = 0 with c[n] = 1, solved by back-substitution on
        // the upper triangular matrix
        let mut cvec = vec![zero::<R>(); n + 1];
        cvec[n] = one();
        for i in (0..n).rev() {
            let mut s = zero::<R>();
            for j in i + 1..=n {
                s += m[(i, j)] * cvec[j];
            }
            let denom = m[(i, i)] - lam_n;
            if denom.norm() < r::<R>(1e-12) * scale {
                return Err(Error::DegenerateParameters(format!(
                    "ladder value collision while solving for psi_{n}"
                )));
            }
            cvec[i] = -s / denom;
        }
        let state = finish_state(fam, n, cvec)?;
        Ok(vec![state])
    } else {
        // degenerate ladder: diagonalize the full triangular matrix and take
        // the eigenspace at lambda_n
        let m = w0_matrix(fam, cap)?;
        let ladder = eig_dense(&m, Some(r::<R>(1e-8) * scale))?;
        let block = ladder
            .blocks
            .iter()
            .find(|b| (b.value - lam_n).norm() < r::<R>(1e-7) * scale)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "no eigenvalue of the W0 matrix matches lambda_{n}; invalid family"
                ))
            })?;
        let mut states = Vec::new();
        for j in 0..block.multiplicity() {
            let col = block.vectors.column(j);
            // degree = highest substantially nonzero x-power
            let mut deg = 0;
            for (i, cc) in col.iter().enumerate() {
                if cc.norm() > r::<R>(1e-8) {
                    deg = i;
                }
            }
            let lead = col[deg];
            let cvec: Vec<Complex<R>> = col[..=deg].iter().map(|&cc| cc / lead).collect();
            if deg == n {
                states.push(finish_state(fam, n, cvec)?);
            }
        }
        if states.is_empty() {
            return Err(Error::InvalidInput(format!(
                "no degree-{n} eigenvector found at lambda_{n}"
            )));
        }
        Ok(states)
    }
}

fn finish_state<R: Real>(
    fam: &TridiagFamily<R>,
    n: usize,
    sym_coeffs: Vec<Complex<R>>,
) -> Result<BetheState<R>> {
    let lam = eigenvalue_ladder(fam, n);
    let x_coeffs = SymLaurentPoly::from_sym_coeffs(sym_coeffs.clone()).x_power_coeffs();
    let mut xroots = poly_roots(&x_coeffs)?;
    if xroots.len() != n {
        return Err(Error::NonConvergence(format!(
            "root extraction returned {} roots for degree {n}",
            xroots.len()
        )));
    }
    // Newton polish against the exact coefficients; the clustered geometric
    // root layout makes plain Horner evaluation cancel catastrophically, so
    // the value is computed in compensated (double-word) arithmetic
    for x in xroots.iter_mut() {
        for _ in 0..4 {
            let p = dd::horner(&x_coeffs, *x);
            let mut dp = zero::<R>();
            for (j, &cj) in x_coeffs.iter().enumerate().skip(1) {
                dp += cj
                    * Complex::new(R::from_usize(j).unwrap(), R::zero())
                    * x.powi(j as i32 - 1);
            }
            if dp.norm() < r::<R>(1e-14) {
                break;
            }
            let step = p / dp;
            *x -= step;
            if step.norm() < r::<R>(1e-17) * x.norm() {
                break;
            }
        }
    }
    let two = Complex::new(r::<R>(2.0), R::zero());
    let four = Complex::new(r::<R>(4.0), R::zero());
    let mut roots = Vec::with_capacity(n);
    for &x in &xroots {
        // z + 1/z = x  =>  z = (x + sqrt(x^2 - 4))/2, representative |z| >= 1
        let s = (x * x - four).sqrt();
        let z1 = (x + s) / two;
        let z2 = (x - s) / two;
        roots.push(if z1.norm() >= z2.norm() { z1 } else { z2 });
    }
    // canonical deterministic order
    roots.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let phi_num = fam.phi_numerator();
    let phi_den = fam.phi_denominator();
    let q = fam.q.q;
    // evaluate psi in product form over the x-roots: the shifted arguments
    // land near other roots for geometrically spaced Bethe roots, and the
    // factored form avoids the cancellation the coefficient form suffers
    let psi_prod = |w: Complex<R>| -> Complex<R> {
        let xw = w + w.finv();
        xroots
            .iter()
            .fold(one::<R>(), |acc, &xj| acc * (xw - xj))
    };
    let mut residuals = Vec::with_capacity(n);
    for &z in &roots {
        // phibar/phi = N(1/z) D(z) / (N(z) D(1/z))
        let denom = phi_num.eval(z) * phi_den.eval(z.finv());
        let numer = phi_num.eval(z.finv()) * phi_den.eval(z);
        let psi_dn = psi_prod(z / q);
        if denom.norm() < r::<R>(1e-12) || psi_dn.norm() < r::<R>(1e-12) {
            return Err(Error::PoleProximity {
                magnitude: denom.norm().min(psi_dn.norm()).to_f64().unwrap_or(0.0),
            });
        }
        // normalized by the term magnitude: for higher n the top roots
        // approach zeros of phi and the raw ratio grows without bound, so
        // only the relative defect is numerically meaningful
        let ratio = numer / denom;
        let resid = (psi_prod(q * z) / psi_dn + ratio).norm() / (R::one() + ratio.norm());
        residuals.push(resid);
    }
    Ok(BetheState {
        n,
        roots,
        residuals,
        lambda: lam,
        sym_coeffs,
        x_coeffs,
    })
}

/// Per-root residual of the hyperbolic form of the Bethe equations under the
/// reparametrization `z = e^{2 lambda}`, `chi_l = e^{2 eta_l}`,
/// `xi_l = e^{2 c_l}`, `q = e^{phi}`:
///
/// ```text
/// prod_l sinh(l_i + c_l)/sinh(l_i - c_l) prod_l sinh(l_i - eta_l)/sinh(l_i + eta_l)
///   = prod_{j != i} sinh(l_i + l_j + phi/2) sinh(l_i - l_j + phi/2)
///                 / (sinh(l_i + l_j - phi/2) sinh(l_i - l_j - phi/2))
/// ```
pub fn bethe_residual_hyperbolic<R: Real>(
    fam: &TridiagFamily<R>,
    lambdas: &[Complex<R>],
) -> Result<Vec<Complex<R>>> {
    let half = Complex::new(r::<R>(0.5), R::zero());
    let vphi = fam.q.phi;
    let etas: Vec<Complex<R>> = fam.chi.iter().map(|c| c.ln() * half).collect();
    let cs: Vec<Complex<R>> = fam.xi.iter().map(|c| c.ln() * half).collect();
    let guard = r::<R>(1e-12);
    let mut out = Vec::with_capacity(lambdas.len());
    for (i, &li) in lambdas.iter().enumerate() {
        let mut lhs = one::<R>();
        for &cl in &cs {
            let den = (li - cl).sinh();
            if den.norm() < guard {
                return Err(Error::PoleProximity {
                    magnitude: den.norm().to_f64().unwrap_or(0.0),
                });
            }
            lhs *= (li + cl).sinh() / den;
        }
        for &el in &etas {
            let den = (li + el).sinh();
            if den.norm() < guard {
                return Err(Error::PoleProximity {
                    magnitude: den.norm().to_f64().unwrap_or(0.0),
                });
            }
            lhs *= (li - el).sinh() / den;
        }
        let mut rhs = one::<R>();
        for (j, &lj) in lambdas.iter().enumerate() {
            if j == i {
                continue;
            }
            let d1 = (li + lj - vphi * half).sinh();
            let d2 = (li - lj - vphi * half).sinh();
            if d1.norm() < guard || d2.norm() < guard {
                return Err(Error::PoleProximity {
                    magnitude: d1.norm().min(d2.norm()).to_f64().unwrap_or(0.0),
                });
            }
            rhs *= (li + lj + vphi * half).sinh() * (li - lj + vphi * half).sinh() / (d1 * d2);
        }
        // difference normalized by the magnitude of the two sides
        let scale = Complex::new(R::one() + lhs.norm() + rhs.norm(), R::zero());
        out.push((lhs - rhs) / scale);
    }
    Ok(out)
}

/// Three-term recurrence coefficients at N = 1 (Askey-Wilson).
#[derive(Debug, Clone, Copy)]
pub struct AWCoeffs<R: Real> {
    pub n: usize,
    pub b: Complex<R>,
    pub c: Complex<R>,
    pub a: Complex<R>,
}

/// Closed-form recurrence coefficients for the N = 1 family:
///
/// ```text
/// b_n = (1-x1 x2 q^n)(1-x1 x3 q^n)(1-x1 x4 q^n)(1-P q^{n-1})
///       / (x1 (1-P q^{2n-1})(1-P q^{2n})),
/// c_n = x1 (1-q^n)(1-x2 x3 q^{n-1})(1-x2 x4 q^{n-1})(1-x3 x4 q^{n-1})
///       / ((1-P q^{2n-2})(1-P q^{2n-1})),
/// a_n = x1 + 1/x1 - b_n - c_n,       P = x1 x2 x3 x4.
/// ```
pub fn aw_coeffs<R: Real>(fam: &TridiagFamily<R>, n: usize) -> Result<AWCoeffs<R>> {
    if fam.family_n != 1 {
        return Err(Error::UnsupportedFamily(fam.family_n));
    }
    let q = fam.q.q;
    let [x1, x2, x3, x4] = [fam.chi[0], fam.chi[1], fam.chi[2], fam.chi[3]];
    let p = x1 * x2 * x3 * x4;
    let ni = n as i32;
    let guard = r::<R>(1e-10);
    let db1 = one::<R>() - p * q.powi(2 * ni - 1);
    let db2 = one::<R>() - p * q.powi(2 * ni);
    let dc1 = one::<R>() - p * q.powi(2 * ni - 2);
    let dc2 = one::<R>() - p * q.powi(2 * ni - 1);
    for d in [db1, db2, dc1, dc2] {
        if d.norm() < guard {
            return Err(Error::DegenerateParameters(format!(
                "recurrence denominator vanishes at n = {n}; parameters are not generic"
            )));
        }
    }
    let b = (one::<R>() - x1 * x2 * q.powi(ni))
        * (one::<R>() - x1 * x3 * q.powi(ni))
        * (one::<R>() - x1 * x4 * q.powi(ni))
        * (one::<R>() - p * q.powi(ni - 1))
        / (x1 * db1 * db2);
    let c = x1
        * (one::<R>() - q.powi(ni))
        * (one::<R>() - x2 * x3 * q.powi(ni - 1))
        * (one::<R>() - x2 * x4 * q.powi(ni - 1))
        * (one::<R>() - x3 * x4 * q.powi(ni - 1))
        / (dc1 * dc2);
    let a = x1 + x1.finv() - b - c;
    Ok(AWCoeffs { n, b, c, a })
}

/// Relative closure residual of `x psi~_n = b_n psi~_{n+1} + a_n psi~_n +
/// c_n psi~_{n-1}` in the normalization carrying leading coefficient
/// `prod_{k<n} 1/b_k` (the one the closed-form coefficients refer to).
pub fn aw_recurrence_residual<R: Real>(fam: &TridiagFamily<R>, n: usize) -> Result<R> {
    if n == 0 {
        return Err(Error::InvalidInput("recurrence check needs n >= 1".into()));
    }
    let aw = aw_coeffs(fam, n)?;
    let lead = |m: usize| -> Result<Complex<R>> {
        let mut acc = one::<R>();
        for k in 0..m {
            acc /= aw_coeffs(fam, k)?.b;
        }
        Ok(acc)
    };
    let norm_state = |m: usize| -> Result<SymLaurentPoly<R>> {
        let st = build_psi(fam, m)?;
        Ok(st[0].poly().scale(lead(m)?))
    };
    let pm1 = norm_state(n - 1)?;
    let pn = norm_state(n)?;
    let pp1 = norm_state(n + 1)?;
    let resid = pn
        .mul_x()
        .add(&pp1.scale(-aw.b))
        .add(&pn.scale(-aw.a))
        .add(&pm1.scale(-aw.c));
    let num = resid
        .sym_coeffs()
        .iter()
        .map(|c| c.norm())
        .fold(R::zero(), R::max);
    let den = pn
        .sym_coeffs()
        .iter()
        .chain(pp1.sym_coeffs())
        .chain(pm1.sym_coeffs())
        .map(|c| c.norm())
        .fold(R::zero(), R::max)
        + r::<R>(1e-30);
    Ok(num / den)
}

/// Numeric three-term coefficients in the monic normalization:
/// `x P_n = P_{n+1} + alpha_n P_n + beta_n P_{n-1}` for monic `P_m`.
///
/// Used where no closed form is available (N = 2); for N = 1 these relate to
/// the closed-form coefficients by `alpha_n = a_n`, `beta_n = b_{n-1} c_n`.
pub fn monic_recurrence_coeffs<R: Real>(
    fam: &TridiagFamily<R>,
    n: usize,
) -> Result<(Complex<R>, Complex<R>)> {
    let pn = build_psi_capped(fam, n, DEGREE_CAP.max(n + 1))?[0].poly();
    let pp1 = build_psi_capped(fam, n + 1, DEGREE_CAP.max(n + 2))?[0].poly();
    let diff = pn.mul_x().add(&pp1.scale(-one::<R>()));
    let get = |p: &SymLaurentPoly<R>, j: i64| -> Complex<R> {
        if j < 0 || j as usize >= p.sym_coeffs().len() {
            zero()
        } else {
            p.sym_coeffs()[j as usize]
        }
    };
    let alpha = get(&diff, n as i64);
    let beta = if n == 0 {
        zero::<R>()
    } else {
        let rem = diff.add(&pn.scale(-alpha));
        get(&rem, n as i64 - 1)
    };
    Ok((alpha, beta))
}

/// Double-word compensated arithmetic for polynomial evaluation near
/// clustered roots.
mod dd {
    use num_complex::Complex;

    use crate::scalar::Real;

    #[derive(Clone, Copy)]
    struct Two<R: Real> {
        hi: R,
        lo: R,
    }

    fn two_sum<R: Real>(a: R, b: R) -> Two<R> {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Two { hi: s, lo: err }
    }

    fn two_prod<R: Real>(a: R, b: R) -> Two<R> {
        let p = a * b;
        let err = a.mul_add(b, -p);
        Two { hi: p, lo: err }
    }

    impl<R: Real> Two<R> {
        fn from(a: R) -> Self {
            Two { hi: a, lo: R::zero() }
        }

        fn add(self, other: Self) -> Self {
            let s = two_sum(self.hi, other.hi);
            let lo = s.lo + self.lo + other.lo;
            let t = two_sum(s.hi, lo);
            Two { hi: t.hi, lo: t.lo }
        }

        fn mul(self, other: Self) -> Self {
            let p = two_prod(self.hi, other.hi);
            let lo = p.lo + self.hi * other.lo + self.lo * other.hi;
            let t = two_sum(p.hi, lo);
            Two { hi: t.hi, lo: t.lo }
        }
    }

    #[derive(Clone, Copy)]
    struct CTwo<R: Real> {
        re: Two<R>,
        im: Two<R>,
    }

    impl<R: Real> CTwo<R> {
        fn from(z: Complex<R>) -> Self {
            CTwo {
                re: Two::from(z.re),
                im: Two::from(z.im),
            }
        }

        fn add(self, other: Self) -> Self {
            CTwo {
                re: self.re.add(other.re),
                im: self.im.add(other.im),
            }
        }

        fn mul(self, other: Self) -> Self {
            let rr = self.re.mul(other.re);
            let ii = self.im.mul(other.im);
            let ri = self.re.mul(other.im);
            let ir = self.im.mul(other.re);
            CTwo {
                re: rr.add(Two {
                    hi: -ii.hi,
                    lo: -ii.lo,
                }),
                im: ri.add(ir),
            }
        }

        fn collapse(self) -> Complex<R> {
            Complex::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
        }
    }

    /// Horner evaluation of `sum_j coeffs[j] x^j` in double-word precision.
    pub fn horner<R: Real>(coeffs: &[Complex<R>], x: Complex<R>) -> Complex<R> {
        let xd = CTwo::from(x);
        let mut acc = CTwo::from(Complex::new(R::zero(), R::zero()));
        for &c in coeffs.iter().rev() {
            acc = acc.mul(xd).add(CTwo::from(c));
        }
        acc.collapse()
    }
}

/// Coefficientwise relative residual of `W0 psi_n = lambda_n psi_n` for an
/// already constructed state.
pub fn eigen_residual<R: Real>(fam: &TridiagFamily<R>, state: &BetheState<R>) -> Result<R> {
    let psi = state.poly();
    let out = apply_w0_poly(fam, &psi)?;
    let want = psi.scale(state.lambda);
    let diff = out.add(&want.scale(-one::<R>()));
    let num = diff
        .sym_coeffs()
        .iter()
        .map(|c| c.norm())
        .fold(R::zero(), R::max);
    let den = want
        .sym_coeffs()
        .iter()
        .map(|c| c.norm())
        .fold(R::zero(), R::max)
        + r::<R>(1e-30);
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::make_family;
    use crate::scalar::{c, QParams};

    type C = Complex<f64>;

    fn fam1() -> TridiagFamily<f64> {
        // the physically natural regime |q| = 1 keeps Bethe-root extraction
        // well conditioned at higher degrees
        let q = QParams::from_phi(c(0.0, 0.41)).unwrap();
        make_family(
            1,
            vec![c(0.41, 0.11), c(-0.57, 0.21), c(0.88, 0.19), c(0.67, -0.39)],
            vec![],
            q,
        )
        .unwrap()
    }

    #[test]
    fn ladder_examples() {
        let fam = fam1();
        let q = fam.q.q;
        let prod: C = fam.chi.iter().product();
        let l0 = eigenvalue_ladder(&fam, 0);
        assert!((l0 - (C::new(1.0, 0.0) + prod / q)).norm() < 1e-14);
        let l1 = eigenvalue_ladder(&fam, 1);
        assert!((l1 - (prod + q.finv())).norm() < 1e-14);
        // all chi = 1: lambda_n = q^{n-1} + q^{-n}
        let funit = make_family(1, vec![c(1.0, 0.0); 4], vec![], fam.q).unwrap();
        for n in 0..5 {
            let want = q.powi(n - 1) + q.powi(-n);
            assert!((eigenvalue_ladder(&funit, n as usize) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn psi0_is_one() {
        let fam = fam1();
        let st = build_psi(&fam, 0).unwrap();
        assert_eq!(st.len(), 1);
        assert!(st[0].roots.is_empty());
        assert_eq!(st[0].x_coeffs.len(), 1);
        assert!((st[0].x_coeffs[0] - C::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn generic_states_certify_bethe_equations() {
        let fam = fam1();
        for n in 1..=6 {
            let st = build_psi(&fam, n).unwrap();
            assert_eq!(st.len(), 1, "dim V_n = 1 for generic N=1 parameters");
            let s = &st[0];
            assert_eq!(s.roots.len(), n);
            for &res in &s.residuals {
                assert!(res < 1e-9, "Bethe residual {res} at n={n}");
            }
            assert!(eigen_residual(&fam, s).unwrap() < 1e-10);
        }
    }

    #[test]
    fn roots_have_canonical_modulus() {
        let fam = fam1();
        let st = &build_psi(&fam, 4).unwrap()[0];
        for z in &st.roots {
            assert!(z.norm() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn hyperbolic_bethe_equations_agree() {
        let fam = fam1();
        for n in [1usize, 2, 3] {
            let st = &build_psi(&fam, n).unwrap()[0];
            let lambdas: Vec<C> = st.roots.iter().map(|z| z.ln() * c(0.5, 0.0)).collect();
            let res = bethe_residual_hyperbolic(&fam, &lambdas).unwrap();
            for v in &res {
                assert!(v.norm() < 1e-8, "BAfin residual {} at n={n}", v.norm());
            }
            if n == 1 {
                // empty product on the right-hand side: LHS must equal 1
                assert!(res[0].norm() < 1e-9);
            }
        }
    }

    #[test]
    fn perturbed_root_breaks_bethe_equations() {
        let fam = fam1();
        let st = &build_psi(&fam, 2).unwrap()[0];
        let mut lambdas: Vec<C> = st.roots.iter().map(|z| z.ln() * c(0.5, 0.0)).collect();
        lambdas[0] += c(0.05, 0.0);
        let res = bethe_residual_hyperbolic(&fam, &lambdas).unwrap();
        assert!(res.iter().any(|v| v.norm() > 1e-3));
    }

    #[test]
    fn aw_coeff_basics() {
        let fam = fam1();
        let a0 = aw_coeffs(&fam, 0).unwrap();
        assert!(a0.c.norm() < 1e-14, "c_0 = 0 via the (1-q^0) factor");
        for n in 0..6 {
            let w = aw_coeffs(&fam, n).unwrap();
            let sum = w.a + w.b + w.c;
            let want = fam.chi[0] + fam.chi[0].finv();
            assert!((sum - want).norm() < 1e-12, "sum rule at n={n}");
        }
    }

    #[test]
    fn recurrence_closes_with_closed_form_coefficients() {
        let fam = fam1();
        for n in 1..=8 {
            let res = aw_recurrence_residual(&fam, n).unwrap();
            assert!(res < 1e-10, "recurrence residual {res} at n={n}");
        }
    }

    #[test]
    fn monic_coeffs_match_closed_form() {
        let fam = fam1();
        for n in 1..=4 {
            let (alpha, beta) = monic_recurrence_coeffs(&fam, n).unwrap();
            let wn = aw_coeffs(&fam, n).unwrap();
            let wm = aw_coeffs(&fam, n - 1).unwrap();
            assert!((alpha - wn.a).norm() < 1e-10, "alpha at n={n}");
            assert!((beta - wm.b * wn.c).norm() < 1e-10, "beta at n={n}");
        }
    }

    #[test]
    fn degree_cap_enforced() {
        let fam = fam1();
        assert!(build_psi(&fam, DEGREE_CAP + 1).is_err());
    }
}
