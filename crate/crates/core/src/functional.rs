//! The infinite-dimensional functional representation.
//!
//! `W0` acts on functions of `z` as `phi(z) eta + phibar(z) eta^{-1} + mu(z)`
//! with the shift `(eta f)(z) = f(qz)`, and `W1` multiplies by `z + 1/z`.
//! The rational family implemented here is
//!
//! ```text
//! phi(z) = prod_k (1 - chi_k z) / [ (1-z^2)(1-q z^2) prod_k (1 - xi_k z) ],
//! phibar(z) = phi(1/z),  mu = d - phi - phibar,  d constant,
//! ```
//!
//! with 2N+2 parameters `chi` and 2N-2 parameters `xi` (N = 1, 2). The pair
//! `(W0, W1)` satisfies the tridiagonal relations exactly when the constraint
//! functionals `beta` and `gamma` obey `beta = 0`, `gamma = rho`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, RationalFunc, SymLaurentPoly};
use crate::matrix::Matrix;
use crate::scalar::{one, r, zero, QParams, Real};

/// Pole-proximity guard on denominator magnitudes.
const POLE_GUARD: f64 = 1e-12;

/// A valid parameter family for the rational realization.
#[derive(Debug, Clone)]
pub struct TridiagFamily<R: Real> {
    pub family_n: usize,
    pub chi: Vec<Complex<R>>,
    pub xi: Vec<Complex<R>>,
    pub d_const: Complex<R>,
    pub rho: Complex<R>,
    pub rho_star: Complex<R>,
    pub q: QParams<R>,
}

/// The q-difference operator triple `(phi, phibar, mu)` of a family.
#[derive(Debug, Clone)]
pub struct QDiffOperator<R: Real> {
    pub phi_fn: RationalFunc<R>,
    pub phibar_fn: RationalFunc<R>,
    pub d_const: Complex<R>,
    pub q: QParams<R>,
}

impl<R: Real> QDiffOperator<R> {
    /// `mu(z) = d - phi(z) - phibar(z)`.
    pub fn mu(&self, z: Complex<R>) -> Result<Complex<R>> {
        Ok(self.d_const - self.phi_fn.eval(z)? - self.phibar_fn.eval(z)?)
    }

    /// `(W0 f)(z) = phi(z) f(qz) + phibar(z) f(z/q) + mu(z) f(z)` for any
    /// evaluable `f`.
    pub fn apply<F: Fn(Complex<R>) -> Complex<R>>(
        &self,
        f: F,
        z: Complex<R>,
    ) -> Result<Complex<R>> {
        let q = self.q.q;
        Ok(self.phi_fn.eval(z)? * f(q * z)
            + self.phibar_fn.eval(z)? * f(z / q)
            + self.mu(z)? * f(z))
    }
}

/// Cached Laurent kernels for exact operator application over the common
/// denominator `dd = D(z) D(1/z)`.
#[derive(Debug, Clone)]
pub struct FamilyKernels<R: Real> {
    /// `N(z) D(1/z)`, the numerator of `phi` over `dd`.
    pub phi_part: LaurentPoly<R>,
    /// `N(1/z) D(z)`, the numerator of `phibar` over `dd`.
    pub phibar_part: LaurentPoly<R>,
    /// `d dd - phi_part - phibar_part`, the numerator of `mu` over `dd`.
    pub mu_part: LaurentPoly<R>,
    pub dd: LaurentPoly<R>,
}

impl<R: Real> TridiagFamily<R> {
    pub fn phi_numerator(&self) -> LaurentPoly<R> {
        let mut num = LaurentPoly::constant(one::<R>());
        for &chi in &self.chi {
            num = num.mul(&LaurentPoly::from_terms([(0, one::<R>()), (1, -chi)]));
        }
        num
    }

    pub fn phi_denominator(&self) -> LaurentPoly<R> {
        let q = self.q.q;
        let mut den = LaurentPoly::from_terms([(0, one::<R>()), (2, -one::<R>())])
            .mul(&LaurentPoly::from_terms([(0, one::<R>()), (2, -q)]));
        for &xi in &self.xi {
            den = den.mul(&LaurentPoly::from_terms([(0, one::<R>()), (1, -xi)]));
        }
        den
    }

    pub fn phi(&self) -> RationalFunc<R> {
        RationalFunc::new(self.phi_numerator(), self.phi_denominator())
            .expect("family denominator is nonzero")
    }

    pub fn phibar(&self) -> RationalFunc<R> {
        self.phi().invert_arg()
    }

    pub fn qdiff_operator(&self) -> QDiffOperator<R> {
        QDiffOperator {
            phi_fn: self.phi(),
            phibar_fn: self.phibar(),
            d_const: self.d_const,
            q: self.q,
        }
    }

    pub fn kernels(&self) -> FamilyKernels<R> {
        let num = self.phi_numerator();
        let den = self.phi_denominator();
        let num_bar = num.invert_arg();
        let den_bar = den.invert_arg();
        let phi_part = num.mul(&den_bar);
        let phibar_part = num_bar.mul(&den);
        let dd = den.mul(&den_bar);
        let mu_part = dd.scale(self.d_const).sub(&phi_part).sub(&phibar_part);
        FamilyKernels {
            phi_part,
            phibar_part,
            mu_part,
            dd,
        }
    }

    /// `lambda_n = C q^n + q^{-n}` with `C = prod(chi) / (q prod(xi))`.
    pub fn ladder_constant(&self) -> Complex<R> {
        let mut c = one::<R>();
        for &chi in &self.chi {
            c *= chi;
        }
        for &xi in &self.xi {
            c /= xi;
        }
        c / self.q.q
    }
}

/// Assemble a family, filling `d`, `rho`, `rho*` and checking the parameter
/// relations for N = 2.
pub fn make_family<R: Real>(
    family_n: usize,
    chi: Vec<Complex<R>>,
    xi: Vec<Complex<R>>,
    q: QParams<R>,
) -> Result<TridiagFamily<R>> {
    if family_n != 1 && family_n != 2 {
        return Err(Error::UnsupportedFamily(family_n));
    }
    if chi.len() != 2 * family_n + 2 {
        return Err(Error::InvalidInput(format!(
            "family N={family_n} needs {} chi parameters, got {}",
            2 * family_n + 2,
            chi.len()
        )));
    }
    if xi.len() != 2 * family_n - 2 {
        return Err(Error::InvalidInput(format!(
            "family N={family_n} needs {} xi parameters, got {}",
            2 * family_n - 2,
            xi.len()
        )));
    }
    if family_n == 2 {
        let res = prest_residual(&chi, xi[0], xi[1]);
        let worst = res.0.norm().max(res.1.norm());
        if worst > r::<R>(1e-8) {
            return Err(Error::InvalidInput(format!(
                "xi pair does not satisfy the parameter relations (residual {:e})",
                worst.to_f64().unwrap_or(f64::NAN)
            )));
        }
    }
    let mut prod = one::<R>();
    for &c in &chi {
        prod *= c;
    }
    for &x in &xi {
        prod /= x;
    }
    let qq = q.q;
    let c_over_q = prod / qq;
    let qmq = qq - qq.finv();
    Ok(TridiagFamily {
        family_n,
        chi,
        xi,
        d_const: one::<R>() + c_over_q,
        rho: -qmq * qmq * c_over_q,
        rho_star: -qmq * qmq,
        q,
    })
}

/// Elementary symmetric polynomial `e_m` of the parameter list.
fn esym<R: Real>(vals: &[Complex<R>], m: usize) -> Complex<R> {
    if m == 0 {
        return one();
    }
    if m > vals.len() {
        return zero();
    }
    let mut dp = vec![zero::<R>(); m + 1];
    dp[0] = one();
    for &v in vals {
        for k in (1..=m).rev() {
            let t = dp[k - 1] * v;
            dp[k] += t;
        }
    }
    dp[m]
}

/// Complete homogeneous polynomial `h_m(a, b) = sum_{j=0}^m a^j b^{m-j}`.
fn hfull<R: Real>(a: Complex<R>, b: Complex<R>, m: i64) -> Complex<R> {
    if m < 0 {
        return zero();
    }
    let mut acc = zero::<R>();
    for j in 0..=m {
        acc += a.powi(j as i32) * b.powi((m - j) as i32);
    }
    acc
}

/// The two polynomial relations constraining `(xi_1, xi_2)` at N = 2.
///
/// First relation: `sum_{k=-2}^{3} (-1)^k e_{3+k}(chi) (xi1 xi2)^{3-k}
/// h_{2+k}(xi1, xi2)`; the second is its image under inverting every
/// parameter, `sum_{k=-3}^{2} (-1)^k e_{3+k}(chi) h_{2-k}(xi1, xi2)`.
pub fn prest_residual<R: Real>(
    chi: &[Complex<R>],
    xi1: Complex<R>,
    xi2: Complex<R>,
) -> (Complex<R>, Complex<R>) {
    let p = xi1 * xi2;
    let mut r1 = zero::<R>();
    for k in -2i64..=3 {
        let sign = if k.rem_euclid(2) == 0 {
            one::<R>()
        } else {
            -one::<R>()
        };
        r1 += sign * esym(chi, (3 + k) as usize) * p.powi((3 - k) as i32) * hfull(xi1, xi2, 2 + k);
    }
    let mut r2 = zero::<R>();
    for k in -3i64..=2 {
        let sign = if k.rem_euclid(2) == 0 {
            one::<R>()
        } else {
            -one::<R>()
        };
        r2 += sign * esym(chi, (3 + k) as usize) * hfull(xi1, xi2, 2 - k);
    }
    (r1, r2)
}

/// A validated `(xi_1, xi_2)` root of the parameter relations.
#[derive(Debug, Clone)]
pub struct PrestSolution<R: Real> {
    pub xi: (Complex<R>, Complex<R>),
    /// max norm of the two relations at the root.
    pub residual: R,
    /// max of `|beta|` and `|gamma - rho|` over the validation samples.
    pub constraint_residual: R,
}

/// Find all `(xi_1, xi_2)` solving the N = 2 parameter relations, validated
/// against the constraint functionals. Newton iteration from a deterministic
/// grid of starting points on scaled circles, deduplicated up to the
/// `xi_1 <-> xi_2` symmetry.
pub fn solve_prest<R: Real>(chi: &[Complex<R>], q: QParams<R>) -> Result<Vec<PrestSolution<R>>> {
    if chi.len() != 6 {
        return Err(Error::InvalidInput(
            "solve_prest needs 6 chi parameters".into(),
        ));
    }
    if chi.iter().any(|c| c.norm() < r::<R>(1e-12)) {
        return Err(Error::InvalidInput(
            "solve_prest needs nonvanishing chi".into(),
        ));
    }
    let radii = [0.5, 1.0, 2.0];
    let angles = 8usize;
    let mut best_residual = R::infinity();
    let mut raw: Vec<(Complex<R>, Complex<R>, R)> = Vec::new();
    for &r1 in &radii {
        for &r2 in &radii {
            for a1 in 0..angles {
                for a2 in 0..angles {
                    let t1 =
                        r::<R>(2.0 * std::f64::consts::PI * (a1 as f64 + 0.23) / angles as f64);
                    let t2 =
                        r::<R>(2.0 * std::f64::consts::PI * (a2 as f64 + 0.57) / angles as f64);
                    let x0 = Complex::from_polar(r::<R>(r1), t1);
                    let y0 = Complex::from_polar(r::<R>(r2), t2);
                    let Some((x, y, res)) = newton_prest(chi, x0, y0) else {
                        continue;
                    };
                    if res < best_residual {
                        best_residual = res;
                    }
                    if res < r::<R>(1e-11) {
                        let dup = raw.iter().any(|&(a, b, _)| {
                            ((a - x).norm() < r::<R>(1e-6) && (b - y).norm() < r::<R>(1e-6))
                                || ((a - y).norm() < r::<R>(1e-6)
                                    && (b - x).norm() < r::<R>(1e-6))
                        });
                        if !dup {
                            raw.push((x, y, res));
                        }
                    }
                }
            }
        }
    }
    if raw.is_empty() {
        return Err(Error::NoSolution {
            best_residual: best_residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    // keep only roots that define a valid family (gamma constant = rho)
    let mut out = Vec::new();
    for (x, y, res) in raw {
        let fam = match make_family(2, chi.to_vec(), vec![x, y], q) {
            Ok(f) => f,
            Err(_) => continue,
        };
        if let Ok(cres) = constraint_samples_residual(&fam, 16) {
            if cres < r::<R>(1e-8) {
                out.push(PrestSolution {
                    xi: (x, y),
                    residual: res,
                    constraint_residual: cres,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoSolution {
            best_residual: best_residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    out.sort_by(|a, b| {
        (a.xi.0.re, a.xi.0.im, a.xi.1.re, a.xi.1.im)
            .partial_cmp(&(b.xi.0.re, b.xi.0.im, b.xi.1.re, b.xi.1.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

fn newton_prest<R: Real>(
    chi: &[Complex<R>],
    mut x: Complex<R>,
    mut y: Complex<R>,
) -> Option<(Complex<R>, Complex<R>, R)> {
    let h = Complex::new(r::<R>(1e-7), R::zero());
    for _ in 0..80 {
        let (f1, f2) = prest_residual(chi, x, y);
        let res = f1.norm().max(f2.norm());
        if res < r::<R>(5e-14) {
            return Some((x, y, res));
        }
        let (g1x, g2x) = prest_residual(chi, x + h, y);
        let (g1y, g2y) = prest_residual(chi, x, y + h);
        let j11 = (g1x - f1) / h;
        let j12 = (g1y - f1) / h;
        let j21 = (g2x - f2) / h;
        let j22 = (g2y - f2) / h;
        let det = j11 * j22 - j12 * j21;
        if det.norm() < r::<R>(1e-30) {
            return None;
        }
        let dx = -(f1 * j22 - j12 * f2) / det;
        let dy = -(j11 * f2 - f1 * j21) / det;
        x += dx;
        y += dy;
        if x.norm() > r::<R>(1e6) || y.norm() > r::<R>(1e6) {
            return None;
        }
    }
    let (f1, f2) = prest_residual(chi, x, y);
    let res = f1.norm().max(f2.norm());
    if res < r::<R>(5e-13) {
        Some((x, y, res))
    } else {
        None
    }
}

/// Deterministic sample ring used by the constraint checks, dodging the
/// `|z| = 1` and `|z| = q^{+-1/2}` pole circles for moderate `q`.
pub fn sample_points<R: Real>(count: usize) -> Vec<Complex<R>> {
    (0..count)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.318) / count as f64;
            let rad = 0.78 + 0.05 * ((k % 3) as f64);
            Complex::from_polar(r::<R>(rad), r::<R>(t))
        })
        .collect()
}

/// Max over samples of `|beta|` and `|gamma - rho|`.
pub fn constraint_samples_residual<R: Real>(fam: &TridiagFamily<R>, count: usize) -> Result<R> {
    let mut worst = R::zero();
    let mut used = 0;
    for z in sample_points(count + 8) {
        let b = match beta_functional(fam, z) {
            Ok(v) => v,
            Err(Error::PoleProximity { .. }) => continue,
            Err(e) => return Err(e),
        };
        let g = match gamma_functional(fam, z) {
            Ok(v) => v,
            Err(Error::PoleProximity { .. }) => continue,
            Err(e) => return Err(e),
        };
        worst = worst.max(b.norm()).max((g - fam.rho).norm());
        used += 1;
        if used >= count {
            break;
        }
    }
    if used == 0 {
        return Err(Error::PoleProximity { magnitude: 0.0 });
    }
    Ok(worst)
}

fn eval_phi<R: Real>(fam: &TridiagFamily<R>, z: Complex<R>) -> Result<Complex<R>> {
    let num = fam.phi_numerator().eval(z);
    let den = fam.phi_denominator().eval(z);
    if den.norm() < r::<R>(POLE_GUARD) {
        return Err(Error::PoleProximity {
            magnitude: den.norm().to_f64().unwrap_or(0.0),
        });
    }
    Ok(num / den)
}

/// `phi + phibar - d` evaluated at `z`.
fn s_combination<R: Real>(fam: &TridiagFamily<R>, z: Complex<R>) -> Result<Complex<R>> {
    Ok(eval_phi(fam, z)? + eval_phi(fam, z.finv())? - fam.d_const)
}

/// The first constraint functional; vanishes identically on valid families.
pub fn beta_functional<R: Real>(fam: &TridiagFamily<R>, z: Complex<R>) -> Result<Complex<R>> {
    let q = fam.q.q;
    let s_up = s_combination(fam, q * z)?;
    let s_mid = s_combination(fam, z)?;
    let s_dn = s_combination(fam, z / q)?;
    let zi = z.finv();
    let q2 = q * q;
    let term1 = s_up * ((q2 - q) * z + (q2.finv() - q.finv()) * zi);
    let term2 = s_mid * ((q - q.finv()) * (zi - z));
    let term3 = s_dn * ((q.finv() - q2.finv()) * z + (q - q2) * zi);
    Ok(term1 + term2 + term3)
}

/// The second constraint functional; equals `rho` (independently of `z`) on
/// valid families.
pub fn gamma_functional<R: Real>(fam: &TridiagFamily<R>, z: Complex<R>) -> Result<Complex<R>> {
    let q = fam.q.q;
    let x = z + z.finv();
    let eta_x = q * z + (q * z).finv();
    let eta_inv_x = z / q + (z / q).finv();
    let eta2_x = q * q * z + (q * q * z).finv();
    if (eta_x - x).norm() < r::<R>(POLE_GUARD) {
        return Err(Error::PoleProximity {
            magnitude: (eta_x - x).norm().to_f64().unwrap_or(0.0),
        });
    }
    let s_up = s_combination(fam, q * z)?;
    let s_mid = s_combination(fam, z)?;
    let a = eval_phi(fam, z)? * eval_phi(fam, (q * z).finv())?;
    let b = eval_phi(fam, z.finv())? * eval_phi(fam, z / q)?;
    let c = eval_phi(fam, q * z)? * eval_phi(fam, (q * q * z).finv())?;
    let qpq = q + q.finv();
    let two = Complex::new(r::<R>(2.0), R::zero());
    let gamma = s_up * s_up + s_mid * s_mid - qpq * s_up * s_mid
        + (two + qpq) * a
        + b
        + c
        + (one::<R>() + qpq) / (eta_x - x) * (b * (eta_inv_x - x) + c * (eta_x - eta2_x));
    Ok(gamma)
}

/// Pointwise action of `W0` on a symmetric polynomial.
pub fn apply_w0<R: Real>(
    fam: &TridiagFamily<R>,
    f: &SymLaurentPoly<R>,
    z: Complex<R>,
) -> Result<Complex<R>> {
    let q = fam.q.q;
    let phi = eval_phi(fam, z)?;
    let phibar = eval_phi(fam, z.finv())?;
    let mu = fam.d_const - phi - phibar;
    Ok(phi * f.eval(q * z) + phibar * f.eval(z / q) + mu * f.eval(z))
}

/// Exact polynomial action of `W0`: assembles the numerator over the common
/// denominator and divides exactly, then cross-checks the result pointwise.
///
/// Fails with a diagnostic when the division remainder or the pointwise fit
/// exceeds tolerance, which signals an invalid family.
pub fn apply_w0_poly<R: Real>(
    fam: &TridiagFamily<R>,
    f: &SymLaurentPoly<R>,
) -> Result<SymLaurentPoly<R>> {
    let ker = fam.kernels();
    let fl = f.to_laurent();
    let q = fam.q.q;
    let num = ker
        .phi_part
        .mul(&fl.scale_arg(q))
        .add(&ker.phibar_part.mul(&fl.scale_arg(q.finv())))
        .add(&ker.mu_part.mul(&fl));
    let f_scale = f
        .sym_coeffs()
        .iter()
        .map(|c| c.norm())
        .fold(R::zero(), R::max);
    let scale = num.max_coeff_norm() + ker.dd.max_coeff_norm() * f_scale + r::<R>(1e-30);
    let (quot, rem) = num.div_exact(&ker.dd)?;
    if rem / scale > r::<R>(1e-8) {
        return Err(Error::InvalidInput(format!(
            "W0 does not map the polynomial back to a polynomial (relative remainder {:e}); invalid family",
            (rem / scale).to_f64().unwrap_or(f64::NAN)
        )));
    }
    let out = SymLaurentPoly::from_laurent(&quot, r::<R>(1e-8))?;
    // pointwise fit certificate
    let mut worst = R::zero();
    let mut used = 0;
    for z in sample_points::<R>(8) {
        match apply_w0(fam, f, z) {
            Ok(direct) => {
                worst = worst.max((direct - out.eval(z)).norm());
                used += 1;
            }
            Err(Error::PoleProximity { .. }) => continue,
            Err(e) => return Err(e),
        }
        if used >= 4 {
            break;
        }
    }
    let out_scale = out
        .sym_coeffs()
        .iter()
        .map(|c| c.norm())
        .fold(R::zero(), R::max)
        + r::<R>(1.0);
    if worst / out_scale > r::<R>(1e-8) {
        return Err(Error::InvalidInput(format!(
            "polynomial reconstruction of W0 f failed its pointwise check ({:e})",
            (worst / out_scale).to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(out)
}

/// Matrix of `W0` on the symmetric basis `{1, z^k + z^{-k}}` up to degree
/// `max_degree`; upper triangular with the eigenvalue ladder on the diagonal.
///
/// The symmetric basis stays well conditioned at high degree, unlike the
/// x-power basis whose change of basis grows like `2^degree`.
pub fn w0_matrix<R: Real>(fam: &TridiagFamily<R>, max_degree: usize) -> Result<Matrix<R>> {
    let n = max_degree + 1;
    let mut m = Matrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![zero::<R>(); j + 1];
        e[j] = one();
        let pj = SymLaurentPoly::from_sym_coeffs(e);
        let out = apply_w0_poly(fam, &pj)?;
        let sc = out.sym_coeffs();
        if sc.len() > n {
            return Err(Error::InvalidInput(
                "W0 raised the polynomial degree; invalid family".into(),
            ));
        }
        for (i, &c) in sc.iter().enumerate() {
            m[(i, j)] = c;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    type C = Complex<f64>;

    fn q_real() -> QParams<f64> {
        QParams::from_phi(c(0.239, 0.0)).unwrap()
    }

    fn n1_family() -> TridiagFamily<f64> {
        make_family(
            1,
            vec![c(0.41, 0.0), c(-0.57, 0.0), c(0.88, 0.19), c(1.17, 0.0)],
            vec![],
            q_real(),
        )
        .unwrap()
    }

    #[test]
    fn family_scalars_match_closed_forms() {
        let fam = n1_family();
        let q = fam.q.q;
        let prod: C = fam.chi.iter().product();
        assert!((fam.rho - (-(q - q.finv()).powi(2) * prod / q)).norm() < 1e-15);
        assert!((fam.rho_star - (-(q - q.finv()).powi(2))).norm() < 1e-15);
        assert!((fam.d_const - (C::new(1.0, 0.0) + prod / q)).norm() < 1e-15);
    }

    #[test]
    fn unit_chi_d_const() {
        let q = q_real();
        let fam = make_family(1, vec![c(1.0, 0.0); 4], vec![], q).unwrap();
        assert!((fam.d_const - (C::new(1.0, 0.0) + q.q.finv())).norm() < 1e-15);
    }

    #[test]
    fn wrong_lengths_rejected() {
        let q = q_real();
        assert!(make_family(1, vec![c(1.0, 0.0); 3], vec![], q).is_err());
        assert!(make_family(2, vec![c(1.0, 0.0); 6], vec![], q).is_err());
        assert!(matches!(
            make_family(3, vec![c(1.0, 0.0); 8], vec![c(1.0, 0.0); 4], q),
            Err(Error::UnsupportedFamily(3))
        ));
    }

    #[test]
    fn n1_constraints_hold() {
        let fam = n1_family();
        let mut used = 0;
        for z in sample_points::<f64>(20) {
            let Ok(b) = beta_functional(&fam, z) else {
                continue;
            };
            let Ok(g) = gamma_functional(&fam, z) else {
                continue;
            };
            assert!(b.norm() < 1e-10, "beta {} at {z}", b.norm());
            assert!((g - fam.rho).norm() < 1e-9, "gamma {}", (g - fam.rho).norm());
            used += 1;
        }
        assert!(used >= 16);
    }

    #[test]
    fn gamma_constant_across_points() {
        let fam = n1_family();
        let pts = sample_points::<f64>(6);
        let g0 = gamma_functional(&fam, pts[0]).unwrap();
        let g1 = gamma_functional(&fam, pts[3]).unwrap();
        assert!((g0 - g1).norm() < 1e-9);
    }

    #[test]
    fn broken_d_const_breaks_beta() {
        let mut fam = n1_family();
        fam.d_const += c(0.1, 0.0);
        let z = c(0.9, 0.31);
        let b = beta_functional(&fam, z).unwrap();
        assert!(b.norm() > 1e-3);
    }

    #[test]
    fn apply_w0_on_constant_gives_d() {
        let fam = n1_family();
        let one_poly = SymLaurentPoly::one_poly();
        let out = apply_w0_poly(&fam, &one_poly).unwrap();
        assert_eq!(out.degree(), 0);
        assert!((out.sym_coeffs()[0] - fam.d_const).norm() < 1e-13);
        let lam0 = fam.ladder_constant() + C::new(1.0, 0.0);
        assert!((out.sym_coeffs()[0] - lam0).norm() < 1e-13);
    }

    #[test]
    fn w0_matrix_is_upper_triangular_with_ladder() {
        let fam = n1_family();
        let m = w0_matrix(&fam, 8).unwrap();
        let q = fam.q.q;
        let cc = fam.ladder_constant();
        for i in 0..9usize {
            for j in 0..9usize {
                if i > j {
                    assert!(m[(i, j)].norm() < 1e-12, "lower entry ({i},{j})");
                }
            }
            let lam = cc * q.powi(i as i32) + q.powi(-(i as i32));
            assert!((m[(i, i)] - lam).norm() < 1e-11, "diagonal {i}");
        }
    }

    #[test]
    fn solve_prest_finds_validated_pairs() {
        let q: QParams<f64> = QParams::from_phi(c(0.207, 0.0)).unwrap();
        let chi = vec![
            c(0.45, 0.14),
            c(-0.08, 0.6),
            c(0.29, -0.75),
            c(0.97, -0.41),
            c(-0.63, 1.08),
            c(-0.87, 0.22),
        ];
        let sols = solve_prest(&chi, q).unwrap();
        assert!(!sols.is_empty());
        for s in &sols {
            assert!(s.residual < 1e-10, "prest residual {}", s.residual);
            assert!(s.constraint_residual < 1e-8);
            // swap symmetry: the swapped pair satisfies the relations too
            let (r1, r2) = prest_residual(&chi, s.xi.1, s.xi.0);
            assert!(r1.norm().max(r2.norm()) < 1e-9);
        }
        // a full family can be built from any returned pair
        let s0 = &sols[0];
        let fam = make_family(2, chi.clone(), vec![s0.xi.0, s0.xi.1], q).unwrap();
        assert!(constraint_samples_residual(&fam, 16).unwrap() < 1e-8);
        let z = c(0.86, 0.4);
        let g = gamma_functional(&fam, z).unwrap();
        assert!((g - fam.rho).norm() < 1e-8);
    }
}
