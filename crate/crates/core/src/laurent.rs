//! Laurent polynomials, symmetric Laurent polynomials and rational functions
//! in one complex variable.
//!
//! These are the function spaces of the q-difference representation: operator
//! coefficients live in `RationalFunc`, eigenfunctions in `SymLaurentPoly`.
//! Exact multiply/divide keeps operator assembly at machine precision instead
//! of relying on interpolation.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{one, r, zero, Real};

const COEFF_CUTOFF: f64 = 1e-300;

/// Laurent polynomial `sum_e coeff[e] z^e` with finite support.
///
/// Canonical form: no stored zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly<R: Real> {
    coeffs: BTreeMap<i64, Complex<R>>,
}

impl<R: Real> LaurentPoly<R> {
    pub fn zero_poly() -> Self {
        Self {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: Complex<R>) -> Self {
        Self::from_terms([(0, c)])
    }

    pub fn monomial(exp: i64, c: Complex<R>) -> Self {
        Self::from_terms([(exp, c)])
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, Complex<R>)>>(terms: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (e, c) in terms {
            *coeffs.entry(e).or_insert_with(zero) += c;
        }
        coeffs.retain(|_, c: &mut Complex<R>| c.norm() > r::<R>(COEFF_CUTOFF));
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exp: i64) -> Complex<R> {
        self.coeffs.get(&exp).copied().unwrap_or_else(zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex<R>)> + '_ {
        self.coeffs.iter().map(|(&e, &c)| (e, c))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (&e, &c) in &other.coeffs {
            *coeffs.entry(e).or_insert_with(zero) += c;
        }
        coeffs.retain(|_, c| c.norm() > r::<R>(COEFF_CUTOFF));
        Self { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-one::<R>()))
    }

    pub fn scale(&self, s: Complex<R>) -> Self {
        if s.norm() <= r::<R>(COEFF_CUTOFF) {
            return Self::zero_poly();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(&e, &c)| (e, c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut coeffs: BTreeMap<i64, Complex<R>> = BTreeMap::new();
        for (&e1, &c1) in &self.coeffs {
            for (&e2, &c2) in &other.coeffs {
                *coeffs.entry(e1 + e2).or_insert_with(zero) += c1 * c2;
            }
        }
        coeffs.retain(|_, c| c.norm() > r::<R>(COEFF_CUTOFF));
        Self { coeffs }
    }

    /// `f(z) -> f(c z)`.
    pub fn scale_arg(&self, c: Complex<R>) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&e, &a)| (e, a * c.powi(e as i32)))
                .collect(),
        }
    }

    /// `f(z) -> f(1/z)`.
    pub fn invert_arg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&e, &c)| (-e, c)).collect(),
        }
    }

    pub fn eval(&self, z: Complex<R>) -> Complex<R> {
        self.coeffs
            .iter()
            .fold(zero(), |acc, (&e, &c)| acc + c * z.powi(e as i32))
    }

    /// Exact Laurent division: returns the quotient and the max-norm of the
    /// remainder (which vanishes when `other` divides `self`).
    pub fn div_exact(&self, other: &Self) -> Result<(Self, R)> {
        if other.is_zero() {
            return Err(Error::InvalidInput(
                "division by the zero polynomial".into(),
            ));
        }
        if self.is_zero() {
            return Ok((Self::zero_poly(), R::zero()));
        }
        let ns = self.min_exp().unwrap();
        let ne = self.max_exp().unwrap();
        let ds = other.min_exp().unwrap();
        let de = other.max_exp().unwrap();
        let mut num: Vec<Complex<R>> = vec![zero(); (ne - ns + 1) as usize];
        for (&e, &c) in &self.coeffs {
            num[(e - ns) as usize] = c;
        }
        let mut den: Vec<Complex<R>> = vec![zero(); (de - ds + 1) as usize];
        for (&e, &c) in &other.coeffs {
            den[(e - ds) as usize] = c;
        }
        if num.len() < den.len() {
            let rem = num.iter().map(|c| c.norm()).fold(R::zero(), R::max);
            return Ok((Self::zero_poly(), rem));
        }
        let lead = *den.last().unwrap();
        let qlen = num.len() - den.len() + 1;
        let mut quot: Vec<Complex<R>> = vec![zero(); qlen];
        for k in (0..qlen).rev() {
            let f = num[k + den.len() - 1] / lead;
            quot[k] = f;
            for (j, &d) in den.iter().enumerate() {
                num[k + j] -= f * d;
            }
        }
        let rem_norm = num.iter().map(|c| c.norm()).fold(R::zero(), R::max);
        let shift = ns - ds;
        Ok((
            Self::from_terms(
                quot.into_iter()
                    .enumerate()
                    .map(|(i, c)| (shift + i as i64, c)),
            ),
            rem_norm,
        ))
    }

    pub fn max_coeff_norm(&self) -> R {
        self.coeffs
            .values()
            .map(|c| c.norm())
            .fold(R::zero(), R::max)
    }
}

/// Symmetric Laurent polynomial stored in the basis `{1, z^k + z^-k}`.
///
/// Index `k` holds the coefficient of `z^k + z^{-k}` for `k >= 1` and of `1`
/// for `k = 0`. A degree-`n` element is a degree-`n` polynomial in
/// `x = z + 1/z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymLaurentPoly<R: Real> {
    coeffs: Vec<Complex<R>>,
}

impl<R: Real> SymLaurentPoly<R> {
    pub fn one_poly() -> Self {
        Self { coeffs: vec![one()] }
    }

    pub fn from_sym_coeffs(coeffs: Vec<Complex<R>>) -> Self {
        let mut out = Self { coeffs };
        out.trim();
        out
    }

    /// Interpret a plain Laurent polynomial as symmetric; errors when the
    /// symmetry defect exceeds `tol` relative to the largest coefficient.
    pub fn from_laurent(p: &LaurentPoly<R>, tol: R) -> Result<Self> {
        let scale = p.max_coeff_norm() + r::<R>(1e-30);
        let hi = p.max_exp().unwrap_or(0);
        let lo = p.min_exp().unwrap_or(0);
        let deg = hi.max(-lo).max(0);
        let mut coeffs = vec![zero(); (deg + 1) as usize];
        for k in 0..=deg {
            let up = p.coeff(k);
            let dn = p.coeff(-k);
            if (up - dn).norm() > tol * scale {
                return Err(Error::InvalidInput(format!(
                    "polynomial is not symmetric at exponent {k}: relative defect {:e}",
                    ((up - dn).norm() / scale).to_f64().unwrap_or(f64::NAN)
                )));
            }
            coeffs[k as usize] = if k == 0 { up } else { (up + dn) / c2() };
        }
        Ok(Self::from_sym_coeffs(coeffs))
    }

    pub fn to_laurent(&self) -> LaurentPoly<R> {
        let mut terms = Vec::new();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if k == 0 {
                terms.push((0i64, c));
            } else {
                terms.push((k as i64, c));
                terms.push((-(k as i64), c));
            }
        }
        LaurentPoly::from_terms(terms)
    }

    /// Degree as a polynomial in `x = z + 1/z`.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn sym_coeffs(&self) -> &[Complex<R>] {
        &self.coeffs
    }

    pub fn eval(&self, z: Complex<R>) -> Complex<R> {
        let mut acc = self.coeffs[0];
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            acc += c * (z.powi(k as i32) + z.powi(-(k as i32)));
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![zero(); n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let a = self.coeffs.get(k).copied().unwrap_or_else(zero);
            let b = other.coeffs.get(k).copied().unwrap_or_else(zero);
            *c = a + b;
        }
        Self::from_sym_coeffs(coeffs)
    }

    pub fn scale(&self, s: Complex<R>) -> Self {
        Self::from_sym_coeffs(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Multiplication by `x = z + 1/z` in the symmetric basis:
    /// `x (z^k + z^-k) = (z^{k+1} + z^-(k+1)) + (z^{k-1} + z^-(k-1))`.
    pub fn mul_x(&self) -> Self {
        let n = self.coeffs.len();
        let mut coeffs = vec![zero(); n + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            if k == 0 {
                coeffs[1] += c;
            } else {
                coeffs[k + 1] += c;
                if k == 1 {
                    coeffs[0] += c * c2();
                } else {
                    coeffs[k - 1] += c;
                }
            }
        }
        Self::from_sym_coeffs(coeffs)
    }

    /// Coefficients in powers of `x = z + 1/z` (ascending), using
    /// `p_{k+1} = x p_k - p_{k-1}` with `p_0 = 2`, `p_1 = x` for
    /// `p_k = z^k + z^{-k}`.
    pub fn x_power_coeffs(&self) -> Vec<Complex<R>> {
        let n = self.coeffs.len();
        let mut rows: Vec<Vec<Complex<R>>> = Vec::with_capacity(n.max(2));
        rows.push(vec![c2()]);
        if n > 1 {
            rows.push(vec![zero(), one()]);
        }
        for k in 2..n {
            let mut next = vec![zero(); k + 1];
            for (j, &v) in rows[k - 1].iter().enumerate() {
                next[j + 1] += v;
            }
            for (j, &v) in rows[k - 2].iter().enumerate() {
                next[j] -= v;
            }
            rows.push(next);
        }
        let mut out = vec![zero(); n];
        out[0] = self.coeffs[0];
        for k in 1..n {
            for (j, &v) in rows[k].iter().enumerate() {
                out[j] += self.coeffs[k] * v;
            }
        }
        out
    }

    /// Inverse of [`Self::x_power_coeffs`].
    pub fn from_x_power_coeffs(xc: &[Complex<R>]) -> Self {
        if xc.is_empty() {
            return Self {
                coeffs: vec![zero()],
            };
        }
        let mut acc = Self {
            coeffs: vec![zero(); xc.len()],
        };
        let mut xj = Self::one_poly();
        for (j, &c) in xc.iter().enumerate() {
            for (k, &v) in xj.coeffs.iter().enumerate() {
                if k < acc.coeffs.len() {
                    acc.coeffs[k] += c * v;
                } else {
                    acc.coeffs.push(c * v);
                }
            }
            if j + 1 < xc.len() {
                xj = xj.mul_x();
            }
        }
        acc.trim();
        acc
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 {
            if self.coeffs.last().unwrap().norm() <= r::<R>(COEFF_CUTOFF) {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(zero());
        }
    }
}

fn c2<R: Real>() -> Complex<R> {
    Complex::new(r(2.0), R::zero())
}

/// Ratio of two Laurent polynomials.
#[derive(Debug, Clone)]
pub struct RationalFunc<R: Real> {
    pub numerator: LaurentPoly<R>,
    pub denominator: LaurentPoly<R>,
}

impl<R: Real> RationalFunc<R> {
    pub fn new(numerator: LaurentPoly<R>, denominator: LaurentPoly<R>) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::InvalidInput(
                "rational function with zero denominator".into(),
            ));
        }
        Ok(Self {
            numerator,
            denominator,
        })
    }

    /// Evaluate with a pole guard on the denominator magnitude.
    pub fn eval(&self, z: Complex<R>) -> Result<Complex<R>> {
        let den = self.denominator.eval(z);
        if den.norm() < r::<R>(1e-12) {
            return Err(Error::PoleProximity {
                magnitude: den.norm().to_f64().unwrap_or(0.0),
            });
        }
        Ok(self.numerator.eval(z) / den)
    }

    /// `f(z) -> f(1/z)`.
    pub fn invert_arg(&self) -> Self {
        Self {
            numerator: self.numerator.invert_arg(),
            denominator: self.denominator.invert_arg(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    type L = LaurentPoly<f64>;
    type S = SymLaurentPoly<f64>;

    #[test]
    fn canonical_form_drops_zeros() {
        let p = L::from_terms([(2, c(1.0, 0.0)), (0, c(0.0, 0.0)), (-1, c(2.0, 0.0))]);
        assert_eq!(p.terms().count(), 2);
        let q = p.sub(&p);
        assert!(q.is_zero());
    }

    #[test]
    fn mul_and_eval_agree() {
        let p = L::from_terms([(1, c(1.0, 0.0)), (-1, c(-0.5, 0.2))]);
        let q = L::from_terms([(0, c(2.0, 0.0)), (2, c(0.3, -0.1))]);
        let pq = p.mul(&q);
        let z = c(0.7, 0.4);
        assert!((pq.eval(z) - p.eval(z) * q.eval(z)).norm() < 1e-14);
    }

    #[test]
    fn exact_division_roundtrip() {
        let p = L::from_terms([(0, c(1.0, 0.0)), (1, c(-0.3, 0.8)), (-2, c(0.4, 0.0))]);
        let d = L::from_terms([(-1, c(0.5, -0.2)), (2, c(1.0, 1.0))]);
        let prod = p.mul(&d);
        let (q, rem) = prod.div_exact(&d).unwrap();
        assert!(rem < 1e-13);
        assert!(q.sub(&p).max_coeff_norm() < 1e-13);
    }

    #[test]
    fn scale_arg_is_substitution() {
        let p = L::from_terms([(3, c(1.0, -1.0)), (-2, c(0.4, 0.1))]);
        let s = c(1.3, 0.2);
        let z = c(0.6, -0.8);
        assert!((p.scale_arg(s).eval(z) - p.eval(s * z)).norm() < 1e-13);
    }

    #[test]
    fn symmetric_eval_invariance() {
        let s = S::from_sym_coeffs(vec![c(1.0, 0.0), c(0.4, -0.3), c(0.0, 0.7)]);
        for z in [c(0.8, 0.4), c(1.3, -0.9), c(-0.5, 1.2)] {
            let a = s.eval(z);
            let b = s.eval(z.finv());
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn x_power_roundtrip_and_eval() {
        let s = S::from_sym_coeffs(vec![c(0.3, 0.1), c(-1.2, 0.0), c(0.5, 0.5), c(2.0, -1.0)]);
        let xc = s.x_power_coeffs();
        let back = S::from_x_power_coeffs(&xc);
        for (a, b) in s.sym_coeffs().iter().zip(back.sym_coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
        let z: num_complex::Complex<f64> = c(0.9, 0.35);
        let x = z + z.finv();
        let direct = xc
            .iter()
            .enumerate()
            .fold(c::<f64>(0.0, 0.0), |acc, (j, &cc)| acc + cc * x.powi(j as i32));
        assert!((direct - s.eval(z)).norm() < 1e-12);
    }

    #[test]
    fn mul_x_matches_eval() {
        let s = S::from_sym_coeffs(vec![c(1.0, -0.2), c(0.0, 1.0), c(0.7, 0.0)]);
        let xs = s.mul_x();
        let z = c(1.1, -0.6);
        let x = z + z.finv();
        assert!((xs.eval(z) - x * s.eval(z)).norm() < 1e-12);
        assert_eq!(xs.degree(), s.degree() + 1);
    }

    #[test]
    fn from_laurent_rejects_asymmetric() {
        let p = L::from_terms([(1, c(1.0, 0.0)), (-1, c(0.5, 0.0))]);
        assert!(SymLaurentPoly::from_laurent(&p, 1e-10).is_err());
        let sym = L::from_terms([(1, c(1.0, 0.0)), (-1, c(1.0, 0.0)), (0, c(0.3, 0.0))]);
        let s = SymLaurentPoly::from_laurent(&sym, 1e-10).unwrap();
        assert_eq!(s.degree(), 1);
    }

    #[test]
    fn rational_pole_guard() {
        let f = RationalFunc::new(
            L::constant(c(1.0, 0.0)),
            L::from_terms([(0, c(1.0, 0.0)), (1, c(-1.0, 0.0))]),
        )
        .unwrap();
        assert!(matches!(
            f.eval(c(1.0, 0.0)),
            Err(Error::PoleProximity { .. })
        ));
        assert!(f.eval(c(0.5, 0.0)).is_ok());
    }
}
