//! Scalar abstraction and the deformation parameter.
//!
//! All numerics run over `Complex<R>` for a real floating type `R`. The
//! deformation parameter is stored through its exponent `phi`, so every
//! fractional power of `q` is derived as `exp(a * phi)` and branch choices
//! stay consistent across modules.

use std::fmt;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

use crate::error::{Error, Result};

/// Real scalar types the toolkit is generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for converting an `f64` literal into `R`.
#[inline]
pub fn r<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 -> scalar conversion")
}

/// Complex number from `f64` parts.
#[inline]
pub fn c<R: Real>(re: f64, im: f64) -> Complex<R> {
    Complex::new(r(re), r(im))
}

/// Complex one.
#[inline]
pub fn one<R: Real>() -> Complex<R> {
    Complex::new(R::one(), R::zero())
}

/// Complex zero.
#[inline]
pub fn zero<R: Real>() -> Complex<R> {
    Complex::new(R::zero(), R::zero())
}

/// Orders checked by the root-of-unity guard.
pub const ROOT_OF_UNITY_BOUND: usize = 64;

/// The deformation parameter `q = exp(phi)` with its principal half power.
///
/// `q_half * q_half == q` holds to machine precision because both come from
/// the same exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParams<R: Real> {
    pub phi: Complex<R>,
    pub q: Complex<R>,
    pub q_half: Complex<R>,
}

impl<R: Real> QParams<R> {
    /// Build from the exponent, rejecting `q` that is a root of unity of
    /// order up to [`ROOT_OF_UNITY_BOUND`].
    pub fn from_phi(phi: Complex<R>) -> Result<Self> {
        let q = phi.exp();
        let q_half = (phi * Complex::new(r::<R>(0.5), R::zero())).exp();
        let guard = r::<R>(1e-8);
        let mut pow = one::<R>();
        for m in 1..=ROOT_OF_UNITY_BOUND {
            pow *= q;
            if (pow - one::<R>()).norm() <= guard {
                return Err(Error::RootOfUnity { order: m });
            }
        }
        Ok(Self { phi, q, q_half })
    }

    /// `q^a` for a real exponent, always through `phi`.
    pub fn q_pow(&self, a: R) -> Complex<R> {
        (self.phi * Complex::new(a, R::zero())).exp()
    }

    /// `q^n` for an integer exponent.
    pub fn q_pow_i(&self, n: i64) -> Complex<R> {
        self.q_pow(R::from_i64(n).expect("i64 -> scalar"))
    }

    /// `q - q^{-1}`.
    pub fn q_minus_qinv(&self) -> Complex<R> {
        self.q - self.q.finv()
    }

    /// `q^{1/2} - q^{-1/2}`.
    pub fn qh_minus_qhinv(&self) -> Complex<R> {
        self.q_half - self.q_half.finv()
    }

    /// `q^{1/2} + q^{-1/2}`.
    pub fn qh_plus_qhinv(&self) -> Complex<R> {
        self.q_half + self.q_half.finv()
    }

    /// Anisotropy `(q^{1/2} + q^{-1/2}) / 2`.
    pub fn anisotropy(&self) -> Complex<R> {
        self.qh_plus_qhinv() * Complex::new(r::<R>(0.5), R::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn q_is_exp_phi() {
        let qp = QParams::from_phi(C::new(0.21, 0.34)).unwrap();
        assert!((qp.q - C::new(0.21, 0.34).exp()).norm() < 1e-15);
        assert!((qp.q_half * qp.q_half - qp.q).norm() < 1e-15);
    }

    #[test]
    fn rejects_root_of_unity() {
        // q = i is a 4th root of unity
        let phi = C::new(0.0, std::f64::consts::FRAC_PI_2);
        match QParams::from_phi(phi) {
            Err(Error::RootOfUnity { order }) => assert_eq!(order, 4),
            other => panic!("expected root-of-unity rejection, got {other:?}"),
        }
    }

    #[test]
    fn fractional_powers_compose() {
        let qp = QParams::from_phi(C::new(0.17, 0.31)).unwrap();
        let a = qp.q_pow(0.5) * qp.q_pow(0.5);
        assert!((a - qp.q).norm() < 1e-15);
        assert!((qp.q_pow_i(3) - qp.q * qp.q * qp.q).norm() < 1e-13);
    }
}
