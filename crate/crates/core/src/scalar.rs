//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar the library is generic over (`f32`, `f64`, or
/// any wider type providing the same operations).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent finite `f64` values, which no supported scalar does.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("scalar cannot represent f64 literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("scalar cannot represent usize")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + LowerExp
        + FromStr
        + Default
        + Sum
        + Send
        + Sync
        + 'static
{
}

/// `i` as a complex scalar.
#[inline]
pub fn imag_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut t = theta % two_pi;
    if t > T::PI() {
        t = t - two_pi;
    } else if t <= -T::PI() {
        t = t + two_pi;
    }
    t
}

/// Complementary error function, evaluated in `f64`.
pub fn erfc<T: Real>(x: T) -> T {
    T::lit(statrs::function::erf::erfc(x.as_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        for k in -20..20 {
            let t = 0.3 + k as f64 * std::f64::consts::PI;
            let w = wrap_angle(t);
            assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
            let turns = (t - w) / (2.0 * std::f64::consts::PI);
            assert!((turns - turns.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn literals_in_both_precisions() {
        assert_eq!(<f32 as Real>::lit(0.5), 0.5f32);
        assert_eq!(<f64 as Real>::lit(0.25), 0.25);
        assert!((erfc(0.0f64) - 1.0).abs() < 1e-15);
    }
}
