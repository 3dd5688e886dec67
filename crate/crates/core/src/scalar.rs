//! Scalar abstraction for the analytic layer.
//!
//! Laws, quadrature, environment paths and the closed-form predictions are
//! written against [`Real`] so they can be instantiated at `f32` or `f64`.
//! The Monte Carlo layer is concrete `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// floating point scalar: f32 or f64
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Relative tolerance the quadrature can be asked for at this precision.
    #[inline]
    fn quad_floor() -> Self {
        Self::epsilon() * Self::lit(100.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus<T: Real>(x: T) -> T {
    if x > T::lit(30.0) {
        x + (-x).exp()
    } else if x < T::lit(-30.0) {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(e^a + e^b)`.
#[inline]
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Success probability `A = 1/(1 + e^xi)`.
#[inline]
pub fn success_prob<T: Real>(xi: T) -> T {
    if xi >= T::zero() {
        let e = (-xi).exp();
        e / (T::one() + e)
    } else {
        T::one() / (T::one() + xi.exp())
    }
}

/// `ln A` and `ln(1 - A)` for `A = 1/(1 + e^xi)`.
#[inline]
pub fn log_success_failure<T: Real>(xi: T) -> (T, T) {
    (-softplus(xi), -softplus(-xi))
}

pub(crate) mod special {
    //! f64-backed special functions, re-exposed at any [`Real`] precision.

    use super::Real;

    pub fn gamma<T: Real>(x: T) -> T {
        T::lit(statrs::function::gamma::gamma(x.to_f64_lossy()))
    }

    /// `ln(erfc(t))`, switching to the asymptotic series once `erfc` underflows.
    pub fn ln_erfc<T: Real>(t: T) -> T {
        let tf = t.to_f64_lossy();
        if tf < 26.0 {
            return T::lit(statrs::function::erf::erfc(tf).ln());
        }
        T::lit(ln_erfc_asymptotic(tf))
    }

    pub(super) fn ln_erfc_asymptotic(t: f64) -> f64 {
        let t2 = t * t;
        let series = 1.0 - 1.0 / (2.0 * t2) + 3.0 / (4.0 * t2 * t2) - 15.0 / (8.0 * t2 * t2 * t2);
        -t2 - (t * std::f64::consts::PI.sqrt()).ln() + series.ln()
    }

    /// Standard normal upper quantile: `z` with `P(N > z) = s`.
    pub fn normal_upper_quantile<T: Real>(s: T) -> T {
        let sf = s.to_f64_lossy();
        let mut z = std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * sf);
        // Newton polish on P(N > z) = s; erfc is more accurate than its inverse
        for _ in 0..2 {
            let tail = 0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2);
            let density = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
            if density <= 0.0 || !z.is_finite() {
                break;
            }
            z += (tail - sf) / density;
        }
        T::lit(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_matches_naive_in_safe_range() {
        for &x in &[-20.0_f64, -1.0, 0.0, 0.5, 3.0, 20.0] {
            let naive = x.exp().ln_1p();
            assert!((softplus(x) - naive).abs() <= 1e-14 * naive);
        }
        assert_eq!(softplus(1000.0_f64), 1000.0);
    }

    #[test]
    fn success_prob_is_complementary() {
        for &x in &[-40.0_f64, -2.0, 0.0, 2.0, 40.0] {
            let a = success_prob(x);
            let (la, l1a) = log_success_failure(x);
            assert!((la.exp() - a).abs() < 1e-15);
            assert!((l1a.exp() - (1.0 - a)).abs() < 1e-15);
        }
        assert_eq!(success_prob(0.0_f32), 0.5);
    }

    #[test]
    fn ln_erfc_is_continuous_at_switch() {
        let exact = statrs::function::erf::erfc(26.0).ln();
        assert!((special::ln_erfc_asymptotic(26.0) - exact).abs() < 1e-9);
        assert!((special::ln_erfc(26.0_f64) - exact).abs() < 1e-9);
    }

    #[test]
    fn log_add_exp_handles_infinities() {
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 2.0), 2.0);
        assert!((log_add_exp(0.0_f64, 0.0) - 2f64.ln()).abs() < 1e-15);
    }
}
