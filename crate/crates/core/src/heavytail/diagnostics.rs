//! Finite-range evidence for heavy-tail class membership.
//!
//! Each check returns the raw ratio sequence at the probe points. Whether a
//! sequence "tends to" its limit is for the caller to judge.

use crate::error::{Error, Result};
use crate::heavytail::TailLaw;
use crate::numeric::Quadrature;
use crate::scalar::Real;

/// Square-root insensitivity probe at one point `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtProbe<T> {
    /// `tail(m - √m) / tail(m)`
    pub ratio: T,
    /// `ln(tail(m) · e^{√m})`
    pub ln_product: T,
}

impl<T: Real> TailLaw<T> {
    /// `tail(x - y) / tail(x)` for each `x`.
    pub fn check_long_tailed(&self, y: T, xs: &[T]) -> Result<Vec<T>> {
        if y == T::zero() {
            return Err(Error::InvalidArgument("shift y must be nonzero".into()));
        }
        xs.iter()
            .map(|&x| {
                let lt = self.log_tail(x);
                if lt == T::neg_infinity() {
                    return Err(Error::ZeroTail(x.to_f64_lossy()));
                }
                Ok((self.log_tail(x - y) - lt).exp())
            })
            .collect()
    }

    /// `P(xi_1 + xi_2 > x) / tail(x)` for each `x`.
    ///
    /// The convolution tail is split at `x/2`:
    /// `P(xi_1 + xi_2 > x) = tail(x/2)^2 + 2 ∫_{y <= x/2} tail(x - y) dF(y)`,
    /// and the Stieltjes integral is taken in the tail-probability variable
    /// `s = tail(y)`, so no density is needed.
    pub fn check_subexponential(&self, xs: &[T]) -> Result<Vec<T>> {
        if self.is_atomic() {
            return Err(Error::NotApplicable("atomic law has no continuous convolution tail"));
        }
        let quad = Quadrature::<T>::default();
        xs.iter()
            .map(|&x| {
                let denom = self.tail(x);
                if denom == T::zero() {
                    return Err(Error::ZeroTail(x.to_f64_lossy()));
                }
                let half = x / T::lit(2.0);
                let s_half = self.tail(half);
                let mut points = vec![s_half];
                let mut s = s_half * T::lit(10.0);
                while s < T::one() {
                    points.push(s);
                    s = s * T::lit(10.0);
                }
                points.push(T::one());
                let body = quad.integrate_pieces(|s| self.tail(x - self.inverse_tail(s)), &points)?;
                let conv = s_half * s_half + T::lit(2.0) * body.value;
                Ok(conv / denom)
            })
            .collect()
    }

    /// `∫_0^x tail(x-y) tail(y) dy / (2 tail(x) ∫_0^∞ tail)` for each `x`.
    pub fn check_strong_subexponential(&self, xs: &[T]) -> Result<Vec<T>> {
        let total = self.tail_integral(T::zero())?;
        let quad = Quadrature::<T>::default();
        xs.iter()
            .map(|&x| {
                if x <= T::zero() {
                    return Ok(T::zero());
                }
                let denom = T::lit(2.0) * self.tail(x) * total;
                if denom == T::zero() {
                    return Err(Error::ZeroTail(x.to_f64_lossy()));
                }
                let half = x / T::lit(2.0);
                let mut points = vec![T::zero()];
                let mut p = T::one();
                while p < half {
                    points.push(p);
                    p = p * T::lit(4.0);
                }
                points.push(half);
                let r = quad.integrate_pieces(|y| self.tail(x - y) * self.tail(y), &points)?;
                Ok(T::lit(2.0) * r.value / denom)
            })
            .collect()
    }

    pub fn check_sqrt_insensitive(&self, ms: &[T]) -> Result<Vec<SqrtProbe<T>>> {
        ms.iter()
            .map(|&m| {
                if !(m > T::zero()) {
                    return Err(Error::InvalidArgument("probe m must be positive".into()));
                }
                let root = m.sqrt();
                let lt = self.log_tail(m);
                Ok(SqrtProbe { ratio: (self.log_tail(m - root) - lt).exp(), ln_product: lt + root })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p213() -> TailLaw {
        TailLaw::pareto(2.0, 1.0, 3.0).unwrap()
    }

    #[test]
    fn long_tailed_pareto_closed_form() {
        let r = p213().check_long_tailed(1.0, &[97.0]).unwrap();
        assert!((r[0] - (100.0f64 / 99.0).powi(2)).abs() < 1e-13);
        let near = p213().check_long_tailed(1e-9, &[50.0]).unwrap();
        assert!((near[0] - 1.0).abs() < 1e-9);
        assert!(p213().check_long_tailed(0.0, &[1.0]).is_err());
    }

    #[test]
    fn long_tailed_two_point_errors_beyond_support() {
        let law = TailLaw::two_point(2f64.ln(), 2f64.ln(), 0.25).unwrap();
        assert!(matches!(law.check_long_tailed(1.0, &[10.0]), Err(Error::ZeroTail(_))));
    }

    #[test]
    fn subexponential_not_applicable_to_atoms() {
        let law = TailLaw::two_point(1.0, 1.0, 0.3).unwrap();
        assert!(matches!(law.check_subexponential(&[5.0]), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn subexponential_pareto_value() {
        // 30-digit reference from an independent density-based convolution
        let r = p213().check_subexponential(&[200.0]).unwrap();
        assert!((r[0] - 1.981_253_544_641_687).abs() < 1e-7, "{}", r[0]);
    }

    #[test]
    fn subexponential_matches_monte_carlo_scale() {
        // independent check of the convolution tail against a brute-force double sum
        let law = p213();
        let x = 10.0;
        let n = 4000;
        let mut hits = 0.0;
        for i in 0..n {
            let y1 = law.inverse_tail((i as f64 + 0.5) / n as f64);
            for j in 0..n {
                let y2 = law.inverse_tail((j as f64 + 0.5) / n as f64);
                if y1 + y2 > x {
                    hits += 1.0;
                }
            }
        }
        let brute = hits / (n * n) as f64 / law.tail(x);
        let quad = law.check_subexponential(&[x]).unwrap()[0];
        assert!((brute - quad).abs() / quad < 5e-3, "{brute} vs {quad}");
    }

    #[test]
    fn strong_subexponential_pareto() {
        let law = p213();
        assert_eq!(law.check_strong_subexponential(&[0.0]).unwrap()[0], 0.0);
        let r = law.check_strong_subexponential(&[100.0]).unwrap()[0];
        assert!(r > 0.8 && r < 1.2, "{r}");
        let inf = TailLaw::pareto(0.9, 1.0, 3.0).unwrap();
        assert!(matches!(inf.check_strong_subexponential(&[10.0]), Err(Error::InfiniteMean)));
    }

    #[test]
    fn sqrt_insensitive_pareto() {
        let probe = p213().check_sqrt_insensitive(&[10000.0]).unwrap()[0];
        assert!((probe.ratio - (10003.0f64 / 9903.0).powi(2)).abs() < 1e-12);
        assert!((probe.ln_product - (100.0 - 2.0 * 10003f64.ln())).abs() < 1e-10);
    }

    #[test]
    fn sqrt_insensitive_weibull_control() {
        let good = TailLaw::weibull(0.3, 1.0, 2.0).unwrap();
        let bad = TailLaw::weibull(0.7, 1.0, 2.0).unwrap();
        let ms = [1e2, 1e4, 1e6];
        let g = good.check_sqrt_insensitive(&ms).unwrap();
        let b = bad.check_sqrt_insensitive(&ms).unwrap();
        assert!(g.windows(2).all(|w| (w[1].ratio - 1.0) < (w[0].ratio - 1.0)));
        assert!(g[2].ratio < 1.1);
        assert!(b.windows(2).all(|w| w[1].ratio > w[0].ratio));
        assert!(b[2].ratio > 10.0);
    }
}
