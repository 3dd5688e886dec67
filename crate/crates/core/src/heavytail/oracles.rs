//! Quadrature oracles for moments of the success probability, and the
//! Kesten root for light-tailed diagnostic laws.

use crate::error::{Error, Result};
use crate::heavytail::TailLaw;
use crate::numeric::Quadrature;
use crate::scalar::{log_success_failure, Real};

impl<T: Real> TailLaw<T> {
    /// `E[(1 - A)^m]` with `A = 1/(1 + e^xi)`.
    pub fn expected_one_minus_a_pow(&self, m: u64) -> Result<T> {
        self.expected_aj_one_minus_a_pow(0, m)
    }

    /// `E[A^j (1 - A)^m]`.
    ///
    /// The integrand is evaluated in log space and peaks near
    /// `xi ≈ ln(m/j)`, so `m` may be astronomically large.
    pub fn expected_aj_one_minus_a_pow(&self, j: u64, m: u64) -> Result<T> {
        let jt = T::from_u64(j).expect("j representable");
        let mt = T::from_u64(m).expect("m representable");
        let g = |xi: T| {
            let (la, l1a) = log_success_failure(xi);
            let mut log = T::zero();
            if j > 0 {
                log = log + jt * la;
            }
            if m > 0 {
                log = log + mt * l1a;
            }
            log.exp()
        };
        let center = (mt.max(T::one()) / jt.max(T::one())).ln();
        self.expect(g, center, Quadrature::default())
    }

    /// `E g(xi)` for a bounded `g` whose variation is concentrated near
    /// `xi ≈ center`.
    ///
    /// Continuous laws are integrated in the tail variable,
    /// `E g(xi) = ∫_0^1 g(inverse_tail(s)) ds`, with breakpoints at the tail
    /// values of `center ± k`, `k ≤ 10`.
    pub fn expect<G: Fn(T) -> T>(&self, g: G, center: T, quad: Quadrature<T>) -> Result<T> {
        if let TailLaw::TwoPoint { up, down, p } = *self {
            return Ok(p * g(up) + (T::one() - p) * g(-down));
        }
        let mut points = vec![T::zero(), T::one()];
        for k in -10..=10 {
            let s = self.tail(center + T::lit(k as f64));
            if s > T::zero() && s < T::one() {
                points.push(s);
            }
        }
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        points.dedup();
        let r = quad.integrate_pieces(
            |s| if s <= T::zero() { T::zero() } else { g(self.inverse_tail(s)) },
            &points,
        )?;
        Ok(r.value)
    }

    /// `φ(s) = E e^{s xi}` for laws where it is finite.
    pub fn exponential_moment(&self, s: T) -> Result<T> {
        match *self {
            TailLaw::TwoPoint { up, down, p } => Ok(p * (s * up).exp() + (T::one() - p) * (-s * down).exp()),
            _ if s > T::zero() => Ok(T::infinity()),
            _ => Err(Error::NotApplicable("exponential moment at s <= 0 only tabulated for two-point laws")),
        }
    }

    /// Positive root of `E e^{κ xi} = 1`.
    ///
    /// `Ok(None)` when no positive root exists (`E xi >= 0`, or the moment
    /// never climbs back above one within the probed range). Heavy-tailed
    /// families have `E e^{s xi} = ∞` for every `s > 0` and return
    /// [`Error::HeavyTailed`].
    pub fn kesten_kappa(&self) -> Result<Option<T>> {
        if self.is_heavy_tailed() {
            return Err(Error::HeavyTailed);
        }
        let one = T::one();
        let phi = |s: T| self.exponential_moment(s).expect("two-point moment");
        match self.mean_xi().finite() {
            Some(m) if m < T::zero() => {}
            _ => return Ok(None),
        }
        let mut hi = one;
        let mut tries = 0;
        while phi(hi) <= one {
            hi = hi * T::lit(2.0);
            tries += 1;
            if tries > 60 || !phi(hi).is_finite() {
                return Ok(None);
            }
        }
        let mut lo = hi;
        tries = 0;
        while phi(lo) >= one {
            lo = lo / T::lit(2.0);
            tries += 1;
            if tries > 200 {
                return Ok(None);
            }
        }
        // phi is convex with phi(0) = 1 and phi'(0) < 0: a single crossing on [lo, hi]
        let tol = T::lit(1e-13).max(T::epsilon() * T::lit(16.0));
        while hi - lo > tol * hi.max(one) {
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(mid) < one {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Some((lo + hi) / T::lit(2.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p213() -> TailLaw {
        TailLaw::pareto(2.0, 1.0, 3.0).unwrap()
    }

    /// Independent route: integrate against the Pareto density in xi.
    fn density_oracle(j: u64, m: u64) -> f64 {
        let q = Quadrature::<f64>::default().with_rel_tol(1e-11);
        let g = |xi: f64| {
            let a = 1.0 / (1.0 + xi.exp());
            a.powi(j as i32) * (1.0 - a).powf(m as f64)
        };
        q.integrate_pieces(|xi| g(xi) * 2.0 * (xi + 3.0).powi(-3), &[-2.0, 0.0, 5.0, 10.0, 20.0, f64::INFINITY])
            .unwrap()
            .value
    }

    #[test]
    fn zero_power_is_one() {
        assert!((p213().expected_one_minus_a_pow(0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_density_route() {
        let law = p213();
        for &(j, m) in &[(0u64, 1u64), (0, 10), (0, 1000), (1, 0), (1, 5), (2, 0), (3, 40)] {
            let ours = law.expected_aj_one_minus_a_pow(j, m).unwrap();
            let oracle = density_oracle(j, m);
            assert!(((ours - oracle) / oracle).abs() < 1e-8, "j={j} m={m}: {ours} vs {oracle}");
        }
    }

    #[test]
    fn m_equals_one_is_mean_of_one_minus_a() {
        let law = p213();
        let direct = law.expected_one_minus_a_pow(1).unwrap();
        let oracle = density_oracle(0, 1);
        assert!((direct - oracle).abs() < 1e-10);
    }

    #[test]
    fn moment_matches_tail_scale() {
        let law = p213();
        let m = 1_000_000u64;
        let v = law.expected_one_minus_a_pow(m).unwrap();
        let predicted = law.tail((m as f64).ln());
        assert!((v / predicted - 1.0).abs() < 0.25, "{v} vs {predicted}");
    }

    #[test]
    fn mixed_moment_ratio_vanishes() {
        let law = p213();
        let ratios: Vec<f64> = [1_000u64, 100_000, 10_000_000]
            .iter()
            .map(|&m| law.expected_aj_one_minus_a_pow(1, m).unwrap() / law.tail((m as f64).ln()))
            .collect();
        assert!(ratios[0] > ratios[1] && ratios[1] > ratios[2], "{ratios:?}");
    }

    #[test]
    fn two_point_direct() {
        let law = TailLaw::two_point(2f64.ln(), 2f64.ln(), 0.25).unwrap();
        // A = 1/3 at xi = ln 2 and A = 2/3 at xi = -ln 2
        let v = law.expected_aj_one_minus_a_pow(2, 0).unwrap();
        let expect = 0.25 / 9.0 + 0.75 * 4.0 / 9.0;
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn kappa_two_point_closed_form() {
        let law = TailLaw::two_point(2f64.ln(), 2f64.ln(), 0.25).unwrap();
        let kappa = law.kesten_kappa().unwrap().unwrap();
        assert!((kappa - 3f64.log2()).abs() < 1e-10);
        assert!((law.exponential_moment(kappa).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn kappa_symmetric_not_found() {
        let law = TailLaw::two_point(1.0, 1.0, 0.5).unwrap();
        assert_eq!(law.kesten_kappa().unwrap(), None);
    }

    #[test]
    fn kappa_heavy_tailed_undefined() {
        assert!(matches!(p213().kesten_kappa(), Err(Error::HeavyTailed)));
        let w = TailLaw::weibull(0.5, 1.0, 3.0).unwrap();
        assert!(matches!(w.kesten_kappa(), Err(Error::HeavyTailed)));
    }
}
