//! Exact small-horizon tails of the size-1 immigration process and the
//! burn-in sampler for its stationary law.
//!
//! With geometric offspring the generating functions are linear
//! fractional, and so is their composition: given the environment, `Z_n` is
//! geometric on `{0, 1, ...}` with mean `P_n = Σ_{k<n} e^{S_{k,n-1}}`. Hence
//! `P(Z_n > m | env) = (P_n/(1 + P_n))^{m+1}`.

use std::cell::RefCell;

use rand::Rng;

use crate::branching::process::{simulate, Mode, Population};
use crate::branching::tails::negbinom_tail;
use crate::error::{Error, Result};
use crate::heavytail::TailLaw;
use crate::numeric::Quadrature;
use crate::scalar::{softplus, success_prob, Real};

/// A value with a rigorous absolute bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounded<T> {
    pub value: T,
    pub bound: T,
}

/// `P(Z_1 > m) = E[(1 - A_0)^{m+1}]`.
pub fn exact_tail_z1<T: Real>(law: &TailLaw<T>, m: u64) -> Result<T> {
    law.expected_one_minus_a_pow(m + 1)
}

/// `ln P(Z > m | env)` for a conditional geometric law with log-mean `ln_mean`.
pub fn conditional_log_tail<T: Real>(ln_mean: T, m: T) -> T {
    -(m + T::one()) * softplus(-ln_mean)
}

/// `P(Z_2 > m)` by nested quadrature of the conditional geometric tail with
/// `P_2 = e^{xi_1}(1 + e^{xi_0})`.
pub fn exact_tail_z2<T: Real>(law: &TailLaw<T>, m: u64) -> Result<T> {
    let mt = T::from_u64(m).expect("m representable");
    let center = mt.max(T::one()).ln();
    let inner_quad = Quadrature::default().with_rel_tol(T::lit(1e-10));
    let failure = RefCell::new(None);
    let outer = |xi0: T| {
        let shift = softplus(xi0);
        let inner = |xi1: T| conditional_log_tail(xi1 + shift, mt).exp();
        match law.expect(inner, center - shift, inner_quad) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                T::zero()
            }
        }
    };
    let value = law.expect(outer, center, Quadrature::default())?;
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

fn negbinom_tail_at<T: Real>(k: u64, m: u64, xi: T) -> T {
    let a = success_prob(xi);
    if a <= T::zero() {
        T::one()
    } else if a >= T::one() {
        T::zero()
    } else {
        negbinom_tail(k, m, a).expect("valid arguments")
    }
}

/// `P(Z_2 > m) = Σ_k P(Z_1 = k) E[P(B_1 + ... + B_{k+1} > m | A_1)]`, the
/// `k`-sum truncated once `P(Z_1 >= K) <= trunc_eps`.
///
/// The omitted terms lie in `[0, P(Z_1 >= K)]`; the midpoint is returned
/// with half that width as bound. Heavy-tailed laws need astronomically many
/// terms and fail with [`Error::Truncation`]; the closed form in
/// [`exact_tail_z2`] has no such limit.
pub fn exact_tail_z2_series<T: Real>(law: &TailLaw<T>, m: u64, trunc_eps: T, max_terms: usize) -> Result<Bounded<T>> {
    let mut partial = T::zero();
    for k in 0..max_terms as u64 {
        let remainder = law.expected_one_minus_a_pow(k)?;
        if remainder <= trunc_eps {
            let half = remainder / T::lit(2.0);
            return Ok(Bounded { value: partial + half, bound: half });
        }
        let p_k = law.expected_aj_one_minus_a_pow(1, k)?;
        let center = T::from_u64(m + 1).expect("m").ln() - T::from_u64(k + 1).expect("k").ln();
        let q_k = law.expect(|xi| negbinom_tail_at(k + 1, m, xi), center, Quadrature::default())?;
        partial = partial + p_k * q_k;
    }
    let remainder = law.expected_one_minus_a_pow(max_terms as u64)?;
    Err(Error::Truncation { bound: remainder.to_f64_lossy(), iterations: max_terms })
}

/// Burn-in horizon `ceil(4 (ln m_max + 20)/a)` for sampling the stationary law.
pub fn burn_in<T: Real>(law: &TailLaw<T>, m_max: f64) -> Result<usize> {
    let a = law.drift()?.to_f64_lossy();
    Ok((4.0 * (m_max.max(1.0).ln() + 20.0) / a).ceil() as usize)
}

/// One approximate draw from the stationary law of the size-1 process,
/// by running it from `Z_0 = 0` for [`burn_in`] generations.
pub fn stationary_sample<R: Rng + ?Sized>(law: &TailLaw<f64>, m_max: f64, rng: &mut R) -> Result<Population> {
    let n = burn_in(law, m_max)?;
    Ok(simulate(law, n, Mode::Size1, rng).last())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p213() -> TailLaw<f64> {
        TailLaw::pareto(2.0, 1.0, 3.0).unwrap()
    }

    #[test]
    fn z1_reduces_to_moment() {
        let law = p213();
        let direct = law.expected_one_minus_a_pow(1).unwrap();
        assert_eq!(exact_tail_z1(&law, 0).unwrap(), direct);
    }

    #[test]
    fn z1_scale_at_large_m() {
        let law = p213();
        let v = exact_tail_z1(&law, 1_000_000).unwrap();
        let f = law.tail(1e6f64.ln());
        assert!((v / f - 1.0).abs() < 0.25);
    }

    #[test]
    fn z2_extinction_matches_generating_function() {
        // P(Z_2 = 0 | env) = A_0 A_1/(1 - (1 - A_0) A_1), integrated on an
        // independent (xi_0, xi_1) product grid in the tail variable
        let law = p213();
        let q = Quadrature::<f64>::default().with_rel_tol(1e-11);
        let inner = |xi0: f64| {
            let a0 = success_prob(xi0);
            q.integrate(
                |s: f64| {
                    let a1 = success_prob(law.inverse_tail(s.max(1e-300)));
                    a0 * a1 / (1.0 - (1.0 - a0) * a1)
                },
                0.0,
                1.0,
            )
            .unwrap()
            .value
        };
        let p0 = q.integrate(|s: f64| inner(law.inverse_tail(s.max(1e-300))), 0.0, 1.0).unwrap().value;
        let ours = exact_tail_z2(&law, 0).unwrap();
        assert!((ours - (1.0 - p0)).abs() < 1e-6, "{ours} vs {}", 1.0 - p0);
    }

    #[test]
    fn z2_series_agrees_with_closed_form() {
        let tp = TailLaw::two_point(2f64.ln(), 2f64.ln(), 0.25).unwrap();
        for m in [0u64, 3, 10] {
            let s = exact_tail_z2_series(&tp, m, 1e-13, 10_000).unwrap();
            let c = exact_tail_z2(&tp, m).unwrap();
            assert!((s.value - c).abs() <= s.bound + 1e-12, "m={m}: {} vs {c}", s.value);
        }
        let wide: TailLaw = TailLaw::two_point(3.0, 1.0, 0.3).unwrap();
        let s = exact_tail_z2_series(&wide, 20, 1e-12, 10_000).unwrap();
        let c = exact_tail_z2(&wide, 20).unwrap();
        assert!((s.value - c).abs() <= s.bound + 1e-12, "{} vs {c}", s.value);
    }

    #[test]
    fn z2_series_reports_truncation_failure() {
        let err = exact_tail_z2_series(&p213(), 10, 1e-6, 50).unwrap_err();
        assert!(matches!(err, Error::Truncation { iterations: 50, .. }));
    }

    #[test]
    fn z2_over_z1_grows() {
        let law = p213();
        let ratios: Vec<f64> = [1_000u64, 100_000, 10_000_000]
            .iter()
            .map(|&m| exact_tail_z2(&law, m).unwrap() / exact_tail_z1(&law, m).unwrap())
            .collect();
        assert!(ratios[0] < ratios[1] && ratios[1] < ratios[2] && ratios[2] < 2.0, "{ratios:?}");
    }

    #[test]
    fn burn_in_horizon() {
        assert_eq!(burn_in(&p213(), 1.0).unwrap(), 80);
        let heavy = TailLaw::pareto(1.0, 1.0, 3.0).unwrap();
        assert!(burn_in(&heavy, 10.0).is_err());
    }
}
