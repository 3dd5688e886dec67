//! Closed-form right-hand sides of the tail asymptotics, capped at one.

use crate::error::Result;
use crate::heavytail::TailLaw;
use crate::scalar::Real;

/// `n F̄(ln m)`.
pub fn thm1_prediction<T: Real>(law: &TailLaw<T>, n: u64, m: T) -> T {
    let nt = T::from_u64(n).expect("n representable");
    (nt * law.tail(m.ln())).min(T::one())
}

/// `a^{-1} F_I(ln m, ln m + n a]`.
pub fn finite_horizon_prediction<T: Real>(law: &TailLaw<T>, n: u64, m: T) -> Result<T> {
    let a = law.drift()?;
    let x = m.ln();
    let nt = T::from_u64(n).expect("n representable");
    Ok((law.integrated_tail_interval(x, x + nt * a)? / a).min(T::one()))
}

/// `a^{-1} F̄_I(ln m)`.
pub fn stationary_prediction<T: Real>(law: &TailLaw<T>, m: T) -> Result<T> {
    let a = law.drift()?;
    Ok((law.integrated_tail(m.ln())? / a).min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p213() -> TailLaw {
        TailLaw::pareto(2.0, 1.0, 3.0).unwrap()
    }

    #[test]
    fn pareto_values() {
        let m = 7f64.exp();
        assert!((thm1_prediction(&p213(), 3, m) - 0.03).abs() < 1e-12);
        assert!((finite_horizon_prediction(&p213(), 10, m).unwrap() - 0.05).abs() < 1e-12);
        assert!((stationary_prediction(&p213(), m).unwrap() - 0.1).abs() < 1e-12);
        assert!(thm1_prediction(&p213(), 3, 1e300) < 1e-5);
    }

    #[test]
    fn long_horizon_reaches_stationary() {
        let m = 1e10;
        let f = finite_horizon_prediction(&p213(), 10_000, m).unwrap();
        let s = stationary_prediction(&p213(), m).unwrap();
        // the gap is F̄_I(ln m + 10^4) = 1/(ln m + 10^4 + 3), i.e. 2.6e-3 relative
        assert!((f - s).abs() / s < 3e-3);
        let far = finite_horizon_prediction(&p213(), 100_000_000, m).unwrap();
        assert!((far - s).abs() / s < 1e-6);
    }

    #[test]
    fn one_step_prediction_tracks_exact_tail() {
        let law = p213();
        let ratio = |m: f64| finite_horizon_prediction(&law, 1, m).unwrap() / thm1_prediction(&law, 1, m);
        let (r1, r2, r3) = (ratio(1e3), ratio(1e8), ratio(1e30));
        assert!(r1 < r2 && r2 < r3 && r3 < 1.0 && r3 > 0.97);
    }

    #[test]
    fn non_subcritical_is_rejected() {
        let law = TailLaw::pareto(2.0, 1.0, 1.0).unwrap();
        assert!(finite_horizon_prediction(&law, 3, 10.0).is_err());
        assert!(stationary_prediction(&law, 10.0).is_err());
    }

    #[test]
    fn capped_at_one() {
        assert_eq!(thm1_prediction(&p213(), 50, 1.5), 1.0);
        // a = 0.05 puts a^{-1} F̄_I far above one at small m
        let slow = TailLaw::pareto(2.0, 1.0, 2.05).unwrap();
        assert_eq!(stationary_prediction(&slow, 1.5).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn monotone(m in 2.0f64..1e12, k in 1.01f64..100.0, n in 1u64..200) {
            let law = p213();
            prop_assert!(thm1_prediction(&law, n, m * k) <= thm1_prediction(&law, n, m));
            let f = finite_horizon_prediction(&law, n, m).unwrap();
            prop_assert!(finite_horizon_prediction(&law, n, m * k).unwrap() <= f + 1e-15);
            prop_assert!(finite_horizon_prediction(&law, n + 1, m).unwrap() >= f - 1e-15);
            prop_assert!(stationary_prediction(&law, m).unwrap() >= f - 1e-15);
        }
    }
}
