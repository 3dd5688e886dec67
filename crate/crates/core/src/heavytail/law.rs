use crate::error::{Error, Result};
use crate::numeric::Quadrature;
use crate::scalar::{special, Real};

/// Law of the environment variable `xi = ln((1 - A)/A)`.
///
/// The `*Shift` families are `xi = W - mu` with `W >= 0` heavy-tailed, so
/// `xi >= -mu` and `A <= 1/(1 + e^{-mu}) < 1` almost surely. `TwoPoint`
/// puts mass `p` on `up` and `1 - p` on `-down`; it is light-tailed and only
/// exists to give the Kesten root a closed-form target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailLaw<T = f64> {
    ParetoShift { alpha: T, x0: T, mu: T },
    WeibullShift { beta: T, scale: T, mu: T },
    LogNormalShift { mu_l: T, sigma_l: T, mu: T },
    TwoPoint { up: T, down: T, p: T },
}

/// `E xi`, or a marker for laws without a first moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanXi<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> MeanXi<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            MeanXi::Finite(m) => Some(m),
            MeanXi::Infinite => None,
        }
    }

    /// `a = -E xi` when the law is subcritical.
    pub fn drift(self) -> Option<T> {
        self.finite().filter(|m| *m < T::zero()).map(|m| -m)
    }
}

fn check(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidLaw(what.to_string()))
    }
}

impl<T: Real> TailLaw<T> {
    pub fn pareto(alpha: T, x0: T, mu: T) -> Result<Self> {
        check(alpha > T::zero() && alpha.is_finite(), "pareto alpha must be positive")?;
        check(x0 > T::zero() && x0.is_finite(), "pareto x0 must be positive")?;
        check(mu.is_finite(), "shift mu must be finite")?;
        Ok(TailLaw::ParetoShift { alpha, x0, mu })
    }

    pub fn weibull(beta: T, scale: T, mu: T) -> Result<Self> {
        check(beta > T::zero() && beta < T::one(), "weibull beta must lie in (0, 1)")?;
        check(scale > T::zero() && scale.is_finite(), "weibull scale must be positive")?;
        check(mu.is_finite(), "shift mu must be finite")?;
        Ok(TailLaw::WeibullShift { beta, scale, mu })
    }

    pub fn lognormal(mu_l: T, sigma_l: T, mu: T) -> Result<Self> {
        check(mu_l.is_finite(), "lognormal muL must be finite")?;
        check(sigma_l > T::zero() && sigma_l.is_finite(), "lognormal sigmaL must be positive")?;
        check(mu.is_finite(), "shift mu must be finite")?;
        Ok(TailLaw::LogNormalShift { mu_l, sigma_l, mu })
    }

    pub fn two_point(up: T, down: T, p: T) -> Result<Self> {
        check(up.is_finite() && down.is_finite(), "two-point atoms must be finite")?;
        check(up > -down, "two-point atoms must satisfy u > -v")?;
        check(p > T::zero() && p < T::one(), "two-point p must lie in (0, 1)")?;
        Ok(TailLaw::TwoPoint { up, down, p })
    }

    pub fn is_heavy_tailed(&self) -> bool {
        !matches!(self, TailLaw::TwoPoint { .. })
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, TailLaw::TwoPoint { .. })
    }

    /// Largest `x` with `tail(x) = 1`.
    pub fn lower_support(&self) -> T {
        match *self {
            TailLaw::ParetoShift { x0, mu, .. } => x0 - mu,
            TailLaw::WeibullShift { mu, .. } | TailLaw::LogNormalShift { mu, .. } => -mu,
            TailLaw::TwoPoint { down, .. } => -down,
        }
    }

    /// Upper bound `Â` on `A = 1/(1 + e^xi)`.
    pub fn success_bound(&self) -> T {
        crate::scalar::success_prob(self.lower_support())
    }

    /// `P(xi > x)`.
    pub fn tail(&self, x: T) -> T {
        match *self {
            TailLaw::TwoPoint { up, down, p } => {
                if x < -down {
                    T::one()
                } else if x < up {
                    p
                } else {
                    T::zero()
                }
            }
            _ => {
                if x <= self.lower_support() {
                    T::one()
                } else {
                    self.log_tail(x).exp()
                }
            }
        }
    }

    /// `ln P(xi > x)`; stays finite far beyond where `tail` underflows.
    pub fn log_tail(&self, x: T) -> T {
        if x <= self.lower_support() {
            return T::zero();
        }
        match *self {
            TailLaw::ParetoShift { alpha, x0, mu } => alpha * (x0 / (x + mu)).ln(),
            TailLaw::WeibullShift { beta, scale, mu } => -((x + mu) / scale).powf(beta),
            TailLaw::LogNormalShift { mu_l, sigma_l, mu } => {
                let z = ((x + mu).ln() - mu_l) / sigma_l;
                let t = z / T::SQRT_2();
                special::ln_erfc(t) - T::LN_2()
            }
            TailLaw::TwoPoint { .. } => self.tail(x).ln(),
        }
    }

    pub fn cdf(&self, x: T) -> T {
        T::one() - self.tail(x)
    }

    /// `inf{x : tail(x) <= s}` for `s ∈ (0, 1]`. Accurate for small `s`,
    /// which `quantile(1 - s)` would not be.
    pub fn inverse_tail(&self, s: T) -> T {
        match *self {
            TailLaw::ParetoShift { alpha, x0, mu } => x0 * s.powf(-T::one() / alpha) - mu,
            TailLaw::WeibullShift { beta, scale, mu } => {
                scale * (-s.ln()).powf(T::one() / beta) - mu
            }
            TailLaw::LogNormalShift { mu_l, sigma_l, mu } => {
                if s >= T::one() {
                    return -mu;
                }
                (mu_l + sigma_l * special::normal_upper_quantile(s)).exp() - mu
            }
            TailLaw::TwoPoint { up, down, p } => {
                if s >= p {
                    -down
                } else {
                    up
                }
            }
        }
    }

    /// `inf{x : cdf(x) >= u}` for `u ∈ (0, 1)`.
    pub fn quantile(&self, u: T) -> Result<T> {
        if !(u > T::zero() && u < T::one()) {
            return Err(Error::ProbabilityOutOfRange(u.to_f64_lossy()));
        }
        Ok(self.inverse_tail(T::one() - u))
    }

    pub fn mean_xi(&self) -> MeanXi<T> {
        match *self {
            TailLaw::ParetoShift { alpha, x0, mu } => {
                if alpha <= T::one() {
                    MeanXi::Infinite
                } else {
                    MeanXi::Finite(alpha * x0 / (alpha - T::one()) - mu)
                }
            }
            TailLaw::WeibullShift { beta, scale, mu } => {
                MeanXi::Finite(scale * special::gamma(T::one() + T::one() / beta) - mu)
            }
            TailLaw::LogNormalShift { mu_l, sigma_l, mu } => {
                MeanXi::Finite((mu_l + sigma_l * sigma_l / T::lit(2.0)).exp() - mu)
            }
            TailLaw::TwoPoint { up, down, p } => MeanXi::Finite(p * up - (T::one() - p) * down),
        }
    }

    /// `a = -E xi`, or an error when the law is not subcritical.
    pub fn drift(&self) -> Result<T> {
        match self.mean_xi() {
            MeanXi::Infinite => Err(Error::InfiniteMean),
            MeanXi::Finite(m) if m < T::zero() => Ok(-m),
            MeanXi::Finite(m) => Err(Error::NotSubcritical(m.to_f64_lossy())),
        }
    }

    /// Uncapped `∫_x^∞ tail(y) dy`, closed form where one exists.
    pub fn tail_integral(&self, x: T) -> Result<T> {
        if matches!(self.mean_xi(), MeanXi::Infinite) {
            return Err(Error::InfiniteMean);
        }
        if x == T::infinity() {
            return Ok(T::zero());
        }
        match *self {
            TailLaw::ParetoShift { alpha, x0, mu } => {
                let lo = self.lower_support();
                let below = (lo - x).max(T::zero());
                let t = x.max(lo);
                let above = x0 * (x0 / (t + mu)).powf(alpha - T::one()) / (alpha - T::one());
                Ok(below + above)
            }
            TailLaw::TwoPoint { up, down, p } => {
                if x >= up {
                    Ok(T::zero())
                } else if x >= -down {
                    Ok(p * (up - x))
                } else {
                    Ok((-down - x) + p * (up + down))
                }
            }
            _ => self.tail_integral_quadrature(x),
        }
    }

    /// `∫_x^∞ tail(y) dy` by adaptive quadrature regardless of family.
    pub fn tail_integral_quadrature(&self, x: T) -> Result<T> {
        if matches!(self.mean_xi(), MeanXi::Infinite) {
            return Err(Error::InfiniteMean);
        }
        let lo = self.lower_support();
        let below = (lo - x).max(T::zero());
        let start = x.max(lo);
        let mut points = vec![start];
        for s in [1e-1, 1e-3, 1e-6, 1e-12] {
            let q = self.inverse_tail(T::lit(s));
            if q > *points.last().unwrap() {
                points.push(q);
            }
        }
        points.push(T::infinity());
        let q = Quadrature::<T>::default();
        let r = q.integrate_pieces(|y| self.tail(y), &points)?;
        Ok(below + r.value)
    }

    /// Integrated-tail distribution `min(1, ∫_x^∞ tail)`.
    pub fn integrated_tail(&self, x: T) -> Result<T> {
        Ok(self.tail_integral(x)?.min(T::one()))
    }

    /// `F_I(x, y] = integrated_tail(x) - integrated_tail(y)`; `y` may be `+inf`.
    pub fn integrated_tail_interval(&self, x: T, y: T) -> Result<T> {
        if x > y {
            return Err(Error::ReversedInterval(x.to_f64_lossy(), y.to_f64_lossy()));
        }
        if x == y {
            return Ok(T::zero());
        }
        let hi = self.integrated_tail(x)?;
        let lo = self.integrated_tail(y)?;
        Ok((hi - lo).max(T::zero()))
    }
}
