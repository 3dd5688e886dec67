//! Crude and importance-sampling estimators of population and perpetuity
//! tails, and the conditional probability of a single atypical environment.
//!
//! The importance proposal is a defensive mixture. With probability `rho` an
//! index `k` is drawn uniformly and `xi_k` is drawn from the law conditioned
//! on `xi_k > t(k) = ln m + a(n-1-k) - delta`; the other coordinates, and the
//! whole path with probability `1 - rho`, come from the law itself. The
//! likelihood ratio is
//! `1/[(1 - rho) + (rho/n) Σ_k 1{xi_k > t(k)}/F̄(t(k))]`, at most `1/(1 - rho)`.

use rand::Rng;

use crate::asymptotics::jump::detect_single_big_jump;
use crate::asymptotics::predictions::{finite_horizon_prediction, stationary_prediction, thm1_prediction};
use crate::asymptotics::replicate::{replicate, McConfig, Moments};
use crate::branching::{burn_in, simulate, simulate_in_env, Mode};
use crate::environment::{sample_env, EnvPath};
use crate::error::{Error, Result};
use crate::heavytail::TailLaw;
use crate::rng::open01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Crude,
    Importance,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictionKind {
    Thm1,
    FiniteHorizon,
    Stationary,
    PerpFinite,
    PerpStationary,
}

/// An estimated tail probability next to the asymptotic value it targets.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TailEstimate {
    pub value: f64,
    pub std_error: f64,
    pub reps: u64,
    pub method: Method,
    pub prediction: f64,
    pub prediction_kind: PredictionKind,
    /// Mean likelihood ratio; near one when the proposal is correct.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub weight_mean: Option<f64>,
}

impl TailEstimate {
    /// Normal-approximation interval at `z` standard errors.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.value - z * self.std_error, self.value + z * self.std_error)
    }
}

/// Parameters of the defensive mixture proposal.
///
/// `pair` is the weight of an optional two-jump component: an ordered pair
/// `(j, k)` is drawn uniformly, `xi_j` is drawn above `τ/4` and `xi_k` above
/// `τ - xi_j`, where `τ = t(min(j, k))`. It reaches exceedances made of two
/// moderate jumps, which the single-jump component never proposes. The
/// defensive weight is `1 - rho - pair`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Proposal {
    pub rho: f64,
    pub delta: f64,
    #[serde(default)]
    pub pair: f64,
}

impl Default for Proposal {
    fn default() -> Self {
        Self { rho: 0.9, delta: 5.0, pair: 0.0 }
    }
}

impl Proposal {
    /// Single-jump weight 0.8, two-jump weight 0.1, defensive weight 0.1.
    pub fn with_pairs() -> Self {
        Self { rho: 0.8, delta: 5.0, pair: 0.1 }
    }
}

/// Environment sampler under the mixture proposal.
#[derive(Debug, Clone)]
pub struct MixtureSampler<'a> {
    law: &'a TailLaw<f64>,
    thresholds: Vec<f64>,
    tails: Vec<f64>,
    rho: f64,
    pair: f64,
}

impl<'a> MixtureSampler<'a> {
    pub fn new(law: &'a TailLaw<f64>, n: usize, m: f64, proposal: Proposal) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("importance sampling needs n >= 1".into()));
        }
        let Proposal { rho, delta, pair } = proposal;
        if !(rho >= 0.0 && pair >= 0.0 && rho + pair < 1.0) {
            return Err(Error::InvalidArgument(format!("mixture weights rho={rho}, pair={pair} leave no defensive mass")));
        }
        let pair = if n >= 2 { pair } else { 0.0 };
        let a = law.drift()?;
        let thresholds: Vec<f64> = (0..n).map(|k| m.ln() + a * (n - 1 - k) as f64 - delta).collect();
        let tails: Vec<f64> = thresholds.iter().map(|&t| law.tail(t)).collect();
        if let Some(i) = tails.iter().position(|&f| f <= 0.0) {
            return Err(Error::DegenerateProposal(thresholds[i]));
        }
        Ok(Self { law, thresholds, tails, rho, pair })
    }

    fn pair_floor(&self, j: usize, k: usize) -> (f64, f64) {
        let tau = self.thresholds[j.min(k)];
        (tau, tau / 4.0)
    }

    /// A proposal path and its likelihood ratio.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(EnvPath<f64>, f64)> {
        let n = self.thresholds.len();
        let u = open01(rng);
        let mut xs: Vec<f64> = Vec::with_capacity(n);
        if u < self.rho {
            let forced = rng.random_range(0..n);
            for i in 0..n {
                xs.push(if i == forced { self.law.sample_above(self.thresholds[i], rng)? } else { self.law.sample(rng) });
            }
        } else if u < self.rho + self.pair {
            let j = rng.random_range(0..n);
            let k = (j + 1 + rng.random_range(0..n - 1)) % n;
            xs = (0..n).map(|_| self.law.sample(rng)).collect();
            let (tau, floor) = self.pair_floor(j, k);
            xs[j] = self.law.sample_above(floor, rng)?;
            xs[k] = self.law.sample_above(tau - xs[j], rng)?;
        } else {
            xs = (0..n).map(|_| self.law.sample(rng)).collect();
        }
        let w = self.weight(&xs);
        Ok((EnvPath::new(xs), w))
    }

    pub fn weight(&self, xs: &[f64]) -> f64 {
        let n = self.thresholds.len();
        let single: f64 = xs
            .iter()
            .zip(self.thresholds.iter().zip(&self.tails))
            .filter(|(x, (t, _))| *x > t)
            .map(|(_, (_, f))| 1.0 / f)
            .sum();
        let mut density = (1.0 - self.rho - self.pair) + self.rho / n as f64 * single;
        if self.pair > 0.0 {
            let mut s = 0.0;
            for j in 0..n {
                for k in (0..n).filter(|&k| k != j) {
                    let (tau, floor) = self.pair_floor(j, k);
                    if xs[j] > floor && xs[k] > tau - xs[j] {
                        s += 1.0 / (self.law.tail(floor) * self.law.tail(tau - xs[j]));
                    }
                }
            }
            density += self.pair / (n * (n - 1)) as f64 * s;
        }
        1.0 / density
    }
}

fn tail_prediction(law: &TailLaw<f64>, n: usize, m: f64, mode: Mode) -> (f64, PredictionKind) {
    match (mode, finite_horizon_prediction(law, n as u64, m)) {
        (Mode::Size1, Ok(p)) => (p, PredictionKind::FiniteHorizon),
        _ => (thm1_prediction(law, n as u64, m), PredictionKind::Thm1),
    }
}

fn check_m(m: f64) -> Result<()> {
    if m.is_finite() && m >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("threshold m must be finite and nonnegative, got {m}")))
    }
}

/// Fraction of replications with `Z_n > m`.
pub fn estimate_tail_crude(law: &TailLaw<f64>, n: usize, m: f64, mode: Mode, mc: &McConfig) -> Result<TailEstimate> {
    check_m(m)?;
    let mom: Moments<1> = replicate(mc, |rng, _| {
        let hit = simulate(law, n, mode, rng).last().exceeds(m);
        Ok([f64::from(u8::from(hit))])
    })?;
    let (prediction, prediction_kind) = tail_prediction(law, n, m, mode);
    Ok(TailEstimate {
        value: mom.mean(0),
        std_error: mom.std_error(0),
        reps: mom.count,
        method: Method::Crude,
        prediction,
        prediction_kind,
        weight_mean: None,
    })
}

fn importance(
    law: &TailLaw<f64>,
    n: usize,
    m: f64,
    mc: &McConfig,
    proposal: Proposal,
    hit: impl Fn(EnvPath<f64>, &mut crate::rng::Stream) -> bool + Sync,
) -> Result<Moments<2>> {
    check_m(m)?;
    let sampler = MixtureSampler::new(law, n, m, proposal)?;
    replicate(mc, |rng, _| {
        let (env, w) = sampler.sample(rng)?;
        let h = if hit(env, rng) { w } else { 0.0 };
        Ok([h, w])
    })
}

/// Unbiased importance-sampling estimate of `P(Z_n > m)`.
pub fn estimate_tail_importance(
    law: &TailLaw<f64>,
    n: usize,
    m: f64,
    mode: Mode,
    mc: &McConfig,
    proposal: Proposal,
) -> Result<TailEstimate> {
    let mom = importance(law, n, m, mc, proposal, |env, rng| simulate_in_env(env, mode, rng).last().exceeds(m))?;
    let (prediction, prediction_kind) = tail_prediction(law, n, m, mode);
    Ok(TailEstimate {
        value: mom.mean(0),
        std_error: mom.std_error(0),
        reps: mom.count,
        method: Method::Importance,
        prediction,
        prediction_kind,
        weight_mean: Some(mom.mean(1)),
    })
}

/// `P(Z > m)` under the stationary law, approximated by the size-1 process
/// after [`burn_in`] generations from `Z_0 = 0`.
pub fn estimate_stationary_tail(law: &TailLaw<f64>, m: f64, mc: &McConfig, proposal: Proposal) -> Result<TailEstimate> {
    let n = burn_in(law, m)?;
    let mut est = estimate_tail_importance(law, n, m, Mode::Size1, mc, proposal)?;
    est.prediction = stationary_prediction(law, m)?;
    est.prediction_kind = PredictionKind::Stationary;
    Ok(est)
}

/// Horizon of a perpetuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(usize),
    /// Stationary perpetuity, approximated at the branching burn-in horizon.
    Stationary,
}

/// `P(Σ_{k<n} e^{S_{k,n-1}} > m)` by importance sampling of the environment alone.
pub fn estimate_perpetuity_tail(
    law: &TailLaw<f64>,
    horizon: Horizon,
    m: f64,
    mc: &McConfig,
    proposal: Proposal,
) -> Result<TailEstimate> {
    let ln_m = m.ln();
    let (n, prediction, prediction_kind) = match horizon {
        Horizon::Finite(n) => (n, finite_horizon_prediction(law, n as u64, m)?, PredictionKind::PerpFinite),
        Horizon::Stationary => (burn_in(law, m)?, stationary_prediction(law, m)?, PredictionKind::PerpStationary),
    };
    let mom = importance(law, n, m, mc, proposal, |env, _| env.perpetuity() > ln_m)?;
    Ok(TailEstimate {
        value: mom.mean(0),
        std_error: mom.std_error(0),
        reps: mom.count,
        method: Method::Importance,
        prediction,
        prediction_kind,
        weight_mean: Some(mom.mean(1)),
    })
}

/// Crude estimate of the perpetuity tail, for cross-checks.
pub fn estimate_perpetuity_tail_crude(law: &TailLaw<f64>, n: usize, m: f64, mc: &McConfig) -> Result<TailEstimate> {
    let ln_m = m.ln();
    let mom: Moments<1> =
        replicate(mc, |rng, _| Ok([f64::from(u8::from(sample_env(law, n, rng).perpetuity() > ln_m))]))?;
    Ok(TailEstimate {
        value: mom.mean(0),
        std_error: mom.std_error(0),
        reps: mom.count,
        method: Method::Crude,
        prediction: finite_horizon_prediction(law, n as u64, m)?,
        prediction_kind: PredictionKind::PerpFinite,
        weight_mean: None,
    })
}

/// Ratio estimate with a normal-approximation confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RatioEstimate {
    pub value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Replications in the conditioning event.
    pub hits: u64,
    pub reps: u64,
}

/// `P(∪_k E_n^(k)(m) | Z_n > m)` under the size-1 process, as the ratio of
/// importance-weighted masses; delta-method interval at 95%.
pub fn psae_conditional_prob(
    law: &TailLaw<f64>,
    n: usize,
    m: f64,
    c: f64,
    eps: f64,
    mc: &McConfig,
    proposal: Proposal,
) -> Result<RatioEstimate> {
    check_m(m)?;
    if !(c > 1.0 && eps > 0.0) {
        return Err(Error::InvalidArgument(format!("need c > 1 and eps > 0, got c={c}, eps={eps}")));
    }
    let mean = -law.drift()?;
    let sampler = MixtureSampler::new(law, n, m, proposal)?;
    let mom: Moments<3> = replicate(mc, |rng, _| {
        let (env, w) = sampler.sample(rng)?;
        let traj = simulate_in_env(env, Mode::Size1, rng);
        if !traj.last().exceeds(m) {
            return Ok([0.0, 0.0, 0.0]);
        }
        let detected = detect_single_big_jump(&traj, mean, m, c, eps)?.is_some();
        Ok([if detected { w } else { 0.0 }, w, 1.0])
    })?;
    let hits = (mom.mean(2) * mom.count as f64).round() as u64;
    if hits == 0 {
        return Err(Error::NoHits);
    }
    let (num, den) = (mom.mean(0), mom.mean(1));
    let r = num / den;
    let var = mom.cov(0, 0) - 2.0 * r * mom.cov(0, 1) + r * r * mom.cov(1, 1);
    let se = (var.max(0.0) / mom.count as f64).sqrt() / den;
    Ok(RatioEstimate {
        value: r,
        std_error: se,
        ci_low: (r - 1.96 * se).max(0.0),
        ci_high: (r + 1.96 * se).min(1.0),
        hits,
        reps: mom.count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::exact_tail_z1;
    use crate::rng::stream;

    fn p213() -> TailLaw<f64> {
        TailLaw::pareto(2.0, 1.0, 3.0).unwrap()
    }

    #[test]
    fn crude_one_step_matches_quadrature() {
        let law = p213();
        let est = estimate_tail_crude(&law, 1, 0.0, Mode::Size1, &McConfig::new(200_000, 1)).unwrap();
        let exact = exact_tail_z1(&law, 0).unwrap();
        assert!((est.value - exact).abs() < 3.0 * est.std_error + 1e-12, "{} vs {exact}", est.value);
    }

    #[test]
    fn single_replication_is_an_indicator() {
        let est = estimate_tail_crude(&p213(), 3, 5.0, Mode::Size1, &McConfig::new(1, 4)).unwrap();
        assert!(est.value == 0.0 || est.value == 1.0);
    }

    #[test]
    fn weights_are_bounded_and_average_to_one() {
        let law = p213();
        let s = MixtureSampler::new(&law, 10, 1e6, Proposal::default()).unwrap();
        let mut rng = stream(5, 0);
        let mut total = 0.0;
        let reps = 200_000;
        let mut ws = Vec::with_capacity(reps);
        for _ in 0..reps {
            let (_, w) = s.sample(&mut rng).unwrap();
            assert!(w > 0.0 && w <= 10.0 + 1e-12);
            total += w;
            ws.push(w);
        }
        let mean = total / reps as f64;
        let sd = (ws.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / reps as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * sd / (reps as f64).sqrt(), "{mean}");
    }

    #[test]
    fn importance_agrees_with_crude() {
        let law = p213();
        let (n, m) = (3, 1e4);
        let crude = estimate_tail_crude(&law, n, m, Mode::Size1, &McConfig::new(400_000, 7)).unwrap();
        let is = estimate_tail_importance(&law, n, m, Mode::Size1, &McConfig::new(100_000, 8), Proposal::default())
            .unwrap();
        let z = (crude.value - is.value).abs() / (crude.std_error.powi(2) + is.std_error.powi(2)).sqrt();
        assert!(z < 4.0, "crude {} is {}", crude.value, is.value);
    }

    #[test]
    fn pair_component_is_unbiased_and_reaches_two_jump_paths() {
        let law = p213();
        let s = MixtureSampler::new(&law, 4, 1e12, Proposal::with_pairs()).unwrap();
        let mom: Moments<2> = replicate(&McConfig::new(200_000, 11), |rng, _| {
            let (env, w) = s.sample(rng)?;
            Ok([w, if env.xs()[1] > 15.0 { w } else { 0.0 }])
        })
        .unwrap();
        assert!((mom.mean(0) - 1.0).abs() < 4.0 * mom.std_error(0), "{}", mom.mean(0));
        let target = law.tail(15.0);
        assert!((mom.mean(1) - target).abs() < 4.0 * mom.std_error(1), "{} vs {target}", mom.mean(1));

        // two moderate jumps, neither above its single-jump threshold
        let t = 12.0 * std::f64::consts::LN_10 + 3.0 - 5.0;
        let xs = [t / 2.0 + 2.0, t / 2.0 + 2.0, -1.0, -1.0];
        let single = MixtureSampler::new(&law, 4, 1e12, Proposal::default()).unwrap();
        assert!((single.weight(&xs) - 10.0).abs() < 1e-12);
        assert!(s.weight(&xs) < 1.0);
        assert!(MixtureSampler::new(&law, 4, 1e12, Proposal { rho: 0.5, delta: 5.0, pair: 0.5 }).is_err());
    }

    #[test]
    fn one_step_perpetuity_is_the_tail() {
        let law = p213();
        let m = 1e6;
        let est = estimate_perpetuity_tail(&law, Horizon::Finite(1), m, &McConfig::new(50_000, 2), Proposal::default())
            .unwrap();
        let exact = law.tail(m.ln());
        assert!((est.value - exact).abs() < 4.0 * est.std_error, "{} vs {exact}", est.value);
    }

    #[test]
    fn psae_low_at_small_m() {
        let law = p213();
        let r = psae_conditional_prob(&law, 10, 2.0, 2.0, 0.05, &McConfig::new(20_000, 3), Proposal::default()).unwrap();
        assert!(r.ci_high < 0.75, "{r:?}");
    }

    #[test]
    fn bad_arguments() {
        let law = p213();
        let mc = McConfig::new(10, 1);
        assert!(estimate_tail_importance(&law, 0, 1e3, Mode::Size1, &mc, Proposal::default()).is_err());
        assert!(psae_conditional_prob(&law, 5, 1e3, 0.5, 0.1, &mc, Proposal::default()).is_err());
        let bad = Proposal { rho: 1.0, delta: 5.0, pair: 0.0 };
        assert!(estimate_tail_importance(&law, 3, 1e3, Mode::Size1, &mc, bad).is_err());
    }
}
