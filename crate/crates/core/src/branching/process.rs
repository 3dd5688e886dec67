//! Population recursion `Z_{n+1} = B_{n+1,1} + ... + B_{n+1,r(Z_n)}`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::environment::{sample_env, EnvPath};
use crate::error::{Error, Result};
use crate::heavytail::TailLaw;

/// Exact integer dynamics are kept up to this population.
pub const POPULATION_CEILING: u64 = 1_000_000_000_000;

fn ln_ceiling() -> f64 {
    (POPULATION_CEILING as f64).ln()
}

/// How many geometric families reproduce in the next generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `r = Z + 1`, started from `Z_0 = 0`
    Size1,
    /// `r = max(1, Z)`, started from `Z_0 = 0`
    StateDep,
    /// `r = Z`, started from `W_0 = 1`
    NoImm,
}

impl Mode {
    pub fn initial(self) -> Population {
        match self {
            Mode::NoImm => Population::Exact(1),
            _ => Population::Exact(0),
        }
    }

    /// Number of reproducing families given the current population.
    pub fn families(self, z: Population) -> Population {
        match (self, z) {
            (Mode::Size1, Population::Exact(z)) => Population::Exact(z + 1),
            (Mode::Size1, Population::Approx { ln }) => Population::Approx { ln: ln + (-ln).exp().ln_1p() },
            (Mode::StateDep, Population::Exact(z)) => Population::Exact(z.max(1)),
            (_, z) => z,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Size1 => "size1",
            Mode::StateDep => "statedep",
            Mode::NoImm => "noimm",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "size1" => Ok(Mode::Size1),
            "statedep" => Ok(Mode::StateDep),
            "noimm" => Ok(Mode::NoImm),
            _ => Err(Error::InvalidArgument(format!("unknown mode '{s}' (size1|statedep|noimm)"))),
        }
    }
}

/// A population size: an exact count, or the logarithm of a size beyond
/// [`POPULATION_CEILING`] propagated deterministically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Population {
    Exact(u64),
    Approx { ln: f64 },
}

impl Population {
    pub fn is_approx(self) -> bool {
        matches!(self, Population::Approx { .. })
    }

    pub fn ln(self) -> f64 {
        match self {
            Population::Exact(z) => (z as f64).ln(),
            Population::Approx { ln } => ln,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Population::Exact(z) => z as f64,
            Population::Approx { ln } => ln.exp(),
        }
    }

    /// `Z > m`.
    pub fn exceeds(self, m: f64) -> bool {
        match self {
            Population::Exact(z) => (z as f64) > m,
            Population::Approx { ln } => m <= 0.0 || ln > m.ln(),
        }
    }

    /// Normalizes a log-size: exact below the ceiling, approximate above.
    pub fn from_ln(ln: f64) -> Self {
        if ln <= ln_ceiling() {
            Population::Exact(ln.exp().round() as u64)
        } else {
            Population::Approx { ln }
        }
    }

    pub fn add(self, other: Self) -> Self {
        match (self, other) {
            (Population::Exact(a), Population::Exact(b)) if a + b <= POPULATION_CEILING => Population::Exact(a + b),
            (Population::Exact(0), x) | (x, Population::Exact(0)) => x,
            (a, b) => Population::from_ln(crate::scalar::log_add_exp(a.ln(), b.ln())),
        }
    }

    /// `self - other` for `other <= self`, saturating at zero.
    pub fn sub(self, other: Self) -> Self {
        match (self, other) {
            (Population::Exact(a), Population::Exact(b)) => Population::Exact(a.saturating_sub(b)),
            (a, Population::Exact(0)) => a,
            (a, b) => {
                let d = b.ln() - a.ln();
                if d >= 0.0 {
                    Population::Exact(0)
                } else {
                    Population::from_ln(a.ln() + (-d.exp()).ln_1p())
                }
            }
        }
    }
}

impl PartialOrd for Population {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        match (self, other) {
            (Population::Exact(a), Population::Exact(b)) => a.partial_cmp(b),
            _ => self.ln().partial_cmp(&other.ln()),
        }
    }
}

impl fmt::Display for Population {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Population::Exact(z) => write!(f, "{z}"),
            Population::Approx { ln } => write!(f, "{:e}", ln.exp()),
        }
    }
}

/// Sum of `r` independent geometric(A) variables with `e^{xi} = (1-A)/A`.
///
/// Drawn as Poisson(Gamma(r, 1) e^{xi}), which is exact in distribution. The
/// Poisson layer is dropped when its mean exceeds the population ceiling
/// (relative noise below 1e-6 there), and a population of families beyond the
/// ceiling is propagated deterministically as `r e^{xi}`.
pub fn negbinom<R: Rng + ?Sized>(r: Population, xi: f64, rng: &mut R) -> Population {
    match r {
        Population::Exact(0) => Population::Exact(0),
        Population::Exact(r) => {
            let g: f64 = Gamma::new(r as f64, 1.0).expect("positive shape").sample(rng);
            let ln_lambda = g.ln() + xi;
            if ln_lambda > ln_ceiling() {
                return Population::Approx { ln: ln_lambda };
            }
            let lambda = ln_lambda.exp();
            if !(lambda > 0.0) {
                return Population::Exact(0);
            }
            let k: f64 = Poisson::new(lambda).expect("finite positive mean").sample(rng);
            Population::Exact(k as u64)
        }
        Population::Approx { ln } => Population::from_ln(ln + xi),
    }
}

/// One generation.
pub fn step<R: Rng + ?Sized>(z: Population, xi: f64, mode: Mode, rng: &mut R) -> Population {
    negbinom(mode.families(z), xi, rng)
}

/// A realized path `Z_0..Z_n` with its environment; `Z_{k+1}` is driven by `xi_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub env: EnvPath<f64>,
    pub zs: Vec<Population>,
    pub mode: Mode,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.env.len()
    }

    pub fn is_empty(&self) -> bool {
        self.env.is_empty()
    }

    pub fn last(&self) -> Population {
        *self.zs.last().expect("Z_0 always present")
    }

    pub fn approx_flags(&self) -> Vec<bool> {
        self.zs.iter().map(|z| z.is_approx()).collect()
    }

    /// `step, xi, A, Z, approx`; the row for step `k >= 1` carries the
    /// environment `xi_{k-1}` that produced `Z_k`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# bpre-traj v1 mode={}\nstep,xi,A,Z,approx\n", self.mode);
        for (k, z) in self.zs.iter().enumerate() {
            let approx = u8::from(z.is_approx());
            if k == 0 {
                out.push_str(&format!("0,,,{z},{approx}\n"));
            } else {
                let xi = self.env.xi(k - 1);
                out.push_str(&format!("{k},{xi:?},{:?},{z},{approx}\n", self.env.success(k - 1)));
            }
        }
        out
    }
}

/// Folds the recursion over a given environment.
pub fn simulate_in_env<R: Rng + ?Sized>(env: EnvPath<f64>, mode: Mode, rng: &mut R) -> Trajectory {
    let mut zs = Vec::with_capacity(env.len() + 1);
    let mut z = mode.initial();
    zs.push(z);
    for &xi in env.xs() {
        z = step(z, xi, mode, rng);
        zs.push(z);
    }
    Trajectory { env, zs, mode }
}

/// Samples an environment of length `n`, then the population path.
pub fn simulate<R: Rng + ?Sized>(law: &TailLaw<f64>, n: usize, mode: Mode, rng: &mut R) -> Trajectory {
    let env = sample_env(law, n, rng);
    simulate_in_env(env, mode, rng)
}

/// Size-1 and state-dependent paths on one environment and one offspring
/// source: the state-dependent families are a subset of the size-1
/// families, so `Ẑ_k <= Z_k` on every path.
pub fn simulate_coupled<R: Rng + ?Sized>(law: &TailLaw<f64>, n: usize, rng: &mut R) -> (Trajectory, Trajectory) {
    let env = sample_env(law, n, rng);
    let (mut z, mut zh) = (Population::Exact(0), Population::Exact(0));
    let (mut zs, mut zhs) = (vec![z], vec![zh]);
    for &xi in env.xs() {
        let r = Mode::Size1.families(z);
        let rh = Mode::StateDep.families(zh);
        let shared = negbinom(rh, xi, rng);
        let extra = negbinom(r.sub(rh), xi, rng);
        zh = shared;
        z = shared.add(extra);
        zs.push(z);
        zhs.push(zh);
    }
    (
        Trajectory { env: env.clone(), zs, mode: Mode::Size1 },
        Trajectory { env, zs: zhs, mode: Mode::StateDep },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::tails::geometric_tail;
    use crate::rng::stream;

    fn p213() -> TailLaw<f64> {
        TailLaw::pareto(2.0, 1.0, 3.0).unwrap()
    }

    #[test]
    fn no_immigration_from_zero_stays_zero() {
        let mut r = stream(1, 0);
        for &xi in &[-1.0, 0.0, 5.0, 40.0] {
            assert_eq!(step(Population::Exact(0), xi, Mode::NoImm, &mut r), Population::Exact(0));
        }
    }

    #[test]
    fn single_family_is_geometric() {
        // A = 0.3; compare the empirical cdf with the exact one
        let a: f64 = 0.3;
        let xi = ((1.0 - a) / a).ln();
        let mut r = stream(2, 0);
        let n = 100_000;
        let draws: Vec<u64> = (0..n)
            .map(|_| match negbinom(Population::Exact(1), xi, &mut r) {
                Population::Exact(k) => k,
                Population::Approx { .. } => unreachable!(),
            })
            .collect();
        let mut worst: f64 = 0.0;
        for m in 0..40 {
            let emp = draws.iter().filter(|&&d| d > m).count() as f64 / n as f64;
            worst = worst.max((emp - geometric_tail(a, m as i64).unwrap()).abs());
        }
        // 1% Kolmogorov critical value for one sample
        assert!(worst < 1.628 / (n as f64).sqrt(), "D = {worst}");
    }

    #[test]
    fn negbinom_mean_and_variance() {
        let (r, a) = (10u64, 0.5f64);
        let xi = ((1.0 - a) / a).ln();
        let mut rng = stream(3, 0);
        let n = 100_000usize;
        let xs: Vec<f64> = (0..n).map(|_| negbinom(Population::Exact(r), xi, &mut rng).to_f64()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let (mu, sigma2) = (r as f64 * (1.0 - a) / a, r as f64 * (1.0 - a) / (a * a));
        assert!((mean - mu).abs() < 4.0 * (sigma2 / n as f64).sqrt(), "mean {mean}");
        // variance of the sample variance, from the NB fourth cumulant
        let k4 = r as f64 * (1.0 - a) * (a * a - 6.0 * a + 6.0) / a.powi(4);
        let se_var = ((k4 + 2.0 * sigma2 * sigma2) / n as f64).sqrt();
        assert!((var - sigma2).abs() < 4.0 * se_var, "var {var}");
    }

    #[test]
    fn above_ceiling_is_flagged_and_returns() {
        let mut r = stream(4, 0);
        let big = negbinom(Population::Exact(1_000_000), 30.0, &mut r);
        assert!(big.is_approx());
        assert!((big.ln() - (1e6f64.ln() + 30.0)).abs() < 0.01);
        let back = step(big, -40.0, Mode::Size1, &mut r);
        assert!(!back.is_approx());
    }

    #[test]
    fn simulate_is_deterministic() {
        let law = p213();
        let a = simulate(&law, 25, Mode::Size1, &mut stream(9, 1));
        let b = simulate(&law, 25, Mode::Size1, &mut stream(9, 1));
        assert_eq!(a, b);
        let empty = simulate(&law, 0, Mode::Size1, &mut stream(9, 1));
        assert_eq!(empty.zs, vec![Population::Exact(0)]);
        assert_eq!(simulate(&law, 0, Mode::NoImm, &mut stream(9, 1)).zs, vec![Population::Exact(1)]);
    }

    #[test]
    fn extinction_is_absorbing() {
        let law = p213();
        for i in 0..500 {
            let t = simulate(&law, 30, Mode::NoImm, &mut stream(10, i));
            if let Some(k) = t.zs.iter().position(|&z| z == Population::Exact(0)) {
                assert!(t.zs[k..].iter().all(|&z| z == Population::Exact(0)));
            }
        }
    }

    #[test]
    fn state_dependent_is_dominated() {
        let law = p213();
        for i in 0..500 {
            let (z, zh) = simulate_coupled(&law, 40, &mut stream(12, i));
            for (a, b) in z.zs.iter().zip(&zh.zs) {
                assert!(b <= a, "{b} > {a}");
            }
        }
    }

    #[test]
    fn csv_layout() {
        let t = simulate(&p213(), 3, Mode::StateDep, &mut stream(1, 1));
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# bpre-traj v1 mode=statedep");
        assert_eq!(lines[1], "step,xi,A,Z,approx");
        assert_eq!(lines.len(), 6);
        assert!(lines[2].starts_with("0,,,0,"));
    }

    #[test]
    fn mode_parsing() {
        for m in [Mode::Size1, Mode::StateDep, Mode::NoImm] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert!("both".parse::<Mode>().is_err());
    }
}
