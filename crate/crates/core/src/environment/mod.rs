//! Realized environments `xi_0..xi_{n-1}`: sampling, partial sums, the
//! law-of-large-numbers corridor and the finite-horizon perpetuity.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::heavytail::TailLaw;
use crate::numeric::{log_sum_exp, two_sum};
use crate::rng::open01;
use crate::scalar::{softplus, success_prob, Real};

impl<T: Real> TailLaw<T> {
    /// One draw of `xi` by inversion of the tail.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.inverse_tail(T::lit(open01(rng)))
    }

    /// One draw of `xi` conditioned on `xi > t`.
    ///
    /// Inverts `u F̄(t)`; exact for the continuous families. Fails when the
    /// conditioning event has probability zero.
    pub fn sample_above<R: Rng + ?Sized>(&self, t: T, rng: &mut R) -> Result<T> {
        let tail = self.tail(t);
        if !(tail > T::zero()) {
            return Err(Error::DegenerateProposal(t.to_f64_lossy()));
        }
        let x = self.inverse_tail(T::lit(open01(rng)) * tail);
        Ok(x.max(t))
    }
}

/// A realized environment with a double-double prefix-sum cache.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvPath<T = f64> {
    xs: Vec<T>,
    // prefix[i] = xi_0 + ... + xi_{i-1}, kept as an unevaluated hi + lo pair
    hi: Vec<T>,
    lo: Vec<T>,
}

impl<T: Real> EnvPath<T> {
    pub fn new(xs: Vec<T>) -> Self {
        let mut hi = Vec::with_capacity(xs.len() + 1);
        let mut lo = Vec::with_capacity(xs.len() + 1);
        let (mut h, mut l) = (T::zero(), T::zero());
        hi.push(h);
        lo.push(l);
        for &x in &xs {
            let (s, e) = two_sum(h, x);
            let (s, e2) = two_sum(s, l + e);
            h = s;
            l = e2;
            hi.push(h);
            lo.push(l);
        }
        Self { xs, hi, lo }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn xi(&self, k: usize) -> T {
        self.xs[k]
    }

    /// `A_k = 1/(1 + e^{xi_k})`.
    pub fn success(&self, k: usize) -> T {
        success_prob(self.xs[k])
    }

    /// `S_{j,k} = xi_j + ... + xi_k`.
    pub fn partial_sum(&self, j: usize, k: usize) -> Result<T> {
        if j > k || k >= self.xs.len() {
            return Err(Error::IndexOutOfRange { lo: j, hi: k, len: self.xs.len() });
        }
        let (s, e) = two_sum(self.hi[k + 1], -self.hi[j]);
        Ok(s + (e + (self.lo[k + 1] - self.lo[j])))
    }

    /// `|S_{j,k} - (k-j+1) mean| <= c + eps (k-j+1)`.
    pub fn lln_corridor_ok(&self, mean: T, c: T, eps: T, j: usize, k: usize) -> Result<bool> {
        let s = self.partial_sum(j, k)?;
        let w = T::from_usize(k - j + 1).expect("window length");
        Ok((s - w * mean).abs() <= c + eps * w)
    }

    /// `ln Σ_{k<n} e^{S_{k,n-1}}`, the log of `E(Z_n | env)`; `-inf` when empty.
    pub fn perpetuity(&self) -> T {
        let n = self.xs.len();
        if n == 0 {
            return T::neg_infinity();
        }
        let suffix: Vec<T> = (0..n).map(|k| self.partial_sum(k, n - 1).expect("in range")).collect();
        log_sum_exp(&suffix)
    }

    /// Same quantity through `P_n = e^{xi_{n-1}} (1 + P_{n-1})`, `P_0 = 0`.
    pub fn perpetuity_recursive(&self) -> T {
        let mut log_p = T::neg_infinity();
        for &x in &self.xs {
            log_p = x + if log_p == T::neg_infinity() { T::zero() } else { softplus(log_p) };
        }
        log_p
    }
}

/// `n` i.i.d. draws of `xi` from `law`.
pub fn sample_env<T: Real, R: Rng + ?Sized>(law: &TailLaw<T>, n: usize, rng: &mut R) -> EnvPath<T> {
    EnvPath::new((0..n).map(|_| law.sample(rng)).collect())
}

/// An environment file: a path plus the law and seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvFile {
    pub law: String,
    pub seed: u64,
    pub env: EnvPath<f64>,
}

impl EnvFile {
    pub fn to_text(&self) -> String {
        let mut out = format!("# bpre-env v1 n={} law={} seed={}\n", self.env.len(), self.law, self.seed);
        for x in self.env.xs() {
            writeln!(out, "{x:?}").expect("string write");
        }
        out
    }
}

impl FromStr for EnvFile {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Format { line: 1, message: "empty file".into() })?;
        let rest = header
            .strip_prefix("# bpre-env v1 ")
            .ok_or(Error::Format { line: 1, message: "expected '# bpre-env v1' header".into() })?;
        let (mut n, mut law, mut seed) = (None, None, None);
        for field in rest.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Format { line: 1, message: format!("bad header field '{field}'") })?;
            let bad = |what: &str| Error::Format { line: 1, message: format!("bad {what} '{value}'") };
            match key {
                "n" => n = Some(value.parse::<usize>().map_err(|_| bad("n"))?),
                "law" => law = Some(value.to_string()),
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
                _ => return Err(Error::Format { line: 1, message: format!("unknown header key '{key}'") }),
            }
        }
        let missing = |k: &str| Error::Format { line: 1, message: format!("header lacks {k}=") };
        let n = n.ok_or_else(|| missing("n"))?;
        let law = law.ok_or_else(|| missing("law"))?;
        let seed = seed.ok_or_else(|| missing("seed"))?;
        let mut xs = Vec::with_capacity(n);
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let x: f64 = line
                .parse()
                .map_err(|_| Error::Format { line: i + 1, message: format!("not a number: '{line}'") })?;
            xs.push(x);
        }
        if xs.len() != n {
            return Err(Error::Format { line: 1, message: format!("header says n={n}, found {} values", xs.len()) });
        }
        Ok(EnvFile { law, seed, env: EnvPath::new(xs) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    #[test]
    fn partial_sums_small_path() {
        let e = EnvPath::new(vec![2f64.ln(), 3f64.ln()]);
        assert!((e.partial_sum(0, 1).unwrap() - 6f64.ln()).abs() < 1e-15);
        assert_eq!(e.partial_sum(1, 1).unwrap(), 3f64.ln());
        assert!(e.partial_sum(1, 2).is_err());
        assert!(e.partial_sum(1, 0).is_err());
    }

    #[test]
    fn perpetuity_examples() {
        assert!((EnvPath::new(vec![0.0, 0.0]).perpetuity() - 2f64.ln()).abs() < 1e-15);
        let e = EnvPath::new(vec![2f64.ln(), 3f64.ln()]);
        assert!((e.perpetuity() - 9f64.ln()).abs() < 1e-15);
        assert_eq!(EnvPath::new(vec![1.25]).perpetuity(), 1.25);
        assert_eq!(EnvPath::<f64>::new(vec![]).perpetuity(), f64::NEG_INFINITY);
    }

    #[test]
    fn corridor_examples() {
        let mean = -1.0;
        let flat = EnvPath::new(vec![mean; 8]);
        assert!(flat.lln_corridor_ok(mean, 0.1, 0.01, 0, 7).unwrap());
        let (c, eps) = (1.0, 0.1);
        let mut xs = vec![mean; 8];
        xs[3] = mean + c + 2.0 * eps * 4.0;
        let bumped = EnvPath::new(xs);
        assert!(!bumped.lln_corridor_ok(mean, c, eps, 2, 5).unwrap());
        assert!(bumped.lln_corridor_ok(mean, c + 10.0, eps, 2, 5).unwrap());
    }

    #[test]
    fn sampling_is_deterministic() {
        let law = TailLaw::pareto(2.0, 1.0, 3.0).unwrap();
        let a = sample_env(&law, 5, &mut stream(11, 0));
        let b = sample_env(&law, 5, &mut stream(11, 0));
        assert_eq!(a, b);
        assert!(sample_env(&law, 0, &mut stream(11, 0)).is_empty());
    }

    #[test]
    fn sample_mean_matches_law() {
        let law = TailLaw::pareto(2.0, 1.0, 3.0).unwrap();
        let env = sample_env(&law, 1_000_000, &mut stream(5, 0));
        let n = env.len() as f64;
        let mean = env.partial_sum(0, env.len() - 1).unwrap() / n;
        let var = env.xs().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean + 1.0).abs() <= 3.0 * var.sqrt() / 1e3, "mean {mean}");
    }

    #[test]
    fn conditional_sampler_respects_threshold() {
        let law = TailLaw::weibull(0.5, 1.0, 2.0).unwrap();
        let mut r = stream(3, 0);
        for _ in 0..1000 {
            assert!(law.sample_above(30.0, &mut r).unwrap() > 30.0);
        }
        let tp = TailLaw::two_point(1.0, 1.0, 0.5).unwrap();
        assert!(matches!(tp.sample_above(5.0, &mut r), Err(Error::DegenerateProposal(_))));
    }

    #[test]
    fn env_file_roundtrip() {
        let law = TailLaw::pareto(2.0, 1.0, 3.0).unwrap();
        let f = EnvFile { law: law.to_string(), seed: 9, env: sample_env(&law, 7, &mut stream(9, 0)) };
        let back: EnvFile = f.to_text().parse().unwrap();
        assert_eq!(back, f);
        let broken = f.to_text().replace("n=7", "n=8");
        assert!(matches!(broken.parse::<EnvFile>(), Err(Error::Format { line: 1, .. })));
        let garbage = "# bpre-env v1 n=1 law=x seed=1\nabc\n";
        assert!(matches!(garbage.parse::<EnvFile>(), Err(Error::Format { line: 2, .. })));
    }

    proptest! {
        #[test]
        fn recursion_matches_direct_sum(xs in prop::collection::vec(-30.0f64..30.0, 1..60)) {
            let e = EnvPath::new(xs);
            let (d, r) = (e.perpetuity(), e.perpetuity_recursive());
            prop_assert!((d - r).abs() <= 1e-10 * d.abs().max(1.0));
        }

        #[test]
        fn prefix_cache_matches_naive(xs in prop::collection::vec(-1e3f64..1e3, 1..80), a in 0usize..80, b in 0usize..80) {
            let e = EnvPath::new(xs.clone());
            let (j, k) = (a.min(b) % xs.len(), a.max(b) % xs.len());
            prop_assume!(j <= k);
            let naive = crate::numeric::compensated_sum(&xs[j..=k]);
            let cached = e.partial_sum(j, k).unwrap();
            prop_assert!((naive - cached).abs() <= 1e-12 * naive.abs().max(1.0));
        }

        #[test]
        fn sums_are_additive(xs in prop::collection::vec(-10.0f64..10.0, 4..40), l in 0usize..39) {
            let e = EnvPath::new(xs.clone());
            let n = xs.len();
            let l = l % (n - 1);
            let whole = e.partial_sum(0, n - 1).unwrap();
            let split = e.partial_sum(0, l).unwrap() + e.partial_sum(l + 1, n - 1).unwrap();
            prop_assert!((whole - split).abs() <= 1e-12 * whole.abs().max(1.0));
        }
    }
}
