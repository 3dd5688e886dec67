//! Nearest-neighbour walk on the integers in the environment `A_i`.
//!
//! The walk is simulated move by move, except at trap sites (`A_i < tau`).
//! There the `G ~ Geom(A_i)` left excursions taken before the next right step
//! are resolved in aggregate: with `R_{i-1} = G`, site `j` is left
//! `D_j ~ NB(R_j, A_j)` times and `R_{j-1} = D_j`, down to the first empty
//! generation. Every left move in such a block is matched by one right move,
//! so the block adds `2 (G + Σ D_j)` to `T_n`. This is exact in law for
//! `(T_n, U)`; only the interleaving of moves is not materialized.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::branching::{negbinom, Population};
use crate::error::{Error, Result};
use crate::heavytail::TailLaw;
use crate::rng::{open01, site_stream};
use crate::scalar::success_prob;

/// Default cap on individually simulated moves.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000_000;

/// Sites with `A_i` below this are resolved in aggregate.
pub const DEFAULT_TRAP: f64 = 0.05;

/// Lazily sampled two-sided environment. Site `i` draws its `xi_i` from its
/// own substream of `seed`, so the environment does not depend on the order
/// in which sites are first visited.
#[derive(Debug, Clone)]
pub struct SiteEnv<'a> {
    law: &'a TailLaw<f64>,
    seed: u64,
    right: Vec<f64>,
    left: Vec<f64>,
}

impl<'a> SiteEnv<'a> {
    pub fn new(law: &'a TailLaw<f64>, seed: u64) -> Self {
        Self { law, seed, right: Vec::new(), left: Vec::new() }
    }

    /// `xi_i`.
    pub fn xi(&mut self, site: i64) -> f64 {
        let (side, idx) = if site >= 0 { (&mut self.right, site as usize) } else { (&mut self.left, (-site - 1) as usize) };
        while side.len() <= idx {
            let s = if site >= 0 { side.len() as i64 } else { -(side.len() as i64) - 1 };
            side.push(self.law.sample(&mut site_stream(self.seed, s)));
        }
        side[idx]
    }
}

/// Summary of one walk up to its hitting time of level `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkOutcome {
    pub n: u64,
    pub t_n: BigUint,
    /// Nonzero downcrossing counts `U_i^n`.
    pub u: BTreeMap<i64, BigUint>,
    pub min_site: i64,
    /// Set when some aggregate count passed the exact population ceiling.
    pub approx: bool,
}

impl WalkOutcome {
    /// Outcome of an explicit move sequence (`true` = right) that first hits `n`
    /// at its last move.
    pub fn from_moves(n: u64, moves: &[bool]) -> Result<Self> {
        let mut pos = 0i64;
        let mut u: BTreeMap<i64, BigUint> = BTreeMap::new();
        let mut min_site = 0;
        for (t, &right) in moves.iter().enumerate() {
            if pos >= n as i64 {
                return Err(Error::InvalidArgument(format!("level {n} reached before move {t}")));
            }
            if right {
                pos += 1;
            } else {
                *u.entry(pos).or_default() += 1u32;
                pos -= 1;
                min_site = min_site.min(pos);
            }
        }
        if pos != n as i64 {
            return Err(Error::InvalidArgument(format!("moves end at {pos}, not {n}")));
        }
        Ok(Self { n, t_n: BigUint::from(moves.len()), u, min_site, approx: false })
    }

    pub fn sum_u(&self) -> BigUint {
        self.u.values().sum()
    }

    /// `Σ_{i=1}^{n} U_i^n`.
    pub fn sum_u_pos(&self) -> BigUint {
        self.u.range(1..).map(|(_, v)| v).sum()
    }

    /// `Σ_{i<=0} U_i^n`.
    pub fn sum_u_nonpos(&self) -> BigUint {
        self.u.range(..=0).map(|(_, v)| v).sum()
    }

    /// `n, T_n, sum_U_pos, sum_U_nonpos, min_site`.
    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{}", self.n, self.t_n, self.sum_u_pos(), self.sum_u_nonpos(), self.min_site)
    }

    pub const CSV_HEADER: &'static str = "n,T_n,sum_U_pos,sum_U_nonpos,min_site";
}

/// `T_n = n + 2 Σ_i U_i^n`, checked exactly.
pub fn verify_hitting_identity(w: &WalkOutcome) -> bool {
    w.t_n == BigUint::from(w.n) + w.sum_u() * 2u32
}

/// Converts an aggregate count to a big integer.
pub(crate) fn population_to_big(p: Population) -> BigUint {
    match p {
        Population::Exact(z) => BigUint::from(z),
        Population::Approx { ln } => big_from_ln(ln),
    }
}

/// `round(e^ln)` as a big integer.
pub(crate) fn big_from_ln(ln: f64) -> BigUint {
    if ln < 43.0 {
        return BigUint::from(ln.exp().round() as u64);
    }
    // e^ln = mantissa 2^shift with a 53-bit mantissa
    let shift = (ln / std::f64::consts::LN_2).floor() as u64 - 52;
    let mantissa = (ln - shift as f64 * std::f64::consts::LN_2).exp().round() as u64;
    BigUint::from(mantissa) << shift
}

/// `ln x` for a big integer.
pub(crate) fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().expect("fits").to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("fits") as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn big_to_population(x: &BigUint) -> Population {
    match x.to_u64() {
        Some(v) if v <= crate::branching::POPULATION_CEILING => Population::Exact(v),
        _ => Population::Approx { ln: ln_big(x) },
    }
}

/// Walk parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    pub step_cap: u64,
    pub trap: f64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self { step_cap: DEFAULT_STEP_CAP, trap: DEFAULT_TRAP }
    }
}

/// Walks from 0 until the first visit to `n`.
///
/// `env_seed` keys the site environment; `rng` drives the moves.
pub fn simulate_walk<R: Rng + ?Sized>(
    law: &TailLaw<f64>,
    n: u64,
    env_seed: u64,
    rng: &mut R,
    cfg: WalkConfig,
) -> Result<WalkOutcome> {
    if n == 0 {
        return Err(Error::InvalidArgument("walk level must be at least 1".into()));
    }
    let mut env = SiteEnv::new(law, env_seed);
    let mut u: BTreeMap<i64, BigUint> = BTreeMap::new();
    let mut moves: u64 = 0;
    let mut block_moves = BigUint::zero();
    let mut pos: i64 = 0;
    let mut min_site: i64 = 0;
    let mut approx = false;
    let target = n as i64;

    while pos < target {
        if moves >= cfg.step_cap {
            return Err(Error::StepCapExceeded(cfg.step_cap));
        }
        let xi = env.xi(pos);
        let a = success_prob(xi);
        if a < cfg.trap {
            let g = negbinom(Population::Exact(1), xi, rng);
            approx |= g.is_approx();
            let mut r = population_to_big(g);
            let mut site = pos;
            while !r.is_zero() {
                block_moves += &r * 2u32;
                *u.entry(site).or_default() += &r;
                site -= 1;
                min_site = min_site.min(site);
                let d = negbinom(big_to_population(&r), env.xi(site), rng);
                approx |= d.is_approx() || big_to_population(&r).is_approx();
                r = population_to_big(d);
            }
            moves += 1;
            pos += 1;
        } else {
            moves += 1;
            if open01(rng) < a {
                pos += 1;
            } else {
                *u.entry(pos).or_default() += 1u32;
                pos -= 1;
                min_site = min_site.min(pos);
            }
        }
    }
    Ok(WalkOutcome { n, t_n: block_moves + moves, u, min_site, approx })
}
