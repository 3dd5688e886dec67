//! Random walk in the random environment `A_i`: hitting times, downcrossing
//! counts and the two identities linking them to the branching process.

mod ks;
mod walk;

use num_traits::ToPrimitive;

pub use ks::{kolmogorov_q, ks_two_sample, KsResult};
pub use walk::{
    simulate_walk, verify_hitting_identity, SiteEnv, WalkConfig, WalkOutcome, DEFAULT_STEP_CAP, DEFAULT_TRAP,
};

use crate::asymptotics::replicate::{collect, McConfig};
use crate::branching::{simulate, Mode};
use crate::error::Result;
use crate::heavytail::TailLaw;
use crate::rng::Stream;

/// `Σ_{i=1}^{n} U_i^n` from one walk. The site environment is keyed by a
/// draw from `rng`, so distinct replications see independent environments.
pub fn sample_u_positive_sum(law: &TailLaw<f64>, n: u64, rng: &mut Stream, cfg: WalkConfig) -> Result<f64> {
    use rand::RngCore;
    let env_seed = rng.next_u64();
    let w = simulate_walk(law, n, env_seed, rng, cfg)?;
    Ok(w.sum_u_pos().to_f64().unwrap_or(f64::INFINITY))
}

/// `Σ_{l=0}^{n-1} Z_l` for the size-1 process.
pub fn sample_population_sum(law: &TailLaw<f64>, n: usize, rng: &mut Stream) -> f64 {
    simulate(law, n, Mode::Size1, rng).zs[..n].iter().map(|z| z.to_f64()).sum()
}

/// Two samples of the distributional identity `Σ_{i=1}^n U_i^n =_d Σ_{l<n} Z_l`
/// and their KS comparison. The two sides use disjoint seeds.
pub fn disteq_check(law: &TailLaw<f64>, n: u64, mc: &McConfig, cfg: WalkConfig) -> Result<(Vec<f64>, Vec<f64>, KsResult)> {
    let walks = collect(mc, |rng, _| sample_u_positive_sum(law, n, rng, cfg))?;
    let other = McConfig { seed: mc.seed ^ 0x9e37_79b9_7f4a_7c15, ..*mc };
    let pops = collect(&other, |rng, _| Ok(sample_population_sum(law, n as usize, rng)))?;
    let ks = ks_two_sample(&walks, &pops)?;
    Ok((walks, pops, ks))
}
