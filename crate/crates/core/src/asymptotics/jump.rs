//! Detector for a single atypical environment.

use crate::branching::Trajectory;
use crate::error::Result;

/// Smallest `k` with
/// `Z_k <= c`, `xi_k > ln m + (a + eps)(n - k)` and, for every
/// `j ∈ [k+1, n-1]`, `|S_{j,n-1} - (n-j) E xi| <= c + eps (n-j)`.
///
/// `mean` is `E xi = -a`.
pub fn detect_single_big_jump(traj: &Trajectory, mean: f64, m: f64, c: f64, eps: f64) -> Result<Option<usize>> {
    let n = traj.len();
    let a = -mean;
    let ln_m = m.ln();
    'k: for k in 0..n {
        if !(traj.zs[k].to_f64() <= c) {
            continue;
        }
        if traj.env.xi(k) <= ln_m + (a + eps) * (n - k) as f64 {
            continue;
        }
        for j in k + 1..n {
            if !traj.env.lln_corridor_ok(mean, c, eps, j, n - 1)? {
                continue 'k;
            }
        }
        return Ok(Some(k));
    }
    Ok(None)
}
