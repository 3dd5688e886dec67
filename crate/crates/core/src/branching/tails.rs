//! Conditional tails of geometric and negative-binomial sums.

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::scalar::Real;

fn check_prob<T: Real>(a: T) -> Result<()> {
    if a > T::zero() && a < T::one() {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange(a.to_f64_lossy()))
    }
}

/// `P(B > m | A) = (1 - A)^{m+1}` for `B` geometric on `{0, 1, ...}`.
pub fn geometric_tail<T: Real>(a: T, m: i64) -> Result<T> {
    check_prob(a)?;
    if m < -1 {
        return Err(Error::InvalidArgument(format!("geometric tail needs m >= -1, got {m}")));
    }
    let e = T::from_i64(m + 1).expect("exponent");
    Ok((e * (-a).ln_1p()).exp())
}

/// `P(B_1 + ... + B_k > m | A) = Σ_{j<k} C(m+k, j) A^j (1-A)^{m+k-j}`.
///
/// Terms are built by their ratio in log space and summed with Neumaier
/// compensation, so no binomial coefficient is ever formed.
pub fn negbinom_tail<T: Real>(k: u64, m: u64, a: T) -> Result<T> {
    check_prob(a)?;
    if k == 0 {
        return Err(Error::InvalidArgument("negative-binomial tail needs k >= 1".into()));
    }
    let n = m + k;
    let nt = T::from_u64(n).expect("count");
    let ln_a = a.ln();
    let ln_b = (-a).ln_1p();
    let mut log_term = nt * ln_b;
    let mut acc = NeumaierSum::new();
    for j in 0..k {
        if j > 0 {
            let jt = T::from_u64(j).expect("count");
            log_term = log_term + (nt - jt + T::one()).ln() - jt.ln() + ln_a - ln_b;
        }
        acc.add(log_term.exp());
    }
    Ok(acc.value().min(T::one()).max(T::zero()))
}

/// `P(B_1 + ... + B_k = j | A) = C(j+k-1, k-1) A^k (1-A)^j`.
pub fn negbinom_pmf<T: Real>(k: u64, j: u64, a: T) -> Result<T> {
    check_prob(a)?;
    if k == 0 {
        return Ok(if j == 0 { T::one() } else { T::zero() });
    }
    let lc = ln_choose(j + k - 1, k - 1);
    let (kt, jt) = (T::from_u64(k).expect("count"), T::from_u64(j).expect("count"));
    Ok((T::lit(lc) + kt * a.ln() + jt * (-a).ln_1p()).exp())
}

fn ln_choose(n: u64, r: u64) -> f64 {
    let r = r.min(n - r);
    (0..r).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}
