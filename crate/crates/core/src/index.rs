//! Bernoulli KL divergence, the exploration rate and the KL-UCB index.

use thiserror::Error;

/// Default bisection tolerance for [`klucb_index`].
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Hard cap on bisection steps.
pub const MAX_BISECTION_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("probability {0} outside [0,1]")]
pub struct DomainError(pub f64);

/// Per-arm sample statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArmStatistics {
    pub pulls: u64,
    pub reward_sum: u64,
}

impl ArmStatistics {
    pub fn record(&mut self, reward: u8) {
        self.pulls += 1;
        self.reward_sum += u64::from(reward);
    }

    /// Empirical mean, `0` for an unplayed arm.
    pub fn mean_estimate(&self) -> f64 {
        if self.pulls == 0 {
            0.0
        } else {
            self.reward_sum as f64 / self.pulls as f64
        }
    }
}

/// `kl(p, q)` between Bernoulli(p) and Bernoulli(q).
///
/// Uses `0 ln 0 = 0`; returns `f64::INFINITY` when `q` is 0 or 1 and `p != q`.
pub fn kl_bernoulli(p: f64, q: f64) -> Result<f64, DomainError> {
    for x in [p, q] {
        if !(0.0..=1.0).contains(&x) {
            return Err(DomainError(x));
        }
    }
    Ok(kl(p, q))
}

pub(crate) fn kl(p: f64, q: f64) -> f64 {
    if p == q {
        return 0.0;
    }
    if q <= 0.0 || q >= 1.0 {
        return f64::INFINITY;
    }
    let mut d = 0.0;
    if p > 0.0 {
        d += p * (p / q).ln();
    }
    if p < 1.0 {
        d += (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
    }
    d.max(0.0)
}

/// `f(t) = ln t + 4 ln ln t`, clamped to zero and defined as zero for `t <= e`.
pub fn exploration_rate(t: u64) -> f64 {
    let t = t as f64;
    if t <= std::f64::consts::E {
        return 0.0;
    }
    let l = t.ln();
    (l + 4.0 * l.ln()).max(0.0)
}

/// KL-UCB upper confidence index: the largest `q` in `[mean, 1]` with
/// `pulls * kl(mean, q) <= f_value`, found by bisection.
///
/// The returned value always satisfies the constraint and lies within
/// `tolerance` of the supremum.
pub fn klucb_index(stats: &ArmStatistics, f_value: f64, tolerance: f64) -> f64 {
    if stats.pulls == 0 {
        return 1.0;
    }
    let mean = stats.mean_estimate();
    if mean >= 1.0 {
        return 1.0;
    }
    let budget = f_value.max(0.0) / stats.pulls as f64;
    // Pinsker: kl(p, q) >= 2 (p - q)^2, so nothing beyond this is feasible.
    let pinsker = mean + (budget / 2.0).sqrt();
    let mut lo = mean;
    let mut hi = pinsker.min(1.0);
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= tolerance {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if kl(mean, mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Whether the index of `stats` is strictly above `threshold`, decided
/// without bisecting whenever possible. Agrees exactly with
/// `klucb_index(stats, f, tol) > threshold`.
pub fn index_exceeds(stats: &ArmStatistics, f_value: f64, tolerance: f64, threshold: f64) -> bool {
    if stats.pulls > 0 {
        let mean = stats.mean_estimate();
        if threshold > mean && threshold < 1.0 {
            // the true supremum is below the threshold, and the bisected value is below that
            if stats.pulls as f64 * kl(mean, threshold) > f_value.max(0.0) {
                return false;
            }
        }
    }
    klucb_index(stats, f_value, tolerance) > threshold
}
