//! Ground-truth measurements: regret, the regret lower-bound constant, the
//! bad-round counters used by the regret analysis, and numeric checks of
//! the concentration lemmas.

mod counters;
mod lemmas;
mod regret;

pub use counters::{count_bad_rounds, BadRoundTracker, LeaderRoundView, RoundCounters};
pub use lemmas::{
    lemma1_monte_carlo, lemma2_constant, ConcentrationExperiment, Lemma1Estimate, Lemma2Value, LemmaError,
    LEMMA2_BOUND, MIN_LEMMA1_TRIALS, MIN_LEMMA2_TRUNCATION,
};
pub use regret::{regret_accumulate, RegretAccumulator, RegretPoint};

use crate::env::ArmMeans;
use crate::index::kl;

/// Everything the diagnostics need to know about an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceTruth {
    pub means: ArmMeans,
    pub num_players: usize,
    /// Means in decreasing order.
    pub sorted_means: Vec<f64>,
    /// `ranking[j]` is the arm with the `(j+1)`-th largest mean.
    pub ranking: Vec<usize>,
    /// `rank_of[arm - 1]` is the 1-based position of `arm` in `ranking`.
    pub rank_of: Vec<usize>,
    /// Half the smallest gap between consecutive sorted means.
    pub min_half_gap: f64,
    pub delta: f64,
    pub lower_bound_constant: f64,
}

impl InstanceTruth {
    /// Uses `delta = min_half_gap / 2`.
    pub fn new(means: &ArmMeans, num_players: usize) -> Self {
        let ranking = means.ranking();
        let sorted_means: Vec<f64> = ranking.iter().map(|&a| means.mean(a)).collect();
        let mut rank_of = vec![0; ranking.len()];
        for (j, &a) in ranking.iter().enumerate() {
            rank_of[a - 1] = j + 1;
        }
        let min_half_gap = sorted_means
            .windows(2)
            .map(|w| (w[0] - w[1]) / 2.0)
            .fold(f64::INFINITY, f64::min);
        Self {
            means: means.clone(),
            num_players,
            sorted_means,
            ranking,
            rank_of,
            min_half_gap,
            delta: min_half_gap / 2.0,
            lower_bound_constant: lower_bound_constant(means, num_players),
        }
    }

    pub fn is_optimal(&self, arm: usize) -> bool {
        self.rank_of[arm - 1] <= self.num_players
    }

    /// `mu_M`, the smallest optimal mean.
    pub fn boundary_mean(&self) -> f64 {
        self.sorted_means[self.num_players - 1]
    }

    /// `t0 = (ln T + 4 ln ln T) / kl(mu_k + delta, mu_M - delta)` for a suboptimal arm.
    pub fn t0(&self, arm: usize, horizon: u64) -> f64 {
        let t = horizon as f64;
        let f = t.ln() + 4.0 * t.ln().ln();
        f / kl(self.means.mean(arm) + self.delta, self.boundary_mean() - self.delta)
    }

    /// Upper bound on the expected size of `C_k` at horizon `T`.
    pub fn lemma4_bound(&self, arm: usize, horizon: u64) -> f64 {
        self.t0(arm, horizon) + 4.0 + 2.0 / (self.delta * self.delta)
    }
}

/// `C(mu) = sum over suboptimal k of (mu_M - mu_k) / kl(mu_k, mu_M)`.
///
/// # Panics
/// If `num_players` is not in `1..K`.
pub fn lower_bound_constant(means: &ArmMeans, num_players: usize) -> f64 {
    assert!(num_players >= 1 && num_players < means.num_arms());
    let ranking = means.ranking();
    let boundary = means.mean(ranking[num_players - 1]);
    ranking[num_players..]
        .iter()
        .map(|&a| {
            let mu = means.mean(a);
            (boundary - mu) / kl(mu, boundary)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn means(v: &[f64]) -> ArmMeans {
        ArmMeans::new(v.to_vec()).unwrap()
    }

    #[test]
    fn lower_bound_examples() {
        assert!((lower_bound_constant(&means(&[0.9, 0.8, 0.7]), 2) - 3.550_183_563_545_610_7).abs() < 1e-12);
        let six = means(&[0.9, 0.8, 0.7, 0.6, 0.5, 0.4]);
        assert!((lower_bound_constant(&six, 3) - 8.284_572_653_929_994).abs() < 1e-12);
        // single suboptimal arm
        let one = lower_bound_constant(&six, 5);
        assert!((one - (0.5 - 0.4) / kl(0.4, 0.5)).abs() < 1e-15);
        // order-free
        let shuffled = means(&[0.4, 0.7, 0.9, 0.5, 0.8, 0.6]);
        assert!((lower_bound_constant(&shuffled, 3) - lower_bound_constant(&six, 3)).abs() < 1e-12);
    }

    #[test]
    fn truth_fields() {
        let t = InstanceTruth::new(&means(&[0.7, 0.9, 0.8, 0.4]), 2);
        assert_eq!(t.ranking, vec![2, 3, 1, 4]);
        assert_eq!(t.rank_of, vec![3, 1, 2, 4]);
        assert!((t.min_half_gap - 0.05).abs() < 1e-12);
        assert!(t.delta > 0.0 && t.delta < t.min_half_gap);
        assert!(t.is_optimal(2) && t.is_optimal(3) && !t.is_optimal(1));
        assert_eq!(t.boundary_mean(), 0.8);
    }
}
