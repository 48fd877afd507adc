//! Reference policies: a centralized controller that plays the `M - 1`
//! empirically best arms plus one KL-UCB exploration arm, and an oracle.

use thiserror::Error;

use crate::env::ArmMeans;
use crate::index::{exploration_rate, index_exceeds, klucb_index, ArmStatistics};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaselineError {
    #[error("{plays} plays but {rewards} rewards")]
    RewardCount { plays: usize, rewards: usize },
    #[error("arm {0} played twice in one round")]
    DuplicatePlay(usize),
}

/// One brain controlling all `M` plays; statistics update every round.
#[derive(Debug, Clone)]
pub struct CentralizedState {
    num_players: usize,
    tolerance: f64,
    stats: Vec<ArmStatistics>,
    round_clock: u64,
}

impl CentralizedState {
    pub fn new(num_players: usize, num_arms: usize, tolerance: f64) -> Self {
        Self { num_players, tolerance, stats: vec![ArmStatistics::default(); num_arms], round_clock: 0 }
    }

    pub fn with_stats(num_players: usize, stats: Vec<ArmStatistics>, tolerance: f64) -> Self {
        Self { num_players, tolerance, stats, round_clock: 0 }
    }

    pub fn stats(&self) -> &[ArmStatistics] {
        &self.stats
    }

    pub fn round_clock(&self) -> u64 {
        self.round_clock
    }

    /// The `M - 1` arms with the largest empirical means plus the arm of
    /// largest KL-UCB index among the rest. Ties go to the lowest index.
    /// The greedy arms come first, the exploration arm last.
    pub fn select(&self, t: u64) -> Vec<usize> {
        let k = self.stats.len();
        let mut order: Vec<usize> = (1..=k).collect();
        order.sort_by(|&a, &b| {
            let (ma, mb) = (self.stats[a - 1].mean_estimate(), self.stats[b - 1].mean_estimate());
            mb.total_cmp(&ma).then(a.cmp(&b))
        });
        let mut plays = order[..self.num_players - 1].to_vec();
        let f = exploration_rate(t);
        let mut best: Option<(usize, f64)> = None;
        for arm in 1..=k {
            if plays.contains(&arm) {
                continue;
            }
            let s = &self.stats[arm - 1];
            match best {
                Some((_, b)) if !index_exceeds(s, f, self.tolerance, b) => {}
                _ => best = Some((arm, klucb_index(s, f, self.tolerance))),
            }
        }
        plays.push(best.expect("M < K leaves an arm to explore").0);
        plays
    }

    /// Records one round: `rewards[i]` is the reward of `plays[i]`.
    pub fn update(&mut self, plays: &[usize], rewards: &[u8]) -> Result<(), BaselineError> {
        if plays.len() != rewards.len() {
            return Err(BaselineError::RewardCount { plays: plays.len(), rewards: rewards.len() });
        }
        for (i, a) in plays.iter().enumerate() {
            if plays[..i].contains(a) {
                return Err(BaselineError::DuplicatePlay(*a));
            }
        }
        for (&arm, &r) in plays.iter().zip(rewards) {
            self.stats[arm - 1].record(r);
        }
        self.round_clock += 1;
        Ok(())
    }
}

/// The true `M` best arms, ascending by arm index.
pub fn oracle_select(means: &ArmMeans, num_players: usize) -> Vec<usize> {
    let mut top = means.ranking()[..num_players].to_vec();
    top.sort_unstable();
    top
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(pulls: u64, sum: u64) -> ArmStatistics {
        ArmStatistics { pulls, reward_sum: sum }
    }

    #[test]
    fn first_round_plays_lowest_arms() {
        let c = CentralizedState::new(3, 6, 1e-9);
        assert_eq!(c.select(1), vec![1, 2, 3]);
    }

    #[test]
    fn greedy_plus_index_argmax() {
        // arm 3 best empirically; arm 7 has few pulls so the largest index
        let mut stats = vec![st(500, 200); 8];
        stats[2] = st(500, 450);
        stats[6] = st(3, 1);
        let c = CentralizedState::with_stats(2, stats.clone(), 1e-9);
        let f = exploration_rate(1000);
        let idx: Vec<f64> = stats.iter().map(|s| klucb_index(s, f, 1e-9)).collect();
        let rest_best = (1..=8).filter(|&a| a != 3).max_by(|&a, &b| idx[a - 1].total_cmp(&idx[b - 1])).unwrap();
        assert_eq!(rest_best, 7);
        assert_eq!(c.select(1000), vec![3, 7]);
    }

    #[test]
    fn single_player_is_plain_klucb() {
        let stats = vec![st(100, 60), st(10, 5), st(100, 40)];
        let c = CentralizedState::with_stats(1, stats.clone(), 1e-9);
        let f = exploration_rate(500);
        let idx: Vec<f64> = stats.iter().map(|s| klucb_index(s, f, 1e-9)).collect();
        let argmax = 1 + (0..3).max_by(|&a, &b| idx[a].total_cmp(&idx[b])).unwrap();
        assert_eq!(c.select(500), vec![argmax]);
    }

    #[test]
    fn update_counts_rewards() {
        let mut c = CentralizedState::new(2, 4, 1e-9);
        c.update(&[1, 2], &[1, 0]).unwrap();
        assert_eq!(c.stats()[0], st(1, 1));
        assert_eq!(c.stats()[1], st(1, 0));
        assert_eq!(c.update(&[1, 2], &[1]), Err(BaselineError::RewardCount { plays: 2, rewards: 1 }));
        assert_eq!(c.update(&[2, 2], &[1, 1]), Err(BaselineError::DuplicatePlay(2)));
        assert_eq!(c.round_clock(), 1);
    }

    #[test]
    fn oracle_picks_true_top() {
        let m = |v: &[f64]| ArmMeans::new(v.to_vec()).unwrap();
        assert_eq!(oracle_select(&m(&[0.9, 0.8, 0.7]), 2), vec![1, 2]);
        assert_eq!(oracle_select(&m(&[0.7, 0.9, 0.8]), 2), vec![2, 3]);
        assert_eq!(oracle_select(&m(&[0.3, 0.1, 0.5, 0.4]), 3), vec![1, 3, 4]);
    }
}
