use super::InstanceTruth;
use crate::env::RoundLog;

/// Cumulative pseudo-regret after some number of rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretPoint {
    pub round: u64,
    /// Collided plays earn nothing.
    pub zeroed: f64,
    /// Every play earns its arm's mean, collided or not.
    pub literal: f64,
}

/// Streaming regret from per-arm play counts.
///
/// With `c_k` the plays of arm `k` that count and `D` the number of optimal
/// plays missed beyond those taken by suboptimal arms,
/// `R = sum_top (mu_k - mu_M)(T - c_k) + mu_M D + sum_rest (mu_M - mu_k) c_k`.
/// Every term is nonnegative for the zeroed metric, and the oracle scores
/// exactly zero.
#[derive(Debug, Clone)]
pub struct RegretAccumulator {
    means: Vec<f64>,
    optimal: Vec<bool>,
    boundary: f64,
    rounds: u64,
    clean_plays: Vec<u64>,
    all_plays: Vec<u64>,
}

impl RegretAccumulator {
    pub fn new(truth: &InstanceTruth) -> Self {
        let k = truth.means.num_arms();
        Self {
            means: truth.means.as_slice().to_vec(),
            optimal: (1..=k).map(|a| truth.is_optimal(a)).collect(),
            boundary: truth.boundary_mean(),
            rounds: 0,
            clean_plays: vec![0; k],
            all_plays: vec![0; k],
        }
    }

    pub fn record(&mut self, log: &RoundLog) {
        self.rounds += 1;
        for &arm in &log.selections {
            self.all_plays[arm - 1] += 1;
            if !log.is_collided(arm) {
                self.clean_plays[arm - 1] += 1;
            }
        }
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    fn evaluate(&self, plays: &[u64]) -> f64 {
        let t = self.rounds as i128;
        let mut missed: i128 = 0;
        let mut regret = 0.0;
        for (k, &c) in plays.iter().enumerate() {
            let c = c as i128;
            let mu = self.means[k];
            if self.optimal[k] {
                missed += t - c;
                regret += (mu - self.boundary) * (t - c) as f64;
            } else {
                missed -= c;
                regret += (self.boundary - mu) * c as f64;
            }
        }
        regret + self.boundary * missed as f64
    }

    pub fn zeroed(&self) -> f64 {
        self.evaluate(&self.clean_plays)
    }

    pub fn literal(&self) -> f64 {
        self.evaluate(&self.all_plays)
    }

    pub fn point(&self) -> RegretPoint {
        RegretPoint { round: self.rounds, zeroed: self.zeroed(), literal: self.literal() }
    }
}

/// Cumulative regret after every round of `trace`.
pub fn regret_accumulate<'a, I>(trace: I, truth: &InstanceTruth) -> Vec<RegretPoint>
where
    I: IntoIterator<Item = &'a RoundLog>,
{
    let mut acc = RegretAccumulator::new(truth);
    trace
        .into_iter()
        .map(|log| {
            acc.record(log);
            acc.point()
        })
        .collect()
}
