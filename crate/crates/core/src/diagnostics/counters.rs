use std::collections::BTreeMap;

use super::InstanceTruth;

/// What the leader had frozen, and what she played, in one round.
#[derive(Debug, Clone, Copy)]
pub struct LeaderRoundView<'a> {
    pub best_set: &'a [usize],
    pub frozen_means: &'a [f64],
    pub frozen_indices: &'a [f64],
    pub played: usize,
}

/// Sizes of the bad-round sets of the regret analysis, plus run bookkeeping.
///
/// With `N(n)` the set in force, `nu` the frozen means, `d` the frozen
/// indices and `M*` the true top arms:
/// * `A`: `N(n) != M*`
/// * `D`: some `k` in `N(n)` has `|nu_k - mu_k| >= delta`
/// * `E`: some `k` in `M*` has `d_k < mu_k`
/// * `G`: `n` in `A` but not in `D` or `E`, and some `k` in `M* \ N(n)` has
///   `|nu_k - mu_k| >= delta`
/// * `C_k`: `n` not in `A` or `D`, and the leader played suboptimal `k`
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundCounters {
    pub tally_a: u64,
    pub tally_d: u64,
    pub tally_e: u64,
    pub tally_g: u64,
    /// Keyed by arm id, suboptimal arms only.
    pub tally_c: BTreeMap<usize, u64>,
    /// `t0` for each suboptimal arm at the horizon of this snapshot.
    pub t0_per_arm: BTreeMap<usize, f64>,
    pub comm_rounds: u64,
    pub init_rounds: u64,
    pub collisions: u64,
}

#[derive(Debug, Clone)]
pub struct BadRoundTracker {
    truth: InstanceTruth,
    tally_a: u64,
    tally_d: u64,
    tally_e: u64,
    tally_g: u64,
    tally_c: Vec<u64>,
    pub comm_rounds: u64,
    pub init_rounds: u64,
    pub collisions: u64,
}

impl BadRoundTracker {
    pub fn new(truth: &InstanceTruth) -> Self {
        Self {
            truth: truth.clone(),
            tally_a: 0,
            tally_d: 0,
            tally_e: 0,
            tally_g: 0,
            tally_c: vec![0; truth.means.num_arms()],
            comm_rounds: 0,
            init_rounds: 0,
            collisions: 0,
        }
    }

    pub fn record(&mut self, view: &LeaderRoundView<'_>) {
        let truth = &self.truth;
        let mu = |k: usize| truth.means.mean(k);
        let off = |k: usize| (view.frozen_means[k - 1] - mu(k)).abs() >= truth.delta;

        let in_a = !view.best_set.iter().all(|&k| truth.is_optimal(k));
        let in_d = view.best_set.iter().any(|&k| off(k));
        let optimal = &truth.ranking[..truth.num_players];
        let in_e = optimal.iter().any(|&k| view.frozen_indices[k - 1] < mu(k));
        let in_g = in_a
            && !in_d
            && !in_e
            && optimal.iter().any(|&k| !view.best_set.contains(&k) && off(k));

        self.tally_a += u64::from(in_a);
        self.tally_d += u64::from(in_d);
        self.tally_e += u64::from(in_e);
        self.tally_g += u64::from(in_g);
        if !in_a && !in_d && !truth.is_optimal(view.played) {
            self.tally_c[view.played - 1] += 1;
        }
    }

    /// Counters as of now, with `t0` evaluated at `horizon`.
    pub fn snapshot(&self, horizon: u64) -> RoundCounters {
        let suboptimal = &self.truth.ranking[self.truth.num_players..];
        RoundCounters {
            tally_a: self.tally_a,
            tally_d: self.tally_d,
            tally_e: self.tally_e,
            tally_g: self.tally_g,
            tally_c: suboptimal.iter().map(|&k| (k, self.tally_c[k - 1])).collect(),
            t0_per_arm: suboptimal.iter().map(|&k| (k, self.truth.t0(k, horizon))).collect(),
            comm_rounds: self.comm_rounds,
            init_rounds: self.init_rounds,
            collisions: self.collisions,
        }
    }
}

/// Tallies the bad-round sets over a sequence of leader rounds.
pub fn count_bad_rounds<'a, I>(views: I, truth: &InstanceTruth, horizon: u64) -> RoundCounters
where
    I: IntoIterator<Item = LeaderRoundView<'a>>,
{
    let mut tracker = BadRoundTracker::new(truth);
    for v in views {
        tracker.record(&v);
    }
    tracker.snapshot(horizon)
}
