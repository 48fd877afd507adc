use std::collections::VecDeque;

use rand::Rng;

use super::comm::{comm_schedule, slot_of, CommPlan};
use super::{OrderedBestSet, ProtocolError, Swap};
use crate::env::Feedback;
use crate::index::{exploration_rate, klucb_index, ArmStatistics};
use crate::rng::Stream;

/// The leader keeps all statistics, explores, and announces set changes.
///
/// Rounds are counted from 1 at the first round after initialization.
/// Decisions inside a block of `M` rounds use values frozen at the block
/// boundary `t = 0 (mod M)`.
#[derive(Debug, Clone)]
pub struct LeaderState {
    num_players: usize,
    num_arms: usize,
    tolerance: f64,
    stats: Vec<ArmStatistics>,
    frozen_means: Vec<f64>,
    frozen_indices: Vec<f64>,
    best_set: OrderedBestSet,
    candidates: Vec<usize>,
    comm: Option<CommPlan>,
    queued: VecDeque<Swap>,
    round_clock: u64,
    played: Option<usize>,
    phases: u64,
    set_changes: u64,
}

impl LeaderState {
    pub fn new(num_players: usize, num_arms: usize, tolerance: f64) -> Self {
        let mut s = Self {
            num_players,
            num_arms,
            tolerance,
            stats: vec![ArmStatistics::default(); num_arms],
            frozen_means: vec![0.0; num_arms],
            frozen_indices: vec![0.0; num_arms],
            best_set: OrderedBestSet::initial(num_players),
            candidates: Vec::new(),
            comm: None,
            queued: VecDeque::new(),
            round_clock: 0,
            played: None,
            phases: 0,
            set_changes: 0,
        };
        s.refresh_pivot();
        s
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn stats(&self) -> &[ArmStatistics] {
        &self.stats
    }

    pub fn frozen_means(&self) -> &[f64] {
        &self.frozen_means
    }

    pub fn frozen_indices(&self) -> &[f64] {
        &self.frozen_indices
    }

    pub fn best_set(&self) -> &OrderedBestSet {
        &self.best_set
    }

    /// Exploration candidates `B(t)`, ascending.
    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn comm(&self) -> Option<&CommPlan> {
        self.comm.as_ref()
    }

    /// Whether round `t` belongs to a communication phase.
    pub fn communicating_at(&self, t: u64) -> bool {
        self.comm.as_ref().is_some_and(|c| c.contains(t))
    }

    pub fn round_clock(&self) -> u64 {
        self.round_clock
    }

    /// Arm played in the current round.
    pub fn played(&self) -> Option<usize> {
        self.played
    }

    /// Communication phases started so far.
    pub fn phases(&self) -> u64 {
        self.phases
    }

    /// Block updates that changed the best set.
    pub fn set_changes(&self) -> u64 {
        self.set_changes
    }

    fn refresh_pivot(&mut self) {
        self.best_set.update_pivot(&self.frozen_means);
        let threshold = self.frozen_means[self.best_set.pivot_arm() - 1];
        let set = &self.best_set;
        let indices = &self.frozen_indices;
        self.candidates.clear();
        self.candidates
            .extend((1..=self.num_arms).filter(|&k| !set.contains(k) && indices[k - 1] >= threshold));
    }

    /// Block-boundary update: freezes means and indices, recomputes the best
    /// set with incumbent hysteresis and returns the slot replacements, in
    /// ascending slot order.
    pub fn block_update(&mut self, t: u64) -> Result<Vec<Swap>, ProtocolError> {
        if !t.is_multiple_of(self.num_players as u64) || self.comm.is_some() || !self.queued.is_empty() {
            return Err(ProtocolError::OffSchedule { round: t });
        }
        let f = exploration_rate(t);
        for (k, s) in self.stats.iter().enumerate() {
            self.frozen_means[k] = s.mean_estimate();
            self.frozen_indices[k] = klucb_index(s, f, self.tolerance);
        }
        let swaps = best_set_changes(&self.best_set, &self.frozen_means);
        if swaps.is_empty() {
            self.refresh_pivot();
        }
        Ok(swaps)
    }

    fn start_next_phase(&mut self, t: u64) -> Result<(), ProtocolError> {
        while let Some(swap) = self.queued.pop_front() {
            let plan = comm_schedule(self.num_players, self.num_arms, t, swap)?;
            if plan.is_empty() {
                // nobody to tell
                self.best_set.apply(swap)?;
                continue;
            }
            self.phases += 1;
            self.comm = Some(plan);
            return Ok(());
        }
        self.refresh_pivot();
        Ok(())
    }

    pub fn select(&mut self, t: u64, rng: &mut Stream) -> Result<usize, ProtocolError> {
        self.round_clock = t;
        if let Some(plan) = &self.comm {
            if t > plan.end() {
                let swap = plan.swap;
                self.comm = None;
                self.best_set.apply(swap)?;
                self.start_next_phase(t)?;
            }
        }
        if self.comm.is_none() && t.is_multiple_of(self.num_players as u64) {
            let swaps = self.block_update(t)?;
            if !swaps.is_empty() {
                self.set_changes += 1;
                self.queued.extend(swaps);
                self.start_next_phase(t)?;
            }
        }
        let arm = match &self.comm {
            Some(plan) => plan.leader_arm(t, &self.best_set),
            None => self.explore_select(t, rng),
        };
        self.played = Some(arm);
        Ok(arm)
    }

    fn explore_select(&self, t: u64, rng: &mut Stream) -> usize {
        let slot = slot_of(t, 1, self.num_players);
        let arm = self.best_set.arm_at(slot);
        if self.candidates.is_empty() || slot != self.best_set.pivot_slot() {
            return arm;
        }
        if rng.random::<bool>() {
            arm
        } else {
            self.candidates[rng.random_range(0..self.candidates.len())]
        }
    }

    pub fn observe(&mut self, t: u64, feedback: &Feedback) {
        if self.communicating_at(t) {
            return;
        }
        if let (Some(arm), Some(r)) = (self.played, feedback.reward) {
            self.stats[arm - 1].record(r);
        }
    }
}

/// Slot replacements that turn `current` into the `M` best arms by `means`.
///
/// An incumbent leaves only if strictly beaten: arms are ranked by mean,
/// then incumbents first, then lowest index. Entering arms are assigned to
/// vacated slots in ascending order, best entrant first.
pub fn best_set_changes(current: &OrderedBestSet, means: &[f64]) -> Vec<Swap> {
    let m = current.len();
    let mut order: Vec<usize> = (1..=means.len()).collect();
    order.sort_by(|&a, &b| {
        means[b - 1]
            .total_cmp(&means[a - 1])
            .then_with(|| current.contains(b).cmp(&current.contains(a)))
            .then_with(|| a.cmp(&b))
    });
    let top = &order[..m];
    let entering: Vec<usize> = top.iter().copied().filter(|&a| !current.contains(a)).collect();
    let leaving = (1..=m).filter(|&s| !top.contains(&current.arm_at(s)));
    leaving
        .zip(entering)
        .map(|(leaving_slot, entering_arm)| Swap { leaving_slot, entering_arm })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn leader_with(means: &[(u64, u64)], m: usize) -> LeaderState {
        let mut s = LeaderState::new(m, means.len(), 1e-9);
        for (k, &(pulls, sum)) in means.iter().enumerate() {
            s.stats[k] = ArmStatistics { pulls, reward_sum: sum };
        }
        s
    }

    #[test]
    fn first_update_without_data_keeps_convention() {
        let mut s = LeaderState::new(3, 6, 1e-9);
        assert!(s.block_update(3).unwrap().is_empty());
        assert!(s.frozen_indices().iter().all(|&d| d == 1.0));
        assert_eq!(s.best_set().slots(), &[1, 2, 3]);
        assert_eq!(s.candidates(), &[4, 5, 6]);
    }

    #[test]
    fn no_candidates_when_outside_indices_are_low() {
        // well-sampled outside arms with low means
        let mut s = leader_with(&[(1000, 900), (1000, 800), (1000, 700), (1000, 300), (1000, 200)], 3);
        assert!(s.block_update(30).unwrap().is_empty());
        assert!(s.candidates().is_empty());
        assert_eq!(s.best_set().pivot_arm(), 3);
    }

    #[test]
    fn strict_improvement_swaps_in_place() {
        let mut s = leader_with(&[(100, 90), (100, 50), (100, 70), (100, 10), (100, 60)], 3);
        let swaps = s.block_update(3).unwrap();
        assert_eq!(swaps, vec![Swap { leaving_slot: 2, entering_arm: 5 }]);
    }

    #[test]
    fn ties_keep_incumbents() {
        let cur = OrderedBestSet::from_slots(vec![1, 2]);
        assert!(best_set_changes(&cur, &[0.5, 0.4, 0.4, 0.4]).is_empty());
        let swaps = best_set_changes(&cur, &[0.5, 0.4, 0.6, 0.6]);
        assert_eq!(
            swaps,
            vec![Swap { leaving_slot: 1, entering_arm: 3 }, Swap { leaving_slot: 2, entering_arm: 4 }]
        );
    }

    #[test]
    fn update_off_boundary_is_rejected() {
        let mut s = LeaderState::new(3, 5, 1e-9);
        assert_eq!(s.block_update(4), Err(ProtocolError::OffSchedule { round: 4 }));
    }

    #[test]
    fn deterministic_outside_pivot_slot() {
        let mut s = leader_with(&[(10, 9), (10, 8), (10, 1), (0, 0)], 3);
        s.block_update(3).unwrap();
        assert_eq!(s.best_set().pivot_arm(), 3);
        assert_eq!(s.candidates(), &[4]);
        let mut r = rng::stream(1, 1);
        // t = 3: slot 2 is arm 2
        assert_eq!(s.select(3, &mut r).unwrap(), 2);
        // t = 4: slot 3 is the pivot, so the coin decides
        let mut seen = [0usize; 5];
        for _ in 0..200 {
            seen[s.explore_select(4, &mut r)] += 1;
        }
        assert!(seen[3] > 0 && seen[4] > 0);
        assert_eq!(seen[3] + seen[4], 200);
    }

    #[test]
    fn pivot_without_candidates_is_played() {
        let mut s = leader_with(&[(1000, 900), (1000, 800), (1000, 700), (1000, 100)], 3);
        s.block_update(3).unwrap();
        assert!(s.candidates().is_empty());
        let mut r = rng::stream(1, 1);
        assert!((0..100).all(|_| s.explore_select(4, &mut r) == 3));
    }

    #[test]
    fn fair_coin_on_pivot_slot() {
        let mut s = leader_with(&[(10, 9), (10, 8), (10, 1), (0, 0), (0, 0), (0, 0), (0, 0)], 3);
        s.block_update(3).unwrap();
        s.candidates = vec![7];
        let mut r = rng::stream(5, 1);
        let n = 10_000;
        let pivots = (0..n).filter(|_| s.explore_select(4, &mut r) == 3).count();
        let freq = pivots as f64 / n as f64;
        assert!((0.48..=0.52).contains(&freq), "{freq}");
    }

    #[test]
    fn observe_counts_clean_rewards() {
        let mut s = LeaderState::new(2, 4, 1e-9);
        let mut r = rng::stream(1, 1);
        s.played = Some(4);
        s.observe(1, &Feedback::reward(1));
        assert_eq!(s.stats()[3], ArmStatistics { pulls: 1, reward_sum: 1 });
        s.observe(2, &Feedback::collided());
        assert_eq!(s.stats()[3].pulls, 1);
        // force a phase and check rewards are discarded
        s.stats[2] = ArmStatistics { pulls: 5, reward_sum: 5 };
        let arm = s.select(2, &mut r).unwrap();
        assert!(s.communicating_at(2));
        let before = s.stats().to_vec();
        s.observe(2, &Feedback::reward(1));
        assert_eq!(s.stats(), &before[..]);
        assert_eq!(s.best_set().slots(), &[1, 2]);
        let _ = arm;
    }
}
