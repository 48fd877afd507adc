//! Decentralized parsimonious exploration: per-player agents.
//!
//! Each player runs a [`DpeAgent`]. It starts in initialization; once its
//! rank is known it becomes the leader (rank 1) or a follower. Agents see
//! nothing but their own [`Feedback`]; the only channel between them is the
//! collisions they cause.

mod comm;
mod follower;
mod leader;

pub use comm::{comm_schedule, slot_of, CommPlan, MessageDecoder};
pub use follower::FollowerState;
pub use leader::LeaderState;

use thiserror::Error;

use crate::env::Feedback;
use crate::init::{InitError, InitOutcome, InitPhase, InitState};
use crate::rng::Stream;

/// Replacement of the arm in `leaving_slot` by `entering_arm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Swap {
    pub leaving_slot: usize,
    pub entering_arm: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Slot,
    Arm,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("malformed {window:?} message: {collisions} collisions in window")]
    MalformedMessage { window: Window, collisions: usize },
    #[error("unexpected collision at exploration round {round}")]
    UnexpectedCollision { round: u64 },
    #[error("invalid swap {0:?}")]
    InvalidSwap(Swap),
    #[error("block update at round {round} is off schedule")]
    OffSchedule { round: u64 },
    #[error("initialization: {0}")]
    Init(#[from] InitError),
}

/// The ordered best set: `M` distinct arms, one per slot.
///
/// Slot order never follows the empirical ranking; an entering arm takes over
/// the slot of the arm it replaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedBestSet {
    slots: Vec<usize>,
    pivot_slot: usize,
}

impl OrderedBestSet {
    /// The convention set `(1, 2, ..., M)` with the pivot in slot 1.
    pub fn initial(num_players: usize) -> Self {
        Self { slots: (1..=num_players).collect(), pivot_slot: 1 }
    }

    pub fn from_slots(slots: Vec<usize>) -> Self {
        Self { slots, pivot_slot: 1 }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Arm held in `slot` (1-based).
    pub fn arm_at(&self, slot: usize) -> usize {
        self.slots[slot - 1]
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.slots.contains(&arm)
    }

    pub fn slot_of_arm(&self, arm: usize) -> Option<usize> {
        self.slots.iter().position(|&a| a == arm).map(|i| i + 1)
    }

    pub fn pivot_slot(&self) -> usize {
        self.pivot_slot
    }

    pub fn pivot_arm(&self) -> usize {
        self.arm_at(self.pivot_slot)
    }

    pub fn apply(&mut self, swap: Swap) -> Result<(), ProtocolError> {
        if swap.leaving_slot == 0 || swap.leaving_slot > self.slots.len() || self.contains(swap.entering_arm) {
            return Err(ProtocolError::InvalidSwap(swap));
        }
        self.slots[swap.leaving_slot - 1] = swap.entering_arm;
        Ok(())
    }

    /// Points the pivot at the member with the smallest mean
    /// (`means[arm - 1]`), ties broken by lowest arm index.
    pub fn update_pivot(&mut self, means: &[f64]) {
        let mut best = 0;
        for (i, &arm) in self.slots.iter().enumerate() {
            let cur = self.slots[best];
            let (m, mb) = (means[arm - 1], means[cur - 1]);
            if m < mb || (m == mb && arm < cur) {
                best = i;
            }
        }
        self.pivot_slot = best + 1;
    }

    /// Same members, regardless of order.
    pub fn same_members(&self, arms: &[usize]) -> bool {
        self.slots.len() == arms.len() && arms.iter().all(|a| self.contains(*a))
    }
}

/// Read-only view of an agent, for instrumentation.
#[derive(Debug, Clone, Copy)]
pub enum Role<'a> {
    Initializing(&'a InitState),
    Leader(&'a LeaderState),
    Follower(&'a FollowerState),
}

#[derive(Debug, Clone)]
enum Stage {
    Init(InitState),
    Leader(LeaderState),
    Follower(FollowerState),
}

/// One player. Exposes only `select` and `observe` to the round loop.
#[derive(Debug, Clone)]
pub struct DpeAgent {
    num_arms: usize,
    tolerance: f64,
    stage: Stage,
    /// Absolute round of the last initialization round.
    clock_offset: u64,
    init_outcome: Option<InitOutcome>,
}

impl DpeAgent {
    pub fn new(num_arms: usize, tolerance: f64) -> Self {
        Self {
            num_arms,
            tolerance,
            stage: Stage::Init(InitState::new(num_arms)),
            clock_offset: 0,
            init_outcome: None,
        }
    }

    /// Chooses this player's arm for absolute round `t`.
    pub fn select(&mut self, t: u64, rng: &mut Stream) -> Result<usize, ProtocolError> {
        let local = t - self.clock_offset;
        match &mut self.stage {
            Stage::Init(s) => Ok(s.select(rng)?),
            Stage::Leader(s) => s.select(local, rng),
            Stage::Follower(s) => Ok(s.select(local)),
        }
    }

    pub fn observe(&mut self, t: u64, feedback: &Feedback) -> Result<(), ProtocolError> {
        let local = t - self.clock_offset;
        match &mut self.stage {
            Stage::Init(s) => {
                s.observe(feedback.collision)?;
                if s.phase() == InitPhase::Done {
                    let out = s.result()?;
                    self.init_outcome = Some(out);
                    self.clock_offset = t;
                    self.stage = if out.rank == 1 {
                        Stage::Leader(LeaderState::new(out.num_players, self.num_arms, self.tolerance))
                    } else {
                        Stage::Follower(FollowerState::new(out.rank, out.num_players, self.num_arms))
                    };
                }
                Ok(())
            }
            Stage::Leader(s) => {
                s.observe(local, feedback);
                Ok(())
            }
            Stage::Follower(s) => s.observe(local, feedback),
        }
    }

    pub fn role(&self) -> Role<'_> {
        match &self.stage {
            Stage::Init(s) => Role::Initializing(s),
            Stage::Leader(s) => Role::Leader(s),
            Stage::Follower(s) => Role::Follower(s),
        }
    }

    pub fn init_outcome(&self) -> Option<InitOutcome> {
        self.init_outcome
    }

    /// Absolute round at which initialization finished (0 while running).
    pub fn clock_offset(&self) -> u64 {
        self.clock_offset
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_keeps_slot_order() {
        let mut s = OrderedBestSet::from_slots(vec![4, 1, 6]);
        s.apply(Swap { leaving_slot: 2, entering_arm: 5 }).unwrap();
        assert_eq!(s.slots(), &[4, 5, 6]);
        assert!(s.apply(Swap { leaving_slot: 1, entering_arm: 6 }).is_err());
        assert!(s.apply(Swap { leaving_slot: 4, entering_arm: 2 }).is_err());
    }

    #[test]
    fn pivot_ties_lowest_arm() {
        let mut s = OrderedBestSet::from_slots(vec![5, 2, 3]);
        s.update_pivot(&[0.0, 0.4, 0.4, 0.0, 0.9]);
        assert_eq!(s.pivot_arm(), 2);
        s.update_pivot(&[0.0, 0.4, 0.3, 0.0, 0.2]);
        assert_eq!((s.pivot_slot(), s.pivot_arm()), (1, 5));
    }
}
