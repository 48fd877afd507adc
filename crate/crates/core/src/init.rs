//! Two-stage initialization: orthogonalization onto distinct arms of
//! `1..K-1`, then rank assignment, which also reveals the player count.
//!
//! Orthogonalization runs in blocks of `K + 1` rounds. Round 0 of a block is
//! a probe; rounds `1..=K` broadcast whether anyone is still unsatisfied by
//! crowding arm `K`. Rank assignment runs `K - 1` blocks of `K - 1` rounds in
//! which the holder of state `k` sweeps arms `1..K-1` during block `k`.

use rand::Rng;
use thiserror::Error;

use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum InitError {
    #[error("initialization already finished")]
    AlreadyDone,
    #[error("initialization not finished yet")]
    NotDone,
    #[error("observe called without a preceding select")]
    NoSelection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitPhase {
    Orthogonalization,
    RankAssignment,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InitOutcome {
    pub rank: usize,
    pub num_players: usize,
    pub held_arm: usize,
    pub duration_rounds: u64,
}

#[derive(Debug, Clone)]
pub struct InitState {
    num_arms: usize,
    /// 0 = unsatisfied, otherwise the held arm in `1..K-1`.
    internal_state: usize,
    phase: InitPhase,
    /// Orthogonalization: 0 is the probe round, `1..=K` the signal rounds.
    /// Rank assignment: sweep round `1..=K-1`.
    position_in_block: usize,
    /// Rank-assignment block number `1..=K-1`.
    block: usize,
    block_collision_seen: bool,
    /// `occupancy[k - 1]` is true iff some player holds state `k`.
    occupancy: Vec<bool>,
    last_selection: Option<usize>,
    rounds: u64,
    orthogonalization_blocks: u64,
}

impl InitState {
    /// Fresh state for a player in a game with `num_arms >= 2` arms.
    pub fn new(num_arms: usize) -> Self {
        assert!(num_arms >= 2, "initialization needs at least two arms");
        Self {
            num_arms,
            internal_state: 0,
            phase: InitPhase::Orthogonalization,
            position_in_block: 0,
            block: 0,
            block_collision_seen: false,
            occupancy: vec![false; num_arms - 1],
            last_selection: None,
            rounds: 0,
            orthogonalization_blocks: 0,
        }
    }

    pub fn phase(&self) -> InitPhase {
        self.phase
    }

    pub fn internal_state(&self) -> usize {
        self.internal_state
    }

    pub fn position_in_block(&self) -> usize {
        self.position_in_block
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn select(&mut self, rng: &mut Stream) -> Result<usize, InitError> {
        let k = self.num_arms;
        let arm = match self.phase {
            InitPhase::Done => return Err(InitError::AlreadyDone),
            InitPhase::Orthogonalization => match (self.position_in_block, self.internal_state) {
                (0, 0) => rng.random_range(1..k),
                (0, held) => held,
                (_, 0) => k,
                (r, held) if r == held => k,
                (_, held) => held,
            },
            InitPhase::RankAssignment => {
                if self.internal_state == self.block {
                    self.position_in_block
                } else {
                    self.internal_state
                }
            }
        };
        self.last_selection = Some(arm);
        Ok(arm)
    }

    pub fn observe(&mut self, collision: bool) -> Result<(), InitError> {
        let k = self.num_arms;
        let selected = match self.phase {
            InitPhase::Done => return Err(InitError::AlreadyDone),
            _ => self.last_selection.take().ok_or(InitError::NoSelection)?,
        };
        self.rounds += 1;
        match self.phase {
            InitPhase::Orthogonalization => {
                if self.position_in_block == 0 && self.internal_state == 0 && !collision {
                    self.internal_state = selected;
                }
                self.block_collision_seen |= collision;
                self.position_in_block += 1;
                if self.position_in_block == k + 1 {
                    self.orthogonalization_blocks += 1;
                    self.position_in_block = 0;
                    if !self.block_collision_seen {
                        self.phase = InitPhase::RankAssignment;
                        self.block = 1;
                        self.position_in_block = 1;
                    }
                    self.block_collision_seen = false;
                }
            }
            InitPhase::RankAssignment => {
                if collision && self.block != self.internal_state {
                    self.occupancy[self.block - 1] = true;
                }
                self.position_in_block += 1;
                if self.position_in_block == k {
                    if self.block == self.internal_state {
                        self.occupancy[self.block - 1] = true;
                    }
                    self.block += 1;
                    self.position_in_block = 1;
                    if self.block == k {
                        self.phase = InitPhase::Done;
                    }
                }
            }
            InitPhase::Done => unreachable!(),
        }
        Ok(())
    }

    pub fn result(&self) -> Result<InitOutcome, InitError> {
        if self.phase != InitPhase::Done {
            return Err(InitError::NotDone);
        }
        let below = self.occupancy[..self.internal_state - 1].iter().filter(|&&o| o).count();
        Ok(InitOutcome {
            rank: below + 1,
            num_players: self.occupancy.iter().filter(|&&o| o).count(),
            held_arm: self.internal_state,
            duration_rounds: self.rounds,
        })
    }

    /// Number of orthogonalization blocks played (complete ones).
    pub fn orthogonalization_blocks(&self) -> u64 {
        self.orthogonalization_blocks
    }
}
