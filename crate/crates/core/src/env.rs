//! Bernoulli arms with collision semantics.
//!
//! Arms are numbered `1..=K`. Every round the environment draws one
//! potential reward per arm, whether or not anyone plays it, so runs that
//! share a seed see identical draws regardless of the policy being tested.

use rand::Rng;
use thiserror::Error;

use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("need at least 2 arms, got {0}")]
    TooFewArms(usize),
    #[error("mean of arm {arm} is {value}, must lie strictly inside (0,1)")]
    MeanOutOfRange { arm: usize, value: f64 },
    #[error("arms {first} and {second} share the mean {value}")]
    DuplicateMean { first: usize, second: usize, value: f64 },
    #[error("number of players {players} must satisfy 1 <= M < K = {arms}")]
    PlayerCount { players: usize, arms: usize },
    #[error("expected {expected} selections, got {got}")]
    SelectionCount { expected: usize, got: usize },
    #[error("arm index {arm} out of range 1..={arms}")]
    ArmOutOfRange { arm: usize, arms: usize },
}

/// The hidden instance: one Bernoulli mean per arm, in arm order.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmMeans(Vec<f64>);

impl ArmMeans {
    pub fn new(means: Vec<f64>) -> Result<Self, EnvError> {
        if means.len() < 2 {
            return Err(EnvError::TooFewArms(means.len()));
        }
        for (i, &m) in means.iter().enumerate() {
            if !(m > 0.0 && m < 1.0) {
                return Err(EnvError::MeanOutOfRange { arm: i + 1, value: m });
            }
        }
        for i in 0..means.len() {
            for j in i + 1..means.len() {
                if means[i] == means[j] {
                    return Err(EnvError::DuplicateMean { first: i + 1, second: j + 1, value: means[i] });
                }
            }
        }
        Ok(Self(means))
    }

    pub fn num_arms(&self) -> usize {
        self.0.len()
    }

    /// Mean of arm `arm` (1-based).
    pub fn mean(&self, arm: usize) -> f64 {
        self.0[arm - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Arm ids sorted by decreasing mean.
    pub fn ranking(&self) -> Vec<usize> {
        let mut arms: Vec<usize> = (1..=self.0.len()).collect();
        arms.sort_by(|&a, &b| self.mean(b).total_cmp(&self.mean(a)));
        arms
    }
}

/// What one player observes after one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Feedback {
    pub collision: bool,
    /// Present iff `collision` is false.
    pub reward: Option<u8>,
}

impl Feedback {
    pub fn collided() -> Self {
        Self { collision: true, reward: None }
    }

    pub fn reward(value: u8) -> Self {
        Self { collision: false, reward: Some(value) }
    }
}

/// Ground-truth record of one round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundLog {
    pub round: u64,
    pub selections: Vec<usize>,
    /// Potential reward `X_k(t)` of every arm, index `k - 1`.
    pub draws: Vec<u8>,
    /// Arms chosen by two or more players, ascending.
    pub collided_arms: Vec<usize>,
}

impl RoundLog {
    pub fn is_collided(&self, arm: usize) -> bool {
        self.collided_arms.binary_search(&arm).is_ok()
    }
}

#[derive(Debug, Clone)]
pub struct Environment {
    means: ArmMeans,
    num_players: usize,
    stream: Stream,
    round: u64,
    // per-arm selection counts for the current round
    load: Vec<u32>,
}

impl Environment {
    pub fn new(means: ArmMeans, num_players: usize, seed: u64) -> Result<Self, EnvError> {
        let arms = means.num_arms();
        if num_players == 0 || num_players >= arms {
            return Err(EnvError::PlayerCount { players: num_players, arms });
        }
        Ok(Self {
            means,
            num_players,
            stream: rng::stream(seed, 0),
            round: 0,
            load: vec![0; arms],
        })
    }

    pub fn means(&self) -> &ArmMeans {
        &self.means
    }

    pub fn num_arms(&self) -> usize {
        self.means.num_arms()
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    /// Rounds played so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    /// Plays one round, allocating fresh outputs.
    pub fn step(&mut self, selections: &[usize]) -> Result<(Vec<Feedback>, RoundLog), EnvError> {
        let mut feedback = Vec::with_capacity(selections.len());
        let mut log = RoundLog::default();
        self.step_into(selections, &mut feedback, &mut log)?;
        Ok((feedback, log))
    }

    /// Plays one round, reusing the caller's buffers.
    pub fn step_into(
        &mut self,
        selections: &[usize],
        feedback: &mut Vec<Feedback>,
        log: &mut RoundLog,
    ) -> Result<(), EnvError> {
        let arms = self.num_arms();
        if selections.len() != self.num_players {
            return Err(EnvError::SelectionCount { expected: self.num_players, got: selections.len() });
        }
        if let Some(&arm) = selections.iter().find(|&&a| a == 0 || a > arms) {
            return Err(EnvError::ArmOutOfRange { arm, arms });
        }

        self.round += 1;
        log.round = self.round;
        log.draws.clear();
        for &mu in self.means.as_slice() {
            log.draws.push(u8::from(self.stream.random::<f64>() < mu));
        }

        self.load.iter_mut().for_each(|l| *l = 0);
        for &arm in selections {
            self.load[arm - 1] += 1;
        }
        log.collided_arms.clear();
        log.collided_arms
            .extend((1..=arms).filter(|&a| self.load[a - 1] >= 2));
        log.selections.clear();
        log.selections.extend_from_slice(selections);

        feedback.clear();
        feedback.extend(selections.iter().map(|&arm| {
            if self.load[arm - 1] >= 2 {
                Feedback::collided()
            } else {
                Feedback::reward(log.draws[arm - 1])
            }
        }));
        Ok(())
    }
}

/// Best achievable expected reward per round: the sum of the `m` largest means.
pub fn optimal_round_reward(means: &ArmMeans, m: usize) -> Result<f64, EnvError> {
    if m == 0 || m >= means.num_arms() {
        return Err(EnvError::PlayerCount { players: m, arms: means.num_arms() });
    }
    Ok(means.ranking()[..m].iter().map(|&a| means.mean(a)).sum())
}
