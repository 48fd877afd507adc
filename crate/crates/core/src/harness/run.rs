use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Algorithm, Config};
use super::trace::{RunSummary, TraceRow};
use crate::agents::{DpeAgent, Role};
use crate::baselines::{oracle_select, CentralizedState};
use crate::diagnostics::{BadRoundTracker, InstanceTruth, LeaderRoundView, RegretAccumulator, RoundCounters};
use crate::env::{ArmMeans, Environment, Feedback, RoundLog};
use crate::init::InitOutcome;
use crate::rng::{stream, Stream};

/// How initialization went in one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitReport {
    /// Round at which every player had finished; `None` if the horizon came first.
    pub duration: Option<u64>,
    /// One entry per player, in harness order.
    pub outcomes: Vec<Option<InitOutcome>>,
}

impl InitReport {
    /// Distinct held arms in `1..K`, ranks forming `1..=M`, unanimous `M`.
    pub fn is_consistent(&self, num_arms: usize, num_players: usize) -> bool {
        let Some(outs) = self.outcomes.iter().copied().collect::<Option<Vec<_>>>() else {
            return false;
        };
        let mut arms: Vec<usize> = outs.iter().map(|o| o.held_arm).collect();
        let mut ranks: Vec<usize> = outs.iter().map(|o| o.rank).collect();
        arms.sort_unstable();
        ranks.sort_unstable();
        arms.dedup();
        arms.len() == num_players
            && arms.iter().all(|&a| (1..num_arms).contains(&a))
            && ranks == (1..=num_players).collect::<Vec<_>>()
            && outs.iter().all(|o| o.num_players == num_players)
    }
}

/// Rounds where play was supposed to be orthogonal, and how many collided.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SteadyRounds {
    pub rounds: u64,
    pub collided: u64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub run_id: usize,
    pub seed: u64,
    pub rows: Vec<TraceRow>,
    /// Bad-round counters at each checkpoint reached (DPE only).
    pub counters: Vec<RoundCounters>,
    pub fault: Option<String>,
    pub steady: SteadyRounds,
    pub init: Option<InitReport>,
    /// Clean plays per arm seen by the learner at the end of the run.
    pub final_pulls: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub runs: Vec<RunResult>,
    pub summary: RunSummary,
}

impl Experiment {
    pub fn rows(&self) -> impl Iterator<Item = &TraceRow> {
        self.runs.iter().flat_map(|r| r.rows.iter())
    }

    pub fn faults(&self) -> impl Iterator<Item = (u64, &str)> {
        self.runs.iter().filter_map(|r| r.fault.as_deref().map(|f| (r.seed, f)))
    }
}

/// Runs every seed of `config` on the rayon pool; runs are ordered by `run_id`.
pub fn run_experiment(config: &Config) -> Experiment {
    run_experiment_from(config, 0)
}

pub(crate) fn run_experiment_from(config: &Config, first_run_id: usize) -> Experiment {
    let runs: Vec<RunResult> = config
        .seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| run_seed(config, first_run_id + i, seed))
        .collect();
    let summary = RunSummary::from_rows(config, runs.iter().flat_map(|r| r.rows.iter()));
    Experiment { runs, summary }
}

/// One experiment per horizon, with run ids continuing across horizons.
pub fn run_sweep(config: &Config, horizons: &[u64]) -> Vec<Experiment> {
    let mut next_id = 0;
    horizons
        .iter()
        .map(|&h| {
            let exp = run_experiment_from(&config.with_horizon(h), next_id);
            next_id += exp.runs.len();
            exp
        })
        .collect()
}

struct DpeTeam {
    agents: Vec<DpeAgent>,
    rngs: Vec<Stream>,
    leader: Option<usize>,
    init: InitReport,
}

enum Team {
    Dpe(DpeTeam),
    Centralized(CentralizedState),
    Oracle(Vec<usize>),
    Random(Vec<Stream>),
}

impl Team {
    fn new(config: &Config, seed: u64) -> Self {
        let (k, m) = (config.num_arms, config.num_players);
        let rngs = || (1..=m as u64).map(|i| stream(seed, i)).collect::<Vec<_>>();
        match config.algorithm {
            Algorithm::Dpe => Team::Dpe(DpeTeam {
                agents: (0..m).map(|_| DpeAgent::new(k, config.bisection_tolerance)).collect(),
                rngs: rngs(),
                leader: None,
                init: InitReport { duration: None, outcomes: vec![None; m] },
            }),
            Algorithm::Centralized => Team::Centralized(CentralizedState::new(m, k, config.bisection_tolerance)),
            Algorithm::Oracle => Team::Oracle(oracle_select(&config.means, m)),
            Algorithm::Random => Team::Random(rngs()),
        }
    }
}

struct Tallies {
    collisions: u64,
    comm_phases: u64,
    set_changes: u64,
}

/// Runs one seed to the horizon, or until an agent faults.
pub fn run_seed(config: &Config, run_id: usize, seed: u64) -> RunResult {
    let (k, m) = (config.num_arms, config.num_players);
    let truth = InstanceTruth::new(&config.means, m);
    let mut env = Environment::new(config.means.clone(), m, seed).expect("validated config");
    let mut team = Team::new(config, seed);
    let mut regret = RegretAccumulator::new(&truth);
    let mut tracker = BadRoundTracker::new(&truth);
    let mut steady = SteadyRounds::default();
    let mut tallies = Tallies { collisions: 0, comm_phases: 0, set_changes: 0 };

    let mut selections = vec![0usize; m];
    let mut feedback: Vec<Feedback> = Vec::with_capacity(m);
    let mut rewards: Vec<u8> = Vec::with_capacity(m);
    let mut log = RoundLog::default();
    let mut rows = Vec::with_capacity(config.checkpoints.len());
    let mut counters = Vec::with_capacity(config.checkpoints.len());
    let mut next_checkpoint = config.checkpoints.iter().copied().peekable();
    let mut fault = None;

    let row = |t: u64, regret: &RegretAccumulator, tracker: &BadRoundTracker, tallies: &Tallies| TraceRow {
        run_id,
        seed,
        algorithm: config.algorithm,
        k,
        m,
        t,
        cum_regret_zeroed: regret.zeroed(),
        cum_regret_literal: regret.literal(),
        comm_phases: tallies.comm_phases,
        comm_rounds: tracker.comm_rounds,
        init_rounds: tracker.init_rounds,
        collisions: tallies.collisions,
        set_changes: tallies.set_changes,
    };

    for t in 1..=config.horizon {
        let step = (|| -> Result<(), String> {
            match &mut team {
                Team::Dpe(d) => {
                    for (i, (agent, rng)) in d.agents.iter_mut().zip(d.rngs.iter_mut()).enumerate() {
                        selections[i] = agent.select(t, rng).map_err(|e| format!("player {}: {e}", i + 1))?;
                    }
                }
                Team::Centralized(c) => selections.copy_from_slice(&c.select(t)),
                Team::Oracle(arms) => selections.copy_from_slice(arms),
                Team::Random(rngs) => {
                    for (s, rng) in selections.iter_mut().zip(rngs.iter_mut()) {
                        *s = rng.random_range(1..=k);
                    }
                }
            }
            env.step_into(&selections, &mut feedback, &mut log).map_err(|e| e.to_string())?;
            regret.record(&log);
            let collided = feedback.iter().filter(|f| f.collision).count() as u64;
            tallies.collisions += collided;
            tracker.collisions = tallies.collisions;

            match &mut team {
                Team::Dpe(d) => {
                    instrument_dpe(d, t, collided, &mut tracker, &mut steady, &mut tallies)?;
                    for (i, (agent, fb)) in d.agents.iter_mut().zip(&feedback).enumerate() {
                        agent.observe(t, fb).map_err(|e| format!("player {}: {e}", i + 1))?;
                    }
                    check_init_exit(d, t)?;
                }
                Team::Centralized(c) => {
                    rewards.clear();
                    rewards.extend(feedback.iter().map(|f| f.reward.unwrap_or(0)));
                    c.update(&selections, &rewards).map_err(|e| e.to_string())?;
                }
                Team::Oracle(_) | Team::Random(_) => {}
            }
            Ok(())
        })();

        if let Err(e) = step {
            fault = Some(format!("round {t}: {e}"));
            rows.push(row(t, &regret, &tracker, &tallies));
            counters.push(tracker.snapshot(t));
            break;
        }
        if next_checkpoint.next_if_eq(&t).is_some() {
            rows.push(row(t, &regret, &tracker, &tallies));
            counters.push(tracker.snapshot(t));
        }
    }

    let (init, final_pulls) = match team {
        Team::Dpe(d) => {
            let pulls = d
                .leader
                .and_then(|i| match d.agents[i].role() {
                    Role::Leader(l) => Some(l.stats().iter().map(|s| s.pulls).collect()),
                    _ => None,
                })
                .unwrap_or_else(|| vec![0; k]);
            (Some(d.init), pulls)
        }
        Team::Centralized(c) => (None, c.stats().iter().map(|s| s.pulls).collect()),
        Team::Oracle(_) | Team::Random(_) => (None, vec![0; k]),
    };

    RunResult { run_id, seed, rows, counters, fault, steady, init, final_pulls }
}

/// Per-round bookkeeping between the environment step and the observations,
/// so every agent is seen with the state it selected under.
fn instrument_dpe(
    d: &DpeTeam,
    t: u64,
    collided: u64,
    tracker: &mut BadRoundTracker,
    steady: &mut SteadyRounds,
    tallies: &mut Tallies,
) -> Result<(), String> {
    let Some(li) = d.leader else {
        tracker.init_rounds += 1;
        return Ok(());
    };
    let Role::Leader(leader) = d.agents[li].role() else {
        return Err("leader lost its role".into());
    };
    let local = t - d.agents[li].clock_offset();
    let in_comm = leader.communicating_at(local);
    tracker.comm_rounds += u64::from(in_comm);
    tallies.comm_phases = leader.phases();
    tallies.set_changes = leader.set_changes();
    tracker.record(&LeaderRoundView {
        best_set: leader.best_set().slots(),
        frozen_means: leader.frozen_means(),
        frozen_indices: leader.frozen_indices(),
        played: leader.played().ok_or("leader has not played")?,
    });

    if !in_comm {
        let consistent = d.agents.iter().all(|a| match a.role() {
            Role::Follower(f) => !f.decoding() && f.best_set().slots() == leader.best_set().slots(),
            _ => true,
        });
        if consistent {
            steady.rounds += 1;
            steady.collided += u64::from(collided > 0);
        }
    }
    Ok(())
}

/// Records initialization outcomes and checks that all players leave together.
fn check_init_exit(d: &mut DpeTeam, t: u64) -> Result<(), String> {
    if d.leader.is_some() {
        return Ok(());
    }
    let done = d.agents.iter().filter(|a| a.init_outcome().is_some()).count();
    if done == 0 {
        return Ok(());
    }
    if done < d.agents.len() {
        return Err(format!("only {done} of {} players finished initialization", d.agents.len()));
    }
    d.init.duration = Some(t);
    d.init.outcomes = d.agents.iter().map(|a| a.init_outcome()).collect();
    let leaders: Vec<usize> =
        (0..d.agents.len()).filter(|&i| matches!(d.agents[i].role(), Role::Leader(_))).collect();
    match leaders.as_slice() {
        [one] => {
            d.leader = Some(*one);
            Ok(())
        }
        _ => Err(format!("{} players claim rank 1", leaders.len())),
    }
}

/// Runs only the initialization of `num_players` DPE agents on `means`,
/// for at most `horizon` rounds.
pub fn run_initialization(means: &ArmMeans, num_players: usize, seed: u64, horizon: u64) -> InitReport {
    let k = means.num_arms();
    let mut env = Environment::new(means.clone(), num_players, seed).expect("valid instance");
    let mut agents: Vec<DpeAgent> = (0..num_players).map(|_| DpeAgent::new(k, crate::index::DEFAULT_TOLERANCE)).collect();
    let mut rngs: Vec<Stream> = (1..=num_players as u64).map(|i| stream(seed, i)).collect();
    let mut selections = vec![0usize; num_players];
    let mut feedback = Vec::with_capacity(num_players);
    let mut log = RoundLog::default();
    let mut report = InitReport { duration: None, outcomes: vec![None; num_players] };

    for t in 1..=horizon {
        for (i, (a, rng)) in agents.iter_mut().zip(rngs.iter_mut()).enumerate() {
            match a.select(t, rng) {
                Ok(arm) => selections[i] = arm,
                Err(_) => return report,
            }
        }
        env.step_into(&selections, &mut feedback, &mut log).expect("arms in range");
        for (a, fb) in agents.iter_mut().zip(&feedback) {
            if a.observe(t, fb).is_err() {
                return report;
            }
        }
        let done = agents.iter().filter(|a| a.init_outcome().is_some()).count();
        if done > 0 {
            report.outcomes = agents.iter().map(|a| a.init_outcome()).collect();
            if done == num_players {
                report.duration = Some(t);
            }
            return report;
        }
    }
    report
}
