use serde::Serialize;

use crate::diagnostics::{
    lemma1_monte_carlo, lemma2_constant, ConcentrationExperiment, LemmaError, LEMMA2_BOUND, MIN_LEMMA1_TRIALS,
};

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheckConfig {
    pub players: Vec<usize>,
    pub truncation: u64,
    pub cs: Vec<f64>,
    pub deltas: Vec<f64>,
    pub arm_mean: f64,
    pub horizon: u64,
    pub trials: u64,
    pub seed: u64,
}

impl Default for LemmaCheckConfig {
    fn default() -> Self {
        Self {
            players: (2..=10).collect(),
            truncation: 1_000_000,
            cs: vec![0.25, 0.5, 1.0],
            deltas: vec![0.05, 0.1, 0.5],
            arm_mean: 0.5,
            horizon: 100_000,
            trials: MIN_LEMMA1_TRIALS,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum LemmaCheck {
    IndexFailureSeries {
        #[serde(rename = "M")]
        m: usize,
        truncation: u64,
        partial_sum: f64,
        tail_bound: f64,
        value: f64,
        bound: f64,
        pass: bool,
    },
    Concentration {
        c: f64,
        delta: f64,
        arm_mean: f64,
        horizon: u64,
        trials: u64,
        value: f64,
        std_error: f64,
        bound: f64,
        pass: bool,
    },
}

impl LemmaCheck {
    pub fn pass(&self) -> bool {
        match self {
            Self::IndexFailureSeries { pass, .. } | Self::Concentration { pass, .. } => *pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub all_pass: bool,
    pub checks: Vec<LemmaCheck>,
}

/// Evaluates the index-failure series over the player grid and the
/// concentration experiment over the `(c, delta)` grid.
pub fn check_lemmas(config: &LemmaCheckConfig) -> Result<LemmaReport, LemmaError> {
    let mut checks = Vec::new();
    for &m in &config.players {
        let v = lemma2_constant(m, config.truncation)?;
        checks.push(LemmaCheck::IndexFailureSeries {
            m,
            truncation: v.truncation,
            partial_sum: v.partial_sum,
            tail_bound: v.tail_bound,
            value: v.total(),
            bound: LEMMA2_BOUND,
            pass: v.passes(),
        });
    }
    for &c in &config.cs {
        for &delta in &config.deltas {
            let exp = ConcentrationExperiment {
                c,
                delta,
                arm_mean: config.arm_mean,
                horizon: config.horizon,
                trials: config.trials,
            };
            let est = lemma1_monte_carlo(&exp, config.seed)?;
            checks.push(LemmaCheck::Concentration {
                c,
                delta,
                arm_mean: config.arm_mean,
                horizon: config.horizon,
                trials: config.trials,
                value: est.empirical_sum,
                std_error: est.std_error,
                bound: est.bound,
                pass: est.passes(),
            });
        }
    }
    Ok(LemmaReport { all_pass: checks.iter().all(LemmaCheck::pass), checks })
}
