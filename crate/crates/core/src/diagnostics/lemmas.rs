//! Numeric checks of two technical lemmas behind the regret bound.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::rng;

pub const MIN_LEMMA2_TRUNCATION: u64 = 10_000;
pub const MIN_LEMMA1_TRIALS: u64 = 1_000;
/// Claimed upper bound on the index-failure constant.
pub const LEMMA2_BOUND: f64 = 15.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LemmaError {
    #[error("truncation {0} below the minimum of {MIN_LEMMA2_TRUNCATION}")]
    Truncation(u64),
    #[error("number of players must be positive")]
    Players,
    #[error("{0} trials, need at least {MIN_LEMMA1_TRIALS}")]
    Trials(u64),
    #[error("invalid experiment parameter {name} = {value}")]
    Parameter { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma2Value {
    pub num_players: usize,
    pub truncation: u64,
    pub partial_sum: f64,
    /// Integral bound on the terms beyond the truncation.
    pub tail_bound: f64,
    /// Whether the tail majorant was seen decreasing past the truncation.
    pub eventually_decreasing: bool,
}

impl Lemma2Value {
    pub fn total(&self) -> f64 {
        self.partial_sum + self.tail_bound
    }

    pub fn passes(&self) -> bool {
        self.eventually_decreasing && self.total() <= LEMMA2_BOUND
    }
}

fn exponent(x: f64) -> (f64, f64) {
    let l = x.ln();
    (l, l + 4.0 * l.ln())
}

/// Smooth majorant `(f(x) ln x + 1) e^{-f(x)}` of the summand.
fn majorant(x: f64) -> f64 {
    let (l, f) = exponent(x);
    (f * l + 1.0) * (-f).exp()
}

/// `e M sum_s ceil(f(sM) ln(sM)) e^{-f(sM)}` with `f(x) = ln x + 4 ln ln x`,
/// summed up to `s = truncation` (terms with `sM <= e` skipped) plus a bound
/// on the remainder.
pub fn lemma2_constant(num_players: usize, truncation: u64) -> Result<Lemma2Value, LemmaError> {
    if num_players == 0 {
        return Err(LemmaError::Players);
    }
    if truncation < MIN_LEMMA2_TRUNCATION {
        return Err(LemmaError::Truncation(truncation));
    }
    let m = num_players as f64;
    let mut sum = 0.0;
    for s in 1..=truncation {
        let x = s as f64 * m;
        if x <= std::f64::consts::E {
            continue;
        }
        let (l, f) = exponent(x);
        sum += (f * l).ceil() * (-f).exp();
    }
    let scale = std::f64::consts::E * m;

    // Remainder: sum_{s > S} h(sM) <= (1/M) int_{SM}^inf h, with u = ln x:
    // int (u^-2 + 4 ln u u^-3 + u^-4) du = 1/U + 2 ln U / U^2 + 1/U^2 + 1/(3U^3).
    let u = (truncation as f64 * m).ln();
    let tail = (1.0 / u + 2.0 * u.ln() / (u * u) + 1.0 / (u * u) + 1.0 / (3.0 * u * u * u)) / m;

    let last = truncation as f64 * m;
    let mut decreasing = (0..1000).all(|i| {
        let x = last - (1000 - i) as f64 * m;
        majorant(x) > majorant(x + m)
    });
    let mut x = last;
    while x < 1e15 {
        decreasing &= majorant(x) > majorant(2.0 * x);
        x *= 2.0;
    }

    Ok(Lemma2Value {
        num_players,
        truncation,
        partial_sum: scale * sum,
        tail_bound: scale * tail,
        eventually_decreasing: decreasing,
    })
}

/// Sampling experiment: on every round an independent coin with bias `c`
/// decides whether an arm of mean `arm_mean` is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationExperiment {
    pub c: f64,
    pub delta: f64,
    pub arm_mean: f64,
    pub horizon: u64,
    pub trials: u64,
}

impl ConcentrationExperiment {
    /// `2/c (2/c + 1/delta^2)`.
    pub fn bound(&self) -> f64 {
        let inv_c = 1.0 / self.c;
        2.0 * inv_c * (2.0 * inv_c + 1.0 / (self.delta * self.delta))
    }

    fn validate(&self) -> Result<(), LemmaError> {
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(LemmaError::Parameter { name: "c", value: self.c });
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(LemmaError::Parameter { name: "delta", value: self.delta });
        }
        if !(self.arm_mean > 0.0 && self.arm_mean < 1.0) {
            return Err(LemmaError::Parameter { name: "arm_mean", value: self.arm_mean });
        }
        if self.trials < MIN_LEMMA1_TRIALS {
            return Err(LemmaError::Trials(self.trials));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Estimate {
    /// Trial average of the number of rounds `n <= horizon` with
    /// `|mu_hat(n) - mu| >= delta`.
    pub empirical_sum: f64,
    pub std_error: f64,
    pub bound: f64,
}

impl Lemma1Estimate {
    pub fn passes(&self) -> bool {
        self.empirical_sum <= self.bound
    }
}

/// Estimates `sum_n P[|mu_hat(n) - mu| >= delta]` with every round eligible.
///
/// The estimate at round `n` uses samples from rounds before `n` (zero when
/// none). Runs between samples are skipped with geometric gaps, which
/// leaves the distribution of the count unchanged.
pub fn lemma1_monte_carlo(exp: &ConcentrationExperiment, seed: u64) -> Result<Lemma1Estimate, LemmaError> {
    exp.validate()?;
    let counts: Vec<f64> = (0..exp.trials)
        .into_par_iter()
        .map(|trial| one_trial(exp, seed, trial) as f64)
        .collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Lemma1Estimate { empirical_sum: mean, std_error: (var / n).sqrt(), bound: exp.bound() })
}

fn one_trial(exp: &ConcentrationExperiment, seed: u64, trial: u64) -> u64 {
    let mut r = rng::stream(seed, trial + 1);
    let log_miss = (1.0 - exp.c).ln();
    let (mut pulls, mut sum) = (0u64, 0u64);
    let mut elapsed = 0u64;
    let mut count = 0u64;
    while elapsed < exp.horizon {
        // rounds up to and including the next sampling round
        let gap = if exp.c >= 1.0 {
            1
        } else {
            let u: f64 = 1.0 - r.random::<f64>();
            ((u.ln() / log_miss).floor() as u64).saturating_add(1)
        };
        let span = gap.min(exp.horizon - elapsed);
        let estimate = if pulls == 0 { 0.0 } else { sum as f64 / pulls as f64 };
        if (estimate - exp.arm_mean).abs() >= exp.delta {
            count += span;
        }
        elapsed += span;
        if span == gap {
            pulls += 1;
            sum += u64::from(r.random::<f64>() < exp.arm_mean);
        }
    }
    count
}
