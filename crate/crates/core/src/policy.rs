//! Beam-selection policies for the beam-alignment phase.
//!
//! Ties are always broken toward the lowest arm index.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preference::{History, PreferenceVector};

pub const DEFAULT_UCB_EXPLORATION: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PolicySpec {
    /// Scan the arm with the second-largest preference.
    SecondBest,
    /// Scan the arm with the largest preference.
    FirstBest,
    /// Thompson-style: scan an arm drawn from the current belief.
    Lts,
    /// UCB1 index on raw feedback values.
    Ucb {
        c: f64,
    },
    UniformRandom,
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::SecondBest => "second-best",
            PolicySpec::FirstBest => "first-best",
            PolicySpec::Lts => "lts",
            PolicySpec::Ucb { .. } => "ucb",
            PolicySpec::UniformRandom => "random",
        }
    }

    pub fn ucb_exploration(&self) -> Option<f64> {
        match self {
            PolicySpec::Ucb { c } => Some(*c),
            _ => None,
        }
    }

    /// Chooses the arm to scan at slot `k`. Only the stochastic policies touch `rng`,
    /// each with exactly one uniform.
    pub fn select<R: Rng + ?Sized>(
        &self,
        m: &PreferenceVector,
        history: &History,
        k: usize,
        rng: &mut R,
    ) -> Result<usize> {
        match *self {
            PolicySpec::SecondBest => select_second_best(m),
            PolicySpec::FirstBest => Ok(select_first_best(m)),
            PolicySpec::Lts => Ok(select_lts(m, rng)),
            PolicySpec::Ucb { c } => Ok(select_ucb(history, k, m.len(), c)),
            PolicySpec::UniformRandom => Ok(select_uniform_random(m.len(), rng)),
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Ucb { c } => write!(f, "ucb:c={c}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidPolicy(s.to_string());
        match s {
            "second-best" => Ok(PolicySpec::SecondBest),
            "first-best" => Ok(PolicySpec::FirstBest),
            "lts" => Ok(PolicySpec::Lts),
            "random" => Ok(PolicySpec::UniformRandom),
            "ucb" => Ok(PolicySpec::Ucb {
                c: DEFAULT_UCB_EXPLORATION,
            }),
            _ => {
                let value = s
                    .strip_prefix("ucb:")
                    .and_then(|rest| rest.trim().strip_prefix("c="))
                    .ok_or_else(bad)?;
                let c: f64 = value.trim().parse().map_err(|_| bad())?;
                if c >= 0.0 && c.is_finite() {
                    Ok(PolicySpec::Ucb { c })
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl TryFrom<String> for PolicySpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PolicySpec> for String {
    fn from(p: PolicySpec) -> String {
        p.to_string()
    }
}

/// Arm indices sorted by preference, descending, ties by ascending index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmOrdering {
    pub ranked: Vec<usize>,
}

impl ArmOrdering {
    pub fn first(&self) -> usize {
        self.ranked[0]
    }

    pub fn second(&self) -> Option<usize> {
        self.ranked.get(1).copied()
    }
}

fn desc(a: f64, b: f64) -> Ordering {
    b.partial_cmp(&a).unwrap_or(Ordering::Equal)
}

pub fn rank_arms(m: &PreferenceVector) -> ArmOrdering {
    let values = m.as_slice();
    let mut ranked: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps ascending index within ties
    ranked.sort_by(|&i, &j| desc(values[i], values[j]));
    ArmOrdering { ranked }
}

/// `(x_[1], x_[2])` in a single pass; `None` for the second when there is one arm.
pub fn top_two(values: &[f64]) -> (usize, Option<usize>) {
    let mut first = 0;
    let mut second: Option<usize> = None;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[first] {
            second = Some(first);
            first = i;
        } else if second.is_none_or(|s| v > values[s]) {
            second = Some(i);
        }
    }
    (first, second)
}

pub fn select_second_best(m: &PreferenceVector) -> Result<usize> {
    top_two(m.as_slice()).1.ok_or(Error::TooFewArms {
        required: 2,
        got: m.len(),
    })
}

pub fn select_first_best(m: &PreferenceVector) -> usize {
    top_two(m.as_slice()).0
}

/// The data-phase beam: always the maximum-preference arm, whatever the scanning policy.
pub fn select_data_beam(m: &PreferenceVector) -> usize {
    select_first_best(m)
}

pub fn select_lts_with_uniform(m: &PreferenceVector, u: f64) -> usize {
    m.belief().sample_with_uniform(u)
}

pub fn select_lts<R: Rng + ?Sized>(m: &PreferenceVector, rng: &mut R) -> usize {
    select_lts_with_uniform(m, rng.random())
}

/// Unscanned arms first (lowest index), then argmax of
/// `mean_a + c * sqrt(2 ln(k + 1) / n_a)` over the feedback seen so far.
pub fn select_ucb(history: &History, k: usize, num_arms: usize, c: f64) -> usize {
    let mut counts = vec![0usize; num_arms];
    let mut sums = vec![0.0f64; num_arms];
    for &(arm, y) in &history.steps {
        if arm < num_arms {
            counts[arm] += 1;
            sums[arm] += y;
        }
    }
    if let Some(unscanned) = counts.iter().position(|&n| n == 0) {
        return unscanned;
    }
    let log_term = 2.0 * ((k + 1) as f64).ln();
    let mut best = 0;
    let mut best_index = f64::NEG_INFINITY;
    for a in 0..num_arms {
        let n = counts[a] as f64;
        let index = sums[a] / n + c * (log_term / n).sqrt();
        if index > best_index {
            best_index = index;
            best = a;
        }
    }
    best
}

pub fn select_uniform_with_uniform(num_arms: usize, u: f64) -> usize {
    ((u * num_arms as f64) as usize).min(num_arms.saturating_sub(1))
}

pub fn select_uniform_random<R: Rng + ?Sized>(num_arms: usize, rng: &mut R) -> usize {
    select_uniform_with_uniform(num_arms, rng.random())
}
