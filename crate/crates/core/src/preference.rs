//! Preference vectors: the per-arm log-belief sufficient statistic.
//!
//! A preference vector `m` is the log of the belief up to a common additive
//! constant. Each scan of arm `a` with feedback `y` adds `J(y) = (1-nu)*y + ln nu`
//! to `m[a]` and leaves every other entry untouched. Entries are never
//! renormalized: softmax, argmax and second-argmax are all shift invariant,
//! so the drift of the common constant has no effect.

use serde::{Deserialize, Serialize};

use crate::channel::Nu;
use crate::error::{Error, Result};

/// Log-likelihood ratio increment `J(y) = (1 - nu) * y + ln nu`.
#[inline]
pub fn j_transform(y: f64, nu: Nu) -> f64 {
    (1.0 - nu.get()) * y + nu.ln()
}

/// Feedback level above which a scan raises the scanned arm's belief.
pub fn j_root(nu: Nu) -> f64 {
    -nu.ln() / (1.0 - nu.get())
}

/// `ln(sum_i exp(x_i))` with max subtraction.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Index selected by a single uniform `u` in [0, 1) against cumulative `weights`.
///
/// Weights need not be normalized. Rounding in the cumulative sum never
/// returns a zero-weight arm past the end.
pub fn sample_index(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
        }
        acc += w;
        if target < acc {
            return i;
        }
    }
    last_positive
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PreferenceVector(Vec<f64>);

impl PreferenceVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewArms {
                required: 1,
                got: 0,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinitePreference);
        }
        Ok(PreferenceVector(values))
    }

    /// All-zero preferences: the uniform prior.
    pub fn uniform(num_arms: usize) -> Result<Self> {
        Self::new(vec![0.0; num_arms])
    }

    /// `m0[x] = ln b0[x]`. Zero prior mass is rejected.
    pub fn from_prior(prior: &[f64]) -> Result<Self> {
        Self::new(prior.iter().map(|p| p.ln()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn check_arm(&self, arm: usize) -> Result<()> {
        if arm < self.0.len() {
            Ok(())
        } else {
            Err(Error::ArmOutOfRange {
                arm,
                num_arms: self.0.len(),
            })
        }
    }

    /// In-place form of [`update_preference`].
    pub fn apply_feedback(&mut self, arm: usize, y: f64, nu: Nu) -> Result<()> {
        self.check_arm(arm)?;
        self.0[arm] += j_transform(y, nu);
        Ok(())
    }

    pub fn log_partition(&self) -> f64 {
        log_sum_exp(&self.0)
    }

    pub fn belief(&self) -> Belief {
        belief_from_preference(self)
    }

    /// Adds `c` to every entry.
    pub fn shifted(&self, c: f64) -> Self {
        PreferenceVector(self.0.iter().map(|v| v + c).collect())
    }
}

impl std::ops::Index<usize> for PreferenceVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Posterior probability vector over arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Belief(Vec<f64>);

impl Belief {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Inverse-CDF draw with a single uniform.
    pub fn sample_with_uniform(&self, u: f64) -> usize {
        sample_index(&self.0, u)
    }
}

impl std::ops::Index<usize> for Belief {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Scanned arms and their feedback, in slot order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub steps: Vec<(usize, f64)>,
}

impl History {
    pub fn with_capacity(slots: usize) -> Self {
        History {
            steps: Vec::with_capacity(slots),
        }
    }

    pub fn push(&mut self, arm: usize, y: f64) {
        self.steps.push((arm, y));
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Returns `m` with `J(y)` added to `m[scanned_arm]` only.
pub fn update_preference(
    m: &PreferenceVector,
    scanned_arm: usize,
    y: f64,
    nu: Nu,
) -> Result<PreferenceVector> {
    let mut next = m.clone();
    next.apply_feedback(scanned_arm, y, nu)?;
    Ok(next)
}

/// Softmax of the preferences.
pub fn belief_from_preference(m: &PreferenceVector) -> Belief {
    let max = m.0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = m.0.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    Belief(weights.into_iter().map(|w| w / total).collect())
}

/// Belief mass of a single arm, `exp(m[a]) / sum_l exp(m[l])`.
pub fn arm_probability(m: &PreferenceVector, arm: usize) -> Result<f64> {
    m.check_arm(arm)?;
    Ok((m.0[arm] - m.log_partition()).exp())
}

/// Predictive feedback density `b[a] nu e^{-nu y} + (1 - b[a]) e^{-y}`.
pub fn marginal_feedback_density(
    m: &PreferenceVector,
    scanned_arm: usize,
    y: f64,
    nu: Nu,
) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::NegativeFeedback(y));
    }
    let p = arm_probability(m, scanned_arm)?;
    let nu = nu.get();
    Ok(p * nu * (-nu * y).exp() + (1.0 - p) * (-y).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub absolute: f64,
    pub relative: f64,
}

/// Residual of `sum_l e^{m'[l]} = e^y f(y | m, a) sum_l e^{m[l]}` where `m'` is the
/// updated preference. Both sides are evaluated directly, without max shifting.
pub fn sum_exp_identity_check(
    m: &PreferenceVector,
    scanned_arm: usize,
    y: f64,
    nu: Nu,
) -> Result<IdentityResidual> {
    let updated = update_preference(m, scanned_arm, y, nu)?;
    let lhs: f64 = updated.0.iter().map(|v| v.exp()).sum();
    let rhs = y.exp()
        * marginal_feedback_density(m, scanned_arm, y, nu)?
        * m.0.iter().map(|v| v.exp()).sum::<f64>();
    let absolute = (lhs - rhs).abs();
    Ok(IdentityResidual {
        absolute,
        relative: absolute / lhs.abs().max(rhs.abs()),
    })
}

/// Terminal reward: probability that `data_arm` is the true sector.
pub fn alignment_reward(m: &PreferenceVector, data_arm: usize) -> Result<f64> {
    arm_probability(m, data_arm)
}
