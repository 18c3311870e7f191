use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{Nu, SectoredEnvironment};
use crate::error::{Error, Result};
use crate::policy::{select_data_beam, PolicySpec};
use crate::preference::{j_transform, History, PreferenceVector};
use crate::seed::{stream, FrameRng};

/// Everything a single frame needs: prior, feedback shape and slot count.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameModel {
    prior: Vec<f64>,
    prior_preference: PreferenceVector,
    nu: Nu,
    alignment_slots: usize,
}

impl FrameModel {
    pub fn new(prior: Vec<f64>, nu: Nu, alignment_slots: usize) -> Result<Self> {
        if prior.len() < 2 {
            return Err(Error::TooFewArms {
                required: 2,
                got: prior.len(),
            });
        }
        let prior_preference = PreferenceVector::from_prior(&prior)?;
        Ok(FrameModel {
            prior,
            prior_preference,
            nu,
            alignment_slots,
        })
    }

    pub fn uniform(num_arms: usize, nu: Nu, alignment_slots: usize) -> Result<Self> {
        Self::new(vec![1.0 / num_arms as f64; num_arms], nu, alignment_slots)
    }

    pub fn num_arms(&self) -> usize {
        self.prior.len()
    }

    pub fn nu(&self) -> Nu {
        self.nu
    }

    pub fn alignment_slots(&self) -> usize {
        self.alignment_slots
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameOutcome {
    pub true_sector: usize,
    pub scanned_arms: Vec<usize>,
    pub feedbacks: Vec<f64>,
    pub data_beam: usize,
    pub aligned: bool,
}

/// One beam-alignment slot as seen by an observer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub slot: usize,
    pub scanned_arm: usize,
    pub feedback: f64,
    pub increment: f64,
    /// Preferences after the update.
    pub preference: Vec<f64>,
}

/// Runs one frame with a fresh stream for `frame_seed`.
pub fn run_frame(model: &FrameModel, policy: &PolicySpec, frame_seed: u64) -> Result<FrameOutcome> {
    run_frame_with_rng(model, policy, stream(frame_seed, &[]))
}

pub fn run_frame_with_rng<R: Rng>(
    model: &FrameModel,
    policy: &PolicySpec,
    rng: R,
) -> Result<FrameOutcome> {
    run_frame_observed(model, policy, rng, |_| {})
}

/// Draws the true sector from the prior, then for each slot selects an arm,
/// samples its feedback and updates the preferences; the data beam is the
/// final maximum-preference arm.
pub fn run_frame_observed<R: Rng, F: FnMut(&TraceStep)>(
    model: &FrameModel,
    policy: &PolicySpec,
    rng: R,
    mut observe: F,
) -> Result<FrameOutcome> {
    let mut env = SectoredEnvironment::with_prior(&model.prior, model.nu, rng)?;
    let mut m = model.prior_preference.clone();
    let mut history = History::with_capacity(model.alignment_slots);
    for k in 0..model.alignment_slots {
        let arm = policy.select(&m, &history, k, env.rng_mut())?;
        let y = env.sample_feedback(arm)?;
        m.apply_feedback(arm, y, model.nu)?;
        history.push(arm, y);
        observe(&TraceStep {
            slot: k,
            scanned_arm: arm,
            feedback: y,
            increment: j_transform(y, model.nu),
            preference: m.as_slice().to_vec(),
        });
    }
    let data_beam = select_data_beam(&m);
    let true_sector = env.true_sector();
    let (scanned_arms, feedbacks) = history.steps.into_iter().unzip();
    Ok(FrameOutcome {
        true_sector,
        scanned_arms,
        feedbacks,
        data_beam,
        aligned: data_beam == true_sector,
    })
}

/// Frames are independent, so a sweep only needs the alignment flag.
pub(crate) fn frame_aligned(
    model: &FrameModel,
    policy: &PolicySpec,
    rng: FrameRng,
) -> Result<bool> {
    run_frame_with_rng(model, policy, rng).map(|o| o.aligned)
}
