use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SweepVariable};
use super::frame::{frame_aligned, FrameModel};
use crate::channel::dbm_to_watts;
use crate::error::{Error, Result};
use crate::rate::{optimize_rate_at_power, optimize_rate_power, DataPhaseParams};
use crate::seed::frame_stream;

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPointResult {
    pub policy: String,
    pub sweep_var: SweepVariable,
    pub sweep_value: f64,
    pub snr_db: f64,
    pub alignment_slots: usize,
    pub p_align: f64,
    pub p_align_ci95: f64,
    pub spectral_efficiency: f64,
    pub iterations: u64,
    pub seed: u64,
}

pub fn ci95_half_width(p: f64, n: u64) -> f64 {
    Z95 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Data-phase rate/power for the configured link, at fixed or optimized power.
pub fn data_phase(config: &ExperimentConfig) -> Result<DataPhaseParams> {
    let link = config.link.budget()?;
    let gain = config.gains.main_lobe_linear();
    match config.link.data_power_dbm {
        Some(dbm) => optimize_rate_at_power(&link, gain, dbm_to_watts(dbm)),
        None => optimize_rate_power(&link, gain),
    }
}

/// Counts aligned frames for one `(policy, point)` pair. The sum over independently
/// seeded frames is exact, so the result does not depend on scheduling.
fn count_aligned(
    config: &ExperimentConfig,
    model: &FrameModel,
    policy_index: usize,
    point_index: usize,
) -> Result<u64> {
    let policy = &config.policies[policy_index];
    (0..config.iterations)
        .into_par_iter()
        .map(|i| {
            let rng = frame_stream(config.base_seed, policy_index, point_index, i);
            frame_aligned(model, policy, rng).map(u64::from)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Runs every `(policy, sweep point)` pair on the current rayon pool.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepPointResult>> {
    config.validate()?;
    let prior = config.prior.resolve(config.num_arms)?;
    let data = data_phase(config)?;
    let bandwidth = config.link.bandwidth_hz;
    let points = config.sweep.points();

    let mut results = Vec::with_capacity(points.len() * config.policies.len());
    for (policy_index, policy) in config.policies.iter().enumerate() {
        for (point_index, point) in points.iter().enumerate() {
            let nu = config.gains.nu(point.snr_db)?;
            let model = FrameModel::new(prior.clone(), nu, point.alignment_slots)?;
            let hits = count_aligned(config, &model, policy_index, point_index)?;
            let n = config.iterations;
            let p_align = hits as f64 / n as f64;
            let fraction = config.frame.data_fraction(point.alignment_slots)?;
            results.push(SweepPointResult {
                policy: policy.to_string(),
                sweep_var: config.sweep.variable,
                sweep_value: match config.sweep.variable {
                    SweepVariable::Snr => point.snr_db,
                    SweepVariable::Overhead => point.alignment_slots as f64,
                },
                snr_db: point.snr_db,
                alignment_slots: point.alignment_slots,
                p_align,
                p_align_ci95: ci95_half_width(p_align, n),
                spectral_efficiency: fraction * p_align * data.expected_rate_bps / bandwidth,
                iterations: n,
                seed: config.base_seed,
            });
        }
    }
    Ok(results)
}

/// [`run_sweep`] on a dedicated pool with `threads` workers.
pub fn run_sweep_with_threads(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<Vec<SweepPointResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(config))
}
