//! Data-phase rate and power selection under Rayleigh fading.
//!
//! Given correct alignment, `|alpha|^2 ~ Exp(mean 1/l(d))`, so the non-outage
//! probability of rate `R` at power `P` has the closed form
//! `exp(-l(d) N0 W (2^{R/W} - 1) / (P G))`. Misalignment is treated as
//! certain outage.

use serde::{Deserialize, Serialize};

use crate::channel::LinkBudget;
use crate::error::{Error, Result};

/// Bracket edge sits where the non-outage factor has dropped below `e^-50`.
const BRACKET_EXPONENT: f64 = 50.0;
const GOLDEN_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataPhaseParams {
    /// Data rate, bit/s.
    pub rate_bps: f64,
    /// Data transmit power, W.
    pub power_w: f64,
    /// Expected rate given alignment, `R * P(non-outage)`, bit/s.
    pub expected_rate_bps: f64,
}

/// Outage constant `c = l(d) N0 W / (P G)`.
fn outage_constant(link: &LinkBudget, power_w: f64, main_lobe_gain: f64) -> f64 {
    link.path_loss() * link.noise_power_w() / (power_w * main_lobe_gain)
}

pub fn non_outage_probability(
    rate_bps: f64,
    power_w: f64,
    link: &LinkBudget,
    main_lobe_gain: f64,
) -> Result<f64> {
    if !(power_w > 0.0) {
        return Err(Error::InvalidRate(format!(
            "power must be positive, got {power_w}"
        )));
    }
    if !(rate_bps >= 0.0) {
        return Err(Error::InvalidRate(format!(
            "rate must be nonnegative, got {rate_bps}"
        )));
    }
    if !(main_lobe_gain > 0.0) {
        return Err(Error::InvalidRate(format!(
            "main-lobe gain must be positive, got {main_lobe_gain}"
        )));
    }
    let c = outage_constant(link, power_w, main_lobe_gain);
    let excess = (rate_bps / link.bandwidth_hz * std::f64::consts::LN_2).exp_m1();
    Ok((-c * excess).exp())
}

/// `R * P(non-outage)` given correct alignment.
pub fn expected_rate(
    rate_bps: f64,
    power_w: f64,
    link: &LinkBudget,
    main_lobe_gain: f64,
) -> Result<f64> {
    Ok(rate_bps * non_outage_probability(rate_bps, power_w, link, main_lobe_gain)?)
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (hi - lo) > rel_tol * (x1.abs() + x2.abs()).max(f64::MIN_POSITIVE) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Upper end of the rate search bracket, `W log2(1 + 50/c)`.
pub fn rate_search_bracket(link: &LinkBudget, power_w: f64, main_lobe_gain: f64) -> f64 {
    let c = outage_constant(link, power_w, main_lobe_gain);
    link.bandwidth_hz * (BRACKET_EXPONENT / c).ln_1p() / std::f64::consts::LN_2
}

/// Best rate at a fixed data power.
pub fn optimize_rate_at_power(
    link: &LinkBudget,
    main_lobe_gain: f64,
    power_w: f64,
) -> Result<DataPhaseParams> {
    link.validate()?;
    if !(power_w > 0.0 && power_w <= link.max_data_power_w * (1.0 + 1e-12)) {
        return Err(Error::InvalidRate(format!(
            "data power {power_w} W outside (0, {}]",
            link.max_data_power_w
        )));
    }
    let c = outage_constant(link, power_w, main_lobe_gain);
    // work in spectral efficiency s = R / W
    let objective = |s: f64| s * (-c * (s * std::f64::consts::LN_2).exp_m1()).exp();
    let upper = (BRACKET_EXPONENT / c).ln_1p() / std::f64::consts::LN_2;
    let s = golden_section_max(objective, 0.0, upper, GOLDEN_REL_TOL);
    let rate_bps = s * link.bandwidth_hz;
    Ok(DataPhaseParams {
        rate_bps,
        power_w,
        expected_rate_bps: expected_rate(rate_bps, power_w, link, main_lobe_gain)?,
    })
}

/// Jointly optimal `(R*, P*)`. The expected rate increases with power, so `P* = Pmax`.
pub fn optimize_rate_power(link: &LinkBudget, main_lobe_gain: f64) -> Result<DataPhaseParams> {
    optimize_rate_at_power(link, main_lobe_gain, link.max_data_power_w)
}

/// Frame timing: `N` slots of `Ts` seconds, frame of `Tfr = N Ts` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameTiming {
    pub slots_per_frame: usize,
    pub slot_duration_s: f64,
    pub frame_duration_s: f64,
}

impl FrameTiming {
    pub fn validate(&self) -> Result<()> {
        if self.slots_per_frame == 0 || !(self.slot_duration_s > 0.0) {
            return Err(Error::Config(
                "frame needs positive slot count and duration".into(),
            ));
        }
        let implied = self.slots_per_frame as f64 * self.slot_duration_s;
        if ((implied - self.frame_duration_s) / self.frame_duration_s).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "frame duration {} s != N * Ts = {implied} s",
                self.frame_duration_s
            )));
        }
        Ok(())
    }

    /// `(Tfr - L Ts) / Tfr`; requires `L < N`.
    pub fn data_fraction(&self, alignment_slots: usize) -> Result<f64> {
        if alignment_slots >= self.slots_per_frame {
            return Err(Error::InvalidHorizon(format!(
                "alignment slots L = {alignment_slots} must be below N = {}",
                self.slots_per_frame
            )));
        }
        Ok(
            (self.frame_duration_s - alignment_slots as f64 * self.slot_duration_s)
                / self.frame_duration_s,
        )
    }
}

/// Frame-normalized expected rate `((Tfr - L Ts)/Tfr) * p_align * R_hat`, bit/s.
pub fn expected_frame_rate(
    p_align: f64,
    alignment_slots: usize,
    timing: &FrameTiming,
    data: &DataPhaseParams,
) -> Result<f64> {
    timing.validate()?;
    Ok(timing.data_fraction(alignment_slots)? * p_align * data.expected_rate_bps)
}
