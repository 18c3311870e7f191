//! Sectored mm-wave channel abstraction.
//!
//! The physical link (array responses, pilots, AWGN, Rayleigh fading) is
//! collapsed into a discrete hidden sector `X` and a normalized-power
//! feedback law: scanning the aligned arm yields `Exp(rate = nu)` feedback,
//! any other arm yields `Exp(rate = 1)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Alignment-shape parameter `nu = (1 + g*snr) / (1 + G*snr)`, always in (0, 1).
///
/// `1/nu` is the mean normalized feedback power when the scanned arm is aligned.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Nu(f64);

impl Nu {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Nu(value))
        } else {
            Err(Error::InvalidNu(value))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0.ln()
    }
}

impl TryFrom<f64> for Nu {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Nu::new(value)
    }
}

impl From<Nu> for f64 {
    fn from(nu: Nu) -> f64 {
        nu.0
    }
}

/// Scalar beamforming gains of the sectored model plus the beam-alignment SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainModel {
    /// Main-lobe power gain `G` (linear).
    pub main_lobe_gain: f64,
    /// Side-lobe power gain `g` (linear).
    pub side_lobe_gain: f64,
    /// Pre-beamforming receive SNR during beam alignment (linear).
    pub snr: f64,
}

impl GainModel {
    pub fn new(main_lobe_gain: f64, side_lobe_gain: f64, snr: f64) -> Result<Self> {
        let model = GainModel {
            main_lobe_gain,
            side_lobe_gain,
            snr,
        };
        model.validate()?;
        Ok(model)
    }

    /// Gains and SNR given in dB.
    pub fn from_db(main_lobe_db: f64, side_lobe_db: f64, snr_db: f64) -> Result<Self> {
        Self::new(
            db_to_linear(main_lobe_db),
            db_to_linear(side_lobe_db),
            db_to_linear(snr_db),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let GainModel {
            main_lobe_gain: big,
            side_lobe_gain: small,
            snr,
        } = *self;
        if !(small > 0.0 && small.is_finite()) {
            return Err(Error::InvalidGainModel(format!(
                "side-lobe gain must be positive, got {small}"
            )));
        }
        if !(big > small && big.is_finite()) {
            return Err(Error::InvalidGainModel(format!(
                "main-lobe gain {big} must exceed side-lobe gain {small}"
            )));
        }
        if !(snr > 0.0 && snr.is_finite()) {
            return Err(Error::InvalidGainModel(format!(
                "snr must be positive, got {snr}"
            )));
        }
        Ok(())
    }
}

/// `nu = (1 + g*snr) / (1 + G*snr)`.
pub fn compute_nu(model: &GainModel) -> Result<Nu> {
    model.validate()?;
    let nu = (1.0 + model.side_lobe_gain * model.snr) / (1.0 + model.main_lobe_gain * model.snr);
    // Can only land on 1.0 through rounding when G*snr and g*snr are both negligible.
    Nu::new(nu)
}

/// Link budget parameters for the data-communication phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub carrier_frequency_hz: f64,
    pub distance_m: f64,
    pub path_loss_exponent: f64,
    /// One-sided noise power spectral density, W/Hz.
    pub noise_psd_w_per_hz: f64,
    pub bandwidth_hz: f64,
    /// Transmit power during beam alignment, W.
    pub ba_power_w: f64,
    /// Maximum data-phase transmit power, W.
    pub max_data_power_w: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("carrier_frequency_hz", self.carrier_frequency_hz),
            ("distance_m", self.distance_m),
            ("path_loss_exponent", self.path_loss_exponent),
            ("noise_psd_w_per_hz", self.noise_psd_w_per_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("ba_power_w", self.ba_power_w),
            ("max_data_power_w", self.max_data_power_w),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidLink(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if self.path_loss_exponent < 1.0 {
            return Err(Error::InvalidLink(format!(
                "path_loss_exponent must be >= 1, got {}",
                self.path_loss_exponent
            )));
        }
        Ok(())
    }

    /// Free-space style path loss `(4 pi d f_c / c)^eta`, linear.
    pub fn path_loss(&self) -> f64 {
        path_loss(self)
    }

    /// Noise power over the full bandwidth, `N0 * W`.
    pub fn noise_power_w(&self) -> f64 {
        self.noise_psd_w_per_hz * self.bandwidth_hz
    }
}

/// Free-space style path loss `(4 pi d f_c / c)^eta`, linear.
pub fn path_loss(link: &LinkBudget) -> f64 {
    let base =
        4.0 * std::f64::consts::PI * link.distance_m * link.carrier_frequency_hz / SPEED_OF_LIGHT;
    base.powf(link.path_loss_exponent)
}

/// Inverse-CDF exponential sample: `-ln(1 - u) / rate` for `u` in [0, 1).
#[inline]
pub fn exponential_from_uniform(u: f64, rate: f64) -> f64 {
    -(-u).ln_1p() / rate
}

/// Feedback for a given uniform draw. Aligned arms have rate `nu`, others rate 1.
#[inline]
pub fn feedback_from_uniform(u: f64, aligned: bool, nu: Nu) -> f64 {
    let rate = if aligned { nu.get() } else { 1.0 };
    exponential_from_uniform(u, rate)
}

/// Log-density of a feedback value: `ln nu - nu*y` when aligned, `-y` otherwise.
pub fn feedback_log_likelihood(y: f64, aligned: bool, nu: Nu) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::NegativeFeedback(y));
    }
    Ok(if aligned { nu.ln() - nu.get() * y } else { -y })
}

/// Hidden true sector plus the feedback law, owning its random stream.
#[derive(Debug, Clone)]
pub struct SectoredEnvironment<R> {
    num_arms: usize,
    true_sector: usize,
    nu: Nu,
    rng: R,
}

impl<R: Rng> SectoredEnvironment<R> {
    pub fn new(num_arms: usize, true_sector: usize, nu: Nu, rng: R) -> Result<Self> {
        if num_arms < 2 {
            return Err(Error::TooFewArms {
                required: 2,
                got: num_arms,
            });
        }
        if true_sector >= num_arms {
            return Err(Error::ArmOutOfRange {
                arm: true_sector,
                num_arms,
            });
        }
        Ok(SectoredEnvironment {
            num_arms,
            true_sector,
            nu,
            rng,
        })
    }

    /// Draws the true sector from `prior` with a single uniform, then builds the environment.
    pub fn with_prior(prior: &[f64], nu: Nu, mut rng: R) -> Result<Self> {
        let u: f64 = rng.random();
        let sector = crate::preference::sample_index(prior, u);
        Self::new(prior.len(), sector, nu, rng)
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn true_sector(&self) -> usize {
        self.true_sector
    }

    pub fn nu(&self) -> Nu {
        self.nu
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }

    pub fn into_rng(self) -> R {
        self.rng
    }

    /// Samples normalized feedback for `scanned_arm`, consuming exactly one uniform.
    pub fn sample_feedback(&mut self, scanned_arm: usize) -> Result<f64> {
        if scanned_arm >= self.num_arms {
            return Err(Error::ArmOutOfRange {
                arm: scanned_arm,
                num_arms: self.num_arms,
            });
        }
        let u: f64 = self.rng.random();
        Ok(feedback_from_uniform(
            u,
            scanned_arm == self.true_sector,
            self.nu,
        ))
    }
}
