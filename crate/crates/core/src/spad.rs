//! Passively quenched SPAD array: photon-rate mapping, dead-time-distorted
//! count statistics and the Gaussian count model.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::ofdm::ClippingConfig;
use crate::{Error, Result};

/// Planck constant, J s (exact SI value).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s (exact SI value).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Receiver and sampling parameters. `dead_time = 0` is the ideal photon
/// counter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpadParams {
    pub n_pixels: f64,
    /// Dead time, s.
    pub dead_time: f64,
    pub pde: f64,
    /// Dark count rate of the whole array, counts/s.
    pub dcr: f64,
    pub afterpulse: f64,
    pub crosstalk: f64,
    /// Background optical power at the array, W.
    pub background_power: f64,
    /// Operating wavelength, m.
    pub wavelength: f64,
    /// Sample duration, s.
    pub sample_duration: f64,
}

impl Default for SpadParams {
    fn default() -> Self {
        Self::reference()
    }
}

impl SpadParams {
    /// Reference receiver: 8192 pixels, 10 ns dead time, 20 ns samples at
    /// 450 nm.
    pub fn reference() -> Self {
        SpadParams {
            n_pixels: 8192.0,
            dead_time: 10e-9,
            pde: 0.35,
            dcr: 0.5e6,
            afterpulse: 0.0075,
            crosstalk: 0.025,
            background_power: 10e-9,
            wavelength: 450e-9,
            sample_duration: 20e-9,
        }
    }

    /// Same receiver with the dead time removed.
    pub fn ideal(self) -> Self {
        SpadParams { dead_time: 0.0, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, name: &'static str, reason: &str| if ok { Ok(()) } else { Err(Error::invalid(name, reason)) };
        check(self.n_pixels >= 1.0 && self.n_pixels.is_finite(), "n_pixels", "must be at least 1")?;
        check(self.dead_time >= 0.0 && self.dead_time.is_finite(), "dead_time", "must be non-negative")?;
        check(self.sample_duration > 0.0 && self.sample_duration.is_finite(), "sample_duration", "must be positive")?;
        check(self.sample_duration >= self.dead_time, "sample_duration", "sample_duration ≥ dead_time is required")?;
        check(self.pde > 0.0 && self.pde <= 1.0, "pde", "must lie in (0, 1]")?;
        check(self.dcr >= 0.0, "dcr", "must be non-negative")?;
        check((0.0..1.0).contains(&self.afterpulse), "afterpulse", "must be a probability")?;
        check((0.0..1.0).contains(&self.crosstalk), "crosstalk", "must be a probability")?;
        check(self.background_power >= 0.0, "background_power", "must be non-negative")?;
        check(self.wavelength > 0.0 && self.wavelength.is_finite(), "wavelength", "must be positive")?;
        Ok(())
    }

    /// `E_ph = h c / lambda`, J.
    pub fn photon_energy(&self) -> f64 {
        PLANCK * SPEED_OF_LIGHT / self.wavelength
    }

    /// Detected background photon rate `PDE * P_B / E_ph`.
    pub fn background_rate(&self) -> f64 {
        self.pde * self.background_power / self.photon_energy()
    }

    /// Afterpulsing and crosstalk rate multiplier.
    pub fn excess_factor(&self) -> f64 {
        1.0 + self.afterpulse + self.crosstalk
    }

    /// Incident rate for constant received power `power` (W) at the array.
    pub fn incident_rate(&self, power: f64) -> f64 {
        (self.pde * power / self.photon_energy() + self.dcr + self.background_rate()) * self.excess_factor()
    }

    /// Received power at which the incident rate reaches the saturation rate.
    pub fn saturation_power(&self) -> f64 {
        let signal_rate = self.saturation_rate() / self.excess_factor() - self.dcr - self.background_rate();
        signal_rate * self.photon_energy() / self.pde
    }

    /// `N_a / tau_d`, or `+inf` for the ideal counter.
    pub fn saturation_rate(&self) -> f64 {
        if self.dead_time == 0.0 {
            f64::INFINITY
        } else {
            self.n_pixels / self.dead_time
        }
    }

    /// Peak mean count `N_a T_s / (e tau_d)`.
    pub fn saturation_count(&self) -> f64 {
        if self.dead_time == 0.0 {
            f64::INFINITY
        } else {
            self.n_pixels * self.sample_duration / (std::f64::consts::E * self.dead_time)
        }
    }
}

/// Linear map from emitted optical power to incident photon rate, and its
/// composition with the clipping map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateCoeffs {
    /// Counts/s per W of emitted power (includes the channel loss).
    pub c_s: f64,
    /// Power-independent rate (dark counts plus background), counts/s.
    pub c_n: f64,
    /// `c_s * delta`: rate per unit normalized amplitude.
    pub psi1: f64,
    /// `c_s * p_bias + c_n`: rate at zero amplitude.
    pub psi2: f64,
    /// Channel loss.
    pub zeta: f64,
}

impl RateCoeffs {
    pub fn new(spad: &SpadParams, zeta: f64, clip: &ClippingConfig) -> Result<Self> {
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(Error::invalid("zeta", format!("channel loss must be positive, got {zeta}")));
        }
        let excess = spad.excess_factor();
        let c_s = spad.pde * zeta * excess / spad.photon_energy();
        let c_n = (spad.dcr + spad.background_rate()) * excess;
        let coeffs = RateCoeffs { c_s, c_n, psi1: c_s * clip.delta, psi2: c_s * clip.p_bias + c_n, zeta };
        if !(coeffs.psi1 > 0.0 && coeffs.psi2 > 0.0) {
            return Err(Error::invalid("rate coefficients", "psi1 and psi2 must be positive"));
        }
        Ok(coeffs)
    }

    /// Channel loss that yields average received power `p_rx` for the given
    /// clipping configuration.
    pub fn for_received_power(spad: &SpadParams, p_rx: f64, clip: &ClippingConfig) -> Result<Self> {
        let p_tx = crate::ofdm::average_tx_power(clip);
        if !(p_rx > 0.0) {
            return Err(Error::invalid("received power", format!("must be positive, got {p_rx}")));
        }
        Self::new(spad, p_rx / p_tx, clip)
    }

    /// Incident rate at the normalized (clipped) amplitude `x_c`.
    #[inline]
    pub fn rate_at_amplitude(&self, x_c: f64) -> f64 {
        self.psi1 * x_c + self.psi2
    }
}

/// `lambda_a = C_s x_t + C_n`.
pub fn photon_rate(x_t: f64, coeffs: &RateCoeffs) -> Result<f64> {
    if x_t < 0.0 {
        return Err(Error::NegativePower(x_t));
    }
    Ok(coeffs.c_s * x_t + coeffs.c_n)
}

/// Mean count per sample, `lambda T exp(-lambda tau / N)`.
#[inline]
pub fn mean_count(rate: f64, p: &SpadParams) -> f64 {
    rate * p.sample_duration * (-rate * p.dead_time / p.n_pixels).exp()
}

/// Count variance per sample at the array level.
#[inline]
pub fn var_count(rate: f64, p: &SpadParams) -> f64 {
    let (t, tau, n) = (p.sample_duration, p.dead_time, p.n_pixels);
    let e = (-rate * tau / n).exp();
    rate * t * e - rate * rate * t * tau / n * e * e * (2.0 - tau / t)
}

/// Same variance assembled from one pixel: `N_a (mu_s - mu_s^2 [1 - (1 - tau/T)^2])`.
pub fn var_count_single_pixel(rate: f64, p: &SpadParams) -> f64 {
    let mu_s = mean_count(rate, p) / p.n_pixels;
    let r = 1.0 - p.dead_time / p.sample_duration;
    p.n_pixels * (mu_s - mu_s * mu_s * (1.0 - r * r))
}

/// One Gaussian-approximation count draw. Not rounded and not clamped.
#[inline]
pub fn sample_count<R: Rng + ?Sized>(rate: f64, p: &SpadParams, rng: &mut R) -> f64 {
    let mean = mean_count(rate, p);
    let sd = var_count(rate, p).max(0.0).sqrt();
    let z: f64 = rng.sample(StandardNormal);
    mean + sd * z
}
