//! Channel loss models: VLC line of sight and FSO geometric loss with
//! Gamma-Gamma turbulence.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::bessel::ln_bessel_k;
use crate::special::{erf, ln_gamma};
use crate::{Error, Result};

/// Shape parameter returned when turbulence vanishes (`C_n^2 -> 0`), where
/// both shapes diverge.
pub const NO_TURBULENCE_SHAPE: f64 = 1e12;

/// Free-space optical link geometry and turbulence strength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FsoParams {
    /// Receiver aperture diameter, m.
    pub aperture: f64,
    /// Beam divergence angle, rad.
    pub divergence: f64,
    /// Link distance, m.
    pub distance: f64,
    /// Refraction structure parameter `C_n^2`, m^(-2/3).
    pub cn2: f64,
    /// Wavelength, m.
    pub wavelength: f64,
}

impl FsoParams {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("aperture", self.aperture),
            ("divergence", self.divergence),
            ("distance", self.distance),
            ("wavelength", self.wavelength),
        ] {
            if !(v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.cn2 >= 0.0 && self.cn2.is_finite()) {
            return Err(Error::invalid("cn2", format!("must be non-negative, got {}", self.cn2)));
        }
        Ok(())
    }

    /// Optical wavenumber `2 pi / lambda`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Rytov-type variance `chi^2 = 0.5 C_n^2 k^(7/6) L^(11/6)`.
    pub fn chi2(&self) -> f64 {
        0.5 * self.cn2 * self.wavenumber().powf(7.0 / 6.0) * self.distance.powf(11.0 / 6.0)
    }

    /// Aperture parameter `xi^2 = k omega^2 / (4 L)`.
    pub fn xi2(&self) -> f64 {
        self.wavenumber() * self.aperture * self.aperture / (4.0 * self.distance)
    }
}

/// `h_g = erf(sqrt(pi) omega / (2 sqrt(2) theta L))^2`.
pub fn fso_geometric_loss(p: &FsoParams) -> Result<f64> {
    p.validate()?;
    let v = PI.sqrt() * p.aperture / (2.0 * std::f64::consts::SQRT_2 * p.divergence * p.distance);
    Ok(erf(v).powi(2))
}

/// Gamma-Gamma shapes `(rho, beta)` for the link.
pub fn gamma_gamma_shape(p: &FsoParams) -> Result<(f64, f64)> {
    p.validate()?;
    gamma_gamma_shape_from(p.chi2(), p.xi2())
}

/// Gamma-Gamma shapes from `chi^2` and `xi^2` directly. The `rho` expression
/// carries `xi^2` only in its denominator, unlike `beta`.
pub fn gamma_gamma_shape_from(chi2: f64, xi2: f64) -> Result<(f64, f64)> {
    if !(chi2 >= 0.0 && xi2 >= 0.0 && chi2.is_finite() && xi2.is_finite()) {
        return Err(Error::invalid("turbulence", format!("chi^2 = {chi2}, xi^2 = {xi2} out of model range")));
    }
    let chi_12_5 = chi2.powf(1.2);
    let arg_rho = 0.49 * chi2 / (1.0 + 0.18 * xi2 + 0.56 * chi_12_5).powf(7.0 / 6.0);
    let arg_beta = 0.51 * chi2 * (1.0 + 0.69 * chi_12_5).powf(-5.0 / 6.0)
        / (1.0 + 0.9 * xi2 + 0.62 * xi2 * chi_12_5).powf(5.0 / 6.0);
    let shape = |arg: f64| -> Result<f64> {
        let denom = arg.exp_m1();
        if !(denom >= 0.0) || !denom.is_finite() {
            return Err(Error::invalid("turbulence", format!("shape exponent {arg} out of model range")));
        }
        Ok((1.0 / denom).min(NO_TURBULENCE_SHAPE))
    };
    Ok((shape(arg_rho)?, shape(arg_beta)?))
}

/// Gamma-Gamma density of unit mean, evaluated in the log domain.
pub fn gamma_gamma_pdf(x: f64, rho: f64, beta: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let half = 0.5 * (rho + beta);
    let ln_norm = std::f64::consts::LN_2 + half * (rho * beta).ln() - ln_gamma(rho) - ln_gamma(beta);
    if x == 0.0 {
        // Near zero the density behaves like x^(min(rho, beta) - 1).
        let low = rho.min(beta);
        let nu = (rho - beta).abs();
        return if low > 1.0 {
            0.0
        } else if low < 1.0 || nu == 0.0 {
            f64::INFINITY
        } else {
            (ln_norm + ln_gamma(nu) - std::f64::consts::LN_2 - 0.5 * nu * (rho * beta).ln()).exp()
        };
    }
    let z = 2.0 * (rho * beta * x).sqrt();
    (ln_norm + (half - 1.0) * x.ln() + ln_bessel_k(rho - beta, z)).exp()
}

/// Product of independent `Gamma(rho, 1/rho)` and `Gamma(beta, 1/beta)` draws.
pub fn sample_gamma_gamma<R: Rng + ?Sized>(rho: f64, beta: f64, rng: &mut R) -> Result<f64> {
    let a = Gamma::new(rho, 1.0 / rho).map_err(|e| Error::invalid("rho", e.to_string()))?;
    let b = Gamma::new(beta, 1.0 / beta).map_err(|e| Error::invalid("beta", e.to_string()))?;
    Ok(a.sample(rng) * b.sample(rng))
}

/// Radiant intensity pattern of the VLC source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadiationPattern {
    /// `(m + 1) cos^m(angle) / (2 pi)`.
    Lambertian { order: f64 },
    /// Fixed intensity, 1/sr.
    Constant(f64),
}

impl RadiationPattern {
    pub fn intensity(&self, angle: f64) -> f64 {
        match *self {
            RadiationPattern::Lambertian { order } => (order + 1.0) * angle.cos().max(0.0).powf(order) / (2.0 * PI),
            RadiationPattern::Constant(r) => r,
        }
    }
}

/// Visible light line-of-sight link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VlcParams {
    /// Detector area, m^2.
    pub detector_area: f64,
    /// Distance, m.
    pub distance: f64,
    /// Angle of emission, rad.
    pub radiance_angle: f64,
    /// Angle of incidence, rad.
    pub incidence_angle: f64,
    pub pattern: RadiationPattern,
    pub concentrator_gain: f64,
}

/// `zeta = A_d / L^2 R_o(upsilon_t) G(upsilon_r) cos(upsilon_r)`; zero at or
/// beyond grazing incidence.
pub fn vlc_los_loss(p: &VlcParams) -> Result<f64> {
    if !(p.detector_area > 0.0) || !(p.distance > 0.0) {
        return Err(Error::invalid("vlc geometry", "detector area and distance must be positive"));
    }
    let cos_r = p.incidence_angle.cos();
    if cos_r <= 1e-15 {
        return Ok(0.0);
    }
    Ok(p.detector_area / (p.distance * p.distance) * p.pattern.intensity(p.radiance_angle) * p.concentrator_gain * cos_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_piecewise, Tolerance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fso() -> FsoParams {
        FsoParams { aperture: 0.1, divergence: 1e-3, distance: 1000.0, cn2: 1e-14, wavelength: 1550e-9 }
    }

    #[test]
    fn geometric_loss() {
        let h = fso_geometric_loss(&FsoParams { wavelength: 450e-9, ..fso() }).unwrap();
        assert!((h / 0.004_986_933_984_668_362 - 1.0).abs() < 1e-13, "{h}");
        assert!((fso_geometric_loss(&FsoParams { aperture: 1e3, ..fso() }).unwrap() - 1.0).abs() < 1e-15);
        assert!(fso_geometric_loss(&FsoParams { distance: 1e12, ..fso() }).unwrap() < 1e-15);
        let near = fso_geometric_loss(&FsoParams { distance: 500.0, ..fso() }).unwrap();
        assert!(near > fso_geometric_loss(&fso()).unwrap());
    }

    #[test]
    fn shapes_match_direct_evaluation() {
        let (rho, beta) = gamma_gamma_shape_from(0.2, 1.0).unwrap();
        assert!((rho / 12.882_815_617_339_107 - 1.0).abs() < 1e-13);
        assert!((beta / 18.337_500_379_638_9 - 1.0).abs() < 1e-13);
        let (rho, beta) = gamma_gamma_shape(&fso()).unwrap();
        assert!((rho / 85.127_387_934_282_58 - 1.0).abs() < 1e-12);
        assert!((beta / 175.226_948_572_810_4 - 1.0).abs() < 1e-12);
        let calm = gamma_gamma_shape(&FsoParams { cn2: 0.0, ..fso() }).unwrap();
        assert_eq!(calm, (NO_TURBULENCE_SHAPE, NO_TURBULENCE_SHAPE));
        assert!(gamma_gamma_shape_from(-1.0, 1.0).is_err());
    }

    #[test]
    fn pdf_reference_values() {
        for (x, want) in [(0.8, 0.512_959_203_406_208_9), (2.5, 0.072_024_309_239_631_7)] {
            let got = gamma_gamma_pdf(x, 4.2, 1.7);
            assert!((got / want - 1.0).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(gamma_gamma_pdf(0.0, 4.2, 1.7), 0.0);
        assert_eq!(gamma_gamma_pdf(0.0, 0.6, 3.0), f64::INFINITY);
        let at_one = gamma_gamma_pdf(0.0, 1.0, 3.0);
        assert!((at_one / gamma_gamma_pdf(1e-10, 1.0, 3.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn pdf_normalization_and_mean() {
        let tol = Tolerance { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 4000 };
        for (rho, beta) in [(4.2, 1.7), (12.88, 18.34), (2.5, 2.5), (85.1, 175.2)] {
            let area = integrate_piecewise(|x| gamma_gamma_pdf(x, rho, beta), &[0.0, 1.0, 4.0, f64::INFINITY], tol);
            let mean = integrate_piecewise(|x| x * gamma_gamma_pdf(x, rho, beta), &[0.0, 1.0, 4.0, f64::INFINITY], tol);
            assert!((area.value - 1.0).abs() < 1e-6, "({rho},{beta}) area {}", area.value);
            assert!((mean.value - 1.0).abs() < 1e-6, "({rho},{beta}) mean {}", mean.value);
        }
    }

    #[test]
    fn sampler_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 1_000_000;
        let m: f64 = (0..n).map(|_| sample_gamma_gamma(4.2, 1.7, &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((m - 1.0).abs() < 0.01);
        assert!(sample_gamma_gamma(0.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn vlc_loss() {
        let p = VlcParams {
            detector_area: 1e-4,
            distance: 2.0,
            radiance_angle: 0.0,
            incidence_angle: 0.0,
            pattern: RadiationPattern::Lambertian { order: 1.0 },
            concentrator_gain: 1.0,
        };
        let z = vlc_los_loss(&p).unwrap();
        assert!((z / 7.957_747_154_594_767e-6 - 1.0).abs() < 1e-14);
        let far = vlc_los_loss(&VlcParams { distance: 4.0, ..p }).unwrap();
        assert!((far / (z / 4.0) - 1.0).abs() < 1e-14);
        assert_eq!(vlc_los_loss(&VlcParams { incidence_angle: PI / 2.0, ..p }).unwrap(), 0.0);
        let c = vlc_los_loss(&VlcParams { pattern: RadiationPattern::Constant(0.5), ..p }).unwrap();
        assert!((c - 1e-4 / 4.0 * 0.5).abs() < 1e-20);
    }
}
