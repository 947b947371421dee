//! Closed-form link statistics for a clipped Gaussian drive through the
//! dead-time-limited counter, and the metrics derived from them.
//!
//! With `a = tau/N`, `s = a psi1`, `c = a psi2`, the unclipped mean count is
//! `T (psi1 x + psi2) e^{-c - s x}`. Every moment reduces to Gaussian integrals
//! of `e^{-c - s x} phi(x) = e^{-c + s^2/2} phi(x + s)` over the clipping band,
//! plus constant contributions from the two clipped tails. The second moment
//! uses the same integrals with `(c, s)` doubled.
//!
//! All closed forms are evaluated in [`Dd`]: the distortion variance is a
//! difference of moments that agree to as many as eleven digits.

use log::warn;

use crate::dd::Dd;
use crate::ofdm::{average_tx_power, subcarrier_variance, ClippingConfig};
use crate::spad::{mean_count, var_count, RateCoeffs, SpadParams};
use crate::special::q_function;
use crate::{Error, Result};

/// Everything the closed forms depend on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatingPoint {
    pub spad: SpadParams,
    pub clip: ClippingConfig,
    pub coeffs: RateCoeffs,
    pub fft_size: usize,
}

impl OperatingPoint {
    pub fn new(spad: SpadParams, clip: ClippingConfig, zeta: f64, fft_size: usize) -> Result<Self> {
        spad.validate()?;
        let coeffs = RateCoeffs::new(&spad, zeta, &clip)?;
        Ok(OperatingPoint { spad, clip, coeffs, fft_size })
    }

    /// Operating point whose channel loss gives average received power `p_rx`.
    pub fn at_received_power(spad: SpadParams, clip: ClippingConfig, p_rx: f64, fft_size: usize) -> Result<Self> {
        spad.validate()?;
        let coeffs = RateCoeffs::for_received_power(&spad, p_rx, &clip)?;
        Ok(OperatingPoint { spad, clip, coeffs, fft_size })
    }

    /// `zeta * P_tx`.
    pub fn received_power(&self) -> f64 {
        self.coeffs.zeta * average_tx_power(&self.clip)
    }

    /// Incident rate for the unclipped normalized amplitude `x`.
    #[inline]
    pub fn rate(&self, x: f64) -> f64 {
        self.coeffs.rate_at_amplitude(self.clip.clip_sample(x))
    }

    /// Mean count as a function of the unclipped amplitude.
    #[inline]
    pub fn mean_count_at(&self, x: f64) -> f64 {
        mean_count(self.rate(x), &self.spad)
    }

    /// Count variance as a function of the unclipped amplitude.
    #[inline]
    pub fn var_count_at(&self, x: f64) -> f64 {
        var_count(self.rate(x), &self.spad)
    }

    /// Scale of the gain factor, `psi1 T`.
    pub fn gain_scale(&self) -> f64 {
        self.coeffs.psi1 * self.spad.sample_duration
    }
}

/// Gain factor, mean and second moment of the distorted mean count.
#[derive(Clone, Copy, Debug)]
struct Moments {
    alpha: Dd,
    mean: Dd,
    second: Dd,
}

fn q_dd(x: Dd) -> Dd {
    Dd::erfc(x * Dd::FRAC_1_SQRT_2) * 0.5
}

fn pdf_dd(x: Dd) -> Dd {
    (x.sqr() * -0.5).exp() * Dd::FRAC_1_SQRT_2PI
}

/// Exponential tilt `e^{-c - s x}` applied to the standard normal density.
#[derive(Clone, Copy)]
struct Tilt {
    c: Dd,
    s: Dd,
}

impl Tilt {
    /// `e^{-c - s k} phi(k) = e^{-c + s^2/2} phi(k + s)`.
    fn dens(&self, k: Dd) -> Dd {
        (-self.c - self.s * k - k.sqr() * 0.5).exp() * Dd::FRAC_1_SQRT_2PI
    }

    /// `sqrt(2 pi) dens(k) Q(|u|) / phi(u)` with `u = k + s`, i.e.
    /// `e^{-c+s^2/2} Q(|u|)` without forming the possibly huge prefactor.
    fn scaled_tail(&self, k: Dd) -> Dd {
        let u = (k + self.s).abs();
        Dd::SQRT_2PI * self.dens(k) * Dd::erfcx(u * Dd::FRAC_1_SQRT_2) * 0.5
    }

    /// `e^{-c + s^2/2} [Q(kb + s) - Q(kt + s)]`.
    fn band(&self, kb: Dd, kt: Dd) -> Dd {
        let (ub, ut) = (kb + self.s, kt + self.s);
        if ub.hi >= 0.0 {
            self.scaled_tail(kb) - self.scaled_tail(kt)
        } else if ut.hi < 0.0 {
            self.scaled_tail(kt) - self.scaled_tail(kb)
        } else {
            // ub < 0 forces s < |kb| <= c/s, so the prefactor is at most 1.
            let pre = (-self.c + self.s.sqr() * 0.5).exp();
            pre - self.scaled_tail(kb) - self.scaled_tail(kt)
        }
    }
}

fn moments(op: &OperatingPoint) -> Moments {
    let t = Dd::from(op.spad.sample_duration);
    let a = Dd::from(op.spad.dead_time) / Dd::from(op.spad.n_pixels);
    let psi1 = Dd::from(op.coeffs.psi1);
    let psi2 = Dd::from(op.coeffs.psi2);
    let kb = Dd::from(op.clip.kappa_b);
    let kt = Dd::from(op.clip.kappa_t);
    let s = psi1 * a;
    let c = psi2 * a;

    let mu = |k: Dd| {
        let lam = psi1 * k + psi2;
        t * lam * (-(lam * a)).exp()
    };
    let (mu_b, mu_t) = (mu(kb), mu(kt));
    let (q_below, q_above) = (q_dd(-kb), q_dd(kt));

    let one = Tilt { c, s };
    let (db, dt, band) = (one.dens(kb), one.dens(kt), one.band(kb, kt));
    let alpha = psi1 * t * ((Dd::ONE + s.sqr() - c) * band + s * (dt - db));
    let mean = mu_b * q_below + mu_t * q_above + t * (psi1 * (db - dt) + (psi2 - psi1 * s) * band);

    let two = Tilt { c: c * 2.0, s: s * 2.0 };
    let (db2, dt2, band2) = (two.dens(kb), two.dens(kt), two.band(kb, kt));
    let p11 = psi1.sqr();
    let edge = |k: Dd| p11 * k - p11 * s * 2.0 + psi1 * psi2 * 2.0;
    let d = psi1 * s * 2.0 - psi2;
    let interior = t.sqr() * (edge(kb) * db2 - edge(kt) * dt2 + (p11 + d.sqr()) * band2);
    let second = mu_t.sqr() * q_above + mu_b.sqr() * q_below + interior;

    Moments { alpha, mean, second }
}

/// Bussgang gain `E{x mu(x)}`.
pub fn gain_factor(op: &OperatingPoint) -> f64 {
    moments(op).alpha.to_f64()
}

/// `E{mu(x)}`.
pub fn mean_distorted(op: &OperatingPoint) -> f64 {
    moments(op).mean.to_f64()
}

/// `E{mu(x)^2}`.
pub fn second_moment_distorted(op: &OperatingPoint) -> f64 {
    moments(op).second.to_f64()
}

fn distortion_from(m: &Moments) -> Result<f64> {
    let var = m.second - m.mean.sqr() - m.alpha.sqr();
    checked_variance(var.to_f64(), m.second.to_f64())
}

fn checked_variance(value: f64, scale: f64) -> Result<f64> {
    if value >= 0.0 {
        return Ok(value);
    }
    if value >= -1e-9 * scale.abs() {
        warn!("clamping distortion variance {value:e} (second moment {scale:e}) to zero");
        return Ok(0.0);
    }
    Err(Error::NegativeVariance { value, scale })
}

/// Distortion noise variance `E{mu^2} - E{mu}^2 - alpha^2`.
pub fn distortion_noise_var(op: &OperatingPoint) -> Result<f64> {
    distortion_from(&moments(op))
}

fn shot_from(op: &OperatingPoint, m: &Moments) -> f64 {
    let t = Dd::from(op.spad.sample_duration);
    let tau = Dd::from(op.spad.dead_time);
    let k = (t * 2.0 - tau) * tau / (Dd::from(op.spad.n_pixels) * t.sqr());
    (m.mean - k * m.second).to_f64()
}

/// Frequency-domain shot noise variance, equal to the average time-domain
/// count variance `E{sigma_a^2(x)}`. Since `sigma_a^2 = mu - k mu^2` with
/// `k = (2T - tau) tau / (N T^2)`, this is `E{mu} - k E{mu^2}`.
pub fn shot_noise_var_freq(op: &OperatingPoint) -> f64 {
    shot_from(op, &moments(op))
}

/// Ideal-counter gain `psi1 T [Q(kb) - Q(kt)]`.
pub fn ideal_gain_factor(op: &OperatingPoint) -> f64 {
    let (kb, kt) = (Dd::from(op.clip.kappa_b), Dd::from(op.clip.kappa_t));
    (Dd::from(op.coeffs.psi1) * Dd::from(op.spad.sample_duration) * (q_dd(kb) - q_dd(kt))).to_f64()
}

/// Ideal-counter distortion variance: pure clipping noise.
pub fn ideal_distortion_noise_var(op: &OperatingPoint) -> Result<f64> {
    let (kb, kt) = (Dd::from(op.clip.kappa_b), Dd::from(op.clip.kappa_t));
    let scale = (Dd::from(op.coeffs.psi1) * Dd::from(op.spad.sample_duration)).sqr();
    let (qb, qt, qnb) = (q_dd(kb), q_dd(kt), q_dd(-kb));
    let (fb, ft) = (pdf_dd(kb), pdf_dd(kt));
    let inner = qb - qt + kb * fb - kt * ft;
    let edges = kb.sqr() * qnb + kt.sqr() * qt - (qb - qt).sqr();
    let mean = fb - ft + kb * qnb + kt * qt;
    let var = scale * (inner + edges - mean.sqr());
    checked_variance(var.to_f64(), (scale * (inner + kb.sqr() * qnb + kt.sqr() * qt)).to_f64())
}

/// Ideal-counter shot noise variance `E{lambda} T`.
pub fn ideal_shot_noise_var(op: &OperatingPoint) -> f64 {
    let (kb, kt) = (Dd::from(op.clip.kappa_b), Dd::from(op.clip.kappa_t));
    let (psi1, psi2) = (Dd::from(op.coeffs.psi1), Dd::from(op.coeffs.psi2));
    let t = Dd::from(op.spad.sample_duration);
    let v = (psi1 * kb + psi2) * t - psi1 * kb * q_dd(kb) * t + psi1 * kt * q_dd(kt) * t + psi1 * t * pdf_dd(kb)
        - psi1 * t * pdf_dd(kt);
    v.to_f64()
}

/// SDNR, SSNR and their harmonic combination (linear ratios).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Snr {
    pub sdnr: f64,
    pub ssnr: f64,
    pub snr: f64,
}

impl Snr {
    pub fn from_parts(alpha: f64, var_wd: f64, var_ws: f64, fft_size: usize) -> Self {
        let signal = alpha * alpha * subcarrier_variance(fft_size);
        let ratio = |noise: f64| if noise > 0.0 { signal / noise } else { f64::INFINITY };
        let (sdnr, ssnr) = (ratio(var_wd), ratio(var_ws));
        let snr = if signal == 0.0 { 0.0 } else { 1.0 / (1.0 / sdnr + 1.0 / ssnr) };
        Snr { sdnr, ssnr, snr }
    }
}

pub fn snr(op: &OperatingPoint) -> Result<Snr> {
    let m = moments(op);
    Ok(Snr::from_parts(m.alpha.to_f64(), distortion_from(&m)?, shot_from(op, &m), op.fft_size))
}

/// Square-QAM bit error approximation for order `m >= 4` at SNR `gamma`.
pub fn ber_mqam(gamma: f64, m: u32) -> f64 {
    assert!(m >= 4 && m.is_power_of_two(), "QAM order must be a power of two >= 4, got {m}");
    let mf = m as f64;
    let root = mf.sqrt();
    let norm = root * mf.log2();
    let arg = (3.0 * gamma.max(0.0) / (mf - 1.0)).sqrt();
    4.0 * (root - 1.0) / norm * q_function(arg) + 4.0 * (root - 2.0) / norm * q_function(3.0 * arg)
}

/// `log2(1 + gamma)`.
pub fn se_upper(gamma: f64) -> f64 {
    gamma.ln_1p() / std::f64::consts::LN_2
}

/// Analytic metrics for one operating point and modulation order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkMetrics {
    pub alpha: f64,
    pub var_wd: f64,
    pub var_ws: f64,
    pub sdnr: f64,
    pub ssnr: f64,
    pub snr: f64,
    pub ber: f64,
    pub se_upper: f64,
}

pub fn link_metrics(op: &OperatingPoint, order: u32) -> Result<LinkMetrics> {
    let m = moments(op);
    let alpha = m.alpha.to_f64();
    let var_wd = distortion_from(&m)?;
    let var_ws = shot_from(op, &m);
    let s = Snr::from_parts(alpha, var_wd, var_ws, op.fft_size);
    Ok(LinkMetrics {
        alpha,
        var_wd,
        var_ws,
        sdnr: s.sdnr,
        ssnr: s.ssnr,
        snr: s.snr,
        ber: ber_mqam(s.snr, order),
        se_upper: se_upper(s.snr),
    })
}

/// Independent numerical evaluation of the same expectations by adaptive
/// quadrature against the standard normal density.
pub mod oracle {
    use super::OperatingPoint;
    use crate::quad::{integrate_piecewise, Tolerance};
    use crate::special::std_normal_pdf;

    fn breakpoints(op: &OperatingPoint) -> Vec<f64> {
        let (kb, kt) = (op.clip.kappa_b, op.clip.kappa_t);
        let s = op.coeffs.psi1 * op.spad.dead_time / op.spad.n_pixels;
        let mut pts = vec![kb, kt];
        // The tilted density peaks at -s with width 1; the mean count can
        // also have a sharp edge of width 1/s just above kb.
        for d in [-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0] {
            pts.push(-s + d);
        }
        if s > 0.0 {
            for w in [0.3, 1.0, 3.0, 10.0, 30.0, 100.0] {
                pts.push(kb + w / s);
            }
        }
        pts.retain(|p| p.is_finite() && *p >= kb && *p <= kt);
        pts.push(f64::NEG_INFINITY);
        pts.push(f64::INFINITY);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn expect(op: &OperatingPoint, g: impl Fn(f64) -> f64) -> f64 {
        let tol = Tolerance { abs_tol: 0.0, rel_tol: 1e-13, max_intervals: 20_000 };
        integrate_piecewise(|x| g(x) * std_normal_pdf(x), &breakpoints(op), tol).value
    }

    pub fn gain_factor(op: &OperatingPoint) -> f64 {
        expect(op, |x| x * op.mean_count_at(x))
    }

    pub fn mean_distorted(op: &OperatingPoint) -> f64 {
        expect(op, |x| op.mean_count_at(x))
    }

    pub fn second_moment_distorted(op: &OperatingPoint) -> f64 {
        expect(op, |x| op.mean_count_at(x).powi(2))
    }

    /// `E{(mu - m - alpha x)^2}` for the supplied mean and gain. The
    /// integrand has no cancellation and the result is stationary in both
    /// `mean` and `alpha` at their true values.
    pub fn distortion_noise_var(op: &OperatingPoint, mean: f64, alpha: f64) -> f64 {
        expect(op, |x| (op.mean_count_at(x) - mean - alpha * x).powi(2))
    }

    pub fn shot_noise_var_freq(op: &OperatingPoint) -> f64 {
        expect(op, |x| op.var_count_at(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spad::photon_rate;

    fn op(p_rx: f64, kappa: f64) -> OperatingPoint {
        let clip = ClippingConfig::symmetric(kappa, 0.0, 10e-3).unwrap();
        OperatingPoint::at_received_power(SpadParams::reference(), clip, p_rx, 1024).unwrap()
    }

    fn ideal(p_rx: f64, kappa: f64) -> OperatingPoint {
        let clip = ClippingConfig::symmetric(kappa, 0.0, 10e-3).unwrap();
        OperatingPoint::at_received_power(SpadParams::reference().ideal(), clip, p_rx, 1024).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn received_power_round_trip() {
        let o = op(3e-7, 3.2);
        assert!(rel(o.received_power(), 3e-7) < 1e-14);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for (p, k) in [(1e-9, 1.0), (1e-8, 3.2), (1e-7, 6.0), (3e-6, 2.0), (1e-4, 4.0), (1e-3, 1.5)] {
            let o = op(p, k);
            let a = gain_factor(&o);
            let m = mean_distorted(&o);
            assert!(rel(a, oracle::gain_factor(&o)) < 1e-8, "alpha at ({p},{k})");
            assert!(rel(m, oracle::mean_distorted(&o)) < 1e-8, "mean at ({p},{k})");
            assert!(rel(second_moment_distorted(&o), oracle::second_moment_distorted(&o)) < 1e-8);
            let wd = distortion_noise_var(&o).unwrap();
            assert!(rel(wd, oracle::distortion_noise_var(&o, m, a)) < 1e-8, "wd at ({p},{k})");
            assert!(rel(shot_noise_var_freq(&o), oracle::shot_noise_var_freq(&o)) < 1e-8);
        }
    }

    #[test]
    fn ideal_receiver_reductions() {
        for (p, k) in [(1e-9, 1.0), (1e-6, 3.2), (1e-3, 6.0)] {
            let o = ideal(p, k);
            assert!(rel(gain_factor(&o), ideal_gain_factor(&o)) < 1e-12);
            assert!(rel(distortion_noise_var(&o).unwrap(), ideal_distortion_noise_var(&o).unwrap()) < 1e-12);
            assert!(rel(shot_noise_var_freq(&o), ideal_shot_noise_var(&o)) < 1e-12);
        }
    }

    #[test]
    fn unclipped_ideal_limits() {
        let o = ideal(1e-6, 40.0);
        let t = o.spad.sample_duration;
        let (psi1, psi2) = (o.coeffs.psi1, o.coeffs.psi2);
        assert!(rel(mean_distorted(&o), psi2 * t) < 1e-14);
        assert!(rel(second_moment_distorted(&o), t * t * (psi1 * psi1 + psi2 * psi2)) < 1e-14);
        assert!(rel(gain_factor(&o), psi1 * t) < 1e-14);
        assert!(distortion_noise_var(&o).unwrap() <= 1e-20 * second_moment_distorted(&o));
    }

    #[test]
    fn degenerate_clipping_collapses_to_one_level() {
        // Both the clipping band and the power range shrink to a point.
        let clip = ClippingConfig::new(-0.5 + 1e-6, -0.5, 2e-3, 2e-3 * (1.0 + 1e-6)).unwrap();
        let o = OperatingPoint::new(SpadParams::reference(), clip, 1e-4, 1024).unwrap();
        let level = mean_count(photon_rate(2e-3, &o.coeffs).unwrap(), &o.spad);
        assert!(rel(mean_distorted(&o), level) < 2e-6);
    }

    #[test]
    fn alpha_changes_sign_near_saturation() {
        assert!(gain_factor(&op(0.3e-6, 3.2)) > 0.0);
        assert!(gain_factor(&op(3e-6, 3.2)) < 0.0);
    }

    #[test]
    fn snr_identities() {
        for p in [1e-8, 1e-6, 1e-4] {
            let s = snr(&op(p, 3.2)).unwrap();
            assert!(rel(1.0 / s.snr, 1.0 / s.sdnr + 1.0 / s.ssnr) < 1e-12);
        }
        let s = Snr::from_parts(2.0, 0.0, 1.0, 1024);
        assert_eq!(s.snr, s.ssnr);
        assert_eq!(Snr::from_parts(0.0, 1.0, 1.0, 1024).snr, 0.0);
        let a = snr(&ideal(1e-8, 3.2)).unwrap().sdnr;
        let b = snr(&ideal(1e-4, 3.2)).unwrap().sdnr;
        assert!(rel(a, b) < 1e-10);
    }

    #[test]
    fn ber_formula() {
        assert_eq!(ber_mqam(f64::INFINITY, 16), 0.0);
        // Both Q terms equal 1/2 at zero SNR.
        assert!((ber_mqam(0.0, 4) - 0.5).abs() < 1e-15);
        assert!((ber_mqam(0.0, 16) - 0.625).abs() < 1e-15);
        for m in [4, 8, 16, 32, 64] {
            let mut prev = ber_mqam(0.0, m);
            for i in 1..200 {
                let b = ber_mqam(i as f64 * 0.5, m);
                assert!(b < prev, "M={m}");
                prev = b;
            }
        }
        assert_eq!(se_upper(0.0), 0.0);
        assert_eq!(se_upper(1.0), 1.0);
        assert!((se_upper(63.0) - 6.0).abs() < 1e-15);
    }
}
