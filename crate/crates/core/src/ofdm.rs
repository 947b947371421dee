//! DCO-OFDM signal path: QAM mapping, Hermitian framing, unitary transforms,
//! clipping, scaling and DC bias, single-tap equalization.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::special::{q_function, std_normal_pdf};
use crate::{Error, Result};

/// Modulation orders supported by [`QamConstellation`].
pub const SUPPORTED_ORDERS: [u32; 5] = [4, 8, 16, 32, 64];

/// Variance of the populated subcarriers that makes the time-domain signal
/// unit variance: `K / (K - 2)`.
#[inline]
pub fn subcarrier_variance(fft_size: usize) -> f64 {
    fft_size as f64 / (fft_size as f64 - 2.0)
}

/// Number of data-carrying subcarriers, `K/2 - 1`.
#[inline]
pub fn data_subcarriers(fft_size: usize) -> usize {
    fft_size / 2 - 1
}

fn check_fft_size(fft_size: usize) -> Result<()> {
    if fft_size < 4 || !fft_size.is_power_of_two() {
        return Err(Error::FftSize(fft_size));
    }
    Ok(())
}

#[inline]
fn gray(n: u32) -> u32 {
    n ^ (n >> 1)
}

// Quasi-Gray labels for the 32-point cross, row-major over the 6x6 grid of
// I (outer) and Q (inner) levels -5..5; `NONE` marks the removed corners.
// 52 nearest-neighbour pairs, 56 differing bits in total.
const NONE: u8 = u8::MAX;
const CROSS32: [[u8; 6]; 6] = [
    [NONE, 13, 5, 4, 12, NONE],
    [11, 15, 7, 6, 14, 10],
    [3, 19, 23, 22, 18, 2],
    [1, 17, 21, 20, 16, 0],
    [9, 25, 29, 28, 24, 8],
    [NONE, 27, 31, 30, 26, NONE],
];

/// Unit-energy QAM constellation with Gray (or, for the 32-point cross,
/// quasi-Gray) labelling.
///
/// Points live on the odd-integer grid `{-(n-1), .., n-1}` per axis before
/// normalization. 4, 16 and 64 are square; 8 is a 4x2 rectangle; 32 is the
/// 6x6 grid with its corners removed.
#[derive(Clone)]
pub struct QamConstellation {
    order: u32,
    bits: usize,
    /// Point for each label.
    points: Vec<Complex64>,
    /// Label at each grid cell, I-major; `None` for unused cells.
    grid: Vec<Option<u32>>,
    levels_i: usize,
    levels_q: usize,
    /// Distance unit: normalized point = scale * odd-integer coordinate.
    scale: f64,
}

impl fmt::Debug for QamConstellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QamConstellation").field("order", &self.order).finish()
    }
}

impl QamConstellation {
    pub fn new(order: u32) -> Result<Self> {
        let (levels_i, levels_q) = match order {
            4 => (2, 2),
            8 => (4, 2),
            16 => (4, 4),
            32 => (6, 6),
            64 => (8, 8),
            _ => return Err(Error::UnsupportedOrder(order)),
        };
        let bits = order.trailing_zeros() as usize;
        let mut grid = vec![None; levels_i * levels_q];
        let mut coords = vec![(0i32, 0i32); order as usize];
        for ii in 0..levels_i {
            for iq in 0..levels_q {
                let label = if order == 32 {
                    match CROSS32[ii][iq] {
                        NONE => continue,
                        l => l as u32,
                    }
                } else {
                    let bits_q = levels_q.trailing_zeros();
                    (gray(ii as u32) << bits_q) | gray(iq as u32)
                };
                grid[ii * levels_q + iq] = Some(label);
                coords[label as usize] = (2 * ii as i32 - (levels_i as i32 - 1), 2 * iq as i32 - (levels_q as i32 - 1));
            }
        }
        let energy: f64 = coords.iter().map(|&(i, q)| (i * i + q * q) as f64).sum::<f64>() / order as f64;
        let scale = 1.0 / energy.sqrt();
        let points = coords.iter().map(|&(i, q)| Complex64::new(i as f64 * scale, q as f64 * scale)).collect();
        Ok(QamConstellation { order, bits, points, grid, levels_i, levels_q, scale })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits
    }

    /// Constellation points indexed by label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    #[inline]
    pub fn point(&self, label: u32) -> Complex64 {
        self.points[label as usize]
    }

    pub fn is_square(&self) -> bool {
        self.levels_i == self.levels_q && self.order != 32
    }

    /// Minimum-distance decision, returning the label.
    pub fn decide(&self, y: Complex64) -> u32 {
        let slice = |v: f64, n: usize| -> usize {
            let idx = ((v / self.scale + (n as f64 - 1.0)) * 0.5).round();
            idx.clamp(0.0, (n - 1) as f64) as usize
        };
        let ii = slice(y.re, self.levels_i);
        let iq = slice(y.im, self.levels_q);
        if let Some(label) = self.grid[ii * self.levels_q + iq] {
            return label;
        }
        // Removed cross corner: the nearest valid point is one step inward
        // along either axis.
        let step_i = if ii == 0 { ii + 1 } else { ii - 1 };
        let step_q = if iq == 0 { iq + 1 } else { iq - 1 };
        let a = self.grid[step_i * self.levels_q + iq].expect("cross corner neighbour exists");
        let b = self.grid[ii * self.levels_q + step_q].expect("cross corner neighbour exists");
        if (y - self.point(a)).norm_sqr() <= (y - self.point(b)).norm_sqr() {
            a
        } else {
            b
        }
    }

    /// Grid-adjacent label pairs (distance one grid step), for Gray checks.
    pub fn adjacent_pairs(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for ii in 0..self.levels_i {
            for iq in 0..self.levels_q {
                let Some(a) = self.grid[ii * self.levels_q + iq] else { continue };
                if ii + 1 < self.levels_i {
                    if let Some(b) = self.grid[(ii + 1) * self.levels_q + iq] {
                        out.push((a, b));
                    }
                }
                if iq + 1 < self.levels_q {
                    if let Some(b) = self.grid[ii * self.levels_q + iq + 1] {
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }
}

fn bits_to_label(chunk: &[u8]) -> u32 {
    chunk.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as u32)
}

/// Maps MSB-first bit groups onto constellation points, scaled to the
/// subcarrier variance `K/(K-2)` of an FFT of size `fft_size`.
pub fn qam_modulate(bits: &[u8], qam: &QamConstellation, fft_size: usize) -> Result<Vec<Complex64>> {
    let m = qam.bits_per_symbol();
    if !bits.len().is_multiple_of(m) {
        return Err(Error::BitLength { len: bits.len(), bits_per_symbol: m });
    }
    let gain = subcarrier_variance(fft_size).sqrt();
    Ok(bits.chunks(m).map(|c| qam.point(bits_to_label(c)) * gain).collect())
}

/// Inverse of [`qam_modulate`]: minimum-distance decisions, emitted as bits.
pub fn qam_demodulate(symbols: &[Complex64], qam: &QamConstellation, fft_size: usize) -> Vec<u8> {
    let m = qam.bits_per_symbol();
    let inv_gain = 1.0 / subcarrier_variance(fft_size).sqrt();
    let mut out = Vec::with_capacity(symbols.len() * m);
    for &s in symbols {
        let label = qam.decide(s * inv_gain);
        out.extend((0..m).rev().map(|k| ((label >> k) & 1) as u8));
    }
    out
}

/// Places `K/2 - 1` symbols on subcarriers `1..K/2`, leaves DC and Nyquist
/// empty and mirrors the conjugates onto the upper half.
pub fn build_frame(symbols: &[Complex64], fft_size: usize) -> Result<Vec<Complex64>> {
    check_fft_size(fft_size)?;
    let expected = data_subcarriers(fft_size);
    if symbols.len() != expected {
        return Err(Error::SymbolCount { expected, got: symbols.len() });
    }
    let mut spectrum = vec![Complex64::new(0.0, 0.0); fft_size];
    fill_frame(symbols, &mut spectrum);
    Ok(spectrum)
}

#[inline]
pub(crate) fn fill_frame(symbols: &[Complex64], spectrum: &mut [Complex64]) {
    let k = spectrum.len();
    spectrum[0] = Complex64::new(0.0, 0.0);
    spectrum[k / 2] = Complex64::new(0.0, 0.0);
    for (i, &s) in symbols.iter().enumerate() {
        spectrum[i + 1] = s;
        spectrum[k - 1 - i] = s.conj();
    }
}

/// Largest deviation from Hermitian symmetry, relative to the largest bin.
pub fn hermitian_mismatch(spectrum: &[Complex64]) -> f64 {
    let k = spectrum.len();
    let peak = spectrum.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let mut worst = spectrum[0].im.abs().max(spectrum[k / 2].im.abs());
    for i in 1..k / 2 {
        worst = worst.max((spectrum[i] - spectrum[k - i].conj()).norm());
    }
    worst / peak
}

/// Planned unitary transforms for one FFT size. Cheap to clone and share
/// across threads.
#[derive(Clone)]
pub struct Transforms {
    fft_size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    norm: f64,
}

impl fmt::Debug for Transforms {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transforms").field("fft_size", &self.fft_size).finish()
    }
}

impl Transforms {
    pub fn new(fft_size: usize) -> Result<Self> {
        check_fft_size(fft_size)?;
        let mut planner = FftPlanner::new();
        Ok(Transforms {
            fft_size,
            forward: planner.plan_fft_forward(fft_size),
            inverse: planner.plan_fft_inverse(fft_size),
            norm: 1.0 / (fft_size as f64).sqrt(),
        })
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    /// Scratch buffer length required by the `*_in_place` methods.
    pub fn scratch_len(&self) -> usize {
        self.forward.get_inplace_scratch_len().max(self.inverse.get_inplace_scratch_len())
    }

    /// `x[n] = K^{-1/2} sum_k X[k] e^{+2 pi j nk/K}` for a Hermitian spectrum.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Result<Vec<f64>> {
        if spectrum.len() != self.fft_size {
            return Err(Error::Length { expected: self.fft_size, got: spectrum.len() });
        }
        let mismatch = hermitian_mismatch(spectrum);
        if mismatch > 1e-9 {
            return Err(Error::NotHermitian(mismatch));
        }
        let mut buf = spectrum.to_vec();
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len()];
        self.inverse_in_place(&mut buf, &mut scratch);
        Ok(buf.iter().map(|c| c.re).collect())
    }

    /// Unnormalized-FFT-free inverse in place; the caller guarantees the
    /// Hermitian layout. The imaginary parts are left in `buf`.
    pub fn inverse_in_place(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
        for c in buf.iter_mut() {
            *c *= self.norm;
        }
    }

    /// `Y[k] = K^{-1/2} sum_n y[n] e^{-2 pi j nk/K}`.
    pub fn forward(&self, samples: &[f64]) -> Result<Vec<Complex64>> {
        if samples.len() != self.fft_size {
            return Err(Error::Length { expected: self.fft_size, got: samples.len() });
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len()];
        self.forward_in_place(&mut buf, &mut scratch);
        Ok(buf)
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
        for c in buf.iter_mut() {
            *c *= self.norm;
        }
    }
}

/// One-shot [`Transforms::inverse`].
pub fn inverse_transform(spectrum: &[Complex64]) -> Result<Vec<f64>> {
    Transforms::new(spectrum.len())?.inverse(spectrum)
}

/// One-shot [`Transforms::forward`].
pub fn forward_transform(samples: &[f64]) -> Result<Vec<Complex64>> {
    Transforms::new(samples.len())?.forward(samples)
}

/// Normalized clipping levels and the affine map onto the light source's
/// dynamic range `[p_min, p_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClippingConfig {
    pub kappa_t: f64,
    pub kappa_b: f64,
    /// Scaling factor in W per unit normalized amplitude.
    pub delta: f64,
    /// DC bias in W.
    pub p_bias: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl ClippingConfig {
    pub fn new(kappa_t: f64, kappa_b: f64, p_min: f64, p_max: f64) -> Result<Self> {
        if !(kappa_t.is_finite() && kappa_b.is_finite()) {
            return Err(Error::invalid("clipping level", "kappa_t and kappa_b must be finite"));
        }
        if kappa_b >= kappa_t {
            return Err(Error::invalid("clipping level", format!("kappa_b ({kappa_b}) must be below kappa_t ({kappa_t})")));
        }
        if !(p_min >= 0.0 && p_max > p_min && p_max.is_finite()) {
            return Err(Error::invalid("optical power range", format!("need 0 <= p_min < p_max, got [{p_min}, {p_max}]")));
        }
        let span = kappa_t - kappa_b;
        Ok(ClippingConfig {
            kappa_t,
            kappa_b,
            delta: (p_max - p_min) / span,
            p_bias: (p_min * kappa_t - p_max * kappa_b) / span,
            p_min,
            p_max,
        })
    }

    /// `kappa_t = -kappa_b = kappa`.
    pub fn symmetric(kappa: f64, p_min: f64, p_max: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::invalid("clipping level", format!("symmetric kappa must be positive, got {kappa}")));
        }
        Self::new(kappa, -kappa, p_min, p_max)
    }

    #[inline]
    pub fn clip_sample(&self, x: f64) -> f64 {
        x.clamp(self.kappa_b, self.kappa_t)
    }

    #[inline]
    pub fn optical_sample(&self, clipped: f64) -> f64 {
        self.delta * clipped + self.p_bias
    }
}

/// `x_c[n] = min(max(x[n], kappa_b), kappa_t)`.
pub fn clip(x: &[f64], cfg: &ClippingConfig) -> Vec<f64> {
    x.iter().map(|&v| cfg.clip_sample(v)).collect()
}

/// `x_t[n] = delta * x_c[n] + p_bias`.
pub fn scale_and_bias(clipped: &[f64], cfg: &ClippingConfig) -> Vec<f64> {
    clipped.iter().map(|&v| cfg.optical_sample(v)).collect()
}

/// Expected emitted optical power for a unit-variance Gaussian drive.
pub fn average_tx_power(cfg: &ClippingConfig) -> f64 {
    let (kt, kb) = (cfg.kappa_t, cfg.kappa_b);
    cfg.delta * (std_normal_pdf(kb) - std_normal_pdf(kt) + kt * q_function(kt) + kb * q_function(-kb)) + cfg.p_bias
}

/// One OFDM symbol through the transmitter.
#[derive(Clone, Debug)]
pub struct OfdmFrame {
    pub spectrum: Vec<Complex64>,
    pub time: Vec<f64>,
    pub clipped: Vec<f64>,
    /// Emitted optical power per sample, W.
    pub optical: Vec<f64>,
}

impl OfdmFrame {
    pub fn transmit(symbols: &[Complex64], cfg: &ClippingConfig, transforms: &Transforms) -> Result<Self> {
        let spectrum = build_frame(symbols, transforms.fft_size())?;
        let time = transforms.inverse(&spectrum)?;
        let clipped = clip(&time, cfg);
        let optical = scale_and_bias(&clipped, cfg);
        Ok(OfdmFrame { spectrum, time, clipped, optical })
    }

    pub fn fft_size(&self) -> usize {
        self.spectrum.len()
    }
}

/// Least-squares Bussgang gain `sum x y / sum x^2`.
pub fn estimate_bussgang_gain(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Length { expected: x.len(), got: y.len() });
    }
    let (sxy, sxx) = x.iter().zip(y).fold((0.0, 0.0), |(sxy, sxx), (&a, &b)| (sxy + a * b, sxx + a * a));
    if sxx == 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok(sxy / sxx)
}

/// Single-tap equalization of the data subcarriers `1..K/2`. The DC bin,
/// which carries the mean count, is discarded.
pub fn equalize(spectrum: &[Complex64], alpha: f64, epsilon: f64) -> Result<Vec<Complex64>> {
    if !(alpha.abs() > epsilon) || !alpha.is_finite() {
        return Err(Error::Saturated { alpha, epsilon });
    }
    let k = spectrum.len();
    Ok(spectrum[1..k / 2].iter().map(|&y| y / alpha).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symbols(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn constellations_have_unit_energy_and_bijective_labels() {
        for m in SUPPORTED_ORDERS {
            let q = QamConstellation::new(m).unwrap();
            let e: f64 = q.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
            assert!((e - 1.0).abs() < 1e-12, "M={m} energy {e}");
            let mut seen = vec![false; m as usize];
            for label in 0..m {
                let back = q.decide(q.point(label));
                assert_eq!(back, label);
                seen[back as usize] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn rectangular_orders_are_gray() {
        for m in [4, 8, 16, 64] {
            let q = QamConstellation::new(m).unwrap();
            for (a, b) in q.adjacent_pairs() {
                assert_eq!((a ^ b).count_ones(), 1, "M={m} labels {a} {b}");
            }
        }
        let q = QamConstellation::new(32).unwrap();
        let pairs = q.adjacent_pairs();
        let flips: u32 = pairs.iter().map(|(a, b)| (a ^ b).count_ones()).sum();
        assert_eq!(pairs.len(), 52);
        assert_eq!(flips, 56);
    }

    #[test]
    fn qpsk_label_zero() {
        let q = QamConstellation::new(4).unwrap();
        let s = qam_modulate(&[0, 0], &q, 1024).unwrap();
        let unscaled = s[0] / subcarrier_variance(1024).sqrt();
        assert!((unscaled.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(q.decide(unscaled), 0);
    }

    #[test]
    fn sixteen_qam_uses_every_point_equally() {
        let q = QamConstellation::new(16).unwrap();
        let mut counts = [0usize; 16];
        for word in 0u32..(1 << 16) {
            let bits: Vec<u8> = (0..16).rev().map(|k| ((word >> k) & 1) as u8).collect();
            for s in qam_modulate(&bits, &q, 1024).unwrap() {
                counts[q.decide(s / subcarrier_variance(1024).sqrt()) as usize] += 1;
            }
        }
        assert!(counts.iter().all(|&c| c == 1 << 14));
    }

    #[test]
    fn modulation_errors() {
        assert_eq!(QamConstellation::new(12).unwrap_err(), Error::UnsupportedOrder(12));
        let q = QamConstellation::new(16).unwrap();
        assert!(matches!(qam_modulate(&[1, 0, 1], &q, 64), Err(Error::BitLength { len: 3, bits_per_symbol: 4 })));
    }

    #[test]
    fn noiseless_round_trip_is_error_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in SUPPORTED_ORDERS {
            let q = QamConstellation::new(m).unwrap();
            let n = 100_000 / q.bits_per_symbol() * q.bits_per_symbol();
            let bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
            let syms = qam_modulate(&bits, &q, 1024).unwrap();
            assert_eq!(qam_demodulate(&syms, &q, 1024), bits);
        }
    }

    #[test]
    fn hermitian_layout_for_k8() {
        let s = [Complex64::new(1.0, 2.0), Complex64::new(-3.0, 0.5), Complex64::new(0.0, -1.0)];
        let x = build_frame(&s, 8).unwrap();
        let want = [Complex64::new(0.0, 0.0), s[0], s[1], s[2], Complex64::new(0.0, 0.0), s[2].conj(), s[1].conj(), s[0].conj()];
        assert_eq!(x, want);
        assert!(build_frame(&s, 16).is_err());
        assert_eq!(build_frame(&[Complex64::new(0.0, 0.0); 3], 8).unwrap(), vec![Complex64::new(0.0, 0.0); 8]);
    }

    #[test]
    fn transforms_are_unitary_and_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = Transforms::new(1024).unwrap();
        let spec = build_frame(&random_symbols(&mut rng, 511), 1024).unwrap();
        let mut buf = spec.clone();
        let mut scratch = vec![Complex64::new(0.0, 0.0); t.scratch_len()];
        t.inverse_in_place(&mut buf, &mut scratch);
        assert!(buf.iter().all(|c| c.im.abs() < 1e-9));
        let x: Vec<f64> = buf.iter().map(|c| c.re).collect();
        let e_time: f64 = x.iter().map(|v| v * v).sum();
        let e_freq: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
        assert!((e_time / e_freq - 1.0).abs() < 1e-9);
        let back = t.forward(&x).unwrap();
        for (a, b) in back.iter().zip(&spec) {
            assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()));
        }
        assert_eq!(t.inverse(&vec![Complex64::new(0.0, 0.0); 1024]).unwrap(), vec![0.0; 1024]);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut spec = vec![Complex64::new(0.0, 0.0); 64];
        spec[3] = Complex64::new(1.0, 1.0);
        assert!(matches!(inverse_transform(&spec), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn unit_variance_time_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = QamConstellation::new(16).unwrap();
        let t = Transforms::new(1024).unwrap();
        let gain = subcarrier_variance(1024).sqrt();
        let (mut s2, mut n) = (0.0, 0usize);
        for _ in 0..1000 {
            let syms: Vec<Complex64> = (0..511).map(|_| q.point(rng.random_range(0..16)) * gain).collect();
            let x = t.inverse(&build_frame(&syms, 1024).unwrap()).unwrap();
            s2 += x.iter().map(|v| v * v).sum::<f64>();
            n += x.len();
        }
        assert!((s2 / n as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn clipping_and_bias() {
        let cfg = ClippingConfig::symmetric(3.2, 0.0, 10e-3).unwrap();
        assert_eq!(clip(&[0.0, 5.0, -5.0], &cfg), vec![0.0, 3.2, -3.2]);
        assert!((cfg.delta - 5e-3 / 3.2).abs() < 1e-18);
        assert!((cfg.p_bias - 5e-3).abs() < 1e-18);
        assert_eq!(average_tx_power(&cfg), cfg.p_bias);
        let bottom = scale_and_bias(&[cfg.kappa_b; 4], &cfg);
        assert!(bottom.iter().all(|&p| p.abs() < 1e-18));
        let asym = ClippingConfig::new(1.0, -2.0, 1e-3, 10e-3).unwrap();
        assert!((asym.delta * asym.kappa_b + asym.p_bias - asym.p_min).abs() < 1e-15);
        assert!((asym.delta * asym.kappa_t + asym.p_bias - asym.p_max).abs() < 1e-15);
        assert!(ClippingConfig::new(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn average_power_without_clipping_is_bias() {
        let cfg = ClippingConfig::new(40.0, -35.0, 0.0, 1.0).unwrap();
        assert!((average_tx_power(&cfg) / cfg.p_bias - 1.0).abs() < 1e-14);
    }

    #[test]
    fn average_power_matches_monte_carlo() {
        use rand_distr::{Distribution, StandardNormal};
        let cfg = ClippingConfig::new(1.0, -2.0, 0.0, 10e-3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 10_000_000;
        let sum: f64 = (0..n).map(|_| cfg.optical_sample(cfg.clip_sample(StandardNormal.sample(&mut rng)))).sum();
        let mc = sum / n as f64;
        assert!((mc / average_tx_power(&cfg) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bussgang_estimate_and_equalizer() {
        let x = [0.5, -1.0, 2.0, 0.25];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        assert_eq!(estimate_bussgang_gain(&x, &y).unwrap(), 3.0);
        assert_eq!(estimate_bussgang_gain(&[0.0; 4], &y), Err(Error::ZeroSignal));

        let s = [Complex64::new(1.0, -1.0), Complex64::new(0.5, 0.5), Complex64::new(-1.0, 0.0)];
        let spec = build_frame(&s, 8).unwrap();
        for alpha in [2.5, -0.7] {
            let y: Vec<Complex64> = spec.iter().map(|c| c * alpha).collect();
            let eq = equalize(&y, alpha, 1e-9).unwrap();
            for (a, b) in eq.iter().zip(&s) {
                assert!((a - b).norm() < 1e-15);
            }
        }
        assert!(matches!(equalize(&spec, 1e-12, 1e-9), Err(Error::Saturated { .. })));
    }
}
