//! Monte Carlo transmission chain, analytic sweeps, clipping-level search and
//! adaptive modulation.
//!
//! Randomness is keyed, never shared: a grid point draws its seed from
//! `(master_seed, point index)` and every OFDM frame of that point runs on
//! its own ChaCha stream. Per-frame statistics are reduced in frame order,
//! so serial and parallel execution produce bit-identical results.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::analytics::{self, ber_mqam, link_metrics, se_upper, LinkMetrics, OperatingPoint};
use crate::ofdm::{data_subcarriers, fill_frame, subcarrier_variance, ClippingConfig, QamConstellation, Transforms};
use crate::parallel::{map_indexed, Execution};
use crate::spad::{mean_count, var_count, SpadParams};
use crate::{Error, Result};

/// Default number of OFDM frames per grid point (about 10^6 samples at
/// `K = 1024`).
pub const DEFAULT_FRAMES_PER_POINT: usize = 2000;
/// FEC threshold used for adaptive modulation.
pub const DEFAULT_BER_TARGET: f64 = 3e-3;
/// A point is unusable once `|alpha| < SATURATION_EPSILON * psi1 * T`.
pub const SATURATION_EPSILON: f64 = 1e-6;

/// SplitMix64 finalizer: decorrelated seed for work item `index`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Coefficient used by the receiver's single-tap equalizer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Equalizer {
    /// Least-squares estimate from the known transmitted samples.
    #[default]
    DataAided,
    /// Closed-form gain factor.
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McOptions {
    /// Draw Gaussian counts; otherwise the receiver outputs the mean count.
    pub shot_noise: bool,
    pub equalizer: Equalizer,
    pub execution: Execution,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { shot_noise: true, equalizer: Equalizer::DataAided, execution: Execution::Parallel }
    }
}

/// Empirical statistics of one simulated operating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McResult {
    /// Bussgang regression of the received counts on the drive signal.
    pub alpha_hat: f64,
    /// Same regression on the noiseless mean counts.
    pub alpha_hat_distortion: f64,
    /// Mean of `|Y_d - alpha_hat_distortion X|^2` over data subcarriers.
    pub var_wd: f64,
    /// Mean of `|Y - Y_d|^2` over data subcarriers.
    pub var_ws: f64,
    /// `corr(x, y - alpha x)` with the closed-form `alpha`.
    pub bussgang_corr: f64,
    pub samples: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// `sqrt(p (1 - p) / bits)` at the empirical rate.
    pub ber_stderr: f64,
    /// Equalizer gain fell below the saturation threshold.
    pub saturated: bool,
}

struct Chain<'a> {
    op: &'a OperatingPoint,
    qam: QamConstellation,
    transforms: Transforms,
    seed: u64,
    shot_noise: bool,
}

struct Buffers {
    labels: Vec<u32>,
    symbols: Vec<Complex64>,
    spectrum: Vec<Complex64>,
    work: Vec<Complex64>,
    scratch: Vec<Complex64>,
    x: Vec<f64>,
    mu: Vec<f64>,
    y: Vec<f64>,
}

impl<'a> Chain<'a> {
    fn buffers(&self) -> Buffers {
        let k = self.transforms.fft_size();
        let zero = Complex64::new(0.0, 0.0);
        Buffers {
            labels: vec![0; data_subcarriers(k)],
            symbols: vec![zero; data_subcarriers(k)],
            spectrum: vec![zero; k],
            work: vec![zero; k],
            scratch: vec![zero; self.transforms.scratch_len()],
            x: vec![0.0; k],
            mu: vec![0.0; k],
            y: vec![0.0; k],
        }
    }

    /// Regenerates frame `index` from its own stream: symbols, time signal,
    /// mean counts and received counts.
    fn synthesize(&self, index: usize, b: &mut Buffers) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let gain = subcarrier_variance(self.transforms.fft_size()).sqrt();
        let order = self.qam.order();
        for (label, sym) in b.labels.iter_mut().zip(b.symbols.iter_mut()) {
            *label = rng.random_range(0..order);
            *sym = self.qam.point(*label) * gain;
        }
        fill_frame(&b.symbols, &mut b.spectrum);
        b.work.copy_from_slice(&b.spectrum);
        self.transforms.inverse_in_place(&mut b.work, &mut b.scratch);

        let (clip, coeffs, spad) = (&self.op.clip, &self.op.coeffs, &self.op.spad);
        for n in 0..b.x.len() {
            let x = b.work[n].re;
            let power = clip.optical_sample(clip.clip_sample(x)).max(0.0);
            let rate = coeffs.c_s * power + coeffs.c_n;
            let mu = mean_count(rate, spad);
            b.x[n] = x;
            b.mu[n] = mu;
            b.y[n] = if self.shot_noise {
                let z: f64 = rng.sample(StandardNormal);
                mu + var_count(rate, spad).max(0.0).sqrt() * z
            } else {
                mu
            };
        }
    }

    fn forward(&self, samples: &[f64], work: &mut [Complex64], scratch: &mut [Complex64]) {
        for (w, &v) in work.iter_mut().zip(samples) {
            *w = Complex64::new(v, 0.0);
        }
        self.transforms.forward_in_place(work, scratch);
    }
}

#[derive(Clone, Copy, Default)]
struct PassA {
    sxy: f64,
    sxx: f64,
    sxmu: f64,
    sx: f64,
    // Residual e = y - alpha x - mean with closed-form alpha and mean.
    sxe: f64,
    se: f64,
    see: f64,
    shot: f64,
}

impl PassA {
    fn add(mut self, o: &PassA) -> PassA {
        self.sxy += o.sxy;
        self.sxx += o.sxx;
        self.sxmu += o.sxmu;
        self.sx += o.sx;
        self.sxe += o.sxe;
        self.se += o.se;
        self.see += o.see;
        self.shot += o.shot;
        self
    }
}

#[derive(Clone, Copy, Default)]
struct PassB {
    dist: f64,
    errors: u64,
}

/// Runs `n_frames` OFDM frames through transmitter, SPAD array and receiver.
///
/// Pass one estimates the Bussgang gains and noise powers; pass two replays
/// the identical frames, equalizes and counts bit errors.
pub fn run_mc_point(op: &OperatingPoint, order: u32, n_frames: usize, seed: u64, opts: McOptions) -> Result<McResult> {
    if n_frames == 0 {
        return Err(Error::invalid("frames_per_point", "must be at least 1"));
    }
    let chain = Chain {
        op,
        qam: QamConstellation::new(order)?,
        transforms: Transforms::new(op.fft_size)?,
        seed,
        shot_noise: opts.shot_noise,
    };
    let k = op.fft_size;
    let used = data_subcarriers(k);
    let alpha_an = analytics::gain_factor(op);
    let mean_an = analytics::mean_distorted(op);

    let pass_a = map_indexed(n_frames, opts.execution, |f| {
        let mut b = chain.buffers();
        chain.synthesize(f, &mut b);
        let mut s = PassA::default();
        for n in 0..k {
            let (x, y, mu) = (b.x[n], b.y[n], b.mu[n]);
            let e = y - alpha_an * x - mean_an;
            s.sxy += x * y;
            s.sxx += x * x;
            s.sxmu += x * mu;
            s.sx += x;
            s.sxe += x * e;
            s.se += e;
            s.see += e * e;
        }
        let noise: Vec<f64> = b.y.iter().zip(&b.mu).map(|(y, m)| y - m).collect();
        chain.forward(&noise, &mut b.work, &mut b.scratch);
        s.shot = b.work[1..=used].iter().map(|c| c.norm_sqr()).sum();
        s
    })
    .iter()
    .fold(PassA::default(), |acc, s| acc.add(s));

    let samples = (n_frames * k) as u64;
    let subcarriers = (n_frames * used) as f64;
    let alpha_hat = pass_a.sxy / pass_a.sxx;
    let alpha_hat_distortion = pass_a.sxmu / pass_a.sxx;
    let var_ws = pass_a.shot / subcarriers;
    let nf = samples as f64;
    let var_x = pass_a.sxx / nf - (pass_a.sx / nf).powi(2);
    let var_e = pass_a.see / nf - (pass_a.se / nf).powi(2);
    let cov = pass_a.sxe / nf - (pass_a.sx / nf) * (pass_a.se / nf);
    let bussgang_corr = cov / (var_x * var_e).sqrt();

    let alpha_eq = match opts.equalizer {
        Equalizer::DataAided => alpha_hat,
        Equalizer::Analytic => alpha_an,
    };
    let saturated = !(alpha_eq.abs() >= SATURATION_EPSILON * op.gain_scale());
    let bits_per_frame = (used * chain.qam.bits_per_symbol()) as u64;
    let inv = 1.0 / (alpha_eq * subcarrier_variance(k).sqrt());

    let pass_b = map_indexed(n_frames, opts.execution, |f| {
        let mut b = chain.buffers();
        chain.synthesize(f, &mut b);
        let mut s = PassB::default();
        chain.forward(&b.mu, &mut b.work, &mut b.scratch);
        s.dist = (1..=used).map(|i| (b.work[i] - b.spectrum[i] * alpha_hat_distortion).norm_sqr()).sum();
        if !saturated {
            chain.forward(&b.y, &mut b.work, &mut b.scratch);
            for i in 1..=used {
                let label = chain.qam.decide(b.work[i] * inv);
                s.errors += (label ^ b.labels[i - 1]).count_ones() as u64;
            }
        }
        s
    })
    .iter()
    .fold(PassB::default(), |acc, s| PassB { dist: acc.dist + s.dist, errors: acc.errors + s.errors });

    let (bits, ber, ber_stderr) = if saturated {
        (0, 0.5, 0.0)
    } else {
        let bits = bits_per_frame * n_frames as u64;
        let p = pass_b.errors as f64 / bits as f64;
        (bits, p, (p * (1.0 - p) / bits as f64).sqrt())
    };
    Ok(McResult {
        alpha_hat,
        alpha_hat_distortion,
        var_wd: pass_b.dist / subcarriers,
        var_ws,
        bussgang_corr,
        samples,
        bits,
        bit_errors: pass_b.errors,
        ber,
        ber_stderr,
        saturated,
    })
}

/// Receiver and transmitter settings shared by every point of a sweep;
/// clipping is symmetric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkTemplate {
    pub spad: SpadParams,
    pub p_min: f64,
    pub p_max: f64,
    pub fft_size: usize,
}

impl Default for LinkTemplate {
    fn default() -> Self {
        LinkTemplate { spad: SpadParams::reference(), p_min: 0.0, p_max: 10e-3, fft_size: 1024 }
    }
}

impl LinkTemplate {
    pub fn ideal(self) -> Self {
        LinkTemplate { spad: self.spad.ideal(), ..self }
    }

    pub fn point(&self, p_rx: f64, kappa: f64) -> Result<OperatingPoint> {
        let clip = ClippingConfig::symmetric(kappa, self.p_min, self.p_max)?;
        OperatingPoint::at_received_power(self.spad, clip, p_rx, self.fft_size)
    }
}

/// Mean and variance of the count for constant illumination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentPoint {
    pub p_rx: f64,
    pub mean: f64,
    pub var: f64,
    pub mean_ideal: f64,
    pub var_ideal: f64,
}

/// Count moments versus received power, for the given receiver and its
/// dead-time-free counterpart.
pub fn sweep_moments(spad: &SpadParams, powers: &[f64]) -> Vec<MomentPoint> {
    let ideal = spad.ideal();
    powers
        .iter()
        .map(|&p| {
            let rate = spad.incident_rate(p);
            MomentPoint {
                p_rx: p,
                mean: mean_count(rate, spad),
                var: var_count(rate, spad),
                mean_ideal: mean_count(rate, &ideal),
                var_ideal: var_count(rate, &ideal),
            }
        })
        .collect()
}

fn check_grid(grid: &[f64], name: &'static str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid(name));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::UnsortedGrid(name));
    }
    Ok(())
}

/// Best symmetric clipping level on a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaChoice {
    pub kappa: f64,
    pub snr: f64,
}

/// Exhaustive search for the clipping level maximizing the analytic SNR;
/// the first (smallest) maximizer wins ties.
pub fn optimize_kappa(template: &LinkTemplate, p_rx: f64, kappa_grid: &[f64]) -> Result<KappaChoice> {
    if kappa_grid.is_empty() {
        return Err(Error::EmptyGrid("kappa"));
    }
    let mut best: Option<KappaChoice> = None;
    for &kappa in kappa_grid {
        let snr = analytics::snr(&template.point(p_rx, kappa)?)?.snr;
        if best.is_none_or(|b| snr > b.snr) {
            best = Some(KappaChoice { kappa, snr });
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// Highest spectral efficiency `log2 M` whose BER meets `ber_target`, or 0.
pub fn adaptive_se(snr: f64, orders: &[u32], ber_target: f64) -> f64 {
    orders
        .iter()
        .filter(|&&m| ber_mqam(snr, m) <= ber_target)
        .map(|&m| (m as f64).log2())
        .fold(0.0, f64::max)
}

/// Clipping policy for [`se_point`].
#[derive(Clone, Copy, Debug)]
pub enum KappaPolicy<'a> {
    Fixed(f64),
    Optimized(&'a [f64]),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SePoint {
    pub p_rx: f64,
    pub kappa: f64,
    pub snr: f64,
    pub se_qam: f64,
    pub se_upper: f64,
}

/// Adaptive-modulation SE at one received power.
pub fn se_point(template: &LinkTemplate, p_rx: f64, policy: KappaPolicy<'_>, orders: &[u32], ber_target: f64) -> Result<SePoint> {
    let choice = match policy {
        KappaPolicy::Fixed(kappa) => KappaChoice { kappa, snr: analytics::snr(&template.point(p_rx, kappa)?)?.snr },
        KappaPolicy::Optimized(grid) => optimize_kappa(template, p_rx, grid)?,
    };
    Ok(SePoint {
        p_rx,
        kappa: choice.kappa,
        snr: choice.snr,
        se_qam: adaptive_se(choice.snr, orders, ber_target),
        se_upper: se_upper(choice.snr),
    })
}

/// Sweep axes and simulation settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub template: LinkTemplate,
    /// Received powers in W, ascending.
    pub received_power_grid: Vec<f64>,
    /// Symmetric clipping levels, ascending.
    pub kappa_grid: Vec<f64>,
    pub mod_orders: Vec<u32>,
    pub frames_per_point: usize,
    pub master_seed: u64,
    pub ber_target: f64,
    /// Run the Monte Carlo chain at every point.
    pub simulate: bool,
    pub mc: McOptions,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            template: LinkTemplate::default(),
            received_power_grid: log_space(1e-9, 1e-3, 61),
            kappa_grid: vec![2.0, 3.2, 4.0],
            mod_orders: vec![16],
            frames_per_point: DEFAULT_FRAMES_PER_POINT,
            master_seed: 1,
            ber_target: DEFAULT_BER_TARGET,
            simulate: false,
            mc: McOptions::default(),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        check_grid(&self.received_power_grid, "received power")?;
        check_grid(&self.kappa_grid, "kappa")?;
        if self.mod_orders.is_empty() {
            return Err(Error::EmptyGrid("modulation order"));
        }
        for &m in &self.mod_orders {
            QamConstellation::new(m)?;
        }
        if self.frames_per_point == 0 {
            return Err(Error::invalid("frames_per_point", "must be at least 1"));
        }
        self.template.spad.validate()
    }
}

/// One `(power, kappa, order)` grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub p_rx: f64,
    pub kappa: f64,
    pub order: u32,
    pub analytic: LinkMetrics,
    pub mc: Option<McResult>,
    /// Adaptive-modulation SE at this point over all of the sweep's orders.
    pub se_qam: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Evaluates every grid point (power-major, then kappa, then order).
pub fn sweep_all(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let (np, nk, nm) = (spec.received_power_grid.len(), spec.kappa_grid.len(), spec.mod_orders.len());
    let inner = McOptions { execution: Execution::Serial, ..spec.mc };
    let rows = map_indexed(np * nk * nm, spec.mc.execution, |idx| -> Result<SweepRow> {
        let p_rx = spec.received_power_grid[idx / (nk * nm)];
        let kappa = spec.kappa_grid[(idx / nm) % nk];
        let order = spec.mod_orders[idx % nm];
        let op = spec.template.point(p_rx, kappa)?;
        let analytic = link_metrics(&op, order)?;
        let mc = if spec.simulate {
            Some(run_mc_point(&op, order, spec.frames_per_point, derive_seed(spec.master_seed, idx as u64), inner)?)
        } else {
            None
        };
        let se_qam = adaptive_se(analytic.snr, &spec.mod_orders, spec.ber_target);
        Ok(SweepRow { p_rx, kappa, order, analytic, mc, se_qam })
    });
    Ok(SweepResult { rows: rows.into_iter().collect::<Result<_>>()? })
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
        }
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct() {
        let s: Vec<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        let mut u = s.clone();
        u.sort_unstable();
        u.dedup();
        assert_eq!(u.len(), s.len());
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn grids() {
        let g = log_space(1e-9, 1e-3, 7);
        assert_eq!(g.len(), 7);
        assert!((g[3] / 1e-6 - 1.0).abs() < 1e-12);
        assert_eq!(lin_space(1.0, 2.0, 3), vec![1.0, 1.5, 2.0]);
        assert!(check_grid(&[], "x").is_err());
        assert_eq!(check_grid(&[2.0, 1.0], "x"), Err(Error::UnsortedGrid("x")));
    }

    #[test]
    fn ideal_unclipped_noiseless_chain_is_error_free() {
        let t = LinkTemplate::default().ideal();
        for m in crate::ofdm::SUPPORTED_ORDERS {
            let op = t.point(1e-6, 10.0).unwrap();
            let opts = McOptions { shot_noise: false, ..McOptions::default() };
            let r = run_mc_point(&op, m, 20, 3, opts).unwrap();
            assert_eq!(r.bit_errors, 0, "M={m}");
            assert_eq!(r.ber, 0.0);
            assert!(!r.saturated);
        }
    }

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let op = LinkTemplate::default().point(2e-7, 3.2).unwrap();
        let par = run_mc_point(&op, 16, 16, 99, McOptions::default()).unwrap();
        let ser = run_mc_point(&op, 16, 16, 99, McOptions { execution: Execution::Serial, ..McOptions::default() }).unwrap();
        assert_eq!(par.alpha_hat.to_bits(), ser.alpha_hat.to_bits());
        assert_eq!(par.var_ws.to_bits(), ser.var_ws.to_bits());
        assert_eq!(par.var_wd.to_bits(), ser.var_wd.to_bits());
        assert_eq!(par.bit_errors, ser.bit_errors);
    }

    #[test]
    fn gain_estimate_tracks_closed_form() {
        let op = LinkTemplate::default().point(1e-7, 3.2).unwrap();
        let r = run_mc_point(&op, 16, 200, 5, McOptions::default()).unwrap();
        let a = analytics::gain_factor(&op);
        assert!(((r.alpha_hat - a) / a).abs() < 0.02);
        let ws = analytics::shot_noise_var_freq(&op);
        assert!(((r.var_ws - ws) / ws).abs() < 0.02);
    }

    #[test]
    fn negative_gain_still_demodulates() {
        // Past saturation the gain is negative yet the link works.
        let op = LinkTemplate::default().point(3e-6, 4.0).unwrap();
        assert!(analytics::gain_factor(&op) < 0.0);
        let r = run_mc_point(&op, 4, 20, 1, McOptions::default()).unwrap();
        assert!(r.alpha_hat < 0.0);
        assert!(r.ber < 1e-2, "{}", r.ber);
    }

    #[test]
    fn kappa_search_prefers_first_maximum() {
        let t = LinkTemplate::default();
        let c = optimize_kappa(&t, 1e-7, &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        for k in [1.0, 2.0, 3.0, 4.0, 5.0] {
            assert!(analytics::snr(&t.point(1e-7, k).unwrap()).unwrap().snr <= c.snr);
        }
        let tie = optimize_kappa(&t, 1e-7, &[3.0, 3.0 + 1e-300]).unwrap();
        assert_eq!(tie.kappa, 3.0);
        assert_eq!(optimize_kappa(&t, 1e-7, &[]), Err(Error::EmptyGrid("kappa")));
    }

    #[test]
    fn adaptive_se_limits() {
        let orders = [4, 8, 16, 32, 64];
        assert_eq!(adaptive_se(f64::INFINITY, &orders, 3e-3), 6.0);
        assert_eq!(adaptive_se(0.0, &orders, 3e-3), 0.0);
        let mut prev = 0.0;
        for i in 0..400 {
            let se = adaptive_se(10f64.powf(i as f64 / 100.0), &orders, 3e-3);
            assert!(se >= prev);
            assert!(se <= se_upper(10f64.powf(i as f64 / 100.0)));
            prev = se;
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let spec = SweepSpec {
            received_power_grid: vec![1e-8, 1e-6],
            kappa_grid: vec![3.2],
            frames_per_point: 4,
            simulate: true,
            ..SweepSpec::default()
        };
        let a = sweep_all(&spec).unwrap();
        let b = sweep_all(&SweepSpec { mc: McOptions { execution: Execution::Serial, ..spec.mc }, ..spec.clone() }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2);
    }

    #[test]
    fn moments_peak_at_saturation() {
        let spad = SpadParams::reference();
        let pts = sweep_moments(&spad, &log_space(1e-9, 1e-3, 601));
        let peak = pts.iter().max_by(|a, b| a.mean.total_cmp(&b.mean)).unwrap();
        assert!(peak.p_rx > 1e-6 / 1.5 && peak.p_rx < 1.5e-6);
        assert!(pts.iter().all(|p| p.var <= p.mean));
        assert!(pts.iter().all(|p| p.mean_ideal == p.var_ideal));
    }
}
