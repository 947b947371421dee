//! One function per subcommand; each writes a CSV table to `out`.

use std::io::Write;

use anyhow::Result;
use spad_ofdm::analytics::{self, oracle};
use spad_ofdm::experiments::{
    derive_seed, optimize_kappa, se_point, sweep_all, sweep_moments, KappaPolicy, LinkTemplate, SweepSpec,
};
use spad_ofdm::parallel::{map_slice, Execution};

use crate::config::RunConfig;
use crate::csv_out::{db, num, write_sweep, write_table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Count mean and variance versus received power.
    Moments,
    /// Bussgang gain versus received power.
    Gain,
    /// Signal-to-distortion-noise ratio.
    Sdnr,
    /// Signal-to-shot-noise ratio.
    Ssnr,
    /// Overall SNR.
    Snr,
    /// Best clipping level per received power, SPAD and ideal receivers.
    OptimizeKappa,
    /// Analytic (and optionally simulated) BER.
    Ber,
    /// Adaptive-modulation spectral efficiency.
    Se,
    /// Closed form vs quadrature vs Monte Carlo cross-checks.
    Validate,
}

/// What a run produced; `failures` is only ever non-zero for `validate`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub rows: usize,
    pub failures: usize,
}

pub fn run(cmd: Command, cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        Command::Moments => moments(cfg, out),
        Command::Gain | Command::Sdnr | Command::Ssnr | Command::Snr | Command::Ber => sweep(cfg, out),
        Command::OptimizeKappa => kappa(cfg, out),
        Command::Se => se(cfg, out),
        Command::Validate => validate(cfg, out),
    }
}

fn moments(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let points = sweep_moments(&cfg.spad, &cfg.power_grid());
    let rows = points.iter().map(|m| vec![num(m.p_rx), num(m.mean), num(m.var), num(m.mean_ideal), num(m.var_ideal)]);
    write_table(out, &["p_rx_w", "mean_count", "var_count", "mean_count_ideal", "var_count_ideal"], rows)?;
    Ok(Outcome { rows: points.len(), failures: 0 })
}

fn sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let result = sweep_all(&cfg.sweep_spec())?;
    write_sweep(&result, out)?;
    Ok(Outcome { rows: result.rows.len(), failures: 0 })
}

fn kappa(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let grid = cfg.kappa_search_grid();
    let (spad, ideal) = (cfg.template(), cfg.template().ideal());
    let rows = map_slice(&cfg.power_grid(), Execution::Parallel, |&p| -> Result<Vec<String>> {
        let (a, b) = (optimize_kappa(&spad, p, &grid)?, optimize_kappa(&ideal, p, &grid)?);
        Ok(vec![num(p), num(a.kappa), num(db(a.snr)), num(b.kappa), num(db(b.snr))])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let n = rows.len();
    write_table(out, &["p_rx_w", "kappa_opt", "snr_opt_db", "kappa_opt_ideal", "snr_opt_ideal_db"], rows)?;
    Ok(Outcome { rows: n, failures: 0 })
}

fn se(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let grid = cfg.kappa_search_grid();
    let template = cfg.template();
    let per_power = map_slice(&cfg.power_grid(), Execution::Parallel, |&p| -> Result<Vec<Vec<String>>> {
        let policies = std::iter::once(("optimized", KappaPolicy::Optimized(&grid)))
            .chain(cfg.kappa.iter().map(|&k| ("fixed", KappaPolicy::Fixed(k))));
        policies
            .map(|(name, policy)| {
                let s = se_point(&template, p, policy, &cfg.mod_orders, cfg.ber_target)?;
                Ok(vec![num(p), name.to_string(), num(s.kappa), num(db(s.snr)), num(s.se_qam), num(s.se_upper)])
            })
            .collect()
    });
    let rows: Vec<Vec<String>> = per_power.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let n = rows.len();
    write_table(out, &["p_rx_w", "policy", "kappa", "snr_db", "se_qam", "se_upper"], rows)?;
    Ok(Outcome { rows: n, failures: 0 })
}

struct Check {
    name: &'static str,
    p_rx: f64,
    kappa: f64,
    order: Option<u32>,
    value: f64,
    reference: f64,
    error: f64,
    tolerance: f64,
}

impl Check {
    fn relative(name: &'static str, p_rx: f64, kappa: f64, value: f64, reference: f64, tolerance: f64) -> Self {
        let error = if value == reference { 0.0 } else { (value - reference).abs() / reference.abs() };
        Check { name, p_rx, kappa, order: None, value, reference, error, tolerance }
    }

    fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

fn unit_interval(seed: u64, index: u64) -> f64 {
    (derive_seed(seed, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn quadrature_checks(cfg: &RunConfig, template: &LinkTemplate) -> Result<Vec<Check>> {
    let (lo, hi) = (cfg.p_rx_min.log10(), cfg.p_rx_max.log10());
    let idx: Vec<u64> = (0..cfg.validate_points as u64).collect();
    let per_point = map_slice(&idx, Execution::Parallel, |&i| -> Result<Vec<Check>> {
        let p = 10f64.powf(lo + (hi - lo) * unit_interval(cfg.seed, 2 * i));
        let k = cfg.kappa_min + (cfg.kappa_max - cfg.kappa_min) * unit_interval(cfg.seed, 2 * i + 1);
        let op = template.point(p, k)?;
        let (alpha_q, mean_q) = (oracle::gain_factor(&op), oracle::mean_distorted(&op));
        let tol = 1e-8;
        Ok(vec![
            Check::relative("quad_gain_factor", p, k, analytics::gain_factor(&op), alpha_q, tol),
            Check::relative("quad_mean", p, k, analytics::mean_distorted(&op), mean_q, tol),
            Check::relative(
                "quad_second_moment",
                p,
                k,
                analytics::second_moment_distorted(&op),
                oracle::second_moment_distorted(&op),
                tol,
            ),
            Check::relative(
                "quad_distortion_var",
                p,
                k,
                analytics::distortion_noise_var(&op)?,
                oracle::distortion_noise_var(&op, mean_q, alpha_q),
                tol,
            ),
            Check::relative("quad_shot_var", p, k, analytics::shot_noise_var_freq(&op), oracle::shot_noise_var_freq(&op), tol),
        ])
    });
    Ok(per_point.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

fn ideal_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let ideal = cfg.template().ideal();
    let mut checks = Vec::new();
    for p in cfg.power_grid() {
        for &k in &cfg.kappa {
            let op = ideal.point(p, k)?;
            let tol = 1e-12;
            checks.push(Check::relative("ideal_gain_factor", p, k, analytics::gain_factor(&op), analytics::ideal_gain_factor(&op), tol));
            checks.push(Check::relative(
                "ideal_distortion_var",
                p,
                k,
                analytics::distortion_noise_var(&op)?,
                analytics::ideal_distortion_noise_var(&op)?,
                tol,
            ));
            checks.push(Check::relative("ideal_shot_var", p, k, analytics::shot_noise_var_freq(&op), analytics::ideal_shot_noise_var(&op), tol));
        }
    }
    Ok(checks)
}

fn monte_carlo_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let spec = SweepSpec { simulate: true, ..cfg.sweep_spec() };
    let mut checks = Vec::new();
    for row in sweep_all(&spec)?.rows {
        let mc = row.mc.expect("simulated sweep");
        if mc.saturated {
            continue;
        }
        let a = &row.analytic;
        let order = Some(row.order);
        let (p, k) = (row.p_rx, row.kappa);
        checks.push(Check { order, ..Check::relative("mc_gain_factor", p, k, mc.alpha_hat, a.alpha, 0.02) });
        checks.push(Check { order, ..Check::relative("mc_shot_var", p, k, mc.var_ws, a.var_ws, 0.02) });
        let sigma = (a.ber * (1.0 - a.ber) / mc.bits as f64).sqrt();
        let z = if mc.ber == a.ber { 0.0 } else { (mc.ber - a.ber).abs() / sigma };
        checks.push(Check {
            name: "mc_ber_zscore",
            p_rx: p,
            kappa: k,
            order,
            value: mc.ber,
            reference: a.ber,
            error: z,
            tolerance: 3.0,
        });
    }
    Ok(checks)
}

fn validate(cfg: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let template = cfg.template();
    let mut checks = quadrature_checks(cfg, &template)?;
    checks.extend(ideal_checks(cfg)?);
    checks.extend(monte_carlo_checks(cfg)?);
    let failures = checks.iter().filter(|c| !c.passed()).count();
    let rows = checks.iter().map(|c| {
        vec![
            c.name.to_string(),
            num(c.p_rx),
            num(c.kappa),
            c.order.map(|m| m.to_string()).unwrap_or_default(),
            num(c.value),
            num(c.reference),
            num(c.error),
            num(c.tolerance),
            c.passed().to_string(),
        ]
    });
    write_table(out, &["check", "p_rx_w", "kappa", "order", "value", "reference", "error", "tolerance", "pass"], rows)?;
    for name in ["quad_", "ideal_", "mc_"] {
        let group: Vec<&Check> = checks.iter().filter(|c| c.name.starts_with(name)).collect();
        let bad = group.iter().filter(|c| !c.passed()).count();
        log::info!("{name}*: {} checks, {bad} failed", group.len());
    }
    Ok(Outcome { rows: checks.len(), failures })
}
