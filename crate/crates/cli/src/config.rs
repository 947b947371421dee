//! Flat `key = value` run configuration with SI-suffixed quantities.
//!
//! Grammar: one assignment per line, `#` starts a comment, lists are
//! comma-separated. A quantity is a number optionally followed by a unit
//! (`10ns`, `4.5 mW`, `450nm`, `0.5MHz`); a bare number is in SI base units.

use spad_ofdm::experiments::{lin_space, log_space, Equalizer, LinkTemplate, McOptions, SweepSpec};
use spad_ofdm::ofdm::SUPPORTED_ORDERS;
use spad_ofdm::spad::SpadParams;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("unit mismatch for `{key}`: expected {expected}, got `{unit}`")]
    UnitMismatch { key: String, expected: &'static str, unit: String },
    #[error("cannot parse `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("constraint violated for `{field}`: {reason}")]
    Constraint { field: String, reason: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Dim {
    Time,
    Power,
    Length,
    Rate,
    None,
}

impl Dim {
    fn name(self) -> &'static str {
        match self {
            Dim::Time => "a time (s, ms, us, ns, ps)",
            Dim::Power => "a power (W, mW, uW, nW, pW)",
            Dim::Length => "a length (m, cm, mm, um, nm)",
            Dim::Rate => "a rate (/s, Hz, kHz, MHz, GHz)",
            Dim::None => "a dimensionless number",
        }
    }

    /// Decimal exponent of `unit` relative to the SI base unit.
    fn exponent(self, unit: &str) -> Option<i32> {
        let table: &[(&str, i32)] = match self {
            Dim::Time => &[("s", 0), ("ms", -3), ("us", -6), ("µs", -6), ("ns", -9), ("ps", -12)],
            Dim::Power => &[("W", 0), ("mW", -3), ("uW", -6), ("µW", -6), ("nW", -9), ("pW", -12)],
            Dim::Length => &[("m", 0), ("cm", -2), ("mm", -3), ("um", -6), ("µm", -6), ("nm", -9)],
            Dim::Rate => &[("/s", 0), ("Hz", 0), ("kHz", 3), ("MHz", 6), ("GHz", 9)],
            Dim::None => &[],
        };
        table.iter().find(|(u, _)| *u == unit).map(|&(_, e)| e)
    }
}

/// Everything a subcommand needs. Defaults reproduce the reference receiver
/// and transmitter.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub spad: SpadParams,
    pub p_min: f64,
    pub p_max: f64,
    pub fft_size: usize,
    pub p_rx_min: f64,
    pub p_rx_max: f64,
    pub p_rx_points: usize,
    /// Fixed clipping levels swept by the figure subcommands.
    pub kappa: Vec<f64>,
    /// Search grid for clipping optimization.
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_points: usize,
    pub mod_orders: Vec<u32>,
    pub frames_per_point: usize,
    pub seed: u64,
    pub ber_target: f64,
    pub simulate: bool,
    pub shot_noise: bool,
    pub equalizer: Equalizer,
    /// Random operating points drawn by `validate` for the quadrature check.
    pub validate_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spad: SpadParams::reference(),
            p_min: 0.0,
            p_max: 10e-3,
            fft_size: 1024,
            p_rx_min: 1e-9,
            p_rx_max: 1e-3,
            p_rx_points: 61,
            kappa: vec![2.0, 3.2, 4.0],
            kappa_min: 0.5,
            kappa_max: 8.0,
            kappa_points: 151,
            mod_orders: SUPPORTED_ORDERS.to_vec(),
            frames_per_point: spad_ofdm::experiments::DEFAULT_FRAMES_PER_POINT,
            seed: 1,
            ber_target: spad_ofdm::experiments::DEFAULT_BER_TARGET,
            simulate: false,
            shot_noise: true,
            equalizer: Equalizer::DataAided,
            validate_points: 100,
        }
    }
}

fn canonical(key: &str) -> &str {
    match key {
        "n_a" => "n_pixels",
        "tau_d" => "dead_time",
        "t_s" => "sample_duration",
        "p_b" => "background_power",
        "lambda" => "wavelength",
        other => other,
    }
}

fn split_number(text: &str) -> Option<(f64, &str)> {
    // Longest numeric prefix; the remainder is the unit.
    (1..=text.len()).rev().filter(|&i| text.is_char_boundary(i)).find_map(|i| {
        let v: f64 = text[..i].trim().parse().ok()?;
        Some((v, text[i..].trim()))
    })
}

fn quantity(key: &str, text: &str, dim: Dim) -> Result<f64> {
    let bad = || ConfigError::BadValue { key: key.into(), value: text.into() };
    let (v, unit) = split_number(text.trim()).ok_or_else(bad)?;
    if !v.is_finite() {
        return Err(bad());
    }
    if unit.is_empty() {
        return Ok(v);
    }
    let e = dim.exponent(unit).ok_or_else(|| ConfigError::UnitMismatch { key: key.into(), expected: dim.name(), unit: unit.into() })?;
    // Dividing by an exact power of ten keeps `4.5mW` equal to `4.5e-3`.
    Ok(if e < 0 { v / 10f64.powi(-e) } else { v * 10f64.powi(e) })
}

fn scalar<T: std::str::FromStr>(key: &str, text: &str) -> Result<T> {
    text.trim().parse().map_err(|_| ConfigError::BadValue { key: key.into(), value: text.into() })
}

fn list<T>(key: &str, text: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(ConfigError::BadValue { key: key.into(), value: text.into() });
    }
    items.into_iter().map(item).collect()
}

fn constraint(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Constraint { field: field.into(), reason: reason.into() }
}

impl RunConfig {
    /// Assigns one key; `key` may be an alias.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = canonical(key.trim());
        let q = |dim| quantity(key, value, dim);
        match key {
            "n_pixels" => self.spad.n_pixels = q(Dim::None)?,
            "dead_time" => self.spad.dead_time = q(Dim::Time)?,
            "pde" => self.spad.pde = q(Dim::None)?,
            "dcr" => self.spad.dcr = q(Dim::Rate)?,
            "afterpulse" => self.spad.afterpulse = q(Dim::None)?,
            "crosstalk" => self.spad.crosstalk = q(Dim::None)?,
            "background_power" => self.spad.background_power = q(Dim::Power)?,
            "wavelength" => self.spad.wavelength = q(Dim::Length)?,
            "sample_duration" => self.spad.sample_duration = q(Dim::Time)?,
            "p_min" => self.p_min = q(Dim::Power)?,
            "p_max" => self.p_max = q(Dim::Power)?,
            "fft_size" => self.fft_size = scalar(key, value)?,
            "p_rx_min" => self.p_rx_min = q(Dim::Power)?,
            "p_rx_max" => self.p_rx_max = q(Dim::Power)?,
            "p_rx_points" => self.p_rx_points = scalar(key, value)?,
            "kappa" => self.kappa = list(key, value, |s| quantity(key, s, Dim::None))?,
            "kappa_min" => self.kappa_min = q(Dim::None)?,
            "kappa_max" => self.kappa_max = q(Dim::None)?,
            "kappa_points" => self.kappa_points = scalar(key, value)?,
            "mod_orders" => self.mod_orders = list(key, value, |s| scalar(key, s))?,
            "frames_per_point" => self.frames_per_point = scalar(key, value)?,
            "seed" => self.seed = scalar(key, value)?,
            "ber_target" => self.ber_target = q(Dim::None)?,
            "simulate" => self.simulate = scalar(key, value)?,
            "shot_noise" => self.shot_noise = scalar(key, value)?,
            "equalizer" => {
                self.equalizer = match value.trim() {
                    "data-aided" => Equalizer::DataAided,
                    "analytic" => Equalizer::Analytic,
                    _ => return Err(ConfigError::BadValue { key: key.into(), value: value.into() }),
                }
            }
            "validate_points" => self.validate_points = scalar(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.spad.validate().map_err(|e| match e {
            spad_ofdm::Error::InvalidParameter { name, reason } => constraint(name, reason),
            other => constraint("receiver", other.to_string()),
        })?;
        if !(self.p_min >= 0.0 && self.p_max > self.p_min) {
            return Err(constraint("p_max", "0 ≤ p_min < p_max is required"));
        }
        if !(self.fft_size >= 4 && self.fft_size.is_power_of_two()) {
            return Err(constraint("fft_size", "must be a power of two ≥ 4"));
        }
        if !(self.p_rx_min > 0.0 && self.p_rx_max >= self.p_rx_min) {
            return Err(constraint("p_rx_max", "0 < p_rx_min ≤ p_rx_max is required"));
        }
        if self.p_rx_points == 0 || (self.p_rx_points == 1 && self.p_rx_max != self.p_rx_min) {
            return Err(constraint("p_rx_points", "need ≥ 2 points, or 1 point with p_rx_min = p_rx_max"));
        }
        if self.p_rx_points > 1 && self.p_rx_max == self.p_rx_min {
            return Err(constraint("p_rx_points", "a degenerate power range takes exactly 1 point"));
        }
        if self.kappa.is_empty() || self.kappa.iter().any(|&k| k.is_nan() || k <= 0.0) || self.kappa.windows(2).any(|w| w[0] >= w[1]) {
            return Err(constraint("kappa", "must be positive and strictly ascending"));
        }
        if !(self.kappa_min > 0.0 && self.kappa_max >= self.kappa_min && self.kappa_points >= 1) {
            return Err(constraint("kappa_max", "0 < kappa_min ≤ kappa_max and kappa_points ≥ 1 are required"));
        }
        if (self.kappa_points == 1) != (self.kappa_min == self.kappa_max) {
            return Err(constraint("kappa_points", "exactly 1 point iff kappa_min = kappa_max"));
        }
        if self.mod_orders.is_empty() || self.mod_orders.iter().any(|m| !SUPPORTED_ORDERS.contains(m)) {
            return Err(constraint("mod_orders", "each order must be one of 4, 8, 16, 32, 64"));
        }
        if self.frames_per_point == 0 {
            return Err(constraint("frames_per_point", "must be at least 1"));
        }
        if !(self.ber_target > 0.0 && self.ber_target < 0.5) {
            return Err(constraint("ber_target", "must lie in (0, 0.5)"));
        }
        Ok(())
    }

    pub fn template(&self) -> LinkTemplate {
        LinkTemplate { spad: self.spad, p_min: self.p_min, p_max: self.p_max, fft_size: self.fft_size }
    }

    /// Log-spaced received powers, W.
    pub fn power_grid(&self) -> Vec<f64> {
        log_space(self.p_rx_min, self.p_rx_max, self.p_rx_points)
    }

    pub fn kappa_search_grid(&self) -> Vec<f64> {
        lin_space(self.kappa_min, self.kappa_max, self.kappa_points)
    }

    pub fn mc_options(&self) -> McOptions {
        McOptions { shot_noise: self.shot_noise, equalizer: self.equalizer, ..McOptions::default() }
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            template: self.template(),
            received_power_grid: self.power_grid(),
            kappa_grid: self.kappa.clone(),
            mod_orders: self.mod_orders.clone(),
            frames_per_point: self.frames_per_point,
            master_seed: self.seed,
            ber_target: self.ber_target,
            simulate: self.simulate,
            mc: self.mc_options(),
        }
    }
}

/// Splits a `key=value` override.
pub fn parse_override(text: &str) -> Result<(&str, &str)> {
    text.split_once('=').map(|(k, v)| (k.trim(), v.trim())).ok_or_else(|| ConfigError::Syntax { line: 0, text: text.into() })
}

/// Applies the file, then the overrides in order, then validates.
pub fn parse_config(text: &str, overrides: &[(&str, &str)]) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.trim().into() })?;
        if key.trim().is_empty() || value.trim().is_empty() {
            return Err(ConfigError::Syntax { line: i + 1, text: raw.trim().into() });
        }
        cfg.set(key, value)?;
    }
    for (key, value) in overrides {
        cfg.set(key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_reference_receiver() {
        let cfg = parse_config("", &[]).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.spad, SpadParams::reference());
        assert_eq!(cfg.p_max, 10e-3);
        assert_eq!(cfg.fft_size, 1024);
    }

    #[test]
    fn units_and_aliases() {
        let cfg = parse_config(
            "# receiver\ntau_d = 5 ns\nt_s=40ns\nbackground_power = 2nW  # stray light\nwavelength = 850nm\ndcr = 0.2MHz\np_max = 4.5mW\n",
            &[],
        )
        .unwrap();
        assert_eq!(cfg.spad.dead_time, 5e-9);
        assert_eq!(cfg.spad.sample_duration, 40e-9);
        assert_eq!(cfg.spad.background_power, 2e-9);
        assert_eq!(cfg.spad.wavelength, 850e-9);
        assert_eq!(cfg.spad.dcr, 0.2e6);
        assert_eq!(cfg.p_max, 4.5e-3);
        assert_eq!(parse_config("p_max = 1e-3W", &[]).unwrap().p_max, 1e-3);
    }

    #[test]
    fn overrides_win_over_file() {
        let cfg = parse_config("seed = 3\nkappa = 1, 2.5", &[("seed", "9"), ("mod_orders", "4,16")]).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.kappa, vec![1.0, 2.5]);
        assert_eq!(cfg.mod_orders, vec![4, 16]);
    }

    #[test]
    fn ideal_receiver_accepted() {
        assert_eq!(parse_config("dead_time = 0", &[]).unwrap().spad.dead_time, 0.0);
    }

    #[test]
    fn errors_name_the_problem() {
        let e = parse_config("t_s = 5ns", &[]).unwrap_err();
        assert!(e.to_string().contains("sample_duration ≥ dead_time"), "{e}");
        assert_eq!(parse_config("bogus = 1", &[]).unwrap_err(), ConfigError::UnknownKey("bogus".into()));
        assert!(matches!(parse_config("dead_time = 5mW", &[]).unwrap_err(), ConfigError::UnitMismatch { .. }));
        assert!(matches!(parse_config("pde = 0.3ns", &[]).unwrap_err(), ConfigError::UnitMismatch { .. }));
        assert!(matches!(parse_config("seed 4", &[]).unwrap_err(), ConfigError::Syntax { line: 1, .. }));
        assert!(matches!(parse_config("fft_size = 1000", &[]).unwrap_err(), ConfigError::Constraint { .. }));
        assert!(matches!(parse_config("mod_orders = 4, 128", &[]).unwrap_err(), ConfigError::Constraint { .. }));
        assert!(matches!(parse_config("kappa = 3, 2", &[]).unwrap_err(), ConfigError::Constraint { .. }));
        assert!(matches!(parse_config("simulate = maybe", &[]).unwrap_err(), ConfigError::BadValue { .. }));
        assert!(matches!(parse_config("p_max = inf", &[]).unwrap_err(), ConfigError::BadValue { .. }));
    }
}
