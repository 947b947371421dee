//! CSV emission. Floats carry 9 significant digits (`{:.8e}`); ratios are
//! reported in dB as `10 log10`. Output bytes depend only on the input values.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use spad_ofdm::experiments::SweepResult;

pub const SWEEP_COLUMNS: [&str; 16] = [
    "p_rx_w",
    "kappa",
    "alpha_analytic",
    "alpha_mc",
    "var_wd_analytic",
    "var_wd_mc",
    "var_ws_analytic",
    "var_ws_mc",
    "sdnr_db",
    "ssnr_db",
    "snr_db",
    "ber_analytic",
    "ber_mc",
    "ber_stderr",
    "se_qam",
    "se_upper",
];

pub fn num(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Writes `header` and then one line per row; cells are joined with commas.
pub fn write_table<W: Write + ?Sized>(out: &mut W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Sweep rows in the standard 16-column layout; Monte Carlo cells stay
/// empty when the point was not simulated.
pub fn write_sweep<W: Write + ?Sized>(result: &SweepResult, out: &mut W) -> io::Result<()> {
    let rows = result.rows.iter().map(|r| {
        let a = &r.analytic;
        let mc = |f: &dyn Fn(&spad_ofdm::experiments::McResult) -> f64| r.mc.as_ref().map(|m| num(f(m))).unwrap_or_default();
        vec![
            num(r.p_rx),
            num(r.kappa),
            num(a.alpha),
            mc(&|m| m.alpha_hat),
            num(a.var_wd),
            mc(&|m| m.var_wd),
            num(a.var_ws),
            mc(&|m| m.var_ws),
            num(db(a.sdnr)),
            num(db(a.ssnr)),
            num(db(a.snr)),
            num(a.ber),
            mc(&|m| m.ber),
            mc(&|m| m.ber_stderr),
            num(r.se_qam),
            num(a.se_upper),
        ]
    });
    write_table(out, &SWEEP_COLUMNS, rows)
}

/// Writes [`write_sweep`] output to `path`.
pub fn emit_csv(result: &SweepResult, path: &Path) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_sweep(result, &mut out)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use spad_ofdm::experiments::{sweep_all, SweepSpec};

    #[test]
    fn empty_sweep_is_header_only() {
        let mut buf = Vec::new();
        write_sweep(&SweepResult::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", SWEEP_COLUMNS.join(",")));
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(num(1.0), "1.00000000e0");
        assert_eq!(num(-6_027.337_123_456), "-6.02733712e3");
        assert_eq!(db(100.0), 20.0);
    }

    #[test]
    fn round_trip() {
        let spec = SweepSpec {
            received_power_grid: vec![1e-7, 1e-6],
            kappa_grid: vec![3.2],
            mod_orders: vec![16],
            ..SweepSpec::default()
        };
        let result = sweep_all(&spec).unwrap();
        let mut buf = Vec::new();
        write_sweep(&result, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        for (line, row) in lines[1..].iter().zip(&result.rows) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 16);
            assert_eq!(cells[3], "");
            let alpha: f64 = cells[2].parse().unwrap();
            assert!((alpha - row.analytic.alpha).abs() <= 5e-9 * row.analytic.alpha.abs());
            let p: f64 = cells[0].parse().unwrap();
            assert_eq!(num(p), cells[0]);
        }
    }
}
