use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{Error, Result};

use super::sweep::SweepResults;

pub const CSV_HEADER: &str = "axis,value,detector,seed,ber,bep_group_mean,theta_mean,theta_min,theta_max";

/// `%.9g`.
pub fn fmt_sig(v: f64) -> String {
    fmt_g(v, 9)
}

fn fmt_g(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV text, one row per run, `\n` line endings.
pub fn csv_string(results: &SweepResults) -> Result<String> {
    if results.records.is_empty() {
        return Err(Error::EmptyResults("no runs to write"));
    }
    let groups = results.groups();
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    let mut g = groups.iter();
    let mut current = g.next().expect("nonempty");
    for rec in &results.records {
        if rec.value != current.value || rec.result.detector != current.detector {
            current = g.next().expect("records and groups share an order");
        }
        let t = &rec.result.threshold_trace;
        let mean = t.iter().sum::<f64>() / t.len() as f64;
        let min = t.iter().copied().fold(f64::INFINITY, f64::min);
        let max = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            results.axis,
            fmt_sig(rec.value),
            rec.result.detector,
            rec.result.seed,
            fmt_sig(rec.result.ber),
            fmt_sig(current.bep),
            fmt_sig(mean),
            fmt_sig(min),
            fmt_sig(max),
        )
        .expect("writing to a String");
    }
    Ok(out)
}

pub fn emit_csv(results: &SweepResults, path: impl AsRef<Path>) -> Result<()> {
    let text = csv_string(results)?;
    std::fs::write(path, text)?;
    Ok(())
}

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

const PALETTE: [RGBColor; 4] = [RGBColor(0, 90, 181), RGBColor(220, 50, 32), RGBColor(0, 140, 70), RGBColor(120, 120, 120)];

/// Writes `bep_<axis>.svg` and `theta_<axis>.svg` into `dir`.
pub fn emit_plot(results: &SweepResults, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    if results.records.is_empty() {
        return Err(Error::EmptyResults("no runs to plot"));
    }
    let dir = dir.as_ref();
    let bep_path = dir.join(format!("bep_{}.svg", results.axis));
    let theta_path = dir.join(format!("theta_{}.svg", results.axis));
    plot_bep(results, &bep_path)?;
    plot_thresholds(results, &theta_path)?;
    Ok(vec![bep_path, theta_path])
}

fn detector_names(results: &SweepResults) -> Vec<String> {
    let mut names: Vec<String> = results.records.iter().map(|r| r.result.detector.clone()).collect();
    names.sort();
    names.dedup();
    names
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5 * lo.abs().max(1.0), hi + 0.5 * hi.abs().max(1.0))
    }
}

fn plot_bep(results: &SweepResults, path: &Path) -> Result<()> {
    let xs: Vec<f64> = results.records.iter().map(|r| r.value).collect();
    let (x0, x1) = padded(
        xs.iter().copied().fold(f64::INFINITY, f64::min),
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("BEP vs {}", results.axis), ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(x0..x1, 0.0..1.0)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(results.axis.name())
        .y_desc("BEP")
        .x_label_formatter(&|v| fmt_g(*v, 3))
        .draw()
        .map_err(plot_err)?;
    for (k, name) in detector_names(results).iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts = results.curve(name);
        chart
            .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(name.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        chart
            .draw_series(pts.into_iter().map(|p| Circle::new(p, 4, color.filled())))
            .map_err(plot_err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Threshold traces of the lowest seed, one line per (value, detector).
fn plot_thresholds(results: &SweepResults, path: &Path) -> Result<()> {
    let seed = results.records.iter().map(|r| r.result.seed).min().expect("nonempty");
    let traces: Vec<_> = results.records.iter().filter(|r| r.result.seed == seed).collect();
    let len = traces.iter().map(|r| r.result.threshold_trace.len()).max().unwrap_or(1);
    let n_r_hi = traces
        .iter()
        .flat_map(|r| r.result.threshold_trace.iter().chain(&r.result.y_trace))
        .copied()
        .fold(1.0, f64::max);
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("Detection threshold, seed {seed}"), ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(0.0..len as f64, 0.0..n_r_hi * 1.05)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("symbol index")
        .y_desc("threshold (bound receptors)")
        .draw()
        .map_err(plot_err)?;
    for (k, rec) in traces.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = rec.result.threshold_trace.iter().enumerate().map(|(i, &t)| (i as f64, t)).collect();
        chart
            .draw_series(LineSeries::new(pts, color.stroke_width(2)))
            .map_err(plot_err)?
            .label(format!("{} {}={}", rec.result.detector, results.axis, fmt_g(rec.value, 3)))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.31), "0.31");
        assert_eq!(fmt_sig(1e-5), "1e-05");
        assert_eq!(fmt_sig(3.0000000000000004e-5), "3e-05");
        assert_eq!(fmt_sig(700.0), "700");
        assert_eq!(fmt_sig(106.012345678), "106.012346");
        assert_eq!(fmt_sig(1234567890.0), "1.23456789e+09");
        assert_eq!(fmt_sig(-0.000123), "-0.000123");
        assert_eq!(fmt_sig(2.0 / 3.0), "0.666666667");
    }
}
