//! CSV and SVG emission.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{HarnessError, Result};
use crate::fit::fit_rate;
use crate::runner::SweepRow;

pub const CSV_HEADER: &str = "k,sup_nabla_f_L2,sup_nabla_f_H1,sup_nabla_f_H2,sup_eta_gap_L2,sup_eta_gap_H1,sup_etadot_gap_H1,energy_drift,converged";

/// Rows as CSV; `Display` on `f64` is the shortest round-trip form.
pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.k,
            r.sup_nabla_f[0],
            r.sup_nabla_f[1],
            r.sup_nabla_f[2],
            r.sup_eta_gap[0],
            r.sup_eta_gap[1],
            r.sup_etadot_gap_h1,
            r.energy_drift,
            r.converged
        );
    }
    s
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(rows))?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(HarnessError::Csv("missing or unexpected header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            if cells.len() != 9 {
                return Err(HarnessError::Csv(format!("expected 9 cells in `{l}`")));
            }
            let v = |i: usize| -> Result<f64> {
                cells[i]
                    .parse()
                    .map_err(|_| HarnessError::Csv(format!("bad number `{}`", cells[i])))
            };
            Ok(SweepRow {
                k: v(0)?,
                sup_nabla_f: [v(1)?, v(2)?, v(3)?],
                sup_eta_gap: [v(4)?, v(5)?],
                sup_etadot_gap_h1: v(6)?,
                energy_drift: v(7)?,
                converged: cells[8]
                    .parse()
                    .map_err(|_| HarnessError::Csv(format!("bad flag `{}`", cells[8])))?,
            })
        })
        .collect()
}

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 56.0;

/// Self-contained log-log chart of `(k, value)` with the fitted decay
/// exponent written on it.
pub fn plot_svg(title: &str, points: &[(f64, f64)]) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        escape(title)
    );
    let pos: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|p| (p.0.log10(), p.1.log10()))
        .collect();
    let _ = writeln!(
        s,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    if !pos.is_empty() {
        let (x0, x1) = bounds(pos.iter().map(|p| p.0));
        let (y0, y1) = bounds(pos.iter().map(|p| p.1));
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
        for (x, y) in &pos {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"steelblue\"/>",
                sx(*x),
                sy(*y)
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{PAD}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">k: 10^{x0:.2} .. 10^{x1:.2}, value: 10^{y0:.2} .. 10^{y1:.2}</text>",
            H - PAD / 2.0
        );
        if let Ok(fit) = fit_rate(points) {
            let mx = pos.iter().map(|p| p.0).sum::<f64>() / pos.len() as f64;
            let my = pos.iter().map(|p| p.1).sum::<f64>() / pos.len() as f64;
            let line = |x: f64| my - fit.slope * (x - mx);
            let _ = writeln!(
                s,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"firebrick\" stroke-dasharray=\"4 3\"/>",
                sx(x0),
                sy(line(x0)),
                sx(x1),
                sy(line(x1))
            );
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">slope {:.2} (r2 {:.3})</text>",
                W - PAD - 4.0,
                PAD + 16.0,
                fit.slope,
                fit.r2
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_plot(title: &str, points: &[(f64, f64)], path: &Path) -> Result<()> {
    std::fs::write(path, plot_svg(title, points))?;
    Ok(())
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let m = 0.05 * (hi - lo);
        (lo - m, hi + m)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: f64) -> SweepRow {
        SweepRow {
            k,
            sup_nabla_f: [1.0 / k, 0.1 + 1.0 / 3.0, 2e-300],
            sup_eta_gap: [std::f64::consts::PI, 1e-17],
            sup_etadot_gap_h1: 0.1 + 0.2,
            energy_drift: 5e-11,
            converged: k < 500.0,
        }
    }

    #[test]
    fn empty_is_header_only() {
        assert_eq!(csv_string(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let rows: Vec<_> = [100.0, 200.0, 400.0, 800.0].map(row).to_vec();
        let text = csv_string(&rows);
        assert_eq!(text.lines().count(), 5);
        assert_eq!(parse_csv(&text).unwrap(), rows);
    }

    #[test]
    fn plot_annotates_slope() {
        let pts: Vec<_> = [100.0, 200.0, 400.0, 800.0].map(|k: f64| (k, k.powi(-3))).to_vec();
        let svg = plot_svg("synthetic", &pts);
        assert!(svg.contains("3.00"));
        assert!(svg.starts_with("<svg"));
    }
}
