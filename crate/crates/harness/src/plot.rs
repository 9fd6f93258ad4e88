//! Deterministic log-log SVG plots.

use std::fmt::Write as _;

use fractalcap_core::math::least_squares;

use crate::error::{Error, Result};
use crate::sweep::SweepRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// One labelled point set.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Groups rows by rule and `beta`, plotting `y` against `x`.
pub fn emit_plot(rows: &[SweepRow], x: &str, y: &str) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Usage("no rows to plot".into()));
    }
    let mut series: Vec<Series> = Vec::new();
    for row in rows {
        let px = row.column(x).ok_or_else(|| Error::Usage(format!("unknown or empty column {x:?}")))?;
        let py = row.column(y).ok_or_else(|| Error::Usage(format!("unknown or empty column {y:?}")))?;
        let label = match row.beta {
            Some(b) => format!("{} beta={b}", row.rule),
            None => row.rule.clone(),
        };
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((px, py)),
            None => series.push(Series { label, points: vec![(px, py)] }),
        }
    }
    plot_series(&series, x, y)
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Log-log scatter of each series with its least-squares line and slope.
pub fn plot_series(series: &[Series], x_label: &str, y_label: &str) -> Result<String> {
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    if all.is_empty() {
        return Err(Error::Usage("no points to plot".into()));
    }
    if all.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::Usage("log axes need positive finite values".into()));
    }
    let logs: Vec<(f64, f64)> = all.iter().map(|&(x, y)| (x.log10(), y.log10())).collect();
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = logs.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = logs.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-9 { (lo - 0.5, hi + 0.5) } else { (lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo)) }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let sx = |lx: f64| MARGIN + (lx - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |ly: f64| HEIGHT - MARGIN - (ly - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{left} {top} V{bottom} H{right}" fill="none" stroke="black"/>"#
    );
    for k in (x0.ceil() as i64)..=(x1.floor() as i64) {
        let px = fmt(sx(k as f64));
        let _ = writeln!(svg, r#"<line x1="{px}" y1="{bottom}" x2="{px}" y2="{}" stroke="black"/>"#, bottom + 5.0);
        let _ = writeln!(svg, r#"<text x="{px}" y="{}" font-size="11" text-anchor="middle">1e{k}</text>"#, bottom + 18.0);
    }
    for k in (y0.ceil() as i64)..=(y1.floor() as i64) {
        let py = fmt(sy(k as f64));
        let _ = writeln!(svg, r#"<line x1="{}" y1="{py}" x2="{left}" y2="{py}" stroke="black"/>"#, left - 5.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{py}" font-size="11" text-anchor="end">1e{k}</text>"#, left - 8.0);
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<(f64, f64)> = s.points.iter().map(|&(x, y)| (x.log10(), y.log10())).collect();
        for &(lx, ly) in &pts {
            let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#, fmt(sx(lx)), fmt(sy(ly)));
        }
        let slope = least_squares(&pts).ok().map(|fit| {
            let (a, b) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
            let _ = writeln!(
                svg,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}"/>"#,
                fmt(sx(a)),
                fmt(sy(fit.predict(a))),
                fmt(sx(b)),
                fmt(sy(fit.predict(b)))
            );
            fit.slope
        });
        let note = match slope {
            Some(m) => format!("{} (slope {m:.3})", s.label),
            None => s.label.clone(),
        };
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            left + 10.0,
            top + 16.0 * (i as f64 + 1.0),
            escape(&note)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
