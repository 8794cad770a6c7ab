//! SVG scatter plots of success rate against the sweep parameter.

use std::fmt::Write;

use crate::bench::{ExperimentRecord, FitResult};
use crate::Error;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 52.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    Circle,
    Square,
    Triangle,
    Diamond,
}

/// Colour and marker for a backend: black circles for the ion trap, blue
/// squares for IBM devices and red triangles for Rigetti.
pub fn style(backend: &str) -> (&'static str, Marker) {
    if backend.starts_with("ionq") {
        ("black", Marker::Circle)
    } else if backend.starts_with("ibm") {
        ("blue", Marker::Square)
    } else if backend.starts_with("rigetti") {
        ("red", Marker::Triangle)
    } else {
        ("green", Marker::Diamond)
    }
}

fn marker(out: &mut String, m: Marker, x: f64, y: f64, colour: &str) {
    let r = 4.5;
    let _ = match m {
        Marker::Circle => writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{colour}"/>"#),
        Marker::Square => writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{colour}"/>"#,
            x - r,
            y - r,
            2.0 * r,
            2.0 * r
        ),
        Marker::Triangle => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{colour}"/>"#,
            x,
            y - r * 1.2,
            x - r,
            y + r * 0.8,
            x + r,
            y + r * 0.8
        ),
        Marker::Diamond => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{colour}"/>"#,
            x,
            y - r * 1.3,
            x + r,
            y,
            x,
            y + r * 1.3,
            x - r,
            y
        ),
    };
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders one series per backend, in order of first appearance, with 95%
/// error bars. `fit` adds a curve over the full parameter range. The output
/// depends only on the inputs.
pub fn render_svg(records: &[ExperimentRecord], fit: Option<&FitResult>) -> Result<String, Error> {
    if records.is_empty() {
        return Err(Error::Record("no records to plot".into()));
    }
    if let Some(r) = records.iter().find(|r| r.shots == 0) {
        return Err(Error::Record(format!(
            "no shots in record for {} at parameter {}",
            r.backend, r.parameter
        )));
    }
    let mut series: Vec<(&str, Vec<&ExperimentRecord>)> = Vec::new();
    for r in records {
        match series.iter_mut().find(|(b, _)| *b == r.backend) {
            Some((_, v)) => v.push(r),
            None => series.push((&r.backend, vec![r])),
        }
    }
    let xs = records.iter().map(|r| r.parameter as f64);
    let (mut x_min, mut x_max) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if x_max - x_min < 1.0 {
        x_min -= 1.0;
        x_max += 1.0;
    }
    let pad = 0.05 * (x_max - x_min);
    let (x_lo, x_hi) = (x_min - pad, x_max + pad);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| TOP + (1.0 - y.clamp(0.0, 1.0)) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let y = k as f64 / 5.0;
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{LEFT}" y2="{:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{y:.1}</text>"#,
            LEFT - 5.0,
            py(y),
            py(y),
            LEFT - 8.0,
            py(y) + 4.0
        );
    }
    let step = nice_step((x_hi - x_lo) / 8.0);
    let mut t = (x_lo / step).ceil() * step;
    while t <= x_hi {
        let x = px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 19.0,
            trim_number(t)
        );
        t += step;
    }
    let kind = records[0].experiment;
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(axis_label(kind.name()))
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">success probability</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    if let Some(f) = fit {
        let mut d = String::new();
        for i in 0..=200 {
            let x = x_lo + (x_hi - x_lo) * i as f64 / 200.0;
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, px(x), py(f.evaluate(x)));
        }
        let _ = writeln!(out, r#"<path d="{d}" fill="none" stroke="gray" stroke-width="1.5"/>"#);
    }

    for (i, (backend, recs)) in series.iter().enumerate() {
        let (colour, m) = style(backend);
        let _ = writeln!(out, r#"<g id="series-{i}">"#);
        for r in recs {
            let (x, p) = (px(r.parameter as f64), r.success_rate());
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{colour}"/>"#,
                py(p - r.ci95),
                py(p + r.ci95)
            );
            marker(&mut out, m, x, py(p), colour);
        }
        let ly = TOP + 14.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 16.0;
        marker(&mut out, m, lx, ly, colour);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 10.0, ly + 4.0, escape(backend));
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn axis_label(kind: &str) -> &'static str {
    match kind {
        "cnot-chain" => "CNOT gates",
        "swap-chain" => "SWAP gates",
        "bv" => "Hamming weight",
        _ => "prepared state",
    }
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag)
}

fn trim_number(x: f64) -> String {
    if (x - x.round()).abs() < 1e-9 {
        format!("{}", x.round() as i64)
    } else {
        format!("{x:.2}")
    }
}
