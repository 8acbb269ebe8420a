//! Static SVG plots, written by hand so output is byte-stable.

use std::fmt::Write;

use frisson_core::eeg_analysis::{Band, ChannelGroup, Phase, PhaseSummary};
use frisson_core::pilo_detect::{GoosebumpEvent, IntensitySample};

const W: f64 = 800.0;
const H: f64 = 300.0;
const MARGIN: f64 = 40.0;

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

/// z(t) with the `theta_on` line and shaded event spans.
pub fn intensity_svg(samples: &[IntensitySample], events: &[GoosebumpEvent], theta_on: f64) -> String {
    let zs: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (s.timestamp_us as f64 / 1e6, s.z.unwrap_or(0.0)))
        .collect();
    let t_max = zs.last().map_or(1.0, |p| p.0).max(1e-6);
    let z_lo = zs.iter().map(|p| p.1).fold(-1.0f64, f64::min);
    let z_hi = zs.iter().map(|p| p.1).fold(theta_on + 1.0, f64::max);
    let x = |t: f64| MARGIN + (W - 2.0 * MARGIN) * t / t_max;
    let y = |z: f64| H - MARGIN - (H - 2.0 * MARGIN) * (z - z_lo) / (z_hi - z_lo);

    let mut out = String::new();
    header(&mut out, W, H);
    for e in events {
        let (a, b) = (x(e.onset_us as f64 / 1e6), x(e.offset_us as f64 / 1e6));
        let _ = writeln!(
            out,
            r##"<rect class="event" x="{a:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#f4a261" fill-opacity="0.3"/>"##,
            MARGIN,
            (b - a).max(0.5),
            H - 2.0 * MARGIN
        );
    }
    let _ = writeln!(
        out,
        r##"<line class="axis" x1="{MARGIN}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888"/>"##,
        H - MARGIN,
        W - MARGIN,
        H - MARGIN
    );
    let yt = y(theta_on);
    let _ = writeln!(
        out,
        r##"<line class="threshold" x1="{MARGIN}" y1="{yt:.2}" x2="{:.2}" y2="{yt:.2}" stroke="#d62828" stroke-dasharray="6 4"/>"##,
        W - MARGIN
    );
    out.push_str(r##"<polyline class="z-trace" fill="none" stroke="#1d3557" stroke-width="1" points=""##);
    for (i, &(t, z)) in zs.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{:.2},{:.2}", x(t), y(z));
    }
    out.push_str("\"/>\n");
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="20">piloerection z-score vs time (s)</text>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">theta_on = {theta_on}</text>"#,
        W - MARGIN - 100.0,
        yt - 4.0
    );
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="{:.2}">0</text>"#, H - MARGIN + 14.0);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">{t_max:.1}</text>"#,
        W - MARGIN - 20.0,
        H - MARGIN + 14.0
    );
    out.push_str("</svg>\n");
    out
}

const PALETTE: [&str; 6] = ["#264653", "#2a9d8f", "#e9c46a", "#f4a261", "#e76f51", "#8d99ae"];

/// Three panels (pre, during, post), each a bar per band within each group,
/// on a shared log scale.
pub fn summary_svg(summary: &PhaseSummary, bands: &[Band], groups: &[ChannelGroup]) -> String {
    let panel_w = 300.0;
    let (w, h) = (3.0 * panel_w, 320.0);
    let mut out = String::new();
    header(&mut out, w, h);

    let values: Vec<f64> = summary
        .power
        .values()
        .flat_map(|b| b.values().flat_map(|g| g.values().copied()))
        .filter(|v| *v > 0.0)
        .collect();
    if values.is_empty() {
        let _ = writeln!(out, r#"<text x="20" y="40">no usable events</text>"#);
        out.push_str("</svg>\n");
        return out;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min).log10().floor();
    let hi = values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
        .log10()
        .ceil()
        .max(lo + 1.0);
    let (top, bottom) = (40.0, h - 50.0);
    let y = |v: f64| bottom - (bottom - top) * ((v.max(10f64.powf(lo)).log10() - lo) / (hi - lo));

    for (p, phase) in Phase::ALL.iter().enumerate() {
        let x0 = p as f64 * panel_w;
        let _ = writeln!(out, r#"<g class="panel" id="panel-{}">"#, phase.as_str());
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="24" font-size="13">{}</text>"#,
            x0 + 20.0,
            phase.as_str()
        );
        let slot = (panel_w - 50.0) / groups.len() as f64;
        let bar = slot * 0.8 / bands.len() as f64;
        for (g, group) in groups.iter().enumerate() {
            let gx = x0 + 35.0 + g as f64 * slot;
            for (k, band) in bands.iter().enumerate() {
                let Some(v) = summary.get(*phase, &band.name, *group) else {
                    continue;
                };
                let bx = gx + k as f64 * bar;
                let by = y(v);
                let _ = writeln!(
                    out,
                    r#"<rect class="bar" x="{bx:.2}" y="{by:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{} {} {}: {v:.4} uV^2/Hz</title></rect>"#,
                    bar * 0.9,
                    bottom - by,
                    PALETTE[k % PALETTE.len()],
                    phase.as_str(),
                    band.name,
                    group
                );
            }
            let _ = writeln!(out, r#"<text x="{gx:.2}" y="{:.2}">{group}</text>"#, bottom + 14.0);
        }
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{bottom:.2}" x2="{:.2}" y2="{bottom:.2}" stroke="#888"/>"##,
            x0 + 30.0,
            x0 + panel_w - 10.0
        );
        out.push_str("</g>\n");
    }
    for (k, band) in bands.iter().enumerate() {
        let lx = 20.0 + k as f64 * 90.0;
        let _ = writeln!(
            out,
            r#"<rect x="{lx:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            h - 22.0,
            PALETTE[k % PALETTE.len()],
            lx + 14.0,
            h - 13.0,
            band.name
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">log10 power: {lo} to {hi} (uV^2/Hz)</text>"#,
        w - 260.0,
        h - 13.0
    );
    out.push_str("</svg>\n");
    out
}
