use std::fmt::Write;

use bfvar::posterior::{KassRaftery, EVIDENCE_BIN_NAMES};

use crate::error::{CliError, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const MAX_BINS: usize = 50;

const BAND_FILL: [&str; 7] = [
    "#3b6fb6", "#7aa3d8", "#bcd2ee", "#e8e8e8", "#f6d2b0", "#eea86a", "#d9742b",
];

/// Evidence band `k` as a closed interval of `log B`, unbounded at the ends.
fn band_bounds(scale: &KassRaftery, k: usize) -> (f64, f64) {
    let t = scale.thresholds().map(|t| t / 2.0);
    let cuts = [f64::NEG_INFINITY, -t[2], -t[1], -t[0], t[0], t[1], t[2], f64::INFINITY];
    (cuts[k], cuts[k + 1])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Histogram of log Bayes factors over shaded Kass–Raftery bands, with the
/// observed value marked. Output depends only on the arguments.
pub fn emit_svg_histogram(values: &[f64], scale: &KassRaftery, observed: Option<f64>, title: &str) -> Result<String> {
    if values.is_empty() {
        return Err(CliError::input("histogram needs at least one value"));
    }
    if values.iter().chain(observed.iter()).any(|v| !v.is_finite()) {
        return Err(CliError::Numerical("non-finite log Bayes factor in histogram".into()));
    }
    let dmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let dmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = dmax - dmin <= 1e-12 * dmax.abs().max(1.0);
    let (bin_lo, bin_hi) = if degenerate {
        (dmin - 0.5, dmin + 0.5)
    } else {
        (dmin, dmax)
    };
    let (mut lo, mut hi) = if degenerate {
        (dmin - 1.0, dmin + 1.0)
    } else {
        let pad = 0.05 * (dmax - dmin);
        (dmin - pad, dmax + pad)
    };
    if let Some(o) = observed {
        let pad = 0.05 * (hi - lo);
        if o < lo {
            lo = o - pad;
        }
        if o > hi {
            hi = o + pad;
        }
    }

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let base = TOP + plot_h;
    let px = |v: f64| LEFT + (v - lo) / (hi - lo) * plot_w;

    let bins = ((values.len() as f64).sqrt().ceil() as usize).clamp(1, MAX_BINS);
    let width = (bin_hi - bin_lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in values {
        let k = (((v - bin_lo) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    let tallest = *counts.iter().max().unwrap_or(&1) as f64;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    let mut edges = vec![lo];
    for k in 0..7 {
        let (a, b) = band_bounds(scale, k);
        let (a, b) = (a.max(lo), b.min(hi));
        if a >= b {
            continue;
        }
        edges.push(b);
        let _ = writeln!(
            s,
            r#"<rect class="band" data-bin="{k}" data-lo="{a:.6e}" data-hi="{b:.6e}" x="{:.3}" y="{TOP:.3}" width="{:.3}" height="{plot_h:.3}" fill="{}"><title>{}</title></rect>"#,
            px(a),
            px(b) - px(a),
            BAND_FILL[k],
            EVIDENCE_BIN_NAMES[k]
        );
    }

    for (k, c) in counts.iter().enumerate() {
        if *c == 0 {
            continue;
        }
        let a = bin_lo + k as f64 * width;
        let h = *c as f64 / tallest * (plot_h - 10.0);
        let _ = writeln!(
            s,
            r##"<rect class="bar" data-count="{c}" x="{:.3}" y="{:.3}" width="{:.3}" height="{h:.3}" fill="#444444" fill-opacity="0.8" stroke="white" stroke-width="0.5"/>"##,
            px(a),
            base - h,
            px(a + width) - px(a)
        );
    }

    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.3}" y1="{base:.3}" x2="{:.3}" y2="{base:.3}" stroke="black"/>"#,
        LEFT + plot_w
    );
    let mut ticks: Vec<f64> = edges[1..edges.len() - 1].to_vec();
    if lo < 0.0 && hi > 0.0 && !ticks.contains(&0.0) {
        ticks.push(0.0);
    }
    ticks.sort_by(f64::total_cmp);
    for t in ticks {
        let x = px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.3}" y1="{base:.3}" x2="{x:.3}" y2="{:.3}" stroke="black"/><text x="{x:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            base + 5.0,
            base + 18.0,
            format_tick(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">log Bayes factor</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );

    if let Some(o) = observed {
        let x = px(o);
        let _ = writeln!(
            s,
            r##"<line class="observed" x1="{x:.3}" y1="{TOP:.3}" x2="{x:.3}" y2="{base:.3}" stroke="#c00000" stroke-dasharray="4 3"/>"##
        );
        let _ = writeln!(
            s,
            r##"<circle class="observed" data-value="{o:.16e}" cx="{x:.3}" cy="{base:.3}" r="5" fill="#c00000"/>"##
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn format_tick(v: f64) -> String {
    if v == v.round() {
        format!("{}", v as i64)
    } else {
        format!("{v:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attr(tag: &str, name: &str) -> f64 {
        let key = format!("{name}=\"");
        let start = tag.find(&key).unwrap() + key.len();
        let end = start + tag[start..].find('"').unwrap();
        tag[start..end].parse().unwrap()
    }

    fn tags<'a>(svg: &'a str, class: &str) -> Vec<&'a str> {
        let key = format!("class=\"{class}\"");
        svg.lines().filter(|l| l.contains(&key)).collect()
    }

    #[test]
    fn single_zero_sits_in_the_negligible_band() {
        let svg = emit_svg_histogram(&[0.0], &KassRaftery::default(), None, "a vs b").unwrap();
        let bars = tags(&svg, "bar");
        assert_eq!(bars.len(), 1);
        let centre = attr(bars[0], "x") + attr(bars[0], "width") / 2.0;
        let bands = tags(&svg, "band");
        assert_eq!(bands.len(), 1);
        assert_eq!(attr(bands[0], "data-bin"), 3.0);
        let mid = attr(bands[0], "x") + attr(bands[0], "width") / 2.0;
        assert!((centre - mid).abs() < 1e-3);
        assert!((centre - (LEFT + (WIDTH - LEFT - RIGHT) / 2.0)).abs() < 1e-3);
    }

    #[test]
    fn output_is_deterministic() {
        let v: Vec<f64> = (0..300).map(|i| ((i * 37 % 101) as f64 - 50.0) / 4.0).collect();
        let a = emit_svg_histogram(&v, &KassRaftery::default(), Some(1.5), "x").unwrap();
        let b = emit_svg_histogram(&v, &KassRaftery::default(), Some(1.5), "x").unwrap();
        assert_eq!(a, b);
        assert_eq!(tags(&a, "observed").len(), 2);
    }

    #[test]
    fn bands_tile_the_axis() {
        let v: Vec<f64> = (0..10_000)
            .map(|i| ((i * 7919 % 10_007) as f64 / 10_007.0 - 0.5) * 30.0)
            .collect();
        let svg = emit_svg_histogram(&v, &KassRaftery::default(), Some(-2.0), "t").unwrap();
        let bands = tags(&svg, "band");
        assert_eq!(bands.len(), 7);
        for w in bands.windows(2) {
            assert_eq!(attr(w[0], "data-hi"), attr(w[1], "data-lo"));
            let end = attr(w[0], "x") + attr(w[0], "width");
            assert!((end - attr(w[1], "x")).abs() < 2e-3);
        }
        let first = attr(bands[0], "x");
        let last = attr(bands[6], "x") + attr(bands[6], "width");
        assert!((first - LEFT).abs() < 2e-3);
        assert!((last - (WIDTH - RIGHT)).abs() < 2e-3);
        let total: f64 = tags(&svg, "bar").iter().map(|b| attr(b, "data-count")).sum();
        assert_eq!(total, 10_000.0);
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        let k = KassRaftery::default();
        assert!(matches!(emit_svg_histogram(&[], &k, None, ""), Err(CliError::Input(_))));
        assert!(matches!(
            emit_svg_histogram(&[f64::NAN], &k, None, ""),
            Err(CliError::Numerical(_))
        ));
    }

    #[test]
    fn title_is_escaped() {
        let svg = emit_svg_histogram(&[1.0, 2.0], &KassRaftery::default(), None, "a<b & c").unwrap();
        assert!(svg.contains("a&lt;b &amp; c"));
    }
}
