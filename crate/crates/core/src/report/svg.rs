//! Deterministic SVG charts. All coordinates are printed with fixed precision
//! so identical inputs give identical bytes.

use std::fmt::Write;

use chrono::NaiveDate;

use super::CorrelationMatrix;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Compact tick label with at most 4 significant digits.
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs();
    if !(1e-3..1e6).contains(&mag) {
        return format!("{v:.2e}");
    }
    let decimals = (3 - mag.log10().floor() as i32).clamp(0, 6) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Line chart of a dated series with labeled axes.
pub fn render_line_chart(series: &[(NaiveDate, f64)], title: &str, x_label: &str, y_label: &str) -> String {
    let mut pts: Vec<(NaiveDate, f64)> = series.iter().filter(|(_, v)| v.is_finite()).copied().collect();
    pts.sort_by_key(|&(d, _)| d);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let (first, last) = match (pts.first(), pts.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => (NaiveDate::MIN, NaiveDate::MIN),
    };
    let span = (last - first).num_days().max(0) as f64;
    let (mut lo, mut hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 0.0 { lo.abs() * 0.1 } else { 1.0 };
        lo -= pad;
        hi += pad;
    } else {
        let pad = (hi - lo) * 0.05;
        lo -= pad;
        hi += pad;
    }
    let x_of = |d: NaiveDate| {
        if span == 0.0 {
            LEFT + plot_w / 2.0
        } else {
            LEFT + (d - first).num_days() as f64 / span * plot_w
        }
    };
    let y_of = |v: f64| TOP + (hi - v) / (hi - lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    // axes
    let _ = writeln!(
        s,
        r#"<path d="M{LEFT:.2},{TOP:.2}V{:.2}H{:.2}" fill="none" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w
    );
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0,
            tick_label(v)
        );
    }
    if !pts.is_empty() {
        let ticks = pts.len().min(6);
        let mut shown: Vec<usize> = (0..ticks)
            .map(|i| {
                if ticks == 1 {
                    0
                } else {
                    i * (pts.len() - 1) / (ticks - 1)
                }
            })
            .collect();
        shown.dedup();
        for i in shown {
            let x = x_of(pts[i].0);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                TOP + plot_h,
                TOP + plot_h + 5.0,
                TOP + plot_h + 20.0,
                pts[i].0
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 20.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(y_label)
    );
    let points: Vec<String> = pts
        .iter()
        .map(|&(d, v)| format!("{:.2},{:.2}", x_of(d), y_of(v)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{}"/>"##,
        points.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

const NEGATIVE: (f64, f64, f64) = (33.0, 102.0, 172.0);
const NEUTRAL: (f64, f64, f64) = (247.0, 247.0, 247.0);
const POSITIVE: (f64, f64, f64) = (178.0, 24.0, 43.0);

/// Diverging blue-white-red color for a value in `[-1, 1]`.
pub fn diverging_color(v: f64) -> (u8, u8, u8) {
    let t = v.clamp(-1.0, 1.0);
    let end = if t < 0.0 { NEGATIVE } else { POSITIVE };
    let a = t.abs();
    let mix = |n: f64, e: f64| (n + (e - n) * a).round() as u8;
    (mix(NEUTRAL.0, end.0), mix(NEUTRAL.1, end.1), mix(NEUTRAL.2, end.2))
}

/// Heatmap with one annotated cell per entry; undefined cells are hatched and unlabeled.
pub fn render_heatmap(matrix: &CorrelationMatrix, title: &str) -> String {
    let k = matrix.len();
    let cell = 64.0;
    let left = 190.0;
    let top = 60.0;
    let width = left + cell * k as f64 + 20.0;
    let height = top + cell * k as f64 + 190.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    s.push_str(concat!(
        r##"<defs><pattern id="undefined" width="8" height="8" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">"##,
        r##"<rect width="8" height="8" fill="#d9d9d9"/><line x1="0" y1="0" x2="0" y2="8" stroke="#8c8c8c" stroke-width="2"/></pattern></defs>"##,
        "\n"
    ));
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="30" text-anchor="middle" font-size="16">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    for (i, label) in matrix.labels.iter().enumerate() {
        let y = top + cell * (i as f64 + 0.5) + 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{y:.2}" text-anchor="end">{}</text>"#,
            left - 8.0,
            escape(label)
        );
        let x = left + cell * (i as f64 + 0.5);
        let yb = top + cell * k as f64 + 10.0;
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{yb:.2}" text-anchor="end" transform="rotate(-60 {x:.2} {yb:.2})">{}</text>"#,
            escape(label)
        );
    }
    for i in 0..k {
        for j in 0..k {
            let x = left + cell * j as f64;
            let y = top + cell * i as f64;
            match matrix.get(i, j) {
                Some(v) => {
                    let (r, g, b) = diverging_color(v);
                    let ink = if v.abs() > 0.6 { "white" } else { "black" };
                    let _ = writeln!(
                        s,
                        r##"<rect x="{x:.2}" y="{y:.2}" width="{cell:.2}" height="{cell:.2}" fill="#{r:02x}{g:02x}{b:02x}" stroke="white"/><text x="{:.2}" y="{:.2}" text-anchor="middle" fill="{ink}">{v:.2}</text>"##,
                        x + cell / 2.0,
                        y + cell / 2.0 + 4.0
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        r#"<rect x="{x:.2}" y="{y:.2}" width="{cell:.2}" height="{cell:.2}" fill="url(#undefined)" stroke="white" class="undefined"/>"#
                    );
                }
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
