//! Self-contained SVG plots drawn straight from result rows.

use std::collections::BTreeMap;
use std::fmt::Write;

use sclab_core::experiments::{ExperimentKind, ExperimentResult, ResultRow};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-3..1e5).contains(&v.abs()) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn header(title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    )
    .unwrap();
    s
}

/// Line plot; points with non-finite coordinates (or non-positive `y` on a
/// log axis) are dropped.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let keep = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!log_y || y > 0.0);
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied().filter(keep))
        .map(|(x, y)| (x, ty(y)))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 <= 0.0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = header(title);
    writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
    )
    .unwrap();
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let label_y = if log_y { 10f64.powf(fy) } else { fy };
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(fx),
            TOP + ph + 18.0,
            tick(fx)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            sy(fy) + 4.0,
            tick(label_y)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 12.0,
        escape(x_label)
    )
    .unwrap();
    let ylab = if log_y { format!("{y_label} (log scale)") } else { y_label.to_string() };
    writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&ylab)
    )
    .unwrap();
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points: Vec<(f64, f64)> = ser.points.iter().copied().filter(keep).collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(ty(y))))
            .collect();
        let dash = if ser.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        if !path.is_empty() {
            writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
                path.join(" ")
            )
            .unwrap();
        }
        for &(x, y) in &points {
            writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(ty(y))
            )
            .unwrap();
        }
        let ly = TOP + 14.0 + 18.0 * i as f64;
        writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"{dash}/>"#,
            W - RIGHT + 10.0,
            W - RIGHT + 30.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            W - RIGHT + 36.0,
            ly + 4.0,
            escape(&ser.name)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn shade(v: f64) -> String {
    if !v.is_finite() {
        return "#cccccc".into();
    }
    let t = v.clamp(0.0, 1.0);
    // white to dark blue
    let r = (255.0 * (1.0 - t) + 8.0 * t).round() as u8;
    let g = (255.0 * (1.0 - t) + 48.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t) + 107.0 * t).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heatmap of values in `[0, 1]`; `values[row][col]`, `NaN` cells are grey.
pub fn heatmap(title: &str, x_label: &str, y_label: &str, x_ticks: &[String], y_ticks: &[String], values: &[Vec<f64>]) -> String {
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let cw = pw / x_ticks.len().max(1) as f64;
    let ch = ph / y_ticks.len().max(1) as f64;
    let mut s = header(title);
    for (r, row) in values.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let x = LEFT + c as f64 * cw;
            let y = TOP + r as f64 * ch;
            writeln!(
                s,
                r##"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="{}" stroke="#fff"/>"##,
                shade(v)
            )
            .unwrap();
            let text_color = if v.is_finite() && v > 0.55 { "white" } else { "black" };
            let label = if v.is_finite() { format!("{v:.2}") } else { "-".into() };
            writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" fill="{text_color}">{label}</text>"#,
                x + cw / 2.0,
                y + ch / 2.0 + 4.0
            )
            .unwrap();
        }
    }
    for (c, t) in x_ticks.iter().enumerate() {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + (c as f64 + 0.5) * cw,
            TOP + ph + 18.0,
            escape(t)
        )
        .unwrap();
    }
    for (r, t) in y_ticks.iter().enumerate() {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            TOP + (r as f64 + 0.5) * ch + 4.0,
            escape(t)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 12.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    )
    .unwrap();
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let y = TOP + ph - (i as f64 + 1.0) * 24.0;
        writeln!(
            s,
            r##"<rect x="{:.1}" y="{y:.1}" width="20" height="20" fill="{}" stroke="#444"/>"##,
            W - RIGHT + 20.0,
            shade(v)
        )
        .unwrap();
        writeln!(s, r#"<text x="{:.1}" y="{:.1}">{v:.2}</text>"#, W - RIGHT + 46.0, y + 14.0).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect()
}

fn rows<'a>(r: &'a ExperimentResult, stat: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
    r.rows.iter().filter(move |x| x.statistic == stat)
}

fn noise_text(row: &ResultRow) -> String {
    row.noise.map(|n| n.to_string()).unwrap_or_else(|| "none".into())
}

/// The plots for one result, as `(file name, document)` pairs.
pub fn plots_for(result: &ExperimentResult) -> Vec<(String, String)> {
    match result.metadata.experiment {
        ExperimentKind::CoherenceTail => coherence_plots(result),
        ExperimentKind::InterferenceTail => interference_plots(result),
        ExperimentKind::RecoveryPhase => recovery_plots(result),
        ExperimentKind::EnergyFloor => energy_plots(result),
        ExperimentKind::QuadraticSeparation => separation_plots(result),
    }
}

fn coherence_plots(r: &ExperimentResult) -> Vec<(String, String)> {
    let mut med: BTreeMap<usize, Series> = BTreeMap::new();
    let mut floor: BTreeMap<usize, Series> = BTreeMap::new();
    // series are keyed by the position of F within each d, which follows the
    // order of the F-rules in the grid
    let mut rank: BTreeMap<usize, usize> = BTreeMap::new();
    for row in rows(r, "median_coherence") {
        let k = rank.entry(row.d).or_insert(0);
        let idx = *k;
        *k += 1;
        med.entry(idx)
            .or_insert_with(|| Series {
                name: format!("median μ, F-rule {}", idx + 1),
                points: vec![],
                dashed: false,
            })
            .points
            .push((row.d as f64, row.value));
    }
    rank.clear();
    for row in rows(r, "min_coherence") {
        let k = rank.entry(row.d).or_insert(0);
        let idx = *k;
        *k += 1;
        if let Some(b) = &row.bound {
            floor
                .entry(idx)
                .or_insert_with(|| Series {
                    name: format!("Welch floor, F-rule {}", idx + 1),
                    points: vec![],
                    dashed: true,
                })
                .points
                .push((row.d as f64, b.value));
        }
    }
    let series: Vec<Series> = med.into_values().chain(floor.into_values()).collect();
    vec![(
        "coherence.svg".into(),
        line_plot("Coherence of random codes", "d", "coherence", &series, false),
    )]
}

fn interference_plots(r: &ExperimentResult) -> Vec<(String, String)> {
    let mut emp: BTreeMap<(usize, usize), Series> = BTreeMap::new();
    let mut bound = Series {
        name: "2exp(-k²/2)".into(),
        points: vec![],
        dashed: true,
    };
    for row in &r.rows {
        let Some(k) = row.statistic.strip_prefix("exceedance_k=").and_then(|k| k.parse::<f64>().ok()) else {
            continue;
        };
        let m = row.s.unwrap_or(0);
        emp.entry((row.d, m))
            .or_insert_with(|| Series {
                name: format!("d={} m={m}", row.d),
                points: vec![],
                dashed: false,
            })
            .points
            .push((k, row.value));
        if let Some(b) = &row.bound {
            if !bound.points.iter().any(|p| p.0 == k) {
                bound.points.push((k, b.value));
            }
        }
    }
    let mut series: Vec<Series> = emp.into_values().collect();
    series.push(bound);
    vec![(
        "interference_tail.svg".into(),
        line_plot(
            "Interference tail Pr{|S| > k·sqrt(m/d)}",
            "k",
            "exceedance",
            &series,
            true,
        ),
    )]
}

fn recovery_plots(r: &ExperimentResult) -> Vec<(String, String)> {
    let mut by_noise: BTreeMap<String, Vec<&ResultRow>> = BTreeMap::new();
    for row in rows(r, "success_rate") {
        by_noise.entry(noise_text(row)).or_default().push(row);
    }
    let mut out = Vec::new();
    for (noise, group) in by_noise {
        let mut s_vals: Vec<usize> = group.iter().filter_map(|x| x.s).collect();
        s_vals.sort_unstable();
        s_vals.dedup();
        let mut cells: Vec<(usize, usize)> = group.iter().map(|x| (x.d, x.features)).collect();
        cells.sort_unstable();
        cells.dedup();
        let values: Vec<Vec<f64>> = cells
            .iter()
            .map(|&(d, f)| {
                s_vals
                    .iter()
                    .map(|&s| {
                        group
                            .iter()
                            .find(|x| x.d == d && x.features == f && x.s == Some(s))
                            .map_or(f64::NAN, |x| x.value)
                    })
                    .collect()
            })
            .collect();
        let xt: Vec<String> = s_vals.iter().map(|s| s.to_string()).collect();
        let yt: Vec<String> = cells.iter().map(|(d, f)| format!("d={d} F={f}")).collect();
        out.push((
            format!("phase_{}.svg", slug(&noise)),
            heatmap(
                &format!("Exact recovery rate, noise {noise}"),
                "s",
                "(d, F)",
                &xt,
                &yt,
                &values,
            ),
        ));
        let series: Vec<Series> = cells
            .iter()
            .map(|&(d, f)| Series {
                name: format!("d={d} F={f}"),
                points: group
                    .iter()
                    .filter(|x| x.d == d && x.features == f)
                    .map(|x| (x.s.unwrap_or(0) as f64, x.value))
                    .collect(),
                dashed: false,
            })
            .collect();
        out.push((
            format!("success_{}.svg", slug(&noise)),
            line_plot(&format!("Exact recovery rate, noise {noise}"), "s", "success rate", &series, false),
        ));
    }
    out
}

fn energy_plots(r: &ExperimentResult) -> Vec<(String, String)> {
    let mut series: BTreeMap<(usize, usize, String), Series> = BTreeMap::new();
    let mut floors: BTreeMap<(usize, usize), Series> = BTreeMap::new();
    for row in &r.rows {
        let Some(kind) = row.statistic.strip_prefix("energy_mean_") else {
            continue;
        };
        let s = row.s.unwrap_or(0) as f64;
        series
            .entry((row.d, row.features, kind.to_string()))
            .or_insert_with(|| Series {
                name: format!("{kind} d={} F={}", row.d, row.features),
                points: vec![],
                dashed: false,
            })
            .points
            .push((s, row.value));
        if let Some(b) = &row.bound {
            let f = floors.entry((row.d, row.features)).or_insert_with(|| Series {
                name: format!("floor d={} F={}", row.d, row.features),
                points: vec![],
                dashed: true,
            });
            if !f.points.iter().any(|p| p.0 == s) {
                f.points.push((s, b.value));
            }
        }
    }
    let all: Vec<Series> = series.into_values().chain(floors.into_values()).collect();
    vec![(
        "energy_floor.svg".into(),
        line_plot("Linear cross-talk energy per feature", "s", "E|Ab|²/F", &all, false),
    )]
}

fn separation_plots(r: &ExperimentResult) -> Vec<(String, String)> {
    let success = Series {
        name: "threshold success".into(),
        points: rows(r, "threshold_success_rate").map(|x| (x.d as f64, x.value)).collect(),
        dashed: false,
    };
    let energy = Series {
        name: "linear energy".into(),
        points: rows(r, "linear_energy_mean").map(|x| (x.d as f64, x.value)).collect(),
        dashed: false,
    };
    let floor = Series {
        name: "energy floor".into(),
        points: rows(r, "linear_energy_mean")
            .filter_map(|x| x.bound.as_ref().map(|b| (x.d as f64, b.value)))
            .collect(),
        dashed: true,
    };
    vec![
        (
            "separation_threshold.svg".into(),
            line_plot("Threshold recovery at F = d²", "d", "success rate", &[success], false),
        ),
        (
            "separation_energy.svg".into(),
            line_plot("Linear readout energy at F = d²", "d", "E|Ab|²/F", &[energy, floor], false),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_are_closed_svg() {
        let s = line_plot(
            "t",
            "x",
            "y",
            &[Series {
                name: "a<b".into(),
                points: vec![(1.0, 2.0), (2.0, f64::NAN), (3.0, 1.0)],
                dashed: false,
            }],
            false,
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a&lt;b"));
        assert!(!s.contains("NaN"));
        let h = heatmap("h", "s", "d", &["1".into()], &["d=8".into()], &[vec![0.5]]);
        assert!(h.contains("0.50"));
    }

    #[test]
    fn log_axis_drops_zero() {
        let s = line_plot(
            "t",
            "x",
            "y",
            &[Series {
                name: "a".into(),
                points: vec![(1.0, 0.0), (2.0, 0.1)],
                dashed: false,
            }],
            true,
        );
        assert_eq!(s.matches("<circle").count(), 1);
    }
}
