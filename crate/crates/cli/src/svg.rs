//! Minimal log-log line plot writer.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Plots every series on shared log-scaled axes. Points with a
/// non-positive coordinate are dropped.
pub fn log_log_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let logged: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| *x > 0.0 && *y > 0.0)
                .map(|(x, y)| (x.log10(), y.log10()))
                .collect()
        })
        .collect();
    let (x0, x1) = bounds(logged.iter().flatten().map(|p| p.0));
    let (y0, y1) = bounds(logged.iter().flatten().map(|p| p.1));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title))
        .unwrap();
    writeln!(
        s,
        r#"<path d="M{m} {t} L{m} {b} L{r} {b}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    )
    .unwrap();
    for (v, pos) in [(x0, sx(x0)), (x1, sx(x1))] {
        writeln!(
            s,
            r#"<text x="{pos:.2}" y="{}" text-anchor="middle" font-size="11">1e{v:.2}</text>"#,
            HEIGHT - MARGIN + 16.0
        )
        .unwrap();
    }
    for (v, pos) in [(y0, sy(y0)), (y1, sy(y1))] {
        writeln!(s, r#"<text x="{}" y="{pos:.2}" text-anchor="end" font-size="11">1e{v:.2}</text>"#, MARGIN - 4.0)
            .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{y}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {y})">{}</text>"#,
        escape(y_label),
        y = HEIGHT / 2.0
    )
    .unwrap();

    for (k, (serie, pts)) in series.iter().zip(&logged).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let dash = if serie.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let path: Vec<String> = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| format!("{}{:.2} {:.2}", if i == 0 { "M" } else { "L" }, sx(x), sy(y)))
            .collect();
        if !path.is_empty() {
            writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#, path.join(" "))
                .unwrap();
        }
        if !serie.dashed {
            for &(x, y) in pts {
                writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y)).unwrap();
            }
        }
        let ly = MARGIN + 16.0 * k as f64;
        writeln!(
            s,
            r#"<text x="{}" y="{ly}" font-size="12" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 160.0,
            escape(&serie.label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_contains_series() {
        let s = log_log_plot(
            "ns <sweep>",
            "delta",
            "value",
            &[
                Series { label: "measured".into(), points: vec![(0.01, 0.1), (0.1, 0.3)], dashed: false },
                Series { label: "reference".into(), points: vec![(0.01, 0.1), (0.1, 0.316)], dashed: true },
            ],
        );
        assert!(s.starts_with("<svg"));
        assert!(s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<circle").count(), 2);
        assert!(s.contains("ns &lt;sweep&gt;"));
        assert!(s.contains("stroke-dasharray"));
    }

    #[test]
    fn drops_non_positive_points() {
        let s = log_log_plot(
            "",
            "",
            "",
            &[Series { label: "a".into(), points: vec![(0.0, 1.0), (1.0, 0.0), (2.0, 3.0)], dashed: false }],
        );
        assert_eq!(s.matches("<circle").count(), 1);
    }
}
