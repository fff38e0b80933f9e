//! Minimal log-log SVG plots.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

/// `y = prefactor · x^exponent` drawn over `[from, to]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLine {
    pub exponent: f64,
    pub prefactor: f64,
    pub from: f64,
    pub to: f64,
    pub label: String,
}

impl PowerLine {
    /// Line of the given exponent through `(x, y)`.
    pub fn through(exponent: f64, x: f64, y: f64, from: f64, to: f64, label: impl Into<String>) -> Self {
        PowerLine {
            exponent,
            prefactor: y / x.powf(exponent),
            from,
            to,
            label: label.into(),
        }
    }

    fn at(&self, x: f64) -> f64 {
        self.prefactor * x.powf(self.exponent)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LogLogPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    pub fit: Option<PowerLine>,
    pub reference: Option<PowerLine>,
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    /// Decade-aligned range covering the positive values.
    fn covering(values: impl Iterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| *v > 0.0 && v.is_finite()) {
            lo = lo.min(v.log10());
            hi = hi.max(v.log10());
        }
        if !lo.is_finite() {
            return Axis { lo: 0.0, hi: 1.0 };
        }
        let (lo, hi) = (lo.floor(), hi.ceil());
        Axis {
            lo,
            hi: if hi > lo { hi } else { lo + 1.0 },
        }
    }

    fn frac(&self, v: f64) -> f64 {
        (v.log10() - self.lo) / (self.hi - self.lo)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LogLogPlot {
    pub fn to_svg(&self) -> String {
        let lines: Vec<&PowerLine> = self.fit.iter().chain(&self.reference).collect();
        let xs = Axis::covering(self.points.iter().map(|p| p.0));
        let line_ys = lines
            .iter()
            .flat_map(|l| [l.at(l.from.max(10f64.powf(xs.lo))), l.at(l.to.min(10f64.powf(xs.hi)))]);
        let ys = Axis::covering(self.points.iter().map(|p| p.1).chain(line_ys));
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let px = |x: f64| LEFT + xs.frac(x) * pw;
        let py = |y: f64| TOP + (1.0 - ys.frac(y)) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for k in xs.lo as i32..=xs.hi as i32 {
            let x = px(10f64.powi(k));
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{k}</text>"##,
                TOP + ph,
                TOP + ph + 18.0
            );
        }
        for k in ys.lo as i32..=ys.hi as i32 {
            let y = py(10f64.powi(k));
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{k}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for &(x, y) in self.points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0) {
            let _ = writeln!(
                s,
                r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#1f77b4"/>"##,
                px(x),
                py(y)
            );
        }
        let styles = [("#d62728", ""), ("#555", r#" stroke-dasharray="6 4""#)];
        let mut legend_y = TOP + 16.0;
        for (line, (color, dash)) in self.fit.iter().map(|l| (l, styles[0])).chain(self.reference.iter().map(|l| (l, styles[1]))) {
            let (a, b) = (line.from.max(10f64.powf(xs.lo)), line.to.min(10f64.powf(xs.hi)));
            if a < b {
                let _ = writeln!(
                    s,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                    px(a),
                    py(line.at(a)),
                    px(b),
                    py(line.at(b))
                );
            }
            let lx = LEFT + pw - 180.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
                legend_y - 4.0,
                lx + 24.0,
                legend_y - 4.0,
                lx + 30.0,
                legend_y,
                escape(&line.label)
            );
            legend_y += 18.0;
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_contains_points_and_lines() {
        let points: Vec<(f64, f64)> = (1..=20).map(|k| (k as f64 * 10.0, (k as f64 * 10.0).powf(-0.5))).collect();
        let plot = LogLogPlot {
            title: "a < b".into(),
            x_label: "t".into(),
            y_label: "p".into(),
            fit: Some(PowerLine::through(-0.5, 10.0, 10f64.powf(-0.5), 10.0, 200.0, "fit")),
            reference: Some(PowerLine::through(-1.0, 10.0, 0.3, 10.0, 200.0, "reference")),
            points,
        };
        let svg = plot.to_svg();
        assert_eq!(svg.matches("<circle").count(), 20);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("a &lt; b"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn empty_plot_still_renders() {
        let svg = LogLogPlot::default().to_svg();
        assert!(svg.starts_with("<svg"));
    }
}
