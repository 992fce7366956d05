use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use gravicaustic_core::Vec2;
use serde::Serialize;

/// Fixed 17-significant-digit formatting so reruns are byte-identical.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { text: format!("{}\n", header.join(",")) }
    }

    /// `None` cells are left blank.
    pub fn row(&mut self, cells: &[Option<f64>]) {
        let cells: Vec<String> = cells.iter().map(|c| c.map(num).unwrap_or_default()).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, &self.text).with_context(|| format!("cannot write {}", path.display()))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

enum Item {
    Path { points: Vec<Vec2>, stroke: &'static str, width: f64, dash: bool },
    Circle { centre: Vec2, radius: f64, stroke: &'static str, fill: &'static str },
    HLine { y: f64, stroke: &'static str },
}

/// Hand-emitted SVG in data coordinates; y is flipped when drawing.
#[derive(Default)]
pub struct Svg {
    items: Vec<Item>,
    lo: Option<Vec2>,
    hi: Option<Vec2>,
}

impl Svg {
    fn extend(&mut self, p: Vec2) {
        if !p.is_finite() {
            return;
        }
        self.lo = Some(self.lo.map_or(p, |l| Vec2::new(l.x.min(p.x), l.y.min(p.y))));
        self.hi = Some(self.hi.map_or(p, |h| Vec2::new(h.x.max(p.x), h.y.max(p.y))));
    }

    /// Polyline through `points`; `None` breaks the line.
    pub fn curve(&mut self, points: &[Option<Vec2>], stroke: &'static str, width: f64) {
        self.curve_styled(points, stroke, width, false);
    }

    pub fn dashed(&mut self, points: &[Option<Vec2>], stroke: &'static str, width: f64) {
        self.curve_styled(points, stroke, width, true);
    }

    fn curve_styled(&mut self, points: &[Option<Vec2>], stroke: &'static str, width: f64, dash: bool) {
        let mut run = Vec::new();
        for p in points.iter().copied().chain([None]) {
            match p.filter(|p| p.is_finite()) {
                Some(p) => {
                    self.extend(p);
                    run.push(p);
                }
                None if run.len() >= 2 => {
                    self.items.push(Item::Path { points: std::mem::take(&mut run), stroke, width, dash })
                }
                None => run.clear(),
            }
        }
    }

    pub fn dot(&mut self, centre: Vec2, radius: f64, fill: &'static str) {
        if centre.is_finite() {
            self.extend(centre);
            self.items.push(Item::Circle { centre, radius, stroke: "none", fill });
        }
    }

    pub fn ring(&mut self, centre: Vec2, radius: f64, stroke: &'static str) {
        if centre.is_finite() && radius.is_finite() {
            self.extend(centre - Vec2::new(radius, radius));
            self.extend(centre + Vec2::new(radius, radius));
            self.items.push(Item::Circle { centre, radius, stroke, fill: "none" });
        }
    }

    /// Horizontal line across the final view; does not widen it.
    pub fn hline(&mut self, y: f64, stroke: &'static str) {
        if y.is_finite() {
            self.items.push(Item::HLine { y, stroke });
        }
    }

    /// Current data extents.
    pub fn extents(&self) -> Option<(Vec2, Vec2)> {
        self.lo.zip(self.hi)
    }

    pub fn render(&self) -> String {
        let (lo, hi) = self.extents().unwrap_or((Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0)));
        let span = Vec2::new((hi.x - lo.x).max(1e-9), (hi.y - lo.y).max(1e-9));
        let (mx, my) = (0.05 * span.x, 0.05 * span.y);
        let (x0, y0) = (lo.x - mx, -(hi.y + my));
        let (w, h) = (span.x + 2.0 * mx, span.y + 2.0 * my);
        let unit = w.max(h) / 800.0;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {y0} {w} {h}" width="800" height="{}">"#,
            (800.0 * h / w).round()
        );
        let _ = writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="white"/>"#);
        for item in &self.items {
            match item {
                Item::Path { points, stroke, width, dash } => {
                    let mut d = String::new();
                    for (i, p) in points.iter().enumerate() {
                        let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, p.x, -p.y);
                    }
                    let dash = if *dash { format!(r#" stroke-dasharray="{} {}""#, 4.0 * unit, 3.0 * unit) } else { String::new() };
                    let _ = writeln!(
                        s,
                        r#"<path d="{}" fill="none" stroke="{stroke}" stroke-width="{}"{dash}/>"#,
                        d.trim_end(),
                        width * unit
                    );
                }
                Item::Circle { centre, radius, stroke, fill } => {
                    let r = if *fill == "none" { *radius } else { radius * unit };
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{}" cy="{}" r="{r}" fill="{fill}" stroke="{stroke}" stroke-width="{}"/>"#,
                        centre.x,
                        -centre.y,
                        unit
                    );
                }
                Item::HLine { y, stroke } => {
                    let _ = writeln!(
                        s,
                        r#"<line x1="{x0}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{unit}" stroke-dasharray="{} {}"/>"#,
                        -y,
                        x0 + w,
                        -y,
                        6.0 * unit,
                        4.0 * unit
                    );
                }
            }
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()).with_context(|| format!("cannot write {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn blank_cells_and_lf() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&[Some(1.0), None]);
        assert_eq!(c.text, "a,b\n1.0000000000000000e0,\n");
    }

    #[test]
    fn view_box_has_a_five_percent_margin() {
        let mut s = Svg::default();
        s.curve(&[Some(Vec2::new(0.0, 0.0)), Some(Vec2::new(10.0, 20.0))], "black", 1.0);
        assert!(s.render().contains(r#"viewBox="-0.5 -21 11 22""#), "{}", s.render());
    }

    #[test]
    fn gaps_split_paths() {
        let mut s = Svg::default();
        let p = |x: f64| Some(Vec2::new(x, x));
        s.curve(&[p(0.0), p(1.0), None, p(2.0), p(3.0), None, p(4.0)], "black", 1.0);
        assert_eq!(s.render().matches("<path").count(), 2);
    }
}
