//! SVG 1.1 renderings of the grid structures. Coordinates are mapped so the
//! bounding box fills a square canvas with `y` pointing up.

use std::fmt::Write;

use crate::geometry::{BoundingBox, CompactSetMask, Point, WhitneyDecomposition};
use crate::john::JohnEstimate;
use crate::simplify::{SimplifiedDomain, SUBDIVISION};

const CANVAS: f64 = 1024.0;

struct Canvas {
    bbox: BoundingBox,
    body: String,
}

impl Canvas {
    fn new(bbox: BoundingBox) -> Self {
        Canvas {
            bbox,
            body: String::new(),
        }
    }

    fn scale(&self) -> f64 {
        CANVAS / self.bbox.side()
    }

    fn map(&self, p: Point) -> (f64, f64) {
        let o = self.bbox.origin();
        let s = self.scale();
        ((p.x - o.x) * s, CANVAS - (p.y - o.y) * s)
    }

    /// Axis-aligned rectangle given by its lower-left corner and size in box units.
    fn rect(&mut self, lower_left: Point, w: f64, h: f64, style: &str) {
        let (x, y) = self.map(Point::new(lower_left.x, lower_left.y + h));
        let s = self.scale();
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" {style}/>"#,
            w * s,
            h * s
        );
    }

    fn line(&mut self, a: Point, b: Point, style: &str) {
        let (x1, y1) = self.map(a);
        let (x2, y2) = self.map(b);
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" {style}/>"#
        );
    }

    fn polyline(&mut self, pts: &[Point], style: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" {style}/>"#,
            coords.join(" ")
        );
    }

    /// Horizontal runs of flagged cells on a `2^level` grid, one rect per run.
    fn cells(&mut self, level: u32, flags: impl Fn(usize) -> bool, style: &str) {
        let n = 1usize << level;
        let h = self.bbox.pixel_size(level);
        let o = self.bbox.origin();
        for j in 0..n {
            let mut i = 0;
            while i < n {
                if !flags(j * n + i) {
                    i += 1;
                    continue;
                }
                let start = i;
                while i < n && flags(j * n + i) {
                    i += 1;
                }
                let ll = Point::new(o.x + start as f64 * h, o.y + j as f64 * h);
                self.rect(ll, (i - start) as f64 * h, h, style);
            }
        }
    }

    fn finish(self) -> String {
        format!(
            concat!(
                r#"<?xml version="1.0" encoding="UTF-8"?>"#,
                "\n",
                r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#,
                "\n",
                r#"<rect x="0" y="0" width="{c}" height="{c}" fill="white"/>"#,
                "\n{body}</svg>\n"
            ),
            c = CANVAS,
            body = self.body
        )
    }
}

fn level_colour(level: u32) -> String {
    let hue = (level * 47) % 360;
    format!("hsl({hue},70%,40%)")
}

fn draw_squares(c: &mut Canvas, w: &WhitneyDecomposition, fill: &str) {
    for (k, q) in w.squares.iter().enumerate() {
        let side = w.side(k);
        let centre = q.center(&w.bbox);
        let ll = Point::new(centre.x - side / 2.0, centre.y - side / 2.0);
        let style = format!(
            r#"fill="{fill}" stroke="{}" stroke-width="0.5""#,
            level_colour(q.level)
        );
        c.rect(ll, side, side, &style);
    }
}

/// Set pixels in black and one rectangle per Whitney square, stroked by level.
pub fn whitney_svg(mask: &CompactSetMask, w: &WhitneyDecomposition) -> String {
    let mut c = Canvas::new(w.bbox);
    draw_squares(&mut c, w, "none");
    c.cells(mask.level, |k| mask.get_index(k), r#"fill="black""#);
    c.finish()
}

/// Squares, the set, and the worst certified arc in red.
pub fn john_svg(
    mask: &CompactSetMask,
    w: &WhitneyDecomposition,
    estimate: &JohnEstimate,
) -> String {
    let mut c = Canvas::new(w.bbox);
    draw_squares(&mut c, w, "none");
    c.cells(mask.level, |k| mask.get_index(k), r#"fill="black""#);
    if let Some(worst) = estimate.worst() {
        c.polyline(
            &worst.polyline,
            r#"fill="none" stroke="red" stroke-width="2""#,
        );
    }
    c.finish()
}

/// Squares grey, tree edges blue, slits red, gates white.
pub fn simplified_svg(s: &SimplifiedDomain) -> String {
    let w = &s.base;
    let mut c = Canvas::new(w.bbox);
    draw_squares(&mut c, w, "#e4e4e4");
    let ns = s.sub_n();
    c.cells(s.sub_level, |k| s.set_cells[k], r#"fill="black""#);
    c.cells(
        s.sub_level,
        |k| s.wall_owner[k] != usize::MAX,
        r#"fill="red""#,
    );
    // gates: open cells on the boundary ring of a graph square
    let mut gate = vec![false; ns * ns];
    for v in &s.graph.vertices {
        let (i0, j0, side) = w.pixel_block(v.square);
        let (x0, y0, e) = (i0 * SUBDIVISION, j0 * SUBDIVISION, side * SUBDIVISION - 1);
        for t in 0..=e {
            for (x, y) in [
                (x0 + t, y0),
                (x0 + t, y0 + e),
                (x0, y0 + t),
                (x0 + e, y0 + t),
            ] {
                let k = y * ns + x;
                if s.omega_hat[k] && !s.set_cells[k] {
                    gate[k] = true;
                }
            }
        }
    }
    c.cells(s.sub_level, |k| gate[k], r#"fill="white""#);
    for (a, b) in s.graph.edges() {
        c.line(
            w.center(a),
            w.center(b),
            r#"stroke="blue" stroke-width="1""#,
        );
    }
    c.finish()
}

/// Heat map of nonnegative values on a `2^level` grid, averaged down to at
/// most 256 blocks per side. `NaN` marks cells left blank.
pub fn heat_map_svg(bbox: BoundingBox, level: u32, values: &[f64]) -> String {
    let n = 1usize << level;
    let blocks = n.min(256);
    let f = n / blocks;
    let mut avg = vec![f64::NAN; blocks * blocks];
    for bj in 0..blocks {
        for bi in 0..blocks {
            let (mut sum, mut count) = (0.0, 0usize);
            for j in bj * f..(bj + 1) * f {
                for i in bi * f..(bi + 1) * f {
                    let v = values[j * n + i];
                    if v.is_finite() {
                        sum += v;
                        count += 1;
                    }
                }
            }
            if count > 0 {
                avg[bj * blocks + bi] = sum / count as f64;
            }
        }
    }
    let max = avg
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let mut c = Canvas::new(bbox);
    let h = bbox.side() / blocks as f64;
    let o = bbox.origin();
    for bj in 0..blocks {
        for bi in 0..blocks {
            let v = avg[bj * blocks + bi];
            if !v.is_finite() || v <= 0.0 {
                continue;
            }
            // square-root scaling keeps faint collars visible
            let t = if max > 0.0 { (v / max).sqrt() } else { 0.0 };
            let style = format!(r#"fill="hsl({:.0},90%,50%)""#, 240.0 * (1.0 - t));
            c.rect(
                Point::new(o.x + bi as f64 * h, o.y + bj as f64 * h),
                h,
                h,
                &style,
            );
        }
    }
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, whitney, ShapeSpec};

    #[test]
    fn whitney_svg_has_one_rect_per_square() {
        let bbox = BoundingBox::new(Point::ORIGIN, 1.0).unwrap();
        let mask = rasterize(&ShapeSpec::disk(0.5), bbox, 5).unwrap();
        let w = whitney(&mask, 5).unwrap();
        let svg = whitney_svg(&mask, &w);
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
        let rects = svg.matches("<rect").count();
        // background, squares, and at least one run of set pixels
        assert!(rects > w.len() + 1, "{rects} vs {}", w.len());
    }

    #[test]
    fn heat_map_skips_blank_cells() {
        let bbox = BoundingBox::new(Point::ORIGIN, 1.0).unwrap();
        let mut v = vec![f64::NAN; 16];
        v[5] = 1.0;
        let svg = heat_map_svg(bbox, 2, &v);
        assert_eq!(svg.matches("<rect").count(), 2);
    }
}
