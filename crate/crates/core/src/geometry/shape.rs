use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mask::{BoundingBox, CompactSetMask, Point, MAX_LEVEL, MIN_LEVEL};
use crate::{Error, Result};

/// Generator description of a compact set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    /// Closed disk.
    Disk { center: Point, radius: f64 },
    /// Circle (the boundary of a disk only).
    Circle { center: Point, radius: f64 },
    /// Union of closed disks `(center, radius)`.
    Disks { disks: Vec<(Point, f64)> },
    /// Straight segment.
    Segment { a: Point, b: Point },
    /// Closed filled polygon.
    Polygon { vertices: Vec<Point> },
    /// Product Cantor dust on the square of side `side` centered at the
    /// origin, keeping the two outer intervals of relative length `ratio`.
    Cantor { ratio: f64, depth: u32, side: f64 },
    /// Product of two Smith-Volterra-Cantor sets whose limiting area is `area`.
    FatCantor { area: f64, side: f64 },
    /// Koch snowflake curve of the given depth.
    Koch { depth: u32, side: f64 },
    /// Cardioid curve `r = a (1 - cos t)`, translated so its bounding box is
    /// centered at the origin.
    Cardioid { a: f64 },
    /// Filled Julia set of `z^2 + c`.
    Julia {
        c: (f64, f64),
        max_iter: u32,
        escape_radius: f64,
    },
    /// The single pixel containing `center`.
    Dot { center: Point },
    /// Externally produced mask; not re-rasterizable.
    Custom { description: String },
}

impl ShapeSpec {
    pub fn custom(description: impl Into<String>) -> Self {
        ShapeSpec::Custom {
            description: description.into(),
        }
    }

    pub fn disk(radius: f64) -> Self {
        ShapeSpec::Disk {
            center: Point::ORIGIN,
            radius,
        }
    }

    pub fn circle(radius: f64) -> Self {
        ShapeSpec::Circle {
            center: Point::ORIGIN,
            radius,
        }
    }

    pub fn segment(length: f64) -> Self {
        ShapeSpec::Segment {
            a: Point::new(-length / 2.0, 0.0),
            b: Point::new(length / 2.0, 0.0),
        }
    }

    pub fn julia(re: f64, im: f64) -> Self {
        ShapeSpec::Julia {
            c: (re, im),
            max_iter: 200,
            escape_radius: 2.0,
        }
    }

    /// Cardioid translation: the curve's x-range is `[-2a, a/4]`.
    fn cardioid_shift(a: f64) -> f64 {
        0.875 * a
    }

    /// A point of a bounded complementary component, for shapes that have one.
    pub fn interior_point(&self) -> Option<Point> {
        match self {
            ShapeSpec::Circle { center, .. } => Some(*center),
            ShapeSpec::Cardioid { a } => Some(Point::new(-a + Self::cardioid_shift(*a), 0.0)),
            ShapeSpec::Koch { .. } => Some(Point::ORIGIN),
            _ => None,
        }
    }

    /// Axis-aligned bounding rectangle `(min, max)` of the true set.
    fn extent(&self) -> Option<(Point, Point)> {
        let from_points = |pts: &[Point]| {
            let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
            let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
            for p in pts {
                lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
            }
            (lo, hi)
        };
        match self {
            ShapeSpec::Disk { center, radius } | ShapeSpec::Circle { center, radius } => Some((
                Point::new(center.x - radius, center.y - radius),
                Point::new(center.x + radius, center.y + radius),
            )),
            ShapeSpec::Disks { disks } => {
                let pts: Vec<Point> = disks
                    .iter()
                    .flat_map(|&(c, r)| {
                        [Point::new(c.x - r, c.y - r), Point::new(c.x + r, c.y + r)]
                    })
                    .collect();
                Some(from_points(&pts))
            }
            ShapeSpec::Segment { a, b } => Some(from_points(&[*a, *b])),
            ShapeSpec::Polygon { vertices } => Some(from_points(vertices)),
            ShapeSpec::Cantor { side, .. } | ShapeSpec::FatCantor { side, .. } => Some((
                Point::new(-side / 2.0, -side / 2.0),
                Point::new(side / 2.0, side / 2.0),
            )),
            ShapeSpec::Koch { side, .. } => {
                Some(from_points(&koch_polyline(*side, 0))).map(|(lo, hi)| {
                    // the snowflake bulges out by one third of the triangle height
                    let pad = side * 3f64.sqrt() / 6.0;
                    (
                        Point::new(lo.x - pad, lo.y - pad),
                        Point::new(hi.x + pad, hi.y + pad),
                    )
                })
            }
            ShapeSpec::Cardioid { a } => Some((
                Point::new(-1.125 * a, -1.3 * a),
                Point::new(1.125 * a, 1.3 * a),
            )),
            ShapeSpec::Julia { escape_radius, .. } => Some((
                Point::new(-escape_radius, -escape_radius),
                Point::new(*escape_radius, *escape_radius),
            )),
            ShapeSpec::Dot { center } => Some((*center, *center)),
            ShapeSpec::Custom { .. } => None,
        }
    }

    /// Default frame for this shape: centered on its bounding rectangle with
    /// half-side twice the rectangle's half-width. Julia sets use the escape
    /// disk's bounding square and fat Cantor sets a tighter frame so that the
    /// set keeps a sizeable share of the box area.
    pub fn default_box(&self) -> Result<BoundingBox> {
        let (lo, hi) = self
            .extent()
            .ok_or_else(|| Error::param("box", "custom shapes need an explicit box"))?;
        let center = Point::new((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0);
        let half = ((hi.x - lo.x).max(hi.y - lo.y) / 2.0).max(1e-3);
        let factor = match self {
            ShapeSpec::Julia { .. } => 1.0,
            ShapeSpec::FatCantor { .. } => 1.4,
            _ => 2.0,
        };
        BoundingBox::new(center, half * factor)
    }

    /// The same shape dilated by `s` about the origin.
    pub fn scaled(&self, s: f64) -> ShapeSpec {
        match self {
            ShapeSpec::Disk { center, radius } => ShapeSpec::Disk {
                center: center.scale(s),
                radius: radius * s,
            },
            ShapeSpec::Circle { center, radius } => ShapeSpec::Circle {
                center: center.scale(s),
                radius: radius * s,
            },
            ShapeSpec::Disks { disks } => ShapeSpec::Disks {
                disks: disks.iter().map(|&(c, r)| (c.scale(s), r * s)).collect(),
            },
            ShapeSpec::Segment { a, b } => ShapeSpec::Segment {
                a: a.scale(s),
                b: b.scale(s),
            },
            ShapeSpec::Polygon { vertices } => ShapeSpec::Polygon {
                vertices: vertices.iter().map(|v| v.scale(s)).collect(),
            },
            ShapeSpec::Cantor { ratio, depth, side } => ShapeSpec::Cantor {
                ratio: *ratio,
                depth: *depth,
                side: side * s,
            },
            ShapeSpec::Koch { depth, side } => ShapeSpec::Koch {
                depth: *depth,
                side: side * s,
            },
            ShapeSpec::Dot { center } => ShapeSpec::Dot {
                center: center.scale(s),
            },
            other => ShapeSpec::custom(format!("scaled({other}, {s})")),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive, got {v}")))
            }
        };
        match self {
            ShapeSpec::Disk { radius, .. } | ShapeSpec::Circle { radius, .. } => {
                positive("radius", *radius)
            }
            ShapeSpec::Disks { disks } => {
                if disks.is_empty() {
                    return Err(Error::param("disks", "empty list"));
                }
                disks.iter().try_for_each(|&(_, r)| positive("radius", r))
            }
            ShapeSpec::Segment { a, b } => positive("length", a.dist(*b)),
            ShapeSpec::Polygon { vertices } => {
                if vertices.len() < 3 {
                    Err(Error::param(
                        "vertices",
                        "a polygon needs at least 3 vertices",
                    ))
                } else {
                    Ok(())
                }
            }
            ShapeSpec::Cantor { ratio, depth, side } => {
                if !(*ratio > 0.0 && *ratio < 0.5) {
                    return Err(Error::param("ratio", format!("{ratio} not in (0, 1/2)")));
                }
                if *depth > 20 {
                    return Err(Error::param("depth", "at most 20"));
                }
                positive("side", *side)
            }
            ShapeSpec::FatCantor { area, side } => {
                positive("side", *side)?;
                if !(*area > 0.0 && *area < side * side) {
                    return Err(Error::param(
                        "area",
                        format!("{area} not in (0, side^2 = {})", side * side),
                    ));
                }
                Ok(())
            }
            ShapeSpec::Koch { depth, side } => {
                if *depth > 8 {
                    return Err(Error::param("depth", "at most 8"));
                }
                positive("side", *side)
            }
            ShapeSpec::Cardioid { a } => positive("a", *a),
            ShapeSpec::Julia {
                max_iter,
                escape_radius,
                c,
            } => {
                if *max_iter == 0 {
                    return Err(Error::param("max_iter", "must be positive"));
                }
                if !(c.0.is_finite() && c.1.is_finite()) {
                    return Err(Error::param("c", "must be finite"));
                }
                if *escape_radius < 2.0 || !escape_radius.is_finite() {
                    return Err(Error::param("escape_radius", "must be at least 2"));
                }
                Ok(())
            }
            ShapeSpec::Dot { .. } => Ok(()),
            ShapeSpec::Custom { .. } => {
                Err(Error::param("spec", "custom shapes cannot be rasterized"))
            }
        }
    }
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeSpec::Disk { center, radius } => {
                write!(f, "disk:{radius},{},{}", center.x, center.y)
            }
            ShapeSpec::Circle { center, radius } => {
                write!(f, "circle:{radius},{},{}", center.x, center.y)
            }
            ShapeSpec::Disks { disks } => {
                let parts: Vec<String> = disks
                    .iter()
                    .map(|(c, r)| format!("{},{},{r}", c.x, c.y))
                    .collect();
                write!(f, "disks:{}", parts.join(";"))
            }
            ShapeSpec::Segment { a, b } => write!(f, "segment:{},{};{},{}", a.x, a.y, b.x, b.y),
            ShapeSpec::Polygon { vertices } => {
                let parts: Vec<String> = vertices
                    .iter()
                    .map(|v| format!("{},{}", v.x, v.y))
                    .collect();
                write!(f, "polygon:{}", parts.join(";"))
            }
            ShapeSpec::Cantor { ratio, depth, side } => write!(f, "cantor:{ratio},{depth},{side}"),
            ShapeSpec::FatCantor { area, side } => write!(f, "fat_cantor:{area},{side}"),
            ShapeSpec::Koch { depth, side } => write!(f, "koch:{depth},{side}"),
            ShapeSpec::Cardioid { a } => write!(f, "cardioid:{a}"),
            ShapeSpec::Julia {
                c,
                max_iter,
                escape_radius,
            } => write!(f, "julia:{},{},{max_iter},{escape_radius}", c.0, c.1),
            ShapeSpec::Dot { center } => write!(f, "dot:{},{}", center.x, center.y),
            ShapeSpec::Custom { description } => write!(f, "custom:{description}"),
        }
    }
}

fn parse_nums(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::param("shape", format!("`{t}` is not a number")))
        })
        .collect()
}

fn parse_points(s: &str) -> Result<Vec<Point>> {
    s.split(';')
        .map(|p| {
            let v = parse_nums(p)?;
            if v.len() != 2 {
                return Err(Error::param("shape", format!("`{p}` is not an x,y pair")));
            }
            Ok(Point::new(v[0], v[1]))
        })
        .collect()
}

impl FromStr for ShapeSpec {
    type Err = Error;

    /// Parses the compact CLI form, e.g. `disk:0.5`, `segment:4`,
    /// `cantor:0.25,6`, `fat_cantor:0.1`, `julia:0,1`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let bad = |why: &str| Error::param("shape", format!("`{s}`: {why}"));
        let spec = match kind {
            "disk" | "circle" => {
                let v = parse_nums(args)?;
                let (radius, center) = match v.as_slice() {
                    [r] => (*r, Point::ORIGIN),
                    [r, x, y] => (*r, Point::new(*x, *y)),
                    _ => return Err(bad("expected r or r,x,y")),
                };
                if kind == "disk" {
                    ShapeSpec::Disk { center, radius }
                } else {
                    ShapeSpec::Circle { center, radius }
                }
            }
            "disks" => {
                let disks = args
                    .split(';')
                    .map(|d| match parse_nums(d)?.as_slice() {
                        [x, y, r] => Ok((Point::new(*x, *y), *r)),
                        _ => Err(bad("expected x,y,r;x,y,r;...")),
                    })
                    .collect::<Result<Vec<_>>>()?;
                ShapeSpec::Disks { disks }
            }
            "segment" => {
                if args.contains(';') {
                    match parse_points(args)?.as_slice() {
                        [a, b] => ShapeSpec::Segment { a: *a, b: *b },
                        _ => return Err(bad("expected two endpoints")),
                    }
                } else {
                    match parse_nums(args)?.as_slice() {
                        [l] => ShapeSpec::segment(*l),
                        _ => return Err(bad("expected a length")),
                    }
                }
            }
            "polygon" => ShapeSpec::Polygon {
                vertices: parse_points(args)?,
            },
            "cantor" => match parse_nums(args)?.as_slice() {
                [r, d] => ShapeSpec::Cantor {
                    ratio: *r,
                    depth: *d as u32,
                    side: 2.0,
                },
                [r, d, side] => ShapeSpec::Cantor {
                    ratio: *r,
                    depth: *d as u32,
                    side: *side,
                },
                _ => return Err(bad("expected ratio,depth[,side]")),
            },
            "fat_cantor" => match parse_nums(args)?.as_slice() {
                [a] => ShapeSpec::FatCantor {
                    area: *a,
                    side: 1.0,
                },
                [a, side] => ShapeSpec::FatCantor {
                    area: *a,
                    side: *side,
                },
                _ => return Err(bad("expected area[,side]")),
            },
            "koch" => match parse_nums(args)?.as_slice() {
                [d] => ShapeSpec::Koch {
                    depth: *d as u32,
                    side: 1.0,
                },
                [d, side] => ShapeSpec::Koch {
                    depth: *d as u32,
                    side: *side,
                },
                _ => return Err(bad("expected depth[,side]")),
            },
            "cardioid" => match parse_nums(args)?.as_slice() {
                [] => ShapeSpec::Cardioid { a: 1.0 },
                [a] => ShapeSpec::Cardioid { a: *a },
                _ => return Err(bad("expected a")),
            },
            "julia" => {
                let v = parse_nums(args)?;
                match v.as_slice() {
                    [re, im] => ShapeSpec::julia(*re, *im),
                    [re, im, it] => ShapeSpec::Julia {
                        c: (*re, *im),
                        max_iter: *it as u32,
                        escape_radius: 2.0,
                    },
                    [re, im, it, esc] => ShapeSpec::Julia {
                        c: (*re, *im),
                        max_iter: *it as u32,
                        escape_radius: *esc,
                    },
                    _ => return Err(bad("expected re,im[,max_iter[,escape_radius]]")),
                }
            }
            "dot" => match parse_nums(args)?.as_slice() {
                [] => ShapeSpec::Dot {
                    center: Point::ORIGIN,
                },
                [x, y] => ShapeSpec::Dot {
                    center: Point::new(*x, *y),
                },
                _ => return Err(bad("expected x,y")),
            },
            _ => return Err(bad("unknown shape kind")),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Rasterizes `spec` at `level` in `bbox`. A pixel is occupied when its
/// closed square meets the set (Julia sets: when one of four sub-samples
/// has a bounded orbit).
pub fn rasterize(spec: &ShapeSpec, bbox: BoundingBox, level: u32) -> Result<CompactSetMask> {
    if !(MIN_LEVEL..=MAX_LEVEL).contains(&level) {
        return Err(Error::param(
            "level",
            format!("{level} outside [{MIN_LEVEL}, {MAX_LEVEL}]"),
        ));
    }
    spec.validate()?;
    let n = 1usize << level;
    let mut bits = vec![false; n * n];
    let grid = Grid {
        origin: bbox.origin(),
        h: bbox.pixel_size(level),
        n,
    };
    match spec {
        ShapeSpec::Disk { center, radius } => {
            fill_disk(&grid, &mut bits, *center, *radius);
        }
        ShapeSpec::Disks { disks } => {
            for &(c, r) in disks {
                fill_disk(&grid, &mut bits, c, r);
            }
        }
        ShapeSpec::Circle { center, radius } => {
            let steps = ((std::f64::consts::TAU * radius / (grid.h / 8.0)).ceil() as usize).max(64);
            let pts: Vec<Point> = (0..=steps)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / steps as f64;
                    Point::new(center.x + radius * t.cos(), center.y + radius * t.sin())
                })
                .collect();
            grid.polyline(&mut bits, &pts);
        }
        ShapeSpec::Segment { a, b } => grid.polyline(&mut bits, &[*a, *b]),
        ShapeSpec::Polygon { vertices } => {
            fill_polygon(&grid, &mut bits, vertices);
            let mut closed = vertices.clone();
            closed.push(vertices[0]);
            grid.polyline(&mut bits, &closed);
        }
        ShapeSpec::Cantor { ratio, depth, side } => {
            let iv = cantor_intervals(*side, *ratio, *depth);
            grid.product(&mut bits, &iv);
        }
        ShapeSpec::FatCantor { area, side } => {
            let iv = fat_cantor_intervals(*side, area.sqrt(), 2.0 * grid.h);
            grid.product(&mut bits, &iv);
        }
        ShapeSpec::Koch { depth, side } => {
            let pts = koch_polyline(*side, *depth);
            grid.polyline(&mut bits, &pts);
        }
        ShapeSpec::Cardioid { a } => {
            let shift = ShapeSpec::cardioid_shift(*a);
            let steps = ((16.0 * a / (grid.h / 8.0)).ceil() as usize).max(256);
            let pts: Vec<Point> = (0..=steps)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / steps as f64;
                    let r = a * (1.0 - t.cos());
                    Point::new(r * t.cos() + shift, r * t.sin())
                })
                .collect();
            grid.polyline(&mut bits, &pts);
        }
        ShapeSpec::Julia {
            c,
            max_iter,
            escape_radius,
        } => {
            // sub-samples sit a quarter diagonal from the pixel's corners
            let reach = grid.h * std::f64::consts::SQRT_2 / 4.0;
            let rows: Vec<Vec<bool>> = (0..n)
                .into_par_iter()
                .map(|j| {
                    (0..n)
                        .map(|i| {
                            [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)]
                                .iter()
                                .any(|&(u, v)| {
                                    let x = grid.origin.x + (i as f64 + u) * grid.h;
                                    let y = grid.origin.y + (j as f64 + v) * grid.h;
                                    julia_near(x, y, *c, *max_iter, *escape_radius, reach)
                                })
                        })
                        .collect()
                })
                .collect();
            for (j, row) in rows.into_iter().enumerate() {
                bits[j * n..(j + 1) * n].copy_from_slice(&row);
            }
        }
        ShapeSpec::Dot { center } => {
            let (i, j) = grid
                .cell(*center)
                .ok_or_else(|| Error::param("center", "outside the box"))?;
            bits[j * n + i] = true;
        }
        ShapeSpec::Custom { .. } => unreachable!("rejected by validate"),
    }
    CompactSetMask::from_bits(bbox, level, spec.clone(), &bits)
}

/// Escape-time test with a distance estimate: true when the orbit stays
/// bounded, or when it escapes but the exterior distance estimate
/// `|z| ln|z| / |z'|` puts the point within `reach` of the Julia set.
/// Without the estimate, sets with empty interior (dendrites such as
/// `c = i`) would rasterize to nothing.
pub(crate) fn julia_near(
    x: f64,
    y: f64,
    c: (f64, f64),
    max_iter: u32,
    escape: f64,
    reach: f64,
) -> bool {
    if julia_bounded(x, y, c, max_iter, escape) {
        return true;
    }
    let (mut zr, mut zi) = (x, y);
    let (mut dr, mut di) = (1.0f64, 0.0f64);
    // keep iterating past the escape radius so the estimate is accurate
    for _ in 0..max_iter + 64 {
        let m2 = zr * zr + zi * zi;
        if m2 > 1e12 {
            let m = m2.sqrt();
            let dm = (dr * dr + di * di).sqrt();
            return m * m.ln() / dm < reach;
        }
        let (ndr, ndi) = (2.0 * (zr * dr - zi * di), 2.0 * (zr * di + zi * dr));
        dr = ndr;
        di = ndi;
        let t = zr * zr - zi * zi + c.0;
        zi = 2.0 * zr * zi + c.1;
        zr = t;
    }
    false
}

/// Escape-time test: true when the orbit of `(x, y)` stays inside the
/// escape disk for `max_iter` steps.
pub(crate) fn julia_bounded(x: f64, y: f64, c: (f64, f64), max_iter: u32, escape: f64) -> bool {
    let (mut zr, mut zi) = (x, y);
    let r2 = escape * escape;
    for _ in 0..max_iter {
        if zr * zr + zi * zi > r2 {
            return false;
        }
        let t = zr * zr - zi * zi + c.0;
        zi = 2.0 * zr * zi + c.1;
        zr = t;
    }
    zr * zr + zi * zi <= r2
}

/// Outer intervals of the middle-removed Cantor construction on
/// `[-side/2, side/2]`.
pub(crate) fn cantor_intervals(side: f64, ratio: f64, depth: u32) -> Vec<(f64, f64)> {
    let mut iv = vec![(-side / 2.0, side / 2.0)];
    for _ in 0..depth {
        iv = iv
            .into_iter()
            .flat_map(|(a, b)| {
                let l = (b - a) * ratio;
                [(a, a + l), (b - l, b)]
            })
            .collect();
    }
    iv
}

/// Smith-Volterra-Cantor intervals with limiting measure `measure`: stage
/// `k` removes a centered gap of length `(side - measure) / 2^(2k-1)` from
/// each interval. Stops before gaps get narrower than `min_gap`.
pub(crate) fn fat_cantor_intervals(side: f64, measure: f64, min_gap: f64) -> Vec<(f64, f64)> {
    let mut iv = vec![(-side / 2.0, side / 2.0)];
    for k in 1..=30 {
        let gap = (side - measure) / 2f64.powi(2 * k - 1);
        if gap < min_gap {
            break;
        }
        iv = iv
            .into_iter()
            .flat_map(|(a, b)| {
                let m = (a + b) / 2.0;
                [(a, m - gap / 2.0), (m + gap / 2.0, b)]
            })
            .collect();
    }
    iv
}

/// Closed Koch snowflake polyline for an equilateral triangle of side `side`
/// centered at the origin.
pub(crate) fn koch_polyline(side: f64, depth: u32) -> Vec<Point> {
    let r = side / 3f64.sqrt();
    let mut pts: Vec<Point> = (0..=3)
        .map(|k| {
            let t = std::f64::consts::FRAC_PI_2 - std::f64::consts::TAU * k as f64 / 3.0;
            Point::new(r * t.cos(), r * t.sin())
        })
        .collect();
    for _ in 0..depth {
        let mut next = Vec::with_capacity(pts.len() * 4);
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let d = (b - a).scale(1.0 / 3.0);
            let p1 = a + d;
            let p3 = a + d.scale(2.0);
            // vertices run clockwise, so a +60 degree turn points the bump outward
            let (c, s) = (
                std::f64::consts::FRAC_PI_3.cos(),
                std::f64::consts::FRAC_PI_3.sin(),
            );
            let p2 = p1 + Point::new(d.x * c - d.y * s, d.x * s + d.y * c);
            next.extend([a, p1, p2, p3]);
        }
        next.push(*pts.last().unwrap());
        pts = next;
    }
    pts
}

struct Grid {
    origin: Point,
    h: f64,
    n: usize,
}

impl Grid {
    fn cell(&self, p: Point) -> Option<(usize, usize)> {
        let u = (p.x - self.origin.x) / self.h;
        let v = (p.y - self.origin.y) / self.h;
        if u < 0.0 || v < 0.0 || u > self.n as f64 || v > self.n as f64 {
            return None;
        }
        Some((
            (u.floor() as usize).min(self.n - 1),
            (v.floor() as usize).min(self.n - 1),
        ))
    }

    /// Index range of pixels meeting the closed interval `[a, b]` along one
    /// axis with origin `o`.
    fn span(&self, o: f64, a: f64, b: f64) -> std::ops::Range<usize> {
        let lo = ((a - o) / self.h).floor().max(0.0) as usize;
        let hi = (((b - o) / self.h).ceil() as usize).max(lo + 1).min(self.n);
        lo.min(self.n)..hi
    }

    fn product(&self, bits: &mut [bool], iv: &[(f64, f64)]) {
        let mut cols = vec![false; self.n];
        let mut rows = vec![false; self.n];
        for &(a, b) in iv {
            for i in self.span(self.origin.x, a, b) {
                cols[i] = true;
            }
            for j in self.span(self.origin.y, a, b) {
                rows[j] = true;
            }
        }
        for j in 0..self.n {
            if rows[j] {
                for i in 0..self.n {
                    bits[j * self.n + i] = cols[i];
                }
            }
        }
    }

    /// Marks every pixel crossed by the polyline (grid traversal along
    /// each segment).
    fn polyline(&self, bits: &mut [bool], pts: &[Point]) {
        if pts.len() == 1 {
            if let Some((i, j)) = self.cell(pts[0]) {
                bits[j * self.n + i] = true;
            }
        }
        for w in pts.windows(2) {
            self.segment(bits, w[0], w[1]);
        }
    }

    fn segment(&self, bits: &mut [bool], a: Point, b: Point) {
        let n = self.n as i64;
        let (ax, ay) = (
            (a.x - self.origin.x) / self.h,
            (a.y - self.origin.y) / self.h,
        );
        let (bx, by) = (
            (b.x - self.origin.x) / self.h,
            (b.y - self.origin.y) / self.h,
        );
        let (mut i, mut j) = (ax.floor() as i64, ay.floor() as i64);
        let (ei, ej) = (bx.floor() as i64, by.floor() as i64);
        let (dx, dy) = (bx - ax, by - ay);
        let si = if dx > 0.0 { 1 } else { -1 };
        let sj = if dy > 0.0 { 1 } else { -1 };
        // parameter at which the segment crosses the next cell boundary
        let mut tmax_x = if dx > 0.0 {
            (i as f64 + 1.0 - ax) / dx
        } else if dx < 0.0 {
            (i as f64 - ax) / dx
        } else {
            f64::INFINITY
        };
        let mut tmax_y = if dy > 0.0 {
            (j as f64 + 1.0 - ay) / dy
        } else if dy < 0.0 {
            (j as f64 - ay) / dy
        } else {
            f64::INFINITY
        };
        let tdx = if dx != 0.0 {
            (1.0 / dx).abs()
        } else {
            f64::INFINITY
        };
        let tdy = if dy != 0.0 {
            (1.0 / dy).abs()
        } else {
            f64::INFINITY
        };
        let mut mark = |i: i64, j: i64| {
            if i >= 0 && j >= 0 && i < n && j < n {
                bits[(j * n + i) as usize] = true;
            }
        };
        mark(i, j);
        let max_steps = (ei - i).abs() + (ej - j).abs() + 2;
        for _ in 0..max_steps {
            if i == ei && j == ej {
                break;
            }
            if tmax_x < tmax_y {
                i += si;
                tmax_x += tdx;
            } else {
                j += sj;
                tmax_y += tdy;
            }
            mark(i, j);
        }
    }
}

fn fill_disk(grid: &Grid, bits: &mut [bool], c: Point, r: f64) {
    let xs = grid.span(grid.origin.x, c.x - r, c.x + r);
    let ys = grid.span(grid.origin.y, c.y - r, c.y + r);
    for j in ys {
        let y0 = grid.origin.y + j as f64 * grid.h;
        let dy = if c.y < y0 {
            y0 - c.y
        } else if c.y > y0 + grid.h {
            c.y - y0 - grid.h
        } else {
            0.0
        };
        for i in xs.clone() {
            let x0 = grid.origin.x + i as f64 * grid.h;
            let dx = if c.x < x0 {
                x0 - c.x
            } else if c.x > x0 + grid.h {
                c.x - x0 - grid.h
            } else {
                0.0
            };
            if dx * dx + dy * dy <= r * r {
                bits[j * grid.n + i] = true;
            }
        }
    }
}

/// Even-odd fill on pixel centers; the outline is added separately.
fn fill_polygon(grid: &Grid, bits: &mut [bool], vertices: &[Point]) {
    for j in 0..grid.n {
        for i in 0..grid.n {
            let p = Point::new(
                grid.origin.x + (i as f64 + 0.5) * grid.h,
                grid.origin.y + (j as f64 + 0.5) * grid.h,
            );
            let mut inside = false;
            let m = vertices.len();
            for k in 0..m {
                let (a, b) = (vertices[k], vertices[(k + 1) % m]);
                if (a.y > p.y) != (b.y > p.y) {
                    let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                    if p.x < x {
                        inside = !inside;
                    }
                }
            }
            if inside {
                bits[j * grid.n + i] = true;
            }
        }
    }
}
