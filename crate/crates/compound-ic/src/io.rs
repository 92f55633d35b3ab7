//! Channel files, region CSV and SVG overlays.
//!
//! A Gaussian channel file lists the states seen at each receiver with
//! powers on a linear scale. Imaginary parts default to zero.
//!
//! ```toml
//! p1 = 10.0
//! p2 = 10.0
//!
//! [[rx1_states]]     # h11: Tx1 -> Rx1, h21: Tx2 -> Rx1
//! h11_re = 1.0
//! h21_re = 0.3
//! h21_im = 0.4
//!
//! [[rx2_states]]     # h22: Tx2 -> Rx2, h12: Tx1 -> Rx2
//! h22_re = 1.0
//! h12_re = 0.5
//! ```
//!
//! A deterministic channel file has `[user1]` and `[user2]` tables with the
//! fields of [`DetUser`](crate::det::DetUser).

use crate::channel::{CompoundChannel, RxState, C64};
use crate::det::DetChannel;
use crate::error::{Error, Result};
use crate::polytope::{Point, Region2D};
use serde::Deserialize;
use std::fmt::Write;
use std::ops::Range;
use toml::Spanned;

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSpec {
    Gaussian(CompoundChannel),
    Deterministic(DetChannel),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Rx1Raw {
    h11_re: f64,
    #[serde(default)]
    h11_im: f64,
    h21_re: f64,
    #[serde(default)]
    h21_im: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Rx2Raw {
    h22_re: f64,
    #[serde(default)]
    h22_im: f64,
    h12_re: f64,
    #[serde(default)]
    h12_im: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianRaw {
    p1: Spanned<f64>,
    p2: Spanned<f64>,
    rx1_states: Spanned<Vec<Spanned<Rx1Raw>>>,
    rx2_states: Spanned<Vec<Spanned<Rx2Raw>>>,
}

/// 1-based line and column of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn parse_error(src: &str, span: Option<Range<usize>>, message: impl Into<String>) -> Error {
    let (line, column) = line_col(src, span.map_or(0, |s| s.start));
    Error::Parse { line, column, message: message.into() }
}

fn from_toml<'de, T: Deserialize<'de>>(src: &'de str) -> Result<T> {
    toml::from_str(src).map_err(|e| parse_error(src, e.span(), e.message().trim().to_string()))
}

fn power(src: &str, p: &Spanned<f64>) -> Result<f64> {
    let v = *p.get_ref();
    if !v.is_finite() || v < 0.0 {
        return Err(parse_error(src, Some(p.span()), "power must be finite and nonnegative"));
    }
    Ok(v)
}

/// `(direct, cross)` pairs of one receiver, rejecting non-finite gains at
/// the offending table.
fn states<T>(
    src: &str,
    list: &Spanned<Vec<Spanned<T>>>,
    name: &str,
    gains: impl Fn(&T) -> (C64, C64),
) -> Result<Vec<RxState>> {
    if list.get_ref().is_empty() {
        return Err(parse_error(src, Some(list.span()), format!("`{name}` needs at least one state")));
    }
    let finite = |z: C64| z.re.is_finite() && z.im.is_finite();
    list.get_ref()
        .iter()
        .map(|s| {
            let (d, c) = gains(s.get_ref());
            if !finite(d) || !finite(c) {
                return Err(parse_error(src, Some(s.span()), "gain must be finite"));
            }
            Ok(RxState::new(d, c))
        })
        .collect()
}

pub fn parse_gaussian_channel(src: &str) -> Result<CompoundChannel> {
    let raw: GaussianRaw = from_toml(src)?;
    let rx1 = states(src, &raw.rx1_states, "rx1_states", |s: &Rx1Raw| {
        (C64::new(s.h11_re, s.h11_im), C64::new(s.h21_re, s.h21_im))
    })?;
    let rx2 = states(src, &raw.rx2_states, "rx2_states", |s: &Rx2Raw| {
        (C64::new(s.h22_re, s.h22_im), C64::new(s.h12_re, s.h12_im))
    })?;
    CompoundChannel::new(rx1, rx2, power(src, &raw.p1)?, power(src, &raw.p2)?)
}

pub fn parse_det_channel(src: &str) -> Result<DetChannel> {
    let ch: DetChannel = from_toml(src)?;
    ch.validate()?;
    Ok(ch)
}

/// Dispatches on the presence of a `user1` table.
pub fn parse_channel(src: &str) -> Result<ChannelSpec> {
    let table: toml::Table = from_toml(src)?;
    if table.contains_key("user1") {
        Ok(ChannelSpec::Deterministic(parse_det_channel(src)?))
    } else {
        Ok(ChannelSpec::Gaussian(parse_gaussian_channel(src)?))
    }
}

/// `x` with nine significant digits; negative zero prints as `0`.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = format!("{x:.8e}");
    let exp: i32 = e.rsplit('e').next().and_then(|s| s.parse().ok()).unwrap_or(0);
    if (-5..=15).contains(&exp) {
        format!("{:.*}", (8 - exp).max(0) as usize, x)
    } else {
        e
    }
}

/// Support samples then vertices, each row tagged with the bound.
pub fn region_csv(region: &Region2D, bound: &str) -> String {
    let mut out = String::from("a,b,c_star,bound\n");
    for &(a, b, c) in &region.samples {
        let _ = writeln!(out, "{},{},{},{bound}", sig9(a), sig9(b), sig9(c));
    }
    out.push_str("# vertices\nR1,R2,bound\n");
    for p in &region.vertices {
        let _ = writeln!(out, "{},{},{bound}", sig9(p[0]), sig9(p[1]));
    }
    out
}

/// Parsed form of [`region_csv`].
#[derive(Clone, Debug, PartialEq)]
pub struct RegionCsv {
    pub bound: String,
    pub samples: Vec<(f64, f64, f64)>,
    pub vertices: Vec<Point>,
}

pub fn parse_region_csv(src: &str) -> Result<RegionCsv> {
    let mut res = RegionCsv { bound: String::new(), samples: Vec::new(), vertices: Vec::new() };
    let mut in_vertices = false;
    for (i, line) in src.lines().enumerate() {
        let err = |column: usize, m: &str| Error::Parse { line: i + 1, column, message: m.into() };
        match line {
            "a,b,c_star,bound" | "R1,R2,bound" | "" => continue,
            "# vertices" => {
                in_vertices = true;
                continue;
            }
            _ => {}
        }
        let fields: Vec<&str> = line.split(',').collect();
        let want = if in_vertices { 3 } else { 4 };
        if fields.len() != want {
            return Err(err(1, &format!("expected {want} fields")));
        }
        let mut nums = Vec::with_capacity(want - 1);
        let mut col = 1;
        for f in &fields[..want - 1] {
            nums.push(f.parse::<f64>().map_err(|_| err(col, "not a number"))?);
            col += f.len() + 1;
        }
        res.bound = fields[want - 1].to_string();
        if in_vertices {
            res.vertices.push([nums[0], nums[1]]);
        } else {
            res.samples.push((nums[0], nums[1], nums[2]));
        }
    }
    Ok(res)
}

const SVG_SIZE: f64 = 480.0;
const SVG_MARGIN: f64 = 48.0;

/// Overlay of the inner (filled) and outer (outlined) polygons. Axis ranges
/// follow the joint extent of both regions.
pub fn region_svg(inner: &Region2D, outer: &Region2D) -> String {
    let extent = |i: usize| {
        inner.vertices.iter().chain(&outer.vertices).map(|p| p[i]).fold(0.0f64, f64::max).max(1e-9) * 1.05
    };
    let (xmax, ymax) = (extent(0), extent(1));
    let plot = SVG_SIZE - 2.0 * SVG_MARGIN;
    let px = |p: &Point| (SVG_MARGIN + p[0] / xmax * plot, SVG_SIZE - SVG_MARGIN - p[1] / ymax * plot);
    let path = |poly: &[Point]| {
        let mut d = String::new();
        for (i, p) in poly.iter().enumerate() {
            let (x, y) = px(p);
            let _ = write!(d, "{}{x:.2},{y:.2} ", if i == 0 { "M" } else { "L" });
        }
        d.push('Z');
        d
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}" font-family="sans-serif" font-size="11">"#
    );
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let (x0, y0) = px(&[0.0, 0.0]);
    let (x1, y1) = px(&[xmax, ymax]);
    let _ = writeln!(s, r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (tx, _) = px(&[t * xmax, 0.0]);
        let (_, ty) = px(&[0.0, t * ymax]);
        let _ = writeln!(s, r#"<text x="{tx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 16.0, sig3(t * xmax));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{ty:.2}" text-anchor="end">{}</text>"#, x0 - 6.0, sig3(t * ymax));
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">R1 (bits)</text>"#, SVG_SIZE / 2.0, SVG_SIZE - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">R2 (bits)</text>"#,
        SVG_SIZE / 2.0,
        SVG_SIZE / 2.0
    );
    if !outer.vertices.is_empty() {
        let _ = writeln!(s, r##"<path d="{}" fill="none" stroke="#c0392b" stroke-width="1.5"/>"##, path(&outer.vertices));
    }
    if !inner.vertices.is_empty() {
        let _ = writeln!(
            s,
            r##"<path d="{}" fill="#2e86c1" fill-opacity="0.35" stroke="#2e86c1" stroke-width="1.5"/>"##,
            path(&inner.vertices)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn sig3(x: f64) -> String {
    format!("{:.3}", x)
}
