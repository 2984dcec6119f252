//! Standalone SVG plots: the curve with its evolute and normal segments,
//! the field on the `(t, ρ)` cylinder, the field on the sphere, and a
//! convex surface with its critical points.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::Vector3;
use normal_field::evolute;
use normal_field::field::{CriticalPoint, FieldGrid};
use normal_field::sphere::SphereField;
use normal_field::surface::{D2Type, Surface, SurfaceCriticalPoint, Umbilic};
use normal_field::{ClosedCurve, Point2};

const BLUE: &str = "#1f4fd1";
const RED: &str = "#d1261f";
const GREEN: &str = "#1f9d3a";
const GREY: &str = "#9a9a9a";

/// World-to-pixel map with y pointing up.
struct Canvas {
    width: f64,
    height: f64,
    margin: f64,
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

impl Canvas {
    fn new(width: f64, height: f64, x: (f64, f64), y: (f64, f64)) -> Self {
        Canvas {
            width,
            height,
            margin: 24.0,
            x,
            y,
            body: String::new(),
        }
    }

    /// Bounding box of `points`, padded and widened to equal aspect.
    fn fitted(width: f64, height: f64, points: impl IntoIterator<Item = [f64; 2]>) -> Self {
        let mut x = (f64::INFINITY, f64::NEG_INFINITY);
        let mut y = x;
        for [px, py] in points {
            x = (x.0.min(px), x.1.max(px));
            y = (y.0.min(py), y.1.max(py));
        }
        if !x.0.is_finite() {
            x = (-1.0, 1.0);
            y = (-1.0, 1.0);
        }
        let pad = 0.05 * (x.1 - x.0).max(y.1 - y.0).max(1e-9);
        let (mut x, mut y) = ((x.0 - pad, x.1 + pad), (y.0 - pad, y.1 + pad));
        let aspect = (width - 48.0) / (height - 48.0);
        let (w, h) = (x.1 - x.0, y.1 - y.0);
        if w / h < aspect {
            let grow = (h * aspect - w) / 2.0;
            x = (x.0 - grow, x.1 + grow);
        } else {
            let grow = (w / aspect - h) / 2.0;
            y = (y.0 - grow, y.1 + grow);
        }
        Canvas::new(width, height, x, y)
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        let sx = (self.width - 2.0 * self.margin) / (self.x.1 - self.x.0);
        let sy = (self.height - 2.0 * self.margin) / (self.y.1 - self.y.0);
        (
            self.margin + (p[0] - self.x.0) * sx,
            self.height - self.margin - (p[1] - self.y.0) * sy,
        )
    }

    fn polyline(&mut self, points: &[[f64; 2]], class: &str, stroke: &str, width: f64) {
        if points.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (i, p) in points.iter().enumerate() {
            let (x, y) = self.map(*p);
            let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "" } else { " " });
        }
        let _ = writeln!(
            self.body,
            r#"<polyline class="{class}" points="{d}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    fn line(&mut self, a: [f64; 2], b: [f64; 2], class: &str, stroke: &str, width: f64) {
        let (x1, y1) = self.map(a);
        let (x2, y2) = self.map(b);
        let _ = writeln!(
            self.body,
            r#"<line class="{class}" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{stroke}" stroke-width="{width}"/>"#
        );
    }

    fn dot(&mut self, c: [f64; 2], radius: f64, class: &str, fill: &str) {
        let (x, y) = self.map(c);
        let _ = writeln!(
            self.body,
            r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="{radius}" fill="{fill}"/>"#
        );
    }

    fn ring(&mut self, c: [f64; 2], radius: f64, class: &str, stroke: &str) {
        let (x, y) = self.map(c);
        let _ = writeln!(
            self.body,
            r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="{radius}" fill="white" stroke="{stroke}" stroke-width="1.5"/>"#
        );
    }

    fn text(&mut self, at: [f64; 2], offset: (f64, f64), class: &str, label: &str) {
        let (x, y) = self.map(at);
        let _ = writeln!(
            self.body,
            r#"<text class="{class}" x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13">{label}</text>"#,
            x + offset.0,
            y + offset.1
        );
    }

    /// Arrow of fixed pixel length along the screen direction `(dx, dy)`,
    /// with `dy` pointing up.
    fn arrow(&mut self, at: [f64; 2], dir: (f64, f64), length: f64, stroke: &str) {
        let norm = dir.0.hypot(dir.1);
        if !(norm > 0.0) {
            return;
        }
        let (ux, uy) = (dir.0 / norm, -dir.1 / norm);
        let (cx, cy) = self.map(at);
        let (x0, y0) = (cx - 0.5 * length * ux, cy - 0.5 * length * uy);
        let (x1, y1) = (cx + 0.5 * length * ux, cy + 0.5 * length * uy);
        let head = 0.35 * length;
        let (hx, hy) = (x1 - head * ux, y1 - head * uy);
        let (px, py) = (-uy * head * 0.5, ux * head * 0.5);
        let _ = writeln!(
            self.body,
            r#"<path class="arrow" d="M{x0:.2},{y0:.2} L{x1:.2},{y1:.2} M{:.2},{:.2} L{x1:.2},{y1:.2} L{:.2},{:.2}" fill="none" stroke="{stroke}" stroke-width="1"/>"#,
            hx + px,
            hy + py,
            hx - px,
            hy - py
        );
    }

    fn finish(self, title: &str) -> String {
        format!(
            concat!(
                r#"<?xml version="1.0" encoding="UTF-8"?>"#,
                "\n",
                r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
                "\n<title>{title}</title>\n",
                r#"<rect width="100%" height="100%" fill="white"/>"#,
                "\n{body}</svg>\n"
            ),
            w = self.width,
            h = self.height,
            title = title,
            body = self.body
        )
    }
}

fn pt(p: Point2) -> [f64; 2] {
    [p.x, p.y]
}

/// Splits a sampled path into runs where `keep` holds.
fn runs<T: Copy>(points: &[T], keep: impl Fn(&T) -> bool) -> Vec<Vec<T>> {
    let mut out = vec![];
    let mut current = vec![];
    for p in points {
        if keep(p) {
            current.push(*p);
        } else if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePlotStyle {
    /// Number of normal segments.
    pub normals: usize,
    /// Start of each normal segment; the green part runs from here to ρ = 0.
    pub rho_min: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for CurvePlotStyle {
    fn default() -> Self {
        CurvePlotStyle {
            normals: 48,
            rho_min: -1.0,
            width: 720.0,
            height: 720.0,
        }
    }
}

/// Curve in blue, evolute in red, and normal segments drawn green for
/// `ρ < 0` and red for `0 < ρ < 1/k`. A circle's evolute is one marker.
pub fn curve_plot(
    curve: &ClosedCurve,
    style: &CurvePlotStyle,
    point: Option<Point2>,
) -> normal_field::Result<String> {
    let ev = evolute::evolute(curve)?;
    let n = 720;
    let ts: Vec<f64> = (0..=n).map(|i| TAU * i as f64 / n as f64).collect();
    let alpha: Vec<[f64; 2]> = ts.iter().map(|&t| pt(curve.position(t))).collect();
    let beta: Vec<[f64; 2]> = ts.iter().map(|&t| pt(ev.point(t))).collect();
    let rho_min = style.rho_min.min(0.0);
    let segments: Vec<([f64; 2], [f64; 2], [f64; 2])> = (0..style.normals)
        .map(|i| {
            let f = curve.frame(TAU * i as f64 / style.normals as f64);
            (
                pt(f.position + rho_min * f.normal),
                pt(f.position),
                pt(f.position + f.normal / f.curvature),
            )
        })
        .collect();
    let extent = alpha
        .iter()
        .chain(&beta)
        .copied()
        .chain(segments.iter().map(|s| s.0))
        .chain(point.map(pt));
    let mut c = Canvas::fitted(style.width, style.height, extent);
    for (start, foot, focal) in &segments {
        c.line(*start, *foot, "normal-negative", GREEN, 0.8);
        c.line(*foot, *focal, "normal-positive", RED, 0.8);
    }
    c.polyline(&alpha, "curve", BLUE, 2.0);
    if ev.is_degenerate() {
        c.dot(beta[0], 4.0, "evolute-point", RED);
    } else {
        c.polyline(&beta, "evolute", RED, 1.5);
    }
    if let Some(p) = point {
        c.dot(pt(p), 4.0, "query-point", "black");
    }
    Ok(c.finish("curve, evolute and normal segments"))
}

/// Field `F(t, ρ) − p` drawn as unit arrows over the cylinder, the fold
/// curve `ρ = 1/k` in red and the critical points as dots.
pub fn cylinder_plot(
    grid: &FieldGrid,
    critical: &[CriticalPoint],
    rho_range: (f64, f64),
) -> String {
    let (rho_min, rho_max) = rho_range;
    let mut c = Canvas::new(960.0, 540.0, (0.0, TAU), (rho_min, rho_max));
    let _ = writeln!(
        c.body,
        r#"<g class="axes" font-family="sans-serif" font-size="11">"#
    );
    for (k, label) in ["0", "π/2", "π", "3π/2", "2π"].iter().enumerate() {
        let t = k as f64 * PI / 2.0;
        c.line([t, rho_min], [t, rho_max], "grid", "#e4e4e4", 0.6);
        c.text([t, rho_min], (-8.0, 16.0), "tick", label);
    }
    if rho_min < 0.0 && rho_max > 0.0 {
        c.line([0.0, 0.0], [TAU, 0.0], "rho-zero", GREY, 0.8);
    }
    c.body.push_str("</g>\n");
    let cell_w = (c.width - 2.0 * c.margin) / grid.res_t.max(2) as f64;
    let cell_h = (c.height - 2.0 * c.margin) / grid.res_rho.max(2) as f64;
    let length = 0.8 * cell_w.min(cell_h);
    let _ = writeln!(c.body, r#"<g class="field">"#);
    for s in &grid.samples {
        let stroke = if s.jacobian > 0.0 {
            "#333333"
        } else {
            "#777777"
        };
        c.arrow([s.t, s.rho], (s.field[0], s.field[1]), length, stroke);
    }
    c.body.push_str("</g>\n");
    let inside = |p: &[f64; 2]| p[1] >= rho_min && p[1] <= rho_max;
    for run in runs(&grid.fold, inside) {
        c.polyline(&run, "fold", RED, 2.0);
    }
    for cp in critical {
        if inside(&[cp.t_star, cp.rho_star]) {
            c.dot(
                [cp.t_star.rem_euclid(TAU), cp.rho_star],
                5.0,
                "critical-point",
                BLUE,
            );
        }
    }
    c.finish("normal-map field on the cylinder")
}

/// Orthographic camera looking at the origin.
struct Camera {
    toward: Vector3<f64>,
    right: Vector3<f64>,
    up: Vector3<f64>,
}

impl Camera {
    fn new(azimuth: f64, elevation: f64) -> Self {
        let (sa, ca) = azimuth.sin_cos();
        let (se, ce) = elevation.sin_cos();
        Camera {
            toward: Vector3::new(ce * ca, ce * sa, se),
            right: Vector3::new(-sa, ca, 0.0),
            up: Vector3::new(-se * ca, -se * sa, ce),
        }
    }

    fn project(&self, p: &Vector3<f64>) -> [f64; 2] {
        [p.dot(&self.right), p.dot(&self.up)]
    }

    fn visible(&self, p: &Vector3<f64>) -> bool {
        p.dot(&self.toward) >= 0.0
    }
}

fn v3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

/// Orthographic view of the field on the sphere with the pole indices
/// labelled. Only the visible hemisphere is drawn.
pub fn sphere_plot(field: &SphereField) -> String {
    let cam = Camera::new(-PI / 3.0, 0.35);
    let mut c = Canvas::new(640.0, 640.0, (-1.15, 1.15), (-1.15, 1.15));
    let _ = writeln!(
        c.body,
        r#"<circle class="sphere" cx="320" cy="320" r="{:.2}" fill="none" stroke="black" stroke-width="1.2"/>"#,
        (c.width - 2.0 * c.margin) / 2.3
    );
    for k in 0..12 {
        let t = TAU * k as f64 / 12.0;
        let meridian: Vec<Vector3<f64>> = (0..=90)
            .map(|i| {
                let lat = -PI / 2.0 + PI * i as f64 / 90.0;
                Vector3::new(lat.cos() * t.cos(), lat.cos() * t.sin(), lat.sin())
            })
            .collect();
        for run in runs(&meridian, |p| cam.visible(p)) {
            let pts: Vec<[f64; 2]> = run.iter().map(|p| cam.project(p)).collect();
            c.polyline(&pts, "graticule", "#e4e4e4", 0.6);
        }
    }
    let pixels = (c.width - 2.0 * c.margin) / 2.3;
    let length = pixels * 0.06;
    let _ = writeln!(c.body, r#"<g class="field">"#);
    for s in &field.samples {
        let p = v3(s.point);
        if !cam.visible(&p) {
            continue;
        }
        let v = v3(s.vector);
        c.arrow(
            cam.project(&p),
            (v.dot(&cam.right), v.dot(&cam.up)),
            length,
            "#333333",
        );
    }
    c.body.push_str("</g>\n");
    let fold: Vec<Vector3<f64>> = field.fold.iter().map(|p| v3(*p)).collect();
    for run in runs(&fold, |p| cam.visible(p)) {
        let pts: Vec<[f64; 2]> = run.iter().map(|p| cam.project(p)).collect();
        c.polyline(&pts, "fold", RED, 2.0);
    }
    for p in &field.critical {
        let p = v3(*p);
        if cam.visible(&p) {
            c.dot(cam.project(&p), 5.0, "critical-point", BLUE);
        } else {
            c.ring(cam.project(&p), 4.0, "critical-point hidden", BLUE);
        }
    }
    for (name, pole, index) in [
        ("N", Vector3::z(), field.i_north),
        ("S", -Vector3::z(), field.i_south),
    ] {
        let at = cam.project(&pole);
        if cam.visible(&pole) {
            c.dot(at, 5.0, "pole", "black");
        } else {
            c.ring(at, 4.0, "pole hidden", "black");
        }
        c.text(
            at,
            (8.0, -6.0),
            "pole-label",
            &format!("{name}: index {index}"),
        );
    }
    c.finish("normal-map field on the sphere")
}

fn d2_colour(t: D2Type) -> (&'static str, &'static str) {
    match t {
        D2Type::Maximum => ("maximum", RED),
        D2Type::Minimum => ("minimum", BLUE),
        D2Type::Saddle => ("saddle", GREEN),
    }
}

/// Orthographic wireframe of a surface with its critical points coloured
/// by type and its umbilics as rings.
pub fn surface_plot(
    surface: &Surface,
    query: Vector3<f64>,
    points: &[SurfaceCriticalPoint],
    umbilics: &[Umbilic],
) -> String {
    let cam = Camera::new(-PI / 5.0, 0.4);
    let direction =
        |lon: f64, lat: f64| Vector3::new(lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin());
    // (position, facing the camera)
    let sample = |w: Vector3<f64>| -> (Vector3<f64>, bool) {
        let facing = -surface.principal(&w).normal.dot(&cam.toward) >= 0.0;
        (surface.position(&w), facing)
    };
    let mut curves: Vec<Vec<(Vector3<f64>, bool)>> = Vec::new();
    for k in 0..24 {
        let lon = TAU * k as f64 / 24.0;
        curves.push(
            (0..=96)
                .map(|i| sample(direction(lon, -PI / 2.0 + PI * i as f64 / 96.0)))
                .collect(),
        );
    }
    for k in 1..12 {
        let lat = -PI / 2.0 + PI * k as f64 / 12.0;
        curves.push(
            (0..=192)
                .map(|i| sample(direction(TAU * i as f64 / 192.0, lat)))
                .collect(),
        );
    }
    let extent: Vec<[f64; 2]> = curves
        .iter()
        .flatten()
        .map(|(p, _)| cam.project(p))
        .collect();
    let mut c = Canvas::fitted(640.0, 640.0, extent);
    for curve in &curves {
        for run in runs(curve, |(_, facing)| *facing) {
            let pts: Vec<[f64; 2]> = run.iter().map(|(p, _)| cam.project(p)).collect();
            c.polyline(&pts, "mesh", GREY, 0.6);
        }
    }
    c.dot(cam.project(&query), 3.5, "query-point", "black");
    for cp in points {
        let p = v3(cp.position);
        let (class, colour) = d2_colour(cp.d2_type);
        if sample(cp.chart_point().direction()).1 {
            c.dot(
                cam.project(&p),
                5.0,
                &format!("critical-point {class}"),
                colour,
            );
        } else {
            c.ring(
                cam.project(&p),
                4.0,
                &format!("critical-point {class} hidden"),
                colour,
            );
        }
    }
    for u in umbilics {
        c.ring(cam.project(&v3(u.position)), 6.0, "umbilic", "#e08a00");
    }
    c.finish("surface, critical points and umbilics")
}
