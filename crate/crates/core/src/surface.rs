//! Closed convex surfaces parametrized by the unit sphere, their principal
//! curvatures and focal sheets, umbilics, and the stationary points of the
//! squared distance from a query point.
//!
//! A surface is a map `ω ↦ σ(ω)` from unit directions. Derivatives are taken
//! in one of two spherical charts, each used only away from its own poles.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_6, FRAC_PI_8, PI, TAU};

use nalgebra::{Matrix2, SVector, Vector2, Vector3};
use num_dual::{hessian, Dual2SVec64, DualNum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree::{self, SphereMesh};
use crate::error::{Error, Result};
use crate::field::GenericityViolation;
use crate::geom::Preset;

/// `|z|` above which a direction belongs to the equatorial chart.
const POLAR_OWNERSHIP: f64 = 0.866_025_403_784_438_6;
const MAX_DEGREE: u32 = 32;

/// `[l, m, c]`: adds `c Y_lm` to the unit radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm(pub u32, pub i32, pub f64);

/// Surface input: a named preset or a radial perturbation of the unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceSpec {
    Preset(Preset),
    RadialHarmonics(Vec<HarmonicTerm>),
}

impl SurfaceSpec {
    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Self {
        SurfaceSpec::Preset(Preset {
            name: "ellipsoid".into(),
            params: vec![a, b, c],
        })
    }

    pub fn sphere(r: f64) -> Self {
        SurfaceSpec::Preset(Preset {
            name: "sphere".into(),
            params: vec![r],
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("surface spec serializes")
    }
}

/// `D^|m| P_l(z) · Re((x + iy)^m)` for `m ≥ 0`, `Im` of the `|m|` power
/// otherwise. No normalization and no Condon–Shortley phase.
#[derive(Clone, Debug)]
struct Harmonic {
    m: i32,
    coeff: f64,
    poly: Vec<f64>,
}

fn legendre(l: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if l == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for n in 1..l {
        let nf = n as f64;
        let mut next = vec![0.0; n + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += (2.0 * nf + 1.0) * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= nf * c;
        }
        next.iter_mut().for_each(|c| *c /= nf + 1.0);
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

fn differentiate(poly: &[f64]) -> Vec<f64> {
    poly.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| i as f64 * c)
        .collect()
}

impl Harmonic {
    fn new(term: HarmonicTerm) -> Result<Self> {
        let HarmonicTerm(l, m, coeff) = term;
        if l > MAX_DEGREE || m.unsigned_abs() > l || !coeff.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "harmonic [{l}, {m}, {coeff}] needs l <= {MAX_DEGREE}, |m| <= l and a finite coefficient"
            )));
        }
        let mut poly = legendre(l as usize);
        for _ in 0..m.unsigned_abs() {
            poly = differentiate(&poly);
        }
        Ok(Harmonic { m, coeff, poly })
    }

    fn eval<D: DualNum<Primitive = f64>>(&self, w: &[D; 3]) -> D {
        let mut z_part = D::from(0.0);
        for c in self.poly.iter().rev() {
            z_part = z_part * w[2].clone() + *c;
        }
        let (mut re, mut im) = (D::from(1.0), D::from(0.0));
        for _ in 0..self.m.unsigned_abs() {
            let next_re = re.clone() * w[0].clone() - im.clone() * w[1].clone();
            im = re * w[1].clone() + im * w[0].clone();
            re = next_re;
        }
        let angular = if self.m >= 0 { re } else { im };
        z_part * angular * self.coeff
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Ellipsoid([f64; 3]),
    Radial(Vec<Harmonic>),
}

/// Spherical coordinate chart on the direction sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// `ω = (sin v cos u, sin v sin u, cos v)`.
    Polar,
    /// `ω = (cos v, sin v cos u, sin v sin u)`, poles on the x axis.
    Equatorial,
}

impl Chart {
    pub fn direction(self, u: f64, v: f64) -> Vector3<f64> {
        let [x, y, z] = self.direction_dual(u, v);
        Vector3::new(x, y, z)
    }

    fn direction_dual<D: DualNum<Primitive = f64>>(self, u: D, v: D) -> [D; 3] {
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        match self {
            Chart::Polar => [sv.clone() * cu, sv * su, cv],
            Chart::Equatorial => [cv, sv.clone() * cu, sv * su],
        }
    }

    /// `(u, v)` of a unit direction, `u ∈ [0, 2π)`, `v ∈ [0, π]`.
    pub fn coords(self, w: &Vector3<f64>) -> (f64, f64) {
        let (axis, a, b) = match self {
            Chart::Polar => (w.z, w.x, w.y),
            Chart::Equatorial => (w.x, w.y, w.z),
        };
        (b.atan2(a).rem_euclid(TAU), axis.clamp(-1.0, 1.0).acos())
    }

    /// The chart in which `w` has colatitude in `[π/6, 5π/6]`.
    pub fn owner(w: &Vector3<f64>) -> Chart {
        if w.z.abs() <= POLAR_OWNERSHIP {
            Chart::Polar
        } else {
            Chart::Equatorial
        }
    }
}

/// Chart coordinates of a point on the direction sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: Chart,
    pub u: f64,
    pub v: f64,
}

impl ChartPoint {
    pub fn new(chart: Chart, u: f64, v: f64) -> Self {
        ChartPoint { chart, u, v }
    }

    /// Coordinates in the owning chart.
    pub fn owned(w: &Vector3<f64>) -> Self {
        Self::in_chart(Chart::owner(w), w)
    }

    pub fn in_chart(chart: Chart, w: &Vector3<f64>) -> Self {
        let w = w.normalize();
        let (u, v) = chart.coords(&w);
        ChartPoint { chart, u, v }
    }

    pub fn direction(&self) -> Vector3<f64> {
        self.chart.direction(self.u, self.v)
    }
}

/// `σ` and its first and second chart derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceJet {
    pub position: Vector3<f64>,
    pub du: Vector3<f64>,
    pub dv: Vector3<f64>,
    pub duu: Vector3<f64>,
    pub duv: Vector3<f64>,
    pub dvv: Vector3<f64>,
}

impl SurfaceJet {
    /// `(σ_u × σ_v)/|σ_u × σ_v|`, inward for the supported surfaces.
    pub fn normal(&self) -> Vector3<f64> {
        self.du.cross(&self.dv).normalize()
    }

    /// `(E, F, G)`.
    pub fn first_form(&self) -> [f64; 3] {
        [
            self.du.dot(&self.du),
            self.du.dot(&self.dv),
            self.dv.dot(&self.dv),
        ]
    }

    /// `(L, M, N)` against the inward normal.
    pub fn second_form(&self) -> [f64; 3] {
        let n = self.normal();
        [n.dot(&self.duu), n.dot(&self.duv), n.dot(&self.dvv)]
    }
}

/// Principal curvatures `k₂ ≥ k₁`, the inward normal, both focal points and
/// the principal directions (unit tangent vectors).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrincipalData {
    pub k1: f64,
    pub k2: f64,
    pub position: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub sheet1: Vector3<f64>,
    pub sheet2: Vector3<f64>,
    pub dir1: Vector3<f64>,
    pub dir2: Vector3<f64>,
}

fn principal_from_jet(jet: &SurfaceJet) -> PrincipalData {
    let [e, f, g] = jet.first_form();
    let [l, m, n] = jet.second_form();
    // II in the orthonormal tangent frame e₁ = σ_u/√E, e₂ ⟂ e₁
    let se = e.sqrt();
    let h = (e * g - f * f).sqrt() / se;
    let a = l / e;
    let b = (m - f * l / e) / (se * h);
    let c = (n - 2.0 * f * m / e + f * f * l / (e * e)) / (h * h);
    let mean = 0.5 * (a + c);
    let half_split = (0.5 * (a - c)).hypot(b);
    let e1 = jet.du / se;
    let e2 = (jet.dv - e1 * (f / se)) / h;
    // eigenvector of the larger eigenvalue at angle θ
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let (st, ct) = theta.sin_cos();
    let normal = jet.normal();
    let k1 = mean - half_split;
    let k2 = mean + half_split;
    PrincipalData {
        k1,
        k2,
        position: jet.position,
        normal,
        sheet1: jet.position + normal / k1,
        sheet2: jet.position + normal / k2,
        dir1: e2 * ct - e1 * st,
        dir2: e1 * ct + e2 * st,
    }
}

/// A validated convex surface.
#[derive(Clone, Debug)]
pub struct Surface {
    spec: SurfaceSpec,
    shape: Shape,
    scale: f64,
}

/// Cell-centre directions of an `nlon × nlat` longitude/latitude grid.
fn grid_directions(nlon: usize, nlat: usize) -> Vec<Vector3<f64>> {
    (0..nlat)
        .flat_map(|j| {
            let v = PI * (j as f64 + 0.5) / nlat as f64;
            (0..nlon).map(move |i| Chart::Polar.direction(TAU * (i as f64 + 0.5) / nlon as f64, v))
        })
        .collect()
}

/// Validates the spec and checks regularity and `k₁ > 0` on a dense sample.
pub fn make_surface(spec: &SurfaceSpec) -> Result<Surface> {
    let shape = match spec {
        SurfaceSpec::Preset(p) => {
            let axes = match (p.name.as_str(), p.params.as_slice()) {
                ("ellipsoid", &[a, b, c]) => [a, b, c],
                ("sphere", &[r]) => [r, r, r],
                ("ellipsoid", _) | ("sphere", _) => {
                    return Err(Error::InvalidSpec(format!(
                        "preset '{}' has the wrong number of parameters ({})",
                        p.name,
                        p.params.len()
                    )))
                }
                (other, _) => {
                    return Err(Error::InvalidSpec(format!(
                        "unknown surface preset '{other}'"
                    )))
                }
            };
            if axes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
                return Err(Error::InvalidSpec(format!(
                    "semi-axes must be positive, got {axes:?}"
                )));
            }
            Shape::Ellipsoid(axes)
        }
        SurfaceSpec::RadialHarmonics(terms) => Shape::Radial(
            terms
                .iter()
                .map(|t| Harmonic::new(*t))
                .collect::<Result<_>>()?,
        ),
    };
    let mut surface = Surface {
        spec: spec.clone(),
        shape,
        scale: 1.0,
    };

    let samples: Vec<(Vector3<f64>, f64, f64, f64)> = grid_directions(128, 64)
        .par_iter()
        .map(|w| {
            let radius = surface.radius(w);
            let jet = surface.jet(ChartPoint::owned(w));
            let jac = jet.du.cross(&jet.dv).norm();
            let k1 = if radius > 0.0 && jac > 0.0 {
                principal_from_jet(&jet).k1
            } else {
                f64::NAN
            };
            (jet.position, radius, jac, k1)
        })
        .collect();
    let scale = samples.iter().map(|s| s.0.norm()).fold(0.0, f64::max);
    for (position, radius, jac, _) in &samples {
        if !(*radius > 0.0) || !(*jac > 1e-12 * scale * scale) {
            return Err(Error::SurfaceRegularity {
                location: arr(position),
                jacobian: *jac,
            });
        }
    }
    let worst = samples
        .iter()
        .min_by(|a, b| a.3.partial_cmp(&b.3).unwrap_or(Ordering::Equal))
        .expect("nonempty sample");
    if !(worst.3 > 0.0) {
        return Err(Error::Convexity {
            location: arr(&worst.0),
            k1: worst.3,
        });
    }
    surface.scale = scale;
    Ok(surface)
}

fn arr(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

impl Surface {
    pub fn new(spec: &SurfaceSpec) -> Result<Self> {
        make_surface(spec)
    }

    pub fn spec(&self) -> &SurfaceSpec {
        &self.spec
    }

    /// Largest sampled `|σ|`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn radius(&self, w: &Vector3<f64>) -> f64 {
        match &self.shape {
            Shape::Ellipsoid(_) => 1.0,
            Shape::Radial(terms) => radial(terms, &[w.x, w.y, w.z]),
        }
    }

    fn sigma<D: DualNum<Primitive = f64>>(&self, w: [D; 3]) -> [D; 3] {
        match &self.shape {
            Shape::Ellipsoid([a, b, c]) => {
                let [x, y, z] = w;
                [x * *a, y * *b, z * *c]
            }
            Shape::Radial(terms) => {
                let r = radial(terms, &w);
                w.map(|c| c * r.clone())
            }
        }
    }

    /// `σ(ω)` for a unit direction.
    pub fn position(&self, w: &Vector3<f64>) -> Vector3<f64> {
        let [x, y, z] = self.sigma([w.x, w.y, w.z]);
        Vector3::new(x, y, z)
    }

    pub fn jet(&self, at: ChartPoint) -> SurfaceJet {
        let x = SVector::from([at.u, at.v]);
        let parts = hessian(
            |q: SVector<Dual2SVec64<2>, 2>| self.sigma(at.chart.direction_dual(q[0], q[1])),
            &x,
        );
        let pick = |f: &dyn Fn(&(f64, SVector<f64, 2>, nalgebra::SMatrix<f64, 2, 2>)) -> f64| {
            Vector3::new(f(&parts[0]), f(&parts[1]), f(&parts[2]))
        };
        SurfaceJet {
            position: pick(&|p| p.0),
            du: pick(&|p| p.1[0]),
            dv: pick(&|p| p.1[1]),
            duu: pick(&|p| p.2[(0, 0)]),
            duv: pick(&|p| p.2[(0, 1)]),
            dvv: pick(&|p| p.2[(1, 1)]),
        }
    }

    pub fn principal_at(&self, at: ChartPoint) -> PrincipalData {
        principal_from_jet(&self.jet(at))
    }

    /// Principal data at a unit direction, computed in its owning chart.
    pub fn principal(&self, w: &Vector3<f64>) -> PrincipalData {
        self.principal_at(ChartPoint::owned(w))
    }
}

fn radial<D: DualNum<Primitive = f64>>(terms: &[Harmonic], w: &[D; 3]) -> D {
    terms.iter().fold(D::from(1.0), |acc, h| acc + h.eval(w))
}

/// Curvatures, normal and focal points at chart coordinates `(u, v)`.
pub fn principal_data(surface: &Surface, chart: Chart, u: f64, v: f64) -> PrincipalData {
    surface.principal_at(ChartPoint::new(chart, u, v))
}

/// Grid and tolerance settings for the surface searches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceOptions {
    /// Longitude nodes per chart.
    pub grid_u: usize,
    /// Colatitude nodes per chart.
    pub grid_v: usize,
    pub mesh: SphereMesh,
    /// Minimum distance from the query point to the surface and its sheets.
    pub genericity: f64,
    /// 3-space radius within which located points are identified.
    pub merge_radius: f64,
    /// Newton stopping threshold on the D² gradient.
    pub gradient_tol: f64,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        SurfaceOptions {
            grid_u: 256,
            grid_v: 128,
            mesh: SphereMesh::default(),
            genericity: 1e-6,
            merge_radius: 1e-4,
            gradient_tol: 1e-10,
        }
    }
}

impl SurfaceOptions {
    /// Twice the density in every direction.
    pub fn doubled(self) -> Self {
        SurfaceOptions {
            grid_u: self.grid_u * 2,
            grid_v: self.grid_v * 2,
            mesh: self.mesh.doubled(),
            ..self
        }
    }
}

/// Node values of `f` over one chart's `grid_u × grid_v` grid, row-major in v.
fn chart_grid<T, F>(chart: Chart, nu: usize, nv: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(ChartPoint) -> T + Sync,
{
    (0..nv)
        .into_par_iter()
        .flat_map_iter(|j| {
            let v = PI * (j as f64 + 0.5) / nv as f64;
            let f = &f;
            (0..nu).map(move |i| f(ChartPoint::new(chart, TAU * i as f64 / nu as f64, v)))
        })
        .collect()
}

/// Grid nodes in the interior rows that are no larger than any of their
/// eight neighbours and satisfy `keep`.
fn grid_local_minima(
    values: &[f64],
    nu: usize,
    nv: usize,
    keep: impl Fn(usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 1..nv - 1 {
        for i in 0..nu {
            let c = values[j * nu + i];
            if !c.is_finite() || !keep(i, j) {
                continue;
            }
            let is_min = (-1i64..=1).all(|dj| {
                (-1i64..=1).all(|di| {
                    if di == 0 && dj == 0 {
                        return true;
                    }
                    let ii = (i as i64 + di).rem_euclid(nu as i64) as usize;
                    let jj = (j as i64 + dj) as usize;
                    c <= values[jj * nu + ii]
                })
            });
            if is_min {
                out.push((i, j));
            }
        }
    }
    out
}

fn merge_by_position<T>(
    items: Vec<T>,
    position: impl Fn(&T) -> Vector3<f64>,
    radius: f64,
) -> Vec<T> {
    let mut kept: Vec<T> = Vec::new();
    for item in items {
        let p = position(&item);
        if kept.iter().all(|k| (position(k) - p).norm() > radius) {
            kept.push(item);
        }
    }
    kept
}

fn in_band(v: f64, margin: f64) -> bool {
    v >= FRAC_PI_6 - margin && v <= PI - FRAC_PI_6 + margin
}

/// Re-expresses a chart point in its owning chart once it drifts towards
/// the chart's poles.
fn recentre(at: ChartPoint) -> ChartPoint {
    if at.v < FRAC_PI_8 || at.v > PI - FRAC_PI_8 {
        ChartPoint::owned(&at.direction())
    } else {
        ChartPoint {
            u: at.u.rem_euclid(TAU),
            ..at
        }
    }
}

/// An umbilic: both principal curvatures equal `curvature`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Umbilic {
    pub at: ChartPoint,
    pub position: [f64; 3],
    pub curvature: f64,
    /// `k₂ − k₁` at the located point.
    pub splitting: f64,
}

/// `(ME − LF, NE − LG)`, zero exactly where `II` is proportional to `I`.
fn umbilic_residual(surface: &Surface, at: ChartPoint) -> Vector2<f64> {
    let jet = surface.jet(at);
    let [e, f, g] = jet.first_form();
    let [l, m, n] = jet.second_form();
    Vector2::new(m * e - l * f, n * e - l * g)
}

fn refine_umbilic(surface: &Surface, start: ChartPoint) -> ChartPoint {
    let h = 1e-6;
    let mut at = start;
    for _ in 0..60 {
        at = recentre(at);
        let r = umbilic_residual(surface, at);
        let du = (umbilic_residual(surface, ChartPoint { u: at.u + h, ..at })
            - umbilic_residual(surface, ChartPoint { u: at.u - h, ..at }))
            / (2.0 * h);
        let dv = (umbilic_residual(surface, ChartPoint { v: at.v + h, ..at })
            - umbilic_residual(surface, ChartPoint { v: at.v - h, ..at }))
            / (2.0 * h);
        let jac = Matrix2::from_columns(&[du, dv]);
        let Some(inv) = jac.try_inverse() else { break };
        let mut step = -(inv * r);
        if !step.x.is_finite() || !step.y.is_finite() {
            break;
        }
        if step.norm() > 0.1 {
            step *= 0.1 / step.norm();
        }
        at.u += step.x;
        at.v += step.y;
        if step.norm() < 1e-13 {
            break;
        }
    }
    ChartPoint::owned(&at.direction())
}

/// Umbilics located from grid minima of `k₂ − k₁` and refined by Newton's
/// method; accepted when `k₂ − k₁ < 10⁻⁶ max k₂`.
pub fn umbilics(surface: &Surface) -> Result<Vec<Umbilic>> {
    umbilics_with(surface, &SurfaceOptions::default())
}

pub fn umbilics_with(surface: &Surface, opts: &SurfaceOptions) -> Result<Vec<Umbilic>> {
    let (nu, nv) = (opts.grid_u, opts.grid_v);
    let mut seeds = Vec::new();
    let mut max_k2: f64 = 0.0;
    let mut max_split: f64 = 0.0;
    for chart in [Chart::Polar, Chart::Equatorial] {
        let data = chart_grid(chart, nu, nv, |at| surface.principal_at(at));
        max_k2 = data.iter().map(|d| d.k2).fold(max_k2, f64::max);
        max_split = data.iter().map(|d| d.k2 - d.k1).fold(max_split, f64::max);
        let split: Vec<f64> = data.iter().map(|d| d.k2 - d.k1).collect();
        let dv = PI / nv as f64;
        let keep = |_i: usize, j: usize| in_band(PI * (j as f64 + 0.5) / nv as f64, 2.0 * dv);
        for (i, j) in grid_local_minima(&split, nu, nv, keep) {
            seeds.push(ChartPoint::new(
                chart,
                TAU * i as f64 / nu as f64,
                PI * (j as f64 + 0.5) / nv as f64,
            ));
        }
    }
    let accept = 1e-6 * max_k2;
    if max_split < accept {
        return Err(Error::TotallyUmbilic);
    }
    let found: Vec<Umbilic> = seeds
        .par_iter()
        .filter_map(|s| {
            let at = refine_umbilic(surface, *s);
            let d = surface.principal_at(at);
            let splitting = d.k2 - d.k1;
            (splitting < accept).then(|| Umbilic {
                at,
                position: arr(&d.position),
                curvature: 0.5 * (d.k1 + d.k2),
                splitting,
            })
        })
        .collect();
    Ok(merge_by_position(
        found,
        |u| Vector3::from(u.position),
        opts.merge_radius * surface.scale.max(1.0),
    ))
}

/// Stationary-point type of the squared distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum D2Type {
    Maximum,
    Minimum,
    Saddle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCriticalPoint {
    pub chart: Chart,
    pub u_star: f64,
    pub v_star: f64,
    pub position: [f64; 3],
    pub rho_star: f64,
    pub k1: f64,
    pub k2: f64,
    /// From the Hessian of D² in chart coordinates.
    pub d2_type: D2Type,
    /// `sgn[(1 − ρ*k₁)(1 − ρ*k₂)]`.
    pub index: i32,
    /// Whether the position of `ρ*` relative to the sheets gives the same type.
    pub sheet_agrees: bool,
}

impl SurfaceCriticalPoint {
    pub fn chart_point(&self) -> ChartPoint {
        ChartPoint::new(self.chart, self.u_star, self.v_star)
    }
}

/// `D²(u, v) = |σ − p|²`.
pub fn distance_squared(surface: &Surface, p: &Vector3<f64>, at: ChartPoint) -> f64 {
    (surface.position(&at.direction()) - p).norm_squared()
}

/// Gradient and Hessian of D² in chart coordinates.
pub fn d2_derivatives(
    surface: &Surface,
    p: &Vector3<f64>,
    at: ChartPoint,
) -> (Vector2<f64>, Matrix2<f64>) {
    d2_from_jet(&surface.jet(at), p)
}

fn d2_from_jet(jet: &SurfaceJet, p: &Vector3<f64>) -> (Vector2<f64>, Matrix2<f64>) {
    let r = jet.position - p;
    let grad = 2.0 * Vector2::new(r.dot(&jet.du), r.dot(&jet.dv));
    let huv = 2.0 * (jet.du.dot(&jet.dv) + r.dot(&jet.duv));
    let hess = Matrix2::new(
        2.0 * (jet.du.dot(&jet.du) + r.dot(&jet.duu)),
        huv,
        huv,
        2.0 * (jet.dv.dot(&jet.dv) + r.dot(&jet.dvv)),
    );
    (grad, hess)
}

fn gradient_threshold(jet: &SurfaceJet, p: &Vector3<f64>, tol: f64) -> f64 {
    tol * (1.0 + (jet.position - p).norm() * jet.du.norm().max(jet.dv.norm()))
}

fn newton_d2(
    surface: &Surface,
    p: &Vector3<f64>,
    start: ChartPoint,
    tol: f64,
) -> Option<ChartPoint> {
    let mut at = start;
    for _ in 0..80 {
        at = recentre(at);
        let jet = surface.jet(at);
        let (g, h) = d2_from_jet(&jet, p);
        if g.norm() <= gradient_threshold(&jet, p, tol) {
            return Some(at);
        }
        let mut step = -(h.try_inverse()? * g);
        if !step.x.is_finite() || !step.y.is_finite() {
            return None;
        }
        if step.norm() > 0.2 {
            step *= 0.2 / step.norm();
        }
        at.u += step.x;
        at.v += step.y;
    }
    None
}

/// Sampled distances from `p` to the surface and to both focal sheets.
fn sampled_margin(
    surface: &Surface,
    p: &Vector3<f64>,
    opts: &SurfaceOptions,
) -> Option<GenericityViolation> {
    let d: Vec<[f64; 3]> = grid_directions(opts.grid_u, opts.grid_v)
        .par_iter()
        .map(|w| {
            let pd = surface.principal(w);
            [
                (pd.position - p).norm(),
                (pd.sheet1 - p).norm(),
                (pd.sheet2 - p).norm(),
            ]
        })
        .collect();
    let min = |k: usize| d.iter().map(|x| x[k]).fold(f64::INFINITY, f64::min);
    let (s, b1, b2) = (min(0), min(1), min(2));
    if s <= opts.genericity {
        Some(GenericityViolation::OnSurface { distance: s })
    } else if b1 <= opts.genericity {
        Some(GenericityViolation::OnFocalSheet {
            sheet: 1,
            distance: b1,
        })
    } else if b2 <= opts.genericity {
        Some(GenericityViolation::OnFocalSheet {
            sheet: 2,
            distance: b2,
        })
    } else {
        None
    }
}

fn classify_surface_point(
    surface: &Surface,
    p: &Vector3<f64>,
    at: ChartPoint,
    opts: &SurfaceOptions,
) -> Result<SurfaceCriticalPoint> {
    let jet = surface.jet(at);
    let pd = principal_from_jet(&jet);
    let rho = -(jet.position - p).dot(&pd.normal);
    let location = arr(&jet.position);
    let tol = opts.genericity;
    if rho.abs() <= tol {
        return Err(Error::Genericity(GenericityViolation::OnSurface {
            distance: rho.abs(),
        }));
    }
    for (sheet, k) in [(1u8, pd.k1), (2, pd.k2)] {
        let gap = (rho - 1.0 / k).abs();
        if gap <= tol {
            return Err(Error::Genericity(GenericityViolation::OnFocalSheet {
                sheet,
                distance: gap,
            }));
        }
    }
    let (_, h) = d2_from_jet(&jet, p);
    let det = h.determinant();
    if det.abs() <= 1e-12 * h.norm_squared() {
        return Err(Error::DegenerateSurfaceCriticalPoint { location, rho, det });
    }
    let d2_type = if det < 0.0 {
        D2Type::Saddle
    } else if h.trace() > 0.0 {
        D2Type::Minimum
    } else {
        D2Type::Maximum
    };
    let by_sheets = if rho > 1.0 / pd.k1 {
        D2Type::Maximum
    } else if rho < 1.0 / pd.k2 {
        D2Type::Minimum
    } else {
        D2Type::Saddle
    };
    let product = (1.0 - rho * pd.k1) * (1.0 - rho * pd.k2);
    Ok(SurfaceCriticalPoint {
        chart: at.chart,
        u_star: at.u,
        v_star: at.v,
        position: location,
        rho_star: rho,
        k1: pd.k1,
        k2: pd.k2,
        d2_type,
        index: if product > 0.0 { 1 } else { -1 },
        sheet_agrees: by_sheets == d2_type,
    })
}

/// Stationary points of `D² = |σ − p|²`, seeded from grid minima of the
/// gradient norm in both charts, refined by Newton's method and merged.
/// Sorted by type, then position.
pub fn surface_critical_points(
    surface: &Surface,
    p: &Vector3<f64>,
) -> Result<Vec<SurfaceCriticalPoint>> {
    surface_critical_points_with(surface, p, &SurfaceOptions::default())
}

pub fn surface_critical_points_with(
    surface: &Surface,
    p: &Vector3<f64>,
    opts: &SurfaceOptions,
) -> Result<Vec<SurfaceCriticalPoint>> {
    if let Some(v) = sampled_margin(surface, p, opts) {
        return Err(Error::Genericity(v));
    }
    let (nu, nv) = (opts.grid_u, opts.grid_v);
    let mut seeds = Vec::new();
    for chart in [Chart::Polar, Chart::Equatorial] {
        let norms = chart_grid(chart, nu, nv, |at| {
            d2_derivatives(surface, p, at).0.norm_squared()
        });
        let dv = PI / nv as f64;
        let keep = |_i: usize, j: usize| in_band(PI * (j as f64 + 0.5) / nv as f64, 2.0 * dv);
        for (i, j) in grid_local_minima(&norms, nu, nv, keep) {
            seeds.push(ChartPoint::new(
                chart,
                TAU * i as f64 / nu as f64,
                PI * (j as f64 + 0.5) / nv as f64,
            ));
        }
    }
    let located: Vec<ChartPoint> = seeds
        .par_iter()
        .filter_map(|s| newton_d2(surface, p, *s, opts.gradient_tol))
        .filter_map(|at| {
            // report in the owning chart
            let owned = ChartPoint::owned(&at.direction());
            newton_d2(surface, p, owned, opts.gradient_tol)
                .map(|x| ChartPoint::owned(&x.direction()))
                .or(Some(owned))
        })
        .collect();
    let merged = merge_by_position(
        located,
        |at| surface.position(&at.direction()),
        opts.merge_radius * surface.scale.max(1.0),
    );
    let mut points = merged
        .into_iter()
        .map(|at| classify_surface_point(surface, p, at, opts))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| {
        let rank = |t: D2Type| t as u8;
        rank(a.d2_type).cmp(&rank(b.d2_type)).then_with(|| {
            a.position
                .partial_cmp(&b.position)
                .unwrap_or(Ordering::Equal)
        })
    });
    Ok(points)
}

/// One boolean per surface identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceChecks {
    /// `n⁺ + n⁻ − n⁰ = 2`
    pub count_identity: bool,
    /// `Σ index = 2d`
    pub index_sum: bool,
    /// `w^{β₁}_p = n⁺ − 1`
    pub sheet1_winding: bool,
    /// `w^{β₂}_p = n⁻ − 1`
    pub sheet2_winding: bool,
    /// `N_p = 2(w^{β₁}_p + w^{β₂}_p) + 2`
    pub normal_count: bool,
    /// Hessian type equals sheet-position type at every point
    pub classification: bool,
    /// numeric Gauss-map degree equals `d`
    pub gauss_degree: bool,
}

impl SurfaceChecks {
    pub fn all(&self) -> bool {
        self.count_identity
            && self.index_sum
            && self.sheet1_winding
            && self.sheet2_winding
            && self.normal_count
            && self.classification
            && self.gauss_degree
    }

    pub fn failures(&self) -> Vec<&'static str> {
        [
            ("n_plus + n_minus - n_zero = 2", self.count_identity),
            ("index sum = 2d", self.index_sum),
            ("w_beta1_p = n_plus - 1", self.sheet1_winding),
            ("w_beta2_p = n_minus - 1", self.sheet2_winding),
            ("N_p = 2(w_beta1_p + w_beta2_p) + 2", self.normal_count),
            ("Hessian type = sheet position type", self.classification),
            ("Gauss map degree = d", self.gauss_degree),
        ]
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(n, _)| *n)
        .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceIndexReport {
    pub point: [f64; 3],
    /// Maxima of D².
    pub n_plus: i64,
    /// Minima of D².
    pub n_minus: i64,
    /// Saddles of D².
    pub n_zero: i64,
    /// Winding of the far sheet `β₁` about `p`.
    pub w_beta1_p: i64,
    /// Winding of the near sheet `β₂` about `p`.
    pub w_beta2_p: i64,
    /// Solid-angle degrees of `β₁`, `β₂` with the orientation of the surface.
    pub sheet_degrees: [i64; 2],
    #[serde(rename = "N_p")]
    pub big_n_p: i64,
    pub d: i64,
    /// Degree of the outward Gauss map, by solid angle.
    pub gauss_degree: i64,
    pub index_sum: i64,
    pub critical_points: Vec<SurfaceCriticalPoint>,
    pub checks: SurfaceChecks,
    pub options: SurfaceOptions,
}

impl SurfaceIndexReport {
    /// `Err(IdentityMismatch)` unless every identity holds.
    pub fn ensure_consistent(&self) -> Result<()> {
        if self.checks.all() {
            Ok(())
        } else {
            Err(Error::IdentityMismatch(format!(
                "surface at {:?}: {}",
                self.point,
                self.checks.failures().join("; ")
            )))
        }
    }
}

/// Orientation of each sheet relative to the surface: the near sheet is
/// taken with the opposite orientation.
pub const SHEET_ORIENTATION: [i64; 2] = [1, -1];

/// Degree about `p` of the focal sheet `ω ↦ σ + n/k_i`, with the domain
/// oriented as the surface.
pub fn sheet_degree(
    surface: &Surface,
    sheet: u8,
    p: &Vector3<f64>,
    mesh: SphereMesh,
) -> Result<i64> {
    let pick = move |w: Vector3<f64>| {
        let d = surface.principal(&w);
        if sheet == 1 {
            d.sheet1
        } else {
            d.sheet2
        }
    };
    degree::spherical_degree(pick, *p, mesh)
}

/// Builds the report without judging it; see [`surface_report`].
pub fn compute_surface_report(
    surface: &Surface,
    p: &Vector3<f64>,
    opts: &SurfaceOptions,
) -> Result<SurfaceIndexReport> {
    let points = surface_critical_points_with(surface, p, opts)?;
    let count = |t: D2Type| points.iter().filter(|c| c.d2_type == t).count() as i64;
    let (n_plus, n_minus, n_zero) = (
        count(D2Type::Maximum),
        count(D2Type::Minimum),
        count(D2Type::Saddle),
    );
    let index_sum: i64 = points.iter().map(|c| c.index as i64).sum();
    let deg1 = sheet_degree(surface, 1, p, opts.mesh)?;
    let deg2 = sheet_degree(surface, 2, p, opts.mesh)?;
    let (w1, w2) = (SHEET_ORIENTATION[0] * deg1, SHEET_ORIENTATION[1] * deg2);
    let gauss = degree::spherical_degree(
        |w| -surface.principal(&w).normal,
        Vector3::zeros(),
        opts.mesh,
    )?;
    let d = 1;
    let big_n_p = points.len() as i64;
    let checks = SurfaceChecks {
        count_identity: n_plus + n_minus - n_zero == 2,
        index_sum: index_sum == 2 * d,
        sheet1_winding: w1 == n_plus - 1,
        sheet2_winding: w2 == n_minus - 1,
        normal_count: big_n_p == 2 * (w1 + w2) + 2,
        classification: points.iter().all(|c| c.sheet_agrees),
        gauss_degree: gauss == d,
    };
    Ok(SurfaceIndexReport {
        point: arr(p),
        n_plus,
        n_minus,
        n_zero,
        w_beta1_p: w1,
        w_beta2_p: w2,
        sheet_degrees: [deg1, deg2],
        big_n_p,
        d,
        gauss_degree: gauss,
        index_sum,
        critical_points: points,
        checks,
        options: *opts,
    })
}

/// The full surface report; `Err(IdentityMismatch)` if the solid-angle
/// degrees disagree with the counts or any other identity fails.
pub fn surface_report(surface: &Surface, p: &Vector3<f64>) -> Result<SurfaceIndexReport> {
    let report = compute_surface_report(surface, p, &SurfaceOptions::default())?;
    report.ensure_consistent()?;
    Ok(report)
}
