//! Degrees of circle and sphere maps.
//!
//! Every integer invariant in the crate is measured here. Two independent
//! routes are kept for the circle degree: the lifted-angle sum
//! ([`circle_degree`]) and the signed preimage count
//! ([`degree_by_preimage`]). Winding numbers additionally have a
//! quadrature form ([`winding_by_quadrature`]).

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Vector2, Vector3};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::roots::{self, DEFAULT_SAMPLES, MAX_SAMPLES};

/// Largest accepted distance from an integer before rounding.
pub const RESIDUAL_TOL: f64 = 0.1;
/// Largest accepted lifted-angle increment between neighbouring samples.
pub const MAX_STEP: f64 = FRAC_PI_2;
/// Minimum distance between a query point and a loop image.
pub const POINT_ON_LOOP_TOL: f64 = 1e-8;
/// Minimum distance between a query point and a sampled sphere image.
pub const POINT_ON_SURFACE_TOL: f64 = 1e-6;

/// A closed loop `t ↦ v(t)` of plane vectors over `t ∈ [0, 2π)`.
#[derive(Clone)]
pub struct CircleLoop<F> {
    eval: F,
    samples: usize,
    max_depth: u32,
}

impl<F> CircleLoop<F>
where
    F: Fn(f64) -> Vector2<f64>,
{
    pub fn new(eval: F) -> Self {
        CircleLoop {
            eval,
            samples: 256,
            max_depth: 24,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples.max(4);
        self
    }

    /// Maximum number of interval halvings below the base grid.
    pub fn with_refinement_budget(mut self, max_depth: u32) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn eval(&self, t: f64) -> Vector2<f64> {
        (self.eval)(t)
    }

    fn checked(&self, t: f64) -> Result<Vector2<f64>> {
        let v = self.eval(t);
        if !(v.x.is_finite() && v.y.is_finite()) || (v.x == 0.0 && v.y == 0.0) {
            return Err(Error::ZeroVector { t });
        }
        Ok(v)
    }

    fn increment(
        &self,
        a: f64,
        va: Vector2<f64>,
        b: f64,
        vb: Vector2<f64>,
        depth: u32,
    ) -> Result<f64> {
        let step = signed_angle(&va, &vb);
        if step.abs() <= MAX_STEP {
            return Ok(step);
        }
        if depth >= self.max_depth {
            return Err(Error::DegreeResolution(format!(
                "angle step {step:.3} on [{a:.9}, {b:.9}] after {depth} refinements"
            )));
        }
        let mid = 0.5 * (a + b);
        let vm = self.checked(mid)?;
        Ok(self.increment(a, va, mid, vm, depth + 1)?
            + self.increment(mid, vm, b, vb, depth + 1)?)
    }

    /// Total change of the lifted angle over one period.
    pub fn lifted_angle(&self) -> Result<f64> {
        let n = self.samples;
        let h = TAU / n as f64;
        let values = (0..n)
            .map(|i| self.checked(i as f64 * h))
            .collect::<Result<Vec<_>>>()?;
        let mut total = 0.0;
        for i in 0..n {
            let a = i as f64 * h;
            // the closing step reuses v(0) so the sum is an exact multiple of 2π
            let vb = values[(i + 1) % n];
            total += self.increment(a, values[i], a + h, vb, 0)?;
        }
        Ok(total)
    }
}

/// Angle from `a` to `b` in `(-π, π]`.
pub fn signed_angle(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    let cross = a.x * b.y - a.y * b.x;
    let dot = a.dot(b);
    cross.atan2(dot)
}

fn round_to_integer(turns: f64, what: &str) -> Result<i64> {
    let rounded = turns.round();
    if (turns - rounded).abs() >= RESIDUAL_TOL {
        return Err(Error::DegreeResolution(format!(
            "{what}: {turns:.6} is not within {RESIDUAL_TOL} of an integer"
        )));
    }
    Ok(rounded as i64)
}

/// Degree of the loop as a circle map, by lifted-angle unwrapping.
pub fn circle_degree<F>(lp: &CircleLoop<F>) -> Result<i64>
where
    F: Fn(f64) -> Vector2<f64>,
{
    round_to_integer(lp.lifted_angle()? / TAU, "lifted angle")
}

/// Degree of the loop as the signed count of preimages of `direction`.
///
/// Preimages are bracketed as roots of `sin(θ(t) − direction)` with
/// `cos(θ(t) − direction) > 0`; each contributes the sign of `dθ/dt`,
/// estimated by central differences.
pub fn degree_by_preimage<F>(lp: &CircleLoop<F>, direction: f64) -> Result<i64>
where
    F: Fn(f64) -> Vector2<f64>,
{
    let dir = Vector2::new(direction.cos(), direction.sin());
    let sine = |t: f64| {
        let v = lp.eval(t);
        let r = v.norm();
        (dir.x * v.y - dir.y * v.x) / r
    };
    let scan = roots::periodic_roots(&sine, DEFAULT_SAMPLES, MAX_SAMPLES, 1e-13);
    let h = 1e-6;
    let mut degree = 0;
    for t in scan.roots {
        let v = lp.checked(t)?;
        if v.dot(&dir) <= 0.0 {
            continue;
        }
        let rate = signed_angle(&lp.checked(t - h)?, &lp.checked(t + h)?) / (2.0 * h);
        if !rate.is_finite() || rate.abs() < 1e-7 {
            return Err(Error::NonRegularValue { direction });
        }
        degree += rate.signum() as i64;
    }
    Ok(degree)
}

/// [`degree_by_preimage`], retrying up to eight pseudo-random directions
/// when the requested one is not a regular value.
pub fn degree_by_preimage_retrying<F>(lp: &CircleLoop<F>, direction: f64, seed: u64) -> Result<i64>
where
    F: Fn(f64) -> Vector2<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dir = direction;
    let mut last = None;
    for _ in 0..=8 {
        match degree_by_preimage(lp, dir) {
            Err(e @ Error::NonRegularValue { .. }) => {
                last = Some(e);
                dir = direction + rng.random_range(-PI..PI);
            }
            other => return other,
        }
    }
    Err(last.unwrap_or(Error::NonRegularValue { direction }))
}

/// Winding number of the loop about `p`.
pub fn winding_number<F>(lp: &CircleLoop<F>, p: Vector2<f64>) -> Result<i64>
where
    F: Fn(f64) -> Vector2<f64>,
{
    let n = lp.samples.max(1024);
    let h = TAU / n as f64;
    for i in 0..n {
        let t = i as f64 * h;
        let distance = (lp.eval(t) - p).norm();
        if distance <= POINT_ON_LOOP_TOL {
            return Err(Error::PointOnCurve { t, distance });
        }
    }
    let shifted = CircleLoop {
        eval: |t: f64| lp.eval(t) - p,
        samples: lp.samples,
        max_depth: lp.max_depth,
    };
    circle_degree(&shifted)
}

/// Winding number of a closed curve about `p` as the trapezoidal quadrature
/// of `(x dy − y dx) / (x² + y²)`, given the curve and its derivative.
pub fn winding_by_quadrature<P, D>(
    position: P,
    velocity: D,
    p: Vector2<f64>,
    samples: usize,
) -> Result<i64>
where
    P: Fn(f64) -> Vector2<f64>,
    D: Fn(f64) -> Vector2<f64>,
{
    let h = TAU / samples as f64;
    let mut sum = 0.0;
    for i in 0..samples {
        let t = i as f64 * h;
        let r = position(t) - p;
        let r2 = r.norm_squared();
        if r2.sqrt() <= POINT_ON_LOOP_TOL {
            return Err(Error::PointOnCurve {
                t,
                distance: r2.sqrt(),
            });
        }
        let v = velocity(t);
        sum += (r.x * v.y - r.y * v.x) / r2;
    }
    round_to_integer(sum * h / TAU, "winding quadrature")
}

/// Total anticlockwise rotation of `u` relative to `v` along the loop.
pub fn relative_degree<U, V>(u: U, v: V, samples: usize) -> Result<i64>
where
    U: Fn(f64) -> Vector2<f64>,
    V: Fn(f64) -> Vector2<f64>,
{
    // u · conj(v) as complex numbers
    let lp = CircleLoop::new(|t: f64| {
        let a = u(t);
        let b = v(t);
        Vector2::new(a.x * b.x + a.y * b.y, a.y * b.x - a.x * b.y)
    })
    .with_samples(samples);
    circle_degree(&lp)
}

/// Poincaré index of a planar field about `center`, measured on the
/// positively oriented circle of the given radius.
pub fn planar_index<F>(field: F, center: Vector2<f64>, radius: f64) -> Result<i64>
where
    F: Fn(Vector2<f64>) -> Vector2<f64>,
{
    let lp = CircleLoop::new(|t: f64| field(center + radius * Vector2::new(t.cos(), t.sin())))
        .with_samples(64);
    circle_degree(&lp)
}

/// [`planar_index`], halving the radius up to six times while the circle
/// meets a zero of the field.
pub fn planar_index_shrinking<F>(field: F, center: Vector2<f64>, radius: f64) -> Result<i64>
where
    F: Fn(Vector2<f64>) -> Vector2<f64>,
{
    let mut r = radius;
    let mut last = None;
    for _ in 0..=6 {
        match planar_index(&field, center, r) {
            Err(e @ Error::ZeroVector { .. }) => {
                last = Some(e);
                r *= 0.5;
            }
            other => return other,
        }
    }
    Err(last.unwrap_or(Error::ZeroVector { t: 0.0 }))
}

/// Resolution of the latitude–longitude triangulation of the domain sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SphereMesh {
    pub longitudes: usize,
    pub latitudes: usize,
}

impl Default for SphereMesh {
    fn default() -> Self {
        SphereMesh {
            longitudes: 256,
            latitudes: 128,
        }
    }
}

impl SphereMesh {
    pub fn doubled(self) -> Self {
        SphereMesh {
            longitudes: self.longitudes * 2,
            latitudes: self.latitudes * 2,
        }
    }

    /// Unit vector at ring `j` (1..latitudes) and longitude index `i`.
    fn ring_point(&self, j: usize, i: usize) -> Vector3<f64> {
        let theta = PI * j as f64 / self.latitudes as f64;
        let phi = TAU * (i % self.longitudes) as f64 / self.longitudes as f64;
        Vector3::new(
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        )
    }
}

/// Solid angle subtended at the origin by the triangle `(a, b, c)`,
/// positive when the triangle is anticlockwise seen from the origin's far
/// side (i.e. its normal `(b−a)×(c−a)` points away from the origin).
pub fn triangle_solid_angle(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let numerator = a.dot(&b.cross(c));
    let denominator = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
    2.0 * numerator.atan2(denominator)
}

/// Degree of a map from the unit sphere into space about `p`: the signed
/// solid angle of the image of an outward-oriented triangulation, over 4π.
pub fn spherical_degree<M>(map: M, p: Vector3<f64>, mesh: SphereMesh) -> Result<i64>
where
    M: Fn(Vector3<f64>) -> Vector3<f64> + Sync,
{
    let nlon = mesh.longitudes;
    let nlat = mesh.latitudes;
    let north = map(Vector3::z()) - p;
    let south = map(-Vector3::z()) - p;
    let rings: Vec<Vec<Vector3<f64>>> = (1..nlat)
        .into_par_iter()
        .map(|j| (0..nlon).map(|i| map(mesh.ring_point(j, i)) - p).collect())
        .collect();

    let closest = rings
        .iter()
        .flatten()
        .chain([&north, &south])
        .map(|v| v.norm())
        .fold(f64::INFINITY, f64::min);
    if closest <= POINT_ON_SURFACE_TOL {
        return Err(Error::PointOnSurface { distance: closest });
    }

    let first = &rings[0];
    let last = &rings[rings.len() - 1];
    let caps: f64 = (0..nlon)
        .map(|i| {
            let k = (i + 1) % nlon;
            triangle_solid_angle(&north, &first[i], &first[k])
                + triangle_solid_angle(&south, &last[k], &last[i])
        })
        .sum();
    let bands: Vec<f64> = rings
        .par_windows(2)
        .map(|w| {
            let (upper, lower) = (&w[0], &w[1]);
            (0..nlon)
                .map(|i| {
                    let k = (i + 1) % nlon;
                    triangle_solid_angle(&upper[i], &lower[i], &lower[k])
                        + triangle_solid_angle(&upper[i], &lower[k], &upper[k])
                })
                .sum()
        })
        .collect();
    let total = caps + bands.iter().sum::<f64>();
    round_to_integer(total / (4.0 * PI), "solid angle")
}
