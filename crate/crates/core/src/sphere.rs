//! Two-point compactification of the cylinder and the indices at its poles.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::degree;
use crate::error::Result;
use crate::field::{self, normal_map};
use crate::geom::{ClosedCurve, Point2};

/// Default |ρ| of the loop that stands in for a pole.
pub const DEFAULT_POLE_RHO: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderPoint {
    pub t: f64,
    pub rho: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    North,
    South,
}

/// Central projection of the unit cylinder onto the unit sphere:
/// longitude `t`, latitude `arctan ρ`. Infinite ρ lands on a pole.
pub fn mercator(point: CylinderPoint) -> Vector3<f64> {
    let lat = point.rho.atan();
    let (s, c) = point.t.sin_cos();
    Vector3::new(c * lat.cos(), s * lat.cos(), lat.sin())
}

/// Pushforward of the cylinder vector `a ∂_t + b ∂_ρ` under [`mercator`].
pub fn mercator_vector(point: CylinderPoint, a: f64, b: f64) -> Vector3<f64> {
    let lat = point.rho.atan();
    let (s, c) = point.t.sin_cos();
    let (sl, cl) = lat.sin_cos();
    let dlat = 1.0 / (1.0 + point.rho * point.rho);
    Vector3::new(-s * cl, c * cl, 0.0) * a + Vector3::new(-c * sl, -s * sl, cl) * (b * dlat)
}

/// Poincaré index of the projected normal-map field at a pole, from the
/// relative degree of `F(·, ±ρ₀)` against the azimuthal direction.
pub fn pole_index(curve: &ClosedCurve, pole: Pole, rho0: f64) -> Result<i64> {
    let rho = match pole {
        Pole::North => rho0.abs(),
        Pole::South => -rho0.abs(),
    };
    let u = |t: f64| {
        let v = normal_map(curve, t, rho).point;
        v / v.norm()
    };
    let azimuthal = |_t: f64| Vector2::new(1.0, 0.0);
    let rel = degree::relative_degree(u, azimuthal, 1024)?;
    Ok(match pole {
        Pole::North => 1 + rel,
        Pole::South => 1 - rel,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereSample {
    pub t: f64,
    pub rho: f64,
    pub point: [f64; 3],
    /// Pushed-forward field direction, unit length (zero at critical points).
    pub vector: [f64; 3],
}

/// Field data projected to the sphere for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereField {
    pub samples: Vec<SphereSample>,
    pub fold: Vec<[f64; 3]>,
    pub critical: Vec<[f64; 3]>,
    pub i_north: i64,
    pub i_south: i64,
}

fn arr(v: Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Samples the field `F(t, ρ) − p` on a longitude × latitude grid of the
/// sphere, with the fold curve, the finite critical points and the pole
/// indices.
pub fn project_field(
    curve: &ClosedCurve,
    p: Point2,
    res_t: usize,
    res_lat: usize,
) -> Result<SphereField> {
    let mut samples = Vec::with_capacity(res_t * res_lat);
    for i in 0..res_t {
        let t = TAU * i as f64 / res_t as f64;
        for j in 0..res_lat {
            // open latitude interval, poles excluded
            let lat = -FRAC_PI_2 + std::f64::consts::PI * (j as f64 + 0.5) / res_lat as f64;
            let q = CylinderPoint { t, rho: lat.tan() };
            let f = normal_map(curve, t, q.rho).point - p;
            let v = mercator_vector(q, f.x, f.y);
            let norm = v.norm();
            let v = if norm > 0.0 { v / norm } else { v };
            samples.push(SphereSample {
                t,
                rho: q.rho,
                point: arr(mercator(q)),
                vector: arr(v),
            });
        }
    }
    let fold = (0..=512)
        .map(|i| {
            let t = TAU * i as f64 / 512.0;
            arr(mercator(CylinderPoint {
                t,
                rho: 1.0 / curve.curvature(t),
            }))
        })
        .collect();
    let critical = field::critical_points(curve, p)?
        .iter()
        .map(|c| {
            arr(mercator(CylinderPoint {
                t: c.t_star,
                rho: c.rho_star,
            }))
        })
        .collect();
    Ok(SphereField {
        samples,
        fold,
        critical,
        i_north: pole_index(curve, Pole::North, DEFAULT_POLE_RHO)?,
        i_south: pole_index(curve, Pole::South, DEFAULT_POLE_RHO)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::CurveSpec;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn mercator_examples() {
        let q = mercator(CylinderPoint { t: 0.7, rho: 0.0 });
        assert!(q.z.abs() < 1e-15 && (q.x - 0.7f64.cos()).abs() < 1e-15);
        let n = mercator(CylinderPoint {
            t: 2.0,
            rho: f64::INFINITY,
        });
        assert!((n - Vector3::z()).norm() < 1e-15);
        let s = mercator(CylinderPoint {
            t: 2.0,
            rho: f64::NEG_INFINITY,
        });
        assert!((s + Vector3::z()).norm() < 1e-15);
        let q = mercator(CylinderPoint { t: 0.0, rho: 1.0 });
        assert!((q.z.asin() - FRAC_PI_4).abs() < 1e-15 && q.y.abs() < 1e-15);
    }

    #[test]
    fn pushforward_matches_finite_difference() {
        let q = CylinderPoint { t: 0.4, rho: -1.3 };
        let h = 1e-6;
        let fd = (mercator(CylinderPoint {
            t: q.t + 2.0 * h,
            rho: q.rho + 3.0 * h,
        }) - mercator(CylinderPoint {
            t: q.t - 2.0 * h,
            rho: q.rho - 3.0 * h,
        })) / (2.0 * h);
        assert!((fd - mercator_vector(q, 2.0, 3.0)).norm() < 1e-8);
    }

    #[test]
    fn pole_indices() {
        let e = ClosedCurve::strict(&CurveSpec::ellipse(2.0, 1.0)).unwrap();
        assert_eq!(pole_index(&e, Pole::North, DEFAULT_POLE_RHO).unwrap(), 2);
        assert_eq!(pole_index(&e, Pole::South, DEFAULT_POLE_RHO).unwrap(), 0);
        let l = ClosedCurve::strict(&CurveSpec::limacon(0.5)).unwrap();
        assert_eq!(pole_index(&l, Pole::North, DEFAULT_POLE_RHO).unwrap(), 3);
        assert_eq!(pole_index(&l, Pole::South, DEFAULT_POLE_RHO).unwrap(), -1);
    }

    #[test]
    fn projected_samples() {
        let e = ClosedCurve::strict(&CurveSpec::ellipse(2.0, 1.0)).unwrap();
        let s = project_field(&e, Point2::zeros(), 16, 9).unwrap();
        assert_eq!(s.critical.len(), 4);
        assert_eq!((s.i_north, s.i_south), (2, 0));
        // the middle latitude row is the equator
        let equator: Vec<_> = s.samples.iter().filter(|x| x.rho.abs() < 1e-12).collect();
        assert_eq!(equator.len(), 16);
        assert!(equator.iter().all(|x| x.point[2].abs() < 1e-12));
        for (i, f) in s.fold.iter().enumerate() {
            let t = TAU * i as f64 / 512.0;
            let expected = (1.0 / e.curvature(t)).atan();
            assert!((f[2].asin() - expected).abs() < 1e-12);
        }
    }
}
