//! Closed plane curves given by finite Fourier series.

use std::f64::consts::TAU;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::degree::{self, CircleLoop};
use crate::error::{Error, Result};
use crate::roots;

pub type Point2 = Vector2<f64>;

/// Dense sample count used for construction-time checks and quadrature.
pub const CHECK_SAMPLES: usize = 8192;

/// `x(t) = ax₀ + Σ_{j≥1} (ax_j cos jt + bx_j sin jt)`, likewise `y(t)`.
/// Index 0 of `bx`/`by` is ignored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    #[serde(default)]
    pub ax: Vec<f64>,
    #[serde(default)]
    pub bx: Vec<f64>,
    #[serde(default)]
    pub ay: Vec<f64>,
    #[serde(default)]
    pub by: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

/// Curve input: explicit coefficients or a named preset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveSpec {
    Fourier(FourierSeries),
    Preset(Preset),
}

impl CurveSpec {
    pub fn ellipse(a: f64, b: f64) -> Self {
        CurveSpec::preset("ellipse", &[a, b])
    }

    /// `(cos 2t + c cos t, sin 2t + c sin t)`.
    pub fn limacon(c: f64) -> Self {
        CurveSpec::preset("limacon", &[c])
    }

    pub fn circle(r: f64, center: Point2) -> Self {
        CurveSpec::preset("circle", &[r, center.x, center.y])
    }

    fn preset(name: &str, params: &[f64]) -> Self {
        CurveSpec::Preset(Preset {
            name: name.into(),
            params: params.to_vec(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve spec serializes")
    }

    /// Resolves presets to coefficients.
    pub fn series(&self) -> Result<FourierSeries> {
        let series = match self {
            CurveSpec::Fourier(s) => s.clone(),
            CurveSpec::Preset(p) => {
                let want = |n: &[usize]| {
                    if n.contains(&p.params.len()) {
                        Ok(())
                    } else {
                        Err(Error::InvalidSpec(format!(
                            "preset '{}' takes {:?} parameters, got {}",
                            p.name,
                            n,
                            p.params.len()
                        )))
                    }
                };
                match p.name.as_str() {
                    "ellipse" => {
                        want(&[2])?;
                        let (a, b) = (p.params[0], p.params[1]);
                        FourierSeries {
                            ax: vec![0.0, a],
                            bx: vec![0.0, 0.0],
                            ay: vec![0.0, 0.0],
                            by: vec![0.0, b],
                        }
                    }
                    "limacon" => {
                        want(&[1])?;
                        let c = p.params[0];
                        FourierSeries {
                            ax: vec![0.0, c, 1.0],
                            bx: vec![0.0, 0.0, 0.0],
                            ay: vec![0.0, 0.0, 0.0],
                            by: vec![0.0, c, 1.0],
                        }
                    }
                    "circle" => {
                        want(&[1, 3])?;
                        let r = p.params[0];
                        let (cx, cy) = match p.params.len() {
                            3 => (p.params[1], p.params[2]),
                            _ => (0.0, 0.0),
                        };
                        FourierSeries {
                            ax: vec![cx, r],
                            bx: vec![0.0, 0.0],
                            ay: vec![cy, 0.0],
                            by: vec![0.0, r],
                        }
                    }
                    other => {
                        return Err(Error::InvalidSpec(format!(
                            "unknown curve preset '{other}'"
                        )))
                    }
                }
            }
        };
        series.validate()?;
        Ok(series)
    }
}

/// Position and the first three parameter derivatives at one `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveJet {
    pub position: Point2,
    pub d1: Vector2<f64>,
    pub d2: Vector2<f64>,
    pub d3: Vector2<f64>,
}

impl CurveJet {
    pub fn speed(&self) -> f64 {
        self.d1.norm()
    }

    pub fn curvature(&self) -> f64 {
        cross(&self.d1, &self.d2) / self.speed().powi(3)
    }

    /// dk/dt (parameter derivative, not arc length).
    pub fn curvature_rate(&self) -> f64 {
        let s2 = self.d1.norm_squared();
        let s = s2.sqrt();
        let c = cross(&self.d1, &self.d2);
        let dc = cross(&self.d1, &self.d3);
        dc / (s2 * s) - 3.0 * c * self.d1.dot(&self.d2) / (s2 * s2 * s)
    }
}

pub(crate) fn cross(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Rotate +90°.
pub(crate) fn perp(v: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v.y, v.x)
}

impl FourierSeries {
    fn harmonics(&self) -> usize {
        [&self.ax, &self.bx, &self.ay, &self.by]
            .iter()
            .map(|c| c.len())
            .max()
            .unwrap_or(0)
    }

    fn coeff(c: &[f64], j: usize) -> f64 {
        c.get(j).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [&self.ax, &self.bx, &self.ay, &self.by];
        if all.iter().flat_map(|c| c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("non-finite Fourier coefficient".into()));
        }
        let nonconstant = all.iter().any(|c| c.iter().skip(1).any(|&v| v != 0.0));
        if !nonconstant {
            return Err(Error::InvalidSpec(
                "curve is constant: no nonzero coefficient with j ≥ 1".into(),
            ));
        }
        Ok(())
    }

    pub fn jet(&self, t: f64) -> CurveJet {
        let ax0 = Self::coeff(&self.ax, 0);
        let ay0 = Self::coeff(&self.ay, 0);
        let mut jet = CurveJet {
            position: Vector2::new(ax0, ay0),
            d1: Vector2::zeros(),
            d2: Vector2::zeros(),
            d3: Vector2::zeros(),
        };
        for j in 1..self.harmonics() {
            let jf = j as f64;
            let (s, c) = (jf * t).sin_cos();
            let a = Vector2::new(Self::coeff(&self.ax, j), Self::coeff(&self.ay, j));
            let b = Vector2::new(Self::coeff(&self.bx, j), Self::coeff(&self.by, j));
            let even = a * c + b * s;
            let odd = b * c - a * s;
            jet.position += even;
            jet.d1 += odd * jf;
            jet.d2 -= even * (jf * jf);
            jet.d3 -= odd * (jf * jf * jf);
        }
        jet
    }

    /// Same curve with parameter `t ↦ −t`.
    pub fn reversed(&self) -> Self {
        FourierSeries {
            ax: self.ax.clone(),
            bx: self.bx.iter().map(|v| -v).collect(),
            ay: self.ay.clone(),
            by: self.by.iter().map(|v| -v).collect(),
        }
    }

    /// Same curve with parameter `t ↦ t + c`.
    pub fn phase_shifted(&self, c: f64) -> Self {
        let n = self.harmonics();
        let mut out = FourierSeries {
            ax: vec![0.0; n],
            bx: vec![0.0; n],
            ay: vec![0.0; n],
            by: vec![0.0; n],
        };
        out.ax[0] = Self::coeff(&self.ax, 0);
        out.ay[0] = Self::coeff(&self.ay, 0);
        for j in 1..n {
            let (s, co) = (j as f64 * c).sin_cos();
            let (ax, bx) = (Self::coeff(&self.ax, j), Self::coeff(&self.bx, j));
            let (ay, by) = (Self::coeff(&self.ay, j), Self::coeff(&self.by, j));
            out.ax[j] = ax * co + bx * s;
            out.bx[j] = bx * co - ax * s;
            out.ay[j] = ay * co + by * s;
            out.by[j] = by * co - ay * s;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Parameter direction as given.
    AsGiven,
    /// Parameter direction reversed so that k > 0.
    Reversed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CurveOptions {
    /// Require k > 0 everywhere.
    pub strict_convex: bool,
}

/// Unit frame and curvature at a parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub position: Point2,
    pub tangent: Vector2<f64>,
    pub normal: Vector2<f64>,
    pub curvature: f64,
}

/// A regular closed curve, oriented so that k > 0 when its curvature has
/// one sign. `(tangent, normal)` is right-handed, so the normal points to
/// the centre of curvature.
#[derive(Clone, Debug)]
pub struct ClosedCurve {
    spec: CurveSpec,
    series: FourierSeries,
    length: f64,
    orientation: Orientation,
    strict_convex: bool,
}

/// Builds a curve from its spec, checking regularity and (optionally)
/// strict positivity of curvature.
pub fn make_curve(spec: &CurveSpec, options: CurveOptions) -> Result<ClosedCurve> {
    let series = spec.series()?;
    let h = TAU / CHECK_SAMPLES as f64;
    let jets: Vec<(f64, CurveJet)> = (0..CHECK_SAMPLES)
        .map(|i| {
            let t = i as f64 * h;
            (t, series.jet(t))
        })
        .collect();

    let max_speed = jets.iter().map(|(_, j)| j.speed()).fold(0.0, f64::max);
    if let Some((t, j)) = jets
        .iter()
        .find(|(_, j)| j.speed() <= 1e-9 * max_speed.max(f64::MIN_POSITIVE))
    {
        return Err(Error::Regularity {
            t: *t,
            speed: j.speed(),
        });
    }

    let (mut t_neg, mut t_pos) = (None, None);
    for (t, j) in &jets {
        let k = j.curvature();
        if k <= 0.0 && t_neg.is_none() {
            t_neg = Some(*t);
        }
        if k >= 0.0 && t_pos.is_none() {
            t_pos = Some(*t);
        }
    }
    let (series, orientation, convex) = match (t_neg, t_pos) {
        (None, Some(_)) => (series, Orientation::AsGiven, true),
        (Some(_), None) => (series.reversed(), Orientation::Reversed, true),
        (Some(n), Some(p)) => {
            if options.strict_convex {
                return Err(Error::CurvatureSign { t_neg: n, t_pos: p });
            }
            (series, Orientation::AsGiven, false)
        }
        (None, None) => unreachable!("curvature samples are never NaN on a regular curve"),
    };
    let length = jets.iter().map(|(_, j)| j.speed()).sum::<f64>() * h;
    Ok(ClosedCurve {
        spec: spec.clone(),
        series,
        length,
        orientation,
        strict_convex: convex,
    })
}

impl ClosedCurve {
    pub fn new(spec: &CurveSpec) -> Result<Self> {
        make_curve(spec, CurveOptions::default())
    }

    /// Construction with k > 0 enforced.
    pub fn strict(spec: &CurveSpec) -> Result<Self> {
        make_curve(
            spec,
            CurveOptions {
                strict_convex: true,
            },
        )
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    /// Coefficients after orientation normalisation.
    pub fn series(&self) -> &FourierSeries {
        &self.series
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// True when k > 0 at every construction sample.
    pub fn is_strictly_convex(&self) -> bool {
        self.strict_convex
    }

    pub(crate) fn require_strict(&self) -> Result<()> {
        if self.strict_convex {
            return Ok(());
        }
        let k = |t: f64| self.curvature(t);
        let (t_neg, _) = roots::periodic_min(&k, 1024);
        let (t_pos, _) = roots::periodic_min(&|t| -k(t), 1024);
        Err(Error::CurvatureSign { t_neg, t_pos })
    }

    pub fn jet(&self, t: f64) -> CurveJet {
        self.series.jet(t)
    }

    pub fn position(&self, t: f64) -> Point2 {
        self.series.jet(t).position
    }

    pub fn velocity(&self, t: f64) -> Vector2<f64> {
        self.series.jet(t).d1
    }

    pub fn speed(&self, t: f64) -> f64 {
        self.series.jet(t).speed()
    }

    pub fn curvature(&self, t: f64) -> f64 {
        self.series.jet(t).curvature()
    }

    /// dk/dt.
    pub fn curvature_rate(&self, t: f64) -> f64 {
        self.series.jet(t).curvature_rate()
    }

    pub fn frame(&self, t: f64) -> Frame {
        let jet = self.series.jet(t);
        let tangent = jet.d1 / jet.speed();
        Frame {
            position: jet.position,
            tangent,
            normal: perp(&tangent),
            curvature: jet.curvature(),
        }
    }

    /// (1/2π) ∮ k ds by the trapezoidal rule.
    pub fn total_turning(&self) -> f64 {
        let h = TAU / CHECK_SAMPLES as f64;
        let sum: f64 = (0..CHECK_SAMPLES)
            .map(|i| {
                let j = self.jet(i as f64 * h);
                cross(&j.d1, &j.d2) / j.d1.norm_squared()
            })
            .sum();
        sum * h / TAU
    }

    /// Minimum and maximum of the curvature over the check grid.
    pub fn curvature_range(&self) -> (f64, f64) {
        let h = TAU / CHECK_SAMPLES as f64;
        (0..CHECK_SAMPLES)
            .map(|i| self.curvature(i as f64 * h))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| {
                (lo.min(k), hi.max(k))
            })
    }
}

/// Convenience for [`ClosedCurve::frame`].
pub fn curve_frame(curve: &ClosedCurve, t: f64) -> Frame {
    curve.frame(t)
}

/// Degree of the unit tangent, cross-checked against total curvature.
pub fn rotation_index(curve: &ClosedCurve) -> Result<i64> {
    let lp = CircleLoop::new(|t| curve.velocity(t)).with_samples(1024);
    let degree = degree::circle_degree(&lp)?;
    let turning = curve.total_turning();
    if (turning - degree as f64).abs() > 1e-6 {
        return Err(Error::DegreeResolution(format!(
            "tangent degree {degree} disagrees with total curvature {turning:.9}"
        )));
    }
    Ok(degree)
}

/// Vertices of a curve: zeros of dk/dt.
#[derive(Clone, Debug, PartialEq)]
pub struct Vertices {
    pub params: Vec<f64>,
}

impl Vertices {
    pub fn count(&self) -> usize {
        self.params.len()
    }
}

pub fn vertices(curve: &ClosedCurve) -> Result<Vertices> {
    let rate = |t: f64| curve.curvature_rate(t);
    let h = TAU / CHECK_SAMPLES as f64;
    let (max_rate, max_k) = (0..CHECK_SAMPLES)
        .map(|i| {
            let j = curve.jet(i as f64 * h);
            (j.curvature_rate().abs(), j.curvature().abs())
        })
        .fold((0.0f64, 0.0f64), |(r, k), (a, b)| (r.max(a), k.max(b)));
    if max_rate <= 1e-10 * (1.0 + max_k) {
        return Err(Error::CircleDegeneracy);
    }
    Ok(Vertices {
        params: roots::find_periodic_roots(&rate),
    })
}
