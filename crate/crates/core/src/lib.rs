//! Normal maps of closed convex curves and surfaces, their critical points,
//! and the integer invariants (rotation indices, winding numbers, pole
//! indices, focal-sheet degrees) that tie them together.

pub mod battery;
pub mod degree;
pub mod error;
pub mod evolute;
pub mod field;
pub mod geom;
pub mod roots;
pub mod sphere;
pub mod surface;

pub use error::{Error, Result};
pub use evolute::{evolute, index_report, matrix_formula, Evolute, IndexReport};
pub use field::{critical_points, genericity, normal_map, CriticalPoint, Kind, Tolerances};
pub use geom::{make_curve, ClosedCurve, CurveOptions, CurveSpec, Point2};
