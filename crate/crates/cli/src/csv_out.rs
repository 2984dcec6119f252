//! CSV tables with a fixed header per artifact. The header is written even
//! when there are no rows.

use std::io;

use normal_field::battery::BatteryReport;
use normal_field::evolute::IndexReport;
use normal_field::field::{CriticalPoint, FieldSample};
use normal_field::surface::{D2Type, SurfaceCriticalPoint, SurfaceIndexReport};
use normal_field::ClosedCurve;

pub const CRITICAL_POINTS_HEADER: [&str; 5] = ["t_star", "rho_star", "kind", "index", "fold_value"];
pub const INDEX_REPORT_HEADER: [&str; 10] = [
    "r_alpha",
    "r_beta",
    "nu",
    "i_N",
    "i_S",
    "n_p",
    "m_p",
    "N_p",
    "w_alpha_p",
    "w_beta_p",
];
pub const FIELD_SAMPLES_HEADER: [&str; 5] = ["t", "rho", "fx", "fy", "jacobian"];
pub const CURVE_SAMPLES_HEADER: [&str; 6] = ["t", "x", "y", "curvature", "evolute_x", "evolute_y"];
pub const SURFACE_POINTS_HEADER: [&str; 8] =
    ["x", "y", "z", "rho_star", "k1", "k2", "type", "index"];
pub const SURFACE_REPORT_HEADER: [&str; 8] = [
    "n_plus",
    "n_minus",
    "n_zero",
    "w_beta1_p",
    "w_beta2_p",
    "N_p",
    "d",
    "index_sum",
];
pub const BATTERY_HEADER: [&str; 15] = [
    "curve",
    "x",
    "y",
    "r_alpha",
    "r_beta",
    "nu",
    "i_N",
    "i_S",
    "n_p",
    "m_p",
    "N_p",
    "w_alpha_p",
    "w_beta_p",
    "critical_check",
    "quadrature",
];

fn writer<W: io::Write>(out: W, header: &[&str]) -> csv::Result<csv::Writer<W>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

fn opt(v: Option<i64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn d2_name(t: D2Type) -> &'static str {
    match t {
        D2Type::Maximum => "maximum",
        D2Type::Minimum => "minimum",
        D2Type::Saddle => "saddle",
    }
}

pub fn critical_points<W: io::Write>(out: W, points: &[CriticalPoint]) -> csv::Result<()> {
    let mut w = writer(out, &CRITICAL_POINTS_HEADER)?;
    for c in points {
        w.serialize((
            c.t_star,
            c.rho_star,
            c.kind.to_string(),
            c.index,
            c.fold_value,
        ))?;
    }
    w.flush()?;
    Ok(())
}

pub fn index_report<W: io::Write>(out: W, report: &IndexReport) -> csv::Result<()> {
    let mut w = writer(out, &INDEX_REPORT_HEADER)?;
    w.write_record(report.vector().map(opt))?;
    w.flush()?;
    Ok(())
}

pub fn field_samples<W: io::Write>(out: W, samples: &[FieldSample]) -> csv::Result<()> {
    let mut w = writer(out, &FIELD_SAMPLES_HEADER)?;
    for s in samples {
        w.serialize((s.t, s.rho, s.field[0], s.field[1], s.jacobian))?;
    }
    w.flush()?;
    Ok(())
}

pub fn curve_samples<W: io::Write>(out: W, curve: &ClosedCurve, samples: usize) -> csv::Result<()> {
    let mut w = writer(out, &CURVE_SAMPLES_HEADER)?;
    for i in 0..samples {
        let t = std::f64::consts::TAU * i as f64 / samples as f64;
        let f = curve.frame(t);
        let beta = f.position + f.normal / f.curvature;
        w.serialize((t, f.position.x, f.position.y, f.curvature, beta.x, beta.y))?;
    }
    w.flush()?;
    Ok(())
}

pub fn surface_points<W: io::Write>(out: W, points: &[SurfaceCriticalPoint]) -> csv::Result<()> {
    let mut w = writer(out, &SURFACE_POINTS_HEADER)?;
    for c in points {
        let [x, y, z] = c.position;
        w.serialize((x, y, z, c.rho_star, c.k1, c.k2, d2_name(c.d2_type), c.index))?;
    }
    w.flush()?;
    Ok(())
}

pub fn surface_report<W: io::Write>(out: W, r: &SurfaceIndexReport) -> csv::Result<()> {
    let mut w = writer(out, &SURFACE_REPORT_HEADER)?;
    w.serialize((
        r.n_plus,
        r.n_minus,
        r.n_zero,
        r.w_beta1_p,
        r.w_beta2_p,
        r.big_n_p,
        r.d,
        r.index_sum,
    ))?;
    w.flush()?;
    Ok(())
}

pub fn battery<W: io::Write>(out: W, report: &BatteryReport) -> csv::Result<()> {
    let mut w = writer(out, &BATTERY_HEADER)?;
    for case in &report.cases {
        let mut row = vec![
            case.curve.to_string(),
            case.point[0].to_string(),
            case.point[1].to_string(),
        ];
        row.extend(case.report.vector().map(opt));
        row.push(case.critical_check.holds().to_string());
        row.push(case.quadrature_identities.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use normal_field::{evolute, field, CurveSpec, Point2};

    fn ellipse() -> ClosedCurve {
        ClosedCurve::strict(&CurveSpec::ellipse(2.0, 1.0)).unwrap()
    }

    fn text(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn ellipse_critical_points_have_four_rows() {
        let cps = field::critical_points(&ellipse(), Point2::zeros()).unwrap();
        let s = text(|b| critical_points(b, &cps));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "t_star,rho_star,kind,index,fold_value");
        assert_eq!(lines.len(), 5);
        assert_eq!(
            lines.iter().filter(|l| l.contains(",saddle,-1,")).count(),
            2
        );
        assert_eq!(lines.iter().filter(|l| l.contains(",centre,1,")).count(), 2);
    }

    #[test]
    fn ellipse_index_row() {
        let r = evolute::index_report(&ellipse(), Point2::zeros()).unwrap();
        let s = text(|b| index_report(b, &r));
        assert_eq!(
            s,
            "r_alpha,r_beta,nu,i_N,i_S,n_p,m_p,N_p,w_alpha_p,w_beta_p\n1,3,4,2,0,2,0,4,1,-1\n"
        );
    }

    #[test]
    fn circle_row_leaves_nulls_empty() {
        let c = ClosedCurve::strict(&CurveSpec::circle(1.0, Point2::zeros())).unwrap();
        let r = evolute::index_report(&c, Point2::new(0.3, 0.1)).unwrap();
        let s = text(|b| index_report(b, &r));
        assert_eq!(s.lines().nth(1).unwrap(), "1,,,2,0,1,0,2,1,0");
    }

    #[test]
    fn empty_grid_is_header_only() {
        assert_eq!(text(|b| field_samples(b, &[])), "t,rho,fx,fy,jacobian\n");
        assert_eq!(
            text(|b| critical_points(b, &[])),
            "t_star,rho_star,kind,index,fold_value\n"
        );
        assert_eq!(
            text(|b| surface_points(b, &[])),
            "x,y,z,rho_star,k1,k2,type,index\n"
        );
    }
}
