//! Root bracketing for smooth 2π-periodic functions.
//!
//! A uniform grid over one period is scanned for sign changes and every
//! bracket is polished by bisection. When two brackets fall in adjacent
//! cells the grid is doubled, up to [`MAX_SAMPLES`].

use std::f64::consts::TAU;

pub const DEFAULT_SAMPLES: usize = 4096;
pub const MAX_SAMPLES: usize = 16384;
pub const BISECTION_TOL: f64 = 1e-10;

/// Bisection on `[lo, hi]`, where `f(lo)` and `f(hi)` differ in sign.
pub fn bisect<F>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if (fmid < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Cell indices `i` such that `f` has a root in `[t_i, t_{i+1})` on an
/// `n`-point grid. A grid value that is exactly zero claims its own cell.
fn bracket_cells(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let a = values[i];
            let b = values[(i + 1) % n];
            a == 0.0 || (a * b < 0.0)
        })
        .collect()
}

fn has_adjacent(cells: &[usize], n: usize) -> bool {
    if cells.len() < 2 {
        return false;
    }
    let adjacent = cells.windows(2).any(|w| w[1] - w[0] <= 1);
    adjacent || (cells[0] + n - cells[cells.len() - 1] <= 1)
}

/// Result of a periodic root scan.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicRoots {
    /// Roots in `[0, 2π)`, ascending.
    pub roots: Vec<f64>,
    /// Grid size that was finally used.
    pub samples: usize,
}

/// All sign-changing roots of a 2π-periodic `f` in `[0, 2π)`.
///
/// Starts at `samples` grid points and doubles while two roots share
/// neighbouring cells, never beyond `max_samples`.
pub fn periodic_roots<F>(f: &F, samples: usize, max_samples: usize, tol: f64) -> PeriodicRoots
where
    F: Fn(f64) -> f64,
{
    let mut n = samples.max(8);
    loop {
        let h = TAU / n as f64;
        let values: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
        let cells = bracket_cells(&values);
        if !has_adjacent(&cells, n) || n * 2 > max_samples.max(samples) {
            let mut roots: Vec<f64> = cells
                .iter()
                .map(|&i| {
                    let lo = i as f64 * h;
                    if values[i] == 0.0 {
                        lo
                    } else {
                        bisect(f, lo, lo + h, tol)
                    }
                })
                .map(|t| if t >= TAU { t - TAU } else { t })
                .collect();
            roots.sort_by(f64::total_cmp);
            return PeriodicRoots { roots, samples: n };
        }
        n *= 2;
    }
}

/// [`periodic_roots`] with the default resolution policy.
pub fn find_periodic_roots<F>(f: &F) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    periodic_roots(f, DEFAULT_SAMPLES, MAX_SAMPLES, BISECTION_TOL).roots
}

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
pub fn golden_min<F>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Global minimum of a 2π-periodic function: grid scan, then golden-section
/// refinement around every discrete local minimum.
pub fn periodic_min<F>(f: &F, samples: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let n = samples.max(8);
    let h = TAU / n as f64;
    let values: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
    let mut best = (0.0, f64::INFINITY);
    for i in 0..n {
        let prev = values[(i + n - 1) % n];
        let next = values[(i + 1) % n];
        if values[i] <= prev && values[i] <= next {
            let t0 = i as f64 * h;
            let (t, v) = golden_min(f, t0 - h, t0 + h, 1e-13);
            let (t, v) = if values[i] < v {
                (t0, values[i])
            } else {
                (t, v)
            };
            if v < best.1 {
                best = (t.rem_euclid(TAU), v);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bisection_converges() {
        let r = bisect(&|x: f64| x * x - 2.0, 0.0, 2.0, 1e-12);
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn roots_of_sin_3t() {
        let r = find_periodic_roots(&|t: f64| (3.0 * t).sin());
        assert_eq!(r.len(), 6);
        for (k, t) in r.iter().enumerate() {
            assert!((t - k as f64 * PI / 3.0).abs() < 1e-9, "{t}");
        }
    }

    #[test]
    fn close_roots_trigger_refinement() {
        // two roots 1.6e-3 apart sit in adjacent cells at 4096 points
        let f = |t: f64| (t - 1.0) * (t - 1.0016) * (2.0 + t.cos());
        let g = |t: f64| f(t) * (TAU - t) * t;
        let r = periodic_roots(&g, DEFAULT_SAMPLES, MAX_SAMPLES, BISECTION_TOL);
        assert!(r.samples > DEFAULT_SAMPLES);
        assert!(r.roots.iter().any(|t| (t - 1.0).abs() < 1e-9));
        assert!(r.roots.iter().any(|t| (t - 1.0016).abs() < 1e-9));
    }

    #[test]
    fn periodic_minimum() {
        let (t, v) = periodic_min(&|t: f64| -(t - 2.0).cos(), 512);
        assert!((t - 2.0).abs() < 1e-6);
        assert!((v + 1.0).abs() < 1e-12);
    }
}
