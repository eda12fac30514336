//! Piecewise-linear approximation helpers and product linearizations.
//!
//! `Segment` is one linear piece `y = a*x + b` valid on `[lo, hi]`.
//! `chord_segments` interpolates the function at the breakpoints (exact at
//! segment ends, error of one sign inside for convex/concave functions);
//! `fit_segments` least-squares fits each piece instead, which roughly halves
//! the worst-case error of smooth functions at the cost of breakpoint
//! continuity.

use crate::model::{Model, RowSense, VarId};

/// One linear piece `y = a*x + b` on `x in [lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub a: f64,
    pub b: f64,
}

impl Segment {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.a * x + self.b
    }
}

/// Split `[lo, hi]` into `k` equal pieces and connect the function values at
/// the breakpoints (secant / chord interpolation).
pub fn chord_segments(f: impl Fn(f64) -> f64, lo: f64, hi: f64, k: usize) -> Vec<Segment> {
    assert!(k >= 1 && hi > lo);
    let step = (hi - lo) / k as f64;
    let mut out = Vec::with_capacity(k);
    let mut x0 = lo;
    let mut y0 = f(lo);
    for i in 0..k {
        let x1 = if i + 1 == k { hi } else { lo + (i + 1) as f64 * step };
        let y1 = f(x1);
        let a = (y1 - y0) / (x1 - x0);
        let b = y0 - a * x0;
        out.push(Segment { lo: x0, hi: x1, a, b });
        x0 = x1;
        y0 = y1;
    }
    out
}

/// Split `[lo, hi]` into `k` equal pieces and least-squares fit `a*x + b` on
/// each piece (33 samples per piece).
pub fn fit_segments(f: impl Fn(f64) -> f64, lo: f64, hi: f64, k: usize) -> Vec<Segment> {
    assert!(k >= 1 && hi > lo);
    let step = (hi - lo) / k as f64;
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let x0 = lo + i as f64 * step;
        let x1 = if i + 1 == k { hi } else { x0 + step };
        const S: usize = 33;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for s in 0..S {
            let x = x0 + (x1 - x0) * s as f64 / (S - 1) as f64;
            let y = f(x);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let n = S as f64;
        let det = n * sxx - sx * sx;
        let a = (n * sxy - sx * sy) / det;
        let b = (sy - a * sx) / n;
        out.push(Segment { lo: x0, hi: x1, a, b });
    }
    out
}

/// Worst absolute deviation of a segment set from the function it models,
/// sampled densely over the covered range.
pub fn max_abs_error(f: impl Fn(f64) -> f64, segs: &[Segment], samples: usize) -> f64 {
    let lo = segs.first().map(|s| s.lo).unwrap_or(0.0);
    let hi = segs.last().map(|s| s.hi).unwrap_or(0.0);
    let mut worst = 0.0f64;
    for i in 0..samples {
        let x = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let seg = segs.iter().find(|s| x <= s.hi).unwrap_or(segs.last().unwrap());
        worst = worst.max((f(x) - seg.eval(x)).abs());
    }
    worst
}

/// Add rows enforcing `w = d * y` where `d` is binary and `y in [ylo, yhi]`.
/// Returns the four row names' worth of constraints via the model.
pub fn linearize_product_bin_cont(
    m: &mut Model,
    name: &str,
    w: VarId,
    d: VarId,
    y: VarId,
    ylo: f64,
    yhi: f64,
) {
    // w <= yhi*d           (w = 0 when d = 0)
    m.add_row(format!("{name}_ub0"), RowSense::Le, 0.0, &[(w, 1.0), (d, -yhi)]);
    // w >= ylo*d
    m.add_row(format!("{name}_lb0"), RowSense::Ge, 0.0, &[(w, 1.0), (d, -ylo)]);
    // w <= y - ylo*(1-d)   (w = y when d = 1)
    m.add_row(format!("{name}_ub1"), RowSense::Le, -ylo, &[(w, 1.0), (y, -1.0), (d, -ylo)]);
    // w >= y - yhi*(1-d)
    m.add_row(format!("{name}_lb1"), RowSense::Ge, -yhi, &[(w, 1.0), (y, -1.0), (d, -yhi)]);
}

/// Add rows enforcing `w = a AND b` for binaries (`w` must be in [0, 1]).
pub fn linearize_product_bin_bin(m: &mut Model, name: &str, w: VarId, a: VarId, b: VarId) {
    m.add_row(format!("{name}_le_a"), RowSense::Le, 0.0, &[(w, 1.0), (a, -1.0)]);
    m.add_row(format!("{name}_le_b"), RowSense::Le, 0.0, &[(w, 1.0), (b, -1.0)]);
    m.add_row(format!("{name}_ge"), RowSense::Ge, -1.0, &[(w, 1.0), (a, -1.0), (b, -1.0)]);
}

// ==================================================================
// tests
// ==================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;
    use crate::solver::{solve, MilpParams, SolveStatus};

    #[test]
    fn chords_are_exact_at_breakpoints() {
        let f = |x: f64| x * x;
        let segs = chord_segments(f, 0.0, 4.0, 4);
        assert_eq!(segs.len(), 4);
        for s in &segs {
            assert!((s.eval(s.lo) - f(s.lo)).abs() < 1e-12);
            assert!((s.eval(s.hi) - f(s.hi)).abs() < 1e-12);
        }
        // max chord error of x^2 over a width-1 piece is 1/4 at the midpoint
        let err = max_abs_error(f, &segs, 1001);
        assert!((err - 0.25).abs() < 1e-6, "err {err}");
    }

    #[test]
    fn least_squares_beats_chords_inside() {
        let f = |x: f64| (1.0 + x).ln();
        let chord = max_abs_error(f, &chord_segments(f, 0.0, 5.0, 3), 2001);
        let fitted = max_abs_error(f, &fit_segments(f, 0.0, 5.0, 3), 2001);
        assert!(fitted < chord, "fit {fitted} vs chord {chord}");
    }

    #[test]
    fn product_bin_cont_takes_correct_values() {
        // maximize w) with y fixed by an equality: w must equal d*y
        for (dv, yv) in [(0.0, 2.5), (1.0, 2.5), (1.0, -1.0), (0.0, -1.0)] {
            let mut m = Model::new();
            let w = m.add_var("w", -10.0, 10.0, 1.0);
            let d = m.add_bin("d", 0.0);
            let y = m.add_var("y", -3.0, 3.0, 0.0);
            m.add_row("fix_y", RowSense::Eq, yv, &[(y, 1.0)]);
            m.add_row("fix_d", RowSense::Eq, dv, &[(d, 1.0)]);
            linearize_product_bin_cont(&mut m, "w_dy", w, d, y, -3.0, 3.0);
            // maximize +w and -w to pin both sides
            let hi = solve(&m, &MilpParams::default());
            assert_eq!(hi.status, SolveStatus::Optimal);
            assert!((hi.objective - dv * yv).abs() < 1e-7, "d={dv} y={yv} got {}", hi.objective);
        }
    }

    #[test]
    fn product_bin_bin_is_logical_and() {
        for (av, bv) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            let mut m = Model::new();
            let w = m.add_var("w", 0.0, 1.0, 1.0);
            let a = m.add_bin("a", 0.0);
            let b = m.add_bin("b", 0.0);
            m.add_row("fa", RowSense::Eq, av, &[(a, 1.0)]);
            m.add_row("fb", RowSense::Eq, bv, &[(b, 1.0)]);
            linearize_product_bin_bin(&mut m, "w_ab", w, a, b);
            let sol = solve(&m, &MilpParams::default());
            assert_eq!(sol.status, SolveStatus::Optimal);
            assert!((sol.objective - av * bv).abs() < 1e-7);
        }
    }
}
