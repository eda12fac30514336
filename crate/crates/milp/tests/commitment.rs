//! End-to-end exercise of the public API on a miniature unit-commitment
//! problem with the same row patterns the plant scheduler uses: on/off
//! binaries, segment-disaggregated output variables whose piecewise-linear
//! reward sits directly in the objective, an equality tracking row per
//! period, and switch penalties linking periods.

use p2h_milp::{
    chord_segments, solve, solve_lp, LpStatus, MilpParams, Model, RowSense, SimplexParams,
    SolveStatus,
};

/// Build a B-unit, T-period commitment model.
///
/// Each unit u in period t:
///   delta[u][t]    binary on/off
///   seg[u][t][k]   binary segment pick (sums to delta)
///   xk[u][t][k]    output inside segment k: xk in [lo_k*seg, hi_k*seg]
///   x[u][t]        total output = sum_k xk
/// Reward r(x) = 10x - 0.5 x^2 on [1, 5] enters the objective through the
/// chord coefficients a_k (on xk) and b_k (on seg_k), exact on each piece.
fn build(b: usize, t: usize, demand: &[f64]) -> Model {
    let mut m = Model::new();
    let segs = chord_segments(|x| 10.0 * x - 0.5 * x * x, 1.0, 5.0, 4);
    let mut delta = vec![vec![]; b];
    let mut xs = vec![vec![]; b];
    for u in 0..b {
        for p in 0..t {
            let d = m.add_bin(format!("d_{u}_{p}"), 0.0);
            m.set_priority(d, 10);
            let mut seg_terms = vec![(d, -1.0)];
            let mut x_terms = Vec::new();
            for (k, s) in segs.iter().enumerate() {
                let sk = m.add_bin(format!("s_{u}_{p}_{k}"), s.b);
                let xk = m.add_var(format!("xk_{u}_{p}_{k}"), 0.0, s.hi, s.a);
                // xk sits inside its segment exactly when the segment is on
                m.add_row(format!("xlo_{u}_{p}_{k}"), RowSense::Ge, 0.0, &[(xk, 1.0), (sk, -s.lo)]);
                m.add_row(format!("xhi_{u}_{p}_{k}"), RowSense::Le, 0.0, &[(xk, 1.0), (sk, -s.hi)]);
                seg_terms.push((sk, 1.0));
                x_terms.push((xk, 1.0));
            }
            // exactly delta segments active (0 when off, 1 when on)
            m.add_row(format!("pick_{u}_{p}"), RowSense::Eq, 0.0, &seg_terms);
            delta[u].push(d);
            // keep x as an explicit variable for the tracking rows
            let x = m.add_var(format!("x_{u}_{p}"), 0.0, 5.0, 0.0);
            let mut def = vec![(x, 1.0)];
            def.extend(x_terms.iter().map(|&(v, c)| (v, -c)));
            m.add_row(format!("xdef_{u}_{p}"), RowSense::Eq, 0.0, &def);
            xs[u].push(x);
        }
    }
    // fleet tracks demand exactly
    for p in 0..t {
        let terms: Vec<_> = (0..b).map(|u| (xs[u][p], 1.0)).collect();
        m.add_row(format!("track_{p}"), RowSense::Eq, demand[p], &terms);
    }
    // switch penalties
    for u in 0..b {
        for p in 1..t {
            let z = m.add_var(format!("z_{u}_{p}"), 0.0, 1.0, -2.0);
            m.add_row(format!("zu_{u}_{p}"), RowSense::Le, 0.0, &[(delta[u][p - 1], 1.0), (delta[u][p], -1.0), (z, -1.0)]);
            m.add_row(format!("zd_{u}_{p}"), RowSense::Le, 0.0, &[(delta[u][p], 1.0), (delta[u][p - 1], -1.0), (z, -1.0)]);
        }
    }
    m
}

#[test]
fn commitment_instance_solves_fast_and_feasible() {
    let demand = [4.0, 8.0, 14.0, 18.0, 12.0, 6.0];
    let m = build(4, 6, &demand);
    assert!(m.num_vars() > 150 && m.num_rows() > 150, "vars {} rows {}", m.num_vars(), m.num_rows());

    let t0 = std::time::Instant::now();
    let sol = solve(&m, &MilpParams::default());
    let dt = t0.elapsed();
    assert_eq!(sol.status, SolveStatus::Optimal, "status {:?}", sol.status);
    assert!(dt.as_secs_f64() < 10.0, "took {dt:?}");

    // solution must satisfy every row and be integral on the binaries
    assert!(m.max_violation(&sol.x) <= 1e-6, "violation {}", m.max_violation(&sol.x));
    for v in m.integer_vars() {
        let val = sol.x[v.index()];
        assert!((val - val.round()).abs() <= 1e-6);
    }
    // hand-computed optimum: all four units stay on (concavity favors equal
    // split, fixed reward favors spreading), no switches; chord reward of
    // x = D/4 per period: 38 + 72 + 115 + 139 + 102 + 55 = 521
    assert!((sol.objective - 521.0).abs() < 1e-6, "obj {}", sol.objective);

    // LP relaxation must be an upper bound and reasonably tight here
    let lp = solve_lp(&m, &SimplexParams::default());
    assert_eq!(lp.status, LpStatus::Optimal);
    assert!(lp.objective >= sol.objective - 1e-6, "lp {} < ip {}", lp.objective, sol.objective);
    assert!(lp.objective <= sol.objective + 30.0, "weak relaxation: {}", lp.objective);
}

#[test]
fn infeasible_demand_is_detected() {
    // 4 units x 5 max output = 20 < 26 demanded in period 2
    let demand = [4.0, 26.0, 6.0];
    let m = build(4, 3, &demand);
    let sol = solve(&m, &MilpParams::default());
    assert_eq!(sol.status, SolveStatus::Infeasible);
}
