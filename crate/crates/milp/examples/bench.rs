//! Quick performance probe for the branch & bound on a commitment-shaped
//! instance. Run with `cargo run -p p2h-milp --release --example bench`.

use std::time::{Duration, Instant};

use p2h_milp::{chord_segments, solve, MilpParams, Model, RowSense};

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
                m.add_row(format!("xlo_{u}_{p}_{k}"), RowSense::Ge, 0.0, &[(xk, 1.0), (sk, -s.lo)]);
                m.add_row(format!("xhi_{u}_{p}_{k}"), RowSense::Le, 0.0, &[(xk, 1.0), (sk, -s.hi)]);
                seg_terms.push((sk, 1.0));
                x_terms.push((xk, 1.0));
            }
            m.add_row(format!("pick_{u}_{p}"), RowSense::Eq, 0.0, &seg_terms);
            let x = m.add_var(format!("x_{u}_{p}"), 0.0, 5.0, 0.0);
            let mut def = vec![(x, 1.0)];
            def.extend(x_terms.iter().map(|&(v, c)| (v, -c)));
            m.add_row(format!("xdef_{u}_{p}"), RowSense::Eq, 0.0, &def);
            delta[u].push(d);
            xs[u].push(x);
        }
    }
    for p in 0..t {
        let terms: Vec<_> = (0..b).map(|u| (xs[u][p], 1.0)).collect();
        m.add_row(format!("track_{p}"), RowSense::Eq, demand[p], &terms);
    }
    for u in 0..b {
        for p in 1..t {
            let z = m.add_var(format!("z_{u}_{p}"), 0.0, 1.0, -2.0);
            m.add_row(format!("zu_{u}_{p}"), RowSense::Le, 0.0, &[(delta[u][p - 1], 1.0), (delta[u][p], -1.0), (z, -1.0)]);
            m.add_row(format!("zd_{u}_{p}"), RowSense::Le, 0.0, &[(delta[u][p], 1.0), (delta[u][p - 1], -1.0), (z, -1.0)]);
        }
    }
    m
}

fn main() {
    // two sizes: the fleet shape used by the scheduler, then a larger one
    for (b, t, label) in [(4usize, 6usize, "4x6"), (10, 4, "10x4")] {
        let demand: Vec<f64> = (0..t)
            .map(|p| {
                let frac = 0.3 + 0.6 * ((p as f64 * 1.7).sin().abs());
                frac * (b as f64) * 5.0
            })
            .collect();
        let m = build(b, t, &demand);
        let params = MilpParams {
            max_nodes: 200_000,
            time_limit: Some(Duration::from_secs(60)),
            ..Default::default()
        };
        let t0 = Instant::now();
        let sol = solve(&m, &params);
        println!(
            "{label}: vars {} rows {} ints {} -> status {:?} obj {:.4} nodes {} lp_iters {} bound {:.4} gap {:.2e} in {:?}",
            m.num_vars(),
            m.num_rows(),
            m.integer_vars().len(),
            sol.status,
            sol.objective,
            sol.stats.nodes,
            sol.stats.lp_iterations,
            sol.stats.best_bound,
            sol.stats.gap,
            t0.elapsed()
        );
    }
}
