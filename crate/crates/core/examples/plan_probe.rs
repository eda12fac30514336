//! Minimal scheduling-solve probe with a short time budget.

use std::time::Instant;

use p2h_core::fitting::{fit_plant, FitOptions};
use p2h_core::mpc::{MpcInput, MpcParams, Scheduler};
use p2h_core::plant::{PlantParams, StackState};

fn main() {
    let horizon: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let limit: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(5.0);
    let plant = PlantParams::default();
    let art = fit_plant(&plant, &FitOptions::default(), 0);
    let params = MpcParams { horizon, time_limit_s: limit, ..Default::default() };
    let sch = Scheduler::new(&plant, &art, params);
    let states = vec![
        StackState { committed: true, i: 0.0, t_c: 75.0, hto: 0.0 },
        StackState { committed: false, i: 0.0, t_c: 25.0, hto: 0.2 },
    ];
    let t0 = Instant::now();
    let plan = sch.plan(&MpcInput {
        states,
        p_inst_mw: vec![1.31, 1.05, 1.44, 0.39],
        rest_hours: vec![0.0, 0.0],
    });
    println!(
        "horizon {horizon}: {:?} obj {:.3} nodes {} abandoned {} lp_iters {} gap {:.4} wall {:.2?}",
        plan.status,
        plan.objective,
        plan.stats.nodes,
        plan.stats.abandoned,
        plan.stats.lp_iterations,
        plan.stats.gap,
        t0.elapsed()
    );
}
