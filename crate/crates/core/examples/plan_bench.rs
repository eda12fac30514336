//! Times one scheduling solve at a few fleet sizes.

use std::time::Instant;

use p2h_core::fitting::{fit_plant, FitOptions};
use p2h_core::mpc::{MpcInput, MpcParams, Scheduler};
use p2h_core::plant::{PlantParams, StackState};

fn main() {
    for (n_stacks, horizon, frac) in [(2usize, 4usize, 0.655), (4, 4, 0.5), (10, 4, 0.6)] {
        let plant = PlantParams { n_stacks, ..PlantParams::default() };
        let art = fit_plant(&plant, &FitOptions::default(), 0);
        let sch = Scheduler::new(&plant, &art, MpcParams { horizon, ..Default::default() });
        let states: Vec<StackState> = (0..n_stacks)
            .map(|b| StackState {
                committed: b % 2 == 0,
                i: 0.0,
                t_c: if b % 2 == 0 { 75.0 } else { 25.0 },
                hto: 0.2 * b as f64 % 1.0,
            })
            .collect();
        let p_inst = frac * n_stacks as f64; // MW
        let t0 = Instant::now();
        let plan = sch.plan(&MpcInput {
            states,
            p_inst_mw: vec![p_inst, p_inst * 0.8, p_inst * 1.1, p_inst * 0.3],
            rest_hours: vec![0.0; n_stacks],
        });
        let dt = t0.elapsed();
        println!(
            "{n_stacks} stacks x {horizon} h @ {p_inst:.2} MW: {:?} obj {:.3} nodes {} lp_iters {} in {:.2?}",
            plan.status, plan.objective, plan.stats.nodes, plan.stats.lp_iterations, dt
        );
        let h = plan.first();
        let split: Vec<String> = h.stacks.iter().map(|s| format!("{:.2}", s.i_ka)).collect();
        println!(
            "  hour 0: P {:.3} MW, currents [{}] kA, pf_sum {:.3}, slack {:.4}",
            h.p_total_mw,
            split.join(", "),
            h.pf_sum,
            h.pf_slack
        );
    }
}
