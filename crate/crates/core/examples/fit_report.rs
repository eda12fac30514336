//! Prints a summary of the fitted surrogate artifact for the default plant.

use p2h_core::fitting::{fit_plant, FitOptions};
use p2h_core::plant::PlantParams;

fn main() {
    let plant = PlantParams::default();
    let opts = FitOptions::default();
    let art = fit_plant(&plant, &opts, 0);

    println!("envelope: I [{}, {}] A, T [{}, {}] C", art.i_min, art.i_max, art.t_min, art.t_max);
    println!(
        "grid: {} current segments x {} temperature bands",
        art.current_edges.len() - 1,
        art.temp_edges.len() - 1
    );
    println!("cubic pf map: coefs {:?}", art.pf_cubic.coefs);
    println!("  rmse {:.6}  max err {:.6}", art.pf_cubic.rmse, art.pf_cubic.max_err);
    println!("power planes: worst {:.1} W", art.p_plane_max_err);
    println!("pf planes:    worst {:.6}", art.pf_plane_max_err);
    println!("production chords: worst {:.4} kg/h", art.m_max_err);
    println!("aux-loss chords:   worst {:.1} W", art.aux_max_err);
    println!("dP/dI: [{:.1}, {:.1}] W/A", art.dp_di_min, art.dp_di_max);
    println!(
        "pf margin: {:.4} (p99 {:.4}, worst {:.4}) -> threshold {:.4}",
        art.pf_margin,
        art.margin_p99,
        art.margin_max,
        art.pf_eff(0.9)
    );
}
