//! Simulate a strongly perturbed, damped and driven chain with elastic
//! collisions until it relaxes to uniform spacing moving at `f/α`.
//!
//! cargo run --example chain_collisions

use ringchain::chain_sim::{
    init_from_profile, limit_velocity, perturb, run_to_relaxation, ChainParams, Forcing, InitScheme,
};
use ringchain::Profile;

fn main() -> ringchain::Result<()> {
    let n = 32;
    let p = Profile::uniform(1.0)?;
    let s0 = perturb(
        &init_from_profile(&p, n, InitScheme::Midpoint, 0.0)?.state,
        0.9,
        0.9,
        7,
    )?;
    let params = ChainParams::new(1.0, 1.0, Forcing::Constant { f: 1.0 });
    let dt = params.default_dt(n);
    let r = run_to_relaxation(&s0, &params, dt, 1e-3, 60.0)?;

    println!(
        "N = {n}, dt = {dt:.3e}, collisions = {}",
        r.log.events.len()
    );
    for e in r.log.events.iter().take(5) {
        println!(
            "  t = {:.5}: particles {} and {} exchange velocities",
            e.t,
            e.k,
            (e.k + 1) % n
        );
    }
    for e in r.log.energies.iter().step_by(r.log.energies.len() / 8) {
        println!("  t = {:6.2}  H0 = {:.4e}", e.t, e.h0);
    }
    let w = limit_velocity(&params.forcing, params.alpha, r.t_end)?;
    println!(
        "relaxed = {} at t = {:.2}: max|q-L/N|/(L/N) = {:.2e}, max|v-w| = {:.2e} (w = {w})",
        r.converged, r.t_end, r.final_deviation, r.velocity_error
    );
    println!("gap-sum drift {:.1e}", r.log.max_gap_sum_drift);
    Ok(())
}
