//! Evaluate the continuum flow map G(t, z), cross-check the series and
//! Bessel representations and the d'Alembert formula, and compare with a
//! finite chain.
//!
//! cargo run --example continuum_flow

use ringchain::chain_sim::{
    init_from_profile, run_until, ChainParams, Forcing, InitScheme, Stepper,
};
use ringchain::continuum::{bessel_solution, ContinuumSolution};
use ringchain::Profile;

fn main() -> ringchain::Result<()> {
    let p = Profile::cosine(1.0, 0.02)?;
    let sol = ContinuumSolution::new(&p, 1.0, 0.8, 0.1, Forcing::sine())?;
    for &(t, z) in &[(0.5, 0.1), (1.5, 0.4), (3.0, 0.9)] {
        let series = sol.g(t, z);
        let bessel = bessel_solution(&sol, t, z)?;
        let w = sol.inhomogeneous_wave_check(t, z, 1e-3)?;
        println!(
            "G({t}, {z}) = {series:.10}, Bessel route differs by {:.1e}, wave residual {:.1e}",
            (series - bessel).abs(),
            w.lagrangian
        );
    }

    let free = ContinuumSolution::new(&p, 1.0, 0.0, 0.0, Forcing::default())?;
    println!(
        "free flow vs d'Alembert: {:.1e}",
        (free.g(2.0, 0.3) - free.dalembert_solution(2.0, 0.3)?).abs()
    );
    println!("G_z > 0 at t = 3: {:?}", sol.diffeomorphism_check(3.0));

    let t_end = 2.0;
    for n in [64, 128, 256] {
        let mut s = init_from_profile(&p, n, InitScheme::Exact, sol.v)?.state;
        let params =
            ChainParams::new(sol.omega0, sol.alpha, sol.forcing.clone()).without_collisions();
        let mut stepper = Stepper::new(params.clone(), n)?;
        run_until(&mut s, &mut stepper, params.default_dt(n), t_end, 0, |_| {})?;
        let err = (0..n)
            .map(|k| (s.x[k] - sol.g(t_end, k as f64 / n as f64)).abs())
            .fold(0.0f64, f64::max);
        println!("N = {n}: max_k |x_k - G(t, k/N)| = {err:.3e}");
    }
    Ok(())
}
