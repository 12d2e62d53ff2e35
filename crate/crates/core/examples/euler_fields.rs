//! Recover Eulerian density, velocity and pressure from the continuum flow,
//! check the Euler equations and compare the discrete force with -p_y/ρ.
//!
//! cargo run --example euler_fields

use ringchain::chain_sim::{
    init_from_profile, run_until, ChainParams, Forcing, InitScheme, Stepper,
};
use ringchain::continuum::ContinuumSolution;
use ringchain::fields::{
    discrete_force, empirical_distribution, euler_residuals, field_sample, force_limit,
    limit_distribution,
};
use ringchain::Profile;

fn main() -> ringchain::Result<()> {
    let p = Profile::cosine(1.0, 0.05)?;
    let sol = ContinuumSolution::new(&p, 1.0, 0.0, 0.0, Forcing::default())?;
    let t = 0.7;
    for y in [0.1, 0.35, 0.6, 0.85] {
        let f = field_sample(&sol, t, y)?;
        let r = euler_residuals(&sol, t, y, 1e-3)?;
        println!(
            "y = {y}: rho = {:.5}, u = {:+.5}, p = {:+.5}, residuals {:.1e} / {:.1e}",
            f.rho, f.u, f.p, r.continuity, r.momentum
        );
    }

    for n in [128, 256, 512] {
        let mut s = init_from_profile(&p, n, InitScheme::Midpoint, 0.0)?.state;
        let params = ChainParams::new(1.0, 0.0, Forcing::default()).without_collisions();
        let mut stepper = Stepper::new(params.clone(), n)?;
        run_until(&mut s, &mut stepper, params.default_dt(n), t, 0, |_| {})?;
        let ys: Vec<f64> = (0..40).map(|i| (i as f64 + 0.5) / 40.0).collect();
        let (mut force_err, mut dist_err) = (0.0f64, 0.0f64);
        let emp = empirical_distribution(&s);
        for &y in &ys {
            force_err +=
                (discrete_force(&s, y, 1.0) - force_limit(&sol, t, y)?).abs() / ys.len() as f64;
            dist_err = dist_err.max((emp.eval(y) - limit_distribution(&sol, t, y)?).abs());
        }
        println!("N = {n}: mean force error {force_err:.3e}, distribution error {dist_err:.3e}");
    }
    Ok(())
}
