//! Build initial profiles, sample them onto a chain and compute the
//! regularity constant γ that certifies a collision-free evolution.
//!
//! cargo run --example profile_regularity

use num_complex::Complex64;
use ringchain::chain_sim::{init_from_profile, InitScheme};
use ringchain::profiles::gamma_constant;
use ringchain::Profile;

fn main() -> ringchain::Result<()> {
    let bump = Profile::new(
        1.0,
        &[
            (1, Complex64::new(0.01, 0.0)),
            (2, Complex64::new(0.004, 0.0)),
        ],
        &[(1, Complex64::new(0.0, -0.005))],
    )?;
    for (name, p) in [
        ("cosine 0.01", Profile::cosine(1.0, 0.01)?),
        ("cosine 0.1", Profile::cosine(1.0, 0.1)?),
        ("bump", bump),
    ] {
        let (c1, c2) = p.fluctuation_constants();
        println!(
            "{name}: c1 = {c1:.5}, c2 = {c2:.5}, min X = {:.4}",
            p.sampled_min_x(4096)
        );
        for n in [64, 256, 1024] {
            for scheme in [InitScheme::Midpoint, InitScheme::Exact] {
                let init = init_from_profile(&p, n, scheme, 0.0)?;
                let r = gamma_constant(&p, 0.0, 1.0, init.big_c1, init.big_c2, 0.6)?;
                println!(
                    "  N = {n:4} {scheme:?}: C1 = {:.3e}, C2 = {:.3e}, gamma = {:.6}, gamma < 0.6: {}",
                    init.big_c1, init.big_c2, r.gamma, r.satisfied
                );
            }
        }
    }
    Ok(())
}
