//! Cross-module checks linking the particle chain to its continuum limit.

use proptest::prelude::*;
use ringchain::chain_sim::{
    init_from_profile, limit_velocity, mean_velocity_closed_form, perturb, run_until, ChainParams,
    Forcing, InitScheme, Stepper,
};
use ringchain::continuum::ContinuumSolution;
use ringchain::fields::{empirical_distribution, limit_distribution};
use ringchain::spectral::ExactGaps;
use ringchain::Profile;

#[test]
fn velocity_sum_survives_collisions() {
    let p = Profile::uniform(1.0).unwrap();
    let s0 = perturb(
        &init_from_profile(&p, 24, InitScheme::Midpoint, 0.0)
            .unwrap()
            .state,
        0.9,
        1.5,
        2,
    )
    .unwrap();
    let forcing = Forcing::random_atoms(0.3, 3, 2.0, 0.2, 8);
    let params = ChainParams::new(1.0, 0.7, forcing.clone());
    let mut stepper = Stepper::new(params.clone(), 24).unwrap();
    let mut s = s0.clone();
    let log = run_until(&mut s, &mut stepper, params.default_dt(24), 6.0, 0, |_| {}).unwrap();
    assert!(!log.events.is_empty());
    let expect = mean_velocity_closed_form(s0.velocity_sum(), &forcing, 0.7, s.t, 24).unwrap();
    assert!(
        (s.velocity_sum() - expect).abs() < 1e-6,
        "{} vs {expect}",
        s.velocity_sum()
    );
    let w = limit_velocity(&forcing, 0.7, s.t).unwrap();
    assert!((s.velocity_sum() / 24.0 - w).abs() < 0.05);
}

#[test]
fn gaps_follow_the_continuum_field_at_third_order() {
    let p = Profile::cosine(1.0, 0.03).unwrap();
    let sol = ContinuumSolution::new(&p, 1.0, 0.4, 0.0, Forcing::default()).unwrap();
    let t = 1.3;
    let errs: Vec<f64> = [32usize, 64, 128]
        .iter()
        .map(|&n| {
            let init = init_from_profile(&p, n, InitScheme::Midpoint, 0.0).unwrap();
            let gaps = ExactGaps::new(&init.state, 1.0, 0.4).unwrap().gaps_at(t);
            let h = 1.0 / n as f64;
            gaps.iter()
                .enumerate()
                .map(|(k, r)| (r - h * sol.homogeneous_field(t, k as f64 * h).0).abs())
                .fold(0.0f64, f64::max)
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((6.0..10.0).contains(&ratio), "{errs:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn empirical_distribution_tracks_the_limit(amp in 0.0..0.04f64, t in 0.0..2.0f64, n in 64usize..200) {
        let p = Profile::cosine(1.0, amp).unwrap();
        let sol = ContinuumSolution::new(&p, 1.0, 0.0, 0.0, Forcing::default()).unwrap();
        let mut s = init_from_profile(&p, n, InitScheme::Exact, 0.0).unwrap().state;
        let params = ChainParams::new(1.0, 0.0, Forcing::default()).without_collisions();
        let mut stepper = Stepper::new(params.clone(), n).unwrap();
        run_until(&mut s, &mut stepper, params.default_dt(n), t, 0, |_| {}).unwrap();
        let emp = empirical_distribution(&s);
        for i in 0..20 {
            let y = (i as f64 + 0.37) / 20.0;
            let gap = (emp.eval(y) - limit_distribution(&sol, t, y).unwrap()).abs();
            prop_assert!(gap <= 2.0 / n as f64, "y = {y}: {gap}");
        }
    }
}
