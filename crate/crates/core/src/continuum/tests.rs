use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use super::*;

fn rich_profile(l: f64) -> Profile {
    Profile::new(
        l,
        &[
            (1, Complex64::new(0.05, -0.02)),
            (3, Complex64::new(0.0, 0.01)),
        ],
        &[
            (1, Complex64::new(0.0, 0.03)),
            (2, Complex64::new(-0.02, 0.01)),
        ],
    )
    .unwrap()
}

fn damped(alpha: f64, forcing: Forcing) -> ContinuumSolution {
    ContinuumSolution::new(&rich_profile(1.0), 0.7, alpha, 0.3, forcing).unwrap()
}

#[test]
fn rejects_bad_parameters() {
    let p = Profile::uniform(1.0).unwrap();
    assert!(ContinuumSolution::new(&p, 0.0, 0.1, 0.0, Forcing::default()).is_err());
    assert!(ContinuumSolution::new(&p, 1.0, -0.1, 0.0, Forcing::default()).is_err());
}

#[test]
fn initial_conditions() {
    let s = damped(0.4, Forcing::cosine());
    for i in 0..20 {
        let z = -0.3 + 0.11 * i as f64;
        let j = s.jet(0.0, z);
        assert_abs_diff_eq!(j.g, s.phi(z), epsilon = 1e-13);
        assert_abs_diff_eq!(j.g_t, s.psi(z), epsilon = 1e-13);
        assert_abs_diff_eq!(j.g_z, s.profile.x_at(z), epsilon = 1e-13);
    }
}

#[test]
fn uniform_profile_boundary_closed_form() {
    // unit constant force, α = 1, rest: G(t, 0) = t - 1 + e^{-t}
    let p = Profile::uniform(1.0).unwrap();
    let s = ContinuumSolution::new(&p, 1.0, 1.0, 0.0, Forcing::Constant { f: 1.0 }).unwrap();
    for &t in &[0.0, 0.5, 2.0, 7.0] {
        let (g, gt) = s.boundary_trajectory(t);
        assert_abs_diff_eq!(g, t - 1.0 + (-t).exp(), epsilon = 1e-13);
        assert_abs_diff_eq!(gt, 1.0 - (-t).exp(), epsilon = 1e-13);
    }
    // undamped: G(t, 0) = v t + t²/2
    let s = ContinuumSolution::new(&p, 1.0, 0.0, 0.5, Forcing::Constant { f: 1.0 }).unwrap();
    assert_abs_diff_eq!(s.boundary_trajectory(3.0).0, 1.5 + 4.5, epsilon = 1e-12);
}

#[test]
fn boundary_matches_quadrature() {
    for &alpha in &[0.0, 0.3, 2.0 * 2.0 * std::f64::consts::PI * 0.7, 20.0] {
        for forcing in [
            Forcing::default(),
            Forcing::sine(),
            Forcing::random_atoms(0.2, 3, 2.0, 0.1, 7),
        ] {
            let s = damped(alpha, forcing);
            for &t in &[0.4, 1.7, 3.0] {
                let exact = s.boundary_trajectory(t).0;
                let q = s.boundary_trajectory_quadrature(t).unwrap();
                assert!(
                    (exact - q).abs() < 1e-9,
                    "alpha {alpha} t {t}: {exact} vs {q}"
                );
            }
        }
    }
}

#[test]
fn boundary_ode() {
    // G''(t,0) + αG'(t,0) = ω₁² r_z(t,0) + f(t)
    let s = damped(0.6, Forcing::cosine());
    for &t in &[0.3, 1.1, 2.5] {
        let j = s.jet(t, 0.0);
        let lhs = j.g_tt + 0.6 * j.g_t;
        let rhs = s.omega1 * s.omega1 * j.g_zz + s.forcing.value(t);
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-11);
    }
}

#[test]
fn periodicity_in_z() {
    // G(t, z + L) = G(t, z) + L
    let p = rich_profile(2.5);
    let s = ContinuumSolution::new(&p, 0.4, 0.2, -0.1, Forcing::sine()).unwrap();
    for &(t, z) in &[(0.0, 0.1), (1.3, 0.7), (4.0, -0.2)] {
        assert_abs_diff_eq!(s.g(t, z + 2.5), s.g(t, z) + 2.5, epsilon = 1e-11);
        assert_abs_diff_eq!(s.g_z(t, z + 2.5), s.g_z(t, z), epsilon = 1e-12);
    }
}

#[test]
fn mean_gap_is_conserved() {
    // ∫_0^1 r(t, z) dz = 0 for all t
    let s = damped(0.5, Forcing::sine());
    for &t in &[0.7, 3.0] {
        let m = gauss_kronrod(|z| s.homogeneous_field(t, z).0, 0.0, 1.0, 1e-13, 0.0).unwrap();
        assert!(m.value.abs() < 1e-12);
    }
}

#[test]
fn dalembert_agrees_with_series() {
    let p = rich_profile(1.3);
    let s = ContinuumSolution::new(&p, 0.8, 0.0, 0.2, Forcing::default()).unwrap();
    for &(t, z) in &[(0.0, 0.2), (0.9, 0.5), (3.7, -1.4)] {
        assert_abs_diff_eq!(
            s.dalembert_solution(t, z).unwrap(),
            s.g(t, z),
            epsilon = 1e-11
        );
    }
    assert!(damped(0.1, Forcing::default())
        .dalembert_solution(1.0, 0.0)
        .is_err());
    assert!(damped(0.0, Forcing::sine())
        .dalembert_solution(1.0, 0.0)
        .is_err());
}

#[test]
fn bessel_agrees_with_series() {
    for &alpha in &[0.0, 0.8, 3.0] {
        for forcing in [Forcing::default(), Forcing::cosine()] {
            let s = damped(alpha, forcing);
            for &(t, z) in &[(0.0, 0.3), (0.6, 0.1), (1.5, 0.8)] {
                let b = bessel_solution(&s, t, z).unwrap();
                assert!(
                    (b - s.g(t, z)).abs() < 1e-8,
                    "alpha {alpha} t {t}: {b} vs {}",
                    s.g(t, z)
                );
            }
        }
    }
}

#[test]
fn wave_equation_residuals() {
    let p = rich_profile(1.0);
    for &alpha in &[0.0, 0.9] {
        let s = ContinuumSolution::new(&p, 0.5, alpha, 0.1, Forcing::sine()).unwrap();
        for &(t, z) in &[(0.5, 0.2), (2.0, 0.9)] {
            let r = s.inhomogeneous_wave_check(t, z, 1e-3).unwrap();
            assert!(r.lagrangian < 1e-6 && r.eulerian < 1e-6, "{r:?}");
        }
    }
    let s = damped(0.0, Forcing::default());
    assert!(s.inhomogeneous_wave_check(1e-3, 0.0, 1e-3).is_err());
}

#[test]
fn diffeomorphism_for_small_perturbation() {
    let s = damped(0.0, Forcing::default());
    let d = s.diffeomorphism_check(1.3);
    assert!(d.ok && d.min_gz > 0.5);
    // explicit form equals 2 G_z
    assert_abs_diff_eq!(d.explicit_min.unwrap(), 2.0 * d.min_gz, epsilon = 1e-9);
    assert!(damped(0.3, Forcing::default())
        .diffeomorphism_check(1.0)
        .explicit_min
        .is_none());
}

#[test]
fn large_velocity_perturbation_folds() {
    let p = Profile::new(1.0, &[], &[(1, Complex64::new(0.0, 1.0))]).unwrap();
    let s = ContinuumSolution::new(&p, 0.1, 0.0, 0.0, Forcing::default()).unwrap();
    let d = s.diffeomorphism_check(1.0);
    assert!(!d.ok && d.min_gz < 0.0);
}

#[test]
fn trajectory_through_initial_positions() {
    let p = rich_profile(1.0);
    let s = ContinuumSolution::new(&p, 0.5, 0.2, 0.0, Forcing::default()).unwrap();
    for &x in &[0.0, 0.25, 0.9] {
        assert_abs_diff_eq!(s.trajectory_y(0.0, x), x, epsilon = 1e-10);
    }
}

#[test]
fn field_csv_layout() {
    let s = damped(0.1, Forcing::default());
    let mut buf = Vec::new();
    s.write_field_csv(&mut buf, &[0.0, 1.0], &[0.0, 0.5, 1.0])
        .unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "t,z,G,G_t,G_z");
    assert_eq!(lines.len(), 7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sandwich_holds_inside_tube(amp in 0.0..0.3f64, t in 0.0..5.0f64, z1 in 0.0..1.0f64, dz in 0.0..1.0f64) {
        let p = Profile::cosine(1.0, amp).unwrap();
        let s = ContinuumSolution::new(&p, 0.6, 0.0, 0.0, Forcing::default()).unwrap();
        prop_assert!(s.monotone_sandwich(t, z1, z1 + dz, amp));
    }

    #[test]
    fn jet_matches_finite_differences(t in 0.1..3.0f64, z in 0.0..1.0f64, alpha in 0.0..4.0f64) {
        let s = damped(alpha, Forcing::sine());
        let j = s.jet(t, z);
        let h = 1e-3;
        prop_assert!((central_diff(|u| s.g(u, z), t, h) - j.g_t).abs() < 1e-8);
        prop_assert!((central_diff(|y| s.g(t, y), z, h) - j.g_z).abs() < 1e-8);
        prop_assert!((central_diff(|u| s.g_z(u, z), t, h) - j.g_tz).abs() < 1e-8);
        prop_assert!((central_diff2(|y| s.g(t, y), z, h) - j.g_zz).abs() < 1e-6);
    }
}
