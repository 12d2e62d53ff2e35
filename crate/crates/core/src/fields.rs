//! Hydrodynamic fields on the circle `[0, L)`: distribution functions,
//! density, velocity, pressure, Euler residuals and the discrete force.
//!
//! Eulerian quantities are obtained by inverting the flow map `z ↦ G(t, z)`
//! and mapping the closed-form Lagrangian derivatives back through the chart.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::chain_sim::ChainState;
use crate::continuum::{ContinuumSolution, FlowJet};
use crate::error::{invalid, Error, Result};
use crate::quad::{central_diff, solve_increasing};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub t: f64,
    pub y: f64,
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerResiduals {
    pub continuity: f64,
    pub momentum: f64,
    pub lagr_continuity: f64,
    pub lagr_momentum: f64,
    /// Difference step used.
    pub h: f64,
}

/// `F^{(N)}(t, y) = #{k : π(x_k) ≤ y} / N`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution {
    length: f64,
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn eval(&self, y: f64) -> f64 {
        let count = self.sorted.partition_point(|&p| p <= y);
        count as f64 / self.sorted.len() as f64
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Wrapped positions in increasing order; the jump locations.
    pub fn jumps(&self) -> &[f64] {
        &self.sorted
    }
}

pub fn empirical_distribution(s: &ChainState) -> EmpiricalDistribution {
    let mut sorted: Vec<f64> = (0..s.n()).map(|k| s.wrapped(k)).collect();
    sorted.sort_by(f64::total_cmp);
    EmpiricalDistribution {
        length: s.length,
        sorted,
    }
}

/// Material labels `(z_y, z₀)` with `π(G(t, z₀)) = 0`, `z₀ ∈ [0, L)`,
/// `π(G(t, z_y)) = π(y)` and `z_y ∈ [z₀, z₀ + L)`.
fn locate(sol: &ContinuumSolution, t: f64, y: f64) -> Result<(f64, f64)> {
    let check = sol.diffeomorphism_check(t);
    if !(check.min_gz > 0.0) {
        return Err(Error::NotDiffeomorphic {
            t,
            min_gz: check.min_gz,
        });
    }
    let l = sol.length();
    let g = |z: f64| sol.g(t, z);
    let gz = |z: f64| sol.g_z(t, z);
    let base = (g(0.0) / l).ceil() * l;
    // brackets are padded by a period so rounding at the ends cannot exclude
    // the root; monotonicity keeps it unique
    let solve = |target: f64, lo: f64, hi: f64| -> Result<f64> {
        if !(g(lo) <= target && target <= g(hi)) {
            return Err(Error::Inversion(format!(
                "target {target} outside [{}, {}]",
                g(lo),
                g(hi)
            )));
        }
        let guess = lo + (target - g(lo)) / (g(hi) - g(lo)) * (hi - lo);
        let z = solve_increasing(g, gz, target, lo, hi, guess);
        let miss = (g(z) - target).abs();
        if miss > 1e-11 * (1.0 + target.abs()) {
            return Err(Error::Inversion(format!("residual {miss:e} at z = {z}")));
        }
        Ok(z)
    };
    let z0 = solve(base, -l, l)?;
    let z = solve(base + y.rem_euclid(l), z0 - 0.5 * l, z0 + 1.5 * l)?;
    Ok((z.max(z0), z0))
}

/// `F(t, y)`: fraction of material between the origin of the circle and `y`.
pub fn limit_distribution(sol: &ContinuumSolution, t: f64, y: f64) -> Result<f64> {
    let (z, z0) = locate(sol, t, y)?;
    Ok((z - z0) / sol.length())
}

/// All Eulerian fields and their first derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerianJet {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
    pub rho_t: f64,
    pub rho_y: f64,
    pub u_t: f64,
    pub u_y: f64,
    pub p_y: f64,
    /// Lagrangian label of the point.
    pub z: f64,
}

fn from_jet(j: &FlowJet, l: f64, omega1: f64, z: f64) -> EulerianJet {
    let w2 = omega1 * omega1;
    let rho = 1.0 / (l * j.g_z);
    let rho_y = -j.g_zz / (l * j.g_z.powi(3));
    EulerianJet {
        rho,
        u: j.g_t,
        p: w2 - w2 / rho,
        rho_t: -(j.g_tz - j.g_zz * j.g_t / j.g_z) / (l * j.g_z * j.g_z),
        rho_y,
        u_t: j.g_tt - j.g_tz * j.g_t / j.g_z,
        u_y: j.g_tz / j.g_z,
        p_y: w2 * rho_y / (rho * rho),
        z,
    }
}

pub fn eulerian_jet(sol: &ContinuumSolution, t: f64, y: f64) -> Result<EulerianJet> {
    let (z, _) = locate(sol, t, y)?;
    Ok(from_jet(&sol.jet(t, z), sol.length(), sol.omega1, z))
}

pub fn density_velocity(sol: &ContinuumSolution, t: f64, y: f64) -> Result<(f64, f64)> {
    let e = eulerian_jet(sol, t, y)?;
    if !(e.rho > 0.0) {
        return Err(Error::NotDiffeomorphic {
            t,
            min_gz: 1.0 / (sol.length() * e.rho),
        });
    }
    Ok((e.rho, e.u))
}

/// `p = ω₁² - ω₁²/ρ`.
pub fn pressure(rho: f64, omega1: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(invalid("rho", "density must be positive"));
    }
    let w2 = omega1 * omega1;
    Ok(w2 - w2 / rho)
}

pub fn field_sample(sol: &ContinuumSolution, t: f64, y: f64) -> Result<FieldSample> {
    let (rho, u) = density_velocity(sol, t, y)?;
    Ok(FieldSample {
        t,
        y,
        rho,
        u,
        p: pressure(rho, sol.omega1)?,
    })
}

/// Euler residuals by fourth-order differences of the inverted fields, and
/// the Lagrangian-chart residuals with `ρ̂ = 1/G_z`, `û = G_t`,
/// `p̂ = -ω₁²G_z + ω₁²`.
pub fn euler_residuals(sol: &ContinuumSolution, t: f64, y: f64, h: f64) -> Result<EulerResiduals> {
    if !(t >= 2.0 * h && h > 0.0) {
        return Err(invalid("t", "must be at least twice the difference step"));
    }
    let w2 = sol.omega1 * sol.omega1;
    let f = sol.forcing.value(t);
    let at = |s: f64, yy: f64| field_sample(sol, s, yy);
    // probe every stencil point first so failures surface as errors
    for i in -2..=2 {
        let d = i as f64 * h;
        at(t + d, y)?;
        at(t, y + d)?;
    }
    let get = |s: f64, yy: f64| at(s, yy).expect("checked");
    let here = get(t, y);
    let rho_t = central_diff(|s| get(s, y).rho, t, h);
    let flux_y = central_diff(
        |yy| {
            let s = get(t, yy);
            s.rho * s.u
        },
        y,
        h,
    );
    let u_t = central_diff(|s| get(s, y).u, t, h);
    let u_y = central_diff(|yy| get(t, yy).u, y, h);
    let p_y = central_diff(|yy| get(t, yy).p, y, h);
    let continuity = (rho_t + flux_y).abs();
    let momentum = (u_t + here.u * u_y + sol.alpha * here.u - f + p_y / here.rho).abs();

    let (z, _) = locate(sol, t, y)?;
    let inv_rho_t = central_diff(|s| sol.g_z(s, z), t, h);
    let u_z = central_diff(|zz| sol.jet(t, zz).g_t, z, h);
    let uh_t = central_diff(|s| sol.jet(s, z).g_t, t, h);
    let p_z = central_diff(|zz| -w2 * sol.g_z(t, zz) + w2, z, h);
    let uh = sol.jet(t, z).g_t;
    Ok(EulerResiduals {
        continuity,
        momentum,
        lagr_continuity: (inv_rho_t - u_z).abs(),
        lagr_momentum: (uh_t + sol.alpha * uh - f + p_z).abs(),
        h,
    })
}

/// Closed-form Euler residuals from the chart derivatives.
pub fn euler_residuals_chart(sol: &ContinuumSolution, t: f64, y: f64) -> Result<(f64, f64)> {
    let e = eulerian_jet(sol, t, y)?;
    let f = sol.forcing.value(t);
    let continuity = e.rho_t + e.u * e.rho_y + e.rho * e.u_y;
    let momentum = e.u_t + e.u * e.u_y + sol.alpha * e.u - f + e.p_y / e.rho;
    Ok((continuity.abs(), momentum.abs()))
}

/// `-p_y/ρ`, the continuum force per unit mass.
pub fn force_limit(sol: &ContinuumSolution, t: f64, y: f64) -> Result<f64> {
    let e = eulerian_jet(sol, t, y)?;
    Ok(-e.p_y / e.rho)
}

/// The three equivalent forms `-ω₁²ρ_y/ρ³`, `(1/ρ) d/dy(ω₁²/ρ)`, `-p_y/ρ`,
/// the last two by differences with step `h`.
pub fn force_forms(sol: &ContinuumSolution, t: f64, y: f64, h: f64) -> Result<[f64; 3]> {
    let w2 = sol.omega1 * sol.omega1;
    let e = eulerian_jet(sol, t, y)?;
    for i in -2..=2 {
        field_sample(sol, t, y + i as f64 * h)?;
    }
    let get = |yy: f64| field_sample(sol, t, yy).expect("checked");
    let d_inv = central_diff(|yy| w2 / get(yy).rho, y, h);
    let d_p = central_diff(|yy| get(yy).p, y, h);
    Ok([-w2 * e.rho_y / e.rho.powi(3), d_inv / e.rho, -d_p / e.rho])
}

/// Index `k` with `π(x_k) ≤ π(y) < π(x_{k+1})` along the circle.
pub fn particle_at(s: &ChainState, y: f64) -> usize {
    let l = s.length;
    let y = y.rem_euclid(l);
    (0..s.n())
        .min_by(|&a, &b| {
            let da = (y - s.wrapped(a)).rem_euclid(l);
            let db = (y - s.wrapped(b)).rem_euclid(l);
            da.total_cmp(&db)
        })
        .expect("non-empty chain")
}

/// `R^{(N)}(t, y) = ω²(q_k - L/N) - ω²(q_{k-1} - L/N)` for `k = k(y, N, t)`.
pub fn discrete_force(s: &ChainState, y: f64, omega0: f64) -> f64 {
    let n = s.n();
    let k = particle_at(s, y);
    let w2 = (omega0 * n as f64).powi(2);
    let h = s.length / n as f64;
    w2 * ((s.gap(k) - h) - (s.gap((k + n - 1) % n) - h))
}

/// `t,y,rho,u,p,residual_continuity,residual_momentum` rows.
pub fn write_fields_csv<W: Write>(
    w: &mut W,
    sol: &ContinuumSolution,
    times: &[f64],
    ys: &[f64],
    h: f64,
) -> Result<()> {
    writeln!(w, "t,y,rho,u,p,residual_continuity,residual_momentum")?;
    for &t in times {
        for &y in ys {
            let s = field_sample(sol, t, y)?;
            let r = euler_residuals(sol, t, y, h)?;
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                t, y, s.rho, s.u, s.p, r.continuity, r.momentum
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_sim::Forcing;
    use crate::profiles::Profile;
    use crate::quad::gauss_kronrod;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn scenario(l: f64, alpha: f64, forcing: Forcing) -> ContinuumSolution {
        let p = Profile::new(
            l,
            &[
                (1, Complex64::new(0.04, 0.01)),
                (2, Complex64::new(0.0, -0.015)),
            ],
            &[(1, Complex64::new(0.02, 0.0))],
        )
        .unwrap();
        ContinuumSolution::new(&p, 0.6, alpha, 0.25, forcing).unwrap()
    }

    #[test]
    fn empirical_count() {
        let s = ChainState::new(1.0, vec![0.1, 0.2, 0.6, 0.9], vec![0.0; 4], 0.0).unwrap();
        let f = empirical_distribution(&s);
        assert_eq!(f.eval(0.5), 0.5);
        assert_eq!(f.eval(0.6), 0.75);
        assert_eq!(f.eval(0.05), 0.0);
        assert_eq!(f.eval(1.0 - 1e-12), 1.0);
        // wrapped positions
        let s = ChainState::new(1.0, vec![0.7, 1.1, 1.5], vec![0.0; 3], 0.0).unwrap();
        assert!((empirical_distribution(&s).eval(0.2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identity_flow() {
        let p = Profile::uniform(2.0).unwrap();
        let sol = ContinuumSolution::new(&p, 1.0, 0.0, 0.0, Forcing::default()).unwrap();
        for &(t, y) in &[(0.0, 0.3), (2.0, 1.7)] {
            assert_abs_diff_eq!(
                limit_distribution(&sol, t, y).unwrap(),
                y / 2.0,
                epsilon = 1e-13
            );
            let (rho, u) = density_velocity(&sol, t, y).unwrap();
            assert_abs_diff_eq!(rho, 0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(u, 0.0, epsilon = 1e-14);
        }
        let r = euler_residuals(&sol, 1.0, 0.4, 1e-3).unwrap();
        assert!(r.continuity < 1e-12 && r.momentum < 1e-12 && r.lagr_momentum < 1e-12);
    }

    #[test]
    fn initial_distribution_and_density() {
        let sol = scenario(1.5, 0.3, Forcing::default());
        let p = &sol.profile;
        for &x in &[0.0, 0.4, 1.2] {
            assert_abs_diff_eq!(
                limit_distribution(&sol, 0.0, x).unwrap(),
                p.z_of_x(x) / 1.5,
                epsilon = 1e-12
            );
            let rho = density_velocity(&sol, 0.0, x).unwrap().0;
            assert_abs_diff_eq!(rho, 1.0 / (1.5 * p.x_at(p.z_of_x(x))), epsilon = 1e-12);
        }
    }

    #[test]
    fn density_normalised() {
        let sol = scenario(1.3, 0.5, Forcing::sine());
        for &t in &[0.0, 1.1, 4.0] {
            let q = gauss_kronrod(
                |y| density_velocity(&sol, t, y).unwrap().0,
                0.0,
                1.3,
                1e-10,
                0.0,
            )
            .unwrap();
            assert!((q.value - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn distribution_is_monotone() {
        let sol = scenario(1.0, 0.2, Forcing::cosine());
        let mut prev = -1.0;
        for i in 0..200 {
            let f = limit_distribution(&sol, 2.3, i as f64 / 200.0).unwrap();
            assert!(f > prev && (0.0..1.0).contains(&f));
            prev = f;
        }
    }

    #[test]
    fn pressure_law() {
        assert_eq!(pressure(1.0, 3.0).unwrap(), 0.0);
        assert_eq!(pressure(2.0, 1.0).unwrap(), 0.5);
        assert!((pressure(1e12, 2.0).unwrap() - 4.0).abs() < 1e-10);
        assert!(pressure(0.0, 1.0).is_err() && pressure(-1.0, 1.0).is_err());
    }

    #[test]
    fn residuals_small_at_unit_length() {
        let sol = scenario(1.0, 0.7, Forcing::sine());
        for &(t, y) in &[(0.5, 0.1), (2.0, 0.95), (3.3, 0.5)] {
            let r = euler_residuals(&sol, t, y, 1e-3).unwrap();
            assert!(
                r.continuity < 1e-8
                    && r.momentum < 1e-8
                    && r.lagr_continuity < 1e-8
                    && r.lagr_momentum < 1e-8,
                "{r:?}"
            );
            let (c, m) = euler_residuals_chart(&sol, t, y).unwrap();
            assert!(c < 1e-12 && m < 1e-11);
        }
    }

    #[test]
    fn residuals_converge_at_fourth_order() {
        let sol = scenario(1.0, 0.4, Forcing::cosine());
        let coarse = euler_residuals(&sol, 1.0, 0.3, 4e-2).unwrap();
        let fine = euler_residuals(&sol, 1.0, 0.3, 2e-2).unwrap();
        let ratio = coarse.momentum / fine.momentum;
        assert!((10.0..22.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn momentum_defect_scales_with_length_squared() {
        // the pressure force is L²ω₁²G_zz while the wave operator carries ω₁²
        let l = 1.7;
        let sol = scenario(l, 0.3, Forcing::default());
        let (t, y) = (1.2, 0.8);
        let e = eulerian_jet(&sol, t, y).unwrap();
        let j = sol.jet(t, e.z);
        let w2 = sol.omega1 * sol.omega1;
        assert_abs_diff_eq!(-e.p_y / e.rho, l * l * w2 * j.g_zz, epsilon = 1e-10);
        let (_, m) = euler_residuals_chart(&sol, t, y).unwrap();
        assert_abs_diff_eq!(m, ((l * l - 1.0) * w2 * j.g_zz).abs(), epsilon = 1e-10);
        // the Lagrangian form has no such factor
        let r = euler_residuals(&sol, t, y, 1e-3).unwrap();
        assert!(r.lagr_momentum < 1e-8 && r.lagr_continuity < 1e-8);
    }

    #[test]
    fn lagrangian_density_consistency() {
        let sol = scenario(1.4, 0.5, Forcing::sine());
        for &(t, z) in &[(0.7, 0.2), (2.5, 1.1)] {
            let y = sol.g(t, z).rem_euclid(1.4);
            let rho = density_velocity(&sol, t, y).unwrap().0;
            assert_abs_diff_eq!(1.0 / sol.g_z(t, z), 1.4 * rho, epsilon = 1e-8);
        }
    }

    #[test]
    fn three_force_forms_agree() {
        let sol = scenario(1.0, 0.2, Forcing::default());
        let f = force_forms(&sol, 1.5, 0.35, 1e-3).unwrap();
        assert!(
            (f[0] - f[1]).abs() < 1e-6 && (f[0] - f[2]).abs() < 1e-6,
            "{f:?}"
        );
        assert_abs_diff_eq!(force_limit(&sol, 1.5, 0.35).unwrap(), f[0], epsilon = 1e-12);
    }

    #[test]
    fn equilibrium_velocity_follows_forcing() {
        let p = Profile::uniform(1.0).unwrap();
        let force = Forcing::Constant { f: 0.8 };
        let sol = ContinuumSolution::new(&p, 1.0, 0.5, 0.0, force.clone()).unwrap();
        for &t in &[0.5, 3.0] {
            let u0 = density_velocity(&sol, t, 0.1).unwrap().1;
            let u1 = density_velocity(&sol, t, 0.8).unwrap().1;
            assert_abs_diff_eq!(u0, u1, epsilon = 1e-14);
            assert_abs_diff_eq!(u0, force.damped_integral(0.5, t), epsilon = 1e-13);
        }
        let late = density_velocity(&sol, 60.0, 0.3).unwrap().1;
        let w = crate::chain_sim::limit_velocity(&force, 0.5, 60.0).unwrap();
        assert_abs_diff_eq!(late, w, epsilon = 1e-10);
    }

    #[test]
    fn folded_flow_is_reported() {
        let p = Profile::new(1.0, &[], &[(1, Complex64::new(0.0, 1.0))]).unwrap();
        let sol = ContinuumSolution::new(&p, 0.1, 0.0, 0.0, Forcing::default()).unwrap();
        let failures = (0..100)
            .filter(|&i| density_velocity(&sol, 1.0, i as f64 / 100.0).is_err())
            .count();
        assert!(failures > 0);
    }

    #[test]
    fn force_stencil() {
        assert_eq!(
            discrete_force(&ChainState::uniform(8, 1.0, 0.0), 0.3, 1.0),
            0.0
        );
        // gaps 0.2, 0.3, 0.5 with ω = 3
        let s = ChainState::new(1.0, vec![0.0, 0.2, 0.5], vec![0.0; 3], 0.0).unwrap();
        assert_eq!(particle_at(&s, 0.25), 1);
        assert_eq!(particle_at(&s, 0.2), 1);
        assert_eq!(particle_at(&s, 0.9), 2);
        let h = 1.0 / 3.0;
        let expect = 9.0 * ((0.3 - h) - (0.2 - h));
        assert!((discrete_force(&s, 0.25, 1.0) - expect).abs() < 1e-12);
        let expect = 9.0 * ((0.5 - h) - (0.3 - h));
        assert!((discrete_force(&s, 0.7, 1.0) - expect).abs() < 1e-12);
    }

    #[test]
    fn fields_csv_layout() {
        let sol = scenario(1.0, 0.1, Forcing::default());
        let mut buf = Vec::new();
        write_fields_csv(&mut buf, &sol, &[0.5], &[0.0, 0.5], 1e-3).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,y,rho,u,p,residual_continuity,residual_momentum\n"));
        assert_eq!(text.lines().count(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn empirical_is_counting_step(xs in proptest::collection::vec(0.0..1.0f64, 3..20), y in 0.0..1.0f64) {
            let mut xs = xs;
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            prop_assume!(xs.len() >= 2);
            let n = xs.len();
            let s = ChainState::new(1.0, xs, vec![0.0; n], 0.0).unwrap();
            let f = empirical_distribution(&s);
            let v = f.eval(y);
            prop_assert!((v * n as f64 - (v * n as f64).round()).abs() < 1e-12);
            prop_assert!(f.eval(y) <= f.eval((y + 0.1).min(0.999_999)) || y + 0.1 > 0.999_999);
        }

        #[test]
        fn rho_positive_in_tube(t in 0.0..6.0f64, y in 0.0..1.0f64) {
            let sol = scenario(1.0, 0.4, Forcing::sine());
            let s = field_sample(&sol, t, y).unwrap();
            prop_assert!(s.rho > 0.0);
            prop_assert!((s.p - pressure(s.rho, sol.omega1).unwrap()).abs() == 0.0);
        }
    }
}
