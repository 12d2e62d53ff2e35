//! Continuum limit: the damped wave field `r(t, z)` of gap deviations and the
//! Lagrangian flow `G(t, z) = G(t, 0) + z + ∫_0^z r(t, ·)`.
//!
//! Profiles are finite Fourier series, so `r` is an exact finite sum of
//! damped modes `e^{ikz}` with `κ_n = 2π|n|ω₀`, and `G(t, 0)` is an exact
//! exponential polynomial.

mod bessel;

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain_sim::Forcing;
use crate::error::{invalid, Result};
use crate::exppoly::ExpPoly;
use crate::profiles::Profile;
use crate::quad::{central_diff, central_diff2, gauss_kronrod};
use crate::spectral::{ModeParams, Regime};

pub use bessel::{bessel_i, bessel_solution, BesselEval};

#[derive(Clone, Debug)]
struct Mode {
    /// Wavenumber `2πn/L`.
    k: f64,
    params: ModeParams,
    x: Complex64,
    v: Complex64,
}

/// Closed-form continuum solution for a profile, damping, base velocity and
/// forcing.
#[derive(Clone, Debug)]
pub struct ContinuumSolution {
    pub profile: Profile,
    pub alpha: f64,
    pub omega0: f64,
    /// `ω₁ = ω₀L`.
    pub omega1: f64,
    /// Velocity of the material point `z = 0` at `t = 0`.
    pub v: f64,
    pub forcing: Forcing,
    modes: Vec<Mode>,
    /// `G(t, 0)` and its time derivatives, precomputed once.
    boundary: [ExpPoly; 3],
}

/// `G` and its first and second partial derivatives at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowJet {
    pub g: f64,
    pub g_t: f64,
    pub g_z: f64,
    pub g_tt: f64,
    pub g_tz: f64,
    pub g_zz: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffeoCheck {
    pub ok: bool,
    pub min_gz: f64,
    /// Minimum of `X(z+ω₁t) + X(z-ω₁t) + (1/ω₁)∫_{z-ω₁t}^{z+ω₁t} V`, only
    /// available when `α = f = 0`.
    pub explicit_min: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveResiduals {
    /// `|G_tt + αG_t - ω₁²G_zz - f|`.
    pub lagrangian: f64,
    /// `|Y_tt - ω₁²(Y_xx X² + Y_x X') + αY_t - f|` at `x = x(z)`.
    pub eulerian: f64,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Fundamental solutions `A = a + αb/2` and `B = b` as exponential
/// polynomials.
fn mode_signals(m: &ModeParams) -> (ExpPoly, ExpPoly) {
    let k = 0.5 * m.alpha;
    let (mut a, mut b) = (ExpPoly::new(), ExpPoly::new());
    match m.regime {
        Regime::Underdamped => {
            let (p, q) = (Complex64::new(-k, m.d), Complex64::new(-k, -m.d));
            let i2d = Complex64::new(0.0, 2.0 * m.d);
            a.push(c(0.5), 0, p);
            a.push(c(0.5), 0, q);
            b.push(i2d.inv(), 0, p);
            b.push(-i2d.inv(), 0, q);
        }
        Regime::Overdamped => {
            let (p, q) = (c(m.d - k), c(-m.d - k));
            a.push(c(0.5), 0, p);
            a.push(c(0.5), 0, q);
            b.push(c(0.5 / m.d), 0, p);
            b.push(c(-0.5 / m.d), 0, q);
        }
        Regime::Critical => {
            a.push(c(1.0), 0, c(-k));
            b.push(c(1.0), 1, c(-k));
        }
    }
    let mut big_a = a;
    big_a.extend(&b.scaled(c(k)));
    (big_a, b)
}

impl ContinuumSolution {
    pub fn new(
        profile: &Profile,
        omega0: f64,
        alpha: f64,
        v: f64,
        forcing: Forcing,
    ) -> Result<Self> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(invalid("omega0", "must be positive"));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", "must be non-negative"));
        }
        forcing.validate()?;
        let l = profile.length();
        let omega1 = omega0 * l;
        let modes: Vec<Mode> = (1..=profile.n_max())
            .map(|n| {
                let k = 2.0 * std::f64::consts::PI * n as f64 / l;
                let kappa = k * omega1;
                let regime = Regime::classify(kappa, alpha);
                let d = match regime {
                    Regime::Critical => 0.0,
                    _ => (0.25 * alpha * alpha - kappa * kappa).abs().sqrt(),
                };
                Mode {
                    k,
                    params: ModeParams {
                        j: n,
                        omega: kappa,
                        d,
                        regime,
                        alpha,
                    },
                    x: profile.x_coeff(n as i64),
                    v: profile.v_coeff(n as i64),
                }
            })
            .collect();

        // h(s) = ω₁² r_z(s, 0) + f(s)
        let mut h = forcing.exp_poly();
        for m in &modes {
            let (a, b) = mode_signals(&m.params);
            let ik = Complex64::new(0.0, m.k);
            h.extend(&a.scaled(2.0 * omega1 * omega1 * ik * m.x));
            h.extend(&b.scaled(2.0 * omega1 * omega1 * ik * m.v));
        }
        // G'(t,0) = v e^{-αt} + e^{-αt} ∫_0^t e^{αs} h(s) ds
        let mut gp = h.shifted(alpha).integral().shifted(-alpha);
        gp.push(c(v), 0, c(-alpha));
        let g = gp.integral();
        let gpp = gp.derivative();
        Ok(ContinuumSolution {
            profile: profile.clone(),
            alpha,
            omega0,
            omega1,
            v,
            forcing,
            modes,
            boundary: [g, gp, gpp],
        })
    }

    pub fn length(&self) -> f64 {
        self.profile.length()
    }

    pub fn n_max(&self) -> usize {
        self.modes.len()
    }

    /// `∂_t^ot ∂_z^oz r(t, z)`; `oz = -1` gives `∫_0^z`, `oz = -2` the
    /// double antiderivative `∫_0^z ∫_0^y`.
    fn r_series(&self, t: f64, z: f64, ot: u32, oz: i32) -> f64 {
        let mut acc = 0.0;
        for m in &self.modes {
            let (a, b, ap, bp) = m.params.propagator(t);
            let (ta, tb) = match ot {
                0 => (a, b),
                1 => (ap, bp),
                _ => {
                    let kk = m.params.omega * m.params.omega;
                    (-self.alpha * ap - kk * a, -self.alpha * bp - kk * b)
                }
            };
            let coef = m.x * ta + m.v * tb;
            let ik = Complex64::new(0.0, m.k);
            let e = Complex64::from_polar(1.0, m.k * z);
            let space = match oz {
                -2 => (e - 1.0) / (ik * ik) - z / ik,
                -1 => (e - 1.0) / ik,
                d => ik.powi(d) * e,
            };
            acc += 2.0 * (coef * space).re;
        }
        acc
    }

    /// `(r, r_z, r_t)`.
    pub fn homogeneous_field(&self, t: f64, z: f64) -> (f64, f64, f64) {
        (
            self.r_series(t, z, 0, 0),
            self.r_series(t, z, 0, 1),
            self.r_series(t, z, 1, 0),
        )
    }

    /// `∂_t^ot ∂_z^oz r(t, z)` for `ot ≤ 2` and any `oz ≥ -2`.
    pub fn field_derivative(&self, t: f64, z: f64, ot: u32, oz: i32) -> f64 {
        self.r_series(t, z, ot.min(2), oz.max(-2))
    }

    /// `(G(t, 0), G_t(t, 0))`.
    pub fn boundary_trajectory(&self, t: f64) -> (f64, f64) {
        (self.boundary[0].eval(t).re, self.boundary[1].eval(t).re)
    }

    /// `G(t, 0)` by adaptive quadrature of the integral representation,
    /// independent of the exponential-polynomial form.
    pub fn boundary_trajectory_quadrature(&self, t: f64) -> Result<f64> {
        let w2 = self.omega1 * self.omega1;
        let a = self.alpha;
        let h = |s: f64| w2 * self.r_series(s, 0.0, 0, 1) + self.forcing.value(s);
        if a > 0.0 {
            let q = gauss_kronrod(
                |s| (1.0 - (-a * (t - s)).exp()) * h(s),
                0.0,
                t,
                1e-11,
                1e-12,
            )?;
            Ok((1.0 - (-a * t).exp()) / a * self.v + q.value / a)
        } else {
            let q = gauss_kronrod(|s| (t - s) * h(s), 0.0, t, 1e-11, 1e-12)?;
            Ok(self.v * t + q.value)
        }
    }

    /// `G(t, z)` with its first and second derivatives.
    pub fn jet(&self, t: f64, z: f64) -> FlowJet {
        let b: Vec<f64> = self.boundary.iter().map(|p| p.eval(t).re).collect();
        FlowJet {
            g: b[0] + z + self.r_series(t, z, 0, -1),
            g_t: b[1] + self.r_series(t, z, 1, -1),
            g_z: 1.0 + self.r_series(t, z, 0, 0),
            g_tt: b[2] + self.r_series(t, z, 2, -1),
            g_tz: self.r_series(t, z, 1, 0),
            g_zz: self.r_series(t, z, 0, 1),
        }
    }

    /// `(G, G_t, G_z, G_zz)`.
    pub fn lagrangian_solution(&self, t: f64, z: f64) -> (f64, f64, f64, f64) {
        let j = self.jet(t, z);
        (j.g, j.g_t, j.g_z, j.g_zz)
    }

    pub fn g(&self, t: f64, z: f64) -> f64 {
        self.boundary[0].eval(t).re + z + self.r_series(t, z, 0, -1)
    }

    /// `G_z = 1 + r`.
    pub fn g_z(&self, t: f64, z: f64) -> f64 {
        1.0 + self.r_series(t, z, 0, 0)
    }

    /// Initial position field `φ(z) = ∫_0^z X`.
    pub fn phi(&self, z: f64) -> f64 {
        self.profile.x_of_z(z)
    }

    /// Initial velocity field `ψ(z) = v + ∫_0^z V`.
    pub fn psi(&self, z: f64) -> f64 {
        self.v + self.profile.v_integral(z)
    }

    fn psi_antiderivative(&self, z: f64) -> f64 {
        self.v * z + self.profile.v_double_integral(z)
    }

    /// Travelling-wave solution, valid for `α = 0`, `f ≡ 0`.
    pub fn dalembert_solution(&self, t: f64, z: f64) -> Result<f64> {
        if self.alpha != 0.0 {
            return Err(invalid(
                "alpha",
                "the travelling-wave form needs zero damping",
            ));
        }
        if !self.forcing.is_zero() {
            return Err(invalid(
                "forcing",
                "the travelling-wave form needs zero forcing",
            ));
        }
        let ct = self.omega1 * t;
        Ok(0.5 * (self.phi(z + ct) + self.phi(z - ct))
            + (self.psi_antiderivative(z + ct) - self.psi_antiderivative(z - ct))
                / (2.0 * self.omega1))
    }

    /// `min_z G_z(t, z)` over 4096 grid points of one period.
    pub fn diffeomorphism_check(&self, t: f64) -> DiffeoCheck {
        const GRID: usize = 4096;
        let l = self.length();
        let h = l / GRID as f64;
        let coef: Vec<(f64, Complex64)> = self
            .modes
            .iter()
            .map(|m| {
                let (a, b, _, _) = m.params.propagator(t);
                (m.k, m.x * a + m.v * b)
            })
            .collect();
        let min_gz = (0..GRID)
            .map(|i| {
                let z = i as f64 * h;
                1.0 + coef
                    .iter()
                    .map(|&(k, c)| 2.0 * (c * Complex64::from_polar(1.0, k * z)).re)
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        let explicit_min = (self.alpha == 0.0 && self.forcing.is_zero()).then(|| {
            let ct = self.omega1 * t;
            let p = &self.profile;
            (0..GRID)
                .map(|i| {
                    let z = i as f64 * h;
                    p.x_at(z + ct)
                        + p.x_at(z - ct)
                        + (p.v_integral(z + ct) - p.v_integral(z - ct)) / self.omega1
                })
                .fold(f64::INFINITY, f64::min)
        });
        DiffeoCheck {
            ok: min_gz > 0.0 && explicit_min.is_none_or(|m| m > 0.0),
            min_gz,
            explicit_min,
        }
    }

    /// `L(1-δ)(z₂-z₁) ≤ G(t,z₂) - G(t,z₁) ≤ L(1+δ)(z₂-z₁)` for `z₁ < z₂`.
    pub fn monotone_sandwich(&self, t: f64, z1: f64, z2: f64, delta: f64) -> bool {
        let (a, b) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
        let dg = self.g(t, b) - self.g(t, a);
        let l = self.length();
        let slack = 1e-12 * (1.0 + dg.abs());
        l * (1.0 - delta) * (b - a) <= dg + slack && dg <= l * (1.0 + delta) * (b - a) + slack
    }

    /// `Y(t, x) = G(t, z(x))`.
    pub fn trajectory_y(&self, t: f64, x: f64) -> f64 {
        self.g(t, self.profile.z_of_x(x))
    }

    /// Finite-difference residuals of the wave equation in both charts.
    pub fn inhomogeneous_wave_check(&self, t: f64, z: f64, h: f64) -> Result<WaveResiduals> {
        if !(t > 2.0 * h) {
            return Err(invalid("t", "must exceed twice the difference step"));
        }
        let (a, w2) = (self.alpha, self.omega1 * self.omega1);
        let f = self.forcing.value(t);
        let g_tt = central_diff2(|s| self.g(s, z), t, h);
        let g_t = central_diff(|s| self.g(s, z), t, h);
        let g_zz = central_diff2(|y| self.g(t, y), z, h);
        let lagrangian = (g_tt + a * g_t - w2 * g_zz - f).abs();

        let x = self.phi(z);
        let p = &self.profile;
        let y = |s: f64, xx: f64| self.g(s, p.z_of_x(xx));
        let y_tt = central_diff2(|s| y(s, x), t, h);
        let y_t = central_diff(|s| y(s, x), t, h);
        let y_x = central_diff(|xx| y(t, xx), x, h);
        let y_xx = central_diff2(|xx| y(t, xx), x, h);
        let xz = p.x_at(z);
        let eulerian = (y_tt - w2 * (y_xx * xz * xz + y_x * p.x_deriv(1, z)) + a * y_t - f).abs();
        Ok(WaveResiduals {
            lagrangian,
            eulerian,
        })
    }

    /// `t,z,G,G_t,G_z` rows on the tensor grid.
    pub fn write_field_csv<W: Write>(&self, w: &mut W, times: &[f64], zs: &[f64]) -> Result<()> {
        writeln!(w, "t,z,G,G_t,G_z")?;
        for &t in times {
            for &z in zs {
                let j = self.jet(t, z);
                writeln!(w, "{},{},{},{},{}", t, z, j.g, j.g_t, j.g_z)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
