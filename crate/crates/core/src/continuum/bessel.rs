//! Modified Bessel functions `I₀`, `I₁` and the Bessel-kernel solution of
//! `G_tt + αG_t = ω₁²G_zz + f`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ContinuumSolution;
use crate::error::{invalid, Result};
use crate::quad::gauss_kronrod;

/// `I₀(x)` and `I₁(x)` at one argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselEval {
    pub x: f64,
    pub i0: f64,
    pub i1: f64,
}

/// Power series `I₀ = Σ (x/2)^{2m}/(m!)²`, `I₁ = Σ (x/2)^{2m+1}/(m!(m+1)!)`,
/// summed until the next term drops below `1e-16` of the partial sum.
pub fn bessel_i(x: f64) -> BesselEval {
    let h = 0.5 * x;
    let h2 = h * h;
    let (mut t0, mut t1) = (1.0, h);
    let (mut s0, mut s1) = (t0, t1);
    let mut m = 0.0;
    loop {
        m += 1.0;
        t0 *= h2 / (m * m);
        t1 *= h2 / (m * (m + 1.0));
        s0 += t0;
        s1 += t1;
        if t0 < 1e-16 * s0 && t1 <= 1e-16 * s1.abs() {
            break;
        }
    }
    BesselEval { x, i0: s0, i1: s1 }
}

const TOL: f64 = 1e-11;

/// `∫_{z-ω₁s}^{z+ω₁s} I₀(k √(s² - (z-ξ)²/ω₁²)) dξ` by quadrature in `θ`.
pub(crate) fn forcing_kernel(k: f64, omega1: f64, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let q = gauss_kronrod(
        |th: f64| bessel_i(k * s * th.sin()).i0 * th.sin(),
        0.0,
        PI,
        TOL,
        0.0,
    )?;
    Ok(omega1 * s * q.value)
}

/// Position `G(t, z)` from the Bessel-kernel representation.
///
/// The interval `ξ ∈ [z - ω₁t, z + ω₁t]` is parametrized as
/// `ξ = z - ω₁t cos θ`, which removes the square-root endpoint behaviour.
pub fn bessel_solution(sol: &ContinuumSolution, t: f64, z: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid("t", "must be non-negative"));
    }
    let (alpha, c) = (sol.alpha, sol.omega1);
    let k = 0.5 * alpha;
    let p = &sol.profile;
    let phi = |xi: f64| p.x_of_z(xi);
    let psi = |xi: f64| sol.v + p.v_integral(xi);
    let damp = (-k * t).exp();

    let mut g = 0.5 * damp * (phi(z + c * t) + phi(z - c * t));
    if t == 0.0 {
        return Ok(g);
    }
    let ct = c * t;
    if alpha > 0.0 {
        let q = gauss_kronrod(
            |th: f64| {
                let (s, co) = th.sin_cos();
                let b = bessel_i(k * t * s);
                (ct * b.i1 + ct * s * b.i0) * phi(z - ct * co)
            },
            0.0,
            PI,
            TOL,
            0.0,
        )?;
        g += alpha * damp / (4.0 * c) * q.value;
    }
    let q = gauss_kronrod(
        |th: f64| {
            let (s, co) = th.sin_cos();
            bessel_i(k * t * s).i0 * psi(z - ct * co) * ct * s
        },
        0.0,
        PI,
        TOL,
        0.0,
    )?;
    g += damp / (2.0 * c) * q.value;

    if !sol.forcing.is_zero() {
        let f = &sol.forcing;
        let q = gauss_kronrod(
            |tau: f64| {
                let s = t - tau;
                let inner = forcing_kernel(k, c, s).unwrap_or(f64::NAN);
                (-k * s).exp() * f.value(tau) * inner
            },
            0.0,
            t,
            TOL,
            0.0,
        )?;
        g += q.value / (2.0 * c);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_values() {
        let b = bessel_i(0.0);
        assert_eq!((b.i0, b.i1), (1.0, 0.0));
        let b = bessel_i(1.0);
        // 30-term oracle
        let (mut s0, mut s1) = (0.0, 0.0);
        let mut fact = 1.0f64;
        for m in 0..30 {
            if m > 0 {
                fact *= m as f64;
            }
            s0 += 0.5f64.powi(2 * m) / (fact * fact);
            s1 += 0.5f64.powi(2 * m + 1) / (fact * fact * (m as f64 + 1.0));
        }
        assert!((b.i0 - s0).abs() < 1e-15 && (b.i1 - s1).abs() < 1e-15);
        assert!((b.i0 - 1.266_065_88).abs() < 1e-8 && (b.i1 - 0.565_159_10).abs() < 1e-8);
        let mut prev = 1.0;
        for i in 0..200 {
            let v = bessel_i(i as f64 * 0.1).i0;
            assert!(v >= prev && v >= 1.0);
            prev = v;
        }
    }

    #[test]
    fn derivative_relations() {
        // I₀' = I₁ and (x I₁)' = x I₀
        for &x in &[0.3, 2.0, 7.5] {
            let d0 = crate::quad::central_diff(|s| bessel_i(s).i0, x, 1e-3);
            assert!((d0 - bessel_i(x).i1).abs() < 1e-9 * (1.0 + d0.abs()));
            let d1 = crate::quad::central_diff(|s| s * bessel_i(s).i1, x, 1e-3);
            assert!((d1 - x * bessel_i(x).i0).abs() < 1e-9 * (1.0 + d1.abs()));
        }
    }

    #[test]
    fn forcing_kernel_closed_form() {
        for &(k, s) in &[(0.4, 1.3), (1.5, 2.0), (1e-9, 0.7)] {
            let q = forcing_kernel(k, 2.0, s).unwrap();
            let exact = 2.0 * 2.0 * (k * s).sinh() / k;
            assert!((q - exact).abs() < 1e-9 * exact, "{q} vs {exact}");
        }
    }
}
