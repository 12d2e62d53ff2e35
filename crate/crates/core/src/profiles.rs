//! Smooth periodic initial profiles `(X, V)` stored as finite Fourier series.
//!
//! Convention: `X(x) = Σ_{|n| ≤ n_max} x̂_n e^{2πinx/L}`, likewise for `V`.
//! `x̂_0 = 1` (unit mean) and `v̂_0 = 0`; coefficients are conjugate-symmetric
//! so both profiles are real.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::{adaptive_simpson, solve_increasing};

const SYMMETRY_TOL: f64 = 1e-12;

/// A periodic, positive gap-density profile `X` and gap-velocity profile `V`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileJson", into = "ProfileJson")]
pub struct Profile {
    length: f64,
    n_max: usize,
    x_hat: Vec<Complex64>,
    v_hat: Vec<Complex64>,
}

/// Wire format: `{"L": real, "x_hat": [[n, re, im], ...], "v_hat": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileJson {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(default)]
    pub x_hat: Vec<(i64, f64, f64)>,
    #[serde(default)]
    pub v_hat: Vec<(i64, f64, f64)>,
}

/// Which profile quantity to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileField {
    X,
    V,
    /// `X''`
    Xpp,
    /// `V''`
    Vpp,
}

/// Smoothness and discretization constants of an initial condition.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct RegularityReport {
    pub c1: f64,
    pub c2: f64,
    #[serde(rename = "C1")]
    pub big_c1: f64,
    #[serde(rename = "C2")]
    pub big_c2: f64,
    pub gamma: f64,
    pub delta: f64,
    pub satisfied: bool,
}

impl TryFrom<ProfileJson> for Profile {
    type Error = Error;

    fn try_from(j: ProfileJson) -> Result<Self> {
        let xs: Vec<_> = j
            .x_hat
            .iter()
            .map(|&(n, re, im)| (n, Complex64::new(re, im)))
            .collect();
        let vs: Vec<_> = j
            .v_hat
            .iter()
            .map(|&(n, re, im)| (n, Complex64::new(re, im)))
            .collect();
        Profile::new(j.length, &xs, &vs)
    }
}

impl From<Profile> for ProfileJson {
    fn from(p: Profile) -> Self {
        let dump = |c: &[Complex64]| {
            (-(p.n_max as i64)..=p.n_max as i64)
                .zip(c)
                .filter(|(_, c)| c.norm() > 0.0)
                .map(|(n, c)| (n, c.re, c.im))
                .collect()
        };
        ProfileJson {
            length: p.length,
            x_hat: dump(&p.x_hat),
            v_hat: dump(&p.v_hat),
        }
    }
}

fn fill_symmetric(
    name: &str,
    n_max: usize,
    entries: &[(i64, Complex64)],
    mean: f64,
) -> Result<Vec<Complex64>> {
    let mut out = vec![None; 2 * n_max + 1];
    for &(n, c) in entries {
        let idx = (n + n_max as i64) as usize;
        if out[idx].is_some() {
            return Err(Error::InvalidProfile(format!(
                "{name}: duplicate index {n}"
            )));
        }
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "{name}: non-finite coefficient {n}"
            )));
        }
        out[idx] = Some(c);
    }
    let zero = &mut out[n_max];
    match zero {
        Some(c) if (c.re - mean).abs() > SYMMETRY_TOL || c.im.abs() > SYMMETRY_TOL => {
            return Err(Error::InvalidProfile(format!(
                "{name}: mean must equal {mean}, got {c}"
            )));
        }
        _ => *zero = Some(Complex64::new(mean, 0.0)),
    }
    for n in 1..=n_max {
        let (lo, hi) = (n_max - n, n_max + n);
        match (out[lo], out[hi]) {
            (Some(a), Some(b)) => {
                if (a - b.conj()).norm() > SYMMETRY_TOL {
                    return Err(Error::InvalidProfile(format!(
                        "{name}: coefficients ±{n} are not conjugate ({a} vs {b})"
                    )));
                }
            }
            (Some(a), None) => out[hi] = Some(a.conj()),
            (None, Some(b)) => out[lo] = Some(b.conj()),
            (None, None) => {
                out[lo] = Some(Complex64::new(0.0, 0.0));
                out[hi] = Some(Complex64::new(0.0, 0.0));
            }
        }
    }
    Ok(out.into_iter().map(|c| c.expect("filled")).collect())
}

impl Profile {
    /// Build a profile from sparse coefficient lists.
    ///
    /// Missing conjugate partners are filled in; a missing zero mode is set to
    /// the required mean (1 for `X`, 0 for `V`).
    pub fn new(
        length: f64,
        x_coeffs: &[(i64, Complex64)],
        v_coeffs: &[(i64, Complex64)],
    ) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "L must be positive, got {length}"
            )));
        }
        let n_max = x_coeffs
            .iter()
            .chain(v_coeffs)
            .map(|(n, _)| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let p = Profile {
            length,
            n_max,
            x_hat: fill_symmetric("x_hat", n_max, x_coeffs, 1.0)?,
            v_hat: fill_symmetric("v_hat", n_max, v_coeffs, 0.0)?,
        };
        p.check_positive()?;
        Ok(p)
    }

    /// `X ≡ 1`, `V ≡ 0`.
    pub fn uniform(length: f64) -> Result<Self> {
        Self::new(length, &[], &[])
    }

    /// `X(x) = 1 + amp·cos(2πx/L)`, `V ≡ 0`.
    pub fn cosine(length: f64, amp: f64) -> Result<Self> {
        let half = Complex64::new(0.5 * amp, 0.0);
        Self::new(length, &[(1, half), (-1, half)], &[])
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Coefficient `x̂_n` (zero outside the stored range).
    pub fn x_coeff(&self, n: i64) -> Complex64 {
        self.coeff(&self.x_hat, n)
    }

    /// Coefficient `v̂_n` (zero outside the stored range).
    pub fn v_coeff(&self, n: i64) -> Complex64 {
        self.coeff(&self.v_hat, n)
    }

    fn coeff(&self, c: &[Complex64], n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.n_max {
            Complex64::new(0.0, 0.0)
        } else {
            c[(n + self.n_max as i64) as usize]
        }
    }

    fn wavenumber(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// `Σ c_n (ikn)^order e^{iknx}` for a conjugate-symmetric series.
    fn series(&self, c: &[Complex64], order: u32, x: f64) -> f64 {
        let k = self.wavenumber();
        let step = Complex64::from_polar(1.0, k * x);
        let mut phase = Complex64::new(1.0, 0.0);
        let mut acc = if order == 0 { c[self.n_max].re } else { 0.0 };
        for n in 1..=self.n_max {
            phase *= step;
            let factor = Complex64::new(0.0, k * n as f64).powu(order);
            acc += 2.0 * (c[self.n_max + n] * factor * phase).re;
        }
        acc
    }

    /// `∫_0^z` of the zero-mean part of a series.
    fn series_integral(&self, c: &[Complex64], z: f64) -> f64 {
        let k = self.wavenumber();
        let mut acc = 0.0;
        for n in 1..=self.n_max {
            let ikn = Complex64::new(0.0, k * n as f64);
            let e = Complex64::from_polar(1.0, k * n as f64 * z);
            acc += 2.0 * (c[self.n_max + n] * (e - 1.0) / ikn).re;
        }
        acc
    }

    /// `∫_0^z ∫_0^y` of the zero-mean part of a series.
    fn series_double_integral(&self, c: &[Complex64], z: f64) -> f64 {
        let k = self.wavenumber();
        let mut acc = 0.0;
        for n in 1..=self.n_max {
            let ikn = Complex64::new(0.0, k * n as f64);
            let e = Complex64::from_polar(1.0, k * n as f64 * z);
            acc += 2.0 * (c[self.n_max + n] * ((e - 1.0) / (ikn * ikn) - z / ikn)).re;
        }
        acc
    }

    /// Evaluate `X`, `V`, `X''` or `V''` at `x`.
    pub fn eval(&self, which: ProfileField, x: f64) -> f64 {
        match which {
            ProfileField::X => self.series(&self.x_hat, 0, x),
            ProfileField::V => self.series(&self.v_hat, 0, x),
            ProfileField::Xpp => self.series(&self.x_hat, 2, x),
            ProfileField::Vpp => self.series(&self.v_hat, 2, x),
        }
    }

    pub fn x_at(&self, x: f64) -> f64 {
        self.series(&self.x_hat, 0, x)
    }

    pub fn v_at(&self, x: f64) -> f64 {
        self.series(&self.v_hat, 0, x)
    }

    /// Derivative of `X` of the given order.
    pub fn x_deriv(&self, order: u32, x: f64) -> f64 {
        self.series(&self.x_hat, order, x)
    }

    /// Derivative of `V` of the given order.
    pub fn v_deriv(&self, order: u32, x: f64) -> f64 {
        self.series(&self.v_hat, order, x)
    }

    /// `x(z) = ∫_0^z X(u) du`, exact.
    pub fn x_of_z(&self, z: f64) -> f64 {
        z + self.series_integral(&self.x_hat, z)
    }

    /// `∫_0^z V(u) du`, exact.
    pub fn v_integral(&self, z: f64) -> f64 {
        self.series_integral(&self.v_hat, z)
    }

    /// `∫_0^z ∫_0^y V(u) du dy`, exact.
    pub fn v_double_integral(&self, z: f64) -> f64 {
        self.series_double_integral(&self.v_hat, z)
    }

    /// Upper bound on `|x(z) - z|`.
    fn antiderivative_bound(&self) -> f64 {
        let k = self.wavenumber();
        (1..=self.n_max)
            .map(|n| 2.0 * self.x_hat[self.n_max + n].norm() * 2.0 / (k * n as f64))
            .sum()
    }

    /// Upper bound on `|X'|`.
    fn slope_bound(&self) -> f64 {
        let k = self.wavenumber();
        (1..=self.n_max)
            .map(|n| 2.0 * self.x_hat[self.n_max + n].norm() * k * n as f64)
            .sum()
    }

    /// Label `z` solving `∫_0^z X = x` (safeguarded Newton on the exact
    /// antiderivative).
    pub fn z_of_x(&self, x: f64) -> f64 {
        let b = self.antiderivative_bound() + 1e-12 * x.abs().max(1.0);
        solve_increasing(|z| self.x_of_z(z), |z| self.x_at(z), x, x - b, x + b, x)
    }

    fn check_positive(&self) -> Result<()> {
        let samples = 64 * self.n_max.max(1);
        let h = self.length / samples as f64;
        let min = (0..samples)
            .map(|i| self.x_at(i as f64 * h))
            .fold(f64::INFINITY, f64::min);
        let margin = min - 0.5 * h * self.slope_bound();
        if margin > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidProfile(format!(
                "X must be positive: sampled min {min:e}, certified margin {margin:e}"
            )))
        }
    }

    /// Minimum of `X` sampled on `samples` points.
    pub fn sampled_min_x(&self, samples: usize) -> f64 {
        let h = self.length / samples as f64;
        (0..samples)
            .map(|i| self.x_at(i as f64 * h))
            .fold(f64::INFINITY, f64::min)
    }

    /// `L ∫_0^L |g|` where `g` is the second derivative of a series, split at
    /// the sign changes of `g`.
    fn abs_second_derivative_integral(&self, c: &[Complex64]) -> f64 {
        if self.n_max == 0 || c.iter().all(|z| z.norm() == 0.0) {
            return 0.0;
        }
        let g = |x: f64| self.series(c, 2, x);
        let pieces = sign_change_partition(&g, 0.0, self.length, 256 * self.n_max);
        let total: f64 = pieces
            .windows(2)
            .map(|w| adaptive_simpson(|x| g(x).abs(), w[0], w[1], 1e-11))
            .sum();
        self.length * total
    }

    /// `(c1, c2) = (L∫|X''|, L∫|V''|)`.
    pub fn fluctuation_constants(&self) -> (f64, f64) {
        (
            self.abs_second_derivative_integral(&self.x_hat),
            self.abs_second_derivative_integral(&self.v_hat),
        )
    }

    /// Check `X(0) - c1 ≤ X(x) ≤ X(0) + c1` on a 4096-point grid.
    pub fn deviation_bound_check(&self) -> bool {
        let (c1, _) = self.fluctuation_constants();
        let x0 = self.x_at(0.0);
        let slack = 1e-12 * (1.0 + c1);
        (0..4096).all(|i| {
            let x = self.x_at(i as f64 * self.length / 4096.0);
            x >= x0 - c1 - slack && x <= x0 + c1 + slack
        })
    }
}

/// Points `a = p_0 < … < p_m = b` such that `g` keeps a sign on every piece.
pub(crate) fn sign_change_partition<G: Fn(f64) -> f64>(
    g: &G,
    a: f64,
    b: f64,
    samples: usize,
) -> Vec<f64> {
    let h = (b - a) / samples as f64;
    let mut pts = vec![a];
    let mut prev_x = a;
    let mut prev = g(a);
    for i in 1..=samples {
        let x = if i == samples { b } else { a + i as f64 * h };
        let cur = g(x);
        if prev != 0.0 && cur != 0.0 && prev.signum() != cur.signum() {
            let (mut lo, mut hi) = (prev_x, x);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if g(mid).signum() == prev.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            pts.push(0.5 * (lo + hi));
        }
        if cur != 0.0 {
            prev = cur;
        }
        prev_x = x;
    }
    pts.push(b);
    pts
}

/// `γ = (1 + α/(8ω₀))(2c₁ + C₁/L) + (2c₂ + C₂/L)/(4ω₀)`.
pub fn gamma_from_constants(
    c1: f64,
    c2: f64,
    big_c1: f64,
    big_c2: f64,
    alpha: f64,
    omega0: f64,
    length: f64,
) -> f64 {
    (1.0 + alpha / (8.0 * omega0)) * (2.0 * c1 + big_c1 / length)
        + (2.0 * c2 + big_c2 / length) / (4.0 * omega0)
}

/// Regularity constant `γ` of a profile and the verdict `γ < δ`.
pub fn gamma_constant(
    p: &Profile,
    alpha: f64,
    omega0: f64,
    big_c1: f64,
    big_c2: f64,
    delta: f64,
) -> Result<RegularityReport> {
    if !(omega0 > 0.0) {
        return Err(invalid("omega0", "must be positive"));
    }
    if alpha < 0.0 {
        return Err(invalid("alpha", "must be non-negative"));
    }
    if big_c1 < 0.0 || big_c2 < 0.0 {
        return Err(invalid("C1/C2", "must be non-negative"));
    }
    let (c1, c2) = p.fluctuation_constants();
    let gamma = gamma_from_constants(c1, c2, big_c1, big_c2, alpha, omega0, p.length());
    Ok(RegularityReport {
        c1,
        c2,
        big_c1,
        big_c2,
        gamma,
        delta,
        satisfied: gamma < delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_profile_evaluates_to_one() {
        let p = Profile::uniform(1.0).unwrap();
        for &x in &[0.0, 0.3, 7.1] {
            assert_eq!(p.eval(ProfileField::X, x), 1.0);
            assert_eq!(p.eval(ProfileField::V, x), 0.0);
        }
        assert_eq!(p.fluctuation_constants(), (0.0, 0.0));
    }

    #[test]
    fn cosine_peak_and_curvature() {
        let p = Profile::cosine(1.0, 0.1).unwrap();
        assert!((p.eval(ProfileField::X, 0.0) - 1.1).abs() < 1e-15);
        // finite-difference oracle on the series itself
        let h = 1e-3;
        let fd = crate::quad::central_diff2(|x| p.x_at(x), 0.0, h);
        let exact = -0.1 * (2.0 * PI).powi(2);
        assert!((fd - exact).abs() < 1e-6);
        assert!((p.eval(ProfileField::Xpp, 0.0) - exact).abs() < 1e-12);
        assert!((exact + 3.9478).abs() < 1e-4);
    }

    #[test]
    fn c1_matches_piecewise_exact_oracle() {
        // on each sign-constant piece ∫|X''| = |X'(b) - X'(a)|
        let p = Profile::new(
            2.0,
            &[(1, c(0.05, 0.02)), (2, c(-0.01, 0.03)), (3, c(0.004, 0.0))],
            &[(1, c(0.0, 0.1)), (2, c(0.02, 0.0))],
        )
        .unwrap();
        let pieces = sign_change_partition(&|x| p.x_deriv(2, x), 0.0, 2.0, 4096);
        let oracle: f64 = pieces
            .windows(2)
            .map(|w| (p.x_deriv(1, w[1]) - p.x_deriv(1, w[0])).abs())
            .sum::<f64>()
            * 2.0;
        let (c1, _) = p.fluctuation_constants();
        assert!((c1 - oracle).abs() <= 1e-10 * oracle, "{c1} vs {oracle}");
    }

    #[test]
    fn c1_cosine_values() {
        let (c1, c2) = Profile::cosine(1.0, 0.1).unwrap().fluctuation_constants();
        assert!((c1 - 0.8 * PI).abs() < 1e-9);
        assert_eq!(c2, 0.0);
        let (c1, _) = Profile::cosine(1.0, 0.01).unwrap().fluctuation_constants();
        assert!((c1 - 0.251_327).abs() < 1e-6);
    }

    #[test]
    fn gamma_values() {
        let r = gamma_constant(&Profile::uniform(1.0).unwrap(), 0.7, 2.0, 0.0, 0.0, 0.5).unwrap();
        assert_eq!(r.gamma, 0.0);
        assert!(r.satisfied);
        let r =
            gamma_constant(&Profile::cosine(1.0, 0.1).unwrap(), 0.0, 1.0, 0.0, 0.0, 0.6).unwrap();
        assert!((r.gamma - 1.6 * PI).abs() < 1e-8);
        assert!(!r.satisfied);
        let r = gamma_constant(
            &Profile::cosine(1.0, 0.01).unwrap(),
            0.0,
            1.0,
            0.0,
            0.0,
            0.6,
        )
        .unwrap();
        assert!((r.gamma - 0.502_655).abs() < 1e-6);
        assert!(r.satisfied);
        assert!(gamma_constant(&Profile::uniform(1.0).unwrap(), 0.0, 0.0, 0.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn z_of_x_examples() {
        let u = Profile::uniform(1.0).unwrap();
        assert!((u.z_of_x(0.37) - 0.37).abs() < 1e-15);
        let p = Profile::cosine(1.0, 0.01).unwrap();
        assert!((p.z_of_x(0.5) - 0.5).abs() < 1e-14);
        // x(z) = z + 0.01 sin(2πz)/(2π); first-order inverse at x = 1/4
        let z = p.z_of_x(0.25);
        assert!((p.x_of_z(z) - 0.25).abs() < 1e-14);
        assert!((z - (0.25 - 0.01 / (2.0 * PI))).abs() < 1e-4);
        assert!((p.x_of_z(1.0) - 1.0).abs() < 1e-14);
        assert!((p.x_of_z(p.z_of_x(0.8)) - 0.8).abs() < 1e-10);
        assert!((u.x_of_z(2.5) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(Profile::cosine(1.0, 1.2).is_err());
        assert!(Profile::uniform(0.0).is_err());
        assert!(Profile::new(1.0, &[(0, c(1.5, 0.0))], &[]).is_err());
        assert!(Profile::new(1.0, &[(1, c(0.1, 0.0)), (-1, c(0.2, 0.0))], &[]).is_err());
        assert!(Profile::new(1.0, &[], &[(0, c(0.1, 0.0))]).is_err());
    }

    #[test]
    fn json_roundtrip_and_wire_format() {
        let text = r#"{"L": 2.0, "x_hat": [[1, 0.05, 0.01]], "v_hat": [[-2, 0.0, 0.3]]}"#;
        let p: Profile = serde_json::from_str(text).unwrap();
        assert_eq!(p.n_max(), 2);
        assert_eq!(p.x_coeff(-1), c(0.05, -0.01));
        assert_eq!(p.v_coeff(2), c(0.0, -0.3));
        let back: Profile = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(p, back);
        let v: serde_json::Value = serde_json::to_value(&p).unwrap();
        assert!(v.get("L").is_some() && v.get("x_hat").is_some());
    }

    fn arb_profile() -> impl Strategy<Value = Profile> {
        (
            0.5f64..3.0,
            prop::collection::vec((-0.08f64..0.08, -0.08f64..0.08), 1..4),
            prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), 0..3),
        )
            .prop_map(|(l, xs, vs)| {
                let x: Vec<_> = xs
                    .iter()
                    .enumerate()
                    .map(|(i, &(a, b))| (i as i64 + 1, c(a, b)))
                    .collect();
                let v: Vec<_> = vs
                    .iter()
                    .enumerate()
                    .map(|(i, &(a, b))| (i as i64 + 1, c(a, b)))
                    .collect();
                Profile::new(l, &x, &v).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn means_are_exact(p in arb_profile()) {
            let l = p.length();
            let mean_x = crate::quad::gauss_kronrod(|x| p.x_at(x), 0.0, l, 1e-14, 0.0).unwrap().value / l;
            let mean_v = crate::quad::gauss_kronrod(|x| p.v_at(x), 0.0, l, 1e-14, 0.0).unwrap().value / l;
            prop_assert!((mean_x - 1.0).abs() <= 1e-12);
            prop_assert!(mean_v.abs() <= 1e-12);
        }

        #[test]
        fn lemma_bound_holds(p in arb_profile()) {
            prop_assert!(p.deviation_bound_check());
        }

        #[test]
        fn z_and_x_are_inverse_and_increasing(p in arb_profile(), u in prop::collection::vec(0.0f64..1.0, 50)) {
            let l = p.length();
            for w in u.windows(2) {
                let (a, b) = (w[0] * l, w[1] * l);
                prop_assert!((p.x_of_z(p.z_of_x(a)) - a).abs() <= 1e-10);
                prop_assert!((p.z_of_x(p.x_of_z(a)) - a).abs() <= 1e-10);
                if a < b {
                    prop_assert!(p.z_of_x(a) < p.z_of_x(b));
                }
            }
            prop_assert!((p.z_of_x(0.3 + l) - p.z_of_x(0.3) - l).abs() < 1e-10);
        }

        #[test]
        fn gamma_monotone(
            base in prop::array::uniform5(0.0f64..2.0),
            bump in 0.0f64..1.0,
            which in 0usize..5,
            omega0 in 0.1f64..5.0,
        ) {
            let g = |v: [f64; 5]| gamma_from_constants(v[0], v[1], v[2], v[3], v[4], omega0, 1.3);
            let mut hi = base;
            hi[which] += bump;
            prop_assert!(g(hi) >= g(base));
        }
    }
}
