//! Exact normal-mode solution of the collision-free gap dynamics.
//!
//! With `R_j = Σ_k r_k e^{2πijk/N}` each mode obeys
//! `R̈_j + αṘ_j + Ω_j² R_j = 0`, `Ω_j = 2ω₀N sin(πj/N)`, and the forcing
//! drops out. `R_0 ≡ 0` because the gaps sum to `L`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::chain_sim::ChainState;
use crate::error::{invalid, Result};
use crate::profiles::{Profile, RegularityReport};

const DIRECT_MAX: usize = 1024;
const CRITICAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Underdamped,
    Overdamped,
    Critical,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Underdamped => "underdamped",
            Regime::Overdamped => "overdamped",
            Regime::Critical => "critical",
        }
    }

    /// Classify by the sign of `α²/4 - Ω²`.
    pub fn classify(omega: f64, alpha: f64) -> Regime {
        let disc = 0.25 * alpha * alpha - omega * omega;
        if disc.abs() <= CRITICAL_TOL * (omega * omega).max(1.0) {
            Regime::Critical
        } else if disc > 0.0 {
            Regime::Overdamped
        } else {
            Regime::Underdamped
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    pub j: usize,
    #[serde(rename = "Omega_j")]
    pub omega: f64,
    #[serde(rename = "d_j")]
    pub d: f64,
    pub regime: Regime,
    pub alpha: f64,
}

/// Complex mode amplitudes and velocities at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeState {
    pub r: Vec<Complex64>,
    pub rdot: Vec<Complex64>,
    pub t: f64,
}

/// `(a, b)` envelopes of a mode with root `d`.
///
/// `a = e^{-αt/2} cos(dt)` (cosh when overdamped, 1·e^{-αt/2} when critical),
/// `b = e^{-αt/2} sin(dt)/d` (sinh, or `t e^{-αt/2}`).
pub fn envelopes(d: f64, alpha: f64, regime: Regime, t: f64) -> (f64, f64) {
    let k = 0.5 * alpha;
    match regime {
        Regime::Underdamped => {
            let e = (-k * t).exp();
            let (s, c) = (d * t).sin_cos();
            (e * c, e * s / d)
        }
        Regime::Overdamped => {
            let (ep, em) = (((d - k) * t).exp(), ((-d - k) * t).exp());
            (0.5 * (ep + em), 0.5 * (ep - em) / d)
        }
        Regime::Critical => {
            let e = (-k * t).exp();
            (e, t * e)
        }
    }
}

impl ModeParams {
    /// Fundamental solutions: `R(t) = A R(0) + B Ṙ(0)`,
    /// `Ṙ(t) = A' R(0) + B' Ṙ(0)`; returns `(A, B, A', B')`.
    pub fn propagator(&self, t: f64) -> (f64, f64, f64, f64) {
        let (a, b) = envelopes(self.d, self.alpha, self.regime, t);
        let h = 0.5 * self.alpha;
        (a + h * b, b, -self.omega * self.omega * b, a - h * b)
    }
}

pub fn mode_params(j: usize, n: usize, omega0: f64, alpha: f64) -> Result<ModeParams> {
    if j == 0 || j >= n {
        return Err(invalid("j", format!("mode index must lie in 1..{n}")));
    }
    let omega = 2.0 * omega0 * n as f64 * (PI * j as f64 / n as f64).sin();
    let regime = Regime::classify(omega, alpha);
    let d = match regime {
        Regime::Critical => 0.0,
        _ => (0.25 * alpha * alpha - omega * omega).abs().sqrt(),
    };
    Ok(ModeParams {
        j,
        omega,
        d,
        regime,
        alpha,
    })
}

/// Transform with kernel `e^{sign·2πijk/N}`, unnormalized.
fn transform(data: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = data.len();
    if n <= DIRECT_MAX {
        let tw: Vec<Complex64> = (0..n)
            .map(|m| Complex64::from_polar(1.0, sign * 2.0 * PI * m as f64 / n as f64))
            .collect();
        (0..n)
            .map(|j| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut idx = 0usize;
                for x in data {
                    acc += x * tw[idx];
                    idx += j;
                    if idx >= n {
                        idx -= n;
                    }
                }
                acc
            })
            .collect()
    } else {
        let mut planner = FftPlanner::new();
        // rustfft's forward kernel is e^{-2πi jk/N}
        let fft: Arc<dyn Fft<f64>> = if sign > 0.0 {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let mut buf = data.to_vec();
        fft.process(&mut buf);
        buf
    }
}

/// `R_j = Σ_k r_k e^{2πijk/N}`.
pub fn dft(r: &[f64]) -> Vec<Complex64> {
    let data: Vec<Complex64> = r.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    transform(&data, 1.0)
}

/// `r_k = (1/N) Σ_j R_j e^{-2πijk/N}`, complex result.
pub fn idft_complex(big_r: &[Complex64]) -> Vec<Complex64> {
    let n = big_r.len() as f64;
    transform(big_r, -1.0).into_iter().map(|z| z / n).collect()
}

/// Real part of the inverse transform.
pub fn idft(big_r: &[Complex64]) -> Vec<f64> {
    idft_complex(big_r).into_iter().map(|z| z.re).collect()
}

impl ModeState {
    /// Modes of the gap deviations `r_k` and gap velocities `q̇_k`.
    pub fn from_chain(s: &ChainState) -> Self {
        let mut r = dft(&s.deviations());
        let mut rdot = dft(&s.gap_velocities());
        r[0] = Complex64::new(0.0, 0.0);
        rdot[0] = Complex64::new(0.0, 0.0);
        ModeState { r, rdot, t: s.t }
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn gaps(&self) -> Vec<f64> {
        idft(&self.r)
    }

    pub fn gap_velocities(&self) -> Vec<f64> {
        idft(&self.rdot)
    }

    /// `j,Omega_j,d_j,regime,Re_R,Im_R` rows.
    pub fn write_csv<W: Write>(&self, w: &mut W, omega0: f64, alpha: f64) -> Result<()> {
        writeln!(w, "j,Omega_j,d_j,regime,Re_R,Im_R")?;
        for j in 1..self.n() {
            let m = mode_params(j, self.n(), omega0, alpha)?;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                j,
                m.omega,
                m.d,
                m.regime.as_str(),
                self.r[j].re,
                self.r[j].im
            )?;
        }
        Ok(())
    }
}

/// Propagate every mode by `t` from `m0`.
pub fn evolve_modes(m0: &ModeState, omega0: f64, alpha: f64, t: f64) -> Result<ModeState> {
    let n = m0.n();
    let mut r = vec![Complex64::new(0.0, 0.0); n];
    let mut rdot = r.clone();
    for j in 1..n {
        let (a, b, ap, bp) = mode_params(j, n, omega0, alpha)?.propagator(t);
        r[j] = a * m0.r[j] + b * m0.rdot[j];
        rdot[j] = ap * m0.r[j] + bp * m0.rdot[j];
    }
    Ok(ModeState {
        r,
        rdot,
        t: m0.t + t,
    })
}

/// Precomputed modal data of an initial chain for repeated evaluation.
#[derive(Clone, Debug)]
pub struct ExactGaps {
    pub modes: ModeState,
    params: Vec<ModeParams>,
    length: f64,
}

impl ExactGaps {
    pub fn new(s0: &ChainState, omega0: f64, alpha: f64) -> Result<Self> {
        let modes = ModeState::from_chain(s0);
        let n = s0.n();
        let params = (1..n)
            .map(|j| mode_params(j, n, omega0, alpha))
            .collect::<Result<_>>()?;
        Ok(ExactGaps {
            modes,
            params,
            length: s0.length,
        })
    }

    pub fn n(&self) -> usize {
        self.modes.n()
    }

    pub fn params(&self) -> &[ModeParams] {
        &self.params
    }

    /// Modes after elapsed time `t`.
    pub fn modes_at(&self, t: f64) -> ModeState {
        let n = self.n();
        let mut r = vec![Complex64::new(0.0, 0.0); n];
        let mut rdot = r.clone();
        for m in &self.params {
            let (a, b, ap, bp) = m.propagator(t);
            r[m.j] = a * self.modes.r[m.j] + b * self.modes.rdot[m.j];
            rdot[m.j] = ap * self.modes.r[m.j] + bp * self.modes.rdot[m.j];
        }
        ModeState {
            r,
            rdot,
            t: self.modes.t + t,
        }
    }

    /// `r_k` after elapsed time `t`.
    pub fn gaps_at(&self, t: f64) -> Vec<f64> {
        self.modes_at(t).gaps()
    }

    /// `max_k |r_k(t)|` for every time of the grid, evaluated in parallel.
    pub fn max_abs_on_grid(&self, t_grid: &[f64]) -> Vec<(f64, usize)> {
        t_grid
            .par_iter()
            .map(|&t| {
                self.gaps_at(t)
                    .iter()
                    .enumerate()
                    .fold(
                        (0.0, 0),
                        |(m, i), (k, r)| if r.abs() > m { (r.abs(), k) } else { (m, i) },
                    )
            })
            .collect()
    }

    pub fn length(&self) -> f64 {
        self.length
    }
}

/// `r_k(t)` of the collision-free chain started from `s0`.
pub fn exact_gaps(s0: &ChainState, omega0: f64, alpha: f64, t: f64) -> Result<Vec<f64>> {
    Ok(ExactGaps::new(s0, omega0, alpha)?.gaps_at(t))
}

/// `256` uniform samples of `[0, t_end]`.
pub fn default_t_grid(t_end: f64) -> Vec<f64> {
    (0..256).map(|i| t_end * i as f64 / 255.0).collect()
}

/// Outcome of a sampled no-collision tube check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TubeCertificate {
    pub n: usize,
    pub delta: f64,
    /// `max_{k,t} N |r_k(t)| / L` over the grid.
    pub max_scaled_deviation: f64,
    /// `(1 + α/(8ω₀))(1/N)Σ|R_j(0)| + (1/(4ω₀N))Σ|Ṙ_j(0)|`.
    pub analytic_bound: f64,
    /// The per-mode bound `(1/N)Σ(1 + α/(2Ω_j))|R_j(0)| + |Ṙ_j(0)|/Ω_j`.
    pub mode_bound: f64,
    /// `max_{k,t} |r_k(t)|`.
    pub max_abs_deviation: f64,
    /// `Σ_{j≥1} |R_j(0)|`, to be compared with `2Lc₁ + C₁`.
    pub sum_abs_modes: f64,
    pub sum_abs_modes_limit: f64,
    pub in_tube: bool,
    pub bound_respected: bool,
    /// Time and gap index of the worst sample when the tube check fails.
    pub counterexample: Option<(f64, usize)>,
    pub gamma: f64,
}

impl TubeCertificate {
    pub fn holds(&self) -> bool {
        self.in_tube && self.bound_respected
    }
}

/// Check `N max_k |r_k(t)| / L < δ` on `t_grid` and compare with the modal
/// bounds. A sampled check of a continuous-time statement.
pub fn tube_certificate(
    s0: &ChainState,
    p: &Profile,
    report: &RegularityReport,
    omega0: f64,
    alpha: f64,
    t_grid: &[f64],
) -> Result<TubeCertificate> {
    if !(omega0 > 0.0) {
        return Err(invalid("omega0", "must be positive"));
    }
    if (p.length() - s0.length).abs() > 1e-12 * s0.length {
        return Err(invalid("L", "profile and chain lengths differ"));
    }
    let exact = ExactGaps::new(s0, omega0, alpha)?;
    let n = exact.n();
    let l = s0.length;
    let nf = n as f64;
    let (mut sr, mut sv, mut mode_bound) = (0.0, 0.0, 0.0);
    for m in exact.params() {
        let (ar, av) = (exact.modes.r[m.j].norm(), exact.modes.rdot[m.j].norm());
        sr += ar;
        sv += av;
        mode_bound += (1.0 + alpha / (2.0 * m.omega)) * ar + av / m.omega;
    }
    mode_bound /= nf;
    let analytic_bound = (1.0 + alpha / (8.0 * omega0)) * sr / nf + sv / (4.0 * omega0 * nf);
    let maxima = exact.max_abs_on_grid(t_grid);
    let (mut worst, mut at) = (0.0, (0.0, 0));
    for (&t, &(m, k)) in t_grid.iter().zip(&maxima) {
        if m >= worst {
            worst = m;
            at = (t, k);
        }
    }
    let scaled = nf * worst / l;
    let in_tube = scaled < report.delta;
    let slack = 1e-12 * (1.0 + analytic_bound);
    let bound_respected = worst <= mode_bound + slack && mode_bound <= analytic_bound + slack;
    Ok(TubeCertificate {
        n,
        delta: report.delta,
        max_scaled_deviation: scaled,
        analytic_bound,
        mode_bound,
        max_abs_deviation: worst,
        sum_abs_modes: sr,
        sum_abs_modes_limit: 2.0 * l * report.c1 + report.big_c1,
        in_tube,
        bound_respected,
        counterexample: (!in_tube || !bound_respected).then_some(at),
        gamma: report.gamma,
    })
}
