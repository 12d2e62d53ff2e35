//! External force `f(t)`, identical on every particle.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exppoly::ExpPoly;

const PAIR_TOL: f64 = 1e-12;

/// Force acting on each particle.
///
/// `PeriodicFourier` is `f(t) = Σ_m a_m e^{imt}`; `SpectralAtoms` is
/// `f(t) = f̄ + Σ_j A_j e^{i u_j t}`, a stationary signal with a finite
/// spectral measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ForcingJson", into = "ForcingJson")]
pub enum Forcing {
    Constant {
        f: f64,
    },
    PeriodicFourier {
        a: Vec<(i64, Complex64)>,
    },
    SpectralAtoms {
        f_bar: f64,
        atoms: Vec<(f64, Complex64)>,
        seed: u64,
    },
}

/// Wire format; complex numbers are `[index, re, im]` triples.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ForcingJson {
    Constant {
        f: f64,
    },
    PeriodicFourier {
        a: Vec<(i64, f64, f64)>,
    },
    SpectralAtoms {
        f_bar: f64,
        #[serde(default)]
        atoms: Vec<(f64, f64, f64)>,
        #[serde(default)]
        seed: u64,
    },
}

impl TryFrom<ForcingJson> for Forcing {
    type Error = Error;

    fn try_from(j: ForcingJson) -> Result<Self> {
        let f = match j {
            ForcingJson::Constant { f } => Forcing::Constant { f },
            ForcingJson::PeriodicFourier { a } => Forcing::PeriodicFourier {
                a: a.into_iter()
                    .map(|(m, re, im)| (m, Complex64::new(re, im)))
                    .collect(),
            },
            ForcingJson::SpectralAtoms { f_bar, atoms, seed } => Forcing::SpectralAtoms {
                f_bar,
                atoms: atoms
                    .into_iter()
                    .map(|(u, re, im)| (u, Complex64::new(re, im)))
                    .collect(),
                seed,
            },
        };
        f.validate()?;
        Ok(f)
    }
}

impl From<Forcing> for ForcingJson {
    fn from(f: Forcing) -> Self {
        match f {
            Forcing::Constant { f } => ForcingJson::Constant { f },
            Forcing::PeriodicFourier { a } => ForcingJson::PeriodicFourier {
                a: a.into_iter().map(|(m, c)| (m, c.re, c.im)).collect(),
            },
            Forcing::SpectralAtoms { f_bar, atoms, seed } => ForcingJson::SpectralAtoms {
                f_bar,
                atoms: atoms.into_iter().map(|(u, c)| (u, c.re, c.im)).collect(),
                seed,
            },
        }
    }
}

impl Default for Forcing {
    fn default() -> Self {
        Forcing::Constant { f: 0.0 }
    }
}

fn check_pairs<K: Copy + PartialEq>(
    terms: &[(K, Complex64)],
    freq: impl Fn(K) -> f64,
    neg: impl Fn(K) -> K,
) -> Result<()> {
    for &(k, c) in terms {
        if !c.re.is_finite() || !c.im.is_finite() || !freq(k).is_finite() {
            return Err(invalid("forcing", "non-finite coefficient"));
        }
        let partner: Complex64 = terms
            .iter()
            .filter(|(j, _)| *j == neg(k))
            .map(|(_, c)| *c)
            .sum();
        let own: Complex64 = terms.iter().filter(|(j, _)| *j == k).map(|(_, c)| *c).sum();
        if (own - partner.conj()).norm() > PAIR_TOL * (1.0 + own.norm()) {
            return Err(invalid(
                "forcing",
                format!("coefficients at ±{} are not conjugate pairs", freq(k)),
            ));
        }
    }
    Ok(())
}

impl Forcing {
    /// `f(t) = sin t`.
    pub fn sine() -> Self {
        Forcing::PeriodicFourier {
            a: vec![
                (1, Complex64::new(0.0, -0.5)),
                (-1, Complex64::new(0.0, 0.5)),
            ],
        }
    }

    /// `f(t) = cos t`.
    pub fn cosine() -> Self {
        Forcing::PeriodicFourier {
            a: vec![
                (1, Complex64::new(0.5, 0.0)),
                (-1, Complex64::new(0.5, 0.0)),
            ],
        }
    }

    /// Reproducible random stationary forcing with `pairs` conjugate atom
    /// pairs, frequencies uniform in `(0, max_freq)` and amplitudes of modulus
    /// at most `amp`.
    pub fn random_atoms(f_bar: f64, pairs: usize, max_freq: f64, amp: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut atoms = Vec::with_capacity(2 * pairs);
        for _ in 0..pairs {
            let u = rng.gen_range(0.0..max_freq).max(f64::MIN_POSITIVE);
            let c = Complex64::from_polar(
                amp * rng.gen::<f64>(),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            atoms.push((u, c));
            atoms.push((-u, c.conj()));
        }
        Forcing::SpectralAtoms { f_bar, atoms, seed }
    }

    /// Rejects sequences that would produce a complex-valued force.
    pub fn validate(&self) -> Result<()> {
        match self {
            Forcing::Constant { f } if !f.is_finite() => {
                Err(invalid("forcing", "f must be finite"))
            }
            Forcing::Constant { .. } => Ok(()),
            Forcing::PeriodicFourier { a } => check_pairs(a, |m| m as f64, |m| -m),
            Forcing::SpectralAtoms { f_bar, atoms, .. } => {
                if !f_bar.is_finite() {
                    return Err(invalid("forcing", "f_bar must be finite"));
                }
                // frequencies are compared bitwise; random_atoms stores exact negations
                let keyed: Vec<(u64, Complex64)> = atoms
                    .iter()
                    .map(|&(u, c)| ((u + 0.0).to_bits(), c))
                    .collect();
                check_pairs(&keyed, f64::from_bits, |b| {
                    (-f64::from_bits(b) + 0.0).to_bits()
                })
            }
        }
    }

    /// `f(t)`.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Forcing::Constant { f } => *f,
            Forcing::PeriodicFourier { a } => a
                .iter()
                .map(|&(m, c)| (c * Complex64::from_polar(1.0, m as f64 * t)).re)
                .sum(),
            Forcing::SpectralAtoms { f_bar, atoms, .. } => {
                f_bar
                    + atoms
                        .iter()
                        .map(|&(u, c)| (c * Complex64::from_polar(1.0, u * t)).re)
                        .sum::<f64>()
            }
        }
    }

    /// True when `f ≡ 0`.
    pub fn is_zero(&self) -> bool {
        match self {
            Forcing::Constant { f } => *f == 0.0,
            Forcing::PeriodicFourier { a } => a.iter().all(|(_, c)| c.norm() == 0.0),
            Forcing::SpectralAtoms { f_bar, atoms, .. } => {
                *f_bar == 0.0 && atoms.iter().all(|(_, c)| c.norm() == 0.0)
            }
        }
    }

    pub(crate) fn exp_poly(&self) -> ExpPoly {
        let mut p = ExpPoly::new();
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Forcing::Constant { f } => p.push(Complex64::new(*f, 0.0), 0, zero),
            Forcing::PeriodicFourier { a } => {
                for &(m, c) in a {
                    p.push(c, 0, Complex64::new(0.0, m as f64));
                }
            }
            Forcing::SpectralAtoms { f_bar, atoms, .. } => {
                p.push(Complex64::new(*f_bar, 0.0), 0, zero);
                for &(u, c) in atoms {
                    p.push(c, 0, Complex64::new(0.0, u));
                }
            }
        }
        p
    }

    /// `∫_0^t f(s) e^{-α(t-s)} ds` in closed form.
    pub fn damped_integral(&self, alpha: f64, t: f64) -> f64 {
        (self.exp_poly().shifted(alpha).integral().eval(t) * (-alpha * t).exp()).re
    }
}

/// `V_N(t) = Σ_k ẋ_k(t) = V_N(0) e^{-αt} + N ∫_0^t f(s) e^{-α(t-s)} ds`.
pub fn mean_velocity_closed_form(
    v_n0: f64,
    force: &Forcing,
    alpha: f64,
    t: f64,
    n: usize,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", "must be positive"));
    }
    Ok(v_n0 * (-alpha * t).exp() + n as f64 * force.damped_integral(alpha, t))
}

/// Common asymptotic particle velocity `w(t)` under damping `α`.
pub fn limit_velocity(force: &Forcing, alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid("alpha", "must be positive"));
    }
    force.validate()?;
    let a = Complex64::new(alpha, 0.0);
    Ok(match force {
        Forcing::Constant { f } => f / alpha,
        Forcing::PeriodicFourier { a: coeffs } => coeffs
            .iter()
            .map(|&(m, c)| {
                let i_m = Complex64::new(0.0, m as f64);
                (c / (a + i_m) * (i_m * t).exp()).re
            })
            .sum(),
        Forcing::SpectralAtoms { f_bar, atoms, .. } => {
            f_bar / alpha
                + atoms
                    .iter()
                    .map(|&(u, c)| {
                        let iu = Complex64::new(0.0, u);
                        (c / (a + iu) * (iu * t).exp()).re
                    })
                    .sum::<f64>()
        }
    })
}
