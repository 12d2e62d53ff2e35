//! Named initial profiles shipped with the crate.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::{gamma_constant, Profile};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
}

pub const PRESETS: [Preset; 4] = [
    Preset {
        name: "uniform",
        description: "X = 1, V = 0: the equilibrium lattice",
    },
    Preset {
        name: "cos001",
        description: "X = 1 + 0.01 cos(2πx/L), V = 0",
    },
    Preset {
        name: "cos01",
        description: "X = 1 + 0.1 cos(2πx/L), V = 0",
    },
    Preset {
        name: "bump",
        description: "X = 1 + 0.01 Σ_{n=1..4} e^{-n²/4} cos(2πnx/L), V = 0.01 sin(2πx/L)",
    },
];

pub fn preset(name: &str, length: f64) -> Result<Profile> {
    match name {
        "uniform" => Profile::uniform(length),
        "cos001" => Profile::cosine(length, 0.01),
        "cos01" => Profile::cosine(length, 0.1),
        "bump" => {
            let x: Vec<(i64, Complex64)> = (1..=4)
                .map(|n| {
                    (
                        n,
                        Complex64::new(0.005 * (-(n * n) as f64 / 4.0).exp(), 0.0),
                    )
                })
                .collect();
            Profile::new(length, &x, &[(1, Complex64::new(0.0, -0.005))])
        }
        other => Err(Error::Config {
            field: "profile".into(),
            reason: format!(
                "unknown preset `{other}`; expected one of {}",
                PRESETS.map(|p| p.name).join(", ")
            ),
        }),
    }
}

/// `γ` of a preset on the unit circle with `α = 0`, `ω₀ = 1` and
/// `C₁ = C₂ = 0`, as for midpoint sampling.
pub fn reference_gamma(name: &str) -> Result<f64> {
    Ok(gamma_constant(&preset(name, 1.0)?, 0.0, 1.0, 0.0, 0.0, 0.5)?.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_build() {
        for p in PRESETS {
            let prof = preset(p.name, 1.0).unwrap();
            assert!(prof.sampled_min_x(4096) > 0.0);
        }
        assert!(preset("nope", 1.0).is_err());
    }

    #[test]
    fn documented_gammas() {
        assert_eq!(reference_gamma("uniform").unwrap(), 0.0);
        assert!((reference_gamma("cos001").unwrap() - 0.502_655).abs() < 1e-6);
        assert!((reference_gamma("cos01").unwrap() - 5.026_548).abs() < 1e-6);
        let b = reference_gamma("bump").unwrap();
        assert!(b > 0.0 && b < 1.0, "{b}");
    }

    #[test]
    fn bump_velocity() {
        let p = preset("bump", 1.0).unwrap();
        assert!((p.v_at(0.25) - 0.01).abs() < 1e-14);
    }
}
