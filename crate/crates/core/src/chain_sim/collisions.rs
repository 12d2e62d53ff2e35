//! Event location and elastic velocity exchange.

use serde::{Deserialize, Serialize};

use super::{ChainParams, ChainState, Stepper};
use crate::error::{Error, Result};

const TIME_TOL: f64 = 1e-12;
const COINCIDENCE: f64 = 1e-10;
const MAX_EVENTS_PER_STEP: usize = 10_000;

/// Particles `k` and `k+1` (cyclic) met at time `t` and exchanged velocities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub t: f64,
    pub k: usize,
    /// Change of `Σẋ` across the exchange.
    pub momentum_change: f64,
    /// Change of `Σẋ²/2` across the exchange.
    pub energy_change: f64,
}

/// Resolve collisions inside the step `before → after` of length `dt`.
///
/// `after` must be the collision-blind RK4 image of `before`. Gaps that turned
/// negative are located by a cubic Hermite estimate refined by bisection on
/// the RK4 sub-step map; the state is advanced to the event, the velocities
/// swapped, and integration resumes for the remaining time.
pub fn detect_and_resolve_collisions(
    before: &ChainState,
    after: &ChainState,
    dt: f64,
    params: &ChainParams,
) -> Result<(ChainState, Vec<CollisionEvent>)> {
    let mut stepper = Stepper::new(params.clone(), before.n())?;
    resolve(&mut stepper, before, after.clone(), dt)
}

fn crossed(s: &ChainState) -> Vec<usize> {
    (0..s.n()).filter(|&k| s.gap(k) < 0.0).collect()
}

/// First root in `(0, tau]` of the cubic Hermite interpolant of a gap.
fn hermite_root(q0: f64, d0: f64, q1: f64, d1: f64, tau: f64) -> f64 {
    let p = |s: f64| {
        let u = s / tau;
        let (u2, u3) = (u * u, u * u * u);
        (2.0 * u3 - 3.0 * u2 + 1.0) * q0
            + (u3 - 2.0 * u2 + u) * tau * d0
            + (-2.0 * u3 + 3.0 * u2) * q1
            + (u3 - u2) * tau * d1
    };
    const SAMPLES: usize = 32;
    let mut a = 0.0;
    for i in 1..=SAMPLES {
        let b = tau * i as f64 / SAMPLES as f64;
        if p(b) < 0.0 {
            let mut hi = b;
            for _ in 0..60 {
                let mid = 0.5 * (a + hi);
                if p(mid) < 0.0 {
                    hi = mid;
                } else {
                    a = mid;
                }
            }
            return 0.5 * (a + hi);
        }
        a = b;
    }
    tau
}

pub(super) fn resolve(
    stepper: &mut Stepper,
    start: &ChainState,
    mut trial: ChainState,
    dt: f64,
) -> Result<(ChainState, Vec<CollisionEvent>)> {
    let mut events = Vec::new();
    let mut s = start.clone();
    let mut remaining = dt;
    let mut probe = start.clone();
    let n = s.n();
    loop {
        let hit = crossed(&trial);
        if hit.is_empty() {
            return Ok((trial, events));
        }
        if events.len() >= MAX_EVENTS_PER_STEP {
            let k = hit[0];
            return Err(Error::OrderViolation {
                t: trial.t,
                k,
                gap: trial.gap(k),
            });
        }
        let qv0 = s.gap_velocities();
        let qv1 = trial.gap_velocities();
        let guess = hit
            .iter()
            .map(|&k| hermite_root(s.gap(k), qv0[k], trial.gap(k), qv1[k], remaining))
            .fold(remaining, f64::min);

        let mut g = |tau: f64, probe: &mut ChainState| {
            stepper.rk4_into(&s, tau, probe);
            hit.iter()
                .map(|&k| probe.gap(k))
                .fold(f64::INFINITY, f64::min)
        };
        let (mut lo, mut hi) = (0.0, remaining);
        let pad = 1e-3 * remaining;
        let (a, b) = ((guess - pad).max(0.0), (guess + pad).min(remaining));
        if g(a, &mut probe) >= 0.0 && g(b, &mut probe) < 0.0 {
            lo = a;
            hi = b;
        }
        while hi - lo > TIME_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid, &mut probe) < 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut at_hi = s.clone();
        stepper.rk4_into(&s, hi, &mut at_hi);
        let mut at_lo = s.clone();
        stepper.rk4_into(&s, lo, &mut at_lo);

        let mut colliding: Vec<usize> = hit
            .iter()
            .copied()
            .filter(|&k| at_hi.gap(k) < 0.0)
            .collect();
        if colliding.is_empty() {
            let k = hit
                .iter()
                .copied()
                .min_by(|&a, &b| at_hi.gap(a).total_cmp(&at_hi.gap(b)))
                .expect("non-empty");
            colliding.push(k);
        }
        if n > 2 {
            // a neighbouring gap closing within the coincidence window means
            // three particles meet at once
            let qv = at_lo.gap_velocities();
            for &k in &colliding {
                for j in [(k + n - 1) % n, (k + 1) % n] {
                    let closing = qv[j] < 0.0 && at_lo.gap(j) <= -qv[j] * COINCIDENCE;
                    if colliding.contains(&j) || closing {
                        return Err(Error::MultipleCollision {
                            t: at_lo.t,
                            first: k.min(j),
                            second: k.max(j),
                        });
                    }
                }
            }
        }
        for &k in &colliding {
            let p0: f64 = at_lo.v.iter().sum();
            let e0: f64 = 0.5 * at_lo.v.iter().map(|v| v * v).sum::<f64>();
            at_lo.v.swap(k, (k + 1) % n);
            let p1: f64 = at_lo.v.iter().sum();
            let e1: f64 = 0.5 * at_lo.v.iter().map(|v| v * v).sum::<f64>();
            events.push(CollisionEvent {
                t: at_lo.t,
                k,
                momentum_change: p1 - p0,
                energy_change: e1 - e0,
            });
        }
        remaining -= lo;
        s = at_lo;
        stepper.rk4_into(&s, remaining, &mut trial);
    }
}
