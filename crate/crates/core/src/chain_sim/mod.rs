//! Direct integration of the N-particle chain
//! `ẍ_k = ω²(x_{k+1} - 2x_k + x_{k-1}) - α ẋ_k + f(t)`, `ω = ω₀N`,
//! on a circle of length `L` with elastic collisions.

mod collisions;
mod forcing;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::profiles::Profile;

pub use collisions::{detect_and_resolve_collisions, CollisionEvent};
pub use forcing::{limit_velocity, mean_velocity_closed_form, Forcing, ForcingJson};

/// Positions are unwrapped: `x_{k+N} = x_k + L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub length: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

/// How discrete initial data are sampled from a profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// Gaps `(L/N) X(kL/N)`, velocity increments `(L/N) V(kL/N)`.
    #[default]
    Midpoint,
    /// Gaps and increments are cell integrals, so `x_k(0) = ∫_0^{kL/N} X`.
    Exact,
}

/// Chain built from a profile together with its measured discretization
/// constants `C1 = N² max_k |q_k - (L/N)X(kL/N)|` and likewise `C2`.
#[derive(Clone, Debug)]
pub struct Initialized {
    pub state: ChainState,
    pub big_c1: f64,
    pub big_c2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub omega0: f64,
    pub alpha: f64,
    #[serde(default)]
    pub forcing: Forcing,
    #[serde(default = "yes")]
    pub collisions: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    #[serde(rename = "T")]
    pub kinetic: f64,
    #[serde(rename = "U0")]
    pub potential: f64,
    #[serde(rename = "H0")]
    pub h0: f64,
    pub x_kinetic: f64,
}

impl ChainParams {
    pub fn new(omega0: f64, alpha: f64, forcing: Forcing) -> Self {
        ChainParams {
            omega0,
            alpha,
            forcing,
            collisions: true,
        }
    }

    pub fn without_collisions(mut self) -> Self {
        self.collisions = false;
        self
    }

    /// Largest admissible step, `0.5 / Ω_max` with `Ω_max = 2ω₀N`.
    pub fn stability_bound(&self, n: usize) -> f64 {
        if self.omega0 == 0.0 {
            f64::INFINITY
        } else {
            0.25 / (self.omega0 * n as f64)
        }
    }

    /// Default step `0.25 / (ω₀N)`.
    pub fn default_dt(&self, n: usize) -> f64 {
        if self.omega0 == 0.0 {
            1e-3
        } else {
            0.25 / (self.omega0 * n as f64)
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega0 >= 0.0 && self.omega0.is_finite()) {
            return Err(invalid("omega0", "must be finite and non-negative"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", "must be finite and non-negative"));
        }
        self.forcing.validate()
    }
}

impl ChainState {
    /// Validates ordering and the period closure.
    pub fn new(length: f64, x: Vec<f64>, v: Vec<f64>, t: f64) -> Result<Self> {
        if x.len() != v.len() {
            return Err(invalid("x/v", "length mismatch"));
        }
        if x.len() < 2 {
            return Err(invalid("N", "at least two particles are required"));
        }
        if !(length > 0.0) {
            return Err(invalid("L", "must be positive"));
        }
        let s = ChainState { length, x, v, t };
        for k in 0..s.n() {
            if !(s.gap(k) >= 0.0) {
                return Err(Error::OrderViolation {
                    t,
                    k,
                    gap: s.gap(k),
                });
            }
        }
        Ok(s)
    }

    /// Equally spaced chain moving rigidly with velocity `v`.
    pub fn uniform(n: usize, length: f64, v: f64) -> Self {
        ChainState {
            length,
            x: (0..n).map(|k| k as f64 * length / n as f64).collect(),
            v: vec![v; n],
            t: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `q_k = x_{k+1} - x_k` with `x_N = x_0 + L`.
    pub fn gap(&self, k: usize) -> f64 {
        let n = self.n();
        if k + 1 == n {
            self.x[0] + self.length - self.x[n - 1]
        } else {
            self.x[k + 1] - self.x[k]
        }
    }

    pub fn gaps(&self) -> Vec<f64> {
        (0..self.n()).map(|k| self.gap(k)).collect()
    }

    /// `q̇_k = ẋ_{k+1} - ẋ_k`, cyclic.
    pub fn gap_velocities(&self) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|k| self.v[(k + 1) % n] - self.v[k]).collect()
    }

    /// `r_k = q_k - L/N`.
    pub fn deviations(&self) -> Vec<f64> {
        let h = self.length / self.n() as f64;
        (0..self.n()).map(|k| self.gap(k) - h).collect()
    }

    pub fn gap_sum(&self) -> f64 {
        (0..self.n()).map(|k| self.gap(k)).sum()
    }

    pub fn velocity_sum(&self) -> f64 {
        self.v.iter().sum()
    }

    /// Particle position reduced to `[0, L)`.
    pub fn wrapped(&self, k: usize) -> f64 {
        self.x[k].rem_euclid(self.length)
    }

    pub fn write_csv_header<W: Write>(w: &mut W) -> Result<()> {
        writeln!(w, "t,k,x,v")?;
        Ok(())
    }

    /// Appends one `t,k,x,v` row per particle.
    pub fn write_csv_rows<W: Write>(&self, w: &mut W) -> Result<()> {
        for k in 0..self.n() {
            writeln!(w, "{},{},{},{}", self.t, k, self.x[k], self.v[k])?;
        }
        Ok(())
    }
}

/// Sample a chain from `p` with `x_0(0) = 0` and `ẋ_0(0) = v`.
pub fn init_from_profile(p: &Profile, n: usize, scheme: InitScheme, v: f64) -> Result<Initialized> {
    if n < 3 {
        return Err(invalid("N", "at least three particles are required"));
    }
    if p.sampled_min_x(64 * p.n_max().max(n)) <= 0.0 {
        return Err(Error::InvalidProfile("X must be positive".into()));
    }
    let l = p.length();
    let h = l / n as f64;
    let (mut gaps, mut dv): (Vec<f64>, Vec<f64>) = match scheme {
        InitScheme::Midpoint => (0..n)
            .map(|k| (h * p.x_at(k as f64 * h), h * p.v_at(k as f64 * h)))
            .unzip(),
        InitScheme::Exact => (0..n)
            .map(|k| {
                let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
                (p.x_of_z(b) - p.x_of_z(a), p.v_integral(b) - p.v_integral(a))
            })
            .unzip(),
    };
    let total: f64 = gaps.iter().sum();
    for g in &mut gaps {
        *g *= l / total;
    }
    let drift = dv.iter().sum::<f64>() / n as f64;
    for d in &mut dv {
        *d -= drift;
    }
    let mut x = Vec::with_capacity(n);
    let mut vel = Vec::with_capacity(n);
    let (mut pos, mut w) = (0.0, v);
    for k in 0..n {
        x.push(pos);
        vel.push(w);
        pos += gaps[k];
        w += dv[k];
    }
    let state = ChainState::new(l, x, vel, 0.0)?;
    let n2 = (n * n) as f64;
    let qv = state.gap_velocities();
    let (mut c1, mut c2) = (0.0f64, 0.0f64);
    for (k, &q) in qv.iter().enumerate() {
        let s = k as f64 * h;
        c1 = c1.max((state.gap(k) - h * p.x_at(s)).abs());
        c2 = c2.max((q - h * p.v_at(s)).abs());
    }
    Ok(Initialized {
        state,
        big_c1: n2 * c1,
        big_c2: n2 * c2,
    })
}

/// Seeded random admissible start: gaps scaled by `1 + gap_amp·u_k` and
/// renormalised to `L`, velocities shifted by `vel_amp·u'_k`, with
/// `u_k, u'_k` uniform on `[-1, 1]`. Order is preserved for `gap_amp < 1`.
pub fn perturb(s: &ChainState, gap_amp: f64, vel_amp: f64, seed: u64) -> Result<ChainState> {
    use rand::{Rng, SeedableRng};
    if !(0.0..1.0).contains(&gap_amp) {
        return Err(invalid("perturbation", "gap amplitude must lie in [0, 1)"));
    }
    if !(vel_amp >= 0.0 && vel_amp.is_finite()) {
        return Err(invalid(
            "perturbation",
            "velocity amplitude must be non-negative",
        ));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = s.n();
    let mut gaps: Vec<f64> = (0..n)
        .map(|k| s.gap(k) * (1.0 + gap_amp * rng.gen_range(-1.0..=1.0)))
        .collect();
    let total: f64 = gaps.iter().sum();
    for g in &mut gaps {
        *g *= s.length / total;
    }
    let mut x = Vec::with_capacity(n);
    let mut pos = s.x[0];
    for g in &gaps {
        x.push(pos);
        pos += g;
    }
    let v =
        s.v.iter()
            .map(|v| v + vel_amp * rng.gen_range(-1.0..=1.0))
            .collect();
    ChainState::new(s.length, x, v, s.t)
}

/// `a_k = ω²(x_{k+1} - 2x_k + x_{k-1}) - αẋ_k + f(t)`.
pub fn accelerations(s: &ChainState, params: &ChainParams) -> Vec<f64> {
    let mut out = vec![0.0; s.n()];
    let w2 = (params.omega0 * s.n() as f64).powi(2);
    accel_into(
        &s.x,
        &s.v,
        s.length,
        w2,
        params.alpha,
        params.forcing.value(s.t),
        &mut out,
    );
    out
}

fn accel_into(x: &[f64], v: &[f64], length: f64, w2: f64, alpha: f64, f: f64, out: &mut [f64]) {
    let n = x.len();
    out[0] = w2 * (x[1] - 2.0 * x[0] + x[n - 1] - length) - alpha * v[0] + f;
    for k in 1..n - 1 {
        out[k] = w2 * (x[k + 1] - 2.0 * x[k] + x[k - 1]) - alpha * v[k] + f;
    }
    out[n - 1] = w2 * (x[0] + length - 2.0 * x[n - 1] + x[n - 2]) - alpha * v[n - 1] + f;
}

/// Reusable RK4 integrator with preallocated stage buffers.
#[derive(Clone, Debug)]
pub struct Stepper {
    params: ChainParams,
    w2: f64,
    kx: [Vec<f64>; 4],
    kv: [Vec<f64>; 4],
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl Stepper {
    pub fn new(params: ChainParams, n: usize) -> Result<Self> {
        params.validate()?;
        let z = || vec![0.0; n];
        Ok(Stepper {
            w2: (params.omega0 * n as f64).powi(2),
            params,
            kx: [z(), z(), z(), z()],
            kv: [z(), z(), z(), z()],
            xs: z(),
            vs: z(),
        })
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    /// One collision-blind RK4 step written into `out`.
    pub fn rk4_into(&mut self, s: &ChainState, dt: f64, out: &mut ChainState) {
        let n = s.n();
        let (l, w2, a) = (s.length, self.w2, self.params.alpha);
        let f = &self.params.forcing;
        let (f0, fh, f1) = (f.value(s.t), f.value(s.t + 0.5 * dt), f.value(s.t + dt));
        self.kx[0].copy_from_slice(&s.v);
        accel_into(&s.x, &s.v, l, w2, a, f0, &mut self.kv[0]);
        for stage in 1..4 {
            let c = if stage == 3 { dt } else { 0.5 * dt };
            let fs = if stage == 3 { f1 } else { fh };
            for k in 0..n {
                self.xs[k] = s.x[k] + c * self.kx[stage - 1][k];
                self.vs[k] = s.v[k] + c * self.kv[stage - 1][k];
            }
            self.kx[stage].copy_from_slice(&self.vs);
            accel_into(&self.xs, &self.vs, l, w2, a, fs, &mut self.kv[stage]);
        }
        let c = dt / 6.0;
        out.x.resize(n, 0.0);
        out.v.resize(n, 0.0);
        for k in 0..n {
            out.x[k] = s.x[k]
                + c * (self.kx[0][k] + 2.0 * self.kx[1][k] + 2.0 * self.kx[2][k] + self.kx[3][k]);
            out.v[k] = s.v[k]
                + c * (self.kv[0][k] + 2.0 * self.kv[1][k] + 2.0 * self.kv[2][k] + self.kv[3][k]);
        }
        out.length = l;
        out.t = s.t + dt;
    }

    fn check_dt(&self, n: usize, dt: f64) -> Result<()> {
        let bound = self.params.stability_bound(n);
        if !(dt > 0.0) {
            return Err(invalid("dt", "must be positive"));
        }
        if dt > bound * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { dt, bound });
        }
        Ok(())
    }

    /// Advance `s` by `dt`, resolving collisions when enabled. Returns the
    /// collisions that occurred inside the step.
    pub fn advance(&mut self, s: &mut ChainState, dt: f64) -> Result<Vec<CollisionEvent>> {
        self.check_dt(s.n(), dt)?;
        let mut trial = s.clone();
        self.rk4_into(s, dt, &mut trial);
        if !self.params.collisions {
            *s = trial;
            return Ok(Vec::new());
        }
        let (next, events) = collisions::resolve(self, s, trial, dt)?;
        *s = next;
        Ok(events)
    }
}

/// One RK4 step of the full `(x, ẋ)` system, ignoring collisions.
pub fn step(s: &ChainState, dt: f64, params: &ChainParams) -> Result<ChainState> {
    let mut st = Stepper::new(params.clone(), s.n())?;
    st.check_dt(s.n(), dt)?;
    let mut out = s.clone();
    st.rk4_into(s, dt, &mut out);
    Ok(out)
}

/// `T = Σq̇²/2`, `U0 = (ω²/2)Σ(q_{k+1} - q_k)²`, `H0 = T + U0`.
pub fn energies(s: &ChainState, omega0: f64) -> EnergyRecord {
    let n = s.n();
    let q = s.gaps();
    let qv = s.gap_velocities();
    let kinetic = 0.5 * qv.iter().map(|d| d * d).sum::<f64>();
    let w2 = (omega0 * n as f64).powi(2);
    let potential = 0.5 * w2 * (0..n).map(|k| (q[(k + 1) % n] - q[k]).powi(2)).sum::<f64>();
    EnergyRecord {
        t: s.t,
        kinetic,
        potential,
        h0: kinetic + potential,
        x_kinetic: 0.5 * s.v.iter().map(|v| v * v).sum::<f64>(),
    }
}

/// Time history of a run.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RunLog {
    pub energies: Vec<EnergyRecord>,
    pub events: Vec<CollisionEvent>,
    /// `max_t |Σq_k - L| / L` over all accepted steps.
    pub max_gap_sum_drift: f64,
    /// Largest increase of `H0` over a collision-free step.
    pub max_h0_increase: f64,
    /// Largest change of `Σẋ` or `Σẋ²/2` across a velocity exchange.
    pub max_event_velocity_change: f64,
}

/// Integrate to `t_end` with fixed step `dt` (the last step is shortened).
/// `record_every` controls the energy sampling stride in steps.
pub fn run_until(
    s: &mut ChainState,
    stepper: &mut Stepper,
    dt: f64,
    t_end: f64,
    record_every: usize,
    mut observe: impl FnMut(&ChainState),
) -> Result<RunLog> {
    let mut log = RunLog::default();
    let omega0 = stepper.params().omega0;
    let l = s.length;
    let mut prev = energies(s, omega0);
    log.energies.push(prev);
    observe(s);
    let mut steps = 0usize;
    while s.t < t_end - 1e-12 * t_end.abs().max(1.0) {
        let h = dt.min(t_end - s.t);
        let events = stepper.advance(s, h)?;
        steps += 1;
        log.max_gap_sum_drift = log.max_gap_sum_drift.max((s.gap_sum() - l).abs() / l);
        let e = energies(s, omega0);
        if events.is_empty() {
            log.max_h0_increase = log.max_h0_increase.max(e.h0 - prev.h0);
        }
        for ev in &events {
            log.max_event_velocity_change = log
                .max_event_velocity_change
                .max(ev.momentum_change.abs())
                .max(ev.energy_change.abs());
        }
        log.events.extend(events);
        prev = e;
        if record_every > 0 && steps.is_multiple_of(record_every) {
            log.energies.push(e);
        }
        observe(s);
    }
    if log.energies.last().map(|e| e.t) != Some(s.t) {
        log.energies.push(prev);
    }
    Ok(log)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelaxationReport {
    pub converged: bool,
    pub t_end: f64,
    /// `max_k |q_k - L/N| / (L/N)` at `t_end`.
    pub final_deviation: f64,
    /// `max_k |ẋ_k - w(t_end)|`.
    pub velocity_error: f64,
    pub log: RunLog,
    pub state: ChainState,
}

/// Integrate with collisions until `max_k |q_k - L/N| < tol·L/N` or `t_max`.
pub fn run_to_relaxation(
    s: &ChainState,
    params: &ChainParams,
    dt: f64,
    tol: f64,
    t_max: f64,
) -> Result<RelaxationReport> {
    if !(params.alpha > 0.0) {
        return Err(invalid("alpha", "must be positive"));
    }
    let mut stepper = Stepper::new(
        ChainParams {
            collisions: true,
            ..params.clone()
        },
        s.n(),
    )?;
    let mut st = s.clone();
    let h = st.length / st.n() as f64;
    let dev = |st: &ChainState| st.deviations().iter().fold(0.0f64, |m, r| m.max(r.abs())) / h;
    let mut log = RunLog::default();
    log.energies.push(energies(&st, params.omega0));
    let chunk = (1.0 / dt).ceil().max(1.0) * dt;
    while dev(&st) >= tol && st.t < t_max {
        let target = (st.t + chunk).min(t_max);
        let part = run_until(&mut st, &mut stepper, dt, target, 0, |_| {})?;
        log.energies.extend(part.energies.into_iter().skip(1));
        log.events.extend(part.events);
        log.max_gap_sum_drift = log.max_gap_sum_drift.max(part.max_gap_sum_drift);
        log.max_h0_increase = log.max_h0_increase.max(part.max_h0_increase);
        log.max_event_velocity_change = log
            .max_event_velocity_change
            .max(part.max_event_velocity_change);
    }
    let w = limit_velocity(&params.forcing, params.alpha, st.t)?;
    let final_deviation = dev(&st);
    Ok(RelaxationReport {
        converged: final_deviation < tol,
        t_end: st.t,
        final_deviation,
        velocity_error: st.v.iter().fold(0.0f64, |m, v| m.max((v - w).abs())),
        log,
        state: st,
    })
}

/// `t,k` rows for a collision log.
pub fn write_events_csv<W: Write>(w: &mut W, events: &[CollisionEvent]) -> Result<()> {
    writeln!(w, "t,k")?;
    for e in events {
        writeln!(w, "{},{}", e.t, e.k)?;
    }
    Ok(())
}
