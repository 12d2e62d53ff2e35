use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::plot::{line_chart, Axes, Series};
use super::{doubling_ratio, estimate_rate, Assertion, Experiment, ScenarioConfig, Sink, Table};
use crate::chain_sim::{
    energies, init_from_profile, limit_velocity, perturb, run_until, write_events_csv, ChainParams,
    ChainState, EnergyRecord, InitScheme, RunLog, Stepper,
};
use crate::continuum::{bessel_solution, ContinuumSolution};
use crate::error::{Error, Result};
use crate::fields::{
    density_velocity, discrete_force, empirical_distribution, euler_residuals,
    euler_residuals_chart, force_forms, force_limit, limit_distribution, pressure,
    write_fields_csv,
};
use crate::profiles::{gamma_constant, Profile};
use crate::spectral::{default_t_grid, tube_certificate, ExactGaps, ModeState};

const GAP_SUM_TOL: f64 = 1e-9;
const EXCHANGE_TOL: f64 = 1e-12;
const H0_STEP_TOL: f64 = 1e-10;

pub(super) struct Outcome {
    pub tables: Vec<Table>,
    pub assertions: Vec<Assertion>,
    pub timings: BTreeMap<String, f64>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            tables: Vec::new(),
            assertions: Vec::new(),
            timings: BTreeMap::new(),
        }
    }
}

pub(super) fn dispatch(cfg: &ScenarioConfig, sink: &Sink) -> Result<Outcome> {
    let p = cfg.resolve_profile()?;
    match cfg.experiment {
        Experiment::Relax => relax(cfg, &p, sink),
        Experiment::Tube => tube(cfg, &p, sink),
        Experiment::ContinuumConvergence => convergence(cfg, &p, sink),
        Experiment::EulerResiduals => euler(cfg, &p, sink),
        Experiment::ForceLimit => force(cfg, &p, sink),
        Experiment::SolutionCrosscheck => crosscheck(cfg, &p, sink),
    }
}

fn params(cfg: &ScenarioConfig, collisions: bool) -> ChainParams {
    let p = ChainParams::new(cfg.omega0, cfg.alpha, cfg.forcing.clone());
    if collisions {
        p
    } else {
        p.without_collisions()
    }
}

fn continuum(cfg: &ScenarioConfig, p: &Profile) -> Result<ContinuumSolution> {
    ContinuumSolution::new(p, cfg.omega0, cfg.alpha, cfg.v, cfg.forcing.clone())
}

fn cell_seed(seed: u64, n: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn absorb(total: &mut RunLog, part: RunLog) {
    total.energies.extend(part.energies.into_iter().skip(1));
    total.events.extend(part.events);
    total.max_gap_sum_drift = total.max_gap_sum_drift.max(part.max_gap_sum_drift);
    total.max_h0_increase = total.max_h0_increase.max(part.max_h0_increase);
    total.max_event_velocity_change = total
        .max_event_velocity_change
        .max(part.max_event_velocity_change);
}

fn write_energies(sink: &Sink, name: &str, records: &[EnergyRecord]) -> Result<()> {
    let mut w = sink.create(name)?;
    writeln!(w, "t,T,U0,H0,x_kinetic")?;
    for e in records {
        writeln!(
            w,
            "{},{},{},{},{}",
            e.t, e.kinetic, e.potential, e.h0, e.x_kinetic
        )?;
    }
    w.flush()?;
    Ok(())
}

fn conservation(out: &mut Vec<Assertion>, prefix: &str, log: &RunLog, alpha: f64) {
    out.push(Assertion::at_most(
        format!("{prefix}.gap_sum_drift"),
        log.max_gap_sum_drift,
        GAP_SUM_TOL,
    ));
    out.push(Assertion::at_most(
        format!("{prefix}.exchange_invariants"),
        log.max_event_velocity_change,
        EXCHANGE_TOL,
    ));
    if alpha > 0.0 {
        out.push(Assertion::at_most(
            format!("{prefix}.h0_step_increase"),
            log.max_h0_increase,
            H0_STEP_TOL,
        ));
    }
}

fn record_stride(dt: f64) -> usize {
    ((0.05 / dt).round() as usize).max(1)
}

fn ratio_assertions(
    out: &mut Vec<Assertion>,
    rates: &mut Table,
    name: &str,
    errs: &[(usize, f64)],
    window: (f64, f64),
    column: usize,
) {
    for (i, w) in errs.windows(2).enumerate() {
        let r = doubling_ratio(w[0].0, w[0].1, w[1].0, w[1].1);
        rates.rows[i][column] = r;
        out.push(Assertion::within(
            format!("{name}.doubling_ratio[N={}->{}]", w[0].0, w[1].0),
            r,
            window.0,
            window.1,
        ));
    }
}

fn rates_table(name: &str, ns: &[usize], columns: &[&str]) -> Table {
    let mut cols = vec!["N_coarse", "N_fine"];
    cols.extend_from_slice(columns);
    let mut t = Table::new(name, &cols);
    for w in ns.windows(2) {
        let mut row = vec![w[0] as f64, w[1] as f64];
        row.resize(cols.len(), f64::NAN);
        t.push(row);
    }
    t
}

// ---------------------------------------------------------------- relax

struct RelaxCell {
    n: usize,
    series: Vec<(f64, f64, f64)>,
    log: RunLog,
    snapshots: Vec<ChainState>,
    secs: f64,
}

fn relax_cell(cfg: &ScenarioConfig, p: &Profile, n: usize) -> Result<RelaxCell> {
    let start = Instant::now();
    let l = p.length();
    let init = init_from_profile(p, n, InitScheme::Midpoint, cfg.v)?;
    let scale = if cfg.omega0 > 0.0 {
        cfg.omega0 * l
    } else {
        1.0
    };
    let mut s = perturb(
        &init.state,
        cfg.perturbation,
        cfg.perturbation * scale,
        cell_seed(cfg.seed, n),
    )?;
    let par = params(cfg, true);
    let mut stepper = Stepper::new(par.clone(), n)?;
    let dt = cfg.dt(n);
    let stride = record_stride(dt);
    let chunks = cfg.horizon.ceil().max(1.0) as usize;
    let mut marks: Vec<f64> = (1..=chunks)
        .map(|i| cfg.horizon * i as f64 / chunks as f64)
        .collect();
    if let Some(t1) = cfg.tolerances.decay_from {
        if t1 > 0.0 && t1 < cfg.horizon {
            marks.push(t1);
        }
    }
    marks.sort_by(f64::total_cmp);
    marks.dedup();

    let h = l / n as f64;
    let measure = |s: &ChainState| -> Result<(f64, f64, f64)> {
        let dev = s.deviations().iter().fold(0.0f64, |m, r| m.max(r.abs())) / h;
        let w = limit_velocity(&cfg.forcing, cfg.alpha, s.t)?;
        let verr = s.v.iter().fold(0.0f64, |m, v| m.max((v - w).abs()));
        Ok((s.t, dev, verr))
    };
    let mut log = RunLog::default();
    log.energies.push(energies(&s, cfg.omega0));
    let mut series = vec![measure(&s)?];
    let mut snapshots = vec![s.clone()];
    for &t in &marks {
        let part = run_until(&mut s, &mut stepper, dt, t, stride, |_| {})?;
        absorb(&mut log, part);
        series.push(measure(&s)?);
        snapshots.push(s.clone());
    }
    Ok(RelaxCell {
        n,
        series,
        log,
        snapshots,
        secs: start.elapsed().as_secs_f64(),
    })
}

fn relax(cfg: &ScenarioConfig, p: &Profile, sink: &Sink) -> Result<Outcome> {
    let cells: Vec<RelaxCell> = cfg
        .n_list
        .par_iter()
        .map(|&n| relax_cell(cfg, p, n))
        .collect::<Result<_>>()?;
    let mut out = Outcome::new();
    let tol = &cfg.tolerances;
    let mut table = Table::new(
        "relax",
        &[
            "N",
            "final_gap_deviation",
            "final_velocity_error",
            "collisions",
            "gap_sum_drift",
            "max_h0_step_increase",
            "exchange_invariants",
        ],
    );
    let (mut h0_series, mut err_series) = (Vec::new(), Vec::new());
    for c in &cells {
        let &(_, dev, verr) = c.series.last().expect("non-empty");
        let prefix = format!("relax[N={}]", c.n);
        out.assertions.push(Assertion::less(
            format!("{prefix}.final_gap_deviation"),
            dev,
            tol.deviation.unwrap_or(1e-3),
        ));
        out.assertions.push(Assertion::less(
            format!("{prefix}.final_velocity_error"),
            verr,
            tol.velocity.unwrap_or(1e-4),
        ));
        if let Some(t1) = tol.decay_from {
            let early = c
                .series
                .iter()
                .find(|s| (s.0 - t1).abs() < 1e-9 * t1.max(1.0))
                .map_or(f64::NAN, |s| s.2);
            out.assertions.push(Assertion::at_least(
                format!("{prefix}.velocity_error_decay"),
                early / verr,
                tol.decay_factor.unwrap_or(100.0),
            ));
        }
        conservation(&mut out.assertions, &prefix, &c.log, cfg.alpha);
        table.push(vec![
            c.n as f64,
            dev,
            verr,
            c.log.events.len() as f64,
            c.log.max_gap_sum_drift,
            c.log.max_h0_increase,
            c.log.max_event_velocity_change,
        ]);

        let mut w = sink.create(&format!("relax_N{}.csv", c.n))?;
        writeln!(w, "t,max_gap_deviation,max_velocity_error")?;
        for &(t, d, v) in &c.series {
            writeln!(w, "{t},{d},{v}")?;
        }
        w.flush()?;
        write_energies(sink, &format!("energy_N{}.csv", c.n), &c.log.energies)?;
        let mut w = sink.create(&format!("events_N{}.csv", c.n))?;
        write_events_csv(&mut w, &c.log.events)?;
        w.flush()?;
        let mut w = sink.create(&format!("trajectory_N{}.csv", c.n))?;
        ChainState::write_csv_header(&mut w)?;
        for s in &c.snapshots {
            s.write_csv_rows(&mut w)?;
        }
        w.flush()?;
        h0_series.push(Series::new(
            format!("N={}", c.n),
            c.log.energies.iter().map(|e| (e.t, e.h0)).collect(),
        ));
        err_series.push(Series::new(
            format!("gap N={}", c.n),
            c.series.iter().map(|s| (s.0, s.1)).collect(),
        ));
        err_series.push(Series::new(
            format!("velocity N={}", c.n),
            c.series.iter().map(|s| (s.0, s.2)).collect(),
        ));
        out.timings.insert(format!("N={}", c.n), c.secs);
    }
    line_chart(
        &sink.svg("energy.svg"),
        "H0 decay",
        "t",
        "H0",
        Axes::LogY,
        &h0_series,
    )?;
    line_chart(
        &sink.svg("relaxation.svg"),
        "distance from the moving fixed point",
        "t",
        "max deviation",
        Axes::LogY,
        &err_series,
    )?;
    out.tables.push(table);
    Ok(out)
}

// ---------------------------------------------------------------- tube

struct TubeCell {
    n: usize,
    row: Vec<f64>,
    series: Vec<(f64, f64, f64)>,
    assertions: Vec<Assertion>,
    modes: ModeState,
    secs: f64,
}

fn tube_cell(cfg: &ScenarioConfig, p: &Profile, n: usize) -> Result<TubeCell> {
    let start = Instant::now();
    let l = p.length();
    let init = init_from_profile(p, n, InitScheme::Midpoint, cfg.v)?;
    let report = gamma_constant(
        p,
        cfg.alpha,
        cfg.omega0,
        init.big_c1,
        init.big_c2,
        cfg.delta,
    )?;
    let grid = default_t_grid(cfg.horizon);
    let cert = tube_certificate(&init.state, p, &report, cfg.omega0, cfg.alpha, &grid)?;
    let exact = ExactGaps::new(&init.state, cfg.omega0, cfg.alpha)?;
    let maxima = exact.max_abs_on_grid(&grid);

    let mut s = init.state.clone();
    let mut stepper = Stepper::new(params(cfg, false), n)?;
    let dt = cfg.dt(n);
    let mut log = RunLog::default();
    let mut series = Vec::with_capacity(grid.len());
    let mut oracle = 0.0f64;
    for (&t, &(m, _)) in grid.iter().zip(&maxima) {
        if t > s.t {
            absorb(&mut log, run_until(&mut s, &mut stepper, dt, t, 0, |_| {})?);
        }
        let diff = s
            .deviations()
            .iter()
            .zip(exact.gaps_at(t))
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        oracle = oracle.max(diff);
        series.push((t, n as f64 * m / l, diff));
    }
    let prefix = format!("tube[N={n}]");
    let tol = cfg.tolerances.oracle.unwrap_or(1e-6);
    let slack = 1e-12 * (1.0 + cert.analytic_bound);
    let mut assertions = vec![
        Assertion::less(
            format!("{prefix}.max_scaled_deviation"),
            cert.max_scaled_deviation,
            cfg.delta,
        ),
        Assertion::at_most(
            format!("{prefix}.deviation_within_mode_bound"),
            cert.max_abs_deviation,
            cert.mode_bound + slack,
        ),
        Assertion::at_most(
            format!("{prefix}.mode_bound_within_analytic_bound"),
            cert.mode_bound,
            cert.analytic_bound + slack,
        ),
        Assertion::less(format!("{prefix}.gamma"), cert.gamma, cfg.delta),
        Assertion::at_most(format!("{prefix}.rk4_vs_spectral"), oracle, tol),
    ];
    conservation(&mut assertions, &prefix, &log, cfg.alpha);
    Ok(TubeCell {
        n,
        row: vec![
            n as f64,
            cert.gamma,
            cert.max_scaled_deviation,
            cert.max_abs_deviation,
            cert.mode_bound,
            cert.analytic_bound,
            oracle,
        ],
        series,
        assertions,
        modes: exact.modes.clone(),
        secs: start.elapsed().as_secs_f64(),
    })
}

fn tube(cfg: &ScenarioConfig, p: &Profile, sink: &Sink) -> Result<Outcome> {
    let cells: Vec<TubeCell> = cfg
        .n_list
        .par_iter()
        .map(|&n| tube_cell(cfg, p, n))
        .collect::<Result<_>>()?;
    let mut out = Outcome::new();
    let mut table = Table::new(
        "tube",
        &[
            "N",
            "gamma",
            "max_scaled_deviation",
            "max_abs_deviation",
            "mode_bound",
            "analytic_bound",
            "rk4_vs_spectral",
        ],
    );
    let mut plot = Vec::new();
    for c in cells {
        table.push(c.row);
        out.assertions.extend(c.assertions);
        let mut w = sink.create(&format!("tube_N{}.csv", c.n))?;
        writeln!(w, "t,max_scaled_deviation,rk4_vs_spectral")?;
        for &(t, m, d) in &c.series {
            writeln!(w, "{t},{m},{d}")?;
        }
        w.flush()?;
        let mut w = sink.create(&format!("modes_N{}.csv", c.n))?;
        c.modes.write_csv(&mut w, cfg.omega0, cfg.alpha)?;
        w.flush()?;
        plot.push(Series::new(
            format!("N={}", c.n),
            c.series.iter().map(|s| (s.0, s.1)).collect(),
        ));
        out.timings.insert(format!("N={}", c.n), c.secs);
    }
    plot.push(Series::new(
        "delta",
        vec![(0.0, cfg.delta), (cfg.horizon, cfg.delta)],
    ));
    line_chart(
        &sink.svg("tube.svg"),
        "N max|r_k|/L",
        "t",
        "scaled deviation",
        Axes::Linear,
        &plot,
    )?;
    out.tables.push(table);
    Ok(out)
}

// ---------------------------------------------------------------- continuum convergence

struct ConvCell {
    n: usize,
    err_r: f64,
    err_x: f64,
    err_f: f64,
    secs: f64,
}

fn conv_cell(
    cfg: &ScenarioConfig,
    p: &Profile,
    sol: &ContinuumSolution,
    n: usize,
) -> Result<ConvCell> {
    let start = Instant::now();
    let l = p.length();
    let h = l / n as f64;
    let s0 = init_from_profile(p, n, InitScheme::Midpoint, cfg.v)?.state;
    let grid: Vec<f64> = (0..=50).map(|i| cfg.horizon * i as f64 / 50.0).collect();

    let exact = ExactGaps::new(&s0, cfg.omega0, cfg.alpha)?;
    let err_r = grid
        .par_iter()
        .map(|&t| {
            exact
                .gaps_at(t)
                .iter()
                .enumerate()
                .fold(0.0f64, |m, (k, r)| {
                    m.max((r - h * sol.homogeneous_field(t, k as f64 * h).0).abs())
                })
        })
        .reduce(|| 0.0, f64::max);

    let mut labels: Vec<f64> = s0.x.iter().map(|&x| p.z_of_x(x)).collect();
    labels.push(labels[0] + l);
    let mut s = s0.clone();
    let mut stepper = Stepper::new(params(cfg, false), n)?;
    let dt = cfg.dt(n);
    let mut err_x = 0.0f64;
    for &t in &grid {
        if t > s.t {
            run_until(&mut s, &mut stepper, dt, t, 0, |_| {})?;
        }
        for k in 0..n {
            let (a, b) = (sol.g(t, labels[k]), sol.g(t, labels[k + 1]));
            err_x = err_x.max((s.x[k] - a).abs()).max((s.x[k] - b).abs());
        }
    }

    let emp = empirical_distribution(&s);
    let mut err_f = limit_distribution(sol, s.t, 0.0)?.abs();
    // F^{(N)} is a step function and F is increasing: the supremum sits at a
    // jump, on one side or the other
    for &y in emp.jumps() {
        let f = limit_distribution(sol, s.t, y)?;
        let above = emp.eval(y);
        err_f = err_f
            .max((above - f).abs())
            .max((above - 1.0 / n as f64 - f).abs());
    }
    Ok(ConvCell {
        n,
        err_r,
        err_x,
        err_f,
        secs: start.elapsed().as_secs_f64(),
    })
}

fn convergence(cfg: &ScenarioConfig, p: &Profile, sink: &Sink) -> Result<Outcome> {
    let sol = continuum(cfg, p)?;
    let cells: Vec<ConvCell> = cfg
        .n_list
        .par_iter()
        .map(|&n| conv_cell(cfg, p, &sol, n))
        .collect::<Result<_>>()?;
    let mut out = Outcome::new();
    let mut table = Table::new(
        "convergence",
        &["N", "gap_error", "trajectory_error", "distribution_error"],
    );
    for c in &cells {
        table.push(vec![c.n as f64, c.err_r, c.err_x, c.err_f]);
        out.timings.insert(format!("N={}", c.n), c.secs);
    }
    let pick = |f: fn(&ConvCell) -> f64| cells.iter().map(|c| (c.n, f(c))).collect::<Vec<_>>();
    let (er, ex, ef) = (pick(|c| c.err_r), pick(|c| c.err_x), pick(|c| c.err_f));
    let mut rates = rates_table(
        "convergence_rates",
        &cfg.n_list,
        &["gap_ratio", "trajectory_ratio", "distribution_ratio"],
    );
    ratio_assertions(
        &mut out.assertions,
        &mut rates,
        "convergence.gap",
        &er,
        (5.0, 12.0),
        2,
    );
    ratio_assertions(
        &mut out.assertions,
        &mut rates,
        "convergence.trajectory",
        &ex,
        (1.5, 3.0),
        3,
    );
    ratio_assertions(
        &mut out.assertions,
        &mut rates,
        "convergence.distribution",
        &ef,
        (1.5, 3.0),
        4,
    );
    if cells.len() >= 3 {
        out.assertions.push(Assertion::within(
            "convergence.gap.slope",
            estimate_rate(&er)?,
            -3.8,
            -2.2,
        ));
        out.assertions.push(Assertion::at_most(
            "convergence.trajectory.slope",
            estimate_rate(&ex)?,
            -0.8,
        ));
    }
    let series = |label: &str, e: &[(usize, f64)]| {
        Series::new(label, e.iter().map(|&(n, v)| (n as f64, v)).collect())
    };
    line_chart(
        &sink.svg("convergence.svg"),
        "discrete versus continuum",
        "N",
        "max error",
        Axes::LogLog,
        &[
            series("gap", &er),
            series("trajectory", &ex),
            series("distribution", &ef),
        ],
    )?;
    out.tables.push(table);
    out.tables.push(rates);
    Ok(out)
}

// ---------------------------------------------------------------- Euler residuals

fn random_points(cfg: &ScenarioConfig, count: usize, t_min: f64, salt: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(salt));
    let l = cfg.length();
    (0..count)
        .map(|_| (rng.gen_range(t_min..=cfg.horizon), rng.gen_range(0.0..l)))
        .collect()
}

fn uncertified(e: &Error) -> bool {
    matches!(e, Error::NotDiffeomorphic { .. } | Error::Inversion(_))
}

fn euler(cfg: &ScenarioConfig, p: &Profile, sink: &Sink) -> Result<Outcome> {
    let start = Instant::now();
    let sol = continuum(cfg, p)?;
    let h = cfg.h();
    let want = cfg.samples();
    let candidates = random_points(cfg, 20 * want, 2.0 * h, 1);
    let mut table = Table::new(
        "euler_samples",
        &[
            "t",
            "y",
            "continuity",
            "momentum",
            "lagr_continuity",
            "lagr_momentum",
            "chart_continuity",
            "chart_momentum",
            "force_form_spread",
            "density_consistency",
        ],
    );
    let mut skipped = 0usize;
    for &(t, y) in &candidates {
        if table.rows.len() == want {
            break;
        }
        let r = match euler_residuals(&sol, t, y, h) {
            Ok(r) => r,
            Err(e) if uncertified(&e) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let (cc, cm) = euler_residuals_chart(&sol, t, y)?;
        let f = force_forms(&sol, t, y, h)?;
        let spread = (f[0] - f[1]).abs().max((f[0] - f[2]).abs());
        let rho = density_velocity(&sol, t, y)?.0;
        let z = crate::fields::eulerian_jet(&sol, t, y)?.z;
        let consistency = (1.0 / sol.g_z(t, z) - sol.length() * rho).abs();
        table.push(vec![
            t,
            y,
            r.continuity,
            r.momentum,
            r.lagr_continuity,
            r.lagr_momentum,
            cc,
            cm,
            spread,
            consistency,
        ]);
    }
    let mut out = Outcome::new();
    let tol = cfg.tolerances.residual.unwrap_or(1e-4);
    let max_of = |name: &str| {
        table
            .column(name)
            .unwrap_or_default()
            .into_iter()
            .fold(0.0f64, f64::max)
    };
    out.assertions.push(Assertion::at_least(
        "euler.certified_samples",
        table.rows.len() as f64,
        want as f64,
    ));
    for name in ["continuity", "momentum", "lagr_continuity", "lagr_momentum"] {
        out.assertions.push(Assertion::at_most(
            format!("euler.{name}"),
            max_of(name),
            tol,
        ));
    }
    out.assertions.push(Assertion::at_most(
        "euler.force_form_spread",
        max_of("force_form_spread"),
        1e-6,
    ));
    out.assertions.push(Assertion::at_most(
        "euler.density_consistency",
        max_of("density_consistency"),
        1e-8,
    ));
    out.assertions.push(Assertion::at_most(
        "euler.pressure_at_unit_density",
        pressure(1.0, sol.omega1)?.abs(),
        0.0,
    ));

    // field snapshots
    let l = sol.length();
    let ys: Vec<f64> = (0..64).map(|i| l * i as f64 / 64.0).collect();
    let times: Vec<f64> = (1..=4)
        .map(|i| cfg.horizon * i as f64 / 4.0)
        .filter(|&t| t >= 2.0 * h)
        .collect();
    let mut certified_times = Vec::new();
    let (mut rho_plot, mut u_plot) = (Vec::new(), Vec::new());
    for &t in &times {
        match ys
            .iter()
            .map(|&y| density_velocity(&sol, t, y))
            .collect::<Result<Vec<_>>>()
        {
            Ok(v) => {
                certified_times.push(t);
                rho_plot.push(Series::new(
                    format!("t={t}"),
                    ys.iter().zip(&v).map(|(&y, s)| (y, s.0)).collect(),
                ));
                u_plot.push(Series::new(
                    format!("t={t}"),
                    ys.iter().zip(&v).map(|(&y, s)| (y, s.1)).collect(),
                ));
            }
            Err(e) if uncertified(&e) => {}
            Err(e) => return Err(e),
        }
    }
    let mut w = sink.create("fields.csv")?;
    write_fields_csv(&mut w, &sol, &certified_times, &ys, h)?;
    w.flush()?;
    line_chart(
        &sink.svg("density.svg"),
        "density",
        "y",
        "rho",
        Axes::Linear,
        &rho_plot,
    )?;
    line_chart(
        &sink.svg("velocity.svg"),
        "velocity",
        "y",
        "u",
        Axes::Linear,
        &u_plot,
    )?;
    out.tables.push(table);
    let mut summary = Table::new("euler_summary", &["samples", "skipped_uncertified", "h"]);
    summary.push(vec![want as f64, skipped as f64, h]);
    out.tables.push(summary);
    out.timings
        .insert("euler".into(), start.elapsed().as_secs_f64());
    Ok(out)
}

// ---------------------------------------------------------------- force limit

fn force(cfg: &ScenarioConfig, p: &Profile, sink: &Sink) -> Result<Outcome> {
    let sol = continuum(cfg, p)?;
    let want = cfg.samples();
    let mut points = Vec::with_capacity(want);
    for (t, y) in random_points(cfg, 20 * want, 0.0, 2) {
        if points.len() == want {
            break;
        }
        match force_limit(&sol, t, y) {
            Ok(target) => points.push((t, y, target)),
            Err(e) if uncertified(&e) => {}
            Err(e) => return Err(e),
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let cells: Vec<(usize, Vec<f64>, f64)> = cfg
        .n_list
        .par_iter()
        .map(|&n| -> Result<_> {
            let start = Instant::now();
            let mut s = init_from_profile(p, n, InitScheme::Midpoint, cfg.v)?.state;
            let mut stepper = Stepper::new(params(cfg, false), n)?;
            let dt = cfg.dt(n);
            let mut forces = Vec::with_capacity(points.len());
            for &(t, y, _) in &points {
                if t > s.t {
                    run_until(&mut s, &mut stepper, dt, t, 0, |_| {})?;
                }
                forces.push(discrete_force(&s, y, cfg.omega0));
            }
            Ok((n, forces, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<_>>()?;

    let mut out = Outcome::new();
    out.assertions.push(Assertion::at_least(
        "force.certified_samples",
        points.len() as f64,
        want as f64,
    ));
    // The sampled particle sits up to one gap away from y, so each error
    // carries a random sub-grid phase; the mean over points averages it out.
    let mut table = Table::new("force", &["N", "mean_error", "max_error"]);
    let mut errs = Vec::new();
    for (n, forces, secs) in &cells {
        let e: Vec<f64> = forces
            .iter()
            .zip(&points)
            .map(|(r, &(_, _, target))| (r - target).abs())
            .collect();
        let mean = e.iter().sum::<f64>() / e.len().max(1) as f64;
        errs.push((*n, mean));
        table.push(vec![
            *n as f64,
            mean,
            e.iter().fold(0.0f64, |m, &v| m.max(v)),
        ]);
        out.timings.insert(format!("N={n}"), *secs);
        let mut w = sink.create(&format!("force_N{n}.csv"))?;
        writeln!(w, "t,y,R,limit")?;
        for (r, &(t, y, target)) in forces.iter().zip(&points) {
            writeln!(w, "{t},{y},{r},{target}")?;
        }
        w.flush()?;
    }
    let mut rates = rates_table("force_rates", &cfg.n_list, &["ratio"]);
    ratio_assertions(
        &mut out.assertions,
        &mut rates,
        "force",
        &errs,
        (1.5, 3.0),
        2,
    );
    if errs.len() >= 3 {
        out.assertions.push(Assertion::at_most(
            "force.slope",
            estimate_rate(&errs)?,
            -0.8,
        ));
    }
    line_chart(
        &sink.svg("force.svg"),
        "discrete force versus -p_y/rho",
        "N",
        "mean error",
        Axes::LogLog,
        &[Series::new(
            "force",
            errs.iter().map(|&(n, e)| (n as f64, e)).collect(),
        )],
    )?;
    out.tables.push(table);
    out.tables.push(rates);
    Ok(out)
}

// ---------------------------------------------------------------- solution cross-check

fn crosscheck(cfg: &ScenarioConfig, p: &Profile, sink: &Sink) -> Result<Outcome> {
    let start = Instant::now();
    let sol = continuum(cfg, p)?;
    let free = ContinuumSolution::new(p, cfg.omega0, 0.0, cfg.v, Default::default())?;
    let pts = random_points(cfg, cfg.samples(), 0.0, 3);
    let rows: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|&(t, z)| -> Result<Vec<f64>> {
            let fourier = sol.g(t, z);
            let bessel = bessel_solution(&sol, t, z)?;
            let f0 = free.g(t, z);
            let b0 = bessel_solution(&free, t, z)?;
            let d0 = free.dalembert_solution(t, z)?;
            Ok(vec![
                t,
                z,
                fourier,
                bessel,
                (fourier - bessel).abs(),
                f0,
                b0,
                d0,
                (f0 - d0).abs().max((b0 - d0).abs()),
            ])
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(
        "crosscheck",
        &[
            "t",
            "z",
            "fourier",
            "bessel",
            "fourier_vs_bessel",
            "free_fourier",
            "free_bessel",
            "dalembert",
            "free_vs_dalembert",
        ],
    );
    rows.into_iter().for_each(|r| table.push(r));

    let h = cfg.h();
    let wave_pts = random_points(cfg, cfg.pde_samples(), 2.5 * h, 4);
    let wave_rows: Vec<Vec<f64>> = wave_pts
        .par_iter()
        .map(|&(t, z)| -> Result<Vec<f64>> {
            let r = sol.inhomogeneous_wave_check(t, z, h)?;
            Ok(vec![t, z, r.lagrangian, r.eulerian])
        })
        .collect::<Result<_>>()?;
    let mut wave = Table::new("wave_residuals", &["t", "z", "lagrangian", "eulerian"]);
    wave_rows.into_iter().for_each(|r| wave.push(r));

    let mut out = Outcome::new();
    let max_of = |t: &Table, c: &str| {
        t.column(c)
            .unwrap_or_default()
            .into_iter()
            .fold(0.0f64, f64::max)
    };
    let tol = &cfg.tolerances;
    out.assertions.push(Assertion::at_most(
        "crosscheck.fourier_vs_bessel",
        max_of(&table, "fourier_vs_bessel"),
        tol.bessel.unwrap_or(1e-6),
    ));
    out.assertions.push(Assertion::at_most(
        "crosscheck.free_vs_dalembert",
        max_of(&table, "free_vs_dalembert"),
        tol.dalembert.unwrap_or(1e-8),
    ));
    let rt = tol.residual.unwrap_or(1e-5);
    out.assertions.push(Assertion::at_most(
        "wave.lagrangian",
        max_of(&wave, "lagrangian"),
        rt,
    ));
    out.assertions.push(Assertion::at_most(
        "wave.eulerian",
        max_of(&wave, "eulerian"),
        rt,
    ));

    let l = sol.length();
    let zs: Vec<f64> = (0..=64).map(|i| l * i as f64 / 64.0).collect();
    let times: Vec<f64> = (0..=4).map(|i| cfg.horizon * i as f64 / 4.0).collect();
    let mut w = sink.create("field_dump.csv")?;
    sol.write_field_csv(&mut w, &times, &zs)?;
    w.flush()?;
    let snaps: Vec<Series> = times
        .iter()
        .map(|&t| {
            Series::new(
                format!("t={t}"),
                zs.iter()
                    .map(|&z| (z, sol.homogeneous_field(t, z).0))
                    .collect(),
            )
        })
        .collect();
    line_chart(
        &sink.svg("gap_field.svg"),
        "r(t, z) = G_z - 1",
        "z",
        "r",
        Axes::Linear,
        &snaps,
    )?;
    out.tables.push(table);
    out.tables.push(wave);
    out.timings
        .insert("crosscheck".into(), start.elapsed().as_secs_f64());
    Ok(out)
}
