//! Dispatches a validated scenario to the solvers and writes its artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use deltashock::audit::{
    totals_field, totals_particles, totals_solution, totals_spherical, BalanceRecord, BalanceReport,
    BalanceTolerances,
};
use deltashock::export::csv_table;
use deltashock::rh_ode::{integrate, AdvectedField, AdvectedSlab, ConstantTraces, FrontTrajectory, OuterField1D, Wave};
use deltashock::riemann::RiemannSolution;
use deltashock::sticky::{empirical_front, sample};
use deltashock::surface_front::{integrate_spherical, RadialField, SphericalFront, SphericalTrajectory};
use deltashock::weak_verify::{self, bump_lattice, FabricatedFront, ScaledFront, WeakSolution, WEAK_TOL};
use deltashock::{entropy_margin, DeltaFront1D, OuterState, RiemannData};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::scenario::{AuditSource, Modulation, Perturbation, Problem, Scenario};
use crate::svg::{line_plot, stacked_plot, Series};

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    /// Skip writing files (used by sweeps).
    pub dry_run: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub name: String,
    pub kind: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
    /// Error measure used by sweeps to estimate convergence orders.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub primary_error: Option<f64>,
    #[serde(skip)]
    pub table: Option<String>,
    #[serde(skip)]
    pub dir: PathBuf,
}

struct Sink {
    dir: PathBuf,
    dry_run: bool,
    files: Vec<String>,
}

impl Sink {
    fn put(&mut self, name: &str, contents: &str) -> Result<()> {
        self.files.push(name.to_string());
        if self.dry_run {
            return Ok(());
        }
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        fs::create_dir_all(&self.dir).map_err(io(&self.dir))?;
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(io(&path))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.put(name, &text)
    }
}

struct Run {
    checks: Vec<Check>,
    metrics: BTreeMap<String, f64>,
    primary_error: Option<f64>,
    table: Option<String>,
}

impl Run {
    fn new() -> Self {
        Self {
            checks: Vec::new(),
            metrics: BTreeMap::new(),
            primary_error: None,
            table: None,
        }
    }

    fn check(&mut self, name: &str, passed: bool, value: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            value,
            tolerance,
        });
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    fn balance(&mut self, report: &BalanceReport) {
        for r in &report.verdict.relations {
            self.check(&r.name, r.passed, r.margin, r.tolerance);
        }
    }
}

fn sample_times(t_end: f64, samples: usize) -> Vec<f64> {
    (0..=samples).map(|k| t_end * k as f64 / samples as f64).collect()
}

fn with_tol(mut tol: BalanceTolerances, over: Option<f64>) -> BalanceTolerances {
    if let Some(c) = over {
        tol.conservation = c;
    }
    tol
}

fn balance_csv(records: &[BalanceRecord]) -> String {
    csv_table(
        &["t", "M", "m", "P", "p", "W_kin", "w_kin", "W_int", "w_int", "total_energy"],
        records.iter().map(|r| {
            vec![
                r.t,
                r.mass_outer,
                r.mass_front,
                r.momentum_outer,
                r.momentum_front,
                r.w_kin_outer,
                r.w_kin_front,
                r.w_int_outer,
                r.w_int_front,
                r.total_energy(),
            ]
        }),
    )
}

fn budget_svg(title: &str, records: &[BalanceRecord]) -> String {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let layer = |f: fn(&BalanceRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    stacked_plot(
        title,
        "t",
        &t,
        &[
            ("W_kin (outer)", layer(|r| r.w_kin_outer)),
            ("w_kin (front)", layer(|r| r.w_kin_front)),
            ("W_int (outer)", layer(|r| r.w_int_outer)),
            ("w_int (front)", layer(|r| r.w_int_front)),
        ],
    )
}

fn write_balance(sink: &mut Sink, run: &mut Run, report: &BalanceReport) -> Result<()> {
    sink.put("balance.csv", &balance_csv(&report.records))?;
    sink.json("balance.json", report)?;
    sink.put("budget.svg", &budget_svg("energy budget", &report.records))?;
    run.balance(report);
    if let (Some(a), Some(b)) = (report.records.first(), report.records.last()) {
        run.metric("total_energy_initial", a.total_energy());
        run.metric("total_energy_final", b.total_energy());
        run.metric("total_mass_final", b.total_mass());
    }
    Ok(())
}

fn slab(state: &OuterState, wave: Option<&Modulation>) -> AdvectedSlab {
    let w = |base: f64| match wave {
        Some(m) => Wave {
            base,
            amplitude: m.amplitude,
            wavenumber: m.wavenumber,
            phase: m.phase,
        },
        None => Wave::flat(base),
    };
    AdvectedSlab {
        u: state.u,
        rho: w(state.rho),
        h_density: w(state.h_density),
    }
}

fn outer_field(
    data: &RiemannData,
    left: Option<&Modulation>,
    right: Option<&Modulation>,
) -> Box<dyn OuterField1D> {
    if left.is_none() && right.is_none() {
        Box::new(ConstantTraces::from(data))
    } else {
        Box::new(AdvectedField {
            left: slab(&data.left, left),
            right: slab(&data.right, right),
            half_length: data.half_length,
        })
    }
}

fn default_front(data: &RiemannData) -> Result<DeltaFront1D> {
    let u = deltashock::riemann::front_speed(data)?;
    Ok(DeltaFront1D {
        x: 0.0,
        u_delta: u,
        e: 0.0,
        h: 0.0,
    })
}

fn riemann_records<S: WeakSolution + ?Sized>(sol: &S, times: &[f64]) -> Result<Vec<BalanceRecord>> {
    times
        .iter()
        .map(|&t| Ok(totals_solution(&sol.snapshot(t)?)?))
        .collect()
}

fn trajectory_csv(csv: &str, stride: usize) -> String {
    let mut lines: Vec<&str> = csv.lines().collect();
    if lines.len() <= 2 || stride == 1 {
        return csv.to_string();
    }
    let last = lines.pop().expect("nonempty");
    let mut out: Vec<&str> = vec![lines[0]];
    out.extend(lines[1..].iter().step_by(stride));
    if out.last() != Some(&last) {
        out.push(last);
    }
    out.join("\n") + "\n"
}

fn front_svg(title: &str, t: &[f64], series: &[(&str, Vec<f64>)]) -> String {
    let s: Vec<Series> = series.iter().map(|(n, y)| Series::new(n, t, y)).collect();
    line_plot(title, "t", &s)
}

struct OdeRun {
    traj: FrontTrajectory,
    report: BalanceReport,
    closed_form_error: Option<f64>,
}

fn ode_run(
    s: &Scenario,
    data: &RiemannData,
    front0: Option<DeltaFront1D>,
    left: Option<&Modulation>,
    right: Option<&Modulation>,
    tol: Option<f64>,
) -> Result<OdeRun> {
    let field = outer_field(data, left, right);
    let start = match front0 {
        Some(f) => f,
        None => default_front(data)?,
    };
    let traj = integrate(start, field.as_ref(), s.time.t_end, s.time.dt)?;
    let records = sample_times(s.time.t_end, s.time.samples)
        .into_iter()
        .map(|t| {
            let f = traj.at(t).expect("sample inside the trajectory");
            Ok(totals_field(field.as_ref(), &f, t)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = BalanceReport::new(records, with_tol(BalanceTolerances::TRAJECTORY, tol));
    let closed_form_error = if front0.is_none() && left.is_none() && right.is_none() {
        let sol = RiemannSolution::new(*data)?;
        let mut err: f64 = 0.0;
        for (t, f) in traj.times.iter().zip(&traj.states) {
            let exact = sol.front(*t)?.expect("front exists");
            err = err
                .max((f.x - exact.x).abs())
                .max((f.e - exact.e).abs())
                .max((f.h - exact.h).abs());
        }
        Some(err)
    } else {
        None
    };
    Ok(OdeRun {
        traj,
        report,
        closed_form_error,
    })
}

fn particle_run(
    s: &Scenario,
    data: &RiemannData,
    tol: Option<f64>,
) -> Result<(deltashock::sticky::ParticleSystem, BalanceReport)> {
    let mut sys = sample(&data.profile(), s.numerics.particles)?;
    let mut records = Vec::new();
    for t in sample_times(s.time.t_end, s.time.samples) {
        sys.run(t);
        records.push(totals_particles(&sys));
    }
    let report = BalanceReport::new(records, with_tol(BalanceTolerances::PARTICLES, tol));
    Ok((sys, report))
}

/// Runs one scenario and writes its artifacts.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<Outcome> {
    s.validate()?;
    let dir = opts.out.clone().unwrap_or_else(|| s.output_dir());
    let mut sink = Sink {
        dir: dir.clone(),
        dry_run: opts.dry_run,
        files: Vec::new(),
    };
    let tol = opts.tol.or(s.numerics.check_tol);
    let mut run = Run::new();
    let times = sample_times(s.time.t_end, s.time.samples);

    match &s.problem {
        Problem::Riemann { data } => {
            let sol = RiemannSolution::new(*data)?;
            let records = riemann_records(&sol, &times)?;
            let report = BalanceReport::new(records, with_tol(BalanceTolerances::CLOSED_FORM, tol));
            if let Some(u) = sol.front_speed() {
                let fronts = times
                    .iter()
                    .map(|&t| Ok(sol.front(t)?.expect("front exists")))
                    .collect::<Result<Vec<_>>>()?;
                sink.put(
                    "front.csv",
                    &csv_table(
                        &["t", "x", "u_delta", "e", "h"],
                        times.iter().zip(&fronts).map(|(t, f)| vec![*t, f.x, f.u_delta, f.e, f.h]),
                    ),
                )?;
                sink.put(
                    "front.svg",
                    &front_svg(
                        "front",
                        &times,
                        &[
                            ("x(t)", fronts.iter().map(|f| f.x).collect()),
                            ("e(t)", fronts.iter().map(|f| f.e).collect()),
                            ("h(t)", fronts.iter().map(|f| f.h).collect()),
                        ],
                    ),
                )?;
                let last = fronts.last().expect("samples");
                run.metric("u_delta", u);
                run.metric("e_final", last.e);
                run.metric("h_final", last.h);
                run.metric("validity_window", sol.validity_window());
            }
            sink.json("snapshot.json", &sol.snapshot(s.time.t_end)?)?;
            write_balance(&mut sink, &mut run, &report)?;
        }

        Problem::FrontOde {
            data,
            front0,
            left_wave,
            right_wave,
        } => {
            let r = ode_run(s, data, *front0, left_wave.as_ref(), right_wave.as_ref(), tol)?;
            sink.put("trajectory.csv", &trajectory_csv(&r.traj.to_csv(), s.time.stride))?;
            let t = &r.traj.times;
            sink.put(
                "front.svg",
                &front_svg(
                    "front trajectory",
                    t,
                    &[
                        ("x(t)", r.traj.states.iter().map(|f| f.x).collect()),
                        ("e(t)", r.traj.states.iter().map(|f| f.e).collect()),
                        ("h(t)", r.traj.states.iter().map(|f| f.h).collect()),
                    ],
                ),
            )?;
            if let Some(err) = r.closed_form_error {
                let limit = tol.unwrap_or(1e-9);
                run.check("closed-form agreement", err <= limit, err, limit);
                run.primary_error = Some(err);
            }
            let last = r.traj.last().expect("nonempty trajectory");
            run.metric("x_final", last.x);
            run.metric("u_delta_final", last.u_delta);
            run.metric("e_final", last.e);
            run.metric("h_final", last.h);
            write_balance(&mut sink, &mut run, &r.report)?;
        }

        Problem::Spherical { dim, front0, .. } => {
            let start = SphericalFront::new(front0.radius, front0.speed, front0.e, front0.h, *dim)?;
            let (traj, report, margin) = if let Some(field) = s.accretion_field() {
                spherical_run(s, start, &field, tol)?
            } else {
                let field = s.static_field().expect("validated spherical field");
                spherical_run(s, start, &field, tol)?
            };
            sink.put("trajectory.csv", &trajectory_csv(&traj.to_csv(), s.time.stride))?;
            let fronts: Vec<SphericalFront> = (0..traj.len()).map(|i| traj.front(i)).collect();
            sink.put(
                "front.svg",
                &front_svg(
                    "spherical front",
                    &traj.times,
                    &[
                        ("R(t)", fronts.iter().map(|f| f.radius).collect()),
                        ("G(t)", fronts.iter().map(|f| f.speed).collect()),
                        ("mass m(t)", traj.mass.clone()),
                    ],
                ),
            )?;
            run.check("entropy margin", margin > 0.0, margin, 0.0);
            if let Some(c) = traj.collapse {
                run.metric("collapse_time", c.t);
                run.metric("collapse_radius", c.radius);
                run.metric("collapse_mass", c.mass);
                sink.json("collapse.json", &c)?;
            }
            let last = fronts.last().expect("nonempty trajectory");
            run.metric("radius_final", last.radius);
            run.metric("speed_final", last.speed);
            run.metric("mass_final", last.mass());
            write_balance(&mut sink, &mut run, &report)?;
        }

        Problem::Particles { data } => {
            let (sys, report) = particle_run(s, data, tol)?;
            sink.put("particles.csv", &sys.to_csv())?;
            sink.json("metadata.json", &sys.metadata(false))?;
            let inc = sys.stats().min_scaled_increment;
            run.check("merge energy increments", inc >= -1e-15, inc, -1e-15);
            run.metric("merges", sys.stats().merges as f64);
            let sol = RiemannSolution::new(*data)?;
            if let (Some(u), Ok(est)) = (sol.front_speed(), empirical_front(&sys, 0.0)) {
                let exact = sol.front(s.time.t_end)?.expect("front exists");
                let mass_err = (est.e - exact.e).abs() / exact.e;
                run.metric("front_speed_error", (est.u - u).abs());
                run.metric("front_mass_rel_error", mass_err);
                run.metric("front_position_error", (est.x - exact.x).abs());
                run.primary_error = Some((est.u - u).abs());
            }
            write_balance(&mut sink, &mut run, &report)?;
        }

        Problem::Verify { data, perturbation } => {
            let sol = RiemannSolution::new(*data)?;
            let limit = tol.unwrap_or(WEAK_TOL);
            let speed = match perturbation {
                Some(Perturbation::FrontSpeed(u)) => *u,
                _ => sol.front_speed().unwrap_or(0.0),
            };
            let family = bump_lattice(|t| speed * t, s.time.t_end, s.numerics.lattice_x_scale);
            let q = s.numerics.weak_quad_rel_tol;
            let report = match perturbation {
                None => weak_verify::verify(&sol, &family, limit, q)?,
                Some(Perturbation::ScaleFrontMass(f)) => {
                    weak_verify::verify(&ScaledFront { inner: sol, factor: *f }, &family, limit, q)?
                }
                Some(Perturbation::FrontSpeed(u)) => weak_verify::verify(
                    &FabricatedFront {
                        data: *data,
                        u_delta: *u,
                    },
                    &family,
                    limit,
                    q,
                )?,
            };
            sink.json("verify.json", &report)?;
            for (name, v) in [
                ("mass identity", report.max_mass),
                ("momentum identity", report.max_momentum),
                ("energy identity", report.max_energy),
            ] {
                run.check(name, v <= limit, v, limit);
            }
            run.primary_error = Some(report.max_mass.max(report.max_momentum).max(report.max_energy));
        }

        Problem::Audit {
            data,
            source,
            fabricated_speed,
        } => {
            let report = match source {
                AuditSource::Riemann => {
                    let records = match fabricated_speed {
                        Some(u) => riemann_records(
                            &FabricatedFront {
                                data: *data,
                                u_delta: *u,
                            },
                            &times,
                        )?,
                        None => riemann_records(&RiemannSolution::new(*data)?, &times)?,
                    };
                    BalanceReport::new(records, with_tol(BalanceTolerances::CLOSED_FORM, tol))
                }
                AuditSource::FrontOde => ode_run(s, data, None, None, None, tol)?.report,
                AuditSource::Particles => particle_run(s, data, tol)?.1,
            };
            run.table = Some(report.table());
            write_balance(&mut sink, &mut run, &report)?;
        }
    }

    let mut outcome = Outcome {
        name: s.name.clone(),
        kind: s.problem.kind(),
        passed: run.checks.iter().all(|c| c.passed),
        checks: run.checks,
        metrics: run.metrics,
        artifacts: Vec::new(),
        primary_error: run.primary_error,
        table: run.table,
        dir,
    };
    sink.files.push("summary.json".into());
    outcome.artifacts = sink.files.clone();
    sink.files.pop();
    sink.json("summary.json", &outcome)?;
    Ok(outcome)
}

fn spherical_run<F: RadialField>(
    s: &Scenario,
    start: SphericalFront,
    field: &F,
    tol: Option<f64>,
) -> Result<(SphericalTrajectory, BalanceReport, f64)> {
    let traj = integrate_spherical(start, field, s.time.t_end, s.time.dt)?;
    let n = traj.len();
    let samples = s.time.samples.min(n - 1).max(1);
    let mut idx: Vec<usize> = (0..=samples).map(|k| k * (n - 1) / samples).collect();
    idx.dedup();
    let records = idx
        .iter()
        .map(|&i| Ok(totals_spherical(field, &traj.front(i), traj.times[i])?))
        .collect::<Result<Vec<_>>>()?;
    let margin = (0..n)
        .map(|i| {
            let f = traj.front(i);
            let t = traj.times[i];
            // outward normal: exterior is the "+" side
            entropy_margin(
                &field.interior(f.radius, t),
                &field.exterior(f.radius, t),
                f.speed,
                1.0,
            )
        })
        .fold(f64::INFINITY, f64::min);
    let report = BalanceReport::new(records, with_tol(BalanceTolerances::TRAJECTORY, tol));
    Ok((traj, report, margin))
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<f64>,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub name: String,
    pub param: String,
    pub rows: Vec<SweepRow>,
    /// Observed convergence order: `error ~ N^(-order)` for particle counts,
    /// `error ~ dt^order` for step sizes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    pub passed: bool,
}

fn set_param(s: &mut Scenario, param: &str, value: f64) -> Result<()> {
    match param {
        "N" | "particles" => {
            if value.fract() != 0.0 || value < 2.0 {
                return Err(CliError::Validation(format!("N must be an integer >= 2, got {value}")));
            }
            s.numerics.particles = value as usize;
        }
        "dt" => s.time.dt = value,
        "t_end" => s.time.t_end = value,
        "weak_quad_rel_tol" => s.numerics.weak_quad_rel_tol = value,
        other => {
            return Err(CliError::Validation(format!(
                "unknown sweep parameter {other:?} (expected N, dt, t_end or weak_quad_rel_tol)"
            )))
        }
    }
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x` over positive pairs.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| {
        (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx) * (p.0 - mx))
    });
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs the scenario once per value of `param` and writes `sweep.json`.
pub fn sweep(s: &Scenario, param: &str, values: &[f64], opts: &RunOptions) -> Result<SweepReport> {
    if values.is_empty() {
        return Err(CliError::Validation("sweep needs at least one value".into()));
    }
    let inner = RunOptions {
        dry_run: true,
        ..opts.clone()
    };
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut variant = s.clone();
        set_param(&mut variant, param, v)?;
        let o = run_scenario(&variant, &inner)?;
        rows.push(SweepRow {
            value: v,
            passed: o.passed,
            error: o.primary_error,
            metrics: o.metrics,
        });
    }
    let slope = log_log_slope(
        &rows
            .iter()
            .filter_map(|r| r.error.map(|e| (r.value, e)))
            .collect::<Vec<_>>(),
    );
    let order = slope.map(|k| if matches!(param, "N" | "particles") { -k } else { k });
    let report = SweepReport {
        name: s.name.clone(),
        param: param.to_string(),
        passed: rows.iter().all(|r| r.passed),
        rows,
        order,
    };
    let mut sink = Sink {
        dir: opts.out.clone().unwrap_or_else(|| s.output_dir()),
        dry_run: opts.dry_run,
        files: Vec::new(),
    };
    sink.json("sweep.json", &report)?;
    Ok(report)
}

/// The scenario's Riemann data recast as a weak-identity verification.
pub fn as_verification(s: &Scenario) -> Result<Scenario> {
    if let Problem::Verify { .. } = s.problem {
        return Ok(s.clone());
    }
    let data = *s.problem.riemann_data().ok_or_else(|| {
        CliError::Validation("verify needs one-dimensional Riemann data".into())
    })?;
    Ok(Scenario {
        problem: Problem::Verify {
            data,
            perturbation: None,
        },
        ..s.clone()
    })
}
