//! The eight commands. Each writes its tables through a [`Sink`] and returns
//! a JSON summary that ends up in the run manifest.

use std::sync::Arc;

use num_complex::Complex64;
use qnm_core::barrier::{
    barrier_data, lattice, pseudopole, AngularMode, BarrierData, PseudopoleCoeffs, SecondOrderClosure,
};
use qnm_core::evolution::{
    evolve, expansion_residual, init_bump, log_slope, ringdown_fit, EvolutionRun, EvolveSettings, Grid1D, WindowSeries,
};
use qnm_core::probe::{probe_points, real_grid, zone_scan, WindowGrid};
use qnm_core::solver::{
    default_window, lattice_search, match_multisets, scaled_resonances, verify_union, Method, ModeOperator,
    OperatorKind, Rect, ResonanceList,
};
use qnm_core::spacetime::{find_horizons, PotentialProfile};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cli::{Cli, Command};
use crate::config::{MethodChoice, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Sink, Table};

const ROOT_NAMES: [&str; 4] = ["negative", "inner", "event", "cosmological"];

pub fn execute(cli: &Cli, args: &[String]) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.command.apply(&mut config);
    let resolved = toml::to_string(&config).map_err(|e| CliError::Usage(e.to_string()))?;
    config.validate(&resolved, "resolved configuration")?;

    let mut sink = Sink::new(cli.out.clone(), cli.json)?;
    let outcome = match &cli.command {
        Command::Horizons => horizons(&config, &mut sink),
        Command::Potential { .. } => potential(&config, &mut sink),
        Command::AsymptoticQnm { .. } => asymptotic(&config, &mut sink),
        Command::DirectQnm { .. } => direct(&config, &mut sink),
        Command::Compare { .. } => compare(&config, &mut sink),
        Command::Evolve { .. } => evolve_command(&config, &mut sink),
        Command::Ringdown { .. } => ringdown(&config, &mut sink),
        Command::ProbeResolvent { .. } => probe(&config, &mut sink),
    };
    let (summary, failure) = match outcome {
        Ok(Outcome { summary, failure }) => (summary, failure),
        Err(e) => {
            let summary = json!({ "error": e.to_string() });
            sink.finish(cli.command.name(), args, &config, summary)?;
            return Err(e);
        }
    };
    sink.finish(cli.command.name(), args, &config, summary)?;
    match failure {
        Some(msg) => Err(CliError::Check(msg)),
        None => Ok(()),
    }
}

/// Summary of a finished command; `failure` marks a failed internal audit
/// after all outputs were written.
struct Outcome {
    summary: Value,
    failure: Option<String>,
}

impl From<Value> for Outcome {
    fn from(summary: Value) -> Self {
        Self { summary, failure: None }
    }
}

fn c(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn profile(config: &RunConfig) -> Result<Arc<PotentialProfile>, CliError> {
    Ok(Arc::new(PotentialProfile::new(config.blackhole.params()?)?))
}

fn operator(profile: &Arc<PotentialProfile>, kind: OperatorKind, two_l: u32) -> Result<ModeOperator, CliError> {
    Ok(ModeOperator::new(kind, AngularMode::new(two_l)?, profile.clone()))
}

fn horizons(config: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    let h = find_horizons(&config.blackhole.params()?)?;
    let mut t = Table::new(&["root", "r", "kappa", "residual"]);
    for (i, name) in ROOT_NAMES.iter().enumerate() {
        t.push(vec![
            (*name).into(),
            h.roots[i].into(),
            h.kappas[i].into(),
            h.residuals[i].into(),
        ]);
    }
    sink.table("horizons", &t)?;
    Ok(json!({
        "r_minus": h.r_minus(),
        "r_plus": h.r_plus(),
        "kappa_minus": h.kappa_minus(),
        "kappa_plus": h.kappa_plus(),
        "max_residual": h.residuals.iter().copied().fold(0.0, f64::max),
    })
    .into())
}

fn barrier_summary(b: &BarrierData) -> Value {
    json!({
        "r0": b.r0,
        "x0": b.x0,
        "z0": b.z0,
        "omega": b.omega,
        "damping_unit": b.damping_unit(),
        "closed_form_mismatch": b.closed_form_mismatch(),
    })
}

fn potential(config: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    let p = profile(config)?;
    let [a, b] = config.blackhole.x_range;
    let count = config.blackhole.points;
    let rows: Vec<Vec<Cell>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let x = a + (b - a) * i as f64 / (count - 1) as f64;
            let point = p.map().point(x);
            Ok(vec![
                x.into(),
                point.r.into(),
                p.alpha_at(&point).into(),
                p.derivative_at(&point, 0)?.into(),
                p.derivative_at(&point, 1)?.into(),
                p.derivative_at(&point, 2)?.into(),
            ])
        })
        .collect::<qnm_core::Result<_>>()?;
    let mut t = Table::new(&["x", "r", "alpha", "V0", "V0p", "V0pp"]);
    rows.into_iter().for_each(|r| t.push(r));
    sink.table("potential", &t)?;
    Ok(json!({ "barrier": barrier_summary(&barrier_data(&p)?) }).into())
}

fn odd_range(r: [u32; 2]) -> Vec<u32> {
    (r[0]..=r[1]).filter(|t| t % 2 == 1).collect()
}

fn asymptotic(config: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    let p = profile(config)?;
    let b = barrier_data(&p)?;
    let s = &config.solver;
    let coeffs = PseudopoleCoeffs::new(&b, s.closure);
    let modes = odd_range(s.two_l_range)
        .into_iter()
        .map(AngularMode::new)
        .collect::<qnm_core::Result<Vec<_>>>()?;
    let ks: Vec<u32> = (s.k[0]..=s.k[1]).collect();
    let poles = lattice(&coeffs, &modes, &ks, s.order)?;
    let mut t = Table::new(&["k", "two_l", "order", "re", "im", "mirror", "multiplicity"]);
    for q in &poles {
        t.push(vec![
            q.k.into(),
            q.mode.two_l().into(),
            (q.order as u32).into(),
            q.value.re.into(),
            q.value.im.into(),
            q.mirror.into(),
            q.multiplicity.into(),
        ]);
    }
    sink.table("asymptotic", &t)?;
    Ok(json!({
        "entries": poles.len(),
        "closure": s.closure.to_string(),
        "barrier": barrier_summary(&b),
        "multiplicity": {
            "reported": "2l-1",
            "flagged": true,
            "note": "the angular degeneracy of the spherical decomposition is 2l+1",
        },
    })
    .into())
}

struct Job {
    two_l: u32,
    kind: OperatorKind,
    method: Method,
    window: Rect,
}

struct JobResult {
    list: ResonanceList,
    complete: bool,
    counted: Option<i64>,
    continuum: usize,
}

fn run_job(
    p: &Arc<PotentialProfile>,
    coeffs: &PseudopoleCoeffs,
    config: &RunConfig,
    job: &Job,
) -> Result<JobResult, CliError> {
    let op = operator(p, job.kind, job.two_l)?;
    match job.method {
        Method::Jost => {
            let report = lattice_search(&op, coeffs, job.window, &config.solver.search)?;
            Ok(JobResult {
                list: report.list,
                complete: report.complete,
                counted: Some(report.counted),
                continuum: 0,
            })
        }
        Method::Scaled => {
            let report = scaled_resonances(&op, &config.solver.scaled, job.window)?;
            let mut list = report.list;
            list.match_pseudopoles(coeffs, 64)?;
            Ok(JobResult {
                list,
                complete: true,
                counted: None,
                continuum: report.continuum.len(),
            })
        }
    }
}

fn methods(choice: MethodChoice) -> Vec<Method> {
    match choice {
        MethodChoice::Jost => vec![Method::Jost],
        MethodChoice::Scaled => vec![Method::Scaled],
        MethodChoice::Both => vec![Method::Jost, Method::Scaled],
    }
}

fn window_of(config: &RunConfig, p: &Arc<PotentialProfile>, two_l: u32) -> Result<Rect, CliError> {
    match config.solver.window {
        Some([a, b, c, d]) => Ok(Rect::new(a, b, c, d)?),
        None => Ok(default_window(&operator(p, OperatorKind::DiracMinus, two_l)?)?),
    }
}

fn direct(config: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    let p = profile(config)?;
    let coeffs = PseudopoleCoeffs::new(&barrier_data(&p)?, SecondOrderClosure::BarrierTop);
    let s = &config.solver;
    let mut jobs = Vec::new();
    for &two_l in &s.two_l {
        let base = window_of(config, &p, two_l)?;
        let windows = if s.mirror {
            vec![base, base.mirrored()]
        } else {
            vec![base]
        };
        for &kind in &s.kinds {
            for method in methods(s.method) {
                for &window in &windows {
                    jobs.push(Job {
                        two_l,
                        kind,
                        method,
                        window,
                    });
                }
            }
        }
    }
    let results: Vec<JobResult> = jobs
        .par_iter()
        .map(|job| run_job(&p, &coeffs, config, job))
        .collect::<Result<_, _>>()?;

    let mut t = Table::new(&[
        "two_l",
        "kind",
        "method",
        "re",
        "im",
        "residual",
        "matched_k",
        "pseudopole_err",
    ]);
    let mut job_summaries = Vec::new();
    let mut incomplete = Vec::new();
    for (job, r) in jobs.iter().zip(&results) {
        for e in &r.list.entries {
            t.push(vec![
                job.two_l.into(),
                job.kind.name().into(),
                job.method.to_string().as_str().into(),
                e.lambda.re.into(),
                e.lambda.im.into(),
                e.residual.into(),
                e.matched.map(|m| m.k).into(),
                e.matched.map(|m| m.distance).into(),
            ]);
        }
        if !r.complete {
            incomplete.push(format!("{} {} 2l={}", job.kind, job.method, job.two_l));
        }
        job_summaries.push(json!({
            "two_l": job.two_l,
            "kind": job.kind.name(),
            "method": job.method.to_string(),
            "window": [job.window.re_min, job.window.re_max, job.window.im_min, job.window.im_max],
            "found": r.list.len(),
            "counted": r.counted,
            "complete": r.complete,
            "continuum": r.continuum,
        }));
    }
    sink.table("direct", &t)?;

    let gather = |two_l: u32, method: Method, kind: OperatorKind| -> ResonanceList {
        let entries = jobs
            .iter()
            .zip(&results)
            .filter(|(j, _)| j.two_l == two_l && j.method == method && j.kind == kind)
            .flat_map(|(_, r)| r.list.entries.clone())
            .collect();
        ResonanceList::new(entries)
    };
    let mut identities = Vec::new();
    let mut cross = Vec::new();
    for &two_l in &s.two_l {
        if s.mirror && OperatorKind::ALL.iter().all(|k| s.kinds.contains(k)) {
            for method in methods(s.method) {
                let lists: Vec<(OperatorKind, ResonanceList)> = OperatorKind::ALL
                    .iter()
                    .map(|&k| (k, gather(two_l, method, k)))
                    .collect();
                let refs: Vec<(OperatorKind, &ResonanceList)> = lists.iter().map(|(k, l)| (*k, l)).collect();
                let report = verify_union(Some(two_l), &refs, s.union_tol);
                identities.push(json!({
                    "two_l": two_l,
                    "method": method.to_string(),
                    "holds": report.holds(),
                    "max_mismatch": report.max_mismatch(),
                    "checks": report.checks.iter().map(|c| json!({"name": c.name, "holds": c.holds})).collect::<Vec<_>>(),
                }));
            }
        }
        if s.method == MethodChoice::Both {
            for &kind in &s.kinds {
                let jost = gather(two_l, Method::Jost, kind).lambdas();
                let scaled = gather(two_l, Method::Scaled, kind).lambdas();
                let m = match_multisets(&jost, &scaled, 1e-3);
                cross.push(json!({
                    "two_l": two_l,
                    "kind": kind.name(),
                    "matched": m.pairs.len(),
                    "jost_only": m.unmatched_left.iter().map(|z| c(*z)).collect::<Vec<_>>(),
                    "scaled_only": m.unmatched_right.iter().map(|z| c(*z)).collect::<Vec<_>>(),
                    "max_distance": m.max_distance,
                }));
            }
        }
    }
    let summary = json!({ "jobs": job_summaries, "identities": identities, "cross_validation": cross });
    let failure =
        (!incomplete.is_empty()).then(|| format!("zero count audit incomplete for {}", incomplete.join(", ")));
    Ok(Outcome { summary, failure })
}

/// Errors of the truncation orders against the direct resonance nearest to
/// the order-2 pseudopole of overtone `k`.
fn compare(config: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    let p = profile(config)?;
    let b = barrier_data(&p)?;
    let top = PseudopoleCoeffs::new(&b, SecondOrderClosure::BarrierTop);
    let literal = top.with_closure(SecondOrderClosure::Literal);
    let s = &config.solver;
    let kind = s.kinds.first().copied().unwrap_or(OperatorKind::DiracMinus);
    let gamma = b.damping_unit();
    let searches: Vec<(u32, ResonanceList, bool)> = s
        .two_l
        .par_iter()
        .map(|&two_l| {
            let op = operator(&p, kind, two_l)?;
            let nz = op.n() * b.z0;
            let depth = (s.k[1] + 1) as f64 * gamma;
            let window = Rect::new(0.6 * nz, 1.4 * nz, -depth, -0.01)?;
            let report = lattice_search(&op, &top, window, &s.search)?;
            Ok((two_l, report.list, report.complete))
        })
        .collect::<Result<_, CliError>>()?;

    let mut t = Table::new(&[
        "two_l",
        "k",
        "re_direct",
        "im_direct",
        "err_order0",
        "err_order1",
        "err_order2",
        "err_order2_literal",
    ]);
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for (two_l, list, complete) in &searches {
        let mode = AngularMode::new(*two_l)?;
        for k in s.k[0]..=s.k[1] {
            let target = pseudopole(&top, k, mode, 2)?.value;
            let nearest = list
                .lambdas()
                .into_iter()
                .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
                .filter(|z| (z - target).norm() < 0.5 * gamma);
            let Some(direct) = nearest else {
                missing.push(format!("2l={two_l} k={k}"));
                t.push(vec![
                    (*two_l).into(),
                    k.into(),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                ]);
                continue;
            };
            let err = |coeffs: &PseudopoleCoeffs, order: u8| {
                pseudopole(coeffs, k, mode, order).map(|q| (q.value - direct).norm())
            };
            let e = [err(&top, 0)?, err(&top, 1)?, err(&top, 2)?, err(&literal, 2)?];
            t.push(vec![
                (*two_l).into(),
                k.into(),
                direct.re.into(),
                direct.im.into(),
                e[0].into(),
                e[1].into(),
                e[2].into(),
                e[3].into(),
            ]);
            rows.push(json!({
                "two_l": two_l,
                "k": k,
                "shrinking": e[0] > e[1] && e[1] > e[2],
                "literal_shrinking": e[1] > e[3],
                "search_complete": complete,
            }));
        }
    }
    sink.table("compare", &t)?;
    let summary = json!({ "kind": kind.name(), "rows": rows, "missing": missing });
    let failure =
        (!missing.is_empty()).then(|| format!("no direct resonance near the pseudopoles {}", missing.join(", ")));
    Ok(Outcome { summary, failure })
}

fn spinor_mix(m: [f64; 4]) -> [Complex64; 2] {
    [Complex64::new(m[0], m[1]), Complex64::new(m[2], m[3])]
}

fn evolution_run(
    config: &RunConfig,
    p: &Arc<PotentialProfile>,
    dx: f64,
    t_end: f64,
    snapshot_every: usize,
) -> Result<(ModeOperator, EvolutionRun), CliError> {
    let ev = &config.evolution;
    let op = operator(p, ev.kind, ev.two_l)?;
    let grid = Grid1D::covering(&op, dx, ev.margin)?;
    let field = init_bump(&grid, ev.bump[0], ev.bump[1], spinor_mix(ev.mix))?;
    let dt = ev.stepping.courant * dx;
    let settings = EvolveSettings {
        output_every: ((ev.sample_interval / dt).round() as usize).max(1),
        snapshot_every,
        ..ev.stepping
    };
    let run = evolve(&op, &grid, field, t_end, (ev.window[0], ev.window[1]), &settings)?;
    Ok((op, run))
}

fn trace_table(run: &EvolutionRun) -> Table {
    let mut t = Table::new(&["t", "global", "local"]);
    let tr = &run.trace;
    for i in 0..tr.times.len() {
        t.push(vec![
            tr.times[i].into(),
            tr.global_norm[i].into(),
            tr.local_norm[i].into(),
        ]);
    }
    t
}

fn observer_table(run: &EvolutionRun) -> Table {
    let mut t = Table::new(&["t", "re_u", "im_u", "re_v", "im_v"]);
    for (time, [u, v]) in run.trace.times.iter().zip(&run.observed) {
        t.push(vec![(*time).into(), u.re.into(), u.im.into(), v.re.into(), v.im.into()]);
    }
    t
}

fn evolve_command(config: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    let p = profile(config)?;
    let ev = &config.evolution;
    let (op, run) = evolution_run(config, &p, ev.dx, ev.t_end, ev.stepping.snapshot_every)?;
    sink.table("trace", &trace_table(&run))?;
    sink.table("observer", &observer_table(&run))?;
    for (i, snap) in run.snapshots.iter().enumerate() {
        sink.bytes(&format!("snapshot_{i:04}.bin"), &snap.to_bytes())?;
    }
    let grid = Grid1D::covering(&op, ev.dx, ev.margin)?;
    Ok(json!({
        "grid": { "x_min": grid.x_min, "x_max": grid.x_max, "points": grid.points, "dx": grid.dx() },
        "norm_drift": run.trace.norm_drift(),
        "outflow_time": run.trace.outflow_time,
        "samples": run.trace.times.len(),
        "snapshots": run.snapshots.len(),
    })
    .into())
}

/// Solver resonances of the evolved mode down to `depth`, with mirrors.
fn basis(
    op: &ModeOperator,
    b: &BarrierData,
    depth: f64,
    config: &RunConfig,
) -> Result<(Vec<Complex64>, bool), CliError> {
    let coeffs = PseudopoleCoeffs::new(b, SecondOrderClosure::BarrierTop);
    let nz = op.n() * b.z0;
    let window = Rect::new(0.6 * nz, 1.4 * nz, -depth, -0.01)?;
    let report = lattice_search(op, &coeffs, window, &config.solver.search)?;
    let all = report.list.lambdas().iter().flat_map(|z| [*z, -z.conj()]).collect();
    Ok((all, report.complete))
}

fn ringdown(config: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    let p = profile(config)?;
    let b = barrier_data(&p)?;
    let ev = &config.evolution;
    let [t0, t1] = ev.fit_window;
    let (op, run) = evolution_run(config, &p, ev.dx, ev.t_end, 0)?;
    let (known, complete) = basis(&op, &b, ev.basis_depth, config)?;
    let least = known
        .iter()
        .copied()
        .max_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)))
        .ok_or_else(|| CliError::Check("no solver resonance within the basis depth".into()))?;

    let u: Vec<Complex64> = run.observed.iter().map(|o| o[0]).collect();
    let fit = ringdown_fit(&run.trace.times, &u, t0, t1, &ev.fit)?;
    let mut t = Table::new(&["index", "re", "im", "re_amplitude", "im_amplitude"]);
    for (i, m) in fit.modes.iter().enumerate() {
        t.push(vec![
            i.into(),
            m.lambda.re.into(),
            m.lambda.im.into(),
            m.amplitude.re.into(),
            m.amplitude.im.into(),
        ]);
    }
    sink.table("ringdown", &t)?;
    sink.table("trace", &trace_table(&run))?;
    let slope = log_slope(&run.trace.times, &run.trace.local_norm, t0, t1)?;
    let dominant = fit.dominant().map(|m| m.lambda);
    let errors = dominant
        .map(|d| json!({ "re": (d.re.abs() / least.re.abs() - 1.0).abs(), "im": (d.im / least.im - 1.0).abs() }));

    let mut residual = Value::Null;
    if ev.strings > 0 {
        let mut depths: Vec<f64> = known.iter().map(|z| -z.im).collect();
        depths.sort_by(f64::total_cmp);
        depths.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        if depths.len() <= ev.strings {
            return Err(CliError::Check(format!(
                "basis depth {} holds {} strings, need more than {}",
                ev.basis_depth,
                depths.len(),
                ev.strings
            )));
        }
        let mu = 0.5 * (depths[ev.strings - 1] + depths[ev.strings]);
        let (coarse, fine) = rayon::join(
            || evolution_run(config, &p, ev.residual_dx, ev.residual_t_end, 0),
            || evolution_run(config, &p, 0.5 * ev.residual_dx, ev.residual_t_end, 0),
        );
        let series = WindowSeries::richardson(&coarse?.1.window, &fine?.1.window)?;
        let r = expansion_residual(&series, &known, mu, ev.residual_window[0], ev.residual_window[1], 1.0)?;
        let mut rt = Table::new(&["t", "residual"]);
        for (time, value) in r.times.iter().zip(&r.residual) {
            rt.push(vec![(*time).into(), (*value).into()]);
        }
        sink.table("residual", &rt)?;
        residual = json!({
            "mu": mu,
            "used": r.used.iter().map(|z| c(*z)).collect::<Vec<_>>(),
            "slope": r.slope,
            "last_kept_depth": depths[ev.strings - 1],
        });
    }

    Ok(json!({
        "dominant": dominant.map(c),
        "least_damped": c(least),
        "relative_error": errors,
        "fit": { "order": fit.modes.len(), "requested_order": fit.requested_order, "reduced": fit.reduced, "residual": fit.residual },
        "local_slope": slope,
        "slope_error": (slope / least.im - 1.0).abs(),
        "norm_drift": run.trace.norm_drift(),
        "basis_complete": complete,
        "expansion_residual": residual,
    })
    .into())
}

fn probe(config: &RunConfig, sink: &mut Sink) -> Result<Outcome, CliError> {
    let p = profile(config)?;
    let b = barrier_data(&p)?;
    let pr = &config.probe;
    let jost = &config.solver.search.jost;
    let grid = WindowGrid::new(pr.window[0], pr.window[1], pr.points)?;
    let mut t = Table::new(&[
        "two_l",
        "zone",
        "re_lambda",
        "dirac_norm",
        "schrodinger_norm",
        "dirac_weighted",
        "schrodinger_weighted",
        "chain_ratio",
        "chain_bound",
    ]);
    let mut scans = Vec::new();
    for &two_l in &pr.two_l {
        let op = operator(&p, OperatorKind::DiracMinus, two_l)?;
        let nz = op.n() * b.z0;
        let lambdas = real_grid(nz / pr.zone_r, 0.5 * nz, pr.samples);
        let scan = zone_scan(&op, jost, &grid, &lambdas)?;
        let origin = if pr.include_zero {
            probe_points(&op, jost, &grid, &[Complex64::new(0.0, 0.0)])?
        } else {
            Vec::new()
        };
        let rows = origin
            .iter()
            .map(|s| ("origin", s))
            .chain(scan.samples.iter().map(|s| ("zone", s)));
        for (zone, s) in rows {
            // Zero energy is a threshold resonance of the Schrodinger partners,
            // so only the Dirac columns are meaningful at the origin.
            let schr = |v: f64| if zone == "origin" { Cell::Empty } else { v.into() };
            t.push(vec![
                two_l.into(),
                zone.into(),
                s.lambda.re.into(),
                s.dirac_norm.into(),
                schr(s.schrodinger_norm),
                s.dirac_weighted.into(),
                schr(s.schrodinger_weighted),
                schr(s.chain_ratio),
                s.chain_bound.into(),
            ]);
        }
        scans.push(json!({
            "two_l": two_l,
            "sup_dirac_weighted": scan.sup_dirac,
            "sup_schrodinger_weighted": scan.sup_schrodinger,
            "max_chain_ratio": scan.samples.iter().map(|s| s.chain_ratio).fold(0.0, f64::max),
            "origin_dirac_norm": origin.first().map(|s| s.dirac_norm),
        }));
    }
    sink.table("probe", &t)?;
    Ok(json!({ "scans": scans }).into())
}
