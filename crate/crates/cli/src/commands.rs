use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use aniso_tv::exactgeo::{
    aniso_perimeter, build_fractal_certificate, check_certificate, fractal_target, measure_of, CertificateField,
    CertificateReport, CurveMeasure, Shape, Side,
};
use aniso_tv::gallery::{self, shapes, ScenarioReport};
use aniso_tv::grid::{coarea_tv, tv_phi, GridDomain, GridFunction};
use aniso_tv::icheck::{
    brute_force_ic, dual_ic, global_inequality_check, DualConfig, GlobalCheck, IcQuery, IcReport, SearchMode,
    SmallVolume, Verdict,
};
use aniso_tv::scenario::{Instance, Scenario};
use aniso_tv::solve::{minimize_phi, minimize_phi_hat, Functional, SolveConfig, SolveError, SolveReport};
use aniso_tv::{Integrand, IntegrandSpec};

use crate::io::{self, emit, json_arg, CliError, EXIT_FAILED, EXIT_NOT_CONVERGED, EXIT_PASS, SCHEMA_VERSION};
use crate::{
    CertificateArgs, Cli, CoareaArgs, Command, FieldArg, GalleryCommand, GalleryRunArgs, IcCheckArgs, IcMode,
    IntegrandArgs, MeasureArgs, PerimeterArgs, SideArg, SolveArgs,
};

pub fn dispatch(cli: &Cli) -> Result<u8, CliError> {
    let v = cli.verbose;
    match &cli.command {
        Command::Perimeter(a) => perimeter(a),
        Command::Measure(a) => measure(a),
        Command::IcCheck(a) => ic_check(a, v),
        Command::Certificate(a) => certificate(a, v),
        Command::Solve(a) => solve(a, v),
        Command::Gallery(GalleryCommand::List { json }) => gallery_list(*json),
        Command::Gallery(GalleryCommand::Run(a)) => gallery_run(a, v),
        Command::CoareaTest(a) => coarea_test(a),
    }
}

fn progress(verbose: u8, msg: impl FnOnce() -> String) {
    if verbose > 0 {
        eprintln!("{}", msg());
    }
}

fn integrand(a: &IntegrandArgs) -> Result<Integrand, CliError> {
    IntegrandSpec {
        name: a.integrand.clone(),
        coefficients: a.coefficients.clone(),
        mirrored: a.mirrored,
    }
    .build()
    .map_err(|e| CliError::Usage(e.to_string()))
}

fn shape(arg: &str) -> Result<Shape, CliError> {
    let s: Shape = json_arg(arg)?;
    s.validate().map_err(|e| CliError::Usage(format!("shape: {e}")))?;
    Ok(s)
}

fn pass_code(ok: bool) -> u8 {
    if ok {
        EXIT_PASS
    } else {
        EXIT_FAILED
    }
}

// ---------------------------------------------------------------- geometry

fn perimeter(a: &PerimeterArgs) -> Result<u8, CliError> {
    let s = shape(&a.shape)?;
    let phi = integrand(&a.integrand)?;
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "perimeter",
        "shape": s,
        "integrand": phi.name(),
        "perimeter": aniso_perimeter(&s, &phi),
        "euclidean_perimeter": s.perimeter(),
        "area": s.area(),
    });
    emit(&out, a.out.as_deref())?;
    Ok(EXIT_PASS)
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(CurveMeasure),
    Many(Vec<CurveMeasure>),
}

fn measure(a: &MeasureArgs) -> Result<u8, CliError> {
    let curves = match json_arg::<OneOrMany>(&a.curve)? {
        OneOrMany::One(c) => vec![c],
        OneOrMany::Many(v) => v,
    };
    let s = shape(&a.shape)?;
    let side = match a.side {
        SideArg::Closure => Side::Closure,
        SideArg::Interior => Side::Interior,
    };
    let mut mass = 0.0;
    let mut per = Vec::new();
    for c in &curves {
        let m = measure_of(c, &s, side).map_err(|e| CliError::Usage(e.to_string()))?;
        per.push(m);
        mass += m;
    }
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "measure",
        "side": side,
        "mass": mass,
        "per_curve": per,
        "total_mass": curves.iter().map(CurveMeasure::total_mass).sum::<f64>(),
    });
    emit(&out, a.out.as_deref())?;
    Ok(EXIT_PASS)
}

// ------------------------------------------------------------------ ic-check

fn load_scenario(path: &Path, h: Option<f64>) -> Result<(Scenario, Instance), CliError> {
    let p = path.display().to_string();
    let text = io::read_text(&p)?;
    let mut sc = Scenario::from_json(&text).map_err(|e| CliError::Input {
        path: p.clone(),
        message: e.to_string(),
    })?;
    if let Some(h) = h {
        sc.domain = sc.domain.with_h(h);
    }
    let inst = sc.build().map_err(|e| CliError::Input {
        path: p,
        message: e.to_string(),
    })?;
    Ok((sc, inst))
}

#[derive(Serialize)]
struct IcOutput {
    schema_version: u32,
    command: &'static str,
    cells: usize,
    h: f64,
    report: IcReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_check: Option<GlobalCheck>,
}

/// Indicators of the reported worst set with both signs, plus random
/// functions with a few levels.
fn test_functions(n: usize, worst: &[usize], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Vec::with_capacity(count + 2);
    let mut ind = vec![0.0; n];
    for &k in worst {
        ind[k] = 1.0;
    }
    v.push(ind.iter().map(|x| -x).collect());
    v.push(ind);
    for _ in 0..count {
        v.push((0..n).map(|_| rng.random_range(-2i32..=2) as f64 * 0.5).collect());
    }
    v
}

fn ic_check(a: &IcCheckArgs, verbose: u8) -> Result<u8, CliError> {
    let (_, inst) = load_scenario(&a.scenario, a.h)?;
    let mut q = IcQuery::new(inst.measure, inst.integrand, a.constant).direction(a.direction.into());
    q.seed = io::seed(a.seed)?;
    if let Some(sv) = &a.small_volume {
        if sv.len() != 2 {
            return Err(CliError::Usage("--small-volume takes eps,delta".into()));
        }
        if matches!(a.mode, IcMode::Dual | IcMode::Certificate) {
            return Err(CliError::Usage("--small-volume applies to the exhaustive and anneal modes".into()));
        }
        q.small_volume = Some(SmallVolume {
            eps: sv[0],
            delta: sv[1],
        });
    }
    let dom = &inst.domain;
    progress(verbose, || format!("ic-check: {} cells, mode {:?}", dom.n_cells(), a.mode));
    let (report, cross) = match a.mode {
        IcMode::Exhaustive => (brute_force_ic(&q, dom, SearchMode::Exhaustive)?, None),
        IcMode::Anneal => (brute_force_ic(&q, dom, SearchMode::Anneal)?, None),
        IcMode::Dual => (dual_ic(&q, dom, &DualConfig::default())?, None),
        IcMode::Certificate => {
            let r = dual_ic(&q, dom, &DualConfig::default())?;
            let worst = r.dual_norm_estimate.as_ref().map(|d| d.worst_set.clone()).unwrap_or_default();
            let samples = test_functions(dom.n_cells(), &worst, a.samples, q.seed);
            let g = global_inequality_check(&samples, &q, dom, r.verdict);
            (r, Some(g))
        }
    };
    let ok = report.verdict == Verdict::Holds && !cross.as_ref().is_some_and(|g| g.inconsistent);
    let out = IcOutput {
        schema_version: SCHEMA_VERSION,
        command: "ic-check",
        cells: dom.n_cells(),
        h: dom.h(),
        report,
        cross_check: cross,
    };
    emit(&out, a.out.as_deref())?;
    Ok(pass_code(ok))
}

// --------------------------------------------------------------- certificate

fn certificate(a: &CertificateArgs, verbose: u8) -> Result<u8, CliError> {
    let (field, target, battery, phi) = match a.field {
        FieldArg::TwoCircles => {
            if !(a.theta > 0.0 && a.theta <= 1.0) {
                return Err(CliError::Usage("--theta must lie in (0, 1]".into()));
            }
            let target = vec![
                CurveMeasure::circle([0.0, 0.0], 2.0, 1.0 + 0.5 * a.theta),
                CurveMeasure::circle([0.0, 0.0], 1.0, -a.theta),
            ];
            (CertificateField::two_circles(a.theta), target, shapes::two_circles(), Integrand::isotropic())
        }
        FieldArg::Alternating => (
            CertificateField::alternating(),
            gallery::alternating_target(),
            shapes::alternating(),
            Integrand::isotropic(),
        ),
        FieldArg::Fractal => {
            let f = build_fractal_certificate(a.level).map_err(|e| CliError::Usage(e.to_string()))?;
            (f, fractal_target(a.level), shapes::triangle(a.level), Integrand::quadrant())
        }
    };
    let battery = match &a.shapes {
        Some(s) => json_arg::<Vec<Shape>>(s)?,
        None => battery,
    };
    progress(verbose, || format!("certificate: {} test shapes", battery.len()));
    let cr: CertificateReport =
        check_certificate(&field, &target, &battery, &phi).map_err(|e| CliError::Usage(e.to_string()))?;
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "certificate",
        "field": field,
        "integrand": phi.name(),
        "shapes": battery,
        "report": cr,
    });
    emit(&out, a.out.as_deref())?;
    Ok(pass_code(cr.pass))
}

// --------------------------------------------------------------------- solve

#[derive(Serialize)]
struct SolveOutput<'a> {
    schema_version: u32,
    command: &'static str,
    functional: Functional,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    h: f64,
    cells: usize,
    config: SolveConfig,
    scenario: &'a Scenario,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<SolveReport>,
}

fn write_csv(path: &Path, dom: &GridDomain, w: &GridFunction) -> Result<(), CliError> {
    let err = |e: csv::Error| CliError::Output {
        path: path.display().to_string(),
        source: e.into(),
    };
    let mut wr = csv::Writer::from_path(path).map_err(err)?;
    wr.write_record(["cell", "x", "y", "value"]).map_err(err)?;
    for (k, v) in w.values.iter().enumerate() {
        let c = dom.center(k);
        wr.serialize((k, c[0], c[1], v)).map_err(err)?;
    }
    wr.flush().map_err(|source| CliError::Output {
        path: path.display().to_string(),
        source,
    })
}

fn solve(a: &SolveArgs, verbose: u8) -> Result<u8, CliError> {
    let (sc, inst) = load_scenario(&a.scenario, a.h)?;
    let mut cfg = sc.solve.unwrap_or_default();
    if let Some(m) = a.method {
        cfg.method = m.into();
    }
    if let Some(n) = a.max_iters {
        cfg.max_iters = n;
    }
    if let Some(t) = a.tol {
        cfg.tol_primal_dual = t;
    }
    if let Some(s) = a.snapshot_stride {
        cfg.snapshot_stride = s;
    }
    cfg.seed = io::seed(cfg.seed)?;
    cfg.validate()?;
    let functional: Functional = a.functional.into();
    let Instance {
        domain: dom,
        integrand: phi,
        measure: mu,
        u0,
    } = inst;
    progress(verbose, || format!("solve: {} cells, {:?}", dom.n_cells(), cfg.method));
    let result = match functional {
        Functional::Phi => minimize_phi(&dom, &phi, &mu, &u0, &cfg),
        Functional::PhiHat => minimize_phi_hat(&dom, &phi, &mu, &u0, &cfg),
    };
    let (status, message, report, code) = match result {
        Ok(r) => ("converged", None, Some(r), EXIT_PASS),
        Err(e @ SolveError::NotConverged { .. }) => {
            let msg = e.to_string();
            let SolveError::NotConverged { report, .. } = e else { unreachable!() };
            ("not_converged", Some(msg), Some(*report), EXIT_NOT_CONVERGED)
        }
        Err(e @ SolveError::UnboundedDetected { .. }) => ("unbounded_detected", Some(e.to_string()), None, EXIT_NOT_CONVERGED),
        Err(e) => return Err(e.into()),
    };
    if let (Some(path), Some(r)) = (&a.csv, &report) {
        write_csv(path, &dom, &r.minimizer)?;
    }
    if let Some(m) = &message {
        eprintln!("aniso-tv: {m}");
    }
    let out = SolveOutput {
        schema_version: SCHEMA_VERSION,
        command: "solve",
        functional,
        status,
        message,
        h: dom.h(),
        cells: dom.n_cells(),
        config: cfg,
        scenario: &sc,
        report,
    };
    emit(&out, a.report.as_deref())?;
    Ok(code)
}

// ------------------------------------------------------------------- gallery

fn gallery_list(as_json: bool) -> Result<u8, CliError> {
    let cat = gallery::catalog();
    if as_json {
        emit(&json!({ "schema_version": SCHEMA_VERSION, "scenarios": cat }), None)?;
    } else {
        for s in cat {
            println!("{:<22} {}", s.name, s.title);
        }
    }
    Ok(EXIT_PASS)
}

fn parse_set(items: &[String]) -> Result<Map<String, Value>, CliError> {
    let mut m = Map::new();
    for it in items {
        let (k, v) = it
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{it}`")))?;
        let v = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.into()));
        m.insert(k.trim().into(), v);
    }
    Ok(m)
}

/// Overrides for one scenario: config, then `--set`, then the seed from
/// the environment when the scenario takes one.
fn overrides(name: &str, base: Option<&Value>, set: &Map<String, Value>) -> Result<Value, CliError> {
    let mut m = match base {
        None | Some(Value::Null) => Map::new(),
        Some(Value::Object(o)) => o.clone(),
        Some(_) => return Err(CliError::Usage(format!("overrides for `{name}` must be a JSON object"))),
    };
    m.extend(set.clone());
    let takes_seed = gallery::catalog()
        .iter()
        .any(|s| s.name == name && s.defaults.get("seed").is_some());
    if takes_seed && std::env::var_os("ANISO_TV_SEED").is_some() {
        m.insert("seed".into(), json!(io::seed(0)?));
    }
    Ok(if m.is_empty() { Value::Null } else { Value::Object(m) })
}

fn summarize(r: &ScenarioReport) {
    let failed: Vec<&str> = r.failed_checks().map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        eprintln!("{}: pass ({} checks)", r.scenario, r.checks.len());
    } else {
        eprintln!("{}: FAIL ({} of {} checks): {}", r.scenario, failed.len(), r.checks.len(), failed.join("; "));
    }
}

fn gallery_run(a: &GalleryRunArgs, verbose: u8) -> Result<u8, CliError> {
    let config: Option<Value> = a.config.as_deref().map(json_arg).transpose()?;
    let set = parse_set(&a.set)?;
    if !a.all {
        let name = a.name.as_deref().expect("clap requires a name without --all");
        let ov = overrides(name, config.as_ref(), &set)?;
        progress(verbose, || format!("gallery: running {name}"));
        let r = gallery::run(name, ov)?;
        summarize(&r);
        emit(&r, a.out.as_deref())?;
        return Ok(pass_code(r.passed));
    }
    if !set.is_empty() {
        return Err(CliError::Usage("--set applies to a single scenario; use --config with --all".into()));
    }
    let per_name = match &config {
        None => Map::new(),
        Some(Value::Object(o)) => o.clone(),
        Some(_) => return Err(CliError::Usage("--config with --all must map scenario names to overrides".into())),
    };
    let names = gallery::names();
    if let Some(k) = per_name.keys().find(|k| !names.contains(&k.as_str())) {
        return Err(CliError::Usage(format!("unknown scenario `{k}` in --config")));
    }
    let jobs: Vec<(&str, Value)> = names
        .iter()
        .map(|&n| Ok((n, overrides(n, per_name.get(n), &Map::new())?)))
        .collect::<Result<_, CliError>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.max(1))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let results: Vec<Result<ScenarioReport, CliError>> = pool.install(|| {
        jobs.into_par_iter()
            .map(|(n, ov)| {
                progress(verbose, || format!("gallery: running {n}"));
                gallery::run(n, ov).map_err(CliError::from)
            })
            .collect()
    });
    let mut reports = Vec::new();
    let mut worst = EXIT_PASS;
    for (n, r) in names.iter().zip(results) {
        match r {
            Ok(r) => {
                summarize(&r);
                if !r.passed {
                    worst = worst.max(EXIT_FAILED);
                }
                reports.push(r);
            }
            Err(e) => {
                eprintln!("{n}: {e}");
                worst = worst.max(e.code());
            }
        }
    }
    emit(&reports, a.out.as_deref())?;
    Ok(worst)
}

// --------------------------------------------------------------- coarea-test

fn coarea_test(a: &CoareaArgs) -> Result<u8, CliError> {
    if a.max_side == 0 {
        return Err(CliError::Usage("--max-side must be at least 1".into()));
    }
    let phi = integrand(&a.integrand)?;
    let mut rng = ChaCha8Rng::seed_from_u64(io::seed(a.seed)?);
    let mut max_rel: f64 = 0.0;
    let mut failures = 0usize;
    for _ in 0..a.cases {
        let nx = rng.random_range(1..=a.max_side);
        let ny = rng.random_range(1..=a.max_side);
        let h = 1.0 / nx.max(ny) as f64;
        let dom = GridDomain::rect(nx, ny, h, [0.0, 0.0]);
        // a few repeated levels exercise ties between cells and the datum
        let levels: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut pick = || levels[rng.random_range(0..levels.len())];
        let values: Vec<f64> = (0..dom.n_cells()).map(|_| pick()).collect();
        let datum: Vec<f64> = (0..dom.boundary_edges().len()).map(|_| pick()).collect();
        let w = GridFunction::new(&dom, values, datum).map_err(|e| CliError::Failed(e.to_string()))?;
        let (c, t) = (coarea_tv(&w, &dom, &phi), tv_phi(&w, &dom, &phi));
        let rel = (c - t).abs() / t.abs().max(1e-300);
        let rel = if t == 0.0 && c == 0.0 { 0.0 } else { rel };
        max_rel = max_rel.max(rel);
        if rel > 1e-10 {
            failures += 1;
        }
    }
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "coarea-test",
        "integrand": phi.name(),
        "cases": a.cases,
        "max_relative_error": max_rel,
        "failures": failures,
        "tolerance": 1e-10,
    });
    emit(&out, a.out.as_deref())?;
    Ok(pass_code(failures == 0))
}
