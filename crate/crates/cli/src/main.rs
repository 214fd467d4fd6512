mod input;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use chordal_core::analysis::{self, CapacityWindow, Verdict};
use chordal_core::domain::{self, Domain};
use chordal_core::fields::{self, Field};
use chordal_core::flows::{self, SelfMap};
use chordal_core::geodesics::{self, GeodesicParam};
use chordal_core::verify::{self, Suite};
use chordal_core::{serial, Error};

use input::{usage, FieldArgs, Usage};

#[derive(Debug, Parser)]
#[command(
    name = "chordal",
    version,
    about = "Chordal generators, their flows and the invariant metric on Siegel domains and balls"
)]
struct Cli {
    /// Worker threads for parallel sweeps (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Domain of points given on the command line: siegel, ball, half-plane
    /// or disc (default: siegel; one coordinate means the half-plane)
    #[arg(long, global = true)]
    domain: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum What {
    Field,
    Metric,
    Poisson,
    Slice,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a field, the metric, the Poisson kernel or a slice
    Eval {
        #[command(flatten)]
        field: FieldArgs,
        /// Point "(a+bi, c+di, ...)"
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        #[arg(long, value_enum, default_value = "field")]
        what: What,
        /// Geodesic parameter γ for --what slice
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
        /// Half-plane coordinate ζ for --what slice
        #[arg(long, allow_hyphen_values = true)]
        zeta: Option<String>,
        /// Tangent vector for --what metric
        #[arg(long, allow_hyphen_values = true)]
        vector: Option<String>,
    },
    /// Estimate the capacity limsup y·|h(iy)| of a field or of its slices
    Capacity {
        #[command(flatten)]
        field: FieldArgs,
        /// The field is one-dimensional
        #[arg(long, conflicts_with = "slices")]
        one_dim: bool,
        /// Geodesic parameters: "0, 1, 1+i" in dimension 2, "1, 0; 0, i" above
        #[arg(long, allow_hyphen_values = true)]
        slices: Option<String>,
        /// Dimension of the field when it cannot be inferred
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = analysis::DEFAULT_CAPACITY_WINDOW.y_min)]
        y_min: f64,
        #[arg(long, default_value_t = analysis::DEFAULT_CAPACITY_WINDOW.y_max)]
        y_max: f64,
        #[arg(long, default_value_t = analysis::DEFAULT_CAPACITY_WINDOW.count)]
        samples: usize,
    },
    /// Integrate the flow of a field (or a piecewise driver) from z0
    Flow {
        #[command(flatten)]
        field: FieldArgs,
        /// Piecewise-constant driver pieces.json, routed to the Loewner solver
        #[arg(long, conflicts_with_all = ["field", "measure", "tau"])]
        driver: Option<PathBuf>,
        /// Starting point "(a+bi, c+di, ...)"
        #[arg(long, allow_hyphen_values = true)]
        z0: String,
        /// Final time
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = flows::DEFAULT_TOL)]
        tol: f64,
        /// Write the trajectory as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suites and print a JSON report
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Sampled class-membership test on a fixed grid
    Member {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        c: f64,
        /// Grid id, or "default"
        #[arg(long, default_value = "default")]
        grid: String,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Iterate a self-map and diagnose where the orbit goes
    Iterate {
        /// flow<T>:<field> (time-T flow map), id, or component expressions
        #[arg(long, allow_hyphen_values = true)]
        map: String,
        /// Starting point "(a+bi, c+di, ...)"
        #[arg(long, allow_hyphen_values = true)]
        z0: String,
        /// Number of iterations
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = flows::DIVERGENCE_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = flows::DEFAULT_TOL)]
        tol: f64,
    },
    /// Compare slice capacities with sampled global membership (evidence only)
    SliceVsGlobal {
        #[command(flatten)]
        field: FieldArgs,
        /// Geodesic parameters: "0, 1, 1+i" in dimension 2, "1, 0; 0, i" above
        #[arg(long, allow_hyphen_values = true)]
        gammas: String,
        #[arg(long, default_value = "default")]
        grid: String,
        #[arg(long)]
        dim: Option<usize>,
    },
}

/// Result of a command: the JSON to print and whether it reports success.
struct Outcome {
    json: Value,
    passed: bool,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Self { json, passed: true }
    }
}

fn grid_help() -> String {
    let w = analysis::DEFAULT_CAPACITY_WINDOW;
    format!(
        "Pinned grids and defaults:\n  \
         {hp}: x = 0 and ±10^[{xa}, {xb}] ({xn} per side), y = 10^[{ya}, {yb}] ({yn} values)\n  \
         {sg}: z1 over {hp}; z~ on circles of radius ρ·√(Im z1), ρ ∈ {radii:?}, {phases} phases, basis and diagonal directions\n  \
         {sc}: coarse variant, ρ ∈ {cradii:?}\n  \
         capacity window: y = 10^[{ymin}, {ymax}] ({count} samples), value = tail maximum\n  \
         membership slack: {rs:e} relative; flow tolerance: {tol:e}; verify seed: 7\n\n\
         Exit codes: 0 success, 1 violation or failed check, 2 usage or parse error, 3 numerical failure",
        hp = analysis::HALF_PLANE_GRID_ID,
        xa = analysis::HALF_PLANE_GRID_X_DECADES.0,
        xb = analysis::HALF_PLANE_GRID_X_DECADES.1,
        xn = analysis::HALF_PLANE_GRID_X_PER_SIDE,
        ya = analysis::HALF_PLANE_GRID_Y_DECADES.0,
        yb = analysis::HALF_PLANE_GRID_Y_DECADES.1,
        yn = analysis::HALF_PLANE_GRID_Y_COUNT,
        sg = analysis::SIEGEL_GRID_ID,
        radii = analysis::SIEGEL_GRID_RADII,
        phases = analysis::SIEGEL_GRID_PHASES,
        sc = analysis::SIEGEL_COARSE_GRID_ID,
        cradii = analysis::SIEGEL_COARSE_RADII,
        ymin = w.y_min.log10(),
        ymax = w.y_max.log10(),
        count = w.count,
        rs = analysis::RELATIVE_SLACK,
        tol = flows::DEFAULT_TOL,
    )
}

fn main() -> ExitCode {
    let matches = Cli::command().after_help(grid_help()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli).and_then(|o| output::print(&o.json).map(|_| o.passed)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<Usage>().is_some() {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<Error>() {
            return if err.is_numerical() {
                3
            } else if err.is_violation() {
                1
            } else {
                2
            };
        }
    }
    2
}

fn run(cli: &Cli) -> Result<Outcome> {
    let dom = cli.domain.as_deref();
    match &cli.command {
        Command::Eval {
            field,
            at,
            what,
            gamma,
            zeta,
            vector,
        } => cmd_eval(
            field,
            dom,
            at.as_deref(),
            *what,
            gamma.as_deref(),
            zeta.as_deref(),
            vector.as_deref(),
        ),
        Command::Capacity {
            field,
            one_dim,
            slices,
            dim,
            y_min,
            y_max,
            samples,
        } => {
            let window = CapacityWindow::new(*y_min, *y_max, *samples)?;
            cmd_capacity(field, *one_dim, slices.as_deref(), *dim, window)
        }
        Command::Flow {
            field,
            driver,
            z0,
            t,
            tol,
            out,
        } => cmd_flow(field, driver.as_ref(), dom, z0, *t, *tol, out.as_ref()),
        Command::Verify { suite, seed } => cmd_verify(suite, *seed),
        Command::Member {
            field,
            c,
            grid,
            dim,
        } => cmd_member(field, dom, *c, grid, *dim),
        Command::Iterate {
            map,
            z0,
            n,
            threshold,
            tol,
        } => cmd_iterate(map, dom, z0, *n, *threshold, *tol),
        Command::SliceVsGlobal {
            field,
            gammas,
            grid,
            dim,
        } => cmd_slice_vs_global(field, gammas, grid, *dim),
    }
}

fn cmd_eval(
    field: &FieldArgs,
    dom: Option<&str>,
    at: Option<&str>,
    what: What,
    gamma: Option<&str>,
    zeta: Option<&str>,
    vector: Option<&str>,
) -> Result<Outcome> {
    if let What::Slice = what {
        if let (Some(gamma), Some(zeta)) = (gamma, zeta) {
            let gamma = GeodesicParam::new(serial::parse_point(gamma).context("parsing --gamma")?);
            let zeta = serial::parse_complex(zeta).context("parsing --zeta")?;
            let h = field.resolve(Some(gamma.dim()))?;
            let value = geodesics::slice_value(&h, &gamma, zeta)?;
            let point = geodesics::geodesic_point(&gamma, zeta)?;
            return Ok(Outcome::ok(json!({
                "gamma": output::complex_list(gamma.gamma()),
                "zeta": output::complex(zeta),
                "point": output::complex_list(point.coords()),
                "slice": output::complex(value),
            })));
        }
    }
    let Some(at) = at else {
        bail!(usage(
            "--at is required (or --gamma and --zeta for --what slice)"
        ));
    };
    let z = input::parse_point(at, dom)?;
    let base = json!({ "domain": z.domain().tag(), "at": output::complex_list(z.coords()) });
    let mut obj = base.as_object().cloned().unwrap_or_default();
    match what {
        What::Field => {
            let h = field.resolve(Some(z.dim()))?;
            obj.insert(
                "value".into(),
                output::complex_list(&fields::eval_field(&h, &z)?),
            );
        }
        What::Poisson => {
            let u = domain::poisson(&z);
            obj.insert("value".into(), json!(u.value()));
            obj.insert("horosphere_radius".into(), json!(u.horosphere_radius()));
        }
        What::Metric => {
            if z.domain().is_siegel() && z.dim() >= 2 {
                let g = domain::bergman_matrix(&z)?;
                let rows: Vec<Value> = g
                    .matrix()
                    .row_iter()
                    .map(|r| output::complex_list(&r.iter().copied().collect::<Vec<_>>()))
                    .collect();
                obj.insert("matrix".into(), Value::Array(rows));
            }
            match vector {
                Some(v) => {
                    let v = serial::parse_point(v).context("parsing --vector")?;
                    obj.insert("norm".into(), json!(domain::hyperbolic_norm_at(&z, &v)?));
                }
                None if !obj.contains_key("matrix") => {
                    bail!(usage("--vector is required for the metric outside Siegel domains of dimension ≥ 2"))
                }
                None => {}
            }
        }
        What::Slice => {
            if !z.domain().is_siegel() || z.dim() < 2 {
                bail!(usage(
                    "slice decomposition needs a Siegel point of dimension ≥ 2"
                ));
            }
            let h = field.resolve(Some(z.dim()))?;
            obj.insert(
                "decomposition".into(),
                output::to_value(&geodesics::decompose(&h, &z)?)?,
            );
        }
    }
    Ok(Outcome::ok(Value::Object(obj)))
}

fn cmd_capacity(
    field: &FieldArgs,
    one_dim: bool,
    slices: Option<&str>,
    dim: Option<usize>,
    window: CapacityWindow,
) -> Result<Outcome> {
    if one_dim {
        let h = field.resolve(Some(1))?;
        let est = analysis::estimate_capacity_1d(&h, window)?;
        return Ok(Outcome::ok(json!({
            "field": h.to_string(),
            "value": est.value,
            "estimate": output::to_value(&est)?,
        })));
    }
    let Some(slices) = slices else {
        bail!(usage("give --one-dim or --slices"));
    };
    let h = field.resolve(dim)?;
    let gammas = input::parse_gammas(slices, h.dim())?;
    let mut values = Vec::new();
    let mut reports = Vec::new();
    for g in gammas {
        let slice = geodesics::SliceField::new(&h, g.clone())?;
        let est = analysis::estimate_capacity_1d(&slice, window)?;
        values.push(est.value);
        reports.push(json!({ "gamma": output::complex_list(g.gamma()), "estimate": output::to_value(&est)? }));
    }
    Ok(Outcome::ok(
        json!({ "field": h.to_string(), "values": values, "slices": reports }),
    ))
}

fn cmd_flow(
    field: &FieldArgs,
    driver: Option<&PathBuf>,
    dom: Option<&str>,
    z0: &str,
    t: f64,
    tol: f64,
    out: Option<&PathBuf>,
) -> Result<Outcome> {
    let z0 = input::parse_point(z0, dom)?;
    let traj = match driver {
        Some(path) => {
            let hs = input::read_driver(path, z0.dim())?;
            flows::integrate_loewner(&hs, &z0, t, tol)?
        }
        None => {
            let h = field.resolve(Some(z0.dim()))?;
            flows::integrate_autonomous(&h, &z0, t, tol)?
        }
    };
    if let Some(path) = out {
        let file =
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        traj.write_csv(std::io::BufWriter::new(file))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let abs_u = traj.abs_u();
    Ok(Outcome::ok(json!({
        "domain": z0.domain().tag(),
        "z0": output::complex_list(z0.coords()),
        "t": t,
        "tol": tol,
        "endpoint": output::complex_list(traj.endpoint().coords()),
        "abs_u_start": abs_u.first(),
        "abs_u_end": abs_u.last(),
        "steps_accepted": traj.steps_accepted,
        "steps_rejected": traj.steps_rejected,
        "max_local_error": traj.max_local_error,
        "samples": traj.times.len(),
        "csv": out.map(|p| p.display().to_string()),
    })))
}

fn cmd_verify(suite: &str, seed: u64) -> Result<Outcome> {
    let suite: Suite = suite.parse().map_err(|e: Error| usage(&e.to_string()))?;
    let report = verify::run_suite(suite, seed);
    for g in report.failed_groups() {
        eprintln!(
            "FAILED {}: {} of {} samples (max error {:e}, tolerance {:e})",
            g.name, g.failures, g.samples, g.max_error, g.tolerance
        );
    }
    Ok(Outcome {
        json: output::to_value(&report)?,
        passed: report.passed,
    })
}

fn membership_report(
    h: &fields::VectorField,
    dom: Option<&str>,
    c: f64,
    grid: &str,
) -> Result<analysis::MembershipReport> {
    let n = h.dim();
    let d = input::domain_for(dom, n)?;
    let grid_id = |default: &str| {
        if grid == "default" {
            default.to_string()
        } else {
            grid.to_string()
        }
    };
    Ok(match d {
        Domain::HalfPlane => {
            let id = grid_id(analysis::HALF_PLANE_GRID_ID);
            if id != analysis::HALF_PLANE_GRID_ID {
                bail!(usage(&format!(
                    "unknown half-plane grid `{id}` (expected {})",
                    analysis::HALF_PLANE_GRID_ID
                )));
            }
            analysis::check_pointwise_1d(h, c, &analysis::half_plane_grid())?
        }
        Domain::Siegel(_) => analysis::membership_siegel(
            h,
            c,
            &analysis::siegel_grid_by_id(&grid_id(analysis::SIEGEL_GRID_ID), n)?,
        )?,
        Domain::Ball(_) => analysis::membership_ball(
            h,
            c,
            &analysis::siegel_grid_by_id(&grid_id(analysis::SIEGEL_GRID_ID), n)?,
        )?,
        Domain::Disc => bail!(usage(
            "membership on the disc: pass the field on the half-plane instead"
        )),
    })
}

fn cmd_member(
    field: &FieldArgs,
    dom: Option<&str>,
    c: f64,
    grid: &str,
    dim: Option<usize>,
) -> Result<Outcome> {
    if c.is_nan() || c < 0.0 {
        bail!(usage("--c must be non-negative"));
    }
    let h = field.resolve(dim)?;
    let report = membership_report(&h, dom, c, grid)?;
    let passed = report.verdict == Verdict::Consistent;
    let mut json = output::to_value(&report)?;
    if let Value::Object(m) = &mut json {
        m.insert("field".into(), Value::String(h.to_string()));
    }
    Ok(Outcome { json, passed })
}

/// `flow<T>:<field>`, `id`, or component expressions.
fn parse_map(spec: &str, n: usize, tol: f64) -> Result<Arc<dyn SelfMap>> {
    let spec = spec.trim();
    if spec == "id" {
        return Ok(Arc::new(flows::Identity));
    }
    if let Some(rest) = spec.strip_prefix("flow") {
        if let Some((t, field)) = rest.split_once(':') {
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|_| usage(&format!("invalid flow time in `{spec}`")))?;
            let h: Arc<dyn Field> = Arc::new(input::parse_field_spec(field, Some(n))?);
            return Ok(Arc::new(flows::FlowMap::new(h, t, tol)?));
        }
    }
    Ok(Arc::new(flows::ExprMap::new(input::parse_field_spec(
        spec,
        Some(n),
    )?)))
}

fn cmd_iterate(
    map: &str,
    dom: Option<&str>,
    z0: &str,
    n: usize,
    threshold: f64,
    tol: f64,
) -> Result<Outcome> {
    let z0 = input::parse_point(z0, dom)?;
    let f = parse_map(map, z0.dim(), tol)?;
    let report = flows::iterate_map(f.as_ref(), &z0, n, threshold)?;
    Ok(Outcome::ok(json!({
        "map": map,
        "z0": output::complex_list(z0.coords()),
        "iterations": report.points.len() - 1,
        "final": output::complex_list(report.last().coords()),
        "abs_u_start": report.abs_u.first(),
        "abs_u_final": report.abs_u.last(),
        "monotone": report.monotone,
        "diagnostic": output::to_value(&report.diagnostic)?,
        "note": "numerical evidence from a finite orbit, not a proof",
    })))
}

fn cmd_slice_vs_global(
    field: &FieldArgs,
    gammas: &str,
    grid: &str,
    dim: Option<usize>,
) -> Result<Outcome> {
    let h = field.resolve(dim)?;
    if h.dim() < 2 {
        bail!(usage("slices need a field of dimension ≥ 2"));
    }
    let gammas = input::parse_gammas(gammas, h.dim())?;
    let mut caps = Vec::new();
    for g in &gammas {
        let slice = geodesics::SliceField::new(&h, g.clone())?;
        let est = analysis::estimate_capacity_1d(&slice, analysis::DEFAULT_CAPACITY_WINDOW)?;
        caps.push(json!({ "gamma": output::complex_list(g.gamma()), "capacity": est.value, "trend": output::to_value(&est.trend)? }));
    }
    let c = caps
        .iter()
        .filter_map(|v| v["capacity"].as_f64())
        .fold(0.0, f64::max);
    let grid_id = if grid == "default" {
        analysis::SIEGEL_GRID_ID
    } else {
        grid
    };
    let global =
        analysis::membership_siegel(&h, c, &analysis::siegel_grid_by_id(grid_id, h.dim())?)?;
    Ok(Outcome::ok(json!({
        "field": h.to_string(),
        "slices": caps,
        "max_slice_capacity": c,
        "global_at_max_slice_capacity": output::to_value(&global)?,
        "note": "sampled evidence on finitely many slices and grid points; no conclusion about the general case",
    })))
}
