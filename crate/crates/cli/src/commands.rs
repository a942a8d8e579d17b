//! Subcommand implementations.

use std::path::Path;

use robin_core::analysis::{self, CheegerCheck, CornerValue, InequalityReport, SweepReport};
use robin_core::bvlimit::{self, LayerValue, TvGraph};
use robin_core::eigensolver;
use robin_core::io::{self, Mask, VerdictRow};
use robin_core::radial::{self, ShellMinimum};
use robin_core::{rasterize, DomainSpec, Error, GridDomain};
use serde::Serialize;

use crate::config::{default_checks, Check, DemoConfig, Format, MethodChoice, RunConfig};
use crate::output::{now, to_json, write_atomic, Envelope};
use crate::{CliError, Command};

pub fn dispatch(command: Command, cfg: &RunConfig) -> Result<i32, CliError> {
    let out = Reporter {
        cfg,
        command: command.name(),
    };
    match command {
        Command::Eigen => eigen(cfg, &out),
        Command::Limit => limit(cfg, &out),
        Command::Cheeger => cheeger(cfg, &out),
        Command::Sweep => sweep(cfg, &out),
        Command::Verify => verify(cfg, &out),
        Command::Blowup => blowup(cfg, &out),
        Command::DemoFigure1 => demo(cfg, &out),
    }
}

struct Reporter<'a> {
    cfg: &'a RunConfig,
    command: &'a str,
}

impl Reporter<'_> {
    fn dir(&self) -> &Path {
        &self.cfg.output.directory
    }

    fn json<R: Serialize>(&self, name: &str, converged: bool, result: &R) -> Result<(), CliError> {
        if self.cfg.output.wants(Format::Json) {
            let env = Envelope {
                command: self.command,
                converged,
                config: self.cfg,
                result,
                timestamp: now(),
            };
            write_atomic(self.dir(), name, &to_json(&env)?)?;
        }
        Ok(())
    }

    fn csv(
        &self,
        name: &str,
        text: impl FnOnce() -> Result<String, CliError>,
    ) -> Result<(), CliError> {
        if self.cfg.output.wants(Format::Csv) {
            write_atomic(self.dir(), name, &text()?)?;
        }
        Ok(())
    }
}

fn require_bounded(beta: f64) -> Result<(), CliError> {
    if beta <= -1.0 {
        return Err(Error::Unbounded { beta }.into());
    }
    Ok(())
}

fn domain(cfg: &RunConfig) -> Result<&DomainSpec, CliError> {
    cfg.domain
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs a `domain` block".into()))
}

fn ball(spec: Option<&DomainSpec>) -> Option<(f64, usize)> {
    match spec {
        Some(&DomainSpec::Ball { radius, dimension }) => Some((radius, dimension)),
        _ => None,
    }
}

/// Grid from `mask` or by rasterizing `domain` at `solver.h`.
fn grid(cfg: &RunConfig) -> Result<GridDomain, CliError> {
    match (&cfg.mask, &cfg.domain) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read mask {}: {e}", path.display()))
            })?;
            Ok(Mask::parse(&text)?.to_grid([0.0, 0.0])?)
        }
        (None, Some(spec)) => {
            if spec.dimension() != 2 {
                return Err(CliError::Config(format!(
                    "grid solvers are planar; the domain has dimension {}",
                    spec.dimension()
                )));
            }
            Ok(rasterize(spec, cfg.solver.h)?)
        }
        (None, None) => Err(CliError::Config(
            "the config needs a `domain` or a `mask`".into(),
        )),
    }
}

fn use_radial(cfg: &RunConfig) -> Result<Option<(f64, usize)>, CliError> {
    let b = if cfg.mask.is_some() {
        None
    } else {
        ball(cfg.domain.as_ref())
    };
    match (cfg.solver.method, b) {
        (MethodChoice::Grid, _) => Ok(None),
        (MethodChoice::Radial, None) => Err(CliError::Config(
            "method `radial` needs a ball domain".into(),
        )),
        (_, b) => Ok(b),
    }
}

#[derive(Serialize)]
struct GridInfo {
    h: f64,
    nx: usize,
    ny: usize,
    cells: usize,
    area: f64,
    boundary: f64,
}

impl GridInfo {
    fn of(g: &GridDomain) -> Self {
        let (nx, ny) = g.dims();
        GridInfo {
            h: g.spacing(),
            nx,
            ny,
            cells: g.len(),
            area: g.area(),
            boundary: g.boundary_measure(),
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
enum EigenReport {
    Radial {
        dimension: usize,
        radius: f64,
        p: f64,
        beta: f64,
        lambda: f64,
        boundary_residual: f64,
        richardson_error: f64,
        steps: usize,
    },
    Grid {
        grid: GridInfo,
        p: f64,
        beta: f64,
        lambda: f64,
        residual: f64,
        smoothing: f64,
        iterations: usize,
        /// `β |∂Ω|_h / |Ω|_h`, the quotient of a constant.
        constant_bound: f64,
    },
}

fn eigen(cfg: &RunConfig, out: &Reporter) -> Result<i32, CliError> {
    let s = &cfg.solver;
    require_bounded(s.beta)?;
    if let Some((radius, dimension)) = use_radial(cfg)? {
        let prof =
            radial::shoot_radial_eigen(dimension, radius, s.p, s.beta, s.radial_tol, &s.radial)?;
        let report = EigenReport::Radial {
            dimension,
            radius,
            p: s.p,
            beta: s.beta,
            lambda: prof.lambda,
            boundary_residual: prof.boundary_residual,
            richardson_error: prof.richardson_error,
            steps: prof.steps,
        };
        out.json("eigen.json", true, &report)?;
        out.csv("profile.csv", || Ok(io::profile_csv(&prof)))?;
        return Ok(0);
    }
    let g = grid(cfg)?;
    let res = eigensolver::minimize_jp(&g, s.p, s.beta, &s.eigen_options())?;
    let report = EigenReport::Grid {
        grid: GridInfo::of(&g),
        p: s.p,
        beta: s.beta,
        lambda: res.lambda,
        residual: res.residual,
        smoothing: res.smoothing,
        iterations: res.iterations,
        constant_bound: s.beta * g.boundary_measure() / g.area(),
    };
    out.json("eigen.json", res.converged, &report)?;
    out.csv("field.csv", || Ok(io::field_csv(&g, &res.field)?))?;
    Ok(if res.converged { 0 } else { 2 })
}

#[derive(Serialize)]
struct SetReport {
    grid: GridInfo,
    beta: f64,
    lambda: f64,
    level: f64,
    outer_iterations: usize,
    trace: Vec<f64>,
    set_cells: usize,
    set_area: f64,
    set_perimeter: f64,
    set_contact: f64,
    /// Closed form `min(β,1) N / R` on balls.
    closed_form: Option<f64>,
}

/// Solves the set problem on the configured grid and writes `{stem}.json`,
/// `{stem}_field.csv` and `{stem}_set.mask`.
fn set_problem(cfg: &RunConfig, out: &Reporter, beta: f64, stem: &str) -> Result<i32, CliError> {
    let g = grid(cfg)?;
    let graph = TvGraph::new(&g, cfg.solver.stencil);
    let res = bvlimit::minimize_j(&graph, beta, &cfg.solver.limit)?;
    let m = graph.measures(&res.set)?;
    let closed_form = match ball(cfg.domain.as_ref()).filter(|_| cfg.mask.is_none()) {
        Some((radius, dimension)) => Some(radial::ball_limit_eigenvalue(dimension, radius, beta)?),
        None => None,
    };
    let report = SetReport {
        grid: GridInfo::of(&g),
        beta,
        lambda: res.lambda,
        level: res.level,
        outer_iterations: res.trace.len(),
        trace: res.trace.clone(),
        set_cells: res.set.iter().filter(|&&x| x).count(),
        set_area: m.volume,
        set_perimeter: m.perimeter,
        set_contact: m.contact,
        closed_form,
    };
    out.json(&format!("{stem}.json"), res.converged, &report)?;
    out.csv(&format!("{stem}_field.csv"), || {
        Ok(io::field_csv(&g, &res.field)?)
    })?;
    out.csv(&format!("{stem}_set.mask"), || {
        Ok(Mask::of_set(&g, &res.set)?.to_text())
    })?;
    Ok(if res.converged { 0 } else { 2 })
}

fn limit(cfg: &RunConfig, out: &Reporter) -> Result<i32, CliError> {
    require_bounded(cfg.solver.beta)?;
    set_problem(cfg, out, cfg.solver.beta, "limit")
}

fn cheeger(cfg: &RunConfig, out: &Reporter) -> Result<i32, CliError> {
    set_problem(cfg, out, 1.0, "cheeger")
}

fn sweep(cfg: &RunConfig, out: &Reporter) -> Result<i32, CliError> {
    let s = &cfg.solver;
    let report =
        analysis::gamma_sweep(domain(cfg)?, s.beta, &s.p_list, s.tolerance, &s.analysis())?;
    out.json("sweep.json", report.converged.iter().all(|&c| c), &report)?;
    out.csv("sweep.csv", || Ok(io::sweep_csv(&report.rows)))?;
    Ok(if report.pass { 0 } else { 3 })
}

#[derive(Serialize)]
struct CheckOutcome {
    check: Check,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    reports: Vec<InequalityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cheeger: Option<CheegerCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shell: Option<ShellMinimum>,
    #[serde(skip)]
    rows: Vec<VerdictRow>,
}

fn label(spec: &DomainSpec) -> String {
    match spec {
        DomainSpec::Ball { radius, dimension } => format!("ball R={radius} N={dimension}"),
        DomainSpec::Annulus {
            inner,
            outer,
            dimension,
        } => format!("annulus {inner}<r<{outer} N={dimension}"),
        DomainSpec::Rectangle { width, height } => format!("rectangle {width}x{height}"),
        DomainSpec::RoundedRectangle {
            width,
            height,
            corner,
        } => format!("rounded rectangle {width}x{height} r={corner}"),
        DomainSpec::Ellipse { semi_x, semi_y } => format!("ellipse {semi_x}x{semi_y}"),
        DomainSpec::Polygon { vertices } => format!("polygon with {} vertices", vertices.len()),
    }
}

fn describe(check: &Check) -> String {
    let d = label;
    match check {
        Check::FaberKrahn { domain, beta } => format!("{} beta={beta}", d(domain)),
        Check::CheegerBound { domain, p, beta } => format!("{} p={p} beta={beta}", d(domain)),
        Check::Sweep { domain, beta, .. } => format!("{} beta={beta}", d(domain)),
        Check::ShellRatio { dimension, beta } => format!("N={dimension} beta={beta}"),
    }
}

fn run_check(check: &Check, cfg: &RunConfig) -> Result<CheckOutcome, Error> {
    let opts = cfg.solver.analysis();
    let mut o = CheckOutcome {
        check: check.clone(),
        pass: true,
        error: None,
        reports: Vec::new(),
        cheeger: None,
        sweep: None,
        shell: None,
        rows: Vec::new(),
    };
    match check {
        Check::FaberKrahn { domain, beta } => {
            o.reports = analysis::check_faber_krahn(domain, *beta, &opts)?
        }
        Check::CheegerBound { domain, p, beta } => {
            let c = analysis::check_cheeger_bound(domain, *p, *beta, &opts)?;
            o.reports = c.reports.clone();
            o.cheeger = Some(c);
        }
        Check::Sweep {
            domain,
            beta,
            p_list,
            tolerance,
        } => {
            let r = analysis::gamma_sweep(domain, *beta, p_list, *tolerance, &opts)?;
            o.rows.push(VerdictRow {
                id: "gamma-limit".into(),
                case: String::new(),
                left: r.lambda_star,
                right: r.reference,
                slack: -r.error,
                tolerance: r.tolerance,
                verdict: String::new(),
            });
            o.pass = r.pass;
            o.sweep = Some(r);
        }
        Check::ShellRatio { dimension, beta } => {
            let m = radial::minimize_shell_ratio(*dimension, *beta)?;
            let tolerance = 1e-12 * beta.abs().max(1.0);
            o.pass = m.t == 0.0 && (m.value - beta).abs() <= tolerance;
            o.rows.push(VerdictRow {
                id: "shell-ratio".into(),
                case: String::new(),
                left: m.value,
                right: *beta,
                slack: -(m.value - beta).abs(),
                tolerance,
                verdict: String::new(),
            });
            o.shell = Some(m);
        }
    }
    o.rows.extend(o.reports.iter().map(InequalityReport::row));
    o.pass &= o.reports.iter().all(|r| r.pass);
    Ok(o)
}

fn verify(cfg: &RunConfig, out: &Reporter) -> Result<i32, CliError> {
    let checks = cfg
        .verify
        .as_ref()
        .map_or_else(default_checks, |v| v.checks.clone());
    let mut outcomes = Vec::with_capacity(checks.len());
    for check in &checks {
        let case = describe(check);
        let mut o = run_check(check, cfg).unwrap_or_else(|e| CheckOutcome {
            check: check.clone(),
            pass: false,
            error: Some(e.to_string()),
            reports: Vec::new(),
            cheeger: None,
            sweep: None,
            shell: None,
            rows: vec![VerdictRow {
                id: "error".into(),
                case: String::new(),
                left: f64::NAN,
                right: f64::NAN,
                slack: f64::NAN,
                tolerance: f64::NAN,
                verdict: String::new(),
            }],
        });
        for row in &mut o.rows {
            row.case.clone_from(&case);
            if row.verdict.is_empty() {
                row.verdict = if o.error.is_some() {
                    "error"
                } else if o.pass {
                    "pass"
                } else {
                    "fail"
                }
                .into();
            }
        }
        outcomes.push(o);
    }
    let pass = outcomes.iter().all(|o| o.pass);
    let converged = outcomes.iter().all(|o| {
        o.error.is_none()
            && o.cheeger.as_ref().is_none_or(|c| c.lambda_converged)
            && o.sweep
                .as_ref()
                .is_none_or(|s| s.converged.iter().all(|&c| c))
    });
    #[derive(Serialize)]
    struct Summary<'a> {
        pass: bool,
        checks: usize,
        failed: usize,
        outcomes: &'a [CheckOutcome],
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    out.json(
        "verify.json",
        converged,
        &Summary {
            pass,
            checks: outcomes.len(),
            failed,
            outcomes: &outcomes,
        },
    )?;
    let rows: Vec<VerdictRow> = outcomes
        .iter()
        .flat_map(|o| o.rows.iter().cloned())
        .collect();
    out.csv("verdicts.csv", || Ok(io::verdict_csv(&rows)))?;
    Ok(if pass { 0 } else { 3 })
}

#[derive(Serialize)]
struct BlowupReport {
    grid: GridInfo,
    beta: f64,
    layers: Vec<LayerValue>,
    strictly_decreasing: bool,
}

fn blowup(cfg: &RunConfig, out: &Reporter) -> Result<i32, CliError> {
    let s = &cfg.solver;
    let g = if cfg.domain.is_none() && cfg.mask.is_none() {
        rasterize(&DomainSpec::square(1.0), s.h)?
    } else {
        grid(cfg)?
    };
    let graph = TvGraph::new(&g, s.stencil);
    let layers = bvlimit::blow_up_sequence(&graph, s.beta, &s.eps_list)?;
    let report = BlowupReport {
        grid: GridInfo::of(&g),
        beta: s.beta,
        strictly_decreasing: layers.windows(2).all(|w| w[1].value < w[0].value),
        layers,
    };
    out.json("blowup.json", true, &report)?;
    out.csv("blowup.csv", || {
        Ok(pairs_csv(
            ("eps", "value"),
            report.layers.iter().map(|l| (l.eps, l.value)),
        ))
    })?;
    Ok(0)
}

#[derive(Serialize)]
struct DemoReport<'a> {
    demo: &'a DemoConfig,
    values: Vec<CornerValue>,
}

fn demo(cfg: &RunConfig, out: &Reporter) -> Result<i32, CliError> {
    let d = cfg.demo.clone().unwrap_or_default();
    let values = analysis::demo_beta_minus_one(d.side, d.corner, &d.radii)?;
    let report = DemoReport { demo: &d, values };
    out.json("demo.json", true, &report)?;
    out.csv("demo.csv", || {
        Ok(pairs_csv(
            ("radius", "value"),
            report.values.iter().map(|v| (v.radius, v.value)),
        ))
    })?;
    Ok(0)
}

fn pairs_csv(header: (&str, &str), rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = format!("{},{}\n", header.0, header.1);
    for (a, b) in rows {
        s.push_str(&format!("{},{}\n", io::fmt_f64(a), io::fmt_f64(b)));
    }
    s
}
