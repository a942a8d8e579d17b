//! Run configuration: one JSON file per run, unknown keys rejected.

use std::path::{Path, PathBuf};

use robin_core::analysis::AnalysisOptions;
use robin_core::bvlimit::{LimitOptions, Stencil};
use robin_core::eigensolver::EigenOptions;
use robin_core::radial::RadialOptions;
use robin_core::DomainSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Parametric domain; exclusive with `mask`.
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    /// Mask file (see `robin_core::io`), resolved against the config's directory.
    #[serde(default)]
    pub mask: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: Option<VerifyConfig>,
    #[serde(default)]
    pub demo: Option<DemoConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Radial solver on balls, grid otherwise.
    #[default]
    Auto,
    Grid,
    Radial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub h: f64,
    pub p: f64,
    pub beta: f64,
    pub p_list: Vec<f64>,
    pub eps_list: Vec<f64>,
    /// Relative tolerance of sweep verdicts.
    pub tolerance: f64,
    pub seed: u64,
    pub method: MethodChoice,
    pub stencil: Stencil,
    pub eigen: EigenOptions,
    pub limit: LimitOptions,
    pub radial: RadialOptions,
    pub radial_tol: f64,
    pub grid_tolerance: f64,
    pub radial_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let a = AnalysisOptions::default();
        SolverConfig {
            h: a.h,
            p: 2.0,
            beta: 1.0,
            p_list: vec![1.5, 1.25, 1.1, 1.05, 1.02],
            eps_list: vec![0.25, 0.125, 0.0625, 0.03125],
            tolerance: 0.01,
            seed: EigenOptions::default().seed,
            method: MethodChoice::Auto,
            stencil: a.stencil,
            eigen: a.eigen,
            limit: a.limit,
            radial: a.radial,
            radial_tol: a.radial_tol,
            grid_tolerance: a.grid_tolerance,
            radial_tolerance: a.radial_tolerance,
        }
    }
}

impl SolverConfig {
    pub fn eigen_options(&self) -> EigenOptions {
        EigenOptions {
            seed: self.seed,
            ..self.eigen
        }
    }

    pub fn analysis(&self) -> AnalysisOptions {
        AnalysisOptions {
            h: self.h,
            stencil: self.stencil,
            eigen: self.eigen_options(),
            limit: self.limit,
            radial: self.radial,
            radial_tol: self.radial_tol,
            radial_for_balls: self.method != MethodChoice::Grid,
            grid_tolerance: self.grid_tolerance,
            radial_tolerance: self.radial_tolerance,
            ..AnalysisOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// One check of the `verify` suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    FaberKrahn {
        domain: DomainSpec,
        beta: f64,
    },
    CheegerBound {
        domain: DomainSpec,
        p: f64,
        beta: f64,
    },
    Sweep {
        domain: DomainSpec,
        beta: f64,
        p_list: Vec<f64>,
        tolerance: f64,
    },
    ShellRatio {
        dimension: usize,
        beta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub checks: Vec<Check>,
}

/// Rounded square family at `β = -1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoConfig {
    pub side: f64,
    pub corner: f64,
    pub radii: Vec<f64>,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            side: 2.0,
            corner: 0.2,
            radii: vec![1.0, 0.8, 0.6, 0.4, 0.3, 0.25, 0.21],
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let (Some(mask), Some(dir)) = (&cfg.mask, path.parent()) {
            if mask.is_relative() {
                cfg.mask = Some(dir.join(mask));
            }
        }
        Ok(cfg)
    }

    /// Checks numeric fields against the solver preconditions that do not
    /// depend on the subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let s = &self.solver;
        if self.domain.is_some() && self.mask.is_some() {
            return bad("give either `domain` or `mask`, not both".into());
        }
        if let Some(d) = &self.domain {
            d.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if !(s.h.is_finite() && s.h > 0.0) {
            return bad(format!("solver.h must be positive, got {}", s.h));
        }
        if !(s.p.is_finite() && s.p > 1.0) {
            return bad(format!("solver.p must be > 1, got {}", s.p));
        }
        if !s.beta.is_finite() {
            return bad(format!("solver.beta must be finite, got {}", s.beta));
        }
        check_p_list(&s.p_list, "solver.p_list")?;
        if s.eps_list.iter().any(|e| !(e.is_finite() && *e > 0.0))
            || s.eps_list.windows(2).any(|w| !(w[1] < w[0]))
        {
            return bad(format!(
                "solver.eps_list must be positive and strictly decreasing, got {:?}",
                s.eps_list
            ));
        }
        for (name, v) in [
            ("solver.tolerance", s.tolerance),
            ("solver.radial_tol", s.radial_tol),
            ("solver.grid_tolerance", s.grid_tolerance),
            ("solver.radial_tolerance", s.radial_tolerance),
            ("solver.eigen.tol", s.eigen.tol),
            ("solver.eigen.residual_tol", s.eigen.residual_tol),
            ("solver.limit.tol", s.limit.tol),
            ("solver.limit.pd_tol", s.limit.pd_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if s.eigen.max_iter == 0 || s.limit.max_outer == 0 || s.radial.steps == 0 {
            return bad("iteration caps must be positive".into());
        }
        if self.output.formats.is_empty() {
            return bad("output.formats must not be empty".into());
        }
        if let Some(v) = &self.verify {
            for c in &v.checks {
                match c {
                    Check::FaberKrahn { domain, beta }
                    | Check::CheegerBound { domain, beta, .. }
                    | Check::Sweep { domain, beta, .. } => {
                        domain
                            .validate()
                            .map_err(|e| CliError::Config(e.to_string()))?;
                        if !beta.is_finite() {
                            return bad(format!("check beta must be finite, got {beta}"));
                        }
                    }
                    Check::ShellRatio { beta, .. } if !beta.is_finite() => {
                        return bad(format!("check beta must be finite, got {beta}"));
                    }
                    Check::ShellRatio { .. } => {}
                }
                if let Check::Sweep {
                    p_list, tolerance, ..
                } = c
                {
                    check_p_list(p_list, "sweep p_list")?;
                    if !(tolerance.is_finite() && *tolerance > 0.0) {
                        return bad(format!("sweep tolerance must be positive, got {tolerance}"));
                    }
                }
                if let Check::CheegerBound { p, .. } = c {
                    if !(p.is_finite() && *p > 1.0) {
                        return bad(format!("check p must be > 1, got {p}"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_p_list(p_list: &[f64], name: &str) -> Result<(), CliError> {
    if p_list.is_empty()
        || p_list.iter().any(|p| !(p.is_finite() && *p > 1.0))
        || p_list.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(CliError::Config(format!(
            "{name} must be nonempty, > 1 and strictly decreasing, got {p_list:?}"
        )));
    }
    Ok(())
}

/// The default `verify` suite: the claims checked by the acceptance tests,
/// at the configured grid spacing.
pub fn default_checks() -> Vec<Check> {
    let mut checks = Vec::new();
    for (dimension, beta) in [2, 3, 4]
        .into_iter()
        .flat_map(|n| [-0.9, -0.5, 0.0, 0.5, 1.0, 5.0].map(|b| (n, b)))
    {
        checks.push(Check::ShellRatio { dimension, beta });
    }
    for (_, domain) in robin_core::analysis::area_matched_library() {
        for beta in [0.5, 1.0, 2.0, -0.5, -0.25] {
            checks.push(Check::FaberKrahn {
                domain: domain.clone(),
                beta,
            });
        }
    }
    for domain in [DomainSpec::ball(1.0), DomainSpec::square(1.0)] {
        for p in [1.2, 1.5, 2.0, 3.0] {
            for beta in [0.5, 1.0, 2.0, 5.0] {
                checks.push(Check::CheegerBound {
                    domain: domain.clone(),
                    p,
                    beta,
                });
            }
        }
    }
    checks.push(Check::Sweep {
        domain: DomainSpec::ball(1.0),
        beta: 0.5,
        p_list: vec![1.5, 1.25, 1.1, 1.05, 1.02],
        tolerance: 0.01,
    });
    checks
}
