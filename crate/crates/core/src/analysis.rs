//! Sweeps and inequality checks tying the solvers together.

use serde::{Deserialize, Serialize};

use crate::beta_tilde;
use crate::bvlimit::{
    self, LimitOptions, RoundedCornerSet, SetMeasures, Stencil, SubsetIndicator, TvGraph,
};
use crate::eigensolver::{self, EigenOptions};
use crate::error::{Error, Result};
use crate::geometry::{rasterize, DomainSpec};
use crate::io::{SweepRow, VerdictRow};
use crate::radial::{self, RadialOptions};

/// Settings shared by the checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    /// Grid spacing.
    pub h: f64,
    pub stencil: Stencil,
    pub eigen: EigenOptions,
    pub limit: LimitOptions,
    pub radial: RadialOptions,
    /// Accuracy requested from the radial solver.
    pub radial_tol: f64,
    /// Solve balls with the radial solver instead of the grid.
    pub radial_for_balls: bool,
    /// Relative tolerance of grid comparisons.
    pub grid_tolerance: f64,
    /// Relative tolerance of radial comparisons against closed forms.
    pub radial_tolerance: f64,
    /// Rows entering the extrapolation fit, counted from the smallest `p`.
    pub fit_rows: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            h: 1.0 / 64.0,
            stencil: Stencil::default(),
            eigen: EigenOptions::default(),
            limit: LimitOptions::default(),
            radial: RadialOptions::default(),
            radial_tol: 1e-8,
            radial_for_balls: true,
            grid_tolerance: 5e-2,
            radial_tolerance: 1e-4,
            fit_rows: 3,
        }
    }
}

/// The inequalities checked by this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InequalityId {
    #[serde(rename = "fk1")]
    FaberKrahn,
    #[serde(rename = "fk2")]
    ReverseFaberKrahn,
    #[serde(rename = "cheeger-lower")]
    CheegerLower,
    #[serde(rename = "cheeger-power")]
    CheegerPower,
    #[serde(rename = "upper-by-constants")]
    UpperByConstants,
}

impl InequalityId {
    pub fn as_str(self) -> &'static str {
        match self {
            InequalityId::FaberKrahn => "fk1",
            InequalityId::ReverseFaberKrahn => "fk2",
            InequalityId::CheegerLower => "cheeger-lower",
            InequalityId::CheegerPower => "cheeger-power",
            InequalityId::UpperByConstants => "upper-by-constants",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `left ≥ right`.
    AtLeast,
    /// `left ≤ right`.
    AtMost,
}

/// One checked inequality `left ≥ right` or `left ≤ right`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: InequalityId,
    pub direction: Direction,
    pub left: f64,
    pub right: f64,
    /// Signed margin, positive when the inequality holds strictly.
    pub slack: f64,
    /// Allowed violation, in the units of `left`.
    pub tolerance: f64,
    pub pass: bool,
    pub note: String,
}

impl InequalityReport {
    /// Verdict with tolerance `rel · |right|`.
    pub fn new(
        id: InequalityId,
        direction: Direction,
        left: f64,
        right: f64,
        rel: f64,
        note: impl Into<String>,
    ) -> Self {
        let slack = match direction {
            Direction::AtLeast => left - right,
            Direction::AtMost => right - left,
        };
        let tolerance = rel * right.abs();
        InequalityReport {
            id,
            direction,
            left,
            right,
            slack,
            tolerance,
            pass: slack >= -tolerance,
            note: note.into(),
        }
    }

    pub fn row(&self) -> VerdictRow {
        VerdictRow {
            id: self.id.as_str().into(),
            case: String::new(),
            left: self.left,
            right: self.right,
            slack: self.slack,
            tolerance: self.tolerance,
            verdict: if self.pass { "pass" } else { "fail" }.into(),
        }
    }
}

/// `λ(p) ≈ λ* + C (p-1)^α` fitted by least squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub lambda_star: f64,
    pub c: f64,
    pub alpha: f64,
    /// Root-mean-square residual of the fit.
    pub rms: f64,
}

/// Fits `λ* + C x^α` to `(x, λ)` with `α ∈ [1/4, 4]`; needs three points.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "power fit needs at least 3 points, got {}",
            x.len().min(y.len())
        )));
    }
    if x.iter().any(|&t| !(t > 0.0 && t.is_finite())) || y.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument(
            "power fit needs positive abscissae and finite values".into(),
        ));
    }
    // Linear least squares in (λ*, C) for fixed α.
    let solve = |alpha: f64| {
        let n = x.len() as f64;
        let z: Vec<f64> = x.iter().map(|t| t.powf(alpha)).collect();
        let (sz, sy) = (z.iter().sum::<f64>(), y.iter().sum::<f64>());
        let szz: f64 = z.iter().map(|t| t * t).sum();
        let szy: f64 = z.iter().zip(y).map(|(a, b)| a * b).sum();
        let det = n * szz - sz * sz;
        let (l, c) = if det.abs() <= 1e-300 {
            (sy / n, 0.0)
        } else {
            let c = (n * szy - sz * sy) / det;
            ((sy - c * sz) / n, c)
        };
        let sse: f64 = z
            .iter()
            .zip(y)
            .map(|(zi, yi)| (l + c * zi - yi).powi(2))
            .sum();
        (l, c, sse)
    };
    let (lo, hi) = (0.25f64.ln(), 4.0f64.ln());
    let samples = 400;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=samples {
        let a = (lo + (hi - lo) * k as f64 / samples as f64).exp();
        let sse = solve(a).2;
        if sse < best.0 {
            best = (sse, a);
        }
    }
    // Golden-section refinement in ln α around the best sample.
    let step = (hi - lo) / samples as f64;
    let (mut a, mut b) = ((best.1.ln() - step).max(lo), (best.1.ln() + step).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let (m1, m2) = (b - g * (b - a), a + g * (b - a));
        if solve(m1.exp()).2 <= solve(m2.exp()).2 {
            b = m2;
        } else {
            a = m1;
        }
    }
    let mid = ((a + b) / 2.0).exp();
    let alpha = if solve(mid).2 <= best.0 { mid } else { best.1 };
    let (lambda_star, c, sse) = solve(alpha);
    Ok(PowerFit {
        lambda_star,
        c,
        alpha,
        rms: (sse / x.len() as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Radial,
    Grid,
}

/// Outcome of a `p → 1` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub domain: DomainSpec,
    pub beta: f64,
    pub method: Method,
    /// Grid spacing, absent for radial sweeps.
    pub h: Option<f64>,
    /// Sorted by decreasing `p`.
    pub rows: Vec<SweepRow>,
    pub converged: Vec<bool>,
    /// Absent when the usable rows are constant.
    pub fit: Option<PowerFit>,
    pub lambda_star: f64,
    /// `Λ` of the domain: closed form on balls, `Λ_h` on grids.
    pub reference: f64,
    /// `|λ* - Λ| / |Λ|`, or `|λ*|` when `Λ = 0`.
    pub error: f64,
    /// The same measure for the smallest `p`.
    pub last_point_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check_p_list(p_list: &[f64]) -> Result<()> {
    if p_list.is_empty() || p_list.iter().any(|&p| !(p > 1.0 && p.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "p values must be finite and > 1, got {p_list:?}"
        )));
    }
    if p_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(format!(
            "p values must be strictly decreasing, got {p_list:?}"
        )));
    }
    Ok(())
}

fn ball_radius(spec: &DomainSpec) -> Option<(f64, usize)> {
    match *spec {
        DomainSpec::Ball { radius, dimension } => Some((radius, dimension)),
        _ => None,
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "beta must be finite, got {beta}"
        )));
    }
    if beta <= -1.0 {
        return Err(Error::Unbounded { beta });
    }
    Ok(())
}

/// `λ(Ω,p,β)` along `p_list`, extrapolated to `p = 1` and compared with `Λ(Ω,β)`.
///
/// Balls use the radial solver when `opts.radial_for_balls`; other domains
/// are rasterized and solved with warm starts. Rows with a finite value
/// enter the fit; grid rows close to `p = 1` usually stop on stagnation
/// rather than on the residual and are flagged in `converged`. The verdict passes when the
/// extrapolated value or the last row is within `tolerance` (the latter
/// with `2 · tolerance`).
pub fn gamma_sweep(
    spec: &DomainSpec,
    beta: f64,
    p_list: &[f64],
    tolerance: f64,
    opts: &AnalysisOptions,
) -> Result<SweepReport> {
    check_beta(beta)?;
    check_p_list(p_list)?;
    spec.validate()?;
    let ball = ball_radius(spec).filter(|_| opts.radial_for_balls);
    let (method, h, results, reference) = if let Some((radius, dim)) = ball {
        let mut out = Vec::with_capacity(p_list.len());
        for &p in p_list {
            // Stiff shooting problems are reported as unusable rows.
            match radial::shoot_radial_eigen(dim, radius, p, beta, opts.radial_tol, &opts.radial) {
                Ok(prof) => out.push((
                    SweepRow {
                        p,
                        lambda_h: prof.lambda,
                        residual: prof.boundary_residual,
                    },
                    true,
                )),
                Err(
                    Error::StepFailure { .. }
                    | Error::NotConverged { .. }
                    | Error::BracketNotFound { .. },
                ) => out.push((
                    SweepRow {
                        p,
                        lambda_h: f64::NAN,
                        residual: f64::NAN,
                    },
                    false,
                )),
                Err(e) => return Err(e),
            }
        }
        (
            Method::Radial,
            None,
            out,
            radial::ball_limit_eigenvalue(dim, radius, beta)?,
        )
    } else {
        let grid = rasterize(spec, opts.h)?;
        let path = eigensolver::warm_start_path(&grid, beta, p_list, &opts.eigen)?;
        let out = path
            .iter()
            .map(|r| {
                (
                    SweepRow {
                        p: r.p,
                        lambda_h: r.lambda,
                        residual: r.residual,
                    },
                    r.converged,
                )
            })
            .collect();
        let graph = TvGraph::new(&grid, opts.stencil);
        let limit = bvlimit::minimize_j(&graph, beta, &opts.limit)?;
        (Method::Grid, Some(opts.h), out, limit.lambda)
    };
    let rows: Vec<SweepRow> = results.iter().map(|r| r.0).collect();
    let converged: Vec<bool> = results.iter().map(|r| r.1).collect();
    let usable: Vec<&SweepRow> = rows.iter().filter(|r| r.lambda_h.is_finite()).collect();
    if usable.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "sweep needs at least 3 usable rows, got {} of {}",
            usable.len(),
            rows.len()
        )));
    }
    let tail = &usable[usable.len() - opts.fit_rows.max(3).min(usable.len())..];
    let x: Vec<f64> = tail.iter().map(|r| r.p - 1.0).collect();
    let y: Vec<f64> = tail.iter().map(|r| r.lambda_h).collect();
    let constant = y.iter().all(|&v| v == y[0]);
    let (fit, lambda_star) = if constant {
        (None, y[0])
    } else {
        let fit = fit_power_law(&x, &y)?;
        (Some(fit), fit.lambda_star)
    };
    let err = |v: f64| {
        if reference == 0.0 {
            v.abs()
        } else {
            (v - reference).abs() / reference.abs()
        }
    };
    let error = err(lambda_star);
    let last_point_error = err(usable[usable.len() - 1].lambda_h);
    let pass = error <= tolerance || last_point_error <= 2.0 * tolerance;
    Ok(SweepReport {
        domain: spec.clone(),
        beta,
        method,
        h,
        rows,
        converged,
        fit,
        lambda_star,
        reference,
        error,
        last_point_error,
        tolerance,
        pass,
    })
}

/// `Λ_h(Ω,β)` on the rasterized domain.
fn grid_limit(spec: &DomainSpec, beta: f64, opts: &AnalysisOptions) -> Result<f64> {
    let grid = rasterize(spec, opts.h)?;
    let graph = TvGraph::new(&grid, opts.stencil);
    Ok(bvlimit::minimize_j(&graph, beta, &opts.limit)?.lambda)
}

/// Compares `Λ_h(Ω,β)` with `Λ(Ω^#,β)` for the ball of equal area.
///
/// For `β ≥ 0` the ball is the minimizer (`fk1`); for `-1 < β < 0` it is
/// the maximizer (`fk2`), and `Λ(Ω,β) ≤ β P(Ω)/|Ω|` is checked with the exact
/// perimeter and area.
pub fn check_faber_krahn(
    spec: &DomainSpec,
    beta: f64,
    opts: &AnalysisOptions,
) -> Result<Vec<InequalityReport>> {
    check_beta(beta)?;
    spec.validate()?;
    if spec.dimension() != 2 {
        return Err(Error::InvalidArgument(
            "Faber-Krahn checks run on planar grids".into(),
        ));
    }
    let lambda = grid_limit(spec, beta, opts)?;
    let ball = spec.equimeasurable_ball();
    let (radius, dim) = ball_radius(&ball).expect("equimeasurable ball");
    let lambda_ball = radial::ball_limit_eigenvalue(dim, radius, beta)?;
    let tol = opts.grid_tolerance;
    let mut out = Vec::new();
    if beta >= 0.0 {
        out.push(InequalityReport::new(
            InequalityId::FaberKrahn,
            Direction::AtLeast,
            lambda,
            lambda_ball,
            tol,
            format!(
                "grid Λ_h at h = {} against the ball of radius {radius}",
                opts.h
            ),
        ));
    } else {
        out.push(InequalityReport::new(
            InequalityId::ReverseFaberKrahn,
            Direction::AtMost,
            lambda,
            lambda_ball,
            tol,
            format!(
                "grid Λ_h at h = {} against the ball of radius {radius}",
                opts.h
            ),
        ));
        out.push(InequalityReport::new(
            InequalityId::UpperByConstants,
            Direction::AtMost,
            lambda,
            beta * spec.perimeter() / spec.volume(),
            tol,
            "β P(Ω) / |Ω| with exact perimeter and area",
        ));
    }
    Ok(out)
}

/// `H(E, ψ) = (ψ P_Ω(E) + β H(∂E ∩ ∂Ω) - (p-1) ψ^{p/(p-1)} |E|) / |E|` for constant `ψ`.
pub fn evaluate_h(
    set: &SubsetIndicator,
    graph: Option<&TvGraph>,
    psi: f64,
    beta: f64,
    p: f64,
) -> Result<f64> {
    if !(psi > 0.0 && psi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "psi must be positive, got {psi}"
        )));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p must be > 1, got {p}")));
    }
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "beta must be finite, got {beta}"
        )));
    }
    let SetMeasures {
        perimeter,
        contact,
        volume,
    } = set.measures(graph)?;
    if !(volume > 0.0) {
        return Err(Error::EmptySet);
    }
    Ok((psi * perimeter + beta * contact - (p - 1.0) * psi.powf(p / (p - 1.0)) * volume) / volume)
}

/// Values entering the lower bounds for `λ(Ω,p,β)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheegerCheck {
    pub p: f64,
    pub beta: f64,
    pub method: Method,
    pub lambda: f64,
    pub lambda_converged: bool,
    /// `Λ(Ω,β)`.
    pub limit: f64,
    /// `h(Ω)`.
    pub cheeger: f64,
    pub reports: Vec<InequalityReport>,
}

/// Checks `λ ≥ Λ β̃ - (p-1) β̃^{p/(p-1)}` and, when `β ≥ (h/p)^{p-1}`,
/// `λ ≥ (h/p)^p`.
pub fn check_cheeger_bound(
    spec: &DomainSpec,
    p: f64,
    beta: f64,
    opts: &AnalysisOptions,
) -> Result<CheegerCheck> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "the Cheeger-type bounds need beta > 0, got {beta}"
        )));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p must be > 1, got {p}")));
    }
    spec.validate()?;
    let ball = ball_radius(spec).filter(|_| opts.radial_for_balls);
    let (method, lambda, converged, limit, cheeger, tol) = if let Some((radius, dim)) = ball {
        let prof = radial::shoot_radial_eigen(dim, radius, p, beta, opts.radial_tol, &opts.radial)?;
        let cheeger = radial::ball_limit_eigenvalue(dim, radius, 1.0)?;
        (
            Method::Radial,
            prof.lambda,
            true,
            radial::ball_limit_eigenvalue(dim, radius, beta)?,
            cheeger,
            opts.radial_tolerance,
        )
    } else {
        let grid = rasterize(spec, opts.h)?;
        let res = eigensolver::minimize_jp(&grid, p, beta, &opts.eigen)?;
        let graph = TvGraph::new(&grid, opts.stencil);
        let limit = bvlimit::minimize_j(&graph, beta, &opts.limit)?.lambda;
        let cheeger = if beta >= 1.0 {
            limit
        } else {
            bvlimit::cheeger_constant(&graph, &opts.limit)?
        };
        (
            Method::Grid,
            res.lambda,
            res.converged,
            limit,
            cheeger,
            opts.grid_tolerance,
        )
    };
    let bt = beta_tilde(beta);
    let mut reports = vec![InequalityReport::new(
        InequalityId::CheegerLower,
        Direction::AtLeast,
        lambda,
        limit * bt - (p - 1.0) * bt.powf(p / (p - 1.0)),
        tol,
        format!("Λ = {limit}, β̃ = {bt}"),
    )];
    let ratio = cheeger / p;
    if beta >= ratio.powf(p - 1.0) {
        reports.push(InequalityReport::new(
            InequalityId::CheegerPower,
            Direction::AtLeast,
            lambda,
            ratio.powf(p),
            tol,
            format!("h(Ω) = {cheeger}"),
        ));
    }
    Ok(CheegerCheck {
        p,
        beta,
        method,
        lambda,
        lambda_converged: converged,
        limit,
        cheeger,
        reports,
    })
}

/// One member of the rounded-square family at `β = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerValue {
    pub radius: f64,
    pub value: f64,
}

/// `R(E_r, -1)` for the corner sets of a rounded square of side `side` and
/// corner radius `corner`, one per radius in `radii`.
pub fn demo_beta_minus_one(side: f64, corner: f64, radii: &[f64]) -> Result<Vec<CornerValue>> {
    radii
        .iter()
        .map(|&radius| {
            let set = SubsetIndicator::RoundedCorner(RoundedCornerSet::new(side, corner, radius)?);
            Ok(CornerValue {
                radius,
                value: bvlimit::evaluate_r(&set, -1.0, None)?,
            })
        })
        .collect()
}

/// Planar domains of area π: square, 2:1 rectangle, ellipse with axis ratio
/// 2.25, rounded square and the unit disk.
pub fn area_matched_library() -> Vec<(&'static str, DomainSpec)> {
    let pi = std::f64::consts::PI;
    // Rounded square with corner radius a quarter of the side.
    let rounded = (pi / (1.0 - (4.0 - pi) / 16.0)).sqrt();
    vec![
        ("square", DomainSpec::square(pi.sqrt())),
        (
            "rectangle",
            DomainSpec::rectangle((2.0 * pi).sqrt(), (pi / 2.0).sqrt()),
        ),
        (
            "ellipse",
            DomainSpec::Ellipse {
                semi_x: 1.5,
                semi_y: 1.0 / 1.5,
            },
        ),
        (
            "rounded_square",
            DomainSpec::RoundedRectangle {
                width: rounded,
                height: rounded,
                corner: rounded / 4.0,
            },
        ),
        ("disk", DomainSpec::ball(1.0)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_has_area_pi() {
        for (name, spec) in area_matched_library() {
            assert!(
                (spec.volume() - std::f64::consts::PI).abs() < 1e-12,
                "{name}"
            );
        }
    }

    #[test]
    fn power_fit_recovers_model() {
        let x = [0.5, 0.25, 0.1, 0.05];
        let y: Vec<f64> = x.iter().map(|t: &f64| 2.0 + 3.0 * t.powf(1.3)).collect();
        let fit = fit_power_law(&x, &y).unwrap();
        assert!((fit.lambda_star - 2.0).abs() < 1e-8, "{fit:?}");
        assert!((fit.alpha - 1.3).abs() < 1e-6, "{fit:?}");
        assert!(fit_power_law(&x[..2], &y[..2]).is_err());
    }

    #[test]
    fn report_tolerance() {
        let r = InequalityReport::new(
            InequalityId::FaberKrahn,
            Direction::AtLeast,
            0.97,
            1.0,
            0.05,
            "",
        );
        assert!(r.pass);
        assert!((r.slack + 0.03).abs() < 1e-15);
        let r = InequalityReport::new(
            InequalityId::ReverseFaberKrahn,
            Direction::AtMost,
            -0.9,
            -1.0,
            0.05,
            "",
        );
        assert!(!r.pass);
    }

    #[test]
    fn cheeger_bound_refuses_nonpositive_beta() {
        let opts = AnalysisOptions::default();
        assert!(check_cheeger_bound(&DomainSpec::ball(1.0), 2.0, 0.0, &opts).is_err());
    }

    #[test]
    fn corner_family_precondition() {
        assert!(demo_beta_minus_one(2.0, 0.2, &[0.2]).is_err());
        assert!(demo_beta_minus_one(2.0, 0.2, &[1.1]).is_err());
        let v = demo_beta_minus_one(2.0, 0.2, &[1.0, 0.5, 0.3]).unwrap();
        assert!(v[0].value > v[1].value && v[1].value > v[2].value);
    }
}
