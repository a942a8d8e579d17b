//! Balls and spherical shells in any dimension `N >= 2`.
//!
//! For `p > 1` the first eigenfunction on `B_R` is radial, `v(x) = ψ(|x|)`,
//! and solves
//!
//! ```text
//! -|ψ'|^{p-2} [(p-1) ψ'' + (N-1)/r ψ'] = λ ψ^{p-1}   on (0, R)
//! ψ'(0) = 0,   |ψ'(R)| = |β|^{1/(p-1)} ψ(R)
//! ```
//!
//! The shooting solver works with `w = |ψ'|^{p-2} ψ' / ψ^{p-1}` and
//! `y = ln ψ`, which turns the degenerate second-order equation into
//!
//! ```text
//! w' = -λ - (N-1) w / r - (p-1) |w|^{p/(p-1)},     w(0) = 0
//! y' = sign(w) |w|^{1/(p-1)}
//! ```
//!
//! with the Robin condition `w(R) = -β`. For fixed `r`, `w(r; λ)` is
//! strictly decreasing in λ, and it escapes to `-∞` exactly when ψ vanishes,
//! so the first eigenvalue is the unique root of `w(R; λ) + β` below the
//! first blow-up and can be bracketed and bisected.

use serde::{Deserialize, Serialize};

use crate::beta_hat;
use crate::error::{Error, Result};

/// Shooting solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadialOptions {
    /// Minimum number of RK4 steps on `[0, R]`.
    pub steps: usize,
    /// Hard cap on the number of steps (stiff regimes raise the count).
    pub max_steps: usize,
    /// Number of times the initial λ bracket may be doubled.
    pub max_widenings: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions {
            steps: 10_000,
            max_steps: 4_000_000,
            max_widenings: 8,
        }
    }
}

/// Radial first eigenfunction on a ball together with its eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub dimension: usize,
    pub radius: f64,
    pub p: f64,
    pub beta: f64,
    pub lambda: f64,
    pub r: Vec<f64>,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    /// `| |ψ'(R)| - |β|^{1/(p-1)} ψ(R) |` of the normalized profile.
    pub boundary_residual: f64,
    /// `|λ(n) - λ(2n)|` between the step count used and twice that.
    pub richardson_error: f64,
    pub steps: usize,
}

impl RadialProfile {
    /// Profile value at radius `r` by linear interpolation.
    pub fn value_at(&self, r: f64) -> f64 {
        let n = self.r.len() - 1;
        let t = (r / self.radius).clamp(0.0, 1.0) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let s = t - i as f64;
        self.psi[i] * (1.0 - s) + self.psi[i + 1] * s
    }
}

fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// One shooting configuration `(N, R, p)` integrated with `steps` RK4 steps.
struct Shooter {
    dm1: f64,
    dim: f64,
    radius: f64,
    p: f64,
    steps: usize,
}

enum Shot {
    /// `w(R)`.
    Reached(f64),
    /// w fell below `-β` and keeps decreasing: ψ vanishes or the boundary value overshoots.
    BlewUp,
}

impl Shooter {
    fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    fn dw(&self, lambda: f64, r: f64, w: f64) -> f64 {
        -lambda - self.dm1 * w / r - (self.p - 1.0) * w.abs().powf(self.q())
    }

    fn dy(&self, w: f64) -> f64 {
        signed_pow(w, 1.0 / (self.p - 1.0))
    }

    /// Index of the first grid point handled by RK4; earlier points use the
    /// expansion at the origin.
    fn start_index(&self) -> usize {
        (self.dim.ceil() as usize).max(1)
    }

    /// Two-term expansion of `w` and `y` near `r = 0`.
    fn series(&self, lambda: f64, r: f64) -> (f64, f64) {
        let q = self.q();
        let a = -lambda / self.dim;
        let b = -(self.p - 1.0) * a.abs().powf(q) / (q + self.dim);
        let w = a * r + b * r.powf(q + 1.0);
        let y = signed_pow(a, 1.0 / (self.p - 1.0)) * r.powf(q) / q;
        (w, y)
    }

    /// True once `w` is decreasing for good and already below `-β`, so the
    /// sign of the mismatch is settled.
    fn blew_up(&self, lambda: f64, beta: f64, r: f64, w: f64) -> bool {
        if !w.is_finite() {
            return true;
        }
        w + beta < 0.0
            && (self.p - 1.0) * w.abs().powf(self.q())
                > 2.0 * (lambda.abs() + self.dm1 * w.abs() / r) + 1.0
    }

    /// Integrates to `R`; when `trace` is given, stores `(w, y)` at every grid point.
    fn shoot(&self, lambda: f64, beta: f64, mut trace: Option<&mut Vec<(f64, f64)>>) -> Shot {
        let h = self.radius / self.steps as f64;
        let i0 = self.start_index();
        if let Some(t) = trace.as_deref_mut() {
            t.clear();
            for i in 0..=i0 {
                t.push(self.series(lambda, i as f64 * h));
            }
        }
        let (mut w, mut y) = self.series(lambda, i0 as f64 * h);
        for i in i0..self.steps {
            let r = i as f64 * h;
            let k1 = self.dw(lambda, r, w);
            let l1 = self.dy(w);
            let w2 = w + 0.5 * h * k1;
            let k2 = self.dw(lambda, r + 0.5 * h, w2);
            let l2 = self.dy(w2);
            let w3 = w + 0.5 * h * k2;
            let k3 = self.dw(lambda, r + 0.5 * h, w3);
            let l3 = self.dy(w3);
            let w4 = w + h * k3;
            let k4 = self.dw(lambda, r + h, w4);
            let l4 = self.dy(w4);
            w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            y += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
            if self.blew_up(lambda, beta, r + h, w) {
                return Shot::BlewUp;
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push((w, y));
            }
        }
        Shot::Reached(w)
    }

    /// `w(R; λ) + β`, with `-∞` when ψ vanishes inside the ball.
    fn mismatch(&self, lambda: f64, beta: f64) -> f64 {
        match self.shoot(lambda, beta, None) {
            Shot::Reached(w) => w + beta,
            Shot::BlewUp => f64::NEG_INFINITY,
        }
    }

    fn bisect(&self, beta: f64, opts: &RadialOptions) -> Result<f64> {
        let scale = beta.abs() * self.dim / self.radius;
        // Constants give λ ≤ βN/R; the Riccati term bounds λ from below.
        let (mut lo, mut hi) = if beta > 0.0 {
            (-2.0 * scale, scale * (1.0 + 1e-12))
        } else {
            (-2.0 * scale, -scale * (1.0 - 1e-12))
        };
        let mut widenings = 0;
        while self.mismatch(lo, beta) <= 0.0 {
            if widenings == opts.max_widenings {
                return Err(Error::BracketNotFound { lo, hi });
            }
            lo *= 2.0;
            widenings += 1;
        }
        widenings = 0;
        while self.mismatch(hi, beta) > 0.0 {
            if widenings == opts.max_widenings {
                return Err(Error::BracketNotFound { lo, hi });
            }
            hi = if hi > 0.0 { hi * 2.0 } else { hi / 2.0 };
            widenings += 1;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.mismatch(mid, beta) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn check_args(dimension: usize, radius: f64, p: f64) -> Result<()> {
    if dimension < 2 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be >= 2, got {dimension}"
        )));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidArgument(format!("p must exceed 1, got {p}")));
    }
    Ok(())
}

/// First Robin eigenvalue `λ(B_R, p, β)` and its radial eigenfunction.
///
/// The profile is normalized by `ψ(0) = 1` for `β > 0` and `ψ(R) = 1` for
/// `β < 0`. `tol` bounds the accepted boundary residual and Richardson
/// difference (relative to `max(1, |λ|)`).
pub fn shoot_radial_eigen(
    dimension: usize,
    radius: f64,
    p: f64,
    beta: f64,
    tol: f64,
    opts: &RadialOptions,
) -> Result<RadialProfile> {
    check_args(dimension, radius, p)?;
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "beta must be finite, got {beta}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if beta == 0.0 {
        let n = opts.steps.max(1);
        let r: Vec<f64> = (0..=n).map(|i| radius * i as f64 / n as f64).collect();
        return Ok(RadialProfile {
            dimension,
            radius,
            p,
            beta,
            lambda: 0.0,
            psi: vec![1.0; r.len()],
            dpsi: vec![0.0; r.len()],
            r,
            boundary_residual: 0.0,
            richardson_error: 0.0,
            steps: n,
        });
    }

    // Stiffness of the |w|^{p/(p-1)} term is p |w|^{1/(p-1)}; |w| stays
    // below |β| at the eigenvalue and below the balance point at the lower
    // bracket end.
    let scale = beta.abs() * dimension as f64 / radius;
    let w_balance = (2.0 * scale / (p - 1.0)).powf((p - 1.0) / p);
    let w_max = beta.abs().max(w_balance);
    let stiffness = p * w_max.powf(1.0 / (p - 1.0));
    let needed = (1.2 * radius * stiffness).ceil();
    if needed > opts.max_steps as f64 {
        return Err(Error::StepFailure {
            r: 0.0,
            reason: format!(
                "stiffness {stiffness:.3e} needs more than {} steps",
                opts.max_steps
            ),
        });
    }
    let steps = opts.steps.max(needed as usize).max(16);

    let shooter = |steps| Shooter {
        dm1: dimension as f64 - 1.0,
        dim: dimension as f64,
        radius,
        p,
        steps,
    };
    let fine = shooter(steps);
    let lambda = fine.bisect(beta, opts)?;
    let richardson_error = if 2 * steps <= opts.max_steps {
        (shooter(2 * steps).bisect(beta, opts)? - lambda).abs()
    } else {
        0.0
    };

    let mut trace = Vec::with_capacity(steps + 1);
    // λ sits at the bisection resolution; step back to the side where ψ stays positive.
    let mut lam_eval = lambda;
    for _ in 0..60 {
        match fine.shoot(lam_eval, beta, Some(&mut trace)) {
            Shot::Reached(_) => break,
            Shot::BlewUp => lam_eval -= f64::EPSILON * lam_eval.abs().max(1e-300) * 4.0,
        }
    }
    if trace.len() != steps + 1 {
        return Err(Error::StepFailure {
            r: radius * trace.len() as f64 / steps as f64,
            reason: "profile vanished at the converged eigenvalue".into(),
        });
    }
    let anchor = if beta > 0.0 {
        trace[0].1
    } else {
        trace[steps].1
    };
    let exponent = 1.0 / (p - 1.0);
    let mut r = Vec::with_capacity(steps + 1);
    let mut psi = Vec::with_capacity(steps + 1);
    let mut dpsi = Vec::with_capacity(steps + 1);
    for (i, &(w, y)) in trace.iter().enumerate() {
        let v = (y - anchor).exp();
        r.push(radius * i as f64 / steps as f64);
        psi.push(v);
        dpsi.push(v * signed_pow(w, exponent));
    }
    let boundary_residual = (dpsi[steps].abs() - beta.abs().powf(exponent) * psi[steps]).abs();
    let scale = lambda.abs().max(1.0);
    if richardson_error > tol * scale
        || boundary_residual > tol * psi[steps].max(dpsi[steps].abs()).max(1.0)
    {
        return Err(Error::NotConverged {
            what: "radial shooting",
            iterations: steps,
        });
    }
    Ok(RadialProfile {
        dimension,
        radius,
        p,
        beta,
        lambda,
        r,
        psi,
        dpsi,
        boundary_residual,
        richardson_error,
        steps,
    })
}

/// `f(t) = (t^{N-1} + β) / (1 - t^N)`, the shell value scaled by `R/N`.
pub fn shell_ratio(t: f64, dimension: usize, beta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "t must lie in [0, 1), got {t}"
        )));
    }
    let n = dimension as i32;
    Ok((t.powi(n - 1) + beta) / (1.0 - t.powi(n)))
}

/// Global minimizer of [`shell_ratio`] over `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellMinimum {
    pub t: f64,
    pub value: f64,
}

/// Minimizes `f` over `[0, 1)` by a dense scan followed by golden-section
/// refinement around the best sample; ties go to the smaller `t`.
pub fn minimize_shell_ratio(dimension: usize, beta: f64) -> Result<ShellMinimum> {
    if !(beta > -1.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "shell minimization needs beta > -1, got {beta}"
        )));
    }
    const SAMPLES: usize = 100_000;
    let f = |t: f64| shell_ratio(t, dimension, beta).expect("t in [0,1)");
    let grid = |k: usize| k as f64 / SAMPLES as f64;
    let mut best = (0usize, f(0.0));
    for k in 1..SAMPLES {
        let v = f(grid(k));
        if v < best.1 {
            best = (k, v);
        }
    }
    let mut a = grid(best.0.saturating_sub(1));
    let mut b = grid((best.0 + 1).min(SAMPLES - 1));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    for _ in 0..100 {
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - ratio * (b - a);
        d = a + ratio * (b - a);
    }
    let mut result = ShellMinimum {
        t: grid(best.0),
        value: best.1,
    };
    for t in [a, 0.5 * (a + b), b] {
        let v = f(t);
        if v < result.value || (v == result.value && t < result.t) {
            result = ShellMinimum { t, value: v };
        }
    }
    Ok(result)
}

/// `R(E, β)` for the shell `E = {r < |x| < R}` inside `B_R`:
/// `(N/R) · ((r/R)^{N-1} + β) / (1 - (r/R)^N)`.
pub fn shell_r_value(inner: f64, radius: f64, dimension: usize, beta: f64) -> Result<f64> {
    if !(inner >= 0.0 && inner < radius) {
        return Err(Error::InvalidArgument(format!(
            "shell needs 0 <= r < R, got r = {inner}, R = {radius}"
        )));
    }
    Ok(dimension as f64 / radius * shell_ratio(inner / radius, dimension, beta)?)
}

/// `Λ(B_R, β) = min(β, 1) N / R`.
pub fn ball_limit_eigenvalue(dimension: usize, radius: f64, beta: f64) -> Result<f64> {
    if !(beta > -1.0) {
        return Err(Error::Unbounded { beta });
    }
    if !(radius > 0.0) || dimension < 2 {
        return Err(Error::InvalidArgument(format!(
            "need R > 0 and N >= 2, got R = {radius}, N = {dimension}"
        )));
    }
    Ok(beta_hat(beta) * dimension as f64 / radius)
}
