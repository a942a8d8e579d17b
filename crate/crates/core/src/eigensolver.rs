//! Grid minimization of the p-Rayleigh quotient
//! `J_p(u) = (Σ h²|∇_h u|^p + β Σ b_x |u_x|^p) / Σ h² |u_x|^p`.
//!
//! `∇_h` takes forward differences across interior faces; a component is zero
//! when the forward neighbour lies outside Ω, so every interior face enters
//! exactly once. `b_x` is the boundary-face measure owned by cell `x`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::GridDomain;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenOptions {
    /// Relative change of λ between iterations below which the iteration may stop.
    pub tol: f64,
    /// Bound on the normalized Euler-Lagrange residual at convergence.
    pub residual_tol: f64,
    pub max_iter: usize,
    /// L-BFGS memory.
    pub memory: usize,
    /// Random probes used by the coercivity precheck (`β < 0`).
    pub probes: usize,
    pub seed: u64,
    /// Relative change of the smoothed quotient between smoothing levels
    /// below which the smoothing is not reduced further.
    pub smoothing_tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-10,
            residual_tol: 1e-3,
            max_iter: 50_000,
            memory: 12,
            probes: 200,
            seed: 0x5eed,
            smoothing_tol: 1e-7,
        }
    }
}

/// Output of [`minimize_jp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub p: f64,
    pub beta: f64,
    /// Discrete eigenvalue `λ_h`: the unregularized quotient of `field`.
    pub lambda: f64,
    /// Minimizer, `‖u‖_p = 1` with nonnegative mean.
    pub field: Vec<f64>,
    /// Normalized Euler-Lagrange residual of the smoothed quotient.
    pub residual: f64,
    /// Final `ε` of the smoothed density `(|∇u|² + ε²)^{p/2}`.
    pub smoothing: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Quotient after each accepted step.
    pub history: Vec<f64>,
}

fn check_field(grid: &GridDomain, u: &[f64]) -> Result<()> {
    if u.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "field has {} values but the grid has {} cells",
            u.len(),
            grid.len()
        )));
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("field has non-finite values".into()));
    }
    Ok(())
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "exponent must be > 1, got {p}"
        )));
    }
    Ok(())
}

/// Numerator and denominator of the quotient with its gradient machinery.
struct Quotient<'g> {
    grid: &'g GridDomain,
    right: Vec<Option<usize>>,
    up: Vec<Option<usize>>,
    p: f64,
    beta: f64,
    eps2: f64,
}

impl<'g> Quotient<'g> {
    fn new(grid: &'g GridDomain, p: f64, beta: f64, eps: f64) -> Self {
        let (right, up) = (0..grid.len()).map(|k| grid.forward_neighbors(k)).unzip();
        Quotient {
            grid,
            right,
            up,
            p,
            beta,
            eps2: eps * eps,
        }
    }

    fn diffs(&self, u: &[f64], k: usize) -> (f64, f64) {
        let h = self.grid.spacing();
        let a = self.right[k].map_or(0.0, |r| (u[r] - u[k]) / h);
        let c = self.up[k].map_or(0.0, |t| (u[t] - u[k]) / h);
        (a, c)
    }

    /// `(N, D)` with `N` the numerator and `D` the denominator.
    fn parts(&self, u: &[f64]) -> (f64, f64) {
        let area = self.grid.cell_area();
        let b = self.grid.cell_boundary();
        let half_p = self.p / 2.0;
        let mut energy = 0.0;
        let mut trace = 0.0;
        let mut mass = 0.0;
        for k in 0..u.len() {
            let (a, c) = self.diffs(u, k);
            energy += (a * a + c * c + self.eps2).powf(half_p);
            let m = u[k].abs().powf(self.p);
            mass += m;
            trace += b[k] * m;
        }
        (area * energy + self.beta * trace, area * mass)
    }

    /// Smoothed quotient of `u / ‖u‖_p`, which keeps it 0-homogeneous for any `ε`.
    #[cfg(test)]
    fn value(&self, u: &[f64]) -> f64 {
        let n = self.norm(u);
        let v: Vec<f64> = u.iter().map(|x| x / n).collect();
        let (num, den) = self.parts(&v);
        num / den
    }

    fn norm(&self, u: &[f64]) -> f64 {
        (self.grid.cell_area() * u.iter().map(|x| x.abs().powf(self.p)).sum::<f64>())
            .powf(1.0 / self.p)
    }

    /// Positive diagonal approximating the Hessian of the smoothed energy at `u`.
    fn curvature(&self, u: &[f64], out: &mut [f64]) {
        let h = self.grid.spacing();
        let area = self.grid.cell_area();
        let b = self.grid.cell_boundary();
        let p = self.p;
        let inv = 1.0 / self.norm(u);
        // |v|^{p-2} is singular at 0 for p < 2; cap it at a fraction of the mean.
        let v_floor = 1e-2 * inv * u.iter().map(|x| x.abs()).sum::<f64>() / u.len() as f64;
        out.fill(0.0);
        for k in 0..u.len() {
            let (a, c) = self.diffs(u, k);
            let (a, c) = (a * inv, c * inv);
            let s = a * a + c * c + self.eps2;
            let t = s.powf(p / 2.0 - 1.0);
            let fa = area * p * t * (1.0 + (p - 2.0) * a * a / s) / (h * h);
            let fc = area * p * t * (1.0 + (p - 2.0) * c * c / s) / (h * h);
            if let Some(r) = self.right[k] {
                out[r] += fa;
                out[k] += fa;
            }
            if let Some(t) = self.up[k] {
                out[t] += fc;
                out[k] += fc;
            }
            let v = (u[k] * inv).abs().max(v_floor);
            if b[k] != 0.0 && v > 0.0 {
                out[k] += (self.beta * b[k]).abs() * p * (p - 1.0) * v.powf(p - 2.0);
            }
        }
        let floor = area * out.iter().sum::<f64>() / (area * u.len() as f64) * 1e-12;
        for x in out.iter_mut() {
            *x = (*x + floor).max(f64::MIN_POSITIVE) * inv * inv;
        }
    }

    /// [`Quotient::value`] and its gradient.
    fn value_grad(&self, u: &[f64], grad: &mut [f64]) -> f64 {
        let h = self.grid.spacing();
        let area = self.grid.cell_area();
        let b = self.grid.cell_boundary();
        let p = self.p;
        let inv = 1.0 / self.norm(u);
        // Work on v = u / ‖u‖_p, so the denominator is 1.
        let mut dm = vec![0.0; u.len()];
        grad.fill(0.0);
        let mut num = 0.0;
        for k in 0..u.len() {
            let (a, c) = self.diffs(u, k);
            let (a, c) = (a * inv, c * inv);
            let s = a * a + c * c + self.eps2;
            let t = s.powf(p / 2.0 - 1.0);
            num += area * t * s;
            let f = area * p * t / h;
            if let Some(r) = self.right[k] {
                grad[r] += f * a;
                grad[k] -= f * a;
            }
            if let Some(t) = self.up[k] {
                grad[t] += f * c;
                grad[k] -= f * c;
            }
            let v = u[k] * inv;
            let m1 = if v == 0.0 {
                0.0
            } else {
                v.abs().powf(p - 1.0).copysign(v)
            };
            dm[k] = p * m1;
            num += self.beta * b[k] * m1 * v;
            grad[k] += self.beta * b[k] * dm[k];
        }
        let q = num;
        // Gradient in v of N/D at D = 1, then the chain rule through the normalization.
        let mut gv = 0.0;
        for k in 0..u.len() {
            grad[k] -= q * area * dm[k];
            gv += grad[k] * u[k] * inv;
        }
        for k in 0..u.len() {
            grad[k] = (grad[k] - gv * area * dm[k] / p) * inv;
        }
        q
    }
}

/// Exact coordinate minimization on cells below the curvature floor, where
/// the diagonal model underestimates the `|u|^{p-2}` curvature. Returns the
/// number of cells moved.
fn relax_small_cells(q: &Quotient, u: &mut [f64]) -> usize {
    if q.p >= 2.0 {
        return 0;
    }
    let n = u.len();
    let mean = u.iter().map(|x| x.abs()).sum::<f64>() / n as f64;
    let u_max = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let cells: Vec<usize> = (0..n).filter(|&k| u[k].abs() < 1e-2 * mean).collect();
    let mut g = vec![0.0; n];
    let mut moved = 0;
    for k in cells {
        let start = u[k];
        let mut slope = |u: &mut [f64], x: f64| {
            u[k] = x;
            q.value_grad(u, &mut g);
            g[k]
        };
        let d0 = slope(u, start);
        if d0 == 0.0 || !d0.is_finite() {
            u[k] = start;
            continue;
        }
        // Bracket the sign change of the partial derivative, then bisect.
        let dir = -d0.signum();
        let mut step = (1e-3 * u_max).max(start.abs());
        let (mut lo, mut hi) = (start, start);
        let mut found = false;
        for _ in 0..60 {
            let x = start + dir * step;
            let d = slope(u, x);
            if d.is_finite() && d.signum() != d0.signum() {
                hi = x;
                found = true;
                break;
            }
            lo = x;
            step *= 2.0;
            if step > 4.0 * u_max {
                break;
            }
        }
        if !found {
            u[k] = start;
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if slope(u, mid).signum() == d0.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        u[k] = 0.5 * (lo + hi);
        moved += usize::from(u[k] != start);
    }
    moved
}

/// Discrete `J_p(u)`.
pub fn rayleigh_quotient_p(grid: &GridDomain, u: &[f64], p: f64, beta: f64) -> Result<f64> {
    check_exponent(p)?;
    check_field(grid, u)?;
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "beta must be finite, got {beta}"
        )));
    }
    let (num, den) = Quotient::new(grid, p, beta, 0.0).parts(u);
    if den == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(num / den)
}

/// Forward-difference total variation `Σ h² |∇_h v|`.
pub fn grid_total_variation(grid: &GridDomain, v: &[f64]) -> f64 {
    let h = grid.spacing();
    (0..grid.len())
        .map(|k| {
            let (r, t) = grid.forward_neighbors(k);
            let a = r.map_or(0.0, |r| v[r] - v[k]);
            let c = t.map_or(0.0, |t| v[t] - v[k]);
            h * a.hypot(c)
        })
        .sum()
}

/// Estimate of the discrete trace constant
/// `c₁_h = max Σ b|v| / (TV_h(v) + Σ h²|v|)` over random boundary-layer
/// probes, piecewise constant on angular sectors.
pub fn trace_constant(grid: &GridDomain, probes: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = grid.boundary_distance();
    let h = grid.spacing();
    let n = grid.len();
    let centroid = {
        let mut c = [0.0, 0.0];
        for k in 0..n {
            let x = grid.center(k);
            c[0] += x[0] / n as f64;
            c[1] += x[1] / n as f64;
        }
        c
    };
    let angle: Vec<f64> = (0..n)
        .map(|k| {
            let x = grid.center(k);
            (x[1] - centroid[1]).atan2(x[0] - centroid[0])
        })
        .collect();
    let b = grid.cell_boundary();
    let area = grid.cell_area();
    let mut best: f64 = 0.0;
    let mut v = vec![0.0; n];
    for _ in 0..probes {
        let width = rng.gen_range(1..=3) as f64 * h;
        let sectors = rng.gen_range(1..=16usize);
        let values: Vec<f64> = (0..sectors).map(|_| rng.gen_range(0.0..1.0)).collect();
        let turn = rng.gen_range(0.0..std::f64::consts::TAU);
        for k in 0..n {
            v[k] = if dist[k] < width {
                let a = (angle[k] + turn).rem_euclid(std::f64::consts::TAU);
                let s = ((a / std::f64::consts::TAU) * sectors as f64) as usize;
                values[s.min(sectors - 1)]
            } else {
                0.0
            };
        }
        let trace: f64 = v.iter().zip(b).map(|(x, b)| b * x).sum();
        let mass: f64 = v.iter().sum::<f64>() * area;
        if mass > 0.0 {
            best = best.max(trace / (grid_total_variation(grid, &v) + mass));
        }
    }
    best
}

/// Normalizes to `‖u‖_p = 1` with nonnegative mean.
fn normalize(grid: &GridDomain, u: &mut [f64], p: f64) {
    let norm = (grid.cell_area() * u.iter().map(|x| x.abs().powf(p)).sum::<f64>()).powf(1.0 / p);
    let sign = if u.iter().sum::<f64>() < 0.0 {
        -1.0
    } else {
        1.0
    };
    if norm > 0.0 {
        u.iter_mut().for_each(|x| *x *= sign / norm);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `J_p` on the grid from the default start: constants for
/// `β ≥ 0`, a boundary-peaked profile for `β < 0`.
pub fn minimize_jp(
    grid: &GridDomain,
    p: f64,
    beta: f64,
    opts: &EigenOptions,
) -> Result<EigenResult> {
    let init = if beta >= 0.0 {
        vec![1.0; grid.len()]
    } else {
        let d = grid.boundary_distance();
        let dmax = d.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        d.iter().map(|x| 2.0 - x / dmax).collect()
    };
    minimize_jp_from(grid, p, beta, &init, opts)
}

/// Minimizes `J_p` by L-BFGS with Armijo backtracking from `init`.
///
/// When the iteration cap is hit the best field so far is returned with
/// `converged = false`.
pub fn minimize_jp_from(
    grid: &GridDomain,
    p: f64,
    beta: f64,
    init: &[f64],
    opts: &EigenOptions,
) -> Result<EigenResult> {
    check_exponent(p)?;
    check_field(grid, init)?;
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "beta must be finite, got {beta}"
        )));
    }
    if beta <= -1.0 {
        return Err(Error::Unbounded { beta });
    }
    let n = grid.len();
    if beta == 0.0 {
        let mut field = vec![1.0; n];
        normalize(grid, &mut field, p);
        return Ok(EigenResult {
            p,
            beta,
            lambda: 0.0,
            field,
            residual: 0.0,
            smoothing: 0.0,
            iterations: 0,
            converged: true,
            history: vec![0.0],
        });
    }
    if beta < 0.0 {
        let c1 = trace_constant(grid, opts.probes, opts.seed);
        let margin = 1.0 + beta * c1;
        if !(margin > 0.0) {
            return Err(Error::CoercivityFailure { beta, margin });
        }
    }
    let mut u = init.to_vec();
    normalize(grid, &mut u, p);
    if u.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroField);
    }
    // Gradient scale of a unit-norm field; smoothing is measured against it.
    let diam = {
        let (nx, ny) = grid.dims();
        grid.spacing() * (nx.max(ny) as f64)
    };
    let scale = grid.area().powf(-1.0 / p) / diam;
    let floor = 1e-8 * scale;
    // For p < 2 the smoothed density is stiff where ∇u is small: walk ε down
    // from the gradient scale until the quotient stops moving.
    let mut eps = if p < 2.0 { 1e-1 * scale } else { floor };
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut previous: Option<f64> = None;
    let (stage, smoothing) = loop {
        let q = Quotient::new(grid, p, beta, eps);
        let stage = lbfgs(
            &q,
            &mut u,
            opts,
            opts.max_iter - iterations,
            opts.residual_tol,
            &mut history,
        );
        iterations += stage.iterations;
        let value = *history
            .last()
            .expect("history starts with the initial value");
        let settled = previous
            .is_some_and(|v| (value - v).abs() <= opts.smoothing_tol * value.abs().max(1e-300));
        if settled || eps <= floor || iterations >= opts.max_iter {
            break (stage, eps);
        }
        previous = Some(value);
        eps = (eps / 10.0).max(floor);
    };
    let converged = stage.converged;
    normalize(grid, &mut u, p);
    let lambda = rayleigh_quotient_p(grid, &u, p, beta)?;
    Ok(EigenResult {
        p,
        beta,
        lambda,
        field: u,
        residual: stage.residual,
        smoothing,
        iterations,
        converged,
        history,
    })
}

const STALL: usize = 100;
const RESCUES: usize = 50;

fn clear(s: &mut Vec<Vec<f64>>, y: &mut Vec<Vec<f64>>, rho: &mut Vec<f64>) {
    s.clear();
    y.clear();
    rho.clear();
}

struct Stage {
    iterations: usize,
    residual: f64,
    converged: bool,
}

/// L-BFGS with Armijo backtracking on the quotient, starting at `u`.
fn lbfgs(
    q: &Quotient,
    u: &mut Vec<f64>,
    opts: &EigenOptions,
    budget: usize,
    residual_tol: f64,
    history: &mut Vec<f64>,
) -> Stage {
    let grid = q.grid;
    let p = q.p;
    let n = u.len();
    let area = grid.cell_area();
    let residual_of = |g: &[f64], u: &[f64], val: f64| {
        // Gradient in the dual norm of the diagonal curvature model, so
        // ½ r² |Q| estimates the remaining decrease. Cells pushed towards a
        // numerically zero value sit at the cusp of |u|^p and are skipped.
        let mut diag = vec![0.0; u.len()];
        q.curvature(u, &mut diag);
        let u_max = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let dual: f64 = g
            .iter()
            .zip(u)
            .zip(&diag)
            .filter(|&((gk, uk), _)| !(p < 2.0 && uk.abs() <= 1e-8 * u_max && gk * uk >= 0.0))
            .map(|((gk, _), dk)| gk * gk / dk)
            .sum();
        (dual / val.abs().max(1.0)).sqrt()
    };
    let mut g = vec![0.0; n];
    let mut val = q.value_grad(u, &mut g);
    history.push(val);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut trial = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    let mut stalled = 0;
    let mut stall_residual = f64::INFINITY;
    let mut rescues = 0;
    let rescue = |u: &mut Vec<f64>, val: &mut f64, g: &mut Vec<f64>| {
        relax_small_cells(q, u);
        *val = q.value_grad(u, g);
        residual_of(g, u, *val)
    };
    while iterations < budget {
        iterations += 1;
        // Two-loop recursion with a diagonal initial inverse Hessian.
        q.curvature(u, &mut diag);
        let mut d: Vec<f64> = g.iter().map(|x| -x).collect();
        let m = s_hist.len();
        let mut alpha = vec![0.0; m];
        for i in (0..m).rev() {
            alpha[i] = rho_hist[i] * dot(&s_hist[i], &d);
            for (dk, yk) in d.iter_mut().zip(&y_hist[i]) {
                *dk -= alpha[i] * yk;
            }
        }
        let gamma = match m {
            0 => 1.0,
            _ => {
                let y = &y_hist[m - 1];
                let yhy: f64 = y.iter().zip(&diag).map(|(yk, dk)| yk * yk / dk).sum();
                dot(&s_hist[m - 1], y) / yhy
            }
        };
        d.iter_mut().zip(&diag).for_each(|(x, dk)| *x *= gamma / dk);
        for i in 0..m {
            let beta_i = rho_hist[i] * dot(&y_hist[i], &d);
            for (dk, sk) in d.iter_mut().zip(&s_hist[i]) {
                *dk += (alpha[i] - beta_i) * sk;
            }
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            let gn = dot(&g, &g).sqrt();
            let un = dot(u, u).sqrt();
            let step = if gn > 0.0 { 1e-2 * un / gn } else { 0.0 };
            d = g.iter().map(|x| -x * step).collect();
            slope = dot(&g, &d);
            if !(slope < 0.0) {
                converged = true;
                break;
            }
        }
        // Armijo backtracking from the full step.
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            for k in 0..n {
                trial[k] = u[k] + t * d[k];
            }
            let v = q.value_grad(&trial, &mut g_new);
            if v.is_finite() && v <= val + 1e-4 * t * slope {
                accepted = Some(v);
                break;
            }
            t *= 0.5;
        }
        let Some(v_new) = accepted else {
            // No decrease representable along the model direction.
            let before = residual_of(&g, u, val);
            if before >= residual_tol
                && rescues < RESCUES
                && rescue(u, &mut val, &mut g) < 0.9 * before
            {
                rescues += 1;
                clear(&mut s_hist, &mut y_hist, &mut rho_hist);
                stalled = 0;
                continue;
            }
            converged = before < residual_tol;
            break;
        };
        let s: Vec<f64> = (0..n).map(|k| trial[k] - u[k]).collect();
        let y: Vec<f64> = (0..n).map(|k| g_new[k] - g[k]).collect();
        let sy = dot(&s, &y);
        std::mem::swap(u, &mut trial);
        std::mem::swap(&mut g, &mut g_new);
        let change = (val - v_new).abs() / v_new.abs().max(1.0);
        val = v_new;
        history.push(val);
        if t < 1e-4 {
            // The quasi-Newton model is poor here; rebuild it.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        } else if sy > 1e-300 {
            if s_hist.len() == opts.memory.max(1) {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
            rho_hist.push(1.0 / sy);
        }
        // Keep the scale near 1; the quotient is 0-homogeneous.
        let norm = (area * u.iter().map(|x| x.abs().powf(p)).sum::<f64>()).powf(1.0 / p);
        if !(0.5..=2.0).contains(&norm) {
            normalize(grid, u, p);
            val = q.value_grad(u, &mut g);
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }
        if change < opts.tol {
            stalled += 1;
        } else {
            stalled = 0;
        }
        if stalled >= STALL {
            // Accepted steps no longer change the quotient in floating point;
            // carry on only while the residual still improves.
            let res = residual_of(&g, u, val);
            if res < residual_tol {
                converged = true;
                break;
            }
            stalled = 0;
            if res < 0.9 * stall_residual {
                stall_residual = res;
                continue;
            }
            if rescues < RESCUES && rescue(u, &mut val, &mut g) < 0.9 * res {
                rescues += 1;
                stall_residual = residual_of(&g, u, val);
                clear(&mut s_hist, &mut y_hist, &mut rho_hist);
                continue;
            }
            break;
        }
        if stalled >= 3 && residual_of(&g, u, val) < residual_tol {
            converged = true;
            break;
        }
    }
    Stage {
        iterations,
        residual: residual_of(&g, u, val),
        converged,
    }
}

/// Solves for each `p` in `p_list` (strictly decreasing), starting every
/// solve from the previous minimizer.
pub fn warm_start_path(
    grid: &GridDomain,
    beta: f64,
    p_list: &[f64],
    opts: &EigenOptions,
) -> Result<Vec<EigenResult>> {
    if p_list.is_empty() {
        return Err(Error::InvalidArgument("empty exponent list".into()));
    }
    if p_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(
            "exponents must be strictly decreasing".into(),
        ));
    }
    let mut out: Vec<EigenResult> = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let res = match out.last() {
            None => minimize_jp(grid, p, beta, opts)?,
            Some(prev) => minimize_jp_from(grid, p, beta, &prev.field, opts)?,
        };
        out.push(res);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, DomainSpec};

    #[test]
    fn constants_on_the_square() {
        let grid = rasterize(&DomainSpec::square(1.0), 1.0 / 16.0).unwrap();
        let u = vec![3.0; grid.len()];
        for p in [1.5, 2.0, 3.0] {
            let q = rayleigh_quotient_p(&grid, &u, p, 0.7).unwrap();
            assert!((q - 4.0 * 0.7).abs() < 1e-12);
        }
        assert_eq!(
            rayleigh_quotient_p(&grid, &vec![0.0; grid.len()], 2.0, 1.0),
            Err(Error::ZeroField)
        );
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let grid = rasterize(&DomainSpec::ball(1.0), 0.25).unwrap();
        let u: Vec<f64> = (0..grid.len())
            .map(|k| 1.0 + 0.3 * (k as f64).sin())
            .collect();
        for p in [1.3, 2.0, 3.5] {
            let q = Quotient::new(&grid, p, 0.8, 0.3);
            let mut g = vec![0.0; u.len()];
            q.value_grad(&u, &mut g);
            for k in [0, 3, u.len() / 2, u.len() - 1] {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[k] += 1e-6;
                dn[k] -= 1e-6;
                let fd = (q.value(&up) - q.value(&dn)) / 2e-6;
                assert!(
                    (fd - g[k]).abs() < 1e-6 * (1.0 + fd.abs()),
                    "p {p} k {k}: {fd} vs {}",
                    g[k]
                );
            }
        }
    }

    #[test]
    fn beta_zero_returns_constant() {
        let grid = rasterize(&DomainSpec::square(1.0), 0.25).unwrap();
        let r = minimize_jp(&grid, 1.7, 0.0, &EigenOptions::default()).unwrap();
        assert_eq!(r.lambda, 0.0);
        assert!(r.field.windows(2).all(|w| w[0] == w[1]) && r.field[0] > 0.0);
    }

    #[test]
    fn descent_and_constant_bound() {
        let grid = rasterize(&DomainSpec::square(1.0), 1.0 / 16.0).unwrap();
        let r = minimize_jp(&grid, 2.0, 0.5, &EigenOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.lambda <= 2.0);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(r.field.iter().all(|&x| x > 0.0));
    }
}
