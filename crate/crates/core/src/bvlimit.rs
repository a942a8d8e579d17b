//! The `p = 1` problem: the functional `J`, the set functional `R`, the
//! limit eigenvalue `Λ`, Cheeger constants and the `β < -1` blow-up.
//!
//! Perimeters on a grid are measured by a weighted neighbour graph: a set `E`
//! has perimeter `Σ w_xy` over edges with one end in `E`, and a field `v` has
//! total variation `Σ w_xy |v_x - v_y|`. Stencil edges that would leave Ω are
//! cut short at the last interior cell they cross, and their exit through
//! `∂Ω` is credited to that cell's trace weight `b_x`. So `TV(v) + Σ b_x|v_x|`
//! measures `v` extended by zero, and the discrete coarea formula holds
//! exactly: the relaxed problem over `v ∈ [0, 1]` and the set problem have the
//! same minimum, and each Dinkelbach subproblem is a minimum cut.

use serde::{Deserialize, Serialize};

use crate::flow::NetworkBuilder;
use crate::geometry::{GridDomain, Side};
use crate::{beta_hat, Error, Result};

/// Neighbourhood used to measure perimeters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    /// Nearest neighbours only: counts cell faces. Exact for grid-aligned
    /// sets, overestimates curved boundaries by up to `4/π`.
    Faces,
    /// 32 neighbours (offsets with coordinates up to 3). Straight cuts along
    /// any of the 16 edge directions are measured exactly, others within 1.5%.
    #[default]
    Wide,
}

impl Stencil {
    fn classes(self) -> Vec<((i32, i32), f64)> {
        match self {
            Stencil::Faces => vec![((1, 0), 1.0)],
            Stencil::Wide => WIDE_CLASSES.iter().copied().zip(wide_weights()).collect(),
        }
    }

    /// Measured length of a unit straight segment with normal angle `theta`
    /// (exact = 1).
    pub fn line_measure(self, theta: f64) -> f64 {
        let (c, s) = (theta.cos(), theta.sin());
        self.classes()
            .into_iter()
            .flat_map(|((a, b), w)| class_offsets(a, b).into_iter().map(move |o| (o, w)))
            .map(|((dx, dy), w)| w * (f64::from(dx) * c + f64::from(dy) * s).abs())
            .sum()
    }
}

const WIDE_CLASSES: [(i32, i32); 5] = [(1, 0), (1, 1), (2, 1), (3, 1), (3, 2)];

/// Offsets of one class up to the grid symmetries, one per undirected direction.
fn class_offsets(a: i32, b: i32) -> Vec<(i32, i32)> {
    if b == 0 {
        vec![(a, 0), (0, a)]
    } else if a == b {
        vec![(a, a), (a, -a)]
    } else {
        vec![(a, b), (b, a), (a, -b), (-b, a)]
    }
}

/// Per-class weights (in units of `h`) making cuts exact along the class normals.
fn wide_weights() -> [f64; 5] {
    let n = WIDE_CLASSES.len();
    let mut m = [[0.0f64; 6]; 5];
    for (i, &(na, nb)) in WIDE_CLASSES.iter().enumerate() {
        let len = f64::from(na * na + nb * nb).sqrt();
        let normal = (f64::from(na) / len, f64::from(nb) / len);
        for (j, &(a, b)) in WIDE_CLASSES.iter().enumerate() {
            m[i][j] = class_offsets(a, b)
                .iter()
                .map(|&(dx, dy)| (f64::from(dx) * normal.0 + f64::from(dy) * normal.1).abs())
                .sum();
        }
        m[i][n] = 1.0;
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = m[row][col] / m[col][col];
                let pivot = m[col];
                for (x, y) in m[row][col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * y;
                }
            }
        }
    }
    let mut w = [0.0; 5];
    for i in 0..n {
        w[i] = m[i][n] / m[i][i];
    }
    w
}

type GridCell = (isize, isize);

/// Walks from interior cell `(i, j)` towards `(i + dx, j + dy)` when that
/// cell is exterior. Returns the last interior cell crossed, its grid
/// coordinates and the first exterior cell after it.
fn walk_out(
    grid: &GridDomain,
    i: isize,
    j: isize,
    dx: isize,
    dy: isize,
) -> Option<(usize, GridCell, GridCell)> {
    if grid.cell_at(i + dx, j + dy).is_some() {
        return None;
    }
    let mut last = (grid.cell_at(i, j)?, (i, j));
    let samples = 4 * dx.abs().max(dy.abs());
    for s in 0..samples {
        let t = (s as f64 + 0.5) / samples as f64;
        let c = (
            i + (t * dx as f64).round() as isize,
            j + (t * dy as f64).round() as isize,
        );
        match grid.cell_at(c.0, c.1) {
            Some(k) => last = (k, c),
            None => return Some((last.0, last.1, c)),
        }
    }
    Some((last.0, last.1, (i + dx, j + dy)))
}

fn side_slot(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
        Side::Down => 2,
        Side::Up => 3,
    }
}

/// Weighted neighbour graph on the cells of a [`GridDomain`]. Edges that
/// would leave Ω are shortened to their last interior cell, so perimeters of
/// sets near the boundary are not underestimated.
#[derive(Debug, Clone)]
pub struct TvGraph<'g> {
    grid: &'g GridDomain,
    stencil: Stencil,
    edges: Vec<[u32; 2]>,
    weights: Vec<f64>,
    boundary: Vec<f64>,
    adj_start: Vec<usize>,
    adj: Vec<(u32, f64)>,
}

impl<'g> TvGraph<'g> {
    pub fn new(grid: &'g GridDomain, stencil: Stencil) -> Self {
        let h = grid.spacing();
        let offsets: Vec<((i32, i32), f64)> = stencil
            .classes()
            .into_iter()
            .flat_map(|((a, b), wc)| class_offsets(a, b).into_iter().map(move |o| (o, wc * h)))
            .collect();
        let n = grid.len();
        let mut face_measure = vec![[0.0f64; 4]; n];
        for f in grid.faces() {
            face_measure[f.cell][side_slot(f.side)] = f.measure;
        }
        // Stencil length of a straight line with the normal implied by a face
        // measure `h / (|n_x| + |n_y|)`.
        let line_at = |m: f64| {
            let s = (h / m).clamp(1.0, std::f64::consts::SQRT_2);
            let theta =
                std::f64::consts::FRAC_PI_4 - (s / std::f64::consts::SQRT_2).min(1.0).acos();
            stencil.line_measure(theta)
        };
        let mut edges = Vec::with_capacity(n * offsets.len());
        let mut weights = Vec::with_capacity(n * offsets.len());
        let mut boundary = vec![0.0; n];
        for (k, &(i, j)) in grid.cells().iter().enumerate() {
            let (i, j) = (i as isize, j as isize);
            for &((dx, dy), w) in &offsets {
                let (dx, dy) = (dx as isize, dy as isize);
                if let Some(l) = grid.cell_at(i + dx, j + dy) {
                    edges.push([k as u32, l as u32]);
                    weights.push(w);
                }
                for (sx, sy) in [(dx, dy), (-dx, -dy)] {
                    let Some((last, (li, lj), (oi, oj))) = walk_out(grid, i, j, sx, sy) else {
                        continue;
                    };
                    // The part inside Ω ends at the last interior cell crossed.
                    if last != k {
                        edges.push([k as u32, last as u32]);
                        weights.push(w);
                    }
                    // The exit through ∂Ω belongs to the trace of the last
                    // cell, corrected for the stencil's direction bias.
                    let fm = &face_measure[last];
                    let mut exits = Vec::with_capacity(2);
                    match oi - li {
                        1 => exits.push(fm[1]),
                        -1 => exits.push(fm[0]),
                        _ => {}
                    }
                    match oj - lj {
                        1 => exits.push(fm[3]),
                        -1 => exits.push(fm[2]),
                        _ => {}
                    }
                    exits.retain(|&m| m > 0.0);
                    if exits.is_empty() {
                        exits.extend(fm.iter().copied().filter(|&m| m > 0.0));
                    }
                    let line = if exits.is_empty() {
                        1.0
                    } else {
                        exits.iter().map(|&m| line_at(m)).sum::<f64>() / exits.len() as f64
                    };
                    boundary[last] += w / line;
                }
            }
        }
        // Normalize the total to the face-measure boundary length.
        let total: f64 = boundary.iter().sum();
        if total > 0.0 {
            let scale = grid.boundary_measure() / total;
            boundary.iter_mut().for_each(|b| *b *= scale);
        }
        let mut adj_start = vec![0usize; n + 1];
        for e in &edges {
            adj_start[e[0] as usize + 1] += 1;
            adj_start[e[1] as usize + 1] += 1;
        }
        for i in 0..n {
            adj_start[i + 1] += adj_start[i];
        }
        let mut fill = adj_start.clone();
        let mut adj = vec![(0u32, 0.0); adj_start[n]];
        for (e, &w) in edges.iter().zip(&weights) {
            for (a, b) in [(e[0], e[1]), (e[1], e[0])] {
                adj[fill[a as usize]] = (b, w);
                fill[a as usize] += 1;
            }
        }
        TvGraph {
            grid,
            stencil,
            edges,
            weights,
            boundary,
            adj_start,
            adj,
        }
    }

    pub fn grid(&self) -> &'g GridDomain {
        self.grid
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Trace weight of each cell: the stencil edges leaving Ω through it,
    /// so that `TV + Σ b|v|` is the total variation of `v` extended by zero.
    pub fn cell_boundary(&self) -> &[f64] {
        &self.boundary
    }

    /// `|∂Ω|_h = Σ b_x`.
    pub fn boundary_measure(&self) -> f64 {
        self.boundary.iter().sum()
    }

    /// `Σ w_xy |v_x - v_y|`.
    pub fn total_variation(&self, v: &[f64]) -> f64 {
        self.edges
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * (v[e[0] as usize] - v[e[1] as usize]).abs())
            .sum()
    }

    /// Perimeter of a cell set inside the domain.
    pub fn cut(&self, set: &[bool]) -> f64 {
        self.edges
            .iter()
            .zip(&self.weights)
            .filter(|(e, _)| set[e[0] as usize] != set[e[1] as usize])
            .map(|(_, w)| w)
            .sum()
    }

    fn neighbors(&self, k: usize) -> &[(u32, f64)] {
        &self.adj[self.adj_start[k]..self.adj_start[k + 1]]
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {n} values but the grid has {} cells",
                self.grid.len()
            )));
        }
        Ok(())
    }

    /// Perimeter inside Ω, boundary contact and area of a cell set.
    pub fn measures(&self, set: &[bool]) -> Result<SetMeasures> {
        self.check_len(set.len())?;
        let b = &self.boundary;
        let contact = set.iter().zip(b).filter(|(s, _)| **s).map(|(_, b)| b).sum();
        let count = set.iter().filter(|s| **s).count();
        Ok(SetMeasures {
            perimeter: self.cut(set),
            contact,
            volume: count as f64 * self.grid.cell_area(),
        })
    }
}

/// Geometric data entering `R(E, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetMeasures {
    /// Perimeter of `E` inside Ω.
    pub perimeter: f64,
    /// Measure of `∂E ∩ ∂Ω`.
    pub contact: f64,
    pub volume: f64,
}

impl SetMeasures {
    /// `(P_Ω(E) + min(β,1) contact) / |E|`.
    pub fn ratio(&self, beta: f64) -> Result<f64> {
        if !(self.volume > 0.0) {
            return Err(Error::EmptySet);
        }
        Ok((self.perimeter + beta_hat(beta) * self.contact) / self.volume)
    }
}

/// A corner region of the rounded square: the part of the domain between a
/// rounded corner of radius `corner` and the circle of radius `radius`
/// tangent to the two sides meeting there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundedCornerSet {
    pub side: f64,
    pub corner: f64,
    pub radius: f64,
}

impl RoundedCornerSet {
    pub fn new(side: f64, corner: f64, radius: f64) -> Result<Self> {
        if !(side > 0.0 && corner >= 0.0 && corner < radius && radius <= side / 2.0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= corner < radius <= side/2, got side {side}, corner {corner}, radius {radius}"
            )));
        }
        Ok(RoundedCornerSet {
            side,
            corner,
            radius,
        })
    }

    pub fn measures(&self) -> SetMeasures {
        let (r, rho) = (self.radius, self.corner);
        let quarter = std::f64::consts::FRAC_PI_2;
        SetMeasures {
            perimeter: quarter * r,
            contact: 2.0 * (r - rho) + quarter * rho,
            volume: (1.0 - quarter / 2.0) * (r * r - rho * rho),
        }
    }
}

/// A subset `E ⊆ Ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubsetIndicator {
    /// Cells of a grid domain.
    Cells {
        cells: Vec<bool>,
    },
    /// `{inner < |x| < outer}` inside the ball of radius `outer` in `R^dimension`.
    Shell {
        inner: f64,
        outer: f64,
        dimension: usize,
    },
    RoundedCorner(RoundedCornerSet),
}

impl SubsetIndicator {
    /// Measures of the set; grid sets need the graph of their domain.
    pub fn measures(&self, graph: Option<&TvGraph>) -> Result<SetMeasures> {
        match self {
            SubsetIndicator::Cells { cells } => {
                let graph = graph
                    .ok_or_else(|| Error::InvalidArgument("grid set without a grid".into()))?;
                if !cells.iter().any(|&c| c) {
                    return Err(Error::EmptySet);
                }
                graph.measures(cells)
            }
            &SubsetIndicator::Shell {
                inner,
                outer,
                dimension,
            } => {
                if dimension < 1 || !(inner >= 0.0 && inner < outer) {
                    return Err(Error::InvalidArgument(format!(
                        "shell needs 0 <= inner < outer and dimension >= 1, got {inner}, {outer}, {dimension}"
                    )));
                }
                let n = dimension as i32;
                let omega = crate::geometry::unit_ball_volume(dimension);
                let sphere = |r: f64| f64::from(n) * omega * r.powi(n - 1);
                Ok(SetMeasures {
                    perimeter: if inner > 0.0 { sphere(inner) } else { 0.0 },
                    contact: sphere(outer),
                    volume: omega * (outer.powi(n) - inner.powi(n)),
                })
            }
            SubsetIndicator::RoundedCorner(set) => Ok(set.measures()),
        }
    }
}

/// `R(E, β) = (P_Ω(E) + min(β,1) H(∂E ∩ ∂Ω)) / |E|`.
pub fn evaluate_r(set: &SubsetIndicator, beta: f64, graph: Option<&TvGraph>) -> Result<f64> {
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "beta must be finite, got {beta}"
        )));
    }
    set.measures(graph)?.ratio(beta)
}

/// `J(v) = (TV(v) + min(β,1) Σ b_x |v_x|) / Σ h² |v_x|`.
pub fn evaluate_j(graph: &TvGraph, v: &[f64], beta: f64) -> Result<f64> {
    graph.check_len(v.len())?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("field has non-finite values".into()));
    }
    let b = &graph.boundary;
    let mass: f64 = v.iter().map(|x| x.abs()).sum::<f64>() * graph.grid.cell_area();
    if mass == 0.0 {
        return Err(Error::ZeroField);
    }
    let trace: f64 = v.iter().zip(b).map(|(x, b)| b * x.abs()).sum();
    Ok((graph.total_variation(v) + beta_hat(beta) * trace) / mass)
}

/// Best superlevel set `{v > t}` of a nonnegative field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub level: f64,
    pub cells: Vec<bool>,
    pub value: f64,
}

/// Scans every superlevel set `{v > t}`, `t ≥ 0`, and returns the one with
/// the smallest `R`. Ties go to the higher level.
pub fn extract_level_set(graph: &TvGraph, v: &[f64], beta: f64) -> Result<LevelSet> {
    graph.check_len(v.len())?;
    if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidArgument(
            "level sets need a finite nonnegative field".into(),
        ));
    }
    let mut order: Vec<usize> = (0..v.len()).filter(|&k| v[k] > 0.0).collect();
    if order.is_empty() {
        return Err(Error::EmptySet);
    }
    order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    let bw = beta_hat(beta);
    let b = &graph.boundary;
    let area = graph.grid.cell_area();
    let mut inside = vec![false; v.len()];
    let (mut cut, mut contact, mut volume) = (0.0, 0.0, 0.0);
    let mut best: Option<(f64, usize)> = None;
    let mut i = 0;
    while i < order.len() {
        let top = v[order[i]];
        while i < order.len() && v[order[i]] == top {
            let k = order[i];
            for &(l, w) in graph.neighbors(k) {
                if inside[l as usize] {
                    cut -= w;
                } else {
                    cut += w;
                }
            }
            inside[k] = true;
            contact += b[k];
            volume += area;
            i += 1;
        }
        let value = (cut.max(0.0) + bw * contact) / volume;
        if best.is_none_or(|(bv, _)| value < bv) {
            best = Some((value, i));
        }
    }
    let (_, count) = best.expect("at least one candidate");
    let upper = v[order[count - 1]];
    let lower = if count < order.len() {
        v[order[count]]
    } else {
        0.0
    };
    let mut cells = vec![false; v.len()];
    for &k in &order[..count] {
        cells[k] = true;
    }
    let m = graph.measures(&cells)?;
    Ok(LevelSet {
        level: 0.5 * (upper + lower),
        value: m.ratio(beta)?,
        cells,
    })
}

/// How each Dinkelbach subproblem is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Subproblem {
    /// Exact minimum cut.
    #[default]
    MinCut,
    /// First-order primal-dual iterations on the relaxed problem followed by
    /// thresholding.
    PrimalDual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitOptions {
    pub subproblem: Subproblem,
    /// Relative decrease of `s` below which the outer iteration stops.
    pub tol: f64,
    pub max_outer: usize,
    /// Duality-gap tolerance of the primal-dual solver, relative to `Σ h² s`.
    pub pd_tol: f64,
    pub pd_max_iter: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            subproblem: Subproblem::MinCut,
            tol: 1e-10,
            max_outer: 100,
            pd_tol: 1e-6,
            pd_max_iter: 200_000,
        }
    }
}

/// Output of [`minimize_j`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitResult {
    pub beta: f64,
    /// `Λ_h`, the value of `R` on `set`.
    pub lambda: f64,
    /// Threshold producing `set` from `field`.
    pub level: f64,
    pub set: Vec<bool>,
    /// Last subproblem minimizer (binary for [`Subproblem::MinCut`]).
    pub field: Vec<f64>,
    /// `s_k`, starting from `R(Ω)`.
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// Minimizes `Σ w|v_x - v_y| + Σ c_x v_x` over indicator vectors.
fn min_cut_subproblem(graph: &TvGraph, c: &[f64]) -> Vec<bool> {
    let n = c.len();
    let total: f64 = c.iter().map(|x| x.abs()).sum();
    if total == 0.0 {
        return vec![false; n];
    }
    let scale = 2f64.powi(50) / total;
    let limit = 1i64 << 60;
    let quantize = |x: f64| ((x * scale).round().min(limit as f64)) as i64;
    let (s, t) = (n, n + 1);
    let mut b = NetworkBuilder::new(n + 2, graph.edges.len() + n);
    for (e, &w) in graph.edges.iter().zip(&graph.weights) {
        let cap = quantize(w);
        b.add(e[0] as usize, e[1] as usize, cap, cap);
    }
    for (k, &ck) in c.iter().enumerate() {
        let cap = quantize(ck.abs());
        if cap == 0 {
            continue;
        }
        if ck < 0.0 {
            b.add(s, k, cap, 0);
        } else {
            b.add(k, t, cap, 0);
        }
    }
    let mut net = b.build();
    net.max_flow(s, t);
    let mut side = net.source_side(s);
    side.truncate(n);
    side
}

/// Chambolle-Pock iterations for `min_{v ∈ [0,1]} Σ w|v_x - v_y| + Σ c_x v_x`.
/// Returns the field and the final duality gap.
fn primal_dual_subproblem(
    graph: &TvGraph,
    c: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = c.len();
    let m = graph.edges.len();
    let mut sq = vec![0.0f64; n];
    for (e, w) in graph.edges.iter().zip(&graph.weights) {
        sq[e[0] as usize] += w * w;
        sq[e[1] as usize] += w * w;
    }
    let norm = (2.0 * sq.iter().cloned().fold(0.0, f64::max))
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let (tau, sigma) = (0.99 / norm, 0.99 / norm);
    let mut v = vec![0.5f64; n];
    let mut vbar = v.clone();
    let mut q = vec![0.0f64; m];
    let mut ktq = vec![0.0f64; n];
    let mut gap = f64::INFINITY;
    let scale: f64 = c
        .iter()
        .map(|x| x.abs())
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    for it in 0..max_iter {
        for (j, (e, w)) in graph.edges.iter().zip(&graph.weights).enumerate() {
            let d = w * (vbar[e[0] as usize] - vbar[e[1] as usize]);
            q[j] = (q[j] + sigma * d).clamp(-1.0, 1.0);
        }
        ktq.fill(0.0);
        for (j, (e, w)) in graph.edges.iter().zip(&graph.weights).enumerate() {
            ktq[e[0] as usize] += w * q[j];
            ktq[e[1] as usize] -= w * q[j];
        }
        for k in 0..n {
            let old = v[k];
            v[k] = (old - tau * (ktq[k] + c[k])).clamp(0.0, 1.0);
            vbar[k] = 2.0 * v[k] - old;
        }
        if it % 50 == 49 || it + 1 == max_iter {
            let primal =
                graph.total_variation(&v) + v.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
            ktq.fill(0.0);
            for (j, (e, w)) in graph.edges.iter().zip(&graph.weights).enumerate() {
                ktq[e[0] as usize] += w * q[j];
                ktq[e[1] as usize] -= w * q[j];
            }
            let dual: f64 = ktq.iter().zip(c).map(|(a, b)| (a + b).min(0.0)).sum();
            gap = primal - dual;
            if gap <= tol * scale {
                break;
            }
        }
    }
    (v, gap)
}

/// Minimizes `J` over fields on the grid: `Λ_h(Ω, β)`.
///
/// Dinkelbach iteration from `s_0 = R(Ω)`: each step minimizes
/// `TV(v) + min(β,1) Σ b|v| - s_k Σ h² v` and sets `s_{k+1}` to the ratio of
/// the best level set of the minimizer.
pub fn minimize_j(graph: &TvGraph, beta: f64, opts: &LimitOptions) -> Result<LimitResult> {
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "beta must be finite, got {beta}"
        )));
    }
    if beta <= -1.0 {
        return Err(Error::Unbounded { beta });
    }
    let grid = graph.grid;
    let n = grid.len();
    let full = vec![true; n];
    let mut best = LevelSet {
        level: 0.5,
        value: graph.measures(&full)?.ratio(beta)?,
        cells: full,
    };
    let mut field = vec![1.0; n];
    let mut trace = vec![best.value];
    let bw = beta_hat(beta);
    if bw == 0.0 {
        // Constants have J = 0 and J ≥ 0.
        return Ok(LimitResult {
            beta,
            lambda: 0.0,
            level: 0.5,
            set: best.cells,
            field,
            trace,
            converged: true,
        });
    }
    let area = grid.cell_area();
    let b = &graph.boundary;
    let mut converged = false;
    for _ in 0..opts.max_outer {
        let s = best.value;
        let c: Vec<f64> = b.iter().map(|bx| bw * bx - s * area).collect();
        let candidate = match opts.subproblem {
            Subproblem::MinCut => {
                let set = min_cut_subproblem(graph, &c);
                if !set.iter().any(|&x| x) {
                    converged = true;
                    break;
                }
                let value = graph.measures(&set)?.ratio(beta)?;
                field = set.iter().map(|&x| if x { 1.0 } else { 0.0 }).collect();
                LevelSet {
                    level: 0.5,
                    cells: set,
                    value,
                }
            }
            Subproblem::PrimalDual => {
                let (v, _gap) = primal_dual_subproblem(graph, &c, opts.pd_tol, opts.pd_max_iter);
                let Ok(level) = extract_level_set(graph, &v, beta) else {
                    converged = true;
                    break;
                };
                field = v;
                level
            }
        };
        if candidate.value < s - opts.tol * s.abs().max(1.0) {
            trace.push(candidate.value);
            best = candidate;
        } else {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            what: "Dinkelbach iteration",
            iterations: opts.max_outer,
        });
    }
    Ok(LimitResult {
        beta,
        lambda: best.value,
        level: best.level,
        set: best.cells,
        field,
        trace,
        converged,
    })
}

/// `h_h(Ω) = min_E P(E)/|E|` with the perimeter measured in the whole plane.
pub fn cheeger_constant(graph: &TvGraph, opts: &LimitOptions) -> Result<f64> {
    Ok(minimize_j(graph, 1.0, opts)?.lambda)
}

/// One entry of [`blow_up_sequence`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerValue {
    pub eps: f64,
    pub value: f64,
}

/// `J(χ_L)` for the boundary layers `L = {x ∈ Ω : dist(x, ∂Ω) ≤ ε}`.
pub fn blow_up_sequence(graph: &TvGraph, beta: f64, eps_list: &[f64]) -> Result<Vec<LayerValue>> {
    if !(beta < -1.0) {
        return Err(Error::InvalidArgument(format!(
            "the layer construction needs beta < -1, got {beta}"
        )));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(
            "layer widths must be strictly decreasing".into(),
        ));
    }
    let h = graph.grid.spacing();
    if let Some(&eps) = eps_list.iter().find(|&&e| !(e >= 2.0 * h)) {
        return Err(Error::LayerUnresolved { eps, h });
    }
    let dist = graph.grid.boundary_distance();
    eps_list
        .iter()
        .map(|&eps| {
            let layer: Vec<f64> = dist
                .iter()
                .map(|&d| if d <= eps { 1.0 } else { 0.0 })
                .collect();
            Ok(LayerValue {
                eps,
                value: evaluate_j(graph, &layer, beta)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rasterize, DomainSpec};

    #[test]
    fn wide_weights_are_positive_and_exact_on_axes() {
        let w = wide_weights();
        assert!(w.iter().all(|&x| x > 0.0));
        // Σ c |e·n| over the stencil for n = (1, 0).
        let axis: f64 = WIDE_CLASSES
            .iter()
            .zip(w)
            .map(|(&(a, b), wc)| {
                class_offsets(a, b)
                    .iter()
                    .map(|&(dx, _)| wc * f64::from(dx.abs()))
                    .sum::<f64>()
            })
            .sum();
        assert!((axis - 1.0).abs() < 1e-14);
    }

    #[test]
    fn half_square() {
        // cut 1, contact 2, area 1/2
        let grid = rasterize(&DomainSpec::square(1.0), 1.0 / 16.0).unwrap();
        let left = |g: &GridDomain| {
            (0..g.len())
                .map(|k| g.center(k)[0] < 0.0)
                .collect::<Vec<_>>()
        };
        let g = TvGraph::new(&grid, Stencil::Faces);
        let r = evaluate_r(
            &SubsetIndicator::Cells { cells: left(&grid) },
            1.0,
            Some(&g),
        )
        .unwrap();
        assert!((r - 6.0).abs() < 1e-12, "{r}");
        // Long edges leaving Ω near the ends of the cut are missing: O(h) low.
        let mut errs = Vec::new();
        for n in [16.0, 64.0] {
            let grid = rasterize(&DomainSpec::square(1.0), 1.0 / n).unwrap();
            let g = TvGraph::new(&grid, Stencil::Wide);
            let r = evaluate_r(
                &SubsetIndicator::Cells { cells: left(&grid) },
                1.0,
                Some(&g),
            )
            .unwrap();
            assert!(r < 6.0);
            errs.push(6.0 - r);
        }
        assert!(errs[1] < errs[0] / 3.0 && errs[1] < 0.05, "{errs:?}");
    }

    #[test]
    fn parametric_sets() {
        let shell = SubsetIndicator::Shell {
            inner: 0.5,
            outer: 1.0,
            dimension: 2,
        };
        assert!((evaluate_r(&shell, 1.0, None).unwrap() - 4.0).abs() < 1e-12);
        let ball = SubsetIndicator::Shell {
            inner: 0.0,
            outer: 1.0,
            dimension: 2,
        };
        assert!((evaluate_r(&ball, 0.5, None).unwrap() - 1.0).abs() < 1e-12);
        let corner = RoundedCornerSet::new(2.0, 0.1, 0.5).unwrap();
        let r = evaluate_r(&SubsetIndicator::RoundedCorner(corner), -1.0, None).unwrap();
        assert!((r + 2.0 / 0.6).abs() < 1e-12);
        assert!(RoundedCornerSet::new(2.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn level_set_of_plateaus() {
        let grid = rasterize(&DomainSpec::square(1.0), 1.0 / 8.0).unwrap();
        let g = TvGraph::new(&grid, Stencil::Faces);
        let v: Vec<f64> = (0..grid.len())
            .map(|k| if grid.center(k)[0] < 0.0 { 0.9 } else { 0.3 })
            .collect();
        // {v > 0.6} is the left half (R = 8 at β = 1); {v > 0} is the square (R = 4).
        let ls = extract_level_set(&g, &v, 1.0).unwrap();
        assert!(ls.cells.iter().all(|&c| c));
        assert!((ls.value - 4.0).abs() < 1e-12);
        assert!((ls.level - 0.15).abs() < 1e-15);
        let ls = extract_level_set(&g, &v, 0.1).unwrap();
        assert!((ls.value - 0.4).abs() < 1e-12);
    }

    #[test]
    fn min_cut_matches_primal_dual() {
        let grid = rasterize(&DomainSpec::rectangle(1.0, 0.5), 1.0 / 16.0).unwrap();
        let g = TvGraph::new(&grid, Stencil::Wide);
        let cut = minimize_j(&g, 2.0, &LimitOptions::default()).unwrap();
        let pd = minimize_j(
            &g,
            2.0,
            &LimitOptions {
                subproblem: Subproblem::PrimalDual,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            (cut.lambda - pd.lambda).abs() < 1e-3 * cut.lambda,
            "{} vs {}",
            cut.lambda,
            pd.lambda
        );
        assert!(cut.trace.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn refuses_unbounded_beta() {
        let grid = rasterize(&DomainSpec::square(1.0), 0.25).unwrap();
        let g = TvGraph::new(&grid, Stencil::Faces);
        assert_eq!(
            minimize_j(&g, -1.0, &LimitOptions::default()).unwrap_err(),
            Error::Unbounded { beta: -1.0 }
        );
        assert!(blow_up_sequence(&g, -0.5, &[0.5]).is_err());
        assert!(matches!(
            blow_up_sequence(&g, -2.0, &[0.25]),
            Err(Error::LayerUnresolved { .. })
        ));
    }
}
