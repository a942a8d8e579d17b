//! Domains, their exact measures, and rasterization onto uniform grids.
//!
//! Every grid variant lives in the plane; balls and annuli also carry a
//! dimension so the radial code can work with them in any `N >= 2`.
//!
//! A [`GridDomain`] stores the interior cells (cell centers strictly inside
//! the open domain) and the list of cell faces separating an interior cell
//! from an exterior one. Each boundary face carries the measure it
//! contributes to `|∂Ω|_h`. Counting every face as `h` overestimates oblique
//! boundaries by up to `√2` (a digitized circle of radius `R` has `8R` worth
//! of faces), so faces produced by [`rasterize`] are weighted by
//! `h / (|n_x| + |n_y|)`, where `n` is the exact outward normal of the
//! boundary near the face. On grid-aligned boundaries the weight is exactly
//! `h`; the unweighted count stays available as
//! [`GridDomain::face_count_perimeter`].

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parametric description of a domain Ω.
///
/// Rectangles, rounded rectangles and ellipses are centered at the origin;
/// `width`/`height` are full side lengths, ellipse axes are semi-axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Ball {
        radius: f64,
        #[serde(default = "default_dimension")]
        dimension: usize,
    },
    Annulus {
        inner: f64,
        outer: f64,
        #[serde(default = "default_dimension")]
        dimension: usize,
    },
    Rectangle {
        width: f64,
        height: f64,
    },
    RoundedRectangle {
        width: f64,
        height: f64,
        corner: f64,
    },
    Ellipse {
        semi_x: f64,
        semi_y: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
}

fn default_dimension() -> usize {
    2
}

/// Boundary regularity class of a domain, recorded as metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Lipschitz,
    C1,
    Smooth,
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // ω_n = 2π/n · ω_{n-2}
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

impl DomainSpec {
    pub fn ball(radius: f64) -> Self {
        DomainSpec::Ball {
            radius,
            dimension: 2,
        }
    }

    pub fn ball_nd(radius: f64, dimension: usize) -> Self {
        DomainSpec::Ball { radius, dimension }
    }

    pub fn rectangle(width: f64, height: f64) -> Self {
        DomainSpec::Rectangle { width, height }
    }

    pub fn square(side: f64) -> Self {
        Self::rectangle(side, side)
    }

    pub fn dimension(&self) -> usize {
        match self {
            DomainSpec::Ball { dimension, .. } | DomainSpec::Annulus { dimension, .. } => {
                *dimension
            }
            _ => 2,
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        match self {
            DomainSpec::Ball { .. } | DomainSpec::Annulus { .. } | DomainSpec::Ellipse { .. } => {
                Smoothness::Smooth
            }
            DomainSpec::RoundedRectangle { .. } => Smoothness::C1,
            DomainSpec::Rectangle { .. } | DomainSpec::Polygon { .. } => Smoothness::Lipschitz,
        }
    }

    /// Checks the invariants of the variant.
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidDomain(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        }
        match self {
            DomainSpec::Ball { radius, dimension } => {
                positive("radius", *radius)?;
                if *dimension < 2 {
                    return Err(Error::InvalidDomain(format!(
                        "dimension must be >= 2, got {dimension}"
                    )));
                }
            }
            DomainSpec::Annulus {
                inner,
                outer,
                dimension,
            } => {
                positive("inner radius", *inner)?;
                positive("outer radius", *outer)?;
                if inner >= outer {
                    return Err(Error::InvalidDomain(format!(
                        "annulus needs inner < outer, got {inner} >= {outer}"
                    )));
                }
                if *dimension < 2 {
                    return Err(Error::InvalidDomain(format!(
                        "dimension must be >= 2, got {dimension}"
                    )));
                }
            }
            DomainSpec::Rectangle { width, height } => {
                positive("width", *width)?;
                positive("height", *height)?;
            }
            DomainSpec::RoundedRectangle {
                width,
                height,
                corner,
            } => {
                positive("width", *width)?;
                positive("height", *height)?;
                positive("corner radius", *corner)?;
                if *corner > width.min(*height) / 2.0 {
                    return Err(Error::InvalidDomain(format!(
                        "corner radius {corner} exceeds half the shorter side"
                    )));
                }
            }
            DomainSpec::Ellipse { semi_x, semi_y } => {
                positive("semi_x", *semi_x)?;
                positive("semi_y", *semi_y)?;
            }
            DomainSpec::Polygon { vertices } => validate_polygon(vertices)?,
        }
        Ok(())
    }

    /// Exact Lebesgue measure `|Ω|`.
    pub fn volume(&self) -> f64 {
        match self {
            DomainSpec::Ball { radius, dimension } => {
                unit_ball_volume(*dimension) * radius.powi(*dimension as i32)
            }
            DomainSpec::Annulus {
                inner,
                outer,
                dimension,
            } => {
                let n = *dimension as i32;
                unit_ball_volume(*dimension) * (outer.powi(n) - inner.powi(n))
            }
            DomainSpec::Rectangle { width, height } => width * height,
            DomainSpec::RoundedRectangle {
                width,
                height,
                corner,
            } => width * height - (4.0 - PI) * corner * corner,
            DomainSpec::Ellipse { semi_x, semi_y } => PI * semi_x * semi_y,
            DomainSpec::Polygon { vertices } => signed_area(vertices).abs(),
        }
    }

    /// Exact boundary measure `P(Ω)`.
    pub fn perimeter(&self) -> f64 {
        match self {
            DomainSpec::Ball { radius, dimension } => {
                let n = *dimension;
                n as f64 * unit_ball_volume(n) * radius.powi(n as i32 - 1)
            }
            DomainSpec::Annulus {
                inner,
                outer,
                dimension,
            } => {
                let n = *dimension;
                n as f64
                    * unit_ball_volume(n)
                    * (outer.powi(n as i32 - 1) + inner.powi(n as i32 - 1))
            }
            DomainSpec::Rectangle { width, height } => 2.0 * (width + height),
            DomainSpec::RoundedRectangle {
                width,
                height,
                corner,
            } => 2.0 * (width + height) - 8.0 * corner + 2.0 * PI * corner,
            DomainSpec::Ellipse { semi_x, semi_y } => ellipse_perimeter(*semi_x, *semi_y),
            DomainSpec::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % n];
                        (b[0] - a[0]).hypot(b[1] - a[1])
                    })
                    .sum()
            }
        }
    }

    /// The ball centered at the origin with the same volume, `Ω^#`.
    pub fn equimeasurable_ball(&self) -> DomainSpec {
        let n = self.dimension();
        if let DomainSpec::Ball { radius, dimension } = self {
            return DomainSpec::Ball {
                radius: *radius,
                dimension: *dimension,
            };
        }
        let radius = (self.volume() / unit_ball_volume(n)).powf(1.0 / n as f64);
        DomainSpec::Ball {
            radius,
            dimension: n,
        }
    }

    /// Axis-aligned bounding box `[xmin, ymin, xmax, ymax]` of a planar domain.
    pub fn bounding_box(&self) -> [f64; 4] {
        match self {
            DomainSpec::Ball { radius, .. } => [-radius, -radius, *radius, *radius],
            DomainSpec::Annulus { outer, .. } => [-outer, -outer, *outer, *outer],
            DomainSpec::Rectangle { width, height }
            | DomainSpec::RoundedRectangle { width, height, .. } => {
                [-width / 2.0, -height / 2.0, width / 2.0, height / 2.0]
            }
            DomainSpec::Ellipse { semi_x, semi_y } => [-semi_x, -semi_y, *semi_x, *semi_y],
            DomainSpec::Polygon { vertices } => {
                let mut b = [
                    f64::INFINITY,
                    f64::INFINITY,
                    f64::NEG_INFINITY,
                    f64::NEG_INFINITY,
                ];
                for v in vertices {
                    b[0] = b[0].min(v[0]);
                    b[1] = b[1].min(v[1]);
                    b[2] = b[2].max(v[0]);
                    b[3] = b[3].max(v[1]);
                }
                b
            }
        }
    }

    /// Membership of a point in the open planar domain.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let [x, y] = p;
        match self {
            DomainSpec::Ball { radius, .. } => x * x + y * y < radius * radius,
            DomainSpec::Annulus { inner, outer, .. } => {
                let r2 = x * x + y * y;
                r2 > inner * inner && r2 < outer * outer
            }
            DomainSpec::Rectangle { width, height } => {
                x.abs() < width / 2.0 && y.abs() < height / 2.0
            }
            DomainSpec::RoundedRectangle {
                width,
                height,
                corner,
            } => {
                let (ax, ay) = (x.abs(), y.abs());
                if ax >= width / 2.0 || ay >= height / 2.0 {
                    return false;
                }
                let (cx, cy) = (width / 2.0 - corner, height / 2.0 - corner);
                if ax > cx && ay > cy {
                    (ax - cx).powi(2) + (ay - cy).powi(2) < corner * corner
                } else {
                    true
                }
            }
            DomainSpec::Ellipse { semi_x, semi_y } => {
                (x / semi_x).powi(2) + (y / semi_y).powi(2) < 1.0
            }
            DomainSpec::Polygon { vertices } => point_in_polygon(vertices, p),
        }
    }

    /// Outward unit normal of the boundary at the boundary point nearest to `p`.
    pub fn outward_normal(&self, p: [f64; 2]) -> [f64; 2] {
        let [x, y] = p;
        let radial = || {
            let r = x.hypot(y);
            if r > 0.0 {
                [x / r, y / r]
            } else {
                [1.0, 0.0]
            }
        };
        match self {
            DomainSpec::Ball { .. } => radial(),
            DomainSpec::Annulus { inner, outer, .. } => {
                let r = x.hypot(y);
                let n = radial();
                if (outer - r).abs() <= (r - inner).abs() {
                    n
                } else {
                    [-n[0], -n[1]]
                }
            }
            DomainSpec::Rectangle { width, height } => box_normal(p, width / 2.0, height / 2.0),
            DomainSpec::RoundedRectangle {
                width,
                height,
                corner,
            } => {
                let (cx, cy) = (width / 2.0 - corner, height / 2.0 - corner);
                if x.abs() > cx && y.abs() > cy {
                    let dx = x - cx.copysign(x);
                    let dy = y - cy.copysign(y);
                    let r = dx.hypot(dy);
                    [dx / r, dy / r]
                } else {
                    box_normal(p, width / 2.0, height / 2.0)
                }
            }
            DomainSpec::Ellipse { semi_x, semi_y } => {
                let g = [x / (semi_x * semi_x), y / (semi_y * semi_y)];
                let r = g[0].hypot(g[1]);
                if r > 0.0 {
                    [g[0] / r, g[1] / r]
                } else {
                    [1.0, 0.0]
                }
            }
            DomainSpec::Polygon { vertices } => polygon_normal(vertices, p),
        }
    }
}

fn box_normal(p: [f64; 2], half_w: f64, half_h: f64) -> [f64; 2] {
    let dx = (half_w - p[0].abs()).abs();
    let dy = (half_h - p[1].abs()).abs();
    if dx <= dy {
        [1f64.copysign(p[0]), 0.0]
    } else {
        [0.0, 1f64.copysign(p[1])]
    }
}

/// Ellipse perimeter from the arithmetic–geometric mean form of the complete
/// elliptic integral of the second kind.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    let mut an = 1.0;
    let mut bn = b / a;
    let mut cn2 = 1.0 - bn * bn;
    let mut sum = 0.5 * cn2;
    let mut pow = 0.5;
    for _ in 0..64 {
        let c = (an - bn) / 2.0;
        let (a1, b1) = ((an + bn) / 2.0, (an * bn).sqrt());
        an = a1;
        bn = b1;
        pow *= 2.0;
        cn2 = c * c;
        sum += pow * cn2;
        if cn2 < 1e-34 {
            break;
        }
    }
    2.0 * PI * a * (1.0 - sum) / an
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    }
    fn on_segment(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
        c[0] >= a[0].min(b[0])
            && c[0] <= a[0].max(b[0])
            && c[1] >= a[1].min(b[1])
            && c[1] <= a[1].max(b[1])
    }
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn validate_polygon(v: &[[f64; 2]]) -> Result<()> {
    let n = v.len();
    if n < 3 {
        return Err(Error::InvalidDomain(format!(
            "polygon needs at least 3 vertices, got {n}"
        )));
    }
    if v.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::InvalidDomain("polygon vertex is not finite".into()));
    }
    for i in 0..n {
        for j in i + 1..n {
            if v[i] == v[j] {
                return Err(Error::InvalidDomain(format!(
                    "polygon vertices {i} and {j} coincide"
                )));
            }
        }
    }
    // Non-adjacent edges must not touch.
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(Error::InvalidDomain(format!(
                    "polygon edges {i} and {j} intersect"
                )));
            }
        }
    }
    if signed_area(v).abs() <= 0.0 {
        return Err(Error::InvalidDomain("polygon has zero area".into()));
    }
    Ok(())
}

fn point_in_polygon(v: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

fn polygon_normal(v: &[[f64; 2]], p: [f64; 2]) -> [f64; 2] {
    let n = v.len();
    let ccw = signed_area(v) > 0.0;
    let mut best = (f64::INFINITY, [1.0, 0.0]);
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        let d = point_segment_distance(p, a, b);
        if d < best.0 {
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = dx.hypot(dy);
            let nrm = if ccw {
                [dy / len, -dx / len]
            } else {
                [-dy / len, dx / len]
            };
            best = (d, nrm);
        }
    }
    best.1
}

/// Which side of its owning cell a boundary face lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
    Down,
    Up,
}

/// A cell face separating an interior cell from the exterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    /// Index of the owning interior cell.
    pub cell: usize,
    pub side: Side,
    /// Contribution of the face to `|∂Ω|_h`.
    pub measure: f64,
}

/// Rasterization of a planar domain on a uniform grid of spacing `h`.
///
/// Grid cell `(i, j)` covers `[x0 + i h, x0 + (i+1) h] × [y0 + j h, y0 + (j+1) h]`.
/// Interior cells are numbered row-major (by `j`, then `i`).
#[derive(Debug, Clone)]
pub struct GridDomain {
    h: f64,
    nx: usize,
    ny: usize,
    origin: [f64; 2],
    /// Interior-cell index of each grid cell.
    index: Vec<Option<usize>>,
    cells: Vec<(usize, usize)>,
    faces: Vec<BoundaryFace>,
    cell_boundary: Vec<f64>,
    cell_area: f64,
}

impl GridDomain {
    /// Builds a grid domain from a cell mask (`mask[j * nx + i]`), weighting
    /// each boundary face with `face_measure(cell center, side)`.
    pub fn from_mask_with(
        h: f64,
        nx: usize,
        ny: usize,
        origin: [f64; 2],
        mask: &[bool],
        mut face_measure: impl FnMut([f64; 2], Side) -> f64,
    ) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        if mask.len() != nx * ny {
            return Err(Error::InvalidArgument(format!(
                "mask has {} entries, expected {nx} x {ny}",
                mask.len()
            )));
        }
        let mut index = vec![None; nx * ny];
        let mut cells = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if mask[j * nx + i] {
                    index[j * nx + i] = Some(cells.len());
                    cells.push((i, j));
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::DegenerateRaster(
                "no cell center lies inside the domain".into(),
            ));
        }
        let mut grid = GridDomain {
            h,
            nx,
            ny,
            origin,
            index,
            cells,
            faces: Vec::new(),
            cell_boundary: Vec::new(),
            cell_area: h * h,
        };
        if !grid.is_connected() {
            return Err(Error::DegenerateRaster(
                "interior mask is not connected".into(),
            ));
        }
        let mut faces = Vec::new();
        let mut cell_boundary = vec![0.0; grid.cells.len()];
        for (k, &(i, j)) in grid.cells.iter().enumerate() {
            let c = grid.center_of(i, j);
            for side in [Side::Left, Side::Right, Side::Down, Side::Up] {
                if grid.neighbor(i, j, side).is_none() {
                    let m = face_measure(c, side);
                    faces.push(BoundaryFace {
                        cell: k,
                        side,
                        measure: m,
                    });
                    cell_boundary[k] += m;
                }
            }
        }
        grid.faces = faces;
        grid.cell_boundary = cell_boundary;
        Ok(grid)
    }

    /// Builds a grid domain from a bare mask; every boundary face counts `h`.
    pub fn from_mask(
        h: f64,
        nx: usize,
        ny: usize,
        origin: [f64; 2],
        mask: &[bool],
    ) -> Result<Self> {
        Self::from_mask_with(h, nx, ny, origin, mask, |_, _| h)
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// Number of interior cells.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    pub fn faces(&self) -> &[BoundaryFace] {
        &self.faces
    }

    /// Total boundary-face measure owned by each interior cell.
    pub fn cell_boundary(&self) -> &[f64] {
        &self.cell_boundary
    }

    /// Area carried by each cell: `h²` unless rescaled by [`GridDomain::with_area`].
    pub fn cell_area(&self) -> f64 {
        self.cell_area
    }

    /// `|Ω|_h`.
    pub fn area(&self) -> f64 {
        self.cell_area * self.cells.len() as f64
    }

    /// Rescales the cell area so that the cells add up to `area`.
    pub fn with_area(mut self, area: f64) -> Result<Self> {
        if !(area.is_finite() && area > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "area must be positive, got {area}"
            )));
        }
        self.cell_area = area / self.cells.len() as f64;
        Ok(self)
    }

    /// `|∂Ω|_h`, the sum of the boundary face measures.
    pub fn boundary_measure(&self) -> f64 {
        self.faces.iter().map(|f| f.measure).sum()
    }

    /// `h` times the number of boundary faces.
    pub fn face_count_perimeter(&self) -> f64 {
        self.h * self.faces.len() as f64
    }

    /// Interior-cell index of grid cell `(i, j)`, if interior.
    pub fn cell_at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        self.index[j as usize * self.nx + i as usize]
    }

    fn neighbor(&self, i: usize, j: usize, side: Side) -> Option<usize> {
        let (i, j) = (i as isize, j as isize);
        match side {
            Side::Left => self.cell_at(i - 1, j),
            Side::Right => self.cell_at(i + 1, j),
            Side::Down => self.cell_at(i, j - 1),
            Side::Up => self.cell_at(i, j + 1),
        }
    }

    /// Right and upper neighbors of interior cell `k`.
    pub fn forward_neighbors(&self, k: usize) -> (Option<usize>, Option<usize>) {
        let (i, j) = self.cells[k];
        (
            self.neighbor(i, j, Side::Right),
            self.neighbor(i, j, Side::Up),
        )
    }

    fn center_of(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.h,
            self.origin[1] + (j as f64 + 0.5) * self.h,
        ]
    }

    pub fn center(&self, k: usize) -> [f64; 2] {
        let (i, j) = self.cells[k];
        self.center_of(i, j)
    }

    /// Endpoints of a boundary face.
    pub fn face_segment(&self, face: &BoundaryFace) -> ([f64; 2], [f64; 2]) {
        let [cx, cy] = self.center(face.cell);
        let r = self.h / 2.0;
        match face.side {
            Side::Left => ([cx - r, cy - r], [cx - r, cy + r]),
            Side::Right => ([cx + r, cy - r], [cx + r, cy + r]),
            Side::Down => ([cx - r, cy - r], [cx + r, cy - r]),
            Side::Up => ([cx - r, cy + r], [cx + r, cy + r]),
        }
    }

    /// Distance from each interior cell center to the nearest boundary face.
    pub fn boundary_distance(&self) -> Vec<f64> {
        let segs: Vec<_> = self.faces.iter().map(|f| self.face_segment(f)).collect();
        (0..self.len())
            .map(|k| {
                let c = self.center(k);
                segs.iter()
                    .map(|&(a, b)| point_segment_distance(c, a, b))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    /// Full grid mask, row-major, including exterior cells.
    pub fn mask(&self) -> Vec<bool> {
        self.index.iter().map(Option::is_some).collect()
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.cells.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(k) = queue.pop_front() {
            let (i, j) = self.cells[k];
            for side in [Side::Left, Side::Right, Side::Down, Side::Up] {
                if let Some(n) = self.neighbor(i, j, side) {
                    if !seen[n] {
                        seen[n] = true;
                        count += 1;
                        queue.push_back(n);
                    }
                }
            }
        }
        count == self.cells.len()
    }
}

/// Rasterizes a planar domain: a cell is interior iff its center lies in the
/// open domain. The grid is padded by one exterior cell on every side and
/// its cell edges are aligned with the lower-left corner of the bounding box.
///
/// Boundary faces are weighted by the exact outward normal and the cells
/// share the exact area of the domain, so `|∂Ω|_h` and `|Ω|_h` are free of
/// staircase and lattice-count errors.
pub fn rasterize(spec: &DomainSpec, h: f64) -> Result<GridDomain> {
    spec.validate()?;
    if spec.dimension() != 2 {
        return Err(Error::InvalidArgument(format!(
            "grids are planar, got dimension {}",
            spec.dimension()
        )));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid spacing must be positive, got {h}"
        )));
    }
    if let DomainSpec::Polygon { vertices } = spec {
        let n = vertices.len();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (vertices[i], vertices[j]);
                if (a[0] - b[0]).hypot(a[1] - b[1]) < h {
                    return Err(Error::DegenerateRaster(format!(
                        "polygon vertices {i} and {j} are closer than h = {h}"
                    )));
                }
            }
        }
    }
    let [x0, y0, x1, y1] = spec.bounding_box();
    let cells_x = ((x1 - x0) / h - 1e-9).ceil().max(1.0);
    let cells_y = ((y1 - y0) / h - 1e-9).ceil().max(1.0);
    if cells_x * cells_y > 1.0e8 {
        return Err(Error::InvalidArgument(format!(
            "grid of {cells_x} x {cells_y} cells is too large"
        )));
    }
    let nx = cells_x as usize + 2;
    let ny = cells_y as usize + 2;
    let origin = [x0 - h, y0 - h];
    let mut mask = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let c = [
                origin[0] + (i as f64 + 0.5) * h,
                origin[1] + (j as f64 + 0.5) * h,
            ];
            mask[j * nx + i] = spec.contains(c);
        }
    }
    GridDomain::from_mask_with(h, nx, ny, origin, &mask, |c, side| {
        let mid = match side {
            Side::Left => [c[0] - h / 2.0, c[1]],
            Side::Right => [c[0] + h / 2.0, c[1]],
            Side::Down => [c[0], c[1] - h / 2.0],
            Side::Up => [c[0], c[1] + h / 2.0],
        };
        let n = spec.outward_normal(mid);
        h / (n[0].abs() + n[1].abs())
    })?
    .with_area(spec.volume())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn closed_form_measures() {
        assert!(close(DomainSpec::ball(1.0).volume(), PI, 1e-15));
        assert!(close(DomainSpec::rectangle(2.0, 1.0).volume(), 2.0, 1e-15));
        let rr = DomainSpec::RoundedRectangle {
            width: 1.0,
            height: 1.0,
            corner: 0.25,
        };
        assert!(close(rr.volume(), 1.0 - (4.0 - PI) * 0.0625, 1e-15));
        assert!(close(rr.volume(), 0.946349, 1e-6));
        assert!(close(DomainSpec::ball(1.0).perimeter(), 2.0 * PI, 1e-15));
        assert!(close(rr.perimeter(), 4.0 - 2.0 + 2.0 * PI * 0.25, 1e-15));
        assert!(close(rr.perimeter(), 3.5708, 1e-4));
        let ann = DomainSpec::Annulus {
            inner: 0.5,
            outer: 1.0,
            dimension: 2,
        };
        assert!(close(ann.perimeter(), 3.0 * PI, 1e-15));
        assert!(close(ann.volume(), 0.75 * PI, 1e-15));
    }

    #[test]
    fn higher_dimensional_balls() {
        assert!(close(unit_ball_volume(3), 4.0 * PI / 3.0, 1e-15));
        assert!(close(unit_ball_volume(4), PI * PI / 2.0, 1e-15));
        let b = DomainSpec::ball_nd(2.0, 3);
        assert!(close(b.perimeter() / b.volume(), 3.0 / 2.0, 1e-14));
    }

    #[test]
    fn ellipse_perimeter_matches_quadrature() {
        for &(a, b) in &[(1.0, 1.0), (1.5, 1.0 / 1.5), (3.0, 0.2), (0.7, 2.0)] {
            // composite Simpson on the parametrization
            let n = 20_000;
            let f = |t: f64| ((a * t.sin()).powi(2) + (b * t.cos()).powi(2)).sqrt();
            let dt = 2.0 * PI / n as f64;
            let mut s = f(0.0) + f(2.0 * PI);
            for k in 1..n {
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * dt);
            }
            let quad = s * dt / 3.0;
            assert!(close(ellipse_perimeter(a, b), quad, 1e-12), "{a} {b}");
        }
    }

    #[test]
    fn equimeasurable_ball_examples() {
        assert_eq!(
            DomainSpec::ball(1.0).equimeasurable_ball(),
            DomainSpec::ball(1.0)
        );
        match DomainSpec::rectangle(PI, 1.0).equimeasurable_ball() {
            DomainSpec::Ball {
                radius,
                dimension: 2,
            } => assert!(close(radius, 1.0, 1e-15)),
            other => panic!("{other:?}"),
        }
        match DomainSpec::rectangle(2.0, 1.0).equimeasurable_ball() {
            DomainSpec::Ball { radius, .. } => {
                assert!(close(radius, (2.0 / PI).sqrt(), 1e-15));
                assert!(close(radius, 0.79788, 1e-5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(DomainSpec::ball(-1.0).validate().is_err());
        assert!(DomainSpec::Annulus {
            inner: 1.0,
            outer: 0.5,
            dimension: 2
        }
        .validate()
        .is_err());
        assert!(DomainSpec::RoundedRectangle {
            width: 1.0,
            height: 1.0,
            corner: 0.6
        }
        .validate()
        .is_err());
        let bowtie = DomainSpec::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]],
        };
        assert!(bowtie.validate().is_err());
        let tri = DomainSpec::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        };
        assert!(tri.validate().is_ok());
        assert!(close(tri.volume(), 0.5, 1e-15));
    }

    #[test]
    fn square_rasters_are_exact() {
        let g = rasterize(&DomainSpec::square(1.0), 0.25).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.area(), 1.0);
        assert_eq!(g.boundary_measure(), 4.0);
        assert_eq!(g.face_count_perimeter(), 4.0);
        let g = rasterize(&DomainSpec::square(1.0), 0.5).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.faces().len(), 8);
        let g = rasterize(&DomainSpec::rectangle(2.0, 0.75), 0.125).unwrap();
        assert_eq!(g.area(), 1.5);
        assert_eq!(g.boundary_measure(), 5.5);
    }

    #[test]
    fn face_weights_remove_staircase_bias_on_disks() {
        let g = rasterize(&DomainSpec::ball(1.0), 1.0 / 128.0).unwrap();
        // raw faces count 8R, weighted faces approach 2πR
        assert!(close(g.face_count_perimeter(), 8.0, 0.01));
        assert!(close(g.boundary_measure(), 2.0 * PI, 0.01));
        for f in g.faces() {
            assert!(
                f.measure <= g.spacing() + 1e-15 && f.measure >= g.spacing() / 2f64.sqrt() - 1e-12
            );
        }
    }

    #[test]
    fn degenerate_rasters_are_errors() {
        assert!(matches!(
            rasterize(&DomainSpec::ball(0.1), 1.0),
            Err(Error::DegenerateRaster(_))
        ));
        // two lobes joined by a neck thinner than h
        let dumbbell = DomainSpec::Polygon {
            vertices: vec![
                [0.0, 0.0],
                [1.0, 0.0],
                [1.0, 0.45],
                [2.0, 0.45],
                [2.0, 0.0],
                [3.0, 0.0],
                [3.0, 1.0],
                [2.0, 1.0],
                [2.0, 0.55],
                [1.0, 0.55],
                [1.0, 1.0],
                [0.0, 1.0],
            ],
        };
        assert!(matches!(
            rasterize(&dumbbell, 0.25),
            Err(Error::DegenerateRaster(_))
        ));
        assert!(rasterize(&dumbbell, 0.05).is_ok());
        let close_vertices = DomainSpec::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.01], [0.0, 1.0]],
        };
        assert!(matches!(
            rasterize(&close_vertices, 0.1),
            Err(Error::DegenerateRaster(_))
        ));
    }

    #[test]
    fn boundary_distance_on_square() {
        let g = rasterize(&DomainSpec::square(1.0), 0.125).unwrap();
        let d = g.boundary_distance();
        for (k, &(i, j)) in g.cells().iter().enumerate() {
            let (x, y) = ((i - 1) as f64 + 0.5, (j - 1) as f64 + 0.5);
            let expect = x.min(8.0 - x).min(y).min(8.0 - y) * 0.125;
            assert!(close(d[k], expect, 1e-12));
        }
    }
}
