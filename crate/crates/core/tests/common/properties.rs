//! Properties of the discrete functionals, shared by the proptest suite and
//! the acceptance run.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use robin_core::bvlimit::{
    evaluate_j, extract_level_set, minimize_j, LimitOptions, Stencil, TvGraph,
};
use robin_core::eigensolver::{minimize_jp, rayleigh_quotient_p, EigenOptions};
use robin_core::{rasterize, DomainSpec, Error, GridDomain};

/// Small planar test domains, each with at most [`MAX_CELLS`] cells.
pub fn domains() -> Vec<GridDomain> {
    [
        (DomainSpec::square(1.0), 1.0 / 12.0),
        (DomainSpec::ball(1.0), 1.0 / 7.0),
        (
            DomainSpec::Ellipse {
                semi_x: 1.0,
                semi_y: 0.5,
            },
            1.0 / 9.0,
        ),
        (
            DomainSpec::Polygon {
                vertices: vec![
                    [0.0, 0.0],
                    [2.0, 0.0],
                    [2.0, 1.0],
                    [1.0, 1.0],
                    [1.0, 2.0],
                    [0.0, 2.0],
                ],
            },
            1.0 / 7.0,
        ),
        (
            DomainSpec::RoundedRectangle {
                width: 2.0,
                height: 1.0,
                corner: 0.3,
            },
            1.0 / 8.0,
        ),
    ]
    .into_iter()
    .map(|(spec, h)| rasterize(&spec, h).unwrap())
    .collect()
}

pub const MAX_CELLS: usize = 200;

fn entry() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(0.5), 0.0..1.0f64, -1.0..1.0f64]
}

/// A domain index and a field (signed, with plateaus) on that domain.
pub fn signed_field() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (0..5usize, prop::collection::vec(entry(), MAX_CELLS)).prop_map(|(d, mut v)| {
        v[0] = 0.75;
        (d, v)
    })
}

/// A domain index and a nonnegative field with plateaus.
pub fn nonnegative_field() -> impl Strategy<Value = (usize, Vec<f64>)> {
    signed_field().prop_map(|(d, v)| (d, v.into_iter().map(f64::abs).collect()))
}

fn on(grid: &GridDomain, v: &[f64]) -> Vec<f64> {
    assert!(grid.len() <= v.len(), "domain has {} cells", grid.len());
    v[..grid.len()].to_vec()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// `J_p(c u) = J_p(u)` and `J(c u) = J(u)` for `c ≠ 0`, including `c < 0`.
pub fn homogeneity(
    grids: &[GridDomain],
    d: usize,
    v: &[f64],
    c: f64,
    p: f64,
    beta: f64,
) -> Result<(), TestCaseError> {
    let grid = &grids[d];
    let u = on(grid, v);
    let cu: Vec<f64> = u.iter().map(|x| c * x).collect();
    let neg: Vec<f64> = u.iter().map(|x| -x).collect();
    let a = rayleigh_quotient_p(grid, &u, p, beta).unwrap();
    for w in [&cu, &neg] {
        let b = rayleigh_quotient_p(grid, w, p, beta).unwrap();
        prop_assert!(close(a, b, 1e-12), "J_p: {a} vs {b} (c = {c}, p = {p})");
    }
    let graph = TvGraph::new(grid, Stencil::Wide);
    let a = evaluate_j(&graph, &u, beta).unwrap();
    for w in [&cu, &neg] {
        let b = evaluate_j(&graph, w, beta).unwrap();
        prop_assert!(close(a, b, 1e-12), "J: {a} vs {b} (c = {c})");
    }
    Ok(())
}

/// `J(v) ≥ min_t R({v > t}, β)` for nonnegative `v`.
pub fn coarea(grids: &[GridDomain], d: usize, v: &[f64], beta: f64) -> Result<(), TestCaseError> {
    let grid = &grids[d];
    let v = on(grid, v);
    let graph = TvGraph::new(grid, Stencil::Wide);
    let j = evaluate_j(&graph, &v, beta).unwrap();
    let best = extract_level_set(&graph, &v, beta).unwrap();
    prop_assert!(
        j >= best.value - 1e-12 * best.value.abs().max(1.0),
        "J = {j} < min R = {}",
        best.value
    );
    Ok(())
}

/// `J(·, β) = J(·, 1)` and `Λ_h(β) = Λ_h(1)` for `β ≥ 1`.
pub fn clamping(grids: &[GridDomain], d: usize, v: &[f64], beta: f64) -> Result<(), TestCaseError> {
    let grid = &grids[d];
    let v = on(grid, v);
    let graph = TvGraph::new(grid, Stencil::Wide);
    prop_assert_eq!(
        evaluate_j(&graph, &v, beta).unwrap(),
        evaluate_j(&graph, &v, 1.0).unwrap()
    );
    let opts = LimitOptions::default();
    let (a, b) = (
        minimize_j(&graph, beta, &opts).unwrap(),
        minimize_j(&graph, 1.0, &opts).unwrap(),
    );
    prop_assert_eq!(a.lambda, b.lambda);
    prop_assert_eq!(a.set, b.set);
    Ok(())
}

/// `λ_h(β₁) ≤ λ_h(β₂)` for `β₁ < β₂`, and `λ_h ≤ β |∂Ω|_h / |Ω|_h`.
pub fn eigenvalue_order(
    grids: &[GridDomain],
    d: usize,
    p: f64,
    b1: f64,
    b2: f64,
) -> Result<(), TestCaseError> {
    let grid = &grids[d];
    let opts = EigenOptions::default();
    let l1 = match minimize_jp(grid, p, b1, &opts) {
        Err(Error::CoercivityFailure { .. }) => {
            return Err(TestCaseError::reject("not coercive on this grid"))
        }
        r => r.unwrap(),
    };
    let l2 = minimize_jp(grid, p, b2, &opts).unwrap();
    let slack = 1e-6 * l1.lambda.abs().max(l2.lambda.abs()).max(1.0);
    prop_assert!(
        l1.lambda <= l2.lambda + slack,
        "λ({b1}) = {} > λ({b2}) = {}",
        l1.lambda,
        l2.lambda
    );
    for (beta, l) in [(b1, &l1), (b2, &l2)] {
        let bound = beta * grid.boundary_measure() / grid.area();
        prop_assert!(
            l.lambda <= bound + 1e-12 * bound.abs().max(1.0),
            "λ = {} above the constant bound {bound}",
            l.lambda
        );
    }
    Ok(())
}

pub fn scale() -> impl Strategy<Value = f64> {
    prop_oneof![1e-3..1e3f64, -1e3..-1e-3f64]
}

pub fn exponent() -> impl Strategy<Value = f64> {
    1.05..4.0f64
}

/// Robin parameters in the bounded range `β > -1`.
pub fn robin() -> impl Strategy<Value = f64> {
    -0.95..8.0f64
}
