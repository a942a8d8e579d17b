//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod properties;

/// Bessel `J_n(x)` from its power series (fine for `x < 20`).
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for m in 1..200 {
        let m = m as f64;
        term *= -half * half / (m * (m + n as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// First Robin eigenvalue of the Laplacian (`p = 2`) on the unit disk:
/// `λ = x²` with `x J₁(x) = β J₀(x)`, `x ∈ (0, j₀,₁)`, by bisection.
pub fn disk_robin_laplacian(beta: f64) -> f64 {
    let g = |x: f64| x * bessel_j(1, x) - beta * bessel_j(0, x);
    let (mut lo, mut hi) = (1e-12, 2.404_825_557_695_773);
    assert!(g(lo) < 0.0 && g(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    x * x
}

/// Robin Laplacian on an interval of length `len` with parameter `beta > 0`:
/// `μ = (2x/len)²`, `x tan x = β len / 2`.
pub fn interval_robin_laplacian(len: f64, beta: f64) -> f64 {
    let c = beta * len / 2.0;
    let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_2 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.tan() < c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    (2.0 * x / len).powi(2)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Cheeger constant of the square of side `side`: the Cheeger set is the
/// square with corners rounded at radius `1/h`, so `h` is the fixed point of
/// `h = P(1/h) / A(1/h)`, found by bisection on `h A(1/h) - P(1/h)`.
pub fn square_cheeger(side: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let g = |h: f64| {
        let r = 1.0 / h;
        let area = side * side - (4.0 - pi) * r * r;
        let perimeter = 4.0 * side - (8.0 - 2.0 * pi) * r;
        h * area - perimeter
    };
    // r = 1/h ranges over (0, side/2].
    let (mut lo, mut hi) = (2.0 / side, 1e6 / side);
    assert!(g(lo) < 0.0 && g(hi) > 0.0);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Perimeter of the ellipse with semi-axes `a`, `b` by composite Simpson
/// quadrature of `∫ sqrt(a² sin² t + b² cos² t) dt`.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let n = 20_000;
    let f = |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
    let dt = 2.0 * std::f64::consts::PI / n as f64;
    let mut s = f(0.0) + f(2.0 * std::f64::consts::PI);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * dt);
    }
    s * dt / 3.0
}
