//! Independent reference solutions.

/// Kernel of the constant-coefficient problem with `λ = d = 0` and
/// `β + c = μ`: `k(x,y) = −μ y I₁(√(μ(x²−y²))) / √(μ(x²−y²))`, written as the
/// everywhere-convergent series `−(μy/2) Σ (μ(x²−y²)/4)^m / (m!(m+1)!)`.
/// Works for negative `μ` too (the series then sums to `J₁`).
pub fn bessel_kernel(mu: f64, x: f64, y: f64) -> f64 {
    let z = 0.25 * mu * (x * x - y * y);
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        term *= z / (m as f64 * (m + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -0.5 * mu * y * sum
}
