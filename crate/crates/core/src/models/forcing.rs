use std::f64::consts::PI;

use crate::fracops::gamma;

/// `e^{−t}·x³(1−x)³`.
pub fn manufactured_exact(x: f64, t: f64) -> f64 {
    (-t).exp() * (x * (1.0 - x)).powi(3)
}

fn gamma_ratio(k: u32, alpha: f64) -> f64 {
    // Γ(k+1)/Γ(k+1−α); arguments stay in (1, 7) for α in (1, 2]
    let num = (1..=k).map(f64::from).product::<f64>();
    num / gamma(f64::from(k) + 1.0 - alpha).expect("positive Gamma argument")
}

/// Forcing that makes [`manufactured_exact`] solve the FBEFL problem on `[0, 1]`.
///
/// The fractional Laplacian of `x³ − 3x⁴ + 3x⁵ − x⁶` is taken termwise from the
/// left and right Riemann-Liouville derivatives of monomials, and like every
/// other term it carries the `e^{−t}` of the solution.
pub fn manufactured_forcing(x: f64, t: f64, alpha: f64, epsilon: f64) -> f64 {
    let e1 = (-t).exp();
    let e2 = (-2.0 * t).exp();
    let y = 1.0 - x;
    let time = -e1 * (x * y).powi(3);
    let convective = e2 * (3.0 - 6.0 * x) * x.powi(5) * y.powi(5);
    if alpha == 2.0 {
        return time + convective - epsilon * e1 * uxx_exact(x);
    }
    let coeff = [1.0, -3.0, 3.0, -1.0];
    let mut frac = 0.0;
    for (i, c) in coeff.iter().enumerate() {
        let k = 3 + i as u32;
        let p = f64::from(k) - alpha;
        frac += c * gamma_ratio(k, alpha) * (x.powf(p) + y.powf(p));
    }
    time + convective + epsilon * e1 * frac / (2.0 * (alpha * PI / 2.0).cos())
}

/// `d²/dx² (x³ − 3x⁴ + 3x⁵ − x⁶)`.
fn uxx_exact(x: f64) -> f64 {
    6.0 * x - 36.0 * x * x + 60.0 * x.powi(3) - 30.0 * x.powi(4)
}
