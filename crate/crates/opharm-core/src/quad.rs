//! Gauss-Legendre panels for smooth and oscillatory 1-d integrals.

use std::sync::OnceLock;

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Gauss-Legendre rule of order n via Newton on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial P_n at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0f64, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// 16-point Gauss-Legendre on [a, b].
pub fn gl16_integrate(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let (nodes, weights) = gl16();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    nodes
        .iter()
        .zip(weights)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Composite GL16 with panels no wider than `max_panel`; sized to resolve
/// an oscillation wavelength when the integrand carries a known frequency.
pub fn panel_integrate(a: f64, b: f64, max_panel: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    assert!(b >= a && max_panel > 0.0);
    let panels = ((b - a) / max_panel).ceil().max(1.0) as usize;
    let w = (b - a) / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        acc += gl16_integrate(a + i as f64 * w, a + (i + 1) as f64 * w, &mut f);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rule_is_consistent() {
        let (nodes, weights) = gauss_legendre(16);
        assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        // exact for degree 31
        let val = gl16_integrate(0.0, 1.0, |x| x.powi(31));
        assert!((val - 1.0 / 32.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_panels() {
        // ∫_0^5 cos(40 π x) e^{-x} dx against the closed form
        let om = 40.0 * PI;
        let val = panel_integrate(0.0, 5.0, 0.25 / 40.0, |x| (om * x).cos() * (-x).exp());
        let exact =
            (1.0 - (-5.0f64).exp() * ((om * 5.0).cos() - om * (om * 5.0).sin())) / (1.0 + om * om);
        assert!((val - exact).abs() < 1e-12);
    }
}
