//! Adaptive Gauss-Legendre quadrature used by the coverage integral.
//!
//! Nodes and weights are generated by Newton iteration on the Legendre
//! polynomial; the adaptive driver bisects the panel count dyadically until
//! two successive refinements agree to the requested relative tolerance.

use crate::error::{Error, Result};

/// A fixed-order Gauss-Legendre rule on [-1, 1].
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 2);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order;
        // Roots come in symmetric pairs; solve the upper half with Newton.
        for k in 0..(n + 1) / 2 {
            // Tricomi initial guess.
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x;
            nodes[n - 1 - k] = x;
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrate `f` over [a, b] with a single panel.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive driver: order-64 panels, panel count doubling until the result is
/// stable to `rel_tol` (with a small absolute floor for near-zero integrals).
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    context: &str,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(64);
    let mut prev = f64::NAN;
    for level in 0..=12u32 {
        let panels = 1usize << level;
        let step = (b - a) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let lo = a + p as f64 * step;
            acc += rule.integrate(lo, lo + step, &mut f);
        }
        if !acc.is_finite() {
            return Err(Error::numerical(context, "non-finite integrand"));
        }
        if level > 0 {
            let err = (acc - prev).abs();
            if err <= rel_tol * acc.abs().max(1e-300) || err <= 1e-14 {
                return Ok(acc);
            }
        }
        prev = acc;
    }
    Err(Error::numerical(
        context,
        format!("quadrature did not converge to rel_tol={rel_tol} after 4096 panels"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_exactness() {
        let rule = GaussLegendre::new(8);
        // Degree-15 polynomial integrated exactly by an 8-point rule.
        let got = rule.integrate(0.0, 1.0, |x| x.powi(15));
        assert_abs_diff_eq!(got, 1.0 / 16.0, epsilon = 1e-14);
    }

    #[test]
    fn adaptive_matches_known_integral() {
        let got =
            integrate_adaptive(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-10, "sin").unwrap();
        assert_abs_diff_eq!(got, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(
            integrate_adaptive(|_| 1.0, 1.0, 1.0, 1e-8, "t").unwrap(),
            0.0
        );
    }

    #[test]
    fn refinement_is_stable() {
        // Integrand with a steep but smooth feature.
        let f = |x: f64| (-50.0 * (x - 0.8).powi(2)).exp() / (1.0 - x).sqrt().max(1e-9);
        let a = integrate_adaptive(f, 0.0, 0.999, 1e-8, "t").unwrap();
        let b = integrate_adaptive(f, 0.0, 0.999, 1e-10, "t").unwrap();
        assert!((a - b).abs() <= 1e-7 * a.abs());
    }
}
