//! Composite Gauss–Legendre quadrature.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Points per panel.
pub const GL_ORDER: usize = 8;
/// Minimum panel count per base period.
pub const MIN_PANELS_PER_PERIOD: usize = 32;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        GaussLegendre { nodes, weights }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `∫_a^b g(t) dt` on `panels` equal panels of the 8-point rule.
pub fn integrate_window<G>(mut g: G, a: f64, b: f64, panels: usize) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    let rule = GaussLegendre::new(GL_ORDER);
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + h * (k as f64 + 0.5);
        let mut s = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let t = mid + 0.5 * h * x;
            let v = g(t);
            if !v.is_finite() {
                return Err(Error::NonFinite { t });
            }
            s += w * v;
        }
        total += 0.5 * h * s;
    }
    Ok(total)
}

/// `∫ g` over one period `[t0, t0 + period]`.
pub fn integrate_periodic<G>(g: G, t0: f64, period: f64, panels: usize) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    integrate_window(g, t0, t0 + period, panels)
}

/// Panel count for a window of `length` when the base period is `tau`.
pub fn panels_for(length: f64, tau: f64) -> usize {
    let periods = (length.abs() / tau).ceil().max(1.0) as usize;
    MIN_PANELS_PER_PERIOD * periods
}

/// Mean of a `2π`-periodic function on `n` equispaced nodes; exact for
/// trigonometric polynomials of degree below `n`.
pub fn circle_mean<G>(mut g: G, n: usize) -> f64
where
    G: FnMut(f64) -> f64,
{
    let step = 2.0 * PI / n as f64;
    (0..n).map(|k| g(step * k as f64)).sum::<f64>() / n as f64
}
