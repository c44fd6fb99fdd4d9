//! Exact invariant, angle variable and the type-2 generating function.
//!
//! With `X = x − x_p`, `Y = p − p_p` and `K = Mρ̇/ρ + 2Ma`:
//!
//! ```text
//! I    = (1/2Ω)[(Ω/ρ)² X² + ρ²(K X − Y)²]
//! cosQ = √(Ω/2I) X/ρ,   sinQ = ρ(K X − Y)/√(2ΩI)
//! ```
//!
//! `p_p = Mẋ_p + 2Max_p + b` and `(x_p, p_p)` is the ellipse center.

use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::dynamics::{HomogeneousPair, ParticularSolution};
use crate::error::{Error, Result};
use crate::floquet::common_period;
use crate::model::{Coefficients, OscillatorSpec};
use crate::numerics::circle_mean;

/// Nodes used for averages over the angle variable.
pub const ANGLE_NODES: usize = 64;

/// Which half of the ellipse, relative to the line `Y = K X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `Y > K X`, where `sinQ < 0`.
    Upper,
    Lower,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }
}

/// Everything the frame needs at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameState {
    pub t: f64,
    pub coeffs: Coefficients,
    pub omega: f64,
    pub rho: f64,
    pub rho_dot: f64,
    pub x_p: f64,
    pub xp_dot: f64,
    pub p_p: f64,
    pub pp_dot: f64,
    pub delta: f64,
    pub delta_dot: f64,
    /// `∫_{t0}^{t} f`
    pub f_integral: f64,
}

impl FrameState {
    /// `K = Mρ̇/ρ + 2Ma`
    pub fn shape_slope(&self) -> f64 {
        self.coeffs.mass * self.rho_dot / self.rho + 2.0 * self.coeffs.mass * self.coeffs.a
    }

    /// Coefficient of `(I/Ω)cos²Q` in `∂F₂/∂t`. The `d(Ma)/dt` term carries a
    /// factor `ρ²`; without it `H + ∂F₂/∂t = ΩI/(Mρ²)` fails whenever `Ma`
    /// varies in time.
    pub fn cos2_bracket(&self) -> f64 {
        let k = &self.coeffs;
        let (rho, rd) = (self.rho, self.rho_dot);
        -k.mass * rd * rd + self.omega * self.omega / (k.mass * rho * rho) - k.mass * k.w_sq * rho * rho
            + 2.0 * rho * rho * k.ma_dot()
    }

    /// Coefficient of `√(2I/Ω) cosQ` in `∂F₂/∂t`.
    fn cos_linear(&self) -> f64 {
        let m = self.coeffs.mass;
        self.pp_dot * self.rho - self.xp_dot * (m * self.rho_dot + 2.0 * m * self.coeffs.a * self.rho)
    }

    /// `Q`-independent part of `∂F₂/∂t`.
    fn constant_part(&self) -> f64 {
        let k = &self.coeffs;
        let d_maxp2 = k.ma_dot() * self.x_p * self.x_p + 2.0 * k.mass * k.a * self.x_p * self.xp_dot;
        self.x_p * self.pp_dot + self.delta_dot + k.f - d_maxp2
    }
}

/// `(spec, pair, x_p)` bundle mapping `(x, p, t) ↔ (Q, I, t)`.
#[derive(Debug, Clone)]
pub struct ActionAngleFrame {
    spec: OscillatorSpec,
    pair: HomogeneousPair,
    xp: ParticularSolution,
    tau_prime: Option<f64>,
}

impl ActionAngleFrame {
    pub fn new(spec: OscillatorSpec, pair: HomogeneousPair, xp: ParticularSolution) -> Self {
        ActionAngleFrame {
            spec,
            pair,
            xp,
            tau_prime: None,
        }
    }

    /// Find and attach the common period `τ′` of `ρ` and `x_p`.
    pub fn certify(mut self, cap: u32) -> Result<Self> {
        self.tau_prime = Some(common_period(&self.spec, &self.pair, &self.xp, cap)?);
        Ok(self)
    }

    pub fn with_tau_prime(mut self, tau_prime: f64) -> Self {
        self.tau_prime = Some(tau_prime);
        self
    }

    pub fn tau_prime(&self) -> Result<f64> {
        self.tau_prime.ok_or(Error::NotPeriodic)
    }

    pub fn spec(&self) -> &OscillatorSpec {
        &self.spec
    }

    pub fn pair(&self) -> &HomogeneousPair {
        &self.pair
    }

    pub fn particular(&self) -> &ParticularSolution {
        &self.xp
    }

    pub fn omega(&self) -> f64 {
        self.pair.omega()
    }

    /// Reference time: `δ(t0) = 0` and `∫f` starts here.
    pub fn t0(&self) -> f64 {
        self.pair.t0()
    }

    pub fn state(&self, t: f64) -> FrameState {
        let coeffs = self.spec.coefficients(t);
        let ps = self.pair.state(t);
        let xs = self.xp.state(t);
        let k = &coeffs;
        let xp_dot = xs.mv / k.mass;
        let mv_dot = k.force - k.mass * k.w_sq * xs.x;
        FrameState {
            t,
            coeffs,
            omega: self.pair.omega(),
            rho: ps.rho,
            rho_dot: ps.rho_dot,
            x_p: xs.x,
            xp_dot,
            p_p: xs.mv + 2.0 * k.mass * k.a * xs.x + k.b,
            pp_dot: mv_dot + 2.0 * k.ma_dot() * xs.x + 2.0 * k.mass * k.a * xp_dot + k.b_dot,
            delta: xs.delta,
            delta_dot: 0.5 * k.mass * k.w_sq * xs.x * xs.x - 0.5 * k.mass * xp_dot * xp_dot,
            f_integral: self.spec.f.integral(self.t0(), t),
        }
    }

    pub fn action(&self, x: f64, p: f64, t: f64) -> f64 {
        action_at(&self.state(t), x, p)
    }

    /// Angle in `[0, 2π)`.
    pub fn angle(&self, x: f64, p: f64, t: f64) -> Result<f64> {
        angle_at(&self.state(t), x, p)
    }

    pub fn inverse_map(&self, q: f64, i: f64, t: f64) -> (f64, f64) {
        inverse_at(&self.state(t), q, i)
    }

    /// `(p_upper, p_lower)` on the level curve `I` at position `x`.
    pub fn momentum_branches(&self, x: f64, i: f64, t: f64) -> Result<(f64, f64)> {
        let s = self.state(t);
        let xr = x - s.x_p;
        let omega = s.omega;
        let disc = 2.0 * omega * i - (omega * xr / s.rho).powi(2);
        let disc = if disc < 0.0 && disc > -1e-12 * (2.0 * omega * i).max(f64::MIN_POSITIVE) {
            0.0
        } else {
            disc
        };
        if !(disc >= 0.0) {
            return Err(Error::OutsideEllipse { x });
        }
        let centre = s.p_p + s.shape_slope() * xr;
        let half = disc.sqrt() / s.rho;
        Ok((centre + half, centre - half))
    }

    /// Type-2 generating function `F₂(x, I, t)` on one branch.
    ///
    /// The square-root and arctangent terms are written in the form that
    /// continues smoothly through `x = x_p`: `½(X/ρ)S ∓ I·arccos(c)` with
    /// `S = √(2ΩI − Ω²X²/ρ²)` and `c = cosQ`. For `X > 0` this is the usual
    /// `½√(2ΩIX²/ρ² − Ω²X⁴/ρ⁴) ∓ I·tan⁻¹√(2ρ²I/(ΩX²) − 1)`.
    pub fn generating_function(&self, x: f64, i: f64, t: f64, branch: Branch) -> Result<f64> {
        let s = self.state(t);
        let k = &s.coeffs;
        let xr = x - s.x_p;
        let omega = s.omega;
        let c = (omega / (2.0 * i)).sqrt() * xr / s.rho;
        if !(c.abs() <= 1.0) {
            return Err(Error::OutsideEllipse { x });
        }
        let root = (2.0 * omega * i - (omega * xr / s.rho).powi(2)).max(0.0).sqrt();
        let head = s.delta
            + s.f_integral
            + k.mass * k.a * s.x_p * s.x_p
            + k.b * s.x_p
            + k.mass * s.xp_dot * s.x_p
            + s.p_p * xr
            + (k.mass * s.rho_dot / (2.0 * s.rho) + k.mass * k.a) * xr * xr;
        let sg = branch.sign();
        Ok(head + sg * (0.5 * xr / s.rho * root - i * c.acos()))
    }

    /// `∂F₂/∂t` evaluated on the level curve at angle `Q`.
    pub fn df2_dt_at_angle(&self, q: f64, i: f64, t: f64) -> f64 {
        df2_dt_at(&self.state(t), q, i)
    }

    /// `∂/∂I` of [`Self::df2_dt_at_angle`], analytic.
    pub fn df2_dt_di_at_angle(&self, q: f64, i: f64, t: f64) -> f64 {
        df2_dt_di_at(&self.state(t), q, i)
    }

    /// `H̄ = ΩI/(Mρ²)`
    pub fn transformed_hamiltonian(&self, i: f64, t: f64) -> f64 {
        let s = self.state(t);
        s.omega * i / (s.coeffs.mass * s.rho * s.rho)
    }

    /// `∮ p dx` around the level curve `I`, by quadrature over the angle.
    pub fn ellipse_area(&self, i: f64, t: f64) -> f64 {
        if i == 0.0 {
            return 0.0;
        }
        let s = self.state(t);
        let amp = (2.0 * i / s.omega).sqrt() * s.rho;
        2.0 * PI
            * circle_mean(
                |q| {
                    let (_, p) = inverse_at(&s, q, i);
                    // dx/dQ
                    p * (-amp * q.sin())
                },
                ANGLE_NODES,
            )
    }

    /// Ellipse center `(x_p, p_p)`.
    pub fn center(&self, t: f64) -> (f64, f64) {
        let s = self.state(t);
        (s.x_p, s.p_p)
    }

    /// Symmetric matrix `A` with `I = (X, Y)·A·(X, Y)ᵀ`.
    pub fn shape_matrix(&self, t: f64) -> [[f64; 2]; 2] {
        let s = self.state(t);
        let (k, r2, om) = (s.shape_slope(), s.rho * s.rho, s.omega);
        let n = 0.5 / om;
        [
            [n * (om * om / r2 + k * k * r2), -n * k * r2],
            [-n * k * r2, n * r2],
        ]
    }
}

pub fn action_at(s: &FrameState, x: f64, p: f64) -> f64 {
    let (xr, yr) = (x - s.x_p, p - s.p_p);
    let a = s.omega * xr / s.rho;
    let b = s.rho * (s.shape_slope() * xr - yr);
    (a * a + b * b) / (2.0 * s.omega)
}

pub fn angle_at(s: &FrameState, x: f64, p: f64) -> Result<f64> {
    let (xr, yr) = (x - s.x_p, p - s.p_p);
    // Unnormalized (cosQ, sinQ) share the positive factor 1/√(2ΩI).
    let c = s.omega * xr / s.rho;
    let sn = s.rho * (s.shape_slope() * xr - yr);
    if c == 0.0 && sn == 0.0 {
        return Err(Error::AngleUndefined);
    }
    let q = sn.atan2(c);
    Ok(if q < 0.0 { q + 2.0 * PI } else { q })
}

pub fn inverse_at(s: &FrameState, q: f64, i: f64) -> (f64, f64) {
    let (sq, cq) = q.sin_cos();
    let a = (2.0 * i / s.omega).sqrt() * s.rho * cq;
    let x = a + s.x_p;
    let p = s.shape_slope() * a - (2.0 * s.omega * i).sqrt() / s.rho * sq + s.p_p;
    (x, p)
}

pub fn df2_dt_at(s: &FrameState, q: f64, i: f64) -> f64 {
    let (sq, cq) = q.sin_cos();
    let om = s.omega;
    i / om * s.cos2_bracket() * cq * cq
        + 2.0 * i * s.rho_dot / s.rho * cq * sq
        + s.xp_dot * (2.0 * i * om).sqrt() / s.rho * sq
        + s.cos_linear() * (2.0 * i / om).sqrt() * cq
        + s.constant_part()
}

pub fn df2_dt_di_at(s: &FrameState, q: f64, i: f64) -> f64 {
    let (sq, cq) = q.sin_cos();
    let om = s.omega;
    let root_term = s.xp_dot * (2.0 * om).sqrt() / s.rho * sq + s.cos_linear() * (2.0 / om).sqrt() * cq;
    s.cos2_bracket() / om * cq * cq + 2.0 * s.rho_dot / s.rho * cq * sq + 0.5 * root_term / i.sqrt()
}

/// Continue an angle sample onto the branch nearest `previous`.
pub fn unwrap_angle(previous: f64, sample: f64) -> f64 {
    sample + 2.0 * PI * ((previous - sample) / (2.0 * PI)).round()
}
