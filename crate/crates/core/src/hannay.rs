//! Hannay's angle over one common period `τ′`.
//!
//! Three independent evaluations:
//!
//! - closed form `−(1/Ω)∫(Mρ̇² + 2Maρρ̇)dt`;
//! - the angle average of `∂/∂I (∂F₂/∂t)` integrated over `τ′`;
//! - the loop form `−(1/2π) ∂/∂I ∫∮ p ∂x/∂t dQ dt`, with `∂/∂I` by central
//!   differences.
//!
//! Angles are reported in radians and are not reduced modulo `2π`.

use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::action_angle::{df2_dt_di_at, inverse_at, ActionAngleFrame, FrameState, ANGLE_NODES};
use crate::error::{Error, Result};
use crate::model::PeriodicFunction;
use crate::numerics::{circle_mean, integrate_window, panels_for};

/// Agreement required between the loop form at two action values.
pub const ACTION_INDEPENDENCE_TOL: f64 = 1e-8;
/// Agreement required by [`forcing_independence_check`].
pub const FORCING_INDEPENDENCE_TOL: f64 = 1e-8;
/// Actions used by the loop form.
pub const LOOP_ACTIONS: [f64; 2] = [0.5, 2.0];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HannayAngles {
    pub closed_form: f64,
    pub definition: f64,
    pub loop_integral: f64,
}

impl HannayAngles {
    /// Largest pairwise difference.
    pub fn spread(&self) -> f64 {
        let v = [self.closed_form, self.definition, self.loop_integral];
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

fn window(frame: &ActionAngleFrame) -> Result<(f64, f64, usize)> {
    let tp = frame.tau_prime()?;
    let t0 = frame.t0();
    Ok((t0, t0 + tp, panels_for(tp, frame.spec().tau)))
}

pub fn hannay_closed_form(frame: &ActionAngleFrame) -> Result<f64> {
    let (a, b, panels) = window(frame)?;
    let pair = frame.pair();
    let spec = frame.spec();
    let integral = integrate_window(
        |t| {
            let s = pair.state(t);
            let m = spec.mass.eval(t);
            m * s.rho_dot * s.rho_dot + 2.0 * m * spec.a.eval(t) * s.rho * s.rho_dot
        },
        a,
        b,
        panels,
    )?;
    Ok(-integral / pair.omega())
}

pub fn hannay_from_definition(frame: &ActionAngleFrame) -> Result<f64> {
    gauged_definition(frame, None)
}

fn gauged_definition(frame: &ActionAngleFrame, gauge: Option<&GaugeOffset>) -> Result<f64> {
    let (a, b, panels) = window(frame)?;
    // Any action works; the I-derivative is action independent after averaging.
    let i = 1.0;
    integrate_window(
        |t| {
            let s = frame.state(t);
            let (shift, rate) = gauge.map_or((0.0, 0.0), |g| (g.eval(t), g.derivative(t)));
            circle_mean(|q| df2_dt_di_at(&s, q - shift, i), ANGLE_NODES) + rate
        },
        a,
        b,
        panels,
    )
}

/// `(1/2π)∮ p ∂x/∂t dQ` over `[0, 2π)`, or over `[0, π)` scaled to the full
/// circle when `half` is set.
fn loop_mean(s: &FrameState, i: f64, half: bool) -> f64 {
    let amp = (2.0 * i / s.omega).sqrt() * s.rho_dot;
    let g = |q: f64| {
        let (_, p) = inverse_at(s, q, i);
        p * (amp * q.cos() + s.xp_dot)
    };
    if half {
        let n = ANGLE_NODES / 2;
        (0..n).map(|k| g(PI * k as f64 / n as f64)).sum::<f64>() / n as f64
    } else {
        circle_mean(g, ANGLE_NODES)
    }
}

fn loop_at(frame: &ActionAngleFrame, i: f64, half: bool) -> Result<f64> {
    let (a, b, panels) = window(frame)?;
    let h = (1e-4 * i).max(1e-4);
    let d = integrate_window(
        |t| {
            let s = frame.state(t);
            (loop_mean(&s, i + h, half) - loop_mean(&s, i - h, half)) / (2.0 * h)
        },
        a,
        b,
        panels,
    )?;
    Ok(-d)
}

/// Loop form at a single action value.
pub fn hannay_loop_integral_at(frame: &ActionAngleFrame, i: f64) -> Result<f64> {
    loop_at(frame, i, false)
}

/// Loop form averaged over half the angle range only. Agrees with the full
/// range when the center sits at the origin.
pub fn hannay_loop_integral_half_range(frame: &ActionAngleFrame, i: f64) -> Result<f64> {
    loop_at(frame, i, true)
}

/// Loop form at each of [`LOOP_ACTIONS`]; the values must agree.
pub fn hannay_loop_integral(frame: &ActionAngleFrame) -> Result<f64> {
    let [i1, i2] = LOOP_ACTIONS;
    let (q1, q2) = (loop_at(frame, i1, false)?, loop_at(frame, i2, false)?);
    if (q1 - q2).abs() > ACTION_INDEPENDENCE_TOL {
        return Err(Error::Inconsistent {
            what: "loop-form Hannay angle varies with the action",
            first: q1,
            second: q2,
        });
    }
    Ok(0.5 * (q1 + q2))
}

pub fn hannay_angles(frame: &ActionAngleFrame) -> Result<HannayAngles> {
    Ok(HannayAngles {
        closed_form: hannay_closed_form(frame)?,
        definition: hannay_from_definition(frame)?,
        loop_integral: hannay_loop_integral(frame)?,
    })
}

/// Angle-origin offset `Q_c(t) = drift·t + periodic(t)`. Only `drift = 0`
/// with a period dividing `τ′` is an admissible gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeOffset {
    pub drift: f64,
    pub periodic: PeriodicFunction,
}

impl GaugeOffset {
    pub fn periodic(periodic: PeriodicFunction) -> Self {
        GaugeOffset { drift: 0.0, periodic }
    }

    /// Non-periodic diagnostic gauge `Q_c = rate·t`.
    pub fn linear(rate: f64, base_period: f64) -> Self {
        GaugeOffset {
            drift: rate,
            periodic: PeriodicFunction::zero(base_period),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.drift * t + self.periodic.eval(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.drift + self.periodic.derivative(t)
    }

    /// Whether `Q_c(t + τ′) = Q_c(t)` holds structurally.
    pub fn is_periodic_with(&self, tau_prime: f64) -> bool {
        if self.drift != 0.0 {
            return false;
        }
        if self.periodic.is_constant() {
            return true;
        }
        let k = tau_prime / self.periodic.base_period;
        (k - k.round()).abs() < 1e-10 && k.round() >= 1.0
    }
}

/// `(Q̃_H, Q_H)`: the definition route with and without the gauge offset.
/// The two differ by `Q_c(t0 + τ′) − Q_c(t0)`.
pub fn gauge_shift_check(frame: &ActionAngleFrame, gauge: &GaugeOffset) -> Result<(f64, f64)> {
    Ok((gauged_definition(frame, Some(gauge))?, hannay_from_definition(frame)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingComparison {
    pub first: f64,
    pub second: f64,
}

impl ForcingComparison {
    pub fn difference(&self) -> f64 {
        (self.first - self.second).abs()
    }
}

/// Compare definition-route angles of two frames that share `(M, w², a)`.
/// The closed form sees only `ρ`, `M` and `a`; the definition route carries
/// `x_p`, `b` and `f` through `∂F₂/∂t`.
pub fn forcing_independence_check(first: &ActionAngleFrame, second: &ActionAngleFrame) -> Result<ForcingComparison> {
    let (s1, s2) = (first.spec(), second.spec());
    if s1.mass != s2.mass || s1.w_sq != s2.w_sq || s1.a != s2.a {
        return Err(Error::InvalidSpec("frames differ in M, w² or a".into()));
    }
    let cmp = ForcingComparison {
        first: hannay_from_definition(first)?,
        second: hannay_from_definition(second)?,
    };
    if cmp.difference() > FORCING_INDEPENDENCE_TOL {
        return Err(Error::Inconsistent {
            what: "Hannay angle changed with b, F or f",
            first: cmp.first,
            second: cmp.second,
        });
    }
    Ok(cmp)
}
