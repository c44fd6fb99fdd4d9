//! Spec families shared by unit tests.

use core::f64::consts::PI;

use crate::model::{OscillatorSpec, PeriodicFunction};
use crate::numerics::OdeOptions;

pub fn tight() -> OdeOptions {
    OdeOptions::with_tolerance(1e-12)
}

pub fn sho(tau: f64) -> OscillatorSpec {
    OscillatorSpec::simple(tau, 1.0, 1.0)
}

/// `w² = 1.5 + 0.2 cos 2t`, `τ = π`: elliptic.
pub fn mathieu_stable() -> OscillatorSpec {
    let mut s = OscillatorSpec::simple(PI, 1.0, 1.5);
    s.w_sq = s.w_sq.with_harmonic(1, 0.2, 0.0);
    s
}

/// `w² = 1 + 0.2 cos 2t`, `τ = π`: principal resonance tongue.
pub fn mathieu_hyperbolic() -> OscillatorSpec {
    let mut s = OscillatorSpec::simple(PI, 1.0, 1.0);
    s.w_sq = s.w_sq.with_harmonic(1, 0.2, 0.0);
    s
}

/// All six coefficients active, `τ = π`.
pub fn full_spec() -> OscillatorSpec {
    let tau = PI;
    OscillatorSpec {
        tau,
        mass: PeriodicFunction::constant(tau, 1.0).with_harmonic(1, 0.1, 0.0),
        w_sq: PeriodicFunction::constant(tau, 1.5).with_harmonic(1, 0.0, 0.2),
        a: PeriodicFunction::constant(tau, 0.1).with_harmonic(1, 0.05, 0.03),
        b: PeriodicFunction::constant(tau, 0.2).with_harmonic(1, 0.0, 0.3),
        force: PeriodicFunction::constant(tau, 0.1).with_harmonic(1, 0.3, 0.0),
        f: PeriodicFunction::constant(tau, 0.05).with_harmonic(2, 0.1, 0.0),
        hbar: 1.0,
    }
}
