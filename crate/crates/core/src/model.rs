//! Periodic coefficients and the generalized oscillator Hamiltonian.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Largest numerator/denominator accepted when recovering a period ratio.
pub const MAX_RATIO_TERM: u64 = 64;

const PERIOD_MATCH_TOL: f64 = 1e-9;
const POSITIVITY_SAMPLES: usize = 1024;

/// A reduced positive fraction, used for periods measured in units of `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl Ratio {
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    /// Panics on a zero denominator or numerator.
    pub fn new(num: u64, den: u64) -> Self {
        assert!(num > 0 && den > 0, "ratio terms must be positive");
        let g = gcd(num, den);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Smallest positive rational that is an integer multiple of both.
    pub fn lcm(self, other: Ratio) -> Ratio {
        Ratio::new(lcm(self.num, other.num), gcd(self.den, other.den))
    }

    /// Divide by a positive integer.
    pub fn div_int(self, k: u64) -> Ratio {
        Ratio::new(self.num, self.den * k)
    }

    /// Best rational with terms `≤ max_term` matching `x` to relative `1e-9`.
    pub fn approximate(x: f64, max_term: u64) -> Option<Ratio> {
        if !(x.is_finite() && x > 0.0) {
            return None;
        }
        for den in 1..=max_term {
            let num = (x * den as f64).round();
            if num < 1.0 || num > max_term as f64 {
                continue;
            }
            if (num / den as f64 - x).abs() <= PERIOD_MATCH_TOL * x {
                return Some(Ratio::new(num as u64, den));
            }
        }
        None
    }

    /// Whether `self` is an integer multiple of `other`.
    pub fn is_multiple_of(self, other: Ratio) -> bool {
        // self/other = (a d)/(b c)
        let n = self.num as u128 * other.den as u128;
        let d = self.den as u128 * other.num as u128;
        n.is_multiple_of(d)
    }
}

/// One Fourier term `cos_amp·cos(nωt) + sin_amp·sin(nωt)` with `ω = 2π/T`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Harmonic {
    pub order: u32,
    #[cfg_attr(feature = "serde", serde(default, rename = "cos"))]
    pub cos_amp: f64,
    #[cfg_attr(feature = "serde", serde(default, rename = "sin"))]
    pub sin_amp: f64,
}

/// Truncated real Fourier series with analytic derivatives.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeriodicFunction {
    pub base_period: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub constant: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub harmonics: Vec<Harmonic>,
}

impl PeriodicFunction {
    pub fn constant(base_period: f64, value: f64) -> Self {
        PeriodicFunction {
            base_period,
            constant: value,
            harmonics: Vec::new(),
        }
    }

    pub fn zero(base_period: f64) -> Self {
        Self::constant(base_period, 0.0)
    }

    pub fn with_harmonic(mut self, order: u32, cos_amp: f64, sin_amp: f64) -> Self {
        self.harmonics.push(Harmonic {
            order,
            cos_amp,
            sin_amp,
        });
        self
    }

    fn active(&self) -> impl Iterator<Item = &Harmonic> {
        self.harmonics
            .iter()
            .filter(|h| h.cos_amp != 0.0 || h.sin_amp != 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.active().next().is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.is_constant()
    }

    fn omega(&self) -> f64 {
        2.0 * PI / self.base_period
    }

    /// Phase `2π·frac(t/T)`, so that evaluation is exactly periodic.
    fn base_phase(&self, t: f64) -> f64 {
        let s = t / self.base_period;
        2.0 * PI * (s - s.floor())
    }

    pub fn eval(&self, t: f64) -> f64 {
        let phase = self.base_phase(t);
        self.active().fold(self.constant, |acc, h| {
            let (s, c) = (h.order as f64 * phase).sin_cos();
            acc + h.cos_amp * c + h.sin_amp * s
        })
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let phase = self.base_phase(t);
        let w = self.omega();
        self.active().fold(0.0, |acc, h| {
            let n = h.order as f64;
            let (s, c) = (n * phase).sin_cos();
            acc + n * w * (h.sin_amp * c - h.cos_amp * s)
        })
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        let phase = self.base_phase(t);
        let w = self.omega();
        self.active().fold(0.0, |acc, h| {
            let n = h.order as f64;
            let (s, c) = (n * phase).sin_cos();
            acc - (n * w) * (n * w) * (h.cos_amp * c + h.sin_amp * s)
        })
    }

    /// `∫_{t0}^{t} g(z) dz`, analytic.
    pub fn integral(&self, t0: f64, t: f64) -> f64 {
        let w = self.omega();
        let (p0, p1) = (self.base_phase(t0), self.base_phase(t));
        self.active().fold(self.constant * (t - t0), |acc, h| {
            let n = h.order as f64;
            let (s1, c1) = (n * p1).sin_cos();
            let (s0, c0) = (n * p0).sin_cos();
            acc + (h.cos_amp * (s1 - s0) - h.sin_amp * (c1 - c0)) / (n * w)
        })
    }

    /// Smallest period, as a fraction of `base_period`'s ratio to `tau`.
    /// `None` for a constant function.
    pub fn minimal_period_ratio(&self, base_ratio: Ratio) -> Option<Ratio> {
        let g = self.active().fold(0u64, |g, h| gcd(g, h.order as u64));
        if g == 0 {
            None
        } else {
            Some(base_ratio.div_int(g))
        }
    }

    fn check_shape(&self, name: &str) -> Result<()> {
        if !(self.base_period.is_finite() && self.base_period > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "{name}: base_period must be positive and finite"
            )));
        }
        if !self.constant.is_finite() {
            return Err(Error::InvalidSpec(format!("{name}: non-finite constant")));
        }
        for h in &self.harmonics {
            if h.order == 0 {
                return Err(Error::InvalidSpec(format!(
                    "{name}: harmonic order must be positive"
                )));
            }
            if !(h.cos_amp.is_finite() && h.sin_amp.is_finite()) {
                return Err(Error::InvalidSpec(format!("{name}: non-finite amplitude")));
            }
        }
        Ok(())
    }
}

/// Coefficient values and their time derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub mass: f64,
    pub mass_dot: f64,
    pub w_sq: f64,
    pub a: f64,
    pub a_dot: f64,
    pub b: f64,
    pub b_dot: f64,
    pub force: f64,
    pub f: f64,
}

impl Coefficients {
    pub fn c(&self) -> f64 {
        self.w_sq + 4.0 * self.a * self.a - 2.0 * self.a_dot - 2.0 * self.mass_dot / self.mass * self.a
    }

    pub fn d(&self) -> f64 {
        2.0 * self.a * self.b - self.b_dot - self.force
    }

    /// `d(Ma)/dt`
    pub fn ma_dot(&self) -> f64 {
        self.mass_dot * self.a + self.mass * self.a_dot
    }
}

/// Full coefficient set of the oscillator.
///
/// Every coefficient except `force` must have a base period dividing `tau`;
/// `force` may have any period that is a small rational multiple of `tau`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OscillatorSpec {
    pub tau: f64,
    pub mass: PeriodicFunction,
    pub w_sq: PeriodicFunction,
    pub a: PeriodicFunction,
    pub b: PeriodicFunction,
    pub force: PeriodicFunction,
    pub f: PeriodicFunction,
    pub hbar: f64,
}

impl OscillatorSpec {
    /// Constant mass and frequency, all other coefficients zero, `ħ = 1`.
    pub fn simple(tau: f64, mass: f64, w_sq: f64) -> Self {
        OscillatorSpec {
            tau,
            mass: PeriodicFunction::constant(tau, mass),
            w_sq: PeriodicFunction::constant(tau, w_sq),
            a: PeriodicFunction::zero(tau),
            b: PeriodicFunction::zero(tau),
            force: PeriodicFunction::zero(tau),
            f: PeriodicFunction::zero(tau),
            hbar: 1.0,
        }
    }

    fn named(&self) -> [(&'static str, &PeriodicFunction); 6] {
        [
            ("mass", &self.mass),
            ("w_sq", &self.w_sq),
            ("a", &self.a),
            ("b", &self.b),
            ("force", &self.force),
            ("f", &self.f),
        ]
    }

    /// Period of `g` in units of `tau`, recovered as a small rational.
    fn base_ratio(&self, g: &PeriodicFunction) -> Option<Ratio> {
        Ratio::approximate(g.base_period / self.tau, MAX_RATIO_TERM)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidSpec("tau must be positive and finite".into()));
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::InvalidSpec("hbar must be positive and finite".into()));
        }
        for (name, g) in self.named() {
            g.check_shape(name)?;
            if g.is_constant() {
                continue;
            }
            match self.base_ratio(g) {
                Some(r) if name == "force" || r.num == 1 => {}
                Some(r) => {
                    return Err(Error::InvalidSpec(format!(
                        "{name}: base period {}/{}·tau does not divide tau",
                        r.num, r.den
                    )))
                }
                None if name == "force" => {
                    return Err(Error::IncommensurateForcing {
                        ratio: g.base_period / self.tau,
                    })
                }
                None => {
                    return Err(Error::InvalidSpec(format!(
                        "{name}: base period is not tau/k for an integer k"
                    )))
                }
            }
        }
        for i in 0..POSITIVITY_SAMPLES {
            let t = self.tau * i as f64 / POSITIVITY_SAMPLES as f64;
            let m = self.mass.eval(t);
            if !(m > 0.0) {
                return Err(Error::InvalidSpec(format!("mass not positive at t = {t}: {m}")));
            }
            let w2 = self.w_sq.eval(t);
            if !(w2 >= 0.0) {
                return Err(Error::InvalidSpec(format!("w_sq negative at t = {t}: {w2}")));
            }
        }
        Ok(())
    }

    pub fn coefficients(&self, t: f64) -> Coefficients {
        Coefficients {
            mass: self.mass.eval(t),
            mass_dot: self.mass.derivative(t),
            w_sq: self.w_sq.eval(t),
            a: self.a.eval(t),
            a_dot: self.a.derivative(t),
            b: self.b.eval(t),
            b_dot: self.b.derivative(t),
            force: self.force.eval(t),
            f: self.f.eval(t),
        }
    }

    /// `c = w² + 4a² − 2ȧ − 2(Ṁ/M)a`
    pub fn derived_c(&self, t: f64) -> f64 {
        self.coefficients(t).c()
    }

    /// `d = 2ab − ḃ − F`
    pub fn derived_d(&self, t: f64) -> f64 {
        self.coefficients(t).d()
    }

    pub fn hamiltonian(&self, x: f64, p: f64, t: f64) -> f64 {
        let k = self.coefficients(t);
        p * p / (2.0 * k.mass) - 2.0 * k.a * x * p + 0.5 * k.mass * k.c() * x * x
            - k.b / k.mass * p
            + k.d() * x
            + (k.b * k.b / (2.0 * k.mass) - k.f)
    }

    /// Hamilton's equations `(∂H/∂p, −∂H/∂x)`.
    pub fn hamilton_rhs(&self, x: f64, p: f64, t: f64) -> (f64, f64) {
        let k = self.coefficients(t);
        let xdot = p / k.mass - 2.0 * k.a * x - k.b / k.mass;
        let pdot = 2.0 * k.a * p - k.mass * k.c() * x - k.d();
        (xdot, pdot)
    }

    /// Right-hand side of `d(Mẋ)/dt + Mw²x = F` in `(x, Mẋ)` coordinates,
    /// with the forcing scaled by `forcing`.
    pub fn eom_rhs(&self, t: f64, x: f64, mv: f64, forcing: f64) -> (f64, f64) {
        let m = self.mass.eval(t);
        (mv / m, forcing * self.force.eval(t) - m * self.w_sq.eval(t) * x)
    }

    /// Smallest period of the homogeneous equation's coefficients `(M, w²)`
    /// in units of `tau`; `None` when both are constant.
    pub fn homogeneous_period_ratio(&self) -> Option<Ratio> {
        let rm = self
            .base_ratio(&self.mass)
            .and_then(|r| self.mass.minimal_period_ratio(r));
        let rw = self
            .base_ratio(&self.w_sq)
            .and_then(|r| self.w_sq.minimal_period_ratio(r));
        match (rm, rw) {
            (Some(a), Some(b)) => Some(a.lcm(b)),
            (a, b) => a.or(b),
        }
    }

    /// Smallest period of the forcing in units of `tau`; `None` if constant.
    pub fn force_period_ratio(&self) -> Option<Ratio> {
        self.base_ratio(&self.force)
            .and_then(|r| self.force.minimal_period_ratio(r))
    }

    pub fn has_linear_terms(&self) -> bool {
        !(self.b.is_zero() && self.force.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_ode, OdeOptions};
    use proptest::prelude::*;

    fn full_spec() -> OscillatorSpec {
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

    #[test]
    fn derived_c_examples() {
        let s = OscillatorSpec::simple(1.0, 1.0, 1.0);
        assert_eq!(s.derived_c(0.3), 1.0);

        let mut s = OscillatorSpec::simple(1.0, 1.0, 2.0);
        s.a = PeriodicFunction::constant(1.0, 0.25);
        assert!((s.derived_c(0.7) - (2.0 + 4.0 * 0.0625)).abs() < 1e-15);

        let tau = 2.0 * PI;
        let mut s = OscillatorSpec::simple(tau, 1.0, 1.0);
        s.a = PeriodicFunction::zero(tau).with_harmonic(1, 0.1, 0.0);
        // Finite-difference ȧ(0) agrees with the analytic zero.
        let h = 1e-5;
        let fd = (s.a.eval(h) - s.a.eval(-h)) / (2.0 * h);
        assert!(fd.abs() < 1e-10);
        assert!((s.derived_c(0.0) - 1.04).abs() < 1e-14);
    }

    #[test]
    fn derived_d_examples() {
        let mut s = OscillatorSpec::simple(1.0, 1.0, 1.0);
        s.force = PeriodicFunction::constant(1.0, 0.7);
        assert_eq!(s.derived_d(0.2), -0.7);

        let mut s = OscillatorSpec::simple(1.0, 1.0, 1.0);
        s.b = PeriodicFunction::constant(1.0, 3.0);
        assert_eq!(s.derived_d(0.4), 0.0);

        let tau = 2.0 * PI;
        let mut s = OscillatorSpec::simple(tau, 1.0, 1.0);
        s.a = PeriodicFunction::constant(tau, 0.5);
        s.b = PeriodicFunction::zero(tau).with_harmonic(1, 0.0, 1.0);
        let h = 1e-5;
        let fd = (s.b.eval(h) - s.b.eval(-h)) / (2.0 * h);
        assert!((fd - 1.0).abs() < 1e-9);
        assert!((s.derived_d(0.0) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_examples() {
        let s = OscillatorSpec::simple(1.0, 1.0, 1.0);
        assert_eq!(s.hamiltonian(1.0, 0.0, 0.3), 0.5);
        assert_eq!(s.hamiltonian(0.0, 2.0, 0.3), 2.0);

        let mut s = OscillatorSpec::simple(1.0, 1.0, 1.0);
        s.a = PeriodicFunction::constant(1.0, 0.5);
        assert_eq!(s.derived_c(0.0), 2.0);
        assert!((s.hamiltonian(1.0, 1.0, 0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ratio_arithmetic() {
        assert_eq!(Ratio::new(1, 1).lcm(Ratio::new(3, 2)), Ratio::new(3, 1));
        assert_eq!(Ratio::new(1, 2).lcm(Ratio::new(1, 3)), Ratio::new(1, 1));
        assert_eq!(Ratio::new(2, 1).lcm(Ratio::new(1, 1)), Ratio::new(2, 1));
        assert_eq!(Ratio::approximate(1.5, 64), Some(Ratio::new(3, 2)));
        assert_eq!(Ratio::approximate(0.25, 64), Some(Ratio::new(1, 4)));
        assert_eq!(Ratio::approximate(core::f64::consts::SQRT_2, 64), None);
        assert!(Ratio::new(3, 1).is_multiple_of(Ratio::new(3, 2)));
        assert!(!Ratio::new(2, 1).is_multiple_of(Ratio::new(3, 2)));
    }

    #[test]
    fn minimal_period_uses_gcd_of_orders() {
        let g = PeriodicFunction::zero(1.0)
            .with_harmonic(2, 1.0, 0.0)
            .with_harmonic(4, 0.0, 1.0);
        assert_eq!(g.minimal_period_ratio(Ratio::ONE), Some(Ratio::new(1, 2)));
        assert_eq!(PeriodicFunction::constant(1.0, 3.0).minimal_period_ratio(Ratio::ONE), None);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut s = OscillatorSpec::simple(1.0, 1.0, 1.0);
        s.mass = PeriodicFunction::constant(1.0, 0.5).with_harmonic(1, 0.6, 0.0);
        assert!(matches!(s.validate(), Err(Error::InvalidSpec(_))));

        let mut s = OscillatorSpec::simple(1.0, 1.0, 1.0);
        s.w_sq = PeriodicFunction::constant(1.0, 0.1).with_harmonic(1, 0.2, 0.0);
        assert!(matches!(s.validate(), Err(Error::InvalidSpec(_))));

        let mut s = OscillatorSpec::simple(1.0, 1.0, 1.0);
        s.a = PeriodicFunction::zero(1.5).with_harmonic(1, 0.1, 0.0);
        assert!(matches!(s.validate(), Err(Error::InvalidSpec(_))));

        let mut s = OscillatorSpec::simple(1.0, 1.0, 1.0);
        s.force = PeriodicFunction::zero(core::f64::consts::SQRT_2).with_harmonic(1, 0.1, 0.0);
        assert!(matches!(s.validate(), Err(Error::IncommensurateForcing { .. })));

        let mut s = OscillatorSpec::simple(1.0, 1.0, 1.0);
        s.force = PeriodicFunction::zero(1.5).with_harmonic(1, 0.1, 0.0);
        assert!(s.validate().is_ok());
        assert_eq!(s.force_period_ratio(), Some(Ratio::new(3, 2)));

        assert!(full_spec().validate().is_ok());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let s = full_spec();
        for g in [&s.mass, &s.w_sq, &s.a, &s.b, &s.force, &s.f] {
            for i in 0..17 {
                let t = 0.37 * i as f64 - 1.0;
                let h = 1e-5;
                let fd = (g.eval(t + h) - g.eval(t - h)) / (2.0 * h);
                let an = g.derivative(t);
                assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "{fd} vs {an}");
                let fd2 = (g.derivative(t + h) - g.derivative(t - h)) / (2.0 * h);
                assert!((fd2 - g.second_derivative(t)).abs() < 1e-6);
                let q = g.integral(t, t + h) - g.integral(t, t - h);
                assert!((q / (2.0 * h) - g.eval(t)).abs() < 1e-8);
            }
        }
    }

    proptest! {
        #[test]
        fn eval_is_periodic(t in -50.0f64..50.0, c in -2.0f64..2.0, a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let g = PeriodicFunction::constant(0.7, c).with_harmonic(1, a, b).with_harmonic(3, b, a);
            prop_assert!((g.eval(t + 0.7) - g.eval(t)).abs() < 1e-12);
        }

        #[test]
        fn hamiltonian_is_tau_periodic(x in -3.0f64..3.0, p in -3.0f64..3.0, t in -10.0f64..10.0) {
            let s = full_spec();
            let h0 = s.hamiltonian(x, p, t);
            let h1 = s.hamiltonian(x, p, t + s.tau);
            prop_assert!((h0 - h1).abs() <= 1e-12 * h0.abs().max(1.0));
        }
    }

    /// Hamilton's equations reproduce `d(Mẋ)/dt + Mw²x = F` whatever `a, b, f`.
    #[test]
    fn hamilton_flow_reproduces_equation_of_motion() {
        let s = full_spec();
        let opts = OdeOptions::with_tolerance(1e-12);
        let (x0, xdot0) = (0.8, -0.3);
        let k0 = s.coefficients(0.0);
        // p = Mẋ + 2Max + b from ẋ = p/M − 2ax − b/M
        let p0 = k0.mass * xdot0 + 2.0 * k0.mass * k0.a * x0 + k0.b;
        let ham = integrate_ode(
            |t, y: &[f64], dy: &mut [f64]| {
                let (xd, pd) = s.hamilton_rhs(y[0], y[1], t);
                dy[0] = xd;
                dy[1] = pd;
            },
            &[x0, p0],
            0.0,
            s.tau,
            &opts,
        )
        .unwrap();
        let eom = integrate_ode(
            |t, y: &[f64], dy: &mut [f64]| {
                let (a, b) = s.eom_rhs(t, y[0], y[1], 1.0);
                dy[0] = a;
                dy[1] = b;
            },
            &[x0, k0.mass * xdot0],
            0.0,
            s.tau,
            &opts,
        )
        .unwrap();
        for i in 0..=20 {
            let t = s.tau * i as f64 / 20.0;
            let (xa, xb) = (ham.eval(t)[0], eom.eval(t)[0]);
            assert!((xa - xb).abs() <= 1e-8 * xb.abs().max(1.0), "t={t}: {xa} vs {xb}");
        }
    }
}
