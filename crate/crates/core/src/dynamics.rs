//! Homogeneous and particular solutions of `d(Mẋ)/dt + Mw²x = F`.
//!
//! All solutions are carried in `(x, Mẋ)` coordinates. Homogeneous solutions
//! are represented through the fundamental matrix over one base period plus
//! powers of the monodromy, so evaluation at any time never requires long raw
//! integrations.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::{OscillatorSpec, PeriodicFunction};
use crate::numerics::{integrate_ode, integrate_window, panels_for, OdeOptions, Trajectory};

/// Sample count per period used for residual and periodicity scans.
pub const SAMPLES_PER_PERIOD: usize = 256;

pub type Mat2 = [[f64; 2]; 2];

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub fn mat_vec(a: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

pub fn mat_det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn mat_inv(a: &Mat2) -> Mat2 {
    let d = mat_det(a);
    [[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]
}

/// `a^k` for any integer `k`.
pub fn mat_pow(a: &Mat2, k: i64) -> Mat2 {
    let mut base = if k < 0 { mat_inv(a) } else { *a };
    let mut e = k.unsigned_abs();
    let mut acc = [[1.0, 0.0], [0.0, 1.0]];
    while e > 0 {
        if e & 1 == 1 {
            acc = mat_mul(&acc, &base);
        }
        base = mat_mul(&base, &base);
        e >>= 1;
    }
    acc
}

/// Fundamental matrix `Φ(t)` of the homogeneous equation with `Φ(t0) = 𝟙`,
/// stored densely over `[t0, t0 + period]`.
#[derive(Debug, Clone)]
pub struct Fundamental {
    t0: f64,
    period: f64,
    traj: Trajectory,
    monodromy: Mat2,
}

impl Fundamental {
    /// `period` must be a period of `M` and `w²`.
    pub fn compute(spec: &OscillatorSpec, t0: f64, period: f64, opts: &OdeOptions) -> Result<Self> {
        let traj = integrate_ode(
            |t, y: &[f64], dy: &mut [f64]| {
                let m = spec.mass.eval(t);
                let mw2 = m * spec.w_sq.eval(t);
                dy[0] = y[1] / m;
                dy[1] = -mw2 * y[0];
                dy[2] = y[3] / m;
                dy[3] = -mw2 * y[2];
            },
            &[1.0, 0.0, 0.0, 1.0],
            t0,
            t0 + period,
            opts,
        )?;
        let y = traj.last();
        let monodromy = [[y[0], y[2]], [y[1], y[3]]];
        Ok(Fundamental {
            t0,
            period,
            traj,
            monodromy,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn monodromy(&self) -> &Mat2 {
        &self.monodromy
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    /// `Φ(t)`; columns are the solutions starting from `(1,0)` and `(0,1)`.
    pub fn matrix(&self, t: f64) -> Mat2 {
        let k = ((t - self.t0) / self.period).floor();
        let s = t - k * self.period;
        let mut y = [0.0; 4];
        self.traj.eval_into(s, &mut y);
        let phi = [[y[0], y[2]], [y[1], y[3]]];
        if k == 0.0 {
            phi
        } else {
            mat_mul(&phi, &mat_pow(&self.monodromy, k as i64))
        }
    }
}

/// One homogeneous solution: `Φ(t)·init`.
#[derive(Debug, Clone)]
pub struct Solution {
    fundamental: Arc<Fundamental>,
    init: [f64; 2],
}

impl Solution {
    pub fn new(fundamental: Arc<Fundamental>, init: [f64; 2]) -> Self {
        Solution { fundamental, init }
    }

    /// `(x, Mẋ)` at `t`.
    pub fn state(&self, t: f64) -> [f64; 2] {
        mat_vec(&self.fundamental.matrix(t), self.init)
    }

    pub fn init(&self) -> [f64; 2] {
        self.init
    }

    /// Linear combination `α·self + β·other` (same fundamental).
    pub fn combine(&self, alpha: f64, other: &Solution, beta: f64) -> Solution {
        Solution {
            fundamental: self.fundamental.clone(),
            init: [
                alpha * self.init[0] + beta * other.init[0],
                alpha * self.init[1] + beta * other.init[1],
            ],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolutionPair {
    pub u: Solution,
    pub v: Solution,
}

impl SolutionPair {
    pub fn fundamental(&self) -> &Arc<Fundamental> {
        &self.u.fundamental
    }

    /// Rotate `(u, v)` by a constant angle; `ρ` and `Ω` are unchanged.
    pub fn rotated(&self, theta: f64) -> SolutionPair {
        let (s, c) = theta.sin_cos();
        SolutionPair {
            u: self.u.combine(c, &self.v, -s),
            v: self.u.combine(s, &self.v, c),
        }
    }
}

/// Pointwise quantities derived from `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    pub u: f64,
    /// `M·u̇`
    pub u_mv: f64,
    pub v: f64,
    pub v_mv: f64,
    pub rho: f64,
    pub rho_dot: f64,
}

fn pair_state(pair: &SolutionPair, mass: f64, t: f64) -> PairState {
    let [u, u_mv] = pair.u.state(t);
    let [v, v_mv] = pair.v.state(t);
    let rho = (u * u + v * v).sqrt();
    PairState {
        u,
        u_mv,
        v,
        v_mv,
        rho,
        rho_dot: (u * u_mv + v * v_mv) / (mass * rho),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WronskianReport {
    /// Mean of `M(v̇u − u̇v)` over the scanned window.
    pub omega: f64,
    /// Largest pointwise deviation from the mean.
    pub max_deviation: f64,
}

fn sample_times(t0: f64, span: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| t0 + span * i as f64 / n as f64)
}

/// Wronskian constant `Ω = M(v̇u − u̇v) = u·(Mv̇) − v·(Mu̇)`, scanned over one
/// base period.
pub fn wronskian_omega(pair: &SolutionPair) -> Result<WronskianReport> {
    let fund = pair.fundamental();
    let (mut sum, mut scale_u, mut scale_v) = (0.0, 0.0f64, 0.0f64);
    let mut values = Vec::with_capacity(SAMPLES_PER_PERIOD);
    for t in sample_times(fund.t0, fund.period, SAMPLES_PER_PERIOD) {
        let [u, pu] = pair.u.state(t);
        let [v, pv] = pair.v.state(t);
        let w = u * pv - v * pu;
        sum += w;
        values.push(w);
        scale_u = scale_u.max(u.hypot(pu));
        scale_v = scale_v.max(v.hypot(pv));
    }
    let omega = sum / values.len() as f64;
    if !(omega.abs() > 1e-12 * scale_u * scale_v) {
        return Err(Error::LinearlyDependentPair { omega });
    }
    let max_deviation = values.iter().fold(0.0f64, |m, w| m.max((w - omega).abs()));
    Ok(WronskianReport {
        omega,
        max_deviation,
    })
}

/// Integrate the homogeneous equation from `x(t0) = x0`, `ẋ(t0) = v0`.
/// The returned trajectory holds `(x, Mẋ)`.
pub fn solve_homogeneous(
    spec: &OscillatorSpec,
    x0: f64,
    v0: f64,
    t0: f64,
    t1: f64,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    if x0 == 0.0 && v0 == 0.0 {
        return Err(Error::InvalidSpec("homogeneous initial data must be nonzero".into()));
    }
    integrate_ode(
        |t, y: &[f64], dy: &mut [f64]| {
            let (a, b) = spec.eom_rhs(t, y[0], y[1], 0.0);
            dy[0] = a;
            dy[1] = b;
        },
        &[x0, spec.mass.eval(t0) * v0],
        t0,
        t1,
        opts,
    )
}

/// How a [`HomogeneousPair`] was chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairKind {
    /// Built from the Floquet eigenvector; `multiplier_angle` is `σ` with
    /// `z(t + T) = e^{iσ} z(t)` over the fundamental's period.
    Canonical { multiplier_angle: f64 },
    Explicit,
}

/// Two independent homogeneous solutions with their Wronskian `Ω > 0`.
#[derive(Debug, Clone)]
pub struct HomogeneousPair {
    pair: SolutionPair,
    mass: PeriodicFunction,
    omega: f64,
    omega_deviation: f64,
    theta0: f64,
    kind: PairKind,
}

impl HomogeneousPair {
    /// Wrap a pair; if the Wronskian is negative, `v` is negated so `Ω > 0`.
    pub fn new(spec: &OscillatorSpec, mut pair: SolutionPair, kind: PairKind) -> Result<Self> {
        let mut w = wronskian_omega(&pair)?;
        if w.omega < 0.0 {
            pair.v = pair.v.combine(-1.0, &pair.v, 0.0);
            w.omega = -w.omega;
        }
        let t0 = pair.fundamental().t0;
        let [u0, _] = pair.u.state(t0);
        let [v0, _] = pair.v.state(t0);
        let p = HomogeneousPair {
            mass: spec.mass.clone(),
            omega: w.omega,
            omega_deviation: w.max_deviation,
            theta0: v0.atan2(u0),
            pair,
            kind,
        };
        if !(u0 * u0 + v0 * v0 > 0.0) {
            return Err(Error::LinearlyDependentPair { omega: p.omega });
        }
        Ok(p)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Largest relative deviation of the pointwise Wronskian from `Ω`.
    pub fn omega_relative_deviation(&self) -> f64 {
        self.omega_deviation / self.omega
    }

    pub fn kind(&self) -> PairKind {
        self.kind
    }

    pub fn solutions(&self) -> &SolutionPair {
        &self.pair
    }

    pub fn fundamental(&self) -> &Fundamental {
        self.pair.fundamental()
    }

    pub fn t0(&self) -> f64 {
        self.pair.fundamental().t0
    }

    pub fn state(&self, t: f64) -> PairState {
        pair_state(&self.pair, self.mass.eval(t), t)
    }

    pub fn rho(&self, t: f64) -> f64 {
        self.state(t).rho
    }

    /// Same pair rotated by a constant angle.
    pub fn rotated(&self, spec: &OscillatorSpec, theta: f64) -> Result<Self> {
        HomogeneousPair::new(spec, self.pair.rotated(theta), self.kind)
    }

    /// Unwrapped `arg(u + iv)`, continuous in `t`, equal to `atan2(v, u)` at
    /// the pair's reference time. The branch is tracked by integrating
    /// `Ω/(Mρ²)` and snapping to the principal value.
    pub fn phase(&self, t: f64) -> Result<f64> {
        let t0 = self.t0();
        let est = self.theta0 + self.phase_advance(t0, t)?;
        let s = self.state(t);
        let principal = s.v.atan2(s.u);
        Ok(principal + 2.0 * PI * ((est - principal) / (2.0 * PI)).round())
    }

    /// `∫_{ta}^{tb} Ω/(Mρ²) dt` by quadrature.
    pub fn phase_advance(&self, ta: f64, tb: f64) -> Result<f64> {
        if ta == tb {
            return Ok(0.0);
        }
        let panels = panels_for(tb - ta, self.fundamental().period);
        integrate_window(
            |t| {
                let s = self.state(t);
                self.omega / (self.mass.eval(t) * s.rho * s.rho)
            },
            ta,
            tb,
            panels,
        )
    }
}

/// Largest `|d(Mρ̇)/dt − Ω²/(Mρ³) + Mw²ρ|` over one base period, with
/// `d(Mρ̇)/dt` taken from the `(u, v)` dynamics.
pub fn ermakov_residual(spec: &OscillatorSpec, pair: &HomogeneousPair) -> f64 {
    let fund = pair.fundamental();
    let omega = pair.omega();
    sample_times(fund.t0, fund.period, SAMPLES_PER_PERIOD)
        .map(|t| {
            let m = spec.mass.eval(t);
            let mw2 = m * spec.w_sq.eval(t);
            let s = pair.state(t);
            // N = u·Mu̇ + v·Mv̇ = Mρρ̇
            let n = s.u * s.u_mv + s.v * s.v_mv;
            let n_dot = (s.u_mv * s.u_mv + s.v_mv * s.v_mv) / m - mw2 * s.rho * s.rho;
            let mrho_dot_dot = n_dot / s.rho - n * n / (m * s.rho.powi(3));
            (mrho_dot_dot - omega * omega / (m * s.rho.powi(3)) + mw2 * s.rho).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
enum XpRepr {
    Zero,
    /// Equilibrium of constant coefficients; `delta_rate = ½Mw²x²`.
    Constant { x: f64, delta_rate: f64 },
    /// Dense `(x_p, Mẋ_p, δ)` over one period.
    Periodic {
        traj: Trajectory,
        period: f64,
        delta_per_period: f64,
    },
}

/// `x_p` with `Mẋ_p` and `δ` (`δ̇ = ½Mw²x_p² − ½Mẋ_p²`, `δ(t0) = 0`).
#[derive(Debug, Clone)]
pub struct ParticularSolution {
    t0: f64,
    repr: XpRepr,
}

/// `(x_p, Mẋ_p, δ)` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XpState {
    pub x: f64,
    pub mv: f64,
    pub delta: f64,
}

impl ParticularSolution {
    pub fn zero(t0: f64) -> Self {
        ParticularSolution {
            t0,
            repr: XpRepr::Zero,
        }
    }

    pub fn constant(t0: f64, x: f64, mass: f64, w_sq: f64) -> Self {
        ParticularSolution {
            t0,
            repr: XpRepr::Constant {
                x,
                delta_rate: 0.5 * mass * w_sq * x * x,
            },
        }
    }

    /// Wrap a dense `(x, Mẋ, δ)` trajectory starting at `t0` spanning one
    /// period.
    pub fn periodic(traj: Trajectory) -> Self {
        let (t0, t1) = traj.span();
        let delta_per_period = traj.last()[2];
        ParticularSolution {
            t0,
            repr: XpRepr::Periodic {
                traj,
                period: t1 - t0,
                delta_per_period,
            },
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, XpRepr::Zero)
    }

    /// Period of the stored representation; `None` for time-independent `x_p`.
    pub fn period(&self) -> Option<f64> {
        match &self.repr {
            XpRepr::Periodic { period, .. } => Some(*period),
            _ => None,
        }
    }

    pub fn trajectory(&self) -> Option<&Trajectory> {
        match &self.repr {
            XpRepr::Periodic { traj, .. } => Some(traj),
            _ => None,
        }
    }

    pub fn state(&self, t: f64) -> XpState {
        match &self.repr {
            XpRepr::Zero => XpState {
                x: 0.0,
                mv: 0.0,
                delta: 0.0,
            },
            XpRepr::Constant { x, delta_rate } => XpState {
                x: *x,
                mv: 0.0,
                delta: delta_rate * (t - self.t0),
            },
            XpRepr::Periodic {
                traj,
                period,
                delta_per_period,
            } => {
                let k = ((t - self.t0) / period).floor();
                let s = t - k * period;
                let mut y = [0.0; 3];
                traj.eval_into(s, &mut y);
                XpState {
                    x: y[0],
                    mv: y[1],
                    delta: y[2] + k * delta_per_period,
                }
            }
        }
    }
}
