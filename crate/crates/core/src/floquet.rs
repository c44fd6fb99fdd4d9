//! Stability classification, the canonical solution pair, the periodic
//! particular solution and the common period `τ′`.

use alloc::sync::Arc;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::dynamics::{
    mat_det, mat_pow, Fundamental, HomogeneousPair, Mat2, PairKind, ParticularSolution, Solution,
    SolutionPair, SAMPLES_PER_PERIOD,
};
use crate::error::{Error, Result};
use crate::model::{OscillatorSpec, Ratio};
use crate::numerics::{integrate_ode, integrate_periodic, panels_for, OdeOptions};

/// `|trace| = 2` is accepted within this band.
pub const PARABOLIC_BAND: f64 = 1e-9;
/// Monodromy counted as `±𝟙` within this entrywise distance.
const DIAGONAL_TOL: f64 = 1e-7;
/// `det(𝟙 − Mono)` below this means resonant forcing.
pub const RESONANCE_TOL: f64 = 1e-8;
/// Sup-norm mismatch accepted when certifying a period.
pub const PERIODICITY_TOL: f64 = 1e-8;
/// Default search cap for `τ′`, in base periods.
pub const DEFAULT_PERIOD_CAP: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Classification {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Monodromy {
    /// Propagator of `(x, Mẋ)` over `[t0, t0 + period]`.
    pub matrix: Mat2,
    pub trace: f64,
    pub det: f64,
    pub classification: Classification,
    pub t0: f64,
    pub period: f64,
}

impl Monodromy {
    pub fn from_matrix(matrix: Mat2, t0: f64, period: f64) -> Self {
        let trace = matrix[0][0] + matrix[1][1];
        let classification = if (trace.abs() - 2.0).abs() <= PARABOLIC_BAND {
            Classification::Parabolic
        } else if trace.abs() < 2.0 {
            Classification::Elliptic
        } else {
            Classification::Hyperbolic
        };
        Monodromy {
            matrix,
            trace,
            det: mat_det(&matrix),
            classification,
            t0,
            period,
        }
    }

    /// `Some(±1)` if the matrix is `±𝟙`.
    pub fn diagonal_sign(&self) -> Option<f64> {
        let s = self.trace.signum();
        let m = &self.matrix;
        let off = m[0][1].abs().max(m[1][0].abs());
        let diag = (m[0][0] - s).abs().max((m[1][1] - s).abs());
        (off.max(diag) < DIAGONAL_TOL).then_some(s)
    }

    /// Eigenvalues as complex numbers.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let half = 0.5 * self.trace;
        let disc = Complex64::new(half * half - self.det, 0.0).sqrt();
        (half + disc, half - disc)
    }

    /// Whether solutions stay bounded and a periodic `ρ` exists.
    pub fn is_bounded(&self) -> bool {
        match self.classification {
            Classification::Elliptic => true,
            Classification::Parabolic => self.diagonal_sign().is_some(),
            Classification::Hyperbolic => false,
        }
    }
}

/// Propagator of the homogeneous equation over `[t0, t0 + period]`.
pub fn monodromy(spec: &OscillatorSpec, t0: f64, period: f64, opts: &OdeOptions) -> Result<Monodromy> {
    match Fundamental::compute(spec, t0, period, opts) {
        Ok(f) => Ok(Monodromy::from_matrix(*f.monodromy(), t0, period)),
        Err(Error::StepSizeUnderflow { .. } | Error::NonFinite { .. } | Error::MaxStepsExceeded { .. }) => {
            Err(Error::UnboundedHomogeneous {
                trace: f64::INFINITY,
            })
        }
        Err(e) => Err(e),
    }
}

/// Smallest period of `(M, w²)`; `tau` when both are constant.
pub fn homogeneous_period(spec: &OscillatorSpec) -> f64 {
    spec.homogeneous_period_ratio()
        .map_or(spec.tau, |r| r.value() * spec.tau)
}

/// Fundamental matrix over the homogeneous coefficients' own period.
pub fn fundamental(spec: &OscillatorSpec, t0: f64, opts: &OdeOptions) -> Result<Arc<Fundamental>> {
    Fundamental::compute(spec, t0, homogeneous_period(spec), opts)
        .map(Arc::new)
        .map_err(|e| match e {
            Error::StepSizeUnderflow { .. } | Error::NonFinite { .. } | Error::MaxStepsExceeded { .. } => {
                Error::UnboundedHomogeneous {
                    trace: f64::INFINITY,
                }
            }
            e => e,
        })
}

/// Stability over one Hamiltonian period `τ`, obtained from the fundamental
/// matrix over the (possibly shorter) homogeneous period.
pub fn classify(fund: &Fundamental, tau: f64) -> Monodromy {
    let k = (tau / fund.period()).round() as i64;
    let m = mat_pow(fund.monodromy(), k.max(1));
    Monodromy::from_matrix(m, fund.t0(), tau)
}

/// Complex Floquet initial vector `ζ = (x, Mẋ)` of `z = u + iv`.
fn floquet_vector(spec: &OscillatorSpec, fund: &Fundamental) -> Result<(Complex64, Complex64, f64)> {
    let t0 = fund.t0();
    if spec.mass.is_constant() && spec.w_sq.is_constant() {
        let w2 = spec.w_sq.constant;
        if !(w2 > 0.0) {
            return Err(Error::UnboundedHomogeneous { trace: 2.0 });
        }
        // z = e^{iw(t−t0)}
        let mw = spec.mass.constant * w2.sqrt();
        let sigma = w2.sqrt() * fund.period();
        return Ok((Complex64::new(1.0, 0.0), Complex64::new(0.0, mw), sigma));
    }
    let mono = Monodromy::from_matrix(*fund.monodromy(), t0, fund.period());
    match mono.classification {
        Classification::Hyperbolic => return Err(Error::UnboundedHomogeneous { trace: mono.trace }),
        Classification::Parabolic => {
            let Some(sign) = mono.diagonal_sign() else {
                return Err(Error::UnboundedHomogeneous { trace: mono.trace });
            };
            // Every solution is (anti)periodic; take the circular choice at t0.
            let mean_w2 = integrate_periodic(|t| spec.w_sq.eval(t), t0, fund.period(), 32)? / fund.period();
            let kappa = spec.mass.eval(t0) * mean_w2.max(f64::MIN_POSITIVE).sqrt();
            let sigma = if sign > 0.0 { 0.0 } else { core::f64::consts::PI };
            return Ok((Complex64::new(1.0, 0.0), Complex64::new(0.0, kappa), sigma));
        }
        Classification::Elliptic => {}
    }
    let [[a, b], [c, d]] = mono.matrix;
    let (lambda, _) = mono.eigenvalues();
    // (M − λ)ζ = 0
    let (zx, zp) = if b.abs() >= c.abs() {
        (Complex64::new(b, 0.0), lambda - a)
    } else {
        (lambda - d, Complex64::new(c, 0.0))
    };
    let omega = (zx.conj() * zp).im;
    Ok(if omega > 0.0 {
        (zx, zp, lambda.arg())
    } else {
        (zx.conj(), zp.conj(), lambda.conj().arg())
    })
}

/// Canonical pair: `u + iv` is the Floquet solution with `Ω > 0`, scaled so
/// the period-mean of `ρ²` is 1 and rotated so `v(t0) = 0`, `u(t0) > 0`.
/// `ρ` then has the homogeneous coefficients' period, which divides `τ`.
pub fn canonical_pair(spec: &OscillatorSpec, t0: f64, opts: &OdeOptions) -> Result<HomogeneousPair> {
    spec.validate()?;
    let fund = fundamental(spec, t0, opts)?;
    let (zx, zp, sigma) = floquet_vector(spec, &fund)?;
    let raw = |zx: Complex64, zp: Complex64| SolutionPair {
        u: Solution::new(fund.clone(), [zx.re, zp.re]),
        v: Solution::new(fund.clone(), [zx.im, zp.im]),
    };
    let trial = raw(zx, zp);
    let mean_rho2 = integrate_periodic(
        |t| {
            let [u, _] = trial.u.state(t);
            let [v, _] = trial.v.state(t);
            u * u + v * v
        },
        t0,
        fund.period(),
        panels_for(fund.period(), fund.period()),
    )? / fund.period();
    let rot = Complex64::from_polar(1.0 / mean_rho2.sqrt(), -zx.arg());
    HomogeneousPair::new(
        spec,
        raw(zx * rot, zp * rot),
        PairKind::Canonical {
            multiplier_angle: sigma,
        },
    )
}

/// Pair from explicit initial data `u(t0), u̇(t0), v(t0), v̇(t0)`.
pub fn explicit_pair(
    spec: &OscillatorSpec,
    t0: f64,
    u: (f64, f64),
    v: (f64, f64),
    opts: &OdeOptions,
) -> Result<HomogeneousPair> {
    spec.validate()?;
    let fund = fundamental(spec, t0, opts)?;
    let m0 = spec.mass.eval(t0);
    HomogeneousPair::new(
        spec,
        SolutionPair {
            u: Solution::new(fund.clone(), [u.0, m0 * u.1]),
            v: Solution::new(fund, [v.0, m0 * v.1]),
        },
        PairKind::Explicit,
    )
}

/// Period over which the forced equation is periodic: the rational lcm of
/// the homogeneous coefficients' period and the forcing period.
pub fn forcing_period(spec: &OscillatorSpec) -> f64 {
    let r = match (spec.homogeneous_period_ratio(), spec.force_period_ratio()) {
        (Some(a), Some(b)) => a.lcm(b),
        (a, b) => a.or(b).unwrap_or(Ratio::ONE),
    };
    r.value() * spec.tau
}

/// Unique periodic particular solution, with its natural period.
pub fn periodic_particular(spec: &OscillatorSpec, t0: f64, opts: &OdeOptions) -> Result<ParticularSolution> {
    spec.validate()?;
    if spec.force.is_zero() {
        return Ok(ParticularSolution::zero(t0));
    }
    if spec.mass.is_constant() && spec.w_sq.is_constant() && spec.force.is_constant() {
        let (m, w2) = (spec.mass.constant, spec.w_sq.constant);
        if !(w2 > 0.0) {
            return Err(Error::ResonantForcing { det: 0.0 });
        }
        return Ok(ParticularSolution::constant(t0, spec.force.constant / (m * w2), m, w2));
    }
    periodic_particular_with_period(spec, t0, forcing_period(spec), opts)
}

/// Periodic particular solution over a given period, from the fixed point
/// `y(t0) = (𝟙 − Mono_T)⁻¹ · r` where `r` is the forced response from rest.
pub fn periodic_particular_with_period(
    spec: &OscillatorSpec,
    t0: f64,
    period: f64,
    opts: &OdeOptions,
) -> Result<ParticularSolution> {
    let mono = monodromy(spec, t0, period, opts)?;
    let [[a, b], [c, d]] = mono.matrix;
    // det(𝟙 − M)
    let det = (1.0 - a) * (1.0 - d) - b * c;
    if det.abs() < RESONANCE_TOL {
        return Err(Error::ResonantForcing { det });
    }
    let forced = |t: f64, y: &[f64], dy: &mut [f64]| {
        let m = spec.mass.eval(t);
        let mw2 = m * spec.w_sq.eval(t);
        dy[0] = y[1] / m;
        dy[1] = spec.force.eval(t) - mw2 * y[0];
        if dy.len() > 2 {
            dy[2] = 0.5 * mw2 * y[0] * y[0] - 0.5 * y[1] * y[1] / m;
        }
    };
    let rest = integrate_ode(forced, &[0.0, 0.0], t0, t0 + period, opts)?;
    let r = rest.last();
    // (𝟙 − M)⁻¹ = adj / det
    let x0 = ((1.0 - d) * r[0] + b * r[1]) / det;
    let p0 = (c * r[0] + (1.0 - a) * r[1]) / det;
    let traj = integrate_ode(forced, &[x0, p0, 0.0], t0, t0 + period, opts)?;
    Ok(ParticularSolution::periodic(traj))
}

/// Smallest `kτ`, `k ≤ cap`, that is a period of both `ρ` and `x_p`,
/// certified on [`SAMPLES_PER_PERIOD`] samples per base period.
pub fn common_period(spec: &OscillatorSpec, pair: &HomogeneousPair, xp: &ParticularSolution, cap: u32) -> Result<f64> {
    let t0 = pair.t0();
    let mut rho = alloc::vec::Vec::with_capacity(SAMPLES_PER_PERIOD);
    let mut xs = alloc::vec::Vec::with_capacity(SAMPLES_PER_PERIOD);
    for k in 1..=cap {
        let period = k as f64 * spec.tau;
        let n = SAMPLES_PER_PERIOD * k as usize;
        rho.clear();
        xs.clear();
        let (mut rho_scale, mut x_scale) = (1.0f64, 1.0f64);
        for i in 0..n {
            let t = t0 + period * i as f64 / n as f64;
            let (r0, r1) = (pair.rho(t), pair.rho(t + period));
            let (x0, x1) = (xp.state(t).x, xp.state(t + period).x);
            rho_scale = rho_scale.max(r0);
            x_scale = x_scale.max(x0.abs());
            rho.push((r1 - r0).abs());
            xs.push((x1 - x0).abs());
        }
        let rho_ok = rho.iter().all(|d| *d < PERIODICITY_TOL * rho_scale);
        let x_ok = xs.iter().all(|d| *d < PERIODICITY_TOL * x_scale);
        if rho_ok && x_ok {
            return Ok(period);
        }
    }
    Err(Error::NoCommonPeriod { cap })
}
