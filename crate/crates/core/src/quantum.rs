//! Quasi-periodic wave functions, their total and geometric phases, and the
//! relation `Q_H = −(γ_{m+1} − γ_m)`.
//!
//! ```text
//! ψ_m = (Ω/πħ)^{1/4} / √(2^m m! ρ) · [(u − iv)/ρ]^{m+½}
//!       · exp[(i/ħ)(δ + ∫f)] · exp[(i/ħ)(Max² + (Mẋ_p + b)x)]
//!       · exp[(x − x_p)²/(2ħ) · (−Ω/ρ² + iMρ̇/ρ)] · H_m(√(Ω/ħ)(x − x_p)/ρ)
//! ```
//!
//! The half-integer power is evaluated as `exp(−i(m+½)θ)` with `θ` the
//! continuously tracked `arg(u + iv)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use num_complex::Complex64;

use crate::action_angle::{ActionAngleFrame, FrameState};
use crate::dynamics::ermakov_residual;
use crate::error::{Error, Result};
use crate::hannay::{hannay_angles, HannayAngles};
use crate::numerics::{hermite, integrate_window, panels_for, MAX_HERMITE_ORDER};

/// Required agreement between the two evaluations of `γ_m`.
pub const GAMMA_LINES_TOL: f64 = 1e-6;
/// Default number of points in the wave-function verification grid.
pub const GRID_POINTS: usize = 2048;
/// Half-width of the grid in units of the Hermite envelope.
pub const GRID_HALF_WIDTH: f64 = 8.0;

fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|k| (k as f64).ln()).sum()
}

/// `ψ_m(·, t)` with all `x`-independent pieces evaluated once.
#[derive(Debug, Clone)]
pub struct WaveSlice {
    m: usize,
    hbar: f64,
    state: FrameState,
    ln_norm: f64,
    /// Phase independent of `x`.
    phase: f64,
}

impl WaveSlice {
    pub fn new(frame: &ActionAngleFrame, m: usize, t: f64) -> Result<Self> {
        if m > MAX_HERMITE_ORDER {
            return Err(Error::UnsupportedHermiteOrder {
                m,
                max: MAX_HERMITE_ORDER,
            });
        }
        let hbar = frame.spec().hbar;
        let state = frame.state(t);
        let theta = frame.pair().phase(t)?;
        let mh = m as f64 + 0.5;
        let ln_norm = 0.25 * (state.omega / (PI * hbar)).ln()
            - 0.5 * (m as f64 * 2f64.ln() + ln_factorial(m) + state.rho.ln());
        Ok(WaveSlice {
            m,
            hbar,
            state,
            ln_norm,
            phase: -mh * theta + (state.delta + state.f_integral) / hbar,
        })
    }

    pub fn state(&self) -> &FrameState {
        &self.state
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let s = &self.state;
        let k = &s.coeffs;
        let h = self.hbar;
        let xr = x - s.x_p;
        let z = (s.omega / h).sqrt() * xr / s.rho;
        let hm = hermite(self.m, z).unwrap_or(f64::NAN);
        let modulus = (self.ln_norm - 0.5 * z * z).exp() * hm;
        let phase = self.phase
            + (k.mass * k.a * x * x + (k.mass * s.xp_dot + k.b) * x) / h
            + k.mass * s.rho_dot / s.rho * xr * xr / (2.0 * h);
        Complex64::from_polar(modulus, phase)
    }
}

pub fn wavefunction(frame: &ActionAngleFrame, m: usize, x: f64, t: f64) -> Result<Complex64> {
    Ok(WaveSlice::new(frame, m, t)?.eval(x))
}

fn period_window(frame: &ActionAngleFrame) -> Result<(f64, f64, usize)> {
    let tp = frame.tau_prime()?;
    let t0 = frame.t0();
    Ok((t0, t0 + tp, panels_for(tp, frame.spec().tau)))
}

/// `∫ Ω/(Mρ²) dt` over `τ′`.
pub fn dynamical_winding(frame: &ActionAngleFrame) -> Result<f64> {
    let (a, b, _) = period_window(frame)?;
    frame.pair().phase_advance(a, b)
}

/// `(1/ħ)∫(δ̇ + f) dt` over `τ′`.
fn tail_phase(frame: &ActionAngleFrame) -> Result<f64> {
    let (a, b, panels) = period_window(frame)?;
    let i = integrate_window(
        |t| {
            let s = frame.state(t);
            s.delta_dot + s.coeffs.f
        },
        a,
        b,
        panels,
    )?;
    Ok(i / frame.spec().hbar)
}

/// `χ_m = −(m+½)∫Ω/(Mρ²) + (1/ħ)∫(δ̇ + f)` over `τ′`.
pub fn total_phase(frame: &ActionAngleFrame, m: usize) -> Result<f64> {
    Ok(-(m as f64 + 0.5) * dynamical_winding(frame)? + tail_phase(frame)?)
}

fn energy_parts(s: &FrameState, hbar: f64) -> (f64, f64) {
    let k = &s.coeffs;
    let (om, rho, rd) = (s.omega, s.rho, s.rho_dot);
    let ma_dot = k.ma_dot();
    let ladder = hbar
        * (om / (2.0 * k.mass * rho * rho) + k.mass * rd * rd / (2.0 * om) + k.mass * k.w_sq * rho * rho / (2.0 * om)
            - rho * rho / om * ma_dot);
    let tail = 0.5 * k.mass * s.xp_dot * s.xp_dot + 0.5 * k.mass * k.w_sq * s.x_p * s.x_p
        - k.force * s.x_p
        - ma_dot * s.x_p * s.x_p
        - k.b_dot * s.x_p
        - k.f;
    (ladder, tail)
}

/// `⟨ψ_m|H|ψ_m⟩` in closed form. The ladder bracket's third term is
/// `Mw²ρ²/2Ω`.
pub fn energy_expectation(frame: &ActionAngleFrame, m: usize, t: f64) -> f64 {
    let (ladder, tail) = energy_parts(&frame.state(t), frame.spec().hbar);
    (m as f64 + 0.5) * ladder + tail
}

/// `(1/Ω)∫(Mρ̇² + 2Maρρ̇) dt`, the `m`-slope of `γ_m`.
pub fn gamma_slope(frame: &ActionAngleFrame) -> Result<f64> {
    let (a, b, panels) = period_window(frame)?;
    let i = integrate_window(
        |t| {
            let s = frame.state(t);
            let k = &s.coeffs;
            k.mass * s.rho_dot * s.rho_dot + 2.0 * k.mass * k.a * s.rho * s.rho_dot
        },
        a,
        b,
        panels,
    )?;
    Ok(i / frame.omega())
}

/// `(1/ħ)∫(Mẋ_p² + 2Max_pẋ_p + bẋ_p) dt`, the `m`-independent part of `γ_m`.
pub fn gamma_offset(frame: &ActionAngleFrame) -> Result<f64> {
    let (a, b, panels) = period_window(frame)?;
    let i = integrate_window(
        |t| {
            let s = frame.state(t);
            let k = &s.coeffs;
            k.mass * s.xp_dot * s.xp_dot + 2.0 * k.mass * k.a * s.x_p * s.xp_dot + k.b * s.xp_dot
        },
        a,
        b,
        panels,
    )?;
    Ok(i / frame.spec().hbar)
}

/// Both evaluations of `γ_m` for every `m < count`: `χ_m + (1/ħ)∫⟨H⟩` and
/// the closed form.
pub fn geometric_phase_lines(frame: &ActionAngleFrame, count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (a, b, panels) = period_window(frame)?;
    let hbar = frame.spec().hbar;
    let winding = dynamical_winding(frame)?;
    let tail = tail_phase(frame)?;
    let ladder = integrate_window(|t| energy_parts(&frame.state(t), hbar).0, a, b, panels)? / hbar;
    let energy_tail = integrate_window(|t| energy_parts(&frame.state(t), hbar).1, a, b, panels)? / hbar;
    let slope = gamma_slope(frame)?;
    let offset = gamma_offset(frame)?;
    let mut first = Vec::with_capacity(count);
    let mut second = Vec::with_capacity(count);
    for m in 0..count {
        let mh = m as f64 + 0.5;
        first.push(-mh * winding + tail + mh * ladder + energy_tail);
        second.push(mh * slope + offset);
    }
    Ok((first, second))
}

/// `γ_m` from the closed form, checked against `χ_m + (1/ħ)∫⟨H⟩`.
pub fn geometric_phase(frame: &ActionAngleFrame, m: usize) -> Result<f64> {
    let (first, second) = geometric_phase_lines(frame, m + 1)?;
    let (g1, g2) = (first[m], second[m]);
    if (g1 - g2).abs() > GAMMA_LINES_TOL {
        return Err(Error::Inconsistent {
            what: "geometric phase: expectation route disagrees with closed form",
            first: g1,
            second: g2,
        });
    }
    Ok(g2)
}

/// Largest `|Q_H + γ_{m+1} − γ_m|` for `m < m_max`, over both evaluations
/// of `γ` and the closed-form `Q_H`.
pub fn verify_relation(frame: &ActionAngleFrame, m_max: usize) -> Result<f64> {
    let q = crate::hannay::hannay_closed_form(frame)?;
    let (first, second) = geometric_phase_lines(frame, m_max.max(1) + 1)?;
    Ok(relation_residual(q, &first, m_max).max(relation_residual(q, &second, m_max)))
}

fn relation_residual(q: f64, gamma: &[f64], m_max: usize) -> f64 {
    gamma
        .windows(2)
        .take(m_max.max(1))
        .map(|w| (q + w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}

/// Uniform grid centered on `x_p(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveGrid {
    pub start: f64,
    pub step: f64,
    pub points: usize,
}

impl WaveGrid {
    /// Half-width `8√(ħρ_max²(2m+1)/Ω)` with `ρ_max` over `τ′` (or at `t`
    /// if the frame has no period).
    pub fn for_level(frame: &ActionAngleFrame, m: usize, t: f64, points: usize) -> Self {
        let s = frame.state(t);
        let rho_max = match frame.tau_prime() {
            Ok(tp) => (0..256)
                .map(|k| frame.pair().rho(frame.t0() + tp * k as f64 / 256.0))
                .fold(s.rho, f64::max),
            Err(_) => s.rho,
        };
        let half = GRID_HALF_WIDTH * (frame.spec().hbar * rho_max * rho_max * (2 * m + 1) as f64 / s.omega).sqrt();
        WaveGrid {
            start: s.x_p - half,
            step: 2.0 * half / (points - 1) as f64,
            points,
        }
    }

    pub fn x(&self, k: usize) -> f64 {
        self.start + self.step * k as f64
    }

    pub fn sample(&self, slice: &WaveSlice) -> Vec<Complex64> {
        (0..self.points).map(|k| slice.eval(self.x(k))).collect()
    }

    /// `∫ conj(f)·g dx`, trapezoid.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        let n = f.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            acc += f[k].conj() * g[k] * w;
        }
        acc * self.step
    }
}

const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const D2: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
const STENCIL: usize = 4;

fn d1(f: &[Complex64], k: usize, h: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, c) in D1.iter().enumerate() {
        acc += (f[k + j + 1] - f[k - j - 1]) * *c;
    }
    acc / h
}

fn d2(f: &[Complex64], k: usize, h: f64) -> Complex64 {
    let mut acc = f[k] * D2[0];
    for (j, c) in D2[1..].iter().enumerate() {
        acc += (f[k + j + 1] + f[k - j - 1]) * *c;
    }
    acc / (h * h)
}

/// `Ĥψ` on the interior of the grid, with `p̂ = −iħ∂ₓ`, `xp̂` symmetrized and
/// eighth-order central differences. The first and last four entries are zero.
pub fn apply_hamiltonian(frame: &ActionAngleFrame, grid: &WaveGrid, psi: &[Complex64], t: f64) -> Vec<Complex64> {
    let spec = frame.spec();
    let k = spec.coefficients(t);
    let (c, d) = (k.c(), k.d());
    let hbar = spec.hbar;
    let i = Complex64::new(0.0, 1.0);
    let konst = k.b * k.b / (2.0 * k.mass) - k.f;
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); psi.len()];
    for n in STENCIL..psi.len() - STENCIL {
        let x = grid.x(n);
        let (p1, p2) = (d1(psi, n, grid.step), d2(psi, n, grid.step));
        out[n] = p2 * (-hbar * hbar / (2.0 * k.mass))
            + i * hbar * k.a * (p1 * (2.0 * x) + psi[n])
            + psi[n] * (0.5 * k.mass * c * x * x + d * x + konst)
            + i * hbar * (k.b / k.mass) * p1;
    }
    out
}

/// `‖iħ∂ₜψ − Ĥψ‖ / ‖Ĥψ‖` on the grid interior, `∂ₜ` by an eighth-order
/// stencil of step `dt`.
pub fn schrodinger_residual(frame: &ActionAngleFrame, m: usize, t: f64, points: usize, dt: f64) -> Result<f64> {
    let grid = WaveGrid::for_level(frame, m, t, points);
    let psi = grid.sample(&WaveSlice::new(frame, m, t)?);
    let h_psi = apply_hamiltonian(frame, &grid, &psi, t);
    let mut dpsi = alloc::vec![Complex64::new(0.0, 0.0); points];
    for (j, c) in D1.iter().enumerate() {
        let step = (j + 1) as f64 * dt;
        let fwd = grid.sample(&WaveSlice::new(frame, m, t + step)?);
        let bwd = grid.sample(&WaveSlice::new(frame, m, t - step)?);
        for n in 0..points {
            dpsi[n] += (fwd[n] - bwd[n]) * (*c / dt);
        }
    }
    let hbar = frame.spec().hbar;
    let (mut num, mut den) = (0.0, 0.0);
    for n in STENCIL..points - STENCIL {
        let r = Complex64::new(0.0, hbar) * dpsi[n] - h_psi[n];
        num += r.norm_sqr();
        den += h_psi[n].norm_sqr();
    }
    Ok((num / den).sqrt())
}

/// `⟨ψ_m|Ĥ|ψ_m⟩` by grid quadrature.
pub fn energy_on_grid(frame: &ActionAngleFrame, m: usize, t: f64, points: usize) -> Result<f64> {
    let grid = WaveGrid::for_level(frame, m, t, points);
    let psi = grid.sample(&WaveSlice::new(frame, m, t)?);
    let h_psi = apply_hamiltonian(frame, &grid, &psi, t);
    Ok(grid.inner(&psi, &h_psi).re)
}

/// Largest deviation of `∫ψ_m*ψ_n dx` from `δ_mn` for `m, n ≤ max_level`.
pub fn orthonormality_error(frame: &ActionAngleFrame, max_level: usize, t: f64, points: usize) -> Result<f64> {
    let grid = WaveGrid::for_level(frame, max_level, t, points);
    let waves = (0..=max_level)
        .map(|m| Ok(grid.sample(&WaveSlice::new(frame, m, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for m in 0..=max_level {
        for n in m..=max_level {
            let target = if m == n { 1.0 } else { 0.0 };
            worst = worst.max((grid.inner(&waves[m], &waves[n]) - target).norm());
        }
    }
    Ok(worst)
}

/// Settings for [`PhaseReport::compute`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    /// Phases are reported for `m = 0..=m_max`.
    pub m_max: usize,
    /// Run the wave-function grid checks (normalization, Schrödinger residual).
    pub grid_checks: bool,
    pub grid_points: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            m_max: 9,
            grid_checks: true,
            grid_points: GRID_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    /// Ermakov equation residual.
    pub ermakov: f64,
    /// Relative spread of the Wronskian `Ω` along the base period.
    pub wronskian: f64,
    /// Largest `|ρ(t+τ′) − ρ(t)| + |x_p(t+τ′) − x_p(t)|` on sample times.
    pub periodicity: f64,
    /// Largest disagreement between the two evaluations of `γ_m`.
    pub gamma_lines: f64,
    /// Spread of `γ_{m+1} − γ_m` across `m`.
    pub gamma_affinity: f64,
    /// Largest pairwise difference among the three Hannay angles.
    pub hannay_spread: f64,
    /// Grid checks, when run: orthonormality for `m ≤ min(m_max, 5)`.
    pub orthonormality: Option<f64>,
    /// Grid checks, when run: worst relative Schrödinger residual.
    pub schrodinger: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhaseReport {
    pub t0: f64,
    pub tau_prime: f64,
    pub omega: f64,
    pub hbar: f64,
    pub hannay: HannayAngles,
    /// `∫Ω/(Mρ²)` over `τ′`.
    pub dynamical_winding: f64,
    pub chi: Vec<f64>,
    pub gamma: Vec<f64>,
    pub relation_residual: f64,
    pub diagnostics: Diagnostics,
}

impl PhaseReport {
    pub fn compute(frame: &ActionAngleFrame, opts: &ReportOptions) -> Result<Self> {
        let count = opts.m_max.max(1) + 1;
        let tp = frame.tau_prime()?;
        let hannay = hannay_angles(frame)?;
        let (first, second) = geometric_phase_lines(frame, count)?;
        let gamma_lines = first
            .iter()
            .zip(&second)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if gamma_lines > GAMMA_LINES_TOL {
            return Err(Error::Inconsistent {
                what: "geometric phase: expectation route disagrees with closed form",
                first: first[0],
                second: second[0],
            });
        }
        let steps: Vec<f64> = first.windows(2).map(|w| w[1] - w[0]).collect();
        let hi = steps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = steps.iter().cloned().fold(f64::INFINITY, f64::min);
        let q = hannay.closed_form;
        let relation = relation_residual(q, &first, count - 1).max(relation_residual(q, &second, count - 1));

        let winding = dynamical_winding(frame)?;
        let tail = tail_phase(frame)?;
        let chi = (0..count).map(|m| -(m as f64 + 0.5) * winding + tail).collect();

        let t0 = frame.t0();
        let periodicity = (0..16)
            .map(|k| {
                let t = t0 + tp * k as f64 / 16.0;
                let (a, b) = (frame.state(t), frame.state(t + tp));
                (a.rho - b.rho).abs() + (a.x_p - b.x_p).abs()
            })
            .fold(0.0, f64::max);

        let (orthonormality, schrodinger) = if opts.grid_checks {
            let top = opts.m_max.min(5);
            let ortho = orthonormality_error(frame, top, t0 + 0.37 * tp, opts.grid_points)?;
            let dt = 1e-3 * frame.spec().tau;
            let mut worst = 0.0f64;
            for m in [0, top] {
                worst = worst.max(schrodinger_residual(frame, m, t0 + 0.61 * tp, opts.grid_points, dt)?);
            }
            (Some(ortho), Some(worst))
        } else {
            (None, None)
        };

        Ok(PhaseReport {
            t0,
            tau_prime: tp,
            omega: frame.omega(),
            hbar: frame.spec().hbar,
            hannay,
            dynamical_winding: winding,
            chi,
            gamma: second,
            relation_residual: relation,
            diagnostics: Diagnostics {
                ermakov: ermakov_residual(frame.spec(), frame.pair()),
                wronskian: frame.pair().omega_relative_deviation(),
                periodicity,
                gamma_lines,
                gamma_affinity: if steps.is_empty() { 0.0 } else { hi - lo },
                hannay_spread: hannay.spread(),
                orthonormality,
                schrodinger,
            },
        })
    }
}
