//! Dormand–Prince 5(4) with Hairer's continuous extension.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Nominal order of the propagating (5th-order) solution.
pub const METHOD_ORDER: u32 = 5;
/// Order of the continuous extension.
pub const INTERPOLATION_ORDER: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_max: f64,
}

impl OdeOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol,
            max_steps: 2_000_000,
            h_max: f64::INFINITY,
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self::with_tolerance(1e-10)
    }
}

/// Dense solution of an initial value problem.
///
/// Stores the accepted grid and, per step, the five coefficient vectors of the
/// quartic continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    dense: Vec<f64>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &[f64] {
        &self.times
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.state(self.times.len() - 1)
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn interpolation_order(&self) -> u32 {
        INTERPOLATION_ORDER
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    /// Evaluate the continuous extension. Grid points return the stored state
    /// exactly; times slightly outside the span use the end step's polynomial.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let n = self.times.len();
        if n == 1 {
            out.copy_from_slice(self.state(0));
            return;
        }
        let idx = self.times.partition_point(|&g| g <= t);
        if idx > 0 && idx <= n && self.times[idx - 1] == t {
            out.copy_from_slice(self.state(idx - 1));
            return;
        }
        let step = idx.clamp(1, n - 1) - 1;
        let (ta, tb) = (self.times[step], self.times[step + 1]);
        let theta = (t - ta) / (tb - ta);
        let theta1 = 1.0 - theta;
        let d = self.dim;
        let r = &self.dense[step * 5 * d..(step + 1) * 5 * d];
        for i in 0..d {
            out[i] = r[i]
                + theta
                    * (r[d + i]
                        + theta1 * (r[2 * d + i] + theta * (r[3 * d + i] + theta1 * r[4 * d + i])));
        }
    }
}

struct Stepper<F> {
    rhs: F,
    dim: usize,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl<F> Stepper<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    fn new(rhs: F, dim: usize) -> Self {
        Stepper {
            rhs,
            dim,
            k: core::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
        }
    }

    /// One step from `(t, y)` with `k[0] = f(t, y)` already set. Writes the
    /// 5th-order result to `y1`, the error estimate to `err`, and leaves
    /// `k[6] = f(t + h, y1)`.
    fn step(&mut self, t: f64, h: f64, y: &[f64], y1: &mut [f64], err: &mut [f64]) {
        let d = self.dim;
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;
        for i in 0..d {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        (self.rhs)(t + C2 * h, tmp, k2);
        for i in 0..d {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        (self.rhs)(t + C3 * h, tmp, k3);
        for i in 0..d {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        (self.rhs)(t + C4 * h, tmp, k4);
        for i in 0..d {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        (self.rhs)(t + C5 * h, tmp, k5);
        for i in 0..d {
            tmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        (self.rhs)(t + h, tmp, k6);
        for i in 0..d {
            y1[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        (self.rhs)(t + h, y1, k7);
        for i in 0..d {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
    }

    fn push_dense(&self, h: f64, y0: &[f64], y1: &[f64], dense: &mut Vec<f64>) {
        let d = self.dim;
        let [k1, _, k3, k4, k5, k6, k7] = &self.k;
        let base = dense.len();
        dense.resize(base + 5 * d, 0.0);
        let r = &mut dense[base..];
        for i in 0..d {
            let ydiff = y1[i] - y0[i];
            let bspl = h * k1[i] - ydiff;
            r[i] = y0[i];
            r[d + i] = ydiff;
            r[2 * d + i] = bspl;
            r[3 * d + i] = ydiff - h * k7[i] - bspl;
            r[4 * d + i] = h
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
    }
}

fn all_finite(y: &[f64]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t1 ≥ t0` with adaptive steps.
pub fn integrate_ode<F>(rhs: F, y0: &[f64], t0: f64, t1: f64, opts: &OdeOptions) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    assert!(t1 >= t0, "integrate_ode runs forward in time");
    let dim = y0.len();
    let mut traj = Trajectory {
        dim,
        times: vec![t0],
        states: y0.to_vec(),
        dense: Vec::new(),
    };
    if t1 == t0 {
        return Ok(traj);
    }
    if !all_finite(y0) {
        return Err(Error::NonFinite { t: t0 });
    }
    let mut st = Stepper::new(rhs, dim);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut y1 = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    (st.rhs)(t, &y, &mut st.k[0]);

    let span = t1 - t0;
    let scale0: f64 = y.iter().fold(0.0f64, |m, v| m.max(v.abs())) * opts.rtol + opts.atol;
    let slope: f64 = st.k[0].iter().fold(0.0, |m, v| m.max(v.abs()));
    let mut h = if slope > 0.0 {
        (0.01 * scale0 / (opts.rtol + opts.atol)).max(1e-3) / slope * opts.rtol.powf(0.2)
    } else {
        span * 1e-3
    };
    h = h.min(span).min(opts.h_max).max(span * 1e-9);

    let mut steps = 0usize;
    while t < t1 {
        if steps >= opts.max_steps {
            return Err(Error::MaxStepsExceeded { t, steps });
        }
        let last = t + h >= t1 || (t1 - (t + h)) < 1e-12 * span;
        if last {
            h = t1 - t;
        }
        st.step(t, h, &y, &mut y1, &mut err);
        steps += 1;
        if !all_finite(&y1) {
            h *= 0.25;
            if h < 1e-14 * t.abs().max(span) {
                return Err(Error::NonFinite { t });
            }
            continue;
        }
        let mut acc = 0.0;
        for i in 0..dim {
            let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
            let e = err[i] / sc;
            acc += e * e;
        }
        let en = (acc / dim as f64).sqrt();
        let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        if en <= 1.0 {
            let t_new = if last { t1 } else { t + h };
            st.push_dense(h, &y, &y1, &mut traj.dense);
            traj.times.push(t_new);
            traj.states.extend_from_slice(&y1);
            t = t_new;
            core::mem::swap(&mut y, &mut y1);
            let [k1, .., k7] = &mut st.k;
            k1.copy_from_slice(k7);
            h = (h * fac).min(opts.h_max);
        } else {
            h *= fac.min(1.0);
            if h < 1e-14 * t.abs().max(span) {
                return Err(Error::StepSizeUnderflow { t, h });
            }
        }
    }
    Ok(traj)
}

/// Same scheme with `n` equal steps and no error control.
pub fn integrate_fixed<F>(rhs: F, y0: &[f64], t0: f64, t1: f64, n: usize) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    assert!(n > 0);
    let dim = y0.len();
    let mut traj = Trajectory {
        dim,
        times: vec![t0],
        states: y0.to_vec(),
        dense: Vec::with_capacity(5 * dim * n),
    };
    let mut st = Stepper::new(rhs, dim);
    let mut y = y0.to_vec();
    let mut y1 = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    let h = (t1 - t0) / n as f64;
    (st.rhs)(t0, &y, &mut st.k[0]);
    for i in 0..n {
        let t = t0 + h * i as f64;
        st.step(t, h, &y, &mut y1, &mut err);
        if !all_finite(&y1) {
            return Err(Error::NonFinite { t });
        }
        st.push_dense(h, &y, &y1, &mut traj.dense);
        traj.times.push(if i + 1 == n { t1 } else { t + h });
        traj.states.extend_from_slice(&y1);
        core::mem::swap(&mut y, &mut y1);
        let [k1, .., k7] = &mut st.k;
        k1.copy_from_slice(k7);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn sho(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    #[test]
    fn harmonic_full_period() {
        let tr = integrate_ode(sho, &[1.0, 0.0], 0.0, 2.0 * PI, &OdeOptions::with_tolerance(1e-10))
            .unwrap();
        let y = tr.last();
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8, "{y:?}");
        // global error within 100·tol along the way
        for i in 0..100 {
            let t = 2.0 * PI * i as f64 / 99.0;
            let v = tr.eval(t);
            assert!((v[0] - t.cos()).abs() < 1e-8);
            assert!((v[1] + t.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_rhs() {
        let tr = integrate_ode(|_, _, dy: &mut [f64]| dy[0] = 0.0, &[3.5], -1.0, 4.0, &OdeOptions::default())
            .unwrap();
        for &t in tr.grid() {
            assert_eq!(tr.eval(t)[0], 3.5);
        }
        assert_eq!(tr.eval(0.123)[0], 3.5);
    }

    #[test]
    fn grid_points_exact() {
        let tr = integrate_ode(sho, &[1.0, 0.0], 0.0, 3.0, &OdeOptions::default()).unwrap();
        for i in 0..tr.grid().len() {
            assert_eq!(tr.eval(tr.grid()[i]).as_slice(), tr.state(i));
        }
    }

    /// Halved-tolerance self-convergence on a Mathieu equation.
    #[test]
    fn mathieu_self_convergence() {
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -(1.0 + 0.2 * t.cos()) * y[0];
        };
        let coarse = integrate_ode(rhs, &[1.0, 0.0], 0.0, 2.0 * PI, &OdeOptions::with_tolerance(1e-10))
            .unwrap();
        let fine = integrate_ode(rhs, &[1.0, 0.0], 0.0, 2.0 * PI, &OdeOptions::with_tolerance(1e-13))
            .unwrap();
        for (a, b) in coarse.last().iter().zip(fine.last()) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn fixed_step_order() {
        let err = |n| {
            let tr = integrate_fixed(sho, &[1.0, 0.0], 0.0, 2.0 * PI, n).unwrap();
            (tr.last()[0] - 1.0).abs().max(tr.last()[1].abs())
        };
        let (e1, e2) = (err(40), err(80));
        let order = (e1 / e2).log2();
        assert!(order >= METHOD_ORDER as f64 - 0.5, "observed order {order}");
    }

    #[test]
    fn dense_output_order() {
        // Midpoint interpolation error on the smooth harmonic solution.
        let err = |n| {
            let tr = integrate_fixed(sho, &[1.0, 0.0], 0.0, 2.0 * PI, n).unwrap();
            let g = tr.grid();
            (0..n)
                .map(|i| {
                    let t = 0.5 * (g[i] + g[i + 1]);
                    let v = tr.eval(t);
                    (v[0] - t.cos()).abs()
                })
                .fold(0.0, f64::max)
        };
        let order = (err(32) / err(64)).log2();
        assert!(order >= INTERPOLATION_ORDER as f64 - 0.5, "interpolation order {order}");
    }

    #[test]
    fn blowup_is_reported() {
        let r = integrate_ode(
            |_, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0],
            &[1.0],
            0.0,
            2.0,
            &OdeOptions::default(),
        );
        assert!(matches!(
            r,
            Err(Error::StepSizeUnderflow { .. } | Error::NonFinite { .. } | Error::MaxStepsExceeded { .. })
        ));
    }
}
