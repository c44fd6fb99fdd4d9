//! Plot-ready CSV files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hannay_core::action_angle::{unwrap_angle, ActionAngleFrame};
use hannay_core::numerics::{integrate_ode, OdeOptions};
use hannay_core::quantum::{WaveGrid, WaveSlice};

use crate::error::KitError;
use crate::report::format_f64;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const DENSITY_FILE: &str = "psi0_density.csv";
/// Fractions of `τ′` at which `|ψ₀|²` is tabulated.
pub const DENSITY_PHASES: [f64; 4] = [0.0, 0.25, 0.5, 0.75];
pub const DENSITY_POINTS: usize = 401;

const TRAJECTORY_HEADER: &str = "t [time],rho [length],rho_dot [length/time],x_p [length],p_p [momentum],\
action [action],angle_unwrapped [rad]";

fn row(values: &[f64]) -> String {
    let mut s = values.iter().map(|v| format_f64(*v)).collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

/// Frame functions and one Hamilton-flow orbit, starting on the level
/// curve `I = 1` at angle zero, sampled `samples + 1` times over `τ′`.
pub fn trajectory_csv(frame: &ActionAngleFrame, samples: usize, opts: &OdeOptions) -> Result<String, KitError> {
    let tp = frame.tau_prime()?;
    let t0 = frame.t0();
    let spec = frame.spec();
    let (x0, p0) = frame.inverse_map(0.0, 1.0, t0);
    let orbit = integrate_ode(
        |t, y: &[f64], dy: &mut [f64]| {
            let (a, b) = spec.hamilton_rhs(y[0], y[1], t);
            dy[0] = a;
            dy[1] = b;
        },
        &[x0, p0],
        t0,
        t0 + tp,
        opts,
    )?;
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    let mut q = 0.0;
    for k in 0..=samples {
        let t = t0 + tp * k as f64 / samples as f64;
        let s = frame.state(t);
        let y = orbit.eval(t);
        q = unwrap_angle(q, frame.angle(y[0], y[1], t)?);
        out.push_str(&row(&[t, s.rho, s.rho_dot, s.x_p, s.p_p, frame.action(y[0], y[1], t), q]));
    }
    Ok(out)
}

/// `|ψ₀(x, t)|²` on a fixed grid at several times across `τ′`.
pub fn density_csv(frame: &ActionAngleFrame) -> Result<String, KitError> {
    let tp = frame.tau_prime()?;
    let t0 = frame.t0();
    let times: Vec<f64> = DENSITY_PHASES.iter().map(|f| t0 + f * tp).collect();
    let slices = times
        .iter()
        .map(|&t| WaveSlice::new(frame, 0, t))
        .collect::<Result<Vec<_>, _>>()?;
    // one grid wide enough for every slice
    let grids: Vec<WaveGrid> = times.iter().map(|&t| WaveGrid::for_level(frame, 0, t, 2)).collect();
    let lo = grids.iter().map(|g| g.start).fold(f64::INFINITY, f64::min);
    let hi = grids.iter().map(|g| g.x(1)).fold(f64::NEG_INFINITY, f64::max);

    let mut out = String::from("x [length]");
    for f in DENSITY_PHASES {
        let _ = write!(out, ",psi0_sq_at_{f}_tau_prime [1/length]");
    }
    out.push('\n');
    for k in 0..DENSITY_POINTS {
        let x = lo + (hi - lo) * k as f64 / (DENSITY_POINTS - 1) as f64;
        let mut vals = vec![x];
        vals.extend(slices.iter().map(|s| s.eval(x).norm_sqr()));
        out.push_str(&row(&vals));
    }
    Ok(out)
}

/// Write [`TRAJECTORY_FILE`] and [`DENSITY_FILE`] into `dir`.
pub fn emit_plot_data(
    frame: &ActionAngleFrame,
    samples: usize,
    opts: &OdeOptions,
    dir: &Path,
) -> Result<Vec<PathBuf>, KitError> {
    std::fs::create_dir_all(dir).map_err(|e| KitError::io(dir, e))?;
    let files = [
        (dir.join(TRAJECTORY_FILE), trajectory_csv(frame, samples.max(1), opts)?),
        (dir.join(DENSITY_FILE), density_csv(frame)?),
    ];
    let mut written = Vec::new();
    for (path, text) in files {
        std::fs::write(&path, text).map_err(|e| KitError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
