//! Config → Floquet analysis → frame → Hannay angles → phases.

use std::f64::consts::PI;

use hannay_core::action_angle::ActionAngleFrame;
use hannay_core::floquet::{
    canonical_pair, classify, explicit_pair, forcing_period, fundamental, homogeneous_period, periodic_particular,
};
use hannay_core::hannay::{gauge_shift_check, hannay_angles, GaugeOffset};
use hannay_core::quantum::{gamma_slope, PhaseReport};
use hannay_core::{dynamics::ermakov_residual, dynamics::PairKind, Error, OscillatorSpec, PeriodicFunction};
use serde::{Deserialize, Serialize};

use crate::config::{PairChoice, RunConfig};
use crate::error::KitError;
use crate::report::{
    FrameSummary, GaugeSummary, HannaySummary, MonodromySummary, PhasesSummary, Refusal, RunReport, SpecSummary, Status,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Parse and check the configuration only.
    Validate,
    /// Monodromy and stability class.
    Classify,
    Hannay,
    Phases,
    /// Phases plus gauge diagnostics.
    Full,
}

/// Amplitude of the periodic test gauge, `Q_c = A·sin(2πt/τ′)`.
pub const GAUGE_AMPLITUDE: f64 = 0.3;
/// Total drift of the linear test gauge over `τ′`.
pub const GAUGE_DRIFT: f64 = 0.1;

pub enum Outcome {
    Completed { report: RunReport, frame: Option<Box<ActionAngleFrame>> },
    Refused(RunReport),
}

impl Outcome {
    pub fn report(&self) -> &RunReport {
        match self {
            Outcome::Completed { report, .. } | Outcome::Refused(report) => report,
        }
    }

    pub fn frame(&self) -> Option<&ActionAngleFrame> {
        match self {
            Outcome::Completed { frame, .. } => frame.as_deref(),
            Outcome::Refused(_) => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Completed { .. } => 0,
            Outcome::Refused(_) => 2,
        }
    }
}

/// Run every stage up to `stage`. Failed existence conditions come back as
/// [`Outcome::Refused`]; only internal failures are errors.
pub fn run_pipeline(cfg: &RunConfig, stage: Stage) -> Result<Outcome, KitError> {
    let mut report = RunReport::new(stage, cfg.name.clone());
    match stages(cfg, stage, &mut report) {
        Ok(frame) => Ok(Outcome::Completed {
            report,
            frame: frame.map(Box::new),
        }),
        Err(e) => match e.refusal_code() {
            Some(code) => {
                report.status = Status::Refused;
                report.refusal = Some(Refusal::new(code, e.to_string()));
                Ok(Outcome::Refused(report))
            }
            None => Err(e),
        },
    }
}

fn stages(cfg: &RunConfig, stage: Stage, report: &mut RunReport) -> Result<Option<ActionAngleFrame>, KitError> {
    let spec = cfg.spec.build()?;
    spec.validate()?;
    let opts = cfg.solver.ode_options()?;
    let report_opts = cfg.report.options()?;
    let t0 = cfg.solver.t0;
    if !t0.is_finite() {
        return Err(KitError::Config("solver.t0 must be finite".into()));
    }
    let initial = match (cfg.pair.kind, cfg.pair.initial) {
        (PairChoice::Explicit, None) => {
            return Err(KitError::Config("pair.kind = \"explicit\" needs pair.initial".into()));
        }
        (PairChoice::Explicit, Some(i)) => Some(i),
        (PairChoice::Canonical, _) => None,
    };
    report.spec = Some(spec_summary(&spec, t0));
    if stage == Stage::Validate {
        return Ok(None);
    }

    let fund = fundamental(&spec, t0, &opts)?;
    let mono = classify(&fund, spec.tau);
    report.monodromy = Some(MonodromySummary::new(mono));
    if stage == Stage::Classify {
        return Ok(None);
    }
    if !mono.is_bounded() {
        return Err(Error::UnboundedHomogeneous { trace: mono.trace }.into());
    }

    let pair = match initial {
        None => canonical_pair(&spec, t0, &opts)?,
        Some(i) => explicit_pair(&spec, t0, (i.u0, i.udot0), (i.v0, i.vdot0), &opts)?,
    };
    let xp = periodic_particular(&spec, t0, &opts)?;
    let frame = ActionAngleFrame::new(spec.clone(), pair, xp).certify(cfg.solver.period_cap)?;
    report.frame = Some(frame_summary(&frame, cfg.pair.kind)?);

    if stage == Stage::Hannay {
        report.hannay = Some(HannaySummary::new(hannay_angles(&frame)?));
        return Ok(Some(frame));
    }

    let phases = PhaseReport::compute(&frame, &report_opts)?;
    report.hannay = Some(HannaySummary::new(phases.hannay));
    report.phases = Some(PhasesSummary {
        chi_mod_2pi: phases.chi.iter().map(|v| v.rem_euclid(2.0 * PI)).collect(),
        gamma_mod_2pi: phases.gamma.iter().map(|v| v.rem_euclid(2.0 * PI)).collect(),
        chi: phases.chi.clone(),
        gamma: phases.gamma.clone(),
        gamma_slope: gamma_slope(&frame)?,
        dynamical_winding: phases.dynamical_winding,
        relation_residual: phases.relation_residual,
    });
    report.diagnostics = Some(phases.diagnostics.clone());

    if stage == Stage::Full {
        report.gauge = Some(gauge_summary(&frame)?);
    }
    Ok(Some(frame))
}

fn spec_summary(spec: &OscillatorSpec, t0: f64) -> SpecSummary {
    SpecSummary {
        tau: spec.tau,
        hbar: spec.hbar,
        t0,
        homogeneous_period: homogeneous_period(spec),
        forcing_period: (!spec.force.is_zero()).then(|| forcing_period(spec)),
        linear_terms: spec.has_linear_terms(),
    }
}

fn frame_summary(frame: &ActionAngleFrame, choice: PairChoice) -> Result<FrameSummary, KitError> {
    let tp = frame.tau_prime()?;
    let pair = frame.pair();
    let (lo, hi) = (0..256)
        .map(|k| pair.rho(frame.t0() + tp * k as f64 / 256.0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    Ok(FrameSummary {
        pair: choice,
        multiplier_angle: match pair.kind() {
            PairKind::Canonical { multiplier_angle } => Some(multiplier_angle),
            PairKind::Explicit => None,
        },
        omega: pair.omega(),
        omega_relative_deviation: pair.omega_relative_deviation(),
        tau_prime: tp,
        tau_prime_over_tau: tp / frame.spec().tau,
        rho_min: lo,
        rho_max: hi,
        ermakov_residual: ermakov_residual(frame.spec(), pair),
    })
}

fn gauge_summary(frame: &ActionAngleFrame) -> Result<GaugeSummary, KitError> {
    let tp = frame.tau_prime()?;
    let periodic = GaugeOffset::periodic(PeriodicFunction::zero(tp).with_harmonic(1, 0.0, GAUGE_AMPLITUDE));
    let linear = GaugeOffset::linear(GAUGE_DRIFT / tp, tp);
    let (pg, p0) = gauge_shift_check(frame, &periodic)?;
    let (lg, l0) = gauge_shift_check(frame, &linear)?;
    Ok(GaugeSummary {
        periodic_amplitude: GAUGE_AMPLITUDE,
        periodic_shift: pg - p0,
        linear_drift: GAUGE_DRIFT,
        linear_shift: lg - l0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use hannay_core::RefusalCode;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text).unwrap()
    }

    const SHO: &str = "[spec]\ntau = \"2pi\"\nmass = { constant = 1.0 }\nw_sq = { constant = 1.0 }\n[report]\nm_max = 3\ngrid_points = 512\n";

    #[test]
    fn sho_full() {
        let out = run_pipeline(&cfg(SHO), Stage::Full).unwrap();
        assert_eq!(out.exit_code(), 0);
        let r = out.report();
        let h = r.hannay.as_ref().unwrap();
        assert!(h.closed_form.abs() < 1e-12 && h.spread < 1e-9);
        let p = r.phases.as_ref().unwrap();
        assert!(p.gamma.iter().all(|g| g.abs() < 1e-10));
        assert!(p.relation_residual < 1e-8);
        let g = r.gauge.as_ref().unwrap();
        assert!(g.periodic_shift.abs() < 1e-8);
        assert!((g.linear_shift - GAUGE_DRIFT).abs() < 1e-10);
        assert!(out.frame().is_some());
    }

    #[test]
    fn stages_stop_early() {
        let c = cfg(SHO);
        let v = run_pipeline(&c, Stage::Validate).unwrap();
        assert!(v.report().monodromy.is_none() && v.report().spec.is_some());
        let k = run_pipeline(&c, Stage::Classify).unwrap();
        assert!(k.report().monodromy.is_some() && k.report().frame.is_none());
        let h = run_pipeline(&c, Stage::Hannay).unwrap();
        assert!(h.report().hannay.is_some() && h.report().phases.is_none());
    }

    #[test]
    fn refusals() {
        let hyper = "[spec]\ntau = \"pi\"\nmass = { constant = 1.0 }\nw_sq = { constant = 1.0, harmonics = [{ order = 1, cos = 0.2 }] }\n";
        let out = run_pipeline(&cfg(hyper), Stage::Hannay).unwrap();
        assert_eq!(out.exit_code(), 2);
        assert_eq!(out.report().refusal.as_ref().unwrap().code, RefusalCode::UnboundedHomogeneous);
        // classification alone is not a refusal
        assert_eq!(run_pipeline(&cfg(hyper), Stage::Classify).unwrap().exit_code(), 0);

        let resonant = "[spec]\ntau = \"2pi\"\nmass = { constant = 1.0 }\nw_sq = { constant = 1.0 }\nforce = { harmonics = [{ order = 1, cos = 0.3 }] }\n";
        let out = run_pipeline(&cfg(resonant), Stage::Full).unwrap();
        assert_eq!(out.report().refusal.as_ref().unwrap().code, RefusalCode::ResonantForcing);

        let explicit_missing = format!("{SHO}[pair]\nkind = \"explicit\"\n");
        let out = run_pipeline(&cfg(&explicit_missing), Stage::Validate).unwrap();
        assert_eq!(out.report().refusal.as_ref().unwrap().code, RefusalCode::ConfigInvalid);

        let negative_mass = "[spec]\ntau = 1.0\nmass = { constant = -1.0 }\nw_sq = { constant = 1.0 }\n";
        let out = run_pipeline(&cfg(negative_mass), Stage::Validate).unwrap();
        assert_eq!(out.report().refusal.as_ref().unwrap().code, RefusalCode::ConfigInvalid);
    }
}
