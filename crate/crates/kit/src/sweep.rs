//! One-parameter sweeps, run in parallel.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::KitError;
use crate::pipeline::{run_pipeline, Stage};
use crate::report::{csv_field, format_f64, RunReport, SCHEMA_VERSION};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HANNAY_KIT_THREADS";

/// `KEY=START:STOP:N`, `N` equally spaced values including both ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub key: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl std::str::FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected KEY=START:STOP:N, got {s:?}");
        let (key, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        let [a, b, n] = parts[..] else { return Err(bad()) };
        let spec = SweepSpec {
            key: key.trim().to_string(),
            start: a.trim().parse().map_err(|_| bad())?,
            stop: b.trim().parse().map_err(|_| bad())?,
            count: n.trim().parse().map_err(|_| bad())?,
        };
        if spec.key.is_empty() || spec.count == 0 || !spec.start.is_finite() || !spec.stop.is_finite() {
            return Err(bad());
        }
        Ok(spec)
    }
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.start + step * k as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: RunReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub schema_version: &'static str,
    pub sweep: SweepSpec,
    pub stage: Stage,
    pub points: Vec<SweepPoint>,
}

/// Parse [`THREADS_ENV`]; unset or empty means no cap.
pub fn threads_from_env() -> Result<Option<usize>, KitError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(KitError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Run `stage` for every sweep value. Results keep the order of the values
/// regardless of scheduling.
pub fn run_sweep(cfg: &RunConfig, stage: Stage, sweep: &SweepSpec, threads: Option<usize>) -> Result<SweepReport, KitError> {
    let configs = sweep
        .values()
        .into_iter()
        .map(|v| Ok((v, cfg.with_value(&sweep.key, v)?)))
        .collect::<Result<Vec<_>, KitError>>()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| KitError::Config(e.to_string()))?;
    let points = pool.install(|| {
        configs
            .par_iter()
            .map(|(v, c)| {
                Ok(SweepPoint {
                    value: *v,
                    report: run_pipeline(c, stage)?.report().clone(),
                })
            })
            .collect::<Result<Vec<_>, KitError>>()
    })?;
    Ok(SweepReport {
        schema_version: SCHEMA_VERSION,
        sweep: sweep.clone(),
        stage,
        points,
    })
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = format!(
        "{} [input],status,code,trace,tau_prime [time],q_h_closed_form [rad],q_h_definition [rad],q_h_loop_integral [rad],relation_residual [rad]\n",
        csv_field(&report.sweep.key)
    );
    let num = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    for p in &report.points {
        let r = &p.report;
        let status = if r.refusal.is_some() { "refused" } else { "ok" };
        let code = r.refusal.as_ref().map(|f| f.code.as_str()).unwrap_or("");
        let h = r.hannay.as_ref();
        let cells = [
            format_f64(p.value),
            status.to_string(),
            code.to_string(),
            num(r.monodromy.as_ref().map(|m| m.monodromy.trace)),
            num(r.frame.as_ref().map(|f| f.tau_prime)),
            num(h.map(|h| h.closed_form)),
            num(h.map(|h| h.definition)),
            num(h.map(|h| h.loop_integral)),
            num(r.phases.as_ref().map(|p| p.relation_residual)),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
