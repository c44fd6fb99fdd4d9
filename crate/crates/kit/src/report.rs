//! Report structure and its JSON / CSV renderings.
//!
//! Floats are written with 17 significant digits so that reports are
//! byte-reproducible and round-trip exactly.

use std::io;

use hannay_core::floquet::Monodromy;
use hannay_core::quantum::Diagnostics;
use hannay_core::{HannayAngles, RefusalCode};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::config::PairChoice;
use crate::pipeline::Stage;

pub const SCHEMA_VERSION: &str = "1.0.0";

/// Reminder attached to every reported Hannay angle.
pub const PAIR_NOTE: &str = "Q_H is fixed by the chosen homogeneous pair (u, v); \
a different bounded pair can give a different value. The canonical pair is a deterministic convention.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Refused,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: &'static str,
    pub status: Status,
    pub stage: Stage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refusal: Option<Refusal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monodromy: Option<MonodromySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hannay: Option<HannaySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phases: Option<PhasesSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

impl RunReport {
    pub fn new(stage: Stage, name: Option<String>) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            status: Status::Ok,
            stage,
            name,
            refusal: None,
            spec: None,
            monodromy: None,
            frame: None,
            hannay: None,
            phases: None,
            gauge: None,
            diagnostics: None,
        }
    }

    pub fn refused(stage: Stage, name: Option<String>, code: RefusalCode, detail: String) -> Self {
        let mut r = RunReport::new(stage, name);
        r.status = Status::Refused;
        r.refusal = Some(Refusal::new(code, detail));
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refusal {
    pub code: RefusalCode,
    pub condition: &'static str,
    pub detail: String,
}

impl Refusal {
    pub fn new(code: RefusalCode, detail: String) -> Self {
        Refusal {
            code,
            condition: condition(code),
            detail,
        }
    }
}

/// The existence condition behind each refusal code.
pub fn condition(code: RefusalCode) -> &'static str {
    match code {
        RefusalCode::UnboundedHomogeneous => {
            "Hannay angle undefined: unbounded homogeneous solutions (monodromy is not elliptic or diagonalizable)"
        }
        RefusalCode::ResonantForcing => "no periodic particular solution: the forcing is resonant",
        RefusalCode::NoCommonPeriod => "rho and x_p have no common period that is a small multiple of tau",
        RefusalCode::ConfigInvalid => "configuration rejected",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecSummary {
    pub tau: f64,
    pub hbar: f64,
    pub t0: f64,
    pub homogeneous_period: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forcing_period: Option<f64>,
    pub linear_terms: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonodromySummary {
    #[serde(flatten)]
    pub monodromy: Monodromy,
    pub bounded: bool,
    /// Floquet multipliers as `[re, im]`.
    pub multipliers: [[f64; 2]; 2],
}

impl MonodromySummary {
    pub fn new(m: Monodromy) -> Self {
        let (a, b) = m.eigenvalues();
        MonodromySummary {
            monodromy: m,
            bounded: m.is_bounded(),
            multipliers: [[a.re, a.im], [b.re, b.im]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameSummary {
    pub pair: PairChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplier_angle: Option<f64>,
    pub omega: f64,
    pub omega_relative_deviation: f64,
    pub tau_prime: f64,
    pub tau_prime_over_tau: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub ermakov_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HannaySummary {
    pub closed_form: f64,
    pub definition: f64,
    pub loop_integral: f64,
    pub spread: f64,
    pub note: &'static str,
}

impl HannaySummary {
    pub fn new(h: HannayAngles) -> Self {
        HannaySummary {
            closed_form: h.closed_form,
            definition: h.definition,
            loop_integral: h.loop_integral,
            spread: h.spread(),
            note: PAIR_NOTE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasesSummary {
    pub chi: Vec<f64>,
    pub chi_mod_2pi: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_mod_2pi: Vec<f64>,
    /// `γ_{m+1} − γ_m`
    pub gamma_slope: f64,
    pub dynamical_winding: f64,
    pub relation_residual: f64,
}

/// Change of the definition-route angle under two test gauges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeSummary {
    pub periodic_amplitude: f64,
    /// Should vanish.
    pub periodic_shift: f64,
    pub linear_drift: f64,
    /// Should equal `linear_drift`.
    pub linear_shift: f64,
}

/// 17 significant digits in scientific notation; non-finite values as `null`.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

struct Fixed17<'a>(PrettyFormatter<'a>);

impl Formatter for Fixed17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_f64(v).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with fixed float formatting and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report serializes");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::Number(n) => out.push((prefix.into(), n.as_f64().map_or_else(|| n.to_string(), format_f64))),
        Value::String(s) => out.push((prefix.into(), csv_field(s))),
        Value::Bool(b) => out.push((prefix.into(), b.to_string())),
        Value::Null => out.push((prefix.into(), String::new())),
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Two-column `key,value` CSV with dotted keys.
pub fn to_summary_csv<T: Serialize>(value: &T) -> String {
    let tree = serde_json::to_value(value).expect("report serializes");
    let mut rows = Vec::new();
    flatten("", &tree, &mut rows);
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        s.push_str(&k);
        s.push(',');
        s.push_str(&v);
        s.push('\n');
    }
    s
}
