use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hannay_kit::config::{Format, PairChoice, RunConfig};
use hannay_kit::plot::emit_plot_data;
use hannay_kit::report::{to_json, to_summary_csv};
use hannay_kit::sweep::{run_sweep, sweep_csv, threads_from_env, SweepSpec};
use hannay_kit::{run_pipeline, KitError, Outcome, RunReport, Stage};

/// Hannay angle and geometric phases of periodic harmonic oscillators.
///
/// Exit status: 0 success, 2 refusal (an existence condition failed or the
/// configuration was rejected), 1 internal error.
#[derive(Parser)]
#[command(name = "hannay-kit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the configuration and check its invariants.
    Validate(Common),
    /// Monodromy matrix and stability class.
    Classify(Common),
    /// Hannay angle by all three routes.
    Hannay(Common),
    /// Total and geometric phases, the Hannay relation and diagnostics.
    Phases(Common),
    /// Phases plus gauge checks and plot data.
    Full(Common),
    /// Run the phases stage over a grid of one parameter.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Directory for report and plot files; stdout if absent.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "json|csv")]
    format: Option<Format>,
    #[arg(long, value_name = "REAL")]
    tolerance: Option<f64>,
    #[arg(long, value_name = "REAL", allow_hyphen_values = true)]
    t0: Option<f64>,
    #[arg(long, value_name = "canonical|explicit")]
    pair: Option<PairChoice>,
    #[arg(long, value_name = "INT")]
    m_max: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Dotted config key and range, e.g. spec.w_sq.constant=1.2:2.0:9
    #[arg(long, value_name = "KEY=START:STOP:N", allow_hyphen_values = true)]
    sweep: SweepSpec,
}

impl Common {
    fn load(&self) -> Result<RunConfig, KitError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(v) = self.tolerance {
            cfg.solver.tolerance = v;
        }
        if let Some(v) = self.t0 {
            cfg.solver.t0 = v;
        }
        if let Some(v) = self.pair {
            cfg.pair.kind = v;
        }
        if let Some(v) = self.m_max {
            cfg.report.m_max = v;
        }
        if let Some(v) = self.format {
            cfg.output.format = v;
        }
        if let Some(v) = &self.out {
            cfg.output.dir = Some(v.clone());
        }
        Ok(cfg)
    }
}

fn render<T: serde::Serialize>(value: &T, format: Format) -> String {
    match format {
        Format::Json => to_json(value),
        Format::Csv => to_summary_csv(value),
    }
}

fn deliver(text: &str, dir: Option<&Path>, stem: &str, format: Format) -> Result<(), KitError> {
    match dir {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| KitError::io(dir, e))?;
            let ext = match format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            let path = dir.join(format!("{stem}.{ext}"));
            std::fs::write(&path, text).map_err(|e| KitError::io(&path, e))
        }
    }
}

fn run_stage(common: &Common, stage: Stage) -> Result<i32, KitError> {
    let cfg = match common.load() {
        Ok(cfg) => cfg,
        Err(e) => {
            let Some(code) = e.refusal_code() else { return Err(e) };
            let format = common.format.unwrap_or_default();
            let report = RunReport::refused(stage, None, code, e.to_string());
            deliver(&render(&report, format), common.out.as_deref(), "report", format)?;
            return Ok(2);
        }
    };
    let outcome = run_pipeline(&cfg, stage)?;
    let dir = cfg.output.dir.as_deref();
    let format = cfg.output.format;
    deliver(&render(outcome.report(), format), dir, "report", format)?;
    if let (Outcome::Completed { frame: Some(frame), .. }, Some(dir)) = (&outcome, dir) {
        if cfg.output.plot || stage == Stage::Full {
            emit_plot_data(frame, cfg.output.plot_samples, &cfg.solver.ode_options()?, dir)?;
        }
    }
    Ok(outcome.exit_code())
}

fn run_sweep_command(args: &SweepArgs) -> Result<i32, KitError> {
    let cfg = args.common.load()?;
    let report = run_sweep(&cfg, Stage::Phases, &args.sweep, threads_from_env()?)?;
    let text = match cfg.output.format {
        Format::Json => to_json(&report),
        Format::Csv => sweep_csv(&report),
    };
    deliver(&text, cfg.output.dir.as_deref(), "sweep", cfg.output.format)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(c) => run_stage(c, Stage::Validate),
        Command::Classify(c) => run_stage(c, Stage::Classify),
        Command::Hannay(c) => run_stage(c, Stage::Hannay),
        Command::Phases(c) => run_stage(c, Stage::Phases),
        Command::Full(c) => run_stage(c, Stage::Full),
        Command::Sweep(s) => run_sweep_command(s),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("hannay-kit: {e}");
            if let Some(code) = e.refusal_code() {
                eprintln!("refusal: {code}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
