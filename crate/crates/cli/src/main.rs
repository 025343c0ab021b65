use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qtm_cli::commands::{
    self, DistanceArgs, LyapunovArgs, OracleCheckArgs, PatternArgs, StabilityArgs,
};
use qtm_cli::output::{emit, json_body};
use qtm_cli::AlphaSpec;
use qtm_core::{ScheduleMode, Subsystem, TapeState};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qtm",
    version,
    about = "Chaotically driven two-spin quantum Turing machine"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Head Bloch vector at every step (CSV: n,s1,s2,s3,purity).
    Pattern(PatternCli),
    /// Distance between perturbed and unperturbed runs (CSV: n,d2,overlap).
    Distance(DistanceCli),
    /// Finite-difference stability numbers on a periodic orbit (JSON).
    Stability(StabilityCli),
    /// Simulation against the closed forms at every step (JSON).
    OracleCheck(OracleCheckCli),
    /// Growth rate of ln D per two-step cycle (JSON).
    Lyapunov(LyapunovCli),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Fibonacci,
    Fixed,
    Arithmetic,
}

impl From<Mode> for ScheduleMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Fibonacci => ScheduleMode::Fibonacci,
            Mode::Fixed => ScheduleMode::Fixed,
            Mode::Arithmetic => ScheduleMode::Arithmetic,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Part {
    Head,
    Tape,
    Network,
}

impl From<Part> for Subsystem {
    fn from(p: Part) -> Self {
        match p {
            Part::Head => Subsystem::Head,
            Part::Tape => Subsystem::Tape,
            Part::Network => Subsystem::Network,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Tape {
    Minus1,
    One,
    Plus,
    Minus,
}

impl From<Tape> for TapeState {
    fn from(t: Tape) -> Self {
        match t {
            Tape::Minus1 => TapeState::KetMinus1,
            Tape::One => TapeState::Ket1,
            Tape::Plus => TapeState::KetPlus,
            Tape::Minus => TapeState::KetMinus,
        }
    }
}

fn name_of<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_owned())
        .unwrap_or_default()
}

#[derive(Debug, Args)]
struct PatternCli {
    /// First angle: radians, or p/q for exactly (p/q)·π.
    #[arg(long, default_value = "2/5", allow_hyphen_values = true)]
    alpha1: AlphaSpec,
    #[arg(long, value_enum, default_value_t = Mode::Fibonacci)]
    mode: Mode,
    /// Schedule seed alpha_0.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 10_000)]
    steps: u64,
    /// Initial head rotation angle.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi0: f64,
    #[arg(long, value_enum, default_value_t = Tape::Minus1)]
    tape: Tape,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TraceCli {
    #[arg(long, default_value = "2/5", allow_hyphen_values = true)]
    alpha1: AlphaSpec,
    #[arg(long, value_enum, default_value_t = Mode::Fibonacci)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = Part::Head)]
    subsystem: Part,
    #[arg(long, default_value_t = 1)]
    record_every: u64,
    /// Perturb only the initial state, not the schedule seed.
    #[arg(long)]
    state_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DistanceCli {
    #[command(flatten)]
    trace: TraceCli,
    #[arg(long, default_value_t = 0.001)]
    delta: f64,
    #[arg(long, default_value_t = 200)]
    steps: u64,
}

#[derive(Debug, Args)]
struct LyapunovCli {
    #[command(flatten)]
    trace: TraceCli,
    #[arg(long, default_value_t = 1e-8)]
    delta: f64,
    #[arg(long, default_value_t = 40)]
    steps: u64,
    /// First two-step cycle of the fit window.
    #[arg(long, default_value_t = 5.0)]
    from_cycle: f64,
    /// Last two-step cycle of the fit window.
    #[arg(long, default_value_t = 15.0)]
    to_cycle: f64,
}

#[derive(Debug, Args)]
struct StabilityCli {
    #[arg(long, default_value = "2/5", allow_hyphen_values = true)]
    alpha1: AlphaSpec,
    /// Half the orbit period.
    #[arg(long, default_value_t = 20)]
    m: u32,
    /// Comma-separated perturbation sizes.
    #[arg(long = "delta", value_delimiter = ',', default_values_t = [1e-4, 1e-5, 1e-6])]
    deltas: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleCheckCli {
    #[arg(long, default_value = "2/5", allow_hyphen_values = true)]
    alpha1: AlphaSpec,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 2000)]
    steps: u64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl DistanceCli {
    fn args(&self) -> DistanceArgs {
        self.trace.args(self.delta, self.steps)
    }
}

impl TraceCli {
    fn args(&self, delta: f64, steps: u64) -> DistanceArgs {
        DistanceArgs {
            alpha1: self.alpha1,
            mode: self.mode.into(),
            delta,
            steps,
            subsystem: self.subsystem.into(),
            record_every: self.record_every,
            state_only: self.state_only,
        }
    }

    fn rerun_flags(&self, delta: f64, steps: u64) -> String {
        format!(
            "--alpha1 {} --mode {} --delta {delta:?} --steps {steps} --subsystem {} --record-every {}{}",
            self.alpha1,
            name_of(&self.mode),
            name_of(&self.subsystem),
            self.record_every,
            if self.state_only { " --state-only" } else { "" }
        )
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.cmd {
        Command::Pattern(c) => {
            let args = PatternArgs {
                alpha1: c.alpha1,
                mode: c.mode.into(),
                delta: c.delta,
                steps: c.steps,
                phi0: c.phi0,
                tape: c.tape.into(),
            };
            let csv = commands::pattern_csv(&args)?;
            let rerun = format!(
                "qtm pattern --alpha1 {} --mode {} --delta {:?} --steps {} --phi0 {:?} --tape {}",
                c.alpha1,
                name_of(&c.mode),
                c.delta,
                c.steps,
                c.phi0,
                name_of(&c.tape)
            );
            emit(c.out.as_deref(), csv.as_bytes(), "pattern", &args, rerun)?;
            Ok(0)
        }
        Command::Distance(c) => {
            let args = c.args();
            let csv = commands::distance_csv(&args)?;
            let rerun = format!("qtm distance {}", c.trace.rerun_flags(c.delta, c.steps));
            emit(
                c.trace.out.as_deref(),
                csv.as_bytes(),
                "distance",
                &args,
                rerun,
            )?;
            Ok(0)
        }
        Command::Lyapunov(c) => {
            let args = LyapunovArgs {
                distance: c.trace.args(c.delta, c.steps),
                first_cycle: c.from_cycle,
                last_cycle: c.to_cycle,
            };
            let report = commands::lyapunov(&args)?;
            let rerun = format!(
                "qtm lyapunov {} --from-cycle {:?} --to-cycle {:?}",
                c.trace.rerun_flags(c.delta, c.steps),
                c.from_cycle,
                c.to_cycle
            );
            emit(
                c.trace.out.as_deref(),
                &json_body(&report)?,
                "lyapunov",
                &args,
                rerun,
            )?;
            Ok(0)
        }
        Command::Stability(c) => {
            let args = StabilityArgs {
                alpha1: c.alpha1,
                m: c.m,
                deltas: c.deltas.clone(),
            };
            let deltas: Vec<String> = c.deltas.iter().map(|d| format!("{d:?}")).collect();
            let rerun = format!(
                "qtm stability --alpha1 {} --m {} --delta {}",
                c.alpha1,
                c.m,
                deltas.join(",")
            );
            let (body, code) = match commands::stability(&args) {
                Ok(report) => (json_body(&report)?, 0),
                Err(err) => (json_body(&err)?, EXIT_USAGE),
            };
            emit(c.out.as_deref(), &body, "stability", &args, rerun)?;
            Ok(code)
        }
        Command::OracleCheck(c) => {
            let args = OracleCheckArgs {
                alpha1: c.alpha1,
                delta: c.delta,
                steps: c.steps,
                tolerance: c.tolerance,
            };
            let report = commands::oracle_check(&args)?;
            let rerun = format!(
                "qtm oracle-check --alpha1 {} --delta {:?} --steps {} --tolerance {:?}",
                c.alpha1, c.delta, c.steps, c.tolerance
            );
            emit(
                c.out.as_deref(),
                &json_body(&report)?,
                "oracle-check",
                &args,
                rerun,
            )?;
            Ok(if report.pass { 0 } else { EXIT_CHECK_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
