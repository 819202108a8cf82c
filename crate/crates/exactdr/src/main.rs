use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use exactdr::commands::{self, Failure, Outcome, RunOptions, EXIT_INPUT};
use exactdr::problem::ProblemSpec;
use exactdr::selftest::SelftestOptions;
use exactdr::serial::to_text;

/// Exact anti-differentiation of piecewise-polynomial forms and symplectic
/// coordinate appending.
///
/// Exit codes: 0 success, 1 failed verification, 2 negative certificate
/// (the form is not exact), 64 input error.
#[derive(Parser, Debug)]
#[command(name = "exactdr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Problem specification (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    spec: Option<PathBuf>,
    /// Write the computed data (forms, maps, cochains) here.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "INT", default_value_t = 1)]
    seed: u64,
    /// Worker threads for per-simplex work.
    #[arg(long, global = true, value_name = "INT", default_value_t = 1)]
    parallel: usize,
    #[arg(long, global = true, value_enum, default_value_t = Report::Text)]
    report: Report,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Report {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Primitive of a closed form, verified exactly.
    Primitive,
    /// Decide exactness through the Čech class of the form.
    CheckExact,
    /// Append coordinate pairs so the standard symplectic form pulls back to a target.
    Embed,
    /// Periods of a 2-form over coordinate 2-tori.
    Periods,
    /// Randomized identity suites for the double complex.
    Selftest {
        /// Nonzero instances per identity.
        #[arg(long, default_value_t = 30)]
        count: usize,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Area-preserving map of D_R into D_r fixing the origin (floating point).
    Twist {
        /// Radius R of the source disc.
        #[arg(long = "radius")]
        big_r: f64,
        /// Radius r of the target disc.
        #[arg(long = "target")]
        r: f64,
        /// Power N; the smallest admissible one by default.
        #[arg(long)]
        power: Option<u32>,
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Primitive => "primitive",
            Command::CheckExact => "check-exact",
            Command::Embed => "embed",
            Command::Periods => "periods",
            Command::Selftest { .. } => "selftest",
            Command::Twist { .. } => "twist",
        }
    }
}

fn execute(cli: &Cli) -> Result<(Outcome, Option<ProblemSpec>), Failure> {
    let c = &cli.common;
    let opts = RunOptions { seed: c.seed, parallel: c.parallel > 1 };
    match &cli.command {
        Command::Selftest { count, inject_fault } => {
            let o = commands::selftest(&SelftestOptions { seed: c.seed, count: *count, inject_fault: *inject_fault })?;
            Ok((o, None))
        }
        Command::Twist { big_r, r, power, grid } => Ok((commands::twist(*power, *big_r, *r, *grid)?, None)),
        cmd => {
            let path = c.spec.as_ref().ok_or_else(|| Failure::input(format!("{} needs --spec PATH", cmd.name())))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
            let (spec, problem) = commands::load(&text, cmd.name())?;
            let o = commands::run_task(&spec, &problem, &opts)?;
            Ok((o, Some(spec)))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let name = cli.command.name();
    let start = Instant::now();
    let run = || execute(&cli);
    let result = if cli.common.parallel > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(cli.common.parallel).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(Failure::input(format!("cannot start {} threads: {e}", cli.common.parallel))),
        }
    } else {
        run()
    };
    let (outcome, spec) = match result {
        Ok(r) => r,
        Err(f) => {
            eprintln!("exactdr {name}: {}", f.message);
            return ExitCode::from(f.code as u8);
        }
    };
    if let (Some(path), Some(out)) = (&cli.common.out, &outcome.output) {
        if let Err(e) = std::fs::write(path, to_text(out)) {
            eprintln!("exactdr {name}: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    }
    match cli.common.report {
        Report::Json => {
            let v = commands::json_report(name, &outcome, spec.as_ref(), cli.common.out.is_none());
            print!("{}", to_text(&v));
        }
        Report::Text => print!("{}", commands::text_report(name, &outcome)),
    }
    eprintln!("timing: {name} {:.3} s", start.elapsed().as_secs_f64());
    ExitCode::from(outcome.code as u8)
}
