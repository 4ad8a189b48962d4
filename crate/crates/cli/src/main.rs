use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, ValueEnum};
use spinning_zeta_cli::config::{RunConfig, Subcommand};
use spinning_zeta_cli::{run, CliError, Status};

#[derive(Parser, Debug)]
#[command(name = "spinning-zeta", version, about = "Heat-kernel and zeta-function checks for a spinning point source")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand, Debug)]
enum Command {
    /// Metric, vierbein and H_I checks at random points, both sets.
    Geometry(Common),
    /// Run the closed-form versus oracle ledger.
    Verify(Common),
    /// Diagonal kernel per order over a (p1, p2, t) grid.
    Kernel(Common),
    /// Zeta-function density from the Mellin transform of the trace.
    Zeta(Common),
    /// Summarize or convert an existing ledger.
    Report(Common),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

#[derive(Args, Debug)]
struct Common {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value settings, applied after the file.
    #[arg(short = 'D', long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    tol_rel: Option<f64>,
    #[arg(long)]
    tol_abs: Option<f64>,
    /// Vierbein set, 1 or 2.
    #[arg(long)]
    set: Option<u8>,
    #[arg(long, value_enum)]
    mass_sign: Option<SignArg>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    order: Option<u8>,
    /// Grid: a value, a,b,c or start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p2: Option<String>,
    /// Ledger to read (report).
    #[arg(long)]
    input: Option<PathBuf>,
}

impl Common {
    /// Command-line pairs in application order: `-D` values, then flags.
    fn pairs(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut out = Vec::new();
        for p in &self.params {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::new(Status::Invalid, format!("expected KEY=VALUE, got {p:?}")))?;
            out.push((k.trim().to_string(), v.to_string()));
        }
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        push("output", path(&self.output));
        push("format", self.format.map(|f| format!("{f:?}").to_lowercase()));
        push("seed", self.seed.map(|v| v.to_string()));
        push("strict", self.strict.then(|| "true".to_string()));
        push("tol_rel", self.tol_rel.map(|v| v.to_string()));
        push("tol_abs", self.tol_abs.map(|v| v.to_string()));
        push("set", self.set.map(|v| v.to_string()));
        push("mass_sign", self.mass_sign.map(|m| format!("{m:?}").to_lowercase()));
        push("lambda", self.lambda.map(|v| v.to_string()));
        push("mass", self.mass.map(|v| v.to_string()));
        push("order", self.order.map(|v| v.to_string()));
        push("s", self.s.clone());
        push("t", self.t.clone());
        push("p1", self.p1.clone());
        push("p2", self.p2.clone());
        push("input", path(&self.input));
        Ok(out)
    }
}

fn execute(cli: Cli) -> Result<Status, CliError> {
    let (command, common) = match &cli.command {
        Command::Geometry(c) => (Subcommand::Geometry, c),
        Command::Verify(c) => (Subcommand::Verify, c),
        Command::Kernel(c) => (Subcommand::Kernel, c),
        Command::Zeta(c) => (Subcommand::Zeta, c),
        Command::Report(c) => (Subcommand::Report, c),
    };
    let cfg = RunConfig::layered(command, common.config.as_deref(), &common.pairs()?)?;
    let outcome = run(&cfg)?;
    for note in &outcome.notes {
        eprintln!("{}: {note}", command.name());
    }
    match &cfg.output {
        Some(path) => fs::write(path, &outcome.body)
            .map_err(|e| CliError::new(Status::Invalid, format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", outcome.body),
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match execute(cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            e.status
        }
    };
    ExitCode::from(status.code() as u8)
}
