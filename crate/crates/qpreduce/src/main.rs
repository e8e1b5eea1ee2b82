use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qpreduce::pipeline::{run, Command, Method, Request};

#[derive(Parser)]
#[command(name = "qpreduce", version, about = "Order reduction of forced nonlinear quasi-periodic systems")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Spectrum, time-invariant exponents and resonance classification.
    Analyze(Args),
    /// Quasi-periodic transformation and its sampled inverses.
    Lp(Args),
    /// Reduced model by linear projection or invariant manifold.
    Reduce(Args),
    /// Integrates the full system.
    Simulate(Args),
    /// Full vs linear vs manifold responses, with spectra.
    Compare(Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Linear,
    Manifold,
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "manifold")]
    method: MethodArg,
    /// Comma-separated master mode indices.
    #[arg(long, value_delimiter = ',')]
    masters: Option<Vec<usize>>,
    /// Tolerance overrides, e.g. `manifold=1e-3,normal_form=1e-9`.
    #[arg(long, value_delimiter = ',')]
    seed_tolerances: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QPREDUCE_LOG", "warn")).init();
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Cmd::Analyze(a) => (Command::Analyze, a),
        Cmd::Lp(a) => (Command::Lp, a),
        Cmd::Reduce(a) => (Command::Reduce, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Compare(a) => (Command::Compare, a),
    };
    let req = Request {
        config: args.config,
        out: args.out,
        method: match args.method {
            MethodArg::Linear => Method::Linear,
            MethodArg::Manifold => Method::Manifold,
        },
        masters: args.masters,
        tolerances: args.seed_tolerances,
    };
    match run(cmd, &req) {
        Ok(_) => {
            println!("{} complete; outputs in {}", cmd.name(), req.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
