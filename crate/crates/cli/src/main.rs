//! `scramble`: seeded command-line runs of the scrambling experiments.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 when a request
//! exceeds a simulator limit, 1 on anything else.

mod commands;
mod report;

use clap::{Parser, Subcommand};

use commands::{
    cmd_decoder, cmd_hypercube, cmd_mutual_info, cmd_page_curve, cmd_rmt, CliError, DecoderArgs, HypercubeArgs,
    MutualInfoArgs, PageCurveArgs, RmtArgs,
};

#[derive(Parser, Debug)]
#[command(name = "scramble", version, about = "Deterministic fast scrambling with Clifford circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Deficit time series and final Page curve of a circuit family.
    PageCurve(PageCurveArgs),
    /// Hypercube graph state: circuit/graph cross-check and deficit fractions.
    Hypercube(HypercubeArgs),
    /// Hayden-Preskill mutual information I(A:RB) against |R|.
    MutualInfo(MutualInfoArgs),
    /// Noisy teleportation decoder on the dense engine.
    Decoder(DecoderArgs),
    /// Random-stabilizer deficit distribution against Monte Carlo.
    Rmt(RmtArgs),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let (report, common) = match &cli.command {
        Command::PageCurve(a) => (cmd_page_curve(a)?, &a.common),
        Command::Hypercube(a) => (cmd_hypercube(a)?, &a.common),
        Command::MutualInfo(a) => (cmd_mutual_info(a)?, &a.common),
        Command::Decoder(a) => (cmd_decoder(a)?, &a.common),
        Command::Rmt(a) => (cmd_rmt(a)?, &a.common),
    };
    common.emit(&report)
}

fn main() {
    // Parse errors exit with code 2.
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("scramble: {e}");
        std::process::exit(e.exit_code());
    }
}
