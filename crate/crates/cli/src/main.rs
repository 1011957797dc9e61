//! `fuzzymc` — fuzzy decomposition of finite reversible Markov chains.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fuzzymc_cli::commands::{
    cmd_bound, cmd_constants, cmd_decompose, cmd_glued, cmd_mixing, cmd_validate, BoundArgs,
    ConstantsArgs, DecomposeArgs, GluedArgs, MixingArgs, ValidateArgs,
};

#[derive(Parser)]
#[command(
    name = "fuzzymc",
    about = "Fuzzy decomposition of finite reversible Markov chains: projection and \
             restriction chains, coupling quality, functional-inequality constants, and \
             machine-checked lower bounds",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate chain, partition, and coupling files
    Validate(ValidateCmd),
    /// Build the projection and restriction chains from a fuzzy partition
    Decompose(DecomposeCmd),
    /// Compute the Poincaré constant exactly and estimate MLSI/LSI constants
    Constants(ConstantsCmd),
    /// Verify decomposition identities and the lower bounds on an instance
    Bound(BoundCmd),
    /// Generate a glued double graph with its canonical partition/coupling
    Glued(GluedCmd),
    /// Worst-case total-variation mixing curve on a time grid (CSV)
    Mixing(MixingCmd),
}

#[derive(Args)]
struct ValidateCmd {
    /// Chain JSON file
    #[arg(long)]
    chain: PathBuf,
    /// Partition JSON file
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Couplings JSON file (requires --partition)
    #[arg(long)]
    couplings: Option<PathBuf>,
    /// Override every validation tolerance with one value
    #[arg(long)]
    tol: Option<f64>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeCmd {
    /// Chain JSON file
    #[arg(long)]
    chain: PathBuf,
    /// Partition JSON file
    #[arg(long)]
    partition: PathBuf,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsCmd {
    /// Chain JSON file
    #[arg(long)]
    chain: PathBuf,
    /// Seed for the multi-start optimizer
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optimizer restarts
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Worker threads for restarts (never changes results)
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundCmd {
    /// Chain JSON file
    #[arg(long)]
    chain: PathBuf,
    /// Partition JSON file
    #[arg(long)]
    partition: PathBuf,
    /// Couplings JSON file
    #[arg(long)]
    couplings: Option<PathBuf>,
    /// Synthesize product couplings for every pair that needs one
    #[arg(long)]
    product_couplings: bool,
    /// Seed for randomized checks and the optimizer
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optimizer restarts
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Trials per randomized identity/inequality check
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Worker threads for independent checks (never changes results)
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GluedCmd {
    /// Base graph JSON file with vertices, edges, and the glued subset H
    #[arg(long)]
    graph: PathBuf,
    /// Output directory for chain/partition/couplings/quantities files
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MixingCmd {
    /// Chain JSON file
    #[arg(long)]
    chain: PathBuf,
    /// Total-variation threshold in (0, 1)
    #[arg(long)]
    eps: f64,
    /// Last grid time
    #[arg(long)]
    t_max: f64,
    /// Grid spacing
    #[arg(long)]
    step: f64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(cmd) => cmd_validate(&ValidateArgs {
            chain: cmd.chain,
            partition: cmd.partition,
            couplings: cmd.couplings,
            tol: cmd.tol,
            out: cmd.out,
        }),
        Command::Decompose(cmd) => cmd_decompose(&DecomposeArgs {
            chain: cmd.chain,
            partition: cmd.partition,
            out: cmd.out,
        }),
        Command::Constants(cmd) => cmd_constants(&ConstantsArgs {
            chain: cmd.chain,
            seed: cmd.seed,
            restarts: cmd.restarts,
            threads: cmd.threads,
            out: cmd.out,
        }),
        Command::Bound(cmd) => cmd_bound(&BoundArgs {
            chain: cmd.chain,
            partition: cmd.partition,
            couplings: cmd.couplings,
            product_couplings: cmd.product_couplings,
            seed: cmd.seed,
            restarts: cmd.restarts,
            trials: cmd.trials,
            threads: cmd.threads,
            out: cmd.out,
        }),
        Command::Glued(cmd) => cmd_glued(&GluedArgs {
            graph: cmd.graph,
            out: cmd.out,
        }),
        Command::Mixing(cmd) => cmd_mixing(&MixingArgs {
            chain: cmd.chain,
            eps: cmd.eps,
            t_max: cmd.t_max,
            step: cmd.step,
            out: cmd.out,
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
