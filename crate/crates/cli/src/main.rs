use clap::{Parser, Subcommand};
use planar_mqc_cli::commands;

/// Exact classical simulator for adaptive single-qubit measurements on the
/// planar code state.
#[derive(Parser)]
#[command(name = "planar-mqc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a measurement sequence from a config file and write the trace.
    Simulate {
        /// Path to the run config (JSON, schema 1).
        #[arg(long)]
        config: String,
        /// Override the trace output path (default: config's output_path,
        /// else stdout).
        #[arg(long)]
        output: Option<String>,
    },
    /// Overlap magnitude between the code state on the listed edges and the
    /// given product state.
    Overlap {
        /// Path to a state file (JSON, schema 1).
        #[arg(long)]
        input: String,
    },
    /// Partial-measurement probability weight of the given product state.
    Prob {
        /// Path to a state file (JSON, schema 1).
        #[arg(long)]
        input: String,
    },
    /// Randomized comparisons against the brute-force oracle (small L).
    OracleCheck {
        #[arg(long, short = 'L', default_value_t = 2)]
        lattice_size: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Timing runs at desk scale.
    Bench {
        /// `full` (whole adaptive simulation) or `partial` (one half-lattice
        /// overlap).
        #[arg(long)]
        mode: String,
        #[arg(long, short = 'L')]
        lattice_size: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, output } => {
            commands::cmd_simulate(&config, output.as_deref())
        }
        Command::Overlap { input } => commands::cmd_overlap(&input),
        Command::Prob { input } => commands::cmd_prob(&input),
        Command::OracleCheck { lattice_size, trials, seed } => {
            commands::cmd_oracle_check(lattice_size, trials, seed)
        }
        Command::Bench { mode, lattice_size, seed } => {
            commands::cmd_bench(&mode, lattice_size, seed)
        }
    };
    match result {
        Ok(report) => println!("{report}"),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.code);
        }
    }
}
