use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use freefront::io::{
    cmd_convergence, cmd_oracle, cmd_run, cmd_sweep, cmd_validate, CliError, Exit,
};
use freefront::validation::Refinement;

#[derive(Parser)]
#[command(
    name = "freefront",
    version,
    about = "Free boundary solver with nonlocal and local diffusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Refine {
    Time,
    SpaceTime,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write fronts.csv, fields.csv, header.json and report.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Accept kernels without a Lipschitz density, such as the uniform kernel.
        #[arg(long)]
        allow_nonlipschitz_kernel: bool,
    },
    /// Check the kernel and reaction hypotheses and print the a-priori bounds.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        allow_nonlipschitz_kernel: bool,
    },
    /// Run one simulation per parameter value, in parallel.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// mu, rho, h0, init.u0_amp or init.v0_amp
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        #[arg(long)]
        allow_nonlipschitz_kernel: bool,
    },
    /// Observed orders under successive step halving.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, value_enum, default_value = "time")]
        refine: Refine,
        /// Also write convergence.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the fixed-window reference solver.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2001)]
        nodes: usize,
    },
}

fn dispatch(command: Command) -> Result<Exit, CliError> {
    match command {
        Command::Run {
            config,
            out,
            allow_nonlipschitz_kernel,
        } => cmd_run(&config, &out, allow_nonlipschitz_kernel),
        Command::Validate {
            config,
            allow_nonlipschitz_kernel,
        } => cmd_validate(&config, allow_nonlipschitz_kernel),
        Command::Sweep {
            config,
            out,
            param,
            values,
            allow_nonlipschitz_kernel,
        } => cmd_sweep(&config, &param, &values, &out, allow_nonlipschitz_kernel),
        Command::Convergence {
            config,
            levels,
            refine,
            out,
        } => {
            let refinement = match refine {
                Refine::Time => Refinement::Time,
                Refine::SpaceTime => Refinement::SpaceTime,
            };
            cmd_convergence(&config, levels, refinement, out.as_deref())
        }
        Command::Oracle { config, out, nodes } => cmd_oracle(&config, &out, nodes),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                Exit::Usage.code()
            } else {
                0
            });
        }
    };
    match dispatch(cli.command) {
        Ok(exit) => ExitCode::from(exit.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit().code())
        }
    }
}
