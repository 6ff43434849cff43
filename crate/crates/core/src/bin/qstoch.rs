use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qstoch_core::circuit::{GateKind, Mode};
use qstoch_core::cli::{
    cmd_asym, cmd_simulate, cmd_sweep, cmd_tomo, CsvTable, ExperimentConfig, ProbabilityGrid,
    DEFAULT_BOOTSTRAP, DEFAULT_SEED, DEFAULT_SHOTS, DEFAULT_STEPS, DEFAULT_TARGET_FIDELITY,
};

/// Classical and quantum memory of the two-switch process.
#[derive(Parser)]
#[command(name = "qstoch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complexities across a grid of symmetric flip probabilities
    Sweep {
        #[arg(long, default_value_t = 0.0)]
        grid_start: f64,
        #[arg(long, default_value_t = 1.0)]
        grid_stop: f64,
        #[arg(long, default_value_t = 0.1)]
        grid_step: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Ideal and noisy entropies for an asymmetric machine
    Asym {
        #[command(flatten)]
        machine: MachineArgs,
        /// Bell fidelity used to calibrate the noise when --lambda is 0
        #[arg(long, default_value_t = DEFAULT_TARGET_FIDELITY)]
        target_fidelity: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Block statistics of one trace against the exact law
    Simulate {
        #[command(flatten)]
        machine: MachineArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Tomographic reconstruction of the memory state
    Tomo {
        #[command(flatten)]
        machine: MachineArgs,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct MachineArgs {
    /// Symmetric flip probability (sets both directions)
    #[arg(long, conflicts_with_all = ["p_right", "p_left"], required_unless_present_all = ["p_right", "p_left"])]
    p: Option<f64>,
    /// Probability of the 0 → 1 transition
    #[arg(long, requires = "p_left")]
    p_right: Option<f64>,
    /// Probability of the 1 → 0 transition
    #[arg(long, requires = "p_right")]
    p_left: Option<f64>,
}

impl MachineArgs {
    fn pair(&self) -> (f64, f64) {
        match (self.p, self.p_right, self.p_left) {
            (Some(p), _, _) => (p, p),
            (None, Some(a), Some(b)) => (a, b),
            _ => unreachable!("clap enforces a machine specification"),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "quantum")]
    mode: Mode,
    #[arg(long, default_value = "cnot")]
    gate: GateKind,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
    /// Shots per Pauli basis
    #[arg(long, default_value_t = DEFAULT_SHOTS)]
    shots: u64,
    /// Two-qubit depolarizing strength
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Standard deviation of the Ry angle error on re-preparation
    #[arg(long, default_value_t = 0.0)]
    prep_error: f64,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    bootstrap: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self, (p_right, p_left): (f64, f64)) -> ExperimentConfig {
        ExperimentConfig {
            p_right,
            p_left,
            mode: self.mode,
            gate: self.gate,
            steps: self.steps,
            shots_per_basis: self.shots,
            noise_lambda: self.lambda,
            prep_angle_error: self.prep_error,
            seed: self.seed,
            bootstrap_rounds: self.bootstrap,
        }
    }
}

fn emit(table: &CsvTable, out: Option<&PathBuf>) -> io::Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write_to(&mut w)?;
            w.flush()
        }
        None => table.write_to(io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, out) = match &cli.command {
        Command::Sweep {
            grid_start,
            grid_stop,
            grid_step,
            run,
        } => {
            let grid = ProbabilityGrid {
                start: *grid_start,
                stop: *grid_stop,
                step: *grid_step,
            };
            (cmd_sweep(&grid, &run.config((0.5, 0.5))), &run.out)
        }
        Command::Asym {
            machine,
            target_fidelity,
            run,
        } => (cmd_asym(&run.config(machine.pair()), *target_fidelity), &run.out),
        Command::Simulate { machine, run } => (cmd_simulate(&run.config(machine.pair())), &run.out),
        Command::Tomo { machine, run } => (cmd_tomo(&run.config(machine.pair())), &run.out),
    };
    let table = match result {
        Ok(t) => t,
        Err(e) => {
            eprintln!("qstoch: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&table, out.as_ref()) {
        eprintln!("qstoch: {e}");
        return ExitCode::from(2);
    }
    if table.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("qstoch: statistical check failed");
        ExitCode::FAILURE
    }
}
