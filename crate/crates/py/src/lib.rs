//! Python bindings for the two-switch causal-state simulators.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qstoch_core::circuit::{self, GateKind, Mode, NoiseModel};
use qstoch_core::cli::{self, ExperimentConfig, ProbabilityGrid};
use qstoch_core::qmath::{self, DensityMatrix, Matrix, C64};
use qstoch_core::{process, qmodel, rng, tomo};

fn to_py(e: qstoch_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows(m: &Matrix) -> Vec<Vec<C64>> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect())
        .collect()
}

fn density(rho: Vec<Vec<C64>>) -> PyResult<DensityMatrix> {
    let flat: Vec<C64> = rho.into_iter().flatten().collect();
    DensityMatrix::new(Matrix::from_rows(&flat).map_err(to_py)?).map_err(to_py)
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    mode.parse().map_err(to_py)
}

fn parse_gate(gate: &str) -> PyResult<GateKind> {
    gate.parse().map_err(to_py)
}

/// Two-state causal machine with transition probabilities P→ (0 → 1) and
/// P← (1 → 0); each output equals the state entered.
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct CausalMachine(process::CausalMachine);

#[pymethods]
impl CausalMachine {
    #[new]
    fn new(p_right: f64, p_left: f64) -> PyResult<Self> {
        process::CausalMachine::new(p_right, p_left)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn symmetric(p: f64) -> PyResult<Self> {
        process::CausalMachine::symmetric(p).map(Self).map_err(to_py)
    }

    #[getter]
    fn p_right(&self) -> f64 {
        self.0.p_right()
    }

    #[getter]
    fn p_left(&self) -> f64 {
        self.0.p_left()
    }

    fn stationary_distribution(&self) -> PyResult<[f64; 2]> {
        process::stationary_distribution(&self.0).map_err(to_py)
    }

    fn classical_complexity(&self) -> PyResult<f64> {
        process::classical_complexity(&self.0).map_err(to_py)
    }

    fn quantum_complexity(&self) -> PyResult<f64> {
        qmodel::quantum_complexity(&self.0).map_err(to_py)
    }

    /// The two quantum causal states as amplitude lists.
    fn causal_kets(&self) -> Vec<Vec<C64>> {
        let (k0, k1) = qmodel::causal_kets(&self.0);
        vec![k0.amplitudes().to_vec(), k1.amplitudes().to_vec()]
    }

    fn steady_state_rho(&self) -> PyResult<Vec<Vec<C64>>> {
        let model = qmodel::quantum_causal_states(&self.0).map_err(to_py)?;
        Ok(rows(qmodel::steady_state_rho(&model).matrix()))
    }

    fn block_distribution(&self, length: usize) -> PyResult<Vec<f64>> {
        process::block_distribution(&self.0, length).map_err(to_py)
    }

    fn excess_entropy(&self, half_window: usize) -> PyResult<f64> {
        process::excess_entropy(&self.0, half_window).map_err(to_py)
    }

    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<u8>> {
        process::sample_sequence(&self.0, n, seed)
            .map(|t| t.outputs)
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("CausalMachine(p_right={}, p_left={})", self.0.p_right(), self.0.p_left())
    }
}

/// Outputs and memory state of one simulator run.
#[pyclass(frozen, get_all)]
struct TraceRun {
    outputs: Vec<u8>,
    states: Vec<u8>,
    memory_rho: Vec<Vec<C64>>,
}

#[pyfunction]
#[pyo3(signature = (machine, mode = "quantum", gate = "cnot", steps = 100_000, noise_lambda = 0.0, prep_angle_error = 0.0, seed = 42))]
#[allow(clippy::too_many_arguments)]
fn run_trace(
    py: Python<'_>,
    machine: CausalMachine,
    mode: &str,
    gate: &str,
    steps: usize,
    noise_lambda: f64,
    prep_angle_error: f64,
    seed: u64,
) -> PyResult<TraceRun> {
    let (mode, gate) = (parse_mode(mode)?, parse_gate(gate)?);
    let noise = NoiseModel::new(noise_lambda, prep_angle_error).map_err(to_py)?;
    let run = py
        .detach(|| cli::simulate_run(&machine.0, mode, gate, steps, &noise, seed))
        .map_err(to_py)?;
    let rho = run.ensemble.density_matrix().map_err(to_py)?;
    Ok(TraceRun {
        outputs: run.trace.outputs,
        states: run.trace.states,
        memory_rho: rows(rho.matrix()),
    })
}

/// Simulated Pauli tomography of a qubit state.
/// Returns (reconstructed rho, entropy, bootstrap standard deviation).
#[pyfunction]
#[pyo3(signature = (rho, shots = 10_000, bootstrap = 200, seed = 42))]
fn tomography(
    py: Python<'_>,
    rho: Vec<Vec<C64>>,
    shots: u64,
    bootstrap: usize,
    seed: u64,
) -> PyResult<(Vec<Vec<C64>>, f64, f64)> {
    let state = density(rho)?;
    let result = py
        .detach(|| {
            let mut r = rng::stream(seed, 0);
            let counts = tomo::simulate_counts(&state, shots, &mut r)?;
            tomo::entropy_with_error(&counts, bootstrap, &mut r)
        })
        .map_err(to_py)?;
    Ok((rows(result.rho_hat.matrix()), result.entropy, result.entropy_std))
}

#[pyfunction]
fn von_neumann_entropy(rho: Vec<Vec<C64>>) -> PyResult<f64> {
    qmath::von_neumann_entropy(&density(rho)?).map_err(to_py)
}

/// Depolarizing strength whose Bell fidelity equals `target_fidelity`.
#[pyfunction]
fn calibrate_noise(target_fidelity: f64) -> PyResult<f64> {
    circuit::calibrate_noise(target_fidelity)
        .map(|n| n.lambda)
        .map_err(to_py)
}

#[pyfunction]
fn bell_fidelity(noise_lambda: f64) -> PyResult<f64> {
    circuit::bell_fidelity(noise_lambda).map_err(to_py)
}

/// CSV text of a symmetric sweep, identical to the command-line output.
#[pyfunction]
#[pyo3(signature = (start = 0.0, stop = 1.0, step = 0.1, steps = 100_000, shots = 10_000, seed = 42))]
fn sweep_csv(
    py: Python<'_>,
    start: f64,
    stop: f64,
    step: f64,
    steps: usize,
    shots: u64,
    seed: u64,
) -> PyResult<String> {
    let grid = ProbabilityGrid { start, stop, step };
    let mut base = ExperimentConfig::symmetric(0.5);
    base.steps = steps;
    base.shots_per_basis = shots;
    base.seed = seed;
    py.detach(|| cli::cmd_sweep(&grid, &base))
        .map(|t| t.to_csv_string())
        .map_err(to_py)
}

#[pymodule]
mod qstoch {
    #[pymodule_export]
    use super::{
        bell_fidelity, calibrate_noise, run_trace, sweep_csv, tomography, von_neumann_entropy,
        CausalMachine, TraceRun,
    };
}
