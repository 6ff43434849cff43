//! Experiment runner behind the `qstoch` binary.
//!
//! Every command produces a [`CsvTable`]: a `#` comment line with the full
//! configuration, a header row, and data rows with floats printed to six
//! significant digits. Output is a pure function of the configuration and
//! seed.

use std::fmt::Write as _;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::circuit::{
    calibrate_noise, run_trace_from, Ensemble, GateKind, Mode, NoiseModel, TraceRun,
};
use crate::error::{Error, Result};
use crate::process::{
    classical_complexity, merge_equivalent_states, stationary_distribution, CausalMachine,
    MinimalMachine, Start,
};
use crate::qmath::{shannon_entropy, trace_distance, von_neumann_entropy, DensityMatrix, Ket};
use crate::qmodel::{causal_kets, quantum_complexity};
use crate::rng;
use crate::stats::{check_blocks, SIGMA_BOUND};
use crate::tomo::{entropy_with_error, simulate_counts, TomographyResult};

pub const THREADS_ENV: &str = "QSTOCH_THREADS";
pub const DEFAULT_STEPS: usize = 100_000;
pub const DEFAULT_SHOTS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_BOOTSTRAP: usize = 200;
pub const DEFAULT_TARGET_FIDELITY: f64 = 0.97;
/// Longest block checked by `simulate`.
pub const SIMULATE_MAX_BLOCK: usize = 4;

/// Published values for the asymmetric (P→ = 0.9, P← = 0.3) case:
/// (classical theory, quantum theory, classical measured ± σ, quantum measured ± σ).
pub const ASYM_REFERENCE: (f64, f64, (f64, f64), (f64, f64)) = (0.81, 0.12, (0.818, 0.001), (0.19, 0.01));

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "classical" => Ok(Mode::Classical),
            "quantum" => Ok(Mode::Quantum),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

impl std::str::FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cnot" => Ok(GateKind::Cnot),
            "cu" => Ok(GateKind::Cu),
            other => Err(Error::Config(format!("unknown gate '{other}'"))),
        }
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Classical => "classical",
        Mode::Quantum => "quantum",
    }
}

fn gate_name(gate: GateKind) -> &'static str {
    match gate {
        GateKind::Cnot => "cnot",
        GateKind::Cu => "cu",
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub p_right: f64,
    pub p_left: f64,
    pub mode: Mode,
    pub gate: GateKind,
    pub steps: usize,
    pub shots_per_basis: u64,
    pub noise_lambda: f64,
    pub prep_angle_error: f64,
    pub seed: u64,
    pub bootstrap_rounds: usize,
}

impl ExperimentConfig {
    pub fn symmetric(p: f64) -> Self {
        Self::asymmetric(p, p)
    }

    pub fn asymmetric(p_right: f64, p_left: f64) -> Self {
        ExperimentConfig {
            p_right,
            p_left,
            mode: Mode::Quantum,
            gate: GateKind::Cnot,
            steps: DEFAULT_STEPS,
            shots_per_basis: DEFAULT_SHOTS,
            noise_lambda: 0.0,
            prep_angle_error: 0.0,
            seed: DEFAULT_SEED,
            bootstrap_rounds: DEFAULT_BOOTSTRAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        CausalMachine::new(self.p_right, self.p_left)?;
        NoiseModel::new(self.noise_lambda, self.prep_angle_error)?;
        if self.steps == 0 {
            return Err(Error::Config("steps must be ≥ 1".into()));
        }
        if self.shots_per_basis == 0 {
            return Err(Error::Config("shots must be ≥ 1".into()));
        }
        if self.bootstrap_rounds < crate::tomo::MIN_BOOTSTRAP_ROUNDS {
            return Err(Error::Config(format!(
                "bootstrap rounds must be ≥ {}",
                crate::tomo::MIN_BOOTSTRAP_ROUNDS
            )));
        }
        Ok(())
    }

    pub fn machine(&self) -> Result<CausalMachine> {
        CausalMachine::new(self.p_right, self.p_left)
    }

    pub fn noise(&self) -> Result<NoiseModel> {
        NoiseModel::new(self.noise_lambda, self.prep_angle_error)
    }

    fn describe(&self) -> String {
        format!(
            "p_right={} p_left={} mode={} gate={} steps={} shots={} lambda={} prep_error={} bootstrap={} seed={}",
            self.p_right,
            self.p_left,
            mode_name(self.mode),
            gate_name(self.gate),
            self.steps,
            self.shots_per_basis,
            self.noise_lambda,
            self.prep_angle_error,
            self.bootstrap_rounds,
            self.seed
        )
    }
}

/// Evenly spaced probabilities `start, start + step, …, stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for ProbabilityGrid {
    fn default() -> Self {
        ProbabilityGrid {
            start: 0.0,
            stop: 1.0,
            step: 0.1,
        }
    }
}

impl ProbabilityGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let ok = (0.0..=1.0).contains(&self.start)
            && (0.0..=1.0).contains(&self.stop)
            && self.start <= self.stop
            && self.step > 0.0
            && self.step.is_finite();
        if !ok {
            return Err(Error::Config(format!(
                "invalid grid {}..{} step {}",
                self.start, self.stop, self.step
            )));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n)
            .map(|i| {
                let p = self.start + i as f64 * self.step;
                ((p * 1e12).round() / 1e12).min(1.0)
            })
            .collect())
    }
}

/// `%g`-style formatting with six significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..6).contains(&exp) {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{m}e{exp}");
    }
    let decimals = (5 - exp).max(0) as usize;
    let fixed = format!("{x:.decimals$}");
    if fixed.contains('.') {
        fixed
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        fixed
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// Command output: comment line, header, rows, and whether every inline
/// statistical check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub comment: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub passed: bool,
}

impl CsvTable {
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# {}", self.comment)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8 csv")
    }

    /// Looks up a column by header name.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let idx = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }
}

/// Runs `f` on a pool capped by `QSTOCH_THREADS` when it is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{THREADS_ENV}={v} is not a thread count")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

fn derive_seed(seed: u64, tag: u64) -> u64 {
    rng::stream(seed, tag).random()
}

/// Stationary weights, with (½, ½) for the frozen P→ = P← = 0 machine,
/// where each causal state is equally likely to be the one that persists.
pub fn equilibrium_weights(machine: &CausalMachine) -> [f64; 2] {
    stationary_distribution(machine).unwrap_or([0.5, 0.5])
}

/// C_c under [`equilibrium_weights`].
pub fn classical_theory(machine: &CausalMachine) -> Result<f64> {
    match stationary_distribution(machine) {
        Ok(_) => classical_complexity(machine),
        Err(Error::ReducibleChain) => match merge_equivalent_states(machine) {
            MinimalMachine::Single { .. } => Ok(0.0),
            MinimalMachine::Pair(_) => shannon_entropy(&equilibrium_weights(machine)),
        },
        Err(e) => Err(e),
    }
}

/// C_q under [`equilibrium_weights`].
pub fn quantum_theory(machine: &CausalMachine) -> Result<f64> {
    match stationary_distribution(machine) {
        Ok(_) => quantum_complexity(machine),
        Err(Error::ReducibleChain) => von_neumann_entropy(&memory_theory(machine, Mode::Quantum)?),
        Err(e) => Err(e),
    }
}

/// Ideal memory state the tomography stage should see.
pub fn memory_theory(machine: &CausalMachine, mode: Mode) -> Result<DensityMatrix> {
    let [w0, w1] = equilibrium_weights(machine);
    let (k0, k1) = match mode {
        Mode::Classical => (Ket::zero(), Ket::one()),
        Mode::Quantum => causal_kets(machine),
    };
    DensityMatrix::mixture(&[(w0, k0), (w1, k1)])
}

/// One run of `steps` steps; a reducible machine is split into two halves
/// started from each causal state.
pub fn simulate_run(
    machine: &CausalMachine,
    mode: Mode,
    gate: GateKind,
    steps: usize,
    noise: &NoiseModel,
    seed: u64,
) -> Result<TraceRun> {
    if stationary_distribution(machine).is_ok() || steps < 2 {
        let start = if stationary_distribution(machine).is_ok() {
            Start::Stationary
        } else {
            Start::State(0)
        };
        return run_trace_from(machine, mode, gate, steps, noise, seed, start);
    }
    let half = steps / 2;
    let mut a = run_trace_from(machine, mode, gate, half, noise, seed, Start::State(0))?;
    let b = run_trace_from(machine, mode, gate, steps - half, noise, seed ^ 1, Start::State(1))?;
    a.trace.outputs.extend(&b.trace.outputs);
    a.trace.states.extend(&b.trace.states);
    let mut ensemble: Ensemble = a.ensemble;
    ensemble.extend(&b.ensemble);
    a.ensemble = ensemble;
    Ok(a)
}

/// Tomography of a run's memory ensemble.
pub fn tomograph(
    run: &TraceRun,
    shots: u64,
    bootstrap: usize,
    seed: u64,
) -> Result<TomographyResult> {
    let rho = run.ensemble.density_matrix()?;
    let mut r = rng::stream(seed, 0);
    let counts = simulate_counts(&rho, shots, &mut r)?;
    entropy_with_error(&counts, bootstrap, &mut r)
}

const SWEEP_HEADER: [&str; 6] = [
    "p",
    "c_classical_theory",
    "c_quantum_theory",
    "c_classical_sim",
    "c_quantum_sim",
    "c_quantum_sim_std",
];

/// Symmetric sweep over `grid`; `base` supplies everything except P.
pub fn cmd_sweep(grid: &ProbabilityGrid, base: &ExperimentConfig) -> Result<CsvTable> {
    let points = grid.points()?;
    let mut cfg = *base;
    cfg.p_right = points[0];
    cfg.p_left = points[0];
    cfg.validate()?;
    let noise = cfg.noise()?;

    let rows = with_thread_cap(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, &p)| {
                let seed = rng::point_seed(base.seed, i);
                let machine = CausalMachine::symmetric(p)?;
                let classical =
                    simulate_run(&machine, Mode::Classical, base.gate, base.steps, &noise, derive_seed(seed, 0))?;
                let quantum =
                    simulate_run(&machine, Mode::Quantum, base.gate, base.steps, &noise, derive_seed(seed, 1))?;
                let tc = tomograph(&classical, base.shots_per_basis, base.bootstrap_rounds, derive_seed(seed, 2))?;
                let tq = tomograph(&quantum, base.shots_per_basis, base.bootstrap_rounds, derive_seed(seed, 3))?;
                Ok(vec![
                    fmt_sig(p),
                    fmt_sig(classical_theory(&machine)?),
                    fmt_sig(quantum_theory(&machine)?),
                    fmt_sig(tc.entropy),
                    fmt_sig(tq.entropy),
                    fmt_sig(tq.entropy_std),
                ])
            })
            .collect::<Result<Vec<_>>>()
    })??;

    Ok(CsvTable {
        comment: format!(
            "qstoch sweep grid={}..{} step={} steps={} shots={} gate={} lambda={} prep_error={} bootstrap={} seed={}",
            grid.start,
            grid.stop,
            grid.step,
            base.steps,
            base.shots_per_basis,
            gate_name(base.gate),
            base.noise_lambda,
            base.prep_angle_error,
            base.bootstrap_rounds,
            base.seed
        ),
        header: SWEEP_HEADER.to_vec(),
        rows,
        passed: true,
    })
}

const ASYM_HEADER: [&str; 8] = [
    "model",
    "condition",
    "lambda",
    "theory",
    "sim",
    "sim_std",
    "reference",
    "reference_std",
];

/// Ideal and noisy classical/quantum entropies for one asymmetric machine.
/// The noisy rows use `config.noise_lambda` when it is positive and
/// otherwise the λ calibrated to `target_fidelity`.
pub fn cmd_asym(config: &ExperimentConfig, target_fidelity: f64) -> Result<CsvTable> {
    config.validate()?;
    let machine = config.machine()?;
    let noisy = if config.noise_lambda > 0.0 {
        config.noise()?
    } else {
        calibrate_noise(target_fidelity)?.with_prep_angle_error(config.prep_angle_error)?
    };
    let is_reference_case = config.p_right == 0.9 && config.p_left == 0.3;
    let (ref_c, ref_q, ref_c_exp, ref_q_exp) = ASYM_REFERENCE;
    let theory_c = classical_theory(&machine)?;
    let theory_q = quantum_theory(&machine)?;

    let cases = [
        (Mode::Classical, "ideal", NoiseModel::ideal(), theory_c, Some(ref_c), None),
        (Mode::Quantum, "ideal", NoiseModel::ideal(), theory_q, Some(ref_q), None),
        (Mode::Classical, "noisy", noisy, theory_c, Some(ref_c_exp.0), Some(ref_c_exp.1)),
        (Mode::Quantum, "noisy", noisy, theory_q, Some(ref_q_exp.0), Some(ref_q_exp.1)),
    ];
    let rows = with_thread_cap(|| {
        cases
            .par_iter()
            .enumerate()
            .map(|(i, (mode, label, noise, theory, reference, reference_std))| {
                let seed = rng::point_seed(config.seed, i);
                let run = simulate_run(&machine, *mode, config.gate, config.steps, noise, derive_seed(seed, 0))?;
                let t = tomograph(&run, config.shots_per_basis, config.bootstrap_rounds, derive_seed(seed, 1))?;
                let (reference, reference_std) = if is_reference_case {
                    (*reference, *reference_std)
                } else {
                    (None, None)
                };
                Ok(vec![
                    mode_name(*mode).to_string(),
                    label.to_string(),
                    fmt_sig(noise.lambda),
                    fmt_sig(*theory),
                    fmt_sig(t.entropy),
                    fmt_sig(t.entropy_std),
                    opt(reference),
                    opt(reference_std),
                ])
            })
            .collect::<Result<Vec<_>>>()
    })??;

    Ok(CsvTable {
        comment: format!(
            "qstoch asym {} target_fidelity={} noisy_lambda={}",
            config.describe(),
            target_fidelity,
            noisy.lambda
        ),
        header: ASYM_HEADER.to_vec(),
        rows,
        passed: true,
    })
}

const SIMULATE_HEADER: [&str; 8] = [
    "length", "block", "count", "empirical", "exact", "deviation", "bound", "pass",
];

/// Block statistics of one trace against the exact law, with `4σ` checks.
/// Rows with block `tv` hold the total-variation distance and its bound.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<CsvTable> {
    config.validate()?;
    let machine = config.machine()?;
    let run = simulate_run(
        &machine,
        config.mode,
        config.gate,
        config.steps,
        &config.noise()?,
        config.seed,
    )?;
    let mut rows = Vec::new();
    let mut passed = true;
    let max_len = SIMULATE_MAX_BLOCK.min(config.steps);
    // the exact law assumes a stationary start
    let exact_available = stationary_distribution(&machine).is_ok();
    for len in 1..=max_len {
        if !exact_available {
            break;
        }
        let report = check_blocks(&machine, &run.trace.outputs, len, SIGMA_BOUND)?;
        passed &= report.passed();
        for c in &report.cells {
            rows.push(vec![
                len.to_string(),
                c.label(),
                c.count.to_string(),
                fmt_sig(c.empirical),
                fmt_sig(c.exact),
                fmt_sig(c.deviation()),
                fmt_sig(c.bound),
                c.passed().to_string(),
            ]);
        }
        let tv = report.total_variation();
        let bound = report.total_variation_bound();
        rows.push(vec![
            len.to_string(),
            "tv".into(),
            report.windows.to_string(),
            String::new(),
            String::new(),
            fmt_sig(tv),
            fmt_sig(bound),
            (tv <= bound).to_string(),
        ]);
    }
    Ok(CsvTable {
        comment: format!("qstoch simulate {}", config.describe()),
        header: SIMULATE_HEADER.to_vec(),
        rows,
        passed,
    })
}

const TOMO_HEADER: [&str; 14] = [
    "mode",
    "gate",
    "p_right",
    "p_left",
    "lambda",
    "shots",
    "rho00",
    "rho01_re",
    "rho01_im",
    "rho11",
    "entropy",
    "entropy_std",
    "entropy_theory",
    "trace_distance_theory",
];

/// Reconstructed memory state for one configuration.
pub fn cmd_tomo(config: &ExperimentConfig) -> Result<CsvTable> {
    config.validate()?;
    let machine = config.machine()?;
    let noise = config.noise()?;
    let run = simulate_run(&machine, config.mode, config.gate, config.steps, &noise, derive_seed(config.seed, 0))?;
    let t = tomograph(&run, config.shots_per_basis, config.bootstrap_rounds, derive_seed(config.seed, 1))?;
    let theory = memory_theory(&machine, config.mode)?;
    let rho = t.rho_hat;
    let row = vec![
        mode_name(config.mode).to_string(),
        gate_name(config.gate).to_string(),
        fmt_sig(config.p_right),
        fmt_sig(config.p_left),
        fmt_sig(noise.lambda),
        config.shots_per_basis.to_string(),
        fmt_sig(rho.get(0, 0).re),
        fmt_sig(rho.get(0, 1).re),
        fmt_sig(rho.get(0, 1).im),
        fmt_sig(rho.get(1, 1).re),
        fmt_sig(t.entropy),
        fmt_sig(t.entropy_std),
        fmt_sig(von_neumann_entropy(&theory)?),
        fmt_sig(trace_distance(&rho, &theory)?),
    ];
    let mut comment = String::new();
    write!(comment, "qstoch tomo {}", config.describe()).expect("string write");
    Ok(CsvTable {
        comment,
        header: TOMO_HEADER.to_vec(),
        rows: vec![row],
        passed: true,
    })
}
