//! Step circuits for the classical and quantum simulators.
//!
//! Each step uses a two-qubit register (model ⊗ meter). The classical circuit
//! flips the causal bit with the machine's probability and copies it onto a
//! fresh meter bit with a CNOT. The quantum circuit entangles the memory ket
//! |s̃⟩ with a fresh meter through a CNOT (or a controlled-Û with its frame
//! rotation folded into meter preparation and readout), so reading the meter
//! yields the next output. The collapsed model qubit is then discarded and
//! the memory reprepared as |x̃⟩, the way the tomography-interrupted
//! experiment does it.
//!
//! Gate noise is a Monte Carlo Pauli trajectory: after the entangling gate,
//! with probability λ one of the 15 non-identity two-qubit Paulis is applied
//! uniformly at random. Averaged over trajectories this is
//! ρ ↦ (1 − 16λ/15)·ρ + (16λ/15)·1/4, i.e. the "replace with the maximally
//! mixed state" channel with probability p = 16λ/15.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::process::{initial_state, CausalMachine, Start, Trace};
use crate::qmath::{
    fidelity, ry, two_qubit_paulis, DensityMatrix, Ket, Matrix, Qubit, Tensor, Unitary, C64, TOL,
};
use crate::qmodel::{construct_cu, CuGate, QuantumModel};
use crate::rng;

/// Two-qubit register, model qubit first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitState {
    pub joint: Ket,
    pub step_index: u64,
}

impl CircuitState {
    pub fn new(model: &Ket, meter: &Ket) -> Result<Self> {
        Ok(CircuitState {
            joint: model.tensor(meter)?,
            step_index: 0,
        })
    }

    pub fn apply(&self, gate: &Unitary) -> Result<Self> {
        let joint = self.joint.apply(gate)?;
        let n = joint.norm_sqr();
        if (n - 1.0).abs() > TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(CircuitState {
            joint,
            step_index: self.step_index,
        })
    }
}

/// Projective logical-basis measurement of one qubit. Returns the outcome
/// and the renormalized state of the other qubit; the measured qubit is
/// destroyed.
pub fn measure_qubit(
    state: &CircuitState,
    which: Qubit,
    rng: &mut impl Rng,
) -> Result<(u8, Ket)> {
    let amps = state.joint.amplitudes();
    let p_one: f64 = (0..4)
        .filter(|&i| which.bit_of(i) == 1)
        .map(|i| amps[i].norm_sqr())
        .sum();
    let outcome = (rng.random::<f64>() < p_one) as usize;
    let branch: Vec<C64> = (0..4)
        .filter(|&i| which.bit_of(i) == outcome)
        .map(|i| amps[i])
        .collect();
    // the filter keeps the other qubit's |0⟩ component first
    let norm: f64 = branch.iter().map(|a| a.norm_sqr()).sum();
    if norm <= 0.0 {
        return Err(Error::ZeroNormBranch);
    }
    Ok((outcome as u8, Ket::normalized(&branch)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Probability of a uniformly random non-identity two-qubit Pauli.
    pub lambda: f64,
    /// Standard deviation (radians) of a Y-rotation error on prepared kets.
    pub prep_angle_error: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl NoiseModel {
    pub fn new(lambda: f64, prep_angle_error: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidProbability {
                name: "lambda",
                value: lambda,
            });
        }
        if !(prep_angle_error >= 0.0 && prep_angle_error.is_finite()) {
            return Err(Error::Config(format!(
                "prep_angle_error must be ≥ 0, got {prep_angle_error}"
            )));
        }
        Ok(NoiseModel {
            lambda,
            prep_angle_error,
        })
    }

    pub fn ideal() -> Self {
        NoiseModel {
            lambda: 0.0,
            prep_angle_error: 0.0,
        }
    }

    /// Builds from the replace-with-maximally-mixed probability p = 16λ/15
    /// (p ≤ 16/15 covers the whole λ range).
    pub fn from_mixing_probability(p: f64) -> Result<Self> {
        Self::new(p * 15.0 / 16.0, 0.0)
    }

    pub fn mixing_probability(&self) -> f64 {
        self.lambda * 16.0 / 15.0
    }

    pub fn with_prep_angle_error(self, sigma: f64) -> Result<Self> {
        Self::new(self.lambda, sigma)
    }

    pub fn is_ideal(&self) -> bool {
        self.lambda == 0.0 && self.prep_angle_error == 0.0
    }

    fn prepare(&self, ket: &Ket, rng: &mut impl Rng) -> Ket {
        if self.prep_angle_error == 0.0 {
            return *ket;
        }
        let eps = Normal::new(0.0, self.prep_angle_error)
            .expect("validated standard deviation")
            .sample(rng);
        ket.apply(&ry(eps)).expect("single-qubit rotation")
    }
}

/// One Pauli trajectory of the depolarizing channel.
pub fn apply_noise(
    state: &CircuitState,
    noise: &NoiseModel,
    rng: &mut impl Rng,
) -> Result<CircuitState> {
    if noise.lambda == 0.0 || rng.random::<f64>() >= noise.lambda {
        return Ok(*state);
    }
    let k = rng.random_range(1..16);
    state.apply(&two_qubit_paulis()[k])
}

/// Trajectory average of [`apply_noise`]: (1−λ)ρ + (λ/15)·Σ_{P≠1} PρP†.
pub fn depolarizing_channel(rho: &DensityMatrix, lambda: f64) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: 4,
        });
    }
    let paulis = two_qubit_paulis();
    let mut acc = rho.matrix().scale_real(1.0 - lambda);
    for p in &paulis[1..] {
        acc = acc + p.conjugate(rho.matrix())?.scale_real(lambda / 15.0);
    }
    DensityMatrix::new((acc + acc.adjoint()).scale_real(0.5))
}

/// |+⟩ ⊗ |0⟩, the separable input that an ideal CNOT turns into |Φ⁺⟩.
pub fn bell_preparation_input() -> CircuitState {
    CircuitState::new(&Ket::plus(), &Ket::zero()).expect("two qubits")
}

/// Exact fidelity with |Φ⁺⟩ of the noisy CNOT output on the Bell-preparation input.
pub fn bell_fidelity(lambda: f64) -> Result<f64> {
    let ideal = bell_preparation_input().apply(&Unitary::cnot())?;
    let rho = depolarizing_channel(&ideal.joint.projector(), lambda)?;
    fidelity(&rho, &Ket::bell_phi_plus())
}

/// Monte Carlo estimate of [`bell_fidelity`] and the trajectory-averaged state.
pub fn bell_fidelity_monte_carlo(
    noise: &NoiseModel,
    trajectories: usize,
    rng: &mut impl Rng,
) -> Result<(f64, DensityMatrix)> {
    let ideal = bell_preparation_input().apply(&Unitary::cnot())?;
    let phi = Ket::bell_phi_plus();
    let mut acc = Matrix::zeros(4)?;
    let mut f = 0.0;
    for _ in 0..trajectories {
        let out = apply_noise(&ideal, noise, rng)?;
        f += phi.inner(&out.joint)?.norm_sqr();
        acc = acc + Matrix::outer(&out.joint, &out.joint);
    }
    let n = trajectories as f64;
    let avg = acc.scale_real(1.0 / n);
    Ok((f / n, DensityMatrix::new((avg + avg.adjoint()).scale_real(0.5))?))
}

/// λ whose exact channel average gives the requested Bell fidelity.
/// Under the 15-Pauli convention F(λ) = 1 − 4λ/5, so F = 1/4 needs λ = 15/16.
pub fn calibrate_noise(target_fidelity: f64) -> Result<NoiseModel> {
    if !(0.25..=1.0).contains(&target_fidelity) {
        return Err(Error::UnachievableFidelity(target_fidelity));
    }
    if target_fidelity == 1.0 {
        return Ok(NoiseModel::ideal());
    }
    // F is monotone decreasing in λ on [0, 1]
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bell_fidelity(mid)? > target_fidelity {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    NoiseModel::new(0.5 * (lo + hi), 0.0)
}

/// Classical step: flip with the state's probability, XOR onto a fresh
/// meter bit, read it out; the output is the new state.
pub fn classical_step(state: u8, machine: &CausalMachine, rng: &mut impl Rng) -> (u8, u8) {
    let flipped = machine.step(state, rng);
    let meter = flipped;
    (meter, meter)
}

/// The classical step run on the two-qubit register with orthogonal
/// logical states, so gate noise can act on it.
pub fn classical_step_noisy(
    state: u8,
    machine: &CausalMachine,
    noise: &NoiseModel,
    rng: &mut impl Rng,
) -> Result<(u8, u8)> {
    let flipped = machine.step(state, rng);
    let model = Ket::basis(2, flipped as usize)?;
    let reg = CircuitState::new(&model, &Ket::zero())?.apply(&Unitary::cnot())?;
    let reg = apply_noise(&reg, noise, rng)?;
    let (x, _) = measure_qubit(&reg, Qubit::Meter, rng)?;
    Ok((x, x))
}

/// Entangling gate of the quantum step.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepGate {
    Cnot,
    /// Controlled-Û; the meter is prepared in V|0⟩ and rotated by V† before
    /// readout, which makes the step operationally a CNOT.
    Cu(CuGate),
}

impl StepGate {
    pub fn kind(&self) -> GateKind {
        match self {
            StepGate::Cnot => GateKind::Cnot,
            StepGate::Cu(_) => GateKind::Cu,
        }
    }

    pub fn for_machine(kind: GateKind, machine: &CausalMachine) -> Result<Self> {
        Ok(match kind {
            GateKind::Cnot => StepGate::Cnot,
            GateKind::Cu => StepGate::Cu(construct_cu(machine)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Cnot,
    Cu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Classical,
    Quantum,
}

/// Everything one quantum step produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub output: u8,
    /// Model qubit right after the meter readout, before it is discarded.
    pub collapsed_model: Ket,
    /// Memory prepared for the next step.
    pub next_memory: Ket,
}

pub fn quantum_step_detailed(
    memory: &Ket,
    model: &QuantumModel,
    gate: &StepGate,
    noise: &NoiseModel,
    rng: &mut impl Rng,
) -> Result<StepOutcome> {
    let (entangler, meter_frame) = match gate {
        StepGate::Cnot => (Unitary::cnot(), None),
        StepGate::Cu(cu) => {
            if cu.control != Qubit::Model {
                return Err(Error::GateMismatch(
                    "the meter readout needs the model qubit as control".into(),
                ));
            }
            if !model.ket0.apply(&cu.u)?.same_ray(&model.ket1, 1e-9) {
                return Err(Error::GateMismatch(
                    "controlled-U was synthesized for a different machine".into(),
                ));
            }
            (cu.cu, Some(cu.v))
        }
    };
    let meter = match meter_frame {
        Some(v) => Ket::zero().apply(&v)?,
        None => Ket::zero(),
    };
    let mut reg = CircuitState::new(memory, &meter)?.apply(&entangler)?;
    reg = apply_noise(&reg, noise, rng)?;
    if let Some(v) = meter_frame {
        reg = reg.apply(&Unitary::identity(2)?.tensor(&v.adjoint())?)?;
    }
    let (output, collapsed_model) = measure_qubit(&reg, Qubit::Meter, rng)?;
    let next_memory = noise.prepare(model.ket(output), rng);
    Ok(StepOutcome {
        output,
        collapsed_model,
        next_memory,
    })
}

/// One measure-and-reprepare quantum step: returns the output bit and the
/// reprepared memory |x̃⟩.
pub fn quantum_step(
    memory: &Ket,
    model: &QuantumModel,
    gate: &StepGate,
    noise: &NoiseModel,
    rng: &mut impl Rng,
) -> Result<(u8, Ket)> {
    let o = quantum_step_detailed(memory, model, gate, noise, rng)?;
    Ok((o.output, o.next_memory))
}

/// Memory kets prepared during a run, with multiplicities.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ensemble {
    members: Vec<(Ket, u64)>,
    total: u64,
}

impl Ensemble {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, ket: Ket) {
        self.total += 1;
        // repeated kets are the common case; look only at the recent members
        let recent = self.members.len().saturating_sub(4);
        if let Some(slot) = self.members[recent..].iter_mut().find(|(k, _)| *k == ket) {
            slot.1 += 1;
        } else {
            self.members.push((ket, 1));
        }
    }

    pub fn extend(&mut self, other: &Ensemble) {
        for (k, c) in &other.members {
            self.total += c;
            match self.members.iter_mut().find(|(m, _)| m == k) {
                Some(slot) => slot.1 += c,
                None => self.members.push((*k, *c)),
            }
        }
    }

    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn members(&self) -> &[(Ket, u64)] {
        &self.members
    }

    /// Normalized weights paired with their kets.
    pub fn weighted(&self) -> Vec<(f64, Ket)> {
        let n = self.total as f64;
        self.members.iter().map(|(k, c)| (*c as f64 / n, *k)).collect()
    }

    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        if self.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        let mut acc = Matrix::zeros(self.members[0].0.dim())?;
        for (k, c) in &self.members {
            acc = acc + Matrix::outer(k, k).scale_real(*c as f64);
        }
        let m = acc.scale_real(1.0 / self.total as f64);
        DensityMatrix::new((m + m.adjoint()).scale_real(0.5))
    }
}

/// A simulated run: the output trace and the memory ensemble the
/// tomography stage characterizes.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRun {
    pub trace: Trace,
    pub ensemble: Ensemble,
    pub mode: Mode,
    pub gate: GateKind,
}

pub fn run_trace(
    machine: &CausalMachine,
    mode: Mode,
    gate: GateKind,
    n: usize,
    noise: &NoiseModel,
    seed: u64,
) -> Result<TraceRun> {
    run_trace_from(machine, mode, gate, n, noise, seed, Start::Stationary)
}

pub fn run_trace_from(
    machine: &CausalMachine,
    mode: Mode,
    gate: GateKind,
    n: usize,
    noise: &NoiseModel,
    seed: u64,
    start: Start,
) -> Result<TraceRun> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let mut rng = rng::stream(seed, 0);
    let mut state = initial_state(machine, start, &mut rng)?;
    let mut ensemble = Ensemble::new();
    let mut outputs = Vec::with_capacity(n);

    match mode {
        Mode::Classical => {
            for _ in 0..n {
                ensemble.push(Ket::basis(2, state as usize)?);
                let (x, next) = if noise.lambda > 0.0 {
                    classical_step_noisy(state, machine, noise, &mut rng)?
                } else {
                    classical_step(state, machine, &mut rng)
                };
                outputs.push(x);
                state = next;
            }
        }
        Mode::Quantum => {
            let model = quantum_model_unchecked(machine);
            let step_gate = StepGate::for_machine(gate, machine)?;
            let mut memory = noise.prepare(model.ket(state), &mut rng);
            for _ in 0..n {
                ensemble.push(memory);
                let (x, next) = quantum_step(&memory, &model, &step_gate, noise, &mut rng)?;
                outputs.push(x);
                memory = next;
            }
        }
    }
    Ok(TraceRun {
        trace: Trace {
            states: outputs.clone(),
            outputs,
            seed,
        },
        ensemble,
        mode,
        gate,
    })
}

// Kets only; the step never reads the stationary weights, and explicit
// start states make reducible machines runnable.
fn quantum_model_unchecked(machine: &CausalMachine) -> QuantumModel {
    let (ket0, ket1) = crate::qmodel::causal_kets(machine);
    QuantumModel {
        machine: *machine,
        ket0,
        ket1,
        stationary: [0.5, 0.5],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::block_distribution;
    use crate::qmodel::quantum_causal_states;
    use crate::qmath::trace_distance;
    use crate::stats::{check_blocks, two_sample_consistent, SIGMA_BOUND};
    use approx::assert_abs_diff_eq;

    fn m(a: f64, b: f64) -> CausalMachine {
        CausalMachine::new(a, b).unwrap()
    }

    fn binomial_ok(hits: usize, n: usize, p: f64, k: f64) -> bool {
        let f = hits as f64 / n as f64;
        (f - p).abs() <= k * (p * (1.0 - p) / n as f64).sqrt()
    }

    #[test]
    fn measuring_uniform_superposition() {
        let state = CircuitState::new(&Ket::plus(), &Ket::zero()).unwrap();
        let mut rng = rng::stream(1, 0);
        let n = 100_000;
        let mut ones = 0;
        for _ in 0..n {
            let (x, rest) = measure_qubit(&state, Qubit::Model, &mut rng).unwrap();
            ones += x as usize;
            assert!(rest.same_ray(&Ket::zero(), 1e-15));
        }
        assert!(binomial_ok(ones, n, 0.5, 3.0));
    }

    #[test]
    fn measuring_entangled_meter() {
        let joint = Ket::real(&[0.2f64.sqrt(), 0.0, 0.0, 0.8f64.sqrt()]).unwrap();
        let state = CircuitState {
            joint,
            step_index: 0,
        };
        let mut rng = rng::stream(2, 0);
        let n = 100_000;
        let mut ones = 0;
        for _ in 0..n {
            let (x, model) = measure_qubit(&state, Qubit::Meter, &mut rng).unwrap();
            ones += x as usize;
            let want = if x == 1 { Ket::one() } else { Ket::zero() };
            assert!(model.same_ray(&want, 1e-12));
        }
        assert!(binomial_ok(ones, n, 0.8, 3.0));
    }

    #[test]
    fn measuring_product_basis_state() {
        let state = CircuitState::new(&Ket::zero(), &Ket::zero()).unwrap();
        let mut rng = rng::stream(3, 0);
        for _ in 0..100 {
            let (x, model) = measure_qubit(&state, Qubit::Meter, &mut rng).unwrap();
            assert_eq!(x, 0);
            assert_eq!(model, Ket::zero());
        }
    }

    #[test]
    fn classical_step_examples() {
        let mut rng = rng::stream(4, 0);
        for _ in 0..100 {
            assert_eq!(classical_step(0, &m(0.0, 0.5), &mut rng), (0, 0));
            assert_eq!(classical_step(0, &m(1.0, 0.5), &mut rng), (1, 1));
        }
        let n = 100_000;
        let ones: usize = (0..n)
            .map(|_| classical_step(0, &m(0.8, 0.8), &mut rng).0 as usize)
            .sum();
        assert!(binomial_ok(ones, n, 0.8, 3.0));
    }

    #[test]
    fn quantum_step_examples() {
        let mut rng = rng::stream(5, 0);
        let noise = NoiseModel::ideal();

        assert!(quantum_causal_states(&m(0.0, 0.0)).is_err());
        let frozen = quantum_model_unchecked(&m(0.0, 0.0));
        for _ in 0..100 {
            let (x, next) =
                quantum_step(&frozen.ket0, &frozen, &StepGate::Cnot, &noise, &mut rng).unwrap();
            assert_eq!(x, 0);
            assert_eq!(next, Ket::zero());
        }

        let n = 100_000;
        let sym = quantum_causal_states(&m(0.8, 0.8)).unwrap();
        let ones: usize = (0..n)
            .map(|_| {
                quantum_step(&sym.ket0, &sym, &StepGate::Cnot, &noise, &mut rng)
                    .unwrap()
                    .0 as usize
            })
            .sum();
        assert!(binomial_ok(ones, n, 0.8, 3.0));

        let asym = quantum_causal_states(&m(0.9, 0.3)).unwrap();
        let zeros: usize = (0..n)
            .map(|_| {
                (quantum_step(&asym.ket1, &asym, &StepGate::Cnot, &noise, &mut rng)
                    .unwrap()
                    .0
                    == 0) as usize
            })
            .sum();
        assert!(binomial_ok(zeros, n, 0.3, 3.0));
    }

    #[test]
    fn collapse_leaves_model_in_logical_output_state() {
        let mut rng = rng::stream(6, 0);
        let model = quantum_causal_states(&m(0.9, 0.3)).unwrap();
        let gate = StepGate::Cnot;
        for s in [0u8, 1] {
            for _ in 0..500 {
                let o = quantum_step_detailed(
                    model.ket(s),
                    &model,
                    &gate,
                    &NoiseModel::ideal(),
                    &mut rng,
                )
                .unwrap();
                let logical = Ket::basis(2, o.output as usize).unwrap();
                assert!(o.collapsed_model.same_ray(&logical, 1e-12));
                assert_eq!(o.next_memory, *model.ket(o.output));
            }
        }
    }

    #[test]
    fn quantum_step_rejects_mismatched_gates() {
        let mut rng = rng::stream(7, 0);
        let model = quantum_causal_states(&m(0.9, 0.3)).unwrap();
        let wrong_machine = StepGate::Cu(construct_cu(&m(0.6, 0.2)).unwrap());
        let err = quantum_step(&model.ket0, &model, &wrong_machine, &NoiseModel::ideal(), &mut rng);
        assert!(matches!(err, Err(Error::GateMismatch(_))));
        let meter_control = StepGate::Cu(
            crate::qmodel::construct_cu_with_control(&m(0.9, 0.3), Qubit::Meter).unwrap(),
        );
        let err = quantum_step(&model.ket0, &model, &meter_control, &NoiseModel::ideal(), &mut rng);
        assert!(matches!(err, Err(Error::GateMismatch(_))));
    }

    #[test]
    fn cnot_and_cu_steps_agree() {
        let n = 100_000;
        for (a, b) in [(0.9, 0.3), (0.2, 0.6), (0.8, 0.8)] {
            let model = quantum_causal_states(&m(a, b)).unwrap();
            let cu = StepGate::Cu(construct_cu(&m(a, b)).unwrap());
            for s in [0u8, 1] {
                let p_one = model.machine.output_distribution(s)[1];
                for (gate, seed) in [(StepGate::Cnot, 8), (cu, 9)] {
                    let mut rng = rng::stream(seed, s as u64);
                    let ones: usize = (0..n)
                        .map(|_| {
                            quantum_step(model.ket(s), &model, &gate, &NoiseModel::ideal(), &mut rng)
                                .unwrap()
                                .0 as usize
                        })
                        .sum();
                    assert!(binomial_ok(ones, n, p_one, 4.0), "({a},{b}) s={s} {gate:?}");
                }
            }
        }
    }

    #[test]
    fn noise_zero_is_identity() {
        let mut rng = rng::stream(10, 0);
        let s = bell_preparation_input();
        for _ in 0..100 {
            assert_eq!(apply_noise(&s, &NoiseModel::ideal(), &mut rng).unwrap(), s);
        }
    }

    /// Closed-form twirl: (1 − 16λ/15)ρ + (16λ/15)·1/4.
    fn twirl_oracle(rho: &DensityMatrix, lambda: f64) -> DensityMatrix {
        let p = 16.0 * lambda / 15.0;
        let mm = DensityMatrix::maximally_mixed(4).unwrap();
        DensityMatrix::new(rho.matrix().scale_real(1.0 - p) + mm.matrix().scale_real(p)).unwrap()
    }

    #[test]
    fn channel_matches_twirl_closed_form() {
        let phi = Ket::bell_phi_plus().projector();
        for k in 0..=10 {
            let lambda = k as f64 / 10.0;
            let exact = depolarizing_channel(&phi, lambda).unwrap();
            let oracle = twirl_oracle(&phi, lambda);
            assert!(exact.matrix().max_abs_diff(oracle.matrix()) < 1e-12);
        }
        // λ = 1 lands on (16/15)·1/4 − (1/15)|Φ⁺⟩⟨Φ⁺|
        let full = depolarizing_channel(&phi, 1.0).unwrap();
        let want = DensityMatrix::maximally_mixed(4)
            .unwrap()
            .matrix()
            .scale_real(16.0 / 15.0)
            - phi.matrix().scale_real(1.0 / 15.0);
        assert!(full.matrix().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn full_depolarizing_monte_carlo_average() {
        let mut rng = rng::stream(11, 0);
        let noise = NoiseModel::new(1.0, 0.0).unwrap();
        let (_, avg) = bell_fidelity_monte_carlo(&noise, 100_000, &mut rng).unwrap();
        let oracle = twirl_oracle(&Ket::bell_phi_plus().projector(), 1.0);
        assert!(trace_distance(&avg, &oracle).unwrap() < 0.02);
    }

    #[test]
    fn calibrated_noise_reproduces_fidelity() {
        let noise = calibrate_noise(0.97).unwrap();
        // F = 1 − 4λ/5 ⇒ λ = 0.0375
        assert_abs_diff_eq!(noise.lambda, 0.0375, epsilon = 1e-12);
        assert_abs_diff_eq!(noise.mixing_probability(), 0.04, epsilon = 1e-12);
        let mut rng = rng::stream(12, 0);
        let (f, _) = bell_fidelity_monte_carlo(&noise, 100_000, &mut rng).unwrap();
        assert!((f - 0.97).abs() < 0.005, "{f}");
    }

    #[test]
    fn calibration_edges() {
        assert_eq!(calibrate_noise(1.0).unwrap().lambda, 0.0);
        assert_abs_diff_eq!(calibrate_noise(0.25).unwrap().lambda, 15.0 / 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            calibrate_noise(0.25).unwrap().mixing_probability(),
            1.0,
            epsilon = 1e-12
        );
        assert!(matches!(calibrate_noise(0.2), Err(Error::UnachievableFidelity(_))));
        assert!(matches!(calibrate_noise(1.01), Err(Error::UnachievableFidelity(_))));
    }

    #[test]
    fn bell_fidelity_strictly_decreasing() {
        let f: Vec<f64> = (0..=20).map(|k| bell_fidelity(k as f64 / 20.0).unwrap()).collect();
        assert!(f.windows(2).all(|w| w[1] < w[0]));
        assert_abs_diff_eq!(f[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noise_model_validation() {
        assert!(NoiseModel::new(-0.1, 0.0).is_err());
        assert!(NoiseModel::new(0.1, -1.0).is_err());
        let n = NoiseModel::from_mixing_probability(0.04).unwrap();
        assert_abs_diff_eq!(n.lambda, 0.0375, epsilon = 1e-15);
    }

    #[test]
    fn traces_are_reproducible() {
        let mc = m(0.9, 0.3);
        for mode in [Mode::Classical, Mode::Quantum] {
            let a = run_trace(&mc, mode, GateKind::Cu, 2000, &NoiseModel::ideal(), 3).unwrap();
            let b = run_trace(&mc, mode, GateKind::Cu, 2000, &NoiseModel::ideal(), 3).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.trace.outputs, a.trace.states);
            assert_eq!(a.ensemble.len(), 2000);
            assert_eq!(a.ensemble.members().len(), 2);
        }
        let noisy = NoiseModel::new(0.05, 0.02).unwrap();
        let a = run_trace(&mc, Mode::Quantum, GateKind::Cnot, 500, &noisy, 4).unwrap();
        let b = run_trace(&mc, Mode::Quantum, GateKind::Cnot, 500, &noisy, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quantum_trace_reproduces_two_block_law() {
        let mc = m(0.8, 0.8);
        let run = run_trace(&mc, Mode::Quantum, GateKind::Cnot, 100_000, &NoiseModel::ideal(), 13)
            .unwrap();
        let r = check_blocks(&mc, &run.trace.outputs, 2, SIGMA_BOUND).unwrap();
        assert!(r.passed());
        assert_eq!(block_distribution(&mc, 2).unwrap().len(), r.cells.len());
    }

    #[test]
    fn classical_and_quantum_traces_are_consistent() {
        let mc = m(0.8, 0.8);
        let c = run_trace(&mc, Mode::Classical, GateKind::Cnot, 100_000, &NoiseModel::ideal(), 14)
            .unwrap();
        let q = run_trace(&mc, Mode::Quantum, GateKind::Cnot, 100_000, &NoiseModel::ideal(), 15)
            .unwrap();
        assert!(
            two_sample_consistent(&mc, &c.trace.outputs, &q.trace.outputs, 4, SIGMA_BOUND).unwrap()
        );
    }

    #[test]
    fn faithfulness_improves_with_length() {
        let mc = m(0.9, 0.3);
        let tv = |n: usize| {
            let mut total = 0.0;
            for seed in 0..8 {
                let run = run_trace(&mc, Mode::Quantum, GateKind::Cnot, n, &NoiseModel::ideal(), seed)
                    .unwrap();
                total += check_blocks(&mc, &run.trace.outputs, 3, SIGMA_BOUND)
                    .unwrap()
                    .total_variation();
            }
            total / 8.0
        };
        let (small, large) = (tv(1_000), tv(100_000));
        assert!(large < small);
        // √(1/n) scaling: 100× more data, about 10× less TV
        assert!(small / large > 4.0 && small / large < 25.0, "{small} {large}");
    }

    #[test]
    fn ensemble_density_matrix() {
        let mut e = Ensemble::new();
        assert!(matches!(e.density_matrix(), Err(Error::EmptyEnsemble)));
        e.push(Ket::zero());
        e.push(Ket::one());
        e.push(Ket::one());
        e.push(Ket::zero());
        let rho = e.density_matrix().unwrap();
        assert!(rho
            .matrix()
            .max_abs_diff(DensityMatrix::maximally_mixed(2).unwrap().matrix())
            < 1e-15);
        assert_eq!(e.members().len(), 2);
    }
}
