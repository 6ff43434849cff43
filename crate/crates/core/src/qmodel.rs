//! Quantum causal states and the memory they need.
//!
//! Causal state 0 is stored as |0̃⟩ = √(1−P→)|0⟩ + √P→|1⟩ and causal state 1
//! as |1̃⟩ = √P←|0⟩ + √(1−P←)|1⟩. Reading the logical basis of |s̃⟩ gives the
//! next output with exactly the machine's conditional law, and because the
//! two kets overlap, the stationary mixture of them has less entropy than
//! the classical memory.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::process::{stationary_distribution, CausalMachine};
use crate::qmath::{controlled, ry, von_neumann_entropy, DensityMatrix, Ket, Qubit, Unitary, TOL};

/// The encoding |s̃⟩ of both causal states; valid for every machine,
/// including reducible ones.
pub fn causal_kets(machine: &CausalMachine) -> (Ket, Ket) {
    let (r, l) = (machine.p_right(), machine.p_left());
    let ket0 = Ket::real(&[(1.0 - r).sqrt(), r.sqrt()]).expect("normalized by construction");
    let ket1 = Ket::real(&[l.sqrt(), (1.0 - l).sqrt()]).expect("normalized by construction");
    (ket0, ket1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumModel {
    pub machine: CausalMachine,
    pub ket0: Ket,
    pub ket1: Ket,
    pub stationary: [f64; 2],
}

impl QuantumModel {
    pub fn ket(&self, state: u8) -> &Ket {
        if state == 0 {
            &self.ket0
        } else {
            &self.ket1
        }
    }

    /// ⟨0̃|1̃⟩, real and non-negative for this encoding.
    pub fn overlap(&self) -> f64 {
        self.ket0.inner(&self.ket1).unwrap().re
    }
}

pub fn quantum_causal_states(machine: &CausalMachine) -> Result<QuantumModel> {
    let stationary = stationary_distribution(machine)?;
    let (ket0, ket1) = causal_kets(machine);
    Ok(QuantumModel {
        machine: *machine,
        ket0,
        ket1,
        stationary,
    })
}

/// ρ = ℘₀|0̃⟩⟨0̃| + ℘₁|1̃⟩⟨1̃|.
pub fn steady_state_rho(model: &QuantumModel) -> DensityMatrix {
    let [w0, w1] = model.stationary;
    DensityMatrix::mixture(&[(w0, model.ket0), (w1, model.ket1)])
        .expect("stationary weights form a distribution")
}

/// C_q = −Tr(ρ log₂ ρ) of the steady-state memory.
pub fn quantum_complexity(machine: &CausalMachine) -> Result<f64> {
    let model = quantum_causal_states(machine)?;
    von_neumann_entropy(&steady_state_rho(&model))
}

/// Controlled-Û built as Û = V X V† with V a Y rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuGate {
    /// Y-rotation angle of V, in [−π/2, π/2].
    pub theta: f64,
    pub v: Unitary,
    pub u: Unitary,
    pub cu: Unitary,
    pub control: Qubit,
}

/// Synthesizes Û with Û|0̃⟩ = |1̃⟩, with the model qubit as control.
pub fn construct_cu(machine: &CausalMachine) -> Result<CuGate> {
    construct_cu_with_control(machine, Qubit::Model)
}

pub fn construct_cu_with_control(machine: &CausalMachine, control: Qubit) -> Result<CuGate> {
    let (ket0, ket1) = causal_kets(machine);
    // V X V† reflects the real half-angle φ to θ + π/2 − φ, so the angle that
    // takes |0̃⟩ (at φ₀) to |1̃⟩ (at φ₁) is θ = φ₀ + φ₁ − π/2.
    let phi0 = machine.p_right().sqrt().atan2((1.0 - machine.p_right()).sqrt());
    let phi1 = (1.0 - machine.p_left()).sqrt().atan2(machine.p_left().sqrt());
    let theta = if machine.is_symmetric() {
        0.0
    } else {
        phi0 + phi1 - FRAC_PI_2
    };
    let v = ry(theta);
    let u = v.compose(&Unitary::pauli_x())?.compose(&v.adjoint())?;

    let mapped = ket0.apply(&u)?;
    let residual = mapped
        .amplitudes()
        .iter()
        .zip(ket1.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual >= TOL {
        return Err(Error::Synthesis(residual));
    }
    Ok(CuGate {
        theta,
        v,
        u,
        cu: controlled(&u, control),
        control,
    })
}
