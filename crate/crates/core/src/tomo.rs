//! Simulated single-qubit state tomography.
//!
//! Counts are drawn binomially from the exact Pauli expectation values,
//! the state is recovered by linear inversion (Bloch vector projected back
//! into the unit ball when shot noise pushes it out), and entropy error bars
//! come from a parametric bootstrap of the counts.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qmath::{clipped_spectrum, von_neumann_entropy, DensityMatrix, Ket, Matrix, C64};
use crate::rng;

pub const MIN_BOOTSTRAP_ROUNDS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    fn index(self) -> usize {
        self as usize
    }
}

/// Outcome counts (n₊, n₋) in the X, Y and Z bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TomographyCounts {
    shots_per_basis: u64,
    counts: [(u64, u64); 3],
}

impl TomographyCounts {
    pub fn new(shots_per_basis: u64, counts: [(u64, u64); 3]) -> Result<Self> {
        if shots_per_basis == 0 {
            return Err(Error::Config("shots_per_basis must be ≥ 1".into()));
        }
        if let Some((p, m)) = counts.iter().find(|(p, m)| p + m != shots_per_basis) {
            return Err(Error::Config(format!(
                "counts ({p}, {m}) do not add up to {shots_per_basis} shots"
            )));
        }
        Ok(TomographyCounts {
            shots_per_basis,
            counts,
        })
    }

    pub fn shots_per_basis(&self) -> u64 {
        self.shots_per_basis
    }

    pub fn get(&self, basis: Basis) -> (u64, u64) {
        self.counts[basis.index()]
    }

    /// Raw estimate (n₊ − n₋)/N per basis, before any projection.
    pub fn bloch_estimate(&self) -> [f64; 3] {
        let n = self.shots_per_basis as f64;
        self.counts.map(|(p, m)| (p as f64 - m as f64) / n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographyResult {
    pub rho_hat: DensityMatrix,
    pub entropy: f64,
    pub entropy_std: f64,
    pub raw: TomographyCounts,
}

fn sample_counts(bloch: [f64; 3], shots: u64, rng: &mut impl Rng) -> [(u64, u64); 3] {
    bloch.map(|r| {
        let p_plus = (0.5 * (1.0 + r)).clamp(0.0, 1.0);
        let plus = Binomial::new(shots, p_plus)
            .expect("probability in [0, 1]")
            .sample(rng);
        (plus, shots - plus)
    })
}

/// Finite-shot Pauli measurements of a single-qubit state.
pub fn simulate_counts(
    state: &DensityMatrix,
    shots_per_basis: u64,
    rng: &mut impl Rng,
) -> Result<TomographyCounts> {
    if shots_per_basis == 0 {
        return Err(Error::Config("shots_per_basis must be ≥ 1".into()));
    }
    let bloch = state.bloch_vector()?;
    TomographyCounts::new(shots_per_basis, sample_counts(bloch, shots_per_basis, rng))
}

/// Same as [`simulate_counts`] for a weighted list of prepared kets.
pub fn simulate_ensemble_counts(
    ensemble: &[(f64, Ket)],
    shots_per_basis: u64,
    rng: &mut impl Rng,
) -> Result<TomographyCounts> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let total: f64 = ensemble.iter().map(|(w, _)| w).sum();
    let normalized: Vec<(f64, Ket)> = ensemble.iter().map(|(w, k)| (w / total, *k)).collect();
    simulate_counts(&DensityMatrix::mixture(&normalized)?, shots_per_basis, rng)
}

/// Bloch vector of the counts, scaled back onto the unit sphere if it
/// landed outside the ball.
pub fn projected_bloch(counts: &TomographyCounts) -> [f64; 3] {
    let r = counts.bloch_estimate();
    let len = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len > 1.0 {
        r.map(|x| x / len)
    } else {
        r
    }
}

/// Linear inversion ρ̂ = ½(1 + r·σ) with physicality projection.
pub fn reconstruct_rho(counts: &TomographyCounts) -> DensityMatrix {
    let [x, y, z] = projected_bloch(counts);
    let m = Matrix::from_rows(&[
        C64::new(0.5 * (1.0 + z), 0.0),
        C64::new(0.5 * x, -0.5 * y),
        C64::new(0.5 * x, 0.5 * y),
        C64::new(0.5 * (1.0 - z), 0.0),
    ])
    .expect("2×2");
    clip_to_physical(m)
}

// Rounding can leave an eigenvalue a hair outside [0, 1] after projection.
fn clip_to_physical(m: Matrix) -> DensityMatrix {
    if let Ok(rho) = DensityMatrix::new(m) {
        if clipped_spectrum(&rho).is_ok() {
            return rho;
        }
    }
    let eig = crate::qmath::eig_hermitian(&m).expect("Hermitian by construction");
    let clipped: Vec<f64> = eig.values.iter().map(|l| l.clamp(0.0, 1.0)).collect();
    let total: f64 = clipped.iter().sum();
    let mut acc = Matrix::zeros(2).unwrap();
    for (l, v) in clipped.iter().zip(&eig.vectors) {
        acc = acc + Matrix::outer(v, v).scale_real(l / total);
    }
    DensityMatrix::new((acc + acc.adjoint()).scale_real(0.5)).expect("clipped spectrum")
}

/// Entropy of the reconstruction with a parametric-bootstrap standard
/// deviation. Rounds run in parallel on streams derived from one draw of `rng`.
pub fn entropy_with_error(
    counts: &TomographyCounts,
    bootstrap_rounds: usize,
    rng: &mut impl Rng,
) -> Result<TomographyResult> {
    if bootstrap_rounds < MIN_BOOTSTRAP_ROUNDS {
        return Err(Error::Config(format!(
            "bootstrap_rounds must be ≥ {MIN_BOOTSTRAP_ROUNDS}, got {bootstrap_rounds}"
        )));
    }
    let rho_hat = reconstruct_rho(counts);
    let entropy = von_neumann_entropy(&rho_hat)?;
    let shots = counts.shots_per_basis;
    let observed = counts.bloch_estimate();
    let base_seed: u64 = rng.random();

    let samples = (0..bootstrap_rounds)
        .into_par_iter()
        .map(|round| {
            let mut r = rng::stream(base_seed, round as u64);
            let resampled = TomographyCounts {
                shots_per_basis: shots,
                counts: sample_counts(observed, shots, &mut r),
            };
            von_neumann_entropy(&reconstruct_rho(&resampled))
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(TomographyResult {
        rho_hat,
        entropy: entropy.clamp(0.0, 1.0),
        entropy_std: var.sqrt(),
        raw: *counts,
    })
}
