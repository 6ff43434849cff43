//! Statistical checks of sampled output sequences against exact block laws.
//!
//! Empirical block frequencies use overlapping windows, which are correlated
//! both through the overlap and through the Markov memory. The variance used
//! for the k-σ bounds is the exact finite-sample variance of the window mean
//! under the stationary machine, not the i.i.d. multinomial one.

use crate::error::Result;
use crate::process::{
    block_counts, block_distribution, block_label, block_symbols, stationary_distribution,
    string_probability, CausalMachine,
};

/// Default width of the acceptance bands.
pub const SIGMA_BOUND: f64 = 4.0;

/// Exact Var of the overlapping-window frequency of `block` over a sequence
/// of `n` stationary outputs.
pub fn block_frequency_variance(
    machine: &CausalMachine,
    block: usize,
    len: usize,
    n: usize,
) -> Result<f64> {
    if n < len {
        return Ok(0.0);
    }
    let windows = n - len + 1;
    let syms: Vec<u8> = block_symbols(block, len).collect();
    let p = string_probability(machine, &syms)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    let pi = stationary_distribution(machine)?;
    let lambda = machine.relaxation_eigenvalue();
    let first = syms[0] as usize;
    let last = syms[len - 1] as usize;
    // P(block at t and at t+k) for k ≥ len: p · T^m[last][first] · p / π_first
    let tail = p * p / pi[first];

    let mut sum = 0.0;
    let mut lambda_pow = 1.0;
    for k in 1..windows {
        let joint = if k < len {
            if syms[k..] == syms[..len - k] {
                let mut merged = syms[..k].to_vec();
                merged.extend_from_slice(&syms);
                string_probability(machine, &merged)?
            } else {
                0.0
            }
        } else {
            lambda_pow *= lambda;
            let delta = if first == last { 1.0 } else { 0.0 };
            tail * (pi[first] + lambda_pow * (delta - pi[first]))
        };
        let gamma = joint - p * p;
        sum += (1.0 - k as f64 / windows as f64) * gamma;
        if k >= len && lambda_pow.abs() < 1e-18 {
            break;
        }
    }
    let var = (p * (1.0 - p) + 2.0 * sum) / windows as f64;
    Ok(var.max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheck {
    pub len: usize,
    pub block: usize,
    pub count: u64,
    pub empirical: f64,
    pub exact: f64,
    pub sigma: f64,
    pub bound: f64,
}

impl BlockCheck {
    pub fn label(&self) -> String {
        block_label(self.block, self.len)
    }

    pub fn deviation(&self) -> f64 {
        (self.empirical - self.exact).abs()
    }

    pub fn passed(&self) -> bool {
        self.deviation() <= self.bound
    }
}

/// Per-block comparisons plus total variation for one block length.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub len: usize,
    pub windows: usize,
    pub cells: Vec<BlockCheck>,
}

impl BlockReport {
    pub fn total_variation(&self) -> f64 {
        0.5 * self.cells.iter().map(BlockCheck::deviation).sum::<f64>()
    }

    /// TV bound implied by the per-cell bands.
    pub fn total_variation_bound(&self) -> f64 {
        0.5 * self.cells.iter().map(|c| c.bound).sum::<f64>()
    }

    pub fn passed(&self) -> bool {
        self.cells.iter().all(BlockCheck::passed)
    }
}

/// Compares empirical overlapping-window block frequencies with the exact
/// law at `k_sigma` standard deviations. Cells of probability zero must be
/// empty; other cells get an extra 1/windows of slack for count granularity.
pub fn check_blocks(
    machine: &CausalMachine,
    outputs: &[u8],
    len: usize,
    k_sigma: f64,
) -> Result<BlockReport> {
    let exact = block_distribution(machine, len)?;
    let counts = block_counts(outputs, len);
    let windows = outputs.len().saturating_sub(len - 1);
    let cells = exact
        .iter()
        .zip(&counts)
        .enumerate()
        .map(|(block, (&p, &count))| {
            let var = block_frequency_variance(machine, block, len, outputs.len())?;
            let sigma = var.sqrt();
            let empirical = if windows == 0 {
                0.0
            } else {
                count as f64 / windows as f64
            };
            let slack = if p > 0.0 && windows > 0 {
                1.0 / windows as f64
            } else {
                0.0
            };
            Ok(BlockCheck {
                len,
                block,
                count,
                empirical,
                exact: p,
                sigma,
                bound: k_sigma * sigma + slack,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockReport {
        len,
        windows,
        cells,
    })
}

/// Two-sample comparison of block frequencies from two independent
/// sequences of the same machine; passes when every cell agrees within
/// `k_sigma` combined standard deviations.
pub fn two_sample_consistent(
    machine: &CausalMachine,
    a: &[u8],
    b: &[u8],
    len: usize,
    k_sigma: f64,
) -> Result<bool> {
    let ra = check_blocks(machine, a, len, k_sigma)?;
    let rb = check_blocks(machine, b, len, k_sigma)?;
    Ok(ra.cells.iter().zip(&rb.cells).all(|(x, y)| {
        let sigma = x.sigma.hypot(y.sigma);
        let slack = if x.exact > 0.0 {
            1.0 / ra.windows.max(1) as f64 + 1.0 / rb.windows.max(1) as f64
        } else {
            0.0
        };
        (x.empirical - y.empirical).abs() <= k_sigma * sigma + slack
    }))
}
