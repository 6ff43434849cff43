//! The two-switch process and its minimal classical model.
//!
//! Two binary switches; each step one switch is picked uniformly and flipped
//! with probability `P→` if the switches are aligned or `P←` otherwise. The
//! output bit is 0 when the switches are aligned after the step and 1 when
//! they are anti-aligned. Parity is the causal state, so the process reduces
//! to a two-state [`CausalMachine`] whose output equals its destination state.
//!
//! Blocks of outputs are indexed with the first symbol as the most
//! significant bit: `x₁x₂…x_L ↦ Σ xᵢ 2^(L−i)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::qmath::shannon_entropy;
use crate::rng;

/// Degeneracy tolerance on |1 − P→ − P←|.
pub const MERGE_TOL: f64 = 1e-12;
/// Longest block for which exact block laws are computed.
pub const MAX_BLOCK_LEN: usize = 12;
/// Longest half-window for the excess-entropy estimate.
pub const MAX_EXCESS_HALF_WINDOW: usize = 6;

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SwitchConfig {
    pub b1: bool,
    pub b2: bool,
}

impl SwitchConfig {
    pub fn new(b1: bool, b2: bool) -> Self {
        SwitchConfig { b1, b2 }
    }

    /// Causal-state label: `b1 XOR b2`.
    pub fn parity(&self) -> u8 {
        (self.b1 ^ self.b2) as u8
    }

    pub fn aligned(&self) -> bool {
        self.b1 == self.b2
    }

    /// Index in 0..4 as `2·b1 + b2`.
    pub fn index(&self) -> usize {
        2 * self.b1 as usize + self.b2 as usize
    }

    pub fn from_index(i: usize) -> Self {
        SwitchConfig::new(i & 2 != 0, i & 1 != 0)
    }
}

/// Two-state Markov model on causal states {0, 1}. From state 0 the machine
/// moves to 1 with probability `p_right` (P→), from 1 to 0 with `p_left` (P←).
/// The emitted bit is the destination state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalMachine {
    p_right: f64,
    p_left: f64,
}

impl CausalMachine {
    pub fn new(p_right: f64, p_left: f64) -> Result<Self> {
        check_probability("p_right", p_right)?;
        check_probability("p_left", p_left)?;
        Ok(CausalMachine { p_right, p_left })
    }

    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn p_right(&self) -> f64 {
        self.p_right
    }

    pub fn p_left(&self) -> f64 {
        self.p_left
    }

    pub fn is_symmetric(&self) -> bool {
        self.p_right == self.p_left
    }

    /// Probability of leaving `state`.
    pub fn flip_probability(&self, state: u8) -> f64 {
        if state == 0 {
            self.p_right
        } else {
            self.p_left
        }
    }

    /// Row-stochastic transition matrix `T[from][to]`.
    pub fn transition_matrix(&self) -> [[f64; 2]; 2] {
        [
            [1.0 - self.p_right, self.p_right],
            [self.p_left, 1.0 - self.p_left],
        ]
    }

    /// Distribution of the next output given the current state.
    pub fn output_distribution(&self, state: u8) -> [f64; 2] {
        self.transition_matrix()[state as usize]
    }

    /// Second eigenvalue of the transition matrix, 1 − P→ − P←.
    pub fn relaxation_eigenvalue(&self) -> f64 {
        1.0 - self.p_right - self.p_left
    }

    pub fn step(&self, state: u8, rng: &mut impl Rng) -> u8 {
        if rng.random::<f64>() < self.flip_probability(state) {
            state ^ 1
        } else {
            state
        }
    }
}

/// Parameters of the two-switch system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwitchProcess {
    /// One flip probability regardless of the switches' alignment.
    Symmetric { p: f64 },
    /// Flip with `p_aligned` when aligned and `p_anti` otherwise.
    Asymmetric { p_aligned: f64, p_anti: f64 },
}

impl SwitchProcess {
    fn probabilities(&self) -> (f64, f64) {
        match *self {
            SwitchProcess::Symmetric { p } => (p, p),
            SwitchProcess::Asymmetric { p_aligned, p_anti } => (p_aligned, p_anti),
        }
    }

    /// Flip probability of the chosen switch in configuration `cfg`.
    pub fn flip_probability(&self, cfg: SwitchConfig) -> f64 {
        let (aligned, anti) = self.probabilities();
        if cfg.aligned() {
            aligned
        } else {
            anti
        }
    }
}

impl From<CausalMachine> for SwitchProcess {
    fn from(m: CausalMachine) -> Self {
        SwitchProcess::Asymmetric {
            p_aligned: m.p_right,
            p_anti: m.p_left,
        }
    }
}

/// One step of the switch system: pick a switch uniformly, flip it with the
/// alignment-dependent probability, emit 0 if aligned afterwards.
pub fn two_switch_step(
    cfg: SwitchConfig,
    process: &SwitchProcess,
    rng: &mut impl Rng,
) -> (SwitchConfig, u8) {
    let pick_first = rng.random::<bool>();
    let flip = rng.random::<f64>() < process.flip_probability(cfg);
    let mut next = cfg;
    if flip {
        if pick_first {
            next.b1 = !next.b1;
        } else {
            next.b2 = !next.b2;
        }
    }
    (next, next.parity())
}

/// Parity is the causal state: P→ is the flip probability out of the aligned
/// class and P← out of the anti-aligned class.
pub fn reduce_to_causal_machine(process: &SwitchProcess) -> Result<CausalMachine> {
    let (aligned, anti) = process.probabilities();
    CausalMachine::new(aligned, anti)
}

/// The four-configuration Markov chain underlying the switch system.
#[derive(Debug, Clone, Copy)]
pub struct SwitchChain {
    process: SwitchProcess,
}

impl SwitchChain {
    pub fn new(process: SwitchProcess) -> Result<Self> {
        let (a, b) = process.probabilities();
        check_probability("p_aligned", a)?;
        check_probability("p_anti", b)?;
        Ok(SwitchChain { process })
    }

    /// `T[from][to]` over configurations indexed by [`SwitchConfig::index`].
    pub fn transition_matrix(&self) -> [[f64; 4]; 4] {
        let mut t = [[0.0; 4]; 4];
        for (from, row) in t.iter_mut().enumerate() {
            let f = self.process.flip_probability(SwitchConfig::from_index(from));
            row[from] += 1.0 - f;
            // each switch chosen with probability 1/2
            row[from ^ 2] += 0.5 * f;
            row[from ^ 1] += 0.5 * f;
        }
        t
    }

    /// Stationary law over configurations: the parity class weight is split
    /// evenly between its two configurations.
    pub fn stationary_distribution(&self) -> Result<[f64; 4]> {
        let machine = reduce_to_causal_machine(&self.process)?;
        let [w0, w1] = stationary_distribution(&machine)?;
        Ok(std::array::from_fn(|i| {
            let w = if SwitchConfig::from_index(i).aligned() {
                w0
            } else {
                w1
            };
            0.5 * w
        }))
    }

    /// Exact law of length-`len` output blocks from the stationary start.
    pub fn block_distribution(&self, len: usize) -> Result<Vec<f64>> {
        check_block_len(len, MAX_BLOCK_LEN)?;
        let t = self.transition_matrix();
        let start = self.stationary_distribution()?;
        Ok((0..1usize << len)
            .map(|block| {
                let mut alpha = start;
                for sym in block_symbols(block, len) {
                    let mut next = [0.0; 4];
                    for (to, n) in next.iter_mut().enumerate() {
                        if SwitchConfig::from_index(to).parity() == sym {
                            *n = (0..4).map(|from| alpha[from] * t[from][to]).sum();
                        }
                    }
                    alpha = next;
                }
                alpha.iter().sum()
            })
            .collect())
    }
}

/// Result of merging causal states with identical conditional futures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinimalMachine {
    /// Memoryless: every step emits 1 with probability `p_one`.
    Single { p_one: f64 },
    Pair(CausalMachine),
}

impl MinimalMachine {
    pub fn num_states(&self) -> usize {
        match self {
            MinimalMachine::Single { .. } => 1,
            MinimalMachine::Pair(_) => 2,
        }
    }

    /// Two-state presentation with the same output law.
    pub fn to_machine(&self) -> CausalMachine {
        match *self {
            MinimalMachine::Single { p_one } => CausalMachine {
                p_right: p_one,
                p_left: 1.0 - p_one,
            },
            MinimalMachine::Pair(m) => m,
        }
    }
}

/// Merges the two causal states when their conditional output laws agree,
/// i.e. when 1 − P→ = P←.
pub fn merge_equivalent_states(machine: &CausalMachine) -> MinimalMachine {
    if (1.0 - machine.p_right - machine.p_left).abs() <= MERGE_TOL {
        MinimalMachine::Single {
            p_one: machine.p_right,
        }
    } else {
        MinimalMachine::Pair(*machine)
    }
}

/// (℘₀, ℘₁) solving ℘₀P→ = ℘₁P←. The period-2 machine P→ = P← = 1 gets the
/// time-averaged (½, ½); P→ = P← = 0 has no unique answer.
pub fn stationary_distribution(machine: &CausalMachine) -> Result<[f64; 2]> {
    let total = machine.p_right + machine.p_left;
    if total == 0.0 {
        return Err(Error::ReducibleChain);
    }
    Ok([machine.p_left / total, machine.p_right / total])
}

/// Statistical complexity C_c in bits.
pub fn classical_complexity(machine: &CausalMachine) -> Result<f64> {
    match merge_equivalent_states(machine) {
        MinimalMachine::Single { .. } => Ok(0.0),
        MinimalMachine::Pair(m) => shannon_entropy(&stationary_distribution(&m)?),
    }
}

/// Entropy of a memory that stores both switches.
pub fn naive_switch_entropy(machine: &CausalMachine) -> Result<f64> {
    let chain = SwitchChain::new(SwitchProcess::from(*machine))?;
    shannon_entropy(&chain.stationary_distribution()?)
}

fn check_block_len(len: usize, max: usize) -> Result<()> {
    if (1..=max).contains(&len) {
        Ok(())
    } else {
        Err(Error::BlockLength { len, max })
    }
}

/// Symbols of a block index, first symbol first.
pub fn block_symbols(block: usize, len: usize) -> impl Iterator<Item = u8> {
    (0..len).rev().map(move |shift| ((block >> shift) & 1) as u8)
}

/// "0110"-style rendering of a block index.
pub fn block_label(block: usize, len: usize) -> String {
    block_symbols(block, len)
        .map(|s| if s == 0 { '0' } else { '1' })
        .collect()
}

/// Probability of one output string under the stationary machine.
pub fn string_probability(machine: &CausalMachine, symbols: &[u8]) -> Result<f64> {
    let pi = stationary_distribution(machine)?;
    let t = machine.transition_matrix();
    let Some((&first, rest)) = symbols.split_first() else {
        return Ok(1.0);
    };
    // emission = destination, so X₁ is itself stationary
    let mut p = pi[first as usize];
    let mut prev = first;
    for &s in rest {
        p *= t[prev as usize][s as usize];
        prev = s;
    }
    Ok(p)
}

/// Exact law of length-`len` output blocks from the stationary start.
pub fn block_distribution(machine: &CausalMachine, len: usize) -> Result<Vec<f64>> {
    check_block_len(len, MAX_BLOCK_LEN)?;
    let pi = stationary_distribution(machine)?;
    let t = machine.transition_matrix();
    Ok((0..1usize << len)
        .map(|block| {
            let mut alpha = pi;
            for sym in block_symbols(block, len) {
                let s = sym as usize;
                let mass = alpha[0] * t[0][s] + alpha[1] * t[1][s];
                alpha = [0.0; 2];
                alpha[s] = mass;
            }
            alpha[0] + alpha[1]
        })
        .collect())
}

/// Shannon entropy of the length-`len` block law.
pub fn block_entropy(machine: &CausalMachine, len: usize) -> Result<f64> {
    shannon_entropy(&block_distribution(machine, len)?)
}

/// E_L = I(X₁…X_L ; X_{L+1}…X_{2L}) = 2H(L) − H(2L).
pub fn excess_entropy(machine: &CausalMachine, half_window: usize) -> Result<f64> {
    check_block_len(half_window, MAX_EXCESS_HALF_WINDOW)?;
    let h_half = block_entropy(machine, half_window)?;
    let h_full = block_entropy(machine, 2 * half_window)?;
    Ok((2.0 * h_half - h_full).max(0.0))
}

/// Where a sampled sequence starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Start {
    /// Initial state drawn from the stationary distribution.
    #[default]
    Stationary,
    State(u8),
    /// Start in state 0 and discard this many steps.
    BurnIn(usize),
}

/// Emitted outputs and the causal state after each step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub outputs: Vec<u8>,
    pub states: Vec<u8>,
    pub seed: u64,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }
}

pub(crate) fn initial_state(
    machine: &CausalMachine,
    start: Start,
    rng: &mut impl Rng,
) -> Result<u8> {
    Ok(match start {
        Start::Stationary => {
            let [w0, _] = stationary_distribution(machine)?;
            (rng.random::<f64>() >= w0) as u8
        }
        Start::State(s) => s & 1,
        Start::BurnIn(steps) => (0..steps).fold(0, |s, _| machine.step(s, rng)),
    })
}

pub fn sample_sequence(machine: &CausalMachine, n: usize, seed: u64) -> Result<Trace> {
    sample_sequence_from(machine, n, seed, Start::Stationary)
}

pub fn sample_sequence_from(
    machine: &CausalMachine,
    n: usize,
    seed: u64,
    start: Start,
) -> Result<Trace> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let mut rng = rng::stream(seed, 0);
    let mut state = initial_state(machine, start, &mut rng)?;
    let mut states = Vec::with_capacity(n);
    for _ in 0..n {
        state = machine.step(state, &mut rng);
        states.push(state);
    }
    Ok(Trace {
        outputs: states.clone(),
        states,
        seed,
    })
}

/// Overlapping-window counts of length-`len` blocks; empty when the
/// sequence is shorter than `len`.
pub fn block_counts(outputs: &[u8], len: usize) -> Vec<u64> {
    let mut counts = vec![0u64; 1 << len];
    if outputs.len() < len || len == 0 {
        return counts;
    }
    let mask = (1usize << len) - 1;
    let mut window = 0usize;
    for (i, &x) in outputs.iter().enumerate() {
        window = ((window << 1) | (x as usize & 1)) & mask;
        if i + 1 >= len {
            counts[window] += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid() -> Vec<f64> {
        (1..=9).map(|k| k as f64 / 10.0).collect()
    }

    fn tv(a: &[f64], b: &[f64]) -> f64 {
        0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
    }

    /// Stationary law of a 4-state chain by Gaussian elimination on
    /// (Tᵀ − 1)π = 0 with one row replaced by Σπ = 1.
    fn solve_stationary4(t: [[f64; 4]; 4]) -> [f64; 4] {
        let mut a = [[0.0; 5]; 4];
        for i in 0..4 {
            for j in 0..4 {
                a[i][j] = t[j][i] - if i == j { 1.0 } else { 0.0 };
            }
        }
        a[3] = [1.0, 1.0, 1.0, 1.0, 1.0];
        for col in 0..4 {
            let piv = (col..4)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap();
            a.swap(col, piv);
            for row in 0..4 {
                if row != col {
                    let f = a[row][col] / a[col][col];
                    let pivot = a[col];
                    for (v, p) in a[row].iter_mut().zip(pivot).skip(col) {
                        *v -= f * p;
                    }
                }
            }
        }
        std::array::from_fn(|i| a[i][4] / a[i][i])
    }

    /// Brute-force block law: sum over every hidden path of the 4-state chain.
    fn enumerate_switch_blocks(p_aligned: f64, p_anti: f64, len: usize) -> Vec<f64> {
        let chain = SwitchChain::new(SwitchProcess::Asymmetric { p_aligned, p_anti }).unwrap();
        let t = chain.transition_matrix();
        let pi = solve_stationary4(t);
        let mut out = vec![0.0; 1 << len];
        let paths = 4usize.pow(len as u32 + 1);
        for path in 0..paths {
            let cfgs: Vec<usize> = (0..=len).map(|k| (path / 4usize.pow(k as u32)) % 4).collect();
            let mut p = pi[cfgs[0]];
            let mut block = 0;
            for k in 1..=len {
                p *= t[cfgs[k - 1]][cfgs[k]];
                block = (block << 1) | SwitchConfig::from_index(cfgs[k]).parity() as usize;
            }
            out[block] += p;
        }
        out
    }

    #[test]
    fn step_with_zero_probability_never_moves() {
        let process = SwitchProcess::Symmetric { p: 0.0 };
        let mut rng = rng::stream(1, 0);
        let mut cfg = SwitchConfig::default();
        for _ in 0..1000 {
            let (next, x) = two_switch_step(cfg, &process, &mut rng);
            assert_eq!(next, SwitchConfig::default());
            assert_eq!(x, 0);
            cfg = next;
        }
    }

    #[test]
    fn step_with_certain_flip_alternates_parity() {
        let process = SwitchProcess::Symmetric { p: 1.0 };
        let mut rng = rng::stream(2, 0);
        let mut cfg = SwitchConfig::default();
        for k in 0..1000 {
            let (next, x) = two_switch_step(cfg, &process, &mut rng);
            assert_eq!(x, ((k + 1) % 2) as u8);
            assert_eq!(next.parity(), x);
            cfg = next;
        }
    }

    #[test]
    fn step_parity_flip_frequency() {
        let p = 0.8;
        let n = 100_000;
        let process = SwitchProcess::Symmetric { p };
        let mut rng = rng::stream(3, 0);
        let mut cfg = SwitchConfig::default();
        let mut flips = 0;
        for _ in 0..n {
            let (next, _) = two_switch_step(cfg, &process, &mut rng);
            flips += (next.parity() != cfg.parity()) as u32;
            cfg = next;
        }
        let freq = flips as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() < 3.0 * sigma, "{freq}");
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(
            reduce_to_causal_machine(&SwitchProcess::Symmetric { p: 0.3 }).unwrap(),
            CausalMachine::new(0.3, 0.3).unwrap()
        );
        assert_eq!(
            reduce_to_causal_machine(&SwitchProcess::Asymmetric {
                p_aligned: 0.9,
                p_anti: 0.3
            })
            .unwrap(),
            CausalMachine::new(0.9, 0.3).unwrap()
        );
    }

    #[test]
    fn reduced_block_law_matches_switch_enumeration() {
        for &a in &grid() {
            for &b in &grid() {
                let m = reduce_to_causal_machine(&SwitchProcess::Asymmetric {
                    p_aligned: a,
                    p_anti: b,
                })
                .unwrap();
                for len in 1..=6 {
                    let oracle = enumerate_switch_blocks(a, b, len);
                    let exact = block_distribution(&m, len).unwrap();
                    assert!(tv(&oracle, &exact) < 1e-12, "({a},{b}) L={len}");
                }
            }
        }
        let chain = SwitchChain::new(SwitchProcess::Symmetric { p: 0.8 }).unwrap();
        let m = CausalMachine::symmetric(0.8).unwrap();
        for len in 1..=8 {
            let d = tv(
                &chain.block_distribution(len).unwrap(),
                &block_distribution(&m, len).unwrap(),
            );
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn switch_stationary_matches_linear_solve() {
        for &a in &grid() {
            for &b in &grid() {
                let chain =
                    SwitchChain::new(SwitchProcess::Asymmetric { p_aligned: a, p_anti: b })
                        .unwrap();
                let oracle = solve_stationary4(chain.transition_matrix());
                let got = chain.stationary_distribution().unwrap();
                for i in 0..4 {
                    assert_abs_diff_eq!(oracle[i], got[i], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn merge_examples() {
        let m = |a, b| CausalMachine::new(a, b).unwrap();
        assert_eq!(merge_equivalent_states(&m(0.5, 0.5)).num_states(), 1);
        assert_eq!(merge_equivalent_states(&m(0.7, 0.3)).num_states(), 1);
        assert_eq!(merge_equivalent_states(&m(0.9, 0.3)).num_states(), 2);
    }

    #[test]
    fn stationary_examples() {
        let s = stationary_distribution(&CausalMachine::symmetric(0.8).unwrap()).unwrap();
        assert_eq!(s, [0.5, 0.5]);
        let s = stationary_distribution(&CausalMachine::new(0.9, 0.3).unwrap()).unwrap();
        // ℘₀·0.9 = ℘₁·0.3, ℘₀ + ℘₁ = 1  ⇒  ℘₀ = 1/4
        assert_abs_diff_eq!(s[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1], 0.75, epsilon = 1e-15);
        let s = stationary_distribution(&CausalMachine::new(0.0, 0.3).unwrap()).unwrap();
        assert_eq!(s, [1.0, 0.0]);
        assert_eq!(
            stationary_distribution(&CausalMachine::new(0.0, 0.0).unwrap()),
            Err(Error::ReducibleChain)
        );
        let s = stationary_distribution(&CausalMachine::symmetric(1.0).unwrap()).unwrap();
        assert_eq!(s, [0.5, 0.5]);
    }

    #[test]
    fn classical_complexity_examples() {
        let c = |a, b| classical_complexity(&CausalMachine::new(a, b).unwrap()).unwrap();
        assert_eq!(c(0.3, 0.3), 1.0);
        assert_eq!(c(0.5, 0.5), 0.0);
        assert_abs_diff_eq!(c(0.9, 0.3), 0.8113, epsilon = 5e-5);
        for &p in &grid() {
            let want = if p == 0.5 { 0.0 } else { 1.0 };
            assert_eq!(c(p, p), want);
        }
        assert!(matches!(
            classical_complexity(&CausalMachine::new(0.0, 0.0).unwrap()),
            Err(Error::ReducibleChain)
        ));
    }

    #[test]
    fn naive_entropy_examples() {
        let n = |a, b| naive_switch_entropy(&CausalMachine::new(a, b).unwrap()).unwrap();
        assert_abs_diff_eq!(n(0.8, 0.8), 2.0, epsilon = 1e-12);
        // 1 + H(1/4) from the independently solved 4-state stationary law
        let chain = SwitchChain::new(SwitchProcess::Asymmetric {
            p_aligned: 0.9,
            p_anti: 0.3,
        })
        .unwrap();
        let oracle = shannon_entropy(&solve_stationary4(chain.transition_matrix())).unwrap();
        assert_abs_diff_eq!(oracle, 1.8113, epsilon = 5e-5);
        assert_abs_diff_eq!(n(0.9, 0.3), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(n(0.0, 0.3), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn block_distribution_examples() {
        let sym = CausalMachine::symmetric(0.8).unwrap();
        assert_eq!(block_distribution(&sym, 1).unwrap(), vec![0.5, 0.5]);
        let b2 = block_distribution(&sym, 2).unwrap();
        // enumeration: "01" and "10"
        assert_abs_diff_eq!(b2[1] + b2[2], 0.8, epsilon = 1e-15);
        let fair = CausalMachine::symmetric(0.5).unwrap();
        for p in block_distribution(&fair, 2).unwrap() {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
        }
        assert!(matches!(
            block_distribution(&sym, 0),
            Err(Error::BlockLength { .. })
        ));
        assert!(matches!(
            block_distribution(&sym, 13),
            Err(Error::BlockLength { .. })
        ));
        let total: f64 = block_distribution(&CausalMachine::new(0.9, 0.3).unwrap(), 12)
            .unwrap()
            .iter()
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn string_probability_agrees_with_block_law() {
        let m = CausalMachine::new(0.9, 0.3).unwrap();
        let law = block_distribution(&m, 5).unwrap();
        for (block, p) in law.iter().enumerate() {
            let syms: Vec<u8> = block_symbols(block, 5).collect();
            assert_abs_diff_eq!(string_probability(&m, &syms).unwrap(), *p, epsilon = 1e-15);
        }
    }

    #[test]
    fn excess_entropy_examples() {
        let fair = CausalMachine::symmetric(0.5).unwrap();
        for l in 1..=6 {
            assert_abs_diff_eq!(excess_entropy(&fair, l).unwrap(), 0.0, epsilon = 1e-12);
        }
        let m = CausalMachine::symmetric(0.8).unwrap();
        // two-block enumeration: H(X₁) = 1, H(X₁X₂) = 1 + H(0.8)
        let b2 = block_distribution(&m, 2).unwrap();
        let h2: f64 = b2.iter().map(|p| -p * p.log2()).sum();
        let oracle = 2.0 - h2;
        assert_abs_diff_eq!(oracle, 0.2781, epsilon = 5e-5);
        assert_abs_diff_eq!(excess_entropy(&m, 1).unwrap(), oracle, epsilon = 1e-12);
        let e: Vec<f64> = (1..=6).map(|l| excess_entropy(&m, l).unwrap()).collect();
        assert!(e.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(excess_entropy(&m, 7).is_err());
    }

    #[test]
    fn excess_entropy_bounded_by_classical_complexity() {
        for &a in &grid() {
            for &b in &grid() {
                let m = CausalMachine::new(a, b).unwrap();
                let cc = classical_complexity(&m).unwrap();
                for l in 1..=6 {
                    assert!(excess_entropy(&m, l).unwrap() <= cc + 1e-9);
                }
            }
        }
    }

    #[test]
    fn sample_examples() {
        let frozen = CausalMachine::new(0.0, 0.0).unwrap();
        let t = sample_sequence_from(&frozen, 10, 5, Start::State(0)).unwrap();
        assert_eq!(t.outputs, vec![0; 10]);
        assert!(sample_sequence(&frozen, 10, 5).is_err());

        let m = CausalMachine::symmetric(0.8).unwrap();
        assert_eq!(
            sample_sequence(&m, 100, 9).unwrap(),
            sample_sequence(&m, 100, 9).unwrap()
        );
        assert_ne!(
            sample_sequence(&m, 100, 9).unwrap().outputs,
            sample_sequence(&m, 100, 10).unwrap().outputs
        );
        assert_eq!(sample_sequence(&m, 0, 1), Err(Error::EmptySequence));
        let t = sample_sequence_from(&m, 50, 1, Start::BurnIn(100)).unwrap();
        assert_eq!(t.outputs, t.states);
    }

    #[test]
    fn block_counts_use_overlapping_windows() {
        let c = block_counts(&[0, 1, 1, 0], 2);
        assert_eq!(c, vec![0, 1, 1, 1]);
        assert_eq!(block_counts(&[1], 2), vec![0; 4]);
    }

    proptest! {
        #[test]
        fn stationary_balance(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            prop_assume!(a + b > 0.0);
            let m = CausalMachine::new(a, b).unwrap();
            let [w0, w1] = stationary_distribution(&m).unwrap();
            prop_assert!((w0 * a - w1 * b).abs() < 1e-12);
            prop_assert!((w0 + w1 - 1.0).abs() < 1e-12);
        }

        #[test]
        fn merge_is_idempotent(a in 0.0f64..=1.0, b in 0.0f64..=1.0, snap in any::<bool>()) {
            let b = if snap { 1.0 - a } else { b };
            let once = merge_equivalent_states(&CausalMachine::new(a, b).unwrap());
            let twice = merge_equivalent_states(&once.to_machine());
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn traces_obey_emission_rule(a in 0.0f64..=1.0, b in 0.01f64..=1.0, seed in any::<u64>()) {
            let m = CausalMachine::new(a, b).unwrap();
            let t = sample_sequence(&m, 64, seed).unwrap();
            prop_assert_eq!(&t.outputs, &t.states);
            prop_assert_eq!(t.seed, seed);
        }
    }
}
