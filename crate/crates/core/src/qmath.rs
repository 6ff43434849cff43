//! Small dense complex linear algebra for one- and two-qubit spaces.
//!
//! Everything here works on fixed-capacity storage (at most 4 amplitudes,
//! at most 4×4 matrices), so values are `Copy` and never touch the heap.
//! Two-qubit objects use a single, fixed ordering: the model qubit is the
//! first (most significant) tensor factor and the meter qubit the second,
//! i.e. basis index `2 * model + meter`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Normalization / Hermiticity / unitarity tolerance.
pub const TOL: f64 = 1e-12;
/// Most negative eigenvalue that is still clipped to zero.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exactly zero in entropies.
pub const ENTROPY_CUTOFF: f64 = 1e-12;
/// Distribution normalization tolerance for Shannon entropy.
pub const DIST_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 4 => Ok(()),
        d => Err(Error::InvalidDimension(d)),
    }
}

/// Which qubit of the two-qubit register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Qubit {
    Model,
    Meter,
}

impl Qubit {
    pub fn other(self) -> Qubit {
        match self {
            Qubit::Model => Qubit::Meter,
            Qubit::Meter => Qubit::Model,
        }
    }

    /// Bit value of this qubit in a two-qubit basis index.
    pub fn bit_of(self, index: usize) -> usize {
        match self {
            Qubit::Model => (index >> 1) & 1,
            Qubit::Meter => index & 1,
        }
    }
}

/// A normalized state vector of dimension 2 or 4.
#[derive(Clone, Copy, PartialEq)]
pub struct Ket {
    dim: usize,
    amps: [C64; 4],
}

impl Ket {
    pub fn new(amps: &[C64]) -> Result<Self> {
        let ket = Self::from_slice(amps)?;
        let n = ket.norm_sqr();
        if (n - 1.0).abs() > TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(ket)
    }

    /// Builds a ket from real amplitudes; must already be normalized.
    pub fn real(amps: &[f64]) -> Result<Self> {
        let c: Vec<C64> = amps.iter().map(|&a| C64::new(a, 0.0)).collect();
        Self::new(&c)
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amps: &[C64]) -> Result<Self> {
        let mut ket = Self::from_slice(amps)?;
        let n = ket.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n * n));
        }
        for a in ket.amps.iter_mut() {
            *a /= n;
        }
        Ok(ket)
    }

    fn from_slice(amps: &[C64]) -> Result<Self> {
        check_dim(amps.len())?;
        let mut buf = [ZERO; 4];
        buf[..amps.len()].copy_from_slice(amps);
        Ok(Ket {
            dim: amps.len(),
            amps: buf,
        })
    }

    /// Logical basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::InvalidDimension(index));
        }
        let mut amps = [ZERO; 4];
        amps[index] = ONE;
        Ok(Ket { dim, amps })
    }

    pub fn zero() -> Self {
        Self::basis(2, 0).unwrap()
    }

    pub fn one() -> Self {
        Self::basis(2, 1).unwrap()
    }

    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::real(&[h, h]).unwrap()
    }

    /// (|00⟩ + |11⟩)/√2.
    pub fn bell_phi_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::real(&[h, 0.0, 0.0, h]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps[..self.dim]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(self
            .amplitudes()
            .iter()
            .zip(other.amplitudes())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |⟨self|other⟩|, the phase-insensitive overlap used for comparing kets.
    pub fn overlap(&self, other: &Ket) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// True when the kets agree up to a global phase.
    pub fn same_ray(&self, other: &Ket, tol: f64) -> bool {
        self.overlap(other).is_ok_and(|o| (1.0 - o).abs() <= tol)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix(Matrix::outer(self, self))
    }

    pub fn apply(&self, u: &Unitary) -> Result<Ket> {
        let amps = u.0.apply_raw(self)?;
        Ok(Ket {
            dim: self.dim,
            amps,
        })
    }
}

impl fmt::Debug for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.amplitudes()).finish()
    }
}

/// Square complex matrix of dimension 2 or 4, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: [C64; 16],
}

impl Matrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Matrix {
            dim,
            data: [ZERO; 16],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.set(i, i, ONE);
        }
        Ok(m)
    }

    /// Builds from row-major entries; length must be 4 or 16.
    pub fn from_rows(entries: &[C64]) -> Result<Self> {
        let dim = match entries.len() {
            4 => 2,
            16 => 4,
            n => return Err(Error::InvalidDimension(n)),
        };
        let mut data = [ZERO; 16];
        data[..entries.len()].copy_from_slice(entries);
        Ok(Matrix { dim, data })
    }

    pub fn from_real_rows(entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_rows(&c)
    }

    /// |a⟩⟨b|.
    pub fn outer(a: &Ket, b: &Ket) -> Self {
        let dim = a.dim;
        let mut m = Matrix {
            dim,
            data: [ZERO; 16],
        };
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, a.amps[i] * b.amps[j].conj());
            }
        }
        m
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn pauli_y() -> Self {
        Self::from_rows(&[ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_real_rows(&[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data[..self.dim * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.set(i, j, self.get(j, i).conj());
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        m.data.iter_mut().for_each(|x| *x *= s);
        m
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn try_mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: rhs.dim,
            });
        }
        let n = self.dim;
        let mut out = Matrix {
            dim: n,
            data: [ZERO; 16],
        };
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.get(k, j);
                }
            }
        }
        Ok(out)
    }

    fn apply_raw(&self, ket: &Ket) -> Result<[C64; 4]> {
        if self.dim != ket.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: ket.dim,
            });
        }
        let mut out = [ZERO; 4];
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = (0..self.dim).map(|j| self.get(i, j) * ket.amps[j]).sum();
        }
        Ok(out)
    }

    /// ⟨ket|M|ket⟩.
    pub fn expectation(&self, ket: &Ket) -> Result<C64> {
        let mk = self.apply_raw(ket)?;
        Ok((0..self.dim).map(|i| ket.amps[i].conj() * mk[i]).sum())
    }

    fn binary(&self, rhs: &Matrix, op: impl Fn(C64, C64) -> C64) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let mut out = *self;
        for (o, r) in out.data.iter_mut().zip(rhs.data.iter()) {
            *o = op(*o, *r);
        }
        out
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[C64]> = (0..self.dim)
            .map(|i| &self.data[i * self.dim..(i + 1) * self.dim])
            .collect();
        f.debug_list().entries(rows).finish()
    }
}

impl Add for Matrix {
    type Output = Matrix;
    fn add(self, rhs: Matrix) -> Matrix {
        self.binary(&rhs, |a, b| a + b)
    }
}

impl Sub for Matrix {
    type Output = Matrix;
    fn sub(self, rhs: Matrix) -> Matrix {
        self.binary(&rhs, |a, b| a - b)
    }
}

impl Mul for Matrix {
    type Output = Matrix;
    fn mul(self, rhs: Matrix) -> Matrix {
        self.try_mul(&rhs).expect("matrix dimension mismatch")
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct DensityMatrix(Matrix);

impl DensityMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        let herm = m.hermiticity_error();
        if herm > TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::NonPhysical(format!("trace {tr}")));
        }
        let eig = eig_hermitian(&m)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NonPhysical(format!("negative eigenvalue {min:e}")));
        }
        Ok(DensityMatrix(m))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Ok(DensityMatrix(
            Matrix::identity(dim)?.scale_real(1.0 / dim as f64),
        ))
    }

    /// Σ wᵢ |ψᵢ⟩⟨ψᵢ| for non-negative weights summing to one.
    pub fn mixture(members: &[(f64, Ket)]) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyEnsemble)?;
        let mut acc = Matrix::zeros(first.1.dim())?;
        let mut total = 0.0;
        for (w, k) in members {
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::InvalidDistribution(format!("weight {w}")));
            }
            if k.dim() != acc.dim() {
                return Err(Error::DimensionMismatch {
                    left: acc.dim(),
                    right: k.dim(),
                });
            }
            acc = acc + Matrix::outer(k, k).scale_real(*w);
            total += w;
        }
        if (total - 1.0).abs() > DIST_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(DensityMatrix(acc.scale_real(1.0 / total)))
    }

    /// Single-qubit state from a Bloch vector with |r| ≤ 1.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let [x, y, z] = r;
        let m = Matrix::from_rows(&[
            C64::new(0.5 * (1.0 + z), 0.0),
            C64::new(0.5 * x, -0.5 * y),
            C64::new(0.5 * x, 0.5 * y),
            C64::new(0.5 * (1.0 - z), 0.0),
        ])?;
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0.get(i, j)
    }

    /// Tr(ρ·O) for a Hermitian observable, returned as a real number.
    pub fn expectation(&self, observable: &Matrix) -> Result<f64> {
        Ok(self.0.try_mul(observable)?.trace().re)
    }

    /// (⟨X⟩, ⟨Y⟩, ⟨Z⟩) of a single-qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: 2,
            });
        }
        Ok([
            self.expectation(&Matrix::pauli_x())?,
            self.expectation(&Matrix::pauli_y())?,
            self.expectation(&Matrix::pauli_z())?,
        ])
    }
}

/// Matrix with U·U† = 1.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Unitary(Matrix);

impl Unitary {
    pub fn new(m: Matrix) -> Result<Self> {
        let err = m
            .try_mul(&m.adjoint())?
            .max_abs_diff(&Matrix::identity(m.dim())?);
        if err > TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(Unitary(m))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Ok(Unitary(Matrix::identity(dim)?))
    }

    pub fn pauli_x() -> Self {
        Unitary(Matrix::pauli_x())
    }

    pub fn pauli_y() -> Self {
        Unitary(Matrix::pauli_y())
    }

    pub fn pauli_z() -> Self {
        Unitary(Matrix::pauli_z())
    }

    /// Controlled-X with the model qubit as control and the meter as target.
    pub fn cnot() -> Self {
        controlled(&Unitary::pauli_x(), Qubit::Model)
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Unitary(self.0.adjoint())
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &Unitary) -> Result<Self> {
        Ok(Unitary(self.0.try_mul(&other.0)?))
    }

    /// U ρ U†.
    pub fn conjugate(&self, rho: &Matrix) -> Result<Matrix> {
        self.0.try_mul(rho)?.try_mul(&self.0.adjoint())
    }
}

/// Controlled-`u` on the two-qubit register: `u` acts on the non-control
/// qubit when the control qubit is in logical |1⟩.
pub fn controlled(u: &Unitary, control: Qubit) -> Unitary {
    assert_eq!(u.dim(), 2, "controlled() needs a single-qubit unitary");
    let target = control.other();
    let mut m = Matrix::zeros(4).unwrap();
    for row in 0..4 {
        for col in 0..4 {
            let value = if control.bit_of(row) != control.bit_of(col) {
                ZERO
            } else if control.bit_of(row) == 0 {
                if row == col {
                    ONE
                } else {
                    ZERO
                }
            } else {
                u.0.get(target.bit_of(row), target.bit_of(col))
            };
            m.set(row, col, value);
        }
    }
    Unitary(m)
}

/// Kronecker product of two single-qubit objects; `self` becomes the
/// model (most significant) factor.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

impl Tensor for Ket {
    fn tensor(&self, other: &Ket) -> Result<Ket> {
        if self.dim != 2 || other.dim != 2 {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut amps = [ZERO; 4];
        for i in 0..2 {
            for j in 0..2 {
                amps[2 * i + j] = self.amps[i] * other.amps[j];
            }
        }
        Ok(Ket { dim: 4, amps })
    }
}

impl Tensor for Matrix {
    fn tensor(&self, other: &Matrix) -> Result<Matrix> {
        if self.dim != 2 || other.dim != 2 {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut m = Matrix::zeros(4)?;
        for (i, j, k, l) in index_quads() {
            m.set(2 * i + k, 2 * j + l, self.get(i, j) * other.get(k, l));
        }
        Ok(m)
    }
}

impl Tensor for Unitary {
    fn tensor(&self, other: &Unitary) -> Result<Unitary> {
        Ok(Unitary(self.0.tensor(&other.0)?))
    }
}

fn index_quads() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..16).map(|n| ((n >> 3) & 1, (n >> 2) & 1, (n >> 1) & 1, n & 1))
}

/// Shannon entropy in bits with 0·log 0 = 0.
pub fn shannon_entropy(dist: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &p in dist {
        if !(0.0..=1.0 + DIST_TOL).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidDistribution(format!("entry {p}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > DIST_TOL {
        return Err(Error::InvalidDistribution(format!("sums to {total}")));
    }
    let h: f64 = dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    Ok(h.max(0.0))
}

/// Binary entropy H(p, 1−p).
pub fn binary_entropy(p: f64) -> Result<f64> {
    shannon_entropy(&[p, 1.0 - p])
}

/// Spectrum of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// `vectors[k]` belongs to `values[k]`.
    pub vectors: Vec<Ket>,
}

impl Eigen {
    /// Σ λₖ |vₖ⟩⟨vₖ|.
    pub fn reconstruct(&self) -> Matrix {
        let dim = self.vectors[0].dim();
        self.values
            .iter()
            .zip(&self.vectors)
            .fold(Matrix::zeros(dim).unwrap(), |acc, (l, v)| {
                acc + Matrix::outer(v, v).scale_real(*l)
            })
    }
}

/// Hermitian eigendecomposition. Dimension 2 uses the closed-form roots of
/// the characteristic polynomial; dimension 4 uses nalgebra's Hermitian solver.
pub fn eig_hermitian(m: &Matrix) -> Result<Eigen> {
    let herm = m.hermiticity_error();
    let scale = m.entries().iter().map(|x| x.norm()).fold(1.0, f64::max);
    if herm > TOL * scale {
        return Err(Error::NotHermitian(herm));
    }
    match m.dim() {
        2 => Ok(eig2(m)),
        4 => Ok(eig4(m)),
        d => Err(Error::InvalidDimension(d)),
    }
}

fn eig2(m: &Matrix) -> Eigen {
    let a = m.get(0, 0).re;
    let d = m.get(1, 1).re;
    // average the off-diagonals so tiny Hermiticity defects cancel
    let b = 0.5 * (m.get(0, 1) + m.get(1, 0).conj());
    let mean = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let r = half_gap.hypot(b.norm());
    let hi = mean + r;
    let lo = mean - r;

    if b.norm() == 0.0 {
        let (v_hi, v_lo) = if a >= d {
            (Ket::zero(), Ket::one())
        } else {
            (Ket::one(), Ket::zero())
        };
        return Eigen {
            values: vec![a.max(d), a.min(d)],
            vectors: vec![v_hi, v_lo],
        };
    }

    // (M − λ)v = 0 has two candidate null vectors; take the better conditioned one.
    let vec_for = |l: f64| {
        let v1 = [b, C64::new(l - a, 0.0)];
        let v2 = [C64::new(l - d, 0.0), b.conj()];
        let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
        let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
        let v = if n1 >= n2 { v1 } else { v2 };
        Ket::normalized(&v).expect("non-degenerate eigenvector")
    };
    let v_hi = vec_for(hi);
    // orthogonal complement of v_hi
    let [p, q] = [v_hi.amps[0], v_hi.amps[1]];
    let v_lo = Ket::normalized(&[-q.conj(), p.conj()]).unwrap();
    Eigen {
        values: vec![hi, lo],
        vectors: vec![v_hi, v_lo],
    }
}

fn eig4(m: &Matrix) -> Eigen {
    let mut h = Matrix4::<C64>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            h[(i, j)] = 0.5 * (m.get(i, j) + m.get(j, i).conj());
        }
    }
    let se = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&x, &y| se.eigenvalues[y].total_cmp(&se.eigenvalues[x]));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let col: Vec<C64> = (0..4).map(|i| se.eigenvectors[(i, k)]).collect();
            Ket::normalized(&col).expect("eigenvector")
        })
        .collect();
    Eigen { values, vectors }
}

/// Eigenvalues of a density matrix as a probability vector: values in
/// [−1e−10, 1e−12) are set to zero, anything more negative is an error.
pub fn clipped_spectrum(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let eig = eig_hermitian(rho.matrix())?;
    eig.values
        .into_iter()
        .map(|l| {
            if l < -PSD_TOL {
                Err(Error::NonPhysical(format!("negative eigenvalue {l:e}")))
            } else if l < ENTROPY_CUTOFF {
                Ok(0.0)
            } else {
                Ok(l)
            }
        })
        .collect()
}

/// −Tr(ρ log₂ ρ).
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut spec = clipped_spectrum(rho)?;
    let total: f64 = spec.iter().sum();
    spec.iter_mut().for_each(|l| *l /= total);
    shannon_entropy(&spec)
}

/// ⟨target|ρ|target⟩.
pub fn fidelity(rho: &DensityMatrix, target: &Ket) -> Result<f64> {
    if rho.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: target.dim(),
        });
    }
    let f = rho.matrix().expectation(target)?;
    Ok(f.re.clamp(0.0, 1.0))
}

/// ½‖a − b‖₁.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let diff = *a.matrix() - *b.matrix();
    let eig = eig_hermitian(&diff)?;
    Ok(0.5 * eig.values.iter().map(|l| l.abs()).sum::<f64>())
}

/// Rotation about the Bloch-sphere Y axis: |0⟩ ↦ cos(θ/2)|0⟩ + sin(θ/2)|1⟩.
pub fn ry(theta: f64) -> Unitary {
    let (s, c) = (0.5 * theta).sin_cos();
    Unitary(Matrix::from_real_rows(&[c, -s, s, c]).unwrap())
}

/// The 16 two-qubit Paulis σ_a ⊗ σ_b, identity first.
pub fn two_qubit_paulis() -> [Unitary; 16] {
    let singles = [
        Unitary::identity(2).unwrap(),
        Unitary::pauli_x(),
        Unitary::pauli_y(),
        Unitary::pauli_z(),
    ];
    std::array::from_fn(|k| singles[k / 4].tensor(&singles[k % 4]).unwrap())
}
