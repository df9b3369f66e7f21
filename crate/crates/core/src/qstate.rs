//! Dense complex linear algebra and pure-state kernel.
//!
//! Every quantum engine in the crate works on a [`HilbertSpace`] made of
//! labelled tensor factors. Basis indices follow the usual Kronecker
//! convention: the first factor is the most significant digit.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::units::HBAR;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest total dimension accepted by any constructor.
pub const MAX_DIM: usize = 4096;

/// Tolerance on the Euclidean norm of a [`QuantumState`].
pub const NORM_TOL: f64 = 1e-12;

/// Tolerance on `max|A - A†|`, relative to `max(1, max|A|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QStateError {
    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),
    #[error("total dimension {0} exceeds the supported maximum {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("operator is not Hermitian (max |A - A^dagger| = {0:e})")]
    NonHermitianInput(f64),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("state norm {0} differs from 1")]
    NotNormalized(f64),
}

pub type Result<T> = std::result::Result<T, QStateError>;

/// One tensor factor of a [`HilbertSpace`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labelled tensor factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    factors: Vec<Factor>,
}

impl HilbertSpace {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<Factor> = factors
            .into_iter()
            .map(|(label, dim)| Factor {
                label: label.into(),
                dim,
            })
            .collect();
        if factors.is_empty() {
            return Err(QStateError::InvalidSpace("no factors".into()));
        }
        let mut total: usize = 1;
        for (i, f) in factors.iter().enumerate() {
            if f.dim < 2 {
                return Err(QStateError::InvalidSpace(format!(
                    "factor `{}` has dimension {} (< 2)",
                    f.label, f.dim
                )));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(QStateError::InvalidSpace(format!(
                    "duplicate label `{}`",
                    f.label
                )));
            }
            total = total.saturating_mul(f.dim);
            if total > MAX_DIM {
                return Err(QStateError::DimensionTooLarge(total));
            }
        }
        Ok(Self { factors })
    }

    /// A single two-level factor.
    pub fn qubit(label: &str) -> Self {
        Self {
            factors: vec![Factor {
                label: label.to_string(),
                dim: 2,
            }],
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    /// Concatenates the factors of `self` and `other`. Labels of `other` that
    /// collide with an existing label get a numeric suffix.
    pub fn tensor(&self, other: &HilbertSpace) -> Result<HilbertSpace> {
        let mut factors = self.factors.clone();
        for f in &other.factors {
            let mut label = f.label.clone();
            let mut k = 2;
            while factors.iter().any(|g| g.label == label) {
                label = format!("{}_{}", f.label, k);
                k += 1;
            }
            factors.push(Factor { label, dim: f.dim });
        }
        HilbertSpace::new(factors.into_iter().map(|f| (f.label, f.dim)))
    }

    /// Digits of a basis index, one per factor.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % f.dim;
            index /= f.dim;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&d, f)| acc * f.dim + d)
    }

    /// Same factor dimensions, labels ignored.
    pub fn same_shape(&self, other: &HilbertSpace) -> bool {
        self.dims() == other.dims()
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    space: HilbertSpace,
    amplitudes: CVector,
}

impl QuantumState {
    /// Wraps amplitudes that are already normalized to within [`NORM_TOL`].
    pub fn new(space: HilbertSpace, amplitudes: CVector) -> Result<Self> {
        check_len(&space, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QStateError::NotNormalized(norm));
        }
        Ok(Self { space, amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(space: HilbertSpace, amplitudes: CVector) -> Result<Self> {
        check_len(&space, amplitudes.len())?;
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(QStateError::NotNormalized(norm));
        }
        Ok(Self {
            space,
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    pub fn from_slice(space: HilbertSpace, amps: &[C64]) -> Result<Self> {
        Self::normalized(space, CVector::from_column_slice(amps))
    }

    pub fn basis(space: HilbertSpace, index: usize) -> Result<Self> {
        let dim = space.dim();
        if index >= dim {
            return Err(QStateError::SpaceMismatch(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self {
            space,
            amplitudes: amps,
        })
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &QuantumState) -> Result<QuantumState> {
        let space = self.space.tensor(&other.space)?;
        let amps = self.amplitudes.kronecker(&other.amplitudes);
        Ok(Self {
            space,
            amplitudes: amps,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QuantumState) -> Result<C64> {
        if !self.space.same_shape(&other.space) {
            return Err(QStateError::SpaceMismatch(
                "inner product of unequal spaces".into(),
            ));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &QuantumState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if !self.space.same_shape(&op.space) {
            return Err(QStateError::SpaceMismatch(
                "expectation value on unequal spaces".into(),
            ));
        }
        Ok(self.amplitudes.dotc(&(&op.matrix * &self.amplitudes)))
    }

    /// Reduced density matrix on the factors listed in `keep` (kept in
    /// ascending factor order).
    pub fn reduced_density_matrix(&self, keep: &[usize]) -> Result<CMatrix> {
        let (a, _) = validate_cut(&self.space, keep, true)?;
        let m = self.bipartite_matrix(&a)?;
        Ok(&m * m.adjoint())
    }

    /// Amplitudes rearranged as a `dim(A) × dim(B)` matrix where `A` is the
    /// sorted factor set `a` and `B` its complement.
    fn bipartite_matrix(&self, a: &[usize]) -> Result<CMatrix> {
        let dims = self.space.dims();
        let b: Vec<usize> = (0..dims.len()).filter(|i| !a.contains(i)).collect();
        let da: usize = a.iter().map(|&i| dims[i]).product();
        let db: usize = b.iter().map(|&i| dims[i]).product();
        let mut m = CMatrix::zeros(da, db);
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let digits = self.space.digits(idx);
            let ia = a.iter().fold(0, |acc, &f| acc * dims[f] + digits[f]);
            let ib = b.iter().fold(0, |acc, &f| acc * dims[f] + digits[f]);
            m[(ia, ib)] = *amp;
        }
        Ok(m)
    }
}

fn check_len(space: &HilbertSpace, len: usize) -> Result<()> {
    if space.dim() != len {
        return Err(QStateError::SpaceMismatch(format!(
            "vector length {len} does not match dimension {}",
            space.dim()
        )));
    }
    Ok(())
}

/// Validates a factor subset. With `allow_full` the subset may cover every
/// factor (a reduced state on everything is the full projector).
fn validate_cut(
    space: &HilbertSpace,
    cut: &[usize],
    allow_full: bool,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = space.n_factors();
    if cut.is_empty() {
        return Err(QStateError::InvalidPartition("empty side".into()));
    }
    let mut a = cut.to_vec();
    a.sort_unstable();
    if a.windows(2).any(|w| w[0] == w[1]) {
        return Err(QStateError::InvalidPartition(
            "repeated factor index".into(),
        ));
    }
    if let Some(&bad) = a.iter().find(|&&i| i >= n) {
        return Err(QStateError::InvalidPartition(format!(
            "factor index {bad} out of range ({n} factors)"
        )));
    }
    let b: Vec<usize> = (0..n).filter(|i| !a.contains(i)).collect();
    if b.is_empty() && !allow_full {
        return Err(QStateError::InvalidPartition("complement is empty".into()));
    }
    Ok((a, b))
}

/// Square matrix acting on a [`HilbertSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CMatrix,
    hermitian: bool,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(QStateError::SpaceMismatch(format!(
                "matrix is {}x{}, space has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            space,
            matrix,
            hermitian: false,
        })
    }

    /// Builds an operator and marks it Hermitian after checking
    /// `max|A - A†|`.
    pub fn hermitian(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let mut op = Self::new(space, matrix)?;
        let dev = hermitian_deviation(&op.matrix);
        if dev > HERMITIAN_TOL * scale_of(&op.matrix) {
            return Err(QStateError::NonHermitianInput(dev));
        }
        op.hermitian = true;
        Ok(op)
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: CMatrix::zeros(d, d),
            hermitian: true,
        }
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: CMatrix::identity(d, d),
            hermitian: true,
        }
    }

    /// `local` acting on factor `factor`, identity elsewhere.
    pub fn embed(space: &HilbertSpace, factor: usize, local: &CMatrix) -> Result<Self> {
        let dims = space.dims();
        if factor >= dims.len() || local.nrows() != dims[factor] || local.ncols() != dims[factor] {
            return Err(QStateError::SpaceMismatch(format!(
                "cannot embed on factor {factor}"
            )));
        }
        let mut m = CMatrix::identity(1, 1);
        for (i, &d) in dims.iter().enumerate() {
            let piece = if i == factor {
                local.clone()
            } else {
                CMatrix::identity(d, d)
            };
            m = m.kronecker(&piece);
        }
        let herm = hermitian_deviation(local) <= HERMITIAN_TOL * scale_of(local);
        Ok(Self {
            space: space.clone(),
            matrix: m,
            hermitian: herm,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.matrix)
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same(other)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn scale(&self, factor: f64) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * C64::new(factor, 0.0),
            hermitian: self.hermitian,
        }
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        self.check_same(other)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix,
            hermitian: false,
        })
    }

    pub fn apply(&self, psi: &QuantumState) -> Result<CVector> {
        if !self.space.same_shape(&psi.space) {
            return Err(QStateError::SpaceMismatch(
                "operator applied to state of another space".into(),
            ));
        }
        Ok(&self.matrix * &psi.amplitudes)
    }

    fn check_same(&self, other: &Operator) -> Result<()> {
        if !self.space.same_shape(&other.space) {
            return Err(QStateError::SpaceMismatch(
                "operators act on different spaces".into(),
            ));
        }
        Ok(())
    }
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn scale_of(m: &CMatrix) -> f64 {
    m.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()))
}

/// Kronecker product `a ⊗ b`. The resulting space concatenates the factor
/// lists (see [`HilbertSpace::tensor`] for label collisions).
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let space = a
        .space
        .tensor(&b.space)
        .expect("kron: combined dimension exceeds MAX_DIM");
    Operator {
        space,
        matrix: a.matrix.kronecker(&b.matrix),
        hermitian: a.hermitian && b.hermitian,
    }
}

/// Spectral decomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, column `k` belongs to `values[k]`.
    pub vectors: CMatrix,
}

impl Eigen {
    /// `V diag(f(λ)) V†`.
    pub fn apply_function(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            for i in 0..d {
                scaled[(i, k)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply_function(|l| C64::new(l, 0.0))
    }
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
pub fn eigh(h: &Operator) -> Result<Eigen> {
    let dev = hermitian_deviation(&h.matrix);
    if dev > HERMITIAN_TOL * scale_of(&h.matrix) {
        return Err(QStateError::NonHermitianInput(dev));
    }
    Ok(eigh_matrix(&h.matrix))
}

/// Eigendecomposition of a matrix already known to be Hermitian. The input
/// is symmetrized before diagonalization.
pub fn eigh_matrix(m: &CMatrix) -> Eigen {
    let d = m.nrows();
    if d == 0 {
        return Eigen {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let se = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(d, d);
    for (col, &src) in order.iter().enumerate() {
        vectors.set_column(col, &se.eigenvectors.column(src));
    }
    Eigen { values, vectors }
}

/// `exp(-i·g)` for a Hermitian (dimensionless) generator `g`.
pub fn exp_minus_i(g: &CMatrix) -> CMatrix {
    eigh_matrix(g).apply_function(|l| C64::new(0.0, -l).exp())
}

/// Propagator `exp(-i·h·t/ħ)` with `h` in μeV and `t` in ns.
pub fn propagator(h: &Operator, t: f64) -> Result<CMatrix> {
    let eig = eigh(h)?;
    Ok(eig.apply_function(|l| C64::new(0.0, -l * t / HBAR).exp()))
}

/// `exp(-i·h·t/ħ)·psi`, computed through the eigendecomposition of `h`.
pub fn evolve(h: &Operator, psi: &QuantumState, t: f64) -> Result<QuantumState> {
    if !h.space.same_shape(&psi.space) {
        return Err(QStateError::SpaceMismatch(
            "Hamiltonian and state live in different spaces".into(),
        ));
    }
    let eig = eigh(h)?;
    Ok(evolve_with(&eig, psi, t))
}

fn evolve_with(eig: &Eigen, psi: &QuantumState, t: f64) -> QuantumState {
    let coeffs = eig.vectors.adjoint() * &psi.amplitudes;
    let phased = CVector::from_iterator(
        coeffs.len(),
        coeffs
            .iter()
            .zip(&eig.values)
            .map(|(c, &l)| c * C64::new(0.0, -l * t / HBAR).exp()),
    );
    QuantumState {
        space: psi.space.clone(),
        amplitudes: &eig.vectors * phased,
    }
}

/// Reusable propagator for one time-independent Hamiltonian.
///
/// The Hamiltonian is split into the connected components of its non-zero
/// pattern; each block is diagonalized on its own. Conserved quantities
/// (magnetization, valley) thus never cost a full-size diagonalization.
#[derive(Clone, Debug)]
pub struct Propagator {
    space: HilbertSpace,
    blocks: Vec<(Vec<usize>, Eigen)>,
}

impl Propagator {
    pub fn new(h: &Operator) -> Result<Self> {
        let dev = hermitian_deviation(&h.matrix);
        if dev > HERMITIAN_TOL * scale_of(&h.matrix) {
            return Err(QStateError::NonHermitianInput(dev));
        }
        let blocks = connected_blocks(&h.matrix)
            .into_iter()
            .map(|idx| {
                let n = idx.len();
                let sub = CMatrix::from_fn(n, n, |i, j| h.matrix[(idx[i], idx[j])]);
                (idx, eigh_matrix(&sub))
            })
            .collect();
        Ok(Self {
            space: h.space.clone(),
            blocks,
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|(_, e)| e.values.iter().copied())
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn evolve(&self, psi: &QuantumState, t: f64) -> Result<QuantumState> {
        if !self.space.same_shape(&psi.space) {
            return Err(QStateError::SpaceMismatch(
                "propagator and state live in different spaces".into(),
            ));
        }
        let mut out = CVector::zeros(psi.amplitudes.len());
        for (idx, eig) in &self.blocks {
            let n = idx.len();
            let local = CVector::from_iterator(n, idx.iter().map(|&i| psi.amplitudes[i]));
            if local.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            let coeffs = eig.vectors.adjoint() * local;
            let phased = CVector::from_iterator(
                n,
                coeffs
                    .iter()
                    .zip(&eig.values)
                    .map(|(c, &l)| c * C64::new(0.0, -l * t / HBAR).exp()),
            );
            let back = &eig.vectors * phased;
            for (k, &i) in idx.iter().enumerate() {
                out[i] = back[k];
            }
        }
        Ok(QuantumState {
            space: psi.space.clone(),
            amplitudes: out,
        })
    }
}

fn connected_blocks(m: &CMatrix) -> Vec<Vec<usize>> {
    let d = m.nrows();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..d {
        for j in (i + 1)..d {
            if m[(i, j)] != C64::new(0.0, 0.0) || m[(j, i)] != C64::new(0.0, 0.0) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..d {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Von Neumann entropy (bits) of the reduced state on the factor set `cut`.
pub fn entanglement_entropy(psi: &QuantumState, cut: &[usize]) -> Result<f64> {
    let (a, b) = validate_cut(&psi.space, cut, false)?;
    // The smaller side gives the cheaper reduced density matrix.
    let dims = psi.space.dims();
    let da: usize = a.iter().map(|&i| dims[i]).product();
    let db: usize = b.iter().map(|&i| dims[i]).product();
    let side = if da <= db { a } else { b };
    let rho = psi.reduced_density_matrix(&side)?;
    Ok(von_neumann_bits(&rho))
}

/// `-Tr ρ log₂ ρ` for a density matrix.
pub fn von_neumann_bits(rho: &CMatrix) -> f64 {
    eigh_matrix(rho)
        .values
        .iter()
        .filter(|&&p| p > 1e-300)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Pauli matrices and two-level helpers.
pub mod pauli {
    use super::{CMatrix, C64};

    fn m(a: [[C64; 2]; 2]) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]])
    }

    const O: C64 = C64::new(0.0, 0.0);
    const ONE: C64 = C64::new(1.0, 0.0);
    const I: C64 = C64::new(0.0, 1.0);

    pub fn id() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    pub fn x() -> CMatrix {
        m([[O, ONE], [ONE, O]])
    }

    pub fn y() -> CMatrix {
        m([[O, -I], [I, O]])
    }

    /// `diag(1, -1)`: +1 on basis index 0.
    pub fn z() -> CMatrix {
        m([[ONE, O], [O, -ONE]])
    }

    /// Raising operator `|0⟩⟨1|` (index 0 is the "up" state).
    pub fn raise() -> CMatrix {
        m([[O, ONE], [O, O]])
    }

    pub fn lower() -> CMatrix {
        m([[O, O], [ONE, O]])
    }
}
