//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are plain `nalgebra` dense matrices over `Complex64`. The
//! [`HermitianOperator`] newtype carries the Hermitian invariant, and the free
//! functions cover the tensor-network bookkeeping needed by the cloning SDP:
//! Kronecker products, partial traces and transposes over a factored space,
//! permutation operators between tensor factors, and symmetric-subspace
//! projectors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type StateVector = DVector<C64>;

/// Defect allowed at construction before a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Relative reconstruction accuracy demanded from the eigensolver.
pub const EIG_TOLERANCE: f64 = 1e-10;

const EIG_MAX_SWEEPS: usize = 10_000;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Frobenius norm.
pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

/// Standard basis vector `|i⟩` of `C^d`.
pub fn basis_vector(d: usize, i: usize) -> StateVector {
    let mut v = StateVector::zeros(d);
    v[i] = C64::new(1.0, 0.0);
    v
}

/// Outer product `|u⟩⟨v|`.
pub fn outer(u: &StateVector, v: &StateVector) -> ComplexMatrix {
    u * v.adjoint()
}

/// Kronecker (tensor) product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &StateVector, b: &StateVector) -> StateVector {
    a.kronecker(b)
}

/// `(M + M†)/2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Entrywise complex conjugate in the standard basis.
pub fn conj_vec(v: &StateVector) -> StateVector {
    v.map(|z| z.conj())
}

/// Ordered list of subsystem dimensions of a tensor-product space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactoredDims(Vec<usize>);

impl FactoredDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension(format!(
                "factor dimensions must be positive and non-empty, got {dims:?}"
            )));
        }
        Ok(Self(dims))
    }

    /// `k` copies of `C^d`.
    pub fn uniform(d: usize, k: usize) -> Result<Self> {
        Self::new(vec![d; k])
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Fails unless the product of the factors equals `dim`.
    pub fn check(&self, dim: usize) -> Result<()> {
        if self.total() != dim {
            return Err(Error::Dimension(format!(
                "factors {:?} multiply to {}, operator has dimension {}",
                self.0,
                self.total(),
                dim
            )));
        }
        Ok(())
    }

    /// Row-major digits of a flat index, most significant factor first.
    fn digits(&self, mut index: usize, out: &mut [usize]) {
        for (slot, &d) in out.iter_mut().zip(self.0.iter()).rev() {
            *slot = index % d;
            index /= d;
        }
    }

    fn flatten(dims: &[usize], digits: impl Iterator<Item = usize>) -> usize {
        digits.zip(dims.iter()).fold(0, |acc, (x, &d)| acc * d + x)
    }
}

/// Dense complex matrix known to be Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Validates Hermiticity, symmetrizing away defects below
    /// [`HERMITIAN_TOLERANCE`] (relative to the largest entry when that exceeds 1).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::Dimension(
                "Hermitian operator must have dim >= 1".into(),
            ));
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let defect = max_abs(&(&matrix - matrix.adjoint()));
        let scale = max_abs(&matrix).max(1.0);
        if defect > HERMITIAN_TOLERANCE * scale {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
        })
    }

    /// Takes the Hermitian part of a matrix that is Hermitian up to rounding,
    /// e.g. a product `A B A` of Hermitian factors.
    pub fn from_hermitian_part(matrix: &ComplexMatrix) -> Self {
        assert!(matrix.is_square(), "Hermitian part of a non-square matrix");
        Self {
            matrix: hermitian_part(matrix),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self {
            matrix: ComplexMatrix::from_diagonal(&v),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            matrix: identity(d),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(d, d),
        }
    }

    /// Rank-one projector `|v⟩⟨v|` (not normalized).
    pub fn projector(v: &StateVector) -> Self {
        Self::from_hermitian_part(&outer(v, v))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Hilbert–Schmidt inner product `⟨A, B⟩ = Tr(A B)`, real for Hermitian pairs.
    pub fn inner(&self, other: &HermitianOperator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// `⟨v|A|v⟩`.
    pub fn expectation(&self, v: &StateVector) -> f64 {
        (v.adjoint() * &self.matrix * v)[(0, 0)].re
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * C64::new(factor, 0.0),
        }
    }

    pub fn add(&self, other: &HermitianOperator) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &HermitianOperator) -> Self {
        Self {
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn kron(&self, other: &HermitianOperator) -> Self {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
        }
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::from_hermitian_part(&(u * &self.matrix * u.adjoint()))
    }

    /// Entrywise transpose (equivalently the complex conjugate for Hermitian `A`).
    pub fn transpose(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
        }
    }

    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn eig(&self) -> Result<Eigen> {
        hermitian_eig(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eig()?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.values[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eig()?.values.last().expect("dim >= 1"))
    }

    /// Operator (spectral) norm.
    pub fn operator_norm(&self) -> Result<f64> {
        let values = self.eig()?.values;
        Ok(values[0].abs().max(values[values.len() - 1].abs()))
    }
}

/// Spectral decomposition `M = V diag(values) V†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_values(|x| x)
    }

    /// `V f(Λ) V†`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &x) in self.values.iter().enumerate() {
            let mut column = scaled.column_mut(j);
            column *= C64::new(f(x), 0.0);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn vector(&self, j: usize) -> StateVector {
        self.vectors.column(j).into_owned()
    }
}

/// Eigen-decomposition without the reconstruction check. Used on hot paths
/// where the caller controls conditioning.
pub(crate) fn eig_unchecked(m: &ComplexMatrix) -> Result<Eigen> {
    let n = m.nrows();
    let scale = max_abs(m);
    if scale == 0.0 {
        return Ok(Eigen {
            values: vec![0.0; n],
            vectors: identity(n),
        });
    }
    let decomposition = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, EIG_MAX_SWEEPS)
        .ok_or(Error::Eigen {
            residual: f64::INFINITY,
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomposition.eigenvalues[a]
            .partial_cmp(&decomposition.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order
        .iter()
        .map(|&i| decomposition.eigenvalues[i])
        .collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &decomposition.eigenvectors.column(src));
    }
    Ok(Eigen { values, vectors })
}

/// Hermitian eigen-decomposition with ascending eigenvalues and orthonormal
/// eigenvectors. Fails if `‖M − VΛV†‖_max > 1e-10·‖M‖_max`.
pub fn hermitian_eig(m: &HermitianOperator) -> Result<Eigen> {
    let eigen = eig_unchecked(m.matrix())?;
    let residual = max_abs(&(m.matrix() - eigen.reconstruct()));
    let scale = max_abs(m.matrix());
    if residual > EIG_TOLERANCE * scale {
        return Err(Error::Eigen { residual });
    }
    Ok(eigen)
}

fn validate_subsystems(dims: &FactoredDims, indices: &[usize]) -> Result<()> {
    for (pos, &i) in indices.iter().enumerate() {
        if i >= dims.len() {
            return Err(Error::Dimension(format!(
                "subsystem index {i} out of range for {} factors",
                dims.len()
            )));
        }
        if indices[..pos].contains(&i) {
            return Err(Error::Dimension(format!("subsystem index {i} repeated")));
        }
    }
    Ok(())
}

/// Partial trace of a general square matrix, keeping the listed subsystems in
/// their original order.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    dims: &FactoredDims,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension(
            "partial trace of a non-square matrix".into(),
        ));
    }
    dims.check(m.nrows())?;
    validate_subsystems(dims, keep)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();
    let kept_dims: Vec<usize> = kept.iter().map(|&i| dims.as_slice()[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims.as_slice()[i]).collect();

    let n = m.nrows();
    let mut digits = vec![0; dims.len()];
    let mut kept_index = Vec::with_capacity(n);
    let mut traced_index = Vec::with_capacity(n);
    for flat in 0..n {
        dims.digits(flat, &mut digits);
        kept_index.push(FactoredDims::flatten(
            &kept_dims,
            kept.iter().map(|&i| digits[i]),
        ));
        traced_index.push(FactoredDims::flatten(
            &traced_dims,
            traced.iter().map(|&i| digits[i]),
        ));
    }

    let out_dim: usize = kept_dims.iter().product();
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for c in 0..n {
        for r in 0..n {
            if traced_index[r] == traced_index[c] {
                out[(kept_index[r], kept_index[c])] += m[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Partial trace keeping the subsystems listed in `keep`.
pub fn partial_trace(
    m: &HermitianOperator,
    dims: &FactoredDims,
    keep: &[usize],
) -> Result<HermitianOperator> {
    partial_trace_matrix(m.matrix(), dims, keep).map(|t| HermitianOperator::from_hermitian_part(&t))
}

/// `Tr_A(M)` for `M` on `A ⊗ B` with `dim A = outer`, `dim B = inner`.
pub fn trace_out_leading(m: &ComplexMatrix, outer: usize, inner: usize) -> ComplexMatrix {
    debug_assert_eq!(m.nrows(), outer * inner);
    let mut out = ComplexMatrix::zeros(inner, inner);
    for o in 0..outer {
        out += m.view((o * inner, o * inner), (inner, inner));
    }
    out
}

/// Transposes subsystem `which` in the standard basis, leaving the others untouched.
pub fn partial_transpose(
    m: &HermitianOperator,
    dims: &FactoredDims,
    which: usize,
) -> Result<HermitianOperator> {
    dims.check(m.dim())?;
    validate_subsystems(dims, &[which])?;
    let n = m.dim();
    let stride: usize = dims.as_slice()[which + 1..].iter().product();
    let d = dims.as_slice()[which];
    let digit = |flat: usize| (flat / stride) % d;
    let mut out = ComplexMatrix::zeros(n, n);
    for c in 0..n {
        let dc = digit(c);
        for r in 0..n {
            let dr = digit(r);
            let r2 = r - dr * stride + dc * stride;
            let c2 = c - dc * stride + dr * stride;
            out[(r2, c2)] = m.matrix()[(r, c)];
        }
    }
    Ok(HermitianOperator::from_hermitian_part(&out))
}

fn validate_permutation(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::InvalidPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Dimensions after moving factor `j` to position `perm[j]`.
pub fn permuted_dims(dims: &FactoredDims, perm: &[usize]) -> Result<FactoredDims> {
    if perm.len() != dims.len() {
        return Err(Error::InvalidPermutation(perm.to_vec()));
    }
    validate_permutation(perm)?;
    let mut out = vec![0; dims.len()];
    for (j, &p) in perm.iter().enumerate() {
        out[p] = dims.as_slice()[j];
    }
    FactoredDims::new(out)
}

/// Unitary that moves tensor factor `j` to position `perm[j]`:
/// `W |x_0 ⊗ … ⊗ x_{k-1}⟩ = |y_0 ⊗ … ⊗ y_{k-1}⟩` with `y_{perm[j]} = x_j`.
///
/// With this convention `W_σ W_τ = W_{σ∘τ}`.
pub fn permutation_operator(dims: &FactoredDims, perm: &[usize]) -> Result<ComplexMatrix> {
    let out_dims = permuted_dims(dims, perm)?;
    let n = dims.total();
    let mut w = ComplexMatrix::zeros(n, n);
    let mut digits = vec![0; dims.len()];
    let mut moved = vec![0; dims.len()];
    for col in 0..n {
        dims.digits(col, &mut digits);
        for (j, &p) in perm.iter().enumerate() {
            moved[p] = digits[j];
        }
        let row = FactoredDims::flatten(out_dims.as_slice(), moved.iter().copied());
        w[(row, col)] = C64::new(1.0, 0.0);
    }
    Ok(w)
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                extend(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

/// Orthogonal projector onto the symmetric subspace of `(C^d)^{⊗k}`, built as
/// the average of all `k!` factor permutations.
pub fn symmetric_projector(d: usize, k: usize) -> Result<HermitianOperator> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "symmetric projector needs d >= 1 and k >= 1, got d={d}, k={k}"
        )));
    }
    let dims = FactoredDims::uniform(d, k)?;
    let perms = permutations(k);
    let n = dims.total();
    let mut sum = ComplexMatrix::zeros(n, n);
    for perm in &perms {
        sum += permutation_operator(&dims, perm)?;
    }
    sum /= C64::new(perms.len() as f64, 0.0);
    Ok(HermitianOperator::from_hermitian_part(&sum))
}

/// `C(n, k)` as a float; exact for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
