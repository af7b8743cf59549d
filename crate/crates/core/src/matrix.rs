//! Dense complex operators, density matrices and their spectral decomposition.
//!
//! Sites are ordered most-significant first: for dims `(d_0, d_1, ..., d_{N-1})`
//! the basis ket `|i_0 i_1 ... i_{N-1}>` has flat index
//! `((i_0 * d_1 + i_1) * d_2 + ...)`, which matches `kron(a_0, kron(a_1, ...))`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Entrywise tolerance on `|A - A^dag|` for Hermitian validation.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Largest admissible deviation of `Tr(rho)` from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-NEGATIVE_EIGEN_TOL, 0)` are clamped to zero; below that the state is rejected.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-10;
/// Eigenvalues with magnitude below this are treated as exact zeros (solver round-off).
pub const ZERO_EIGEN_FLOOR: f64 = 1e-12;
const SPECTRUM_SUM_TOL: f64 = 1e-9;
const ORTHONORMAL_TOL: f64 = 1e-9;

/// A square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        if mat.nrows() == 0 {
            return Err(Error::InvalidArgument("operator dimension must be positive".into()));
        }
        Ok(Self { mat })
    }

    /// Like [`Operator::from_matrix`] but also rejects non-Hermitian input.
    pub fn hermitian(mat: DMatrix<C64>) -> Result<Self> {
        let op = Self::from_matrix(mat)?;
        op.ensure_hermitian()?;
        Ok(op)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim > 0, "operator dimension must be positive");
        Self { mat: DMatrix::from_fn(dim, dim, f) }
    }

    /// Row-major construction from real entries.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Self {
        assert_eq!(rows.len(), dim * dim);
        Self::from_fn(dim, |i, j| C64::new(rows[i * dim + j], 0.0))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| C64::new(0.0, 0.0))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// `|psi><psi|`
    pub fn projector(psi: &DVector<C64>) -> Self {
        Self { mat: psi * psi.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { mat: self.mat.map(|z| z * factor) }
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Self { mat: &self.mat * &other.mat })
    }

    pub fn apply(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        Ok(&self.mat * v)
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Self { mat: &self.mat + &other.mat })
    }

    /// `self += factor * other`
    pub fn add_scaled(&mut self, factor: f64, other: &Operator) -> Result<()> {
        self.check_same_dim(other)?;
        self.mat.zip_apply(&other.mat, |a, b| *a += b * factor);
        Ok(())
    }

    /// Largest entrywise modulus of `A - A^dag`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm();
                if d.is_nan() {
                    return f64::INFINITY;
                }
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let deviation = self.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            Err(Error::NotHermitian { deviation })
        } else {
            Ok(())
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff on operators of different dimension");
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.mat.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Hilbert-Schmidt inner product `Tr(A^dag B)`.
    pub fn hs_inner(&self, other: &Operator) -> C64 {
        self.mat.iter().zip(other.mat.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    fn check_same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    Operator { mat: a.mat.kronecker(&b.mat) }
}

/// `I ⊗ ... ⊗ op ⊗ ... ⊗ I` with `op` acting on `site` of a register with the given dims.
pub fn embed(op: &Operator, site: usize, dims: &[usize]) -> Result<Operator> {
    let Some(&site_dim) = dims.get(site) else {
        return Err(Error::InvalidArgument(format!(
            "site {site} out of range for {} sites",
            dims.len()
        )));
    };
    if op.dim() != site_dim {
        return Err(Error::DimensionMismatch { expected: site_dim, found: op.dim() });
    }
    let left: usize = dims[..site].iter().product();
    let right: usize = dims[site + 1..].iter().product();
    let total = left * site_dim * right;
    // Block structure I_left ⊗ op ⊗ I_right, filled without forming the full kron chain.
    let mut mat = DMatrix::from_element(total, total, C64::new(0.0, 0.0));
    for l in 0..left {
        for a in 0..site_dim {
            for b in 0..site_dim {
                let v = op.mat[(a, b)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for r in 0..right {
                    let row = (l * site_dim + a) * right + r;
                    let col = (l * site_dim + b) * right + r;
                    mat[(row, col)] = v;
                }
            }
        }
    }
    Ok(Operator { mat })
}

/// Eigenvalues (descending) with the matching orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Spectrum {
    /// `V diag(values) V^dag`
    pub fn reconstruct(&self) -> Operator {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= lam;
            }
        }
        Operator { mat: &scaled * self.vectors.adjoint() }
    }

    /// Largest entrywise deviation of `V^dag V` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.vectors.adjoint() * &self.vectors;
        let n = gram.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                let d = (gram[(i, j)] - C64::new(target, 0.0)).norm();
                if d.is_nan() {
                    return f64::INFINITY;
                }
                worst = worst.max(d);
            }
        }
        worst
    }
}

/// Spectral decomposition of a Hermitian operator, eigenvalues sorted descending
/// (ties keep the solver's order).
///
/// The solver can return non-finite pairs on some exactly structured inputs
/// (large zero blocks); those are recomputed on `F A F^dag` with `F` the
/// unitary discrete Fourier matrix and rotated back.
pub fn eigendecompose(op: &Operator) -> Result<Spectrum> {
    op.ensure_hermitian()?;
    let sym = (&op.mat + op.mat.adjoint()).map(|z| z * 0.5);
    let (values, vectors) = match solve_hermitian(sym.clone()) {
        Some(pair) => pair,
        None => {
            let f = fourier_unitary(op.dim());
            let (values, rotated) = solve_hermitian(&f * sym * f.adjoint())
                .ok_or_else(|| Error::InvalidState("eigendecomposition produced non-finite values".into()))?;
            (values, f.adjoint() * rotated)
        }
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let sorted = order.iter().map(|&i| values[i]).collect();
    let vectors = DMatrix::from_fn(op.dim(), op.dim(), |r, c| vectors[(r, order[c])]);
    Ok(Spectrum { values: sorted, vectors })
}

fn solve_hermitian(m: DMatrix<C64>) -> Option<(Vec<f64>, DMatrix<C64>)> {
    let eig = m.symmetric_eigen();
    let finite = eig.eigenvalues.iter().all(|v| v.is_finite())
        && eig.eigenvectors.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    finite.then(|| (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

fn fourier_unitary(n: usize) -> DMatrix<C64> {
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |r, c| {
        let angle = -2.0 * std::f64::consts::PI * ((r * c) % n) as f64 / n as f64;
        C64::from_polar(scale, angle)
    })
}

/// `(lambda_min, lambda_max)` of a Hermitian operator.
pub fn extreme_eigenvalues(op: &Operator) -> Result<(f64, f64)> {
    let spectrum = eigendecompose(op)?;
    let hi = spectrum.values[0];
    let lo = *spectrum.values.last().expect("non-empty spectrum");
    Ok((lo, hi))
}

/// A validated density matrix on a register of sites with known local dimensions.
///
/// The spectrum is computed once at construction. Eigenvalues within
/// [`ZERO_EIGEN_FLOOR`] of zero, and negative ones down to `-NEGATIVE_EIGEN_TOL`,
/// are set to exactly zero without renormalizing.
#[derive(Clone, Debug)]
pub struct QuantumState {
    dims: Vec<usize>,
    rho: Operator,
    spectrum: Spectrum,
}

impl QuantumState {
    pub fn new(dims: Vec<usize>, rho: Operator) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument("site dimensions must be non-empty and positive".into()));
        }
        let total: usize = dims.iter().product();
        if rho.dim() != total {
            return Err(Error::DimensionMismatch { expected: total, found: rho.dim() });
        }
        let deviation = rho.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix is not Hermitian (deviation {deviation:.3e})"
            )));
        }
        let tr = rho.trace();
        if !((tr.re - 1.0).abs() <= TRACE_TOL && tr.im.abs() <= TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let mut spectrum = eigendecompose(&rho)?;
        let min = *spectrum.values.last().expect("non-empty spectrum");
        if !(min >= -NEGATIVE_EIGEN_TOL) {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        for lam in spectrum.values.iter_mut() {
            if *lam < 0.0 || lam.abs() < ZERO_EIGEN_FLOOR {
                *lam = 0.0;
            }
        }
        let sum: f64 = spectrum.values.iter().sum();
        if !((sum - 1.0).abs() <= SPECTRUM_SUM_TOL) {
            return Err(Error::InvalidState(format!("eigenvalues sum to {sum}")));
        }
        let ortho = spectrum.orthonormality_error();
        if !(ortho <= ORTHONORMAL_TOL) {
            return Err(Error::InvalidState(format!(
                "eigenvectors not orthonormal (error {ortho:.3e})"
            )));
        }
        Ok(Self { dims, rho, spectrum })
    }

    /// `|psi><psi|` for a normalized ket.
    pub fn pure(dims: Vec<usize>, psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Self::new(dims, Operator::projector(psi))
    }

    /// Maximally mixed state `I / dim`.
    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        Self::new(dims, Operator::identity(total).scale(1.0 / total as f64))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// Largest local dimension.
    pub fn max_site_dim(&self) -> usize {
        self.dims.iter().copied().max().expect("at least one site")
    }

    pub fn rho(&self) -> &Operator {
        &self.rho
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.values
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.spectrum.vectors
    }

    /// `Tr(rho A)`
    pub fn expectation(&self, a: &Operator) -> Result<C64> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.dim() });
        }
        let r = self.rho.matrix();
        let m = a.matrix();
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += r[(i, j)] * m[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Convex combination of states on the same register. Weights must be
    /// non-negative and sum to one.
    pub fn mixture(parts: &[(f64, &QuantumState)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::InvalidArgument("empty mixture".into()));
        };
        let dims = first.dims.clone();
        let mut acc = Operator::zeros(first.dim());
        let mut total = 0.0;
        for (w, state) in parts {
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::InvalidArgument(format!("mixture weight {w} is negative")));
            }
            if state.dims != dims {
                return Err(Error::InvalidArgument(format!(
                    "mixture components have different dims: {:?} vs {:?}",
                    dims, state.dims
                )));
            }
            acc.add_scaled(*w, &state.rho)?;
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("mixture weights sum to {total}")));
        }
        Self::new(dims, acc)
    }

    /// Tensor product `self ⊗ other` on the concatenated register.
    pub fn tensor(&self, other: &QuantumState) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new(dims, kron(&self.rho, &other.rho))
    }
}

/// Reduced state on the sites in `keep` (any order, returned in ascending site order).
pub fn partial_trace(state: &QuantumState, keep: &[usize]) -> Result<QuantumState> {
    let n = state.num_sites();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("partial trace needs at least one kept site".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&s| s >= n) {
        return Err(Error::InvalidArgument(format!(
            "kept sites {keep:?} invalid for {n} sites"
        )));
    }
    let dims = state.dims();
    let keep_dims: Vec<usize> = kept.iter().map(|&s| dims[s]).collect();
    let traced: Vec<usize> = (0..n).filter(|s| !kept.contains(s)).collect();
    let keep_total: usize = keep_dims.iter().product();
    let trace_total: usize = traced.iter().map(|&s| dims[s]).product();

    // full_index[t][a]: flat index of the ket with kept digits `a` and traced digits `t`.
    let mut full_index = vec![vec![0usize; keep_total]; trace_total];
    let mut digits = vec![0usize; n];
    for flat in 0..state.dim() {
        let mut rem = flat;
        for s in (0..n).rev() {
            digits[s] = rem % dims[s];
            rem /= dims[s];
        }
        let a = kept.iter().fold(0, |acc, &s| acc * dims[s] + digits[s]);
        let t = traced.iter().fold(0, |acc, &s| acc * dims[s] + digits[s]);
        full_index[t][a] = flat;
    }

    let rho = state.rho().matrix();
    let mut reduced = DMatrix::from_element(keep_total, keep_total, C64::new(0.0, 0.0));
    for row in &full_index {
        for a in 0..keep_total {
            for b in 0..keep_total {
                reduced[(a, b)] += rho[(row[a], row[b])];
            }
        }
    }
    QuantumState::new(keep_dims, Operator::from_matrix(reduced)?)
}

/// Pauli matrices.
pub mod pauli {
    use super::{Operator, C64};

    pub fn x() -> Operator {
        Operator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn y() -> Operator {
        let z = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        Operator::from_fn(2, |r, c| match (r, c) {
            (0, 1) => -i,
            (1, 0) => i,
            _ => z,
        })
    }

    pub fn z() -> Operator {
        Operator::from_real_rows(2, &[1.0, 0.0, 0.0, -1.0])
    }
}
