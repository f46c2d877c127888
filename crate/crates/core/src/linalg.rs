//! Real sparse operators and small dense helpers.
//!
//! Every Hamiltonian in this crate is real in the computational basis, so
//! operators are stored as real CSR matrices while states and density
//! matrices are complex.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type StateVector = DVector<C64>;
pub type DensityMatrix = DMatrix<C64>;

/// Square real matrix in compressed sparse row format.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseOp {
    /// Assemble from (row, col, value) triplets. Duplicates are summed and
    /// explicit zeros are dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet index out of range");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let op = SparseOp {
            dim,
            row_ptr,
            cols,
            vals,
        };
        op.pruned()
    }

    pub fn zeros(dim: usize) -> Self {
        SparseOp {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let triplets = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(diag.len(), triplets)
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let mut t = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != 0.0 {
                    t.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), t)
    }

    fn pruned(self) -> Self {
        if self.vals.iter().all(|&v| v != 0.0) {
            return self;
        }
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k] != 0.0 {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        SparseOp {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterate the stored entries of one row as (column, value).
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    /// Iterate all stored entries as (row, column, value).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    /// Largest |A_ij − A_ji| over all stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        self.iter()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        self.max_asymmetry() == 0.0
    }

    /// Gershgorin bound on the spectral radius: max_r Σ_c |A_rc|.
    pub fn spectral_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out.pruned()
    }

    /// Entry-wise sum of two operators of the same dimension.
    pub fn add(&self, other: &SparseOp) -> Self {
        assert_eq!(self.dim, other.dim);
        let t = self.iter().chain(other.iter()).collect();
        Self::from_triplets(self.dim, t)
    }

    /// Return the operator with `diag` added to its diagonal.
    pub fn with_added_diagonal(&self, diag: &[f64]) -> Self {
        assert_eq!(diag.len(), self.dim);
        let t = self
            .iter()
            .chain(diag.iter().enumerate().map(|(i, &d)| (i, i, d)))
            .collect();
        Self::from_triplets(self.dim, t)
    }

    /// y = A x for a complex vector.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k]] * self.vals[k];
            }
            y[r] = acc;
        }
    }

    pub fn mul_vec(&self, x: &StateVector) -> StateVector {
        let mut y = DVector::zeros(self.dim);
        self.apply(x.as_slice(), y.as_mut_slice());
        y
    }

    /// Y = A X for a dense complex matrix, column by column.
    pub fn mul_dense(&self, x: &DensityMatrix, y: &mut DensityMatrix) {
        debug_assert_eq!(x.nrows(), self.dim);
        let n = self.dim;
        let (xs, ys) = (x.as_slice(), y.as_mut_slice());
        for c in 0..x.ncols() {
            self.apply(&xs[c * n..(c + 1) * n], &mut ys[c * n..(c + 1) * n]);
        }
    }

    /// Expectation value ⟨ψ|A|ψ⟩ (real for symmetric A).
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        let hpsi = self.mul_vec(psi);
        psi.dotc(&hpsi).re
    }
}

/// Eigenpairs of a real symmetric matrix sorted by ascending eigenvalue.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

pub fn eigh(m: DMatrix<f64>) -> Eigh {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Eigh { values, vectors }
}

/// Require an operator to be exactly symmetric.
pub fn require_hermitian(op: &SparseOp) -> Result<()> {
    let asym = op.max_asymmetry();
    if asym != 0.0 {
        return Err(Error::Validation(format!(
            "operator is not Hermitian (max |H - H^T| = {asym:e})"
        )));
    }
    Ok(())
}

pub fn real_to_complex(v: &DVector<f64>) -> StateVector {
    v.map(|x| C64::new(x, 0.0))
}
