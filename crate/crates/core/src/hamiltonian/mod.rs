//! Matrix-free Hermitian operators.

pub mod lattice;
pub mod observable;
pub mod spin;
pub mod tight_binding;

use num_complex::Complex64;

pub use lattice::{Boundary, Cluster, Geometry};
pub use observable::{chain_spec, ObservableOperator, ObservableTag, SpinCurrent};
pub use spin::{SpinModel, SpinModelSpec, DEFAULT_SPIN_CAP};
pub use tight_binding::{LatticeSpec, Onsite, TightBinding};

use crate::error::{Error, Result};
use crate::exec::{fill_chunks, Exec};
use crate::state::StateVector;

/// A linear operator applied without storing its matrix.
pub trait Operator: Send + Sync {
    fn dim(&self) -> usize;

    /// Overwrites `y` with `A x`. Both slices have length `dim()`.
    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64], exec: Exec);

    /// `A ψ` as a new state; `ψ` is left untouched.
    fn apply(&self, psi: &StateVector, exec: Exec) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: psi.dim() });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
        self.apply_into(psi.amps(), &mut out, exec);
        StateVector::from_amps(out)
    }
}

/// Hermitian matrix in compressed-row form, for models outside the two
/// built-in families.
#[derive(Debug, Clone)]
pub struct SparseHermitian {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
    norm_bound: f64,
}

impl SparseHermitian {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    /// Fails unless the result equals its adjoint to 1e−12.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim, reason: "operator dimension must be at least 1" });
        }
        if triplets.iter().any(|&(r, c, _)| r >= dim || c >= dim) {
            return Err(Error::Spec("matrix entry outside the operator dimension".into()));
        }
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let lookup = |r: usize, c: usize| -> Complex64 {
            merged.binary_search_by(|e| (e.0, e.1).cmp(&(r, c))).map(|i| merged[i].2).unwrap_or_default()
        };
        for &(r, c, v) in &merged {
            let t = lookup(c, r).conj();
            if (v - t).norm() > 1e-12 * (1.0 + v.norm()) {
                return Err(Error::Spec(format!("matrix is not Hermitian at ({r}, {c})")));
            }
        }
        let mut row_start = vec![0usize; dim + 1];
        for &(r, _, _) in &merged {
            row_start[r + 1] += 1;
        }
        for i in 0..dim {
            row_start[i + 1] += row_start[i];
        }
        let mut col_sum = vec![0.0; dim];
        for &(_, c, v) in &merged {
            col_sum[c] += v.norm();
        }
        let norm_bound = col_sum.into_iter().fold(0.0, f64::max);
        let (cols, vals) = merged.into_iter().map(|(_, c, v)| (c, v)).unzip();
        Ok(SparseHermitian { dim, row_start, cols, vals, norm_bound })
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// All stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim)
            .flat_map(move |r| (self.row_start[r]..self.row_start[r + 1]).map(move |p| (r, self.cols[p], self.vals[p])))
    }

    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64], exec: Exec) {
        fill_chunks(exec, y, |off, chunk| {
            for (k, out) in chunk.iter_mut().enumerate() {
                let r = off + k;
                let mut acc = Complex64::new(0.0, 0.0);
                for p in self.row_start[r]..self.row_start[r + 1] {
                    acc += self.vals[p] * x[self.cols[p]];
                }
                *out = acc;
            }
        });
    }
}

/// The Hamiltonians handled by the propagators and estimators.
#[derive(Debug, Clone)]
pub enum HamiltonianOperator {
    TightBinding(TightBinding),
    Spin(SpinModel),
    Sparse(SparseHermitian),
}

impl HamiltonianOperator {
    pub fn build_lattice(spec: &LatticeSpec) -> Result<Self> {
        TightBinding::build(spec).map(HamiltonianOperator::TightBinding)
    }

    pub fn build_spin_model(spec: &SpinModelSpec) -> Result<Self> {
        SpinModel::build(spec).map(HamiltonianOperator::Spin)
    }

    /// Maximum absolute column sum, computed from the terms.
    pub fn norm_bound_1(&self) -> f64 {
        match self {
            HamiltonianOperator::TightBinding(h) => h.norm_bound(),
            HamiltonianOperator::Spin(h) => h.norm_bound(),
            HamiltonianOperator::Sparse(h) => h.norm_bound(),
        }
    }

    pub fn as_spin(&self) -> Option<&SpinModel> {
        match self {
            HamiltonianOperator::Spin(m) => Some(m),
            _ => None,
        }
    }
}

impl Operator for HamiltonianOperator {
    fn dim(&self) -> usize {
        match self {
            HamiltonianOperator::TightBinding(h) => h.dim(),
            HamiltonianOperator::Spin(h) => h.dim(),
            HamiltonianOperator::Sparse(h) => h.dim,
        }
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64], exec: Exec) {
        match self {
            HamiltonianOperator::TightBinding(h) => h.apply_into(x, y, exec),
            HamiltonianOperator::Spin(h) => h.apply_into(x, y, exec),
            HamiltonianOperator::Sparse(h) => h.apply_into(x, y, exec),
        }
    }
}

impl From<TightBinding> for HamiltonianOperator {
    fn from(h: TightBinding) -> Self {
        HamiltonianOperator::TightBinding(h)
    }
}

impl From<SpinModel> for HamiltonianOperator {
    fn from(h: SpinModel) -> Self {
        HamiltonianOperator::Spin(h)
    }
}

impl From<SparseHermitian> for HamiltonianOperator {
    fn from(h: SparseHermitian) -> Self {
        HamiltonianOperator::Sparse(h)
    }
}
