//! Observables sharing the spin basis conventions of [`super::spin`].

use num_complex::Complex64;

use super::lattice::{Boundary, Cluster, Geometry};
use super::spin::SpinModelSpec;
use crate::error::{Error, Result};
use crate::exec::{fill_chunks, Exec};

/// Spin current `j = −J Σ_i (S^x_i S^y_{i+1} − S^y_i S^x_{i+1})` on a chain.
#[derive(Debug, Clone)]
pub struct SpinCurrent {
    n: usize,
    links: Vec<(u32, u32)>,
    j: f64,
}

impl SpinCurrent {
    pub fn new(spec: &SpinModelSpec) -> Result<Self> {
        let c = &spec.cluster;
        if c.geometry != Geometry::Chain {
            return Err(Error::Unsupported(format!("spin current on a {} cluster", c.geometry)));
        }
        let n = c.sites();
        let mut links: Vec<(u32, u32)> = (0..n.saturating_sub(1)).map(|i| (i as u32, i as u32 + 1)).collect();
        if c.boundary == Boundary::Periodic && n > 2 {
            links.push((n as u32 - 1, 0));
        }
        Ok(SpinCurrent { n, links, j: spec.j })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// `S^+_a S^-_b` carries amplitude `−iJ/2`, `S^-_a S^+_b` carries `+iJ/2`.
    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64], exec: Exec) {
        let amp = Complex64::new(0.0, -0.5 * self.j);
        fill_chunks(exec, y, |off, chunk| {
            for (k, out) in chunk.iter_mut().enumerate() {
                let s = off + k;
                let mut acc = Complex64::new(0.0, 0.0);
                for &(a, b) in &self.links {
                    let (ba, bb) = ((s >> a) & 1, (s >> b) & 1);
                    if ba != bb {
                        let src = x[s ^ ((1 << a) | (1 << b))];
                        if ba == 1 {
                            acc += src;
                        } else {
                            acc -= src;
                        }
                    }
                }
                *out = acc * amp;
            }
        });
    }
}

/// Observables accepted by the thermal and dynamical estimators.
#[derive(Debug, Clone)]
pub enum ObservableOperator {
    Hamiltonian(super::HamiltonianOperator),
    SpinCurrent(SpinCurrent),
    /// `n_l = S^z_l + 1/2` on `n_spins` spins.
    LocalDensity {
        n_spins: usize,
        site: usize,
    },
    /// `M^x = Σ_i S^x_i`.
    TotalMx {
        n_spins: usize,
    },
    /// Arbitrary real diagonal in the computational basis.
    Diagonal(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableTag {
    Hamiltonian,
    SpinCurrent,
    LocalDensity(usize),
    TotalMx,
    CustomDiagonal,
}

impl ObservableOperator {
    pub fn spin_current(spec: &SpinModelSpec) -> Result<Self> {
        SpinCurrent::new(spec).map(ObservableOperator::SpinCurrent)
    }

    pub fn local_density(n_spins: usize, site: usize) -> Result<Self> {
        if site >= n_spins {
            return Err(Error::Contract(format!("site {site} out of range for {n_spins} spins")));
        }
        Ok(ObservableOperator::LocalDensity { n_spins, site })
    }

    pub fn total_mx(n_spins: usize) -> Self {
        ObservableOperator::TotalMx { n_spins }
    }

    pub fn tag(&self) -> ObservableTag {
        match self {
            ObservableOperator::Hamiltonian(_) => ObservableTag::Hamiltonian,
            ObservableOperator::SpinCurrent(_) => ObservableTag::SpinCurrent,
            ObservableOperator::LocalDensity { site, .. } => ObservableTag::LocalDensity(*site),
            ObservableOperator::TotalMx { .. } => ObservableTag::TotalMx,
            ObservableOperator::Diagonal(_) => ObservableTag::CustomDiagonal,
        }
    }

    /// The diagonal entries when the observable is diagonal in the
    /// computational basis.
    pub fn diagonal_value(&self, s: usize) -> Option<f64> {
        match self {
            ObservableOperator::LocalDensity { site, .. } => Some(((s >> site) & 1) as f64),
            ObservableOperator::Diagonal(w) => w.get(s).copied(),
            _ => None,
        }
    }
}

impl super::Operator for ObservableOperator {
    fn dim(&self) -> usize {
        match self {
            ObservableOperator::Hamiltonian(h) => h.dim(),
            ObservableOperator::SpinCurrent(j) => j.dim(),
            ObservableOperator::LocalDensity { n_spins, .. } | ObservableOperator::TotalMx { n_spins } => 1 << n_spins,
            ObservableOperator::Diagonal(w) => w.len(),
        }
    }

    fn apply_into(&self, x: &[Complex64], y: &mut [Complex64], exec: Exec) {
        match self {
            ObservableOperator::Hamiltonian(h) => h.apply_into(x, y, exec),
            ObservableOperator::SpinCurrent(j) => j.apply_into(x, y, exec),
            ObservableOperator::LocalDensity { site, .. } => {
                let site = *site;
                fill_chunks(exec, y, |off, chunk| {
                    for (k, out) in chunk.iter_mut().enumerate() {
                        let s = off + k;
                        *out = if (s >> site) & 1 == 1 { x[s] } else { Complex64::new(0.0, 0.0) };
                    }
                })
            }
            ObservableOperator::TotalMx { n_spins } => {
                let n = *n_spins;
                fill_chunks(exec, y, |off, chunk| {
                    for (k, out) in chunk.iter_mut().enumerate() {
                        let s = off + k;
                        let mut acc = Complex64::new(0.0, 0.0);
                        for i in 0..n {
                            acc += x[s ^ (1 << i)];
                        }
                        *out = acc * 0.5;
                    }
                })
            }
            ObservableOperator::Diagonal(w) => fill_chunks(exec, y, |off, chunk| {
                for (k, out) in chunk.iter_mut().enumerate() {
                    *out = x[off + k] * w[off + k];
                }
            }),
        }
    }
}

/// Chain cluster helper used by the observable constructors' callers.
pub fn chain_spec(n: usize, boundary: Boundary, j: f64, delta: f64, h: f64) -> Result<SpinModelSpec> {
    Ok(SpinModelSpec { cluster: Cluster::chain(n, boundary)?, j, delta, h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Operator;

    fn apply(op: &ObservableOperator, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        op.apply_into(x, &mut y, Exec::Sequential);
        y
    }

    #[test]
    fn local_density_is_projector() {
        let op = ObservableOperator::local_density(4, 2).unwrap();
        for s in 0..16 {
            assert_eq!(op.diagonal_value(s), Some(((s >> 2) & 1) as f64));
        }
        assert!(ObservableOperator::local_density(4, 4).is_err());
    }

    #[test]
    fn single_spin_mx_is_half_sigma_x() {
        let op = ObservableOperator::total_mx(1);
        let y = apply(&op, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert_eq!(y, vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)]);
    }

    #[test]
    fn current_annihilates_polarised_states() {
        let spec = chain_spec(5, Boundary::Periodic, -1.0, 1.5, 0.0).unwrap();
        let op = ObservableOperator::spin_current(&spec).unwrap();
        for s in [0usize, 31] {
            let mut x = vec![Complex64::new(0.0, 0.0); 32];
            x[s] = Complex64::new(1.0, 0.0);
            assert!(apply(&op, &x).iter().all(|c| c.norm() == 0.0));
        }
    }

    #[test]
    fn current_needs_chain() {
        let cluster = Cluster::new(Geometry::Square, 2, 2, Boundary::Open).unwrap();
        let spec = SpinModelSpec { cluster, j: -1.0, delta: 1.0, h: 0.0 };
        assert!(matches!(ObservableOperator::spin_current(&spec), Err(Error::Unsupported(_))));
    }
}
