//! Single-particle hopping Hamiltonians `Σ v_mn (a†_m a_n + h.c.) + Σ w_m n_m`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lattice::{Cluster, Geometry};
use crate::error::{Error, Result};
use crate::exec::{fill_chunks, Exec};
use crate::rng::SeedSpec;

/// On-site / bond modulation on top of uniform hopping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Onsite {
    #[default]
    Zero,
    /// `w_m` uniform on `[−W, W]`.
    Anderson { w: f64 },
    /// Square lattice with horizontal bond `x = 1..L−1` scaled by `sin²(πkx/2L)`.
    SinusoidalBond { k: i64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub cluster: Cluster,
    pub v: f64,
    pub onsite: Onsite,
    pub disorder_seed: u64,
}

/// Nearest-neighbour hopping on an arbitrary graph, stored as bond list plus
/// a CSR adjacency for the gather-form matvec.
#[derive(Debug, Clone)]
pub struct TightBinding {
    dim: usize,
    bonds: Vec<(usize, usize, f64)>,
    onsite: Option<Vec<f64>>,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    norm_bound: f64,
}

impl TightBinding {
    /// Builds the operator from explicit bonds `(m, n, v_mn)` and optional
    /// on-site energies. `onsite_bound`, when given, replaces `max |w_m|`
    /// in the 1-norm bound.
    pub fn from_terms(
        dim: usize,
        bonds: Vec<(usize, usize, f64)>,
        onsite: Option<Vec<f64>>,
        onsite_bound: Option<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim, reason: "need at least one site" });
        }
        if dim > u32::MAX as usize {
            return Err(Error::Resource(format!("{dim} sites exceed the index width")));
        }
        if let Some(w) = &onsite {
            if w.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: w.len() });
            }
        }
        let mut degree = vec![0usize; dim];
        for &(m, n, v) in &bonds {
            if m >= dim || n >= dim || m == n || !v.is_finite() {
                return Err(Error::Spec(format!("bad bond ({m}, {n}, {v}) for {dim} sites")));
            }
            degree[m] += 1;
            degree[n] += 1;
        }
        let mut row_start = vec![0usize; dim + 1];
        for i in 0..dim {
            row_start[i + 1] = row_start[i] + degree[i];
        }
        let mut fill = row_start.clone();
        let mut cols = vec![0u32; row_start[dim]];
        let mut vals = vec![0.0; row_start[dim]];
        for &(m, n, v) in &bonds {
            cols[fill[m]] = n as u32;
            vals[fill[m]] = v;
            fill[m] += 1;
            cols[fill[n]] = m as u32;
            vals[fill[n]] = v;
            fill[n] += 1;
        }
        let hop_bound = (0..dim)
            .map(|i| vals[row_start[i]..row_start[i + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let norm_bound = match (&onsite, onsite_bound) {
            (_, Some(b)) => hop_bound + b.abs(),
            (Some(w), None) => (0..dim)
                .map(|i| w[i].abs() + vals[row_start[i]..row_start[i + 1]].iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
            (None, None) => hop_bound,
        };
        Ok(TightBinding { dim, bonds, onsite, row_start, cols, vals, norm_bound })
    }

    pub fn build(spec: &LatticeSpec) -> Result<Self> {
        let c = &spec.cluster;
        let dim = c.sites();
        if dim < 2 {
            return Err(Error::Spec("a lattice needs at least two sites".into()));
        }
        let v = spec.v;
        match spec.onsite {
            Onsite::Zero => {
                let bonds = c.bonds().into_iter().map(|(m, n)| (m, n, v)).collect();
                Self::from_terms(dim, bonds, None, None)
            }
            Onsite::Anderson { w } => {
                if !(w >= 0.0) {
                    return Err(Error::Spec(format!("disorder strength must be non-negative, got {w}")));
                }
                let mut rng = SeedSpec::new(spec.disorder_seed, 0).rng();
                let energies = (0..dim).map(|_| w * (2.0 * rng.random::<f64>() - 1.0)).collect();
                let bonds = c.bonds().into_iter().map(|(m, n)| (m, n, v)).collect();
                Self::from_terms(dim, bonds, Some(energies), Some(w))
            }
            Onsite::SinusoidalBond { k } => {
                if c.geometry != Geometry::Square {
                    return Err(Error::Spec("the sinusoidal bond model needs a square lattice".into()));
                }
                Self::from_terms(dim, sinusoidal_bonds(c, v, k), None, None)
            }
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bonds(&self) -> &[(usize, usize, f64)] {
        &self.bonds
    }

    pub fn onsite(&self) -> Option<&[f64]> {
        self.onsite.as_deref()
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64], exec: Exec) {
        fill_chunks(exec, y, |off, chunk| {
            for (k, out) in chunk.iter_mut().enumerate() {
                let i = off + k;
                let mut acc = match &self.onsite {
                    Some(w) => x[i] * w[i],
                    None => Complex64::new(0.0, 0.0),
                };
                for p in self.row_start[i]..self.row_start[i + 1] {
                    acc += x[self.cols[p] as usize] * self.vals[p];
                }
                *out = acc;
            }
        });
    }
}

/// Horizontal bonds follow `v·sin²(πkx/2L)` with `x = 1..L−1` counting the
/// bonds along a row (open in x); vertical bonds are uniform `v` and obey
/// the cluster boundary.
fn sinusoidal_bonds(c: &Cluster, v: f64, k: i64) -> Vec<(usize, usize, f64)> {
    let (lx, ly) = (c.lx, c.ly);
    let mut bonds = Vec::new();
    for y in 0..ly {
        for x in 1..lx {
            let s = (std::f64::consts::PI * k as f64 * x as f64 / (2.0 * lx as f64)).sin();
            bonds.push((c.site(x - 1, y, 0), c.site(x, y, 0), v * s * s));
        }
    }
    let vertical = Cluster { geometry: Geometry::Chain, lx: ly, ly: 1, boundary: c.boundary };
    let pairs = if ly > 1 { vertical.bonds() } else { Vec::new() };
    for x in 0..lx {
        for &(a, b) in &pairs {
            bonds.push((c.site(x, a, 0), c.site(x, b, 0), v));
        }
    }
    bonds
}
