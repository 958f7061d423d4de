//! Spin-1/2 XXZ models on bit-coded basis states.
//!
//! Basis state `s` has spin `i` up when bit `i` of `s` is set. The model is
//! `H = −J Σ_⟨ij⟩ (S^x_i S^x_j + S^y_i S^y_j + Δ S^z_i S^z_j) − h Σ_i S^z_i`,
//! so `J = −1` is the antiferromagnet.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lattice::{Cluster, Geometry};
use crate::error::{Error, Result};
use crate::exec::{fill_chunks, max_indexed, Exec};

/// Largest spin count accepted unless a caller raises the cap.
pub const DEFAULT_SPIN_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinModelSpec {
    pub cluster: Cluster,
    pub j: f64,
    pub delta: f64,
    pub h: f64,
}

impl SpinModelSpec {
    pub fn spins(&self) -> usize {
        self.cluster.sites()
    }
}

#[derive(Debug, Clone)]
pub struct SpinModel {
    n: usize,
    bonds: Vec<(u32, u32)>,
    j: f64,
    delta: f64,
    h: f64,
    norm_bound: f64,
}

impl SpinModel {
    pub fn build(spec: &SpinModelSpec) -> Result<Self> {
        Self::build_with_cap(spec, DEFAULT_SPIN_CAP)
    }

    pub fn build_with_cap(spec: &SpinModelSpec, cap: usize) -> Result<Self> {
        if spec.cluster.geometry == Geometry::Graphene {
            return Err(Error::Unsupported("spin models on graphene clusters".into()));
        }
        let bonds = spec.cluster.bonds().into_iter().map(|(a, b)| (a as u32, b as u32)).collect();
        Self::from_bonds(spec.spins(), bonds, spec.j, spec.delta, spec.h, cap)
    }

    /// Builds the model on an explicit bond list.
    pub fn from_bonds(n: usize, bonds: Vec<(u32, u32)>, j: f64, delta: f64, h: f64, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Spec("a spin model needs at least one spin".into()));
        }
        if n > cap.min(usize::BITS as usize - 2) {
            return Err(Error::Resource(format!("{n} spins exceed the configured cap of {cap}")));
        }
        if bonds.iter().any(|&(a, b)| a == b || a as usize >= n || b as usize >= n) {
            return Err(Error::Spec("spin bond refers to an invalid site".into()));
        }
        if ![j, delta, h].iter().all(|v| v.is_finite()) {
            return Err(Error::Spec("couplings must be finite".into()));
        }
        let mut m = SpinModel { n, bonds, j, delta, h, norm_bound: 0.0 };
        m.norm_bound = max_indexed(Exec::Parallel, 1 << n, |s| m.column_sum(s));
        Ok(m)
    }

    #[inline]
    pub fn spins(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn bonds(&self) -> &[(u32, u32)] {
        &self.bonds
    }

    pub fn couplings(&self) -> (f64, f64, f64) {
        (self.j, self.delta, self.h)
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// Twice the total `S^z` of basis state `s`.
    #[inline]
    pub fn two_sz(&self, s: usize) -> i64 {
        2 * s.count_ones() as i64 - self.n as i64
    }

    /// `⟨s|H|s⟩`.
    #[inline]
    pub fn diagonal(&self, s: usize) -> f64 {
        let zz = self.j * self.delta * 0.25;
        let mut d = -0.5 * self.h * self.two_sz(s) as f64;
        for &(a, b) in &self.bonds {
            if ((s >> a) ^ (s >> b)) & 1 == 0 {
                d -= zz;
            } else {
                d += zz;
            }
        }
        d
    }

    fn column_sum(&self, s: usize) -> f64 {
        let anti = self.bonds.iter().filter(|&&(a, b)| ((s >> a) ^ (s >> b)) & 1 == 1).count();
        self.diagonal(s).abs() + anti as f64 * 0.5 * self.j.abs()
    }

    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64], exec: Exec) {
        let flip = -0.5 * self.j;
        let zz = self.j * self.delta * 0.25;
        let hz = -0.5 * self.h;
        let n = self.n as i64;
        fill_chunks(exec, y, |off, chunk| {
            for (k, out) in chunk.iter_mut().enumerate() {
                let s = off + k;
                let mut d = hz * (2 * s.count_ones() as i64 - n) as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for &(a, b) in &self.bonds {
                    if ((s >> a) ^ (s >> b)) & 1 == 0 {
                        d -= zz;
                    } else {
                        d += zz;
                        acc += x[s ^ ((1 << a) | (1 << b))];
                    }
                }
                *out = x[s] * d + acc * flip;
            }
        });
    }
}
