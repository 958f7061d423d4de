//! Second-order product formula.
//!
//! `U₁(τ̃) = G_1 ⋯ G_c W` where each `G_g` is the product of the exact
//! exponentials of a set of disjoint bonds and `W` holds the on-site (or
//! field) phases. The symmetric step is `U₂(τ̃) = U₁ᵀ(τ̃/2) U₁(τ̃/2)`, i.e.
//! `W G_c ⋯ G_2 G_1(τ̃) G_2 ⋯ G_c W` with half steps everywhere except the
//! merged middle group. The grouping is fixed when the propagator is built.

use num_complex::Complex64;

use super::{EvolutionPlan, Scheme};
use crate::error::{Error, Result};
use crate::exec::{for_each_range, Exec, SharedMut};
use crate::hamiltonian::HamiltonianOperator;
use crate::state::StateVector;

/// Greedy edge colouring: bonds sharing a site never share a group.
fn colour_bonds(sites: usize, bonds: &[(usize, usize)]) -> Result<Vec<Vec<usize>>> {
    let mut used = vec![0u128; sites];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, &(m, n)) in bonds.iter().enumerate() {
        let taken = used[m] | used[n];
        let c = (!taken).trailing_zeros() as usize;
        if c >= 128 {
            return Err(Error::Resource("bond graph needs more than 128 colours".into()));
        }
        used[m] |= 1 << c;
        used[n] |= 1 << c;
        if groups.len() <= c {
            groups.resize_with(c + 1, Vec::new);
        }
        groups[c].push(k);
    }
    Ok(groups)
}

#[derive(Debug, Clone, Copy)]
struct HopBond {
    m: u32,
    n: u32,
    // cos/sin of vτ̃/2 and vτ̃
    half: (f64, f64),
    full: (f64, f64),
}

/// 2×2 block for an anti-aligned spin pair together with the aligned phase.
#[derive(Debug, Clone, Copy)]
struct PairBlock {
    aligned: Complex64,
    diag: Complex64,
    off: Complex64,
}

impl PairBlock {
    fn new(j: f64, delta: f64, dt: f64) -> Self {
        let zz = j * delta * 0.25;
        let anti = Complex64::from_polar(1.0, -dt * zz);
        PairBlock {
            aligned: Complex64::from_polar(1.0, dt * zz),
            diag: anti * (0.5 * dt * j).cos(),
            off: anti * Complex64::new(0.0, (0.5 * dt * j).sin()),
        }
    }
}

enum Kind {
    Hopping {
        groups: Vec<Vec<HopBond>>,
        onsite_half: Option<Vec<Complex64>>,
    },
    Spin {
        n: usize,
        groups: Vec<Vec<(u32, u32)>>,
        half: PairBlock,
        full: PairBlock,
        // field phase indexed by the number of up spins
        field_half: Option<Vec<Complex64>>,
    },
}

pub struct TrotterPropagator {
    kind: Kind,
    dim: usize,
    substeps: usize,
    exec: Exec,
}

impl TrotterPropagator {
    pub fn new(h: &HamiltonianOperator, plan: &EvolutionPlan, exec: Exec) -> Result<Self> {
        if plan.scheme != Scheme::Trotter2 {
            return Err(Error::Contract("Trotter propagator needs a trotter2 plan".into()));
        }
        let dt = plan.sub_tau();
        let kind = match h {
            HamiltonianOperator::TightBinding(tb) => {
                let pairs: Vec<(usize, usize)> = tb.bonds().iter().map(|b| (b.0, b.1)).collect();
                let groups = colour_bonds(tb.dim(), &pairs)?
                    .into_iter()
                    .map(|g| {
                        g.into_iter()
                            .map(|k| {
                                let (m, n, v) = tb.bonds()[k];
                                let (a, b) = (0.5 * dt * v, dt * v);
                                HopBond { m: m as u32, n: n as u32, half: (a.cos(), a.sin()), full: (b.cos(), b.sin()) }
                            })
                            .collect()
                    })
                    .collect();
                let onsite_half =
                    tb.onsite().map(|w| w.iter().map(|&e| Complex64::from_polar(1.0, -0.5 * dt * e)).collect());
                Kind::Hopping { groups, onsite_half }
            }
            HamiltonianOperator::Spin(sm) => {
                let (j, delta, field) = sm.couplings();
                let n = sm.spins();
                let pairs: Vec<(usize, usize)> = sm.bonds().iter().map(|&(a, b)| (a as usize, b as usize)).collect();
                let groups = colour_bonds(n, &pairs)?
                    .into_iter()
                    .map(|g| g.into_iter().map(|k| sm.bonds()[k]).collect())
                    .collect();
                // −h S^z over half a step: phase e^{+i (τ̃/2) h (2·up − N)/2}
                let field_half = (field != 0.0).then(|| {
                    (0..=n)
                        .map(|up| {
                            Complex64::from_polar(
                                1.0,
                                0.25 * dt * field * (2 * up) as f64 - 0.25 * dt * field * n as f64,
                            )
                        })
                        .collect()
                });
                Kind::Spin {
                    n,
                    groups,
                    half: PairBlock::new(j, delta, 0.5 * dt),
                    full: PairBlock::new(j, delta, dt),
                    field_half,
                }
            }
            HamiltonianOperator::Sparse(_) => {
                return Err(Error::Contract(
                    "the product formula needs a Hamiltonian given as bond and on-site terms".into(),
                ))
            }
        };
        Ok(TrotterPropagator { kind, dim: crate::hamiltonian::Operator::dim(h), substeps: plan.substeps, exec })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Applies `U₂(τ̃)^l` in place.
    pub fn step(&self, psi: &mut [Complex64]) {
        assert_eq!(psi.len(), self.dim, "state dimension does not match the propagator");
        for _ in 0..self.substeps {
            match &self.kind {
                Kind::Hopping { groups, onsite_half } => {
                    let exec = self.exec;
                    if let Some(p) = onsite_half {
                        phase_sites(exec, psi, p);
                    }
                    for g in groups.iter().skip(1).rev() {
                        hop_group(exec, psi, g, false);
                    }
                    if let Some(first) = groups.first() {
                        hop_group(exec, psi, first, true);
                    }
                    for g in groups.iter().skip(1) {
                        hop_group(exec, psi, g, false);
                    }
                    if let Some(p) = onsite_half {
                        phase_sites(exec, psi, p);
                    }
                }
                Kind::Spin { n, groups, half, full, field_half } => {
                    let exec = self.exec;
                    if let Some(p) = field_half {
                        phase_by_popcount(exec, psi, p);
                    }
                    for g in groups.iter().skip(1).rev() {
                        for &(a, b) in g {
                            spin_pair(exec, psi, *n, a, b, half);
                        }
                    }
                    if let Some(first) = groups.first() {
                        for &(a, b) in first {
                            spin_pair(exec, psi, *n, a, b, full);
                        }
                    }
                    for g in groups.iter().skip(1) {
                        for &(a, b) in g {
                            spin_pair(exec, psi, *n, a, b, half);
                        }
                    }
                    if let Some(p) = field_half {
                        phase_by_popcount(exec, psi, p);
                    }
                }
            }
        }
    }
}

fn phase_sites(exec: Exec, psi: &mut [Complex64], phases: &[Complex64]) {
    crate::exec::fill_chunks(exec, psi, |off, chunk| {
        for (k, c) in chunk.iter_mut().enumerate() {
            *c *= phases[off + k];
        }
    });
}

fn phase_by_popcount(exec: Exec, psi: &mut [Complex64], table: &[Complex64]) {
    crate::exec::fill_chunks(exec, psi, |off, chunk| {
        for (k, c) in chunk.iter_mut().enumerate() {
            *c *= table[(off + k).count_ones() as usize];
        }
    });
}

/// `exp(−iθσ^x)` on each bond of a group of disjoint bonds.
fn hop_group(exec: Exec, psi: &mut [Complex64], bonds: &[HopBond], full: bool) {
    let ptr = SharedMut(psi.as_mut_ptr());
    for_each_range(exec, bonds.len(), move |range| {
        let ptr = ptr;
        for b in &bonds[range] {
            let (c, s) = if full { b.full } else { b.half };
            // SAFETY: bonds within a group touch pairwise distinct sites, all < psi.len().
            unsafe {
                let pm = ptr.0.add(b.m as usize);
                let pn = ptr.0.add(b.n as usize);
                let (x, y) = (*pm, *pn);
                let mis = Complex64::new(0.0, -s);
                *pm = x * c + y * mis;
                *pn = y * c + x * mis;
            }
        }
    });
}

#[inline]
fn insert_zero(x: usize, p: u32) -> usize {
    let low = x & ((1usize << p) - 1);
    ((x >> p) << (p + 1)) | low
}

/// Exact exponential of one XXZ bond on all `2^n` amplitudes.
fn spin_pair(exec: Exec, psi: &mut [Complex64], n: usize, a: u32, b: u32, blk: &PairBlock) {
    let (lo, hi) = (a.min(b), a.max(b));
    let (ma, mb) = (1usize << a, 1usize << b);
    let ptr = SharedMut(psi.as_mut_ptr());
    let blk = *blk;
    for_each_range(exec, 1usize << (n - 2), move |range| {
        let ptr = ptr;
        for r in range {
            let s0 = insert_zero(insert_zero(r, lo), hi);
            // SAFETY: each representative r owns the four indices s0 | {0, a, b, ab}.
            unsafe {
                let p00 = ptr.0.add(s0);
                let p11 = ptr.0.add(s0 | ma | mb);
                let pa = ptr.0.add(s0 | ma);
                let pb = ptr.0.add(s0 | mb);
                *p00 *= blk.aligned;
                *p11 *= blk.aligned;
                let (x, y) = (*pa, *pb);
                *pa = blk.diag * x + blk.off * y;
                *pb = blk.off * x + blk.diag * y;
            }
        }
    });
}

/// One step `U₂(τ/l)^l ψ` as a new state.
pub fn trotter2_step(h: &HamiltonianOperator, psi: &StateVector, plan: &EvolutionPlan) -> Result<StateVector> {
    let prop = TrotterPropagator::new(h, plan, Exec::default())?;
    if psi.dim() != prop.dim() {
        return Err(Error::DimensionMismatch { expected: prop.dim(), got: psi.dim() });
    }
    let mut out = psi.clone();
    prop.step(out.amps_mut());
    Ok(out)
}
