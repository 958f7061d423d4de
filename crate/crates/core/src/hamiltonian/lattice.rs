//! Lattice geometries and nearest-neighbour bond lists.
//!
//! Sites are numbered unit-cell major: `site = basis + nb * (x + lx * y)`
//! where `nb` is the number of basis sites per cell (1 for chain, square and
//! triangular, 2 for graphene, 3 for kagome). Within a graphene cell basis 0
//! is the A sublattice and 1 the B sublattice; kagome cells hold A, B, C at
//! `0`, `a1/2` and `a2/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Chain,
    Square,
    Triangular,
    Graphene,
    Kagome,
}

impl Geometry {
    pub fn basis_sites(self) -> usize {
        match self {
            Geometry::Chain | Geometry::Square | Geometry::Triangular => 1,
            Geometry::Graphene => 2,
            Geometry::Kagome => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Geometry::Chain => "chain",
            Geometry::Square => "square",
            Geometry::Triangular => "triangular",
            Geometry::Graphene => "graphene",
            Geometry::Kagome => "kagome",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chain" | "ring" => Some(Geometry::Chain),
            "square" => Some(Geometry::Square),
            "triangular" => Some(Geometry::Triangular),
            "graphene" | "honeycomb" => Some(Geometry::Graphene),
            "kagome" => Some(Geometry::Kagome),
            _ => None,
        }
    }
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

impl Boundary {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" | "pbc" => Some(Boundary::Periodic),
            "open" | "obc" => Some(Boundary::Open),
            _ => None,
        }
    }
}

/// A finite patch of a lattice: geometry, number of unit cells along each
/// primitive direction, and boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub geometry: Geometry,
    pub lx: usize,
    pub ly: usize,
    pub boundary: Boundary,
}

impl Cluster {
    pub fn new(geometry: Geometry, lx: usize, ly: usize, boundary: Boundary) -> Result<Self> {
        let c = Cluster { geometry, lx, ly, boundary };
        c.validate()?;
        Ok(c)
    }

    pub fn chain(l: usize, boundary: Boundary) -> Result<Self> {
        Self::new(Geometry::Chain, l, 1, boundary)
    }

    /// Picks the most nearly square `lx × ly` tiling with `sites` sites.
    pub fn from_site_count(geometry: Geometry, sites: usize, boundary: Boundary) -> Result<Self> {
        let nb = geometry.basis_sites();
        if sites == 0 || !sites.is_multiple_of(nb) {
            return Err(Error::Spec(format!("{geometry} needs a site count divisible by {nb}, got {sites}")));
        }
        let cells = sites / nb;
        if geometry == Geometry::Chain {
            return Self::new(geometry, cells, 1, boundary);
        }
        let mut ly = (cells as f64).sqrt().floor() as usize;
        while ly > 1 && !cells.is_multiple_of(ly) {
            ly -= 1;
        }
        let ly = ly.max(1);
        Self::new(geometry, cells / ly, ly, boundary)
    }

    fn validate(&self) -> Result<()> {
        if self.lx == 0 || self.ly == 0 {
            return Err(Error::Spec("lattice sizes must be positive".into()));
        }
        if self.geometry == Geometry::Chain && self.ly != 1 {
            return Err(Error::Spec("a chain has ly = 1".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.lx * self.ly
    }

    pub fn sites(&self) -> usize {
        self.cells() * self.geometry.basis_sites()
    }

    #[inline]
    pub fn site(&self, x: usize, y: usize, basis: usize) -> usize {
        basis + self.geometry.basis_sites() * (x + self.lx * y)
    }

    /// Cell `(x + dx, y + dy)`, or `None` when it falls off an open edge.
    fn shift(&self, x: usize, y: usize, dx: isize, dy: isize) -> Option<(usize, usize)> {
        let wrap = |c: usize, d: isize, n: usize| -> Option<usize> {
            let t = c as isize + d;
            if (0..n as isize).contains(&t) {
                Some(t as usize)
            } else if self.boundary == Boundary::Periodic {
                Some(t.rem_euclid(n as isize) as usize)
            } else {
                None
            }
        };
        Some((wrap(x, dx, self.lx)?, wrap(y, dy, self.ly)?))
    }

    /// Nearest-neighbour bonds `(m, n)` with `m < n`, each listed once.
    ///
    /// Bonds that would connect a site to itself (a periodic direction of
    /// length 1) are dropped, and wrap-around bonds duplicating an existing
    /// pair (length 2) are merged.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        // (basis_from, basis_to, dx, dy)
        let pattern: &[(usize, usize, isize, isize)] = match self.geometry {
            Geometry::Chain => &[(0, 0, 1, 0)],
            Geometry::Square => &[(0, 0, 1, 0), (0, 0, 0, 1)],
            Geometry::Triangular => &[(0, 0, 1, 0), (0, 0, 0, 1), (0, 0, -1, 1)],
            Geometry::Graphene => &[(0, 1, 0, 0), (0, 1, -1, 0), (0, 1, 0, -1)],
            Geometry::Kagome => {
                &[(0, 1, 0, 0), (0, 2, 0, 0), (1, 2, 0, 0), (0, 1, -1, 0), (0, 2, 0, -1), (1, 2, 1, -1)]
            }
        };
        let mut out = Vec::with_capacity(self.cells() * pattern.len());
        for y in 0..self.ly {
            for x in 0..self.lx {
                for &(b0, b1, dx, dy) in pattern {
                    if let Some((x1, y1)) = self.shift(x, y, dx, dy) {
                        let m = self.site(x, y, b0);
                        let n = self.site(x1, y1, b1);
                        if m != n {
                            out.push((m.min(n), m.max(n)));
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}
