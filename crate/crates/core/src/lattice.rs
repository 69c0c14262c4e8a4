//! Site sets, bond lists and the 1D flattening of 2D lattices.
//!
//! The linear site index fixed here is the order in which sites appear in
//! state vectors (site `i` is bit `i` of a basis index) and in the
//! `3L`-dimensional encoded measurement vectors.
//!
//! Honeycomb convention (brick-wall form). Unit cell `(c, r)` with
//! `0 <= c < cols`, `0 <= r < rows` holds sublattice sites
//! `A = 2 (r * cols + c)` and `B = A + 1`. Bonds:
//!
//! * `z`: `A(c, r) - B(c, r)` (intra-cell)
//! * `x`: `B(c, r) - A(c + 1, r)`
//! * `y`: `B(c, r) - A(c, r + 1)`
//!
//! Each hexagon then reads `z, x, y, z, x, y` going around, and every site
//! carries at most one bond of each type. Periodic boundaries wrap `c + 1`
//! and `r + 1`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Chain,
    Square,
    Honeycomb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BondType {
    Generic,
    X,
    Y,
    Z,
    /// Chain bond whose first site has an even 1-based position.
    Even,
    /// Chain bond whose first site has an odd 1-based position.
    Odd,
}

/// Flattening of a square lattice into the linear site index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Indexing {
    /// Boustrophedon: even rows run left to right, odd rows right to left.
    #[default]
    Snake,
    RowMajor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub kind: BondType,
}

/// Coordinates of a site, recorded for export and rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteCoord {
    pub row: usize,
    pub col: usize,
    /// Honeycomb sublattice (0 = A, 1 = B); always 0 elsewhere.
    pub sub: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub kind: LatticeKind,
    pub n_sites: usize,
    pub boundary: Boundary,
    /// Column count (chain length, square `Lx`, honeycomb unit-cell columns).
    pub cols: usize,
    /// Row count (1 for chains).
    pub rows: usize,
    pub indexing: Indexing,
    pub bonds: Vec<Bond>,
    /// `coords[site]` for every linear index.
    pub coords: Vec<SiteCoord>,
}

struct BondSet {
    bonds: Vec<Bond>,
    seen: HashSet<(usize, usize, BondType)>,
}

impl BondSet {
    fn new() -> Self {
        BondSet { bonds: Vec::new(), seen: HashSet::new() }
    }

    // Wrap bonds on size-2 periodic directions would repeat an existing pair;
    // those are dropped.
    fn push(&mut self, i: usize, j: usize, kind: BondType) {
        if i == j {
            return;
        }
        let key = (i.min(j), i.max(j), kind);
        if self.seen.insert(key) {
            self.bonds.push(Bond { i, j, kind });
        }
    }
}

/// Bond parity type of chain bond `(site, site + 1)` for 0-based `site`,
/// taken from the 1-based position `site + 1`.
pub fn chain_parity(site: usize) -> BondType {
    if (site + 1) % 2 == 0 {
        BondType::Even
    } else {
        BondType::Odd
    }
}

impl Lattice {
    /// Open or periodic chain of `length` sites.
    pub fn chain(length: usize, boundary: Boundary) -> Result<Lattice> {
        if length < 2 {
            return Err(Error::InvalidSize(format!("chain needs L >= 2, got {length}")));
        }
        let mut set = BondSet::new();
        for i in 0..length - 1 {
            set.push(i, i + 1, chain_parity(i));
        }
        if boundary == Boundary::Periodic {
            set.push(length - 1, 0, chain_parity(length - 1));
        }
        Ok(Lattice {
            kind: LatticeKind::Chain,
            n_sites: length,
            boundary,
            cols: length,
            rows: 1,
            indexing: Indexing::RowMajor,
            bonds: set.bonds,
            coords: (0..length).map(|c| SiteCoord { row: 0, col: c, sub: 0 }).collect(),
        })
    }

    /// `cols x rows` square lattice in snake order.
    pub fn square(cols: usize, rows: usize, boundary: Boundary) -> Result<Lattice> {
        Self::square_with(cols, rows, boundary, Indexing::Snake)
    }

    pub fn square_with(
        cols: usize,
        rows: usize,
        boundary: Boundary,
        indexing: Indexing,
    ) -> Result<Lattice> {
        if cols < 2 || rows < 2 {
            return Err(Error::InvalidSize(format!(
                "square lattice needs Lx, Ly >= 2, got {cols}x{rows}"
            )));
        }
        let idx = |r: usize, c: usize| square_index(cols, indexing, r, c);
        let mut set = BondSet::new();
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    set.push(idx(r, c), idx(r, c + 1), BondType::Generic);
                } else if boundary == Boundary::Periodic {
                    set.push(idx(r, c), idx(r, 0), BondType::Generic);
                }
                if r + 1 < rows {
                    set.push(idx(r, c), idx(r + 1, c), BondType::Generic);
                } else if boundary == Boundary::Periodic {
                    set.push(idx(r, c), idx(0, c), BondType::Generic);
                }
            }
        }
        let mut coords = vec![SiteCoord { row: 0, col: 0, sub: 0 }; cols * rows];
        for r in 0..rows {
            for c in 0..cols {
                coords[idx(r, c)] = SiteCoord { row: r, col: c, sub: 0 };
            }
        }
        Ok(Lattice {
            kind: LatticeKind::Square,
            n_sites: cols * rows,
            boundary,
            cols,
            rows,
            indexing,
            bonds: set.bonds,
            coords,
        })
    }

    /// Honeycomb lattice of `cols x rows` two-site unit cells.
    pub fn honeycomb(cols: usize, rows: usize, boundary: Boundary) -> Result<Lattice> {
        if cols < 1 || rows < 1 {
            return Err(Error::InvalidSize(format!(
                "honeycomb needs L, W >= 1, got {cols}x{rows}"
            )));
        }
        let a = |c: usize, r: usize| 2 * (r * cols + c);
        let b = |c: usize, r: usize| 2 * (r * cols + c) + 1;
        let periodic = boundary == Boundary::Periodic;
        let mut set = BondSet::new();
        for r in 0..rows {
            for c in 0..cols {
                set.push(a(c, r), b(c, r), BondType::Z);
            }
        }
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    set.push(b(c, r), a(c + 1, r), BondType::X);
                } else if periodic {
                    set.push(b(c, r), a(0, r), BondType::X);
                }
            }
        }
        for r in 0..rows {
            for c in 0..cols {
                if r + 1 < rows {
                    set.push(b(c, r), a(c, r + 1), BondType::Y);
                } else if periodic {
                    set.push(b(c, r), a(c, 0), BondType::Y);
                }
            }
        }
        let mut coords = Vec::with_capacity(2 * cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                coords.push(SiteCoord { row: r, col: c, sub: 0 });
                coords.push(SiteCoord { row: r, col: c, sub: 1 });
            }
        }
        Ok(Lattice {
            kind: LatticeKind::Honeycomb,
            n_sites: 2 * cols * rows,
            boundary,
            cols,
            rows,
            indexing: Indexing::RowMajor,
            bonds: set.bonds,
            coords,
        })
    }

    /// Linear index of square-lattice site `(row, col)`.
    pub fn site_index(&self, row: usize, col: usize) -> usize {
        match self.kind {
            LatticeKind::Square => square_index(self.cols, self.indexing, row, col),
            LatticeKind::Chain => col,
            LatticeKind::Honeycomb => 2 * (row * self.cols + col),
        }
    }

    pub fn bonds_of(&self, kind: BondType) -> impl Iterator<Item = &Bond> {
        self.bonds.iter().filter(move |b| b.kind == kind)
    }

    /// Check the structural invariants (bond ranges, no self or duplicate
    /// bonds, honeycomb bond-type degree at most one).
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let mut degree = vec![[0usize; 3]; self.n_sites];
        for b in &self.bonds {
            if b.i >= self.n_sites || b.j >= self.n_sites {
                return Err(Error::InvalidSize(format!("bond ({}, {}) out of range", b.i, b.j)));
            }
            if b.i == b.j {
                return Err(Error::InvalidSize(format!("self bond at site {}", b.i)));
            }
            if !seen.insert((b.i.min(b.j), b.i.max(b.j), b.kind)) {
                return Err(Error::InvalidSize(format!("duplicate bond ({}, {})", b.i, b.j)));
            }
            if self.kind == LatticeKind::Honeycomb {
                let t = match b.kind {
                    BondType::X => 0,
                    BondType::Y => 1,
                    BondType::Z => 2,
                    _ => return Err(Error::InvalidSize("honeycomb bond without x/y/z type".into())),
                };
                for s in [b.i, b.j] {
                    degree[s][t] += 1;
                    if degree[s][t] > 1 {
                        return Err(Error::InvalidSize(format!(
                            "site {s} has more than one {:?} bond",
                            b.kind
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn square_index(cols: usize, indexing: Indexing, row: usize, col: usize) -> usize {
    match indexing {
        Indexing::RowMajor => row * cols + col,
        Indexing::Snake if row % 2 == 0 => row * cols + col,
        Indexing::Snake => row * cols + (cols - 1 - col),
    }
}
