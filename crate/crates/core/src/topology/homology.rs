//! Cubical complexes over Z2.
//!
//! The closed complex of a [`SignGrid`] contains every flagged top cell
//! together with all of its faces. Cells live on the doubled lattice: a
//! lattice point with coordinates `c` spans axis `a` iff `c_a` is odd, so
//! its dimension is the number of odd coordinates.

use std::collections::HashMap;

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::SignGrid;
use crate::error::{Error, Result};
use crate::network::BoxDomain;

/// Largest doubled lattice a complex may use.
pub const MAX_LATTICE_CELLS: usize = 1 << 25;

/// Z2 Betti numbers `b_0..b_d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiVector {
    pub betti: Vec<usize>,
    /// Only `b_0` was computed.
    pub partial: bool,
}

impl BettiVector {
    pub fn total(&self) -> usize {
        self.betti.iter().sum()
    }

    pub fn b(&self, i: usize) -> usize {
        self.betti.get(i).copied().unwrap_or(0)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.betti
            .iter()
            .enumerate()
            .map(|(i, &b)| if i % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }
}

/// Closed cubical complex with Z2 incidences.
#[derive(Debug, Clone)]
pub struct CubicalComplex {
    lattice: Vec<usize>,
    strides: Vec<usize>,
    /// Lattice indices of the cells of each dimension, increasing.
    cells: Vec<Vec<usize>>,
    /// Position of each lattice cell inside its dimension list.
    position: HashMap<usize, u32>,
}

impl CubicalComplex {
    pub fn from_grid(grid: &SignGrid) -> Result<Self> {
        let d = grid.dim();
        let lattice: Vec<usize> = grid.resolution().iter().map(|&n| 2 * n + 1).collect();
        let total = lattice
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&t| t <= MAX_LATTICE_CELLS)
            .ok_or_else(|| Error::Budget(format!("cubical lattice {lattice:?} is too large")))?;
        let mut strides = vec![1usize; d];
        for a in 1..d {
            strides[a] = strides[a - 1] * lattice[a - 1];
        }
        let mut member = bitvec![u64, Lsb0; 0; total];
        let offsets = neighbourhood(d);
        for cell in grid.flagged() {
            let idx = grid.cell_index(cell);
            let centre: usize = idx.iter().zip(&strides).map(|(&i, &s)| (2 * i + 1) * s).sum();
            for off in &offsets {
                let mut lin = centre as isize;
                for a in 0..d {
                    lin += off[a] as isize * strides[a] as isize;
                }
                member.set(lin as usize, true);
            }
        }
        let mut cells = vec![Vec::new(); d + 1];
        let mut position = HashMap::new();
        for lin in member.iter_ones() {
            let mut rest = lin;
            let mut dim = 0;
            for &n in &lattice {
                if (rest % n) % 2 == 1 {
                    dim += 1;
                }
                rest /= n;
            }
            position.insert(lin, cells[dim].len() as u32);
            cells[dim].push(lin);
        }
        Ok(Self {
            lattice,
            strides,
            cells,
            position,
        })
    }

    pub fn dim(&self) -> usize {
        self.lattice.len()
    }

    pub fn cell_counts(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    /// `Σ (−1)^dim · #cells`.
    pub fn euler_characteristic(&self) -> i64 {
        self.cell_counts()
            .iter()
            .enumerate()
            .map(|(i, &n)| if i % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }

    /// Boundary of the `index`-th cell of dimension `dim`, as sorted
    /// positions among the cells of dimension `dim − 1`.
    pub fn boundary(&self, dim: usize, index: usize) -> Vec<u32> {
        if dim == 0 {
            return Vec::new();
        }
        let lin = self.cells[dim][index];
        let mut out = Vec::with_capacity(2 * dim);
        let mut rest = lin;
        for a in 0..self.dim() {
            let c = rest % self.lattice[a];
            rest /= self.lattice[a];
            if c % 2 == 1 {
                for face in [lin - self.strides[a], lin + self.strides[a]] {
                    out.push(self.position[&face]);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Z2 Betti numbers by column reduction with clearing.
    pub fn betti(&self) -> BettiVector {
        let d = self.dim();
        // rank[i] = rank of ∂_i : C_i → C_{i−1}
        let mut rank = vec![0usize; d + 2];
        let mut cleared: Vec<bool> = Vec::new();
        for dim in (1..=d).rev() {
            let n = self.cells[dim].len();
            let skip = std::mem::take(&mut cleared);
            let mut pivot_col: HashMap<u32, Vec<u32>> = HashMap::new();
            let mut lows = vec![false; self.cells[dim - 1].len()];
            for j in 0..n {
                if skip.get(j).copied().unwrap_or(false) {
                    continue;
                }
                let mut col = self.boundary(dim, j);
                while let Some(&low) = col.last() {
                    match pivot_col.get(&low) {
                        Some(other) => col = symmetric_difference(&col, other),
                        None => break,
                    }
                }
                if let Some(&low) = col.last() {
                    lows[low as usize] = true;
                    pivot_col.insert(low, col);
                    rank[dim] += 1;
                }
            }
            cleared = lows;
        }
        let betti = (0..=d).map(|i| self.cells[i].len() - rank[i] - rank[i + 1]).collect();
        BettiVector { betti, partial: false }
    }
}

fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// All offsets in `{−1, 0, 1}^d`.
fn neighbourhood(d: usize) -> Vec<Vec<i8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-1i8..=1).map(move |o| {
                    let mut q = p.clone();
                    q.push(o);
                    q
                })
            })
            .collect();
    }
    out
}

/// Betti numbers of the closed complex of a grid. Full vectors for
/// `d ≤ 3`; for `d = 4` only `b_0` is computed and the result is marked
/// partial.
pub fn betti_z2(grid: &SignGrid) -> Result<BettiVector> {
    match grid.dim() {
        1..=3 => Ok(CubicalComplex::from_grid(grid)?.betti()),
        4 => {
            let mut betti = vec![0; 5];
            betti[0] = components(grid);
            Ok(BettiVector { betti, partial: true })
        }
        d => Err(Error::InvalidArgument(format!("homology is limited to d ≤ 4, got {d}"))),
    }
}

struct DisjointSets {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (small, big) = if self.rank[ra as usize] < self.rank[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        if self.rank[small as usize] == self.rank[big as usize] {
            self.rank[big as usize] += 1;
        }
        true
    }
}

/// Connected components of the flagged cells. Two cells are adjacent when
/// their closures meet, which is the adjacency of the closed complex.
pub fn components(grid: &SignGrid) -> usize {
    let d = grid.dim();
    let res = grid.resolution();
    let offsets: Vec<Vec<i8>> = neighbourhood(d)
        .into_iter()
        .filter(|o| o.iter().any(|&v| v != 0))
        .collect();
    let flagged: Vec<usize> = grid.flagged().collect();
    let mut sets = DisjointSets::new(grid.len());
    let mut count = flagged.len();
    for &cell in &flagged {
        let idx = grid.cell_index(cell);
        'offsets: for off in &offsets {
            let mut nb = 0usize;
            for a in (0..d).rev() {
                let v = idx[a] as isize + off[a] as isize;
                if v < 0 || v >= res[a] as isize {
                    continue 'offsets;
                }
                nb = nb * res[a] + v as usize;
            }
            if nb > cell && grid.get(nb) && sets.union(cell as u32, nb as u32) {
                count -= 1;
            }
        }
    }
    count
}

/// Betti numbers at a resolution and at twice that resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BettiReport {
    pub resolution: Vec<usize>,
    pub betti: BettiVector,
    pub components: usize,
    pub doubled_betti: BettiVector,
    /// Counts agree at both resolutions.
    pub stable: bool,
}

/// Samples `{f ≥ threshold}` at `resolution` and `2·resolution` and
/// compares the homology.
pub fn betti_with_stability<F>(f: F, domain: &BoxDomain, resolution: &[usize], threshold: f64) -> Result<BettiReport>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let grid = super::grid::sign_grid(&f, domain, resolution, threshold)?;
    let betti = betti_z2(&grid)?;
    let components = components(&grid);
    let doubled: Vec<usize> = resolution.iter().map(|&n| 2 * n).collect();
    let fine = super::grid::sign_grid(&f, domain, &doubled, threshold)?;
    let doubled_betti = betti_z2(&fine)?;
    let stable = doubled_betti == betti;
    Ok(BettiReport {
        resolution: resolution.to_vec(),
        betti,
        components,
        doubled_betti,
        stable,
    })
}
