//! Uniform-grid hashing of atom centers and cut-off neighbor lists.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Buckets ≈ α·n.
    pub alpha: f64,
    /// Lower bound on the cell size, Å.
    pub min_cell: f64,
    pub cut_elec: f64,
    pub cut_vdw: f64,
    pub cut_cav: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            alpha: 1.0,
            min_cell: 1.0,
            cut_elec: 9.0,
            cut_vdw: 5.0,
            cut_cav: 8.0,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        for (name, c) in [("elec", self.cut_elec), ("vdw", self.cut_vdw), ("cav", self.cut_cav)] {
            if !(c > 0.0) {
                return Err(Error::Config(format!("{name} cutoff must be positive")));
            }
        }
        Ok(())
    }

    pub fn max_cutoff(&self) -> f64 {
        self.cut_elec.max(self.cut_vdw).max(self.cut_cav)
    }
}

/// Squared distance; every cutoff test in the crate goes through this.
#[inline]
pub fn dist2(a: &Vec3, b: &Vec3) -> f64 {
    let d = a - b;
    d.x * d.x + d.y * d.y + d.z * d.z
}

#[inline]
pub fn within(a: &Vec3, b: &Vec3, cut: f64) -> bool {
    dist2(a, b) <= cut * cut
}

#[derive(Debug, Clone)]
pub struct HashGrid {
    pub cell_size: f64,
    pub r_min: Vec3,
    pub r_max: Vec3,
    pub dims: [usize; 3],
    /// CSR buckets: atoms of cell c are `atoms[start[c]..start[c + 1]]`.
    pub start: Vec<usize>,
    pub atoms: Vec<usize>,
    pub cell_of: Vec<usize>,
}

impl HashGrid {
    pub fn build(positions: &[Vec3], alpha: f64, min_cell: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptyStructure);
        }
        let mut r_min = Vec3::repeat(f64::INFINITY);
        let mut r_max = Vec3::repeat(f64::NEG_INFINITY);
        for (i, p) in positions.iter().enumerate() {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
            r_min = r_min.inf(p);
            r_max = r_max.sup(p);
        }
        let extent = r_max - r_min;
        let volume = extent.x * extent.y * extent.z;
        let n = positions.len() as f64;
        let mut cell_size = (volume / (alpha * n)).cbrt().max(min_cell);
        if !(cell_size > 0.0) {
            // Degenerate box (planar or collinear) with no floor configured.
            cell_size = extent.max().max(1.0) / n.cbrt();
        }
        let dims = [0, 1, 2].map(|k| (extent[k] / cell_size).floor() as usize + 1);
        let mut grid = HashGrid {
            cell_size,
            r_min,
            r_max,
            dims,
            start: Vec::new(),
            atoms: Vec::new(),
            cell_of: Vec::with_capacity(positions.len()),
        };
        let ncell = dims[0] * dims[1] * dims[2];
        let mut counts = vec![0usize; ncell + 1];
        for p in positions {
            let c = grid.flat(grid.cell_index(p));
            grid.cell_of.push(c);
            counts[c + 1] += 1;
        }
        for c in 0..ncell {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut atoms = vec![0usize; positions.len()];
        for (i, &c) in grid.cell_of.iter().enumerate() {
            atoms[fill[c]] = i;
            fill[c] += 1;
        }
        grid.start = counts;
        grid.atoms = atoms;
        Ok(grid)
    }

    /// ⌊(r − r_min)/s_c⌋ componentwise, clamped to the grid.
    pub fn cell_index(&self, p: &Vec3) -> [usize; 3] {
        [0, 1, 2].map(|k| {
            let v = ((p[k] - self.r_min[k]) / self.cell_size).floor();
            (v.max(0.0) as usize).min(self.dims[k] - 1)
        })
    }

    pub fn flat(&self, c: [usize; 3]) -> usize {
        (c[2] * self.dims[1] + c[1]) * self.dims[0] + c[0]
    }

    pub fn bucket(&self, flat: usize) -> &[usize] {
        &self.atoms[self.start[flat]..self.start[flat + 1]]
    }

    fn cell_of_atom(&self, i: usize) -> [i64; 3] {
        let f = self.cell_of[i];
        let x = f % self.dims[0];
        let y = (f / self.dims[0]) % self.dims[1];
        let z = f / (self.dims[0] * self.dims[1]);
        [x as i64, y as i64, z as i64]
    }

    /// The same region as [`HashGrid::offsets`], as (dz, dy, half-width in x) rows.
    pub fn offset_rows(&self, d_cut: f64) -> Vec<(i64, i64, i64)> {
        let mut rows: Vec<(i64, i64, i64)> = Vec::new();
        for [dx, dy, dz] in self.offsets(d_cut) {
            match rows.last_mut() {
                Some(r) if r.0 == dz && r.1 == dy => r.2 = r.2.max(dx),
                _ => rows.push((dz, dy, dx.abs())),
            }
        }
        rows
    }

    pub fn cell_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// Cell offsets whose centers lie within d_cut + √3·s_c of the query cell center.
    pub fn offsets(&self, d_cut: f64) -> Vec<[i64; 3]> {
        let rc = d_cut + 3f64.sqrt() * self.cell_size;
        let reach = (rc / self.cell_size).ceil() as i64;
        let mut out = Vec::new();
        for dz in -reach..=reach {
            for dy in -reach..=reach {
                for dx in -reach..=reach {
                    let d = self.cell_size * ((dx * dx + dy * dy + dz * dz) as f64).sqrt();
                    if d <= rc {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

/// Per-atom neighbor lists filtered at `cutoff` (exact distance test), in
/// ascending atom order whichever way they were built.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    pub cutoff: f64,
    pub start: Vec<usize>,
    pub list: Vec<usize>,
}

impl NeighborTable {
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.list[self.start[i]..self.start[i + 1]]
    }

    pub fn len(&self) -> usize {
        self.start.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pair_count(&self) -> usize {
        self.list.len()
    }

    /// Neighbors of `i` within a smaller cutoff.
    pub fn filtered<'a>(&'a self, i: usize, positions: &'a [Vec3], cut: f64) -> impl Iterator<Item = usize> + 'a {
        let pi = positions[i];
        self.neighbors(i).iter().copied().filter(move |&j| within(&pi, &positions[j], cut))
    }

    /// Grid-accelerated build. Each unordered pair is tested once.
    pub fn build(grid: &HashGrid, positions: &[Vec3], d_cut: f64) -> Self {
        let rows = grid.offset_rows(d_cut);
        let dims = grid.dims.map(|d| d as i64);
        let mut pairs = Vec::new();
        for (i, p) in positions.iter().enumerate() {
            let c = grid.cell_of_atom(i);
            for &(dz, dy, w) in &rows {
                let (z, y) = (c[2] + dz, c[1] + dy);
                if z < 0 || z >= dims[2] || y < 0 || y >= dims[1] {
                    continue;
                }
                let x0 = (c[0] - w).max(0);
                let x1 = (c[0] + w).min(dims[0] - 1);
                if x0 > x1 {
                    continue;
                }
                let f0 = grid.flat([x0 as usize, y as usize, z as usize]);
                let f1 = grid.flat([x1 as usize, y as usize, z as usize]);
                for &j in &grid.atoms[grid.start[f0]..grid.start[f1 + 1]] {
                    if j > i && within(p, &positions[j], d_cut) {
                        pairs.push((i as u32, j as u32));
                    }
                }
            }
        }
        Self::from_pairs(positions.len(), &pairs, d_cut)
    }

    /// All-pairs build, the unhashed reference path. Lists are ascending.
    pub fn brute(positions: &[Vec3], d_cut: f64) -> Self {
        let mut pairs = Vec::new();
        for (i, p) in positions.iter().enumerate() {
            for (j, q) in positions.iter().enumerate().skip(i + 1) {
                if within(p, q, d_cut) {
                    pairs.push((i as u32, j as u32));
                }
            }
        }
        Self::from_pairs(positions.len(), &pairs, d_cut)
    }

    /// Symmetric CSR lists from unordered pairs (i < j) given in ascending i.
    /// Each list comes out ascending without a comparison sort: lower
    /// neighbors are filled in pair order, then upper neighbors by walking
    /// the lower lists in ascending atom order.
    fn from_pairs(n: usize, pairs: &[(u32, u32)], cutoff: f64) -> Self {
        let mut lower = vec![0usize; n];
        let mut start = vec![0usize; n + 1];
        for &(i, j) in pairs {
            lower[j as usize] += 1;
            start[i as usize + 1] += 1;
            start[j as usize + 1] += 1;
        }
        for k in 0..n {
            start[k + 1] += start[k];
        }
        let mut list = vec![0usize; 2 * pairs.len()];
        let mut fill = start.clone();
        for &(i, j) in pairs {
            let j = j as usize;
            list[fill[j]] = i as usize;
            fill[j] += 1;
        }
        for j in 0..n {
            for k in start[j]..start[j] + lower[j] {
                let i = list[k];
                list[fill[i]] = j;
                fill[i] += 1;
            }
        }
        NeighborTable { cutoff, start, list }
    }
}

/// Builds the grid and the table at `d_cut` in one call.
pub fn neighbor_table(positions: &[Vec3], alpha: f64, min_cell: f64, d_cut: f64) -> Result<NeighborTable> {
    let grid = HashGrid::build(positions, alpha, min_cell)?;
    Ok(NeighborTable::build(&grid, positions, d_cut))
}
