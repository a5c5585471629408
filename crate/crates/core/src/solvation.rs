//! Nonpolar solvation from enumerated offset-sphere samples.
//!
//! Each atom's offset sphere (radius R + probe) carries the same set of unit
//! sample points. A point is covered when it lies inside a neighbor's offset
//! sphere. Forces come from forward differences: each neighbor is displaced by
//! δr along each axis and the change in the point's covered state is tallied.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::pdbio::AtomParams;
use crate::spatial::{dist2, NeighborTable};

/// Marks an empty `j_over` slot.
pub const NO_NEIGHBOR: u32 = u32::MAX;

/// Force units are rounded to multiples of 2^-32 so that every force sum is
/// exact and Σ F = 0 holds bit for bit.
const UNIT_GRID: f64 = 4294967296.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Sampling {
    #[default]
    Geodesic,
    /// Uniform random points; needs far more samples for the same accuracy.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvationConfig {
    pub probe_radius: f64,
    pub delta_r: f64,
    pub n_samples: usize,
    pub sampling: Sampling,
}

impl Default for SolvationConfig {
    fn default() -> Self {
        SolvationConfig {
            probe_radius: 1.4,
            delta_r: 0.01,
            n_samples: 1024,
            sampling: Sampling::Geodesic,
        }
    }
}

impl SolvationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.probe_radius > 0.0) || !(self.delta_r > 0.0) {
            return Err(Error::Config("probe radius and delta_r must be positive".into()));
        }
        if self.n_samples < 12 {
            return Err(Error::Config(format!("need at least 12 samples, got {}", self.n_samples)));
        }
        Ok(())
    }

    /// Any two offset spheres that intersect must be within the cavity cutoff.
    pub fn check_cutoff(&self, params: &[AtomParams], cut_cav: f64) -> Result<()> {
        let r_max = params.iter().map(|p| p.r).fold(0.0, f64::max);
        let need = 2.0 * (r_max + self.probe_radius);
        if need > cut_cav {
            return Err(Error::Config(format!(
                "cavity cutoff {cut_cav} Å is below 2(R_max + probe) = {need} Å"
            )));
        }
        Ok(())
    }

    pub fn samples(&self) -> Result<SampleSphere> {
        match self.sampling {
            Sampling::Geodesic => generate_samples(self.n_samples),
            Sampling::Random { seed } => random_samples(self.n_samples, seed),
        }
    }
}

/// Unit sample points shared by every atom.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSphere {
    pub points: Vec<Vec3>,
}

impl SampleSphere {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Points per orbit for polar geodesic sampling.
pub fn orbit_counts(n: usize) -> Vec<usize> {
    let n_orb = ((PI * n as f64 / 4.0).sqrt().round() as usize).max(1);
    let sines: Vec<f64> = (0..n_orb)
        .map(|j| ((j as f64 + 0.5) * PI / n_orb as f64).sin())
        .collect();
    let total: f64 = sines.iter().sum();
    let ideal: Vec<f64> = sines.iter().map(|s| n as f64 * s / total).collect();
    let mut counts: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let mut remainder = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..n_orb).collect();
    order.sort_by(|&a, &b| {
        let fa = ideal[a] - ideal[a].floor();
        let fb = ideal[b] - ideal[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &j in order.iter().cycle() {
        if remainder == 0 {
            break;
        }
        counts[j] += 1;
        remainder -= 1;
    }
    counts
}

/// Polar geodesic sampling: equally spaced latitude orbits, each holding a
/// number of equally spaced points proportional to its circumference.
pub fn generate_samples(n: usize) -> Result<SampleSphere> {
    if n < 12 {
        return Err(Error::Config(format!("need at least 12 samples, got {n}")));
    }
    let counts = orbit_counts(n);
    let n_orb = counts.len();
    let mut points = Vec::with_capacity(n);
    for (j, &m) in counts.iter().enumerate() {
        let theta = (j as f64 + 0.5) * PI / n_orb as f64;
        let (st, ct) = theta.sin_cos();
        let shift = if j % 2 == 1 { 0.5 } else { 0.0 };
        for k in 0..m {
            let phi = 2.0 * PI * (k as f64 + shift) / m as f64;
            let (sp, cp) = phi.sin_cos();
            points.push(Vec3::new(st * cp, st * sp, ct));
        }
    }
    Ok(SampleSphere { points })
}

pub fn random_samples(n: usize, seed: u64) -> Result<SampleSphere> {
    if n < 12 {
        return Err(Error::Config(format!("need at least 12 samples, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let phi: f64 = rng.gen_range(0.0..2.0 * PI);
            let s = (1.0 - z * z).max(0.0).sqrt();
            Vec3::new(s * phi.cos(), s * phi.sin(), z)
        })
        .collect();
    Ok(SampleSphere { points })
}

/// Per-sample coverage: count saturates at 2, `j_over` holds the first
/// covering neighbor when the count is exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExposureGrid {
    pub n_samples: usize,
    pub count: Vec<u8>,
    pub j_over: Vec<u32>,
}

impl ExposureGrid {
    pub fn count(&self, i: usize, k: usize) -> u8 {
        self.count[i * self.n_samples + k]
    }

    pub fn j_over(&self, i: usize, k: usize) -> Option<usize> {
        let j = self.j_over[i * self.n_samples + k];
        (j != NO_NEIGHBOR).then_some(j as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SasaResult {
    pub f_exp: Vec<f64>,
    pub a_exp: Vec<f64>,
    pub g_cav: f64,
}

/// Offset radii, energy prefactors and pruned neighbor lists for one
/// conformation.
#[derive(Debug, Clone)]
pub struct Solvent<'a> {
    pub positions: &'a [Vec3],
    pub r_off: Vec<f64>,
    /// G⁰_i = 4πγ_i(R^off_i)².
    pub g0: Vec<f64>,
    pub delta_r: f64,
    start: Vec<usize>,
    list: Vec<usize>,
}

impl<'a> Solvent<'a> {
    /// Keeps neighbors with d ≤ R^off_i + R^off_j + δr, in ascending order.
    pub fn new(positions: &'a [Vec3], params: &[AtomParams], neighbors: &NeighborTable, config: &SolvationConfig) -> Result<Self> {
        config.validate()?;
        if params.len() != positions.len() {
            return Err(Error::LengthMismatch {
                expected: positions.len(),
                got: params.len(),
            });
        }
        let r_off: Vec<f64> = params.iter().map(|p| p.r + config.probe_radius).collect();
        let g0 = params
            .iter()
            .zip(&r_off)
            .map(|(p, r)| 4.0 * PI * p.gamma * r * r)
            .collect();
        let mut start = Vec::with_capacity(positions.len() + 1);
        let mut list = Vec::new();
        start.push(0);
        for i in 0..positions.len() {
            for &j in neighbors.neighbors(i) {
                let reach = r_off[i] + r_off[j] + config.delta_r;
                if dist2(&positions[i], &positions[j]) <= reach * reach {
                    list.push(j);
                }
            }
            start.push(list.len());
        }
        Ok(Solvent {
            positions,
            r_off,
            g0,
            delta_r: config.delta_r,
            start,
            list,
        })
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.list[self.start[i]..self.start[i + 1]]
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    #[inline]
    pub fn sample_point(&self, i: usize, q: &Vec3) -> Vec3 {
        self.positions[i] + q * self.r_off[i]
    }

    #[inline]
    pub fn covers(&self, j: usize, center: &Vec3, p: &Vec3) -> bool {
        dist2(p, center) <= self.r_off[j] * self.r_off[j]
    }

    /// Force unit of atom i, G⁰_i/(N δr), on the exact grid.
    pub fn unit(&self, i: usize, n_samples: usize) -> f64 {
        quantize(self.g0[i] / (n_samples as f64 * self.delta_r))
    }

    /// Coverage state of one sample of atom i, stopping at the second overlap.
    #[inline]
    fn state(&self, i: usize, p: &Vec3) -> (u8, u32) {
        let mut c = 0u8;
        let mut first = NO_NEIGHBOR;
        for &j in self.neighbors(i) {
            if self.covers(j, &self.positions[j], p) {
                if c == 0 {
                    first = j as u32;
                    c = 1;
                } else {
                    return (2, first);
                }
            }
        }
        (c, if c == 1 { first } else { NO_NEIGHBOR })
    }

    /// Adds the tallies of one sample of atom i into `tally` (indexed like
    /// `neighbors(i)`).
    #[inline]
    fn tally_sample(&self, i: usize, p: &Vec3, c: u8, j_over: u32, tally: &mut [[i32; 3]]) {
        let nb = self.neighbors(i);
        match c {
            0 => {
                for (slot, &j) in nb.iter().enumerate() {
                    for s in 0..3 {
                        let moved = displaced(&self.positions[j], s, self.delta_r);
                        if self.covers(j, &moved, p) {
                            tally[slot][s] -= 1;
                        }
                    }
                }
            }
            1 => {
                let j = j_over as usize;
                let slot = nb.binary_search(&j).expect("j_over is a neighbor");
                for s in 0..3 {
                    let moved = displaced(&self.positions[j], s, self.delta_r);
                    if !self.covers(j, &moved, p) {
                        tally[slot][s] += 1;
                    }
                }
            }
            _ => {}
        }
    }

    fn finish_sasa(&self, exposed: &[usize], n: usize) -> SasaResult {
        let f_exp: Vec<f64> = exposed.iter().map(|&e| e as f64 / n as f64).collect();
        let a_exp = f_exp
            .iter()
            .zip(&self.r_off)
            .map(|(f, r)| f * 4.0 * PI * r * r)
            .collect();
        let g_cav = exposed
            .iter()
            .zip(&self.g0)
            .map(|(&e, g)| g * e as f64 / n as f64)
            .sum();
        SasaResult { f_exp, a_exp, g_cav }
    }

    /// Sequential scatter of integer tallies into forces.
    fn scatter(&self, tallies: &[Vec<[i32; 3]>], n: usize) -> Vec<Vec3> {
        let mut forces = vec![Vec3::zeros(); self.len()];
        for (i, t) in tallies.iter().enumerate() {
            let unit = self.unit(i, n);
            for (slot, &j) in self.neighbors(i).iter().enumerate() {
                for s in 0..3 {
                    if t[slot][s] != 0 {
                        let f = unit * t[slot][s] as f64;
                        forces[i][s] += f;
                        forces[j][s] -= f;
                    }
                }
            }
        }
        forces
    }
}

#[inline]
pub fn displaced(r: &Vec3, axis: usize, delta: f64) -> Vec3 {
    let mut m = *r;
    m[axis] += delta;
    m
}

#[inline]
fn quantize(x: f64) -> f64 {
    (x * UNIT_GRID).round() / UNIT_GRID
}

/// Exposure counts for every atom and sample, with the resulting SASA.
pub fn sasa_pass(solvent: &Solvent, sphere: &SampleSphere) -> (SasaResult, ExposureGrid) {
    let n = sphere.len();
    let per_atom: Vec<(usize, Vec<u8>, Vec<u32>)> = (0..solvent.len())
        .into_par_iter()
        .map(|i| {
            let mut counts = Vec::with_capacity(n);
            let mut over = Vec::with_capacity(n);
            let mut exposed = 0;
            for q in &sphere.points {
                let (c, j) = solvent.state(i, &solvent.sample_point(i, q));
                exposed += (c == 0) as usize;
                counts.push(c);
                over.push(j);
            }
            (exposed, counts, over)
        })
        .collect();
    let mut exposed = Vec::with_capacity(per_atom.len());
    let mut grid = ExposureGrid {
        n_samples: n,
        count: Vec::with_capacity(n * per_atom.len()),
        j_over: Vec::with_capacity(n * per_atom.len()),
    };
    for (e, c, j) in per_atom {
        exposed.push(e);
        grid.count.extend(c);
        grid.j_over.extend(j);
    }
    (solvent.finish_sasa(&exposed, n), grid)
}

/// Integer tallies t_{i,j,s}: the change in atom i's exposed-sample count when
/// neighbor j moves by +δr along axis s. Indexed like `solvent.neighbors(i)`.
pub fn exposure_tallies(solvent: &Solvent, sphere: &SampleSphere, grid: &ExposureGrid) -> Vec<Vec<[i32; 3]>> {
    (0..solvent.len())
        .into_par_iter()
        .map(|i| {
            let mut tally = vec![[0i32; 3]; solvent.neighbors(i).len()];
            for (k, q) in sphere.points.iter().enumerate() {
                let c = grid.count(i, k);
                if c < 2 {
                    let p = solvent.sample_point(i, q);
                    solvent.tally_sample(i, &p, c, grid.j_over[i * grid.n_samples + k], &mut tally);
                }
            }
            tally
        })
        .collect()
}

/// Forces from a previous [`sasa_pass`] on the same positions.
pub fn solvation_forces(solvent: &Solvent, sphere: &SampleSphere, grid: &ExposureGrid) -> Vec<Vec3> {
    let tallies = exposure_tallies(solvent, sphere, grid);
    solvent.scatter(&tallies, sphere.len())
}

/// SASA and forces in one pass per atom, without materializing the grid.
pub fn solvate(solvent: &Solvent, sphere: &SampleSphere) -> (SasaResult, Vec<Vec3>) {
    let n = sphere.len();
    let per_atom: Vec<(usize, Vec<[i32; 3]>)> = (0..solvent.len())
        .into_par_iter()
        .map(|i| {
            let mut tally = vec![[0i32; 3]; solvent.neighbors(i).len()];
            let mut exposed = 0;
            for q in &sphere.points {
                let p = solvent.sample_point(i, q);
                let (c, j) = solvent.state(i, &p);
                exposed += (c == 0) as usize;
                solvent.tally_sample(i, &p, c, j, &mut tally);
            }
            (exposed, tally)
        })
        .collect();
    let (exposed, tallies): (Vec<usize>, Vec<Vec<[i32; 3]>>) = per_atom.into_iter().unzip();
    (solvent.finish_sasa(&exposed, n), solvent.scatter(&tallies, n))
}
