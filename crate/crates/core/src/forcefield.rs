//! Truncated, weighted Coulomb and Lennard-Jones terms.
//!
//! Energies sum each unordered pair once (j > i). Forces are the exact
//! negative gradients of those energies, accumulated per atom over ordered
//! pairs, so atoms can be processed independently and in parallel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::pdbio::AtomParams;
use crate::spatial::{dist2, NeighborTable};
use crate::topology::{BondTree, WeightTable};

/// Distances below this raise [`Error::DistanceUnderflow`].
pub const MIN_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum Dielectric {
    /// κ(d) = d / 1 Å.
    #[default]
    Distance,
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub g_elec: f64,
    pub g_vdw: f64,
    pub g_cav: f64,
    pub g_total: f64,
}

impl EnergyBreakdown {
    pub fn new(g_elec: f64, g_vdw: f64, g_cav: f64) -> Self {
        EnergyBreakdown {
            g_elec,
            g_vdw,
            g_cav,
            g_total: g_elec + g_vdw + g_cav,
        }
    }
}

/// Everything a pair term needs besides positions and the neighbor table.
#[derive(Debug, Clone, Copy)]
pub struct PairContext<'a> {
    pub params: &'a [AtomParams],
    pub tree: &'a BondTree,
    pub weights: WeightTable,
    pub coulomb: f64,
    pub dielectric: Dielectric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Elec,
    Vdw,
}

impl PairContext<'_> {
    /// (energy, −dE/dd) for one pair at distance d.
    #[inline]
    pub fn pair(&self, term: Term, i: usize, j: usize, d: f64) -> (f64, f64) {
        let class = self.tree.classify_unchecked(i, j);
        let (a, b) = (&self.params[i], &self.params[j]);
        match term {
            Term::Elec => {
                let w = self.weights.elec(class);
                let qq = self.coulomb * w * a.q * b.q;
                match self.dielectric {
                    Dielectric::Distance => {
                        let e = qq / (d * d);
                        (e, 2.0 * e / d)
                    }
                    Dielectric::Constant(k) => {
                        let e = qq / (k * d);
                        (e, e / d)
                    }
                }
            }
            Term::Vdw => {
                let w = self.weights.vdw(class);
                let eps = w * (a.eps * b.eps).sqrt();
                let s = (a.r + b.r) / d;
                let s6 = s * s * s * s * s * s;
                let s12 = s6 * s6;
                (eps * (s12 - 2.0 * s6), 12.0 * eps * (s12 - s6) / d)
            }
        }
    }
}

#[inline]
fn checked_distance(positions: &[Vec3], i: usize, j: usize) -> Result<f64> {
    let d = dist2(&positions[i], &positions[j]).sqrt();
    if d < MIN_DISTANCE {
        return Err(Error::DistanceUnderflow { i, j, d });
    }
    Ok(d)
}

/// Energy of one term over pairs within `cut`.
pub fn term_energy(positions: &[Vec3], ctx: &PairContext, neighbors: &NeighborTable, term: Term, cut: f64) -> Result<f64> {
    let c2 = cut * cut;
    let mut total = 0.0;
    for i in 0..positions.len() {
        let mut partial = 0.0;
        for &j in neighbors.neighbors(i) {
            if j <= i || dist2(&positions[i], &positions[j]) > c2 {
                continue;
            }
            let d = checked_distance(positions, i, j)?;
            partial += ctx.pair(term, i, j, d).0;
        }
        total += partial;
    }
    Ok(total)
}

/// Per-atom forces of one term over pairs within `cut`.
pub fn term_forces(positions: &[Vec3], ctx: &PairContext, neighbors: &NeighborTable, term: Term, cut: f64) -> Result<Vec<Vec3>> {
    let c2 = cut * cut;
    (0..positions.len())
        .into_par_iter()
        .map(|i| {
            let mut f = Vec3::zeros();
            for &j in neighbors.neighbors(i) {
                let diff = positions[i] - positions[j];
                if dist2(&positions[i], &positions[j]) > c2 {
                    continue;
                }
                let d = checked_distance(positions, i, j)?;
                let (_, g) = ctx.pair(term, i, j, d);
                f += diff * (g / d);
            }
            Ok(f)
        })
        .collect()
}

pub fn elec_energy(positions: &[Vec3], ctx: &PairContext, neighbors: &NeighborTable, cut: f64) -> Result<f64> {
    term_energy(positions, ctx, neighbors, Term::Elec, cut)
}

pub fn elec_forces(positions: &[Vec3], ctx: &PairContext, neighbors: &NeighborTable, cut: f64) -> Result<Vec<Vec3>> {
    term_forces(positions, ctx, neighbors, Term::Elec, cut)
}

pub fn vdw_energy(positions: &[Vec3], ctx: &PairContext, neighbors: &NeighborTable, cut: f64) -> Result<f64> {
    term_energy(positions, ctx, neighbors, Term::Vdw, cut)
}

pub fn vdw_forces(positions: &[Vec3], ctx: &PairContext, neighbors: &NeighborTable, cut: f64) -> Result<Vec<Vec3>> {
    term_forces(positions, ctx, neighbors, Term::Vdw, cut)
}

/// Both pair terms in one pass: (g_elec, g_vdw, per-atom force sum).
pub fn pair_terms(
    positions: &[Vec3],
    ctx: &PairContext,
    neighbors: &NeighborTable,
    cut_elec: f64,
    cut_vdw: f64,
) -> Result<(f64, f64, Vec<Vec3>)> {
    let (ce2, cv2) = (cut_elec * cut_elec, cut_vdw * cut_vdw);
    let per_atom: Vec<(f64, f64, Vec3)> = (0..positions.len())
        .into_par_iter()
        .map(|i| {
            let (mut ee, mut ev) = (0.0, 0.0);
            let mut f = Vec3::zeros();
            for &j in neighbors.neighbors(i) {
                let r2 = dist2(&positions[i], &positions[j]);
                let in_e = r2 <= ce2;
                let in_v = r2 <= cv2;
                if !in_e && !in_v {
                    continue;
                }
                let d = r2.sqrt();
                if d < MIN_DISTANCE {
                    return Err(Error::DistanceUnderflow { i, j, d });
                }
                let inv = 1.0 / d;
                let class = ctx.tree.classify_unchecked(i, j);
                let (a, b) = (&ctx.params[i], &ctx.params[j]);
                let mut g = 0.0;
                if in_e {
                    let qq = ctx.coulomb * ctx.weights.elec(class) * a.q * b.q;
                    let (e, ge) = match ctx.dielectric {
                        Dielectric::Distance => {
                            let e = qq * inv * inv;
                            (e, 2.0 * e * inv)
                        }
                        Dielectric::Constant(k) => {
                            let e = qq * inv / k;
                            (e, e * inv)
                        }
                    };
                    if j > i {
                        ee += e;
                    }
                    g += ge;
                }
                if in_v {
                    let eps = ctx.weights.vdw(class) * (a.eps * b.eps).sqrt();
                    let s2 = (a.r + b.r) * (a.r + b.r) * inv * inv;
                    let s6 = s2 * s2 * s2;
                    let s12 = s6 * s6;
                    if j > i {
                        ev += eps * (s12 - 2.0 * s6);
                    }
                    g += 12.0 * eps * (s12 - s6) * inv;
                }
                f += (positions[i] - positions[j]) * (g * inv);
            }
            Ok((ee, ev, f))
        })
        .collect::<Result<_>>()?;
    let mut ge = 0.0;
    let mut gv = 0.0;
    let mut forces = Vec::with_capacity(per_atom.len());
    for (e, v, f) in per_atom {
        ge += e;
        gv += v;
        forces.push(f);
    }
    Ok((ge, gv, forces))
}
