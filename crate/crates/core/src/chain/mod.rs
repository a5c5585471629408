//! Kinematic linkage of a peptide chain.
//!
//! Joints are stored in a flat order that is also a topological order of the
//! linkage tree: per residue φ, then χ1..χl, then ψ. Link `j + 1` is the rigid
//! body driven by joint `j`; link 0 is the fixed base (N-terminal N and its
//! hydrogens, plus any hetero atoms).

mod build;
mod import;
mod kinematics;
pub mod template;

pub use build::{build_chain, BuildOptions, Geometry};
pub use kinematics::{forward_kinematics, link_transforms, naive_link_transforms, Kinematics};
pub use template::{PeptideGeometry, PlaneVector, ResidueSpec, TemplateLibrary};

use crate::error::{Error, Result};
use crate::geometry::{dihedral, wrap180, wrap360, Vec3};

/// Three-letter and one-letter codes of the 20 standard amino acids.
pub const AMINO_ACIDS: [(&str, char); 20] = [
    ("ALA", 'A'),
    ("ARG", 'R'),
    ("ASN", 'N'),
    ("ASP", 'D'),
    ("CYS", 'C'),
    ("GLN", 'Q'),
    ("GLU", 'E'),
    ("GLY", 'G'),
    ("HIS", 'H'),
    ("ILE", 'I'),
    ("LEU", 'L'),
    ("LYS", 'K'),
    ("MET", 'M'),
    ("PHE", 'F'),
    ("PRO", 'P'),
    ("SER", 'S'),
    ("THR", 'T'),
    ("TRP", 'W'),
    ("TYR", 'Y'),
    ("VAL", 'V'),
];

pub fn is_amino_acid(code: &str) -> bool {
    AMINO_ACIDS.iter().any(|(t, _)| *t == code)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointKind {
    Phi,
    Psi,
    /// Side-chain joint k (1-based).
    Chi(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub kind: JointKind,
    pub residue: usize,
    pub parent: Option<usize>,
    /// Axis runs from `axis.0` (on the parent link) to `axis.1`.
    pub axis: (usize, usize),
    /// ZP unit vector along the axis.
    pub u0: Vec3,
    /// Measured dihedral value at θ = 0 (−180 for φ/ψ, χ⁰ for side chains).
    pub zero_value: f64,
    /// Atoms a-b-c-d whose dihedral reads this joint, if measurable.
    pub measure: Option<[MeasurePoint; 4]>,
    /// Added to the measured dihedral (180 when ψ is read through O).
    pub measure_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurePoint {
    Atom(usize),
    /// Fixed point on the base link (virtual preceding carbonyl C).
    Ghost(Vec3),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainAtom {
    pub name: String,
    pub element: String,
    pub ff_type: String,
    /// Residue index, `None` for hetero atoms.
    pub residue: Option<usize>,
    pub link: usize,
    pub zp: Vec3,
    pub hetero: bool,
    pub res_name: String,
    pub res_seq: i32,
    pub chain_id: char,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidueInfo {
    pub name: String,
    pub seq: i32,
    pub chain_id: char,
    pub atoms: std::ops::Range<usize>,
    pub phi: usize,
    pub psi: usize,
    pub chis: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub residues: Vec<ResidueInfo>,
    pub atoms: Vec<ChainAtom>,
    pub joints: Vec<Joint>,
    pub bonds: Vec<(usize, usize)>,
    /// Atom indices per link (`joints.len() + 1` links).
    pub link_atoms: Vec<Vec<usize>>,
    /// Joints frozen unless the caller overrides (e.g. ring-closing φ of imported PRO).
    pub default_frozen: Vec<bool>,
    pub geometry: PeptideGeometry,
}

impl Chain {
    pub fn residue_count(&self) -> usize {
        self.residues.len()
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn link_count(&self) -> usize {
        self.joints.len() + 1
    }

    pub fn zp_positions(&self) -> Vec<Vec3> {
        self.atoms.iter().map(|a| a.zp).collect()
    }

    /// Index of the named atom in residue `res`.
    pub fn find_atom(&self, res: usize, name: &str) -> Option<usize> {
        self.residues[res]
            .atoms
            .clone()
            .find(|&i| self.atoms[i].name == name)
    }

    pub fn chain_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| !a.hetero).count()
    }

    /// Whether joint `k` is an ancestor of (or equal to) joint `j`.
    pub fn is_ancestor(&self, k: usize, mut j: usize) -> bool {
        loop {
            if j == k {
                return true;
            }
            match self.joints[j].parent {
                Some(p) => j = p,
                None => return false,
            }
        }
    }

    /// ZP body vectors: axis-start to axis-end atom, per joint.
    pub fn zp_body_vectors(&self) -> Vec<Vec3> {
        self.joints
            .iter()
            .map(|j| self.atoms[j.axis.1].zp - self.atoms[j.axis.0].zp)
            .collect()
    }

    /// Dihedral readings (degrees, [−180, 180)) of every measurable joint.
    pub fn measure_dihedrals(&self, positions: &[Vec3]) -> Vec<Option<f64>> {
        self.joints
            .iter()
            .map(|j| {
                j.measure.map(|m| {
                    let p = |mp: MeasurePoint| match mp {
                        MeasurePoint::Atom(i) => positions[i],
                        MeasurePoint::Ghost(v) => v,
                    };
                    wrap180(dihedral(&p(m[0]), &p(m[1]), &p(m[2]), &p(m[3])) + j.measure_offset)
                })
            })
            .collect()
    }
}

/// Joint angles θ in degrees, each in [0, 360), with a freeze mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Conformation {
    pub theta: Vec<f64>,
    pub frozen: Vec<bool>,
    pub residue_count: usize,
}

impl Conformation {
    /// The ZP conformation (all θ = 0), with the chain's default freeze mask.
    pub fn zero(chain: &Chain) -> Self {
        Conformation {
            theta: vec![0.0; chain.dof()],
            frozen: chain.default_frozen.clone(),
            residue_count: chain.residue_count(),
        }
    }

    /// θ for given φ/ψ on every residue, side chains at their rotamer defaults.
    pub fn uniform(chain: &Chain, phi: f64, psi: f64) -> Self {
        let mut c = Self::zero(chain);
        for r in &chain.residues {
            c.theta[r.phi] = to_theta(phi, -180.0);
            c.theta[r.psi] = to_theta(psi, -180.0);
        }
        c
    }

    /// θ from dihedral values (degrees) per joint, via the index map.
    pub fn from_dihedrals(chain: &Chain, values: &[f64]) -> Result<Self> {
        check_len(chain.dof(), values.len())?;
        let mut c = Self::zero(chain);
        for (k, j) in chain.joints.iter().enumerate() {
            c.theta[k] = to_theta(values[k], j.zero_value);
        }
        Ok(c)
    }

    /// Dihedral values (degrees, [−180, 180)) per joint, via the index map.
    pub fn dihedrals(&self, chain: &Chain) -> Vec<f64> {
        chain
            .joints
            .iter()
            .zip(&self.theta)
            .map(|(j, &t)| wrap180(t + j.zero_value))
            .collect()
    }

    pub fn set_dihedral(&mut self, chain: &Chain, joint: usize, value: f64) {
        self.theta[joint] = to_theta(value, chain.joints[joint].zero_value);
    }

    /// θ + Δθ on unfrozen joints, renormalised to [0, 360).
    pub fn apply_deltas(&self, deltas: &[f64]) -> Result<Self> {
        check_len(self.theta.len(), deltas.len())?;
        let mut next = self.clone();
        for k in 0..next.theta.len() {
            if !next.frozen[k] {
                next.theta[k] = wrap360(next.theta[k] + deltas[k]);
            }
        }
        Ok(next)
    }

    pub fn free_joints(&self) -> usize {
        self.frozen.iter().filter(|f| !**f).count()
    }
}

pub(crate) fn to_theta(value: f64, zero: f64) -> f64 {
    wrap360(value - zero)
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}
