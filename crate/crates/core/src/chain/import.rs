//! Chains built from PDB geometry, with native dihedrals unwound to a ZP reference.

use std::collections::HashMap;

use log::{info, warn};

use super::template::TemplateLibrary;
use super::{is_amino_acid, to_theta, Chain, ChainAtom, Conformation, Joint, JointKind, MeasurePoint, ResidueInfo};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::pdbio::{PdbAtom, StructureRecord};

const AMIDE_H: [&str; 5] = ["H", "HN", "H1", "H2", "H3"];
const CARBOXYL: [&str; 5] = ["C", "O", "OXT", "OT1", "OT2"];

fn covalent_radius(element: &str) -> f64 {
    match element {
        "H" => 0.31,
        "C" => 0.76,
        "N" => 0.71,
        "O" => 0.66,
        "S" => 1.05,
        "P" => 1.07,
        _ => 1.2,
    }
}

struct ImportResidue<'a> {
    name: String,
    seq: i32,
    chain_id: char,
    atoms: Vec<&'a PdbAtom>,
}

impl ImportResidue<'_> {
    fn get(&self, name: &str) -> Option<&PdbAtom> {
        self.atoms.iter().copied().find(|a| a.name == name)
    }
}

impl Chain {
    /// Builds a chain from PDB geometry, keeping every bond and peptide group as read.
    ///
    /// The N-terminal N is moved to the origin. Returns the chain (ZP reference
    /// obtained by unwinding) and the native conformation, which reproduces the
    /// input coordinates under forward kinematics.
    pub fn from_structure(rec: &StructureRecord, lib: &TemplateLibrary) -> Result<(Chain, Conformation)> {
        let first_chain = rec
            .atoms
            .iter()
            .find(|a| !a.hetero && is_amino_acid(&a.res_name))
            .map(|a| a.chain_id)
            .ok_or(Error::EmptyStructure)?;
        let mut residues: Vec<ImportResidue> = Vec::new();
        let mut hetero: Vec<&PdbAtom> = Vec::new();
        let mut last_key: Option<(i32, char)> = None;
        for a in &rec.atoms {
            if a.hetero || a.chain_id != first_chain || !is_amino_acid(&a.res_name) {
                hetero.push(a);
                continue;
            }
            let key = (a.res_seq, a.icode);
            if last_key != Some(key) {
                residues.push(ImportResidue {
                    name: a.res_name.clone(),
                    seq: a.res_seq,
                    chain_id: a.chain_id,
                    atoms: Vec::new(),
                });
                last_key = Some(key);
            }
            residues.last_mut().unwrap().atoms.push(a);
        }
        if residues.is_empty() {
            return Err(Error::EmptyStructure);
        }
        for (i, r) in residues.iter().enumerate() {
            for bb in ["N", "CA", "C"] {
                if r.get(bb).is_none() {
                    return Err(Error::MissingBackbone {
                        residue: i,
                        name: r.name.clone(),
                        atom: bb,
                    });
                }
            }
        }
        if !residues.iter().any(|r| r.atoms.iter().any(|a| a.element == "H")) {
            warn!("structure has no hydrogens; continuing with heavy atoms only");
        }
        if !hetero.is_empty() {
            info!("retaining {} hetero atoms as fixed field sources", hetero.len());
        }
        let origin = residues[0].get("N").unwrap().pos;
        let m = residues.len();

        // Joints and atom-to-link assignment.
        let mut joints: Vec<Joint> = Vec::new();
        let mut atoms: Vec<ChainAtom> = Vec::new();
        let mut infos: Vec<ResidueInfo> = Vec::new();
        let mut default_frozen = Vec::new();
        let mut res_index: Vec<HashMap<String, usize>> = Vec::new();
        let mut prev_psi: Option<usize> = None;
        let mut link_of_n = 0usize;

        for (i, r) in residues.iter().enumerate() {
            let start = atoms.len();
            let template = lib.get(&r.name);
            let phi_j = joints.len();
            joints.push(Joint {
                kind: JointKind::Phi,
                residue: i,
                parent: prev_psi,
                axis: (0, 0),
                u0: Vec3::zeros(),
                zero_value: -180.0,
                measure: None,
                measure_offset: 0.0,
            });
            default_frozen.push(r.name == "PRO");
            let mut chi_joints = Vec::new();
            let mut chi_defs = Vec::new();
            if let Some(t) = template {
                for (k, chi) in t.chis.iter().enumerate() {
                    if chi.atoms.iter().any(|n| r.get(n).is_none()) {
                        break;
                    }
                    chi_joints.push(joints.len());
                    chi_defs.push(chi.clone());
                    joints.push(Joint {
                        kind: JointKind::Chi(k + 1),
                        residue: i,
                        parent: Some(if k == 0 { phi_j } else { chi_joints[k - 1] }),
                        axis: (0, 0),
                        u0: Vec3::zeros(),
                        zero_value: chi.default,
                        measure: None,
                        measure_offset: 0.0,
                    });
                    default_frozen.push(false);
                }
            }
            let psi_j = joints.len();
            joints.push(Joint {
                kind: JointKind::Psi,
                residue: i,
                parent: Some(phi_j),
                axis: (0, 0),
                u0: Vec3::zeros(),
                zero_value: -180.0,
                measure: None,
                measure_offset: 0.0,
            });
            default_frozen.push(false);

            let mut index = HashMap::new();
            for a in &r.atoms {
                let link = if a.name == "N" || AMIDE_H.contains(&a.name.as_str()) {
                    link_of_n
                } else if CARBOXYL.contains(&a.name.as_str()) {
                    psi_j + 1
                } else {
                    let k = template
                        .and_then(|t| t.atoms.iter().find(|ta| ta.name == a.name))
                        .map_or(0, |ta| ta.link);
                    if k >= 1 && k <= chi_joints.len() {
                        chi_joints[k - 1] + 1
                    } else {
                        phi_j + 1
                    }
                };
                let ff_type = template
                    .and_then(|t| t.atoms.iter().find(|ta| ta.name == a.name))
                    .map(|ta| ta.ff_type.clone())
                    .or_else(|| lib.backbone_atom(&a.name).map(|b| b.ff_type.clone()))
                    .unwrap_or_default();
                index.insert(a.name.clone(), atoms.len());
                atoms.push(ChainAtom {
                    name: a.name.clone(),
                    element: a.element.clone(),
                    ff_type,
                    residue: Some(i),
                    link,
                    zp: a.pos - origin,
                    hetero: false,
                    res_name: r.name.clone(),
                    res_seq: r.seq,
                    chain_id: r.chain_id,
                });
            }
            let n = index["N"];
            let ca = index["CA"];
            let c = index["C"];
            joints[phi_j].axis = (n, ca);
            joints[psi_j].axis = (ca, c);
            for (k, chi) in chi_defs.iter().enumerate() {
                let at = |s: &str| index[s];
                let j = &mut joints[chi_joints[k]];
                j.axis = (at(&chi.atoms[1]), at(&chi.atoms[2]));
                j.measure = Some([
                    MeasurePoint::Atom(at(&chi.atoms[0])),
                    MeasurePoint::Atom(at(&chi.atoms[1])),
                    MeasurePoint::Atom(at(&chi.atoms[2])),
                    MeasurePoint::Atom(at(&chi.atoms[3])),
                ]);
            }
            if i > 0 {
                let pc = res_index[i - 1]["C"];
                joints[phi_j].measure = Some([
                    MeasurePoint::Atom(pc),
                    MeasurePoint::Atom(n),
                    MeasurePoint::Atom(ca),
                    MeasurePoint::Atom(c),
                ]);
            }
            infos.push(ResidueInfo {
                name: r.name.clone(),
                seq: r.seq,
                chain_id: r.chain_id,
                atoms: start..atoms.len(),
                phi: phi_j,
                psi: psi_j,
                chis: chi_joints,
            });
            res_index.push(index);
            prev_psi = Some(psi_j);
            link_of_n = psi_j + 1;
        }

        // ψ is read through the next N, or through O (+180) on the last residue.
        for i in 0..m {
            let psi_j = infos[i].psi;
            let idx = &res_index[i];
            let (n, ca, c) = (idx["N"], idx["CA"], idx["C"]);
            if i + 1 < m {
                joints[psi_j].measure = Some([
                    MeasurePoint::Atom(n),
                    MeasurePoint::Atom(ca),
                    MeasurePoint::Atom(c),
                    MeasurePoint::Atom(res_index[i + 1]["N"]),
                ]);
            } else if let Some(&o) = idx.get("O") {
                joints[psi_j].measure = Some([
                    MeasurePoint::Atom(n),
                    MeasurePoint::Atom(ca),
                    MeasurePoint::Atom(c),
                    MeasurePoint::Atom(o),
                ]);
                joints[psi_j].measure_offset = 180.0;
            }
        }

        // Hetero atoms ride on the fixed base link.
        for h in &hetero {
            atoms.push(ChainAtom {
                name: h.name.clone(),
                element: h.element.clone(),
                ff_type: String::new(),
                residue: None,
                link: 0,
                zp: h.pos - origin,
                hetero: true,
                res_name: h.res_name.clone(),
                res_seq: h.res_seq,
                chain_id: h.chain_id,
            });
        }

        // Bonds: distance-based within a residue plus the peptide C-N bonds.
        let mut bonds = Vec::new();
        for (i, info) in infos.iter().enumerate() {
            let range: Vec<usize> = info.atoms.clone().collect();
            for (x, &a) in range.iter().enumerate() {
                for &b in &range[x + 1..] {
                    let (ea, eb) = (&atoms[a].element, &atoms[b].element);
                    if ea == "H" && eb == "H" {
                        continue;
                    }
                    let cut = covalent_radius(ea) + covalent_radius(eb) + 0.45;
                    if (atoms[a].zp - atoms[b].zp).norm() <= cut {
                        bonds.push((a, b));
                    }
                }
            }
            if i + 1 < m {
                bonds.push((res_index[i]["C"], res_index[i + 1]["N"]));
            }
        }

        let mut link_atoms = vec![Vec::new(); joints.len() + 1];
        for (idx, a) in atoms.iter().enumerate() {
            link_atoms[a.link].push(idx);
        }

        // Native axes, then unwind: ZP = FK(native reference, −θ_native).
        let native: Vec<Vec3> = atoms.iter().map(|a| a.zp).collect();
        for j in joints.iter_mut() {
            j.u0 = (native[j.axis.1] - native[j.axis.0]).normalize();
        }
        let mut chain = Chain {
            residues: infos,
            atoms,
            joints,
            bonds,
            link_atoms,
            default_frozen,
            geometry: lib.geometry.clone(),
        };
        let readings = chain.measure_dihedrals(&native);
        let mut theta_native = Vec::with_capacity(chain.dof());
        for (j, reading) in chain.joints.iter().zip(&readings) {
            theta_native.push(reading.map_or(0.0, |v| to_theta(v, j.zero_value)));
        }
        let unwind = Conformation {
            theta: theta_native.iter().map(|t| -t).collect(),
            frozen: vec![false; chain.dof()],
            residue_count: m,
        };
        let zp = super::forward_kinematics(&chain, &unwind)?;
        for (a, p) in chain.atoms.iter_mut().zip(&zp) {
            a.zp = *p;
        }
        for j in chain.joints.iter_mut() {
            j.u0 = (zp[j.axis.1] - zp[j.axis.0]).normalize();
        }
        let conf = Conformation {
            theta: theta_native,
            frozen: chain.default_frozen.clone(),
            residue_count: m,
        };
        Ok((chain, conf))
    }
}
