//! Canonical (template) chain construction at the ZP conformation.

use std::collections::HashMap;

use super::template::{PlaneVector, ResidueSpec, TemplateLibrary};
use super::{Chain, ChainAtom, Joint, JointKind, MeasurePoint, ResidueInfo};
use crate::error::{Error, Result};
use crate::geometry::{place, Vec3};
use crate::pdbio::StructureRecord;

/// Source of the chain geometry.
#[derive(Debug, Clone, Copy)]
pub enum Geometry<'a> {
    Canonical,
    Imported(&'a StructureRecord),
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Peptide bonds (index i joins residue i and i + 1, 0-based) built cis.
    pub cis: Vec<usize>,
}

/// Builds a chain. Canonical mode returns the ZP linkage; imported mode
/// unwinds the native dihedrals (see [`Chain::from_structure`]).
pub fn build_chain(
    sequence: &[String],
    geometry: Geometry<'_>,
    lib: &TemplateLibrary,
    opts: &BuildOptions,
) -> Result<Chain> {
    match geometry {
        Geometry::Canonical => build_canonical(sequence, lib, opts),
        Geometry::Imported(rec) => Ok(Chain::from_structure(rec, lib)?.0),
    }
}

/// Rigid in-plane placement of the canonical trans unit CA, C, O, N', H, CA'.
struct Unit {
    c: Vec3,
    o: Vec3,
    n_next: Vec3,
    h_next: Vec3,
    ca_next: Vec3,
}

struct UnitShape {
    b2: Vec3,
    b3: Vec3,
    c: Vec3,
    o: Vec3,
    h: Vec3,
}

impl UnitShape {
    fn new(lib: &TemplateLibrary) -> Self {
        let g = &lib.geometry;
        let b2 = Vec3::new(g.ca_n, 0.0, 0.0);
        let a = g.body_angle.to_radians();
        let b3 = Vec3::new(g.n_ca * a.cos(), g.n_ca * a.sin(), 0.0);
        let comb = |v: PlaneVector| {
            let (c1, c2) = g.constants(v);
            b2 * c1 + b3 * c2
        };
        let c = comb(PlaneVector::CaC);
        UnitShape {
            b2,
            b3,
            c,
            o: c + comb(PlaneVector::CO),
            h: b2 + comb(PlaneVector::NH),
        }
    }

    /// Maps the local shape by rotation `rho` (radians) and optional reflection, anchored at `ca`.
    fn place(&self, ca: Vec3, rho: f64, reflect: bool) -> Unit {
        let (s, c) = rho.sin_cos();
        let map = |v: &Vec3| {
            let y = if reflect { -v.y } else { v.y };
            ca + Vec3::new(c * v.x - s * y, s * v.x + c * y, 0.0)
        };
        Unit {
            c: map(&self.c),
            o: map(&self.o),
            n_next: map(&self.b2),
            h_next: map(&self.h),
            ca_next: map(&(self.b2 + self.b3)),
        }
    }
}

fn side(a: &Vec3, b: &Vec3, p: &Vec3) -> f64 {
    let ab = b - a;
    let ap = p - a;
    ab.x * ap.y - ab.y * ap.x
}

fn reflect_across(a: &Vec3, b: &Vec3, p: &Vec3) -> Vec3 {
    let d = (b - a).normalize();
    let v = p - a;
    a + d * (2.0 * v.dot(&d)) - v
}

struct Builder<'a> {
    lib: &'a TemplateLibrary,
    atoms: Vec<ChainAtom>,
    bonds: Vec<(usize, usize)>,
}

impl Builder<'_> {
    fn push(&mut self, name: &str, element: &str, ff_type: &str, res: usize, link: usize, zp: Vec3, res_name: &str) -> usize {
        self.atoms.push(ChainAtom {
            name: name.into(),
            element: element.into(),
            ff_type: ff_type.into(),
            residue: Some(res),
            link,
            zp,
            hetero: false,
            res_name: res_name.into(),
            res_seq: res as i32 + 1,
            chain_id: 'A',
        });
        self.atoms.len() - 1
    }

    fn push_backbone(&mut self, name: &str, res: usize, link: usize, zp: Vec3, res_name: &str) -> usize {
        let b = self.lib.backbone_atom(name).expect("validated backbone");
        let (e, t) = (b.element.clone(), b.ff_type.clone());
        self.push(name, &e, &t, res, link, zp, res_name)
    }
}

fn build_canonical(sequence: &[String], lib: &TemplateLibrary, opts: &BuildOptions) -> Result<Chain> {
    if sequence.is_empty() {
        return Err(Error::EmptySequence);
    }
    let specs: Vec<&ResidueSpec> = sequence
        .iter()
        .map(|code| {
            if !super::is_amino_acid(code) {
                return Err(Error::UnknownResidue(code.clone()));
            }
            lib.get(code).ok_or_else(|| Error::NoTemplate(code.clone()))
        })
        .collect::<Result<_>>()?;
    let m = specs.len();
    let shape = UnitShape::new(lib);
    let tau = lib.geometry.tau.to_radians();

    // Virtual unit 0 ends on N1 (origin) and CA1 (+x); it supplies H1 and the ghost C0.
    let ca1 = Vec3::new(lib.geometry.n_ca, 0.0, 0.0);
    let b3_angle = shape.b3.y.atan2(shape.b3.x);
    let rho0 = -b3_angle;
    let ca0 = Vec3::new(
        -(rho0.cos() * shape.b2.x - rho0.sin() * shape.b2.y),
        -(rho0.sin() * shape.b2.x + rho0.cos() * shape.b2.y),
        0.0,
    );
    let unit0 = shape.place(ca0, rho0, false);
    debug_assert!(unit0.n_next.norm() < 1e-9 && (unit0.ca_next - ca1).norm() < 1e-9);
    let ghost_c0 = unit0.c;

    let mut b = Builder {
        lib,
        atoms: Vec::new(),
        bonds: Vec::new(),
    };
    let mut joints: Vec<Joint> = Vec::new();
    let mut residues = Vec::new();

    let mut n_pos = Vec3::zeros();
    let mut h_pos = unit0.h_next;
    let mut ca_pos = ca1;
    let mut prev_c = ghost_c0;
    let mut prev_c_atom: Option<usize> = None;
    // Atom indices of N and H for the current residue, already created by the previous unit.
    let mut pending_nh: Option<(usize, usize)> = None;
    let mut prev_psi: Option<usize> = None;

    for (i, spec) in specs.iter().enumerate() {
        let name = spec.aa_type.as_str();
        let start = b.atoms.len();
        let (n_idx, h_idx) = match pending_nh {
            Some(p) => p,
            None => {
                let n = b.push_backbone("N", i, 0, n_pos, name);
                let h = b.push_backbone("H", i, 0, h_pos, name);
                b.bonds.push((n, h));
                (n, h)
            }
        };
        let _ = h_idx;

        // Orientation of unit i: N-CA-C = τ, φ = ψ = 180 (trans across N-CA and CA-C).
        let a_n = (n_pos - ca_pos).y.atan2((n_pos - ca_pos).x);
        let a_c = shape.c.y.atan2(shape.c.x);
        let mut chosen = None;
        'search: for sgn in [1.0, -1.0] {
            for reflect in [false, true] {
                let local = if reflect { -a_c } else { a_c };
                let rho = a_n + sgn * tau - local;
                let u = shape.place(ca_pos, rho, reflect);
                let phi_trans = side(&n_pos, &ca_pos, &prev_c) * side(&n_pos, &ca_pos, &u.c) < 0.0;
                let psi_trans = side(&ca_pos, &u.c, &n_pos) * side(&ca_pos, &u.c, &u.n_next) < 0.0;
                if phi_trans && psi_trans {
                    chosen = Some(u);
                    break 'search;
                }
            }
        }
        let mut unit = chosen.expect("a trans orientation always exists");
        if opts.cis.contains(&i) {
            unit.ca_next = reflect_across(&unit.c, &unit.n_next, &unit.ca_next);
            unit.h_next = reflect_across(&unit.c, &unit.n_next, &unit.h_next);
        }

        let phi_j = joints.len();
        let phi_link = phi_j + 1;
        joints.push(Joint {
            kind: JointKind::Phi,
            residue: i,
            parent: prev_psi,
            axis: (n_idx, usize::MAX),
            u0: (ca_pos - n_pos).normalize(),
            zero_value: -180.0,
            measure: None,
            measure_offset: 0.0,
        });
        let ca_idx = b.push_backbone("CA", i, phi_link, ca_pos, name);
        joints[phi_j].axis.1 = ca_idx;
        b.bonds.push((n_idx, ca_idx));

        // Side chain atoms by internal coordinates; links resolved after the χ joints exist.
        let mut named: HashMap<String, (usize, Vec3)> = HashMap::new();
        named.insert("N".into(), (n_idx, n_pos));
        named.insert("CA".into(), (ca_idx, ca_pos));
        named.insert("C".into(), (usize::MAX, unit.c));
        let mut chi_joints = Vec::new();
        for (k, chi) in spec.chis.iter().enumerate() {
            chi_joints.push(joints.len());
            joints.push(Joint {
                kind: JointKind::Chi(k + 1),
                residue: i,
                parent: Some(if k == 0 { phi_j } else { chi_joints[k - 1] }),
                axis: (usize::MAX, usize::MAX),
                u0: Vec3::zeros(),
                zero_value: chi.default,
                measure: None,
                measure_offset: 0.0,
            });
        }
        let psi_j = joints.len();
        joints.push(Joint {
            kind: JointKind::Psi,
            residue: i,
            parent: Some(phi_j),
            axis: (ca_idx, usize::MAX),
            u0: (unit.c - ca_pos).normalize(),
            zero_value: -180.0,
            measure: None,
            measure_offset: 0.0,
        });
        let psi_link = psi_j + 1;
        let c_idx = b.push_backbone("C", i, psi_link, unit.c, name);
        joints[psi_j].axis.1 = c_idx;
        b.bonds.push((ca_idx, c_idx));
        named.get_mut("C").unwrap().0 = c_idx;
        let o_idx = b.push_backbone("O", i, psi_link, unit.o, name);
        b.bonds.push((c_idx, o_idx));

        for ta in &spec.atoms {
            let p = |n: &str| named[n].1;
            let pos = place(&p(&ta.dihedral_atom), &p(&ta.angle_atom), &p(&ta.parent), ta.length, ta.angle, ta.dihedral);
            let link = if ta.link == 0 { phi_link } else { chi_joints[ta.link - 1] + 1 };
            let idx = b.push(&ta.name, &ta.element, &ta.ff_type, i, link, pos, name);
            b.bonds.push((named[&ta.parent].0, idx));
            named.insert(ta.name.clone(), (idx, pos));
        }
        for (k, chi) in spec.chis.iter().enumerate() {
            let j = &mut joints[chi_joints[k]];
            let (bi, bp) = named[&chi.atoms[1]];
            let (ci, cp) = named[&chi.atoms[2]];
            j.axis = (bi, ci);
            j.u0 = (cp - bp).normalize();
            j.measure = Some([
                MeasurePoint::Atom(named[&chi.atoms[0]].0),
                MeasurePoint::Atom(bi),
                MeasurePoint::Atom(ci),
                MeasurePoint::Atom(named[&chi.atoms[3]].0),
            ]);
        }

        joints[phi_j].measure = Some([
            prev_c_atom.map_or(MeasurePoint::Ghost(prev_c), MeasurePoint::Atom),
            MeasurePoint::Atom(n_idx),
            MeasurePoint::Atom(ca_idx),
            MeasurePoint::Atom(c_idx),
        ]);

        if i + 1 < m {
            let next_name = specs[i + 1].aa_type.as_str();
            let n2 = b.push_backbone("N", i + 1, psi_link, unit.n_next, next_name);
            let h2 = b.push_backbone("H", i + 1, psi_link, unit.h_next, next_name);
            b.bonds.push((c_idx, n2));
            b.bonds.push((n2, h2));
            joints[psi_j].measure = Some([
                MeasurePoint::Atom(n_idx),
                MeasurePoint::Atom(ca_idx),
                MeasurePoint::Atom(c_idx),
                MeasurePoint::Atom(n2),
            ]);
            pending_nh = Some((n2, h2));
        } else {
            let dir = (unit.n_next - unit.c).normalize();
            let oxt = b.push_backbone("OXT", i, psi_link, unit.c + dir * lib.geometry.oxt, name);
            b.bonds.push((c_idx, oxt));
            joints[psi_j].measure = Some([
                MeasurePoint::Atom(n_idx),
                MeasurePoint::Atom(ca_idx),
                MeasurePoint::Atom(c_idx),
                MeasurePoint::Atom(oxt),
            ]);
        }

        // N and H of this residue were created by the previous unit, so the
        // residue's atom range starts at the earlier of the two.
        let first = start.min(n_idx);
        residues.push(ResidueInfo {
            name: name.to_string(),
            seq: i as i32 + 1,
            chain_id: 'A',
            atoms: first..b.atoms.len(),
            phi: phi_j,
            psi: psi_j,
            chis: chi_joints,
        });

        prev_psi = Some(psi_j);
        prev_c = unit.c;
        prev_c_atom = Some(c_idx);
        n_pos = unit.n_next;
        h_pos = unit.h_next;
        ca_pos = unit.ca_next;
    }

    // N and H of residue i > 0 were pushed before that residue's range opened;
    // ranges must not overlap, so trim the preceding ranges.
    for i in 0..residues.len().saturating_sub(1) {
        let next_start = residues[i + 1].atoms.start;
        residues[i].atoms.end = next_start;
    }

    let mut link_atoms = vec![Vec::new(); joints.len() + 1];
    for (idx, a) in b.atoms.iter().enumerate() {
        link_atoms[a.link].push(idx);
    }
    let dof = joints.len();
    Ok(Chain {
        residues,
        atoms: b.atoms,
        joints,
        bonds: b.bonds,
        link_atoms,
        default_frozen: vec![false; dof],
        geometry: lib.geometry.clone(),
    })
}
