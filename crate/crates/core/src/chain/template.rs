//! Residue template library (`kcmfold-residues` text format, version 1).

use std::collections::HashMap;

use crate::error::{Error, Result};

pub const DEFAULT_TEMPLATES: &str = include_str!("../../data/residues.tmpl");

/// Derived peptide-plane bond vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaneVector {
    CaC,
    CN,
    CO,
    NH,
}

impl PlaneVector {
    pub const ALL: [PlaneVector; 4] = [
        PlaneVector::CaC,
        PlaneVector::CN,
        PlaneVector::CO,
        PlaneVector::NH,
    ];

    fn parse(s: &str) -> Option<Self> {
        match s {
            "CAC" => Some(PlaneVector::CaC),
            "CN" => Some(PlaneVector::CN),
            "CO" => Some(PlaneVector::CO),
            "NH" => Some(PlaneVector::NH),
            _ => None,
        }
    }
}

/// Canonical peptide geometry: plane constants and the body vectors of a trans unit.
#[derive(Debug, Clone, PartialEq)]
pub struct PeptideGeometry {
    /// (C1, C2) per derived vector, as multiples of b(CA→N') and b(N'→CA').
    pub plane_constants: HashMap<PlaneVector, (f64, f64)>,
    /// |CA→N'| in Å.
    pub ca_n: f64,
    /// |N'→CA'| in Å, also the N→CA bond.
    pub n_ca: f64,
    /// Angle between the two body vectors, degrees.
    pub body_angle: f64,
    /// N-CA-C angle, degrees.
    pub tau: f64,
    /// Carboxyl C-OXT length, Å.
    pub oxt: f64,
}

impl PeptideGeometry {
    pub fn constants(&self, v: PlaneVector) -> (f64, f64) {
        self.plane_constants[&v]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateAtom {
    pub name: String,
    pub element: String,
    pub ff_type: String,
    /// 0 rides on the CA link, k on side-chain joint k.
    pub link: usize,
    pub parent: String,
    pub length: f64,
    pub angle_atom: String,
    pub angle: f64,
    pub dihedral_atom: String,
    pub dihedral: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiDef {
    pub atoms: [String; 4],
    pub default: f64,
}

/// One residue type: side-chain atoms in build order and its χ joints.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueSpec {
    pub aa_type: String,
    pub one_letter: char,
    pub atoms: Vec<TemplateAtom>,
    pub chis: Vec<ChiDef>,
}

impl ResidueSpec {
    pub fn side_links(&self) -> usize {
        self.chis.len()
    }

    pub fn rotamer_defaults(&self) -> Vec<f64> {
        self.chis.iter().map(|c| c.default).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackboneAtom {
    pub name: String,
    pub element: String,
    pub ff_type: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateLibrary {
    pub geometry: PeptideGeometry,
    pub backbone: Vec<BackboneAtom>,
    pub residues: HashMap<String, ResidueSpec>,
}

const BACKBONE_NAMES: [&str; 6] = ["N", "H", "CA", "C", "O", "OXT"];

impl TemplateLibrary {
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_TEMPLATES, "residues.tmpl").expect("builtin templates are valid")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn get(&self, code: &str) -> Option<&ResidueSpec> {
        self.residues.get(code)
    }

    pub fn backbone_atom(&self, name: &str) -> Option<&BackboneAtom> {
        self.backbone.iter().find(|b| b.name == name)
    }

    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::parse(file, line, msg);
        let mut format_seen = false;
        let mut plane = HashMap::new();
        let mut body = None;
        let mut tau = None;
        let mut oxt = None;
        let mut backbone = Vec::new();
        let mut residues = HashMap::new();
        let mut current: Option<ResidueSpec> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| err(line_no, &format!("expected a number, got `{s}`")))
            };
            match f[0] {
                "FORMAT" => {
                    if f.len() != 3 || f[1] != "kcmfold-residues" || f[2] != "1" {
                        return Err(err(line_no, "unsupported format header"));
                    }
                    format_seen = true;
                }
                _ if !format_seen => return Err(err(line_no, "missing FORMAT header")),
                "PLANE" => {
                    if f.len() != 4 {
                        return Err(err(line_no, "PLANE takes 3 fields"));
                    }
                    let v = PlaneVector::parse(f[1])
                        .ok_or_else(|| err(line_no, "unknown plane vector"))?;
                    if plane.insert(v, (num(f[2])?, num(f[3])?)).is_some() {
                        return Err(err(line_no, "duplicate PLANE row"));
                    }
                }
                "BODY" => {
                    if f.len() != 4 {
                        return Err(err(line_no, "BODY takes 3 fields"));
                    }
                    body = Some((num(f[1])?, num(f[2])?, num(f[3])?));
                }
                "TAU" if f.len() == 2 => tau = Some(num(f[1])?),
                "OXT" if f.len() == 2 => oxt = Some(num(f[1])?),
                "BACKBONE" => {
                    if f.len() != 4 || !BACKBONE_NAMES.contains(&f[1]) {
                        return Err(err(line_no, "BACKBONE takes a backbone name, element and type"));
                    }
                    backbone.push(BackboneAtom {
                        name: f[1].into(),
                        element: f[2].into(),
                        ff_type: f[3].into(),
                    });
                }
                "RESIDUE" => {
                    if current.is_some() {
                        return Err(err(line_no, "nested RESIDUE"));
                    }
                    if f.len() != 3 || f[2].chars().count() != 1 {
                        return Err(err(line_no, "RESIDUE takes a three-letter and a one-letter code"));
                    }
                    current = Some(ResidueSpec {
                        aa_type: f[1].to_string(),
                        one_letter: f[2].chars().next().unwrap(),
                        atoms: Vec::new(),
                        chis: Vec::new(),
                    });
                }
                "ATOM" => {
                    let res = current
                        .as_mut()
                        .ok_or_else(|| err(line_no, "ATOM outside RESIDUE"))?;
                    if f.len() != 11 {
                        return Err(err(line_no, "ATOM takes 10 fields"));
                    }
                    let link = f[4]
                        .parse::<usize>()
                        .map_err(|_| err(line_no, "bad link index"))?;
                    let length = num(f[6])?;
                    if !(length > 0.0) {
                        return Err(err(line_no, "bond length must be positive"));
                    }
                    res.atoms.push(TemplateAtom {
                        name: f[1].into(),
                        element: f[2].into(),
                        ff_type: f[3].into(),
                        link,
                        parent: f[5].into(),
                        length,
                        angle_atom: f[7].into(),
                        angle: num(f[8])?,
                        dihedral_atom: f[9].into(),
                        dihedral: num(f[10])?,
                    });
                }
                "CHI" => {
                    let res = current
                        .as_mut()
                        .ok_or_else(|| err(line_no, "CHI outside RESIDUE"))?;
                    if f.len() != 7 {
                        return Err(err(line_no, "CHI takes 6 fields"));
                    }
                    let k = f[1]
                        .parse::<usize>()
                        .map_err(|_| err(line_no, "bad chi index"))?;
                    if k != res.chis.len() + 1 {
                        return Err(err(line_no, "CHI rows must be numbered 1, 2, ... in order"));
                    }
                    res.chis.push(ChiDef {
                        atoms: [f[2].into(), f[3].into(), f[4].into(), f[5].into()],
                        default: num(f[6])?,
                    });
                }
                "END" => {
                    let res = current
                        .take()
                        .ok_or_else(|| err(line_no, "END without RESIDUE"))?;
                    validate_residue(&res).map_err(|m| err(line_no, &m))?;
                    if residues.insert(res.aa_type.clone(), res).is_some() {
                        return Err(err(line_no, "duplicate residue"));
                    }
                }
                other => return Err(err(line_no, &format!("unknown record `{other}`"))),
            }
        }
        if current.is_some() {
            return Err(err(text.lines().count(), "unterminated RESIDUE"));
        }
        if plane.len() != 4 {
            return Err(err(0, "exactly four PLANE rows are required"));
        }
        let (ca_n, n_ca, body_angle) = body.ok_or_else(|| err(0, "missing BODY"))?;
        for name in ["N", "CA", "C", "O", "H", "OXT"] {
            if !backbone.iter().any(|b: &BackboneAtom| b.name == name) {
                return Err(err(0, &format!("missing BACKBONE {name}")));
            }
        }
        Ok(TemplateLibrary {
            geometry: PeptideGeometry {
                plane_constants: plane,
                ca_n,
                n_ca,
                body_angle,
                tau: tau.ok_or_else(|| err(0, "missing TAU"))?,
                oxt: oxt.ok_or_else(|| err(0, "missing OXT"))?,
            },
            backbone,
            residues,
        })
    }
}

fn validate_residue(res: &ResidueSpec) -> std::result::Result<(), String> {
    if res.chis.len() > 4 {
        return Err("at most four side-chain joints".into());
    }
    let mut known: Vec<&str> = vec!["N", "CA", "C"];
    for a in &res.atoms {
        for r in [&a.parent, &a.angle_atom, &a.dihedral_atom] {
            if !known.contains(&r.as_str()) {
                return Err(format!("atom {} references unplaced atom {}", a.name, r));
            }
        }
        if a.link > res.chis.len() {
            return Err(format!("atom {} names link {} beyond the χ count", a.name, a.link));
        }
        if known.contains(&a.name.as_str()) || BACKBONE_NAMES.contains(&a.name.as_str()) {
            return Err(format!("duplicate atom {}", a.name));
        }
        known.push(&a.name);
    }
    for (k, chi) in res.chis.iter().enumerate() {
        for n in &chi.atoms {
            if !known.contains(&n.as_str()) {
                return Err(format!("χ{} names unknown atom {}", k + 1, n));
            }
        }
        let link_of = |n: &str| res.atoms.iter().find(|a| a.name == n).map(|a| a.link);
        if link_of(&chi.atoms[3]) != Some(k + 1) {
            return Err(format!("χ{} moving atom must sit on link {}", k + 1, k + 1));
        }
    }
    Ok(())
}
