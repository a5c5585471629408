//! Force-field parameter file (`kcmfold-params` text format, version 1).

use std::collections::HashMap;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::topology::WeightTable;

pub const DEFAULT_PARAMS: &str = include_str!("../../data/forcefield.prm");

/// Solvation classes. `H` (γ = 0) covers hydrogens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolvClass {
    C,
    ON,
    S,
    OM,
    NP,
    H,
}

impl SolvClass {
    pub const ALL: [SolvClass; 6] = [
        SolvClass::C,
        SolvClass::ON,
        SolvClass::S,
        SolvClass::OM,
        SolvClass::NP,
        SolvClass::H,
    ];

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "C" => SolvClass::C,
            "ON" => SolvClass::ON,
            "S" => SolvClass::S,
            "OM" => SolvClass::OM,
            "NP" => SolvClass::NP,
            "H" => SolvClass::H,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GammaColumn {
    Kyte,
    #[default]
    Sharp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeParams {
    pub r: f64,
    pub eps: f64,
    pub solv: SolvClass,
}

/// Resolved per-atom parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    /// Charge, e.
    pub q: f64,
    /// van der Waals radius, Å.
    pub r: f64,
    /// Well depth, kcal/mol.
    pub eps: f64,
    /// Solvation parameter, kcal/(mol·Å²).
    pub gamma: f64,
    pub solv_class: SolvClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceFieldParams {
    pub coulomb: f64,
    pub weights: WeightTable,
    /// (Kyte, Sharp) per class.
    pub gamma: HashMap<SolvClass, (f64, f64)>,
    pub types: HashMap<String, TypeParams>,
    pub element_types: HashMap<String, String>,
    pub type_overrides: HashMap<(String, String), String>,
    pub charges: HashMap<(String, String), f64>,
}

pub fn load_params(path: &Path) -> Result<ForceFieldParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ForceFieldParams::parse(&text, &path.display().to_string())
}

impl ForceFieldParams {
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_PARAMS, "forcefield.prm").expect("builtin parameters are valid")
    }

    pub fn gamma(&self, class: SolvClass, column: GammaColumn) -> f64 {
        let (k, s) = self.gamma[&class];
        match column {
            GammaColumn::Kyte => k,
            GammaColumn::Sharp => s,
        }
    }

    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::parse(file, line, msg);
        let mut format_seen = false;
        let mut coulomb = None;
        let mut w13 = None;
        let mut w14 = None;
        let mut gamma = HashMap::new();
        let mut types = HashMap::new();
        let mut element_types = HashMap::new();
        let mut type_overrides = HashMap::new();
        let mut charges = HashMap::new();
        let mut type_lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let ln = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| err(ln, format!("expected a number, got `{s}`")))
            };
            let arity = |n: usize| -> Result<()> {
                if f.len() != n {
                    Err(err(ln, format!("{} takes {} fields, got {}", f[0], n - 1, f.len() - 1)))
                } else {
                    Ok(())
                }
            };
            match f[0] {
                "FORMAT" => {
                    if f.len() != 3 || f[1] != "kcmfold-params" || f[2] != "1" {
                        return Err(err(ln, "unsupported format header".into()));
                    }
                    format_seen = true;
                }
                _ if !format_seen => return Err(err(ln, "missing FORMAT header".into())),
                "COULOMB" => {
                    arity(2)?;
                    coulomb = Some(num(f[1])?);
                }
                "WEIGHT" => {
                    arity(4)?;
                    let w = (num(f[2])?, num(f[3])?);
                    if !(0.0..=1.0).contains(&w.0) || !(0.0..=1.0).contains(&w.1) {
                        return Err(err(ln, "weights must lie in [0, 1]".into()));
                    }
                    match f[1] {
                        "13" => w13 = Some(w),
                        "14" => w14 = Some(w),
                        _ => return Err(err(ln, "WEIGHT class must be 13 or 14".into())),
                    }
                }
                "SOLV" => {
                    arity(4)?;
                    let c = SolvClass::parse(f[1]).ok_or_else(|| err(ln, format!("unknown solvation class `{}`", f[1])))?;
                    if gamma.insert(c, (num(f[2])?, num(f[3])?)).is_some() {
                        return Err(err(ln, format!("duplicate solvation class `{}`", f[1])));
                    }
                }
                "TYPE" => {
                    arity(5)?;
                    let r = num(f[2])?;
                    let eps = num(f[3])?;
                    if !(r > 0.0) || !(eps >= 0.0) {
                        return Err(err(ln, "need R > 0 and eps >= 0".into()));
                    }
                    type_lines.push((ln, f[1].to_string(), r, eps, f[4].to_string()));
                }
                "ELEMENT" => {
                    arity(3)?;
                    element_types.insert(f[1].to_string(), f[2].to_string());
                }
                "CLASS" => {
                    arity(4)?;
                    type_overrides.insert((f[1].to_string(), f[2].to_string()), f[3].to_string());
                }
                "CHARGE" => {
                    arity(4)?;
                    if charges.insert((f[1].to_string(), f[2].to_string()), num(f[3])?).is_some() {
                        return Err(err(ln, format!("duplicate charge {} {}", f[1], f[2])));
                    }
                }
                other => return Err(err(ln, format!("unknown record `{other}`"))),
            }
        }
        for c in SolvClass::ALL {
            if !gamma.contains_key(&c) {
                return Err(err(0, format!("missing solvation class {c:?}")));
            }
        }
        for (ln, name, r, eps, class) in type_lines {
            let solv = SolvClass::parse(&class).ok_or_else(|| err(ln, format!("unknown solvation class `{class}`")))?;
            if types.insert(name.clone(), TypeParams { r, eps, solv }).is_some() {
                return Err(err(ln, format!("duplicate type `{name}`")));
            }
        }
        for t in element_types.values().chain(type_overrides.values()) {
            if !types.contains_key(t) {
                return Err(err(0, format!("reference to undefined type `{t}`")));
            }
        }
        let (w13e, w13v) = w13.ok_or_else(|| err(0, "missing WEIGHT 13".into()))?;
        let (w14e, w14v) = w14.ok_or_else(|| err(0, "missing WEIGHT 14".into()))?;
        Ok(ForceFieldParams {
            coulomb: coulomb.ok_or_else(|| err(0, "missing COULOMB".into()))?,
            weights: WeightTable::new(w13e, w13v, w14e, w14v),
            gamma,
            types,
            element_types,
            type_overrides,
            charges,
        })
    }

    /// Force-field type of an atom: residue override, template type, then element fallback.
    pub fn resolve_type(&self, res_name: &str, atom_name: &str, template_type: &str, element: &str) -> Result<&str> {
        let key = |r: &str| (r.to_string(), atom_name.to_string());
        if let Some(t) = self.type_overrides.get(&key(res_name)).or_else(|| self.type_overrides.get(&key("*"))) {
            return Ok(t);
        }
        if !template_type.is_empty() {
            return self
                .types
                .get_key_value(template_type)
                .map(|(k, _)| k.as_str())
                .ok_or_else(|| Error::Config(format!("atom {atom_name} uses undefined type `{template_type}`")));
        }
        self.element_types
            .get(element)
            .or_else(|| self.element_types.get("*"))
            .map(|s| s.as_str())
            .ok_or_else(|| Error::Config(format!("no parameters for element `{element}` ({res_name} {atom_name})")))
    }

    /// Per-atom parameters for a chain, hetero atoms included.
    pub fn atom_params(&self, chain: &Chain, column: GammaColumn) -> Result<Vec<AtomParams>> {
        let mut uncharged = 0usize;
        let out = chain
            .atoms
            .iter()
            .map(|a| {
                let t = self.resolve_type(&a.res_name, &a.name, &a.ff_type, &a.element)?;
                let tp = self.types[t];
                let q = match self.charges.get(&(a.res_name.clone(), a.name.clone())) {
                    Some(q) => *q,
                    None => {
                        if a.name != "OXT" {
                            uncharged += 1;
                        }
                        0.0
                    }
                };
                Ok(AtomParams {
                    q,
                    r: tp.r,
                    eps: tp.eps,
                    gamma: self.gamma(tp.solv, column),
                    solv_class: tp.solv,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if uncharged > 0 {
            warn!("{uncharged} atoms have no charge entry and were given q = 0");
        }
        Ok(out)
    }
}
