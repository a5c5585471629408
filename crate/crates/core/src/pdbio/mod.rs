//! Structure and parameter I/O.

mod params;
mod runlog;

pub use params::{load_params, AtomParams, ForceFieldParams, GammaColumn, SolvClass, TypeParams, DEFAULT_PARAMS};
pub use runlog::{write_dihedrals, IterationRow, RunLog, RUNLOG_HEADER};

use std::fmt::Write as _;
use std::path::Path;

use log::info;

use crate::chain::{Chain, AMINO_ACIDS};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct PdbAtom {
    pub serial: i32,
    pub name: String,
    pub alt_loc: char,
    pub res_name: String,
    pub chain_id: char,
    pub res_seq: i32,
    pub icode: char,
    pub pos: Vec3,
    pub occupancy: f64,
    pub temp_factor: f64,
    pub element: String,
    pub hetero: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StructureRecord {
    pub atoms: Vec<PdbAtom>,
}

fn column(line: &str, from: usize, to: usize) -> &str {
    // 1-based inclusive PDB columns.
    let bytes = line.as_bytes();
    if from > bytes.len() {
        return "";
    }
    let end = to.min(bytes.len());
    std::str::from_utf8(&bytes[from - 1..end]).unwrap_or("")
}

fn element_from_name(name: &str) -> String {
    name.trim_start_matches(|c: char| c.is_ascii_digit())
        .chars()
        .next()
        .map(|c| c.to_ascii_uppercase().to_string())
        .unwrap_or_default()
}

/// Parses PDB text: first model only, first alternate location, water removed.
pub fn parse_pdb(text: &str, file: &str) -> Result<StructureRecord> {
    let mut atoms: Vec<PdbAtom> = Vec::new();
    let mut seen_model = false;
    let mut water = 0usize;
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let record = column(line, 1, 6).trim_end();
        match record {
            "MODEL" => {
                if seen_model {
                    break;
                }
                seen_model = true;
            }
            "ENDMDL" => {
                info!("{file}: multi-model file, using the first model only");
                break;
            }
            "ATOM" | "HETATM" => {
                if line.len() < 54 {
                    return Err(Error::parse(file, line_no, "coordinate record shorter than 54 columns"));
                }
                let num = |from: usize, to: usize, what: &str| -> Result<f64> {
                    column(line, from, to)
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| Error::parse(file, line_no, format!("bad {what}")))
                };
                let res_name = column(line, 18, 20).trim().to_string();
                if res_name == "HOH" || res_name == "WAT" {
                    water += 1;
                    continue;
                }
                let name = column(line, 13, 16).trim().to_string();
                let alt_loc = column(line, 17, 17).chars().next().unwrap_or(' ');
                let chain_id = column(line, 22, 22).chars().next().unwrap_or(' ');
                let res_seq = column(line, 23, 26)
                    .trim()
                    .parse::<i32>()
                    .map_err(|_| Error::parse(file, line_no, "bad residue number"))?;
                let icode = column(line, 27, 27).chars().next().unwrap_or(' ');
                let key = (chain_id, res_seq, icode, name.clone());
                if !seen.insert(key) {
                    continue; // later alternate location
                }
                let pos = Vec3::new(num(31, 38, "x")?, num(39, 46, "y")?, num(47, 54, "z")?);
                if !pos.iter().all(|v| v.is_finite()) {
                    return Err(Error::parse(file, line_no, "non-finite coordinate"));
                }
                let occupancy = column(line, 55, 60).trim().parse().unwrap_or(1.0);
                let temp_factor = column(line, 61, 66).trim().parse().unwrap_or(0.0);
                let mut element = column(line, 77, 78).trim().to_ascii_uppercase();
                if element.is_empty() {
                    element = element_from_name(&name);
                }
                atoms.push(PdbAtom {
                    serial: column(line, 7, 11).trim().parse().unwrap_or(atoms.len() as i32 + 1),
                    name,
                    alt_loc,
                    res_name,
                    chain_id,
                    res_seq,
                    icode,
                    pos,
                    occupancy,
                    temp_factor,
                    element,
                    hetero: record == "HETATM",
                });
            }
            _ => {}
        }
    }
    if water > 0 {
        info!("{file}: removed {water} water atoms");
    }
    if atoms.is_empty() {
        return Err(Error::EmptyStructure);
    }
    Ok(StructureRecord { atoms })
}

pub fn read_pdb(path: &Path) -> Result<StructureRecord> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pdb(&text, &path.display().to_string())
}

fn format_name(name: &str, element: &str) -> String {
    // Single-letter elements start in column 14 unless the name fills all four columns.
    if name.len() >= 4 || element.len() == 2 {
        format!("{name:<4}")
    } else {
        format!(" {name:<3}")
    }
}

/// Renders atoms as fixed-column PDB text.
pub fn format_pdb(atoms: &[PdbAtom]) -> String {
    let mut out = String::new();
    for a in atoms {
        let record = if a.hetero { "HETATM" } else { "ATOM  " };
        let _ = writeln!(
            out,
            "{record}{:>5} {}{}{:>3} {}{:>4}{}   {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}          {:>2}",
            a.serial % 100000,
            format_name(&a.name, &a.element),
            a.alt_loc,
            a.res_name,
            a.chain_id,
            a.res_seq,
            a.icode,
            a.pos.x,
            a.pos.y,
            a.pos.z,
            a.occupancy,
            a.temp_factor,
            a.element,
        );
    }
    out.push_str("END\n");
    out
}

/// PDB records for a chain at the given positions.
pub fn chain_records(chain: &Chain, positions: &[Vec3]) -> Result<Vec<PdbAtom>> {
    if chain.atoms.is_empty() {
        return Err(Error::EmptyStructure);
    }
    if positions.len() != chain.atoms.len() {
        return Err(Error::LengthMismatch {
            expected: chain.atoms.len(),
            got: positions.len(),
        });
    }
    Ok(chain
        .atoms
        .iter()
        .zip(positions)
        .enumerate()
        .map(|(i, (a, p))| PdbAtom {
            serial: i as i32 + 1,
            name: a.name.clone(),
            alt_loc: ' ',
            res_name: a.res_name.clone(),
            chain_id: a.chain_id,
            res_seq: a.res_seq,
            icode: ' ',
            pos: *p,
            occupancy: 1.0,
            temp_factor: 0.0,
            element: a.element.clone(),
            hetero: a.hetero,
        })
        .collect())
}

pub fn write_pdb(chain: &Chain, positions: &[Vec3], path: &Path) -> Result<()> {
    let text = format_pdb(&chain_records(chain, positions)?);
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses one-letter (contiguous or spaced) or three-letter codes, any case.
pub fn read_sequence(text: &str) -> Result<Vec<String>> {
    let tokens: Vec<&str> = text.split(|c: char| c.is_whitespace() || c == ',' || c == '-').filter(|t| !t.is_empty()).collect();
    if tokens.is_empty() {
        return Err(Error::EmptySequence);
    }
    let three = |t: &str| {
        let up = t.to_ascii_uppercase();
        AMINO_ACIDS.iter().find(|(c, _)| *c == up).map(|(c, _)| c.to_string())
    };
    let one = |ch: char| {
        let up = ch.to_ascii_uppercase();
        AMINO_ACIDS.iter().find(|(_, c)| *c == up).map(|(c, _)| c.to_string())
    };
    let mut out = Vec::new();
    for t in tokens {
        if t.len() == 3 {
            if let Some(code) = three(t) {
                out.push(code);
                continue;
            }
        }
        for ch in t.chars() {
            out.push(one(ch).ok_or_else(|| Error::UnknownResidue(t.to_string()))?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_ATOM: &str =
        "ATOM      1  N   ALA A   1      11.104   6.134  -6.504  1.00  0.00           N\n";

    #[test]
    fn single_atom_columns() {
        let s = parse_pdb(ONE_ATOM, "t").unwrap();
        assert_eq!(s.atoms.len(), 1);
        let a = &s.atoms[0];
        assert_eq!(a.name, "N");
        assert_eq!(a.res_name, "ALA");
        assert_eq!(a.chain_id, 'A');
        assert_eq!(a.res_seq, 1);
        assert_eq!(a.pos, Vec3::new(11.104, 6.134, -6.504));
        assert_eq!(a.element, "N");
    }

    #[test]
    fn water_only_is_empty() {
        let text = "HETATM    1  O   HOH A 101       1.000   2.000   3.000  1.00  0.00           O\n\
                    HETATM    2  O   WAT A 102       1.000   2.000   4.000  1.00  0.00           O\n";
        assert!(matches!(parse_pdb(text, "t"), Err(Error::EmptyStructure)));
    }

    #[test]
    fn water_stripping_keeps_other_hetero() {
        let text = format!(
            "{ONE_ATOM}HETATM    2  O   HOH A 101       1.000   2.000   3.000  1.00  0.00           O\n\
             HETATM    3 ZN    ZN A 201       4.000   2.000   3.000  1.00  0.00          ZN\n"
        );
        let s = parse_pdb(&text, "t").unwrap();
        assert_eq!(s.atoms.len(), 2);
        assert!(s.atoms[1].hetero);
        assert_eq!(s.atoms[1].res_name, "ZN");
        assert_eq!(s.atoms[1].element, "ZN");
    }

    #[test]
    fn first_model_and_altloc() {
        let text = "MODEL        1\n\
ATOM      1  CA AALA A   1       1.000   1.000   1.000  0.50  0.00           C\n\
ATOM      2  CA BALA A   1       2.000   2.000   2.000  0.50  0.00           C\n\
ENDMDL\n\
MODEL        2\n\
ATOM      1  CA  ALA A   1       9.000   9.000   9.000  1.00  0.00           C\n\
ENDMDL\n";
        let s = parse_pdb(text, "t").unwrap();
        assert_eq!(s.atoms.len(), 1);
        assert_eq!(s.atoms[0].pos, Vec3::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn malformed_coordinate() {
        let bad = ONE_ATOM.replace("11.104", "11.1x4");
        assert!(matches!(parse_pdb(&bad, "t"), Err(Error::Parse { .. })));
    }

    #[test]
    fn round_trip() {
        let text = format!(
            "{ONE_ATOM}ATOM      2 HB1  ALA A   1      -1.234 100.500   0.001  1.00  0.00           H\n\
             ATOM      3 1HG2 VAL A   2       0.000   0.000   0.000  1.00  0.00           H\n\
             HETATM    4 ZN    ZN A 201       4.000   2.000   3.000  1.00  0.00          ZN\n"
        );
        let a = parse_pdb(&text, "t").unwrap();
        let b = parse_pdb(&format_pdb(&a.atoms), "t").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sequences() {
        assert_eq!(read_sequence("AAA").unwrap(), vec!["ALA"; 3]);
        assert_eq!(read_sequence("GLY SER").unwrap(), vec!["GLY", "SER"]);
        assert_eq!(read_sequence("gly Ser cYs").unwrap(), vec!["GLY", "SER", "CYS"]);
        assert_eq!(read_sequence("acg").unwrap(), vec!["ALA", "CYS", "GLY"]);
        assert!(matches!(read_sequence("AXA"), Err(Error::UnknownResidue(_))));
        assert!(matches!(read_sequence("  "), Err(Error::EmptySequence)));
    }
}
