//! CSV run logs.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chain::{Chain, Conformation, JointKind};
use crate::error::{Error, Result};

/// First line of every run log; bump the version when the columns change.
pub const RUNLOG_HEADER: &str = "# kcmfold-runlog v2";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub iteration: usize,
    pub g_elec: f64,
    pub g_vdw: f64,
    pub g_cav: f64,
    pub g_total: f64,
    pub tau_max: f64,
    pub snapshot: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    pub rows: Vec<IterationRow>,
}

impl RunLog {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        writeln!(file, "{RUNLOG_HEADER}").map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        for row in &self.rows {
            w.serialize(row)?;
        }
        if self.rows.is_empty() {
            w.write_record([
                "iteration",
                "g_elec",
                "g_vdw",
                "g_cav",
                "g_total",
                "tau_max",
                "snapshot",
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let body = text
            .strip_prefix(RUNLOG_HEADER)
            .ok_or_else(|| Error::parse(&path.display().to_string(), 1, "missing run-log header"))?;
        let mut r = csv::Reader::from_reader(body.trim_start().as_bytes());
        let rows = r.deserialize().collect::<std::result::Result<Vec<IterationRow>, _>>()?;
        Ok(RunLog { rows })
    }
}

/// Per-residue dihedral table: iteration, residue, name, φ, ψ, χ1..χ4 (blank when absent).
pub fn write_dihedrals(path: &Path, chain: &Chain, snapshots: &[(usize, Conformation)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "residue", "name", "phi", "psi", "chi1", "chi2", "chi3", "chi4"])?;
    for (iter, conf) in snapshots {
        let values = conf.dihedrals(chain);
        for (i, r) in chain.residues.iter().enumerate() {
            let mut rec = vec![
                iter.to_string(),
                (i + 1).to_string(),
                r.name.clone(),
                format!("{:.4}", values[r.phi]),
                format!("{:.4}", values[r.psi]),
            ];
            let mut chis = vec![String::new(); 4];
            for &j in &r.chis {
                if let JointKind::Chi(k) = chain.joints[j].kind {
                    chis[k - 1] = format!("{:.4}", values[j]);
                }
            }
            rec.extend(chis);
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
