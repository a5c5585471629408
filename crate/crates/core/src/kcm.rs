//! Joint torques from atomic forces and the compliance folding loop.

use std::time::Instant;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::chain::{Chain, Conformation, Kinematics};
use crate::error::{Error, Result};
use crate::forcefield::{pair_terms, Dielectric, EnergyBreakdown, PairContext};
use crate::geometry::Vec3;
use crate::pdbio::{AtomParams, ForceFieldParams, GammaColumn, IterationRow};
use crate::solvation::{sasa_pass, solvate, SampleSphere, SolvationConfig, Solvent};
use crate::spatial::{GridConfig, HashGrid, NeighborTable};
use crate::topology::{build_tree, BondTree, WeightTable};

/// Net force and moment about the origin on one link.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkWrench {
    pub force: Vec3,
    pub torque: Vec3,
}

/// One wrench per link; link 0 is the fixed base.
pub fn link_wrenches(chain: &Chain, positions: &[Vec3], forces: &[Vec3]) -> Vec<LinkWrench> {
    let mut w = vec![LinkWrench::default(); chain.link_count()];
    for (a, atom) in chain.atoms.iter().enumerate() {
        let lw = &mut w[atom.link];
        lw.force += forces[a];
        lw.torque += positions[a].cross(&forces[a]);
    }
    w
}

/// τ_k = u_k · (T_agg − p_k × F_agg), aggregating wrenches over the subtree
/// of joint k in one reverse sweep.
pub fn joint_torques(chain: &Chain, kin: &Kinematics, wrenches: &[LinkWrench]) -> Vec<f64> {
    let l = chain.dof();
    let mut agg: Vec<LinkWrench> = wrenches[1..=l].to_vec();
    for k in (0..l).rev() {
        if let Some(p) = chain.joints[k].parent {
            let a = agg[k];
            agg[p].force += a.force;
            agg[p].torque += a.torque;
        }
    }
    (0..l)
        .map(|k| kin.axis[k].dot(&(agg[k].torque - kin.point[k].cross(&agg[k].force))))
        .collect()
}

/// O(l²) reference: τ_k = Σ_h η_{k,h} over every link h moved by joint k, with
/// η_{k,h} = u_k·T_h + (u_k × (p_h − p_k))·F_h and T_h taken about p_h.
pub fn column_scan_torques(chain: &Chain, kin: &Kinematics, wrenches: &[LinkWrench]) -> Vec<f64> {
    let l = chain.dof();
    let mut tau = vec![0.0; l];
    for h in 0..l {
        let w = &wrenches[h + 1];
        let p_h = kin.point[h];
        let t_h = w.torque - p_h.cross(&w.force);
        for (k, t) in tau.iter_mut().enumerate() {
            if chain.is_ancestor(k, h) {
                let u = kin.axis[k];
                *t += u.dot(&t_h) + u.cross(&(p_h - kin.point[k])).dot(&w.force);
            }
        }
    }
    tau
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    /// Largest per-step joint change, degrees.
    pub kappa: f64,
    pub max_iters: usize,
    /// Stop when |τ_max| falls below this, kcal/mol.
    pub torque_tol: f64,
    pub energy_window: usize,
    /// Stop when the total energy moves less than this over the window.
    pub energy_tol: f64,
    /// Keep every n-th conformation (0 keeps only the first and last).
    pub snapshot_every: usize,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            kappa: 0.5,
            max_iters: 1000,
            torque_tol: 1e-4,
            energy_window: 20,
            energy_tol: 1e-3,
            snapshot_every: 0,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::Config("kappa must be positive".into()));
        }
        if !(self.torque_tol >= 0.0) || !(self.energy_tol >= 0.0) {
            return Err(Error::Config("tolerances must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Stepped { conf: Conformation, deltas: Vec<f64> },
    /// Every unfrozen torque is zero.
    Converged,
}

/// Δθ_j = κ τ_j / |τ_max| over unfrozen joints.
pub fn kcm_step(tau: &[f64], conf: &Conformation, kappa: f64) -> Result<StepOutcome> {
    if tau.len() != conf.theta.len() {
        return Err(Error::LengthMismatch {
            expected: conf.theta.len(),
            got: tau.len(),
        });
    }
    if conf.free_joints() == 0 {
        return Err(Error::NoFreeJoints);
    }
    let t_max = max_free_torque(tau, conf);
    if t_max == 0.0 {
        return Ok(StepOutcome::Converged);
    }
    let deltas: Vec<f64> = tau
        .iter()
        .zip(&conf.frozen)
        .map(|(t, &f)| if f { 0.0 } else { kappa * t / t_max })
        .collect();
    Ok(StepOutcome::Stepped {
        conf: conf.apply_deltas(&deltas)?,
        deltas,
    })
}

pub fn max_free_torque(tau: &[f64], conf: &Conformation) -> f64 {
    tau.iter()
        .zip(&conf.frozen)
        .filter(|(_, &f)| !f)
        .map(|(t, _)| t.abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SolvationMode {
    /// In vacuum.
    #[default]
    Off,
    /// G_cav is computed and logged but exerts no force.
    ReportOnly,
    Applied,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub grid: GridConfig,
    pub dielectric: Dielectric,
    pub solvation_mode: SolvationMode,
    pub solvation: SolvationConfig,
    pub gamma_column: GammaColumn,
    /// Hash-grid neighbor search; false uses all-pairs.
    pub hashing: bool,
    pub elec: bool,
    pub vdw: bool,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            grid: GridConfig::default(),
            dielectric: Dielectric::Distance,
            solvation_mode: SolvationMode::Off,
            solvation: SolvationConfig::default(),
            gamma_column: GammaColumn::Sharp,
            hashing: true,
            elec: true,
            vdw: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub kinematics_ms: f64,
    pub hash_ms: f64,
    pub elec_vdw_ms: f64,
    pub solvation_ms: f64,
    pub torque_ms: f64,
}

impl PhaseTimes {
    /// Everything except forward kinematics and torque aggregation.
    pub fn force_ms(&self) -> f64 {
        self.hash_ms + self.elec_vdw_ms + self.solvation_ms
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub energy: EnergyBreakdown,
    pub positions: Vec<Vec3>,
    pub forces: Vec<Vec3>,
    pub torques: Vec<f64>,
    pub times: PhaseTimes,
}

/// A chain with resolved parameters, ready to evaluate energies and torques.
#[derive(Debug, Clone)]
pub struct Evaluator {
    pub chain: Chain,
    pub params: Vec<AtomParams>,
    pub tree: BondTree,
    pub weights: WeightTable,
    pub coulomb: f64,
    pub field: FieldConfig,
    pub sphere: SampleSphere,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

impl Evaluator {
    pub fn new(chain: Chain, ff: &ForceFieldParams, field: FieldConfig) -> Result<Self> {
        field.grid.validate()?;
        field.solvation.validate()?;
        let params = ff.atom_params(&chain, field.gamma_column)?;
        if field.solvation_mode != SolvationMode::Off {
            field.solvation.check_cutoff(&params, field.grid.cut_cav)?;
        }
        let tree = build_tree(&chain)?;
        let mut weights = ff.weights;
        if !field.elec {
            weights.w13.0 = 0.0;
            weights.w14.0 = 0.0;
            weights.full.0 = 0.0;
        }
        if !field.vdw {
            weights.w13.1 = 0.0;
            weights.w14.1 = 0.0;
            weights.full.1 = 0.0;
        }
        Ok(Evaluator {
            chain,
            params,
            tree,
            weights,
            coulomb: ff.coulomb,
            sphere: field.solvation.samples()?,
            field,
        })
    }

    pub fn pair_context(&self) -> PairContext<'_> {
        PairContext {
            params: &self.params,
            tree: &self.tree,
            weights: self.weights,
            coulomb: self.coulomb,
            dielectric: self.field.dielectric,
        }
    }

    fn table_cutoff(&self) -> f64 {
        let g = &self.field.grid;
        let mut c = 0.0f64;
        if self.field.elec {
            c = c.max(g.cut_elec);
        }
        if self.field.vdw {
            c = c.max(g.cut_vdw);
        }
        if self.field.solvation_mode != SolvationMode::Off {
            c = c.max(g.cut_cav);
        }
        c
    }

    pub fn neighbor_table(&self, positions: &[Vec3]) -> Result<NeighborTable> {
        let cut = self.table_cutoff();
        if self.field.hashing {
            let grid = HashGrid::build(positions, self.field.grid.alpha, self.field.grid.min_cell)?;
            Ok(NeighborTable::build(&grid, positions, cut))
        } else {
            for (i, p) in positions.iter().enumerate() {
                if !p.iter().all(|v| v.is_finite()) {
                    return Err(Error::NonFinite(i));
                }
            }
            Ok(NeighborTable::brute(positions, cut))
        }
    }

    /// Energies, per-atom forces and joint torques at one conformation.
    pub fn evaluate(&self, conf: &Conformation) -> Result<Evaluation> {
        let mut times = PhaseTimes::default();
        let t = Instant::now();
        let kin = Kinematics::compute(&self.chain, conf)?;
        let positions = kin.positions(&self.chain);
        times.kinematics_ms = ms(t);

        let t = Instant::now();
        let table = self.neighbor_table(&positions)?;
        times.hash_ms = ms(t);

        let t = Instant::now();
        let g = &self.field.grid;
        let (g_elec, g_vdw, mut forces) = pair_terms(&positions, &self.pair_context(), &table, g.cut_elec, g.cut_vdw)?;
        times.elec_vdw_ms = ms(t);

        let t = Instant::now();
        let g_cav = match self.field.solvation_mode {
            SolvationMode::Off => 0.0,
            SolvationMode::ReportOnly => {
                let sv = Solvent::new(&positions, &self.params, &table, &self.field.solvation)?;
                sasa_pass(&sv, &self.sphere).0.g_cav
            }
            SolvationMode::Applied => {
                let sv = Solvent::new(&positions, &self.params, &table, &self.field.solvation)?;
                let (res, f) = solvate(&sv, &self.sphere);
                for (a, b) in forces.iter_mut().zip(&f) {
                    *a += b;
                }
                res.g_cav
            }
        };
        times.solvation_ms = ms(t);

        let t = Instant::now();
        let wrenches = link_wrenches(&self.chain, &positions, &forces);
        let torques = joint_torques(&self.chain, &kin, &wrenches);
        times.torque_ms = ms(t);

        Ok(Evaluation {
            energy: EnergyBreakdown::new(g_elec, g_vdw, g_cav),
            positions,
            forces,
            torques,
            times,
        })
    }

    pub fn energy(&self, conf: &Conformation) -> Result<EnergyBreakdown> {
        Ok(self.evaluate(conf)?.energy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    ZeroTorque,
    TorqueTolerance,
    EnergyPlateau,
    MaxIterations,
}

impl StopReason {
    pub fn converged(self) -> bool {
        self != StopReason::MaxIterations
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub rows: Vec<IterationRow>,
    /// Phase timings, one per row.
    pub times: Vec<PhaseTimes>,
    pub snapshots: Vec<(usize, Conformation)>,
    pub final_conf: Conformation,
    pub final_energy: EnergyBreakdown,
    pub final_positions: Vec<Vec3>,
    pub stop: StopReason,
    /// Steps taken.
    pub iterations: usize,
}

impl Trajectory {
    pub fn converged(&self) -> bool {
        self.stop.converged()
    }
}

/// Runs compliance steps until the torque or energy criterion holds or the
/// iteration budget is spent. Row t holds the state before step t + 1; the
/// state reached by the last budgeted step is only in the final fields.
pub fn fold(eval: &Evaluator, initial: &Conformation, step: &StepConfig) -> Result<Trajectory> {
    step.validate()?;
    if initial.free_joints() == 0 {
        return Err(Error::NoFreeJoints);
    }
    let mut conf = initial.clone();
    let mut rows = Vec::new();
    let mut times = Vec::new();
    let mut snapshots = vec![(0, conf.clone())];
    let mut energies = Vec::new();
    let mut iter = 0usize;
    loop {
        let ev = eval.evaluate(&conf).map_err(|e| Error::AtIteration {
            iteration: iter,
            source: Box::new(e),
        })?;
        let t_max = max_free_torque(&ev.torques, &conf);
        if iter >= step.max_iters {
            info!("iteration budget spent, G = {:.4}", ev.energy.g_total);
            if snapshots.last().map(|s| s.0) != Some(iter) {
                snapshots.push((iter, conf.clone()));
            }
            return Ok(Trajectory {
                rows,
                times,
                snapshots,
                final_conf: conf,
                final_energy: ev.energy,
                final_positions: ev.positions,
                stop: StopReason::MaxIterations,
                iterations: iter,
            });
        }
        energies.push(ev.energy.g_total);
        let snap = step.snapshot_every > 0 && iter % step.snapshot_every == 0 && iter > 0;
        times.push(ev.times);
        rows.push(IterationRow {
            iteration: iter,
            g_elec: ev.energy.g_elec,
            g_vdw: ev.energy.g_vdw,
            g_cav: ev.energy.g_cav,
            g_total: ev.energy.g_total,
            tau_max: t_max,
            snapshot: if snap { format!("snapshot_{iter:06}.pdb") } else { String::new() },
        });
        if snap {
            snapshots.push((iter, conf.clone()));
        }
        debug!("iter {iter}: G = {:.4}, |tau_max| = {t_max:.4e}", ev.energy.g_total);

        let w = step.energy_window;
        let stop = if t_max == 0.0 {
            Some(StopReason::ZeroTorque)
        } else if t_max < step.torque_tol {
            Some(StopReason::TorqueTolerance)
        } else if w > 0 && iter >= w && (energies[iter] - energies[iter - w]).abs() < step.energy_tol {
            Some(StopReason::EnergyPlateau)
        } else {
            None
        };
        if let Some(stop) = stop {
            info!("stopped after {iter} steps: {stop:?}, G = {:.4}", ev.energy.g_total);
            if snapshots.last().map(|s| s.0) != Some(iter) {
                snapshots.push((iter, conf.clone()));
            }
            return Ok(Trajectory {
                rows,
                times,
                snapshots,
                final_conf: conf,
                final_energy: ev.energy,
                final_positions: ev.positions,
                stop,
                iterations: iter,
            });
        }
        match kcm_step(&ev.torques, &conf, step.kappa)? {
            StepOutcome::Stepped { conf: next, .. } => conf = next,
            StepOutcome::Converged => unreachable!("zero torque handled above"),
        }
        iter += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub angles: Vec<f64>,
    pub energy: EnergyBreakdown,
}

/// Energies over an n × n (φ, ψ) grid for one residue, starting at −180° in
/// steps of 360°/n, everything else held at `base`.
pub fn ramachandran_scan(eval: &Evaluator, base: &Conformation, residue: usize, n: usize) -> Result<Vec<ScanPoint>> {
    if n < 2 {
        return Err(Error::Config("scan resolution must be at least 2".into()));
    }
    let r = eval
        .chain
        .residues
        .get(residue)
        .ok_or_else(|| Error::Config(format!("residue {residue} out of range")))?;
    let (jp, js) = (r.phi, r.psi);
    let step = 360.0 / n as f64;
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let (phi, psi) = (-180.0 + a as f64 * step, -180.0 + b as f64 * step);
            let mut c = base.clone();
            c.set_dihedral(&eval.chain, jp, phi);
            c.set_dihedral(&eval.chain, js, psi);
            out.push(ScanPoint {
                angles: vec![phi, psi],
                energy: eval.energy(&c)?,
            });
        }
    }
    Ok(out)
}

/// Energies over the product grid of hinge joints, each swept over
/// [v − half_width, v + half_width] in `steps` points around its value v in
/// `base`.
pub fn hinge_scan(eval: &Evaluator, base: &Conformation, hinges: &[usize], half_width: f64, steps: usize) -> Result<Vec<ScanPoint>> {
    if let Some(&h) = hinges.iter().find(|&&h| h >= eval.chain.dof()) {
        return Err(Error::JointOutOfRange(h));
    }
    let native = base.dihedrals(&eval.chain);
    let offsets: Vec<f64> = if steps <= 1 || half_width == 0.0 {
        vec![0.0]
    } else {
        (0..steps)
            .map(|s| -half_width + 2.0 * half_width * s as f64 / (steps - 1) as f64)
            .collect()
    };
    let total = offsets.len().pow(hinges.len() as u32);
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut c = base.clone();
        let mut rem = flat;
        let mut angles = Vec::with_capacity(hinges.len());
        for &h in hinges {
            let v = native[h] + offsets[rem % offsets.len()];
            rem /= offsets.len();
            c.set_dihedral(&eval.chain, h, v);
            angles.push(v);
        }
        out.push(ScanPoint {
            angles,
            energy: eval.energy(&c)?,
        });
    }
    Ok(out)
}
