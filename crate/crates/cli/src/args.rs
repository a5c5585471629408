use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use kcmfold_core::chain::JointKind;
use kcmfold_core::kcm::{FieldConfig, SolvationMode, StepConfig};
use kcmfold_core::pdbio::GammaColumn;
use kcmfold_core::solvation::{Sampling, SolvationConfig};
use kcmfold_core::spatial::GridConfig;
use kcmfold_core::{Chain, Dielectric};

#[derive(Debug, Parser)]
#[command(name = "kcmfold", version, about = "Peptide folding by kinetostatic compliance")]
pub struct Cli {
    /// Worker threads for the parallel phases (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fold a chain by compliance steps.
    Fold(FoldArgs),
    /// Energy over a (φ, ψ) grid for one residue.
    ScanRama(RamaArgs),
    /// Energy over a grid of offsets on chosen joints.
    ScanHinge(HingeArgs),
    /// Per-atom exposed area and cavity energy of one conformation.
    Sasa(SasaArgs),
    /// Per-phase timings against chain length, hashed and all-pairs.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["seq", "pdb"])))]
pub struct InputArgs {
    /// Sequence in one- or three-letter codes.
    #[arg(long)]
    pub seq: Option<String>,

    /// Structure file; its peptide geometry is kept as read.
    #[arg(long)]
    pub pdb: Option<PathBuf>,

    /// Residue template file (default: built-in).
    #[arg(long)]
    pub templates: Option<PathBuf>,

    /// Force-field parameter file (default: built-in).
    #[arg(long)]
    pub params: Option<PathBuf>,

    /// Peptide bonds built cis, by the residue number before the bond.
    #[arg(long, value_delimiter = ',')]
    pub cis: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GammaArg {
    Kyte,
    Sharp,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// No solvation term.
    #[arg(long, visible_alias = "no-solvation", conflicts_with_all = ["water", "report_solvation"])]
    pub vacuum: bool,

    /// Apply the cavity (solvation) forces.
    #[arg(long, conflicts_with = "report_solvation")]
    pub water: bool,

    /// Compute and log the cavity energy without applying its forces.
    #[arg(long)]
    pub report_solvation: bool,

    /// Cutoffs elec,vdw,cav in Å.
    #[arg(long, default_value = "9,5,8")]
    pub cutoffs: String,

    /// Grid buckets per atom.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    /// Smallest grid cell edge, Å.
    #[arg(long, default_value_t = 1.0)]
    pub min_cell: f64,

    /// All-pairs neighbor search instead of the hash grid.
    #[arg(long)]
    pub no_hashing: bool,

    /// `distance` (κ = d) or a constant dielectric value.
    #[arg(long, default_value = "distance")]
    pub dielectric: String,

    /// Surface samples per atom.
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,

    /// Displacement for the exposure tallies, Å.
    #[arg(long, default_value_t = 0.01)]
    pub delta_r: f64,

    /// Water probe radius, Å.
    #[arg(long, default_value_t = 1.4)]
    pub probe: f64,

    /// Random surface samples from this seed instead of the geodesic set.
    #[arg(long)]
    pub sample_seed: Option<u64>,

    /// Solvation parameter column.
    #[arg(long, value_enum, default_value = "sharp")]
    pub gamma: GammaArg,

    #[arg(long)]
    pub no_elec: bool,

    #[arg(long)]
    pub no_vdw: bool,
}

impl FieldArgs {
    /// Field configuration; `water_by_default` decides when no mode flag is given.
    pub fn config(&self, water_by_default: bool) -> Result<FieldConfig> {
        let cuts = parse_floats(&self.cutoffs).context("--cutoffs")?;
        let [cut_elec, cut_vdw, cut_cav] = cuts[..] else {
            bail!("--cutoffs takes three values: elec,vdw,cav");
        };
        let dielectric = match self.dielectric.as_str() {
            "distance" => Dielectric::Distance,
            v => Dielectric::Constant(v.parse().with_context(|| format!("--dielectric `{v}`"))?),
        };
        let solvation_mode = if self.water {
            SolvationMode::Applied
        } else if self.report_solvation {
            SolvationMode::ReportOnly
        } else if self.vacuum || !water_by_default {
            SolvationMode::Off
        } else {
            SolvationMode::Applied
        };
        Ok(FieldConfig {
            grid: GridConfig {
                alpha: self.alpha,
                min_cell: self.min_cell,
                cut_elec,
                cut_vdw,
                cut_cav,
            },
            dielectric,
            solvation_mode,
            solvation: SolvationConfig {
                probe_radius: self.probe,
                delta_r: self.delta_r,
                n_samples: self.samples,
                sampling: match self.sample_seed {
                    Some(seed) => Sampling::Random { seed },
                    None => Sampling::Geodesic,
                },
            },
            gamma_column: match self.gamma {
                GammaArg::Kyte => GammaColumn::Kyte,
                GammaArg::Sharp => GammaColumn::Sharp,
            },
            hashing: !self.no_hashing,
            elec: !self.no_elec,
            vdw: !self.no_vdw,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitMode {
    /// All-trans reference conformation.
    Zp,
    /// Every residue at --phi/--psi.
    Uniform,
    /// φ, ψ drawn uniformly from ±--range.
    Random,
    /// Structure as read, plus ±--perturb noise on every joint.
    Native,
}

#[derive(Debug, Args)]
pub struct StartArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    pub init: InitMode,

    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub phi: f64,

    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    pub psi: f64,

    /// Half-width of the random start range, degrees.
    #[arg(long, default_value_t = 90.0)]
    pub range: f64,

    /// Half-width of the noise on a native start, degrees.
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,

    /// RNG seed (drawn and recorded when omitted).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FoldArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub field: FieldArgs,

    #[command(flatten)]
    pub start: StartArgs,

    /// Largest joint change per step, degrees.
    #[arg(long, default_value_t = 0.5)]
    pub kappa: f64,

    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,

    /// Stop when the largest free torque falls below this, kcal/mol.
    #[arg(long, default_value_t = 1e-4)]
    pub torque_tol: f64,

    /// Stop when the energy moves less than this over the window, kcal/mol.
    #[arg(long, default_value_t = 1e-3)]
    pub energy_tol: f64,

    #[arg(long, default_value_t = 20)]
    pub energy_window: usize,

    /// Joints to hold fixed: indices or RES:NAME (e.g. 3:phi, 5:chi1).
    #[arg(long, value_delimiter = ',')]
    pub freeze: Vec<String>,

    /// Write a PDB snapshot every n iterations (0: first and last only).
    #[arg(long, default_value_t = 0)]
    pub snapshot_every: usize,

    /// Run this many independent chains with random starts.
    #[arg(long, requires = "seq", conflicts_with = "pdb")]
    pub batch: Option<usize>,

    /// Chain lengths for --batch, inclusive range `lo..hi`.
    #[arg(long, default_value = "10..20")]
    pub batch_lengths: String,

    #[arg(long, default_value = "kcmfold-out")]
    pub out: PathBuf,
}

impl FoldArgs {
    pub fn step(&self) -> StepConfig {
        StepConfig {
            kappa: self.kappa,
            max_iters: self.max_iters,
            torque_tol: self.torque_tol,
            energy_window: self.energy_window,
            energy_tol: self.energy_tol,
            snapshot_every: self.snapshot_every,
        }
    }
}

#[derive(Debug, Args)]
pub struct RamaArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub field: FieldArgs,

    /// Residue number (1-based) whose φ and ψ are scanned.
    #[arg(long, default_value_t = 2)]
    pub residue: usize,

    /// Grid points per axis.
    #[arg(long, default_value_t = 36)]
    pub grid: usize,

    #[arg(long, default_value = "kcmfold-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HingeArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub field: FieldArgs,

    /// Joints to sweep: indices or RES:NAME.
    #[arg(long, value_delimiter = ',', required = true)]
    pub hinges: Vec<String>,

    /// Sweep half-width around the base value, degrees.
    #[arg(long, default_value_t = 30.0)]
    pub half_width: f64,

    /// Points per joint.
    #[arg(long, default_value_t = 13)]
    pub steps: usize,

    /// Base φ/ψ for sequence input (structure input uses the native angles).
    #[arg(long, default_value_t = -57.0, allow_hyphen_values = true)]
    pub phi: f64,

    #[arg(long, default_value_t = -47.0, allow_hyphen_values = true)]
    pub psi: f64,

    #[arg(long, default_value = "kcmfold-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SasaArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub field: FieldArgs,

    /// φ/ψ for sequence input (structure input uses its coordinates).
    #[arg(long, default_value_t = -57.0, allow_hyphen_values = true)]
    pub phi: f64,

    #[arg(long, default_value_t = -47.0, allow_hyphen_values = true)]
    pub psi: f64,

    #[arg(long, default_value = "kcmfold-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub field: FieldArgs,

    /// Chain lengths in residues.
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
    pub sizes: Vec<usize>,

    /// Repeated residue.
    #[arg(long, default_value = "ALA")]
    pub residue: String,

    #[arg(long, default_value_t = -57.0, allow_hyphen_values = true)]
    pub phi: f64,

    #[arg(long, default_value_t = -47.0, allow_hyphen_values = true)]
    pub psi: f64,

    /// Evaluations per size and mode; the fastest is kept.
    #[arg(long, default_value_t = 3)]
    pub reps: usize,

    #[arg(long, default_value = "kcmfold-out")]
    pub out: PathBuf,
}

pub fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("`{t}` is not a number")))
        .collect()
}

/// Inclusive `lo..hi` (or `lo-hi`) range.
pub fn parse_range(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once("..")
        .or_else(|| s.split_once('-'))
        .with_context(|| format!("`{s}` is not a range lo..hi"))?;
    let (lo, hi): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
    if lo == 0 || lo > hi {
        bail!("range `{s}` must satisfy 1 <= lo <= hi");
    }
    Ok((lo, hi))
}

pub fn joint_label(chain: &Chain, k: usize) -> String {
    let j = &chain.joints[k];
    let name = match j.kind {
        JointKind::Phi => "phi".to_string(),
        JointKind::Psi => "psi".to_string(),
        JointKind::Chi(c) => format!("chi{c}"),
    };
    format!("{}:{name}", j.residue + 1)
}

/// Joint index from `7` or `3:psi` (residue numbers are 1-based).
pub fn parse_joint(chain: &Chain, token: &str) -> Result<usize> {
    let token = token.trim();
    if let Ok(k) = token.parse::<usize>() {
        if k >= chain.dof() {
            bail!("joint {k} out of range (chain has {} joints)", chain.dof());
        }
        return Ok(k);
    }
    let (res, name) = token.split_once(':').with_context(|| format!("joint `{token}` is neither an index nor RES:NAME"))?;
    let res: usize = res.parse().with_context(|| format!("residue in `{token}`"))?;
    if res == 0 || res > chain.residue_count() {
        bail!("residue {res} out of range 1..={}", chain.residue_count());
    }
    let r = &chain.residues[res - 1];
    let name = name.to_ascii_lowercase();
    match name.as_str() {
        "phi" => Ok(r.phi),
        "psi" => Ok(r.psi),
        _ => {
            let c: usize = name
                .strip_prefix("chi")
                .and_then(|n| n.parse().ok())
                .with_context(|| format!("unknown joint name `{name}`"))?;
            r.chis.get(c.wrapping_sub(1)).copied().with_context(|| format!("residue {res} has no chi{c}"))
        }
    }
}
