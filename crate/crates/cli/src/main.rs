mod args;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Parser;
use kcmfold_core::chain::forward_kinematics;
use kcmfold_core::kcm::{hinge_scan, ramachandran_scan, PhaseTimes, ScanPoint, SolvationMode};
use kcmfold_core::pdbio::{load_params, read_pdb, read_sequence, write_dihedrals, write_pdb, RunLog};
use kcmfold_core::solvation::{sasa_pass, Solvent};
use kcmfold_core::*;
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use args::*;

/// Chain plus its native conformation when read from a structure.
struct Loaded {
    chain: Chain,
    native: Option<Conformation>,
    params: ForceFieldParams,
    source: Value,
}

fn load(input: &InputArgs) -> Result<Loaded> {
    let lib = match &input.templates {
        Some(p) => TemplateLibrary::load(p)?,
        None => TemplateLibrary::builtin(),
    };
    let params = match &input.params {
        Some(p) => load_params(p)?,
        None => ForceFieldParams::builtin(),
    };
    if let Some(path) = &input.pdb {
        let rec = read_pdb(path)?;
        let (chain, native) = Chain::from_structure(&rec, &lib)?;
        return Ok(Loaded {
            chain,
            native: Some(native),
            params,
            source: json!({ "pdb": path }),
        });
    }
    let text = input.seq.as_deref().context("--seq or --pdb is required")?;
    let seq = read_sequence(text)?;
    let chain = build_sequence(&seq, &lib, &input.cis)?;
    Ok(Loaded {
        chain,
        native: None,
        params,
        source: json!({ "seq": text }),
    })
}

fn build_sequence(seq: &[String], lib: &TemplateLibrary, cis: &[usize]) -> Result<Chain> {
    if let Some(&bad) = cis.iter().find(|&&c| c == 0 || c >= seq.len()) {
        bail!("--cis {bad}: no peptide bond after residue {bad}");
    }
    let opts = BuildOptions {
        cis: cis.iter().map(|c| c - 1).collect(),
    };
    Ok(build_chain(seq, Geometry::Canonical, lib, &opts)?)
}

fn sequence_of(chain: &Chain) -> Vec<String> {
    chain.residues.iter().map(|r| r.name.clone()).collect()
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(v)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn manifest(command: &str, threads: usize, extra: Value) -> Value {
    let mut m = json!({
        "tool": "kcmfold",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "threads": threads,
    });
    if let (Value::Object(a), Value::Object(b)) = (&mut m, extra) {
        a.extend(b);
    }
    m
}

fn energy_json(e: &EnergyBreakdown) -> Value {
    json!({ "g_elec": e.g_elec, "g_vdw": e.g_vdw, "g_cav": e.g_cav, "g_total": e.g_total })
}

fn start_conf(chain: &Chain, native: Option<&Conformation>, start: &StartArgs, rng: &mut ChaCha8Rng) -> Result<Conformation> {
    Ok(match start.init {
        InitMode::Zp => Conformation::zero(chain),
        InitMode::Uniform => Conformation::uniform(chain, start.phi, start.psi),
        InitMode::Random => {
            let mut c = Conformation::zero(chain);
            for r in &chain.residues {
                c.set_dihedral(chain, r.phi, rng.gen_range(-start.range..=start.range));
                c.set_dihedral(chain, r.psi, rng.gen_range(-start.range..=start.range));
            }
            c
        }
        InitMode::Native => {
            let mut c = native.context("--init native needs --pdb")?.clone();
            if start.perturb > 0.0 {
                for t in &mut c.theta {
                    *t = (*t + rng.gen_range(-start.perturb..=start.perturb)).rem_euclid(360.0);
                }
            }
            c
        }
    })
}

fn write_timings(path: &Path, rows: &[kcmfold_core::pdbio::IterationRow], times: &[PhaseTimes]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "kinematics_ms", "hash_ms", "elec_vdw_ms", "solvation_ms", "torque_ms"])?;
    for (r, t) in rows.iter().zip(times) {
        w.write_record([
            r.iteration.to_string(),
            format!("{:.4}", t.kinematics_ms),
            format!("{:.4}", t.hash_ms),
            format!("{:.4}", t.elec_vdw_ms),
            format!("{:.4}", t.solvation_ms),
            format!("{:.4}", t.torque_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn fold_cmd(a: &FoldArgs, threads: usize) -> Result<()> {
    let loaded = load(&a.input)?;
    let field = a.field.config(false)?;
    let step = a.step();
    step.validate()?;
    let seed = a.start.seed.unwrap_or_else(rand::random);
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    if let Some(count) = a.batch {
        return fold_batch(a, loaded, field, &step, seed, count, threads);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ev = Evaluator::new(loaded.chain, &loaded.params, field)?;
    let mut start = start_conf(&ev.chain, loaded.native.as_ref(), &a.start, &mut rng)?;
    let mut frozen = Vec::new();
    for tok in &a.freeze {
        let k = parse_joint(&ev.chain, tok)?;
        start.frozen[k] = true;
        frozen.push(joint_label(&ev.chain, k));
    }
    let t = Instant::now();
    let traj = fold(&ev, &start, &step)?;
    let wall = t.elapsed().as_secs_f64();

    RunLog { rows: traj.rows.clone() }.write(&a.out.join("runlog.csv"))?;
    write_timings(&a.out.join("timings.csv"), &traj.rows, &traj.times)?;
    write_dihedrals(&a.out.join("dihedrals.csv"), &ev.chain, &traj.snapshots)?;
    write_pdb(&ev.chain, &forward_kinematics(&ev.chain, &start)?, &a.out.join("initial.pdb"))?;
    write_pdb(&ev.chain, &traj.final_positions, &a.out.join("final.pdb"))?;
    for row in traj.rows.iter().filter(|r| !r.snapshot.is_empty()) {
        let conf = &traj.snapshots.iter().find(|s| s.0 == row.iteration).context("snapshot missing")?.1;
        write_pdb(&ev.chain, &forward_kinematics(&ev.chain, conf)?, &a.out.join(&row.snapshot))?;
    }
    let m = manifest(
        "fold",
        threads,
        json!({
            "input": loaded.source,
            "sequence": sequence_of(&ev.chain),
            "atoms": ev.chain.atom_count(),
            "joints": ev.chain.dof(),
            "seed": seed,
            "init": format!("{:?}", a.start.init).to_lowercase(),
            "start": { "phi": a.start.phi, "psi": a.start.psi, "range": a.start.range, "perturb": a.start.perturb },
            "frozen": frozen,
            "field": field,
            "step": step,
            "result": {
                "stop": format!("{:?}", traj.stop),
                "converged": traj.converged(),
                "iterations": traj.iterations,
                "energy": energy_json(&traj.final_energy),
                "wall_s": wall,
            },
            "files": ["runlog.csv", "timings.csv", "dihedrals.csv", "initial.pdb", "final.pdb"],
        }),
    );
    write_json(&a.out.join("manifest.json"), &m)?;
    println!(
        "{:?} after {} iterations: G = {:.4} kcal/mol ({})",
        traj.stop,
        traj.iterations,
        traj.final_energy.g_total,
        a.out.display()
    );
    Ok(())
}

fn fold_batch(
    a: &FoldArgs,
    loaded: Loaded,
    field: FieldConfig,
    step: &StepConfig,
    seed: u64,
    count: usize,
    threads: usize,
) -> Result<()> {
    if a.start.init != InitMode::Random {
        bail!("--batch runs use --init random");
    }
    let (lo, hi) = parse_range(&a.batch_lengths)?;
    let unit = sequence_of(&loaded.chain);
    let lib = match &a.input.templates {
        Some(p) => TemplateLibrary::load(p)?,
        None => TemplateLibrary::builtin(),
    };
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut runs = csv::Writer::from_path(a.out.join("batch.csv"))?;
    runs.write_record(["run", "residues", "seed", "stop", "iterations", "g_total"])?;
    let mut angles = csv::Writer::from_path(a.out.join("batch_dihedrals.csv"))?;
    angles.write_record(["run", "residue", "name", "phi", "psi"])?;
    for run in 0..count {
        let len = master.gen_range(lo..=hi);
        let run_seed: u64 = master.gen();
        let seq: Vec<String> = unit.iter().cycle().take(len).cloned().collect();
        let ev = Evaluator::new(build_sequence(&seq, &lib, &[])?, &loaded.params, field)?;
        let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
        let start = start_conf(&ev.chain, None, &a.start, &mut rng)?;
        let traj = fold(&ev, &start, step).with_context(|| format!("batch run {run}"))?;
        runs.write_record([
            run.to_string(),
            len.to_string(),
            run_seed.to_string(),
            format!("{:?}", traj.stop),
            traj.iterations.to_string(),
            traj.final_energy.g_total.to_string(),
        ])?;
        let d = traj.final_conf.dihedrals(&ev.chain);
        for (i, r) in ev.chain.residues.iter().enumerate() {
            angles.write_record([run.to_string(), (i + 1).to_string(), r.name.clone(), d[r.phi].to_string(), d[r.psi].to_string()])?;
        }
        info!("batch run {run}: {len} residues, {:?} after {}", traj.stop, traj.iterations);
    }
    runs.flush()?;
    angles.flush()?;
    let m = manifest(
        "fold",
        threads,
        json!({
            "input": loaded.source,
            "batch": { "count": count, "lengths": [lo, hi], "unit": unit },
            "seed": seed,
            "init": "random",
            "start": { "range": a.start.range },
            "field": field,
            "step": step,
            "files": ["batch.csv", "batch_dihedrals.csv"],
        }),
    );
    write_json(&a.out.join("manifest.json"), &m)?;
    println!("{count} runs written to {}", a.out.display());
    Ok(())
}

fn write_scan(path: &Path, names: &[String], points: &[ScanPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = names.to_vec();
    header.extend(["g_elec", "g_vdw", "g_cav", "g_total"].map(String::from));
    w.write_record(&header)?;
    for p in points {
        let mut rec: Vec<String> = p.angles.iter().map(|v| v.to_string()).collect();
        for e in [p.energy.g_elec, p.energy.g_vdw, p.energy.g_cav, p.energy.g_total] {
            rec.push(e.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn base_conf(loaded: &Loaded, chain: &Chain, phi: f64, psi: f64) -> Conformation {
    loaded.native.clone().unwrap_or_else(|| Conformation::uniform(chain, phi, psi))
}

fn rama_cmd(a: &RamaArgs, threads: usize) -> Result<()> {
    let loaded = load(&a.input)?;
    let field = a.field.config(false)?;
    let ev = Evaluator::new(loaded.chain.clone(), &loaded.params, field)?;
    if a.residue == 0 || a.residue > ev.chain.residue_count() {
        bail!("--residue {} out of range 1..={}", a.residue, ev.chain.residue_count());
    }
    let base = loaded.native.clone().unwrap_or_else(|| Conformation::zero(&ev.chain));
    let scan = ramachandran_scan(&ev, &base, a.residue - 1, a.grid)?;
    fs::create_dir_all(&a.out)?;
    write_scan(&a.out.join("rama.csv"), &["phi".into(), "psi".into()], &scan)?;
    let min = scan.iter().min_by(|x, y| x.energy.g_total.total_cmp(&y.energy.g_total)).context("empty scan")?;
    let m = manifest(
        "scan-rama",
        threads,
        json!({
            "input": loaded.source,
            "sequence": sequence_of(&ev.chain),
            "residue": a.residue,
            "grid": a.grid,
            "field": field,
            "minimum": { "phi": min.angles[0], "psi": min.angles[1], "energy": energy_json(&min.energy) },
            "files": ["rama.csv"],
        }),
    );
    write_json(&a.out.join("manifest.json"), &m)?;
    println!("minimum {:.4} kcal/mol at ({}, {})", min.energy.g_total, min.angles[0], min.angles[1]);
    Ok(())
}

fn hinge_cmd(a: &HingeArgs, threads: usize) -> Result<()> {
    let loaded = load(&a.input)?;
    let field = a.field.config(false)?;
    let ev = Evaluator::new(loaded.chain.clone(), &loaded.params, field)?;
    let hinges = a.hinges.iter().map(|t| parse_joint(&ev.chain, t)).collect::<Result<Vec<_>>>()?;
    let names: Vec<String> = hinges.iter().map(|&k| joint_label(&ev.chain, k)).collect();
    let base = base_conf(&loaded, &ev.chain, a.phi, a.psi);
    let scan = hinge_scan(&ev, &base, &hinges, a.half_width, a.steps)?;
    fs::create_dir_all(&a.out)?;
    write_scan(&a.out.join("hinge.csv"), &names, &scan)?;
    let m = manifest(
        "scan-hinge",
        threads,
        json!({
            "input": loaded.source,
            "sequence": sequence_of(&ev.chain),
            "hinges": names,
            "half_width": a.half_width,
            "steps": a.steps,
            "base": { "phi": a.phi, "psi": a.psi, "native": loaded.native.is_some() },
            "field": field,
            "points": scan.len(),
            "files": ["hinge.csv"],
        }),
    );
    write_json(&a.out.join("manifest.json"), &m)?;
    println!("{} points written to {}", scan.len(), a.out.display());
    Ok(())
}

fn sasa_cmd(a: &SasaArgs, threads: usize) -> Result<()> {
    let loaded = load(&a.input)?;
    let mut field = a.field.config(true)?;
    field.solvation_mode = SolvationMode::ReportOnly;
    let ev = Evaluator::new(loaded.chain.clone(), &loaded.params, field)?;
    let conf = base_conf(&loaded, &ev.chain, a.phi, a.psi);
    let pos = forward_kinematics(&ev.chain, &conf)?;
    let table = ev.neighbor_table(&pos)?;
    let sv = Solvent::new(&pos, &ev.params, &table, &field.solvation)?;
    let (res, _) = sasa_pass(&sv, &ev.sphere);
    fs::create_dir_all(&a.out)?;
    let mut w = csv::Writer::from_path(a.out.join("sasa.csv"))?;
    w.write_record(["atom", "residue", "res_name", "name", "class", "radius", "f_exp", "a_exp", "gamma", "g_cav"])?;
    let mut area = 0.0;
    for (i, at) in ev.chain.atoms.iter().enumerate() {
        let p = &ev.params[i];
        area += res.a_exp[i];
        w.write_record([
            (i + 1).to_string(),
            at.res_seq.to_string(),
            at.res_name.clone(),
            at.name.clone(),
            format!("{:?}", p.solv_class),
            p.r.to_string(),
            res.f_exp[i].to_string(),
            res.a_exp[i].to_string(),
            p.gamma.to_string(),
            (p.gamma * res.a_exp[i]).to_string(),
        ])?;
    }
    w.flush()?;
    let m = manifest(
        "sasa",
        threads,
        json!({
            "input": loaded.source,
            "sequence": sequence_of(&ev.chain),
            "atoms": ev.chain.atom_count(),
            "field": field,
            "total": { "a_exp": area, "g_cav": res.g_cav },
            "files": ["sasa.csv"],
        }),
    );
    write_json(&a.out.join("manifest.json"), &m)?;
    println!("exposed area {area:.3} Å², G_cav {:.4} kcal/mol", res.g_cav);
    Ok(())
}

fn best_times(ev: &Evaluator, conf: &Conformation, reps: usize) -> Result<PhaseTimes> {
    let mut best: Option<PhaseTimes> = None;
    for _ in 0..reps.max(1) {
        let t = ev.evaluate(conf)?.times;
        if best.map_or(true, |b| t.force_ms() < b.force_ms()) {
            best = Some(t);
        }
    }
    Ok(best.expect("at least one repetition"))
}

fn bench_cmd(a: &BenchArgs, threads: usize) -> Result<()> {
    let field = a.field.config(true)?;
    let lib = TemplateLibrary::builtin();
    let params = ForceFieldParams::builtin();
    fs::create_dir_all(&a.out)?;
    let mut w = csv::Writer::from_path(a.out.join("bench.csv"))?;
    w.write_record([
        "residues",
        "atoms",
        "kinematics_ms",
        "torque_ms",
        "hashed_hash_ms",
        "hashed_elec_vdw_ms",
        "hashed_solvation_ms",
        "hashed_force_ms",
        "brute_hash_ms",
        "brute_elec_vdw_ms",
        "brute_solvation_ms",
        "brute_force_ms",
        "speedup",
    ])?;
    println!("{:>8} {:>7} {:>12} {:>12} {:>8}", "residues", "atoms", "hashed_ms", "brute_ms", "speedup");
    for &m in &a.sizes {
        let seq = vec![a.residue.to_ascii_uppercase(); m];
        let chain = build_sequence(&seq, &lib, &[])?;
        let hashed = Evaluator::new(chain.clone(), &params, FieldConfig { hashing: true, ..field })?;
        let brute = Evaluator::new(chain, &params, FieldConfig { hashing: false, ..field })?;
        let conf = Conformation::uniform(&hashed.chain, a.phi, a.psi);
        let h = best_times(&hashed, &conf, a.reps)?;
        let b = best_times(&brute, &conf, a.reps)?;
        let speedup = b.force_ms() / h.force_ms();
        w.write_record(
            [m as f64, hashed.chain.atom_count() as f64, h.kinematics_ms, h.torque_ms, h.hash_ms, h.elec_vdw_ms, h.solvation_ms, h.force_ms(), b.hash_ms, b.elec_vdw_ms, b.solvation_ms, b.force_ms(), speedup]
                .iter()
                .enumerate()
                .map(|(i, v)| if i < 2 { format!("{v}") } else { format!("{v:.4}") }),
        )?;
        println!("{m:>8} {:>7} {:>12.3} {:>12.3} {speedup:>8.2}", hashed.chain.atom_count(), h.force_ms(), b.force_ms());
    }
    w.flush()?;
    let m = manifest(
        "bench",
        threads,
        json!({
            "sizes": a.sizes,
            "residue": a.residue,
            "conformation": { "phi": a.phi, "psi": a.psi },
            "reps": a.reps,
            "field": field,
            "files": ["bench.csv"],
        }),
    );
    write_json(&a.out.join("manifest.json"), &m)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let threads = rayon::current_num_threads();
    match &cli.command {
        Command::Fold(a) => fold_cmd(a, threads),
        Command::ScanRama(a) => rama_cmd(a, threads),
        Command::ScanHinge(a) => hinge_cmd(a, threads),
        Command::Sasa(a) => sasa_cmd(a, threads),
        Command::Bench(a) => bench_cmd(a, threads),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
