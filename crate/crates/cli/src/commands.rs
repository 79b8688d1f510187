//! Implementations of the subcommands.

use std::io::Write;
use std::path::Path;

use qflip_core::evolve::{csv_f64, SWEEP_CSV_HEADER};
use qflip_core::{
    bit_flip_endpoints, corpse, load_pulse, optimize_time, pauli, pi_pulse, pulse_to_json,
    sample_batch, scorpse, ControlPulse, ConvergenceStatus, FidelityKind, GrapeConfig, GrapeRun,
    GrapeTarget, GridResolution, Pulse, RtnParams,
};

use crate::manifest::RunManifest;
use crate::{CliError, GateCheckArgs, OptimizeArgs, SweepArgs, TargetKind, TrajectoryArgs};

/// Resolve a `--pulse` value: a built-in name or a pulse file path.
fn resolve_pulse(value: &str) -> Result<(String, Pulse), CliError> {
    match value {
        "pi" => Ok(("pi".into(), pi_pulse(1.0).into())),
        "corpse" => Ok(("corpse".into(), corpse(1.0).into())),
        "scorpse" => Ok(("scorpse".into(), scorpse(1.0).into())),
        path => {
            let p = Path::new(path);
            if !p.exists() {
                return Err(CliError::Usage(format!(
                    "unknown pulse '{path}': not one of pi, corpse, scorpse and no such file"
                )));
            }
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.to_string());
            Ok((name, load_pulse(p)?))
        }
    }
}

fn write_lines(path: &Path, lines: &[String]) -> Result<(), CliError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for line in lines {
        writeln!(file, "{line}")?;
    }
    file.flush()?;
    Ok(())
}

fn validate_positive(name: &str, value: f64) -> Result<(), CliError> {
    if !value.is_finite() || value <= 0.0 {
        return Err(CliError::Usage(format!(
            "{name} must be positive, got {value}"
        )));
    }
    Ok(())
}

pub fn fidelity_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let (name, pulse) = resolve_pulse(&args.pulse)?;
    let kind = match args.kind {
        TargetKind::Bitflip => FidelityKind::BitFlip,
        TargetKind::Notgate => FidelityKind::NotGate,
    };
    let rows = qflip_core::fidelity_sweep(
        &pulse,
        &name,
        kind,
        &args.tauc,
        &args.delta,
        args.ntraj,
        args.seed,
    )
    .map_err(CliError::from)?;

    let mut lines = vec![SWEEP_CSV_HEADER.to_string()];
    lines.extend(rows.iter().map(|r| r.csv_line()));
    write_lines(&args.out, &lines)?;

    let mut manifest = RunManifest::new(
        "fidelity-sweep",
        serde_json::json!({
            "pulse": args.pulse,
            "kind": format!("{:?}", args.kind).to_lowercase(),
            "tauc": args.tauc,
            "delta": args.delta,
            "ntraj": args.ntraj,
            "seed": args.seed,
            "out": args.out.display().to_string(),
        }),
        args.seed,
    );
    manifest.record_output(&args.out);
    manifest.write_alongside(&args.out)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn status_str(status: ConvergenceStatus) -> &'static str {
    match status {
        ConvergenceStatus::Converged => "converged",
        ConvergenceStatus::MaxIterations => "max_iterations",
        ConvergenceStatus::Stalled => "stalled",
    }
}

fn history_lines(run: &GrapeRun) -> Vec<String> {
    let mut lines = vec!["iter,batch_fidelity,step,grad_norm".to_string()];
    lines.extend(run.history.iter().map(|h| {
        format!(
            "{},{},{},{}",
            h.iter,
            csv_f64(h.fidelity.mean),
            csv_f64(h.step),
            csv_f64(h.grad_norm)
        )
    }));
    lines
}

pub fn optimize(args: &OptimizeArgs) -> Result<(), CliError> {
    validate_positive("tauc", args.tauc)?;
    if args.delta < 0.0 {
        return Err(CliError::Usage(format!(
            "delta must be non-negative, got {}",
            args.delta
        )));
    }
    for &t in &args.time {
        validate_positive("time", t)?;
    }
    let params = RtnParams::new(args.delta, args.tauc).map_err(CliError::from)?;
    let target = match args.target {
        TargetKind::Bitflip => {
            let (rho0, rhof) = bit_flip_endpoints();
            GrapeTarget::StateTransfer { rho0, rhof }
        }
        TargetKind::Notgate => GrapeTarget::Gate {
            unitary: pauli(qflip_core::Axis::X),
        },
    };
    let mut config = GrapeConfig::new(target, params);
    config.batch = args.batch;
    config.seed = args.seed;
    config.max_iterations = args.max_iter;
    config.tolerance = args.tolerance;
    config.resample_noise = args.resample_noise;
    if let Some(n) = args.segments {
        config.grid = GridResolution::Count(n);
    }

    let search = optimize_time(&config, &args.time, args.restarts).map_err(CliError::from)?;

    std::fs::create_dir_all(&args.out_dir)?;
    let pulse_path = args.out_dir.join("best_pulse.json");
    let history_path = args.out_dir.join("history.csv");
    let summary_path = args.out_dir.join("summary.csv");

    let best = search.best_run();
    std::fs::write(
        &pulse_path,
        pulse_to_json(&Pulse::Grid(best.final_grid.clone())) + "\n",
    )?;
    write_lines(&history_path, &history_lines(best))?;

    let mut summary = vec![
        "time,segments,iterations,status,batch_fidelity,rescored_fidelity,rescored_stderr"
            .to_string(),
    ];
    for (t, run) in search.times.iter().zip(&search.runs) {
        summary.push(format!(
            "{},{},{},{},{},{},{}",
            csv_f64(*t),
            run.final_grid.len(),
            run.history.last().map(|h| h.iter).unwrap_or(0),
            status_str(run.status),
            csv_f64(run.final_batch_fidelity()),
            csv_f64(run.rescored.mean),
            csv_f64(run.rescored.stderr)
        ));
    }
    write_lines(&summary_path, &summary)?;

    let unconverged: Vec<String> = search
        .times
        .iter()
        .zip(&search.runs)
        .filter(|(_, r)| r.status != ConvergenceStatus::Converged)
        .map(|(t, r)| format!("T={t}: {}", status_str(r.status)))
        .collect();

    let mut manifest = RunManifest::new(
        "optimize",
        serde_json::json!({
            "target": format!("{:?}", args.target).to_lowercase(),
            "tauc": args.tauc,
            "delta": args.delta,
            "time": args.time,
            "batch": args.batch,
            "seed": args.seed,
            "restarts": args.restarts,
            "segments": args.segments,
            "max_iter": args.max_iter,
            "tolerance": args.tolerance,
            "resample_noise": args.resample_noise,
            "out_dir": args.out_dir.display().to_string(),
        }),
        args.seed,
    );
    manifest.record_output(&pulse_path);
    manifest.record_output(&history_path);
    manifest.record_output(&summary_path);
    if !unconverged.is_empty() {
        manifest.warning = Some(format!("not converged: {}", unconverged.join("; ")));
    }
    manifest.write_to(&args.out_dir.join("run.manifest.json"))?;

    println!(
        "best operation time {} with re-scored fidelity {:.6} +- {:.6} ({})",
        search.best_time(),
        best.rescored.mean,
        best.rescored.stderr,
        status_str(best.status)
    );
    if let Some(w) = manifest.warning {
        println!("warning: {w}");
    }
    Ok(())
}

pub fn gate_check(args: &GateCheckArgs) -> Result<(), CliError> {
    let (name, pulse) = resolve_pulse(&args.pulse)?;
    let unitary = pulse.noiseless_unitary();
    let target = pauli(qflip_core::Axis::X);
    let max_amp = pulse
        .control_segments()
        .iter()
        .map(|s| s.amplitude.abs())
        .fold(0.0, f64::max);
    let bound = pulse.amplitude_bound();

    println!("pulse: {name}");
    println!("duration: {}", csv_f64(pulse.duration()));
    println!("segments: {}", pulse.control_segments().len());
    println!("max_abs_amplitude: {}", csv_f64(max_amp));
    println!("a_max: {}", csv_f64(bound));
    println!(
        "bound_compliance: {}",
        if max_amp <= bound { "ok" } else { "violated" }
    );
    for row in 0..2 {
        let entries: Vec<String> = (0..2)
            .map(|col| {
                let e = unitary.entry(row, col);
                format!("({}, {})", csv_f64(e.re), csv_f64(e.im))
            })
            .collect();
        println!("noiseless_unitary_row{row}: {}", entries.join(" "));
    }
    println!(
        "distance_to_not: {}",
        csv_f64(unitary.phase_invariant_distance(&target))
    );
    Ok(())
}

pub fn trajectory_sample(args: &TrajectoryArgs) -> Result<(), CliError> {
    validate_positive("horizon", args.horizon)?;
    if args.n == 0 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    let params = RtnParams::new(args.delta, args.tauc).map_err(CliError::from)?;
    let batch = sample_batch(&params, args.horizon, args.n, args.seed);

    let mut lines = vec!["index,initial_sign,jump_times".to_string()];
    for (k, traj) in batch.iter().enumerate() {
        let times: Vec<String> = traj.jump_times().iter().map(|&t| csv_f64(t)).collect();
        lines.push(format!("{},{},{}", k, traj.initial_sign(), times.join(";")));
    }
    write_lines(&args.out, &lines)?;

    let mut manifest = RunManifest::new(
        "trajectory-sample",
        serde_json::json!({
            "tauc": args.tauc,
            "delta": args.delta,
            "horizon": args.horizon,
            "n": args.n,
            "seed": args.seed,
            "out": args.out.display().to_string(),
        }),
        args.seed,
    );
    manifest.record_output(&args.out);
    manifest.write_alongside(&args.out)?;
    println!("wrote {} trajectories to {}", args.n, args.out.display());
    Ok(())
}
