use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use ph_stability::config::SystemConfig;
use ph_stability::discretization::{integrate, sample_member, simulate_with, step_count, write_energy_csv, write_trajectory_csv};
use ph_stability::energy::{
    check_f_monotone, check_g_monotone, monotonicity_tolerance, write_f_csv, write_g_csv, DensityRecorder,
    MonotonicityReport, WindowSpec,
};
use ph_stability::model::{structural_constants, validate_system, PHSystem, StructuralConstants, DEFAULT_SAMPLES};
use ph_stability::models::PresetParams;
use ph_stability::stability::{prepare, stability_report, CharacterizationWindows, Execution, StabilityParams};
use serde::Serialize;

use crate::args::{Common, EnergyArgs, SimulateArgs, StabilityArgs};
use crate::failure::{Failure, EXIT_VALIDATION, EXIT_WINDOW};

/// Snapshots written to trajectory.csv when `--every` is not given.
const DEFAULT_WRITTEN_SNAPSHOTS: usize = 200;

struct Loaded {
    sys: PHSystem,
    label: Option<String>,
}

fn load(common: &Common) -> Result<Loaded, Failure> {
    let config = match (&common.config, common.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            SystemConfig::from_toml_str(&text)?
        }
        (None, Some(preset)) => {
            let mut params = PresetParams {
                rho: common.rho.clone(),
                tension: common.tension.clone(),
                sigma: common.sigma.clone(),
                ..PresetParams::default()
            };
            if let Some(iv) = &common.interval {
                params.interval = [iv[0], iv[1]];
            }
            SystemConfig::Preset(ph_stability::config::PresetSystem { preset, params })
        }
        (None, None) => return Err(Failure::usage("either --config or --preset is required")),
    };
    Ok(Loaded { sys: config.build()?, label: config.label() })
}

/// Loads the system and refuses to go on unless it passes validation.
fn load_validated(common: &Common) -> Result<(Loaded, StructuralConstants), Failure> {
    let loaded = load(common)?;
    let report = validate_system(&loaded.sys, DEFAULT_SAMPLES)?;
    if !report.passed {
        let failed: Vec<String> = report.failures().map(|c| format!("{:?}", c.check)).collect();
        return Err(Failure::new(EXIT_VALIDATION, format!("system fails validation: {}", failed.join(", "))));
    }
    let consts = structural_constants(&loaded.sys, DEFAULT_SAMPLES, common.safety)?;
    Ok((loaded, consts))
}

fn execution(common: &Common) -> Execution {
    common.jobs.map(Execution::with_jobs).unwrap_or_default()
}

fn out_dir(common: &Common) -> Result<&Path, Failure> {
    fs::create_dir_all(&common.out).map_err(|e| Failure::io(&common.out, e))?;
    Ok(&common.out)
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), Failure> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Failure::io(&path, e))?;
    Ok((path, BufWriter::new(file)))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, Failure> {
    let (path, mut w) = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::io(&path, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Failure::io(&path, e))?;
    Ok(path)
}

pub fn validate(common: &Common) -> Result<i32, Failure> {
    let loaded = load(common)?;
    let report = validate_system(&loaded.sys, DEFAULT_SAMPLES)?;
    let path = write_json(out_dir(common)?, "validation.json", &report)?;
    for c in report.failures() {
        eprintln!("check {:?} failed{}", c.check, c.witness.as_ref().map(|w| format!(": {}", w.detail)).unwrap_or_default());
    }
    println!("{} ({})", if report.passed { "valid" } else { "invalid" }, path.display());
    Ok(if report.passed { 0 } else { EXIT_VALIDATION })
}

pub fn simulate(args: &SimulateArgs) -> Result<i32, Failure> {
    let common = &args.common;
    let (loaded, consts) = load_validated(common)?;
    let (op, stepper) = prepare(&loaded.sys, &consts, common.cells, common.dt)?;
    let horizon = args.horizon.unwrap_or(4.0 * consts.gamma_char * loaded.sys.length());
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Failure::usage(format!("horizon must be positive, got {horizon}")));
    }
    let steps = step_count(horizon, stepper.dt());
    let x0 = if args.zero_initial { DVector::zeros(op.dim()) } else { sample_member(&op, common.seed, args.member) };
    let traj = simulate_with(&op, &stepper, &x0, steps)?;

    let dir = out_dir(common)?;
    let every = args.every.unwrap_or((steps / DEFAULT_WRITTEN_SNAPSHOTS).max(1));
    let (path, w) = create(dir, "trajectory.csv")?;
    write_trajectory_csv(&traj, every, w).map_err(|e| Failure::io(&path, e))?;
    let (path, w) = create(dir, "energy.csv")?;
    write_energy_csv(&traj, w).map_err(|e| Failure::io(&path, e))?;
    println!("simulated {steps} steps of dt = {:e} to t = {}", stepper.dt(), traj.horizon());
    Ok(0)
}

#[derive(Serialize)]
struct MonotonicityFile<'a> {
    windows: &'a WindowSpec,
    kappa: f64,
    kappa_reflected: f64,
    cells: usize,
    dt: f64,
    seed: u64,
    member: u64,
    pass: bool,
    reports: Vec<MonotonicityReport>,
}

pub fn energy(args: &EnergyArgs) -> Result<i32, Failure> {
    let common = &args.common;
    let (loaded, consts) = load_validated(common)?;
    let sys = &loaded.sys;
    let (a, b) = sys.interval();
    let mut spec = WindowSpec::auto(&consts, a, b);
    let overrides = [
        (&mut spec.sigma, args.t_sigma),
        (&mut spec.tau, args.t_tau),
        (&mut spec.gamma, args.gamma),
        (&mut spec.gamma_space, args.gamma_space),
        (&mut spec.alpha, args.alpha),
        (&mut spec.beta, args.beta),
        (&mut spec.epsilon, args.epsilon),
    ];
    for (field, value) in overrides {
        if let Some(v) = value {
            *field = v;
        }
    }
    // the default τ follows an overridden σ
    if args.t_sigma.is_some() && args.t_tau.is_none() {
        spec.tau = spec.sigma + 0.5 * sys.length();
    }
    spec.check_time(a, b)?;
    spec.check_space(a, b)?;
    let needed = spec.time_span(a, b).1.max(spec.g_end()).max(spec.g_tilde_end());
    let horizon = args.horizon.unwrap_or(needed);
    if horizon < needed * (1.0 - 1e-12) {
        return Err(Failure::new(EXIT_WINDOW, format!("horizon {horizon} ends before the windows, which need {needed}")));
    }

    let (op, stepper) = prepare(sys, &consts, common.cells, common.dt)?;
    let steps = step_count(horizon, stepper.dt());
    let x0 = sample_member(&op, common.seed, args.member);
    let mut rec = DensityRecorder::with_capacity(op.metric().clone(), stepper.dt(), steps + 1);
    integrate(&op, &stepper, &x0, steps, &mut rec)?;
    let field = rec.finish();

    let kappa = args.kappa.unwrap_or(consts.kappa);
    let kappa_reflected = args.kappa_reflected.unwrap_or(consts.kappa_reflected);
    let tol = monotonicity_tolerance(&field, args.tolerance_constant)?;
    let [f, ft] = check_f_monotone(&field, &spec, kappa, kappa_reflected, tol)?;
    let [g, gt] = check_g_monotone(&field, &spec, tol)?;
    let reports = vec![f, ft, g, gt];
    let pass = reports.iter().all(|r| r.pass);

    let dir = out_dir(common)?;
    let (path, w) = create(dir, "windows_F.csv")?;
    write_f_csv(&field, &spec, w).map_err(|e| Failure::new(crate::failure::EXIT_IO, format!("{}: {e}", path.display())))?;
    let (path, w) = create(dir, "windows_G.csv")?;
    write_g_csv(&field, &spec, w).map_err(|e| Failure::new(crate::failure::EXIT_IO, format!("{}: {e}", path.display())))?;
    for r in &reports {
        println!("{:<26} {:<13} worst {:+.3e} (tol {:.3e}) {}", r.functional, format!("{:?}", r.direction).to_lowercase(), r.max_violation, r.tolerance, if r.pass { "ok" } else { "VIOLATED" });
    }
    let file = MonotonicityFile {
        windows: &spec,
        kappa,
        kappa_reflected,
        cells: common.cells,
        dt: stepper.dt(),
        seed: common.seed,
        member: args.member,
        pass,
        reports,
    };
    write_json(dir, "monotonicity.json", &file)?;
    Ok(0)
}

pub fn stability(args: &StabilityArgs) -> Result<i32, Failure> {
    let common = &args.common;
    let (loaded, consts) = load_validated(common)?;
    let windows = match (args.t_sigma, args.t_tau, args.t_final) {
        (Some(sigma), Some(tau), Some(t_final)) => Some(CharacterizationWindows { sigma, tau, t_final }),
        _ => None,
    };
    let params = StabilityParams {
        cells: common.cells,
        dt: common.dt,
        seed: common.seed,
        ensemble: args.ensemble,
        decay_members: args.decay_members,
        windows,
        decay_horizon: args.decay_horizon,
        extinction_floor: args.extinction_floor,
        epsilon: args.epsilon,
        ..StabilityParams::default()
    };
    let report = stability_report(&loaded.sys, &consts, &params, loaded.label.clone(), execution(common))?;
    write_json(out_dir(common)?, "stability.json", &report)?;

    let ch = &report.characterization;
    for e in &ch.endpoints {
        let k = e.k.map(|k| format!("{k:.6e}")).unwrap_or_else(|| "none".into());
        println!("characterization at {}: {:?}, k = {k}", e.endpoint.name(), e.verdict);
    }
    for s in &report.sufficient {
        println!("sufficient condition at {}: {} (k = {:.3e})", s.endpoint.name(), if s.holds { "holds" } else { "fails" }, s.k);
    }
    match (report.decay.extinction, report.decay.omega) {
        (true, _) => println!("decay: extinct by t = {}", report.decay.extinction_time.unwrap_or(f64::NAN)),
        (false, Some(w)) => println!("decay: omega = {w:.6e}, residual = {:.3e}", report.decay.residual.unwrap_or(f64::NAN)),
        (false, None) => println!("decay: no estimate"),
    }
    println!("short time drift: {:.3e} ({})", report.short_time.max_drift, if report.short_time.pass { "ok" } else { "exceeds threshold" });
    println!("verdict: {:?}", report.verdict);
    Ok(report.exit_code())
}
