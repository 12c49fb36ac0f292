//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::DVector;
use ph_stability::config::SystemConfig;
use ph_stability::discretization::{build_semidiscrete, bump, from_fn, sample_member, simulate};
use ph_stability::energy::{
    check_f_monotone, check_g_monotone, ensemble_bounds, monotonicity_tolerance, DensityField, EnergyHistory, Endpoint,
    WindowSpec,
};
use ph_stability::model::{structural_constants, PHSystem, StructuralConstants, DEFAULT_SAFETY, DEFAULT_SAMPLES};
use ph_stability::models::{
    fixed_fixed_string, four_string_network, matched_damping, single_damped_string, single_string,
    two_string_network, DAlembert, End, EndCondition, Preset, PresetParams, StringParams,
};
use ph_stability::stability::{
    assess, prepare, run_histories, short_time_check, stability_report,
    sufficient_condition_check, BumpPlacement, CharacterizationWindows, Evidence, Execution, StabilityParams,
    SHORT_TIME_THRESHOLD,
};

const BUDGET: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn unit() -> StringParams {
    StringParams::uniform(1.0, 1.0)
}

fn constants(sys: &PHSystem) -> StructuralConstants {
    structural_constants(sys, DEFAULT_SAMPLES, DEFAULT_SAFETY).unwrap()
}

fn two_string(sigma: f64) -> PHSystem {
    two_string_network(&unit(), &unit(), 0.0, 1.0, sigma).unwrap()
}

fn four_string() -> PHSystem {
    four_string_network(&[unit(), unit(), unit(), unit()], 0.0, 1.0, 1.0, 1.0).unwrap()
}

fn matched_string() -> PHSystem {
    single_damped_string(&unit(), 0.0, 1.0, End::A, matched_damping(1.0, 1.0)).unwrap()
}

fn graded() -> PHSystem {
    let text = include_str!("../../../configs/graded.toml");
    SystemConfig::from_toml_str(text).unwrap().build().unwrap()
}

/// Energy histories of the first `members` ensemble members up to `horizon`.
fn histories(sys: &PHSystem, cells: usize, seed: u64, members: u64, horizon: f64) -> Vec<EnergyHistory> {
    let consts = constants(sys);
    let (op, stepper) = prepare(sys, &consts, cells, None).unwrap();
    let steps = (horizon / stepper.dt()).ceil() as usize;
    let runs: Vec<(u64, usize)> = (0..members).map(|m| (m, steps)).collect();
    run_histories(&op, &stepper, seed, &runs, Execution::default()).unwrap()
}

fn contraction() -> Outcome {
    let mut worst: f64 = f64::NEG_INFINITY;
    for preset in Preset::ALL {
        let sys = preset.build(&PresetParams::default()).unwrap();
        for h in histories(&sys, 256, 1, 5, 5.0 * sys.length()) {
            let e = h.energies();
            for k in 1..e.len() {
                let growth = (e[k] - e[k - 1]) / e[0];
                worst = worst.max(growth);
                ensure(growth <= 1e-11, format!("{preset}: E grows by {growth:e} E(0) at step {k}"))?;
            }
        }
    }
    Ok(format!("largest step growth {worst:.2e} E(0)"))
}

fn conservation() -> Outcome {
    let sys = fixed_fixed_string(&unit(), 0.0, 1.0).unwrap();
    let h = &histories(&sys, 256, 2, 1, 10.0)[0];
    let e = h.energies();
    let drift = e.iter().map(|v| (v - e[0]).abs() / e[0]).fold(0.0, f64::max);
    ensure(drift <= 1e-10, format!("relative drift {drift:e}"))?;
    Ok(format!("relative drift {drift:.2e} over t = 10"))
}

fn pulse(z: f64) -> [f64; 2] {
    let b = bump(z, 0.5, 0.25);
    [b, 0.5 * b]
}

fn oracle_error(right: EndCondition, cells: usize) -> f64 {
    let sys = single_string(&unit(), 0.0, 1.0, EndCondition::Fixed, right).unwrap();
    let oracle = DAlembert::new(&unit(), 0.0, 1.0, EndCondition::Fixed, right).unwrap();
    let op = build_semidiscrete(&sys, cells).unwrap();
    let x0 = from_fn(&op, |z| DVector::from_column_slice(&pulse(z))).unwrap();
    let traj = simulate(&op, &x0, 1.5, 0.5 * op.grid().h()).unwrap();
    let t = traj.horizon();
    let exact = from_fn(&op, |z| DVector::from_column_slice(&oracle.evaluate(&pulse, z, t))).unwrap();
    op.energy(&(traj.snapshots().last().unwrap() - exact)).sqrt()
}

fn oracle() -> Outcome {
    let mut ratios = Vec::new();
    for (name, right) in [
        ("fixed", EndCondition::Fixed),
        ("free", EndCondition::Free),
        ("damper 3", EndCondition::Damper(3.0)),
        ("matched", EndCondition::Damper(1.0)),
    ] {
        let ratio = oracle_error(right, 256) / oracle_error(right, 512);
        ensure(ratio >= 1.8, format!("{name}: error ratio {ratio:.3}"))?;
        ratios.push(format!("{name} {ratio:.2}"));
    }
    Ok(format!("error ratios {}", ratios.join(", ")))
}

fn extinction() -> Outcome {
    let h = histories(&matched_string(), 512, 3, 5, 2.6);
    let mut worst: f64 = 0.0;
    for h in &h {
        let ratio = h.energy_at(2.5).unwrap_or_else(|_| *h.energies().last().unwrap()) / h.energies()[0];
        worst = worst.max(ratio);
    }
    ensure(worst <= 1e-6, format!("E(2.5)/E(0) = {worst:e}"))?;
    Ok(format!("max E(2.5)/E(0) = {worst:.2e} over 5 members"))
}

/// Worst violations `(v_N, v_2N)` and whether both runs passed the tolerance.
fn refinement_pair(
    sys: &PHSystem,
    cells: usize,
    check: impl Fn(&DensityField, &WindowSpec, &StructuralConstants, f64) -> Vec<(String, f64, bool)>,
) -> Vec<(String, f64, f64, bool)> {
    let consts = constants(sys);
    let (a, b) = sys.interval();
    let spec = WindowSpec::auto(&consts, a, b);
    let horizon = spec.time_span(a, b).1.max(spec.g_end()).max(spec.g_tilde_end());
    let run = |n: usize| {
        let op = build_semidiscrete(sys, n).unwrap();
        let dt = ph_stability::stability::auto_dt(op.grid().h(), &consts);
        let traj = simulate(&op, &sample_member(&op, 4, 0), horizon + dt, dt).unwrap();
        let field = DensityField::from_trajectory(&traj);
        let tol = monotonicity_tolerance(&field, 10.0).unwrap();
        check(&field, &spec, &consts, tol)
    };
    let coarse = run(cells);
    let fine = run(2 * cells);
    coarse
        .into_iter()
        .zip(fine)
        .map(|((name, v1, p1), (_, v2, p2))| (name, v1, v2, p1 && p2))
        .collect()
}

fn judge_refinement(results: Vec<(String, f64, f64, bool)>) -> Outcome {
    let mut parts = Vec::new();
    for (name, v1, v2, pass) in results {
        ensure(pass, format!("{name}: violation above tolerance ({v1:e}, {v2:e})"))?;
        ensure(v2 <= 0.6 * v1, format!("{name}: violation did not shrink, {v1:e} -> {v2:e}"))?;
        parts.push(format!("{name} {v1:.1e}->{v2:.1e}"));
    }
    Ok(format!("violations {}", parts.join(", ")))
}

fn f_monotone() -> Outcome {
    let check = |field: &DensityField, spec: &WindowSpec, c: &StructuralConstants, tol: f64| {
        check_f_monotone(field, spec, c.kappa, c.kappa_reflected, tol)
            .unwrap()
            .into_iter()
            .map(|r| (r.functional.clone(), r.max_violation, r.pass))
            .collect()
    };
    let mut results = Vec::new();
    for (label, sys) in [("fixed-fixed", fixed_fixed_string(&unit(), 0.0, 1.0).unwrap()), ("graded", graded())] {
        for (name, v1, v2, pass) in refinement_pair(&sys, 256, check) {
            results.push((format!("{label} {name}"), v1, v2, pass));
        }
    }
    judge_refinement(results)
}

fn g_monotone() -> Outcome {
    let check = |field: &DensityField, spec: &WindowSpec, _: &StructuralConstants, tol: f64| {
        check_g_monotone(field, spec, tol)
            .unwrap()
            .into_iter()
            .map(|r| (r.functional.clone(), r.max_violation, r.pass))
            .collect()
    };
    judge_refinement(refinement_pair(&two_string(1.0), 256, check))
}

fn boundary_constants() -> Outcome {
    let sys = two_string(1.0);
    let consts = constants(&sys);
    let spec = WindowSpec::auto(&consts, 0.0, 1.0);
    let horizon = spec.time_span(0.0, 1.0).1;
    let at = |cells: usize| {
        let h = histories(&sys, cells, 7, 20, horizon);
        Endpoint::BOTH.map(|e| ensemble_bounds(&h, &spec, 1.0, e).unwrap())
    };
    let (coarse, fine) = (at(256), at(512));
    let mut parts = Vec::new();
    for (b1, b2) in coarse.iter().zip(&fine) {
        for (name, x, y) in [("c", b1.c, b2.c), ("d", b1.d, b2.d)] {
            let (x, y) = match (x, y) {
                (Some(x), Some(y)) if x.is_finite() && y.is_finite() => (x, y),
                _ => return Err(format!("{name} at {:?} not finite: {x:?}, {y:?}", b1.endpoint)),
            };
            let change = (y - x).abs() / x;
            ensure(change <= 0.2, format!("{name} at {:?} moves by {:.1}%", b1.endpoint, 100.0 * change))?;
            parts.push(format!("{name}({:?}) {x:.3}->{y:.3}", b1.endpoint));
        }
    }
    Ok(parts.join(", "))
}

fn short_time() -> Outcome {
    let sys = two_string(1.0);
    let consts = constants(&sys);
    let (op, stepper) = prepare(&sys, &consts, 512, None).unwrap();
    let eps = 0.2 * sys.length();
    let interior = short_time_check(&op, &stepper, eps, consts.gamma_flux, BumpPlacement::Interior).unwrap();
    ensure(interior.max_drift <= SHORT_TIME_THRESHOLD, format!("interior drift {:e}", interior.max_drift))?;
    // the damper of the two-string preset sits at a
    let touching = short_time_check(&op, &stepper, eps, consts.gamma_flux, BumpPlacement::Touching(Endpoint::A)).unwrap();
    ensure(touching.max_drift > 1e-3, format!("control drift only {:e}", touching.max_drift))?;
    Ok(format!("interior drift {:.2e}, control drift {:.2e}", interior.max_drift, touching.max_drift))
}

fn refutation() -> Outcome {
    for (name, sys) in [("two-string", two_string(1.0)), ("four-string", four_string())] {
        for v in sufficient_condition_check(&sys) {
            ensure(!v.holds, format!("{name}: bound holds at {:?}", v.endpoint))?;
            let w = v.witness.ok_or(format!("{name}: no witness at {:?}", v.endpoint))?;
            ensure(
                w.constraint_residual <= 1e-12 && w.dissipation >= -1e-12 && w.dissipation <= 1e-12 && w.trace_norm >= 1e-6,
                format!("{name}: unsound witness at {:?}: {w:?}", v.endpoint),
            )?;
        }
    }
    let [at_b, _] = sufficient_condition_check(&matched_string());
    ensure(at_b.holds && at_b.k > 0.0, format!("matched string: {at_b:?}"))?;
    Ok(format!("both networks refuted at a and b, matched string holds with k = {:.4}", at_b.k))
}

fn evidence() -> Outcome {
    let params = StabilityParams { seed: 11, ..StabilityParams::default() };
    let exec = Execution::default();
    let mut parts = Vec::new();
    for (name, sys) in [("two-string", two_string(1.0)), ("four-string", four_string())] {
        let report = stability_report(&sys, &constants(&sys), &params, None, exec).unwrap();
        let k = report.characterization.endpoint(Endpoint::A).k;
        ensure(matches!(k, Some(k) if k > 0.0), format!("{name}: k(a) = {k:?}"))?;
        let d = &report.decay;
        if d.extinction {
            // energy vanishes in finite time: every rate fits
            parts.push(format!("{name} k(a) {:.3}, extinct at {:.2}", k.unwrap(), d.extinction_time.unwrap()));
        } else {
            let (omega, res) = (d.omega.unwrap(), d.residual.unwrap());
            ensure(omega > 0.0 && res < 0.1, format!("{name}: omega {omega:e}, residual {res:.3}"))?;
            parts.push(format!("{name} k(a) {:.3}, omega {omega:.3} (res {res:.3})", k.unwrap()));
        }
    }
    // a damper off the matched value leaves a genuine exponential tail
    let sys = two_string(2.0);
    let d = stability_report(&sys, &constants(&sys), &params, None, exec).unwrap().decay;
    let (omega, res) = (d.omega.ok_or("sigma = 2: no rate")?, d.residual.unwrap());
    ensure(omega > 0.0 && res < 0.1, format!("sigma = 2: omega {omega:e}, residual {res:.3}"))?;
    parts.push(format!("two-string sigma 2 omega {omega:.3} (res {res:.3})"));

    let sys = fixed_fixed_string(&unit(), 0.0, 1.0).unwrap();
    let report = stability_report(&sys, &constants(&sys), &params, None, exec).unwrap();
    ensure(report.verdict == Evidence::UnstableEvidence, format!("fixed-fixed verdict {:?}", report.verdict))?;
    ensure(report.exit_code() == 2, "fixed-fixed exit code")?;
    let omega = report.decay.omega.ok_or("fixed-fixed: no rate")?;
    ensure(omega.abs() <= 1e-8, format!("fixed-fixed omega {omega:e}"))?;
    parts.push(format!("fixed-fixed exit 2, omega {omega:.1e}"));
    Ok(parts.join("; "))
}

fn scale_equivariance() -> Outcome {
    let sys = two_string(1.0);
    let consts = constants(&sys);
    let windows = CharacterizationWindows::auto(consts.gamma_char, sys.length());
    let base = histories(&sys, 256, 11, 20, windows.t_final);
    // x ↦ λx scales every quadratic quantity by λ²
    let lambda: f64 = 10.0;
    let scaled: Vec<EnergyHistory> = base.iter().map(|h| h.scaled(lambda * lambda)).collect();
    let (_, k0) = assess(&base, &windows).unwrap();
    let (_, k1) = assess(&scaled, &windows).unwrap();
    let mut worst: f64 = 0.0;
    for (e0, e1) in k0.iter().zip(&k1) {
        let (a, b) = (e0.k.ok_or("missing k")?, e1.k.ok_or("missing k")?);
        worst = worst.max((a - b).abs() / a.abs());
    }
    ensure(worst <= 1e-12, format!("k moves by {worst:e}"))?;

    // the flow itself is linear: rerun one member from λx₀
    let (op, stepper) = prepare(&sys, &consts, 256, None).unwrap();
    let x0 = sample_member(&op, 11, 0);
    let t = simulate(&op, &x0, 2.0, stepper.dt()).unwrap();
    let tl = simulate(&op, &(&x0 * lambda), 2.0, stepper.dt()).unwrap();
    let lin = t
        .snapshots()
        .iter()
        .zip(tl.snapshots())
        .map(|(x, y)| (y - x * lambda).norm() / (x.norm() * lambda).max(1e-300))
        .fold(0.0, f64::max);
    ensure(lin <= 1e-12, format!("trajectory of λx₀ deviates by {lin:e}"))?;
    Ok(format!("k relative change {worst:.1e}, trajectory linearity {lin:.1e}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let run = |name: &str, extra: &[&str]| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_phstab"))
            .args(["stability", "--preset", "two-string", "--seed", "11", "--out"])
            .arg(&out)
            .args(extra)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.code() == Some(0), format!("exit {:?}", status.status.code()))?;
        std::fs::read(Path::new(&out).join("stability.json")).map_err(|e| e.to_string())
    };
    let first = run("first", &[])?;
    let second = run("second", &[])?;
    ensure(first == second, "repeated runs differ")?;
    let sequential = run("sequential", &["--jobs", "1"])?;
    ensure(first == sequential, "sequential run differs from the default pool")?;
    Ok(format!("{} bytes identical across 3 runs (including --jobs 1)", first.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("contraction", contraction),
        ("conservation control", conservation),
        ("oracle equivalence", oracle),
        ("finite-time extinction", extinction),
        ("F windows monotone", f_monotone),
        ("G windows monotone", g_monotone),
        ("boundary estimate constants", boundary_constants),
        ("short-time interior bump", short_time),
        ("sufficient condition refutation", refutation),
        ("stability evidence", evidence),
        ("scale equivariance", scale_equivariance),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > BUDGET => Err(format!("over the time budget; {detail}")),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name:<32} {:>6.1}s  {detail}", i + 1, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
