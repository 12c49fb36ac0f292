use nalgebra::{DMatrix, DVector};
use ph_stability::discretization::{
    build_semidiscrete, bump_state, sample_member, simulate, SemidiscreteOperator, Trajectory,
};
use ph_stability::energy::{
    boundary_energy_integral, check_f_monotone, check_g_monotone, ensemble_bounds, f_window, g_tilde_window, g_window,
    monotonicity_tolerance, total_energy, write_f_csv, write_g_csv, DensityField, Endpoint, EnergyHistory, WindowSpec,
};
use ph_stability::model::{
    structural_constants, BoundarySpec, HamiltonianField, PHSystem, PolynomialPiece, StructuralConstants,
    DEFAULT_SAFETY, DEFAULT_SAMPLES,
};
use ph_stability::models::{fixed_fixed_string, two_string_network, StringParams};

fn unit() -> StringParams {
    StringParams::uniform(1.0, 1.0)
}

fn constants(sys: &PHSystem) -> StructuralConstants {
    structural_constants(sys, DEFAULT_SAMPLES, DEFAULT_SAFETY).unwrap()
}

fn run(op: &SemidiscreteOperator, x0: &DVector<f64>, horizon: f64, dt: f64) -> (Trajectory, DensityField) {
    let traj = simulate(op, x0, horizon, dt).unwrap();
    let field = DensityField::from_trajectory(&traj);
    (traj, field)
}

/// `(1 + ζ/2) I` on `[0, 1]`, both velocities fixed.
fn linear_h_system() -> PHSystem {
    let h = HamiltonianField::piecewise_polynomial(vec![PolynomialPiece {
        start: 0.0,
        end: 1.0,
        coefficients: vec![DMatrix::identity(2, 2), DMatrix::identity(2, 2) * 0.5],
    }])
    .unwrap();
    let w = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    PHSystem::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), DMatrix::zeros(2, 2), h, BoundarySpec::endpoint(w))
        .unwrap()
}

#[test]
fn total_energy_of_zero_and_constant_states() {
    let sys = fixed_fixed_string(&unit(), 0.0, 1.0).unwrap();
    let op = build_semidiscrete(&sys, 16).unwrap();
    let c = [0.6, -1.2];
    let constant = DVector::from_fn(op.dim(), |i, _| c[i % 2]);
    let traj = Trajectory::from_snapshots(op.metric().clone(), 0.1, vec![DVector::zeros(op.dim()), constant]);
    assert_eq!(total_energy(&traj, 0).unwrap(), 0.0);
    let expected = 0.5 * (c[0] * c[0] + c[1] * c[1]);
    assert!((total_energy(&traj, 1).unwrap() - expected).abs() < 1e-15);
}

#[test]
fn energy_never_increases() {
    let sys = two_string_network(&unit(), &unit(), 0.0, 1.0, 2.0).unwrap();
    let op = build_semidiscrete(&sys, 128).unwrap();
    let (traj, _) = run(&op, &sample_member(&op, 3, 0), 3.0, 0.004);
    let e0 = total_energy(&traj, 0).unwrap();
    for k in 1..traj.len() {
        assert!(total_energy(&traj, k).unwrap() <= total_energy(&traj, k - 1).unwrap() + 1e-11 * e0);
    }
}

#[test]
fn zero_trajectory_has_zero_functionals() {
    let sys = two_string_network(&unit(), &unit(), 0.0, 1.0, 1.0).unwrap();
    let consts = constants(&sys);
    let op = build_semidiscrete(&sys, 32).unwrap();
    let spec = WindowSpec::auto(&consts, 0.0, 1.0);
    let (_, field) = run(&op, &DVector::zeros(op.dim()), 3.0, 0.01);
    assert_eq!(f_window(&field, 0.3, &spec, false).unwrap(), 0.0);
    assert_eq!(f_window(&field, 0.3, &spec, true).unwrap(), 0.0);
    assert_eq!(g_window(&field, 0.0, &spec).unwrap(), 0.0);
    assert_eq!(g_tilde_window(&field, 0.0, &spec).unwrap(), 0.0);
    assert_eq!(boundary_energy_integral(&field, 1.0, 2.0, Endpoint::A).unwrap(), 0.0);
    let [f, ft] = check_f_monotone(&field, &spec, consts.kappa, consts.kappa_reflected, 0.0).unwrap();
    let [g, gt] = check_g_monotone(&field, &spec, 0.0).unwrap();
    for r in [f, ft, g, gt] {
        assert!(r.pass);
        assert_eq!(r.max_violation, 0.0);
    }
}

#[test]
fn window_functionals_coincide_with_boundary_integrals_at_the_ends() {
    let sys = two_string_network(&unit(), &unit(), 0.0, 1.0, 1.0).unwrap();
    let consts = constants(&sys);
    let op = build_semidiscrete(&sys, 64).unwrap();
    let spec = WindowSpec::auto(&consts, 0.0, 1.0);
    let (_, field) = run(&op, &sample_member(&op, 2, 4), 2.7, 0.01);
    let (s, t) = spec.time_span(0.0, 1.0);
    assert_eq!(f_window(&field, 0.0, &spec, false).unwrap(), boundary_energy_integral(&field, spec.sigma, spec.tau, Endpoint::A).unwrap());
    assert_eq!(f_window(&field, 1.0, &spec, true).unwrap(), boundary_energy_integral(&field, spec.sigma, spec.tau, Endpoint::B).unwrap());
    assert_eq!(f_window(&field, 0.0, &spec, true).unwrap(), boundary_energy_integral(&field, s, t, Endpoint::A).unwrap());
    assert_eq!(f_window(&field, 1.0, &spec, false).unwrap(), boundary_energy_integral(&field, s, t, Endpoint::B).unwrap());
}

#[test]
fn fixed_end_integral_is_tension_times_strain_squared() {
    let sys = fixed_fixed_string(&StringParams::uniform(1.0, 2.0), 0.0, 1.0).unwrap();
    let op = build_semidiscrete(&sys, 64).unwrap();
    let dt = 0.01;
    let (traj, field) = run(&op, &sample_member(&op, 4, 0), 2.0, dt);
    let (k0, k1) = (50, 150);
    // trapezoid sum of T x₂(a)² over snapshots, computed from the raw state
    let direct: f64 = (k0..=k1)
        .map(|k| {
            let x = &traj.snapshots()[k];
            let w = if k == k0 || k == k1 { 0.5 * dt } else { dt };
            assert!(x[0].abs() < 1e-10 * x.norm());
            w * 2.0 * x[1] * x[1]
        })
        .sum();
    let value = boundary_energy_integral(&field, k0 as f64 * dt, k1 as f64 * dt, Endpoint::A).unwrap();
    assert!((value - direct).abs() <= 1e-12 * direct);
}

#[test]
fn f_monotone_on_fixed_fixed_string() {
    let sys = fixed_fixed_string(&unit(), 0.0, 1.0).unwrap();
    let consts = constants(&sys);
    assert_eq!(consts.kappa, 0.0);
    let op = build_semidiscrete(&sys, 256).unwrap();
    let spec = WindowSpec::auto(&consts, 0.0, 1.0);
    let (_, field) = run(&op, &sample_member(&op, 8, 0), 2.7, 0.5 * op.grid().h());
    let tol = monotonicity_tolerance(&field, 10.0).unwrap();
    let [f, ft] = check_f_monotone(&field, &spec, consts.kappa, consts.kappa_reflected, tol).unwrap();
    assert!(f.pass && ft.pass, "{} {}", f.max_violation, ft.max_violation);
}

#[test]
fn weighted_f_monotone_for_linear_hamiltonian() {
    let sys = linear_h_system();
    let consts = constants(&sys);
    assert!(consts.kappa > 0.0);
    let op = build_semidiscrete(&sys, 256).unwrap();
    let spec = WindowSpec::auto(&consts, 0.0, 1.0);
    let horizon = spec.time_span(0.0, 1.0).1 + 0.01;
    let (_, field) = run(&op, &sample_member(&op, 8, 1), horizon, 0.5 * op.grid().h());
    let tol = monotonicity_tolerance(&field, 10.0).unwrap();
    let [f, ft] = check_f_monotone(&field, &spec, consts.kappa, consts.kappa_reflected, tol).unwrap();
    assert!(f.pass && ft.pass, "{} {}", f.max_violation, ft.max_violation);
}

#[test]
fn g_vanishes_at_its_last_time() {
    let sys = two_string_network(&unit(), &unit(), 0.0, 1.0, 1.0).unwrap();
    let op = build_semidiscrete(&sys, 64).unwrap();
    let spec = WindowSpec { gamma_space: 1.25, ..WindowSpec::auto(&constants(&sys), 0.0, 1.0) };
    assert!((spec.g_end() - 0.2).abs() < 1e-15);
    let (_, field) = run(&op, &sample_member(&op, 1, 0), 0.5, 0.01);
    assert!(g_window(&field, 0.0, &spec).unwrap() > 0.0);
    assert_eq!(g_window(&field, spec.g_end(), &spec).unwrap(), 0.0);
}

#[test]
fn g_tilde_stays_zero_for_interior_data() {
    let sys = two_string_network(&unit(), &unit(), 0.0, 1.0, 1.0).unwrap();
    let consts = constants(&sys);
    // leakage is grid dispersion: about 1e-9 at N = 256, 1e-12 at N = 512
    let op = build_semidiscrete(&sys, 512).unwrap();
    let spec = WindowSpec { epsilon: 0.25, ..WindowSpec::auto(&consts, 0.0, 1.0) };
    let x0 = bump_state(&op, 0.5, 0.25, &[0.5; 4]).unwrap();
    let dt = 0.5 * op.grid().h();
    let (_, field) = run(&op, &x0, spec.g_tilde_end() + dt, dt);
    let e0 = field.energy(0).unwrap();
    let mut k = 0;
    while k as f64 * dt <= spec.g_tilde_end() {
        let v = g_tilde_window(&field, k as f64 * dt, &spec).unwrap();
        assert!(v.abs() <= 1e-9 * e0, "t = {}: {v}", k as f64 * dt);
        k += 1;
    }
}

#[test]
fn functionals_are_nonnegative() {
    let sys = two_string_network(&unit(), &unit(), 0.0, 1.0, 2.0).unwrap();
    let consts = constants(&sys);
    let op = build_semidiscrete(&sys, 64).unwrap();
    let spec = WindowSpec::auto(&consts, 0.0, 1.0);
    let (_, field) = run(&op, &sample_member(&op, 6, 2), 2.7, 0.01);
    let e0 = field.energy(0).unwrap();
    let [f, ft] = check_f_monotone(&field, &spec, 0.0, 0.0, f64::INFINITY).unwrap();
    let [g, gt] = check_g_monotone(&field, &spec, f64::INFINITY).unwrap();
    for r in [f, ft, g, gt] {
        assert!(r.values.iter().all(|&v| v >= -1e-12 * e0), "{}", r.functional);
    }
}

#[test]
fn boundary_estimates_have_finite_ensemble_constants() {
    let sys = two_string_network(&unit(), &unit(), 0.0, 1.0, 1.0).unwrap();
    let consts = constants(&sys);
    let op = build_semidiscrete(&sys, 128).unwrap();
    let spec = WindowSpec::auto(&consts, 0.0, 1.0);
    let horizon = spec.time_span(0.0, 1.0).1 + 0.01;
    let histories: Vec<EnergyHistory> = (0..5)
        .map(|m| EnergyHistory::from_field(&run(&op, &sample_member(&op, 11, m), horizon, 0.005).1))
        .collect();
    for endpoint in Endpoint::BOTH {
        let b = ensemble_bounds(&histories, &spec, 1.0, endpoint).unwrap();
        let (c, d) = (b.c.unwrap(), b.d.unwrap());
        assert!(c.is_finite() && c > 0.0 && d.is_finite() && d > 0.0, "{endpoint:?}: {c} {d}");
        // every member satisfies both estimates with the reported constants
        for h in &histories {
            let observed = h.boundary_integral(b.s, b.t, endpoint).unwrap();
            assert!(h.energy_at(b.t).unwrap() <= c * observed * (1.0 + 1e-12));
            let inner = h.boundary_integral(spec.sigma, spec.tau, endpoint).unwrap();
            assert!(inner <= d * h.energy_at(b.s).unwrap() * (1.0 + 1e-12));
        }
    }
}

#[test]
fn csv_exports_cover_every_node_and_snapshot() {
    let sys = two_string_network(&unit(), &unit(), 0.0, 1.0, 1.0).unwrap();
    let consts = constants(&sys);
    let op = build_semidiscrete(&sys, 16).unwrap();
    let spec = WindowSpec::auto(&consts, 0.0, 1.0);
    let (_, field) = run(&op, &sample_member(&op, 0, 0), 2.7, 0.01);
    let mut f = Vec::new();
    write_f_csv(&field, &spec, &mut f).unwrap();
    let f = String::from_utf8(f).unwrap();
    assert_eq!(f.lines().next(), Some("zeta,F,Ftilde"));
    assert_eq!(f.lines().count(), 1 + 17);
    let mut g = Vec::new();
    write_g_csv(&field, &spec, &mut g).unwrap();
    let g = String::from_utf8(g).unwrap();
    assert_eq!(g.lines().next(), Some("t,G,Gtilde"));
    let rows = g.lines().count() - 1;
    assert_eq!(rows, (spec.g_end().max(spec.g_tilde_end()) / 0.01).floor() as usize + 1);
}
