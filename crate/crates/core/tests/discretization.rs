use nalgebra::DVector;
use ph_stability::discretization::{
    boundary_subspace, build_semidiscrete, bump, from_fn, project_initial, sample_member, simulate, step_midpoint,
    SemidiscreteOperator,
};
use ph_stability::model::PHSystem;
use ph_stability::models::{
    fixed_fixed_string, four_string_network, matched_damping, single_string, two_string_network, DAlembert,
    EndCondition, Preset, PresetParams, StringParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit() -> StringParams {
    StringParams::uniform(1.0, 1.0)
}

fn matched() -> PHSystem {
    single_string(&unit(), 0.0, 1.0, EndCondition::Fixed, EndCondition::Damper(matched_damping(1.0, 1.0))).unwrap()
}

fn random_state(op: &SemidiscreteOperator, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(op.dim(), |_, _| rng.random_range(-1.0..1.0))
}

fn pulse(z: f64) -> [f64; 2] {
    let b = bump(z, 0.5, 0.25);
    [b, 0.5 * b]
}

#[test]
fn constraint_basis_dimensions() {
    let op = build_semidiscrete(&fixed_fixed_string(&unit(), 0.0, 1.0).unwrap(), 8).unwrap();
    assert_eq!(op.constraint_basis().shape(), (18, 16));
    let op = build_semidiscrete(&two_string_network(&unit(), &unit(), 0.0, 1.0, 1.0).unwrap(), 64).unwrap();
    assert_eq!(op.dim(), 260);
    assert_eq!(op.constraint_basis().ncols(), 256);
}

#[test]
fn boundary_kernel_dimensions() {
    let ff = boundary_subspace(&fixed_fixed_string(&unit(), 0.0, 1.0).unwrap());
    assert_eq!(ff.shape(), (4, 2));
    // only force components survive: entries for v(b) and v(a) vanish
    for c in ff.column_iter() {
        assert!(c[0].abs() < 1e-14 && c[2].abs() < 1e-14);
    }
    let two = boundary_subspace(&two_string_network(&unit(), &unit(), 0.0, 1.0, 1.0).unwrap());
    assert_eq!(two.shape(), (8, 4));
    let four = boundary_subspace(&four_string_network(&[unit(), unit(), unit(), unit()], 0.0, 1.0, 1.0, 1.0).unwrap());
    assert_eq!(four.shape(), (16, 8));
}

#[test]
fn matched_string_generator_spectrum_is_in_the_open_left_half_plane() {
    let op = build_semidiscrete(&matched(), 128).unwrap();
    let eig = op.restricted_generator().complex_eigenvalues();
    let max_re = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    assert!(max_re < 0.0, "max real part {max_re}");
}

#[test]
fn projection_is_exact_and_idempotent() {
    let sys = two_string_network(&unit(), &unit(), 0.0, 1.0, 1.0).unwrap();
    let op = build_semidiscrete(&sys, 64).unwrap();
    let raw = random_state(&op, 1);
    let p = project_initial(&op, &raw);
    assert!(op.boundary_residual(&p).norm() <= 1e-12 * p.norm());
    assert!((project_initial(&op, &p) - &p).norm() <= 1e-12 * p.norm());
    // a bump sitting on the boundary violates the constraints before projection
    let edge = from_fn(&op, |z| DVector::from_element(4, bump(z, 0.0, 0.3))).unwrap();
    assert!(op.boundary_residual(&edge).norm() <= 1e-12 * edge.norm());
}

#[test]
fn midpoint_step_of_zero_is_zero() {
    let op = build_semidiscrete(&matched(), 32).unwrap();
    let x = step_midpoint(&op, &DVector::zeros(op.dim()), 0.01).unwrap();
    assert_eq!(x.norm(), 0.0);
}

#[test]
fn fixed_fixed_step_preserves_norm() {
    let op = build_semidiscrete(&fixed_fixed_string(&unit(), 0.0, 1.0).unwrap(), 64).unwrap();
    for (seed, dt) in [(2, 0.001), (3, 0.05), (4, 0.7)] {
        let x = project_initial(&op, &random_state(&op, seed));
        let y = step_midpoint(&op, &x, dt).unwrap();
        assert!((op.energy(&y).sqrt() - op.energy(&x).sqrt()).abs() <= 1e-11 * op.energy(&x).sqrt());
    }
}

#[test]
fn matched_string_loses_energy_once_the_wave_arrives() {
    let op = build_semidiscrete(&matched(), 256).unwrap();
    let x0 = from_fn(&op, |z| DVector::from_column_slice(&pulse(z))).unwrap();
    let oracle = DAlembert::new(&unit(), 0.0, 1.0, EndCondition::Fixed, EndCondition::Damper(1.0)).unwrap();
    // support [1/4, 3/4] reaches b after (b − 3/4)/c
    let arrival = 0.25 / oracle.speed();
    let traj = simulate(&op, &x0, 0.7, 0.002).unwrap();
    let e: Vec<f64> = traj.snapshots().iter().map(|x| op.energy(x)).collect();
    for k in 1..e.len() {
        let t = traj.time(k);
        if t < arrival - 0.05 {
            assert!((e[k] - e[0]).abs() < 1e-6 * e[0], "early loss at t = {t}");
        } else if t > arrival + 0.05 {
            assert!(e[k] < e[k - 1], "no strict decrease at t = {t}");
        }
    }
}

#[test]
fn zero_initial_state_stays_zero() {
    let op = build_semidiscrete(&matched(), 32).unwrap();
    let traj = simulate(&op, &DVector::zeros(op.dim()), 1.0, 0.01).unwrap();
    assert!(traj.snapshots().iter().all(|x| x.norm() == 0.0));
}

#[test]
fn fixed_fixed_conserves_energy_to_round_off() {
    let op = build_semidiscrete(&fixed_fixed_string(&unit(), 0.0, 1.0).unwrap(), 128).unwrap();
    let x0 = sample_member(&op, 5, 0);
    let traj = simulate(&op, &x0, 10.0, 0.5 * op.grid().h()).unwrap();
    let e0 = op.energy(&x0);
    for x in traj.snapshots() {
        assert!((op.energy(x) - e0).abs() <= 1e-10 * e0);
    }
}

#[test]
fn matched_string_extinction_at_fine_grid() {
    let op = build_semidiscrete(&matched(), 512).unwrap();
    let x0 = sample_member(&op, 7, 0);
    let dt = 0.5 * op.grid().h();
    let traj = simulate(&op, &x0, 3.0, dt).unwrap();
    let k = (2.5 / dt).round() as usize;
    assert!(op.energy(&traj.snapshots()[k]) <= 1e-6 * op.energy(&x0));
}

#[test]
fn snapshots_satisfy_the_boundary_conditions() {
    for preset in [Preset::TwoString, Preset::FourString] {
        let op = build_semidiscrete(&preset.build(&PresetParams::default()).unwrap(), 64).unwrap();
        let traj = simulate(&op, &sample_member(&op, 9, 1), 2.0, 0.01).unwrap();
        for x in traj.snapshots() {
            assert!(op.boundary_residual(x).norm() <= 1e-10 * x.norm().max(1e-300));
        }
    }
}

#[test]
fn flow_is_linear() {
    let sys = two_string_network(&unit(), &unit(), 0.0, 1.0, 2.0).unwrap();
    let op = build_semidiscrete(&sys, 64).unwrap();
    let (x, y) = (sample_member(&op, 1, 0), sample_member(&op, 1, 1));
    let (alpha, beta) = (0.7, -2.3);
    let tx = simulate(&op, &x, 1.0, 0.01).unwrap();
    let ty = simulate(&op, &y, 1.0, 0.01).unwrap();
    let tz = simulate(&op, &(&x * alpha + &y * beta), 1.0, 0.01).unwrap();
    for k in 0..tz.len() {
        let combo = &tx.snapshots()[k] * alpha + &ty.snapshots()[k] * beta;
        assert!((&tz.snapshots()[k] - &combo).norm() <= 1e-9 * combo.norm());
    }
}

#[test]
fn projected_operator_is_dissipative() {
    for preset in Preset::ALL {
        let op = build_semidiscrete(&preset.build(&PresetParams::default()).unwrap(), 48).unwrap();
        for seed in 0..5 {
            let x = project_initial(&op, &random_state(&op, seed));
            let ax = op.apply_projected(&x);
            let rate = 2.0 * op.energy_product(&ax, &x);
            assert!(rate <= 1e-8 * op.energy(&x), "{preset}: {rate}");
        }
    }
}

/// Weighted L² error against the characteristics solution at `t`.
fn oracle_error(left: EndCondition, right: EndCondition, cells: usize, t: f64) -> f64 {
    let sys = single_string(&unit(), 0.0, 1.0, left, right).unwrap();
    let oracle = DAlembert::new(&unit(), 0.0, 1.0, left, right).unwrap();
    let op = build_semidiscrete(&sys, cells).unwrap();
    let x0 = from_fn(&op, |z| DVector::from_column_slice(&pulse(z))).unwrap();
    let dt = 0.5 * op.grid().h();
    let traj = simulate(&op, &x0, t, dt).unwrap();
    let x = traj.snapshots().last().unwrap();
    let exact = from_fn(&op, |z| DVector::from_column_slice(&oracle.evaluate(&pulse, z, traj.horizon()))).unwrap();
    op.energy(&(x - exact)).sqrt()
}

#[test]
fn converges_to_characteristics_solution() {
    for right in [EndCondition::Fixed, EndCondition::Free, EndCondition::Damper(3.0), EndCondition::Damper(1.0)] {
        let coarse = oracle_error(EndCondition::Fixed, right, 128, 1.5);
        let fine = oracle_error(EndCondition::Fixed, right, 256, 1.5);
        assert!(coarse / fine >= 1.8, "{right:?}: {coarse:e} -> {fine:e}");
    }
}

#[test]
fn strong_damper_reflects_a_quarter_of_the_energy() {
    let sys = single_string(&unit(), 0.0, 1.0, EndCondition::Fixed, EndCondition::Damper(3.0)).unwrap();
    let op = build_semidiscrete(&sys, 1024).unwrap();
    // right-moving pulse: x₁ + √(ρT) x₂ = 0
    let right_moving = |z: f64| {
        let b = bump(z, 0.5, 0.2);
        DVector::from_column_slice(&[b, -b])
    };
    let x0 = from_fn(&op, right_moving).unwrap();
    let traj = simulate(&op, &x0, 0.9, 0.5 * op.grid().h()).unwrap();
    let ratio = op.energy(traj.snapshots().last().unwrap()) / op.energy(&x0);
    assert!((ratio - 0.25).abs() <= 0.01 * 0.25, "ratio {ratio}");
}
