use std::f64::consts::PI;

use irs_stealth::{
    assemble_dual, build_p4, primal_oracle, solve_stealth, window_max_gain, AngularWindow, ArrayGeometry, Complex64,
    ComplexVector, DualVariables, SolveOptions, StealthInstance, StepSchedule, TargetRcs,
};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

const TAU_ABS: f64 = 5.585_053_606_381_855;

fn instance(n_x: usize, k: usize, lo: f64, hi: f64) -> StealthInstance {
    StealthInstance::uniform(
        ArrayGeometry::new(n_x, 1, 0.075, 0.15).unwrap(),
        TargetRcs::new(0.1, 0.15, 0.0).unwrap(),
        AngularWindow::horizontal(lo, hi).unwrap(),
        k,
        1,
    )
    .unwrap()
}

fn unit(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

#[test]
fn flagship_optimum() {
    let inst = instance(16, 20, -0.25, 0.25);
    let sol = solve_stealth(&inst, &SolveOptions::default()).unwrap();
    let eta = sol.eta_star;
    // independent interior-point reference for this instance
    assert!((eta - 7.66058).abs() < 1e-4 * eta, "eta = {eta}");
    assert!(sol.duality_gap.abs() <= 1e-6 * (1.0 + eta));
    assert!(sol.complementary_slackness <= 1e-6 * (1.0 + eta));
    assert!(sol.theta_star.amplitudes().all(|a| a <= 1.0 + 1e-8));
    assert!(sol.sample_gains.iter().all(|g| *g <= eta + 1e-8));
    let (fine, _) = window_max_gain(&sol.theta_star, inst.window(), inst.rcs(), inst.geometry(), 1000.0).unwrap();
    assert!(fine <= 1.05 * eta, "fine {fine}");
    assert!(sol.effective_samples.len() < 20);
}

#[test]
fn exact_cancellation() {
    let inst = instance(16, 1, -0.25, 0.25);
    let sol = solve_stealth(&inst, &SolveOptions::default()).unwrap();
    assert!(sol.eta_star <= 1e-9, "eta = {}", sol.eta_star);
    for z in sol.theta_star.as_vector().iter() {
        assert!((z - Complex64::new(-TAU_ABS / 16.0, 0.0)).norm() <= 1e-6);
    }
}

#[test]
fn scalar_disk_closed_form() {
    let g = ArrayGeometry::new(1, 1, 0.075, 0.15).unwrap();
    for phase in [0.0, 1.0, -2.5] {
        let rcs = TargetRcs::new(0.1, 0.15, phase).unwrap();
        let inst = StealthInstance::uniform(g, rcs, AngularWindow::horizontal(0.0, 0.0).unwrap(), 1, 1).unwrap();
        let sol = solve_stealth(&inst, &SolveOptions::default()).unwrap();
        let want = (TAU_ABS - 1.0).powi(2);
        assert!((sol.eta_star - want).abs() <= 1e-6 * want, "{} vs {want}", sol.eta_star);
        let theta = sol.theta_star.as_vector()[0];
        assert!((theta + rcs.value() / TAU_ABS).norm() <= 1e-6);
    }
}

#[test]
fn weak_duality_on_random_pairs() {
    let inst = instance(8, 9, -0.3, 0.2);
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    for _ in 0..200 {
        let theta =
            ComplexVector::from_fn(8, |_, _| Complex64::from_polar(unit(&mut rng).sqrt(), 2.0 * PI * unit(&mut rng)));
        let mut lambda: Vec<f64> = (0..9).map(|_| unit(&mut rng)).collect();
        let s: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|l| *l /= s);
        let mu = (0..8).map(|_| 0.01 + 10.0 * unit(&mut rng)).collect();
        let f = assemble_dual(&DualVariables::new(lambda, mu).unwrap(), &inst).unwrap().f;
        assert!(f <= inst.max_sample_gain(&theta) + 1e-9);
    }
}

#[test]
fn rcs_phase_rotates_the_solution() {
    let base = instance(12, 10, -0.25, 0.25);
    let a = solve_stealth(&base, &SolveOptions::default()).unwrap();
    let xi = 1.234;
    let rotated = base.with_rcs(base.rcs().with_phase(xi));
    let b = solve_stealth(&rotated, &SolveOptions::default()).unwrap();
    assert!((a.eta_star - b.eta_star).abs() <= 1e-6 * (1.0 + a.eta_star));
    let turn = Complex64::from_polar(1.0, xi);
    let diff = (a.theta_star.as_vector() * turn - b.theta_star.as_vector()).camax();
    assert!(diff <= 1e-4, "max deviation {diff}");
}

#[test]
fn bootstrap_point_is_strictly_feasible_and_lmi_bounds_dual() {
    for (n_x, k) in [(1, 1), (4, 3), (16, 20), (32, 40)] {
        let inst = instance(n_x, k, -0.25, 0.25);
        let floor = 1e-8 * (1.0 + inst.tau().norm_sqr());
        let p = build_p4(&inst, floor).unwrap();
        let x0 = p.start().unwrap().to_vec();
        assert!(p.lmi_at(&x0).eigenvalues()[0] > 0.0, "N={n_x} K={k}");
        assert!(p.lower_bounds().iter().all(|(i, lb)| x0[*i] > *lb));
    }
    let inst = instance(16, 20, -0.25, 0.25);
    let sol = solve_stealth(&inst, &SolveOptions::default()).unwrap();
    assert!(sol.stats.lmi_objective <= sol.dual_objective + 1e-9);
    assert!(sol.dual_objective <= sol.eta_star + 1e-9);
}

#[test]
fn primal_oracle_agrees() {
    let mut rng = ChaCha20Rng::seed_from_u64(31);
    for _ in 0..3 {
        let n_x = 4 + (rng.next_u64() % 13) as usize;
        let k = 5 + (rng.next_u64() % 16) as usize;
        let lo = -0.1 - 0.3 * unit(&mut rng);
        let hi = 0.1 + 0.3 * unit(&mut rng);
        let inst = instance(n_x, k, lo, hi);
        let sol = solve_stealth(&inst, &SolveOptions::default()).unwrap();
        let (_, eta) = primal_oracle(&inst, 200_000, StepSchedule::default_for(&inst)).unwrap();
        assert!(
            eta >= sol.eta_star - 1e-6 * (1.0 + sol.eta_star),
            "N={n_x} K={k} [{lo}, {hi}]: oracle {eta} below {} gap {}",
            sol.eta_star,
            sol.duality_gap
        );
        assert!((eta - sol.eta_star) <= 1e-3 * sol.eta_star.max(1e-3), "N={n_x} K={k}: {eta} vs {}", sol.eta_star);
    }
}

#[test]
fn more_elements_never_hurt() {
    let mut last = f64::INFINITY;
    for n_x in [4, 8, 16, 32] {
        let eta = solve_stealth(&instance(n_x, 20, -0.25, 0.25), &SolveOptions::default()).unwrap().eta_star;
        assert!(eta <= last * (1.0 + 1e-6), "N={n_x}: {eta} > {last}");
        last = eta;
    }
}
