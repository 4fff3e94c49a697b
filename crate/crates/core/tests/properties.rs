use deltashock::audit::{check_balance, totals_particles, totals_solution, BalanceTolerances};
use deltashock::rh_ode::{integrate, ConstantTraces};
use deltashock::riemann::RiemannSolution;
use deltashock::sticky::{empirical_front, sample};
use deltashock::weak_verify::{bump_lattice, verify};
use deltashock::{DeltaFront1D, OuterState, RiemannData};
use proptest::prelude::*;

fn st(rho: f64, u: f64, h: f64) -> OuterState {
    OuterState::new(rho, u, h).unwrap()
}

fn admissible() -> impl Strategy<Value = RiemannData> {
    (0.2..5.0f64, 0.2..5.0f64, -2.0..2.0f64, 0.1..2.0f64, 0.0..2.0f64, 0.0..2.0f64).prop_map(
        |(rl, rr, ul, jump, hl, hr)| {
            RiemannData::new(st(rl, ul, hl), st(rr, ul - jump, hr), 10.0).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn integrated_front_matches_closed_form(data in admissible()) {
        let sol = RiemannSolution::new(data).unwrap();
        let t_end = (0.5 * sol.validity_window()).min(1.0);
        let front0 = DeltaFront1D::new(0.0, sol.front_speed().unwrap(), 0.0, 0.0).unwrap();
        let traj = integrate(front0, &ConstantTraces::from(&data), t_end, 1e-2).unwrap();
        let exact = sol.front(t_end).unwrap().unwrap();
        let got = traj.last().unwrap();
        let scale = 1.0 + exact.e + exact.h;
        prop_assert!((got.x - exact.x).abs() <= 1e-10 * scale);
        prop_assert!((got.e - exact.e).abs() <= 1e-10 * scale);
        prop_assert!((got.h - exact.h).abs() <= 1e-10 * scale);
    }

    #[test]
    fn closed_forms_pass_the_balance_audit(data in admissible()) {
        let sol = RiemannSolution::new(data).unwrap();
        let t_max = (0.9 * sol.validity_window()).min(2.0);
        let recs: Vec<_> = (0..=10)
            .map(|k| totals_solution(&sol.snapshot(t_max * k as f64 / 10.0).unwrap()).unwrap())
            .collect();
        let v = check_balance(&recs, BalanceTolerances::CLOSED_FORM);
        prop_assert!(v.passed, "{:?}", v.failed());
    }

    #[test]
    fn particle_runs_pass_the_balance_audit(data in admissible(), n in 50usize..400) {
        let sol = RiemannSolution::new(data).unwrap();
        let t_max = (0.9 * sol.validity_window()).min(2.0);
        let mut sys = sample(&data.profile(), n).unwrap();
        let recs: Vec<_> = (0..=10)
            .map(|k| {
                sys.run(t_max * k as f64 / 10.0);
                totals_particles(&sys)
            })
            .collect();
        let v = check_balance(&recs, BalanceTolerances::PARTICLES);
        prop_assert!(v.relations[..3].iter().all(|r| r.passed), "{:?}", v.failed());
    }
}

#[test]
fn particle_front_converges_at_first_order() {
    let data = RiemannData::new(st(4.0, 1.0, 0.0), st(1.0, 0.0, 0.0), 10.0).unwrap();
    let errs: Vec<f64> = [1_000, 10_000]
        .iter()
        .map(|&n| {
            let mut sys = sample(&data.profile(), n).unwrap();
            sys.run(1.0);
            (empirical_front(&sys, 0.0).unwrap().u - 2.0 / 3.0).abs()
        })
        .collect();
    let order = (errs[0] / errs[1]).log10();
    assert!((order - 1.0).abs() < 0.15, "{errs:?}");
}

#[test]
fn weak_residual_tracks_quadrature_tolerance() {
    let data = RiemannData::new(st(4.0, 1.0, 0.0), st(1.0, 0.0, 0.0), 10.0).unwrap();
    let sol = RiemannSolution::new(data).unwrap();
    let family = bump_lattice(|t| 2.0 * t / 3.0, 1.0, 1.0);
    let worst = |rel: f64| {
        let r = verify(&sol, &family, 1.0, rel).unwrap();
        r.max_mass.max(r.max_momentum).max(r.max_energy)
    };
    let (coarse, fine, finest) = (worst(1e-5), worst(1e-6), worst(1e-10));
    assert!(coarse / fine >= 5.0, "{coarse} {fine}");
    assert!(finest <= 1e-8, "{finest}");
}
