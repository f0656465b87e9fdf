use irs_ec::channel::{KappaMode, LinkConfig, SnrDistribution};
use irs_ec::eccore::{QosExponent, Scenario};
use irs_ec::rateopt::*;
use irs_ec::Error;
use proptest::prelude::*;

fn q(a: f64) -> QosExponent {
    QosExponent::new(a).unwrap()
}

fn siso(n: usize, alpha: f64) -> NoCsiObjective {
    let cfg = LinkConfig {
        n_elems: n,
        ..LinkConfig::siso()
    };
    NoCsiObjective::from_link(&cfg, q(alpha), Scenario::SisoNoCsi, KappaMode::Variance).unwrap()
}

fn exp_obj(kappa: f64, alpha: f64) -> NoCsiObjective {
    NoCsiObjective {
        dist: SnrDistribution::exponential(kappa).unwrap(),
        scenario: Scenario::MisoNoCsi,
        alpha: q(alpha),
        bandwidth: 1.0,
        slot: 1.0,
    }
}

// Richardson-extrapolated central difference of ρ = 1 - gain.
fn fd_rho(obj: &NoCsiObjective, r: f64) -> f64 {
    let d = |h: f64| -(obj.gain(r + h) - obj.gain(r - h)) / (2.0 * h);
    let h = 1e-3 * r;
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

#[test]
fn gradient_matches_finite_differences() {
    for obj in [
        siso(16, 0.1),
        siso(100, 1.0),
        siso(100, 10.0),
        exp_obj(0.5, 0.1),
        exp_obj(65.8, 3.0),
    ] {
        let r_max = obj.rate_upper_bound().unwrap();
        for frac in [0.05, 0.2, 0.4] {
            let r = frac * r_max;
            let g = obj.gradient(r).unwrap();
            let fd = fd_rho(&obj, r);
            if g.abs() < 1e-200 {
                continue;
            }
            assert!(
                (g - fd).abs() <= 1e-7 * g.abs(),
                "{:?} r={r}: {g} vs {fd}",
                obj.dist
            );
        }
    }
}

#[test]
fn gradient_is_singular_at_zero() {
    assert!(matches!(
        siso(100, 1.0).gradient(0.0),
        Err(Error::Singularity { .. })
    ));
    assert!(matches!(
        exp_obj(1.0, 1.0).gradient(-1.0),
        Err(Error::Singularity { .. })
    ));
}

#[test]
fn descent_agrees_with_grid_oracle() {
    for n in [16, 100] {
        for a in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let obj = siso(n, a);
            let s = DescentSettings::for_objective(&obj).unwrap();
            let gd = descend(&obj, &s).unwrap();
            let grid = grid_argmax(&obj, obj.rate_upper_bound().unwrap(), 1000).unwrap();
            assert!(
                (gd.r_star - grid.r_star).abs() <= 10.0 * s.conv_tol,
                "N={n} α={a}: {} vs {}",
                gd.r_star,
                grid.r_star
            );
            assert!(gd.ec_at_r_star >= grid.ec_at_r_star * (1.0 - 1e-12));
            assert!(gd.warnings.is_empty());
        }
    }
}

#[test]
fn descent_is_robust_to_start_and_step() {
    let obj = siso(100, 0.1);
    let grid = grid_argmax(&obj, obj.rate_upper_bound().unwrap(), 1000).unwrap();
    let base = DescentSettings::for_objective(&obj).unwrap();
    for r0 in [0.1, 1.0, 5.0] {
        for step in [base.step, 0.5 * base.step] {
            let s = DescentSettings {
                r0: r0 * grid.r_star,
                step,
                ..base
            };
            let gd = descend(&obj, &s).unwrap();
            if r0 == 5.0 {
                // p0 is exactly 0 out there: no gradient to follow, so the
                // caller must be told rather than handed a silent answer
                assert!(!gd.warnings.is_empty(), "{gd:?}");
                continue;
            }
            assert!(
                (gd.r_star - grid.r_star).abs() <= 10.0 * s.conv_tol,
                "r0={r0}·r* δ={step}: {} vs {}",
                gd.r_star,
                grid.r_star
            );
        }
    }
}

#[test]
fn optimum_dominates_a_fine_rate_grid() {
    for (n, a) in [(16, 0.1), (100, 0.1), (100, 10.0)] {
        let obj = siso(n, a);
        let sol = descend(&obj, &DescentSettings::for_objective(&obj).unwrap()).unwrap();
        for i in 1..=500 {
            let r = 20.0 * i as f64 / 500.0;
            assert!(obj.ec(r) <= sol.ec_at_r_star + 1e-6, "N={n} α={a} r={r}");
        }
    }
}

#[test]
fn gradient_changes_sign_once_around_the_optimum() {
    let obj = siso(100, 0.1);
    let r_star = grid_argmax(&obj, obj.rate_upper_bound().unwrap(), 1000)
        .unwrap()
        .r_star;
    assert!(obj.gradient(0.2 * r_star).unwrap() < 0.0);
    assert!(obj.gradient(1.1 * r_star).unwrap() > 0.0);
}

#[test]
fn grid_on_vanishing_power_returns_zero_rate() {
    let cfg = LinkConfig {
        p_t: 1e-30,
        ..LinkConfig::siso()
    };
    let obj =
        NoCsiObjective::from_link(&cfg, q(1.0), Scenario::SisoNoCsi, KappaMode::Variance).unwrap();
    let sol = grid_argmax(&obj, 1.0, 100).unwrap();
    assert_eq!(sol.r_star, 0.0);
    assert!(sol.ec_at_r_star < 1e-12);
}

#[test]
fn descent_reports_non_convergence() {
    let obj = siso(100, 1.0);
    let s = DescentSettings::new(0.2, 1e-6, 1e-12, 5).unwrap();
    match descend(&obj, &s) {
        Err(Error::NonConvergence { iterations, last }) => {
            assert_eq!(iterations, 5);
            assert!(last > 0.2);
        }
        other => panic!("{other:?}"),
    }
    assert!(DescentSettings::new(1.0, 0.0, 1e-8, 10).is_err());
}

#[test]
fn descent_on_plateau_warns() {
    // N = 16 from r0 = B: p0 is ~1e-73 and the gradient underflows to zero.
    let obj = siso(16, 0.1);
    let sol = descend(&obj, &DescentSettings::paper_defaults(1.0)).unwrap();
    assert!(!sol.warnings.is_empty());
    assert!(sol.ec_at_r_star < 1e-60);
}

#[test]
fn miso_root_zeroes_the_derivative() {
    for (kappa, alpha) in [
        (65.8, 0.1),
        (65.8, 10.0),
        (0.5, 0.1),
        (0.01, 1.0),
        (2.0, 1e-4),
    ] {
        let obj = exp_obj(kappa, alpha);
        let sol = solve_rate_miso_form(&obj, MisoRateForm::Stationary).unwrap();
        let r = sol.r_star;
        // ρ'(r*) vanishes relative to the gradient scale nearby
        let scale = obj.gradient(0.5 * r).unwrap().abs();
        assert!(fd_rho(&obj, r).abs() < 1e-6 * scale, "κ={kappa} α={alpha}");
        let grid = grid_argmax(&obj, obj.rate_upper_bound().unwrap(), 1000).unwrap();
        assert!((grid.r_star - r).abs() < 1e-6 * r.max(1e-3));
    }
}

#[test]
fn closed_form_close_to_root_in_high_snr_regime() {
    let mut checked = 0;
    for kappa in [1e-4, 1e-3, 0.01, 0.1] {
        for alpha in [0.5, 1.0, 2.0, 5.0] {
            let (cf, valid) =
                miso_rate_closed_form(kappa, q(alpha), 1.0, 1.0, MisoRateForm::Stationary);
            let (root, _) =
                miso_rate_root(kappa, q(alpha), 1.0, 1.0, MisoRateForm::Stationary).unwrap();
            if valid {
                checked += 1;
                assert!(
                    (cf / root - 1.0).abs() < 0.2,
                    "κ={kappa} α={alpha}: {cf} vs {root}"
                );
            }
        }
    }
    assert!(checked >= 8);
}

#[test]
fn printed_closed_form_spot_value() {
    // [PAPER] r* ≈ 0.3638 at κ = 0.5, α = 0.1, B = T = 1 with the printed right side
    let (r, _) = miso_rate_closed_form(0.5, q(0.1), 1.0, 1.0, MisoRateForm::Printed);
    assert!((r - 0.3638).abs() < 1e-4);
}

#[test]
fn grid_rejects_bad_arguments() {
    let obj = exp_obj(1.0, 1.0);
    assert!(grid_argmax(&obj, 1.0, 2).is_err());
    assert!(grid_argmax(&obj, 0.0, 10).is_err());
    assert!(NoCsiObjective::from_link(
        &LinkConfig::siso(),
        q(1.0),
        Scenario::SisoCsi,
        KappaMode::Variance
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn miso_rate_nonincreasing_in_alpha(kappa in 1e-3f64..100.0, a in 1e-3f64..10.0, k in 1.01f64..10.0) {
        let (r1, _) = miso_rate_root(kappa, q(a), 1.0, 1.0, MisoRateForm::Stationary).unwrap();
        let (r2, _) = miso_rate_root(kappa, q(a * k), 1.0, 1.0, MisoRateForm::Stationary).unwrap();
        prop_assert!(r2 <= r1 * (1.0 + 1e-12));
        prop_assert!(r2 > 0.0);
    }

    #[test]
    fn miso_root_is_the_ec_maximizer(kappa in 1e-3f64..100.0, a in 1e-3f64..10.0, t in 0.5f64..1.5) {
        let obj = exp_obj(kappa, a);
        let sol = solve_rate_miso_form(&obj, MisoRateForm::Stationary).unwrap();
        let r = sol.r_star;
        prop_assert!(obj.ec(r * t) <= obj.ec(r) * (1.0 + 1e-12) + 1e-300);
    }
}
