use proptest::prelude::*;

use freefront::model::{InitialProfile, KernelSpec, ProblemConfig, ReactionModel};
use freefront::{phys_of_ref, ref_of_phys, xi, zeta, FrontPair, Simulation};

fn kernel(k: u8, radius: f64) -> KernelSpec {
    match k % 3 {
        0 => KernelSpec::uniform(radius).unwrap(),
        1 => KernelSpec::tent(radius).unwrap(),
        _ => KernelSpec::truncated_gaussian(radius, 0.4 * radius).unwrap(),
    }
}

fn profile(parabola: bool, amp: f64) -> InitialProfile {
    if parabola {
        InitialProfile::Parabola { amp }
    } else {
        InitialProfile::Bump { amp }
    }
}

prop_compose! {
    fn problem()(
        k in 0u8..3,
        radius in 0.3f64..3.0,
        prey in any::<bool>(),
        coef in (0.5f64..2.0, 0.5f64..2.0, 0.5f64..2.0),
        shapes in (any::<bool>(), any::<bool>()),
        amps in (0.05f64..1.0, 0.05f64..1.0),
        diff in (0.5f64..2.0, 0.5f64..2.0),
        mu in 0.1f64..3.0,
        rho in 0.1f64..3.0,
        h0 in 0.5f64..2.0,
    ) -> ProblemConfig {
        let (a, b, c) = coef;
        let reaction = if prey {
            ReactionModel::prey_predator(a, b, c)
        } else {
            ReactionModel::competition(a, b, c)
        };
        let mut cfg = ProblemConfig::new(
            kernel(k, radius),
            reaction,
            profile(shapes.0, amps.0),
            profile(shapes.1, amps.1),
        );
        cfg.d1 = diff.0;
        cfg.d2 = diff.1;
        cfg.mu = mu;
        cfg.rho = rho;
        cfg.h0 = h0;
        cfg.horizon = 0.3;
        cfg.nodes = 41;
        cfg.snapshots = 10;
        cfg
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn runs_stay_in_the_invariant_box(cfg in problem()) {
        let traj = Simulation::new(cfg).unwrap().run().unwrap();
        let b = &traj.bounds;
        let o = &traj.monitor.observables;
        for check in traj.monitor.failures() {
            prop_assert_eq!(check.name, "flux_bound", "{:?}", check);
        }
        prop_assert!(o.min_flux_right > 0.0 && o.min_flux_left > 0.0);
        for s in &traj.snapshots {
            for (&w, &z) in s.w.iter().zip(&s.z) {
                prop_assert!(w >= -1e-10 && w <= b.k1 * (1.0 + 1e-6));
                prop_assert!(z >= -1e-10 && z <= b.k2 * (1.0 + 1e-6));
            }
        }
        for p in traj.fronts.windows(2) {
            prop_assert!(p[1].h > p[0].h && p[1].g < p[0].g);
            prop_assert!(p[1].g < p[1].h);
        }
    }

    #[test]
    fn transform_round_trips(g in -5.0f64..0.0, len in 0.1f64..10.0, y in -1.0f64..=1.0) {
        let fp = FrontPair::new(g, g + len, -0.3, 0.7);
        let x = phys_of_ref(&fp, y).unwrap();
        prop_assert!(x >= fp.g && x <= fp.h);
        let back = ref_of_phys(&fp, x).unwrap();
        prop_assert!((back - y).abs() <= 1e-12 * (1.0 + (g.abs() + len) / len));
        prop_assert!((xi(&fp).unwrap() * len * len - 4.0).abs() < 1e-12);
        let ends = (zeta(&fp, -1.0).unwrap(), zeta(&fp, 1.0).unwrap());
        prop_assert!((ends.0 - 2.0 * fp.gdot / len).abs() < 1e-12);
        prop_assert!((ends.1 - 2.0 * fp.hdot / len).abs() < 1e-12);
    }
}

#[test]
fn steep_initial_data_exceeds_the_flux_ceiling_at_the_start() {
    let mut cfg = ProblemConfig::new(
        KernelSpec::tent(1.0).unwrap(),
        ReactionModel::competition(1.0, 1.0, 1.0),
        InitialProfile::Bump { amp: 0.5 },
        InitialProfile::Parabola { amp: 4.0 },
    );
    cfg.horizon = 0.1;
    let traj = Simulation::new(cfg).unwrap().run().unwrap();
    // -v_x(0, h0) = 8 while the ceiling stays near sqrt(L / 2d2)
    assert!(traj.bounds.k3 < 3.0);
    let flux = traj.monitor.check("flux_bound").unwrap();
    assert!(!flux.passed);
    assert_eq!(flux.first_violation, Some(0.0));
    assert_eq!(traj.monitor.failures().len(), 1);
}
