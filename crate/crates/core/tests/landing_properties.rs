use std::f64::consts::TAU;

use padguard_core::geometry::WorldPoint2D;
use padguard_core::landing::{
    max_violation, oracle_solve, solve, LandingParams, LandingProblem, SolverConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_problem(rng: &mut ChaCha8Rng, camera: WorldPoint2D) -> LandingProblem {
    let n = rng.random_range(1..=6);
    let people = (0..n)
        .map(|_| {
            let r = 3.0 * rng.random::<f64>().sqrt();
            let t = rng.random_range(0.0..TAU);
            camera + WorldPoint2D::new(r * t.cos(), r * t.sin())
        })
        .collect();
    let params = LandingParams {
        alpha: [0.0, 1.0, 1.5, 2.0][rng.random_range(0..4)],
        ..LandingParams::default()
    };
    LandingProblem::new(people, camera, params)
}

#[test]
fn solver_agrees_with_fine_grid() {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = random_problem(&mut rng, WorldPoint2D::ORIGIN);
        let s = solve(&p, &cfg);
        let o = oracle_solve(&p, 0.01, &cfg);
        assert_eq!(s.fallback_used, o.fallback_used, "{p:?}");
        if s.fallback_used {
            continue;
        }
        assert!(max_violation(s.offset, &p) <= 1e-6);
        let gap = (o.objective - s.objective) / o.objective;
        worst = worst.max(gap);
        assert!(
            gap <= 1e-3,
            "solver {} oracle {} for {p:?}",
            s.objective,
            o.objective
        );
    }
    println!("worst relative shortfall vs oracle: {worst:e}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn translation_equivariant(seed in 0u64..10_000, dx in -50.0..50.0f64, dy in -50.0..50.0f64) {
        let cfg = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_problem(&mut rng, WorldPoint2D::ORIGIN);
        let shift = WorldPoint2D::new(dx, dy);
        let moved = LandingProblem::new(
            base.people.iter().map(|&p| p + shift).collect(),
            base.camera + shift,
            base.params,
        );
        let a = solve(&base, &cfg);
        let b = solve(&moved, &cfg);
        prop_assert!((a.objective - b.objective).abs() <= 1e-6 * a.objective.max(1.0));
        prop_assert!(a.landing_point(&base).distance(b.landing_point(&moved) - shift) < 1e-4);
    }

    #[test]
    fn rotation_preserves_optimal_value(seed in 0u64..10_000, th in 0.0..TAU) {
        let cfg = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_problem(&mut rng, WorldPoint2D::ORIGIN);
        let turned = LandingProblem::new(base.people.iter().map(|p| p.rotated(th)).collect(), base.camera, base.params);
        let a = solve(&base, &cfg);
        let b = solve(&turned, &cfg);
        prop_assert_eq!(a.fallback_used, b.fallback_used);
        if !a.fallback_used {
            prop_assert!((a.objective - b.objective).abs() <= 1e-6 * a.objective.max(1.0));
        }
    }

    #[test]
    fn non_fallback_solutions_are_feasible(seed in 0u64..100_000) {
        let cfg = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, WorldPoint2D::ORIGIN);
        let s = solve(&p, &cfg);
        prop_assert!(s.offset.norm() <= p.params.r_l + cfg.tol);
        if s.feasible {
            prop_assert!(max_violation(s.offset, &p) <= cfg.tol);
        }
    }
}
