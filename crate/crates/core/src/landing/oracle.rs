use super::{
    fallback, objective_with, prefer, violation_rel, weighted_distance_sum, weights,
    LandingProblem, LandingSolution, SolverConfig,
};
use crate::geometry::WorldPoint2D;

/// Grid points `(i·step, j·step)` inside the disc of radius `r`.
///
/// Halving `step` yields a superset of the points: `2i·(step/2)` rounds to the
/// same value as `i·step`.
pub(crate) fn disc_grid(r: f64, step: f64) -> impl Iterator<Item = WorldPoint2D> {
    let n = (r / step + 1e-9).floor() as i64;
    (-n..=n).flat_map(move |i| {
        (-n..=n).filter_map(move |j| {
            let o = WorldPoint2D::new(i as f64 * step, j as f64 * step);
            (o.norm() <= r * (1.0 + 1e-12)).then_some(o)
        })
    })
}

/// Exhaustive search over a square grid clipped to the search disc.
///
/// Used to cross-check [`super::solve`]; shares only the objective and
/// tie-breaking rule with it.
pub fn oracle_solve(
    problem: &LandingProblem,
    grid_step: f64,
    cfg: &SolverConfig,
) -> LandingSolution {
    assert!(grid_step > 0.0, "grid_step must be positive");
    if problem.people.is_empty() {
        return LandingSolution {
            offset: WorldPoint2D::ORIGIN,
            objective: 0.0,
            feasible: true,
            fallback_used: false,
        };
    }
    let params = &problem.params;
    let rel = problem.relative_people();
    let w = weights(&rel, params.alpha, cfg.weight_floor);
    let mut best: Option<(f64, WorldPoint2D)> = None;
    for o in disc_grid(params.r_l, grid_step) {
        if violation_rel(o, &rel, params) > 0.0 {
            continue;
        }
        let f = weighted_distance_sum(o, &rel, &w);
        if best.is_none_or(|b| prefer((f, o), b, cfg.tie_rel)) {
            best = Some((f, o));
        }
    }
    match best {
        Some((_, offset)) => LandingSolution {
            offset,
            objective: objective_with(offset, problem, cfg),
            feasible: true,
            fallback_used: false,
        },
        None => fallback(problem, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landing::LandingParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn problem(people: &[(f64, f64)]) -> LandingProblem {
        LandingProblem::new(
            people
                .iter()
                .map(|&(x, y)| WorldPoint2D::new(x, y))
                .collect(),
            WorldPoint2D::ORIGIN,
            LandingParams::default(),
        )
    }

    #[test]
    fn grid_is_clipped_and_nested() {
        let coarse: Vec<_> = disc_grid(1.0, 0.1).collect();
        assert!(coarse.iter().all(|p| p.norm() <= 1.0 + 1e-12));
        assert!(coarse.contains(&WorldPoint2D::new(1.0, 0.0)));
        let fine: Vec<_> = disc_grid(1.0, 0.05).collect();
        assert!(coarse.iter().all(|p| fine.contains(p)));
    }

    #[test]
    fn oracle_examples() {
        let cfg = SolverConfig::default();
        let s = oracle_solve(&problem(&[(1.0, 0.0)]), 0.01, &cfg);
        assert_eq!(s.offset, WorldPoint2D::new(-1.0, 0.0));
        assert_eq!(s.objective, 2.0);

        let s = oracle_solve(&problem(&[(1.5, 0.0), (-1.5, 0.0)]), 0.01, &cfg);
        assert_eq!(s.offset, WorldPoint2D::new(0.0, 1.0));

        let s = oracle_solve(&problem(&[]), 0.01, &cfg);
        assert_eq!(s.offset, WorldPoint2D::ORIGIN);
    }

    fn random_problem(rng: &mut ChaCha8Rng) -> LandingProblem {
        let n = rng.random_range(1..=6);
        let people: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let r = 3.0 * rng.random::<f64>().sqrt();
                let t = rng.random_range(0.0..TAU);
                (r * t.cos(), r * t.sin())
            })
            .collect();
        let mut p = problem(&people);
        p.params.alpha = rng.random_range(0.0..2.0);
        p
    }

    #[test]
    fn dominates_random_feasible_points() {
        let cfg = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let p = random_problem(&mut rng);
            let best = oracle_solve(&p, 0.01, &cfg);
            if best.fallback_used {
                continue;
            }
            let mut checked = 0;
            while checked < 1000 {
                let r = p.params.r_l * rng.random::<f64>().sqrt();
                let t = rng.random_range(0.0..TAU);
                let o = WorldPoint2D::new(r * t.cos(), r * t.sin());
                if crate::landing::max_violation(o, &p) > 0.0 {
                    continue;
                }
                checked += 1;
                assert!(best.objective >= objective_with(o, &p, &cfg));
            }
        }
    }

    #[test]
    fn refinement_never_loses() {
        let cfg = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let p = random_problem(&mut rng);
            let coarse = oracle_solve(&p, 0.04, &cfg);
            let fine = oracle_solve(&p, 0.02, &cfg);
            if coarse.fallback_used || fine.fallback_used {
                continue;
            }
            assert!(fine.objective >= coarse.objective - cfg.tol);
        }
    }
}
