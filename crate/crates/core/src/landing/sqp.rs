//! Multi-start sequential quadratic programming for the landing problem.
//!
//! Each local run solves, at the current iterate, the quadratic model
//! `min gᵀd + ½ dᵀBd` subject to the linearized constraints, with `B` a
//! Powell-damped BFGS approximation of the Lagrangian Hessian, then line
//! searches an ℓ1 merit function. With two unknowns the QP is solved exactly
//! by enumerating active sets of size 0, 1 and 2.

use std::f64::consts::TAU;

use super::{
    boundary_witnesses, fallback, objective_with, prefer, violation_rel, weighted_distance_sum,
    weights, LandingParams, LandingProblem, LandingSolution, SolverConfig,
};
use crate::geometry::WorldPoint2D as P;

type Mat2 = [[f64; 2]; 2];

/// Linearized constraint `value + gradᵀd ≥ 0`.
#[derive(Clone, Copy)]
struct Lin {
    value: f64,
    grad: P,
}

struct Local<'a> {
    rel: &'a [P],
    w: &'a [f64],
    params: &'a LandingParams,
    cfg: &'a SolverConfig,
}

impl Local<'_> {
    /// Negated objective (we minimize).
    fn phi(&self, o: P) -> f64 {
        -weighted_distance_sum(o, self.rel, self.w)
    }

    fn grad_phi(&self, o: P) -> P {
        let mut g = P::ORIGIN;
        for (p, wi) in self.rel.iter().zip(self.w) {
            let d = o - *p;
            let n = d.norm();
            if n > 1e-12 {
                g = g - d * (wi / n);
            }
        }
        g
    }

    fn constraints(&self, o: P) -> Vec<Lin> {
        let mut out = Vec::with_capacity(self.rel.len() + 1);
        out.push(Lin {
            value: self.params.r_l * self.params.r_l - o.dot(o),
            grad: o * -2.0,
        });
        for p in self.rel {
            let d = o - *p;
            out.push(Lin {
                value: d.dot(d) - self.params.r_d * self.params.r_d,
                grad: d * 2.0,
            });
        }
        out
    }

    fn infeasibility(&self, o: P) -> f64 {
        self.constraints(o)
            .iter()
            .map(|c| (-c.value).max(0.0))
            .sum()
    }

    fn run(&self, start: P) -> P {
        let total_w: f64 = self.w.iter().sum();
        let b0 = (total_w / self.params.r_l).max(1e-6);
        let mut b: Mat2 = [[b0, 0.0], [0.0, b0]];
        let mut x = start;
        let mut mu = 0.0f64;
        let step_cap = self.params.r_l;

        for _ in 0..self.cfg.max_iter {
            let g = self.grad_phi(x);
            let cons = self.constraints(x);
            let (mut d, lambda) = match solve_qp(&b, g, &cons) {
                Some(sol) => sol,
                None => (
                    restoration_step(&cons, self.params.r_d.max(1e-3)),
                    vec![0.0; cons.len()],
                ),
            };
            let len = d.norm();
            if len > step_cap {
                d = d * (step_cap / len);
            }
            if d.norm() < 1e-13 * (1.0 + step_cap) {
                break;
            }

            let lam_max = lambda.iter().cloned().fold(0.0, f64::max);
            mu = (0.5 * (mu + lam_max)).max(lam_max) + 1e-9;
            let merit = |o: P| self.phi(o) + mu * self.infeasibility(o);
            let m0 = merit(x);
            let slope = g.dot(d) - mu * self.infeasibility(x);
            let mut t = 1.0;
            let mut next = x + d;
            while t > 1e-10 {
                next = x + d * t;
                let m = merit(next);
                let target = if slope < 0.0 {
                    m0 + 1e-4 * t * slope
                } else {
                    m0
                };
                if m <= target {
                    break;
                }
                t *= 0.5;
            }
            let s = next - x;
            if s.norm() < 1e-15 {
                break;
            }

            let grad_lagrangian = |o: P, cs: &[Lin]| {
                let mut gl = self.grad_phi(o);
                for (c, l) in cs.iter().zip(&lambda) {
                    gl = gl - c.grad * *l;
                }
                gl
            };
            let y = grad_lagrangian(next, &self.constraints(next)) - grad_lagrangian(x, &cons);
            damped_bfgs(&mut b, s, y);
            x = next;
        }
        x
    }
}

/// Exact solve of the 2-variable QP by active-set enumeration.
fn solve_qp(b: &Mat2, g: P, cons: &[Lin]) -> Option<(P, Vec<f64>)> {
    let m = cons.len();
    let q = |d: P| g.dot(d) + 0.5 * d.dot(mat_vec(b, d));
    let primal_ok = |d: P| {
        cons.iter()
            .all(|c| c.value + c.grad.dot(d) >= -1e-10 * (1.0 + c.value.abs()))
    };
    let mut best: Option<(f64, P, Vec<f64>)> = None;
    let mut consider = |d: P, lambda: Vec<f64>| {
        if !d.is_finite() || lambda.iter().any(|l| !l.is_finite() || *l < -1e-12) || !primal_ok(d) {
            return;
        }
        let val = q(d);
        if best.as_ref().is_none_or(|(bv, _, _)| val < *bv) {
            best = Some((val, d, lambda));
        }
    };

    // no active constraint
    if let Some(binv) = inverse(b) {
        consider(mat_vec(&binv, g) * -1.0, vec![0.0; m]);
    }

    // one active: [B -a; aᵀ 0][d; λ] = [-g; -c]
    for j in 0..m {
        let a = cons[j].grad;
        let Some(binv) = inverse(b) else { break };
        let binv_a = mat_vec(&binv, a);
        let binv_g = mat_vec(&binv, g);
        let denom = a.dot(binv_a);
        if denom.abs() < 1e-18 {
            continue;
        }
        // d = B⁻¹(λa − g), aᵀd = −c  ⇒  λ = (aᵀB⁻¹g − c) / aᵀB⁻¹a
        let lam = (a.dot(binv_g) - cons[j].value) / denom;
        let d = binv_a * lam - binv_g;
        let mut lambda = vec![0.0; m];
        lambda[j] = lam;
        consider(d, lambda);
    }

    // two active: d fixed by the constraints, multipliers from stationarity
    for j in 0..m {
        for k in j + 1..m {
            let (aj, ak) = (cons[j].grad, cons[k].grad);
            let a: Mat2 = [[aj.x, aj.y], [ak.x, ak.y]];
            let Some(ainv) = inverse(&a) else { continue };
            let d = mat_vec(&ainv, P::new(-cons[j].value, -cons[k].value));
            // B d + g = λ_j a_j + λ_k a_k
            let rhs = mat_vec(b, d) + g;
            let cols: Mat2 = [[aj.x, ak.x], [aj.y, ak.y]];
            let Some(cinv) = inverse(&cols) else { continue };
            let l = mat_vec(&cinv, rhs);
            let mut lambda = vec![0.0; m];
            lambda[j] = l.x;
            lambda[k] = l.y;
            consider(d, lambda);
        }
    }
    best.map(|(_, d, l)| (d, l))
}

/// Newton-like move toward satisfying every violated constraint.
fn restoration_step(cons: &[Lin], fallback_len: f64) -> P {
    let mut d = P::ORIGIN;
    for c in cons.iter().filter(|c| c.value < 0.0) {
        let n2 = c.grad.dot(c.grad);
        if n2 > 1e-18 {
            d = d + c.grad * (-c.value / n2);
        } else {
            d = d + P::new(fallback_len, 0.0);
        }
    }
    d
}

fn damped_bfgs(b: &mut Mat2, s: P, y: P) {
    let bs = mat_vec(b, s);
    let sbs = s.dot(bs);
    if sbs <= 1e-300 {
        return;
    }
    let sy = s.dot(y);
    let y = if sy < 0.2 * sbs {
        let theta = 0.8 * sbs / (sbs - sy);
        y * theta + bs * (1.0 - theta)
    } else {
        y
    };
    let sy = s.dot(y);
    if sy <= 1e-300 {
        return;
    }
    let next = [
        [
            b[0][0] + y.x * y.x / sy - bs.x * bs.x / sbs,
            b[0][1] + y.x * y.y / sy - bs.x * bs.y / sbs,
        ],
        [
            b[1][0] + y.y * y.x / sy - bs.y * bs.x / sbs,
            b[1][1] + y.y * y.y / sy - bs.y * bs.y / sbs,
        ],
    ];
    if next.iter().flatten().all(|v| v.is_finite()) && next[0][0] > 0.0 && det(&next) > 0.0 {
        *b = next;
    }
}

fn mat_vec(m: &Mat2, v: P) -> P {
    P::new(m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y)
}

fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn inverse(m: &Mat2) -> Option<Mat2> {
    let dt = det(m);
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if dt.abs() <= 1e-14 * scale * scale || !dt.is_finite() {
        return None;
    }
    Some([[m[1][1] / dt, -m[0][1] / dt], [-m[1][0] / dt, m[0][0] / dt]])
}

/// Alternating projections onto the violated constraint boundaries.
fn polish(mut o: P, rel: &[P], params: &LandingParams) -> P {
    for _ in 0..200 {
        if violation_rel(o, rel, params) <= 0.0 {
            break;
        }
        let n = o.norm();
        if n > params.r_l {
            o = o * (params.r_l / n);
        }
        for p in rel {
            let d = o - *p;
            let dn = d.norm();
            if dn < params.r_d {
                let u = if dn > 1e-15 {
                    d * (1.0 / dn)
                } else {
                    P::new(1.0, 0.0)
                };
                o = *p + u * params.r_d;
            }
        }
    }
    o
}

fn starts(rel: &[P], params: &LandingParams, n_starts: usize) -> Vec<P> {
    let ring = n_starts.saturating_sub(1);
    let mut out = vec![P::ORIGIN];
    out.extend((0..ring).map(|k| {
        let t = TAU * k as f64 / ring as f64;
        P::new(t.cos(), t.sin()) * params.r_l
    }));
    for s in &mut out {
        for p in rel {
            let d = *s - *p;
            let dn = d.norm();
            if dn < params.r_d {
                let u = if dn > 1e-15 {
                    d * (1.0 / dn)
                } else {
                    P::new(1.0, 0.0)
                };
                *s = *p + u * params.r_d;
            }
        }
    }
    out
}

/// Selects the landing offset maximizing the weighted distance objective
/// subject to the search-disc and danger-zone constraints.
pub fn solve(problem: &LandingProblem, cfg: &SolverConfig) -> LandingSolution {
    if problem.people.is_empty() {
        return LandingSolution {
            offset: P::ORIGIN,
            objective: 0.0,
            feasible: true,
            fallback_used: false,
        };
    }
    let params = &problem.params;
    let rel = problem.relative_people();
    let w = weights(&rel, params.alpha, cfg.weight_floor);
    let local = Local {
        rel: &rel,
        w: &w,
        params,
        cfg,
    };

    let witnesses: Vec<P> = boundary_witnesses(&rel, params)
        .into_iter()
        .map(|o| polish(o, &rel, params))
        .filter(|o| violation_rel(*o, &rel, params) <= cfg.tol)
        .collect();

    let mut best: Option<(f64, P)> = None;
    let mut offer = |o: P| {
        if violation_rel(o, &rel, params) > cfg.tol {
            return;
        }
        let f = weighted_distance_sum(o, &rel, &w);
        if best.is_none_or(|b| prefer((f, o), b, cfg.tie_rel)) {
            best = Some((f, o));
        }
    };

    for s in starts(&rel, params, cfg.n_starts)
        .into_iter()
        .chain(witnesses.iter().copied())
    {
        let o = polish(local.run(s), &rel, params);
        offer(o);
    }
    for &o in &witnesses {
        offer(o);
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
    use crate::landing::{max_violation, oracle_solve};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(people: &[(f64, f64)], alpha: f64) -> LandingProblem {
        LandingProblem::new(
            people.iter().map(|&(x, y)| P::new(x, y)).collect(),
            P::ORIGIN,
            LandingParams {
                alpha,
                ..LandingParams::default()
            },
        )
    }

    #[test]
    fn one_person_pushes_to_far_side() {
        let sol = solve(&problem(&[(1.0, 0.0)], 0.0), &SolverConfig::default());
        assert!(sol.feasible && !sol.fallback_used);
        assert!(
            sol.offset.distance(P::new(-1.0, 0.0)) < 1e-6,
            "{:?}",
            sol.offset
        );
        assert!((sol.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn nobody_means_land_in_place() {
        let sol = solve(&problem(&[], 0.0), &SolverConfig::default());
        assert_eq!(sol.offset, P::ORIGIN);
        assert!(sol.feasible && !sol.fallback_used);
    }

    #[test]
    fn symmetric_pair_breaks_tie_upward() {
        let sol = solve(
            &problem(&[(1.5, 0.0), (-1.5, 0.0)], 0.0),
            &SolverConfig::default(),
        );
        assert!(
            sol.offset.distance(P::new(0.0, 1.0)) < 1e-4,
            "{:?}",
            sol.offset
        );
        assert!((sol.objective - 2.0 * 3.25f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn fully_covered_disc_falls_back() {
        let mut p = problem(&[(0.0, 0.0)], 0.0);
        p.params.r_d = 1.5;
        let sol = solve(&p, &SolverConfig::default());
        assert!(sol.fallback_used && !sol.feasible);
        assert!(sol.offset.norm() <= 1.0 + 1e-9);
        assert!(
            (sol.offset.norm() - 1.0).abs() < 1e-9,
            "max-min point is on the rim"
        );
        assert!(sol.offset.polar_angle() < 1e-9, "tie broken to angle 0");
    }

    #[test]
    fn qp_unconstrained_step() {
        let b = [[2.0, 0.0], [0.0, 2.0]];
        let cons = [Lin {
            value: 10.0,
            grad: P::new(1.0, 0.0),
        }];
        let (d, l) = solve_qp(&b, P::new(-2.0, 4.0), &cons).unwrap();
        assert!((d.x - 1.0).abs() < 1e-15 && (d.y + 2.0).abs() < 1e-15);
        assert_eq!(l, vec![0.0]);
    }

    #[test]
    fn qp_active_bound() {
        // min -x + ½(x²+y²) s.t. 0.5 - x >= 0  -> x = 0.5, λ = 0.5
        let b = [[1.0, 0.0], [0.0, 1.0]];
        let cons = [Lin {
            value: 0.5,
            grad: P::new(-1.0, 0.0),
        }];
        let (d, l) = solve_qp(&b, P::new(-1.0, 0.0), &cons).unwrap();
        assert!((d.x - 0.5).abs() < 1e-12 && d.y.abs() < 1e-12);
        assert!((l[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn random_problems_satisfy_constraints_and_match_coarse_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let cfg = SolverConfig::default();
        for _ in 0..40 {
            let n = rng.random_range(1..=6);
            let people: Vec<(f64, f64)> = (0..n)
                .map(|_| {
                    let r = 3.0 * rng.random::<f64>().sqrt();
                    let t = rng.random_range(0.0..TAU);
                    (r * t.cos(), r * t.sin())
                })
                .collect();
            let p = problem(&people, rng.random_range(0.0..2.0));
            let sol = solve(&p, &cfg);
            if sol.fallback_used {
                continue;
            }
            assert!(max_violation(sol.offset, &p) <= 1e-6);
            let oracle = oracle_solve(&p, 0.05, &cfg);
            assert!(
                sol.objective >= oracle.objective * (1.0 - 1e-3),
                "{} < {}",
                sol.objective,
                oracle.objective
            );
        }
    }
}
