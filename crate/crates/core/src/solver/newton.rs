//! Damped Newton with deflation of known roots.
//!
//! The deflated residual is m(u)·G(u) with m(u) = ∏ (1/‖u − u*‖∞ + 1)
//! over known roots u*. Its Newton step is the undeflated step δ rescaled by
//! τ = 1 / (1 − ∇log m · δ), by Sherman-Morrison on J̃ = mJ + G ∇mᵀ.

use nalgebra::DVector;

use super::{sup_distance, sup_norm, Method, ProblemInstance, SolveReport};
use crate::par;

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest damping factor tried, as a power of two.
    pub min_damping_exponent: i32,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 100,
            min_damping_exponent: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedFailure {
    pub seed_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NewtonSearch {
    /// New roots, deduplicated against `known` and each other, in seed order.
    pub found: Vec<SolveReport>,
    pub failures: Vec<SeedFailure>,
    /// Seeds that converged onto a root already listed.
    pub duplicates: usize,
}

/// Constants c·1 for c ∈ {−2R, −R, −R/2, 0, R/2, R, 2R}, then each known
/// root shifted by ±(1 + ‖u*‖∞)/4.
pub fn default_seeds(n: usize, radius: f64, known: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut seeds: Vec<Vec<f64>> = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]
        .iter()
        .map(|c| vec![c * radius; n])
        .collect();
    for root in known {
        let shift = 0.25 * (1.0 + sup_norm(root));
        for sign in [1.0, -1.0] {
            seeds.push(root.iter().map(|v| v + sign * shift).collect());
        }
    }
    seeds
}

/// Two solutions count as the same root when their sup distance is at most this.
pub fn same_root(a: &[f64], b: &[f64]) -> bool {
    sup_distance(a, b) <= 1e-4 * (1.0 + sup_norm(a).max(sup_norm(b)))
}

/// Runs deflated Newton from every seed (concurrently under the operator's
/// execution policy), each deflating the `known` roots, then merges in seed
/// order and drops duplicates.
pub fn newton_deflated(
    inst: &ProblemInstance,
    seeds: &[Vec<f64>],
    known: &[Vec<f64>],
    opts: NewtonOptions,
) -> NewtonSearch {
    let outcomes = par::map_slice(inst.op.execution(), seeds, |seed| solve_one(inst, seed, known, opts));
    let mut search = NewtonSearch::default();
    for (seed_index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(report) => {
                let seen = known
                    .iter()
                    .chain(search.found.iter().map(|r| &r.solution))
                    .any(|k| same_root(k, &report.solution));
                if seen {
                    search.duplicates += 1;
                } else {
                    search.found.push(report);
                }
            }
            Err(reason) => search.failures.push(SeedFailure { seed_index, reason }),
        }
    }
    search
}

/// ∇ log m(u) for the deflation factor, using the sup-norm subgradient
/// sign(d_k)·e_k at the first maximizing index k.
fn log_deflation_gradient(u: &[f64], known: &[Vec<f64>]) -> Option<Vec<f64>> {
    let mut grad = vec![0.0; u.len()];
    for root in known {
        let (k, dist) = u
            .iter()
            .zip(root)
            .map(|(a, b)| a - b)
            .enumerate()
            .fold((0, 0.0_f64), |(bk, bd), (i, d)| if d.abs() > bd.abs() { (i, d) } else { (bk, bd) });
        let norm = dist.abs();
        if norm == 0.0 {
            return None;
        }
        grad[k] -= dist.signum() / (norm * (1.0 + norm));
    }
    Some(grad)
}

fn deflation_factor(u: &[f64], known: &[Vec<f64>]) -> f64 {
    known
        .iter()
        .map(|root| 1.0 / sup_distance(u, root) + 1.0)
        .product()
}

fn solve_one(
    inst: &ProblemInstance,
    seed: &[f64],
    known: &[Vec<f64>],
    opts: NewtonOptions,
) -> std::result::Result<SolveReport, String> {
    if seed.len() != inst.len() {
        return Err(format!("seed length {} != {}", seed.len(), inst.len()));
    }
    let n = inst.len();
    let base = inst.op.to_dmatrix();

    let deflated_norm = |u: &[f64], g: &[f64]| deflation_factor(u, known) * sup_norm(g);

    let mut u = seed.to_vec();
    let mut g = inst.residual_unchecked(&u);
    for iteration in 1..=opts.max_iter {
        let mut jac = base.clone();
        for i in 0..n {
            jac[(i, i)] -= inst.nl.slope(u[i]);
        }
        let rhs = DVector::from_iterator(n, g.iter().map(|v| -v));
        let Some(delta) = jac.lu().solve(&rhs) else {
            return Err(format!("singular Jacobian at iteration {iteration}"));
        };
        let mut step: Vec<f64> = delta.as_slice().to_vec();
        if !known.is_empty() {
            let Some(grad) = log_deflation_gradient(&u, known) else {
                return Err("iterate landed on a known root".into());
            };
            let proj: f64 = grad.iter().zip(&step).map(|(a, b)| a * b).sum();
            let tau = 1.0 / (1.0 - proj);
            if !tau.is_finite() {
                return Err(format!("deflated step undefined at iteration {iteration}"));
            }
            step.iter_mut().for_each(|s| *s *= tau);
        }

        let scale = opts.tol * (1.0 + sup_norm(&u));
        if sup_norm(&step) < scale && sup_norm(&g) <= inst.residual_tol() {
            return Ok(report(u, g, iteration, sup_norm(&step)));
        }

        let current = deflated_norm(&u, &g);
        let mut damping = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a + damping * s).collect();
            let tg = inst.residual_unchecked(&trial);
            let tn = deflated_norm(&trial, &tg);
            if tn.is_finite() && (tn < current || tn == 0.0) {
                break Some((trial, tg));
            }
            damping *= 0.5;
            if damping < (-(opts.min_damping_exponent as f64)).exp2() {
                break None;
            }
        };
        let Some((next, next_g)) = accepted else {
            return Err(format!("no residual decrease at iteration {iteration}"));
        };
        let moved = sup_distance(&next, &u);
        u = next;
        g = next_g;
        if moved < opts.tol * (1.0 + sup_norm(&u)) {
            if sup_norm(&g) > inst.residual_tol() {
                return Err(format!("stalled with residual {:e}", sup_norm(&g)));
            }
            return Ok(report(u, g, iteration, moved));
        }
    }
    Err(format!("no convergence in {} iterations", opts.max_iter))
}

fn report(u: Vec<f64>, g: Vec<f64>, iterations: usize, last_step: f64) -> SolveReport {
    SolveReport {
        solution: u,
        residual_inf: sup_norm(&g),
        iterations,
        last_step,
        method: Method::Newton,
        bracket: None,
        iterates: Vec::new(),
    }
}
