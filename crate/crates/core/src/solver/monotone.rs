use super::{sup_distance, sup_norm, Bracket, Method, ProblemInstance, SolveReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    Super,
    Sub,
}

#[derive(Debug, Clone, Copy)]
pub struct MonotoneOptions {
    /// Shift β; `None` picks [`default_beta`].
    pub beta: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub record_iterates: bool,
}

impl Default for MonotoneOptions {
    fn default() -> Self {
        MonotoneOptions {
            beta: None,
            tol: 1e-10,
            max_iter: 10_000,
            record_iterates: false,
        }
    }
}

/// β = max(k_sup·(1 + 10⁻⁶) + 1, Γ·(1 + 10⁻⁶)) where Γ is the largest
/// difference quotient of f over the bracket range. The second term keeps
/// s ↦ f(s) − βs nonincreasing, which the monotonicity of the scheme needs.
pub fn default_beta(inst: &ProblemInstance, bracket: &Bracket) -> f64 {
    let base = inst.op.rowsum().sup * (1.0 + 1e-6) + 1.0;
    let lo = bracket.sub.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = bracket.sup.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lip = if hi > lo {
        inst.nl.quotient_bounds(lo, hi, 1000).1
    } else {
        inst.nl.slope(lo)
    };
    base.max(lip * (1.0 + 1e-6))
}

/// Iterates (M − βI) u_n = f(·, u_{n−1}) − β u_{n−1} + g from one end of the
/// bracket. Iterates decrease from the supersolution and increase from the
/// subsolution; each step is checked for monotonicity and bracket membership.
pub fn monotone_iterate(
    inst: &ProblemInstance,
    bracket: &Bracket,
    from: Start,
    opts: MonotoneOptions,
) -> Result<SolveReport> {
    bracket.validate(inst)?;
    let beta = opts.beta.unwrap_or_else(|| default_beta(inst, bracket));
    let solver = inst.op.factor_shifted(beta)?;

    let mut u = match from {
        Start::Super => bracket.sup.clone(),
        Start::Sub => bracket.sub.clone(),
    };
    let mut iterates = Vec::new();
    if opts.record_iterates {
        iterates.push(u.clone());
    }
    let slack = |v: f64| 1e-12 * (1.0 + v.abs());

    for iteration in 1..=opts.max_iter {
        let f = inst.reaction(&u);
        let rhs: Vec<f64> = f
            .iter()
            .zip(&u)
            .zip(inst.g())
            .map(|((fv, uv), g)| fv - beta * uv + g)
            .collect();
        let next = solver.solve(&rhs)?;

        for (node, (new, old)) in next.iter().zip(&u).enumerate() {
            let change = new - old;
            let wrong_way = match from {
                Start::Super => change > slack(*old),
                Start::Sub => change < -slack(*old),
            };
            if wrong_way {
                return Err(Error::MonotonicityViolation {
                    iteration,
                    node,
                    change,
                });
            }
            if *new < bracket.sub[node] - slack(bracket.sub[node])
                || *new > bracket.sup[node] + slack(bracket.sup[node])
            {
                return Err(Error::BracketEscape { iteration, node });
            }
        }

        let step = sup_distance(&next, &u);
        u = next;
        if opts.record_iterates {
            iterates.push(u.clone());
        }
        if step < opts.tol * (1.0 + sup_norm(&u)) {
            let residual_inf = inst.residual_inf(&u)?;
            if residual_inf > inst.residual_tol() {
                return Err(Error::NoConvergence {
                    what: "monotone iteration (residual check)",
                    iterations: iteration,
                });
            }
            return Ok(SolveReport {
                solution: u,
                residual_inf,
                iterations: iteration,
                last_step: step,
                method: match from {
                    Start::Super => Method::MonotoneFromSuper,
                    Start::Sub => Method::MonotoneFromSub,
                },
                bracket: Some(bracket.clone()),
                iterates,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "monotone iteration",
        iterations: opts.max_iter,
    })
}
