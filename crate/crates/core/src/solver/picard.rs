use super::{sup_distance, sup_norm, Method, ProblemInstance, SolveReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

/// Fixed-point iteration of u ↦ (1/m)·M u + u − (1/m)·f(·, u) − (1/m)·g.
///
/// `m_const` must exceed Γ, the largest difference quotient of f on
/// [−radius, radius]. The map is only condensing, so convergence is not
/// guaranteed; divergence past 10·max(radius, ‖u0‖∞) or running out of
/// iterations are ordinary outcomes reported as errors.
pub fn picard_ft(
    inst: &ProblemInstance,
    u0: &[f64],
    m_const: f64,
    radius: f64,
    opts: PicardOptions,
) -> Result<SolveReport> {
    inst.op.check_len(u0)?;
    if !(radius > 0.0) {
        return Err(Error::Precondition(format!("radius must be > 0, got {radius}")));
    }
    let gamma = inst.nl.quotient_bounds(-radius, radius, 1000).1;
    if !(m_const > gamma) {
        return Err(Error::Precondition(format!(
            "Picard constant {m_const} must exceed Gamma = {gamma} on [-{radius}, {radius}]"
        )));
    }
    let blowup = 10.0 * radius.max(sup_norm(u0));
    let mut u = u0.to_vec();
    for iteration in 1..=opts.max_iter {
        let r = inst.residual_unchecked(&u);
        let next: Vec<f64> = u.iter().zip(&r).map(|(v, ri)| v + ri / m_const).collect();
        let step = sup_distance(&next, &u);
        u = next;
        if !(sup_norm(&u) <= blowup) {
            return Err(Error::Diverged {
                iterations: iteration,
                bound: blowup,
            });
        }
        if step < opts.tol * (1.0 + sup_norm(&u)) {
            let residual_inf = inst.residual_inf(&u)?;
            if residual_inf > inst.residual_tol() {
                return Err(Error::NoConvergence {
                    what: "Picard iteration (residual check)",
                    iterations: iteration,
                });
            }
            return Ok(SolveReport {
                solution: u,
                residual_inf,
                iterations: iteration,
                last_step: step,
                method: Method::PicardFt,
                bracket: None,
                iterates: Vec::new(),
            });
        }
    }
    Err(Error::NoConvergence {
        what: "Picard iteration",
        iterations: opts.max_iter,
    })
}
