use crate::operator::DiscreteOperator;

/// Outcome of checking: if c_i > k_i and (M u − c u)_i ≤ 0 for all i, then
/// u > 0 everywhere or u ≡ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPrincipleVerdict {
    pub c_above_rowsum: bool,
    pub inequality_holds: bool,
    /// `None` when a premise fails and the statement does not apply.
    pub conclusion_holds: Option<bool>,
    /// A node with u_i ≤ 0 while u is not identically zero.
    pub counterexample: Option<usize>,
}

impl MaxPrincipleVerdict {
    pub fn applicable(&self) -> bool {
        self.c_above_rowsum && self.inequality_holds
    }
}

pub const PREMISE_TOL: f64 = 1e-12;

pub fn check_max_principle(op: &DiscreteOperator, c: &[f64], u: &[f64]) -> MaxPrincipleVerdict {
    let k = &op.rowsum().values;
    let c_above_rowsum = c.len() == k.len() && c.iter().zip(k).all(|(ci, ki)| ci > ki);
    let inequality_holds = u.len() == op.len()
        && c.len() == op.len()
        && op
            .apply_unchecked(u)
            .iter()
            .zip(c.iter().zip(u))
            .all(|(mu, (ci, ui))| mu - ci * ui <= PREMISE_TOL);
    if !(c_above_rowsum && inequality_holds) {
        return MaxPrincipleVerdict {
            c_above_rowsum,
            inequality_holds,
            conclusion_holds: None,
            counterexample: None,
        };
    }
    let identically_zero = u.iter().all(|&v| v == 0.0);
    let counterexample = if identically_zero {
        None
    } else {
        u.iter().position(|&v| !(v > 0.0))
    };
    MaxPrincipleVerdict {
        c_above_rowsum,
        inequality_holds,
        conclusion_holds: Some(counterexample.is_none()),
        counterexample,
    }
}
