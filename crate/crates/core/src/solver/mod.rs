//! Solvers for M u = f(·, u) + g on the grid, g = t·φ₁ + g₁.

mod maxprinciple;
mod monotone;
mod newton;
mod picard;
mod supersub;

pub use maxprinciple::{check_max_principle, MaxPrincipleVerdict};
pub use monotone::{default_beta, monotone_iterate, MonotoneOptions, Start};
pub use newton::{default_seeds, newton_deflated, NewtonOptions, NewtonSearch, SeedFailure};
pub use picard::{picard_ft, PicardOptions};
pub use supersub::{a_priori_radius, build_subsolution, build_supersolution, Subsolution, SubsolutionSource, C_FLOOR};

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::operator::{DiscreteOperator, EigenPair, ForcingDecomposition};

/// One-sided residual tolerance for sub/supersolution signs, scaled by 1 + ‖g‖∞.
pub const SIGN_TOL: f64 = 1e-10;
/// Residual acceptance for solutions, scaled by 1 + ‖g‖∞.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Problem (P)_t on a fixed grid: operator, eigenpair, reaction term and forcing.
#[derive(Debug, Clone)]
pub struct ProblemInstance<'a> {
    pub op: &'a DiscreteOperator,
    pub eig: &'a EigenPair,
    pub nl: &'a Nonlinearity,
    pub forcing: ForcingDecomposition,
    g_sup: f64,
}

impl<'a> ProblemInstance<'a> {
    pub fn new(
        op: &'a DiscreteOperator,
        eig: &'a EigenPair,
        nl: &'a Nonlinearity,
        forcing: ForcingDecomposition,
    ) -> Result<Self> {
        op.check_len(&eig.phi1)?;
        op.check_len(&forcing.g)?;
        op.check_len(&forcing.g1)?;
        let g_sup = sup_norm(&forcing.g);
        Ok(ProblemInstance {
            op,
            eig,
            nl,
            forcing,
            g_sup,
        })
    }

    pub fn t(&self) -> f64 {
        self.forcing.t
    }

    /// The full forcing g.
    pub fn g(&self) -> &[f64] {
        &self.forcing.g
    }

    pub fn g_sup(&self) -> f64 {
        self.g_sup
    }

    pub fn len(&self) -> usize {
        self.op.len()
    }

    pub fn is_empty(&self) -> bool {
        self.op.is_empty()
    }

    pub fn residual_tol(&self) -> f64 {
        RESIDUAL_TOL * (1.0 + self.g_sup)
    }

    pub fn sign_tol(&self) -> f64 {
        SIGN_TOL * (1.0 + self.g_sup)
    }

    /// f(x_i, u_i) nodewise.
    pub fn reaction(&self, u: &[f64]) -> Vec<f64> {
        self.op
            .grid()
            .nodes()
            .iter()
            .zip(u)
            .map(|(x, &s)| self.nl.eval(x, s))
            .collect()
    }

    /// M u − f(·, u) − g.
    pub fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.op.check_len(u)?;
        Ok(self.residual_unchecked(u))
    }

    pub(crate) fn residual_unchecked(&self, u: &[f64]) -> Vec<f64> {
        let mu = self.op.apply_unchecked(u);
        let nodes = self.op.grid().nodes();
        mu.iter()
            .zip(u)
            .zip(nodes)
            .zip(self.g())
            .map(|(((m, &s), x), g)| m - self.nl.eval(x, s) - g)
            .collect()
    }

    pub fn residual_inf(&self, u: &[f64]) -> Result<f64> {
        Ok(sup_norm(&self.residual(u)?))
    }
}

/// Sub/supersolution pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    pub sub: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Bracket {
    /// Checks ordering and the residual signs M·sub − f(sub) − g ≥ −tol and
    /// M·sup − f(sup) − g ≤ tol.
    pub fn validate(&self, inst: &ProblemInstance) -> Result<()> {
        inst.op.check_len(&self.sub)?;
        inst.op.check_len(&self.sup)?;
        if let Some(i) = self.sub.iter().zip(&self.sup).position(|(a, b)| a > b) {
            return Err(Error::Precondition(format!(
                "bracket unordered at node {i}: sub {} > super {}",
                self.sub[i], self.sup[i]
            )));
        }
        let tol = inst.sign_tol();
        let r = inst.residual_unchecked(&self.sub);
        if let Some(i) = r.iter().position(|&v| v < -tol) {
            return Err(Error::Precondition(format!(
                "not a subsolution at node {i}: residual {:e}",
                r[i]
            )));
        }
        let r = inst.residual_unchecked(&self.sup);
        if let Some(i) = r.iter().position(|&v| v > tol) {
            return Err(Error::Precondition(format!(
                "not a supersolution at node {i}: residual {:e}",
                r[i]
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    MonotoneFromSuper,
    MonotoneFromSub,
    PicardFt,
    Newton,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::MonotoneFromSuper => "monotone_from_super",
            Method::MonotoneFromSub => "monotone_from_sub",
            Method::PicardFt => "picard_ft",
            Method::Newton => "newton",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// ‖M u − f(·, u) − g‖∞.
    pub residual_inf: f64,
    pub iterations: usize,
    /// ‖u_n − u_{n−1}‖∞ at the last step.
    pub last_step: f64,
    pub method: Method,
    pub bracket: Option<Bracket>,
    /// Every iterate, when requested by the caller.
    pub iterates: Vec<Vec<f64>>,
}

pub(crate) fn sup_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
