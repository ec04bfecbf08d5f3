//! Nonexistence bound, threshold bracketing in t, and the solution-count diagram.

use crate::error::{Error, Result};
use crate::nonlinearity::{c1_offset, Nonlinearity};
use crate::operator::{decompose_forcing, DiscreteOperator, EigenPair, ForcingMode};
use crate::par;
use crate::solver::{
    a_priori_radius, default_seeds, monotone_iterate, newton_deflated, picard_ft, sup_norm, Bracket,
    MonotoneOptions, NewtonOptions, PicardOptions, ProblemInstance, SolveReport, Start,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonexistenceBound {
    /// No positive solution for t above this value.
    pub m_positive: f64,
    /// No solution of any sign for t above this value.
    pub m_all: f64,
    pub c1: f64,
    pub epsilon: f64,
}

/// (λ₁ − a)/2.
pub fn default_epsilon(eig: &EigenPair, nl: &Nonlinearity) -> f64 {
    0.5 * (eig.lambda1 - nl.small_a())
}

/// Testing the equation against φ₁ gives t·⟨d, φ₁⟩ + ⟨g₁, φ₁⟩ ≤ C₁ ∫φ₁
/// for any solution, d the forcing direction. Both bounds are reported as
/// limits on t; with d = φ₁ and g₁ ⊥ φ₁ they are C·∫φ₁ and C₁·∫φ₁.
pub fn nonexistence_bound(inst: &ProblemInstance, epsilon: f64) -> Result<NonexistenceBound> {
    let grid = inst.op.grid();
    let phi = &inst.eig.phi1;
    let radius = a_priori_radius(inst)?.max(1.0);
    let c1 = c1_offset(inst.nl, inst.eig.lambda1, epsilon, radius)?;
    let mass = grid.integrate(phi);
    let dir = inst.forcing.direction(inst.eig);
    let along = grid.inner(&dir, phi);
    let across = grid.inner(&inst.forcing.g1, phi);
    let limit = |c: f64| (c * mass - across) / along;
    Ok(NonexistenceBound {
        m_positive: limit(inst.nl.c),
        m_all: limit(c1),
        c1,
        epsilon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    /// Monotone iteration when a bracket exists, deflated Newton otherwise.
    #[default]
    Auto,
    Monotone,
    Picard,
    Newton,
}

impl SolveMethod {
    pub fn name(self) -> &'static str {
        match self {
            SolveMethod::Auto => "auto",
            SolveMethod::Monotone => "monotone",
            SolveMethod::Picard => "picard",
            SolveMethod::Newton => "newton",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProbeOptions {
    pub method: SolveMethod,
    pub monotone: MonotoneOptions,
    pub picard: PicardOptions,
    /// Picard constant; `None` uses 2Γ.
    pub picard_m: Option<f64>,
    /// Constant Picard starting value.
    pub picard_u0: f64,
    pub newton: NewtonOptions,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            method: SolveMethod::Auto,
            monotone: MonotoneOptions::default(),
            picard: PicardOptions::default(),
            picard_m: None,
            picard_u0: 0.0,
            newton: NewtonOptions::default(),
        }
    }
}

fn is_miss(err: &Error) -> bool {
    matches!(err, Error::NoConvergence { .. } | Error::Diverged { .. })
}

/// Looks for one certified solution of (P)_t.
///
/// `warm` is typically a solution at another t. It joins the subsolution
/// ladder (accepted only if its residual is nonnegative, which holds when it
/// solves a problem with larger t) and the Newton seeds. `Ok(None)` means
/// every attempt failed; errors are reserved for failed hypotheses and
/// runtime faults.
pub fn probe_existence(
    inst: &ProblemInstance,
    warm: Option<&[f64]>,
    opts: &ProbeOptions,
) -> Result<Option<SolveReport>> {
    let radius = a_priori_radius(inst)?;
    let newton = || {
        let mut seeds = default_seeds(inst.len(), radius, &[]);
        if let Some(w) = warm {
            seeds.push(w.to_vec());
        }
        newton_deflated(inst, &seeds, &[], opts.newton).found.into_iter().next()
    };
    match opts.method {
        SolveMethod::Auto => {
            if let Some(bracket) = Bracket::build(inst, warm)? {
                match monotone_iterate(inst, &bracket, Start::Super, opts.monotone) {
                    Ok(rep) => return Ok(Some(rep)),
                    Err(Error::Hypothesis { hypothesis, detail }) => {
                        return Err(Error::Hypothesis { hypothesis, detail })
                    }
                    Err(_) => {}
                }
            }
            Ok(newton())
        }
        SolveMethod::Monotone => {
            let Some(bracket) = Bracket::build(inst, warm)? else {
                return Ok(None);
            };
            match monotone_iterate(inst, &bracket, Start::Super, opts.monotone) {
                Ok(rep) => Ok(Some(rep)),
                Err(e) if is_miss(&e) => Ok(None),
                Err(e) => Err(e),
            }
        }
        SolveMethod::Picard => {
            let u0 = vec![opts.picard_u0; inst.len()];
            let window = radius.max(opts.picard_u0.abs()).max(1.0);
            let m_const = match opts.picard_m {
                Some(m) => m,
                None => 2.0 * inst.nl.quotient_bounds(-window, window, 1000).1,
            };
            match picard_ft(inst, &u0, m_const, window, opts.picard) {
                Ok(rep) => Ok(Some(rep)),
                Err(e) if is_miss(&e) => Ok(None),
                Err(e) => Err(e),
            }
        }
        SolveMethod::Newton => Ok(newton()),
    }
}

/// The one-parameter family g(t) = t·d + base with d = φ₁ or 1.
#[derive(Debug, Clone)]
pub struct ProblemFamily<'a> {
    pub op: &'a DiscreteOperator,
    pub eig: &'a EigenPair,
    pub nl: &'a Nonlinearity,
    pub base: Vec<f64>,
    pub mode: ForcingMode,
}

impl<'a> ProblemFamily<'a> {
    pub fn new(
        op: &'a DiscreteOperator,
        eig: &'a EigenPair,
        nl: &'a Nonlinearity,
        base: Vec<f64>,
        mode: ForcingMode,
    ) -> Result<Self> {
        op.check_len(&base)?;
        Ok(ProblemFamily {
            op,
            eig,
            nl,
            base,
            mode,
        })
    }

    /// Family with zero base term.
    pub fn homogeneous(
        op: &'a DiscreteOperator,
        eig: &'a EigenPair,
        nl: &'a Nonlinearity,
        mode: ForcingMode,
    ) -> Self {
        ProblemFamily {
            op,
            eig,
            nl,
            base: vec![0.0; op.len()],
            mode,
        }
    }

    /// Nonexistence bound expressed in the family parameter t.
    pub fn bound(&self, epsilon: f64) -> Result<NonexistenceBound> {
        let inst = self.at(0.0)?;
        let shift = inst.t();
        let mut b = nonexistence_bound(&inst, epsilon)?;
        b.m_positive -= shift;
        b.m_all -= shift;
        Ok(b)
    }

    fn direction(&self) -> Vec<f64> {
        match self.mode {
            ForcingMode::Eigen => self.eig.phi1.clone(),
            ForcingMode::Constant => vec![1.0; self.op.len()],
        }
    }

    pub fn forcing(&self, t: f64) -> Vec<f64> {
        self.direction().iter().zip(&self.base).map(|(d, b)| t * d + b).collect()
    }

    /// (P) with g = t·d + base, decomposed so that g₁ carries no d-component.
    pub fn at(&self, t: f64) -> Result<ProblemInstance<'a>> {
        let forcing = decompose_forcing(self.op, self.eig, &self.forcing(t), self.mode)?;
        ProblemInstance::new(self.op, self.eig, self.nl, forcing)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ThresholdOptions {
    pub t_lo_hint: f64,
    pub tol_t: f64,
    pub max_bisect: usize,
    /// `None` uses [`default_epsilon`].
    pub epsilon: Option<f64>,
    pub probe: ProbeOptions,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions {
            t_lo_hint: -1.0,
            tol_t: 1e-6,
            max_bisect: 100,
            epsilon: None,
            probe: ProbeOptions::default(),
        }
    }
}

/// Downward expansions tried before declaring the family degenerate.
pub const MAX_DOUBLINGS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdBracket {
    /// Largest probed t with a certified solution.
    pub t_exist: f64,
    /// Smallest probed t where every attempt failed.
    pub t_fail: f64,
    pub width: f64,
    pub bound: NonexistenceBound,
    /// The solution certifying `t_exist`.
    pub certificate: SolveReport,
    pub bisections: usize,
}

/// Bisects for the largest solvable t of the family, in family units.
///
/// The failing end starts at m_all + 1 and is probed; the solvable end starts
/// at `t_lo_hint` and moves down by 1, 2, 4, … until a probe succeeds.
pub fn bracket_threshold(family: &ProblemFamily, opts: &ThresholdOptions) -> Result<ThresholdBracket> {
    let epsilon = opts.epsilon.unwrap_or_else(|| default_epsilon(family.eig, family.nl));
    let bound = family.bound(epsilon)?;
    let probe = |t: f64, warm: Option<&[f64]>| -> Result<Option<SolveReport>> {
        probe_existence(&family.at(t)?, warm, &opts.probe)
    };

    let mut t_fail = bound.m_all + 1.0;
    if let Some(rep) = probe(t_fail, None)? {
        return Err(Error::Precondition(format!(
            "certified solution (residual {:e}) at t = {t_fail}, above the nonexistence bound {}",
            rep.residual_inf, bound.m_all
        )));
    }

    let mut found = None;
    let mut t = opts.t_lo_hint;
    for k in 0..=MAX_DOUBLINGS {
        if k > 0 {
            t = opts.t_lo_hint - ((k - 1) as f64).exp2();
        }
        if t < t_fail {
            if let Some(rep) = probe(t, None)? {
                found = Some((t, rep));
                break;
            }
        }
    }
    let Some((mut t_exist, mut certificate)) = found else {
        return Err(Error::DegenerateFamily {
            doublings: MAX_DOUBLINGS,
        });
    };
    if t_exist >= t_fail {
        t_fail = t_exist;
    }

    let mut bisections = 0;
    while t_fail - t_exist > opts.tol_t && bisections < opts.max_bisect {
        let mid = 0.5 * (t_exist + t_fail);
        if !(mid > t_exist && mid < t_fail) {
            break;
        }
        bisections += 1;
        match probe(mid, Some(&certificate.solution))? {
            Some(rep) => {
                t_exist = mid;
                certificate = rep;
            }
            None => t_fail = mid,
        }
    }
    Ok(ThresholdBracket {
        t_exist,
        t_fail,
        width: t_fail - t_exist,
        bound,
        certificate,
        bisections,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionSummary {
    pub min: f64,
    pub max: f64,
    pub sup: f64,
}

impl SolutionSummary {
    pub fn of(u: &[f64]) -> Self {
        SolutionSummary {
            min: u.iter().copied().fold(f64::INFINITY, f64::min),
            max: u.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            sup: sup_norm(u),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramRow {
    pub t: f64,
    /// Distinct certified solutions, ordered by minimum then maximum value.
    pub solutions: Vec<SolveReport>,
}

impl DiagramRow {
    pub fn count(&self) -> usize {
        self.solutions.len()
    }

    pub fn summaries(&self) -> Vec<SolutionSummary> {
        self.solutions.iter().map(|r| SolutionSummary::of(&r.solution)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiagramDiagnostic {
    /// No solution at `missing_t` although one was found at the larger `found_t`.
    ExistenceGap { missing_t: f64, found_t: f64 },
    /// A solution was certified above the nonexistence bound.
    AboveBound { t: f64, m_all: f64 },
}

impl DiagramDiagnostic {
    pub fn describe(&self) -> String {
        match self {
            DiagramDiagnostic::ExistenceGap { missing_t, found_t } => format!(
                "existence not monotone: no solution found at t = {missing_t:.16e} but one at t = {found_t:.16e}"
            ),
            DiagramDiagnostic::AboveBound { t, m_all } => {
                format!("solution found at t = {t:.16e} above the nonexistence bound {m_all:.16e}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct APDiagram {
    pub rows: Vec<DiagramRow>,
    pub diagnostics: Vec<DiagramDiagnostic>,
    /// `None` when the bound is unavailable (for example a ≥ λ₁).
    pub bound: Option<NonexistenceBound>,
}

/// Slack on the nonexistence bound before a solution above it is flagged.
pub const BOUND_SLACK: f64 = 1e-8;

/// Solution counts over ascending `t_values`. Each row probes for one
/// solution, then runs deflated Newton against it; rows are independent and
/// computed under the operator's execution policy, returned in t order.
pub fn diagram(family: &ProblemFamily, t_values: &[f64], opts: &ProbeOptions) -> Result<APDiagram> {
    if t_values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition("t values must be strictly ascending".into()));
    }
    let rows = par::map_slice(family.op.execution(), t_values, |&t| diagram_row(family, t, opts));
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let bound = family.bound(default_epsilon(family.eig, family.nl)).ok();

    let mut diagnostics = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        if row.count() == 0 {
            if let Some(later) = rows[k + 1..].iter().find(|r| r.count() > 0) {
                diagnostics.push(DiagramDiagnostic::ExistenceGap {
                    missing_t: row.t,
                    found_t: later.t,
                });
            }
        }
    }
    if let Some(b) = bound {
        for row in &rows {
            if row.count() > 0 && row.t > b.m_all + BOUND_SLACK {
                diagnostics.push(DiagramDiagnostic::AboveBound { t: row.t, m_all: b.m_all });
            }
        }
    }
    Ok(APDiagram {
        rows,
        diagnostics,
        bound,
    })
}

fn diagram_row(family: &ProblemFamily, t: f64, opts: &ProbeOptions) -> Result<DiagramRow> {
    let inst = family.at(t)?;
    let mut solutions: Vec<SolveReport> = probe_existence(&inst, None, opts)?.into_iter().collect();
    let known: Vec<Vec<f64>> = solutions.iter().map(|r| r.solution.clone()).collect();
    let seeds = default_seeds(inst.len(), a_priori_radius(&inst)?, &known);
    solutions.extend(newton_deflated(&inst, &seeds, &known, opts.newton).found);
    solutions.sort_by(|a, b| {
        let (sa, sb) = (SolutionSummary::of(&a.solution), SolutionSummary::of(&b.solution));
        sa.min.total_cmp(&sb.min).then(sa.max.total_cmp(&sb.max))
    });
    Ok(DiagramRow { t, solutions })
}
