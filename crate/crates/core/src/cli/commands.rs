use std::f64::consts::PI;

use super::config::{KernelName, ModeName, NonlinearityName, RunConfig};
use super::{CliError, Command, Common, SolveArgs};
use crate::analysis::{bracket_threshold, diagram, probe_existence, ProbeOptions, ProblemFamily};
use crate::domain::{build_grid, Domain, Grid, Interval};
use crate::error::Error;
use crate::io;
use crate::kernel::{audit_kernel, row_sums, KernelFamily, KernelSpec, TableKernel};
use crate::nonlinearity::{audit_hypotheses, HypothesisReport, Nonlinearity};
use crate::operator::{assemble_with, principal_eigenpair, AssembleOptions, DiscreteOperator, EigenPair, ForcingMode};
use crate::solver::a_priori_radius;

/// What a subcommand produced: the main output, an optional SVG, a message
/// for standard error and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub output: Option<String>,
    pub svg: Option<String>,
    pub message: Option<String>,
    pub exit: u8,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome {
            output: Some(output),
            svg: None,
            message: None,
            exit: 0,
        }
    }

    fn fail(exit: u8, message: String) -> Self {
        Outcome {
            output: None,
            svg: None,
            message: Some(message),
            exit,
        }
    }
}

/// 2 for failed hypotheses or kernel audits, 4 for a degenerate threshold
/// search, 1 otherwise.
pub fn exit_code(err: &CliError) -> u8 {
    match err {
        CliError::Run(Error::Hypothesis { .. } | Error::Asymmetric { .. } | Error::Disconnected { .. }) => 2,
        CliError::Run(Error::DegenerateFamily { .. }) => 4,
        _ => 1,
    }
}

/// Runs one subcommand. Errors become an [`Outcome`] with the matching exit code.
pub fn run(command: &Command) -> Outcome {
    let result = match command {
        Command::Eigen(c) => load(c).and_then(|cfg| eigen(&cfg)),
        Command::Solve(a) => load_with_method(a).and_then(|cfg| solve(&cfg, wants_csv(&a.common))),
        Command::Threshold(a) => load_with_method(a).and_then(|cfg| threshold(&cfg)),
        Command::Diagram(a) => {
            load_with_method(&a.solve).and_then(|cfg| diagram_cmd(&cfg, a.svg.is_some()))
        }
        Command::Check(c) => load(c).and_then(|cfg| check(&cfg)),
    };
    result.unwrap_or_else(|e| Outcome::fail(exit_code(&e), e.to_string()))
}

fn load(c: &Common) -> Result<RunConfig, CliError> {
    RunConfig::load(&c.config)
}

fn load_with_method(a: &SolveArgs) -> Result<RunConfig, CliError> {
    let mut cfg = load(&a.common)?;
    if let Some(m) = a.method {
        cfg.solver.method = m.into();
    }
    Ok(cfg)
}

fn wants_csv(c: &Common) -> bool {
    c.out
        .as_ref()
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn build_domain(cfg: &RunConfig) -> Result<Domain, CliError> {
    let lo = cfg.domain.lo.to_vec();
    let hi = cfg.domain.hi.to_vec();
    let mut n = cfg.domain.n.to_vec();
    if n.len() == 1 && lo.len() == 2 {
        n.push(n[0]);
    }
    if lo.len() != hi.len() {
        return Err(Error::InvalidDomain(format!("{} lower bounds but {} upper bounds", lo.len(), hi.len())).into());
    }
    let bounds = lo.iter().zip(&hi).map(|(&a, &b)| Interval::new(a, b)).collect();
    Ok(Domain::new(bounds, n)?)
}

fn build_kernel(cfg: &RunConfig, grid: &Grid) -> Result<KernelSpec, CliError> {
    let k = &cfg.kernel;
    let delta = k.delta.unwrap_or_else(|| grid.domain().diameter());
    let family = match k.family {
        KernelName::Constant => KernelFamily::Constant { c: k.c },
        KernelName::Gaussian => KernelFamily::Gaussian {
            amplitude: k.amplitude,
            width: k.width,
        },
        KernelName::PolyRank2 => KernelFamily::PolyRank2 { c0: k.c0, c1: k.c1 },
        KernelName::Table => {
            let rel = k
                .path
                .as_ref()
                .ok_or_else(|| Error::InvalidKernel("table kernel needs [kernel] path".into()))?;
            let path = cfg.base_dir.join(rel);
            let text = std::fs::read_to_string(&path).map_err(|source| CliError::Read { path, source })?;
            KernelFamily::Table(TableKernel::from_csv(&text)?.bind(grid)?)
        }
    };
    Ok(KernelSpec::new(family, delta)?)
}

fn build_nonlinearity(cfg: &RunConfig) -> Result<Nonlinearity, CliError> {
    let s = &cfg.nonlinearity;
    let nl = match s.family {
        NonlinearityName::PiecewiseLinear => Nonlinearity::piecewise_linear(s.a_neg, s.a_pos)?,
        NonlinearityName::SmoothAp => Nonlinearity::smooth_ap(s.a, s.big_a)?,
    };
    Ok(nl.with_offset(s.c)?)
}

fn mode(cfg: &RunConfig) -> ForcingMode {
    match cfg.forcing.mode {
        ModeName::Eigen => ForcingMode::Eigen,
        ModeName::Constant => ForcingMode::Constant,
    }
}

struct Problem {
    op: DiscreteOperator,
    eig: EigenPair,
    nl: Nonlinearity,
    g1: Vec<f64>,
    mode: ForcingMode,
}

impl Problem {
    fn family(&self) -> ProblemFamily<'_> {
        ProblemFamily::new(&self.op, &self.eig, &self.nl, self.g1.clone(), self.mode)
            .expect("g1 is built on the operator grid")
    }
}

fn build_operator(cfg: &RunConfig) -> Result<(Grid, KernelSpec, DiscreteOperator), CliError> {
    let grid = build_grid(&build_domain(cfg)?);
    let spec = build_kernel(cfg, &grid)?;
    let opts = AssembleOptions {
        max_nodes: cfg.domain.max_nodes,
        ..Default::default()
    };
    let op = match assemble_with(&grid, &spec, opts) {
        Ok(op) => op,
        Err(e @ Error::Asymmetric { .. }) => {
            let audit = audit_kernel(&grid, &spec)?;
            return Err(Error::Hypothesis {
                hypothesis: "K1",
                detail: format!("{e}; kernel audit: {}", audit.summary()),
            }
            .into());
        }
        Err(e) => return Err(e.into()),
    };
    Ok((grid, spec, op))
}

/// amplitude · ∏ cos(mode·π·(x_k − lo_k)/L_k), with its component along the
/// forcing direction removed.
fn build_g1(cfg: &RunConfig, grid: &Grid, eig: &EigenPair, mode: ForcingMode) -> Vec<f64> {
    let amp = cfg.forcing.g1_amplitude;
    if amp == 0.0 {
        return vec![0.0; grid.len()];
    }
    let k = cfg.forcing.g1_mode as f64;
    let bounds = grid.domain().bounds();
    let raw: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|p| {
            bounds
                .iter()
                .enumerate()
                .map(|(axis, iv)| (k * PI * (p[axis] - iv.lo) / iv.length()).cos())
                .product::<f64>()
                * amp
        })
        .collect();
    match mode {
        ForcingMode::Eigen => {
            let c = grid.inner(&raw, &eig.phi1);
            raw.iter().zip(&eig.phi1).map(|(g, p)| g - c * p).collect()
        }
        ForcingMode::Constant => {
            let mean = grid.integrate(&raw) / grid.domain().measure();
            raw.iter().map(|g| g - mean).collect()
        }
    }
}

fn build_problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let (grid, _, op) = build_operator(cfg)?;
    let eig = principal_eigenpair(&op)?;
    let nl = build_nonlinearity(cfg)?;
    let mode = mode(cfg);
    let g1 = build_g1(cfg, &grid, &eig, mode);
    Ok(Problem { op, eig, nl, g1, mode })
}

fn eigen(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (grid, _, op) = build_operator(cfg)?;
    let eig = principal_eigenpair(&op)?;
    Ok(Outcome::ok(io::eigen_json(&grid, &eig)))
}

fn solve(cfg: &RunConfig, csv: bool) -> Result<Outcome, CliError> {
    let p = build_problem(cfg)?;
    let t = cfg.forcing.t;
    let inst = p.family().at(t)?;
    match probe_existence(&inst, None, &cfg.probe_options())? {
        Some(rep) => Ok(Outcome::ok(if csv {
            io::solution_csv(p.op.grid(), &rep)
        } else {
            io::solution_json(t, &rep)
        })),
        None => Ok(Outcome::fail(
            3,
            format!(
                "no solution found at t = {} with method {}",
                io::num(t),
                cfg.probe_options().method.name()
            ),
        )),
    }
}

fn threshold(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = build_problem(cfg)?;
    let b = bracket_threshold(&p.family(), &cfg.threshold_options())?;
    Ok(Outcome::ok(io::threshold_json(&b)))
}

fn diagram_cmd(cfg: &RunConfig, svg: bool) -> Result<Outcome, CliError> {
    let p = build_problem(cfg)?;
    let opts: ProbeOptions = cfg.probe_options();
    let d = diagram(&p.family(), &cfg.diagram.t_values, &opts)?;
    let message = (!d.diagnostics.is_empty()).then(|| {
        d.diagnostics
            .iter()
            .map(|x| x.describe())
            .collect::<Vec<_>>()
            .join("\n")
    });
    Ok(Outcome {
        output: Some(io::diagram_csv(&d)),
        svg: svg.then(|| io::diagram_svg(&d)),
        message,
        exit: 0,
    })
}

fn failed_hypotheses(hyp: Option<&HypothesisReport>) -> String {
    let Some(h) = hyp else {
        return "; hypotheses not audited".into();
    };
    let failed: Vec<&str> = [("f1", h.f1.pass), ("f2", h.f2.pass), ("f3", h.f3.pass)]
        .into_iter()
        .filter_map(|(name, pass)| (!pass).then_some(name))
        .collect();
    if failed.is_empty() {
        String::new()
    } else {
        format!("; hypotheses failed: {}", failed.join(", "))
    }
}

fn check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = build_grid(&build_domain(cfg)?);
    let spec = build_kernel(cfg, &grid)?;
    let audit = audit_kernel(&grid, &spec)?;
    let rs = row_sums(&grid, &spec)?;
    let nl = build_nonlinearity(cfg)?;

    let hyp = if audit.symmetric && audit.connected && audit.nonnegative {
        let p = build_problem(cfg)?;
        let radius = p
            .family()
            .at(cfg.forcing.t)
            .and_then(|inst| a_priori_radius(&inst))
            .unwrap_or(1.0);
        Some(audit_hypotheses(&nl, rs.sup, p.eig.lambda1, radius, cfg.solver.sample_count)?)
    } else {
        None
    };
    let passed = audit.passed() && hyp.as_ref().is_some_and(|h| h.f1.pass && h.f2.pass && h.f3.pass);
    let out = io::check_json(&audit, (rs.inf, rs.sup), hyp.as_ref(), passed);
    if passed {
        Ok(Outcome::ok(out))
    } else {
        Ok(Outcome {
            output: Some(out),
            svg: None,
            message: Some(format!("audit failed: {}{}", audit.summary(), failed_hypotheses(hyp.as_ref()))),
            exit: 2,
        })
    }
}
