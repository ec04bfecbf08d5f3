//! Run configuration: `[section]` headers with `key = value` lines and `#`
//! comments (a TOML subset). Unknown sections and keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::analysis::{ProbeOptions, SolveMethod, ThresholdOptions};
use crate::solver::{MonotoneOptions, NewtonOptions, PicardOptions};

/// Key reference printed by `--help`.
pub const CONFIG_HELP: &str = "\
CONFIG FILE (`[section]` headers, `key = value`, `#` comments; unknown keys are errors)
  [domain]        lo = 0.0   hi = 1.0   n = 201   (scalars, or 2-element arrays for a box)
                  max_nodes = 4096
  [kernel]        family = \"constant\" | \"gaussian\" | \"poly_rank2\" | \"table\"   (constant)
                  c = 1.0   amplitude = 1.0   width = 0.1   c0 = 1.0   c1 = 1.0
                  path = \"table.csv\" (relative to the config file)   delta = domain diameter
  [nonlinearity]  family = \"piecewise_linear\" | \"smooth_ap\"   (piecewise_linear)
                  a_neg = 0.5   A_pos = 2.0   a = 0.5   A = 2.0   C = 0.0
  [forcing]       mode = \"eigen\" | \"constant\"   (eigen)   t = 0.0
                  g1_amplitude = 0.0   g1_mode = 1   (g1 = amplitude * prod cos(mode*pi*(x-lo)/L),
                  projected off the forcing direction)
  [solver]        method = \"auto\" | \"monotone\" | \"picard\" | \"newton\"   (auto)
                  tol = 1e-10   max_iter = 10000   beta = automatic   picard_m = 2*Gamma
                  picard_u0 = 0.0   newton_max_iter = 100   sample_count = 1000
  [threshold]     t_lo_hint = -1.0   tol_t = 1e-6   max_bisect = 100   epsilon = (lambda1 - a)/2
  [diagram]       t_values = []   (strictly ascending)

EXIT CODES
  0 success, 1 runtime error, 2 hypothesis or kernel audit failure, 3 no solution found,
  4 threshold search found no solvable t";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> PerAxis<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            PerAxis::One(v) => vec![v.clone()],
            PerAxis::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainSection {
    pub lo: PerAxis<f64>,
    pub hi: PerAxis<f64>,
    pub n: PerAxis<usize>,
    pub max_nodes: usize,
}

impl Default for DomainSection {
    fn default() -> Self {
        DomainSection {
            lo: PerAxis::One(0.0),
            hi: PerAxis::One(1.0),
            n: PerAxis::One(201),
            max_nodes: crate::operator::DEFAULT_MAX_NODES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    #[default]
    Constant,
    Gaussian,
    PolyRank2,
    Table,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    pub family: KernelName,
    pub c: f64,
    pub amplitude: f64,
    pub width: f64,
    pub c0: f64,
    pub c1: f64,
    pub path: Option<PathBuf>,
    pub delta: Option<f64>,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            family: KernelName::Constant,
            c: 1.0,
            amplitude: 1.0,
            width: 0.1,
            c0: 1.0,
            c1: 1.0,
            path: None,
            delta: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityName {
    #[default]
    PiecewiseLinear,
    SmoothAp,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonlinearitySection {
    pub family: NonlinearityName,
    pub a_neg: f64,
    #[serde(rename = "A_pos")]
    pub a_pos: f64,
    pub a: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl Default for NonlinearitySection {
    fn default() -> Self {
        NonlinearitySection {
            family: NonlinearityName::PiecewiseLinear,
            a_neg: 0.5,
            a_pos: 2.0,
            a: 0.5,
            big_a: 2.0,
            c: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Eigen,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForcingSection {
    pub mode: ModeName,
    pub t: f64,
    pub g1_amplitude: f64,
    pub g1_mode: u32,
}

impl Default for ForcingSection {
    fn default() -> Self {
        ForcingSection {
            mode: ModeName::Eigen,
            t: 0.0,
            g1_amplitude: 0.0,
            g1_mode: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[default]
    Auto,
    Monotone,
    Picard,
    Newton,
}

impl From<MethodName> for SolveMethod {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Auto => SolveMethod::Auto,
            MethodName::Monotone => SolveMethod::Monotone,
            MethodName::Picard => SolveMethod::Picard,
            MethodName::Newton => SolveMethod::Newton,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub method: MethodName,
    pub tol: f64,
    pub max_iter: usize,
    pub beta: Option<f64>,
    pub picard_m: Option<f64>,
    pub picard_u0: f64,
    pub newton_max_iter: usize,
    pub sample_count: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            method: MethodName::Auto,
            tol: 1e-10,
            max_iter: 10_000,
            beta: None,
            picard_m: None,
            picard_u0: 0.0,
            newton_max_iter: 100,
            sample_count: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdSection {
    pub t_lo_hint: f64,
    pub tol_t: f64,
    pub max_bisect: usize,
    pub epsilon: Option<f64>,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        ThresholdSection {
            t_lo_hint: -1.0,
            tol_t: 1e-6,
            max_bisect: 100,
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DiagramSection {
    pub t_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub domain: DomainSection,
    pub kernel: KernelSection,
    pub nonlinearity: NonlinearitySection,
    pub forcing: ForcingSection,
    pub solver: SolverSection,
    pub threshold: ThresholdSection,
    pub diagram: DiagramSection,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, super::CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| super::CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = RunConfig::parse(&text).map_err(|e| super::CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn probe_options(&self) -> ProbeOptions {
        let s = &self.solver;
        ProbeOptions {
            method: s.method.into(),
            monotone: MonotoneOptions {
                beta: s.beta,
                tol: s.tol,
                max_iter: s.max_iter,
                record_iterates: false,
            },
            picard: PicardOptions {
                tol: s.tol,
                max_iter: s.max_iter,
            },
            picard_m: s.picard_m,
            picard_u0: s.picard_u0,
            newton: NewtonOptions {
                tol: s.tol,
                max_iter: s.newton_max_iter,
                ..Default::default()
            },
        }
    }

    pub fn threshold_options(&self) -> ThresholdOptions {
        ThresholdOptions {
            t_lo_hint: self.threshold.t_lo_hint,
            tol_t: self.threshold.tol_t,
            max_bisect: self.threshold.max_bisect,
            epsilon: self.threshold.epsilon,
            probe: self.probe_options(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_text() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg.domain.n, PerAxis::One(201));
        assert_eq!(cfg.solver.method, MethodName::Auto);
        assert_eq!(cfg.threshold.tol_t, 1e-6);
    }

    #[test]
    fn sections_and_comments() {
        let cfg = RunConfig::parse(
            "# rank-one instance\n[domain]\nn = 11\n[kernel]\nfamily = \"poly_rank2\" # K = 1 + xy\n\
             [nonlinearity]\nA_pos = 3.0\nC = 1.0\n[diagram]\nt_values = [-1.0, 0.0]\n",
        )
        .unwrap();
        assert_eq!(cfg.domain.n.to_vec(), vec![11]);
        assert_eq!(cfg.kernel.family, KernelName::PolyRank2);
        assert_eq!(cfg.nonlinearity.a_pos, 3.0);
        assert_eq!(cfg.nonlinearity.c, 1.0);
        assert_eq!(cfg.diagram.t_values, vec![-1.0, 0.0]);
    }

    #[test]
    fn box_domain() {
        let cfg = RunConfig::parse("[domain]\nlo = [0.0, -1.0]\nhi = [1.0, 1.0]\nn = [8, 9]\n").unwrap();
        assert_eq!(cfg.domain.n.to_vec(), vec![8, 9]);
        assert_eq!(cfg.domain.lo.to_vec(), vec![0.0, -1.0]);
    }

    #[test]
    fn unknown_key_reports_location() {
        let err = RunConfig::parse("[solver]\ntol = 1e-9\nbogus = 3\n").unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
        assert!(err.contains("line 3"), "{err}");
        assert!(RunConfig::parse("[nowhere]\n").is_err());
    }
}
