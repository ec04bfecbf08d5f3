//! Dispersal kernels K(x, y), their row sums k(x) = ∫ K(x, y) dy, and the
//! sampled audit of symmetry, local positivity and connectivity.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::domain::{Domain, Grid, Point};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Kernel values given only at the grid nodes, row-major `n × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableKernel {
    n: usize,
    values: Vec<f64>,
    domain: Option<Domain>,
}

impl TableKernel {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidKernel(format!(
                "table entry ({}, {}) = {} is negative or not finite",
                pos / n,
                pos % n,
                values[pos]
            )));
        }
        Ok(TableKernel {
            n,
            values,
            domain: None,
        })
    }

    /// Parses the `n_nodes,<count>` header followed by `i,j,value` triples.
    /// Missing pairs are zero. Asymmetric tables load unchanged; the audit flags them.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, header) = lines.next().ok_or(Error::TableFormat {
            line: 1,
            msg: "empty file".into(),
        })?;
        let n = match header.split(',').map(str::trim).collect::<Vec<_>>().as_slice() {
            ["n_nodes", count] => count.parse::<usize>().map_err(|e| Error::TableFormat {
                line,
                msg: format!("bad node count: {e}"),
            })?,
            _ => {
                return Err(Error::TableFormat {
                    line,
                    msg: "expected header `n_nodes,<count>`".into(),
                })
            }
        };
        let mut values = vec![0.0; n * n];
        for (line, row) in lines {
            let fields: Vec<&str> = row.split(',').map(str::trim).collect();
            let [i, j, v] = fields.as_slice() else {
                return Err(Error::TableFormat {
                    line,
                    msg: format!("expected `i,j,value`, got {} fields", fields.len()),
                });
            };
            let bad = |what: &str| Error::TableFormat {
                line,
                msg: format!("cannot parse {what}"),
            };
            let i: usize = i.parse().map_err(|_| bad("row index"))?;
            let j: usize = j.parse().map_err(|_| bad("column index"))?;
            let v: f64 = v.parse().map_err(|_| bad("value"))?;
            if i >= n || j >= n {
                return Err(Error::TableFormat {
                    line,
                    msg: format!("index ({i}, {j}) out of range for {n} nodes"),
                });
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::TableFormat {
                    line,
                    msg: format!("negative or non-finite value {v}"),
                });
            }
            values[i * n + j] = v;
        }
        TableKernel::new(n, values)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Attaches the grid whose nodes the table is indexed by.
    pub fn bind(mut self, grid: &Grid) -> Result<Self> {
        if grid.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: self.n,
            });
        }
        self.domain = Some(grid.domain().clone());
        Ok(self)
    }

    fn lookup(&self, x: &Point, y: &Point) -> Result<f64> {
        let off = || Error::OffNode { x: *x, y: *y };
        let domain = self.domain.as_ref().ok_or_else(off)?;
        let i = domain.locate(x).ok_or_else(off)?;
        let j = domain.locate(y).ok_or_else(off)?;
        Ok(self.get(i, j))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// K ≡ c.
    Constant { c: f64 },
    /// K(x, y) = amplitude · exp(−|x − y|² / (2 width²)).
    Gaussian { amplitude: f64, width: f64 },
    /// K(x, y) = c0 + c1 ⟨x, y⟩.
    PolyRank2 { c0: f64, c1: f64 },
    Table(TableKernel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Radius on which K is required to be strictly positive.
    pub delta: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidKernel(format!("delta must be > 0, got {delta}")));
        }
        match &family {
            KernelFamily::Constant { c } if !(c.is_finite() && *c >= 0.0) => {
                return Err(Error::InvalidKernel(format!("constant level must be >= 0, got {c}")))
            }
            KernelFamily::Gaussian { amplitude, width }
                if !(amplitude.is_finite() && *amplitude >= 0.0 && width.is_finite() && *width > 0.0) =>
            {
                return Err(Error::InvalidKernel(format!(
                    "gaussian needs amplitude >= 0 and width > 0, got {amplitude}, {width}"
                )))
            }
            KernelFamily::PolyRank2 { c0, c1 } if !(c0.is_finite() && c1.is_finite()) => {
                return Err(Error::InvalidKernel("poly_rank2 coefficients must be finite".into()))
            }
            _ => {}
        }
        Ok(KernelSpec { family, delta })
    }

    pub fn constant(c: f64) -> Self {
        KernelSpec::new(KernelFamily::Constant { c }, 1.0).expect("valid constant kernel")
    }

    pub fn gaussian(amplitude: f64, width: f64, delta: f64) -> Result<Self> {
        KernelSpec::new(KernelFamily::Gaussian { amplitude, width }, delta)
    }

    pub fn poly_rank2(c0: f64, c1: f64) -> Self {
        KernelSpec::new(KernelFamily::PolyRank2 { c0, c1 }, 1.0).expect("valid poly kernel")
    }

    pub fn table(table: TableKernel, delta: f64) -> Result<Self> {
        KernelSpec::new(KernelFamily::Table(table), delta)
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            KernelFamily::Constant { .. } => "constant",
            KernelFamily::Gaussian { .. } => "gaussian",
            KernelFamily::PolyRank2 { .. } => "poly_rank2",
            KernelFamily::Table(_) => "table",
        }
    }

    /// K(x, y). Table kernels answer only at the nodes of their bound grid.
    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        Ok(match &self.family {
            KernelFamily::Constant { c } => *c,
            KernelFamily::Gaussian { amplitude, width } => {
                let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
                amplitude * (-d2 / (2.0 * width * width)).exp()
            }
            KernelFamily::PolyRank2 { c0, c1 } => c0 + c1 * (x[0] * y[0] + x[1] * y[1]),
            KernelFamily::Table(t) => t.lookup(x, y)?,
        })
    }

    /// K(x_i, x_j) on grid nodes.
    pub fn eval_nodes(&self, grid: &Grid, i: usize, j: usize) -> Result<f64> {
        match &self.family {
            KernelFamily::Table(t) => {
                if t.len() != grid.len() {
                    return Err(Error::LengthMismatch {
                        expected: grid.len(),
                        got: t.len(),
                    });
                }
                Ok(t.get(i, j))
            }
            _ => self.eval(&grid.nodes()[i], &grid.nodes()[j]),
        }
    }

    fn check_against(&self, grid: &Grid) -> Result<()> {
        if let KernelFamily::Table(t) = &self.family {
            if t.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    got: t.len(),
                });
            }
        }
        Ok(())
    }

    /// Dense `n × n` matrix of K(x_i, x_j), row-major.
    pub(crate) fn node_matrix(&self, grid: &Grid, exec: Execution) -> Result<Vec<f64>> {
        self.check_against(grid)?;
        let n = grid.len();
        let mut k = vec![0.0; n * n];
        par::for_each_row(exec, &mut k, n, |i, row| {
            for (j, v) in row.iter_mut().enumerate() {
                // families other than tables cannot fail on nodes
                *v = self.eval_nodes(grid, i, j).unwrap_or(f64::NAN);
            }
        });
        Ok(k)
    }
}

/// Row sums k_i = Σ_j w_j K(x_i, x_j).
#[derive(Debug, Clone, PartialEq)]
pub struct RowSum {
    pub values: Vec<f64>,
    pub sup: f64,
    pub inf: f64,
}

impl RowSum {
    pub(crate) fn from_values(values: Vec<f64>) -> Self {
        let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let inf = values.iter().copied().fold(f64::INFINITY, f64::min);
        RowSum { values, sup, inf }
    }
}

/// Sum of `w_j * K_ij` in index order; shared with operator assembly so both agree bitwise.
pub(crate) fn weighted_row_sum(row: &[f64]) -> f64 {
    row.iter().sum()
}

pub fn row_sums(grid: &Grid, spec: &KernelSpec) -> Result<RowSum> {
    row_sums_with(grid, spec, Execution::default())
}

pub fn row_sums_with(grid: &Grid, spec: &KernelSpec, exec: Execution) -> Result<RowSum> {
    spec.check_against(grid)?;
    let n = grid.len();
    let w = grid.weights();
    let values = par::map_indices(exec, n, |i| {
        let row: Vec<f64> = (0..n)
            .map(|j| w[j] * spec.eval_nodes(grid, i, j).unwrap_or(f64::NAN))
            .collect();
        weighted_row_sum(&row)
    });
    Ok(RowSum::from_values(values))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelAudit {
    /// max |K(x_i, x_j) − K(x_j, x_i)| and the pair attaining it.
    pub symmetry_defect: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub symmetric: bool,
    /// min K over node pairs with |x_i − x_j| ≤ δ.
    pub min_within_delta: f64,
    pub min_within_delta_pair: Option<(usize, usize)>,
    pub positive_within_delta: bool,
    /// min K over all node pairs.
    pub min_value: f64,
    pub nonnegative: bool,
    pub components: usize,
    pub connected: bool,
}

impl KernelAudit {
    pub fn passed(&self) -> bool {
        self.symmetric && self.positive_within_delta && self.nonnegative && self.connected
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let flag = |ok: bool| if ok { "pass" } else { "FAIL" };
        let _ = write!(
            s,
            "symmetry {} (defect {:e}", flag(self.symmetric), self.symmetry_defect
        );
        if let (false, Some((i, j))) = (self.symmetric, self.worst_pair) {
            let _ = write!(s, " at pair ({i}, {j})");
        }
        let _ = write!(
            s,
            "); positivity within delta {} (min {:e}); nonnegativity {}; connectivity {} ({} components)",
            flag(self.positive_within_delta),
            self.min_within_delta,
            flag(self.nonnegative),
            flag(self.connected),
            self.components
        );
        s
    }
}

pub const SYMMETRY_TOL: f64 = 1e-12;

pub fn audit_kernel(grid: &Grid, spec: &KernelSpec) -> Result<KernelAudit> {
    audit_kernel_with(grid, spec, Execution::default())
}

pub fn audit_kernel_with(grid: &Grid, spec: &KernelSpec, exec: Execution) -> Result<KernelAudit> {
    let n = grid.len();
    let k = spec.node_matrix(grid, exec)?;
    let nodes = grid.nodes();
    let delta2 = spec.delta * spec.delta;

    struct RowStats {
        defect: (f64, usize),
        within: (f64, usize),
        min: f64,
    }
    let rows = par::map_indices(exec, n, |i| {
        let mut st = RowStats {
            defect: (0.0, i),
            within: (f64::INFINITY, i),
            min: f64::INFINITY,
        };
        for j in 0..n {
            let kij = k[i * n + j];
            let d = (kij - k[j * n + i]).abs();
            if d > st.defect.0 || d.is_nan() {
                st.defect = (d, j);
            }
            st.min = st.min.min(kij);
            let dist2 = (nodes[i][0] - nodes[j][0]).powi(2) + (nodes[i][1] - nodes[j][1]).powi(2);
            if dist2 <= delta2 && kij < st.within.0 {
                st.within = (kij, j);
            }
        }
        st
    });

    let mut defect = 0.0;
    let mut worst_pair = None;
    let mut min_within = f64::INFINITY;
    let mut min_pair = None;
    let mut min_value = f64::INFINITY;
    for (i, st) in rows.iter().enumerate() {
        if st.defect.0 > defect || st.defect.0.is_nan() {
            defect = st.defect.0;
            worst_pair = Some((i, st.defect.1));
        }
        if st.within.0 < min_within {
            min_within = st.within.0;
            min_pair = Some((i, st.within.1));
        }
        min_value = min_value.min(st.min);
    }

    let components = count_components(n, |i, j| k[i * n + j] > 0.0);
    Ok(KernelAudit {
        symmetry_defect: defect,
        worst_pair,
        symmetric: defect <= SYMMETRY_TOL,
        min_within_delta: min_within,
        min_within_delta_pair: min_pair,
        positive_within_delta: min_within > 0.0,
        min_value,
        nonnegative: min_value >= 0.0,
        components,
        connected: components == 1,
    })
}

/// Connected components of the graph on `0..n` with edges where `adjacent(i, j)`.
pub(crate) fn count_components(n: usize, adjacent: impl Fn(usize, usize) -> bool) -> usize {
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for (j, visited) in seen.iter_mut().enumerate() {
                if !*visited && (adjacent(i, j) || adjacent(j, i)) {
                    *visited = true;
                    queue.push_back(j);
                }
            }
        }
    }
    components
}
