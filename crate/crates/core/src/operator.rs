//! The Nyström matrix of the dispersal operator, shifted solves, the
//! principal eigenpair and the forcing decomposition g = tφ₁ + g₁.

use nalgebra::{DMatrix, DVector};

use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::kernel::{count_components, weighted_row_sum, KernelSpec, RowSum, SYMMETRY_TOL};
use crate::par::{self, Execution};

pub const DEFAULT_MAX_NODES: usize = 4096;

#[derive(Debug, Clone, Copy)]
pub struct AssembleOptions {
    pub max_nodes: usize,
    pub exec: Execution,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            max_nodes: DEFAULT_MAX_NODES,
            exec: Execution::default(),
        }
    }
}

/// Dense M with M_ij = w_j K(x_i, x_j), immutable after assembly.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: Grid,
    matrix: Vec<f64>,
    rowsum: RowSum,
    exec: Execution,
}

pub fn assemble(grid: &Grid, spec: &KernelSpec) -> Result<DiscreteOperator> {
    assemble_with(grid, spec, AssembleOptions::default())
}

pub fn assemble_with(grid: &Grid, spec: &KernelSpec, opts: AssembleOptions) -> Result<DiscreteOperator> {
    let n = grid.len();
    if n > opts.max_nodes {
        return Err(Error::TooManyNodes {
            nodes: n,
            cap: opts.max_nodes,
        });
    }
    let mut matrix = spec.node_matrix(grid, opts.exec)?;

    // symmetry and sign are preconditions; check before scaling by weights
    for i in 0..n {
        for j in (i + 1)..n {
            let defect = (matrix[i * n + j] - matrix[j * n + i]).abs();
            if !(defect <= SYMMETRY_TOL) {
                return Err(Error::Asymmetric { i, j, defect });
            }
        }
    }
    if let Some(pos) = matrix.iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidKernel(format!(
            "K(x_{}, x_{}) = {} is negative",
            pos / n,
            pos % n,
            matrix[pos]
        )));
    }

    let w = grid.weights();
    par::for_each_row(opts.exec, &mut matrix, n, |_, row| {
        for (v, wj) in row.iter_mut().zip(w) {
            *v *= wj;
        }
    });
    let sums = par::map_indices(opts.exec, n, |i| weighted_row_sum(&matrix[i * n..(i + 1) * n]));
    Ok(DiscreteOperator {
        grid: grid.clone(),
        matrix,
        rowsum: RowSum::from_values(sums),
        exec: opts.exec,
    })
}

impl DiscreteOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn rowsum(&self) -> &RowSum {
        &self.rowsum
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.len();
        &self.matrix[i * n..(i + 1) * n]
    }

    /// (M u)_i = Σ_j M_ij u_j.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        Ok(self.apply_unchecked(u))
    }

    pub(crate) fn apply_unchecked(&self, u: &[f64]) -> Vec<f64> {
        par::map_indices(self.exec, self.len(), |i| {
            self.row(i).iter().zip(u).map(|(m, v)| m * v).sum()
        })
    }

    pub(crate) fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: u.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_row_slice(n, n, &self.matrix)
    }

    /// Number of connected components of the graph with edges where M_ij > 0.
    pub fn positivity_components(&self) -> usize {
        count_components(self.len(), |i, j| self.entry(i, j) > 0.0)
    }

    /// LU factorization of M − βI for repeated solves. Requires β > max_i k_i.
    pub fn factor_shifted(&self, beta: f64) -> Result<ShiftedSolver> {
        if !(beta > self.rowsum.sup) {
            return Err(Error::ShiftTooSmall {
                beta,
                sup: self.rowsum.sup,
            });
        }
        let mut a = self.to_dmatrix();
        for i in 0..self.len() {
            a[(i, i)] -= beta;
        }
        Ok(ShiftedSolver {
            beta,
            lu: a.lu(),
        })
    }

    /// Solves (M − βI) u = rhs.
    pub fn shifted_solve(&self, beta: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        self.check_len(rhs)?;
        self.factor_shifted(beta)?.solve(rhs)
    }
}

pub struct ShiftedSolver {
    beta: f64,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl ShiftedSolver {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b = DVector::from_column_slice(rhs);
        self.lu
            .solve(&b)
            .map(|x| x.as_slice().to_vec())
            .ok_or(Error::Singular)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda1: f64,
    /// Strictly positive, Σ_i w_i φ_i² = 1.
    pub phi1: Vec<f64>,
    /// ‖M φ₁ − λ₁ φ₁‖∞.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-12,
            max_iter: 10_000,
        }
    }
}

/// Residual bound every returned eigenpair satisfies, relative to 1 + λ₁.
pub const EIGEN_RESIDUAL_BOUND: f64 = 1e-10;

pub fn principal_eigenpair(op: &DiscreteOperator) -> Result<EigenPair> {
    principal_eigenpair_with(op, EigenOptions::default())
}

/// Power iteration for the Perron root.
///
/// Runs on M in the weighted inner product ⟨u, v⟩ = Σ w_i u_i v_i, which is
/// the same iteration as on the symmetric S = W^{1/2} M W^{-1/2} with
/// v = W^{1/2} φ, so the Rayleigh quotient is that of a symmetric matrix
/// and the iterate is L²-normalized throughout.
pub fn principal_eigenpair_with(op: &DiscreteOperator, opts: EigenOptions) -> Result<EigenPair> {
    let components = op.positivity_components();
    if components != 1 {
        return Err(Error::Disconnected { components });
    }
    let grid = op.grid();
    let norm_w = |u: &[f64]| grid.inner(u, u).sqrt();

    let mut phi = vec![1.0; op.len()];
    let scale = norm_w(&phi);
    phi.iter_mut().for_each(|v| *v /= scale);

    let mut best = f64::INFINITY;
    let mut stalled = 0usize;
    for iteration in 1..=opts.max_iter {
        let y = op.apply_unchecked(&phi);
        let rho = grid.inner(&phi, &y);
        let residual = y
            .iter()
            .zip(&phi)
            .map(|(a, b)| (a - rho * b).abs())
            .fold(0.0, f64::max);
        let bound = 1.0 + rho.abs();
        if residual <= opts.tol * bound {
            return finish(grid, rho, phi, residual, iteration);
        }
        if residual < 0.999 * best {
            best = residual;
            stalled = 0;
        } else {
            stalled += 1;
            // rounding floor reached
            if stalled >= 50 && residual <= EIGEN_RESIDUAL_BOUND * bound {
                return finish(grid, rho, phi, residual, iteration);
            }
        }
        let ny = norm_w(&y);
        if !(ny > 0.0) {
            return Err(Error::NoConvergence {
                what: "power iteration",
                iterations: iteration,
            });
        }
        phi = y.into_iter().map(|v| v / ny).collect();
    }
    Err(Error::NoConvergence {
        what: "power iteration",
        iterations: opts.max_iter,
    })
}

fn finish(grid: &Grid, rho: f64, mut phi: Vec<f64>, residual: f64, iterations: usize) -> Result<EigenPair> {
    let max_abs = phi.iter().copied().fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if max_abs < 0.0 {
        phi.iter_mut().for_each(|v| *v = -*v);
    }
    if let Some(i) = phi.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Precondition(format!(
            "principal eigenvector not strictly positive at node {i} ({:e})",
            phi[i]
        )));
    }
    debug_assert!((grid.inner(&phi, &phi) - 1.0).abs() < 1e-12);
    Ok(EigenPair {
        lambda1: rho,
        phi1: phi,
        residual,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingMode {
    /// g = t φ₁ + g₁ with g₁ ⊥ φ₁.
    Eigen,
    /// g = t + g₁ with ∫ g₁ = 0.
    Constant,
}

impl ForcingMode {
    pub fn name(self) -> &'static str {
        match self {
            ForcingMode::Eigen => "eigen",
            ForcingMode::Constant => "constant",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcingDecomposition {
    pub g: Vec<f64>,
    pub t: f64,
    pub g1: Vec<f64>,
    pub mode: ForcingMode,
}

impl ForcingDecomposition {
    /// The direction t multiplies: φ₁ or the constant 1.
    pub fn direction<'a>(&self, eig: &'a EigenPair) -> std::borrow::Cow<'a, [f64]> {
        match self.mode {
            ForcingMode::Eigen => std::borrow::Cow::Borrowed(&eig.phi1),
            ForcingMode::Constant => std::borrow::Cow::Owned(vec![1.0; eig.phi1.len()]),
        }
    }

    /// t · direction + g₁.
    pub fn recompose(&self, eig: &EigenPair) -> Vec<f64> {
        let dir = self.direction(eig);
        dir.iter().zip(&self.g1).map(|(d, h)| self.t * d + h).collect()
    }
}

pub fn decompose_forcing(
    op: &DiscreteOperator,
    eig: &EigenPair,
    g: &[f64],
    mode: ForcingMode,
) -> Result<ForcingDecomposition> {
    op.check_len(g)?;
    let grid = op.grid();
    let (t, g1) = match mode {
        ForcingMode::Eigen => {
            let t = grid.inner(g, &eig.phi1);
            let g1 = g.iter().zip(&eig.phi1).map(|(v, p)| v - t * p).collect();
            (t, g1)
        }
        ForcingMode::Constant => {
            let t = grid.integrate(g) / grid.domain().measure();
            (t, g.iter().map(|v| v - t).collect())
        }
    };
    Ok(ForcingDecomposition {
        g: g.to_vec(),
        t,
        g1,
        mode,
    })
}
