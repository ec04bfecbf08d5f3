use super::{sup_norm, Bracket, ProblemInstance};
use crate::error::{Error, Result};

/// Lower bound on the offset in L₀w − A w = −‖g‖∞ − C; with C = 0 and g = 0
/// the right-hand side would vanish and w ≡ 0.
pub const C_FLOOR: f64 = 1e-6;

/// Solves (M − A I) w = −‖g‖∞ − max(C, C_FLOOR) and checks that w is a
/// strictly positive supersolution.
pub fn build_supersolution(inst: &ProblemInstance) -> Result<Vec<f64>> {
    let big_a = inst.nl.big_a();
    let sup = inst.op.rowsum().sup;
    if !(big_a > sup) {
        return Err(Error::Hypothesis {
            hypothesis: "f1",
            detail: format!("A = {big_a} must exceed the maximal row sum {sup}"),
        });
    }
    let c = inst.nl.c.max(C_FLOOR);
    let rhs = vec![-inst.g_sup() - c; inst.len()];
    let w = inst.op.shifted_solve(big_a, &rhs)?;
    if let Some(node) = w.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::SupersolutionNotPositive { node, value: w[node] });
    }
    let tol = inst.sign_tol();
    let r = inst.residual_unchecked(&w);
    if let Some(i) = r.iter().position(|&v| v > tol) {
        return Err(Error::Hypothesis {
            hypothesis: "f1",
            detail: format!(
                "supersolution residual {:e} > 0 at node {i}; f(s) >= A s - C fails for the declared C",
                r[i]
            ),
        });
    }
    Ok(w)
}

/// ‖w‖∞ for the supersolution w, the radius bounding every solution from above.
pub fn a_priori_radius(inst: &ProblemInstance) -> Result<f64> {
    Ok(sup_norm(&build_supersolution(inst)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubsolutionSource {
    /// ε·φ₁ with ε = 2^-k.
    ScaledEigenfunction { epsilon: f64 },
    Zero,
    /// c·φ₁ with c = −2^k.
    NegativeEigenfunction { c: f64 },
    WarmStart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subsolution {
    pub values: Vec<f64>,
    pub source: SubsolutionSource,
}

/// Searches the candidate ladder ε·φ₁ (ε = 1, ½, …, 2⁻⁴⁰), 0, c·φ₁
/// (c = −1, −2, …, −2⁴⁰) and finally `warm`, returning the first candidate
/// whose residual is nonnegative at every node. `None` means every
/// candidate failed, which is evidence (not proof) that no solution exists.
pub fn build_subsolution(inst: &ProblemInstance, warm: Option<&[f64]>) -> Option<Subsolution> {
    // exact sign: a tolerance here would admit candidates above the true solution
    let accepts = |z: &[f64]| inst.residual_unchecked(z).iter().all(|&r| r >= 0.0);
    let phi = &inst.eig.phi1;
    let scaled = |c: f64| phi.iter().map(|p| c * p).collect::<Vec<f64>>();

    let ladder = (0..=40)
        .map(|k| {
            let epsilon = (-(k as f64)).exp2();
            (scaled(epsilon), SubsolutionSource::ScaledEigenfunction { epsilon })
        })
        .chain(std::iter::once((vec![0.0; inst.len()], SubsolutionSource::Zero)))
        .chain((0..=40).map(|k| {
            let c = -(k as f64).exp2();
            (scaled(c), SubsolutionSource::NegativeEigenfunction { c })
        }));
    for (values, source) in ladder {
        if accepts(&values) {
            return Some(Subsolution { values, source });
        }
    }
    match warm {
        Some(w) if w.len() == inst.len() && accepts(w) => Some(Subsolution {
            values: w.to_vec(),
            source: SubsolutionSource::WarmStart,
        }),
        _ => None,
    }
}

impl Bracket {
    /// Subsolution from the ladder paired with the supersolution, validated.
    pub fn build(inst: &ProblemInstance, warm: Option<&[f64]>) -> Result<Option<Bracket>> {
        let sup = build_supersolution(inst)?;
        let Some(sub) = build_subsolution(inst, warm) else {
            return Ok(None);
        };
        let bracket = Bracket { sub: sub.values, sup };
        bracket.validate(inst)?;
        Ok(Some(bracket))
    }
}
