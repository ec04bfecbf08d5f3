//! Reaction terms f(x, s) and sampled certificates for the structural
//! hypotheses the solvers rely on.
//!
//! Both built-in families are independent of x; `eval` keeps the point
//! argument so x-dependent families can be added without touching callers.

use crate::domain::Point;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonlinearityFamily {
    /// f(s) = a_neg·s for s ≤ 0 and a_pos·s for s > 0.
    PiecewiseLinear { a_neg: f64, a_pos: f64 },
    /// f(s) = a·s + (A − a)·log(1 + eˢ), 0 < a < A.
    SmoothAp { a: f64, big_a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nonlinearity {
    pub family: NonlinearityFamily,
    /// Declared offset C ≥ 0 with f(s) ≥ A·s − C for s ≥ 0.
    pub c: f64,
}

impl Nonlinearity {
    pub fn piecewise_linear(a_neg: f64, a_pos: f64) -> Result<Self> {
        if !(a_neg.is_finite() && a_pos.is_finite() && a_neg > 0.0 && a_pos > 0.0) {
            return Err(Error::InvalidNonlinearity(format!(
                "slopes must be positive for a strictly increasing f, got {a_neg}, {a_pos}"
            )));
        }
        Ok(Nonlinearity {
            family: NonlinearityFamily::PiecewiseLinear { a_neg, a_pos },
            c: 0.0,
        })
    }

    pub fn smooth_ap(a: f64, big_a: f64) -> Result<Self> {
        if !(a.is_finite() && big_a.is_finite() && 0.0 < a && a < big_a) {
            return Err(Error::InvalidNonlinearity(format!(
                "smooth_ap needs 0 < a < A, got a = {a}, A = {big_a}"
            )));
        }
        Ok(Nonlinearity {
            family: NonlinearityFamily::SmoothAp { a, big_a },
            c: 0.0,
        })
    }

    pub fn with_offset(mut self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidNonlinearity(format!("C must be >= 0, got {c}")));
        }
        self.c = c;
        Ok(self)
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            NonlinearityFamily::PiecewiseLinear { .. } => "piecewise_linear",
            NonlinearityFamily::SmoothAp { .. } => "smooth_ap",
        }
    }

    /// Slope at +∞, the A of the superlinearity condition.
    pub fn big_a(&self) -> f64 {
        match self.family {
            NonlinearityFamily::PiecewiseLinear { a_pos, .. } => a_pos,
            NonlinearityFamily::SmoothAp { big_a, .. } => big_a,
        }
    }

    /// Slope at −∞.
    pub fn small_a(&self) -> f64 {
        match self.family {
            NonlinearityFamily::PiecewiseLinear { a_neg, .. } => a_neg,
            NonlinearityFamily::SmoothAp { a, .. } => a,
        }
    }

    pub fn eval(&self, _x: &Point, s: f64) -> f64 {
        self.value(s)
    }

    pub(crate) fn value(&self, s: f64) -> f64 {
        match self.family {
            NonlinearityFamily::PiecewiseLinear { a_neg, a_pos } => {
                if s <= 0.0 {
                    a_neg * s
                } else {
                    a_pos * s
                }
            }
            NonlinearityFamily::SmoothAp { a, big_a } => a * s + (big_a - a) * softplus(s),
        }
    }

    /// Difference quotient used for Jacobians: symmetric with step
    /// 1e-6·(1 + |s|), right-hand when the stencil straddles a kink.
    pub fn slope(&self, s: f64) -> f64 {
        let h = 1e-6 * (1.0 + s.abs());
        let straddles = match self.family {
            NonlinearityFamily::PiecewiseLinear { .. } => s - h <= 0.0 && 0.0 < s + h,
            NonlinearityFamily::SmoothAp { .. } => false,
        };
        if straddles {
            (self.value(s + h) - self.value(s)) / h
        } else {
            (self.value(s + h) - self.value(s - h)) / (2.0 * h)
        }
    }

    /// Min and max difference quotients over an equispaced sample of [lo, hi].
    ///
    /// Every chord quotient over [s, t] is a weighted mean of the consecutive
    /// quotients between, so the extremes over all sampled pairs are attained
    /// by neighbours.
    pub fn quotient_bounds(&self, lo: f64, hi: f64, sample_count: usize) -> (f64, f64) {
        let samples = equispaced(lo, hi, sample_count);
        let values: Vec<f64> = samples.iter().map(|&s| self.value(s)).collect();
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for k in 1..samples.len() {
            let ds = samples[k] - samples[k - 1];
            if ds < 1e-9 {
                continue;
            }
            let q = (values[k] - values[k - 1]) / ds;
            min = min.min(q);
            max = max.max(q);
        }
        (min, max)
    }
}

fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

/// `count + 1` equispaced points from `lo` to `hi`, endpoints included.
fn equispaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let count = count.max(1);
    (0..=count)
        .map(|k| {
            if k == count {
                hi
            } else {
                lo + (hi - lo) * (k as f64 / count as f64)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct F1Report {
    pub big_a: f64,
    pub c: f64,
    pub rowsum_sup: f64,
    /// min over sampled s ∈ [0, 10R] of f(s) − (A s − C).
    pub worst_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct F2Report {
    pub a: f64,
    pub lambda1: f64,
    /// |f(s)/s − a| at s = −10⁴.
    pub tail_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct F3Report {
    pub radius: f64,
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct F4Report {
    pub sigma: f64,
    pub rowsum_sup: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub f1: F1Report,
    pub f2: F2Report,
    pub f3: F3Report,
    pub f4: F4Report,
    /// Max difference quotient over [−R, R].
    pub gamma: f64,
    pub radius: f64,
    pub sample_count: usize,
}

pub const TAIL_POINT: f64 = -1e4;
pub const TAIL_TOL: f64 = 1e-3;

pub fn audit_hypotheses(
    nl: &Nonlinearity,
    rowsum_sup: f64,
    lambda1: f64,
    radius: f64,
    sample_count: usize,
) -> Result<HypothesisReport> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Precondition(format!("audit radius must be > 0, got {radius}")));
    }
    if sample_count < 1000 {
        return Err(Error::Precondition(format!(
            "at least 1000 samples required, got {sample_count}"
        )));
    }
    let big_a = nl.big_a();
    let worst_margin = equispaced(0.0, 10.0 * radius, sample_count)
        .into_iter()
        .map(|s| nl.value(s) - (big_a * s - nl.c))
        .fold(f64::INFINITY, f64::min);
    // rounding of A·s on both sides is tolerated
    let margin_tol = 1e-12 * (1.0 + 10.0 * radius * big_a);
    let f1 = F1Report {
        big_a,
        c: nl.c,
        rowsum_sup,
        worst_margin,
        pass: big_a > rowsum_sup && worst_margin >= -margin_tol,
    };

    let a = nl.small_a();
    let tail_error = (nl.value(TAIL_POINT) / TAIL_POINT - a).abs();
    let f2 = F2Report {
        a,
        lambda1,
        tail_error,
        pass: 0.0 < a && a < lambda1 && tail_error <= TAIL_TOL,
    };

    let (sigma, gamma) = nl.quotient_bounds(-radius, radius, sample_count);
    let f3 = F3Report {
        radius,
        sigma,
        pass: sigma > 0.0,
    };
    let f4 = F4Report {
        sigma,
        rowsum_sup,
        pass: sigma > rowsum_sup,
    };
    Ok(HypothesisReport {
        f1,
        f2,
        f3,
        f4,
        gamma,
        radius,
        sample_count,
    })
}

pub const C1_SAMPLES: usize = 20_000;

/// Smallest sampled C₁ ≥ 0 with f(s) ≥ A s − C₁ and f(s) ≥ (a + ε) s − C₁ on
/// [−10R, 10R]. Outside the window both families are asymptotically linear,
/// so the bounds extend to all of ℝ exactly when a + ε ≤ A.
pub fn c1_offset(nl: &Nonlinearity, lambda1: f64, epsilon: f64, radius: f64) -> Result<f64> {
    let a = nl.small_a();
    let big_a = nl.big_a();
    if !(a < lambda1) {
        return Err(Error::Hypothesis {
            hypothesis: "f2",
            detail: format!("asymptotic slope a = {a} is not below lambda1 = {lambda1}"),
        });
    }
    if !(epsilon > 0.0 && epsilon < lambda1 - a) {
        return Err(Error::Precondition(format!(
            "epsilon must lie in (0, lambda1 - a) = (0, {}), got {epsilon}",
            lambda1 - a
        )));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Precondition(format!("radius must be > 0, got {radius}")));
    }
    if a + epsilon > big_a {
        return Err(Error::Hypothesis {
            hypothesis: "C1",
            detail: format!(
                "f(s) >= (a + eps) s - C1 fails as s -> +inf since a + eps = {} > A = {big_a}",
                a + epsilon
            ),
        });
    }
    let slope = a + epsilon;
    let c1 = equispaced(-10.0 * radius, 10.0 * radius, C1_SAMPLES)
        .into_iter()
        .map(|s| {
            let f = nl.value(s);
            (big_a * s - f).max(slope * s - f)
        })
        .fold(0.0, f64::max);
    Ok(c1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_values() {
        let f = Nonlinearity::piecewise_linear(0.5, 2.0).unwrap();
        assert_eq!(f.eval(&[0.0, 0.0], -2.0), -1.0);
        assert_eq!(f.eval(&[0.0, 0.0], 0.0), 0.0);
        assert_eq!(f.eval(&[0.0, 0.0], 3.0), 6.0);
    }

    #[test]
    fn smooth_tail_slope() {
        let f = Nonlinearity::smooth_ap(0.5, 2.0).unwrap();
        assert!((f.value(-1e4) / -1e4 - 0.5).abs() < 1e-3);
        assert!((f.value(1e4) / 1e4 - 2.0).abs() < 1e-3);
        assert!(f.value(800.0).is_finite());
    }

    #[test]
    fn rejects_non_increasing() {
        assert!(Nonlinearity::piecewise_linear(0.0, 2.0).is_err());
        assert!(Nonlinearity::smooth_ap(2.0, 0.5).is_err());
        assert!(Nonlinearity::piecewise_linear(1.0, 2.0).unwrap().with_offset(-1.0).is_err());
    }

    #[test]
    fn audit_two_slope_function() {
        let f = Nonlinearity::piecewise_linear(0.5, 2.0).unwrap();
        let r = audit_hypotheses(&f, 1.0, 1.0, 1.0, 1000).unwrap();
        assert!(r.f1.pass && r.f2.pass && r.f3.pass);
        assert!(!r.f4.pass);
        assert!((r.f3.sigma - 0.5).abs() < 1e-12);
        assert!((r.gamma - 2.0).abs() < 1e-12);
        assert!(r.f3.sigma <= r.gamma);
    }

    #[test]
    fn audit_f4_and_f2_flags() {
        let f = Nonlinearity::piecewise_linear(1.5, 2.0).unwrap();
        let r = audit_hypotheses(&f, 1.0, 1.0, 3.0, 1000).unwrap();
        assert!(r.f4.pass);
        assert!((r.f3.sigma - 1.5).abs() < 1e-12);

        let f = Nonlinearity::piecewise_linear(0.5, 2.0).unwrap();
        let r = audit_hypotheses(&f, 1.0, 0.4, 1.0, 1000).unwrap();
        assert!(!r.f2.pass);
    }

    #[test]
    fn audit_f1_needs_slope_above_sup() {
        let f = Nonlinearity::piecewise_linear(0.5, 2.0).unwrap();
        let r = audit_hypotheses(&f, 2.5, 3.0, 1.0, 1000).unwrap();
        assert!(!r.f1.pass);
    }

    #[test]
    fn audit_preconditions() {
        let f = Nonlinearity::piecewise_linear(0.5, 2.0).unwrap();
        assert!(audit_hypotheses(&f, 1.0, 1.0, 0.0, 1000).is_err());
        assert!(audit_hypotheses(&f, 1.0, 1.0, 1.0, 999).is_err());
    }

    #[test]
    fn c1_of_two_slope_function_is_zero() {
        let f = Nonlinearity::piecewise_linear(0.5, 2.0).unwrap();
        assert_eq!(c1_offset(&f, 1.0, 0.25, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn c1_smooth_is_finite_and_valid() {
        let f = Nonlinearity::smooth_ap(0.5, 2.0).unwrap();
        let c1 = c1_offset(&f, 1.0, 0.25, 2.0).unwrap();
        // f(s) ≥ A s on all of ℝ, so no offset is needed
        assert!(c1 >= 0.0 && c1.is_finite());
        // the envelope holds on a much wider window than was sampled
        for k in -4000..=4000 {
            let s = k as f64 * 0.05;
            assert!(f.value(s) >= 2.0 * s - c1 - 1e-9);
            assert!(f.value(s) >= 0.75 * s - c1 - 1e-9);
        }
    }

    #[test]
    fn c1_epsilon_precondition() {
        let f = Nonlinearity::piecewise_linear(0.5, 2.0).unwrap();
        assert!(matches!(c1_offset(&f, 1.0, 0.5, 1.0), Err(Error::Precondition(_))));
        assert!(matches!(c1_offset(&f, 1.0, 0.0, 1.0), Err(Error::Precondition(_))));
        assert!(matches!(c1_offset(&f, 0.4, 0.1, 1.0), Err(Error::Hypothesis { .. })));
    }

    #[test]
    fn slope_at_kink_is_right_hand() {
        let f = Nonlinearity::piecewise_linear(0.5, 2.0).unwrap();
        assert!((f.slope(0.0) - 2.0).abs() < 1e-9);
        assert!((f.slope(-1.0) - 0.5).abs() < 1e-9);
        assert!((f.slope(1.0) - 2.0).abs() < 1e-9);
        let g = Nonlinearity::smooth_ap(0.5, 2.0).unwrap();
        // f'(0) = a + (A − a)/2
        assert!((g.slope(0.0) - 1.25).abs() < 1e-8);
    }
}
