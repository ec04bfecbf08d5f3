//! Independent scalar oracles for the constant kernel on (0, 1), where
//! constants c solve the discrete problem exactly when c − f(c) = t.
#![allow(dead_code)]

/// Two-slope nonlinearity, written out independently of the library.
pub fn two_slope(a_neg: f64, a_pos: f64, s: f64) -> f64 {
    if s <= 0.0 {
        a_neg * s
    } else {
        a_pos * s
    }
}

/// Roots of h(c) = t on [lo, hi] by a sign scan over `cells` cells followed
/// by bisection; exact zeros at scan points are kept.
pub fn scalar_roots(h: impl Fn(f64) -> f64, t: f64, lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    let g = |c: f64| h(c) - t;
    let at = |k: usize| lo + (hi - lo) * k as f64 / cells as f64;
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|&p| (r - p).abs() > 1e-9) {
            roots.push(r);
        }
    };
    for k in 0..cells {
        let (mut a, mut b) = (at(k), at(k + 1));
        let (ga, gb) = (g(a), g(b));
        if ga == 0.0 {
            push(a, &mut roots);
            continue;
        }
        if gb == 0.0 || ga.signum() == gb.signum() {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(m) == 0.0 || m == a || m == b {
                a = m;
                b = m;
                break;
            }
            if g(m).signum() == ga.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        push(0.5 * (a + b), &mut roots);
    }
    if g(hi) == 0.0 {
        push(hi, &mut roots);
    }
    roots
}

/// Roots of c − f(c) = t for the two-slope f.
pub fn rank_one_roots(a_neg: f64, a_pos: f64, t: f64) -> Vec<f64> {
    let span = 10.0 * (1.0 + t.abs());
    scalar_roots(|c| c - two_slope(a_neg, a_pos, c), t, -span, span, 4000)
}

/// Picard iteration on constants: c ← c + (c − f(c) − t)/m.
pub fn scalar_picard(a_neg: f64, a_pos: f64, t: f64, c0: f64, m: f64, steps: usize) -> f64 {
    let mut c = c0;
    for _ in 0..steps {
        c += (c - two_slope(a_neg, a_pos, c) - t) / m;
    }
    c
}

#[test]
fn oracle_self_check() {
    assert_eq!(rank_one_roots(0.5, 2.0, 0.0), vec![0.0]);
    assert!(rank_one_roots(0.5, 2.0, 0.5).is_empty());
    let r = rank_one_roots(0.5, 2.0, -1.0);
    assert!((r[0] + 2.0).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12);
    assert!((scalar_picard(0.5, 2.0, -1.0, 0.5, 4.0, 200) - 1.0).abs() < 1e-15);
}
