//! Output formats. Every real number is written with 17 significant digits.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::analysis::{APDiagram, ThresholdBracket};
use crate::domain::Grid;
use crate::kernel::KernelAudit;
use crate::nonlinearity::HypothesisReport;
use crate::operator::EigenPair;
use crate::solver::SolveReport;

/// `x` in scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compact JSON whose floats use [`num`]; non-finite values become `null`.
struct SigFigs;

impl Formatter for SigFigs {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(num(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` as one line of JSON followed by a newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigs);
    value
        .serialize(&mut ser)
        .expect("serializing plain data into memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn node_coords(grid: &Grid) -> Vec<Vec<f64>> {
    grid.nodes().iter().map(|p| p[..grid.dim()].to_vec()).collect()
}

#[derive(Serialize)]
struct EigenJson<'a> {
    lambda1: f64,
    phi1: &'a [f64],
    residual: f64,
    iterations: usize,
    nodes: Vec<Vec<f64>>,
    weights: &'a [f64],
}

pub fn eigen_json(grid: &Grid, eig: &EigenPair) -> String {
    to_json(&EigenJson {
        lambda1: eig.lambda1,
        phi1: &eig.phi1,
        residual: eig.residual,
        iterations: eig.iterations,
        nodes: node_coords(grid),
        weights: grid.weights(),
    })
}

#[derive(Serialize)]
struct SolutionJson<'a> {
    t: f64,
    method: &'a str,
    residual_inf: f64,
    u: &'a [f64],
}

pub fn solution_json(t: f64, rep: &SolveReport) -> String {
    to_json(&SolutionJson {
        t,
        method: rep.method.name(),
        residual_inf: rep.residual_inf,
        u: &rep.solution,
    })
}

/// Columns `node_index,x(,y),u`.
pub fn solution_csv(grid: &Grid, rep: &SolveReport) -> String {
    let mut s = String::from(if grid.dim() == 1 { "node_index,x,u\n" } else { "node_index,x,y,u\n" });
    for (i, (p, u)) in grid.nodes().iter().zip(&rep.solution).enumerate() {
        let _ = write!(s, "{i},");
        for c in &p[..grid.dim()] {
            let _ = write!(s, "{},", num(*c));
        }
        let _ = writeln!(s, "{}", num(*u));
    }
    s
}

#[derive(Serialize)]
struct ThresholdJson {
    t_exist: f64,
    t_fail: f64,
    m_positive: f64,
    m_all: f64,
    certificate_residual: f64,
}

pub fn threshold_json(b: &ThresholdBracket) -> String {
    to_json(&ThresholdJson {
        t_exist: b.t_exist,
        t_fail: b.t_fail,
        m_positive: b.bound.m_positive,
        m_all: b.bound.m_all,
        certificate_residual: b.certificate.residual_inf,
    })
}

/// Header `t,count,u_min_1,u_max_1,…` sized to the largest count; shorter
/// rows are padded with empty fields. Diagnostics follow as `#` lines.
pub fn diagram_csv(d: &APDiagram) -> String {
    let width = d.rows.iter().map(|r| r.count()).max().unwrap_or(0);
    let mut s = String::from("t,count");
    for k in 1..=width {
        let _ = write!(s, ",u_min_{k},u_max_{k}");
    }
    s.push('\n');
    for row in &d.rows {
        let _ = write!(s, "{},{}", num(row.t), row.count());
        let summaries = row.summaries();
        for k in 0..width {
            match summaries.get(k) {
                Some(sm) => {
                    let _ = write!(s, ",{},{}", num(sm.min), num(sm.max));
                }
                None => s.push_str(",,"),
            }
        }
        s.push('\n');
    }
    for diag in &d.diagnostics {
        let _ = writeln!(s, "# {}", diag.describe());
    }
    s
}

#[derive(Serialize)]
struct KernelAuditJson {
    passed: bool,
    symmetric: bool,
    symmetry_defect: f64,
    worst_pair: Option<(usize, usize)>,
    positive_within_delta: bool,
    min_within_delta: f64,
    min_within_delta_pair: Option<(usize, usize)>,
    nonnegative: bool,
    min_value: f64,
    connected: bool,
    components: usize,
}

#[derive(Serialize)]
struct HypothesisJson {
    f1: bool,
    f2: bool,
    f3: bool,
    f4: bool,
    big_a: f64,
    c: f64,
    a: f64,
    lambda1: f64,
    rowsum_sup: f64,
    f1_worst_margin: f64,
    f2_tail_error: f64,
    sigma: f64,
    gamma: f64,
    radius: f64,
    sample_count: usize,
}

#[derive(Serialize)]
struct CheckJson {
    kernel: KernelAuditJson,
    rowsum_inf: f64,
    rowsum_sup: f64,
    hypotheses: Option<HypothesisJson>,
    passed: bool,
}

/// Kernel audit, row-sum range and, when the eigenpair exists, the f1–f4 audit.
pub fn check_json(audit: &KernelAudit, rowsum: (f64, f64), hyp: Option<&HypothesisReport>, passed: bool) -> String {
    to_json(&CheckJson {
        kernel: KernelAuditJson {
            passed: audit.passed(),
            symmetric: audit.symmetric,
            symmetry_defect: audit.symmetry_defect,
            worst_pair: audit.worst_pair,
            positive_within_delta: audit.positive_within_delta,
            min_within_delta: audit.min_within_delta,
            min_within_delta_pair: audit.min_within_delta_pair,
            nonnegative: audit.nonnegative,
            min_value: audit.min_value,
            connected: audit.connected,
            components: audit.components,
        },
        rowsum_inf: rowsum.0,
        rowsum_sup: rowsum.1,
        hypotheses: hyp.map(|h| HypothesisJson {
            f1: h.f1.pass,
            f2: h.f2.pass,
            f3: h.f3.pass,
            f4: h.f4.pass,
            big_a: h.f1.big_a,
            c: h.f1.c,
            a: h.f2.a,
            lambda1: h.f2.lambda1,
            rowsum_sup: h.f1.rowsum_sup,
            f1_worst_margin: h.f1.worst_margin,
            f2_tail_error: h.f2.tail_error,
            sigma: h.f3.sigma,
            gamma: h.gamma,
            radius: h.radius,
            sample_count: h.sample_count,
        }),
        passed,
    })
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;
const SVG_PAD: f64 = 48.0;

/// Two panels stacked vertically: solution count against t, and each
/// solution's min and max against t, as polylines.
pub fn diagram_svg(d: &APDiagram) -> String {
    let panel_h = (SVG_H - 3.0 * SVG_PAD) / 2.0;
    let (t_lo, t_hi) = range(d.rows.iter().map(|r| r.t));
    let (c_lo, c_hi) = range(d.rows.iter().map(|r| r.count() as f64).chain([0.0]));
    let (u_lo, u_hi) = range(
        d.rows
            .iter()
            .flat_map(|r| r.summaries())
            .flat_map(|s| [s.min, s.max]),
    );
    let x = |t: f64| SVG_PAD + (t - t_lo) / (t_hi - t_lo) * (SVG_W - 2.0 * SVG_PAD);
    let y = |v: f64, lo: f64, hi: f64, top: f64| top + panel_h - (v - lo) / (hi - lo) * panel_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">"
    );
    let tops = [SVG_PAD, 2.0 * SVG_PAD + panel_h];
    for (top, label) in tops.iter().zip(["count", "u min / max"]) {
        let _ = writeln!(
            s,
            "<rect x=\"{SVG_PAD}\" y=\"{top}\" width=\"{}\" height=\"{panel_h}\" fill=\"none\" stroke=\"#888\"/>",
            SVG_W - 2.0 * SVG_PAD
        );
        let _ = writeln!(
            s,
            "<text x=\"4\" y=\"{}\" font-size=\"11\">{label}</text>",
            top + 12.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\">t in [{}, {}]</text>",
        SVG_PAD,
        SVG_H - 8.0,
        num(t_lo),
        num(t_hi)
    );

    let counts: Vec<(f64, f64)> = d
        .rows
        .iter()
        .map(|r| (x(r.t), y(r.count() as f64, c_lo, c_hi, tops[0])))
        .collect();
    polyline(&mut s, &counts, "#1f77b4");

    let width = d.rows.iter().map(|r| r.count()).max().unwrap_or(0);
    for k in 0..width {
        for (pick, color) in [(0usize, "#d62728"), (1, "#2ca02c")] {
            let pts: Vec<(f64, f64)> = d
                .rows
                .iter()
                .filter_map(|r| r.summaries().get(k).map(|sm| (r.t, if pick == 0 { sm.min } else { sm.max })))
                .map(|(t, v)| (x(t), y(v, u_lo, u_hi, tops[1])))
                .collect();
            polyline(&mut s, &pts, color);
        }
    }
    s.push_str("</svg>\n");
    s
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn polyline(s: &mut String, pts: &[(f64, f64)], color: &str) {
    if pts.is_empty() {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|(a, b)| format!("{a:.3},{b:.3}")).collect();
    let _ = writeln!(
        s,
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
        coords.join(" ")
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{DiagramDiagnostic, DiagramRow};
    use crate::solver::Method;

    fn report(u: Vec<f64>) -> SolveReport {
        SolveReport {
            solution: u,
            residual_inf: 0.0,
            iterations: 1,
            last_step: 0.0,
            method: Method::Newton,
            bracket: None,
            iterates: Vec::new(),
        }
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(-0.1), "-1.0000000000000001e-1");
        let back: f64 = num(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn json_floats_and_nonfinite() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: f64,
            n: usize,
        }
        let s = to_json(&S { a: 0.5, b: f64::NAN, n: 3 });
        assert_eq!(s, "{\"a\":5.0000000000000000e-1,\"b\":null,\"n\":3}\n");
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"].as_f64(), Some(0.5));
    }

    #[test]
    fn solution_json_keys() {
        let s = solution_json(-1.0, &report(vec![1.0, 1.0]));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["method"], "newton");
        assert_eq!(v["u"].as_array().unwrap().len(), 2);
        assert_eq!(v["t"].as_f64(), Some(-1.0));
    }

    #[test]
    fn diagram_csv_padding_and_diagnostics() {
        let d = APDiagram {
            rows: vec![
                DiagramRow {
                    t: -1.0,
                    solutions: vec![report(vec![-2.0]), report(vec![1.0])],
                },
                DiagramRow {
                    t: 0.5,
                    solutions: vec![],
                },
            ],
            diagnostics: vec![DiagramDiagnostic::ExistenceGap {
                missing_t: 0.5,
                found_t: 1.0,
            }],
            bound: None,
        };
        let csv = diagram_csv(&d);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,count,u_min_1,u_max_1,u_min_2,u_max_2");
        assert!(lines[1].starts_with("-1.0000000000000000e0,2,-2.0000000000000000e0,"));
        assert_eq!(lines[2], "5.0000000000000000e-1,0,,,,");
        assert!(lines[3].starts_with("# existence not monotone"));
        assert!(diagram_svg(&d).contains("<polyline"));
    }

    #[test]
    fn empty_diagram_is_header_only() {
        let d = APDiagram {
            rows: vec![],
            diagnostics: vec![],
            bound: None,
        };
        assert_eq!(diagram_csv(&d), "t,count\n");
        assert!(diagram_svg(&d).ends_with("</svg>\n"));
    }
}
