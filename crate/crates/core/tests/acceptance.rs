//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::cell::Cell;
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use nonlocal_ap::analysis::{bracket_threshold, diagram, nonexistence_bound, ProbeOptions, ProblemFamily, ThresholdOptions};
use nonlocal_ap::cli::{self, Command, Common, DiagramArgs, SolveArgs};
use nonlocal_ap::solver::{build_supersolution, check_max_principle, monotone_iterate, Bracket, MonotoneOptions, Start};
use nonlocal_ap::{
    assemble, build_grid, decompose_forcing, principal_eigenpair, DiscreteOperator, Domain, EigenPair, ForcingMode,
    Interval, KernelSpec, Nonlinearity, TableKernel,
};

use common::{rank_one_roots, two_slope};

type Verdict = Result<String, String>;

/// Constant kernel on (0, 1) with a two-slope nonlinearity.
struct RankOne {
    op: DiscreteOperator,
    eig: EigenPair,
    nl: Nonlinearity,
}

impl RankOne {
    fn new(n: usize, a_neg: f64, a_pos: f64) -> Self {
        let op = assemble(&build_grid(&Domain::unit_interval(n).unwrap()), &KernelSpec::constant(1.0)).unwrap();
        let eig = principal_eigenpair(&op).unwrap();
        RankOne {
            op,
            eig,
            nl: Nonlinearity::piecewise_linear(a_neg, a_pos).unwrap(),
        }
    }

    fn family(&self) -> ProblemFamily<'_> {
        ProblemFamily::homogeneous(&self.op, &self.eig, &self.nl, ForcingMode::Eigen)
    }
}

/// Certified solutions gathered across criteria, checked against the
/// supersolution in criterion 9: (a_neg, a_pos, n, t, u).
#[derive(Default)]
struct Battery {
    solutions: Vec<(f64, f64, usize, f64, Vec<f64>)>,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn criterion_1(dir: &Path, battery: &mut Battery) -> Verdict {
    let ts = [-1.0, -0.5, 0.0, 0.25, 0.5];
    let expected_counts = [2usize, 2, 1, 0, 0];
    let config = write_config(
        dir,
        "c1.toml",
        "[domain]\nn = 201\n[kernel]\nfamily = \"constant\"\n[nonlinearity]\na_neg = 0.5\nA_pos = 2.0\n\
         [diagram]\nt_values = [-1.0, -0.5, 0.0, 0.25, 0.5]\n",
    );
    let started = Instant::now();
    let outcome = cli::run(&Command::Diagram(DiagramArgs {
        solve: SolveArgs {
            common: Common { config, out: None },
            method: None,
        },
        svg: None,
    }));
    let elapsed = started.elapsed();
    ensure(outcome.exit == 0, || format!("exit code {}", outcome.exit))?;
    let csv = outcome.output.ok_or("no CSV")?;
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).filter(|l| !l.starts_with('#')).map(|l| l.split(',').collect()).collect();
    ensure(rows.len() == ts.len(), || format!("{} rows", rows.len()))?;
    let mut worst: f64 = 0.0;
    for ((row, &t), &count) in rows.iter().zip(&ts).zip(&expected_counts) {
        let got: usize = row[1].parse().unwrap();
        ensure(got == count, || format!("t = {t}: count {got}, expected {count}"))?;
        let oracle = rank_one_roots(0.5, 2.0, t);
        ensure(oracle.len() == count, || format!("oracle disagrees at t = {t}"))?;
        for (k, root) in oracle.iter().enumerate() {
            let lo: f64 = row[2 + 2 * k].parse().unwrap();
            let hi: f64 = row[3 + 2 * k].parse().unwrap();
            worst = worst.max((lo - root).abs()).max((hi - root).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("solution error {worst:e} > 1e-8"))?;
    ensure(elapsed < Duration::from_secs(5), || format!("runtime {elapsed:?} >= 5 s"))?;

    // keep the full vectors for criterion 9
    let r = RankOne::new(201, 0.5, 2.0);
    let d = diagram(&r.family(), &ts, &ProbeOptions::default()).map_err(|e| e.to_string())?;
    for row in d.rows {
        for s in row.solutions {
            battery.solutions.push((0.5, 2.0, 201, row.t, s.solution));
        }
    }
    Ok(format!("counts {expected_counts:?}, max error {worst:.2e}, runtime {elapsed:.2?}"))
}

fn criterion_2(battery: &mut Battery) -> Verdict {
    let started = Instant::now();
    let r = RankOne::new(201, 0.5, 2.0);
    let family = r.family();
    let b = bracket_threshold(&family, &ThresholdOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let inst = family.at(0.0).unwrap();
    let bound = nonexistence_bound(&inst, 0.5 * (r.eig.lambda1 - 0.5)).map_err(|e| e.to_string())?;
    ensure(b.t_exist <= 0.0 && 0.0 <= b.t_fail, || format!("[{}, {}] misses 0", b.t_exist, b.t_fail))?;
    ensure(b.width <= 1e-6, || format!("width {:e} > 1e-6", b.width))?;
    ensure(bound.m_all.abs() <= 1e-12, || format!("m_all = {:e}", bound.m_all))?;
    ensure(b.t_fail <= bound.m_all + 1.0, || format!("t_fail {} > m_all + 1", b.t_fail))?;
    ensure(b.certificate.residual_inf <= inst.residual_tol(), || "certificate residual".into())?;
    ensure(elapsed < Duration::from_secs(30), || format!("runtime {elapsed:?} >= 30 s"))?;
    battery.solutions.push((0.5, 2.0, 201, b.t_exist, b.certificate.solution.clone()));
    Ok(format!(
        "t in [{:e}, {:e}], width {:.2e}, m_all {:e}, runtime {elapsed:.2?}",
        b.t_exist, b.t_fail, b.width, bound.m_all
    ))
}

/// Largest eigenvalue of the 2×2 moment matrix of K = 1 + xy on span{1, x}.
fn poly_oracle() -> f64 {
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0 / 3.0]);
    SymmetricEigen::new(m).eigenvalues.max()
}

fn criterion_3() -> Verdict {
    let exact = poly_oracle();
    let eig_at = |n: usize| {
        let op = assemble(&build_grid(&Domain::unit_interval(n).unwrap()), &KernelSpec::poly_rank2(1.0, 1.0)).unwrap();
        principal_eigenpair(&op).unwrap()
    };
    let (e401, e801) = (eig_at(401), eig_at(801));
    let (err401, err801) = ((e401.lambda1 - exact).abs(), (e801.lambda1 - exact).abs());
    let order = (err401 / err801).log2();
    ensure(err801 <= 1e-6, || format!("n=801 error {err801:e}"))?;
    ensure(err401 <= 4e-6 * 4.0, || format!("n=401 error {err401:e}"))?;
    ensure((1.8..=2.2).contains(&order), || format!("order {order}"))?;
    for e in [&e401, &e801] {
        ensure(e.phi1.iter().all(|&p| p > 0.0), || "phi1 not positive".into())?;
        ensure(1.0 < e.lambda1 && e.lambda1 < 1.5, || format!("Perron bounds fail: {}", e.lambda1))?;
    }
    Ok(format!("errors {err401:.3e} (n=401), {err801:.3e} (n=801), order {order:.4}"))
}

/// A connected kernel: gaussian on an interval or square, or a random
/// strictly positive symmetric table.
fn kernel_strategy(max_n: usize) -> impl Strategy<Value = (Domain, KernelSpec)> {
    let gaussian = (2usize..=max_n, 0.1f64..3.0, 0.05f64..1.0, any::<bool>()).prop_map(|(n, amp, width, square)| {
        let domain = if square {
            let side = ((n as f64).sqrt() as usize).max(2);
            Domain::new(vec![Interval::new(0.0, 1.0), Interval::new(-0.5, 0.5)], vec![side, side]).unwrap()
        } else {
            Domain::new(vec![Interval::new(-1.0, 1.0)], vec![n]).unwrap()
        };
        let spec = KernelSpec::gaussian(amp, width, domain.diameter()).unwrap();
        (domain, spec)
    });
    let table = (2usize..=max_n)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(0.01f64..2.0, n * n)))
        .prop_map(|(n, raw)| {
            let mut values = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    values[i * n + j] = raw[i.min(j) * n + i.max(j)];
                }
            }
            let domain = Domain::unit_interval(n).unwrap();
            let grid = build_grid(&domain);
            let table = TableKernel::new(n, values).unwrap().bind(&grid).unwrap();
            (domain, KernelSpec::table(table, 1.0).unwrap())
        });
    prop_oneof![gaussian, table]
}

fn criterion_4() -> Verdict {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 200,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let strategy = (kernel_strategy(40), prop::collection::vec((0.01f64..2.0, 0.0f64..1.0, any::<bool>()), 40), any::<u8>());
    let cases = Cell::new(0usize);
    let zero_cases = Cell::new(0usize);
    let result = runner.run(&strategy, |((domain, spec), extra, zero_selector)| {
        let grid = build_grid(&domain);
        let op = assemble(&grid, &spec).unwrap();
        let n = op.len();
        let k = &op.rowsum().values;
        let c: Vec<f64> = (0..n).map(|i| k[i] + extra[i % extra.len()].0).collect();
        // every 16th case uses rhs ≡ 0, others a sparse nonnegative rhs
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let (_, v, keep) = extra[i % extra.len()];
                if zero_selector % 16 == 0 || !keep {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        let mut a = DMatrix::from_fn(n, n, |i, j| -op.entry(i, j));
        for i in 0..n {
            a[(i, i)] += c[i];
        }
        let u: Vec<f64> = a.lu().solve(&DVector::from_vec(rhs.clone())).unwrap().as_slice().to_vec();
        let verdict = check_max_principle(&op, &c, &u);
        cases.set(cases.get() + 1);
        if rhs.iter().all(|&v| v == 0.0) {
            zero_cases.set(zero_cases.get() + 1);
        }
        prop_assert!(verdict.applicable(), "premise failed: {verdict:?}");
        prop_assert_eq!(verdict.conclusion_holds, Some(true), "counterexample at {:?}", verdict.counterexample);
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    let (cases, zero_cases) = (cases.get(), zero_cases.get());
    ensure(cases == 200, || format!("{cases} cases"))?;
    Ok(format!("{cases} triples ({zero_cases} with u = 0), no counterexamples"))
}

fn criterion_5() -> Verdict {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 50,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let worst = Cell::new(f64::INFINITY);
    let cases = Cell::new(0usize);
    runner
        .run(&(kernel_strategy(64), 1e-3f64..2.0), |((domain, spec), margin)| {
            let op = assemble(&build_grid(&domain), &spec).unwrap();
            let n = op.len();
            let beta = op.rowsum().sup + margin;
            let solver = op.factor_shifted(beta).unwrap();
            for j in 0..n {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                // (βI − M)⁻¹ = −(M − βI)⁻¹
                let col = solver.solve(&e).unwrap();
                for v in col {
                    worst.set(worst.get().min(-v));
                    prop_assert!(-v >= -1e-13, "entry {} below -1e-13", -v);
                }
            }
            cases.set(cases.get() + 1);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    ensure(cases.get() == 50, || format!("{} kernels", cases.get()))?;
    Ok(format!("50 kernels, smallest inverse entry {:e}", worst.get()))
}

fn criterion_6(battery: &mut Battery) -> Verdict {
    let n = 201;
    let r = RankOne::new(n, 0.5, 2.0);
    let g: Vec<f64> = r.eig.phi1.iter().map(|p| -p).collect();
    let forcing = decompose_forcing(&r.op, &r.eig, &g, ForcingMode::Eigen).unwrap();
    let inst = nonlocal_ap::solver::ProblemInstance::new(&r.op, &r.eig, &r.nl, forcing).unwrap();
    let bracket = Bracket::build(&inst, None).map_err(|e| e.to_string())?.ok_or("no bracket")?;
    let opts = MonotoneOptions {
        record_iterates: true,
        ..Default::default()
    };
    let mut steps = 0;
    for from in [Start::Super, Start::Sub] {
        let rep = monotone_iterate(&inst, &bracket, from, opts).map_err(|e| e.to_string())?;
        for pair in rep.iterates.windows(2) {
            for (new, old) in pair[1].iter().zip(&pair[0]) {
                let ok = match from {
                    Start::Super => new <= old,
                    Start::Sub => new >= old,
                };
                ensure(ok, || format!("{from:?}: step {old} -> {new} in the wrong direction"))?;
            }
        }
        for u in &rep.iterates {
            for ((v, lo), hi) in u.iter().zip(&bracket.sub).zip(&bracket.sup) {
                ensure(lo <= v && v <= hi, || format!("{from:?}: iterate {v} outside [{lo}, {hi}]"))?;
            }
        }
        let err = rep.solution.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
        ensure(err <= 1e-8, || format!("{from:?}: limit error {err:e}"))?;
        steps += rep.iterates.len() - 1;
        battery.solutions.push((0.5, 2.0, n, -1.0, rep.solution));
    }
    Ok(format!("{steps} monotone steps from both ends, limits u = 1"))
}

fn criterion_7() -> Verdict {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 10_000,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    let pairs = Cell::new(0usize);
    let strategy = (0.05f64..4.0, 0.05f64..4.0, 0.1f64..10.0, 1e-6f64..1.0, -1.0f64..1.0, -1.0f64..1.0);
    runner
        .run(&strategy, |(a_neg, a_pos, radius, excess, s, t)| {
            let (s, t) = (s * radius, t * radius);
            prop_assume!(s != t);
            let sigma = a_neg.min(a_pos);
            let gamma = a_neg.max(a_pos);
            let m = gamma * (1.0 + excess);
            let nl = Nonlinearity::piecewise_linear(a_neg, a_pos).unwrap();
            let (q_lo, q_hi) = nl.quotient_bounds(-radius, radius, 1000);
            prop_assert!((q_lo - sigma).abs() <= 1e-9 * gamma && (q_hi - gamma).abs() <= 1e-9 * gamma);
            let fs = nl.eval(&[0.0, 0.0], s);
            let ft = nl.eval(&[0.0, 0.0], t);
            prop_assert_eq!(fs, two_slope(a_neg, a_pos, s));
            let modulus = 1.0 - (fs - ft) / (m * (s - t));
            prop_assert!(0.0 < modulus, "modulus {modulus} <= 0");
            prop_assert!(modulus < 1.0 - sigma / m + 1e-12, "modulus {modulus} >= 1 - sigma/M");
            pairs.set(pairs.get() + 1);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let pairs = pairs.get();
    ensure(pairs >= 10_000, || format!("{pairs} pairs"))?;
    Ok(format!("{pairs} pairs within (0, 1 - sigma/M)"))
}

fn criterion_8(battery: &mut Battery) -> Verdict {
    let n = 101;
    let r = RankOne::new(n, 1.5, 2.0);
    let ts: Vec<f64> = (0..20).map(|k| -3.0 + 6.0 * k as f64 / 19.0).collect();
    let d = diagram(&r.family(), &ts, &ProbeOptions::default()).map_err(|e| e.to_string())?;
    for row in &d.rows {
        let oracle = rank_one_roots(1.5, 2.0, row.t);
        ensure(oracle.len() == 1, || format!("oracle has {} roots at t = {}", oracle.len(), row.t))?;
        ensure(row.count() == 1, || format!("{} solutions at t = {}", row.count(), row.t))?;
        let s = row.summaries()[0];
        ensure((s.min - oracle[0]).abs() <= 1e-8 && (s.max - oracle[0]).abs() <= 1e-8, || {
            format!("t = {}: solution [{}, {}] vs oracle {}", row.t, s.min, s.max, oracle[0])
        })?;
        battery.solutions.push((1.5, 2.0, n, row.t, row.solutions[0].solution.clone()));
    }
    Ok("exactly one solution at each of 20 values of t".into())
}

fn criterion_9(battery: &Battery) -> Verdict {
    let mut checked = 0usize;
    for (a_neg, a_pos, n, t, u) in &battery.solutions {
        let r = RankOne::new(*n, *a_neg, *a_pos);
        let inst = r.family().at(*t).unwrap();
        let w = build_supersolution(&inst).map_err(|e| e.to_string())?;
        for (i, (ui, wi)) in u.iter().zip(&w).enumerate() {
            ensure(ui < wi, || format!("t = {t}, node {i}: u = {ui} >= w = {wi}"))?;
        }
        checked += 1;
    }
    ensure(checked > 0, || "no solutions collected".into())?;
    Ok(format!("{checked} certified solutions below the supersolution"))
}

fn criterion_10(dir: &Path) -> Verdict {
    let bin = env!("CARGO_BIN_EXE_nonlocal-ap");
    let config = write_config(
        dir,
        "c10.toml",
        "[domain]\nn = 101\n[kernel]\nfamily = \"gaussian\"\namplitude = 1.0\nwidth = 0.3\n\
         [nonlinearity]\na_neg = 0.5\nA_pos = 2.0\n[forcing]\nt = -1.0\ng1_amplitude = 0.1\n\
         [diagram]\nt_values = [-1.0, -0.25, 0.0, 0.5]\n",
    );
    let runs = [
        ("eigen", vec![]),
        ("solve", vec![]),
        ("solve", vec!["--method", "newton"]),
        ("solve", vec!["--method", "picard"]),
        ("threshold", vec![]),
        ("diagram", vec!["--svg"]),
        ("check", vec![]),
    ];
    for (cmd, extra) in &runs {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.join(format!("{cmd}-{}-{rep}.out", extra.join("")));
            let svg = dir.join(format!("{cmd}-{rep}.svg"));
            let mut p = Process::new(bin);
            p.arg(cmd).arg("--config").arg(&config).arg("--out").arg(&out);
            for a in extra {
                if *a == "--svg" {
                    p.arg(a).arg(&svg);
                } else {
                    p.arg(a);
                }
            }
            let status = p.output().map_err(|e| e.to_string())?;
            ensure(status.status.code() == Some(0), || {
                format!("{cmd} {extra:?} exited {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr))
            })?;
            let mut bytes = std::fs::read(&out).map_err(|e| e.to_string())?;
            if extra.contains(&"--svg") {
                bytes.extend(std::fs::read(&svg).map_err(|e| e.to_string())?);
            }
            outputs.push(bytes);
        }
        ensure(outputs[0] == outputs[1], || format!("{cmd} {extra:?}: outputs differ"))?;
        ensure(!outputs[0].is_empty(), || format!("{cmd}: empty output"))?;
    }
    Ok(format!("{} command variants byte-identical across two runs", runs.len()))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut battery = Battery::default();
    let mut failed = 0;
    let mut report = |k: usize, name: &str, v: Verdict| {
        match v {
            Ok(detail) => println!("criterion {k:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {k:>2} FAIL  {name}: {why}");
            }
        }
    };
    report(1, "rank-one diagram", criterion_1(dir.path(), &mut battery));
    report(2, "threshold bracket", criterion_2(&mut battery));
    report(3, "eigenvalue accuracy", criterion_3());
    report(4, "maximum principle", criterion_4());
    report(5, "inverse positivity", criterion_5());
    report(6, "monotone iteration", criterion_6(&mut battery));
    report(7, "contraction modulus", criterion_7());
    report(8, "uniqueness under f4", criterion_8(&mut battery));
    report(9, "a-priori bound", criterion_9(&battery));
    report(10, "determinism", criterion_10(dir.path()));
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 10 acceptance criteria passed");
}
