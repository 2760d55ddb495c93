//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are run and reported like the
//! others, but their failure does not fail the process. If one of them
//! starts passing, the process fails so the list gets updated.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cstar_fixpoint::algebra::{
    hermitian_spectrum, in_commutant, is_positive, loewner_leq, neumann_inverse_one_minus,
    operator_norm,
};
use cstar_fixpoint::fixpoint::{
    check_compatible, check_condition_23, check_condition_24, check_condition_25,
    check_norm_contraction, check_weakly_compatible, coincidence_scan, solve_alternating,
    solve_jungck, MappingPair, SolveOutcome, DEFAULT_MAX_ITER,
};
use cstar_fixpoint::integral::{
    operator_pair, solve_common, verify_hypotheses, GridProblem, Kernel, DEFAULT_LATTICE_SIDE,
};
use cstar_fixpoint::metric::{
    make_diag_metric, make_multiplication_metric, verify_axioms_on_triples, CStarMetric, FnMetric,
    GridFunction,
};
use cstar_fixpoint::sampling::{
    grid_function_pairs, random_grid_function, rng, scalar_pairs, scalar_triples,
    DEFAULT_PAIR_COUNT, DEFAULT_SEED,
};
use cstar_fixpoint::{MatrixElement, Tolerances};

const KNOWN_UNATTAINABLE: &[&str] = &["example21_failure"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(cond: bool, what: impl Into<String>, failures: &mut Vec<String>) {
    if !cond {
        failures.push(what.into());
    }
}

fn finish(failures: Vec<String>, notes: Vec<String>) -> Outcome {
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            notes.join("; ")
        } else {
            failures.join("; ")
        },
    }
}

fn m(rows: &[[f64; 2]; 2]) -> MatrixElement {
    MatrixElement::from_real_rows(rows).unwrap()
}

fn remark11() -> Outcome {
    let tol = Tolerances::default();
    let start = Instant::now();
    let a = m(&[[0.0, 3.0], [3.0, 1.0]]);
    let b = m(&[[1.0, 1.0], [1.0, 6.0]]);
    let c = m(&[[1.0, 1.0], [1.0, 1.0]]);
    let a_le_b = loewner_leq(&a, &b, &tol).unwrap();
    let c_pos = is_positive(&c, &tol);
    let c_comm = in_commutant(&c, &tol);
    let diff = c.mul(&b).unwrap().sub(&c.mul(&a).unwrap()).unwrap();
    let diff_pos = is_positive(&diff, &tol);
    let elapsed = start.elapsed();

    let mut f = Vec::new();
    check(a_le_b, "a ⪯ b should hold", &mut f);
    check(c_pos, "c should be positive", &mut f);
    check(!c_comm, "c should not be in the commutant", &mut f);
    check(
        diff == m(&[[-1.0, 3.0], [-1.0, 3.0]]),
        format!("cb - ca = {diff:?}"),
        &mut f,
    );
    check(!diff_pos, "cb - ca should not be positive", &mut f);
    check(
        elapsed < Duration::from_millis(1),
        format!("took {elapsed:?}"),
        &mut f,
    );
    finish(f, vec![format!("cb - ca = [[-1,3],[-1,3]], {elapsed:?}")])
}

fn eigen_oracle() -> Outcome {
    let tol = Tolerances::default();
    let spec = hermitian_spectrum(&m(&[[1.0, -2.0], [-2.0, 5.0]]), &tol).unwrap();
    // λ² - tr·λ + det = 0 with tr = 6, det = 1.
    let (tr, det) = (6.0f64, 1.0f64);
    let disc = (tr * tr - 4.0 * det).sqrt();
    let oracle = [(tr - disc) / 2.0, (tr + disc) / 2.0];
    let err = spec
        .iter()
        .zip(oracle)
        .map(|(l, o)| (l - o).abs())
        .fold(0.0, f64::max);
    let mut f = Vec::new();
    check(
        spec.len() == 2 && err <= 1e-10,
        format!("spectrum {spec:?}, error {err:e}"),
        &mut f,
    );
    finish(f, vec![format!("max error {err:e}")])
}

fn compat_t(x: &f64) -> f64 {
    if *x <= 1.5 {
        3.0 - x
    } else {
        3.0
    }
}

fn compat_s(x: &f64) -> f64 {
    if *x > 1.0 && *x <= 2.0 {
        2.0 * x
    } else {
        *x
    }
}

fn compat_counterexample() -> Outcome {
    let tol = Tolerances::default();
    let start = Instant::now();
    let d = make_diag_metric(2.0).unwrap();
    let pair = MappingPair::new(compat_t, compat_s);
    let seq: Vec<f64> = (1..=1_000_000u32).map(|n| 1.0 + 1.0 / n as f64).collect();
    let report = check_compatible(&pair, &d, &seq, &tol, 1e-5).unwrap();
    let last = *seq.last().unwrap();
    let comm = *report.commutator_tail.last().unwrap();
    let t_gap = d.dist_norm(&compat_t(&last), &2.0, &tol);
    let s_gap = d.dist_norm(&compat_s(&last), &2.0, &tol);
    let weak = check_weakly_compatible(&pair, &d, &[3.0], &tol).unwrap();
    let elapsed = start.elapsed();

    let mut f = Vec::new();
    check(
        (comm - 2.0).abs() <= 1e-5,
        format!("tail norm {comm}"),
        &mut f,
    );
    check(t_gap < 1e-5, format!("‖d(Tx_n, 2)‖ = {t_gap:e}"), &mut f);
    check(s_gap < 1e-5, format!("‖d(Sx_n, 2)‖ = {s_gap:e}"), &mut f);
    check(
        weak.weakly_compatible(),
        "not weakly compatible at 3",
        &mut f,
    );
    check(
        elapsed < Duration::from_secs(1),
        format!("took {elapsed:?}"),
        &mut f,
    );
    finish(
        f,
        vec![format!(
            "tail norm {comm:.8}, verdict {:?}, {elapsed:?}",
            report.verdict
        )],
    )
}

fn geometric(out: &SolveOutcome<f64>, ratio: f64, slack: f64) -> Option<usize> {
    let s0 = out.trace.step_norms[0];
    out.trace
        .step_norms
        .iter()
        .enumerate()
        .find(|(n, s)| **s > ratio.powi(*n as i32) * s0 * (1.0 + slack))
        .map(|(n, _)| n)
}

fn thm21_suite() -> Outcome {
    let tol = Tolerances::default();
    let start = Instant::now();
    let d = make_diag_metric(1.0).unwrap();
    let pair = MappingPair::symmetric(|x: &f64| x / 2.0 + 1.0);
    let a = MatrixElement::scalar(2, std::f64::consts::FRAC_1_SQRT_2);
    let mut f = Vec::new();
    let mut iters = Vec::new();
    for x0 in [-100.0, -37.5, 0.0, 42.0, 100.0] {
        let out = solve_alternating(&pair, &d, &a, x0, &tol, DEFAULT_MAX_ITER).unwrap();
        iters.push(out.iterations);
        match out.point {
            Some(p) if out.converged() => check(
                (p - 2.0).abs() <= 1e-8,
                format!("x0 = {x0}: point {p}"),
                &mut f,
            ),
            _ => f.push(format!("x0 = {x0}: status {:?}", out.status)),
        }
        if let Some(n) = geometric(&out, 0.5, 1e-9) {
            f.push(format!("x0 = {x0}: step {n} above (1/2)^n bound"));
        }
    }
    let elapsed = start.elapsed();
    check(
        elapsed < Duration::from_millis(100),
        format!("took {elapsed:?}"),
        &mut f,
    );
    finish(f, vec![format!("iterations {iters:?}, {elapsed:?}")])
}

fn kannan_chatterjea_suite() -> Outcome {
    let tol = Tolerances::default();
    let d = make_diag_metric(2.0).unwrap();
    let a = MatrixElement::scalar(2, 0.25);
    let sample = scalar_pairs(-10.0, 10.0, DEFAULT_PAIR_COUNT, DEFAULT_SEED);
    let mut f = Vec::new();

    let s_n = neumann_inverse_one_minus(&a, &tol, 10_000).unwrap();
    let one = MatrixElement::identity(2);
    let resid = one.sub(&a).unwrap().mul(&s_n).unwrap().sub(&one).unwrap();
    let neumann_err = operator_norm(&resid, &tol);
    check(
        neumann_err <= 1e-9,
        format!("‖(1-a)S_N - 1‖ = {neumann_err:e}"),
        &mut f,
    );
    let b = s_n.mul(&a).unwrap();
    let b_norm = operator_norm(&b, &tol);
    check(
        (b_norm - 1.0 / 3.0).abs() <= 1e-9,
        format!("‖b‖ = {b_norm}"),
        &mut f,
    );

    let kannan = MappingPair::new(|x: &f64| x / 5.0, |x: &f64| *x).with_section(|y: &f64| *y);
    let chatterjea =
        MappingPair::new(|x: &f64| x / 5.0 + 1.0, |x: &f64| *x).with_section(|y: &f64| *y);
    let runs = [
        (
            "kannan",
            check_condition_24(&kannan, &d, &a, &sample, &tol),
            &kannan,
            0.0,
        ),
        (
            "chatterjea",
            check_condition_25(&chatterjea, &d, &a, &sample, &tol),
            &chatterjea,
            1.25,
        ),
    ];
    let mut notes = vec![format!(
        "‖b‖ = {b_norm:.12}, Neumann residual {neumann_err:e}"
    )];
    for (name, cert, pair, expected) in runs {
        let cert = cert.unwrap();
        check(cert.passed(), format!("{name}: certificate failed"), &mut f);
        let out = solve_jungck(pair, &d, &cert, 7.0, &tol, DEFAULT_MAX_ITER).unwrap();
        match out.common_fixed_point {
            Some(z) => check(
                (z - expected).abs() <= 1e-8,
                format!("{name}: z = {z}"),
                &mut f,
            ),
            None => f.push(format!("{name}: no common fixed point ({:?})", out.status)),
        }
        let ratio = out.trace.bound_norms[1] / out.trace.bound_norms[0];
        check(
            (ratio - b_norm).abs() <= 1e-12,
            format!("{name}: bound ratio {ratio}"),
            &mut f,
        );
        if let Some(n) = geometric(&out, b_norm, 10.0 * tol.eq_tol) {
            f.push(format!("{name}: step {n} above ‖b‖^n bound"));
        }
        notes.push(format!("{name} {} iterations", out.iterations));
    }
    finish(f, notes)
}

fn example21_failure() -> Outcome {
    let tol = Tolerances::default();
    let k = 1.0;
    let d = make_diag_metric(k).unwrap();
    let pair = MappingPair::new(
        move |x: &f64| if *x == 0.0 { 1.0 } else { k * x / 2.0 },
        move |x: &f64| if *x == 0.0 { 2.0 } else { k * x },
    )
    .with_section(move |y: &f64| if *y == 0.0 { 0.0 } else { y / k });
    let a = MatrixElement::scalar(2, std::f64::consts::FRAC_1_SQRT_2);
    let sample = scalar_pairs(-10.0, 10.0, DEFAULT_PAIR_COUNT, DEFAULT_SEED);
    let cert = check_condition_23(&pair, &d, &a, &sample, &tol).unwrap();
    let jungck = solve_jungck(&pair, &d, &cert, 1.0, &tol, DEFAULT_MAX_ITER).unwrap();
    let alternating = solve_alternating(&pair, &d, &a, 1.0, &tol, DEFAULT_MAX_ITER).unwrap();

    let grid: Vec<f64> = (0..=20_000).map(|i| -10.0 + i as f64 * 1e-3).collect();
    let scan = coincidence_scan(&pair, &d, &grid, &tol);

    let mut f = Vec::new();
    check(cert.passed(), "S-conjugation certificate failed", &mut f);
    check(!jungck.converged(), "Jungck run converged", &mut f);
    check(
        !alternating.converged(),
        "alternating run converged",
        &mut f,
    );
    check(
        scan.min >= 0.4,
        format!(
            "grid scan minimum {:e} at x = {:?} is below 0.4",
            scan.min, scan.argmin
        ),
        &mut f,
    );
    finish(
        f,
        vec![format!(
            "Jungck {:?}, alternating {:?}, scan min {}",
            jungck.status, alternating.status, scan.min
        )],
    )
}

fn integral_linear() -> Outcome {
    let tol = Tolerances::default();
    let start = Instant::now();
    let n = 201;
    let p = GridProblem::new(
        n,
        Kernel::linear(0.5),
        Kernel::linear(0.5),
        |_, _| 1.0,
        |t| t,
        0.5,
    )
    .unwrap();
    let out = solve_common(&p, GridFunction::zeros(n), &tol, DEFAULT_MAX_ITER).unwrap();
    let hyp = verify_hypotheses(&p, &p.default_u_lattice(DEFAULT_LATTICE_SIDE), &tol);
    let metric = make_multiplication_metric(n).unwrap();
    let pairs = grid_function_pairs(n, 256, p.lattice_bound() / 2.0, DEFAULT_SEED);
    let cert = check_norm_contraction(&operator_pair(&p), &metric, 0.5, &pairs, &tol).unwrap();
    let elapsed = start.elapsed();

    let dense = dense_linear_oracle(&p);
    let closed: Vec<f64> = p.nodes().iter().map(|t| t + 0.5).collect();
    let oracle_gap = max_gap(&dense, &closed);

    let mut f = Vec::new();
    check(out.converged(), format!("status {:?}", out.status), &mut f);
    check(
        out.iterations <= 60,
        format!("{} iterations", out.iterations),
        &mut f,
    );
    let err = out
        .point
        .as_ref()
        .map(|x| max_gap(x.values(), &closed))
        .unwrap_or(f64::INFINITY);
    check(err <= 1e-6, format!("max-node error {err:e}"), &mut f);
    check(
        oracle_gap <= 1e-12,
        format!("dense vs closed form {oracle_gap:e}"),
        &mut f,
    );
    check(
        (hyp.h3.sup_integral - 1.0).abs() <= 1e-12,
        format!("sup ∫φ = {}", hyp.h3.sup_integral),
        &mut f,
    );
    check(hyp.all_pass(), "hypotheses failed", &mut f);
    check(
        cert.passed(),
        format!("norm contraction violation {:e}", cert.max_violation),
        &mut f,
    );
    check(
        elapsed < Duration::from_secs(1),
        format!("took {elapsed:?}"),
        &mut f,
    );
    finish(
        f,
        vec![format!(
            "{} iterations, error {err:e}, sup ∫φ = {}, {elapsed:?}",
            out.iterations, hyp.h3.sup_integral
        )],
    )
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Gaussian elimination on `(I - c·1·wᵀ) x = g`.
fn dense_linear_oracle(p: &GridProblem) -> Vec<f64> {
    let n = p.grid_size();
    let w = p.weights();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| f64::from(u8::from(i == j)) - 0.5 * w[j])
                .collect()
        })
        .collect();
    let mut b = p.g().values().to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn metric_axioms() -> Outcome {
    let tol = Tolerances::default();
    let mut f = Vec::new();
    let mut notes = Vec::new();

    for k in [0.5, 1.0, 2.0] {
        let d = make_diag_metric(k).unwrap();
        let triples = scalar_triples(-100.0, 100.0, 1000, DEFAULT_SEED);
        let r = verify_axioms_on_triples(&d, &triples, &tol);
        check(r.all_pass(), format!("diag metric k = {k}"), &mut f);
        notes.push(format!("diag k={k}: {} triples", r.triples_checked));
    }

    let n = 33;
    let mm = make_multiplication_metric(n).unwrap();
    let mut g = rng(DEFAULT_SEED);
    let triples: Vec<_> = (0..1000)
        .map(|_| {
            (
                random_grid_function(n, 3.0, &mut g),
                random_grid_function(n, 3.0, &mut g),
                random_grid_function(n, 3.0, &mut g),
            )
        })
        .collect();
    let r = verify_axioms_on_triples(&mm, &triples, &tol);
    check(r.all_pass(), "multiplication metric", &mut f);
    notes.push(format!(
        "multiplication N={n}: {} triples",
        r.triples_checked
    ));

    // d(x, y) = P·|x - y| with a fixed non-diagonal positive P.
    let p = MatrixElement::from_real_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
    let fm = FnMetric::new(2, move |x: &f64, y: &f64| p.scale((x - y).abs()));
    let triples = scalar_triples(-100.0, 100.0, 1000, DEFAULT_SEED ^ 1);
    let r = verify_axioms_on_triples(&fm, &triples, &tol);
    check(r.all_pass(), "scaled positive-matrix metric", &mut f);
    notes.push(format!("scaled P: {} triples", r.triples_checked));
    finish(f, notes)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("remark11_regression", remark11),
        ("eigen_oracle", eigen_oracle),
        ("compat_counterexample", compat_counterexample),
        ("thm21_property_suite", thm21_suite),
        ("kannan_chatterjea_suite", kannan_chatterjea_suite),
        ("example21_failure", example21_failure),
        ("integral_linear", integral_linear),
        ("metric_axioms", metric_axioms),
    ];
    let mut hard_failures = 0;
    for (name, run) in criteria {
        let out = run();
        let known = KNOWN_UNATTAINABLE.contains(&name);
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        let tag = if known { " (known unattainable)" } else { "" };
        println!("{verdict} {name}{tag}: {}", out.detail);
        if out.pass == known {
            hard_failures += 1;
            if known {
                println!("     {name} is listed as unattainable but passed");
            }
        }
    }
    if hard_failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
