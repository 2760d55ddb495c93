//! Reproducible scenarios. Each demo runs its computation, evaluates a list
//! of named assertions and reports both.

use std::f64::consts::FRAC_1_SQRT_2;

use clap::ValueEnum;
use cstar_fixpoint::algebra::{
    in_commutant, is_positive, loewner_leq, neumann_inverse_one_minus, operator_norm,
};
use cstar_fixpoint::fixpoint::check_norm_contraction;
use cstar_fixpoint::fixpoint::{
    check_compatible, check_condition_21, check_condition_23, check_condition_24,
    check_condition_25, check_weakly_compatible, coincidence_scan, solve_alternating, solve_jungck,
    ContractionCertificate, MappingPair, SolveOutcome, DEFAULT_MAX_ITER,
};
use cstar_fixpoint::integral::{
    operator_pair, solve_common, verify_hypotheses, GridProblem, Kernel, DEFAULT_LATTICE_SIDE,
};
use cstar_fixpoint::metric::{
    make_diag_metric, make_multiplication_metric, probe_completeness, CStarMetric, GridFunction,
    Subset, DEFAULT_WINDOW,
};
use cstar_fixpoint::sampling::{grid_function_pairs, scalar_pairs, DEFAULT_PAIR_COUNT};
use cstar_fixpoint::{MatrixElement, Tolerances};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::tolerances;
use crate::mappings::{compat_s, compat_t, example21_s, example21_section, example21_t};
use crate::{CliError, Options, Report, EXIT_ASSERTION, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum DemoId {
    Remark11,
    Example11Completeness,
    CompatCounterexample,
    Thm21Demo,
    Example21Failure,
    KannanDemo,
    ChatterjeaDemo,
    IntegralLinear,
    IntegralNonlinear,
}

#[derive(Debug, Serialize)]
struct Assertion {
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Assertions(Vec<Assertion>);

impl Assertions {
    fn check(&mut self, name: &'static str, pass: bool, detail: impl Into<String>) {
        self.0.push(Assertion {
            name,
            pass,
            detail: detail.into(),
        });
    }
}

fn params<T: DeserializeOwned + Default>(overrides: Option<Value>) -> Result<T, CliError> {
    match overrides {
        None => Ok(T::default()),
        Some(v) => Ok(serde_json::from_value(v)?),
    }
}

fn finish(id: DemoId, results: Value, checks: Assertions) -> Report {
    let failed: Vec<&Assertion> = checks.0.iter().filter(|a| !a.pass).collect();
    let mut summary = format!(
        "{}: ",
        serde_json::to_value(id).unwrap().as_str().unwrap_or("demo")
    );
    if failed.is_empty() {
        summary.push_str(&format!("all {} assertions hold", checks.0.len()));
    } else {
        summary.push_str("assertion failed");
        for a in &failed {
            summary.push_str(&format!("\n  {}: {}", a.name, a.detail));
        }
    }
    let exit_code = if failed.is_empty() {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    };
    Report {
        json: json!({
            "demo": id,
            "pass": failed.is_empty(),
            "results": results,
            "assertions": checks.0,
        }),
        summary,
        exit_code,
    }
}

pub fn run_demo(id: DemoId, overrides: Option<Value>, opts: &Options) -> Result<Report, CliError> {
    match id {
        DemoId::Remark11 => {
            if overrides.is_some() {
                return Err(CliError::Config("remark11 takes no parameters".into()));
            }
            remark11(opts)
        }
        DemoId::Example11Completeness => example11(params(overrides)?, opts),
        DemoId::CompatCounterexample => compat(params(overrides)?, opts),
        DemoId::Thm21Demo => thm21(params(overrides)?, opts),
        DemoId::Example21Failure => example21(params(overrides)?, opts),
        DemoId::KannanDemo => jungck_demo(id, params(overrides)?, opts),
        DemoId::ChatterjeaDemo => jungck_demo(id, params(overrides)?, opts),
        DemoId::IntegralLinear => integral_linear(params(overrides)?, opts),
        DemoId::IntegralNonlinear => integral_nonlinear(params(overrides)?, opts),
    }
}

fn tol(opts: &Options) -> Result<Tolerances, CliError> {
    tolerances(None, opts)
}

fn max_iter(opts: &Options) -> usize {
    opts.max_iter.unwrap_or(DEFAULT_MAX_ITER)
}

fn m2(rows: [[f64; 2]; 2]) -> MatrixElement {
    MatrixElement::from_real_rows(&rows).expect("2x2")
}

fn remark11(opts: &Options) -> Result<Report, CliError> {
    let tol = tol(opts)?;
    let a = m2([[0.0, 3.0], [3.0, 1.0]]);
    let b = m2([[1.0, 1.0], [1.0, 6.0]]);
    let c = m2([[1.0, 1.0], [1.0, 1.0]]);
    let ca = c.mul(&a)?;
    let cb = c.mul(&b)?;
    let diff = cb.sub(&ca)?;
    let a_le_b = loewner_leq(&a, &b, &tol)?;
    let c_positive = is_positive(&c, &tol);
    let c_commutes = in_commutant(&c, &tol);
    let diff_positive = is_positive(&diff, &tol);

    let mut checks = Assertions::default();
    checks.check(
        "a_le_b",
        a_le_b,
        "b - a = [[1,-2],[-2,5]] should be positive",
    );
    checks.check(
        "c_positive",
        c_positive,
        "c = [[1,1],[1,1]] should be positive",
    );
    checks.check(
        "c_not_in_commutant",
        !c_commutes,
        "c should not commute with every matrix unit",
    );
    checks.check(
        "cb_minus_ca",
        diff == m2([[-1.0, 3.0], [-1.0, 3.0]]),
        format!("cb - ca = {:?}", diff.re_rows()),
    );
    checks.check(
        "cb_minus_ca_not_positive",
        !diff_positive,
        "cb - ca should not be positive",
    );
    let results = json!({
        "a": a, "b": b, "c": c,
        "a_le_b": a_le_b,
        "c_positive": c_positive,
        "c_in_commutant": c_commutes,
        "cb_minus_ca": diff,
        "cb_minus_ca_positive": diff_positive,
        "verdict": if !diff_positive { "order not preserved" } else { "order preserved" },
    });
    Ok(finish(DemoId::Remark11, results, checks))
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CompletenessParams {
    k: f64,
    terms: usize,
    conv_tol: f64,
}

impl Default for CompletenessParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            terms: 1_000_000,
            conv_tol: 1e-5,
        }
    }
}

fn example11(p: CompletenessParams, opts: &Options) -> Result<Report, CliError> {
    let d = make_diag_metric(p.k)?;
    let tol = tol(opts)?.with_conv_tol(p.conv_tol)?;
    if p.terms <= DEFAULT_WINDOW + 1 {
        return Err(CliError::Config(format!(
            "terms must exceed {}",
            DEFAULT_WINDOW + 1
        )));
    }
    let trace: Vec<f64> = (1..=p.terms).map(|n| 1.0 / n as f64).collect();
    let punctured = Subset::new("(-inf, 0) U (0, inf)", false, |x: &f64| *x != 0.0);
    let interval = Subset::new("[0, 1]", true, |x: &f64| (0.0..=1.0).contains(x));
    let open = probe_completeness(&punctured, &trace, &0.0, &d, &tol, DEFAULT_WINDOW)?;
    let closed = probe_completeness(&interval, &trace, &0.0, &d, &tol, DEFAULT_WINDOW)?;
    let last = *trace.last().unwrap();

    let mut checks = Assertions::default();
    checks.check(
        "cauchy",
        open.cauchy,
        "1/n should pass the Cauchy surrogate",
    );
    checks.check(
        "converges_to_zero",
        open.converges_to_candidate,
        "tail should be within conv_tol of 0",
    );
    checks.check(
        "limit_outside_y",
        !open.limit_in_subset,
        "0 must fail the membership predicate",
    );
    checks.check(
        "punctured_line_incomplete",
        open.witnesses_incompleteness(),
        "the trace should witness incompleteness of Y",
    );
    checks.check(
        "interval_not_witnessed",
        !closed.witnesses_incompleteness(),
        "[0, 1] contains the limit",
    );
    let results = json!({
        "k": p.k,
        "terms": p.terms,
        "conv_tol": p.conv_tol,
        "last_distance_norm": d.dist_norm(&last, &0.0, &tol),
        "punctured_line": open,
        "unit_interval": closed,
    });
    Ok(finish(DemoId::Example11Completeness, results, checks))
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CompatParams {
    k: f64,
    n_max: usize,
    limit_tol: f64,
}

impl Default for CompatParams {
    fn default() -> Self {
        Self {
            k: 2.0,
            n_max: 1_000_000,
            limit_tol: 1e-5,
        }
    }
}

fn compat(p: CompatParams, opts: &Options) -> Result<Report, CliError> {
    let d = make_diag_metric(p.k)?;
    let tol = tol(opts)?;
    if p.n_max < 2 {
        return Err(CliError::Config("n_max must be at least 2".into()));
    }
    let pair = MappingPair::new(|x: &f64| compat_t(*x), |x: &f64| compat_s(*x));
    let seq: Vec<f64> = (1..=p.n_max).map(|n| 1.0 + 1.0 / n as f64).collect();
    let report = check_compatible(&pair, &d, &seq, &tol, p.limit_tol)?;
    let last = *seq.last().unwrap();
    let t_gap = d.dist_norm(&compat_t(last), &2.0, &tol);
    let s_gap = d.dist_norm(&compat_s(last), &2.0, &tol);
    let tail = *report.commutator_tail.last().unwrap();
    let expected = p.k.max(1.0);
    let weak = check_weakly_compatible(&pair, &d, &[3.0], &tol)?;
    let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * 1e-3).collect();
    let scan = coincidence_scan(&pair, &d, &grid, &tol);

    let mut checks = Assertions::default();
    checks.check(
        "t_limit",
        t_gap < p.limit_tol,
        format!("‖d(Tx_n, 2)‖ = {t_gap:e}"),
    );
    checks.check(
        "s_limit",
        s_gap < p.limit_tol,
        format!("‖d(Sx_n, 2)‖ = {s_gap:e}"),
    );
    checks.check(
        "commutator_tail",
        (tail - expected).abs() <= p.limit_tol,
        format!("‖d(TSx_n, STx_n)‖ = {tail} against max(1, k) = {expected}"),
    );
    checks.check(
        "incompatible",
        report.verdict == cstar_fixpoint::fixpoint::Compatibility::Incompatible,
        format!("verdict {:?}", report.verdict),
    );
    checks.check(
        "weakly_compatible_at_3",
        weak.weakly_compatible(),
        "TS3 should equal ST3",
    );
    let results = json!({
        "k": p.k,
        "n_max": p.n_max,
        "verdict": report.verdict,
        "commutator_tail_last": tail,
        "expected_tail": expected,
        "t_gap": t_gap,
        "s_gap": s_gap,
        "commutator_tail": report.commutator_tail,
        "weak_compatibility": weak,
        "coincidence_scan": scan,
    });
    Ok(finish(DemoId::CompatCounterexample, results, checks))
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct AffineParams {
    alpha: f64,
    beta: f64,
    k: f64,
    a: f64,
    starts: Vec<f64>,
    pairs: usize,
}

impl Default for AffineParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 1.0,
            k: 1.0,
            a: FRAC_1_SQRT_2,
            starts: vec![-100.0, -37.5, 0.0, 42.0, 100.0],
            pairs: DEFAULT_PAIR_COUNT,
        }
    }
}

/// First index where `step_norms` exceeds `ratioⁿ · step_norms[0] · (1 + slack)`.
fn bound_violation<P>(out: &SolveOutcome<P>, ratio: f64, slack: f64) -> Option<usize> {
    let s = &out.trace.step_norms;
    let s0 = *s.first()?;
    s.iter()
        .enumerate()
        .position(|(n, v)| *v > ratio.powi(n as i32) * s0 * (1.0 + slack))
}

fn thm21(p: AffineParams, opts: &Options) -> Result<Report, CliError> {
    let d = make_diag_metric(p.k)?;
    let tol = tol(opts)?;
    let (alpha, beta) = (p.alpha, p.beta);
    if p.starts.is_empty() {
        return Err(CliError::Config("starts must be non-empty".into()));
    }
    let pair = MappingPair::symmetric(move |x: &f64| alpha * x + beta);
    let a = MatrixElement::scalar(2, p.a);
    let sample = scalar_pairs(-100.0, 100.0, p.pairs, opts.seed);
    let cert = check_condition_21(&pair, &d, &a, &sample, &tol)?;
    let expected = beta / (1.0 - alpha);

    let mut checks = Assertions::default();
    checks.check(
        "certificate",
        cert.passed(),
        format!(
            "conjugation condition max violation {:e}",
            cert.max_violation
        ),
    );
    let mut runs = Vec::new();
    for &x0 in &p.starts {
        let out = solve_alternating(&pair, &d, &a, x0, &tol, max_iter(opts))?;
        let ok = out.point.is_some_and(|x| (x - expected).abs() <= 1e-8);
        checks.check(
            "converges",
            ok,
            format!("x0 = {x0}: {:?}, point {:?}", out.status, out.point),
        );
        let bound = bound_violation(&out, p.a * p.a, 1e-9);
        checks.check(
            "geometric_bound",
            bound.is_none(),
            format!("x0 = {x0}: step {bound:?} exceeds ‖a‖^(2n)·step_0"),
        );
        runs.push(json!({ "x0": x0, "report": out.report() }));
    }
    let results = json!({
        "expected_fixed_point": expected,
        "certificate": cert,
        "runs": runs,
    });
    Ok(finish(DemoId::Thm21Demo, results, checks))
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Example21Params {
    k: f64,
    x0: f64,
    scan_low: f64,
    scan_high: f64,
    scan_step: f64,
}

impl Default for Example21Params {
    fn default() -> Self {
        Self {
            k: 1.0,
            x0: 1.0,
            scan_low: -10.0,
            scan_high: 10.0,
            scan_step: 1e-3,
        }
    }
}

fn example21(p: Example21Params, opts: &Options) -> Result<Report, CliError> {
    let d = make_diag_metric(p.k)?;
    let tol = tol(opts)?;
    if !(p.scan_step > 0.0 && p.scan_low < p.scan_high) {
        return Err(CliError::Config("scan range or step is invalid".into()));
    }
    let k = p.k;
    let pair = MappingPair::new(
        move |x: &f64| example21_t(k, *x),
        move |x: &f64| example21_s(k, *x),
    )
    .with_section(move |y: &f64| example21_section(k, *y));
    let a = MatrixElement::scalar(2, FRAC_1_SQRT_2);
    let sample = scalar_pairs(-10.0, 10.0, DEFAULT_PAIR_COUNT, opts.seed);
    let cert23 = check_condition_23(&pair, &d, &a, &sample, &tol)?;
    let cert21 = check_condition_21(&pair, &d, &a, &sample, &tol)?;
    let jungck = solve_jungck(&pair, &d, &cert23, p.x0, &tol, max_iter(opts))?;
    let alternating = solve_alternating(&pair, &d, &a, p.x0, &tol, max_iter(opts))?;
    let steps = ((p.scan_high - p.scan_low) / p.scan_step).round() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| p.scan_low + i as f64 * p.scan_step)
        .collect();
    let scan = coincidence_scan(&pair, &d, &grid, &tol);

    let mut checks = Assertions::default();
    checks.check(
        "condition_23_holds",
        cert23.passed(),
        format!("max violation {:e}", cert23.max_violation),
    );
    checks.check(
        "jungck_not_converged",
        !jungck.converged(),
        format!("{:?}", jungck.status),
    );
    checks.check(
        "alternating_not_converged",
        !alternating.converged(),
        format!("{:?}", alternating.status),
    );
    checks.check(
        "scan_positive",
        scan.min > 0.0,
        format!("min ‖d(Tx, Sx)‖ = {:e} at {:?}", scan.min, scan.argmin),
    );
    let results = json!({
        "k": p.k,
        "condition_23": cert23,
        "condition_21": cert21,
        "jungck": jungck.report(),
        "alternating": alternating.report(),
        "coincidence_scan": {
            "low": p.scan_low, "high": p.scan_high, "step": p.scan_step,
            "points": grid.len(), "min": scan.min, "argmin": scan.argmin,
        },
    });
    Ok(finish(DemoId::Example21Failure, results, checks))
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct JungckParams {
    alpha: Option<f64>,
    beta: Option<f64>,
    a: f64,
    k: f64,
    x0: f64,
    pairs: usize,
}

impl Default for JungckParams {
    fn default() -> Self {
        Self {
            alpha: None,
            beta: None,
            a: 0.25,
            k: 2.0,
            x0: 7.0,
            pairs: DEFAULT_PAIR_COUNT,
        }
    }
}

/// Kannan: `Tx = x/5`. Chatterjea: `Tx = x/5 + 1`. `S` is the identity.
fn jungck_demo(id: DemoId, p: JungckParams, opts: &Options) -> Result<Report, CliError> {
    let d = make_diag_metric(p.k)?;
    let tol = tol(opts)?;
    let alpha = p.alpha.unwrap_or(0.2);
    let beta = p
        .beta
        .unwrap_or(if id == DemoId::KannanDemo { 0.0 } else { 1.0 });
    let pair =
        MappingPair::new(move |x: &f64| alpha * x + beta, |x: &f64| *x).with_section(|y: &f64| *y);
    let a = MatrixElement::scalar(2, p.a);
    let sample = scalar_pairs(-10.0, 10.0, p.pairs, opts.seed);
    let cert: ContractionCertificate<f64> = if id == DemoId::KannanDemo {
        check_condition_24(&pair, &d, &a, &sample, &tol)?
    } else {
        check_condition_25(&pair, &d, &a, &sample, &tol)?
    };
    let sn = neumann_inverse_one_minus(&a, &tol, 10_000)?;
    let one = MatrixElement::identity(2);
    let neumann_residual = operator_norm(&one.sub(&a)?.mul(&sn)?.sub(&one)?, &tol);
    let b_norm = operator_norm(&sn.mul(&a)?, &tol);
    let out = solve_jungck(&pair, &d, &cert, p.x0, &tol, max_iter(opts))?;
    let expected = beta / (1.0 - alpha);

    let mut checks = Assertions::default();
    checks.check(
        "certificate",
        cert.passed(),
        format!("max violation {:e}", cert.max_violation),
    );
    checks.check(
        "neumann",
        neumann_residual <= 1e-9,
        format!("‖(1-a)S_N - 1‖ = {neumann_residual:e}"),
    );
    checks.check(
        "common_fixed_point",
        out.common_fixed_point
            .is_some_and(|z| (z - expected).abs() <= 1e-8),
        format!(
            "{:?}, z = {:?}, expected {expected}",
            out.status, out.common_fixed_point
        ),
    );
    let bound = bound_violation(&out, b_norm, 10.0 * tol.eq_tol);
    checks.check(
        "geometric_bound",
        bound.is_none(),
        format!("step {bound:?} exceeds ‖b‖^n·step_0"),
    );
    let results = json!({
        "T": { "alpha": alpha, "beta": beta },
        "a": p.a,
        "b_norm": b_norm,
        "neumann_residual": neumann_residual,
        "expected_fixed_point": expected,
        "certificate": cert,
        "solve": out.report(),
    });
    Ok(finish(id, results, checks))
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct IntegralParams {
    #[serde(rename = "N")]
    n: usize,
    c: f64,
    k_lip: f64,
    pairs: usize,
}

impl Default for IntegralParams {
    fn default() -> Self {
        Self {
            n: 201,
            c: 0.5,
            k_lip: 0.5,
            pairs: 64,
        }
    }
}

fn integral_common(
    id: DemoId,
    p: &IntegralParams,
    kernel: Kernel,
    opts: &Options,
    exact: impl Fn(f64) -> f64,
    max_error: f64,
) -> Result<Report, CliError> {
    let tol = tol(opts)?;
    let prob = GridProblem::new(p.n, kernel.clone(), kernel, |_, _| 1.0, |t| t, p.k_lip)?;
    let hyp = verify_hypotheses(&prob, &prob.default_u_lattice(DEFAULT_LATTICE_SIDE), &tol);
    let metric = make_multiplication_metric(p.n)?;
    let pairs = grid_function_pairs(p.n, p.pairs, prob.lattice_bound() / 2.0, opts.seed);
    let cert = check_norm_contraction(&operator_pair(&prob), &metric, p.k_lip, &pairs, &tol)?;
    let out = solve_common(&prob, GridFunction::zeros(p.n), &tol, max_iter(opts))?;
    let err = out
        .point
        .as_ref()
        .map(|x| {
            prob.nodes()
                .iter()
                .zip(x.values())
                .map(|(&t, v)| (v - exact(t)).abs())
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::INFINITY);

    let mut checks = Assertions::default();
    checks.check("converged", out.converged(), format!("{:?}", out.status));
    checks.check(
        "max_node_error",
        err <= max_error,
        format!("{err:e} against {max_error:e}"),
    );
    checks.check(
        "hypotheses",
        hyp.all_pass(),
        format!("h1 {} h2 {} h3 {}", hyp.h1.pass, hyp.h2.pass, hyp.h3.pass),
    );
    checks.check(
        "norm_contraction",
        cert.passed(),
        format!("bound {} max violation {:e}", p.k_lip, cert.max_violation),
    );
    let results = json!({
        "N": p.n,
        "c": p.c,
        "k_lip": p.k_lip,
        "iterations": out.iterations,
        "max_node_error": err,
        "sup_integral_phi": hyp.h3.sup_integral,
        "hypotheses": hyp,
        "norm_contraction": {
            "checked_pairs": cert.checked_pairs,
            "max_violation": cert.max_violation,
            "pass": cert.passed(),
        },
        "solve": cstar_fixpoint::integral::solution_report(&prob, &out),
    });
    let mut report = finish(id, results, checks);
    if id == DemoId::IntegralLinear && (hyp.h3.sup_integral - 1.0).abs() > 1e-12 {
        report.exit_code = EXIT_ASSERTION;
    }
    Ok(report)
}

fn integral_linear(p: IntegralParams, opts: &Options) -> Result<Report, CliError> {
    // x = t + m with m = c(1/2 + m), so m = c / (2(1 - c)).
    let m = p.c / (2.0 * (1.0 - p.c));
    integral_common(
        DemoId::IntegralLinear,
        &p,
        Kernel::linear(p.c),
        opts,
        |t| t + m,
        1e-6,
    )
}

/// Shift `m` of the continuum solution `x = t + m` for the bounded
/// nonlinear kernel with `φ ≡ 1`: `m = (c/2) ln((1 + (1 + m)²) / (1 + m²))`.
fn nonlinear_shift(c: f64) -> f64 {
    let f = |m: f64| 0.5 * c * ((1.0 + (1.0 + m).powi(2)) / (1.0 + m * m)).ln() - m;
    let (mut lo, mut hi) = (-2.0, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn integral_nonlinear(p: IntegralParams, opts: &Options) -> Result<Report, CliError> {
    let m = nonlinear_shift(p.c);
    // Trapezoid error is O(1/N²).
    let max_error = 0.5 / (p.n as f64).powi(2) + 1e-8;
    integral_common(
        DemoId::IntegralNonlinear,
        &p,
        Kernel::bounded_nonlinear(p.c),
        opts,
        |t| t + m,
        max_error,
    )
}
