//! `solve` and `check` on JSON configs.

use cstar_fixpoint::fixpoint::{
    check_condition_21, check_condition_23, check_condition_24, check_condition_25,
    check_norm_contraction, solve_alternating, solve_jungck, solve_power_iterate, MappingPair,
    SolveOutcome,
};
use cstar_fixpoint::integral::{
    operator_pair, solution_report, solve_common, verify_hypotheses, GridProblem,
    DEFAULT_LATTICE_SIDE,
};
use cstar_fixpoint::metric::{make_multiplication_metric, CStarMetric, GridFunction};
use cstar_fixpoint::sampling::{grid_function_pairs, scalar_pairs};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    max_iter, parse_check, parse_solve, tolerances, CheckConfig, ConditionName, GridStart,
    NamedStart, SampleSpec, ScalarCheck, SolveConfig,
};
use crate::mappings::MappingSpec;
use crate::{CliError, Options, Report, EXIT_FAILED, EXIT_OK};

fn validate(specs: &[&MappingSpec]) -> Result<(), CliError> {
    for s in specs {
        s.validate().map_err(CliError::Config)?;
    }
    Ok(())
}

fn pair(t: &MappingSpec, s: &MappingSpec) -> MappingPair<'static, f64> {
    MappingPair::from_maps(t.to_map(), s.to_map())
}

fn sample(spec: &SampleSpec, opts: &Options) -> Result<Vec<(f64, f64)>, CliError> {
    spec.validate()?;
    Ok(scalar_pairs(spec.low, spec.high, spec.count, opts.seed))
}

fn to_json<T: Serialize>(value: &T) -> Result<Value, CliError> {
    Ok(serde_json::to_value(value)?)
}

fn fmt_point<P: Serialize>(p: Option<&P>) -> String {
    p.and_then(|p| serde_json::to_string(p).ok())
        .unwrap_or_else(|| "none".into())
}

fn solver_report(mode: &str, out: &SolveOutcome<f64>) -> Result<Report, CliError> {
    let mut json = to_json(&out.report())?;
    json["mode"] = json!(mode);
    let mut summary = format!(
        "{mode}: {:?} after {} iterations, point {}",
        out.status,
        out.iterations,
        fmt_point(out.point.as_ref())
    );
    if let Some(z) = &out.common_fixed_point {
        summary.push_str(&format!(", common fixed point {z}"));
    }
    for d in &out.diagnostics {
        summary.push_str(&format!("\n  {d}"));
    }
    Ok(Report {
        json,
        summary,
        exit_code: if out.converged() {
            EXIT_OK
        } else {
            EXIT_FAILED
        },
    })
}

pub fn run_solve(config: Value, opts: &Options) -> Result<Report, CliError> {
    match parse_solve(config)? {
        SolveConfig::Alternating {
            metric,
            t,
            s,
            a,
            x0,
            tol,
            max_iter: mi,
        } => {
            validate(&[&t, &s])?;
            let d = metric.build()?;
            let tol = tolerances(tol, opts)?;
            let out = solve_alternating(
                &pair(&t, &s),
                &d,
                &a.build(d.dim()),
                x0,
                &tol,
                max_iter(mi, opts),
            )?;
            solver_report("alternating", &out)
        }
        SolveConfig::Jungck {
            metric,
            t,
            s,
            section,
            condition,
            a,
            x0,
            sample: spec,
            tol,
            max_iter: mi,
        } => {
            validate(&[&t, &s, &section])?;
            let d = metric.build()?;
            let tol = tolerances(tol, opts)?;
            let a = a.build(d.dim());
            let pair = pair(&t, &s).with_section_map(section.to_map());
            let pairs = sample(&spec, opts)?;
            let cert = match condition {
                ConditionName::Eq23 => check_condition_23(&pair, &d, &a, &pairs, &tol)?,
                ConditionName::Eq24 => check_condition_24(&pair, &d, &a, &pairs, &tol)?,
                ConditionName::Eq25 => check_condition_25(&pair, &d, &a, &pairs, &tol)?,
                other => {
                    return Err(CliError::Config(format!(
                        "jungck mode needs condition eq23, eq24 or eq25, got {other:?}"
                    )))
                }
            };
            let mut out = solve_jungck(&pair, &d, &cert, x0, &tol, max_iter(mi, opts))?;
            if !cert.passed() {
                out.diagnostics.insert(
                    0,
                    format!(
                        "certificate failed on the sample: max violation {:e}",
                        cert.max_violation
                    ),
                );
            }
            solver_report("jungck", &out)
        }
        SolveConfig::PowerIterate {
            metric,
            t,
            m,
            n,
            a,
            x0,
            tol,
            max_iter: mi,
        } => {
            validate(&[&t])?;
            let d = metric.build()?;
            let tol = tolerances(tol, opts)?;
            let out = solve_power_iterate(
                move |x: &f64| t.apply(*x),
                &d,
                &a.build(d.dim()),
                m,
                n,
                x0,
                &tol,
                max_iter(mi, opts),
            )?;
            solver_report("power_iterate", &out)
        }
        SolveConfig::Integral {
            problem,
            x0,
            tol,
            max_iter: mi,
        } => {
            let tol = tolerances(tol, opts)?;
            let p = GridProblem::from_config(&problem)?;
            let x0 = match x0 {
                GridStart::Named(NamedStart::Zero) => GridFunction::zeros(p.grid_size()),
                GridStart::Named(NamedStart::G) => p.g().clone(),
                GridStart::Values(v) => GridFunction::new(v)?,
            };
            let hyp = verify_hypotheses(&p, &p.default_u_lattice(DEFAULT_LATTICE_SIDE), &tol);
            let out = solve_common(&p, x0, &tol, max_iter(mi, opts))?;
            let mut json = to_json(&solution_report(&p, &out))?;
            json["mode"] = json!("integral");
            json["hypotheses"] = to_json(&hyp)?;
            let mut summary = format!(
                "integral: {:?} after {} iterations on N = {}, hypotheses {}",
                out.status,
                out.iterations,
                p.grid_size(),
                if hyp.all_pass() { "pass" } else { "fail" }
            );
            for d in &out.diagnostics {
                summary.push_str(&format!("\n  {d}"));
            }
            Ok(Report {
                json,
                summary,
                exit_code: if out.converged() {
                    EXIT_OK
                } else {
                    EXIT_FAILED
                },
            })
        }
    }
}

fn scalar_check(name: ConditionName, cfg: ScalarCheck, opts: &Options) -> Result<Report, CliError> {
    validate(&[&cfg.t, &cfg.s])?;
    let d = cfg.metric.build()?;
    let tol = tolerances(cfg.tol, opts)?;
    let a = cfg.a.build(d.dim());
    let pair = pair(&cfg.t, &cfg.s);
    let pairs = sample(&cfg.sample, opts)?;
    let cert = match name {
        ConditionName::Eq21 => check_condition_21(&pair, &d, &a, &pairs, &tol)?,
        ConditionName::Eq23 => check_condition_23(&pair, &d, &a, &pairs, &tol)?,
        ConditionName::Eq24 => check_condition_24(&pair, &d, &a, &pairs, &tol)?,
        ConditionName::Eq25 => check_condition_25(&pair, &d, &a, &pairs, &tol)?,
        ConditionName::Norm => unreachable!("norm checks carry a bound, not a coefficient"),
    };
    certificate_report(&cert)
}

fn certificate_report(
    cert: &cstar_fixpoint::fixpoint::ContractionCertificate<f64>,
) -> Result<Report, CliError> {
    let mut json = to_json(cert)?;
    json["pass"] = json!(cert.passed());
    let mut summary = format!(
        "{:?}: {} on {} pairs, max violation {:e}",
        cert.kind,
        if cert.passed() { "pass" } else { "FAIL" },
        cert.checked_pairs,
        cert.max_violation
    );
    if let Some((x, y)) = cert.witness {
        summary.push_str(&format!(", witness ({x}, {y})"));
    }
    Ok(Report {
        json,
        summary,
        exit_code: if cert.passed() { EXIT_OK } else { EXIT_FAILED },
    })
}

pub fn run_check(config: Value, opts: &Options) -> Result<Report, CliError> {
    match parse_check(config)? {
        CheckConfig::Eq21(c) => scalar_check(ConditionName::Eq21, c, opts),
        CheckConfig::Eq23(c) => scalar_check(ConditionName::Eq23, c, opts),
        CheckConfig::Eq24(c) => scalar_check(ConditionName::Eq24, c, opts),
        CheckConfig::Eq25(c) => scalar_check(ConditionName::Eq25, c, opts),
        CheckConfig::Norm {
            metric,
            t,
            s,
            bound,
            sample: spec,
            tol,
        } => {
            validate(&[&t, &s])?;
            let d = metric.build()?;
            let tol = tolerances(tol, opts)?;
            let pairs = sample(&spec, opts)?;
            let cert = check_norm_contraction(&pair(&t, &s), &d, bound, &pairs, &tol)?;
            certificate_report(&cert)
        }
        CheckConfig::Integral {
            problem,
            pairs,
            tol,
        } => {
            let tol = tolerances(tol, opts)?;
            let p = GridProblem::from_config(&problem)?;
            let hyp = verify_hypotheses(&p, &p.default_u_lattice(DEFAULT_LATTICE_SIDE), &tol);
            let metric = make_multiplication_metric(p.grid_size())?;
            let sample =
                grid_function_pairs(p.grid_size(), pairs, p.lattice_bound() / 2.0, opts.seed);
            let cert =
                check_norm_contraction(&operator_pair(&p), &metric, p.k_lip(), &sample, &tol)?;
            let pass = hyp.all_pass() && cert.passed();
            let json = json!({
                "pass": pass,
                "hypotheses": to_json(&hyp)?,
                "norm_contraction": {
                    "bound": p.k_lip(),
                    "checked_pairs": cert.checked_pairs,
                    "max_violation": cert.max_violation,
                    "pass": cert.passed(),
                },
            });
            let summary = format!(
                "integral: h1 {}, h2 {}, h3 {} with sup ∫φ = {}, norm contraction {}{}",
                verdict(hyp.h1.pass),
                verdict(hyp.h2.pass),
                verdict(hyp.h3.pass),
                hyp.h3.sup_integral,
                verdict(cert.passed()),
                if hyp.h2.pass && hyp.h2.kernels_coincide {
                    "; h2 forces K1 = K2"
                } else {
                    ""
                }
            );
            Ok(Report {
                json,
                summary,
                exit_code: if pass { EXIT_OK } else { EXIT_FAILED },
            })
        }
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}
