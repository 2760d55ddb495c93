use super::{
    ConditionKind, ContractionCertificate, IterationTrace, MappingPair, Residuals, SolveOutcome,
    SolveStatus,
};
use crate::algebra::{neumann_inverse_one_minus, operator_norm, MatrixElement};
use crate::error::{Error, Result};
use crate::metric::CStarMetric;
use crate::tolerance::Tolerances;

pub const DEFAULT_MAX_ITER: usize = 10_000;
/// A step this many times larger than the first nonzero step counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

const NEUMANN_MAX_TERMS: usize = 10_000;

enum Signal {
    Continue,
    Candidate,
    Diverged,
}

/// Tracks step norms, splits them into the geometric and refinement phases,
/// and flags stopping candidates.
struct Monitor {
    ratio: f64,
    conv_tol: f64,
    /// Offset between cycles compared for stagnation.
    lag: usize,
    first_nonzero: Option<f64>,
    cycles: Vec<f64>,
    refining: bool,
    step_norms: Vec<f64>,
    bound_norms: Vec<f64>,
    refinement_norms: Vec<f64>,
}

impl Monitor {
    fn new(ratio: f64, conv_tol: f64, lag: usize) -> Self {
        Self {
            ratio,
            conv_tol,
            lag,
            first_nonzero: None,
            cycles: Vec::new(),
            refining: false,
            step_norms: Vec::new(),
            bound_norms: Vec::new(),
            refinement_norms: Vec::new(),
        }
    }

    fn push(&mut self, step: f64, cycle: Option<f64>) -> Signal {
        if !step.is_finite() {
            self.record(step, false);
            return Signal::Diverged;
        }
        if let Some(first) = self.first_nonzero {
            if step > DIVERGENCE_FACTOR * first {
                self.record(step, false);
                return Signal::Diverged;
            }
        } else if step > 0.0 {
            self.first_nonzero = Some(step);
        }
        let small = cycle.is_some_and(|c| c <= self.conv_tol);
        self.record(step, small);
        let Some(cycle) = cycle else {
            return Signal::Continue;
        };
        self.cycles.push(cycle);
        let n = self.cycles.len();
        let stagnated = cycle == 0.0 || (n > self.lag && cycle >= self.cycles[n - 1 - self.lag]);
        if small && stagnated {
            Signal::Candidate
        } else {
            Signal::Continue
        }
    }

    fn record(&mut self, step: f64, small: bool) {
        if self.refining {
            self.refinement_norms.push(step);
        } else {
            let n = self.step_norms.len();
            self.step_norms.push(step);
            let s0 = self.step_norms[0];
            self.bound_norms.push(self.ratio.powi(n as i32) * s0);
            self.refining = small;
        }
    }

    fn last_step(&self) -> f64 {
        self.refinement_norms
            .last()
            .or(self.step_norms.last())
            .copied()
            .unwrap_or(0.0)
    }

    fn into_trace<P>(self, points: Vec<P>, images: Vec<P>) -> IterationTrace<P> {
        IterationTrace {
            points,
            images,
            step_norms: self.step_norms,
            bound_norms: self.bound_norms,
            refinement_norms: self.refinement_norms,
        }
    }
}

fn within(value: f64, limit: f64) -> bool {
    value <= limit
}

fn outcome<P>(
    status: SolveStatus,
    point: Option<P>,
    residuals: Residuals,
    trace: IterationTrace<P>,
    diagnostics: Vec<String>,
) -> SolveOutcome<P> {
    SolveOutcome {
        status,
        point,
        residuals,
        iterations: trace.points.len().saturating_sub(1),
        trace,
        certificate: None,
        point_of_coincidence: None,
        common_fixed_point: None,
        diagnostics,
    }
}

fn stop_note(status: SolveStatus, iterations: usize, last_step: f64) -> String {
    match status {
        SolveStatus::MaxIterations => {
            format!("no verified limit after {iterations} iterations; last step norm {last_step:e}")
        }
        SolveStatus::DivergenceDetected => format!(
            "step norm {last_step:e} at iteration {iterations} is non-finite or exceeds \
             {DIVERGENCE_FACTOR:e} times the first nonzero step"
        ),
        SolveStatus::Converged => String::new(),
    }
}

/// Shared loop for `x_{2n+1} = F x_{2n}`, `x_{2n+2} = G x_{2n+1}`. `verify`
/// returns residuals at a candidate limit and whether they are acceptable.
#[allow(clippy::too_many_arguments)]
fn alternate<P, M>(
    f: &(dyn Fn(&P) -> P + Sync),
    g: &(dyn Fn(&P) -> P + Sync),
    metric: &M,
    ratio: f64,
    x0: P,
    tol: &Tolerances,
    max_iter: usize,
    verify: &dyn Fn(&P) -> (Residuals, bool),
) -> SolveOutcome<P>
where
    P: Clone,
    M: CStarMetric<P>,
{
    let mut monitor = Monitor::new(ratio, tol.conv_tol, 2);
    let mut points = vec![x0];
    let mut prev_step: Option<f64> = None;
    let mut last_rejected: Option<Residuals> = None;
    let mut status = SolveStatus::MaxIterations;
    let mut limit = None;
    let mut residuals = Residuals::default();

    for n in 0..max_iter {
        let x = &points[n];
        let next = if n % 2 == 0 { f(x) } else { g(x) };
        let step = metric.dist_norm(&next, x, tol);
        points.push(next);
        let cycle = prev_step.map(|p| p + step);
        prev_step = Some(step);
        match monitor.push(step, cycle) {
            Signal::Continue => {}
            Signal::Diverged => {
                status = SolveStatus::DivergenceDetected;
                break;
            }
            Signal::Candidate => {
                let candidate = &points[n + 1];
                let (res, ok) = verify(candidate);
                if ok {
                    status = SolveStatus::Converged;
                    limit = Some(candidate.clone());
                    residuals = res;
                    break;
                }
                last_rejected = Some(res);
            }
        }
    }

    let mut diagnostics = Vec::new();
    if status != SolveStatus::Converged {
        let iterations = points.len() - 1;
        diagnostics.push(stop_note(status, iterations, monitor.last_step()));
        if let Some(res) = last_rejected {
            diagnostics.push(format!(
                "steps fell below conv_tol but residuals {:e} exceeded {:e}",
                res.max(),
                tol.residual_tol()
            ));
        }
    }
    outcome(
        status,
        limit,
        residuals,
        monitor.into_trace(points, Vec::new()),
        diagnostics,
    )
}

fn fixed_point_residuals<P, M>(
    pair: &MappingPair<'_, P>,
    metric: &M,
    x: &P,
    tol: &Tolerances,
) -> Residuals
where
    M: CStarMetric<P>,
{
    Residuals {
        t_residual: Some(metric.dist_norm(&pair.t(x), x, tol)),
        s_residual: Some(metric.dist_norm(&pair.s(x), x, tol)),
        ..Residuals::default()
    }
}

fn all_within(res: &Residuals, limit: f64) -> bool {
    [
        res.t_residual,
        res.s_residual,
        res.coincidence_residual,
        res.base_residual,
    ]
    .into_iter()
    .flatten()
    .all(|r| within(r, limit))
}

/// Alternating iteration `x_{2n+1} = T x_{2n}`, `x_{2n+2} = S x_{2n+1}` for
/// a pair meeting `d(Tx, Sy) ⪯ a* d(x, y) a`. Each step is bounded by
/// `‖a‖²` times the previous one.
pub fn solve_alternating<P, M>(
    pair: &MappingPair<'_, P>,
    metric: &M,
    a: &MatrixElement,
    x0: P,
    tol: &Tolerances,
    max_iter: usize,
) -> Result<SolveOutcome<P>>
where
    P: Clone,
    M: CStarMetric<P>,
{
    tol.validate()?;
    let norm = operator_norm(a, tol);
    if !(norm < 1.0) {
        return Err(Error::NormTooLarge { norm });
    }
    let verify = |x: &P| {
        let res = fixed_point_residuals(pair, metric, x, tol);
        let ok = all_within(&res, tol.residual_tol());
        (res, ok)
    };
    Ok(alternate(
        &|x: &P| pair.t(x),
        &|x: &P| pair.s(x),
        metric,
        norm * norm,
        x0,
        tol,
        max_iter,
        &verify,
    ))
}

/// Successive approximation under `‖d(Tx, Sy)‖ ≤ bound · ‖d(x, y)‖`.
pub fn solve_norm_contraction<P, M>(
    pair: &MappingPair<'_, P>,
    metric: &M,
    bound: f64,
    x0: P,
    tol: &Tolerances,
    max_iter: usize,
) -> Result<SolveOutcome<P>>
where
    P: Clone,
    M: CStarMetric<P>,
{
    tol.validate()?;
    if !(bound > 0.0 && bound < 1.0) {
        return Err(Error::BadBound(bound));
    }
    let verify = |x: &P| {
        let res = fixed_point_residuals(pair, metric, x, tol);
        let ok = all_within(&res, tol.residual_tol());
        (res, ok)
    };
    Ok(alternate(
        &|x: &P| pair.t(x),
        &|x: &P| pair.s(x),
        metric,
        bound,
        x0,
        tol,
        max_iter,
        &verify,
    ))
}

/// Alternating iteration on the powers `(T^m, T^n)`. On convergence the
/// limit is also checked against `T` itself.
#[allow(clippy::too_many_arguments)]
pub fn solve_power_iterate<'a, P, M>(
    t: impl Fn(&P) -> P + Send + Sync + 'a,
    metric: &M,
    a: &MatrixElement,
    m: u32,
    n: u32,
    x0: P,
    tol: &Tolerances,
    max_iter: usize,
) -> Result<SolveOutcome<P>>
where
    P: Clone,
    M: CStarMetric<P>,
{
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "powers must be positive, got m = {m}, n = {n}"
        )));
    }
    tol.validate()?;
    let norm = operator_norm(a, tol);
    if !(norm < 1.0) {
        return Err(Error::NormTooLarge { norm });
    }
    let power = |k: u32, x: &P| {
        let mut y = t(x);
        for _ in 1..k {
            y = t(&y);
        }
        y
    };
    let tm = |x: &P| power(m, x);
    let tn = |x: &P| power(n, x);
    let verify = |x: &P| {
        let res = Residuals {
            t_residual: Some(metric.dist_norm(&tm(x), x, tol)),
            s_residual: Some(metric.dist_norm(&tn(x), x, tol)),
            base_residual: Some(metric.dist_norm(&t(x), x, tol)),
            ..Residuals::default()
        };
        let ok = all_within(&res, tol.residual_tol());
        (res, ok)
    };
    Ok(alternate(
        &tm,
        &tn,
        metric,
        norm * norm,
        x0,
        tol,
        max_iter,
        &verify,
    ))
}

/// Jungck iteration `S x_{n+1} = T x_n` using the pair's section of `S`.
/// Converges to a coincidence point `q`; when the pair is weakly compatible
/// at `q`, `z = Tq` is verified as the common fixed point.
pub fn solve_jungck<P, M>(
    pair: &MappingPair<'_, P>,
    metric: &M,
    certificate: &ContractionCertificate<P>,
    x0: P,
    tol: &Tolerances,
    max_iter: usize,
) -> Result<SolveOutcome<P>>
where
    P: Clone,
    M: CStarMetric<P>,
{
    tol.validate()?;
    let section = pair.section().ok_or(Error::NoSection)?.clone();
    let a = &certificate.a;
    let ratio = match certificate.kind {
        ConditionKind::Conjugation23 => {
            let norm = operator_norm(a, tol);
            if !(norm < 1.0) {
                return Err(Error::NormTooLarge { norm });
            }
            norm * norm
        }
        ConditionKind::Kannan24 | ConditionKind::Chatterjea25 => {
            let inv = neumann_inverse_one_minus(a, tol, NEUMANN_MAX_TERMS)?;
            operator_norm(&inv.mul(a)?, tol)
        }
        other => {
            return Err(Error::WrongCertificate(format!(
                "{other:?} does not drive a Jungck iteration"
            )))
        }
    };

    let residual_tol = tol.residual_tol();
    let mut monitor = Monitor::new(ratio, tol.conv_tol, 1);
    let mut diagnostics = Vec::new();
    let mut points = vec![x0];
    let mut images = vec![pair.s(&points[0])];
    let mut section_defect = 0.0f64;
    let mut status = SolveStatus::MaxIterations;
    let mut last_rejected = None;

    for n in 0..max_iter {
        let tx = pair.t(&points[n]);
        let x_next = section(&tx);
        let sx_next = pair.s(&x_next);
        let defect = metric.dist_norm(&sx_next, &tx, tol);
        if !within(defect, tol.conv_tol) {
            section_defect = section_defect.max(if defect.is_nan() {
                f64::INFINITY
            } else {
                defect
            });
        }
        let step = metric.dist_norm(&sx_next, &images[n], tol);
        points.push(x_next);
        images.push(sx_next);
        match monitor.push(step, Some(step)) {
            Signal::Continue => {}
            Signal::Diverged => {
                status = SolveStatus::DivergenceDetected;
                break;
            }
            Signal::Candidate => {
                let q = &points[n + 1];
                let r = metric.dist_norm(&pair.t(q), &pair.s(q), tol);
                if within(r, residual_tol) {
                    status = SolveStatus::Converged;
                    break;
                }
                last_rejected = Some(r);
            }
        }
    }

    if section_defect > 0.0 {
        diagnostics.push(format!(
            "section defect: ‖d(S(section(Tx)), Tx)‖ reached {section_defect:e}"
        ));
    }

    if status != SolveStatus::Converged {
        let iterations = points.len() - 1;
        diagnostics.push(stop_note(status, iterations, monitor.last_step()));
        if let Some(r) = last_rejected {
            diagnostics.push(format!(
                "steps fell below conv_tol but the coincidence residual {r:e} exceeded {residual_tol:e}"
            ));
        }
        let trace = monitor.into_trace(points, images);
        return Ok(
            outcome(status, None, Residuals::default(), trace, diagnostics)
                .with_certificate(certificate.clone()),
        );
    }

    let q = points.last().cloned().expect("trace is non-empty");
    let tq = pair.t(&q);
    let sq = pair.s(&q);
    let mut residuals = Residuals {
        coincidence_residual: Some(metric.dist_norm(&tq, &sq, tol)),
        ..Residuals::default()
    };
    let z = tq;
    let weak = metric.dist_norm(&pair.t(&sq), &pair.s(&z), tol);
    let mut common = None;
    if within(weak, residual_tol) {
        let fixed = fixed_point_residuals(pair, metric, &z, tol);
        residuals.t_residual = fixed.t_residual;
        residuals.s_residual = fixed.s_residual;
        if all_within(&fixed, residual_tol) {
            common = Some(z.clone());
        } else {
            diagnostics.push(format!(
                "weakly compatible at the coincidence point but z has fixed-point residual {:e}",
                fixed.max()
            ));
        }
    } else {
        diagnostics.push(format!(
            "not weakly compatible at the coincidence point: ‖d(TSq, STq)‖ = {weak:e}"
        ));
    }

    let trace = monitor.into_trace(points, images);
    let mut out = outcome(
        SolveStatus::Converged,
        Some(q),
        residuals,
        trace,
        diagnostics,
    )
    .with_certificate(certificate.clone());
    out.point_of_coincidence = Some(z);
    out.common_fixed_point = common;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixpoint::{check_condition_23, check_condition_24, check_condition_25};
    use crate::metric::make_diag_metric;
    use crate::sampling::scalar_pairs;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn half_root() -> MatrixElement {
        MatrixElement::scalar(2, std::f64::consts::FRAC_1_SQRT_2)
    }

    fn assert_geometric<P>(out: &SolveOutcome<P>) {
        let t = &out.trace;
        assert_eq!(t.step_norms.len(), t.bound_norms.len());
        for (s, b) in t.step_norms.iter().zip(&t.bound_norms) {
            assert!(*s <= b * (1.0 + 1e-9) + 1e-300, "step {s} above bound {b}");
        }
    }

    #[test]
    fn affine_pair_reaches_two() {
        let d = make_diag_metric(2.0).unwrap();
        let pair = MappingPair::symmetric(|x: &f64| x / 2.0 + 1.0);
        for x0 in [-7.0, 0.0, 3.0, 100.0] {
            let out =
                solve_alternating(&pair, &d, &half_root(), x0, &tol(), DEFAULT_MAX_ITER).unwrap();
            assert!(out.converged(), "{:?}", out.diagnostics);
            assert!((out.point.unwrap() - 2.0).abs() <= 1e-9);
            assert!(out.residuals.max() <= 1e-8);
            assert_geometric(&out);
        }
    }

    #[test]
    fn distinct_maps_share_the_fixed_point() {
        let d = make_diag_metric(1.0).unwrap();
        let pair = MappingPair::new(|x: &f64| x / 2.0 + 1.0, |x: &f64| x / 3.0 + 4.0 / 3.0);
        let out = solve_alternating(&pair, &d, &half_root(), 10.0, &tol(), 500).unwrap();
        assert!(out.converged());
        assert!((out.point.unwrap() - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn fixed_start_stops_immediately() {
        let d = make_diag_metric(1.0).unwrap();
        let pair = MappingPair::symmetric(|x: &f64| x / 2.0 + 1.0);
        let out = solve_alternating(&pair, &d, &half_root(), 2.0, &tol(), 100).unwrap();
        assert!(out.converged());
        assert_eq!(out.iterations, 2);
    }

    #[test]
    fn expansion_diverges() {
        let d = make_diag_metric(1.0).unwrap();
        let pair = MappingPair::symmetric(|x: &f64| 3.0 * x + 1.0);
        let out = solve_alternating(&pair, &d, &half_root(), 1.0, &tol(), 1000).unwrap();
        assert_eq!(out.status, SolveStatus::DivergenceDetected);
        assert!(out.point.is_none());
        assert!(!out.diagnostics.is_empty());
    }

    #[test]
    fn rotation_hits_max_iterations() {
        let d = make_diag_metric(1.0).unwrap();
        let pair = MappingPair::symmetric(|x: &f64| -x);
        let out = solve_alternating(&pair, &d, &half_root(), 1.0, &tol(), 50).unwrap();
        assert_eq!(out.status, SolveStatus::MaxIterations);
        assert_eq!(out.iterations, 50);
    }

    #[test]
    fn rejects_large_coefficient() {
        let d = make_diag_metric(1.0).unwrap();
        let pair = MappingPair::symmetric(|x: &f64| *x);
        assert!(
            solve_alternating(&pair, &d, &MatrixElement::identity(2), 0.0, &tol(), 10).is_err()
        );
        assert!(solve_norm_contraction(&pair, &d, 1.5, 0.0, &tol(), 10).is_err());
    }

    #[test]
    fn power_iterate_recovers_base_fixed_point() {
        let d = make_diag_metric(1.0).unwrap();
        let out = solve_power_iterate(
            |x: &f64| 0.9 * x + 0.1,
            &d,
            &MatrixElement::scalar(2, 0.9),
            3,
            5,
            -4.0,
            &tol(),
            DEFAULT_MAX_ITER,
        )
        .unwrap();
        assert!(out.converged(), "{:?}", out.diagnostics);
        assert!((out.point.unwrap() - 1.0).abs() < 1e-9);
        assert!(out.residuals.base_residual.unwrap() <= 1e-8);
    }

    #[test]
    fn jungck_kannan_quarter() {
        let d = make_diag_metric(2.0).unwrap();
        let pair =
            MappingPair::new(|x: &f64| x / 5.0 + 1.0, |x: &f64| *x).with_section(|y: &f64| *y);
        let a = MatrixElement::scalar(2, 0.25);
        let sample = scalar_pairs(-10.0, 10.0, 256, 1);
        let cert = check_condition_24(&pair, &d, &a, &sample, &tol()).unwrap();
        assert!(cert.passed(), "{cert:?}");
        let out = solve_jungck(&pair, &d, &cert, 0.0, &tol(), DEFAULT_MAX_ITER).unwrap();
        assert!(out.converged(), "{:?}", out.diagnostics);
        assert!((out.common_fixed_point.unwrap() - 1.25).abs() < 1e-9);
        assert_geometric(&out);
        let ratio = out.trace.bound_norms[1] / out.trace.bound_norms[0];
        assert!((ratio - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn jungck_conjugation_with_nontrivial_s() {
        // T x = x/4 + 1, S x = x/2: coincidence at q = 4 with Tq = Sq = 2,
        // but TS4 = 1.5 and ST4 = 1, so no common fixed point.
        let d = make_diag_metric(1.0).unwrap();
        let pair = MappingPair::new(|x: &f64| x / 4.0 + 1.0, |x: &f64| x / 2.0)
            .with_section(|y: &f64| 2.0 * y);
        let sample = scalar_pairs(-10.0, 10.0, 256, 2);
        let cert = check_condition_23(&pair, &d, &half_root(), &sample, &tol()).unwrap();
        assert!(cert.passed());
        let out = solve_jungck(&pair, &d, &cert, 0.0, &tol(), DEFAULT_MAX_ITER).unwrap();
        assert!(out.converged());
        assert!((out.point.unwrap() - 4.0).abs() < 1e-8);
        assert!((out.point_of_coincidence.unwrap() - 2.0).abs() < 1e-9);
        assert!(out.common_fixed_point.is_none());
        assert!(out.diagnostics.iter().any(|m| m.contains("weakly")));
    }

    #[test]
    fn jungck_chatterjea_identity_s() {
        let d = make_diag_metric(1.0).unwrap();
        let pair =
            MappingPair::new(|x: &f64| x / 5.0 + 2.0, |x: &f64| *x).with_section(|y: &f64| *y);
        let a = MatrixElement::scalar(2, 0.25);
        let sample = scalar_pairs(-5.0, 5.0, 256, 3);
        let cert = check_condition_25(&pair, &d, &a, &sample, &tol()).unwrap();
        assert!(cert.passed());
        let out = solve_jungck(&pair, &d, &cert, 9.0, &tol(), DEFAULT_MAX_ITER).unwrap();
        assert!((out.common_fixed_point.unwrap() - 2.5).abs() < 1e-9);
    }

    #[test]
    fn jungck_needs_section_and_matching_certificate() {
        let d = make_diag_metric(1.0).unwrap();
        let pair = MappingPair::new(|x: &f64| x / 4.0, |x: &f64| *x);
        let cert = ContractionCertificate::<f64> {
            kind: ConditionKind::Conjugation23,
            a: half_root(),
            checked_pairs: 0,
            max_violation: 0.0,
            witness: None,
        };
        assert_eq!(
            solve_jungck(&pair, &d, &cert, 1.0, &tol(), 10).unwrap_err(),
            Error::NoSection
        );
        let pair = pair.with_section(|y: &f64| *y);
        let wrong = ContractionCertificate {
            kind: ConditionKind::Conjugation21,
            ..cert
        };
        assert!(matches!(
            solve_jungck(&pair, &d, &wrong, 1.0, &tol(), 10),
            Err(Error::WrongCertificate(_))
        ));
    }

    #[test]
    fn jump_at_origin_never_settles() {
        let k = 1.0;
        let d = make_diag_metric(k).unwrap();
        let pair = MappingPair::new(
            move |x: &f64| if *x == 0.0 { 1.0 } else { k * x / 2.0 },
            move |x: &f64| if *x == 0.0 { 2.0 } else { k * x },
        )
        .with_section(move |y: &f64| if *y == 0.0 { 0.0 } else { y / k });
        let cert = ContractionCertificate::<f64> {
            kind: ConditionKind::Conjugation23,
            a: half_root(),
            checked_pairs: 0,
            max_violation: 0.0,
            witness: None,
        };
        let out = solve_jungck(&pair, &d, &cert, 1.0, &tol(), DEFAULT_MAX_ITER).unwrap();
        assert_eq!(out.status, SolveStatus::MaxIterations);
        assert!(out.point.is_none());
    }
}
