use super::{ConditionKind, ContractionCertificate, MappingPair};
use crate::algebra::{in_commutant, is_positive, operator_norm, order_deficit, MatrixElement};
use crate::error::{Error, Result};
use crate::metric::CStarMetric;
use crate::par;
use crate::tolerance::Tolerances;

fn check_dims<P, M: CStarMetric<P>>(metric: &M, a: &MatrixElement) -> Result<()> {
    if a.dim() != metric.dim() {
        return Err(Error::DimensionMismatch {
            expected: metric.dim(),
            found: a.dim(),
        });
    }
    Ok(())
}

fn require_norm_below_one(a: &MatrixElement, tol: &Tolerances) -> Result<()> {
    let norm = operator_norm(a, tol);
    if norm < 1.0 {
        Ok(())
    } else {
        Err(Error::NormTooLarge { norm })
    }
}

/// `a ∈ A'_+` with `‖a‖ < 1/2`.
fn require_commuting_positive_half(a: &MatrixElement, tol: &Tolerances) -> Result<()> {
    if !is_positive(a, tol) {
        return Err(Error::BadCoefficient("a is not positive".into()));
    }
    if !in_commutant(a, tol) {
        return Err(Error::BadCoefficient("a is not in the commutant".into()));
    }
    let norm = operator_norm(a, tol);
    if !(norm < 0.5) {
        return Err(Error::BadCoefficient(format!(
            "‖a‖ = {norm} is not below 1/2"
        )));
    }
    Ok(())
}

/// Evaluates `violation` on every pair (in parallel) and keeps the maximum,
/// with the first pair attaining it as witness.
fn certify<P, F>(
    kind: ConditionKind,
    a: &MatrixElement,
    sample: &[(P, P)],
    violation: F,
) -> ContractionCertificate<P>
where
    P: Clone + Sync,
    F: Fn(&P, &P) -> f64 + Sync + Send,
{
    let violations = par::map(sample, |(x, y)| {
        let v = violation(x, y);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    });
    let mut max_violation = f64::NEG_INFINITY;
    let mut arg = None;
    for (i, &v) in violations.iter().enumerate() {
        if v > max_violation {
            max_violation = v;
            arg = Some(i);
        }
    }
    if sample.is_empty() {
        max_violation = 0.0;
    }
    ContractionCertificate {
        kind,
        a: a.clone(),
        checked_pairs: sample.len(),
        max_violation,
        witness: arg
            .filter(|_| max_violation > 0.0)
            .map(|i| sample[i].clone()),
    }
}

fn deficit(lhs: &MatrixElement, rhs: Result<MatrixElement>, tol: &Tolerances) -> f64 {
    rhs.and_then(|rhs| order_deficit(lhs, &rhs, tol))
        .unwrap_or(f64::INFINITY)
}

/// Samples `d(Tx, Sy) ⪯ a* d(x, y) a`.
pub fn check_condition_21<P, M>(
    pair: &MappingPair<'_, P>,
    metric: &M,
    a: &MatrixElement,
    sample: &[(P, P)],
    tol: &Tolerances,
) -> Result<ContractionCertificate<P>>
where
    P: Clone + Sync,
    M: CStarMetric<P> + Sync,
{
    check_dims(metric, a)?;
    require_norm_below_one(a, tol)?;
    Ok(certify(ConditionKind::Conjugation21, a, sample, |x, y| {
        let lhs = metric.eval(&pair.t(x), &pair.s(y));
        deficit(&lhs, metric.eval(x, y).conjugate_by(a), tol)
    }))
}

/// Samples `d(Tx, Ty) ⪯ a* d(Sx, Sy) a`.
pub fn check_condition_23<P, M>(
    pair: &MappingPair<'_, P>,
    metric: &M,
    a: &MatrixElement,
    sample: &[(P, P)],
    tol: &Tolerances,
) -> Result<ContractionCertificate<P>>
where
    P: Clone + Sync,
    M: CStarMetric<P> + Sync,
{
    check_dims(metric, a)?;
    require_norm_below_one(a, tol)?;
    Ok(certify(ConditionKind::Conjugation23, a, sample, |x, y| {
        let lhs = metric.eval(&pair.t(x), &pair.t(y));
        deficit(
            &lhs,
            metric.eval(&pair.s(x), &pair.s(y)).conjugate_by(a),
            tol,
        )
    }))
}

/// Samples the Kannan-type bound `d(Tx, Ty) ⪯ a d(Tx, Sx) + a d(Ty, Sy)`.
pub fn check_condition_24<P, M>(
    pair: &MappingPair<'_, P>,
    metric: &M,
    a: &MatrixElement,
    sample: &[(P, P)],
    tol: &Tolerances,
) -> Result<ContractionCertificate<P>>
where
    P: Clone + Sync,
    M: CStarMetric<P> + Sync,
{
    check_dims(metric, a)?;
    require_commuting_positive_half(a, tol)?;
    Ok(certify(ConditionKind::Kannan24, a, sample, |x, y| {
        let (tx, ty) = (pair.t(x), pair.t(y));
        let lhs = metric.eval(&tx, &ty);
        let rhs = a
            .mul(&metric.eval(&tx, &pair.s(x)))
            .and_then(|l| l.add(&a.mul(&metric.eval(&ty, &pair.s(y)))?));
        deficit(&lhs, rhs, tol)
    }))
}

/// Samples the Chatterjea-type bound `d(Tx, Ty) ⪯ a d(Tx, Sy) + a d(Sx, Ty)`.
pub fn check_condition_25<P, M>(
    pair: &MappingPair<'_, P>,
    metric: &M,
    a: &MatrixElement,
    sample: &[(P, P)],
    tol: &Tolerances,
) -> Result<ContractionCertificate<P>>
where
    P: Clone + Sync,
    M: CStarMetric<P> + Sync,
{
    check_dims(metric, a)?;
    require_commuting_positive_half(a, tol)?;
    Ok(certify(ConditionKind::Chatterjea25, a, sample, |x, y| {
        let (tx, ty) = (pair.t(x), pair.t(y));
        let lhs = metric.eval(&tx, &ty);
        let rhs = a
            .mul(&metric.eval(&tx, &pair.s(y)))
            .and_then(|l| l.add(&a.mul(&metric.eval(&pair.s(x), &ty))?));
        deficit(&lhs, rhs, tol)
    }))
}

/// Samples the scalar inequality `‖d(Tx, Sy)‖ ≤ bound · ‖d(x, y)‖`, with
/// slack `eq_tol · (1 + ‖d(x, y)‖)`.
pub fn check_norm_contraction<P, M>(
    pair: &MappingPair<'_, P>,
    metric: &M,
    norm_bound: f64,
    sample: &[(P, P)],
    tol: &Tolerances,
) -> Result<ContractionCertificate<P>>
where
    P: Clone + Sync,
    M: CStarMetric<P> + Sync,
{
    if !(norm_bound > 0.0 && norm_bound < 1.0) {
        return Err(Error::BadBound(norm_bound));
    }
    let a = MatrixElement::scalar(metric.dim(), norm_bound);
    Ok(certify(
        ConditionKind::NormContraction,
        &a,
        sample,
        |x, y| {
            let lhs = metric.dist_norm(&pair.t(x), &pair.s(y), tol);
            let base = metric.dist_norm(x, y, tol);
            lhs - norm_bound * base - tol.eq_tol * (1.0 + base)
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::make_diag_metric;
    use crate::sampling::{scalar_pairs, DEFAULT_PAIR_COUNT};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn pairs() -> Vec<(f64, f64)> {
        scalar_pairs(-10.0, 10.0, DEFAULT_PAIR_COUNT, 11)
    }

    fn half_root() -> MatrixElement {
        MatrixElement::scalar(2, std::f64::consts::FRAC_1_SQRT_2)
    }

    #[test]
    fn affine_pair_satisfies_21() {
        let d = make_diag_metric(2.0).unwrap();
        let pair = MappingPair::symmetric(|x: &f64| x / 2.0 + 1.0);
        let sample = scalar_pairs(-10.0, 10.0, 100, 3);
        let cert = check_condition_21(&pair, &d, &half_root(), &sample, &tol()).unwrap();
        assert!(cert.passed(), "{cert:?}");
        assert_eq!(cert.checked_pairs, 100);
        assert!(cert.witness.is_none());
    }

    #[test]
    fn expansion_fails_21() {
        let d = make_diag_metric(2.0).unwrap();
        let pair = MappingPair::symmetric(|x: &f64| 2.0 * x);
        let cert = check_condition_21(&pair, &d, &MatrixElement::scalar(2, 0.9), &pairs(), &tol())
            .unwrap();
        assert!(!cert.passed());
        let (x, y) = cert.witness.unwrap();
        assert!(x != y);
    }

    #[test]
    fn norm_too_large_is_rejected() {
        let d = make_diag_metric(1.0).unwrap();
        let pair = MappingPair::symmetric(|x: &f64| *x);
        assert!(matches!(
            check_condition_21(&pair, &d, &MatrixElement::identity(2), &pairs(), &tol()),
            Err(Error::NormTooLarge { .. })
        ));
        assert!(matches!(
            check_condition_21(&pair, &d, &MatrixElement::scalar(3, 0.5), &pairs(), &tol()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn condition_23_cases() {
        let d = make_diag_metric(1.0).unwrap();
        let good = MappingPair::new(|x: &f64| x / 4.0, |x: &f64| x / 2.0);
        assert!(
            check_condition_23(&good, &d, &half_root(), &pairs(), &tol())
                .unwrap()
                .passed()
        );
        let bad = MappingPair::new(|x: &f64| *x, |x: &f64| x / 2.0);
        assert!(
            !check_condition_23(&bad, &d, &half_root(), &pairs(), &tol())
                .unwrap()
                .passed()
        );
    }

    #[test]
    fn condition_24_cases() {
        let d = make_diag_metric(2.0).unwrap();
        let quarter = MatrixElement::scalar(2, 0.25);
        let fifth = MappingPair::new(|x: &f64| x / 5.0, |x: &f64| *x);
        assert!(check_condition_24(&fifth, &d, &quarter, &pairs(), &tol())
            .unwrap()
            .passed());

        let ident = MappingPair::symmetric(|x: &f64| *x);
        // Distinct points with T = S = id give d(x, y) against 0.
        assert!(!check_condition_24(&ident, &d, &quarter, &pairs(), &tol())
            .unwrap()
            .passed());

        // |x - y| ≤ 2 · (1/4) fails once the pair is more than 1/2 apart.
        let shift = MappingPair::new(|x: &f64| x + 1.0, |x: &f64| *x);
        let cert = check_condition_24(&shift, &d, &quarter, &pairs(), &tol()).unwrap();
        assert!(!cert.passed());
        let (x, y) = cert.witness.unwrap();
        assert!((x - y).abs() > 0.5);
    }

    #[test]
    fn condition_24_coefficient_checks() {
        let d = make_diag_metric(1.0).unwrap();
        let pair = MappingPair::new(|x: &f64| x / 5.0, |x: &f64| *x);
        for a in [
            MatrixElement::scalar(2, 0.5),
            MatrixElement::scalar(2, -0.25),
            MatrixElement::diag(&[0.1, 0.2]),
        ] {
            assert!(matches!(
                check_condition_24(&pair, &d, &a, &pairs(), &tol()),
                Err(Error::BadCoefficient(_))
            ));
        }
    }

    #[test]
    fn condition_25_cases() {
        let d = make_diag_metric(2.0).unwrap();
        let quarter = MatrixElement::scalar(2, 0.25);
        let ident = MappingPair::symmetric(|x: &f64| *x);
        assert!(!check_condition_25(&ident, &d, &quarter, &pairs(), &tol())
            .unwrap()
            .passed());
        let fifth = MappingPair::new(|x: &f64| x / 5.0, |x: &f64| *x);
        assert!(check_condition_25(&fifth, &d, &quarter, &pairs(), &tol())
            .unwrap()
            .passed());

        // At (1, -1): lhs d(-1, 1) = 2·diag(1, k), rhs a·(d(-1,-1) + d(1,1)) = 0.
        let flip = MappingPair::new(|x: &f64| -x, |x: &f64| *x);
        let small = MatrixElement::scalar(2, 0.1);
        let cert = check_condition_25(&flip, &d, &small, &[(1.0, -1.0)], &tol()).unwrap();
        assert!(!cert.passed());
        assert_eq!(cert.witness, Some((1.0, -1.0)));
        assert!(!check_condition_25(&flip, &d, &small, &pairs(), &tol())
            .unwrap()
            .passed());
    }

    #[test]
    fn norm_contraction_cases() {
        let d = make_diag_metric(2.0).unwrap();
        let half = MappingPair::symmetric(|x: &f64| x / 2.0);
        assert!(check_norm_contraction(&half, &d, 0.6, &pairs(), &tol())
            .unwrap()
            .passed());
        let ident = MappingPair::symmetric(|x: &f64| *x);
        assert!(!check_norm_contraction(&ident, &d, 0.9, &pairs(), &tol())
            .unwrap()
            .passed());
        assert!(matches!(
            check_norm_contraction(&half, &d, 1.0, &pairs(), &tol()),
            Err(Error::BadBound(_))
        ));
        assert!(check_norm_contraction(&half, &d, 0.0, &pairs(), &tol()).is_err());
    }

    #[test]
    fn nan_mapping_is_a_violation() {
        let d = make_diag_metric(1.0).unwrap();
        let pair = MappingPair::symmetric(|_: &f64| f64::NAN);
        let cert = check_condition_21(&pair, &d, &half_root(), &pairs(), &tol()).unwrap();
        assert_eq!(cert.max_violation, f64::INFINITY);
        assert!(!cert.passed());
    }
}
