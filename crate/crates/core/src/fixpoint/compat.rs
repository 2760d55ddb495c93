use std::fmt::Debug;

use serde::Serialize;

use super::MappingPair;
use crate::error::{Error, Result};
use crate::metric::CStarMetric;
use crate::tolerance::Tolerances;

const TAIL_CAP: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Compatibility {
    /// `Tx_n` and `Sx_n` approach a common limit and `‖d(TSx_n, STx_n)‖ → 0`.
    Compatible,
    /// Common limit, but `‖d(TSx_n, STx_n)‖` stays away from 0.
    Incompatible,
    /// The sequence does not bring `Tx_n` and `Sx_n` together, so it says
    /// nothing about compatibility.
    Vacuous,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityReport<P> {
    pub verdict: Compatibility,
    /// `‖d(Tx_n, Sx_n)‖` over the last (at most 256) terms.
    pub coincidence_tail: Vec<f64>,
    /// `‖d(TSx_n, STx_n)‖` over the same terms.
    pub commutator_tail: Vec<f64>,
    /// `T x_N`, the estimate of the common limit.
    pub limit_estimate: Option<P>,
}

/// Classifies a sequence `x_n` with respect to compatibility of `(T, S)`:
/// the last term decides, with `limit_tol` as the zero threshold.
pub fn check_compatible<P, M>(
    pair: &MappingPair<'_, P>,
    metric: &M,
    sequence: &[P],
    tol: &Tolerances,
    limit_tol: f64,
) -> Result<CompatibilityReport<P>>
where
    P: Clone,
    M: CStarMetric<P>,
{
    if sequence.is_empty() {
        return Err(Error::TraceTooShort { len: 0, window: 1 });
    }
    if !(limit_tol >= 0.0 && limit_tol.is_finite()) {
        return Err(Error::InvalidTolerance {
            name: "limit_tol",
            value: limit_tol,
        });
    }
    let start = sequence.len().saturating_sub(TAIL_CAP);
    let mut coincidence_tail = Vec::new();
    let mut commutator_tail = Vec::new();
    for x in &sequence[start..] {
        let (tx, sx) = (pair.t(x), pair.s(x));
        coincidence_tail.push(metric.dist_norm(&tx, &sx, tol));
        commutator_tail.push(metric.dist_norm(&pair.t(&sx), &pair.s(&tx), tol));
    }
    let last_gap = *coincidence_tail.last().expect("non-empty");
    let last_comm = *commutator_tail.last().expect("non-empty");
    let (verdict, limit_estimate) = if !(last_gap <= limit_tol) {
        (Compatibility::Vacuous, None)
    } else if last_comm <= limit_tol {
        (
            Compatibility::Compatible,
            sequence.last().map(|x| pair.t(x)),
        )
    } else {
        (
            Compatibility::Incompatible,
            sequence.last().map(|x| pair.t(x)),
        )
    };
    Ok(CompatibilityReport {
        verdict,
        coincidence_tail,
        commutator_tail,
        limit_estimate,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakCompatibilityEntry<P> {
    pub point: P,
    /// `‖d(TSx, STx)‖`
    pub commutator: f64,
    pub commutes: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakCompatibilityReport<P> {
    pub entries: Vec<WeakCompatibilityEntry<P>>,
}

impl<P> WeakCompatibilityReport<P> {
    pub fn weakly_compatible(&self) -> bool {
        self.entries.iter().all(|e| e.commutes)
    }
}

/// Tests `TSx = STx` at each supplied coincidence point. Points that are
/// not coincidence points within `residual_tol` are rejected.
pub fn check_weakly_compatible<P, M>(
    pair: &MappingPair<'_, P>,
    metric: &M,
    coincidence_points: &[P],
    tol: &Tolerances,
) -> Result<WeakCompatibilityReport<P>>
where
    P: Clone + Debug,
    M: CStarMetric<P>,
{
    let limit = tol.residual_tol();
    let mut entries = Vec::with_capacity(coincidence_points.len());
    for x in coincidence_points {
        let (tx, sx) = (pair.t(x), pair.s(x));
        let residual = metric.dist_norm(&tx, &sx, tol);
        if !(residual <= limit) {
            return Err(Error::NotACoincidencePoint {
                witness: format!("{x:?}"),
                residual,
            });
        }
        let commutator = metric.dist_norm(&pair.t(&sx), &pair.s(&tx), tol);
        entries.push(WeakCompatibilityEntry {
            point: x.clone(),
            commutator,
            commutes: commutator <= limit,
        });
    }
    Ok(WeakCompatibilityReport { entries })
}

#[derive(Debug, Clone, Serialize)]
pub struct CoincidenceScan<P> {
    /// `min ‖d(Tx, Sx)‖` over the scanned points.
    pub min: f64,
    pub argmin: Option<P>,
}

pub fn coincidence_scan<P, M>(
    pair: &MappingPair<'_, P>,
    metric: &M,
    points: &[P],
    tol: &Tolerances,
) -> CoincidenceScan<P>
where
    P: Clone,
    M: CStarMetric<P>,
{
    let mut scan = CoincidenceScan {
        min: f64::INFINITY,
        argmin: None,
    };
    for x in points {
        let r = metric.dist_norm(&pair.t(x), &pair.s(x), tol);
        let r = if r.is_nan() { f64::INFINITY } else { r };
        if r < scan.min {
            scan.min = r;
            scan.argmin = Some(x.clone());
        }
    }
    scan
}
