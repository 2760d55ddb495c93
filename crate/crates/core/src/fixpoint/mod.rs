//! Contraction-condition checkers, iteration engines for common fixed points
//! and coincidence points, and compatibility checks for mapping pairs.

mod compat;
mod conditions;
mod solve;

use std::sync::Arc;

use serde::Serialize;

use crate::algebra::MatrixElement;

pub use compat::{
    check_compatible, check_weakly_compatible, coincidence_scan, CoincidenceScan, Compatibility,
    CompatibilityReport, WeakCompatibilityEntry, WeakCompatibilityReport,
};
pub use conditions::{
    check_condition_21, check_condition_23, check_condition_24, check_condition_25,
    check_norm_contraction,
};
pub use solve::{
    solve_alternating, solve_jungck, solve_norm_contraction, solve_power_iterate, DEFAULT_MAX_ITER,
    DIVERGENCE_FACTOR,
};

/// A self-map of the point set, shareable across threads.
pub type Map<'a, P> = Arc<dyn Fn(&P) -> P + Send + Sync + 'a>;

/// The two mappings `T` and `S`, plus an optional section of `S`: a map
/// returning, for `y` in the range of `S`, some `x` with `S(x) = y`.
#[derive(Clone)]
pub struct MappingPair<'a, P> {
    t: Map<'a, P>,
    s: Map<'a, P>,
    section: Option<Map<'a, P>>,
}

impl<'a, P> MappingPair<'a, P> {
    pub fn new(
        t: impl Fn(&P) -> P + Send + Sync + 'a,
        s: impl Fn(&P) -> P + Send + Sync + 'a,
    ) -> Self {
        Self {
            t: Arc::new(t),
            s: Arc::new(s),
            section: None,
        }
    }

    pub fn from_maps(t: Map<'a, P>, s: Map<'a, P>) -> Self {
        Self {
            t,
            s,
            section: None,
        }
    }

    /// The pair `(T, T)`.
    pub fn symmetric(t: impl Fn(&P) -> P + Send + Sync + 'a) -> Self {
        let t: Map<'a, P> = Arc::new(t);
        Self {
            s: t.clone(),
            t,
            section: None,
        }
    }

    pub fn with_section(mut self, section: impl Fn(&P) -> P + Send + Sync + 'a) -> Self {
        self.section = Some(Arc::new(section));
        self
    }

    pub fn with_section_map(mut self, section: Map<'a, P>) -> Self {
        self.section = Some(section);
        self
    }

    pub fn t(&self, x: &P) -> P {
        (self.t)(x)
    }

    pub fn s(&self, x: &P) -> P {
        (self.s)(x)
    }

    pub fn section(&self) -> Option<&Map<'a, P>> {
        self.section.as_ref()
    }

    pub fn has_section(&self) -> bool {
        self.section.is_some()
    }
}

/// Which contractive condition a certificate attests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionKind {
    /// `d(Tx, Sy) ⪯ a* d(x, y) a`, `‖a‖ < 1`.
    Conjugation21,
    /// `d(Tx, Ty) ⪯ a* d(Sx, Sy) a`, `‖a‖ < 1`.
    Conjugation23,
    /// `d(Tx, Ty) ⪯ a d(Tx, Sx) + a d(Ty, Sy)`, `a ∈ A'_+`, `‖a‖ < 1/2`.
    Kannan24,
    /// `d(Tx, Ty) ⪯ a d(Tx, Sy) + a d(Sx, Ty)`, `a ∈ A'_+`, `‖a‖ < 1/2`.
    Chatterjea25,
    /// `‖d(Tx, Sy)‖ ≤ ‖a‖ ‖d(x, y)‖`, `‖a‖ < 1`.
    NormContraction,
}

/// Sample-based evidence that a pair satisfies a contractive condition.
/// A passing certificate is evidence over the sample, not a proof.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionCertificate<P> {
    pub kind: ConditionKind,
    pub a: MatrixElement,
    pub checked_pairs: usize,
    /// Largest violation over the sample, net of tolerances; `≤ 0` passes.
    pub max_violation: f64,
    /// The pair attaining `max_violation` when it is positive.
    pub witness: Option<(P, P)>,
}

impl<P> ContractionCertificate<P> {
    pub fn passed(&self) -> bool {
        self.max_violation <= 0.0
    }
}

/// Step record of a solver run.
#[derive(Debug, Clone, Serialize)]
pub struct IterationTrace<P> {
    /// Iterates `x_0, x_1, …`.
    pub points: Vec<P>,
    /// For Jungck runs, the images `S x_0, S x_1, …`; empty otherwise.
    pub images: Vec<P>,
    /// Step norms up to and including the first one at or below `conv_tol`.
    pub step_norms: Vec<f64>,
    /// A-priori geometric bound for each entry of `step_norms`.
    pub bound_norms: Vec<f64>,
    /// Step norms after the first small step, while the iteration is driven
    /// to floating-point stagnation and the limit is verified. These sit at
    /// rounding level and are kept apart from the geometric bound.
    pub refinement_norms: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    DivergenceDetected,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Residuals {
    /// `‖d(T x*, x*)‖`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_residual: Option<f64>,
    /// `‖d(S x*, x*)‖`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_residual: Option<f64>,
    /// `‖d(T q, S q)‖` at a coincidence point `q`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coincidence_residual: Option<f64>,
    /// `‖d(T x*, x*)‖` for the base map of a power-iterate run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_residual: Option<f64>,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        [
            self.t_residual,
            self.s_residual,
            self.coincidence_residual,
            self.base_residual,
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome<P> {
    pub status: SolveStatus,
    /// The fixed point (alternating runs) or coincidence point (Jungck runs).
    pub point: Option<P>,
    pub residuals: Residuals,
    pub iterations: usize,
    pub trace: IterationTrace<P>,
    pub certificate: Option<ContractionCertificate<P>>,
    /// `z = Tq = Sq` for a Jungck coincidence point `q`.
    pub point_of_coincidence: Option<P>,
    /// `z` again, once weak compatibility at `q` held and `z` verified as a
    /// common fixed point.
    pub common_fixed_point: Option<P>,
    pub diagnostics: Vec<String>,
}

/// Wire form of a solver run.
#[derive(Debug, Serialize)]
pub struct SolverReport<'a, P> {
    pub status: SolveStatus,
    pub point: Option<&'a P>,
    pub residuals: Residuals,
    pub iterations: usize,
    pub step_norms: &'a [f64],
    pub bound_norms: &'a [f64],
    pub refinement_norms: &'a [f64],
    pub certificate: Option<&'a ContractionCertificate<P>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point_of_coincidence: Option<&'a P>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub common_fixed_point: Option<&'a P>,
    pub diagnostics: &'a [String],
}

impl<P> SolveOutcome<P> {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn with_certificate(mut self, cert: ContractionCertificate<P>) -> Self {
        self.certificate = Some(cert);
        self
    }

    pub fn report(&self) -> SolverReport<'_, P> {
        SolverReport {
            status: self.status,
            point: self.point.as_ref(),
            residuals: self.residuals,
            iterations: self.iterations,
            step_norms: &self.trace.step_norms,
            bound_norms: &self.trace.bound_norms,
            refinement_norms: &self.trace.refinement_norms,
            certificate: self.certificate.as_ref(),
            point_of_coincidence: self.point_of_coincidence.as_ref(),
            common_fixed_point: self.common_fixed_point.as_ref(),
            diagnostics: &self.diagnostics,
        }
    }
}
