//! Matrix-valued metrics, their axioms on finite samples, and finite-trace
//! surrogates for convergence and the Cauchy property.

use serde::{Deserialize, Serialize};

use crate::algebra::{operator_norm, order_deficit, MatrixElement};
use crate::error::{Error, Result};
use crate::par;
use crate::tolerance::Tolerances;

/// Window of look-ahead offsets `p` used by [`is_cauchy`].
pub const DEFAULT_WINDOW: usize = 16;
/// Fraction of a trace treated as its tail.
pub const TAIL_FRACTION: f64 = 0.25;

/// A metric `d: X × X → M_n(ℂ)` with values in the positive cone.
pub trait CStarMetric<P: ?Sized> {
    /// Dimension `n` of the algebra the metric takes values in.
    fn dim(&self) -> usize;

    fn eval(&self, x: &P, y: &P) -> MatrixElement;

    /// `‖d(x, y)‖`. Implementations with structure override this to skip the
    /// eigenvalue work.
    fn dist_norm(&self, x: &P, y: &P, tol: &Tolerances) -> f64 {
        operator_norm(&self.eval(x, y), tol)
    }
}

/// `d(x, y) = diag(|x - y|, k·|x - y|)` on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagMetric {
    k: f64,
}

pub fn make_diag_metric(k: f64) -> Result<DiagMetric> {
    if k > 0.0 && k.is_finite() {
        Ok(DiagMetric { k })
    } else {
        Err(Error::NonPositiveK(k))
    }
}

impl DiagMetric {
    pub fn k(&self) -> f64 {
        self.k
    }
}

impl CStarMetric<f64> for DiagMetric {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &f64, y: &f64) -> MatrixElement {
        let d = (x - y).abs();
        MatrixElement::diag(&[d, self.k * d])
    }

    fn dist_norm(&self, x: &f64, y: &f64, _tol: &Tolerances) -> f64 {
        self.k.max(1.0) * (x - y).abs()
    }
}

/// A real function sampled at `N` uniform nodes `t_i = i / (N - 1)` of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GridFunction(Vec<f64>);

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(format!(
                "grid value {} at node {i}",
                values[i]
            )));
        }
        Ok(Self(values))
    }

    /// Samples `f` on the uniform grid; non-finite samples are rejected.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(n));
        }
        Self::new(uniform_nodes(n).into_iter().map(f).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// Constructs without the finiteness check; solvers use this for
    /// intermediate iterates and check finiteness themselves.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Grid analogue of the essential supremum of `|f - g|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "grid functions on different grids");
        self.0.iter().zip(&other.0).fold(0.0, |m: f64, (a, b)| {
            let d = (a - b).abs();
            if d.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(d)
            }
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl TryFrom<Vec<f64>> for GridFunction {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<GridFunction> for Vec<f64> {
    fn from(g: GridFunction) -> Self {
        g.0
    }
}

pub fn uniform_nodes(n: usize) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { 1.0 } else { i as f64 * h })
        .collect()
}

/// `d(f, g) = M_{|f - g|}`, realized as the `N × N` diagonal matrix of
/// `|f(t_i) - g(t_i)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplicationMetric {
    n: usize,
}

pub fn make_multiplication_metric(n: usize) -> Result<MultiplicationMetric> {
    if n >= 2 {
        Ok(MultiplicationMetric { n })
    } else {
        Err(Error::GridTooSmall(n))
    }
}

impl MultiplicationMetric {
    pub fn grid_size(&self) -> usize {
        self.n
    }
}

impl CStarMetric<GridFunction> for MultiplicationMetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, f: &GridFunction, g: &GridFunction) -> MatrixElement {
        assert_eq!(f.len(), self.n, "grid function has wrong length");
        assert_eq!(g.len(), self.n, "grid function has wrong length");
        let d: Vec<f64> = f.0.iter().zip(&g.0).map(|(a, b)| (a - b).abs()).collect();
        MatrixElement::diag(&d)
    }

    fn dist_norm(&self, f: &GridFunction, g: &GridFunction, _tol: &Tolerances) -> f64 {
        f.max_abs_diff(g)
    }
}

/// Adapter turning any closure into a metric; used for ad-hoc and
/// deliberately broken metrics.
pub struct FnMetric<F> {
    dim: usize,
    f: F,
}

impl<F> FnMetric<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<P, F> CStarMetric<P> for FnMetric<F>
where
    F: Fn(&P, &P) -> MatrixElement,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &P, y: &P) -> MatrixElement {
        (self.f)(x, y)
    }
}

/// Shape of a point in the sample-set wire format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointKind {
    RealScalar,
    RealVector { dimension: usize },
    GridFunction { grid_size: usize },
}

/// A point of a sample set, tagged by its [`PointKind`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Point {
    RealScalar { value: f64 },
    RealVector { values: Vec<f64> },
    GridFunction { values: GridFunction },
}

impl Point {
    pub fn kind(&self) -> PointKind {
        match self {
            Point::RealScalar { .. } => PointKind::RealScalar,
            Point::RealVector { values } => PointKind::RealVector {
                dimension: values.len(),
            },
            Point::GridFunction { values } => PointKind::GridFunction {
                grid_size: values.len(),
            },
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Point::RealScalar { value } => Some(*value),
            _ => None,
        }
    }

    pub fn as_grid(&self) -> Option<&GridFunction> {
        match self {
            Point::GridFunction { values } => Some(values),
            _ => None,
        }
    }
}

/// Parses a sample-set JSON array and checks that every point has the same kind.
pub fn parse_sample_set(json: &str) -> Result<Vec<Point>> {
    let points: Vec<Point> = serde_json::from_str(json)
        .map_err(|e| Error::InvalidParameter(format!("sample set: {e}")))?;
    if let Some(first) = points.first() {
        let kind = first.kind();
        if let Some(bad) = points.iter().find(|p| p.kind() != kind) {
            return Err(Error::InvalidParameter(format!(
                "mixed point kinds {kind:?} and {:?}",
                bad.kind()
            )));
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness<P> {
    pub x: P,
    pub y: P,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<P>,
    /// Amount by which the axiom fails beyond tolerance.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomResult<P> {
    pub axiom: u8,
    pub pass: bool,
    pub witness: Option<Witness<P>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport<P> {
    pub axioms: Vec<AxiomResult<P>>,
    pub triples_checked: usize,
    /// Distinct sample points at (near-)zero distance. The backward direction
    /// of `d(x, y) = 0 ⇔ x = y` is not decidable in floating point, so these
    /// are reported rather than failed.
    pub warnings: Vec<String>,
}

impl<P> AxiomReport<P> {
    pub fn all_pass(&self) -> bool {
        self.axioms.iter().all(|a| a.pass)
    }

    pub fn axiom(&self, which: u8) -> &AxiomResult<P> {
        &self.axioms[(which - 1) as usize]
    }
}

/// Checks the four metric axioms over every ordered pair and triple drawn
/// from `sample`.
pub fn verify_axioms<P, M>(m: &M, sample: &[P], tol: &Tolerances) -> Result<AxiomReport<P>>
where
    P: Clone + PartialEq + Sync,
    M: CStarMetric<P> + Sync,
{
    if sample.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    let s = sample.len();
    let mut triples = Vec::with_capacity(s * s * s);
    for i in 0..s {
        for j in 0..s {
            for l in 0..s {
                triples.push((i, j, l));
            }
        }
    }
    Ok(check_index_triples(m, sample, &triples, tol))
}

/// Checks the four axioms on each supplied triple `(x, y, z)`: positivity
/// and symmetry on its pairs, `d(x, x) = 0`, and the triangle inequality
/// through `z`.
pub fn verify_axioms_on_triples<P, M>(
    m: &M,
    triples: &[(P, P, P)],
    tol: &Tolerances,
) -> AxiomReport<P>
where
    P: Clone + PartialEq + Sync,
    M: CStarMetric<P> + Sync,
{
    let mut points = Vec::with_capacity(3 * triples.len());
    for (x, y, z) in triples {
        points.push(x.clone());
        points.push(y.clone());
        points.push(z.clone());
    }
    let idx: Vec<_> = (0..triples.len())
        .map(|t| (3 * t, 3 * t + 1, 3 * t + 2))
        .collect();
    check_index_triples(m, &points, &idx, tol)
}

struct TripleCheck {
    violations: [f64; 4],
    near_zero_distinct: bool,
}

fn check_index_triples<P, M>(
    m: &M,
    points: &[P],
    triples: &[(usize, usize, usize)],
    tol: &Tolerances,
) -> AxiomReport<P>
where
    P: Clone + PartialEq + Sync,
    M: CStarMetric<P> + Sync,
{
    let zero = MatrixElement::zeros(m.dim());
    let checks = par::map(triples, |&(i, j, l)| {
        let (x, y, z) = (&points[i], &points[j], &points[l]);
        let dxy = m.eval(x, y);
        let dyx = m.eval(y, x);
        let dxz = m.eval(x, z);
        let dzy = m.eval(z, y);
        let dxx = m.eval(x, x);

        let positivity = [&dxy, &dxz, &dzy]
            .iter()
            .map(|d| order_deficit(&zero, d, tol).unwrap_or(f64::INFINITY))
            .fold(f64::NEG_INFINITY, f64::max);
        let identity = nan_as_inf(dxx.max_abs()) - tol.eq_tol;
        let symmetry = dyx
            .sub(&dxy)
            .map_or(f64::INFINITY, |d| nan_as_inf(d.max_abs()))
            - tol.eq_tol;
        let triangle = dxz
            .add(&dzy)
            .and_then(|rhs| order_deficit(&dxy, &rhs, tol))
            .unwrap_or(f64::INFINITY);
        let near_zero_distinct = x != y && dxy.max_abs() <= tol.eq_tol;
        TripleCheck {
            violations: [positivity, identity, symmetry, triangle],
            near_zero_distinct,
        }
    });

    let mut axioms: Vec<AxiomResult<P>> = (1..=4)
        .map(|axiom| AxiomResult {
            axiom,
            pass: true,
            witness: None,
        })
        .collect();
    let mut warnings = Vec::new();
    for (check, &(i, j, l)) in checks.iter().zip(triples) {
        for (k, &violation) in check.violations.iter().enumerate() {
            let result = &mut axioms[k];
            if violation > 0.0 && result.pass {
                result.pass = false;
                let (x, y) = match k {
                    1 => (points[i].clone(), points[i].clone()),
                    _ => (points[i].clone(), points[j].clone()),
                };
                result.witness = Some(Witness {
                    x,
                    y,
                    z: (k == 3 || k == 0).then(|| points[l].clone()),
                    violation,
                });
            }
        }
        if check.near_zero_distinct && warnings.len() < 16 {
            warnings.push(format!(
                "sample points {i} and {j} are distinct but at distance ≤ eq_tol"
            ));
        }
    }
    AxiomReport {
        axioms,
        triples_checked: triples.len(),
        warnings,
    }
}

fn nan_as_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn tail_start(len: usize, window: usize) -> usize {
    let tail = ((len as f64) * TAIL_FRACTION).ceil() as usize;
    (len - tail.max(1)).min(len - window - 1)
}

/// Finite surrogate for the Cauchy property: every increment
/// `‖d(x_{n+p}, x_n)‖` with `p ≤ window` and `x_n` in the tail is at most
/// `conv_tol`.
pub fn is_cauchy<P, M>(trace: &[P], m: &M, tol: &Tolerances, window: usize) -> Result<bool>
where
    M: CStarMetric<P>,
{
    if window == 0 || trace.len() <= window {
        return Err(Error::TraceTooShort {
            len: trace.len(),
            window,
        });
    }
    let start = tail_start(trace.len(), window);
    for n in start..trace.len() {
        for p in 1..=window {
            if n + p >= trace.len() {
                break;
            }
            if !(m.dist_norm(&trace[n + p], &trace[n], tol) <= tol.conv_tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff `‖d(x_n, limit)‖ ≤ conv_tol` over the tail of the trace.
pub fn converges_to<P, M>(trace: &[P], limit: &P, m: &M, tol: &Tolerances) -> Result<bool>
where
    M: CStarMetric<P>,
{
    if trace.is_empty() {
        return Err(Error::TraceTooShort { len: 0, window: 0 });
    }
    let tail = (((trace.len() as f64) * TAIL_FRACTION).ceil() as usize).max(1);
    Ok(trace[trace.len() - tail..]
        .iter()
        .all(|x| m.dist_norm(x, limit, tol) <= tol.conv_tol))
}

/// A subset `Y ⊆ X` given by a membership predicate. Completeness can't be
/// decided from finite data, so it is a caller assertion.
pub struct Subset<'a, P> {
    pub name: String,
    pub asserted_complete: bool,
    contains: Box<dyn Fn(&P) -> bool + Send + Sync + 'a>,
}

impl<'a, P> Subset<'a, P> {
    pub fn new(
        name: impl Into<String>,
        asserted_complete: bool,
        contains: impl Fn(&P) -> bool + Send + Sync + 'a,
    ) -> Self {
        Self {
            name: name.into(),
            asserted_complete,
            contains: Box::new(contains),
        }
    }

    pub fn contains(&self, p: &P) -> bool {
        (self.contains)(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CompletenessProbe {
    pub trace_in_subset: bool,
    pub cauchy: bool,
    pub converges_to_candidate: bool,
    pub limit_in_subset: bool,
}

impl CompletenessProbe {
    /// A Cauchy sequence inside `Y` whose limit lies outside `Y`: the trace
    /// witnesses that `Y` is not complete.
    pub fn witnesses_incompleteness(&self) -> bool {
        self.trace_in_subset && self.cauchy && self.converges_to_candidate && !self.limit_in_subset
    }
}

pub fn probe_completeness<P, M>(
    subset: &Subset<'_, P>,
    trace: &[P],
    candidate_limit: &P,
    m: &M,
    tol: &Tolerances,
    window: usize,
) -> Result<CompletenessProbe>
where
    M: CStarMetric<P>,
{
    Ok(CompletenessProbe {
        trace_in_subset: trace.iter().all(|p| subset.contains(p)),
        cauchy: is_cauchy(trace, m, tol, window)?,
        converges_to_candidate: converges_to(trace, candidate_limit, m, tol)?,
        limit_in_subset: subset.contains(candidate_limit),
    })
}
