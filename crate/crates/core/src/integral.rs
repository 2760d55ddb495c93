//! The coupled integral-equation system
//!
//! ```text
//! x(t) = ∫_E K_1(t, s, x(s)) ds + g(t)
//! x(t) = ∫_E K_2(t, s, x(s)) ds + g(t),    E = [0, 1]
//! ```
//!
//! discretized on a uniform grid with trapezoid weights and solved by
//! successive approximation under the multiplication-operator metric.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixpoint::{
    check_norm_contraction, solve_norm_contraction, MappingPair, SolveOutcome, SolverReport,
};
use crate::metric::{make_multiplication_metric, uniform_nodes, GridFunction};
use crate::par;
use crate::sampling::{grid_function_pairs, DEFAULT_SEED};
use crate::tolerance::Tolerances;

/// Side of the default `u` lattice used for the kernel Lipschitz hypothesis.
pub const DEFAULT_LATTICE_SIDE: usize = 17;
/// Pairs sampled for the norm-contraction certificate attached by [`solve_common`].
pub const CERTIFICATE_PAIRS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `K(t, s, u) = c·φ(t, s)·u`
    Linear,
    /// `K(t, s, u) = c·φ(t, s)·u / (1 + u²)`
    BoundedNonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub c: f64,
}

/// User-registered kernel: `(t, s, φ(t, s), u) ↦ K(t, s, u)`.
pub type KernelFn = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Kernel {
    Builtin(KernelSpec),
    Custom { name: String, f: KernelFn },
}

impl Kernel {
    pub fn linear(c: f64) -> Self {
        Kernel::Builtin(KernelSpec {
            family: KernelFamily::Linear,
            c,
        })
    }

    pub fn bounded_nonlinear(c: f64) -> Self {
        Kernel::Builtin(KernelSpec {
            family: KernelFamily::BoundedNonlinear,
            c,
        })
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Kernel::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    #[inline]
    pub fn eval(&self, t: f64, s: f64, phi: f64, u: f64) -> f64 {
        match self {
            Kernel::Builtin(spec) => match spec.family {
                KernelFamily::Linear => spec.c * phi * u,
                KernelFamily::BoundedNonlinear => spec.c * phi * u / (1.0 + u * u),
            },
            Kernel::Custom { f, .. } => f(t, s, phi, u),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Kernel::Builtin(spec) => format!("{:?}(c = {})", spec.family, spec.c),
            Kernel::Custom { name, .. } => name.clone(),
        }
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case")]
pub enum PhiSpec {
    Constant {
        value: f64,
    },
    /// `scale·t·s`
    Product {
        scale: f64,
    },
    /// `1 - |t - s|`
    Tent,
}

impl PhiSpec {
    pub fn eval(&self, t: f64, s: f64) -> f64 {
        match *self {
            PhiSpec::Constant { value } => value,
            PhiSpec::Product { scale } => scale * t * s,
            PhiSpec::Tent => 1.0 - (t - s).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case")]
pub enum GSpec {
    Zero,
    /// `g(t) = t`
    Identity,
    Constant {
        value: f64,
    },
    Affine {
        slope: f64,
        intercept: f64,
    },
    /// `amplitude·sin(2π·frequency·t)`
    Sin {
        amplitude: f64,
        frequency: f64,
    },
}

impl GSpec {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            GSpec::Zero => 0.0,
            GSpec::Identity => t,
            GSpec::Constant { value } => value,
            GSpec::Affine { slope, intercept } => slope * t + intercept,
            GSpec::Sin {
                amplitude,
                frequency,
            } => amplitude * (2.0 * std::f64::consts::PI * frequency * t).sin(),
        }
    }
}

/// JSON problem description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K1")]
    pub k1: KernelSpec,
    #[serde(rename = "K2")]
    pub k2: KernelSpec,
    pub phi: PhiSpec,
    pub g: GSpec,
    pub k_lip: f64,
}

/// A discretized instance of the system.
#[derive(Debug, Clone)]
pub struct GridProblem {
    n: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    k1: Kernel,
    k2: Kernel,
    /// `φ(t_i, s_j)`, row-major.
    phi: Vec<f64>,
    g: GridFunction,
    k_lip: f64,
}

/// Trapezoid weights on the uniform `n`-node grid of `[0, 1]`.
pub fn trapezoid_weights(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::GridTooSmall(n));
    }
    let h = 1.0 / (n - 1) as f64;
    let mut w = vec![h; n];
    w[0] = h / 2.0;
    w[n - 1] = h / 2.0;
    Ok(w)
}

impl GridProblem {
    pub fn new(
        n: usize,
        k1: Kernel,
        k2: Kernel,
        phi: impl Fn(f64, f64) -> f64 + Sync,
        g: impl Fn(f64) -> f64,
        k_lip: f64,
    ) -> Result<Self> {
        let weights = trapezoid_weights(n)?;
        if !(k_lip > 0.0 && k_lip < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "k_lip must lie in (0, 1), got {k_lip}"
            )));
        }
        let nodes = uniform_nodes(n);
        let rows = par::map(&nodes, |&t| {
            nodes.iter().map(|&s| phi(t, s)).collect::<Vec<_>>()
        });
        let phi: Vec<f64> = rows.into_iter().flatten().collect();
        if let Some(idx) = phi.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(format!(
                "phi({}, {}) = {}",
                nodes[idx / n],
                nodes[idx % n],
                phi[idx]
            )));
        }
        let g = GridFunction::new(nodes.iter().map(|&t| g(t)).collect())?;
        Ok(Self {
            n,
            nodes,
            weights,
            k1,
            k2,
            phi,
            g,
            k_lip,
        })
    }

    pub fn from_config(cfg: &ProblemConfig) -> Result<Self> {
        let phi = cfg.phi;
        let g = cfg.g;
        Self::new(
            cfg.n,
            Kernel::Builtin(cfg.k1),
            Kernel::Builtin(cfg.k2),
            move |t, s| phi.eval(t, s),
            move |t| g.eval(t),
            cfg.k_lip,
        )
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn g(&self) -> &GridFunction {
        &self.g
    }

    pub fn k_lip(&self) -> f64 {
        self.k_lip
    }

    pub fn kernel(&self, which: u8) -> Result<&Kernel> {
        match which {
            1 => Ok(&self.k1),
            2 => Ok(&self.k2),
            _ => Err(Error::InvalidParameter(format!(
                "operator index must be 1 or 2, got {which}"
            ))),
        }
    }

    pub fn phi_at(&self, i: usize, j: usize) -> f64 {
        self.phi[i * self.n + j]
    }

    /// `U = 2(‖g‖∞ + 1) / (1 - k_lip)`, the a-priori bound on iterate size.
    pub fn lattice_bound(&self) -> f64 {
        2.0 * (self.g.sup_norm() + 1.0) / (1.0 - self.k_lip)
    }

    /// `side` equally spaced values in `[-U, U]`.
    pub fn default_u_lattice(&self, side: usize) -> Vec<f64> {
        let u = self.lattice_bound();
        if side < 2 {
            return vec![0.0];
        }
        (0..side)
            .map(|i| -u + 2.0 * u * i as f64 / (side - 1) as f64)
            .collect()
    }

    fn apply_raw(&self, kernel: &Kernel, x: &[f64]) -> Vec<f64> {
        par::map_range(self.n, |i| {
            let t = self.nodes[i];
            let row = &self.phi[i * self.n..(i + 1) * self.n];
            let terms: Vec<f64> = (0..self.n)
                .map(|j| self.weights[j] * kernel.eval(t, self.nodes[j], row[j], x[j]))
                .collect();
            par::pairwise_sum(&terms) + self.g.values()[i]
        })
    }
}

/// Trapezoid evaluation of operator `which` (1 → `T`, 2 → `S`) at every node.
pub fn apply_operator(p: &GridProblem, which: u8, x: &GridFunction) -> Result<GridFunction> {
    let kernel = p.kernel(which)?;
    if x.len() != p.n {
        return Err(Error::DimensionMismatch {
            expected: p.n,
            found: x.len(),
        });
    }
    if !x.is_finite() {
        return Err(Error::NonFiniteInput("input grid function".into()));
    }
    let out = p.apply_raw(kernel, x.values());
    GridFunction::new(out)
}

/// The mapping pair `(T, S)` of the two integral operators.
pub fn operator_pair(p: &GridProblem) -> MappingPair<'_, GridFunction> {
    MappingPair::new(
        move |x: &GridFunction| GridFunction::from_raw(p.apply_raw(&p.k1, x.values())),
        move |x: &GridFunction| GridFunction::from_raw(p.apply_raw(&p.k2, x.values())),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct Hypothesis1 {
    pub pass: bool,
    pub g_finite: bool,
    pub kernels_finite: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelWitness {
    pub t: f64,
    pub s: f64,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hypothesis2 {
    pub pass: bool,
    pub phi_nonnegative: bool,
    /// Largest `|K1(t,s,u) - K2(t,s,v)| - k·φ(t,s)·|u - v|`, net of slack.
    pub max_violation: f64,
    pub witness: Option<KernelWitness>,
    /// The same maximum restricted to `u = v`.
    pub max_diagonal_violation: f64,
    /// Whether `K1 = K2` on the sampled lattice. The inequality at `u = v`
    /// forces this whenever the kernel Lipschitz hypothesis holds.
    pub kernels_coincide: bool,
    pub lattice: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hypothesis3 {
    pub pass: bool,
    /// `max_i Σ_j w_j φ(t_i, s_j)`
    pub sup_integral: f64,
    /// The node attaining the maximum.
    pub witness_t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub h1: Hypothesis1,
    pub h2: Hypothesis2,
    pub h3: Hypothesis3,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.h1.pass && self.h2.pass && self.h3.pass
    }
}

#[derive(Clone, Copy)]
struct RowScan {
    finite: bool,
    phi_min: f64,
    worst: (f64, Option<KernelWitness>),
    worst_diag: f64,
}

/// Checks the three hypotheses on the grid. `sample_u` supplies the `u, v`
/// values for the Lipschitz check; every ordered pair is tried, so `u = v` is included.
pub fn verify_hypotheses(p: &GridProblem, sample_u: &[f64], tol: &Tolerances) -> HypothesisReport {
    let k = p.k_lip;
    let rows = par::map_range(p.n, |i| {
        let t = p.nodes[i];
        let mut scan = RowScan {
            finite: true,
            phi_min: f64::INFINITY,
            worst: (f64::NEG_INFINITY, None),
            worst_diag: f64::NEG_INFINITY,
        };
        for j in 0..p.n {
            let s = p.nodes[j];
            let phi = p.phi_at(i, j);
            scan.phi_min = scan.phi_min.min(phi);
            for &u in sample_u {
                let k1 = p.k1.eval(t, s, phi, u);
                for &v in sample_u {
                    let k2 = p.k2.eval(t, s, phi, v);
                    let lhs = (k1 - k2).abs();
                    if !(k1.is_finite() && k2.is_finite()) {
                        scan.finite = false;
                    }
                    let mut viol =
                        lhs - k * phi * (u - v).abs() - tol.eq_tol * (1.0 + k1.abs().max(k2.abs()));
                    if viol.is_nan() {
                        viol = f64::INFINITY;
                    }
                    if viol > scan.worst.0 {
                        scan.worst = (viol, Some(KernelWitness { t, s, u, v }));
                    }
                    if u == v && viol > scan.worst_diag {
                        scan.worst_diag = viol;
                    }
                }
            }
        }
        scan
    });

    let kernels_finite = rows.iter().all(|r| r.finite);
    let phi_min = rows.iter().map(|r| r.phi_min).fold(f64::INFINITY, f64::min);
    let mut worst = (f64::NEG_INFINITY, None);
    let mut worst_diag = f64::NEG_INFINITY;
    for r in &rows {
        if r.worst.0 > worst.0 {
            worst = r.worst;
        }
        worst_diag = worst_diag.max(r.worst_diag);
    }
    if sample_u.is_empty() {
        worst = (0.0, None);
        worst_diag = 0.0;
    }
    let phi_nonnegative = phi_min >= 0.0;

    let g_finite = p.g.is_finite();
    let h1 = Hypothesis1 {
        pass: g_finite && kernels_finite,
        g_finite,
        kernels_finite,
        detail: (!kernels_finite).then(|| "a kernel is non-finite on the sampled lattice".into()),
    };
    let h2 = Hypothesis2 {
        pass: phi_nonnegative && worst.0 <= 0.0,
        phi_nonnegative,
        max_violation: worst.0,
        witness: if worst.0 > 0.0 { worst.1 } else { None },
        max_diagonal_violation: worst_diag,
        kernels_coincide: worst_diag <= 0.0,
        lattice: sample_u.to_vec(),
    };

    let integrals = par::map_range(p.n, |i| {
        let terms: Vec<f64> = (0..p.n).map(|j| p.weights[j] * p.phi_at(i, j)).collect();
        par::pairwise_sum(&terms)
    });
    let (imax, sup) =
        integrals
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
            );
    let h3 = Hypothesis3 {
        pass: sup <= 1.0 + tol.eq_tol,
        sup_integral: sup,
        witness_t: p.nodes[imax],
    };
    HypothesisReport { h1, h2, h3 }
}

/// Solves the system by successive approximation, with a sampled
/// norm-contraction certificate at bound `k_lip` attached.
pub fn solve_common(
    p: &GridProblem,
    x0: GridFunction,
    tol: &Tolerances,
    max_iter: usize,
) -> Result<SolveOutcome<GridFunction>> {
    if x0.len() != p.n {
        return Err(Error::DimensionMismatch {
            expected: p.n,
            found: x0.len(),
        });
    }
    if !x0.is_finite() {
        return Err(Error::NonFiniteInput("initial grid function".into()));
    }
    let metric = make_multiplication_metric(p.n)?;
    let pair = operator_pair(p);
    let sample = grid_function_pairs(
        p.n,
        CERTIFICATE_PAIRS,
        p.lattice_bound() / 2.0,
        DEFAULT_SEED,
    );
    let cert = check_norm_contraction(&pair, &metric, p.k_lip, &sample, tol)?;
    let out = solve_norm_contraction(&pair, &metric, p.k_lip, x0, tol, max_iter)?;
    Ok(out.with_certificate(cert))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NodeValue {
    pub t: f64,
    pub x: f64,
}

/// Wire form of an integral solve: the solution as node/value pairs plus
/// the solver report.
#[derive(Debug, Serialize)]
pub struct SolutionReport<'a> {
    pub solution: Vec<NodeValue>,
    #[serde(flatten)]
    pub report: SolverReport<'a, GridFunction>,
}

pub fn solution_report<'a>(
    p: &GridProblem,
    out: &'a SolveOutcome<GridFunction>,
) -> SolutionReport<'a> {
    let solution = out
        .point
        .as_ref()
        .map(|x| {
            p.nodes
                .iter()
                .zip(x.values())
                .map(|(&t, &x)| NodeValue { t, x })
                .collect()
        })
        .unwrap_or_default();
    SolutionReport {
        solution,
        report: out.report(),
    }
}
