//! JSON schema for `solve` and `check` configs.

use cstar_fixpoint::integral::ProblemConfig;
use cstar_fixpoint::metric::{make_diag_metric, DiagMetric};
use cstar_fixpoint::{MatrixElement, Tolerances};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::mappings::MappingSpec;
use crate::{CliError, Options};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    /// `d(x, y) = diag(|x - y|, k|x - y|)`
    Diag { k: f64 },
}

impl Default for MetricSpec {
    fn default() -> Self {
        MetricSpec::Diag { k: 1.0 }
    }
}

impl MetricSpec {
    pub fn build(&self) -> Result<DiagMetric, CliError> {
        match *self {
            MetricSpec::Diag { k } => Ok(make_diag_metric(k)?),
        }
    }
}

/// Either `{"scalar": λ}` for `λ·1`, or a matrix in the `{dim, re, im}` format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Scalar { scalar: f64 },
    Matrix(MatrixElement),
}

impl CoefficientSpec {
    pub fn build(&self, dim: usize) -> MatrixElement {
        match self {
            CoefficientSpec::Scalar { scalar } => MatrixElement::scalar(dim, *scalar),
            CoefficientSpec::Matrix(m) => m.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    #[serde(default = "default_low")]
    pub low: f64,
    #[serde(default = "default_high")]
    pub high: f64,
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_low() -> f64 {
    -10.0
}

fn default_high() -> f64 {
    10.0
}

fn default_count() -> usize {
    cstar_fixpoint::sampling::DEFAULT_PAIR_COUNT
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            low: default_low(),
            high: default_high(),
            count: default_count(),
        }
    }
}

impl SampleSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.low.is_finite() && self.high.is_finite() && self.low < self.high) {
            return Err(CliError::Config(format!(
                "sample range [{}, {}] is empty or non-finite",
                self.low, self.high
            )));
        }
        if self.count == 0 {
            return Err(CliError::Config("sample count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionName {
    Eq21,
    Eq23,
    Eq24,
    Eq25,
    Norm,
}

/// Starting point for an integral solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridStart {
    Named(NamedStart),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedStart {
    Zero,
    /// The forcing term `g`.
    G,
}

impl Default for GridStart {
    fn default() -> Self {
        GridStart::Named(NamedStart::Zero)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolveConfig {
    Alternating {
        #[serde(default)]
        metric: MetricSpec,
        #[serde(rename = "T")]
        t: MappingSpec,
        #[serde(rename = "S")]
        s: MappingSpec,
        a: CoefficientSpec,
        x0: f64,
        #[serde(default)]
        tol: Option<Tolerances>,
        #[serde(default)]
        max_iter: Option<usize>,
    },
    Jungck {
        #[serde(default)]
        metric: MetricSpec,
        #[serde(rename = "T")]
        t: MappingSpec,
        #[serde(rename = "S")]
        s: MappingSpec,
        section: MappingSpec,
        condition: ConditionName,
        a: CoefficientSpec,
        x0: f64,
        #[serde(default)]
        sample: SampleSpec,
        #[serde(default)]
        tol: Option<Tolerances>,
        #[serde(default)]
        max_iter: Option<usize>,
    },
    PowerIterate {
        #[serde(default)]
        metric: MetricSpec,
        #[serde(rename = "T")]
        t: MappingSpec,
        m: u32,
        n: u32,
        a: CoefficientSpec,
        x0: f64,
        #[serde(default)]
        tol: Option<Tolerances>,
        #[serde(default)]
        max_iter: Option<usize>,
    },
    Integral {
        problem: ProblemConfig,
        #[serde(default)]
        x0: GridStart,
        #[serde(default)]
        tol: Option<Tolerances>,
        #[serde(default)]
        max_iter: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckConfig {
    Eq21(ScalarCheck),
    Eq23(ScalarCheck),
    Eq24(ScalarCheck),
    Eq25(ScalarCheck),
    Norm {
        #[serde(default)]
        metric: MetricSpec,
        #[serde(rename = "T")]
        t: MappingSpec,
        #[serde(rename = "S")]
        s: MappingSpec,
        bound: f64,
        #[serde(default)]
        sample: SampleSpec,
        #[serde(default)]
        tol: Option<Tolerances>,
    },
    Integral {
        problem: ProblemConfig,
        /// Pairs of random grid functions for the norm-contraction check.
        #[serde(default = "default_grid_pairs")]
        pairs: usize,
        #[serde(default)]
        tol: Option<Tolerances>,
    },
}

fn default_grid_pairs() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarCheck {
    #[serde(default)]
    pub metric: MetricSpec,
    #[serde(rename = "T")]
    pub t: MappingSpec,
    #[serde(rename = "S")]
    pub s: MappingSpec,
    pub a: CoefficientSpec,
    #[serde(default)]
    pub sample: SampleSpec,
    #[serde(default)]
    pub tol: Option<Tolerances>,
}

/// A bare problem object (`{"N": …, "K1": …}`) is accepted as an integral solve.
pub fn parse_solve(value: Value) -> Result<SolveConfig, CliError> {
    let bare_problem = value
        .as_object()
        .is_some_and(|o| !o.contains_key("mode") && o.contains_key("N"));
    if bare_problem {
        let problem: ProblemConfig = serde_json::from_value(value)?;
        return Ok(SolveConfig::Integral {
            problem,
            x0: GridStart::default(),
            tol: None,
            max_iter: None,
        });
    }
    Ok(serde_json::from_value(value)?)
}

pub fn parse_check(value: Value) -> Result<CheckConfig, CliError> {
    Ok(serde_json::from_value(value)?)
}

/// Config tolerances, with the `--tol` flag overriding `conv_tol`.
pub fn tolerances(config: Option<Tolerances>, opts: &Options) -> Result<Tolerances, CliError> {
    let base = config.unwrap_or_default();
    let tol = match opts.tol {
        Some(conv) => base.with_conv_tol(conv)?,
        None => {
            base.validate()?;
            base
        }
    };
    Ok(tol)
}

pub fn max_iter(config: Option<usize>, opts: &Options) -> usize {
    opts.max_iter
        .or(config)
        .unwrap_or(cstar_fixpoint::fixpoint::DEFAULT_MAX_ITER)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn parses_alternating() {
        let v = json!({
            "mode": "alternating",
            "metric": {"kind": "diag", "k": 2.0},
            "T": {"family": "affine", "alpha": 0.5, "beta": 1.0},
            "S": {"family": "affine", "alpha": 0.5, "beta": 1.0},
            "a": {"scalar": FRAC_1_SQRT_2},
            "x0": 0.0
        });
        match parse_solve(v).unwrap() {
            SolveConfig::Alternating { a, metric, .. } => {
                assert_eq!(a.build(2), MatrixElement::scalar(2, FRAC_1_SQRT_2));
                assert_eq!(metric, MetricSpec::Diag { k: 2.0 });
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parses_matrix_coefficient() {
        let c: CoefficientSpec =
            serde_json::from_value(json!({"dim": 2, "re": [[0.5, 0.0], [0.0, 0.25]]})).unwrap();
        assert_eq!(c.build(2), MatrixElement::diag(&[0.5, 0.25]));
    }

    #[test]
    fn bare_problem_is_integral() {
        let v = json!({"N": 21, "K1": {"family": "linear", "c": 0.5},
            "K2": {"family": "linear", "c": 0.5},
            "phi": {"name": "constant", "params": {"value": 1.0}},
            "g": {"name": "identity"}, "k_lip": 0.5});
        assert!(matches!(
            parse_solve(v).unwrap(),
            SolveConfig::Integral { .. }
        ));
    }

    #[test]
    fn rejects_unknown_fields_and_modes() {
        assert!(parse_solve(json!({"mode": "newton"})).is_err());
        assert!(
            parse_check(json!({"condition": "eq21", "T": {"family": "identity"},
            "S": {"family": "identity"}, "a": {"scalar": 0.5}, "extra": 1}))
            .is_err()
        );
    }

    #[test]
    fn grid_start_forms() {
        let s: GridStart = serde_json::from_value(json!("g")).unwrap();
        assert_eq!(s, GridStart::Named(NamedStart::G));
        let s: GridStart = serde_json::from_value(json!([0.0, 1.0])).unwrap();
        assert_eq!(s, GridStart::Values(vec![0.0, 1.0]));
    }

    #[test]
    fn tolerance_override() {
        let opts = Options {
            tol: Some(1e-6),
            ..Options::default()
        };
        assert_eq!(tolerances(None, &opts).unwrap().conv_tol, 1e-6);
        let bad = Options {
            tol: Some(-1.0),
            ..Options::default()
        };
        assert!(tolerances(None, &bad).is_err());
        assert_eq!(max_iter(Some(5), &Options::default()), 5);
    }
}
