//! Built-in self-maps of the real line, selected by name in configs.

use std::sync::Arc;

use cstar_fixpoint::fixpoint::Map;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MappingSpec {
    /// `x ↦ αx + β`
    Affine {
        alpha: f64,
        beta: f64,
    },
    Identity,
    /// `3 - x` on `[0, 3/2]`, `3` above.
    CompatT,
    /// `2x` on `(1, 2]`, `x` elsewhere.
    CompatS,
    /// `kx/2` for `x ≠ 0`, `1` at `0`.
    Example21T {
        k: f64,
    },
    /// `kx` for `x ≠ 0`, `2` at `0`.
    Example21S {
        k: f64,
    },
    /// `y/k` for `y ≠ 0`, `0` at `0`: a section of `example21_s` on its
    /// range away from the jump.
    Example21Section {
        k: f64,
    },
}

pub fn compat_t(x: f64) -> f64 {
    if x <= 1.5 {
        3.0 - x
    } else {
        3.0
    }
}

pub fn compat_s(x: f64) -> f64 {
    if x > 1.0 && x <= 2.0 {
        2.0 * x
    } else {
        x
    }
}

pub fn example21_t(k: f64, x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        k * x / 2.0
    }
}

pub fn example21_s(k: f64, x: f64) -> f64 {
    if x == 0.0 {
        2.0
    } else {
        k * x
    }
}

pub fn example21_section(k: f64, y: f64) -> f64 {
    if y == 0.0 {
        0.0
    } else {
        y / k
    }
}

impl MappingSpec {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            MappingSpec::Affine { alpha, beta } => alpha * x + beta,
            MappingSpec::Identity => x,
            MappingSpec::CompatT => compat_t(x),
            MappingSpec::CompatS => compat_s(x),
            MappingSpec::Example21T { k } => example21_t(k, x),
            MappingSpec::Example21S { k } => example21_s(k, x),
            MappingSpec::Example21Section { k } => example21_section(k, x),
        }
    }

    pub fn to_map(self) -> Map<'static, f64> {
        Arc::new(move |x: &f64| self.apply(*x))
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = match *self {
            MappingSpec::Affine { alpha, beta } => alpha.is_finite() && beta.is_finite(),
            MappingSpec::Example21T { k }
            | MappingSpec::Example21S { k }
            | MappingSpec::Example21Section { k } => k.is_finite() && k > 0.0,
            _ => true,
        };
        if finite {
            Ok(())
        } else {
            Err(format!("invalid mapping parameters in {self:?}"))
        }
    }
}
