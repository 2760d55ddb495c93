use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical slack used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Slack on eigenvalue positivity: `λ_min ≥ -eig_tol` counts as positive.
    pub eig_tol: f64,
    /// Entrywise equality slack (Hermitian defect, `d(x, x) = 0`, commutators).
    pub eq_tol: f64,
    /// Solver stopping threshold on step norms.
    pub conv_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig_tol: 1e-10,
            eq_tol: 1e-10,
            conv_tol: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn new(eig_tol: f64, eq_tol: f64, conv_tol: f64) -> Result<Self> {
        let tol = Self {
            eig_tol,
            eq_tol,
            conv_tol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn with_conv_tol(self, conv_tol: f64) -> Result<Self> {
        Self::new(self.eig_tol, self.eq_tol, conv_tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("eig_tol", self.eig_tol),
            ("eq_tol", self.eq_tol),
            ("conv_tol", self.conv_tol),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidTolerance { name, value });
            }
        }
        Ok(())
    }

    /// Residual threshold a converged solve must meet.
    pub fn residual_tol(&self) -> f64 {
        10.0 * self.conv_tol
    }
}
