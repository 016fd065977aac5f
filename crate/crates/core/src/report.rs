use serde::Serialize;

use crate::scalar::Scalar;

/// Both sides of an identity below this magnitude count as agreeing.
pub const ABS_FLOOR: f64 = 1e-13;

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub identity: String,
    pub indices: String,
    pub residual_abs: f64,
    pub residual_rel: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Report {
    pub fn from_residual(identity: impl Into<String>, indices: impl Into<String>, r: &Residual, tol: f64) -> Self {
        let residual_rel = r.relative();
        let pass = r.abs.is_finite() && (r.abs == 0.0 || residual_rel <= tol || r.scale < ABS_FLOOR);
        Report {
            identity: identity.into(),
            indices: indices.into(),
            residual_abs: r.abs,
            residual_rel,
            tol,
            pass,
        }
    }

    /// Vacuous or purely structural checks.
    pub fn trivial(identity: impl Into<String>, indices: impl Into<String>) -> Self {
        Report::from_residual(identity, indices, &Residual::default(), 0.0)
    }
}

/// Running sup-norm of `lhs - rhs` together with the larger side's sup.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residual {
    pub abs: f64,
    pub scale: f64,
}

impl Residual {
    pub fn new() -> Self {
        Residual::default()
    }

    pub fn push<F: Scalar>(&mut self, lhs: &F, rhs: &F) {
        let diff = lhs.clone() - rhs.clone();
        let mut d = diff.magnitude();
        if !diff.is_zero() && d == 0.0 {
            // an exact nonzero difference must never read as agreement
            d = f64::MIN_POSITIVE;
        }
        if d.is_nan() {
            d = f64::INFINITY;
        }
        self.abs = self.abs.max(d);
        self.scale = self.scale.max(lhs.magnitude()).max(rhs.magnitude());
    }

    pub fn push_f64(&mut self, lhs: f64, rhs: f64) {
        self.push(&lhs, &rhs);
    }

    pub fn merge(&mut self, other: &Residual) {
        self.abs = self.abs.max(other.abs);
        self.scale = self.scale.max(other.scale);
    }

    pub fn relative(&self) -> f64 {
        if self.abs == 0.0 {
            0.0
        } else if self.scale > 0.0 {
            self.abs / self.scale
        } else {
            f64::INFINITY
        }
    }
}

/// Riemann-Hilbert check outcome; `at` is the point as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhReport {
    pub check: String,
    pub at: [f64; 2],
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    /// Reported but not part of the overall verdict.
    pub experimental: bool,
}

impl RhReport {
    pub fn new(check: impl Into<String>, at: [f64; 2], residual: f64, tol: f64) -> Self {
        RhReport {
            check: check.into(),
            at,
            residual,
            tol,
            pass: residual.is_finite() && residual <= tol,
            experimental: false,
        }
    }
}
