//! Stability layer for cylinders `alpha x [-h/2, h/2]`.
//!
//! Normal modes of the second variation separate into `u(s) f(z)`; the
//! `s`-factor solves the Hill equation `u'' + (kappa^2 + a xi2 + lambda) u = 0`
//! on the closed generating curve. `xi1` is always a periodic solution with
//! `lambda = 0` and zero mean, which pins the spectrum: a non-circular
//! equilibrium always has `mu_1 < 0`.
//!
//! Verdicts are rule-based. The characterization of stability is complete
//! only for round cylinders; for general curves the report collects the
//! instability criteria that fire and otherwise stays inconclusive.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moduli::circle_radii;
use crate::params::DropParams;
use crate::profile::ProfileCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProblemKind {
    #[serde(rename = "free")]
    Free,
    #[serde(rename = "fixed")]
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RuleId {
    #[serde(rename = "PROP_A")]
    PropA,
    #[serde(rename = "CP_MULTI_CRIT")]
    CpMultiCrit,
    #[serde(rename = "CP_LARGE_H")]
    CpLargeH,
    #[serde(rename = "ROUND_FREE")]
    RoundFree,
    #[serde(rename = "FIXED_C1")]
    FixedC1,
    #[serde(rename = "FIXED_C2")]
    FixedC2,
    #[serde(rename = "HEIGHT_BOUND")]
    HeightBound,
    #[serde(rename = "BIFURCATION_FLAG")]
    BifurcationFlag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    #[serde(rename = "Unstable-all-h")]
    UnstableAllH,
    #[serde(rename = "Unstable-for-large-h")]
    UnstableForLargeH,
    #[serde(rename = "Unstable-at-h")]
    UnstableAtH,
    #[serde(rename = "Stable-all-h")]
    StableAllH,
    #[serde(rename = "Stable-at-h")]
    StableAtH,
    #[serde(rename = "necessary-conditions-hold")]
    NecessaryHolds,
    #[serde(rename = "not-applicable")]
    NotApplicable,
    #[serde(rename = "inconclusive")]
    Inconclusive,
    #[serde(rename = "flagged")]
    Flagged,
    #[serde(rename = "not-flagged")]
    NotFlagged,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub rule: RuleId,
    pub outcome: Outcome,
    /// Height threshold attached to the outcome, when one exists.
    pub h_limit: Option<f64>,
    /// The scalar quantity the rule evaluated, when meaningful.
    pub quantity: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct HMaxBound {
    pub rule: RuleId,
    /// `None` means the rule imposes no height bound (+infinity).
    pub h_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub problem: ProblemKind,
    pub h: f64,
    /// Leading Hill eigenvalues without the mean-zero constraint.
    pub mu: Vec<f64>,
    pub j_negative: usize,
    pub morse_index_lower_bound: usize,
    pub verdicts: Vec<Verdict>,
    pub h_max_bounds: Vec<HMaxBound>,
    pub notes: Vec<String>,
}

/// Periodic Hill problem `-u'' - V(s) u = mu u` on a circle of circumference
/// `circumference`, with the potential sampled on a uniform grid.
#[derive(Debug, Clone, Serialize)]
pub struct HillProblem {
    pub circumference: f64,
    pub potential: Vec<f64>,
}

/// Default fine grid (the eigensolver extrapolates from this grid and its
/// stride-2 coarsening, i.e. a 512/1024 Richardson pair).
pub const HILL_GRID: usize = 1024;

impl HillProblem {
    pub fn from_curve(curve: &ProfileCurve, params: &DropParams) -> Result<Self> {
        Self::from_curve_with_grid(curve, params, HILL_GRID)
    }

    pub fn from_curve_with_grid(
        curve: &ProfileCurve,
        params: &DropParams,
        n: usize,
    ) -> Result<Self> {
        if !curve.closed {
            return Err(Error::InvalidInput(
                "Hill problem needs a closed curve".into(),
            ));
        }
        if n < 64 || !n.is_multiple_of(2) {
            return Err(Error::InvalidInput(
                "Hill grid must be even and at least 64".into(),
            ));
        }
        let m = curve.samples.len();
        let a = params.a();
        let vals: Vec<f64> = curve
            .samples
            .iter()
            .map(|c| c.kappa * c.kappa + a * c.xi2)
            .collect();
        // Linear interpolation in arc length (curve samples are uniform).
        let potential = (0..n)
            .map(|j| {
                let t = j as f64 * m as f64 / n as f64;
                let i0 = t.floor() as usize % m;
                let i1 = (i0 + 1) % m;
                let w = t - t.floor();
                vals[i0] * (1.0 - w) + vals[i1] * w
            })
            .collect();
        Ok(HillProblem {
            circumference: curve.total_length,
            potential,
        })
    }

    pub fn constant(circumference: f64, v: f64, n: usize) -> Self {
        HillProblem {
            circumference,
            potential: vec![v; n],
        }
    }
}

#[derive(Debug, Clone)]
pub struct HillSpectrum {
    /// Richardson-extrapolated eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Largest fine/coarse disagreement over the reported modes.
    pub est_error: f64,
    /// Eigenfunctions on the fine grid, matching `eigenvalues`.
    pub eigenfunctions: Vec<Vec<f64>>,
    pub grid: usize,
}

fn hill_matrix(potential: &[f64], circumference: f64) -> DMatrix<f64> {
    let n = potential.len();
    let d = circumference / n as f64;
    let inv = 1.0 / (d * d);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 2.0 * inv - potential[i];
        m[(i, (i + 1) % n)] = -inv;
        m[(i, (n + i - 1) % n)] = -inv;
    }
    m
}

/// Lowest `n_modes` periodic eigenvalues of `-u'' - V u`, by a three-point
/// stencil on the fine grid Richardson-extrapolated against its stride-2
/// coarsening. Eigenfunctions come from the fine grid.
pub fn hill_eigenvalues(problem: &HillProblem, n_modes: usize) -> Result<HillSpectrum> {
    let n = problem.potential.len();
    if n < 64 || !n.is_multiple_of(2) {
        return Err(Error::InvalidInput(
            "Hill grid must be even and at least 64".into(),
        ));
    }
    let n_modes = n_modes.min(n / 2);

    let fine = hill_matrix(&problem.potential, problem.circumference);
    let eig = nalgebra::SymmetricEigen::new(fine);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let coarse_pot: Vec<f64> = problem.potential.iter().step_by(2).copied().collect();
    let coarse = hill_matrix(&coarse_pot, problem.circumference);
    let mut coarse_vals: Vec<f64> = coarse.symmetric_eigenvalues().iter().copied().collect();
    coarse_vals.sort_by(f64::total_cmp);

    let mut eigenvalues = Vec::with_capacity(n_modes);
    let mut eigenfunctions = Vec::with_capacity(n_modes);
    let mut est_error: f64 = 0.0;
    for k in 0..n_modes {
        let lf = eig.eigenvalues[order[k]];
        let lc = coarse_vals[k];
        let diff = (lf - lc).abs();
        est_error = est_error.max(diff);
        if diff > 0.1 * (1.0 + lf.abs()) {
            return Err(Error::NotConverged(diff));
        }
        eigenvalues.push((4.0 * lf - lc) / 3.0);
        eigenfunctions.push(eig.eigenvectors.column(order[k]).iter().copied().collect());
    }
    Ok(HillSpectrum {
        eigenvalues,
        est_error,
        eigenfunctions,
        grid: n,
    })
}

/// Sign changes of a cyclic sample sequence, ignoring entries below a
/// relative threshold (samples sitting exactly on a zero would otherwise be
/// double counted).
pub fn sign_changes(values: &[f64], rel_threshold: f64) -> usize {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0;
    }
    let thr = rel_threshold * max;
    let signs: Vec<f64> = values
        .iter()
        .filter(|v| v.abs() > thr)
        .map(|v| v.signum())
        .collect();
    if signs.is_empty() {
        return 0;
    }
    let mut count = 0;
    for i in 0..signs.len() {
        if signs[i] != signs[(i + 1) % signs.len()] {
            count += 1;
        }
    }
    count
}

/// Count of `xi1` sign changes along a closed curve (= critical points of
/// the distance-to-axis function).
pub fn xi1_sign_changes(curve: &ProfileCurve) -> usize {
    let xi1: Vec<f64> = curve.samples.iter().map(|c| c.xi1).collect();
    sign_changes(&xi1, 1e-9)
}

/// Uniform-arclength closed-curve integral of per-sample values.
fn closed_integral(curve: &ProfileCurve, values: impl Iterator<Item = f64>) -> f64 {
    let n = curve.samples.len();
    let ds = curve.total_length / n as f64;
    values.sum::<f64>() * ds
}

/// Free-boundary instability rules for a closed generating curve.
pub fn cp_instability_test(curve: &ProfileCurve, params: &DropParams) -> Result<Vec<Verdict>> {
    let spectrum = if curve.is_circular() {
        None
    } else {
        Some(hill_eigenvalues(
            &HillProblem::from_curve(curve, params)?,
            6,
        )?)
    };
    Ok(cp_rules(curve, params, spectrum.as_ref(), None))
}

fn cp_rules(
    curve: &ProfileCurve,
    params: &DropParams,
    spectrum: Option<&HillSpectrum>,
    embedded: Option<bool>,
) -> Vec<Verdict> {
    let mut out = Vec::new();
    let a = params.a();
    let area = curve.signed_area();

    if a > 0.0 && area > 0.0 {
        out.push(Verdict {
            rule: RuleId::PropA,
            outcome: Outcome::UnstableAllH,
            h_limit: None,
            quantity: Some(-a * area),
            note: "a > 0 with positive enclosed volume: the horizontal translation mode has \
                   negative second variation (-a h A) for every height"
                .into(),
        });
    } else {
        out.push(Verdict {
            rule: RuleId::PropA,
            outcome: Outcome::NotApplicable,
            h_limit: None,
            quantity: None,
            note: "requires a > 0 and positive signed enclosed area".into(),
        });
    }

    if curve.is_circular() {
        out.push(Verdict {
            rule: RuleId::CpMultiCrit,
            outcome: Outcome::NotApplicable,
            h_limit: None,
            quantity: Some(0.0),
            note: "distance to the axis is constant on a circle".into(),
        });
        return out;
    }

    let changes = xi1_sign_changes(curve);
    if changes >= 4 {
        out.push(Verdict {
            rule: RuleId::CpMultiCrit,
            outcome: Outcome::UnstableAllH,
            h_limit: None,
            quantity: Some(changes as f64),
            note: format!(
                "squared distance to the axis has {changes} critical points (> 2): unstable \
                 for every height"
            ),
        });
    } else if embedded == Some(true) {
        out.push(Verdict {
            rule: RuleId::CpMultiCrit,
            outcome: Outcome::UnstableAllH,
            h_limit: None,
            quantity: Some(changes as f64),
            note: "embedded non-circular curve: the four-vertex theorem forces four critical \
                   points of the curvature, hence of the squared distance"
                .into(),
        });
    } else {
        out.push(Verdict {
            rule: RuleId::CpMultiCrit,
            outcome: Outcome::Inconclusive,
            h_limit: None,
            quantity: Some(changes as f64),
            note: "fewer than four sign changes of xi1 detected".into(),
        });
    }

    if let Some(sp) = spectrum {
        let mu1 = sp.eigenvalues[0];
        if mu1 < 0.0 {
            let h_thr = std::f64::consts::PI / (-mu1).sqrt();
            out.push(Verdict {
                rule: RuleId::CpLargeH,
                outcome: Outcome::UnstableForLargeH,
                h_limit: Some(h_thr),
                quantity: Some(mu1),
                note: format!(
                    "mu_1 = {mu1:.6e} < 0: the mode u_1(s) sin(pi z / h) destabilizes once \
                     h > pi / sqrt(-mu_1)"
                ),
            });
        } else {
            out.push(Verdict {
                rule: RuleId::CpLargeH,
                outcome: Outcome::Inconclusive,
                h_limit: None,
                quantity: Some(mu1),
                note: "lowest unconstrained eigenvalue is not negative".into(),
            });
        }
    }
    out
}

/// Quantities of the exponential height bound for non-circular stable
/// equilibria.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HeightBounds {
    /// `e^(2(max xi1 - min xi1)) L / oint (1 + kappa xi2)^2 ds`.
    pub middle: f64,
    /// `4 e^(4 max xi1) / (max |G_xi2|)^2`.
    pub left: f64,
    /// Largest height compatible with stability: `2 pi / sqrt(middle)` for
    /// the fixed problem, `pi / sqrt(middle)` for the free one.
    pub h_max: f64,
}

pub fn height_bounds(
    curve: &ProfileCurve,
    _params: &DropParams,
    problem: ProblemKind,
) -> Result<HeightBounds> {
    if curve.is_circular() {
        return Err(Error::CircularInput);
    }
    let xi1_max = curve.samples.iter().map(|c| c.xi1).fold(f64::MIN, f64::max);
    let xi1_min = curve.samples.iter().map(|c| c.xi1).fold(f64::MAX, f64::min);
    let g2_max = curve
        .samples
        .iter()
        .map(|c| (2.0 * (1.0 + c.kappa * c.xi2)).abs())
        .fold(0.0f64, f64::max);
    let denom = closed_integral(
        curve,
        curve
            .samples
            .iter()
            .map(|c| (1.0 + c.kappa * c.xi2).powi(2)),
    );
    if denom <= 1e-12 * curve.total_length {
        return Err(Error::CircularInput);
    }
    let len = curve.polyline_length();
    let middle = (2.0 * (xi1_max - xi1_min)).exp() * len / denom;
    let left = 4.0 * (4.0 * xi1_max).exp() / (g2_max * g2_max);
    // The fixed bound is exactly twice the free one (4pi^2 vs pi^2).
    let free_h_max = std::f64::consts::PI / middle.sqrt();
    let h_max = match problem {
        ProblemKind::Fixed => 2.0 * free_h_max,
        ProblemKind::Free => free_h_max,
    };
    Ok(HeightBounds {
        middle,
        left,
        h_max,
    })
}

/// Necessary conditions for fixed-boundary stability of a general closed
/// curve at height `h`: `4 pi^2 / h^2 >= oint kappa^2 ds + 2 a A`, refined
/// for embedded curves to `4 pi^2 / h^2 >= 4 pi^2 / L^2 + 2 a A`.
pub fn fixed_necessary_conditions(
    curve: &ProfileCurve,
    params: &DropParams,
    h: f64,
    embedded: Option<bool>,
) -> Vec<Verdict> {
    let a = params.a();
    let area = curve.signed_area();
    let kappa_sq = closed_integral(curve, curve.samples.iter().map(|c| c.kappa * c.kappa));
    let lhs = 4.0 * std::f64::consts::PI.powi(2) / (h * h);
    let mut out = Vec::new();

    let rhs1 = kappa_sq + 2.0 * a * area;
    out.push(condition_verdict(
        RuleId::FixedC1,
        lhs,
        rhs1,
        h,
        "oint kappa^2 ds + 2aA",
    ));

    if embedded == Some(true) {
        let len = curve.polyline_length();
        let rhs2 = 4.0 * std::f64::consts::PI.powi(2) / (len * len) + 2.0 * a * area;
        out.push(condition_verdict(
            RuleId::FixedC2,
            lhs,
            rhs2,
            h,
            "4pi^2/L^2 + 2aA (embedded refinement)",
        ));
    }
    out
}

fn condition_verdict(rule: RuleId, lhs: f64, rhs: f64, _h: f64, what: &str) -> Verdict {
    let h_limit = if rhs > 0.0 {
        Some(2.0 * std::f64::consts::PI / rhs.sqrt())
    } else {
        None
    };
    if lhs >= rhs {
        Verdict {
            rule,
            outcome: Outcome::NecessaryHolds,
            h_limit,
            quantity: Some(rhs),
            note: format!("4pi^2/h^2 >= {what} holds (necessary, not sufficient)"),
        }
    } else {
        Verdict {
            rule,
            outcome: Outcome::UnstableAtH,
            h_limit,
            quantity: Some(rhs),
            note: format!("4pi^2/h^2 < {what}: unstable at this height"),
        }
    }
}

/// Axial factor of a separated variation `psi = u(s) f(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ZMode {
    /// `f = 1`.
    Const,
    /// `f = sin(k pi z / h)`.
    Sin(u32),
    /// `f = cos(k pi z / h)`.
    Cos(u32),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SecondVariation {
    pub value: f64,
    /// `int_Sigma psi dSigma`; modes used against the volume constraint must
    /// have zero mean.
    pub mean_residual: f64,
    pub mean_zero_ok: bool,
}

/// Evaluate the second variation for `psi = u(s) f(z)` on
/// `alpha x [-h/2, h/2]`, applying the z-integrals analytically.
pub fn second_variation(
    curve: &ProfileCurve,
    params: &DropParams,
    u: &[f64],
    mode: ZMode,
    h: f64,
) -> Result<SecondVariation> {
    let n = curve.samples.len();
    if u.len() != n {
        return Err(Error::InvalidInput(format!(
            "u has {} samples but the curve has {n}",
            u.len()
        )));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidInput("h must be positive".into()));
    }
    let ds = curve.total_length / n as f64;
    let a = params.a();

    let mut i_u2 = 0.0;
    let mut i_us2 = 0.0;
    let mut i_vu2 = 0.0;
    let mut i_u = 0.0;
    for i in 0..n {
        let c = &curve.samples[i];
        let v = c.kappa * c.kappa + a * c.xi2;
        // Fourth-order periodic difference for u'.
        let du = (-u[(i + 2) % n] + 8.0 * u[(i + 1) % n] - 8.0 * u[(n + i - 1) % n]
            + u[(n + i - 2) % n])
            / (12.0 * ds);
        i_u2 += u[i] * u[i];
        i_us2 += du * du;
        i_vu2 += v * u[i] * u[i];
        i_u += u[i];
    }
    i_u2 *= ds;
    i_us2 *= ds;
    i_vu2 *= ds;
    i_u *= ds;

    let pi = std::f64::consts::PI;
    let (if2, ifz2, if1) = match mode {
        ZMode::Const => (h, 0.0, h),
        ZMode::Sin(k) => {
            let w = k as f64 * pi / h;
            (0.5 * h, w * w * 0.5 * h, 0.0)
        }
        ZMode::Cos(k) => {
            let w = k as f64 * pi / h;
            let int_f = if k % 2 == 1 {
                2.0 * h / (k as f64 * pi) * if k % 4 == 1 { 1.0 } else { -1.0 }
            } else {
                0.0
            };
            (0.5 * h, w * w * 0.5 * h, int_f)
        }
    };

    let value = ifz2 * i_u2 + if2 * (i_us2 - i_vu2);
    let mean_residual = (if1 * i_u).abs();
    let scale = i_u2.sqrt() * curve.total_length.sqrt() * h + 1e-300;
    Ok(SecondVariation {
        value,
        mean_residual,
        mean_zero_ok: mean_residual <= 1e-7 * scale,
    })
}

/// Energy decomposition of the generating-curve functional
/// `G[alpha] = L - a/2 int R^2 dA + lambda0 A`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurveEnergy {
    pub total: f64,
    pub length: f64,
    pub area: f64,
    /// `int int R^2 dA` computed as the boundary integral
    /// `oint (x^2 + y^2)(x dy - y dx) / 4`.
    pub second_moment: f64,
}

pub fn curve_energy(curve: &ProfileCurve, params: &DropParams) -> CurveEnergy {
    let pts = &curve.samples;
    let n = pts.len();
    let mut second = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let (xi, yi) = (pts[i].x, pts[i].y);
        let (xj, yj) = (pts[j].x, pts[j].y);
        let fi = xi * xi + yi * yi;
        let fj = xj * xj + yj * yj;
        // Trapezoid of oint r^2 (x dy - y dx) / 4 along the segment.
        let cross_i = xi * (yj - yi) - yi * (xj - xi);
        let cross_j = xj * (yj - yi) - yj * (xj - xi);
        second += (fi * cross_i + fj * cross_j) / 8.0;
    }
    let length = curve.polyline_length();
    let area = curve.signed_area();
    CurveEnergy {
        total: length - 0.5 * params.a() * second + params.lambda0() * area,
        length,
        area,
        second_moment: second,
    }
}

/// Stability report for a round cylinder of the given radius and height.
pub fn round_cylinder_report(
    a: f64,
    lambda0: f64,
    radius: f64,
    h: f64,
    problem: ProblemKind,
) -> Result<StabilityReport> {
    if !(radius > 0.0 && h > 0.0) {
        return Err(Error::InvalidInput("radius and h must be positive".into()));
    }
    let params = DropParams::new(a, lambda0, 0.0)?;
    let known = circle_radii(&params)?;
    let matched = known
        .iter()
        .find(|c| (c.radius - radius).abs() <= 1e-6 * (1.0 + radius));
    let mut notes = Vec::new();
    if matched.is_none() {
        notes.push(format!(
            "radius {radius} is not an equilibrium circle radius for a = {a}; \
             nearest equilibria: {:?}",
            known.iter().map(|c| c.radius).collect::<Vec<_>>()
        ));
    }

    // Round-cylinder criteria quantity and Hill potential, both in the
    // outward-normal convention of the round-cylinder criteria (the gauge
    // orientation of a traced circle can flip the sign of the a xi2 term;
    // the stability statements are pinned to aR + 1/R^2).
    let sq = a * radius + 1.0 / (radius * radius);
    let mut mu = Vec::new();
    for j in 0..5 {
        let lam = (j as f64 / radius).powi(2) - sq;
        mu.push(lam);
        if j > 0 {
            mu.push(lam);
        }
    }
    mu.truncate(8);
    let j_negative = mu.iter().filter(|l| **l < 0.0).count();
    let pi = std::f64::consts::PI;
    let mut verdicts = Vec::new();
    let mut h_max_bounds = Vec::new();

    match problem {
        ProblemKind::Free => {
            if a > 0.0 {
                verdicts.push(Verdict {
                    rule: RuleId::PropA,
                    outcome: Outcome::UnstableAllH,
                    h_limit: None,
                    quantity: None,
                    note: "a > 0: unstable for the free problem at every height".into(),
                });
                verdicts.push(Verdict {
                    rule: RuleId::RoundFree,
                    outcome: Outcome::NotApplicable,
                    h_limit: None,
                    quantity: Some(sq),
                    note: "separated-mode threshold superseded by PROP_A".into(),
                });
                h_max_bounds.push(HMaxBound {
                    rule: RuleId::PropA,
                    h_max: Some(0.0),
                });
            } else if sq <= 0.0 {
                verdicts.push(Verdict {
                    rule: RuleId::RoundFree,
                    outcome: Outcome::StableAllH,
                    h_limit: None,
                    quantity: Some(sq),
                    note: "aR + 1/R^2 <= 0: stable for every height".into(),
                });
                h_max_bounds.push(HMaxBound {
                    rule: RuleId::RoundFree,
                    h_max: None,
                });
            } else {
                let h_max = pi / sq.sqrt();
                let outcome = if h <= h_max {
                    Outcome::StableAtH
                } else {
                    Outcome::UnstableAtH
                };
                verdicts.push(Verdict {
                    rule: RuleId::RoundFree,
                    outcome,
                    h_limit: Some(h_max),
                    quantity: Some(sq),
                    note: "stable if and only if pi^2/h^2 >= aR + 1/R^2".into(),
                });
                h_max_bounds.push(HMaxBound {
                    rule: RuleId::RoundFree,
                    h_max: Some(h_max),
                });
                // Bifurcation radius at this height: aR0 + 1/R0^2 = pi^2/h^2.
                if a < 0.0 {
                    let target = pi * pi / (h * h);
                    let f = |r: f64| a * r + 1.0 / (r * r) - target;
                    let (mut lo, mut hi) = (1e-6, 1e6);
                    if f(lo) > 0.0 && f(hi) < 0.0 {
                        for _ in 0..200 {
                            let mid = 0.5 * (lo + hi);
                            if f(mid) > 0.0 {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        let r0 = 0.5 * (lo + hi);
                        verdicts.push(Verdict {
                            rule: RuleId::BifurcationFlag,
                            outcome: if radius <= r0 {
                                Outcome::Flagged
                            } else {
                                Outcome::NotFlagged
                            },
                            h_limit: None,
                            quantity: Some(r0),
                            note: "free-boundary bifurcation radius R0 at this height; \
                                   non-cylindrical equilibria branch off at R0"
                                .into(),
                        });
                    }
                }
            }
        }
        ProblemKind::Fixed => {
            let lhs1 = 4.0 * pi * pi / (h * h);
            let h1 = if sq > 0.0 {
                Some(2.0 * pi / sq.sqrt())
            } else {
                None
            };
            verdicts.push(Verdict {
                rule: RuleId::FixedC1,
                outcome: if lhs1 >= sq {
                    Outcome::NecessaryHolds
                } else {
                    Outcome::UnstableAtH
                },
                h_limit: h1,
                quantity: Some(sq),
                note: "necessary: 4pi^2/h^2 >= aR + 1/R^2".into(),
            });
            h_max_bounds.push(HMaxBound {
                rule: RuleId::FixedC1,
                h_max: h1,
            });

            let lhs2 = pi * pi / (h * h);
            let c2 = a * radius;
            let h2 = if c2 > 0.0 { Some(pi / c2.sqrt()) } else { None };
            verdicts.push(Verdict {
                rule: RuleId::FixedC2,
                outcome: if lhs2 >= c2 {
                    Outcome::NecessaryHolds
                } else {
                    Outcome::UnstableAtH
                },
                h_limit: h2,
                quantity: Some(c2),
                note: "necessary: pi^2/h^2 >= aR".into(),
            });
            h_max_bounds.push(HMaxBound {
                rule: RuleId::FixedC2,
                h_max: h2,
            });

            if a > 0.0 {
                let flagged = radius.powi(3) >= 1.0 / (3.0 * a);
                verdicts.push(Verdict {
                    rule: RuleId::BifurcationFlag,
                    outcome: if flagged {
                        Outcome::Flagged
                    } else {
                        Outcome::NotFlagged
                    },
                    h_limit: None,
                    quantity: Some(radius.powi(3) * 3.0 * a),
                    note: "R^3 >= 1/(3a): as h grows the non-axisymmetric condition fails \
                           first and a symmetry-breaking bifurcation occurs"
                        .into(),
                });
            }
            notes.push(
                "fixed-boundary stability is monotone in h: a configuration stable at h is \
                 stable at every smaller height"
                    .into(),
            );
        }
    }

    Ok(StabilityReport {
        problem,
        h,
        mu,
        j_negative,
        morse_index_lower_bound: j_negative.saturating_sub(1),
        verdicts,
        h_max_bounds,
        notes,
    })
}

/// Full rule-based report for a traced closed curve.
pub fn stability_report(
    curve: &ProfileCurve,
    params: &DropParams,
    h: f64,
    problem: ProblemKind,
    embedded: Option<bool>,
) -> Result<StabilityReport> {
    if curve.is_circular() {
        let radii: Vec<f64> = curve.samples.iter().map(|c| c.radius_sq().sqrt()).collect();
        let radius = radii.iter().sum::<f64>() / radii.len() as f64;
        return round_cylinder_report(params.a(), params.lambda0(), radius, h, problem);
    }
    let spectrum = hill_eigenvalues(&HillProblem::from_curve(curve, params)?, 8)?;
    let mu1 = spectrum.eigenvalues[0];
    let j_negative = spectrum.eigenvalues.iter().filter(|l| **l < -1e-9).count();

    let mut verdicts = Vec::new();
    let mut h_max_bounds = Vec::new();
    let mut notes = Vec::new();

    match problem {
        ProblemKind::Free => {
            verdicts.extend(cp_rules(curve, params, Some(&spectrum), embedded));
            match height_bounds(curve, params, ProblemKind::Free) {
                Ok(hb) => {
                    let outcome = if h > hb.h_max {
                        Outcome::UnstableAtH
                    } else {
                        Outcome::NecessaryHolds
                    };
                    verdicts.push(Verdict {
                        rule: RuleId::HeightBound,
                        outcome,
                        h_limit: Some(hb.h_max),
                        quantity: Some(hb.middle),
                        note: "stability requires the exponential bound middle <= pi^2/h^2".into(),
                    });
                    h_max_bounds.push(HMaxBound {
                        rule: RuleId::HeightBound,
                        h_max: Some(hb.h_max),
                    });
                }
                Err(Error::CircularInput) => {}
                Err(e) => return Err(e),
            }
            if verdicts.iter().all(|v| {
                !matches!(
                    v.outcome,
                    Outcome::UnstableAllH | Outcome::UnstableAtH | Outcome::UnstableForLargeH
                )
            }) {
                notes.push(
                    "no instability rule fired; the free-boundary characterization is complete \
                     only for round cylinders, so the verdict is inconclusive"
                        .into(),
                );
            }
        }
        ProblemKind::Fixed => {
            verdicts.extend(fixed_necessary_conditions(curve, params, h, embedded));
            if mu1 < 0.0 {
                let h_thr = 2.0 * std::f64::consts::PI / (-mu1).sqrt();
                let outcome = if h > h_thr {
                    Outcome::UnstableAtH
                } else {
                    Outcome::UnstableForLargeH
                };
                verdicts.push(Verdict {
                    rule: RuleId::CpLargeH,
                    outcome,
                    h_limit: Some(h_thr),
                    quantity: Some(mu1),
                    note: "fixed-boundary variant: u_1(s) sin(2 pi z / h) destabilizes once \
                           h > 2 pi / sqrt(-mu_1)"
                        .into(),
                });
                h_max_bounds.push(HMaxBound {
                    rule: RuleId::CpLargeH,
                    h_max: Some(h_thr),
                });
            }
            match height_bounds(curve, params, ProblemKind::Fixed) {
                Ok(hb) => {
                    let outcome = if h > hb.h_max {
                        Outcome::UnstableAtH
                    } else {
                        Outcome::NecessaryHolds
                    };
                    verdicts.push(Verdict {
                        rule: RuleId::HeightBound,
                        outcome,
                        h_limit: Some(hb.h_max),
                        quantity: Some(hb.middle),
                        note: "stability requires the exponential bound middle <= 4pi^2/h^2".into(),
                    });
                    h_max_bounds.push(HMaxBound {
                        rule: RuleId::HeightBound,
                        h_max: Some(hb.h_max),
                    });
                }
                Err(Error::CircularInput) => {}
                Err(e) => return Err(e),
            }
            notes.push(
                "fixed-boundary stability is monotone in h; all fixed-problem rules here are \
                 necessary conditions"
                    .into(),
            );
        }
    }

    Ok(StabilityReport {
        problem,
        h,
        mu: spectrum.eigenvalues.clone(),
        j_negative,
        morse_index_lower_bound: j_negative.saturating_sub(1),
        verdicts,
        h_max_bounds,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn flat_potential_spectrum_is_the_square_ladder() {
        let problem = HillProblem::constant(2.0 * PI, 0.0, 512);
        let sp = hill_eigenvalues(&problem, 5).unwrap();
        let expect = [0.0, 1.0, 1.0, 4.0, 4.0];
        for (got, want) in sp.eigenvalues.iter().zip(expect) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn constant_potential_shifts_the_ladder() {
        let (len, c) = (5.0, 0.37);
        let problem = HillProblem::constant(len, c, 512);
        let sp = hill_eigenvalues(&problem, 7).unwrap();
        let mut expect = vec![-c];
        for j in 1..=3 {
            let v = (2.0 * PI * j as f64 / len).powi(2) - c;
            expect.push(v);
            expect.push(v);
        }
        for (got, want) in sp.eigenvalues.iter().zip(expect) {
            assert_relative_eq!(*got, want, max_relative = 1e-6);
        }
    }

    #[test]
    fn round_report_free_anchor() {
        // a = -1: equilibrium radius solves -R^3 - 2R + 2 = 0, and
        // h_max = pi / sqrt(aR + 1/R^2) ~ 3.290.
        let radius = {
            let f = |r: f64| -r * r * r - 2.0 * r + 2.0;
            let (mut lo, mut hi) = (0.1, 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (f(mid) > 0.0) == (f(lo) > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let report = round_cylinder_report(-1.0, 1.0, radius, 1.0, ProblemKind::Free).unwrap();
        let v = report
            .verdicts
            .iter()
            .find(|v| v.rule == RuleId::RoundFree)
            .unwrap();
        assert_eq!(v.outcome, Outcome::StableAtH);
        let sq = -radius + 1.0 / (radius * radius);
        assert_relative_eq!(v.quantity.unwrap(), sq, max_relative = 1e-12);
        assert_relative_eq!(v.h_limit.unwrap(), PI / sq.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(v.h_limit.unwrap(), 3.290, epsilon = 1e-3);
    }

    #[test]
    fn round_report_stable_for_all_heights_when_rotation_dominates() {
        // For a <= -8 the equilibrium radius satisfies aR + 1/R^2 <= 0.
        let p = DropParams::rotating(-9.0, 0.0).unwrap();
        let radius = circle_radii(&p).unwrap()[0].radius;
        let report = round_cylinder_report(-9.0, 1.0, radius, 4.0, ProblemKind::Free).unwrap();
        let v = report
            .verdicts
            .iter()
            .find(|v| v.rule == RuleId::RoundFree)
            .unwrap();
        assert_eq!(v.outcome, Outcome::StableAllH);
    }

    #[test]
    fn round_report_positive_a_is_prop_a_unstable() {
        let p = DropParams::rotating(1.0, 0.0).unwrap();
        let radius = circle_radii(&p).unwrap()[0].radius;
        let report = round_cylinder_report(1.0, 1.0, radius, 0.5, ProblemKind::Free).unwrap();
        let v = report
            .verdicts
            .iter()
            .find(|v| v.rule == RuleId::PropA)
            .unwrap();
        assert_eq!(v.outcome, Outcome::UnstableAllH);
    }

    #[test]
    fn fixed_conditions_on_a_circle_match_the_analytic_form() {
        // Counterclockwise circle: A = pi R^2, oint kappa^2 ds = 2 pi / R.
        let r = 1.7;
        let curve = ProfileCurve::circle(r, -1, 4096);
        let params = DropParams::rotating(0.3, 0.0).unwrap();
        let h = 2.0;
        let v = fixed_necessary_conditions(&curve, &params, h, Some(true));
        let rhs = v[0].quantity.unwrap();
        let expect = 2.0 * PI / r + 2.0 * 0.3 * PI * r * r;
        assert_relative_eq!(rhs, expect, max_relative = 1e-5);
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn fixed_condition_vacuous_for_strongly_negative_a() {
        let r = 1.0;
        let curve = ProfileCurve::circle(r, -1, 2048);
        let params = DropParams::rotating(-20.0, 0.0).unwrap();
        let v = fixed_necessary_conditions(&curve, &params, 50.0, None);
        assert!(v[0].quantity.unwrap() < 0.0);
        assert_eq!(v[0].outcome, Outcome::NecessaryHolds);
        assert!(v[0].h_limit.is_none());
    }

    #[test]
    fn height_bounds_reject_circles() {
        let curve = ProfileCurve::circle(1.0, 1, 512);
        let params = DropParams::rotating(-1.0, 0.0).unwrap();
        assert!(matches!(
            height_bounds(&curve, &params, ProblemKind::Free),
            Err(Error::CircularInput)
        ));
    }

    #[test]
    fn second_variation_constant_mode_on_circle_matches_c1_threshold() {
        // u = 1, f = sin(2 pi z / h) on the counterclockwise circle with
        // V = aR + 1/R^2: the sign flips exactly at 4 pi^2 / h^2 = V.
        let a = 8.0 / 27.0;
        let radius = 3.0;
        let curve = ProfileCurve::circle(radius, -1, 2048);
        let params = DropParams::rotating(a, 0.0).unwrap();
        let u = vec![1.0; curve.samples.len()];
        let v_at = |h: f64| {
            second_variation(&curve, &params, &u, ZMode::Sin(2), h)
                .unwrap()
                .value
        };
        // V = 1/9 + 8/9 = 1, threshold h* = 2 pi.
        assert!(v_at(2.0 * PI - 0.2) > 0.0);
        assert!(v_at(2.0 * PI + 0.2) < 0.0);
    }

    #[test]
    fn mean_value_warning_for_odd_cosine_mode() {
        let curve = ProfileCurve::circle(1.0, -1, 512);
        let params = DropParams::rotating(0.1, 0.0).unwrap();
        let u = vec![1.0; curve.samples.len()];
        let sv = second_variation(&curve, &params, &u, ZMode::Cos(1), 1.0).unwrap();
        assert!(!sv.mean_zero_ok);
        let sv = second_variation(&curve, &params, &u, ZMode::Sin(1), 1.0).unwrap();
        assert!(sv.mean_zero_ok);
    }

    #[test]
    fn circle_energy_matches_closed_form() {
        // G = 2 pi R + lambda0 pi R^2 - a pi R^4 / 4 on the counterclockwise
        // circle (positive area).
        let (a, l0, r) = (0.7, 1.0, 1.3);
        let params = DropParams::unrestricted(a, l0, 0.0).unwrap();
        let curve = ProfileCurve::circle(r, -1, 4096);
        let e = curve_energy(&curve, &params);
        assert_relative_eq!(e.length, 2.0 * PI * r, max_relative = 1e-6);
        assert_relative_eq!(e.area, PI * r * r, max_relative = 1e-6);
        assert_relative_eq!(e.second_moment, 0.5 * PI * r.powi(4), max_relative = 1e-6);
        let expect = 2.0 * PI * r + l0 * PI * r * r - a * PI * r.powi(4) / 4.0;
        assert_relative_eq!(e.total, expect, max_relative = 1e-6);
    }

    #[test]
    fn unit_circle_energy_is_its_length() {
        let params = DropParams::unrestricted(0.0, 0.0, 0.0).unwrap();
        let curve = ProfileCurve::circle(1.0, -1, 4096);
        let e = curve_energy(&curve, &params);
        assert_relative_eq!(e.total, 2.0 * PI, max_relative = 1e-7);
    }

    #[test]
    fn equilibrium_circle_is_energy_critical_in_the_matched_orientation() {
        // d/dR of the energy vanishes at the equilibrium radius when the
        // circle is traversed with the orientation reported by circle_radii.
        for a in [-1.0, 0.2, 1.0] {
            let p = DropParams::rotating(a, 0.0).unwrap();
            for c in circle_radii(&p).unwrap() {
                let energy = |radius: f64| {
                    let curve = ProfileCurve::circle(radius, c.orientation, 4096);
                    curve_energy(&curve, &p).total
                };
                let dr = 1e-5;
                let d = (energy(c.radius + dr) - energy(c.radius - dr)) / (2.0 * dr);
                assert!(
                    d.abs() < 1e-5,
                    "dG/dR = {d} at a = {a}, R = {}, o = {}",
                    c.radius,
                    c.orientation
                );
            }
        }
    }

    #[test]
    fn sign_change_counter_ignores_grazing_zeros() {
        let vals = [1.0, 0.0, 1.0, -1.0, 1e-15, -1.0, 1.0];
        assert_eq!(sign_changes(&vals, 1e-9), 2);
    }
}
