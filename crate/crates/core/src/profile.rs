//! Profile-curve tracing.
//!
//! The planar profile curve of an equilibrium cylinder solves
//! `x' = cos(theta), y' = sin(theta), theta' = -lambda0 + a/2 (x^2 + y^2)`.
//! The trace is seeded from a point `(xi1, xi2)` of the level set `G = C` by
//! inverting the TreadmillSled relations at one point: the initial state
//! `(x, y, theta) = (xi1, -xi2, 0)` satisfies them with `theta = 0`. A fourth
//! component carries the lifted polar angle, `theta~' = xi2 / (x^2 + y^2)`,
//! whose total change over one fundamental piece is the rotation angle
//! relating consecutive pieces.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{locate_event, DenseStep, Dopri5, OdeOptions};
use crate::params::DropParams;
use crate::quadrature::{arc_length, Band};

/// One sample of a traced profile curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub kappa: f64,
}

impl CurveSample {
    fn from_state(s: f64, state: &[f64; 4], params: &DropParams) -> Self {
        let (x, y, theta) = (state[0], state[1], state[2]);
        let r = x * x + y * y;
        CurveSample {
            s,
            x,
            y,
            theta,
            xi1: x * theta.cos() + y * theta.sin(),
            xi2: x * theta.sin() - y * theta.cos(),
            kappa: params.kappa(r),
        }
    }

    pub fn radius_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

/// Tracing controls.
#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    pub ode: OdeOptions,
    /// Uniform samples emitted per fundamental piece.
    pub samples_per_piece: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            ode: OdeOptions::default(),
            samples_per_piece: 2048,
        }
    }
}

/// One traced arc whose TreadmillSled covers its level-set component exactly
/// once. Samples are uniform in arc length and include both endpoints.
#[derive(Debug, Clone, Serialize)]
pub struct FundamentalPiece {
    pub samples: Vec<CurveSample>,
    pub delta_theta_measured: f64,
    pub length: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub band: Band,
}

/// Rotational symmetry class of a piece angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SymmetryKind {
    /// `delta_theta / 2pi = num / den` in lowest terms.
    Rational {
        num: i64,
        den: u64,
    },
    Irrational,
    Exceptional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryType {
    pub kind: SymmetryKind,
    /// Fundamental pieces needed to close the curve (the order of the
    /// rotation group generated by the piece angle).
    pub group_order: Option<u64>,
}

/// Assembled planar curve. Closed curves store `n` uniform samples without
/// repeating the start point; open ones include both endpoints.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileCurve {
    pub samples: Vec<CurveSample>,
    pub closed: bool,
    pub piece_count: usize,
    pub piece_length: f64,
    pub total_length: f64,
}

fn rhs(params: &DropParams) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + '_ {
    let (a, l0) = (params.a(), params.lambda0());
    move |_s, y| {
        let (x, yy, th) = (y[0], y[1], y[2]);
        let r = x * x + yy * yy;
        let xi2 = x * th.sin() - yy * th.cos();
        let theta_tilde_rate = if r > 0.0 { xi2 / r } else { -0.5 * l0 };
        [th.cos(), th.sin(), -l0 + 0.5 * a * r, theta_tilde_rate]
    }
}

fn initial_state(start: (f64, f64)) -> [f64; 4] {
    let (xi1, xi2) = start;
    [xi1, -xi2, 0.0, (-xi2).atan2(xi1)]
}

/// Resample stored dense steps uniformly on `[0, s_end]` with `n + 1` points
/// (both endpoints included).
fn resample(steps: &[DenseStep<4>], s_end: f64, n: usize, params: &DropParams) -> Vec<CurveSample> {
    let mut out = Vec::with_capacity(n + 1);
    let mut idx = 0usize;
    for i in 0..=n {
        let s = s_end * i as f64 / n as f64;
        while idx + 1 < steps.len() && steps[idx].s_end() < s {
            idx += 1;
        }
        let state = steps[idx].eval(s);
        out.push(CurveSample::from_state(s, &state, params));
    }
    out
}

/// Integrate the profile ODE from a level-set point.
///
/// The start must satisfy `G(start) = C` within `1e-6 (1 + |C|)`.
pub fn integrate_profile(
    params: &DropParams,
    start: (f64, f64),
    max_arclength: f64,
    opts: &TraceOptions,
) -> Result<Vec<CurveSample>> {
    let g0 = params.eval_g(start.0, start.1);
    if (g0 - params.c()).abs() > 1e-6 * (1.0 + params.c().abs()) {
        return Err(Error::InvalidInput(format!(
            "start point is not on the level set: G = {g0}, C = {}",
            params.c()
        )));
    }
    if !(max_arclength > 0.0) {
        return Err(Error::InvalidInput("max_arclength must be positive".into()));
    }
    let f = rhs(params);
    let mut stepper = Dopri5::new(&f, 0.0, initial_state(start), opts.ode);
    let mut steps = Vec::new();
    while stepper.s < max_arclength {
        let remaining = max_arclength - stepper.s;
        // Clamp the proposed step so the last one lands on the endpoint.
        if stepper.h > remaining {
            stepper.h = remaining;
        }
        steps.push(stepper.step()?);
    }
    Ok(resample(
        &steps,
        max_arclength,
        opts.samples_per_piece,
        params,
    ))
}

/// Trace one fundamental piece over a band with simple endpoints.
///
/// Starting on the axis point `(0, xi2(r_lo))` of the level set, the
/// TreadmillSled crosses the `xi2`-axis (`xi1 = 0`) exactly twice per
/// traversal of its component: once at the outer radius, once back at the
/// inner one. The piece therefore ends at the second located zero of `xi1`.
pub fn fundamental_piece(
    params: &DropParams,
    band: &Band,
    opts: &TraceOptions,
) -> Result<FundamentalPiece> {
    if band.width() <= 0.0 {
        return Err(Error::Degenerate);
    }
    if band.has_multiple_endpoint() {
        return Err(Error::Exceptional);
    }
    let est_length = arc_length(params, band)?;
    let xi2_start = params.level_xi2(band.r_lo);
    let start = (0.0, xi2_start);

    let mut ode = opts.ode;
    ode.max_step = ode.max_step.min(est_length / 16.0);
    let f = rhs(params);
    let mut stepper = Dopri5::new(&f, 0.0, initial_state(start), ode);

    let xi1_of = |_s: f64, y: &[f64; 4]| y[0] * y[2].cos() + y[1] * y[2].sin();
    // Arm the zero-crossing detector only after xi1 has clearly left its
    // initial zero; scale by the band's interior xi1 magnitude so that
    // narrow bands still arm.
    let q = crate::quartic::QuarticQ::build(params);
    let q_mid = q.eval(0.5 * (band.r_lo + band.r_hi)).max(0.0);
    let arm_scale = (1e-3 * q_mid.sqrt() / 8.0).max(1e-12);
    let s_max = 10.0 * est_length;

    let mut steps: Vec<DenseStep<4>> = Vec::new();
    let mut armed = false;
    let mut crossings = 0usize;
    let mut prev_s = 0.0;
    let mut prev_g = 0.0_f64;
    let mut s_end = None;
    let mut end_state = [0.0; 4];

    while s_end.is_none() {
        if stepper.s > s_max {
            return Err(Error::NonClosure(s_max));
        }
        let step = stepper.step()?;
        let g = xi1_of(stepper.s, &stepper.y);
        if !armed {
            if g.abs() > arm_scale {
                armed = true;
            }
        } else if prev_g != 0.0 && g.signum() != prev_g.signum() {
            let s_root = locate_event(&step, |s, y| xi1_of(s, y), prev_s, step.s_end());
            let state = step.eval(s_root);
            let r = state[0] * state[0] + state[1] * state[1];
            crossings += 1;
            let near_hi = (r - band.r_hi).abs() < (r - band.r_lo).abs();
            if crossings == 1 && !near_hi {
                return Err(Error::NonClosure(s_root));
            }
            if crossings == 2 {
                if near_hi {
                    return Err(Error::NonClosure(s_root));
                }
                s_end = Some(s_root);
                end_state = state;
            }
        }
        prev_s = stepper.s;
        prev_g = g;
        steps.push(step);
    }

    let s_end = s_end.unwrap();
    // The TreadmillSled must have returned to its start.
    let end_sample = CurveSample::from_state(s_end, &end_state, params);
    let ts_gap = (end_sample.xi1.powi(2) + (end_sample.xi2 - xi2_start).powi(2)).sqrt();
    if ts_gap > 1e-5 * (1.0 + xi2_start.abs()) {
        return Err(Error::NonClosure(s_end));
    }

    let samples = resample(&steps, s_end, opts.samples_per_piece, params);
    let (mut r_min, mut r_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for smp in &samples {
        let r = smp.radius_sq();
        r_min = r_min.min(r);
        r_max = r_max.max(r);
    }
    let theta_tilde_start = initial_state(start)[3];
    Ok(FundamentalPiece {
        samples,
        delta_theta_measured: end_state[3] - theta_tilde_start,
        length: s_end,
        r_min,
        r_max,
        band: *band,
    })
}

/// Truncated trace of an exceptional drop (a band endpoint of multiplicity
/// >= 2). The curve spirals onto the circle of squared radius equal to the
/// > multiple root; integration stops either at `max_arclength` or once the
/// > squared radius comes within `1e-5` (relative) of the multiple root. Past
/// > that point the level constant's own rounding error lets the trace drift
/// > across the separatrix and the radius stops being monotone.
#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalTrace {
    pub samples: Vec<CurveSample>,
    pub limit_radius_estimate: f64,
    pub double_root: f64,
    pub truncated_at: f64,
}

pub fn trace_exceptional(
    params: &DropParams,
    band: &Band,
    max_arclength: f64,
    opts: &TraceOptions,
) -> Result<ExceptionalTrace> {
    let (r_start, r_dbl) = if band.mult_lo >= 2 && band.mult_hi == 1 {
        (band.r_hi, band.r_lo)
    } else if band.mult_hi >= 2 && band.mult_lo == 1 {
        (band.r_lo, band.r_hi)
    } else {
        return Err(Error::InvalidInput(
            "exceptional trace needs exactly one multiple band endpoint".into(),
        ));
    };
    let start = (0.0, params.level_xi2(r_start));
    let stop_gap = 1e-5 * (1.0 + r_dbl);

    let f = rhs(params);
    let mut ode = opts.ode;
    ode.max_step = ode.max_step.min(0.25 * (1.0 + band.width().sqrt()));
    let mut stepper = Dopri5::new(&f, 0.0, initial_state(start), ode);
    let mut steps = Vec::new();
    let mut s_stop = max_arclength;
    loop {
        if stepper.s >= max_arclength {
            break;
        }
        let remaining = max_arclength - stepper.s;
        if stepper.h > remaining {
            stepper.h = remaining;
        }
        let step = stepper.step()?;
        let r = stepper.y[0] * stepper.y[0] + stepper.y[1] * stepper.y[1];
        steps.push(step);
        if (r - r_dbl).abs() < stop_gap {
            s_stop = stepper.s;
            break;
        }
    }
    let n = opts.samples_per_piece;
    let samples = resample(&steps, s_stop, n, params);

    // Aitken extrapolation of R(s) from the trace tail.
    let radii: Vec<f64> = samples.iter().map(|c| c.radius_sq().sqrt()).collect();
    let m = radii.len();
    let limit = if m >= 5 {
        let (u, v, w) = (radii[m - 5], radii[m - 3], radii[m - 1]);
        let denom = (w - v) - (v - u);
        if denom.abs() > 1e-14 {
            w - (w - v) * (w - v) / denom
        } else {
            *radii.last().unwrap()
        }
    } else {
        *radii.last().unwrap()
    };
    Ok(ExceptionalTrace {
        samples,
        limit_radius_estimate: limit,
        double_root: r_dbl,
        truncated_at: s_stop,
    })
}

/// Pointwise TreadmillSled of a sampled curve (no smoothing).
pub fn treadmill_sled(samples: &[CurveSample]) -> Vec<(f64, f64)> {
    samples
        .iter()
        .map(|c| {
            (
                c.x * c.theta.cos() + c.y * c.theta.sin(),
                c.x * c.theta.sin() - c.y * c.theta.cos(),
            )
        })
        .collect()
}

/// Decide the symmetry class of a piece angle by continued fractions of
/// `delta_theta / 2pi`.
pub fn symmetry_type(delta_theta: f64, tol: f64, max_denominator: u64) -> SymmetryType {
    let x = delta_theta / (2.0 * std::f64::consts::PI);
    if let Some((num, den)) = rational_approx(x, tol, max_denominator) {
        SymmetryType {
            kind: SymmetryKind::Rational { num, den },
            group_order: Some(den),
        }
    } else {
        SymmetryType {
            kind: SymmetryKind::Irrational,
            group_order: None,
        }
    }
}

fn rational_approx(x: f64, tol: f64, max_den: u64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    let sign = if x < 0.0 { -1i64 } else { 1i64 };
    let target = x.abs();
    let mut val = target;
    let (mut h0, mut h1) = (1i128, 0i128);
    let (mut k0, mut k1) = (0i128, 1i128);
    for _ in 0..64 {
        let a = val.floor();
        if a > 1e17 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h0 + h1;
        let k2 = ai * k0 + k1;
        if k2 as u128 > max_den as u128 {
            break;
        }
        let approx = h2 as f64 / k2 as f64;
        if (target - approx).abs() <= tol {
            return Some((sign * h2 as i64, k2 as u64));
        }
        let frac = val - a;
        if frac < 1e-18 {
            break;
        }
        val = 1.0 / frac;
        h1 = h0;
        h0 = h2;
        k1 = k0;
        k0 = k2;
    }
    None
}

fn rotate_point(x: f64, y: f64, phi: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    (c * x - s * y, s * x + c * y)
}

fn rotated_sample(smp: &CurveSample, phi: f64, s_offset: f64) -> CurveSample {
    let (x, y) = rotate_point(smp.x, smp.y, phi);
    CurveSample {
        s: smp.s + s_offset,
        x,
        y,
        theta: smp.theta + phi,
        xi1: smp.xi1,
        xi2: smp.xi2,
        kappa: smp.kappa,
    }
}

/// Close a curve by rotating the fundamental piece through the orbit of its
/// symmetry group. The rotation step is the exact rational angle
/// `2 pi num / den`; the residual joint gap (how far the measured piece angle
/// is from that rational) must stay below `snap_tol` relative to the curve
/// size.
pub fn assemble_curve(
    piece: &FundamentalPiece,
    symmetry: &SymmetryType,
    snap_tol: f64,
) -> Result<ProfileCurve> {
    let SymmetryKind::Rational { num, den } = symmetry.kind else {
        return Err(Error::InvalidInput(
            "assembly needs a rational symmetry; use assemble_partial for dense curves".into(),
        ));
    };
    let k = den.max(1) as usize;
    let phi = 2.0 * std::f64::consts::PI * num as f64 / den as f64;
    let first = piece.samples.first().ok_or(Error::Degenerate)?;
    let last = piece.samples.last().ok_or(Error::Degenerate)?;
    let (rx, ry) = rotate_point(first.x, first.y, phi);
    let gap = ((last.x - rx).powi(2) + (last.y - ry).powi(2)).sqrt();
    let tol = snap_tol * (1.0 + piece.r_max.sqrt());
    if gap > tol {
        return Err(Error::NotClosed { gap, tol });
    }
    let n = piece.samples.len() - 1;
    let mut samples = Vec::with_capacity(n * k);
    for j in 0..k {
        let angle = phi * j as f64;
        let offset = piece.length * j as f64;
        for smp in &piece.samples[..n] {
            samples.push(rotated_sample(smp, angle, offset));
        }
    }
    Ok(ProfileCurve {
        samples,
        closed: true,
        piece_count: k,
        piece_length: piece.length,
        total_length: piece.length * k as f64,
    })
}

/// Lay out `copies` rotated copies of the piece without requiring closure
/// (density visualization of irrational angles). The rotation step is the
/// measured piece angle.
pub fn assemble_partial(piece: &FundamentalPiece, copies: usize) -> ProfileCurve {
    let copies = copies.max(1);
    let phi = piece.delta_theta_measured;
    let n = piece.samples.len() - 1;
    let mut samples = Vec::with_capacity(n * copies + 1);
    for j in 0..copies {
        let angle = phi * j as f64;
        let offset = piece.length * j as f64;
        for smp in &piece.samples[..n] {
            samples.push(rotated_sample(smp, angle, offset));
        }
    }
    let j = copies as f64;
    samples.push(rotated_sample(
        piece.samples.last().unwrap(),
        phi * (j - 1.0),
        piece.length * (j - 1.0),
    ));
    ProfileCurve {
        samples,
        closed: false,
        piece_count: copies,
        piece_length: piece.length,
        total_length: piece.length * copies as f64,
    }
}

impl ProfileCurve {
    /// Exact circle of the given radius; `orientation = +1` traverses
    /// clockwise (curvature `+1/R`), `-1` counterclockwise (`-1/R`).
    pub fn circle(radius: f64, orientation: i8, n: usize) -> Self {
        let o = orientation as f64;
        let length = 2.0 * std::f64::consts::PI * radius;
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let s = length * i as f64 / n as f64;
            let t = s / radius;
            let theta = 0.5 * (1.0 - o) * std::f64::consts::PI - o * t;
            samples.push(CurveSample {
                s,
                x: o * radius * t.sin(),
                y: radius * t.cos(),
                theta,
                xi1: 0.0,
                xi2: -o * radius,
                kappa: o / radius,
            });
        }
        ProfileCurve {
            samples,
            closed: true,
            piece_count: 1,
            piece_length: length,
            total_length: length,
        }
    }

    pub fn positions(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|c| (c.x, c.y)).collect()
    }

    /// Mean squared radius deviation test for circles.
    pub fn is_circular(&self) -> bool {
        let radii: Vec<f64> = self.samples.iter().map(|c| c.radius_sq().sqrt()).collect();
        let mean = radii.iter().sum::<f64>() / radii.len() as f64;
        radii
            .iter()
            .all(|r| (r - mean).abs() <= 1e-7 * (1.0 + mean))
    }

    /// Signed (algebraic) area by the shoelace rule.
    pub fn signed_area(&self) -> f64 {
        let pts = &self.samples;
        let n = pts.len();
        let mut acc = 0.0;
        for i in 0..n {
            let j = (i + 1) % n;
            acc += pts[i].x * pts[j].y - pts[j].x * pts[i].y;
        }
        0.5 * acc
    }

    /// Polyline length (closing segment included for closed curves).
    pub fn polyline_length(&self) -> f64 {
        let pts = &self.samples;
        let n = pts.len();
        let last = if self.closed { n } else { n - 1 };
        let mut acc = 0.0;
        for i in 0..last {
            let j = (i + 1) % n;
            acc += ((pts[j].x - pts[i].x).powi(2) + (pts[j].y - pts[i].y).powi(2)).sqrt();
        }
        acc
    }
}
