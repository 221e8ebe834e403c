//! Singular band integrals.
//!
//! Both the polar-angle advance of a fundamental piece and its arc length
//! are integrals of the form `int_{r1}^{r2} g(r)/sqrt(q(r)) dr` where the
//! band endpoints are simple roots of `q`. The substitution
//! `r = r1 + (r2 - r1) sin^2 t` absorbs the inverse-square-root endpoint
//! singularities: with `q = (r - r1)(r2 - r) w(r)` the integrand becomes
//! `2 g(r(t)) / sqrt(w(r(t)))` on `[0, pi/2]`, which is smooth because `w`
//! stays strictly positive on the closed band. `w` is obtained by exact
//! synthetic deflation of `q`, never by dividing out numerically vanishing
//! factors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::DropParams;
use crate::quartic::{deflate, QuarticQ};

/// Positivity interval of `q` between two consecutive roots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub r_lo: f64,
    pub r_hi: f64,
    pub mult_lo: u32,
    pub mult_hi: u32,
}

impl Band {
    pub fn simple(r_lo: f64, r_hi: f64) -> Self {
        Band {
            r_lo,
            r_hi,
            mult_lo: 1,
            mult_hi: 1,
        }
    }

    pub fn width(&self) -> f64 {
        self.r_hi - self.r_lo
    }

    pub fn has_multiple_endpoint(&self) -> bool {
        self.mult_lo >= 2 || self.mult_hi >= 2
    }
}

/// Signed polar-angle advance of one fundamental piece, with an error
/// estimate from quadrature refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleResult {
    pub delta_theta: f64,
    pub est_error: f64,
    pub convergent: bool,
}

/// Both band angles of a two-band configuration and the discrepancy in the
/// identity `dtheta(band2) = dtheta(band1) + s` (`s = 2pi` for `C < 0`,
/// `s = 0` for `C > 0`, and `s = pi` exactly at `C = 0`, the common limit
/// convention fixed by a numeric continuity scan across the jump).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandPairCheck {
    pub band1_angle: f64,
    pub band2_angle: f64,
    pub shift: f64,
    pub discrepancy: f64,
}

// 16-point Gauss-Legendre rule on [-1, 1] (positive half; the rule is
// symmetric).
const GL16_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_8,
    0.755_404_408_355_003,
    0.865_631_202_387_831_8,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_8,
    0.062_253_523_938_647_9,
    0.027_152_459_411_754_1,
];

fn gauss16(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for i in 0..8 {
        let dx = half * GL16_X[i];
        sum += GL16_W[i] * (f(mid - dx) + f(mid + dx));
    }
    sum * half
}

/// Composite Gauss quadrature on [0, pi/2] with panel doubling until the
/// value is stable. Returns `(value, estimated_error)`.
fn refine_quadrature(f: &mut impl FnMut(f64) -> f64) -> Result<(f64, f64)> {
    let end = std::f64::consts::FRAC_PI_2;
    let mut prev = f64::NAN;
    let mut panels = 1usize;
    while panels <= 512 {
        let mut total = 0.0;
        for k in 0..panels {
            let a = end * k as f64 / panels as f64;
            let b = end * (k + 1) as f64 / panels as f64;
            total += gauss16(f, a, b);
        }
        if prev.is_finite() {
            let est = (total - prev).abs();
            if est <= f64::max(1e-12, 1e-12 * total.abs()) {
                return Ok((total, est));
            }
        }
        prev = total;
        panels *= 2;
    }
    Err(Error::NotConverged(f64::NAN))
}

/// `int g(r)/sqrt(q) dr` over a band with simple endpoints.
fn band_integral(q: &QuarticQ, band: &Band, mut g: impl FnMut(f64) -> f64) -> Result<(f64, f64)> {
    let (r1, r2) = (band.r_lo, band.r_hi);
    // Deflate q by (r - r1)(r - r2); since (r - r1)(r2 - r) = -(r - r1)(r - r2),
    // w = -quotient.
    let q1 = deflate(q.coeffs().as_ref(), r1);
    let q2 = deflate(&q1, r2);
    let w = move |r: f64| {
        let mut v = 0.0;
        for &c in q2.iter().rev() {
            v = v * r + c;
        }
        -v
    };
    let span = r2 - r1;
    let mut bad = false;
    let mut f = |t: f64| {
        let s = t.sin();
        let r = r1 + span * s * s;
        let wr = w(r);
        if wr <= 0.0 {
            bad = true;
            return 0.0;
        }
        2.0 * g(r) / wr.sqrt()
    };
    let out = refine_quadrature(&mut f)?;
    if bad {
        return Err(Error::IllConditioned(
            "deflated band factor was not positive on the band".to_string(),
        ));
    }
    Ok(out)
}

/// Parametrization of the right half of a level-set component:
/// `rho(r) = (sqrt(q)/8, (4C + r(-4 lambda0 + a r))/8)`.
pub fn rho(r: f64, params: &DropParams) -> Result<(f64, f64)> {
    let q = QuarticQ::build(params);
    let qr = q.eval(r);
    let tol = 1e-9 * q.deriv_scale(r, 0);
    if qr < -tol {
        return Err(Error::OutsideBand { r, q: qr });
    }
    Ok((qr.max(0.0).sqrt() / 8.0, params.level_xi2(r)))
}

/// Polar-angle advance over one fundamental piece:
/// `int_{r1}^{r2} (4C + a r^2 - 4 lambda0 r) / (r sqrt(q)) dr`.
///
/// The integral already covers the full piece (both symmetric halves of the
/// level-set component): per half the advance is exactly half this value.
pub fn delta_theta(params: &DropParams, band: &Band) -> Result<AngleResult> {
    if band.width() <= 0.0 {
        return Err(Error::Degenerate);
    }
    if band.has_multiple_endpoint() {
        let (r, m) = if band.mult_lo >= 2 {
            (band.r_lo, band.mult_lo)
        } else {
            (band.r_hi, band.mult_hi)
        };
        return Err(Error::Divergent { r, multiplicity: m });
    }
    let q = QuarticQ::build(params);
    let (a, l0, c) = (params.a(), params.lambda0(), params.c());
    let (value, est_error) = if band.r_lo == 0.0 {
        if c != 0.0 {
            return Err(Error::IntegrandPole);
        }
        band_integral(&q, band, |r| a * r - 4.0 * l0)?
    } else {
        band_integral(&q, band, |r| (4.0 * c + a * r * r - 4.0 * l0 * r) / r)?
    };
    Ok(AngleResult {
        delta_theta: value,
        est_error,
        convergent: true,
    })
}

/// Arc length of one fundamental piece, `int_{r1}^{r2} 8/sqrt(q) dr`
/// (both symmetric halves).
pub fn arc_length(params: &DropParams, band: &Band) -> Result<f64> {
    if band.width() <= 0.0 {
        return Err(Error::Degenerate);
    }
    if band.has_multiple_endpoint() {
        let (r, m) = if band.mult_lo >= 2 {
            (band.r_lo, band.mult_lo)
        } else {
            (band.r_hi, band.mult_hi)
        };
        return Err(Error::Divergent { r, multiplicity: m });
    }
    let q = QuarticQ::build(params);
    let (value, _) = band_integral(&q, band, |_| 8.0)?;
    Ok(value)
}

/// Check the two-band angle identity in the four-root region.
pub fn delta_theta_band_pair_check(
    params: &DropParams,
    band1: &Band,
    band2: &Band,
) -> Result<BandPairCheck> {
    let label = crate::moduli::classify(params)?;
    if label.region != crate::moduli::RegionTag::Omega2 {
        return Err(Error::WrongRegion);
    }
    let a1 = delta_theta(params, band1)?;
    let a2 = delta_theta(params, band2)?;
    let c = params.c();
    let shift = if c < 0.0 {
        2.0 * std::f64::consts::PI
    } else if c > 0.0 {
        0.0
    } else {
        std::f64::consts::PI
    };
    Ok(BandPairCheck {
        band1_angle: a1.delta_theta,
        band2_angle: a2.delta_theta,
        shift,
        discrepancy: (a2.delta_theta - a1.delta_theta - shift).abs(),
    })
}

/// Closed-form limit of the piece angle as the level approaches a critical
/// constant. For `lambda0 = 0` (case I) the limit at `C -> C_0^+` is
/// `-2 pi / sqrt(3)`. For `lambda0 = 1`,
/// `b_i(a) = pi (4 C_i + r_i (a r_i - 4)) / (r_i sqrt(A))` with
/// `A = 16 + 8a (C_i - 3 r_i) + 6 a^2 r_i^2 = -q''(r_i)/2`; branch 1 exists
/// for `a != 0`, branch 2 for `0 < a < 8/27`.
pub fn limit_delta_theta(a: f64, branch: u8, lambda0: f64) -> Result<f64> {
    if lambda0 == 0.0 {
        if a != -1.0 {
            return Err(Error::NonCanonicalGauge);
        }
        return Ok(-2.0 * std::f64::consts::PI / 3f64.sqrt());
    }
    if lambda0 != 1.0 {
        return Err(Error::NonCanonicalGauge);
    }
    if branch != 1 && branch != 2 {
        return Err(Error::BranchUndefined { branch, a });
    }
    let crit = crate::moduli::critical_levels(a)?;
    let e = crit
        .branch(branch)
        .copied()
        .ok_or(Error::BranchUndefined { branch, a })?;
    let big_a = 16.0 + 8.0 * a * (e.level - 3.0 * e.r) + 6.0 * a * a * e.r * e.r;
    let a_scale = 16.0 + (8.0 * a * (e.level - 3.0 * e.r)).abs() + 6.0 * a * a * e.r * e.r;
    if big_a <= 1e-9 * a_scale {
        // The root is at least triple there (cusp); no finite limit.
        return Err(Error::BranchUndefined { branch, a });
    }
    Ok(std::f64::consts::PI * (4.0 * e.level + e.r * (a * e.r - 4.0)) / (e.r * big_a.sqrt()))
}
