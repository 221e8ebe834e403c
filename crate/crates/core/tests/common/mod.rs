//! Shared fixtures for the integration suites: level hunting by bisection on
//! the piece angle, curve assembly recipes, and sequence extrapolation.

#![allow(dead_code)]

use drop_moduli::moduli::classify;
use drop_moduli::profile::{
    assemble_curve, fundamental_piece, symmetry_type, FundamentalPiece, ProfileCurve, TraceOptions,
};
use drop_moduli::quadrature::{delta_theta, Band};
use drop_moduli::DropParams;

/// Aitken delta-squared extrapolation of the last three terms.
pub fn aitken(seq: &[f64]) -> f64 {
    let n = seq.len();
    assert!(n >= 3);
    let (u, v, w) = (seq[n - 3], seq[n - 2], seq[n - 1]);
    let denom = (w - v) - (v - u);
    if denom.abs() < 1e-300 {
        w
    } else {
        w - (w - v) * (w - v) / denom
    }
}

pub fn band_angle(params: &DropParams, band_idx: usize) -> f64 {
    let label = classify(params).unwrap();
    delta_theta(params, &label.bands[band_idx])
        .unwrap()
        .delta_theta
}

pub fn band(params: &DropParams, band_idx: usize) -> Band {
    classify(params).unwrap().bands[band_idx]
}

/// Bisect the level `C` in `[c_lo, c_hi]` until the selected band's angle
/// equals `target`.
pub fn find_level_with_angle(
    a: f64,
    lambda0: f64,
    c_lo: f64,
    c_hi: f64,
    band_idx: usize,
    target: f64,
) -> f64 {
    let angle = |c: f64| {
        let p = DropParams::new(a, lambda0, c).unwrap();
        band_angle(&p, band_idx) - target
    };
    let (mut lo, mut hi) = (c_lo, c_hi);
    let flo = angle(lo);
    assert!(
        flo * angle(hi) < 0.0,
        "no sign change for target {target} on [{c_lo}, {c_hi}] (band {band_idx})"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if (angle(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A recipe for one closed equilibrium curve: hunt the level whose piece
/// angle is the rational target, then trace and assemble.
#[derive(Debug, Clone, Copy)]
pub struct CurveRecipe {
    pub a: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub band_idx: usize,
    /// Target angle as (num, den) of 2 pi.
    pub num: i64,
    pub den: u64,
}

pub struct ClosedCurve {
    pub params: DropParams,
    pub piece: FundamentalPiece,
    pub curve: ProfileCurve,
    pub recipe: CurveRecipe,
}

pub fn build_closed_curve(recipe: &CurveRecipe, opts: &TraceOptions) -> ClosedCurve {
    let target = 2.0 * std::f64::consts::PI * recipe.num as f64 / recipe.den as f64;
    let c = find_level_with_angle(
        recipe.a,
        1.0,
        recipe.c_lo,
        recipe.c_hi,
        recipe.band_idx,
        target,
    );
    let params = DropParams::rotating(recipe.a, c).unwrap();
    let piece = fundamental_piece(&params, &band(&params, recipe.band_idx), opts).unwrap();
    let sym = symmetry_type(piece.delta_theta_measured, 1e-6, 256);
    assert_eq!(
        sym.kind,
        drop_moduli::SymmetryKind::Rational {
            num: recipe.num,
            den: recipe.den
        },
        "recipe {recipe:?} produced angle {}",
        piece.delta_theta_measured
    );
    let curve = assemble_curve(&piece, &sym, 1e-5).unwrap();
    ClosedCurve {
        params,
        piece,
        curve,
        recipe: *recipe,
    }
}

/// Closed-curve recipes spanning one to six fundamental pieces across both
/// signs of `a`. Brackets were read off coarse scans of the piece angle.
pub fn closed_curve_recipes() -> Vec<CurveRecipe> {
    vec![
        // Four-petal curve, angle pi/2.
        CurveRecipe {
            a: 0.2,
            c_lo: 5.0,
            c_hi: 6.5,
            band_idx: 0,
            num: 1,
            den: 4,
        },
        // Outer-band curves in the four-root region of a = 0.1, C > 0.
        CurveRecipe {
            a: 0.1,
            c_lo: 0.05,
            c_hi: 1.62,
            band_idx: 1,
            num: -1,
            den: 3,
        },
        CurveRecipe {
            a: 0.1,
            c_lo: 0.05,
            c_hi: 1.55,
            band_idx: 1,
            num: -1,
            den: 4,
        },
        CurveRecipe {
            a: 0.1,
            c_lo: 0.05,
            c_hi: 1.55,
            band_idx: 1,
            num: -1,
            den: 5,
        },
        CurveRecipe {
            a: 0.1,
            c_lo: 0.05,
            c_hi: 1.55,
            band_idx: 1,
            num: -1,
            den: 6,
        },
        // Single-band region at a = -1.
        CurveRecipe {
            a: -1.0,
            c_lo: -0.85,
            c_hi: -0.01,
            band_idx: 0,
            num: -5,
            den: 6,
        },
        // Inner and outer bands near the exceptional boundary of a = 0.2.
        CurveRecipe {
            a: 0.2,
            c_lo: -0.72,
            c_hi: -0.71,
            band_idx: 0,
            num: -3,
            den: 2,
        },
        CurveRecipe {
            a: 0.2,
            c_lo: -0.705,
            c_hi: -0.70,
            band_idx: 1,
            num: -2,
            den: 3,
        },
        // One-piece closure that self-intersects.
        CurveRecipe {
            a: 0.2,
            c_lo: -0.699,
            c_hi: -0.6986,
            band_idx: 1,
            num: -1,
            den: 1,
        },
        // High-order flower on the second band of a = 0.1, C < 0.
        CurveRecipe {
            a: 0.1,
            c_lo: -1.0,
            c_hi: -0.05,
            band_idx: 1,
            num: -1,
            den: 15,
        },
    ]
}

/// Recipes whose assembled curves are embedded: positive-angle petal curves
/// on the single band below the circle level `C_1(a)`.
pub fn embedded_curve_recipes() -> Vec<CurveRecipe> {
    let c1 = |a: f64| drop_moduli::critical_levels(a).unwrap().level(1).unwrap();
    vec![
        CurveRecipe {
            a: 0.2,
            c_lo: 5.0,
            c_hi: 6.5,
            band_idx: 0,
            num: 1,
            den: 4,
        },
        CurveRecipe {
            a: 0.1,
            c_lo: 0.05,
            c_hi: c1(0.1) - 1e-3,
            band_idx: 0,
            num: 1,
            den: 4,
        },
        CurveRecipe {
            a: 0.15,
            c_lo: 0.05,
            c_hi: c1(0.15) - 1e-3,
            band_idx: 0,
            num: 1,
            den: 4,
        },
        CurveRecipe {
            a: 0.25,
            c_lo: 0.05,
            c_hi: c1(0.25) - 1e-3,
            band_idx: 0,
            num: 1,
            den: 4,
        },
        CurveRecipe {
            a: 0.2,
            c_lo: 0.05,
            c_hi: 5.74356,
            band_idx: 0,
            num: 1,
            den: 5,
        },
    ]
}

/// Resample a per-sample scalar onto `n` uniform grid points by linear
/// interpolation (closed curve).
pub fn resample_closed(values: &[f64], n: usize) -> Vec<f64> {
    let m = values.len();
    (0..n)
        .map(|j| {
            let t = j as f64 * m as f64 / n as f64;
            let i0 = t.floor() as usize % m;
            let i1 = (i0 + 1) % m;
            let w = t - t.floor();
            values[i0] * (1.0 - w) + values[i1] * w
        })
        .collect()
}

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    (dot / (nu * nv)).abs()
}
