//! Numerical embeddedness test for closed polylines.
//!
//! Coordinates are snapped to a uniform grid (2^-42 of the curve extent) and
//! all orientation predicates are evaluated exactly in 128-bit integers, so a
//! reported crossing is a true crossing of the snapped polyline. Contacts at
//! grid resolution (collinear overlaps, unresolved vertex touches) are never
//! guessed: the test refines the sampling and, if the contact persists,
//! reports it as unresolvable at this resolution.

use crate::error::{Error, Result};
use crate::profile::ProfileCurve;

/// Grid exponent: coordinates are snapped to extent / 2^GRID_BITS.
const GRID_BITS: i32 = 42;

#[derive(Debug, Clone, Copy, PartialEq)]
enum PairOutcome {
    Disjoint,
    Crossing,
    Ambiguous,
}

fn orient(p: (i64, i64), q: (i64, i64), r: (i64, i64)) -> i128 {
    let v = (q.0 - p.0) as i128 * (r.1 - p.1) as i128 - (q.1 - p.1) as i128 * (r.0 - p.0) as i128;
    v.signum()
}

fn on_segment(p: (i64, i64), q: (i64, i64), r: (i64, i64)) -> bool {
    // Assumes p, q, r collinear: is q within the bounding box of pr?
    q.0 <= p.0.max(r.0) && q.0 >= p.0.min(r.0) && q.1 <= p.1.max(r.1) && q.1 >= p.1.min(r.1)
}

fn segment_pair(p1: (i64, i64), q1: (i64, i64), p2: (i64, i64), q2: (i64, i64)) -> PairOutcome {
    let o1 = orient(p1, q1, p2);
    let o2 = orient(p1, q1, q2);
    let o3 = orient(p2, q2, p1);
    let o4 = orient(p2, q2, q1);
    if o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 {
        return PairOutcome::Crossing;
    }
    let touch = (o1 == 0 && on_segment(p1, p2, q1))
        || (o2 == 0 && on_segment(p1, q2, q1))
        || (o3 == 0 && on_segment(p2, p1, q2))
        || (o4 == 0 && on_segment(p2, q1, q2));
    if touch {
        PairOutcome::Ambiguous
    } else {
        PairOutcome::Disjoint
    }
}

fn snap_points(points: &[(f64, f64)]) -> Vec<(i64, i64)> {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in points {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let extent = (xmax - xmin).max(ymax - ymin).max(f64::MIN_POSITIVE);
    let scale = 2f64.powi(GRID_BITS) / extent;
    points
        .iter()
        .map(|&(x, y)| {
            (
                ((x - xmin) * scale).round() as i64,
                (((y - ymin) * scale).round()) as i64,
            )
        })
        .collect()
}

/// Check a closed polyline for transverse self-intersection. Adjacent
/// segments (sharing a vertex along the polyline) are excluded.
fn closed_polyline_crossing(points: &[(f64, f64)]) -> Result<bool> {
    let snapped = snap_points(points);
    // Collapse consecutive duplicates produced by snapping.
    let mut verts: Vec<(i64, i64)> = Vec::with_capacity(snapped.len());
    for p in snapped {
        if verts.last() != Some(&p) {
            verts.push(p);
        }
    }
    while verts.len() > 1 && verts.first() == verts.last() {
        verts.pop();
    }
    let n = verts.len();
    if n < 4 {
        return Ok(false);
    }
    let seg = |i: usize| (verts[i], verts[(i + 1) % n]);

    // Sweep by x-interval: sort segment indices by min-x and prune pairs
    // whose x-intervals cannot overlap.
    let mut order: Vec<usize> = (0..n).collect();
    let xmin = |i: usize| {
        let (p, q) = seg(i);
        p.0.min(q.0)
    };
    let xmax = |i: usize| {
        let (p, q) = seg(i);
        p.0.max(q.0)
    };
    order.sort_by_key(|&i| xmin(i));

    let mut ambiguous = false;
    for a in 0..n {
        let i = order[a];
        let (p1, q1) = seg(i);
        let (ylo1, yhi1) = (p1.1.min(q1.1), p1.1.max(q1.1));
        for &j in order.iter().skip(a + 1) {
            if xmin(j) > xmax(i) {
                break;
            }
            // Exclude identical and adjacent segments.
            let adjacent = i == j || (i + 1) % n == j || (j + 1) % n == i;
            if adjacent {
                continue;
            }
            let (p2, q2) = seg(j);
            if p2.1.min(q2.1) > yhi1 || p2.1.max(q2.1) < ylo1 {
                continue;
            }
            match segment_pair(p1, q1, p2, q2) {
                PairOutcome::Crossing => return Ok(true),
                PairOutcome::Ambiguous => ambiguous = true,
                PairOutcome::Disjoint => {}
            }
        }
    }
    if ambiguous {
        Err(Error::InsufficientResolution)
    } else {
        Ok(false)
    }
}

fn resample_positions(curve: &ProfileCurve, n: usize) -> Vec<(f64, f64)> {
    let m = curve.samples.len();
    if n >= m {
        return curve.positions();
    }
    (0..n)
        .map(|i| {
            let idx = i * m / n;
            (curve.samples[idx].x, curve.samples[idx].y)
        })
        .collect()
}

/// Decide whether a closed assembled curve is embedded (free of transverse
/// self-intersections). `resolution` bounds the polyline size used for the
/// test; grid-level contacts are retried at doubled resolution before giving
/// up with [`Error::InsufficientResolution`].
pub fn is_embedded(curve: &ProfileCurve, resolution: usize) -> Result<bool> {
    if !curve.closed {
        return Err(Error::InvalidInput(
            "embeddedness is defined for closed curves".into(),
        ));
    }
    let mut res = resolution.max(64);
    for _ in 0..3 {
        let pts = resample_positions(curve, res);
        match closed_polyline_crossing(&pts) {
            Ok(c) => return Ok(!c),
            Err(Error::InsufficientResolution) => {
                res *= 2;
                continue;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::InsufficientResolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ProfileCurve;

    #[test]
    fn circle_is_embedded() {
        let c = ProfileCurve::circle(1.5, 1, 512);
        assert!(is_embedded(&c, 512).unwrap());
    }

    #[test]
    fn figure_eight_polyline_crosses() {
        // A sampled lemniscate-like loop self-crossing at the origin region.
        let n = 400;
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                (t.sin(), t.sin() * t.cos() + 0.3 * t.cos())
            })
            .collect();
        assert!(closed_polyline_crossing(&pts).unwrap());
    }

    #[test]
    fn convex_polygon_is_clean() {
        let n = 128;
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                (2.0 * t.cos(), 1.3 * t.sin())
            })
            .collect();
        assert!(!closed_polyline_crossing(&pts).unwrap());
    }
}
