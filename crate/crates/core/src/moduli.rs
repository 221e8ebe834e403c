//! Moduli-space layer: circle solutions, critical level constants, and the
//! classification of `(a, lambda0, C)` into level-set cases.
//!
//! For `lambda0 = 1` a centered circle of radius `R > 0` is an equilibrium
//! profile exactly when `R` is the absolute value of a root of
//! `Q(R) = a R^3 - 2R + 2`. Writing `h(R) = 2(R-1)/R^3`, the roots of `Q` are
//! the preimages of `a` under `h`; `h` increases on `(-inf, 0)` and on
//! `(0, 3/2)` and decreases on `(3/2, inf)`, which splits the inverse into
//! three monotone branches `R_1, R_2, R_3`. Each branch carries a critical
//! level `C_i` at which the squared circle radius `r_i = R_i^2` is a multiple
//! root of the quartic `q`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::DropParams;
use crate::quadrature::Band;
use crate::quartic::{deflate, positive_roots, QuarticQ, Root, RootList, RootTol};

/// `|C - C_i|` below which a level is treated as exactly critical.
pub const CRITICAL_SNAP: f64 = 1e-10;

/// Case-I boundary level `C_0 = -3 / 2^(2/3)`.
pub fn case_i_boundary_level() -> f64 {
    -3.0 / 2f64.powf(2.0 / 3.0)
}

/// Case-I circle radius `2^(1/3)`.
pub fn case_i_circle_radius() -> f64 {
    2f64.powf(1.0 / 3.0)
}

pub fn h_of_radius(radius: f64) -> f64 {
    2.0 * (radius - 1.0) / (radius * radius * radius)
}

/// One critical-level entry: branch index, signed radius `R_i`, squared
/// radius `r_i = R_i^2`, and the level `C_i` at which `r_i` is a multiple
/// root of `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalLevel {
    pub branch: u8,
    pub radius: f64,
    pub r: f64,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalLevels {
    pub a: f64,
    pub entries: Vec<CriticalLevel>,
}

impl CriticalLevels {
    pub fn branch(&self, i: u8) -> Option<&CriticalLevel> {
        self.entries.iter().find(|e| e.branch == i)
    }

    pub fn level(&self, i: u8) -> Option<f64> {
        self.branch(i).map(|e| e.level)
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Invert `h(R) = a` on monotone branch `i`.
fn invert_h(a: f64, branch: u8) -> Result<f64> {
    let eight_27 = 8.0 / 27.0;
    match branch {
        1 => {
            if a == 0.0 {
                return Err(Error::BranchUndefined { branch, a });
            }
            if a < 0.0 {
                // h increases from -inf to 0 on (0, 1].
                Ok(bisect(|r| h_of_radius(r) - a, 1e-12, 1.0))
            } else {
                // h increases from 0+ to +inf on (-inf, 0).
                let mut lo = -2.0;
                while h_of_radius(lo) > a {
                    lo *= 2.0;
                    if lo < -1e12 {
                        return Err(Error::BranchUndefined { branch, a });
                    }
                }
                Ok(bisect(|r| h_of_radius(r) - a, lo, -1e-12))
            }
        }
        2 => {
            if !(a > 0.0 && a <= eight_27) {
                return Err(Error::BranchUndefined { branch, a });
            }
            Ok(bisect(|r| h_of_radius(r) - a, 1.0 + 1e-15, 1.5))
        }
        3 => {
            if !(a > 0.0 && a <= eight_27) {
                return Err(Error::BranchUndefined { branch, a });
            }
            let mut hi = 3.0;
            while h_of_radius(hi) > a {
                hi *= 2.0;
                if hi > 1e12 {
                    return Err(Error::BranchUndefined { branch, a });
                }
            }
            Ok(bisect(|r| h_of_radius(r) - a, 1.5, hi))
        }
        _ => Err(Error::BranchUndefined { branch, a }),
    }
}

/// Critical level constant on branch `i`:
/// `C_i = (16 - 8 r_i + 6 a r_i^2 - a^2 r_i^3) / (4 (-2 + a r_i))`.
fn level_constant(a: f64, r: f64) -> f64 {
    (16.0 - 8.0 * r + 6.0 * a * r * r - a * a * r * r * r) / (4.0 * (-2.0 + a * r))
}

/// Critical levels for `lambda0 = 1` at the given `a != 0`. Branch 1 exists
/// for every nonzero `a`; branches 2 and 3 only for `0 < a <= 8/27`.
pub fn critical_levels(a: f64) -> Result<CriticalLevels> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::BranchUndefined { branch: 1, a });
    }
    let mut entries = Vec::new();
    for branch in 1..=3u8 {
        match invert_h(a, branch) {
            Ok(radius) => {
                let r = radius * radius;
                entries.push(CriticalLevel {
                    branch,
                    radius,
                    r,
                    level: level_constant(a, r),
                });
            }
            Err(Error::BranchUndefined { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(CriticalLevels { a, entries })
}

/// An equilibrium circle radius with the orientation sign `o` for which
/// `o / R = 1 - a R^2 / 2` holds (`o = +1` traverses clockwise, `o = -1`
/// counterclockwise; `o` is the sign of the corresponding root of `Q`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleRadius {
    pub radius: f64,
    pub orientation: i8,
    pub multiplicity: u32,
}

/// Radii (with orientations) of all centered circle equilibria for the given
/// parameters. For `lambda0 = 0, a = -1` the unique circle has radius
/// `2^(1/3)`; for `lambda0 = 1` the radii are absolute values of the roots of
/// `Q = a R^3 - 2R + 2`.
pub fn circle_radii(params: &DropParams) -> Result<Vec<CircleRadius>> {
    if !params.is_canonical() {
        return Err(Error::NonCanonicalGauge);
    }
    if params.is_case_i() {
        return Ok(vec![CircleRadius {
            radius: case_i_circle_radius(),
            orientation: 1,
            multiplicity: 1,
        }]);
    }
    let a = params.a();
    if a == 0.0 {
        // Constant-mean-curvature cylinder of radius 1.
        return Ok(vec![CircleRadius {
            radius: 1.0,
            orientation: 1,
            multiplicity: 1,
        }]);
    }
    let eight_27 = 8.0 / 27.0;
    let mut out = Vec::new();
    if (a - eight_27).abs() <= 1e-15 {
        out.push(CircleRadius {
            radius: 1.5,
            orientation: 1,
            multiplicity: 2,
        });
        out.push(CircleRadius {
            radius: 3.0,
            orientation: -1,
            multiplicity: 1,
        });
    } else if a < 0.0 {
        out.push(CircleRadius {
            radius: invert_h(a, 1)?,
            orientation: 1,
            multiplicity: 1,
        });
    } else if a < eight_27 {
        let r1 = invert_h(a, 1)?;
        out.push(CircleRadius {
            radius: invert_h(a, 2)?,
            orientation: 1,
            multiplicity: 1,
        });
        out.push(CircleRadius {
            radius: invert_h(a, 3)?,
            orientation: 1,
            multiplicity: 1,
        });
        out.push(CircleRadius {
            radius: -r1,
            orientation: -1,
            multiplicity: 1,
        });
    } else {
        let r1 = invert_h(a, 1)?;
        out.push(CircleRadius {
            radius: -r1,
            orientation: -1,
            multiplicity: 1,
        });
    }
    out.sort_by(|x, y| x.radius.total_cmp(&y.radius));
    Ok(out)
}

/// Level-set case of one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    Empty,
    CircleOnly,
    SingleBand,
    TwoBands,
    CircleAndBand,
    Exceptional,
    ExceptionalCusp,
    #[serde(rename = "CaseI-Band")]
    CaseIBand,
    #[serde(rename = "CaseI-Circle")]
    CaseICircle,
}

/// Region of the `(a, C)` moduli plane (for `lambda0 = 1`), or the case-I
/// semiline for `lambda0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionTag {
    #[serde(rename = "Ω1")]
    Omega1,
    #[serde(rename = "Ω2")]
    Omega2,
    #[serde(rename = "Ω3")]
    Omega3,
    #[serde(rename = "β1")]
    Beta1,
    #[serde(rename = "β2")]
    Beta2,
    #[serde(rename = "β3")]
    Beta3,
    #[serde(rename = "special-point")]
    SpecialPoint,
    #[serde(rename = "caseI-semiline")]
    CaseISemiline,
    #[serde(rename = "none")]
    None,
}

impl RegionTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionTag::Omega1 => "Ω1",
            RegionTag::Omega2 => "Ω2",
            RegionTag::Omega3 => "Ω3",
            RegionTag::Beta1 => "β1",
            RegionTag::Beta2 => "β2",
            RegionTag::Beta3 => "β3",
            RegionTag::SpecialPoint => "special-point",
            RegionTag::CaseISemiline => "caseI-semiline",
            RegionTag::None => "none",
        }
    }
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::Empty => "Empty",
            CaseTag::CircleOnly => "CircleOnly",
            CaseTag::SingleBand => "SingleBand",
            CaseTag::TwoBands => "TwoBands",
            CaseTag::CircleAndBand => "CircleAndBand",
            CaseTag::Exceptional => "Exceptional",
            CaseTag::ExceptionalCusp => "ExceptionalCusp",
            CaseTag::CaseIBand => "CaseI-Band",
            CaseTag::CaseICircle => "CaseI-Circle",
        }
    }
}

/// Full classification of one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassLabel {
    pub case: CaseTag,
    pub region: RegionTag,
    pub roots: RootList,
    /// Open intervals between consecutive roots on which `q > 0`.
    pub bands: Vec<Band>,
    /// Radii of circles contained in this level set (multiple roots of `q`).
    pub circle_radii_present: Vec<f64>,
    pub note: Option<String>,
}

impl ClassLabel {
    fn empty(region: RegionTag, case: CaseTag) -> Self {
        ClassLabel {
            case,
            region,
            roots: RootList::default(),
            bands: Vec::new(),
            circle_radii_present: Vec::new(),
            note: None,
        }
    }
}

fn bands_from_roots(q: &QuarticQ, roots: &RootList) -> Vec<Band> {
    let mut bands = Vec::new();
    for w in roots.roots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo.r + hi.r);
        if q.eval(mid) > 0.0 {
            bands.push(Band {
                r_lo: lo.r,
                r_hi: hi.r,
                mult_lo: lo.multiplicity,
                mult_hi: hi.multiplicity,
            });
        }
    }
    bands
}

fn circles_from_roots(roots: &RootList) -> Vec<f64> {
    roots
        .roots
        .iter()
        .filter(|r| r.multiplicity >= 2)
        .map(|r| r.r.sqrt())
        .collect()
}

/// Root list at an exactly-critical level: the squared radius `r_i` enters as
/// a double root and the remaining quadratic factor is solved in closed form.
fn roots_at_critical(q: &QuarticQ, r_i: f64, tol: &RootTol) -> RootList {
    let c1 = deflate(q.coeffs().as_ref(), r_i);
    let c2 = deflate(&c1, r_i);
    // c2 is the quadratic factor (a != 0 here).
    let mut roots = vec![Root {
        r: r_i,
        multiplicity: 2,
    }];
    if c2.len() == 3 && c2[2] != 0.0 {
        let disc = c2[1] * c2[1] - 4.0 * c2[0] * c2[2];
        if disc >= 0.0 {
            let sq = disc.sqrt();
            for r in [(-c2[1] - sq) / (2.0 * c2[2]), (-c2[1] + sq) / (2.0 * c2[2])] {
                if r >= -tol.cluster {
                    roots.push(Root {
                        r: r.max(0.0),
                        multiplicity: 1,
                    });
                }
            }
        }
    } else if c2.len() >= 2 && c2[1] != 0.0 {
        let r = -c2[0] / c2[1];
        if r >= -tol.cluster {
            roots.push(Root {
                r: r.max(0.0),
                multiplicity: 1,
            });
        }
    }
    roots.sort_by(|x, y| x.r.total_cmp(&y.r));
    // Merge a simple root that collides with the double root (cusp case).
    let mut merged: Vec<Root> = Vec::new();
    for root in roots {
        let scale = 1.0 + root.r.abs();
        if let Some(last) = merged.last_mut() {
            if (root.r - last.r).abs() <= 1e-6 * scale {
                last.multiplicity += root.multiplicity;
                continue;
            }
        }
        merged.push(root);
    }
    RootList { roots: merged }
}

/// Classify a canonical-gauge parameter point into its moduli-space case.
///
/// Levels within [`CRITICAL_SNAP`] of a critical constant are snapped onto
/// the boundary case so that double roots are not misread as close simple
/// pairs. For `a = 0` the band structure is still reported but the region is
/// `none`: that slice is the constant-mean-curvature family, outside this
/// moduli map.
pub fn classify(params: &DropParams) -> Result<ClassLabel> {
    classify_with_tol(params, &RootTol::default())
}

pub fn classify_with_tol(params: &DropParams, tol: &RootTol) -> Result<ClassLabel> {
    if !params.is_canonical() {
        return Err(Error::NonCanonicalGauge);
    }
    let c = params.c();
    let q = QuarticQ::build(params);

    if params.is_case_i() {
        let c0 = case_i_boundary_level();
        if (c - c0).abs() <= CRITICAL_SNAP {
            let snapped = DropParams::case_i(c0);
            let qs = QuarticQ::build(&snapped);
            let r0 = 2f64.powf(2.0 / 3.0);
            let roots = roots_at_critical(&qs, r0, tol);
            let bands = bands_from_roots(&qs, &roots);
            return Ok(ClassLabel {
                case: CaseTag::CaseICircle,
                region: RegionTag::CaseISemiline,
                circle_radii_present: circles_from_roots(&roots),
                roots,
                bands,
                note: None,
            });
        }
        if c < c0 {
            return Ok(ClassLabel::empty(RegionTag::None, CaseTag::Empty));
        }
        let roots = positive_roots(&q, tol)?;
        let bands = bands_from_roots(&q, &roots);
        return Ok(ClassLabel {
            case: CaseTag::CaseIBand,
            region: RegionTag::CaseISemiline,
            circle_radii_present: circles_from_roots(&roots),
            roots,
            bands,
            note: None,
        });
    }

    let a = params.a();
    if a == 0.0 {
        let roots = positive_roots(&q, tol)?;
        let bands = bands_from_roots(&q, &roots);
        let case = match (roots.roots.len(), bands.len()) {
            (0, _) => CaseTag::Empty,
            (_, 0) => CaseTag::CircleOnly,
            _ => CaseTag::SingleBand,
        };
        return Ok(ClassLabel {
            case,
            region: RegionTag::None,
            circle_radii_present: circles_from_roots(&roots),
            roots,
            bands,
            note: Some(
                "a = 0 is the constant-mean-curvature slice; it lies outside this moduli map"
                    .to_string(),
            ),
        });
    }

    let crit = critical_levels(a)?;
    let eight_27 = 8.0 / 27.0;
    let at_cusp_a = (a - eight_27).abs() <= 1e-12;

    // Snap onto a critical level when within tolerance.
    let mut snapped_branch: Option<u8> = None;
    for e in &crit.entries {
        if (c - e.level).abs() <= CRITICAL_SNAP {
            snapped_branch = Some(e.branch);
            break;
        }
    }

    if let Some(branch) = snapped_branch {
        let e = *crit.branch(branch).unwrap();
        let snapped = DropParams::rotating(a, e.level)?;
        let qs = QuarticQ::build(&snapped);
        let roots = roots_at_critical(&qs, e.r, tol);
        let bands = bands_from_roots(&qs, &roots);
        let circles = circles_from_roots(&roots);

        if at_cusp_a && branch >= 2 {
            return Ok(ClassLabel {
                case: CaseTag::ExceptionalCusp,
                region: RegionTag::SpecialPoint,
                roots,
                bands,
                circle_radii_present: circles,
                note: None,
            });
        }
        let (case, region) = match branch {
            1 => (CaseTag::CircleOnly, RegionTag::Beta1),
            2 => (CaseTag::CircleAndBand, RegionTag::Beta2),
            _ => (CaseTag::Exceptional, RegionTag::Beta3),
        };
        return Ok(ClassLabel {
            case,
            region,
            roots,
            bands,
            circle_radii_present: circles,
            note: None,
        });
    }

    let roots = positive_roots(&q, tol)?;
    let bands = bands_from_roots(&q, &roots);
    let circles = circles_from_roots(&roots);
    let multiple = roots.roots.iter().any(|r| r.multiplicity >= 2);

    let (case, region) = if multiple {
        // Defensive: a multiple root detected outside the snap window is
        // still a boundary configuration.
        match (roots.roots.len(), bands.len()) {
            (1, 0) => (CaseTag::CircleOnly, RegionTag::Beta1),
            (_, 0) => (CaseTag::CircleOnly, RegionTag::Beta1),
            (3, 1) => (CaseTag::CircleAndBand, RegionTag::Beta2),
            (_, 2) => (CaseTag::Exceptional, RegionTag::Beta3),
            _ => (CaseTag::ExceptionalCusp, RegionTag::SpecialPoint),
        }
    } else {
        match bands.len() {
            0 => (CaseTag::Empty, RegionTag::None),
            1 => (
                CaseTag::SingleBand,
                if a < 0.0 {
                    RegionTag::Omega1
                } else {
                    RegionTag::Omega3
                },
            ),
            _ => (CaseTag::TwoBands, RegionTag::Omega2),
        }
    };

    Ok(ClassLabel {
        case,
        region,
        roots,
        bands,
        circle_radii_present: circles,
        note: None,
    })
}
