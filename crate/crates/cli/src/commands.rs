use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use drop_moduli::moduli::{case_i_boundary_level, classify, critical_levels, ClassLabel};
use drop_moduli::profile::{
    assemble_curve, assemble_partial, fundamental_piece, integrate_profile, symmetry_type,
    trace_exceptional, CurveSample, ProfileCurve, SymmetryKind, SymmetryType, TraceOptions,
};
use drop_moduli::quadrature::{delta_theta, delta_theta_band_pair_check, limit_delta_theta};
use drop_moduli::stability::{round_cylinder_report, stability_report, ProblemKind};
use drop_moduli::{DropParams, Error as CoreError};

use crate::args::{parse_band, FormatArg, NumericArgs, ParamArgs, ProblemArg};
use crate::output::{emit, fmt_float, to_json_string};

pub const SCHEMA: &str = "drop-moduli/1";

/// Errors mapped onto exit codes: usage -> 2, numerical -> 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidInput(_) | CoreError::NonCanonicalGauge => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

pub type CmdResult = Result<(), CliError>;

pub fn require_format_public(got: FormatArg, want: FormatArg, cmd: &str) -> Result<(), CliError> {
    require_format(got, want, cmd)
}

fn require_format(got: FormatArg, want: FormatArg, cmd: &str) -> Result<(), CliError> {
    if got != want {
        return Err(CliError::Usage(format!(
            "{cmd} only supports --format {}",
            match want {
                FormatArg::Json => "json",
                FormatArg::Csv => "csv",
                FormatArg::Svg => "svg",
            }
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ParamsOut {
    a: f64,
    lambda0: f64,
    #[serde(rename = "C")]
    c: f64,
}

impl From<&DropParams> for ParamsOut {
    fn from(p: &DropParams) -> Self {
        ParamsOut {
            a: p.a(),
            lambda0: p.lambda0(),
            c: p.c(),
        }
    }
}

fn params_from(args: &ParamArgs) -> Result<DropParams, CliError> {
    Ok(DropParams::new(args.a, args.lambda0, args.c)?)
}

#[derive(Serialize)]
struct SymmetryOut {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    num: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    den: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    of: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    group_order: Option<u64>,
}

impl From<&SymmetryType> for SymmetryOut {
    fn from(s: &SymmetryType) -> Self {
        match s.kind {
            SymmetryKind::Rational { num, den } => SymmetryOut {
                kind: "rational",
                num: Some(num),
                den: Some(den),
                of: Some("2pi"),
                group_order: s.group_order,
            },
            SymmetryKind::Irrational => SymmetryOut {
                kind: "irrational",
                num: None,
                den: None,
                of: None,
                group_order: None,
            },
            SymmetryKind::Exceptional => SymmetryOut {
                kind: "exceptional",
                num: None,
                den: None,
                of: None,
                group_order: None,
            },
        }
    }
}

// ---------------------------------------------------------------- classify

#[derive(Serialize)]
struct RootOut {
    r: f64,
    multiplicity: u32,
}

#[derive(Serialize)]
struct CircleOut {
    radius: f64,
    orientation: i8,
    multiplicity: u32,
}

#[derive(Serialize)]
struct LevelOut {
    branch: u8,
    radius: f64,
    r: f64,
    level: f64,
}

#[derive(Serialize)]
struct ClassifyOut {
    schema: &'static str,
    command: &'static str,
    params: ParamsOut,
    case: &'static str,
    region: &'static str,
    roots: Vec<RootOut>,
    bands: Vec<[f64; 2]>,
    circle_radii_present: Vec<f64>,
    equilibrium_circles: Vec<CircleOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    critical_levels: Option<Vec<LevelOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    case_i_boundary_level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn classify_payload(params: &DropParams) -> Result<ClassifyOut, CliError> {
    let label = classify(params)?;
    let circles = drop_moduli::circle_radii(params)?;
    let crit = if params.lambda0() == 1.0 && params.a() != 0.0 {
        Some(
            critical_levels(params.a())?
                .entries
                .iter()
                .map(|e| LevelOut {
                    branch: e.branch,
                    radius: e.radius,
                    r: e.r,
                    level: e.level,
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(ClassifyOut {
        schema: SCHEMA,
        command: "classify",
        params: params.into(),
        case: label.case.as_str(),
        region: label.region.as_str(),
        roots: label
            .roots
            .roots
            .iter()
            .map(|r| RootOut {
                r: r.r,
                multiplicity: r.multiplicity,
            })
            .collect(),
        bands: label.bands.iter().map(|b| [b.r_lo, b.r_hi]).collect(),
        circle_radii_present: label.circle_radii_present.clone(),
        equilibrium_circles: circles
            .iter()
            .map(|c| CircleOut {
                radius: c.radius,
                orientation: c.orientation,
                multiplicity: c.multiplicity,
            })
            .collect(),
        critical_levels: crit,
        case_i_boundary_level: params.is_case_i().then(case_i_boundary_level),
        note: label.note,
    })
}

pub fn cmd_classify(args: &ParamArgs, out: Option<&Path>, format: FormatArg) -> CmdResult {
    require_format(format, FormatArg::Json, "classify")?;
    let params = params_from(args)?;
    let payload = classify_payload(&params)?;
    emit(out, &(to_json_string(&payload)? + "\n"))?;
    Ok(())
}

// ---------------------------------------------------------------- critical

#[derive(Serialize)]
struct CriticalOut {
    schema: &'static str,
    command: &'static str,
    a: f64,
    lambda0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<LevelOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    case_i_boundary_level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    case_i_circle_radius: Option<f64>,
}

pub fn cmd_critical(a: f64, lambda0: f64, out: Option<&Path>, format: FormatArg) -> CmdResult {
    require_format(format, FormatArg::Json, "critical")?;
    let payload = if lambda0 == 0.0 {
        if a != -1.0 {
            return Err(CliError::Usage(
                "lambda0 = 0 requires a = -1 (canonical gauge)".to_string(),
            ));
        }
        CriticalOut {
            schema: SCHEMA,
            command: "critical",
            a,
            lambda0,
            entries: None,
            case_i_boundary_level: Some(case_i_boundary_level()),
            case_i_circle_radius: Some(drop_moduli::case_i_circle_radius()),
        }
    } else {
        let crit = critical_levels(a)?;
        CriticalOut {
            schema: SCHEMA,
            command: "critical",
            a,
            lambda0,
            entries: Some(
                crit.entries
                    .iter()
                    .map(|e| LevelOut {
                        branch: e.branch,
                        radius: e.radius,
                        r: e.r,
                        level: e.level,
                    })
                    .collect(),
            ),
            case_i_boundary_level: None,
            case_i_circle_radius: None,
        }
    };
    emit(out, &(to_json_string(&payload)? + "\n"))?;
    Ok(())
}

// ------------------------------------------------------------------- trace

#[derive(Serialize)]
struct TraceSummary {
    schema: &'static str,
    command: &'static str,
    params: ParamsOut,
    case: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    band: Option<[f64; 2]>,
    exceptional: bool,
    closed: bool,
    piece_count: usize,
    samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_theta_measured: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_theta_quadrature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetry: Option<SymmetryOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    embedded: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    limit_radius_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn samples_csv(samples: &[CurveSample]) -> String {
    let mut s = String::with_capacity(samples.len() * 140 + 64);
    s.push_str("s,x,y,theta,xi1,xi2,kappa\n");
    for c in samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            fmt_float(c.s),
            fmt_float(c.x),
            fmt_float(c.y),
            fmt_float(c.theta),
            fmt_float(c.xi1),
            fmt_float(c.xi2),
            fmt_float(c.kappa)
        );
    }
    s
}

fn circle_trace(params: &DropParams, label: &ClassLabel) -> Result<ProfileCurve, CliError> {
    let r_sq = label
        .roots
        .roots
        .iter()
        .find(|r| r.multiplicity >= 2)
        .map(|r| r.r)
        .ok_or_else(|| CliError::Numerical("no circle in this level set".to_string()))?;
    let radius = r_sq.sqrt();
    let xi2 = params.level_xi2(r_sq);
    let opts = TraceOptions::default();
    let samples = integrate_profile(
        params,
        (0.0, xi2),
        2.0 * std::f64::consts::PI * radius,
        &opts,
    )?;
    let n = samples.len() - 1; // drop the duplicated endpoint for a closed loop
    Ok(ProfileCurve {
        samples: samples[..n].to_vec(),
        closed: true,
        piece_count: 1,
        piece_length: 2.0 * std::f64::consts::PI * radius,
        total_length: 2.0 * std::f64::consts::PI * radius,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_trace(
    args: &ParamArgs,
    band_spec: &str,
    pieces: Option<usize>,
    max_arclength: f64,
    numeric: &NumericArgs,
    out: Option<&Path>,
    format: FormatArg,
) -> CmdResult {
    require_format(format, FormatArg::Csv, "trace")?;
    let params = params_from(args)?;
    let label = classify(&params)?;
    let opts = TraceOptions::default();

    let (csv, summary) = if label.bands.is_empty() {
        // Circle-only level sets trace the circle itself.
        let curve = circle_trace(&params, &label)?;
        let radius = curve.samples[0].radius_sq().sqrt();
        let csv = samples_csv(&curve.samples);
        let summary = TraceSummary {
            schema: SCHEMA,
            command: "trace",
            params: (&params).into(),
            case: label.case.as_str(),
            band: None,
            exceptional: false,
            closed: true,
            piece_count: 1,
            samples: curve.samples.len(),
            delta_theta_measured: None,
            delta_theta_quadrature: None,
            length: Some(curve.total_length),
            symmetry: None,
            embedded: Some(true),
            r_min: Some(radius * radius),
            r_max: Some(radius * radius),
            limit_radius_estimate: None,
            note: Some("level set is a single point: the profile curve is a circle".to_string()),
        };
        (csv, summary)
    } else {
        let idx = parse_band(band_spec).map_err(CliError::Usage)?;
        let band = *label
            .bands
            .get(idx)
            .ok_or_else(|| CliError::Usage(format!("band index {idx} out of range")))?;
        if band.has_multiple_endpoint() {
            let tr = trace_exceptional(&params, &band, max_arclength, &opts)?;
            let csv = samples_csv(&tr.samples);
            let summary = TraceSummary {
                schema: SCHEMA,
                command: "trace",
                params: (&params).into(),
                case: label.case.as_str(),
                band: Some([band.r_lo, band.r_hi]),
                exceptional: true,
                closed: false,
                piece_count: 1,
                samples: tr.samples.len(),
                delta_theta_measured: None,
                delta_theta_quadrature: None,
                length: Some(tr.truncated_at),
                symmetry: Some(SymmetryOut {
                    kind: "exceptional",
                    num: None,
                    den: None,
                    of: None,
                    group_order: None,
                }),
                embedded: None,
                r_min: Some(band.r_lo),
                r_max: Some(band.r_hi),
                limit_radius_estimate: Some(tr.limit_radius_estimate),
                note: Some(
                    "band endpoint is a multiple root: the piece has unbounded length and \
                     spirals onto the limit circle; trace truncated"
                        .to_string(),
                ),
            };
            (csv, summary)
        } else {
            let piece = fundamental_piece(&params, &band, &opts)?;
            let quad = delta_theta(&params, &band)?;
            let sym = symmetry_type(
                piece.delta_theta_measured,
                numeric.tol,
                numeric.max_denominator,
            );
            let mut note = None;
            let (curve, closed) = if let Some(n) = pieces {
                (assemble_partial(&piece, n), false)
            } else if matches!(sym.kind, SymmetryKind::Rational { .. }) {
                match assemble_curve(&piece, &sym, 1e-3) {
                    Ok(curve) => (curve, true),
                    Err(e) => {
                        note = Some(format!("assembly failed ({e}); emitting one piece"));
                        (assemble_partial(&piece, 1), false)
                    }
                }
            } else {
                note = Some(
                    "piece angle is not a detected rational of 2 pi: curve does not close; \
                     emitting one piece (use --pieces for more copies)"
                        .to_string(),
                );
                (assemble_partial(&piece, 1), false)
            };
            let embedded = if closed {
                drop_moduli::is_embedded(&curve, 4096).ok()
            } else {
                None
            };
            let csv = samples_csv(&curve.samples);
            let summary = TraceSummary {
                schema: SCHEMA,
                command: "trace",
                params: (&params).into(),
                case: label.case.as_str(),
                band: Some([band.r_lo, band.r_hi]),
                exceptional: false,
                closed,
                piece_count: curve.piece_count,
                samples: curve.samples.len(),
                delta_theta_measured: Some(piece.delta_theta_measured),
                delta_theta_quadrature: Some(quad.delta_theta),
                length: Some(piece.length),
                symmetry: Some((&sym).into()),
                embedded,
                r_min: Some(piece.r_min),
                r_max: Some(piece.r_max),
                limit_radius_estimate: None,
                note,
            };
            (csv, summary)
        }
    };

    let summary_json = to_json_string(&summary)? + "\n";
    match out {
        Some(path) => {
            emit(Some(path), &csv)?;
            emit(None, &summary_json)?;
        }
        None => {
            emit(None, &csv)?;
            eprint!("{summary_json}");
        }
    }
    Ok(())
}

// -------------------------------------------------------------- delta-theta

#[derive(Serialize)]
struct BandAngleOut {
    band: [f64; 2],
    divergent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    est_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetry: Option<SymmetryOut>,
}

#[derive(Serialize)]
struct PairOut {
    band1_angle: f64,
    band2_angle: f64,
    shift: f64,
    discrepancy: f64,
}

#[derive(Serialize)]
struct LimitOut {
    branch: u8,
    value: f64,
}

#[derive(Serialize)]
struct DeltaThetaOut {
    schema: &'static str,
    command: &'static str,
    params: ParamsOut,
    case: &'static str,
    region: &'static str,
    bands: Vec<BandAngleOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pair_check: Option<PairOut>,
    limits: Vec<LimitOut>,
}

pub fn cmd_delta_theta(args: &ParamArgs, out: Option<&Path>, format: FormatArg) -> CmdResult {
    require_format(format, FormatArg::Json, "delta-theta")?;
    let params = params_from(args)?;
    let label = classify(&params)?;
    let mut bands = Vec::new();
    for b in &label.bands {
        match delta_theta(&params, b) {
            Ok(res) => bands.push(BandAngleOut {
                band: [b.r_lo, b.r_hi],
                divergent: false,
                delta_theta: Some(res.delta_theta),
                est_error: Some(res.est_error),
                symmetry: Some((&symmetry_type(res.delta_theta, 1e-6, 64)).into()),
            }),
            Err(CoreError::Divergent { .. }) => bands.push(BandAngleOut {
                band: [b.r_lo, b.r_hi],
                divergent: true,
                delta_theta: None,
                est_error: None,
                symmetry: Some(SymmetryOut {
                    kind: "exceptional",
                    num: None,
                    den: None,
                    of: None,
                    group_order: None,
                }),
            }),
            Err(e) => return Err(e.into()),
        }
    }
    let pair_check =
        if label.bands.len() == 2 && label.bands.iter().all(|b| !b.has_multiple_endpoint()) {
            delta_theta_band_pair_check(&params, &label.bands[0], &label.bands[1])
                .ok()
                .map(|p| PairOut {
                    band1_angle: p.band1_angle,
                    band2_angle: p.band2_angle,
                    shift: p.shift,
                    discrepancy: p.discrepancy,
                })
        } else {
            None
        };
    let mut limits = Vec::new();
    for branch in [1u8, 2] {
        if let Ok(v) = limit_delta_theta(params.a(), branch, params.lambda0()) {
            limits.push(LimitOut { branch, value: v });
        }
    }
    let payload = DeltaThetaOut {
        schema: SCHEMA,
        command: "delta-theta",
        params: (&params).into(),
        case: label.case.as_str(),
        region: label.region.as_str(),
        bands,
        pair_check,
        limits,
    };
    emit(out, &(to_json_string(&payload)? + "\n"))?;
    Ok(())
}

// -------------------------------------------------------------------- scan

struct ScanCell {
    a: f64,
    c: f64,
    region: &'static str,
    case: &'static str,
    root_count: usize,
    bands: Vec<[f64; 2]>,
    angles: Vec<Option<f64>>,
    symmetries: Vec<String>,
    error: String,
}

fn scan_cell(a: f64, lambda0: f64, c: f64, numeric: &NumericArgs) -> ScanCell {
    let mut cell = ScanCell {
        a,
        c,
        region: "",
        case: "",
        root_count: 0,
        bands: Vec::new(),
        angles: Vec::new(),
        symmetries: Vec::new(),
        error: String::new(),
    };
    let params = match DropParams::new(a, lambda0, c) {
        Ok(p) => p,
        Err(e) => {
            cell.error = e.to_string();
            return cell;
        }
    };
    let label = match classify(&params) {
        Ok(l) => l,
        Err(e) => {
            cell.error = e.to_string();
            return cell;
        }
    };
    cell.region = label.region.as_str();
    cell.case = label.case.as_str();
    cell.root_count = label.roots.roots.len();
    for b in &label.bands {
        cell.bands.push([b.r_lo, b.r_hi]);
        match delta_theta(&params, b) {
            Ok(res) => {
                let sym = symmetry_type(res.delta_theta, numeric.tol, numeric.max_denominator);
                cell.angles.push(Some(res.delta_theta));
                cell.symmetries.push(match sym.kind {
                    SymmetryKind::Rational { num, den } => format!("{num}/{den}"),
                    SymmetryKind::Irrational => "irrational".to_string(),
                    SymmetryKind::Exceptional => "exceptional".to_string(),
                });
            }
            Err(CoreError::Divergent { .. }) => {
                cell.angles.push(None);
                cell.symmetries.push("divergent".to_string());
            }
            Err(e) => {
                cell.angles.push(None);
                cell.symmetries.push(String::new());
                if cell.error.is_empty() {
                    cell.error = e.to_string();
                }
            }
        }
    }
    cell
}

pub fn cmd_scan(
    a_range: (f64, f64),
    c_range: (f64, f64),
    grid: (usize, usize),
    lambda0: f64,
    numeric: &NumericArgs,
    out: Option<&Path>,
    format: FormatArg,
) -> CmdResult {
    require_format(format, FormatArg::Csv, "scan")?;
    let (na, nc) = grid;
    let coord = |lo: f64, hi: f64, n: usize, i: usize| {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    let points: Vec<(f64, f64)> = (0..na)
        .flat_map(|i| (0..nc).map(move |j| (i, j)))
        .map(|(i, j)| {
            (
                coord(a_range.0, a_range.1, na, i),
                coord(c_range.0, c_range.1, nc, j),
            )
        })
        .collect();

    // Cells are independent; evaluate them in parallel but emit rows in the
    // deterministic (a, C) order.
    let cells: Vec<ScanCell> = points
        .par_iter()
        .map(|&(a, c)| scan_cell(a, lambda0, c, numeric))
        .collect();

    let mut csv = String::with_capacity(cells.len() * 160 + 200);
    csv.push_str(
        "a,C,region,case,root_count,band_count,band1_lo,band1_hi,band2_lo,band2_hi,\
         delta_theta_1,delta_theta_2,symmetry_1,symmetry_2,error\n",
    );
    let opt_f = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    for cell in &cells {
        let b1 = cell.bands.first();
        let b2 = cell.bands.get(1);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_float(cell.a),
            fmt_float(cell.c),
            cell.region,
            cell.case,
            cell.root_count,
            cell.bands.len(),
            opt_f(b1.map(|b| b[0])),
            opt_f(b1.map(|b| b[1])),
            opt_f(b2.map(|b| b[0])),
            opt_f(b2.map(|b| b[1])),
            opt_f(cell.angles.first().copied().flatten()),
            opt_f(cell.angles.get(1).copied().flatten()),
            cell.symmetries.first().cloned().unwrap_or_default(),
            cell.symmetries.get(1).cloned().unwrap_or_default(),
            cell.error,
        );
    }
    emit(out, &csv)?;
    Ok(())
}

// --------------------------------------------------------------- stability

#[derive(Serialize)]
struct StabilityOut {
    schema: &'static str,
    command: &'static str,
    params: ParamsOut,
    problem: &'static str,
    h: f64,
    source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    symmetry: Option<SymmetryOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    embedded: Option<bool>,
    report: drop_moduli::StabilityReport,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_stability(
    args: &ParamArgs,
    h: f64,
    problem: ProblemArg,
    radius: Option<f64>,
    band_spec: &str,
    numeric: &NumericArgs,
    out: Option<&Path>,
    format: FormatArg,
) -> CmdResult {
    require_format(format, FormatArg::Json, "stability")?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(CliError::Usage(
            "--h must be positive and finite".to_string(),
        ));
    }
    let params = params_from(args)?;
    let problem_kind = match problem {
        ProblemArg::Free => ProblemKind::Free,
        ProblemArg::Fixed => ProblemKind::Fixed,
    };
    let problem_str = match problem_kind {
        ProblemKind::Free => "free",
        ProblemKind::Fixed => "fixed",
    };

    let payload = if let Some(r) = radius {
        let report = round_cylinder_report(params.a(), params.lambda0(), r, h, problem_kind)?;
        StabilityOut {
            schema: SCHEMA,
            command: "stability",
            params: (&params).into(),
            problem: problem_str,
            h,
            source: "round-cylinder",
            radius: Some(r),
            symmetry: None,
            embedded: None,
            report,
        }
    } else {
        let label = classify(&params)?;
        if label.bands.is_empty() {
            let r_sq = label
                .roots
                .roots
                .iter()
                .find(|r| r.multiplicity >= 2)
                .map(|r| r.r)
                .ok_or_else(|| {
                    CliError::Numerical("empty level set: nothing to analyze".to_string())
                })?;
            let r = r_sq.sqrt();
            let report = round_cylinder_report(params.a(), params.lambda0(), r, h, problem_kind)?;
            StabilityOut {
                schema: SCHEMA,
                command: "stability",
                params: (&params).into(),
                problem: problem_str,
                h,
                source: "round-cylinder",
                radius: Some(r),
                symmetry: None,
                embedded: None,
                report,
            }
        } else {
            let idx = parse_band(band_spec).map_err(CliError::Usage)?;
            let band = *label
                .bands
                .get(idx)
                .ok_or_else(|| CliError::Usage(format!("band index {idx} out of range")))?;
            if band.has_multiple_endpoint() {
                return Err(CliError::Numerical(
                    "exceptional drop: the profile curve never closes, so the closed-curve \
                     stability analysis does not apply"
                        .to_string(),
                ));
            }
            let opts = TraceOptions::default();
            let piece = fundamental_piece(&params, &band, &opts)?;
            let sym = symmetry_type(
                piece.delta_theta_measured,
                numeric.tol,
                numeric.max_denominator,
            );
            if !matches!(sym.kind, SymmetryKind::Rational { .. }) {
                return Err(CliError::Numerical(
                    "piece angle is not a detected rational multiple of 2 pi: the profile \
                     curve does not close; increase --max-denominator or adjust C"
                        .to_string(),
                ));
            }
            let curve = assemble_curve(&piece, &sym, 1e-3)?;
            let embedded = drop_moduli::is_embedded(&curve, 4096).ok();
            let report = stability_report(&curve, &params, h, problem_kind, embedded)?;
            StabilityOut {
                schema: SCHEMA,
                command: "stability",
                params: (&params).into(),
                problem: problem_str,
                h,
                source: "traced-curve",
                radius: None,
                symmetry: Some((&sym).into()),
                embedded,
                report,
            }
        }
    };
    emit(out, &(to_json_string(&payload)? + "\n"))?;
    Ok(())
}
