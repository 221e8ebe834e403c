//! SVG rendering of traced curves: a single polyline path in a padded square
//! viewBox, with optional radius-extrema and limit-circle overlays.

use std::path::Path;

use crate::commands::CliError;
use crate::output::emit;

pub struct RenderOptions {
    pub overlay_extrema: bool,
    pub limit_r: Option<f64>,
}

fn coord(x: f64) -> String {
    format!("{x:.6}")
}

/// Parse the `trace` CSV: header row naming at least `x` and `y` columns.
fn parse_curve_csv(content: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut lines = content.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Usage("empty input CSV".to_string()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let xi = cols
        .iter()
        .position(|c| *c == "x")
        .ok_or_else(|| CliError::Usage("input CSV has no 'x' column".to_string()))?;
    let yi = cols
        .iter()
        .position(|c| *c == "y")
        .ok_or_else(|| CliError::Usage("input CSV has no 'y' column".to_string()))?;
    let mut pts = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| -> Result<f64, CliError> {
            fields
                .get(i)
                .and_then(|f| f.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::Usage(format!("malformed CSV at data row {}", lineno + 1)))
        };
        pts.push((parse(xi)?, parse(yi)?));
    }
    if pts.len() < 2 {
        return Err(CliError::Usage(
            "input CSV holds fewer than two points".to_string(),
        ));
    }
    Ok(pts)
}

pub fn cmd_render(input: &Path, out: Option<&Path>, opts: &RenderOptions) -> Result<(), CliError> {
    let content = std::fs::read_to_string(input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?;
    let pts = parse_curve_csv(&content)?;

    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    let mut r_min = f64::MAX;
    let mut r_max: f64 = 0.0;
    for &(x, y) in &pts {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
        let r = x.hypot(y);
        r_min = r_min.min(r);
        r_max = r_max.max(r);
    }
    if let Some(lr) = opts.limit_r {
        r_max = r_max.max(lr);
    }
    let extent = (xmax - xmin).max(ymax - ymin).max(1e-12);
    let side = extent * 1.10; // 5% padding on each side
    let cx = 0.5 * (xmin + xmax);
    let cy = 0.5 * (ymin + ymax);
    let stroke = 0.005 * extent;

    // SVG's y axis points down: mirror y.
    let mut path = String::with_capacity(pts.len() * 24);
    for (i, &(x, y)) in pts.iter().enumerate() {
        path.push_str(if i == 0 { "M " } else { "L " });
        path.push_str(&coord(x));
        path.push(' ');
        path.push_str(&coord(-y));
        path.push(' ');
    }
    // Closed traces store uniform samples without repeating the start, so
    // the endpoint gap of a closed curve is about one segment length.
    let mut seg_lengths: Vec<f64> = pts
        .windows(2)
        .map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt())
        .collect();
    seg_lengths.sort_by(f64::total_cmp);
    let median_seg = seg_lengths[seg_lengths.len() / 2];
    let closing_gap = {
        let (x0, y0) = pts[0];
        let (x1, y1) = *pts.last().unwrap();
        ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt()
    };
    if closing_gap <= 3.0 * median_seg {
        path.push('Z');
    }

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n",
        coord(cx - 0.5 * side),
        coord(-cy - 0.5 * side),
        coord(side),
        coord(side)
    ));
    if opts.overlay_extrema {
        for r in [r_min, r_max] {
            svg.push_str(&format!(
                "  <circle cx=\"0\" cy=\"0\" r=\"{}\" fill=\"none\" stroke=\"#999999\" \
                 stroke-width=\"{}\"/>\n",
                coord(r),
                coord(0.5 * stroke)
            ));
        }
    }
    if let Some(lr) = opts.limit_r {
        svg.push_str(&format!(
            "  <circle cx=\"0\" cy=\"0\" r=\"{}\" fill=\"none\" stroke=\"#cc3333\" \
             stroke-width=\"{}\" stroke-dasharray=\"{} {}\"/>\n",
            coord(lr),
            coord(0.5 * stroke),
            coord(2.0 * stroke),
            coord(2.0 * stroke)
        ));
    }
    svg.push_str(&format!(
        "  <path d=\"{}\" fill=\"none\" stroke=\"#1f4e8c\" stroke-width=\"{}\" \
         stroke-linejoin=\"round\" stroke-linecap=\"round\"/>\n",
        path.trim_end(),
        coord(stroke)
    ));
    svg.push_str("</svg>\n");
    emit(out, &svg).map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok(())
}
