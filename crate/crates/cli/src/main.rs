mod args;
mod commands;
mod output;
mod render;

use clap::Parser;

use args::{parse_grid, parse_range, Cli, Command};
use commands::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Classify {
            params,
            out,
            format,
        } => commands::cmd_classify(&params, out.as_deref(), format),
        Command::Critical {
            a,
            lambda0,
            out,
            format,
        } => commands::cmd_critical(a, lambda0, out.as_deref(), format),
        Command::Trace {
            params,
            band,
            pieces,
            max_arclength,
            numeric,
            out,
            format,
        } => commands::cmd_trace(
            &params,
            &band,
            pieces,
            max_arclength,
            &numeric,
            out.as_deref(),
            format,
        ),
        Command::DeltaTheta {
            params,
            out,
            format,
        } => commands::cmd_delta_theta(&params, out.as_deref(), format),
        Command::Scan {
            a_range,
            c_range,
            grid,
            lambda0,
            numeric,
            out,
            format,
        } => {
            let a_range = parse_range(&a_range).map_err(CliError::Usage)?;
            let c_range = parse_range(&c_range).map_err(CliError::Usage)?;
            let grid = parse_grid(&grid).map_err(CliError::Usage)?;
            commands::cmd_scan(
                a_range,
                c_range,
                grid,
                lambda0,
                &numeric,
                out.as_deref(),
                format,
            )
        }
        Command::Stability {
            params,
            h,
            problem,
            radius,
            band,
            numeric,
            out,
            format,
        } => commands::cmd_stability(
            &params,
            h,
            problem,
            radius,
            &band,
            &numeric,
            out.as_deref(),
            format,
        ),
        Command::Render {
            input,
            out,
            overlay_extrema,
            limit_r,
            format,
        } => {
            commands::require_format_public(format, args::FormatArg::Svg, "render")?;
            render::cmd_render(
                &input,
                out.as_deref(),
                &render::RenderOptions {
                    overlay_extrema,
                    limit_r,
                },
            )
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!(
                "{{\"error\":{{\"kind\":\"usage\",\"message\":{}}}}}",
                serde_json::to_string(&msg).unwrap_or_else(|_| "\"?\"".to_string())
            );
            std::process::exit(2);
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!(
                "{{\"error\":{{\"kind\":\"numerical\",\"message\":{}}}}}",
                serde_json::to_string(&msg).unwrap_or_else(|_| "\"?\"".to_string())
            );
            std::process::exit(1);
        }
    }
}
