use std::process::ExitCode;

use clap::Parser;

use arakelov_eis::cli::{run, RunConfig};

/// Degrees of special divisors and Eisenstein Fourier coefficients on a
/// Hilbert modular surface attached to a CM quartic field.
#[derive(Parser, Debug)]
#[command(name = "arakelov-eis", version)]
struct Args {
    /// key = value configuration file
    #[arg(long)]
    config: Option<String>,
    /// inspect, degree, coefficient or verify
    #[arg(long)]
    command: Option<String>,
    /// output path (stdout if omitted)
    #[arg(long)]
    out: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// bound B of the element box (u + v√D)/w with |u|, |v| ≤ B
    #[arg(long = "alpha-box")]
    alpha_box: Option<String>,
    /// imaginary part of τ as Y1,Y2
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match RunConfig::parse(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {path}: {e}");
                    return ExitCode::from(1);
                }
            },
            Err(e) => {
                eprintln!("error: {path}: {e}");
                return ExitCode::from(1);
            }
        },
        None => RunConfig::default(),
    };
    let overrides = [
        ("--command", "command", &args.command),
        ("--out", "out", &args.out),
        ("--format", "format", &args.format),
        ("--alpha-box", "alpha_box", &args.alpha_box),
        ("--y", "y", &args.y),
    ];
    for (flag, key, value) in overrides {
        if let Some(v) = value {
            if let Err(e) = cfg.set_flag(flag, key, v) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
    }
    // an explicit box on the command line replaces any configured list
    if args.alpha_box.is_some() {
        cfg.alpha.clear();
    }
    ExitCode::from(run(&cfg) as u8)
}
