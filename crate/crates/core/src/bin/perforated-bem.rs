use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use perforated_bem::cli::{self, Overrides, RunConfig};

#[derive(Parser)]
#[command(version, about = "Perforated-domain BEM solver and eps-sweep harness")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Directory for report files (overrides outputs.directory).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Quadrature order (overrides quad_order).
    #[arg(long, global = true)]
    quad_order: Option<usize>,
    /// Seed of the randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    /// Solve sweep points concurrently, each warm-started from the limit root.
    #[arg(long, global = true)]
    parallel: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Limit solve, eps sweep, fits and oracle comparison.
    Run { config: PathBuf },
    /// Invariant suites at the configured order.
    Verify { config: PathBuf },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let overrides = Overrides {
        quad_order: args.quad_order,
        output_dir: args.output_dir.clone(),
        seed: args.seed,
        parallel: args.parallel,
    };
    let path = match &args.command {
        Command::Run { config } | Command::Verify { config } => config,
    };
    let mut cfg = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    overrides.apply(&mut cfg);
    let outcome = match args.command {
        Command::Run { .. } => cli::run(&cfg, overrides.parallel).and_then(|report| {
            let files = report.write(&cfg.outputs.directory, &cfg.outputs.formats)?;
            if !args.quiet {
                println!("xi_tilde {:.12}  compatibility {:.3e}", report.limit.xi_tilde, report.limit.compatibility_residual);
                for r in &report.rows {
                    println!("eps {:.5e}  xi_scaled {:.6e}  energy {:.6e}  iters {}", r.eps, r.xi_scaled, r.energy, r.iters);
                }
                if let Some(f) = report.fits.energy {
                    println!("energy slope {:.4} (r2 {:.6})", f.slope, f.r2);
                }
                if let Some(f) = report.fits.value {
                    println!("value slope {:.4} (r2 {:.6})", f.slope, f.r2);
                }
                for f in files {
                    println!("wrote {}", f.display());
                }
            }
            Ok(0)
        }),
        Command::Verify { .. } => cli::verify(&cfg, overrides.seed).and_then(|report| {
            std::fs::create_dir_all(&cfg.outputs.directory)?;
            let path = cfg.outputs.directory.join("verify.json");
            std::fs::write(&path, serde_json::to_string_pretty(&report).expect("report serializes") + "\n")?;
            if !args.quiet || !report.passed() {
                print!("{}", report.summary());
            }
            Ok(if report.passed() { 0 } else { 4 })
        }),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if let perforated_bem::Error::SolveFailed { log, .. } = &e {
                eprintln!("newton residuals: {log:?}");
            }
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
