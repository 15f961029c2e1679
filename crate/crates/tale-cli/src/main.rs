use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use tale_cli::{commands, verify};

/// Exit codes: 0 success, 1 domain error, 2 numerical certificate failure,
/// 64 malformed arguments or specification strings.
const EXIT_DOMAIN: i32 = 1;
const EXIT_CERTIFICATE: i32 = 2;
const EXIT_USAGE: i32 = 64;

#[derive(Parser)]
#[command(
    name = "tale",
    about = "Numerical differential geometry: spin lifts, curvature, conformal inversion, twistor transport, and volume ratios",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the lifts of a finite rotation group through Spin(n) -> SO(n).
    SpinLifts {
        /// Group spec: cyclic:m[:k1,k2], binary-dihedral:k, binary-tetrahedral,
        /// binary-octahedral, binary-icosahedral, or a JSON file of matrices.
        #[arg(long)]
        group: String,
        /// Ambient dimension (2 or 4).
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fixed half-spinor subspace dimensions for every lift of a group in SO(4).
    WeylFix {
        #[arg(long)]
        group: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Curvature summary of a metric chart at a point.
    Curvature {
        /// Metric spec: flat:n, sphere:n:R, eguchi-hanson:a,
        /// quotient:<base>:<group>, rescale:<base>:<factor>.
        #[arg(long)]
        metric: String,
        /// Comma-separated coordinates.
        #[arg(long)]
        point: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the decay order of an exterior chart and probe its one-point
    /// conformal compactification.
    Invert {
        #[arg(long)]
        metric: String,
        /// Radii range r0:r1:count:log (or :lin).
        #[arg(long)]
        radii: String,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full compactification report (requires the decay hypothesis).
    Compactify {
        #[arg(long)]
        metric: String,
        #[arg(long)]
        radii: String,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parallel-transport a doubled-bundle state along a polyline path.
    Twistor {
        #[arg(long)]
        metric: String,
        /// Two spinor files: phi0.json,psi0.json.
        #[arg(long)]
        init: String,
        /// JSON file with {"points": [[...], ...]}.
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate the zeros of the closed-form flat twistor family.
    TwistorZeros {
        #[arg(long)]
        metric: String,
        #[arg(long)]
        init: String,
        /// Search box min:max (per coordinate).
        #[arg(long = "box", allow_hyphen_values = true)]
        search_box: String,
        /// Seeds per axis for the descent grid.
        #[arg(long, default_value_t = 16)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parallel spinor basis of the Eguchi-Hanson chart from numerical holonomy.
    EhParallel {
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        basepoint_radius: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate psi(r) = vol B(p, r) / (omega_n r^n) as CSV.
    VolumeRatio {
        #[arg(long)]
        metric: String,
        #[arg(long)]
        point: String,
        #[arg(long)]
        radii: String,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full verification suite and print a pass/fail table.
    VerifyAll {
        /// RNG seed (accepts 0x-prefixed hex).
        #[arg(long, default_value = "0x5EED", value_parser = parse_seed)]
        seed: u64,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        /// Reduced workloads for smoke runs.
        #[arg(long)]
        quick: bool,
        /// Directory for per-criterion JSON reports.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let parsed = if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        t.parse()
    };
    parsed.map_err(|e| format!("bad seed '{s}': {e}"))
}

fn thread_pool_from_env() {
    if let Ok(v) = std::env::var("TALE_THREADS") {
        if let Ok(k) = v.parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

fn classify_exit(err: &anyhow::Error) -> i32 {
    if let Some(tale_err) = err.downcast_ref::<tale::TaleError>() {
        return match tale_err {
            tale::TaleError::DomainError(_) | tale::TaleError::DegenerateConformalFactor(_) => {
                EXIT_DOMAIN
            }
            tale::TaleError::CertificateFailed(_) => EXIT_CERTIFICATE,
            tale::TaleError::InvalidGroup(_)
            | tale::TaleError::UnsupportedDimension(_, _)
            | tale::TaleError::InsufficientData(_) => EXIT_USAGE,
            tale::TaleError::Numerical(_) => EXIT_CERTIFICATE,
        };
    }
    // Parsing and I/O problems are usage errors.
    EXIT_USAGE
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::SpinLifts { group, dim, out } => {
            commands::spin_lifts(&group, dim, &out)?;
            Ok(0)
        }
        Command::WeylFix { group, out } => {
            commands::weyl_fix(&group, &out)?;
            Ok(0)
        }
        Command::Curvature { metric, point, out } => {
            commands::curvature(&metric, &point, &out)?;
            Ok(0)
        }
        Command::Invert {
            metric,
            radii,
            kmax,
            out,
        } => {
            commands::invert(&metric, &radii, kmax, &out)?;
            Ok(0)
        }
        Command::Compactify {
            metric,
            radii,
            kmax,
            out,
        } => {
            commands::compactify(&metric, &radii, kmax, &out)?;
            Ok(0)
        }
        Command::Twistor {
            metric,
            init,
            path,
            out,
        } => {
            commands::twistor(&metric, &init, &path, &out)?;
            Ok(0)
        }
        Command::TwistorZeros {
            metric,
            init,
            search_box,
            grid,
            out,
        } => {
            commands::twistor_zeros(&metric, &init, &search_box, grid, &out)?;
            Ok(0)
        }
        Command::EhParallel {
            a,
            basepoint_radius,
            out,
        } => {
            commands::eh_parallel(a, basepoint_radius, &out)?;
            Ok(0)
        }
        Command::VolumeRatio {
            metric,
            point,
            radii,
            samples,
            out,
        } => {
            commands::volume_ratio(&metric, &point, &radii, samples, &out)?;
            Ok(0)
        }
        Command::VerifyAll {
            seed,
            samples,
            quick,
            out,
        } => {
            let cfg = verify::VerifyConfig {
                seed,
                samples,
                quick,
                out_dir: out,
            };
            let outcomes = verify::run_all(&cfg)?;
            println!("{:<4} {:<28} {:<6} {:>9}", "id", "criterion", "state", "seconds");
            let mut all_passed = true;
            for o in &outcomes {
                println!(
                    "{:<4} {:<28} {:<6} {:>9.2}",
                    o.id,
                    o.name,
                    if o.passed { "PASS" } else { "FAIL" },
                    o.seconds
                );
                all_passed &= o.passed;
            }
            Ok(if all_passed { 0 } else { EXIT_CERTIFICATE })
        }
    }
}

fn main() {
    thread_pool_from_env();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(classify_exit(&err));
        }
    }
}
