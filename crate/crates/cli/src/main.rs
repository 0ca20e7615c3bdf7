//! Command-line front end: synthesize summation circuits for line-pattern
//! families, verify them against direct summation, evaluate images, bench
//! sizes and export DOT graphs.
//!
//! Exit codes: 0 ok, 1 usage or input error, 2 verification mismatch,
//! 3 internal invariant violation.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::exit;

use clap::{ArgAction, Args, Parser, Subcommand};

use commands::{Builder, ExportFormat, Kind, SynthSpec, TableFormat};

#[derive(Parser)]
#[command(
    name = "hcf",
    version,
    about = "Low-addition summation circuits for line-pattern transforms",
    disable_help_flag = true
)]
struct Cli {
    /// Print help
    #[arg(long, action = ArgAction::Help, global = true)]
    help: Option<bool>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a circuit and write it with its metrics
    Synth(SynthArgs),
    /// Check a circuit against direct summation on seeded images
    Verify(VerifyArgs),
    /// Run a circuit (or direct summation) over an image
    Eval(EvalArgs),
    /// Tabulate sizes and bounds across a set of n
    Bench(BenchArgs),
    /// Render a circuit or tree artifact as DOT
    Export(ExportArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Pattern family to synthesize
    #[arg(long, value_enum)]
    kind: Kind,
    /// Image width (hough)
    #[arg(short = 'w', long)]
    width: Option<u32>,
    /// Image height (hough)
    #[arg(short = 'h', long)]
    height: Option<u32>,
    /// Number of elevations (hough)
    #[arg(short = 'E', long)]
    elevations: Option<u32>,
    /// Side length (fht/segment, or hough square shorthand)
    #[arg(short = 'n', long)]
    n: Option<u32>,
    /// Tree construction order
    #[arg(long, value_enum, default_value_t = Builder::Fixed)]
    builder: Builder,
    /// Circuit output path (metrics land next to it)
    #[arg(long)]
    out: PathBuf,
    /// Also write the partition tree as JSON
    #[arg(long)]
    tree_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Circuit JSON produced by synth
    circuit: PathBuf,
    /// Number of seeded random test images
    #[arg(long, default_value_t = 100)]
    trials: u32,
    /// Base seed for the random images
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the verification report here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Circuit JSON produced by synth
    circuit: PathBuf,
    /// Input image (.pgm or .csv; row 0 is y=0)
    #[arg(long)]
    image: PathBuf,
    /// Sum directly instead of running the circuit
    #[arg(long)]
    naive: bool,
    /// CSV output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Kind::Hough)]
    kind: Kind,
    /// Comma-separated side lengths
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32")]
    sizes: Vec<u32>,
    #[arg(long, value_enum, default_value_t = Builder::Fixed)]
    builder: Builder,
    #[arg(long, value_enum, default_value_t = TableFormat::Md)]
    format: TableFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Circuit or tree JSON
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = ExportFormat::Dot)]
    format: ExportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn init_thread_pool() {
    if let Ok(threads) = std::env::var("HCF_THREADS") {
        if let Ok(threads) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build_global();
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.cmd {
        Cmd::Synth(a) => {
            let spec = SynthSpec::resolve(a.kind, a.width, a.height, a.elevations, a.n, a.builder)?;
            commands::cmd_synth(&spec, &a.out, a.tree_out.as_deref())
        }
        Cmd::Verify(a) => commands::cmd_verify(&a.circuit, a.trials, a.seed, a.out.as_deref()),
        Cmd::Eval(a) => commands::cmd_eval(&a.circuit, &a.image, a.naive, a.out.as_deref()),
        Cmd::Bench(a) => {
            commands::cmd_bench(a.kind, &a.sizes, a.builder, a.format, a.out.as_deref())
        }
        Cmd::Export(a) => commands::cmd_export(&a.input, a.format, a.out.as_deref()),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{}", e);
                    exit(0);
                }
                _ => {
                    eprint!("{}", e);
                    exit(1);
                }
            }
        }
    };
    init_thread_pool();
    match run(cli) {
        Ok(code) => exit(code),
        Err(e) => {
            eprintln!("error: {:#}", e);
            exit(commands::classify_exit(&e));
        }
    }
}
