mod manifest;
mod verify;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use macsi_core::regions::{full_coop_sum_capacity, informed_receiver_capacity, BoundKind};
use macsi_core::search::{trace_boundary, ChannelRef, RegionSample, SearchConfig, SearchError};
use macsi_core::sim::{run_block_markov, SimConfig, SimError};
use macsi_core::{build_example_double, build_example_single, load_channel, Channel};
use serde::Serialize;

use manifest::RunManifest;

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "macsi", version, about = "Rate regions of multiple-access channels with strictly-causal state")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trace the boundary of an inner bound and write the sampled points.
    Region(RegionArgs),
    /// Run the fixed checks on the two example channels.
    VerifyExamples(VerifyArgs),
    /// Simulate the block-Markov scheme on the single-state example.
    Simulate(SimulateArgs),
    /// Print full-cooperation and informed-receiver capacities.
    Coop(SourceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Example {
    Single,
    Double,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Channel spec JSON file.
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Built-in example channel.
    #[arg(long, value_enum)]
    example: Option<Example>,
}

#[derive(Debug, Clone, Args)]
struct RegionArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_parser = parse_bound)]
    bound: BoundKind,
    /// Alphabet caps for U, V, V1, V2.
    #[arg(long, value_parser = parse_caps, default_value = "4,4,3,3")]
    caps: [usize; 4],
    #[arg(long, default_value_t = 200)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    refine_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// R1 targets as start:stop:step.
    #[arg(long, value_parser = parse_grid, default_value = "0:1:0.1")]
    r1_grid: Grid,
    /// Output path ending in .csv or .json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args)]
struct VerifyArgs {
    /// Print a JSON verdict instead of PASS/FAIL lines.
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace the single-state example law with a broken one.
    #[arg(long, hide = true)]
    corrupt_law: bool,
}

#[derive(Debug, Clone, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    blocks: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// State parameter assumed by the description codec.
    #[arg(long)]
    p: Option<f64>,
    /// Unlimited description budget.
    #[arg(long)]
    genie: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
struct Grid(Vec<f64>);

fn parse_bound(s: &str) -> Result<BoundKind, String> {
    s.parse::<BoundKind>().map_err(|e| e.to_string())
}

fn parse_caps(s: &str) -> Result<[usize; 4], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let caps: [usize; 4] = v.try_into().map_err(|_| "expected four comma-separated sizes".to_string())?;
    if caps.contains(&0) {
        return Err("caps must be at least 1".into());
    }
    Ok(caps)
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let [a, b, step] = parts[..] else {
        return Err("expected start:stop:step".into());
    };
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || a < 0.0 || b < a || step <= 0.0 {
        return Err("need 0 <= start <= stop and step > 0".into());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    Ok(Grid((0..=count).map(|i| a + i as f64 * step).collect()))
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::KindMismatch { .. } | SearchError::InvalidConfig(_) => Failure::usage(e.to_string()),
            _ => Failure::data(e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) => Failure::usage(e.to_string()),
            _ => Failure::data(e.to_string()),
        }
    }
}

fn load_source(src: &SourceArgs) -> Result<Channel, Failure> {
    match (&src.channel, src.example) {
        (Some(path), _) => load_channel(path).map_err(|e| Failure::data(format!("{}: {e}", path.display()))),
        (None, Some(Example::Single)) => Ok(Channel::Single(build_example_single())),
        (None, Some(Example::Double)) => Ok(Channel::Double(build_example_double())),
        (None, None) => Err(Failure::usage("one of --channel or --example is required")),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

/// Formats a rate with six decimals, never as negative zero.
fn fmt6(v: f64) -> String {
    format!("{:.6}", v.max(0.0) + 0.0)
}

fn region_csv(manifest: &RunManifest, sample: &RegionSample) -> String {
    let mut out = format!("# manifest: {}\n", manifest.to_json_line());
    out.push_str("r1,r2,source_seed,bound\n");
    for p in &sample.points {
        let _ = writeln!(out, "{},{},{},{}", fmt6(p.r1), fmt6(p.r2), p.source_seed, sample.bound_kind);
    }
    out
}

#[derive(Serialize)]
struct WithManifest<'a, T: Serialize> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    body: &'a T,
}

fn with_manifest<T: Serialize>(manifest: &RunManifest, body: &T) -> String {
    let mut s = serde_json::to_string_pretty(&WithManifest { manifest, body }).expect("output serializes");
    s.push('\n');
    s
}

fn cmd_region(args: &RegionArgs, argv: &[String]) -> Result<(), Failure> {
    let started = Instant::now();
    let ext = args.out.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    if !matches!(ext.as_deref(), Some("csv" | "json")) {
        return Err(Failure::usage("--out must end in .csv or .json"));
    }
    let channel = load_source(&args.source)?;
    let ch = match &channel {
        Channel::Single(c) => ChannelRef::Single(c),
        Channel::Double(c) => ChannelRef::Double(c),
    };
    let cfg = SearchConfig {
        caps: args.caps,
        restarts: args.restarts,
        refine_iters: args.refine_iters,
        seed: args.seed,
        r1_grid: args.r1_grid.0.clone(),
    };
    let sample = trace_boundary(ch, args.bound, &cfg)?;
    let manifest = RunManifest::new("region", argv, &cfg, args.seed, started);
    let text = if ext.as_deref() == Some("csv") {
        region_csv(&manifest, &sample)
    } else {
        with_manifest(&manifest, &sample)
    };
    write_file(&args.out, &text)?;
    let hull: Vec<String> = sample
        .hull
        .iter()
        .map(|p| format!("({},{})", fmt6(p.r1), fmt6(p.r2)))
        .collect();
    println!("{} points; hull {}", sample.points.len(), hull.join(" "));
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs, argv: &[String]) -> Result<(), Failure> {
    let started = Instant::now();
    let mut cfg = SimConfig {
        n: args.n,
        blocks: args.blocks,
        delta: args.delta,
        seed: args.seed,
        trials: args.trials,
        genie: args.genie,
        ..SimConfig::default()
    };
    if let Some(p) = args.p {
        cfg.p = p;
    }
    let report = run_block_markov(&build_example_single(), &cfg)?;
    if let Some(out) = &args.out {
        let manifest = RunManifest::new("simulate", argv, &cfg, args.seed, started);
        write_file(out, &with_manifest(&manifest, &report))?;
    }
    println!(
        "R1={:.6} R2={:.6} err={:.4} ovf={:.4}",
        report.empirical_r1, report.empirical_r2, report.block_error_rate, report.overflow_rate
    );
    Ok(())
}

fn cmd_coop(args: &SourceArgs) -> Result<(), Failure> {
    let Channel::Single(ch) = load_source(args)? else {
        return Err(Failure::usage("coop needs a single-state channel"));
    };
    println!("sum={:.4}", full_coop_sum_capacity(&ch).bits);
    println!("user1={:.4}", informed_receiver_capacity(&ch, 1).bits);
    println!("user2={:.4}", informed_receiver_capacity(&ch, 2).bits);
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("MACSI_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("MACSI_THREADS must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(Failure::usage("MACSI_THREADS must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn run(cli: &Cli, argv: &[String]) -> Result<u8, Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Region(a) => cmd_region(a, argv).map(|_| 0),
        Command::Simulate(a) => cmd_simulate(a, argv).map(|_| 0),
        Command::Coop(a) => cmd_coop(a).map(|_| 0),
        Command::VerifyExamples(a) => {
            let report = verify::run(a.seed, a.corrupt_law);
            if a.json {
                println!("{}", serde_json::to_string_pretty(&report).expect("verdict serializes"));
            } else {
                for item in &report.items {
                    println!(
                        "{} ({}) {}: {}",
                        if item.pass { "PASS" } else { "FAIL" },
                        item.id,
                        item.name,
                        item.detail
                    );
                }
                println!("{}/{} PASS", report.passed, report.items.len());
            }
            Ok(if report.all_pass { 0 } else { EXIT_VERIFY })
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli, &argv[1..]) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
