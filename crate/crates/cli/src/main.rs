//! `qxcorr` command line: lag estimation, kernel timing, accuracy sweeps and
//! a quick self-check. Machine-readable output goes to stdout, everything
//! else to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qxcorr::harness::accuracy::accuracy_csv;
use qxcorr::harness::bench::{crossover, BENCH_CSV_HEADER};
use qxcorr::harness::{
    bench_csv, run_accuracy, run_bench, selftest, threads_from_env, AccuracyConfig, BenchConfig,
    WavCorpus,
};
use qxcorr::signalgen::{load_signal, load_wav};
use qxcorr::{estimate_with, EstimateOptions, Error, IntMethod, Method, MulBackend, Quantizer, Signal};
use serde_json::json;

#[derive(Parser)]
#[command(name = "qxcorr", version, about = "Time-delay estimation on quantized signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the lag of QUERY relative to REF and print a JSON record.
    Estimate(EstimateArgs),
    /// Time the correlation kernels over N = 2^min..2^max and write a CSV.
    Bench(BenchArgs),
    /// Accuracy against SNR on synthetic (or WAV) scenes; writes a CSV.
    Simulate(SimulateArgs),
    /// Run the fast randomized invariant suites.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct EstimateArgs {
    /// Reference signal (`x`): .wav (PCM16 mono) or raw f32 little-endian.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Query signal (`y`).
    #[arg(long)]
    query: PathBuf,
    /// `sign` or `uniform:K:STEP`.
    #[arg(long, default_value = "sign")]
    quantizer: Quantizer,
    #[arg(long, default_value = "ks")]
    method: IntMethod,
    #[arg(long, default_value = "toom")]
    backend: MulBackend,
    /// Return the argmax set of the quantized correlation without tie-breaking.
    #[arg(long)]
    until_line_4: bool,
    /// Report lags in seconds too. Defaults to the WAV header rate.
    #[arg(long)]
    sample_rate: Option<u32>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 6)]
    min_log2: u32,
    #[arg(long, default_value_t = 14)]
    max_log2: u32,
    /// Comma-separated integer bounds.
    #[arg(long = "k", value_delimiter = ',', default_value = "1,16")]
    ks: Vec<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "toom")]
    backend: MulBackend,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "-10,-5,0,5,10")]
    snr_list: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "sign")]
    quantizer: Quantizer,
    #[arg(long, default_value = "ks")]
    method: IntMethod,
    /// Directory with `target/*.wav` and `background/*.wav`.
    #[arg(long)]
    wav_dir: Option<PathBuf>,
    /// 2048-sample targets in 8192-sample scenes instead of 1 s in 5 s.
    #[arg(long)]
    small: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

/// Failure with the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DegenerateQuantization(_) => 3,
            Error::InternalOverflow { .. } => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn check_out(path: &Path, force: bool) -> Result<(), Failure> {
    if path.exists() && !force {
        return Err(usage(format!("{} exists; pass --force to overwrite", path.display())));
    }
    Ok(())
}

fn write_out(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| usage(format!("writing {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<(Signal, Option<u32>), Failure> {
    let is_wav = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    let loaded = if is_wav {
        load_wav(path).map(|w| (w.signal, Some(w.sample_rate)))
    } else {
        load_signal(path).map(|s| (s, None))
    };
    loaded.map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn run_estimate(args: EstimateArgs) -> Result<(), Failure> {
    let (x, rate_x) = load(&args.reference)?;
    let (y, rate_y) = load(&args.query)?;
    let rate = args.sample_rate.or(rate_x).or(rate_y);
    let opts = EstimateOptions {
        method: args.method,
        backend: args.backend,
        until_line_4: args.until_line_4,
    };
    let t0 = Instant::now();
    let result = estimate_with(&x, &y, &args.quantizer, &args.quantizer, opts)?;
    let elapsed = t0.elapsed().as_secs_f64();

    let mut record = json!({
        "lags": result.lags,
        "peak_value_int": result.peak_value_int,
        "tie_broken": result.tie_broken,
        "method": result.method.to_string(),
        "quantizer": args.quantizer.to_string(),
        "elapsed_seconds": elapsed,
    });
    if let Some(rate) = rate {
        let secs: Vec<f64> = result.lags.iter().map(|&l| l as f64 / rate as f64).collect();
        record["sample_rate"] = json!(rate);
        record["lags_seconds"] = json!(secs);
    }
    println!("{record}");
    Ok(())
}

fn run_bench_cmd(args: BenchArgs) -> Result<(), Failure> {
    check_out(&args.out, args.force)?;
    let config = BenchConfig {
        min_log2: args.min_log2,
        max_log2: args.max_log2,
        ks: args.ks,
        seed: args.seed,
        backend: args.backend,
    };
    let rows = run_bench(&config)?;
    write_out(&args.out, &bench_csv(&rows))?;

    // The CSV header is fixed, so precision and transform go in a sidecar.
    let meta = json!({
        "columns": BENCH_CSV_HEADER,
        "real_precision": "f32",
        "real_fft": "complex radix-2, zero-padded to a power of two",
        "integer_multiply": config.backend.to_string(),
        "seed": config.seed,
        "timed_region": "kernel call only; first round discarded",
    });
    let meta_path = args.out.with_extension("meta.json");
    write_out(&meta_path, &format!("{meta:#}\n"))?;

    eprintln!("wrote {} rows to {}", rows.len(), args.out.display());
    for &k in &config.ks {
        let vs_bf = crossover(&rows, (Method::IntegerKs, Some(k)), (Method::IntegerBf, Some(k)));
        let vs_fft = crossover(&rows, (Method::IntegerKs, Some(k)), (Method::RealFft, None));
        eprintln!("K={k}: integer_ks beats integer_bf from N={vs_bf:?}, real_fft from N={vs_fft:?}");
    }
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<(), Failure> {
    check_out(&args.out, args.force)?;
    let base = if args.small { AccuracyConfig::small() } else { AccuracyConfig::full() };
    let corpus = args.wav_dir.as_deref().map(WavCorpus::load).transpose()?;
    let config = AccuracyConfig {
        snr_list: args.snr_list,
        trials: args.trials,
        seed: args.seed,
        quantizer: args.quantizer,
        method: args.method,
        threads: threads_from_env(),
        corpus,
        ..base
    };
    let report = run_accuracy(&config)?;
    write_out(&args.out, &accuracy_csv(&report.rows))?;
    for r in &report.rows {
        eprintln!("{:>6} dB  {:<22} {:.3}", r.snr_db, r.mode.to_string(), r.accuracy);
    }
    if report.errors > 0 {
        eprintln!("{} trial(s) failed and were scored incorrect", report.errors);
    }
    Ok(())
}

fn run_selftest(seed: u64) -> Result<bool, Failure> {
    let reports = selftest(seed);
    eprintln!("{:<14} {:>6} {:>6}  status", "suite", "passed", "cases");
    for r in &reports {
        let status = if r.ok() { "PASS" } else { "FAIL" };
        eprintln!("{:<14} {:>6} {:>6}  {status}", r.name, r.passed, r.cases);
    }
    Ok(reports.iter().all(|r| r.ok()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Estimate(a) => run_estimate(a).map(|_| true),
        Command::Bench(a) => run_bench_cmd(a).map(|_| true),
        Command::Simulate(a) => run_simulate(a).map(|_| true),
        Command::Selftest { seed } => run_selftest(seed),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
