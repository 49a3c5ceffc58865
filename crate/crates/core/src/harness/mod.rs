//! Batch experiments: kernel timing, accuracy against SNR, and the randomized
//! invariant suites behind `selftest`.

pub mod accuracy;
pub mod bench;
pub mod suites;

pub use accuracy::{run_accuracy, AccuracyConfig, AccuracyReport, AccuracyRow, Mode, WavCorpus};
pub use bench::{bench_csv, run_bench, BenchConfig, BenchRow};
pub use suites::{selftest, SuiteReport};

/// Thread cap from `QXCORR_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("QXCORR_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}
