//! Wall-clock comparison of the four correlation kernels.
//!
//! Only the kernel call is timed; inputs are generated and quantized outside
//! the timed region. Real kernels run in single precision over a complex
//! radix-2 FFT.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::Method;
use crate::intxcorr::{xcorr_int_bf, xcorr_int_ks_with, MulBackend};
use crate::realxcorr::{xcorr_bf_f32, xcorr_fft_f32};
use crate::signal::IntSignal;

pub const BENCH_CSV_HEADER: &str = "method,N,K,trials,mean_seconds,stddev_seconds";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub min_log2: u32,
    pub max_log2: u32,
    /// Integer magnitude bounds to sweep.
    pub ks: Vec<u32>,
    pub seed: u64,
    pub backend: MulBackend,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            min_log2: 6,
            max_log2: 14,
            ks: vec![1, 16],
            seed: 0,
            backend: MulBackend::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_log2 > self.max_log2 {
            return Err(Error::Config(format!(
                "empty length range 2^{}..2^{}",
                self.min_log2, self.max_log2
            )));
        }
        if self.max_log2 > 24 {
            return Err(Error::Config("max_log2 above 24 is not supported".into()));
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::Config("K list must be non-empty and positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub n: usize,
    /// `None` for the real-valued methods.
    pub k: Option<u32>,
    pub trials: usize,
    pub mean_seconds: f64,
    pub stddev_seconds: f64,
}

/// `max(16, 2^16 / N)`.
pub fn trials_for(n: usize) -> usize {
    16.max((1usize << 16) / n.max(1))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs `trials + 1` rounds and drops the first.
fn time_trials<I, G, K>(trials: usize, mut generate: G, mut kernel: K) -> (f64, f64)
where
    G: FnMut() -> I,
    K: FnMut(&I),
{
    let mut samples = Vec::with_capacity(trials);
    for round in 0..=trials {
        let input = generate();
        let t0 = Instant::now();
        kernel(&input);
        let dt = t0.elapsed().as_secs_f64();
        if round > 0 {
            samples.push(dt);
        }
    }
    mean_std(&samples)
}

fn random_int(rng: &mut ChaCha8Rng, n: usize, k: u32) -> IntSignal {
    let k = k as i32;
    loop {
        let samples: Vec<i32> = (0..n).map(|_| rng.gen_range(-k..=k)).collect();
        if samples.iter().any(|&s| s != 0) {
            return IntSignal::with_bound(0, samples, k as u32).expect("within bound");
        }
    }
}

fn random_f32(rng: &mut ChaCha8Rng, n: usize) -> Vec<f32> {
    (0..n).map(|_| rng.gen_range(-1.0f32..1.0)).collect()
}

/// Times every method at every `N = 2^j`; per `N` the rows are
/// `integer_ks`/`integer_bf` for each K, then `real_fft`, `real_bf`.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::new();
    for log2 in config.min_log2..=config.max_log2 {
        let n = 1usize << log2;
        let trials = trials_for(n);
        for &k in &config.ks {
            for method in [Method::IntegerKs, Method::IntegerBf] {
                let backend = config.backend;
                let gen = || (random_int(&mut rng, n, k), random_int(&mut rng, n, k));
                let (mean, std) = match method {
                    Method::IntegerKs => time_trials(trials, gen, |(u, v)| {
                        black_box(xcorr_int_ks_with(u, v, backend).expect("non-degenerate"));
                    }),
                    _ => time_trials(trials, gen, |(u, v)| {
                        black_box(xcorr_int_bf(u, v));
                    }),
                };
                log::debug!("{method} N={n} K={k}: {mean:.3e}s");
                rows.push(BenchRow {
                    method,
                    n,
                    k: Some(k),
                    trials,
                    mean_seconds: mean,
                    stddev_seconds: std,
                });
            }
        }
        for method in [Method::RealFft, Method::RealBf] {
            let gen = || (random_f32(&mut rng, n), random_f32(&mut rng, n));
            let (mean, std) = match method {
                Method::RealFft => time_trials(trials, gen, |(x, y)| {
                    black_box(xcorr_fft_f32(x, y));
                }),
                _ => time_trials(trials, gen, |(x, y)| {
                    black_box(xcorr_bf_f32(x, y));
                }),
            };
            log::debug!("{method} N={n}: {mean:.3e}s");
            rows.push(BenchRow {
                method,
                n,
                k: None,
                trials,
                mean_seconds: mean,
                stddev_seconds: std,
            });
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let k = r.k.map(|k| k.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{:e},{:e}",
            r.method, r.n, k, r.trials, r.mean_seconds, r.stddev_seconds
        )
        .expect("write to String");
    }
    out
}

/// Log-log slope of mean time between lengths `n_lo` and `n_hi`.
pub fn loglog_slope(rows: &[BenchRow], method: Method, k: Option<u32>, n_lo: usize, n_hi: usize) -> Option<f64> {
    let find = |n: usize| {
        rows.iter()
            .find(|r| r.method == method && r.k == k && r.n == n)
            .map(|r| r.mean_seconds)
    };
    let (t_lo, t_hi) = (find(n_lo)?, find(n_hi)?);
    Some((t_hi / t_lo).ln() / (n_hi as f64 / n_lo as f64).ln())
}

/// Smallest length at which `faster` beats `slower`, scanning upward.
pub fn crossover(rows: &[BenchRow], faster: (Method, Option<u32>), slower: (Method, Option<u32>)) -> Option<usize> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter().find(|&n| {
        let t = |(m, k): (Method, Option<u32>)| {
            rows.iter()
                .find(|r| r.method == m && r.k == k && r.n == n)
                .map(|r| r.mean_seconds)
        };
        matches!((t(faster), t(slower)), (Some(a), Some(b)) if a < b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_counts() {
        assert_eq!(trials_for(64), 1024);
        assert_eq!(trials_for(4096), 16);
        assert_eq!(trials_for(1 << 14), 16);
    }

    #[test]
    fn rejects_bad_config() {
        let bad = BenchConfig { min_log2: 8, max_log2: 6, ..Default::default() };
        assert!(matches!(run_bench(&bad), Err(Error::Config(_))));
        let bad = BenchConfig { ks: vec![], ..Default::default() };
        assert!(run_bench(&bad).is_err());
        let bad = BenchConfig { ks: vec![0], ..Default::default() };
        assert!(run_bench(&bad).is_err());
    }

    #[test]
    fn small_run_shape() {
        let cfg = BenchConfig { min_log2: 4, max_log2: 5, ks: vec![1, 16], ..Default::default() };
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 6);
        assert!(rows.iter().all(|r| r.trials == trials_for(r.n)));
        assert!(rows.iter().all(|r| r.mean_seconds >= 0.0 && r.stddev_seconds >= 0.0));
        let csv = bench_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(BENCH_CSV_HEADER));
        assert!(lines.clone().any(|l| l.starts_with("real_fft,16,,4096,")));
        assert!(lines.any(|l| l.starts_with("integer_ks,32,16,2048,")));
    }

    #[test]
    fn slope_and_crossover_helpers() {
        let row = |method, n, k, t| BenchRow {
            method,
            n,
            k,
            trials: 16,
            mean_seconds: t,
            stddev_seconds: 0.0,
        };
        let rows = vec![
            row(Method::IntegerBf, 100, Some(1), 1.0),
            row(Method::IntegerBf, 200, Some(1), 4.0),
            row(Method::IntegerKs, 100, Some(1), 2.0),
            row(Method::IntegerKs, 200, Some(1), 3.0),
        ];
        let s = loglog_slope(&rows, Method::IntegerBf, Some(1), 100, 200).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
        assert_eq!(
            crossover(&rows, (Method::IntegerKs, Some(1)), (Method::IntegerBf, Some(1))),
            Some(200)
        );
        assert_eq!(loglog_slope(&rows, Method::RealFft, None, 100, 200), None);
    }
}
