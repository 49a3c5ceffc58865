//! Estimation accuracy against SNR.
//!
//! Each trial places a target at a random fractional delay inside a scene,
//! mixes in background at every configured SNR, and scores three estimators.
//! A trial counts as correct only if every returned lag lies within one sample
//! of the true lag.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{estimate_real, estimate_with, EstimateOptions, IntMethod, RealMethod};
use crate::quantize::Quantizer;
use crate::signal::Signal;
use crate::signalgen::{gen_target, load_wav, make_trial, TargetKind, TrialSpec};

pub const ACCURACY_CSV_HEADER: &str = "snr_db,quantizer,mode,trials,correct,accuracy";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Quantized correlation with the unquantized tie-break.
    Proposed,
    /// Quantized correlation, raw argmax set.
    ProposedUntilLine4,
    /// Unquantized correlation.
    CcfWoQuant,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Proposed, Mode::ProposedUntilLine4, Mode::CcfWoQuant];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Proposed => "proposed",
            Mode::ProposedUntilLine4 => "proposed_until_line4",
            Mode::CcfWoQuant => "ccf_wo_quant",
        })
    }
}

/// Targets and backgrounds loaded from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct WavCorpus {
    pub targets: Vec<Signal>,
    pub backgrounds: Vec<Signal>,
    pub sample_rate: u32,
}

impl WavCorpus {
    /// Reads every `*.wav` in `dir/target` and `dir/background`, sorted by
    /// file name.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut sample_rate = None;
        let mut read = |sub: &str| -> Result<Vec<Signal>> {
            let mut paths: Vec<_> = fs::read_dir(dir.join(sub))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(Error::Config(format!("no .wav files in {}", dir.join(sub).display())));
            }
            paths
                .iter()
                .map(|p| {
                    let audio = load_wav(p)?;
                    match sample_rate {
                        None => sample_rate = Some(audio.sample_rate),
                        Some(r) if r != audio.sample_rate => {
                            return Err(Error::UnsupportedFormat(format!(
                                "{} is {} Hz, corpus is {r} Hz",
                                p.display(),
                                audio.sample_rate
                            )))
                        }
                        _ => {}
                    }
                    Ok(audio.signal)
                })
                .collect()
        };
        let targets = read("target")?;
        let backgrounds = read("background")?;
        Ok(Self {
            targets,
            backgrounds,
            sample_rate: sample_rate.unwrap_or(16_000),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyConfig {
    pub snr_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub quantizer: Quantizer,
    pub method: IntMethod,
    pub target_kind: TargetKind,
    pub background_kind: TargetKind,
    pub target_len: usize,
    pub scene_len: usize,
    pub sample_rate: u32,
    /// Worker threads; `None` uses the machine's parallelism.
    pub threads: Option<usize>,
    pub corpus: Option<WavCorpus>,
}

/// Background band for the synthetic scenes.
pub const DEFAULT_BACKGROUND: TargetKind = TargetKind::Bandlimited { low: 0.005, high: 0.35 };

impl AccuracyConfig {
    /// One-second target in a five-second scene at 16 kHz.
    pub fn full() -> Self {
        Self {
            snr_list: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
            trials: 200,
            seed: 0,
            quantizer: Quantizer::Sign,
            method: IntMethod::Ks,
            target_kind: TargetKind::AmBursts,
            background_kind: DEFAULT_BACKGROUND,
            target_len: 16_000,
            scene_len: 80_000,
            sample_rate: 16_000,
            threads: None,
            corpus: None,
        }
    }

    /// 2048-sample target in an 8192-sample scene.
    pub fn small() -> Self {
        Self {
            target_len: 2048,
            scene_len: 8192,
            ..Self::full()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.snr_list.is_empty() || self.snr_list.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR list must be non-empty and finite".into()));
        }
        if self.corpus.is_none() && (self.target_len == 0 || self.scene_len < self.target_len) {
            return Err(Error::Config(format!(
                "need 1 <= target_len ({}) <= scene_len ({})",
                self.target_len, self.scene_len
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub snr_db: f64,
    pub quantizer: String,
    pub mode: Mode,
    pub trials: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub rows: Vec<AccuracyRow>,
    /// Per SNR: trials where the tie-break changed the returned lag set.
    pub tie_break_changes: Vec<(f64, usize)>,
    /// Trials whose estimation failed and were scored incorrect.
    pub errors: usize,
}

impl AccuracyReport {
    pub fn row(&self, snr_db: f64, mode: Mode) -> Option<&AccuracyRow> {
        self.rows.iter().find(|r| r.snr_db == snr_db && r.mode == mode)
    }

    pub fn to_csv(&self) -> String {
        accuracy_csv(&self.rows)
    }
}

pub fn accuracy_csv(rows: &[AccuracyRow]) -> String {
    let mut out = String::from(ACCURACY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.snr_db, r.quantizer, r.mode, r.trials, r.correct, r.accuracy
        )
        .expect("write to String");
    }
    out
}

/// Per-trial RNG: stream `index` of the batch seed.
pub fn trial_rng(batch_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(batch_seed);
    rng.set_stream(index);
    rng
}

/// Every lag within one sample of the truth.
pub fn all_within_one(lags: &[i64], true_lag: f64) -> bool {
    !lags.is_empty() && lags.iter().all(|&l| (l as f64 - true_lag).abs() < 1.0)
}

#[derive(Debug, Clone, Copy, Default)]
struct Outcome {
    correct: [bool; 3],
    tie_changed: bool,
    errors: usize,
}

struct TrialInputs {
    target: Signal,
    background: Signal,
    delay: f64,
}

fn trial_inputs(config: &AccuracyConfig, index: usize) -> Result<TrialInputs> {
    let mut rng = trial_rng(config.seed, index as u64);
    match &config.corpus {
        Some(corpus) => {
            let target = corpus.targets[index % corpus.targets.len()].clone();
            let background = corpus.backgrounds[rng.gen_range(0..corpus.backgrounds.len())].clone();
            if background.len() < target.len() {
                return Err(Error::Config(format!(
                    "background of {} samples is shorter than target of {}",
                    background.len(),
                    target.len()
                )));
            }
            let delay = rng.gen_range(0.0..=(background.len() - target.len()) as f64);
            Ok(TrialInputs { target, background, delay })
        }
        None => {
            let target_seed: u64 = rng.gen();
            let background_seed: u64 = rng.gen();
            let delay = rng.gen_range(0.0..=(config.scene_len - config.target_len) as f64);
            Ok(TrialInputs {
                target: gen_target(target_seed, config.target_len, config.target_kind)?,
                background: gen_target(background_seed, config.scene_len, config.background_kind)?,
                delay,
            })
        }
    }
}

fn score_one(config: &AccuracyConfig, inputs: &TrialInputs, index: usize, snr_db: f64) -> Outcome {
    let mut out = Outcome::default();
    let spec = TrialSpec {
        seed: config.seed,
        target_len: inputs.target.len(),
        scene_len: inputs.background.len(),
        true_delay: inputs.delay,
        snr_db,
        quantizer: config.quantizer.to_string(),
        sample_rate: config.sample_rate,
    };
    let trial = match make_trial(&spec, &inputs.target, &inputs.background) {
        Ok(t) => t,
        Err(e) => {
            log::warn!("trial {index} at {snr_db} dB: {e}");
            out.errors = 3;
            return out;
        }
    };

    let q = &config.quantizer;
    let opts = EstimateOptions {
        method: config.method,
        ..Default::default()
    };
    match estimate_with(&trial.x, &trial.y, q, q, opts) {
        Ok(r) => {
            out.correct[0] = all_within_one(&r.lags, trial.true_lag);
            let raw = r.pre_tie_break_lags();
            out.correct[1] = all_within_one(&raw, trial.true_lag);
            out.tie_changed = raw != r.lags;
        }
        Err(e) => {
            log::warn!("trial {index} at {snr_db} dB, quantized: {e}");
            out.errors += 2;
        }
    }
    match estimate_real(&trial.x, &trial.y, RealMethod::Fft) {
        Ok(r) => out.correct[2] = all_within_one(&r.lags, trial.true_lag),
        Err(e) => {
            log::warn!("trial {index} at {snr_db} dB, unquantized: {e}");
            out.errors += 1;
        }
    }
    out
}

fn evaluate_trial(config: &AccuracyConfig, index: usize) -> Vec<Outcome> {
    match trial_inputs(config, index) {
        Ok(inputs) => config
            .snr_list
            .iter()
            .map(|&snr| score_one(config, &inputs, index, snr))
            .collect(),
        Err(e) => {
            log::warn!("trial {index}: {e}");
            vec![
                Outcome {
                    errors: 3,
                    ..Default::default()
                };
                config.snr_list.len()
            ]
        }
    }
}

/// Runs all trials, in parallel when allowed; output is independent of the
/// thread count.
pub fn run_accuracy(config: &AccuracyConfig) -> Result<AccuracyReport> {
    config.validate()?;
    let run = || -> Vec<Vec<Outcome>> {
        (0..config.trials)
            .into_par_iter()
            .map(|i| evaluate_trial(config, i))
            .collect()
    };
    let outcomes = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut report = AccuracyReport::default();
    let quantizer = config.quantizer.to_string();
    for (s, &snr_db) in config.snr_list.iter().enumerate() {
        for (m, &mode) in Mode::ALL.iter().enumerate() {
            let correct = outcomes.iter().filter(|o| o[s].correct[m]).count();
            report.rows.push(AccuracyRow {
                snr_db,
                quantizer: quantizer.clone(),
                mode,
                trials: config.trials,
                correct,
                accuracy: correct as f64 / config.trials as f64,
            });
        }
        let changed = outcomes.iter().filter(|o| o[s].tie_changed).count();
        report.tie_break_changes.push((snr_db, changed));
        report.errors += outcomes.iter().map(|o| o[s].errors).sum::<usize>();
    }
    Ok(report)
}
