//! Experiment inputs: synthetic targets, fractional delay, SNR mixing, and
//! trial construction.

pub mod wav;

use std::f64::consts::PI;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::realxcorr::fft_in_place;
use crate::signal::Signal;

pub use wav::{load_raw, load_signal, load_wav, write_raw, write_wav, WavAudio};

/// Default half-width of the interpolation kernel, in taps.
pub const DEFAULT_SINC_HALF_WIDTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    White,
    /// Band-limited Gaussian noise; edges in cycles per sample.
    Bandlimited { low: f64, high: f64 },
    /// Band-limited noise under a random burst envelope.
    AmBursts,
}

/// Carrier band of [`TargetKind::AmBursts`].
pub const AM_BURST_BAND: (f64, f64) = (0.01, 0.25);

fn white(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Gaussian noise with its spectrum zeroed outside `[low, high]`, generated
/// on a power-of-two grid and truncated to `len`.
fn bandlimited(rng: &mut ChaCha8Rng, len: usize, low: f64, high: f64) -> Vec<f64> {
    let size = len.next_power_of_two().max(2);
    let mut buf: Vec<Complex<f64>> = white(rng, size)
        .into_iter()
        .map(|r| Complex::new(r, 0.0))
        .collect();
    fft_in_place(&mut buf, false).expect("power-of-two length");
    for (k, c) in buf.iter_mut().enumerate() {
        let f = k.min(size - k) as f64 / size as f64;
        if f < low || f > high {
            *c = Complex::new(0.0, 0.0);
        }
    }
    fft_in_place(&mut buf, true).expect("power-of-two length");
    buf.truncate(len);
    buf.into_iter().map(|c| c.re).collect()
}

fn hann(t: f64) -> f64 {
    // t in [-1, 1]
    0.5 * (1.0 + (PI * t).cos())
}

fn burst_envelope(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut env = vec![0.02; len];
    let bursts = 1 + len / 1024 + rng.gen_range(0..3);
    let (min_w, max_w) = ((len / 16).max(2), (len / 4).max(3));
    for _ in 0..bursts {
        let center = rng.gen_range(0..len) as f64;
        let half = rng.gen_range(min_w..max_w) as f64 / 2.0;
        let amp = rng.gen_range(0.3..1.0);
        let lo = (center - half).ceil().max(0.0) as usize;
        let hi = ((center + half).floor() as usize).min(len - 1);
        for (n, e) in env.iter_mut().enumerate().take(hi + 1).skip(lo) {
            *e += amp * hann((n as f64 - center) / half);
        }
    }
    env
}

fn unit_rms(mut v: Vec<f64>) -> Vec<f64> {
    let rms = (v.iter().map(|s| s * s).sum::<f64>() / v.len() as f64).sqrt();
    if rms > 0.0 {
        v.iter_mut().for_each(|s| *s /= rms);
    }
    v
}

/// Deterministic unit-RMS pseudo-random signal starting at index 0.
pub fn gen_target(seed: u64, len: usize, kind: TargetKind) -> Result<Signal> {
    if len == 0 {
        return Err(Error::Config("target length must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = match kind {
        TargetKind::White => white(&mut rng, len),
        TargetKind::Bandlimited { low, high } => {
            if !(0.0 <= low && low < high && high <= 0.5) {
                return Err(Error::Config(format!(
                    "band [{low}, {high}] must satisfy 0 <= low < high <= 0.5"
                )));
            }
            bandlimited(&mut rng, len, low, high)
        }
        TargetKind::AmBursts => {
            let carrier = bandlimited(&mut rng, len, AM_BURST_BAND.0, AM_BURST_BAND.1);
            let env = burst_envelope(&mut rng, len);
            carrier.iter().zip(&env).map(|(c, e)| c * e).collect()
        }
    };
    Signal::from_samples(unit_rms(samples))
}

/// Hann-windowed sinc kernel of half-width `w`.
fn kernel(t: f64, w: f64) -> f64 {
    if t.abs() >= w {
        return 0.0;
    }
    let sinc = if t == 0.0 { 1.0 } else { (PI * t).sin() / (PI * t) };
    sinc * hann(t / w)
}

/// `s'[n] ≈ s[n + d]` with the default kernel half-width.
pub fn sinc_shift(s: &Signal, d: f64) -> Signal {
    sinc_shift_with(s, d, DEFAULT_SINC_HALF_WIDTH)
}

/// `s'[n] ≈ s[n + d]` by windowed-sinc interpolation.
///
/// Integer `d` is an exact relabel. Otherwise the output covers every index
/// the `2W`-tap kernel reaches from the input support; input samples outside
/// the support are zero.
pub fn sinc_shift_with(s: &Signal, d: f64, half_width: usize) -> Signal {
    let whole = d.floor();
    let frac = d - whole;
    let k = whole as i64;
    if frac == 0.0 {
        return s.shift(k);
    }
    let w = half_width.max(1) as i64;
    let first = s.start() - k - w;
    let last = s.end() - k + w;
    let samples = (first..=last)
        .map(|n| {
            // Taps j with |n + d - j| < w.
            let lo = (n + k - w + 1).max(s.start());
            let hi = (n + k + w).min(s.end());
            (lo..=hi)
                .map(|j| s.at(j) * kernel((n + k - j) as f64 + frac, w as f64))
                .sum()
        })
        .collect();
    Signal::new(first, samples).expect("non-empty window")
}

/// Gain `g` such that `(‖target‖²/len_t) / (g² ‖background‖²/len_b)` equals
/// `10^(snr_db / 10)`.
pub fn snr_gain(target: &Signal, background: &Signal, snr_db: f64) -> Result<f64> {
    let pt = target.l2_norm().powi(2) / target.len() as f64;
    let pb = background.l2_norm().powi(2) / background.len() as f64;
    if pt == 0.0 || pb == 0.0 {
        return Err(Error::DegenerateInput("SNR mixing needs nonzero target and background"));
    }
    Ok((pt / (pb * 10f64.powf(snr_db / 10.0))).sqrt())
}

/// `target + g * background` over the union of both supports, with `g` from
/// [`snr_gain`].
pub fn mix_at_snr(target: &Signal, background: &Signal, snr_db: f64) -> Result<Signal> {
    let g = snr_gain(target, background, snr_db)?;
    Ok(add_scaled(target, background, g))
}

/// `a + g * b` over the union of the two supports.
pub fn add_scaled(a: &Signal, b: &Signal, g: f64) -> Signal {
    let first = a.start().min(b.start());
    let last = a.end().max(b.end());
    let samples = (first..=last).map(|n| a.at(n) + g * b.at(n)).collect();
    Signal::new(first, samples).expect("non-empty union")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub seed: u64,
    pub target_len: usize,
    pub scene_len: usize,
    /// Placement of the target inside the scene, in samples.
    pub true_delay: f64,
    pub snr_db: f64,
    pub quantizer: String,
    pub sample_rate: u32,
}

impl TrialSpec {
    pub fn validate(&self) -> Result<()> {
        if self.target_len == 0 || self.scene_len < self.target_len {
            return Err(Error::Config(format!(
                "need 1 <= target_len ({}) <= scene_len ({})",
                self.target_len, self.scene_len
            )));
        }
        let max_delay = (self.scene_len - self.target_len) as f64;
        if !(0.0..=max_delay).contains(&self.true_delay) {
            return Err(Error::Config(format!(
                "delay {} outside [0, {max_delay}]",
                self.true_delay
            )));
        }
        Ok(())
    }
}

/// One estimation problem: `x[n] ≈ y[n + true_lag]` plus background.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    /// Scene: delayed target mixed with background, indices `0..scene_len`.
    pub x: Signal,
    /// Clean target, indices `0..target_len`.
    pub y: Signal,
    /// Lag at which `x ⋆ y` peaks in the noise-free case; equals `-true_delay`.
    pub true_lag: f64,
}

/// Places `target` at `spec.true_delay` inside a scene of `spec.scene_len`
/// samples and adds the first `scene_len` samples of `background` at
/// `spec.snr_db`.
pub fn make_trial(spec: &TrialSpec, target: &Signal, background: &Signal) -> Result<Trial> {
    spec.validate()?;
    if target.len() != spec.target_len {
        return Err(Error::Config(format!(
            "target has {} samples, trial expects {}",
            target.len(),
            spec.target_len
        )));
    }
    if background.len() < spec.scene_len {
        return Err(Error::Config(format!(
            "background has {} samples, scene needs {}",
            background.len(),
            spec.scene_len
        )));
    }
    let y = Signal::from_samples(target.samples().to_vec())?;
    let placed = sinc_shift(&y, -spec.true_delay).window(0, spec.scene_len)?;
    let segment = Signal::from_samples(background.samples()[..spec.scene_len].to_vec())?;
    let g = snr_gain(&y, &segment, spec.snr_db)?;
    let x = add_scaled(&placed, &segment, g);
    Ok(Trial {
        x,
        y,
        true_lag: -spec.true_delay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::estimate;
    use crate::quantize::Quantizer;
    use crate::realxcorr::fft;

    fn spectrum_energy_in_band(s: &[f64], low: f64, high: f64) -> f64 {
        let n = s.len();
        let c: Vec<Complex<f64>> = s.iter().map(|&r| Complex::new(r, 0.0)).collect();
        let f = fft(&c, false).unwrap();
        let total: f64 = f.iter().map(|v| v.norm_sqr()).sum();
        let inside: f64 = f
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let fr = (*k).min(n - k) as f64 / n as f64;
                fr >= low && fr <= high
            })
            .map(|(_, v)| v.norm_sqr())
            .sum();
        inside / total
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in [
            TargetKind::White,
            TargetKind::Bandlimited { low: 0.02, high: 0.2 },
            TargetKind::AmBursts,
        ] {
            let a = gen_target(5, 3000, kind).unwrap();
            assert_eq!(a, gen_target(5, 3000, kind).unwrap());
            assert_ne!(a, gen_target(6, 3000, kind).unwrap());
            assert_eq!(a.len(), 3000);
        }
    }

    #[test]
    fn bandlimited_energy_stays_in_band() {
        let s = gen_target(1, 4096, TargetKind::Bandlimited { low: 0.02, high: 0.2 }).unwrap();
        assert!(spectrum_energy_in_band(s.samples(), 0.02, 0.2) >= 0.95);
        // Truncated lengths leak a little but stay well inside the bound.
        let s = gen_target(2, 3000, TargetKind::Bandlimited { low: 0.02, high: 0.2 }).unwrap();
        let padded: Vec<f64> = s.samples().iter().copied().chain(std::iter::repeat(0.0)).take(4096).collect();
        assert!(spectrum_energy_in_band(&padded, 0.02, 0.2) >= 0.95);
    }

    #[test]
    fn white_mean_near_zero() {
        let len = 10_000;
        let s = gen_target(3, len, TargetKind::White).unwrap();
        let mean = s.samples().iter().sum::<f64>() / len as f64;
        assert!(mean.abs() < 5.0 / (len as f64).sqrt());
    }

    #[test]
    fn rejects_bad_band() {
        assert!(gen_target(0, 10, TargetKind::Bandlimited { low: 0.3, high: 0.2 }).is_err());
        assert!(gen_target(0, 0, TargetKind::White).is_err());
    }

    #[test]
    fn integer_sinc_shift_is_exact_relabel() {
        let s = gen_target(4, 100, TargetKind::White).unwrap();
        assert_eq!(sinc_shift(&s, 3.0), s.shift(3));
        assert_eq!(sinc_shift(&s, -7.0), s.shift(-7));
    }

    #[test]
    fn sinc_shift_round_trip_on_bandlimited() {
        // Fade the edges so the finite signal itself stays band-limited.
        let raw = gen_target(5, 4096, TargetKind::Bandlimited { low: 0.02, high: 0.2 }).unwrap();
        let fade = 256;
        let s = Signal::from_samples(
            raw.samples()
                .iter()
                .enumerate()
                .map(|(n, &v)| {
                    let edge = n.min(4095 - n);
                    if edge < fade {
                        v * 0.5 * (1.0 - (PI * edge as f64 / fade as f64).cos())
                    } else {
                        v
                    }
                })
                .collect(),
        )
        .unwrap();
        let back = sinc_shift(&sinc_shift(&s, 0.5), -0.5);
        let (first, last) = (back.start().min(s.start()), back.end().max(s.end()));
        let err: f64 = (first..=last).map(|n| (back.at(n) - s.at(n)).powi(2)).sum();
        let rel = (err / s.l2_norm().powi(2)).sqrt();
        assert!(rel <= 1e-3, "relative error {rel}");
    }

    #[test]
    fn sinc_shift_matches_analytic_sinusoid() {
        let f = 0.1;
        let n = 1024;
        let s = Signal::from_samples((0..n).map(|k| (2.0 * PI * f * k as f64).sin()).collect()).unwrap();
        let d = 0.25;
        let shifted = sinc_shift(&s, d);
        let w = DEFAULT_SINC_HALF_WIDTH as i64;
        let max_err = (w..n as i64 - w)
            .map(|k| (shifted.at(k) - (2.0 * PI * f * (k as f64 + d)).sin()).abs())
            .fold(0.0, f64::max);
        assert!(max_err < 1e-3, "max error {max_err}");
    }

    #[test]
    fn snr_gain_cases() {
        let t = gen_target(6, 500, TargetKind::White).unwrap();
        let b = gen_target(7, 500, TargetKind::White).unwrap();
        let g = snr_gain(&t, &b, 0.0).unwrap();
        assert!((g - t.l2_norm() / b.l2_norm()).abs() < 1e-12);

        let g = snr_gain(&t, &b, 120.0).unwrap();
        assert!(g * b.l2_norm() <= 1e-6 * t.l2_norm() * (1.0 + 1e-12));

        let g2 = snr_gain(&t.scale(2.0), &b, 7.5).unwrap();
        assert!((g2 - 2.0 * snr_gain(&t, &b, 7.5).unwrap()).abs() < 1e-12);

        let z = Signal::zero();
        assert!(matches!(snr_gain(&z, &b, 0.0), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn mix_respects_energy_ratio() {
        let t = gen_target(8, 300, TargetKind::White).unwrap();
        let b = gen_target(9, 1200, TargetKind::White).unwrap();
        for snr in [-10.0, 0.0, 3.3, 20.0] {
            let mixed = mix_at_snr(&t, &b, snr).unwrap();
            let g = snr_gain(&t, &b, snr).unwrap();
            let noise = add_scaled(&mixed, &t, -1.0);
            let ratio = (t.l2_norm().powi(2) / 300.0) / (noise.l2_norm().powi(2) / 1200.0);
            assert!((ratio / 10f64.powf(snr / 10.0) - 1.0).abs() < 1e-9);
            assert!((noise.l2_norm() - g * b.l2_norm()).abs() < 1e-9 * noise.l2_norm());
        }
    }

    fn spec(delay: f64, snr_db: f64) -> TrialSpec {
        TrialSpec {
            seed: 1,
            target_len: 256,
            scene_len: 1024,
            true_delay: delay,
            snr_db,
            quantizer: "sign".into(),
            sample_rate: 16_000,
        }
    }

    #[test]
    fn trial_geometry() {
        let t = gen_target(10, 256, TargetKind::AmBursts).unwrap();
        let b = gen_target(11, 1024, TargetKind::White).unwrap();
        let trial = make_trial(&spec(0.0, 120.0), &t, &b).unwrap();
        assert_eq!((trial.x.start(), trial.x.len()), (0, 1024));
        assert!((trial.x.at(0) - t.at(0)).abs() < 1e-5);
        assert_eq!(trial.true_lag, 0.0);

        assert_eq!(
            make_trial(&spec(3.5, 0.0), &t, &b).unwrap(),
            make_trial(&spec(3.5, 0.0), &t, &b).unwrap()
        );
    }

    #[test]
    fn near_noise_free_trial_recovers_lag() {
        let t = gen_target(12, 256, TargetKind::AmBursts).unwrap();
        let b = gen_target(13, 1024, TargetKind::Bandlimited { low: 0.01, high: 0.3 }).unwrap();
        for delay in [0.0, 17.0, 768.0] {
            let trial = make_trial(&spec(delay, 120.0), &t, &b).unwrap();
            let r = estimate(&trial.x, &trial.y, &Quantizer::Sign, &Quantizer::Sign).unwrap();
            assert_eq!(r.lags, vec![-(delay as i64)]);
        }
    }

    #[test]
    fn trial_spec_validation() {
        let t = gen_target(12, 256, TargetKind::White).unwrap();
        let b = gen_target(13, 1024, TargetKind::White).unwrap();
        assert!(make_trial(&spec(769.0, 0.0), &t, &b).is_err());
        assert!(make_trial(&spec(-1.0, 0.0), &t, &b).is_err());
        let short = gen_target(13, 1000, TargetKind::White).unwrap();
        assert!(make_trial(&spec(1.0, 0.0), &t, &short).is_err());
    }
}
