//! Randomized invariant suites shared by the `selftest` command.
//!
//! Each suite is deterministic in its seed and records one CSV line per case,
//! so reruns can be compared byte for byte.

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::accuracy::trial_rng;
use crate::estimator::argmax_set;
use crate::intxcorr::{xcorr_int_bf, xcorr_int_ks};
use crate::quantize::Quantizer;
use crate::realxcorr::{xcorr_real_bf, xcorr_real_fft};
use crate::signal::{IntSignal, Signal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub passed: usize,
    /// One line per case; the first line is a header.
    pub records: String,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.passed == self.cases
    }
}

/// Gaussian samples with roughly one in ten forced to exactly zero.
pub fn random_real(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len)
        .map(|_| {
            if rng.gen_bool(0.1) {
                0.0
            } else {
                scale * rng.sample::<f64, _>(StandardNormal)
            }
        })
        .collect()
}

/// Scaled, shifted pairs under random monotone quantizers: the true lag must
/// be among the maximizers of the quantized correlogram.
pub fn theorem_suite(seed: u64, cases: usize) -> SuiteReport {
    let mut records = String::from("case,len,nu,a,k_phi,k_psi,lags,peak,pass\n");
    let mut passed = 0;
    for case in 0..cases {
        let mut rng = trial_rng(seed, case as u64);
        let len = rng.gen_range(1..=512);
        let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
        let y = Signal::new(rng.gen_range(-300..300), random_real(&mut rng, len, scale))
            .expect("len >= 1");
        let a = 10.0 - rng.gen_range(0.0..10.0);
        let nu = rng.gen_range(-256..=256);
        let (k_phi, k_psi) = (rng.gen_range(1..=16), rng.gen_range(1..=16));
        let phi = Quantizer::random_monotone(rng.gen(), k_phi, rng.gen_range(1..=12))
            .expect("K >= 1");
        let psi = Quantizer::random_monotone(rng.gen(), k_psi, rng.gen_range(1..=12))
            .expect("K >= 1");

        let x = y.shift(nu).scale(a);
        let (u, v) = (phi.apply(&x), psi.apply(&y));
        let w = if u.is_all_zero() || v.is_all_zero() {
            xcorr_int_bf(&u, &v)
        } else {
            xcorr_int_ks(&u, &v).expect("non-degenerate")
        };
        let lags = argmax_set(&w);
        let pass = lags.contains(&nu);
        passed += pass as usize;
        writeln!(
            records,
            "{case},{len},{nu},{a},{k_phi},{k_psi},{},{},{pass}",
            lags.len(),
            w.get(lags[0]).unwrap_or_default()
        )
        .expect("write to String");
    }
    SuiteReport {
        name: "theorem".into(),
        cases,
        passed,
        records,
    }
}

/// Shapes of integer test signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntPattern {
    Uniform,
    AllNegative,
    Alternating,
    Binary,
}

pub fn random_int(rng: &mut ChaCha8Rng, len: usize, k: u32, pattern: IntPattern) -> IntSignal {
    let k = k as i32;
    let start = rng.gen_range(-1000..1000);
    loop {
        let samples: Vec<i32> = (0..len)
            .map(|i| match pattern {
                IntPattern::Uniform => rng.gen_range(-k..=k),
                IntPattern::AllNegative => rng.gen_range(-k..=-1),
                IntPattern::Alternating => {
                    let m = rng.gen_range(1..=k);
                    if i % 2 == 0 {
                        m
                    } else {
                        -m
                    }
                }
                IntPattern::Binary => rng.gen_range(-1..=1),
            })
            .collect();
        if samples.iter().any(|&s| s != 0) {
            let bound = if pattern == IntPattern::Binary { 1 } else { k as u32 };
            return IntSignal::with_bound(start, samples, bound).expect("within bound");
        }
    }
}

/// Kronecker-substitution correlation against the direct double loop.
pub fn ks_bf_suite(seed: u64, cases: usize, max_len: usize, max_k: u32) -> SuiteReport {
    let patterns = [
        IntPattern::Uniform,
        IntPattern::AllNegative,
        IntPattern::Alternating,
        IntPattern::Binary,
    ];
    let mut records = String::from("case,len_u,len_v,k_u,k_v,first_lag,checksum,pass\n");
    let mut passed = 0;
    for case in 0..cases {
        let mut rng = trial_rng(seed, case as u64);
        let pu = patterns[rng.gen_range(0..patterns.len())];
        let pv = patterns[rng.gen_range(0..patterns.len())];
        let (lu, lv) = (rng.gen_range(1..=max_len), rng.gen_range(1..=max_len));
        let (ku, kv) = (rng.gen_range(1..=max_k), rng.gen_range(1..=max_k));
        let u = random_int(&mut rng, lu, ku, pu);
        let v = random_int(&mut rng, lv, kv, pv);
        let bf = xcorr_int_bf(&u, &v);
        let pass = xcorr_int_ks(&u, &v).is_ok_and(|ks| ks == bf);
        passed += pass as usize;
        let checksum = bf
            .values
            .iter()
            .enumerate()
            .fold(0i64, |acc, (i, &c)| acc.wrapping_mul(31).wrapping_add(c ^ i as i64));
        writeln!(
            records,
            "{case},{lu},{lv},{},{},{},{checksum},{pass}",
            u.bound(),
            v.bound(),
            bf.first_lag
        )
        .expect("write to String");
    }
    SuiteReport {
        name: "ks_equals_bf".into(),
        cases,
        passed,
        records,
    }
}

/// FFT correlation against the direct sum, plus peak agreement on a
/// noise-free shifted copy.
pub fn fft_bf_suite(seed: u64, cases: usize, max_len: usize) -> SuiteReport {
    let mut records = String::from("case,len_x,len_y,max_abs_err_scaled,argmax_bf,argmax_fft,pass\n");
    let mut passed = 0;
    for case in 0..cases {
        let mut rng = trial_rng(seed, case as u64);
        let (lx, ly) = (rng.gen_range(1..=max_len), rng.gen_range(1..=max_len));
        let x = Signal::new(rng.gen_range(-500..500), random_real(&mut rng, lx, 1.0)).expect("len >= 1");
        let y = Signal::new(rng.gen_range(-500..500), random_real(&mut rng, ly, 1.0)).expect("len >= 1");
        let bf = xcorr_real_bf(&x, &y);
        let ff = xcorr_real_fft(&x, &y);
        let scale = x.l2_norm() * y.l2_norm();
        let err = bf
            .values
            .iter()
            .zip(&ff.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let close = bf.first_lag == ff.first_lag && err <= 1e-9 * scale;

        let nu = rng.gen_range(-(ly as i64)..=ly as i64);
        let shifted = y.shift(nu).scale(rng.gen_range(0.1..5.0));
        let peak_bf = argmax_set(&xcorr_real_bf(&shifted, &y));
        let peak_ff = argmax_set(&xcorr_real_fft(&shifted, &y));
        let same_peak = y.is_all_zero() || (peak_bf == peak_ff && peak_bf.contains(&nu));

        let pass = close && same_peak;
        passed += pass as usize;
        let rel = if scale > 0.0 { err / scale } else { err };
        writeln!(
            records,
            "{case},{lx},{ly},{rel:e},{},{},{pass}",
            peak_bf.first().unwrap_or(&0),
            peak_ff.first().unwrap_or(&0)
        )
        .expect("write to String");
    }
    SuiteReport {
        name: "fft_equals_bf".into(),
        cases,
        passed,
        records,
    }
}

/// The fast suite run by `selftest`.
pub fn selftest(seed: u64) -> Vec<SuiteReport> {
    vec![
        theorem_suite(seed, 100),
        ks_bf_suite(seed, 100, 1024, 16),
        fft_bf_suite(seed, 20, 4096),
    ]
}
