//! Peak-lag estimation from quantized integer cross-correlation.
//!
//! The pipeline: quantize both inputs with monotone maps, correlate the integer
//! sequences exactly, collect every lag that attains the maximum and, if more
//! than one does, keep those that maximize the unquantized correlation. The
//! unquantized values are evaluated only at the tied lags.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intxcorr::{xcorr_int_bf, xcorr_int_ks_with, MulBackend};
use crate::quantize::Quantizer;
use crate::realxcorr::{xcorr_real_at, xcorr_real_bf, xcorr_real_fft};
use crate::signal::{Correlogram, Signal};

/// How the integer correlogram is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntMethod {
    /// Kronecker substitution with the given big-multiply backend.
    #[default]
    Ks,
    Bf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealMethod {
    #[default]
    Fft,
    Bf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    IntegerKs,
    IntegerBf,
    RealFft,
    RealBf,
}

impl From<IntMethod> for Method {
    fn from(m: IntMethod) -> Self {
        match m {
            IntMethod::Ks => Method::IntegerKs,
            IntMethod::Bf => Method::IntegerBf,
        }
    }
}

impl From<RealMethod> for Method {
    fn from(m: RealMethod) -> Self {
        match m {
            RealMethod::Fft => Method::RealFft,
            RealMethod::Bf => Method::RealBf,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::IntegerKs => "integer_ks",
            Method::IntegerBf => "integer_bf",
            Method::RealFft => "real_fft",
            Method::RealBf => "real_bf",
        })
    }
}

impl FromStr for IntMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ks" => Ok(IntMethod::Ks),
            "bf" => Ok(IntMethod::Bf),
            other => Err(Error::Config(format!("unknown method {other:?}, expected ks|bf"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EstimateOptions {
    pub method: IntMethod,
    pub backend: MulBackend,
    /// Skip the unquantized tie-break and return the raw argmax set.
    pub until_line_4: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    /// Surviving peak lags, ascending.
    pub lags: Vec<i64>,
    /// Maximum of the integer correlogram. For unquantized estimates this is
    /// `None` and `peak_value_real` is set instead.
    pub peak_value_int: Option<i64>,
    pub peak_value_real: Option<f64>,
    /// The argmax set before tie-breaking had two or more lags.
    pub tie_broken: bool,
    /// Unquantized correlation at each pre-tie-break lag, when the tie-break ran.
    pub tie_break_values: Vec<(i64, f64)>,
    pub method: Method,
}

impl EstimationResult {
    /// Argmax set before any tie-breaking was applied.
    pub fn pre_tie_break_lags(&self) -> Vec<i64> {
        if self.tie_break_values.is_empty() {
            self.lags.clone()
        } else {
            self.tie_break_values.iter().map(|&(l, _)| l).collect()
        }
    }
}

/// Every lag attaining the exact maximum, ascending.
///
/// Panics on an empty correlogram.
pub fn argmax_set<T: Copy + PartialOrd>(c: &Correlogram<T>) -> Vec<i64> {
    let mut best = *c.values.first().expect("non-empty correlogram");
    let mut lags = Vec::new();
    for (lag, v) in c.iter() {
        if v > best {
            best = v;
            lags.clear();
            lags.push(lag);
        } else if v == best {
            lags.push(lag);
        }
    }
    lags
}

/// Quantized estimate with the default options.
pub fn estimate(x: &Signal, y: &Signal, phi: &Quantizer, psi: &Quantizer) -> Result<EstimationResult> {
    estimate_with(x, y, phi, psi, EstimateOptions::default())
}

pub fn estimate_with(
    x: &Signal,
    y: &Signal,
    phi: &Quantizer,
    psi: &Quantizer,
    opts: EstimateOptions,
) -> Result<EstimationResult> {
    let u = phi.apply(x);
    let v = psi.apply(y);
    if u.is_all_zero() {
        return Err(Error::DegenerateQuantization("x"));
    }
    if v.is_all_zero() {
        return Err(Error::DegenerateQuantization("y"));
    }

    let w = match opts.method {
        IntMethod::Ks => xcorr_int_ks_with(&u, &v, opts.backend)?,
        IntMethod::Bf => xcorr_int_bf(&u, &v),
    };
    let tied = argmax_set(&w);
    let peak = w.get(tied[0]).expect("argmax lag is in range");

    let mut result = EstimationResult {
        lags: tied.clone(),
        peak_value_int: Some(peak),
        peak_value_real: None,
        tie_broken: false,
        tie_break_values: Vec::new(),
        method: opts.method.into(),
    };
    if tied.len() > 1 && !opts.until_line_4 {
        let values: Vec<(i64, f64)> = tied.iter().map(|&l| (l, xcorr_real_at(x, y, l))).collect();
        let best = values
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        result.lags = values.iter().filter(|&&(_, v)| v == best).map(|&(l, _)| l).collect();
        result.peak_value_real = Some(best);
        result.tie_broken = true;
        result.tie_break_values = values;
    }
    Ok(result)
}

/// Argmax set of the unquantized correlation.
pub fn estimate_real(x: &Signal, y: &Signal, method: RealMethod) -> Result<EstimationResult> {
    if x.is_all_zero() || y.is_all_zero() {
        return Err(Error::DegenerateInput("estimate_real needs nonzero signals"));
    }
    let c = match method {
        RealMethod::Fft => xcorr_real_fft(x, y),
        RealMethod::Bf => xcorr_real_bf(x, y),
    };
    let lags = argmax_set(&c);
    let peak = c.get(lags[0]).expect("argmax lag is in range");
    Ok(EstimationResult {
        lags,
        peak_value_int: None,
        peak_value_real: Some(peak),
        tie_broken: false,
        tie_break_values: Vec::new(),
        method: method.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sig(start: i64, s: &[f64]) -> Signal {
        Signal::new(start, s.to_vec()).unwrap()
    }

    fn random_signal(rng: &mut ChaCha8Rng, len: usize) -> Signal {
        Signal::from_samples((0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax_set(&Correlogram::new(-1, vec![2i64, 5, 2])), vec![0]);
        assert_eq!(argmax_set(&Correlogram::new(0, vec![3i64, 3, 1])), vec![0, 1]);
        assert_eq!(argmax_set(&Correlogram::new(9, vec![-4i64])), vec![9]);
        assert_eq!(argmax_set(&Correlogram::new(0, vec![1.0, 0.5, 1.0])), vec![0, 2]);
    }

    #[test]
    fn noise_free_sign_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y = random_signal(&mut rng, 256);
        for nu in [-100, -1, 0, 37, 200] {
            let x = y.shift(nu).scale(1.7);
            for method in [IntMethod::Ks, IntMethod::Bf] {
                let opts = EstimateOptions { method, ..Default::default() };
                let r = estimate_with(&x, &y, &Quantizer::Sign, &Quantizer::Sign, opts).unwrap();
                assert_eq!(r.lags, vec![nu]);
                assert_eq!(r.peak_value_int, Some(256));
            }
        }
    }

    #[test]
    fn constructed_tie_is_broken_by_real_values() {
        // sign(x) = [1, 1], sign(y) = [1, 1, 1]: integer CCF over lags -1..=2
        // is [1, 2, 2, 1], tied at lags 0 and 1.
        let x = sig(0, &[1.0, 0.5]);
        let y = sig(0, &[0.2, 1.0, 0.5]);
        let full_int = xcorr_int_bf(&Quantizer::Sign.apply(&x), &Quantizer::Sign.apply(&y));
        assert_eq!(full_int.values, vec![1, 2, 2, 1]);

        // Real CCF oracle: lag 0 -> 1*0.2 + 0.5*1.0 = 0.7; lag 1 -> 1*1.0 + 0.5*0.5 = 1.25.
        let real = xcorr_real_bf(&x, &y);
        assert_eq!(argmax_set(&real), vec![1]);

        let r = estimate(&x, &y, &Quantizer::Sign, &Quantizer::Sign).unwrap();
        assert_eq!(r.lags, vec![1]);
        assert!(r.tie_broken);
        assert_eq!(r.tie_break_values.len(), 2);
        assert!((r.tie_break_values[0].1 - 0.7).abs() < 1e-15);
        assert_eq!(r.tie_break_values[1], (1, 1.25));
        assert_eq!(r.pre_tie_break_lags(), vec![0, 1]);

        let raw = estimate_with(
            &x,
            &y,
            &Quantizer::Sign,
            &Quantizer::Sign,
            EstimateOptions { until_line_4: true, ..Default::default() },
        )
        .unwrap();
        assert_eq!(raw.lags, vec![0, 1]);
        assert!(!raw.tie_broken);
    }

    #[test]
    fn real_tie_keeps_all_lags() {
        // Symmetric ties survive the real tie-break too.
        let x = sig(0, &[1.0]);
        let y = sig(0, &[1.0, 1.0]);
        let r = estimate(&x, &y, &Quantizer::Sign, &Quantizer::Sign).unwrap();
        assert_eq!(r.lags, vec![0, 1]);
        assert!(r.tie_broken);
    }

    #[test]
    fn dead_zone_is_degenerate() {
        let q = Quantizer::uniform(4, 1.0).unwrap();
        let x = sig(0, &[0.1, -0.2, 0.3]);
        let y = sig(0, &[2.0, 1.0]);
        assert!(matches!(estimate(&x, &y, &q, &q), Err(Error::DegenerateQuantization("x"))));
        assert!(matches!(estimate(&y, &x, &q, &q), Err(Error::DegenerateQuantization("y"))));
    }

    #[test]
    fn real_estimates() {
        let x = sig(0, &[1.0, 2.0]);
        let r = estimate_real(&x, &x, RealMethod::Bf).unwrap();
        assert_eq!(r.lags, vec![0]);
        assert_eq!(r.peak_value_real, Some(5.0));

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let y = random_signal(&mut rng, 500);
        assert_eq!(estimate_real(&y, &y, RealMethod::Fft).unwrap().lags, vec![0]);
        let x = y.shift(-42).scale(0.3);
        assert_eq!(estimate_real(&x, &y, RealMethod::Fft).unwrap().lags, vec![-42]);

        let z = sig(0, &[0.0]);
        assert!(matches!(estimate_real(&z, &y, RealMethod::Bf), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn ks_and_bf_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for seed in 0..40 {
            let (ny, nx) = (rng.gen_range(1..200), rng.gen_range(1..200));
            let y = random_signal(&mut rng, ny);
            let x = random_signal(&mut rng, nx);
            let q = Quantizer::random_monotone(seed, 1 + seed as u32 % 8, 6).unwrap();
            let a = estimate_with(&x, &y, &q, &Quantizer::Sign, EstimateOptions::default());
            let b = estimate_with(
                &x,
                &y,
                &q,
                &Quantizer::Sign,
                EstimateOptions { method: IntMethod::Bf, ..Default::default() },
            );
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    assert_eq!(a.lags, b.lags);
                    assert_eq!(a.peak_value_int, b.peak_value_int);
                    assert_eq!(a.tie_break_values, b.tie_break_values);
                }
                (Err(_), Err(_)) => {}
                (a, b) => panic!("paths disagree: {a:?} vs {b:?}"),
            }
        }
    }
}
