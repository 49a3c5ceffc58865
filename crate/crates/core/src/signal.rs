//! Finite-support discrete-time signals.
//!
//! Every signal is stored densely as a run of samples beginning at an integer
//! `start` index. Samples outside `[start, start + len - 1]` are zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real-valued signal with finite support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    start: i64,
    samples: Vec<f64>,
}

/// A bounded integer signal: every stored sample satisfies `|s| <= bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntSignal {
    start: i64,
    samples: Vec<i32>,
    bound: u32,
}

/// Returns the first and last indices of nonzero entries, if any.
fn nonzero_span<T, F: Fn(&T) -> bool>(samples: &[T], is_zero: F) -> Option<(usize, usize)> {
    let first = samples.iter().position(|s| !is_zero(s))?;
    let last = samples.iter().rposition(|s| !is_zero(s))?;
    Some((first, last))
}

fn reversed_start(start: i64, len: usize) -> i64 {
    -(start + len as i64 - 1)
}

impl Signal {
    pub fn new(start: i64, samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        Ok(Self { start, samples })
    }

    /// Signal starting at index 0.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        Self::new(0, samples)
    }

    /// The canonical all-zero signal.
    pub fn zero() -> Self {
        Self {
            start: 0,
            samples: vec![0.0],
        }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Index of the last stored sample.
    pub fn end(&self) -> i64 {
        self.start + self.samples.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Value at absolute index `n`, zero outside the stored window.
    pub fn at(&self, n: i64) -> f64 {
        let i = n - self.start;
        if i < 0 || i >= self.samples.len() as i64 {
            0.0
        } else {
            self.samples[i as usize]
        }
    }

    pub fn is_all_zero(&self) -> bool {
        self.samples.iter().all(|&s| s == 0.0)
    }

    /// `s'[m] = s[-m]`.
    pub fn reverse(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        Self {
            start: reversed_start(self.start, self.len()),
            samples,
        }
    }

    /// `s'[n] = s[n + d]`. Only the start index moves.
    pub fn shift(&self, d: i64) -> Self {
        Self {
            start: self.start - d,
            samples: self.samples.clone(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            start: self.start,
            samples: self.samples.iter().map(|&s| a * s).collect(),
        }
    }

    /// Sums squares in mirrored pairs from the outside in, so a reversed
    /// signal yields a bit-identical norm.
    pub fn l2_norm(&self) -> f64 {
        let n = self.samples.len();
        let mut acc = 0.0;
        for i in 0..n / 2 {
            let (a, b) = (self.samples[i], self.samples[n - 1 - i]);
            acc += a * a + b * b;
        }
        if n % 2 == 1 {
            let m = self.samples[n / 2];
            acc += m * m;
        }
        acc.sqrt()
    }

    /// Drops stored leading and trailing zeros. An all-zero signal becomes
    /// [`Signal::zero`].
    pub fn trim(&self) -> Self {
        match nonzero_span(&self.samples, |&s| s == 0.0) {
            Some((first, last)) => Self {
                start: self.start + first as i64,
                samples: self.samples[first..=last].to_vec(),
            },
            None => Self::zero(),
        }
    }

    /// Copy of the window `[from, from + len)` with zero extension.
    pub fn window(&self, from: i64, len: usize) -> Result<Self> {
        Self::new(from, (0..len as i64).map(|k| self.at(from + k)).collect())
    }

    /// Returns an error if any sample is NaN or infinite.
    pub fn check_finite(&self) -> Result<()> {
        if self.samples.iter().all(|s| s.is_finite()) {
            Ok(())
        } else {
            Err(Error::Parse("signal contains non-finite samples".into()))
        }
    }
}

impl IntSignal {
    /// Builds an integer signal with the tight bound `max |s|`.
    pub fn new(start: i64, samples: Vec<i32>) -> Result<Self> {
        let bound = samples.iter().map(|s| s.unsigned_abs()).max().unwrap_or(0);
        Self::with_bound(start, samples, bound)
    }

    /// Builds an integer signal with a caller-declared bound, which must not
    /// be violated by any sample.
    pub fn with_bound(start: i64, samples: Vec<i32>, bound: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        if let Some(s) = samples.iter().find(|s| s.unsigned_abs() > bound) {
            return Err(Error::Config(format!("sample {s} violates bound {bound}")));
        }
        Ok(Self {
            start,
            samples,
            bound,
        })
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.start + self.samples.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> &[i32] {
        &self.samples
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn at(&self, n: i64) -> i32 {
        let i = n - self.start;
        if i < 0 || i >= self.samples.len() as i64 {
            0
        } else {
            self.samples[i as usize]
        }
    }

    pub fn is_all_zero(&self) -> bool {
        self.samples.iter().all(|&s| s == 0)
    }

    pub fn reverse(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        Self {
            start: reversed_start(self.start, self.len()),
            samples,
            bound: self.bound,
        }
    }

    pub fn shift(&self, d: i64) -> Self {
        Self {
            start: self.start - d,
            samples: self.samples.clone(),
            bound: self.bound,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let energy: i128 = self.samples.iter().map(|&s| (s as i128) * (s as i128)).sum();
        (energy as f64).sqrt()
    }

    pub fn trim(&self) -> Self {
        match nonzero_span(&self.samples, |&s| s == 0) {
            Some((first, last)) => Self {
                start: self.start + first as i64,
                samples: self.samples[first..=last].to_vec(),
                bound: self.bound,
            },
            None => Self {
                start: 0,
                samples: vec![0],
                bound: self.bound,
            },
        }
    }
}

/// Lag-indexed cross-correlation values. Entry `i` holds the value at lag
/// `first_lag + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlogram<T> {
    pub first_lag: i64,
    pub values: Vec<T>,
    pub norm_x: Option<f64>,
    pub norm_y: Option<f64>,
}

pub type IntCorrelogram = Correlogram<i64>;
pub type RealCorrelogram = Correlogram<f64>;

/// First lag of `x ⋆ y` for inputs starting at `start_x` (length `len_x`)
/// and `start_y`.
pub fn ccf_first_lag(start_x: i64, len_x: usize, start_y: i64) -> i64 {
    start_y - (start_x + len_x as i64 - 1)
}

impl<T: Copy> Correlogram<T> {
    pub fn new(first_lag: i64, values: Vec<T>) -> Self {
        Self {
            first_lag,
            values,
            norm_x: None,
            norm_y: None,
        }
    }

    pub fn with_norms(mut self, norm_x: f64, norm_y: f64) -> Self {
        self.norm_x = Some(norm_x);
        self.norm_y = Some(norm_y);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last_lag(&self) -> i64 {
        self.first_lag + self.values.len() as i64 - 1
    }

    pub fn lags(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.values.len() as i64).map(move |i| self.first_lag + i)
    }

    pub fn get(&self, lag: i64) -> Option<T> {
        let i = lag - self.first_lag;
        if i < 0 {
            return None;
        }
        self.values.get(i as usize).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        self.lags().zip(self.values.iter().copied())
    }
}

impl RealCorrelogram {
    /// `(x ⋆ y) / (‖x‖·‖y‖)` when both norms are recorded and nonzero.
    pub fn normalized(&self) -> Option<Vec<f64>> {
        let denom = self.norm_x? * self.norm_y?;
        if denom == 0.0 {
            return None;
        }
        Some(self.values.iter().map(|&v| v / denom).collect())
    }
}

impl IntCorrelogram {
    pub fn to_real(&self) -> RealCorrelogram {
        Correlogram {
            first_lag: self.first_lag,
            values: self.values.iter().map(|&v| v as f64).collect(),
            norm_x: self.norm_x,
            norm_y: self.norm_y,
        }
    }

    pub fn normalized(&self) -> Option<Vec<f64>> {
        self.to_real().normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig(start: i64, s: &[f64]) -> Signal {
        Signal::new(start, s.to_vec()).unwrap()
    }

    #[test]
    fn reverse_reflects_indices() {
        let r = sig(0, &[1.0, 2.0, 3.0]).reverse();
        assert_eq!(r.start(), -2);
        assert_eq!(r.samples(), &[3.0, 2.0, 1.0]);

        let r = sig(-1, &[5.0]).reverse();
        assert_eq!(r.start(), 1);
        assert_eq!(r.samples(), &[5.0]);
    }

    #[test]
    fn shift_relabels_start() {
        let s = sig(0, &[1.0, -2.0]);
        assert_eq!(s.shift(0), s);
        let t = s.shift(3);
        assert_eq!(t.start(), -3);
        assert_eq!(t.samples(), s.samples());
        assert_eq!(t.at(-3), s.at(0));
    }

    #[test]
    fn norms() {
        assert_eq!(sig(0, &[3.0, 4.0]).l2_norm(), 5.0);
        assert_eq!(sig(4, &[0.0, 0.0]).l2_norm(), 0.0);
        assert_eq!(sig(0, &[1.0; 4]).l2_norm(), 2.0);
    }

    #[test]
    fn empty_is_rejected() {
        assert!(matches!(Signal::new(0, vec![]), Err(Error::EmptySignal)));
        assert!(matches!(IntSignal::new(0, vec![]), Err(Error::EmptySignal)));
    }

    #[test]
    fn trim_all_zero_is_canonical() {
        let t = sig(7, &[0.0, -0.0, 0.0]).trim();
        assert_eq!(t, Signal::zero());
        let t = IntSignal::new(3, vec![0, 0]).unwrap().trim();
        assert_eq!((t.start(), t.samples()), (0, &[0][..]));
    }

    #[test]
    fn trim_strips_edges() {
        let t = sig(-2, &[0.0, 1.5, 0.0, -1.0, 0.0]).trim();
        assert_eq!(t.start(), -1);
        assert_eq!(t.samples(), &[1.5, 0.0, -1.0]);
    }

    #[test]
    fn int_bound_is_checked() {
        assert!(IntSignal::with_bound(0, vec![1, -3], 2).is_err());
        let s = IntSignal::new(0, vec![1, -3]).unwrap();
        assert_eq!(s.bound(), 3);
    }

    #[test]
    fn correlogram_indexing() {
        let c = Correlogram::new(-1, vec![2i64, 5, 2]);
        assert_eq!(c.get(0), Some(5));
        assert_eq!(c.get(2), None);
        assert_eq!(c.last_lag(), 1);
        let n = c.clone().with_norms(5f64.sqrt(), 5f64.sqrt()).normalized().unwrap();
        assert!((n[1] - 1.0).abs() < 1e-15);
    }

    fn arb_signal() -> impl Strategy<Value = Signal> {
        (
            -50i64..50,
            prop::collection::vec(prop_oneof![Just(0.0), -10.0f64..10.0], 1..40),
        )
            .prop_map(|(start, s)| Signal::new(start, s).unwrap())
    }

    proptest! {
        #[test]
        fn reverse_is_involution(s in arb_signal()) {
            prop_assert_eq!(s.reverse().reverse(), s.clone());
            prop_assert_eq!(s.reverse().l2_norm(), s.l2_norm());
            for n in s.start() - 3..=s.end() + 3 {
                prop_assert_eq!(s.reverse().at(-n), s.at(n));
            }
        }

        #[test]
        fn shift_inverts(s in arb_signal(), d in -100i64..100) {
            prop_assert_eq!(s.shift(d).shift(-d), s.clone());
            prop_assert_eq!(s.shift(d).at(0), s.at(d));
        }

        #[test]
        fn trim_idempotent_and_value_preserving(s in arb_signal()) {
            let t = s.trim();
            prop_assert_eq!(t.trim(), t.clone());
            for n in s.start() - 3..=s.end() + 3 {
                prop_assert_eq!(t.at(n), s.at(n));
            }
            if !t.is_all_zero() {
                prop_assert!(t.samples()[0] != 0.0);
                prop_assert!(*t.samples().last().unwrap() != 0.0);
            }
        }
    }
}
