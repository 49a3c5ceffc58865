//! Exact integer cross-correlation.
//!
//! Two routes compute the same correlogram: a direct double loop, and a
//! Kronecker-substitution path that packs each sequence into one big natural
//! number, multiplies once, and reads the convolution back out of fixed-width
//! bit slots.
//!
//! Signed coefficients are handled by biasing: every sample `w` of a signal
//! with bound `K` is stored as `w + K` in `[0, 2K]`, so all slots are
//! nonnegative. The product then holds `(a + B_a) * (b + B_b)`, and the three
//! bias cross-terms are removed afterwards with prefix sums.

pub mod bigmul;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{ccf_first_lag, IntCorrelogram, IntSignal};

pub use bigmul::{big_mul, MulBackend};

/// Largest slot width the unpacker reads in one `u128` window.
pub const MAX_SLOT_BITS: u32 = 62;

/// Slot layout for one Kronecker-substitution product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KsPlan {
    /// Bits per packed coefficient slot.
    pub bits: u32,
    /// `min(len_u, len_v)`, the largest possible overlap count.
    pub n_min: u64,
    pub bound_u: u32,
    pub bound_v: u32,
}

impl KsPlan {
    pub fn bias_u(&self) -> i64 {
        self.bound_u as i64
    }

    pub fn bias_v(&self) -> i64 {
        self.bound_v as i64
    }

    /// `N_min * K_u * K_v`, the bound on every signed correlation value.
    pub fn value_bound(&self) -> i64 {
        (self.n_min as i64) * (self.bound_u as i64) * (self.bound_v as i64)
    }

    /// Checks `2^bits > 4 * N_min * K_u * K_v`, which keeps every biased
    /// product slot below `2^bits`.
    pub fn is_safe(&self) -> bool {
        self.bits >= 1
            && self.bits <= MAX_SLOT_BITS
            && (4 * self.value_bound() as u128) < (1u128 << self.bits)
    }
}

fn floor_log2(x: u64) -> u32 {
    63 - x.leading_zeros()
}

/// Chooses the slot width `L = floor(log2(N_min K_u K_v)) + 3`.
pub fn plan_ks(u: &IntSignal, v: &IntSignal) -> Result<KsPlan> {
    if u.is_all_zero() || v.is_all_zero() {
        return Err(Error::DegenerateInput(
            "Kronecker substitution needs two signals that are not all zero",
        ));
    }
    let n_min = u.len().min(v.len()) as u64;
    let (bound_u, bound_v) = (u.bound(), v.bound());
    let bits = floor_log2(n_min * bound_u as u64 * bound_v as u64) + 3;
    let plan = KsPlan {
        bits,
        n_min,
        bound_u,
        bound_v,
    };
    if bits > MAX_SLOT_BITS {
        return Err(Error::Config(format!(
            "slot width {bits} exceeds {MAX_SLOT_BITS} bits; inputs too long or bounds too large"
        )));
    }
    debug_assert!(plan.is_safe());
    Ok(plan)
}

/// Packs `sum_n (values[n] + bias) * 2^(bits * n)`.
///
/// Every biased value must lie in `[0, 2^bits)`.
pub fn pack_slots(values: &[i32], bias: i64, bits: u32) -> BigUint {
    assert!((1..=MAX_SLOT_BITS).contains(&bits));
    let total_bits = values.len() as u64 * bits as u64;
    let mut words = vec![0u64; total_bits.div_ceil(64) as usize + 1];
    for (n, &w) in values.iter().enumerate() {
        let slot = w as i64 + bias;
        debug_assert!(slot >= 0 && (slot as u64) < (1u64 << bits));
        let pos = n as u64 * bits as u64;
        let (word, off) = ((pos / 64) as usize, pos % 64);
        let wide = (slot as u128) << off;
        words[word] |= wide as u64;
        words[word + 1] |= (wide >> 64) as u64;
    }
    let digits = words
        .iter()
        .flat_map(|&w| [w as u32, (w >> 32) as u32])
        .collect();
    BigUint::new(digits)
}

/// Packs one signal with its bias under `plan`.
pub fn pack(w: &IntSignal, bias: i64, plan: &KsPlan) -> BigUint {
    pack_slots(w.samples(), bias, plan.bits)
}

/// Reads `count` unsigned `bits`-wide slots out of `p`, zero-filling past its
/// most significant bit.
pub fn unpack_slots(p: &BigUint, bits: u32, count: usize) -> Vec<u64> {
    assert!((1..=MAX_SLOT_BITS).contains(&bits));
    let words = p.to_u64_digits();
    let word = |i: usize| words.get(i).copied().unwrap_or(0) as u128;
    let mask = (1u128 << bits) - 1;
    (0..count)
        .map(|n| {
            let pos = n as u64 * bits as u64;
            let (i, off) = ((pos / 64) as usize, pos % 64);
            let window = word(i) | (word(i + 1) << 64);
            ((window >> off) & mask) as u64
        })
        .collect()
}

/// Recovers `u ⋆ v` from `p = pack(reverse(u)) * pack(v)`.
///
/// With `a = reverse(u)` and `b = v`, slot `n` holds
/// `c[n] = sum_{i+j=n} (a_i + B_u)(b_j + B_v)`, so
/// `(a*b)[n] = c[n] - B_v S_a[n] - B_u S_b[n] - B_u B_v cnt[n]` where
/// `S_a`, `S_b` are the window sums of the terms that meet at `n` and `cnt`
/// is the overlap count.
pub fn unpack_and_correct(
    p: &BigUint,
    plan: &KsPlan,
    u: &IntSignal,
    v: &IntSignal,
) -> Result<IntCorrelogram> {
    let (nu, nv) = (u.len(), v.len());
    let count = nu + nv - 1;
    let slots = unpack_slots(p, plan.bits, count);

    let prefix = |s: &mut dyn Iterator<Item = i32>| {
        let mut acc = vec![0i64];
        let mut run = 0i64;
        for x in s {
            run += x as i64;
            acc.push(run);
        }
        acc
    };
    let pa = prefix(&mut u.samples().iter().rev().copied());
    let pb = prefix(&mut v.samples().iter().copied());

    let (bu, bv) = (plan.bias_u(), plan.bias_v());
    let limit = plan.value_bound();
    let first_lag = ccf_first_lag(u.start(), nu, v.start());
    let mut values = Vec::with_capacity(count);
    for (n, &c) in slots.iter().enumerate() {
        let lo = n.saturating_sub(nv - 1);
        let hi = n.min(nu - 1);
        let sum_a = pa[hi + 1] - pa[lo];
        let sum_b = pb[n - lo + 1] - pb[n - hi];
        let overlap = (hi - lo + 1) as i64;
        let value = c as i64 - bv * sum_a - bu * sum_b - bu * bv * overlap;
        if value.abs() > limit {
            return Err(Error::InternalOverflow {
                lag: first_lag + n as i64,
                value,
                bound: limit,
            });
        }
        values.push(value);
    }
    Ok(IntCorrelogram::new(first_lag, values).with_norms(u.l2_norm(), v.l2_norm()))
}

/// Direct evaluation of `(u ⋆ v)[n] = sum_m u[m] v[m + n]` over the full
/// overlap range.
pub fn xcorr_int_bf(u: &IntSignal, v: &IntSignal) -> IntCorrelogram {
    let (a, b) = (u.samples(), v.samples());
    let (nu, nv) = (a.len() as i64, b.len() as i64);
    let values = (0..nu + nv - 1)
        .map(|t| {
            // Buffer offset: u index i pairs with v index i + r.
            let r = t - (nu - 1);
            let i0 = (-r).max(0);
            let i1 = nu.min(nv - r);
            let a = &a[i0 as usize..i1 as usize];
            let b = &b[(i0 + r) as usize..(i1 + r) as usize];
            a.iter()
                .zip(b)
                .map(|(&x, &y)| x as i64 * y as i64)
                .sum::<i64>()
        })
        .collect();
    IntCorrelogram::new(ccf_first_lag(u.start(), u.len(), v.start()), values)
        .with_norms(u.l2_norm(), v.l2_norm())
}

/// Kronecker-substitution cross-correlation with the default multiplier.
pub fn xcorr_int_ks(u: &IntSignal, v: &IntSignal) -> Result<IntCorrelogram> {
    xcorr_int_ks_with(u, v, MulBackend::default())
}

pub fn xcorr_int_ks_with(
    u: &IntSignal,
    v: &IntSignal,
    backend: MulBackend,
) -> Result<IntCorrelogram> {
    let plan = plan_ks(u, v)?;
    let pu = pack(&u.reverse(), plan.bias_u(), &plan);
    let pv = pack(v, plan.bias_v(), &plan);
    let product = backend.mul(&pu, &pv);
    unpack_and_correct(&product, &plan, u, v)
}
