//! Multiplication of arbitrary-precision naturals behind a swappable backend.
//!
//! `Toom` is the default and delegates to `num-bigint`, which switches from
//! schoolbook to Karatsuba and Toom-3 as operands grow. `Karatsuba` is a
//! self-contained limb implementation kept as a second sub-quadratic route,
//! and `Schoolbook` is the quadratic reference used as the test oracle.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MulBackend {
    #[default]
    Toom,
    Karatsuba,
    Schoolbook,
}

impl MulBackend {
    pub fn is_subquadratic(self) -> bool {
        !matches!(self, MulBackend::Schoolbook)
    }

    pub fn mul(self, a: &BigUint, b: &BigUint) -> BigUint {
        match self {
            MulBackend::Toom => a * b,
            MulBackend::Karatsuba => {
                BigUint::new(karatsuba(&a.to_u32_digits(), &b.to_u32_digits()))
            }
            MulBackend::Schoolbook => {
                BigUint::new(schoolbook(&a.to_u32_digits(), &b.to_u32_digits()))
            }
        }
    }
}

impl fmt::Display for MulBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MulBackend::Toom => "toom",
            MulBackend::Karatsuba => "karatsuba",
            MulBackend::Schoolbook => "schoolbook",
        })
    }
}

impl FromStr for MulBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "toom" => Ok(MulBackend::Toom),
            "karatsuba" => Ok(MulBackend::Karatsuba),
            "schoolbook" => Ok(MulBackend::Schoolbook),
            other => Err(Error::Config(format!("unknown big-multiply backend {other:?}"))),
        }
    }
}

/// Exact product with the default backend.
pub fn big_mul(a: &BigUint, b: &BigUint) -> BigUint {
    MulBackend::default().mul(a, b)
}

const KARATSUBA_CUTOFF: usize = 32;

fn trimmed(x: &[u32]) -> &[u32] {
    let end = x.iter().rposition(|&d| d != 0).map_or(0, |i| i + 1);
    &x[..end]
}

/// Quadratic limb product, little-endian base 2^32.
pub fn schoolbook(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32; a.len() + b.len()];
    schoolbook_into(&mut out, a, b);
    out
}

/// `out += a * b`; `out` must hold at least `a.len() + b.len()` limbs.
fn schoolbook_into(out: &mut [u32], a: &[u32], b: &[u32]) {
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        let mut carry = 0u64;
        for (j, &bj) in b.iter().enumerate() {
            let t = ai as u64 * bj as u64 + out[i + j] as u64 + carry;
            out[i + j] = t as u32;
            carry = t >> 32;
        }
        let mut k = i + b.len();
        while carry != 0 {
            let t = out[k] as u64 + carry;
            out[k] = t as u32;
            carry = t >> 32;
            k += 1;
        }
    }
}

/// `out += x`, propagating the carry through the rest of `out`.
fn add_into(out: &mut [u32], x: &[u32]) {
    let mut carry = 0u64;
    for (o, &d) in out.iter_mut().zip(x) {
        let t = *o as u64 + d as u64 + carry;
        *o = t as u32;
        carry = t >> 32;
    }
    let mut k = x.len();
    while carry != 0 {
        let t = out[k] as u64 + carry;
        out[k] = t as u32;
        carry = t >> 32;
        k += 1;
    }
}

/// `out -= x`; requires `out >= x`.
fn sub_into(out: &mut [u32], x: &[u32]) {
    let mut borrow = 0i64;
    for (o, &d) in out.iter_mut().zip(x) {
        let t = *o as i64 - d as i64 - borrow;
        *o = t as u32;
        borrow = (t < 0) as i64;
    }
    let mut k = x.len();
    while borrow != 0 {
        let t = out[k] as i64 - borrow;
        out[k] = t as u32;
        borrow = (t < 0) as i64;
        k += 1;
    }
}

fn add(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = Vec::with_capacity(long.len() + 1);
    out.extend_from_slice(long);
    out.push(0);
    add_into(&mut out, short);
    out
}

/// Karatsuba limb product, little-endian base 2^32.
pub fn karatsuba(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32; a.len() + b.len()];
    karatsuba_into(&mut out, trimmed(a), trimmed(b));
    out
}

/// `out += a * b`.
fn karatsuba_into(out: &mut [u32], a: &[u32], b: &[u32]) {
    let (a, b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if b.is_empty() {
        return;
    }
    if b.len() < KARATSUBA_CUTOFF {
        schoolbook_into(out, a, b);
        return;
    }
    let half = a.len().div_ceil(2);
    if b.len() <= half {
        // Unbalanced: slice the long operand into chunks as long as the short one.
        for (i, chunk) in a.chunks(b.len()).enumerate() {
            karatsuba_into(&mut out[i * b.len()..], trimmed(chunk), b);
        }
        return;
    }

    let (a0, a1) = a.split_at(half);
    let (b0, b1) = b.split_at(half);
    let (a0, b0) = (trimmed(a0), trimmed(b0));

    let mut z0 = vec![0u32; a0.len() + b0.len()];
    karatsuba_into(&mut z0, a0, b0);
    let mut z2 = vec![0u32; a1.len() + b1.len()];
    karatsuba_into(&mut z2, a1, b1);

    let sa = add(a0, a1);
    let sb = add(b0, b1);
    let (sa, sb) = (trimmed(&sa), trimmed(&sb));
    let mut z1 = vec![0u32; sa.len() + sb.len() + 1];
    karatsuba_into(&mut z1, sa, sb);
    sub_into(&mut z1, trimmed(&z0));
    sub_into(&mut z1, trimmed(&z2));

    add_into(out, trimmed(&z0));
    add_into(&mut out[half..], trimmed(&z1));
    add_into(&mut out[2 * half..], trimmed(&z2));
}
