//! Real-valued cross-correlation baselines.
//!
//! `xcorr_real_bf` is the direct O(N_x N_y) sum. `xcorr_real_fft` zero-pads to
//! a power of two and goes through a complex radix-2 transform; it is a plain
//! complex FFT, not a split-real one. The `_f32` variants exist only so the
//! benchmark can time single-precision kernels.

use std::f64::consts::PI;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::signal::{ccf_first_lag, RealCorrelogram, Signal};

fn bit_reverse_permute<T>(data: &mut [T]) {
    let n = data.len();
    let bits = n.trailing_zeros();
    if bits == 0 {
        return;
    }
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            data.swap(i, j);
        }
    }
}

/// In-place iterative radix-2 DIT transform.
///
/// The forward transform is unnormalized; the inverse divides by `N`.
pub fn fft_in_place(data: &mut [Complex<f64>], inverse: bool) -> Result<()> {
    let n = data.len();
    if !n.is_power_of_two() {
        return Err(Error::BadLength(n));
    }
    bit_reverse_permute(data);
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // Twiddles come straight from from_polar; a running product drifts.
        let twiddles: Vec<Complex<f64>> = (0..half)
            .map(|k| Complex::from_polar(1.0, sign * 2.0 * PI * k as f64 / len as f64))
            .collect();
        for chunk in data.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let t = *b * w;
                *b = *a - t;
                *a += t;
            }
        }
        len <<= 1;
    }
    if inverse {
        let scale = 1.0 / n as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
    }
    Ok(())
}

pub fn fft(c: &[Complex<f64>], inverse: bool) -> Result<Vec<Complex<f64>>> {
    let mut out = c.to_vec();
    fft_in_place(&mut out, inverse)?;
    Ok(out)
}

/// Single-precision twin of [`fft_in_place`], used for timing only.
pub fn fft_in_place_f32(data: &mut [Complex<f32>], inverse: bool) -> Result<()> {
    let n = data.len();
    if !n.is_power_of_two() {
        return Err(Error::BadLength(n));
    }
    bit_reverse_permute(data);
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let twiddles: Vec<Complex<f32>> = (0..half)
            .map(|k| {
                let w = Complex::from_polar(1.0, sign * 2.0 * PI * k as f64 / len as f64);
                Complex::new(w.re as f32, w.im as f32)
            })
            .collect();
        for chunk in data.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let t = *b * w;
                *b = *a - t;
                *a += t;
            }
        }
        len <<= 1;
    }
    if inverse {
        let scale = 1.0 / n as f32;
        for c in data.iter_mut() {
            *c *= scale;
        }
    }
    Ok(())
}

/// Sum of `x[m] y[m + lag]`, ascending in `m`.
pub fn xcorr_real_at(x: &Signal, y: &Signal, lag: i64) -> f64 {
    let lo = x.start().max(y.start() - lag);
    let hi = x.end().min(y.end() - lag);
    if lo > hi {
        return 0.0;
    }
    let xs = &x.samples()[(lo - x.start()) as usize..=(hi - x.start()) as usize];
    let ys = &y.samples()[(lo + lag - y.start()) as usize..=(hi + lag - y.start()) as usize];
    xs.iter().zip(ys).map(|(a, b)| a * b).sum()
}

/// Direct-sum cross-correlation over the full overlap range.
pub fn xcorr_real_bf(x: &Signal, y: &Signal) -> RealCorrelogram {
    let first_lag = ccf_first_lag(x.start(), x.len(), y.start());
    let count = x.len() + y.len() - 1;
    let values = (0..count as i64)
        .map(|t| xcorr_real_at(x, y, first_lag + t))
        .collect();
    RealCorrelogram::new(first_lag, values).with_norms(x.l2_norm(), y.l2_norm())
}

/// Single-precision direct sum over raw buffers, for timing only.
pub fn xcorr_bf_f32(x: &[f32], y: &[f32]) -> Vec<f32> {
    let (nx, ny) = (x.len() as i64, y.len() as i64);
    (0..nx + ny - 1)
        .map(|t| {
            let r = t - (nx - 1);
            let i0 = (-r).max(0);
            let i1 = nx.min(ny - r);
            let a = &x[i0 as usize..i1 as usize];
            let b = &y[(i0 + r) as usize..(i1 + r) as usize];
            a.iter().zip(b).map(|(p, q)| p * q).sum()
        })
        .collect()
}

/// FFT-based cross-correlation: `IFFT(conj(X) * Y)` with linear-lag remap.
pub fn xcorr_real_fft(x: &Signal, y: &Signal) -> RealCorrelogram {
    let (nx, ny) = (x.len(), y.len());
    let count = nx + ny - 1;
    let size = count.next_power_of_two();
    let padded = |s: &Signal| {
        let mut buf = vec![Complex::new(0.0, 0.0); size];
        for (b, &v) in buf.iter_mut().zip(s.samples()) {
            b.re = v;
        }
        buf
    };
    let mut fx = padded(x);
    let mut fy = padded(y);
    fft_in_place(&mut fx, false).expect("power-of-two length");
    fft_in_place(&mut fy, false).expect("power-of-two length");
    let mut prod: Vec<Complex<f64>> = fx.iter().zip(&fy).map(|(a, b)| a.conj() * b).collect();
    fft_in_place(&mut prod, true).expect("power-of-two length");

    // Output index t is buffer offset r = t - (nx - 1), stored circularly.
    let values = (0..count)
        .map(|t| {
            let r = t as i64 - (nx as i64 - 1);
            prod[r.rem_euclid(size as i64) as usize].re
        })
        .collect();
    RealCorrelogram::new(ccf_first_lag(x.start(), nx, y.start()), values)
        .with_norms(x.l2_norm(), y.l2_norm())
}

/// Single-precision FFT correlation over raw buffers, for timing only.
pub fn xcorr_fft_f32(x: &[f32], y: &[f32]) -> Vec<f32> {
    let (nx, ny) = (x.len(), y.len());
    let count = nx + ny - 1;
    let size = count.next_power_of_two();
    let padded = |s: &[f32]| {
        let mut buf = vec![Complex::new(0.0f32, 0.0); size];
        for (b, &v) in buf.iter_mut().zip(s) {
            b.re = v;
        }
        buf
    };
    let mut fx = padded(x);
    let mut fy = padded(y);
    fft_in_place_f32(&mut fx, false).expect("power-of-two length");
    fft_in_place_f32(&mut fy, false).expect("power-of-two length");
    let mut prod: Vec<Complex<f32>> = fx.iter().zip(&fy).map(|(a, b)| a.conj() * b).collect();
    fft_in_place_f32(&mut prod, true).expect("power-of-two length");
    (0..count)
        .map(|t| {
            let r = t as i64 - (nx as i64 - 1);
            prod[r.rem_euclid(size as i64) as usize].re
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sig(start: i64, s: &[f64]) -> Signal {
        Signal::new(start, s.to_vec()).unwrap()
    }

    fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex<f64>> {
        (0..n)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    /// O(N^2) DFT straight from the definition.
    fn dft(c: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let n = c.len();
        (0..n)
            .map(|k| {
                c.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        v * Complex::from_polar(1.0, -2.0 * PI * (j * k % n) as f64 / n as f64)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn delta_transforms_to_constant() {
        let d = [1.0, 0.0, 0.0, 0.0].map(|r| Complex::new(r, 0.0));
        for v in fft(&d, false).unwrap() {
            assert_eq!(v, Complex::new(1.0, 0.0));
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        let mut c = vec![Complex::new(0.0, 0.0); 6];
        assert!(matches!(fft_in_place(&mut c, false), Err(Error::BadLength(6))));
    }

    #[test]
    fn matches_direct_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 2, 8, 64] {
            let c = random_complex(&mut rng, n);
            let fast = fft(&c, false).unwrap();
            for (a, b) in fast.iter().zip(dft(&c)) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = random_complex(&mut rng, 1024);
        let f = fft(&c, false).unwrap();
        let back = fft(&f, true).unwrap();
        let norm: f64 = c.iter().map(|v| v.norm_sqr()).sum();
        let err: f64 = c.iter().zip(&back).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!((err / norm).sqrt() < 1e-12);

        let spectral: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() / 1024.0;
        assert!(((spectral - norm) / norm).abs() < 1e-10);
    }

    #[test]
    fn hand_cases() {
        let c = xcorr_real_bf(&sig(0, &[1.0, 2.0]), &sig(0, &[1.0, 2.0]));
        assert_eq!((c.first_lag, c.values.as_slice()), (-1, &[2.0, 5.0, 2.0][..]));

        let c = xcorr_real_fft(&sig(0, &[1.0, 2.0]), &sig(0, &[1.0, 2.0]));
        assert_eq!(c.first_lag, -1);
        for (a, b) in c.values.iter().zip([2.0, 5.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }

        let z = xcorr_real_bf(&sig(0, &[0.0; 3]), &sig(0, &[1.0, -2.0]));
        assert!(z.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn delta_probe_peaks_at_offset() {
        let c = xcorr_real_fft(&sig(0, &[1.0]), &sig(7, &[1.0]));
        assert_eq!(c.first_lag, 7);
        assert!((c.get(7).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fft_matches_bf_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let x = Signal::new(
                rng.gen_range(-50..50),
                (0..1000).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let y = Signal::new(
                rng.gen_range(-50..50),
                (0..777).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let bf = xcorr_real_bf(&x, &y);
            let ff = xcorr_real_fft(&x, &y);
            assert_eq!(bf.first_lag, ff.first_lag);
            let tol = 1e-9 * x.l2_norm() * y.l2_norm();
            for (a, b) in bf.values.iter().zip(&ff.values) {
                assert!((a - b).abs() <= tol);
            }
        }
    }

    #[test]
    fn scaled_shift_peaks_at_lag() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let y = Signal::new(0, (0..300).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        for nu in [-40, 0, 13] {
            let x = y.shift(nu).scale(2.5);
            for c in [xcorr_real_bf(&x, &y), xcorr_real_fft(&x, &y)] {
                let (best, _) = c
                    .iter()
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                assert_eq!(best, nu);
                let n = c.normalized().unwrap();
                let peak = n.iter().cloned().fold(f64::MIN, f64::max);
                assert!((peak - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn f32_kernels_track_f64() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f32> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f32> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bf = xcorr_bf_f32(&x, &y);
        let ff = xcorr_fft_f32(&x, &y);
        let reference = xcorr_real_bf(
            &Signal::from_samples(x.iter().map(|&v| v as f64).collect()).unwrap(),
            &Signal::from_samples(y.iter().map(|&v| v as f64).collect()).unwrap(),
        );
        for ((a, b), r) in bf.iter().zip(&ff).zip(&reference.values) {
            assert!((*a as f64 - r).abs() < 1e-3);
            assert!((*b as f64 - r).abs() < 1e-3);
        }
    }
}
