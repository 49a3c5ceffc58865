//! Time-difference estimation from the cross-correlation of monotone-quantized
//! signals, computed exactly in integer arithmetic.
//!
//! Quantizing both inputs with non-decreasing maps that fix zero does not move
//! the peak of the cross-correlation of a scaled, shifted pair. The crate uses
//! that to replace the floating-point correlation with an integer one, computed
//! either directly or through a single big-integer product (Kronecker
//! substitution).
//!
//! ```
//! use qxcorr::{estimate, Quantizer, Signal};
//!
//! let y = Signal::from_samples(vec![0.3, -1.2, 0.8, 0.1, -0.4, 0.9]).unwrap();
//! let x = y.shift(2).scale(3.0); // x[n] = 3 y[n + 2]
//! let r = estimate(&x, &y, &Quantizer::Sign, &Quantizer::Sign).unwrap();
//! assert!(r.lags.contains(&2));
//! ```

pub mod error;
pub mod estimator;
pub mod harness;
pub mod intxcorr;
pub mod quantize;
pub mod realxcorr;
pub mod signal;
pub mod signalgen;

pub use error::{Error, Result};
pub use estimator::{
    argmax_set, estimate, estimate_real, estimate_with, EstimateOptions, EstimationResult,
    IntMethod, Method, RealMethod,
};
pub use intxcorr::{xcorr_int_bf, xcorr_int_ks, xcorr_int_ks_with, MulBackend};
pub use quantize::Quantizer;
pub use realxcorr::{xcorr_real_bf, xcorr_real_fft};
pub use signal::{Correlogram, IntCorrelogram, IntSignal, RealCorrelogram, Signal};
