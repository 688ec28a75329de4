//! Quantum signal processing phase factors through nonlinear Fourier analysis.
//!
//! A real signal `f` on `[0, 1]` with `sup |f| < 2^(-1/2)` is mapped to phases
//! `psi_0, psi_1, ...` such that `Im u_d(Psi, x) -> f(x)`. The route goes
//! through the SU(2) nonlinear Fourier series: `b = i f(cos theta)` on
//! `z = e^{2i theta}`, outer completion to `(a, b)`, a Riemann-Hilbert split
//! and layer stripping of the plus factor.

pub mod error;
pub mod formats;
pub mod inverse;
pub mod nlfs;
pub mod pipeline;
pub mod qsp;
pub mod spectral;

pub use error::{Error, Result};
pub use nlfs::{CoeffSequence, SU2Pair};
pub use pipeline::{synthesize, SignalSamples, SynthesisReport};
pub use qsp::{qsp_response, qsp_unitary, PhaseSequence};
pub use spectral::{CircleFunction, CircleGrid};

/// `2^(-1/2)`, the sup-norm ceiling for admissible signals.
pub const INV_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `3^(3/2) / 2`, the constant linking the margin to the contraction rate.
pub const ETA: f64 = 2.598_076_211_353_316;
