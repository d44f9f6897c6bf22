//! Extremal discs, the Lempert function and the Kobayashi–Royden metric for
//! bounded strongly convex domains in `C^n` with polynomial defining functions.

pub mod disc;
pub mod domain;
pub mod factor;
pub mod metrics;
pub mod continuation;
pub mod stationary;

pub use num_complex::Complex64 as C64;
