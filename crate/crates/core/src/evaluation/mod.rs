//! Alignment verification, zero-forcing rates, DoF estimation by high-SNR
//! slope fitting, and closed-form reference values.

mod alignment;
mod rates;
mod reference;
mod sweep;
mod trial;

pub use alignment::{verify_alignment, verify_alignment_with, AlignmentReport, ReceiverAlignment, VERIFY_REL_THRESHOLD};
pub use rates::{sum_rate, zf_rates};
pub use reference::{dof_reference, harmonic_number, DofReference};
pub use sweep::{estimate_dof, fit_slope, DofEstimate, SweepSettings};
pub use trial::{expected_interference_dim, run_trial, Precoders, Scheme, SchemeOptions, Trial};
