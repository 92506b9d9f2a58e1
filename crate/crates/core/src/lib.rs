//! Relay-aided interference alignment for single-antenna X and interference
//! channels whose transmitters have no channel state information.
//!
//! Half-duplex relays with global CSI listen for a few slots and then
//! forward linear combinations of what they heard, steering interference
//! into a low-dimensional subspace at each receiver. The crate builds the
//! relay precoders for three schemes, assembles the per-receiver effective
//! channels, certifies alignment through rank tests, and estimates degrees
//! of freedom from the high-SNR slope of zero-forcing sum rates.
//!
//! ```
//! use relay_ia::prelude::*;
//!
//! let topo = NetworkTopology::x_channel(3, 3, 1, 2).unwrap();
//! let real = generate_realization(topo, 7, true);
//! let pre = solve_x_precoders(&real, &XOptions::default()).unwrap();
//! let eff = effective_channel_x(&real, &pre, 1.0, &XOptions::default()).unwrap();
//! assert!(verify_alignment(&eff, 2).pass());
//! ```

pub mod channel;
pub mod effective;
pub mod error;
pub mod evaluation;
pub mod ic_alignment;
pub mod linalg;
pub mod partial_ia;
pub mod x_alignment;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::channel::{
        condition_guard, derive_seed, generate_realization, ChannelKind, ChannelRealization, NetworkTopology,
        MAX_RESAMPLES,
    };
    pub use crate::effective::{EffectiveChannel, ReceiverChannel, StreamLabel};
    pub use crate::error::{Error, Result};
    pub use crate::evaluation::{
        dof_reference, estimate_dof, expected_interference_dim, run_trial, sum_rate, verify_alignment, verify_alignment_with, zf_rates,
        AlignmentReport, DofEstimate, DofReference, Scheme, SchemeOptions, SweepSettings,
    };
    pub use crate::ic_alignment::{
        effective_channel_ic, required_relays_ic, solve_ic_precoders, IcOptions, IcPrecoding,
    };
    pub use crate::linalg::{least_norm_solve, null_space_basis, rank_eps, ComplexMatrix, ComplexVector};
    pub use crate::partial_ia::{effective_channel_partial, solve_partial_precoders, PartialIaOptions};
    pub use crate::x_alignment::{effective_channel_x, required_relays_x, solve_x_precoders, XOptions};
}
