//! Link-level study of decode-and-forward relaying over Rayleigh fading.
//!
//! The library models a half-duplex single-relay channel in which a source
//! talks to a destination with the help of a relay. Two protocols are
//! covered: the non-orthogonal variant (`NODF`, source and relay both
//! transmit in the second phase) and the orthogonal variant (`ODF`, only the
//! relay transmits in the second phase). On top of the channel model it
//! provides:
//!
//! * near-ML destination decoding and exact ML relay decoding ([`decoder`]),
//! * analytic pairwise-error-probability bounds and union bounds ([`pep`]),
//! * per-node constellation labelling metrics and a greedy construction of
//!   good labellings, with an exhaustive oracle for small sets ([`metrics`],
//!   [`search`]),
//! * a reproducible Monte Carlo BER/SER harness with seeded parallel
//!   streams, SNR sweeps, slope and gap measurements ([`sim`]).
//!
//! All randomness flows from explicit seeds; sweeps are bit-reproducible for
//! any worker count.

pub mod channel;
pub mod constellation;
pub mod decoder;
mod error;
pub mod labeling;
pub mod metrics;
pub mod pep;
pub mod rng;
pub mod search;
pub mod sim;

pub use channel::{ChannelParams, FadeDraw, ReceivedPair};
pub use constellation::SignalSet;
pub use decoder::{DecoderInput, FMetricTable};
pub use error::Error;
pub use labeling::{Labeling, LabelingProfile, Message, Scheme};
pub use metrics::MetricContext;
pub use pep::BoundContext;
pub use search::{NeighborSets, TieRule};
pub use sim::{BerCurve, BerPoint, RelayMode, SimConfig};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
