//! Systematic codes with Bernoulli generator matrices (BGM) and their
//! parity-check counterparts (BPC).
//!
//! The crate covers the whole pipeline: sampling codes and their weight
//! enumerators, BIOS channels and their exponents, belief propagation and
//! exhaustive decoders, the lower bounds on ML error rates, Tanner graphs with
//! a prescribed degree assortativity, population dynamics, serial
//! concatenation with extended Hamming outer codes, and Monte Carlo campaigns.
//!
//! Numeric code is generic over [`scalar::Real`] (`f32` or `f64`). The aliases
//! below fix the scalar for the common cases.

pub mod bounds;
pub mod channel;
pub mod concat;
pub mod decode;
pub mod ensemble;
pub mod gf2;
pub mod graph;
pub mod popdyn;
pub mod rng;
pub mod scalar;
pub mod sim;
pub mod special;

pub use ensemble::SystematicCode;
pub use gf2::{BitMatrix, BitVec};
pub use scalar::Real;

pub type Channel = channel::BiosChannel<f64>;
pub type ChannelF32 = channel::BiosChannel<f32>;
pub type LlrVector = channel::LlrVector<f64>;
pub type LlrVectorF32 = channel::LlrVector<f32>;
pub type BpDecoder = decode::BpDecoder<f64>;
pub type BpDecoderF32 = decode::BpDecoder<f32>;
pub type DecodeOutcome = decode::DecodeOutcome<f64>;
pub type DegreeStats = graph::DegreeStats<f64>;
