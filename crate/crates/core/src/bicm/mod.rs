//! Outer code chain of the iterative receiver: rate-1/2 convolutional
//! code, max-log BCJR soft decoder, S-random interleaver and the framing
//! of coded bits onto transmit symbol vectors.

pub mod bcjr;
pub mod conv;
pub mod framing;
pub mod interleave;

pub use bcjr::{maxlog_bcjr, BcjrOutput};
pub use conv::{conv_encode, CONSTRAINT_LENGTH, GENERATORS_OCTAL, TAIL_BITS};
pub use framing::Framing;
pub use interleave::{make_s_random, verify_spread, Interleaver};
