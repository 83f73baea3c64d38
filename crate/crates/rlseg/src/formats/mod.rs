//! File formats: PBM bitmap exchange and the RLC compressed container.

pub mod pbm;
pub mod rlc;

pub use pbm::{read_pbm, write_pbm, write_pbm_ascii};
pub use rlc::{read_rlc, write_rlc};
