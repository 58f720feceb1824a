pub mod capacity;
pub mod channel;
pub mod codes;
pub mod field;
pub mod harness;
pub mod hashing;
pub mod rng;
pub mod scheme_fb;
pub mod scheme_noffb;
