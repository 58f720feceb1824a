//! Schemes that use passive feedback: Alice overhears what Bob received
//! after every round.

use thiserror::Error;

use crate::channel::{AdversaryVector, ChannelError, JamModel};
use crate::codes::CodeError;
use crate::hashing::HashError;

pub mod reliability;
pub mod secrecy;

pub use reliability::{
    fb_classify, fb_decode, fb_partition, fb_round1_encode, fb_round2_encode, FbDecoded, FbEncoder, FbParams,
};
pub use secrecy::{fbsec_decode, fbsec_run, FbsecOutcome, LogCodec, ProtocolState, SecParams, Stage};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FbError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("z = {z} is in the strong regime for {model} jamming with feedback over {links} links")]
    StrongRegime {
        z: AdversaryVector,
        model: JamModel,
        links: usize,
    },
    #[error("malformed transmission: {0}")]
    Layout(String),
    #[error("only {found} links verified, {needed} needed")]
    TooFewTrue { found: usize, needed: usize },
    #[error("decoder declared an error: {0}")]
    Declared(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

impl FbError {
    /// Did Bob detect a problem, rather than the run failing for another
    /// reason?
    pub fn is_declared(&self) -> bool {
        matches!(
            self,
            Self::TooFewTrue { .. } | Self::Declared(_) | Self::Code(CodeError::Inconsistent)
        )
    }
}

/// Strong regime with feedback: additive when `z_r = C` and `2 z_w >= C`,
/// overwrite when `z_ro + z_wo + z_rw = C`.
pub fn is_strong(links: usize, z: &AdversaryVector, model: JamModel) -> bool {
    match model {
        JamModel::Additive => z.z_r() == links && 2 * z.z_w() >= links,
        JamModel::Overwrite => z.total() == links,
    }
}
