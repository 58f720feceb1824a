use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::capacity::{Causality, Feedback, Scenario};
use crate::channel::AdversaryVector;
use crate::field::Field;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeId {
    Pairwise,
    PairwiseSecret,
    Feedback,
    Fbsec,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [Self::Pairwise, Self::PairwiseSecret, Self::Feedback, Self::Fbsec];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Pairwise => "pairwise",
            Self::PairwiseSecret => "pairwise-secret",
            Self::Feedback => "feedback",
            Self::Fbsec => "fbsec",
        }
    }

    pub fn uses_feedback(&self) -> bool {
        matches!(self, Self::Feedback | Self::Fbsec)
    }

    pub fn is_secret(&self) -> bool {
        matches!(self, Self::PairwiseSecret | Self::Fbsec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryId {
    None,
    RandomNoise,
    Symmetrize,
    HashForge,
    FeedbackSymmetrize,
    Scheduled,
}

impl AdversaryId {
    pub const ALL: [AdversaryId; 6] = [
        Self::None,
        Self::RandomNoise,
        Self::Symmetrize,
        Self::HashForge,
        Self::FeedbackSymmetrize,
        Self::Scheduled,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::RandomNoise => "random-noise",
            Self::Symmetrize => "symmetrize",
            Self::HashForge => "hash-forge",
            Self::FeedbackSymmetrize => "feedback-symmetrize",
            Self::Scheduled => "scheduled",
        }
    }

    /// Attacks that target the strong regime, where the scheme runs without
    /// its regime check.
    pub fn is_converse(&self) -> bool {
        matches!(self, Self::Symmetrize | Self::FeedbackSymmetrize)
    }

    pub fn supports(&self, scheme: SchemeId) -> bool {
        use SchemeId::*;
        match self {
            Self::None | Self::RandomNoise => true,
            Self::Symmetrize | Self::HashForge => matches!(scheme, Pairwise | PairwiseSecret),
            Self::FeedbackSymmetrize => scheme == Feedback,
            Self::Scheduled => matches!(scheme, Feedback | Fbsec),
        }
    }
}

macro_rules! id_parsing {
    ($t:ty, $what:literal) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $t {
            type Err = HarnessError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::ALL
                    .into_iter()
                    .find(|x| x.name() == s)
                    .ok_or_else(|| HarnessError::Config(format!(concat!("unknown ", $what, " {:?}"), s)))
            }
        }
    };
}

id_parsing!(SchemeId, "scheme");
id_parsing!(AdversaryId, "adversary");

/// One simulation run. `blocklength` is the hash dimension `N` for the
/// pairwise schemes, the round-one length `n` for the feedback scheme and
/// the number of rounds `N` for the four-stage scheme.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub scenario: String,
    pub links: usize,
    pub z: AdversaryVector,
    pub scheme: SchemeId,
    pub adversary: AdversaryId,
    pub field_bits: u32,
    pub blocklength: usize,
    pub trials: u64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let c: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("bad config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn scenario(&self) -> Result<Scenario, HarnessError> {
        self.scenario.parse().map_err(|e| HarnessError::Config(format!("{e}")))
    }

    pub fn field(&self) -> Result<Field, HarnessError> {
        Field::new(self.field_bits).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} is not {SCHEMA_VERSION}", self.schema_version));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.links == 0 {
            return bad("at least one link is needed".into());
        }
        if self.blocklength == 0 {
            return bad("blocklength must be positive".into());
        }
        self.z.check(self.links).map_err(|e| HarnessError::Config(e.to_string()))?;
        self.field()?;
        let s = self.scenario()?;
        if s.causality != Causality::Causal {
            return bad("only causal scenarios can be simulated".into());
        }
        if (s.feedback == Feedback::Passive) != self.scheme.uses_feedback() {
            return bad(format!("scheme {} does not fit scenario {}", self.scheme, s));
        }
        if s.secrecy != self.scheme.is_secret() {
            return bad(format!("scheme {} does not fit the secrecy flag of {}", self.scheme, s));
        }
        if !self.adversary.supports(self.scheme) {
            return bad(format!("adversary {} cannot attack scheme {}", self.adversary, self.scheme));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            scenario: "causal-nofb-additive-reliable".into(),
            links: 7,
            z: AdversaryVector::new(1, 2, 1),
            scheme: SchemeId::Pairwise,
            adversary: AdversaryId::RandomNoise,
            field_bits: 16,
            blocklength: 2,
            trials: 10,
            seed: 1,
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let c = cfg();
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"scheme\":\"pairwise\""));
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
        assert!(ExperimentConfig { trials: 0, ..cfg() }.validate().is_err());
        assert!(ExperimentConfig { scheme: SchemeId::Fbsec, ..cfg() }.validate().is_err());
        assert!(ExperimentConfig { adversary: AdversaryId::Scheduled, ..cfg() }.validate().is_err());
        assert!(ExperimentConfig { scenario: "noncausal-nofb-additive-reliable".into(), ..cfg() }.validate().is_err());
        assert!(ExperimentConfig { field_bits: 65, ..cfg() }.validate().is_err());
        assert!(ExperimentConfig::from_json("{\"schema_version\":1}").is_err());
        assert_eq!("hash-forge".parse::<AdversaryId>().unwrap(), AdversaryId::HashForge);
    }
}
