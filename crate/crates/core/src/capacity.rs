//! Closed-form capacity and regime evaluation for every scenario.
//!
//! Rates are exact rationals. An unequal profile replaces `C` by the total
//! capacity and each link count `w` by the largest capacity of any `w`
//! links; only reliability rates are defined for unequal profiles.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{AdversaryVector, JamModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CapacityError {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("invalid capacity profile: {0}")]
    Profile(String),
    #[error("infeasible adversary {z} for {links} links")]
    Infeasible { z: AdversaryVector, links: usize },
    #[error("w = {w} out of range for {links} links")]
    WOutOfRange { w: usize, links: usize },
    #[error("secret rates are only defined for equal link capacities")]
    UnequalSecrecy,
    #[error("sweeps are limited to {max} links, got {links}")]
    TooManyLinks { links: usize, max: usize },
    #[error("csv output failed: {0}")]
    Csv(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Causality {
    NonCausal,
    Causal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feedback {
    None,
    Passive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub causality: Causality,
    pub feedback: Feedback,
    pub model: JamModel,
    pub secrecy: bool,
}

impl Scenario {
    pub fn new(causality: Causality, feedback: Feedback, model: JamModel, secrecy: bool) -> Result<Self, CapacityError> {
        let s = Self {
            causality,
            feedback,
            model,
            secrecy,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CapacityError> {
        if self.causality == Causality::NonCausal && self.feedback == Feedback::Passive {
            return Err(CapacityError::Scenario("non-causal adversary with feedback".into()));
        }
        Ok(())
    }

    /// The twelve table rows: non-causal, causal, causal with feedback; each
    /// additive then overwrite; reliability then secrecy.
    pub fn all() -> Vec<Scenario> {
        let mut out = Vec::with_capacity(12);
        for (causality, feedback) in [
            (Causality::NonCausal, Feedback::None),
            (Causality::Causal, Feedback::None),
            (Causality::Causal, Feedback::Passive),
        ] {
            for model in [JamModel::Additive, JamModel::Overwrite] {
                for secrecy in [false, true] {
                    out.push(Scenario {
                        causality,
                        feedback,
                        model,
                        secrecy,
                    });
                }
            }
        }
        out
    }

    pub fn with_secrecy(self, secrecy: bool) -> Self {
        Self { secrecy, ..self }
    }

    /// Short id such as `causal-nofb-additive-reliable`.
    pub fn id(&self) -> String {
        format!(
            "{}-{}-{}-{}",
            match self.causality {
                Causality::NonCausal => "noncausal",
                Causality::Causal => "causal",
            },
            match self.feedback {
                Feedback::None => "nofb",
                Feedback::Passive => "fb",
            },
            self.model,
            if self.secrecy { "secret" } else { "reliable" }
        )
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for Scenario {
    type Err = CapacityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::all()
            .into_iter()
            .find(|x| x.id() == s)
            .ok_or_else(|| CapacityError::Scenario(format!("unknown scenario id {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityProfile {
    Equal(usize),
    Unequal(Vec<Rational64>),
}

impl CapacityProfile {
    pub fn unequal(u: Vec<Rational64>) -> Result<Self, CapacityError> {
        if u.is_empty() {
            return Err(CapacityError::Profile("no links".into()));
        }
        if let Some(x) = u.iter().find(|x| **x <= Rational64::from_integer(0)) {
            return Err(CapacityError::Profile(format!("link capacity {x} is not positive")));
        }
        Ok(Self::Unequal(u))
    }

    pub fn links(&self) -> usize {
        match self {
            Self::Equal(c) => *c,
            Self::Unequal(u) => u.len(),
        }
    }

    /// Total capacity `Ĉ`.
    pub fn total(&self) -> Rational64 {
        match self {
            Self::Equal(c) => Rational64::from_integer(*c as i64),
            Self::Unequal(u) => u.iter().sum(),
        }
    }

    pub fn is_equal(&self) -> bool {
        matches!(self, Self::Equal(_))
    }

    pub fn label(&self) -> String {
        match self {
            Self::Equal(c) => c.to_string(),
            Self::Unequal(u) => u.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"),
        }
    }
}

impl FromStr for CapacityProfile {
    type Err = CapacityError;

    /// `7` for seven unit links, `3;1;1` or `3,1,1` for per-link capacities.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split([';', ',']).map(str::trim).collect();
        if parts.len() == 1 {
            return parts[0]
                .parse::<usize>()
                .map(Self::Equal)
                .map_err(|_| CapacityError::Profile(format!("bad link count {s:?}")));
        }
        let u = parts
            .iter()
            .map(|p| p.parse::<Rational64>().map_err(|_| CapacityError::Profile(format!("bad capacity {p:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::unequal(u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Weak,
    Strong,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Weak => "weak",
            Self::Strong => "strong",
        })
    }
}

/// Largest total capacity over any `w` links.
pub fn u_w_max(profile: &CapacityProfile, w: usize) -> Result<Rational64, CapacityError> {
    let links = profile.links();
    if w > links {
        return Err(CapacityError::WOutOfRange { w, links });
    }
    Ok(match profile {
        CapacityProfile::Equal(_) => Rational64::from_integer(w as i64),
        CapacityProfile::Unequal(u) => {
            let mut sorted = u.clone();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            sorted[..w].iter().sum()
        }
    })
}

pub fn regime(profile: &CapacityProfile, z: &AdversaryVector, scenario: &Scenario) -> Result<Regime, CapacityError> {
    scenario.validate()?;
    let c = profile.links();
    if z.check(c).is_err() {
        return Err(CapacityError::Infeasible { z: *z, links: c });
    }
    let (rw, ro, wo) = (z.rw, z.ro, z.wo);
    let weak = match (scenario.causality, scenario.feedback, scenario.model) {
        (Causality::NonCausal, _, JamModel::Additive) => ro + wo + 2 * rw < c,
        (Causality::NonCausal, _, JamModel::Overwrite) => ro + 2 * wo + 2 * rw < c,
        (Causality::Causal, Feedback::None, JamModel::Additive) => wo + 2 * rw < c,
        (Causality::Causal, Feedback::None, JamModel::Overwrite) => 2 * wo + 2 * rw < c,
        (Causality::Causal, Feedback::Passive, JamModel::Additive) => !(z.z_r() == c && 2 * z.z_w() >= c),
        (Causality::Causal, Feedback::Passive, JamModel::Overwrite) => z.total() < c,
    };
    Ok(if weak { Regime::Weak } else { Regime::Strong })
}

fn pos(x: Rational64) -> Rational64 {
    x.max(Rational64::from_integer(0))
}

pub fn rate(profile: &CapacityProfile, z: &AdversaryVector, scenario: &Scenario) -> Result<Rational64, CapacityError> {
    let reg = regime(profile, z, scenario)?;
    let zero = Rational64::from_integer(0);
    let c = profile.links();
    if scenario.secrecy {
        if !profile.is_equal() {
            return Err(CapacityError::UnequalSecrecy);
        }
        if reg == Regime::Strong {
            return Ok(zero);
        }
        let c = c as i64;
        let (rw, ro, wo) = (z.rw as i64, z.ro as i64, z.wo as i64);
        let r = match (scenario.feedback, scenario.model) {
            (Feedback::None, _) => c - ro - wo - 2 * rw,
            (Feedback::Passive, JamModel::Additive) => (c - z.z_r() as i64).min(c - z.z_w() as i64),
            (Feedback::Passive, JamModel::Overwrite) => c - ro - wo - rw,
        };
        return Ok(pos(Rational64::from_integer(r)));
    }
    let total = profile.total();
    let lose = |w: usize| u_w_max(profile, w.min(c));
    let (rw, wo) = (z.rw, z.wo);
    match reg {
        Regime::Weak => Ok(total - lose(z.z_w())?),
        Regime::Strong => match (scenario.causality, scenario.feedback, scenario.model) {
            (Causality::NonCausal, _, JamModel::Additive) => Ok(pos(total - lose(2 * rw + wo)?)),
            (Causality::NonCausal, _, JamModel::Overwrite) => Ok(pos(total - lose(2 * rw + 2 * wo)?)),
            (Causality::Causal, Feedback::Passive, JamModel::Overwrite) => Ok(pos(total - lose(2 * rw + 2 * wo)?)),
            _ => Ok(zero),
        },
    }
}

/// Every `z` with `z_rw + z_ro + z_wo <= C`, ordered by `z_rw`, `z_ro`, `z_wo`.
pub fn feasible_z(links: usize) -> Vec<AdversaryVector> {
    let mut out = Vec::new();
    for rw in 0..=links {
        for ro in 0..=links - rw {
            for wo in 0..=links - rw - ro {
                out.push(AdversaryVector::new(rw, ro, wo));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateRow {
    pub scenario: String,
    pub causality: Causality,
    pub model: JamModel,
    pub feedback: Feedback,
    pub secrecy: bool,
    #[serde(rename = "C_or_profile")]
    pub c_or_profile: String,
    pub z_rw: usize,
    pub z_ro: usize,
    pub z_wo: usize,
    pub regime: Regime,
    pub rate: String,
}

impl RateRow {
    pub fn z(&self) -> AdversaryVector {
        AdversaryVector::new(self.z_rw, self.z_ro, self.z_wo)
    }
}

pub const MAX_SWEEP_LINKS: usize = 32;

pub fn evaluate(profile: &CapacityProfile, z: &AdversaryVector, scenario: &Scenario) -> Result<RateRow, CapacityError> {
    Ok(RateRow {
        scenario: scenario.id(),
        causality: scenario.causality,
        model: scenario.model,
        feedback: scenario.feedback,
        secrecy: scenario.secrecy,
        c_or_profile: profile.label(),
        z_rw: z.rw,
        z_ro: z.ro,
        z_wo: z.wo,
        regime: regime(profile, z, scenario)?,
        rate: rate(profile, z, scenario)?.to_string(),
    })
}

pub fn sweep_region(profile: &CapacityProfile, scenario: &Scenario) -> Result<Vec<RateRow>, CapacityError> {
    let links = profile.links();
    if links > MAX_SWEEP_LINKS {
        return Err(CapacityError::TooManyLinks {
            links,
            max: MAX_SWEEP_LINKS,
        });
    }
    feasible_z(links).iter().map(|z| evaluate(profile, z, scenario)).collect()
}

/// All twelve scenarios for every `C` in `links`.
pub fn rate_grid(links: impl IntoIterator<Item = usize>) -> Result<Vec<RateRow>, CapacityError> {
    let mut rows = Vec::new();
    for c in links {
        for s in Scenario::all() {
            rows.extend(sweep_region(&CapacityProfile::Equal(c), &s)?);
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[RateRow], out: W) -> Result<(), CapacityError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| CapacityError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| CapacityError::Csv(e.to_string()))
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<RateRow>, CapacityError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<Vec<RateRow>, _>>()
        .map_err(|e| CapacityError::Csv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(id: &str) -> Scenario {
        id.parse().unwrap()
    }

    fn r(x: i64) -> Rational64 {
        Rational64::from_integer(x)
    }

    fn z(rw: usize, ro: usize, wo: usize) -> AdversaryVector {
        AdversaryVector::new(rw, ro, wo)
    }

    #[test]
    fn scenario_ids_round_trip() {
        let all = Scenario::all();
        assert_eq!(all.len(), 12);
        for sc in &all {
            assert_eq!(&sc.id().parse::<Scenario>().unwrap(), sc);
        }
        assert!(Scenario::new(Causality::NonCausal, Feedback::Passive, JamModel::Additive, false).is_err());
    }

    #[test]
    fn worked_examples() {
        let eq = |c| CapacityProfile::Equal(c);
        let add = s("causal-nofb-additive-reliable");
        assert_eq!(regime(&eq(7), &z(1, 2, 1), &add).unwrap(), Regime::Weak);
        assert_eq!(rate(&eq(7), &z(1, 2, 1), &add).unwrap(), r(5));
        assert_eq!(regime(&eq(3), &z(2, 0, 0), &add).unwrap(), Regime::Strong);
        assert_eq!(rate(&eq(3), &z(1, 0, 0), &add).unwrap(), r(2));
        assert_eq!(rate(&eq(2), &z(1, 0, 0), &s("causal-fb-additive-reliable")).unwrap(), r(1));
        assert_eq!(rate(&eq(2), &z(0, 1, 1), &s("causal-fb-additive-secret")).unwrap(), r(1));
        let nc = s("noncausal-nofb-overwrite-reliable");
        assert_eq!(regime(&eq(4), &z(2, 0, 0), &nc).unwrap(), Regime::Strong);
        assert_eq!(rate(&eq(4), &z(2, 0, 0), &nc).unwrap(), r(0));
        for sc in Scenario::all() {
            assert_eq!(regime(&eq(5), &z(0, 0, 0), &sc).unwrap(), Regime::Weak);
        }
    }

    #[test]
    fn u_w_max_examples() {
        let p = |u: &[i64]| CapacityProfile::unequal(u.iter().map(|&x| r(x)).collect()).unwrap();
        assert_eq!(u_w_max(&p(&[3, 1, 1]), 0).unwrap(), r(0));
        assert_eq!(u_w_max(&p(&[3, 1, 1]), 1).unwrap(), r(3));
        assert_eq!(u_w_max(&p(&[2, 2, 5, 1]), 2).unwrap(), r(7));
        assert!(u_w_max(&p(&[2, 2]), 3).is_err());
        assert!(CapacityProfile::unequal(vec![r(1), r(0)]).is_err());
        assert_eq!("3;1;1".parse::<CapacityProfile>().unwrap(), p(&[3, 1, 1]));
    }

    #[test]
    fn unequal_profile_rates() {
        let p: CapacityProfile = "3;1;1".parse().unwrap();
        let add = s("causal-nofb-additive-reliable");
        assert_eq!(rate(&p, &z(0, 0, 1), &add).unwrap(), r(2));
        assert_eq!(rate(&p, &z(0, 1, 0), &add).unwrap(), r(5));
        assert_eq!(rate(&p, &z(0, 1, 0), &add.with_secrecy(true)), Err(CapacityError::UnequalSecrecy));
    }

    #[test]
    fn sweep_at_one_link() {
        let rows = sweep_region(&CapacityProfile::Equal(1), &s("causal-nofb-additive-reliable")).unwrap();
        let got: Vec<(usize, usize, usize, String)> = rows.iter().map(|r| (r.z_rw, r.z_ro, r.z_wo, r.rate.clone())).collect();
        assert_eq!(
            got,
            vec![
                (0, 0, 0, "1".into()),
                (0, 0, 1, "0".into()),
                (0, 1, 0, "1".into()),
                (1, 0, 0, "0".into()),
            ]
        );
        for c in 0..=10 {
            assert_eq!(feasible_z(c).len(), (c + 1) * (c + 2) * (c + 3) / 6);
        }
        assert!(sweep_region(&CapacityProfile::Equal(33), &s("causal-nofb-additive-reliable")).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let rows = rate_grid(1..=2).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("scenario,causality,model,feedback,secrecy,C_or_profile,z_rw,z_ro,z_wo,regime,rate\n"));
        assert_eq!(read_csv(&buf[..]).unwrap(), rows);
    }
}
