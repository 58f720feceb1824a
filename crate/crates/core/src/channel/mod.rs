//! Causal multipath channel with a per-symbol referee.
//!
//! Each round Alice puts one row per link on the wire. The adversary is
//! consulted once per time slot `t`, after column `t` has been revealed on
//! the links it may read, and its writes are applied before Bob sees the
//! column. Everything the adversary looks at goes through [`View`], which
//! rejects reads outside its read set or ahead of the current slot.

use std::cell::Cell;
use std::collections::BTreeSet;

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::field::{Field, Symbol};

pub mod strategies;

pub use strategies::{
    FeedbackSymmetrize, HashForge, Passive, RandomNoise, RoundEncoder, ScheduledCorruption, Symmetrize,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChannelError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("read outside the adversary's view: round {round}, link {link}, time {time} ({reason})")]
    ViewViolation {
        round: usize,
        link: usize,
        time: usize,
        reason: &'static str,
    },
    #[error("write to link {link} outside the adversary's write set")]
    WriteViolation { link: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("strategy failed: {0}")]
    Strategy(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JamModel {
    Additive,
    Overwrite,
}

impl std::str::FromStr for JamModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "additive" => Ok(Self::Additive),
            "overwrite" => Ok(Self::Overwrite),
            other => Err(format!("unknown jamming model `{other}`")),
        }
    }
}

impl std::fmt::Display for JamModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Additive => "additive",
            Self::Overwrite => "overwrite",
        })
    }
}

/// Sizes of the read-write, read-only and write-only link sets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdversaryVector {
    pub rw: usize,
    pub ro: usize,
    pub wo: usize,
}

impl AdversaryVector {
    pub const fn new(rw: usize, ro: usize, wo: usize) -> Self {
        Self { rw, ro, wo }
    }

    pub fn z_r(&self) -> usize {
        self.rw + self.ro
    }

    pub fn z_w(&self) -> usize {
        self.rw + self.wo
    }

    pub fn total(&self) -> usize {
        self.rw + self.ro + self.wo
    }

    pub fn check(&self, links: usize) -> Result<(), ChannelError> {
        if self.total() > links {
            return Err(ChannelError::Params(format!(
                "z = ({}, {}, {}) needs {} links but only {links} exist",
                self.rw,
                self.ro,
                self.wo,
                self.total()
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for AdversaryVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.rw, self.ro, self.wo)
    }
}

impl std::str::FromStr for AdversaryVector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.trim_matches(|c| c == '(' || c == ')').split(',').collect();
        if parts.len() != 3 {
            return Err(format!("expected z_rw,z_ro,z_wo, got `{s}`"));
        }
        let p = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
        Ok(Self::new(p(parts[0])?, p(parts[1])?, p(parts[2])?))
    }
}

/// Concrete link sets. Links are numbered from zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkAssignment {
    pub rw: BTreeSet<usize>,
    pub ro: BTreeSet<usize>,
    pub wo: BTreeSet<usize>,
}

impl LinkAssignment {
    pub fn can_read(&self, link: usize) -> bool {
        self.rw.contains(&link) || self.ro.contains(&link)
    }

    pub fn can_write(&self, link: usize) -> bool {
        self.rw.contains(&link) || self.wo.contains(&link)
    }

    pub fn readable(&self) -> BTreeSet<usize> {
        self.rw.union(&self.ro).copied().collect()
    }

    pub fn writable(&self) -> BTreeSet<usize> {
        self.rw.union(&self.wo).copied().collect()
    }

    pub fn sizes(&self) -> AdversaryVector {
        AdversaryVector::new(self.rw.len(), self.ro.len(), self.wo.len())
    }

    /// Sets are disjoint, inside `0..links`, and no larger than `z` allows.
    pub fn check(&self, links: usize, z: &AdversaryVector) -> Result<(), ChannelError> {
        let all: Vec<usize> = self.rw.iter().chain(&self.ro).chain(&self.wo).copied().collect();
        let distinct: BTreeSet<usize> = all.iter().copied().collect();
        if distinct.len() != all.len() {
            return Err(ChannelError::Params("link sets overlap".into()));
        }
        if let Some(&l) = distinct.iter().find(|&&l| l >= links) {
            return Err(ChannelError::Params(format!("link {l} out of range")));
        }
        let s = self.sizes();
        if s.rw > z.rw || s.ro > z.ro || s.wo > z.wo {
            return Err(ChannelError::Params(format!("assignment {s} exceeds z = {z}")));
        }
        Ok(())
    }
}

/// How the adversary places its links.
#[derive(Clone, Debug, PartialEq)]
pub enum AssignPolicy {
    /// Uniformly random disjoint sets of the full sizes.
    Uniform,
    /// Write sets on the highest-capacity links, then read-only ones; ties
    /// go to the lower index.
    Greedy(Vec<Rational64>),
}

pub fn assign_links<R: Rng + ?Sized>(
    links: usize,
    z: &AdversaryVector,
    policy: &AssignPolicy,
    rng: &mut R,
) -> Result<LinkAssignment, ChannelError> {
    z.check(links)?;
    let order: Vec<usize> = match policy {
        AssignPolicy::Uniform => {
            let mut v: Vec<usize> = (0..links).collect();
            v.shuffle(rng);
            v
        }
        AssignPolicy::Greedy(caps) => {
            if caps.len() != links {
                return Err(ChannelError::Params(format!(
                    "{} capacities for {links} links",
                    caps.len()
                )));
            }
            let mut v: Vec<usize> = (0..links).collect();
            v.sort_by(|&a, &b| caps[b].cmp(&caps[a]).then(a.cmp(&b)));
            v
        }
    };
    let mut it = order.into_iter();
    let rw = it.by_ref().take(z.rw).collect();
    let wo = it.by_ref().take(z.wo).collect();
    let ro = it.by_ref().take(z.ro).collect();
    Ok(LinkAssignment { rw, ro, wo })
}

/// One round on the wire. `writes[l][t]` is the adversary's write, if any.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub sent: Vec<Vec<Symbol>>,
    pub received: Vec<Vec<Symbol>>,
    pub writes: Vec<Vec<Option<Symbol>>>,
}

impl RoundRecord {
    pub fn len(&self) -> usize {
        self.sent.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Links whose received row differs from the sent row.
    pub fn altered_links(&self) -> BTreeSet<usize> {
        (0..self.sent.len()).filter(|&l| self.sent[l] != self.received[l]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub links: usize,
    pub model: JamModel,
    pub assignment: LinkAssignment,
    pub adversary: String,
    pub adversary_seed: Option<u64>,
    pub rounds: Vec<RoundRecord>,
}

impl Transcript {
    /// Round-major debug dump with hex symbols.
    pub fn to_json(&self) -> Value {
        let hex_rows = |rows: &Vec<Vec<Symbol>>| -> Vec<Vec<String>> {
            rows.iter()
                .map(|r| r.iter().map(|s| format!("{s:x}")).collect())
                .collect()
        };
        let rounds: Vec<Value> = self
            .rounds
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let writes: Vec<Vec<Value>> = r
                    .writes
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|w| w.map_or(Value::Null, |s| Value::String(format!("{s:x}"))))
                            .collect()
                    })
                    .collect();
                json!({
                    "round": i,
                    "sent": hex_rows(&r.sent),
                    "received": hex_rows(&r.received),
                    "writes": writes,
                })
            })
            .collect();
        json!({
            "links": self.links,
            "model": self.model,
            "assignment": self.assignment,
            "adversary": self.adversary,
            "adversary_seed": self.adversary_seed,
            "rounds": rounds,
        })
    }
}

/// The adversary's window onto the channel at one time slot.
pub struct View<'a> {
    history: &'a [RoundRecord],
    sent: &'a [Vec<Symbol>],
    writes: &'a [Vec<Option<Symbol>>],
    round_len: usize,
    round: usize,
    time: usize,
    assignment: &'a LinkAssignment,
    model: JamModel,
    field: &'a Field,
    reads: &'a Cell<u64>,
}

impl<'a> View<'a> {
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn round_len(&self) -> usize {
        self.round_len
    }

    /// Length of an earlier, completed round.
    pub fn past_round_len(&self, round: usize) -> Option<usize> {
        self.history.get(round).map(RoundRecord::len)
    }

    pub fn links(&self) -> usize {
        self.sent.len()
    }

    pub fn assignment(&self) -> &LinkAssignment {
        self.assignment
    }

    pub fn model(&self) -> JamModel {
        self.model
    }

    pub fn field(&self) -> &Field {
        self.field
    }

    fn violation(&self, round: usize, link: usize, time: usize, reason: &'static str) -> ChannelError {
        ChannelError::ViewViolation {
            round,
            link,
            time,
            reason,
        }
    }

    /// Sent symbol `x[link][time]` of `round`. Allowed on readable links up
    /// to and including the current slot.
    pub fn read(&self, round: usize, link: usize, time: usize) -> Result<Symbol, ChannelError> {
        if link >= self.links() || !self.assignment.can_read(link) {
            return Err(self.violation(round, link, time, "link not readable"));
        }
        let value = if round < self.round {
            self.history[round].sent[link].get(time).copied()
        } else if round == self.round && time <= self.time {
            self.sent[link].get(time).copied()
        } else {
            None
        };
        self.reads.set(self.reads.get() + 1);
        value.ok_or_else(|| self.violation(round, link, time, "ahead of the current slot"))
    }

    /// The adversary's own earlier write, if it made one.
    pub fn own_write(&self, round: usize, link: usize, time: usize) -> Option<Symbol> {
        if round < self.round {
            self.history.get(round)?.writes.get(link)?.get(time).copied().flatten()
        } else if round == self.round && time < self.time {
            self.writes.get(link)?.get(time).copied().flatten()
        } else {
            None
        }
    }

    /// Received symbol `y[link][time]` for a slot strictly before the
    /// current one. Known when the link is readable, or when the adversary
    /// overwrote that slot.
    pub fn output(&self, round: usize, link: usize, time: usize) -> Result<Symbol, ChannelError> {
        if (round, time) >= (self.round, self.time) {
            return Err(self.violation(round, link, time, "output not yet produced"));
        }
        let w = self.own_write(round, link, time);
        if self.model == JamModel::Overwrite {
            if let Some(e) = w {
                return Ok(e);
            }
        }
        if !self.assignment.can_read(link) {
            return Err(self.violation(round, link, time, "output not observable"));
        }
        let x = self.read(round, link, time)?;
        Ok(match (self.model, w) {
            (JamModel::Additive, Some(e)) => self.field.add(x, e),
            _ => x,
        })
    }
}

/// An adversary. One instance lives for one trial and may keep state across
/// rounds.
pub trait Strategy {
    fn name(&self) -> &str;

    /// Writes for the current slot as `(link, value)` pairs.
    fn act(&mut self, view: &View<'_>) -> Result<Vec<(usize, Symbol)>, ChannelError>;

    /// Seed of the strategy's private randomness, for the transcript.
    fn seed(&self) -> Option<u64> {
        None
    }
}

pub struct Channel {
    field: Field,
    model: JamModel,
    transcript: Transcript,
    reads: Cell<u64>,
}

impl Channel {
    pub fn new(
        field: &Field,
        links: usize,
        model: JamModel,
        assignment: LinkAssignment,
    ) -> Result<Self, ChannelError> {
        assignment.check(links, &assignment.sizes())?;
        Ok(Self {
            field: field.clone(),
            model,
            transcript: Transcript {
                links,
                model,
                assignment,
                adversary: String::new(),
                adversary_seed: None,
                rounds: Vec::new(),
            },
            reads: Cell::new(0),
        })
    }

    pub fn links(&self) -> usize {
        self.transcript.links
    }

    pub fn model(&self) -> JamModel {
        self.model
    }

    pub fn assignment(&self) -> &LinkAssignment {
        &self.transcript.assignment
    }

    /// Send one round. Rows must all have the same length.
    pub fn transmit(
        &mut self,
        sent: &[Vec<Symbol>],
        adversary: &mut dyn Strategy,
    ) -> Result<&RoundRecord, ChannelError> {
        let links = self.links();
        if sent.len() != links {
            return Err(ChannelError::Shape(format!("{} rows for {links} links", sent.len())));
        }
        let len = sent[0].len();
        if sent.iter().any(|r| r.len() != len) {
            return Err(ChannelError::Shape("rows differ in length".into()));
        }
        if let Some(bad) = sent.iter().flatten().find(|&&s| !self.field.contains(s)) {
            return Err(ChannelError::Shape(format!("symbol {bad:#x} outside the field")));
        }
        if self.transcript.rounds.is_empty() {
            self.transcript.adversary = adversary.name().to_string();
            self.transcript.adversary_seed = adversary.seed();
        }
        let round = self.transcript.rounds.len();
        let mut revealed: Vec<Vec<Symbol>> = vec![Vec::with_capacity(len); links];
        let mut writes: Vec<Vec<Option<Symbol>>> = vec![Vec::with_capacity(len); links];
        let mut received: Vec<Vec<Symbol>> = vec![Vec::with_capacity(len); links];
        for t in 0..len {
            for l in 0..links {
                revealed[l].push(sent[l][t]);
            }
            let jam = {
                let view = View {
                    history: &self.transcript.rounds,
                    sent: &revealed,
                    writes: &writes,
                    round_len: len,
                    round,
                    time: t,
                    assignment: &self.transcript.assignment,
                    model: self.model,
                    field: &self.field,
                    reads: &self.reads,
                };
                adversary.act(&view)?
            };
            let mut col: Vec<Option<Symbol>> = vec![None; links];
            for (link, e) in jam {
                if link >= links || !self.transcript.assignment.can_write(link) {
                    return Err(ChannelError::WriteViolation { link });
                }
                if !self.field.contains(e) {
                    return Err(ChannelError::Strategy(format!("wrote {e:#x} outside the field")));
                }
                col[link] = Some(e);
            }
            for l in 0..links {
                let x = sent[l][t];
                let y = match (self.model, col[l]) {
                    (_, None) => x,
                    (JamModel::Additive, Some(e)) => self.field.add(x, e),
                    (JamModel::Overwrite, Some(e)) => e,
                };
                received[l].push(y);
                writes[l].push(col[l]);
            }
        }
        self.transcript.rounds.push(RoundRecord {
            sent: sent.to_vec(),
            received,
            writes,
        });
        Ok(self.transcript.rounds.last().expect("just pushed"))
    }

    /// Bob's received rows for rounds `0..k`, as Alice overhears them.
    pub fn feedback(&self, k: usize) -> Result<Vec<&[Vec<Symbol>]>, ChannelError> {
        if k > self.transcript.rounds.len() {
            return Err(ChannelError::Params(format!(
                "feedback through round {k} requested after {} rounds",
                self.transcript.rounds.len()
            )));
        }
        Ok(self.transcript.rounds[..k].iter().map(|r| r.received.as_slice()).collect())
    }

    pub fn round(&self, i: usize) -> Option<&RoundRecord> {
        self.transcript.rounds.get(i)
    }

    pub fn rounds(&self) -> usize {
        self.transcript.rounds.len()
    }

    /// Total adversary reads so far.
    pub fn reads(&self) -> u64 {
        self.reads.get()
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Scripted(Vec<Vec<(usize, Symbol)>>);

    impl Strategy for Scripted {
        fn name(&self) -> &str {
            "scripted"
        }
        fn act(&mut self, view: &View<'_>) -> Result<Vec<(usize, Symbol)>, ChannelError> {
            Ok(self.0.get(view.time()).cloned().unwrap_or_default())
        }
    }

    struct Peeker {
        link: usize,
        ahead: usize,
    }

    impl Strategy for Peeker {
        fn name(&self) -> &str {
            "peeker"
        }
        fn act(&mut self, view: &View<'_>) -> Result<Vec<(usize, Symbol)>, ChannelError> {
            view.read(view.round(), self.link, view.time() + self.ahead)?;
            Ok(vec![])
        }
    }

    fn setup(model: JamModel) -> (Field, Channel) {
        let f = Field::new(4).unwrap();
        let a = LinkAssignment {
            rw: [0].into(),
            ro: [1].into(),
            wo: [2].into(),
        };
        let ch = Channel::new(&f, 4, model, a).unwrap();
        (f, ch)
    }

    fn rows() -> Vec<Vec<Symbol>> {
        vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9], vec![10, 11, 12]]
    }

    #[test]
    fn passive_is_identity() {
        let (_, mut ch) = setup(JamModel::Additive);
        let r = ch.transmit(&rows(), &mut Passive).unwrap();
        assert_eq!(r.received, rows());
        assert!(ch.feedback(0).unwrap().is_empty());
        assert_eq!(ch.feedback(1).unwrap()[0], rows().as_slice());
        assert!(ch.feedback(2).is_err());
    }

    #[test]
    fn model_rules() {
        let (f, mut ch) = setup(JamModel::Additive);
        let mut s = Scripted(vec![vec![(2, 5)], vec![], vec![(0, 3)]]);
        let r = ch.transmit(&rows(), &mut s).unwrap().clone();
        assert_eq!(r.received[2][0], f.add(7, 5));
        assert_eq!(r.received[0][2], f.add(3, 3));
        assert_eq!(r.altered_links(), [0, 2].into());

        let (_, mut ch) = setup(JamModel::Overwrite);
        let mut s = Scripted(vec![vec![(2, 5)]]);
        let r = ch.transmit(&rows(), &mut s).unwrap();
        assert_eq!(r.received[2], vec![5, 8, 9]);

        let (_, mut ch) = setup(JamModel::Additive);
        let mut s = Scripted(vec![vec![(2, 0)]]);
        assert!(ch.transmit(&rows(), &mut s).unwrap().altered_links().is_empty());
    }

    #[test]
    fn confinement() {
        let (_, mut ch) = setup(JamModel::Additive);
        let mut s = Scripted(vec![vec![(1, 1)]]);
        assert_eq!(ch.transmit(&rows(), &mut s), Err(ChannelError::WriteViolation { link: 1 }));
        let (_, mut ch) = setup(JamModel::Additive);
        assert!(matches!(
            ch.transmit(&rows(), &mut Peeker { link: 2, ahead: 0 }),
            Err(ChannelError::ViewViolation { .. })
        ));
        let (_, mut ch) = setup(JamModel::Additive);
        assert!(matches!(
            ch.transmit(&rows(), &mut Peeker { link: 0, ahead: 1 }),
            Err(ChannelError::ViewViolation { .. })
        ));
        let (_, mut ch) = setup(JamModel::Additive);
        ch.transmit(&rows(), &mut Peeker { link: 1, ahead: 0 }).unwrap();
        assert_eq!(ch.reads(), 3);
    }

    #[test]
    fn outputs_follow_knowledge() {
        struct Probe(Vec<Result<Symbol, ChannelError>>);
        impl Strategy for Probe {
            fn name(&self) -> &str {
                "probe"
            }
            fn act(&mut self, view: &View<'_>) -> Result<Vec<(usize, Symbol)>, ChannelError> {
                if view.round() == 0 {
                    return Ok(vec![(2, 6)]);
                }
                if view.time() == 0 {
                    self.0.push(view.output(0, 2, 0));
                    self.0.push(view.output(0, 1, 0));
                    self.0.push(view.output(0, 3, 0));
                    self.0.push(view.output(1, 1, 0));
                }
                Ok(vec![])
            }
        }
        let (_, mut ch) = setup(JamModel::Overwrite);
        let mut p = Probe(vec![]);
        ch.transmit(&rows(), &mut p).unwrap();
        ch.transmit(&rows(), &mut p).unwrap();
        assert_eq!(p.0[0], Ok(6));
        assert_eq!(p.0[1], Ok(4));
        assert!(p.0[2].is_err());
        assert!(p.0[3].is_err());

        // Additive write-only: the adversary knows e but not x.
        let (_, mut ch) = setup(JamModel::Additive);
        let mut p = Probe(vec![]);
        ch.transmit(&rows(), &mut p).unwrap();
        ch.transmit(&rows(), &mut p).unwrap();
        assert!(p.0[0].is_err());
    }

    #[test]
    fn greedy_and_uniform_assignment() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let caps: Vec<Rational64> = [3, 1, 1].iter().map(|&c| Rational64::from_integer(c)).collect();
        let a = assign_links(3, &AdversaryVector::new(0, 0, 1), &AssignPolicy::Greedy(caps), &mut rng).unwrap();
        assert_eq!(a.wo, [0].into());
        let z = AdversaryVector::new(1, 2, 1);
        for _ in 0..50 {
            let a = assign_links(7, &z, &AssignPolicy::Uniform, &mut rng).unwrap();
            a.check(7, &z).unwrap();
            assert_eq!(a.sizes(), z);
        }
        assert!(assign_links(2, &z, &AssignPolicy::Uniform, &mut rng).is_err());
    }

    #[test]
    fn transcript_dump_is_hex() {
        let (_, mut ch) = setup(JamModel::Overwrite);
        ch.transmit(&rows(), &mut Scripted(vec![vec![(0, 15)]])).unwrap();
        let j = ch.transcript().to_json();
        assert_eq!(j["rounds"][0]["received"][0][0], "f");
        assert_eq!(j["rounds"][0]["writes"][0][0], "f");
        assert_eq!(j["rounds"][0]["writes"][1][0], Value::Null);
    }
}
