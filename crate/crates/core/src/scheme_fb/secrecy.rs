//! Four-stage secret and reliable transmission with passive feedback.
//!
//! Stage 1 sends one Cauchy-coded symbol per link per round, mixing `R`
//! message symbols with uniform keys. Once feedback shows a link was
//! corrupted, that link only carries fresh keys from then on (stage 2); in
//! the additive model what Bob received on it the round before is reused as
//! a shared key. Stage 3 broadcasts the corruption log and stage 4 lets Bob
//! tell which links delivered everything intact.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::{is_strong, FbError};
use crate::channel::{AdversaryVector, Channel, JamModel, Strategy};
use crate::codes::{augmented_system, build_cauchy, erasure_decode, solve_augmented, CodeError, ErasurePattern, Matrix};
use crate::field::{Field, Symbol};
use crate::hashing::{hash_dim_for, matrix_hash, verify_raw, HashKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Mixing,
    Avoiding,
    Log,
    Hash,
}

/// Alice's running view: the current stage and round, and every first
/// corruption of a link as `(round, link)` in the order seen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProtocolState {
    pub stage: Stage,
    pub round: usize,
    pub log: Vec<(usize, usize)>,
}

impl Default for ProtocolState {
    fn default() -> Self {
        Self {
            stage: Stage::Mixing,
            round: 0,
            log: Vec::new(),
        }
    }
}

impl ProtocolState {
    /// Corrupted links in log order.
    pub fn corrupted(&self) -> Vec<usize> {
        self.log.iter().map(|&(_, l)| l).collect()
    }

    /// Record a round's newly corrupted links, lowest index first.
    pub fn record(&mut self, round: usize, altered: &BTreeSet<usize>) {
        let known: BTreeSet<usize> = self.corrupted().into_iter().collect();
        for &l in altered.difference(&known) {
            self.log.push((round, l));
        }
        if !self.log.is_empty() {
            self.stage = Stage::Avoiding;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SecParams {
    field: Field,
    links: usize,
    z: AdversaryVector,
    model: JamModel,
    rounds: usize,
    rate: usize,
    base_keys: usize,
    generator: Matrix,
}

impl SecParams {
    /// Additive: `R = C - max(z_r, z_w)` with a `C x C` generator. Overwrite:
    /// `R = C - z_r - z_wo` with a `C x (C - z_wo)` generator. Requires
    /// `2^b >= 2C` and a positive rate.
    pub fn new(field: &Field, links: usize, z: AdversaryVector, model: JamModel, rounds: usize) -> Result<Self, FbError> {
        z.check(links)?;
        if is_strong(links, &z, model) {
            return Err(FbError::StrongRegime { z, model, links });
        }
        if rounds == 0 {
            return Err(FbError::Params("at least one round is needed".into()));
        }
        if field.order() < 2 * links as u128 {
            return Err(FbError::Params(format!(
                "GF(2^{}) is too small for {links} links; need at least {} elements",
                field.bits(),
                2 * links
            )));
        }
        let (rate, base_keys, cols) = match model {
            JamModel::Additive => {
                let keys = z.z_r().max(z.z_w());
                (links.saturating_sub(keys), keys, links)
            }
            JamModel::Overwrite => (links.saturating_sub(z.z_r() + z.wo), z.z_r(), links - z.wo),
        };
        if rate == 0 {
            return Err(FbError::Params(format!("secret rate is zero for z = {z}")));
        }
        let generator = build_cauchy(field, links, cols, 0)?.matrix;
        Ok(Self {
            field: field.clone(),
            links,
            z,
            model,
            rounds,
            rate,
            base_keys,
            generator,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn links(&self) -> usize {
        self.links
    }

    pub fn z(&self) -> AdversaryVector {
        self.z
    }

    pub fn model(&self) -> JamModel {
        self.model
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Message symbols per round.
    pub fn rate(&self) -> usize {
        self.rate
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    /// Explicit keys mixed in once `j` links are known to be corrupted.
    pub fn explicit_keys(&self, j: usize) -> usize {
        match self.model {
            JamModel::Additive => self.base_keys.saturating_sub(j),
            JamModel::Overwrite => self.base_keys.saturating_sub(j.saturating_sub(self.z.wo)),
        }
    }

    /// Keys taken from last round's output on corrupted links.
    pub fn extracted_keys(&self, j: usize) -> usize {
        match self.model {
            JamModel::Additive => j,
            JamModel::Overwrite => 0,
        }
    }

    /// Generator columns in use with `j` corrupted links.
    pub fn columns(&self, j: usize) -> usize {
        self.rate + self.explicit_keys(j) + self.extracted_keys(j)
    }

    pub fn log_codec(&self) -> LogCodec {
        LogCodec::new(&self.field, self.rounds, self.links, self.z.z_w())
    }

    /// Hash dimension for the stage-4 digests of `N + L3` received symbols.
    pub fn hash_dim(&self) -> usize {
        hash_dim_for(self.rounds + self.log_codec().len())
    }

    /// Symbols per link over all four stages.
    pub fn total_len(&self) -> usize {
        self.rounds + self.log_codec().len() + 2 * self.links * self.hash_dim()
    }

    /// One stage-1/2 round. `corrupted` lists corrupted links in log order;
    /// `extracted[i]` is last round's output on `corrupted[i]` (additive only)
    /// and `fresh[i]` the key sent on it now.
    pub fn encode_round(
        &self,
        corrupted: &[usize],
        messages: &[Symbol],
        keys: &[Symbol],
        extracted: &[Symbol],
        fresh: &[Symbol],
    ) -> Result<Vec<Symbol>, FbError> {
        let j = corrupted.len();
        if messages.len() != self.rate
            || keys.len() != self.explicit_keys(j)
            || extracted.len() != self.extracted_keys(j)
            || fresh.len() != j
        {
            return Err(FbError::Params(format!(
                "round inputs ({}, {}, {}, {}) do not fit state j = {j}",
                messages.len(),
                keys.len(),
                extracted.len(),
                fresh.len()
            )));
        }
        let u: Vec<Symbol> = messages.iter().chain(keys).chain(extracted).copied().collect();
        let cols = u.len();
        Ok((0..self.links)
            .map(|l| match corrupted.iter().position(|&c| c == l) {
                Some(p) => fresh[p],
                None => self.field.dot(&self.generator.row(l)[..cols], &u),
            })
            .collect())
    }

    /// The matrix Bob inverts for a round with `corrupted` links already
    /// known: uncorrupted rows of the generator, stacked with unit rows for
    /// the extracted keys in the additive model.
    pub fn stage2_system(&self, corrupted: &[usize]) -> Result<Matrix, FbError> {
        let j = corrupted.len();
        let cols: Vec<usize> = (0..self.columns(j)).collect();
        let honest: Vec<usize> = (0..self.links).filter(|l| !corrupted.contains(l)).collect();
        let g = self.generator.select_rows(&honest).select_cols(&cols);
        match self.model {
            JamModel::Additive => {
                let pinned: Vec<usize> = (self.columns(j) - j..self.columns(j)).collect();
                Ok(augmented_system(&g, &pinned)?)
            }
            JamModel::Overwrite => Ok(g),
        }
    }

    /// Recover one round's message symbols.
    pub fn decode_round(&self, corrupted: &[usize], y: &[Symbol], y_prev: Option<&[Symbol]>) -> Result<Vec<Symbol>, FbError> {
        let j = corrupted.len();
        let cols: Vec<usize> = (0..self.columns(j)).collect();
        let honest: Vec<usize> = (0..self.links).filter(|l| !corrupted.contains(l)).collect();
        let u = match self.model {
            JamModel::Additive => {
                let g = self.generator.select_rows(&honest).select_cols(&cols);
                let observed: Vec<Vec<Symbol>> = honest.iter().map(|&l| vec![y[l]]).collect();
                let pinned: Vec<(usize, Vec<Symbol>)> = if j == 0 {
                    Vec::new()
                } else {
                    let prev = y_prev.ok_or_else(|| FbError::Params("previous round missing".into()))?;
                    corrupted
                        .iter()
                        .enumerate()
                        .map(|(i, &l)| (self.columns(j) - j + i, vec![prev[l]]))
                        .collect()
                };
                solve_augmented(&self.field, &g, &observed, &pinned)?
            }
            JamModel::Overwrite => {
                let g = self.generator.select_cols(&cols);
                let rows: Vec<Vec<Symbol>> = y.iter().map(|&s| vec![s]).collect();
                erasure_decode(&self.field, &rows, &ErasurePattern::new(corrupted.iter().copied()), &g)?
            }
        };
        Ok(u[..self.rate].iter().map(|b| b[0]).collect())
    }
}

/// Fixed-length encoding of a corruption log as base-`2^b` digits: the
/// entry count, then `z_w` slots of `(round, link)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogCodec {
    base: u128,
    count_digits: usize,
    round_digits: usize,
    link_digits: usize,
    slots: usize,
}

fn digits_for(max: usize, base: u128) -> usize {
    let mut d = 1;
    let mut cap = base;
    while cap <= max as u128 {
        cap = cap.saturating_mul(base);
        d += 1;
    }
    d
}

impl LogCodec {
    pub fn new(field: &Field, rounds: usize, links: usize, slots: usize) -> Self {
        let base = field.order();
        Self {
            base,
            count_digits: digits_for(slots, base),
            round_digits: digits_for(rounds.saturating_sub(1), base),
            link_digits: digits_for(links.saturating_sub(1), base),
            slots,
        }
    }

    pub fn len(&self) -> usize {
        self.count_digits + self.slots * (self.round_digits + self.link_digits)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&self, out: &mut Vec<Symbol>, mut v: u128, digits: usize) {
        for _ in 0..digits {
            out.push((v % self.base) as Symbol);
            v /= self.base;
        }
    }

    fn take(&self, it: &mut std::slice::Iter<'_, Symbol>, digits: usize) -> Option<usize> {
        let mut v: u128 = 0;
        let mut scale: u128 = 1;
        for _ in 0..digits {
            let d = *it.next()? as u128;
            v = v.checked_add(d.checked_mul(scale)?)?;
            scale = scale.saturating_mul(self.base);
        }
        usize::try_from(v).ok()
    }

    pub fn encode(&self, log: &[(usize, usize)]) -> Result<Vec<Symbol>, FbError> {
        if log.len() > self.slots {
            return Err(FbError::Params(format!("{} log entries exceed {} slots", log.len(), self.slots)));
        }
        let mut out = Vec::with_capacity(self.len());
        self.push(&mut out, log.len() as u128, self.count_digits);
        for s in 0..self.slots {
            let (r, l) = log.get(s).copied().unwrap_or((0, 0));
            self.push(&mut out, r as u128, self.round_digits);
            self.push(&mut out, l as u128, self.link_digits);
        }
        Ok(out)
    }

    pub fn decode(&self, symbols: &[Symbol]) -> Option<Vec<(usize, usize)>> {
        if symbols.len() != self.len() {
            return None;
        }
        let mut it = symbols.iter();
        let count = self.take(&mut it, self.count_digits)?;
        if count > self.slots {
            return None;
        }
        let mut log = Vec::with_capacity(count);
        for s in 0..self.slots {
            let r = self.take(&mut it, self.round_digits)?;
            let l = self.take(&mut it, self.link_digits)?;
            if s < count {
                log.push((r, l));
            }
        }
        Some(log)
    }
}

/// Bob's view of a finished run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BobDecoded {
    pub trusted: BTreeSet<usize>,
    pub log: Vec<(usize, usize)>,
    /// Message symbols per round; `None` for skipped rounds.
    pub rounds: Vec<Option<Vec<Symbol>>>,
}

impl BobDecoded {
    pub fn decoded_rounds(&self) -> usize {
        self.rounds.iter().filter(|r| r.is_some()).count()
    }
}

#[derive(Clone, Debug)]
pub struct FbsecOutcome {
    pub state: ProtocolState,
    /// Links Alice saw altered in any round before stage 4.
    pub false_links: BTreeSet<usize>,
    pub bob: Result<BobDecoded, FbError>,
}

impl FbsecOutcome {
    /// Protocol trace: stages, Alice's log and per-round decode status.
    pub fn trace(&self) -> Value {
        let bob = match &self.bob {
            Ok(b) => json!({
                "trusted": b.trusted,
                "log": b.log,
                "rounds": b.rounds.iter().map(|r| if r.is_some() { "decoded" } else { "skipped" }).collect::<Vec<_>>(),
            }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        json!({
            "stage": self.state.stage,
            "alice_log": self.state.log,
            "false_links": self.false_links,
            "bob": bob,
        })
    }
}

/// Run all four stages over `channel`. `messages[i]` holds round `i`'s
/// `R` message symbols.
pub fn fbsec_run<R: Rng + ?Sized>(
    params: &SecParams,
    messages: &[Vec<Symbol>],
    channel: &mut Channel,
    adversary: &mut dyn Strategy,
    rng: &mut R,
) -> Result<FbsecOutcome, FbError> {
    let f = &params.field;
    let c = params.links;
    if messages.len() != params.rounds {
        return Err(FbError::Params(format!(
            "{} message rounds for {} protocol rounds",
            messages.len(),
            params.rounds
        )));
    }
    if channel.links() != c || channel.model() != params.model || channel.rounds() != 0 {
        return Err(FbError::Params("channel does not match the protocol".into()));
    }
    let mut state = ProtocolState::default();
    let mut prev: Option<Vec<Symbol>> = None;
    for (i, m) in messages.iter().enumerate() {
        state.round = i;
        let corrupted = state.corrupted();
        let j = corrupted.len();
        let keys = f.random_vec(params.explicit_keys(j), rng);
        let fresh = f.random_vec(j, rng);
        let extracted: Vec<Symbol> = match params.model {
            JamModel::Additive => {
                let p = prev.as_ref();
                corrupted
                    .iter()
                    .map(|&l| p.map(|y| y[l]).ok_or_else(|| FbError::Params("missing feedback".into())))
                    .collect::<Result<_, _>>()?
            }
            JamModel::Overwrite => Vec::new(),
        };
        let x = params.encode_round(&corrupted, m, &keys, &extracted, &fresh)?;
        let rows: Vec<Vec<Symbol>> = x.iter().map(|&s| vec![s]).collect();
        let rec = channel.transmit(&rows, adversary)?;
        let y: Vec<Symbol> = rec.received.iter().map(|r| r[0]).collect();
        state.record(i, &rec.altered_links());
        prev = Some(y);
    }

    state.stage = Stage::Log;
    state.round = params.rounds;
    let codec = params.log_codec();
    let log_symbols = codec.encode(&state.log)?;
    channel.transmit(&vec![log_symbols; c], adversary)?;

    state.stage = Stage::Hash;
    state.round = params.rounds + 1;
    let history = received_history(channel, params.rounds + 1);
    let false_links: BTreeSet<usize> = (0..params.rounds + 1)
        .filter_map(|r| channel.round(r))
        .flat_map(|rec| rec.altered_links())
        .collect();
    let nh = params.hash_dim();
    let keys = (0..c)
        .map(|_| HashKey::random(f, nh, rng))
        .collect::<Result<Vec<_>, _>>()?;
    let mut bundle = Vec::with_capacity(2 * c * nh);
    for (y, k) in history.iter().zip(&keys) {
        bundle.extend(matrix_hash(f, y, k)?.theta);
    }
    for k in &keys {
        bundle.extend_from_slice(k.as_slice());
    }
    let rows: Vec<Vec<Symbol>> = (0..c)
        .map(|l| {
            if false_links.contains(&l) {
                f.random_vec(bundle.len(), rng)
            } else {
                bundle.clone()
            }
        })
        .collect();
    channel.transmit(&rows, adversary)?;

    let received: Vec<Vec<Vec<Symbol>>> = (0..channel.rounds())
        .map(|r| channel.round(r).expect("round exists").received.clone())
        .collect();
    Ok(FbsecOutcome {
        state,
        false_links,
        bob: fbsec_decode(params, &received),
    })
}

/// Per-link concatenation of the received rows of rounds `0..upto`.
fn received_history(channel: &Channel, upto: usize) -> Vec<Vec<Symbol>> {
    let mut h = vec![Vec::new(); channel.links()];
    for r in 0..upto {
        let rec = channel.round(r).expect("round exists");
        for (l, row) in rec.received.iter().enumerate() {
            h[l].extend_from_slice(row);
        }
    }
    h
}

/// Bob's decoder over all received rounds (`N` single-symbol rounds, the log
/// round and the hash round).
pub fn fbsec_decode(params: &SecParams, received: &[Vec<Vec<Symbol>>]) -> Result<BobDecoded, FbError> {
    let (n, c) = (params.rounds, params.links);
    let codec = params.log_codec();
    let nh = params.hash_dim();
    let shape_ok = received.len() == n + 2
        && received.iter().all(|r| r.len() == c)
        && received[..n].iter().all(|r| r.iter().all(|row| row.len() == 1))
        && received[n].iter().all(|row| row.len() == codec.len())
        && received[n + 1].iter().all(|row| row.len() == 2 * c * nh);
    if !shape_ok {
        return Err(FbError::Layout("received rounds do not match the protocol".into()));
    }
    let history: Vec<Vec<Symbol>> = (0..c)
        .map(|l| received[..=n].iter().flat_map(|r| r[l].iter().copied()).collect())
        .collect();
    let mut trusted = BTreeSet::new();
    for (l, bundle) in received[n + 1].iter().enumerate() {
        let (hashes, keys) = bundle.split_at(c * nh);
        let mut ok = true;
        for (j, y) in history.iter().enumerate() {
            let h = &hashes[j * nh..(j + 1) * nh];
            let k = &keys[j * nh..(j + 1) * nh];
            if !verify_raw(&params.field, y, k, h)? {
                ok = false;
                break;
            }
        }
        if ok {
            trusted.insert(l);
        }
    }
    if trusted.is_empty() {
        return Err(FbError::Declared("no link passed the stage-4 check".into()));
    }

    let mut votes: BTreeMap<Vec<Symbol>, usize> = BTreeMap::new();
    for &l in &trusted {
        *votes.entry(received[n][l].clone()).or_default() += 1;
    }
    let (winner, count) = votes
        .iter()
        .max_by_key(|(_, &v)| v)
        .map(|(k, &v)| (k.clone(), v))
        .expect("at least one vote");
    if 2 * count <= trusted.len() {
        return Err(FbError::Declared("no strict majority for the corruption log".into()));
    }
    let log = codec
        .decode(&winner)
        .ok_or_else(|| FbError::Declared("corruption log does not parse".into()))?;
    validate_log(params, &log, &trusted)?;

    let skipped: BTreeSet<usize> = log.iter().map(|&(r, _)| r).collect();
    let mut rounds = Vec::with_capacity(n);
    for i in 0..n {
        if skipped.contains(&i) {
            rounds.push(None);
            continue;
        }
        let corrupted: Vec<usize> = log.iter().filter(|&&(r, _)| r < i).map(|&(_, l)| l).collect();
        let y: Vec<Symbol> = received[i].iter().map(|r| r[0]).collect();
        let prev: Option<Vec<Symbol>> = (i > 0).then(|| received[i - 1].iter().map(|r| r[0]).collect());
        let m = params.decode_round(&corrupted, &y, prev.as_deref()).map_err(|e| match e {
            FbError::Code(CodeError::Inconsistent) => FbError::Declared(format!("round {i} is inconsistent")),
            other => other,
        })?;
        rounds.push(Some(m));
    }
    Ok(BobDecoded { trusted, log, rounds })
}

fn validate_log(params: &SecParams, log: &[(usize, usize)], trusted: &BTreeSet<usize>) -> Result<(), FbError> {
    let bad = |why: &str| Err(FbError::Declared(format!("corruption log rejected: {why}")));
    if log.len() > params.z.z_w() {
        return bad("too many entries");
    }
    if log.windows(2).any(|w| w[0].0 > w[1].0) {
        return bad("rounds out of order");
    }
    let links: BTreeSet<usize> = log.iter().map(|&(_, l)| l).collect();
    if links.len() != log.len() {
        return bad("a link appears twice");
    }
    if log.iter().any(|&(r, l)| r >= params.rounds || l >= params.links) {
        return bad("entry out of range");
    }
    if links.iter().any(|l| trusted.contains(l)) {
        return bad("a logged link passed the stage-4 check");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{LinkAssignment, Passive, ScheduledCorruption};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn z(rw: usize, ro: usize, wo: usize) -> AdversaryVector {
        AdversaryVector::new(rw, ro, wo)
    }

    #[test]
    fn rates_and_key_schedules() {
        let f = Field::new(4).unwrap();
        let p = SecParams::new(&f, 2, z(0, 1, 1), JamModel::Additive, 8).unwrap();
        assert_eq!(p.rate(), 1);
        let p = SecParams::new(&f, 4, z(1, 1, 1), JamModel::Overwrite, 8).unwrap();
        assert_eq!(p.rate(), 1);
        let p = SecParams::new(&f, 5, z(1, 1, 1), JamModel::Overwrite, 8).unwrap();
        assert_eq!((p.explicit_keys(1), p.explicit_keys(2)), (2, 1));
        let p = SecParams::new(&f, 3, z(0, 0, 0), JamModel::Overwrite, 8).unwrap();
        assert_eq!(p.rate(), 3);
        assert!(SecParams::new(&Field::new(2).unwrap(), 3, z(0, 1, 0), JamModel::Additive, 8).is_err());
        assert!(SecParams::new(&f, 2, z(1, 1, 0), JamModel::Additive, 8).is_err());
    }

    #[test]
    fn log_codec_round_trip() {
        let f = Field::new(2).unwrap();
        let c = LogCodec::new(&f, 64, 4, 3);
        assert_eq!(c.len(), 1 + 3 * (3 + 1));
        let log = vec![(3, 1), (3, 2), (63, 0)];
        assert_eq!(c.decode(&c.encode(&log).unwrap()).unwrap(), log);
        assert_eq!(c.decode(&c.encode(&[]).unwrap()).unwrap(), vec![]);
        assert!(c.encode(&[(0, 0); 4]).is_err());
    }

    #[test]
    fn stage2_systems_invertible() {
        let f = Field::new(4).unwrap();
        for model in [JamModel::Additive, JamModel::Overwrite] {
            let p = SecParams::new(&f, 4, z(1, 0, 1), model, 4).unwrap();
            for a in 0..4 {
                for b in 0..4 {
                    let corrupted: Vec<usize> = if a == b { vec![a] } else { vec![a, b] };
                    let m = p.stage2_system(&corrupted).unwrap();
                    assert_eq!(m.rank(&f), m.cols());
                }
            }
        }
    }

    fn run(model: JamModel, zv: AdversaryVector, a: LinkAssignment, schedule: Vec<(usize, usize)>, seed: u64) {
        let f = Field::new(4).unwrap();
        let p = SecParams::new(&f, a.sizes().total().max(2).max(zv.total() + 1), zv, model, 16).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let msgs: Vec<Vec<Symbol>> = (0..16).map(|_| f.random_vec(p.rate(), &mut rng)).collect();
        let mut ch = Channel::new(&f, p.links(), model, a).unwrap();
        let out = if schedule.is_empty() {
            fbsec_run(&p, &msgs, &mut ch, &mut Passive, &mut rng).unwrap()
        } else {
            let mut adv = ScheduledCorruption::new(schedule.clone(), seed);
            fbsec_run(&p, &msgs, &mut ch, &mut adv, &mut rng).unwrap()
        };
        let bob = out.bob.unwrap();
        assert_eq!(bob.log, out.state.log);
        for (i, r) in bob.rounds.iter().enumerate() {
            if let Some(m) = r {
                assert_eq!(m, &msgs[i], "round {i}");
            }
        }
        assert!(bob.decoded_rounds() >= 16 - zv.z_w());
        assert_eq!(bob.decoded_rounds(), 16 - schedule.iter().map(|s| s.0).collect::<BTreeSet<_>>().len());
    }

    #[test]
    fn clean_and_corrupted_runs_decode() {
        let a = LinkAssignment {
            rw: [0].into(),
            wo: [2].into(),
            ..Default::default()
        };
        for model in [JamModel::Additive, JamModel::Overwrite] {
            run(model, z(1, 0, 1), a.clone(), vec![], 1);
            run(model, z(1, 0, 1), a.clone(), vec![(3, 2), (9, 0)], 2);
            run(model, z(1, 0, 1), a.clone(), vec![(5, 0), (5, 2)], 3);
            run(model, z(1, 0, 1), a.clone(), vec![(0, 2)], 4);
        }
    }
}
