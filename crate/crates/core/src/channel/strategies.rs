//! Adversary strategies.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{AdversaryVector, ChannelError, JamModel, LinkAssignment, Strategy, View};
use crate::field::{Field, Symbol};
use crate::hashing::{matrix_hash, HashKey};
use crate::scheme_noffb::{payload_rows, PairwiseParams};

/// A sender that can be replayed by the adversary: rows for `round` given
/// the rows Bob received in all earlier rounds.
pub trait RoundEncoder {
    fn encode(
        &mut self,
        round: usize,
        feedback: &[Vec<Vec<Symbol>>],
        rng: &mut ChaCha20Rng,
    ) -> Result<Vec<Vec<Symbol>>, String>;
}

pub type EncoderFactory = Box<dyn FnMut(&mut ChaCha20Rng) -> Box<dyn RoundEncoder>>;
pub type CodewordSampler = Box<dyn FnMut(&mut ChaCha20Rng) -> Vec<Vec<Symbol>>>;

/// Never writes.
pub struct Passive;

impl Strategy for Passive {
    fn name(&self) -> &str {
        "none"
    }

    fn act(&mut self, _: &View<'_>) -> Result<Vec<(usize, Symbol)>, ChannelError> {
        Ok(Vec::new())
    }
}

/// Uniform symbols on every writable link at every slot.
pub struct RandomNoise {
    rng: ChaCha20Rng,
    seed: u64,
}

impl RandomNoise {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            seed,
        }
    }
}

impl Strategy for RandomNoise {
    fn name(&self) -> &str {
        "random-noise"
    }

    fn act(&mut self, view: &View<'_>) -> Result<Vec<(usize, Symbol)>, ChannelError> {
        let f = view.field();
        Ok(view
            .assignment()
            .writable()
            .into_iter()
            .map(|l| (l, f.random(&mut self.rng)))
            .collect())
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }
}

/// Place links into sets: `rw` links must be read-write, `w` links need
/// only write access, `r` links only read access.
fn place(
    links: usize,
    z: &AdversaryVector,
    rw: &[usize],
    w: &[usize],
    r: &[usize],
) -> Result<LinkAssignment, ChannelError> {
    z.check(links)?;
    let infeasible = || {
        ChannelError::Params(format!(
            "z = {z} cannot cover {} read-write, {} write and {} read links",
            rw.len(),
            w.len(),
            r.len()
        ))
    };
    let mut a = LinkAssignment::default();
    let mut rw_left = z.rw.checked_sub(rw.len()).ok_or_else(infeasible)?;
    a.rw.extend(rw);
    let wo = w.len().min(z.wo);
    a.wo.extend(&w[..wo]);
    let extra = w.len() - wo;
    rw_left = rw_left.checked_sub(extra).ok_or_else(infeasible)?;
    a.rw.extend(&w[wo..]);
    let ro = r.len().min(z.ro);
    a.ro.extend(&r[..ro]);
    rw_left.checked_sub(r.len() - ro).ok_or_else(infeasible)?;
    a.rw.extend(&r[ro..]);
    Ok(a)
}

/// Pretend to be Alice with a message of its own on half the links, so that
/// Bob sees two equally plausible codewords.
pub struct Symmetrize {
    model: JamModel,
    attacked: Vec<usize>,
    noise: Vec<usize>,
    erased: Vec<usize>,
    assignment: LinkAssignment,
    sampler: CodewordSampler,
    fake: Option<Vec<Vec<Symbol>>>,
    rng: ChaCha20Rng,
    seed: u64,
}

impl Symmetrize {
    /// Additive: noise on the last `z_wo` links (one more when `C - z_wo` is
    /// odd) and `x' - x` added on a random half of the rest. Overwrite: zero
    /// the last link when `C` is odd and overwrite a random half of the rest
    /// with `x'`.
    pub fn new(
        links: usize,
        z: AdversaryVector,
        model: JamModel,
        sampler: CodewordSampler,
        seed: u64,
    ) -> Result<Self, ChannelError> {
        z.check(links)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let tail = match model {
            JamModel::Additive => z.wo + (links - z.wo) % 2,
            JamModel::Overwrite => links % 2,
        };
        if tail > links {
            return Err(ChannelError::Params("not enough links for the noise set".into()));
        }
        let rest = links - tail;
        let half = rest / 2;
        let halves = [(0..half).collect::<Vec<_>>(), (half..rest).collect::<Vec<_>>()];
        let attacked = halves[rng.gen_range(0..2)].clone();
        let tail_links: Vec<usize> = (rest..links).collect();
        let (assignment, noise, erased) = match model {
            JamModel::Additive => (place(links, &z, &attacked, &tail_links, &[])?, tail_links, vec![]),
            JamModel::Overwrite => {
                let mut w = attacked.clone();
                w.extend(&tail_links);
                (place(links, &z, &[], &w, &[])?, vec![], tail_links)
            }
        };
        Ok(Self {
            model,
            attacked,
            noise,
            erased,
            assignment,
            sampler,
            fake: None,
            rng,
            seed,
        })
    }

    pub fn assignment(&self) -> &LinkAssignment {
        &self.assignment
    }

    pub fn attacked(&self) -> &[usize] {
        &self.attacked
    }
}

impl Strategy for Symmetrize {
    fn name(&self) -> &str {
        "symmetrize"
    }

    fn act(&mut self, view: &View<'_>) -> Result<Vec<(usize, Symbol)>, ChannelError> {
        if view.round() > 0 {
            return Ok(Vec::new());
        }
        let t = view.time();
        if self.fake.is_none() {
            self.fake = Some((self.sampler)(&mut self.rng));
        }
        let fake = self.fake.as_ref().expect("sampled above");
        let f = view.field();
        let mut out = Vec::new();
        for &l in &self.attacked {
            let target = *fake
                .get(l)
                .and_then(|r| r.get(t))
                .ok_or_else(|| ChannelError::Strategy("sampled codeword has the wrong shape".into()))?;
            let e = match self.model {
                JamModel::Additive => f.sub(target, view.read(0, l, t)?),
                JamModel::Overwrite => target,
            };
            out.push((l, e));
        }
        for &l in &self.noise {
            out.push((l, f.random(&mut self.rng)));
        }
        for &l in &self.erased {
            out.push((l, 0));
        }
        Ok(out)
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }
}

/// Runs a copy of Alice's two-round encoder with a message of its own on
/// one half of the links, feeding it the true feedback. Requires seeing
/// every link's output after round one.
pub struct FeedbackSymmetrize {
    model: JamModel,
    chosen: Vec<usize>,
    extra: Vec<usize>,
    assignment: LinkAssignment,
    factory: EncoderFactory,
    encoder: Option<Box<dyn RoundEncoder>>,
    feedback: Vec<Vec<Vec<Symbol>>>,
    fake: Vec<Vec<Symbol>>,
    rng: ChaCha20Rng,
    seed: u64,
}

impl FeedbackSymmetrize {
    pub fn new(
        links: usize,
        z: AdversaryVector,
        model: JamModel,
        factory: EncoderFactory,
        seed: u64,
    ) -> Result<Self, ChannelError> {
        z.check(links)?;
        if model == JamModel::Additive && z.z_r() < links {
            return Err(ChannelError::Params(format!(
                "feedback symmetrization needs every link readable, z_r = {} < {links}",
                z.z_r()
            )));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let half = links / 2;
        let halves = [(0..half).collect::<Vec<_>>(), (links - half..links).collect::<Vec<_>>()];
        let pick = rng.gen_range(0..2);
        let chosen = halves[pick].clone();
        let extra: Vec<usize> = if links % 2 == 1 { vec![half] } else { vec![] };
        let mut written = chosen.clone();
        written.extend(&extra);
        let rest: Vec<usize> = (0..links).filter(|l| !written.contains(l)).collect();
        let assignment = match model {
            JamModel::Additive => place(links, &z, &written, &[], &rest)?,
            JamModel::Overwrite => place(links, &z, &[], &written, &rest)?,
        };
        Ok(Self {
            model,
            chosen,
            extra,
            assignment,
            factory,
            encoder: None,
            feedback: Vec::new(),
            fake: Vec::new(),
            rng,
            seed,
        })
    }

    pub fn assignment(&self) -> &LinkAssignment {
        &self.assignment
    }

    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }
}

impl Strategy for FeedbackSymmetrize {
    fn name(&self) -> &str {
        "feedback-symmetrize"
    }

    fn act(&mut self, view: &View<'_>) -> Result<Vec<(usize, Symbol)>, ChannelError> {
        let (round, t) = (view.round(), view.time());
        if t == 0 {
            if round == 0 {
                self.encoder = Some((self.factory)(&mut self.rng));
            } else {
                let len = view.past_round_len(round - 1).unwrap_or(0);
                let y = (0..view.links())
                    .map(|l| (0..len).map(|s| view.output(round - 1, l, s)).collect())
                    .collect::<Result<Vec<Vec<Symbol>>, _>>()?;
                self.feedback.push(y);
            }
            let enc = self.encoder.as_mut().expect("created in round 0");
            self.fake = enc
                .encode(round, &self.feedback, &mut self.rng)
                .map_err(ChannelError::Strategy)?;
        }
        let Some(width) = self.fake.first().map(Vec::len) else {
            return Ok(Vec::new());
        };
        if t >= width {
            return Ok(Vec::new());
        }
        let f = view.field();
        let mut out = Vec::new();
        for &l in &self.chosen {
            let target = self.fake[l][t];
            let e = match self.model {
                JamModel::Additive => f.sub(target, view.read(round, l, t)?),
                JamModel::Overwrite => target,
            };
            out.push((l, e));
        }
        for &l in &self.extra {
            out.push((l, f.random(&mut self.rng)));
        }
        Ok(out)
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }
}

/// Replace payloads with a codeword of a fake message on every link it
/// controls and fill in keys and hashes so the controlled links agree with
/// each other. Hashes of payloads it cannot see are guessed.
pub struct HashForge {
    params: PairwiseParams,
    rng: ChaCha20Rng,
    seed: u64,
    state: Option<ForgeState>,
}

struct ForgeState {
    forged: Vec<usize>,
    noise: Vec<usize>,
    fake: Vec<Vec<Symbol>>,
    own_keys: BTreeMap<usize, Vec<Symbol>>,
    digests: BTreeMap<(usize, usize), Vec<Symbol>>,
}

impl HashForge {
    pub fn new(params: &PairwiseParams, seed: u64) -> Self {
        Self {
            params: params.clone(),
            rng: ChaCha20Rng::seed_from_u64(seed),
            seed,
            state: None,
        }
    }

    fn init(&mut self, view: &View<'_>) -> Result<(), ChannelError> {
        let a = view.assignment();
        let (forged, noise): (Vec<usize>, Vec<usize>) = match view.model() {
            JamModel::Additive => (a.rw.iter().copied().collect(), a.wo.iter().copied().collect()),
            JamModel::Overwrite => (a.writable().into_iter().collect(), vec![]),
        };
        let f = self.params.field().clone();
        let blocks = f.random_vec(self.params.k() * self.params.payload_len(), &mut self.rng);
        let fake = payload_rows(&self.params, &blocks).map_err(|e| ChannelError::Strategy(e.to_string()))?;
        let mut own_keys = BTreeMap::new();
        if view.model() == JamModel::Overwrite {
            for &i in &forged {
                let k = f
                    .random_nonzero_vec(self.params.hash_dim(), &mut self.rng)
                    .map_err(|e| ChannelError::Strategy(e.to_string()))?;
                own_keys.insert(i, k);
            }
        }
        self.state = Some(ForgeState {
            forged,
            noise,
            fake,
            own_keys,
            digests: BTreeMap::new(),
        });
        Ok(())
    }

    /// Digest link `i` will claim for link `j`'s payload.
    fn digest(&mut self, view: &View<'_>, i: usize, j: usize) -> Result<Vec<Symbol>, ChannelError> {
        let p = &self.params;
        let (l, n) = (p.payload_len(), p.hash_dim());
        let f = p.field().clone();
        let st = self.state.as_mut().expect("initialised");
        if let Some(d) = st.digests.get(&(i, j)) {
            return Ok(d.clone());
        }
        let key = match st.own_keys.get(&i) {
            Some(k) => k.clone(),
            None => (l..l + n).map(|t| view.read(0, i, t)).collect::<Result<_, _>>()?,
        };
        let payload: Option<Vec<Symbol>> = if st.forged.contains(&j) {
            Some(st.fake[j].clone())
        } else if view.assignment().can_read(j) && !st.noise.contains(&j) {
            Some((0..l).map(|t| view.read(0, j, t)).collect::<Result<_, _>>()?)
        } else {
            None
        };
        let d = match (payload, HashKey::new(&f, key)) {
            (Some(u), Ok(k)) => matrix_hash(&f, &u, &k)
                .map_err(|e| ChannelError::Strategy(e.to_string()))?
                .theta,
            _ => f.random_vec(n, &mut self.rng),
        };
        st.digests.insert((i, j), d.clone());
        Ok(d)
    }
}

impl Strategy for HashForge {
    fn name(&self) -> &str {
        "hash-forge"
    }

    fn act(&mut self, view: &View<'_>) -> Result<Vec<(usize, Symbol)>, ChannelError> {
        if view.round() > 0 {
            return Ok(Vec::new());
        }
        if self.state.is_none() {
            self.init(view)?;
        }
        let t = view.time();
        let (l, n) = (self.params.payload_len(), self.params.hash_dim());
        let f = self.params.field().clone();
        let forged = self.state.as_ref().expect("initialised").forged.clone();
        let mut out = Vec::new();
        for &i in &forged {
            let target = if t < l {
                Some(self.state.as_ref().expect("initialised").fake[i][t])
            } else if t < l + n {
                self.state
                    .as_ref()
                    .expect("initialised")
                    .own_keys
                    .get(&i)
                    .map(|k| k[t - l])
            } else {
                let idx = t - l - n;
                Some(self.digest(view, i, idx / n)?[idx % n])
            };
            if let Some(v) = target {
                let e = match view.model() {
                    JamModel::Additive => f.sub(v, view.read(0, i, t)?),
                    JamModel::Overwrite => v,
                };
                out.push((i, e));
            }
        }
        let noise = self.state.as_ref().expect("initialised").noise.clone();
        for i in noise {
            out.push((i, f.random(&mut self.rng)));
        }
        Ok(out)
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }
}

/// Starts corrupting each listed link at its listed round and keeps
/// corrupting it in every later round. Additive writes are nonzero, so each
/// corrupted slot really changes.
pub struct ScheduledCorruption {
    schedule: Vec<(usize, usize)>,
    rng: ChaCha20Rng,
    seed: u64,
}

impl ScheduledCorruption {
    /// `schedule` holds `(round, link)` pairs.
    pub fn new(schedule: Vec<(usize, usize)>, seed: u64) -> Self {
        Self {
            schedule,
            rng: ChaCha20Rng::seed_from_u64(seed),
            seed,
        }
    }

    /// A random schedule: `count` distinct writable links, each starting at
    /// a uniform round in `0..rounds`.
    pub fn random<R: Rng + ?Sized>(
        assignment: &LinkAssignment,
        count: usize,
        rounds: usize,
        rng: &mut R,
        seed: u64,
    ) -> Self {
        let mut links: Vec<usize> = assignment.writable().into_iter().collect();
        links.shuffle(rng);
        let schedule = links
            .into_iter()
            .take(count)
            .map(|l| (rng.gen_range(0..rounds.max(1)), l))
            .collect();
        Self::new(schedule, seed)
    }

    pub fn schedule(&self) -> &[(usize, usize)] {
        &self.schedule
    }
}

impl Strategy for ScheduledCorruption {
    fn name(&self) -> &str {
        "scheduled"
    }

    fn act(&mut self, view: &View<'_>) -> Result<Vec<(usize, Symbol)>, ChannelError> {
        let f: Field = view.field().clone();
        let mut out = Vec::new();
        for &(start, l) in &self.schedule {
            if view.round() < start {
                continue;
            }
            let e = f.random_nonzero(&mut self.rng);
            let v = match view.model() {
                JamModel::Additive => e,
                JamModel::Overwrite if view.assignment().can_read(l) => {
                    f.add(view.read(view.round(), l, view.time())?, e)
                }
                JamModel::Overwrite => f.random(&mut self.rng),
            };
            out.push((l, v));
        }
        Ok(out)
    }

    fn seed(&self) -> Option<u64> {
        Some(self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::super::Channel;
    use super::*;
    use crate::scheme_noffb::{check_consistency, pw_encode};

    #[test]
    fn placement() {
        let z = AdversaryVector::new(2, 0, 0);
        let a = place(3, &z, &[0], &[2], &[]).unwrap();
        assert_eq!(a.rw, [0, 2].into());
        assert!(place(3, &z, &[0, 1], &[2], &[]).is_err());
        let a = place(4, &AdversaryVector::new(1, 1, 1), &[], &[0, 1], &[2]).unwrap();
        assert_eq!((a.wo, a.rw, a.ro), ([0].into(), [1].into(), [2].into()));
    }

    #[test]
    fn symmetrize_feasibility() {
        let sampler = || -> CodewordSampler { Box::new(|_| vec![vec![0; 4]; 4]) };
        assert!(Symmetrize::new(3, AdversaryVector::new(2, 0, 0), JamModel::Additive, sampler(), 1).is_ok());
        assert!(Symmetrize::new(3, AdversaryVector::new(1, 0, 0), JamModel::Additive, sampler(), 1).is_err());
        assert!(Symmetrize::new(4, AdversaryVector::new(0, 0, 2), JamModel::Overwrite, sampler(), 1).is_ok());
        assert!(Symmetrize::new(4, AdversaryVector::new(0, 0, 1), JamModel::Overwrite, sampler(), 1).is_err());
        assert!(Symmetrize::new(5, AdversaryVector::new(0, 0, 3), JamModel::Overwrite, sampler(), 1).is_ok());
    }

    #[test]
    fn symmetrize_with_own_codeword_is_harmless() {
        let f = Field::new(8).unwrap();
        let x = vec![vec![1, 2], vec![3, 4], vec![5, 6]];
        let copy = x.clone();
        let mut s = Symmetrize::new(
            3,
            AdversaryVector::new(2, 0, 0),
            JamModel::Additive,
            Box::new(move |_| copy.clone()),
            9,
        )
        .unwrap();
        let mut ch = Channel::new(&f, 3, JamModel::Additive, s.assignment().clone()).unwrap();
        let r = ch.transmit(&x, &mut s).unwrap();
        for l in 0..2 {
            assert_eq!(r.received[l], x[l]);
        }
    }

    #[test]
    fn forge_with_no_writes_changes_nothing() {
        let f = Field::new(8).unwrap();
        let p = PairwiseParams::new(&f, 3, AdversaryVector::new(0, 1, 0), JamModel::Additive, 2).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let rows = pw_encode(&p, &f.random_vec(p.message_len(), &mut rng), &mut rng).unwrap();
        let a = LinkAssignment {
            ro: [1].into(),
            ..Default::default()
        };
        let mut ch = Channel::new(&f, 3, JamModel::Additive, a).unwrap();
        let r = ch.transmit(&rows, &mut HashForge::new(&p, 3)).unwrap();
        assert_eq!(r.received, rows);
    }

    #[test]
    fn forged_links_agree_with_each_other() {
        let f = Field::new(16).unwrap();
        let z = AdversaryVector::new(1, 0, 1);
        let p = PairwiseParams::new(&f, 5, z, JamModel::Overwrite, 2).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let rows = pw_encode(&p, &f.random_vec(p.message_len(), &mut rng), &mut rng).unwrap();
        let a = LinkAssignment {
            rw: [0].into(),
            wo: [1].into(),
            ..Default::default()
        };
        let mut ch = Channel::new(&f, 5, JamModel::Overwrite, a).unwrap();
        let r = ch.transmit(&rows, &mut HashForge::new(&p, 8)).unwrap().clone();
        let g = check_consistency(&p, &r.received).unwrap();
        assert!(g.self_ok[0] && g.self_ok[1]);
        assert!(g.adj[0][1]);
        assert!(g.is_clique(&[2, 3, 4]));
    }
}
