use std::collections::BTreeSet;

use rand::RngCore;
use rayon::prelude::*;

use super::config::{AdversaryId, ExperimentConfig, SchemeId};
use super::stats::{TrialOutcome, TrialStats, Verdict};
use super::HarnessError;
use crate::channel::strategies::{CodewordSampler, EncoderFactory, RoundEncoder};
use crate::channel::{
    assign_links, AssignPolicy, Channel, ChannelError, FeedbackSymmetrize, HashForge, LinkAssignment, Passive,
    RandomNoise, ScheduledCorruption, Strategy, Symmetrize,
};
use crate::field::Symbol;
use crate::rng::{adversary_rng, scheme_rng, StreamRng};
use crate::scheme_fb::{fb_classify, fb_decode, fbsec_run, FbEncoder, FbError, FbParams, SecParams};
use crate::scheme_noffb::{check_consistency, largest_clique, pw_decode, pw_encode, PairwiseParams};

/// Environment variable holding the worker count; unset or 0 means one
/// worker per core.
pub const THREADS_ENV: &str = "MPATH_THREADS";

/// Scheme parameters built once per run.
#[derive(Clone, Debug)]
pub enum Prepared {
    Pairwise(PairwiseParams),
    Feedback(FbParams),
    Fbsec(SecParams),
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared, HarnessError> {
    config.validate()?;
    let f = config.field()?;
    let model = config.scenario()?.model;
    let (c, z, n) = (config.links, config.z, config.blocklength);
    let cfg_err = |e: String| HarnessError::Config(e);
    Ok(match config.scheme {
        SchemeId::Pairwise if config.adversary.is_converse() => {
            Prepared::Pairwise(PairwiseParams::unchecked(&f, c, z, model, n).map_err(|e| cfg_err(e.to_string()))?)
        }
        SchemeId::Pairwise => Prepared::Pairwise(PairwiseParams::new(&f, c, z, model, n).map_err(|e| cfg_err(e.to_string()))?),
        SchemeId::PairwiseSecret => {
            Prepared::Pairwise(PairwiseParams::secret(&f, c, z, model, n).map_err(|e| cfg_err(e.to_string()))?)
        }
        SchemeId::Feedback if config.adversary.is_converse() => {
            Prepared::Feedback(FbParams::unchecked(&f, c, z, model, n).map_err(|e| cfg_err(e.to_string()))?)
        }
        SchemeId::Feedback => Prepared::Feedback(FbParams::new(&f, c, z, model, n).map_err(|e| cfg_err(e.to_string()))?),
        SchemeId::Fbsec => Prepared::Fbsec(SecParams::new(&f, c, z, model, n).map_err(|e| cfg_err(e.to_string()))?),
    })
}

fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// Run every trial of `config` and aggregate. Trial `t` draws from its own
/// scheme and adversary streams, so results do not depend on scheduling.
pub fn run_trials(config: &ExperimentConfig) -> Result<TrialStats, HarnessError> {
    let prepared = prepare(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;
    let outcomes = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, &prepared, t))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(TrialStats::from_outcomes(config, &outcomes))
}

fn referee(trial: u64, error: ChannelError, channel: &Channel) -> HarnessError {
    HarnessError::Referee {
        trial,
        error,
        transcript: channel.transcript().to_json().to_string(),
    }
}

struct TrialRngs {
    scheme: StreamRng,
    adversary: StreamRng,
    adversary_seed: u64,
}

fn rngs(config: &ExperimentConfig, trial: u64) -> TrialRngs {
    let mut adversary = adversary_rng(config.seed, trial);
    let adversary_seed = adversary.next_u64();
    TrialRngs {
        scheme: scheme_rng(config.seed, trial),
        adversary,
        adversary_seed,
    }
}

pub fn run_trial(config: &ExperimentConfig, prepared: &Prepared, trial: u64) -> Result<TrialOutcome, HarnessError> {
    match prepared {
        Prepared::Pairwise(p) => pairwise_trial(config, p, trial),
        Prepared::Feedback(p) => feedback_trial(config, p, trial),
        Prepared::Fbsec(p) => fbsec_trial(config, p, trial),
    }
}

fn uniform(config: &ExperimentConfig, rng: &mut StreamRng) -> Result<LinkAssignment, HarnessError> {
    assign_links(config.links, &config.z, &AssignPolicy::Uniform, rng).map_err(|e| HarnessError::Config(e.to_string()))
}

fn pairwise_trial(config: &ExperimentConfig, p: &PairwiseParams, trial: u64) -> Result<TrialOutcome, HarnessError> {
    let TrialRngs {
        scheme: mut srng,
        adversary: mut arng,
        adversary_seed,
    } = rngs(config, trial);
    let f = p.field();
    let msg = f.random_vec(p.message_len(), &mut srng);
    let x = pw_encode(p, &msg, &mut srng).map_err(|e| HarnessError::Scheme(e.to_string()))?;
    let (assignment, mut adv): (LinkAssignment, Box<dyn Strategy>) = match config.adversary {
        AdversaryId::None => (uniform(config, &mut arng)?, Box::new(Passive)),
        AdversaryId::RandomNoise => (uniform(config, &mut arng)?, Box::new(RandomNoise::new(adversary_seed))),
        AdversaryId::HashForge => (uniform(config, &mut arng)?, Box::new(HashForge::new(p, adversary_seed))),
        AdversaryId::Symmetrize => {
            let pc = p.clone();
            let sampler: CodewordSampler = Box::new(move |r| {
                let m = pc.field().random_vec(pc.message_len(), r);
                pw_encode(&pc, &m, r).unwrap_or_default()
            });
            let s = Symmetrize::new(config.links, config.z, p.model(), sampler, adversary_seed)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            (s.assignment().clone(), Box::new(s))
        }
        other => return Err(HarnessError::Config(format!("adversary {other} cannot attack the pairwise scheme"))),
    };
    let mut ch = Channel::new(f, config.links, p.model(), assignment).map_err(|e| HarnessError::Config(e.to_string()))?;
    let (y, altered) = match ch.transmit(&x, adv.as_mut()) {
        Ok(rec) => (rec.received.clone(), rec.altered_links()),
        Err(e) => return Err(referee(trial, e, &ch)),
    };
    let clique = check_consistency(p, &y).map(|g| largest_clique(&g)).unwrap_or_default();
    let verdict = match pw_decode(p, &y) {
        Ok(d) if d.message == msg => Verdict::Success,
        Ok(_) => Verdict::WrongDecode,
        Err(_) => Verdict::Declared,
    };
    Ok(TrialOutcome {
        verdict,
        false_clique: clique.iter().any(|l| altered.contains(l)),
        honest_excluded: (0..config.links).any(|l| !altered.contains(&l) && !clique.contains(&l)),
        honest_invariant: clique.len() + config.z.z_w() >= config.links,
        decoded_rounds: None,
    })
}

fn feedback_trial(config: &ExperimentConfig, p: &FbParams, trial: u64) -> Result<TrialOutcome, HarnessError> {
    let TrialRngs {
        scheme: mut srng,
        adversary: mut arng,
        adversary_seed,
    } = rngs(config, trial);
    let f = p.field();
    let msg = f.random_vec(p.message_len(), &mut srng);
    let (assignment, mut adv): (LinkAssignment, Box<dyn Strategy>) = match config.adversary {
        AdversaryId::None => (uniform(config, &mut arng)?, Box::new(Passive)),
        AdversaryId::RandomNoise => (uniform(config, &mut arng)?, Box::new(RandomNoise::new(adversary_seed))),
        AdversaryId::Scheduled => {
            let a = uniform(config, &mut arng)?;
            let s = ScheduledCorruption::random(&a, config.z.z_w(), 2, &mut arng, adversary_seed);
            (a, Box::new(s))
        }
        AdversaryId::FeedbackSymmetrize => {
            let pc = p.clone();
            let factory: EncoderFactory = Box::new(move |r| {
                let m = pc.field().random_vec(pc.message_len(), r);
                Box::new(FbEncoder::new(&pc, m)) as Box<dyn RoundEncoder>
            });
            let s = FeedbackSymmetrize::new(config.links, config.z, p.model(), factory, adversary_seed)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            (s.assignment().clone(), Box::new(s))
        }
        other => return Err(HarnessError::Config(format!("adversary {other} cannot attack the feedback scheme"))),
    };
    let mut ch = Channel::new(f, config.links, p.model(), assignment).map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut enc = FbEncoder::new(p, msg.clone());
    let scheme_err = |e: String| HarnessError::Scheme(e);
    let x1 = enc.encode(0, &[], &mut srng).map_err(scheme_err)?;
    let (y1, altered1) = match ch.transmit(&x1, adv.as_mut()) {
        Ok(rec) => (rec.received.clone(), rec.altered_links()),
        Err(e) => return Err(referee(trial, e, &ch)),
    };
    let x2 = enc.encode(1, std::slice::from_ref(&y1), &mut srng).map_err(scheme_err)?;
    let (y2, altered2) = match ch.transmit(&x2, adv.as_mut()) {
        Ok(rec) => (rec.received.clone(), rec.altered_links()),
        Err(e) => return Err(referee(trial, e, &ch)),
    };
    let trusted = fb_classify(p, &y1, &y2).unwrap_or_default();
    let verdict = match fb_decode(p, &y1, &y2) {
        Ok(d) if d.message == msg => Verdict::Success,
        Ok(_) => Verdict::WrongDecode,
        Err(_) => Verdict::Declared,
    };
    let altered: BTreeSet<usize> = altered1.union(&altered2).copied().collect();
    Ok(TrialOutcome {
        verdict,
        false_clique: trusted.iter().any(|l| altered1.contains(l)),
        honest_excluded: (0..config.links).any(|l| !altered.contains(&l) && !trusted.contains(&l)),
        honest_invariant: trusted.len() + config.z.z_w() >= config.links,
        decoded_rounds: None,
    })
}

fn fbsec_trial(config: &ExperimentConfig, p: &SecParams, trial: u64) -> Result<TrialOutcome, HarnessError> {
    let TrialRngs {
        scheme: mut srng,
        adversary: mut arng,
        adversary_seed,
    } = rngs(config, trial);
    let f = p.field();
    let msgs: Vec<Vec<Symbol>> = (0..p.rounds()).map(|_| f.random_vec(p.rate(), &mut srng)).collect();
    let assignment = uniform(config, &mut arng)?;
    let mut adv: Box<dyn Strategy> = match config.adversary {
        AdversaryId::None => Box::new(Passive),
        AdversaryId::RandomNoise => Box::new(RandomNoise::new(adversary_seed)),
        AdversaryId::Scheduled => Box::new(ScheduledCorruption::random(
            &assignment,
            config.z.z_w(),
            p.rounds(),
            &mut arng,
            adversary_seed,
        )),
        other => return Err(HarnessError::Config(format!("adversary {other} cannot attack the four-stage scheme"))),
    };
    let mut ch = Channel::new(f, config.links, p.model(), assignment).map_err(|e| HarnessError::Config(e.to_string()))?;
    let out = match fbsec_run(p, &msgs, &mut ch, adv.as_mut(), &mut srng) {
        Ok(o) => o,
        Err(FbError::Channel(e)) => return Err(referee(trial, e, &ch)),
        Err(e) => return Err(HarnessError::Scheme(e.to_string())),
    };
    let altered: BTreeSet<usize> = (0..ch.rounds())
        .filter_map(|r| ch.round(r))
        .flat_map(|rec| rec.altered_links())
        .collect();
    let (verdict, trusted, decoded) = match &out.bob {
        Ok(b) => {
            let wrong = b
                .rounds
                .iter()
                .zip(&msgs)
                .any(|(got, want)| got.as_ref().is_some_and(|g| g != want));
            let v = if wrong { Verdict::WrongDecode } else { Verdict::Success };
            (v, b.trusted.clone(), Some(b.decoded_rounds()))
        }
        Err(e) if e.is_declared() => (Verdict::Declared, BTreeSet::new(), None),
        Err(e) => return Err(HarnessError::Scheme(e.to_string())),
    };
    Ok(TrialOutcome {
        verdict,
        false_clique: trusted.iter().any(|l| out.false_links.contains(l)),
        honest_excluded: (0..config.links).any(|l| !altered.contains(&l) && !trusted.contains(&l)),
        honest_invariant: decoded.is_some_and(|d| d + config.z.z_w() >= p.rounds()),
        decoded_rounds: decoded,
    })
}

#[cfg(test)]
mod tests {
    use super::super::config::SCHEMA_VERSION;
    use super::*;
    use crate::channel::AdversaryVector;

    fn cfg(scenario: &str, c: usize, z: (usize, usize, usize), scheme: SchemeId, adv: AdversaryId) -> ExperimentConfig {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.into(),
            links: c,
            z: AdversaryVector::new(z.0, z.1, z.2),
            scheme,
            adversary: adv,
            field_bits: 8,
            blocklength: 4,
            trials: 20,
            seed: 9,
        }
    }

    #[test]
    fn null_adversary_never_errs() {
        let runs = [
            cfg("causal-nofb-additive-reliable", 4, (1, 0, 0), SchemeId::Pairwise, AdversaryId::None),
            cfg("causal-nofb-overwrite-secret", 5, (0, 1, 1), SchemeId::PairwiseSecret, AdversaryId::None),
            cfg("causal-fb-additive-reliable", 3, (1, 1, 0), SchemeId::Feedback, AdversaryId::None),
            cfg("causal-fb-overwrite-secret", 3, (0, 1, 1), SchemeId::Fbsec, AdversaryId::None),
        ];
        for c in runs {
            let s = run_trials(&c).unwrap();
            assert_eq!(s.successes, s.trials, "{}", c.scheme);
            assert_eq!(s.honest_excluded, 0);
        }
    }

    #[test]
    fn counts_add_up_and_runs_repeat() {
        let c = cfg("causal-fb-additive-secret", 4, (1, 1, 1), SchemeId::Fbsec, AdversaryId::Scheduled);
        let a = run_trials(&c).unwrap();
        assert_eq!(a.successes + a.wrong_decodes + a.declared_errors, a.trials);
        assert!(a.min_decoded_rounds.unwrap() >= 2);
        let b = run_trials(&c).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn strong_regime_needs_a_converse_attack() {
        let c = cfg("causal-nofb-additive-reliable", 3, (2, 0, 0), SchemeId::Pairwise, AdversaryId::RandomNoise);
        assert!(matches!(prepare(&c), Err(HarnessError::Config(_))));
        let c = ExperimentConfig {
            adversary: AdversaryId::Symmetrize,
            ..c
        };
        assert!(prepare(&c).is_ok());
    }
}
