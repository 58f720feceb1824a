//! Monte-Carlo and exhaustive checks of the two matrix-hash bounds:
//! substitution `Pr[A' rho = A rho] <= 1/q` and guessing
//! `Pr[A rho = theta'] <= N/q`, with `A` uniform, `rho` uniform nonzero and
//! `A'`, `theta'` independent of both.

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SCHEMA_VERSION;
use super::stats::{wilson, Z95};
use super::HarnessError;
use crate::field::{Field, Symbol};
use crate::hashing::{matrix_hash, HashKey};
use crate::rng::scheme_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HashLemma {
    Collision,
    Guess,
}

impl HashLemma {
    /// `1/q` for substitution, `N/q` for guessing.
    pub fn bound(&self, bits: u32, n: usize) -> f64 {
        let q = 2f64.powi(bits as i32);
        match self {
            Self::Collision => 1.0 / q,
            Self::Guess => n as f64 / q,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaStats {
    pub schema_version: u32,
    pub lemma: HashLemma,
    pub field_bits: u32,
    pub dim: usize,
    pub trials: u64,
    pub hits: u64,
    pub rate: f64,
    pub bound: f64,
    /// Standard deviation of the empirical rate if it sat exactly at the bound.
    pub sigma: f64,
    pub ci95: (f64, f64),
}

impl LemmaStats {
    /// Empirical rate within three standard deviations of the bound.
    pub fn within(&self, sigmas: f64) -> bool {
        self.rate <= self.bound + sigmas * self.sigma
    }
}

fn hash(f: &Field, a: &[Symbol], rho: &HashKey) -> Vec<Symbol> {
    matrix_hash(f, a, rho).expect("payload fits the key").theta
}

pub fn lemma_trials(lemma: HashLemma, bits: u32, n: usize, trials: u64, seed: u64) -> Result<LemmaStats, HarnessError> {
    let f = Field::new(bits).map_err(|e| HarnessError::Config(e.to_string()))?;
    if n == 0 || trials == 0 {
        return Err(HarnessError::Config("dimension and trials must be positive".into()));
    }
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = scheme_rng(seed, t);
            let a = f.random_vec(n * n, &mut rng);
            let rho = HashKey::random(&f, n, &mut rng).expect("positive dimension");
            let theta = hash(&f, &a, &rho);
            let hit = match lemma {
                HashLemma::Collision => hash(&f, &f.random_vec(n * n, &mut rng), &rho) == theta,
                HashLemma::Guess => f.random_vec(n, &mut rng) == theta,
            };
            u64::from(hit)
        })
        .sum();
    let bound = lemma.bound(bits, n);
    Ok(LemmaStats {
        schema_version: SCHEMA_VERSION,
        lemma,
        field_bits: bits,
        dim: n,
        trials,
        hits,
        rate: hits as f64 / trials as f64,
        bound,
        sigma: (bound * (1.0 - bound) / trials as f64).sqrt(),
        ci95: wilson(hits, trials, Z95),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaExact {
    pub lemma: HashLemma,
    pub field_bits: u32,
    pub dim: usize,
    /// Probability with the opponent's value uniform.
    pub average: Rational64,
    /// Largest probability over every fixed `rho` and fixed opponent value.
    pub worst: Rational64,
    pub bound: Rational64,
}

impl LemmaExact {
    pub fn holds(&self) -> bool {
        self.average <= self.bound && self.worst <= self.bound
    }
}

fn all_vectors(q: u64, len: usize) -> Vec<Vec<Symbol>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..q).map(move |s| {
                    let mut w = v.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    out
}

/// Exhaustive evaluation over all `A`, nonzero `rho` and opponent values.
pub fn lemma_exact(lemma: HashLemma, bits: u32, n: usize) -> Result<LemmaExact, HarnessError> {
    let f = Field::new(bits).map_err(|e| HarnessError::Config(e.to_string()))?;
    let q = f.order() as u64;
    if n == 0 || (bits as usize) * n * n > 16 {
        return Err(HarnessError::Config("exhaustive check needs q^(N^2) <= 2^16".into()));
    }
    let mats = all_vectors(q, n * n);
    let keys: Vec<HashKey> = all_vectors(q, n)
        .into_iter()
        .filter_map(|r| HashKey::new(&f, r).ok())
        .collect();
    let opponents = match lemma {
        HashLemma::Collision => mats.clone(),
        HashLemma::Guess => all_vectors(q, n),
    };
    let mut total_hits: i64 = 0;
    let mut worst: i64 = 0;
    for rho in &keys {
        let digests: Vec<Vec<Symbol>> = mats.iter().map(|a| hash(&f, a, rho)).collect();
        for o in &opponents {
            let target = match lemma {
                HashLemma::Collision => hash(&f, o, rho),
                HashLemma::Guess => o.clone(),
            };
            let hits = digests.iter().filter(|d| **d == target).count() as i64;
            total_hits += hits;
            worst = worst.max(hits);
        }
    }
    let (m, k, o) = (mats.len() as i64, keys.len() as i64, opponents.len() as i64);
    let bound = match lemma {
        HashLemma::Collision => Rational64::new(1, q as i64),
        HashLemma::Guess => Rational64::new(n as i64, q as i64),
    };
    Ok(LemmaExact {
        lemma,
        field_bits: bits,
        dim: n,
        average: Rational64::new(total_hits, m * k * o),
        worst: Rational64::new(worst, m),
        bound,
    })
}
