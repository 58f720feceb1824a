//! Quick invariant suite behind `mpath selftest`.

use serde::{Deserialize, Serialize};

use super::config::{AdversaryId, ExperimentConfig, SchemeId, SCHEMA_VERSION};
use super::lemmas::{lemma_exact, lemma_trials, HashLemma};
use super::leakage::{otp_leakage, pairwise_leakage, ViewScope};
use super::run::run_trials;
use super::table::{default_golden_path, verify_capacity_table};
use super::HarnessError;
use crate::channel::{AdversaryVector, JamModel};
use crate::field::Field;
use crate::scheme_noffb::PairwiseParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub schema_version: u32,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

fn sim(scenario: &str, c: usize, z: AdversaryVector, scheme: SchemeId, adv: AdversaryId, bits: u32, len: usize, trials: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.into(),
        links: c,
        z,
        scheme,
        adversary: adv,
        field_bits: bits,
        blocklength: len,
        trials,
        seed,
    }
}

pub fn selftest(seed: u64) -> Result<SelftestReport, HarnessError> {
    let mut checks = Vec::new();

    let t = verify_capacity_table(&default_golden_path())?;
    checks.push(check(
        "capacity table matches golden file",
        t.passed(),
        format!("{} rows, {} mismatches", t.rows, t.mismatches.len()),
    ));

    for lemma in [HashLemma::Collision, HashLemma::Guess] {
        let e = lemma_exact(lemma, 1, 2)?;
        checks.push(check(
            &format!("{lemma:?} bound exact at q=2 N=2"),
            e.holds(),
            format!("average {} worst {} bound {}", e.average, e.worst, e.bound),
        ));
        let s = lemma_trials(lemma, 8, 4, 10_000, seed)?;
        checks.push(check(
            &format!("{lemma:?} Wilson interval consistent with bound"),
            s.ci95.0 <= s.bound,
            format!("{} hits of {}, bound {:.3e}", s.hits, s.trials, s.bound),
        ));
    }

    let keyed = otp_leakage(true)?;
    let bare = otp_leakage(false)?;
    checks.push(check(
        "one-time pad leakage is 0 with key and 1 without",
        keyed.max_mi_bits == 0.0 && bare.max_mi_bits == 1.0,
        format!("{} / {}", keyed.max_mi_bits, bare.max_mi_bits),
    ));

    let f = Field::new(3).map_err(|e| HarnessError::Config(e.to_string()))?;
    let p = PairwiseParams::secret(&f, 3, AdversaryVector::new(0, 1, 0), JamModel::Additive, 1)
        .map_err(|e| HarnessError::Scheme(e.to_string()))?;
    let r = pairwise_leakage(&p, ViewScope::Payload)?;
    checks.push(check(
        "secret pairwise payload leaks nothing",
        r.max_mi_bits == 0.0 && r.all_independent(),
        format!("max {} bits over {} sets", r.max_mi_bits, r.sets.len()),
    ));

    let c = sim(
        "causal-nofb-additive-reliable",
        7,
        AdversaryVector::new(1, 2, 1),
        SchemeId::Pairwise,
        AdversaryId::RandomNoise,
        16,
        2,
        200,
        seed,
    );
    let s = run_trials(&c)?;
    let bound = 49.0 / 65536.0;
    checks.push(check(
        "pairwise error Wilson interval consistent with C^2/q",
        s.error_ci95.0 <= bound && s.honest_invariant_failures == 0,
        format!("{} errors of {}", s.errors(), s.trials),
    ));

    let c = sim(
        "causal-nofb-additive-reliable",
        3,
        AdversaryVector::new(2, 0, 0),
        SchemeId::Pairwise,
        AdversaryId::Symmetrize,
        8,
        1,
        2000,
        seed,
    );
    let s = run_trials(&c)?;
    let theory = 0.5 * (1.0 - 2f64.powi(-8));
    checks.push(check(
        "symmetrization Wilson interval contains 1/2 (1 - 2^-nR)",
        s.error_ci95.0 <= theory && theory <= s.error_ci95.1,
        format!("error {:.4} in [{:.4}, {:.4}]", s.error_rate, s.error_ci95.0, s.error_ci95.1),
    ));

    Ok(SelftestReport {
        schema_version: SCHEMA_VERSION,
        checks,
    })
}
