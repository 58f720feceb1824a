use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SCHEMA_VERSION};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Success,
    WrongDecode,
    Declared,
}

/// What one trial did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub verdict: Verdict,
    /// Bob trusted a link the adversary altered.
    pub false_clique: bool,
    /// Bob distrusted a link nobody altered.
    pub honest_excluded: bool,
    /// The scheme's structural guarantee held: clique or trusted set of at
    /// least `C - z_w` links, or at least `N - z_w` decoded rounds.
    pub honest_invariant: bool,
    pub decoded_rounds: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub trials: u64,
    pub successes: u64,
    pub wrong_decodes: u64,
    pub declared_errors: u64,
    pub false_clique: u64,
    pub honest_excluded: u64,
    pub honest_invariant_failures: u64,
    pub error_rate: f64,
    pub error_ci95: (f64, f64),
    pub min_decoded_rounds: Option<usize>,
}

impl TrialStats {
    pub fn from_outcomes(config: &ExperimentConfig, outcomes: &[TrialOutcome]) -> Self {
        let count = |p: &dyn Fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| p(o)).count() as u64;
        let trials = outcomes.len() as u64;
        let successes = count(&|o| o.verdict == Verdict::Success);
        let errors = trials - successes;
        Self {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            trials,
            successes,
            wrong_decodes: count(&|o| o.verdict == Verdict::WrongDecode),
            declared_errors: count(&|o| o.verdict == Verdict::Declared),
            false_clique: count(&|o| o.false_clique),
            honest_excluded: count(&|o| o.honest_excluded),
            honest_invariant_failures: count(&|o| !o.honest_invariant),
            error_rate: if trials == 0 { 0.0 } else { errors as f64 / trials as f64 },
            error_ci95: wilson(errors, trials, Z95),
            min_decoded_rounds: outcomes.iter().filter_map(|o| o.decoded_rounds).min(),
        }
    }

    pub fn errors(&self) -> u64 {
        self.wrong_decodes + self.declared_errors
    }
}
