//! Exact leakage measurement.
//!
//! Enumeration walks every (message, key) outcome and builds the joint
//! distribution of message and view with integer counts. Independence is
//! decided on the counts; mutual information is only turned into a float
//! at the end, and values below [`MI_ZERO`] are reported as zero. The rank
//! route applies to views that are affine in uniform field symbols, where
//! `I(M; V) = (rank[A B] - rank[B]) log2 q`.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SCHEMA_VERSION;
use super::HarnessError;
use crate::channel::{AdversaryVector, JamModel, LinkAssignment};
use crate::codes::{augmented_system, Matrix};
use crate::field::{Field, Symbol};
use crate::hashing::HashKey;
use crate::scheme_fb::SecParams;
use crate::scheme_noffb::{encode_with, payload_rows, PairwiseParams};

/// Largest outcome count enumeration will attempt.
pub const MAX_OUTCOMES: u128 = 1 << 24;

/// Mutual information below this many bits is reported as zero.
pub const MI_ZERO: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViewScope {
    /// Only the coded payload on each observed link.
    Payload,
    /// Everything on the observed links, hash keys and digests included.
    FullLink,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetLeakage {
    pub set: Vec<usize>,
    pub label: String,
    pub mi_bits: f64,
    /// Exact independence of message and view, decided on integer counts.
    pub independent: bool,
    pub h_message_bits: f64,
    pub h_view_bits: f64,
    pub outcomes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub schema_version: u32,
    pub target: String,
    pub method: String,
    pub sets: Vec<SetLeakage>,
    pub max_mi_bits: f64,
}

impl LeakageReport {
    fn new(target: String, method: &str, sets: Vec<SetLeakage>) -> Self {
        let max_mi_bits = sets.iter().map(|s| s.mi_bits).fold(0.0, f64::max);
        Self {
            schema_version: SCHEMA_VERSION,
            target,
            method: method.into(),
            sets,
            max_mi_bits,
        }
    }

    pub fn all_independent(&self) -> bool {
        self.sets.iter().all(|s| s.independent)
    }
}

fn outcome_count(alphabets: &[&[Vec<Symbol>]]) -> Result<u64, HarnessError> {
    let mut total: u128 = 1;
    for a in alphabets.iter().flat_map(|x| x.iter()) {
        total = total.saturating_mul(a.len() as u128);
        if total > MAX_OUTCOMES {
            return Err(HarnessError::Leakage(format!(
                "more than {MAX_OUTCOMES} outcomes; refusing to enumerate"
            )));
        }
    }
    Ok(total as u64)
}

/// Step a mixed-radix counter; false once it wraps around.
fn advance(idx: &mut [usize], alphabets: &[Vec<Symbol>]) -> bool {
    for (i, a) in idx.iter_mut().zip(alphabets) {
        *i += 1;
        if *i < a.len() {
            return true;
        }
        *i = 0;
    }
    false
}

fn entropy(counts: impl Iterator<Item = u64>, total: u64) -> f64 {
    let t = total as f64;
    counts
        .map(|c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum()
}

/// Enumerate all outcomes with uniform message and key coordinates drawn
/// from the given alphabets. `view` returns one row per position and each
/// set selects the positions the eavesdropper sees.
pub fn enumerate_leakage<F>(
    messages: &[Vec<Symbol>],
    keys: &[Vec<Symbol>],
    sets: &[(Vec<usize>, String)],
    view: F,
) -> Result<Vec<SetLeakage>, HarnessError>
where
    F: Fn(&[Symbol], &[Symbol]) -> Result<Vec<Vec<Symbol>>, String> + Sync,
{
    let total = outcome_count(&[messages, keys])?;
    if messages.iter().chain(keys).any(|a| a.is_empty()) {
        return Err(HarnessError::Leakage("empty alphabet".into()));
    }
    sets.par_iter()
        .map(|(set, label)| {
            let mut joint: HashMap<(usize, Vec<Symbol>), u64> = HashMap::new();
            let mut m_idx = vec![0usize; messages.len()];
            let mut m_code = 0usize;
            loop {
                let m: Vec<Symbol> = m_idx.iter().zip(messages).map(|(&i, a)| a[i]).collect();
                let mut k_idx = vec![0usize; keys.len()];
                loop {
                    let k: Vec<Symbol> = k_idx.iter().zip(keys).map(|(&i, a)| a[i]).collect();
                    let rows = view(&m, &k).map_err(HarnessError::Leakage)?;
                    let mut v = Vec::new();
                    for &p in set {
                        let row = rows
                            .get(p)
                            .ok_or_else(|| HarnessError::Leakage(format!("view has no position {p}")))?;
                        v.extend_from_slice(row);
                    }
                    *joint.entry((m_code, v)).or_default() += 1;
                    if !advance(&mut k_idx, keys) {
                        break;
                    }
                }
                m_code += 1;
                if !advance(&mut m_idx, messages) {
                    break;
                }
            }
            let mut pm: HashMap<usize, u64> = HashMap::new();
            let mut pv: HashMap<&Vec<Symbol>, u64> = HashMap::new();
            for ((m, v), &c) in &joint {
                *pm.entry(*m).or_default() += c;
                *pv.entry(v).or_default() += c;
            }
            let t = total as u128;
            let independent = joint.len() == pm.len() * pv.len()
                && joint
                    .iter()
                    .all(|((m, v), &c)| c as u128 * t == pm[m] as u128 * pv[v] as u128);
            let mi: f64 = if independent {
                0.0
            } else {
                joint
                    .iter()
                    .map(|((m, v), &c)| {
                        let ratio = (c as f64 * total as f64) / (pm[m] as f64 * pv[v] as f64);
                        c as f64 / total as f64 * ratio.log2()
                    })
                    .sum()
            };
            Ok(SetLeakage {
                set: set.clone(),
                label: label.clone(),
                mi_bits: if mi < MI_ZERO { 0.0 } else { mi },
                independent,
                h_message_bits: entropy(pm.values().copied(), total),
                h_view_bits: entropy(pv.values().copied(), total),
                outcomes: total,
            })
        })
        .collect()
}

/// Mutual information between uniform message and the view of an affine
/// map of uniform message and key symbols.
pub fn rank_leakage<F>(f: &Field, n_msg: usize, n_key: usize, view: F) -> Result<f64, HarnessError>
where
    F: Fn(&[Symbol], &[Symbol]) -> Result<Vec<Symbol>, String>,
{
    let zero_m = vec![0; n_msg];
    let zero_k = vec![0; n_key];
    let c0 = view(&zero_m, &zero_k).map_err(HarnessError::Leakage)?;
    if c0.is_empty() || n_msg == 0 {
        return Ok(0.0);
    }
    let column = |v: Vec<Symbol>| -> Vec<Symbol> { v.iter().zip(&c0).map(|(&a, &b)| f.sub(a, b)).collect() };
    let mut a_cols = Vec::with_capacity(n_msg);
    for i in 0..n_msg {
        let mut m = zero_m.clone();
        m[i] = 1;
        a_cols.push(column(view(&m, &zero_k).map_err(HarnessError::Leakage)?));
    }
    let mut b_cols = Vec::with_capacity(n_key);
    for j in 0..n_key {
        let mut k = zero_k.clone();
        k[j] = 1;
        b_cols.push(column(view(&zero_m, &k).map_err(HarnessError::Leakage)?));
    }
    let rows = c0.len();
    let as_matrix = |cols: &[Vec<Symbol>]| -> Result<usize, HarnessError> {
        if cols.is_empty() {
            return Ok(0);
        }
        let data: Vec<Symbol> = (0..rows).flat_map(|r| cols.iter().map(move |c| c[r])).collect();
        let m = Matrix::from_vec(rows, cols.len(), data).map_err(|e| HarnessError::Leakage(e.to_string()))?;
        Ok(m.rank(f))
    };
    let mut ab = a_cols;
    ab.extend(b_cols.iter().cloned());
    let gap = as_matrix(&ab)? - as_matrix(&b_cols)?;
    Ok(gap as f64 * f.bits() as f64)
}

fn field_alphabet(f: &Field) -> Result<Vec<Symbol>, HarnessError> {
    if f.order() > MAX_OUTCOMES {
        return Err(HarnessError::Leakage("field too large to enumerate".into()));
    }
    Ok((0..f.order() as Symbol).collect())
}

/// Every `k`-subset of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// One-bit one-time pad, with or without its key.
pub fn otp_leakage(keyed: bool) -> Result<LeakageReport, HarnessError> {
    let bit = vec![0, 1];
    let keys = if keyed { vec![bit.clone()] } else { vec![] };
    let sets = vec![(vec![0], "ciphertext".to_string())];
    let r = enumerate_leakage(&[bit], &keys, &sets, |m, k| Ok(vec![vec![m[0] ^ k.first().copied().unwrap_or(0)]]))?;
    Ok(LeakageReport::new(
        format!("otp keyed={keyed}"),
        "enumeration",
        r,
    ))
}

/// Leakage of the pairwise code to every set of `z_r` links.
pub fn pairwise_leakage(params: &PairwiseParams, scope: ViewScope) -> Result<LeakageReport, HarnessError> {
    let f = params.field().clone();
    let z_r = params.z().z_r();
    let target = format!(
        "pairwise C={} z={} mix_keys={} GF(2^{}) {:?}",
        params.links(),
        params.z(),
        params.mix_keys(),
        f.bits(),
        scope
    );
    if z_r == 0 {
        return Ok(LeakageReport::new(target, "enumeration", Vec::new()));
    }
    let alpha = field_alphabet(&f)?;
    let nonzero: Vec<Symbol> = alpha[1..].to_vec();
    let l = params.payload_len();
    let n_mix = params.mix_keys() * l;
    let messages = vec![alpha.clone(); params.message_len()];
    let mut keys = vec![alpha; n_mix];
    if scope == ViewScope::FullLink {
        keys.extend(std::iter::repeat_n(nonzero, params.links() * params.hash_dim()));
    }
    let sets: Vec<(Vec<usize>, String)> = subsets(params.links(), z_r)
        .into_iter()
        .map(|s| (s.clone(), format!("{s:?}")))
        .collect();
    let r = enumerate_leakage(&messages, &keys, &sets, |m, k| {
        let (mix, hk) = k.split_at(n_mix);
        match scope {
            ViewScope::Payload => {
                let blocks: Vec<Symbol> = m.iter().chain(mix).copied().collect();
                payload_rows(params, &blocks).map_err(|e| e.to_string())
            }
            ViewScope::FullLink => {
                let hash_keys = hk
                    .chunks(params.hash_dim())
                    .map(|c| HashKey::new(&f, c.to_vec()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| e.to_string())?;
                encode_with(params, m, mix, &hash_keys).map_err(|e| e.to_string())
            }
        }
    })?;
    Ok(LeakageReport::new(target, "enumeration", r))
}

/// The stacked system `[G_Z ; I | O]` for eavesdrop set `set`: generator
/// rows of the observed links over unit rows pinning the message blocks.
/// Invertible exactly when the message and the observed rows determine
/// the keys.
pub fn secrecy_stack(params: &PairwiseParams, set: &[usize]) -> Result<Matrix, HarnessError> {
    let k = params.k();
    let msg_blocks = k - params.mix_keys();
    let g = params.generator().select_rows(set);
    let pinned: Vec<usize> = (0..msg_blocks).collect();
    augmented_system(&g, &pinned).map_err(|e| HarnessError::Leakage(e.to_string()))
}

/// One stage-1/2 round of the four-stage scheme as seen by an eavesdropper
/// on `readable`: the symbols on those links plus the extracted keys it can
/// compute itself (those from links it reads).
fn round_view(
    params: &SecParams,
    readable: &BTreeSet<usize>,
    corrupted: &[usize],
    m: &[Symbol],
    k: &[Symbol],
) -> Result<Vec<Symbol>, String> {
    let j = corrupted.len();
    let (keys, rest) = k.split_at(params.explicit_keys(j));
    let (ext, fresh) = rest.split_at(params.extracted_keys(j));
    let x = params
        .encode_round(corrupted, m, keys, ext, fresh)
        .map_err(|e| e.to_string())?;
    let mut v: Vec<Symbol> = readable.iter().map(|&l| x[l]).collect();
    for (p, l) in corrupted.iter().enumerate() {
        if readable.contains(l) && p < ext.len() {
            v.push(ext[p]);
        }
    }
    Ok(v)
}

/// Every disjoint placement of `z` on `links` links.
pub fn all_assignments(links: usize, z: &AdversaryVector) -> Vec<LinkAssignment> {
    let mut out = Vec::new();
    for rw in subsets(links, z.rw) {
        let rest: Vec<usize> = (0..links).filter(|l| !rw.contains(l)).collect();
        for ro_i in subsets(rest.len(), z.ro) {
            let ro: Vec<usize> = ro_i.iter().map(|&i| rest[i]).collect();
            let rest2: Vec<usize> = rest.iter().copied().filter(|l| !ro.contains(l)).collect();
            for wo_i in subsets(rest2.len(), z.wo) {
                out.push(LinkAssignment {
                    rw: rw.iter().copied().collect(),
                    ro: ro.iter().copied().collect(),
                    wo: wo_i.iter().map(|&i| rest2[i]).collect(),
                });
            }
        }
    }
    out
}

/// Every ordered list of distinct writable links of length at most `z_w`.
pub fn reachable_states(a: &LinkAssignment, z_w: usize) -> Vec<Vec<usize>> {
    let writable: Vec<usize> = a.writable().into_iter().collect();
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..z_w {
        let mut next = Vec::new();
        for s in &frontier {
            for &l in &writable {
                if !s.contains(&l) {
                    let mut t: Vec<usize> = s.clone();
                    t.push(l);
                    next.push(t);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub assignment: LinkAssignment,
    pub corrupted: Vec<usize>,
    /// Message-bearing symbols the eavesdropper observes this round.
    pub observed: usize,
    /// Key symbols mixed in that the eavesdropper does not know.
    pub hidden_keys: usize,
    pub rank_mi_bits: f64,
    pub enumerated: Option<SetLeakage>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FbsecSweep {
    pub schema_version: u32,
    pub links: usize,
    pub z: AdversaryVector,
    pub model: JamModel,
    pub field_bits: u32,
    pub states: Vec<StateReport>,
    pub max_mi_bits: f64,
    /// `hidden_keys >= observed` in every state.
    pub key_count_ok: bool,
    /// `hidden_keys == observed` in every state.
    pub key_count_tight: bool,
}

/// Per-round leakage of the four-stage scheme in every reachable
/// corruption state of every link placement. Each state is checked by
/// rank; states with at most `enumerate_limit` outcomes are also
/// enumerated.
pub fn fbsec_state_sweep(params: &SecParams, enumerate_limit: u64) -> Result<FbsecSweep, HarnessError> {
    let f = params.field();
    let z = params.z();
    let alpha = field_alphabet(f)?;
    let mut states = Vec::new();
    for a in all_assignments(params.links(), &z) {
        let readable = a.readable();
        for corrupted in reachable_states(&a, z.z_w()) {
            let j = corrupted.len();
            let n_key = params.explicit_keys(j) + params.extracted_keys(j) + j;
            let view = |m: &[Symbol], k: &[Symbol]| round_view(params, &readable, &corrupted, m, k);
            let rank_mi_bits = rank_leakage(f, params.rate(), n_key, view)?;
            let observed = readable.iter().filter(|l| !corrupted.contains(l)).count();
            let unread_extracted = if params.model() == JamModel::Additive {
                corrupted.iter().filter(|l| !readable.contains(l)).count()
            } else {
                0
            };
            let hidden_keys = params.explicit_keys(j) + unread_extracted;
            let outcomes = (alpha.len() as u128).saturating_pow((params.rate() + n_key) as u32);
            let enumerated = if outcomes <= enumerate_limit as u128 {
                let sets = vec![(vec![0], format!("{corrupted:?}"))];
                let r = enumerate_leakage(&vec![alpha.clone(); params.rate()], &vec![alpha.clone(); n_key], &sets, |m, k| {
                    view(m, k).map(|v| vec![v])
                })?;
                r.into_iter().next()
            } else {
                None
            };
            states.push(StateReport {
                assignment: a.clone(),
                corrupted,
                observed,
                hidden_keys,
                rank_mi_bits,
                enumerated,
            });
        }
    }
    let max_mi_bits = states
        .iter()
        .flat_map(|s| std::iter::once(s.rank_mi_bits).chain(s.enumerated.as_ref().map(|e| e.mi_bits)))
        .fold(0.0, f64::max);
    Ok(FbsecSweep {
        schema_version: SCHEMA_VERSION,
        links: params.links(),
        z,
        model: params.model(),
        field_bits: f.bits(),
        key_count_ok: states.iter().all(|s| s.hidden_keys >= s.observed),
        key_count_tight: states.iter().all(|s| s.hidden_keys == s.observed),
        states,
        max_mi_bits,
    })
}

/// Joint leakage of two consecutive rounds around a new corruption: the
/// state is `before` in the first round, `new` is corrupted (additive noise
/// `1`) in that round and the second round runs in state `before + [new]`.
/// The view covers both rounds on `readable`.
pub fn fbsec_pair_leakage(
    params: &SecParams,
    readable: &BTreeSet<usize>,
    before: &[usize],
    new: usize,
) -> Result<SetLeakage, HarnessError> {
    let f = params.field().clone();
    let alpha = field_alphabet(&f)?;
    let (r, j) = (params.rate(), before.len());
    let mut after = before.to_vec();
    after.push(new);
    let sizes = [
        params.explicit_keys(j),
        params.extracted_keys(j),
        j,
        params.explicit_keys(j + 1),
        j + 1,
    ];
    let n_key: usize = sizes.iter().sum();
    let messages = vec![alpha.clone(); 2 * r];
    let keys = vec![alpha; n_key];
    let sets = vec![(vec![0], format!("{before:?} then {new}"))];
    let out = enumerate_leakage(&messages, &keys, &sets, |m, k| {
        let (m0, m1) = m.split_at(r);
        let mut rest = k;
        let mut take = |n: usize| {
            let (a, b) = rest.split_at(n);
            rest = b;
            a
        };
        let (k0, e0, fr0, k1, fr1) = (take(sizes[0]), take(sizes[1]), take(sizes[2]), take(sizes[3]), take(sizes[4]));
        let x0 = params.encode_round(before, m0, k0, e0, fr0).map_err(|e| e.to_string())?;
        let y0: Vec<Symbol> = (0..params.links())
            .map(|l| if after.contains(&l) { f.add(x0[l], 1) } else { x0[l] })
            .collect();
        let e1: Vec<Symbol> = match params.model() {
            JamModel::Additive => after.iter().map(|&l| y0[l]).collect(),
            JamModel::Overwrite => Vec::new(),
        };
        let x1 = params.encode_round(&after, m1, k1, &e1, fr1).map_err(|e| e.to_string())?;
        let mut v: Vec<Symbol> = readable.iter().map(|&l| x0[l]).collect();
        for (p, l) in before.iter().enumerate() {
            if readable.contains(l) && p < e0.len() {
                v.push(e0[p]);
            }
        }
        v.extend(readable.iter().map(|&l| x1[l]));
        Ok(vec![v])
    })?;
    Ok(out.into_iter().next().expect("one set"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_time_pad_exact() {
        let with = otp_leakage(true).unwrap();
        assert_eq!(with.max_mi_bits, 0.0);
        assert!(with.all_independent());
        let without = otp_leakage(false).unwrap();
        assert_eq!(without.max_mi_bits, 1.0);
        assert!(!without.all_independent());
    }

    #[test]
    fn refuses_huge_spaces() {
        let big = vec![(0..256).collect::<Vec<Symbol>>(); 4];
        let r = enumerate_leakage(&big, &[], &[(vec![0], String::new())], |m, _| Ok(vec![m.to_vec()]));
        assert!(matches!(r, Err(HarnessError::Leakage(_))));
    }

    #[test]
    fn rank_route_matches_enumeration_on_otp_pairs() {
        let f = Field::new(2).unwrap();
        // view = (m0 + k, m1): leaks exactly m1, i.e. 2 bits.
        let view = |m: &[Symbol], k: &[Symbol]| Ok(vec![f.add(m[0], k[0]), m[1]]);
        assert_eq!(rank_leakage(&f, 2, 1, view).unwrap(), 2.0);
        let a: Vec<Symbol> = (0..4).collect();
        let e = enumerate_leakage(&[a.clone(), a.clone()], &[a], &[(vec![0], String::new())], |m, k| {
            view(m, k).map(|v| vec![v])
        })
        .unwrap();
        assert!((e[0].mi_bits - 2.0).abs() < 1e-12);
    }

    #[test]
    fn subsets_and_assignments_count() {
        assert_eq!(subsets(5, 2).len(), 10);
        assert_eq!(subsets(2, 3).len(), 0);
        assert_eq!(all_assignments(4, &AdversaryVector::new(1, 1, 1)).len(), 24);
        let a = &all_assignments(4, &AdversaryVector::new(1, 1, 1))[0];
        assert_eq!(reachable_states(a, 2).len(), 1 + 2 + 2);
    }

    #[test]
    fn zero_read_set_reports_nothing() {
        let f = Field::new(4).unwrap();
        let p = PairwiseParams::new(&f, 3, AdversaryVector::new(0, 0, 1), JamModel::Additive, 1).unwrap();
        let r = pairwise_leakage(&p, ViewScope::Payload).unwrap();
        assert!(r.sets.is_empty());
        assert_eq!(r.max_mi_bits, 0.0);
    }
}
