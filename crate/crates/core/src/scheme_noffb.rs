//! Pairwise-hashing code for causal adversaries without feedback, and its
//! key-mixed variant for secrecy.
//!
//! Each link carries `[U_i | K_i | h_i1 .. h_iC]`: an `N^2`-symbol slice of
//! an MDS codeword, a nonzero hash key of length `N`, and the hash of every
//! link's payload under `K_i`. The decoder keeps the largest set of mutually
//! consistent links and erasure-decodes from it.

use num_rational::Rational64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{AdversaryVector, JamModel};
use crate::codes::{build_cauchy, erasure_decode, mds_encode, CodeError, ErasurePattern, Matrix};
use crate::field::{Field, Symbol};
use crate::hashing::{matrix_hash, verify_raw, HashError, HashKey};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairwiseError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("adversary z = {z} is in the strong regime for {model} jamming over {links} links")]
    StrongRegime {
        z: AdversaryVector,
        model: JamModel,
        links: usize,
    },
    #[error("malformed codeword: {0}")]
    Layout(String),
    #[error("largest consistent clique has {size} links, {needed} are needed")]
    CliqueTooSmall { size: usize, needed: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Hash(#[from] HashError),
}

/// Weak regime without feedback: additive `z_wo + 2 z_rw < C`, overwrite
/// `2 z_wo + 2 z_rw < C`.
pub fn is_weak(links: usize, z: &AdversaryVector, model: JamModel) -> bool {
    match model {
        JamModel::Additive => z.wo + 2 * z.rw < links,
        JamModel::Overwrite => 2 * z.wo + 2 * z.rw < links,
    }
}

#[derive(Clone, Debug)]
pub struct PairwiseParams {
    field: Field,
    links: usize,
    z: AdversaryVector,
    model: JamModel,
    hash_dim: usize,
    mix_keys: usize,
    generator: Matrix,
}

impl PairwiseParams {
    /// Reliability-only code. Rejects the strong regime.
    pub fn new(
        field: &Field,
        links: usize,
        z: AdversaryVector,
        model: JamModel,
        hash_dim: usize,
    ) -> Result<Self, PairwiseError> {
        if !is_weak(links, &z, model) {
            return Err(PairwiseError::StrongRegime { z, model, links });
        }
        Self::unchecked(field, links, z, model, hash_dim)
    }

    /// Same code without the regime check, for running it where it is
    /// expected to fail.
    pub fn unchecked(
        field: &Field,
        links: usize,
        z: AdversaryVector,
        model: JamModel,
        hash_dim: usize,
    ) -> Result<Self, PairwiseError> {
        z.check(links).map_err(|e| PairwiseError::Params(e.to_string()))?;
        if hash_dim == 0 {
            return Err(PairwiseError::Params("hash dimension must be positive".into()));
        }
        let k = links - z.rw - z.wo;
        if k == 0 {
            return Err(PairwiseError::Params(format!("no payload rows left for z = {z}")));
        }
        let generator = build_cauchy(field, links, k, 0)?.matrix;
        Ok(Self {
            field: field.clone(),
            links,
            z,
            model,
            hash_dim,
            mix_keys: 0,
            generator,
        })
    }

    /// Secrecy variant: `z_r` of the `k` message blocks are uniform keys.
    pub fn secret(
        field: &Field,
        links: usize,
        z: AdversaryVector,
        model: JamModel,
        hash_dim: usize,
    ) -> Result<Self, PairwiseError> {
        let mut p = Self::new(field, links, z, model, hash_dim)?;
        if p.k() <= z.z_r() {
            return Err(PairwiseError::Params(format!(
                "secret rate C - z_wo - z_ro - 2 z_rw is not positive for z = {z}"
            )));
        }
        p.mix_keys = z.z_r();
        Ok(p)
    }

    /// The secrecy layout with an explicit key count and no regime checks.
    pub fn with_mix_keys(mut self, keys: usize) -> Result<Self, PairwiseError> {
        if keys > self.k() {
            return Err(PairwiseError::Params(format!("{keys} keys exceed {} blocks", self.k())));
        }
        self.mix_keys = keys;
        Ok(self)
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

    pub fn hash_dim(&self) -> usize {
        self.hash_dim
    }

    /// Number of MDS message blocks, `C - z_rw - z_wo`.
    pub fn k(&self) -> usize {
        self.generator.cols()
    }

    pub fn mix_keys(&self) -> usize {
        self.mix_keys
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn payload_len(&self) -> usize {
        self.hash_dim * self.hash_dim
    }

    /// Symbols per link, `N^2 + N (C + 1)`.
    pub fn row_len(&self) -> usize {
        self.payload_len() + self.hash_dim * (self.links + 1)
    }

    pub fn blocklength_bits(&self) -> usize {
        self.row_len() * self.field.bits() as usize
    }

    /// Message symbols per codeword.
    pub fn message_len(&self) -> usize {
        (self.k() - self.mix_keys) * self.payload_len()
    }

    /// Rate counted over the payload segment only, in link units.
    pub fn payload_rate(&self) -> Rational64 {
        Rational64::from_integer((self.k() - self.mix_keys) as i64)
    }

    /// Rate including key and hash overhead.
    pub fn gross_rate(&self) -> Rational64 {
        Rational64::new(self.message_len() as i64, self.row_len() as i64)
    }
}

/// One link's row split into its parts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseCodeword {
    pub payload: Vec<Symbol>,
    pub key: Vec<Symbol>,
    pub hashes: Vec<Vec<Symbol>>,
}

impl PairwiseCodeword {
    pub fn parse(params: &PairwiseParams, row: &[Symbol]) -> Result<Self, PairwiseError> {
        if row.len() != params.row_len() {
            return Err(PairwiseError::Layout(format!(
                "row has {} symbols, expected {}",
                row.len(),
                params.row_len()
            )));
        }
        let n = params.hash_dim;
        let (payload, rest) = row.split_at(params.payload_len());
        let (key, hashes) = rest.split_at(n);
        Ok(Self {
            payload: payload.to_vec(),
            key: key.to_vec(),
            hashes: hashes.chunks(n).map(<[Symbol]>::to_vec).collect(),
        })
    }

    pub fn to_row(&self) -> Vec<Symbol> {
        let mut row = self.payload.clone();
        row.extend_from_slice(&self.key);
        for h in &self.hashes {
            row.extend_from_slice(h);
        }
        row
    }
}

/// MDS payload rows for a full block vector (message followed by any mixing
/// keys), `k * N^2` symbols.
pub fn payload_rows(params: &PairwiseParams, blocks: &[Symbol]) -> Result<Vec<Vec<Symbol>>, PairwiseError> {
    let l = params.payload_len();
    if blocks.len() != params.k() * l {
        return Err(PairwiseError::Params(format!(
            "{} symbols for {} blocks of {l}",
            blocks.len(),
            params.k()
        )));
    }
    let split: Vec<Vec<Symbol>> = blocks.chunks(l).map(<[Symbol]>::to_vec).collect();
    Ok(mds_encode(&params.field, &split, &params.generator)?)
}

/// Append keys and all pairwise hashes to the payload rows.
pub fn assemble(
    params: &PairwiseParams,
    payloads: &[Vec<Symbol>],
    keys: &[HashKey],
) -> Result<Vec<Vec<Symbol>>, PairwiseError> {
    if payloads.len() != params.links || keys.len() != params.links {
        return Err(PairwiseError::Params("one payload and one key per link".into()));
    }
    let mut rows = Vec::with_capacity(params.links);
    for key in keys {
        if key.dim() != params.hash_dim {
            return Err(PairwiseError::Params("key length differs from N".into()));
        }
        let hashes = payloads
            .iter()
            .map(|u| matrix_hash(&params.field, u, key).map(|h| h.theta))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(hashes);
    }
    Ok(payloads
        .iter()
        .zip(keys)
        .zip(rows)
        .map(|((u, k), hashes)| {
            PairwiseCodeword {
                payload: u.clone(),
                key: k.as_slice().to_vec(),
                hashes,
            }
            .to_row()
        })
        .collect())
}

/// Deterministic encoder: message, mixing keys and hash keys all given.
pub fn encode_with(
    params: &PairwiseParams,
    message: &[Symbol],
    mix: &[Symbol],
    keys: &[HashKey],
) -> Result<Vec<Vec<Symbol>>, PairwiseError> {
    if message.len() != params.message_len() {
        return Err(PairwiseError::Params(format!(
            "message has {} symbols, expected {}",
            message.len(),
            params.message_len()
        )));
    }
    if mix.len() != params.mix_keys * params.payload_len() {
        return Err(PairwiseError::Params("wrong number of mixing key symbols".into()));
    }
    for &s in message.iter().chain(mix) {
        params.field.check(s).map_err(CodeError::from)?;
    }
    let mut blocks = message.to_vec();
    blocks.extend_from_slice(mix);
    let payloads = payload_rows(params, &blocks)?;
    assemble(params, &payloads, keys)
}

pub fn pw_encode<R: Rng + ?Sized>(
    params: &PairwiseParams,
    message: &[Symbol],
    rng: &mut R,
) -> Result<Vec<Vec<Symbol>>, PairwiseError> {
    let mix = params.field.random_vec(params.mix_keys * params.payload_len(), rng);
    let keys = (0..params.links)
        .map(|_| HashKey::random(&params.field, params.hash_dim, rng))
        .collect::<Result<Vec<_>, _>>()?;
    encode_with(params, message, &mix, &keys)
}

/// Links as vertices, with a self-consistency flag and an edge wherever
/// both directed hash checks pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyGraph {
    pub self_ok: Vec<bool>,
    pub adj: Vec<Vec<bool>>,
}

impl ConsistencyGraph {
    pub fn from_edges(n: usize, self_ok: &[bool], edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in edges {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        Self {
            self_ok: self_ok.to_vec(),
            adj,
        }
    }

    pub fn len(&self) -> usize {
        self.self_ok.len()
    }

    pub fn is_empty(&self) -> bool {
        self.self_ok.is_empty()
    }

    pub fn is_clique(&self, set: &[usize]) -> bool {
        set.iter().all(|&v| self.self_ok[v])
            && set
                .iter()
                .enumerate()
                .all(|(i, &a)| set[i + 1..].iter().all(|&b| self.adj[a][b]))
    }
}

pub fn check_consistency(params: &PairwiseParams, rows: &[Vec<Symbol>]) -> Result<ConsistencyGraph, PairwiseError> {
    if rows.len() != params.links {
        return Err(PairwiseError::Layout(format!(
            "{} rows for {} links",
            rows.len(),
            params.links
        )));
    }
    let cw = rows
        .iter()
        .map(|r| PairwiseCodeword::parse(params, r))
        .collect::<Result<Vec<_>, _>>()?;
    let f = &params.field;
    let c = params.links;
    // ok[i][j]: link i's digest of link j's payload checks out under K_i.
    let mut ok = vec![vec![false; c]; c];
    for i in 0..c {
        for j in 0..c {
            ok[i][j] = verify_raw(f, &cw[j].payload, &cw[i].key, &cw[i].hashes[j])?;
        }
    }
    let self_ok = (0..c).map(|i| ok[i][i]).collect();
    let mut adj = vec![vec![false; c]; c];
    for i in 0..c {
        for j in 0..c {
            adj[i][j] = i != j && ok[i][j] && ok[j][i];
        }
    }
    Ok(ConsistencyGraph { self_ok, adj })
}

/// A maximum clique among self-consistent vertices; ties go to the
/// lexicographically smallest sorted vertex list.
pub fn largest_clique(g: &ConsistencyGraph) -> Vec<usize> {
    let candidates: Vec<usize> = (0..g.len()).filter(|&v| g.self_ok[v]).collect();
    let mut best: Vec<usize> = Vec::new();
    let mut current = Vec::new();
    extend_clique(g, &mut current, &candidates, &mut best);
    best
}

/// Depth-first search in increasing vertex order, so the first clique of a
/// given size found is the lexicographically smallest one.
fn extend_clique(g: &ConsistencyGraph, current: &mut Vec<usize>, candidates: &[usize], best: &mut Vec<usize>) {
    if current.len() > best.len() {
        *best = current.clone();
    }
    for (i, &v) in candidates.iter().enumerate() {
        if current.len() + (candidates.len() - i) <= best.len() {
            return;
        }
        let next: Vec<usize> = candidates[i + 1..].iter().copied().filter(|&u| g.adj[v][u]).collect();
        current.push(v);
        extend_clique(g, current, &next, best);
        current.pop();
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairwiseDecoded {
    pub message: Vec<Symbol>,
    pub clique: Vec<usize>,
    pub graph: ConsistencyGraph,
}

/// Decode to the full block vector (message plus any mixing keys).
pub fn decode_blocks(params: &PairwiseParams, rows: &[Vec<Symbol>]) -> Result<PairwiseDecoded, PairwiseError> {
    let graph = check_consistency(params, rows)?;
    let clique = largest_clique(&graph);
    if clique.len() < params.k() {
        return Err(PairwiseError::CliqueTooSmall {
            size: clique.len(),
            needed: params.k(),
        });
    }
    let l = params.payload_len();
    let received: Vec<Vec<Symbol>> = rows.iter().map(|r| r[..l].to_vec()).collect();
    let erased = ErasurePattern::new((0..params.links).filter(|v| !clique.contains(v)));
    let blocks = erasure_decode(&params.field, &received, &erased, &params.generator)?;
    Ok(PairwiseDecoded {
        message: blocks.concat(),
        clique,
        graph,
    })
}

/// Decode and strip mixing keys.
pub fn pw_decode(params: &PairwiseParams, rows: &[Vec<Symbol>]) -> Result<PairwiseDecoded, PairwiseError> {
    let mut d = decode_blocks(params, rows)?;
    d.message.truncate(params.message_len());
    Ok(d)
}

pub fn secret_encode<R: Rng + ?Sized>(
    params: &PairwiseParams,
    message: &[Symbol],
    rng: &mut R,
) -> Result<Vec<Vec<Symbol>>, PairwiseError> {
    if params.mix_keys != params.z.z_r() {
        return Err(PairwiseError::Params("parameters were not built for secrecy".into()));
    }
    pw_encode(params, message, rng)
}

pub fn secret_decode(params: &PairwiseParams, rows: &[Vec<Symbol>]) -> Result<Vec<Symbol>, PairwiseError> {
    Ok(pw_decode(params, rows)?.message)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(bits: u32, c: usize, z: (usize, usize, usize), n: usize) -> PairwiseParams {
        let f = Field::new(bits).unwrap();
        PairwiseParams::new(&f, c, AdversaryVector::new(z.0, z.1, z.2), JamModel::Additive, n).unwrap()
    }

    /// Every subset; the lexicographically smallest clique of the largest size.
    fn brute_force_clique(g: &ConsistencyGraph) -> Vec<usize> {
        let n = g.len();
        let mut best: Vec<usize> = Vec::new();
        for size in 1..=n {
            let mut found: Option<Vec<usize>> = None;
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                if g.is_clique(&set) && found.as_ref().is_none_or(|f| set < *f) {
                    found = Some(set);
                }
            }
            if let Some(s) = found {
                best = s;
            }
        }
        best
    }

    #[test]
    fn layout_length() {
        let p = params(8, 3, (1, 0, 0), 4);
        assert_eq!(p.row_len(), 16 + 4 * 4);
        assert_eq!(p.k(), 2);
        assert_eq!(p.blocklength_bits(), 32 * 8);
        assert_eq!(p.gross_rate(), Rational64::new(32, 32));
    }

    #[test]
    fn zero_message_keeps_nonzero_keys() {
        let p = params(8, 4, (1, 0, 0), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows = pw_encode(&p, &vec![0; p.message_len()], &mut rng).unwrap();
        for r in &rows {
            let cw = PairwiseCodeword::parse(&p, r).unwrap();
            assert!(cw.payload.iter().all(|&s| s == 0));
            assert!(cw.hashes.iter().flatten().all(|&s| s == 0));
            assert!(cw.key.iter().any(|&s| s != 0));
        }
    }

    #[test]
    fn round_trip_and_complete_graph() {
        let p = params(8, 4, (1, 0, 1), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m = p.field().random_vec(p.message_len(), &mut rng);
            let rows = pw_encode(&p, &m, &mut rng).unwrap();
            let d = pw_decode(&p, &rows).unwrap();
            assert_eq!(d.message, m);
            assert_eq!(d.clique, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn payload_flip_isolates_link() {
        let p = params(16, 4, (1, 0, 0), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = p.field().random_vec(p.message_len(), &mut rng);
        let mut rows = pw_encode(&p, &m, &mut rng).unwrap();
        rows[0][0] ^= 1;
        let g = check_consistency(&p, &rows).unwrap();
        assert!(!g.self_ok[0]);
        assert!((1..4).all(|j| !g.adj[0][j]));
        assert_eq!(pw_decode(&p, &rows).unwrap().message, m);
    }

    #[test]
    fn digest_flip_drops_one_edge() {
        let p = params(16, 4, (1, 0, 0), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = p.field().random_vec(p.message_len(), &mut rng);
        let mut rows = pw_encode(&p, &m, &mut rng).unwrap();
        // h_01 sits after U_0, K_0 and h_00.
        let off = p.payload_len() + 2 * p.hash_dim();
        rows[0][off] ^= 1;
        let g = check_consistency(&p, &rows).unwrap();
        assert!(!g.adj[0][1]);
        assert!(g.self_ok.iter().all(|&b| b));
        let edges = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).filter(|&(i, j)| i < j && g.adj[i][j]).count();
        assert_eq!(edges, 5);
    }

    #[test]
    fn disjoint_triangles_tie_break() {
        let g = ConsistencyGraph::from_edges(6, &[true; 6], &[(3, 4), (4, 5), (3, 5), (0, 1), (1, 2), (0, 2)]);
        assert_eq!(largest_clique(&g), vec![0, 1, 2]);
        let mut g = g;
        g.self_ok[1] = false;
        assert_eq!(largest_clique(&g), vec![3, 4, 5]);
    }

    #[test]
    fn regime_and_secrecy_checks() {
        let f = Field::new(8).unwrap();
        let strong = PairwiseParams::new(&f, 3, AdversaryVector::new(2, 0, 0), JamModel::Additive, 2);
        assert!(matches!(strong, Err(PairwiseError::StrongRegime { .. })));
        assert!(PairwiseParams::unchecked(&f, 3, AdversaryVector::new(2, 0, 0), JamModel::Additive, 2).is_ok());
        assert!(!is_weak(4, &AdversaryVector::new(0, 0, 2), JamModel::Overwrite));
        assert!(is_weak(4, &AdversaryVector::new(0, 0, 2), JamModel::Additive));
        let s = PairwiseParams::secret(&f, 4, AdversaryVector::new(1, 1, 0), JamModel::Additive, 2).unwrap();
        assert_eq!(s.payload_rate(), Rational64::from_integer(1));
        assert!(PairwiseParams::secret(&f, 3, AdversaryVector::new(1, 1, 0), JamModel::Additive, 2).is_err());
        let plain = PairwiseParams::secret(&f, 3, AdversaryVector::new(0, 0, 0), JamModel::Additive, 2).unwrap();
        assert_eq!(plain.mix_keys(), 0);
    }

    #[test]
    fn secret_round_trip() {
        let f = Field::new(8).unwrap();
        let p = PairwiseParams::secret(&f, 4, AdversaryVector::new(0, 1, 1), JamModel::Additive, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = f.random_vec(p.message_len(), &mut rng);
        let rows = secret_encode(&p, &m, &mut rng).unwrap();
        assert_eq!(secret_decode(&p, &rows).unwrap(), m);
    }

    proptest! {
        #[test]
        fn clique_matches_brute_force(n in 1usize..=10, bits in any::<u64>(), selfs in any::<u16>()) {
            let mut edges = Vec::new();
            let mut idx = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if bits >> (idx % 64) & 1 == 1 {
                        edges.push((i, j));
                    }
                    idx += 1;
                }
            }
            let ok: Vec<bool> = (0..n).map(|i| selfs >> i & 1 == 1 || i % 3 == 0).collect();
            let g = ConsistencyGraph::from_edges(n, &ok, &edges);
            prop_assert_eq!(largest_clique(&g), brute_force_clique(&g));
        }
    }
}
