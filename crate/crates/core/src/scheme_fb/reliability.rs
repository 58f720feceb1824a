//! Two-round reliable code with passive feedback.
//!
//! Round one sends an MDS codeword of `C - z_w` blocks of `n` symbols.
//! Alice then sees which links arrived intact and, on those links only,
//! sends hashes of everything Bob received together with the hash keys.
//! Bob trusts a link when its bundle agrees with his round-one data and
//! erasure-decodes from the trusted links.

use std::collections::BTreeSet;

use rand::Rng;

use super::{is_strong, FbError};
use crate::channel::{AdversaryVector, JamModel, RoundEncoder};
use crate::codes::{build_cauchy, erasure_decode, mds_encode, ErasurePattern, Matrix};
use crate::field::{Field, Symbol};
use crate::hashing::{hash_dim_for, matrix_hash, verify_raw, HashKey};

#[derive(Clone, Debug)]
pub struct FbParams {
    field: Field,
    links: usize,
    z: AdversaryVector,
    model: JamModel,
    n: usize,
    hash_dim: usize,
    generator: Matrix,
}

impl FbParams {
    pub fn new(field: &Field, links: usize, z: AdversaryVector, model: JamModel, n: usize) -> Result<Self, FbError> {
        if is_strong(links, &z, model) {
            return Err(FbError::StrongRegime { z, model, links });
        }
        Self::unchecked(field, links, z, model, n)
    }

    /// No regime check; for running the code where it should fail.
    pub fn unchecked(
        field: &Field,
        links: usize,
        z: AdversaryVector,
        model: JamModel,
        n: usize,
    ) -> Result<Self, FbError> {
        z.check(links)?;
        let min_n = (usize::BITS - links.saturating_sub(1).leading_zeros()) as usize;
        if n <= min_n {
            return Err(FbError::Params(format!("blocklength {n} must exceed ceil(log2 C) = {min_n}")));
        }
        if z.z_w() >= links {
            return Err(FbError::Params(format!("no links left after z_w = {}", z.z_w())));
        }
        let generator = build_cauchy(field, links, links - z.z_w(), 0)?.matrix;
        Ok(Self {
            field: field.clone(),
            links,
            z,
            model,
            n,
            hash_dim: hash_dim_for(n),
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

    /// Message blocks, `C - z_w`.
    pub fn k(&self) -> usize {
        self.generator.cols()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hash_dim(&self) -> usize {
        self.hash_dim
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn message_len(&self) -> usize {
        self.k() * self.n
    }

    /// Symbols per link in each round: `n` then `2 C ceil(sqrt n)`.
    pub fn round_lens(&self) -> (usize, usize) {
        (self.n, 2 * self.links * self.hash_dim)
    }

    pub fn total_len(&self) -> usize {
        let (a, b) = self.round_lens();
        a + b
    }
}

pub fn fb_round1_encode(params: &FbParams, message: &[Symbol]) -> Result<Vec<Vec<Symbol>>, FbError> {
    if message.len() != params.message_len() {
        return Err(FbError::Params(format!(
            "message has {} symbols, expected {}",
            message.len(),
            params.message_len()
        )));
    }
    for &s in message {
        params.field.check(s).map_err(crate::codes::CodeError::from)?;
    }
    let blocks: Vec<Vec<Symbol>> = message.chunks(params.n).map(<[Symbol]>::to_vec).collect();
    Ok(mds_encode(&params.field, &blocks, &params.generator)?)
}

/// Links whose round-one output differs from what was sent go to the false
/// set; returns `(true, false)`.
pub fn fb_partition(y1: &[Vec<Symbol>], x1: &[Vec<Symbol>]) -> (BTreeSet<usize>, BTreeSet<usize>) {
    (0..x1.len()).partition(|&l| y1.get(l) == x1.get(l))
}

/// Deterministic round two with explicit keys and fill for false links.
pub fn fb_round2_with(
    params: &FbParams,
    y1: &[Vec<Symbol>],
    false_links: &BTreeSet<usize>,
    keys: &[HashKey],
    fill: &[Vec<Symbol>],
) -> Result<Vec<Vec<Symbol>>, FbError> {
    let c = params.links;
    if y1.len() != c || keys.len() != c {
        return Err(FbError::Params("one feedback row and one key per link".into()));
    }
    let mut bundle = Vec::with_capacity(2 * c * params.hash_dim);
    for (y, k) in y1.iter().zip(keys) {
        bundle.extend(matrix_hash(&params.field, y, k)?.theta);
    }
    for k in keys {
        bundle.extend_from_slice(k.as_slice());
    }
    let mut fill = fill.iter();
    (0..c)
        .map(|l| {
            if false_links.contains(&l) {
                fill.next()
                    .filter(|f| f.len() == bundle.len())
                    .cloned()
                    .ok_or_else(|| FbError::Params("missing fill for a false link".into()))
            } else {
                Ok(bundle.clone())
            }
        })
        .collect()
}

pub fn fb_round2_encode<R: Rng + ?Sized>(
    params: &FbParams,
    y1: &[Vec<Symbol>],
    false_links: &BTreeSet<usize>,
    rng: &mut R,
) -> Result<Vec<Vec<Symbol>>, FbError> {
    let keys = (0..params.links)
        .map(|_| HashKey::random(&params.field, params.hash_dim, rng))
        .collect::<Result<Vec<_>, _>>()?;
    let len = params.round_lens().1;
    let fill: Vec<Vec<Symbol>> = false_links.iter().map(|_| params.field.random_vec(len, rng)).collect();
    fb_round2_with(params, y1, false_links, &keys, &fill)
}

/// Links whose round-two bundle is consistent with all of `y1`.
pub fn fb_classify(params: &FbParams, y1: &[Vec<Symbol>], y2: &[Vec<Symbol>]) -> Result<BTreeSet<usize>, FbError> {
    let c = params.links;
    let nh = params.hash_dim;
    let (len1, len2) = params.round_lens();
    if y1.len() != c || y2.len() != c || y1.iter().any(|r| r.len() != len1) || y2.iter().any(|r| r.len() != len2) {
        return Err(FbError::Layout("round shapes do not match the parameters".into()));
    }
    let mut trusted = BTreeSet::new();
    for (l, bundle) in y2.iter().enumerate() {
        let (hashes, keys) = bundle.split_at(c * nh);
        let mut ok = true;
        for j in 0..c {
            let h = &hashes[j * nh..(j + 1) * nh];
            let k = &keys[j * nh..(j + 1) * nh];
            if !verify_raw(&params.field, &y1[j], k, h)? {
                ok = false;
                break;
            }
        }
        if ok {
            trusted.insert(l);
        }
    }
    Ok(trusted)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FbDecoded {
    pub message: Vec<Symbol>,
    pub trusted: BTreeSet<usize>,
}

pub fn fb_decode(params: &FbParams, y1: &[Vec<Symbol>], y2: &[Vec<Symbol>]) -> Result<FbDecoded, FbError> {
    let trusted = fb_classify(params, y1, y2)?;
    if trusted.len() < params.k() {
        return Err(FbError::TooFewTrue {
            found: trusted.len(),
            needed: params.k(),
        });
    }
    let erased = ErasurePattern::new((0..params.links).filter(|l| !trusted.contains(l)));
    let blocks = erasure_decode(&params.field, y1, &erased, &params.generator)?;
    Ok(FbDecoded {
        message: blocks.concat(),
        trusted,
    })
}

/// Alice as a two-round state machine.
pub struct FbEncoder {
    params: FbParams,
    message: Vec<Symbol>,
    x1: Option<Vec<Vec<Symbol>>>,
}

impl FbEncoder {
    pub fn new(params: &FbParams, message: Vec<Symbol>) -> Self {
        Self {
            params: params.clone(),
            message,
            x1: None,
        }
    }

    pub fn message(&self) -> &[Symbol] {
        &self.message
    }
}

impl RoundEncoder for FbEncoder {
    fn encode(
        &mut self,
        round: usize,
        feedback: &[Vec<Vec<Symbol>>],
        rng: &mut rand_chacha::ChaCha20Rng,
    ) -> Result<Vec<Vec<Symbol>>, String> {
        match round {
            0 => {
                let x1 = fb_round1_encode(&self.params, &self.message).map_err(|e| e.to_string())?;
                self.x1 = Some(x1.clone());
                Ok(x1)
            }
            1 => {
                let x1 = self.x1.as_ref().ok_or("round two before round one")?;
                let y1 = feedback.first().ok_or("round two needs feedback")?;
                let (_, false_links) = fb_partition(y1, x1);
                fb_round2_encode(&self.params, y1, &false_links, rng).map_err(|e| e.to_string())
            }
            _ => Ok(Vec::new()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn params(c: usize, z: (usize, usize, usize), n: usize) -> FbParams {
        let f = Field::new(8).unwrap();
        FbParams::new(&f, c, AdversaryVector::new(z.0, z.1, z.2), JamModel::Additive, n).unwrap()
    }

    #[test]
    fn shapes_and_checks() {
        let p = params(3, (1, 1, 0), 256);
        assert_eq!(p.k(), 2);
        assert_eq!(p.hash_dim(), 16);
        assert_eq!(p.round_lens(), (256, 96));
        let f = Field::new(8).unwrap();
        assert!(FbParams::new(&f, 4, AdversaryVector::new(0, 1, 0), JamModel::Additive, 2).is_err());
        assert!(FbParams::new(&f, 4, AdversaryVector::new(0, 1, 0), JamModel::Additive, 3).is_ok());
        assert!(matches!(
            FbParams::new(&f, 2, AdversaryVector::new(1, 1, 0), JamModel::Additive, 16),
            Err(FbError::StrongRegime { .. })
        ));
        assert!(matches!(
            FbParams::new(&f, 3, AdversaryVector::new(1, 1, 1), JamModel::Overwrite, 16),
            Err(FbError::StrongRegime { .. })
        ));
    }

    #[test]
    fn partition_follows_differences() {
        let x = vec![vec![1, 2], vec![3, 4], vec![5, 6]];
        let mut y = x.clone();
        assert_eq!(fb_partition(&y, &x).1, BTreeSet::new());
        y[1][0] ^= 7;
        assert_eq!(fb_partition(&y, &x), ([0, 2].into(), [1].into()));
    }

    #[test]
    fn clean_run_identical_bundles() {
        let p = params(4, (0, 1, 1), 9);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let m = p.field().random_vec(p.message_len(), &mut rng);
        let x1 = fb_round1_encode(&p, &m).unwrap();
        let x2 = fb_round2_encode(&p, &x1, &BTreeSet::new(), &mut rng).unwrap();
        assert!(x2.iter().all(|r| r == &x2[0]));
        let d = fb_decode(&p, &x1, &x2).unwrap();
        assert_eq!(d.message, m);
        assert_eq!(d.trusted.len(), 4);
    }

    #[test]
    fn any_k_rows_decode_exhaustively() {
        let f = Field::new(4).unwrap();
        let p = FbParams::new(&f, 4, AdversaryVector::new(0, 0, 1), JamModel::Additive, 3).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let m = f.random_vec(p.message_len(), &mut rng);
        let x1 = fb_round1_encode(&p, &m).unwrap();
        for lost in 0..4 {
            let got = erasure_decode(&f, &x1, &ErasurePattern::new([lost]), p.generator()).unwrap();
            assert_eq!(got.concat(), m);
        }
    }

    #[test]
    fn corrupted_link_is_not_trusted() {
        let p = params(3, (1, 1, 0), 16);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let m = p.field().random_vec(p.message_len(), &mut rng);
        let x1 = fb_round1_encode(&p, &m).unwrap();
        let mut y1 = x1.clone();
        y1[1][3] ^= 1;
        let (_, bad) = fb_partition(&y1, &x1);
        let x2 = fb_round2_encode(&p, &y1, &bad, &mut rng).unwrap();
        let d = fb_decode(&p, &y1, &x2).unwrap();
        assert_eq!(d.trusted, [0, 2].into());
        assert_eq!(d.message, m);
    }

    #[test]
    fn zero_keys_never_verify() {
        let p = params(2, (0, 0, 1), 4);
        let y1 = vec![vec![0; 4], vec![0; 4]];
        let y2 = vec![vec![0; 8], vec![0; 8]];
        assert!(fb_classify(&p, &y1, &y2).unwrap().is_empty());
        assert!(matches!(fb_decode(&p, &y1, &y2), Err(FbError::TooFewTrue { .. })));
    }
}
