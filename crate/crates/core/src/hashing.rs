//! Keyed matrix hash: a payload is reshaped into an N x N matrix `D` and
//! hashed under a nonzero key `rho` as `theta = D * rho`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::Matrix;
use crate::field::{Field, FieldError, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HashError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("payload of {len} symbols does not fit in a {n}x{n} matrix")]
    PayloadTooLong { len: usize, n: usize },
    #[error("hash key must be a nonzero vector")]
    ZeroKey,
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashKey {
    rho: Vec<Symbol>,
}

impl HashKey {
    pub fn new(f: &Field, rho: Vec<Symbol>) -> Result<Self, HashError> {
        for &s in &rho {
            f.check(s)?;
        }
        if rho.iter().all(|&s| s == 0) {
            return Err(HashError::ZeroKey);
        }
        Ok(Self { rho })
    }

    pub fn random<R: Rng + ?Sized>(f: &Field, n: usize, rng: &mut R) -> Result<Self, HashError> {
        Ok(Self {
            rho: f.random_nonzero_vec(n, rng)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.len()
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.rho
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashDigest {
    pub theta: Vec<Symbol>,
}

/// Smallest N with N^2 >= len.
pub fn hash_dim_for(len: usize) -> usize {
    let mut n = (len as f64).sqrt() as usize;
    while n * n < len {
        n += 1;
    }
    while n > 0 && (n - 1) * (n - 1) >= len {
        n -= 1;
    }
    n.max(1)
}

/// Fill an N x N matrix row-major, with zeros prepended when the payload is
/// shorter than N^2.
pub fn reshape(payload: &[Symbol], n: usize) -> Result<Matrix, HashError> {
    let cells = n * n;
    if payload.len() > cells {
        return Err(HashError::PayloadTooLong { len: payload.len(), n });
    }
    let mut data = vec![0; cells - payload.len()];
    data.extend_from_slice(payload);
    Ok(Matrix::from_vec(n, n, data).expect("exact size"))
}

/// Inverse of [`reshape`] for a payload of `len` symbols.
pub fn flatten(m: &Matrix, len: usize) -> Vec<Symbol> {
    let all: Vec<Symbol> = m.to_rows().concat();
    all[all.len() - len..].to_vec()
}

pub fn matrix_hash(f: &Field, payload: &[Symbol], key: &HashKey) -> Result<HashDigest, HashError> {
    let n = key.dim();
    let cells = n * n;
    if payload.len() > cells {
        return Err(HashError::PayloadTooLong { len: payload.len(), n });
    }
    let pad = cells - payload.len();
    let mut theta = vec![0; n];
    for (idx, &d) in payload.iter().enumerate() {
        if d == 0 {
            continue;
        }
        let pos = pad + idx;
        let (r, c) = (pos / n, pos % n);
        theta[r] ^= f.mul(d, key.rho[c]);
    }
    Ok(HashDigest { theta })
}

/// Does `digest` match `payload` under `key`?
pub fn verify(f: &Field, payload: &[Symbol], key: &HashKey, digest: &[Symbol]) -> Result<bool, HashError> {
    let h = matrix_hash(f, payload, key)?;
    if h.theta.len() != digest.len() {
        return Err(HashError::Length(h.theta.len(), digest.len()));
    }
    Ok(h.theta == digest)
}

/// Like [`verify`] but takes the key as received. A zero key is never
/// accepted since an honest sender never produces one.
pub fn verify_raw(f: &Field, payload: &[Symbol], rho: &[Symbol], digest: &[Symbol]) -> Result<bool, HashError> {
    match HashKey::new(f, rho.to_vec()) {
        Ok(key) => verify(f, payload, &key, digest),
        Err(HashError::ZeroKey) => Ok(false),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_payload_returns_key() {
        let f = Field::new(8).unwrap();
        let n = 3;
        let id = Matrix::identity(n);
        let payload = id.to_rows().concat();
        let key = HashKey::new(&f, vec![7, 0, 9]).unwrap();
        assert_eq!(matrix_hash(&f, &payload, &key).unwrap().theta, vec![7, 0, 9]);
    }

    #[test]
    fn zero_key_rejected() {
        let f = Field::new(4).unwrap();
        assert_eq!(HashKey::new(&f, vec![0, 0]), Err(HashError::ZeroKey));
        assert!(!verify_raw(&f, &[1, 2], &[0, 0], &[0, 0]).unwrap());
    }

    #[test]
    fn short_payload_is_left_padded() {
        let f = Field::new(4).unwrap();
        let key = HashKey::new(&f, vec![1, 1]).unwrap();
        // [0, 5; 6, 7] * [1, 1]^T
        assert_eq!(matrix_hash(&f, &[5, 6, 7], &key).unwrap().theta, vec![5, 6 ^ 7]);
        assert!(matches!(
            matrix_hash(&f, &[1; 5], &key),
            Err(HashError::PayloadTooLong { len: 5, n: 2 })
        ));
    }

    #[test]
    fn dims() {
        assert_eq!(hash_dim_for(1), 1);
        assert_eq!(hash_dim_for(4), 2);
        assert_eq!(hash_dim_for(5), 3);
        assert_eq!(hash_dim_for(256), 16);
        assert_eq!(hash_dim_for(257), 17);
    }

    proptest! {
        #[test]
        fn reshape_round_trips(len in 0usize..40, n in 1usize..8, seed in any::<u64>()) {
            prop_assume!(len <= n * n);
            let f = Field::new(8).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = f.random_vec(len, &mut rng);
            prop_assert_eq!(flatten(&reshape(&p, n).unwrap(), len), p);
        }

        #[test]
        fn hash_is_matrix_vector_product(n in 1usize..6, seed in any::<u64>()) {
            let f = Field::new(8).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = f.random_vec(n * n, &mut rng);
            let key = HashKey::random(&f, n, &mut rng).unwrap();
            let expected = reshape(&p, n).unwrap().mul_vec(&f, key.as_slice()).unwrap();
            prop_assert_eq!(matrix_hash(&f, &p, &key).unwrap().theta, expected);
        }
    }
}
