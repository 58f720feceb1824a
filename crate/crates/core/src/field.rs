//! Arithmetic in GF(2^b) for 1 <= b <= 64.
//!
//! Elements are stored as `u64` bit vectors (coefficient of x^i in bit i).
//! Widths up to 16 use log/antilog tables; wider fields use a carry-less
//! product followed by reduction. [`Field`] is a cheap-to-clone handle; the
//! hot paths take raw symbols and assume they are already in range.
//! [`FieldElement`] is the checked form used at API boundaries.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

/// A raw field symbol.
pub type Symbol = u64;

/// Widths at or below this use lookup tables.
const TABLE_MAX_BITS: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("field width {0} is outside 1..=64")]
    UnsupportedWidth(u32),
    #[error("polynomial {poly:#x} is not an irreducible polynomial of degree {bits}")]
    NotIrreducible { bits: u32, poly: u128 },
    #[error("value {value:#x} does not fit in GF(2^{bits})")]
    OutOfRange { value: u64, bits: u32 },
    #[error("operands belong to different fields")]
    Mismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot sample a nonzero vector of length zero")]
    EmptyVector,
}

/// Low-weight irreducible polynomials, indexed by degree. Each entry lists
/// the exponents strictly between 0 and b; the x^b and 1 terms are implied.
fn default_middle_terms(bits: u32) -> &'static [u32] {
    match bits {
        1 => &[],
        2 | 3 | 4 | 6 | 7 | 9 | 15 | 22 | 28 | 30 | 46 | 60 | 63 => &[1],
        5 | 11 | 21 | 29 | 35 => &[2],
        10 | 12 | 17 | 18 | 20 | 25 | 31 | 41 | 52 => &[3],
        39 | 57 => &[4],
        14 | 23 | 44 | 47 => &[5],
        34 | 42 | 55 => &[7],
        36 | 49 | 54 => &[9],
        33 => &[10],
        58 => &[19],
        62 => &[29],
        8 | 13 | 24 | 26 | 45 | 64 => &[4, 3, 1],
        16 => &[5, 3, 1],
        19 | 27 | 61 => &[5, 2, 1],
        32 => &[7, 3, 2],
        37 => &[6, 4, 1],
        38 => &[6, 5, 1],
        40 => &[5, 4, 3],
        43 => &[6, 4, 3],
        48 => &[5, 3, 2],
        50 => &[4, 3, 2],
        51 => &[6, 3, 1],
        53 => &[6, 2, 1],
        56 | 59 => &[7, 4, 2],
        _ => &[],
    }
}

/// The default reduction polynomial for `bits`, including the leading term.
pub fn default_polynomial(bits: u32) -> Result<u128, FieldError> {
    if !(1..=64).contains(&bits) {
        return Err(FieldError::UnsupportedWidth(bits));
    }
    if bits == 1 {
        return Ok(0b11);
    }
    let mut p = (1u128 << bits) | 1;
    for &e in default_middle_terms(bits) {
        p |= 1u128 << e;
    }
    Ok(p)
}

fn degree(p: u128) -> i32 {
    127 - p.leading_zeros() as i32
}

fn poly_mod(mut a: u128, m: u128) -> u128 {
    let dm = degree(m);
    while a != 0 && degree(a) >= dm {
        a ^= m << (degree(a) - dm);
    }
    a
}

fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_mod(a, b);
        a = b;
        b = r;
    }
    a
}

/// Carry-less product of two 64-bit polynomials.
fn clmul(a: u64, b: u64) -> u128 {
    let a = a as u128;
    let mut b = b;
    let mut acc = 0u128;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

fn mulmod_poly(a: u64, b: u64, poly: u128) -> u64 {
    poly_mod(clmul(a, b), poly) as u64
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Irreducibility over GF(2). Trial division for small degrees, Rabin's
/// test otherwise.
pub fn is_irreducible(poly: u128) -> bool {
    let n = degree(poly);
    if !(1..=64).contains(&n) {
        return false;
    }
    if n == 1 {
        return true;
    }
    if poly & 1 == 0 {
        return false;
    }
    let n = n as u32;
    if n <= TABLE_MAX_BITS {
        for d in 1..=n / 2 {
            for low in 0..(1u128 << d) {
                if poly_mod(poly, (1u128 << d) | low) == 0 {
                    return false;
                }
            }
        }
        return true;
    }
    // x^(2^k) mod poly by repeated squaring.
    let frob = |k: u32| {
        let mut t = 2u64;
        for _ in 0..k {
            t = mulmod_poly(t, t, poly);
        }
        t
    };
    if frob(n) != 2 {
        return false;
    }
    for p in prime_factors(n as u64) {
        let t = frob(n / p as u32) ^ 2;
        if degree(poly_gcd(poly, t as u128)) != 0 {
            return false;
        }
    }
    true
}

struct Tables {
    log: Vec<u32>,
    exp: Vec<u64>,
}

struct Inner {
    bits: u32,
    poly: u128,
    mask: u64,
    tables: Option<Tables>,
}

/// Parameters of GF(2^b): width and reduction polynomial, plus lookup tables
/// for small widths.
#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.inner.bits, self.inner.poly)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.bits == other.inner.bits && self.inner.poly == other.inner.poly)
    }
}

impl Eq for Field {}

impl Field {
    /// GF(2^bits) with the default low-weight polynomial.
    pub fn new(bits: u32) -> Result<Self, FieldError> {
        Self::with_polynomial(bits, default_polynomial(bits)?)
    }

    /// GF(2^bits) modulo `poly`, which must include the x^bits term.
    pub fn with_polynomial(bits: u32, poly: u128) -> Result<Self, FieldError> {
        if !(1..=64).contains(&bits) {
            return Err(FieldError::UnsupportedWidth(bits));
        }
        if degree(poly) != bits as i32 || !is_irreducible(poly) {
            return Err(FieldError::NotIrreducible { bits, poly });
        }
        let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        let tables = (bits <= TABLE_MAX_BITS).then(|| build_tables(bits, poly));
        Ok(Self {
            inner: Arc::new(Inner {
                bits,
                poly,
                mask,
                tables,
            }),
        })
    }

    pub fn bits(&self) -> u32 {
        self.inner.bits
    }

    /// Reduction polynomial including the leading term.
    pub fn polynomial(&self) -> u128 {
        self.inner.poly
    }

    /// Number of elements, 2^b.
    pub fn order(&self) -> u128 {
        1u128 << self.inner.bits
    }

    pub fn mask(&self) -> u64 {
        self.inner.mask
    }

    pub fn contains(&self, v: Symbol) -> bool {
        v & !self.inner.mask == 0
    }

    pub fn check(&self, v: Symbol) -> Result<Symbol, FieldError> {
        if self.contains(v) {
            Ok(v)
        } else {
            Err(FieldError::OutOfRange {
                value: v,
                bits: self.inner.bits,
            })
        }
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        a ^ b
    }

    #[inline]
    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        if a == 0 || b == 0 {
            return 0;
        }
        match &self.inner.tables {
            Some(t) => t.exp[(t.log[a as usize] + t.log[b as usize]) as usize],
            None => mulmod_poly(a, b, self.inner.poly),
        }
    }

    pub fn inv(&self, a: Symbol) -> Result<Symbol, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match &self.inner.tables {
            Some(t) => {
                let order = (1u32 << self.inner.bits) - 1;
                t.exp[((order - t.log[a as usize]) % order) as usize]
            }
            None => self.pow(a, self.inner.mask - 1),
        })
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Symbol, mut e: u64) -> Symbol {
        let mut base = a;
        let mut acc = 1;
        while e != 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inner product of two equal-length slices.
    pub fn dot(&self, a: &[Symbol], b: &[Symbol]) -> Symbol {
        a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| acc ^ self.mul(x, y))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Symbol {
        rng.gen::<u64>() & self.inner.mask
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Symbol {
        loop {
            let v = self.random(rng);
            if v != 0 {
                return v;
            }
        }
    }

    pub fn random_vec<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<Symbol> {
        (0..len).map(|_| self.random(rng)).collect()
    }

    /// Uniform over the nonzero vectors of GF(2^b)^len.
    pub fn random_nonzero_vec<R: Rng + ?Sized>(
        &self,
        len: usize,
        rng: &mut R,
    ) -> Result<Vec<Symbol>, FieldError> {
        if len == 0 {
            return Err(FieldError::EmptyVector);
        }
        loop {
            let v = self.random_vec(len, rng);
            if v.iter().any(|&x| x != 0) {
                return Ok(v);
            }
        }
    }

    pub fn element(&self, value: Symbol) -> Result<FieldElement, FieldError> {
        FieldElement::new(self, value)
    }
}

fn build_tables(bits: u32, poly: u128) -> Tables {
    let order = (1usize << bits) - 1;
    let generator = find_generator(bits, poly);
    let mut exp = vec![0u64; 2 * order + 1];
    let mut log = vec![0u32; order + 1];
    let mut x = 1u64;
    for (i, slot) in exp.iter_mut().enumerate().take(order) {
        *slot = x;
        log[x as usize] = i as u32;
        x = mulmod_poly(x, generator, poly);
    }
    for i in order..exp.len() {
        exp[i] = exp[i - order];
    }
    Tables { log, exp }
}

/// Smallest element of multiplicative order 2^b - 1.
fn find_generator(bits: u32, poly: u128) -> u64 {
    let order = (1u64 << bits) - 1;
    if order == 1 {
        return 1;
    }
    let factors = prime_factors(order);
    let pow = |mut base: u64, mut e: u64| {
        let mut acc = 1u64;
        while e != 0 {
            if e & 1 == 1 {
                acc = mulmod_poly(acc, base, poly);
            }
            base = mulmod_poly(base, base, poly);
            e >>= 1;
        }
        acc
    };
    (2..=order)
        .find(|&g| factors.iter().all(|&p| pow(g, order / p) != 1))
        .expect("an irreducible polynomial yields a cyclic multiplicative group")
}

/// A field element tagged with its field; operations check that both sides
/// agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    value: Symbol,
    field: Field,
}

impl FieldElement {
    pub fn new(field: &Field, value: Symbol) -> Result<Self, FieldError> {
        Ok(Self {
            value: field.check(value)?,
            field: field.clone(),
        })
    }

    pub fn value(&self) -> Symbol {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same(&self, other: &Self) -> Result<(), FieldError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::Mismatch)
        }
    }

    fn wrap(&self, value: Symbol) -> Self {
        Self {
            value,
            field: self.field.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same(other)?;
        Ok(self.wrap(self.value ^ other.value))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.add(other)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same(other)?;
        Ok(self.wrap(self.field.mul(self.value, other.value)))
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        Ok(self.wrap(self.field.inv(self.value)?))
    }

    pub fn div(&self, other: &Self) -> Result<Self, FieldError> {
        self.same(other)?;
        Ok(self.wrap(self.field.div(self.value, other.value)?))
    }

    pub fn pow(&self, e: u64) -> Self {
        self.wrap(self.field.pow(self.value, e))
    }
}
