#![allow(dead_code)]

use mpath::codes::Matrix;
use mpath::field::{Field, Symbol};

fn plus(x: i64) -> i64 {
    x.max(0)
}

/// Table cells typed in one by one, for equal unit links. Returns the
/// regime and the rate.
pub fn table_oracle(scenario: &str, c: i64, rw: i64, ro: i64, wo: i64) -> (&'static str, i64) {
    let zr = rw + ro;
    let zw = rw + wo;
    let weak = match scenario {
        "noncausal-nofb-additive-reliable" | "noncausal-nofb-additive-secret" => ro + wo + 2 * rw < c,
        "noncausal-nofb-overwrite-reliable" | "noncausal-nofb-overwrite-secret" => ro + 2 * wo + 2 * rw < c,
        "causal-nofb-additive-reliable" | "causal-nofb-additive-secret" => wo + 2 * rw < c,
        "causal-nofb-overwrite-reliable" | "causal-nofb-overwrite-secret" => 2 * wo + 2 * rw < c,
        "causal-fb-additive-reliable" | "causal-fb-additive-secret" => zr < c || 2 * zw < c,
        "causal-fb-overwrite-reliable" | "causal-fb-overwrite-secret" => ro + wo + rw < c,
        other => panic!("unknown scenario {other}"),
    };
    let rate = match (scenario, weak) {
        ("noncausal-nofb-additive-reliable", true) => c - (rw + wo),
        ("noncausal-nofb-additive-reliable", false) => plus(c - 2 * rw - wo),
        ("noncausal-nofb-additive-secret", true) => plus(c - ro - wo - 2 * rw),
        ("noncausal-nofb-overwrite-reliable", true) => c - (rw + wo),
        ("noncausal-nofb-overwrite-reliable", false) => plus(c - 2 * rw - 2 * wo),
        ("noncausal-nofb-overwrite-secret", true) => plus(c - ro - wo - 2 * rw),
        ("causal-nofb-additive-reliable", true) => c - (rw + wo),
        ("causal-nofb-additive-secret", true) => plus(c - ro - wo - 2 * rw),
        ("causal-nofb-overwrite-reliable", true) => c - (rw + wo),
        ("causal-nofb-overwrite-secret", true) => plus(c - ro - wo - 2 * rw),
        ("causal-fb-additive-reliable", true) => c - (rw + wo),
        ("causal-fb-additive-secret", true) => (c - zr).min(c - zw),
        ("causal-fb-overwrite-reliable", true) => c - (rw + wo),
        ("causal-fb-overwrite-reliable", false) => plus(c - 2 * wo - 2 * rw),
        ("causal-fb-overwrite-secret", true) => plus(c - ro - wo - rw),
        (_, false) => 0,
        (s, w) => panic!("no cell for {s} weak={w}"),
    };
    (if weak { "weak" } else { "strong" }, rate)
}

/// Determinant by cofactor expansion along the first row; characteristic
/// two, so signs vanish.
pub fn det(f: &Field, m: &[Vec<Symbol>]) -> Symbol {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    let mut acc = 0;
    for j in 0..n {
        if m[0][j] == 0 {
            continue;
        }
        let minor: Vec<Vec<Symbol>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &v)| v).collect())
            .collect();
        acc = f.add(acc, f.mul(m[0][j], det(f, &minor)));
    }
    acc
}

pub fn submatrix(m: &Matrix, rows: &[usize], cols: &[usize]) -> Vec<Vec<Symbol>> {
    rows.iter().map(|&r| cols.iter().map(|&c| m.get(r, c)).collect()).collect()
}

/// All `k`-subsets of `0..n`.
pub fn choose(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Smallest field with at least `points` distinct elements.
pub fn smallest_field(points: usize) -> Field {
    let bits = (1..=64u32).find(|&b| (1u128 << b) >= points as u128).unwrap();
    Field::new(bits).unwrap()
}
