//! Alexander matrices and exact integer determinants.

use super::diagram::{Diagram, Sign};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::sync::OnceLock;

/// Alexander matrix of `d` evaluated at `t`, with the last row and column removed.
/// Row `c` belongs to crossing `c`, columns to arcs.
pub fn alexander_minor(d: &Diagram, t: i64) -> Vec<Vec<i64>> {
    let n = d.crossing_count();
    if n <= 1 {
        return Vec::new();
    }
    let code = d.gauss_code();
    let unders: Vec<usize> = (0..code.len()).filter(|&p| !code[p].over).collect();
    // arc k starts at unders[k] and ends at unders[k + 1]
    let arc_of = |p: usize| -> usize {
        match unders.binary_search(&p) {
            Ok(k) => k,
            Err(0) => n - 1,
            Err(k) => k - 1,
        }
    };
    let mut m = vec![vec![0i64; n]; n];
    for (c, x) in d.crossings().iter().enumerate() {
        let k = arc_of(x.over);
        let out = arc_of(x.under);
        let inc = (out + n - 1) % n;
        m[c][k] += 1 - t;
        match x.sign {
            Sign::Positive => {
                m[c][inc] += t;
                m[c][out] -= 1;
            }
            Sign::Negative => {
                m[c][inc] -= 1;
                m[c][out] += t;
            }
        }
    }
    m.truncate(n - 1);
    for row in &mut m {
        row.truncate(n - 1);
    }
    m
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'next: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'next;
            }
        }
        return false;
    }
    true
}

/// Primes just below 2^62, largest first.
fn primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut out = Vec::with_capacity(64);
        let mut c = (1u64 << 62) - 1;
        while out.len() < 64 {
            if is_prime(c) {
                out.push(c);
            }
            c -= 2;
        }
        out
    })
}

fn det_mod(m: &[Vec<i64>], p: u64) -> u64 {
    let n = m.len();
    let mut a: Vec<Vec<u64>> = m
        .iter()
        .map(|row| row.iter().map(|&v| v.rem_euclid(p as i64) as u64).collect())
        .collect();
    let mut det = 1u64;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r][col] != 0) else {
            return 0;
        };
        if piv != col {
            a.swap(piv, col);
            det = (p - det) % p;
        }
        det = mul_mod(det, a[col][col], p);
        let inv = pow_mod(a[col][col], p - 2, p);
        for r in col + 1..n {
            if a[r][col] == 0 {
                continue;
            }
            let f = mul_mod(a[r][col], inv, p);
            for c in col..n {
                let sub = mul_mod(f, a[col][c], p);
                a[r][c] = (a[r][c] + p - sub) % p;
            }
        }
    }
    det
}

/// log2 of the Hadamard bound on |det m|.
fn hadamard_log2(m: &[Vec<i64>]) -> f64 {
    m.iter()
        .map(|row| {
            let s: f64 = row.iter().map(|&v| (v as f64) * (v as f64)).sum();
            if s == 0.0 {
                0.0
            } else {
                0.5 * s.log2()
            }
        })
        .sum()
}

/// Exact determinant of an integer matrix by Chinese remaindering.
pub fn determinant(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    assert!(m.iter().all(|r| r.len() == n), "matrix must be square");
    let needed_bits = hadamard_log2(m) + 2.0;
    let mut modulus = BigInt::one();
    let mut value = BigInt::zero();
    let mut bits = 0.0;
    for &p in primes() {
        let r = BigInt::from(det_mod(m, p));
        let pb = BigInt::from(p);
        // value += modulus * ((r - value) * modulus^-1 mod p)
        let cur = (&value % &pb + &pb) % &pb;
        let inv = pow_mod((&modulus % &pb).to_u64().expect("reduced below p"), p - 2, p);
        let diff = ((&r - cur) % &pb + &pb) % &pb;
        let step = (diff * BigInt::from(inv)) % &pb;
        value += &modulus * step;
        modulus *= &pb;
        bits += (p as f64).log2();
        if bits > needed_bits {
            break;
        }
    }
    assert!(bits > needed_bits, "determinant exceeds the prime budget");
    // symmetric representative
    let half = &modulus >> 1u32;
    if value > half {
        value - modulus
    } else {
        value
    }
}

/// Alexander polynomial evaluated at `t`, up to sign and powers of `t`.
pub fn alexander_at(d: &Diagram, t: i64) -> BigUint {
    determinant(&alexander_minor(d, t)).abs().to_biguint().expect("non-negative")
}
