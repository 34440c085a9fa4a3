//! Word-sized prime-field imaging of cyclotomic linear systems.
//!
//! For a prime `P = 1 mod R` the field `F_P` contains an element `omega` of
//! exact order `R`, so `zeta_R -> omega` defines a ring homomorphism
//! `Z[zeta_R, 1/d] -> F_P` whenever `P` does not divide the denominators in
//! play. Under such a map the kernel of a matrix can only grow, which gives
//! one-sided certificates: an empty modular kernel proves the exact kernel is
//! empty, and the modular dimension is an upper bound that exact candidate
//! vectors can meet from below.

use crate::cyclotomic::Cyc;
use num_traits::ToPrimitive;

pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    acc
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    // deterministic Miller-Rabin for u64
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A prime field containing a chosen root of unity of exact order `r`.
pub struct ModularField {
    pub p: u64,
    pub r: u64,
    /// `omega^k` for `k` in `0..r`.
    pub root_pow: Vec<u64>,
}

impl ModularField {
    /// Finds a prime `p = 1 mod r` with `p` not dividing `avoid`, and an
    /// element of exact multiplicative order `r`.
    pub fn new(r: u64, avoid: u64, seed: u64) -> ModularField {
        assert!(r >= 1);
        let mut k = (1u64 << 31) / r + seed * 97 + 1;
        loop {
            let p = k * r + 1;
            if p > (1 << 62) {
                panic!("modular prime search overflow");
            }
            if is_prime(p) && (avoid == 0 || avoid % p != 0) {
                // an element of exact order r
                'try_gen: for g in 2..200u64 {
                    let w = pow_mod(g, (p - 1) / r, p);
                    if w == 1 && r > 1 {
                        continue;
                    }
                    // check exact order by prime factors of r
                    for q in crate::cyclotomic::prime_factors(r) {
                        if pow_mod(w, r / q, p) == 1 {
                            continue 'try_gen;
                        }
                    }
                    let mut root_pow = Vec::with_capacity(r as usize);
                    let mut acc = 1u64;
                    for _ in 0..r {
                        root_pow.push(acc);
                        acc = ((acc as u128 * w as u128) % p as u128) as u64;
                    }
                    return ModularField { p, r, root_pow };
                }
            }
            k += 1;
        }
    }

    /// Image of an exact cyclotomic number whose conductor divides `r`.
    /// `None` if a denominator vanishes mod `p`.
    pub fn image(&self, x: &Cyc) -> Option<u64> {
        let stride = (self.r / x.conductor() as u64) as usize;
        let den = (x.den_ref() % num_bigint::BigInt::from(self.p)).to_u64()?;
        if den == 0 {
            return None;
        }
        let dinv = inv_mod(den, self.p);
        let mut acc: u128 = 0;
        for k in 0..x.coeff_len() {
            let c = x.num_at(k);
            if num_traits::Zero::is_zero(&c) {
                continue;
            }
            let cm = (&c % num_bigint::BigInt::from(self.p))
                .to_i64()
                .map(|v| v.rem_euclid(self.p as i64) as u64)?;
            let w = self.root_pow[(k * stride) % self.r as usize];
            acc = (acc + cm as u128 * w as u128) % self.p as u128;
        }
        Some(((acc * dinv as u128) % self.p as u128) as u64)
    }
}

/// Incremental row echelon over `F_p`; returns the rank.
pub struct ModReducer {
    p: u64,
    cols: usize,
    /// (pivot column, normalized row)
    rows: Vec<(usize, Vec<u64>)>,
}

impl ModReducer {
    pub fn new(p: u64, cols: usize) -> ModReducer {
        ModReducer { p, cols, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, mut row: Vec<u64>) -> bool {
        debug_assert_eq!(row.len(), self.cols);
        let p = self.p;
        for (pc, r) in &self.rows {
            let f = row[*pc];
            if f != 0 {
                for j in *pc..self.cols {
                    if r[j] != 0 {
                        let t = (f as u128 * r[j] as u128) % p as u128;
                        row[j] = ((row[j] as u128 + p as u128 - t) % p as u128) as u64;
                    }
                }
            }
        }
        let Some(pc) = row.iter().position(|&c| c != 0) else {
            return false;
        };
        let inv = inv_mod(row[pc], p);
        for c in row.iter_mut() {
            if *c != 0 {
                *c = ((*c as u128 * inv as u128) % p as u128) as u64;
            }
        }
        let pos = self.rows.partition_point(|(c, _)| *c < pc);
        self.rows.insert(pos, (pc, row));
        true
    }
}
