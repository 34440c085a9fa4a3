//! Finite quadratic modules: construction, structural invariants, Gauss sums,
//! isotropic subgroups, subquotients, orthogonal groups and Witt reduction.
//!
//! A module is presented by distinguished generators `g_1, ..., g_r` of orders
//! `u_i`, the diagonal values `Q(g_i)` and the Gram values `B(g_i, g_j)`, all
//! in Q/Z. Elements are coordinate vectors reduced mod `u_i`; the induced
//! forms are
//!
//! `Q(sum a_i g_i) = sum a_i^2 Q(g_i) + sum_{i<j} a_i a_j B(g_i, g_j)`,
//! `B(x, y) = sum x_i y_j B(g_i, g_j)`.
//!
//! Enumeration order is fixed once and for all (mixed radix, first generator
//! most significant); every matrix, label and JSON output downstream relies
//! on it.

pub mod parse;

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cyclotomic::{e_of, prime_factors, Cyc, CycField};
use crate::error::{Error, Result};
use crate::linalg::{self, rational_inverse, IMat};
use crate::rational::Rational;

/// Default cap for element-by-element enumerations (subgroups, radicals).
pub const DEFAULT_ENUM_BUDGET: usize = 10_000;
/// Default cap for brute-force automorphism and isomorphism searches.
pub const DEFAULT_ISO_BUDGET: usize = 100;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Fqm {
    orders: Vec<i64>,
    q_diag: Vec<Rational>,
    b_gram: Vec<Vec<Rational>>,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FqmElement {
    pub coords: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct FqmSubgroup {
    pub generators: Vec<FqmElement>,
    /// All elements, as indices into the ambient enumeration, sorted.
    pub element_indices: Vec<usize>,
}

impl Fqm {
    pub fn trivial() -> Fqm {
        Fqm { orders: vec![], q_diag: vec![], b_gram: vec![] }
    }

    /// Validated construction from generator data.
    pub fn from_gram(
        orders: Vec<i64>,
        q_diag: Vec<Rational>,
        b_gram: Vec<Vec<Rational>>,
    ) -> Result<Fqm> {
        let r = orders.len();
        if q_diag.len() != r || b_gram.len() != r || b_gram.iter().any(|row| row.len() != r) {
            return Err(Error::Validation("inconsistent generator data shapes".into()));
        }
        if orders.iter().any(|&u| u < 1) {
            return Err(Error::Validation("generator orders must be >= 1".into()));
        }
        let q_diag: Vec<Rational> = q_diag.iter().map(|q| q.mod1()).collect();
        let b_gram: Vec<Vec<Rational>> =
            b_gram.iter().map(|row| row.iter().map(|b| b.mod1()).collect()).collect();
        for i in 0..r {
            for j in 0..r {
                if b_gram[i][j] != b_gram[j][i] {
                    return Err(Error::Validation("Gram matrix is not symmetric".into()));
                }
            }
        }
        for i in 0..r {
            let two_q = (&q_diag[i] + &q_diag[i]).mod1();
            if b_gram[i][i] != two_q {
                return Err(Error::Validation(format!(
                    "B(g{i},g{i}) != 2*Q(g{i}) mod 1"
                )));
            }
            let u = Rational::from_integer(orders[i]);
            if !(&(&u * &u) * &q_diag[i]).is_integer() {
                return Err(Error::Validation(format!(
                    "u^2*Q(g{i}) is not integral: form ill-defined on Z/{}",
                    orders[i]
                )));
            }
            for j in 0..r {
                if !(&u * &b_gram[i][j]).is_integer() {
                    return Err(Error::Validation(format!(
                        "u*B(g{i},g{j}) is not integral: form ill-defined"
                    )));
                }
            }
        }
        // drop order-1 generators; they carry nothing
        let keep: Vec<usize> = (0..r).filter(|&i| orders[i] > 1).collect();
        Ok(Fqm {
            orders: keep.iter().map(|&i| orders[i]).collect(),
            q_diag: keep.iter().map(|&i| q_diag[i].clone()).collect(),
            b_gram: keep
                .iter()
                .map(|&i| keep.iter().map(|&j| b_gram[i][j].clone()).collect())
                .collect(),
        })
    }

    /// `D_m(a) = (Z/2m, a x^2 / 4m)`, requiring `gcd(a, 2m) = 1`.
    pub fn standard_d(m: i64, a: i64) -> Result<Fqm> {
        if m < 1 {
            return Err(Error::Validation("D:m requires m >= 1".into()));
        }
        if a.rem_euclid(2) == 0 || num_integer::gcd(a.rem_euclid(2 * m), 2 * m) != 1 {
            return Err(Error::Validation(format!(
                "D:{m}:{a} requires gcd(a, 2m) = 1"
            )));
        }
        Fqm::from_gram(
            vec![2 * m],
            vec![Rational::new(a, 4 * m)],
            vec![vec![Rational::new(a, 2 * m)]],
        )
    }

    /// `L_q(a) = (Z/q, a x^2 / q)` for an odd prime power `q`, `gcd(a,q)=1`.
    pub fn standard_l(q: i64, a: i64) -> Result<Fqm> {
        if q < 1 || q.rem_euclid(2) == 0 || prime_factors(q as u64).len() != 1 && q != 1 {
            return Err(Error::Validation(format!(
                "L:{q} requires an odd prime power"
            )));
        }
        if num_integer::gcd(a.rem_euclid(q.max(1)), q) != 1 && q != 1 {
            return Err(Error::Validation(format!("L:{q}:{a} requires gcd(a,q)=1")));
        }
        if q == 1 {
            return Ok(Fqm::trivial());
        }
        Fqm::from_gram(
            vec![q],
            vec![Rational::new(a, q)],
            vec![vec![Rational::new(2 * a, q)]],
        )
    }

    /// The hyperbolic plane `((Z/n)^2, xy/n)`.
    pub fn standard_hyp(n: i64) -> Result<Fqm> {
        if n < 1 {
            return Err(Error::Validation("H:n requires n >= 1".into()));
        }
        if n == 1 {
            return Ok(Fqm::trivial());
        }
        Fqm::from_gram(
            vec![n, n],
            vec![Rational::zero(), Rational::zero()],
            vec![
                vec![Rational::zero(), Rational::new(1, n)],
                vec![Rational::new(1, n), Rational::zero()],
            ],
        )
    }

    /// `((Z/2^alpha)^2, (x^2 + xy + y^2)/2^alpha)`.
    pub fn standard_xy3(alpha: u32) -> Result<Fqm> {
        if alpha > 16 {
            return Err(Error::Validation("XY3 exponent too large".into()));
        }
        if alpha == 0 {
            return Ok(Fqm::trivial());
        }
        let n = 1i64 << alpha;
        Fqm::from_gram(
            vec![n, n],
            vec![Rational::new(1, n), Rational::new(1, n)],
            vec![
                vec![Rational::new(2, n), Rational::new(1, n)],
                vec![Rational::new(1, n), Rational::new(2, n)],
            ],
        )
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn orders(&self) -> &[i64] {
        &self.orders
    }

    pub fn order(&self) -> i64 {
        self.orders.iter().product()
    }

    pub fn element_count(&self) -> usize {
        self.order() as usize
    }

    pub fn zero_element(&self) -> FqmElement {
        FqmElement { coords: vec![0; self.rank()] }
    }

    pub fn element(&self, coords: &[i64]) -> FqmElement {
        assert_eq!(coords.len(), self.rank());
        FqmElement {
            coords: coords
                .iter()
                .zip(&self.orders)
                .map(|(c, u)| c.rem_euclid(*u))
                .collect(),
        }
    }

    /// Canonical enumeration: mixed radix, first generator most significant.
    pub fn element_by_index(&self, idx: usize) -> FqmElement {
        let mut coords = vec![0i64; self.rank()];
        let mut rest = idx as i64;
        for i in (0..self.rank()).rev() {
            coords[i] = rest % self.orders[i];
            rest /= self.orders[i];
        }
        FqmElement { coords }
    }

    pub fn index_of(&self, x: &FqmElement) -> usize {
        let mut idx = 0i64;
        for i in 0..self.rank() {
            idx = idx * self.orders[i] + x.coords[i].rem_euclid(self.orders[i]);
        }
        idx as usize
    }

    pub fn elements(&self) -> impl Iterator<Item = FqmElement> + '_ {
        (0..self.element_count()).map(|i| self.element_by_index(i))
    }

    pub fn add(&self, x: &FqmElement, y: &FqmElement) -> FqmElement {
        FqmElement {
            coords: (0..self.rank())
                .map(|i| (x.coords[i] + y.coords[i]).rem_euclid(self.orders[i]))
                .collect(),
        }
    }

    pub fn neg_element(&self, x: &FqmElement) -> FqmElement {
        FqmElement {
            coords: (0..self.rank())
                .map(|i| (-x.coords[i]).rem_euclid(self.orders[i]))
                .collect(),
        }
    }

    pub fn scale_element(&self, k: i64, x: &FqmElement) -> FqmElement {
        FqmElement {
            coords: (0..self.rank())
                .map(|i| (k * x.coords[i]).rem_euclid(self.orders[i]))
                .collect(),
        }
    }

    /// `Q(x)` in `[0, 1)`.
    pub fn q_value(&self, x: &FqmElement) -> Rational {
        let mut acc = Rational::zero();
        for i in 0..self.rank() {
            let a = x.coords[i];
            if a == 0 {
                continue;
            }
            acc += &(&Rational::from_integer(a * a) * &self.q_diag[i]);
            for j in i + 1..self.rank() {
                let b = x.coords[j];
                if b != 0 {
                    acc += &(&Rational::from_integer(a * b) * &self.b_gram[i][j]);
                }
            }
        }
        acc.mod1()
    }

    /// `B(x, y)` in `[0, 1)`.
    pub fn b_value(&self, x: &FqmElement, y: &FqmElement) -> Rational {
        let mut acc = Rational::zero();
        for i in 0..self.rank() {
            if x.coords[i] == 0 {
                continue;
            }
            for j in 0..self.rank() {
                if y.coords[j] != 0 {
                    acc += &(&Rational::from_integer(x.coords[i] * y.coords[j])
                        * &self.b_gram[i][j]);
                }
            }
        }
        acc.mod1()
    }

    /// Orthogonal sum; generator lists concatenate, so the element enumeration
    /// matches the Kronecker order of the two factors.
    pub fn orth_sum(&self, other: &Fqm) -> Fqm {
        let r1 = self.rank();
        let r2 = other.rank();
        let mut orders = self.orders.clone();
        orders.extend_from_slice(&other.orders);
        let mut q_diag = self.q_diag.clone();
        q_diag.extend_from_slice(&other.q_diag);
        let mut b = vec![vec![Rational::zero(); r1 + r2]; r1 + r2];
        for i in 0..r1 {
            for j in 0..r1 {
                b[i][j] = self.b_gram[i][j].clone();
            }
        }
        for i in 0..r2 {
            for j in 0..r2 {
                b[r1 + i][r1 + j] = other.b_gram[i][j].clone();
            }
        }
        Fqm { orders, q_diag, b_gram: b }
    }

    /// `-M`: same group, negated form.
    pub fn neg(&self) -> Fqm {
        Fqm {
            orders: self.orders.clone(),
            q_diag: self.q_diag.iter().map(|q| (-q).mod1()).collect(),
            b_gram: self
                .b_gram
                .iter()
                .map(|row| row.iter().map(|b| (-b).mod1()).collect())
                .collect(),
        }
    }

    /// The p-primary component with the inherited form, together with the
    /// lifts of its generators into `self`.
    pub fn p_part_with_lifts(&self, p: u64) -> (Fqm, Vec<FqmElement>) {
        let mut orders = Vec::new();
        let mut lifts = Vec::new();
        for (i, &u) in self.orders.iter().enumerate() {
            let mut pv = 1i64;
            let mut rest = u;
            while rest % (p as i64) == 0 {
                pv *= p as i64;
                rest /= p as i64;
            }
            if pv > 1 {
                // generator (u/pv) * g_i has exact order pv
                let mut coords = vec![0i64; self.rank()];
                coords[i] = u / pv;
                orders.push(pv);
                lifts.push(self.element(&coords));
            }
        }
        let r = orders.len();
        let q_diag: Vec<Rational> = lifts.iter().map(|x| self.q_value(x)).collect();
        let mut b = vec![vec![Rational::zero(); r]; r];
        for i in 0..r {
            for j in 0..r {
                b[i][j] = self.b_value(&lifts[i], &lifts[j]);
            }
        }
        (Fqm { orders, q_diag, b_gram: b }, lifts)
    }

    pub fn p_part(&self, p: u64) -> Fqm {
        self.p_part_with_lifts(p).0
    }

    pub fn primes(&self) -> Vec<u64> {
        let mut set: Vec<u64> = Vec::new();
        for &u in &self.orders {
            for p in prime_factors(u as u64) {
                if !set.contains(&p) {
                    set.push(p);
                }
            }
        }
        set.sort();
        set
    }

    /// Smallest `l >= 1` with `l M = 0` and `l Q = 0`.
    pub fn level(&self) -> i64 {
        let mut l = BigInt::one();
        for &u in &self.orders {
            l = l.lcm(&BigInt::from(u));
        }
        for q in &self.q_diag {
            l = l.lcm(q.denom());
        }
        for row in &self.b_gram {
            for b in row {
                l = l.lcm(b.denom());
            }
        }
        l.to_i64().expect("level overflow")
    }

    /// Tests triviality of the radical of `B` by enumeration.
    pub fn is_nondegenerate(&self) -> bool {
        let gens: Vec<FqmElement> = (0..self.rank())
            .map(|i| {
                let mut c = vec![0i64; self.rank()];
                c[i] = 1;
                FqmElement { coords: c }
            })
            .collect();
        for x in self.elements() {
            if x.coords.iter().all(|&c| c == 0) {
                continue;
            }
            if gens.iter().all(|g| self.b_value(&x, g).is_zero()) {
                return false;
            }
        }
        true
    }

    /// The Gauss sum `g = sum_x e(-Q(x))`, exact in Q(zeta_level).
    pub fn gauss_sum(&self) -> Cyc {
        let level = self.level().max(1) as u32;
        let field = CycField::get(level);
        let mut counts = vec![BigInt::zero(); level as usize];
        for x in self.elements() {
            let e = (-self.q_value(&x)).mod1();
            // exponent = e * level, an integer by definition of the level
            let num = (&e * &Rational::from_integer(level as i64))
                .as_integer()
                .expect("level does not clear Q");
            counts[num.to_usize().unwrap() % level as usize] += 1;
        }
        Cyc::from_exp_counts(&field, counts, BigInt::one())
    }

    /// `sqrt(m)` as an exact cyclotomic number, via quadratic Gauss sums of
    /// prime conductor: `sqrt(2) = zeta_8 + zeta_8^{-1}` and, for odd p,
    /// `sum_x e(x^2/p)` equals `sqrt(p)` or `i sqrt(p)` according to
    /// `p mod 4`.
    pub fn sqrt_exact(m: i64) -> Cyc {
        assert!(m >= 1);
        let mut acc = Cyc::from_integer(1);
        let mut square_part = BigInt::one();
        let mut rest = m;
        for p in prime_factors(m as u64) {
            let mut v = 0u32;
            while rest % (p as i64) == 0 {
                v += 1;
                rest /= p as i64;
            }
            square_part *= BigInt::from(p).pow(v / 2);
            if v % 2 == 1 {
                let sqrt_p = if p == 2 {
                    e_of(&Rational::new(1, 8)).add(&e_of(&Rational::new(-1, 8)))
                } else {
                    let mut counts = vec![BigInt::zero(); p as usize];
                    for x in 0..p {
                        counts[((x * x) % p) as usize] += 1;
                    }
                    let g = Cyc::from_exp_counts(&CycField::get(p as u32), counts, BigInt::one());
                    if p % 4 == 1 {
                        g
                    } else {
                        // g = i sqrt(p); divide by i
                        g.mul(&e_of(&Rational::new(-1, 4)))
                    }
                };
                acc = acc.mul(&sqrt_p);
            }
        }
        acc.scale(&Rational::new(square_part, BigInt::one()))
    }

    /// The sigma invariant as an exponent `r` with `sigma = e(r)` and
    /// `8r` integral, reduced into `(-1/2, 1/2]`. With `p` given, applies to
    /// the p-part.
    pub fn sigma(&self, p: Option<u64>) -> Result<Rational> {
        let m = match p {
            Some(p) => self.p_part(p),
            None => self.clone(),
        };
        let g = m.gauss_sum();
        let order = m.order();
        if !g.mul(&g.conj()).eq_value(&Cyc::from_integer(order)) {
            return Err(Error::Validation(
                "Gauss sum modulus mismatch: module is degenerate".into(),
            ));
        }
        let sigma = g.div(&Fqm::sqrt_exact(order))?;
        let r = sigma
            .snap_root_of_unity(8)
            .ok_or_else(|| Error::Internal("sigma is not an eighth root of unity".into()))?;
        Ok(r.mod1_centered())
    }
}

// ---------------------------------------------------------------------------
// Jacobi-Legendre symbol with the even-denominator convention
// ---------------------------------------------------------------------------

/// Standard Jacobi symbol `(a/b)` for odd positive `b`.
pub fn jacobi_symbol(a: i64, b: i64) -> i64 {
    assert!(b > 0 && b % 2 == 1);
    let mut a = a.rem_euclid(b);
    let mut b = b;
    let mut t = 1i64;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = b % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut b);
        if a % 4 == 3 && b % 4 == 3 {
            t = -t;
        }
        a %= b;
    }
    if b == 1 {
        t
    } else {
        0
    }
}

/// Generalized symbol `(a/b)` for `b = 2^beta * b'` with the convention
/// `(a/2^beta) = -1` iff `a = +-3 mod 8` and `beta` odd, `+1` otherwise.
/// Requires `gcd(a, b) = 1`.
pub fn jacobi_symbol_extended(a: i64, b: i64) -> i64 {
    assert!(b >= 1);
    let mut beta = 0u32;
    let mut odd = b;
    while odd % 2 == 0 {
        odd /= 2;
        beta += 1;
    }
    let mut s = if odd > 1 { jacobi_symbol(a, odd) } else { 1 };
    if beta % 2 == 1 {
        let r = a.rem_euclid(8);
        if r == 3 || r == 5 {
            s = -s;
        }
    }
    s
}

/// The closed scalar formulas for `sigma_p(D_n)`: with `q` the exact power of
/// `p` dividing `n`,
///
/// - odd `p`: `sqrt((-4/q)) * ((-n/q)/q)`,
/// - `p = 2`: `e_8(-n/q) * ((-n/q)/(2q))`,
///
/// returned as an exponent of `e`. The square root branch is `+i` for
/// `q = 3 mod 4`, pinned by agreement with the direct Gauss sums.
pub fn sigma_p_scalar_formula(n: i64, p: u64) -> Rational {
    assert!(n >= 1);
    let p = p as i64;
    let mut q = 1i64;
    let mut rest = n;
    while rest % p == 0 {
        q *= p;
        rest /= p;
    }
    let m = n / q;
    if p != 2 {
        // sqrt((-4/q)): (4/q) = 1, so this is sqrt((-1/q))
        let minus_one = jacobi_symbol(-1, q);
        let sqrt_exp = if minus_one == 1 {
            Rational::zero()
        } else {
            Rational::new(1, 4)
        };
        let s = jacobi_symbol(-m, q);
        let sym_exp = if s == 1 { Rational::zero() } else { Rational::new(1, 2) };
        (sqrt_exp + sym_exp).mod1_centered()
    } else {
        let e8 = Rational::new(-m.rem_euclid(8), 8);
        let s = jacobi_symbol_extended(-m, 2 * q);
        let sym_exp = if s == 1 { Rational::zero() } else { Rational::new(1, 2) };
        (e8 + sym_exp).mod1_centered()
    }
}

// ---------------------------------------------------------------------------
// Subgroups, duals, subquotients
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SubgroupMode {
    All,
    SelfDual,
}

impl Fqm {
    pub fn subgroup_from_generators(&self, gens: &[FqmElement]) -> FqmSubgroup {
        let mut seen: HashSet<usize> = HashSet::new();
        seen.insert(self.index_of(&self.zero_element()));
        let mut frontier = vec![self.zero_element()];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = self.add(&x, g);
                let idx = self.index_of(&y);
                if seen.insert(idx) {
                    frontier.push(y);
                }
            }
        }
        let mut element_indices: Vec<usize> = seen.into_iter().collect();
        element_indices.sort_unstable();
        FqmSubgroup { generators: gens.to_vec(), element_indices }
    }

    /// The dual `U* = { y : B(y, u) = 0 for all u in U }`, by enumeration.
    pub fn dual_subgroup(&self, u: &FqmSubgroup) -> FqmSubgroup {
        let gens = &u.generators;
        let mut element_indices = Vec::new();
        let mut dual_gens: Vec<FqmElement> = Vec::new();
        for y in self.elements() {
            if gens.iter().all(|g| self.b_value(&y, g).is_zero()) {
                element_indices.push(self.index_of(&y));
                dual_gens.push(y);
            }
        }
        element_indices.sort_unstable();
        FqmSubgroup { generators: dual_gens, element_indices }
    }

    pub fn is_isotropic(&self, u: &FqmSubgroup) -> bool {
        u.element_indices
            .iter()
            .all(|&i| self.q_value(&self.element_by_index(i)).is_zero())
    }

    /// All isotropic subgroups (optionally only the self-dual ones), by
    /// layered generator extension with canonical-form deduplication.
    pub fn isotropic_subgroups(
        &self,
        mode: SubgroupMode,
        budget: usize,
    ) -> Result<Vec<FqmSubgroup>> {
        let n = self.element_count();
        if n > budget {
            return Err(Error::Resource(format!(
                "module order {n} exceeds subgroup enumeration budget {budget}"
            )));
        }
        let isotropic: Vec<FqmElement> = self
            .elements()
            .filter(|x| self.q_value(x).is_zero())
            .collect();
        let mut found: BTreeMap<Vec<usize>, FqmSubgroup> = BTreeMap::new();
        let zero = self.subgroup_from_generators(&[]);
        let mut queue = vec![zero.clone()];
        found.insert(zero.element_indices.clone(), zero);
        while let Some(u) = queue.pop() {
            let members: HashSet<usize> = u.element_indices.iter().copied().collect();
            for x in &isotropic {
                if members.contains(&self.index_of(x)) {
                    continue;
                }
                if !u.generators.iter().all(|g| self.b_value(x, g).is_zero()) {
                    continue;
                }
                let mut gens = u.generators.clone();
                gens.push(x.clone());
                let bigger = self.subgroup_from_generators(&gens);
                if !found.contains_key(&bigger.element_indices) {
                    found.insert(bigger.element_indices.clone(), bigger.clone());
                    queue.push(bigger);
                    if found.len() > 1_000_000 {
                        return Err(Error::Resource("subgroup explosion".into()));
                    }
                }
            }
        }
        let mut out: Vec<FqmSubgroup> = found.into_values().collect();
        if mode == SubgroupMode::SelfDual {
            out.retain(|u| {
                let dual = self.dual_subgroup(u);
                dual.element_indices == u.element_indices
            });
        }
        out.sort_by_key(|u| (u.element_indices.len(), u.element_indices.clone()));
        Ok(out)
    }
}

/// The quotient `U*/U` of an isotropic subgroup, with coset representatives
/// and the projection `U* -> U*/U`.
pub struct Subquotient {
    pub module: Fqm,
    /// Lifts of the quotient generators into the ambient module.
    pub gen_lifts: Vec<FqmElement>,
    ambient_rank: usize,
    /// `z = h_a_inv * lift(y)` then `coords_i = (u_snf * z)_i mod d_i`.
    h_a_inv: Vec<Vec<Rational>>,
    u_snf: IMat,
    divisors: Vec<BigInt>,
    kept: Vec<usize>,
}

impl Fqm {
    pub fn subquotient(&self, u: &FqmSubgroup) -> Result<Subquotient> {
        if !self.is_isotropic(u) {
            return Err(Error::Validation("subgroup is not isotropic".into()));
        }
        let r = self.rank();
        if u.element_indices.len() == 1 {
            // U = {0}: the quotient is M itself, identically presented
            return Ok(Subquotient {
                module: self.clone(),
                gen_lifts: FqmAutomorphism::identity(self).images,
                ambient_rank: r,
                h_a_inv: (0..r)
                    .map(|i| {
                        (0..r)
                            .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                            .collect()
                    })
                    .collect(),
                u_snf: IMat::identity(r),
                divisors: self.orders.iter().map(|&u| BigInt::from(u)).collect(),
                kept: (0..r).collect(),
            });
        }
        let dual = self.dual_subgroup(u);
        // lattice bases: columns = lifts of subgroup elements plus order relations
        let lattice_of = |sub: &FqmSubgroup| -> IMat {
            let k = sub.element_indices.len();
            IMat::from_fn(r, k + r, |i, j| {
                if j < k {
                    BigInt::from(self.element_by_index(sub.element_indices[j]).coords[i])
                } else if j - k == i {
                    BigInt::from(self.orders[i])
                } else {
                    BigInt::zero()
                }
            })
        };
        if r == 0 {
            return Ok(Subquotient {
                module: Fqm::trivial(),
                gen_lifts: vec![],
                ambient_rank: 0,
                h_a_inv: vec![],
                u_snf: IMat::identity(0),
                divisors: vec![],
                kept: vec![],
            });
        }
        let h_a = linalg::column_lattice_basis(&lattice_of(&dual));
        let h_b = linalg::column_lattice_basis(&lattice_of(u));
        let h_a_rat: Vec<Vec<Rational>> = (0..r)
            .map(|i| (0..r).map(|j| Rational::new(h_a.get(i, j).clone(), BigInt::one())).collect())
            .collect();
        let h_a_inv = rational_inverse(&h_a_rat)?;
        // c = h_a^{-1} h_b, integral because B-lattice is inside A-lattice
        let c = IMat::from_fn(r, r, |i, j| {
            let mut acc = Rational::zero();
            for k in 0..r {
                acc += &(&h_a_inv[i][k] * &Rational::new(h_b.get(k, j).clone(), BigInt::one()));
            }
            acc.as_integer().expect("U-lattice not inside U*-lattice")
        });
        let s = linalg::snf(&c);
        let uinv = s.u.inverse_unimodular();
        let kept: Vec<usize> = (0..r).filter(|&i| s.d[i] > BigInt::one()).collect();
        // lift of quotient generator k: h_a * (uinv column k), reduced into M
        let mut gen_lifts = Vec::new();
        for &k in &kept {
            let mut coords = vec![0i64; r];
            for i in 0..r {
                let mut acc = BigInt::zero();
                for j in 0..r {
                    acc += h_a.get(i, j) * uinv.get(j, k);
                }
                coords[i] = (acc % BigInt::from(self.orders[i]))
                    .to_i64()
                    .unwrap()
                    .rem_euclid(self.orders[i]);
            }
            gen_lifts.push(FqmElement { coords });
        }
        let orders: Vec<i64> = kept.iter().map(|&i| s.d[i].to_i64().unwrap()).collect();
        let q_diag: Vec<Rational> = gen_lifts.iter().map(|x| self.q_value(x)).collect();
        let rr = kept.len();
        let mut b = vec![vec![Rational::zero(); rr]; rr];
        for i in 0..rr {
            for j in 0..rr {
                b[i][j] = self.b_value(&gen_lifts[i], &gen_lifts[j]);
            }
        }
        let module = Fqm::from_gram(orders.clone(), q_diag, b)?;
        // from_gram drops nothing here since all kept orders are > 1
        assert_eq!(module.orders, orders);
        Ok(Subquotient {
            module,
            gen_lifts,
            ambient_rank: r,
            h_a_inv,
            u_snf: s.u,
            divisors: s.d,
            kept,
        })
    }
}

impl Subquotient {
    /// Coset representative of a quotient element.
    pub fn lift(&self, ambient: &Fqm, x: &FqmElement) -> FqmElement {
        let mut acc = ambient.zero_element();
        for (i, g) in self.gen_lifts.iter().enumerate() {
            acc = ambient.add(&acc, &ambient.scale_element(x.coords[i], g));
        }
        acc
    }

    /// Projects an ambient element of `U*` to its quotient coordinates;
    /// `None` when the element is not in `U*`.
    pub fn project(&self, y: &FqmElement) -> Option<FqmElement> {
        let r = self.ambient_rank;
        let mut z = vec![Rational::zero(); r];
        for i in 0..r {
            for j in 0..r {
                z[i] += &(&self.h_a_inv[i][j] * &Rational::from_integer(y.coords[j]));
            }
        }
        if z.iter().any(|v| !v.is_integer()) {
            return None;
        }
        let mut coords = Vec::new();
        for &k in &self.kept {
            let mut acc = BigInt::zero();
            for j in 0..r {
                acc += self.u_snf.get(k, j) * z[j].as_integer().unwrap();
            }
            let d = &self.divisors[k];
            coords.push(acc.mod_floor(d).to_i64().unwrap());
        }
        Some(FqmElement { coords })
    }
}

// ---------------------------------------------------------------------------
// Orthogonal group and Witt equivalence
// ---------------------------------------------------------------------------

/// A form-preserving automorphism, columns = images of the generators.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FqmAutomorphism {
    pub images: Vec<FqmElement>,
}

impl FqmAutomorphism {
    pub fn identity(m: &Fqm) -> FqmAutomorphism {
        FqmAutomorphism {
            images: (0..m.rank())
                .map(|i| {
                    let mut c = vec![0i64; m.rank()];
                    c[i] = 1;
                    m.element(&c)
                })
                .collect(),
        }
    }

    pub fn negation(m: &Fqm) -> FqmAutomorphism {
        FqmAutomorphism {
            images: FqmAutomorphism::identity(m)
                .images
                .iter()
                .map(|g| m.neg_element(g))
                .collect(),
        }
    }

    pub fn apply(&self, m: &Fqm, x: &FqmElement) -> FqmElement {
        let mut acc = m.zero_element();
        for (i, img) in self.images.iter().enumerate() {
            acc = m.add(&acc, &m.scale_element(x.coords[i], img));
        }
        acc
    }

    pub fn preserves_form(&self, m: &Fqm) -> bool {
        // Q(alpha g_i) = Q(g_i) and B(alpha g_i, alpha g_j) = B(g_i, g_j)
        let gens = FqmAutomorphism::identity(m).images;
        for i in 0..m.rank() {
            if m.q_value(&self.images[i]) != m.q_value(&gens[i]) {
                return false;
            }
            for j in 0..m.rank() {
                if m.b_value(&self.images[i], &self.images[j]) != m.b_value(&gens[i], &gens[j]) {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug)]
pub enum OrthStrategy {
    /// Multiplications by square roots of unity mod `4m` on `D_m`-shaped
    /// modules (single generator of order `2m`).
    DmUnits,
    BruteForce,
}

impl Fqm {
    pub fn orthogonal_group(
        &self,
        strategy: OrthStrategy,
        budget: usize,
    ) -> Result<Vec<FqmAutomorphism>> {
        match strategy {
            OrthStrategy::DmUnits => {
                if self.rank() == 0 {
                    return Ok(vec![FqmAutomorphism { images: vec![] }]);
                }
                if self.rank() != 1 || self.orders[0] % 2 != 0 {
                    return Err(Error::Validation(
                        "dm_units applies to single-generator modules of even order".into(),
                    ));
                }
                let two_m = self.orders[0];
                let m = two_m / 2;
                let mut out = Vec::new();
                for a in 1..=two_m {
                    if num_integer::gcd(a, two_m) != 1 {
                        continue;
                    }
                    if (a * a - 1).rem_euclid(4 * m) == 0 {
                        out.push(FqmAutomorphism { images: vec![self.element(&[a])] });
                    }
                }
                Ok(out)
            }
            OrthStrategy::BruteForce => {
                let autos = quadratic_isomorphisms(self, self, budget, false)?;
                Ok(autos.into_iter().map(|imgs| FqmAutomorphism { images: imgs }).collect())
            }
        }
    }
}

/// All (or one, with `first_only`) isomorphisms of quadratic modules
/// `M -> N`, as generator-image lists. Brute force within budget.
pub fn quadratic_isomorphisms(
    m: &Fqm,
    n: &Fqm,
    budget: usize,
    first_only: bool,
) -> Result<Vec<Vec<FqmElement>>> {
    if m.order() != n.order() {
        return Ok(vec![]);
    }
    if m.element_count() > budget {
        return Err(Error::Resource(format!(
            "isomorphism search budget {budget} exceeded by order {}",
            m.order()
        )));
    }
    let n_elems: Vec<FqmElement> = n.elements().collect();
    let mut results: Vec<Vec<FqmElement>> = Vec::new();
    let mut images: Vec<FqmElement> = Vec::new();
    fn order_of(n: &Fqm, x: &FqmElement) -> i64 {
        let mut k = 1i64;
        let mut acc = x.clone();
        while !acc.coords.iter().all(|&c| c == 0) {
            acc = n.add(&acc, x);
            k += 1;
        }
        k
    }
    fn rec(
        m: &Fqm,
        n: &Fqm,
        n_elems: &[FqmElement],
        images: &mut Vec<FqmElement>,
        results: &mut Vec<Vec<FqmElement>>,
        first_only: bool,
    ) {
        if first_only && !results.is_empty() {
            return;
        }
        let i = images.len();
        if i == m.rank() {
            // verify bijectivity: image of the full map has |M| elements
            let mut seen = HashSet::new();
            for x in m.elements() {
                let mut acc = n.zero_element();
                for (k, img) in images.iter().enumerate() {
                    acc = n.add(&acc, &n.scale_element(x.coords[k], img));
                }
                seen.insert(n.index_of(&acc));
            }
            if seen.len() == m.element_count() {
                results.push(images.clone());
            }
            return;
        }
        let u = m.orders()[i];
        let mut gi = vec![0i64; m.rank()];
        gi[i] = 1;
        let gi = m.element(&gi);
        for y in n_elems {
            // the order of y must divide u, Q must match, B with earlier images must match
            if order_of(n, y) > u || u % order_of(n, y) != 0 {
                continue;
            }
            if n.q_value(y) != m.q_value(&gi) {
                continue;
            }
            let mut ok = true;
            for (j, imgj) in images.iter().enumerate() {
                let mut gj = vec![0i64; m.rank()];
                gj[j] = 1;
                let gj = m.element(&gj);
                if n.b_value(y, imgj) != m.b_value(&gi, &gj) {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            images.push(y.clone());
            rec(m, n, n_elems, images, results, first_only);
            images.pop();
        }
    }
    rec(m, n, &n_elems, &mut images, &mut results, first_only);
    Ok(results)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WittMethod {
    Invariants,
    Reduction,
}

impl Fqm {
    /// The anisotropic kernel: quotient by cyclic isotropic subgroups until no
    /// nonzero isotropic element remains.
    pub fn anisotropic_kernel(&self) -> Result<Fqm> {
        let mut m = self.clone();
        loop {
            let mut found = None;
            for x in m.elements() {
                if x.coords.iter().any(|&c| c != 0) && m.q_value(&x).is_zero() {
                    found = Some(x);
                    break;
                }
            }
            match found {
                None => return Ok(m),
                Some(x) => {
                    let u = m.subgroup_from_generators(&[x]);
                    m = m.subquotient(&u)?.module;
                }
            }
        }
    }

    pub fn witt_equivalent(&self, other: &Fqm, method: WittMethod, budget: usize) -> Result<bool> {
        match method {
            WittMethod::Invariants => {
                let prod = BigInt::from(self.order()) * BigInt::from(other.order());
                if !prod.sqrt().pow(2u32).eq(&prod) {
                    return Ok(false);
                }
                let mut primes = self.primes();
                for p in other.primes() {
                    if !primes.contains(&p) {
                        primes.push(p);
                    }
                }
                for p in primes {
                    if self.sigma(Some(p))? != other.sigma(Some(p))? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            WittMethod::Reduction => {
                let ka = self.anisotropic_kernel()?;
                let kb = other.anisotropic_kernel()?;
                if ka.order() != kb.order() {
                    return Ok(false);
                }
                let isos = quadratic_isomorphisms(&ka, &kb, budget, true)?;
                Ok(!isos.is_empty())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Half-integral matrices and their discriminant modules
// ---------------------------------------------------------------------------

/// A symmetric matrix `F` with `2F` integral and even diagonal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HalfIntegralMatrix {
    two_f: Vec<Vec<BigInt>>,
}

impl HalfIntegralMatrix {
    pub fn from_two_f(two_f: Vec<Vec<i64>>) -> Result<HalfIntegralMatrix> {
        let big: Vec<Vec<BigInt>> = two_f
            .iter()
            .map(|row| row.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        HalfIntegralMatrix::from_two_f_big(big)
    }

    pub fn from_two_f_big(two_f: Vec<Vec<BigInt>>) -> Result<HalfIntegralMatrix> {
        let n = two_f.len();
        if n == 0 || two_f.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("matrix must be square and nonempty".into()));
        }
        for i in 0..n {
            if (&two_f[i][i] % 2i32) != BigInt::zero() {
                return Err(Error::Validation("diagonal of 2F must be even".into()));
            }
            for j in 0..n {
                if two_f[i][j] != two_f[j][i] {
                    return Err(Error::Validation("2F must be symmetric".into()));
                }
            }
        }
        let m = HalfIntegralMatrix { two_f };
        if m.det_two_f().is_zero() {
            return Err(Error::Validation("2F is singular".into()));
        }
        Ok(m)
    }

    /// Scalar index `F = (n)`, i.e. `2F = (2n)`.
    pub fn scalar(n: i64) -> HalfIntegralMatrix {
        HalfIntegralMatrix { two_f: vec![vec![BigInt::from(2 * n)]] }
    }

    pub fn size(&self) -> usize {
        self.two_f.len()
    }

    pub fn two_f(&self) -> &Vec<Vec<BigInt>> {
        &self.two_f
    }

    pub fn two_f_imat(&self) -> IMat {
        IMat::from_fn(self.size(), self.size(), |i, j| self.two_f[i][j].clone())
    }

    /// `F` as a rational matrix.
    pub fn f_rational(&self) -> Vec<Vec<Rational>> {
        self.two_f
            .iter()
            .map(|row| row.iter().map(|v| Rational::new(v.clone(), BigInt::from(2))).collect())
            .collect()
    }

    pub fn f_inverse(&self) -> Result<Vec<Vec<Rational>>> {
        rational_inverse(&self.f_rational())
    }

    pub fn det_two_f(&self) -> BigInt {
        // rational Gauss; sizes are small
        let n = self.size();
        let mut m: Vec<Vec<Rational>> = self
            .two_f
            .iter()
            .map(|row| row.iter().map(|v| Rational::new(v.clone(), BigInt::one())).collect())
            .collect();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
                return BigInt::zero();
            };
            if p != col {
                m.swap(col, p);
                det = -det;
            }
            det = &det * &m[col][col];
            let d = m[col][col].clone();
            for r in col + 1..n {
                if !m[r][col].is_zero() {
                    let f = &m[r][col] / &d;
                    for j in col..n {
                        let t = &f * &m[col][j];
                        m[r][j] -= &t;
                    }
                }
            }
        }
        det.as_integer().expect("determinant of an integer matrix")
    }

    pub fn is_positive_definite(&self) -> bool {
        linalg::ldlt(&self.f_rational()).is_ok()
    }
}

/// The discriminant module `D_F = Z^n / 2F Z^n` with its quotient map.
pub struct Discriminant {
    pub module: Fqm,
    pub elementary_divisors: Vec<BigInt>,
    u: IMat,
    divisors: Vec<BigInt>,
    kept: Vec<usize>,
    /// Integer lifts in `Z^n` of the module generators.
    pub gen_lifts: Vec<Vec<BigInt>>,
}

impl Discriminant {
    /// Image of a lattice vector `r` in `D_F`, in module coordinates.
    pub fn project(&self, r: &[BigInt]) -> FqmElement {
        let mut coords = Vec::new();
        for &k in &self.kept {
            let mut acc = BigInt::zero();
            for j in 0..r.len() {
                acc += self.u.get(k, j) * &r[j];
            }
            coords.push(acc.mod_floor(&self.divisors[k]).to_i64().unwrap());
        }
        FqmElement { coords }
    }

    /// An integer lattice representative of a module element.
    pub fn lift(&self, x: &FqmElement) -> Vec<BigInt> {
        let n = self.u.cols;
        let mut acc = vec![BigInt::zero(); n];
        for (i, g) in self.gen_lifts.iter().enumerate() {
            for j in 0..n {
                acc[j] += BigInt::from(x.coords[i]) * &g[j];
            }
        }
        acc
    }
}

/// Builds `D_F` via the Smith normal form of `2F`, with `Q(x) = F^{-1}[x]/4`.
pub fn discriminant_module(f: &HalfIntegralMatrix) -> Result<Discriminant> {
    let n = f.size();
    let s = linalg::snf(&f.two_f_imat());
    let uinv = s.u.inverse_unimodular();
    let kept: Vec<usize> = (0..n).filter(|&i| s.d[i] > BigInt::one()).collect();
    let gen_lifts: Vec<Vec<BigInt>> = kept
        .iter()
        .map(|&k| (0..n).map(|i| uinv.get(i, k).clone()).collect())
        .collect();
    let finv = f.f_inverse()?;
    let quarter = Rational::new(1, 4);
    let half = Rational::new(1, 2);
    let orders: Vec<i64> = kept.iter().map(|&i| s.d[i].to_i64().unwrap()).collect();
    let q_diag: Vec<Rational> = gen_lifts
        .iter()
        .map(|c| (&linalg::quadratic_value(&finv, c, c) * &quarter).mod1())
        .collect();
    let rr = kept.len();
    let mut b = vec![vec![Rational::zero(); rr]; rr];
    for i in 0..rr {
        for j in 0..rr {
            b[i][j] = (&linalg::quadratic_value(&finv, &gen_lifts[i], &gen_lifts[j]) * &half)
                .mod1();
        }
    }
    let module = Fqm::from_gram(orders, q_diag, b)?;
    let total: BigInt = s.d.iter().product();
    assert_eq!(total, f.det_two_f().abs(), "|D_F| != |det 2F|");
    Ok(Discriminant {
        module,
        elementary_divisors: s.d.iter().filter(|d| **d > BigInt::one()).cloned().collect(),
        u: s.u,
        divisors: s.d,
        kept,
        gen_lifts,
    })
}

// ---------------------------------------------------------------------------
// Prime decomposition with index maps (used by the Weil representation layer)
// ---------------------------------------------------------------------------

pub struct PrimeSplit {
    /// `(p, p-part, generator lifts into the parent)`, primes ascending.
    pub parts: Vec<(u64, Fqm, Vec<FqmElement>)>,
    /// Maps a tensor-order index (parts enumerated left to right, each in its
    /// own canonical order) to the parent element index.
    pub tensor_to_parent: Vec<usize>,
    pub parent_to_tensor: Vec<usize>,
}

impl Fqm {
    pub fn prime_split(&self) -> PrimeSplit {
        let primes = self.primes();
        let parts: Vec<(u64, Fqm, Vec<FqmElement>)> = primes
            .iter()
            .map(|&p| {
                let (m, lifts) = self.p_part_with_lifts(p);
                (p, m, lifts)
            })
            .collect();
        let n = self.element_count();
        let tensor_size: usize = parts.iter().map(|(_, m, _)| m.element_count()).product();
        assert_eq!(tensor_size.max(1), n.max(1), "p-part orders do not multiply up");
        let mut tensor_to_parent = vec![0usize; n];
        let mut parent_to_tensor = vec![0usize; n];
        for t in 0..n.max(1) {
            // decode tensor index into per-part indices, most significant first
            let mut rest = t;
            let mut strides: Vec<usize> = Vec::with_capacity(parts.len());
            let mut acc = 1usize;
            for (_, m, _) in parts.iter().rev() {
                strides.push(acc);
                acc *= m.element_count();
            }
            strides.reverse();
            let mut x = self.zero_element();
            for ((_, m, lifts), stride) in parts.iter().zip(strides.iter()) {
                let idx = (rest / stride) % m.element_count();
                rest %= stride;
                let xe = m.element_by_index(idx);
                for (k, lift) in lifts.iter().enumerate() {
                    x = self.add(&x, &self.scale_element(xe.coords[k], lift));
                }
            }
            let pi = self.index_of(&x);
            tensor_to_parent[t] = pi;
            parent_to_tensor[pi] = t;
        }
        // the CRT map must be a bijection
        let mut seen = vec![false; n];
        for &i in &tensor_to_parent {
            assert!(!seen[i], "prime decomposition is not bijective");
            seen[i] = true;
        }
        PrimeSplit { parts, tensor_to_parent, parent_to_tensor }
    }
}

#[cfg(test)]
pub mod tests;
