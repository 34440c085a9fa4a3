//! Exact truncated q-expansions: the Dedekind eta function, odd Jacobi
//! thetas, theta blocks, lattice theta series, the weight-one series
//! `theta_rho` attached to Eisenstein integers, and Jacobi forms assembled
//! from invariant vectors.
//!
//! A series is a sparse table `(q-exponent, zeta-exponent vector) ->
//! coefficient`. All q-exponents are integers over one denominator `q_den`;
//! zeta exponents are stored doubled when `zeta_den = 2` so that
//! half-integral theta exponents stay integral keys. Truncation is explicit:
//! a series knows the exclusive bound below which its table is complete, and
//! products propagate `min(o1 + v2, o2 + v1)` with `v` the valuations, so
//! precision never silently degrades.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::cyclotomic::Cyc;
use crate::error::{Error, Result};
use crate::fqm::{discriminant_module, HalfIntegralMatrix};
use crate::linalg::{self, ldlt, quadratic_value, RowReducer};
use crate::rational::{lcm_i64, Rational};

/// Declared modular metadata carried by a series.
#[derive(Clone, Debug, PartialEq)]
pub enum IndexMeta {
    Scalar(Rational),
    Matrix(HalfIntegralMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMeta {
    pub weight: Rational,
    pub index: IndexMeta,
    /// Character exponent mod 24 (power of the eta character).
    pub char_exp: i64,
}

impl SeriesMeta {
    fn scalar(weight: Rational, index: Rational, char_exp: i64) -> SeriesMeta {
        SeriesMeta { weight, index: IndexMeta::Scalar(index), char_exp: char_exp.rem_euclid(24) }
    }
}

/// Truncated Fourier expansion `sum c(l, r) q^l zeta^r`.
#[derive(Clone, Debug)]
pub struct JacobiQExp {
    pub n_vars: usize,
    pub q_den: i64,
    /// 1 or 2; zeta exponents are stored multiplied by this.
    pub zeta_den: i64,
    /// Exclusive upper bound on q-exponents for which the table is complete.
    pub trunc: Rational,
    /// Keys `(q numerator, doubled zeta exponents)`; values always nonzero.
    pub coeffs: BTreeMap<(i64, Vec<i64>), Cyc>,
    pub meta: SeriesMeta,
}

impl JacobiQExp {
    pub fn zero(n_vars: usize, trunc: Rational, meta: SeriesMeta) -> JacobiQExp {
        JacobiQExp { n_vars, q_den: 1, zeta_den: 1, trunc, coeffs: BTreeMap::new(), meta }
    }

    pub fn constant(c: Cyc, trunc: Rational) -> JacobiQExp {
        let mut s = JacobiQExp::zero(
            0,
            trunc,
            SeriesMeta::scalar(Rational::zero(), Rational::zero(), 0),
        );
        s.insert_term(0, vec![], c);
        s
    }


    fn below_trunc(&self, q_num: i64) -> bool {
        &Rational::new(q_num, self.q_den) < &self.trunc
    }

    pub fn insert_term(&mut self, q_num: i64, r: Vec<i64>, c: Cyc) {
        assert_eq!(r.len(), self.n_vars);
        if c.is_zero() || !self.below_trunc(q_num) {
            return;
        }
        let key = (q_num, r);
        let cur = self.coeffs.remove(&key);
        let v = match cur {
            Some(old) => old.add(&c),
            None => c,
        };
        if !v.is_zero() {
            self.coeffs.insert(key, v);
        }
    }

    pub fn is_zero_series(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Minimal q-exponent, or the truncation bound for the zero series.
    pub fn valuation(&self) -> Rational {
        self.coeffs
            .keys()
            .map(|(q, _)| Rational::new(*q, self.q_den))
            .min()
            .unwrap_or_else(|| self.trunc.clone())
    }

    pub fn coefficient(&self, q: &Rational, r: &[i64]) -> Cyc {
        // r given in true (possibly half-integral doubled) units of zeta_den
        let qs = q * &Rational::from_integer(self.q_den);
        let Some(qn) = qs.as_integer().and_then(|b| b.to_i64()) else {
            return Cyc::from_integer(0);
        };
        self.coeffs
            .get(&(qn, r.to_vec()))
            .cloned()
            .unwrap_or_else(|| Cyc::from_integer(0))
    }

    fn rescaled(&self, q_den: i64, zeta_den: i64) -> JacobiQExp {
        assert!(q_den % self.q_den == 0 && zeta_den % self.zeta_den == 0);
        let qf = q_den / self.q_den;
        let zf = zeta_den / self.zeta_den;
        let coeffs = self
            .coeffs
            .iter()
            .map(|((q, r), c)| ((q * qf, r.iter().map(|x| x * zf).collect()), c.clone()))
            .collect();
        JacobiQExp {
            n_vars: self.n_vars,
            q_den,
            zeta_den,
            trunc: self.trunc.clone(),
            coeffs,
            meta: self.meta.clone(),
        }
    }

    fn broadcast_vars(&self, n_vars: usize) -> JacobiQExp {
        if self.n_vars == n_vars {
            return self.clone();
        }
        assert_eq!(self.n_vars, 0, "can only broadcast scalar series");
        let coeffs = self
            .coeffs
            .iter()
            .map(|((q, _), c)| ((*q, vec![0i64; n_vars]), c.clone()))
            .collect();
        JacobiQExp { n_vars, coeffs, ..self.clone() }
    }

    fn align(a: &JacobiQExp, b: &JacobiQExp) -> (JacobiQExp, JacobiQExp) {
        let n_vars = a.n_vars.max(b.n_vars);
        let a = a.broadcast_vars(n_vars);
        let b = b.broadcast_vars(n_vars);
        let q_den = lcm_i64(a.q_den, b.q_den);
        let zeta_den = lcm_i64(a.zeta_den, b.zeta_den);
        (a.rescaled(q_den, zeta_den), b.rescaled(q_den, zeta_den))
    }

    /// Drops an unnecessary doubled zeta denominator (all exponents even).
    fn normalize_zeta_den(mut self) -> JacobiQExp {
        if self.zeta_den == 2 && self.coeffs.keys().all(|(_, r)| r.iter().all(|x| x % 2 == 0)) {
            self.coeffs = self
                .coeffs
                .into_iter()
                .map(|((q, r), c)| ((q, r.into_iter().map(|x| x / 2).collect()), c))
                .collect();
            self.zeta_den = 1;
        }
        self
    }

    pub fn add(&self, other: &JacobiQExp) -> JacobiQExp {
        let (a, b) = JacobiQExp::align(self, other);
        let trunc = if a.trunc < b.trunc { a.trunc.clone() } else { b.trunc.clone() };
        let mut out = JacobiQExp {
            n_vars: a.n_vars,
            q_den: a.q_den,
            zeta_den: a.zeta_den,
            trunc,
            coeffs: BTreeMap::new(),
            meta: a.meta.clone(),
        };
        for ((q, r), c) in a.coeffs.iter().chain(b.coeffs.iter()) {
            out.insert_term(*q, r.clone(), c.clone());
        }
        out.normalize_zeta_den()
    }

    pub fn neg(&self) -> JacobiQExp {
        let mut out = self.clone();
        for (_, c) in out.coeffs.iter_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn scale(&self, c: &Cyc) -> JacobiQExp {
        let mut out = self.clone();
        if c.is_zero() {
            out.coeffs.clear();
            return out;
        }
        for (_, v) in out.coeffs.iter_mut() {
            *v = v.mul(c);
        }
        out
    }

    /// Declared weights add, scalar indices add, character exponents add.
    fn mul_meta(a: &SeriesMeta, b: &SeriesMeta) -> SeriesMeta {
        let index = match (&a.index, &b.index) {
            (IndexMeta::Scalar(x), IndexMeta::Scalar(y)) => IndexMeta::Scalar(x + y),
            (IndexMeta::Matrix(f), IndexMeta::Scalar(z)) if z.is_zero() => {
                IndexMeta::Matrix(f.clone())
            }
            (IndexMeta::Scalar(z), IndexMeta::Matrix(f)) if z.is_zero() => {
                IndexMeta::Matrix(f.clone())
            }
            _ => IndexMeta::Scalar(Rational::zero()),
        };
        SeriesMeta {
            weight: &a.weight + &b.weight,
            index,
            char_exp: (a.char_exp + b.char_exp).rem_euclid(24),
        }
    }

    pub fn mul(&self, other: &JacobiQExp) -> JacobiQExp {
        let (a, b) = JacobiQExp::align(self, other);
        let va = a.valuation();
        let vb = b.valuation();
        let t1 = &a.trunc + &vb;
        let t2 = &b.trunc + &va;
        let trunc = if t1 < t2 { t1 } else { t2 };
        let mut out = JacobiQExp {
            n_vars: a.n_vars,
            q_den: a.q_den,
            zeta_den: a.zeta_den,
            trunc,
            coeffs: BTreeMap::new(),
            meta: JacobiQExp::mul_meta(&a.meta, &b.meta),
        };
        let bound_num = |s: &JacobiQExp| -> i64 {
            // first q-numerator at or beyond trunc
            let t = &s.trunc * &Rational::from_integer(s.q_den);
            t.floor_int().to_i64().unwrap_or(i64::MAX).saturating_add(1)
        };
        let cap = bound_num(&out);
        for ((qa, ra), ca) in &a.coeffs {
            for ((qb, rb), cb) in &b.coeffs {
                let q = qa + qb;
                if q >= cap {
                    continue;
                }
                let r: Vec<i64> = ra.iter().zip(rb.iter()).map(|(x, y)| x + y).collect();
                out.insert_term(q, r, ca.mul(cb));
            }
        }
        out.normalize_zeta_den()
    }

    pub fn pow(&self, e: u32) -> JacobiQExp {
        let mut acc = JacobiQExp::constant(Cyc::from_integer(1), self.trunc.clone());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Inverse of a one-variable-free series whose valuation term is a unit.
    /// The result is complete below `trunc - 2*valuation`.
    pub fn invert_unit(&self) -> Result<JacobiQExp> {
        if self.n_vars != 0 {
            return Err(Error::Validation("can only invert q-series without elliptic variables".into()));
        }
        if self.is_zero_series() {
            return Err(Error::Validation("cannot invert the zero series".into()));
        }
        let val = self.valuation();
        let vnum = (&val * &Rational::from_integer(self.q_den))
            .as_integer()
            .unwrap()
            .to_i64()
            .unwrap();
        let lead = self.coeffs.get(&(vnum, vec![])).unwrap().clone();
        let lead_inv = lead.inv()?;
        // u = self / (lead q^val): unit with constant term 1, integer keys over q_den
        let mut u: BTreeMap<i64, Cyc> = BTreeMap::new();
        for ((q, _), c) in &self.coeffs {
            u.insert(q - vnum, c.mul(&lead_inv));
        }
        let new_trunc = &(&self.trunc - &val) - &val;
        let cap = {
            let t = &(&self.trunc - &val) * &Rational::from_integer(self.q_den);
            t.floor_int().to_i64().unwrap().saturating_add(1)
        };
        let mut inv: BTreeMap<i64, Cyc> = BTreeMap::new();
        inv.insert(0, Cyc::from_integer(1));
        for k in 1..cap.max(1) {
            let mut acc = Cyc::from_integer(0);
            for (j, uj) in u.range(1..=k) {
                if let Some(cv) = inv.get(&(k - j)) {
                    acc = acc.add(&uj.mul(cv));
                }
            }
            let v = acc.neg();
            if !v.is_zero() {
                inv.insert(k, v);
            }
        }
        let mut out = JacobiQExp {
            n_vars: 0,
            q_den: self.q_den,
            zeta_den: 1,
            trunc: new_trunc,
            coeffs: BTreeMap::new(),
            meta: SeriesMeta::scalar(
                -&self.meta.weight,
                match &self.meta.index {
                    IndexMeta::Scalar(s) => -s,
                    IndexMeta::Matrix(_) => Rational::zero(),
                },
                -self.meta.char_exp,
            ),
        };
        for (k, c) in inv {
            out.insert_term(k - vnum, vec![], c.mul(&lead_inv));
        }
        Ok(out)
    }

    /// Substitutes `zeta -> zeta^{-1}` (negates all zeta exponents).
    pub fn flip_zeta(&self) -> JacobiQExp {
        let mut out = self.clone();
        out.coeffs = self
            .coeffs
            .iter()
            .map(|((q, r), c)| ((*q, r.iter().map(|x| -x).collect()), c.clone()))
            .collect();
        out
    }

    /// Coefficientwise equality below the smaller truncation bound.
    pub fn eq_to_common_trunc(&self, other: &JacobiQExp) -> bool {
        let (a, b) = JacobiQExp::align(self, other);
        let t = if a.trunc < b.trunc { a.trunc.clone() } else { b.trunc.clone() };
        let within = |s: &JacobiQExp, q: i64| &Rational::new(q, s.q_den) < &t;
        for ((q, r), c) in &a.coeffs {
            if within(&a, *q) && !b.coeffs.get(&(*q, r.clone())).map_or(false, |d| d.eq_value(c)) {
                return false;
            }
        }
        for ((q, r), c) in &b.coeffs {
            if within(&b, *q) && !a.coeffs.get(&(*q, r.clone())).map_or(false, |d| d.eq_value(c)) {
                return false;
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// The classical series
// ---------------------------------------------------------------------------

/// `eta = q^{1/24} prod_{n>=1} (1 - q^n)`, complete below `trunc`.
pub fn eta_qexp(trunc: &Rational) -> JacobiQExp {
    let mut unit = JacobiQExp::zero(
        0,
        trunc.clone(),
        SeriesMeta::scalar(Rational::zero(), Rational::zero(), 0),
    );
    unit.insert_term(0, vec![], Cyc::from_integer(1));
    let nmax = trunc.floor_int().to_i64().unwrap().max(0);
    for n in 1..=nmax {
        let mut f = JacobiQExp::zero(
            0,
            trunc.clone(),
            SeriesMeta::scalar(Rational::zero(), Rational::zero(), 0),
        );
        f.insert_term(0, vec![], Cyc::from_integer(1));
        f.insert_term(n, vec![], Cyc::from_integer(-1));
        unit = unit.mul(&f);
    }
    let mut out = JacobiQExp {
        n_vars: 0,
        q_den: 24,
        zeta_den: 1,
        trunc: trunc.clone(),
        coeffs: BTreeMap::new(),
        meta: SeriesMeta::scalar(Rational::new(1, 2), Rational::zero(), 1),
    };
    for ((q, _), c) in &unit.coeffs {
        out.insert_term(q * 24 + 1, vec![], c.clone());
    }
    out
}

/// `eta^k` for any integer `k` (negative powers via exact unit inversion).
pub fn eta_power(k: i64, trunc: &Rational) -> JacobiQExp {
    // generous working precision so that the stated truncation survives the
    // inversions and products
    let slack = &(trunc + &Rational::from_integer(2)) + &Rational::new(k.abs(), 12);
    let eta = eta_qexp(&slack);
    let base = if k >= 0 { eta } else { eta.invert_unit().expect("eta is a unit") };
    let mut acc = JacobiQExp::constant(Cyc::from_integer(1), slack);
    for _ in 0..k.unsigned_abs() {
        acc = acc.mul(&base);
    }
    acc.trunc = if &acc.trunc < trunc { acc.trunc.clone() } else { trunc.clone() };
    acc.coeffs.retain(|(q, _), _| &Rational::new(*q, acc.q_den) < &acc.trunc);
    acc.meta = SeriesMeta::scalar(Rational::new(k, 2), Rational::zero(), k);
    acc
}

/// The odd Jacobi theta `theta(tau, a z)`:
/// `q^{1/8} (zeta^{a/2} - zeta^{-a/2}) prod (1-q^n)(1-q^n zeta^a)(1-q^n zeta^{-a})`.
pub fn theta_odd(a: i64, trunc: &Rational) -> JacobiQExp {
    assert!(a >= 1);
    let zeta_den = if a % 2 == 1 { 2 } else { 1 };
    let meta = SeriesMeta::scalar(Rational::new(1, 2), Rational::new(a * a, 2), 3);
    let mut lead = JacobiQExp {
        n_vars: 1,
        q_den: 8,
        zeta_den,
        trunc: trunc.clone(),
        coeffs: BTreeMap::new(),
        meta: meta.clone(),
    };
    // zeta^{a/2} - zeta^{-a/2}; exponents stored doubled when half-integral
    let half_a = a * zeta_den / 2;
    lead.insert_term(1, vec![half_a], Cyc::from_integer(1));
    lead.insert_term(1, vec![-half_a], Cyc::from_integer(-1));
    let mut acc = lead;
    let nmax = trunc.floor_int().to_i64().unwrap().max(0) + 1;
    for n in 1..=nmax {
        let mut f = JacobiQExp::zero(
            1,
            trunc.clone(),
            SeriesMeta::scalar(Rational::zero(), Rational::zero(), 0),
        );
        f.insert_term(0, vec![0], Cyc::from_integer(1));
        f.insert_term(n, vec![0], Cyc::from_integer(-1));
        acc = acc.mul(&f);
        let mut g = JacobiQExp::zero(
            1,
            trunc.clone(),
            SeriesMeta::scalar(Rational::zero(), Rational::zero(), 0),
        );
        g.insert_term(0, vec![0], Cyc::from_integer(1));
        g.insert_term(n, vec![a], Cyc::from_integer(-1));
        acc = acc.mul(&g);
        let mut h = JacobiQExp::zero(
            1,
            trunc.clone(),
            SeriesMeta::scalar(Rational::zero(), Rational::zero(), 0),
        );
        h.insert_term(0, vec![0], Cyc::from_integer(1));
        h.insert_term(n, vec![-a], Cyc::from_integer(-1));
        acc = acc.mul(&h);
    }
    acc.trunc = trunc.clone();
    acc.coeffs.retain(|(q, _), _| &Rational::new(*q, acc.q_den) < trunc);
    acc.meta = meta;
    acc
}

/// A theta block `eta^e prod_i theta(tau, a_i z)`. Declared weight
/// `e/2 + #factors/2`, scalar index `sum a_i^2 / 2`, character
/// `e + 3 #factors mod 24`.
pub fn theta_block(eta_pow: i64, factors: &[i64], trunc: &Rational) -> JacobiQExp {
    let slack = &(trunc + &Rational::from_integer(2)) + &Rational::new(eta_pow.abs(), 12);
    let mut acc = eta_power(eta_pow, &slack).broadcast_vars(0);
    for &a in factors {
        acc = acc.mul(&theta_odd(a, &slack));
    }
    acc.trunc = if &acc.trunc < trunc { acc.trunc.clone() } else { trunc.clone() };
    acc.coeffs.retain(|(q, _), _| &Rational::new(*q, acc.q_den) < &acc.trunc);
    let idx: i64 = factors.iter().map(|a| a * a).sum();
    acc.meta = SeriesMeta::scalar(
        Rational::new(eta_pow + factors.len() as i64, 2),
        Rational::new(idx, 2),
        eta_pow + 3 * factors.len() as i64,
    );
    acc
}

/// `theta_{F,x}(tau, z) = sum_{r = x mod 2F Z^n} q^{F^{-1}[r]/4} zeta^r`,
/// enumerated exactly over the ellipsoid `F^{-1}[r]/4 < trunc`. With
/// `at_z_zero` the elliptic variables are specialized away.
pub fn theta_lattice(
    f: &HalfIntegralMatrix,
    x: &[i64],
    trunc: &Rational,
    at_z_zero: bool,
) -> Result<JacobiQExp> {
    let n = f.size();
    if x.len() != n {
        return Err(Error::Validation("coset representative has wrong length".into()));
    }
    if !f.is_positive_definite() {
        return Err(Error::Validation("lattice theta needs positive definite F".into()));
    }
    let frat = f.f_rational();
    let (l, d) = ldlt(&frat)?;
    let finv = f.f_inverse()?;
    // r = x + 2F k; F^{-1}[r]/4 = F[k + c] with c = F^{-1} x / 2
    let c: Vec<Rational> = (0..n)
        .map(|i| {
            let mut acc = Rational::zero();
            for j in 0..n {
                acc += &(&finv[i][j] * &Rational::new(x[j], 2));
            }
            acc
        })
        .collect();
    let level = discriminant_module(f)?.module.level().max(1);
    let q_den = lcm_i64(24, level);
    let meta = SeriesMeta {
        weight: Rational::new(n as i64, 2),
        index: IndexMeta::Matrix(f.clone()),
        char_exp: 0,
    };
    let mut out = JacobiQExp {
        n_vars: if at_z_zero { 0 } else { n },
        q_den,
        zeta_den: 1,
        trunc: trunc.clone(),
        coeffs: BTreeMap::new(),
        meta,
    };
    // depth-first over coordinates n-1 .. 0 with exact residual bounds:
    // F[v] = sum_j d_j (v_j + sum_{i>j} L[i][j] v_i)^2 for v = k + c
    let mut k = vec![0i64; n];
    enumerate_level(
        f,
        &l,
        &d,
        &c,
        trunc,
        (n - 1) as isize,
        &mut k,
        &mut |k: &[i64]| {
            // r = x + 2F k, exponent F^{-1}[r]/4 computed exactly
            let mut r = vec![BigInt::zero(); n];
            for i in 0..n {
                r[i] = BigInt::from(x[i]);
                for j in 0..n {
                    r[i] += f.two_f()[i][j].clone() * k[j];
                }
            }
            let qv = &quadratic_value(&finv, &r, &r) * &Rational::new(1, 4);
            if &qv >= trunc {
                return;
            }
            let qn = (&qv * &Rational::from_integer(q_den))
                .as_integer()
                .expect("q_den does not clear the exponent")
                .to_i64()
                .unwrap();
            let key = if at_z_zero {
                vec![]
            } else {
                r.iter().map(|v| v.to_i64().unwrap()).collect()
            };
            out.insert_term(qn, key, Cyc::from_integer(1));
        },
    );
    Ok(out)
}

/// Recursive Fincke-Pohst style enumeration: float bounds prune, the exact
/// rational test decides.
#[allow(clippy::too_many_arguments)]
fn enumerate_level(
    f: &HalfIntegralMatrix,
    l: &[Vec<Rational>],
    d: &[Rational],
    c: &[Rational],
    trunc: &Rational,
    level: isize,
    k: &mut Vec<i64>,
    emit: &mut dyn FnMut(&[i64]),
) {
    if level < 0 {
        // final exact membership check happens in the emitter
        emit(k);
        return;
    }
    let j = level as usize;
    let n = f.size();
    // s_j = c_j + sum_{i>j} L[i][j] (k_i + c_i)... the LDL recursion uses
    // w_j = v_j + sum_{i>j} L[i][j] v_i with v = k + c
    let mut s = c[j].clone();
    for i in j + 1..n {
        s += &(&l[i][j] * &(&Rational::from_integer(k[i]) + &c[i]));
    }
    // remaining budget: trunc minus the contributions of the outer levels
    let mut rem = trunc.clone();
    for jj in j + 1..n {
        let mut w = &Rational::from_integer(k[jj]) + &c[jj];
        for i in jj + 1..n {
            w += &(&l[i][jj] * &(&Rational::from_integer(k[i]) + &c[i]));
        }
        rem -= &(&d[jj] * &(&w * &w));
    }
    if rem.is_negative() {
        return;
    }
    let bound = (&rem / &d[j]).to_f64().max(0.0).sqrt() + 2.0;
    let center = -s.to_f64();
    let lo = (center - bound).floor() as i64;
    let hi = (center + bound).ceil() as i64;
    for v in lo..=hi {
        let w = &Rational::from_integer(v) + &s;
        if &(&d[j] * &(&w * &w)) > &rem {
            continue;
        }
        k[j] = v;
        enumerate_level(f, l, d, c, trunc, level - 1, k, emit);
    }
    k[j] = 0;
}

/// The weight-one series attached to an Eisenstein integer `rho` of norm `N`:
/// `theta_rho = sum_{alpha in O} (x(alpha)/3) q^{|alpha|^2/3} zeta^{y(alpha rho)}`
/// with `O = Z[(-1+sqrt(-3))/2]`, `x(alpha) = alpha + conj`,
/// `y(alpha) = (alpha - conj)/sqrt(-3)`.
pub fn theta_rho(n: i64, rho: (i64, i64), trunc: &Rational) -> Result<JacobiQExp> {
    let (up, vp) = rho;
    if (up - vp).rem_euclid(2) != 0 {
        return Err(Error::Validation("rho = (u + v sqrt(-3))/2 needs u = v mod 2".into()));
    }
    if up * up + 3 * vp * vp != 4 * n {
        return Err(Error::Validation(format!(
            "|rho|^2 = {} does not equal N = {n}",
            Rational::new(up * up + 3 * vp * vp, 4)
        )));
    }
    let meta = SeriesMeta::scalar(Rational::one(), Rational::from_integer(n), 8);
    let mut out = JacobiQExp {
        n_vars: 1,
        q_den: 3,
        zeta_den: 1,
        trunc: trunc.clone(),
        coeffs: BTreeMap::new(),
        meta,
    };
    // |alpha|^2 / 3 = (u^2 + 3 v^2) / 12 < trunc
    let cap12 = (trunc * &Rational::from_integer(12)).floor_int().to_i64().unwrap() + 1;
    let ubound = (cap12 as f64).sqrt() as i64 + 2;
    let vbound = ((cap12 as f64) / 3.0).sqrt() as i64 + 2;
    for u in -ubound..=ubound {
        let leg = crate::fqm::jacobi_symbol(u, 3);
        if leg == 0 {
            continue;
        }
        for v in -vbound..=vbound {
            if (u - v).rem_euclid(2) != 0 {
                continue;
            }
            let norm4 = u * u + 3 * v * v;
            if norm4 % 4 != 0 {
                continue;
            }
            let q3 = norm4 / 4; // |alpha|^2, q-exponent q3/3
            if &Rational::new(q3, 3) >= trunc {
                continue;
            }
            // y(alpha rho) = (u vp + v up)/2
            let y = (u * vp + v * up) / 2;
            out.insert_term(q3, vec![y], Cyc::from_integer(leg));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Assembly from invariant vectors, pullbacks, theta decomposition
// ---------------------------------------------------------------------------

/// `phi_v = sum_{x in D_l, y in D_F} lambda(x, y) theta_{l,x}(tau, 0)
/// theta_{F,y}(tau, z)`, where `v` is indexed by the canonical enumeration of
/// `D_l x D_F` pairs (the element order of the orthogonal sum).
pub fn phi_from_invariant(
    v: &[Cyc],
    l: i64,
    f: &HalfIntegralMatrix,
    trunc: &Rational,
) -> Result<JacobiQExp> {
    let disc = discriminant_module(f)?;
    let dl = 2 * l;
    let df = disc.module.element_count();
    if v.len() != (dl as usize) * df {
        return Err(Error::Validation(format!(
            "invariant vector length {} does not match |D_l| |D_F| = {}",
            v.len(),
            dl as usize * df
        )));
    }
    let fl = HalfIntegralMatrix::scalar(l);
    let n = f.size();
    let meta = SeriesMeta {
        weight: Rational::new(n as i64 + 1, 2),
        index: IndexMeta::Matrix(f.clone()),
        char_exp: 0,
    };
    let mut acc = JacobiQExp::zero(n, trunc.clone(), meta.clone());
    // theta_{F,y} computed once per y
    let mut thetas_f = Vec::with_capacity(df);
    for yi in 0..df {
        let y = disc.module.element_by_index(yi);
        let lift: Vec<i64> = disc.lift(&y).iter().map(|b| b.to_i64().unwrap()).collect();
        thetas_f.push(theta_lattice(f, &lift, trunc, false)?);
    }
    for x in 0..dl {
        // inner combination sum_y lambda(x, y) theta_{F,y}
        let mut inner = JacobiQExp::zero(n, trunc.clone(), meta.clone());
        let mut any = false;
        for yi in 0..df {
            let lam = &v[(x as usize) * df + yi];
            if lam.is_zero() {
                continue;
            }
            any = true;
            inner = inner.add(&thetas_f[yi].scale(lam));
        }
        if !any {
            continue;
        }
        let unary = theta_lattice(&fl, &[x], trunc, true)?;
        acc = acc.add(&unary.mul(&inner));
    }
    acc.meta = meta;
    Ok(acc)
}

/// `theta | U_M (tau, w) = theta(tau, M w)`: each term `q^l zeta^r` becomes
/// `q^l zeta^{M^t r}`; the declared index transforms as `F -> M^t F M`.
pub fn pullback_index(theta: &JacobiQExp, m: &[Vec<i64>]) -> Result<JacobiQExp> {
    let n = theta.n_vars;
    if m.len() != n || n == 0 {
        return Err(Error::Validation("pullback matrix must have one row per variable".into()));
    }
    let out_vars = m[0].len();
    if m.iter().any(|r| r.len() != out_vars) {
        return Err(Error::Validation("ragged pullback matrix".into()));
    }
    if theta.zeta_den != 1 {
        return Err(Error::Validation("pullback needs integral zeta exponents".into()));
    }
    let index = match &theta.meta.index {
        IndexMeta::Matrix(f) => {
            let two_f = f.two_f();
            let mut out = vec![vec![BigInt::zero(); out_vars]; out_vars];
            for a in 0..out_vars {
                for b in 0..out_vars {
                    let mut acc = BigInt::zero();
                    for i in 0..n {
                        for j in 0..n {
                            acc += BigInt::from(m[i][a]) * &two_f[i][j] * BigInt::from(m[j][b]);
                        }
                    }
                    out[a][b] = acc;
                }
            }
            // degenerate pullbacks (e.g. the zero map) leave no matrix index
            match HalfIntegralMatrix::from_two_f_big(out) {
                Ok(fm) => IndexMeta::Matrix(fm),
                Err(_) => IndexMeta::Scalar(Rational::zero()),
            }
        }
        IndexMeta::Scalar(s) => IndexMeta::Scalar(s.clone()),
    };
    let mut res = JacobiQExp {
        n_vars: out_vars,
        q_den: theta.q_den,
        zeta_den: 1,
        trunc: theta.trunc.clone(),
        coeffs: BTreeMap::new(),
        meta: SeriesMeta {
            weight: theta.meta.weight.clone(),
            index,
            char_exp: theta.meta.char_exp,
        },
    };
    for ((q, r), c) in &theta.coeffs {
        let mut rr = vec![0i64; out_vars];
        for a in 0..out_vars {
            for i in 0..n {
                rr[a] += m[i][a] * r[i];
            }
        }
        res.insert_term(*q, rr, c.clone());
    }
    Ok(res)
}

/// Theta decomposition `phi = sum_x h_x(tau) theta_{F,x}(tau, z)`: collects
/// the coefficients by `r mod 2F Z^n` with q-exponent `l - F^{-1}[r]/4`.
/// Every term must satisfy the defining cusp condition `4l - F^{-1}[r] >= 0`.
pub fn theta_decompose(
    phi: &JacobiQExp,
    f: &HalfIntegralMatrix,
) -> Result<Vec<(usize, JacobiQExp)>> {
    let n = f.size();
    if phi.n_vars != n {
        return Err(Error::Validation("variable count does not match the index size".into()));
    }
    if phi.zeta_den != 1 {
        return Err(Error::Validation("theta decomposition needs integral zeta exponents".into()));
    }
    let disc = discriminant_module(f)?;
    let finv = f.f_inverse()?;
    let df = disc.module.element_count();
    let q_den = lcm_i64(phi.q_den, lcm_i64(24, disc.module.level().max(1)));
    let mut parts: Vec<JacobiQExp> = (0..df)
        .map(|_| JacobiQExp {
            n_vars: 0,
            q_den,
            zeta_den: 1,
            trunc: phi.trunc.clone(),
            coeffs: BTreeMap::new(),
            meta: SeriesMeta::scalar(
                &phi.meta.weight - &Rational::new(n as i64, 2),
                Rational::zero(),
                phi.meta.char_exp,
            ),
        })
        .collect();
    for ((qn, r), c) in &phi.coeffs {
        let l = Rational::new(*qn, phi.q_den);
        let rb: Vec<BigInt> = r.iter().map(|&x| BigInt::from(x)).collect();
        let quarter = &quadratic_value(&finv, &rb, &rb) * &Rational::new(1, 4);
        let h_exp = &l - &quarter;
        if h_exp.is_negative() {
            return Err(Error::Validation(format!(
                "coefficient at q^{l} zeta^{r:?} violates 4l - F^{{-1}}[r] >= 0"
            )));
        }
        let xi = disc.module.index_of(&disc.project(&rb));
        let hn = (&h_exp * &Rational::from_integer(q_den))
            .as_integer()
            .expect("q_den does not clear decomposition exponents")
            .to_i64()
            .unwrap();
        // every lattice vector of a coset determines the same h-coefficient;
        // disagreement means the input is not a Jacobi form of this index
        match parts[xi].coeffs.get(&(hn, vec![])) {
            Some(existing) => {
                if !existing.eq_value(c) {
                    return Err(Error::Validation(format!(
                        "coefficients at equivalent lattice vectors disagree (coset {xi}, exponent {h_exp})"
                    )));
                }
            }
            None => {
                parts[xi].insert_term(hn, vec![], c.clone());
            }
        }
    }
    Ok(parts.into_iter().enumerate().collect())
}

/// Reconstructs `sum_x h_x theta_{F,x}` from decomposition components.
pub fn theta_reconstruct(
    parts: &[(usize, JacobiQExp)],
    f: &HalfIntegralMatrix,
    trunc: &Rational,
) -> Result<JacobiQExp> {
    let disc = discriminant_module(f)?;
    let n = f.size();
    let meta = SeriesMeta {
        weight: Rational::zero(),
        index: IndexMeta::Matrix(f.clone()),
        char_exp: 0,
    };
    let mut acc = JacobiQExp::zero(n, trunc.clone(), meta);
    for (xi, h) in parts {
        if h.is_zero_series() {
            continue;
        }
        let x = disc.module.element_by_index(*xi);
        let lift: Vec<i64> = disc.lift(&x).iter().map(|b| b.to_i64().unwrap()).collect();
        let th = theta_lattice(f, &lift, trunc, false)?;
        acc = acc.add(&h.mul(&th));
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Linear algebra over coefficient tables
// ---------------------------------------------------------------------------

/// Common coefficient matrix of a family of series: rows = series, columns =
/// the union of keys below the common truncation bound.
fn coefficient_matrix(series: &[JacobiQExp]) -> Result<(Vec<Vec<Cyc>>, usize)> {
    if series.is_empty() {
        return Ok((vec![], 0));
    }
    let n_vars = series.iter().map(|s| s.n_vars).max().unwrap();
    if series.iter().any(|s| s.n_vars != n_vars && s.n_vars != 0) {
        return Err(Error::Validation("mixed elliptic variable counts".into()));
    }
    let q_den = series.iter().fold(1i64, |acc, s| lcm_i64(acc, s.q_den));
    let zeta_den = series.iter().fold(1i64, |acc, s| lcm_i64(acc, s.zeta_den));
    let trunc = series
        .iter()
        .map(|s| s.trunc.clone())
        .min()
        .unwrap();
    let aligned: Vec<JacobiQExp> = series
        .iter()
        .map(|s| s.broadcast_vars(n_vars).rescaled(q_den, zeta_den))
        .collect();
    let mut keys: std::collections::BTreeSet<(i64, Vec<i64>)> = Default::default();
    for s in &aligned {
        for (k, _) in &s.coeffs {
            if &Rational::new(k.0, q_den) < &trunc {
                keys.insert(k.clone());
            }
        }
    }
    let keys: Vec<(i64, Vec<i64>)> = keys.into_iter().collect();
    let rows = aligned
        .iter()
        .map(|s| {
            keys.iter()
                .map(|k| s.coeffs.get(k).cloned().unwrap_or_else(|| Cyc::from_integer(0)))
                .collect()
        })
        .collect();
    Ok((rows, keys.len()))
}

/// Exact rank of the truncated coefficient matrix.
pub fn series_rank(series: &[JacobiQExp]) -> Result<usize> {
    let (rows, cols) = coefficient_matrix(series)?;
    let mut rr = RowReducer::new(cols.max(1));
    for mut row in rows {
        row.resize(cols.max(1), Cyc::from_integer(0));
        rr.add_row(row)?;
    }
    Ok(rr.rank())
}

/// Exact kernel: coefficient vectors `c` with `sum c_i series_i = 0` to the
/// common truncation order.
pub fn series_kernel(series: &[JacobiQExp]) -> Result<Vec<Vec<Cyc>>> {
    let (rows, cols) = coefficient_matrix(series)?;
    let m = linalg::CycMat::from_fn(cols.max(1), rows.len(), |i, j| {
        if cols == 0 { Cyc::from_integer(0) } else { rows[j][i].clone() }
    });
    linalg::matrix_kernel(&m)
}

/// Expresses `target` in the span of `basis` to the common truncation order.
pub fn series_express(basis: &[JacobiQExp], target: &JacobiQExp) -> Result<Option<Vec<Cyc>>> {
    let mut all: Vec<JacobiQExp> = basis.to_vec();
    all.push(target.clone());
    let (rows, _cols) = coefficient_matrix(&all)?;
    let target_row = rows.last().unwrap().clone();
    linalg::express_in_span(&rows[..rows.len() - 1], &target_row)
}

#[cfg(test)]
mod tests;
