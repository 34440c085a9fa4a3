//! Exact arithmetic in cyclotomic fields Q(zeta_N).
//!
//! A value is stored on the power basis `1, z, ..., z^(phi(N)-1)` of
//! `Q[x]/Phi_N(x)` as an integer coefficient vector over a single positive
//! denominator. The cyclotomic polynomial `Phi_N` is computed once per
//! conductor by the Moebius factorization of `x^N - 1`, together with
//! reduction rows for every power `x^k` up to `max(2*phi-2, N-1)`; reducing a
//! product or an exponent-indexed accumulation is then a single linear pass.
//!
//! All decisions made through this module (equality, root-of-unity
//! recognition) are exact; floating point appears only in [`Cyc::to_complex`],
//! which is diagnostic.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Hard upper bound on conductors; budgets in the callers keep real
/// computations far below this.
pub const MAX_CONDUCTOR: u32 = 100_000;

/// Euler totient by trial-division factorization.
pub fn euler_phi(n: u32) -> u32 {
    let mut n = n as u64;
    let mut result = n;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result as u32
}

/// Prime factors of `n`, ascending, without multiplicity.
pub fn prime_factors(n: u64) -> Vec<u64> {
    let mut n = n;
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Per-conductor context: the cyclotomic polynomial and reduction rows.
pub struct CycField {
    pub n: u32,
    pub phi: usize,
    /// Monic `Phi_N` as integer coefficients, length `phi + 1`.
    pub min_poly: Vec<BigInt>,
    /// `rows[k - phi]` = coefficients of `x^k mod Phi_N`, for
    /// `k` in `phi ..= max(2*phi - 2, n - 1)`.
    rows: Vec<Vec<BigInt>>,
    /// The same rows as machine integers when they all fit; enables the
    /// overflow-checked i128 product path.
    rows_small: Option<Vec<Vec<i64>>>,
}

impl CycField {
    /// Returns the shared context for conductor `n`, computing it on first use.
    pub fn get(n: u32) -> Arc<CycField> {
        assert!(n >= 1 && n <= MAX_CONDUCTOR, "conductor {n} out of range");
        static REGISTRY: OnceLock<Mutex<HashMap<u32, Arc<CycField>>>> = OnceLock::new();
        let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(f) = reg.lock().unwrap().get(&n) {
            return f.clone();
        }
        let f = Arc::new(CycField::build(n));
        reg.lock().unwrap().insert(n, f.clone());
        f
    }

    fn build(n: u32) -> CycField {
        let min_poly = cyclotomic_poly(n);
        let phi = min_poly.len() - 1;
        let kmax = std::cmp::max(2 * phi as i64 - 2, n as i64 - 1).max(phi as i64 - 1) as usize;
        // rows[k - phi]: x^k reduced; built iteratively from x^phi.
        let mut rows: Vec<Vec<BigInt>> = Vec::new();
        if kmax >= phi {
            let mut row: Vec<BigInt> = (0..phi).map(|j| -&min_poly[j]).collect();
            rows.push(row.clone());
            for _ in phi + 1..=kmax {
                // multiply by x: shift, then fold the overflow coefficient
                let top = row[phi - 1].clone();
                for j in (1..phi).rev() {
                    row[j] = row[j - 1].clone();
                }
                row[0] = BigInt::zero();
                if !top.is_zero() {
                    let top_row = &rows[0];
                    for j in 0..phi {
                        row[j] += &top * &top_row[j];
                    }
                }
                rows.push(row.clone());
            }
        }
        let rows_small = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| c.to_i64().filter(|v| v.abs() < (1 << 30)))
                    .collect::<Option<Vec<i64>>>()
            })
            .collect::<Option<Vec<Vec<i64>>>>();
        CycField { n, phi, min_poly, rows, rows_small }
    }

    fn row(&self, k: usize) -> &[BigInt] {
        &self.rows[k - self.phi]
    }
}

/// Coefficients as i64 when they are comfortably small.
fn small_coeffs(v: &[BigInt], limit: i64) -> Option<Vec<i64>> {
    v.iter()
        .map(|c| c.to_i64().filter(|x| x.abs() < limit))
        .collect()
}

/// Overflow-checked product in `Z[x]/Phi_N` on machine integers; `None` when
/// anything gets too large for the i128 accumulators.
fn small_mul(a: &[i64], b: &[i64], rows: &[Vec<i64>], phi: usize) -> Option<Vec<i128>> {
    let mut buf = vec![0i128; 2 * phi - 1];
    let (x, y) = if a.iter().filter(|c| **c != 0).count()
        <= b.iter().filter(|c| **c != 0).count()
    {
        (a, b)
    } else {
        (b, a)
    };
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0 {
            continue;
        }
        let xi = xi as i128;
        for (j, &yj) in y.iter().enumerate() {
            if yj != 0 {
                buf[i + j] = buf[i + j].checked_add(xi.checked_mul(yj as i128)?)?;
            }
        }
    }
    for k in (phi..buf.len()).rev() {
        if buf[k] == 0 {
            continue;
        }
        let c = std::mem::replace(&mut buf[k], 0);
        for (j, &rj) in rows[k - phi].iter().enumerate() {
            if rj != 0 {
                buf[j] = buf[j].checked_add(c.checked_mul(rj as i128)?)?;
            }
        }
    }
    buf.truncate(phi);
    Some(buf)
}

/// `Phi_n` as a monic integer polynomial (ascending coefficients).
fn cyclotomic_poly(n: u32) -> Vec<BigInt> {
    if n == 1 {
        // x - 1
        return vec![BigInt::from(-1), BigInt::from(1)];
    }
    let primes = prime_factors(n as u64);
    let k = primes.len();
    // Phi_n = prod_{S subset of primes} (x^(n/prod S) - 1)^{mu(prod S)}
    let mut numer: Vec<Vec<BigInt>> = Vec::new();
    let mut denom: Vec<Vec<BigInt>> = Vec::new();
    for mask in 0u32..(1 << k) {
        let mut d = 1u64;
        for (i, p) in primes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                d *= p;
            }
        }
        let e = (n as u64 / d) as usize;
        let sign = (mask.count_ones() % 2) == 0;
        let mut f = vec![BigInt::zero(); e + 1];
        f[0] = BigInt::from(-1);
        f[e] = BigInt::from(1);
        if sign {
            numer.push(f);
        } else {
            denom.push(f);
        }
    }
    let mut acc = vec![BigInt::one()];
    for f in numer {
        acc = poly_mul_int(&acc, &f);
    }
    for f in denom {
        acc = poly_div_exact_int(&acc, &f);
    }
    acc
}

fn poly_mul_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

/// Exact division of integer polynomials; panics if not exact (used only on
/// the Moebius factorization, where exactness is a theorem).
fn poly_div_exact_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut rem: Vec<BigInt> = a.to_vec();
    let db = b.len() - 1;
    assert!(!b[db].is_zero());
    let da = rem.len() - 1;
    assert!(da >= db);
    let mut quot = vec![BigInt::zero(); da - db + 1];
    for i in (0..=da - db).rev() {
        let (q, r) = rem[i + db].div_rem(&b[db]);
        assert!(r.is_zero(), "inexact cyclotomic polynomial division");
        if !q.is_zero() {
            for j in 0..=db {
                let t = &q * &b[j];
                rem[i + j] -= t;
            }
        }
        quot[i] = q;
    }
    assert!(rem.iter().all(|c| c.is_zero()), "nonzero remainder");
    quot
}

/// An exact element of Q(zeta_N).
///
/// Canonical form: `den > 0`, `gcd(content(num), den) = 1`, and `num` has
/// length `phi(conductor)`. Values with conductor 1 are plain rationals;
/// conductor 2 never occurs (it collapses to 1 at construction).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cyc {
    conductor: u32,
    num: Vec<BigInt>,
    den: BigInt,
}

impl Cyc {
    fn normalized(conductor: u32, mut num: Vec<BigInt>, mut den: BigInt) -> Cyc {
        assert!(!den.is_zero());
        if den.is_negative() {
            den = -den;
            for c in num.iter_mut() {
                *c = -&*c;
            }
        }
        let mut g = den.clone();
        for c in &num {
            if !c.is_zero() {
                g = g.gcd(c);
            }
            if g.is_one() {
                break;
            }
        }
        if !g.is_one() {
            den /= &g;
            for c in num.iter_mut() {
                *c /= &g;
            }
        }
        if num.iter().all(|c| c.is_zero()) {
            den = BigInt::one();
        }
        Cyc { conductor, num, den }
    }

    pub fn zero(conductor: u32) -> Cyc {
        let phi = CycField::get(conductor).phi;
        Cyc { conductor, num: vec![BigInt::zero(); phi], den: BigInt::one() }
    }

    pub fn one(conductor: u32) -> Cyc {
        let phi = CycField::get(conductor).phi;
        let mut num = vec![BigInt::zero(); phi];
        num[0] = BigInt::one();
        Cyc { conductor, num, den: BigInt::one() }
    }

    pub fn from_rational(r: &Rational) -> Cyc {
        Cyc::normalized(1, vec![r.numer().clone()], r.denom().clone())
    }

    pub fn from_integer(n: i64) -> Cyc {
        Cyc { conductor: 1, num: vec![BigInt::from(n)], den: BigInt::one() }
    }

    /// `zeta_n^k`, reduced to the power basis of conductor `n`.
    pub fn root_of_unity(n: u32, k: i64) -> Cyc {
        let n2 = if n <= 2 { 1 } else { n };
        if n2 == 1 {
            let k = k.rem_euclid(n.max(1) as i64);
            // n = 1 => 1; n = 2 => (-1)^k
            let v = if n == 2 && k == 1 { -1 } else { 1 };
            return Cyc::from_integer(v);
        }
        let field = CycField::get(n2);
        let k = k.rem_euclid(n2 as i64) as usize;
        let mut buf = vec![BigInt::zero(); n2 as usize];
        buf[k] = BigInt::one();
        Cyc::from_exp_counts(&field, buf, BigInt::one())
    }

    /// Builds `sum_k counts[k] * zeta_N^k / den` from a length-`N` (or shorter)
    /// exponent-indexed accumulator. The workhorse behind Gauss sums and the
    /// structured matrix products.
    pub fn from_exp_counts(field: &CycField, mut buf: Vec<BigInt>, den: BigInt) -> Cyc {
        assert!(buf.len() <= field.rows.len() + field.phi);
        for k in (field.phi..buf.len()).rev() {
            if buf[k].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut buf[k], BigInt::zero());
            let row = field.row(k);
            for (j, rj) in row.iter().enumerate() {
                if !rj.is_zero() {
                    buf[j] += &c * rj;
                }
            }
        }
        buf.truncate(field.phi);
        buf.resize(field.phi, BigInt::zero());
        Cyc::normalized(field.n, buf, den)
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one()
            && self.num[0].is_one()
            && self.num.iter().skip(1).all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.num.iter().skip(1).all(|c| c.is_zero())
    }

    pub fn as_rational(&self) -> Option<Rational> {
        if self.is_rational() {
            Some(Rational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    /// Power-basis coefficient `i` as a rational.
    pub fn coeff(&self, i: usize) -> Rational {
        Rational::new(self.num[i].clone(), self.den.clone())
    }

    pub fn coeff_len(&self) -> usize {
        self.num.len()
    }

    /// The shared positive denominator of the canonical form.
    pub fn den_ref(&self) -> &BigInt {
        &self.den
    }

    /// Integer numerator of power-basis coefficient `k` (over [`Self::den_ref`]).
    pub fn num_at(&self, k: usize) -> BigInt {
        self.num[k].clone()
    }

    /// Re-expresses the value in the field of conductor `m`; `conductor | m`.
    pub fn embed(&self, m: u32) -> Cyc {
        if m == self.conductor {
            return self.clone();
        }
        assert!(
            m % self.conductor == 0,
            "cannot embed conductor {} into {}",
            self.conductor,
            m
        );
        let field = CycField::get(m);
        let stride = (m / self.conductor) as usize;
        let mut buf = vec![BigInt::zero(); m as usize];
        for (i, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                buf[(i * stride) % m as usize] += c;
            }
        }
        Cyc::from_exp_counts(&field, buf, self.den.clone())
    }

    fn lift_pair(a: &Cyc, b: &Cyc) -> (Cyc, Cyc) {
        if a.conductor == b.conductor {
            (a.clone(), b.clone())
        } else {
            let l = (a.conductor as u64).lcm(&(b.conductor as u64)) as u32;
            (a.embed(l), b.embed(l))
        }
    }

    pub fn add(&self, other: &Cyc) -> Cyc {
        let (a, b) = Cyc::lift_pair(self, other);
        let mut num = vec![BigInt::zero(); a.num.len()];
        for i in 0..a.num.len() {
            num[i] = &a.num[i] * &b.den + &b.num[i] * &a.den;
        }
        Cyc::normalized(a.conductor, num, &a.den * &b.den)
    }

    pub fn sub(&self, other: &Cyc) -> Cyc {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Cyc {
        Cyc {
            conductor: self.conductor,
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Cyc) -> Cyc {
        let (a, b) = Cyc::lift_pair(self, other);
        if a.conductor == 1 {
            return Cyc::normalized(1, vec![&a.num[0] * &b.num[0]], &a.den * &b.den);
        }
        let field = CycField::get(a.conductor);
        let phi = field.phi;
        // fast path: machine-integer convolution with checked arithmetic
        if let Some(rows) = &field.rows_small {
            if let (Some(xa), Some(xb)) =
                (small_coeffs(&a.num, 1 << 40), small_coeffs(&b.num, 1 << 40))
            {
                if let Some(num) = small_mul(&xa, &xb, rows, phi) {
                    return Cyc::normalized(
                        a.conductor,
                        num.into_iter().map(BigInt::from).collect(),
                        &a.den * &b.den,
                    );
                }
            }
        }
        let mut buf = vec![BigInt::zero(); 2 * phi - 1];
        // iterate the sparser operand on the outside
        let (x, y) = if a.num.iter().filter(|c| !c.is_zero()).count()
            <= b.num.iter().filter(|c| !c.is_zero()).count()
        {
            (&a, &b)
        } else {
            (&b, &a)
        };
        for (i, xi) in x.num.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.num.iter().enumerate() {
                if !yj.is_zero() {
                    buf[i + j] += xi * yj;
                }
            }
        }
        Cyc::from_exp_counts(&field, buf, &a.den * &b.den)
    }

    pub fn scale(&self, r: &Rational) -> Cyc {
        let num = self.num.iter().map(|c| c * r.numer()).collect();
        Cyc::normalized(self.conductor, num, &self.den * r.denom())
    }

    /// Complex conjugation, `zeta_N -> zeta_N^(-1)`.
    pub fn conj(&self) -> Cyc {
        if self.conductor == 1 {
            return self.clone();
        }
        let field = CycField::get(self.conductor);
        let n = self.conductor as usize;
        let mut buf = vec![BigInt::zero(); n];
        for (i, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                buf[(n - i) % n] += c;
            }
        }
        Cyc::from_exp_counts(&field, buf, self.den.clone())
    }

    pub fn pow(&self, e: u64) -> Cyc {
        let mut base = self.clone();
        let mut e = e;
        let mut acc = Cyc::one(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Galois conjugate `zeta -> zeta^a` for `a` coprime to the conductor.
    pub fn galois(&self, a: u32) -> Cyc {
        if self.conductor == 1 {
            return self.clone();
        }
        let n = self.conductor as usize;
        debug_assert_eq!(num_integer::gcd(a, self.conductor), 1);
        let field = CycField::get(self.conductor);
        let mut buf = vec![BigInt::zero(); n];
        for (i, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                buf[(i * a as usize) % n] += c;
            }
        }
        Cyc::from_exp_counts(&field, buf, self.den.clone())
    }

    /// Multiplicative inverse via the conjugate product: the product of all
    /// nontrivial Galois conjugates times `self` is the rational norm.
    pub fn inv(&self) -> Result<Cyc> {
        if self.is_zero() {
            return Err(Error::Internal(
                "division by zero in cyclotomic field (degenerate pivot)".into(),
            ));
        }
        if self.conductor == 1 {
            return Ok(Cyc::normalized(1, vec![self.den.clone()], self.num[0].clone()));
        }
        let n = self.conductor;
        let mut cofactor = Cyc::one(n);
        for a in 2..n {
            if num_integer::gcd(a, n) == 1 {
                cofactor = cofactor.mul(&self.galois(a));
            }
        }
        let norm = self.mul(&cofactor);
        let norm_rat = norm
            .as_rational()
            .expect("norm over the full Galois group must be rational");
        assert!(!norm_rat.is_zero(), "zero norm of a nonzero element");
        Ok(cofactor.scale(&norm_rat.recip()?))
    }

    pub fn div(&self, other: &Cyc) -> Result<Cyc> {
        Ok(self.mul(&other.inv()?))
    }

    fn from_rational_coeffs(conductor: u32, coeffs: &[BigRational]) -> Cyc {
        let phi = CycField::get(conductor).phi;
        let mut den = BigInt::one();
        for c in coeffs {
            den = den.lcm(c.denom());
        }
        let mut num = vec![BigInt::zero(); phi];
        for (i, c) in coeffs.iter().enumerate() {
            num[i] = c.numer() * (&den / c.denom());
        }
        Cyc::normalized(conductor, num, den)
    }

    pub fn eq_value(&self, other: &Cyc) -> bool {
        if self.conductor == other.conductor {
            return self == other;
        }
        let (a, b) = Cyc::lift_pair(self, other);
        a == b
    }

    /// Exact root-of-unity recognition: the exponent `r` in `[0,1)` with
    /// denominator at most `max_order` such that `self = e(r)`, if one exists.
    pub fn snap_root_of_unity(&self, max_order: u32) -> Option<Rational> {
        for d in 1..=max_order {
            for a in 0..d {
                if num_integer::gcd(a, d) != 1 {
                    continue;
                }
                let cand = e_of(&Rational::new(a as i64, d as i64));
                if self.eq_value(&cand) {
                    return Some(Rational::new(a as i64, d as i64));
                }
            }
        }
        None
    }

    /// Floating approximation `(re, im)` with a stated error bound.
    /// Diagnostics only; never used for exact decisions.
    pub fn to_complex(&self) -> (f64, f64, f64) {
        let den = self.den.to_f64().unwrap_or(f64::INFINITY);
        let n = self.conductor as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        let mut sum_abs = 0.0;
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cf = c.to_f64().unwrap_or(f64::INFINITY) / den;
            let angle = 2.0 * std::f64::consts::PI * (i as f64) / n;
            re += cf * angle.cos();
            im += cf * angle.sin();
            sum_abs += cf.abs();
        }
        let bound = sum_abs * f64::EPSILON * (self.num.len() as f64 + 8.0);
        (re, im, bound)
    }
}

/// `e(r) = exp(2 pi i r)` as an exact root of unity of conductor the reduced
/// denominator of `r`; conductors 1 and 2 collapse to the rationals.
pub fn e_of(r: &Rational) -> Cyc {
    let r = r.mod1();
    let d = r.denom().to_u32().expect("denominator too large for a root of unity");
    let a = r.numer().to_i64().expect("numerator overflow");
    Cyc::root_of_unity(d, a)
}

/// `e_m(x) = e(x/m)`.
pub fn e_m(x: i64, m: i64) -> Cyc {
    e_of(&Rational::new(x, m))
}

impl fmt::Display for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "*z".into(),
                _ => format!("*z^{i}"),
            };
            parts.push(format!("{c}{mono}"));
        }
        let body = parts.join(" + ");
        if self.den.is_one() {
            write!(f, "{body}")
        } else {
            write!(f, "({body})/{}", self.den)
        }
    }
}

impl fmt::Debug for Cyc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyc[{}]({})", self.conductor, self)
    }
}

impl serde::Serialize for Cyc {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("Cyc", 2)?;
        st.serialize_field("conductor", &self.conductor)?;
        let coeffs: Vec<String> = (0..self.num.len()).map(|i| self.coeff(i).to_string()).collect();
        st.serialize_field("coeffs", &coeffs)?;
        st.end()
    }
}

impl<'de> serde::Deserialize<'de> for Cyc {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        struct Raw {
            conductor: u32,
            coeffs: Vec<String>,
        }
        let raw = Raw::deserialize(de)?;
        if raw.conductor < 1 || raw.conductor > MAX_CONDUCTOR {
            return Err(serde::de::Error::custom("conductor out of range"));
        }
        if raw.conductor == 2 {
            return Err(serde::de::Error::custom(
                "conductor 2 collapses to the rationals; use conductor 1",
            ));
        }
        let phi = euler_phi(raw.conductor) as usize;
        if raw.coeffs.len() != phi {
            return Err(serde::de::Error::custom(format!(
                "expected {} coefficients for conductor {}, got {}",
                phi,
                raw.conductor,
                raw.coeffs.len()
            )));
        }
        let mut coeffs = Vec::with_capacity(phi);
        for s in &raw.coeffs {
            let r = Rational::from_str(s).map_err(serde::de::Error::custom)?;
            coeffs.push(BigRational::new(r.numer().clone(), r.denom().clone()));
        }
        Ok(Cyc::from_rational_coeffs(raw.conductor, &coeffs))
    }
}
