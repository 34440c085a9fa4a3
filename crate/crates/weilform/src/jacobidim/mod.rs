//! Dimension machinery for Jacobi forms: the critical-weight isomorphism
//! (spaces of critical-weight forms are invariants of Weil representations
//! attached to `(-l) + (-F)` as `l` runs over divisors with squarefree
//! cofactor), the explicit trace dimension formula, the weight-1/2 theta
//! decomposition counts, and the `Gamma_0` level reduction.
//!
//! Everything here is exact: traces and eigenvalue data are computed in
//! cyclotomic fields and the stated rational combinations are verified to be
//! rational before they enter a result.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::cyclotomic::{e_of, prime_factors, Cyc};
use crate::error::{Error, Result};
use crate::fqm::{discriminant_module, Discriminant, Fqm, HalfIntegralMatrix, OrthStrategy};
use crate::linalg::{express_in_span, normalize_leading, RowReducer};
use crate::rational::Rational;
use crate::weilrep::{
    ind_gamma0, invariants, invariants_of_module, weil_rep, GenRep, RepBudget,
};

/// The coefficient system a space of Jacobi forms is taken with.
#[derive(Clone)]
pub enum Typus {
    /// Trivial character on the full modular group.
    Trivial,
    /// The one-dimensional character `eps^a`.
    Char(i64),
    /// An explicit representation (e.g. induced from `Gamma_0(l)`).
    Rep(GenRep),
}

impl Typus {
    pub fn char_exponent(&self) -> i64 {
        match self {
            Typus::Trivial => 0,
            Typus::Char(a) => a.rem_euclid(24),
            Typus::Rep(_) => 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PerLReport {
    pub l: i64,
    pub dim: usize,
    /// Projected invariant vectors, indexed by `D_l x D_F` pairs (or by
    /// `D_l x D_F x V` for representation typus).
    pub vectors: Vec<Vec<Cyc>>,
}

#[derive(Clone, Debug)]
pub struct CriticalDimReport {
    pub char_a: i64,
    /// The `4m` bookkeeping value divided by 4.
    pub m: i64,
    pub per_l: Vec<PerLReport>,
    pub total: usize,
    pub eisenstein_total: Option<usize>,
    /// Set when the computation short-circuits (even index size).
    pub reason: Option<String>,
}

/// Smallest `m` with `f_level | 4m` and `24 | 4am` (the latter makes the
/// character `eps^a` trivial on `Gamma(4m)*`).
pub fn minimal_m(f_level: i64, a: i64) -> i64 {
    let base = if f_level % 4 == 0 {
        f_level / 4
    } else {
        // level not divisible by 4 happens only for even-size indices
        f_level
    };
    let mut m = base;
    loop {
        if (4 * m) % f_level == 0 && (4 * a * m) % 24 == 0 {
            return m;
        }
        m += base;
    }
}

/// Divisors `l | m` with squarefree cofactor `m / l`, ascending.
pub fn l_range(m: i64) -> Vec<i64> {
    let mut out = Vec::new();
    for l in 1..=m {
        if m % l != 0 {
            continue;
        }
        let mut c = m / l;
        let mut squarefree = true;
        for p in prime_factors(c as u64) {
            let p = p as i64;
            if c % (p * p) == 0 {
                squarefree = false;
                break;
            }
            while c % p == 0 {
                c /= p;
            }
        }
        if squarefree {
            out.push(l);
        }
    }
    out
}

/// The basis-index permutation of `(-l) + (-F) (x V)` induced by negating the
/// first (`D_l`) coordinate.
fn eps_cross_one_perm(two_l: i64, rest: usize) -> Vec<usize> {
    let n = (two_l as usize) * rest;
    (0..n)
        .map(|i| {
            let x = (i / rest) as i64;
            let y = i % rest;
            let nx = (-x).rem_euclid(two_l) as usize;
            nx * rest + y
        })
        .collect()
}

/// Permutation induced by `x -> u x` on the `D_l` coordinate.
fn unit_cross_one_perm(two_l: i64, unit: i64, rest: usize) -> Vec<usize> {
    let n = (two_l as usize) * rest;
    (0..n)
        .map(|i| {
            let x = (i / rest) as i64;
            let y = i % rest;
            let nx = (unit * x).rem_euclid(two_l) as usize;
            nx * rest + y
        })
        .collect()
}

fn project_by_group(
    vectors: &[Vec<Cyc>],
    perms: &[Vec<usize>],
) -> Result<Vec<Vec<Cyc>>> {
    if vectors.is_empty() {
        return Ok(vec![]);
    }
    let dim = vectors[0].len();
    let scale = Rational::new(1, perms.len() as i64);
    let mut rr = RowReducer::new(dim);
    let mut out = Vec::new();
    for v in vectors {
        let mut acc = vec![Cyc::from_integer(0); dim];
        for perm in perms {
            for (i, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    acc[perm[i]] = acc[perm[i]].add(x);
                }
            }
        }
        let acc: Vec<Cyc> = acc.into_iter().map(|c| c.scale(&scale)).collect();
        if rr.add_row(acc.clone())? {
            out.push(normalize_leading(acc));
        }
    }
    Ok(out)
}

/// Critical-weight dimension: `dim J_{(n+1)/2, F}(typus)` as the sum over the
/// `l`-range of the `eps x 1`-even invariants of `W((-l) + (-F)) (x) V`.
pub fn dim_critical(
    f: &HalfIntegralMatrix,
    typus: &Typus,
    m_override: Option<i64>,
    eisenstein: bool,
    budget: &RepBudget,
) -> Result<CriticalDimReport> {
    let n = f.size();
    let a = typus.char_exponent();
    if !f.is_positive_definite() {
        return Err(Error::Validation(
            "critical-weight dimensions need a positive definite index".into(),
        ));
    }
    if n % 2 == 0 {
        return Ok(CriticalDimReport {
            char_a: a,
            m: 0,
            per_l: vec![],
            total: 0,
            eisenstein_total: if eisenstein { Some(0) } else { None },
            reason: Some("index size is even: both sides vanish trivially".into()),
        });
    }
    let disc = discriminant_module(f)?;
    let f_level = disc.module.level();
    let m = match m_override {
        Some(m) => {
            if (4 * m) % f_level != 0 || (4 * a * m) % 24 != 0 {
                return Err(Error::Validation(format!(
                    "m = {m} is not admissible for level {f_level}, character {a}"
                )));
            }
            m
        }
        None => minimal_m(f_level, a),
    };
    let df = disc.module.element_count();
    let mut per_l = Vec::new();
    let mut eis_total = 0usize;
    for l in l_range(m) {
        let dl = Fqm::standard_d(l, 1)?;
        let module = dl.neg().orth_sum(&disc.module.neg());
        let (vectors, eis_dim) = match typus {
            Typus::Trivial | Typus::Char(_) => {
                let inv = invariants_of_module(&module, a, budget)?;
                let even = project_by_group(
                    &inv.vectors,
                    &[
                        (0..inv.dim).collect(),
                        eps_cross_one_perm(2 * l, df),
                    ],
                )?;
                let eis = if eisenstein {
                    let units: Vec<i64> = dl
                        .orthogonal_group(OrthStrategy::DmUnits, usize::MAX)?
                        .iter()
                        .map(|u| u.images[0].coords[0])
                        .collect();
                    let perms: Vec<Vec<usize>> = units
                        .iter()
                        .map(|&u| unit_cross_one_perm(2 * l, u, df))
                        .collect();
                    project_by_group(&inv.vectors, &perms)?.len()
                } else {
                    0
                };
                (even, eis)
            }
            Typus::Rep(v) => {
                let rep = weil_rep(&module, budget)?.tensor(v, budget)?;
                let inv = invariants(&rep)?;
                let even = project_by_group(
                    &inv.vectors,
                    &[
                        (0..inv.dim).collect(),
                        eps_cross_one_perm(2 * l, df * v.dim),
                    ],
                )?;
                let eis = if eisenstein {
                    let units: Vec<i64> = dl
                        .orthogonal_group(OrthStrategy::DmUnits, usize::MAX)?
                        .iter()
                        .map(|u| u.images[0].coords[0])
                        .collect();
                    let perms: Vec<Vec<usize>> = units
                        .iter()
                        .map(|&u| unit_cross_one_perm(2 * l, u, df * v.dim))
                        .collect();
                    project_by_group(&inv.vectors, &perms)?.len()
                } else {
                    0
                };
                (even, eis)
            }
        };
        eis_total += eis_dim;
        per_l.push(PerLReport { l, dim: vectors.len(), vectors });
    }
    let total = per_l.iter().map(|p| p.dim).sum();
    Ok(CriticalDimReport {
        char_a: a,
        m,
        per_l,
        total,
        eisenstein_total: if eisenstein { Some(eis_total) } else { None },
        reason: None,
    })
}

/// The Eisenstein part only.
pub fn dim_critical_eisenstein(
    f: &HalfIntegralMatrix,
    typus: &Typus,
    budget: &RepBudget,
) -> Result<usize> {
    let rep = dim_critical(f, typus, None, true, budget)?;
    Ok(rep.eisenstein_total.unwrap_or(0))
}

// ---------------------------------------------------------------------------
// The explicit dimension formula
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct DimFormulaValue {
    pub weight2: i64,
    pub dim_x: usize,
    /// The four summands: main term, elliptic order-4 term, elliptic order-6
    /// term, parabolic term.
    pub terms: [Rational; 4],
    pub value: Rational,
    pub cusp_variant: bool,
    /// Dimension of the `T`-fixed subspace of `X` (subtracted in the cusp
    /// variant).
    pub t_fixed_dim: usize,
}

/// Small matrix of the action of an operator on the span of `basis`.
fn action_on_span(
    basis: &[Vec<Cyc>],
    apply: impl Fn(&[Cyc]) -> Vec<Cyc>,
) -> Result<Vec<Vec<Cyc>>> {
    let k = basis.len();
    let mut cols = Vec::with_capacity(k);
    for b in basis {
        let img = apply(b);
        let c = express_in_span(basis, &img)?
            .ok_or_else(|| Error::Internal("eigenspace is not operator-invariant".into()))?;
        cols.push(c);
    }
    // entries [i][j] = coefficient of basis_i in image of basis_j
    Ok((0..k)
        .map(|i| (0..k).map(|j| cols[j][i].clone()).collect())
        .collect())
}

fn small_trace(m: &[Vec<Cyc>]) -> Cyc {
    let mut acc = Cyc::from_integer(0);
    for (i, row) in m.iter().enumerate() {
        acc = acc.add(&row[i]);
    }
    acc
}

fn small_mul(a: &[Vec<Cyc>], b: &[Vec<Cyc>]) -> Vec<Vec<Cyc>> {
    let k = a.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let mut acc = Cyc::from_integer(0);
                    for t in 0..k {
                        if !a[i][t].is_zero() && !b[t][j].is_zero() {
                            acc = acc.add(&a[i][t].mul(&b[t][j]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn small_is_identity(a: &[Vec<Cyc>]) -> bool {
    a.iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, v)| if i == j { v.is_one() } else { v.is_zero() })
    })
}

/// Evaluates the trace formula for
/// `dim J_{k,F}(typus) - dim(skew cusp complement)`:
///
/// `(k - n/2 - 1)/12 dim X + 1/4 Re(e((2k-n)/8) tr(S, X))
///  + 2/(3 sqrt 3) Re(e((2k-n+1)/12) tr(ST, X)) - sum_j (lambda_j - 1/2)`
///
/// on the eigenspace `X` of the central element inside `W(-F) (x) V`. The
/// skew summand vanishes for `k >= n/2 + 2`, where the value is exactly
/// `dim J_{k,F}`. `weight2` is `2k`.
pub fn dim_formula(
    f: &HalfIntegralMatrix,
    weight2: i64,
    typus: &Typus,
    cusp_variant: bool,
    budget: &RepBudget,
) -> Result<DimFormulaValue> {
    let n = f.size() as i64;
    if !f.is_positive_definite() {
        return Err(Error::Validation("dimension formula needs positive definite index".into()));
    }
    let disc = discriminant_module(f)?;
    let mut rep = weil_rep(&disc.module.neg(), budget)?;
    match typus {
        Typus::Trivial => {}
        Typus::Char(a) => rep = rep.char_twist(*a)?,
        Typus::Rep(v) => rep = rep.tensor(v, budget)?,
    }
    // X = eigenspace of the central element (-1, i) for i^{n - 2k}
    let target = Rational::new(n - weight2, 4).mod1();
    let x = crate::weilrep::eigenspace_z(&rep, &target)?;
    let dim_x = x.len();
    if dim_x == 0 {
        return Ok(DimFormulaValue {
            weight2,
            dim_x: 0,
            terms: [Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero()],
            value: Rational::zero(),
            cusp_variant,
            t_fixed_dim: 0,
        });
    }
    let t_mat = action_on_span(&x, |v| rep.apply_t(v))?;
    let s_mat = action_on_span(&x, |v| rep.apply_s(v))?;
    let st_mat = small_mul(&s_mat, &t_mat);

    let term1 = &Rational::new(weight2 - n - 2, 24) * &Rational::from_integer(dim_x as i64);

    // 1/4 Re(e((2k - n)/8) tr S)
    let z = e_of(&Rational::new(weight2 - n, 8)).mul(&small_trace(&s_mat));
    let re2 = z.add(&z.conj()).scale(&Rational::new(1, 2));
    let term2 = re2
        .as_rational()
        .ok_or_else(|| Error::Internal("order-4 elliptic term is not rational".into()))?;
    let term2 = &term2 * &Rational::new(1, 4);

    // 2/(3 sqrt 3) Re(e((2k - n + 1)/12) tr ST) = (2/9) * [sqrt3 * Re(...)]
    let z = e_of(&Rational::new(weight2 - n + 1, 12)).mul(&small_trace(&st_mat));
    let re3 = z.add(&z.conj()).scale(&Rational::new(1, 2));
    let sqrt3 = e_of(&Rational::new(1, 12)).add(&e_of(&Rational::new(-1, 12)));
    let term3 = sqrt3
        .mul(&re3)
        .as_rational()
        .ok_or_else(|| Error::Internal("order-6 elliptic term is not rational".into()))?;
    let term3 = &term3 * &Rational::new(2, 9);

    // T eigenvalue multiplicities by discrete Fourier analysis of the power
    // traces: T has finite order on X
    let mut ord = 1usize;
    let mut power = t_mat.clone();
    while !small_is_identity(&power) {
        power = small_mul(&power, &t_mat);
        ord += 1;
        if ord > 100_000 {
            return Err(Error::Internal("T does not have small finite order on X".into()));
        }
    }
    let mut traces = Vec::with_capacity(ord);
    let mut p = (0..dim_x)
        .map(|i| {
            (0..dim_x)
                .map(|j| if i == j { Cyc::from_integer(1) } else { Cyc::from_integer(0) })
                .collect::<Vec<Cyc>>()
        })
        .collect::<Vec<_>>();
    for _ in 0..ord {
        traces.push(small_trace(&p));
        p = small_mul(&p, &t_mat);
    }
    let mut term4 = Rational::zero();
    let mut total_mult = BigInt::zero();
    let mut t_fixed_dim = 0usize;
    for b in 0..ord {
        let mut acc = Cyc::from_integer(0);
        for (t, tr) in traces.iter().enumerate() {
            let w = e_of(&Rational::new(-((b * t % ord) as i64), ord as i64));
            acc = acc.add(&w.mul(tr));
        }
        let mult = acc
            .scale(&Rational::new(1, ord as i64))
            .as_rational()
            .and_then(|r| r.as_integer())
            .ok_or_else(|| Error::Internal("non-integral eigenvalue multiplicity".into()))?;
        if mult.is_zero() {
            continue;
        }
        if b == 0 {
            t_fixed_dim = mult.to_usize().unwrap();
        }
        let lam = Rational::new(b as i64, ord as i64);
        term4 -= &(&Rational::new(mult.clone(), BigInt::one())
            * &(&lam - &Rational::new(1, 2)));
        total_mult += mult;
    }
    if total_mult != BigInt::from(dim_x) {
        return Err(Error::Internal("eigenvalue multiplicities do not sum to dim X".into()));
    }
    let mut value = &(&term1 + &term2) + &(&term3 + &term4);
    if cusp_variant {
        value -= &Rational::from_integer(t_fixed_dim as i64);
    }
    Ok(DimFormulaValue {
        weight2,
        dim_x,
        terms: [term1, term2, term3, term4],
        value,
        cusp_variant,
        t_fixed_dim,
    })
}

// ---------------------------------------------------------------------------
// Weight 1/2 counts, vanishing checks, Gamma_0 reduction
// ---------------------------------------------------------------------------

/// `dim M_{1/2}(Gamma(4m))` (or its Eisenstein part): the sum over the
/// `l`-range of the orbit counts of `+-1` (resp. `O(l)`) on `Z/2l`.
pub fn dim_halfweight_theta(m: i64, eisenstein: bool) -> Result<i64> {
    if m < 1 {
        return Err(Error::Validation("dim_halfweight_theta needs m >= 1".into()));
    }
    let mut total = 0i64;
    for l in l_range(m) {
        let dl = Fqm::standard_d(l, 1)?;
        let units: Vec<i64> = if eisenstein {
            dl.orthogonal_group(OrthStrategy::DmUnits, usize::MAX)?
                .iter()
                .map(|u| u.images[0].coords[0])
                .collect()
        } else {
            vec![1, 2 * l - 1]
        };
        // orbit count of the unit group acting on Z/2l
        let mut seen = vec![false; (2 * l) as usize];
        let mut orbits = 0i64;
        for x in 0..(2 * l) {
            if seen[x as usize] {
                continue;
            }
            orbits += 1;
            for u in &units {
                seen[((u * x).rem_euclid(2 * l)) as usize] = true;
            }
        }
        total += orbits;
    }
    Ok(total)
}

#[derive(Clone, Debug)]
pub struct VanishingReport {
    pub hypotheses_met: bool,
    pub dim: usize,
}

/// The small-rank vanishing statement: if `n != 7 mod 8` and `2F` has at most
/// one nontrivial elementary divisor then the critical-weight space vanishes.
/// When the hypotheses hold the vanishing is asserted exactly.
pub fn vanishing_check(f: &HalfIntegralMatrix, budget: &RepBudget) -> Result<VanishingReport> {
    let n = f.size();
    let disc = discriminant_module(f)?;
    let hypotheses_met = n % 8 != 7 && disc.elementary_divisors.len() <= 1;
    let dim = dim_critical(f, &Typus::Trivial, None, false, budget)?.total;
    if hypotheses_met && dim != 0 {
        return Err(Error::Internal(format!(
            "small-rank vanishing violated: dim = {dim} at size {n}"
        )));
    }
    Ok(VanishingReport { hypotheses_met, dim })
}

/// Factors `l = l1 * l2` with `l1 | det(2F)^infty` and `gcd(l2, det 2F) = 1`.
pub fn gamma0_reduce(f: &HalfIntegralMatrix, l: i64) -> (i64, i64) {
    assert!(l >= 1);
    let det = f.det_two_f();
    let mut l1 = 1i64;
    let mut l2 = l;
    for p in prime_factors(l as u64) {
        let p = p as i64;
        if (&det % BigInt::from(p)).is_zero() {
            while l2 % p == 0 {
                l1 *= p;
                l2 /= p;
            }
        }
    }
    (l1, l2)
}

/// `dim J_{(n+1)/2, F}(Gamma_0(l))` through the induced representation.
pub fn dim_critical_gamma0(
    f: &HalfIntegralMatrix,
    l: i64,
    budget: &RepBudget,
) -> Result<CriticalDimReport> {
    let v = ind_gamma0(l)?;
    dim_critical(f, &Typus::Rep(v), None, false, budget)
}

pub fn discriminant_of(f: &HalfIntegralMatrix) -> Result<Discriminant> {
    discriminant_module(f)
}

#[cfg(test)]
mod tests;
