//! Theorem-replay suites. Each suite runs one of the exact acceptance
//! checks end to end and reports per-check pass/fail status with a witness
//! sufficient to reproduce; `flagged` is reserved for the documented
//! degenerate quark cases. All catalogs are fixed, so runs are deterministic.

use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::config::Budgets;
use crate::cyclotomic::{e_of, prime_factors, Cyc};
use crate::error::{Error, Result};
use crate::fqm::parse::{fqm_from_spec, parse_fqm_spec, resolve, NoFsLoader};
use crate::fqm::{
    discriminant_module, jacobi_symbol, jacobi_symbol_extended, sigma_p_scalar_formula, Fqm,
    HalfIntegralMatrix, WittMethod,
};
use crate::jacobidim::{dim_critical, dim_critical_gamma0, gamma0_reduce, l_range, Typus};
use crate::linalg::express_in_span;
use crate::qseries::{
    series_express, series_rank, theta_block, theta_lattice, theta_decompose, theta_rho,
    JacobiQExp,
};
use crate::rational::Rational;
use crate::weilrep::{
    decompose_rank1, invariants_from_selfdual, module_invariant_basis, weil_rep,
};

pub const SUITE_NAMES: [&str; 12] = [
    "relations",
    "milgram",
    "sigma-scalar",
    "rank2",
    "simple-invariants",
    "weight-one",
    "quarks",
    "e8",
    "dimformula",
    "gamma0",
    "witt",
    "rank1-decomp",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Flagged,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct Check {
    pub id: String,
    pub status: Status,
    pub witness: Value,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub failures: usize,
}

impl VerifyReport {
    fn assemble(suite: &str, checks: Vec<Check>) -> VerifyReport {
        let failures = checks.iter().filter(|c| c.status == Status::Fail).count();
        VerifyReport { suite: suite.into(), checks, failures }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn check(id: impl Into<String>, ok: bool, witness: Value) -> Check {
    Check {
        id: id.into(),
        status: if ok { Status::Pass } else { Status::Fail },
        witness,
    }
}

/// The fixed catalog of 30 modules of order at most 72 used by the relation
/// suite (and, filtered by order, the Witt suite).
pub fn relation_catalog() -> Vec<&'static str> {
    vec![
        "D:1", "D:2", "D:3", "D:4", "D:5", "D:6", "D:6:5", "D:9", "D:12", "D:18", "D:36",
        "D:5:3", "L:3", "L:3:2", "L:5", "L:5:2", "L:7", "L:9", "L:25", "L:27", "H:2", "H:3",
        "H:4", "H:6", "H:8", "XY3:1", "XY3:2", "sum(D:1,L:3)", "sum(L:3,neg(L:3))",
        "sum(D:2,H:2)",
    ]
}

pub fn run_suite(name: &str, budgets: &Budgets) -> Result<VerifyReport> {
    match name {
        "relations" => suite_relations(budgets),
        "milgram" => suite_milgram(budgets),
        "sigma-scalar" => suite_sigma_scalar(budgets),
        "rank2" => suite_rank2(budgets),
        "simple-invariants" => suite_simple_invariants(budgets),
        "weight-one" => suite_weight_one(budgets),
        "quarks" => suite_quarks(budgets),
        "e8" => suite_e8(budgets),
        "dimformula" => suite_dimformula(budgets),
        "gamma0" => suite_gamma0(budgets),
        "witt" => suite_witt(budgets),
        "rank1-decomp" => suite_rank1_decomp(budgets),
        other => Err(Error::Usage(format!(
            "unknown suite {other:?}; available: {}",
            SUITE_NAMES.join(", ")
        ))),
    }
}

/// Criterion: every catalog representation satisfies the generator relations,
/// `S^4 = sigma^4`, and unitarity, with exact equality.
fn suite_relations(budgets: &Budgets) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for spec in relation_catalog() {
        let m = fqm_from_spec(spec, budgets.max_module_order)?;
        let rep = weil_rep(&m, &budgets.rep_budget())?;
        let report = rep.verify_relations()?;
        // S^4 = sigma^4 I on a basis vector
        let mut v: Vec<Cyc> = (0..rep.dim)
            .map(|i| if i == 0 { Cyc::from_integer(1) } else { Cyc::from_integer(0) })
            .collect();
        for _ in 0..4 {
            v = rep.apply_s(&v);
        }
        let sigma = m.sigma(None)?;
        let sigma4 = e_of(&(&(&sigma + &sigma) + &(&sigma + &sigma)));
        let s4_ok = v[0].eq_value(&sigma4) && v.iter().skip(1).all(|x| x.is_zero());
        checks.push(check(
            format!("relations[{spec}]"),
            report.all_ok() && s4_ok,
            json!({"spec": spec, "dim": rep.dim, "mode": report.mode,
                   "sigma_exponent": sigma.to_string()}),
        ));
    }
    Ok(VerifyReport::assemble("relations", checks))
}

/// Criterion: `sigma(D_F) = e_8(-n)` for 20 positive definite half-integral
/// matrices of size at most 4.
fn suite_milgram(_budgets: &Budgets) -> Result<VerifyReport> {
    let mats: Vec<Vec<Vec<i64>>> = vec![
        vec![vec![2]],
        vec![vec![4]],
        vec![vec![6]],
        vec![vec![2, 1], vec![1, 2]],
        vec![vec![2, 0], vec![0, 2]],
        vec![vec![2, 0], vec![0, 4]],
        vec![vec![4, 1], vec![1, 4]],
        vec![vec![2, 1], vec![1, 4]],
        vec![vec![4, 2], vec![2, 4]],
        vec![vec![6, 1], vec![1, 2]],
        vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]],
        vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]],
        vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 4]],
        vec![vec![2, 1, 0], vec![1, 2, 1], vec![0, 1, 2]],
        vec![vec![4, 1, 1], vec![1, 4, 1], vec![1, 1, 4]],
        vec![
            vec![2, -1, 0, 0],
            vec![-1, 2, -1, -1],
            vec![0, -1, 2, 0],
            vec![0, -1, 0, 2],
        ],
        vec![
            vec![2, 0, 0, 0],
            vec![0, 2, 0, 0],
            vec![0, 0, 2, 0],
            vec![0, 0, 0, 2],
        ],
        vec![
            vec![2, -1, 0, 0],
            vec![-1, 2, -1, 0],
            vec![0, -1, 2, -1],
            vec![0, 0, -1, 2],
        ],
        vec![
            vec![2, 0, 0, 0],
            vec![0, 4, 0, 0],
            vec![0, 0, 4, 0],
            vec![0, 0, 0, 6],
        ],
        vec![
            vec![2, 1, 1, 1],
            vec![1, 2, 1, 1],
            vec![1, 1, 2, 1],
            vec![1, 1, 1, 2],
        ],
    ];
    assert_eq!(mats.len(), 20);
    let mut checks = Vec::new();
    for (i, two_f) in mats.iter().enumerate() {
        let f = HalfIntegralMatrix::from_two_f(two_f.clone())?;
        let n = f.size() as i64;
        let ok = f.is_positive_definite() && {
            let d = discriminant_module(&f)?;
            d.module.sigma(None)? == Rational::new(-n, 8).mod1_centered()
        };
        checks.push(check(
            format!("milgram[{i}]"),
            ok,
            json!({"twoF": two_f, "size": n}),
        ));
    }
    Ok(VerifyReport::assemble("milgram", checks))
}

/// Criterion: the closed scalar formulas for `sigma_p(D_n)` agree with the
/// direct Gauss sums for all `n <= 200` and all `p | 2n`.
fn suite_sigma_scalar(_budgets: &Budgets) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for n in 1..=200i64 {
        let d = Fqm::standard_d(n, 1)?;
        let mut all_ok = true;
        let mut detail = Vec::new();
        for p in prime_factors(2 * n as u64) {
            let formula = sigma_p_scalar_formula(n, p);
            let direct = d.sigma(Some(p))?;
            if formula != direct {
                all_ok = false;
            }
            detail.push(json!({"p": p, "formula": formula.to_string(),
                               "gauss": direct.to_string()}));
        }
        checks.push(check(format!("sigma-scalar[n={n}]"), all_ok, json!(detail)));
    }
    Ok(VerifyReport::assemble("sigma-scalar", checks))
}

/// Criterion: for all two-generator p-modules with `p in {2,3,5}` and
/// exponents at most 3 (hyperbolic and xy-type planes included at p = 2),
/// `Inv != 0` iff the order is a perfect square and `sigma = 1`.
fn suite_rank2(budgets: &Budgets) -> Result<VerifyReport> {
    let mut local = budgets.clone();
    local.max_module_order = local.max_module_order.max(15_625);
    let mut specs: Vec<String> = Vec::new();
    for p in [3i64, 5] {
        let nonres = 2; // 2 is a quadratic non-residue mod 3 and mod 5
        let mut opts = vec![(1i64, 1i64)];
        for alpha in 1..=3u32 {
            let q = p.pow(alpha);
            opts.push((q, 1));
            opts.push((q, nonres));
        }
        for i in 0..opts.len() {
            for j in i..opts.len() {
                let (q1, a1) = opts[i];
                let (q2, a2) = opts[j];
                specs.push(format!("sum(L:{q1}:{a1},L:{q2}:{a2})"));
            }
        }
    }
    {
        let mut opts = vec![(1i64, 1i64), (1, 3)];
        for alpha in 1..=3u32 {
            let m = 1i64 << alpha;
            for a in [1i64, 3, 5, 7] {
                opts.push((m, a));
            }
        }
        for i in 0..opts.len() {
            for j in i..opts.len() {
                let (m1, a1) = opts[i];
                let (m2, a2) = opts[j];
                specs.push(format!("sum(D:{m1}:{a1},D:{m2}:{a2})"));
            }
        }
        for alpha in 1..=3 {
            specs.push(format!("H:{}", 1i64 << alpha));
            specs.push(format!("XY3:{alpha}"));
        }
    }
    let mut checks = Vec::new();
    for spec in &specs {
        let expr = parse_fqm_spec(spec)?;
        let m = resolve(&expr, &NoFsLoader, local.max_module_order)?;
        let order = BigInt::from(m.order());
        let is_square = order.sqrt().pow(2u32) == order;
        let sigma = m.sigma(None)?;
        let predicted = is_square && sigma.is_zero();
        let dim = module_invariant_basis(&m, 0, &local.rep_budget())?.vectors.len();
        checks.push(check(
            format!("rank2[{spec}]"),
            (dim > 0) == predicted,
            json!({"spec": spec, "order": m.order(), "square": is_square,
                   "sigma_exponent": sigma.to_string(), "inv_dim": dim}),
        ));
    }
    Ok(VerifyReport::assemble("rank2", checks))
}

/// Criteria: `dim Inv(L_q(a) + L_q(-a)) = sigma_0(q)` for the listed prime
/// powers, and the canonical `I_U` span the invariants on ten catalog modules
/// with square order and trivial local sigmas.
fn suite_simple_invariants(budgets: &Budgets) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for q in [3i64, 5, 7, 9, 25, 27] {
        let m = Fqm::standard_l(q, 1)?.orth_sum(&Fqm::standard_l(q, -1)?);
        let dim = module_invariant_basis(&m, 0, &budgets.rep_budget())?.vectors.len();
        let divisors = (1..=q).filter(|d| q % d == 0).count();
        checks.push(check(
            format!("divisor-count[q={q}]"),
            dim == divisors,
            json!({"q": q, "inv_dim": dim, "sigma0": divisors}),
        ));
    }
    let square_catalog = [
        "H:2", "H:3", "H:4", "H:5", "H:6", "H:8", "XY3:2",
        "sum(L:3,neg(L:3))", "sum(L:5,neg(L:5))", "sum(D:1,neg(D:1))",
    ];
    for spec in square_catalog {
        let m = fqm_from_spec(spec, budgets.max_module_order)?;
        // hypotheses of the spanning theorem
        let order = BigInt::from(m.order());
        let square = order.sqrt().pow(2u32) == order;
        let sigmas_trivial = m
            .primes()
            .iter()
            .all(|&p| m.sigma(Some(p)).map(|s| s.is_zero()).unwrap_or(false));
        let span = invariants_from_selfdual(&m, budgets.max_module_order as usize)?;
        let solver = module_invariant_basis(&m, 0, &budgets.rep_budget())?;
        let contained = span
            .vectors
            .iter()
            .map(|v| express_in_span(&solver.vectors, v).map(|o| o.is_some()))
            .collect::<Result<Vec<bool>>>()?
            .into_iter()
            .all(|b| b);
        checks.push(check(
            format!("selfdual-span[{spec}]"),
            square && sigmas_trivial && span.vectors.len() == solver.vectors.len() && contained,
            json!({"spec": spec, "span_dim": span.vectors.len(),
                   "solver_dim": solver.vectors.len()}),
        ));
    }
    Ok(VerifyReport::assemble("simple-invariants", checks))
}

/// Criteria: `J_{1,N} = 0` for `N <= 20`, `J_{1,N}(eps^16) = 0` for
/// `N <= 30`, and the critical dimension is independent of the admissible
/// `4m` chosen.
fn suite_weight_one(budgets: &Budgets) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let rb = budgets.rep_budget();
    for n in 1..=20i64 {
        let f = HalfIntegralMatrix::scalar(n);
        let rep = dim_critical(&f, &Typus::Trivial, None, false, &rb)?;
        checks.push(check(
            format!("trivial-char[N={n}]"),
            rep.total == 0,
            json!({"N": n, "total": rep.total, "m": rep.m}),
        ));
    }
    for n in 1..=30i64 {
        let f = HalfIntegralMatrix::scalar(n);
        let rep = dim_critical(&f, &Typus::Char(16), None, false, &rb)?;
        checks.push(check(
            format!("eps16[N={n}]"),
            rep.total == 0,
            json!({"N": n, "total": rep.total, "m": rep.m}),
        ));
    }
    for (n, a) in [(2i64, 0i64), (7, 8), (5, 16)] {
        let f = HalfIntegralMatrix::scalar(n);
        let typus = if a == 0 { Typus::Trivial } else { Typus::Char(a) };
        let base = dim_critical(&f, &typus, None, false, &rb)?;
        let doubled = dim_critical(&f, &typus, Some(2 * base.m), false, &rb)?;
        checks.push(check(
            format!("m-independence[N={n},a={a}]"),
            base.total == doubled.total,
            json!({"N": n, "a": a, "m": base.m, "total": base.total,
                   "total_at_2m": doubled.total}),
        ));
    }
    Ok(VerifyReport::assemble("weight-one", checks))
}

/// All lattice points `rho = (u + v sqrt(-3))/2` of norm `n`.
fn eisenstein_of_norm(n: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    let ub = (4.0 * n as f64).sqrt() as i64 + 1;
    for u in -ub..=ub {
        for v in -ub..=ub {
            if (u - v).rem_euclid(2) == 0 && u * u + 3 * v * v == 4 * n {
                out.push((u, v));
            }
        }
    }
    out
}

/// Criteria: the solver dimension of `J_{1,N}(eps^8)` equals the exact rank
/// of the theta_rho family, vanishing happens exactly when some
/// `(-3/q_p) != 1` for `p != 3`, and the theta-block factorization of
/// `theta_rho` holds coefficientwise.
fn suite_quarks(budgets: &Budgets) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let rb = budgets.rep_budget();
    let trunc = Rational::from_integer(8);
    for n in 1..=30i64 {
        let f = HalfIntegralMatrix::scalar(n);
        let report = dim_critical(&f, &Typus::Char(8), None, false, &rb)?;
        let family: Vec<JacobiQExp> = eisenstein_of_norm(n)
            .into_iter()
            .map(|rho| theta_rho(n, rho, &trunc))
            .collect::<Result<_>>()?;
        let rank = if family.is_empty() { 0 } else { series_rank(&family)? };
        // the vanishing condition away from 3
        let mut condition = true;
        let mut rest = n;
        while rest % 3 == 0 {
            rest /= 3;
        }
        for p in prime_factors(rest as u64) {
            let mut qp = 1i64;
            let mut t = n;
            while t % p as i64 == 0 {
                qp *= p as i64;
                t /= p as i64;
            }
            let sym = if p == 2 {
                jacobi_symbol_extended(-3, qp)
            } else {
                jacobi_symbol(-3, qp)
            };
            if sym != 1 {
                condition = false;
            }
        }
        let zero_ok = condition || report.total == 0;
        let agree = report.total == rank;
        let order = BigInt::from(n);
        let n_square = order.sqrt().pow(2u32) == order;
        let status = if agree && zero_ok {
            Status::Pass
        } else if !agree && n_square {
            // degenerate rho with q = |p| exists exactly for square N
            Status::Flagged
        } else {
            Status::Fail
        };
        checks.push(Check {
            id: format!("quark-dim[N={n}]"),
            status,
            witness: json!({"N": n, "solver": report.total, "series_rank": rank,
                            "condition_-3": condition}),
        });
    }
    // factorization: theta_rho = -theta((q+p)/2 z) theta((q-p)/2 z) theta(q z)/eta
    let t10 = Rational::from_integer(10);
    for norm in [3i64, 4, 7, 12, 13, 19] {
        let mut all_ok = true;
        let mut cases = Vec::new();
        for (p, q) in eisenstein_of_norm(norm) {
            if q < p.abs() || q == 0 {
                continue; // normalized sector q >= |p|
            }
            let series = theta_rho(norm, (p, q), &t10)?;
            if q == p.abs() {
                let ok = series.is_zero_series();
                cases.push(json!({"p": p, "q": q, "degenerate": true, "ok": ok}));
                all_ok &= ok;
            } else {
                let block = theta_block(-1, &[(q + p) / 2, (q - p) / 2, q], &t10).neg();
                let ok = series.eq_to_common_trunc(&block);
                cases.push(json!({"p": p, "q": q, "ok": ok}));
                all_ok &= ok;
            }
        }
        checks.push(check(
            format!("factorization[|rho|^2={norm}]"),
            all_ok && !cases.is_empty(),
            json!(cases),
        ));
    }
    Ok(VerifyReport::assemble("quarks", checks))
}

pub fn e8_two_g() -> Vec<Vec<i64>> {
    vec![
        vec![4, -2, 0, 0, 0, 0, 0, 1],
        vec![-2, 2, -1, 0, 0, 0, 0, 0],
        vec![0, -1, 2, -1, 0, 0, 0, 0],
        vec![0, 0, -1, 2, -1, 0, 0, 0],
        vec![0, 0, 0, -1, 2, -1, 0, 0],
        vec![0, 0, 0, 0, -1, 2, -1, 0],
        vec![0, 0, 0, 0, 0, -1, 2, 0],
        vec![1, 0, 0, 0, 0, 0, 0, 2],
    ]
}

/// Criterion: the rank-7 cut of the E8 theta series is a nonzero critical
/// form whose theta-decomposition vector lies in the computed invariant
/// space, exactly.
fn suite_e8(budgets: &Budgets) -> Result<VerifyReport> {
    let rb = budgets.rep_budget();
    let two_g = e8_two_g();
    let g = HalfIntegralMatrix::from_two_f(two_g)?;
    let two_f: Vec<Vec<i64>> = e8_two_g()[..7].iter().map(|r| r[..7].to_vec()).collect();
    let f = HalfIntegralMatrix::from_two_f(two_f)?;
    let mut checks = Vec::new();

    let report = dim_critical(&f, &Typus::Trivial, None, true, &rb)?;
    checks.push(check(
        "nonzero-dimension",
        report.total >= 1,
        json!({"total": report.total, "m": report.m,
               "eisenstein": report.eisenstein_total}),
    ));

    // theta of E8 pulled back along the first seven coordinates
    let trunc = Rational::from_integer(3);
    let theta = theta_lattice(&g, &[0; 8], &trunc, false)?;
    let m78: Vec<Vec<i64>> = (0..8)
        .map(|i| (0..7).map(|j| i64::from(i == j)).collect())
        .collect();
    let phi = crate::qseries::pullback_index(&theta, &m78)?;
    checks.push(check("pullback-nonzero", !phi.is_zero_series(), json!({})));

    let parts = theta_decompose(&phi, &f)?;
    let disc = discriminant_module(&f)?;
    // unary theta basis over the l-range, x taken mod +-
    let mut basis_series: Vec<JacobiQExp> = Vec::new();
    let mut basis_labels: Vec<(i64, i64)> = Vec::new();
    let ls = l_range(report.m);
    for &l in &ls {
        let fl = HalfIntegralMatrix::scalar(l);
        for x in 0..=l {
            basis_series.push(theta_lattice(&fl, &[x], &trunc, true)?);
            basis_labels.push((l, x));
        }
    }
    // solve h_y over the basis and rebuild lambda(x, y) per l
    let df = disc.module.element_count();
    let mut lambda_per_l: std::collections::BTreeMap<i64, Vec<Cyc>> = ls
        .iter()
        .map(|&l| (l, vec![Cyc::from_integer(0); (2 * l) as usize * df]))
        .collect();
    let mut solved = true;
    for (yi, h) in &parts {
        match series_express(&basis_series, h)? {
            Some(coeffs) => {
                for (bi, c) in coeffs.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let (l, x) = basis_labels[bi];
                    let lam = lambda_per_l.get_mut(&l).unwrap();
                    let two_l = 2 * l;
                    if x == 0 || 2 * x == two_l {
                        lam[(x as usize) * df + yi] = c.clone();
                    } else {
                        let half = c.scale(&Rational::new(1, 2));
                        lam[(x as usize) * df + yi] = half.clone();
                        lam[((two_l - x) as usize) * df + yi] = half;
                    }
                }
            }
            None => solved = false,
        }
    }
    checks.push(check("theta-components-in-basis", solved, json!({"l_range": ls})));

    let mut member = solved;
    for per_l in &report.per_l {
        let lam = &lambda_per_l[&per_l.l];
        let nonzero = lam.iter().any(|c| !c.is_zero());
        if nonzero {
            let expr = express_in_span(&per_l.vectors, lam)?;
            if expr.is_none() {
                member = false;
            }
        }
    }
    checks.push(check(
        "decomposition-vector-in-invariant-space",
        member,
        json!({"per_l_dims": report.per_l.iter().map(|p| p.dim).collect::<Vec<_>>()}),
    ));
    Ok(VerifyReport::assemble("e8", checks))
}

/// Independent oracle: dim M_k(SL_2(Z)).
fn dim_level_one(k: i64) -> i64 {
    if k < 0 || k % 2 != 0 {
        return 0;
    }
    if k % 12 == 2 {
        k / 12
    } else {
        k / 12 + 1
    }
}

/// Criterion: the trace formula reproduces `dim M_{k-4} + dim M_{k-6}` for
/// index 1 and even `k` in `[4, 20]`, and 0 for odd `k` in `[3, 19]`.
fn suite_dimformula(budgets: &Budgets) -> Result<VerifyReport> {
    let rb = budgets.rep_budget();
    let f = HalfIntegralMatrix::scalar(1);
    let mut checks = Vec::new();
    for k in (4..=20i64).step_by(2) {
        let out = crate::jacobidim::dim_formula(&f, 2 * k, &Typus::Trivial, false, &rb)?;
        let expect = dim_level_one(k - 4) + dim_level_one(k - 6);
        checks.push(check(
            format!("even[k={k}]"),
            out.value == Rational::from_integer(expect),
            json!({"k": k, "value": out.value.to_string(), "oracle": expect,
                   "terms": out.terms.iter().map(|t| t.to_string()).collect::<Vec<_>>()}),
        ));
    }
    for k in (3..=19i64).step_by(2) {
        let out = crate::jacobidim::dim_formula(&f, 2 * k, &Typus::Trivial, false, &rb)?;
        checks.push(check(
            format!("odd[k={k}]"),
            out.value.is_zero(),
            json!({"k": k, "value": out.value.to_string()}),
        ));
    }
    Ok(VerifyReport::assemble("dimformula", checks))
}

/// Criterion: the level factorization behind the `Gamma_0` reduction theorem
/// on 20 pairs, and vanishing of `J_{1,1}(Gamma_0(l))` for `l = 5, 7` through
/// the induced representation.
fn suite_gamma0(budgets: &Budgets) -> Result<VerifyReport> {
    let rb = budgets.rep_budget();
    let mut checks = Vec::new();
    let f1 = HalfIntegralMatrix::scalar(1);
    let f3 = HalfIntegralMatrix::scalar(3);
    let mut pairs: Vec<(&HalfIntegralMatrix, i64)> = Vec::new();
    for l in [1i64, 2, 3, 4, 6, 8, 10, 12, 35, 36] {
        pairs.push((&f1, l));
    }
    for l in [1i64, 2, 3, 5, 6, 9, 10, 15, 24, 49] {
        pairs.push((&f3, l));
    }
    for (i, (f, l)) in pairs.iter().enumerate() {
        let (l1, l2) = gamma0_reduce(f, *l);
        let det = f.det_two_f();
        let mut ok = l1 * l2 == *l && num_integer::gcd(l2, {
            // gcd with det via i64 (dets here are tiny)
            use num_traits::ToPrimitive;
            det.to_i64().unwrap()
        }) == 1;
        for p in prime_factors(l1 as u64) {
            if (&det % BigInt::from(p)) != BigInt::zero() {
                ok = false;
            }
        }
        checks.push(check(
            format!("factorization[{i}]"),
            ok,
            json!({"l": l, "l1": l1, "l2": l2, "det2F": det.to_string()}),
        ));
    }
    for l in [5i64, 7] {
        let report = dim_critical_gamma0(&f1, l, &rb)?;
        checks.push(check(
            format!("vanishing-on-Gamma0[{l}]"),
            report.total == 0,
            json!({"l": l, "total": report.total}),
        ));
    }
    Ok(VerifyReport::assemble("gamma0", checks))
}

/// Criterion: the invariant-based and reduction-based Witt equivalence tests
/// agree on every pair from the catalog of order at most 49.
fn suite_witt(budgets: &Budgets) -> Result<VerifyReport> {
    let mods: Vec<(String, Fqm)> = relation_catalog()
        .into_iter()
        .map(|s| Ok((s.to_string(), fqm_from_spec(s, budgets.max_module_order)?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|(_, m)| m.order() <= 49)
        .collect();
    let mut checks = Vec::new();
    for i in 0..mods.len() {
        for j in i..mods.len() {
            let (sa, ma) = &mods[i];
            let (sb, mb) = &mods[j];
            let inv = ma.witt_equivalent(mb, WittMethod::Invariants, 100)?;
            let red = ma.witt_equivalent(mb, WittMethod::Reduction, 100)?;
            checks.push(check(
                format!("witt[{sa}|{sb}]"),
                inv == red,
                json!({"a": sa, "b": sb, "invariants": inv, "reduction": red}),
            ));
        }
    }
    Ok(VerifyReport::assemble("witt", checks))
}

/// Criterion: for `m <= 12` the isotypic rank-1 pieces are pairwise
/// orthogonal and their dimensions add up to `2m`.
fn suite_rank1_decomp(_budgets: &Budgets) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for m in 1..=12i64 {
        let pieces = decompose_rank1(m, 1)?;
        let total: usize = pieces.iter().map(|p| p.basis.len()).sum();
        let mut orthogonal = true;
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                for v in &pieces[i].basis {
                    for w in &pieces[j].basis {
                        let mut dot = Cyc::from_integer(0);
                        for (a, b) in v.iter().zip(w.iter()) {
                            if !a.is_zero() && !b.is_zero() {
                                dot = dot.add(&a.mul(b));
                            }
                        }
                        if !dot.is_zero() {
                            orthogonal = false;
                        }
                    }
                }
            }
        }
        checks.push(check(
            format!("rank1[m={m}]"),
            total == 2 * m as usize && orthogonal,
            json!({"m": m, "dim_sum": total,
                   "pieces": pieces.iter().map(|p| json!({"f": p.f, "d": p.d,
                       "dim": p.basis.len()})).collect::<Vec<_>>()}),
        ));
    }
    Ok(VerifyReport::assemble("rank1-decomp", checks))
}
