//! Command-line surface: argument parsing, JSON output, exit codes.
//!
//! Every command is deterministic given its inputs and prints a single JSON
//! document on standard output; diagnostics go to standard error. Exit codes:
//! 0 success, 1 failed verification checks, 2 usage or validation errors,
//! 3 exceeded resource budgets, 4 internal consistency violations.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::config::Budgets;
use crate::cyclotomic::Cyc;
use crate::error::{Error, Result};
use crate::fqm::parse::{fqm_from_spec, matrix_from_json, parse_fqm_spec, FqmExpr};
use crate::fqm::{Fqm, FqmAutomorphism, HalfIntegralMatrix, OrthStrategy};
use crate::jacobidim::{
    dim_critical, dim_formula, dim_halfweight_theta, Typus,
};
use crate::linalg::{normalize_leading, RowReducer};
use crate::qseries::{
    eta_qexp, theta_block, theta_lattice, theta_odd, theta_rho, IndexMeta, JacobiQExp,
};
use crate::rational::Rational;
use crate::verify::{run_suite, SUITE_NAMES};
use crate::weilrep::{module_invariant_basis, invariants_from_selfdual, weil_rep};

pub struct CommandOutput {
    pub json: String,
    pub exit: i32,
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::Validation(_) | Error::Io(_) => 2,
        Error::Resource(_) => 3,
        Error::Internal(_) => 4,
    }
}

/// Minimal flag parser: `--name value` pairs, with a fixed set of boolean
/// switches; unknown flags are rejected.
struct Args {
    flags: BTreeMap<String, String>,
    switches: Vec<String>,
}

const SWITCHES: [&str; 5] = ["eisenstein", "cusp", "selfdual-only", "at-z-zero", "pretty"];

fn parse_args(argv: &[String]) -> Result<Args> {
    let mut flags = BTreeMap::new();
    let mut switches = Vec::new();
    let mut i = 0;
    while i < argv.len() {
        let a = &argv[i];
        if let Some(name) = a.strip_prefix("--") {
            if SWITCHES.contains(&name) {
                switches.push(name.to_string());
                i += 1;
            } else {
                let value = argv
                    .get(i + 1)
                    .ok_or_else(|| Error::Usage(format!("flag --{name} needs a value")))?;
                if flags.insert(name.to_string(), value.clone()).is_some() && name != "budget" {
                    return Err(Error::Usage(format!("flag --{name} given twice")));
                }
                // --budget may repeat; accumulate with a separator
                if name == "budget" {
                    let prev = flags.remove(name).unwrap();
                    let existing = flags.get(name).cloned();
                    let merged = match existing {
                        Some(e) => format!("{e};{prev}"),
                        None => prev,
                    };
                    flags.insert(name.to_string(), merged);
                }
                i += 2;
            }
        } else {
            return Err(Error::Usage(format!("unexpected positional argument {a:?}")));
        }
    }
    Ok(Args { flags, switches })
}

impl Args {
    fn flag(&self, name: &str) -> Option<&str> {
        self.flags.get(name).map(|s| s.as_str())
    }

    fn require(&self, name: &str) -> Result<&str> {
        self.flag(name)
            .ok_or_else(|| Error::Usage(format!("missing required flag --{name}")))
    }

    fn switch(&self, name: &str) -> bool {
        self.switches.iter().any(|s| s == name)
    }

    fn int(&self, name: &str) -> Result<Option<i64>> {
        match self.flag(name) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Usage(format!("--{name} expects an integer, got {v:?}"))),
        }
    }
}

fn budgets_with_overrides(args: &Args) -> Result<Budgets> {
    let mut budgets = Budgets::load_env()?;
    if let Some(spec) = args.flag("budget") {
        for kv in spec.split(';') {
            budgets.apply_override(kv)?;
        }
    }
    Ok(budgets)
}

/// Loads the `--matrix @file.json` or `--index N` flags into an index matrix.
fn matrix_arg(args: &Args) -> Result<HalfIntegralMatrix> {
    match (args.flag("matrix"), args.int("index")?) {
        (Some(path), None) => {
            let path = path
                .strip_prefix('@')
                .ok_or_else(|| Error::Usage("--matrix expects @file.json".into()))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("cannot read {path}: {e}")))?;
            matrix_from_json(&text)
        }
        (None, Some(n)) => {
            if n < 1 {
                return Err(Error::Usage("--index must be positive".into()));
            }
            Ok(HalfIntegralMatrix::scalar(n))
        }
        (Some(_), Some(_)) => Err(Error::Usage("--matrix and --index are exclusive".into())),
        (None, None) => Err(Error::Usage("need --matrix @file.json or --index N".into())),
    }
}

fn rational_json(r: &Rational) -> Value {
    Value::String(r.to_string())
}

fn cyc_json(c: &Cyc) -> Value {
    match c.as_rational() {
        Some(r) => rational_json(&r),
        None => serde_json::to_value(c).expect("cyclotomic serialization"),
    }
}

fn vectors_json(vectors: &[Vec<Cyc>]) -> Value {
    Value::Array(
        vectors
            .iter()
            .map(|v| Value::Array(v.iter().map(cyc_json).collect()))
            .collect(),
    )
}

fn series_json(kind: &str, s: &JacobiQExp) -> Value {
    let terms: Vec<Value> = s
        .coeffs
        .iter()
        .map(|((q, r), c)| {
            json!({"q": q.to_string(), "r": r, "c": cyc_json(c)})
        })
        .collect();
    let index = match &s.meta.index {
        IndexMeta::Scalar(x) => rational_json(x),
        IndexMeta::Matrix(f) => {
            json!({"twoF": f.two_f().iter().map(|row| {
                row.iter().map(|v| v.to_string()).collect::<Vec<_>>()
            }).collect::<Vec<_>>()})
        }
    };
    json!({
        "kind": kind,
        "q_den": s.q_den,
        "zeta_den": s.zeta_den,
        "trunc": s.trunc.to_string(),
        "terms": terms,
        "meta": {"weight": s.meta.weight.to_string(), "index": index,
                 "char": s.meta.char_exp},
    })
}

/// Group elementary divisors of an abstract module presentation.
fn elementary_divisors(m: &Fqm) -> Vec<String> {
    let r = m.rank();
    if r == 0 {
        return vec![];
    }
    let diag = crate::linalg::IMat::from_fn(r, r, |i, j| {
        if i == j {
            num_bigint::BigInt::from(m.orders()[i])
        } else {
            num_bigint::BigInt::from(0)
        }
    });
    let s = crate::linalg::snf(&diag);
    s.d.iter()
        .filter(|d| **d > num_bigint::BigInt::from(1))
        .map(|d| d.to_string())
        .collect()
}

pub fn run_command(argv: &[String]) -> Result<CommandOutput> {
    if argv.is_empty() {
        return Err(Error::Usage(usage_text()));
    }
    let verb = argv[0].as_str();
    let rest = &argv[1..];
    match verb {
        "fqm" => cmd_fqm(rest),
        "rep" => cmd_rep(rest),
        "inv" => cmd_inv(rest),
        "dim" => cmd_dim(rest),
        "qexp" => cmd_qexp(rest),
        "verify" => cmd_verify(rest),
        "help" | "--help" | "-h" => Ok(CommandOutput { json: usage_text(), exit: 0 }),
        other => Err(Error::Usage(format!("unknown command {other:?}\n{}", usage_text()))),
    }
}

fn usage_text() -> String {
    [
        "usage:",
        "  weilform fqm info --spec S",
        "  weilform rep check --spec S",
        "  weilform inv --spec S [--project even-first|O-first] [--selfdual-only]",
        "  weilform dim critical (--matrix @F.json | --index N) [--char a] [--eisenstein] [--m M]",
        "  weilform dim formula (--matrix @F.json | --index N) --weight k [--char a] [--cusp]",
        "  weilform dim halfweight --m M [--eisenstein]",
        "  weilform qexp eta --order O",
        "  weilform qexp theta --a A --order O",
        "  weilform qexp block --eta E --args a1,a2,... --order O",
        "  weilform qexp theta-rho --N N --rho u,v --order O",
        "  weilform qexp lattice (--matrix @F.json | --index N) --coset x1,... [--at-z-zero] --order O",
        "  weilform verify NAME|all [--budget key=value]",
        "",
        "FQM specs: D:m[:a], L:q[:a], H:n, XY3:alpha, triv, neg(E), sum(E1,E2,...),",
        "           ppart(E,p), matrix:@file.json",
        &format!("verify suites: {}", SUITE_NAMES.join(", ")),
    ]
    .join("\n")
}

fn cmd_fqm(argv: &[String]) -> Result<CommandOutput> {
    let sub = argv.first().map(|s| s.as_str());
    if sub != Some("info") {
        return Err(Error::Usage("fqm supports: info --spec S".into()));
    }
    let args = parse_args(&argv[1..])?;
    let budgets = budgets_with_overrides(&args)?;
    let spec = args.require("spec")?;
    let m = fqm_from_spec(spec, budgets.max_module_order)?;
    let mut sigma = BTreeMap::new();
    for p in m.primes() {
        sigma.insert(p.to_string(), m.sigma(Some(p))?.to_string());
    }
    let out = json!({
        "spec": spec,
        "order": m.order(),
        "level": m.level(),
        "nondegenerate": m.is_nondegenerate(),
        "sigma": sigma,
        "elementary_divisors": elementary_divisors(&m),
    });
    Ok(CommandOutput { json: pretty(&out), exit: 0 })
}

fn cmd_rep(argv: &[String]) -> Result<CommandOutput> {
    let sub = argv.first().map(|s| s.as_str());
    if sub != Some("check") {
        return Err(Error::Usage("rep supports: check --spec S".into()));
    }
    let args = parse_args(&argv[1..])?;
    let budgets = budgets_with_overrides(&args)?;
    let spec = args.require("spec")?;
    let m = fqm_from_spec(spec, budgets.max_module_order)?;
    let rep = weil_rep(&m, &budgets.rep_budget())?;
    let report = rep.verify_relations()?;
    let sigma = m.sigma(None)?;
    let sigma4_trivial = (&(&(&sigma + &sigma) + &(&sigma + &sigma))).mod1().is_zero();
    let out = json!({
        "spec": spec,
        "dim": rep.dim,
        "conductor": rep.conductor,
        "relations": report,
        "sigma_exponent": sigma.to_string(),
        "sigma4_trivial": sigma4_trivial,
    });
    Ok(CommandOutput { json: pretty(&out), exit: 0 })
}

/// Permutations of the product basis induced by form automorphisms of the
/// first summand.
fn first_factor_perms(
    first: &Fqm,
    rest_size: usize,
    autos: &[FqmAutomorphism],
) -> Vec<Vec<usize>> {
    let n1 = first.element_count();
    autos
        .iter()
        .map(|alpha| {
            (0..n1 * rest_size)
                .map(|i| {
                    let x = i / rest_size;
                    let y = i % rest_size;
                    let nx = first.index_of(&alpha.apply(first, &first.element_by_index(x)));
                    nx * rest_size + y
                })
                .collect()
        })
        .collect()
}

fn cmd_inv(argv: &[String]) -> Result<CommandOutput> {
    let args = parse_args(argv)?;
    let budgets = budgets_with_overrides(&args)?;
    let spec = args.require("spec")?;
    let expr = parse_fqm_spec(spec)?;
    let m = fqm_from_spec(spec, budgets.max_module_order)?;
    let basis = if args.switch("selfdual-only") {
        invariants_from_selfdual(&m, budgets.max_module_order as usize)?
    } else {
        module_invariant_basis(&m, 0, &budgets.rep_budget())?
    };
    let mut vectors = basis.vectors;
    if let Some(projection) = args.flag("project") {
        // projections act on the first summand of a sum(...) spec
        let FqmExpr::Sum(parts) = &expr else {
            return Err(Error::Usage(
                "--project needs a sum(...) spec to identify the first factor".into(),
            ));
        };
        let first = crate::fqm::parse::resolve(
            &parts[0],
            &crate::fqm::parse::FsMatrixLoader,
            budgets.max_module_order,
        )?;
        let rest_size = m.element_count() / first.element_count();
        let autos = match projection {
            "even-first" => vec![
                FqmAutomorphism::identity(&first),
                FqmAutomorphism::negation(&first),
            ],
            "O-first" => first.orthogonal_group(OrthStrategy::BruteForce, 100)?,
            other => {
                return Err(Error::Usage(format!(
                    "--project expects even-first or O-first, got {other:?}"
                )))
            }
        };
        let perms = first_factor_perms(&first, rest_size, &autos);
        let scale = Rational::new(1, perms.len() as i64);
        let mut rr = RowReducer::new(m.element_count());
        let mut projected = Vec::new();
        for v in &vectors {
            let mut acc = vec![Cyc::from_integer(0); v.len()];
            for perm in &perms {
                for (i, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        acc[perm[i]] = acc[perm[i]].add(x);
                    }
                }
            }
            let acc: Vec<Cyc> = acc.into_iter().map(|c| c.scale(&scale)).collect();
            if rr.add_row(acc.clone())? {
                projected.push(normalize_leading(acc));
            }
        }
        vectors = projected;
    }
    let out = json!({
        "spec": spec,
        "dim": vectors.len(),
        "basis": vectors_json(&vectors),
    });
    Ok(CommandOutput { json: pretty(&out), exit: 0 })
}

fn typus_arg(args: &Args) -> Result<Typus> {
    match args.int("char")? {
        None | Some(0) => Ok(Typus::Trivial),
        Some(a) => Ok(Typus::Char(a.rem_euclid(24))),
    }
}

fn cmd_dim(argv: &[String]) -> Result<CommandOutput> {
    let sub = argv
        .first()
        .ok_or_else(|| Error::Usage("dim supports: critical | formula | halfweight".into()))?
        .as_str();
    let args = parse_args(&argv[1..])?;
    let budgets = budgets_with_overrides(&args)?;
    match sub {
        "critical" => {
            let f = matrix_arg(&args)?;
            let typus = typus_arg(&args)?;
            let eisenstein = args.switch("eisenstein");
            let report = dim_critical(
                &f,
                &typus,
                args.int("m")?,
                eisenstein,
                &budgets.rep_budget(),
            )?;
            let per_l: Vec<Value> = report
                .per_l
                .iter()
                .map(|p| {
                    json!({"l": p.l, "dim": p.dim, "vectors": vectors_json(&p.vectors)})
                })
                .collect();
            let out = json!({
                "char": report.char_a,
                "m": report.m,
                "per_l": per_l,
                "total": report.total,
                "eisenstein_total": report.eisenstein_total,
                "reason": report.reason,
            });
            Ok(CommandOutput { json: pretty(&out), exit: 0 })
        }
        "formula" => {
            let f = matrix_arg(&args)?;
            let typus = typus_arg(&args)?;
            let weight: Rational = args
                .require("weight")?
                .parse()
                .map_err(|_| Error::Usage("--weight expects a (half-)integer".into()))?;
            let weight2 = (&weight + &weight)
                .as_integer()
                .and_then(|b| num_traits::ToPrimitive::to_i64(&b))
                .ok_or_else(|| Error::Usage("--weight must be half-integral".into()))?;
            let cusp = args.switch("cusp");
            let v = dim_formula(&f, weight2, &typus, cusp, &budgets.rep_budget())?;
            let out = json!({
                "weight": weight.to_string(),
                "dim_x": v.dim_x,
                "terms": v.terms.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                "value": v.value.to_string(),
                "integer": v.value.as_integer().map(|b| b.to_string()),
                "cusp_variant": v.cusp_variant,
                "t_fixed_dim": v.t_fixed_dim,
            });
            Ok(CommandOutput { json: pretty(&out), exit: 0 })
        }
        "halfweight" => {
            let m = args
                .int("m")?
                .ok_or_else(|| Error::Usage("dim halfweight needs --m M".into()))?;
            let eisenstein = args.switch("eisenstein");
            let dim = dim_halfweight_theta(m, eisenstein)?;
            let out = json!({"m": m, "eisenstein": eisenstein, "dim": dim});
            Ok(CommandOutput { json: pretty(&out), exit: 0 })
        }
        other => Err(Error::Usage(format!(
            "unknown dim subcommand {other:?}; use critical | formula | halfweight"
        ))),
    }
}

fn cmd_qexp(argv: &[String]) -> Result<CommandOutput> {
    let sub = argv
        .first()
        .ok_or_else(|| {
            Error::Usage("qexp supports: eta | theta | block | theta-rho | lattice".into())
        })?
        .as_str();
    let args = parse_args(&argv[1..])?;
    let budgets = budgets_with_overrides(&args)?;
    let order: Rational = match args.flag("order") {
        Some(v) => v
            .parse()
            .map_err(|_| Error::Usage("--order expects a rational".into()))?,
        None => budgets.default_trunc.clone(),
    };
    if order.is_negative() || order.is_zero() {
        return Err(Error::Usage("--order must be positive".into()));
    }
    let series = match sub {
        "eta" => eta_qexp(&order),
        "theta" => {
            let a = args
                .int("a")?
                .ok_or_else(|| Error::Usage("qexp theta needs --a A".into()))?;
            if a < 1 {
                return Err(Error::Usage("--a must be positive".into()));
            }
            theta_odd(a, &order)
        }
        "block" => {
            let eta_pow = args.int("eta")?.unwrap_or(0);
            let factors: Vec<i64> = match args.flag("args") {
                None => vec![],
                Some(list) => list
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<i64>()
                            .map_err(|_| Error::Usage(format!("bad theta argument {t:?}")))
                            .and_then(|v| {
                                if v >= 1 {
                                    Ok(v)
                                } else {
                                    Err(Error::Usage("theta arguments must be positive".into()))
                                }
                            })
                    })
                    .collect::<Result<_>>()?,
            };
            if eta_pow.abs() > 200 || factors.len() > 32 {
                return Err(Error::Resource("theta block too large".into()));
            }
            theta_block(eta_pow, &factors, &order)
        }
        "theta-rho" => {
            let n = args
                .int("N")?
                .ok_or_else(|| Error::Usage("qexp theta-rho needs --N N".into()))?;
            let rho = args.require("rho")?;
            let (u, v) = rho
                .split_once(',')
                .ok_or_else(|| Error::Usage("--rho expects u,v".into()))?;
            let u: i64 = u.trim().parse().map_err(|_| Error::Usage("bad rho".into()))?;
            let v: i64 = v.trim().parse().map_err(|_| Error::Usage("bad rho".into()))?;
            theta_rho(n, (u, v), &order)?
        }
        "lattice" => {
            let f = matrix_arg(&args)?;
            let coset: Vec<i64> = match args.flag("coset") {
                None => vec![0; f.size()],
                Some(list) => list
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<i64>()
                            .map_err(|_| Error::Usage(format!("bad coset entry {t:?}")))
                    })
                    .collect::<Result<_>>()?,
            };
            theta_lattice(&f, &coset, &order, args.switch("at-z-zero"))?
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown qexp subcommand {other:?}"
            )))
        }
    };
    Ok(CommandOutput { json: pretty(&series_json(sub, &series)), exit: 0 })
}

fn cmd_verify(argv: &[String]) -> Result<CommandOutput> {
    let name = argv
        .first()
        .ok_or_else(|| {
            Error::Usage(format!("verify needs a suite name: {}", SUITE_NAMES.join(", ")))
        })?
        .as_str();
    let args = parse_args(&argv[1..])?;
    let budgets = budgets_with_overrides(&args)?;
    let reports: Vec<crate::verify::VerifyReport> = if name == "all" {
        SUITE_NAMES
            .iter()
            .map(|n| run_suite(n, &budgets))
            .collect::<Result<_>>()?
    } else {
        vec![run_suite(name, &budgets)?]
    };
    let failures: usize = reports.iter().map(|r| r.failures).sum();
    let body = if reports.len() == 1 {
        serde_json::to_value(&reports[0]).expect("report serialization")
    } else {
        json!({"suites": reports, "failures": failures})
    };
    Ok(CommandOutput {
        json: pretty(&body),
        exit: if failures == 0 { 0 } else { 1 },
    })
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON serialization")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Result<CommandOutput> {
        let argv: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        run_command(&argv)
    }

    #[test]
    fn fqm_info_l3() {
        let out = run(&["fqm", "info", "--spec", "L:3:1"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.json).unwrap();
        assert_eq!(v["order"], 3);
        assert_eq!(v["level"], 3);
        assert_eq!(v["nondegenerate"], true);
        assert_eq!(v["sigma"]["3"], "-1/4");
        assert_eq!(out.exit, 0);
    }

    #[test]
    fn rejects_unknown_flags_and_commands() {
        assert!(run(&["fqm", "info", "--nonsense", "1"]).is_err());
        assert!(run(&["frobnicate"]).is_err());
        assert!(run(&["dim", "critical"]).is_err());
        assert!(run(&["qexp", "theta"]).is_err());
    }

    #[test]
    fn dim_critical_index_one() {
        let out = run(&["dim", "critical", "--index", "1"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.json).unwrap();
        assert_eq!(v["total"], 0);
    }

    #[test]
    fn dim_formula_weight_ten() {
        let out =
            run(&["dim", "formula", "--index", "1", "--weight", "10"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.json).unwrap();
        assert_eq!(v["value"], "2/1");
        assert_eq!(v["integer"], "2");
    }

    #[test]
    fn qexp_eta_deterministic() {
        let a = run(&["qexp", "eta", "--order", "5"]).unwrap();
        let b = run(&["qexp", "eta", "--order", "5"]).unwrap();
        assert_eq!(a.json, b.json);
        let v: serde_json::Value = serde_json::from_str(&a.json).unwrap();
        assert_eq!(v["q_den"], 24);
        assert_eq!(v["terms"][0]["q"], "1");
        assert_eq!(v["terms"][0]["c"], "1/1");
    }

    #[test]
    fn inv_projection_flags() {
        let out = run(&["inv", "--spec", "sum(L:3,neg(L:3))"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.json).unwrap();
        assert_eq!(v["dim"], 2);
        // negation of the first factor swaps the two isotropic lines, so only
        // the symmetric combination is even
        let out =
            run(&["inv", "--spec", "sum(L:3,neg(L:3))", "--project", "even-first"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.json).unwrap();
        assert_eq!(v["dim"], 1);
        assert!(run(&["inv", "--spec", "L:3", "--project", "even-first"]).is_err());
    }

    #[test]
    fn budget_override_applies() {
        let err = run(&["inv", "--spec", "H:64", "--budget", "max_module_order=100"]);
        assert!(matches!(err, Err(Error::Resource(_))));
    }
}
