//! The FQM mini-language used by the CLI:
//!
//! ```text
//! E := "D:m" | "D:m:a" | "L:q" | "L:q:a" | "H:n" | "XY3:alpha" | "triv"
//!    | "neg(E)" | "sum(E1,E2,...)" | "ppart(E,p)" | "matrix:@file.json"
//! ```
//!
//! Parsing is pure; resolving `matrix:@` references goes through a
//! [`MatrixLoader`] so that embedded uses (and the fuzz targets) can forbid
//! filesystem access.

use crate::error::{Error, Result};
use crate::fqm::{discriminant_module, Fqm, HalfIntegralMatrix};

const MAX_DEPTH: usize = 32;
const MAX_PARAM: i64 = 1_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FqmExpr {
    D { m: i64, a: i64 },
    L { q: i64, a: i64 },
    Hyp { n: i64 },
    Xy3 { alpha: u32 },
    Trivial,
    Neg(Box<FqmExpr>),
    Sum(Vec<FqmExpr>),
    PPart(Box<FqmExpr>, i64),
    Matrix(String),
}

pub fn parse_fqm_spec(input: &str) -> Result<FqmExpr> {
    let mut p = Parser { s: input.as_bytes(), pos: 0 };
    let expr = p.expr(0)?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(Error::Usage(format!(
            "trailing input at byte {} in FQM spec",
            p.pos
        )));
    }
    Ok(expr)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Usage(format!(
                "expected {:?} at byte {} of FQM spec",
                c as char, self.pos
            )))
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() {
            let c = self.s[self.pos] as char;
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_ascii_digit() {
            self.pos += 1;
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        let v: i64 = txt
            .parse()
            .map_err(|_| Error::Usage(format!("malformed integer at byte {start}")))?;
        if v.abs() > MAX_PARAM {
            return Err(Error::Usage(format!("parameter {v} out of range")));
        }
        Ok(v)
    }

    fn expr(&mut self, depth: usize) -> Result<FqmExpr> {
        if depth > MAX_DEPTH {
            return Err(Error::Usage("FQM spec nesting too deep".into()));
        }
        self.skip_ws();
        let name = self.ident();
        match name.as_str() {
            "neg" => {
                self.eat(b'(')?;
                let inner = self.expr(depth + 1)?;
                self.eat(b')')?;
                Ok(FqmExpr::Neg(Box::new(inner)))
            }
            "sum" => {
                self.eat(b'(')?;
                let mut parts = vec![self.expr(depth + 1)?];
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => {
                            self.pos += 1;
                            parts.push(self.expr(depth + 1)?);
                        }
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => {
                            return Err(Error::Usage(format!(
                                "expected ',' or ')' at byte {}",
                                self.pos
                            )))
                        }
                    }
                }
                if parts.len() < 2 {
                    return Err(Error::Usage("sum(...) needs at least two summands".into()));
                }
                Ok(FqmExpr::Sum(parts))
            }
            "ppart" => {
                self.eat(b'(')?;
                let inner = self.expr(depth + 1)?;
                self.eat(b',')?;
                let p = self.int()?;
                self.eat(b')')?;
                Ok(FqmExpr::PPart(Box::new(inner), p))
            }
            "matrix" => {
                self.eat(b':')?;
                self.eat(b'@')?;
                self.skip_ws();
                let start = self.pos;
                while self.pos < self.s.len() {
                    let c = self.s[self.pos] as char;
                    if c == ',' || c == ')' || c.is_ascii_whitespace() {
                        break;
                    }
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(Error::Usage("empty matrix file path".into()));
                }
                let path = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
                Ok(FqmExpr::Matrix(path))
            }
            "triv" => Ok(FqmExpr::Trivial),
            "D" => {
                self.eat(b':')?;
                let m = self.int()?;
                let a = self.opt_second_param()?;
                Ok(FqmExpr::D { m, a: a.unwrap_or(1) })
            }
            "L" => {
                self.eat(b':')?;
                let q = self.int()?;
                let a = self.opt_second_param()?;
                Ok(FqmExpr::L { q, a: a.unwrap_or(1) })
            }
            "H" => {
                self.eat(b':')?;
                let n = self.int()?;
                Ok(FqmExpr::Hyp { n })
            }
            "XY3" => {
                self.eat(b':')?;
                let alpha = self.int()?;
                if !(0..=16).contains(&alpha) {
                    return Err(Error::Usage("XY3 exponent out of range".into()));
                }
                Ok(FqmExpr::Xy3 { alpha: alpha as u32 })
            }
            other => Err(Error::Usage(format!(
                "unknown FQM constructor {other:?} at byte {}",
                self.pos
            ))),
        }
    }

    fn opt_second_param(&mut self) -> Result<Option<i64>> {
        // a ':' immediately following (no whitespace skip: specs are compact)
        if self.peek() == Some(b':') {
            self.pos += 1;
            Ok(Some(self.int()?))
        } else {
            Ok(None)
        }
    }
}

/// Source of `matrix:@file` payloads.
pub trait MatrixLoader {
    fn load(&self, path: &str) -> Result<HalfIntegralMatrix>;
}

/// Reads `{"twoF": [[int]]}` files from disk.
pub struct FsMatrixLoader;

#[derive(serde::Serialize, serde::Deserialize)]
pub struct MatrixFile {
    #[serde(rename = "twoF")]
    pub two_f: Vec<Vec<i64>>,
}

pub fn matrix_from_json(text: &str) -> Result<HalfIntegralMatrix> {
    let raw: MatrixFile = serde_json::from_str(text)
        .map_err(|e| Error::Usage(format!("malformed matrix JSON: {e}")))?;
    if raw.two_f.len() > 64 {
        return Err(Error::Usage("matrix too large".into()));
    }
    HalfIntegralMatrix::from_two_f(raw.two_f)
}

impl MatrixLoader for FsMatrixLoader {
    fn load(&self, path: &str) -> Result<HalfIntegralMatrix> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {path}: {e}")))?;
        matrix_from_json(&text)
    }
}

/// Loader that rejects every file reference; for embedded/fuzz use.
pub struct NoFsLoader;

impl MatrixLoader for NoFsLoader {
    fn load(&self, path: &str) -> Result<HalfIntegralMatrix> {
        Err(Error::Usage(format!("matrix file {path:?} not allowed here")))
    }
}

/// Evaluates a parsed spec. `max_order` bounds the order of every
/// intermediate module.
pub fn resolve(expr: &FqmExpr, loader: &dyn MatrixLoader, max_order: i64) -> Result<Fqm> {
    let m = match expr {
        FqmExpr::D { m, a } => Fqm::standard_d(*m, *a)?,
        FqmExpr::L { q, a } => Fqm::standard_l(*q, *a)?,
        FqmExpr::Hyp { n } => Fqm::standard_hyp(*n)?,
        FqmExpr::Xy3 { alpha } => Fqm::standard_xy3(*alpha)?,
        FqmExpr::Trivial => Fqm::trivial(),
        FqmExpr::Neg(inner) => resolve(inner, loader, max_order)?.neg(),
        FqmExpr::Sum(parts) => {
            let mut acc = resolve(&parts[0], loader, max_order)?;
            for p in &parts[1..] {
                acc = acc.orth_sum(&resolve(p, loader, max_order)?);
                check_order(&acc, max_order)?;
            }
            acc
        }
        FqmExpr::PPart(inner, p) => {
            if *p < 2 || crate::cyclotomic::prime_factors(*p as u64) != vec![*p as u64] {
                return Err(Error::Usage(format!("ppart needs a prime, got {p}")));
            }
            resolve(inner, loader, max_order)?.p_part(*p as u64)
        }
        FqmExpr::Matrix(path) => {
            let f = loader.load(path)?;
            discriminant_module(&f)?.module
        }
    };
    check_order(&m, max_order)?;
    Ok(m)
}

fn check_order(m: &Fqm, max_order: i64) -> Result<()> {
    // guard against overflow before multiplying orders out
    let mut acc: i128 = 1;
    for &u in m.orders() {
        acc = acc.saturating_mul(u as i128);
        if acc > max_order as i128 {
            return Err(Error::Resource(format!(
                "module order exceeds budget {max_order}"
            )));
        }
    }
    Ok(())
}

/// Convenience: parse and resolve with filesystem access.
pub fn fqm_from_spec(spec: &str, max_order: i64) -> Result<Fqm> {
    resolve(&parse_fqm_spec(spec)?, &FsMatrixLoader, max_order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_atoms() {
        assert_eq!(parse_fqm_spec("D:3").unwrap(), FqmExpr::D { m: 3, a: 1 });
        assert_eq!(parse_fqm_spec("D:6:5").unwrap(), FqmExpr::D { m: 6, a: 5 });
        assert_eq!(parse_fqm_spec("L:9:2").unwrap(), FqmExpr::L { q: 9, a: 2 });
        assert_eq!(parse_fqm_spec("H:4").unwrap(), FqmExpr::Hyp { n: 4 });
        assert_eq!(parse_fqm_spec("XY3:2").unwrap(), FqmExpr::Xy3 { alpha: 2 });
    }

    #[test]
    fn parses_compound() {
        let e = parse_fqm_spec("sum(neg(D:1), L:3:1, ppart(D:6, 3))").unwrap();
        match e {
            FqmExpr::Sum(parts) => {
                assert_eq!(parts.len(), 3);
                assert_eq!(parts[0], FqmExpr::Neg(Box::new(FqmExpr::D { m: 1, a: 1 })));
            }
            _ => panic!("expected sum"),
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_fqm_spec("").is_err());
        assert!(parse_fqm_spec("Q:3").is_err());
        assert!(parse_fqm_spec("D:3 trailing").is_err());
        assert!(parse_fqm_spec("sum(D:1)").is_err());
        // non-prime ppart argument is caught at resolution time
        let e = parse_fqm_spec("ppart(D:6,4)").unwrap();
        assert!(resolve(&e, &NoFsLoader, 1000).is_err());
        assert!(parse_fqm_spec(&"neg(".repeat(100)).is_err());
        assert!(parse_fqm_spec("D:99999999999999999999").is_err());
    }

    #[test]
    fn resolve_respects_budget() {
        let e = parse_fqm_spec("sum(D:50, D:60)").unwrap();
        assert!(resolve(&e, &NoFsLoader, 100).is_err());
        assert!(resolve(&e, &NoFsLoader, 100_000).is_ok());
        let m = parse_fqm_spec("matrix:@/nonexistent.json").unwrap();
        assert!(resolve(&m, &NoFsLoader, 100).is_err());
    }
}
