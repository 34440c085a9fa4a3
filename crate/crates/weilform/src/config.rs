//! Budgets for enumerations, representation dimensions and truncation
//! orders, loadable from the JSON file named by `WEILFORM_CONFIG` and
//! overridable per command.

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::weilrep::RepBudget;

#[derive(Clone, Debug)]
pub struct Budgets {
    pub max_module_order: i64,
    pub max_rep_dim: usize,
    pub default_trunc: Rational,
    pub max_conductor_phi: u32,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_module_order: 10_000,
            max_rep_dim: 4096,
            default_trunc: Rational::from_integer(10),
            max_conductor_phi: 2048,
        }
    }
}

#[derive(serde::Deserialize)]
struct RawConfig {
    max_module_order: Option<i64>,
    max_rep_dim: Option<usize>,
    default_trunc: Option<serde_json::Value>,
    max_conductor_phi: Option<u32>,
}

impl Budgets {
    pub fn rep_budget(&self) -> RepBudget {
        RepBudget {
            max_dim: self.max_rep_dim,
            max_conductor_phi: self.max_conductor_phi,
        }
    }

    pub fn from_json(text: &str) -> Result<Budgets> {
        let raw: RawConfig = serde_json::from_str(text)
            .map_err(|e| Error::Usage(format!("malformed config JSON: {e}")))?;
        let mut b = Budgets::default();
        if let Some(v) = raw.max_module_order {
            if v < 1 {
                return Err(Error::Usage("max_module_order must be positive".into()));
            }
            b.max_module_order = v;
        }
        if let Some(v) = raw.max_rep_dim {
            b.max_rep_dim = v;
        }
        if let Some(v) = raw.max_conductor_phi {
            b.max_conductor_phi = v;
        }
        if let Some(v) = raw.default_trunc {
            b.default_trunc = match v {
                serde_json::Value::Number(n) => {
                    let i = n
                        .as_i64()
                        .ok_or_else(|| Error::Usage("default_trunc must be integral or \"p/q\"".into()))?;
                    Rational::from_integer(i)
                }
                serde_json::Value::String(s) => s.parse()?,
                _ => return Err(Error::Usage("default_trunc must be a number or \"p/q\"".into())),
            };
            if b.default_trunc.is_negative() || b.default_trunc.is_zero() {
                return Err(Error::Usage("default_trunc must be positive".into()));
            }
        }
        Ok(b)
    }

    /// Loads from the file named by `WEILFORM_CONFIG`, or defaults.
    pub fn load_env() -> Result<Budgets> {
        match std::env::var("WEILFORM_CONFIG") {
            Ok(path) => {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Io(format!("cannot read config {path}: {e}")))?;
                Budgets::from_json(&text)
            }
            Err(_) => Ok(Budgets::default()),
        }
    }

    /// Applies a `key=value` override (the CLI `--budget` flag).
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("--budget expects key=value, got {kv:?}")))?;
        match k {
            "max_module_order" => {
                self.max_module_order =
                    v.parse().map_err(|_| Error::Usage(format!("bad value {v:?}")))?
            }
            "max_rep_dim" => {
                self.max_rep_dim =
                    v.parse().map_err(|_| Error::Usage(format!("bad value {v:?}")))?
            }
            "max_conductor_phi" => {
                self.max_conductor_phi =
                    v.parse().map_err(|_| Error::Usage(format!("bad value {v:?}")))?
            }
            "default_trunc" => self.default_trunc = v.parse()?,
            other => {
                return Err(Error::Usage(format!("unknown budget key {other:?}")));
            }
        }
        Ok(())
    }
}
