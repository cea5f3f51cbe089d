//! Report documents: exact values as strings, sorted keys.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use num_bigint::BigInt;
use num_rational::BigRational;
use qfol_core::affpseudo::{AffineMap, OpenCell, Word};
use qfol_core::scalarfield::{Scalar, SymbolTable};

pub struct Fmt<'a> {
    pub table: &'a SymbolTable,
}

impl Fmt<'_> {
    pub fn scalar(&self, s: &Scalar) -> Value {
        Value::String(self.table.format(s))
    }

    pub fn vector(&self, v: &[Scalar]) -> Value {
        Value::Array(v.iter().map(|s| self.scalar(s)).collect())
    }

    pub fn vectors(&self, vs: &[Vec<Scalar>]) -> Value {
        Value::Array(vs.iter().map(|v| self.vector(v)).collect())
    }

    /// `"x"` in dimension one, `"(x, y)"` otherwise.
    pub fn point_string(&self, v: &[Scalar]) -> String {
        let parts: Vec<String> = v.iter().map(|s| self.table.format(s)).collect();
        if parts.len() == 1 {
            parts[0].clone()
        } else {
            format!("({})", parts.join(", "))
        }
    }

    pub fn affine_string(&self, m: &AffineMap) -> String {
        m.display(self.table).to_string()
    }

    pub fn cell(&self, c: &OpenCell) -> Value {
        if c.is_whole() {
            return Value::String(format!("R^{}", c.dim()));
        }
        Value::Array(
            c.constraints()
                .iter()
                .map(|h| json!({ "normal": self.vector(&h.normal), "offset": self.scalar(&h.offset) }))
                .collect(),
        )
    }
}

pub fn rational_str(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational(q: &BigRational) -> Value {
    Value::String(rational_str(q))
}

pub fn integers(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.to_string())).collect())
}

pub fn word(w: &Word, names: &dyn Fn(usize) -> String) -> Value {
    Value::String(w.display_with(names).to_string())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct Report {
    pub command: String,
    pub input_sha256: String,
    pub parameters: Value,
    pub results: Value,
    pub verdict: String,
    pub numeric: Option<Value>,
    pub timings: Option<Value>,
}

impl Report {
    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("input_sha256".into(), Value::String(self.input_sha256.clone()));
        m.insert("parameters".into(), self.parameters.clone());
        m.insert("results".into(), self.results.clone());
        m.insert("verdict".into(), Value::String(self.verdict.clone()));
        if let Some(n) = &self.numeric {
            m.insert("numeric".into(), n.clone());
        }
        if let Some(t) = &self.timings {
            m.insert("timings".into(), t.clone());
        }
        Value::Object(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("values serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        render_text(&self.to_value(), 0, &mut out);
        out
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| !x.is_object() && is_flat(x)),
        Value::Object(_) => false,
        _ => true,
    }
}

fn render_text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if is_flat(x) {
                    out.push_str(&format!("{pad}{k}: {}\n", inline(x)));
                } else {
                    out.push_str(&format!("{pad}{k}:\n"));
                    render_text(x, indent + 1, out);
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                if is_flat(x) {
                    out.push_str(&format!("{pad}- {}\n", inline(x)));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    render_text(x, indent + 1, out);
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", inline(other))),
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => format!("[{}]", a.iter().map(inline).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}
