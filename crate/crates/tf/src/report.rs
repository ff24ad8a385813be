//! Report values and their text and JSON renderings.

use serde_json::{json, Value};
use tf_core::torsion::GaussInvariant;
use tf_core::{FinAbGroup, LinkingForm, QuadraticLinkingFunction, RationalModZ};

use crate::Format;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Positive,
    /// "Not equivalent" or "not found".
    Negative,
    Undecided,
}

impl Status {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Status::Positive
        } else {
            Status::Negative
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub status: Status,
    pub json: Value,
    pub text: String,
}

impl Report {
    pub fn new(status: Status, json: Value, text: String) -> Self {
        Report { status, json, text }
    }

    /// A report whose text form is the pretty-printed document itself.
    pub fn document(json: Value) -> Self {
        let text = serde_json::to_string_pretty(&json).expect("values serialize");
        Report {
            status: Status::Positive,
            json,
            text,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.trim_end().to_string(),
            Format::Json => serde_json::to_string_pretty(&self.json).expect("values serialize"),
        }
    }
}

/// Aligned `key  value` lines.
#[derive(Default)]
pub struct Table {
    rows: Vec<(String, String)>,
}

impl Table {
    pub fn row(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.rows.push((key.into(), value.to_string()));
        self
    }

    pub fn finish(&self) -> String {
        let w = self.rows.iter().map(|(k, _)| width(k)).max().unwrap_or(0);
        self.rows.iter().map(|(k, v)| format!("{k}{}  {v}\n", " ".repeat(w - width(k)))).collect()
    }
}

/// Display width, ignoring combining marks.
fn width(s: &str) -> usize {
    s.chars().filter(|c| !('\u{300}'..='\u{36f}').contains(c)).count()
}

pub fn rat(x: RationalModZ) -> Value {
    Value::String(x.to_string())
}

pub fn rats(xs: &[RationalModZ]) -> Value {
    Value::Array(xs.iter().map(|&x| rat(x)).collect())
}

pub fn rat_matrix(m: &[Vec<RationalModZ>]) -> Value {
    Value::Array(m.iter().map(|r| rats(r)).collect())
}

pub fn group_json(g: &FinAbGroup) -> Value {
    json!({ "orders": g.orders(), "free_rank": g.free_rank() })
}

pub fn lform_json(b: &LinkingForm) -> Value {
    json!({ "orders": b.group().orders(), "b": rat_matrix(b.gram()) })
}

pub fn qlf_json(q: &QuadraticLinkingFunction) -> Value {
    json!({ "orders": q.group().orders(), "b": rat_matrix(q.base().gram()), "q": rats(q.gen_values()) })
}

/// Rounds to 12 digits without a negative zero.
fn digits(x: f64) -> String {
    let s = format!("{x:.12}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

pub fn gauss_json(g: &GaussInvariant) -> Value {
    json!({ "gs": { "re": digits(g.re), "im": digits(g.im) }, "K": rat(g.k) })
}

pub fn gauss_text(g: &GaussInvariant) -> String {
    let im = digits(g.im);
    let (sign, im) = match im.strip_prefix('-') {
        Some(rest) => ('-', rest.to_string()),
        None => ('+', im),
    };
    format!("{} {sign} {im}i  (K = {})", digits(g.re), g.k)
}

pub fn list<T: ToString>(xs: &[T]) -> String {
    format!("[{}]", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

pub fn matrix<T: ToString>(m: &[Vec<T>]) -> String {
    format!("[{}]", m.iter().map(|r| list(r)).collect::<Vec<_>>().join(", "))
}

pub fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
