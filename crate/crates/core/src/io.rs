//! JSON file format for word-indexed functionals.
//!
//! ```json
//! {"vars": ["a1", "a2"], "order": 2, "kind": "moments",
//!  "table": {"a1": "0", "a2": "1/2", "a1 a1": "1", ...}}
//! ```
//!
//! Every non-empty word up to `order` must appear exactly once; rationals are
//! `"p/q"` strings. Output lists words in canonical order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::cumulant::{cumulants_to_moments, moments_to_cumulants, CumulantFunctional, MomentFunctional};
use crate::error::{bail, Error, Result};
use crate::scalar::{format_rational, parse_rational, Rational};
use crate::word::{count_words, WordTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionalKind {
    Moments,
    Cumulants,
}

impl fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionalKind::Moments => "moments",
            FunctionalKind::Cumulants => "cumulants",
        })
    }
}

/// A functional read from or written to a file.
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    Moments(MomentFunctional),
    Cumulants(CumulantFunctional),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunctional {
    vars: Vec<String>,
    order: usize,
    kind: FunctionalKind,
    table: Map<String, Value>,
}

impl Functional {
    pub fn kind(&self) -> FunctionalKind {
        match self {
            Functional::Moments(_) => FunctionalKind::Moments,
            Functional::Cumulants(_) => FunctionalKind::Cumulants,
        }
    }

    pub fn alphabet(&self) -> &[String] {
        match self {
            Functional::Moments(m) => m.alphabet(),
            Functional::Cumulants(c) => c.alphabet(),
        }
    }

    pub fn max_order(&self) -> usize {
        match self {
            Functional::Moments(m) => m.max_order(),
            Functional::Cumulants(c) => c.max_order(),
        }
    }

    pub fn to_cumulants(&self) -> CumulantFunctional {
        match self {
            Functional::Moments(m) => moments_to_cumulants(m),
            Functional::Cumulants(c) => c.clone(),
        }
    }

    pub fn to_moments(&self) -> MomentFunctional {
        match self {
            Functional::Moments(m) => m.clone(),
            Functional::Cumulants(c) => cumulants_to_moments(c),
        }
    }

    fn parts(&self) -> (&[String], &WordTable<Rational>) {
        match self {
            Functional::Moments(m) => (m.alphabet(), m.table()),
            Functional::Cumulants(c) => (c.alphabet(), c.table()),
        }
    }

    pub fn to_json_value(&self) -> Value {
        let (vars, table) = self.parts();
        let mut entries = Map::new();
        for (w, v) in table.iter() {
            entries.insert(w.render(vars), Value::String(format_rational(v)));
        }
        let raw = RawFunctional { vars: vars.to_vec(), order: table.order(), kind: self.kind(), table: entries };
        serde_json::to_value(raw).expect("functional serializes")
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("functional serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawFunctional =
            serde_json::from_str(text).map_err(|e| Error::Structural(format!("invalid functional file: {}", e)))?;
        let expected = count_words(raw.vars.len(), raw.order);
        let mut table = WordTable::filled(raw.vars.len(), raw.order, Rational::default())?;
        let probe = MomentFunctional::new(raw.vars.clone(), table.clone())?;
        let mut seen = vec![false; expected];
        for (key, value) in &raw.table {
            let word = probe.parse_word(key)?;
            let Some(idx) = table.index_of(word.letters()) else {
                bail!(Structural, "word {:?} is empty or longer than order {}", key, raw.order);
            };
            let text = match value {
                Value::String(s) => s.clone(),
                Value::Number(n) if n.is_i64() => n.to_string(),
                _ => bail!(Structural, "value of {:?} must be a \"p/q\" string", key),
            };
            if seen[idx] {
                bail!(Structural, "word {:?} listed twice", key);
            }
            seen[idx] = true;
            let Some(r) = parse_rational(&text) else {
                bail!(Structural, "value of {:?} is not a rational: {:?}", key, text);
            };
            table.set(word.letters(), r)?;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            let word = crate::word::words_up_to(raw.vars.len(), raw.order).nth(missing).unwrap();
            bail!(Structural, "table is missing word {:?}", word.render(&raw.vars));
        }
        Ok(match raw.kind {
            FunctionalKind::Moments => Functional::Moments(MomentFunctional::new(raw.vars, table)?),
            FunctionalKind::Cumulants => Functional::Cumulants(CumulantFunctional::new(raw.vars, table)?),
        })
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Functional::from_json(s)
    }
}

impl From<MomentFunctional> for Functional {
    fn from(m: MomentFunctional) -> Self {
        Functional::Moments(m)
    }
}

impl From<CumulantFunctional> for Functional {
    fn from(c: CumulantFunctional) -> Self {
        Functional::Cumulants(c)
    }
}
