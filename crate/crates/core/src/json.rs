//! JSON wire formats.
//!
//! - Shift: `{"symbols": ["a","b"], "edges": [["a","a"],["a","b"],["b","a"]]}`
//! - Cayley table: `{"symbols": [...], "table": [[row for symbol 0], ...]}`
//!   with rows indexed by the left operand.
//! - Measure: `{"type": "finite_memory", "depth": 1, "kernel": {...},
//!   "initial": {...}}` or `{"type": "parry"}`, resolved against a shift at
//!   load time.
//! - Explicit block code: `{"memory": 0, "anticipation": 1, "rule":
//!   {"ab": "c", ...}}` with window keys spelled like words.
//!
//! Deserializing a shift runs the same stranded-symbol pruning as direct
//! construction. Multi-character symbol tokens use comma-separated word
//! spellings throughout.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::CayleyTable;
use crate::tmc::{Alphabet, MarkovShift};
use crate::Error;

#[derive(Serialize, Deserialize)]
struct ShiftJson {
    symbols: Vec<String>,
    edges: Vec<(String, String)>,
}

impl Serialize for MarkovShift {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let symbols = self.alphabet().symbols().to_vec();
        let edges = self
            .edges()
            .into_iter()
            .map(|(a, b)| {
                (
                    self.alphabet().symbol(a).to_string(),
                    self.alphabet().symbol(b).to_string(),
                )
            })
            .collect();
        ShiftJson { symbols, edges }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MarkovShift {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = ShiftJson::deserialize(deserializer)?;
        let alphabet = Alphabet::new(raw.symbols).map_err(D::Error::custom)?;
        MarkovShift::new(alphabet, &raw.edges).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct CayleyJson {
    symbols: Vec<String>,
    table: Vec<Vec<String>>,
}

impl Serialize for CayleyTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.n();
        let symbols = self.alphabet().symbols().to_vec();
        let table = (0..n)
            .map(|a| (0..n).map(|b| self.alphabet().symbol(self.op(a, b)).to_string()).collect())
            .collect();
        CayleyJson { symbols, table }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CayleyTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = CayleyJson::deserialize(deserializer)?;
        CayleyTable::from_tokens(&raw.symbols, &raw.table).map_err(D::Error::custom)
    }
}

/// Renders a permutation of symbol indices as a token → token map with
/// deterministic key order.
pub fn permutation_json(
    alphabet: &Alphabet,
    perm: &crate::algebra::Permutation,
) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (i, &img) in perm.as_slice().iter().enumerate() {
        map.insert(
            alphabet.symbol(i).to_string(),
            serde_json::Value::String(alphabet.symbol(img).to_string()),
        );
    }
    serde_json::Value::Object(map)
}

/// Spells a word over an alphabet (single characters concatenated,
/// multi-character tokens comma-separated).
pub fn word_string(alphabet: &Alphabet, word: &crate::tmc::Word) -> String {
    alphabet.format_word(word)
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Invalid(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn shift_round_trips_through_json() {
        let g = fixtures::golden_mean();
        let text = serde_json::to_string(&g).unwrap();
        let back: MarkovShift = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert!(text.contains("\"edges\""));
    }

    #[test]
    fn shift_deserialization_prunes() {
        let text = r#"{"symbols":["0","1","2"],"edges":[["0","1"],["1","0"],["2","0"]]}"#;
        let shift: MarkovShift = serde_json::from_str(text).unwrap();
        assert_eq!(shift.pruned(), &["2".to_string()]);
    }

    #[test]
    fn cayley_round_trips_through_json() {
        let t = fixtures::table_8();
        let text = serde_json::to_string(&t).unwrap();
        let back: CayleyTable = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn malformed_table_is_rejected() {
        let text = r#"{"symbols":["a","b"],"table":[["a","b"]]}"#;
        assert!(serde_json::from_str::<CayleyTable>(text).is_err());
        let text2 = r#"{"symbols":["a","b"],"table":[["a","z"],["b","a"]]}"#;
        assert!(serde_json::from_str::<CayleyTable>(text2).is_err());
    }
}
