//! Bundled Cayley tables and common shifts used by the CLI and the test
//! suite.
//!
//! The two named fixtures (`paper-latin-12` and `paper-table-8`) ship as
//! golden JSON files under `fixtures/` and are embedded here; the CLI
//! resolves `--fixture <name>` against [`by_name`].

use crate::algebra::CayleyTable;
use crate::tmc::{Alphabet, MarkovShift};

/// Golden JSON for the 12-symbol Latin square fixture.
pub const LATIN_12_JSON: &str = include_str!("../fixtures/paper-latin-12.json");
/// Golden JSON for the 8-symbol right-cancellable fixture.
pub const TABLE_8_JSON: &str = include_str!("../fixtures/paper-table-8.json");

/// Names accepted by [`by_name`].
pub const FIXTURE_NAMES: [&str; 2] = ["paper-latin-12", "paper-table-8"];

/// Resolves a fixture name to its table.
pub fn by_name(name: &str) -> Option<CayleyTable> {
    match name {
        "paper-latin-12" => Some(latin_12()),
        "paper-table-8" => Some(table_8()),
        _ => None,
    }
}

/// The 12-symbol commutative medial Latin square on
/// `{a1, b1, c1, d1, a2, b2, c2, d2, a3, b3, c3, d3}`.
pub fn latin_12() -> CayleyTable {
    serde_json::from_str(LATIN_12_JSON).expect("bundled fixture is valid")
}

/// The 8-symbol right-cancellable, non-left-cancellable table on
/// `{a, …, h}` whose quotient is the Klein four-group.
pub fn table_8() -> CayleyTable {
    serde_json::from_str(TABLE_8_JSON).expect("bundled fixture is valid")
}

/// Addition table of `Z_n` on symbols `"0" … "n-1"`.
pub fn z_add(n: usize) -> CayleyTable {
    let alphabet = Alphabet::new((0..n).map(|i| i.to_string())).expect("n >= 1");
    let rows = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    CayleyTable::new(alphabet, rows).expect("rows are valid")
}

/// The table of the shift map viewed as a radius-1 rule: `φ(a, b) = b`.
pub fn shift_rule(alphabet: Alphabet) -> CayleyTable {
    let n = alphabet.len();
    let rows = (0..n).map(|_| (0..n).collect()).collect();
    CayleyTable::new(alphabet, rows).expect("rows are valid")
}

/// The golden-mean shift on `{0, 1}`: the word `11` is forbidden.
pub fn golden_mean() -> MarkovShift {
    let alphabet = Alphabet::new(["0", "1"]).expect("distinct symbols");
    MarkovShift::new(alphabet, &[("0", "0"), ("0", "1"), ("1", "0")]).expect("valid edges")
}

/// The full shift over a table's alphabet.
pub fn full_shift_of(table: &CayleyTable) -> MarkovShift {
    MarkovShift::full(table.alphabet().clone())
}
