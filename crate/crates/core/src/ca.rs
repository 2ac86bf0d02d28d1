//! Cellular automata and sliding block codes on Markov shifts.
//!
//! A [`CellularAutomaton`] is the radius-1 map `Φ = id * σ` whose local rule
//! `φ(a, b) = a • b` comes from a Cayley table; the rule is kept total on
//! the table's alphabet so the full-shift extension of the automaton stays
//! available for N-scaling checks. A [`BlockCode`] is an explicit sliding
//! rule with declared memory and anticipation, total on allowed windows and
//! closed on the target shift.

use std::collections::HashMap;

use crate::algebra::CayleyTable;
use crate::tmc::{MarkovShift, Word};
use crate::{Error, Result, DEFAULT_ENUM_CAP};

/// A sliding block code between two Markov shifts, given by a local rule on
/// allowed `(memory + anticipation + 1)`-windows.
///
/// Construction verifies that the rule is total on allowed windows, that its
/// values are target symbols, and that the image of every allowed word is
/// allowed in the target (checked on windows of length `window + 1`, which
/// settles the general case for 1-step chains).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCode {
    source: MarkovShift,
    target: MarkovShift,
    memory: usize,
    anticipation: usize,
    rule: HashMap<Vec<usize>, usize>,
}

impl BlockCode {
    /// Validates and builds a block code.
    pub fn new(
        source: MarkovShift,
        target: MarkovShift,
        memory: usize,
        anticipation: usize,
        rule: HashMap<Vec<usize>, usize>,
    ) -> Result<Self> {
        let window = memory + anticipation + 1;
        let windows = source.allowed_words_capped(window, DEFAULT_ENUM_CAP)?;
        for w in &windows {
            match rule.get(w.ids()) {
                None => {
                    return Err(Error::Invalid(format!(
                        "rule is not total: window `{}` is unmapped",
                        source.alphabet().format_word(w)
                    )))
                }
                Some(&v) if v >= target.alphabet().len() => {
                    return Err(Error::Invalid(format!("rule value {v} is not a target symbol")))
                }
                _ => {}
            }
        }
        let code = BlockCode { source, target, memory, anticipation, rule };
        // Local closedness: adjacent output symbols form target edges.
        for w in code.source.allowed_words_capped(window + 1, DEFAULT_ENUM_CAP)? {
            let a = code.rule[&w.ids()[..window]];
            let b = code.rule[&w.ids()[1..]];
            if !code.target.is_edge(a, b) {
                return Err(Error::NotClosed {
                    detail: format!(
                        "image pair ({}, {}) of window `{}` is not a target edge",
                        code.target.alphabet().symbol(a),
                        code.target.alphabet().symbol(b),
                        code.source.alphabet().format_word(&w)
                    ),
                });
            }
        }
        Ok(code)
    }

    /// A 1-block code from a symbol map `image[a]`.
    pub fn one_block(source: MarkovShift, target: MarkovShift, image: &[usize]) -> Result<Self> {
        if image.len() != source.alphabet().len() {
            return Err(Error::Invalid("symbol map must cover the source alphabet".into()));
        }
        let rule = image.iter().enumerate().map(|(a, &v)| (vec![a], v)).collect();
        Self::new(source, target, 0, 0, rule)
    }

    /// The identity code on a shift.
    pub fn identity(shift: &MarkovShift) -> Self {
        let image: Vec<usize> = (0..shift.alphabet().len()).collect();
        Self::one_block(shift.clone(), shift.clone(), &image).expect("identity is a valid code")
    }

    /// Source shift.
    pub fn source(&self) -> &MarkovShift {
        &self.source
    }

    /// Target shift.
    pub fn target(&self) -> &MarkovShift {
        &self.target
    }

    /// Declared memory.
    pub fn memory(&self) -> usize {
        self.memory
    }

    /// Declared anticipation.
    pub fn anticipation(&self) -> usize {
        self.anticipation
    }

    /// Window length `memory + anticipation + 1`.
    pub fn window(&self) -> usize {
        self.memory + self.anticipation + 1
    }

    /// The rule as a map from windows to target symbols.
    pub fn rule(&self) -> &HashMap<Vec<usize>, usize> {
        &self.rule
    }

    /// Symbol map when this is a 1-block code.
    pub fn one_block_map(&self) -> Option<Vec<usize>> {
        if self.window() != 1 {
            return None;
        }
        Some((0..self.source.alphabet().len()).map(|a| self.rule[&vec![a][..]]).collect())
    }

    /// Applies the sliding rule to an allowed word of length at least the
    /// window; the image is shorter by `memory + anticipation`.
    pub fn apply(&self, word: &Word) -> Result<Word> {
        if !self.source.is_allowed(word) {
            return Err(Error::NotAllowed { word: self.source.alphabet().format_word(word) });
        }
        let window = self.window();
        if word.len() < window {
            return Err(Error::Invalid(format!(
                "word of length {} is shorter than the window {window}",
                word.len()
            )));
        }
        let out: Vec<usize> =
            word.ids().windows(window).map(|w| self.rule[w]).collect();
        Ok(Word::new(out))
    }

    /// All source-allowed words of length `|word| + memory + anticipation`
    /// that map onto `word`, in lexicographic order.
    pub fn preimage_cylinder(&self, word: &Word, cap: u64) -> Result<Vec<Word>> {
        if !self.target.is_allowed(word) {
            return Err(Error::NotAllowed { word: self.target.alphabet().format_word(word) });
        }
        let total_len = word.len() + self.memory + self.anticipation;
        let window = self.window();
        let mut out = Vec::new();
        let mut stack: Vec<usize> = Vec::with_capacity(total_len);
        let mut visited: u64 = 0;
        self.preimage_rec(word, total_len, window, &mut stack, &mut out, &mut visited, cap)?;
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn preimage_rec(
        &self,
        word: &Word,
        total_len: usize,
        window: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<Word>,
        visited: &mut u64,
        cap: u64,
    ) -> Result<()> {
        if stack.len() == total_len {
            out.push(Word::new(stack.clone()));
            return Ok(());
        }
        let n = self.source.alphabet().len();
        let candidates: Vec<usize> = if stack.is_empty() {
            (0..n).collect()
        } else {
            self.source.followers(*stack.last().unwrap()).to_vec()
        };
        for s in candidates {
            *visited += 1;
            if *visited > cap {
                return Err(Error::DepthTooLarge { requested: *visited as u128, cap });
            }
            stack.push(s);
            let filled = stack.len();
            let consistent = if filled >= window {
                let img_idx = filled - window;
                img_idx >= word.len() || self.rule[&stack[img_idx..filled]] == word.ids()[img_idx]
            } else {
                true
            };
            if consistent {
                self.preimage_rec(word, total_len, window, stack, out, visited, cap)?;
            }
            stack.pop();
        }
        Ok(())
    }

    /// Inverse local rule `(y_{i-1}, y_i) ↦ x_i` when this is an invertible
    /// 1-block code whose inverse is a block code with memory 1 and
    /// anticipation 0 onto this code's target chain.
    ///
    /// Returns `None` unless (a) the pair `(θ(u), θ(v))` of an edge
    /// determines `v`, and (b) every allowed length-3 target path decodes to
    /// a source edge, so the image is the whole 1-step chain on the image
    /// edges.
    pub fn memory_one_inverse(&self) -> Option<HashMap<(usize, usize), usize>> {
        let theta = self.one_block_map()?;
        let mut inv: HashMap<(usize, usize), usize> = HashMap::new();
        for (u, v) in self.source.edges() {
            let key = (theta[u], theta[v]);
            match inv.get(&key) {
                Some(&v0) if v0 != v => return None,
                _ => {
                    inv.insert(key, v);
                }
            }
        }
        // Every target 3-path must decode to a source edge; otherwise the
        // image is a proper sofic subset of the edge chain.
        for w in self.target.allowed_words_capped(3, DEFAULT_ENUM_CAP).ok()? {
            let (y0, y1, y2) = (w.ids()[0], w.ids()[1], w.ids()[2]);
            let (x1, x2) = match (inv.get(&(y0, y1)), inv.get(&(y1, y2))) {
                (Some(&a), Some(&b)) => (a, b),
                _ => return None,
            };
            if !self.source.is_edge(x1, x2) {
                return None;
            }
        }
        Some(inv)
    }

    /// True when the 1-block rule is constant on every predecessor set of
    /// the source chain.
    pub fn constant_on_predecessor_sets(&self) -> bool {
        match self.one_block_map() {
            None => false,
            Some(theta) => (0..self.source.alphabet().len()).all(|c| {
                let preds = self.source.predecessors(c);
                preds.windows(2).all(|p| theta[p[0]] == theta[p[1]])
            }),
        }
    }
}

/// Witness for a failed structural-compatibility check: two edges whose
/// componentwise image is not an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct ScWitness {
    /// First edge `(x0, x1)`.
    pub first_edge: (usize, usize),
    /// Second edge `(y0, y1)`.
    pub second_edge: (usize, usize),
    /// The non-edge image `(x0•y0, x1•y1)`.
    pub image: (usize, usize),
}

/// Result of a structural-compatibility check.
#[derive(Debug, Clone, PartialEq)]
pub struct ScOutcome {
    /// Whether every pair of edges has an edge image.
    pub compatible: bool,
    /// First failing pair in scan order, when incompatible.
    pub witness: Option<ScWitness>,
}

/// Decides structural compatibility of the rule `φ(a,b) = a•b` on a shift:
/// for every pair of edges `(x0,x1)`, `(y0,y1)` the pair `(x0•y0, x1•y1)`
/// must again be an edge. For a 1-step chain this finite scan is equivalent
/// to the sequence-level property.
pub fn check_sc(shift: &MarkovShift, table: &CayleyTable) -> Result<ScOutcome> {
    let to_table = embedding(shift, table)?;
    let edges = shift.edges();
    for &(x0, x1) in &edges {
        for &(y0, y1) in &edges {
            let a = table.op(to_table[x0], to_table[y0]);
            let b = table.op(to_table[x1], to_table[y1]);
            let (sa, sb) = (
                shift_id_of(shift, table, a),
                shift_id_of(shift, table, b),
            );
            let ok = match (sa, sb) {
                (Some(sa), Some(sb)) => shift.is_edge(sa, sb),
                _ => false,
            };
            if !ok {
                return Ok(ScOutcome {
                    compatible: false,
                    witness: Some(ScWitness {
                        first_edge: (x0, x1),
                        second_edge: (y0, y1),
                        image: (a, b),
                    }),
                });
            }
        }
    }
    Ok(ScOutcome { compatible: true, witness: None })
}

fn embedding(shift: &MarkovShift, table: &CayleyTable) -> Result<Vec<usize>> {
    shift
        .alphabet()
        .symbols()
        .iter()
        .map(|s| table.alphabet().id(s))
        .collect::<Result<Vec<usize>>>()
        .map_err(|_| {
            Error::HypothesisFailed("shift alphabet is not contained in the table alphabet".into())
        })
}

fn shift_id_of(shift: &MarkovShift, table: &CayleyTable, table_id: usize) -> Option<usize> {
    shift.alphabet().id(table.alphabet().symbol(table_id)).ok()
}

/// Outcome of an N-scaling check.
#[derive(Debug, Clone, PartialEq)]
pub struct NScalingOutcome {
    /// Whether the N-th iterate's rule at the origin is `w_0 • w_N` on every
    /// allowed (N+1)-word.
    pub holds: bool,
    /// First failing word in lexicographic order.
    pub witness: Option<Word>,
}

/// The radius-1 cellular automaton `Φ = id * σ` induced by a Cayley table
/// on a Markov shift whose alphabet embeds in the table's.
///
/// The rule is stored total on the table's alphabet; classification flags
/// are computed at build time.
#[derive(Debug, Clone, PartialEq)]
pub struct CellularAutomaton {
    shift: MarkovShift,
    table: CayleyTable,
    to_table: Vec<usize>,
    from_table: Vec<Option<usize>>,
    /// `a ↦ a•b` is injective on the predecessors of each `b`.
    pub left_permutative: bool,
    /// `b ↦ a•b` is injective on the followers of each `a`.
    pub right_permutative: bool,
    /// Structural compatibility of the rule with the shift.
    pub structurally_compatible: bool,
    /// Witness when structural compatibility fails (lax construction only).
    pub sc_witness: Option<ScWitness>,
}

impl CellularAutomaton {
    /// Builds the automaton and rejects structurally incompatible rules
    /// with [`Error::NotClosed`].
    pub fn new(shift: MarkovShift, table: CayleyTable) -> Result<Self> {
        let ca = Self::new_lax(shift, table)?;
        if !ca.structurally_compatible {
            let w = ca.sc_witness.as_ref().expect("incompatible build records a witness");
            return Err(Error::NotClosed {
                detail: format!(
                    "rule is not structurally compatible: edges ({}, {}) and ({}, {}) map to a non-edge",
                    ca.shift.alphabet().symbol(w.first_edge.0),
                    ca.shift.alphabet().symbol(w.first_edge.1),
                    ca.shift.alphabet().symbol(w.second_edge.0),
                    ca.shift.alphabet().symbol(w.second_edge.1),
                ),
            });
        }
        Ok(ca)
    }

    /// Builds the automaton without rejecting structural incompatibility;
    /// the flag and witness record the outcome instead.
    pub fn new_lax(shift: MarkovShift, table: CayleyTable) -> Result<Self> {
        let to_table = embedding(&shift, &table)?;
        let mut from_table = vec![None; table.n()];
        for (sid, &tid) in to_table.iter().enumerate() {
            from_table[tid] = Some(sid);
        }
        let sc = check_sc(&shift, &table)?;

        let n = shift.alphabet().len();
        let right_permutative = (0..n).all(|a| {
            let followers = shift.followers(a);
            let mut seen = vec![false; table.n()];
            followers.iter().all(|&b| {
                let v = table.op(to_table[a], to_table[b]);
                !std::mem::replace(&mut seen[v], true)
            })
        });
        let left_permutative = (0..n).all(|b| {
            let preds = shift.predecessors(b);
            let mut seen = vec![false; table.n()];
            preds.iter().all(|&a| {
                let v = table.op(to_table[a], to_table[b]);
                !std::mem::replace(&mut seen[v], true)
            })
        });

        Ok(CellularAutomaton {
            shift,
            table,
            to_table,
            from_table,
            left_permutative,
            right_permutative,
            structurally_compatible: sc.compatible,
            sc_witness: sc.witness,
        })
    }

    /// The automaton's shift.
    pub fn shift(&self) -> &MarkovShift {
        &self.shift
    }

    /// The automaton's Cayley table (total rule of the full-shift
    /// extension).
    pub fn table(&self) -> &CayleyTable {
        &self.table
    }

    /// Radius of the rule (memory 0, anticipation 1).
    pub fn radius(&self) -> usize {
        1
    }

    /// Left- and right-permutative.
    pub fn bipermutative(&self) -> bool {
        self.left_permutative && self.right_permutative
    }

    /// The rule value `a • b` on shift symbols, mapped back into the shift
    /// alphabet. `None` when the image leaves the shift (possible only for
    /// structurally incompatible lax builds).
    pub fn op(&self, a: usize, b: usize) -> Option<usize> {
        self.from_table[self.table.op(self.to_table[a], self.to_table[b])]
    }

    /// One application of the rule to an allowed word; the image is one
    /// symbol shorter.
    pub fn apply_word(&self, word: &Word) -> Result<Word> {
        if !self.shift.is_allowed(word) {
            return Err(Error::NotAllowed { word: self.shift.alphabet().format_word(word) });
        }
        if word.len() < 2 {
            return Err(Error::Invalid("word shorter than the rule window".into()));
        }
        let mut out = Vec::with_capacity(word.len() - 1);
        for pair in word.ids().windows(2) {
            match self.op(pair[0], pair[1]) {
                Some(v) => out.push(v),
                None => {
                    return Err(Error::NotClosed {
                        detail: format!(
                            "image of ({}, {}) leaves the shift alphabet",
                            self.shift.alphabet().symbol(pair[0]),
                            self.shift.alphabet().symbol(pair[1])
                        ),
                    })
                }
            }
        }
        Ok(Word::new(out))
    }

    /// `n`-fold application of the rule on table indices (no shift
    /// membership checks; stays total on the table alphabet).
    fn iterate_table_ids(&self, ids: &[usize], n: usize) -> usize {
        debug_assert_eq!(ids.len(), n + 1);
        let mut cur = ids.to_vec();
        for _ in 0..n {
            cur = cur.windows(2).map(|p| self.table.op(p[0], p[1])).collect();
        }
        cur[0]
    }

    /// The automaton as an explicit radius-1 block code.
    pub fn code(&self) -> Result<BlockCode> {
        self.power_rule_capped(1, DEFAULT_ENUM_CAP)
    }

    /// Local rule of `Φⁿ` as a block code on allowed `(n+1)`-windows.
    pub fn power_rule_capped(&self, n: usize, cap: u64) -> Result<BlockCode> {
        if n == 0 {
            return Err(Error::Invalid("power must be >= 1".into()));
        }
        let windows = self.shift.allowed_words_capped(n + 1, cap)?;
        let mut rule = HashMap::with_capacity(windows.len());
        for w in windows {
            let table_ids: Vec<usize> = w.ids().iter().map(|&s| self.to_table[s]).collect();
            let value = self.iterate_table_ids(&table_ids, n);
            match self.from_table[value] {
                Some(v) => {
                    rule.insert(w.ids().to_vec(), v);
                }
                None => {
                    return Err(Error::NotClosed {
                        detail: format!(
                            "iterate of window `{}` leaves the shift alphabet",
                            self.shift.alphabet().format_word(&w)
                        ),
                    })
                }
            }
        }
        BlockCode::new(self.shift.clone(), self.shift.clone(), 0, n, rule)
    }

    /// [`CellularAutomaton::power_rule_capped`] with the default cap.
    pub fn power_rule(&self, n: usize) -> Result<BlockCode> {
        self.power_rule_capped(n, DEFAULT_ENUM_CAP)
    }

    /// Checks whether `(Φ^N x)_0 = x_0 • x_N` on every allowed (N+1)-word.
    pub fn check_n_scaling_capped(&self, n: usize, cap: u64) -> Result<NScalingOutcome> {
        if n < 2 {
            return Err(Error::Invalid("scaling exponent must be >= 2".into()));
        }
        for w in self.shift.allowed_words_capped(n + 1, cap)? {
            let table_ids: Vec<usize> = w.ids().iter().map(|&s| self.to_table[s]).collect();
            let iterate = self.iterate_table_ids(&table_ids, n);
            let direct = self.table.op(table_ids[0], table_ids[n]);
            if iterate != direct {
                return Ok(NScalingOutcome { holds: false, witness: Some(w) });
            }
        }
        Ok(NScalingOutcome { holds: true, witness: None })
    }

    /// [`CellularAutomaton::check_n_scaling_capped`] with the default cap.
    pub fn check_n_scaling(&self, n: usize) -> Result<NScalingOutcome> {
        self.check_n_scaling_capped(n, DEFAULT_ENUM_CAP)
    }

    /// The same rule on the full shift over the table's alphabet.
    pub fn full_shift_extension(&self) -> CellularAutomaton {
        let full = MarkovShift::full(self.table.alphabet().clone());
        CellularAutomaton::new_lax(full, self.table.clone())
            .expect("full-shift extension always embeds")
    }
}
