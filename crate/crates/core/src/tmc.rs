//! Topological Markov chains presented by an edge relation on a finite
//! alphabet.
//!
//! A [`MarkovShift`] is the set of bi-infinite walks on an oriented graph;
//! a finite [`Word`] is allowed exactly when every adjacent pair of its
//! symbols is an edge. Construction prunes symbols that cannot occur on a
//! bi-infinite walk (no incoming or no outgoing edge) and records what was
//! removed, so that every surviving symbol is bi-extendable.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, DEFAULT_ENUM_CAP};

/// An ordered finite set of distinct symbol tokens.
///
/// Iteration order is the input order and fixes the lexicographic order used
/// by every enumeration in the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    /// Builds an alphabet from distinct tokens. At least one token is
    /// required and duplicates are rejected.
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::Invalid("alphabet must contain at least one symbol".into()));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate symbol `{s}` in alphabet")));
            }
        }
        Ok(Alphabet { symbols, index })
    }

    /// Number of symbols.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    /// True when the alphabet has exactly one symbol. (It is never empty.)
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Token of the symbol with index `id`.
    pub fn symbol(&self, id: usize) -> &str {
        &self.symbols[id]
    }

    /// All tokens in order.
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    /// Index of a token.
    pub fn id(&self, token: &str) -> Result<usize> {
        self.index
            .get(token)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(token.to_string()))
    }

    /// True when `other` contains every token of `self`.
    pub fn is_subset_of(&self, other: &Alphabet) -> bool {
        self.symbols.iter().all(|s| other.index.contains_key(s))
    }

    /// Parses a word from text. Tokens are comma-separated; when the text
    /// contains no comma each character is read as one token.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let tokens: Vec<String> = if text.contains(',') {
            text.split(',').map(|t| t.trim().to_string()).collect()
        } else {
            text.chars().map(|c| c.to_string()).collect()
        };
        if tokens.is_empty() || text.is_empty() {
            return Err(Error::Invalid("empty word".into()));
        }
        let ids = tokens.iter().map(|t| self.id(t)).collect::<Result<Vec<_>>>()?;
        Ok(Word::new(ids))
    }

    /// Formats a word over this alphabet. Single-character tokens are
    /// concatenated; longer tokens are comma-separated.
    pub fn format_word(&self, word: &Word) -> String {
        let one_char = self.symbols.iter().all(|s| s.chars().count() == 1);
        let parts: Vec<&str> = word.ids().iter().map(|&i| self.symbol(i)).collect();
        if one_char {
            parts.concat()
        } else {
            parts.join(",")
        }
    }
}

/// A nonempty finite sequence of symbol indices over some alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<usize>);

impl Word {
    /// Wraps symbol indices as a word. Panics on an empty sequence; words
    /// have length at least one by definition.
    pub fn new(ids: Vec<usize>) -> Self {
        assert!(!ids.is_empty(), "a word has length >= 1");
        Word(ids)
    }

    /// The underlying symbol indices.
    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    /// Word length.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Words are never empty; kept for API symmetry.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// First symbol index.
    pub fn first(&self) -> usize {
        self.0[0]
    }

    /// Last symbol index.
    pub fn last(&self) -> usize {
        *self.0.last().unwrap()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        Ok(())
    }
}

/// A topological Markov chain: the set of bi-infinite walks on an oriented
/// graph over an [`Alphabet`].
///
/// Construction iteratively deletes symbols with no outgoing or no incoming
/// edge until every remaining symbol supports bi-infinite walks; the deleted
/// tokens are recorded in [`MarkovShift::pruned`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovShift {
    alphabet: Alphabet,
    adj: Vec<Vec<bool>>,
    followers: Vec<Vec<usize>>,
    predecessors: Vec<Vec<usize>>,
    pruned: Vec<String>,
}

impl MarkovShift {
    /// Builds a shift from an alphabet and a set of edges given as token
    /// pairs. Errors with [`Error::UnknownSymbol`] on a foreign endpoint and
    /// [`Error::EmptyShift`] when pruning deletes every symbol.
    pub fn new<S: AsRef<str>>(alphabet: Alphabet, edges: &[(S, S)]) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Invalid("edge set must be nonempty".into()));
        }
        let mut pairs = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            pairs.push((alphabet.id(a.as_ref())?, alphabet.id(b.as_ref())?));
        }
        Self::from_edge_ids(alphabet, &pairs)
    }

    /// Builds a shift from edges given as symbol indices of `alphabet`.
    pub fn from_edge_ids(alphabet: Alphabet, edges: &[(usize, usize)]) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Invalid("edge set must be nonempty".into()));
        }
        let n = alphabet.len();
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Invalid(format!("edge ({a}, {b}) out of range")));
            }
            adj[a][b] = true;
        }

        // Fixpoint pruning: drop symbols that cannot be bi-extended.
        let mut alive = vec![true; n];
        loop {
            let mut changed = false;
            for s in 0..n {
                if !alive[s] {
                    continue;
                }
                let has_out = (0..n).any(|t| alive[t] && adj[s][t]);
                let has_in = (0..n).any(|t| alive[t] && adj[t][s]);
                if !has_out || !has_in {
                    alive[s] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if alive.iter().all(|a| !a) {
            return Err(Error::EmptyShift);
        }

        let kept: Vec<usize> = (0..n).filter(|&s| alive[s]).collect();
        let pruned: Vec<String> = (0..n)
            .filter(|&s| !alive[s])
            .map(|s| alphabet.symbol(s).to_string())
            .collect();
        let new_alphabet = Alphabet::new(kept.iter().map(|&s| alphabet.symbol(s)))?;
        let m = kept.len();
        let mut new_adj = vec![vec![false; m]; m];
        for (i, &a) in kept.iter().enumerate() {
            for (j, &b) in kept.iter().enumerate() {
                new_adj[i][j] = adj[a][b];
            }
        }
        let followers: Vec<Vec<usize>> = (0..m)
            .map(|a| (0..m).filter(|&b| new_adj[a][b]).collect())
            .collect();
        let predecessors: Vec<Vec<usize>> = (0..m)
            .map(|b| (0..m).filter(|&a| new_adj[a][b]).collect())
            .collect();
        Ok(MarkovShift {
            alphabet: new_alphabet,
            adj: new_adj,
            followers,
            predecessors,
            pruned,
        })
    }

    /// The full shift over `alphabet`: every pair of symbols is an edge.
    pub fn full(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
        Self::from_edge_ids(alphabet, &edges).expect("full shift is never empty")
    }

    /// The shift's alphabet after pruning.
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Tokens deleted during construction because they could not occur on a
    /// bi-infinite walk.
    pub fn pruned(&self) -> &[String] {
        &self.pruned
    }

    /// True when `(a, b)` is an edge.
    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    /// Edges as index pairs, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.alphabet.len();
        (0..n)
            .flat_map(|a| (0..n).filter(move |&b| self.adj[a][b]).map(move |b| (a, b)))
            .collect()
    }

    /// Symbols that may follow `a`.
    pub fn followers(&self, a: usize) -> &[usize] {
        &self.followers[a]
    }

    /// Symbols that may precede `b`.
    pub fn predecessors(&self, b: usize) -> &[usize] {
        &self.predecessors[b]
    }

    /// True when every pair of adjacent symbols of `word` is an edge.
    pub fn is_allowed(&self, word: &Word) -> bool {
        word.ids().iter().all(|&s| s < self.alphabet.len())
            && word.ids().windows(2).all(|p| self.adj[p[0]][p[1]])
    }

    fn not_allowed(&self, word: &Word) -> Error {
        Error::NotAllowed { word: self.alphabet.format_word(word) }
    }

    /// Number of allowed words of length `k`, i.e. the sum of all entries of
    /// the (k−1)-th power of the adjacency matrix.
    pub fn count_words(&self, k: usize) -> u128 {
        assert!(k >= 1);
        let n = self.alphabet.len();
        // Row vector of ones times A^{k-1}, summed.
        let mut v = vec![1u128; n];
        for _ in 1..k {
            let mut next = vec![0u128; n];
            for (a, row) in self.adj.iter().enumerate() {
                if v[a] == 0 {
                    continue;
                }
                for (b, &e) in row.iter().enumerate() {
                    if e {
                        next[b] = next[b].saturating_add(v[a]);
                    }
                }
            }
            v = next;
        }
        v.iter().fold(0u128, |acc, &x| acc.saturating_add(x))
    }

    /// All allowed words of length `k` in lexicographic order (by symbol
    /// index). `k = 1` returns the alphabet. Errors with
    /// [`Error::DepthTooLarge`] when the result would exceed `cap` words.
    pub fn allowed_words_capped(&self, k: usize, cap: u64) -> Result<Vec<Word>> {
        if k == 0 {
            return Err(Error::Invalid("word length must be >= 1".into()));
        }
        let count = self.count_words(k);
        if count > cap as u128 {
            return Err(Error::DepthTooLarge { requested: count, cap });
        }
        let mut out = Vec::with_capacity(count as usize);
        let mut stack = Vec::with_capacity(k);
        self.enumerate_rec(k, &mut stack, &mut out);
        Ok(out)
    }

    fn enumerate_rec(&self, k: usize, stack: &mut Vec<usize>, out: &mut Vec<Word>) {
        if stack.len() == k {
            out.push(Word::new(stack.clone()));
            return;
        }
        if stack.is_empty() {
            for s in 0..self.alphabet.len() {
                stack.push(s);
                self.enumerate_rec(k, stack, out);
                stack.pop();
            }
        } else {
            let last = *stack.last().unwrap();
            for &s in &self.followers[last] {
                stack.push(s);
                self.enumerate_rec(k, stack, out);
                stack.pop();
            }
        }
    }

    /// [`MarkovShift::allowed_words_capped`] with the default cap.
    pub fn allowed_words(&self, k: usize) -> Result<Vec<Word>> {
        self.allowed_words_capped(k, DEFAULT_ENUM_CAP)
    }

    /// Streams every allowed word of length `k` in lexicographic order
    /// without materializing the list. The visitor returns `false` to stop
    /// early; the call returns `false` when it stopped early.
    pub fn for_each_allowed_word<F: FnMut(&[usize]) -> bool>(&self, k: usize, f: &mut F) -> bool {
        assert!(k >= 1);
        let mut stack = Vec::with_capacity(k);
        for s in 0..self.alphabet.len() {
            stack.push(s);
            let keep_going = self.stream_rec(k, &mut stack, f);
            stack.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }

    fn stream_rec<F: FnMut(&[usize]) -> bool>(
        &self,
        k: usize,
        stack: &mut Vec<usize>,
        f: &mut F,
    ) -> bool {
        if stack.len() == k {
            return f(stack);
        }
        let last = *stack.last().unwrap();
        for idx in 0..self.followers[last].len() {
            let s = self.followers[last][idx];
            stack.push(s);
            let keep_going = self.stream_rec(k, stack, f);
            stack.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }

    /// Follower set of an allowed word. For a Markov chain this is the
    /// follower set of the last symbol.
    pub fn follower_set(&self, word: &Word) -> Result<Vec<usize>> {
        if !self.is_allowed(word) {
            return Err(self.not_allowed(word));
        }
        Ok(self.followers[word.last()].clone())
    }

    /// Predecessor set of an allowed word (predecessors of its first symbol).
    pub fn predecessor_set(&self, word: &Word) -> Result<Vec<usize>> {
        if !self.is_allowed(word) {
            return Err(self.not_allowed(word));
        }
        Ok(self.predecessors[word.first()].clone())
    }

    /// True when the edge digraph is strongly connected.
    pub fn is_irreducible(&self) -> bool {
        let n = self.alphabet.len();
        let reach = transitive_closure(&self.adj);
        (0..n).all(|a| (0..n).all(|b| reach[a][b]))
    }

    /// Smallest exponent `q` with every entry of the q-th adjacency power
    /// positive, or `None` when the matrix is not primitive. The search is
    /// capped at the Wielandt bound (n−1)² + 1, past which non-primitivity
    /// is certain.
    pub fn primitivity_exponent(&self) -> Option<u64> {
        let n = self.alphabet.len();
        let bound = ((n - 1) * (n - 1) + 1) as u64;
        let a = BitMat::from_bools(&self.adj);
        let mut power = a.clone();
        for q in 1..=bound {
            if power.all_positive(n) {
                return Some(q);
            }
            power = power.mul(&a, n);
        }
        None
    }

    /// Topological entropy: the natural log of the Perron eigenvalue of the
    /// adjacency matrix.
    pub fn entropy(&self) -> f64 {
        perron_root(&self.adj).ln()
    }

    /// Combinatorial and spectral summary of the shift. `depth` bounds the
    /// word-count table.
    pub fn report(&self, depth: usize) -> ShiftReport {
        let irreducible = self.is_irreducible();
        let q = self.primitivity_exponent();
        let num_words_by_length = (1..=depth.max(1))
            .map(|k| {
                let c = self.count_words(k);
                (k, u64::try_from(c).unwrap_or(u64::MAX))
            })
            .collect();
        ShiftReport {
            irreducible,
            mixing: q.is_some(),
            mixing_constant_q: q,
            entropy: self.entropy(),
            num_words_by_length,
        }
    }

    /// Perron eigendata `(λ, right, left)` for an irreducible shift, used by
    /// the Parry measure construction. Vectors are strictly positive and
    /// 1-normalized.
    pub(crate) fn perron_data(&self) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        if !self.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let n = self.alphabet.len();
        let right = power_iterate_plus_identity(&self.adj, n, false);
        let left = power_iterate_plus_identity(&self.adj, n, true);
        let lambda = perron_root(&self.adj);
        Ok((lambda, right, left))
    }
}

/// Summary of a shift's combinatorial and spectral properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    /// Strong connectivity of the edge digraph.
    pub irreducible: bool,
    /// Primitivity of the adjacency matrix.
    pub mixing: bool,
    /// Smallest exponent making every adjacency-power entry positive, when
    /// the matrix is primitive.
    pub mixing_constant_q: Option<u64>,
    /// Natural log of the Perron eigenvalue.
    pub entropy: f64,
    /// `k ↦ |allowed words of length k|` up to the report depth.
    pub num_words_by_length: Vec<(usize, u64)>,
}

/// Square boolean matrix with bit-packed rows, for adjacency powers.
#[derive(Clone)]
struct BitMat {
    words_per_row: usize,
    rows: Vec<u64>,
}

impl BitMat {
    fn from_bools(adj: &[Vec<bool>]) -> Self {
        let n = adj.len();
        let wpr = n.div_ceil(64);
        let mut rows = vec![0u64; n * wpr];
        for (i, row) in adj.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                if e {
                    rows[i * wpr + j / 64] |= 1 << (j % 64);
                }
            }
        }
        BitMat { words_per_row: wpr, rows }
    }

    fn mul(&self, other: &BitMat, n: usize) -> BitMat {
        let wpr = self.words_per_row;
        let mut rows = vec![0u64; n * wpr];
        for i in 0..n {
            for j in 0..n {
                if self.rows[i * wpr + j / 64] >> (j % 64) & 1 == 1 {
                    for w in 0..wpr {
                        rows[i * wpr + w] |= other.rows[j * wpr + w];
                    }
                }
            }
        }
        BitMat { words_per_row: wpr, rows }
    }

    fn all_positive(&self, n: usize) -> bool {
        let wpr = self.words_per_row;
        for i in 0..n {
            for j in 0..n {
                if self.rows[i * wpr + j / 64] >> (j % 64) & 1 == 0 {
                    return false;
                }
            }
        }
        true
    }
}

/// All-pairs reachability (including length-0 paths) by repeated squaring.
fn transitive_closure(adj: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = adj.len();
    let mut m = BitMat::from_bools(adj);
    // Add the identity so powers accumulate paths of every length.
    for i in 0..n {
        m.rows[i * m.words_per_row + i / 64] |= 1 << (i % 64);
    }
    for _ in 0..n.ilog2() + 1 {
        m = m.mul(&m.clone(), n);
    }
    let wpr = m.words_per_row;
    (0..n)
        .map(|i| (0..n).map(|j| m.rows[i * wpr + j / 64] >> (j % 64) & 1 == 1).collect())
        .collect()
}

const POWER_ITER_CAP: usize = 100_000;
const POWER_ITER_TOL: f64 = 1e-14;

/// Dominant eigenvector of (A + I), optionally transposed, by power
/// iteration from the all-ones vector. For an irreducible A the shifted
/// matrix is primitive, so convergence is geometric and the limit is the
/// strictly positive Perron vector of A itself.
fn power_iterate_plus_identity(adj: &[Vec<bool>], n: usize, transpose: bool) -> Vec<f64> {
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..POWER_ITER_CAP {
        let mut next = v.clone(); // the +I term
        for a in 0..n {
            for b in 0..n {
                let e = if transpose { adj[b][a] } else { adj[a][b] };
                if e {
                    next[a] += v[b];
                }
            }
        }
        let norm: f64 = next.iter().sum();
        for x in next.iter_mut() {
            *x /= norm;
        }
        let delta = v
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta <= POWER_ITER_TOL {
            break;
        }
    }
    v
}

/// Spectral radius of a nonnegative 0/1 matrix: the maximum over strongly
/// connected components of each component's Perron root. Restricting to
/// components keeps power iteration geometric even on reducible or periodic
/// inputs (A + I is primitive on an irreducible block).
pub(crate) fn perron_root(adj: &[Vec<bool>]) -> f64 {
    let n = adj.len();
    let reach = transitive_closure(adj);
    let mut assigned = vec![false; n];
    let mut best: f64 = 0.0;
    for s in 0..n {
        if assigned[s] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&t| reach[s][t] && reach[t][s]).collect();
        for &t in &comp {
            assigned[t] = true;
        }
        let m = comp.len();
        if m == 1 && !adj[comp[0]][comp[0]] {
            continue; // transient singleton, contributes 0
        }
        let sub: Vec<Vec<bool>> = comp.iter().map(|&a| comp.iter().map(|&b| adj[a][b]).collect()).collect();
        let v = power_iterate_plus_identity(&sub, m, false);
        // At the fixpoint, ((A+I)v)_i / v_i = 1 + λ for every i.
        let mut lambda: f64 = 0.0;
        for i in 0..m {
            let mut acc = v[i];
            for j in 0..m {
                if sub[i][j] {
                    acc += v[j];
                }
            }
            lambda = lambda.max(acc / v[i] - 1.0);
        }
        best = best.max(lambda);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn binary() -> Alphabet {
        Alphabet::new(["0", "1"]).unwrap()
    }

    pub(crate) fn full2() -> MarkovShift {
        MarkovShift::full(binary())
    }

    pub(crate) fn golden_mean() -> MarkovShift {
        MarkovShift::new(binary(), &[("0", "0"), ("0", "1"), ("1", "0")]).unwrap()
    }

    #[test]
    fn full_shift_builds_without_pruning() {
        let s = full2();
        assert_eq!(s.alphabet().len(), 2);
        assert!(s.pruned().is_empty());
        assert_eq!(s.edges().len(), 4);
    }

    #[test]
    fn golden_mean_builds_without_pruning() {
        let s = golden_mean();
        assert!(s.pruned().is_empty());
        assert!(s.is_edge(0, 0) && s.is_edge(0, 1) && s.is_edge(1, 0));
        assert!(!s.is_edge(1, 1));
    }

    #[test]
    fn stranded_symbol_is_pruned() {
        let a = Alphabet::new(["0", "1", "2"]).unwrap();
        let s = MarkovShift::new(a, &[("0", "1"), ("1", "0"), ("2", "0")]).unwrap();
        assert_eq!(s.pruned(), &["2".to_string()]);
        assert_eq!(s.alphabet().symbols(), &["0".to_string(), "1".to_string()]);
    }

    #[test]
    fn pruning_everything_is_an_error() {
        let a = Alphabet::new(["0", "1"]).unwrap();
        let err = MarkovShift::new(a, &[("0", "1")]).unwrap_err();
        assert_eq!(err, Error::EmptyShift);
    }

    #[test]
    fn unknown_edge_endpoint_is_an_error() {
        let a = binary();
        let err = MarkovShift::new(a, &[("0", "7")]).unwrap_err();
        assert!(matches!(err, Error::UnknownSymbol(s) if s == "7"));
    }

    #[test]
    fn word_counts_match_examples() {
        assert_eq!(full2().allowed_words(3).unwrap().len(), 8);
        // Direct enumeration gives the Fibonacci count F(6) = 8 at k = 4.
        assert_eq!(golden_mean().allowed_words(4).unwrap().len(), 8);
        let singles = golden_mean().allowed_words(1).unwrap();
        assert_eq!(singles, vec![Word::new(vec![0]), Word::new(vec![1])]);
    }

    #[test]
    fn allowed_words_lexicographic_and_subword_closed() {
        let s = golden_mean();
        for k in 1..=7 {
            let words = s.allowed_words(k).unwrap();
            let mut sorted = words.clone();
            sorted.sort();
            assert_eq!(words, sorted);
            if k > 1 {
                for w in &words {
                    let prefix = Word::new(w.ids()[..k - 1].to_vec());
                    let suffix = Word::new(w.ids()[1..].to_vec());
                    assert!(s.is_allowed(&prefix) && s.is_allowed(&suffix));
                }
            }
        }
    }

    #[test]
    fn counts_agree_with_matrix_power() {
        for s in [full2(), golden_mean()] {
            for k in 1..=8 {
                assert_eq!(s.count_words(k), s.allowed_words(k).unwrap().len() as u128);
            }
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let err = full2().allowed_words_capped(10, 100).unwrap_err();
        assert!(matches!(err, Error::DepthTooLarge { requested: 1024, cap: 100 }));
    }

    #[test]
    fn follower_sets_match_markov_property() {
        let g = golden_mean();
        assert_eq!(g.follower_set(&Word::new(vec![1])).unwrap(), vec![0]);
        assert_eq!(g.follower_set(&Word::new(vec![0, 1])).unwrap(), vec![0]);
        for k in 1..=5 {
            for w in g.allowed_words(k).unwrap() {
                assert_eq!(g.follower_set(&w).unwrap(), g.followers(w.last()));
                assert_eq!(g.predecessor_set(&w).unwrap(), g.predecessors(w.first()));
            }
        }
        let f = full2();
        assert_eq!(f.follower_set(&Word::new(vec![1, 0, 1])).unwrap(), vec![0, 1]);
        assert!(matches!(
            g.follower_set(&Word::new(vec![1, 1])),
            Err(Error::NotAllowed { .. })
        ));
    }

    #[test]
    fn report_full_shift() {
        let r = full2().report(4);
        assert!(r.irreducible && r.mixing);
        assert_eq!(r.mixing_constant_q, Some(1));
        assert!((r.entropy - 2.0_f64.ln()).abs() < 1e-12);
        assert_eq!(r.num_words_by_length, vec![(1, 2), (2, 4), (3, 8), (4, 16)]);
    }

    #[test]
    fn report_golden_mean() {
        let r = golden_mean().report(3);
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        assert!(r.irreducible && r.mixing);
        assert!((r.entropy - phi.ln()).abs() < 1e-12, "entropy {}", r.entropy);
    }

    #[test]
    fn report_two_disjoint_loops() {
        let s = MarkovShift::new(binary(), &[("0", "0"), ("1", "1")]).unwrap();
        let r = s.report(3);
        assert!(!r.irreducible && !r.mixing);
        assert_eq!(r.mixing_constant_q, None);
        assert!(r.entropy.abs() < 1e-12);
    }

    #[test]
    fn periodic_irreducible_shift_has_entropy_zero_and_no_mixing() {
        let s = MarkovShift::new(binary(), &[("0", "1"), ("1", "0")]).unwrap();
        let r = s.report(2);
        assert!(r.irreducible);
        assert!(!r.mixing);
        assert!(r.entropy.abs() < 1e-12);
    }

    #[test]
    fn full_shift_entropy_is_log_n() {
        for n in 1..=6 {
            let a = Alphabet::new((0..n).map(|i| i.to_string())).unwrap();
            let s = MarkovShift::full(a);
            assert!((s.entropy() - (n as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn mixing_implies_irreducible_on_random_shifts() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let mut seen = 0;
        while seen < 200 {
            let n = rng.gen_range(2..=5usize);
            let a = Alphabet::new((0..n).map(|i| i.to_string())).unwrap();
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|x| (0..n).map(move |y| (x, y)))
                .filter(|_| rng.gen_bool(0.45))
                .collect();
            if edges.is_empty() {
                continue;
            }
            let Ok(s) = MarkovShift::from_edge_ids(a, &edges) else {
                continue;
            };
            seen += 1;
            let r = s.report(2);
            if r.mixing {
                assert!(r.irreducible);
            }
            // Entropy of any pruned shift is nonnegative (a cycle survives).
            assert!(r.entropy >= -1e-15);
        }
    }

    #[test]
    fn word_parsing_round_trips() {
        let a = binary();
        let w = a.parse_word("101").unwrap();
        assert_eq!(w, Word::new(vec![1, 0, 1]));
        assert_eq!(a.format_word(&w), "101");
        let long = Alphabet::new(["a1", "b1"]).unwrap();
        let w2 = long.parse_word("a1,b1,a1").unwrap();
        assert_eq!(long.format_word(&w2), "a1,b1,a1");
    }
}
