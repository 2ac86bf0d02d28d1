//! Cesàro mean distribution `(1/N) Σ_{n<N} μ∘Φ⁻ⁿ` on cylinders.
//!
//! Two engines produce the per-step values `μ(Φ⁻ⁿ[w])`:
//!
//! - **Exact.** For automata whose table is affine over an abelian group
//!   (any medial quasigroup, via the Toyoda form), the iterate's rule is a
//!   binomial combination of commuting automorphisms and the value is
//!   computed by a transfer scan over positions carrying one partial group
//!   sum per open window — every step of every run is exact, independent of
//!   N. Other rules fall back to preimage enumeration, which truncates at
//!   the enumeration cap and flags the first infeasible step.
//! - **Monte Carlo.** Seeded block sampling of finite paths, iterating the
//!   rule on shrinking windows; indicator counts are integers, so reports
//!   are byte-reproducible for a fixed seed.
//!
//! [`compare_to_parry`] grades a finished report against the maximal-entropy
//! measure with a three-valued verdict; it never claims a limit.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{CayleyTable, Permutation, ToyodaOutcome};
use crate::ca::CellularAutomaton;
use crate::measure::FiniteMemoryMeasure;
use crate::tmc::{MarkovShift, Word};
use crate::{Error, Result, DEFAULT_ENUM_CAP};

/// Which engine produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineMode {
    /// Every step exact.
    Exact,
    /// Every step estimated.
    MonteCarlo,
    /// Exact steps up to the cap, Monte Carlo past it.
    Hybrid,
}

/// Per-word step values and running averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordSeries {
    /// The cylinder word, spelled over the shift alphabet.
    pub word: String,
    /// `values[n] = μ(Φ⁻ⁿ[w])` (exact or estimated).
    pub values: Vec<f64>,
    /// Running Cesàro averages of `values`.
    pub cesaro: Vec<f64>,
    /// Per-step 3σ half-widths (Monte Carlo steps only; 0 for exact steps
    /// of a hybrid run).
    pub half_widths: Option<Vec<f64>>,
}

/// A finished Cesàro run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CesaroReport {
    /// Engine that produced the values.
    pub mode: EngineMode,
    /// Number of steps `N` (values for `n = 0 … N−1`).
    pub n_steps: usize,
    /// One series per requested word.
    pub series: Vec<WordSeries>,
    /// Sample count (Monte Carlo and hybrid runs).
    pub samples: Option<u64>,
    /// Master seed (Monte Carlo and hybrid runs).
    pub seed: Option<u64>,
    /// Parry probability per word when the shift is irreducible.
    pub parry_values: Option<Vec<f64>>,
    /// `max_w |Cesàro_N(w) − Parry(w)|` when Parry values exist.
    pub final_deviation: Option<f64>,
    /// First step whose exact enumeration exceeded the cap (exact engine
    /// only; the report is truncated there).
    pub truncated_at: Option<usize>,
}

impl CesaroReport {
    fn finish(
        mode: EngineMode,
        n_steps: usize,
        shift: &MarkovShift,
        words: &[Word],
        values: Vec<Vec<f64>>,
        half_widths: Option<Vec<Vec<f64>>>,
        samples: Option<u64>,
        seed: Option<u64>,
        truncated_at: Option<usize>,
    ) -> Result<CesaroReport> {
        let parry_values = match FiniteMemoryMeasure::parry(shift) {
            Ok(parry) => Some(
                words
                    .iter()
                    .map(|w| parry.cylinder_prob(w))
                    .collect::<Result<Vec<f64>>>()?,
            ),
            Err(Error::NotIrreducible) => None,
            Err(e) => return Err(e),
        };
        let mut series = Vec::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            let vals = &values[i];
            let mut cesaro = Vec::with_capacity(vals.len());
            let mut acc = 0.0;
            for (n, &v) in vals.iter().enumerate() {
                debug_assert!((-1e-12..=1.0 + 1e-12).contains(&v), "step value {v}");
                acc += v;
                cesaro.push(acc / (n + 1) as f64);
            }
            series.push(WordSeries {
                word: shift.alphabet().format_word(w),
                values: vals.clone(),
                cesaro,
                half_widths: half_widths.as_ref().map(|h| h[i].clone()),
            });
        }
        let final_deviation = parry_values.as_ref().map(|pv| {
            series
                .iter()
                .zip(pv)
                .map(|(s, &p)| s.cesaro.last().map_or(f64::INFINITY, |c| (c - p).abs()))
                .fold(0.0f64, f64::max)
        });
        Ok(CesaroReport {
            mode,
            n_steps,
            series,
            samples,
            seed,
            parry_values,
            final_deviation,
            truncated_at,
        })
    }
}

fn check_hypotheses(measure: &FiniteMemoryMeasure, ca: &CellularAutomaton) -> Result<()> {
    if measure.shift() != ca.shift() {
        return Err(Error::HypothesisFailed("measure and automaton shifts differ".into()));
    }
    if !ca.structurally_compatible {
        return Err(Error::HypothesisFailed("automaton is not structurally compatible".into()));
    }
    Ok(())
}

/// Exact per-step values `μ(Φ⁻ⁿ[w])` for `n < n_steps`.
///
/// Affine rules run the transfer scan for every step; other rules fall back
/// to preimage enumeration and truncate at the first step whose window
/// exceeds `cap` (recorded in `truncated_at`).
pub fn cesaro_exact(
    measure: &FiniteMemoryMeasure,
    ca: &CellularAutomaton,
    words: &[Word],
    n_steps: usize,
    cap: u64,
) -> Result<CesaroReport> {
    check_hypotheses(measure, ca)?;
    if n_steps == 0 || words.is_empty() {
        return Err(Error::Invalid("need at least one step and one word".into()));
    }
    for w in words {
        if !ca.shift().is_allowed(w) {
            return Err(Error::NotAllowed { word: ca.shift().alphabet().format_word(w) });
        }
    }

    if let Some(engine) = AffineEngine::try_new(ca)? {
        let mut values = vec![Vec::with_capacity(n_steps); words.len()];
        let mut coeffs = CoefficientTable::new(&engine);
        for n in 0..n_steps {
            coeffs.advance_to(&engine, n);
            for (i, w) in words.iter().enumerate() {
                values[i].push(engine.step_value(measure, ca, &coeffs, w));
            }
        }
        return CesaroReport::finish(
            EngineMode::Exact,
            n_steps,
            ca.shift(),
            words,
            values,
            None,
            None,
            None,
            None,
        );
    }

    let mut values = vec![Vec::with_capacity(n_steps); words.len()];
    let mut truncated_at = None;
    let maxlen = words.iter().map(Word::len).max().unwrap();
    for n in 0..n_steps {
        let needed = ca.shift().count_words(n + maxlen);
        if needed > cap as u128 {
            truncated_at = Some(n);
            break;
        }
        for (i, w) in words.iter().enumerate() {
            values[i].push(exact_step_by_enumeration(measure, ca, w, n, cap)?);
        }
    }
    CesaroReport::finish(
        EngineMode::Exact,
        n_steps,
        ca.shift(),
        words,
        values,
        None,
        None,
        None,
        truncated_at,
    )
}

/// Brute-force step value: sum of `μ` over allowed source words whose
/// `n`-fold image is `word`, explored depth-first with image pruning.
fn exact_step_by_enumeration(
    measure: &FiniteMemoryMeasure,
    ca: &CellularAutomaton,
    word: &Word,
    n: usize,
    cap: u64,
) -> Result<f64> {
    if n == 0 {
        return measure.cylinder_prob(word);
    }
    let total_len = word.len() + n;
    let mut acc = 0.0;
    let mut stack: Vec<usize> = Vec::with_capacity(total_len);
    let mut visited = 0u64;
    enumerate_preimages(
        measure,
        ca,
        word,
        n,
        total_len,
        &mut stack,
        &mut acc,
        &mut visited,
        cap,
    )?;
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_preimages(
    measure: &FiniteMemoryMeasure,
    ca: &CellularAutomaton,
    word: &Word,
    n: usize,
    total_len: usize,
    stack: &mut Vec<usize>,
    acc: &mut f64,
    visited: &mut u64,
    cap: u64,
) -> Result<()> {
    if stack.len() == total_len {
        *acc += measure.cylinder_prob(&Word::new(stack.clone()))?;
        return Ok(());
    }
    let shift = ca.shift();
    let candidates: Vec<usize> = match stack.last() {
        None => (0..shift.alphabet().len()).collect(),
        Some(&last) => shift.followers(last).to_vec(),
    };
    for s in candidates {
        *visited += 1;
        if *visited > cap {
            return Err(Error::DepthTooLarge { requested: *visited as u128, cap });
        }
        stack.push(s);
        // Once position j >= n is fixed, the iterate's value at j − n is
        // determined; prune on mismatch.
        let j = stack.len() - 1;
        let consistent = if j >= n && j - n < word.len() {
            let mut row = stack[j - n..=j].to_vec();
            for _ in 0..n {
                row = row
                    .windows(2)
                    .map(|p| ca.op(p[0], p[1]).expect("compatible rule stays in the shift"))
                    .collect();
            }
            row[0] == word.ids()[j - n]
        } else {
            true
        };
        if consistent {
            enumerate_preimages(measure, ca, word, n, total_len, stack, acc, visited, cap)?;
        }
        stack.pop();
    }
    Ok(())
}

/// Affine presentation of the automaton's rule, with group data needed by
/// the transfer scan.
struct AffineEngine {
    group: CayleyTable,
    eta: Permutation,
    rho: Permutation,
    constant: usize,
    identity: usize,
    exponent: u64,
    /// Shift symbol → table symbol.
    embed: Vec<usize>,
}

impl AffineEngine {
    fn try_new(ca: &CellularAutomaton) -> Result<Option<AffineEngine>> {
        let toyoda = match ca.table().toyoda_decompose() {
            Ok(ToyodaOutcome::Found(d)) => d,
            Ok(ToyodaOutcome::Absent { .. }) | Err(Error::SearchExceeded { .. }) => {
                return Ok(None)
            }
            Err(e) => return Err(e),
        };
        let identity = toyoda.group_identity();
        let n = toyoda.group.n();
        let exponent = (0..n)
            .map(|x| {
                let mut acc = x;
                let mut k = 1u64;
                while acc != identity {
                    acc = toyoda.group.op(acc, x);
                    k += 1;
                }
                k
            })
            .fold(1, crate::algebra::lcm);
        let embed: Vec<usize> = ca
            .shift()
            .alphabet()
            .symbols()
            .iter()
            .map(|s| ca.table().alphabet().id(s))
            .collect::<Result<_>>()?;
        Ok(Some(AffineEngine {
            group: toyoda.group,
            eta: toyoda.eta,
            rho: toyoda.rho,
            constant: toyoda.constant,
            identity,
            exponent,
            embed,
        }))
    }

    fn multiple(&self, m: u64, g: usize) -> usize {
        let mut acc = self.identity;
        for _ in 0..(m % self.exponent) {
            acc = self.group.op(acc, g);
        }
        acc
    }

    /// Exact `μ(Φ⁻ⁿ[w])` by a position scan. The state is the measure's
    /// memory together with one partial group sum per open window; window
    /// `j` closes at position `j + n` against `w_j ⊖ c_n`.
    fn step_value(
        &self,
        measure: &FiniteMemoryMeasure,
        ca: &CellularAutomaton,
        coeffs: &CoefficientTable,
        word: &Word,
    ) -> f64 {
        let n = coeffs.n;
        let k = word.len();
        let total_len = n + k;
        let d = measure.depth();
        if n == 0 {
            return measure.cylinder_prob(word).expect("word verified allowed");
        }
        let word_tids: Vec<usize> = word.ids().iter().map(|&s| self.embed[s]).collect();

        type State = (Vec<usize>, Vec<usize>);
        let mut states: BTreeMap<State, f64> = BTreeMap::new();
        states.insert((Vec::new(), Vec::new()), 1.0);

        for i in 0..total_len {
            let mut next: BTreeMap<State, f64> = BTreeMap::new();
            for ((mem, sums), mass) in &states {
                // Symbol choices and their probabilities at position i.
                let choices: Vec<(usize, f64)> = if i < d {
                    // Initial phase: extend over allowed prefixes; the
                    // prefix weight is charged once, at the start.
                    let shift = ca.shift();
                    let symbols: Vec<usize> = match mem.last() {
                        None => (0..shift.alphabet().len()).collect(),
                        Some(&last) => shift.followers(last).to_vec(),
                    };
                    symbols.into_iter().map(|s| (s, 1.0)).collect()
                } else {
                    let row = measure
                        .kernel_row(&mem[mem.len().saturating_sub(d)..])
                        .expect("memory tracks an allowed past");
                    row.iter()
                        .enumerate()
                        .filter(|&(_, &p)| p > 0.0)
                        .map(|(a, &p)| (a, p))
                        .collect()
                };
                for (a, p) in choices {
                    let mut new_mem = mem.clone();
                    new_mem.push(a);
                    // The initial phase keeps the full prefix so its weight
                    // can be looked up when the phase ends; afterwards only
                    // the last d symbols matter.
                    let weight = if i + 1 == d || (d == 0 && i == 0) {
                        // First moment the prefix is a complete past.
                        if d == 0 {
                            1.0
                        } else {
                            match measure.initial_prob(&new_mem) {
                                Some(q) => q,
                                None => continue,
                            }
                        }
                    } else {
                        1.0
                    };
                    if i >= d && new_mem.len() > d {
                        new_mem.remove(0);
                    }
                    let mut new_sums = sums.clone();
                    if i < k {
                        new_sums.push(self.identity);
                    }
                    // Window j receives coefficient t = i − j of symbol a.
                    let lo = i.saturating_sub(n);
                    let a_tid = self.embed[a];
                    for (slot, j) in (lo..=i.min(k - 1)).enumerate() {
                        let t = i - j;
                        let contrib = coeffs.apply(self, t, a_tid);
                        new_sums[slot] = self.group.op(new_sums[slot], contrib);
                    }
                    // Close the front window when its last term arrived.
                    if i >= n {
                        let j = i - n;
                        let closed = new_sums.remove(0);
                        let out = self.group.op(closed, coeffs.constant);
                        if out != word_tids[j] {
                            continue;
                        }
                    }
                    let extra = p * weight;
                    if extra > 0.0 {
                        *next.entry((new_mem, new_sums)).or_insert(0.0) += mass * extra;
                    }
                }
            }
            states = next;
        }
        if total_len < d {
            // The run ended inside the initial phase; charge the marginal
            // of each surviving prefix.
            return states
                .iter()
                .map(|((mem, _), mass)| {
                    mass * measure
                        .cylinder_prob(&Word::new(mem.clone()))
                        .expect("surviving prefixes are allowed")
                })
                .sum();
        }
        states.values().sum()
    }
}

/// Binomial coefficient maps of the current step: `t ↦ C(n,t)·η^{n−t}ρ^t`
/// as explicit symbol maps, plus the accumulated constant.
struct CoefficientTable {
    n: usize,
    pascal: Vec<u64>,
    maps: Vec<Vec<usize>>,
    constant: usize,
}

impl CoefficientTable {
    fn new(engine: &AffineEngine) -> CoefficientTable {
        let mut table = CoefficientTable {
            n: 0,
            pascal: vec![1],
            maps: Vec::new(),
            constant: engine.identity,
        };
        table.rebuild_maps(engine);
        table
    }

    /// Advances the table to step `n`; callers iterate n = 0, 1, ….
    fn advance_to(&mut self, engine: &AffineEngine, n: usize) {
        while self.n < n {
            // Pascal row update modulo the group exponent.
            let mut next = vec![1u64; self.pascal.len() + 1];
            for t in 1..self.pascal.len() {
                next[t] = (self.pascal[t - 1] + self.pascal[t]) % engine.exponent;
            }
            self.pascal = next;
            self.n += 1;
            // c_{n+1} = η(c_n) + ρ(c_n) + c.
            let e = engine.eta.apply(self.constant);
            let r = engine.rho.apply(self.constant);
            self.constant = engine.group.op(engine.group.op(e, r), engine.constant);
            self.rebuild_maps(engine);
        }
    }

    fn rebuild_maps(&mut self, engine: &AffineEngine) {
        let g = engine.group.n();
        let mut eta_pow = Permutation::identity(g);
        let mut rho_pows: Vec<Permutation> = Vec::with_capacity(self.n + 1);
        let mut acc = Permutation::identity(g);
        for _ in 0..=self.n {
            rho_pows.push(acc.clone());
            acc = engine.rho.compose(&acc);
        }
        // eta^{n-t} built by multiplying up from t = n downwards.
        let mut eta_pows: Vec<Permutation> = vec![Permutation::identity(g); self.n + 1];
        for t in (0..self.n).rev() {
            eta_pow = engine.eta.compose(&eta_pow);
            eta_pows[t] = eta_pow.clone();
        }
        self.maps = (0..=self.n)
            .map(|t| {
                let m = self.pascal[t] % engine.exponent;
                (0..g)
                    .map(|x| engine.multiple(m, eta_pows[t].apply(rho_pows[t].apply(x))))
                    .collect()
            })
            .collect();
    }

    fn apply(&self, _engine: &AffineEngine, t: usize, x: usize) -> usize {
        self.maps[t][x]
    }
}

/// Monte Carlo per-step values from `samples` seeded paths.
///
/// Paths are drawn in blocks with per-block seeds derived from the master
/// seed; indicator counts are integers, so output is byte-reproducible and
/// independent of block scheduling.
pub fn cesaro_monte_carlo(
    measure: &FiniteMemoryMeasure,
    ca: &CellularAutomaton,
    words: &[Word],
    n_steps: usize,
    samples: u64,
    seed: u64,
) -> Result<CesaroReport> {
    check_hypotheses(measure, ca)?;
    if samples < 1000 {
        return Err(Error::Invalid("at least 1000 samples required".into()));
    }
    if n_steps == 0 || words.is_empty() {
        return Err(Error::Invalid("need at least one step and one word".into()));
    }
    for w in words {
        if !ca.shift().is_allowed(w) {
            return Err(Error::NotAllowed { word: ca.shift().alphabet().format_word(w) });
        }
    }
    let maxlen = words.iter().map(Word::len).max().unwrap();
    let path_len = n_steps + maxlen;

    const BLOCK: u64 = 4096;
    let mut seeder = ChaCha12Rng::seed_from_u64(seed);
    let mut counts = vec![vec![0u64; n_steps]; words.len()];
    let mut remaining = samples;
    while remaining > 0 {
        let this_block = remaining.min(BLOCK);
        let block_seed: u64 = seeder.gen();
        let mut rng = ChaCha12Rng::seed_from_u64(block_seed);
        for _ in 0..this_block {
            let mut current = sample_ids(measure, path_len, &mut rng);
            for step in 0..n_steps {
                for (wi, w) in words.iter().enumerate() {
                    if current[..w.len()] == *w.ids() {
                        counts[wi][step] += 1;
                    }
                }
                if step + 1 < n_steps {
                    current = current
                        .windows(2)
                        .map(|p| ca.op(p[0], p[1]).expect("compatible rule stays in the shift"))
                        .collect();
                }
            }
        }
        remaining -= this_block;
    }

    let values: Vec<Vec<f64>> = counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / samples as f64).collect())
        .collect();
    let half_widths: Vec<Vec<f64>> = values
        .iter()
        .map(|row| {
            row.iter()
                .map(|&p| 3.0 * (p * (1.0 - p) / samples as f64).sqrt())
                .collect()
        })
        .collect();
    CesaroReport::finish(
        EngineMode::MonteCarlo,
        n_steps,
        ca.shift(),
        words,
        values,
        Some(half_widths),
        Some(samples),
        Some(seed),
        None,
    )
}

/// One seeded path of `length` symbols from the measure's kernel.
fn sample_ids(measure: &FiniteMemoryMeasure, length: usize, rng: &mut ChaCha12Rng) -> Vec<usize> {
    let d = measure.depth();
    let mut ids: Vec<usize> = Vec::with_capacity(length);
    if d > 0 {
        let mut draw = rng.gen::<f64>();
        let mut states: Vec<Vec<usize>> = measure.initial_states();
        let fallback = states.last().cloned().unwrap_or_default();
        let mut chosen = fallback;
        for s in states.drain(..) {
            let p = measure.initial_prob(&s).unwrap_or(0.0);
            if draw < p {
                chosen = s;
                break;
            }
            draw -= p;
        }
        ids.extend_from_slice(&chosen);
    }
    while ids.len() < length {
        let past: Vec<usize> =
            if d == 0 { Vec::new() } else { ids[ids.len() - d..].to_vec() };
        let row = measure.kernel_row(&past).expect("past is allowed");
        let mut draw = rng.gen::<f64>();
        let mut chosen = row.len() - 1;
        for (a, &p) in row.iter().enumerate() {
            if p > 0.0 {
                if draw < p {
                    chosen = a;
                    break;
                }
                draw -= p;
            }
        }
        ids.push(chosen);
    }
    ids
}

/// Runs the exact engine and, when it truncates before `n_steps`, fills the
/// remaining steps by Monte Carlo (mode [`EngineMode::Hybrid`]).
pub fn cesaro_hybrid(
    measure: &FiniteMemoryMeasure,
    ca: &CellularAutomaton,
    words: &[Word],
    n_steps: usize,
    cap: u64,
    samples: u64,
    seed: u64,
) -> Result<CesaroReport> {
    let exact = cesaro_exact(measure, ca, words, n_steps, cap)?;
    if exact.truncated_at.is_none() {
        return Ok(exact);
    }
    let done = exact.series[0].values.len();
    let mc = cesaro_monte_carlo(measure, ca, words, n_steps, samples, seed)?;
    let mut values = Vec::with_capacity(words.len());
    let mut half_widths = Vec::with_capacity(words.len());
    for (i, series) in exact.series.iter().enumerate() {
        let mut vals = series.values.clone();
        let mut hw = vec![0.0; done];
        vals.extend_from_slice(&mc.series[i].values[done..]);
        hw.extend_from_slice(&mc.series[i].half_widths.as_ref().unwrap()[done..]);
        values.push(vals);
        half_widths.push(hw);
    }
    CesaroReport::finish(
        EngineMode::Hybrid,
        n_steps,
        ca.shift(),
        words,
        values,
        Some(half_widths),
        Some(samples),
        Some(seed),
        exact.truncated_at,
    )
}

/// Verdict of a comparison against the Parry measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Final Cesàro deviation within tolerance.
    #[serde(rename = "CONVERGED")]
    Converged,
    /// Deviation above tolerance but non-increasing over the last half of
    /// the run.
    #[serde(rename = "TRENDING")]
    Trending,
    /// Neither converged nor trending.
    #[serde(rename = "NOT_CONVERGED")]
    NotConverged,
    /// The shift is reducible, so a unique maximal-entropy target need not
    /// exist.
    #[serde(rename = "NOT_APPLICABLE")]
    NotApplicable,
}

/// Outcome of [`compare_to_parry`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParryComparison {
    /// Three-valued verdict (plus NOT_APPLICABLE for reducible shifts).
    pub verdict: Verdict,
    /// Tolerance used.
    pub tol: f64,
    /// Deviation after the final step, when defined.
    pub final_deviation: Option<f64>,
    /// Running deviation per step.
    pub deviations: Vec<f64>,
}

/// Grades a report covering every allowed word of one fixed length against
/// the Parry measure. Desk-scale evidence only; no limit is claimed.
pub fn compare_to_parry(
    report: &CesaroReport,
    shift: &MarkovShift,
    tol: f64,
) -> Result<ParryComparison> {
    if !shift.is_irreducible() {
        return Ok(ParryComparison {
            verdict: Verdict::NotApplicable,
            tol,
            final_deviation: None,
            deviations: Vec::new(),
        });
    }
    let words: Vec<Word> = report
        .series
        .iter()
        .map(|s| shift.alphabet().parse_word(&s.word))
        .collect::<Result<_>>()?;
    let k = words[0].len();
    if words.iter().any(|w| w.len() != k) {
        return Err(Error::Invalid("all report words must share one length".into()));
    }
    let covered: std::collections::HashSet<&Word> = words.iter().collect();
    for w in shift.allowed_words_capped(k, DEFAULT_ENUM_CAP)? {
        if !covered.contains(&w) {
            return Err(Error::IncompleteCover { missing: shift.alphabet().format_word(&w) });
        }
    }
    let parry = FiniteMemoryMeasure::parry(shift)?;
    let targets: Vec<f64> =
        words.iter().map(|w| parry.cylinder_prob(w)).collect::<Result<_>>()?;

    let steps = report.series[0].cesaro.len();
    let deviations: Vec<f64> = (0..steps)
        .map(|i| {
            report
                .series
                .iter()
                .zip(&targets)
                .map(|(s, &t)| (s.cesaro[i] - t).abs())
                .fold(0.0f64, f64::max)
        })
        .collect();
    let last = *deviations.last().ok_or_else(|| Error::Invalid("empty report".into()))?;
    let verdict = if last <= tol {
        Verdict::Converged
    } else {
        let half = steps / 2;
        let tail = &deviations[half..];
        let monotone = tail.windows(2).all(|p| p[1] <= p[0] + 1e-15);
        if monotone {
            Verdict::Trending
        } else {
            Verdict::NotConverged
        }
    };
    Ok(ParryComparison { verdict, tol, final_deviation: Some(last), deviations })
}
