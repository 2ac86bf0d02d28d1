//! Stationary finite-memory measures compatible with a Markov shift.
//!
//! A [`FiniteMemoryMeasure`] is given by a depth-`d` conditional kernel
//! `μ_w(a)` over allowed `d`-words together with a stationary distribution
//! on `d`-words. Depth 0 is an i.i.d. (Bernoulli) measure, depth 1 a Markov
//! measure. The module builds the Parry (maximal-entropy) measure of an
//! irreducible shift, evaluates cylinder probabilities exactly, measures
//! the decay of the conditional kernel over pasts (`γ_m`), pushes measures
//! forward through block codes, checks invariance under an automaton, and
//! draws seeded sample paths.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::ca::{BlockCode, CellularAutomaton};
use crate::tmc::{MarkovShift, Word};
use crate::{Error, Result, DEFAULT_ENUM_CAP};

const PROB_TOL: f64 = 1e-12;
const STATIONARY_ITER_CAP: usize = 200_000;

/// A stationary measure with finite conditional memory.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMemoryMeasure {
    shift: MarkovShift,
    depth: usize,
    kernel: BTreeMap<Vec<usize>, Vec<f64>>,
    initial: BTreeMap<Vec<usize>, f64>,
    complete_connections: bool,
}

impl FiniteMemoryMeasure {
    /// Builds a measure and requires complete connections: every kernel row
    /// must be positive exactly on the follower set of its past.
    pub fn new(
        shift: MarkovShift,
        depth: usize,
        kernel: BTreeMap<Vec<usize>, Vec<f64>>,
        initial: BTreeMap<Vec<usize>, f64>,
    ) -> Result<Self> {
        let m = Self::build(shift, depth, kernel, initial)?;
        if !m.complete_connections {
            return Err(Error::Invalid(
                "kernel support must equal the follower sets (complete connections)".into(),
            ));
        }
        Ok(m)
    }

    /// Builds a measure whose kernel support may be a proper subset of the
    /// follower sets. The [`FiniteMemoryMeasure::complete_connections`] flag
    /// records whether the support is full.
    pub fn new_relaxed(
        shift: MarkovShift,
        depth: usize,
        kernel: BTreeMap<Vec<usize>, Vec<f64>>,
        initial: BTreeMap<Vec<usize>, f64>,
    ) -> Result<Self> {
        Self::build(shift, depth, kernel, initial)
    }

    /// Builds a measure from a kernel alone, computing the stationary
    /// distribution on `d`-words by power iteration on the lazy chain.
    pub fn with_stationary_initial(
        shift: MarkovShift,
        depth: usize,
        kernel: BTreeMap<Vec<usize>, Vec<f64>>,
    ) -> Result<Self> {
        let states: Vec<Vec<usize>> = if depth == 0 {
            vec![Vec::new()]
        } else {
            shift
                .allowed_words_capped(depth, DEFAULT_ENUM_CAP)?
                .into_iter()
                .map(|w| w.ids().to_vec())
                .collect()
        };
        let index: BTreeMap<&[usize], usize> =
            states.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
        let mut pi = vec![1.0 / states.len() as f64; states.len()];
        for _ in 0..STATIONARY_ITER_CAP {
            let mut next = vec![0.0; states.len()];
            for (i, state) in states.iter().enumerate() {
                let row = kernel
                    .get(state)
                    .ok_or_else(|| Error::Invalid("kernel misses an allowed past".into()))?;
                for (a, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        let succ: Vec<usize> = if depth == 0 {
                            Vec::new()
                        } else {
                            let mut s = state[1..].to_vec();
                            s.push(a);
                            s
                        };
                        let j = *index
                            .get(succ.as_slice())
                            .ok_or_else(|| Error::Invalid("kernel walks off the shift".into()))?;
                        next[j] += pi[i] * p;
                    }
                }
            }
            // Lazy step keeps the iteration aperiodic.
            let mut delta: f64 = 0.0;
            for i in 0..pi.len() {
                let lazy = 0.5 * (next[i] + pi[i]);
                delta = delta.max((lazy - pi[i]).abs());
                pi[i] = lazy;
            }
            if delta <= 1e-16 {
                break;
            }
        }
        let total: f64 = pi.iter().sum();
        let initial = states
            .iter()
            .zip(pi.iter())
            .map(|(s, &p)| (s.clone(), p / total))
            .collect();
        Self::build(shift, depth, kernel, initial)
    }

    fn build(
        shift: MarkovShift,
        depth: usize,
        kernel: BTreeMap<Vec<usize>, Vec<f64>>,
        initial: BTreeMap<Vec<usize>, f64>,
    ) -> Result<Self> {
        let n = shift.alphabet().len();
        let states: Vec<Vec<usize>> = if depth == 0 {
            vec![Vec::new()]
        } else {
            shift
                .allowed_words_capped(depth, DEFAULT_ENUM_CAP)?
                .into_iter()
                .map(|w| w.ids().to_vec())
                .collect()
        };
        if kernel.len() != states.len() {
            return Err(Error::Invalid(format!(
                "kernel must cover exactly the {} allowed pasts of depth {depth}",
                states.len()
            )));
        }

        let mut complete = true;
        for state in &states {
            let row = kernel
                .get(state)
                .ok_or_else(|| Error::Invalid("kernel misses an allowed past".into()))?;
            if row.len() != n {
                return Err(Error::Invalid("kernel rows must cover the alphabet".into()));
            }
            if row.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(Error::Invalid("kernel entries must be finite and >= 0".into()));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::Invalid(format!("kernel row sums to {sum}, expected 1")));
            }
            // Support versus follower structure. With no past recorded
            // (depth 0) the row applies after every symbol, so the support
            // must fit inside every follower set.
            for (a, &p) in row.iter().enumerate() {
                let inside = if depth == 0 {
                    (0..n).all(|x| shift.is_edge(x, a))
                } else {
                    shift.is_edge(*state.last().unwrap(), a)
                };
                if p > 0.0 && !inside {
                    return Err(Error::Invalid(
                        "kernel puts positive mass outside the follower set".into(),
                    ));
                }
                if p == 0.0 && inside {
                    complete = false;
                }
            }
        }

        if initial.len() != states.len() {
            return Err(Error::Invalid("initial distribution must cover the allowed pasts".into()));
        }
        let mut total = 0.0;
        for state in &states {
            let p = *initial
                .get(state)
                .ok_or_else(|| Error::Invalid("initial distribution misses a past".into()))?;
            if !(0.0..=1.0 + PROB_TOL).contains(&p) {
                return Err(Error::Invalid("initial probabilities must lie in [0, 1]".into()));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::Invalid(format!("initial distribution sums to {total}")));
        }

        // Stationarity of the initial distribution under the kernel.
        if depth > 0 {
            let mut next: BTreeMap<&[usize], f64> =
                states.iter().map(|s| (s.as_slice(), 0.0)).collect();
            for state in &states {
                let row = &kernel[state];
                let mass = initial[state];
                for (a, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        let mut succ = state[1..].to_vec();
                        succ.push(a);
                        *next
                            .get_mut(succ.as_slice())
                            .ok_or_else(|| Error::Invalid("kernel walks off the shift".into()))? +=
                            mass * p;
                    }
                }
            }
            let deviation = states
                .iter()
                .map(|s| (next[s.as_slice()] - initial[s]).abs())
                .fold(0.0, f64::max);
            if deviation > PROB_TOL {
                return Err(Error::NotStationary { deviation });
            }
        }

        Ok(FiniteMemoryMeasure { shift, depth, kernel, initial, complete_connections: complete })
    }

    /// An i.i.d. measure from symbol probabilities. Depth 0; the shift must
    /// allow the support after every symbol (on a full shift, any positive
    /// vector gives complete connections).
    pub fn bernoulli(shift: MarkovShift, probs: &[f64]) -> Result<Self> {
        if probs.len() != shift.alphabet().len() {
            return Err(Error::Invalid("one probability per symbol required".into()));
        }
        let kernel = BTreeMap::from([(Vec::new(), probs.to_vec())]);
        let initial = BTreeMap::from([(Vec::new(), 1.0)]);
        Self::new_relaxed(shift, 0, kernel, initial)
    }

    /// The Parry (maximal-entropy) Markov measure of an irreducible shift:
    /// `p(a → b) = A_ab v_b / (λ v_a)` with `π_a ∝ u_a v_a` from the Perron
    /// data of the adjacency matrix.
    pub fn parry(shift: &MarkovShift) -> Result<Self> {
        let (lambda, right, left) = shift.perron_data()?;
        let n = shift.alphabet().len();
        let mut kernel = BTreeMap::new();
        for a in 0..n {
            let mut row: Vec<f64> = (0..n)
                .map(|b| if shift.is_edge(a, b) { right[b] / (lambda * right[a]) } else { 0.0 })
                .collect();
            let sum: f64 = row.iter().sum();
            for p in row.iter_mut() {
                *p /= sum;
            }
            kernel.insert(vec![a], row);
        }
        // Stationary distribution: start from u ⊙ v and polish under the
        // kernel so the constructor's stationarity check is met exactly.
        let mut pi: Vec<f64> = (0..n).map(|a| left[a] * right[a]).collect();
        let total: f64 = pi.iter().sum();
        for p in pi.iter_mut() {
            *p /= total;
        }
        for _ in 0..10_000 {
            let mut next = vec![0.0; n];
            for a in 0..n {
                let row = &kernel[&vec![a]];
                for b in 0..n {
                    next[b] += pi[a] * row[b];
                }
            }
            let delta = pi.iter().zip(&next).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            pi = next;
            if delta <= 1e-17 {
                break;
            }
        }
        let total: f64 = pi.iter().sum();
        let initial = (0..n).map(|a| (vec![a], pi[a] / total)).collect();
        Self::new(shift.clone(), 1, kernel, initial)
    }

    /// The measure's shift.
    pub fn shift(&self) -> &MarkovShift {
        &self.shift
    }

    /// Conditional memory depth.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Whether the kernel support equals the follower sets everywhere.
    pub fn complete_connections(&self) -> bool {
        self.complete_connections
    }

    /// Kernel row for an allowed past.
    pub fn kernel_row(&self, past: &[usize]) -> Option<&Vec<f64>> {
        self.kernel.get(past)
    }

    /// Initial probability of an allowed `depth`-word.
    pub fn initial_prob(&self, state: &[usize]) -> Option<f64> {
        self.initial.get(state).copied()
    }

    /// Allowed `depth`-words in lexicographic order.
    pub fn initial_states(&self) -> Vec<Vec<usize>> {
        self.initial.keys().cloned().collect()
    }

    /// Exact probability of the cylinder `[word]`.
    pub fn cylinder_prob(&self, word: &Word) -> Result<f64> {
        if !self.shift.is_allowed(word) {
            return Err(Error::NotAllowed { word: self.shift.alphabet().format_word(word) });
        }
        let ids = word.ids();
        if ids.len() < self.depth {
            // Marginal of the initial distribution over a shorter prefix.
            let p = self
                .initial
                .iter()
                .filter(|(state, _)| state[..ids.len()] == *ids)
                .map(|(_, &p)| p)
                .sum();
            return Ok(p);
        }
        let mut p = self.initial[&ids[..self.depth].to_vec()];
        for i in self.depth..ids.len() {
            p *= self.kernel[&ids[i - self.depth..i].to_vec()][ids[i]];
        }
        Ok(p)
    }

    /// Entropy rate in nats: the initial-weighted entropy of the kernel
    /// rows.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for (state, row) in &self.kernel {
            let w = self.initial[state];
            if w == 0.0 {
                continue;
            }
            let row_h: f64 =
                row.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
            h += w * row_h;
        }
        h
    }

    /// Worst-case relative oscillation `γ_m` of the kernel over pairs of
    /// pasts agreeing on their last `m` symbols, for `m = 1 … m_max`.
    /// Identically zero from the depth on.
    pub fn gamma_sequence(&self, m_max: usize) -> GammaSequence {
        let mut values = Vec::with_capacity(m_max);
        let pasts: Vec<&Vec<usize>> = {
            let mut v: Vec<&Vec<usize>> = self.kernel.keys().collect();
            v.sort();
            v
        };
        for m in 1..=m_max {
            if m >= self.depth {
                values.push(0.0);
                continue;
            }
            let mut worst: f64 = 0.0;
            for v in &pasts {
                for w in &pasts {
                    if v[self.depth - m..] != w[self.depth - m..] {
                        continue;
                    }
                    let rv = &self.kernel[*v];
                    let rw = &self.kernel[*w];
                    for a in 0..rv.len() {
                        if rv[a] > 0.0 && rw[a] > 0.0 {
                            worst = worst.max((rv[a] / rw[a] - 1.0).abs());
                        }
                    }
                }
            }
            values.push(worst);
        }
        GammaSequence { values }
    }

    /// Exact probability of `code⁻¹[word]`: the sum of cylinder
    /// probabilities over the preimage cylinders. For an invertible 1-block
    /// code with a memory-1 anticipation-0 inverse whose rule is constant on
    /// predecessor sets, the preimage of a cylinder of length ≥ 2 is a
    /// single shorter cylinder and is evaluated directly.
    pub fn pushforward_cylinder(&self, code: &BlockCode, word: &Word, cap: u64) -> Result<f64> {
        if code.source() != &self.shift {
            return Err(Error::HypothesisFailed(
                "code source must be the measure's shift".into(),
            ));
        }
        if let (Some(inv), true) =
            (code.memory_one_inverse(), code.constant_on_predecessor_sets())
        {
            let ids = word.ids();
            if !code.target().is_allowed(word) {
                return Err(Error::NotAllowed {
                    word: code.target().alphabet().format_word(word),
                });
            }
            if ids.len() >= 2 {
                let decoded: Vec<usize> =
                    ids.windows(2).map(|p| inv[&(p[0], p[1])]).collect();
                return self.cylinder_prob(&Word::new(decoded));
            }
            // A single-symbol cylinder pulls back to the union over the
            // fiber of its symbol.
            let theta = code.one_block_map().expect("memory-1 invertible codes are 1-block");
            let mut p = 0.0;
            for (x, &y) in theta.iter().enumerate() {
                if y == ids[0] {
                    p += self.cylinder_prob(&Word::new(vec![x]))?;
                }
            }
            return Ok(p);
        }
        let mut p = 0.0;
        for pre in code.preimage_cylinder(word, cap)? {
            p += self.cylinder_prob(&pre)?;
        }
        Ok(p)
    }

    /// Pushes the measure through an invertible 1-block code with a
    /// memory-1 anticipation-0 inverse that is constant on predecessor
    /// sets. The image is a finite-memory measure of depth `depth + 1` on
    /// the code's target chain, with conditionals copied along the decoding
    /// and the decay sequence shifted by one index.
    pub fn pushforward(&self, code: &BlockCode) -> Result<FiniteMemoryMeasure> {
        if code.source() != &self.shift {
            return Err(Error::HypothesisFailed(
                "code source must be the measure's shift".into(),
            ));
        }
        let inv = code.memory_one_inverse().ok_or_else(|| {
            Error::HypothesisFailed(
                "code must be an invertible 1-block code with a memory-1 inverse".into(),
            )
        })?;
        if !code.constant_on_predecessor_sets() {
            return Err(Error::HypothesisFailed(
                "code rule must be constant on predecessor sets".into(),
            ));
        }
        let target = code.target().clone();
        let d = self.depth + 1;
        let n = target.alphabet().len();
        let mut kernel = BTreeMap::new();
        let mut initial = BTreeMap::new();
        for word in target.allowed_words_capped(d, DEFAULT_ENUM_CAP)? {
            let ids = word.ids();
            // Decode the past: source symbols at offsets 1..d.
            let decoded: Vec<usize> = ids.windows(2).map(|p| inv[&(p[0], p[1])]).collect();
            let mut row = vec![0.0; n];
            let source_row = &self.kernel[&decoded];
            for (aprime, slot) in row.iter_mut().enumerate() {
                if !target.is_edge(ids[d - 1], aprime) {
                    continue;
                }
                let a = inv[&(ids[d - 1], aprime)];
                *slot = source_row[a];
            }
            let mass = if self.depth == 0 {
                // Single symbol: the preimage is the union over the fiber.
                let theta =
                    code.one_block_map().expect("memory-1 invertible codes are 1-block");
                theta
                    .iter()
                    .enumerate()
                    .filter(|&(_, &y)| y == ids[0])
                    .map(|(x, _)| self.cylinder_prob(&Word::new(vec![x])))
                    .sum::<Result<f64>>()?
            } else {
                self.cylinder_prob(&Word::new(decoded.clone()))?
            };
            kernel.insert(ids.to_vec(), row);
            initial.insert(ids.to_vec(), mass);
        }
        Self::build(target, d, kernel, initial)
    }

    /// Largest deviation `|μ(Φ⁻¹[w]) − μ([w])|` over allowed words of
    /// length at most `depth`.
    pub fn check_invariance(
        &self,
        ca: &CellularAutomaton,
        depth: usize,
        tol: f64,
        cap: u64,
    ) -> Result<InvarianceReport> {
        let code = ca.code()?;
        let mut max_deviation: f64 = 0.0;
        let mut witness = None;
        for k in 1..=depth {
            for w in self.shift.allowed_words_capped(k, cap)? {
                let direct = self.cylinder_prob(&w)?;
                let pulled = self.pushforward_cylinder(&code, &w, cap)?;
                let dev = (pulled - direct).abs();
                if dev > max_deviation {
                    max_deviation = dev;
                    witness = Some(self.shift.alphabet().format_word(&w));
                }
            }
        }
        Ok(InvarianceReport { invariant: max_deviation <= tol, max_deviation, tol, witness })
    }

    /// Deterministic sample path of the given length (at least the depth
    /// and at least 1). Paths with the same seed are identical.
    pub fn sample_path(&self, length: usize, seed: u64) -> Result<Word> {
        if length < self.depth.max(1) {
            return Err(Error::Invalid(format!(
                "path length must be at least {}",
                self.depth.max(1)
            )));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut ids: Vec<usize> = Vec::with_capacity(length);
        if self.depth > 0 {
            let mut states: Vec<&Vec<usize>> = self.initial.keys().collect();
            states.sort();
            let mut draw = rng.gen::<f64>();
            let mut chosen = states[states.len() - 1];
            for s in states {
                let p = self.initial[s];
                if draw < p {
                    chosen = s;
                    break;
                }
                draw -= p;
            }
            ids.extend_from_slice(chosen);
        }
        while ids.len() < length {
            let state: Vec<usize> = if self.depth == 0 {
                Vec::new()
            } else {
                ids[ids.len() - self.depth..].to_vec()
            };
            let row = &self.kernel[&state];
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
        Ok(Word::new(ids))
    }
}

/// The decay sequence `γ_1 … γ_m` of a finite-memory measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSequence {
    /// `values[m-1] = γ_m`.
    pub values: Vec<f64>,
}

impl GammaSequence {
    /// Sum of the sequence (finite by construction).
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Outcome of an invariance check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// True when the largest deviation is within tolerance.
    pub invariant: bool,
    /// Largest observed deviation.
    pub max_deviation: f64,
    /// Tolerance used.
    pub tol: f64,
    /// Word achieving the largest deviation.
    pub witness: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::tmc::Alphabet;

    fn full2() -> MarkovShift {
        MarkovShift::full(Alphabet::new(["0", "1"]).unwrap())
    }

    fn bern03() -> FiniteMemoryMeasure {
        FiniteMemoryMeasure::bernoulli(full2(), &[0.7, 0.3]).unwrap()
    }

    fn xor_ca() -> CellularAutomaton {
        let t = fixtures::z_add(2);
        CellularAutomaton::new(fixtures::full_shift_of(&t), t).unwrap()
    }

    #[test]
    fn parry_of_full_shift_is_uniform() {
        let m = FiniteMemoryMeasure::parry(&full2()).unwrap();
        for a in 0..2 {
            assert!((m.initial_prob(&[a]).unwrap() - 0.5).abs() < 1e-12);
            for b in 0..2 {
                assert!((m.kernel_row(&[a]).unwrap()[b] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parry_of_golden_mean_matches_golden_ratio() {
        let shift = fixtures::golden_mean();
        let m = FiniteMemoryMeasure::parry(&shift).unwrap();
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let k0 = m.kernel_row(&[0]).unwrap();
        let k1 = m.kernel_row(&[1]).unwrap();
        assert!((k0[0] - 1.0 / phi).abs() < 1e-12);
        assert!((k0[1] - 1.0 / (phi * phi)).abs() < 1e-12);
        assert!((k1[0] - 1.0).abs() < 1e-12);
        assert!((m.initial_prob(&[0]).unwrap() - 0.7236067977499789).abs() < 1e-9);
        // Maximal entropy: the measure entropy equals the shift entropy.
        assert!((m.entropy() - shift.entropy()).abs() < 1e-9);
    }

    #[test]
    fn parry_of_single_loop_is_a_point_mass() {
        let a = Alphabet::new(["e"]).unwrap();
        let shift = MarkovShift::new(a, &[("e", "e")]).unwrap();
        let m = FiniteMemoryMeasure::parry(&shift).unwrap();
        assert!((m.initial_prob(&[0]).unwrap() - 1.0).abs() < 1e-12);
        assert!(m.entropy().abs() < 1e-12);
    }

    #[test]
    fn parry_requires_irreducibility() {
        let a = Alphabet::new(["0", "1"]).unwrap();
        let shift = MarkovShift::new(a, &[("0", "0"), ("1", "1")]).unwrap();
        assert!(matches!(FiniteMemoryMeasure::parry(&shift), Err(Error::NotIrreducible)));
    }

    #[test]
    fn cylinder_probabilities() {
        let uniform = FiniteMemoryMeasure::parry(&full2()).unwrap();
        let w = Word::new(vec![1, 0, 1]);
        assert!((uniform.cylinder_prob(&w).unwrap() - 0.125).abs() < 1e-12);

        let golden = FiniteMemoryMeasure::parry(&fixtures::golden_mean()).unwrap();
        assert!(matches!(
            golden.cylinder_prob(&Word::new(vec![1, 1])),
            Err(Error::NotAllowed { .. })
        ));

        assert!((bern03().cylinder_prob(&Word::new(vec![1])).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn kolmogorov_consistency_on_small_cylinders() {
        let golden = FiniteMemoryMeasure::parry(&fixtures::golden_mean()).unwrap();
        let measures = [golden, bern03()];
        for m in &measures {
            let shift = m.shift().clone();
            // Total mass at each length.
            for k in 1..=6 {
                let total: f64 = shift
                    .allowed_words(k)
                    .unwrap()
                    .iter()
                    .map(|w| m.cylinder_prob(w).unwrap())
                    .sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
            for k in 1..=5 {
                for w in shift.allowed_words(k).unwrap() {
                    let p = m.cylinder_prob(&w).unwrap();
                    let mut extended = 0.0;
                    for &b in shift.followers(w.last()) {
                        let mut ids = w.ids().to_vec();
                        ids.push(b);
                        extended += m.cylinder_prob(&Word::new(ids)).unwrap();
                    }
                    assert!((p - extended).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gamma_vanishes_for_markov_measures() {
        let m = FiniteMemoryMeasure::parry(&fixtures::golden_mean()).unwrap();
        assert_eq!(m.gamma_sequence(5).values, vec![0.0; 5]);
    }

    fn depth2_measure() -> FiniteMemoryMeasure {
        // Depth-2 kernel on the full 2-shift whose rows genuinely depend on
        // the older symbol.
        let shift = full2();
        let mut kernel = BTreeMap::new();
        kernel.insert(vec![0, 0], vec![0.5, 0.5]);
        kernel.insert(vec![0, 1], vec![0.4, 0.6]);
        kernel.insert(vec![1, 0], vec![0.7, 0.3]);
        kernel.insert(vec![1, 1], vec![0.2, 0.8]);
        FiniteMemoryMeasure::with_stationary_initial(shift, 2, kernel).unwrap()
    }

    #[test]
    fn gamma_of_depth_two_measure() {
        let m = depth2_measure();
        let g = m.gamma_sequence(4);
        assert!(g.values[0] > 0.0);
        assert_eq!(&g.values[1..], &[0.0, 0.0, 0.0]);
        // Exact supremum over pasts agreeing on the last symbol.
        let expected = (0.7f64 / 0.5 - 1.0)
            .max(0.5 / 0.7 - 1.0)
            .max((0.5f64 / 0.3 - 1.0).abs())
            .max((0.4f64 / 0.2 - 1.0).abs())
            .max((0.6f64 / 0.8 - 1.0).abs());
        assert!((g.values[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn pushforward_cylinder_matches_closed_forms() {
        let code = xor_ca().code().unwrap();
        let m = bern03();
        let p = m.pushforward_cylinder(&code, &Word::new(vec![1]), 1000).unwrap();
        assert!((p - 2.0 * 0.3 * 0.7).abs() < 1e-12);

        let uniform = FiniteMemoryMeasure::parry(&full2()).unwrap();
        for k in 1..=5 {
            for w in full2().allowed_words(k).unwrap() {
                let p = uniform.pushforward_cylinder(&code, &w, 100_000).unwrap();
                assert!((p - 0.5f64.powi(k as i32)).abs() < 1e-12);
            }
        }

        let identity = BlockCode::identity(&full2());
        let w = Word::new(vec![1, 0]);
        assert!(
            (m.pushforward_cylinder(&identity, &w, 1000).unwrap()
                - m.cylinder_prob(&w).unwrap())
            .abs()
                < 1e-15
        );
    }

    #[test]
    fn pushforward_conserves_mass() {
        let t8 = fixtures::table_8();
        let codes = vec![
            xor_ca().code().unwrap(),
            CellularAutomaton::new(fixtures::full_shift_of(&t8), t8.clone())
                .unwrap()
                .code()
                .unwrap(),
        ];
        let uniform8 = FiniteMemoryMeasure::parry(&fixtures::full_shift_of(&t8)).unwrap();
        let measures = [bern03(), uniform8];
        for code in &codes {
            for m in &measures {
                if m.shift() != code.source() {
                    continue;
                }
                for k in 1..=3 {
                    let total: f64 = code
                        .target()
                        .allowed_words(k)
                        .unwrap()
                        .iter()
                        .map(|w| m.pushforward_cylinder(code, w, 100_000).unwrap())
                        .sum();
                    assert!((total - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn invariance_examples() {
        let uniform = FiniteMemoryMeasure::parry(&full2()).unwrap();
        let r = uniform.check_invariance(&xor_ca(), 6, 1e-12, 1_000_000).unwrap();
        assert!(r.invariant, "uniform is preserved, deviation {}", r.max_deviation);

        let r = bern03().check_invariance(&xor_ca(), 2, 1e-12, 1000).unwrap();
        assert!(!r.invariant);
        // |2·0.3·0.7 − 0.3| = 0.12 on [1]; the deviation on [0] ties it.
        assert!((r.max_deviation - 0.12).abs() < 1e-12);
        assert!(matches!(r.witness.as_deref(), Some("0") | Some("1")));

        // The Parry measure is invariant under the shift map itself.
        let golden = fixtures::golden_mean();
        let sigma = CellularAutomaton::new(
            golden.clone(),
            fixtures::shift_rule(golden.alphabet().clone()),
        )
        .unwrap();
        let parry = FiniteMemoryMeasure::parry(&golden).unwrap();
        let r = parry.check_invariance(&sigma, 5, 1e-12, 100_000).unwrap();
        assert!(r.invariant, "stationarity, deviation {}", r.max_deviation);
    }

    #[test]
    fn sampling_is_deterministic_and_respects_support() {
        let golden = fixtures::golden_mean();
        let parry = FiniteMemoryMeasure::parry(&golden).unwrap();
        let w1 = parry.sample_path(10, 42).unwrap();
        let w2 = parry.sample_path(10, 42).unwrap();
        assert_eq!(w1, w2);
        let long = parry.sample_path(10_000, 7).unwrap();
        assert!(golden.is_allowed(&long), "no forbidden word 11 may appear");
    }

    #[test]
    fn sampled_frequencies_match_initial_distribution() {
        let golden = fixtures::golden_mean();
        let parry = FiniteMemoryMeasure::parry(&golden).unwrap();
        let samples = 100_000;
        let mut zeros = 0u64;
        for seed in 0..samples {
            if parry.sample_path(1, seed).unwrap().ids()[0] == 0 {
                zeros += 1;
            }
        }
        let freq = zeros as f64 / samples as f64;
        let pi0 = parry.initial_prob(&[0]).unwrap();
        let se = (pi0 * (1.0 - pi0) / samples as f64).sqrt();
        assert!(
            (freq - pi0).abs() <= 4.0 * se,
            "frequency {freq} too far from {pi0}"
        );
    }

    #[test]
    fn parry_maximizes_entropy_among_markov_kernels() {
        use rand::{Rng, SeedableRng};
        let shift = fixtures::golden_mean();
        let parry = FiniteMemoryMeasure::parry(&shift).unwrap();
        let base = parry.entropy();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut tried = 0;
        while tried < 100 {
            // Random positive kernel supported on the follower sets.
            let mut kernel = BTreeMap::new();
            for a in 0..2 {
                let mut row = vec![0.0; 2];
                let followers = shift.followers(a);
                let mut total = 0.0;
                for &b in followers {
                    row[b] = rng.gen_range(0.05..1.0);
                    total += row[b];
                }
                for p in row.iter_mut() {
                    *p /= total;
                }
                kernel.insert(vec![a], row);
            }
            let Ok(m) = FiniteMemoryMeasure::with_stationary_initial(shift.clone(), 1, kernel)
            else {
                continue;
            };
            tried += 1;
            assert!(m.entropy() <= base + 1e-9);
        }
    }

    #[test]
    fn point_mass_lacks_complete_connections() {
        let shift = full2();
        let mut kernel = BTreeMap::new();
        kernel.insert(vec![0], vec![1.0, 0.0]);
        kernel.insert(vec![1], vec![1.0, 0.0]);
        let initial = BTreeMap::from([(vec![0], 1.0), (vec![1], 0.0)]);
        let strict = FiniteMemoryMeasure::new(
            shift.clone(),
            1,
            kernel.clone(),
            initial.clone(),
        );
        assert!(strict.is_err());
        let m = FiniteMemoryMeasure::new_relaxed(shift, 1, kernel, initial).unwrap();
        assert!(!m.complete_connections());
        assert!((m.cylinder_prob(&Word::new(vec![0, 0, 0])).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_stationary_initial_is_rejected() {
        let shift = full2();
        let mut kernel = BTreeMap::new();
        kernel.insert(vec![0], vec![0.5, 0.5]);
        kernel.insert(vec![1], vec![0.5, 0.5]);
        let initial = BTreeMap::from([(vec![0], 0.9), (vec![1], 0.1)]);
        let err = FiniteMemoryMeasure::new(shift, 1, kernel, initial).unwrap_err();
        assert!(matches!(err, Error::NotStationary { .. }));
    }

    /// Six-symbol chain with a collapsing 1-block code that is invertible
    /// with a memory-1 anticipation-0 inverse and constant on predecessor
    /// sets. The kernel genuinely depends on the older past, so the decay
    /// sequence is nontrivial.
    fn lemma_fixture() -> (FiniteMemoryMeasure, BlockCode) {
        let source = {
            let a = Alphabet::new(["s0", "s1", "s2", "s3", "s4", "s5"]).unwrap();
            MarkovShift::new(
                a,
                &[
                    ("s0", "s2"),
                    ("s4", "s2"),
                    ("s2", "s0"),
                    ("s2", "s1"),
                    ("s1", "s3"),
                    ("s5", "s3"),
                    ("s3", "s4"),
                    ("s3", "s5"),
                ],
            )
            .unwrap()
        };
        let target = {
            let a = Alphabet::new(["A", "B", "T", "U"]).unwrap();
            MarkovShift::new(
                a,
                &[("A", "T"), ("T", "A"), ("T", "B"), ("B", "U"), ("U", "A"), ("U", "B")],
            )
            .unwrap()
        };
        // θ: s0,s4 ↦ A; s1,s5 ↦ B; s2 ↦ T; s3 ↦ U.
        let code = BlockCode::one_block(source.clone(), target, &[0, 1, 2, 3, 0, 1]).unwrap();

        let mut kernel = BTreeMap::new();
        let rows: Vec<(Vec<usize>, Vec<(usize, f64)>)> = vec![
            (vec![0, 2], vec![(0, 0.3), (1, 0.7)]),
            (vec![4, 2], vec![(0, 0.55), (1, 0.45)]),
            (vec![2, 0], vec![(2, 1.0)]),
            (vec![2, 1], vec![(3, 1.0)]),
            (vec![1, 3], vec![(4, 0.5), (5, 0.5)]),
            (vec![5, 3], vec![(4, 0.2), (5, 0.8)]),
            (vec![3, 4], vec![(2, 1.0)]),
            (vec![3, 5], vec![(3, 1.0)]),
        ];
        for (past, entries) in rows {
            let mut row = vec![0.0; 6];
            for (a, p) in entries {
                row[a] = p;
            }
            kernel.insert(past, row);
        }
        let m = FiniteMemoryMeasure::with_stationary_initial(source, 2, kernel).unwrap();
        (m, code)
    }

    #[test]
    fn pushforward_shifts_the_decay_sequence() {
        let (m, code) = lemma_fixture();
        assert!(m.complete_connections());
        assert!(code.memory_one_inverse().is_some());
        assert!(code.constant_on_predecessor_sets());

        let image = m.pushforward(&code).unwrap();
        assert!(image.complete_connections());
        assert_eq!(image.depth(), 3);

        let g = m.gamma_sequence(6);
        let g_image = image.gamma_sequence(6);
        assert!(g.values[0] > 0.0);
        // Index shift: γ'_m = γ_{m-1} for m ≥ 2, exactly.
        for m_idx in 2..=6 {
            assert_eq!(g_image.values[m_idx - 1], g.values[m_idx - 2], "m = {m_idx}");
        }

        // The pushforward agrees with brute-force preimage sums on
        // cylinders.
        for k in 1..=4 {
            for w in code.target().allowed_words(k).unwrap() {
                let fast = image.cylinder_prob(&w).unwrap();
                let slow: f64 = code
                    .preimage_cylinder(&w, 100_000)
                    .unwrap()
                    .iter()
                    .map(|v| m.cylinder_prob(v).unwrap())
                    .sum();
                assert!((fast - slow).abs() < 1e-12, "word {w:?}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn relabeling_keeps_gamma_fixed_from_depth_on() {
        // A bijective 1-block code qualifies only when predecessor sets are
        // singletons; then both sequences vanish identically.
        let a = Alphabet::new(["0", "1", "2"]).unwrap();
        let cycle = MarkovShift::new(a, &[("0", "1"), ("1", "2"), ("2", "0")]).unwrap();
        let m = FiniteMemoryMeasure::parry(&cycle).unwrap();
        let b = Alphabet::new(["x", "y", "z"]).unwrap();
        let target = MarkovShift::new(b, &[("x", "y"), ("y", "z"), ("z", "x")]).unwrap();
        let code = BlockCode::one_block(cycle.clone(), target, &[0, 1, 2]).unwrap();
        assert!(code.constant_on_predecessor_sets());
        let image = m.pushforward(&code).unwrap();
        assert_eq!(m.gamma_sequence(4).values, vec![0.0; 4]);
        assert_eq!(image.gamma_sequence(4).values, vec![0.0; 4]);
    }
}
