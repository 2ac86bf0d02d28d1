//! Factorization of structurally compatible right-permutative automata into
//! a (group or affine) automaton times a translation.
//!
//! The 1-block split code sends each symbol to the pair (row-equality
//! class, right local identity). On the hypotheses — structural
//! compatibility plus right-permutativity, with either an associativity
//! permutation or an N-scaling full-shift extension — the split code is a
//! bijective isomorphism onto the product operation
//! `(k₁,e₁)•(k₂,e₂) = (k₁ ∘ k₂, s_B(e₂))`, and the image chain splits as a
//! product of its two projections. Everything is re-verified at the symbol
//! and word level; failures surface as typed errors rather than wrong
//! certificates.

use std::collections::{HashMap, HashSet};

use crate::algebra::{lcm, CayleyTable, Permutation, PsiOutcome, RightStructure};
use crate::ca::{BlockCode, CellularAutomaton};
use crate::tmc::{Alphabet, MarkovShift, Word};
use crate::{Error, Result, DEFAULT_ENUM_CAP};

pub use crate::algebra::StructureMode;

/// Separator between the class token and the identity token in product
/// symbols.
const PRODUCT_SEPARATOR: char = '|';

/// The symbol-level split code `u(a) = (ã, e_a)` of a right-cancellable
/// table, verified bijective and an isomorphism onto the induced product
/// operation.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitCode {
    /// Quotient and right-identity structure behind the code.
    pub structure: RightStructure,
    /// Alphabet of product symbols `"k|b"`, ordered class-major.
    pub product_alphabet: Alphabet,
    /// Table symbol → product symbol.
    pub image: Vec<usize>,
    /// The induced operation on the product alphabet.
    pub product_table: CayleyTable,
}

/// Computes the split code of a table in the given mode.
///
/// Errors with [`Error::NotBijective`] when two symbols collide and
/// [`Error::StructureViolation`] when the isomorphism identity
/// `u(a•c) = u(a)•u(c)` fails somewhere.
pub fn split_code(table: &CayleyTable, mode: StructureMode) -> Result<SplitCode> {
    let structure = table.right_structure(mode)?;
    let k = structure.classes.len();
    let b = structure.identity_set.len();
    let n = table.n();

    let b_index: HashMap<usize, usize> =
        structure.identity_set.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let product_symbol =
        |ki: usize, bi: usize| -> usize { ki * b + bi };
    let tokens: Vec<String> = (0..k)
        .flat_map(|ki| {
            let class_token = table.alphabet().symbol(structure.classes[ki][0]).to_string();
            let ids = &structure.identity_set;
            let alph = table.alphabet();
            ids.iter()
                .map(move |&e| {
                    format!("{class_token}{PRODUCT_SEPARATOR}{}", alph.symbol(e))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let product_alphabet = Alphabet::new(tokens)?;

    let image: Vec<usize> = (0..n)
        .map(|a| product_symbol(structure.class_of[a], b_index[&structure.e_map[a]]))
        .collect();
    if k * b != n {
        return Err(Error::NotBijective {
            first: format!("{k} classes"),
            second: format!("{b} identities for {n} symbols"),
        });
    }
    let mut seen: Vec<Option<usize>> = vec![None; k * b];
    for (a, &img) in image.iter().enumerate() {
        if let Some(a0) = seen[img] {
            return Err(Error::NotBijective {
                first: table.alphabet().symbol(a0).to_string(),
                second: table.alphabet().symbol(a).to_string(),
            });
        }
        seen[img] = Some(a);
    }

    // Induced product operation: (k1,e1)•(k2,e2) = (k1∘k2, s_B(e2)).
    let rows: Vec<Vec<usize>> = (0..k * b)
        .map(|x| {
            let (k1, _) = (x / b, x % b);
            (0..k * b)
                .map(|y| {
                    let (k2, e2) = (y / b, y % b);
                    let k_out = structure.class_table.op(k1, k2);
                    let e_out = b_index[&structure.s_b_of(structure.identity_set[e2])];
                    product_symbol(k_out, e_out)
                })
                .collect()
        })
        .collect();
    let product_table = CayleyTable::new(product_alphabet.clone(), rows)?;

    // Isomorphism identity u(a•c) = u(a)•u(c), exhaustively.
    for a in 0..n {
        for c in 0..n {
            if image[table.op(a, c)] != product_table.op(image[a], image[c]) {
                return Err(Error::StructureViolation {
                    reason: format!(
                        "split code is not an isomorphism at ({}, {})",
                        table.alphabet().symbol(a),
                        table.alphabet().symbol(c)
                    ),
                });
            }
        }
    }

    Ok(SplitCode { structure, product_alphabet, image, product_table })
}

/// Finite-depth conjugacy verification record.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyCheck {
    /// Whether both compositions agree on every allowed word up to `depth`
    /// and the code is injective there.
    pub verified: bool,
    /// Depth of the verification.
    pub depth: usize,
    /// First word where the compositions disagree.
    pub failure_witness: Option<Word>,
    /// Whether the code was injective on the checked words.
    pub injective: bool,
    /// Inverse code when the rule is a symbol bijection.
    pub inverse_code: Option<BlockCode>,
}

/// Checks `code ∘ Φ_A = Φ_B ∘ code` on every allowed word of length at most
/// `depth`, together with injectivity of the code on those words.
///
/// The result object carries the status; the only error conditions are
/// mismatched shifts.
pub fn verify_conjugacy(
    ca_a: &CellularAutomaton,
    ca_b: &CellularAutomaton,
    code: &BlockCode,
    depth: usize,
) -> Result<ConjugacyCheck> {
    if code.source() != ca_a.shift() {
        return Err(Error::HypothesisFailed("code source must be the first automaton's shift".into()));
    }
    if code.target() != ca_b.shift() {
        return Err(Error::HypothesisFailed("code target must be the second automaton's shift".into()));
    }

    let mut failure: Option<Word> = None;
    let mut injective = true;

    if let Some(theta) = code.one_block_map() {
        // 1-block fast path: stream words, compare windows in place.
        'lengths: for len in 2..=depth {
            let mut visit = |w: &[usize]| -> bool {
                for pair in w.windows(2) {
                    let lhs = ca_a.op(pair[0], pair[1]).map(|v| theta[v]);
                    let rhs = ca_b.op(theta[pair[0]], theta[pair[1]]);
                    if lhs != rhs || lhs.is_none() {
                        failure = Some(Word::new(w.to_vec()));
                        return false;
                    }
                }
                true
            };
            if !ca_a.shift().for_each_allowed_word(len, &mut visit) {
                break 'lengths;
            }
        }
        // A 1-block code is injective on words exactly when the symbol map
        // is injective.
        let mut seen = vec![false; code.target().alphabet().len()];
        for &y in &theta {
            if std::mem::replace(&mut seen[y], true) {
                injective = false;
            }
        }
    } else {
        'outer: for len in code.window() + 1..=depth {
            let words = ca_a.shift().allowed_words_capped(len, DEFAULT_ENUM_CAP)?;
            let mut images: HashMap<Word, Word> = HashMap::new();
            for w in words {
                let lhs = code.apply(&ca_a.apply_word(&w)?)?;
                let coded = code.apply(&w)?;
                let rhs = ca_b.apply_word(&coded)?;
                if lhs != rhs {
                    failure = Some(w);
                    break 'outer;
                }
                if let Some(prev) = images.insert(coded, w.clone()) {
                    let _ = prev;
                    injective = false;
                }
            }
        }
    }

    let inverse_code = code.one_block_map().and_then(|theta| {
        if !injective || code.source().alphabet().len() != code.target().alphabet().len() {
            return None;
        }
        let mut inv = vec![0; theta.len()];
        for (x, &y) in theta.iter().enumerate() {
            inv[y] = x;
        }
        BlockCode::one_block(code.target().clone(), code.source().clone(), &inv).ok()
    });

    Ok(ConjugacyCheck {
        verified: failure.is_none() && injective,
        depth,
        failure_witness: failure,
        injective,
        inverse_code,
    })
}

/// Certificate for the factorization of an automaton into
/// (class automaton) × (translation).
#[derive(Debug, Clone)]
pub struct DecompositionCertificate {
    /// Mode under which the structure was extracted.
    pub mode: StructureMode,
    /// Certified scaling exponent (N-scaling mode only).
    pub scaling_exponent: Option<usize>,
    /// Quotient structure of the rule table.
    pub structure: RightStructure,
    /// The bijective 1-block code from the automaton's shift onto the image
    /// chain.
    pub u_code: BlockCode,
    /// Image chain Λ on the product alphabet.
    pub lambda_shift: MarkovShift,
    /// First-coordinate projection of Λ.
    pub k_shift: MarkovShift,
    /// Second-coordinate projection of Λ.
    pub b_shift: MarkovShift,
    /// The class automaton Φ_K on the K chain.
    pub class_ca: CellularAutomaton,
    /// The translation's symbol permutation on the B chain, as token pairs.
    pub translation: Vec<(String, String)>,
    /// The product automaton Φ_K × g_B on Λ.
    pub product_ca: CellularAutomaton,
    /// Least `M ≥ 1` with `s_B^M = id`.
    pub period_m: u64,
    /// Least `L ≥ 1` with every `L`-fold right multiplication the identity
    /// on K.
    pub exponent_l: u64,
    /// Whether Λ equals the edge-level product of its projections.
    pub product_verified: bool,
    /// Finite-depth conjugacy verification of `u`.
    pub conjugacy: ConjugacyCheck,
    /// Splitting flag for the induced full-shift presentation, when known
    /// from a supplied certificate.
    pub regular: Option<bool>,
    /// 1-block splitting flag, when known from a supplied certificate.
    pub simple: Option<bool>,
}

/// Probed exponents when the caller does not pin one in N-scaling mode.
const N_SCALING_PROBE: std::ops::RangeInclusive<usize> = 2..=8;

/// Decomposes a structurally compatible right-permutative automaton into a
/// class automaton times a translation, verifying every step.
///
/// In [`StructureMode::PsiAssociative`] mode the table must admit an
/// associativity permutation. In [`StructureMode::NScaling`] mode the
/// full-shift extension must be N-scaling for `n_hint` (or some probed
/// `N ≤ 8` when `None`). The conjugacy of the split code is verified to
/// depth `conjugacy_depth` (8 in [`decompose`]).
pub fn decompose_with_depth(
    ca: &CellularAutomaton,
    mode: StructureMode,
    n_hint: Option<usize>,
    conjugacy_depth: usize,
) -> Result<DecompositionCertificate> {
    if !ca.structurally_compatible {
        return Err(Error::HypothesisFailed("automaton is not structurally compatible".into()));
    }
    if !ca.right_permutative {
        return Err(Error::HypothesisFailed("automaton is not right-permutative".into()));
    }
    let mut scaling_exponent = None;
    match mode {
        StructureMode::PsiAssociative => match ca.table().find_psi() {
            PsiOutcome::Found(_) => {}
            _ => {
                return Err(Error::HypothesisFailed(
                    "table admits no associativity permutation".into(),
                ))
            }
        },
        StructureMode::NScaling => {
            let extension = ca.full_shift_extension();
            let candidates: Vec<usize> = match n_hint {
                Some(n) => vec![n],
                None => N_SCALING_PROBE.collect(),
            };
            for n in candidates {
                match extension.check_n_scaling(n) {
                    Ok(outcome) if outcome.holds => {
                        scaling_exponent = Some(n);
                        break;
                    }
                    Ok(_) => {}
                    // Probing stops where enumeration becomes infeasible;
                    // a pinned exponent still reports the overflow.
                    Err(Error::DepthTooLarge { .. }) if n_hint.is_none() => break,
                    Err(e) => return Err(e),
                }
            }
            if scaling_exponent.is_none() {
                return Err(Error::HypothesisFailed(
                    "full-shift extension is not N-scaling for any probed exponent".into(),
                ));
            }
        }
    }

    let split = split_code(ca.table(), mode)?;
    let table_alphabet = ca.table().alphabet();

    // Image of the automaton's shift under u, at edge level.
    let embed: Vec<usize> = ca
        .shift()
        .alphabet()
        .symbols()
        .iter()
        .map(|s| table_alphabet.id(s))
        .collect::<Result<_>>()?;
    let lambda_edges: Vec<(usize, usize)> = ca
        .shift()
        .edges()
        .into_iter()
        .map(|(a, b)| (split.image[embed[a]], split.image[embed[b]]))
        .collect();
    let lambda_shift =
        MarkovShift::from_edge_ids(split.product_alphabet.clone(), &lambda_edges)?;

    // Projections of Λ.
    let b_count = split.structure.identity_set.len();
    let class_alphabet = split.structure.class_table.alphabet().clone();
    let k_edges: Vec<(usize, usize)> = lambda_edges
        .iter()
        .map(|&(x, y)| (x / b_count, y / b_count))
        .collect();
    let k_shift = MarkovShift::from_edge_ids(class_alphabet, &k_edges)?;
    let b_alphabet = Alphabet::new(
        split
            .structure
            .identity_set
            .iter()
            .map(|&e| table_alphabet.symbol(e).to_string()),
    )?;
    let b_edges: Vec<(usize, usize)> = lambda_edges
        .iter()
        .map(|&(x, y)| (x % b_count, y % b_count))
        .collect();
    let b_shift = MarkovShift::from_edge_ids(b_alphabet.clone(), &b_edges)?;

    let class_ca = CellularAutomaton::new(k_shift.clone(), split.structure.class_table.clone())
        .map_err(|e| Error::HypothesisFailed(format!("class automaton is invalid: {e}")))?;

    let translation: Vec<(String, String)> = split
        .structure
        .identity_set
        .iter()
        .map(|&e| {
            (
                table_alphabet.symbol(e).to_string(),
                table_alphabet.symbol(split.structure.s_b_of(e)).to_string(),
            )
        })
        .collect();

    let product_ca = CellularAutomaton::new(lambda_shift.clone(), split.product_table.clone())
        .map_err(|e| Error::HypothesisFailed(format!("product automaton is invalid: {e}")))?;

    let period_m = split.structure.s_b_period();

    // Right-multiplication exponents on K: each column map must be a
    // permutation and L is the lcm of their orders.
    let k_n = split.structure.class_table.n();
    let mut exponent_l = 1u64;
    for a in 0..k_n {
        let column: Vec<usize> =
            (0..k_n).map(|x| split.structure.class_table.op(x, a)).collect();
        let perm = Permutation::new(column).map_err(|_| Error::StructureViolation {
            reason: format!(
                "right multiplication by class `{}` is not a permutation",
                split.structure.class_table.alphabet().symbol(a)
            ),
        })?;
        exponent_l = lcm(exponent_l, perm.order());
    }

    // Step-3 product verification at edge level.
    let lambda_set: HashSet<(usize, usize)> = lambda_edges.iter().copied().collect();
    for (k1, k2) in k_shift.edges() {
        let k1_token = k_shift.alphabet().symbol(k1);
        let k2_token = k_shift.alphabet().symbol(k2);
        for (b1, b2) in b_shift.edges() {
            let x = split.product_alphabet.id(&format!(
                "{k1_token}{PRODUCT_SEPARATOR}{}",
                b_shift.alphabet().symbol(b1)
            ))?;
            let y = split.product_alphabet.id(&format!(
                "{k2_token}{PRODUCT_SEPARATOR}{}",
                b_shift.alphabet().symbol(b2)
            ))?;
            if !lambda_set.contains(&(x, y)) {
                return Err(Error::ProductFailed {
                    edge: (
                        split.product_alphabet.symbol(x).to_string(),
                        split.product_alphabet.symbol(y).to_string(),
                    ),
                });
            }
        }
    }

    // The split code restricted to the automaton's shift.
    let u_image: Vec<usize> = (0..ca.shift().alphabet().len())
        .map(|s| {
            lambda_shift
                .alphabet()
                .id(split.product_alphabet.symbol(split.image[embed[s]]))
        })
        .collect::<Result<_>>()?;
    let u_code = BlockCode::one_block(ca.shift().clone(), lambda_shift.clone(), &u_image)?;

    let conjugacy = verify_conjugacy(ca, &product_ca, &u_code, conjugacy_depth)?;

    Ok(DecompositionCertificate {
        mode,
        scaling_exponent,
        structure: split.structure,
        u_code,
        lambda_shift,
        k_shift,
        b_shift,
        class_ca,
        translation,
        product_ca,
        period_m,
        exponent_l,
        product_verified: true,
        conjugacy,
        regular: None,
        simple: None,
    })
}

/// [`decompose_with_depth`] with the default conjugacy depth of 8.
pub fn decompose(
    ca: &CellularAutomaton,
    mode: StructureMode,
    n_hint: Option<usize>,
) -> Result<DecompositionCertificate> {
    decompose_with_depth(ca, mode, n_hint, 8)
}

impl DecompositionCertificate {
    /// Serializes the certificate with explicit symbol dictionaries.
    pub fn to_json(&self, table: &CayleyTable) -> serde_json::Value {
        let alphabet = table.alphabet();
        let classes: serde_json::Map<String, serde_json::Value> = self
            .structure
            .classes
            .iter()
            .map(|class| {
                (
                    alphabet.symbol(class[0]).to_string(),
                    serde_json::Value::Array(
                        class
                            .iter()
                            .map(|&a| serde_json::Value::String(alphabet.symbol(a).to_string()))
                            .collect(),
                    ),
                )
            })
            .collect();
        let e_map: serde_json::Map<String, serde_json::Value> = self
            .structure
            .e_map
            .iter()
            .enumerate()
            .map(|(a, &e)| {
                (
                    alphabet.symbol(a).to_string(),
                    serde_json::Value::String(alphabet.symbol(e).to_string()),
                )
            })
            .collect();
        let u_map: serde_json::Map<String, serde_json::Value> = self
            .u_code
            .one_block_map()
            .expect("split codes are 1-block")
            .iter()
            .enumerate()
            .map(|(a, &x)| {
                (
                    self.u_code.source().alphabet().symbol(a).to_string(),
                    serde_json::Value::String(
                        self.lambda_shift.alphabet().symbol(x).to_string(),
                    ),
                )
            })
            .collect();
        serde_json::json!({
            "mode": match self.mode {
                StructureMode::PsiAssociative => "psi_associative",
                StructureMode::NScaling => "n_scaling",
            },
            "scaling_exponent": self.scaling_exponent,
            "classes": classes,
            "right_identity_map": e_map,
            "identity_set": self
                .structure
                .identity_set
                .iter()
                .map(|&e| alphabet.symbol(e).to_string())
                .collect::<Vec<_>>(),
            "translation": self
                .translation
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect::<serde_json::Map<String, serde_json::Value>>(),
            "u_code": u_map,
            "class_table": self.class_ca.table(),
            "k_shift": self.k_shift,
            "b_shift": self.b_shift,
            "lambda_shift": self.lambda_shift,
            "period_m": self.period_m,
            "exponent_l": self.exponent_l,
            "product_verified": self.product_verified,
            "conjugacy": {
                "verified": self.conjugacy.verified,
                "depth": self.conjugacy.depth,
                "failure_witness": self
                    .conjugacy
                    .failure_witness
                    .as_ref()
                    .map(|w| self.u_code.source().alphabet().format_word(w)),
            },
            "regular": self.regular,
            "simple": self.simple,
        })
    }
}

/// Brute-force search for a conjugacy between two automata: 1-block
/// bijective symbol maps first (canonical ascending order), then, when the
/// window allows, memory-1 rules on allowed 2-words. Candidates are pruned
/// by the local homomorphism constraint and survivors are verified at depth
/// `2·max_window + 4`.
pub fn search_conjugacy(
    ca_a: &CellularAutomaton,
    ca_b: &CellularAutomaton,
    max_window: usize,
    budget: u64,
) -> Result<Option<BlockCode>> {
    let n_a = ca_a.shift().alphabet().len();
    let n_b = ca_b.shift().alphabet().len();
    let depth = 2 * max_window + 4;
    let mut spent = 0u64;

    if n_a == n_b {
        let mut image: Vec<Option<usize>> = vec![None; n_a];
        let mut used = vec![false; n_b];
        if let Some(code) = search_one_block(
            ca_a, ca_b, depth, &mut image, &mut used, 0, &mut spent, budget,
        )? {
            return Ok(Some(code));
        }
    }
    if max_window >= 2 {
        let windows = ca_a.shift().allowed_words_capped(2, DEFAULT_ENUM_CAP)?;
        let mut assignment: HashMap<Vec<usize>, usize> = HashMap::new();
        if let Some(code) = search_memory_one(
            ca_a, ca_b, depth, &windows, &mut assignment, 0, &mut spent, budget,
        )? {
            return Ok(Some(code));
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn search_one_block(
    ca_a: &CellularAutomaton,
    ca_b: &CellularAutomaton,
    depth: usize,
    image: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    next: usize,
    spent: &mut u64,
    budget: u64,
) -> Result<Option<BlockCode>> {
    let n = image.len();
    if next == n {
        let theta: Vec<usize> = image.iter().map(|x| x.unwrap()).collect();
        let Ok(code) =
            BlockCode::one_block(ca_a.shift().clone(), ca_b.shift().clone(), &theta)
        else {
            return Ok(None);
        };
        let check = verify_conjugacy(ca_a, ca_b, &code, depth)?;
        return Ok(if check.verified { Some(code) } else { None });
    }
    for candidate in 0..n {
        if used[candidate] {
            continue;
        }
        *spent += 1;
        if *spent > budget {
            return Err(Error::SearchExceeded { budget });
        }
        image[next] = Some(candidate);
        used[candidate] = true;
        if one_block_consistent(ca_a, ca_b, image) {
            if let Some(code) = search_one_block(
                ca_a, ca_b, depth, image, used, next + 1, spent, budget,
            )? {
                return Ok(Some(code));
            }
        }
        image[next] = None;
        used[candidate] = false;
    }
    Ok(None)
}

/// Partial-assignment pruning: edges must map to edges and the rule must
/// commute on every fully assigned pair.
fn one_block_consistent(
    ca_a: &CellularAutomaton,
    ca_b: &CellularAutomaton,
    image: &[Option<usize>],
) -> bool {
    let n = image.len();
    for a in 0..n {
        let Some(ia) = image[a] else { continue };
        for b in 0..n {
            let Some(ib) = image[b] else { continue };
            if ca_a.shift().is_edge(a, b) {
                if !ca_b.shift().is_edge(ia, ib) {
                    return false;
                }
                if let Some(v) = ca_a.op(a, b) {
                    if let Some(iv) = image[v] {
                        if ca_b.op(ia, ib) != Some(iv) {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

#[allow(clippy::too_many_arguments)]
fn search_memory_one(
    ca_a: &CellularAutomaton,
    ca_b: &CellularAutomaton,
    depth: usize,
    windows: &[Word],
    assignment: &mut HashMap<Vec<usize>, usize>,
    next: usize,
    spent: &mut u64,
    budget: u64,
) -> Result<Option<BlockCode>> {
    if next == windows.len() {
        let rule: HashMap<Vec<usize>, usize> = assignment.clone();
        let Ok(code) =
            BlockCode::new(ca_a.shift().clone(), ca_b.shift().clone(), 1, 0, rule)
        else {
            return Ok(None);
        };
        let check = verify_conjugacy(ca_a, ca_b, &code, depth)?;
        return Ok(if check.verified { Some(code) } else { None });
    }
    let n_b = ca_b.shift().alphabet().len();
    let key = windows[next].ids().to_vec();
    for candidate in 0..n_b {
        *spent += 1;
        if *spent > budget {
            return Err(Error::SearchExceeded { budget });
        }
        assignment.insert(key.clone(), candidate);
        if memory_one_consistent(ca_a, ca_b, assignment) {
            if let Some(code) = search_memory_one(
                ca_a, ca_b, depth, windows, assignment, next + 1, spent, budget,
            )? {
                return Ok(Some(code));
            }
        }
        assignment.remove(&key);
    }
    Ok(None)
}

/// Prunes memory-1 assignments: overlapping windows must map to target
/// edges, and the compositions must agree on fully assigned 3-words.
fn memory_one_consistent(
    ca_a: &CellularAutomaton,
    ca_b: &CellularAutomaton,
    assignment: &HashMap<Vec<usize>, usize>,
) -> bool {
    for (w1, &y1) in assignment {
        let follow = ca_a.shift().followers(w1[1]);
        for &c in follow {
            let w2 = vec![w1[1], c];
            if let Some(&y2) = assignment.get(&w2) {
                if !ca_b.shift().is_edge(y1, y2) {
                    return false;
                }
                // 3-word (w1[0], w1[1], c): code∘Φ_A on it needs the image
                // of the Φ_A-image pair; Φ_B∘code needs both code values.
                let (Some(v1), Some(v2)) =
                    (ca_a.op(w1[0], w1[1]), ca_a.op(w1[1], c))
                else {
                    return false;
                };
                if let Some(&lhs) = assignment.get(&vec![v1, v2]) {
                    if ca_b.op(y1, y2) != Some(lhs) {
                        return false;
                    }
                }
            }
        }
    }
    true
}
