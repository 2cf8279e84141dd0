//! Folding-direction combinatorics of Fourier supports.
//!
//! The class `O_γ` of a direction `γ ≠ 0` is the set of unordered support pairs
//! `{α, β}` with `α + β = γ`. All counts and thresholds here are unordered.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::Ratio;
use serde::Serialize;

use crate::corpus;
use crate::error::{Error, Result};
use crate::spectral::{self, FourierSpectrum, Support};

/// Per-direction class sizes of a support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FoldingProfile {
    pub n: usize,
    pub k: usize,
    pub total_pairs: u64,
    /// Direction mask → `|O_γ|`.
    pub classes: BTreeMap<u32, u64>,
    /// Direction mask → pairs `(α, β)` with `α < β`, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<BTreeMap<u32, Vec<(u32, u32)>>>,
    pub min_class: u64,
    pub max_class: u64,
    /// Class size → number of directions with that size.
    pub histogram: BTreeMap<u64, u64>,
}

impl FoldingProfile {
    /// `|O_γ|`, zero for unrealized directions.
    pub fn class_size(&self, gamma: u32) -> u64 {
        self.classes.get(&gamma).copied().unwrap_or(0)
    }
}

fn pair_count(k: usize) -> u64 {
    let k = k as u64;
    k * k.saturating_sub(1) / 2
}

fn class_counts(masks: &[u32]) -> HashMap<u32, u64> {
    let mut counts: HashMap<u32, u64> = HashMap::with_capacity(masks.len() * masks.len() / 2);
    for (i, &a) in masks.iter().enumerate() {
        for &b in &masks[i + 1..] {
            *counts.entry(a ^ b).or_insert(0) += 1;
        }
    }
    counts
}

/// Exact class sizes for every realized direction, in `O(k²)` time.
pub fn direction_classes(support: &Support, with_pairs: bool) -> FoldingProfile {
    let masks = support.masks();
    let classes: BTreeMap<u32, u64> = class_counts(masks).into_iter().collect();
    let pairs = with_pairs.then(|| {
        let mut out: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
        for (i, &a) in masks.iter().enumerate() {
            for &b in &masks[i + 1..] {
                out.entry(a ^ b).or_default().push((a, b));
            }
        }
        out
    });
    let mut histogram = BTreeMap::new();
    for &c in classes.values() {
        *histogram.entry(c).or_insert(0) += 1;
    }
    FoldingProfile {
        n: support.n(),
        k: masks.len(),
        total_pairs: pair_count(masks.len()),
        min_class: classes.values().copied().min().unwrap_or(0),
        max_class: classes.values().copied().max().unwrap_or(0),
        classes,
        pairs,
        histogram,
    }
}

/// A direction realized by a single pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairViolation {
    pub direction: u32,
    pub pair: (u32, u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairCondition {
    pub holds: bool,
    /// Lowest direction whose class is a single pair.
    pub first_violation: Option<PairViolation>,
}

/// Every realized direction has at least two pairs.
pub fn check_pair_condition(support: &Support) -> PairCondition {
    let profile = direction_classes(support, false);
    let direction = profile.classes.iter().find(|&(_, &c)| c == 1).map(|(&g, _)| g);
    let first_violation = direction.map(|g| {
        let masks = support.masks();
        let a = *masks
            .iter()
            .find(|&&a| support.contains(a ^ g) && a < a ^ g)
            .expect("realized direction has a pair");
        PairViolation {
            direction: g,
            pair: (a, a ^ g),
        }
    });
    PairCondition {
        holds: first_violation.is_none(),
        first_violation,
    }
}

/// Smallest class size counted as heavy at exponent `ℓ`: `⌈k^ℓ⌉ + 1`.
///
/// Values of `k^ℓ` within `1e-9` of an integer snap to it, so `16^{1/2}` is 4.
pub fn heavy_threshold(k: usize, ell: f64) -> u64 {
    let t = (k as f64).powf(ell);
    let r = t.round();
    let c = if (t - r).abs() < 1e-9 { r } else { t.ceil() };
    c.max(0.0) as u64 + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FoldingParameters {
    pub ell: f64,
    /// Largest `δ` for which the support is `(δ, ℓ)`-folding.
    pub delta: f64,
    pub heavy_pair_count: u64,
    pub total_pairs: u64,
    pub threshold: u64,
}

fn parameters_from(profile: &FoldingProfile, ell: f64) -> FoldingParameters {
    let threshold = heavy_threshold(profile.k, ell);
    let heavy_pair_count: u64 = profile.classes.values().filter(|&&c| c >= threshold).sum();
    let delta = if profile.total_pairs == 0 {
        1.0
    } else {
        heavy_pair_count as f64 / profile.total_pairs as f64
    };
    FoldingParameters {
        ell,
        delta,
        heavy_pair_count,
        total_pairs: profile.total_pairs,
        threshold,
    }
}

/// Mass of pairs lying in classes of size at least `k^ℓ + 1`.
pub fn folding_parameters(support: &Support, ell: f64) -> FoldingParameters {
    parameters_from(&direction_classes(support, false), ell)
}

/// Default sparsity from which the heavy-participant lower bound is enforced.
pub const HEAVY_PARTICIPANT_GATE: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeavyParticipants {
    /// Elements with at least `δk/2` heavy partners.
    pub participants: Vec<u32>,
    pub required_partners: f64,
    /// `δk/3`.
    pub lower_bound: f64,
    pub folding_holds: bool,
    /// `Some` when the support is `(δ, ℓ)`-folding and `k` reaches the gate.
    pub bound_holds: Option<bool>,
}

pub fn heavy_participants(support: &Support, delta: f64, ell: f64, gate_k: usize) -> HeavyParticipants {
    let profile = direction_classes(support, false);
    let params = parameters_from(&profile, ell);
    let k = support.len();
    let required = delta * k as f64 / 2.0;
    let masks = support.masks();
    let participants: Vec<u32> = masks
        .iter()
        .copied()
        .filter(|&a| {
            let heavy = masks
                .iter()
                .filter(|&&b| b != a && profile.class_size(a ^ b) >= params.threshold)
                .count();
            heavy as f64 >= required
        })
        .collect();
    let lower_bound = delta * k as f64 / 3.0;
    let folding_holds = params.delta >= delta;
    let bound_holds =
        (folding_holds && k >= gate_k).then_some(participants.len() as f64 >= lower_bound);
    HeavyParticipants {
        participants,
        required_partners: required,
        lower_bound,
        folding_holds,
        bound_holds,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThreeFoldReport {
    pub k: usize,
    /// α → smallest β with `|O_{α+β}| ≥ 3`.
    pub witnesses: BTreeMap<u32, u32>,
    /// Elements without any such β.
    pub failures: Vec<u32>,
}

impl ThreeFoldReport {
    pub fn all_witnessed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Witness search without the sparsity precondition.
pub fn three_fold_witnesses(support: &Support) -> ThreeFoldReport {
    let profile = direction_classes(support, false);
    let masks = support.masks();
    let mut witnesses = BTreeMap::new();
    let mut failures = Vec::new();
    for &a in masks {
        match masks.iter().find(|&&b| b != a && profile.class_size(a ^ b) >= 3) {
            Some(&b) => {
                witnesses.insert(a, b);
            }
            None => failures.push(a),
        }
    }
    ThreeFoldReport {
        k: masks.len(),
        witnesses,
        failures,
    }
}

/// Every support element of a Boolean spectrum with `k > 4` lies in some
/// class of size at least three.
pub fn verify_three_fold(s: &FourierSpectrum) -> Result<ThreeFoldReport> {
    if s.sparsity() <= 4 {
        return Err(Error::SparsityTooSmall { k: s.sparsity() });
    }
    Ok(three_fold_witnesses(&s.support()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SingleDirectionEntry {
    pub alpha: u32,
    /// Number of β with `|O_{α+β}| ≥ 3`.
    pub nontrivial_partners: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sole_partner: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sole_class_size: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SingleDirectionReport {
    pub k: usize,
    pub plateaued: bool,
    pub positive_count: usize,
    pub negative_count: usize,
    pub entries: Vec<SingleDirectionEntry>,
    /// Every element with a sole nontrivial partner has class size `k/2`.
    pub sole_direction_holds: bool,
    /// Elements whose classes all have size two.
    pub trivial_only: Vec<u32>,
    /// Trivial-only elements force an odd sign count and a plateaued spectrum,
    /// and plateaued spectra with `k > 4` have none.
    pub trivial_claims_hold: bool,
}

pub fn single_direction_structure(s: &FourierSpectrum) -> SingleDirectionReport {
    let support = s.support();
    let profile = direction_classes(&support, false);
    let masks = support.masks();
    let k = masks.len();
    let entries: Vec<SingleDirectionEntry> = masks
        .iter()
        .map(|&a| {
            let partners: Vec<u32> = masks
                .iter()
                .copied()
                .filter(|&b| b != a && profile.class_size(a ^ b) >= 3)
                .collect();
            let sole = (partners.len() == 1).then(|| partners[0]);
            SingleDirectionEntry {
                alpha: a,
                nontrivial_partners: partners.len(),
                sole_partner: sole,
                sole_class_size: sole.map(|b| profile.class_size(a ^ b)),
            }
        })
        .collect();
    let sole_direction_holds = entries
        .iter()
        .filter_map(|e| e.sole_class_size)
        .all(|c| 2 * c == k as u64);
    let (pos, neg) = s.sign_split();
    let plateaued = spectral::is_plateaued(s);
    let trivial_only: Vec<u32> = if k >= 2 {
        entries
            .iter()
            .filter(|e| e.nontrivial_partners == 0)
            .map(|e| e.alpha)
            .collect()
    } else {
        Vec::new()
    };
    let odd_sign_count = pos.len() % 2 == 1 || neg.len() % 2 == 1;
    let trivial_claims_hold = (trivial_only.is_empty() || (odd_sign_count && plateaued))
        && !(plateaued && k > 4 && !trivial_only.is_empty());
    SingleDirectionReport {
        k,
        plateaued,
        positive_count: pos.len(),
        negative_count: neg.len(),
        entries,
        sole_direction_holds,
        trivial_only,
        trivial_claims_hold,
    }
}

/// A size-two class `{(a, b), (c, d)}`, forcing `ŝ_a ŝ_b = −ŝ_c ŝ_d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SignConstraint {
    pub direction: u32,
    pub pairs: [(u32, u32); 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum SignFeasibility {
    /// One satisfying assignment, mask → `±1`.
    Feasible { signs: BTreeMap<u32, i8> },
    /// Constraints whose product reads `1 = −1`.
    Infeasible { witness: Vec<SignConstraint> },
}

impl SignFeasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible { .. })
    }
}

/// All sign constraints of a support, ordered by direction.
pub fn sign_constraints(support: &Support) -> Vec<SignConstraint> {
    let profile = direction_classes(support, true);
    let pairs = profile.pairs.as_ref().expect("pairs requested");
    profile
        .classes
        .iter()
        .filter(|&(_, &c)| c == 2)
        .map(|(&g, _)| SignConstraint {
            direction: g,
            pairs: [pairs[&g][0], pairs[&g][1]],
        })
        .collect()
}

/// Reduced row: coefficient bits, right-hand side, and the input equations it came from.
type SignRow = (Vec<u64>, bool, BTreeSet<usize>);

/// Incremental F₂ system over sign bits, with rows tagged by the set of input
/// equations they were combined from.
struct SignSystem {
    words: usize,
    /// Row owning each pivot column.
    pivots: Vec<Option<SignRow>>,
}

enum Insert {
    Added,
    Redundant,
    Contradiction(BTreeSet<usize>),
}

impl SignSystem {
    fn new(vars: usize) -> Self {
        Self {
            words: vars.div_ceil(64).max(1),
            pivots: (0..vars).map(|_| None).collect(),
        }
    }

    fn insert(&mut self, vars: &[usize], rhs: bool, id: usize) -> Insert {
        let mut row = vec![0u64; self.words];
        for &v in vars {
            row[v / 64] ^= 1 << (v % 64);
        }
        let mut rhs = rhs;
        let mut used = Vec::new();
        for col in 0..self.pivots.len() {
            if row[col / 64] >> (col % 64) & 1 == 0 {
                continue;
            }
            if let Some((prow, prhs, _)) = &self.pivots[col] {
                for (w, p) in row.iter_mut().zip(prow) {
                    *w ^= p;
                }
                rhs ^= prhs;
                used.push(col);
            }
        }
        let provenance = || {
            let mut prov = BTreeSet::from([id]);
            for &col in &used {
                for p in &self.pivots[col].as_ref().expect("used pivot").2 {
                    if !prov.remove(p) {
                        prov.insert(*p);
                    }
                }
            }
            prov
        };
        match (0..self.pivots.len()).find(|&c| row[c / 64] >> (c % 64) & 1 == 1) {
            Some(col) => {
                let prov = provenance();
                self.pivots[col] = Some((row, rhs, prov));
                Insert::Added
            }
            None if rhs => Insert::Contradiction(provenance()),
            None => Insert::Redundant,
        }
    }

    /// Back substitution with free variables set to zero.
    fn solution(&self) -> Vec<bool> {
        let mut x = vec![false; self.pivots.len()];
        for col in (0..self.pivots.len()).rev() {
            if let Some((row, rhs, _)) = &self.pivots[col] {
                let mut v = *rhs;
                for j in col + 1..self.pivots.len() {
                    if row[j / 64] >> (j % 64) & 1 == 1 {
                        v ^= x[j];
                    }
                }
                x[col] = v;
            }
        }
        x
    }
}

fn constraint_vars(c: &SignConstraint, index: &HashMap<u32, usize>) -> [usize; 4] {
    let [(a, b), (p, q)] = c.pairs;
    [index[&a], index[&b], index[&p], index[&q]]
}

/// Solves the subset of constraints; `Err` carries a contradictory subset.
fn solve_constraints(
    k: usize,
    constraints: &[SignConstraint],
    index: &HashMap<u32, usize>,
) -> std::result::Result<Vec<bool>, BTreeSet<usize>> {
    let mut sys = SignSystem::new(k);
    for (i, c) in constraints.iter().enumerate() {
        if let Insert::Contradiction(prov) = sys.insert(&constraint_vars(c, index), true, i) {
            return Err(prov);
        }
    }
    Ok(sys.solution())
}

/// Sign-assignment test over size-two classes. An infeasible answer proves
/// the support cannot belong to any Boolean function.
pub fn sign_feasibility(support: &Support) -> SignFeasibility {
    let masks = support.masks();
    let index: HashMap<u32, usize> = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let constraints = sign_constraints(support);
    match solve_constraints(masks.len(), &constraints, &index) {
        Ok(x) => SignFeasibility::Feasible {
            signs: masks
                .iter()
                .zip(x)
                .map(|(&m, neg)| (m, if neg { -1 } else { 1 }))
                .collect(),
        },
        Err(prov) => {
            // drop constraints one at a time while the rest stays contradictory
            let mut witness: Vec<SignConstraint> = prov.into_iter().map(|i| constraints[i]).collect();
            let mut i = 0;
            while i < witness.len() {
                let mut trial = witness.clone();
                trial.remove(i);
                match solve_constraints(masks.len(), &trial, &index) {
                    Err(sub) => witness = sub.into_iter().map(|j| trial[j]).collect(),
                    Ok(_) => i += 1,
                }
            }
            SignFeasibility::Infeasible { witness }
        }
    }
}

/// The assignment satisfies every sign constraint of the support.
pub fn check_sign_certificate(support: &Support, signs: &BTreeMap<u32, i8>) -> bool {
    let sign = |m: u32| signs.get(&m).copied().unwrap_or(0) as i32;
    support.masks().iter().all(|&m| sign(m).abs() == 1)
        && sign_constraints(support).iter().all(|c| {
            let [(a, b), (p, q)] = c.pairs;
            sign(a) * sign(b) == -sign(p) * sign(q)
        })
}

/// Multiplying the witness constraints cancels every sign and leaves `1 = −1`.
pub fn witness_is_contradiction(support: &Support, witness: &[SignConstraint]) -> bool {
    if witness.len().is_multiple_of(2) {
        return false;
    }
    let mut odd: BTreeSet<u32> = BTreeSet::new();
    for c in witness {
        let [(a, b), (p, q)] = c.pairs;
        if a ^ b != c.direction || p ^ q != c.direction {
            return false;
        }
        for m in [a, b, p, q] {
            if !support.contains(m) {
                return false;
            }
            if !odd.remove(&m) {
                odd.insert(m);
            }
        }
    }
    let constraints = sign_constraints(support);
    odd.is_empty() && witness.iter().all(|w| constraints.contains(w))
}

/// Support `{{1}, …, {n}, {1, 2, n}, …, {1, n−1, n}}`, which meets the pair
/// condition yet admits no consistent signs.
pub fn counterexample_support(n: usize) -> Result<Support> {
    if n < 5 {
        return Err(Error::InvalidParameter(format!(
            "counterexample construction needs n ≥ 5, got {n}"
        )));
    }
    crate::gf2::check_dim(n)?;
    let last = 1u32 << (n - 1);
    let singles = (0..n).map(|i| 1u32 << i);
    let triples = (1..n - 1).map(|i| 1 | 1u32 << i | last);
    Support::new(n, singles.chain(triples))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AddressingProfile {
    pub k: usize,
    pub sqrt_k: usize,
    pub total_pairs: u64,
    /// Pairs sharing their target variable.
    pub case1_pairs: u64,
    /// Class size → direction count, over same-target directions.
    pub case1_class_sizes: BTreeMap<u64, u64>,
    /// Pairs with different target variables.
    pub case2_pairs: u64,
    pub case2_class_sizes: BTreeMap<u64, u64>,
    pub case2_all_sqrt_k: bool,
    /// Exact `case2_pairs / total_pairs` as `[numerator, denominator]`.
    pub case2_fraction: [u64; 2],
    pub case2_fraction_f64: f64,
    /// `1 − 2/√k`.
    pub case2_fraction_bound: f64,
    pub case2_fraction_holds: bool,
    pub note: String,
}

/// Splits the addressing support's pairs by whether they share a target
/// variable and reports class sizes of each kind from the exact oracle.
pub fn addressing_folding_profile(k: usize) -> Result<AddressingProfile> {
    let (m, sqrt_k) = corpus::addressing_shape(k)?;
    if k > 256 {
        return Err(Error::InvalidParameter(format!(
            "addressing profile supports k ≤ 256, got {k}"
        )));
    }
    let support = spectral::wht(&corpus::gen_addressing(k)?).support();
    let profile = direction_classes(&support, false);
    let target_bits = |g: u32| (g >> m).count_ones();
    let mut case1_class_sizes = BTreeMap::new();
    let mut case2_class_sizes = BTreeMap::new();
    let (mut case1_pairs, mut case2_pairs) = (0, 0);
    for (&g, &c) in &profile.classes {
        // every character carries exactly one target bit, so a direction
        // carries none for same-target pairs and two otherwise
        if target_bits(g) == 0 {
            case1_pairs += c;
            *case1_class_sizes.entry(c).or_insert(0) += 1;
        } else {
            case2_pairs += c;
            *case2_class_sizes.entry(c).or_insert(0) += 1;
        }
    }
    let frac = Ratio::new(case2_pairs, profile.total_pairs);
    // compare case2/total ≥ 1 − 2/√k without rounding: √k·case2 ≥ (√k − 2)·total
    let case2_fraction_holds =
        (sqrt_k as u64) * case2_pairs >= (sqrt_k as u64).saturating_sub(2) * profile.total_pairs;
    let observed: Vec<String> = case1_class_sizes.keys().map(u64::to_string).collect();
    let note = format!(
        "same-target classes hold {} unordered pairs each (k/2 = {}); the stated count of k = {} \
         matches ordered pairs",
        observed.join("/"),
        k / 2,
        k
    );
    Ok(AddressingProfile {
        k,
        sqrt_k,
        total_pairs: profile.total_pairs,
        case1_pairs,
        case2_all_sqrt_k: case2_class_sizes.keys().all(|&c| c == sqrt_k as u64),
        case1_class_sizes,
        case2_pairs,
        case2_class_sizes,
        case2_fraction: [*frac.numer(), *frac.denom()],
        case2_fraction_f64: case2_pairs as f64 / profile.total_pairs as f64,
        case2_fraction_bound: 1.0 - 2.0 / sqrt_k as f64,
        case2_fraction_holds,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{gen_addressing, gen_conjunction, gen_inner_product, gen_modified_addressing};
    use crate::gf2::ParityVector;
    use crate::spectral::{wht, TruthTable};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn and2() -> FourierSpectrum {
        wht(&gen_conjunction(ParityVector::new(3, 2).unwrap()).unwrap())
    }

    fn sup(n: usize, masks: &[u32]) -> Support {
        Support::new(n, masks.iter().copied()).unwrap()
    }

    #[test]
    fn and2_classes() {
        let p = direction_classes(&and2().support(), true);
        assert_eq!(p.classes, BTreeMap::from([(1, 2), (2, 2), (3, 2)]));
        assert_eq!(p.pairs.unwrap()[&3], vec![(0, 3), (1, 2)]);
        assert_eq!(p.histogram, BTreeMap::from([(2, 3)]));
        let single = direction_classes(&sup(3, &[1, 6]), false);
        assert_eq!(single.classes, BTreeMap::from([(7, 1)]));
    }

    #[test]
    fn addressing16_cross_target_classes() {
        let s = wht(&gen_addressing(16).unwrap()).support();
        let p = direction_classes(&s, false);
        for (&g, &c) in &p.classes {
            if g >> 2 != 0 {
                assert_eq!(c, 4);
            }
        }
    }

    #[test]
    fn pair_condition_examples() {
        assert!(check_pair_condition(&and2().support()).holds);
        // x₁…x₃ strings 000, 001, 010 are masks 0, 4, 2
        let r = check_pair_condition(&sup(3, &[0, 4, 2]));
        assert!(!r.holds);
        let v = r.first_violation.unwrap();
        assert_eq!(v.direction, 2);
        assert_eq!(v.pair, (0, 2));
        let direction_011 = ParityVector::parse_bits("011").unwrap().bits();
        assert_eq!(direction_classes(&sup(3, &[0, 4, 2]), false).class_size(direction_011), 1);
        assert!(check_pair_condition(&counterexample_support(5).unwrap()).holds);
    }

    #[test]
    fn threshold_snapping() {
        assert_eq!(heavy_threshold(16, 0.5), 5);
        assert_eq!(heavy_threshold(64, 0.5), 9);
        assert_eq!(heavy_threshold(10, 0.5), 5);
        assert_eq!(heavy_threshold(7, 0.0), 2);
        assert_eq!(heavy_threshold(256, 0.25), 5);
    }

    #[test]
    fn folding_parameter_examples() {
        let s = wht(&gen_addressing(64).unwrap()).support();
        assert_eq!(folding_parameters(&s, 0.0).delta, 1.0);
        let half = folding_parameters(&s, 0.5);
        // only same-target classes, of size k/2 = 32, pass the threshold 9
        assert_eq!(half.heavy_pair_count, 8 * 28);
        assert!((half.delta - 1.0 / 9.0).abs() < 1e-12);
        assert_eq!(folding_parameters(&and2().support(), 0.0).delta, 1.0);
    }

    #[test]
    fn heavy_participant_examples() {
        let s = wht(&gen_inner_product(3).unwrap()).support();
        let h = heavy_participants(&s, 1.0, 0.0, HEAVY_PARTICIPANT_GATE);
        assert_eq!(h.participants, s.masks());
        assert_eq!(h.bound_holds, Some(true));
        let add = wht(&gen_addressing(64).unwrap()).support();
        let params = folding_parameters(&add, 0.49);
        let h = heavy_participants(&add, params.delta, 0.49, HEAVY_PARTICIPANT_GATE);
        assert!(h.folding_holds);
        assert_eq!(h.bound_holds, Some(true));
        let none = heavy_participants(&and2().support(), 0.5, 1.0, HEAVY_PARTICIPANT_GATE);
        assert!(none.participants.is_empty());
        assert_eq!(none.bound_holds, None);
    }

    #[test]
    fn three_fold_examples() {
        let add = wht(&gen_addressing(16).unwrap());
        assert!(verify_three_fold(&add).unwrap().all_witnessed());
        let ip = wht(&gen_inner_product(2).unwrap());
        let r = verify_three_fold(&ip).unwrap();
        assert_eq!(r.witnesses.len(), 16);
        assert!(matches!(verify_three_fold(&and2()), Err(Error::SparsityTooSmall { k: 4 })));
        assert_eq!(three_fold_witnesses(&and2().support()).failures.len(), 4);
    }

    #[test]
    fn single_direction_examples() {
        let g = wht(&gen_modified_addressing(4).unwrap());
        let r = single_direction_structure(&g);
        let z1 = r.entries.iter().find(|e| e.alpha == 1).unwrap();
        assert_eq!(z1.nontrivial_partners, 1);
        assert_eq!(z1.sole_partner, Some(2));
        assert_eq!(z1.sole_class_size, Some(5));
        assert!(r.sole_direction_holds);
        assert!(r.trivial_claims_hold);

        let add = single_direction_structure(&wht(&gen_addressing(16).unwrap()));
        assert!(add.entries.iter().all(|e| e.nontrivial_partners >= 2));
        let ip = single_direction_structure(&wht(&gen_inner_product(3).unwrap()));
        assert!(ip.plateaued && ip.trivial_only.is_empty());
        let and = single_direction_structure(&and2());
        assert_eq!(and.trivial_only.len(), 4);
        assert_eq!((and.positive_count, and.negative_count), (3, 1));
        assert!(and.trivial_claims_hold);
    }

    #[test]
    fn counterexample_is_infeasible() {
        for n in 5..=8 {
            let s = counterexample_support(n).unwrap();
            assert_eq!(s.len(), 2 * n - 2);
            match sign_feasibility(&s) {
                SignFeasibility::Infeasible { witness } => {
                    assert!(witness_is_contradiction(&s, &witness), "n = {n}");
                }
                other => panic!("n = {n}: {other:?}"),
            }
        }
        assert!(counterexample_support(4).is_err());
        let five = counterexample_support(5).unwrap();
        assert_eq!(five.masks(), &[1, 2, 4, 8, 16, 19, 21, 25]);
    }

    #[test]
    fn witness_checker_rejects_tampering() {
        let s = counterexample_support(5).unwrap();
        let SignFeasibility::Infeasible { witness } = sign_feasibility(&s) else {
            panic!("expected infeasible");
        };
        assert!(!witness_is_contradiction(&s, &witness[1..]));
        let mut twice = witness.clone();
        twice.extend_from_slice(&witness[..1]);
        assert!(!witness_is_contradiction(&s, &twice));
    }

    #[test]
    fn boolean_supports_are_feasible() {
        for f in [
            and2(),
            wht(&gen_addressing(16).unwrap()),
            wht(&gen_modified_addressing(4).unwrap()),
            wht(&gen_inner_product(2).unwrap()),
        ] {
            let s = f.support();
            let SignFeasibility::Feasible { signs } = sign_feasibility(&s) else {
                panic!("expected feasible");
            };
            assert!(check_sign_certificate(&s, &signs));
            let actual: BTreeMap<u32, i8> = f.iter().map(|(m, c)| (m, c.signum() as i8)).collect();
            assert!(check_sign_certificate(&s, &actual));
        }
    }

    #[test]
    fn addressing_profile_cases() {
        for k in [4usize, 16, 64, 256] {
            let p = addressing_folding_profile(k).unwrap();
            let r = p.sqrt_k as u64;
            assert!(p.case2_all_sqrt_k);
            assert_eq!(p.case1_class_sizes.keys().copied().collect::<Vec<_>>(), vec![k as u64 / 2]);
            assert_eq!(p.case1_pairs + p.case2_pairs, p.total_pairs);
            // same-target pairs: √k targets, each with C(√k, 2) pairs
            assert_eq!(p.case1_pairs, r * r * (r - 1) / 2);
            assert!(p.case2_fraction_holds);
            let frac = Ratio::new(p.case2_fraction[0], p.case2_fraction[1]);
            assert_eq!(frac, Ratio::new(1, 1) - Ratio::new(1, r + 1));
        }
        assert!(addressing_folding_profile(8).is_err());
        assert!(addressing_folding_profile(1024).is_err());
    }

    fn random_table(n: usize, rng: &mut ChaCha8Rng) -> TruthTable {
        TruthTable::from_fn(n, |_| if rng.random_bool(0.5) { 1 } else { -1 }).unwrap()
    }

    proptest! {
        #[test]
        fn profile_invariants(n in 1usize..=8, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = wht(&random_table(n, &mut rng));
            let s = f.support();
            let p = direction_classes(&s, false);
            prop_assert_eq!(p.classes.values().sum::<u64>(), p.total_pairs);
            prop_assert!(!p.classes.contains_key(&0));
            // Boolean supports meet the pair condition
            prop_assert!(check_pair_condition(&s).holds);
            if s.len() > 4 {
                prop_assert!(verify_three_fold(&f).unwrap().all_witnessed());
            }
            let r = single_direction_structure(&f);
            prop_assert!(r.sole_direction_holds);
            prop_assert!(r.trivial_claims_hold);
            let actual: BTreeMap<u32, i8> = f.iter().map(|(m, c)| (m, c.signum() as i8)).collect();
            prop_assert!(check_sign_certificate(&s, &actual));
            prop_assert!(sign_feasibility(&s).is_feasible());
        }

        #[test]
        fn delta_is_monotone(n in 2usize..=7, seed in any::<u64>(), a in 0.0f64..1.5, b in 0.0f64..1.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = wht(&random_table(n, &mut rng)).support();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(folding_parameters(&s, lo).delta >= folding_parameters(&s, hi).delta);
        }

        #[test]
        fn random_supports_sign_answer_is_certified(n in 3usize..=6, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let masks: Vec<u32> = (0..rng.random_range(2..=12)).map(|_| rng.random_range(0..1u32 << n)).collect();
            let s = Support::new(n, masks).unwrap();
            match sign_feasibility(&s) {
                SignFeasibility::Feasible { signs } => prop_assert!(check_sign_certificate(&s, &signs)),
                SignFeasibility::Infeasible { witness } => prop_assert!(witness_is_contradiction(&s, &witness)),
            }
        }
    }
}
