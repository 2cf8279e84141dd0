//! Parity decision trees: representation, exhaustive verification, the
//! random parity sampler, recursive builders and Monte Carlo estimators.
//!
//! Builders work on the spectrum restricted to the affine subspace fixed by
//! the current root-to-node path. Characters of the restricted spectrum are
//! canonical coset labels, so a character is independent of the path exactly
//! when it is nonzero, and at sparsity one the function is `±χ_λ` there.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::folding;
use crate::gf2::{self, Gf2Basis, ParityVector};
use crate::restriction::{self, AffineConstraintSystem};
use crate::spectral::{self, FourierSpectrum, Support, TruthTable};

/// Largest dimension verified exhaustively.
pub const MAX_VERIFY_DIM: usize = 20;

/// A tree node. On a query, `pos` is taken when `χ_query(x) = +1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Leaf { leaf: i8 },
    Query {
        query: u32,
        pos: Box<Node>,
        neg: Box<Node>,
    },
}

impl Node {
    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Query { pos, neg, .. } => 1 + pos.depth().max(neg.depth()),
        }
    }

    fn size(&self) -> (usize, usize) {
        match self {
            Node::Leaf { .. } => (0, 1),
            Node::Query { pos, neg, .. } => {
                let (qa, la) = pos.size();
                let (qb, lb) = neg.size();
                (1 + qa + qb, la + lb)
            }
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Node::Leaf { leaf } if *leaf == 1 || *leaf == -1 => Ok(()),
            Node::Leaf { leaf } => Err(Error::Parse(format!("leaf value must be ±1, got {leaf}"))),
            Node::Query { query, pos, neg } => {
                if *query == 0 {
                    return Err(Error::Parse("query mask must be nonzero".into()));
                }
                gf2::check_mask(*query as u64, n)?;
                pos.validate(n)?;
                neg.validate(n)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityDecisionTree {
    n: usize,
    root: Node,
}

impl ParityDecisionTree {
    pub fn new(n: usize, root: Node) -> Result<Self> {
        gf2::check_dim(n)?;
        root.validate(n)?;
        Ok(Self { n, root })
    }

    pub fn leaf(n: usize, value: i8) -> Result<Self> {
        Self::new(n, Node::Leaf { leaf: value })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Reads the nested node JSON; the dimension is supplied separately.
    pub fn from_json(s: &str, n: usize) -> Result<Self> {
        Self::new(n, serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.root).expect("tree serializes")
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// `(queries, leaves)`.
    pub fn size(&self) -> (usize, usize) {
        self.root.size()
    }

    /// Descends on the input given as a raw mask.
    pub fn evaluate_mask(&self, x: u32) -> i8 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { leaf } => return *leaf,
                Node::Query { query, pos, neg } => {
                    node = if gf2::dot(*query, x) { neg } else { pos };
                }
            }
        }
    }
}

pub fn evaluate_tree(tree: &ParityDecisionTree, x: ParityVector) -> Result<i8> {
    if x.dim() != tree.n {
        return Err(Error::DimensionMismatch {
            expected: tree.n,
            found: x.dim(),
        });
    }
    Ok(tree.evaluate_mask(x.bits()))
}

/// The tree agrees with `f` on all `2ⁿ` inputs.
pub fn verify_tree(tree: &ParityDecisionTree, f: &TruthTable) -> Result<bool> {
    if tree.n != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            found: tree.n,
        });
    }
    if f.n() > MAX_VERIFY_DIM {
        return Err(Error::InvalidParameter(format!(
            "exhaustive verification supports n ≤ {MAX_VERIFY_DIM}, got {}",
            f.n()
        )));
    }
    Ok(f
        .values()
        .par_iter()
        .enumerate()
        .all(|(x, &v)| tree.evaluate_mask(x as u32) == v))
}

/// First input on which the tree and `f` differ.
pub fn first_disagreement(tree: &ParityDecisionTree, f: &TruthTable) -> Option<u32> {
    (0..f.values().len() as u32).find(|&x| tree.evaluate_mask(x) != f.value(x))
}

pub fn depth(tree: &ParityDecisionTree) -> usize {
    tree.depth()
}

/// Every root-to-leaf path queries linearly independent masks.
pub fn paths_independent(tree: &ParityDecisionTree) -> bool {
    fn walk(node: &Node, basis: &Gf2Basis) -> bool {
        match node {
            Node::Leaf { .. } => true,
            Node::Query { query, pos, neg } => {
                let mut b = basis.clone();
                b.insert_mask(*query) && walk(pos, &b) && walk(neg, &b)
            }
        }
    }
    walk(&tree.root, &Gf2Basis::empty_unchecked(tree.n))
}

/// Each element of the support independently with probability `p`.
pub fn sample_parity(support: &Support, p: f64, rng: &mut impl Rng) -> Result<Vec<u32>> {
    check_probability(p, true)?;
    Ok(support.masks().iter().copied().filter(|_| rng.random_bool(p)).collect())
}

fn check_probability(p: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { (0.0..=1.0).contains(&p) } else { p > 0.0 && p <= 1.0 };
    if !ok {
        return Err(Error::InvalidParameter(format!("probability {p} out of range")));
    }
    Ok(())
}

/// A probability formula and whether it had to be clamped to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Probability {
    pub value: f64,
    pub formula: f64,
    pub clamped: bool,
}

impl Probability {
    fn clamp(formula: f64) -> Self {
        let clamped = formula > 1.0;
        Self {
            value: formula.min(1.0),
            formula,
            clamped,
        }
    }

    fn fixed(value: f64) -> Self {
        Self {
            value,
            formula: value,
            clamped: false,
        }
    }
}

/// `1/(2√k)`.
pub fn sampling_probability(k: usize) -> Probability {
    Probability::clamp(1.0 / (2.0 * (k as f64).sqrt()))
}

/// `2√(log k)/k^{1/4}`.
pub fn warmup_probability(k: usize) -> Probability {
    let k = k as f64;
    Probability::clamp(2.0 * k.log2().sqrt() / k.powf(0.25))
}

/// The two sampling rates `4 log k/(5eδk^{(1+ℓ)/2})` and `2000 log k/(δk^{(1+ℓ)/2})`.
pub fn folding_probabilities(k: usize, delta: f64, ell: f64) -> (Probability, Probability) {
    let kf = k as f64;
    let scale = delta * kf.powf((1.0 + ell) / 2.0);
    let log = kf.log2();
    (
        Probability::clamp(4.0 * log / (5.0 * std::f64::consts::E * scale)),
        Probability::clamp(2000.0 * log / scale),
    )
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    Sampling,
    FoldingSampling,
    MaxCoefficient,
    GreedyMinBucket,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sampling" => Ok(Self::Sampling),
            "folding-sampling" => Ok(Self::FoldingSampling),
            "max-coefficient" => Ok(Self::MaxCoefficient),
            "greedy-min-bucket" => Ok(Self::GreedyMinBucket),
            other => Err(Error::Parse(format!(
                "unknown strategy `{other}` (expected sampling, folding-sampling, \
                 max-coefficient or greedy-min-bucket)"
            ))),
        }
    }
}

fn default_cap() -> usize {
    64
}

fn default_epsilon() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    #[serde(default)]
    pub strategy: Strategy,
    /// Replaces the per-node sampling rate of the sampling strategies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(default = "default_cap")]
    pub resample_cap: usize,
    /// Sampled batches must leave at most `(1 − ε)·k` buckets.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    /// Folding fraction for the folding strategy; measured per node when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Folding exponent for the folding strategy, default 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Sampling,
            probability: None,
            resample_cap: default_cap(),
            epsilon: default_epsilon(),
            seed: 0,
            delta: None,
            ell: None,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.probability {
            check_probability(p, false)?;
        }
        if self.resample_cap == 0 {
            return Err(Error::InvalidParameter("resample cap must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {d}")));
            }
        }
        if let Some(l) = self.ell {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::InvalidParameter(format!("ell must be non-negative, got {l}")));
            }
        }
        Ok(())
    }
}

/// One batch selection during a build.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeRecord {
    pub selection: usize,
    pub depth: usize,
    pub sparsity_before: usize,
    /// Largest restricted sparsity once the batch has been queried.
    pub sparsity_after: usize,
    pub batch: Vec<u32>,
    pub batch_size: usize,
    pub buckets: usize,
    pub resamples: usize,
    pub fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    pub clamped: bool,
}

#[derive(Clone, Debug)]
pub struct BuildOutcome {
    pub tree: ParityDecisionTree,
    pub log: Vec<NodeRecord>,
}

impl BuildOutcome {
    /// One JSON record per line.
    pub fn log_jsonl(&self) -> String {
        self.log
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
            .collect()
    }
}

struct Selection {
    batch: Vec<u32>,
    buckets: usize,
    resamples: usize,
    fallback: bool,
    probability: Option<f64>,
    clamped: bool,
}

/// Drops zero and dependent masks, keeping the first occurrence order.
fn independent_batch(n: usize, masks: &[u32]) -> (Vec<u32>, Gf2Basis) {
    let mut basis = Gf2Basis::empty_unchecked(n);
    let batch = masks.iter().copied().filter(|&m| basis.insert_mask(m)).collect();
    (batch, basis)
}

struct Builder<'a> {
    config: &'a BuildConfig,
    n: usize,
    log: Vec<NodeRecord>,
}

impl Builder<'_> {
    fn draw(&self, support: &Support, probs: &[Probability], rng: &mut ChaCha8Rng) -> Vec<u32> {
        let mut drawn: Vec<u32> = Vec::new();
        for p in probs {
            drawn.extend(support.masks().iter().copied().filter(|_| rng.random_bool(p.value)));
        }
        drawn
    }

    fn select_sampled(&self, g: &FourierSpectrum, selection: usize) -> Result<Selection> {
        let support = g.support();
        let k = g.sparsity();
        let probs: Vec<Probability> = match (self.config.probability, self.config.strategy) {
            (Some(p), Strategy::FoldingSampling) => vec![Probability::fixed(p); 2],
            (Some(p), _) => vec![Probability::fixed(p)],
            (None, Strategy::FoldingSampling) => {
                let ell = self.config.ell.unwrap_or(0.0);
                let delta = match self.config.delta {
                    Some(d) => d,
                    None => folding::folding_parameters(&support, ell).delta,
                };
                if delta > 0.0 {
                    let (p1, p2) = folding_probabilities(k, delta, ell);
                    vec![p1, p2]
                } else {
                    vec![sampling_probability(k)]
                }
            }
            (None, _) => vec![sampling_probability(k)],
        };
        let target = (1.0 - self.config.epsilon) * k as f64;
        let mut rng = trial_rng(self.config.seed, selection as u64);
        let mut best: Option<(Vec<u32>, usize)> = None;
        for attempt in 1..=self.config.resample_cap {
            let (batch, basis) = independent_batch(self.n, &self.draw(&support, &probs, &mut rng));
            if batch.is_empty() {
                continue;
            }
            let buckets = restriction::bucket_count_masks(support.masks(), &basis);
            if buckets as f64 <= target {
                return Ok(Selection {
                    batch,
                    buckets,
                    resamples: attempt,
                    fallback: false,
                    probability: Some(probs[0].value),
                    clamped: probs.iter().any(|p| p.clamped),
                });
            }
            if best.as_ref().is_none_or(|(_, b)| buckets < *b) {
                best = Some((batch, buckets));
            }
        }
        match best {
            Some((batch, buckets)) if buckets < k => Ok(Selection {
                batch,
                buckets,
                resamples: self.config.resample_cap,
                fallback: true,
                probability: Some(probs[0].value),
                clamped: probs.iter().any(|p| p.clamped),
            }),
            best => {
                let (best_batch, best_buckets) = best.unwrap_or((Vec::new(), k));
                Err(Error::ResampleCapExceeded {
                    sparsity: k,
                    best_batch,
                    best_buckets,
                })
            }
        }
    }

    /// One query merging at least one pair, so progress is strict.
    fn select_single(&self, g: &FourierSpectrum) -> Selection {
        let query = match self.config.strategy {
            Strategy::MaxCoefficient => {
                let mut by_size: Vec<(u32, i64)> = g.iter().collect();
                by_size.sort_by_key(|&(m, c)| (std::cmp::Reverse(c.abs()), m));
                by_size[0].0 ^ by_size[1].0
            }
            _ => {
                // a single direction merges exactly the pairs of its class
                let profile = folding::direction_classes(&g.support(), false);
                let max = profile.max_class;
                *profile
                    .classes
                    .iter()
                    .find(|&(_, &c)| c == max)
                    .expect("sparsity at least two")
                    .0
            }
        };
        let basis = Gf2Basis::from_masks(self.n, [query]);
        Selection {
            batch: vec![query],
            buckets: restriction::bucket_count_masks(g.support().masks(), &basis),
            resamples: 0,
            fallback: false,
            probability: None,
            clamped: false,
        }
    }

    /// Builds the subtree for the restricted spectrum `g`, first querying the
    /// still pending masks of the current batch.
    fn build(
        &mut self,
        g: FourierSpectrum,
        path: &AffineConstraintSystem,
        pending: &[u32],
        record: Option<usize>,
    ) -> Result<Node> {
        let k = g.sparsity();
        if k == 0 {
            return Err(Error::DegenerateInput);
        }
        if k == 1 {
            if let Some(r) = record {
                self.log[r].sparsity_after = self.log[r].sparsity_after.max(1);
            }
            let (lambda, c) = g.iter().next().expect("one coefficient");
            let scale = 1i64 << self.n;
            if c.abs() != scale {
                return Err(Error::NotBooleanValued {
                    x: path.base_point(),
                    value: c as i128,
                });
            }
            let sign = c.signum() as i8;
            if lambda == 0 {
                return Ok(Node::Leaf { leaf: sign });
            }
            return Ok(Node::Query {
                query: lambda,
                pos: Box::new(Node::Leaf { leaf: sign }),
                neg: Box::new(Node::Leaf { leaf: -sign }),
            });
        }
        // skip pending masks the path already determines
        let mut rest = pending;
        while let Some((&gamma, tail)) = rest.split_first() {
            if path.label_with_parity(gamma).0 != 0 {
                break;
            }
            rest = tail;
        }
        let (gamma, tail, record) = match rest.split_first() {
            Some((&gamma, tail)) => (gamma, tail.to_vec(), record),
            None => {
                if let Some(r) = record {
                    self.log[r].sparsity_after = self.log[r].sparsity_after.max(k);
                }
                let selection = self.log.len();
                let chosen = match self.config.strategy {
                    Strategy::Sampling | Strategy::FoldingSampling => self.select_sampled(&g, selection)?,
                    Strategy::MaxCoefficient | Strategy::GreedyMinBucket => self.select_single(&g),
                };
                self.log.push(NodeRecord {
                    selection,
                    depth: path.codimension(),
                    sparsity_before: k,
                    sparsity_after: 0,
                    batch_size: chosen.batch.len(),
                    batch: chosen.batch.clone(),
                    buckets: chosen.buckets,
                    resamples: chosen.resamples,
                    fallback: chosen.fallback,
                    probability: chosen.probability,
                    clamped: chosen.clamped,
                });
                let (&gamma, tail) = chosen.batch.split_first().expect("nonempty batch");
                (gamma, tail.to_vec(), Some(selection))
            }
        };
        let gamma_v = ParityVector::from_raw(gamma, self.n);
        let mut children = Vec::with_capacity(2);
        for bit in [false, true] {
            let mut child_path = path.clone();
            let (row, rhs) = child_path
                .push(gamma_v, bit)?
                .expect("pending mask is independent of the path");
            let child = restriction::restrict_by_row(&g, row, rhs);
            children.push(self.build(child, &child_path, &tail, record)?);
        }
        let neg = Box::new(children.pop().expect("two children"));
        let pos = Box::new(children.pop().expect("two children"));
        Ok(Node::Query { query: gamma, pos, neg })
    }
}

/// Builds a tree computing `f` with the configured parity-selection strategy.
pub fn build_pdt(f: &TruthTable, config: &BuildConfig) -> Result<BuildOutcome> {
    build_pdt_from_spectrum(&spectral::wht(f), config)
}

pub fn build_pdt_from_spectrum(s: &FourierSpectrum, config: &BuildConfig) -> Result<BuildOutcome> {
    config.validate()?;
    if s.is_empty() {
        return Err(Error::DegenerateInput);
    }
    let mut builder = Builder {
        config,
        n: s.n(),
        log: Vec::new(),
    };
    let path = AffineConstraintSystem::empty(s.n())?;
    let root = builder.build(s.clone(), &path, &[], None)?;
    Ok(BuildOutcome {
        tree: ParityDecisionTree { n: s.n(), root },
        log: builder.log,
    })
}

/// Aggregated Monte Carlo results over seeded independent trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialStats {
    pub trials: usize,
    pub k: usize,
    pub probability: f64,
    pub clamped: bool,
    pub bucket_counts: Vec<usize>,
    pub sample_sizes: Vec<usize>,
    /// Mean of `𝔅/k`.
    pub mean_ratio: f64,
    /// Normal-approximation 95% interval for the mean of `𝔅/k`.
    pub ci95: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_fraction: Option<f64>,
}

impl TrialStats {
    pub const CSV_HEADER: &'static str =
        "label,trials,k,probability,clamped,mean_ratio,ci_low,ci_high,success_fraction";

    fn from_trials(
        k: usize,
        probability: Probability,
        results: Vec<(usize, usize)>,
        success_threshold: Option<f64>,
    ) -> Self {
        let trials = results.len();
        let (bucket_counts, sample_sizes): (Vec<usize>, Vec<usize>) = results.into_iter().unzip();
        let ratios: Vec<f64> = bucket_counts.iter().map(|&b| b as f64 / k as f64).collect();
        let mean = ratios.iter().sum::<f64>() / trials as f64;
        let half = if trials > 1 {
            let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
            1.96 * (var / trials as f64).sqrt()
        } else {
            0.0
        };
        let success_fraction = success_threshold.map(|t| {
            bucket_counts.iter().filter(|&&b| b as f64 <= t + 1e-9).count() as f64 / trials as f64
        });
        Self {
            trials,
            k,
            probability: probability.value,
            clamped: probability.clamped,
            bucket_counts,
            sample_sizes,
            mean_ratio: mean,
            ci95: [mean - half, mean + half],
            success_threshold,
            success_fraction,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }

    pub fn csv_row(&self, label: &str) -> String {
        format!(
            "{label},{},{},{},{},{},{},{},{}",
            self.trials,
            self.k,
            self.probability,
            self.clamped,
            self.mean_ratio,
            self.ci95[0],
            self.ci95[1],
            self.success_fraction.map(|s| s.to_string()).unwrap_or_default()
        )
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    Ok(())
}

/// Runs trials in parallel; trial `i` draws from stream `i` of the master seed.
fn run_trials(
    support: &Support,
    probs: &[Probability],
    trials: usize,
    seed: u64,
) -> Vec<(usize, usize)> {
    let n = support.n();
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let mut drawn = Vec::new();
            for p in probs {
                drawn.extend(support.masks().iter().copied().filter(|_| rng.random_bool(p.value)));
            }
            let basis = Gf2Basis::from_masks(n, drawn.iter().copied());
            (restriction::bucket_count_masks(support.masks(), &basis), drawn.len())
        })
        .collect()
}

/// `𝔅(f, span ℛ)/k` for random `ℛ` drawn at rate `p`.
pub fn estimate_bucket_reduction(s: &FourierSpectrum, p: f64, trials: usize, seed: u64) -> Result<TrialStats> {
    check_probability(p, true)?;
    check_trials(trials)?;
    let k = s.sparsity();
    if k < 4 {
        return Err(Error::SparsityTooSmall { k });
    }
    let prob = Probability::fixed(p);
    let results = run_trials(&s.support(), &[prob], trials, seed);
    Ok(TrialStats::from_trials(k, prob, results, None))
}

/// Fraction of trials halving the bucket count at the warm-up rate.
pub fn warmup_success_rate(s: &FourierSpectrum, trials: usize, seed: u64) -> Result<TrialStats> {
    check_trials(trials)?;
    let k = s.sparsity();
    if k < 4 {
        return Err(Error::SparsityTooSmall { k });
    }
    let prob = warmup_probability(k);
    let results = run_trials(&s.support(), &[prob], trials, seed);
    Ok(TrialStats::from_trials(k, prob, results, Some(k as f64 / 2.0)))
}

/// Two independent draws per trial at the folding rates, checked against
/// `𝔅 ≤ k − δk/6`.
pub fn folding_sampling_trial(
    s: &FourierSpectrum,
    delta: f64,
    ell: f64,
    trials: usize,
    seed: u64,
) -> Result<TrialStats> {
    check_trials(trials)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1], got {delta}")));
    }
    let k = s.sparsity();
    if k < 4 {
        return Err(Error::SparsityTooSmall { k });
    }
    let support = s.support();
    let actual = folding::folding_parameters(&support, ell).delta;
    if actual < delta {
        return Err(Error::NotFolding { delta, ell, actual });
    }
    let (p1, p2) = folding_probabilities(k, delta, ell);
    let results = run_trials(&support, &[p1, p2], trials, seed);
    let reported = Probability {
        value: p1.value.max(p2.value),
        formula: p1.formula.max(p2.formula),
        clamped: p1.clamped || p2.clamped,
    };
    let threshold = k as f64 - delta * k as f64 / 6.0;
    Ok(TrialStats::from_trials(k, reported, results, Some(threshold)))
}

/// `(1 − p)^d ≤ 1 − pd/2`, evaluated exactly.
pub fn check_calculus_inequality(d: u32, p: &BigRational) -> Result<bool> {
    let one = BigRational::one();
    if p.is_negative() || *p > one {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in [0, 1]")));
    }
    let dp = p * BigRational::from_integer(BigInt::from(d));
    if dp > one {
        return Err(Error::InvalidParameter(format!("p·d = {dp} exceeds 1")));
    }
    let lhs = num_traits::pow(&one - p, d as usize);
    let rhs = &one - dp / BigRational::from_integer(BigInt::from(2));
    Ok(lhs <= rhs)
}

/// Grid sweep over `d ≤ max_d` and `p = j/denominator` with `pd ≤ 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CalculusSweep {
    pub points: usize,
    pub failures: Vec<(u32, u64)>,
}

pub fn calculus_sweep(max_d: u32, denominator: u64) -> Result<CalculusSweep> {
    if denominator == 0 {
        return Err(Error::InvalidParameter("denominator must be positive".into()));
    }
    let grid: Vec<(u32, u64)> = (0..=max_d)
        .flat_map(|d| {
            (0..=denominator)
                .filter(move |&j| j * d as u64 <= denominator)
                .map(move |j| (d, j))
        })
        .collect();
    let results: Vec<Result<bool>> = grid
        .par_iter()
        .map(|&(d, j)| {
            let p = BigRational::new(BigInt::from(j), BigInt::from(denominator));
            check_calculus_inequality(d, &p)
        })
        .collect();
    let mut failures = Vec::new();
    for (point, ok) in grid.iter().zip(results) {
        if !ok? {
            failures.push(*point);
        }
    }
    Ok(CalculusSweep {
        points: grid.len(),
        failures,
    })
}

/// Per-depth summary of a build log, for inspecting depth budgets.
pub fn depth_trace(log: &[NodeRecord]) -> BTreeMap<usize, Vec<(usize, usize)>> {
    let mut out: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for r in log {
        out.entry(r.depth).or_default().push((r.sparsity_before, r.sparsity_after));
    }
    out
}
