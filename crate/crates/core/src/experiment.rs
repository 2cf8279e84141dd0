//! Config-driven batch runs over a function corpus.
//!
//! A TOML config lists corpus entries and the analyses to run on each. The
//! report is deterministic given the config: entries are processed in parallel
//! but assembled in config order, and every random choice is seeded from the
//! master seed and the entry index.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::FunctionSpec;
use crate::error::{Error, Result};
use crate::folding;
use crate::gf2::{self, ParityVector};
use crate::pdt::{self, BuildConfig, Strategy};
use crate::restriction::{self, AffineConstraintSystem};
use crate::spectral::{self, FourierSpectrum, TruthTable};

pub const REPORT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Spectrum,
    Parseval,
    Titsworth,
    PairCondition,
    ThreeFold,
    SingleDirection,
    SignFeasibility,
    Folding,
    Restriction,
    Pdt,
    BucketReduction,
    Warmup,
    FoldingSampling,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::Parseval => "parseval",
            Self::Titsworth => "titsworth",
            Self::PairCondition => "pair-condition",
            Self::ThreeFold => "three-fold",
            Self::SingleDirection => "single-direction",
            Self::SignFeasibility => "sign-feasibility",
            Self::Folding => "folding",
            Self::Restriction => "restriction",
            Self::Pdt => "pdt",
            Self::BucketReduction => "bucket-reduction",
            Self::Warmup => "warmup",
            Self::FoldingSampling => "folding-sampling",
        }
    }
}

fn default_max_n() -> usize {
    20
}

fn default_builds() -> usize {
    1
}

fn default_cap() -> usize {
    BuildConfig::default().resample_cap
}

fn default_epsilon() -> f64 {
    BuildConfig::default().epsilon
}

fn default_trials() -> usize {
    200
}

fn default_ells() -> Vec<f64> {
    vec![0.0, 0.25, 0.5]
}

fn default_systems() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdtSettings {
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(default = "default_cap")]
    pub resample_cap: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    /// Number of independently seeded builds per function.
    #[serde(default = "default_builds")]
    pub builds: usize,
}

impl Default for PdtSettings {
    fn default() -> Self {
        Self {
            strategy: Strategy::default(),
            probability: None,
            resample_cap: default_cap(),
            epsilon: default_epsilon(),
            delta: None,
            ell: None,
            builds: default_builds(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSettings {
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Rate for the bucket-reduction estimate; `1/(2√k)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    /// Folding fraction for the folding-sampling trial; measured when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default)]
    pub ell: f64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            probability: None,
            delta: None,
            ell: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoldingSettings {
    #[serde(default = "default_ells")]
    pub ells: Vec<f64>,
}

impl Default for FoldingSettings {
    fn default() -> Self {
        Self { ells: default_ells() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionSettings {
    /// Random constraint systems per function.
    #[serde(default = "default_systems")]
    pub systems: usize,
}

impl Default for RestrictionSettings {
    fn default() -> Self {
        Self { systems: default_systems() }
    }
}

/// A corpus entry; `count` expands a random family over consecutive seeds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusEntry {
    #[serde(flatten)]
    pub spec: FunctionSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

impl<'de> Deserialize<'de> for CorpusEntry {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let mut table = toml::Table::deserialize(d)?;
        let count = match table.remove("count") {
            None => None,
            Some(toml::Value::Integer(c)) if c >= 1 => Some(c as usize),
            Some(other) => return Err(D::Error::custom(format!("count must be a positive integer, got {other}"))),
        };
        let spec = FunctionSpec::deserialize(toml::Value::Table(table)).map_err(D::Error::custom)?;
        Ok(Self { spec, count })
    }
}

impl CorpusEntry {
    fn expand(&self) -> Result<Vec<FunctionSpec>> {
        match (&self.spec, self.count) {
            (_, None) | (_, Some(1)) => Ok(vec![self.spec.clone()]),
            (FunctionSpec::Random { n, seed }, Some(c)) => Ok((0..c as u64)
                .map(|i| FunctionSpec::Random {
                    n: *n,
                    seed: seed.wrapping_add(i),
                })
                .collect()),
            (spec, Some(_)) => Err(Error::InvalidParameter(format!(
                "count is only meaningful for the random family, not `{spec}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    /// Adds wall-clock timings to the report, which then stops being reproducible.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub pdt: PdtSettings,
    #[serde(default)]
    pub mc: McSettings,
    #[serde(default)]
    pub folding: FoldingSettings,
    #[serde(default)]
    pub restriction: RestrictionSettings,
    #[serde(default)]
    pub corpus: Vec<CorpusEntry>,
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_n > crate::corpus::MAX_TABLE_DIM {
            return Err(Error::InvalidParameter(format!(
                "max_n = {} exceeds the truth-table limit of {}",
                self.max_n,
                crate::corpus::MAX_TABLE_DIM
            )));
        }
        if self.pdt.builds == 0 || self.mc.trials == 0 {
            return Err(Error::InvalidParameter("builds and trials must be at least 1".into()));
        }
        for spec in self.functions()? {
            let n = spec.n()?;
            if n > self.max_n {
                return Err(Error::InvalidParameter(format!(
                    "corpus entry `{spec}` has n = {n}, above max_n = {}",
                    self.max_n
                )));
            }
        }
        Ok(())
    }

    /// Corpus entries with counts expanded, in config order.
    pub fn functions(&self) -> Result<Vec<FunctionSpec>> {
        let mut out = Vec::new();
        for e in &self.corpus {
            out.extend(e.expand()?);
        }
        Ok(out)
    }

    fn build_config(&self, seed: u64) -> BuildConfig {
        BuildConfig {
            strategy: self.pdt.strategy,
            probability: self.pdt.probability,
            resample_cap: self.pdt.resample_cap,
            epsilon: self.pdt.epsilon,
            seed,
            delta: self.pdt.delta,
            ell: self.pdt.ell,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionResult {
    pub label: String,
    pub spec: FunctionSpec,
    pub n: usize,
    pub sparsity: usize,
    /// Analysis name → its findings.
    pub results: BTreeMap<String, Value>,
    /// Check name → pass/fail.
    pub verdicts: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl FunctionResult {
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub functions: Vec<FunctionResult>,
    pub all_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,n,sparsity,checks,passed,all_pass\n");
        for f in &self.functions {
            let passed = f.verdicts.values().filter(|&&v| v).count();
            out += &format!(
                "{},{},{},{},{},{}\n",
                f.label,
                f.n,
                f.sparsity,
                f.verdicts.len(),
                passed,
                f.passed()
            );
        }
        out
    }
}

/// Seed for entry `index`, independent across entries.
fn entry_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    rng.random()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("finding serializes")
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    table: TruthTable,
    spectrum: FourierSpectrum,
    seed: u64,
    results: BTreeMap<String, Value>,
    verdicts: BTreeMap<String, bool>,
}

impl Run<'_> {
    fn verdict(&mut self, name: &str, ok: bool) {
        self.verdicts.insert(name.to_string(), ok);
    }

    fn analyze(&mut self, a: Analysis) -> Result<()> {
        let s = &self.spectrum;
        let k = s.sparsity();
        let support = s.support();
        let value = match a {
            Analysis::Spectrum => {
                let l1 = spectral::spectral_l1(s);
                let v = json!({
                    "plateaued": spectral::is_plateaued(s),
                    "l1": format!("{l1}"),
                    "l1_squared_within_sparsity": spectral::l1_squared_within_sparsity(s),
                });
                self.verdict("l1-squared-within-sparsity", spectral::l1_squared_within_sparsity(s));
                v
            }
            Analysis::Parseval => {
                let ok = spectral::verify_parseval(s);
                self.verdict("parseval", ok);
                json!({ "holds": ok })
            }
            Analysis::Titsworth => {
                let v = spectral::verify_titsworth(s);
                self.verdict("titsworth", v.is_empty());
                json!({ "violations": to_value(&v) })
            }
            Analysis::PairCondition => {
                let r = folding::check_pair_condition(&support);
                self.verdict("pair-condition", r.holds);
                to_value(&r)
            }
            Analysis::ThreeFold => match folding::verify_three_fold(s) {
                Ok(r) => {
                    self.verdict("three-fold", r.all_witnessed());
                    to_value(&r)
                }
                Err(Error::SparsityTooSmall { k }) => json!({ "skipped": format!("k = {k} ≤ 4") }),
                Err(e) => return Err(e),
            },
            Analysis::SingleDirection => {
                let r = folding::single_direction_structure(s);
                self.verdict("single-direction", r.sole_direction_holds);
                self.verdict("trivial-direction-claims", r.trivial_claims_hold);
                let sole: Vec<Value> = r
                    .entries
                    .iter()
                    .filter(|e| e.sole_partner.is_some())
                    .map(to_value)
                    .collect();
                json!({
                    "plateaued": r.plateaued,
                    "positive_count": r.positive_count,
                    "negative_count": r.negative_count,
                    "sole_direction_entries": sole,
                    "trivial_only": r.trivial_only,
                })
            }
            Analysis::SignFeasibility => {
                let r = folding::sign_feasibility(&support);
                let ok = match &r {
                    folding::SignFeasibility::Feasible { signs } => folding::check_sign_certificate(&support, signs),
                    folding::SignFeasibility::Infeasible { .. } => false,
                };
                self.verdict("sign-feasibility", ok);
                to_value(&r)
            }
            Analysis::Folding => {
                let p = folding::direction_classes(&support, false);
                let params: Vec<Value> = self
                    .cfg
                    .folding
                    .ells
                    .iter()
                    .map(|&l| to_value(&folding::folding_parameters(&support, l)))
                    .collect();
                self.verdict("class-sum", p.classes.values().sum::<u64>() == p.total_pairs);
                json!({
                    "directions": p.classes.len(),
                    "min_class": p.min_class,
                    "max_class": p.max_class,
                    "histogram": p.histogram,
                    "parameters": params,
                })
            }
            Analysis::Restriction => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let n = s.n();
                let mut worst_slack = i64::MAX;
                let mut ok = true;
                for _ in 0..self.cfg.restriction.systems {
                    let x0 = rng.random_range(0..=gf2::full_mask(n));
                    let t = rng.random_range(0..=n);
                    let cons: Vec<(ParityVector, bool)> = (0..t)
                        .map(|_| {
                            let g = rng.random_range(0..=gf2::full_mask(n));
                            (ParityVector::from_raw(g, n), gf2::dot(g, x0))
                        })
                        .collect();
                    let sys = AffineConstraintSystem::new(n, &cons)?;
                    let gamma: Vec<ParityVector> = cons.iter().map(|&(g, _)| g).collect();
                    let restricted = restriction::restrict(s, &sys)?.sparsity();
                    let bound = restriction::identification_bound_check(&support, &gamma)?;
                    ok &= restricted <= bound.actual && bound.holds;
                    worst_slack = worst_slack.min(2 * (bound.k as i64) - bound.h as i64 - 2 * bound.actual as i64);
                }
                self.verdict("restriction-bounds", ok);
                json!({ "systems": self.cfg.restriction.systems, "min_identification_slack_x2": worst_slack })
            }
            Analysis::Pdt => {
                let budget = 4.0 * (k as f64).sqrt();
                let mut builds = Vec::new();
                let mut sound = true;
                let mut within = true;
                for b in 0..self.cfg.pdt.builds {
                    let cfg = self.cfg.build_config(self.seed.wrapping_add(b as u64));
                    let out = pdt::build_pdt_from_spectrum(s, &cfg)?;
                    let verified = pdt::verify_tree(&out.tree, &self.table)? && pdt::paths_independent(&out.tree);
                    let d = out.tree.depth();
                    sound &= verified;
                    within &= d as f64 <= budget;
                    let (queries, leaves) = out.tree.size();
                    builds.push(json!({
                        "seed": cfg.seed,
                        "depth": d,
                        "queries": queries,
                        "leaves": leaves,
                        "verified": verified,
                        "selections": out.log.len(),
                        "fallbacks": out.log.iter().filter(|r| r.fallback).count(),
                    }));
                }
                self.verdict("pdt-sound", sound);
                self.verdict("pdt-depth-budget", within);
                json!({ "strategy": self.cfg.pdt.strategy, "depth_budget": budget, "builds": builds })
            }
            Analysis::BucketReduction => {
                if k < 4 {
                    json!({ "skipped": format!("k = {k} < 4") })
                } else {
                    let p = self.cfg.mc.probability.unwrap_or(pdt::sampling_probability(k).value);
                    summary(&pdt::estimate_bucket_reduction(s, p, self.cfg.mc.trials, self.seed)?)
                }
            }
            Analysis::Warmup => {
                if k < 4 {
                    json!({ "skipped": format!("k = {k} < 4") })
                } else {
                    let st = pdt::warmup_success_rate(s, self.cfg.mc.trials, self.seed)?;
                    summary(&st)
                }
            }
            Analysis::FoldingSampling => {
                let ell = self.cfg.mc.ell;
                let delta = self
                    .cfg
                    .mc
                    .delta
                    .unwrap_or_else(|| folding::folding_parameters(&support, ell).delta);
                if k < 4 || delta <= 0.0 {
                    json!({ "skipped": format!("k = {k}, measured delta = {delta}") })
                } else {
                    match pdt::folding_sampling_trial(s, delta.min(1.0), ell, self.cfg.mc.trials, self.seed) {
                        Ok(st) => summary(&st),
                        Err(e @ Error::NotFolding { .. }) => json!({ "skipped": e.to_string() }),
                        Err(e) => return Err(e),
                    }
                }
            }
        };
        self.results.insert(a.name().to_string(), value);
        Ok(())
    }
}

/// Trial stats without the per-trial vectors.
fn summary(st: &pdt::TrialStats) -> Value {
    json!({
        "trials": st.trials,
        "k": st.k,
        "probability": st.probability,
        "clamped": st.clamped,
        "mean_ratio": st.mean_ratio,
        "ci95": st.ci95,
        "success_threshold": st.success_threshold,
        "success_fraction": st.success_fraction,
    })
}

fn run_function(cfg: &ExperimentConfig, index: usize, spec: &FunctionSpec) -> Result<FunctionResult> {
    let start = Instant::now();
    let table = spec.generate()?;
    let spectrum = spectral::wht(&table);
    let mut run = Run {
        cfg,
        table,
        spectrum,
        seed: entry_seed(cfg.seed, index),
        results: BTreeMap::new(),
        verdicts: BTreeMap::new(),
    };
    let mut analyses = cfg.analyses.clone();
    analyses.dedup();
    for a in analyses {
        run.analyze(a)?;
    }
    Ok(FunctionResult {
        label: spec.label(),
        spec: spec.clone(),
        n: run.table.n(),
        sparsity: run.spectrum.sparsity(),
        results: run.results,
        verdicts: run.verdicts,
        elapsed_ms: cfg.record_timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let specs = cfg.functions()?;
    let functions = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| run_function(cfg, i, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        version: REPORT_VERSION.to_string(),
        config: cfg.clone(),
        all_pass: functions.iter().all(FunctionResult::passed),
        functions,
        elapsed_ms: cfg.record_timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_FOLD: &str = r#"
seed = 3
analyses = ["three-fold", "parseval", "titsworth"]

[[corpus]]
family = "addressing"
k = 16

[[corpus]]
family = "inner-product"
m = 2

[[corpus]]
family = "random"
n = 6
seed = 100
count = 20
"#;

    #[test]
    fn three_fold_corpus_passes() {
        let cfg = ExperimentConfig::from_toml(THREE_FOLD).unwrap();
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.functions.len(), 22);
        assert!(report.all_pass);
        assert!(report.functions.iter().all(|f| f.verdicts.contains_key("three-fold")));
    }

    #[test]
    fn empty_corpus_gives_empty_report() {
        let report = run_experiment(&ExperimentConfig::from_toml("").unwrap()).unwrap();
        assert!(report.functions.is_empty());
        assert!(report.all_pass);
    }

    #[test]
    fn oversized_inputs_rejected() {
        let cfg = "max_n = 8\n[[corpus]]\nfamily = \"random\"\nn = 9\nseed = 1\n";
        assert!(ExperimentConfig::from_toml(cfg).is_err());
        assert!(ExperimentConfig::from_toml("max_n = 21").is_err());
        let count = "[[corpus]]\nfamily = \"addressing\"\nk = 16\ncount = 2\n";
        assert!(ExperimentConfig::from_toml(count).is_err());
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = ExperimentConfig::from_toml("seed = 1\nanalyses = [\"nope\"]\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = ExperimentConfig::from_toml(
            r#"
seed = 11
analyses = ["spectrum", "pair-condition", "single-direction", "sign-feasibility",
            "folding", "restriction", "pdt", "bucket-reduction", "warmup", "folding-sampling"]
[mc]
trials = 20
[restriction]
systems = 10
[[corpus]]
family = "modified-addressing"
k = 4
[[corpus]]
family = "random"
n = 5
seed = 1
count = 3
"#,
        )
        .unwrap();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.all_pass, "{}", a.to_json());
        assert_eq!(a.to_csv().lines().count(), 5);
    }
}
