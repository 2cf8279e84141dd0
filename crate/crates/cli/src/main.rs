use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use parspec::corpus::FunctionSpec;
use parspec::experiment::{self, ExperimentConfig};
use parspec::folding::{self, SignFeasibility};
use parspec::pdt::{self, BuildConfig, ParityDecisionTree, Strategy, TrialStats};
use parspec::restriction::{self, AffineConstraintSystem};
use parspec::spectral::{self, FourierSpectrum, TruthTable};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "parspec", version, about = "Fourier-sparse Boolean function analysis and parity decision trees")]
struct Cli {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Emit CSV where a tabular form exists.
    #[arg(long, global = true)]
    csv: bool,
    /// Reject inputs with more variables than this.
    #[arg(long, global = true, default_value_t = 20)]
    max_n: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct Input {
    /// Truth table JSON file `{n, values}`.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Spectrum JSON file `{n, coeffs: [{mask, num}]}` with coefficients scaled by 2ⁿ.
    #[arg(long)]
    spectrum: Option<PathBuf>,
    /// Generator spec such as `addressing:k=16` or `random:n=6,seed=1`.
    #[arg(long = "gen")]
    generate: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum summary: sparsity, plateaued, spectral norm, exact identities.
    Analyze {
        #[command(flatten)]
        input: Input,
    },
    /// Folding profile, folding parameters and heavy participants.
    Fold {
        #[command(flatten)]
        input: Input,
        /// Exponents at which folding parameters are reported.
        #[arg(long = "ell", default_values_t = [0.0, 0.5])]
        ells: Vec<f64>,
        /// Also report heavy participants at this folding fraction (first exponent).
        #[arg(long)]
        delta: Option<f64>,
        /// Sparsity from which the participant lower bound is enforced.
        #[arg(long, default_value_t = folding::HEAVY_PARTICIPANT_GATE)]
        gate_k: usize,
        /// Include the per-direction class sizes and pair lists.
        #[arg(long)]
        pairs: bool,
    },
    /// Structural verifiers.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
    /// Restrict to an affine subspace given as a JSON list of `{mask, bit}`.
    Restrict {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        constraints: PathBuf,
    },
    /// Parity decision trees.
    Pdt {
        #[command(subcommand)]
        action: PdtAction,
    },
    /// Monte Carlo estimators.
    Mc {
        #[command(subcommand)]
        estimator: Estimator,
    },
    /// Generate a corpus function.
    Gen {
        spec: String,
        #[arg(long, value_enum, default_value_t = GenFormat::Table)]
        format: GenFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a TOML experiment config.
    Experiment {
        config: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the CSV summary here.
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Check {
    PairCondition {
        #[command(flatten)]
        input: Input,
    },
    ThreeFold {
        #[command(flatten)]
        input: Input,
    },
    SingleDirection {
        #[command(flatten)]
        input: Input,
    },
    SignFeasibility {
        #[command(flatten)]
        input: Input,
    },
    Titsworth {
        #[command(flatten)]
        input: Input,
    },
    Parseval {
        #[command(flatten)]
        input: Input,
    },
    /// The support that meets the pair condition but admits no signs.
    Counterexample {
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    /// Same-target and cross-target class sizes of the addressing function.
    AddressingProfile {
        #[arg(long)]
        k: usize,
    },
    /// `(1 − p)^d ≤ 1 − pd/2` over a rational grid.
    Calculus {
        #[arg(long, default_value_t = 100)]
        max_d: u32,
        #[arg(long, default_value_t = 100)]
        denominator: u64,
    },
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum, default_value_t = StrategyArg::Sampling)]
    strategy: StrategyArg,
    #[arg(long)]
    probability: Option<f64>,
    #[arg(long, default_value_t = 64)]
    resample_cap: usize,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    ell: Option<f64>,
}

#[derive(Subcommand)]
enum PdtAction {
    Build {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        build: BuildArgs,
        /// Write the tree JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the build log (JSON lines) here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        tree: PathBuf,
    },
    Depth {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum Estimator {
    /// Bucket reduction under random parity sampling.
    #[command(name = "bucket-reduction", alias = "theorem-1")]
    BucketReduction {
        #[command(flatten)]
        input: Input,
        /// Sampling rate; `1/(2√k)` when absent.
        #[arg(long)]
        probability: Option<f64>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Fraction of draws halving the bucket count.
    Warmup {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Two-rate sampling on a folding function.
    #[command(name = "folding-sampling", alias = "theorem-2")]
    FoldingSampling {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        ell: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Sampling,
    FoldingSampling,
    MaxCoefficient,
    GreedyMinBucket,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Sampling => Strategy::Sampling,
            StrategyArg::FoldingSampling => Strategy::FoldingSampling,
            StrategyArg::MaxCoefficient => Strategy::MaxCoefficient,
            StrategyArg::GreedyMinBucket => Strategy::GreedyMinBucket,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFormat {
    Table,
    Spectrum,
}

/// Result of a command: text for humans, JSON for machines, and whether all
/// checks it ran passed.
struct Outcome {
    json: Value,
    text: String,
    csv: Option<String>,
    pass: bool,
}

impl Outcome {
    fn new(json: Value, text: String, pass: bool) -> Self {
        Self { json, text, csv: None, pass }
    }
}

struct Ctx {
    seed: u64,
    max_n: usize,
}

impl Ctx {
    fn check_n(&self, n: usize) -> Result<()> {
        if n > self.max_n {
            bail!("input has n = {n}, above --max-n {}", self.max_n);
        }
        Ok(())
    }

    fn spectrum(&self, input: &Input) -> Result<FourierSpectrum> {
        if let Some(path) = &input.spectrum {
            let s = FourierSpectrum::from_json(&read(path)?).with_context(|| format!("reading {}", path.display()))?;
            self.check_n(s.n())?;
            return Ok(s);
        }
        Ok(spectral::wht(&self.table(input)?))
    }

    fn table(&self, input: &Input) -> Result<TruthTable> {
        if let Some(path) = &input.table {
            let t = TruthTable::from_json(&read(path)?).with_context(|| format!("reading {}", path.display()))?;
            self.check_n(t.n())?;
            return Ok(t);
        }
        if let Some(spec) = &input.generate {
            let spec: FunctionSpec = spec.parse()?;
            self.check_n(spec.n()?)?;
            return Ok(spec.generate()?);
        }
        let s = self.spectrum(input)?;
        spectral::inverse_wht(&s).context("spectrum is not a Boolean function")
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("output serializes")
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn analyze(ctx: &Ctx, input: &Input) -> Result<Outcome> {
    let s = ctx.spectrum(input)?;
    let parseval = spectral::verify_parseval(&s);
    let titsworth = spectral::verify_titsworth(&s);
    let l1 = spectral::spectral_l1(&s);
    let plateaued = spectral::is_plateaued(&s);
    let boolean = spectral::inverse_wht(&s).is_ok();
    let json = json!({
        "n": s.n(),
        "sparsity": s.sparsity(),
        "plateaued": plateaued,
        "l1": l1.to_string(),
        "l1_squared_within_sparsity": spectral::l1_squared_within_sparsity(&s),
        "parseval": parseval,
        "titsworth_violations": titsworth.len(),
        "boolean": boolean,
        "coeffs": s.iter().map(|(m, c)| json!({"mask": m, "num": c})).collect::<Vec<_>>(),
    });
    let text = format!(
        "n: {}\nsparsity: {}\nplateaued: {}\nspectral l1: {}\nparseval: {}\ntitsworth violations: {}\nboolean: {}",
        s.n(),
        s.sparsity(),
        yes_no(plateaued),
        l1,
        yes_no(parseval),
        titsworth.len(),
        yes_no(boolean)
    );
    Ok(Outcome::new(json, text, parseval && titsworth.is_empty() && boolean))
}

fn fold(ctx: &Ctx, input: &Input, ells: &[f64], delta: Option<f64>, gate_k: usize, pairs: bool) -> Result<Outcome> {
    let s = ctx.spectrum(input)?;
    let support = s.support();
    let profile = folding::direction_classes(&support, pairs);
    let params: Vec<_> = ells.iter().map(|&l| folding::folding_parameters(&support, l)).collect();
    let mut text = format!(
        "k: {}\npairs: {}\ndirections: {}\nclass sizes: {}..{}\nhistogram:",
        profile.k,
        profile.total_pairs,
        profile.classes.len(),
        profile.min_class,
        profile.max_class
    );
    for (size, count) in &profile.histogram {
        text += &format!(" {size}×{count}");
    }
    for p in &params {
        text += &format!(
            "\nell {}: threshold {}, heavy pairs {}, delta {:.6}",
            p.ell, p.threshold, p.heavy_pair_count, p.delta
        );
    }
    let mut json = json!({
        "k": profile.k,
        "total_pairs": profile.total_pairs,
        "min_class": profile.min_class,
        "max_class": profile.max_class,
        "histogram": profile.histogram,
        "parameters": to_value(&params),
    });
    if pairs {
        json["classes"] = to_value(&profile.classes);
        json["pairs"] = to_value(&profile.pairs);
    }
    let mut pass = true;
    if let Some(delta) = delta {
        let ell = ells.first().copied().unwrap_or(0.0);
        let h = folding::heavy_participants(&support, delta, ell, gate_k);
        text += &format!(
            "\nheavy participants at delta {delta}, ell {ell}: {} (lower bound {:.3}, {})",
            h.participants.len(),
            h.lower_bound,
            match h.bound_holds {
                Some(true) => "holds",
                Some(false) => "VIOLATED",
                None => "not enforced",
            }
        );
        pass = h.bound_holds != Some(false);
        json["heavy_participants"] = to_value(&h);
    }
    Ok(Outcome::new(json, text, pass))
}

fn verify(ctx: &Ctx, check: &Check) -> Result<Outcome> {
    Ok(match check {
        Check::PairCondition { input } => {
            let r = folding::check_pair_condition(&ctx.spectrum(input)?.support());
            let text = match r.first_violation {
                None => "pair condition holds".to_string(),
                Some(v) => format!(
                    "pair condition fails: direction {} has the single pair ({}, {})",
                    v.direction, v.pair.0, v.pair.1
                ),
            };
            Outcome::new(to_value(&r), text, r.holds)
        }
        Check::ThreeFold { input } => {
            let r = folding::verify_three_fold(&ctx.spectrum(input)?)?;
            let text = format!(
                "k: {}\nwitnessed: {}\nwithout witness: {:?}",
                r.k,
                r.witnesses.len(),
                r.failures
            );
            Outcome::new(to_value(&r), text, r.all_witnessed())
        }
        Check::SingleDirection { input } => {
            let r = folding::single_direction_structure(&ctx.spectrum(input)?);
            let mut text = format!(
                "k: {}\nplateaued: {}\npositive/negative: {}/{}\n",
                r.k,
                yes_no(r.plateaued),
                r.positive_count,
                r.negative_count
            );
            for e in r.entries.iter().filter(|e| e.sole_partner.is_some()) {
                text += &format!(
                    "alpha {}: sole nontrivial partner {} with class size {}\n",
                    e.alpha,
                    e.sole_partner.unwrap_or_default(),
                    e.sole_class_size.unwrap_or_default()
                );
            }
            text += &format!(
                "sole-direction classes equal k/2: {}\ntrivial-direction claims consistent: {}",
                yes_no(r.sole_direction_holds),
                yes_no(r.trivial_claims_hold)
            );
            let pass = r.sole_direction_holds && r.trivial_claims_hold;
            Outcome::new(to_value(&r), text, pass)
        }
        Check::SignFeasibility { input } => {
            let support = ctx.spectrum(input)?.support();
            sign_outcome(&support, folding::sign_feasibility(&support), true)
        }
        Check::Titsworth { input } => {
            let v = spectral::verify_titsworth(&ctx.spectrum(input)?);
            let text = if v.is_empty() {
                "titsworth condition holds".to_string()
            } else {
                format!("{} directions violate the titsworth condition", v.len())
            };
            Outcome::new(json!({ "violations": to_value(&v) }), text, v.is_empty())
        }
        Check::Parseval { input } => {
            let ok = spectral::verify_parseval(&ctx.spectrum(input)?);
            Outcome::new(json!({ "holds": ok }), format!("parseval: {}", yes_no(ok)), ok)
        }
        Check::Counterexample { n } => {
            ctx.check_n(*n)?;
            let support = folding::counterexample_support(*n)?;
            let pair = folding::check_pair_condition(&support);
            let feas = folding::sign_feasibility(&support);
            let mut out = sign_outcome(&support, feas, false);
            out.text = format!(
                "support: {:?}\npair condition: {}\n{}",
                support.masks(),
                yes_no(pair.holds),
                out.text
            );
            out.json = json!({ "support": support.masks(), "pair_condition": pair.holds, "signs": out.json });
            out.pass &= pair.holds;
            out
        }
        Check::AddressingProfile { k } => {
            let p = folding::addressing_folding_profile(*k)?;
            let case1: Vec<u64> = p.case1_class_sizes.keys().copied().collect();
            let case2: Vec<u64> = p.case2_class_sizes.keys().copied().collect();
            let text = format!(
                "k: {}\nsame-target pairs: {} (class sizes {:?})\ncross-target pairs: {} (class sizes {:?})\n\
                 cross-target fraction: {}/{} = {:.6} (bound {:.6})\nnote: {}",
                p.k,
                p.case1_pairs,
                case1,
                p.case2_pairs,
                case2,
                p.case2_fraction[0],
                p.case2_fraction[1],
                p.case2_fraction_f64,
                p.case2_fraction_bound,
                p.note
            );
            let pass = p.case2_all_sqrt_k && p.case2_fraction_holds;
            Outcome::new(to_value(&p), text, pass)
        }
        Check::Calculus { max_d, denominator } => {
            let sweep = pdt::calculus_sweep(*max_d, *denominator)?;
            let text = format!("grid points: {}\nfailures: {:?}", sweep.points, sweep.failures);
            let pass = sweep.failures.is_empty();
            Outcome::new(to_value(&sweep), text, pass)
        }
    })
}

/// `expect_feasible` marks supports taken from real functions.
fn sign_outcome(support: &spectral::Support, r: SignFeasibility, expect_feasible: bool) -> Outcome {
    let (text, pass) = match &r {
        SignFeasibility::Feasible { signs } => {
            let certified = folding::check_sign_certificate(support, signs);
            (format!("sign assignment: feasible (certificate checks: {})", yes_no(certified)), certified && expect_feasible)
        }
        SignFeasibility::Infeasible { witness } => {
            let mut t = format!("sign assignment: infeasible, {} contradictory constraints", witness.len());
            for c in witness {
                let [(a, b), (p, q)] = c.pairs;
                t += &format!("\n  direction {}: s{a}·s{b} = −s{p}·s{q}", c.direction);
            }
            let valid = folding::witness_is_contradiction(support, witness);
            (t, valid && !expect_feasible)
        }
    };
    Outcome::new(to_value(&r), text, pass)
}

fn restrict(ctx: &Ctx, input: &Input, constraints: &Path) -> Result<Outcome> {
    let s = ctx.spectrum(input)?;
    let sys = AffineConstraintSystem::from_json(s.n(), &read(constraints)?)?;
    let r = restriction::restrict(&s, &sys)?;
    let gamma: Vec<_> = sys.constraints().iter().map(|&(g, _)| g).collect();
    let buckets = restriction::bucket_complexity(&s.support(), &gamma)?;
    let bound = restriction::identification_bound_check(&s.support(), &gamma)?;
    let pass = r.sparsity() <= buckets.bucket_count && bound.holds;
    let text = format!(
        "codimension: {}\nrestricted sparsity: {}\nbuckets: {}\nidentified: {} (bound {})\nrestricted coefficients: {:?}",
        sys.codimension(),
        r.sparsity(),
        buckets.bucket_count,
        bound.h,
        bound.bound,
        r.iter().collect::<Vec<_>>()
    );
    let json = json!({
        "restricted": serde_json::from_str::<Value>(&r.to_json()).expect("spectrum json"),
        "buckets": to_value(&buckets),
        "identification": to_value(&bound),
    });
    Ok(Outcome::new(json, text, pass))
}

fn pdt_cmd(ctx: &Ctx, action: &PdtAction) -> Result<Outcome> {
    Ok(match action {
        PdtAction::Build { input, build, out, log } => {
            let table = ctx.table(input)?;
            let cfg = BuildConfig {
                strategy: build.strategy.into(),
                probability: build.probability,
                resample_cap: build.resample_cap,
                epsilon: build.epsilon,
                seed: ctx.seed,
                delta: build.delta,
                ell: build.ell,
            };
            let outcome = pdt::build_pdt(&table, &cfg)?;
            if let Some(path) = out {
                write(path, &outcome.tree.to_json())?;
            }
            if let Some(path) = log {
                write(path, &outcome.log_jsonl())?;
            }
            let verified = pdt::verify_tree(&outcome.tree, &table)?;
            let (queries, leaves) = outcome.tree.size();
            let text = format!(
                "depth: {}\nqueries: {queries}\nleaves: {leaves}\nbatches: {}\nverified: {}",
                outcome.tree.depth(),
                outcome.log.len(),
                yes_no(verified)
            );
            let json = json!({
                "depth": outcome.tree.depth(),
                "queries": queries,
                "leaves": leaves,
                "verified": verified,
                "log": to_value(&outcome.log),
                "tree": serde_json::from_str::<Value>(&outcome.tree.to_json()).expect("tree json"),
            });
            Outcome::new(json, text, verified)
        }
        PdtAction::Verify { input, tree } => {
            let table = ctx.table(input)?;
            let t = ParityDecisionTree::from_json(&read(tree)?, table.n())?;
            let ok = pdt::verify_tree(&t, &table)?;
            let bad = (!ok).then(|| pdt::first_disagreement(&t, &table)).flatten();
            let text = match bad {
                None => "tree computes the function on every input".to_string(),
                Some(x) => format!("tree disagrees with the function at input {x}"),
            };
            Outcome::new(json!({ "verified": ok, "first_disagreement": bad }), text, ok)
        }
        PdtAction::Depth { tree, n } => {
            ctx.check_n(*n)?;
            let t = ParityDecisionTree::from_json(&read(tree)?, *n)?;
            let d = t.depth();
            let independent = pdt::paths_independent(&t);
            let text = format!("depth: {d}\npaths independent: {}", yes_no(independent));
            Outcome::new(json!({ "depth": d, "paths_independent": independent }), text, true)
        }
    })
}

fn stats_outcome(label: &str, st: TrialStats, pass: bool) -> Outcome {
    let mut text = format!(
        "trials: {}\nk: {}\nprobability: {}{}\nmean buckets/k: {:.6}\n95% interval: [{:.6}, {:.6}]",
        st.trials,
        st.k,
        st.probability,
        if st.clamped { " (clamped)" } else { "" },
        st.mean_ratio,
        st.ci95[0],
        st.ci95[1]
    );
    if let (Some(t), Some(f)) = (st.success_threshold, st.success_fraction) {
        text += &format!("\nfraction with buckets ≤ {t}: {f:.6}");
    }
    let csv = format!("{}\n{}\n", TrialStats::CSV_HEADER, st.csv_row(label));
    Outcome {
        json: to_value(&st),
        text,
        csv: Some(csv),
        pass,
    }
}

fn mc(ctx: &Ctx, estimator: &Estimator) -> Result<Outcome> {
    Ok(match estimator {
        Estimator::BucketReduction { input, probability, trials } => {
            let s = ctx.spectrum(input)?;
            let p = probability.unwrap_or(pdt::sampling_probability(s.sparsity()).value);
            let st = pdt::estimate_bucket_reduction(&s, p, *trials, ctx.seed)?;
            stats_outcome("bucket-reduction", st, true)
        }
        Estimator::Warmup { input, trials } => {
            let s = ctx.spectrum(input)?;
            stats_outcome("warmup", pdt::warmup_success_rate(&s, *trials, ctx.seed)?, true)
        }
        Estimator::FoldingSampling { input, delta, ell, trials } => {
            let s = ctx.spectrum(input)?;
            let st = pdt::folding_sampling_trial(&s, *delta, *ell, *trials, ctx.seed)?;
            stats_outcome("folding-sampling", st, true)
        }
    })
}

fn gen(ctx: &Ctx, spec: &str, format: GenFormat, out: Option<&Path>) -> Result<Outcome> {
    let spec: FunctionSpec = spec.parse()?;
    ctx.check_n(spec.n()?)?;
    let t = spec.generate()?;
    let body = match format {
        GenFormat::Table => t.to_json(),
        GenFormat::Spectrum => spectral::wht(&t).to_json(),
    };
    if let Some(path) = out {
        write(path, &body)?;
    }
    let json: Value = serde_json::from_str(&body).expect("generated json");
    let text = match out {
        Some(path) => format!("wrote {} (n = {}) to {}", spec.label(), t.n(), path.display()),
        None => body,
    };
    Ok(Outcome::new(json, text, true))
}

fn experiment_cmd(ctx: &Ctx, config: &Path, out: Option<&Path>, csv_out: Option<&Path>) -> Result<Outcome> {
    let mut cfg = ExperimentConfig::from_toml(&read(config)?).with_context(|| format!("in {}", config.display()))?;
    if ctx.max_n < cfg.max_n {
        cfg.max_n = ctx.max_n;
        cfg.validate()?;
    }
    let report = experiment::run_experiment(&cfg)?;
    let json = report.to_json();
    if let Some(path) = out {
        write(path, &json)?;
    }
    if let Some(path) = csv_out {
        write(path, &report.to_csv())?;
    }
    let mut text = String::new();
    for f in &report.functions {
        let failed: Vec<&str> = f.verdicts.iter().filter(|(_, &v)| !v).map(|(k, _)| k.as_str()).collect();
        text += &format!(
            "{}: n = {}, k = {}, {}/{} checks pass{}\n",
            f.label,
            f.n,
            f.sparsity,
            f.verdicts.len() - failed.len(),
            f.verdicts.len(),
            if failed.is_empty() { String::new() } else { format!(" (failed: {})", failed.join(", ")) }
        );
    }
    text += &format!("all pass: {}", yes_no(report.all_pass));
    Ok(Outcome {
        json: serde_json::from_str(&json).expect("report json"),
        text,
        csv: Some(report.to_csv()),
        pass: report.all_pass,
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    let ctx = Ctx {
        seed: cli.seed,
        max_n: cli.max_n,
    };
    match &cli.command {
        Command::Analyze { input } => analyze(&ctx, input),
        Command::Fold { input, ells, delta, gate_k, pairs } => fold(&ctx, input, ells, *delta, *gate_k, *pairs),
        Command::Verify { check } => verify(&ctx, check),
        Command::Restrict { input, constraints } => restrict(&ctx, input, constraints),
        Command::Pdt { action } => pdt_cmd(&ctx, action),
        Command::Mc { estimator } => mc(&ctx, estimator),
        Command::Gen { spec, format, out } => gen(&ctx, spec, *format, out.as_deref()),
        Command::Experiment { config, out, csv_out } => experiment_cmd(&ctx, config, out.as_deref(), csv_out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("json output"));
            } else if let (true, Some(csv)) = (cli.csv, &out.csv) {
                print!("{csv}");
            } else {
                println!("{}", out.text);
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
