//! The subcommands. Each returns the full text of its output file so the
//! front end only decides where to write it.

use std::fmt;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::configuration::{count_matches, BallIndex, LocalConfiguration};
use crate::error::{Error, Result};
use crate::evaluator::{
    estimate_mixing, estimate_probability, exact_probability, MixingReport, ProbabilityEstimate,
};
use crate::samplers::{FieldModel, PotentialRule, ReplicaSampler, MAX_EXACT_SITES};
use crate::sentence::{index_report, Index, Sentence};
use crate::torus::{Lattice, TorusGraph};

use super::config::{ExperimentConfig, MethodChoice, Purpose};

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.run.seed = seed;
        }
        if let Some(replicas) = overrides.replicas {
            self.run.replicas = replicas;
        }
        if let Some(out) = &overrides.out {
            self.run.output = Some(out.clone());
        }
    }
}

/// First 16 hex digits of the SHA-256 of the sentence's canonical text.
pub fn sentence_hash(sentence: &Sentence) -> String {
    let digest = Sha256::digest(sentence.to_string().as_bytes());
    hex::encode(digest)[..16].to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    ToZero,
    ToOne,
    Indeterminate,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::ToZero => "→0",
            Trend::ToOne => "→1",
            Trend::Indeterminate => "indeterminate",
        })
    }
}

/// Lower and upper trend bands.
pub const TREND_BANDS: (f64, f64) = (0.1, 0.9);

/// `→0` when the last estimate is below 0.1 and not above the first, `→1`
/// when it is above 0.9 and not below the first.
pub fn trend(estimates: &[f64]) -> Trend {
    let (Some(&first), Some(&last)) = (estimates.first(), estimates.last()) else {
        return Trend::Indeterminate;
    };
    if last < TREND_BANDS.0 && last <= first {
        Trend::ToZero
    } else if last > TREND_BANDS.1 && last >= first {
        Trend::ToOne
    } else {
        Trend::Indeterminate
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Constant,
    Increasing,
    Decreasing,
    None,
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Monotonicity::Constant => "constant",
            Monotonicity::Increasing => "increasing",
            Monotonicity::Decreasing => "decreasing",
            Monotonicity::None => "none",
        })
    }
}

/// Non-strict monotonicity of a sequence.
pub fn monotonicity(values: &[f64]) -> Monotonicity {
    let up = values.windows(2).all(|w| w[0] <= w[1]);
    let down = values.windows(2).all(|w| w[0] >= w[1]);
    match (up, down) {
        (true, true) => Monotonicity::Constant,
        (true, false) => Monotonicity::Increasing,
        (false, true) => Monotonicity::Decreasing,
        (false, false) => Monotonicity::None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub model: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub index: Option<Index>,
    /// `e^{a(n)} n^{d/(2k)}`, when `a` and `k` are known.
    pub diagnostic: Option<f64>,
    pub estimate: ProbabilityEstimate<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub sentence_hash: String,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn estimates(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.estimate.point).collect()
    }

    pub fn trend(&self) -> Trend {
        trend(&self.estimates())
    }

    pub fn monotonicity(&self) -> Monotonicity {
        monotonicity(&self.estimates())
    }
}

/// `e^a n^{d/(2k)}`; an unsatisfiable sentence has exponent zero.
pub fn threshold_diagnostic(a: f64, n: usize, d: usize, k: Index) -> f64 {
    match k {
        Index::Finite(k) if k > 0 => a.exp() * (n as f64).powf(d as f64 / (2 * k) as f64),
        _ => a.exp(),
    }
}

fn use_exact(config: &ExperimentConfig, torus: &TorusGraph, model: &FieldModel<f64>) -> bool {
    match config.run.method {
        MethodChoice::Exact => true,
        MethodChoice::MonteCarlo => false,
        MethodChoice::Auto => {
            torus.sites() <= MAX_EXACT_SITES && !matches!(model, FieldModel::ShiftField(_))
        }
    }
}

fn probability_at(
    config: &ExperimentConfig,
    torus: &TorusGraph,
    model: &FieldModel<f64>,
    sentence: &Sentence,
    exact: bool,
) -> Result<ProbabilityEstimate<f64>> {
    if exact {
        exact_probability(torus, model, sentence, config.run.cap)
    } else {
        estimate_probability(
            torus,
            model,
            sentence,
            config.run.replicas,
            config.run.seed,
            config.run.sampler_options(),
            config.run.cap,
        )
    }
}

/// Probability of the sentence at each `n` under the (scheduled) model.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate(Purpose::Sweep)?;
    let sentence = config.sentence()?;
    let index = config.sentence_index()?;
    let schedule = config.schedule()?;
    let diag_k = match (index, &schedule) {
        (Some(k), _) => Some(k),
        (None, Some(s)) => match s.a {
            PotentialRule::Parametric { k, .. } => Some(Index::Finite(k as usize)),
            PotentialRule::Table(_) => None,
        },
        (None, None) => None,
    };
    let d = config.torus.d;
    let mut rows = Vec::with_capacity(config.torus.n.len());
    for &n in &config.torus.n {
        let torus = TorusGraph::new(config.torus_params(n)?);
        let model = config.model_at(n)?;
        let (a, b) = match &model {
            FieldModel::Ising(i) => (Some(i.a), Some(i.b)),
            _ => (None, None),
        };
        let exact = use_exact(config, &torus, &model);
        let estimate = probability_at(config, &torus, &model, &sentence, exact)?;
        rows.push(SweepRow {
            n,
            model: model.to_string(),
            a,
            b,
            index,
            diagnostic: a.zip(diag_k).map(|(a, k)| threshold_diagnostic(a, n, d, k)),
            estimate,
        });
    }
    Ok(SweepResult {
        sentence_hash: sentence_hash(&sentence),
        rows,
    })
}

/// Resolved config as comment lines, closed by `# ---`. The output path is
/// left out so the same experiment written to two places gives identical files.
fn header(command: &str, config: &ExperimentConfig) -> String {
    let mut resolved = config.clone();
    resolved.run.output = None;
    let mut out = format!("# zero-one {command}\n");
    for line in resolved.to_toml().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str("# ---\n");
    out
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_body(records: Vec<Vec<String>>) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for record in records {
        writer.write_record(&record)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

const BASE_COLUMNS: [&str; 9] = [
    "experiment",
    "n",
    "model",
    "sentence_hash",
    "method",
    "point",
    "stderr",
    "replicas",
    "seed",
];

fn base_record(config: &ExperimentConfig, n: usize, model: &str, hash: &str, e: &ProbabilityEstimate<f64>) -> Vec<String> {
    vec![
        config.name.clone(),
        n.to_string(),
        model.to_string(),
        hash.to_string(),
        e.method.to_string(),
        e.point.to_string(),
        e.stderr.to_string(),
        e.replicas.to_string(),
        config.run.seed.to_string(),
    ]
}

pub fn render_sweep(config: &ExperimentConfig, result: &SweepResult) -> Result<String> {
    let mut records = vec![BASE_COLUMNS
        .iter()
        .chain(&["a", "b", "index", "diagnostic"])
        .map(|s| s.to_string())
        .collect::<Vec<_>>()];
    for row in &result.rows {
        let mut r = base_record(config, row.n, &row.model, &result.sentence_hash, &row.estimate);
        r.extend([opt(row.a), opt(row.b), opt(row.index), opt(row.diagnostic)]);
        records.push(r);
    }
    let mut out = header("sweep", config);
    out.push_str(&csv_body(records)?);
    out.push_str(&format!("# trend = {}\n", result.trend()));
    out.push_str(&format!("# monotone = {}\n", result.monotonicity()));
    Ok(out)
}

pub fn cmd_sweep(config: &ExperimentConfig) -> Result<String> {
    render_sweep(config, &run_sweep(config)?)
}

/// Exact sentence probabilities by enumeration, one row per `n`.
pub fn cmd_exact(config: &ExperimentConfig) -> Result<String> {
    config.validate(Purpose::Exact)?;
    let sentence = config.sentence()?;
    let hash = sentence_hash(&sentence);
    let mut records = vec![BASE_COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for &n in &config.torus.n {
        let torus = TorusGraph::new(config.torus_params(n)?);
        let model = config.model_at(n)?;
        let e = exact_probability(&torus, &model, &sentence, config.run.cap)?;
        records.push(base_record(config, n, &model.to_string(), &hash, &e));
    }
    let mut out = header("exact", config);
    out.push_str(&csv_body(records)?);
    Ok(out)
}

/// Per-leaf index report.
pub fn index_text(sentence: &Sentence, lattice: &Lattice, cap: usize) -> Result<String> {
    let mut out = format!("sentence: {sentence}\n");
    let leaves = sentence.leaves();
    for (i, leaf) in leaves.iter().enumerate() {
        let report = index_report(leaf, lattice, cap)?;
        let mins = report
            .min_plus_counts
            .iter()
            .map(|m| m.map_or("none".to_string(), |k| k.to_string()))
            .collect::<Vec<_>>()
            .join(", ");
        let counts = report
            .description_counts
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        out.push_str(&format!("leaf {}: {leaf}\n", i + 1));
        out.push_str(&format!("  k(L) = {}\n", report.index));
        out.push_str(&format!("  min plus counts: [{mins}]\n"));
        out.push_str(&format!("  descriptions: [{counts}]\n"));
    }
    if let Sentence::Basic(b) = sentence {
        out.push_str(&format!("index = {}\n", index_report(b, lattice, cap)?.index));
    }
    Ok(out)
}

pub fn cmd_index(config: &ExperimentConfig) -> Result<String> {
    config.validate(Purpose::Index)?;
    index_text(&config.sentence()?, &config.lattice()?, config.run.cap)
}

/// Max-|cov| of complete-description events per distance, one block per `n`.
pub fn run_mixing(config: &ExperimentConfig) -> Result<Vec<(usize, String, MixingReport<f64>)>> {
    config.validate(Purpose::Mixing)?;
    let mixing = config.mixing.as_ref().expect("validated");
    let mut reports = Vec::new();
    for &n in &config.torus.n {
        let torus = TorusGraph::new(config.torus_params(n)?);
        let model = config.model_at(n)?;
        let report = estimate_mixing(
            &torus,
            &model,
            mixing.radius,
            &mixing.distances,
            config.run.replicas,
            config.run.seed,
            config.run.sampler_options(),
        )?;
        reports.push((n, model.to_string(), report));
    }
    Ok(reports)
}

pub fn cmd_mixing(config: &ExperimentConfig) -> Result<String> {
    let reports = run_mixing(config)?;
    let columns = [
        "experiment",
        "n",
        "model",
        "radius",
        "distance",
        "center",
        "max_abs_cov",
        "stderr",
        "argmax_b",
        "argmax_c",
        "replicas",
        "seed",
    ];
    let mut records = vec![columns.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    let mut footer = String::new();
    for (n, model, report) in &reports {
        for row in &report.rows {
            let desc = |k| LocalConfiguration::from_key(report.radius, report.beta, k).to_string();
            records.push(vec![
                config.name.clone(),
                n.to_string(),
                model.clone(),
                report.radius.to_string(),
                row.distance.to_string(),
                row.center.to_string(),
                row.max_abs_cov.to_string(),
                row.stderr.to_string(),
                desc(row.argmax.0),
                desc(row.argmax.1),
                report.samples.to_string(),
                config.run.seed.to_string(),
            ]);
        }
        footer.push_str(&format!("# n = {n}: monotone_decay = {}\n", report.monotone_decay()));
        footer.push_str(&format!("# n = {n}: catalog = {}\n", report.catalog));
    }
    let mut out = header("mixing", config);
    out.push_str(&csv_body(records)?);
    out.push_str(&footer);
    Ok(out)
}

/// Configuration dumps, each preceded by its replica number and, when a
/// description is configured, its match count `X_n^D`.
pub fn cmd_sample(config: &ExperimentConfig) -> Result<String> {
    config.validate(Purpose::Sample)?;
    let section = config.sample.clone().unwrap_or(super::config::SampleSection {
        count: 1,
        description: None,
        radius: 0,
    });
    let mut out = header("sample", config);
    for &n in &config.torus.n {
        let torus = TorusGraph::new(config.torus_params(n)?);
        let model = config.model_at(n)?;
        let sampler = ReplicaSampler::new(&torus, &model, config.run.sampler_options())?;
        let counter = match &section.description {
            Some(desc) => Some((
                BallIndex::for_radius(&torus, section.radius)?,
                LocalConfiguration::from_signs(section.radius, desc)?,
            )),
            None => None,
        };
        for i in 0..section.count {
            let config_i = sampler.sample_replica(config.run.seed, i as u64);
            out.push_str(&format!("# sample {i} n = {n} model = {model}\n"));
            if let Some((index, local)) = &counter {
                out.push_str(&format!("# matches {local} = {}\n", count_matches(&config_i, index, local)));
            }
            out.push_str(&config_i.to_dump());
        }
    }
    Ok(out)
}
