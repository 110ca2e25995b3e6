//! TOML experiment files.
//!
//! ```toml
//! name = "black-vertex-theta2"
//!
//! [torus]
//! d = 2
//! n = [16, 32, 64, 128]
//! p = 1
//! rho = 1
//!
//! [schedule]
//! c = 1.0
//! theta = 2.0
//!
//! [sentence]
//! text = "EXIST 1 BALL r=0 { C(0,0) }"
//!
//! [run]
//! replicas = 20000
//! seed = 7
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::ball_pair_center;
use crate::configuration::{BallIndex, LocalConfiguration};
use crate::samplers::{
    FieldModel, Innovation, IsingMethod, IsingParams, KernelTerm, PairRule, PotentialRule,
    PotentialSchedule, SamplerOptions, ShiftFieldParams, DEFAULT_BURN_IN, MAX_EXACT_SITES,
};
use crate::sentence::{index, parse_sentence, Index, Sentence, DEFAULT_ENUMERATION_CAP};
use crate::torus::{Lattice, Norm, TorusGraph, TorusParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusSection {
    pub d: usize,
    pub n: Vec<usize>,
    #[serde(default = "default_norm")]
    pub p: Norm,
    #[serde(default = "one")]
    pub rho: usize,
}

fn default_norm() -> Norm {
    Norm::Finite(1)
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSection {
    Bernoulli {
        p: f64,
    },
    Ising {
        a: f64,
        #[serde(default)]
        b: f64,
    },
    Shift {
        kernel: Vec<KernelTerm<f64>>,
        #[serde(default)]
        threshold: f64,
        #[serde(default = "default_innovation")]
        innovation: Innovation,
    },
}

fn default_innovation() -> Innovation {
    Innovation::Gaussian
}

impl ModelSection {
    pub fn to_model(&self) -> Result<FieldModel<f64>> {
        Ok(match self {
            ModelSection::Bernoulli { p } => FieldModel::Bernoulli { p: *p },
            ModelSection::Ising { a, b } => FieldModel::Ising(IsingParams::new(*a, *b)?),
            ModelSection::Shift {
                kernel,
                threshold,
                innovation,
            } => FieldModel::ShiftField(ShiftFieldParams {
                kernel: kernel.clone(),
                threshold: *threshold,
                innovation: *innovation,
            }),
        })
    }
}

/// Ising potentials as functions of `n`. Either `c` and `theta` (with `k`
/// defaulting to the sentence index) or an explicit `a_table`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_table: Option<Vec<(usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_table: Option<Vec<(usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    /// Path to a sentence file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Exact enumeration when the torus and model allow it, Monte Carlo otherwise.
    #[default]
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default)]
    pub ising_method: IsingMethod,
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_replicas() -> usize {
    10_000
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

fn default_cap() -> usize {
    DEFAULT_ENUMERATION_CAP
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            replicas: default_replicas(),
            seed: 0,
            method: MethodChoice::Auto,
            burn_in: default_burn_in(),
            ising_method: IsingMethod::Gibbs,
            cap: default_cap(),
            output: None,
        }
    }
}

impl RunSection {
    pub fn sampler_options(&self) -> SamplerOptions {
        SamplerOptions {
            burn_in: self.burn_in,
            ising: self.ising_method,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingSection {
    pub radius: usize,
    pub distances: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    #[serde(default = "one")]
    pub count: usize,
    /// Complete description whose matches are counted in each sample, as a
    /// `+`/`-` string over the ball offsets in lexicographic order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub radius: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub torus: TorusSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence: Option<SentenceSection>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing: Option<MixingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSection>,
}

/// What a subcommand needs from the config.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Index,
    Sweep,
    Exact,
    Mixing,
    Sample,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config and inlines a sentence file, resolved against the
    /// config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        if let Some(section) = &mut config.sentence {
            if let (None, Some(file)) = (&section.text, &section.file) {
                let resolved = path.parent().unwrap_or(Path::new(".")).join(file);
                let body = std::fs::read_to_string(&resolved).map_err(|e| {
                    Error::Config(format!("cannot read sentence file {}: {e}", resolved.display()))
                })?;
                section.text = Some(body);
                section.file = None;
            }
        }
        Ok(config)
    }

    /// The config as TOML, with every default spelled out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment configs always serialize")
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.torus.d, self.torus.p, self.torus.rho)
    }

    pub fn torus_params(&self, n: usize) -> Result<TorusParams> {
        TorusParams::from_lattice(self.lattice()?, n)
    }

    pub fn sentence(&self) -> Result<Sentence> {
        let section = self
            .sentence
            .as_ref()
            .ok_or_else(|| Error::Config("missing [sentence] section".into()))?;
        match (&section.text, &section.file) {
            (Some(text), None) => parse_sentence(text, &self.lattice()?),
            (None, Some(_)) => Err(Error::Config("sentence file was not loaded".into())),
            _ => Err(Error::Config("[sentence] needs exactly one of text, file".into())),
        }
    }

    /// Index of the sentence when it is a single basic local sentence.
    pub fn sentence_index(&self) -> Result<Option<Index>> {
        match self.sentence()? {
            Sentence::Basic(b) => Ok(Some(index(&b, &self.lattice()?, self.run.cap)?)),
            _ => Ok(None),
        }
    }

    pub fn schedule(&self) -> Result<Option<PotentialSchedule<f64>>> {
        let Some(s) = &self.schedule else {
            return Ok(None);
        };
        let a = match (&s.a_table, s.c, s.theta) {
            (Some(t), None, None) => PotentialRule::Table(t.clone()),
            (None, Some(c), Some(theta)) => {
                let k = match s.k {
                    Some(k) => k,
                    None => match self.sentence_index()? {
                        Some(Index::Finite(k)) if k >= 1 => k as u32,
                        _ => {
                            return Err(Error::Config(
                                "schedule.k is required unless the sentence is a single basic local sentence of finite index >= 1".into(),
                            ))
                        }
                    },
                };
                PotentialRule::Parametric {
                    c,
                    k,
                    theta,
                    d: self.torus.d,
                }
            }
            _ => {
                return Err(Error::Config(
                    "[schedule] needs either a_table or both c and theta".into(),
                ))
            }
        };
        let b = match (&s.b_table, s.b) {
            (Some(t), None) => PairRule::Table(t.clone()),
            (None, b) => PairRule::Constant(b.unwrap_or(0.0)),
            _ => return Err(Error::Config("[schedule] takes b or b_table, not both".into())),
        };
        Ok(Some(PotentialSchedule { a, b, b0: s.b0 }))
    }

    /// The model at side length `n`: the fixed `[model]`, or the Ising model
    /// given by `[schedule]`.
    pub fn model_at(&self, n: usize) -> Result<FieldModel<f64>> {
        match (&self.model, self.schedule()?) {
            (Some(m), None) => m.to_model(),
            (None, Some(s)) => Ok(FieldModel::Ising(s.eval(n)?)),
            (Some(_), Some(_)) => Err(Error::Config("give [model] or [schedule], not both".into())),
            (None, None) => Err(Error::Config("missing [model] or [schedule] section".into())),
        }
    }

    pub fn output(&self) -> Option<&Path> {
        self.run.output.as_deref()
    }

    /// Checks everything a subcommand will need, before any sampling.
    /// All problems are reported together.
    pub fn validate(&self, purpose: Purpose) -> Result<()> {
        let mut problems: Vec<Error> = Vec::new();
        let mut push = |r: Result<()>| {
            if let Err(e) = r {
                problems.push(e);
            }
        };
        let ns = &self.torus.n;
        if ns.is_empty() {
            push(Err(Error::Config("torus.n must list at least one side length".into())));
        }
        if ns.windows(2).any(|w| w[0] >= w[1]) {
            push(Err(Error::Config(format!("torus.n must be strictly increasing, got {ns:?}"))));
        }
        let lattice = self.lattice();
        if let Err(e) = &lattice {
            push(Err(Error::InvalidParams(e.to_string())));
        }
        let tori: Vec<TorusParams> = ns.iter().filter_map(|&n| self.torus_params(n).ok()).collect();
        for &n in ns {
            push(self.torus_params(n).map(|_| ()));
        }
        if purpose != Purpose::Mixing && purpose != Purpose::Sample {
            match self.sentence() {
                Ok(s) => {
                    let r = s.max_radius();
                    for t in &tori {
                        if !t.ball_fits(r) {
                            push(Err(Error::SelfOverlappingBall {
                                radius: r,
                                n: t.n(),
                                rho: t.rho(),
                            }));
                        }
                    }
                    if purpose == Purpose::Index {
                        if let Ok(l) = &lattice {
                            for leaf in s.leaves() {
                                push(index(leaf, l, self.run.cap).map(|_| ()));
                            }
                        }
                    }
                }
                Err(e) => push(Err(e)),
            }
        }
        if purpose != Purpose::Index {
            if self.run.replicas == 0 && purpose != Purpose::Exact {
                push(Err(Error::Config("run.replicas must be >= 1".into())));
            }
            for t in &tori {
                let torus = TorusGraph::new(*t);
                match self.model_at(t.n()) {
                    Ok(m) => push(m.validate(&torus)),
                    Err(e) => push(Err(e)),
                }
            }
        }
        if purpose == Purpose::Exact || (purpose == Purpose::Sweep && self.run.method == MethodChoice::Exact) {
            for t in &tori {
                if t.sites() > MAX_EXACT_SITES {
                    push(Err(Error::EnumerationBound {
                        sites: t.sites(),
                        max: MAX_EXACT_SITES,
                    }));
                }
            }
            if let Some(ModelSection::Shift { .. }) = self.model {
                push(Err(Error::IntractableModel(
                    "thresholded moving-average fields cannot be enumerated".into(),
                )));
            }
        }
        if purpose == Purpose::Mixing {
            match &self.mixing {
                None => push(Err(Error::Config("missing [mixing] section".into()))),
                Some(m) => {
                    if m.distances.is_empty() {
                        push(Err(Error::Config("mixing.distances is empty".into())));
                    }
                    for t in &tori {
                        let torus = TorusGraph::new(*t);
                        match BallIndex::for_radius(&torus, m.radius) {
                            Ok(idx) => {
                                for &s in &m.distances {
                                    push(ball_pair_center(&torus, &idx, s).map(|_| ()));
                                }
                            }
                            Err(e) => push(Err(e)),
                        }
                    }
                }
            }
        }
        if purpose == Purpose::Sample {
            if let Some(s) = &self.sample {
                if let Some(desc) = &s.description {
                    match LocalConfiguration::from_signs(s.radius, desc) {
                        Ok(local) => {
                            for t in &tori {
                                let torus = TorusGraph::new(*t);
                                match BallIndex::for_radius(&torus, s.radius) {
                                    Ok(idx) if idx.beta() != local.beta() => {
                                        push(Err(Error::Config(format!(
                                            "sample.description has {} signs, the ball of radius {} has {} cells",
                                            local.beta(),
                                            s.radius,
                                            idx.beta()
                                        ))))
                                    }
                                    Ok(_) => {}
                                    Err(e) => push(Err(e)),
                                }
                            }
                        }
                        Err(e) => push(Err(e)),
                    }
                }
            }
        }
        combine(problems)
    }
}

/// One problem is returned as is; several are joined, keeping exit code 3
/// only if every problem is an infeasibility.
fn combine(mut problems: Vec<Error>) -> Result<()> {
    match problems.len() {
        0 => Ok(()),
        1 => Err(problems.remove(0)),
        _ => {
            let message = problems
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            if problems.iter().all(|e| e.exit_code() == 3) {
                Err(Error::Infeasible(message))
            } else {
                Err(Error::Config(message))
            }
        }
    }
}
