//! Experiment runner: the three benchmark steps over generated data, plus
//! the process launchers behind the `dscep` binary.

mod launch;
mod pipeline;
pub mod queries;
mod report;
mod steps;

pub use launch::{launch, Role, DEFAULT_BROKER};
pub use pipeline::{pipeline, run_pipeline, Access, Pipeline, PipelineRun, Stage, RESULT_TOPIC, SOURCE_TOPIC};
pub use report::{digest_triples, mean, median, ExperimentReport, SummaryRow, SweepRow, REPORT_HEADER, SUMMARY_HEADER, SWEEP_HEADER};
pub use steps::{run_step1, run_step2, run_step3, Step2Outcome};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bus::BusError;
use crate::engine::EngineError;
use crate::kb::KbError;
use crate::operator::OperatorError;
use crate::query::QueryError;
use crate::streamgen::{GenConfig, StreamError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bus: {0}")]
    Bus(#[from] BusError),
    #[error("operator: {0}")]
    Operator(#[from] OperatorError),
    #[error("knowledge base: {0}")]
    Kb(#[from] KbError),
    #[error("engine: {0}")]
    Engine(#[from] EngineError),
    #[error("query: {0}")]
    Query(#[from] QueryError),
    #[error("stream: {0}")]
    Stream(#[from] StreamError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("result digests differ: {detail}")]
    DigestMismatch { detail: String, report: Box<ExperimentReport> },
    #[error("step aborted: {source}")]
    Aborted { report: Box<ExperimentReport>, source: Box<BenchError> },
}

impl BenchError {
    /// The partial report of a failed step, when there is one.
    pub fn report(&self) -> Option<&ExperimentReport> {
        match self {
            BenchError::DigestMismatch { report, .. } | BenchError::Aborted { report, .. } => Some(report),
            _ => None,
        }
    }
}

/// Which KB each KB-touching stage loads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KbChoice {
    /// The whole generated KB.
    Full,
    /// The part the stage's query touches over the run's windows.
    #[default]
    Used,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Step3Config {
    /// Multipliers applied to the generator's entity pools, one sweep point each.
    pub scales: Vec<f64>,
    /// Total KB size as a multiple of the used KB.
    pub noise_factors: Vec<usize>,
    /// Number of leading windows evaluated per point.
    pub windows: usize,
    /// Tweets generated per point; the used KB covers all of them.
    pub tweets: usize,
}

impl Default for Step3Config {
    fn default() -> Self {
        Step3Config { scales: vec![25.0, 10.0, 5.0, 2.0, 1.0], noise_factors: vec![1, 2, 5, 10], windows: 8, tweets: 5000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub seed: u64,
    /// Repetitions per pipeline in step 2.
    pub runs: usize,
    /// Replay rate in triples/s; 0 publishes as fast as the bus accepts.
    pub rate: f64,
    pub window_triples: usize,
    pub engines: usize,
    /// Re-parse the KB for every window.
    pub kb_reload: bool,
    pub kb: KbChoice,
    pub gen: GenConfig,
    pub step3: Step3Config,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            seed: 1,
            runs: 5,
            rate: 0.0,
            window_triples: 1000,
            engines: 1,
            kb_reload: true,
            kb: KbChoice::Used,
            gen: GenConfig::default(),
            step3: Step3Config::default(),
        }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let cfg: BenchConfig = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, BenchError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Config(m.into()));
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.window_triples == 0 || self.engines == 0 {
            return bad("window_triples and engines must be positive");
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return bad("rate must be a non-negative number");
        }
        if self.step3.windows == 0 || self.step3.tweets == 0 || self.step3.scales.iter().any(|s| s.is_nan() || *s <= 0.0) || self.step3.noise_factors.contains(&0) {
            return bad("step3 needs positive windows, scales and noise factors");
        }
        self.gen.validate().map_err(BenchError::Config)
    }

    /// The generator config with the bench seed applied.
    pub fn gen_config(&self) -> GenConfig {
        GenConfig { seed: self.seed, ..self.gen.clone() }
    }
}
