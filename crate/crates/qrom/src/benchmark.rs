//! Seeded recognition sweeps over noise levels and recognizers.
//!
//! Seeds fan out from the master seed through [`derive_seed`]:
//!
//! * stored image `j`: `derive_seed(derive_seed(seed, 0), j)`
//! * concentration row for dimension `d`: `derive_seed(derive_seed(seed, 1), d)`
//! * cell (noise `i`, recognizer `r`, beam = 0, ortho = 1):
//!   `derive_seed(seed, 2 + 2 i + r)`
//! * trial `t` of a cell: `derive_seed(cell, t)`, whose children 0..=3 seed
//!   the query noise, the query measurement, the random probe and the probe
//!   measurement.
//!
//! Every cell therefore depends only on `(config, seed)` and cells can be
//! evaluated in any order or in parallel.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qrom_core::qrom_bank::{DEFAULT_EPSILON, DEFAULT_SHOTS_PER_ARM};
use qrom_core::rng::{derive_seed, stream};
use qrom_core::{
    apply_noise, build_filter, concentration_estimate, embed, random_unit_vector,
    recognize_argmax, recognize_single_shot, FilterBank, ImageVector, NoiseSpec, OrthoMemory,
    QuantumState, RecognitionResult,
};

use crate::persist::to_pretty;
use crate::{Error, Result};

pub const CSV_HEADER: &str =
    "recognizer,noise_kind,noise_param,trials,correct_rate,false_accept_rate,mean_score,seconds";

const IMAGE_STREAM: u64 = 0;
const CONCENTRATION_STREAM: u64 = 1;
const CELL_STREAM_BASE: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RecognizerChoice {
    Beam,
    Ortho,
    Both,
}

impl RecognizerChoice {
    pub fn recognizers(self) -> &'static [Recognizer] {
        match self {
            RecognizerChoice::Beam => &[Recognizer::Beam],
            RecognizerChoice::Ortho => &[Recognizer::Ortho],
            RecognizerChoice::Both => &[Recognizer::Beam, Recognizer::Ortho],
        }
    }

    fn includes_ortho(self) -> bool {
        self != RecognizerChoice::Beam
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Recognizer {
    Beam,
    Ortho,
}

impl Recognizer {
    fn id(self) -> u64 {
        match self {
            Recognizer::Beam => 0,
            Recognizer::Ortho => 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Recognizer::Beam => "beam",
            Recognizer::Ortho => "ortho",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NoiseConfig {
    Gaussian { sigma: f64 },
    Dropout { dropout_fraction: f64 },
}

impl NoiseConfig {
    pub fn spec(self) -> NoiseSpec {
        match self {
            NoiseConfig::Gaussian { sigma } => NoiseSpec::Gaussian { sigma },
            NoiseConfig::Dropout { dropout_fraction } => NoiseSpec::Dropout {
                fraction: dropout_fraction,
            },
        }
    }
}

fn default_shots() -> u64 {
    DEFAULT_SHOTS_PER_ARM
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_concentration_dims() -> Vec<usize> {
    vec![64, 256, 1024]
}

fn default_concentration_trials() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub dim: usize,
    pub image_count: usize,
    pub noise: Vec<NoiseConfig>,
    #[serde(default = "default_shots")]
    pub shots_per_arm: u64,
    pub trials: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub seed: u64,
    pub recognizer: RecognizerChoice,
    #[serde(default = "default_concentration_dims")]
    pub concentration_dims: Vec<usize>,
    #[serde(default = "default_concentration_trials")]
    pub concentration_trials: usize,
}

impl BenchmarkConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.dim == 0 {
            problems.push("dim: must be positive".to_owned());
        }
        if self.image_count == 0 {
            problems.push("image_count: must be positive".to_owned());
        }
        if self.recognizer.includes_ortho() && self.image_count > self.dim {
            problems.push(format!(
                "image_count: {} exceeds dim {} (ortho recognizer)",
                self.image_count, self.dim
            ));
        }
        if self.noise.is_empty() {
            problems.push("noise: at least one level required".to_owned());
        }
        for (i, n) in self.noise.iter().enumerate() {
            if let Err(e) = n.spec().validate() {
                problems.push(format!("noise[{i}]: {e}"));
            }
            if let NoiseConfig::Dropout { dropout_fraction } = n {
                if self.dim > 0 && (dropout_fraction * self.dim as f64).floor() as usize >= self.dim {
                    problems.push(format!("noise[{i}]: dropout would erase every component"));
                }
            }
        }
        if self.shots_per_arm == 0 {
            problems.push("shots_per_arm: must be positive".to_owned());
        }
        if self.trials == 0 {
            problems.push("trials: must be positive".to_owned());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            problems.push("epsilon: must lie in (0, 1)".to_owned());
        }
        if self.concentration_dims.contains(&0) {
            problems.push("concentration_dims: entries must be positive".to_owned());
        }
        if self.concentration_trials == 0 {
            problems.push("concentration_trials: must be positive".to_owned());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub recognizer: Recognizer,
    pub noise_kind: &'static str,
    pub noise_param: f64,
    pub trials: usize,
    /// Fraction of noisy queries identified as their source image.
    pub correct_rate: f64,
    /// Fraction of uniformly random probes that were accepted.
    pub false_accept_rate: f64,
    pub mean_score: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub dim: usize,
    pub trials: usize,
    pub mean_abs_inner: f64,
    /// `mean_abs_inner * sqrt(dim)`, flat in `dim` under concentration.
    pub scaled: f64,
    /// Gaussian-projection limit `sqrt(2 / (pi dim))`.
    pub gaussian_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub cells: Vec<CellReport>,
    pub concentration: Vec<ConcentrationRow>,
}

impl BenchmarkReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.recognizer.name(),
                c.noise_kind,
                c.noise_param,
                c.trials,
                c.correct_rate,
                c.false_accept_rate,
                c.mean_score,
                c.seconds
            )
            .unwrap();
        }
        out
    }

    pub fn concentration_csv(&self) -> String {
        let mut out = String::from("dim,trials,mean_abs_inner,scaled,gaussian_limit\n");
        for r in &self.concentration {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.dim, r.trials, r.mean_abs_inner, r.scaled, r.gaussian_limit
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        to_pretty(self)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Worker threads for cells; 1 evaluates them sequentially in order.
    pub jobs: usize,
    /// Record wall-clock seconds per cell. Off by default so reports are
    /// byte-reproducible.
    pub timing: bool,
    /// Evaluate cells back to front (used to check order independence).
    pub reverse: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            jobs: 1,
            timing: false,
            reverse: false,
        }
    }
}

/// Stored images and the recognizers built from them.
pub struct Fixture {
    pub originals: Vec<ImageVector>,
    pub bank: FilterBank,
    pub ortho: Option<(OrthoMemory, Vec<ImageVector>)>,
}

pub fn stored_image(cfg: &BenchmarkConfig, j: usize) -> Result<ImageVector> {
    let seed = derive_seed(derive_seed(cfg.seed, IMAGE_STREAM), j as u64);
    Ok(random_unit_vector(cfg.dim, seed)?)
}

pub fn cell_seed(cfg: &BenchmarkConfig, noise_index: usize, recognizer: Recognizer) -> u64 {
    derive_seed(
        cfg.seed,
        CELL_STREAM_BASE + 2 * noise_index as u64 + recognizer.id(),
    )
}

pub fn image_label(j: usize) -> String {
    format!("img{j}")
}

impl Fixture {
    pub fn new(cfg: &BenchmarkConfig) -> Result<Self> {
        let originals = (0..cfg.image_count)
            .map(|j| stored_image(cfg, j))
            .collect::<Result<Vec<_>>>()?;
        let states: Vec<QuantumState> = originals.iter().map(embed).collect();
        let filters = states
            .iter()
            .enumerate()
            .map(|(j, s)| build_filter(s, image_label(j)))
            .collect();
        let bank = FilterBank::new(filters, 1.0)?;
        let ortho = if cfg.recognizer.includes_ortho() {
            let mem = OrthoMemory::build(&states, (0..states.len()).map(image_label).collect())?;
            // real inputs orthogonalize to real states
            let targets = mem
                .ortho_states()
                .iter()
                .map(|s| s.to_real(1e-12))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Inconsistent("orthogonalized images left the real subspace".into()))?;
            Some((mem, targets))
        } else {
            None
        };
        Ok(Self {
            originals,
            bank,
            ortho,
        })
    }

    fn recognize(
        &self,
        cfg: &BenchmarkConfig,
        recognizer: Recognizer,
        query: &QuantumState,
        seed: u64,
    ) -> Result<RecognitionResult> {
        match recognizer {
            Recognizer::Beam => {
                let counts = self.bank.run_beam_trials(query, cfg.shots_per_arm, seed)?;
                Ok(recognize_argmax(&counts.rates(), cfg.epsilon)?)
            }
            Recognizer::Ortho => {
                let (mem, _) = self.ortho.as_ref().expect("ortho fixture built");
                Ok(recognize_single_shot(mem, query, &mut stream(seed, 0))?)
            }
        }
    }

    /// Image a query for stored image `j` is derived from: the original for
    /// the beam, the orthogonalized image for the projective measurement.
    pub fn target(&self, recognizer: Recognizer, j: usize) -> &ImageVector {
        match recognizer {
            Recognizer::Beam => &self.originals[j],
            Recognizer::Ortho => &self.ortho.as_ref().expect("ortho fixture built").1[j],
        }
    }
}

pub fn run_cell(
    cfg: &BenchmarkConfig,
    fixture: &Fixture,
    noise_index: usize,
    recognizer: Recognizer,
    timing: bool,
) -> Result<CellReport> {
    let started = Instant::now();
    let noise = cfg.noise[noise_index].spec();
    let seed = cell_seed(cfg, noise_index, recognizer);
    let mut correct = 0usize;
    let mut false_accepts = 0usize;
    let mut score_total = 0.0;
    for t in 0..cfg.trials {
        let trial = derive_seed(seed, t as u64);
        let j = t % cfg.image_count;
        let query = embed(&apply_noise(
            fixture.target(recognizer, j),
            &noise,
            derive_seed(trial, 0),
        )?);
        let result = fixture.recognize(cfg, recognizer, &query, derive_seed(trial, 1))?;
        if result.best_index == Some(j) {
            correct += 1;
        }
        score_total += result.score;

        let probe = embed(&random_unit_vector(cfg.dim, derive_seed(trial, 2))?);
        if fixture.recognize(cfg, recognizer, &probe, derive_seed(trial, 3))?.accepted {
            false_accepts += 1;
        }
    }
    let n = cfg.trials as f64;
    Ok(CellReport {
        recognizer,
        noise_kind: noise.kind(),
        noise_param: noise.parameter(),
        trials: cfg.trials,
        correct_rate: correct as f64 / n,
        false_accept_rate: false_accepts as f64 / n,
        mean_score: score_total / n,
        seconds: if timing {
            started.elapsed().as_secs_f64()
        } else {
            0.0
        },
    })
}

pub fn concentration_row(cfg: &BenchmarkConfig, dim: usize) -> Result<ConcentrationRow> {
    let seed = derive_seed(derive_seed(cfg.seed, CONCENTRATION_STREAM), dim as u64);
    let mean = concentration_estimate(dim, cfg.concentration_trials, seed)?;
    let root = (dim as f64).sqrt();
    Ok(ConcentrationRow {
        dim,
        trials: cfg.concentration_trials,
        mean_abs_inner: mean,
        scaled: mean * root,
        gaussian_limit: (2.0 / (std::f64::consts::PI * dim as f64)).sqrt(),
    })
}

pub fn run_benchmark(cfg: &BenchmarkConfig, opts: RunOptions) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let fixture = Fixture::new(cfg)?;
    let mut cells: Vec<(usize, Recognizer)> = (0..cfg.noise.len())
        .flat_map(|i| cfg.recognizer.recognizers().iter().map(move |&r| (i, r)))
        .collect();
    if opts.reverse {
        cells.reverse();
    }
    let run = |&(i, r): &(usize, Recognizer)| run_cell(cfg, &fixture, i, r, opts.timing);
    let mut reports = if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Config(vec![format!("jobs: {e}")]))?;
        pool.install(|| cells.par_iter().map(run).collect::<Result<Vec<_>>>())?
    } else {
        cells.iter().map(run).collect::<Result<Vec<_>>>()?
    };
    if opts.reverse {
        reports.reverse();
    }
    let concentration = cfg
        .concentration_dims
        .iter()
        .map(|&d| concentration_row(cfg, d))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkReport {
        config: cfg.clone(),
        cells: reports,
        concentration,
    })
}
