//! The four CLI commands as functions returning their output text.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use qrom_core::rng::stream;
use qrom_core::{
    build_filter, center_and_normalize, embed, inner, recognize_argmax, recognize_single_shot,
    FilterBank, OrthoMemory, QuantumState, RecognitionResult,
};

use crate::benchmark::{run_benchmark, BenchmarkConfig, RecognizerChoice, RunOptions};
use crate::formats::{parse_image, parse_pgm, ImageFormat};
use crate::persist::{memory_from_json, memory_to_json, state_from_json, state_to_json, to_pretty, Memory};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputFormat {
    /// P2 or P5 graymap
    Pgm,
    Csv,
    /// State JSON as written by `encode`
    Json,
}

impl InputFormat {
    /// From the file extension; anything unrecognized is read as PGM.
    pub fn infer(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => InputFormat::Csv,
            Some("json") => InputFormat::Json,
            _ => InputFormat::Pgm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StoreMode {
    Beam,
    Ortho,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Reads an image (or a state JSON) and returns it as a quantum state.
pub fn load_state(path: &Path, format: Option<InputFormat>) -> Result<QuantumState> {
    let format = format.unwrap_or_else(|| InputFormat::infer(path));
    let raw = match format {
        InputFormat::Json => return state_from_json(&read_text(path)?),
        InputFormat::Pgm => parse_pgm(&read(path)?)?,
        InputFormat::Csv => parse_image(&read(path)?, ImageFormat::Csv)?,
    };
    Ok(embed(&center_and_normalize(&raw)?))
}

pub fn encode(path: &Path, format: Option<InputFormat>) -> Result<String> {
    Ok(state_to_json(&load_state(path, format)?))
}

fn label_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Builds a memory from image files, writes it to `out` and returns a summary.
pub fn store(
    paths: &[PathBuf],
    mode: StoreMode,
    out: &Path,
    format: Option<InputFormat>,
    intensity: f64,
) -> Result<String> {
    let states = paths
        .iter()
        .map(|p| load_state(p, format))
        .collect::<Result<Vec<_>>>()?;
    let Some(first) = states.first() else {
        return Err(qrom_core::Error::Empty.into());
    };
    for s in &states {
        if s.dim() != first.dim() {
            return Err(qrom_core::Error::DimensionMismatch {
                expected: first.dim(),
                found: s.dim(),
            }
            .into());
        }
    }
    let labels: Vec<String> = paths.iter().map(|p| label_of(p)).collect();
    let memory = match mode {
        StoreMode::Beam => Memory::Beam(FilterBank::new(
            states.iter().zip(&labels).map(|(s, l)| build_filter(s, l.clone())).collect(),
            intensity,
        )?),
        StoreMode::Ortho => Memory::Ortho(OrthoMemory::build(&states, labels.clone())?),
    };
    write(out, &memory_to_json(&memory))?;

    let mut max_overlap: f64 = 0.0;
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            max_overlap = max_overlap.max(inner(a, b)?.norm());
        }
    }
    let mut summary = format!(
        "stored {} image(s), dim {}, mode {}\nmax pairwise |inner| {:.6}\n",
        states.len(),
        first.dim(),
        match mode {
            StoreMode::Beam => "beam",
            StoreMode::Ortho => "ortho",
        },
        max_overlap
    );
    if let Memory::Ortho(mem) = &memory {
        for (label, f) in mem.labels().iter().zip(mem.distortion().unwrap_or_default()) {
            summary.push_str(&format!("{label}: fidelity with orthogonalized image {f:.6}\n"));
        }
    }
    Ok(summary)
}

#[derive(Debug, Serialize)]
struct RecognitionJson<'a> {
    mode: &'static str,
    label: Option<&'a str>,
    best_index: Option<usize>,
    score: f64,
    epsilon: Option<f64>,
    accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    shots_per_arm: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rates: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probabilities: Option<Vec<f64>>,
}

pub struct RecognizeOutput {
    pub result: RecognitionResult,
    /// Pretty JSON, newline terminated.
    pub json: String,
    pub summary: String,
}

pub fn recognize(
    memory_path: &Path,
    query_path: &Path,
    format: Option<InputFormat>,
    shots: u64,
    epsilon: f64,
    seed: u64,
) -> Result<RecognizeOutput> {
    let memory = memory_from_json(&read_text(memory_path)?)?;
    let query = load_state(query_path, format)?;
    let labels = memory.labels();
    let (mode, result, rates, probabilities, shots_per_arm) = match &memory {
        Memory::Beam(bank) => {
            let counts = bank.run_beam_trials(&query, shots, seed)?;
            let rates = counts.rates();
            let result = recognize_argmax(&rates, epsilon)?;
            ("beam", result, Some(rates), None, Some(shots))
        }
        Memory::Ortho(mem) => {
            let probabilities = mem.outcome_probabilities(&query)?;
            let result = recognize_single_shot(mem, &query, &mut stream(seed, 0))?;
            ("ortho", result, None, Some(probabilities), None)
        }
    };
    let label = result.best_index.map(|i| labels[i]);
    let json = to_pretty(&RecognitionJson {
        mode,
        label,
        best_index: result.best_index,
        score: result.score,
        epsilon: result.epsilon,
        accepted: result.accepted,
        shots_per_arm,
        rates,
        probabilities,
    });
    let summary = match (label, result.accepted) {
        (Some(l), true) => format!("recognized {l} (score {:.4}, {mode})", result.score),
        (Some(l), false) => format!(
            "rejected: best match {l} scored {:.4}, below threshold (1 - epsilon = {:.4})",
            result.score,
            1.0 - epsilon
        ),
        (None, _) => "rejected: unknown image (measurement left the stored subspace)".to_owned(),
    };
    Ok(RecognizeOutput {
        result,
        json,
        summary,
    })
}

/// Runs the benchmark described by `config_path` and writes `report.csv`,
/// `concentration.csv` and `report.json` into `out_dir`. Returns the CSV.
pub fn benchmark(
    config_path: &Path,
    out_dir: &Path,
    recognizer: Option<RecognizerChoice>,
    opts: RunOptions,
) -> Result<String> {
    let mut cfg = BenchmarkConfig::from_json(&read_text(config_path)?)?;
    if let Some(r) = recognizer {
        cfg.recognizer = r;
        cfg.validate()?;
    }
    let report = run_benchmark(&cfg, opts)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let csv = report.to_csv();
    write(&out_dir.join("report.csv"), &csv)?;
    write(&out_dir.join("concentration.csv"), &report.concentration_csv())?;
    write(&out_dir.join("report.json"), &report.to_json())?;
    Ok(csv)
}
