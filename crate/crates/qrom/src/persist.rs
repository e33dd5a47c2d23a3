//! JSON persistence for states, filter banks and orthogonal memories.
//!
//! States are written in canonical phase as `{"dim", "re", "im"}`. Loaders
//! re-validate every invariant and refuse corrupted files.

use serde::{Deserialize, Serialize};

use qrom_core::{
    build_filter, canonical_phase, Complex64, FilterBank, OrthoMemory, QuantumState, UnitaryMatrix,
};

use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&QuantumState> for StateJson {
    fn from(state: &QuantumState) -> Self {
        let canon = canonical_phase(state);
        StateJson {
            dim: canon.dim(),
            re: canon.amplitudes().iter().map(|a| a.re).collect(),
            im: canon.amplitudes().iter().map(|a| a.im).collect(),
        }
    }
}

impl TryFrom<StateJson> for QuantumState {
    type Error = Error;

    fn try_from(s: StateJson) -> Result<Self> {
        if s.re.len() != s.dim || s.im.len() != s.dim {
            return Err(Error::Inconsistent(format!(
                "state declares dim {} but has {} real and {} imaginary parts",
                s.dim,
                s.re.len(),
                s.im.len()
            )));
        }
        let amps = s.re.into_iter().zip(s.im).map(|(re, im)| Complex64::new(re, im)).collect();
        Ok(QuantumState::from_amplitudes(amps)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterJson {
    pub label: String,
    pub state: StateJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BankJson {
    pub intensity: f64,
    pub filters: Vec<FilterJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryJson {
    pub dim: usize,
    pub k: usize,
    pub labels: Vec<String>,
    pub ortho_states: Vec<StateJson>,
    pub rotation: MatrixJson,
}

/// A persisted recognizer of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Memory {
    Beam(FilterBank),
    Ortho(OrthoMemory),
}

impl Memory {
    pub fn dim(&self) -> usize {
        match self {
            Memory::Beam(bank) => bank.dim(),
            Memory::Ortho(mem) => mem.dim(),
        }
    }

    pub fn labels(&self) -> Vec<&str> {
        match self {
            Memory::Beam(bank) => bank.filters().iter().map(|f| f.label()).collect(),
            Memory::Ortho(mem) => mem.labels().iter().map(String::as_str).collect(),
        }
    }
}

impl From<&FilterBank> for BankJson {
    fn from(bank: &FilterBank) -> Self {
        BankJson {
            intensity: bank.intensity(),
            filters: bank
                .filters()
                .iter()
                .map(|f| FilterJson {
                    label: f.label().to_owned(),
                    state: f.stored().into(),
                })
                .collect(),
        }
    }
}

impl TryFrom<BankJson> for FilterBank {
    type Error = Error;

    fn try_from(b: BankJson) -> Result<Self> {
        let filters = b
            .filters
            .into_iter()
            .map(|f| Ok(build_filter(&QuantumState::try_from(f.state)?, f.label)))
            .collect::<Result<Vec<_>>>()?;
        Ok(FilterBank::new(filters, b.intensity)?)
    }
}

impl From<&OrthoMemory> for MemoryJson {
    fn from(mem: &OrthoMemory) -> Self {
        let rows = || mem.rotation().rows();
        MemoryJson {
            dim: mem.dim(),
            k: mem.stored_count(),
            labels: mem.labels().to_vec(),
            ortho_states: mem.ortho_states().iter().map(StateJson::from).collect(),
            rotation: MatrixJson {
                re: rows().map(|r| r.iter().map(|a| a.re).collect()).collect(),
                im: rows().map(|r| r.iter().map(|a| a.im).collect()).collect(),
            },
        }
    }
}

impl TryFrom<MemoryJson> for OrthoMemory {
    type Error = Error;

    fn try_from(m: MemoryJson) -> Result<Self> {
        if m.k != m.labels.len() || m.k != m.ortho_states.len() {
            return Err(Error::Inconsistent(format!(
                "k = {} but {} labels and {} states",
                m.k,
                m.labels.len(),
                m.ortho_states.len()
            )));
        }
        let MatrixJson { re, im } = m.rotation;
        if re.len() != m.dim || im.len() != m.dim {
            return Err(Error::Inconsistent(format!(
                "rotation must have {} rows",
                m.dim
            )));
        }
        let rows = re
            .into_iter()
            .zip(im)
            .map(|(r, i)| {
                if r.len() != m.dim || i.len() != m.dim {
                    return Err(Error::Inconsistent(format!(
                        "rotation rows must have {} entries",
                        m.dim
                    )));
                }
                Ok(r.into_iter().zip(i).map(|(a, b)| Complex64::new(a, b)).collect())
            })
            .collect::<Result<Vec<Vec<Complex64>>>>()?;
        let rotation = UnitaryMatrix::from_rows(rows)?;
        let states = m
            .ortho_states
            .into_iter()
            .map(QuantumState::try_from)
            .collect::<Result<Vec<_>>>()?;
        Ok(OrthoMemory::from_parts(m.labels, states, rotation)?)
    }
}

pub fn state_to_json(state: &QuantumState) -> String {
    to_pretty(&StateJson::from(state))
}

pub fn state_from_json(text: &str) -> Result<QuantumState> {
    serde_json::from_str::<StateJson>(text)?.try_into()
}

pub fn memory_to_json(memory: &Memory) -> String {
    match memory {
        Memory::Beam(bank) => to_pretty(&BankJson::from(bank)),
        Memory::Ortho(mem) => to_pretty(&MemoryJson::from(mem)),
    }
}

/// Loads either memory kind; an object with a `rotation` key is an
/// orthogonal memory, one with `filters` is a filter bank.
pub fn memory_from_json(text: &str) -> Result<Memory> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("rotation").is_some() {
        let m: MemoryJson = serde_json::from_value(value)?;
        Ok(Memory::Ortho(m.try_into()?))
    } else if value.get("filters").is_some() {
        let b: BankJson = serde_json::from_value(value)?;
        Ok(Memory::Beam(b.try_into()?))
    } else {
        Err(Error::Inconsistent(
            "neither a filter bank nor an orthogonal memory".into(),
        ))
    }
}

pub(crate) fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}
