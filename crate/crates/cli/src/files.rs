//! File formats specific to the command line: target lists, ensembles, input amplitudes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use ssr_core::fock::io::StateFile;
use ssr_core::formation::EnsembleDecomposition;
use ssr_core::{BlockedDensity, LocalPovm, PureState, Result, SsrError, Tolerances};

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| SsrError::Format(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| SsrError::Format(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| SsrError::Format(e.to_string()))
}

pub fn state(path: &Path, tol: &Tolerances) -> Result<PureState> {
    PureState::from_json_with(&read(path)?, tol)
}

pub fn density(path: &Path, tol: &Tolerances) -> Result<BlockedDensity<f64>> {
    BlockedDensity::from_json_with(&read(path)?, tol)
}

pub fn povm(path: &Path, tol: &Tolerances) -> Result<LocalPovm<f64>> {
    LocalPovm::from_json_with(&read(path)?, tol)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetEntry {
    pub prob: f64,
    pub state: StateFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetsFile {
    pub targets: Vec<TargetEntry>,
}

/// `{"targets": [{"prob", "state"}]}`, or a bare state file taken with probability one.
pub fn targets(path: &Path, tol: &Tolerances) -> Result<Vec<(f64, PureState)>> {
    let text = read(path)?;
    let value: serde_json::Value = parse(&text)?;
    if value.get("targets").is_some() {
        let f: TargetsFile = parse(&text)?;
        let total: f64 = f.targets.iter().map(|t| t.prob).sum();
        if f.targets.is_empty() || (total - 1.0).abs() > 1e-12 || f.targets.iter().any(|t| t.prob < 0.0) {
            return Err(SsrError::Domain(format!("target probabilities must be nonnegative and sum to 1, got {total}")));
        }
        f.targets.iter().map(|t| Ok((t.prob, PureState::from_file(&t.state, tol)?))).collect()
    } else {
        Ok(vec![(1.0, PureState::from_json_with(&text, tol)?)])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub members: Vec<TargetEntry>,
}

pub fn ensemble_file(e: &EnsembleDecomposition<f64>) -> EnsembleFile {
    EnsembleFile { members: e.members.iter().map(|(p, s)| TargetEntry { prob: *p, state: s.to_file() }).collect() }
}

/// Input amplitudes as a JSON array of `[re, im]` pairs.
pub fn alpha(path: &Path) -> Result<Vec<ssr_core::Complex<f64>>> {
    let pairs: Vec<[f64; 2]> = parse(&read(path)?)?;
    Ok(pairs.into_iter().map(|[re, im]| ssr_core::Complex::new(re, im)).collect())
}
