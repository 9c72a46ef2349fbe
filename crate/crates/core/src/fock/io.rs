//! JSON file formats for states, measurements and density operators.
//!
//! Complex numbers are written as `[re, im]` pairs and matrices row-major.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrError};
use crate::fock::{BlockedDensity, BlockedPureState, DensitySector, LocalPovm, PovmElement, SectorSpace};
use crate::scalar::{cplx, lit, to_f64, CMatrix, Real};
use crate::tol::Tolerances;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub n_total: usize,
    pub alice_dims: Vec<usize>,
    pub bob_dims: Vec<usize>,
    pub blocks: Vec<BlockEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub n_alice: usize,
    pub amplitudes: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFile {
    pub alice_dims: Vec<usize>,
    pub bob_dims: Vec<usize>,
    pub sectors: Vec<DensityEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEntry {
    pub n_total: usize,
    pub weight: f64,
    pub matrix: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmFile {
    /// Sector dimensions of the measured space; inferred from the matrices when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    pub elements: Vec<PovmElementEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmElementEntry {
    pub sectors: Vec<PovmSectorEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmSectorEntry {
    pub n: usize,
    pub matrix: JsonMatrix,
}

pub fn matrix_to_json<T: Real>(m: &CMatrix<T>) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [to_f64(m[(i, j)].re), to_f64(m[(i, j)].im)]).collect())
        .collect()
}

pub fn matrix_from_json<T: Real>(rows: &JsonMatrix) -> Result<CMatrix<T>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(SsrError::Format("ragged matrix".into()));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| cplx(lit(rows[i][j][0]), lit(rows[i][j][1]))))
}

impl<T: Real> BlockedPureState<T> {
    pub fn to_file(&self) -> StateFile {
        StateFile {
            n_total: self.n_total(),
            alice_dims: self.alice().dims().to_vec(),
            bob_dims: self.bob().dims().to_vec(),
            blocks: self
                .blocks()
                .iter()
                .map(|(&n, m)| BlockEntry { n_alice: n, amplitudes: matrix_to_json(m) })
                .collect(),
        }
    }

    pub fn from_file(f: &StateFile, tol: &Tolerances) -> Result<Self> {
        let mut blocks = BTreeMap::new();
        for b in &f.blocks {
            if blocks.insert(b.n_alice, matrix_from_json(&b.amplitudes)?).is_some() {
                return Err(SsrError::Format(format!("duplicate block {}", b.n_alice)));
            }
        }
        BlockedPureState::new_with(
            f.n_total,
            SectorSpace::new(f.alice_dims.clone())?,
            SectorSpace::new(f.bob_dims.clone())?,
            blocks,
            tol,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("state serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_with(text, &Tolerances::of::<T>())
    }

    pub fn from_json_with(text: &str, tol: &Tolerances) -> Result<Self> {
        let f: StateFile = serde_json::from_str(text).map_err(|e| SsrError::Format(e.to_string()))?;
        Self::from_file(&f, tol)
    }
}

impl<T: Real> LocalPovm<T> {
    pub fn to_file(&self) -> PovmFile {
        PovmFile {
            dims: Some(self.space().dims().to_vec()),
            elements: self
                .elements()
                .iter()
                .map(|e| PovmElementEntry {
                    sectors: e
                        .sectors
                        .iter()
                        .map(|(&n, m)| PovmSectorEntry { n, matrix: matrix_to_json(m) })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(f: &PovmFile, tol: &Tolerances) -> Result<Self> {
        let mut elements = Vec::with_capacity(f.elements.len());
        let mut inferred: BTreeMap<usize, usize> = BTreeMap::new();
        for e in &f.elements {
            let mut sectors = BTreeMap::new();
            for s in &e.sectors {
                let m = matrix_from_json::<T>(&s.matrix)?;
                inferred.insert(s.n, m.nrows());
                sectors.insert(s.n, m);
            }
            elements.push(PovmElement::new(sectors));
        }
        let dims = match &f.dims {
            Some(d) => d.clone(),
            None => {
                let n_max = inferred.keys().next_back().copied().unwrap_or(0);
                (0..=n_max).map(|n| inferred.get(&n).copied().unwrap_or(0)).collect()
            }
        };
        LocalPovm::new_with(SectorSpace::new(dims)?, elements, tol)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("POVM serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_with(text, &Tolerances::of::<T>())
    }

    pub fn from_json_with(text: &str, tol: &Tolerances) -> Result<Self> {
        let f: PovmFile = serde_json::from_str(text).map_err(|e| SsrError::Format(e.to_string()))?;
        Self::from_file(&f, tol)
    }
}

impl<T: Real> BlockedDensity<T> {
    pub fn to_file(&self) -> DensityFile {
        DensityFile {
            alice_dims: self.alice().dims().to_vec(),
            bob_dims: self.bob().dims().to_vec(),
            sectors: self
                .sectors()
                .iter()
                .map(|(&n, s)| DensityEntry { n_total: n, weight: to_f64(s.weight), matrix: matrix_to_json(&s.matrix) })
                .collect(),
        }
    }

    pub fn from_file(f: &DensityFile, tol: &Tolerances) -> Result<Self> {
        let mut sectors = BTreeMap::new();
        for s in &f.sectors {
            let sector = DensitySector { weight: lit(s.weight), matrix: matrix_from_json(&s.matrix)? };
            if sectors.insert(s.n_total, sector).is_some() {
                return Err(SsrError::Format(format!("duplicate sector {}", s.n_total)));
            }
        }
        BlockedDensity::new_with(
            SectorSpace::new(f.alice_dims.clone())?,
            SectorSpace::new(f.bob_dims.clone())?,
            sectors,
            tol,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("density serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_with(text, &Tolerances::of::<T>())
    }

    pub fn from_json_with(text: &str, tol: &Tolerances) -> Result<Self> {
        let f: DensityFile = serde_json::from_str(text).map_err(|e| SsrError::Format(e.to_string()))?;
        Self::from_file(&f, tol)
    }
}
