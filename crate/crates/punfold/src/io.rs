//! Canonical JSON file formats.
//!
//! A complex file is `{"dim": d, "facets": [[v,...],...], "attrs": {...}}`
//! with every facet sorted ascending, the facet list sorted
//! lexicographically, object keys sorted, and a trailing newline — so equal
//! complexes serialize to identical bytes and digests are stable. Scripts are
//! `{"base": ..., "steps": [{"edge": [u,v], "new": w},...]}` and replay
//! bit-exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::coloring::VertexColoring;
use crate::complex::{ComplexError, SimplicialComplex, VertexId};
use crate::subdivision::SubdivisionScript;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("bad file: {0}")]
    BadFile(String),
}

/// On-disk complex representation. `attrs` carries optional named vertex or
/// face attribute maps, e.g. a coloring under `"colors"`.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct ComplexFile {
    pub dim: usize,
    pub facets: Vec<Vec<VertexId>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: BTreeMap<String, Value>,
}

impl ComplexFile {
    pub fn from_complex(complex: &SimplicialComplex) -> Self {
        ComplexFile {
            dim: complex.dim(),
            facets: complex.facets().iter().map(|f| f.vertices().to_vec()).collect(),
            attrs: BTreeMap::new(),
        }
    }

    pub fn with_coloring(mut self, coloring: &VertexColoring) -> Self {
        let map: BTreeMap<String, Value> = coloring
            .colors
            .iter()
            .map(|(v, c)| (v.to_string(), Value::from(*c)))
            .collect();
        self.attrs.insert("colors".into(), Value::Object(map.into_iter().collect()));
        self
    }

    pub fn to_complex(&self) -> Result<SimplicialComplex, ComplexError> {
        SimplicialComplex::build_checked(self.dim, self.facets.clone())
    }

    pub fn coloring(&self) -> Result<Option<VertexColoring>, IoError> {
        let Some(value) = self.attrs.get("colors") else {
            return Ok(None);
        };
        let obj = value
            .as_object()
            .ok_or_else(|| IoError::BadFile("attrs.colors must be an object".into()))?;
        let mut colors = BTreeMap::new();
        for (k, v) in obj {
            let vertex: VertexId = k
                .parse()
                .map_err(|_| IoError::BadFile(format!("bad vertex id {k:?} in colors")))?;
            let color = v
                .as_u64()
                .ok_or_else(|| IoError::BadFile(format!("bad color for vertex {k}")))?;
            colors.insert(vertex, color as usize);
        }
        Ok(Some(VertexColoring::new(colors)))
    }

    /// Canonical byte form: compact JSON with sorted keys, trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut normalized = self.clone();
        for f in &mut normalized.facets {
            f.sort_unstable();
        }
        normalized.facets.sort();
        let mut s = serde_json::to_string(&normalized).expect("complex files serialize");
        s.push('\n');
        s
    }
}

/// On-disk subdivision script. `base` names or inlines the complex the script
/// applies to.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScriptFile {
    pub base: Value,
    pub steps: Vec<crate::subdivision::SubdivisionStep>,
}

impl ScriptFile {
    pub fn new(base: Value, script: &SubdivisionScript) -> Self {
        ScriptFile { base, steps: script.steps.clone() }
    }

    pub fn script(&self) -> SubdivisionScript {
        SubdivisionScript { steps: self.steps.clone() }
    }

    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string(self).expect("script files serialize");
        s.push('\n');
        s
    }
}

pub fn read_complex(path: &Path) -> Result<(SimplicialComplex, ComplexFile), IoError> {
    let text = fs::read_to_string(path)?;
    let file: ComplexFile = serde_json::from_str(&text)?;
    let complex = file.to_complex()?;
    Ok((complex, file))
}

pub fn write_complex(path: &Path, file: &ComplexFile) -> Result<(), IoError> {
    fs::write(path, file.to_canonical_string())?;
    Ok(())
}

pub fn read_script(path: &Path) -> Result<ScriptFile, IoError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_script(path: &Path, file: &ScriptFile) -> Result<(), IoError> {
    fs::write(path, file.to_canonical_string())?;
    Ok(())
}

/// SHA-256 of a byte string, hex encoded; used by run reports to pin inputs.
pub fn digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{generate, GeneratorKind};

    #[test]
    fn canonical_round_trip_is_identity() {
        let k = generate(&GeneratorKind::CyclicSphere { polytope_dim: 4, n: 7 }).unwrap();
        let file = ComplexFile::from_complex(&k);
        let text = file.to_canonical_string();
        assert!(text.ends_with('\n'));
        let parsed: ComplexFile = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.to_complex().unwrap(), k);
        // writing again yields identical bytes
        assert_eq!(parsed.to_canonical_string(), text);
    }

    #[test]
    fn unsorted_input_normalizes() {
        let file = ComplexFile {
            dim: 2,
            facets: vec![vec![3, 2, 0], vec![2, 1, 0]],
            attrs: BTreeMap::new(),
        };
        let text = file.to_canonical_string();
        assert_eq!(text, "{\"dim\":2,\"facets\":[[0,1,2],[0,2,3]]}\n");
    }

    #[test]
    fn coloring_attrs_round_trip() {
        let k = generate(&GeneratorKind::CrossPolytope { d: 2 }).unwrap();
        let coloring = crate::coloring::find_foldable_coloring(&k).coloring().unwrap();
        let file = ComplexFile::from_complex(&k).with_coloring(&coloring);
        let text = file.to_canonical_string();
        let parsed: ComplexFile = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.coloring().unwrap().unwrap(), coloring);
    }

    #[test]
    fn digests_are_stable() {
        let k = generate(&GeneratorKind::BoundarySimplex { d: 2 }).unwrap();
        let a = digest(ComplexFile::from_complex(&k).to_canonical_string().as_bytes());
        let b = digest(ComplexFile::from_complex(&k).to_canonical_string().as_bytes());
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
    }
}
