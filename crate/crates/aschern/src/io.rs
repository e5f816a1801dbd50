//! JSON schemas for meshes, samples, chains and run reports.
//!
//! Complex numbers serialize as [re, im] pairs everywhere. Map keys are
//! stringified point ids; BTreeMap keeps output deterministic.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ascomplex::{Chain, Tuple};
use crate::chern_even::ProjectorSample;
use crate::chern_odd::UnitarySample;
use crate::error::{Error, Result};
use crate::geom::Mesh;
use crate::linalg::CMat;

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct MeshJson {
    pub dim: usize,
    pub vertices: BTreeMap<String, Vec<f64>>,
    pub simplices: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SampleJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub kind: String,
    pub rho: f64,
    pub mats: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ChainTermJson {
    pub c: [f64; 2],
    pub tuple: Vec<usize>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ChainJson {
    pub degree: usize,
    pub terms: Vec<ChainTermJson>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    pub seed: Option<u64>,
    /// Pairing value as [re, im] where the command produces one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<[f64; 2]>,
    pub checks: Vec<CheckRecord>,
    /// Populated only on request; reports stay byte-identical across runs
    /// with the same seed otherwise.
    pub timings_ms: BTreeMap<String, f64>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(command: impl Into<String>, inputs_digest: String, seed: Option<u64>) -> Self {
        RunReport {
            command: command.into(),
            inputs_digest,
            seed,
            value: None,
            checks: Vec::new(),
            timings_ms: BTreeMap::new(),
            pass: true,
        }
    }

    pub fn record(&mut self, name: impl Into<String>, value: f64, tolerance: f64) -> bool {
        let pass = value.abs() <= tolerance;
        self.checks.push(CheckRecord { name: name.into(), value, tolerance, pass });
        self.pass &= pass;
        pass
    }

    pub fn record_bool(&mut self, name: impl Into<String>, pass: bool) {
        self.checks.push(CheckRecord {
            name: name.into(),
            value: if pass { 0.0 } else { 1.0 },
            tolerance: 0.5,
            pass,
        });
        self.pass &= pass;
    }
}

/// FNV-1a digest of the canonical input bytes; identifies inputs in reports.
pub fn digest(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

fn mat_to_json(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn mat_from_json(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let data: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    CMat::from_rows(&data)
}

pub fn mesh_to_json(mesh: &Mesh) -> MeshJson {
    MeshJson {
        dim: mesh.dim,
        vertices: mesh
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (i.to_string(), v.clone()))
            .collect(),
        simplices: mesh.simplices.clone(),
    }
}

pub fn mesh_from_json(j: &MeshJson) -> Result<Mesh> {
    let count = j.vertices.len();
    let mut vertices = vec![Vec::new(); count];
    for (key, coords) in &j.vertices {
        let id: usize = key
            .parse()
            .map_err(|_| Error::Io(format!("vertex key '{key}' is not an integer id")))?;
        if id >= count {
            return Err(Error::Io(format!("vertex id {id} out of range 0..{count}")));
        }
        vertices[id] = coords.clone();
    }
    if vertices.iter().any(|v| v.is_empty()) {
        return Err(Error::Io("vertex ids are not contiguous from 0".into()));
    }
    Mesh::new(j.dim, vertices, j.simplices.clone())
}

pub enum AnySample {
    Unitary(UnitarySample),
    Projector(ProjectorSample),
}

pub fn unitary_to_json(s: &UnitarySample) -> SampleJson {
    SampleJson {
        n: s.matrix_size(),
        kind: "unitary".into(),
        rho: s.rho(),
        mats: s
            .mats()
            .iter()
            .enumerate()
            .map(|(i, m)| (i.to_string(), mat_to_json(m)))
            .collect(),
    }
}

pub fn projector_to_json(s: &ProjectorSample) -> SampleJson {
    SampleJson {
        n: s.matrix_size(),
        kind: "projector".into(),
        rho: s.rho(),
        mats: s
            .mats()
            .iter()
            .enumerate()
            .map(|(i, m)| (i.to_string(), mat_to_json(m)))
            .collect(),
    }
}

pub fn sample_from_json(j: &SampleJson) -> Result<AnySample> {
    let count = j.mats.len();
    let mut mats: Vec<Option<CMat>> = vec![None; count];
    for (key, rows) in &j.mats {
        let id: usize = key
            .parse()
            .map_err(|_| Error::Io(format!("sample key '{key}' is not an integer id")))?;
        if id >= count {
            return Err(Error::Io(format!("sample id {id} out of range 0..{count}")));
        }
        let m = mat_from_json(rows)?;
        if m.dim() != j.n {
            return Err(Error::Io(format!(
                "matrix at id {id} has size {} but header says {}",
                m.dim(),
                j.n
            )));
        }
        mats[id] = Some(m);
    }
    let mats: Vec<CMat> = mats
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Io("sample ids are not contiguous from 0".into()))?;
    match j.kind.as_str() {
        "unitary" => Ok(AnySample::Unitary(UnitarySample::new(mats, j.rho)?)),
        "projector" => Ok(AnySample::Projector(ProjectorSample::new(mats, j.rho)?)),
        other => Err(Error::Io(format!("unknown sample kind '{other}'"))),
    }
}

pub fn chain_to_json(chain: &Chain) -> ChainJson {
    ChainJson {
        degree: chain.degree(),
        terms: chain
            .terms()
            .iter()
            .map(|(c, t)| ChainTermJson { c: [c.re, c.im], tuple: t.0.clone() })
            .collect(),
    }
}

pub fn chain_from_json(j: &ChainJson) -> Chain {
    Chain::from_terms(
        j.degree,
        j.terms
            .iter()
            .map(|t| (Complex64::new(t.c[0], t.c[1]), Tuple::new(t.tuple.clone()))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_roundtrip() {
        let mu = Chain::from_terms(
            1,
            [
                (Complex64::new(1.0, 0.0), Tuple::new([0, 1])),
                (Complex64::new(-2.0, 0.5), Tuple::new([1, 2])),
            ],
        );
        let j = chain_to_json(&mu);
        let s = serde_json::to_string(&j).unwrap();
        let back: ChainJson = serde_json::from_str(&s).unwrap();
        assert_eq!(chain_from_json(&back), mu);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(b"abc"), digest(b"abc"));
        assert_ne!(digest(b"abc"), digest(b"abd"));
    }
}
