//! JSON file schemas and conversions to and from the library types.
//!
//! - chain: `{"states": [..], "pi": [..], "Q": [[..]..]}`
//! - graph: `{"vertices": [..], "edges": [["a","b"]..], "H": [..]}`
//!   (`H` optional; only the glued-graph command reads it)
//! - partition: `{"classes": [..], "membership": [[..]..]}` with rows in
//!   the chain's state order
//! - couplings: `{"pairs": [{"i": .., "j": .., "support": [[x,y,mass]..]}..]}`
//!   with states and classes referenced by name

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use fuzzymc::coupling::{Coupling, CouplingSet};
use fuzzymc::decomposition::FuzzyPartition;
use fuzzymc::glued::BaseGraph;
use fuzzymc::linalg::Matrix;
use fuzzymc::ReversibleChain;

use crate::{CliError, CliResult};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub states: Vec<String>,
    pub pi: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String)>,
    #[serde(rename = "H", default)]
    pub h: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub classes: Vec<String>,
    pub membership: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingsFile {
    pub pairs: Vec<CouplingPairFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingPairFile {
    pub i: String,
    pub j: String,
    pub support: Vec<(String, String, f64)>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("cannot parse {}: {e}", path.display())))
}

pub fn load_chain(path: &Path) -> CliResult<ReversibleChain> {
    let file: ChainFile = read_json(path)?;
    chain_from_file(file)
}

pub fn chain_from_file(file: ChainFile) -> CliResult<ReversibleChain> {
    let q = Matrix::from_rows(&file.q)?;
    Ok(ReversibleChain::new(file.states, file.pi, q)?)
}

pub fn load_partition(path: &Path) -> CliResult<FuzzyPartition> {
    let file: PartitionFile = read_json(path)?;
    let membership = Matrix::from_rows(&file.membership)?;
    Ok(FuzzyPartition::new(file.classes, membership)?)
}

pub fn load_graph(path: &Path) -> CliResult<BaseGraph> {
    let file: GraphFile = read_json(path)?;
    let index: BTreeMap<&str, usize> = file
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let mut edges = Vec::with_capacity(file.edges.len());
    for (u, v) in &file.edges {
        let ui = *index
            .get(u.as_str())
            .ok_or_else(|| CliError::Semantic(format!("edge endpoint {u:?} is not a vertex")))?;
        let vi = *index
            .get(v.as_str())
            .ok_or_else(|| CliError::Semantic(format!("edge endpoint {v:?} is not a vertex")))?;
        edges.push((ui, vi));
    }
    let mut h = Vec::with_capacity(file.h.len());
    for name in &file.h {
        h.push(
            *index
                .get(name.as_str())
                .ok_or_else(|| CliError::Semantic(format!("H member {name:?} is not a vertex")))?,
        );
    }
    Ok(BaseGraph::new(file.vertices, edges, h)?)
}

pub fn load_couplings(
    path: &Path,
    chain: &ReversibleChain,
    partition: &FuzzyPartition,
) -> CliResult<CouplingSet> {
    let file: CouplingsFile = read_json(path)?;
    let state_index: BTreeMap<&str, usize> = chain
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let class_index: BTreeMap<&str, usize> = partition
        .class_ids()
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut couplings = Vec::with_capacity(file.pairs.len());
    for pair in &file.pairs {
        let i = *class_index
            .get(pair.i.as_str())
            .ok_or_else(|| CliError::Semantic(format!("unknown class {:?}", pair.i)))?;
        let j = *class_index
            .get(pair.j.as_str())
            .ok_or_else(|| CliError::Semantic(format!("unknown class {:?}", pair.j)))?;
        let mut support = Vec::with_capacity(pair.support.len());
        for (x, y, mass) in &pair.support {
            let xi = *state_index
                .get(x.as_str())
                .ok_or_else(|| CliError::Semantic(format!("unknown state {x:?} in coupling")))?;
            let yi = *state_index
                .get(y.as_str())
                .ok_or_else(|| CliError::Semantic(format!("unknown state {y:?} in coupling")))?;
            support.push((xi, yi, *mass));
        }
        couplings.push(Coupling { i, j, support });
    }
    Ok(CouplingSet::new(couplings))
}
