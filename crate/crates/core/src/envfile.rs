//! JSON environment files.
//!
//! ```json
//! {
//!   "nodes": [{"id": 0, "x": 1.5, "y": 2.0}, ...],
//!   "objects": [{"name": "A", "locations": {"2": 0.1, "3": 0.9}}],
//!   "start": 0
//! }
//! ```
//!
//! `cost_matrix` (rows of numbers or `null` for a missing edge) may replace
//! `nodes`; exactly one of the two must be present. Missing edges are filled
//! in with shortest-path costs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{BeliefError, PriorModel};
use crate::graph::{metric_closure, GraphError, NodeId, WeightedGraph};

#[derive(Debug, Error)]
pub enum EnvFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Prior(#[from] BeliefError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub name: String,
    /// Node id (as a string key) to probability.
    pub locations: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<NodeRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_matrix: Option<Vec<Vec<Option<f64>>>>,
    pub objects: Vec<ObjectRecord>,
    pub start: usize,
}

/// A loaded environment.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    pub graph: WeightedGraph,
    pub prior: PriorModel,
    pub object_names: Vec<String>,
    pub start: NodeId,
}

impl Environment {
    pub fn to_file(&self) -> EnvFile {
        let (nodes, cost_matrix) = match self.graph.coords() {
            Some(c) => (Some(c.iter().enumerate().map(|(id, &(x, y))| NodeRecord { id, x, y }).collect()), None),
            None => {
                (None, Some(self.graph.to_matrix().into_iter().map(|r| r.into_iter().map(Some).collect()).collect()))
            }
        };
        let objects = self
            .prior
            .rows()
            .iter()
            .zip(&self.object_names)
            .map(|(row, name)| ObjectRecord {
                name: name.clone(),
                locations: row.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(n, &p)| (n.to_string(), p)).collect(),
            })
            .collect();
        EnvFile { nodes, cost_matrix, objects, start: self.start.0 }
    }
}

impl EnvFile {
    pub fn into_environment(self) -> Result<Environment, EnvFileError> {
        let graph = match (self.nodes, self.cost_matrix) {
            (Some(nodes), None) => {
                let n = nodes.len();
                let mut coords = vec![None; n];
                for rec in nodes {
                    if rec.id >= n {
                        return Err(EnvFileError::Invalid(format!("node id {} out of range 0..{n}", rec.id)));
                    }
                    if coords[rec.id].replace((rec.x, rec.y)).is_some() {
                        return Err(EnvFileError::Invalid(format!("duplicate node id {}", rec.id)));
                    }
                }
                WeightedGraph::from_coords(coords.into_iter().map(Option::unwrap).collect())?
            }
            (None, Some(matrix)) => metric_closure(&matrix)?,
            _ => return Err(EnvFileError::Invalid("exactly one of `nodes` and `cost_matrix` is required".into())),
        };
        let n = graph.node_count();
        if self.start >= n {
            return Err(EnvFileError::Invalid(format!("start node {} out of range 0..{n}", self.start)));
        }

        let mut rows = Vec::with_capacity(self.objects.len());
        let mut names = Vec::with_capacity(self.objects.len());
        for obj in self.objects {
            let mut row = vec![0.0; n];
            for (key, p) in &obj.locations {
                let node: usize = key
                    .trim()
                    .parse()
                    .map_err(|_| EnvFileError::Invalid(format!("object {}: bad node key {key:?}", obj.name)))?;
                if node >= n {
                    return Err(EnvFileError::Invalid(format!("object {}: node {node} out of range", obj.name)));
                }
                row[node] += p;
            }
            rows.push(row);
            names.push(obj.name);
        }
        let prior = PriorModel::new(n, rows)?;
        Ok(Environment { graph, prior, object_names: names, start: NodeId(self.start) })
    }
}

pub fn read_environment<R: Read>(input: R) -> Result<Environment, EnvFileError> {
    let file: EnvFile = serde_json::from_reader(input)?;
    file.into_environment()
}

pub fn write_environment<W: Write>(mut out: W, env: &Environment) -> Result<(), EnvFileError> {
    serde_json::to_writer_pretty(&mut out, &env.to_file())?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn load_environment(path: &Path) -> Result<Environment, EnvFileError> {
    read_environment(BufReader::new(File::open(path)?))
}

pub fn save_environment(path: &Path, env: &Environment) -> Result<(), EnvFileError> {
    write_environment(BufWriter::new(File::create(path)?), env)
}
