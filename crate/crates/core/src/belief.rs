//! Object-location priors and the per-hunt posterior.
//!
//! Each object has its own categorical distribution over nodes. Visiting a
//! node reveals exactly which objects are there, so the rows stay independent
//! and the joint posterior is the product of the row posteriors.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::NodeId;

/// Tolerance on row sums accepted when a prior is constructed.
pub const PRIOR_SUM_TOLERANCE: f64 = 1e-6;

/// Remaining mass below which a renormalization is treated as a contradiction.
pub const MIN_REMAINING_MASS: f64 = 1e-12;

/// Default ceiling on the number of posterior arrangements enumerated at once.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeliefError {
    #[error("prior must cover at least one node")]
    NoNodes,
    #[error("object {object}: row has {len} entries, expected {expected}")]
    RowLength { object: usize, len: usize, expected: usize },
    #[error("object {object}: invalid probability {value} at node {node}")]
    InvalidProbability { object: usize, node: usize, value: f64 },
    #[error("object {object}: probabilities sum to {sum}, expected 1")]
    NotNormalized { object: usize, sum: f64 },
    #[error("object {0} is out of range")]
    ObjectOutOfRange(usize),
    #[error("node {0} is out of range")]
    NodeOutOfRange(usize),
    #[error("observation contradicts the belief: object {object} at node {node}: {reason}")]
    Inconsistent { object: usize, node: usize, reason: &'static str },
    #[error("{count} posterior arrangements exceed the cap of {cap}; use sampling instead")]
    EnumerationTooLarge { count: u128, cap: usize },
}

/// Index of an object in a hunt.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectId(pub usize);

impl ObjectId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Independent per-object location distributions, `probs[o][n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorModel {
    node_count: usize,
    probs: Vec<Vec<f64>>,
}

impl PriorModel {
    /// Validates each row (entries in `[0, 1]`, sum within
    /// [`PRIOR_SUM_TOLERANCE`] of 1) and rescales it to sum to 1.
    pub fn new(node_count: usize, probs: Vec<Vec<f64>>) -> Result<Self, BeliefError> {
        if node_count == 0 {
            return Err(BeliefError::NoNodes);
        }
        let mut probs = probs;
        for (object, row) in probs.iter_mut().enumerate() {
            if row.len() != node_count {
                return Err(BeliefError::RowLength { object, len: row.len(), expected: node_count });
            }
            for (node, &p) in row.iter().enumerate() {
                if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                    return Err(BeliefError::InvalidProbability { object, node, value: p });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PRIOR_SUM_TOLERANCE {
                return Err(BeliefError::NotNormalized { object, sum });
            }
            for p in row.iter_mut() {
                *p /= sum;
            }
        }
        Ok(Self { node_count, probs })
    }

    /// Builds a prior from sparse `(node, probability)` lists, one per object.
    pub fn from_sparse(node_count: usize, rows: &[Vec<(NodeId, f64)>]) -> Result<Self, BeliefError> {
        let mut dense = vec![vec![0.0; node_count]; rows.len()];
        for (o, row) in rows.iter().enumerate() {
            for &(n, p) in row {
                if n.0 >= node_count {
                    return Err(BeliefError::NodeOutOfRange(n.0));
                }
                dense[o][n.0] += p;
            }
        }
        Self::new(node_count, dense)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn object_count(&self) -> usize {
        self.probs.len()
    }

    pub fn row(&self, object: ObjectId) -> &[f64] {
        &self.probs[object.0]
    }

    pub fn prob(&self, object: ObjectId, node: NodeId) -> f64 {
        self.probs[object.0][node.0]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    /// Nodes with positive mass for `object`, ascending.
    pub fn support(&self, object: ObjectId) -> Vec<NodeId> {
        support_of(&self.probs[object.0])
    }

    /// Nodes with positive mass for any object, ascending.
    pub fn support_union(&self) -> Vec<NodeId> {
        (0..self.node_count).filter(|&n| self.probs.iter().any(|row| row[n] > 0.0)).map(NodeId).collect()
    }

    /// Draws every object's location independently.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Arrangement {
        Arrangement { location: self.probs.iter().map(|row| sample_row(row, rng)).collect() }
    }

    /// True when every object's location lies in its row's support.
    pub fn is_consistent(&self, arrangement: &Arrangement) -> bool {
        arrangement.location.len() == self.probs.len()
            && arrangement.location.iter().zip(&self.probs).all(|(n, row)| n.0 < self.node_count && row[n.0] > 0.0)
    }
}

fn support_of(row: &[f64]) -> Vec<NodeId> {
    row.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(n, _)| NodeId(n)).collect()
}

fn sample_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> NodeId {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (n, &p) in row.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last_positive = n;
        if u < cumulative {
            return NodeId(n);
        }
    }
    // u landed in the rounding gap above the final cumulative sum
    NodeId(last_positive)
}

/// The hidden location of every object in one hunt.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arrangement {
    pub location: Vec<NodeId>,
}

impl Arrangement {
    pub fn new(location: Vec<NodeId>) -> Self {
        Self { location }
    }

    pub fn objects_at(&self, node: NodeId) -> Vec<ObjectId> {
        self.location.iter().enumerate().filter(|(_, &n)| n == node).map(|(o, _)| ObjectId(o)).collect()
    }

    /// Distinct nodes holding at least one object, ascending.
    pub fn distinct_nodes(&self) -> Vec<NodeId> {
        let mut nodes = self.location.clone();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }
}

/// Samples one arrangement from a seeded stream.
pub fn sample_arrangement(prior: &PriorModel, rng_seed: u64) -> Arrangement {
    prior.sample(&mut ChaCha8Rng::seed_from_u64(rng_seed))
}

/// Posterior over object locations given everything observed so far,
/// together with the task vector.
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefState {
    posterior: Vec<Vec<f64>>,
    found_at: Vec<Option<NodeId>>,
}

impl BeliefState {
    pub fn from_prior(prior: &PriorModel) -> Self {
        Self { posterior: prior.probs.clone(), found_at: vec![None; prior.object_count()] }
    }

    pub fn node_count(&self) -> usize {
        self.posterior.first().map_or(0, Vec::len)
    }

    pub fn object_count(&self) -> usize {
        self.posterior.len()
    }

    pub fn posterior(&self, object: ObjectId, node: NodeId) -> f64 {
        self.posterior[object.0][node.0]
    }

    pub fn row(&self, object: ObjectId) -> &[f64] {
        &self.posterior[object.0]
    }

    pub fn is_found(&self, object: ObjectId) -> bool {
        self.found_at[object.0].is_some()
    }

    pub fn found_at(&self, object: ObjectId) -> Option<NodeId> {
        self.found_at[object.0]
    }

    /// Found flags per object.
    pub fn task_vector(&self) -> Vec<bool> {
        self.found_at.iter().map(Option::is_some).collect()
    }

    pub fn all_found(&self) -> bool {
        self.found_at.iter().all(Option::is_some)
    }

    pub fn unfound(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.found_at.iter().enumerate().filter(|(_, f)| f.is_none()).map(|(o, _)| ObjectId(o))
    }

    /// Nodes with positive mass for some unfound object, ascending.
    pub fn candidate_nodes(&self) -> Vec<NodeId> {
        (0..self.node_count()).filter(|&n| self.unfound().any(|o| self.posterior[o.0][n] > 0.0)).map(NodeId).collect()
    }

    /// Applies the observation made at `node`: exactly `present` are there.
    ///
    /// The update is all-or-nothing: on error the belief is left untouched.
    pub fn observe(&mut self, node: NodeId, present: &[ObjectId]) -> Result<(), BeliefError> {
        let n = node.0;
        if n >= self.node_count() {
            return Err(BeliefError::NodeOutOfRange(n));
        }
        let mut is_present = vec![false; self.object_count()];
        for &o in present {
            if o.0 >= self.object_count() {
                return Err(BeliefError::ObjectOutOfRange(o.0));
            }
            is_present[o.0] = true;
            match self.found_at[o.0] {
                Some(at) if at != node => {
                    return Err(BeliefError::Inconsistent {
                        object: o.0,
                        node: n,
                        reason: "object was already found elsewhere",
                    })
                }
                Some(_) => {}
                None if self.posterior[o.0][n] <= 0.0 => {
                    return Err(BeliefError::Inconsistent {
                        object: o.0,
                        node: n,
                        reason: "object seen where it has zero probability",
                    })
                }
                None => {}
            }
        }
        for (o, &here) in is_present.iter().enumerate() {
            if here || self.found_at[o].is_some() || self.posterior[o][n] <= 0.0 {
                continue;
            }
            if remaining_mass(&self.posterior[o], n) < MIN_REMAINING_MASS {
                return Err(BeliefError::Inconsistent {
                    object: o,
                    node: n,
                    reason: "object absent from the only node it can occupy",
                });
            }
        }

        for (o, &here) in is_present.iter().enumerate() {
            if self.found_at[o].is_some() {
                continue;
            }
            let row = &mut self.posterior[o];
            if here {
                row.iter_mut().for_each(|p| *p = 0.0);
                row[n] = 1.0;
                self.found_at[o] = Some(node);
            } else if row[n] > 0.0 {
                let rest = remaining_mass(row, n);
                row[n] = 0.0;
                row.iter_mut().for_each(|p| *p /= rest);
            }
        }
        Ok(())
    }

    /// Observes `node` against a known arrangement.
    pub fn observe_truth(&mut self, node: NodeId, truth: &Arrangement) -> Result<Vec<ObjectId>, BeliefError> {
        let present = truth.objects_at(node);
        self.observe(node, &present)?;
        Ok(present)
    }

    /// Probability that at least one unfound object is at `node`.
    pub fn prob_any_unfound(&self, node: NodeId) -> f64 {
        let miss: f64 = self.unfound().map(|o| 1.0 - self.posterior[o.0][node.0]).product();
        1.0 - miss
    }

    /// Enumerates the joint posterior over the locations of unfound objects.
    pub fn enumerate_posterior_arrangements(&self, cap: usize) -> Result<PosteriorWorlds, BeliefError> {
        let objects: Vec<ObjectId> = self.unfound().collect();
        let supports: Vec<Vec<NodeId>> = objects.iter().map(|o| support_of(&self.posterior[o.0])).collect();
        let count = supports.iter().fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128));
        if count > cap as u128 {
            return Err(BeliefError::EnumerationTooLarge { count, cap });
        }

        let mut worlds = Vec::with_capacity(count as usize);
        let mut digits = vec![0usize; objects.len()];
        loop {
            let mut probability = 1.0;
            let mut locations = Vec::with_capacity(objects.len());
            for ((o, support), &d) in objects.iter().zip(&supports).zip(&digits) {
                let node = support[d];
                probability *= self.posterior[o.0][node.0];
                locations.push(node);
            }
            worlds.push(World { locations, probability });

            // odometer, last object fastest
            let mut pos = objects.len();
            loop {
                if pos == 0 {
                    return Ok(PosteriorWorlds { objects, worlds });
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < supports[pos].len() {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }
}

fn remaining_mass(row: &[f64], skip: usize) -> f64 {
    row.iter().enumerate().filter(|&(n, _)| n != skip).map(|(_, p)| p).sum()
}

/// One joint placement of the unfound objects.
#[derive(Clone, Debug, PartialEq)]
pub struct World {
    /// Location of `PosteriorWorlds::objects[i]` at index `i`.
    pub locations: Vec<NodeId>,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorWorlds {
    pub objects: Vec<ObjectId>,
    pub worlds: Vec<World>,
}

impl PosteriorWorlds {
    pub fn total_probability(&self) -> f64 {
        self.worlds.iter().map(|w| w.probability).sum()
    }
}
