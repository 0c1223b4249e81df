//! Pairwise domination relation between labelled norms, with evidence.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

/// A domination constant or a ratio, exact when it came from rational
/// arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Exact(Rational),
    Estimate(f64),
}

impl Bound {
    pub fn to_f64(&self) -> f64 {
        match self {
            Bound::Exact(r) => r.to_f64(),
            Bound::Estimate(x) => *x,
        }
    }
}

/// Evidence for one ordered pair: `lower` is dominated by `upper`
/// (`|a|_lower <= C |a|_upper`), or a vector family on which the ratio
/// `|a|_lower / |a|_upper` is large.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub lower: usize,
    pub upper: usize,
    pub dominated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<Bound>,
    /// Length `m` of the constant block `1^m` used as witness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_m: Option<Rational>,
    /// Exponent `k` of a breakpoint `tau^k` where the functions are ordered
    /// the wrong way.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_k: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_vector: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<Bound>,
}

impl Relation {
    pub fn dominated(lower: usize, upper: usize, constant: Bound) -> Self {
        Relation { lower, upper, dominated: true, constant: Some(constant), witness_m: None, witness_k: None, witness_vector: None, ratio: None }
    }

    pub fn block_witness(lower: usize, upper: usize, m: Rational, ratio: Bound) -> Self {
        Relation { lower, upper, dominated: false, constant: None, witness_m: Some(m), witness_k: None, witness_vector: None, ratio: Some(ratio) }
    }

    pub fn breakpoint_witness(lower: usize, upper: usize, k: Rational, ratio: Bound) -> Self {
        Relation { lower, upper, dominated: false, constant: None, witness_m: None, witness_k: Some(k), witness_vector: None, ratio: Some(ratio) }
    }

    pub fn vector_witness(lower: usize, upper: usize, v: Vec<f64>, ratio: Bound) -> Self {
        Relation { lower, upper, dominated: false, constant: None, witness_m: None, witness_k: None, witness_vector: Some(v), ratio: Some(ratio) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DominationError {
    #[error("relation list has {got} entries, expected {expected}")]
    Incomplete { got: usize, expected: usize },
    #[error("relation ({0}, {1}) is missing or out of place")]
    Misplaced(usize, usize),
    #[error("node {0} is not dominated by itself")]
    NotReflexive(usize),
    #[error("{i} <= {j} and {j} <= {k} but not {i} <= {k}")]
    NotTransitive { i: usize, j: usize, k: usize },
    #[error("order has {expected} elements but the matrix has {got} nodes")]
    SizeMismatch { expected: usize, got: usize },
    #[error("mapping is not a bijection onto the nodes")]
    BadMapping,
    #[error("json: {0}")]
    Json(String),
}

/// Full `n x n` relation between labelled nodes, stored row-major by `lower`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationMatrix {
    nodes: Vec<String>,
    relations: Vec<Relation>,
}

impl DominationMatrix {
    pub fn new(nodes: Vec<String>, mut relations: Vec<Relation>) -> Result<Self, DominationError> {
        let n = nodes.len();
        if relations.len() != n * n {
            return Err(DominationError::Incomplete { got: relations.len(), expected: n * n });
        }
        relations.sort_by_key(|r| (r.lower, r.upper));
        for (idx, r) in relations.iter().enumerate() {
            if r.lower != idx / n || r.upper != idx % n {
                return Err(DominationError::Misplaced(r.lower, r.upper));
            }
        }
        Ok(DominationMatrix { nodes, relations })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn relation(&self, lower: usize, upper: usize) -> &Relation {
        &self.relations[lower * self.nodes.len() + upper]
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    /// Whether node `lower` is dominated by node `upper`.
    pub fn dominates(&self, lower: usize, upper: usize) -> bool {
        self.relation(lower, upper).dominated
    }

    pub fn leq_matrix(&self) -> Vec<Vec<bool>> {
        let n = self.nodes.len();
        (0..n).map(|i| (0..n).map(|j| self.dominates(i, j)).collect()).collect()
    }

    /// Reflexivity and transitivity of the recorded relation.
    pub fn check_preorder(&self) -> Result<(), DominationError> {
        let n = self.nodes.len();
        for i in 0..n {
            if !self.dominates(i, i) {
                return Err(DominationError::NotReflexive(i));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !self.dominates(i, j) {
                    continue;
                }
                for k in 0..n {
                    if self.dominates(j, k) && !self.dominates(i, k) {
                        return Err(DominationError::NotTransitive { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, DominationError> {
        let raw: DominationMatrix = serde_json::from_str(s).map_err(|e| DominationError::Json(e.to_string()))?;
        DominationMatrix::new(raw.nodes, raw.relations)
    }
}

/// First pair `(i, j)` where `leq[i][j]` disagrees with
/// `matrix.dominates(mapping[i], mapping[j])`, or `None` if the map is an
/// order isomorphism.
pub fn order_counterexample(
    leq: &[Vec<bool>],
    matrix: &DominationMatrix,
    mapping: &[usize],
) -> Result<Option<(usize, usize)>, DominationError> {
    let n = leq.len();
    if n != matrix.len() {
        return Err(DominationError::SizeMismatch { expected: n, got: matrix.len() });
    }
    let mut seen = vec![false; n];
    if mapping.len() != n {
        return Err(DominationError::BadMapping);
    }
    for &m in mapping {
        if m >= n || seen[m] {
            return Err(DominationError::BadMapping);
        }
        seen[m] = true;
    }
    for i in 0..n {
        for j in 0..n {
            if leq[i][j] != matrix.dominates(mapping[i], mapping[j]) {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}
