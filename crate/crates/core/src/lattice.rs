//! Finite lattices given by cover relations.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domination::{order_counterexample, DominationError, DominationMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("no elements")]
    Empty,
    #[error("duplicate element name {0:?}")]
    DuplicateName(String),
    #[error("unknown element {0:?} in covers")]
    UnknownName(String),
    #[error("cycle through {0:?} and {1:?}")]
    NotAntisymmetric(String, String),
    #[error("{0:?} and {1:?} have no least upper bound")]
    NoJoin(String, String),
    #[error("{0:?} and {1:?} have no greatest lower bound")]
    NoMeet(String, String),
    #[error("no minimum element")]
    NoMinimum,
    #[error("relation matrix is not square")]
    BadMatrix,
    #[error("json: {0}")]
    Json(String),
    #[error(transparent)]
    Domination(#[from] DominationError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeDoc {
    pub elements: Vec<String>,
    #[serde(default)]
    pub covers: Vec<(String, String)>,
}

/// A validated finite lattice with its full order, join and meet tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteLattice {
    names: Vec<String>,
    leq: Vec<Vec<bool>>,
    join: Vec<Vec<usize>>,
    meet: Vec<Vec<usize>>,
    minimum: usize,
    covers: Vec<(usize, usize)>,
}

impl FiniteLattice {
    /// From covers `(a, b)` meaning `a < b`; takes the reflexive
    /// transitive closure and checks the lattice axioms.
    pub fn from_covers(names: Vec<String>, covers: &[(usize, usize)]) -> Result<Self, LatticeError> {
        let n = names.len();
        if n == 0 {
            return Err(LatticeError::Empty);
        }
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if seen.insert(name.clone(), i).is_some() {
                return Err(LatticeError::DuplicateName(name.clone()));
            }
        }
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in covers {
            if a >= n || b >= n {
                return Err(LatticeError::UnknownName(format!("#{}", a.max(b))));
            }
            leq[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        Self::from_order(names, leq)
    }

    /// From a full order matrix.
    pub fn from_leq(names: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self, LatticeError> {
        if leq.len() != names.len() || leq.iter().any(|r| r.len() != names.len()) {
            return Err(LatticeError::BadMatrix);
        }
        let l = Self::from_covers(names, &cover_pairs(&leq))?;
        if l.leq != leq {
            return Err(LatticeError::BadMatrix);
        }
        Ok(l)
    }

    fn from_order(names: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self, LatticeError> {
        let n = names.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if leq[i][j] && leq[j][i] {
                    return Err(LatticeError::NotAntisymmetric(names[i].clone(), names[j].clone()));
                }
            }
        }
        let minimum = (0..n).find(|&m| (0..n).all(|j| leq[m][j])).ok_or(LatticeError::NoMinimum)?;
        let mut join = vec![vec![0; n]; n];
        let mut meet = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let ub: Vec<usize> = (0..n).filter(|&u| leq[i][u] && leq[j][u]).collect();
                join[i][j] = ub
                    .iter()
                    .copied()
                    .find(|&u| ub.iter().all(|&v| leq[u][v]))
                    .ok_or_else(|| LatticeError::NoJoin(names[i].clone(), names[j].clone()))?;
                let lb: Vec<usize> = (0..n).filter(|&l| leq[l][i] && leq[l][j]).collect();
                meet[i][j] = lb
                    .iter()
                    .copied()
                    .find(|&l| lb.iter().all(|&v| leq[v][l]))
                    .ok_or_else(|| LatticeError::NoMeet(names[i].clone(), names[j].clone()))?;
            }
        }
        let covers = cover_pairs(&leq);
        Ok(FiniteLattice { names, leq, join, meet, minimum, covers })
    }

    pub fn from_doc(doc: &LatticeDoc) -> Result<Self, LatticeError> {
        let index: HashMap<&str, usize> = doc.elements.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let look = |s: &String| index.get(s.as_str()).copied().ok_or_else(|| LatticeError::UnknownName(s.clone()));
        let covers = doc
            .covers
            .iter()
            .map(|(a, b)| Ok((look(a)?, look(b)?)))
            .collect::<Result<Vec<_>, LatticeError>>()?;
        Self::from_covers(doc.elements.clone(), &covers)
    }

    /// `{"elements": [...], "covers": [[a, b], ...]}`.
    pub fn parse_json(s: &str) -> Result<Self, LatticeError> {
        let doc: LatticeDoc = serde_json::from_str(s).map_err(|e| LatticeError::Json(e.to_string()))?;
        Self::from_doc(&doc)
    }

    pub fn to_doc(&self) -> LatticeDoc {
        LatticeDoc {
            elements: self.names.clone(),
            covers: self.covers.iter().map(|&(a, b)| (self.names[a].clone(), self.names[b].clone())).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("lattice serializes")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn minimum(&self) -> usize {
        self.minimum
    }

    /// Largest element (exists in a finite lattice).
    pub fn maximum(&self) -> usize {
        (0..self.len()).fold(self.minimum, |acc, i| self.join(acc, i))
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i][j]
    }

    pub fn leq_matrix(&self) -> &[Vec<bool>] {
        &self.leq
    }

    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn join(&self, i: usize, j: usize) -> usize {
        self.join[i][j]
    }

    pub fn meet(&self, i: usize, j: usize) -> usize {
        self.meet[i][j]
    }

    /// Join of a nonempty set.
    pub fn join_all(&self, set: &[usize]) -> Option<usize> {
        let (&first, rest) = set.split_first()?;
        Some(rest.iter().fold(first, |acc, &x| self.join(acc, x)))
    }

    /// `{i : e_i <= e_j}`, ascending.
    pub fn down_set(&self, j: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.leq[i][j]).collect()
    }

    /// Elements other than the minimum, in listed order.
    pub fn non_minimum(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| i != self.minimum).collect()
    }

    pub fn is_down_set(&self, set: &[usize]) -> bool {
        set.iter().all(|&j| (0..self.len()).all(|i| !self.leq[i][j] || set.contains(&i)))
    }

    pub fn power_set(n: usize) -> Self {
        let size = 1usize << n;
        let names: Vec<String> = (0..size)
            .map(|mask| {
                let items: Vec<String> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| (b + 1).to_string()).collect();
                format!("{{{}}}", items.join(","))
            })
            .collect();
        let leq = (0..size).map(|a| (0..size).map(|b| a & !b == 0).collect()).collect();
        Self::from_leq(names, leq).expect("power set is a lattice")
    }

    pub fn chain(n: usize) -> Self {
        let names = (0..n).map(|i| i.to_string()).collect();
        let covers: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_covers(names, &covers).expect("chain is a lattice")
    }

    pub fn m3() -> Self {
        let names = ["0", "a", "b", "c", "1"].map(String::from).to_vec();
        Self::from_covers(names, &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]).expect("M3 is a lattice")
    }

    pub fn n5() -> Self {
        let names = ["0", "a", "b", "c", "1"].map(String::from).to_vec();
        // a < b, c incomparable to both
        Self::from_covers(names, &[(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)]).expect("N5 is a lattice")
    }

    /// Compares the order with `matrix` under `mapping` (element to node).
    pub fn is_order_isomorphic(
        &self,
        matrix: &DominationMatrix,
        mapping: &[usize],
    ) -> Result<Option<(usize, usize)>, LatticeError> {
        Ok(order_counterexample(&self.leq, matrix, mapping)?)
    }
}

fn cover_pairs(leq: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let n = leq.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && leq[a][b] && !(0..n).any(|c| c != a && c != b && leq[a][c] && leq[c][b]) {
                out.push((a, b));
            }
        }
    }
    out
}
