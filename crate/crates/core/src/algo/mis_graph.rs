//! Baseline maximal independent set on an explicit intersection graph.
//!
//! Every label keeps its neighbor list and a counter of neighbors in the
//! solution. Neighbors of a new label are found by scanning all labels; no
//! geometric index is involved.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::algo::Diff;
use crate::error::{Error, Result};
use crate::geometry::{LabelId, Scale, Square};
use crate::oracle::intersection_graph;

#[derive(Clone, Debug)]
pub struct GraphMisState {
    scale: Scale,
    squares: HashMap<LabelId, Square>,
    adjacency: HashMap<LabelId, HashSet<LabelId>>,
    counter: HashMap<LabelId, usize>,
    members: HashSet<LabelId>,
}

impl GraphMisState {
    pub fn new(scale: Scale) -> Self {
        GraphMisState {
            scale,
            squares: HashMap::new(),
            adjacency: HashMap::new(),
            counter: HashMap::new(),
            members: HashSet::new(),
        }
    }

    /// Builds the graph with a sweep and a greedy solution in ascending id
    /// order.
    pub fn build(scale: Scale, squares: &[Square]) -> Result<Self> {
        let mut st = GraphMisState::new(scale);
        for s in squares {
            if st.squares.insert(s.id, *s).is_some() {
                return Err(Error::DuplicateId(s.id));
            }
        }
        let rects: Vec<_> = squares.iter().map(|s| s.to_rect(&scale)).collect();
        let adj = intersection_graph(&scale, &rects);
        for (i, ns) in adj.iter().enumerate() {
            st.adjacency
                .insert(squares[i].id, ns.iter().map(|&j| squares[j].id).collect());
            st.counter.insert(squares[i].id, 0);
        }
        let mut ids: Vec<LabelId> = st.squares.keys().copied().collect();
        ids.sort_unstable();
        for id in ids {
            if st.counter[&id] == 0 {
                st.join(id);
            }
        }
        Ok(st)
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn is_member(&self, id: LabelId) -> bool {
        self.members.contains(&id)
    }

    pub fn counter(&self, id: LabelId) -> Option<usize> {
        self.counter.get(&id).copied()
    }

    pub fn solution(&self) -> HashSet<LabelId> {
        self.members.clone()
    }

    pub fn squares(&self) -> impl Iterator<Item = &Square> + '_ {
        self.squares.values()
    }

    fn join(&mut self, id: LabelId) {
        self.members.insert(id);
        for n in &self.adjacency[&id] {
            *self.counter.get_mut(n).unwrap() += 1;
        }
    }

    pub fn insert(&mut self, s: Square) -> Result<Diff> {
        if self.squares.contains_key(&s.id) {
            return Err(Error::DuplicateId(s.id));
        }
        let mut nbrs = HashSet::new();
        let mut blocked = 0;
        for (&id, other) in &self.squares {
            if self.scale.intersects(&s, other) {
                nbrs.insert(id);
                self.adjacency.get_mut(&id).unwrap().insert(s.id);
                if self.members.contains(&id) {
                    blocked += 1;
                }
            }
        }
        self.squares.insert(s.id, s);
        self.adjacency.insert(s.id, nbrs);
        self.counter.insert(s.id, blocked);
        if blocked == 0 {
            self.join(s.id);
            return Ok(Diff {
                added: vec![s.id],
                removed: Vec::new(),
            });
        }
        Ok(Diff::default())
    }

    pub fn delete(&mut self, id: LabelId) -> Result<Diff> {
        self.squares.remove(&id).ok_or(Error::UnknownId(id))?;
        let nbrs = self.adjacency.remove(&id).unwrap();
        self.counter.remove(&id);
        for n in &nbrs {
            self.adjacency.get_mut(n).unwrap().remove(&id);
        }
        if !self.members.remove(&id) {
            return Ok(Diff::default());
        }
        let mut freed = BTreeSet::new();
        for n in &nbrs {
            let c = self.counter.get_mut(n).unwrap();
            *c -= 1;
            if *c == 0 {
                freed.insert(*n);
            }
        }
        let mut added = Vec::new();
        for v in freed {
            // An earlier promotion may have blocked v again.
            if self.counter[&v] == 0 {
                self.join(v);
                added.push(v);
            }
        }
        Ok(Diff {
            added,
            removed: vec![id],
        })
    }

    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (id, nbrs) in &self.adjacency {
            let s = &self.squares[id];
            for n in nbrs {
                if !self.adjacency[n].contains(id) {
                    return Err(format!("asymmetric edge {id}-{n}"));
                }
                if !self.scale.intersects(s, &self.squares[n]) {
                    return Err(format!("edge {id}-{n} without overlap"));
                }
            }
            let c = nbrs.iter().filter(|n| self.members.contains(n)).count();
            if c != self.counter[id] {
                return Err(format!("counter of {id} is {}, recomputed {c}", self.counter[id]));
            }
            if self.members.contains(id) && c > 0 {
                return Err(format!("member {id} has a member neighbor"));
            }
            if !self.members.contains(id) && c == 0 {
                return Err(format!("{id} is free but not a member"));
            }
        }
        Ok(())
    }
}
