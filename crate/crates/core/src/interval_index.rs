//! Ordered interval trees shared by the stabbing-line and shifting solvers.
//!
//! [`LeftTree`] is an AVL tree keyed by `(lo, id)` where every node also
//! records the interval with the smallest `(hi, id)` in its subtree. That
//! decoration answers "leftmost right endpoint among intervals starting after
//! `p`" along a single root-to-leaf path.
//!
//! [`SolutionTree`] holds the currently selected, pairwise disjoint intervals
//! ordered by `(hi, id)`.
//!
//! Intervals are open, so intervals that only share an endpoint are disjoint.

use std::collections::{BTreeMap, HashMap};
use std::ops::Bound;

use crate::error::{Error, Result};
use crate::geometry::{Coord, LabelId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub id: LabelId,
    pub lo: Coord,
    pub hi: Coord,
}

impl Interval {
    pub fn new(id: impl Into<LabelId>, lo: Coord, hi: Coord) -> Self {
        debug_assert!(lo < hi, "empty interval");
        Interval {
            id: id.into(),
            lo,
            hi,
        }
    }

    /// Order used by the earliest-deadline greedy.
    pub fn right_key(&self) -> (Coord, LabelId) {
        (self.hi, self.id)
    }

    pub fn left_key(&self) -> (Coord, LabelId) {
        (self.lo, self.id)
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

type Link = Option<u32>;

#[derive(Clone, Debug)]
struct AvlNode {
    iv: Interval,
    left: Link,
    right: Link,
    height: i32,
    /// Interval with the least `(hi, id)` in this subtree.
    min_right: Interval,
}

#[derive(Clone, Debug, Default)]
pub struct LeftTree {
    nodes: Vec<AvlNode>,
    free: Vec<u32>,
    root: Link,
    by_id: HashMap<LabelId, Interval>,
}

impl LeftTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    pub fn get(&self, id: LabelId) -> Option<&Interval> {
        self.by_id.get(&id)
    }

    pub fn insert(&mut self, iv: Interval) -> Result<()> {
        if self.by_id.contains_key(&iv.id) {
            return Err(Error::DuplicateId(iv.id));
        }
        self.by_id.insert(iv.id, iv);
        self.root = Some(self.insert_at(self.root, iv));
        Ok(())
    }

    pub fn delete(&mut self, id: LabelId) -> Result<Interval> {
        let iv = self.by_id.remove(&id).ok_or(Error::UnknownId(id))?;
        self.root = self.delete_at(self.root, iv.left_key());
        Ok(iv)
    }

    /// Interval with the least `(hi, id)` overall.
    pub fn min_right(&self) -> Option<Interval> {
        self.root.map(|r| self.nodes[r as usize].min_right)
    }

    /// Among intervals with `lo > p`, the one with the least `(hi, id)`.
    pub fn min_right_after(&self, p: Coord) -> Option<Interval> {
        let mut best: Option<Interval> = None;
        let mut cur = self.root;
        while let Some(n) = cur {
            let node = &self.nodes[n as usize];
            if node.iv.lo > p {
                best = min_by_right(best, Some(node.iv));
                best = min_by_right(best, node.right.map(|r| self.nodes[r as usize].min_right));
                cur = node.left;
            } else {
                cur = node.right;
            }
        }
        best
    }

    /// Among intervals with `lo >= p`, the one with the least `(hi, id)`:
    /// the first interval the greedy can take after a selected interval
    /// ending at `p`.
    pub fn min_right_at_or_after(&self, p: Coord) -> Option<Interval> {
        self.min_right_after(p - 1)
    }

    /// Intervals in `(lo, id)` order.
    pub fn iter(&self) -> impl Iterator<Item = Interval> + '_ {
        let mut stack = Vec::new();
        let mut cur = self.root;
        std::iter::from_fn(move || {
            while let Some(n) = cur {
                stack.push(n);
                cur = self.nodes[n as usize].left;
            }
            let n = stack.pop()?;
            let node = &self.nodes[n as usize];
            cur = node.right;
            Some(node.iv)
        })
    }

    /// Verifies ordering, AVL heights and every min-right decoration against a
    /// recomputation from the subtree.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let count = self.check_node(self.root)?.map_or(0, |(_, _, c)| c);
        if count != self.by_id.len() {
            return Err(format!("tree has {count} nodes, map has {}", self.by_id.len()));
        }
        let keys: Vec<_> = self.iter().map(|iv| iv.left_key()).collect();
        if keys.windows(2).any(|w| w[0] >= w[1]) {
            return Err("left keys out of order".into());
        }
        Ok(())
    }

    /// Returns (height, recomputed min-right, node count) of a subtree.
    fn check_node(&self, link: Link) -> std::result::Result<Option<(i32, Interval, usize)>, String> {
        let Some(n) = link else { return Ok(None) };
        let node = &self.nodes[n as usize];
        let l = self.check_node(node.left)?;
        let r = self.check_node(node.right)?;
        let hl = l.map_or(0, |x| x.0);
        let hr = r.map_or(0, |x| x.0);
        if (hl - hr).abs() > 1 || node.height != 1 + hl.max(hr) {
            return Err(format!("bad AVL height at {}", node.iv.id));
        }
        let mut best = Some(node.iv);
        best = min_by_right(best, l.map(|x| x.1));
        best = min_by_right(best, r.map(|x| x.1));
        let best = best.unwrap();
        if best != node.min_right {
            return Err(format!("stale min-right decoration at {}", node.iv.id));
        }
        if self.by_id.get(&node.iv.id) != Some(&node.iv) {
            return Err(format!("interval {} missing from id map", node.iv.id));
        }
        Ok(Some((
            node.height,
            best,
            1 + l.map_or(0, |x| x.2) + r.map_or(0, |x| x.2),
        )))
    }

    fn height(&self, link: Link) -> i32 {
        link.map_or(0, |n| self.nodes[n as usize].height)
    }

    fn pull(&mut self, n: u32) {
        let (l, r, iv) = {
            let node = &self.nodes[n as usize];
            (node.left, node.right, node.iv)
        };
        let mut best = Some(iv);
        best = min_by_right(best, l.map(|x| self.nodes[x as usize].min_right));
        best = min_by_right(best, r.map(|x| self.nodes[x as usize].min_right));
        let h = 1 + self.height(l).max(self.height(r));
        let node = &mut self.nodes[n as usize];
        node.height = h;
        node.min_right = best.unwrap();
    }

    fn rotate_right(&mut self, n: u32) -> u32 {
        let l = self.nodes[n as usize].left.expect("rotate_right needs a left child");
        self.nodes[n as usize].left = self.nodes[l as usize].right;
        self.nodes[l as usize].right = Some(n);
        self.pull(n);
        self.pull(l);
        l
    }

    fn rotate_left(&mut self, n: u32) -> u32 {
        let r = self.nodes[n as usize].right.expect("rotate_left needs a right child");
        self.nodes[n as usize].right = self.nodes[r as usize].left;
        self.nodes[r as usize].left = Some(n);
        self.pull(n);
        self.pull(r);
        r
    }

    fn balance(&mut self, n: u32) -> u32 {
        self.pull(n);
        let (l, r) = (self.nodes[n as usize].left, self.nodes[n as usize].right);
        let bf = self.height(l) - self.height(r);
        if bf > 1 {
            let l = l.unwrap();
            let ln = &self.nodes[l as usize];
            if self.height(ln.left) < self.height(ln.right) {
                let nl = self.rotate_left(l);
                self.nodes[n as usize].left = Some(nl);
            }
            return self.rotate_right(n);
        }
        if bf < -1 {
            let r = r.unwrap();
            let rn = &self.nodes[r as usize];
            if self.height(rn.right) < self.height(rn.left) {
                let nr = self.rotate_right(r);
                self.nodes[n as usize].right = Some(nr);
            }
            return self.rotate_left(n);
        }
        n
    }

    fn alloc(&mut self, iv: Interval) -> u32 {
        let node = AvlNode {
            iv,
            left: None,
            right: None,
            height: 1,
            min_right: iv,
        };
        match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        }
    }

    fn insert_at(&mut self, link: Link, iv: Interval) -> u32 {
        let Some(n) = link else { return self.alloc(iv) };
        if iv.left_key() < self.nodes[n as usize].iv.left_key() {
            let c = self.insert_at(self.nodes[n as usize].left, iv);
            self.nodes[n as usize].left = Some(c);
        } else {
            let c = self.insert_at(self.nodes[n as usize].right, iv);
            self.nodes[n as usize].right = Some(c);
        }
        self.balance(n)
    }

    fn delete_at(&mut self, link: Link, key: (Coord, LabelId)) -> Link {
        let n = link.expect("key present in tree");
        let here = self.nodes[n as usize].iv.left_key();
        if key < here {
            let c = self.delete_at(self.nodes[n as usize].left, key);
            self.nodes[n as usize].left = c;
        } else if key > here {
            let c = self.delete_at(self.nodes[n as usize].right, key);
            self.nodes[n as usize].right = c;
        } else {
            let (l, r) = (self.nodes[n as usize].left, self.nodes[n as usize].right);
            match (l, r) {
                (None, None) => {
                    self.free.push(n);
                    return None;
                }
                (Some(c), None) | (None, Some(c)) => {
                    self.free.push(n);
                    return Some(c);
                }
                (Some(_), Some(r)) => {
                    let (new_r, succ) = self.pop_min(r);
                    self.nodes[n as usize].iv = succ;
                    self.nodes[n as usize].right = new_r;
                }
            }
        }
        Some(self.balance(n))
    }

    fn pop_min(&mut self, n: u32) -> (Link, Interval) {
        match self.nodes[n as usize].left {
            None => {
                let iv = self.nodes[n as usize].iv;
                let r = self.nodes[n as usize].right;
                self.free.push(n);
                (r, iv)
            }
            Some(l) => {
                let (nl, iv) = self.pop_min(l);
                self.nodes[n as usize].left = nl;
                (Some(self.balance(n)), iv)
            }
        }
    }
}

fn min_by_right(a: Option<Interval>, b: Option<Interval>) -> Option<Interval> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.right_key() < x.right_key() { y } else { x }),
        (x, y) => x.or(y),
    }
}

/// Result of locating an interval's endpoints among the selected intervals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GapProbe {
    /// Selected interval with the greatest `hi < lo`.
    pub pred: Option<Interval>,
    /// Selected interval with the least `hi > hi`.
    pub succ: Option<Interval>,
    /// True when no selected right endpoint falls in `(lo, hi]`.
    pub same_gap: bool,
}

/// Selected intervals ordered by `(hi, id)`.
#[derive(Clone, Debug, Default)]
pub struct SolutionTree {
    by_right: BTreeMap<(Coord, LabelId), Interval>,
}

impl SolutionTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.by_right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_right.is_empty()
    }

    pub fn insert(&mut self, iv: Interval) {
        self.by_right.insert(iv.right_key(), iv);
    }

    pub fn remove(&mut self, iv: &Interval) -> bool {
        self.by_right.remove(&iv.right_key()).is_some()
    }

    pub fn contains(&self, iv: &Interval) -> bool {
        self.by_right.contains_key(&iv.right_key())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Interval> + '_ {
        self.by_right.values()
    }

    /// Last selected interval ordered strictly before `key`.
    pub fn predecessor(&self, key: (Coord, LabelId)) -> Option<Interval> {
        self.by_right.range(..key).next_back().map(|(_, iv)| *iv)
    }

    pub fn gap_of(&self, lo: Coord, hi: Coord) -> GapProbe {
        let pred = self
            .by_right
            .range(..(lo, LabelId::MIN))
            .next_back()
            .map(|(_, iv)| *iv);
        let succ = self
            .by_right
            .range((Bound::Excluded((hi, LabelId::MAX)), Bound::Unbounded))
            .next()
            .map(|(_, iv)| *iv);
        let same_gap = lo >= hi
            || self
                .by_right
                .range((
                    Bound::Excluded((lo, LabelId::MAX)),
                    Bound::Included((hi, LabelId::MAX)),
                ))
                .next()
                .is_none();
        GapProbe {
            pred,
            succ,
            same_gap,
        }
    }

    /// Removes and returns every selected interval with key strictly between
    /// `after` and `before` (either side unbounded when `None`).
    pub fn drain_between(
        &mut self,
        after: Option<(Coord, LabelId)>,
        before: Option<(Coord, LabelId)>,
    ) -> Vec<Interval> {
        let lower = after.map_or(Bound::Unbounded, Bound::Excluded);
        let upper = before.map_or(Bound::Unbounded, Bound::Excluded);
        if let (Some(a), Some(b)) = (after, before) {
            if a >= b {
                return Vec::new();
            }
        }
        let keys: Vec<_> = self.by_right.range((lower, upper)).map(|(k, _)| *k).collect();
        keys.into_iter()
            .map(|k| self.by_right.remove(&k).unwrap())
            .collect()
    }

    /// Selected intervals are pairwise disjoint and sort identically by left
    /// and right endpoint.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let v: Vec<_> = self.by_right.values().collect();
        for w in v.windows(2) {
            if w[0].hi > w[1].lo {
                return Err(format!("selected {} and {} overlap", w[0].id, w[1].id));
            }
            if w[0].left_key() >= w[1].left_key() {
                return Err("left and right orders disagree".into());
            }
        }
        Ok(())
    }
}
