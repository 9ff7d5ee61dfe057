//! Stabbing-line solver for unit-height rectangles.
//!
//! Every rectangle belongs to exactly one horizontal stabbing line. Each line
//! keeps an exact maximum independent set of its intervals, and the answer is
//! the union over the even or the odd lines, whichever is larger. Rectangles
//! on lines two apart never meet, so each class is independent.
//!
//! [`IntervalMis`] is usable on its own as a dynamic maximum independent set
//! for arbitrary interval graphs.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::algo::{Diff, LineComposed, Parity, ParityTotals, SizeReport};
use crate::error::{Error, Result};
use crate::geometry::{LabelId, Rect, Scale};
use crate::interval_index::{Interval, LeftTree, SolutionTree};
use crate::oracle::greedy_interval_chain;

/// Dynamic maximum independent set of open intervals.
///
/// The selected set is always the earliest-deadline greedy chain: scan by
/// `(hi, id)` and keep an interval when it starts at or after the right end
/// of the last one kept.
#[derive(Clone, Debug, Default)]
pub struct IntervalMis {
    left: LeftTree,
    chosen: SolutionTree,
    selected: HashSet<LabelId>,
    last_queries: usize,
}

impl IntervalMis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_intervals(intervals: &[Interval]) -> Result<Self> {
        let mut mis = IntervalMis::new();
        for &iv in intervals {
            mis.left.insert(iv)?;
        }
        for iv in greedy_interval_chain(intervals) {
            mis.chosen.insert(iv);
            mis.selected.insert(iv.id);
        }
        Ok(mis)
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// Size of the maintained maximum independent set.
    pub fn size(&self) -> usize {
        self.chosen.len()
    }

    pub fn get(&self, id: LabelId) -> Option<&Interval> {
        self.left.get(id)
    }

    pub fn is_selected(&self, id: LabelId) -> bool {
        self.selected.contains(&id)
    }

    /// Selected intervals in left-to-right order.
    pub fn selected(&self) -> impl Iterator<Item = &Interval> + '_ {
        self.chosen.iter()
    }

    pub fn intervals(&self) -> impl Iterator<Item = Interval> + '_ {
        self.left.iter()
    }

    /// Successor queries issued by the last update.
    pub fn last_queries(&self) -> usize {
        self.last_queries
    }

    pub fn insert(&mut self, x: Interval) -> Result<Diff> {
        self.left.insert(x)?;
        self.last_queries = 0;
        let pred = self.chosen.predecessor(x.right_key());
        if pred.is_some_and(|y| y.hi > x.lo) {
            return Ok(Diff::default());
        }
        let mut diff = Diff::default();
        self.select(x, &mut diff);
        self.cascade(Some(x), &mut diff);
        Ok(diff)
    }

    pub fn delete(&mut self, id: LabelId) -> Result<Diff> {
        let x = self.left.delete(id)?;
        self.last_queries = 0;
        if !self.selected.remove(&id) {
            return Ok(Diff::default());
        }
        self.chosen.remove(&x);
        let mut diff = Diff {
            added: Vec::new(),
            removed: vec![id],
        };
        let pred = self.chosen.predecessor(x.right_key());
        self.cascade(pred, &mut diff);
        Ok(diff)
    }

    fn select(&mut self, iv: Interval, diff: &mut Diff) {
        self.chosen.insert(iv);
        self.selected.insert(iv.id);
        diff.added.push(iv.id);
    }

    /// Re-derives the chain after `cur` until it meets an interval that is
    /// already selected or runs off the end.
    fn cascade(&mut self, mut cur: Option<Interval>, diff: &mut Diff) {
        loop {
            self.last_queries += 1;
            let next = match cur {
                Some(c) => self.left.min_right_at_or_after(c.hi),
                None => self.left.min_right(),
            };
            let stale = self
                .chosen
                .drain_between(cur.map(|c| c.right_key()), next.map(|n| n.right_key()));
            for iv in stale {
                self.selected.remove(&iv.id);
                if let Some(pos) = diff.added.iter().position(|&a| a == iv.id) {
                    diff.added.swap_remove(pos);
                } else {
                    diff.removed.push(iv.id);
                }
            }
            match next {
                Some(n) if !self.selected.contains(&n.id) => {
                    if let Some(pos) = diff.removed.iter().position(|&r| r == n.id) {
                        diff.removed.swap_remove(pos);
                        self.chosen.insert(n);
                        self.selected.insert(n.id);
                    } else {
                        self.select(n, diff);
                    }
                    cur = Some(n);
                }
                _ => return,
            }
        }
    }

    /// Checks the trees and that the chain equals a from-scratch greedy.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        self.left.check_invariants()?;
        self.chosen.check_invariants()?;
        let all: Vec<Interval> = self.left.iter().collect();
        let expect: Vec<LabelId> = greedy_interval_chain(&all).iter().map(|iv| iv.id).collect();
        let got: Vec<LabelId> = self.chosen.iter().map(|iv| iv.id).collect();
        if expect != got {
            return Err(format!("chain {got:?} differs from greedy {expect:?}"));
        }
        if self.selected.len() != got.len() || !got.iter().all(|id| self.selected.contains(id)) {
            return Err("selected id set out of sync".into());
        }
        if self.last_queries > self.size() + 1 {
            return Err(format!(
                "cascade issued {} queries for a chain of {}",
                self.last_queries,
                self.size()
            ));
        }
        Ok(())
    }
}

/// The 2-approximation for unit-height rectangles of arbitrary width.
#[derive(Clone, Debug)]
pub struct LineState {
    scale: Scale,
    lines: HashMap<i64, IntervalMis>,
    line_of: HashMap<LabelId, i64>,
    rects: HashMap<LabelId, Rect>,
    totals: ParityTotals,
    omegas: BTreeMap<usize, usize>,
}

fn interval_of(r: &Rect) -> Interval {
    let (lo, hi) = r.span2();
    Interval::new(r.id, lo, hi)
}

impl LineState {
    pub fn new(scale: Scale) -> Self {
        LineState {
            scale,
            lines: HashMap::new(),
            line_of: HashMap::new(),
            rects: HashMap::new(),
            totals: ParityTotals::default(),
            omegas: BTreeMap::new(),
        }
    }

    pub fn build(scale: Scale, rects: &[Rect]) -> Result<Self> {
        let mut st = LineState::new(scale);
        let mut per_line: HashMap<i64, Vec<Interval>> = HashMap::new();
        for r in rects {
            if r.width <= 0 {
                return Err(Error::InvalidWidth {
                    id: r.id,
                    width: r.width,
                });
            }
            let line = scale.line_of(r);
            if st.line_of.insert(r.id, line).is_some() {
                return Err(Error::DuplicateId(r.id));
            }
            st.rects.insert(r.id, *r);
            per_line.entry(line).or_default().push(interval_of(r));
        }
        for (line, ivs) in per_line {
            let mis = IntervalMis::from_intervals(&ivs)?;
            st.totals.adjust(line, 0, mis.size());
            *st.omegas.entry(mis.size()).or_default() += 1;
            st.lines.insert(line, mis);
        }
        Ok(st)
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn size(&self) -> usize {
        self.totals.best()
    }

    pub fn totals(&self) -> ParityTotals {
        self.totals
    }

    pub fn rect(&self, id: LabelId) -> Option<&Rect> {
        self.rects.get(&id)
    }

    pub fn rects(&self) -> impl Iterator<Item = &Rect> + '_ {
        self.rects.values()
    }

    /// Largest per-line maximum independent set.
    pub fn omega(&self) -> usize {
        self.omegas.keys().next_back().copied().unwrap_or(0)
    }

    pub fn line(&self, line: i64) -> Option<&IntervalMis> {
        self.lines.get(&line)
    }

    pub fn lines(&self) -> impl Iterator<Item = (i64, &IntervalMis)> + '_ {
        self.lines.iter().map(|(&l, m)| (l, m))
    }

    fn track(&mut self, line: i64, old: usize, new: usize) {
        if old == new {
            return;
        }
        self.totals.adjust(line, old, new);
        if old > 0 {
            let c = self.omegas.get_mut(&old).expect("tracked size");
            *c -= 1;
            if *c == 0 {
                self.omegas.remove(&old);
            }
        }
        if new > 0 {
            *self.omegas.entry(new).or_default() += 1;
        }
    }

    pub fn insert(&mut self, r: Rect) -> Result<SizeReport> {
        if self.rects.contains_key(&r.id) {
            return Err(Error::DuplicateId(r.id));
        }
        if r.width <= 0 {
            return Err(Error::InvalidWidth {
                id: r.id,
                width: r.width,
            });
        }
        let line = self.scale.line_of(&r);
        let mis = self.lines.entry(line).or_default();
        let old = mis.size();
        mis.insert(interval_of(&r))?;
        let new = mis.size();
        self.rects.insert(r.id, r);
        self.line_of.insert(r.id, line);
        self.track(line, old, new);
        Ok(SizeReport { size: self.size() })
    }

    pub fn delete(&mut self, id: LabelId) -> Result<SizeReport> {
        let line = self.line_of.remove(&id).ok_or(Error::UnknownId(id))?;
        self.rects.remove(&id);
        let mis = self.lines.get_mut(&line).expect("line of stored rect");
        let old = mis.size();
        mis.delete(id)?;
        let new = mis.size();
        if mis.is_empty() {
            self.lines.remove(&line);
        }
        self.track(line, old, new);
        Ok(SizeReport { size: self.size() })
    }

    pub fn solution(&self) -> Vec<LabelId> {
        self.parity_solution(self.totals.winner())
    }

    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut totals = ParityTotals::default();
        let mut omegas: BTreeMap<usize, usize> = BTreeMap::new();
        for (&line, mis) in &self.lines {
            mis.check_invariants().map_err(|e| format!("line {line}: {e}"))?;
            if mis.is_empty() {
                return Err(format!("empty line {line} kept"));
            }
            totals.adjust(line, 0, mis.size());
            *omegas.entry(mis.size()).or_default() += 1;
            for iv in mis.intervals() {
                if self.line_of.get(&iv.id) != Some(&line) {
                    return Err(format!("{} filed under the wrong line", iv.id));
                }
            }
        }
        if totals != self.totals {
            return Err(format!("totals {:?}, recomputed {:?}", self.totals, totals));
        }
        if omegas != self.omegas {
            return Err("omega multiset out of sync".into());
        }
        Ok(())
    }
}

impl LineComposed for LineState {
    fn winner(&self) -> Parity {
        self.totals.winner()
    }

    fn line_of(&self, id: LabelId) -> Option<i64> {
        self.line_of.get(&id).copied()
    }

    fn line_solution(&self, line: i64) -> Vec<LabelId> {
        self.lines
            .get(&line)
            .map(|m| m.selected().map(|iv| iv.id).collect())
            .unwrap_or_default()
    }

    fn parity_solution(&self, parity: Parity) -> Vec<LabelId> {
        self.lines
            .iter()
            .filter(|(&l, _)| Parity::of(l) == parity)
            .flat_map(|(_, m)| m.selected().map(|iv| iv.id))
            .collect()
    }
}
