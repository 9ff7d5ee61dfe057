//! Greedy augmentation of an approximate solution.
//!
//! The wrapped solver keeps its own answer; on top of it we add labels it
//! discarded whenever they are independent of everything already chosen.
//! After each update only the labels near the changed members are retried,
//! which is a heuristic: the result is always independent and never smaller
//! than the base answer, but it is maximal only after
//! [`AugmentedState::full_remaximalize`] or under [`AugmentPolicy::Full`].

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::algo::grid::GridState;
use crate::algo::line::LineState;
use crate::algo::shifting::ShiftState;
use crate::algo::{line_diff, Diff, LineComposed};
use crate::error::{Error, Result};
use crate::geometry::{LabelId, OpenBox, Rect, Scale};
use crate::oracle;
use crate::range_index::RangeIndex;

/// Approximate solvers that can be augmented.
pub trait AugmentBase: LineComposed {
    fn scale(&self) -> Scale;
    fn insert_rect(&mut self, r: Rect) -> Result<()>;
    fn delete_label(&mut self, id: LabelId) -> Result<()>;
    fn base_size(&self) -> usize;
    fn base_solution(&self) -> Vec<LabelId>;
    fn labels(&self) -> Vec<Rect>;
}

fn square_of(scale: &Scale, r: &Rect) -> Result<crate::geometry::Square> {
    r.as_square(scale).ok_or(Error::NotASquare {
        id: r.id,
        width: r.width,
    })
}

impl AugmentBase for GridState {
    fn scale(&self) -> Scale {
        GridState::scale(self)
    }
    fn insert_rect(&mut self, r: Rect) -> Result<()> {
        let s = square_of(&GridState::scale(self), &r)?;
        self.insert(s).map(|_| ())
    }
    fn delete_label(&mut self, id: LabelId) -> Result<()> {
        self.delete(id).map(|_| ())
    }
    fn base_size(&self) -> usize {
        self.size()
    }
    fn base_solution(&self) -> Vec<LabelId> {
        self.solution()
    }
    fn labels(&self) -> Vec<Rect> {
        let scale = GridState::scale(self);
        self.squares().map(|s| s.to_rect(&scale)).collect()
    }
}

impl AugmentBase for ShiftState {
    fn scale(&self) -> Scale {
        ShiftState::scale(self)
    }
    fn insert_rect(&mut self, r: Rect) -> Result<()> {
        let s = square_of(&ShiftState::scale(self), &r)?;
        self.insert(s).map(|_| ())
    }
    fn delete_label(&mut self, id: LabelId) -> Result<()> {
        self.delete(id).map(|_| ())
    }
    fn base_size(&self) -> usize {
        self.size()
    }
    fn base_solution(&self) -> Vec<LabelId> {
        self.solution()
    }
    fn labels(&self) -> Vec<Rect> {
        let scale = ShiftState::scale(self);
        self.squares().map(|s| s.to_rect(&scale)).collect()
    }
}

impl AugmentBase for LineState {
    fn scale(&self) -> Scale {
        LineState::scale(self)
    }
    fn insert_rect(&mut self, r: Rect) -> Result<()> {
        self.insert(r).map(|_| ())
    }
    fn delete_label(&mut self, id: LabelId) -> Result<()> {
        self.delete(id).map(|_| ())
    }
    fn base_size(&self) -> usize {
        self.size()
    }
    fn base_solution(&self) -> Vec<LabelId> {
        self.solution()
    }
    fn labels(&self) -> Vec<Rect> {
        self.rects().copied().collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AugmentPolicy {
    /// Retry only labels near the members that changed.
    #[default]
    Local,
    /// Recompute all extras after every update.
    Full,
}

#[derive(Clone, Debug)]
pub struct AugmentedState<B> {
    base: B,
    scale: Scale,
    policy: AugmentPolicy,
    rects: HashMap<LabelId, Rect>,
    all: RangeIndex,
    /// Centers of the output, base members and extras alike.
    out: RangeIndex,
    base_members: HashSet<LabelId>,
    extras: HashSet<LabelId>,
    max_width: i64,
}

impl<B: AugmentBase> AugmentedState<B> {
    pub fn new(base: B, policy: AugmentPolicy) -> Result<Self> {
        let scale = base.scale();
        let labels = base.labels();
        let max_width = labels.iter().map(|r| r.width).max().unwrap_or(scale.unit());
        let all = RangeIndex::from_points(labels.iter().map(|r| (r.id, r.cx, r.cy)))?;
        let mut st = AugmentedState {
            base,
            scale,
            policy,
            rects: labels.iter().map(|r| (r.id, *r)).collect(),
            all,
            out: RangeIndex::new(),
            base_members: HashSet::new(),
            extras: HashSet::new(),
            max_width: max_width.max(scale.unit()),
        };
        st.full_remaximalize()?;
        Ok(st)
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn policy(&self) -> AugmentPolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn size(&self) -> usize {
        self.base_members.len() + self.extras.len()
    }

    pub fn extras(&self) -> &HashSet<LabelId> {
        &self.extras
    }

    pub fn solution(&self) -> Vec<LabelId> {
        self.base_members.iter().chain(&self.extras).copied().collect()
    }

    /// Open box that contains the center of every label that can overlap `r`.
    fn conflict_box(&self, r: &Rect) -> OpenBox {
        let h = (r.width + self.max_width) / 2 + 1;
        let u = self.scale.unit();
        OpenBox::new(r.cx - h, r.cx + h, r.cy - u, r.cy + u)
    }

    /// Open box holding every label whose conflicts may change when `r`
    /// enters or leaves the output: neighbors of neighbors.
    fn repair_box(&self, r: &Rect) -> OpenBox {
        let h = (r.width + 3 * self.max_width) / 2 + 1;
        let v = 2 * self.scale.unit() + 1;
        OpenBox::new(r.cx - h, r.cx + h, r.cy - v, r.cy + v)
    }

    fn output_conflicts(&self, r: &Rect) -> impl Iterator<Item = LabelId> + '_ {
        let r = *r;
        self.out
            .report(&self.conflict_box(&r))
            .into_iter()
            .filter(move |p| p.id != r.id && self.scale.intersects_rect(&r, &self.rects[&p.id]))
            .map(|p| p.id)
    }

    fn try_add(&mut self, id: LabelId) -> Result<bool> {
        if self.out.contains(id) {
            return Ok(false);
        }
        let r = self.rects[&id];
        if self.output_conflicts(&r).next().is_some() {
            return Ok(false);
        }
        self.extras.insert(id);
        self.out.insert(id, r.cx, r.cy)?;
        Ok(true)
    }

    /// Drops all extras and re-adds discarded labels greedily by ascending
    /// id, leaving the output maximal.
    pub fn full_remaximalize(&mut self) -> Result<usize> {
        self.base_members = self.base.base_solution().into_iter().collect();
        self.extras.clear();
        self.out = RangeIndex::from_points(self.base_members.iter().map(|id| {
            let r = &self.rects[id];
            (*id, r.cx, r.cy)
        }))?;
        let mut ids: Vec<LabelId> = self.rects.keys().copied().collect();
        ids.sort_unstable();
        for id in ids {
            self.try_add(id)?;
        }
        Ok(self.size())
    }

    pub fn insert(&mut self, r: Rect) -> Result<usize> {
        if self.rects.contains_key(&r.id) {
            return Err(Error::DuplicateId(r.id));
        }
        let line = self.scale.line_of(&r);
        let winner = self.base.winner();
        let before = self.base.line_solution(line);
        self.base.insert_rect(r)?;
        self.rects.insert(r.id, r);
        self.all.insert(r.id, r.cx, r.cy)?;
        if r.width > self.max_width {
            self.max_width = r.width;
        }
        let diff = line_diff(&self.base, line, winner, before);
        self.repair(diff, r)
    }

    pub fn delete(&mut self, id: LabelId) -> Result<usize> {
        let r = *self.rects.get(&id).ok_or(Error::UnknownId(id))?;
        let line = self.base.line_of(id).ok_or(Error::UnknownId(id))?;
        let winner = self.base.winner();
        let before = self.base.line_solution(line);
        self.base.delete_label(id)?;
        if self.extras.remove(&id) {
            self.out.delete(id)?;
        }
        let diff = line_diff(&self.base, line, winner, before);
        self.repair(diff, r)
    }

    fn repair(&mut self, diff: Diff, event: Rect) -> Result<usize> {
        let mut centers: Vec<Rect> = vec![event];
        for id in &diff.removed {
            self.base_members.remove(id);
            if self.out.contains(*id) {
                self.out.delete(*id)?;
            }
            centers.push(self.rects[id]);
        }
        for id in &diff.added {
            let r = self.rects[id];
            let evicted: Vec<LabelId> = self
                .output_conflicts(&r)
                .filter(|e| self.extras.contains(e))
                .collect();
            for e in evicted {
                self.extras.remove(&e);
                self.out.delete(e)?;
            }
            if self.extras.remove(id) {
                self.out.delete(*id)?;
            }
            self.base_members.insert(*id);
            self.out.insert(*id, r.cx, r.cy)?;
            centers.push(r);
        }
        if self.base.line_of(event.id).is_none() {
            // The event was a deletion; the label's position was needed above.
            self.rects.remove(&event.id);
            self.all.delete(event.id)?;
        }
        if self.policy == AugmentPolicy::Full {
            return self.full_remaximalize();
        }
        let mut candidates = BTreeSet::new();
        for c in &centers {
            for p in self.all.report(&self.repair_box(c)) {
                candidates.insert(p.id);
            }
        }
        for id in candidates {
            self.try_add(id)?;
        }
        Ok(self.size())
    }

    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let base: HashSet<LabelId> = self.base.base_solution().into_iter().collect();
        if base != self.base_members {
            return Err("cached base solution out of sync".into());
        }
        if self.extras.iter().any(|e| base.contains(e)) {
            return Err("an extra is also a base member".into());
        }
        if self.out.len() != self.size() || !self.solution().iter().all(|id| self.out.contains(*id)) {
            return Err("output index out of sync".into());
        }
        let rects: Vec<Rect> = self.rects.values().copied().collect();
        let out: HashSet<LabelId> = self.solution().into_iter().collect();
        if !oracle::verify_rects(&self.scale, &rects, &out).independent {
            return Err("output is not independent".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo::grid::{GridFrame, GridStorage};
    use crate::geometry::Square;
    use proptest::prelude::*;

    fn sc() -> Scale {
        Scale::new(1).unwrap()
    }

    fn sq(id: u64, x: f64, y: f64) -> Square {
        Square::new(id, sc().scale_f64(x), sc().scale_f64(y))
    }

    fn frame() -> GridFrame {
        GridFrame {
            row0: -2,
            col0: -2,
            kappa: 16,
        }
    }

    #[test]
    fn grid_drop_is_recovered() {
        // A on row 1 and B on row 2 do not meet, yet the grid keeps one row.
        let squares = [sq(0, 1.0, 1.0), sq(1, 2.5, 2.0)];
        let base = GridState::build(sc(), frame(), GridStorage::Hashed, &squares).unwrap();
        assert_eq!(base.size(), 1);
        let aug = AugmentedState::new(base, AugmentPolicy::Local).unwrap();
        assert_eq!(aug.size(), 2);
        aug.check_invariants().unwrap();
    }

    #[test]
    fn quiet_update_changes_nothing() {
        let squares = [sq(0, 1.0, 1.0), sq(1, 2.5, 2.0)];
        let base = GridState::build(sc(), frame(), GridStorage::Hashed, &squares).unwrap();
        let mut aug = AugmentedState::new(base, AugmentPolicy::Local).unwrap();
        // Same grid point as A, overlapping A.
        assert_eq!(aug.insert(sq(2, 1.1, 1.0).to_rect(&sc())).unwrap(), 2);
        aug.check_invariants().unwrap();
    }

    #[test]
    fn extra_is_evicted_by_new_base_member() {
        let squares = [sq(0, 1.0, 1.0), sq(1, 2.5, 2.0)];
        let base = GridState::build(sc(), frame(), GridStorage::Hashed, &squares).unwrap();
        let mut aug = AugmentedState::new(base, AugmentPolicy::Local).unwrap();
        // Rows 1 and 2 tie, so the even row holds the base answer and A is extra.
        assert!(aug.extras().contains(&LabelId(0)));
        // A second odd-row square flips the base to row 1; it overlaps B.
        aug.insert(sq(3, 3.0, 1.1).to_rect(&sc())).unwrap();
        aug.check_invariants().unwrap();
        assert!(aug.extras().is_empty());
        assert_eq!(aug.base().size(), 2);
        // Replaying the affected neighborhood from scratch gives the same output.
        let mut full = aug.clone();
        full.full_remaximalize().unwrap();
        let a: HashSet<_> = aug.solution().into_iter().collect();
        let b: HashSet<_> = full.solution().into_iter().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_base_yields_greedy_mis() {
        let squares = [sq(0, 0.0, 0.0), sq(1, 0.5, 0.0), sq(2, 1.2, 0.0)];
        let base = LineState::build(sc(), &squares.map(|s| s.to_rect(&sc()))).unwrap();
        let aug = AugmentedState::new(base, AugmentPolicy::Local).unwrap();
        let v = oracle::verify_squares(&sc(), &squares, &aug.solution().into_iter().collect());
        assert!(v.independent && v.maximal);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn augmented_line_stays_independent(
            full in any::<bool>(),
            seq in proptest::collection::vec((0i64..100, 0i64..60, 5i64..30, any::<bool>()), 1..80),
        ) {
            let s = sc();
            let policy = if full { AugmentPolicy::Full } else { AugmentPolicy::Local };
            let mut aug = AugmentedState::new(LineState::new(s), policy).unwrap();
            let mut live: Vec<Rect> = Vec::new();
            for (i, (x, y, w, del)) in seq.into_iter().enumerate() {
                if del && !live.is_empty() {
                    let r = live.remove(x as usize % live.len());
                    aug.delete(r.id).unwrap();
                } else {
                    let r = Rect::new(i as u64, x, y, w);
                    aug.insert(r).unwrap();
                    live.push(r);
                }
                prop_assert!(aug.check_invariants().is_ok(), "{:?}", aug.check_invariants());
                prop_assert!(aug.size() >= aug.base().size());
                if full {
                    let out = aug.solution().into_iter().collect();
                    prop_assert!(oracle::verify_rects(&s, &live, &out).maximal);
                }
            }
        }

        #[test]
        fn local_repair_of_squares_is_maximal(
            seq in proptest::collection::vec((0i64..100, 0i64..100, any::<bool>()), 1..80),
        ) {
            // For unit squares the repair radius covers every label whose
            // conflicts changed, so the output stays maximal.
            let s = sc();
            let base = GridState::new(s, frame(), GridStorage::Hashed);
            let mut aug = AugmentedState::new(base, AugmentPolicy::Local).unwrap();
            let mut live: Vec<Square> = Vec::new();
            for (i, (x, y, del)) in seq.into_iter().enumerate() {
                if del && !live.is_empty() {
                    let q = live.remove(x as usize % live.len());
                    aug.delete(q.id).unwrap();
                } else {
                    let q = Square::new(i as u64, x, y);
                    aug.insert(q.to_rect(&s)).unwrap();
                    live.push(q);
                }
                prop_assert!(aug.check_invariants().is_ok(), "{:?}", aug.check_invariants());
                let out = aug.solution().into_iter().collect();
                prop_assert!(oracle::verify_squares(&s, &live, &out).maximal);
            }
        }
    }
}
