//! Maintained-solution algorithms.
//!
//! * [`mis_ors`]: maximal independent set via two dynamic range indexes.
//! * [`mis_graph`]: maximal independent set on an explicit intersection graph.
//! * [`grid`]: 4-approximation with constant update time.
//! * [`shifting`]: `2(1 + 1/k)`-approximation via shifted groups per line.
//! * [`line`]: 2-approximation for unit-height rectangles, exact per line.

pub mod grid;
pub mod line;
pub mod mis_graph;
pub mod mis_ors;
pub mod region;
pub mod shifting;

use crate::geometry::LabelId;

/// Membership change of a maintained solution caused by one update.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Diff {
    pub added: Vec<LabelId>,
    pub removed: Vec<LabelId>,
}

impl Diff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.removed.is_empty()
    }

    /// Sorted copies, for order-insensitive comparison.
    pub fn normalized(mut self) -> Self {
        self.added.sort_unstable();
        self.removed.sort_unstable();
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeReport {
    pub size: usize,
}

/// Even or odd stabbing lines (or grid columns).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(index: i64) -> Parity {
        if index.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Running totals of the two line classes; the larger one is the solution,
/// with ties going to the even lines.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParityTotals {
    pub even: usize,
    pub odd: usize,
}

impl ParityTotals {
    pub fn winner(&self) -> Parity {
        if self.even >= self.odd {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn best(&self) -> usize {
        self.even.max(self.odd)
    }

    /// Replaces one line's contribution `old` by `new`.
    pub fn adjust(&mut self, line: i64, old: usize, new: usize) {
        let slot = match Parity::of(line) {
            Parity::Even => &mut self.even,
            Parity::Odd => &mut self.odd,
        };
        *slot = *slot + new - old;
    }

    pub fn get(&self, p: Parity) -> usize {
        match p {
            Parity::Even => self.even,
            Parity::Odd => self.odd,
        }
    }
}

/// Solvers that compose their answer from independent per-line solutions of
/// one parity class. Used to derive membership diffs for augmentation.
pub trait LineComposed {
    fn winner(&self) -> Parity;
    /// The stabbing line a label belongs to.
    fn line_of(&self, id: LabelId) -> Option<i64>;
    /// This line's contribution under its current best choice.
    fn line_solution(&self, line: i64) -> Vec<LabelId>;
    /// Union of line solutions over one parity class.
    fn parity_solution(&self, parity: Parity) -> Vec<LabelId>;
}

/// Computes the membership diff of a line-composed solver across one update
/// that touched `line`, given the winning parity and that line's solution
/// captured before the update.
pub fn line_diff<S: LineComposed + ?Sized>(
    solver: &S,
    line: i64,
    before_winner: Parity,
    before_line: Vec<LabelId>,
) -> Diff {
    let after_winner = solver.winner();
    let line_parity = Parity::of(line);
    let after_line = solver.line_solution(line);
    if before_winner == after_winner {
        if line_parity != after_winner {
            return Diff::default();
        }
        let old: std::collections::HashSet<_> = before_line.iter().copied().collect();
        let new: std::collections::HashSet<_> = after_line.iter().copied().collect();
        return Diff {
            added: after_line.into_iter().filter(|id| !old.contains(id)).collect(),
            removed: before_line.into_iter().filter(|id| !new.contains(id)).collect(),
        };
    }
    // The whole answer switched classes.
    let mut removed = solver.parity_solution(before_winner);
    if line_parity == before_winner {
        let now: std::collections::HashSet<_> = after_line.iter().copied().collect();
        removed.retain(|id| !now.contains(id));
        removed.extend(before_line);
    }
    Diff {
        added: solver.parity_solution(after_winner),
        removed,
    }
}
