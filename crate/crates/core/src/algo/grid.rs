//! Grid solver for unit squares with constant work per update.
//!
//! Each square contains exactly one grid point. A grid point is active when
//! some square owns it, and each active point is represented by its oldest
//! square. On a row, the odd active columns and the even active columns each
//! give an independent set; the row contributes the larger one. The answer is
//! the larger of the even-row and odd-row totals.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::algo::{LineComposed, Parity, ParityTotals, SizeReport};
use crate::error::{Error, Result};
use crate::geometry::{GridPoint, LabelId, Scale, Square};

/// The window of grid points a solver accepts: rows and columns in
/// `origin .. origin + kappa`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridFrame {
    pub row0: i64,
    pub col0: i64,
    pub kappa: i64,
}

impl GridFrame {
    /// Smallest square frame holding the grid points of `squares`, padded by
    /// `margin` points on every side.
    pub fn covering<'a>(
        scale: &Scale,
        squares: impl IntoIterator<Item = &'a Square>,
        margin: i64,
    ) -> GridFrame {
        let mut bounds: Option<(i64, i64, i64, i64)> = None;
        for s in squares {
            let g = scale.grid_point_of(s);
            bounds = Some(match bounds {
                None => (g.row, g.row, g.col, g.col),
                Some((r0, r1, c0, c1)) => (r0.min(g.row), r1.max(g.row), c0.min(g.col), c1.max(g.col)),
            });
        }
        let (r0, r1, c0, c1) = bounds.unwrap_or((0, 0, 0, 0));
        GridFrame {
            row0: r0 - margin,
            col0: c0 - margin,
            kappa: (r1 - r0).max(c1 - c0) + 1 + 2 * margin,
        }
    }

    pub fn contains(&self, g: GridPoint) -> bool {
        (self.row0..self.row0 + self.kappa).contains(&g.row)
            && (self.col0..self.col0 + self.kappa).contains(&g.col)
    }

    fn slot(&self, g: GridPoint) -> usize {
        ((g.row - self.row0) * self.kappa + (g.col - self.col0)) as usize
    }
}

/// How buckets are stored: hashed by grid point, or a dense `kappa x kappa`
/// array for small frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GridStorage {
    #[default]
    Hashed,
    Dense,
}

/// Squares owning one grid point, oldest first.
#[derive(Clone, Debug, Default)]
struct Bucket {
    by_age: BTreeMap<u64, LabelId>,
}

impl Bucket {
    fn front(&self) -> Option<LabelId> {
        self.by_age.values().next().copied()
    }
}

#[derive(Clone, Debug)]
enum Buckets {
    Hashed(HashMap<GridPoint, Bucket>),
    Dense(Vec<Bucket>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RowLedger {
    /// Active odd columns.
    pub p: usize,
    /// Active even columns.
    pub q: usize,
}

impl RowLedger {
    pub fn c(&self) -> usize {
        self.p.max(self.q)
    }

    /// Column class the row draws its squares from; odd wins ties.
    pub fn column_parity(&self) -> Parity {
        if self.p >= self.q {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

#[derive(Clone, Debug)]
pub struct GridState {
    scale: Scale,
    frame: GridFrame,
    buckets: Buckets,
    squares: HashMap<LabelId, (Square, GridPoint, u64)>,
    rows: HashMap<i64, RowLedger>,
    /// Active columns per row, to list a row's representatives.
    active: HashMap<i64, HashSet<i64>>,
    totals: ParityTotals,
    next_seq: u64,
    last_touched: usize,
}

impl GridState {
    pub fn new(scale: Scale, frame: GridFrame, storage: GridStorage) -> Self {
        let buckets = match storage {
            GridStorage::Hashed => Buckets::Hashed(HashMap::new()),
            GridStorage::Dense => {
                Buckets::Dense(vec![Bucket::default(); (frame.kappa * frame.kappa) as usize])
            }
        };
        GridState {
            scale,
            frame,
            buckets,
            squares: HashMap::new(),
            rows: HashMap::new(),
            active: HashMap::new(),
            totals: ParityTotals::default(),
            next_seq: 0,
            last_touched: 0,
        }
    }

    pub fn build(
        scale: Scale,
        frame: GridFrame,
        storage: GridStorage,
        squares: &[Square],
    ) -> Result<Self> {
        let mut st = GridState::new(scale, frame, storage);
        for s in squares {
            st.insert(*s)?;
        }
        Ok(st)
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn frame(&self) -> GridFrame {
        self.frame
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn size(&self) -> usize {
        self.totals.best()
    }

    pub fn totals(&self) -> ParityTotals {
        self.totals
    }

    pub fn row(&self, row: i64) -> RowLedger {
        self.rows.get(&row).copied().unwrap_or_default()
    }

    pub fn square(&self, id: LabelId) -> Option<&Square> {
        self.squares.get(&id).map(|(s, _, _)| s)
    }

    pub fn squares(&self) -> impl Iterator<Item = &Square> + '_ {
        self.squares.values().map(|(s, _, _)| s)
    }

    /// Counters written by the last update.
    pub fn last_touched(&self) -> usize {
        self.last_touched
    }

    fn bucket(&self, g: GridPoint) -> Option<&Bucket> {
        match &self.buckets {
            Buckets::Hashed(m) => m.get(&g),
            Buckets::Dense(v) => Some(&v[self.frame.slot(g)]),
        }
    }

    fn bucket_mut(&mut self, g: GridPoint) -> &mut Bucket {
        match &mut self.buckets {
            Buckets::Hashed(m) => m.entry(g).or_default(),
            Buckets::Dense(v) => &mut v[self.frame.slot(g)],
        }
    }

    /// Representative of an active grid point.
    pub fn representative(&self, g: GridPoint) -> Option<LabelId> {
        self.bucket(g).and_then(Bucket::front)
    }

    /// Flips the activity of `g` and updates its row and the row aggregate.
    fn set_active(&mut self, g: GridPoint, on: bool) {
        let ledger = self.rows.entry(g.row).or_default();
        let old = ledger.c();
        let slot = match Parity::of(g.col) {
            Parity::Odd => &mut ledger.p,
            Parity::Even => &mut ledger.q,
        };
        if on {
            *slot += 1;
        } else {
            *slot -= 1;
        }
        let new = ledger.c();
        let empty = ledger.p == 0 && ledger.q == 0;
        self.totals.adjust(g.row, old, new);
        let cols = self.active.entry(g.row).or_default();
        if on {
            cols.insert(g.col);
        } else {
            cols.remove(&g.col);
        }
        if empty {
            self.rows.remove(&g.row);
            self.active.remove(&g.row);
        }
        // Bucket, one parity counter, the row maximum, one aggregate.
        self.last_touched = 4;
    }

    pub fn insert(&mut self, s: Square) -> Result<SizeReport> {
        if self.squares.contains_key(&s.id) {
            return Err(Error::DuplicateId(s.id));
        }
        let g = self.scale.grid_point_of(&s);
        if !self.frame.contains(g) {
            return Err(Error::OutOfFrame { id: s.id, point: g });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.last_touched = 1;
        let bucket = self.bucket_mut(g);
        let was_empty = bucket.by_age.is_empty();
        bucket.by_age.insert(seq, s.id);
        self.squares.insert(s.id, (s, g, seq));
        if was_empty {
            self.set_active(g, true);
        }
        Ok(SizeReport { size: self.size() })
    }

    pub fn delete(&mut self, id: LabelId) -> Result<SizeReport> {
        let (_, g, seq) = self.squares.remove(&id).ok_or(Error::UnknownId(id))?;
        self.last_touched = 1;
        let bucket = self.bucket_mut(g);
        bucket.by_age.remove(&seq);
        let now_empty = bucket.by_age.is_empty();
        if now_empty {
            if let Buckets::Hashed(m) = &mut self.buckets {
                m.remove(&g);
            }
            self.set_active(g, false);
        }
        Ok(SizeReport { size: self.size() })
    }

    pub fn solution(&self) -> Vec<LabelId> {
        self.parity_solution(self.totals.winner())
    }

    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut by_point: HashMap<GridPoint, usize> = HashMap::new();
        for (id, (s, g, _)) in &self.squares {
            if self.scale.grid_point_of(s) != *g {
                return Err(format!("{id} filed at the wrong point"));
            }
            *by_point.entry(*g).or_default() += 1;
        }
        let mut rows: HashMap<i64, RowLedger> = HashMap::new();
        for (&g, &n) in &by_point {
            let b = self.bucket(g).ok_or("missing bucket")?;
            if b.by_age.len() != n {
                return Err(format!("bucket at {g:?} holds {} of {n}", b.by_age.len()));
            }
            let l = rows.entry(g.row).or_default();
            match Parity::of(g.col) {
                Parity::Odd => l.p += 1,
                Parity::Even => l.q += 1,
            }
        }
        if rows != self.rows {
            return Err("row ledgers differ from recomputation".into());
        }
        let mut totals = ParityTotals::default();
        for (&r, l) in &rows {
            totals.adjust(r, 0, l.c());
            let cols = self.active.get(&r).map_or(0, HashSet::len);
            if cols != l.p + l.q {
                return Err(format!("row {r} active column list out of sync"));
            }
        }
        if totals != self.totals {
            return Err(format!("totals {:?}, recomputed {:?}", self.totals, totals));
        }
        if self.last_touched > 4 {
            return Err(format!("update touched {} counters", self.last_touched));
        }
        Ok(())
    }
}

impl LineComposed for GridState {
    fn winner(&self) -> Parity {
        self.totals.winner()
    }

    fn line_of(&self, id: LabelId) -> Option<i64> {
        self.squares.get(&id).map(|(_, g, _)| g.row)
    }

    fn line_solution(&self, row: i64) -> Vec<LabelId> {
        let (Some(ledger), Some(cols)) = (self.rows.get(&row), self.active.get(&row)) else {
            return Vec::new();
        };
        let parity = ledger.column_parity();
        cols.iter()
            .filter(|&&c| Parity::of(c) == parity)
            .filter_map(|&col| self.representative(GridPoint { row, col }))
            .collect()
    }

    fn parity_solution(&self, parity: Parity) -> Vec<LabelId> {
        self.rows
            .keys()
            .filter(|&&r| Parity::of(r) == parity)
            .flat_map(|&r| self.line_solution(r))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use proptest::prelude::*;

    fn sc() -> Scale {
        Scale::new(1).unwrap()
    }

    fn sq(id: u64, x: f64, y: f64) -> Square {
        Square::new(id, sc().scale_f64(x), sc().scale_f64(y))
    }

    fn frame() -> GridFrame {
        GridFrame {
            row0: 0,
            col0: 0,
            kappa: 8,
        }
    }

    fn three() -> Vec<Square> {
        vec![sq(0, 1.2, 1.1), sq(1, 3.1, 1.2), sq(2, 2.2, 2.1)]
    }

    fn sorted(mut v: Vec<LabelId>) -> Vec<LabelId> {
        v.sort_unstable();
        v
    }

    #[test]
    fn build_example() {
        for storage in [GridStorage::Hashed, GridStorage::Dense] {
            let st = GridState::build(sc(), frame(), storage, &three()).unwrap();
            assert_eq!(st.row(1), RowLedger { p: 2, q: 0 });
            assert_eq!(st.row(2).c(), 1);
            assert_eq!(st.totals(), ParityTotals { even: 1, odd: 2 });
            assert_eq!(sorted(st.solution()), vec![LabelId(0), LabelId(1)]);
            st.check_invariants().unwrap();
        }
    }

    #[test]
    fn empty_and_single() {
        let st = GridState::new(sc(), frame(), GridStorage::Hashed);
        assert!(st.solution().is_empty());
        assert_eq!(st.totals(), ParityTotals::default());
        let st = GridState::build(sc(), frame(), GridStorage::Hashed, &[sq(5, 2.0, 2.0)]).unwrap();
        assert_eq!(st.solution(), vec![LabelId(5)]);
    }

    #[test]
    fn insertions() {
        let mut st = GridState::build(sc(), frame(), GridStorage::Hashed, &three()).unwrap();
        // Already active point: nothing changes.
        assert_eq!(st.insert(sq(3, 1.3, 1.0)).unwrap().size, 2);
        assert_eq!(st.row(1), RowLedger { p: 2, q: 0 });
        // A second active point on row 2, at an even column.
        let r = st.insert(sq(4, 4.1, 2.2)).unwrap();
        assert_eq!(st.row(2), RowLedger { p: 0, q: 2 });
        assert_eq!(r.size, 2);
        st.check_invariants().unwrap();

        let mut tie = GridState::new(sc(), frame(), GridStorage::Hashed);
        tie.insert(sq(0, 1.0, 1.0)).unwrap();
        tie.insert(sq(1, 2.0, 1.0)).unwrap();
        assert_eq!(tie.row(1).c(), 1);
        tie.insert(sq(2, 3.0, 1.0)).unwrap();
        assert_eq!(tie.row(1).c(), 2);
    }

    #[test]
    fn deletions() {
        let mut st = GridState::build(sc(), frame(), GridStorage::Hashed, &three()).unwrap();
        st.insert(sq(3, 1.3, 1.0)).unwrap();
        // Deleting the representative hands the point to the next oldest.
        st.delete(LabelId(0)).unwrap();
        assert_eq!(st.size(), 2);
        assert_eq!(sorted(st.solution()), vec![LabelId(1), LabelId(3)]);
        st.insert(sq(4, 1.4, 1.0)).unwrap();
        st.delete(LabelId(4)).unwrap();
        assert_eq!(st.row(1).p, 2);
        st.delete(LabelId(3)).unwrap();
        assert_eq!(st.row(1).p, 1);
        assert!(matches!(st.delete(LabelId(3)), Err(Error::UnknownId(_))));
        st.check_invariants().unwrap();
    }

    #[test]
    fn frame_is_enforced() {
        let mut st = GridState::new(sc(), frame(), GridStorage::Dense);
        assert!(matches!(st.insert(sq(0, 9.0, 1.0)), Err(Error::OutOfFrame { .. })));
        assert!(matches!(st.insert(sq(0, 1.0, -1.0)), Err(Error::OutOfFrame { .. })));
        let f = GridFrame::covering(&sc(), &three(), 1);
        assert_eq!((f.row0, f.col0, f.kappa), (0, 0, 5));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn ledgers_follow_updates(
            dense in any::<bool>(),
            seq in proptest::collection::vec((0i64..70, 0i64..70, any::<bool>()), 1..150),
        ) {
            let s = sc();
            let storage = if dense { GridStorage::Dense } else { GridStorage::Hashed };
            let mut st = GridState::new(s, frame(), storage);
            let mut live: Vec<Square> = Vec::new();
            for (i, (x, y, del)) in seq.into_iter().enumerate() {
                if del && !live.is_empty() {
                    let q = live.remove(x as usize % live.len());
                    st.delete(q.id).unwrap();
                } else {
                    let q = Square::new(i as u64, x, y);
                    st.insert(q).unwrap();
                    live.push(q);
                }
                prop_assert!(st.check_invariants().is_ok(), "{:?}", st.check_invariants());
                let sol: HashSet<_> = st.solution().into_iter().collect();
                prop_assert_eq!(sol.len(), st.size());
                prop_assert!(oracle::verify_squares(&s, &live, &sol).independent);
            }
        }
    }
}
