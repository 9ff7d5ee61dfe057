//! Shifting solver for unit squares.
//!
//! On each stabbing line, group `alpha` (for `alpha` in `0..=k`) drops the
//! squares whose grid column is `alpha` modulo `k + 1`. The surviving columns
//! fall into blocks of `k` consecutive columns; squares of different blocks
//! cannot meet, and within a block the intervals are solved exactly. A line
//! contributes its best group, and the answer is the larger of the even and
//! odd line classes.

use std::collections::HashMap;

use crate::algo::line::IntervalMis;
use crate::algo::{LineComposed, Parity, ParityTotals, SizeReport};
use crate::error::{Error, Result};
use crate::geometry::{GridPoint, LabelId, Scale, Square};
use crate::interval_index::Interval;

#[derive(Clone, Debug, Default)]
struct ShiftLine {
    /// `groups[alpha]` maps a block index to that subgroup's solver.
    groups: Vec<HashMap<i64, IntervalMis>>,
    sizes: Vec<usize>,
    best: usize,
    best_alpha: usize,
    count: usize,
}

impl ShiftLine {
    fn new(k: usize) -> Self {
        ShiftLine {
            groups: vec![HashMap::new(); k + 1],
            sizes: vec![0; k + 1],
            ..Default::default()
        }
    }

    fn refresh_best(&mut self) {
        let (alpha, best) = self
            .sizes
            .iter()
            .enumerate()
            .fold((0, 0), |acc, (a, &s)| if s > acc.1 { (a, s) } else { acc });
        self.best = best;
        self.best_alpha = alpha;
    }
}

#[derive(Clone, Debug)]
pub struct ShiftState {
    scale: Scale,
    k: usize,
    lines: HashMap<i64, ShiftLine>,
    squares: HashMap<LabelId, (Square, GridPoint)>,
    totals: ParityTotals,
    last_touched_groups: usize,
    last_max_queries: usize,
}

impl ShiftState {
    pub fn new(scale: Scale, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidShift);
        }
        Ok(ShiftState {
            scale,
            k,
            lines: HashMap::new(),
            squares: HashMap::new(),
            totals: ParityTotals::default(),
            last_touched_groups: 0,
            last_max_queries: 0,
        })
    }

    pub fn build(scale: Scale, k: usize, squares: &[Square]) -> Result<Self> {
        let mut st = ShiftState::new(scale, k)?;
        let mut buckets: HashMap<(i64, usize, i64), Vec<Interval>> = HashMap::new();
        for s in squares {
            let g = scale.grid_point_of(s);
            if st.squares.insert(s.id, (*s, g)).is_some() {
                return Err(Error::DuplicateId(s.id));
            }
            for (alpha, block) in st.placements(g.col) {
                buckets
                    .entry((g.row, alpha, block))
                    .or_default()
                    .push(st.interval(s));
            }
            st.lines.entry(g.row).or_insert_with(|| ShiftLine::new(k)).count += 1;
        }
        for ((row, alpha, block), ivs) in buckets {
            let mis = IntervalMis::from_intervals(&ivs)?;
            let line = st.lines.get_mut(&row).expect("line created above");
            line.sizes[alpha] += mis.size();
            line.groups[alpha].insert(block, mis);
        }
        for (&row, line) in st.lines.iter_mut() {
            line.refresh_best();
            st.totals.adjust(row, 0, line.best);
        }
        Ok(st)
    }

    pub fn k(&self) -> usize {
        self.k
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
        self.totals.best()
    }

    pub fn totals(&self) -> ParityTotals {
        self.totals
    }

    pub fn square(&self, id: LabelId) -> Option<&Square> {
        self.squares.get(&id).map(|(s, _)| s)
    }

    pub fn squares(&self) -> impl Iterator<Item = &Square> + '_ {
        self.squares.values().map(|(s, _)| s)
    }

    /// Groups updated by the last insertion or deletion.
    pub fn last_touched_groups(&self) -> usize {
        self.last_touched_groups
    }

    /// Largest number of successor queries one subgroup issued during the
    /// last update.
    pub fn last_max_queries(&self) -> usize {
        self.last_max_queries
    }

    fn interval(&self, s: &Square) -> Interval {
        let u = self.scale.unit();
        Interval::new(s.id, 2 * s.cx - u, 2 * s.cx + u)
    }

    /// `(alpha, block)` for every group that keeps column `col`.
    fn placements(&self, col: i64) -> impl Iterator<Item = (usize, i64)> {
        let m = self.k as i64 + 1;
        (0..=self.k).filter_map(move |alpha| {
            let shifted = col - alpha as i64;
            (shifted.rem_euclid(m) != 0).then(|| (alpha, (shifted - 1).div_euclid(m)))
        })
    }

    pub fn insert(&mut self, s: Square) -> Result<SizeReport> {
        if self.squares.contains_key(&s.id) {
            return Err(Error::DuplicateId(s.id));
        }
        let g = self.scale.grid_point_of(&s);
        let iv = self.interval(&s);
        let places: Vec<_> = self.placements(g.col).collect();
        let k = self.k;
        let line = self.lines.entry(g.row).or_insert_with(|| ShiftLine::new(k));
        let old = line.best;
        let mut max_q = 0;
        for &(alpha, block) in &places {
            let mis = line.groups[alpha].entry(block).or_default();
            let before = mis.size();
            mis.insert(iv)?;
            max_q = max_q.max(mis.last_queries());
            line.sizes[alpha] = line.sizes[alpha] + mis.size() - before;
        }
        line.count += 1;
        line.refresh_best();
        let new = line.best;
        self.totals.adjust(g.row, old, new);
        self.squares.insert(s.id, (s, g));
        self.last_touched_groups = places.len();
        self.last_max_queries = max_q;
        Ok(SizeReport { size: self.size() })
    }

    pub fn delete(&mut self, id: LabelId) -> Result<SizeReport> {
        let (_, g) = self.squares.remove(&id).ok_or(Error::UnknownId(id))?;
        let places: Vec<_> = self.placements(g.col).collect();
        let line = self.lines.get_mut(&g.row).expect("line of stored square");
        let old = line.best;
        let mut max_q = 0;
        for &(alpha, block) in &places {
            let mis = line.groups[alpha].get_mut(&block).expect("subgroup of stored square");
            let before = mis.size();
            mis.delete(id)?;
            max_q = max_q.max(mis.last_queries());
            line.sizes[alpha] = line.sizes[alpha] + mis.size() - before;
            if mis.is_empty() {
                line.groups[alpha].remove(&block);
            }
        }
        line.count -= 1;
        line.refresh_best();
        let new = line.best;
        if line.count == 0 {
            self.lines.remove(&g.row);
        }
        self.totals.adjust(g.row, old, new);
        self.last_touched_groups = places.len();
        self.last_max_queries = max_q;
        Ok(SizeReport { size: self.size() })
    }

    pub fn solution(&self) -> Vec<LabelId> {
        self.parity_solution(self.totals.winner())
    }

    /// Every subgroup solver, as `(row, alpha, block, solver)`.
    pub fn subgroups(&self) -> impl Iterator<Item = (i64, usize, i64, &IntervalMis)> + '_ {
        self.lines.iter().flat_map(|(&row, line)| {
            line.groups.iter().enumerate().flat_map(move |(alpha, g)| {
                g.iter().map(move |(&block, mis)| (row, alpha, block, mis))
            })
        })
    }

    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut totals = ParityTotals::default();
        for (&row, line) in &self.lines {
            let mut count = 0;
            for (alpha, g) in line.groups.iter().enumerate() {
                let mut size = 0;
                let mut members = 0;
                for (&block, mis) in g {
                    mis.check_invariants()
                        .map_err(|e| format!("row {row} group {alpha} block {block}: {e}"))?;
                    if mis.size() > self.k {
                        return Err(format!("subgroup solution of {} exceeds k", mis.size()));
                    }
                    for iv in mis.intervals() {
                        let (_, gp) = self.squares.get(&iv.id).ok_or("unknown id in subgroup")?;
                        if gp.row != row || !self.placements(gp.col).any(|p| p == (alpha, block)) {
                            return Err(format!("{} misfiled", iv.id));
                        }
                    }
                    size += mis.size();
                    members += mis.len();
                }
                if size != line.sizes[alpha] {
                    return Err(format!("row {row} group {alpha} size out of sync"));
                }
                count += members;
            }
            // Each square sits in exactly k of the k + 1 groups.
            if count != line.count * self.k {
                return Err(format!("row {row} membership count {count}"));
            }
            let best = line.sizes.iter().copied().max().unwrap_or(0);
            if best != line.best || line.sizes[line.best_alpha] != best {
                return Err(format!("row {row} best group out of sync"));
            }
            totals.adjust(row, 0, best);
        }
        if totals != self.totals {
            return Err(format!("totals {:?}, recomputed {:?}", self.totals, totals));
        }
        if self.last_touched_groups > self.k || self.last_max_queries > self.k + 1 {
            return Err("update touched too much".into());
        }
        Ok(())
    }
}

impl LineComposed for ShiftState {
    fn winner(&self) -> Parity {
        self.totals.winner()
    }

    fn line_of(&self, id: LabelId) -> Option<i64> {
        self.squares.get(&id).map(|(_, g)| g.row)
    }

    fn line_solution(&self, row: i64) -> Vec<LabelId> {
        let Some(line) = self.lines.get(&row) else {
            return Vec::new();
        };
        line.groups[line.best_alpha]
            .values()
            .flat_map(|m| m.selected().map(|iv| iv.id))
            .collect()
    }

    fn parity_solution(&self, parity: Parity) -> Vec<LabelId> {
        self.lines
            .keys()
            .filter(|&&row| Parity::of(row) == parity)
            .flat_map(|&row| self.line_solution(row))
            .collect()
    }
}
