//! Ground truth for tests and benchmarks: independence and maximality checks,
//! exact maximum independent sets by branch and reduce, and the greedy that is
//! exact on interval graphs.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::geometry::{Coord, LabelId, Rect, Scale, Square};
use crate::interval_index::Interval;

pub const DEFAULT_CAP: usize = 300;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactResult {
    pub size: usize,
    pub witness: Vec<LabelId>,
    pub nodes_explored: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub independent: bool,
    pub maximal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactConfig {
    /// Largest instance accepted.
    pub cap: usize,
    /// Search nodes before giving up; `None` searches to completion.
    pub node_limit: Option<u64>,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            cap: DEFAULT_CAP,
            node_limit: None,
        }
    }
}

/// Adjacency lists of the intersection graph, by position in `rects`.
pub fn intersection_graph(scale: &Scale, rects: &[Rect]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..rects.len()).collect();
    order.sort_unstable_by_key(|&i| rects[i].span2().0);
    let mut adj = vec![Vec::new(); rects.len()];
    for (a, &i) in order.iter().enumerate() {
        let hi = rects[i].span2().1;
        for &j in &order[a + 1..] {
            if rects[j].span2().0 >= hi {
                break;
            }
            if scale.intersects_rect(&rects[i], &rects[j]) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}

pub fn squares_to_rects(scale: &Scale, squares: &[Square]) -> Vec<Rect> {
    squares.iter().map(|s| s.to_rect(scale)).collect()
}

/// Independence and maximality of `set` within `rects`. Ids of `set` that do
/// not occur in `rects` make the set non-independent.
pub fn verify_rects(scale: &Scale, rects: &[Rect], set: &HashSet<LabelId>) -> Verdict {
    let known = rects.iter().filter(|r| set.contains(&r.id)).count();
    if known != set.len() {
        return Verdict {
            independent: false,
            maximal: false,
        };
    }
    let adj = intersection_graph(scale, rects);
    let inside: Vec<bool> = rects.iter().map(|r| set.contains(&r.id)).collect();
    let independent = (0..rects.len())
        .filter(|&i| inside[i])
        .all(|i| adj[i].iter().all(|&j| !inside[j]));
    let maximal = (0..rects.len())
        .filter(|&i| !inside[i])
        .all(|i| adj[i].iter().any(|&j| inside[j]));
    Verdict {
        independent,
        maximal,
    }
}

pub fn verify_squares(scale: &Scale, squares: &[Square], set: &HashSet<LabelId>) -> Verdict {
    verify_rects(scale, &squares_to_rects(scale, squares), set)
}

/// Earliest-deadline greedy: scan by `(hi, id)` and keep every interval that
/// starts at or after the last kept right endpoint. Optimal on interval graphs.
pub fn greedy_interval_chain(intervals: &[Interval]) -> Vec<Interval> {
    let mut v: Vec<Interval> = intervals.to_vec();
    v.sort_unstable_by_key(Interval::right_key);
    let mut out: Vec<Interval> = Vec::new();
    for iv in v {
        if out.last().is_none_or(|l| l.hi <= iv.lo) {
            out.push(iv);
        }
    }
    out
}

pub fn exact_interval_mis(intervals: &[Interval]) -> ExactResult {
    let chain = greedy_interval_chain(intervals);
    ExactResult {
        size: chain.len(),
        witness: chain.into_iter().map(|iv| iv.id).collect(),
        nodes_explored: 0,
    }
}

pub fn exact_max_is_squares(scale: &Scale, squares: &[Square]) -> Result<ExactResult> {
    exact_max_is(scale, &squares_to_rects(scale, squares), ExactConfig::default())
}

/// Maximum independent set of the intersection graph of `rects`.
pub fn exact_max_is(scale: &Scale, rects: &[Rect], cfg: ExactConfig) -> Result<ExactResult> {
    if rects.len() > cfg.cap {
        return Err(Error::CapExceeded {
            n: rects.len(),
            cap: cfg.cap,
        });
    }
    // Vertex numbering follows stabbing-line order, which keeps the greedy
    // clique cover local.
    let mut order: Vec<usize> = (0..rects.len()).collect();
    order.sort_unstable_by_key(|&i| (scale.line_of(&rects[i]), rects[i].cx, rects[i].id));
    let sorted: Vec<Rect> = order.iter().map(|&i| rects[i]).collect();
    let adj = intersection_graph(scale, &sorted);
    let mut solver = BranchAndReduce::new(&adj, &sorted, cfg.node_limit);
    let best = solver.maximum()?;
    let mut witness: Vec<LabelId> = best.into_iter().map(|v| sorted[v].id).collect();
    witness.sort_unstable();
    Ok(ExactResult {
        size: witness.len(),
        witness,
        nodes_explored: solver.nodes,
    })
}

/// Plain `2^n` enumeration, for cross-checking the exact solver on tiny inputs.
pub fn brute_force_max_is(scale: &Scale, rects: &[Rect]) -> usize {
    assert!(rects.len() <= 24, "brute force is limited to 24 labels");
    let adj = intersection_graph(scale, rects);
    let masks: Vec<u32> = adj
        .iter()
        .map(|n| n.iter().fold(0u32, |m, &j| m | (1 << j)))
        .collect();
    let mut best = 0;
    for set in 0u32..(1u32 << rects.len()) {
        let ok = (0..rects.len()).all(|i| set & (1 << i) == 0 || set & masks[i] == 0);
        if ok {
            best = best.max(set.count_ones() as usize);
        }
    }
    best
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn full(n: usize) -> Self {
        let mut b = Bits::empty(n);
        for i in 0..n {
            b.set(i);
        }
        b
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        self.0[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.0[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    fn clear(&mut self, i: usize) {
        self.0[i >> 6] &= !(1 << (i & 63));
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn and_not_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + t)
            })
        })
    }
}

/// Components at least this large branch along a geometric cut instead of
/// on the highest degree vertex.
const CUT_BRANCHING_MIN: usize = 48;

struct BranchAndReduce<'a> {
    n: usize,
    adj: &'a [Vec<usize>],
    nbits: Vec<Bits>,
    centers: Vec<(Coord, Coord)>,
    /// Exact answers for components already solved.
    memo: HashMap<Bits, Vec<usize>>,
    nodes: u64,
    limit: Option<u64>,
}

impl<'a> BranchAndReduce<'a> {
    fn new(adj: &'a [Vec<usize>], rects: &[Rect], limit: Option<u64>) -> Self {
        let n = adj.len();
        let nbits = adj
            .iter()
            .map(|ns| {
                let mut b = Bits::empty(n);
                for &j in ns {
                    b.set(j);
                }
                b
            })
            .collect();
        BranchAndReduce {
            n,
            adj,
            nbits,
            centers: rects.iter().map(|r| (r.cx, r.cy)).collect(),
            memo: HashMap::new(),
            nodes: 0,
            limit,
        }
    }

    fn maximum(&mut self) -> Result<Vec<usize>> {
        let all = Bits::full(self.n);
        let greedy = self.greedy(&all);
        let lb = greedy.len() as i64 - 1;
        Ok(self.search(all, lb)?.unwrap_or(greedy))
    }

    fn degree(&self, v: usize, p: &Bits) -> usize {
        self.adj[v].iter().filter(|&&u| p.get(u)).count()
    }

    /// Min-degree greedy independent set inside `p`.
    fn greedy(&self, p: &Bits) -> Vec<usize> {
        let mut p = p.clone();
        let mut out = Vec::new();
        while !p.is_empty() {
            let v = p.iter().min_by_key(|&v| self.degree(v, &p)).unwrap();
            out.push(v);
            p.clear(v);
            p.and_not_assign(&self.nbits[v]);
        }
        out
    }

    fn take(&self, v: usize, p: &mut Bits, chosen: &mut Vec<usize>) {
        chosen.push(v);
        p.clear(v);
        p.and_not_assign(&self.nbits[v]);
    }

    fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(i, &a)| vs[i + 1..].iter().all(|&b| self.nbits[a].get(b)))
    }

    /// Applies simplicial and domination reductions until none fires.
    fn reduce(&self, p: &mut Bits, chosen: &mut Vec<usize>) {
        loop {
            let mut changed = false;
            let live: Vec<usize> = p.iter().collect();
            for v in live {
                if !p.get(v) {
                    continue;
                }
                let nb: Vec<usize> = self.adj[v].iter().copied().filter(|&u| p.get(u)).collect();
                if nb.len() <= 8 && self.is_clique(&nb) {
                    self.take(v, p, chosen);
                    changed = true;
                }
            }
            // Domination: if N[v] is inside N[u] for adjacent u, v, drop u.
            let live: Vec<usize> = p.iter().collect();
            for v in live {
                if !p.get(v) {
                    continue;
                }
                let dv = self.degree(v, p);
                for &u in &self.adj[v] {
                    if !p.get(u) || !p.get(v) {
                        continue;
                    }
                    if self.degree(u, p) < dv {
                        continue;
                    }
                    // |N(v) ∩ p ∖ {u}| ⊆ N(u)
                    let shared = self.nbits[v].and_count_masked(&self.nbits[u], p);
                    if shared + 1 == dv {
                        p.clear(u);
                        changed = true;
                    }
                }
            }
            if !changed {
                return;
            }
        }
    }

    /// Greedy clique cover size of `p`; an upper bound on its independence
    /// number. Each vertex joins the first clique of an earlier neighbor that
    /// it is fully adjacent to.
    fn clique_cover(&self, p: &Bits) -> usize {
        let mut clique_of = vec![usize::MAX; self.n];
        let mut commons: Vec<Bits> = Vec::new();
        for v in p.iter() {
            let mut placed = false;
            for &u in &self.adj[v] {
                if u >= v || !p.get(u) {
                    continue;
                }
                let c = clique_of[u];
                if commons[c].get(v) {
                    clique_of[v] = c;
                    let nb = &self.nbits[v];
                    for (a, b) in commons[c].0.iter_mut().zip(&nb.0) {
                        *a &= b;
                    }
                    placed = true;
                    break;
                }
            }
            if !placed {
                clique_of[v] = commons.len();
                commons.push(self.nbits[v].clone());
            }
        }
        commons.len()
    }

    fn components(&self, p: &Bits) -> Vec<Bits> {
        let mut seen = Bits::empty(self.n);
        let mut out = Vec::new();
        for s in p.iter() {
            if seen.get(s) {
                continue;
            }
            let mut comp = Bits::empty(self.n);
            let mut stack = vec![s];
            seen.set(s);
            while let Some(v) = stack.pop() {
                comp.set(v);
                for &u in &self.adj[v] {
                    if p.get(u) && !seen.get(u) {
                        seen.set(u);
                        stack.push(u);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// A maximum independent set of the connected vertex set `c`, whose
    /// clique cover bound is `ub`.
    fn solve_component(&mut self, c: Bits, ub: usize) -> Result<Vec<usize>> {
        if let Some(s) = self.memo.get(&c) {
            return Ok(s.clone());
        }
        let g = self.greedy(&c);
        let best = if g.len() == ub {
            g
        } else {
            let glb = g.len() as i64 - 1;
            let key = c.clone();
            let best = self.search(c, glb)?.unwrap_or(g);
            self.memo.insert(key, best.clone());
            best
        };
        Ok(best)
    }

    /// The clique to branch on. Small sets use a single vertex of highest
    /// degree. Large ones use a clique grown around the vertex nearest the
    /// median of their wider axis, so that a few levels of branching clear a
    /// band and split the set into independent halves.
    fn branch_clique(&self, p: &Bits) -> Vec<usize> {
        let vs: Vec<usize> = p.iter().collect();
        if vs.len() < CUT_BRANCHING_MIN {
            let v = vs
                .into_iter()
                .max_by_key(|&v| (self.degree(v, p), std::cmp::Reverse(v)))
                .unwrap();
            return vec![v];
        }
        let span = |f: fn(&(Coord, Coord)) -> Coord| {
            let (lo, hi) = vs.iter().fold((Coord::MAX, Coord::MIN), |(lo, hi), &v| {
                let c = f(&self.centers[v]);
                (lo.min(c), hi.max(c))
            });
            hi - lo
        };
        let axis: fn(&(Coord, Coord)) -> Coord = if span(|c| c.0) >= span(|c| c.1) {
            |c| c.0
        } else {
            |c| c.1
        };
        let mut coords: Vec<Coord> = vs.iter().map(|&v| axis(&self.centers[v])).collect();
        let mid = vs.len() / 2;
        let median = *coords.select_nth_unstable(mid).1;
        let v = vs
            .iter()
            .copied()
            .min_by_key(|&v| {
                (
                    (axis(&self.centers[v]) - median).abs(),
                    std::cmp::Reverse(self.degree(v, p)),
                    v,
                )
            })
            .unwrap();
        vec![v]
    }

    /// A maximum independent set of `p` if its size exceeds `lb`.
    fn search(&mut self, mut p: Bits, lb: i64) -> Result<Option<Vec<usize>>> {
        self.nodes += 1;
        if let Some(limit) = self.limit {
            if self.nodes > limit {
                return Err(Error::BudgetExhausted(limit));
            }
        }
        let mut forced = Vec::new();
        self.reduce(&mut p, &mut forced);
        let rest_lb = lb - forced.len() as i64;
        if p.is_empty() {
            return Ok((rest_lb < 0).then_some(forced));
        }
        if (self.clique_cover(&p) as i64) <= rest_lb {
            return Ok(None);
        }

        let comps = self.components(&p);
        if comps.len() > 1 {
            let bounds: Vec<usize> = comps.iter().map(|c| self.clique_cover(c)).collect();
            let mut remaining: i64 = bounds.iter().sum::<usize>() as i64;
            let mut acc: Vec<usize> = Vec::new();
            for (c, ub) in comps.into_iter().zip(bounds) {
                remaining -= ub as i64;
                let best = self.solve_component(c, ub)?;
                acc.extend(best);
                if acc.len() as i64 + remaining <= rest_lb {
                    return Ok(None);
                }
            }
            if acc.len() as i64 > rest_lb {
                forced.extend(acc);
                return Ok(Some(forced));
            }
            return Ok(None);
        }

        let branch = self.branch_clique(&p);
        let mut best: Option<Vec<usize>> = None;
        let mut cur_lb = rest_lb;
        // At most one vertex of a clique is in any independent set: take
        // each in turn, then none of them.
        for &v in &branch {
            let mut with_v = p.clone();
            with_v.clear(v);
            with_v.and_not_assign(&self.nbits[v]);
            if let Some(mut s) = self.search(with_v, cur_lb - 1)? {
                s.push(v);
                cur_lb = s.len() as i64;
                best = Some(s);
            }
        }
        let mut without = p;
        for &v in &branch {
            without.clear(v);
        }
        if let Some(s) = self.search(without, cur_lb)? {
            best = Some(s);
        }
        Ok(best.map(|mut s| {
            s.extend(forced);
            s
        }))
    }
}

impl Bits {
    /// `|self ∩ other ∩ mask|`.
    fn and_count_masked(&self, other: &Bits, mask: &Bits) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .zip(&mask.0)
            .map(|((a, b), m)| (a & b & m).count_ones() as usize)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sc() -> Scale {
        Scale::new(1).unwrap()
    }

    fn sq(id: u64, x: f64, y: f64) -> Square {
        Square::new(id, sc().scale_f64(x), sc().scale_f64(y))
    }

    fn ids(v: &[u64]) -> HashSet<LabelId> {
        v.iter().map(|&i| LabelId(i)).collect()
    }

    #[test]
    fn exact_examples() {
        let five = [
            sq(0, 0.0, 0.0),
            sq(1, -0.9, -0.9),
            sq(2, -0.9, 0.9),
            sq(3, 0.9, -0.9),
            sq(4, 0.9, 0.9),
        ];
        let r = exact_max_is_squares(&sc(), &five).unwrap();
        assert_eq!(r.size, 4);
        assert_eq!(brute_force_max_is(&sc(), &squares_to_rects(&sc(), &five)), 4);

        let disjoint: Vec<_> = (0..7).map(|i| sq(i, 2.0 * i as f64, 0.0)).collect();
        assert_eq!(exact_max_is_squares(&sc(), &disjoint).unwrap().size, 7);

        let three = [sq(0, 1.2, 1.1), sq(1, 3.1, 1.2), sq(2, 2.2, 2.1)];
        assert_eq!(brute_force_max_is(&sc(), &squares_to_rects(&sc(), &three)), 2);
        assert_eq!(exact_max_is_squares(&sc(), &three).unwrap().size, 2);
    }

    #[test]
    fn cap_is_enforced() {
        let many: Vec<_> = (0..301).map(|i| sq(i, 2.0 * i as f64, 0.0)).collect();
        assert!(matches!(
            exact_max_is_squares(&sc(), &many),
            Err(Error::CapExceeded { n: 301, cap: 300 })
        ));
    }

    #[test]
    fn verify_examples() {
        let inst = [sq(0, 0.0, 0.0), sq(1, 0.5, 0.0), sq(2, 2.0, 0.0)];
        let v = verify_squares(&sc(), &inst, &ids(&[0, 2]));
        assert!(v.independent && v.maximal);
        let v = verify_squares(&sc(), &inst, &ids(&[0]));
        assert!(v.independent && !v.maximal);
        let v = verify_squares(&sc(), &[], &HashSet::new());
        assert!(v.independent && v.maximal);
        let v = verify_squares(&sc(), &inst, &ids(&[0, 1]));
        assert!(!v.independent);
    }

    #[test]
    fn interval_examples() {
        let r = exact_interval_mis(&[
            Interval::new(0, 0, 10),
            Interval::new(1, 5, 15),
            Interval::new(2, 20, 30),
        ]);
        assert_eq!(r.size, 2);
        assert_eq!(r.witness, vec![LabelId(0), LabelId(2)]);
        let r = exact_interval_mis(&[Interval::new(0, 0, 100), Interval::new(1, 10, 20)]);
        assert_eq!(r.size, 1);
        let chain: Vec<_> = (0..5).map(|i| Interval::new(i, 10 * i as i64, 10 * i as i64 + 10)).collect();
        assert_eq!(exact_interval_mis(&chain).size, 5);
    }

    fn rects_strategy(max: usize) -> impl Strategy<Value = Vec<Rect>> {
        proptest::collection::vec((0i64..60, 0i64..40, 5i64..30), 0..max).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (x, y, w))| Rect::new(i as u64, x, y, w))
                .collect()
        })
    }

    /// Independent exact oracle: a left-to-right sweep whose state is the set
    /// of chosen labels crossing the sweep line. Feasible for thin strips.
    fn sweep_max_is(scale: &Scale, rects: &[Rect]) -> usize {
        let mut events: Vec<(Coord, bool, usize)> = Vec::new();
        for (i, r) in rects.iter().enumerate() {
            let (lo, hi) = r.span2();
            events.push((lo, true, i));
            events.push((hi, false, i));
        }
        // Leaving before entering at equal coordinates: touching is allowed.
        events.sort_unstable();
        let mut states: HashMap<Vec<usize>, usize> = HashMap::from([(Vec::new(), 0)]);
        for (_, enter, i) in events {
            let mut next: HashMap<Vec<usize>, usize> = HashMap::new();
            for (set, v) in states {
                let mut push = |k: Vec<usize>, v: usize| {
                    let e = next.entry(k).or_insert(0);
                    *e = (*e).max(v);
                };
                if enter {
                    if set.iter().all(|&j| (rects[j].cy - rects[i].cy).abs() >= scale.unit()) {
                        let mut with = set.clone();
                        with.push(i);
                        with.sort_unstable();
                        push(with, v + 1);
                    }
                    push(set, v);
                } else {
                    push(set.into_iter().filter(|&j| j != i).collect(), v);
                }
            }
            states = next;
        }
        states[&Vec::new()]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn cut_branching_matches_sweep(
            v in proptest::collection::vec((0i64..400, 0i64..25, 5i64..25), 48..90)
        ) {
            let rects: Vec<Rect> = v
                .into_iter()
                .enumerate()
                .map(|(i, (x, y, w))| Rect::new(i as u64, x, y, w))
                .collect();
            let s = sc();
            let exact = exact_max_is(&s, &rects, ExactConfig::default()).unwrap();
            prop_assert_eq!(exact.size, sweep_max_is(&s, &rects));
            let set: HashSet<_> = exact.witness.iter().copied().collect();
            prop_assert!(verify_rects(&s, &rects, &set).independent);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]
        #[test]
        fn branch_and_reduce_matches_enumeration(rects in rects_strategy(21)) {
            let s = sc();
            let exact = exact_max_is(&s, &rects, ExactConfig::default()).unwrap();
            prop_assert_eq!(exact.size, brute_force_max_is(&s, &rects));
            let set: HashSet<_> = exact.witness.iter().copied().collect();
            prop_assert!(verify_rects(&s, &rects, &set).independent);
        }

        #[test]
        fn interval_greedy_matches_exact(spans in proptest::collection::vec((0i64..100, 1i64..40), 0..20)) {
            // An interval (2lo, 2lo+2w) on one line is the rectangle centered at
            // 2lo+w of width 2w, whose doubled extent is the same interval scaled by 2.
            let s = sc();
            let ivs: Vec<_> = spans.iter().enumerate().map(|(i, &(lo, w))| Interval::new(i as u64, 2 * lo, 2 * (lo + w))).collect();
            let rects: Vec<_> = spans.iter().enumerate().map(|(i, &(lo, w))| Rect::new(i as u64, 2 * lo + w, 0, 2 * w)).collect();
            prop_assert_eq!(exact_interval_mis(&ivs).size, brute_force_max_is(&s, &rects));
        }
    }
}
