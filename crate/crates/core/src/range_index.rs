//! Fully dynamic 2D point index with open-box witness and reporting queries.
//!
//! The primary structure is a weight-balanced tree over `(x, id)`. Every
//! internal node keeps the `(y, id)` keys of its subtree in an ordered set, so a
//! query decomposes the x-range into `O(log n)` canonical subtrees and probes
//! each one with a y-range search. Small subtrees are flat leaves scanned
//! linearly. Updates touch one root-to-leaf path and rebuild the topmost
//! subtree that has fallen out of balance, which gives `O(log^2 n)` amortized
//! updates and `O(log^2 n + k)` queries.

use std::collections::{BTreeSet, HashMap};
use std::ops::Bound;

use crate::error::{Error, Result};
use crate::geometry::{Coord, LabelId, OpenBox};

const LEAF_CAP: usize = 16;
const ALPHA: f64 = 0.72;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pt {
    x: Coord,
    y: Coord,
    id: LabelId,
}

impl Pt {
    fn key(&self) -> (Coord, LabelId) {
        (self.x, self.id)
    }
}

type NodeIdx = u32;
type YBound = Bound<(Coord, LabelId)>;

#[derive(Clone, Debug)]
enum Node {
    Leaf(Vec<Pt>),
    Inner {
        split: (Coord, LabelId),
        left: NodeIdx,
        right: NodeIdx,
        size: usize,
        minx: Coord,
        maxx: Coord,
        ys: BTreeSet<(Coord, LabelId)>,
    },
    Free,
}

/// A point returned by a query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexedPoint {
    pub id: LabelId,
    pub x: Coord,
    pub y: Coord,
}

#[derive(Clone, Debug)]
pub struct RangeIndex {
    points: HashMap<LabelId, (Coord, Coord)>,
    nodes: Vec<Node>,
    free: Vec<NodeIdx>,
    root: NodeIdx,
}

impl Default for RangeIndex {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeIndex {
    pub fn new() -> Self {
        RangeIndex {
            points: HashMap::new(),
            nodes: vec![Node::Leaf(Vec::new())],
            free: Vec::new(),
            root: 0,
        }
    }

    /// Bulk construction; equivalent to inserting every point.
    pub fn from_points(points: impl IntoIterator<Item = (LabelId, Coord, Coord)>) -> Result<Self> {
        let mut idx = RangeIndex::new();
        let mut pts = Vec::new();
        for (id, x, y) in points {
            if idx.points.insert(id, (x, y)).is_some() {
                return Err(Error::DuplicateId(id));
            }
            pts.push(Pt { x, y, id });
        }
        pts.sort_unstable_by_key(Pt::key);
        idx.nodes.clear();
        let (root, _) = idx.build(&pts);
        idx.root = root;
        Ok(idx)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, id: LabelId) -> bool {
        self.points.contains_key(&id)
    }

    pub fn get(&self, id: LabelId) -> Option<(Coord, Coord)> {
        self.points.get(&id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = IndexedPoint> + '_ {
        self.points
            .iter()
            .map(|(&id, &(x, y))| IndexedPoint { id, x, y })
    }

    pub fn insert(&mut self, id: LabelId, x: Coord, y: Coord) -> Result<()> {
        if self.points.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.points.insert(id, (x, y));
        let p = Pt { x, y, id };
        let mut path = Vec::new();
        let mut cur = self.root;
        loop {
            path.push(cur);
            match &mut self.nodes[cur as usize] {
                Node::Leaf(pts) => {
                    pts.push(p);
                    break;
                }
                Node::Inner {
                    split,
                    left,
                    right,
                    size,
                    minx,
                    maxx,
                    ys,
                } => {
                    ys.insert((y, id));
                    *size += 1;
                    if *size == 1 {
                        *minx = x;
                        *maxx = x;
                    } else {
                        *minx = (*minx).min(x);
                        *maxx = (*maxx).max(x);
                    }
                    cur = if p.key() <= *split { *left } else { *right };
                }
                Node::Free => unreachable!("free node on search path"),
            }
        }
        self.rebalance(&path);
        Ok(())
    }

    pub fn delete(&mut self, id: LabelId) -> Result<()> {
        let (x, y) = self.points.remove(&id).ok_or(Error::UnknownId(id))?;
        let key = (x, id);
        let mut path = Vec::new();
        let mut cur = self.root;
        loop {
            path.push(cur);
            match &mut self.nodes[cur as usize] {
                Node::Leaf(pts) => {
                    let pos = pts
                        .iter()
                        .position(|p| p.id == id)
                        .expect("indexed point missing from its leaf");
                    pts.swap_remove(pos);
                    break;
                }
                Node::Inner {
                    split,
                    left,
                    right,
                    size,
                    ys,
                    ..
                } => {
                    let removed = ys.remove(&(y, id));
                    debug_assert!(removed);
                    *size -= 1;
                    cur = if key <= *split { *left } else { *right };
                }
                Node::Free => unreachable!("free node on search path"),
            }
        }
        // Extremes along the path may have been the deleted point.
        for &n in path.iter().rev() {
            self.refresh_extremes(n);
        }
        self.rebalance(&path);
        Ok(())
    }

    /// Some point strictly inside `b`, if any.
    pub fn witness(&self, b: &OpenBox) -> Option<IndexedPoint> {
        if b.is_empty() {
            return None;
        }
        self.witness_in(self.root, b)
    }

    /// Every point strictly inside `b`.
    pub fn report(&self, b: &OpenBox) -> Vec<IndexedPoint> {
        let mut out = Vec::new();
        if !b.is_empty() {
            self.report_in(self.root, b, &mut out);
        }
        out
    }

    /// Number of points strictly inside `b`.
    pub fn count(&self, b: &OpenBox) -> usize {
        self.report(b).len()
    }

    fn point(&self, id: LabelId) -> IndexedPoint {
        let (x, y) = self.points[&id];
        IndexedPoint { id, x, y }
    }

    fn y_range(b: &OpenBox) -> (YBound, YBound) {
        (
            Bound::Excluded((b.ymin, LabelId::MAX)),
            Bound::Excluded((b.ymax, LabelId::MIN)),
        )
    }

    fn witness_in(&self, n: NodeIdx, b: &OpenBox) -> Option<IndexedPoint> {
        match &self.nodes[n as usize] {
            Node::Leaf(pts) => pts.iter().find(|p| b.contains(p.x, p.y)).map(|p| IndexedPoint {
                id: p.id,
                x: p.x,
                y: p.y,
            }),
            Node::Inner {
                left,
                right,
                size,
                minx,
                maxx,
                ys,
                ..
            } => {
                if *size == 0 || *maxx <= b.xmin || *minx >= b.xmax {
                    return None;
                }
                if *minx > b.xmin && *maxx < b.xmax {
                    return ys
                        .range(Self::y_range(b))
                        .next()
                        .map(|&(_, id)| self.point(id));
                }
                self.witness_in(*left, b)
                    .or_else(|| self.witness_in(*right, b))
            }
            Node::Free => unreachable!(),
        }
    }

    fn report_in(&self, n: NodeIdx, b: &OpenBox, out: &mut Vec<IndexedPoint>) {
        match &self.nodes[n as usize] {
            Node::Leaf(pts) => out.extend(pts.iter().filter(|p| b.contains(p.x, p.y)).map(|p| {
                IndexedPoint {
                    id: p.id,
                    x: p.x,
                    y: p.y,
                }
            })),
            Node::Inner {
                left,
                right,
                size,
                minx,
                maxx,
                ys,
                ..
            } => {
                if *size == 0 || *maxx <= b.xmin || *minx >= b.xmax {
                    return;
                }
                if *minx > b.xmin && *maxx < b.xmax {
                    out.extend(ys.range(Self::y_range(b)).map(|&(_, id)| self.point(id)));
                    return;
                }
                self.report_in(*left, b, out);
                self.report_in(*right, b, out);
            }
            Node::Free => unreachable!(),
        }
    }

    fn size_of(&self, n: NodeIdx) -> usize {
        match &self.nodes[n as usize] {
            Node::Leaf(pts) => pts.len(),
            Node::Inner { size, .. } => *size,
            Node::Free => 0,
        }
    }

    fn extremes_of(&self, n: NodeIdx) -> Option<(Coord, Coord)> {
        match &self.nodes[n as usize] {
            Node::Leaf(pts) => {
                let lo = pts.iter().map(|p| p.x).min()?;
                let hi = pts.iter().map(|p| p.x).max()?;
                Some((lo, hi))
            }
            Node::Inner {
                size, minx, maxx, ..
            } => (*size > 0).then_some((*minx, *maxx)),
            Node::Free => None,
        }
    }

    fn refresh_extremes(&mut self, n: NodeIdx) {
        let (l, r) = match &self.nodes[n as usize] {
            Node::Inner { left, right, .. } => (*left, *right),
            _ => return,
        };
        let ext = match (self.extremes_of(l), self.extremes_of(r)) {
            (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
            (a, b) => a.or(b),
        };
        if let (Node::Inner { minx, maxx, .. }, Some((lo, hi))) = (&mut self.nodes[n as usize], ext)
        {
            *minx = lo;
            *maxx = hi;
        }
    }

    fn needs_rebuild(&self, n: NodeIdx) -> bool {
        match &self.nodes[n as usize] {
            Node::Leaf(pts) => pts.len() > 2 * LEAF_CAP,
            Node::Inner {
                left, right, size, ..
            } => {
                if *size <= LEAF_CAP {
                    return true;
                }
                let heavy = self.size_of(*left).max(self.size_of(*right));
                (heavy + 1) as f64 > ALPHA * (*size + 2) as f64
            }
            Node::Free => false,
        }
    }

    fn rebalance(&mut self, path: &[NodeIdx]) {
        if let Some(&n) = path.iter().find(|&&n| self.needs_rebuild(n)) {
            self.rebuild(n);
        }
    }

    fn collect(&mut self, n: NodeIdx, out: &mut Vec<Pt>) {
        match std::mem::replace(&mut self.nodes[n as usize], Node::Free) {
            Node::Leaf(pts) => out.extend(pts),
            Node::Inner { left, right, .. } => {
                self.collect(left, out);
                self.collect(right, out);
            }
            Node::Free => {}
        }
        self.free.push(n);
    }

    fn rebuild(&mut self, n: NodeIdx) {
        let mut pts = Vec::with_capacity(self.size_of(n));
        self.collect(n, &mut pts);
        // `collect` released `n`; reclaim that slot for the new subtree root.
        let pos = self.free.iter().rposition(|&f| f == n).expect("slot released");
        self.free.swap_remove(pos);
        pts.sort_unstable_by_key(Pt::key);
        let node = self.build_node(&pts).0;
        self.nodes[n as usize] = node;
    }

    fn alloc(&mut self, node: Node) -> NodeIdx {
        match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as NodeIdx
            }
        }
    }

    /// Builds a subtree over x-sorted points, returning its index and the
    /// `(y, id)` keys in y-order.
    fn build(&mut self, pts: &[Pt]) -> (NodeIdx, Vec<(Coord, LabelId)>) {
        let (node, ys) = self.build_node(pts);
        (self.alloc(node), ys)
    }

    fn build_node(&mut self, pts: &[Pt]) -> (Node, Vec<(Coord, LabelId)>) {
        if pts.len() <= LEAF_CAP {
            let mut ys: Vec<_> = pts.iter().map(|p| (p.y, p.id)).collect();
            ys.sort_unstable();
            return (Node::Leaf(pts.to_vec()), ys);
        }
        let mid = pts.len() / 2;
        let (left, ly) = self.build(&pts[..mid]);
        let (right, ry) = self.build(&pts[mid..]);
        let merged = merge_sorted(ly, ry);
        let node = Node::Inner {
            split: pts[mid - 1].key(),
            left,
            right,
            size: pts.len(),
            minx: pts[0].x,
            maxx: pts[pts.len() - 1].x,
            ys: merged.iter().copied().collect(),
        };
        (node, merged)
    }

    /// Structural self-check used by tests: subtree sizes, secondary key sets,
    /// routing keys and x-extremes all agree with the stored points.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut seen = Vec::new();
        self.check_node(self.root, None, None, &mut seen)?;
        if seen.len() != self.points.len() {
            return Err(format!(
                "tree holds {} points, map holds {}",
                seen.len(),
                self.points.len()
            ));
        }
        for p in &seen {
            if self.points.get(&p.id) != Some(&(p.x, p.y)) {
                return Err(format!("point {} disagrees with the id map", p.id));
            }
        }
        Ok(())
    }

    fn check_node(
        &self,
        n: NodeIdx,
        lo: Option<(Coord, LabelId)>,
        hi: Option<(Coord, LabelId)>,
        out: &mut Vec<Pt>,
    ) -> std::result::Result<(), String> {
        let start = out.len();
        match &self.nodes[n as usize] {
            Node::Leaf(pts) => out.extend(pts.iter().copied()),
            Node::Inner {
                split,
                left,
                right,
                size,
                minx,
                maxx,
                ys,
            } => {
                self.check_node(*left, lo, Some(*split), out)?;
                self.check_node(*right, Some(*split), hi, out)?;
                let sub = &out[start..];
                if sub.len() != *size {
                    return Err(format!("node size {} but subtree has {}", size, sub.len()));
                }
                let mut expect: Vec<_> = sub.iter().map(|p| (p.y, p.id)).collect();
                expect.sort_unstable();
                if !ys.iter().copied().eq(expect) {
                    return Err("secondary key set out of sync".into());
                }
                if *size > 0 {
                    let lo_x = sub.iter().map(|p| p.x).min().unwrap();
                    let hi_x = sub.iter().map(|p| p.x).max().unwrap();
                    if (lo_x, hi_x) != (*minx, *maxx) {
                        return Err("stale x-extremes".into());
                    }
                }
            }
            Node::Free => return Err("reachable free node".into()),
        }
        for p in &out[start..] {
            if lo.is_some_and(|l| p.key() <= l) || hi.is_some_and(|h| p.key() > h) {
                return Err(format!("point {} routed to the wrong side", p.id));
            }
        }
        Ok(())
    }
}

fn merge_sorted<T: Ord + Copy>(a: Vec<T>, b: Vec<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ids(mut v: Vec<IndexedPoint>) -> Vec<u64> {
        v.sort();
        v.into_iter().map(|p| p.id.0).collect()
    }

    #[test]
    fn insert_and_report() {
        let mut idx = RangeIndex::new();
        idx.insert(LabelId(1), 10, 10).unwrap();
        idx.insert(LabelId(2), 20, 30).unwrap();
        assert_eq!(ids(idx.report(&OpenBox::new(0, 15, 0, 15))), vec![1]);
        assert!(matches!(
            idx.insert(LabelId(1), 10, 10),
            Err(Error::DuplicateId(LabelId(1)))
        ));
    }

    #[test]
    fn insert_delete_leaves_nothing() {
        let mut idx = RangeIndex::new();
        idx.insert(LabelId(1), 10, 10).unwrap();
        idx.delete(LabelId(1)).unwrap();
        assert!(idx.is_empty());
        assert!(idx.witness(&OpenBox::new(-1000, 1000, -1000, 1000)).is_none());
        assert!(matches!(idx.delete(LabelId(99)), Err(Error::UnknownId(LabelId(99)))));
    }

    #[test]
    fn delete_keeps_others() {
        let mut idx = RangeIndex::new();
        idx.insert(LabelId(1), 10, 10).unwrap();
        idx.insert(LabelId(2), 50, 50).unwrap();
        idx.delete(LabelId(1)).unwrap();
        assert_eq!(ids(idx.report(&OpenBox::new(0, 100, 0, 100))), vec![2]);
    }

    #[test]
    fn witness_respects_openness() {
        let mut idx = RangeIndex::new();
        idx.insert(LabelId(1), 10, 10).unwrap();
        assert_eq!(
            idx.witness(&OpenBox::new(0, 20, 0, 20)).map(|p| p.id),
            Some(LabelId(1))
        );
        assert!(idx.witness(&OpenBox::new(10, 20, 10, 20)).is_none());
        idx.insert(LabelId(2), 15, 15).unwrap();
        let w = idx.witness(&OpenBox::new(0, 20, 0, 20)).unwrap();
        assert!(w.id == LabelId(1) || w.id == LabelId(2));
    }

    #[test]
    fn report_four_corners_and_empty() {
        let mut idx = RangeIndex::new();
        assert!(idx.report(&OpenBox::new(-10, 10, -10, 10)).is_empty());
        for (i, (x, y)) in [(-9, -9), (-9, 9), (9, -9), (9, 9)].into_iter().enumerate() {
            idx.insert(LabelId(i as u64), x, y).unwrap();
        }
        assert_eq!(idx.report(&OpenBox::new(-10, 10, -10, 10)).len(), 4);
    }

    #[test]
    fn twelve_independent_centers_in_annulus() {
        // S = 10: a pairwise independent packing of the annulus between the 2S
        // and 4S boxes around the origin, checked against a brute-force scan.
        let s = crate::geometry::Scale::new(1).unwrap();
        let mut centers = Vec::new();
        for x in [-19, -9, 1, 11] {
            centers.push((x, 19));
            centers.push((x + 8, -19));
        }
        centers.extend([(-19, -5), (-19, 5), (19, -5), (19, 5)]);
        let squares: Vec<_> = centers
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| crate::geometry::Square::new(i as u64, x, y))
            .collect();
        for a in &squares {
            for b in &squares {
                if a.id != b.id {
                    assert!(!s.intersects(a, b), "{a:?} {b:?}");
                }
            }
        }
        let origin = crate::geometry::Square::new(100, 0, 0);
        let near = s.scaled_box(&origin, crate::geometry::Neighborhood::Near);
        let far = s.scaled_box(&origin, crate::geometry::Neighborhood::Far);
        assert!(squares
            .iter()
            .all(|q| far.contains(q.cx, q.cy) && !near.contains(q.cx, q.cy)));
        let idx =
            RangeIndex::from_points(squares.iter().map(|q| (q.id, q.cx, q.cy))).unwrap();
        assert_eq!(idx.report(&far).len(), 12);
    }

    #[test]
    fn replay_matches_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut idx = RangeIndex::new();
        let mut live: Vec<u64> = Vec::new();
        let mut next = 0u64;
        for step in 0..10_000 {
            if live.is_empty() || rng.random_bool(0.55) {
                let (x, y) = (rng.random_range(0..500), rng.random_range(0..500));
                idx.insert(LabelId(next), x, y).unwrap();
                live.push(next);
                next += 1;
            } else {
                let i = rng.random_range(0..live.len());
                idx.delete(LabelId(live.swap_remove(i))).unwrap();
            }
            if step % 997 == 0 {
                idx.check_invariants().unwrap();
            }
        }
        idx.check_invariants().unwrap();
        assert_eq!(idx.len(), live.len());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn queries_match_linear_scan(
            pts in proptest::collection::vec((0i64..200, 0i64..200), 0..2000),
            boxes in proptest::collection::vec((0i64..200, 0i64..200, 0i64..200, 0i64..200), 1..20),
            deletions in 0usize..500,
        ) {
            let mut idx = RangeIndex::from_points(
                pts.iter().enumerate().map(|(i, &(x, y))| (LabelId(i as u64), x, y))).unwrap();
            let removed = deletions.min(pts.len());
            for i in 0..removed {
                idx.delete(LabelId((i * 7 % pts.len().max(1)) as u64)).ok();
            }
            idx.check_invariants().unwrap();
            for (a, b, c, d) in boxes {
                let bx = OpenBox::new(a.min(b), a.max(b), c.min(d), c.max(d));
                let mut expect: Vec<u64> = idx.iter().filter(|p| bx.contains(p.x, p.y)).map(|p| p.id.0).collect();
                expect.sort();
                prop_assert_eq!(ids(idx.report(&bx)), expect.clone());
                match idx.witness(&bx) {
                    Some(w) => prop_assert!(expect.contains(&w.id.0)),
                    None => prop_assert!(expect.is_empty()),
                }
            }
        }
    }
}
