//! Dynamic maximal independent set of unit squares backed by two range
//! indexes: one over all centers, one over the centers of the current
//! solution.
//!
//! An insertion probes the solution index with the `2S` box of the new square
//! (at most four centers can lie there). Deleting a solution member collects
//! the solution squares of its 2-neighborhood from the `4S` box (at most 12),
//! cuts their `2S` boxes out of the deleted square's `2S` box and refills the
//! remaining region one witness query at a time. At most four squares are
//! added per deletion.

use std::collections::{HashMap, HashSet};

use crate::algo::region::{LatticeBox, RepairRegion};
use crate::algo::Diff;
use crate::error::{Error, Result};
use crate::geometry::{LabelId, Neighborhood, Scale, Square};
use crate::range_index::RangeIndex;

pub const MAX_INSERT_BLOCKERS: usize = 4;
pub const MAX_QX: usize = 12;
pub const MAX_CORNERS: usize = 28;
pub const MAX_ADDITIONS: usize = 4;

/// What one deletion repair looked like.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeletionRepair {
    pub qx: Vec<LabelId>,
    pub corners: usize,
    pub slabs: usize,
    pub additions: Vec<LabelId>,
}

/// Worst cases observed over the lifetime of a state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RepairStats {
    pub insert_probes: u64,
    pub max_insert_blockers: usize,
    pub repairs: u64,
    pub max_qx: usize,
    pub max_corners: usize,
    pub max_slabs: usize,
    pub max_additions: usize,
}

impl RepairStats {
    fn record(&mut self, r: &DeletionRepair) {
        self.repairs += 1;
        self.max_qx = self.max_qx.max(r.qx.len());
        self.max_corners = self.max_corners.max(r.corners);
        self.max_slabs = self.max_slabs.max(r.slabs);
        self.max_additions = self.max_additions.max(r.additions.len());
    }

    /// Checks the packing bounds. Every field is also asserted as it is
    /// recorded; this is the report form.
    pub fn within_bounds(&self) -> std::result::Result<(), String> {
        if self.max_insert_blockers > MAX_INSERT_BLOCKERS {
            return Err(format!("insert probe returned {}", self.max_insert_blockers));
        }
        if self.max_qx > MAX_QX {
            return Err(format!("|Q_x| reached {}", self.max_qx));
        }
        if self.max_corners > MAX_CORNERS {
            return Err(format!("repair region had {} corners", self.max_corners));
        }
        if self.max_additions > MAX_ADDITIONS {
            return Err(format!("deletion added {} squares", self.max_additions));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct MisOrsState {
    scale: Scale,
    all: RangeIndex,
    sol: RangeIndex,
    members: HashSet<LabelId>,
    squares: HashMap<LabelId, Square>,
    stats: RepairStats,
    last_repair: Option<DeletionRepair>,
}

impl MisOrsState {
    pub fn new(scale: Scale) -> Self {
        MisOrsState {
            scale,
            all: RangeIndex::new(),
            sol: RangeIndex::new(),
            members: HashSet::new(),
            squares: HashMap::new(),
            stats: RepairStats::default(),
            last_repair: None,
        }
    }

    /// Greedy maximal independent set in ascending id order.
    pub fn build(scale: Scale, squares: &[Square]) -> Result<Self> {
        let mut st = MisOrsState::new(scale);
        st.all = RangeIndex::from_points(squares.iter().map(|s| (s.id, s.cx, s.cy)))?;
        let mut order: Vec<&Square> = squares.iter().collect();
        order.sort_unstable_by_key(|s| s.id);
        for s in order {
            st.squares.insert(s.id, *s);
            let near = scale.scaled_box(s, Neighborhood::Near);
            if st.sol.witness(&near).is_none() {
                st.sol.insert(s.id, s.cx, s.cy)?;
                st.members.insert(s.id);
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

    pub fn contains(&self, id: LabelId) -> bool {
        self.squares.contains_key(&id)
    }

    pub fn is_member(&self, id: LabelId) -> bool {
        self.members.contains(&id)
    }

    pub fn solution(&self) -> HashSet<LabelId> {
        self.members.clone()
    }

    pub fn squares(&self) -> impl Iterator<Item = &Square> + '_ {
        self.squares.values()
    }

    pub fn stats(&self) -> &RepairStats {
        &self.stats
    }

    pub fn last_repair(&self) -> Option<&DeletionRepair> {
        self.last_repair.as_ref()
    }

    pub fn insert(&mut self, s: Square) -> Result<Diff> {
        if self.squares.contains_key(&s.id) {
            return Err(Error::DuplicateId(s.id));
        }
        self.all.insert(s.id, s.cx, s.cy)?;
        self.squares.insert(s.id, s);
        let near = self.scale.scaled_box(&s, Neighborhood::Near);
        let blockers = self.sol.report(&near).len();
        self.stats.insert_probes += 1;
        self.stats.max_insert_blockers = self.stats.max_insert_blockers.max(blockers);
        assert!(
            blockers <= MAX_INSERT_BLOCKERS,
            "{blockers} solution centers inside a 2S box"
        );
        let mut diff = Diff::default();
        if blockers == 0 {
            self.sol.insert(s.id, s.cx, s.cy)?;
            self.members.insert(s.id);
            diff.added.push(s.id);
        }
        Ok(diff)
    }

    pub fn delete(&mut self, id: LabelId) -> Result<Diff> {
        let x = self.squares.remove(&id).ok_or(Error::UnknownId(id))?;
        self.all.delete(id)?;
        if !self.members.remove(&id) {
            return Ok(Diff::default());
        }
        self.sol.delete(id)?;
        let repair = self.repair_around(&x)?;
        let diff = Diff {
            added: repair.additions.clone(),
            removed: vec![id],
        };
        self.stats.record(&repair);
        self.last_repair = Some(repair);
        Ok(diff)
    }

    fn repair_around(&mut self, x: &Square) -> Result<DeletionRepair> {
        let scale = self.scale;
        let qx = self.sol.report(&scale.scaled_box(x, Neighborhood::Far));
        assert!(qx.len() <= MAX_QX, "|Q_x| = {} exceeds the packing bound", qx.len());
        let near = scale.scaled_box(x, Neighborhood::Near);
        let base = LatticeBox::from_open(&near).expect("2S box holds lattice points");
        let mut region = RepairRegion::new(base);
        for y in &qx {
            region.subtract(&scale.scaled_box(&Square::new(y.id, y.x, y.y), Neighborhood::Near));
        }
        let corners = region.corner_count();
        assert!(corners <= MAX_CORNERS, "repair region has {corners} corners");

        let mut additions = Vec::new();
        let mut max_slabs = 0;
        loop {
            let slabs = region.slabs();
            max_slabs = max_slabs.max(slabs.len());
            let found = slabs
                .iter()
                .find_map(|slab| self.all.witness(&slab.to_open()));
            let Some(p) = found else { break };
            debug_assert!(!self.members.contains(&p.id));
            let ps = Square::new(p.id, p.x, p.y);
            self.sol.insert(p.id, p.x, p.y)?;
            self.members.insert(p.id);
            region.subtract(&scale.scaled_box(&ps, Neighborhood::Near));
            additions.push(p.id);
        }
        assert!(
            additions.len() <= MAX_ADDITIONS,
            "deletion repair added {} squares",
            additions.len()
        );
        Ok(DeletionRepair {
            qx: qx.into_iter().map(|p| p.id).collect(),
            corners,
            slabs: max_slabs,
            additions,
        })
    }

    /// Cross-checks both indexes against the square map and the member set.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.all.len() != self.squares.len() || self.sol.len() != self.members.len() {
            return Err("index sizes disagree with the stored sets".into());
        }
        for m in &self.members {
            let s = self.squares.get(m).ok_or("member not stored")?;
            if self.sol.get(*m) != Some((s.cx, s.cy)) {
                return Err(format!("member {m} missing from the solution index"));
            }
        }
        self.stats.within_bounds()
    }
}
