//! A uniform face over every algorithm, used by the runner, the verifier and
//! the foreign-function layer.

use std::collections::HashSet;
use std::fmt;

use crate::algo::grid::{GridFrame, GridState, GridStorage};
use crate::algo::line::LineState;
use crate::algo::mis_graph::GraphMisState;
use crate::algo::mis_ors::{MisOrsState, RepairStats};
use crate::algo::shifting::ShiftState;
use crate::augment::{AugmentBase, AugmentPolicy, AugmentedState};
use crate::bench::format::Mode;
use crate::error::{Error, Result};
use crate::geometry::{LabelId, Rect, Scale, Square};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algo {
    MisOrs,
    MisGraph,
    Grid,
    GridK(usize),
    Line,
    GGrid,
    GGridK(usize),
    GLine,
}

impl Algo {
    pub const NAMES: [&'static str; 8] = [
        "mis-ors", "mis-graph", "grid", "grid-k", "line", "g-grid", "g-grid-k", "g-line",
    ];

    /// Parses an algorithm name; `grid-k` and `g-grid-k` take `k`, and the
    /// forms `grid-4` and `g-grid-4` carry it inline.
    pub fn parse(name: &str, k: usize) -> Result<Algo> {
        let algo = match name {
            "mis-ors" => Algo::MisOrs,
            "mis-graph" => Algo::MisGraph,
            "grid" => Algo::Grid,
            "grid-k" => Algo::GridK(k),
            "line" => Algo::Line,
            "g-grid" => Algo::GGrid,
            "g-grid-k" => Algo::GGridK(k),
            "g-line" => Algo::GLine,
            other => {
                let (aug, rest) = match other.strip_prefix("g-") {
                    Some(r) => (true, r),
                    None => (false, other),
                };
                let k: usize = rest
                    .strip_prefix("grid-")
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| Error::UnknownAlgo(name.to_string()))?;
                if aug {
                    Algo::GGridK(k)
                } else {
                    Algo::GridK(k)
                }
            }
        };
        match algo {
            Algo::GridK(0) | Algo::GGridK(0) => Err(Error::InvalidShift),
            a => Ok(a),
        }
    }

    pub fn is_maximal(&self) -> bool {
        matches!(self, Algo::MisOrs | Algo::MisGraph)
    }

    pub fn is_augmented(&self) -> bool {
        matches!(self, Algo::GGrid | Algo::GGridK(_) | Algo::GLine)
    }

    pub fn supports(&self, mode: Mode) -> bool {
        mode == Mode::Squares || matches!(self, Algo::Line | Algo::GLine)
    }

    pub fn needs_frame(&self) -> bool {
        matches!(self, Algo::Grid | Algo::GGrid)
    }

    /// Guaranteed fraction of the optimum; maximal sets of unit squares
    /// are within a factor 4.
    pub fn ratio_bound(&self) -> f64 {
        match self {
            Algo::MisOrs | Algo::MisGraph | Algo::Grid | Algo::GGrid => 0.25,
            Algo::GridK(k) | Algo::GGridK(k) => *k as f64 / (2.0 * (*k as f64 + 1.0)),
            Algo::Line | Algo::GLine => 0.5,
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algo::MisOrs => f.write_str("mis-ors"),
            Algo::MisGraph => f.write_str("mis-graph"),
            Algo::Grid => f.write_str("grid"),
            Algo::GridK(k) => write!(f, "grid-{k}"),
            Algo::Line => f.write_str("line"),
            Algo::GGrid => f.write_str("g-grid"),
            Algo::GGridK(k) => write!(f, "g-grid-{k}"),
            Algo::GLine => f.write_str("g-line"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub algo: Algo,
    pub scale: Scale,
    pub mode: Mode,
    pub augment: AugmentPolicy,
    pub storage: GridStorage,
    /// Grid frame; required by the grid variants.
    pub frame: Option<GridFrame>,
}

impl SolverConfig {
    pub fn new(algo: Algo, scale: Scale) -> Self {
        SolverConfig {
            algo,
            scale,
            mode: Mode::Squares,
            augment: AugmentPolicy::Local,
            storage: GridStorage::Hashed,
            frame: None,
        }
    }
}

pub trait DynamicSolver {
    fn algo(&self) -> Algo;
    fn insert(&mut self, r: Rect) -> Result<()>;
    fn delete(&mut self, id: LabelId) -> Result<()>;
    fn size(&self) -> usize;
    fn solution(&self) -> Vec<LabelId>;
    /// Module-specific invariants, including greedy-equivalence and the
    /// structural bounds of the last update.
    fn check(&self) -> std::result::Result<(), String>;
    fn repair_stats(&self) -> Option<RepairStats> {
        None
    }
}

fn squares_of(scale: &Scale, labels: &[Rect]) -> Result<Vec<Square>> {
    labels.iter().map(|r| square(scale, r)).collect()
}

fn square(scale: &Scale, r: &Rect) -> Result<Square> {
    r.as_square(scale).ok_or(Error::NotASquare {
        id: r.id,
        width: r.width,
    })
}

/// Builds a solver over the initial `labels`.
pub fn build_solver(cfg: &SolverConfig, labels: &[Rect]) -> Result<Box<dyn DynamicSolver>> {
    let algo = cfg.algo;
    if !algo.supports(cfg.mode) {
        return Err(Error::UnsupportedMode {
            algo: algo.to_string(),
            mode: cfg.mode.as_str(),
        });
    }
    let s = cfg.scale;
    let grid = |labels: &[Rect]| -> Result<GridState> {
        let squares = squares_of(&s, labels)?;
        let frame = cfg
            .frame
            .unwrap_or_else(|| GridFrame::covering(&s, &squares, 1));
        GridState::build(s, frame, cfg.storage, &squares)
    };
    Ok(match algo {
        Algo::MisOrs => Box::new(MisOrs(MisOrsState::build(s, &squares_of(&s, labels)?)?)),
        Algo::MisGraph => Box::new(MisGraph(GraphMisState::build(s, &squares_of(&s, labels)?)?)),
        Algo::Grid => Box::new(Plain(algo, grid(labels)?)),
        Algo::GridK(k) => Box::new(Plain(algo, ShiftState::build(s, k, &squares_of(&s, labels)?)?)),
        Algo::Line => Box::new(Plain(algo, LineState::build(s, labels)?)),
        Algo::GGrid => Box::new(Augmented(algo, AugmentedState::new(grid(labels)?, cfg.augment)?)),
        Algo::GGridK(k) => Box::new(Augmented(
            algo,
            AugmentedState::new(ShiftState::build(s, k, &squares_of(&s, labels)?)?, cfg.augment)?,
        )),
        Algo::GLine => Box::new(Augmented(
            algo,
            AugmentedState::new(LineState::build(s, labels)?, cfg.augment)?,
        )),
    })
}

struct MisOrs(MisOrsState);

impl DynamicSolver for MisOrs {
    fn algo(&self) -> Algo {
        Algo::MisOrs
    }
    fn insert(&mut self, r: Rect) -> Result<()> {
        let sq = square(&self.0.scale(), &r)?;
        self.0.insert(sq).map(|_| ())
    }
    fn delete(&mut self, id: LabelId) -> Result<()> {
        self.0.delete(id).map(|_| ())
    }
    fn size(&self) -> usize {
        self.0.size()
    }
    fn solution(&self) -> Vec<LabelId> {
        self.0.solution().into_iter().collect()
    }
    fn check(&self) -> std::result::Result<(), String> {
        self.0.check_invariants()?;
        self.0.stats().within_bounds()
    }
    fn repair_stats(&self) -> Option<RepairStats> {
        Some(self.0.stats().clone())
    }
}

struct MisGraph(GraphMisState);

impl DynamicSolver for MisGraph {
    fn algo(&self) -> Algo {
        Algo::MisGraph
    }
    fn insert(&mut self, r: Rect) -> Result<()> {
        let sq = square(&self.0.scale(), &r)?;
        self.0.insert(sq).map(|_| ())
    }
    fn delete(&mut self, id: LabelId) -> Result<()> {
        self.0.delete(id).map(|_| ())
    }
    fn size(&self) -> usize {
        self.0.size()
    }
    fn solution(&self) -> Vec<LabelId> {
        self.0.solution().into_iter().collect()
    }
    fn check(&self) -> std::result::Result<(), String> {
        self.0.check_invariants()
    }
}

/// Plain approximate solvers share the augmentation base interface.
struct Plain<B>(Algo, B);

trait Checked {
    fn check_invariants(&self) -> std::result::Result<(), String>;
}

impl Checked for GridState {
    fn check_invariants(&self) -> std::result::Result<(), String> {
        GridState::check_invariants(self)
    }
}

impl Checked for ShiftState {
    fn check_invariants(&self) -> std::result::Result<(), String> {
        ShiftState::check_invariants(self)
    }
}

impl Checked for LineState {
    fn check_invariants(&self) -> std::result::Result<(), String> {
        LineState::check_invariants(self)
    }
}

impl<B: AugmentBase + Checked> DynamicSolver for Plain<B> {
    fn algo(&self) -> Algo {
        self.0
    }
    fn insert(&mut self, r: Rect) -> Result<()> {
        self.1.insert_rect(r)
    }
    fn delete(&mut self, id: LabelId) -> Result<()> {
        self.1.delete_label(id)
    }
    fn size(&self) -> usize {
        self.1.base_size()
    }
    fn solution(&self) -> Vec<LabelId> {
        self.1.base_solution()
    }
    fn check(&self) -> std::result::Result<(), String> {
        self.1.check_invariants()
    }
}

struct Augmented<B>(Algo, AugmentedState<B>);

impl<B: AugmentBase + Checked> DynamicSolver for Augmented<B> {
    fn algo(&self) -> Algo {
        self.0
    }
    fn insert(&mut self, r: Rect) -> Result<()> {
        self.1.insert(r).map(|_| ())
    }
    fn delete(&mut self, id: LabelId) -> Result<()> {
        self.1.delete(id).map(|_| ())
    }
    fn size(&self) -> usize {
        self.1.size()
    }
    fn solution(&self) -> Vec<LabelId> {
        self.1.solution()
    }
    fn check(&self) -> std::result::Result<(), String> {
        self.1.base().check_invariants()?;
        self.1.check_invariants()?;
        if self.1.size() < self.1.base().base_size() {
            return Err("augmented output smaller than its base".into());
        }
        Ok(())
    }
}

/// Set view of a solver's answer.
pub fn solution_set(solver: &dyn DynamicSolver) -> HashSet<LabelId> {
    solver.solution().into_iter().collect()
}
