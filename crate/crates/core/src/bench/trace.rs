//! Update traces over an instance.

use rand::Rng;

use crate::bench::format::{Event, Instance, Trace};
use crate::bench::gen::{GenSpec, ModelKind, Sampler};
use crate::error::{Error, Result};
use crate::geometry::LabelId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceModel {
    InsertionOnly,
    DeletionOnly,
    Mixed,
}

impl std::str::FromStr for TraceModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "insertion-only" | "insert" => Ok(TraceModel::InsertionOnly),
            "deletion-only" | "delete" => Ok(TraceModel::DeletionOnly),
            "mixed" => Ok(TraceModel::Mixed),
            _ => Err(format!(
                "unknown trace model {s:?} (expected insertion-only, deletion-only or mixed)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSpec {
    pub model: TraceModel,
    pub updates: usize,
    pub seed: u64,
    /// Model and seed of the generator that produced the instance; fresh
    /// insertions are sampled from it.
    pub source: GenSpec,
}

/// Builds a trace. Insertions draw fresh labels from the instance's
/// generative model with ids continuing after the largest id seen so far;
/// deletions pick a live id uniformly. In a mixed trace each step is an
/// insertion or a deletion with equal probability, and a deletion drawn
/// while nothing is live becomes an insertion.
pub fn make_trace(inst: &Instance, spec: &TraceSpec) -> Result<Trace> {
    if spec.model == TraceModel::DeletionOnly && spec.updates > inst.labels.len() {
        return Err(Error::InfeasibleTrace(format!(
            "{} deletions requested from {} labels",
            spec.updates,
            inst.labels.len()
        )));
    }
    let mut source = spec.source;
    source.scale = inst.scale;
    let mut sampler = Sampler::new(&source);
    sampler.reseed(spec.seed);
    let mut live: Vec<LabelId> = inst.labels.iter().map(|r| r.id).collect();
    live.sort_unstable();
    let mut next_id = inst.max_id().map_or(0, |m| m.0 + 1);
    let mut trace = Trace::default();
    for _ in 0..spec.updates {
        let delete = match spec.model {
            TraceModel::InsertionOnly => false,
            TraceModel::DeletionOnly => true,
            TraceModel::Mixed => sampler.rng().random_bool(0.5) && !live.is_empty(),
        };
        if delete {
            let i = sampler.rng().random_range(0..live.len());
            trace.events.push(Event::Delete(live.swap_remove(i)));
        } else {
            let r = match source.model {
                ModelKind::Uniform => sampler.label(next_id, 0),
                ModelKind::Gaussian => sampler.random_label(next_id),
            };
            live.push(r.id);
            next_id += 1;
            trace.events.push(Event::Insert(r));
        }
    }
    Ok(trace)
}

/// Live label count after replaying `trace` on `inst`.
pub fn final_live_count(inst: &Instance, trace: &Trace) -> usize {
    trace.events.iter().fold(inst.labels.len(), |n, e| match e {
        Event::Insert(_) => n + 1,
        Event::Delete(_) => n - 1,
    })
}
