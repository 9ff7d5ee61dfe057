#![allow(dead_code)]

use dynlabel::bench::gen::{generate, GenSpec, ModelKind};
use dynlabel::bench::trace::{make_trace, TraceModel, TraceSpec};
use dynlabel::bench::{Instance, Trace};

pub fn instance(model: ModelKind, n: usize, seed: u64) -> Instance {
    generate(&GenSpec::new(model, n, seed))
}

/// A trace whose insertions come from the instance's own generator.
pub fn trace(inst: &Instance, gen: ModelKind, gen_seed: u64, model: TraceModel, updates: usize, seed: u64) -> Trace {
    let spec = TraceSpec {
        model,
        updates,
        seed,
        source: GenSpec::new(gen, inst.labels.len(), gen_seed),
    };
    make_trace(inst, &spec).expect("feasible trace")
}

/// Instance and mixed trace from one seed.
pub fn workload(model: ModelKind, n: usize, updates: usize, seed: u64) -> (Instance, Trace) {
    let inst = instance(model, n, seed);
    let t = trace(&inst, model, seed, TraceModel::Mixed, updates, seed.wrapping_add(1_000));
    (inst, t)
}
