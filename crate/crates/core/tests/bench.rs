mod common;

use dynlabel::algo::grid::GridStorage;
use dynlabel::augment::AugmentPolicy;
use dynlabel::bench::gen::{generate, GenSpec, ModelKind};
use dynlabel::bench::run::{run, RunOptions};
use dynlabel::bench::trace::{make_trace, TraceModel, TraceSpec};
use dynlabel::bench::verify::{verify, verify_with, VerifyOptions};
use dynlabel::bench::{build_solver, Algo, DynamicSolver, Event, Mode, SolverConfig, Trace};
use dynlabel::{Error, LabelId, Rect, Result};

use common::workload;

const ALL: [Algo; 10] = [
    Algo::MisOrs,
    Algo::MisGraph,
    Algo::Grid,
    Algo::GridK(2),
    Algo::GridK(4),
    Algo::Line,
    Algo::GGrid,
    Algo::GGridK(2),
    Algo::GGridK(4),
    Algo::GLine,
];

#[test]
fn run_sizes_equal_verify_sizes() {
    for model in [ModelKind::Uniform, ModelKind::Gaussian] {
        let (inst, trace) = workload(model, 150, 200, 21);
        for algo in ALL {
            let cfg = SolverConfig::new(algo, inst.scale);
            let r = run(&inst, &trace, &cfg, &RunOptions::default()).unwrap();
            let v = verify(&inst, &trace, &cfg, &VerifyOptions::default()).unwrap();
            assert!(v.is_ok(), "{algo}: {v}");
            assert_eq!(r.sizes(), v.sizes, "{algo}");
            assert_eq!(r.records.len(), 200);
        }
    }
}

#[test]
fn full_augmentation_and_dense_grid_verify() {
    let (inst, trace) = workload(ModelKind::Gaussian, 120, 150, 5);
    for algo in [Algo::GGrid, Algo::GGridK(3), Algo::GLine] {
        let mut cfg = SolverConfig::new(algo, inst.scale);
        cfg.augment = AugmentPolicy::Full;
        cfg.storage = GridStorage::Dense;
        let v = verify(&inst, &trace, &cfg, &VerifyOptions::default()).unwrap();
        assert!(v.is_ok(), "{algo}: {v}");
    }
}

#[test]
fn mis_ors_long_mixed_trace_with_oracle() {
    let (inst, trace) = workload(ModelKind::Uniform, 200, 500, 8);
    let cfg = SolverConfig::new(Algo::MisOrs, inst.scale);
    let v = verify(&inst, &trace, &cfg, &VerifyOptions { opt_cap: 300 }).unwrap();
    assert!(v.is_ok(), "{v}");
    assert_eq!(v.to_string(), "OK, 500 steps");
    assert_eq!(v.opt_checks, 501);
}

#[test]
fn ratio_column_lies_in_unit_interval() {
    let (inst, trace) = workload(ModelKind::Gaussian, 100, 60, 2);
    let opts = RunOptions {
        with_opt: true,
        ..RunOptions::default()
    };
    for algo in ALL {
        let out = run(&inst, &trace, &SolverConfig::new(algo, inst.scale), &opts).unwrap();
        for r in &out.records {
            let ratio = r.ratio.unwrap();
            assert!(ratio > 0.0 && ratio <= 1.0, "{algo} step {}: {ratio}", r.step);
            assert!(r.opt_size.unwrap() >= r.solution_size);
        }
    }
}

#[test]
fn with_opt_over_the_cap_fails() {
    let (inst, trace) = workload(ModelKind::Uniform, 50, 5, 1);
    let opts = RunOptions {
        with_opt: true,
        opt_cap: 10,
        ..RunOptions::default()
    };
    let err = run(&inst, &trace, &SolverConfig::new(Algo::Line, inst.scale), &opts).unwrap_err();
    assert!(matches!(err, Error::CapExceeded { cap: 10, .. }));
}

#[test]
fn rectangles_run_on_line_solvers_only() {
    let mut spec = GenSpec::new(ModelKind::Uniform, 150, 4);
    spec.max_width = Some(3.0);
    let inst = generate(&spec);
    assert_eq!(inst.mode, Mode::Rects);
    let trace = make_trace(
        &inst,
        &TraceSpec {
            model: TraceModel::Mixed,
            updates: 200,
            seed: 9,
            source: spec,
        },
    )
    .unwrap();
    for algo in [Algo::Line, Algo::GLine] {
        let v = verify(&inst, &trace, &SolverConfig::new(algo, inst.scale), &VerifyOptions::default()).unwrap();
        assert!(v.is_ok(), "{algo}: {v}");
    }
    let err = run(&inst, &trace, &SolverConfig::new(Algo::Grid, inst.scale), &RunOptions::default()).unwrap_err();
    assert!(matches!(err, Error::UnsupportedMode { .. }));
}

#[test]
fn recompute_baseline_column() {
    let (inst, trace) = workload(ModelKind::Uniform, 300, 30, 3);
    let opts = RunOptions {
        recompute_baseline: true,
        recompute_every: 3,
        ..RunOptions::default()
    };
    let out = run(&inst, &trace, &SolverConfig::new(Algo::Grid, inst.scale), &opts).unwrap();
    let timed: Vec<usize> = out
        .records
        .iter()
        .filter(|r| r.recompute_time_ns.is_some())
        .map(|r| r.step)
        .collect();
    assert_eq!(timed, (1..=10).map(|i| 3 * i).collect::<Vec<_>>());
    assert!(out.summary.mean_recompute_ns.unwrap() > 0.0);
}

#[test]
fn warmup_steps_are_not_recorded() {
    let (inst, trace) = workload(ModelKind::Uniform, 100, 50, 3);
    let opts = RunOptions {
        warmup: 20,
        ..RunOptions::default()
    };
    let out = run(&inst, &trace, &SolverConfig::new(Algo::Line, inst.scale), &opts).unwrap();
    assert_eq!(out.records.len(), 30);
    assert_eq!(out.records[0].step, 21);
    let full = run(&inst, &trace, &SolverConfig::new(Algo::Line, inst.scale), &RunOptions::default()).unwrap();
    assert_eq!(out.sizes(), full.sizes()[20..]);
}

/// A solver that misreports its answer from a chosen step on.
struct Corrupted {
    inner: Box<dyn DynamicSolver>,
    steps: usize,
    corrupt_at: usize,
}

impl DynamicSolver for Corrupted {
    fn algo(&self) -> Algo {
        self.inner.algo()
    }
    fn insert(&mut self, r: Rect) -> Result<()> {
        self.steps += 1;
        self.inner.insert(r)
    }
    fn delete(&mut self, id: LabelId) -> Result<()> {
        self.steps += 1;
        self.inner.delete(id)
    }
    fn size(&self) -> usize {
        self.solution().len()
    }
    fn solution(&self) -> Vec<LabelId> {
        let mut s = self.inner.solution();
        if self.steps >= self.corrupt_at {
            s.pop();
        }
        s
    }
    fn check(&self) -> std::result::Result<(), String> {
        self.inner.check()
    }
}

#[test]
fn corrupted_solver_is_caught_at_the_corrupting_step() {
    let (inst, trace) = workload(ModelKind::Uniform, 80, 40, 6);
    let cfg = SolverConfig::new(Algo::MisOrs, inst.scale);
    let mut bad = Corrupted {
        inner: build_solver(&cfg, &inst.labels).unwrap(),
        steps: 0,
        corrupt_at: 17,
    };
    let rep = verify_with(&mut bad, &inst, &trace, &VerifyOptions::default()).unwrap();
    let v = rep.outcome.clone().unwrap_err();
    assert_eq!(v.step, 17);
    assert!(v.message.contains("maximal"), "{}", v.message);
    assert!(rep.to_string().starts_with("violation at step 17"));
}

#[test]
fn trace_referencing_unknown_ids_is_infeasible() {
    let (inst, _) = workload(ModelKind::Uniform, 10, 0, 1);
    let trace = Trace {
        events: vec![Event::Delete(LabelId(99))],
    };
    let cfg = SolverConfig::new(Algo::Line, inst.scale);
    let err = verify(&inst, &trace, &cfg, &VerifyOptions::default()).unwrap_err();
    assert!(matches!(err, Error::InfeasibleTrace(_)));
}

#[test]
fn empty_trace_gives_summary_only() {
    let (inst, _) = workload(ModelKind::Gaussian, 30, 0, 1);
    let out = run(&inst, &Trace::default(), &SolverConfig::new(Algo::Grid, inst.scale), &RunOptions::default()).unwrap();
    assert!(out.records.is_empty());
    assert_eq!(out.summary.steps, 0);
    let v = verify(&inst, &Trace::default(), &SolverConfig::new(Algo::Grid, inst.scale), &VerifyOptions::default())
        .unwrap();
    assert_eq!(v.to_string(), "OK, 0 steps");
}
