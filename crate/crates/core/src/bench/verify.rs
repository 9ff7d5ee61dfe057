//! Trace replay that checks every invariant after every step.

use std::collections::HashSet;

use crate::bench::format::{Instance, Trace};
use crate::bench::run::{apply, frame_for, LiveSet};
use crate::bench::solver::{build_solver, DynamicSolver, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::{LabelId, Scale};
use crate::oracle::{exact_max_is, verify_rects, ExactConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Compare against the exact optimum while the live set has at most this
    /// many labels.
    pub opt_cap: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { opt_cap: 120 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// 0 is the initial build, `i` the state after the `i`-th event.
    pub step: usize,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "violation at step {}: {}", self.step, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub steps: usize,
    /// Solution size after each event.
    pub sizes: Vec<usize>,
    /// Steps at which the exact optimum was computed.
    pub opt_checks: usize,
    pub outcome: std::result::Result<(), Violation>,
}

impl VerifyReport {
    pub fn is_ok(&self) -> bool {
        self.outcome.is_ok()
    }
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.outcome {
            Ok(()) => write!(f, "OK, {} steps", self.steps),
            Err(v) => v.fmt(f),
        }
    }
}

/// Checks one state; `Err` carries the first failed assertion.
pub fn check_state(
    solver: &dyn DynamicSolver,
    scale: &Scale,
    live: &LiveSet,
    opts: &VerifyOptions,
    opt_checks: &mut usize,
) -> Result<std::result::Result<(), String>> {
    if let Err(m) = solver.check() {
        return Ok(Err(m));
    }
    let sol = solver.solution();
    let set: HashSet<LabelId> = sol.iter().copied().collect();
    if set.len() != sol.len() || set.len() != solver.size() {
        return Ok(Err(format!(
            "reported size {} but solution lists {} ids ({} distinct)",
            solver.size(),
            sol.len(),
            set.len()
        )));
    }
    if let Some(id) = set.iter().find(|id| !live.contains(**id)) {
        return Ok(Err(format!("solution holds {id}, which is not live")));
    }
    let v = verify_rects(scale, live.labels(), &set);
    if !v.independent {
        return Ok(Err("solution is not independent".into()));
    }
    let algo = solver.algo();
    if algo.is_maximal() && !v.maximal {
        return Ok(Err("solution is not maximal".into()));
    }
    if live.len() <= opts.opt_cap {
        let cfg = ExactConfig {
            cap: opts.opt_cap,
            node_limit: None,
        };
        let opt = exact_max_is(scale, live.labels(), cfg)?.size;
        *opt_checks += 1;
        let bound = algo.ratio_bound();
        if (set.len() as f64) < bound * opt as f64 - 1e-9 {
            return Ok(Err(format!(
                "size {} is below {bound:.4} of the optimum {opt}",
                set.len()
            )));
        }
    }
    Ok(Ok(()))
}

/// Replays `trace` on a prepared solver whose state matches `inst`.
pub fn verify_with(
    solver: &mut dyn DynamicSolver,
    inst: &Instance,
    trace: &Trace,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    let mut live = LiveSet::new(&inst.labels);
    let mut report = VerifyReport {
        steps: 0,
        sizes: Vec::with_capacity(trace.events.len()),
        opt_checks: 0,
        outcome: Ok(()),
    };
    if let Err(message) = check_state(solver, &inst.scale, &live, opts, &mut report.opt_checks)? {
        report.outcome = Err(Violation { step: 0, message });
        return Ok(report);
    }
    for (i, e) in trace.events.iter().enumerate() {
        let step = i + 1;
        if let Err(err) = apply(solver, &mut live, e) {
            return match err {
                Error::UnknownId(_) | Error::DuplicateId(_) => Err(Error::InfeasibleTrace(format!(
                    "step {step}: {err}"
                ))),
                other => Err(other),
            };
        }
        report.steps = step;
        report.sizes.push(solver.size());
        if let Err(message) = check_state(solver, &inst.scale, &live, opts, &mut report.opt_checks)?
        {
            report.outcome = Err(Violation { step, message });
            return Ok(report);
        }
    }
    Ok(report)
}

pub fn verify(
    inst: &Instance,
    trace: &Trace,
    cfg: &SolverConfig,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    let mut cfg = *cfg;
    cfg.mode = inst.mode;
    if cfg.frame.is_none() && cfg.algo.needs_frame() {
        cfg.frame = Some(frame_for(inst, trace));
    }
    let mut solver = build_solver(&cfg, &inst.labels)?;
    verify_with(solver.as_mut(), inst, trace, opts)
}
