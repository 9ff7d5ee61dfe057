//! Trace replay with per-step timing.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::time::Instant;

use crate::algo::grid::GridFrame;
use crate::bench::format::{Event, Instance, Trace};
use crate::bench::solver::{build_solver, DynamicSolver, SolverConfig};
use crate::error::{Error, Result};
use crate::geometry::{LabelId, Rect};
use crate::oracle::{exact_max_is, ExactConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Compute the exact optimum after every `opt_every`-th step.
    pub with_opt: bool,
    pub opt_cap: usize,
    pub opt_every: usize,
    /// Time a from-scratch rebuild after every `recompute_every`-th step.
    pub recompute_baseline: bool,
    pub recompute_every: usize,
    /// Leading events applied untimed and left out of the records.
    pub warmup: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            with_opt: false,
            opt_cap: crate::oracle::DEFAULT_CAP,
            opt_every: 1,
            recompute_baseline: false,
            recompute_every: 1,
            warmup: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub step: usize,
    pub op: char,
    pub algo: String,
    pub solution_size: usize,
    pub update_time_ns: u64,
    pub opt_size: Option<usize>,
    pub ratio: Option<f64>,
    pub recompute_time_ns: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub algo: String,
    pub steps: usize,
    pub mean_update_ns: f64,
    pub stddev_update_ns: f64,
    pub mean_size: f64,
    pub mean_ratio: Option<f64>,
    pub mean_recompute_ns: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub records: Vec<Record>,
    pub summary: Summary,
    pub with_opt: bool,
    pub recompute_baseline: bool,
}

impl RunOutput {
    pub fn sizes(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.solution_size).collect()
    }
}

/// The labels currently present, with constant-time removal.
#[derive(Clone, Debug, Default)]
pub struct LiveSet {
    labels: Vec<Rect>,
    pos: HashMap<LabelId, usize>,
}

impl LiveSet {
    pub fn new(labels: &[Rect]) -> Self {
        let mut s = LiveSet::default();
        for r in labels {
            s.insert(*r);
        }
        s
    }

    pub fn insert(&mut self, r: Rect) {
        self.pos.insert(r.id, self.labels.len());
        self.labels.push(r);
    }

    pub fn remove(&mut self, id: LabelId) -> Option<Rect> {
        let i = self.pos.remove(&id)?;
        let r = self.labels.swap_remove(i);
        if let Some(moved) = self.labels.get(i) {
            self.pos.insert(moved.id, i);
        }
        Some(r)
    }

    pub fn contains(&self, id: LabelId) -> bool {
        self.pos.contains_key(&id)
    }

    pub fn labels(&self) -> &[Rect] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Grid frame covering the instance and every inserted label.
pub fn frame_for(inst: &Instance, trace: &Trace) -> GridFrame {
    let s = inst.scale;
    let squares: Vec<_> = inst
        .labels
        .iter()
        .chain(trace.events.iter().filter_map(|e| match e {
            Event::Insert(r) => Some(r),
            Event::Delete(_) => None,
        }))
        .map(|r| crate::geometry::Square::new(r.id, r.cx, r.cy))
        .collect();
    GridFrame::covering(&s, &squares, 1)
}

/// Applies one event to the solver and the live set.
pub fn apply(solver: &mut dyn DynamicSolver, live: &mut LiveSet, e: &Event) -> Result<()> {
    match *e {
        Event::Insert(r) => {
            solver.insert(r)?;
            live.insert(r);
        }
        Event::Delete(id) => {
            solver.delete(id)?;
            live.remove(id);
        }
    }
    Ok(())
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn run(inst: &Instance, trace: &Trace, cfg: &SolverConfig, opts: &RunOptions) -> Result<RunOutput> {
    let mut cfg = *cfg;
    cfg.mode = inst.mode;
    if cfg.frame.is_none() && cfg.algo.needs_frame() {
        cfg.frame = Some(frame_for(inst, trace));
    }
    let algo = cfg.algo.to_string();
    let mut solver = build_solver(&cfg, &inst.labels)?;
    let mut live = LiveSet::new(&inst.labels);
    let exact_cfg = ExactConfig {
        cap: opts.opt_cap,
        node_limit: None,
    };
    let mut records = Vec::with_capacity(trace.events.len());
    for (i, e) in trace.events.iter().enumerate() {
        if i < opts.warmup {
            apply(solver.as_mut(), &mut live, e)?;
            continue;
        }
        let start = Instant::now();
        match *e {
            Event::Insert(r) => solver.insert(r)?,
            Event::Delete(id) => solver.delete(id)?,
        }
        let update_time_ns = start.elapsed().as_nanos() as u64;
        match *e {
            Event::Insert(r) => live.insert(r),
            Event::Delete(id) => {
                live.remove(id);
            }
        }
        let step = i + 1;
        let size = solver.size();
        let (opt_size, ratio) = if opts.with_opt && step % opts.opt_every.max(1) == 0 {
            let opt = exact_max_is(&cfg.scale, live.labels(), exact_cfg)?.size;
            let ratio = if opt == 0 { 1.0 } else { size as f64 / opt as f64 };
            (Some(opt), Some(ratio))
        } else {
            (None, None)
        };
        let recompute_time_ns =
            if opts.recompute_baseline && step % opts.recompute_every.max(1) == 0 {
                let start = Instant::now();
                let rebuilt = build_solver(&cfg, live.labels())?;
                let t = start.elapsed().as_nanos() as u64;
                drop(rebuilt);
                Some(t)
            } else {
                None
            };
        records.push(Record {
            step,
            op: e.op(),
            algo: algo.clone(),
            solution_size: size,
            update_time_ns,
            opt_size,
            ratio,
            recompute_time_ns,
        });
    }
    let times: Vec<f64> = records.iter().map(|r| r.update_time_ns as f64).collect();
    let (mean_update_ns, stddev_update_ns) = mean_std(&times);
    let sizes: Vec<f64> = records.iter().map(|r| r.solution_size as f64).collect();
    let ratios: Vec<f64> = records.iter().filter_map(|r| r.ratio).collect();
    let recomputes: Vec<f64> = records
        .iter()
        .filter_map(|r| r.recompute_time_ns.map(|t| t as f64))
        .collect();
    let summary = Summary {
        algo,
        steps: records.len(),
        mean_update_ns,
        stddev_update_ns,
        mean_size: mean_std(&sizes).0,
        mean_ratio: (!ratios.is_empty()).then(|| mean_std(&ratios).0),
        mean_recompute_ns: (!recomputes.is_empty()).then(|| mean_std(&recomputes).0),
    };
    Ok(RunOutput {
        records,
        summary,
        with_opt: opts.with_opt,
        recompute_baseline: opts.recompute_baseline,
    })
}

fn opt_str<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the records of one or more runs as CSV, followed by one summary
/// comment line per run. Optional columns appear when any run has them.
pub fn write_records<W: Write>(w: W, runs: &[RunOutput]) -> Result<()> {
    let with_opt = runs.iter().any(|r| r.with_opt);
    let recompute = runs.iter().any(|r| r.recompute_baseline);
    let mut wr = csv::WriterBuilder::new().flexible(true).from_writer(w);
    let mut header = vec!["step", "op", "algo", "solution_size", "update_time_ns"];
    if with_opt {
        header.extend(["opt_size", "ratio"]);
    }
    if recompute {
        header.push("recompute_time_ns");
    }
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    wr.write_record(&header).map_err(csv_err)?;
    for r in runs.iter().flat_map(|run| &run.records) {
        let mut row = vec![
            r.step.to_string(),
            r.op.to_string(),
            r.algo.clone(),
            r.solution_size.to_string(),
            r.update_time_ns.to_string(),
        ];
        if with_opt {
            row.push(opt_str(r.opt_size));
            row.push(r.ratio.map(|x| format!("{x:.6}")).unwrap_or_default());
        }
        if recompute {
            row.push(opt_str(r.recompute_time_ns));
        }
        wr.write_record(&row).map_err(csv_err)?;
    }
    let mut w = wr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    for run in runs {
        let s = &run.summary;
        let mut line = format!(
            "# summary algo={} steps={} mean_update_ns={:.1} stddev_update_ns={:.1} mean_size={:.3}",
            s.algo, s.steps, s.mean_update_ns, s.stddev_update_ns, s.mean_size
        );
        if let Some(r) = s.mean_ratio {
            line.push_str(&format!(" mean_ratio={r:.6}"));
        }
        if let Some(t) = s.mean_recompute_ns {
            line.push_str(&format!(" mean_recompute_ns={t:.1}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Reads records written by [`write_records`]; summary lines are skipped.
pub fn read_records<R: BufRead>(r: R) -> Result<Vec<Record>> {
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(r);
    let fmt = |line: usize, msg: String| Error::Format { line, msg };
    let headers = rd.headers().map_err(|e| fmt(1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| fmt(1, format!("missing column {name}")));
    let (c_step, c_op, c_algo, c_size, c_time) = (
        need("step")?,
        need("op")?,
        need("algo")?,
        need("solution_size")?,
        need("update_time_ns")?,
    );
    let (c_opt, c_ratio, c_re) = (col("opt_size"), col("ratio"), col("recompute_time_ns"));
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| fmt(0, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let get = |c: usize| rec.get(c).unwrap_or("");
        let num = |c: usize| -> Result<u64> {
            get(c)
                .parse()
                .map_err(|_| fmt(line, format!("invalid number {:?}", get(c))))
        };
        let maybe = |c: Option<usize>| c.map(get).filter(|s| !s.is_empty());
        out.push(Record {
            step: num(c_step)? as usize,
            op: get(c_op).chars().next().unwrap_or('?'),
            algo: get(c_algo).to_string(),
            solution_size: num(c_size)? as usize,
            update_time_ns: num(c_time)?,
            opt_size: maybe(c_opt).and_then(|s| s.parse().ok()),
            ratio: maybe(c_ratio).and_then(|s| s.parse().ok()),
            recompute_time_ns: maybe(c_re).and_then(|s| s.parse().ok()),
        });
    }
    Ok(out)
}
