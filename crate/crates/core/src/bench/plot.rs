//! Per-algorithm series files for plotting tools.
//!
//! Each series is a whitespace-separated table with a `#` header line:
//! `step size update_time_ns ratio recompute_time_ns`, where missing optional
//! values are written as `nan`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::bench::run::Record;
use crate::error::Result;

/// Groups records by algorithm, in first-seen step order.
pub fn series(records: &[Record]) -> BTreeMap<String, Vec<&Record>> {
    let mut out: BTreeMap<String, Vec<&Record>> = BTreeMap::new();
    for r in records {
        out.entry(r.algo.clone()).or_default().push(r);
    }
    out
}

pub fn write_series<W: Write>(mut w: W, rows: &[&Record]) -> Result<()> {
    writeln!(w, "# step size update_time_ns ratio recompute_time_ns")?;
    for r in rows {
        let ratio = r.ratio.map_or("nan".to_string(), |x| format!("{x:.6}"));
        let re = r.recompute_time_ns.map_or("nan".to_string(), |x| x.to_string());
        writeln!(
            w,
            "{} {} {} {ratio} {re}",
            r.step, r.solution_size, r.update_time_ns
        )?;
    }
    Ok(())
}

/// Writes `<dir>/<algo>.dat` for every algorithm present; returns the paths.
pub fn plot_data(records: &[Record], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (algo, rows) in series(records) {
        let path = dir.join(format!("{algo}.dat"));
        let f = fs::File::create(&path)?;
        write_series(std::io::BufWriter::new(f), &rows)?;
        paths.push(path);
    }
    Ok(paths)
}
