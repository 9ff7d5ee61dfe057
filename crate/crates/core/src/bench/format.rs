//! Instance and trace files.
//!
//! ```text
//! # dynlabel-instance v1 scale=3 mode=squares
//! 0,1.250,4.000
//! 1,2.500,0.125
//!
//! # dynlabel-trace v1
//! I,2,3.000,1.500
//! D,0
//! ```
//!
//! Coordinates are decimals in label units (the square side is 1); rectangle
//! rows carry a width column. Values are rounded to the instance's scale.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::{LabelId, Rect, Scale};

const INSTANCE_MAGIC: &str = "# dynlabel-instance v1";
const TRACE_MAGIC: &str = "# dynlabel-trace v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Squares,
    Rects,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Squares => "squares",
            Mode::Rects => "rects",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub scale: Scale,
    pub mode: Mode,
    pub labels: Vec<Rect>,
}

impl Instance {
    pub fn new(scale: Scale, mode: Mode) -> Self {
        Instance {
            scale,
            mode,
            labels: Vec::new(),
        }
    }

    pub fn max_id(&self) -> Option<LabelId> {
        self.labels.iter().map(|r| r.id).max()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    Insert(Rect),
    Delete(LabelId),
}

impl Event {
    pub fn op(&self) -> char {
        match self {
            Event::Insert(_) => 'I',
            Event::Delete(_) => 'D',
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<Event>,
}

fn format_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        line,
        msg: msg.into(),
    }
}

fn csv_reader<R: BufRead>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r)
}

/// Reads the first line and checks it starts with `magic`; returns the rest.
fn read_header<R: BufRead>(r: &mut R, magic: &str) -> Result<String> {
    let mut first = String::new();
    r.read_line(&mut first)?;
    let first = first.trim_end();
    let rest = first
        .strip_prefix(magic)
        .ok_or_else(|| format_err(1, format!("expected header {magic:?}")))?;
    Ok(rest.trim().to_string())
}

fn parse_id(text: &str, line: usize) -> Result<LabelId> {
    text.parse::<u64>()
        .map(LabelId)
        .map_err(|_| format_err(line, format!("invalid id {text:?}")))
}

fn parse_coord(scale: &Scale, text: &str, line: usize) -> Result<i64> {
    scale.parse(text).map_err(|m| format_err(line, m))
}

/// Parses `x,y[,w]` starting at `fields[0]`.
fn parse_rect(
    scale: &Scale,
    mode: Mode,
    id: LabelId,
    fields: &[&str],
    line: usize,
) -> Result<Rect> {
    let want = match mode {
        Mode::Squares => 2,
        Mode::Rects => 3,
    };
    if fields.len() != want {
        return Err(format_err(
            line,
            format!("expected {want} values after the id, found {}", fields.len()),
        ));
    }
    let x = parse_coord(scale, fields[0], line)?;
    let y = parse_coord(scale, fields[1], line)?;
    let width = match mode {
        Mode::Squares => scale.unit(),
        Mode::Rects => parse_coord(scale, fields[2], line)?,
    };
    if width <= 0 {
        return Err(format_err(line, format!("label {id} has non-positive width")));
    }
    Ok(Rect::new(id, x, y, width))
}

fn rect_fields(scale: &Scale, mode: Mode, r: &Rect, out: &mut String) {
    let _ = write!(out, "{},{}", scale.format(r.cx), scale.format(r.cy));
    if mode == Mode::Rects {
        let _ = write!(out, ",{}", scale.format(r.width));
    }
}

pub fn read_instance<R: BufRead>(mut r: R) -> Result<Instance> {
    let rest = read_header(&mut r, INSTANCE_MAGIC)?;
    let mut scale = Scale::default();
    let mut mode = Mode::Squares;
    for token in rest.split_whitespace() {
        match token.split_once('=') {
            Some(("scale", v)) => {
                let p: u32 = v.parse().map_err(|_| format_err(1, "invalid scale"))?;
                scale = Scale::new(p).map_err(|e| format_err(1, e.to_string()))?;
            }
            Some(("mode", "squares")) => mode = Mode::Squares,
            Some(("mode", "rects")) => mode = Mode::Rects,
            _ => return Err(format_err(1, format!("unknown header field {token:?}"))),
        }
    }
    let mut inst = Instance::new(scale, mode);
    let mut seen = std::collections::HashSet::new();
    for rec in csv_reader(r).records() {
        let rec = rec.map_err(|e| format_err(0, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize + 1);
        let fields: Vec<&str> = rec.iter().collect();
        if fields.len() == 1 && fields[0].is_empty() {
            continue;
        }
        let id = parse_id(fields[0], line)?;
        if !seen.insert(id) {
            return Err(format_err(line, format!("duplicate id {id}")));
        }
        inst.labels.push(parse_rect(&scale, mode, id, &fields[1..], line)?);
    }
    Ok(inst)
}

pub fn write_instance<W: Write>(mut w: W, inst: &Instance) -> Result<()> {
    let mut out = format!(
        "{INSTANCE_MAGIC} scale={} mode={}\n",
        inst.scale.exponent(),
        inst.mode.as_str()
    );
    for r in &inst.labels {
        let _ = write!(out, "{},", r.id);
        rect_fields(&inst.scale, inst.mode, r, &mut out);
        out.push('\n');
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// Reads a trace whose coordinates use `scale` and whose insertions have the
/// shape given by `mode`.
pub fn read_trace<R: BufRead>(mut r: R, scale: &Scale, mode: Mode) -> Result<Trace> {
    let rest = read_header(&mut r, TRACE_MAGIC)?;
    if !rest.is_empty() {
        return Err(format_err(1, format!("unexpected header text {rest:?}")));
    }
    let mut trace = Trace::default();
    for rec in csv_reader(r).records() {
        let rec = rec.map_err(|e| format_err(0, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize + 1);
        let fields: Vec<&str> = rec.iter().collect();
        match fields.as_slice() {
            [""] => continue,
            ["I", id, rest @ ..] => {
                let id = parse_id(id, line)?;
                trace
                    .events
                    .push(Event::Insert(parse_rect(scale, mode, id, rest, line)?));
            }
            ["D", id] => trace.events.push(Event::Delete(parse_id(id, line)?)),
            _ => return Err(format_err(line, format!("malformed event {:?}", fields.join(",")))),
        }
    }
    Ok(trace)
}

pub fn write_trace<W: Write>(mut w: W, trace: &Trace, scale: &Scale, mode: Mode) -> Result<()> {
    let mut out = format!("{TRACE_MAGIC}\n");
    for e in &trace.events {
        match e {
            Event::Insert(r) => {
                let _ = write!(out, "I,{},", r.id);
                rect_fields(scale, mode, r, &mut out);
                out.push('\n');
            }
            Event::Delete(id) => {
                let _ = writeln!(out, "D,{id}");
            }
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}
