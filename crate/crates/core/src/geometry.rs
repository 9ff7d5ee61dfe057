//! Integer-scaled coordinate model for unit squares and unit-height rectangles.
//!
//! Every input decimal is multiplied by `S = 10^p` and stored as an `i64`, so a
//! unit square has side exactly `S`. All predicates below are exact integer
//! comparisons. Label interiors are open: two labels that only touch along an
//! edge do not conflict.

use std::fmt;

use crate::error::Error;

/// A scaled coordinate. One unit of label side equals [`Scale::unit`].
pub type Coord = i64;

/// Magnitude bound for stored coordinates. Doubled sums and differences used by
/// the predicates stay far below `i64::MAX`.
pub const COORD_LIMIT: Coord = 1 << 40;

/// Stable identifier of a label.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(pub u64);

impl LabelId {
    pub const MIN: LabelId = LabelId(0);
    pub const MAX: LabelId = LabelId(u64::MAX);
}

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for LabelId {
    fn from(v: u64) -> Self {
        LabelId(v)
    }
}

/// Checks the coordinate magnitude bound.
pub fn check_coord(value: Coord) -> Result<Coord, Error> {
    if value.abs() < COORD_LIMIT {
        Ok(value)
    } else {
        Err(Error::CoordOutOfRange(value))
    }
}

/// Decimal scale `S = 10^p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Scale {
    exponent: u32,
    unit: Coord,
}

impl Default for Scale {
    fn default() -> Self {
        Scale { exponent: 3, unit: 1000 }
    }
}

/// Side multiplier for concentric boxes around a square.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Neighborhood {
    /// Side `2S`: holds the centers of every square intersecting the given one.
    Near = 2,
    /// Side `4S`: holds the centers of the 2-neighborhood.
    Far = 4,
}

impl Scale {
    /// Scale with `S = 10^exponent`; the exponent must lie in `0..=9`.
    pub fn new(exponent: u32) -> Result<Self, Error> {
        if exponent > 9 {
            return Err(Error::InvalidScale(exponent));
        }
        Ok(Scale {
            exponent,
            unit: 10i64.pow(exponent),
        })
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// `S`, the side of a unit square in scaled units.
    pub fn unit(&self) -> Coord {
        self.unit
    }

    /// Open-interior overlap of two unit squares.
    pub fn intersects(&self, a: &Square, b: &Square) -> bool {
        (a.cx - b.cx).abs() < self.unit && (a.cy - b.cy).abs() < self.unit
    }

    /// Open-interior overlap of two unit-height rectangles.
    pub fn intersects_rect(&self, a: &Rect, b: &Rect) -> bool {
        (a.cy - b.cy).abs() < self.unit && (2 * (a.cx - b.cx)).abs() < a.width + b.width
    }

    /// Open box of side `a * S` concentric with `s`.
    pub fn scaled_box(&self, s: &Square, a: Neighborhood) -> OpenBox {
        let half = (a as Coord) * self.unit / 2;
        OpenBox {
            xmin: s.cx - half,
            xmax: s.cx + half,
            ymin: s.cy - half,
            ymax: s.cy + half,
        }
    }

    /// Index of the grid line nearest to `c` under the half-open rule: the
    /// unique integer `g` with `c - S/2 <= g*S < c + S/2`.
    pub fn grid_index(&self, c: Coord) -> i64 {
        // ceil((2c - S) / 2S)
        let num = 2 * c - self.unit;
        let den = 2 * self.unit;
        -((-num).div_euclid(den))
    }

    /// The single grid point inside the half-open footprint of `s`.
    pub fn grid_point_of(&self, s: &Square) -> GridPoint {
        GridPoint {
            row: self.grid_index(s.cy),
            col: self.grid_index(s.cx),
        }
    }

    /// The horizontal stabbing line of a unit-height rectangle.
    pub fn line_of(&self, r: &Rect) -> i64 {
        self.grid_index(r.cy)
    }

    /// Converts a decimal value in label units to scaled units, rounding half
    /// away from zero at the scale's precision.
    pub fn scale_f64(&self, v: f64) -> Coord {
        (v * self.unit as f64).round() as Coord
    }

    /// Formats a scaled value as a decimal with exactly `p` fraction digits.
    pub fn format(&self, v: Coord) -> String {
        if self.exponent == 0 {
            return v.to_string();
        }
        let sign = if v < 0 { "-" } else { "" };
        let a = v.unsigned_abs();
        let u = self.unit as u64;
        format!(
            "{sign}{}.{:0width$}",
            a / u,
            a % u,
            width = self.exponent as usize
        )
    }

    /// Parses a decimal string into scaled units. Digits beyond the scale's
    /// precision are rounded half away from zero.
    pub fn parse(&self, text: &str) -> Result<Coord, String> {
        let t = text.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(format!("invalid number {text:?}"));
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(format!("invalid number {text:?}"));
        }
        let p = self.exponent as usize;
        let mut value: i128 = 0;
        for b in int_part.bytes() {
            value = value * 10 + i128::from(b - b'0');
            if value > i128::from(COORD_LIMIT) {
                return Err(format!("number {text:?} out of range"));
            }
        }
        let frac = frac_part.as_bytes();
        for i in 0..p {
            let d = frac.get(i).map_or(0, |b| i128::from(b - b'0'));
            value = value * 10 + d;
        }
        if frac.get(p).is_some_and(|b| *b >= b'5') {
            value += 1;
        }
        let value = if neg { -value } else { value };
        if value.abs() >= i128::from(COORD_LIMIT) {
            return Err(format!("number {text:?} out of range"));
        }
        Ok(value as Coord)
    }
}

/// A unit square given by its center.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Square {
    pub id: LabelId,
    pub cx: Coord,
    pub cy: Coord,
}

impl Square {
    pub fn new(id: impl Into<LabelId>, cx: Coord, cy: Coord) -> Self {
        Square {
            id: id.into(),
            cx,
            cy,
        }
    }

    pub fn to_rect(self, scale: &Scale) -> Rect {
        Rect {
            id: self.id,
            cx: self.cx,
            cy: self.cy,
            width: scale.unit(),
        }
    }
}

/// A rectangle of height `S` and arbitrary positive width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub id: LabelId,
    pub cx: Coord,
    pub cy: Coord,
    pub width: Coord,
}

impl Rect {
    pub fn new(id: impl Into<LabelId>, cx: Coord, cy: Coord, width: Coord) -> Self {
        Rect {
            id: id.into(),
            cx,
            cy,
            width,
        }
    }

    /// The square with the same center, if this rectangle is a unit square.
    pub fn as_square(&self, scale: &Scale) -> Option<Square> {
        (self.width == scale.unit()).then_some(Square {
            id: self.id,
            cx: self.cx,
            cy: self.cy,
        })
    }

    /// Horizontal extent in doubled coordinates, `(2cx - w, 2cx + w)`. Doubling
    /// keeps odd widths exact.
    pub fn span2(&self) -> (Coord, Coord) {
        (2 * self.cx - self.width, 2 * self.cx + self.width)
    }
}

/// A box open on all four sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OpenBox {
    pub xmin: Coord,
    pub xmax: Coord,
    pub ymin: Coord,
    pub ymax: Coord,
}

impl OpenBox {
    pub fn new(xmin: Coord, xmax: Coord, ymin: Coord, ymax: Coord) -> Self {
        OpenBox {
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    pub fn contains(&self, x: Coord, y: Coord) -> bool {
        self.xmin < x && x < self.xmax && self.ymin < y && y < self.ymax
    }

    /// True when no integer point lies strictly inside.
    pub fn is_empty(&self) -> bool {
        self.xmax - self.xmin < 2 || self.ymax - self.ymin < 2
    }
}

/// Grid point `g_{row,col}`; rows are horizontal stabbing lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPoint {
    pub row: i64,
    pub col: i64,
}
