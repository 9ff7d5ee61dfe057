//! Rectilinear candidate region for deletion repair: a box minus a set of
//! boxes, on the integer lattice.
//!
//! Open boxes over integer coordinates are closed lattice boxes shrunk by one
//! unit on every side, so the region is kept as a closed base box and closed
//! holes. Queries against the point index convert back to open boxes.

use crate::geometry::{Coord, OpenBox};

/// Closed lattice box `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticeBox {
    pub x0: Coord,
    pub x1: Coord,
    pub y0: Coord,
    pub y1: Coord,
}

impl LatticeBox {
    /// Lattice points strictly inside `b`; `None` if there are none.
    pub fn from_open(b: &OpenBox) -> Option<LatticeBox> {
        let lb = LatticeBox {
            x0: b.xmin + 1,
            x1: b.xmax - 1,
            y0: b.ymin + 1,
            y1: b.ymax - 1,
        };
        (lb.x0 <= lb.x1 && lb.y0 <= lb.y1).then_some(lb)
    }

    pub fn to_open(&self) -> OpenBox {
        OpenBox::new(self.x0 - 1, self.x1 + 1, self.y0 - 1, self.y1 + 1)
    }

    pub fn contains(&self, x: Coord, y: Coord) -> bool {
        self.x0 <= x && x <= self.x1 && self.y0 <= y && y <= self.y1
    }

    fn clip(&self, other: &LatticeBox) -> Option<LatticeBox> {
        let c = LatticeBox {
            x0: self.x0.max(other.x0),
            x1: self.x1.min(other.x1),
            y0: self.y0.max(other.y0),
            y1: self.y1.min(other.y1),
        };
        (c.x0 <= c.x1 && c.y0 <= c.y1).then_some(c)
    }
}

#[derive(Clone, Debug)]
pub struct RepairRegion {
    base: LatticeBox,
    holes: Vec<LatticeBox>,
}

impl RepairRegion {
    pub fn new(base: LatticeBox) -> Self {
        RepairRegion {
            base,
            holes: Vec::new(),
        }
    }

    /// Removes every lattice point strictly inside `b`.
    pub fn subtract(&mut self, b: &OpenBox) {
        if let Some(h) = LatticeBox::from_open(b).and_then(|h| h.clip(&self.base)) {
            self.holes.push(h);
        }
    }

    pub fn contains(&self, x: Coord, y: Coord) -> bool {
        self.base.contains(x, y) && !self.holes.iter().any(|h| h.contains(x, y))
    }

    fn x_breaks(&self) -> Vec<Coord> {
        let mut xs = vec![self.base.x0, self.base.x1 + 1];
        for h in &self.holes {
            xs.push(h.x0);
            xs.push(h.x1 + 1);
        }
        xs.sort_unstable();
        xs.dedup();
        xs
    }

    fn y_breaks(&self) -> Vec<Coord> {
        let mut ys = vec![self.base.y0, self.base.y1 + 1];
        for h in &self.holes {
            ys.push(h.y0);
            ys.push(h.y1 + 1);
        }
        ys.sort_unstable();
        ys.dedup();
        ys
    }

    /// Vertical slab partition: one box per maximal y-run of the region inside
    /// each strip between consecutive corner x-coordinates. Neighbouring strips
    /// with the same cross-section are merged.
    pub fn slabs(&self) -> Vec<LatticeBox> {
        let xs = self.x_breaks();
        let mut out: Vec<LatticeBox> = Vec::new();
        let mut prev_strip: Vec<usize> = Vec::new();
        for w in xs.windows(2) {
            let (xa, xb) = (w[0], w[1] - 1);
            let mut covering: Vec<(Coord, Coord)> = self
                .holes
                .iter()
                .filter(|h| h.x0 <= xa && xb <= h.x1)
                .map(|h| (h.y0, h.y1))
                .collect();
            covering.sort_unstable();
            let mut runs = Vec::new();
            let mut y = self.base.y0;
            for (h0, h1) in covering {
                if h0 > y {
                    runs.push((y, h0 - 1));
                }
                y = y.max(h1 + 1);
            }
            if y <= self.base.y1 {
                runs.push((y, self.base.y1));
            }
            let same = prev_strip.len() == runs.len()
                && prev_strip
                    .iter()
                    .zip(&runs)
                    .all(|(&i, &(y0, y1))| out[i].y0 == y0 && out[i].y1 == y1 && out[i].x1 + 1 == xa);
            if same {
                for &i in &prev_strip {
                    out[i].x1 = xb;
                }
            } else {
                prev_strip.clear();
                for (y0, y1) in runs {
                    prev_strip.push(out.len());
                    out.push(LatticeBox { x0: xa, x1: xb, y0, y1 });
                }
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.slabs().is_empty()
    }

    /// Corner count of the region's boundary, where the region is the union of
    /// unit cells anchored at its lattice points. A vertex shared by two
    /// diagonally opposite cells counts twice.
    pub fn corner_count(&self) -> usize {
        let xs = self.x_breaks();
        let ys = self.y_breaks();
        let (nx, ny) = (xs.len(), ys.len());
        let occupied = |i: isize, j: isize| -> bool {
            if i < 0 || j < 0 || i as usize >= nx - 1 || j as usize >= ny - 1 {
                return false;
            }
            self.contains(xs[i as usize], ys[j as usize])
        };
        let mut corners = 0;
        for i in 0..nx as isize {
            for j in 0..ny as isize {
                let cells = [
                    occupied(i - 1, j - 1),
                    occupied(i, j - 1),
                    occupied(i - 1, j),
                    occupied(i, j),
                ];
                let k = cells.iter().filter(|&&c| c).count();
                corners += match k {
                    1 | 3 => 1,
                    2 if cells[0] == cells[3] => 2,
                    _ => 0,
                };
            }
        }
        corners
    }
}
