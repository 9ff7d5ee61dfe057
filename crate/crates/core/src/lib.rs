//! Dynamic maximal and approximately maximum independent sets of unit squares
//! and unit-height rectangles, plus the benchmark harness that replays update
//! traces against them.

pub mod algo;
pub mod augment;
pub mod bench;
pub mod error;
pub mod geometry;
pub mod interval_index;
pub mod oracle;
pub mod range_index;

pub use error::{Error, Result};
pub use geometry::{Coord, GridPoint, LabelId, Neighborhood, OpenBox, Rect, Scale, Square};
