//! Exact enumeration and rigorous bounds for taxi walks on the oriented
//! Manhattan lattice, plus a workbench for hard-core Peierls contours.

pub mod almbound;
pub mod bounds;
pub mod bridgecount;
pub mod contourlab;
pub mod enumerate;
pub mod error;
pub mod gjbound;
pub mod lattice;
pub mod numeric;
pub mod reference;
pub mod series;
pub mod table;
pub mod walk;
pub mod walkcount;

pub use bounds::{BoundDirection, BoundReport};
pub use error::{Error, Result};
pub use lattice::{Direction, Vertex};
pub use numeric::{Decimal, Rounding};
pub use table::CountTable;
pub use walk::{Letter, TaxiWalk, TurnWord};
