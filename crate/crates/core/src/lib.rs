//! Learn conditional-formatting rules for a spreadsheet column from a few
//! user-formatted example cells.
//!
//! The engine runs in five stages:
//!
//! 1. [`predicates`] enumerates typed boolean predicates that hold on a strict
//!    subset of the column and packs them into a cell-by-predicate bit matrix.
//! 2. [`cluster`] extends the user's examples to a hypothesized format for every
//!    cell by semi-supervised clustering over predicate-set distances.
//! 3. [`tree`] learns small decision trees per format (one versus all) and reads
//!    each accepted tree off as a DNF formula.
//! 4. [`ranking`] scores the per-format formulas and combines them into disjoint
//!    multi-format rules.
//! 5. [`pipeline`] ties it together behind [`pipeline::learn`].
//!
//! ```
//! use cf_synth::column::{Column, Task};
//! use cf_synth::pipeline::{learn, EngineConfig};
//!
//! let column = Column::numbers(&[3.0, 7.0, 5.0, 2.0, 9.0, 1.0]).unwrap();
//! let column = column.with_formats(&[1, 0, 0, 1, 0, 0]);
//! let task = Task::from_column(column, &[0, 3]).unwrap();
//! let outcome = learn(&task, &EngineConfig::default()).unwrap();
//! let best = &outcome.suggestions[0];
//! assert_eq!(best.per_cell_formats, vec![1, 0, 0, 1, 0, 1]);
//! ```

pub mod bits;
pub mod cluster;
pub mod column;
pub mod error;
pub mod harness;
pub mod pipeline;
pub mod predicates;
pub mod ranking;
pub mod rule;
pub mod service;
pub mod tree;

pub use error::{Error, Result};
