//! SheetSleuth watches spreadsheet workbooks. It records contiguous
//! formula and data areas in a registry, detects damaged formulas, invalid
//! precedents and dependents, dollaring vulnerabilities and rogue data,
//! and applies structural edits (group insert/delete, tracked moves,
//! replication, fixes) that avoid the range vulnerability.

pub mod addr;
pub mod formula;
pub mod grid;

pub use addr::{AreaExtent, Axis, CellAddr};
pub use grid::{CellContent, NameDef, Workbook, WorkbookSet};
