//! Notation conversion anchored at a cell. Relative A1 coordinates become
//! bracketed R1C1 offsets from the anchor; absolute coordinates become
//! plain indices; the inverse direction restores A1 indices and errors if
//! a coordinate would leave the grid.

use super::{Ast, CellRef, Notation, RefBody, RefCoord, Reference};
use crate::addr::{CellAddr, MAX_COL, MAX_ROW};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConvertError {
    #[error("formula is not in {0:?} notation")]
    NotationMismatch(Notation),
    #[error("converted coordinate {0} is outside the grid")]
    OffGrid(i64),
}

/// Converts an A1 tree to R1C1 relative to `anchor`.
pub fn a1_to_r1c1(ast: &Ast, anchor: &CellAddr) -> Result<Ast, ConvertError> {
    ast.map_refs(&mut |r| {
        map_reference(r, |c| {
            let row = to_r1c1_coord(c.row, anchor.row)?;
            let col = to_r1c1_coord(c.col, anchor.col)?;
            Ok(CellRef { row, col })
        })
    })
}

/// Converts an R1C1 tree to A1 relative to `anchor`; the exact inverse of
/// [`a1_to_r1c1`] at the same anchor.
pub fn r1c1_to_a1(ast: &Ast, anchor: &CellAddr) -> Result<Ast, ConvertError> {
    ast.map_refs(&mut |r| {
        map_reference(r, |c| {
            let row = to_a1_coord(c.row, anchor.row, MAX_ROW)?;
            let col = to_a1_coord(c.col, anchor.col, MAX_COL)?;
            Ok(CellRef { row, col })
        })
    })
}

fn map_reference(
    r: &Reference,
    mut conv: impl FnMut(&CellRef) -> Result<CellRef, ConvertError>,
) -> Result<Reference, ConvertError> {
    let body = match &r.body {
        RefBody::Cell(c) => RefBody::Cell(conv(c)?),
        RefBody::Range(a, b) => RefBody::Range(conv(a)?, conv(b)?),
        RefBody::Name(n) => RefBody::Name(n.clone()),
        RefBody::RefError => RefBody::RefError,
    };
    Ok(Reference {
        workbook: r.workbook.clone(),
        sheet: r.sheet.clone(),
        body,
    })
}

fn to_r1c1_coord(c: RefCoord, anchor: u32) -> Result<RefCoord, ConvertError> {
    match c {
        RefCoord::A1 { index, abs: true } => Ok(RefCoord::Abs(index)),
        RefCoord::A1 { index, abs: false } => Ok(RefCoord::Rel(index as i32 - anchor as i32)),
        RefCoord::Abs(_) | RefCoord::Rel(_) => Err(ConvertError::NotationMismatch(Notation::A1)),
    }
}

fn to_a1_coord(c: RefCoord, anchor: u32, max: u32) -> Result<RefCoord, ConvertError> {
    match c {
        RefCoord::Abs(index) => Ok(RefCoord::A1 { index, abs: true }),
        RefCoord::Rel(off) => {
            let index = anchor as i64 + off as i64;
            if index < 1 || index > max as i64 {
                return Err(ConvertError::OffGrid(index));
            }
            Ok(RefCoord::A1 {
                index: index as u32,
                abs: false,
            })
        }
        RefCoord::A1 { .. } => Err(ConvertError::NotationMismatch(Notation::R1C1)),
    }
}

/// Concrete 1-based index a single coordinate resolves to at `anchor`.
pub fn resolve_coord(c: RefCoord, anchor: u32, max: u32) -> Option<u32> {
    match c {
        RefCoord::A1 { index, .. } | RefCoord::Abs(index) => {
            (1..=max).contains(&index).then_some(index)
        }
        RefCoord::Rel(off) => {
            let index = anchor as i64 + off as i64;
            (index >= 1 && index <= max as i64).then_some(index as u32)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, render_formula};
    use super::*;

    fn anchor(row: u32, col: u32) -> CellAddr {
        CellAddr::new("w", "s", row, col).unwrap()
    }

    #[test]
    fn card_formula_generic() {
        let ast = parse("=ROUNDUP(H2/$D5,0)-SUM($G5:G5)", Notation::A1).unwrap();
        let generic = a1_to_r1c1(&ast, &anchor(5, 8)).unwrap();
        assert_eq!(
            render_formula(&generic),
            "=ROUNDUP(R[-3]C/RC4,0)-SUM(RC7:RC[-1])"
        );
        let back = r1c1_to_a1(&generic, &anchor(5, 8)).unwrap();
        assert_eq!(back, ast);
    }

    #[test]
    fn no_references_unchanged() {
        let ast = parse("=1+2", Notation::A1).unwrap();
        assert_eq!(a1_to_r1c1(&ast, &anchor(99, 26)).unwrap(), ast);
    }

    #[test]
    fn fully_absolute_is_anchor_independent() {
        let ast = parse("=$A$1", Notation::A1).unwrap();
        let at_z99 = a1_to_r1c1(&ast, &anchor(99, 26)).unwrap();
        let at_b2 = a1_to_r1c1(&ast, &anchor(2, 2)).unwrap();
        assert_eq!(render_formula(&at_z99), "=R1C1");
        assert_eq!(at_z99, at_b2);
    }

    #[test]
    fn inverse_direction() {
        let ast = parse("=R[-3]C/RC4", Notation::R1C1).unwrap();
        let a1 = r1c1_to_a1(&ast, &anchor(5, 8)).unwrap();
        assert_eq!(render_formula(&a1), "=H2/$D5");
    }

    #[test]
    fn off_grid_conversion_fails() {
        let ast = parse("=RC[-1]", Notation::R1C1).unwrap();
        assert_eq!(
            r1c1_to_a1(&ast, &anchor(1, 1)).unwrap_err(),
            ConvertError::OffGrid(0)
        );
    }

    #[test]
    fn fill_translates_share_a_generic() {
        // H5's formula and its fill-translate at I6 convert to the same
        // generic at their own anchors.
        let h5 = parse("=ROUNDUP(H2/$D5,0)-SUM($G5:G5)", Notation::A1).unwrap();
        let i6 = parse("=ROUNDUP(I3/$D6,0)-SUM($G6:H6)", Notation::A1).unwrap();
        let g1 = a1_to_r1c1(&h5, &anchor(5, 8)).unwrap();
        let g2 = a1_to_r1c1(&i6, &anchor(6, 9)).unwrap();
        assert_eq!(g1, g2);
    }
}
