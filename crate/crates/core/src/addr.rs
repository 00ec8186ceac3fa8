//! Cell and area addressing: 1-based row/column coordinates, A1 column
//! letters, and rectangular extents within a sheet of a workbook.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Largest addressable row (matches the conventional grid limit).
pub const MAX_ROW: u32 = 1_048_576;
/// Largest addressable column (`XFD`).
pub const MAX_COL: u32 = 16_384;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AddrError {
    #[error("row {0} out of grid bounds (1..={MAX_ROW})")]
    RowOutOfBounds(u64),
    #[error("column {0} out of grid bounds (1..={MAX_COL})")]
    ColOutOfBounds(u64),
    #[error("extent corners are not ordered: {0}")]
    UnorderedExtent(String),
    #[error("malformed cell address: {0:?}")]
    BadCellText(String),
    #[error("malformed range: {0:?}")]
    BadRangeText(String),
}

/// Axis of a structural operation: rows grow downward, columns grow rightward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Row,
    Column,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::Row => Axis::Column,
            Axis::Column => Axis::Row,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Row => write!(f, "row"),
            Axis::Column => write!(f, "column"),
        }
    }
}

/// Case-insensitive identifier comparison (sheet names, workbook ids, names).
/// Original casing is preserved everywhere; only comparisons fold.
pub fn ident_eq(a: &str, b: &str) -> bool {
    a.eq_ignore_ascii_case(b) || ident_fold(a) == ident_fold(b)
}

/// Folds an identifier to its comparison key.
pub fn ident_fold(s: &str) -> String {
    s.to_lowercase()
}

/// Converts a 1-based column index to letters (1 -> "A", 28 -> "AB").
pub fn col_to_letters(mut col: u32) -> String {
    debug_assert!(col >= 1);
    let mut out = Vec::new();
    while col > 0 {
        let rem = ((col - 1) % 26) as u8;
        out.push(b'A' + rem);
        col = (col - 1) / 26;
    }
    out.reverse();
    String::from_utf8(out).unwrap()
}

/// Parses column letters to a 1-based index. Rejects anything past `XFD`.
pub fn letters_to_col(s: &str) -> Option<u32> {
    if s.is_empty() || s.len() > 3 {
        return None;
    }
    let mut col: u32 = 0;
    for c in s.chars() {
        if !c.is_ascii_alphabetic() {
            return None;
        }
        col = col * 26 + (c.to_ascii_uppercase() as u32 - 'A' as u32 + 1);
    }
    (1..=MAX_COL).contains(&col).then_some(col)
}

/// A fully qualified cell location: workbook, sheet, 1-based row and column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellAddr {
    pub workbook: String,
    pub sheet: String,
    pub row: u32,
    pub col: u32,
}

impl CellAddr {
    pub fn new(
        workbook: impl Into<String>,
        sheet: impl Into<String>,
        row: u32,
        col: u32,
    ) -> Result<Self, AddrError> {
        if row < 1 || row > MAX_ROW {
            return Err(AddrError::RowOutOfBounds(row as u64));
        }
        if col < 1 || col > MAX_COL {
            return Err(AddrError::ColOutOfBounds(col as u64));
        }
        Ok(CellAddr {
            workbook: workbook.into(),
            sheet: sheet.into(),
            row,
            col,
        })
    }

    pub fn same_sheet(&self, other: &CellAddr) -> bool {
        ident_eq(&self.workbook, &other.workbook) && ident_eq(&self.sheet, &other.sheet)
    }

    /// Plain A1 text without sheet qualifier, e.g. `D5`.
    pub fn a1(&self) -> String {
        format!("{}{}", col_to_letters(self.col), self.row)
    }

    /// Absolute A1 text, e.g. `$D$5`.
    pub fn a1_abs(&self) -> String {
        format!("${}${}", col_to_letters(self.col), self.row)
    }
}

impl fmt::Display for CellAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}!{}", quote_sheet(&self.sheet), self.a1())
    }
}

/// Quotes a sheet name for display when it contains `!`, spaces, `:` or `'`.
pub fn quote_sheet(name: &str) -> String {
    if name.contains('!') || name.contains(' ') || name.contains(':') || name.contains('\'') {
        format!("'{}'", name.replace('\'', "''"))
    } else {
        name.to_string()
    }
}

/// A rectangular area of cells on one sheet of one workbook.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AreaExtent {
    pub workbook: String,
    pub sheet: String,
    pub top: u32,
    pub left: u32,
    pub bottom: u32,
    pub right: u32,
}

impl AreaExtent {
    pub fn new(
        workbook: impl Into<String>,
        sheet: impl Into<String>,
        top: u32,
        left: u32,
        bottom: u32,
        right: u32,
    ) -> Result<Self, AddrError> {
        let workbook = workbook.into();
        let sheet = sheet.into();
        if top < 1 || bottom > MAX_ROW {
            return Err(AddrError::RowOutOfBounds(bottom as u64));
        }
        if left < 1 || right > MAX_COL {
            return Err(AddrError::ColOutOfBounds(right as u64));
        }
        if top > bottom || left > right {
            return Err(AddrError::UnorderedExtent(format!(
                "{}:{}",
                format_args!("{}{}", col_to_letters(left), top),
                format_args!("{}{}", col_to_letters(right), bottom)
            )));
        }
        Ok(AreaExtent {
            workbook,
            sheet,
            top,
            left,
            bottom,
            right,
        })
    }

    pub fn single(addr: &CellAddr) -> Self {
        AreaExtent {
            workbook: addr.workbook.clone(),
            sheet: addr.sheet.clone(),
            top: addr.row,
            left: addr.col,
            bottom: addr.row,
            right: addr.col,
        }
    }

    pub fn top_left(&self) -> CellAddr {
        CellAddr {
            workbook: self.workbook.clone(),
            sheet: self.sheet.clone(),
            row: self.top,
            col: self.left,
        }
    }

    pub fn bottom_right(&self) -> CellAddr {
        CellAddr {
            workbook: self.workbook.clone(),
            sheet: self.sheet.clone(),
            row: self.bottom,
            col: self.right,
        }
    }

    pub fn width(&self) -> u32 {
        self.right - self.left + 1
    }

    pub fn height(&self) -> u32 {
        self.bottom - self.top + 1
    }

    pub fn cell_count(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn is_single_cell(&self) -> bool {
        self.top == self.bottom && self.left == self.right
    }

    pub fn same_sheet(&self, other: &AreaExtent) -> bool {
        ident_eq(&self.workbook, &other.workbook) && ident_eq(&self.sheet, &other.sheet)
    }

    pub fn on_sheet_of(&self, addr: &CellAddr) -> bool {
        ident_eq(&self.workbook, &addr.workbook) && ident_eq(&self.sheet, &addr.sheet)
    }

    pub fn contains(&self, addr: &CellAddr) -> bool {
        self.on_sheet_of(addr) && self.contains_rc(addr.row, addr.col)
    }

    pub fn contains_rc(&self, row: u32, col: u32) -> bool {
        (self.top..=self.bottom).contains(&row) && (self.left..=self.right).contains(&col)
    }

    pub fn contains_extent(&self, other: &AreaExtent) -> bool {
        self.same_sheet(other)
            && self.top <= other.top
            && self.bottom >= other.bottom
            && self.left <= other.left
            && self.right >= other.right
    }

    pub fn intersects(&self, other: &AreaExtent) -> bool {
        self.same_sheet(other)
            && self.top <= other.bottom
            && other.top <= self.bottom
            && self.left <= other.right
            && other.left <= self.right
    }

    /// Start/end of the extent along `axis`.
    pub fn span(&self, axis: Axis) -> (u32, u32) {
        match axis {
            Axis::Row => (self.top, self.bottom),
            Axis::Column => (self.left, self.right),
        }
    }

    pub fn cross_span(&self, axis: Axis) -> (u32, u32) {
        self.span(axis.other())
    }

    pub fn set_span(&mut self, axis: Axis, start: u32, end: u32) {
        match axis {
            Axis::Row => {
                self.top = start;
                self.bottom = end;
            }
            Axis::Column => {
                self.left = start;
                self.right = end;
            }
        }
    }

    /// Row-major iterator over every cell of the extent.
    pub fn cells(&self) -> impl Iterator<Item = CellAddr> + '_ {
        (self.top..=self.bottom).flat_map(move |row| {
            (self.left..=self.right).map(move |col| CellAddr {
                workbook: self.workbook.clone(),
                sheet: self.sheet.clone(),
                row,
                col,
            })
        })
    }

    /// Extent shifted by a (row, column) delta; errors when leaving the grid.
    pub fn translated(&self, d_row: i64, d_col: i64) -> Result<AreaExtent, AddrError> {
        let shift = |v: u32, d: i64, max: u32, row: bool| -> Result<u32, AddrError> {
            let n = v as i64 + d;
            if n < 1 || n > max as i64 {
                return Err(if row {
                    AddrError::RowOutOfBounds(n.max(0) as u64)
                } else {
                    AddrError::ColOutOfBounds(n.max(0) as u64)
                });
            }
            Ok(n as u32)
        };
        Ok(AreaExtent {
            workbook: self.workbook.clone(),
            sheet: self.sheet.clone(),
            top: shift(self.top, d_row, MAX_ROW, true)?,
            left: shift(self.left, d_col, MAX_COL, false)?,
            bottom: shift(self.bottom, d_row, MAX_ROW, true)?,
            right: shift(self.right, d_col, MAX_COL, false)?,
        })
    }

    /// `Sheet!$G$5:$I$6` style; single cells collapse to `Sheet!$G$5`.
    pub fn display_absolute(&self) -> String {
        let tl = format!("${}${}", col_to_letters(self.left), self.top);
        if self.is_single_cell() {
            format!("{}!{}", quote_sheet(&self.sheet), tl)
        } else {
            let br = format!("${}${}", col_to_letters(self.right), self.bottom);
            format!("{}!{}:{}", quote_sheet(&self.sheet), tl, br)
        }
    }

    /// `[wb]Sheet!A1:B2` plain style used by file formats.
    pub fn display_qualified(&self) -> String {
        let tl = format!("{}{}", col_to_letters(self.left), self.top);
        if self.is_single_cell() {
            format!("[{}]{}!{}", self.workbook, quote_sheet(&self.sheet), tl)
        } else {
            let br = format!("{}{}", col_to_letters(self.right), self.bottom);
            format!(
                "[{}]{}!{}:{}",
                self.workbook,
                quote_sheet(&self.sheet),
                tl,
                br
            )
        }
    }

    /// Sort key: workbook, sheet, top, left (case-folded identifiers).
    pub fn sort_key(&self) -> (String, String, u32, u32, u32, u32) {
        (
            ident_fold(&self.workbook),
            ident_fold(&self.sheet),
            self.top,
            self.left,
            self.bottom,
            self.right,
        )
    }
}

impl fmt::Display for AreaExtent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_absolute())
    }
}

/// Parses a plain A1 cell like `D5` or `$D$5` (dollars tolerated, ignored).
pub fn parse_a1_cell(text: &str) -> Result<(u32, u32), AddrError> {
    let bad = || AddrError::BadCellText(text.to_string());
    let s = text.trim();
    let s = s.strip_prefix('$').unwrap_or(s);
    let letter_len = s.chars().take_while(|c| c.is_ascii_alphabetic()).count();
    if letter_len == 0 {
        return Err(bad());
    }
    let (letters, rest) = s.split_at(letter_len);
    let rest = rest.strip_prefix('$').unwrap_or(rest);
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let col = letters_to_col(letters).ok_or_else(bad)?;
    let row: u32 = rest.parse().map_err(|_| bad())?;
    if row < 1 || row > MAX_ROW {
        return Err(AddrError::RowOutOfBounds(row as u64));
    }
    Ok((row, col))
}

/// Parses `A1` or `A1:B2` (dollars tolerated) into a normalized rectangle.
pub fn parse_a1_range(text: &str) -> Result<(u32, u32, u32, u32), AddrError> {
    let s = text.trim();
    if let Some((a, b)) = s.split_once(':') {
        let (r1, c1) = parse_a1_cell(a)?;
        let (r2, c2) = parse_a1_cell(b)?;
        Ok((r1.min(r2), c1.min(c2), r1.max(r2), c1.max(c2)))
    } else {
        let (r, c) = parse_a1_cell(s)?;
        Ok((r, c, r, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_letters_round_trip() {
        for col in [1, 2, 25, 26, 27, 52, 53, 702, 703, MAX_COL] {
            assert_eq!(letters_to_col(&col_to_letters(col)), Some(col));
        }
        assert_eq!(col_to_letters(1), "A");
        assert_eq!(col_to_letters(26), "Z");
        assert_eq!(col_to_letters(27), "AA");
        assert_eq!(col_to_letters(MAX_COL), "XFD");
        assert_eq!(letters_to_col("XFE"), None);
        assert_eq!(letters_to_col("ABCD"), None);
    }

    #[test]
    fn extent_invariants() {
        assert!(AreaExtent::new("w", "s", 2, 2, 1, 3).is_err());
        assert!(AreaExtent::new("w", "s", 1, 1, 1, MAX_COL + 1).is_err());
        let e = AreaExtent::new("w", "s", 1, 1, 2, 3).unwrap();
        assert_eq!(e.width(), 3);
        assert_eq!(e.height(), 2);
        assert_eq!(e.cells().count(), 6);
    }

    #[test]
    fn extent_display() {
        let e = AreaExtent::new("w", "Costs", 5, 7, 6, 9).unwrap();
        assert_eq!(e.to_string(), "Costs!$G$5:$I$6");
        let c = AreaExtent::new("w", "Cost Model", 14, 5, 14, 5).unwrap();
        assert_eq!(c.to_string(), "'Cost Model'!$E$14");
    }

    #[test]
    fn parse_cells_and_ranges() {
        assert_eq!(parse_a1_cell("D5").unwrap(), (5, 4));
        assert_eq!(parse_a1_cell("$D$5").unwrap(), (5, 4));
        assert_eq!(parse_a1_range("G5:I6").unwrap(), (5, 7, 6, 9));
        assert_eq!(parse_a1_range("I6:G5").unwrap(), (5, 7, 6, 9));
        assert!(parse_a1_cell("5D").is_err());
        assert!(parse_a1_cell("").is_err());
    }

    #[test]
    fn intersection_and_containment() {
        let a = AreaExtent::new("w", "s", 1, 1, 3, 3).unwrap();
        let b = AreaExtent::new("w", "S", 3, 3, 5, 5).unwrap();
        let c = AreaExtent::new("w", "s", 4, 4, 5, 5).unwrap();
        assert!(a.intersects(&b));
        assert!(!a.intersects(&c));
        assert!(a.contains_extent(&AreaExtent::new("w", "s", 2, 2, 3, 3).unwrap()));
        assert!(!a.contains_extent(&b));
    }
}
