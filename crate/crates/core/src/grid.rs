//! In-memory workbook model with sparse sheets, named ranges, SWT text
//! persistence and CSV ingestion.
//!
//! SWT ("SheetSleuth Workbook Text") is one record per line, UTF-8:
//!
//! ```text
//! # comment
//! @name PortsPerCard := Costs!$D$5:$D$6
//! Costs!D5 := 24
//! Costs!B2 := "Connections Type 1"
//! Costs!H5 := =ROUNDUP(H2/$D5,0)-SUM($G5:G5)
//! ```
//!
//! Payloads are numeric literals, double-quoted strings (`""` escapes a
//! quote) or formulas beginning with `=`. Sheet names containing `!`,
//! spaces, `:` or `'` are single-quoted. A workbook set is a directory of
//! `<workbook-id>.swt` files. Saves are canonical: `@name` records sorted
//! by name first, then cells grouped by sheet in first-appearance order,
//! sorted by row then column.

use crate::addr::{ident_eq, ident_fold, parse_a1_cell, parse_a1_range, quote_sheet, AreaExtent, CellAddr, MAX_COL, MAX_ROW};
use crate::formula::{parse, Notation, ParseError};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}:{line}: cell {cell} is defined twice")]
    DuplicateCell {
        path: String,
        line: usize,
        cell: String,
    },
    #[error("{path}:{line}: formula does not parse: {source}")]
    BadFormula {
        path: String,
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error("unknown name {0:?}")]
    UnknownName(String),
    #[error("unknown sheet {0:?}")]
    UnknownSheet(String),
    #[error("unknown workbook {0:?}")]
    UnknownWorkbook(String),
    #[error("sheet {0:?} already exists")]
    SheetExists(String),
    #[error("cell out of grid bounds: row {0}, column {1}")]
    OutOfBounds(u32, u32),
    #[error("workbook id is ambiguous; qualify the address with [workbook]")]
    AmbiguousWorkbook,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Contents of one cell. `Blank` is first-class but never stored: sparse
/// sheets simply have no entry for blank cells.
#[derive(Debug, Clone, PartialEq)]
pub enum CellContent {
    Blank,
    Number(f64),
    Text(String),
    /// Formula source in A1 notation, leading `=` included.
    Formula(String),
}

impl CellContent {
    pub fn is_blank(&self) -> bool {
        matches!(self, CellContent::Blank)
    }

    pub fn is_formula(&self) -> bool {
        matches!(self, CellContent::Formula(_))
    }

    pub fn formula_source(&self) -> Option<&str> {
        match self {
            CellContent::Formula(s) => Some(s),
            _ => None,
        }
    }
}

/// A named range definition. Names are unique per workbook,
/// case-insensitively.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NameDef {
    pub name: String,
    pub target: AreaExtent,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct SheetGrid {
    cells: BTreeMap<(u32, u32), CellContent>,
}

/// A workbook: ordered sheets of sparse cells plus named ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct Workbook {
    pub id: String,
    sheets: Vec<(String, SheetGrid)>,
    pub names: Vec<NameDef>,
}

impl Workbook {
    pub fn new(id: impl Into<String>) -> Self {
        Workbook {
            id: id.into(),
            sheets: Vec::new(),
            names: Vec::new(),
        }
    }

    pub fn sheet_names(&self) -> impl Iterator<Item = &str> {
        self.sheets.iter().map(|(n, _)| n.as_str())
    }

    pub fn has_sheet(&self, name: &str) -> bool {
        self.sheets.iter().any(|(n, _)| ident_eq(n, name))
    }

    fn sheet(&self, name: &str) -> Option<&SheetGrid> {
        self.sheets
            .iter()
            .find(|(n, _)| ident_eq(n, name))
            .map(|(_, g)| g)
    }

    fn sheet_mut(&mut self, name: &str) -> &mut SheetGrid {
        if let Some(i) = self.sheets.iter().position(|(n, _)| ident_eq(n, name)) {
            return &mut self.sheets[i].1;
        }
        self.sheets.push((name.to_string(), SheetGrid::default()));
        &mut self.sheets.last_mut().unwrap().1
    }

    /// Creates an empty sheet, preserving the given casing.
    pub fn ensure_sheet(&mut self, name: &str) {
        let _ = self.sheet_mut(name);
    }

    /// Cell content at (row, col); blanks are absent from storage.
    pub fn cell(&self, sheet: &str, row: u32, col: u32) -> CellContent {
        self.sheet(sheet)
            .and_then(|g| g.cells.get(&(row, col)).cloned())
            .unwrap_or(CellContent::Blank)
    }

    pub fn cell_at(&self, addr: &CellAddr) -> CellContent {
        self.cell(&addr.sheet, addr.row, addr.col)
    }

    /// Writes a cell; `Blank` removes the stored entry. Creates the sheet
    /// when absent.
    pub fn set_cell(
        &mut self,
        sheet: &str,
        row: u32,
        col: u32,
        content: CellContent,
    ) -> Result<(), GridError> {
        if row < 1 || row > MAX_ROW || col < 1 || col > MAX_COL {
            return Err(GridError::OutOfBounds(row, col));
        }
        let grid = self.sheet_mut(sheet);
        match content {
            CellContent::Blank => {
                grid.cells.remove(&(row, col));
            }
            other => {
                grid.cells.insert((row, col), other);
            }
        }
        Ok(())
    }

    /// All stored (row, col, content) of a sheet in row-major order.
    pub fn sheet_cells(&self, sheet: &str) -> Vec<(u32, u32, CellContent)> {
        self.sheet(sheet)
            .map(|g| {
                g.cells
                    .iter()
                    .map(|(&(r, c), v)| (r, c, v.clone()))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Smallest rectangle holding every stored cell of a sheet.
    pub fn used_range(&self, sheet: &str) -> Option<(u32, u32, u32, u32)> {
        let g = self.sheet(sheet)?;
        let mut it = g.cells.keys();
        let &(r0, c0) = it.next()?;
        let (mut top, mut left, mut bottom, mut right) = (r0, c0, r0, c0);
        for &(r, c) in g.cells.keys() {
            top = top.min(r);
            left = left.min(c);
            bottom = bottom.max(r);
            right = right.max(c);
        }
        Some((top, left, bottom, right))
    }

    /// Looks a name up case-insensitively.
    pub fn resolve_name(&self, name: &str) -> Result<AreaExtent, GridError> {
        self.names
            .iter()
            .find(|n| ident_eq(&n.name, name))
            .map(|n| n.target.clone())
            .ok_or_else(|| GridError::UnknownName(name.to_string()))
    }

    pub fn define_name(&mut self, name: impl Into<String>, target: AreaExtent) {
        let name = name.into();
        self.names.retain(|n| !ident_eq(&n.name, &name));
        self.names.push(NameDef { name, target });
    }

    /// Populates a fresh sheet from CSV, row-major from A1. Fields
    /// beginning with `=` become formulas, numeric literals numbers,
    /// empty fields blanks, everything else text.
    pub fn ingest_csv(&mut self, path: &Path, sheet: &str) -> Result<(), GridError> {
        if self.has_sheet(sheet) {
            return Err(GridError::SheetExists(sheet.to_string()));
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_path(path)?;
        self.ensure_sheet(sheet);
        for (row_idx, record) in reader.records().enumerate() {
            let record = record?;
            for (col_idx, field) in record.iter().enumerate() {
                let content = classify_csv_field(field);
                if !content.is_blank() {
                    self.set_cell(sheet, row_idx as u32 + 1, col_idx as u32 + 1, content)?;
                }
            }
        }
        Ok(())
    }

    /// Parses one SWT document.
    pub fn load_str(id: &str, text: &str, path: &str) -> Result<Workbook, GridError> {
        let mut wb = Workbook::new(id);
        let mut pending_names: Vec<(usize, String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: String| GridError::Parse {
                path: path.to_string(),
                line: line_no,
                msg,
            };
            if let Some(rest) = line.strip_prefix("@name ") {
                let (name, target) = rest
                    .split_once(":=")
                    .ok_or_else(|| perr("expected ':=' in @name record".into()))?;
                pending_names.push((
                    line_no,
                    name.trim().to_string(),
                    target.trim().to_string(),
                ));
                continue;
            }
            let (addr_part, payload) = split_record(line)
                .ok_or_else(|| perr("expected '<Sheet>!<cell> := <payload>'".into()))?;
            let (sheet, cell_text) = split_sheet_prefix(addr_part)
                .ok_or_else(|| perr(format!("malformed address {addr_part:?}")))?;
            let (row, col) =
                parse_a1_cell(&cell_text).map_err(|e| perr(format!("bad cell address: {e}")))?;
            if wb
                .sheet(&sheet)
                .is_some_and(|g| g.cells.contains_key(&(row, col)))
            {
                return Err(GridError::DuplicateCell {
                    path: path.to_string(),
                    line: line_no,
                    cell: format!("{}!{}{}", sheet, crate::addr::col_to_letters(col), row),
                });
            }
            let content = parse_payload(payload.trim()).map_err(perr)?;
            if let CellContent::Formula(src) = &content {
                parse(src, Notation::A1).map_err(|e| GridError::BadFormula {
                    path: path.to_string(),
                    line: line_no,
                    source: e,
                })?;
            }
            wb.set_cell(&sheet, row, col, content)
                .map_err(|e| perr(e.to_string()))?;
        }
        for (line_no, name, target) in pending_names {
            let perr = |msg: String| GridError::Parse {
                path: path.to_string(),
                line: line_no,
                msg,
            };
            let (sheet, range_text) = split_sheet_prefix(&target)
                .ok_or_else(|| perr(format!("malformed name target {target:?}")))?;
            let (top, left, bottom, right) =
                parse_a1_range(&range_text).map_err(|e| perr(format!("bad range: {e}")))?;
            let extent = AreaExtent::new(id, sheet, top, left, bottom, right)
                .map_err(|e| perr(e.to_string()))?;
            wb.define_name(name, extent);
        }
        Ok(wb)
    }

    pub fn load_file(path: &Path) -> Result<Workbook, GridError> {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "workbook".to_string());
        let text = std::fs::read_to_string(path)?;
        Workbook::load_str(&id, &text, &path.display().to_string())
    }

    /// Canonical SWT text; two saves of equal workbooks are byte-identical.
    pub fn save_str(&self) -> String {
        let mut out = String::new();
        let mut names = self.names.clone();
        names.sort_by_key(|n| ident_fold(&n.name));
        for n in names {
            let _ = writeln!(
                out,
                "@name {} := {}",
                n.name,
                n.target.display_absolute()
            );
        }
        for (sheet, grid) in &self.sheets {
            for (&(row, col), content) in &grid.cells {
                let _ = writeln!(
                    out,
                    "{}!{}{} := {}",
                    quote_sheet(sheet),
                    crate::addr::col_to_letters(col),
                    row,
                    render_payload(content)
                );
            }
        }
        out
    }

    pub fn save_file(&self, path: &Path) -> Result<(), GridError> {
        std::fs::write(path, self.save_str())?;
        Ok(())
    }
}

/// A set of workbooks loaded from a directory of `.swt` files.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WorkbookSet {
    pub books: Vec<Workbook>,
}

impl WorkbookSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of(books: Vec<Workbook>) -> Self {
        WorkbookSet { books }
    }

    pub fn load_dir(dir: &Path) -> Result<WorkbookSet, GridError> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "swt"))
            .collect();
        paths.sort();
        let mut books = Vec::new();
        for p in paths {
            books.push(Workbook::load_file(&p)?);
        }
        Ok(WorkbookSet { books })
    }

    pub fn save_dir(&self, dir: &Path) -> Result<(), GridError> {
        std::fs::create_dir_all(dir)?;
        for wb in &self.books {
            wb.save_file(&dir.join(format!("{}.swt", wb.id)))?;
        }
        Ok(())
    }

    pub fn book(&self, id: &str) -> Result<&Workbook, GridError> {
        self.books
            .iter()
            .find(|b| ident_eq(&b.id, id))
            .ok_or_else(|| GridError::UnknownWorkbook(id.to_string()))
    }

    pub fn book_mut(&mut self, id: &str) -> Result<&mut Workbook, GridError> {
        self.books
            .iter_mut()
            .find(|b| ident_eq(&b.id, id))
            .ok_or_else(|| GridError::UnknownWorkbook(id.to_string()))
    }

    pub fn has_book(&self, id: &str) -> bool {
        self.books.iter().any(|b| ident_eq(&b.id, id))
    }

    /// The sole workbook of a single-book set, used to default unqualified
    /// addresses.
    pub fn sole_book(&self) -> Result<&Workbook, GridError> {
        match self.books.len() {
            1 => Ok(&self.books[0]),
            _ => Err(GridError::AmbiguousWorkbook),
        }
    }

    pub fn cell(&self, addr: &CellAddr) -> CellContent {
        self.books
            .iter()
            .find(|b| ident_eq(&b.id, &addr.workbook))
            .map(|b| b.cell_at(addr))
            .unwrap_or(CellContent::Blank)
    }
}

fn classify_csv_field(field: &str) -> CellContent {
    if field.is_empty() {
        CellContent::Blank
    } else if field.starts_with('=') {
        CellContent::Formula(field.to_string())
    } else if let Some(n) = parse_numeric_literal(field) {
        CellContent::Number(n)
    } else {
        CellContent::Text(field.to_string())
    }
}

/// Strict numeric-literal grammar: no `inf`/`NaN`, no stray text.
fn parse_numeric_literal(s: &str) -> Option<f64> {
    let t = s.trim();
    let body = t.strip_prefix('-').unwrap_or(t);
    let body = body.strip_prefix('+').unwrap_or(body);
    if body.is_empty() {
        return None;
    }
    let mut digits = false;
    let mut dot = false;
    let mut exp = false;
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '0'..='9' => digits = true,
            '.' if !dot && !exp => dot = true,
            'e' | 'E' if digits && !exp => {
                exp = true;
                if matches!(chars.peek(), Some('+') | Some('-')) {
                    chars.next();
                }
                match chars.peek() {
                    Some(d) if d.is_ascii_digit() => {}
                    _ => return None,
                }
            }
            _ => return None,
        }
    }
    if !digits {
        return None;
    }
    let v: f64 = t.parse().ok()?;
    // Normalize -0 so equal workbooks save identical bytes.
    Some(if v == 0.0 { 0.0 } else { v })
}

fn render_payload(content: &CellContent) -> String {
    match content {
        CellContent::Blank => String::new(),
        CellContent::Number(n) => format!("{n}"),
        CellContent::Text(t) => format!("\"{}\"", t.replace('"', "\"\"")),
        CellContent::Formula(src) => src.clone(),
    }
}

fn parse_payload(payload: &str) -> Result<CellContent, String> {
    if payload.starts_with('=') {
        return Ok(CellContent::Formula(payload.to_string()));
    }
    if let Some(rest) = payload.strip_prefix('"') {
        let mut out = String::new();
        let mut chars = rest.chars().peekable();
        loop {
            match chars.next() {
                None => return Err("unterminated string payload".into()),
                Some('"') => {
                    if chars.peek() == Some(&'"') {
                        out.push('"');
                        chars.next();
                    } else if chars.next().is_some() {
                        return Err("trailing characters after string payload".into());
                    } else {
                        return Ok(CellContent::Text(out));
                    }
                }
                Some(c) => out.push(c),
            }
        }
    }
    parse_numeric_literal(payload)
        .map(CellContent::Number)
        .ok_or_else(|| format!("payload {payload:?} is not a number, string or formula"))
}

/// Splits `<addr> := <payload>` at the first `:=` outside quotes.
fn split_record(line: &str) -> Option<(&str, &str)> {
    let bytes = line.as_bytes();
    let mut in_quote = false;
    let mut i = 0;
    while i + 1 < bytes.len() {
        match bytes[i] {
            b'\'' => in_quote = !in_quote,
            b':' if !in_quote && bytes[i + 1] == b'=' => {
                return Some((line[..i].trim_end(), &line[i + 2..]));
            }
            _ => {}
        }
        i += 1;
    }
    None
}

/// Splits `Sheet!rest` or `'Quoted sheet'!rest`, unescaping quotes.
pub fn split_sheet_prefix(text: &str) -> Option<(String, String)> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix('\'') {
        let mut name = String::new();
        let mut chars = rest.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            if c == '\'' {
                if matches!(chars.peek(), Some((_, '\''))) {
                    name.push('\'');
                    chars.next();
                } else {
                    let after = &rest[i + 1..];
                    let after = after.strip_prefix('!')?;
                    return Some((name, after.to_string()));
                }
            } else {
                name.push(c);
            }
        }
        None
    } else {
        let bang = text.find('!')?;
        Some((text[..bang].to_string(), text[bang + 1..].to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_number_record() {
        let wb = Workbook::load_str("model", "Costs!D5 := 24\n", "t").unwrap();
        assert_eq!(wb.cell("Costs", 5, 4), CellContent::Number(24.0));
        assert_eq!(wb.cell("costs", 5, 4), CellContent::Number(24.0));
        assert_eq!(wb.cell("Costs", 1, 1), CellContent::Blank);
    }

    #[test]
    fn formula_record_survives_verbatim() {
        let src = "Costs!H5 := =ROUNDUP(H2/$D5,0)-SUM($G5:G5)\n";
        let wb = Workbook::load_str("model", src, "t").unwrap();
        assert_eq!(
            wb.cell("Costs", 5, 8),
            CellContent::Formula("=ROUNDUP(H2/$D5,0)-SUM($G5:G5)".into())
        );
        assert_eq!(wb.save_str(), src);
    }

    #[test]
    fn empty_file_is_empty_workbook() {
        let wb = Workbook::load_str("model", "", "t").unwrap();
        assert_eq!(wb.sheet_names().count(), 0);
        assert_eq!(wb.save_str(), "");
    }

    #[test]
    fn duplicate_cell_is_an_error() {
        let err = Workbook::load_str("m", "S!A1 := 1\nS!A1 := 2\n", "t").unwrap_err();
        assert!(matches!(err, GridError::DuplicateCell { line: 2, .. }));
    }

    #[test]
    fn malformed_record_reports_line() {
        let err = Workbook::load_str("m", "# ok\nS!A1 = 1\n", "t").unwrap_err();
        assert!(matches!(err, GridError::Parse { line: 2, .. }));
    }

    #[test]
    fn bad_formula_rejected_at_load() {
        let err = Workbook::load_str("m", "S!A1 := =SUM(\n", "t").unwrap_err();
        assert!(matches!(err, GridError::BadFormula { line: 1, .. }));
    }

    #[test]
    fn quoted_sheets_and_strings_round_trip() {
        let src = "'Qty Model 5'!A1 := \"he said \"\"hi\"\"\"\n";
        let wb = Workbook::load_str("m", src, "t").unwrap();
        assert_eq!(
            wb.cell("Qty Model 5", 1, 1),
            CellContent::Text("he said \"hi\"".into())
        );
        assert_eq!(wb.save_str(), src);
    }

    #[test]
    fn names_round_trip_and_resolve_case_insensitively() {
        let src = "@name PortsPerCard := Costs!$D$5:$D$6\nCosts!D5 := 24\n";
        let wb = Workbook::load_str("model", src, "t").unwrap();
        let target = wb.resolve_name("portspercard").unwrap();
        assert_eq!((target.top, target.left, target.bottom, target.right), (5, 4, 6, 4));
        assert!(matches!(
            wb.resolve_name("nothing"),
            Err(GridError::UnknownName(_))
        ));
        assert_eq!(wb.save_str(), src);
    }

    #[test]
    fn csv_ingestion() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "10,100\n=SUM(A1:B1),Year 1\n,5\n").unwrap();
        let mut wb = Workbook::new("m");
        wb.ingest_csv(&p, "Data").unwrap();
        assert_eq!(wb.cell("Data", 1, 1), CellContent::Number(10.0));
        assert_eq!(wb.cell("Data", 1, 2), CellContent::Number(100.0));
        assert_eq!(
            wb.cell("Data", 2, 1),
            CellContent::Formula("=SUM(A1:B1)".into())
        );
        assert_eq!(wb.cell("Data", 2, 2), CellContent::Text("Year 1".into()));
        assert_eq!(wb.cell("Data", 3, 1), CellContent::Blank);
        assert_eq!(wb.cell("Data", 3, 2), CellContent::Number(5.0));
        assert!(matches!(
            wb.ingest_csv(&p, "data"),
            Err(GridError::SheetExists(_))
        ));
    }

    #[test]
    fn canonical_save_sorts_records() {
        let mut wb = Workbook::new("m");
        wb.set_cell("S", 2, 1, CellContent::Number(2.0)).unwrap();
        wb.set_cell("S", 1, 2, CellContent::Number(1.5)).unwrap();
        wb.set_cell("S", 1, 1, CellContent::Number(1.0)).unwrap();
        assert_eq!(wb.save_str(), "S!A1 := 1\nS!B1 := 1.5\nS!A2 := 2\n");
    }

    #[test]
    fn set_blank_removes_storage() {
        let mut wb = Workbook::new("m");
        wb.set_cell("S", 1, 1, CellContent::Number(1.0)).unwrap();
        wb.set_cell("S", 1, 1, CellContent::Blank).unwrap();
        assert_eq!(wb.save_str(), "");
        assert!(wb.has_sheet("S"));
    }
}
