//! Trace breakdown: one row per function call, reference and literal in
//! source order, labeled with its reference type and the bracket nesting
//! level at the start of its span.

use super::parse::{parse_with_trace, ParseError};
use super::{Notation, RefBody, Reference};

/// One row of a formula breakdown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub ref_type: String,
    pub value_text: String,
    pub nesting_level: u32,
    /// Byte range of the value in the source text.
    pub span: (usize, usize),
}

/// Breaks a formula down into trace rows. Rows appear in source order;
/// the row count equals the number of leaves plus function-call nodes.
pub fn breakdown(source: &str, notation: Notation) -> Result<Vec<TraceRow>, ParseError> {
    Ok(parse_with_trace(source, notation)?.1)
}

/// Classifies a reference by its dollaring, e.g. `Mixed Range` or
/// `Off Sheet, Relative Single Cell`.
pub fn reference_type_label(r: &Reference) -> String {
    let base = match &r.body {
        RefBody::Cell(c) => match (c.col.is_absolute(), c.row.is_absolute()) {
            (true, true) => "Absolute Single Cell",
            (false, false) => "Relative Single Cell",
            _ => "Mixed Single Cell",
        },
        RefBody::Range(a, b) => {
            let marks = [
                a.col.is_absolute(),
                a.row.is_absolute(),
                b.col.is_absolute(),
                b.row.is_absolute(),
            ];
            if marks.iter().all(|m| *m) {
                "Absolute Range"
            } else if marks.iter().all(|m| !*m) {
                "Relative Range"
            } else {
                "Mixed Range"
            }
        }
        RefBody::Name(_) => "Name",
        RefBody::RefError => "Invalid Reference",
    };
    if r.sheet.is_some() || r.workbook.is_some() {
        format!("Off Sheet, {base}")
    } else {
        base.to_string()
    }
}

/// Builder node the parser collects while scanning; spans of function
/// calls are patched once the closing parenthesis is consumed.
#[derive(Debug)]
pub(super) struct TraceNode {
    label: String,
    start: usize,
    end: usize,
    depth: u32,
}

impl TraceNode {
    pub(super) fn number(start: usize, end: usize, depth: u32) -> Self {
        TraceNode {
            label: "Number".to_string(),
            start,
            end,
            depth,
        }
    }

    pub(super) fn text(start: usize, end: usize, depth: u32) -> Self {
        TraceNode {
            label: "Text".to_string(),
            start,
            end,
            depth,
        }
    }

    pub(super) fn boolean(start: usize, end: usize, depth: u32) -> Self {
        TraceNode {
            label: "Boolean".to_string(),
            start,
            end,
            depth,
        }
    }

    pub(super) fn function(start: usize, end: usize, depth: u32) -> Self {
        TraceNode {
            label: "Worksheet Function".to_string(),
            start,
            end,
            depth,
        }
    }

    pub(super) fn reference(start: usize, end: usize, depth: u32, r: &Reference) -> Self {
        TraceNode {
            label: reference_type_label(r),
            start,
            end,
            depth,
        }
    }

    pub(super) fn set_end(&mut self, end: usize) {
        self.end = end;
    }

    pub(super) fn into_row(self, source: &str) -> TraceRow {
        TraceRow {
            ref_type: self.label,
            value_text: source[self.start..self.end].to_string(),
            nesting_level: self.depth,
            span: (self.start, self.end),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_style_breakdown() {
        let rows = breakdown("=MAX(0,J7-SUM($N7:P7))", Notation::A1).unwrap();
        let summary: Vec<(&str, &str, u32)> = rows
            .iter()
            .map(|r| (r.ref_type.as_str(), r.value_text.as_str(), r.nesting_level))
            .collect();
        assert_eq!(
            summary,
            vec![
                ("Worksheet Function", "MAX(0,J7-SUM($N7:P7))", 0),
                ("Number", "0", 1),
                ("Relative Single Cell", "J7", 1),
                ("Worksheet Function", "SUM($N7:P7)", 1),
                ("Mixed Range", "$N7:P7", 2),
            ]
        );
    }

    #[test]
    fn off_sheet_rows() {
        let rows = breakdown("=Q4*Qty_Model_5!I7", Notation::A1).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].ref_type, "Relative Single Cell");
        assert_eq!(rows[0].value_text, "Q4");
        assert_eq!(rows[1].ref_type, "Off Sheet, Relative Single Cell");
        assert_eq!(rows[1].value_text, "Qty_Model_5!I7");
        assert_eq!(rows[0].nesting_level, 0);
    }

    #[test]
    fn single_literal() {
        let rows = breakdown("=1", Notation::A1).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].ref_type, "Number");
        assert_eq!(rows[0].nesting_level, 0);
    }

    #[test]
    fn grouping_parens_count_toward_nesting() {
        let rows = breakdown("=N17*(1-$M17)", Notation::A1).unwrap();
        let levels: Vec<u32> = rows.iter().map(|r| r.nesting_level).collect();
        assert_eq!(levels, vec![0, 1, 1]);
    }

    #[test]
    fn row_count_matches_leaves_plus_calls() {
        let rows = breakdown("=IF(A1>2,SUM(B1:B9),\"n/a\")", Notation::A1).unwrap();
        // IF, A1, 2, SUM, B1:B9, "n/a"
        assert_eq!(rows.len(), 6);
    }
}
