//! Canonical formula rendering. Function names and column letters come out
//! uppercase, argument commas carry no spaces, and grouping parentheses are
//! reproduced exactly where `Paren` nodes sit, so `parse(render(ast))`
//! yields an equal tree.

use super::{Ast, CellRef, RefBody, RefCoord, Reference, UnaryOp};
use crate::addr::col_to_letters;
use std::fmt::Write;

/// Renders a tree without the leading `=`.
pub fn render(ast: &Ast) -> String {
    let mut out = String::new();
    write_ast(&mut out, ast);
    out
}

/// Renders a tree as a cell formula, `=` included.
pub fn render_formula(ast: &Ast) -> String {
    format!("={}", render(ast))
}

fn write_ast(out: &mut String, ast: &Ast) {
    match ast {
        Ast::Number(n) => {
            let _ = write!(out, "{n}");
        }
        Ast::Text(t) => {
            out.push('"');
            out.push_str(&t.replace('"', "\"\""));
            out.push('"');
        }
        Ast::Bool(b) => out.push_str(if *b { "TRUE" } else { "FALSE" }),
        Ast::Ref(r) => out.push_str(&render_reference(r)),
        Ast::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_ast(out, a);
            }
            out.push(')');
        }
        Ast::Unary(UnaryOp::Neg, a) => {
            out.push('-');
            write_ast(out, a);
        }
        Ast::Unary(UnaryOp::Plus, a) => {
            out.push('+');
            write_ast(out, a);
        }
        Ast::Unary(UnaryOp::Percent, a) => {
            write_ast(out, a);
            out.push('%');
        }
        Ast::Binary(op, l, r) => {
            write_ast(out, l);
            out.push_str(op.symbol());
            write_ast(out, r);
        }
        Ast::Paren(a) => {
            out.push('(');
            write_ast(out, a);
            out.push(')');
        }
    }
}

/// Renders one reference, qualifiers included.
pub fn render_reference(r: &Reference) -> String {
    let mut out = String::new();
    write_qualifier(&mut out, r);
    match &r.body {
        RefBody::Cell(c) => write_cellref(&mut out, c),
        RefBody::Range(a, b) => {
            write_cellref(&mut out, a);
            out.push(':');
            write_cellref(&mut out, b);
        }
        RefBody::Name(n) => out.push_str(n),
        RefBody::RefError => out.push_str("#REF!"),
    }
    out
}

fn write_qualifier(out: &mut String, r: &Reference) {
    match (&r.workbook, &r.sheet) {
        (None, None) => {}
        (None, Some(sheet)) => {
            if plain_sheet_ident(sheet) {
                out.push_str(sheet);
            } else {
                quote_into(out, sheet);
            }
            out.push('!');
        }
        (Some(book), Some(sheet)) => {
            if plain_sheet_ident(sheet) && !book.contains(']') && !book.contains('\'') {
                let _ = write!(out, "[{book}]{sheet}");
            } else {
                quote_into(out, &format!("[{book}]{sheet}"));
            }
            out.push('!');
        }
        // A workbook qualifier never appears without a sheet; render it
        // quoted so the text at least survives a round trip as a name.
        (Some(book), None) => {
            quote_into(out, &format!("[{book}]"));
            out.push('!');
        }
    }
}

fn quote_into(out: &mut String, s: &str) {
    out.push('\'');
    out.push_str(&s.replace('\'', "''"));
    out.push('\'');
}

fn plain_sheet_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn write_cellref(out: &mut String, c: &CellRef) {
    // A1 coordinates print column-first; R1C1 prints row-first.
    match (c.col, c.row) {
        (RefCoord::A1 { index: ci, abs: ca }, RefCoord::A1 { index: ri, abs: ra }) => {
            if ca {
                out.push('$');
            }
            out.push_str(&col_to_letters(ci));
            if ra {
                out.push('$');
            }
            let _ = write!(out, "{ri}");
        }
        (col, row) => {
            out.push('R');
            write_r1c1_part(out, row);
            out.push('C');
            write_r1c1_part(out, col);
        }
    }
}

fn write_r1c1_part(out: &mut String, c: RefCoord) {
    match c {
        RefCoord::Abs(n) => {
            let _ = write!(out, "{n}");
        }
        RefCoord::Rel(0) => {}
        RefCoord::Rel(n) => {
            let _ = write!(out, "[{n}]");
        }
        RefCoord::A1 { index, abs } => {
            // Mixed-notation cell refs never come out of the parser; keep
            // the output parseable regardless.
            if abs {
                let _ = write!(out, "{index}");
            } else {
                let _ = write!(out, "[{index}]");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Notation};
    use super::*;

    fn round_trip(src: &str, notation: Notation) {
        let ast = parse(src, notation).unwrap();
        let printed = render(&ast);
        let reparsed = parse(&printed, notation).unwrap();
        assert_eq!(ast, reparsed, "round trip of {src:?} via {printed:?}");
    }

    #[test]
    fn canonical_examples_round_trip() {
        for src in [
            "=ROUNDUP(H2/$D5,0)-SUM($G5:G5)",
            "=MAX(0,J7-SUM($N7:P7))",
            "=Q4*Qty_Model_5!I7",
            "=1+2",
            "=\"Cost of Cards \"&$E3",
            "=N17*(1-$M17)",
            "=H$2",
            "=(1+2)*3",
            "=-2^2",
            "=10%",
            "=A1<=B2",
            "=[model2]Costs!A1*'Qty Model 5'!B2",
            "=IF(TRUE,1,0)",
        ] {
            round_trip(src, Notation::A1);
        }
        round_trip("=ROUNDUP(R[-3]C/RC4,0)-SUM(RC7:RC[-1])", Notation::R1C1);
        round_trip("=R1C1+RC", Notation::R1C1);
    }

    #[test]
    fn canonical_output_forms() {
        let ast = parse("=roundup(h2/$d5, 0) - sum($g5:g5)", Notation::A1).unwrap();
        assert_eq!(render_formula(&ast), "=ROUNDUP(H2/$D5,0)-SUM($G5:G5)");
        assert_eq!(render(&parse("0", Notation::A1).unwrap()), "0");
        assert_eq!(render(&parse("=2.50", Notation::A1).unwrap()), "2.5");
    }

    #[test]
    fn quoted_sheet_rendering() {
        let ast = parse("='Qty Model 5'!I7", Notation::A1).unwrap();
        assert_eq!(render(&ast), "'Qty Model 5'!I7");
    }
}
