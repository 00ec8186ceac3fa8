//! Recursive-descent formula parser for A1 and R1C1 notation.
//!
//! Precedence, loosest to tightest: comparisons, `&`, `+`/`-`, `*`/`/`,
//! `^`, unary sign, postfix `%`. The range `:` only occurs inside
//! references, where it binds tightest. Explicit parentheses become
//! `Paren` nodes so rendering reproduces the source grouping.

use super::trace::{TraceNode, TraceRow};
use super::{Ast, BinaryOp, CellRef, Notation, RefBody, RefCoord, Reference, UnaryOp};
use crate::addr::{letters_to_col, MAX_COL, MAX_ROW};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("formula syntax error at offset {offset}: {msg}")]
pub struct ParseError {
    pub offset: usize,
    pub msg: String,
}

/// Parses a formula (with or without the leading `=`) into an AST.
pub fn parse(source: &str, notation: Notation) -> Result<Ast, ParseError> {
    Ok(parse_with_trace(source, notation)?.0)
}

/// Parses and returns the trace rows collected in source order: one row
/// per function call, reference and literal, with bracket nesting levels.
pub(super) fn parse_with_trace(
    source: &str,
    notation: Notation,
) -> Result<(Ast, Vec<TraceRow>), ParseError> {
    let mut p = Parser::new(source, notation);
    p.skip_ws();
    if p.peek() == Some(b'=') {
        p.pos += 1;
    }
    p.skip_ws();
    let ast = p.parse_cmp()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    let rows = p
        .nodes
        .into_iter()
        .map(|n| n.into_row(source))
        .collect();
    Ok((ast, rows))
}

/// Parses a single reference, as used in registry records. R1C1 is tried
/// first (registry references are R1C1); `$`-marked A1 forms fall back to
/// the A1 grammar. A bare identifier parses as a name reference.
pub fn parse_reference(text: &str) -> Result<Reference, ParseError> {
    let as_single_ref = |notation| -> Result<Reference, ParseError> {
        let mut p = Parser::new(text, notation);
        p.skip_ws();
        let r = p
            .try_parse_reference()
            .ok_or_else(|| p.err("expected a reference"))?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(r)
    };
    as_single_ref(Notation::R1C1).or_else(|e| as_single_ref(Notation::A1).map_err(|_| e))
}

struct Parser<'a> {
    src: &'a str,
    notation: Notation,
    pos: usize,
    depth: u32,
    nodes: Vec<TraceNode>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, notation: Notation) -> Self {
        Parser {
            src,
            notation,
            pos: 0,
            depth: 0,
            nodes: Vec::new(),
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            offset: self.pos,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.err(format!("expected {:?}", b as char)))
        }
    }

    // -- expression levels ---------------------------------------------

    fn parse_cmp(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.parse_concat()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'=') => {
                    self.pos += 1;
                    BinaryOp::Eq
                }
                Some(b'<') => {
                    self.pos += 1;
                    if self.eat(b'>') {
                        BinaryOp::Ne
                    } else if self.eat(b'=') {
                        BinaryOp::Le
                    } else {
                        BinaryOp::Lt
                    }
                }
                Some(b'>') => {
                    self.pos += 1;
                    if self.eat(b'=') {
                        BinaryOp::Ge
                    } else {
                        BinaryOp::Gt
                    }
                }
                _ => break,
            };
            let rhs = self.parse_concat()?;
            lhs = Ast::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_concat(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.parse_add()?;
        loop {
            self.skip_ws();
            if self.eat(b'&') {
                let rhs = self.parse_add()?;
                lhs = Ast::Binary(BinaryOp::Concat, Box::new(lhs), Box::new(rhs));
            } else {
                break;
            }
        }
        Ok(lhs)
    }

    fn parse_add(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.parse_mul()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.parse_mul()?;
            lhs = Ast::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_mul(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.parse_pow()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.parse_pow()?;
            lhs = Ast::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_pow(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            self.skip_ws();
            if self.eat(b'^') {
                let rhs = self.parse_unary()?;
                lhs = Ast::Binary(BinaryOp::Pow, Box::new(lhs), Box::new(rhs));
            } else {
                break;
            }
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Ast, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Ast::Unary(UnaryOp::Neg, Box::new(self.parse_unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                Ok(Ast::Unary(UnaryOp::Plus, Box::new(self.parse_unary()?)))
            }
            _ => self.parse_postfix(),
        }
    }

    fn parse_postfix(&mut self) -> Result<Ast, ParseError> {
        let mut e = self.parse_primary()?;
        loop {
            self.skip_ws();
            if self.eat(b'%') {
                e = Ast::Unary(UnaryOp::Percent, Box::new(e));
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn parse_primary(&mut self) -> Result<Ast, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.err("unexpected end of formula")),
            Some(b'(') => {
                self.pos += 1;
                self.depth += 1;
                let inner = self.parse_cmp()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.err("unbalanced parentheses: expected ')'"));
                }
                self.depth -= 1;
                Ok(Ast::Paren(Box::new(inner)))
            }
            Some(b'"') => {
                let start = self.pos;
                let text = self.parse_string()?;
                self.nodes
                    .push(TraceNode::text(start, self.pos, self.depth));
                Ok(Ast::Text(text))
            }
            Some(b'#') => {
                let start = self.pos;
                let rest = &self.src[self.pos..];
                if rest.len() >= 5 && rest[..5].eq_ignore_ascii_case("#REF!") {
                    self.pos += 5;
                    let r = Reference::local(RefBody::RefError);
                    self.nodes
                        .push(TraceNode::reference(start, self.pos, self.depth, &r));
                    Ok(Ast::Ref(r))
                } else {
                    Err(self.err("unknown error literal"))
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                let n = self.parse_number()?;
                self.nodes
                    .push(TraceNode::number(start, self.pos, self.depth));
                Ok(Ast::Number(n))
            }
            _ => self.parse_ref_call_or_name(),
        }
    }

    fn parse_string(&mut self) -> Result<String, ParseError> {
        self.expect(b'"')?;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(self.err("unterminated string literal")),
                Some(b'"') => {
                    self.pos += 1;
                    if self.peek() == Some(b'"') {
                        out.push('"');
                        self.pos += 1;
                    } else {
                        return Ok(out);
                    }
                }
                Some(_) => {
                    let c = self.src[self.pos..].chars().next().unwrap();
                    out.push(c);
                    self.pos += c.len_utf8();
                }
            }
        }
    }

    fn parse_number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.eat(b'.') {
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if self.pos == start || self.src[start..self.pos] == *"." {
            return Err(self.err("malformed number"));
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // `1e` is the number 1 followed by an ident
            }
        }
        self.src[start..self.pos]
            .parse::<f64>()
            .map_err(|_| self.err("malformed number"))
    }

    fn parse_ref_call_or_name(&mut self) -> Result<Ast, ParseError> {
        let start = self.pos;
        if let Some(r) = self.try_parse_reference() {
            self.nodes
                .push(TraceNode::reference(start, self.pos, self.depth, &r));
            return Ok(Ast::Ref(r));
        }
        self.pos = start;
        let ident = self
            .parse_ident()
            .ok_or_else(|| self.err("expected a value, reference or function"))?;
        if self.peek() == Some(b'(') {
            let node_idx = self.nodes.len();
            self.nodes
                .push(TraceNode::function(start, start, self.depth));
            self.pos += 1;
            self.depth += 1;
            let mut args = Vec::new();
            self.skip_ws();
            if !self.eat(b')') {
                loop {
                    args.push(self.parse_cmp()?);
                    self.skip_ws();
                    if self.eat(b',') {
                        continue;
                    }
                    if self.eat(b')') {
                        break;
                    }
                    return Err(self.err("expected ',' or ')' in argument list"));
                }
            }
            self.depth -= 1;
            self.nodes[node_idx].set_end(self.pos);
            return Ok(Ast::Call(ident.to_ascii_uppercase(), args));
        }
        if ident.eq_ignore_ascii_case("TRUE") {
            self.nodes
                .push(TraceNode::boolean(start, self.pos, self.depth));
            return Ok(Ast::Bool(true));
        }
        if ident.eq_ignore_ascii_case("FALSE") {
            self.nodes
                .push(TraceNode::boolean(start, self.pos, self.depth));
            return Ok(Ast::Bool(false));
        }
        let r = Reference::local(RefBody::Name(ident));
        self.nodes
            .push(TraceNode::reference(start, self.pos, self.depth, &r));
        Ok(Ast::Ref(r))
    }

    fn parse_ident(&mut self) -> Option<String> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.pos += 1,
            _ => return None,
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_' || c == b'.')
        {
            self.pos += 1;
        }
        Some(self.src[start..self.pos].to_string())
    }

    // -- references ------------------------------------------------------

    /// Attempts a full reference (with optional qualifiers) at the current
    /// position; restores the position and returns `None` on failure.
    fn try_parse_reference(&mut self) -> Option<Reference> {
        let start = self.pos;
        match self.parse_reference_inner() {
            Some(r) => Some(r),
            None => {
                self.pos = start;
                None
            }
        }
    }

    fn parse_reference_inner(&mut self) -> Option<Reference> {
        let (workbook, sheet) = self.parse_qualifier()?;
        if let Some(first) = self.try_endpoint() {
            let body = if self.peek() == Some(b':') {
                let mark = self.pos;
                self.pos += 1;
                match self.try_endpoint() {
                    Some(second) => RefBody::Range(first, second),
                    None => {
                        self.pos = mark;
                        RefBody::Cell(first)
                    }
                }
            } else {
                RefBody::Cell(first)
            };
            return Some(Reference {
                workbook,
                sheet,
                body,
            });
        }
        // A qualified bare identifier is a (sheet-scoped) name reference.
        if sheet.is_some() || workbook.is_some() {
            let name = self.parse_ident()?;
            if self.peek() == Some(b'(') {
                return None;
            }
            return Some(Reference {
                workbook,
                sheet,
                body: RefBody::Name(name),
            });
        }
        None
    }

    /// Parses `[book]Sheet!`, `Sheet!`, `'[book]Sheet name'!` or nothing.
    /// Returns `None` only on a malformed qualifier that cannot backtrack
    /// to something else (handled by the caller's rollback).
    fn parse_qualifier(&mut self) -> Option<(Option<String>, Option<String>)> {
        match self.peek() {
            Some(b'\'') => {
                let unit = self.parse_quoted()?;
                if !self.eat(b'!') {
                    return None;
                }
                if let Some(rest) = unit.strip_prefix('[') {
                    let (book, sheet) = rest.split_once(']')?;
                    Some((Some(book.to_string()), Some(sheet.to_string())))
                } else {
                    Some((None, Some(unit)))
                }
            }
            Some(b'[') => {
                self.pos += 1;
                let end = self.src[self.pos..].find(']')?;
                let book = self.src[self.pos..self.pos + end].to_string();
                if book.is_empty() {
                    return None;
                }
                self.pos += end + 1;
                let sheet = self.parse_ident()?;
                if !self.eat(b'!') {
                    return None;
                }
                Some((Some(book), Some(sheet)))
            }
            _ => {
                let mark = self.pos;
                if let Some(ident) = self.parse_ident() {
                    if self.eat(b'!') {
                        return Some((None, Some(ident)));
                    }
                }
                self.pos = mark;
                Some((None, None))
            }
        }
    }

    fn parse_quoted(&mut self) -> Option<String> {
        if !self.eat(b'\'') {
            return None;
        }
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return None,
                Some(b'\'') => {
                    self.pos += 1;
                    if self.peek() == Some(b'\'') {
                        out.push('\'');
                        self.pos += 1;
                    } else {
                        return Some(out);
                    }
                }
                Some(_) => {
                    let c = self.src[self.pos..].chars().next().unwrap();
                    out.push(c);
                    self.pos += c.len_utf8();
                }
            }
        }
    }

    fn try_endpoint(&mut self) -> Option<CellRef> {
        let start = self.pos;
        let r = match self.notation {
            Notation::A1 => self.a1_endpoint(),
            Notation::R1C1 => self.r1c1_endpoint(),
        };
        match r {
            Some(cell) => {
                // A longer identifier (e.g. `A1B`) is a name, not a cell.
                if matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_' || c == b'.')
                {
                    self.pos = start;
                    None
                } else {
                    Some(cell)
                }
            }
            None => {
                self.pos = start;
                None
            }
        }
    }

    fn a1_endpoint(&mut self) -> Option<CellRef> {
        let col_abs = self.eat(b'$');
        let letter_start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            self.pos += 1;
            if self.pos - letter_start > 3 {
                return None;
            }
        }
        let col = letters_to_col(&self.src[letter_start..self.pos])?;
        let row_abs = self.eat(b'$');
        let digit_start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let row: u32 = self.src[digit_start..self.pos].parse().ok()?;
        if row < 1 || row > MAX_ROW {
            return None;
        }
        Some(CellRef {
            row: RefCoord::A1 {
                index: row,
                abs: row_abs,
            },
            col: RefCoord::A1 {
                index: col,
                abs: col_abs,
            },
        })
    }

    fn r1c1_endpoint(&mut self) -> Option<CellRef> {
        if !matches!(self.peek(), Some(b'R') | Some(b'r')) {
            return None;
        }
        self.pos += 1;
        let row = self.r1c1_part(MAX_ROW)?;
        if !matches!(self.peek(), Some(b'C') | Some(b'c')) {
            return None;
        }
        self.pos += 1;
        let col = self.r1c1_part(MAX_COL)?;
        Some(CellRef { row, col })
    }

    fn r1c1_part(&mut self, max: u32) -> Option<RefCoord> {
        match self.peek() {
            Some(b'[') => {
                self.pos += 1;
                let neg = self.eat(b'-');
                if !neg {
                    let _ = self.eat(b'+');
                }
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let n: i64 = self.src[start..self.pos].parse().ok()?;
                if !self.eat(b']') || n >= max as i64 {
                    return None;
                }
                Some(RefCoord::Rel(if neg { -n as i32 } else { n as i32 }))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let n: u32 = self.src[start..self.pos].parse().ok()?;
                if n < 1 || n > max {
                    return None;
                }
                Some(RefCoord::Abs(n))
            }
            _ => Some(RefCoord::Rel(0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::render::render;
    use super::*;

    fn p(src: &str) -> Ast {
        parse(src, Notation::A1).unwrap()
    }

    #[test]
    fn parses_the_card_formula() {
        let ast = p("=ROUNDUP(H2/$D5,0)-SUM($G5:G5)");
        match &ast {
            Ast::Binary(BinaryOp::Sub, l, r) => {
                assert!(matches!(l.as_ref(), Ast::Call(name, _) if name == "ROUNDUP"));
                assert!(matches!(r.as_ref(), Ast::Call(name, _) if name == "SUM"));
            }
            other => panic!("unexpected shape: {other:?}"),
        }
        let refs = ast.references();
        assert_eq!(refs.len(), 3);
        let texts: Vec<String> = refs.iter().map(|r| super::super::render_reference(r)).collect();
        assert_eq!(texts, ["H2", "$D5", "$G5:G5"]);
    }

    #[test]
    fn plain_arithmetic_has_no_references() {
        let ast = p("=1+2");
        assert!(matches!(ast, Ast::Binary(BinaryOp::Add, _, _)));
        assert!(ast.references().is_empty());
    }

    #[test]
    fn nested_calls_and_mixed_range() {
        let ast = p("=MAX(0,J7-SUM($N7:P7))");
        let refs = ast.references();
        let texts: Vec<String> = refs.iter().map(|r| super::super::render_reference(r)).collect();
        assert_eq!(texts, ["J7", "$N7:P7"]);
    }

    #[test]
    fn off_sheet_and_workbook_references() {
        let ast = p("=Q4*Qty_Model_5!I7");
        let refs = ast.references();
        assert_eq!(refs.len(), 2);
        assert_eq!(refs[1].sheet.as_deref(), Some("Qty_Model_5"));

        let ast = p("=[model2]Costs!A1+'Qty Model 5'!B2");
        let refs = ast.references();
        assert_eq!(refs[0].workbook.as_deref(), Some("model2"));
        assert_eq!(refs[1].sheet.as_deref(), Some("Qty Model 5"));
    }

    #[test]
    fn r1c1_endpoints() {
        let ast = parse("=ROUNDUP(R[-3]C/RC4,0)-SUM(RC7:RC[-1])", Notation::R1C1).unwrap();
        assert_eq!(render(&ast), "ROUNDUP(R[-3]C/RC4,0)-SUM(RC7:RC[-1])");
        let ast = parse("=R1C1", Notation::R1C1).unwrap();
        assert!(matches!(
            ast,
            Ast::Ref(Reference {
                body: RefBody::Cell(CellRef {
                    row: RefCoord::Abs(1),
                    col: RefCoord::Abs(1)
                }),
                ..
            })
        ));
    }

    #[test]
    fn r1c1_in_a1_notation_is_a_name() {
        let ast = p("=R1C1");
        assert!(matches!(
            ast,
            Ast::Ref(Reference {
                body: RefBody::Name(ref n),
                ..
            }) if n == "R1C1"
        ));
    }

    #[test]
    fn booleans_strings_percent() {
        assert_eq!(p("=TRUE"), Ast::Bool(true));
        assert!(matches!(p("=\"a\"\"b\""), Ast::Text(t) if t == "a\"b"));
        assert!(matches!(
            p("=10%"),
            Ast::Unary(UnaryOp::Percent, _)
        ));
    }

    #[test]
    fn unary_minus_binds_tighter_than_power() {
        // -2^2 groups as (-2)^2
        let ast = p("=-2^2");
        assert!(matches!(ast, Ast::Binary(BinaryOp::Pow, ref l, _)
            if matches!(l.as_ref(), Ast::Unary(UnaryOp::Neg, _))));
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse("=SUM(A1", Notation::A1).unwrap_err();
        assert!(e.offset > 0);
        assert!(parse("=1+", Notation::A1).is_err());
        assert!(parse("=(1+2", Notation::A1).is_err());
        assert!(parse("=\"abc", Notation::A1).is_err());
    }

    #[test]
    fn ref_error_literal() {
        let ast = p("=SUM(#REF!)");
        assert_eq!(ast.references().len(), 1);
        assert!(matches!(
            ast.references()[0].body,
            RefBody::RefError
        ));
    }

    #[test]
    fn single_reference_parser() {
        assert!(matches!(
            parse_reference("RC4").unwrap().body,
            RefBody::Cell(_)
        ));
        assert!(matches!(
            parse_reference("$D5").unwrap().body,
            RefBody::Cell(_)
        ));
        assert!(matches!(
            parse_reference("PortsPerCard").unwrap().body,
            RefBody::Name(_)
        ));
    }
}
