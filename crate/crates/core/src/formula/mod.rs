//! Formula language: lexing/parsing in A1 and R1C1 notation, canonical
//! rendering, notation conversion anchored at a cell, and the trace
//! breakdown used by reference analysis.

mod convert;
mod parse;
mod render;
mod trace;

pub use convert::{a1_to_r1c1, r1c1_to_a1, resolve_coord, ConvertError};
pub use parse::{parse, parse_reference, ParseError};
pub use render::{render, render_formula, render_reference};
pub use trace::{breakdown, reference_type_label, TraceRow};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Reference style a formula is written in. A formula is entirely in one
/// notation; conversion between the two is anchored at a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Notation {
    A1,
    R1C1,
}

/// One coordinate (row or column) of a cell reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RefCoord {
    /// A1-style 1-based index with its absolute (`$`) marker.
    A1 { index: u32, abs: bool },
    /// R1C1 absolute coordinate, written as a bare index.
    Abs(u32),
    /// R1C1 relative offset, written in brackets; zero renders as nothing.
    Rel(i32),
}

impl RefCoord {
    pub fn is_absolute(self) -> bool {
        match self {
            RefCoord::A1 { abs, .. } => abs,
            RefCoord::Abs(_) => true,
            RefCoord::Rel(_) => false,
        }
    }
}

/// Row/column coordinate pair of a single cell reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellRef {
    pub row: RefCoord,
    pub col: RefCoord,
}

/// What a reference points at, before qualifiers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RefBody {
    Cell(CellRef),
    Range(CellRef, CellRef),
    Name(String),
    /// A reference destroyed by a structural delete, rendered `#REF!`.
    RefError,
}

/// A reference leaf of a formula: optional workbook and sheet qualifiers
/// plus the cell/range/name body. Range endpoints share the one qualifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Reference {
    pub workbook: Option<String>,
    pub sheet: Option<String>,
    pub body: RefBody,
}

impl Reference {
    pub fn local(body: RefBody) -> Self {
        Reference {
            workbook: None,
            sheet: None,
            body,
        }
    }

    /// True when every coordinate component carries an absolute marker.
    pub fn fully_absolute(&self) -> bool {
        match &self.body {
            RefBody::Cell(c) => c.row.is_absolute() && c.col.is_absolute(),
            RefBody::Range(a, b) => {
                a.row.is_absolute()
                    && a.col.is_absolute()
                    && b.row.is_absolute()
                    && b.col.is_absolute()
            }
            RefBody::Name(_) => true,
            RefBody::RefError => true,
        }
    }
}

// References travel inside audit payloads as their rendered text.
impl Serialize for Reference {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&render_reference(self))
    }
}

impl<'de> Deserialize<'de> for Reference {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_reference(&text).map_err(|e| D::Error::custom(format!("bad reference: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Concat,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
            BinaryOp::Concat => "&",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "<>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Plus,
    /// Postfix percent.
    Percent,
}

/// Parsed formula tree. Explicit `Paren` nodes preserve the grouping the
/// author wrote, so printing then reparsing yields an equal tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Number(f64),
    Text(String),
    Bool(bool),
    Ref(Reference),
    Call(String, Vec<Ast>),
    Unary(UnaryOp, Box<Ast>),
    Binary(BinaryOp, Box<Ast>, Box<Ast>),
    Paren(Box<Ast>),
}

impl Ast {
    /// References in left-to-right source order, duplicates preserved.
    pub fn references(&self) -> Vec<&Reference> {
        let mut out = Vec::new();
        self.walk_refs(&mut |r| out.push(r));
        out
    }

    fn walk_refs<'a>(&'a self, visit: &mut impl FnMut(&'a Reference)) {
        match self {
            Ast::Ref(r) => visit(r),
            Ast::Call(_, args) => args.iter().for_each(|a| a.walk_refs(visit)),
            Ast::Unary(_, a) | Ast::Paren(a) => a.walk_refs(visit),
            Ast::Binary(_, l, r) => {
                l.walk_refs(visit);
                r.walk_refs(visit);
            }
            Ast::Number(_) | Ast::Text(_) | Ast::Bool(_) => {}
        }
    }

    /// Rebuilds the tree with every reference passed through `map`.
    pub fn map_refs<E>(
        &self,
        map: &mut impl FnMut(&Reference) -> Result<Reference, E>,
    ) -> Result<Ast, E> {
        Ok(match self {
            Ast::Ref(r) => Ast::Ref(map(r)?),
            Ast::Call(name, args) => Ast::Call(
                name.clone(),
                args.iter()
                    .map(|a| a.map_refs(map))
                    .collect::<Result<_, E>>()?,
            ),
            Ast::Unary(op, a) => Ast::Unary(*op, Box::new(a.map_refs(map)?)),
            Ast::Paren(a) => Ast::Paren(Box::new(a.map_refs(map)?)),
            Ast::Binary(op, l, r) => Ast::Binary(
                *op,
                Box::new(l.map_refs(map)?),
                Box::new(r.map_refs(map)?),
            ),
            Ast::Number(n) => Ast::Number(*n),
            Ast::Text(t) => Ast::Text(t.clone()),
            Ast::Bool(b) => Ast::Bool(*b),
        })
    }
}
