use std::cmp::Ordering;

use crate::query::{CompareOp, FilterExpr, Operand};
use crate::rdf::vocab::is_numeric_datatype;
use crate::rdf::Term;

use super::Solution;

/// Three-valued evaluation: `None` is a SPARQL evaluation error, which a
/// FILTER treats as false.
pub fn eval_filter(e: &FilterExpr, row: &Solution) -> Option<bool> {
    match e {
        FilterExpr::Compare(op, a, b) => compare(*op, operand(a, row)?, operand(b, row)?),
        FilterExpr::And(a, b) => match (eval_filter(a, row), eval_filter(b, row)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        FilterExpr::Or(a, b) => match (eval_filter(a, row), eval_filter(b, row)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        FilterExpr::Not(a) => eval_filter(a, row).map(|v| !v),
    }
}

fn operand<'a>(o: &'a Operand, row: &'a Solution) -> Option<&'a Term> {
    match o {
        Operand::Var(v) => row.get(v),
        Operand::Const(t) => Some(t),
    }
}

/// Numeric value of a literal with an xsd numeric datatype.
pub fn numeric_value(t: &Term) -> Option<f64> {
    let lit = t.as_literal()?;
    if !is_numeric_datatype(lit.effective_datatype()) {
        return None;
    }
    lit.lexical().trim().parse::<f64>().ok().filter(|v| !v.is_nan())
}

fn compare(op: CompareOp, a: &Term, b: &Term) -> Option<bool> {
    let numeric = match (a.as_literal(), b.as_literal()) {
        (Some(x), Some(y)) => {
            is_numeric_datatype(x.effective_datatype()) && is_numeric_datatype(y.effective_datatype())
        }
        _ => false,
    };
    let ord = if numeric {
        numeric_value(a)?.partial_cmp(&numeric_value(b)?)?
    } else {
        match op {
            CompareOp::Eq => return Some(a == b),
            CompareOp::Ne => return Some(a != b),
            _ => lexical_order(a, b)?,
        }
    };
    Some(match op {
        CompareOp::Eq => ord == Ordering::Equal,
        CompareOp::Ne => ord != Ordering::Equal,
        CompareOp::Lt => ord == Ordering::Less,
        CompareOp::Le => ord != Ordering::Greater,
        CompareOp::Gt => ord == Ordering::Greater,
        CompareOp::Ge => ord != Ordering::Less,
    })
}

/// Ordering of two non-numeric terms of the same kind by their string value.
fn lexical_order(a: &Term, b: &Term) -> Option<Ordering> {
    if a.kind() != b.kind() || matches!(a, Term::Blank(_)) {
        return None;
    }
    Some(a.value().cmp(b.value()))
}
