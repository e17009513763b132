use std::fmt::Write;

use crate::kb::{PatternTerm, TriplePattern};
use crate::rdf::Term;

use super::ast::*;

/// Renders a query as text that parses back to the same AST. IRIs are
/// written in full; the prefix table is kept only for round-tripping.
pub fn to_query_string(q: &Query) -> String {
    let mut out = String::new();
    for (name, iri) in &q.prefixes {
        let _ = writeln!(out, "PREFIX {name}: <{iri}>");
    }
    match &q.form {
        QueryForm::Select(vars) => {
            out.push_str("SELECT");
            let aggs = q.group_by.as_ref().map(|g| g.aggregates.as_slice()).unwrap_or(&[]);
            for v in vars {
                match aggs.iter().find(|a| &a.out == v) {
                    Some(a) => {
                        let f = match a.func {
                            AggregateFn::Count => "COUNT",
                            AggregateFn::Avg => "AVG",
                        };
                        let _ = write!(out, " ({f}(?{}) AS ?{})", a.arg, a.out);
                    }
                    None => {
                        let _ = write!(out, " ?{v}");
                    }
                }
            }
            out.push('\n');
        }
        QueryForm::Construct(template) => {
            out.push_str("CONSTRUCT {");
            for p in template {
                let _ = write!(out, " {} .", pattern(p));
            }
            out.push_str(" }\n");
        }
    }
    out.push_str("WHERE ");
    out.push_str(&group(&q.body));
    if let Some(g) = &q.group_by {
        if !g.vars.is_empty() {
            out.push_str("\nGROUP BY");
            for v in &g.vars {
                let _ = write!(out, " ?{v}");
            }
        }
    }
    out.push('\n');
    out
}

fn term(t: &Term) -> String {
    t.to_string()
}

fn pterm(p: &PatternTerm) -> String {
    p.to_string()
}

fn pattern(p: &TriplePattern) -> String {
    format!("{} {} {}", pterm(&p.s), pterm(&p.p), pterm(&p.o))
}

fn group(e: &PatternExpr) -> String {
    let mut parts = Vec::new();
    let mut inner = e;
    let mut filters = Vec::new();
    if let PatternExpr::Filter(f, c) = e {
        filters.push(f);
        inner = c;
    }
    let mut prev_raw_bgp = false;
    for el in elements(inner) {
        let (text, raw_bgp) = match el {
            Elem::Plain(PatternExpr::Bgp(ps)) if !ps.is_empty() && !prev_raw_bgp => {
                (ps.iter().map(|p| format!("{} .", pattern(p))).collect::<Vec<_>>().join(" "), true)
            }
            Elem::Plain(PatternExpr::Bgp(ps)) if ps.is_empty() => ("{ }".to_string(), false),
            Elem::Plain(PatternExpr::Path(p)) => {
                let steps: Vec<String> = p
                    .steps
                    .iter()
                    .map(|s| {
                        let m = match s.modifier {
                            PathModifier::One => "",
                            PathModifier::ZeroOrMore => "*",
                            PathModifier::OneOrMore => "+",
                        };
                        format!("{}{m}", term(&s.predicate))
                    })
                    .collect();
                (format!("{} {} {} .", pterm(&p.s), steps.join("/"), pterm(&p.o)), false)
            }
            Elem::Plain(PatternExpr::Union(a, b)) => (format!("{} UNION {}", group(a), group(b)), false),
            Elem::Plain(PatternExpr::Service { endpoint, patterns }) => {
                let body: Vec<String> = patterns.iter().map(|p| format!("{} .", pattern(p))).collect();
                (format!("SERVICE <{endpoint}> {{ {} }}", body.join(" ")), false)
            }
            Elem::Plain(other) => (group(other), false),
            Elem::Optional(x) => (format!("OPTIONAL {}", group(x)), false),
        };
        parts.push(text);
        prev_raw_bgp = raw_bgp;
    }
    for f in filters {
        parts.push(format!("FILTER({})", filter(f)));
    }
    if parts.is_empty() {
        "{ }".to_string()
    } else {
        format!("{{ {} }}", parts.join(" "))
    }
}

enum Elem<'a> {
    Plain(&'a PatternExpr),
    Optional(&'a PatternExpr),
}

fn elements(e: &PatternExpr) -> Vec<Elem<'_>> {
    match e {
        PatternExpr::Join(a, b) => {
            let mut v = elements(a);
            v.push(Elem::Plain(b));
            v
        }
        PatternExpr::Optional(a, b) => {
            let mut v = elements(a);
            v.push(Elem::Optional(b));
            v
        }
        other => vec![Elem::Plain(other)],
    }
}

pub(crate) fn filter(f: &FilterExpr) -> String {
    match f {
        FilterExpr::Compare(op, a, b) => format!("{} {} {}", operand(a), op.symbol(), operand(b)),
        FilterExpr::And(a, b) => format!("({} && {})", filter(a), filter(b)),
        FilterExpr::Or(a, b) => format!("({} || {})", filter(a), filter(b)),
        FilterExpr::Not(a) => format!("!({})", filter(a)),
    }
}

fn operand(o: &Operand) -> String {
    match o {
        Operand::Var(v) => format!("?{v}"),
        Operand::Const(t) => term(t),
    }
}
