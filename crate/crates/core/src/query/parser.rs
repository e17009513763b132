use std::collections::BTreeMap;

use crate::kb::{PatternTerm, TriplePattern};
use crate::rdf::vocab::{RDF_TYPE, XSD_DECIMAL, XSD_INTEGER};
use crate::rdf::Term;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::QueryError;

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, prefixes: BTreeMap::new() };
    let q = p.query()?;
    validate(&q)?;
    Ok(q)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    prefixes: BTreeMap<String, String>,
}

enum Element {
    Plain(PatternExpr),
    Optional(PatternExpr),
}

enum Verb {
    Simple(PatternTerm),
    Path(Vec<PathStep>),
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, msg: impl Into<String>) -> QueryError {
        let t = &self.tokens[self.pos];
        QueryError::Syntax { line: t.line, col: t.col, msg: msg.into() }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.is_keyword(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), QueryError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error_here(format!("expected {kw}")))
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), QueryError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error_here(format!("expected '{p}'")))
        }
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        while self.eat_keyword("PREFIX") {
            let name = match self.next().tok {
                Tok::PName(prefix, local) if local.is_empty() => prefix,
                _ => return Err(self.prev_error("expected prefix name ending in ':'")),
            };
            let iri = match self.next().tok {
                Tok::Iri(iri) => iri,
                _ => return Err(self.prev_error("expected IRI after prefix name")),
            };
            self.prefixes.insert(name, iri);
        }

        let (form, aggregates) = if self.eat_keyword("SELECT") {
            let (vars, aggs) = self.select_list()?;
            (QueryForm::Select(vars), aggs)
        } else if self.eat_keyword("CONSTRUCT") {
            self.expect_punct("{")?;
            let mut template = Vec::new();
            while !self.eat_punct("}") {
                if self.eat_punct(".") {
                    continue;
                }
                let s = self.term_or_var()?;
                let p = match self.verb()? {
                    Verb::Simple(p) => p,
                    Verb::Path(_) => return Err(self.prev_error("paths are not allowed in CONSTRUCT templates")),
                };
                let o = self.term_or_var()?;
                template.push(TriplePattern::new(s, p, o));
            }
            if template.is_empty() {
                return Err(self.prev_error("empty CONSTRUCT template"));
            }
            (QueryForm::Construct(template), Vec::new())
        } else {
            return Err(self.error_here("expected SELECT or CONSTRUCT"));
        };

        self.eat_keyword("WHERE");
        let body = self.group()?;

        let group_vars = if self.eat_keyword("GROUP") {
            self.expect_keyword("BY")?;
            let mut vars = Vec::new();
            while let Tok::Var(v) = self.peek().clone() {
                self.next();
                vars.push(v);
            }
            if vars.is_empty() {
                return Err(self.error_here("expected variables after GROUP BY"));
            }
            Some(vars)
        } else {
            None
        };
        if !matches!(self.peek(), Tok::Eof) {
            return Err(self.error_here("unexpected trailing input"));
        }

        let group_by = match (group_vars, aggregates.is_empty()) {
            (None, true) => None,
            (vars, _) => Some(GroupBy { vars: vars.unwrap_or_default(), aggregates }),
        };
        Ok(Query { prefixes: std::mem::take(&mut self.prefixes), form, body, group_by })
    }

    fn prev_error(&self, msg: &str) -> QueryError {
        let t = &self.tokens[self.pos.saturating_sub(1)];
        QueryError::Syntax { line: t.line, col: t.col, msg: msg.into() }
    }

    fn select_list(&mut self) -> Result<(Vec<String>, Vec<Aggregate>), QueryError> {
        let mut vars = Vec::new();
        let mut aggs = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Var(v) => {
                    self.next();
                    vars.push(v);
                }
                Tok::Punct("(") => {
                    self.next();
                    let func = if self.eat_keyword("COUNT") {
                        AggregateFn::Count
                    } else if self.eat_keyword("AVG") {
                        AggregateFn::Avg
                    } else {
                        return Err(self.error_here("expected COUNT or AVG"));
                    };
                    self.expect_punct("(")?;
                    let arg = self.var()?;
                    self.expect_punct(")")?;
                    self.expect_keyword("AS")?;
                    let out = self.var()?;
                    self.expect_punct(")")?;
                    vars.push(out.clone());
                    aggs.push(Aggregate { func, arg, out });
                }
                _ => break,
            }
        }
        if vars.is_empty() {
            return Err(self.error_here("empty select list"));
        }
        Ok((vars, aggs))
    }

    fn var(&mut self) -> Result<String, QueryError> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.next();
                Ok(v)
            }
            _ => Err(self.error_here("expected variable")),
        }
    }

    fn iri(&mut self) -> Result<String, QueryError> {
        let t = self.next();
        match t.tok {
            Tok::Iri(iri) => Ok(iri),
            Tok::PName(ref prefix, ref local) => self.expand(prefix, local, &t),
            _ => Err(QueryError::Syntax { line: t.line, col: t.col, msg: "expected IRI".into() }),
        }
    }

    fn expand(&self, prefix: &str, local: &str, at: &Token) -> Result<String, QueryError> {
        match self.prefixes.get(prefix) {
            Some(base) => Ok(format!("{base}{local}")),
            None => Err(QueryError::UnknownPrefix { prefix: prefix.to_string(), line: at.line, col: at.col }),
        }
    }

    fn term_or_var(&mut self) -> Result<PatternTerm, QueryError> {
        if let Tok::Var(v) = self.peek().clone() {
            self.next();
            return Ok(PatternTerm::Var(v));
        }
        Ok(PatternTerm::Term(self.constant()?))
    }

    fn constant(&mut self) -> Result<Term, QueryError> {
        let t = self.next();
        match t.tok {
            Tok::Iri(iri) => Ok(Term::iri(iri)),
            Tok::PName(ref prefix, ref local) => Ok(Term::iri(self.expand(prefix, local, &t)?)),
            Tok::Integer(n) => Ok(Term::typed(n, XSD_INTEGER)),
            Tok::Decimal(n) => Ok(Term::typed(n, XSD_DECIMAL)),
            Tok::Str(lex, Some(lang)) => Ok(Term::lang_literal(lex, lang)),
            Tok::Str(lex, None) => {
                if self.eat_punct("^^") {
                    let dt = self.iri()?;
                    Ok(Term::typed(lex, dt))
                } else {
                    Ok(Term::literal(lex))
                }
            }
            _ => Err(QueryError::Syntax { line: t.line, col: t.col, msg: "expected term".into() }),
        }
    }

    fn verb(&mut self) -> Result<Verb, QueryError> {
        if let Tok::Var(v) = self.peek().clone() {
            self.next();
            return Ok(Verb::Simple(PatternTerm::Var(v)));
        }
        let start = self.tokens[self.pos].clone();
        let mut steps = vec![self.path_step()?];
        while self.eat_punct("/") {
            steps.push(self.path_step()?);
        }
        if steps.len() > MAX_PATH_STEPS {
            return Err(QueryError::PathLength { len: steps.len(), line: start.line, col: start.col });
        }
        if steps.len() == 1 && steps[0].modifier == PathModifier::One {
            return Ok(Verb::Simple(PatternTerm::Term(steps.remove(0).predicate)));
        }
        Ok(Verb::Path(steps))
    }

    fn path_step(&mut self) -> Result<PathStep, QueryError> {
        let predicate = if self.eat_keyword("a") { Term::iri(RDF_TYPE) } else { Term::iri(self.iri()?) };
        let modifier = if self.eat_punct("*") {
            PathModifier::ZeroOrMore
        } else if self.eat_punct("+") {
            PathModifier::OneOrMore
        } else {
            PathModifier::One
        };
        Ok(PathStep { predicate, modifier })
    }

    /// `{ ... }` folded left-deep; filters wrap the whole group.
    fn group(&mut self) -> Result<PatternExpr, QueryError> {
        self.expect_punct("{")?;
        let mut elements: Vec<Element> = Vec::new();
        let mut pending: Vec<TriplePattern> = Vec::new();
        let mut filters: Vec<FilterExpr> = Vec::new();

        fn flush(pending: &mut Vec<TriplePattern>, elements: &mut Vec<Element>) {
            if !pending.is_empty() {
                elements.push(Element::Plain(PatternExpr::Bgp(std::mem::take(pending))));
            }
        }

        loop {
            if self.eat_punct("}") {
                break;
            }
            if self.eat_punct(".") {
                continue;
            }
            if matches!(self.peek(), Tok::Eof) {
                return Err(self.error_here("unclosed '{'"));
            }
            if self.eat_keyword("FILTER") {
                self.expect_punct("(")?;
                let e = self.or_expr()?;
                self.expect_punct(")")?;
                filters.push(e);
            } else if self.eat_keyword("OPTIONAL") {
                flush(&mut pending, &mut elements);
                let inner = self.group()?;
                elements.push(Element::Optional(inner));
            } else if self.eat_keyword("SERVICE") {
                flush(&mut pending, &mut elements);
                let endpoint = self.iri()?;
                self.expect_punct("{")?;
                let mut patterns = Vec::new();
                while !self.eat_punct("}") {
                    if self.eat_punct(".") {
                        continue;
                    }
                    let s = self.term_or_var()?;
                    let p = match self.verb()? {
                        Verb::Simple(p) => p,
                        Verb::Path(_) => return Err(self.prev_error("paths are not allowed inside SERVICE")),
                    };
                    let o = self.term_or_var()?;
                    patterns.push(TriplePattern::new(s, p, o));
                }
                elements.push(Element::Plain(PatternExpr::Service { endpoint, patterns }));
            } else if self.is_punct("{") {
                flush(&mut pending, &mut elements);
                let mut e = self.group()?;
                while self.eat_keyword("UNION") {
                    let r = self.group()?;
                    e = PatternExpr::Union(Box::new(e), Box::new(r));
                }
                elements.push(Element::Plain(e));
            } else {
                let s = self.term_or_var()?;
                let verb = self.verb()?;
                let o = self.term_or_var()?;
                match verb {
                    Verb::Simple(p) => pending.push(TriplePattern::new(s, p, o)),
                    Verb::Path(steps) => {
                        flush(&mut pending, &mut elements);
                        elements.push(Element::Plain(PatternExpr::Path(PathPattern { s, steps, o })));
                    }
                }
            }
        }
        flush(&mut pending, &mut elements);

        let mut acc: Option<PatternExpr> = None;
        for el in elements {
            acc = Some(match (acc, el) {
                (None, Element::Plain(e)) => e,
                (Some(a), Element::Plain(e)) => PatternExpr::Join(Box::new(a), Box::new(e)),
                (a, Element::Optional(e)) => {
                    PatternExpr::Optional(Box::new(a.unwrap_or(PatternExpr::Bgp(Vec::new()))), Box::new(e))
                }
            });
        }
        let body = acc.unwrap_or(PatternExpr::Bgp(Vec::new()));
        Ok(match filters.into_iter().reduce(|a, b| FilterExpr::And(Box::new(a), Box::new(b))) {
            Some(f) => PatternExpr::Filter(f, Box::new(body)),
            None => body,
        })
    }

    fn or_expr(&mut self) -> Result<FilterExpr, QueryError> {
        let mut e = self.and_expr()?;
        while self.eat_punct("||") {
            let r = self.and_expr()?;
            e = FilterExpr::Or(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<FilterExpr, QueryError> {
        let mut e = self.unary_expr()?;
        while self.eat_punct("&&") {
            let r = self.unary_expr()?;
            e = FilterExpr::And(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn unary_expr(&mut self) -> Result<FilterExpr, QueryError> {
        if self.eat_punct("!") {
            return Ok(FilterExpr::Not(Box::new(self.unary_expr()?)));
        }
        if self.eat_punct("(") {
            let e = self.or_expr()?;
            self.expect_punct(")")?;
            return Ok(e);
        }
        let a = self.operand()?;
        let op = match self.next().tok {
            Tok::Punct("=") => CompareOp::Eq,
            Tok::Punct("!=") => CompareOp::Ne,
            Tok::Punct("<") => CompareOp::Lt,
            Tok::Punct("<=") => CompareOp::Le,
            Tok::Punct(">") => CompareOp::Gt,
            Tok::Punct(">=") => CompareOp::Ge,
            _ => return Err(self.prev_error("expected comparison operator")),
        };
        let b = self.operand()?;
        Ok(FilterExpr::Compare(op, a, b))
    }

    fn operand(&mut self) -> Result<Operand, QueryError> {
        Ok(match self.term_or_var()? {
            PatternTerm::Var(v) => Operand::Var(v),
            PatternTerm::Term(t) => Operand::Const(t),
        })
    }
}

fn validate(q: &Query) -> Result<(), QueryError> {
    let bindable = q.body.free_variables();
    let agg_outs: Vec<&str> =
        q.group_by.iter().flat_map(|g| g.aggregates.iter().map(|a| a.out.as_str())).collect();
    let check = |v: &str, what: &str| -> Result<(), QueryError> {
        if bindable.contains(v) || agg_outs.contains(&v) {
            Ok(())
        } else {
            Err(QueryError::Invalid(format!("{what} variable ?{v} does not occur in the pattern")))
        }
    };
    match &q.form {
        QueryForm::Select(vars) => {
            for v in vars {
                check(v, "selected")?;
            }
        }
        QueryForm::Construct(template) => {
            for p in template {
                for v in p.vars() {
                    check(v, "template")?;
                }
            }
        }
    }
    if let Some(g) = &q.group_by {
        if q.is_construct() {
            return Err(QueryError::Invalid("GROUP BY requires SELECT".into()));
        }
        for v in &g.vars {
            check(v, "grouping")?;
        }
        for a in &g.aggregates {
            if !bindable.contains(&a.arg) {
                return Err(QueryError::Invalid(format!("aggregate argument ?{} is never bound", a.arg)));
            }
            if bindable.contains(&a.out) {
                return Err(QueryError::Invalid(format!("aggregate output ?{} clashes with a pattern variable", a.out)));
            }
        }
        if let QueryForm::Select(vars) = &q.form {
            for v in vars {
                if !agg_outs.contains(&v.as_str()) && !g.vars.contains(v) {
                    return Err(QueryError::Invalid(format!("?{v} is selected but not grouped")));
                }
            }
        }
    }
    Ok(())
}
