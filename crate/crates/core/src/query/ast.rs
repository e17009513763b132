use std::collections::{BTreeMap, BTreeSet};

use crate::kb::{PatternTerm, TriplePattern};
use crate::rdf::Term;

/// A parsed continuous query.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub prefixes: BTreeMap<String, String>,
    pub form: QueryForm,
    pub body: PatternExpr,
    pub group_by: Option<GroupBy>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryForm {
    /// Projected names in select-list order; aggregate outputs included.
    Select(Vec<String>),
    Construct(Vec<TriplePattern>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupBy {
    pub vars: Vec<String>,
    pub aggregates: Vec<Aggregate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub func: AggregateFn,
    pub arg: String,
    pub out: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregateFn {
    Count,
    Avg,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PatternExpr {
    Bgp(Vec<TriplePattern>),
    Path(PathPattern),
    Filter(FilterExpr, Box<PatternExpr>),
    Optional(Box<PatternExpr>, Box<PatternExpr>),
    Union(Box<PatternExpr>, Box<PatternExpr>),
    Join(Box<PatternExpr>, Box<PatternExpr>),
    Service { endpoint: String, patterns: Vec<TriplePattern> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPattern {
    pub s: PatternTerm,
    pub steps: Vec<PathStep>,
    pub o: PatternTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathStep {
    pub predicate: Term,
    pub modifier: PathModifier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathModifier {
    One,
    ZeroOrMore,
    OneOrMore,
}

pub const MAX_PATH_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum FilterExpr {
    Compare(CompareOp, Operand, Operand),
    And(Box<FilterExpr>, Box<FilterExpr>),
    Or(Box<FilterExpr>, Box<FilterExpr>),
    Not(Box<FilterExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Var(String),
    Const(Term),
}

impl FilterExpr {
    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            FilterExpr::Compare(_, a, b) => {
                for op in [a, b] {
                    if let Operand::Var(v) = op {
                        out.insert(v.clone());
                    }
                }
            }
            FilterExpr::And(a, b) | FilterExpr::Or(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            FilterExpr::Not(a) => a.vars(out),
        }
    }
}

impl PatternExpr {
    /// Variables a solution of this expression can bind.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            PatternExpr::Bgp(ps) | PatternExpr::Service { patterns: ps, .. } => {
                for p in ps {
                    out.extend(p.vars().map(str::to_string));
                }
            }
            PatternExpr::Path(p) => {
                for t in [&p.s, &p.o] {
                    if let Some(v) = t.as_var() {
                        out.insert(v.to_string());
                    }
                }
            }
            PatternExpr::Filter(_, c) => c.collect_vars(out),
            PatternExpr::Optional(a, b) | PatternExpr::Union(a, b) | PatternExpr::Join(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Whether evaluating with a partial binding pushed in equals joining
    /// the binding with the unseeded result.
    pub fn is_seed_safe(&self) -> bool {
        match self {
            PatternExpr::Bgp(_) | PatternExpr::Path(_) | PatternExpr::Service { .. } => true,
            PatternExpr::Union(a, b) | PatternExpr::Join(a, b) => a.is_seed_safe() && b.is_seed_safe(),
            PatternExpr::Filter(..) | PatternExpr::Optional(..) => false,
        }
    }

    pub fn contains_service(&self) -> bool {
        match self {
            PatternExpr::Service { .. } => true,
            PatternExpr::Bgp(_) | PatternExpr::Path(_) => false,
            PatternExpr::Filter(_, c) => c.contains_service(),
            PatternExpr::Optional(a, b) | PatternExpr::Union(a, b) | PatternExpr::Join(a, b) => {
                a.contains_service() || b.contains_service()
            }
        }
    }

    /// Endpoint names referenced by SERVICE nodes, in first-use order.
    pub fn service_endpoints(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let PatternExpr::Service { endpoint, .. } = e {
                if !out.contains(endpoint) {
                    out.push(endpoint.clone());
                }
            }
        });
        out
    }

    pub fn walk(&self, f: &mut impl FnMut(&PatternExpr)) {
        f(self);
        match self {
            PatternExpr::Filter(_, c) => c.walk(f),
            PatternExpr::Optional(a, b) | PatternExpr::Union(a, b) | PatternExpr::Join(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            _ => {}
        }
    }
}

impl Query {
    pub fn free_variables(&self) -> BTreeSet<String> {
        self.body.free_variables()
    }

    pub fn is_construct(&self) -> bool {
        matches!(self.form, QueryForm::Construct(_))
    }
}
