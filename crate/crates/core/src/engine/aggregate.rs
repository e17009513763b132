use std::collections::BTreeMap;

use crate::query::{AggregateFn, GroupBy};
use crate::rdf::vocab::{XSD_DECIMAL, XSD_INTEGER};
use crate::rdf::Term;

use super::filter::numeric_value;
use super::Solution;

/// Groups rows by the key variables (unbound keys form their own group) and
/// computes each aggregate. Without key variables all rows form one group,
/// which exists even when there are no rows.
pub fn aggregate(rows: &[Solution], group_by: &GroupBy) -> Vec<Solution> {
    let mut groups: BTreeMap<Vec<Option<Term>>, Vec<&Solution>> = BTreeMap::new();
    for row in rows {
        let key: Vec<Option<Term>> = group_by.vars.iter().map(|v| row.get(v).cloned()).collect();
        groups.entry(key).or_default().push(row);
    }
    if group_by.vars.is_empty() && groups.is_empty() {
        groups.insert(Vec::new(), Vec::new());
    }
    groups
        .into_iter()
        .map(|(key, members)| {
            let mut out = Solution::new();
            for (v, t) in group_by.vars.iter().zip(key) {
                if let Some(t) = t {
                    out.insert(v.clone(), t);
                }
            }
            for agg in &group_by.aggregates {
                let bound = members.iter().filter_map(|r| r.get(&agg.arg));
                match agg.func {
                    AggregateFn::Count => {
                        out.insert(agg.out.clone(), Term::typed(bound.count().to_string(), XSD_INTEGER));
                    }
                    AggregateFn::Avg => {
                        let values: Vec<f64> = bound.filter_map(numeric_value).collect();
                        if !values.is_empty() {
                            let mean = values.iter().sum::<f64>() / values.len() as f64;
                            out.insert(agg.out.clone(), decimal(mean));
                        }
                    }
                }
            }
            out
        })
        .collect()
}

/// Fixed-precision decimal so equal means always serialise identically.
fn decimal(v: f64) -> Term {
    Term::typed(format!("{v:.6}"), XSD_DECIMAL)
}
