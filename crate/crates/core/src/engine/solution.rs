use std::collections::BTreeMap;
use std::fmt;

use crate::rdf::Term;

/// A partial assignment of variables to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Solution(BTreeMap<String, Term>);

impl Solution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn insert(&mut self, var: impl Into<String>, t: Term) {
        self.0.insert(var.into(), t);
    }

    /// Binds `var`, failing when it is already bound to something else.
    pub fn bind(&mut self, var: &str, t: &Term) -> bool {
        match self.0.get(var) {
            Some(existing) => existing == t,
            None => {
                self.0.insert(var.to_string(), t.clone());
                true
            }
        }
    }

    pub fn is_compatible(&self, other: &Solution) -> bool {
        let (small, large) = if self.0.len() <= other.0.len() { (self, other) } else { (other, self) };
        small.0.iter().all(|(k, v)| large.0.get(k).is_none_or(|w| w == v))
    }

    /// The union of both mappings, or `None` if a shared variable disagrees.
    pub fn merge(&self, other: &Solution) -> Option<Solution> {
        if !self.is_compatible(other) {
            return None;
        }
        let mut out = self.clone();
        for (k, v) in &other.0 {
            out.0.entry(k.clone()).or_insert_with(|| v.clone());
        }
        Some(out)
    }

    pub fn project(&self, vars: &[String]) -> Solution {
        Solution(vars.iter().filter_map(|v| self.0.get(v).map(|t| (v.clone(), t.clone()))).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, Term)> for Solution {
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        Solution(iter.into_iter().collect())
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "?{k}={v}")?;
        }
        f.write_str("}")
    }
}
