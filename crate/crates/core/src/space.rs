use std::collections::HashSet;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, ordered set of outcome labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct OutcomeSpace {
    labels: Arc<[String]>,
}

impl OutcomeSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidSpace("outcome space is empty".into()));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self { labels: labels.into() })
    }

    /// Labels `"0", "1", …, "n-1"`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((0..n).map(|k| k.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn label(&self, k: usize) -> &str {
        &self.labels[k]
    }

    pub(crate) fn require_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// Orders a `{label: value}` map along this space; every label must
    /// appear exactly once.
    pub fn align<T: Clone>(&self, map: &IndexMap<String, T>, field: &str) -> Result<Vec<T>> {
        if let Some(extra) = map.keys().find(|k| self.index_of(k).is_none()) {
            return Err(Error::InvalidSpace(format!(
                "`{field}` has label `{extra}` outside the space"
            )));
        }
        self.labels
            .iter()
            .map(|l| {
                map.get(l)
                    .cloned()
                    .ok_or_else(|| Error::InvalidSpace(format!("`{field}` is missing label `{l}`")))
            })
            .collect()
    }

    pub fn keyed<T: Clone>(&self, values: &[T]) -> IndexMap<String, T> {
        self.labels.iter().cloned().zip(values.iter().cloned()).collect()
    }
}

impl TryFrom<Vec<String>> for OutcomeSpace {
    type Error = Error;
    fn try_from(v: Vec<String>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<OutcomeSpace> for Vec<String> {
    fn from(s: OutcomeSpace) -> Self {
        s.labels.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_duplicates() {
        assert!(OutcomeSpace::new(Vec::<String>::new()).is_err());
        assert!(OutcomeSpace::new(["a", "b", "a"]).is_err());
        let s = OutcomeSpace::numbered(3).unwrap();
        assert_eq!(s.index_of("2"), Some(2));
    }

    #[test]
    fn align_requires_exact_labels() {
        let s = OutcomeSpace::new(["a", "b"]).unwrap();
        let mut m = IndexMap::new();
        m.insert("b".to_string(), 2.0);
        assert!(s.align(&m, "values").is_err());
        m.insert("a".to_string(), 1.0);
        assert_eq!(s.align(&m, "values").unwrap(), vec![1.0, 2.0]);
        m.insert("c".to_string(), 0.0);
        assert!(s.align(&m, "values").is_err());
    }
}
