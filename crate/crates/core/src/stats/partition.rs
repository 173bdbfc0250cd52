//! Category partitions and expected-count tables.
//!
//! Table rows are `label, expected[, key]` with `#` comments. The key
//! says how sampled elements are classified: `cycle:5+3+1` for a cycle
//! type or `order:N` for the element order. Rows sharing a key are merged.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::{cycle_type, cycle_types, sn_class_size, CycleType};
use crate::error::{contract, Error, Result};
use crate::group::builtin::Family;
use crate::group::{enumerate_elements, Backend, BlackBoxGroup, GeneratingSet, GroupElement};

/// Expected class weights for the McLaughlin group, keyed by element order.
pub const MCL_APPENDIX: &str = include_str!("../../data/mcl_appendix.csv");

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassKey {
    Cycle(CycleType),
    Order(u64),
}

impl ClassKey {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || contract(format!("bad classification key {text:?}; expected cycle:a+b+… or order:N"));
        if let Some(rest) = text.strip_prefix("cycle:") {
            let parts = rest.split('+').map(|p| p.trim().parse::<usize>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
            Ok(ClassKey::Cycle(CycleType::new(parts).map_err(|_| bad())?))
        } else if let Some(rest) = text.strip_prefix("order:") {
            match rest.trim().parse::<u64>() {
                Ok(n) if n > 0 => Ok(ClassKey::Order(n)),
                _ => Err(bad()),
            }
        } else {
            Err(bad())
        }
    }
}

impl fmt::Display for ClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassKey::Cycle(c) => {
                let parts: Vec<String> = c.parts().iter().map(|p| p.to_string()).collect();
                write!(f, "cycle:{}", parts.join("+"))
            }
            ClassKey::Order(n) => write!(f, "order:{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Category {
    pub label: String,
    /// Relative expected frequency; only ratios matter.
    pub weight: f64,
    pub key: ClassKey,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    categories: Vec<Category>,
    lookup: HashMap<ClassKey, usize>,
    by_order: bool,
}

/// Where expected counts come from.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionSource {
    /// Class sizes of `S_n` or `A_n` by formula.
    Analytic,
    /// Cycle-type counts over the enumerated group.
    Enumerated,
    Table(Partition),
}

/// Order of an element, by cycle lengths for permutations and by repeated
/// multiplication for matrices.
pub fn element_order(backend: Backend, g: &GroupElement) -> u64 {
    match backend {
        Backend::Permutation { .. } => cycle_type(backend, g).map(|c| c.order()).unwrap_or(1),
        Backend::Matrix { .. } => {
            let mut x = g.clone();
            let mut n = 1;
            while !backend.is_identity(&x) {
                x = backend.mul(&x, g);
                n += 1;
            }
            n
        }
    }
}

impl Partition {
    /// Merges rows with the same key, keeping first-appearance order.
    pub fn new(rows: Vec<Category>) -> Result<Self> {
        let by_order = matches!(rows.first().map(|c| &c.key), Some(ClassKey::Order(_)));
        let mut categories: Vec<Category> = Vec::new();
        let mut lookup = HashMap::new();
        for row in rows {
            if matches!(row.key, ClassKey::Order(_)) != by_order {
                return Err(contract("a partition cannot mix cycle and order keys"));
            }
            if !(row.weight.is_finite() && row.weight >= 0.0) {
                return Err(contract(format!("bad expected weight for {}", row.label)));
            }
            match lookup.get(&row.key) {
                Some(&i) => {
                    let c: &mut Category = &mut categories[i];
                    c.label = format!("{}+{}", c.label, row.label);
                    c.weight += row.weight;
                }
                None => {
                    lookup.insert(row.key.clone(), categories.len());
                    categories.push(row);
                }
            }
        }
        if categories.is_empty() {
            return Err(contract("a partition needs at least one category"));
        }
        Ok(Partition { categories, lookup, by_order })
    }

    /// Parses an expected-count table.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |message: String| Error::Parse { line: i + 1, message };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(perr("expected `label, expected[, key]`".into()));
            }
            let weight: f64 = fields[1].parse().map_err(|_| perr(format!("bad expected count {:?}", fields[1])))?;
            let key = match fields.get(2) {
                Some(k) => ClassKey::parse(k).map_err(|e| perr(e.to_string()))?,
                None => ClassKey::parse(&format!("cycle:{}", fields[0]))
                    .map_err(|_| perr("row lacks a classification key (cycle:… or order:…)".into()))?,
            };
            rows.push(Category { label: fields[0].to_string(), weight, key });
        }
        Self::new(rows).map_err(|e| match e {
            Error::Contract(m) => Error::Parse { line: 0, message: m },
            e => e,
        })
    }

    /// Cycle types of `S_n`, or the even ones for `A_n`, weighted by class
    /// size; split `A_n` classes stay merged.
    pub fn analytic(family: Family) -> Result<Self> {
        let (n, even_only) = match family {
            Family::Symmetric(n) => (n, false),
            Family::Alternating(n) => (n, true),
            f => {
                return Err(contract(format!(
                    "no analytic class sizes for {f:?}; supply an expected-count table"
                )))
            }
        };
        let rows = cycle_types(n)
            .into_iter()
            .filter(|c| !even_only || c.is_even())
            .map(|c| Category { label: c.to_string(), weight: sn_class_size(&c).fraction, key: ClassKey::Cycle(c) })
            .collect();
        Self::new(rows)
    }

    /// Exact cycle-type counts of an enumerable permutation group.
    pub fn enumerated(group: &BlackBoxGroup, gens: &GeneratingSet, cap: usize) -> Result<Self> {
        let els = enumerate_elements(group, gens, cap)?;
        let mut counts: HashMap<CycleType, f64> = HashMap::new();
        for g in &els {
            *counts.entry(cycle_type(group.backend(), g)?).or_insert(0.0) += 1.0;
        }
        let mut keys: Vec<CycleType> = counts.keys().cloned().collect();
        keys.sort_by(|a, b| b.cmp(a));
        Self::new(
            keys.into_iter()
                .map(|c| Category { label: c.to_string(), weight: counts[&c], key: ClassKey::Cycle(c) })
                .collect(),
        )
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.categories.iter().map(|c| c.label.clone()).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.categories.iter().map(|c| c.weight).collect()
    }

    /// Category index of a sampled element.
    pub fn classify(&self, backend: Backend, g: &GroupElement) -> Result<usize> {
        let key = if self.by_order {
            ClassKey::Order(element_order(backend, g))
        } else {
            ClassKey::Cycle(cycle_type(backend, g)?)
        };
        self.lookup
            .get(&key)
            .copied()
            .ok_or_else(|| Error::Structural(format!("sampled element with {key} falls in no category")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin::builtin;
    use crate::group::parse_cycles;

    #[test]
    fn mcl_table_merges_by_order() {
        let p = Partition::parse_table(MCL_APPENDIX).unwrap();
        let total: f64 = p.weights().iter().sum();
        assert_eq!(total, 886.0);
        assert_eq!(p.len(), 15);
        let seven = p.categories().iter().find(|c| c.key == ClassKey::Order(7)).unwrap();
        assert_eq!(seven.weight, 128.0);
        assert_eq!(seven.label, "7A+7B");
    }

    #[test]
    fn table_errors_carry_lines() {
        let err = Partition::parse_table("# c\nx,1,order:2\ny,zz,order:3\n").unwrap_err();
        assert_eq!(err, Error::Parse { line: 3, message: "bad expected count \"zz\"".into() });
        assert!(matches!(Partition::parse_table("1A,3\n"), Err(Error::Parse { line: 1, .. })));
        assert!(Partition::parse_table("a,1,order:2\nb,1,cycle:2+1\n").is_err());
        let p = Partition::parse_table("3+1,8\n2+2,3\n1+1+1+1,1\n").unwrap();
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn analytic_alternating_partition() {
        let p = Partition::analytic(Family::Alternating(5)).unwrap();
        assert_eq!(p.len(), 4);
        let total: f64 = p.weights().iter().sum();
        assert!((total - 0.5).abs() < 1e-12);
        let b = Backend::Permutation { degree: 5 };
        let i = p.classify(b, &parse_cycles("(1 2 3)", 5).unwrap()).unwrap();
        assert_eq!(p.categories()[i].label, "[3,1,1]");
        assert!(p.classify(b, &parse_cycles("(1 2)", 5).unwrap()).is_err());
        assert!(Partition::analytic(Family::Quaternion).is_err());
    }

    #[test]
    fn enumerated_matches_analytic_for_s4() {
        let (g, s) = builtin("S4").unwrap();
        let e = Partition::enumerated(&g, &s, 100).unwrap();
        let a = Partition::analytic(Family::Symmetric(4)).unwrap();
        assert_eq!(e.len(), a.len());
        for c in a.categories() {
            let i = e.lookup[&c.key];
            assert!((e.categories()[i].weight / 24.0 - c.weight).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_orders() {
        let b = Backend::Matrix { dim: 2, prime: 3 };
        assert_eq!(element_order(b, &GroupElement::from_payload(vec![1, 1, 0, 1])), 3);
        assert_eq!(element_order(b, &GroupElement::from_payload(vec![1, 0, 0, 1])), 1);
        assert_eq!(element_order(b, &GroupElement::from_payload(vec![2, 0, 0, 2])), 2);
    }
}
