//! Black box groups.
//!
//! Elements are opaque fixed-length payloads. A [`BlackBoxGroup`] can
//! multiply them, invert them and compare them, and charges every multiply
//! and inverse to a shared [`OpCounter`].
//!
//! Permutations act on the right: the product `a·b` applies `a` first,
//! so `(a·b)(x) = b(a(x))`.

pub mod builtin;
mod counter;
mod enumerate;
mod matrix;
mod perm;
mod reduce;
mod spec;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use counter::{OpCount, OpCounter, Phase, PrecomputeGuard};
pub use enumerate::enumerate_elements;
pub use perm::{format_cycles, parse_cycles};
pub use reduce::{reduce_generators, ReductionStatus, ReducedGenerators, ENUMERATION_VERIFY_LIMIT};
pub use spec::{parse_group_spec, read_group_file, to_structured, to_text};

/// Canonical payload of a group element: permutation images (0-based) or
/// the row-major entries of a matrix reduced mod p. Equal payloads mean
/// equal elements.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(Box<[u32]>);

impl GroupElement {
    pub fn from_payload(payload: Vec<u32>) -> Self {
        GroupElement(payload.into_boxed_slice())
    }

    pub fn payload(&self) -> &[u32] {
        &self.0
    }
}

impl std::borrow::Borrow<[u32]> for GroupElement {
    fn borrow(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Concrete arithmetic behind the black box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Permutation { degree: usize },
    Matrix { dim: usize, prime: u32 },
}

impl Backend {
    pub fn payload_len(&self) -> usize {
        match *self {
            Backend::Permutation { degree } => degree,
            Backend::Matrix { dim, .. } => dim * dim,
        }
    }

    /// Bits in the canonical encoding: `n·ceil(log2 n)` for permutations,
    /// `d²·ceil(log2 p)` for matrices.
    pub fn encoding_bits(&self) -> u64 {
        match *self {
            Backend::Permutation { degree } => degree as u64 * ceil_log2(degree as u64).max(1),
            Backend::Matrix { dim, prime } => (dim * dim) as u64 * ceil_log2(prime as u64).max(1),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match *self {
            Backend::Permutation { degree } => perm::identity(degree),
            Backend::Matrix { dim, .. } => matrix::identity(dim),
        }
    }

    pub fn is_identity(&self, a: &GroupElement) -> bool {
        *a == self.identity()
    }

    /// Uncounted product, for code that works below the black box
    /// (enumeration and the exact-distribution oracle).
    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match *self {
            Backend::Permutation { .. } => perm::compose(a, b),
            Backend::Matrix { dim, prime } => matrix::mul(a, b, dim, prime),
        }
    }

    /// Uncounted product written into `out`, avoiding an allocation.
    pub fn mul_into(&self, a: &GroupElement, b: &GroupElement, out: &mut Vec<u32>) {
        out.clear();
        match *self {
            Backend::Permutation { .. } => {
                let b = b.payload();
                out.extend(a.payload().iter().map(|&x| b[x as usize]));
            }
            Backend::Matrix { .. } => out.extend_from_slice(self.mul(a, b).payload()),
        }
    }

    /// Uncounted inverse.
    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        match *self {
            Backend::Permutation { .. } => perm::inverse(a),
            Backend::Matrix { dim, prime } => {
                matrix::inverse(a, dim, prime).expect("validated matrix elements are invertible")
            }
        }
    }

    /// Checks that a payload is a valid element of this backend.
    pub fn validate(&self, a: &GroupElement) -> Result<()> {
        if a.payload().len() != self.payload_len() {
            return Err(Error::Structural(format!(
                "payload length {} does not match backend ({} expected)",
                a.payload().len(),
                self.payload_len()
            )));
        }
        match *self {
            Backend::Permutation { degree } => {
                let mut seen = vec![false; degree];
                for &x in a.payload() {
                    let x = x as usize;
                    if x >= degree || seen[x] {
                        return Err(Error::Structural("permutation payload is not a bijection".into()));
                    }
                    seen[x] = true;
                }
                Ok(())
            }
            Backend::Matrix { dim, prime } => {
                if a.payload().iter().any(|&x| x >= prime) {
                    return Err(Error::Structural(format!("matrix entry not reduced mod {prime}")));
                }
                matrix::inverse(a, dim, prime)
                    .map(|_| ())
                    .ok_or_else(|| Error::Structural("singular matrix".into()))
            }
        }
    }
}

pub(crate) fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as u64
    }
}

/// A black box group: a backend plus the shared operation counter.
///
/// Cloning is cheap and clones share the counter.
#[derive(Debug, Clone)]
pub struct BlackBoxGroup {
    backend: Backend,
    counter: Arc<OpCounter>,
}

impl BlackBoxGroup {
    pub fn new(backend: Backend) -> Self {
        BlackBoxGroup { backend, counter: Arc::new(OpCounter::new()) }
    }

    pub fn permutation(degree: usize) -> Self {
        Self::new(Backend::Permutation { degree })
    }

    pub fn matrix(dim: usize, prime: u32) -> Self {
        Self::new(Backend::Matrix { dim, prime })
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn counter(&self) -> &OpCounter {
        &self.counter
    }

    /// Encoding length L in bits.
    pub fn encoding_bits(&self) -> u64 {
        self.backend.encoding_bits()
    }

    pub fn identity(&self) -> GroupElement {
        self.backend.identity()
    }

    /// Free: identity tests are not charged.
    pub fn is_identity(&self, a: &GroupElement) -> bool {
        self.backend.is_identity(a)
    }

    fn check_shape(&self, a: &GroupElement) -> Result<()> {
        if a.payload().len() == self.backend.payload_len() {
            Ok(())
        } else {
            Err(Error::Structural(format!(
                "element of length {} used with a group of payload length {}",
                a.payload().len(),
                self.backend.payload_len()
            )))
        }
    }

    /// `a·b`, charged one multiply.
    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check_shape(a)?;
        self.check_shape(b)?;
        Ok(self.mul(a, b))
    }

    /// `a⁻¹`, charged one inverse.
    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check_shape(a)?;
        if let Backend::Matrix { dim, prime } = self.backend {
            let inv = matrix::inverse(a, dim, prime)
                .ok_or_else(|| Error::Structural("singular matrix has no inverse".into()))?;
            self.counter.record_inverse();
            return Ok(inv);
        }
        Ok(self.inv(a))
    }

    // Counted operations on elements already known to belong to the group.
    pub(crate) fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.counter.record_multiply();
        self.backend.mul(a, b)
    }

    pub(crate) fn inv(&self, a: &GroupElement) -> GroupElement {
        self.counter.record_inverse();
        self.backend.inv(a)
    }

    /// Product of the given factors in order, skipping nothing; an empty
    /// list gives the identity. Charges `len − 1` multiplies.
    pub(crate) fn product<'a, I>(&self, factors: I) -> GroupElement
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        let mut acc: Option<GroupElement> = None;
        for f in factors {
            acc = Some(match acc {
                None => f.clone(),
                Some(x) => self.mul(&x, f),
            });
        }
        acc.unwrap_or_else(|| self.identity())
    }

    /// Human-readable rendering: cycle notation or matrix rows.
    pub fn format_element(&self, a: &GroupElement) -> String {
        match self.backend {
            Backend::Permutation { .. } => format_cycles(a),
            Backend::Matrix { dim, .. } => matrix::format(a, dim),
        }
    }
}

/// Ordered generating set with reporting names. The order is part of
/// its identity: random subproducts depend on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratingSet {
    elements: Vec<GroupElement>,
    names: Vec<String>,
}

impl GeneratingSet {
    pub fn new(elements: Vec<GroupElement>) -> Result<Self> {
        let names = (1..=elements.len()).map(|i| format!("g{i}")).collect();
        Self::with_names(elements, names)
    }

    pub fn with_names(elements: Vec<GroupElement>, names: Vec<String>) -> Result<Self> {
        if elements.is_empty() {
            return Err(crate::error::contract("generating set must be nonempty"));
        }
        if names.len() != elements.len() {
            return Err(crate::error::contract("one name per generator required"));
        }
        Ok(GeneratingSet { elements, names })
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, s: &str) -> GroupElement {
        parse_cycles(s, n).unwrap()
    }

    fn m(rows: &[u32]) -> GroupElement {
        GroupElement::from_payload(rows.to_vec())
    }

    #[test]
    fn permutation_product_applies_left_factor_first() {
        let g = BlackBoxGroup::permutation(3);
        let ab = g.multiply(&p(3, "(1 2 3)"), &p(3, "(1 2)")).unwrap();
        assert_eq!(ab, p(3, "(2 3)"));
        let id = g.identity();
        let x = p(3, "(1 3)");
        assert_eq!(g.multiply(&id, &x).unwrap(), x);
        assert_eq!(g.counter().snapshot().multiplies, 2);
    }

    #[test]
    fn permutation_inverse() {
        let g = BlackBoxGroup::permutation(3);
        assert_eq!(g.inverse(&p(3, "(1 2 3)")).unwrap(), p(3, "(1 3 2)"));
        assert_eq!(g.inverse(&g.identity()).unwrap(), g.identity());
        assert_eq!(g.counter().snapshot(), OpCount { multiplies: 0, inverses: 2 });
    }

    #[test]
    fn matrix_arithmetic_mod_3() {
        let g = BlackBoxGroup::matrix(2, 3);
        let a = m(&[1, 1, 0, 1]);
        let b = m(&[1, 0, 1, 1]);
        assert_eq!(g.multiply(&a, &b).unwrap(), m(&[2, 1, 1, 1]));
        assert_eq!(g.inverse(&a).unwrap(), m(&[1, 2, 0, 1]));
    }

    #[test]
    fn mismatched_degree_is_structural_error() {
        let g = BlackBoxGroup::permutation(3);
        let err = g.multiply(&p(3, "(1 2)"), &p(4, "(1 2)")).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let b = Backend::Matrix { dim: 2, prime: 3 };
        assert!(b.validate(&m(&[1, 1, 1, 1])).is_err());
        let g = BlackBoxGroup::new(b);
        assert!(matches!(g.inverse(&m(&[1, 1, 1, 1])), Err(Error::Structural(_))));
    }

    #[test]
    fn encoding_length_bounds() {
        assert_eq!(Backend::Permutation { degree: 15 }.encoding_bits(), 60);
        assert_eq!(Backend::Matrix { dim: 3, prime: 2 }.encoding_bits(), 9);
        assert_eq!(Backend::Matrix { dim: 2, prime: 3 }.encoding_bits(), 8);
    }

    #[test]
    fn identity_tests_are_free() {
        let g = BlackBoxGroup::permutation(4);
        let _ = g.is_identity(&g.identity());
        let _ = p(4, "(1 2)") == p(4, "(1 2)");
        assert_eq!(g.counter().snapshot().total(), 0);
    }
}
