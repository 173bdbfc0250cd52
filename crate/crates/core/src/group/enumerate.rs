use std::collections::{HashSet, VecDeque};

use super::{BlackBoxGroup, GeneratingSet, GroupElement};
use crate::error::{contract, Error, Result};

/// Breadth-first closure of the generators, identity first. Works below
/// the black box, so nothing is charged to the operation counter.
///
/// Fails with [`Error::TooLarge`] once more than `cap` elements are found.
pub fn enumerate_elements(group: &BlackBoxGroup, gens: &GeneratingSet, cap: usize) -> Result<Vec<GroupElement>> {
    if cap == 0 {
        return Err(contract("enumeration cap must be at least 1"));
    }
    let backend = group.backend();
    for g in gens.elements() {
        backend.validate(g)?;
    }
    // A finite group is closed under right multiplication by its generators.
    let steps: Vec<GroupElement> = gens.elements().iter().filter(|g| !backend.is_identity(g)).cloned().collect();
    let id = backend.identity();
    let mut seen: HashSet<GroupElement> = HashSet::new();
    seen.insert(id.clone());
    let mut order = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for s in &steps {
            let y = backend.mul(&x, s);
            if seen.insert(y.clone()) {
                if order.len() == cap {
                    return Err(Error::TooLarge { cap, partial: order.len() + 1 });
                }
                order.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(order)
}
