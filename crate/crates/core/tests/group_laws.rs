use fibcube::group::builtin::builtin;
use fibcube::group::{enumerate_elements, GroupElement};
use proptest::prelude::*;

const GROUPS: [&str; 6] = ["S5", "A6", "D12", "Q8", "SL2_3", "SL3_2"];

fn pool(name: &str) -> (fibcube::group::BlackBoxGroup, Vec<GroupElement>) {
    let (g, s) = builtin(name).unwrap();
    let els = enumerate_elements(&g, &s, 1000).unwrap();
    (g, els)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn associativity_and_inverses(which in 0..GROUPS.len(), i in any::<usize>(), j in any::<usize>(), k in any::<usize>()) {
        let (g, els) = pool(GROUPS[which]);
        let n = els.len();
        let (a, b, c) = (&els[i % n], &els[j % n], &els[k % n]);
        let ab_c = g.multiply(&g.multiply(a, b).unwrap(), c).unwrap();
        let a_bc = g.multiply(a, &g.multiply(b, c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        let inv = g.inverse(a).unwrap();
        prop_assert!(g.is_identity(&g.multiply(a, &inv).unwrap()));
        prop_assert!(g.is_identity(&g.multiply(&inv, a).unwrap()));
        prop_assert_eq!(g.multiply(&g.identity(), b).unwrap(), b.clone());
    }
}
