//! Small groups shipped with the library, addressed by name:
//! `Z<n>`, `D<order>`, `Q8`, `S<n>`, `A<n>` (n ≤ 15), `SL2_3`, `SL3_2`.

use super::{parse_cycles, BlackBoxGroup, GeneratingSet, GroupElement};
use crate::error::{contract, Result};

/// What is known analytically about a builtin group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Cyclic(usize),
    Dihedral(usize),
    Quaternion,
    Symmetric(usize),
    Alternating(usize),
    SpecialLinear { dim: usize, prime: u32 },
}

impl Family {
    pub fn order(&self) -> u128 {
        match *self {
            Family::Cyclic(n) | Family::Dihedral(n) => n as u128,
            Family::Quaternion => 8,
            Family::Symmetric(n) => factorial(n),
            Family::Alternating(n) => factorial(n) / 2,
            Family::SpecialLinear { dim: 2, prime: 3 } => 24,
            Family::SpecialLinear { dim: 3, prime: 2 } => 168,
            Family::SpecialLinear { .. } => unreachable!("only SL(2,3) and SL(3,2) are builtin"),
        }
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

const MAX_DEGREE: usize = 15;

pub fn family(name: &str) -> Result<Family> {
    let bad = || contract(format!("unknown builtin group {name:?}"));
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    let f = match name {
        "Q8" => Family::Quaternion,
        "SL2_3" => Family::SpecialLinear { dim: 2, prime: 3 },
        "SL3_2" => Family::SpecialLinear { dim: 3, prime: 2 },
        _ if name.starts_with('Z') => Family::Cyclic(num(&name[1..])?),
        _ if name.starts_with('D') => Family::Dihedral(num(&name[1..])?),
        _ if name.starts_with('S') => Family::Symmetric(num(&name[1..])?),
        _ if name.starts_with('A') => Family::Alternating(num(&name[1..])?),
        _ => return Err(bad()),
    };
    match f {
        Family::Cyclic(n) if !(2..=4096).contains(&n) => Err(contract("Z<n> needs 2 ≤ n ≤ 4096")),
        Family::Dihedral(n) if n < 6 || n % 2 == 1 || n > 8192 => {
            Err(contract("D<order> needs an even order ≥ 6"))
        }
        Family::Symmetric(n) if !(2..=MAX_DEGREE).contains(&n) => Err(contract("S<n> needs 2 ≤ n ≤ 15")),
        Family::Alternating(n) if !(3..=MAX_DEGREE).contains(&n) => Err(contract("A<n> needs 3 ≤ n ≤ 15")),
        f => Ok(f),
    }
}

fn cycle(points: impl IntoIterator<Item = usize>) -> String {
    let pts: Vec<String> = points.into_iter().map(|p| p.to_string()).collect();
    format!("({})", pts.join(" "))
}

fn perms(n: usize, cycles: &[String]) -> (BlackBoxGroup, GeneratingSet) {
    let mut els: Vec<GroupElement> = Vec::new();
    for c in cycles {
        let g = parse_cycles(c, n).expect("builtin cycles are well formed");
        if !els.contains(&g) {
            els.push(g);
        }
    }
    (BlackBoxGroup::permutation(n), GeneratingSet::new(els).expect("nonempty"))
}

fn quaternion() -> (BlackBoxGroup, GeneratingSet) {
    // Points 0..8 stand for 1,-1,i,-i,j,-j,k,-k; unit u∈{1,i,j,k} ↦ 2u, sign ↦ +1.
    fn unit_mul(a: usize, b: usize) -> (bool, usize) {
        const T: [[(bool, usize); 4]; 4] = [
            [(false, 0), (false, 1), (false, 2), (false, 3)],
            [(false, 1), (true, 0), (false, 3), (true, 2)],
            [(false, 2), (true, 3), (true, 0), (false, 1)],
            [(false, 3), (false, 2), (true, 1), (true, 0)],
        ];
        T[a][b]
    }
    let right_mult = |q: usize| -> GroupElement {
        let imgs = (0..8)
            .map(|x| {
                let (neg, u) = unit_mul(x / 2, q / 2);
                let sign = (x % 2 == 1) ^ (q % 2 == 1) ^ neg;
                (2 * u + sign as usize) as u32
            })
            .collect();
        GroupElement::from_payload(imgs)
    };
    let gens = GeneratingSet::with_names(vec![right_mult(2), right_mult(4)], vec!["i".into(), "j".into()]).unwrap();
    (BlackBoxGroup::permutation(8), gens)
}

/// Builds a builtin group and its generators.
pub fn builtin(name: &str) -> Result<(BlackBoxGroup, GeneratingSet)> {
    Ok(match family(name)? {
        Family::Cyclic(n) => perms(n, &[cycle(1..=n)]),
        Family::Dihedral(order) => {
            let m = order / 2;
            let refl: String = (1..=m / 2).map(|i| cycle([i, m + 1 - i])).collect();
            perms(m, &[cycle(1..=m), refl])
        }
        Family::Quaternion => quaternion(),
        Family::Symmetric(n) => perms(n, &[cycle([1, 2]), cycle(1..=n)]),
        Family::Alternating(n) => {
            let long = if n % 2 == 1 { cycle(1..=n) } else { cycle(2..=n) };
            perms(n, &[cycle([1, 2, 3]), long])
        }
        Family::SpecialLinear { dim, prime } => {
            let gens: Vec<Vec<u32>> = if dim == 2 {
                vec![vec![1, 1, 0, 1], vec![1, 0, 1, 1]]
            } else {
                vec![vec![1, 1, 0, 0, 1, 0, 0, 0, 1], vec![0, 0, 1, 1, 0, 0, 0, 1, 0]]
            };
            let els = gens.into_iter().map(GroupElement::from_payload).collect();
            (BlackBoxGroup::matrix(dim, prime), GeneratingSet::new(els).unwrap())
        }
    })
}
