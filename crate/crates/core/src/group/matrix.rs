//! Square matrices over Z_p, stored row-major with entries in `0..p`.

use super::GroupElement;

pub(super) fn identity(dim: usize) -> GroupElement {
    let mut v = vec![0u32; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1;
    }
    GroupElement::from_payload(v)
}

pub(super) fn mul(a: &GroupElement, b: &GroupElement, dim: usize, p: u32) -> GroupElement {
    let (a, b) = (a.payload(), b.payload());
    let p = p as u64;
    let mut out = vec![0u32; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = 0u64;
            for k in 0..dim {
                acc = (acc + a[i * dim + k] as u64 * b[k * dim + j] as u64) % p;
            }
            out[i * dim + j] = acc as u32;
        }
    }
    GroupElement::from_payload(out)
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Gauss–Jordan inverse; `None` when singular.
pub(super) fn inverse(a: &GroupElement, dim: usize, p: u32) -> Option<GroupElement> {
    let p64 = p as u64;
    let w = 2 * dim;
    let mut m = vec![0u64; dim * w];
    for i in 0..dim {
        for j in 0..dim {
            m[i * w + j] = a.payload()[i * dim + j] as u64 % p64;
        }
        m[i * w + dim + i] = 1;
    }
    for col in 0..dim {
        let pivot = (col..dim).find(|&r| m[r * w + col] != 0)?;
        if pivot != col {
            for j in 0..w {
                m.swap(pivot * w + j, col * w + j);
            }
        }
        let inv = pow_mod(m[col * w + col], p64 - 2, p64);
        for j in 0..w {
            m[col * w + j] = m[col * w + j] * inv % p64;
        }
        for r in 0..dim {
            if r == col {
                continue;
            }
            let f = m[r * w + col];
            if f == 0 {
                continue;
            }
            for j in 0..w {
                m[r * w + j] = (m[r * w + j] + (p64 - f) * m[col * w + j]) % p64;
            }
        }
    }
    let mut out = vec![0u32; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            out[i * dim + j] = m[i * w + dim + j] as u32;
        }
    }
    Some(GroupElement::from_payload(out))
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(super) fn format(a: &GroupElement, dim: usize) -> String {
    let rows: Vec<String> = a
        .payload()
        .chunks(dim)
        .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    format!("[{}]", rows.join(","))
}
