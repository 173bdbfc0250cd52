use super::GroupElement;
use crate::error::{Error, Result};

pub(super) fn identity(degree: usize) -> GroupElement {
    GroupElement::from_payload((0..degree as u32).collect())
}

/// `(a·b)(x) = b(a(x))`.
pub(super) fn compose(a: &GroupElement, b: &GroupElement) -> GroupElement {
    let (a, b) = (a.payload(), b.payload());
    GroupElement::from_payload(a.iter().map(|&x| b[x as usize]).collect())
}

pub(super) fn inverse(a: &GroupElement) -> GroupElement {
    let a = a.payload();
    let mut r = vec![0u32; a.len()];
    for (i, &x) in a.iter().enumerate() {
        r[x as usize] = i as u32;
    }
    GroupElement::from_payload(r)
}

/// Disjoint cycles of a permutation, 0-based, each starting at its
/// smallest point, fixed points omitted.
pub(crate) fn cycles(a: &GroupElement) -> Vec<Vec<u32>> {
    let a = a.payload();
    let mut seen = vec![false; a.len()];
    let mut out = Vec::new();
    for start in 0..a.len() {
        if seen[start] {
            continue;
        }
        let mut cyc = vec![start as u32];
        seen[start] = true;
        let mut x = a[start] as usize;
        while x != start {
            seen[x] = true;
            cyc.push(x as u32);
            x = a[x] as usize;
        }
        if cyc.len() > 1 {
            out.push(cyc);
        }
    }
    out
}

/// Cycle notation with 1-based points, e.g. `(1 2 3)(4 5)`; the identity
/// renders as `()`.
pub fn format_cycles(a: &GroupElement) -> String {
    let cs = cycles(a);
    if cs.is_empty() {
        return "()".to_string();
    }
    let mut s = String::new();
    for c in cs {
        s.push('(');
        let pts: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
        s.push_str(&pts.join(" "));
        s.push(')');
    }
    s
}

/// Parses cycle notation (1-based points) into a permutation of `degree`
/// points. Points may be separated by spaces or commas.
pub fn parse_cycles(text: &str, degree: usize) -> Result<GroupElement> {
    parse_cycles_at(text, degree, 1)
}

pub(super) fn parse_cycles_at(text: &str, degree: usize, line: usize) -> Result<GroupElement> {
    let err = |message: String| Error::Parse { line, message };
    let mut images: Vec<u32> = (0..degree as u32).collect();
    let mut moved = vec![false; degree];
    let mut rest = text.trim();
    if rest.is_empty() {
        return Err(err("empty permutation".into()));
    }
    while !rest.is_empty() {
        let Some(body) = rest.strip_prefix('(') else {
            return Err(err(format!("expected '(' at {rest:?}")));
        };
        let Some(close) = body.find(')') else {
            return Err(err("unclosed cycle".into()));
        };
        let inner = &body[..close];
        if inner.contains('(') {
            return Err(err("unclosed cycle".into()));
        }
        let mut pts = Vec::new();
        for tok in inner.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let v: usize = tok.parse().map_err(|_| err(format!("bad point {tok:?}")))?;
            if v == 0 || v > degree {
                return Err(err(format!("point {v} out of range 1..={degree}")));
            }
            let v = v - 1;
            if moved[v] {
                return Err(err(format!("duplicate point {}", v + 1)));
            }
            moved[v] = true;
            pts.push(v as u32);
        }
        // Cycles are read as a product of disjoint cycles; a point may appear once.
        for i in 0..pts.len() {
            images[pts[i] as usize] = pts[(i + 1) % pts.len()];
        }
        rest = body[close + 1..].trim_start();
    }
    Ok(GroupElement::from_payload(images))
}
