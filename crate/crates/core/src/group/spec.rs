//! Generator file formats.
//!
//! Text (permutations only):
//!
//! ```text
//! permutation degree=5
//! (1 2 3)(4 5)
//! b: (1 2)
//! ```
//!
//! Structured (JSON), images 1-based:
//!
//! ```text
//! {"type":"permutation","degree":3,"generators":[[2,3,1],[2,1,3]]}
//! {"type":"matrix","dim":2,"prime":3,"generators":[[[1,1],[0,1]],[[1,0],[1,1]]]}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::is_prime;
use super::perm::parse_cycles_at;
use super::{format_cycles, Backend, BlackBoxGroup, GeneratingSet, GroupElement};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum GroupFile {
    Permutation { degree: usize, generators: Vec<Vec<u32>> },
    Matrix { dim: usize, prime: u32, generators: Vec<Vec<Vec<u32>>> },
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses either generator format, detected by the first non-blank
/// character (`{` for structured).
pub fn parse_group_spec(text: &str) -> Result<(BlackBoxGroup, GeneratingSet)> {
    if text.trim_start().starts_with('{') {
        parse_structured(text)
    } else {
        parse_text(text)
    }
}

pub fn read_group_file(path: impl AsRef<Path>) -> Result<(BlackBoxGroup, GeneratingSet)> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_group_spec(&text)
}

fn check_identity_generators(backend: &Backend, gens: &[GroupElement], lines: &[usize]) -> Result<()> {
    if gens.len() > 1 {
        if let Some(i) = gens.iter().position(|g| backend.is_identity(g)) {
            return Err(perr(lines[i], "identity generator in a nontrivial generating set"));
        }
    }
    Ok(())
}

fn parse_text(text: &str) -> Result<(BlackBoxGroup, GeneratingSet)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty group specification"))?;
    let degree = header
        .strip_prefix("permutation")
        .map(str::trim)
        .and_then(|r| r.strip_prefix("degree="))
        .ok_or_else(|| perr(hline, "expected header \"permutation degree=n\""))?
        .trim()
        .parse::<usize>()
        .map_err(|_| perr(hline, "bad degree"))?;
    if degree == 0 {
        return Err(perr(hline, "degree must be positive"));
    }
    let mut gens = Vec::new();
    let mut names = Vec::new();
    let mut at = Vec::new();
    for (line, l) in lines {
        let (name, cyc) = match l.split_once(':') {
            Some((n, c)) => (n.trim().to_string(), c.trim()),
            None => (format!("g{}", gens.len() + 1), l),
        };
        if name.is_empty() {
            return Err(perr(line, "empty generator name"));
        }
        gens.push(parse_cycles_at(cyc, degree, line)?);
        names.push(name);
        at.push(line);
    }
    if gens.is_empty() {
        return Err(perr(hline, "no generators"));
    }
    let backend = Backend::Permutation { degree };
    check_identity_generators(&backend, &gens, &at)?;
    Ok((BlackBoxGroup::new(backend), GeneratingSet::with_names(gens, names)?))
}

fn json_line(text: &str, e: &serde_json::Error) -> usize {
    if e.line() > 0 {
        e.line()
    } else {
        text.lines().count().max(1)
    }
}

fn parse_structured(text: &str) -> Result<(BlackBoxGroup, GeneratingSet)> {
    let file: GroupFile =
        serde_json::from_str(text).map_err(|e| perr(json_line(text, &e), e.to_string()))?;
    let line = 1;
    let (backend, gens) = match file {
        GroupFile::Permutation { degree, generators } => {
            if degree == 0 {
                return Err(perr(line, "degree must be positive"));
            }
            let backend = Backend::Permutation { degree };
            let mut gens = Vec::new();
            for (i, imgs) in generators.into_iter().enumerate() {
                if imgs.len() != degree || imgs.iter().any(|&x| x == 0 || x as usize > degree) {
                    return Err(perr(line, format!("generator {} has bad images", i + 1)));
                }
                let g = GroupElement::from_payload(imgs.into_iter().map(|x| x - 1).collect());
                backend
                    .validate(&g)
                    .map_err(|_| perr(line, format!("generator {} is not a permutation", i + 1)))?;
                gens.push(g);
            }
            (backend, gens)
        }
        GroupFile::Matrix { dim, prime, generators } => {
            if dim == 0 {
                return Err(perr(line, "dimension must be positive"));
            }
            if !is_prime(prime) {
                return Err(perr(line, format!("{prime} is not prime")));
            }
            let backend = Backend::Matrix { dim, prime };
            let mut gens = Vec::new();
            for (i, rows) in generators.into_iter().enumerate() {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(perr(line, format!("generator {} is not {dim}x{dim}", i + 1)));
                }
                if rows.iter().flatten().any(|&x| x >= prime) {
                    return Err(perr(line, format!("generator {} has entries outside 0..{prime}", i + 1)));
                }
                let g = GroupElement::from_payload(rows.into_iter().flatten().collect());
                backend
                    .validate(&g)
                    .map_err(|_| perr(line, format!("generator {} is singular mod {prime}", i + 1)))?;
                gens.push(g);
            }
            (backend, gens)
        }
    };
    if gens.is_empty() {
        return Err(perr(line, "no generators"));
    }
    check_identity_generators(&backend, &gens, &vec![line; gens.len()])?;
    Ok((BlackBoxGroup::new(backend), GeneratingSet::new(gens)?))
}

/// Canonical text form (permutation groups only). Default names `g1, g2, …`
/// are left implicit.
pub fn to_text(group: &BlackBoxGroup, gens: &GeneratingSet) -> Result<String> {
    let Backend::Permutation { degree } = group.backend() else {
        return Err(crate::error::contract("text format holds permutation groups only"));
    };
    let mut s = format!("permutation degree={degree}\n");
    for (i, (g, name)) in gens.elements().iter().zip(gens.names()).enumerate() {
        if *name != format!("g{}", i + 1) {
            s.push_str(name);
            s.push_str(": ");
        }
        s.push_str(&format_cycles(g));
        s.push('\n');
    }
    Ok(s)
}

/// Canonical structured form, compact JSON.
pub fn to_structured(group: &BlackBoxGroup, gens: &GeneratingSet) -> String {
    let file = match group.backend() {
        Backend::Permutation { degree } => GroupFile::Permutation {
            degree,
            generators: gens.elements().iter().map(|g| g.payload().iter().map(|x| x + 1).collect()).collect(),
        },
        Backend::Matrix { dim, prime } => GroupFile::Matrix {
            dim,
            prime,
            generators: gens.elements().iter().map(|g| g.payload().chunks(dim).map(|r| r.to_vec()).collect()).collect(),
        },
    };
    serde_json::to_string(&file).expect("group files always serialize")
}
