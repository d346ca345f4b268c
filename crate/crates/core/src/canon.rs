//! Canonical labelling, isomorphism, automorphism counting and exhaustive
//! enumeration up to isomorphism.
//!
//! The canonical form is the lexicographically least encoding over all
//! relabelings (optionally fixing vertices 0..k pointwise, for flags). It is
//! found level by level: position r takes a vertex from the first cell of an
//! ordered partition of the unplaced vertices, and every cell is split into
//! in-neighbours (bit 0) followed by out-neighbours (bit 1) of the new
//! vertex, which fixes row r of the encoding. Only partial orderings with the
//! least row so far survive, so the survivors at the end are exactly the
//! minimising relabelings, and there are |Aut| of them.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::tournament::Tournament;

pub const MAX_CANON: usize = 9;
pub const MAX_ENUM: usize = 8;

/// Lex-least encoding, packed with the first pair most significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    pub n: u8,
    /// Number of vertices held fixed (flag labels); 0 for plain tournaments.
    pub k: u8,
    pub code: u64,
}

impl CanonicalForm {
    pub fn tournament(&self) -> Tournament {
        Tournament::from_code(self.n as usize, self.code)
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tournament().encode())
    }
}

#[derive(Clone, Debug)]
pub struct Canon {
    pub form: CanonicalForm,
    /// Relabelings (fixing the first k vertices) that preserve the tournament.
    pub aut: u64,
    /// `perm[i]` is the original vertex placed at canonical position i.
    pub perm: Vec<usize>,
}

struct State {
    order: Vec<u8>,
    cells: Vec<Vec<u8>>,
}

/// Canonical form of `t` with vertices `0..k` fixed in place.
pub fn canonical_fixing(t: &Tournament, k: usize) -> Result<Canon> {
    let n = t.n();
    if n > MAX_CANON {
        return Err(Error::Capability(format!("canonical form supports n ≤ {MAX_CANON}, got {n}")));
    }
    if k > n {
        return Err(Error::Size(format!("{k} fixed vertices in a tournament on {n}")));
    }
    let out: Vec<u64> = (0..n).map(|v| t.out_mask(v)).collect();
    let mut cells: Vec<Vec<u8>> = (0..k).map(|v| vec![v as u8]).collect();
    if n > k {
        cells.push((k as u8..n as u8).collect());
    }
    let mut states = vec![State { order: Vec::with_capacity(n), cells }];
    let mut code = 0u64;
    for r in 0..n {
        let width = n - 1 - r;
        let mut best = u64::MAX;
        let mut next: Vec<State> = Vec::new();
        for st in &states {
            let first = &st.cells[0];
            for &v in first {
                let mut row = 0u64;
                let mut cells = Vec::with_capacity(st.cells.len() + 2);
                let rest0: Vec<u8> = first.iter().copied().filter(|&w| w != v).collect();
                for cell in std::iter::once(&rest0).chain(&st.cells[1..]) {
                    if cell.is_empty() {
                        continue;
                    }
                    let (ins, outs): (Vec<u8>, Vec<u8>) =
                        cell.iter().partition(|&&w| out[v as usize] >> w & 1 == 0);
                    row = (row << cell.len()) | ((1u64 << outs.len()) - 1);
                    if !ins.is_empty() {
                        cells.push(ins);
                    }
                    if !outs.is_empty() {
                        cells.push(outs);
                    }
                }
                if row > best {
                    continue;
                }
                if row < best {
                    best = row;
                    next.clear();
                }
                let mut order = st.order.clone();
                order.push(v);
                next.push(State { order, cells });
            }
        }
        code = (code << width) | best;
        states = next;
    }
    let perm = states[0].order.iter().map(|&v| v as usize).collect();
    Ok(Canon { form: CanonicalForm { n: n as u8, k: k as u8, code }, aut: states.len() as u64, perm })
}

pub fn canonical_form(t: &Tournament) -> Result<CanonicalForm> {
    Ok(canonical_fixing(t, 0)?.form)
}

pub fn are_isomorphic(a: &Tournament, b: &Tournament) -> Result<bool> {
    Ok(a.n() == b.n() && canonical_form(a)? == canonical_form(b)?)
}

pub fn aut_count(t: &Tournament) -> Result<u64> {
    Ok(canonical_fixing(t, 0)?.aut)
}

/// Exhaustive n! search; oracle for small n.
pub fn canonical_brute(t: &Tournament, k: usize) -> (u64, u64) {
    let n = t.n();
    let mut best = u64::MAX;
    let mut count = 0;
    let mut perm: Vec<usize> = (0..n).collect();
    fn rec(p: &mut Vec<usize>, i: usize, t: &Tournament, best: &mut u64, count: &mut u64) {
        if i == p.len() {
            let c = t.pattern_code(p);
            if c < *best {
                *best = c;
                *count = 1;
            } else if c == *best {
                *count += 1;
            }
            return;
        }
        for j in i..p.len() {
            p.swap(i, j);
            rec(p, i + 1, t, best, count);
            p.swap(i, j);
        }
    }
    rec(&mut perm, k, t, &mut best, &mut count);
    (best, count)
}

static ENUM_CACHE: [OnceLock<Vec<Tournament>>; MAX_ENUM + 1] = [const { OnceLock::new() }; MAX_ENUM + 1];

/// All tournaments on n vertices up to isomorphism, as canonical
/// representatives ordered by canonical encoding.
pub fn enumerate(n: usize) -> Result<&'static [Tournament]> {
    enumerate_with(n, Exec::default())
}

pub fn enumerate_with(n: usize, exec: Exec) -> Result<&'static [Tournament]> {
    if n > MAX_ENUM {
        return Err(Error::Capability(format!("enumeration supports n ≤ {MAX_ENUM}, got {n}")));
    }
    if let Some(v) = ENUM_CACHE[n].get() {
        return Ok(v);
    }
    let list = if n == 0 {
        vec![Tournament::empty()]
    } else {
        extend_classes(enumerate_with(n - 1, exec)?, exec)?
    };
    Ok(ENUM_CACHE[n].get_or_init(|| list))
}

// Adds a vertex with every possible out-neighbourhood and deduplicates.
fn extend_classes(smaller: &[Tournament], exec: Exec) -> Result<Vec<Tournament>> {
    let m = smaller.first().map_or(0, |t| t.n());
    let n = m + 1;
    let per_class = par::map_slice(exec, smaller, |t| {
        (0..1u64 << m)
            .map(|mask| {
                // bit i of mask: the new vertex beats i
                let ext = Tournament::from_fn(n, |i, j| if j == m { mask >> i & 1 == 0 } else { t.beats(i, j) });
                canonical_form(&ext).map(|c| c.code)
            })
            .collect::<Result<Vec<u64>>>()
    });
    let mut codes = Vec::new();
    for c in per_class {
        codes.extend(c?);
    }
    codes.sort_unstable();
    codes.dedup();
    Ok(codes.into_iter().map(|c| Tournament::from_code(n, c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tournament::{generate_carousel, generate_random};

    #[test]
    fn aut_counts() {
        assert_eq!(aut_count(&"3:101".parse().unwrap()).unwrap(), 3);
        for k in 1..=8 {
            assert_eq!(aut_count(&Tournament::transitive(k)).unwrap(), 1);
        }
        assert_eq!(aut_count(&generate_carousel(5).unwrap()).unwrap(), 5);
    }

    #[test]
    fn matches_brute_force() {
        for seed in 0..200 {
            let n = 1 + (seed as usize % 6);
            let t = generate_random(n, seed);
            for k in 0..=n.min(2) {
                let c = canonical_fixing(&t, k).unwrap();
                assert_eq!((c.form.code, c.aut), canonical_brute(&t, k), "{t} k={k}");
                assert_eq!(t.permute(&c.perm).unwrap(), c.form.tournament());
            }
        }
    }

    #[test]
    fn capability_bound() {
        assert!(matches!(canonical_form(&Tournament::transitive(10)), Err(Error::Capability(_))));
        assert!(matches!(enumerate(9), Err(Error::Capability(_))));
    }

    #[test]
    fn small_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| enumerate(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 12, 56]);
    }
}
