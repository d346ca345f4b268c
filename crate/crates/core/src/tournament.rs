//! Tournaments as bitset adjacency, text encoding, and the extremal-family
//! generators.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A complete oriented graph on `0..n`. Row `i` is a bitset of the vertices
/// that `i` beats.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tournament {
    n: usize,
    words: usize,
    adj: Vec<u64>,
}

impl Tournament {
    /// Builds a tournament from `f(i, j)` = "i beats j", queried for i < j.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut t = Tournament { n, words, adj: vec![0; n * words] };
        for i in 0..n {
            for j in i + 1..n {
                if f(i, j) {
                    t.set_arc(i, j);
                } else {
                    t.set_arc(j, i);
                }
            }
        }
        t
    }

    pub fn empty() -> Self {
        Self::from_fn(0, |_, _| true)
    }

    /// Tr_n: i beats j whenever i < j.
    pub fn transitive(n: usize) -> Self {
        Self::from_fn(n, |_, _| true)
    }

    /// Decodes a pattern packed with the first pair (0,1) as the most
    /// significant of the n(n−1)/2 bits.
    pub fn from_code(n: usize, code: u64) -> Self {
        let m = n * n.saturating_sub(1) / 2;
        let mut p = 0;
        Self::from_fn(n, |_, _| {
            p += 1;
            (code >> (m - p)) & 1 == 1
        })
    }

    fn set_arc(&mut self, i: usize, j: usize) {
        self.adj[i * self.words + j / 64] |= 1 << (j % 64);
        self.adj[j * self.words + i / 64] &= !(1 << (i % 64));
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn beats(&self, i: usize, j: usize) -> bool {
        (self.adj[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    /// Out-neighbourhood of `v` as a bitset row (valid for n ≤ 64).
    #[inline]
    pub fn out_mask(&self, v: usize) -> u64 {
        debug_assert!(self.n <= 64);
        self.adj[v * self.words]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.adj[v * self.words..(v + 1) * self.words].iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.out_degree(v)).collect()
    }

    pub fn out_neighbours(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&w| w != v && self.beats(v, w)).collect()
    }

    pub fn in_neighbours(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&w| w != v && self.beats(w, v)).collect()
    }

    /// Packs the induced pattern on `vs` (in the given order) with the first
    /// pair most significant. `vs.len()` must be at most 11.
    #[inline]
    pub fn pattern_code(&self, vs: &[usize]) -> u64 {
        let mut code = 0u64;
        for (a, &i) in vs.iter().enumerate() {
            for &j in &vs[a + 1..] {
                code = (code << 1) | self.beats(i, j) as u64;
            }
        }
        code
    }

    /// Induced subtournament on `vs`, renumbered in the given order.
    pub fn induced(&self, vs: &[usize]) -> Result<Tournament> {
        if let Some(&v) = vs.iter().find(|&&v| v >= self.n) {
            return Err(Error::Index { vertex: v, n: self.n });
        }
        let mut seen = vec![false; self.n];
        for &v in vs {
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::Parse(format!("vertex {v} repeated")));
            }
        }
        Ok(Self::from_fn(vs.len(), |a, b| self.beats(vs[a], vs[b])))
    }

    /// Induced subtournament on a vertex set, renumbered order-preservingly.
    pub fn subtournament(&self, set: &[usize]) -> Result<Tournament> {
        let mut vs = set.to_vec();
        vs.sort_unstable();
        vs.dedup();
        self.induced(&vs)
    }

    /// Relabels so that new vertex `i` is old vertex `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Tournament> {
        if perm.len() != self.n {
            return Err(Error::Dimension(format!("permutation of length {} for n = {}", perm.len(), self.n)));
        }
        self.induced(perm)
    }

    pub fn encode(&self) -> String {
        let mut s = format!("{}:", self.n);
        for i in 0..self.n {
            for j in i + 1..self.n {
                s.push(if self.beats(i, j) { '1' } else { '0' });
            }
        }
        s
    }

    pub fn is_transitive(&self) -> bool {
        let mut d = self.out_degrees();
        d.sort_unstable();
        d.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// C(n,3) − Σ_v C(d⁺(v), 2).
    pub fn count_c3(&self) -> u64 {
        let n = self.n as u64;
        let total = n * n.saturating_sub(1) * n.saturating_sub(2) / 6;
        let trans: u64 = self.out_degrees().iter().map(|&d| (d as u64) * (d as u64).saturating_sub(1) / 2).sum();
        total - trans
    }

    /// Direct scan over all triples; oracle for `count_c3`.
    pub fn count_c3_brute(&self) -> u64 {
        let mut c = 0;
        for a in 0..self.n {
            for b in a + 1..self.n {
                for d in b + 1..self.n {
                    let x = self.beats(a, b);
                    if x == self.beats(b, d) && x == self.beats(d, a) {
                        c += 1;
                    }
                }
            }
        }
        c
    }

    pub fn is_strongly_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let reach = |forward: bool| {
            let mut seen = vec![false; self.n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for w in 0..self.n {
                    if !seen[w] && w != v && self.beats(v, w) == forward {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.iter().all(|&s| s)
        };
        reach(true) && reach(false)
    }

    /// Every out- and in-neighbourhood induces a transitive tournament.
    pub fn is_locally_transitive(&self) -> bool {
        (0..self.n).all(|v| {
            let out = self.induced(&self.out_neighbours(v)).expect("in range");
            let inn = self.induced(&self.in_neighbours(v)).expect("in range");
            out.is_transitive() && inn.is_transitive()
        })
    }
}

impl fmt::Display for Tournament {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl fmt::Debug for Tournament {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tournament({})", self.encode())
    }
}

impl FromStr for Tournament {
    type Err = Error;

    /// Parses "n:b₁b₂…" with the bits in row-major pair order.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("bad encoding {s:?}: {why}"));
        let (n, bits) = s.trim().split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let n: usize = n.parse().map_err(|_| bad("vertex count"))?;
        let bits = bits.as_bytes();
        if bits.len() != n * n.saturating_sub(1) / 2 {
            return Err(bad("wrong number of bits"));
        }
        if bits.iter().any(|&b| b != b'0' && b != b'1') {
            return Err(bad("bits must be 0 or 1"));
        }
        let mut p = 0;
        Ok(Self::from_fn(n, |_, _| {
            p += 1;
            bits[p - 1] == b'1'
        }))
    }
}

/// R_m: vertex v beats v+1, …, v+(m−1)/2 modulo m.
pub fn generate_carousel(m: usize) -> Result<Tournament> {
    if m.is_multiple_of(2) {
        return Err(Error::Parity(m));
    }
    let half = m / 2;
    Ok(Tournament::from_fn(m, |i, j| j - i <= half))
}

/// Part sizes n_0 ≥ n_1 ≥ n_2 of ▷_n, each ⌊n/3⌋ or ⌈n/3⌉.
pub fn triangular_parts(n: usize) -> [usize; 3] {
    let q = n / 3;
    match n % 3 {
        0 => [q, q, q],
        1 => [q + 1, q, q],
        _ => [q + 1, q + 1, q],
    }
}

/// ▷_n: consecutive blocks of sizes n_0, n_1, n_2, block i beating block
/// i+1 mod 3, each block recursively triangular.
pub fn generate_triangular(n: usize) -> Tournament {
    // block path of each vertex: for pairs in the same block at every level
    // above, the first level where they separate decides the arc.
    fn fill(lo: usize, n: usize, level_of: &mut [Vec<(usize, u8)>]) {
        if n <= 1 {
            return;
        }
        let p = triangular_parts(n);
        let mut start = lo;
        for (b, &size) in p.iter().enumerate() {
            for path in &mut level_of[start..start + size] {
                path.push((lo, b as u8));
            }
            fill(start, size, level_of);
            start += size;
        }
    }
    let mut paths = vec![Vec::new(); n];
    fill(0, n, &mut paths);
    Tournament::from_fn(n, |i, j| {
        let (pi, pj) = (&paths[i], &paths[j]);
        let k = pi.iter().zip(pj).position(|(a, b)| a != b).expect("distinct vertices separate");
        let (bi, bj) = (pi[k].1, pj[k].1);
        (bi + 1) % 3 == bj
    })
}

/// Each arc oriented by a fair coin, bits drawn in row-major pair order
/// from ChaCha8 seeded with `seed`.
pub fn generate_random(n: usize, seed: u64) -> Tournament {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Tournament::from_fn(n, |_, _| rng.gen::<bool>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_round_trip() {
        let c3: Tournament = "3:101".parse().unwrap();
        assert!(c3.beats(0, 1) && c3.beats(1, 2) && c3.beats(2, 0));
        assert_eq!(c3.encode(), "3:101");
        assert_eq!(Tournament::transitive(3).encode(), "3:111");
        assert!("3:10".parse::<Tournament>().is_err());
        assert!("3:1a1".parse::<Tournament>().is_err());
        assert_eq!("0:".parse::<Tournament>().unwrap().n(), 0);
    }

    #[test]
    fn code_round_trip() {
        let t = generate_random(6, 3);
        let vs: Vec<usize> = (0..6).collect();
        assert_eq!(Tournament::from_code(6, t.pattern_code(&vs)), t);
    }

    #[test]
    fn carousel_small() {
        assert_eq!(generate_carousel(3).unwrap().encode(), "3:101");
        let r5 = generate_carousel(5).unwrap();
        assert_eq!(r5.out_degrees(), vec![2; 5]);
        assert!(matches!(generate_carousel(4), Err(Error::Parity(4))));
        let r7 = generate_carousel(7).unwrap();
        assert!(r7.is_strongly_connected());
        assert!(r7.is_locally_transitive());
    }

    #[test]
    fn carousel_restriction_is_transitive() {
        let r5 = generate_carousel(5).unwrap();
        let sub = r5.subtournament(&[0, 1, 2]).unwrap();
        assert_eq!(sub, Tournament::transitive(3));
    }

    #[test]
    fn triangular_small() {
        assert_eq!(generate_triangular(3).encode(), "3:101");
        assert_eq!(generate_triangular(9).out_degrees(), vec![4; 9]);
        let t4 = generate_triangular(4);
        // 2-block {0,1} beats {2}, {2} beats {3}, {3} beats the 2-block
        assert_eq!(triangular_parts(4), [2, 1, 1]);
        assert_eq!(t4.out_degrees(), vec![2, 1, 1, 2]);
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(generate_random(12, 99), generate_random(12, 99));
        assert_ne!(generate_random(12, 99), generate_random(12, 100));
    }

    #[test]
    fn transitive_facts() {
        let t = Tournament::transitive(5);
        assert!(!t.is_strongly_connected());
        assert_eq!(t.count_c3(), 0);
        let r5 = generate_carousel(5).unwrap();
        assert!(r5.is_strongly_connected());
        assert_eq!(r5.count_c3(), 5);
        assert_eq!(r5.count_c3_brute(), 5);
    }

    #[test]
    fn out_of_range_vertex() {
        let t = Tournament::transitive(3);
        assert!(matches!(t.subtournament(&[0, 3]), Err(Error::Index { vertex: 3, n: 3 })));
        assert_eq!(t.subtournament(&[0, 1, 2]).unwrap(), t);
    }

    #[test]
    fn large_host_bitsets() {
        let t = generate_carousel(201).unwrap();
        assert!(t.beats(199, 0));
        assert!(!t.beats(0, 199));
        assert_eq!(t.out_degree(150), 100);
    }
}
