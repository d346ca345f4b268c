//! C3-decompositions: the constructive recognizer, the forbidden-pattern
//! scanner, skewness and k-equally checks, plus the quasi-random value and
//! finite-scale densities of the extremal families.

use num::{BigInt, BigUint, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canon::{aut_count, canonical_form};
use crate::catalog::{t5_index, t5_table};
use crate::density::{binomial, density, falling};
use crate::error::{Error, Result};
use crate::exact::{rat, to_f64, Rational};
use crate::par::{self, Exec};
use crate::tournament::{generate_carousel, generate_random, generate_triangular, Tournament};

/// The size-5 patterns whose absence characterizes C3-decomposability.
pub const FORBIDDEN: [usize; 3] = [8, 10, 12];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionTree {
    pub vertices: Vec<usize>,
    #[serde(rename = "A")]
    pub a: Option<Box<DecompositionTree>>,
    #[serde(rename = "B")]
    pub b: Option<Box<DecompositionTree>>,
    #[serde(rename = "C")]
    pub c: Option<Box<DecompositionTree>>,
}

impl DecompositionTree {
    fn leaf(vertices: Vec<usize>) -> Self {
        DecompositionTree { vertices, a: None, b: None, c: None }
    }

    pub fn is_leaf(&self) -> bool {
        self.a.is_none()
    }

    pub fn parts(&self) -> [Option<&DecompositionTree>; 3] {
        [self.a.as_deref(), self.b.as_deref(), self.c.as_deref()]
    }

    /// Sizes of the top-level parts (C is 0 when absent).
    pub fn top_sizes(&self) -> [usize; 3] {
        self.parts().map(|p| p.map_or(0, |t| t.vertices.len()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbiddenWitness {
    pub pattern: String,
    pub subset: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    Tree(DecompositionTree),
    Forbidden(ForbiddenWitness),
}

impl Decomposition {
    pub fn is_tree(&self) -> bool {
        matches!(self, Decomposition::Tree(_))
    }
}

fn witness(t: &Tournament, vs: [usize; 5]) -> ForbiddenWitness {
    let mut subset = vs.to_vec();
    subset.sort_unstable();
    let sub = t.induced(&subset).expect("in range");
    let i = t5_index(&sub).expect("five vertices");
    ForbiddenWitness { pattern: format!("T5^{i}"), subset }
}

/// Inductive recognizer: a transitive tournament splits off its
/// source; otherwise a 3-cycle minimising |V_abc ∪ V_∅| classifies every
/// other vertex, each violated arc condition yields a forbidden 5-set, and
/// the surviving structure gives the (A, B, C) split.
pub fn c3_decompose(t: &Tournament) -> Decomposition {
    let vs: Vec<usize> = (0..t.n()).collect();
    match decompose_set(t, &vs) {
        Ok(tree) => Decomposition::Tree(tree),
        Err(w) => Decomposition::Forbidden(w),
    }
}

fn decompose_set(t: &Tournament, vs: &[usize]) -> std::result::Result<DecompositionTree, ForbiddenWitness> {
    if vs.len() <= 1 {
        return Ok(DecompositionTree::leaf(vs.to_vec()));
    }
    let [a, b, c] = split(t, vs)?;
    let sub = |p: Vec<usize>| -> std::result::Result<Option<Box<DecompositionTree>>, ForbiddenWitness> {
        if p.is_empty() {
            Ok(None)
        } else {
            decompose_set(t, &p).map(|x| Some(Box::new(x)))
        }
    };
    Ok(DecompositionTree { vertices: vs.to_vec(), a: sub(a)?, b: sub(b)?, c: sub(c)? })
}

fn all_beat(t: &Tournament, xs: &[usize], ys: &[usize]) -> Option<(usize, usize)> {
    for &x in xs {
        for &y in ys {
            if !t.beats(x, y) {
                return Some((x, y));
            }
        }
    }
    None
}

fn split(t: &Tournament, vs: &[usize]) -> std::result::Result<[Vec<usize>; 3], ForbiddenWitness> {
    let deg = |v: usize| vs.iter().filter(|&&w| w != v && t.beats(v, w)).count();
    let mut degs: Vec<usize> = vs.iter().map(|&v| deg(v)).collect();
    let source = vs[degs.iter().enumerate().max_by_key(|&(i, &d)| (d, std::cmp::Reverse(i))).expect("nonempty").0];
    degs.sort_unstable();
    if degs.iter().enumerate().all(|(i, &d)| i == d) {
        let rest = vs.iter().copied().filter(|&v| v != source).collect();
        return Ok([vec![source], rest, Vec::new()]);
    }

    // 3-cycle (a, b, c), a → b → c → a, minimising |V_abc| + |V_∅|
    let mut best: Option<(usize, [usize; 3])> = None;
    for (i, &x) in vs.iter().enumerate() {
        for (j, &y) in vs.iter().enumerate().skip(i + 1) {
            for &z in &vs[j + 1..] {
                let cyc = if t.beats(x, y) && t.beats(y, z) && t.beats(z, x) {
                    [x, y, z]
                } else if t.beats(x, z) && t.beats(z, y) && t.beats(y, x) {
                    [x, z, y]
                } else {
                    continue;
                };
                let score = vs
                    .iter()
                    .filter(|&&v| !cyc.contains(&v))
                    .filter(|&&v| {
                        let w = cyc.iter().filter(|&&u| t.beats(v, u)).count();
                        w == 0 || w == 3
                    })
                    .count();
                if best.is_none_or(|(s, _)| score < s) {
                    best = Some((score, cyc));
                }
            }
        }
    }
    let [a, b, c] = best.expect("non-transitive tournaments contain a 3-cycle").1;

    let (mut v_abc, mut v_ab, mut v_bc, mut v_ac) = (vec![], vec![], vec![], vec![]);
    let (mut v_a, mut v_b, mut v_c, mut v_0) = (vec![], vec![], vec![], vec![]);
    for &v in vs.iter().filter(|&&v| v != a && v != b && v != c) {
        match (t.beats(v, a), t.beats(v, b), t.beats(v, c)) {
            (true, true, true) => v_abc.push(v),
            (true, true, false) => v_ab.push(v),
            (false, true, true) => v_bc.push(v),
            (true, false, true) => v_ac.push(v),
            (true, false, false) => v_a.push(v),
            (false, true, false) => v_b.push(v),
            (false, false, true) => v_c.push(v),
            (false, false, false) => v_0.push(v),
        }
    }
    let cat = |xs: [&Vec<usize>; 3]| -> Vec<usize> { xs.iter().flat_map(|x| x.iter().copied()).collect() };
    let singles = cat([&v_a, &v_b, &v_c]);
    let doubles = cat([&v_ab, &v_bc, &v_ac]);
    let conditions: [(&[usize], &[usize]); 16] = [
        (&v_ab, &v_bc),
        (&v_bc, &v_ac),
        (&v_ac, &v_ab),
        (&v_a, &v_b),
        (&v_b, &v_c),
        (&v_c, &v_a),
        (&v_a, &v_ab),
        (&v_b, &v_bc),
        (&v_c, &v_ac),
        (&v_ab, &v_c),
        (&v_bc, &v_a),
        (&v_ac, &v_b),
        (&v_abc, &singles),
        (&v_abc, &doubles),
        (&singles, &v_0),
        (&doubles, &v_0),
    ];
    for (xs, ys) in conditions.iter().chain(std::iter::once(&(&v_abc[..], &v_0[..]))) {
        if let Some((x, y)) = all_beat(t, xs, ys) {
            return Err(witness(t, [a, b, c, x, y]));
        }
    }

    let rest = |skip: &[usize]| vs.iter().copied().filter(|v| !skip.contains(v)).collect::<Vec<_>>();
    if !v_abc.is_empty() {
        let r = rest(&v_abc);
        return Ok([v_abc, r, Vec::new()]);
    }
    if !v_0.is_empty() {
        let r = rest(&v_0);
        return Ok([r, v_0, Vec::new()]);
    }
    let mut pa = vec![a];
    pa.extend(&v_b);
    pa.extend(&v_ab);
    let mut pb = vec![b];
    pb.extend(&v_c);
    pb.extend(&v_bc);
    let mut pc = vec![c];
    pc.extend(&v_a);
    pc.extend(&v_ac);
    for p in [&mut pa, &mut pb, &mut pc] {
        p.sort_unstable();
    }
    Ok([pa, pb, pc])
}

/// Every 5-subset inducing T5^8, T5^10 or T5^12.
pub fn scan_forbidden(t: &Tournament) -> Vec<ForbiddenWitness> {
    scan_forbidden_with(t, Exec::default())
}

pub fn scan_forbidden_with(t: &Tournament, exec: Exec) -> Vec<ForbiddenWitness> {
    let n = t.n();
    if n < 5 {
        return Vec::new();
    }
    let table = t5_table();
    let per_first = par::map_range(exec, n, |a| {
        let mut out = Vec::new();
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    for e in d + 1..n {
                        let vs = [a, b, c, d, e];
                        let i = table[t.pattern_code(&vs) as usize] as usize;
                        if FORBIDDEN.contains(&i) {
                            out.push(ForbiddenWitness { pattern: format!("T5^{i}"), subset: vs.to_vec() });
                        }
                    }
                }
            }
        }
        out
    });
    per_first.into_iter().flatten().collect()
}

/// Re-checks a tree against the definition: parts partition each node into
/// strictly smaller sets with A×B, B×C, C×A all arcs, down to single vertices.
pub fn verify_tree(t: &Tournament, tree: &DecompositionTree) -> bool {
    let mut all = tree.vertices.clone();
    all.sort_unstable();
    all == (0..t.n()).collect::<Vec<_>>() && verify_node(t, tree)
}

fn verify_node(t: &Tournament, node: &DecompositionTree) -> bool {
    let n = node.vertices.len();
    if node.is_leaf() {
        return n <= 1 && node.b.is_none() && node.c.is_none();
    }
    let parts: Vec<&[usize]> = node.parts().iter().map(|p| p.map_or(&[][..], |x| &x.vertices[..])).collect();
    let mut union: Vec<usize> = parts.concat();
    union.sort_unstable();
    let mut own = node.vertices.clone();
    own.sort_unstable();
    if union != own || parts.iter().any(|p| p.len() >= n) {
        return false;
    }
    let arcs = all_beat(t, parts[0], parts[1]).is_none()
        && all_beat(t, parts[1], parts[2]).is_none()
        && all_beat(t, parts[2], parts[0]).is_none();
    arcs && node.parts().iter().flatten().all(|p| verify_node(t, p))
}

fn level_range(node: Option<&DecompositionTree>, k: usize) -> (usize, usize) {
    let Some(node) = node else { return (0, 0) };
    let n = node.vertices.len();
    if k == 0 {
        return (n, n);
    }
    if node.is_leaf() {
        // a single vertex continues as ({v}, ∅, ∅)
        return (0, n.min(1));
    }
    node.parts().iter().map(|p| level_range(*p, k - 1)).fold((usize::MAX, 0), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)))
}

/// Δ_k: max − min of |A_σ| over all 3^k indices σ of length k, absent parts
/// counting as empty.
pub fn skewness(tree: &DecompositionTree, k: usize) -> usize {
    let (lo, hi) = level_range(Some(tree), k);
    hi - lo
}

/// Smallest set containing `seed` that every outside vertex either beats
/// entirely or loses to entirely.
fn module_closure(t: &Tournament, vs: &[usize], seed: &[usize]) -> Vec<usize> {
    let mut m = seed.to_vec();
    loop {
        let split = vs.iter().copied().find(|&w| {
            !m.contains(&w) && m.iter().any(|&x| t.beats(w, x)) && m.iter().any(|&x| t.beats(x, w))
        });
        match split {
            Some(w) => m.push(w),
            None => return m,
        }
    }
}

// The cyclic split with all three parts nonempty, which is unique when it
// exists: A is the part of vs[0], and any vertex outside A forces the module
// generated with vs[0] to be everything.
fn cyclic_split(t: &Tournament, vs: &[usize]) -> Option<[Vec<usize>; 3]> {
    let v = vs[0];
    let a: Vec<usize> = vs.iter().copied().filter(|&u| u == v || module_closure(t, vs, &[v, u]).len() < vs.len()).collect();
    let b: Vec<usize> = vs.iter().copied().filter(|u| !a.contains(u) && t.beats(v, *u)).collect();
    let c: Vec<usize> = vs.iter().copied().filter(|u| !a.contains(u) && !b.contains(u)).collect();
    if b.is_empty() || c.is_empty() {
        return None;
    }
    let ok = all_beat(t, &a, &b).is_none() && all_beat(t, &b, &c).is_none() && all_beat(t, &c, &a).is_none();
    ok.then_some([a, b, c])
}

/// k-equally C3-decomposable: |T| ≤ 1, or a split with part sizes within one
/// of each other whose parts are (k−1)-equally decomposable; 0-equally means
/// C3-decomposable.
pub fn is_k_equally(t: &Tournament, k: usize) -> bool {
    let vs: Vec<usize> = (0..t.n()).collect();
    k_equally(t, &vs, k)
}

fn k_equally(t: &Tournament, vs: &[usize], k: usize) -> bool {
    if vs.len() <= 1 {
        return true;
    }
    if k == 0 {
        return decompose_set(t, vs).is_ok();
    }
    if vs.len() == 2 {
        return true;
    }
    let Some(parts) = cyclic_split(t, vs) else { return false };
    let sizes = parts.iter().map(Vec::len);
    let (lo, hi) = (sizes.clone().min().unwrap_or(0), sizes.max().unwrap_or(0));
    hi - lo <= 1 && parts.iter().all(|p| k_equally(t, p, k - 1))
}

/// φ_qr(T) = ℓ!/(|Aut(T)|·2^C(ℓ,2)), the density of T in the quasi-random
/// limit.
pub fn phi_qr_value(t: &Tournament) -> Result<Rational> {
    let l = t.n() as u64;
    let aut = aut_count(t)?;
    let den = BigUint::from(aut) << (l * l.saturating_sub(1) / 2) as usize;
    Ok(Rational::new(BigInt::from(falling(l, l)), BigInt::from(den)))
}

/// F(k) = 3·C(3^{k−1},2)²·3^{k−1} + 3F(k−1), F(1) = 0: labelled copies of
/// T5^9 in ▷_{3^k}.
pub fn triangular_t5_9_count(k: u32) -> BigUint {
    let mut f = BigUint::zero();
    for j in 2..=k {
        let m = BigUint::from(3u32).pow(j - 1);
        let c2 = &m * (&m - 1u32) / 2u32;
        f = BigUint::from(3u32) * &c2 * &c2 * &m + BigUint::from(3u32) * f;
    }
    f
}

/// The labelling of T5^9 used by the counting recursion: 1→2→3→4→5→1 plus
/// 1→3, 1→4, 2→4, 3→5, 5→2 (here 0-based).
pub fn t5_9_labelled() -> Tournament {
    let arcs = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2), (0, 3), (1, 3), (2, 4), (4, 1)];
    Tournament::from_fn(5, |i, j| arcs.contains(&(i, j)))
}

/// (2n+1) Σ_{i=1}^n Σ_{j=i+1}^n i(j−i+1).
pub fn carousel_t5_12_sum(n: u64) -> u128 {
    let mut s = 0u128;
    for i in 1..=n as u128 {
        for j in i + 1..=n as u128 {
            s += i * (j - i + 1);
        }
    }
    (2 * n as u128 + 1) * s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Carousel,
    Triangular,
    Random,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "carousel" => Ok(Family::Carousel),
            "triangular" => Ok(Family::Triangular),
            "random" => Ok(Family::Random),
            _ => Err(Error::Lookup(s.to_string())),
        }
    }
}

/// The asymptotic densities proved for the extremal families.
pub fn known_limit(family: Family, target: &str) -> Option<Rational> {
    match (family, target) {
        (Family::Carousel, "T5^7") => Some(rat(5, 16)),
        (Family::Carousel, "T5^12") => Some(rat(1, 16)),
        (Family::Triangular, "T5^9") => Some(rat(3, 8)),
        (Family::Triangular, "T5^11") => Some(rat(1, 16)),
        (Family::Random, name) => crate::catalog::lookup(name).ok().and_then(|t| phi_qr_value(&t).ok()),
        _ => None,
    }
}

/// Sizes used by the limit runs up to `max`: carousels 11, 21, 31, …;
/// triangular powers of three from 9; random hosts halving down from `max`.
pub fn default_sizes(family: Family, max: usize) -> Vec<usize> {
    match family {
        Family::Carousel => {
            let v: Vec<usize> = (11..=max).step_by(10).collect();
            if v.is_empty() {
                vec![max | 1]
            } else {
                v
            }
        }
        Family::Triangular => {
            let mut v = Vec::new();
            let mut m = 9;
            while m <= max {
                v.push(m);
                m *= 3;
            }
            if v.is_empty() {
                v.push(max);
            }
            v
        }
        Family::Random => {
            let mut v = Vec::new();
            let mut m = max;
            while m >= 25 && v.len() < 4 {
                v.push(m);
                m /= 2;
            }
            if v.is_empty() {
                v.push(max);
            }
            v.reverse();
            v
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitRow {
    pub size: usize,
    /// Exact density (exact families only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub density: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct LimitOptions {
    pub seed: u64,
    /// Largest number of subsets counted exactly per host.
    pub budget: u64,
    pub tournaments: usize,
    pub samples_per_tournament: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { seed: 0, budget: 300_000_000, tournaments: 100, samples_per_tournament: 1000 }
    }
}

#[derive(Debug)]
pub struct LimitError {
    pub partial: Vec<LimitRow>,
    pub error: Error,
}

impl std::fmt::Display for LimitError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} rows)", self.error, self.partial.len())
    }
}

impl std::error::Error for LimitError {}

/// Densities of `target` in members of `family` at the given sizes: exact
/// subset counts for carousels and triangular blow-ups, Monte Carlo for
/// random tournaments.
pub fn empirical_limit(
    family: Family,
    target: &Tournament,
    target_name: &str,
    sizes: &[usize],
    opts: LimitOptions,
) -> std::result::Result<Vec<LimitRow>, LimitError> {
    let limit = known_limit(family, target_name).map(|r| to_f64(&r));
    let mut rows = Vec::new();
    for &n in sizes {
        let row = match family {
            Family::Random => monte_carlo_density(target, n, opts.tournaments, opts.samples_per_tournament, opts.seed)
                .map(|mc| LimitRow {
                    size: n,
                    exact: None,
                    density: mc.estimate,
                    gap: limit.map(|l| (mc.estimate - l).abs()),
                    samples: Some(mc.samples),
                    stderr: Some(mc.stderr),
                }),
            _ => exact_row(family, target, n, opts.budget, limit),
        };
        match row {
            Ok(r) => rows.push(r),
            Err(error) => return Err(LimitError { partial: rows, error }),
        }
    }
    Ok(rows)
}

fn exact_row(family: Family, target: &Tournament, n: usize, budget: u64, limit: Option<f64>) -> Result<LimitRow> {
    let subsets = binomial(n as u64, target.n() as u64);
    if subsets > BigUint::from(budget) {
        return Err(Error::Capability(format!("{subsets} subsets at size {n} exceed the budget of {budget}")));
    }
    let host = match family {
        Family::Carousel => generate_carousel(n)?,
        _ => generate_triangular(n),
    };
    let p = density(target, &host)?;
    let d = to_f64(&p);
    Ok(LimitRow { size: n, exact: Some(p.to_string()), density: d, gap: limit.map(|l| (d - l).abs()), samples: None, stderr: None })
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarlo {
    pub n: usize,
    pub tournaments: usize,
    pub samples: u64,
    pub hits: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub seed: u64,
}

/// Samples `per` uniform |T|-subsets from each of `tournaments` independent
/// random tournaments on n vertices. Tournament j is generated from a seed
/// drawn from ChaCha8 seeded with `seed`.
pub fn monte_carlo_density(target: &Tournament, n: usize, tournaments: usize, per: usize, seed: u64) -> Result<MonteCarlo> {
    let k = target.n();
    if k > n {
        return Err(Error::Size(format!("pattern of size {k} in hosts of size {n}")));
    }
    let target_form = canonical_form(target)?;
    let t5 = t5_index(target);
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..tournaments).map(|_| master.gen()).collect();
    let hits: Vec<u64> = par::map_slice(Exec::default(), &seeds, |&s| {
        let host = generate_random(n, s);
        let mut rng = ChaCha8Rng::seed_from_u64(s.rotate_left(17) ^ 0x5eed);
        let mut h = 0;
        for _ in 0..per {
            let mut vs = sample(&mut rng, n, k).into_vec();
            vs.sort_unstable();
            let hit = match t5 {
                Some(i) => t5_table()[host.pattern_code(&vs) as usize] as usize == i,
                None => canonical_form(&host.induced(&vs).expect("in range")).ok() == Some(target_form),
            };
            h += hit as u64;
        }
        h
    });
    let hits: u64 = hits.iter().sum();
    let samples = (tournaments * per) as u64;
    let p = hits as f64 / samples as f64;
    Ok(MonteCarlo { n, tournaments, samples, hits, estimate: p, stderr: (p * (1.0 - p) / samples as f64).sqrt(), seed })
}

/// Ratio 4!·S(n)/(2n+1)_5 of the carousel sum to all ordered 5-tuples,
/// which tends to 1/16.
pub fn carousel_sum_ratio(n: u64) -> Rational {
    let s = BigUint::from(carousel_t5_12_sum(n));
    Rational::new(BigInt::from(s * 24u32), BigInt::from(falling(2 * n + 1, 5)))
}

/// p(T5^9; ▷_{3^k}) predicted by the recursion: F(k)·5!/(3^k)_5.
pub fn triangular_t5_9_density(k: u32) -> Rational {
    let n = 3u64.pow(k);
    Rational::new(BigInt::from(triangular_t5_9_count(k) * 120u32), BigInt::from(falling(n, 5)))
}
