//! Induced-subtournament densities by exhaustive subset counting.

use std::collections::HashMap;

use num::{BigInt, BigUint, One, Zero};

use crate::canon::{aut_count, canonical_form, CanonicalForm, MAX_CANON};
use crate::catalog::t5_table;
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::par::{self, Exec};
use crate::tournament::Tournament;

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn falling(n: u64, k: u64) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * n.saturating_sub(i))
}

fn ratio(num: impl Into<BigUint>, den: BigUint) -> Rational {
    Rational::new(BigInt::from(num.into()), BigInt::from(den))
}

/// Counts of each T5^i (index 1..=12) over all 5-subsets of `u`.
pub fn t5_profile(u: &Tournament) -> [u64; 13] {
    t5_profile_with(u, Exec::default())
}

pub fn t5_profile_with(u: &Tournament, exec: Exec) -> [u64; 13] {
    let n = u.n();
    let table = t5_table();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    par::fold_range(
        exec,
        pairs.len(),
        || [0u64; 13],
        |mut acc, p| {
            let (a, b) = pairs[p];
            let ab = (u.beats(a, b) as usize) << 9;
            for c in b + 1..n {
                let abc = ab | (u.beats(a, c) as usize) << 8 | (u.beats(b, c) as usize) << 5;
                for d in c + 1..n {
                    let abcd = abc
                        | (u.beats(a, d) as usize) << 7
                        | (u.beats(b, d) as usize) << 4
                        | (u.beats(c, d) as usize) << 2;
                    for e in d + 1..n {
                        let code = abcd
                            | (u.beats(a, e) as usize) << 6
                            | (u.beats(b, e) as usize) << 3
                            | (u.beats(c, e) as usize) << 1
                            | u.beats(d, e) as usize;
                        acc[table[code] as usize] += 1;
                    }
                }
            }
            acc
        },
        |mut x, y| {
            for (a, b) in x.iter_mut().zip(y) {
                *a += b;
            }
            x
        },
    )
}

/// Counts of each isomorphism class over all k-subsets of `u` (k ≤ 9).
pub fn profile(u: &Tournament, k: usize) -> Result<HashMap<CanonicalForm, u64>> {
    profile_with(u, k, Exec::default())
}

pub fn profile_with(u: &Tournament, k: usize, exec: Exec) -> Result<HashMap<CanonicalForm, u64>> {
    if k > MAX_CANON {
        return Err(Error::Capability(format!("subset classes of size {k} exceed the canonical-form bound")));
    }
    let n = u.n();
    if k > n {
        return Ok(HashMap::new());
    }
    if k == 0 {
        return Ok(HashMap::from([(canonical_form(&Tournament::empty())?, 1)]));
    }
    type Acc = (HashMap<CanonicalForm, u64>, HashMap<u64, CanonicalForm>);
    let merged: Acc = par::fold_range(
        exec,
        n,
        || (HashMap::new(), HashMap::new()),
        |(mut counts, mut memo): Acc, first| {
            let mut vs = vec![first];
            extend(u, k, &mut vs, &mut |vs| {
                let code = u.pattern_code(vs);
                let form = *memo.entry(code).or_insert_with(|| {
                    canonical_form(&Tournament::from_code(k, code)).expect("k within bound")
                });
                *counts.entry(form).or_insert(0) += 1;
            });
            (counts, memo)
        },
        |(mut a, m), (b, _)| {
            for (f, c) in b {
                *a.entry(f).or_insert(0) += c;
            }
            (a, m)
        },
    );
    Ok(merged.0)
}

// Enumerates increasing extensions of `vs` to length k.
fn extend(u: &Tournament, k: usize, vs: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if vs.len() == k {
        f(vs);
        return;
    }
    let last = *vs.last().expect("nonempty");
    let need = k - vs.len();
    for w in last + 1..=u.n() - need {
        vs.push(w);
        extend(u, k, vs, f);
        vs.pop();
    }
}

/// Number of |t|-subsets of `u` inducing a copy of `t`.
pub fn count_copies(t: &Tournament, u: &Tournament) -> Result<BigUint> {
    if t.n() > u.n() {
        return Err(Error::Size(format!("pattern of size {} in host of size {}", t.n(), u.n())));
    }
    if t.n() == 5 {
        let idx = crate::catalog::t5_index(t).expect("n = 5");
        return Ok(BigUint::from(t5_profile(u)[idx]));
    }
    let form = canonical_form(t)?;
    Ok(BigUint::from(profile(u, t.n())?.get(&form).copied().unwrap_or(0)))
}

/// p(T;U): probability that a uniform |T|-subset of U induces a copy of T.
pub fn density(t: &Tournament, u: &Tournament) -> Result<Rational> {
    let copies = count_copies(t, u)?;
    Ok(ratio(copies, binomial(u.n() as u64, t.n() as u64)))
}

/// t_ind(T;U) = |Aut(T)|/|T|! · p(T;U).
pub fn t_ind(t: &Tournament, u: &Tournament) -> Result<Rational> {
    let p = density(t, u)?;
    let aut = aut_count(t)?;
    Ok(p * ratio(BigUint::from(aut), falling(t.n() as u64, t.n() as u64)))
}

/// Injective maps V(T) → V(U) that preserve every arc. Oracle path.
pub fn count_embeddings(t: &Tournament, u: &Tournament) -> u64 {
    fn rec(t: &Tournament, u: &Tournament, img: &mut Vec<usize>, used: &mut Vec<bool>) -> u64 {
        let i = img.len();
        if i == t.n() {
            return 1;
        }
        let mut total = 0;
        for w in 0..u.n() {
            if used[w] || !(0..i).all(|j| t.beats(j, i) == u.beats(img[j], w)) {
                continue;
            }
            used[w] = true;
            img.push(w);
            total += rec(t, u, img, used);
            img.pop();
            used[w] = false;
        }
        total
    }
    rec(t, u, &mut Vec::new(), &mut vec![false; u.n()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{lookup, t5};
    use crate::exact::rat;
    use crate::tournament::generate_carousel;

    #[test]
    fn small_densities() {
        let c3 = lookup("C3").unwrap();
        let tr3 = lookup("Tr3").unwrap();
        assert_eq!(density(&c3, &Tournament::transitive(5)).unwrap(), rat(0, 1));
        let r5 = generate_carousel(5).unwrap();
        assert_eq!(density(&c3, &r5).unwrap(), rat(1, 2));
        assert_eq!(density(&tr3, &r5).unwrap(), rat(1, 2));
        assert_eq!(t_ind(&r5, &r5).unwrap(), rat(1, 24));
        assert!(matches!(density(&r5, &c3), Err(Error::Size(_))));
    }

    #[test]
    fn t5_profile_agrees_with_general_profile() {
        let u = crate::tournament::generate_random(9, 4);
        let fast = t5_profile_with(&u, Exec::Sequential);
        let slow = profile_with(&u, 5, Exec::Sequential).unwrap();
        for i in 1..=12 {
            let f = canonical_form(&t5(i)).unwrap();
            assert_eq!(fast[i], slow.get(&f).copied().unwrap_or(0));
        }
        assert_eq!(fast, t5_profile_with(&u, Exec::Parallel));
    }

    #[test]
    fn embeddings_match_copies_times_aut() {
        let r7 = generate_carousel(7).unwrap();
        let r5 = generate_carousel(5).unwrap();
        let copies = count_copies(&r5, &r7).unwrap();
        assert_eq!(BigUint::from(count_embeddings(&r5, &r7)), copies * 5u32);
    }
}
