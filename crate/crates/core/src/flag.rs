//! Types, flags, joint densities, the flag product, q_σ and the downward
//! operator ⟦·⟧_σ.
//!
//! A σ-flag is stored with its labelled vertices at positions 0..k in label
//! order, so the type is the induced subtournament on 0..k and flag
//! isomorphism is canonical form with those positions held fixed.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use num::{BigInt, BigUint, One, Zero};
use serde::Deserialize;

use crate::canon::{canonical_fixing, canonical_form, CanonicalForm};
use crate::density::{binomial, falling};
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::tournament::Tournament;

pub const MAX_FLAG_SIZE: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagType {
    pub name: String,
    pub sigma: Tournament,
}

impl FlagType {
    pub fn k(&self) -> usize {
        self.sigma.n()
    }
}

/// "0", "1", "A" (1 beats 2), "Tr3s" (1 beats 2 and 3, 2 beats 3) and
/// "C3s" (1 beats 2 beats 3 beats 1). "Tr3*" and "C3*" are accepted too.
pub fn flag_type(name: &str) -> Result<FlagType> {
    let (canonical, sigma) = match name {
        "0" => ("0", Tournament::empty()),
        "1" => ("1", Tournament::transitive(1)),
        "A" => ("A", Tournament::transitive(2)),
        "Tr3s" | "Tr3*" => ("Tr3s", Tournament::transitive(3)),
        "C3s" | "C3*" => ("C3s", "3:101".parse()?),
        _ => return Err(Error::Lookup(name.to_string())),
    };
    Ok(FlagType { name: canonical.to_string(), sigma })
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Flag {
    k: usize,
    t: Tournament,
}

impl Flag {
    /// `labeling[i]` is the vertex of `base` carrying label i+1; it must be an
    /// isomorphism from σ onto the induced subtournament.
    pub fn new(sigma: &Tournament, base: &Tournament, labeling: &[usize]) -> Result<Flag> {
        if labeling.len() != sigma.n() {
            return Err(Error::Type(format!("{} labels for a type of size {}", labeling.len(), sigma.n())));
        }
        let mut order = labeling.to_vec();
        order.extend((0..base.n()).filter(|v| !labeling.contains(v)));
        let t = base.induced(&order)?;
        Self::from_prefix(sigma, t)
    }

    /// Labels are vertices 0..k of `t`, in order.
    pub fn from_prefix(sigma: &Tournament, t: Tournament) -> Result<Flag> {
        let k = sigma.n();
        if k > t.n() {
            return Err(Error::Size(format!("type of size {k} in a tournament of size {}", t.n())));
        }
        let labels: Vec<usize> = (0..k).collect();
        if t.induced(&labels)? != *sigma {
            return Err(Error::Type("labelled vertices do not induce the type".into()));
        }
        Ok(Flag { k, t })
    }

    /// 1_σ, the flag of size |σ|.
    pub fn unit(sigma: &Tournament) -> Flag {
        Flag { k: sigma.n(), t: sigma.clone() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn size(&self) -> usize {
        self.t.n()
    }

    pub fn tournament(&self) -> &Tournament {
        &self.t
    }

    pub fn sigma(&self) -> Tournament {
        self.t.induced(&(0..self.k).collect::<Vec<_>>()).expect("prefix in range")
    }

    pub fn canonical(&self) -> Result<CanonicalForm> {
        Ok(canonical_fixing(&self.t, self.k)?.form)
    }

    pub fn is_isomorphic(&self, other: &Flag) -> Result<bool> {
        Ok(self.k == other.k && self.size() == other.size() && self.canonical()? == other.canonical()?)
    }

    pub fn from_canonical(form: CanonicalForm) -> Flag {
        Flag { k: form.k as usize, t: form.tournament() }
    }

    /// "type-free" key: encoding plus label map "1:v1,2:v2,…".
    pub fn label_map(&self) -> String {
        (0..self.k).map(|i| format!("{}:{}", i + 1, i)).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Debug for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Flag({} [{}])", self.t.encode(), self.label_map())
    }
}

#[derive(Deserialize)]
struct NamedEntry {
    name: String,
    #[serde(rename = "type")]
    ty: String,
    encoding: String,
}

fn named_entries() -> &'static [(String, String, Flag)] {
    static NAMED: OnceLock<Vec<(String, String, Flag)>> = OnceLock::new();
    NAMED.get_or_init(|| {
        let raw: Vec<NamedEntry> =
            serde_json::from_str(include_str!("../data/flags.json")).expect("flags.json is well formed");
        raw.into_iter()
            .map(|e| {
                let ty = flag_type(&e.ty).expect("known type");
                let t: Tournament = e.encoding.parse().expect("flag encodings parse");
                let f = Flag::from_prefix(&ty.sigma, t).expect("named flags embed their type");
                (e.name, ty.name, f)
            })
            .collect()
    })
}

pub fn named_flag(name: &str) -> Result<Flag> {
    named_entries()
        .iter()
        .find(|(n, _, _)| n == name)
        .map(|(_, _, f)| f.clone())
        .ok_or_else(|| Error::Lookup(name.to_string()))
}

/// Type name of a named flag.
pub fn named_flag_type(name: &str) -> Result<FlagType> {
    let (_, ty, _) = named_entries().iter().find(|(n, _, _)| n == name).ok_or_else(|| Error::Lookup(name.to_string()))?;
    flag_type(ty)
}

pub fn flag_name(f: &Flag) -> Option<String> {
    let c = f.canonical().ok()?;
    named_entries()
        .iter()
        .find(|(_, _, g)| g.k == f.k && g.size() == f.size() && g.sigma() == f.sigma() && g.canonical().ok() == Some(c))
        .map(|(n, _, _)| n.clone())
}

#[derive(Clone, Debug)]
pub struct FlagBasis {
    pub ty: FlagType,
    pub size: usize,
    pub flags: Vec<Flag>,
}

impl FlagBasis {
    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn names(&self) -> Vec<Option<String>> {
        self.flags.iter().map(flag_name).collect()
    }
}

/// The shipped basis for a named type, in matrix-header order.
pub fn named_basis(ty: &FlagType) -> Option<FlagBasis> {
    let flags: Vec<Flag> = named_entries().iter().filter(|(_, t, _)| *t == ty.name).map(|(_, _, f)| f.clone()).collect();
    let size = flags.iter().map(Flag::size).max()?;
    let flags = flags.into_iter().filter(|f| f.size() == size).collect();
    Some(FlagBasis { ty: ty.clone(), size, flags })
}

/// F^σ_n: all σ-flags of size n up to isomorphism. Named bases come in
/// header order; everything else in canonical-encoding order.
pub fn enumerate_flags(ty: &FlagType, n: usize) -> Result<FlagBasis> {
    let k = ty.k();
    if n < k || n > MAX_FLAG_SIZE {
        return Err(Error::Capability(format!("flags of size {n} over a type of size {k} (need {k} ≤ n ≤ {MAX_FLAG_SIZE})")));
    }
    if let Some(b) = named_basis(ty).filter(|b| b.size == n) {
        return Ok(b);
    }
    Ok(FlagBasis { ty: ty.clone(), size: n, flags: enumerate_canonical(ty, n)? })
}

pub(crate) fn enumerate_canonical(ty: &FlagType, n: usize) -> Result<Vec<Flag>> {
    let k = ty.k();
    let free: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(_, j)| j >= k).collect();
    let mut forms = Vec::with_capacity(1 << free.len());
    for mask in 0u64..1 << free.len() {
        let mut p = 0;
        let t = Tournament::from_fn(n, |i, j| {
            if j < k {
                ty.sigma.beats(i, j)
            } else {
                p += 1;
                mask >> (p - 1) & 1 == 1
            }
        });
        forms.push(canonical_fixing(&t, k)?.form);
    }
    forms.sort_unstable();
    forms.dedup();
    Ok(forms.into_iter().map(Flag::from_canonical).collect())
}

/// Formal combination with no zero coefficients stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearCombination {
    terms: BTreeMap<CanonicalForm, Rational>,
}

impl LinearCombination {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: CanonicalForm, coef: Rational) {
        let entry = self.terms.entry(key).or_insert_with(Rational::zero);
        *entry += coef;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn get(&self, key: &CanonicalForm) -> Rational {
        self.terms.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalForm, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut out = Self::new();
        for (k, v) in &self.terms {
            out.add(*k, v * c);
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add(*k, v.clone());
        }
        out
    }

    /// JSON-friendly map from encoding (with ";k" for flags) to "p/q".
    pub fn to_string_map(&self) -> BTreeMap<String, String> {
        self.terms
            .iter()
            .map(|(k, v)| {
                let key = if k.k == 0 { k.to_string() } else { format!("{};{}", k, k.k) };
                (key, v.to_string())
            })
            .collect()
    }
}

fn check_same_type(flags: &[&Flag]) -> Result<()> {
    let first = flags[0];
    let sigma = first.sigma();
    for f in &flags[1..] {
        if f.k != first.k || f.sigma() != sigma {
            return Err(Error::Type("flags over different types".into()));
        }
    }
    Ok(())
}

/// p(F_1, …, F_t; F): probability that disjoint uniform subsets W_i of the
/// unlabelled vertices of F, |W_i| = |F_i| − k, each induce (with the labels)
/// a copy of F_i.
pub fn joint_density(flags: &[Flag], f: &Flag) -> Result<Rational> {
    if flags.is_empty() {
        return Ok(Rational::one());
    }
    let mut all: Vec<&Flag> = flags.iter().collect();
    all.push(f);
    check_same_type(&all)?;
    let k = f.k;
    let sizes: Vec<usize> = flags.iter().map(|g| g.size() - k).collect();
    let needed: usize = sizes.iter().sum();
    let free = f.size() - k;
    if needed > free {
        return Err(Error::Size(format!("flags need {needed} unlabelled vertices, host has {free}")));
    }
    let targets = flags.iter().map(Flag::canonical).collect::<Result<Vec<_>>>()?;
    let mut total = BigUint::one();
    let mut left = free as u64;
    for &s in &sizes {
        total *= binomial(left, s as u64);
        left -= s as u64;
    }
    let mut memo: HashMap<Vec<usize>, CanonicalForm> = HashMap::new();
    let mut used = vec![false; f.size()];
    let hits = count_tuples(f, k, &sizes, &targets, 0, &mut used, &mut memo)?;
    Ok(Rational::new(BigInt::from(hits), BigInt::from(total)))
}

fn count_tuples(
    f: &Flag,
    k: usize,
    sizes: &[usize],
    targets: &[CanonicalForm],
    i: usize,
    used: &mut Vec<bool>,
    memo: &mut HashMap<Vec<usize>, CanonicalForm>,
) -> Result<u64> {
    if i == sizes.len() {
        return Ok(1);
    }
    let avail: Vec<usize> = (k..f.size()).filter(|&v| !used[v]).collect();
    let mut hits = 0;
    let mut chosen = Vec::with_capacity(sizes[i]);
    let mut combos = Vec::new();
    combinations(&avail, sizes[i], 0, &mut chosen, &mut combos);
    for w in combos {
        let form = match memo.get(&w) {
            Some(c) => *c,
            None => {
                let mut vs: Vec<usize> = (0..k).collect();
                vs.extend(&w);
                let c = canonical_fixing(&f.t.induced(&vs)?, k)?.form;
                memo.insert(w.clone(), c);
                c
            }
        };
        if form != targets[i] {
            continue;
        }
        for &v in &w {
            used[v] = true;
        }
        hits += count_tuples(f, k, sizes, targets, i + 1, used, memo)?;
        for &v in &w {
            used[v] = false;
        }
    }
    Ok(hits)
}

fn combinations(items: &[usize], m: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == m {
        out.push(cur.clone());
        return;
    }
    for i in start..items.len() {
        if items.len() - i < m - cur.len() {
            break;
        }
        cur.push(items[i]);
        combinations(items, m, i + 1, cur, out);
        cur.pop();
    }
}

/// p(F;G) for flags of the same type.
pub fn flag_density(f: &Flag, g: &Flag) -> Result<Rational> {
    joint_density(std::slice::from_ref(f), g)
}

/// F1·F2 expanded over F^σ_ℓ.
pub fn flag_product(f1: &Flag, f2: &Flag, ell: usize) -> Result<LinearCombination> {
    check_same_type(&[f1, f2])?;
    let k = f1.k;
    if ell + k < f1.size() + f2.size() {
        return Err(Error::Size(format!("ℓ = {ell} below |F1| + |F2| − k = {}", f1.size() + f2.size() - k)));
    }
    let ty = FlagType { name: String::new(), sigma: f1.sigma() };
    let pair = [f1.clone(), f2.clone()];
    let mut out = LinearCombination::new();
    for f in enumerate_canonical(&ty, ell)? {
        out.add(f.canonical()?, joint_density(&pair, &f)?);
    }
    Ok(out)
}

/// q_σ(F): fraction of injections θ: [k] → V(F) with (F|₀, θ) ≅ F.
pub fn q_sigma(f: &Flag) -> Result<Rational> {
    let k = f.k;
    let n = f.size();
    let sigma = f.sigma();
    let target = f.canonical()?;
    let mut hits = 0u64;
    let mut theta = Vec::with_capacity(k);
    injections(n, k, &mut theta, &mut |theta| {
        let mut order = theta.to_vec();
        order.extend((0..n).filter(|v| !theta.contains(v)));
        let t = f.t.induced(&order).expect("permutation");
        let labels: Vec<usize> = (0..k).collect();
        if t.induced(&labels).expect("prefix") == sigma && matches!(canonical_fixing(&t, k), Ok(c) if c.form == target) {
            hits += 1;
        }
    });
    Ok(Rational::new(BigInt::from(hits), BigInt::from(falling(n as u64, k as u64))))
}

pub(crate) fn injections(n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for v in 0..n {
        if !cur.contains(&v) {
            cur.push(v);
            injections(n, k, cur, f);
            cur.pop();
        }
    }
}

/// ⟦F⟧_σ = q_σ(F)·F|₀ as a combination of tournaments.
pub fn downward_flag(f: &Flag) -> Result<LinearCombination> {
    let mut out = LinearCombination::new();
    out.add(canonical_form(&f.t)?, q_sigma(f)?);
    Ok(out)
}

/// Linear extension of ⟦·⟧_σ to combinations of flags.
pub fn downward(x: &LinearCombination) -> Result<LinearCombination> {
    let mut out = LinearCombination::new();
    for (form, coef) in x.iter() {
        let f = Flag::from_canonical(*form);
        out = out.plus(&downward_flag(&f)?.scaled(coef));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::lookup;
    use crate::exact::rat;

    fn ty(name: &str) -> FlagType {
        flag_type(name).unwrap()
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(enumerate_flags(&ty("1"), 3).unwrap().len(), 4);
        assert_eq!(enumerate_flags(&ty("A"), 3).unwrap().len(), 4);
        assert_eq!(enumerate_flags(&ty("Tr3s"), 4).unwrap().len(), 8);
        assert_eq!(enumerate_flags(&ty("C3s"), 4).unwrap().len(), 8);
        assert_eq!(enumerate_flags(&ty("0"), 5).unwrap().len(), 12);
        assert!(matches!(enumerate_flags(&ty("1"), 7), Err(Error::Capability(_))));
    }

    #[test]
    fn named_bases_are_exhaustive() {
        for name in ["1", "A", "Tr3s", "C3s"] {
            let t = ty(name);
            let named = named_basis(&t).unwrap();
            let mut a: Vec<_> = named.flags.iter().map(|f| f.canonical().unwrap()).collect();
            let b: Vec<_> = enumerate_canonical(&t, named.size).unwrap().iter().map(|f| f.canonical().unwrap()).collect();
            a.sort();
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn alpha_beta_products() {
        let alpha = named_flag("alpha").unwrap();
        let beta = named_flag("beta").unwrap();
        let w = named_flag("Tr3^{1,W}").unwrap();
        let c3 = named_flag("C3^1").unwrap();
        assert_eq!(joint_density(&[alpha.clone(), alpha.clone()], &w).unwrap(), rat(1, 1));
        assert_eq!(joint_density(&[alpha.clone(), beta.clone()], &c3).unwrap(), rat(1, 2));
        let sq = flag_product(&alpha, &alpha, 3).unwrap();
        assert_eq!(sq.len(), 1);
        assert_eq!(sq.get(&w.canonical().unwrap()), rat(1, 1));
    }

    #[test]
    fn q_and_downward() {
        let alpha = named_flag("alpha").unwrap();
        assert_eq!(q_sigma(&alpha).unwrap(), rat(1, 2));
        let d = downward_flag(&alpha).unwrap();
        assert_eq!(d.get(&canonical_form(&lookup("Tr2").unwrap()).unwrap()), rat(1, 2));
        assert_eq!(q_sigma(&named_flag("C3^1").unwrap()).unwrap(), rat(1, 1));
    }

    #[test]
    fn type_and_size_errors() {
        let alpha = named_flag("alpha").unwrap();
        let ia = named_flag("I^A").unwrap();
        assert!(matches!(flag_product(&alpha, &ia, 4), Err(Error::Type(_))));
        assert!(matches!(flag_product(&alpha, &alpha, 2), Err(Error::Size(_))));
        let bad = Flag::new(&ty("A").sigma, &lookup("C3").unwrap(), &[1, 0]);
        assert!(matches!(bad, Err(Error::Type(_))));
    }
}
