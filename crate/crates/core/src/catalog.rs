//! Named tournaments: Tr_k, C3, R4, W4, L4, T5^1..T5^12 and the parametric
//! families, plus a lookup table classifying 5-vertex patterns.

use std::sync::OnceLock;

use serde::Deserialize;

use crate::canon::{canonical_form, CanonicalForm};
use crate::error::{Error, Result};
use crate::tournament::{generate_carousel, generate_triangular, Tournament};

#[derive(Deserialize)]
struct Entry {
    name: String,
    encoding: String,
}

pub struct Catalog {
    entries: Vec<(String, Tournament, CanonicalForm)>,
}

static CATALOG: OnceLock<Catalog> = OnceLock::new();

pub fn catalog() -> &'static Catalog {
    CATALOG.get_or_init(|| {
        let raw: Vec<Entry> =
            serde_json::from_str(include_str!("../data/catalog.json")).expect("catalog.json is well formed");
        let entries = raw
            .into_iter()
            .map(|e| {
                let t: Tournament = e.encoding.parse().expect("catalog encodings parse");
                let c = canonical_form(&t).expect("catalog tournaments are small");
                (e.name, t, c)
            })
            .collect();
        Catalog { entries }
    })
}

impl Catalog {
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _, _)| n.as_str())
    }

    /// Catalog names first, then `Tr_k`/`Trk` and carousels `R_m` (m odd).
    pub fn lookup(&self, name: &str) -> Result<Tournament> {
        if let Some((_, t, _)) = self.entries.iter().find(|(n, _, _)| n == name) {
            return Ok(t.clone());
        }
        let num = |rest: &str| rest.trim_start_matches('_').parse::<usize>().ok();
        if let Some(k) = name.strip_prefix("Tr").and_then(num) {
            return Ok(Tournament::transitive(k));
        }
        if let Some(m) = name.strip_prefix("R_").and_then(num) {
            return generate_carousel(m);
        }
        Err(Error::Lookup(name.to_string()))
    }

    pub fn reverse_lookup(&self, t: &Tournament) -> Option<String> {
        if t.n() <= crate::canon::MAX_CANON {
            let c = canonical_form(t).ok()?;
            if let Some((n, _, _)) = self.entries.iter().find(|(_, _, f)| *f == c) {
                return Some(n.clone());
            }
        }
        t.is_transitive().then(|| format!("Tr{}", t.n()))
    }
}

pub fn lookup(name: &str) -> Result<Tournament> {
    catalog().lookup(name)
}

pub fn reverse_lookup(t: &Tournament) -> Option<String> {
    catalog().reverse_lookup(t)
}

/// T5^i for i in 1..=12.
pub fn t5(i: usize) -> Tournament {
    lookup(&format!("T5^{i}")).expect("T5^1..T5^12 are in the catalog")
}

/// Index i of the T5^i isomorphic to a 5-vertex tournament.
pub fn t5_index(t: &Tournament) -> Option<usize> {
    if t.n() != 5 {
        return None;
    }
    let code = t.pattern_code(&[0, 1, 2, 3, 4]) as usize;
    Some(t5_table()[code] as usize)
}

/// Maps each of the 1024 packed 5-vertex patterns to its T5 index.
pub fn t5_table() -> &'static [u8; 1024] {
    static TABLE: OnceLock<[u8; 1024]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let forms: Vec<CanonicalForm> = (1..=12).map(|i| canonical_form(&t5(i)).expect("n = 5")).collect();
        let mut table = [0u8; 1024];
        for (code, slot) in table.iter_mut().enumerate() {
            let c = canonical_form(&Tournament::from_code(5, code as u64)).expect("n = 5");
            *slot = 1 + forms.iter().position(|f| *f == c).expect("the twelve classes are exhaustive") as u8;
        }
        table
    })
}

/// Resolves catalog names and the prefixes `carousel:m`, `triangular:n`,
/// `random:n:seed`, falling back to the "n:bits" encoding.
pub fn resolve(input: &str) -> Result<Tournament> {
    let input = input.trim();
    let arg = |s: &str| s.parse::<u64>().map_err(|_| Error::Parse(format!("bad parameter in {input:?}")));
    if let Some(m) = input.strip_prefix("carousel:") {
        return generate_carousel(arg(m)? as usize);
    }
    if let Some(n) = input.strip_prefix("triangular:") {
        return Ok(generate_triangular(arg(n)? as usize));
    }
    if let Some(rest) = input.strip_prefix("random:") {
        let (n, seed) = rest.split_once(':').ok_or_else(|| Error::Parse(format!("expected random:n:seed, got {input:?}")))?;
        return Ok(crate::tournament::generate_random(arg(n)? as usize, arg(seed)?));
    }
    if input.contains(':') {
        return input.parse();
    }
    lookup(input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::are_isomorphic;

    #[test]
    fn named_entries() {
        assert!(lookup("T5^1").unwrap().is_transitive());
        let r5 = generate_carousel(5).unwrap();
        assert!(are_isomorphic(&lookup("T5^12").unwrap(), &r5).unwrap());
        assert_eq!(reverse_lookup(&r5).as_deref(), Some("T5^12"));
        assert_eq!(reverse_lookup(&Tournament::transitive(7)).as_deref(), Some("Tr7"));
        assert!(matches!(lookup("T5^13"), Err(Error::Lookup(_))));
        assert!(matches!(lookup("R_6"), Err(Error::Parity(6))));
    }

    #[test]
    fn size_five_classes_are_distinct() {
        let forms: std::collections::BTreeSet<_> = (1..=12).map(|i| canonical_form(&t5(i)).unwrap()).collect();
        assert_eq!(forms.len(), 12);
        let strong: Vec<usize> = (1..=12).filter(|&i| t5(i).is_strongly_connected()).collect();
        assert_eq!(strong, vec![7, 8, 9, 10, 11, 12]);
    }

    #[test]
    fn four_vertex_names() {
        let names: Vec<String> =
            crate::canon::enumerate(4).unwrap().iter().map(|t| reverse_lookup(t).unwrap()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(sorted, vec!["L4", "R4", "Tr4", "W4"]);
    }

    #[test]
    fn resolve_prefixes() {
        assert_eq!(resolve("carousel:3").unwrap().encode(), "3:101");
        assert_eq!(resolve("triangular:9").unwrap().n(), 9);
        assert_eq!(resolve("random:6:1").unwrap(), crate::tournament::generate_random(6, 1));
        assert_eq!(resolve("C3").unwrap().encode(), "3:101");
        assert!(resolve("5:111").is_err());
        assert!(resolve("carousel:x").is_err());
    }
}
