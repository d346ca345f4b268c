use num::{BigInt, BigUint, Zero};
use proptest::prelude::*;

use tourflag::canon::{aut_count, canonical_brute, canonical_fixing, canonical_form, enumerate};
use tourflag::density::{count_embeddings, density, falling, t_ind};
use tourflag::exact::{int, is_psd, psd_by_sign_rule, QuadraticValue, Rational, RationalMatrix};
use tourflag::flag::{enumerate_flags, flag_type, joint_density, Flag, FlagType};
use tourflag::structures::{c3_decompose, scan_forbidden, verify_tree, Decomposition};
use tourflag::Tournament;

fn tournament(lo: usize, hi: usize) -> impl Strategy<Value = Tournament> {
    (lo..=hi, any::<u64>()).prop_map(|(n, code)| {
        let pairs = n * n.saturating_sub(1) / 2;
        let mask = if pairs == 64 { u64::MAX } else { (1u64 << pairs) - 1 };
        Tournament::from_code(n, code & mask)
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

// A σ-flag of size n: σ on the first |σ| vertices, the remaining arcs from `bits`.
fn flag_from_bits(ty: &FlagType, n: usize, bits: u64) -> Flag {
    let k = ty.k();
    let mut p = 0;
    let t = Tournament::from_fn(n, |i, j| {
        if j < k {
            ty.sigma.beats(i, j)
        } else {
            p += 1;
            bits >> (p - 1) & 1 == 1
        }
    });
    Flag::from_prefix(&ty.sigma, t).unwrap()
}

fn type_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["0", "1", "A", "Tr3s", "C3s"])
}

fn rat_of(x: i64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chain_rule(u in tournament(4, 8), k in 1usize..=3, dm in 0usize..=2) {
        let m = (k + dm).min(u.n());
        for t in enumerate(k).unwrap() {
            let direct = density(t, &u).unwrap();
            let mut via = Rational::zero();
            for v in enumerate(m).unwrap() {
                via += density(t, v).unwrap() * density(v, &u).unwrap();
            }
            prop_assert_eq!(direct, via);
        }
    }

    #[test]
    fn densities_sum_to_one(u in tournament(1, 9), k in 1usize..=5) {
        prop_assume!(k <= u.n());
        let total = enumerate(k).unwrap().iter().fold(Rational::zero(), |acc, t| acc + density(t, &u).unwrap());
        prop_assert_eq!(total, int(1));
    }

    #[test]
    fn t_ind_matches_embeddings(u in tournament(3, 8), t in tournament(1, 4)) {
        prop_assume!(t.n() <= u.n());
        let p = density(&t, &u).unwrap();
        let aut = aut_count(&t).unwrap();
        let lhs = t_ind(&t, &u).unwrap();
        prop_assert_eq!(&lhs, &(p * Rational::new(BigInt::from(aut), BigInt::from(falling(t.n() as u64, t.n() as u64)))));
        let emb = Rational::new(BigInt::from(count_embeddings(&t, &u)), BigInt::from(falling(u.n() as u64, t.n() as u64)));
        prop_assert_eq!(lhs, emb);
    }

    #[test]
    fn c3_count_formula(n in 0usize..=40, seed in any::<u64>()) {
        let u = tourflag::tournament::generate_random(n, seed);
        prop_assert_eq!(u.count_c3(), u.count_c3_brute());
    }

    #[test]
    fn canonical_form_is_invariant((u, perm) in tournament(1, 8).prop_flat_map(|u| { let n = u.n(); (Just(u), permutation(n)) })) {
        let v = u.permute(&perm).unwrap();
        prop_assert_eq!(canonical_form(&u).unwrap(), canonical_form(&v).unwrap());
        prop_assert_eq!(aut_count(&u).unwrap(), aut_count(&v).unwrap());
        prop_assert_eq!(canonical_form(&u).unwrap().tournament(), canonical_form(&v).unwrap().tournament());
    }

    #[test]
    fn automorphisms_match_brute_force(u in tournament(1, 7), k in 0usize..=2) {
        prop_assume!(k <= u.n());
        let (_, count) = canonical_brute(&u, k);
        prop_assert_eq!(canonical_fixing(&u, k).unwrap().aut, count);
    }

    #[test]
    fn flag_canonical_form_ignores_unlabelled_order(ty in type_name(), n in 4usize..=7, bits in any::<u64>(), seed in any::<u64>()) {
        let ty = flag_type(ty).unwrap();
        let k = ty.k();
        prop_assume!(n >= k);
        let f = flag_from_bits(&ty, n, bits);
        let mut rest: Vec<usize> = (k..n).collect();
        let len = rest.len();
        for i in (1..len).rev() {
            rest.swap(i, (seed as usize).wrapping_mul(i + 7) % (i + 1));
        }
        let order: Vec<usize> = (0..k).chain(rest).collect();
        let g = Flag::from_prefix(&ty.sigma, f.tournament().induced(&order).unwrap()).unwrap();
        prop_assert_eq!(f.canonical().unwrap(), g.canonical().unwrap());
    }

    #[test]
    fn joint_density_is_symmetric(ty in type_name(), a in any::<u64>(), b in any::<u64>(), h in any::<u64>(), extra in 0usize..=1) {
        let ty = flag_type(ty).unwrap();
        let k = ty.k();
        let (s1, s2) = (k + 1, k + 2);
        let host = flag_from_bits(&ty, s1 + s2 - k + extra, h);
        let f1 = flag_from_bits(&ty, s1, a);
        let f2 = flag_from_bits(&ty, s2, b);
        let ab = joint_density(&[f1.clone(), f2.clone()], &host).unwrap();
        let ba = joint_density(&[f2, f1], &host).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn flag_chain_rule(ty in prop::sample::select(vec!["1", "A"]), a in any::<u64>(), b in any::<u64>(), h in any::<u64>()) {
        // p(F1, F2; G) = Σ_{F ∈ F^σ_ℓ} p(F1, F2; F) p(F; G)
        let ty = flag_type(ty).unwrap();
        let k = ty.k();
        let f1 = flag_from_bits(&ty, k + 1, a);
        let f2 = flag_from_bits(&ty, k + 1, b);
        let g = flag_from_bits(&ty, k + 4, h);
        let direct = joint_density(&[f1.clone(), f2.clone()], &g).unwrap();
        let basis = enumerate_flags(&ty, k + 3).unwrap();
        let mut via = Rational::zero();
        for f in &basis.flags {
            via += joint_density(&[f1.clone(), f2.clone()], f).unwrap() * joint_density(std::slice::from_ref(f), &g).unwrap();
        }
        prop_assert_eq!(direct, via);
    }

    #[test]
    fn recognizer_agrees_with_scanner(u in tournament(5, 11)) {
        let scan = scan_forbidden(&u);
        match c3_decompose(&u) {
            Decomposition::Tree(tree) => {
                prop_assert!(scan.is_empty());
                prop_assert!(verify_tree(&u, &tree));
            }
            Decomposition::Forbidden(w) => {
                prop_assert!(!scan.is_empty());
                prop_assert!(scan.contains(&w));
            }
        }
    }

    #[test]
    fn quadratic_field_ring_laws(x in (-20i64..20, -20i64..20), y in (-20i64..20, -20i64..20), z in (-20i64..20, -20i64..20)) {
        let q = |(a, b): (i64, i64)| QuadraticValue::new(rat_of(a), rat_of(b), 179).unwrap();
        let (x, y, z) = (q(x), q(y), q(z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&(&x - &y) + &y, x.clone());
    }
}

fn small_symmetric() -> impl Strategy<Value = RationalMatrix> {
    (1usize..=5)
        .prop_flat_map(|n| {
            let entries = prop::collection::vec(-4i64..=4, n * (n + 1) / 2);
            let factor = prop::collection::vec(-3i64..=3, n * n);
            (Just(n), entries, factor, 0u8..3)
        })
        .prop_map(|(n, entries, factor, kind)| {
            let mut m = RationalMatrix::zeros(n, n);
            if kind == 0 {
                let mut it = entries.into_iter();
                for i in 0..n {
                    for j in i..n {
                        let v = rat_of(it.next().unwrap());
                        m.set(i, j, v.clone());
                        m.set(j, i, v);
                    }
                }
            } else {
                // B Bᵀ with B of rank ≤ kind·n/2: PSD, often singular
                let r = (kind as usize * n).div_ceil(2);
                for i in 0..n {
                    for j in 0..n {
                        let v: i64 = (0..r).map(|c| factor[i * n + c] * factor[j * n + c]).sum();
                        m.set(i, j, rat_of(v));
                    }
                }
            }
            m
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1200))]

    #[test]
    fn psd_methods_agree(m in small_symmetric()) {
        let ldl = is_psd(&m).unwrap();
        prop_assert_eq!(ldl.psd, psd_by_sign_rule(&m).unwrap());
        match &ldl.witness {
            Some(w) => prop_assert!(m.quadratic_form(w).unwrap() < Rational::zero()),
            None => prop_assert!(ldl.psd),
        }
    }

    #[test]
    fn psd_perturbation_keeps_agreement(m in small_symmetric(), i in 0usize..5, j in 0usize..5) {
        let n = m.rows();
        let (i, j) = (i % n, j % n);
        let mut p = m.clone();
        let v = p.get(i, j) + int(1);
        p.set(i, j, v.clone());
        p.set(j, i, v);
        prop_assert_eq!(is_psd(&p).unwrap().psd, psd_by_sign_rule(&p).unwrap());
    }
}

#[test]
fn orbit_sums_cover_all_labelled_tournaments() {
    for n in 1..=8usize {
        let total: BigUint = enumerate(n).unwrap().iter().map(|t| falling(n as u64, n as u64) / aut_count(t).unwrap()).sum();
        assert_eq!(total, BigUint::from(1u8) << (n * (n - 1) / 2));
    }
}
