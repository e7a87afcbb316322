use num_bigint::BigUint;
use num_integer::Integer;
use proptest::prelude::*;

use cam_core::groups::{
    build_chain, build_pattern_family, forbidden_patterns, l1_ball_offsets, lattice_generators,
    periodic_point_window, verify_periodicity, ChainSpec, GridBox,
};
use cam_core::language::{has_period, is_primitive, min_period, primitive_root};
use cam_core::quotient::{
    cantor_distance, certificate_relation, quotient_distance, Dyadic, Window,
};
use cam_core::{Letter, WordFamily};

fn letters(bits: &[bool]) -> Vec<Letter> {
    bits.iter().map(|&b| if b { Letter::One } else { Letter::Zero }).collect()
}

/// Word of length `len` with periods `p` and `q`: positions are merged into
/// classes by `i ~ i + p` and `i ~ i + q`, then each class gets one letter.
fn two_period_word(p: usize, q: usize, len: usize, colors: &[bool]) -> Vec<Letter> {
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut j = i;
        while parent[j] != root {
            let next = parent[j];
            parent[j] = root;
            j = next;
        }
        root
    }
    let mut parent: Vec<usize> = (0..len).collect();
    for step in [p, q] {
        for i in 0..len.saturating_sub(step) {
            let (a, b) = (find(&mut parent, i), find(&mut parent, i + step));
            parent[a] = b;
        }
    }
    (0..len)
        .map(|i| {
            let root = find(&mut parent, i);
            if colors[root % colors.len()] {
                Letter::One
            } else {
                Letter::Zero
            }
        })
        .collect()
}

fn window(radius: usize, bits: &[bool]) -> Window {
    Window::from_letters(radius, letters(bits)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn fine_wilf(p in 1usize..24, q in 1usize..24, extra in 0usize..24, colors in prop::collection::vec(any::<bool>(), 64)) {
        let g = p.gcd(&q);
        let len = p + q - g + extra;
        let w = two_period_word(p, q, len, &colors);
        prop_assert!(has_period(&w, p) && has_period(&w, q));
        prop_assert!(has_period(&w, g));
        prop_assert!(min_period(&w).unwrap() <= g);
    }

    #[test]
    fn ultrametric(a in prop::collection::vec(any::<bool>(), 21), b in prop::collection::vec(any::<bool>(), 21), c in prop::collection::vec(any::<bool>(), 21)) {
        let (p, q, r) = (window(10, &a), window(10, &b), window(10, &c));
        let pq = cantor_distance(&p, &q).unwrap();
        let qr = cantor_distance(&q, &r).unwrap();
        let pr = cantor_distance(&p, &r).unwrap();
        prop_assert!(pr.upper <= pq.upper.max(qr.upper));
        prop_assert_eq!(pq, cantor_distance(&q, &p).unwrap());
        prop_assert!(pq.lower <= pq.upper);
    }

    #[test]
    fn primitive_root_reconstructs(bits in prop::collection::vec(any::<bool>(), 1..40), reps in 1usize..5) {
        let base = letters(&bits);
        let word: Vec<Letter> = base.iter().cycle().take(base.len() * reps).copied().collect();
        let root = primitive_root(&word).unwrap();
        prop_assert_eq!(word.len() % root.len(), 0);
        let rebuilt: Vec<Letter> = root.letters().iter().cycle().take(word.len()).copied().collect();
        prop_assert_eq!(rebuilt, word);
        prop_assert!(is_primitive(root.letters()).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn letter_at_matches_materialize(index in 0usize..12, seed in any::<u64>()) {
        let family = WordFamily::new(5);
        let word = family.materialize(index).unwrap();
        let pos = (seed % word.len() as u64) as usize;
        prop_assert_eq!(family.letter_at(index, &BigUint::from(pos)).unwrap(), word.letters()[pos]);
        prop_assert_eq!(family.letter_at_u64(index, pos as u64).unwrap(), word.letters()[pos]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn quotient_bounded_by_cantor(a in prop::collection::vec(any::<bool>(), 33), b in prop::collection::vec(any::<bool>(), 33), use_periodic in any::<bool>(), shift in 0u64..1099) {
        use std::sync::OnceLock;
        static REL: OnceLock<cam_core::quotient::QuotientRelation> = OnceLock::new();
        static WORDS: OnceLock<(Vec<Letter>, Vec<Letter>)> = OnceLock::new();
        let rel = REL.get_or_init(|| certificate_relation(&WordFamily::new(5), 16, 2).unwrap());
        let (w6, w7) = WORDS.get_or_init(|| {
            let f = WordFamily::new(3);
            (f.materialize(6).unwrap().into_letters(), f.materialize(7).unwrap().into_letters())
        });
        let (p, q) = if use_periodic {
            (Window::from_periodic(w6, shift, 16), Window::from_periodic(w7, shift, 16))
        } else {
            (window(16, &a), window(16, &b))
        };
        let d = quotient_distance(&p, &q, rel).unwrap();
        let back = quotient_distance(&q, &p, rel).unwrap();
        prop_assert_eq!(d, back);
        prop_assert!(d.lower <= d.upper);
        prop_assert!(d.upper <= cantor_distance(&p, &q).unwrap().upper);
    }
}

#[test]
fn hops_approach_the_diagonal() {
    let family = WordFamily::new(5);
    let rel = certificate_relation(&family, 32, 1).unwrap();
    for k in -32i64..=32 {
        let (x, y) = rel.hop(k).unwrap();
        let d = cantor_distance(&x, &y).unwrap();
        assert_eq!(d.upper, Dyadic::pow2_neg(k.unsigned_abs() as u32));
        assert_eq!(d.lower, d.upper);
    }
}

#[test]
fn group_invariants() {
    let chain = build_chain(ChainSpec::new(2, vec![5, 7, 9])).unwrap();
    for (i, t) in chain.transversals.iter().enumerate() {
        assert_eq!(t.cell_count as u64, chain.moduli[i + 1].pow(2));
    }
    let family = build_pattern_family(&chain, 3).unwrap();
    for n in 0..=3 {
        let (p0, p1) = (family.pattern(n, 0).unwrap(), family.pattern(n, 1).unwrap());
        assert_eq!(p0.diff(p1).unwrap(), [vec![0, 0]]);
    }
    for n in 1..=2 {
        let m = chain.moduli[n];
        let region = GridBox::centered(2, m as i64);
        for a in 0..2 {
            let report =
                verify_periodicity(family.pattern(n, a).unwrap(), &region, &lattice_generators(2, m))
                    .unwrap();
            assert!(report.periodic, "level {n}");
        }
    }
}

#[test]
fn forbidden_patterns_never_occur() {
    let chain = build_chain(ChainSpec::new(2, vec![5, 7])).unwrap();
    let family = build_pattern_family(&chain, 2).unwrap();
    let points = [family.pattern(1, 0).unwrap(), family.pattern(1, 1).unwrap()];
    for r in 0..=2u32 {
        let set = forbidden_patterns(&points, 2, r).unwrap();
        let offsets = l1_ball_offsets(2, r);
        for p in points {
            let region = GridBox::centered(2, 12);
            let w = periodic_point_window(p, &region).unwrap();
            let reach = 12 - r as i64;
            for x in -reach..=reach {
                for y in -reach..=reach {
                    let code = offsets.iter().enumerate().fold(0u64, |acc, (i, o)| {
                        acc | u64::from(w.get(&[x + o[0], y + o[1]]).unwrap().bit()) << i
                    });
                    assert!(!set.contains(code), "r={r} at ({x},{y})");
                }
            }
        }
    }
}
