use oswap_core::perm::{apply_sort, inversion_number, sort_sequence, Permutation};
use oswap_core::tasep::dense::Dense;
use oswap_core::tasep::BinaryConfig;
use proptest::prelude::*;

const LO: i64 = -30;
const HI: i64 = 30;

fn config() -> impl Strategy<Value = BinaryConfig> {
    (proptest::option::of(-12i64..=12), proptest::collection::vec(any::<bool>(), 25)).prop_filter_map(
        "needs at least one particle",
        |(frontier, bits)| {
            let start = frontier.map_or(-12, |f| f + 1);
            let sites: Vec<i64> = (start..=12).filter(|&x| bits[(x + 12) as usize]).collect();
            if frontier.is_none() && sites.is_empty() {
                return None;
            }
            BinaryConfig::from_parts(frontier, sites).ok()
        },
    )
}

fn dense(c: &BinaryConfig) -> Dense {
    Dense::from_config(c, LO, HI)
}

proptest! {
    #[test]
    fn dense_round_trip(c in config()) {
        prop_assert_eq!(dense(&c).to_config(), c);
    }

    #[test]
    fn cutoff_matches_dense(c in config(), k in 0usize..12) {
        let got = c.cutoff(k);
        prop_assert_eq!(&got, &dense(&c).cutoff(k as u64).to_config());
        for x in LO..=HI {
            prop_assert_eq!(got.queue_length(x), c.queue_length(x).min(k as u64));
        }
    }

    #[test]
    fn pushback_matches_dense(c in config(), n in -5i64..=12) {
        let got = c.pushback(n);
        prop_assert_eq!(&got, &dense(&c).pushback(n).to_config());
        for x in LO..=HI {
            prop_assert_eq!(got.queue_length(x), c.queue_length(x).min((n - x).max(0) as u64));
        }
    }

    #[test]
    fn cutoff_and_pushback_commute(c in config(), k in 0usize..12, n in -5i64..=12) {
        prop_assert_eq!(c.cutoff(k).pushback(n), c.pushback(n).cutoff(k));
    }

    #[test]
    fn jump_matches_dense(c in config(), m in -14i64..=14) {
        prop_assert_eq!(c.jump(m), dense(&c).jump(m).to_config());
    }

    #[test]
    fn jumps_inside_commute(c in config(), k in 0usize..12, n in 2i64..=12, m in 1i64..12) {
        prop_assume!(m < n);
        prop_assert_eq!(c.jump(m).cutoff(k).pushback(n), c.cutoff(k).pushback(n).jump(m));
    }

    #[test]
    fn jumps_right_of_n_are_absorbed(c in config(), k in 0usize..12, n in 1i64..=12, d in 0i64..4) {
        let m = n + d;
        prop_assert_eq!(c.jump(m).cutoff(k).pushback(n), c.cutoff(k).pushback(n));
    }

    #[test]
    fn particle_and_hole_positions_match_dense(c in config(), j in 1usize..8, n in -5i64..=12) {
        let d = dense(&c);
        match c.particle_pos(j) {
            Ok(p) => prop_assert_eq!(Some(p), d.particle_pos(j)),
            Err(_) => prop_assert!(c.particle_count().is_some_and(|count| count < j)),
        }
        if let Ok(h) = c.hole_pos(n, j) {
            prop_assert_eq!(Some(h), d.hole_pos(n, j));
        }
    }

    #[test]
    fn discrepancy_of_removed_particle(c in config(), pick in any::<prop::sample::Index>()) {
        let sites: Vec<i64> = (-12..=12).filter(|&x| c.occupied(x) && c.frontier().is_none_or(|f| x > f - 3)).collect();
        prop_assume!(!sites.is_empty());
        let x = sites[pick.index(sites.len())];
        let lower = c.without_particle(x).unwrap();
        prop_assert_eq!(c.discrepancy(&lower).unwrap(), x);
        prop_assert_eq!(dense(&c).discrepancy(&dense(&lower)), Some(x));
    }
}

fn permutation(max_n: usize) -> impl Strategy<Value = Permutation> {
    (2..=max_n).prop_flat_map(|n| Just((1..=n as u32).collect::<Vec<_>>()).prop_shuffle()).prop_map(|v| Permutation::from_forward(v).unwrap())
}

fn bond_sequence() -> impl Strategy<Value = (usize, Vec<usize>)> {
    (2usize..=10).prop_flat_map(|n| (Just(n), proptest::collection::vec(1..n, 0..60)))
}

proptest! {
    #[test]
    fn reversal_identity((n, seq) in bond_sequence()) {
        let rev: Vec<usize> = seq.iter().rev().copied().collect();
        prop_assert_eq!(sort_sequence(n, &seq).unwrap(), sort_sequence(n, &rev).unwrap().inverted());
    }

    #[test]
    fn sorting_adds_one_inversion_exactly_on_ascents(p in permutation(9), pick in any::<prop::sample::Index>()) {
        let i = 1 + pick.index(p.n() - 1);
        let q = apply_sort(&p, i).unwrap();
        let (a, b) = (inversion_number(&p), inversion_number(&q));
        if p.has_ascent(i) {
            prop_assert_eq!(b, a + 1);
        } else {
            prop_assert_eq!(&q, &p);
        }
    }

    #[test]
    fn ascent_set_is_exact(p in permutation(12)) {
        let f = p.forward();
        let want: Vec<usize> = (1..p.n()).filter(|&i| f[i - 1] < f[i]).collect();
        prop_assert_eq!(p.ascents().sorted(), want);
    }

    #[test]
    fn inverse_is_consistent(p in permutation(12)) {
        for label in 1..=p.n() as u32 {
            prop_assert_eq!(p.label_at(p.position_of(label)), label);
        }
        prop_assert_eq!(p.inverted().inverted(), p.clone());
        prop_assert_eq!(inversion_number(&p.inverted()), inversion_number(&p));
    }
}

#[test]
fn reverse_has_all_inversions() {
    for n in 2..10 {
        let r = Permutation::reverse(n);
        assert!(r.is_reverse());
        assert!(r.ascents().is_empty());
        assert_eq!(inversion_number(&r), (n * (n - 1) / 2) as u64);
    }
}
