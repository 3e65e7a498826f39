//! Rotation-coding words: frozen letter prefixes, partition geometry,
//! the exact-relation scan over boundary pairs, and boundary elimination.

use orbitword_core::coding::{
    check_condition_c, reduce_boundary, Bound, CodingWord, ConditionCVerdict, PartitionSpec,
};
use orbitword_core::error::Error;
use orbitword_core::numerics::theta::ThetaOracle;
use orbitword_core::numerics::Prec;
use rug::{Integer, Rational};

fn prec() -> Prec {
    Prec {
        start: 128,
        cap: 1 << 14,
    }
}

fn golden() -> ThetaOracle {
    ThetaOracle::parse("golden").unwrap()
}

fn g1_word() -> CodingWord {
    let oracle = golden();
    let bound = Bound::theta_linear(Rational::from(-1), Rational::from(1)).unwrap();
    let part = PartitionSpec::new(vec![bound], &oracle, prec()).unwrap();
    CodingWord::new(oracle, part, prec())
}

fn g2_word() -> CodingWord {
    let oracle = golden();
    let b1 = Bound::rational(Rational::from((1, 4))).unwrap();
    let b2 = Bound::rational(Rational::from((3, 4))).unwrap();
    let part = PartitionSpec::new(vec![b1, b2], &oracle, prec()).unwrap();
    CodingWord::new(oracle, part, prec())
}

const G1_PREFIX: [u8; 40] = [
    0, 1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 1, 1, 0, 1, 0, 1, 1,
    0, 1, 1, 0, 1, 0, 1, 1, 0,
];
const G2_PREFIX: [u8; 40] = [
    0, 1, 0, 2, 1, 0, 1, 1, 2, 1, 0, 2, 1, 0, 1, 1, 2, 1, 0, 1, 1, 2, 1, 0, 2, 1, 0, 1, 1, 2, 1,
    0, 2, 1, 0, 1, 0, 2, 1, 0,
];

#[test]
fn letter_prefixes_match_the_fixture() {
    assert_eq!(g1_word().letters(40).unwrap(), G1_PREFIX);
    assert_eq!(g2_word().letters(40).unwrap(), G2_PREFIX);
}

#[test]
fn chunked_sequential_and_single_letter_scans_agree() {
    for word in [g1_word(), g2_word()] {
        let chunked = word.letters(3000).unwrap();
        let seq = word.letters_seq(3000).unwrap();
        assert_eq!(chunked, seq);
        for n in (0..3000).step_by(97) {
            assert_eq!(chunked[n as usize], word.letter_at(n).unwrap(), "n={n}");
        }
    }
}

#[test]
fn partition_sorts_boundaries_and_counts_intervals() {
    let oracle = golden();
    let b1 = Bound::rational(Rational::from((3, 4))).unwrap();
    let b2 = Bound::rational(Rational::from((1, 4))).unwrap();
    let part = PartitionSpec::new(vec![b1, b2], &oracle, prec()).unwrap();
    assert_eq!(part.len(), 2);
    assert_eq!(part.alphabet_size(), 3);
    let sorted: Vec<Rational> = part
        .bounds()
        .iter()
        .map(|b| b.tag().unwrap().1)
        .collect();
    assert_eq!(sorted, [Rational::from((1, 4)), Rational::from((3, 4))]);
}

#[test]
fn smallest_gap_matches_the_fixture() {
    let g1 = g1_word();
    let ball = g1.partition().eta(g1.oracle(), prec()).unwrap();
    assert!((ball.to_f64() - 0.38196601125010515).abs() < 1e-12);
    assert!(ball.rad_f64() < 1e-20);
    assert_eq!(g1.partition().eta_exact(g1.oracle()), None);

    let g2 = g2_word();
    assert_eq!(
        g2.partition().eta_exact(g2.oracle()),
        Some(Rational::from((1, 4)))
    );
    let ball = g2.partition().eta(g2.oracle(), prec()).unwrap();
    assert!((ball.to_f64() - 0.25).abs() < 1e-15);
}

#[test]
fn boundary_descriptions_round_trip_and_compare() {
    let r = Bound::parse("1/4").unwrap();
    assert_eq!(r, Bound::rational(Rational::from((1, 4))).unwrap());
    let t = Bound::parse("-1,1").unwrap();
    assert_eq!(t.tag(), Some((Rational::from(-1), Rational::from(1))));
    let o = Bound::parse("~1/3").unwrap();
    assert_eq!(o.tag(), None);
    for b in [&r, &t, &o] {
        let shown = format!("{b}");
        assert_eq!(Bound::parse(&shown).unwrap(), *b, "{shown}");
    }
    // Circle equality through tags: offsets differing by an integer
    // describe the same point.
    let t2 = Bound::parse("-1,2").unwrap();
    assert!(t.same_point(&t2));
    assert!(!t.same_point(&r));
}

#[test]
fn ill_posed_boundaries_are_rejected() {
    // Points on the forward orbit of 0 would be hit exactly.
    assert!(Bound::theta_linear(Rational::from(2), Rational::from(0)).is_err());
    assert!(Bound::theta_linear(Rational::from(1), Rational::from(-1)).is_err());
    // Negative integer coefficients stay off the forward orbit.
    assert!(Bound::theta_linear(Rational::from(-1), Rational::from(1)).is_ok());
    // Values outside (0, 1).
    assert!(Bound::rational(Rational::from(0)).is_err());
    assert!(Bound::rational(Rational::from(1)).is_err());
    assert!(Bound::rational(Rational::from((5, 4))).is_err());
}

#[test]
fn relation_scan_clears_the_quarter_partition() {
    let g2 = g2_word();
    let verdict = check_condition_c(g2.partition(), g2.oracle(), 8, prec()).unwrap();
    match verdict {
        ConditionCVerdict::NoViolation {
            v_bound,
            min_residual,
        } => {
            assert_eq!(v_bound, 8);
            assert!(min_residual > 0.0 && min_residual < 1.0);
        }
        other => panic!("unexpected verdict {other:?}"),
    }

    // A single boundary has no pairs to relate.
    let g1 = g1_word();
    let verdict = check_condition_c(g1.partition(), g1.oracle(), 8, prec()).unwrap();
    match verdict {
        ConditionCVerdict::NoViolation { min_residual, .. } => {
            assert_eq!(min_residual, f64::INFINITY);
        }
        other => panic!("unexpected verdict {other:?}"),
    }
}

#[test]
fn relation_scan_detects_a_shifted_boundary() {
    let oracle = golden();
    let b1 = Bound::rational(Rational::from((1, 4))).unwrap();
    let b2 = Bound::theta_linear(Rational::from(1), Rational::from((1, 4))).unwrap();
    let part = PartitionSpec::new(vec![b1, b2], &oracle, prec()).unwrap();
    let verdict = check_condition_c(&part, &oracle, 4, prec()).unwrap();
    match verdict {
        ConditionCVerdict::Violation { i, j, v, u } => {
            assert_eq!((i, j), (0, 1));
            assert_eq!(v, 1);
            assert_eq!(u, 0);
        }
        other => panic!("unexpected verdict {other:?}"),
    }
}

#[test]
fn boundary_elimination_tracks_wrapping() {
    let oracle = golden();
    let base = Bound::rational(Rational::from((1, 4))).unwrap();
    // theta + 1/4 stays inside (0, 1): no wrap.
    let red = reduce_boundary(&base, &Integer::from(1), &Integer::from(0), &oracle, prec())
        .unwrap();
    assert!(!red.wraps);
    assert_eq!(
        red.eliminated.tag(),
        Some((Rational::from(1), Rational::from((1, 4))))
    );
    assert_eq!(red.orbit_bound.tag(), Some((Rational::from(1), Rational::new())));

    // theta + 3/4 - 1 lands below its base: wrap.
    let base = Bound::rational(Rational::from((3, 4))).unwrap();
    let red = reduce_boundary(&base, &Integer::from(1), &Integer::from(-1), &oracle, prec())
        .unwrap();
    assert!(red.wraps);
    assert_eq!(
        red.eliminated.tag(),
        Some((Rational::from(1), Rational::from((-1, 4))))
    );

    let err =
        reduce_boundary(&base, &Integer::from(0), &Integer::from(0), &oracle, prec()).unwrap_err();
    assert!(matches!(err, Error::Construction(_)), "got {err:?}");
}
