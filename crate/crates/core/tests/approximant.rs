//! Mismatch tables, stability lengths, and certified error bounds for
//! the periodic rewrites, against independently computed fixtures.

mod common;

use std::collections::BTreeMap;

use orbitword_core::approximant::{
    approximant_error, condition_rows, distinct_levels, firsts_near_boundary, mismatches,
    scan_mismatches, stability_rows, ConditionRow, PeriodicApproximant,
};
use orbitword_core::cfrac::expand;
use orbitword_core::coding::{Bound, CodingWord, PartitionSpec};
use orbitword_core::error::Error;
use orbitword_core::numerics::gauss::{Base, GaussRat};
use orbitword_core::numerics::theta::ThetaOracle;
use orbitword_core::numerics::Prec;
use rug::Rational;

fn prec() -> Prec {
    Prec {
        start: 128,
        cap: 1 << 14,
    }
}

fn golden() -> ThetaOracle {
    ThetaOracle::parse("golden").unwrap()
}

fn weights(vals: &[i64]) -> Vec<GaussRat> {
    vals.iter().map(|&v| GaussRat::from_i64(v)).collect()
}

/// Rotation word with the single boundary at `1 - theta` and digit
/// values (0, 1).
fn g1_word() -> CodingWord {
    let oracle = golden();
    let bound = Bound::theta_linear(Rational::from(-1), Rational::from(1)).unwrap();
    let part = PartitionSpec::new(vec![bound], &oracle, prec())
        .unwrap()
        .with_weights_t(weights(&[0, 1]))
        .unwrap();
    CodingWord::new(oracle, part, prec())
}

/// Rotation word with boundaries {1/4, 3/4} and digit values (0, 1, 2).
fn g2_word() -> CodingWord {
    let oracle = golden();
    let b1 = Bound::rational(Rational::from((1, 4))).unwrap();
    let b2 = Bound::rational(Rational::from((3, 4))).unwrap();
    let part = PartitionSpec::new(vec![b1, b2], &oracle, prec())
        .unwrap()
        .with_weights_t(weights(&[0, 1, 2]))
        .unwrap();
    CodingWord::new(oracle, part, prec())
}

/// One fixture row: denominator, first hits, largest per-window count,
/// exact progression-set identity, and the cutoff verdict.
type Row = (u64, &'static [u64], u64, bool, bool);

const G1_W2: &[Row] = &[
    (1, &[2], 1, true, false),
    (2, &[4, 5], 2, true, false),
    (3, &[7, 8], 2, true, false),
    (5, &[12, 13], 2, true, false),
    (8, &[20, 21], 2, true, false),
    (13, &[33, 34], 2, true, false),
    (21, &[54, 55], 2, true, true),
    (34, &[88, 89], 2, true, true),
    (55, &[143, 144], 2, true, true),
    (89, &[232, 233], 2, true, true),
    (144, &[376, 377], 2, true, true),
    (233, &[609, 610], 2, true, true),
    (377, &[986, 987], 2, true, true),
    (610, &[1596, 1597], 2, true, true),
    (987, &[2583, 2584], 2, true, true),
    (1597, &[4180, 4181], 2, true, true),
    (2584, &[6764, 6765], 2, true, true),
    (4181, &[10945, 10946], 2, true, true),
    (6765, &[17710, 17711], 2, true, true),
];

const G1_W3: &[Row] = &[
    (1, &[2], 1, false, false),
    (2, &[4, 5], 2, true, false),
    (3, &[7, 8], 2, true, false),
    (5, &[12, 13], 2, true, false),
    (8, &[20, 21], 2, true, false),
    (13, &[33, 34], 2, true, false),
    (21, &[54, 55], 2, true, true),
    (34, &[88, 89], 2, true, true),
    (55, &[143, 144], 2, true, true),
    (89, &[232, 233], 2, true, true),
    (144, &[376, 377], 2, true, true),
    (233, &[609, 610], 2, true, true),
    (377, &[986, 987], 2, true, true),
    (610, &[1596, 1597], 2, true, true),
    (987, &[2583, 2584], 2, true, true),
    (1597, &[4180, 4181], 2, true, true),
    (2584, &[6764, 6765], 2, true, true),
    (4181, &[10945, 10946], 2, true, true),
    (6765, &[17710, 17711], 2, true, true),
];

const G1_W5: &[Row] = &[
    (1, &[2], 1, false, false),
    (2, &[4, 5], 2, false, false),
    (3, &[7, 8, 15], 2, false, false),
    (5, &[12, 13, 25, 26], 2, true, false),
    (8, &[20, 21, 41, 42], 2, true, false),
    (13, &[33, 34, 67, 68], 2, true, false),
    (21, &[54, 55, 109, 110], 2, true, false),
    (34, &[88, 89, 177, 178], 2, true, true),
    (55, &[143, 144, 287, 288], 2, true, true),
    (89, &[232, 233, 465, 466], 2, true, true),
    (144, &[376, 377, 753, 754], 2, true, true),
    (233, &[609, 610, 1219, 1220], 2, true, true),
    (377, &[986, 987, 1973, 1974], 2, true, true),
    (610, &[1596, 1597, 3193, 3194], 2, true, true),
    (987, &[2583, 2584, 5167, 5168], 2, true, true),
    (1597, &[4180, 4181, 8361, 8362], 2, true, true),
    (2584, &[6764, 6765, 13529, 13530], 2, true, true),
    (4181, &[10945, 10946, 21891, 21892], 2, true, true),
    (6765, &[17710, 17711, 35421, 35422], 2, true, true),
];

const G2_W2: &[Row] = &[
    (1, &[2], 1, true, false),
    (2, &[4, 5], 2, true, false),
    (3, &[6, 8], 2, true, false),
    (5, &[11, 13], 2, true, false),
    (8, &[19, 21, 23], 3, true, false),
    (13, &[32, 34], 2, true, false),
    (21, &[55], 1, true, false),
    (34, &[70, 89], 2, true, true),
    (55, &[144], 1, true, true),
    (89, &[197, 233], 2, true, true),
    (144, &[341, 377, 413], 3, true, true),
    (233, &[574, 610], 2, true, true),
    (377, &[987], 1, true, true),
    (610, &[1256, 1597], 2, true, true),
    (987, &[2584], 1, true, true),
    (1597, &[3535, 4181], 2, true, true),
    (2584, &[6119, 6765, 7411], 3, true, true),
    (4181, &[10300, 10946], 2, true, true),
    (6765, &[17711], 1, true, true),
];

const G2_W3: &[Row] = &[
    (1, &[2], 1, true, false),
    (2, &[4, 5], 2, true, false),
    (3, &[6, 8, 10], 2, true, false),
    (5, &[11, 13, 15], 2, true, false),
    (8, &[19, 21, 23], 3, true, false),
    (13, &[32, 34, 49], 2, true, false),
    (21, &[55, 74], 1, true, false),
    (34, &[70, 89, 125], 2, true, true),
    (55, &[144, 180], 1, true, true),
    (89, &[197, 233, 269], 2, true, true),
    (144, &[341, 377, 413], 3, true, true),
    (233, &[574, 610, 879], 2, true, true),
    (377, &[987, 1328], 1, true, true),
    (610, &[1256, 1597, 2243], 2, true, true),
    (987, &[2584, 3230], 1, true, true),
    (1597, &[3535, 4181, 4827], 2, true, true),
    (2584, &[6119, 6765, 7411], 3, true, true),
    (4181, &[10300, 10946, 15773], 2, true, true),
    (6765, &[17711, 23830], 1, true, true),
];

const G2_W5: &[Row] = &[
    (1, &[2], 1, false, false),
    (2, &[4, 5], 2, false, false),
    (3, &[6, 8, 10], 2, true, false),
    (5, &[11, 13, 15, 24], 2, true, false),
    (8, &[19, 21, 23, 36, 40, 42], 3, true, false),
    (13, &[32, 34, 49, 53, 68, 70], 2, true, false),
    (21, &[55, 74, 91, 108, 110], 2, true, false),
    (34, &[70, 89, 125, 142, 178, 197], 2, true, false),
    (55, &[144, 180, 252, 288, 324], 2, true, true),
    (89, &[197, 233, 269, 430, 466, 502], 2, true, true),
    (144, &[341, 377, 413, 646, 718, 754], 3, true, true),
    (233, &[574, 610, 879, 951, 1220, 1256], 2, true, true),
    (377, &[987, 1328, 1633, 1938, 1974], 2, true, true),
    (610, &[1256, 1597, 2243, 2548, 3194, 3535], 2, true, true),
    (987, &[2584, 3230, 4522, 5168, 5814], 2, true, true),
    (1597, &[3535, 4181, 4827, 7716, 8362, 9008], 2, true, true),
    (2584, &[6119, 6765, 7411, 11592, 12884, 13530], 3, true, true),
    (4181, &[10300, 10946, 15773, 17065, 21892, 22538], 2, true, true),
    (6765, &[17711, 23830, 29303, 34776, 35422], 2, true, true),
];

fn check_table(rows: &BTreeMap<(u32, u64), ConditionRow>, window: u32, table: &[Row]) {
    for &(q, firsts, per_window_max, set_equal, above) in table {
        let row = rows
            .get(&(window, q))
            .unwrap_or_else(|| panic!("missing row w={window} q={q}"));
        assert_eq!(row.firsts, firsts, "firsts at w={window} q={q}");
        assert_eq!(
            row.per_window_max, per_window_max,
            "per-window max at w={window} q={q}"
        );
        assert_eq!(row.set_equal, set_equal, "set identity at w={window} q={q}");
        assert_eq!(row.above_cutoff, above, "cutoff at w={window} q={q}");
        let expect_gap = firsts.windows(2).map(|p| p[1] - p[0]).min();
        assert_eq!(row.min_first_gap, expect_gap, "min gap at w={window} q={q}");
        assert!(row.per_window_ok, "per-window budget at w={window} q={q}");
    }
}

fn row_map(rows: Vec<ConditionRow>) -> BTreeMap<(u32, u64), ConditionRow> {
    rows.into_iter().map(|r| ((r.window, r.q), r)).collect()
}

#[test]
fn mismatch_tables_single_boundary() {
    let word = g1_word();
    let expansion = expand(word.oracle(), 30, prec()).unwrap();
    let rows = condition_rows(&word, &expansion, 10_000, &[2, 3, 5], prec()).unwrap();
    assert_eq!(rows.len(), 3 * 19);
    let map = row_map(rows);
    check_table(&map, 2, G1_W2);
    check_table(&map, 3, G1_W3);
    check_table(&map, 5, G1_W5);
    // Above the cutoff the per-window budget is twice the boundary
    // count and holds everywhere; the global progression count exceeds
    // it at the widest window, so only the per-window reading gates.
    for row in map.values() {
        assert_eq!(row.progression_bound, 2);
        if row.above_cutoff {
            assert!(row.per_window_ok && row.set_equal);
            assert_eq!(row.global_ok, row.t <= 2, "global reading w={}", row.window);
        }
        if row.window == 5 && row.above_cutoff {
            assert_eq!(row.t, 4, "widest window carries four progressions");
        }
    }
}

#[test]
fn mismatch_tables_quarter_boundaries() {
    let word = g2_word();
    let expansion = expand(word.oracle(), 30, prec()).unwrap();
    let rows = condition_rows(&word, &expansion, 10_000, &[2, 3, 5], prec()).unwrap();
    assert_eq!(rows.len(), 3 * 19);
    let map = row_map(rows);
    check_table(&map, 2, G2_W2);
    check_table(&map, 3, G2_W3);
    check_table(&map, 5, G2_W5);
    // The per-window budget of 2 * |boundaries| = 4 holds at every
    // window; the global count also stays within it at the narrow
    // windows but grows to 5-6 progressions at the widest one.
    for row in map.values() {
        assert_eq!(row.progression_bound, 4);
        if row.above_cutoff {
            assert!(row.per_window_ok && row.set_equal);
            assert_eq!(row.global_ok, row.t <= 4);
            if row.window < 5 {
                assert!(row.t <= 3);
            } else {
                assert!(row.t >= 5 && row.t <= 6);
            }
        }
    }
}

#[test]
fn first_gaps_nondecreasing_at_largest_levels() {
    // The minimum gap between consecutive first hits, over the five
    // largest levels where at least two progressions exist, never
    // shrinks as the level grows.
    for word in [g1_word(), g2_word()] {
        let expansion = expand(word.oracle(), 30, prec()).unwrap();
        for w in [2u32, 3, 5] {
            let rows = condition_rows(&word, &expansion, 10_000, &[w], prec()).unwrap();
            let gaps: Vec<u64> = rows
                .iter()
                .filter(|r| r.above_cutoff)
                .filter_map(|r| r.min_first_gap)
                .collect();
            let tail = &gaps[gaps.len().saturating_sub(5)..];
            assert!(tail.len() >= 4, "enough gap data at w={w}");
            assert!(
                tail.windows(2).all(|p| p[0] <= p[1]),
                "gaps nondecreasing at w={w}: {tail:?}"
            );
        }
    }
}

#[test]
fn gap_sequence_matches_fixture_at_doubled_window() {
    // Spot fixture: the five largest two-progression levels at w = 2 for
    // the quarter-boundary word produce min gaps 36, 341, 646, 646, 646.
    let word = g2_word();
    let expansion = expand(word.oracle(), 30, prec()).unwrap();
    let rows = condition_rows(&word, &expansion, 10_000, &[2], prec()).unwrap();
    let gaps: Vec<u64> = rows.iter().filter_map(|r| r.min_first_gap).collect();
    let tail = &gaps[gaps.len() - 5..];
    assert_eq!(tail, &[36, 341, 646, 646, 646]);
}

#[test]
fn stability_lengths_reach_their_floor() {
    // (q, next q, floor, measured length) for the five largest levels
    // under 1000; the measurement cap is floor + 8 and is reached every
    // time.
    let fixtures: [(&str, [(u64, u64, u64, u64); 5]); 2] = [
        (
            "g1",
            [
                (144, 233, 22, 30),
                (233, 377, 36, 44),
                (377, 610, 58, 66),
                (610, 987, 94, 102),
                (987, 1597, 152, 160),
            ],
        ),
        (
            "g2",
            [
                (144, 233, 14, 22),
                (233, 377, 23, 31),
                (377, 610, 38, 46),
                (610, 987, 61, 69),
                (987, 1597, 99, 107),
            ],
        ),
    ];
    for (label, word) in [("g1", g1_word()), ("g2", g2_word())] {
        let expansion = expand(word.oracle(), 30, prec()).unwrap();
        let rows = stability_rows(&word, &expansion, 1000, 3, prec()).unwrap();
        // Every level from q = 8 up meets the floor.
        for row in &rows {
            if row.level >= 5 {
                assert!(row.stability_ok, "{label} q={} misses its floor", row.q);
            }
        }
        let table = fixtures.iter().find(|f| f.0 == label).unwrap().1;
        for (q, q_next, floor, length) in table {
            let row = rows.iter().find(|r| r.q == q).unwrap();
            assert_eq!(row.q_next, q_next, "{label} q={q}");
            assert_eq!(row.pattern_floor, floor, "{label} q={q}");
            assert_eq!(row.stability, Some(length), "{label} q={q}");
            assert_eq!(row.cap, floor + 8, "{label} q={q}");
        }
    }
}

#[test]
fn first_hits_sit_one_step_from_a_boundary() {
    for word in [g1_word(), g2_word()] {
        let expansion = expand(word.oracle(), 30, prec()).unwrap();
        let rows = condition_rows(&word, &expansion, 200, &[3], prec()).unwrap();
        for row in rows.iter().filter(|r| r.above_cutoff) {
            assert!(
                firsts_near_boundary(&word, &expansion, row.level, &row.firsts, prec()).unwrap(),
                "first hits stray from the boundary set at q={}",
                row.q
            );
        }
    }
}

#[test]
fn rewrite_blocks_copy_the_word() {
    let word = g1_word();
    let expansion = expand(word.oracle(), 12, prec()).unwrap();
    let approx = PeriodicApproximant::build(&word, &expansion, 5, 2).unwrap();
    assert_eq!((approx.preperiod, approx.period), (8, 8));
    let letters = word.letters(16).unwrap();
    assert_eq!(approx.prefix, letters);
    for k in 0..16u64 {
        assert_eq!(approx.letter(k), letters[k as usize]);
    }
    for k in 16..64u64 {
        assert_eq!(approx.letter(k), approx.letter(k - 8));
    }
    assert!(matches!(
        PeriodicApproximant::build(&word, &expansion, 5, 1),
        Err(Error::Domain(_))
    ));
}

#[test]
fn rewrite_value_matches_direct_summation() {
    // The closed-form value of the rewrite agrees with a long direct
    // summation of its periodic digit stream, within the geometric tail.
    let word = g1_word();
    let expansion = expand(word.oracle(), 12, prec()).unwrap();
    let base = Base::real(Rational::from(2)).unwrap();
    let wts = word.partition().weights_t().unwrap().to_vec();
    let approx = PeriodicApproximant::build(&word, &expansion, 5, 2).unwrap();
    let closed = approx.value(&base, &wts).unwrap();
    let terms = 3 * (8 + 2 * 8);
    let b_inv = base.inv_value();
    let mut partial = GaussRat::zero();
    let mut pw = GaussRat::one();
    for k in 0..terms {
        partial = partial.add(&wts[approx.letter(k) as usize].mul(&pw));
        pw = pw.mul(&b_inv);
    }
    let diff = closed.sub(&partial).abs_sq();
    // Tail of a digit stream bounded by 1: sum_{k >= terms} 2^-k.
    let tail = Rational::from(2) / base.abs_pow(terms as i64);
    assert!(diff <= Rational::from(&tail * &tail));
}

#[test]
fn single_shot_scan_matches_driver() {
    let word = g2_word();
    let expansion = expand(word.oracle(), 12, prec()).unwrap();
    let approx = PeriodicApproximant::build(&word, &expansion, 6, 3).unwrap();
    assert_eq!(approx.preperiod, 13);
    let scan = mismatches(&word, &approx).unwrap();
    assert_eq!(scan.firsts, vec![32, 34, 49]);
    assert_eq!(scan.letter_changes, vec![1, -2, 1]);
    assert_eq!(scan.positions, vec![32, 34, 45, 47, 49]);
    assert!(scan.set_equal);

    let letters = word.letters(13 + 3 * 13).unwrap();
    let direct = scan_mismatches(&letters, 6, 13, 13, 3).unwrap();
    assert_eq!(direct.firsts, scan.firsts);
    assert_eq!(direct.per_window, scan.per_window);
}

/// Frozen error-bound rows: (instance, base, q, w, firsts, changes,
/// |small|, small bound, |big|, big bound).
type ErrRow = (
    &'static str,
    &'static str,
    u64,
    u32,
    &'static [u64],
    &'static [i64],
    f64,
    f64,
    f64,
    f64,
);

const ERROR_ROWS: &[ErrRow] = &[
    ("g1", "b2", 8, 2, &[20, 21], &[-1, 1], 1.490298e-08, 7.812500e-03, 2.282932e-13, 1.192093e-07),
    ("g1", "bz", 8, 2, &[20, 21], &[-1, 1], 2.402996e-08, 7.812500e-03, 3.672711e-13, 1.192093e-07),
    ("g1", "b2", 8, 3, &[20, 21], &[-1, 1], 1.490298e-08, 3.051758e-05, 2.282932e-13, 4.656613e-10),
    ("g1", "bz", 8, 3, &[20, 21], &[-1, 1], 2.402996e-08, 3.051758e-05, 3.672711e-13, 4.656613e-10),
    ("g1", "b2", 13, 2, &[33, 34], &[1, -1], 2.273738e-13, 2.441406e-04, 3.388547e-21, 3.637979e-12),
    ("g1", "bz", 13, 2, &[33, 34], &[1, -1], 3.666292e-13, 2.441406e-04, 5.463782e-21, 3.637979e-12),
    ("g1", "b2", 13, 3, &[33, 34], &[1, -1], 2.273738e-13, 2.980232e-08, 3.388547e-21, 4.440892e-16),
    ("g1", "bz", 13, 3, &[33, 34], &[1, -1], 3.666292e-13, 2.980232e-08, 5.463782e-21, 4.440892e-16),
    ("g2", "b2", 8, 2, &[19, 21, 23], &[-1, 2, -1], 9.834735e-07, 1.562500e-02, 1.506546e-11, 2.384186e-07),
    ("g2", "bz", 8, 2, &[19, 21, 23], &[-1, 2, -1], 8.810850e-07, 1.562500e-02, 1.346640e-11, 2.384186e-07),
    ("g2", "b2", 8, 3, &[19, 21, 23], &[-1, 2, -1], 9.834735e-07, 6.103516e-05, 1.506546e-11, 9.313226e-10),
    ("g2", "bz", 8, 3, &[19, 21, 23], &[-1, 2, -1], 8.810850e-07, 6.103516e-05, 1.346640e-11, 9.313226e-10),
    ("g2", "b2", 13, 2, &[32, 34], &[1, -2], 1.266595e-07, 4.882812e-04, 1.887604e-15, 7.275958e-12),
    ("g2", "bz", 13, 2, &[32, 34], &[1, -2], 1.129979e-07, 4.882812e-04, 1.683978e-15, 7.275958e-12),
    ("g2", "b2", 13, 3, &[32, 34, 49], &[1, -2, 1], 7.450183e-09, 5.960464e-08, 1.110299e-16, 8.881784e-16),
    ("g2", "bz", 13, 3, &[32, 34, 49], &[1, -2, 1], 7.450421e-09, 5.960464e-08, 1.110317e-16, 8.881784e-16),
];

fn base_of(tag: &str) -> Base {
    match tag {
        "b2" => Base::real(Rational::from(2)).unwrap(),
        "bz" => Base::with_unit(
            Rational::from(2),
            GaussRat::new(Rational::from((3, 5)), Rational::from((4, 5))),
        )
        .unwrap(),
        other => panic!("unknown base tag {other}"),
    }
}

fn level_of_q(word: &CodingWord, q: u64) -> (orbitword_core::cfrac::CfExpansion, usize) {
    let expansion = expand(word.oracle(), 20, prec()).unwrap();
    let level = distinct_levels(&expansion)
        .unwrap()
        .into_iter()
        .find(|&(_, qq)| qq == q)
        .map(|(m, _)| m)
        .unwrap();
    (expansion, level)
}

#[test]
fn error_bounds_match_frozen_rows() {
    let g1 = g1_word();
    let g2 = g2_word();
    for &(inst, btag, q, w, firsts, changes, small, bnd_small, big, bnd_big) in ERROR_ROWS {
        let word = if inst == "g1" { &g1 } else { &g2 };
        let base = base_of(btag);
        let (expansion, level) = level_of_q(word, q);
        let report = approximant_error(&base, word, &expansion, level, w, Some(80)).unwrap();
        let label = format!("{inst}/{btag} q={q} w={w}");

        assert_eq!(report.firsts, firsts, "{label} firsts");
        let scan_changes: Vec<i64> = {
            let letters = word.letters(q * (1 + u64::from(w))).unwrap();
            scan_mismatches(&letters, level, q, q, w).unwrap().letter_changes
        };
        assert_eq!(scan_changes, changes, "{label} changes");

        let small_mid = report.small.abs().unwrap().to_f64();
        assert!(
            (small_mid - small).abs() <= small * 1e-4,
            "{label}: |small| {small_mid:e} vs fixture {small:e}"
        );
        let big_mid = report.big.abs().unwrap().to_f64();
        assert!(
            (big_mid - big).abs() <= big * 1e-4,
            "{label}: |big| {big_mid:e} vs fixture {big:e}"
        );
        let sb = report.small_bound_sq.to_f64().sqrt();
        assert!((sb - bnd_small).abs() <= bnd_small * 1e-5, "{label} small bound");
        let bb = report.big_bound_sq.to_f64().sqrt();
        assert!((bb - bnd_big).abs() <= bnd_big * 1e-5, "{label} big bound");
        assert!(report.small_ok && report.big_ok, "{label} certified bounds");
        assert!(report.radius_ok, "{label} series radius");
    }
}

#[test]
fn error_bounds_certify_with_automatic_precision() {
    let g1 = g1_word();
    let g2 = g2_word();
    let cases: [(&CodingWord, &str, u64, u32, usize); 4] = [
        (&g1, "b2", 144, 3, 2),
        (&g1, "bz", 89, 2, 2),
        (&g2, "b2", 89, 3, 3),
        (&g2, "bz", 55, 2, 1),
    ];
    for (word, btag, q, w, t) in cases {
        let base = base_of(btag);
        let (expansion, level) = level_of_q(word, q);
        let report = approximant_error(&base, word, &expansion, level, w, None).unwrap();
        let label = format!("{btag} q={q} w={w}");
        assert_eq!(report.t, t, "{label} progression count");
        assert!(report.small_ok && report.big_ok, "{label} bounds");
        assert!(report.radius_ok, "{label} radius");
        assert!(report.digits >= 12, "{label} digits");
    }
}

#[test]
fn broken_progressions_block_the_error_bound() {
    // At the widest window the first two levels genuinely violate the
    // progression-set identity; the error report refuses to certify.
    let word = g1_word();
    let expansion = expand(word.oracle(), 12, prec()).unwrap();
    let base = Base::real(Rational::from(2)).unwrap();
    match approximant_error(&base, &word, &expansion, 0, 5, Some(40)) {
        Err(Error::StructureViolation { level, window, .. }) => {
            assert_eq!((level, window), (0, 5));
        }
        other => panic!("expected a structure violation, got {other:?}"),
    }
}
