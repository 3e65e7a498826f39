//! Tail-change scans, orbit-family reports, subword complexity, and the
//! gap census, against independently computed fixtures.

use orbitword_core::approximant::{distinct_levels, scan_mismatches, PeriodicApproximant};
use orbitword_core::cfrac::{expand, CfExpansion};
use orbitword_core::coding::{periodic_letters, subword_complexity, Bound, CodingWord, PartitionSpec};
use orbitword_core::error::Error;
use orbitword_core::numerics::theta::ThetaOracle;
use orbitword_core::numerics::Prec;
use orbitword_core::structure::{
    compute_i_w, gap_census, tail_changes, tail_window_stats, OrbitFamilyReport, TailChangeRecord,
};
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

/// Rotation word with the single boundary at `1 - theta`.
fn g1_word() -> CodingWord {
    let oracle = golden();
    let bound = Bound::theta_linear(Rational::from(-1), Rational::from(1)).unwrap();
    let part = PartitionSpec::new(vec![bound], &oracle, prec()).unwrap();
    CodingWord::new(oracle, part, prec())
}

/// Rotation word with boundaries {1/4, 3/4}.
fn g2_word() -> CodingWord {
    let oracle = golden();
    let b1 = Bound::rational(Rational::from((1, 4))).unwrap();
    let b2 = Bound::rational(Rational::from((3, 4))).unwrap();
    let part = PartitionSpec::new(vec![b1, b2], &oracle, prec()).unwrap();
    CodingWord::new(oracle, part, prec())
}

/// Rotation word for the unbounded-quotient angle `[0; 2, 3, 4, ...]`
/// with boundaries {1/4, 3/4}.
fn fixture_word() -> CodingWord {
    let oracle = ThetaOracle::parse("quot:lin").unwrap();
    let b1 = Bound::rational(Rational::from((1, 4))).unwrap();
    let b2 = Bound::rational(Rational::from((3, 4))).unwrap();
    let part = PartitionSpec::new(vec![b1, b2], &oracle, prec()).unwrap();
    CodingWord::new(oracle, part, prec())
}

fn level_of_q(expansion: &CfExpansion, q: u64) -> usize {
    distinct_levels(expansion)
        .unwrap()
        .into_iter()
        .find(|&(_, qq)| qq == q)
        .map(|(m, _)| m)
        .unwrap_or_else(|| panic!("no level with denominator {q}"))
}

fn tail_record(word: &CodingWord, expansion: &CfExpansion, q: u64, want: usize) -> TailChangeRecord {
    let level = level_of_q(expansion, q);
    let approx = PeriodicApproximant::build(word, expansion, level, 2).unwrap();
    tail_changes(word, expansion, &approx, None, want, prec()).unwrap()
}

/// Denominator, the first two changes as (position, letter), and the
/// ratio of the second position to `q_n * q_{n+1}`.
const G1_TAIL: &[(u64, [(u64, u8); 2], f64)] = &[
    (8, [(41, 0), (42, 1)], 0.40384615384615385),
    (13, [(67, 1), (68, 0)], 0.2490842490842491),
    (21, [(109, 0), (110, 1)], 0.15406162464985995),
    (34, [(177, 1), (178, 0)], 0.09518716577540107),
    (55, [(287, 0), (288, 1)], 0.05883554647599591),
    (89, [(465, 1), (466, 0)], 0.03636079900124844),
];

#[test]
fn tail_changes_single_boundary_track_the_convergents() {
    let word = g1_word();
    let expansion = expand(word.oracle(), 14, prec()).unwrap();
    let mut last_gap = 0;
    for &(q, expect, ratio) in G1_TAIL {
        let rec = tail_record(&word, &expansion, q, 2);
        assert_eq!(rec.changes.len(), 2, "q={q}");
        for (ch, &(pos, letter)) in rec.changes.iter().zip(expect.iter()) {
            assert_eq!(ch.position, pos, "q={q}");
            assert_eq!(ch.letter, letter, "q={q}");
            assert_ne!(ch.letter, ch.periodized, "q={q}");
        }
        let gap = rec.gap.unwrap();
        assert_eq!(gap, expect[1].0 - expect[0].0, "q={q}");
        assert!(gap >= last_gap, "gap shrank at q={q}");
        last_gap = gap;
        assert!((rec.ratio.unwrap() - ratio).abs() < 1e-12, "q={q}");
        // The unit gap is exactly resolved by moving from the boundary
        // at 1 - theta to the origin: 1*theta - (0 - (1 - theta)) = 1.
        let res = rec.residual.unwrap();
        assert_eq!((res.first_boundary, res.second_boundary), (1, 0), "q={q}");
        assert!(res.residual < 1e-20, "q={q}: residual {}", res.residual);
    }
}

const G2_TAIL_55: &[(u64, u8)] = &[(180, 0), (252, 1), (288, 2), (324, 0), (341, 1), (377, 2)];
const G2_TAIL_89: &[(u64, u8)] = &[(269, 1), (430, 2), (466, 0), (502, 1), (574, 2), (610, 0)];

#[test]
fn tail_changes_quarter_boundaries_match_a_boundary_pair() {
    let word = g2_word();
    let expansion = expand(word.oracle(), 14, prec()).unwrap();

    let rec55 = tail_record(&word, &expansion, 55, 6);
    let got: Vec<(u64, u8)> = rec55.changes.iter().map(|c| (c.position, c.letter)).collect();
    assert_eq!(got, G2_TAIL_55);
    assert_eq!(rec55.gap, Some(72));
    let res = rec55.residual.as_ref().unwrap();
    assert_eq!((res.first_boundary, res.second_boundary), (1, 2));
    assert!((res.residual - 0.00155281).abs() < 1e-8, "got {}", res.residual);

    let rec89 = tail_record(&word, &expansion, 89, 6);
    let got: Vec<(u64, u8)> = rec89.changes.iter().map(|c| (c.position, c.letter)).collect();
    assert_eq!(got, G2_TAIL_89);
    assert_eq!(rec89.gap, Some(161));
    let res = rec89.residual.as_ref().unwrap();
    assert_eq!((res.first_boundary, res.second_boundary), (1, 2));
    assert!((res.residual - 0.00347219).abs() < 1e-8, "got {}", res.residual);

    assert!(rec89.gap.unwrap() >= rec55.gap.unwrap());
    for rec in [&rec55, &rec89] {
        assert!(rec.log_first.unwrap() > 0.0);
        assert!(rec.ratio.unwrap() < 0.1);
    }
}

#[test]
fn tail_group_statistics_follow_from_the_positions() {
    let word = g2_word();
    let expansion = expand(word.oracle(), 12, prec()).unwrap();
    let rec = tail_record(&word, &expansion, 55, 6);
    let positions: Vec<u64> = rec.changes.iter().map(|c| c.position).collect();
    // Groups of 2|A|+1 = 5 consecutive changes.
    let stats = tail_window_stats(&positions, 5);
    assert_eq!(stats.len(), 2);
    assert_eq!(stats[0].start_index, 0);
    assert!((stats[0].diameter_ratio - (341.0 - 180.0) / 341.0).abs() < 1e-15);
    assert!((stats[0].min_pair_ratio - 17.0 / 341.0).abs() < 1e-15);
    assert!((stats[1].diameter_ratio - (377.0 - 252.0) / 377.0).abs() < 1e-15);
    for s in &stats {
        assert!(s.diameter_ratio > 0.0 && s.diameter_ratio < 1.0);
        assert!(s.min_pair_ratio > 0.0 && s.min_pair_ratio <= s.diameter_ratio);
    }
    assert!(tail_window_stats(&positions, 7).is_empty());
    assert!(tail_window_stats(&positions, 1).is_empty());
}

#[test]
fn tail_scan_reports_nothing_below_the_window_end() {
    let word = g1_word();
    let expansion = expand(word.oracle(), 10, prec()).unwrap();
    let level = level_of_q(&expansion, 8);
    let approx = PeriodicApproximant::build(&word, &expansion, level, 2).unwrap();
    // The scan starts at r + w*s = 24; a limit below that finds nothing.
    let err = tail_changes(&word, &expansion, &approx, Some(20), 2, prec()).unwrap_err();
    assert!(matches!(err, Error::NotFound(_)), "got {err:?}");
}

/// Denominator, window, members, and the step norm `||q_N theta||`.
const G1_FAMILIES: &[(u64, u32, &[u64], f64)] = &[
    (13, 2, &[7, 8], 0.0344419),
    (13, 3, &[7, 8], 0.0344419),
    (233, 2, &[143, 144], 0.00191938),
];
const G2_FAMILIES: &[(u64, u32, &[u64], f64)] = &[
    (13, 2, &[2, 6, 8], 0.0344419),
    (13, 3, &[2, 6, 8, 10], 0.0344419),
    (233, 2, &[36, 108, 144], 0.00191938),
];

fn check_families(word: &CodingWord, table: &[(u64, u32, &[u64], f64)]) -> Vec<OrbitFamilyReport> {
    let expansion = expand(word.oracle(), 14, prec()).unwrap();
    let mut reports = Vec::new();
    for &(q, w, members, step) in table {
        let level = level_of_q(&expansion, q);
        let report = compute_i_w(word, &expansion, level, w, prec()).unwrap();
        assert_eq!(report.q, q);
        assert_eq!(report.positions(), members, "q={q} w={w}");
        assert!(report.proximity_ok, "q={q} w={w}");
        assert!(
            report.members.iter().all(|m| m.within_budget),
            "q={q} w={w}"
        );
        assert_eq!(report.cluster_max, 1, "q={q} w={w}");
        assert!((report.step_norm - step).abs() < 1e-7, "q={q} w={w}");
        reports.push(report);
    }
    reports
}

#[test]
fn orbit_families_single_boundary() {
    let word = g1_word();
    let reports = check_families(&word, G1_FAMILIES);
    // Monotone in the number of shifts.
    let two: Vec<u64> = reports[0].positions();
    let three: Vec<u64> = reports[1].positions();
    assert!(two.iter().all(|m| three.contains(m)));
}

#[test]
fn orbit_families_quarter_boundaries() {
    let word = g2_word();
    let reports = check_families(&word, G2_FAMILIES);
    let two: Vec<u64> = reports[0].positions();
    let three: Vec<u64> = reports[1].positions();
    assert!(two.iter().all(|m| three.contains(m)));
}

#[test]
fn orbit_family_with_no_shift_is_empty() {
    let word = g1_word();
    let expansion = expand(word.oracle(), 10, prec()).unwrap();
    let level = level_of_q(&expansion, 13);
    let report = compute_i_w(&word, &expansion, level, 0, prec()).unwrap();
    assert!(report.members.is_empty());
    assert_eq!(report.cluster_max, 0);
    assert!(report.proximity_ok);
}

#[test]
fn mismatch_residues_lie_in_the_orbit_family() {
    for word in [g1_word(), g2_word()] {
        let expansion = expand(word.oracle(), 14, prec()).unwrap();
        for q in [13u64, 233] {
            let level = level_of_q(&expansion, q);
            let family = compute_i_w(&word, &expansion, level, 2, prec()).unwrap();
            let members = family.positions();
            let letters = word.letters(3 * q).unwrap();
            let scan = scan_mismatches(&letters, level, q, q, 2).unwrap();
            for &f in &scan.firsts {
                assert!(
                    members.contains(&(f % q)),
                    "first {f} mod {q} outside the family"
                );
            }
        }
    }
}

/// Level, denominator, window, progression count, first hits, and the
/// free-zone verdict for the unbounded-quotient fixture at eps = 1/4.
const FIXTURE_CENSUS: &[(usize, u64, u32, u64, &[u64], bool)] = &[
    (3, 30, 2, 1, &[86], false),
    (3, 30, 3, 2, &[86, 101], false),
    (3, 30, 4, 2, &[86, 101], false),
    (3, 30, 8, 5, &[86, 101, 187, 243, 258], false),
    (4, 157, 2, 1, &[400], false),
    (4, 157, 3, 1, &[400], false),
    (4, 157, 4, 1, &[400], false),
    (4, 157, 8, 4, &[400, 886, 1129, 1372], false),
    (5, 972, 2, 0, &[], true),
    (5, 972, 3, 0, &[], true),
    (5, 972, 4, 0, &[], true),
    (5, 972, 8, 3, &[7204, 7690, 7933], false),
    (6, 6961, 2, 0, &[], true),
    (6, 6961, 3, 1, &[21126], false),
    (6, 6961, 4, 1, &[21126], false),
    (6, 6961, 8, 2, &[21126, 49456], false),
    (7, 56660, 2, 0, &[], true),
    (7, 56660, 3, 0, &[], true),
    (7, 56660, 4, 0, &[], true),
    (7, 56660, 8, 0, &[], true),
];

#[test]
fn census_fixture_finds_free_zones_at_large_quotients() {
    let word = fixture_word();
    let expansion = expand(word.oracle(), 9, prec()).unwrap();
    let qs: Vec<u64> = (0..=8)
        .map(|m| expansion.q_at(m).to_u64().unwrap())
        .collect();
    assert_eq!(
        qs,
        [1, 2, 7, 30, 157, 972, 6961, 56660, 516901],
        "fixture denominators"
    );
    let letters = word.letters(20).unwrap();
    assert_eq!(
        letters,
        [0, 1, 2, 1, 1, 0, 1, 0, 1, 2, 1, 2, 0, 1, 0, 1, 2, 1, 2, 0],
        "fixture letter prefix"
    );

    let report = gap_census(
        &word,
        &expansion,
        &[3, 4, 5, 6, 7],
        &[2, 3, 4, 8],
        &Rational::from((1, 4)),
        600_000,
    )
    .unwrap();
    assert!(!report.degenerate);
    assert_eq!(report.rows.len(), FIXTURE_CENSUS.len());
    for (row, &(level, q, w, t, firsts, free)) in report.rows.iter().zip(FIXTURE_CENSUS) {
        assert_eq!(row.level, level);
        assert_eq!(row.q, q);
        assert_eq!(row.window, w);
        assert_eq!(row.t, t, "q={q} w={w}");
        assert_eq!(row.firsts, firsts, "q={q} w={w}");
        assert_eq!(row.free, free, "q={q} w={w}");
        assert!(row.set_equal, "q={q} w={w}");
    }
    assert_eq!(report.free_rows, 8);
    assert_eq!(report.hit_rows, 12);
    assert!(report.any_free());
    assert!(!report.every_hit());
}

/// Denominator and progression count for the golden word at eps = 1/8;
/// the zone is hit in every row.
const GOLDEN_CENSUS_16: &[(u64, u64)] = &[
    (34, 14),
    (55, 14),
    (89, 14),
    (144, 14),
    (233, 14),
    (377, 14),
    (610, 14),
    (987, 14),
];
const GOLDEN_CENSUS_32: &[(u64, u64)] = &[
    (34, 27),
    (55, 28),
    (89, 28),
    (144, 28),
    (233, 28),
    (377, 28),
    (610, 28),
    (987, 28),
];

#[test]
fn census_golden_hits_every_eighth_zone_at_wide_windows() {
    let word = g1_word();
    let expansion = expand(word.oracle(), 17, prec()).unwrap();
    let levels: Vec<usize> = [34u64, 55, 89, 144, 233, 377, 610, 987]
        .iter()
        .map(|&q| level_of_q(&expansion, q))
        .collect();
    let report = gap_census(
        &word,
        &expansion,
        &levels,
        &[16, 32],
        &Rational::from((1, 8)),
        1_050_000,
    )
    .unwrap();
    assert_eq!(report.rows.len(), 16);
    for (expected, w) in [(GOLDEN_CENSUS_16, 16u32), (GOLDEN_CENSUS_32, 32u32)] {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.window == w).collect();
        assert_eq!(rows.len(), expected.len());
        for (row, &(q, t)) in rows.iter().zip(expected) {
            assert_eq!(row.q, q, "w={w}");
            assert_eq!(row.t, t, "q={q} w={w}");
            assert!(!row.free, "q={q} w={w} zone unexpectedly free");
        }
    }
    assert_eq!(report.hit_rows, 16);
    assert!(report.every_hit());
    assert!(!report.any_free());
}

#[test]
fn census_rejects_bad_zone_fractions_and_flags_degenerate_ones() {
    let word = g1_word();
    let expansion = expand(word.oracle(), 10, prec()).unwrap();
    let levels = [level_of_q(&expansion, 8), level_of_q(&expansion, 13)];
    for eps in [Rational::new(), Rational::from(2), Rational::from((-1, 4))] {
        let err = gap_census(&word, &expansion, &levels, &[2], &eps, 10_000).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "eps={eps}: got {err:?}");
    }
    // eps = 1 collapses the zone to the unreached point r + w*s.
    let report = gap_census(&word, &expansion, &levels, &[2], &Rational::from(1), 10_000).unwrap();
    assert!(report.degenerate);
    assert!(report.rows.iter().all(|r| r.free));
    assert!(report.any_free());
    assert!(!report.every_hit());
}

#[test]
fn complexity_counts_match_the_rotation_words() {
    let g1 = g1_word().letters(4010).unwrap();
    let p1 = subword_complexity(&g1[..4009], 20).unwrap();
    let expect1: Vec<u64> = (2..=21).collect();
    assert_eq!(p1, expect1);

    let g2 = g2_word().letters(9010).unwrap();
    let p2 = subword_complexity(&g2[..9009], 30).unwrap();
    let expect2: Vec<u64> = (1..=30).map(|n| 3 * n).collect();
    assert_eq!(p2, expect2);

    let per = periodic_letters(&[0, 1], 4020);
    let pp = subword_complexity(&per[..3999], 4).unwrap();
    assert_eq!(pp, [2, 2, 2, 2]);
    // The periodic control fails the affine count already at length 2.
    assert!(pp[1] < 3);
}
