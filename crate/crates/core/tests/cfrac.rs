//! Continued-fraction expansions: frozen quotient/convergent prefixes,
//! exact determinants, the convergent error identity, and exhaustive
//! best-approximation scans.

use orbitword_core::cfrac::{best_approximation_scan, expand, nearest_distance};
use orbitword_core::error::Error;
use orbitword_core::numerics::theta::ThetaOracle;
use orbitword_core::numerics::Prec;
use rug::Integer;

fn prec() -> Prec {
    Prec {
        start: 320,
        cap: 1 << 14,
    }
}

fn golden() -> ThetaOracle {
    ThetaOracle::parse("golden").unwrap()
}

fn sqrt2m1() -> ThetaOracle {
    ThetaOracle::sqrt_frac(Integer::from(2)).unwrap()
}

const GOLDEN_CONVERGENTS: &[(u64, u64)] =
    &[(0, 1), (1, 1), (1, 2), (2, 3), (3, 5), (5, 8), (8, 13)];
const SQRT2M1_CONVERGENTS: &[(u64, u64)] = &[(0, 1), (1, 2), (2, 5), (5, 12)];
const GOLDEN_Q_LE_1E4: &[u64] = &[
    1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987, 1597, 2584, 4181, 6765,
];

#[test]
fn golden_expansion_matches_the_fixture() {
    let exp = expand(&golden(), 30, prec()).unwrap();
    assert_eq!(exp.depth(), 30);
    assert_eq!(exp.quotients[0], 0);
    assert!(exp.quotients[1..].iter().all(|a| *a == 1));
    for (m, &(p, q)) in GOLDEN_CONVERGENTS.iter().enumerate() {
        assert_eq!(exp.convergents[m].0, p, "p_{m}");
        assert_eq!(exp.convergents[m].1, q, "q_{m}");
    }
    let qs: Vec<u64> = exp
        .convergents
        .iter()
        .map(|(_, q)| q.to_u64().unwrap())
        .filter(|&q| q <= 10_000)
        .collect();
    assert_eq!(qs, GOLDEN_Q_LE_1E4);
    assert_eq!(exp.determinant_violation(), None);
}

#[test]
fn sqrt2m1_expansion_matches_the_fixture() {
    let exp = expand(&sqrt2m1(), 30, prec()).unwrap();
    assert_eq!(exp.quotients[0], 0);
    assert!(exp.quotients[1..].iter().all(|a| *a == 2));
    for (m, &(p, q)) in SQRT2M1_CONVERGENTS.iter().enumerate() {
        assert_eq!(exp.convergents[m].0, p, "p_{m}");
        assert_eq!(exp.convergents[m].1, q, "q_{m}");
    }
    assert_eq!(exp.determinant_violation(), None);
}

#[test]
fn convergent_error_identity_holds_to_thirty_digits() {
    for oracle in [golden(), sqrt2m1()] {
        let exp = expand(&oracle, 30, prec()).unwrap();
        for m in 0..=28 {
            let residual = exp.identity_residual(m).unwrap();
            assert!(
                residual.abs_upper() < 1e-30,
                "m={m}: |residual| <= {}",
                residual.abs_upper()
            );
        }
    }
}

#[test]
fn complete_quotients_stay_above_one() {
    let exp = expand(&golden(), 30, prec()).unwrap();
    for m in 1..=29 {
        assert!(exp.tail(m).lo() > 1.0, "tail {m}");
    }
    // Every golden tail is the same quadratic number.
    assert!(exp.tail(5).lo() > 1.6180339887);
    assert!(exp.tail(5).hi() < 1.6180339888);
}

#[test]
fn signed_errors_shrink_and_flip_sign() {
    let exp = expand(&golden(), 30, prec()).unwrap();
    let mut last = f64::INFINITY;
    for m in 0..=20 {
        let e = exp.signed_error(m);
        let mag = e.to_f64().abs();
        assert!(mag < last, "m={m}");
        last = mag;
        if m % 2 == 0 {
            assert!(e.lo() > 0.0, "m={m} sign");
        } else {
            assert!(e.hi() < 0.0, "m={m} sign");
        }
    }
}

#[test]
fn nearest_distance_recovers_the_convergent_numerator() {
    let oracle = golden();
    let exp = expand(&oracle, 20, prec()).unwrap();
    for m in [5usize, 10, 15] {
        let (p, q) = &exp.convergents[m];
        let (nearest, d) = nearest_distance(&oracle, q, prec()).unwrap();
        assert_eq!(&nearest, p, "m={m}");
        let err = exp.signed_error(m).to_f64().abs();
        assert!((d.to_f64() - err).abs() < 1e-12, "m={m}");
    }
}

#[test]
fn best_approximation_scans_are_exhaustive_below_ten_thousand() {
    for (oracle, label) in [(golden(), "golden"), (sqrt2m1(), "sqrt2m1")] {
        let exp = expand(&oracle, 30, prec()).unwrap();
        let level = exp
            .max_level_with_q_bound(&Integer::from(10_000))
            .unwrap();
        let report = best_approximation_scan(&oracle, &exp, level, prec()).unwrap();
        let q_next = report.q_next.to_u64().unwrap();
        assert!(q_next <= 10_000, "{label}");
        assert_eq!(report.candidates_checked, q_next - 2, "{label}");
        assert!(report.min_margin > 0.0, "{label}");
    }
}

#[test]
fn golden_level_bound_matches_the_denominator_list() {
    let exp = expand(&golden(), 30, prec()).unwrap();
    let level = exp
        .max_level_with_q_bound(&Integer::from(10_000))
        .unwrap();
    assert_eq!(level, 18);
    assert_eq!(exp.q_at(18), 4181);
    assert_eq!(exp.q_at(19), 6765);
    assert_eq!(exp.q_at(-1), 0);
}

#[test]
fn scan_needs_the_next_convergent() {
    let oracle = golden();
    let exp = expand(&oracle, 6, prec()).unwrap();
    let err = best_approximation_scan(&oracle, &exp, 6, prec()).unwrap_err();
    assert!(matches!(err, Error::Construction(_)), "got {err:?}");
}
