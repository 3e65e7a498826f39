//! Series evaluation against independently computed reference values.

mod common;

use common::{assert_ball_near, dec};
use orbitword_core::coding::{reduce_boundary, Bound, CodingWord, PartitionSpec};
use orbitword_core::numerics::gauss::{Base, GaussRat};
use orbitword_core::numerics::theta::ThetaOracle;
use orbitword_core::numerics::Prec;
use orbitword_core::series::{
    cosine_pairing, eval_s, eval_t, floor_count_exact, floor_count_formula, floor_exponents,
    reduce_s_to_t, sine_pairing, verify_boundary_reduction,
};
use orbitword_core::Error;
use rug::{Integer, Rational};

const T_G1: &str = "0.709803442861291314641787399444575597012502205767860516957002644651287128148465962478316132459993883926539570334830469630";
const T_G2: &str = "0.847057746423353653737957259055411727168138907055115820652529010722470822798471587679528622298776002893416507225952078579";
const S_HALF: &str = "1.427420339397353838612479398555261639671681810216986409455018181193629818600740491237615540119324596177933949322273302356082515855964927580070879463682";
const D_COS: &str = "1.3212488812208619744752364343457206054224125624843893600151035691168721494497149283333906809230445829";
const D_SIN: &str = "0.6910899535469679207780374097482272555926282617959656297730148862955635726691671040877108384484345827";

fn golden() -> ThetaOracle {
    ThetaOracle::golden()
}

fn phi() -> ThetaOracle {
    // Positive root of x^2 - x - 1: the reciprocal of the golden rotation.
    ThetaOracle::quad(Integer::from(1), Integer::from(-1), Integer::from(-1), true).unwrap()
}

fn weights(vals: &[i64]) -> Vec<GaussRat> {
    vals.iter().map(|&v| GaussRat::from_i64(v)).collect()
}

fn g1_word(prec: Prec) -> CodingWord {
    let oracle = golden();
    let bound = Bound::theta_linear(Rational::from(-1), Rational::from(1)).unwrap();
    let part = PartitionSpec::new(vec![bound], &oracle, prec)
        .unwrap()
        .with_weights_t(weights(&[0, 1]))
        .unwrap();
    CodingWord::new(oracle, part, prec)
}

fn g2_word(prec: Prec) -> CodingWord {
    let oracle = golden();
    let part = PartitionSpec::new(
        vec![
            Bound::rational(Rational::from((1, 4))).unwrap(),
            Bound::rational(Rational::from((3, 4))).unwrap(),
        ],
        &oracle,
        prec,
    )
    .unwrap()
    .with_weights_t(weights(&[0, 1, 2]))
    .unwrap();
    CodingWord::new(oracle, part, prec)
}

#[test]
fn interval_series_golden_single_boundary() {
    let prec = Prec::default();
    let base = Base::real(Rational::from(2)).unwrap();
    let val = eval_t(&base, &g1_word(prec), 118).unwrap();
    assert_ball_near(&val.value.re, T_G1, 115);
    assert!(val.value.im.abs_upper().to_f64() < 1e-100);
    assert!(val.tail_bound.to_f64() < 1e-118);
}

#[test]
fn interval_series_golden_two_boundaries() {
    let prec = Prec::default();
    let base = Base::real(Rational::from(2)).unwrap();
    let val = eval_t(&base, &g2_word(prec), 118).unwrap();
    assert_ball_near(&val.value.re, T_G2, 115);
    assert!(val.value.im.abs_upper().to_f64() < 1e-100);
}

#[test]
fn interval_series_tightens_consistently() {
    let prec = Prec::default();
    let base = Base::real(Rational::from(2)).unwrap();
    let coarse = eval_t(&base, &g1_word(prec), 30).unwrap();
    let fine = eval_t(&base, &g1_word(prec), 90).unwrap();
    let gap = coarse.value.max_abs_diff_upper(&fine.value).to_f64();
    assert!(gap < 1e-29, "coarse and fine enclosures disagree: {gap:.3e}");
    assert!(fine.terms_used > coarse.terms_used);
}

#[test]
fn boundary_series_matches_its_interval_rewrite() {
    let prec = Prec::default();
    let base = Base::real(Rational::from(2)).unwrap();
    let oracle = phi();
    let part = PartitionSpec::new(
        vec![Bound::rational(Rational::from((1, 2))).unwrap()],
        &oracle,
        prec,
    )
    .unwrap()
    .with_weights_s(weights(&[1]))
    .unwrap();

    let s_val = eval_s(&base, &oracle, &part, 150, prec).unwrap();
    assert_ball_near(&s_val.value.re, S_HALF, 147);

    let red = reduce_s_to_t(&oracle, &part, prec).unwrap();
    // The rewrite produces the half-orbit bounds {theta'/2, 1 - theta'/2}
    // with weights (1, 0, 1) and one structural boundary relation.
    assert_eq!(red.part_prime.len(), 2);
    let expect_e = Bound::theta_linear(Rational::from((1, 2)), Rational::new()).unwrap();
    let expect_s = Bound::theta_linear(Rational::from((-1, 2)), Rational::from(1)).unwrap();
    assert!(red.part_prime.bounds()[0].same_point(&expect_e));
    assert!(red.part_prime.bounds()[1].same_point(&expect_s));
    assert_eq!(red.part_prime.weights_t().unwrap(), &weights(&[1, 0, 1])[..]);
    assert_eq!(red.expected_violations, vec![(1, 0)]);

    let word = CodingWord::new(red.oracle_prime.clone(), red.part_prime.clone(), prec);
    let t_val = eval_t(&base, &word, 150).unwrap();
    assert_ball_near(&t_val.value.re, S_HALF, 147);
    assert!(s_val.abs_diff_upper(&t_val) < 1e-147);
}

#[test]
fn shifted_floor_sequence_matches_closed_form() {
    let prec = Prec::default();
    let oracle = phi();
    let half = Bound::rational(Rational::from((1, 2))).unwrap();
    let es = floor_exponents(&oracle, &half, 400, prec).unwrap();
    for (n, e) in es.iter().enumerate() {
        // floor(n*phi + 1/2) = (n + 1 + isqrt(5 n^2)) div 2
        let isqrt = Integer::from(5u32 * (n as u32) * (n as u32)).sqrt();
        let expect = (Integer::from(n as u32) + 1u32 + isqrt) / 2u32;
        assert_eq!(*e, expect, "mismatch at n = {n}");
    }
}

#[test]
fn floor_counts_formula_agrees_with_enumeration() {
    let prec = Prec::default();
    let oracle = phi();
    let half = Bound::rational(Rational::from((1, 2))).unwrap();
    let hist = floor_count_exact(&oracle, &half, 200, prec).unwrap();
    for m in 1..=200u64 {
        let formula = floor_count_formula(&oracle, &half, m, prec).unwrap();
        assert_eq!(formula, hist[m as usize], "count mismatch at m = {m}");
    }
}

#[test]
fn boundary_series_reports_exact_hits() {
    let prec = Prec::default();
    let base = Base::real(Rational::from(2)).unwrap();
    let oracle = ThetaOracle::literal(Rational::from((1, 3)));
    let part = PartitionSpec::new(
        vec![Bound::rational(Rational::from((1, 3))).unwrap()],
        &oracle,
        prec,
    )
    .unwrap()
    .with_weights_s(weights(&[1]))
    .unwrap();
    match eval_s(&base, &oracle, &part, 20, prec) {
        Err(Error::BoundaryHit { n, .. }) => assert_eq!(n, 2),
        other => panic!("expected a boundary hit, got {other:?}"),
    }
}

#[test]
fn single_boundary_elimination_witnesses() {
    let prec = Prec::default();
    let base = Base::real(Rational::from(2)).unwrap();
    let oracle = golden();

    // r_i = 1/5 shifted once with no integer offset; no wrap.
    let red_a = reduce_boundary(
        &Bound::rational(Rational::from((1, 5))).unwrap(),
        &Integer::from(1),
        &Integer::new(),
        &oracle,
        prec,
    )
    .unwrap();
    assert!(!red_a.wraps);
    let chk_a = verify_boundary_reduction(&base, &oracle, &red_a, 60, prec).unwrap();
    assert!(chk_a.residual_upper <= chk_a.tolerance);
    assert_ball_near(
        &chk_a.lhs.re,
        "1.871077952898985121451490368199164256210243499478691152986294",
        58,
    );
    assert_ball_near(
        &chk_a.base_series.re,
        "1.032352462936678928261193336953752915407984793189521789015586",
        58,
    );
    assert_eq!(chk_a.prefix, GaussRat::one());
    assert_eq!(chk_a.correction, GaussRat::zero());

    // r_i = {6/5 - theta}, offset -1; the eliminated point wraps below it.
    let red_b = reduce_boundary(
        &Bound::theta_linear(Rational::from(-1), Rational::from((6, 5))).unwrap(),
        &Integer::from(1),
        &Integer::from(-1),
        &oracle,
        prec,
    )
    .unwrap();
    assert!(red_b.wraps);
    let chk_b = verify_boundary_reduction(&base, &oracle, &red_b, 60, prec).unwrap();
    assert_ball_near(
        &chk_b.lhs.re,
        "1.032352462936678928261193336953752915407984793189521789015586",
        58,
    );
    assert_ball_near(
        &chk_b.base_series.re,
        "1.354901483012066541880599274462930233803467380611183061074170",
        58,
    );
    assert_eq!(chk_b.correction, GaussRat::one());

    // r_i = 9/10 shifted twice with offset -2; wraps, correction 1/2.
    let red_c = reduce_boundary(
        &Bound::rational(Rational::from((9, 10))).unwrap(),
        &Integer::from(2),
        &Integer::from(-2),
        &oracle,
        prec,
    )
    .unwrap();
    assert!(red_c.wraps);
    let chk_c = verify_boundary_reduction(&base, &oracle, &red_c, 60, prec).unwrap();
    assert_ball_near(
        &chk_c.lhs.re,
        "1.031375899970960575462883278856662736186150582728507014147811",
        58,
    );
    assert_ball_near(
        &chk_c.base_series.re,
        "1.996093271299968357926170917092924153707095713610446505720237",
        58,
    );
    assert_eq!(
        chk_c.correction,
        GaussRat::new(Rational::from((1, 2)), Rational::new())
    );
}

#[test]
fn trigonometric_pairings_match_direct_sums() {
    let prec = Prec::default();
    let z = GaussRat::new(Rational::from((3, 5)), Rational::from((4, 5)));
    let two = Rational::from(2);

    let cos = cosine_pairing(&two, &z, 80, prec).unwrap();
    assert!(cos.residual_upper <= cos.tolerance);
    assert_ball_near(&cos.direct.re, D_COS, 78);
    assert_ball_near(&cos.combined.re, D_COS, 78);
    assert!(cos.combined.im.abs_upper().to_f64() < 1e-75);
    assert!(cos.cross_checked >= 200);
    assert_eq!(cos.independence_pairs_checked, 2500);

    let sin = sine_pairing(&two, &z, 80, prec).unwrap();
    assert!(sin.residual_upper <= sin.tolerance);
    assert_ball_near(&sin.direct.re, D_SIN, 78);
    assert_ball_near(&sin.combined.re, D_SIN, 78);
}

#[test]
fn trigonometric_pairing_rejects_roots_of_unity() {
    let prec = Prec::default();
    let i_unit = GaussRat::new(Rational::new(), Rational::from(1));
    match cosine_pairing(&Rational::from(2), &i_unit, 20, prec) {
        Err(Error::RootOfUnity { order }) => assert_eq!(order, 4),
        other => panic!("expected a root-of-unity rejection, got {other:?}"),
    }
    let dec_check = dec("0.25");
    assert_eq!(dec_check, Rational::from((1, 4)));
}
