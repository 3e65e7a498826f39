//! The verification suites behind `run`: each turns one configured
//! instance into typed check rows, and the approximant suite doubles as
//! the data source for `approx verify`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::time::Instant;

use orbitword_core::approximant::{
    approximant_error, certified_above_cutoff, condition_rows, distinct_levels, stability_rows,
    ApproximantError, ConditionRow, StabilityRow,
};
use orbitword_core::cfrac::{self, CfExpansion};
use orbitword_core::coding::{
    check_condition_c, subword_complexity, Bound, CodingWord, ConditionCVerdict,
};
use orbitword_core::numerics::gauss::Base;
use orbitword_core::numerics::{BallComplex, BallReal, Prec};
use orbitword_core::series::{
    cosine_pairing, eval_s, eval_t, floor_count_exact, floor_count_formula, reduce_s_to_t,
};
use orbitword_core::structure::{compute_i_w, gap_census, tail_changes, TailChangeRecord};
use orbitword_core::Error as CoreError;
use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::config::{RunConfig, SUITES};
use crate::report::{Row, Status};

/// Everything the suites share: the configured word, its expansion, the
/// evaluation bases, and the precision policy.
pub struct SuiteCtx {
    pub cfg: RunConfig,
    pub word: CodingWord,
    pub expansion: CfExpansion,
    pub bases: Vec<Base>,
    pub prec: Prec,
}

impl SuiteCtx {
    pub fn build(cfg: &RunConfig) -> Result<SuiteCtx, CoreError> {
        let word = cfg.word()?;
        let prec = cfg.prec();
        let expansion = cfrac::expand(word.oracle(), cfg.depth, prec)?;
        let bases = cfg.parsed_bases()?;
        Ok(SuiteCtx {
            cfg: cfg.clone(),
            word,
            expansion,
            bases,
            prec,
        })
    }

    /// Distinct-denominator levels inside the configured level range.
    pub fn levels_in_range(&self) -> Result<Vec<(usize, u64)>, CoreError> {
        Ok(distinct_levels(&self.expansion)?
            .into_iter()
            .filter(|&(m, _)| m >= self.cfg.n_from && m <= self.cfg.n_to)
            .collect())
    }

    /// Windows sorted and deduplicated, for stable case ids.
    pub fn windows(&self) -> Vec<u32> {
        let mut w = self.cfg.w.clone();
        w.sort_unstable();
        w.dedup();
        w
    }
}

/// Run the configured suites and return their rows (unordered; the
/// report sorts). A context build failure becomes a single setup row so
/// the report stays well-formed.
pub fn run_all(cfg: &RunConfig, timings: bool) -> Vec<Row> {
    let ctx = match SuiteCtx::build(cfg) {
        Ok(ctx) => ctx,
        Err(e) => return vec![err_row("run", "setup", &e, "")],
    };
    let wanted: Vec<&str> = SUITES
        .iter()
        .copied()
        .filter(|s| cfg.suites.iter().any(|c| c == s))
        .collect();
    #[cfg(feature = "parallel")]
    let batches: Vec<Vec<Row>> = {
        use rayon::prelude::*;
        wanted
            .par_iter()
            .map(|s| dispatch_suite(s, &ctx, timings))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let batches: Vec<Vec<Row>> = wanted
        .iter()
        .map(|s| dispatch_suite(s, &ctx, timings))
        .collect();
    batches.into_iter().flatten().collect()
}

fn dispatch_suite(name: &str, ctx: &SuiteCtx, timings: bool) -> Vec<Row> {
    match name {
        "cf" => suite_cf(ctx, timings),
        "code" => suite_code(ctx, timings),
        "approx" => suite_approx(ctx, timings),
        "series" => suite_series(ctx, timings),
        "structure" => suite_structure(ctx, timings),
        _ => Vec::new(),
    }
}

fn status_of(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// Map a computation error onto a row: precision / resolution failures
/// are INCONCLUSIVE (the cap is named in the witness), everything else
/// is a FAIL carrying the full error text.
fn err_row(suite: &str, case: &str, e: &CoreError, tolerance: &str) -> Row {
    let status = match e {
        CoreError::PrecisionExhausted { .. } | CoreError::Inconclusive(_) => Status::Inconclusive,
        _ => Status::Fail,
    };
    Row::new(suite, case, status, e.to_string(), tolerance)
}

fn timed(on: bool, f: impl FnOnce() -> Row) -> Row {
    if !on {
        return f();
    }
    let t0 = Instant::now();
    let mut r = f();
    r.wall_ms = Some(t0.elapsed().as_millis() as u64);
    r
}

fn stamp(on: bool, t0: Instant, rows: &mut [Row]) {
    if on {
        let ms = t0.elapsed().as_millis() as u64;
        for r in rows {
            r.wall_ms = Some(ms);
        }
    }
}

// ---------------------------------------------------------------------
// Magnitude formatting: exact rationals to `m.mmme±EEEE` strings without
// passing through f64 (whose range the certified bounds easily escape).

fn pow10(e: i64) -> Rational {
    if e >= 0 {
        Rational::from(Integer::from(10).pow(e as u32))
    } else {
        Rational::from((Integer::from(1), Integer::from(10).pow((-e) as u32)))
    }
}

/// Mantissa in `[1, 10)` and decimal exponent of `|x|`; `(0, 0)` for 0.
pub fn rat_mag(x: &Rational) -> (f64, i64) {
    if x.cmp0() == Ordering::Equal {
        return (0.0, 0);
    }
    let ax = Rational::from(x.abs_ref());
    let nb = ax.numer().significant_bits() as i64;
    let db = ax.denom().significant_bits() as i64;
    let mut e = ((nb - db) as f64 * std::f64::consts::LOG10_2).floor() as i64;
    let mut mant = ax / pow10(e);
    while mant >= 10u32 {
        mant /= 10u32;
        e += 1;
    }
    while mant < 1u32 {
        mant *= 10u32;
        e -= 1;
    }
    (mant.to_f64(), e)
}

pub fn mag_str(x: &Rational) -> String {
    let (m, e) = rat_mag(x);
    if m == 0.0 {
        "0".to_string()
    } else {
        format!("{m:.3}e{e}")
    }
}

/// Magnitude string of `sqrt(x)` for exact `x >= 0`.
pub fn mag_str_sqrt(x: &Rational) -> String {
    let (mut m, mut e) = rat_mag(x);
    if m == 0.0 {
        return "0".to_string();
    }
    if e.rem_euclid(2) != 0 {
        m *= 10.0;
        e -= 1;
    }
    format!("{:.3}e{}", m.sqrt(), e / 2)
}

/// Exact upper bound on `|z|` (as `|re| + |im|`, certified).
fn abs_upper_rat(z: &BallComplex) -> Rational {
    let huge = || Rational::from(Integer::from(1) << 4096u32);
    let re = z.re.abs_upper().to_rational().unwrap_or_else(huge);
    let im = z.im.abs_upper().to_rational().unwrap_or_else(huge);
    re + im
}

/// First `digits` certified decimal digits of a ball (from its lower
/// endpoint; the ball's radius bounds the uncertainty of the tail).
pub fn ball_decimal(b: &BallReal, digits: usize) -> String {
    format!("{:.*e}", digits, b.lo())
}

// ---------------------------------------------------------------------
// cf suite

fn suite_cf(ctx: &SuiteCtx, timings: bool) -> Vec<Row> {
    let exp = &ctx.expansion;
    let depth = exp.depth();
    let mut rows = Vec::new();
    rows.push(timed(timings, || {
        Row::new(
            "cf",
            "expand",
            Status::Pass,
            format!(
                "depth={depth}, q_depth={}, bits_used={}",
                exp.q_at(depth as isize),
                exp.bits_used
            ),
            "",
        )
    }));
    rows.push(timed(timings, || match exp.determinant_violation() {
        None => Row::new(
            "cf",
            "determinant",
            Status::Pass,
            format!("p_m q_(m-1) - p_(m-1) q_m alternates sign exactly for m = 1..={depth}"),
            "exact",
        ),
        Some(m) => Row::new(
            "cf",
            "determinant",
            Status::Fail,
            format!("determinant identity broken at level {m}"),
            "exact",
        ),
    }));
    rows.push(timed(timings, || {
        let top = depth.saturating_sub(2);
        let mut max_res = 0f64;
        for m in 0..=top {
            match exp.identity_residual(m) {
                Ok(r) => max_res = max_res.max(r.abs_upper().to_f64()),
                Err(e) => return err_row("cf", "error-identity", &e, "1e-30"),
            }
        }
        Row::new(
            "cf",
            "error-identity",
            status_of(max_res < 1e-30),
            format!(
                "max |q_m theta - p_m - (-1)^m/(q_m theta_(m+1) + q_(m-1))| = {max_res:.3e} over m <= {top}"
            ),
            "1e-30",
        )
    }));
    rows.push(timed(timings, || {
        let bound = Integer::from(10_000u32);
        let level = match exp.max_level_with_q_bound(&bound) {
            Some(l) => l.min(depth.saturating_sub(1)),
            None => {
                return Row::new(
                    "cf",
                    "best-approx",
                    Status::NotApplicable,
                    "no level with the next denominator under 10000",
                    "",
                )
            }
        };
        match cfrac::best_approximation_scan(ctx.word.oracle(), exp, level, ctx.prec) {
            Ok(rep) => Row::new(
                "cf",
                "best-approx",
                status_of(rep.min_margin > 0.0),
                format!(
                    "level {}: all {} denominators q < {} lose to q_n = {} by margin >= {:.3e}",
                    rep.level, rep.candidates_checked, rep.q_next, rep.q_level, rep.min_margin
                ),
                "margin > 0",
            ),
            Err(e) => err_row("cf", "best-approx", &e, "margin > 0"),
        }
    }));
    rows
}

// ---------------------------------------------------------------------
// code suite

fn suite_code(ctx: &SuiteCtx, timings: bool) -> Vec<Row> {
    let cfg = &ctx.cfg;
    let word = &ctx.word;
    let mut rows = Vec::new();
    rows.push(timed(timings, || {
        let n = cfg.horizon.min(20_000);
        match (word.letters(n), word.letters_seq(n)) {
            (Ok(a), Ok(b)) => Row::new(
                "code",
                "letters-agree",
                status_of(a == b),
                format!("chunked and sequential scans agree on {n} letters"),
                "byte equality",
            ),
            (Err(e), _) | (_, Err(e)) => err_row("code", "letters-agree", &e, "byte equality"),
        }
    }));
    rows.push(timed(timings, || {
        match check_condition_c(word.partition(), word.oracle(), cfg.v_bound, ctx.prec) {
            Ok(ConditionCVerdict::NoViolation {
                v_bound,
                min_residual,
            }) => Row::new(
                "code",
                "condition-c",
                Status::Pass,
                format!(
                    "no boundary pair satisfies r_j = r_i + v theta + u for v <= {v_bound}; min residual {min_residual:.3e}"
                ),
                "exact over tags",
            ),
            Ok(ConditionCVerdict::Violation { i, j, v, u }) => Row::new(
                "code",
                "condition-c",
                Status::Fail,
                format!("boundary {j} = boundary {i} + {v} theta + {u}"),
                "exact over tags",
            ),
            Err(e) => err_row("code", "condition-c", &e, "exact over tags"),
        }
    }));
    let sample = cfg.horizon.min(4_000.max(64 * u64::from(cfg.nmax)));
    let complexity = word
        .letters(sample)
        .and_then(|letters| subword_complexity(&letters, cfg.nmax as usize).map(|p| (letters, p)));
    rows.push(timed(timings, || match &complexity {
        Ok((_, p)) => {
            let increasing = p.windows(2).all(|w| w[0] < w[1]);
            let first_ok = p.first().copied() == Some(word.partition().alphabet_size() as u64);
            Row::new(
                "code",
                "complexity",
                status_of(increasing && first_ok),
                format!(
                    "p(1..={}) = {:?} over a {sample}-letter sample; strictly increasing from the alphabet size",
                    cfg.nmax, p
                ),
                "",
            )
        }
        Err(e) => err_row("code", "complexity", e, ""),
    }));
    rows.push(timed(timings, || match &complexity {
        Ok((_, p)) => {
            if word.partition().alphabet_size() != 2 {
                return Row::new(
                    "code",
                    "minimal-complexity",
                    Status::NotApplicable,
                    "minimal complexity p(n) = n + 1 applies to two-letter codings only",
                    "",
                );
            }
            let ok = p.iter().enumerate().all(|(i, &c)| c == i as u64 + 2);
            Row::new(
                "code",
                "minimal-complexity",
                status_of(ok),
                format!("p(n) = n + 1 for n <= {}", cfg.nmax),
                "exact",
            )
        }
        Err(e) => err_row("code", "minimal-complexity", e, ""),
    }));
    rows
}

// ---------------------------------------------------------------------
// approx suite (shared with `approx verify`)

/// One row of the approximant verification matrix, in the report's
/// interchange shape.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyRow {
    pub n: usize,
    pub w: u32,
    pub t_n: usize,
    pub min_gap: Option<u64>,
    #[serde(rename = "L_n")]
    pub l_n: Option<u64>,
    pub err: String,
    pub bound: String,
    pub pass: bool,
}

/// The approximant suite's raw data: structure scans, stability rows,
/// certified error measurements, and anything the horizon cut off.
pub struct ApproxData {
    pub cond: Vec<ConditionRow>,
    pub stab: BTreeMap<(usize, u32), StabilityRow>,
    pub errs: Vec<(usize, u32, usize, Result<ApproximantError, CoreError>)>,
    pub dropped: Vec<(usize, u64)>,
    pub stab_dropped: Vec<(usize, u32)>,
}

pub fn approx_data(ctx: &SuiteCtx, digits_override: Option<u32>) -> Result<ApproxData, CoreError> {
    let cfg = &ctx.cfg;
    let word = &ctx.word;
    let windows = ctx.windows();
    let w_max = u64::from(*windows.iter().max().unwrap());
    let in_range = ctx.levels_in_range()?;
    if in_range.is_empty() {
        return Err(CoreError::construction(format!(
            "no distinct-denominator levels in {}..={}",
            cfg.n_from, cfg.n_to
        )));
    }
    let mut kept: Vec<(usize, u64)> = Vec::new();
    let mut dropped: Vec<(usize, u64)> = Vec::new();
    for &(m, q) in &in_range {
        if q.checked_mul(1 + w_max).is_some_and(|end| end <= cfg.horizon) {
            kept.push((m, q));
        } else {
            dropped.push((m, q));
        }
    }
    let mut cond = Vec::new();
    let mut stab = BTreeMap::new();
    let mut errs = Vec::new();
    let mut stab_dropped = Vec::new();
    if let Some(&(_, q_bound)) = kept.last() {
        let level_set: Vec<usize> = kept.iter().map(|&(m, _)| m).collect();
        cond = condition_rows(word, &ctx.expansion, q_bound, &windows, ctx.prec)?
            .into_iter()
            .filter(|r| level_set.contains(&r.level))
            .collect();

        // Stability scans read ahead by roughly eta * q_next / 4 periods;
        // keep them inside the horizon using a certified overestimate.
        let eta_up = word
            .partition()
            .eta(word.oracle(), ctx.prec)?
            .hi()
            .to_f64();
        let all_levels = distinct_levels(&ctx.expansion)?;
        for &w in &windows {
            let mut w_bound = 0u64;
            for pair in all_levels.windows(2) {
                let (m, q) = pair[0];
                let (_, q_next) = pair[1];
                if q > q_bound {
                    break;
                }
                let need = (11.0 + f64::from(w) + eta_up * q_next as f64 / 4.0) * q as f64;
                if need <= cfg.horizon as f64 {
                    w_bound = w_bound.max(q);
                } else if level_set.contains(&m) {
                    stab_dropped.push((m, w));
                }
            }
            if w_bound > 0 {
                for row in stability_rows(word, &ctx.expansion, w_bound, w, ctx.prec)? {
                    if level_set.contains(&row.level) {
                        stab.insert((row.level, w), row);
                    }
                }
            }
        }

        for &(m, _) in &kept {
            for &w in &windows {
                for (bi, base) in ctx.bases.iter().enumerate() {
                    let res =
                        approximant_error(base, word, &ctx.expansion, m, w, digits_override);
                    errs.push((m, w, bi, res));
                }
            }
        }
    }
    Ok(ApproxData {
        cond,
        stab,
        errs,
        dropped,
        stab_dropped,
    })
}

/// Project the approx data onto the `approx verify` interchange rows for
/// one base (index into the configured base list).
pub fn verify_rows(data: &ApproxData, base_idx: usize) -> Vec<VerifyRow> {
    let mut out = Vec::new();
    for row in &data.cond {
        let l_n = data
            .stab
            .get(&(row.level, row.window))
            .and_then(|s| s.stability);
        let err_entry = data
            .errs
            .iter()
            .find(|(m, w, b, _)| *m == row.level && *w == row.window && *b == base_idx);
        let (err, bound, pass) = match err_entry {
            Some((_, _, _, Ok(ae))) => (
                mag_str(&abs_upper_rat(&ae.small)),
                mag_str_sqrt(&ae.small_bound_sq),
                ae.small_ok && ae.big_ok && ae.radius_ok && row.set_equal && row.per_window_ok,
            ),
            Some((_, _, _, Err(e))) => (format!("error: {e}"), String::new(), false),
            None => (String::new(), String::new(), false),
        };
        out.push(VerifyRow {
            n: row.level,
            w: row.window,
            t_n: row.t,
            min_gap: row.min_first_gap,
            l_n,
            err,
            bound,
            pass,
        });
    }
    out.sort_by_key(|r| (r.n, r.w));
    out
}

fn suite_approx(ctx: &SuiteCtx, timings: bool) -> Vec<Row> {
    let t0 = Instant::now();
    let data = match approx_data(ctx, None) {
        Ok(d) => d,
        Err(e) => return vec![err_row("approx", "setup", &e, "")],
    };
    let mut rows = Vec::new();
    let bound = 2 * ctx.word.partition().len() as u64;
    for row in &data.cond {
        let case = format!("n={:02} w={:02} structure", row.level, row.window);
        let ok = row.set_equal && row.per_window_ok;
        let cutoff = if row.above_cutoff {
            "above cutoff"
        } else {
            "below cutoff (budget not asserted)"
        };
        rows.push(Row::new(
            "approx",
            case,
            status_of(ok),
            format!(
                "q={}, t={}, per-window max {}, min first gap {:?}, set equality {}; {cutoff}",
                row.q, row.t, row.per_window_max, row.min_first_gap, row.set_equal
            ),
            format!("<= {bound} progressions per window"),
        ));
    }
    for (m, w, bi, res) in &data.errs {
        let case = format!("n={m:02} w={w:02} base={bi} error-bound");
        match res {
            Ok(ae) => {
                let ok = ae.small_ok && ae.big_ok && ae.radius_ok;
                rows.push(Row::new(
                    "approx",
                    case,
                    status_of(ok),
                    format!(
                        "|alpha - approximant - correction| <= {} against bound {}; radius <= {}, terms {}",
                        mag_str(&abs_upper_rat(&ae.small)),
                        mag_str_sqrt(&ae.small_bound_sq),
                        mag_str_sqrt(&ae.alpha_radius_sq),
                        ae.terms_used
                    ),
                    "2H/|b|^(r + w s), radius <= bound/100",
                ));
            }
            Err(e) => rows.push(err_row("approx", &case, e, "2H/|b|^(r + w s)")),
        }
    }
    for &w in &ctx.windows() {
        let case = format!("w={w:02} gap-monotone");
        let mut gaps: Vec<(usize, u64, u64)> = data
            .cond
            .iter()
            .filter(|r| r.window == w)
            .filter_map(|r| r.min_first_gap.map(|g| (r.level, r.q, g)))
            .collect();
        gaps.sort_by_key(|&(m, _, _)| m);
        let tail: Vec<_> = gaps.iter().rev().take(5).rev().collect();
        let ok = tail.windows(2).all(|p| p[0].2 <= p[1].2);
        let witness = tail
            .iter()
            .map(|&&(m, q, g)| format!("n={m} q={q} gap={g}"))
            .collect::<Vec<_>>()
            .join(", ");
        rows.push(Row::new(
            "approx",
            case,
            status_of(ok),
            if witness.is_empty() {
                "fewer than two gap samples; nothing to compare".to_string()
            } else {
                witness
            },
            "nondecreasing over the largest levels",
        ));
    }
    for &w in &ctx.windows() {
        let case = format!("w={w:02} stability");
        let mine: Vec<&StabilityRow> = data
            .stab
            .iter()
            .filter(|((_, sw), _)| *sw == w)
            .map(|(_, r)| r)
            .collect();
        if mine.is_empty() {
            rows.push(Row::new(
                "approx",
                case,
                Status::NotApplicable,
                "no level in range has a successor inside the horizon",
                "",
            ));
            continue;
        }
        let ok = mine.iter().all(|r| r.stability_ok);
        let witness = mine
            .iter()
            .map(|r| {
                format!(
                    "n={} L={:?} floor={}",
                    r.level, r.stability, r.pattern_floor
                )
            })
            .collect::<Vec<_>>()
            .join(", ");
        rows.push(Row::new(
            "approx",
            case,
            status_of(ok),
            witness,
            "L >= floor(eta q_(n+1) / 4)",
        ));
    }
    for (m, q) in &data.dropped {
        rows.push(Row::new(
            "approx",
            format!("n={m:02} horizon"),
            Status::Inconclusive,
            format!(
                "level {m} (q={q}) needs {} letters, beyond the horizon {}",
                q.saturating_mul(1 + u64::from(*ctx.windows().iter().max().unwrap())),
                ctx.cfg.horizon
            ),
            "",
        ));
    }
    for (m, w) in &data.stab_dropped {
        rows.push(Row::new(
            "approx",
            format!("n={m:02} w={w:02} stability-horizon"),
            Status::Inconclusive,
            format!(
                "stability scan at level {m}, window {w} would read past the horizon {}",
                ctx.cfg.horizon
            ),
            "",
        ));
    }
    stamp(timings, t0, &mut rows);
    rows
}

// ---------------------------------------------------------------------
// series suite

fn suite_series(ctx: &SuiteCtx, timings: bool) -> Vec<Row> {
    let cfg = &ctx.cfg;
    let word = &ctx.word;
    let digits = cfg.digits;
    let tol = pow10(-i64::from(digits));
    let mut rows = Vec::new();
    for (bi, base) in ctx.bases.iter().enumerate() {
        rows.push(timed(timings, || {
            let case = format!("t-eval base={bi}");
            match eval_t(base, word, digits) {
                Ok(v) => Row::new(
                    "series",
                    case,
                    status_of(v.tail_bound <= tol),
                    format!(
                        "T = {} + {} i after {} terms, tail <= {}",
                        ball_decimal(&v.value.re, 40),
                        ball_decimal(&v.value.im, 6),
                        v.terms_used,
                        mag_str(&v.tail_bound)
                    ),
                    format!("tail <= 1e-{digits}"),
                ),
                Err(e) => err_row("series", &case, &e, ""),
            }
        }));
        rows.push(timed(timings, || {
            let case = format!("s-eval base={bi}");
            if word.partition().weights_s().is_none() {
                return Row::new(
                    "series",
                    case,
                    Status::NotApplicable,
                    "no boundary weights configured",
                    "",
                );
            }
            match eval_s(base, word.oracle(), word.partition(), digits, ctx.prec) {
                Ok(v) => Row::new(
                    "series",
                    case,
                    status_of(v.tail_bound <= tol),
                    format!(
                        "S = {} + {} i after {} terms, tail <= {}",
                        ball_decimal(&v.value.re, 40),
                        ball_decimal(&v.value.im, 6),
                        v.terms_used,
                        mag_str(&v.tail_bound)
                    ),
                    format!("tail <= 1e-{digits}"),
                ),
                Err(e) => err_row("series", &case, &e, ""),
            }
        }));
        rows.push(timed(timings, || {
            let case = format!("reduction base={bi}");
            if word.partition().weights_s().is_none() {
                return Row::new(
                    "series",
                    case,
                    Status::NotApplicable,
                    "no boundary weights configured",
                    "",
                );
            }
            let above_one = match word.oracle().refine(ctx.prec.start) {
                Ok(ball) => ball.lo().to_f64() > 1.0,
                Err(e) => return err_row("series", &case, &e, ""),
            };
            if !above_one {
                return Row::new(
                    "series",
                    case,
                    Status::NotApplicable,
                    "rewrite applies to rotations above 1",
                    "",
                );
            }
            let run = || -> Result<Row, CoreError> {
                let red = reduce_s_to_t(word.oracle(), word.partition(), ctx.prec)?;
                let prime = CodingWord::new(red.oracle_prime.clone(), red.part_prime.clone(), ctx.prec);
                let s = eval_s(base, word.oracle(), word.partition(), digits, ctx.prec)?;
                let t = eval_t(base, &prime, digits)?;
                let diff = s.abs_diff_upper(&t);
                let tol_f = 10f64.powi(-(digits.min(300) as i32) + 1);
                Ok(Row::new(
                    "series",
                    &case,
                    status_of(diff <= tol_f),
                    format!(
                        "|S - T'| <= {diff:.3e} rewriting over the reciprocal rotation ({} boundaries)",
                        red.part_prime.len()
                    ),
                    format!("1e-{}", digits - 1),
                ))
            };
            run().unwrap_or_else(|e| err_row("series", &case, &e, ""))
        }));
        rows.push(timed(timings, || {
            let case = format!("cosine base={bi}");
            let Some(unit) = base.unit() else {
                return Row::new(
                    "series",
                    case,
                    Status::NotApplicable,
                    "cosine pairing needs a complex base direction",
                    "",
                );
            };
            let d = digits.min(100);
            match cosine_pairing(base.modulus(), unit, d, ctx.prec) {
                Ok(p) => Row::new(
                    "series",
                    case,
                    status_of(p.residual_upper <= p.tolerance),
                    format!(
                        "direct filtered sum vs half-sum pairing: residual <= {:.3e}, {} terms cross-checked, {} independence pairs",
                        p.residual_upper, p.cross_checked, p.independence_pairs_checked
                    ),
                    format!("1e-{d}"),
                ),
                Err(CoreError::RootOfUnity { order }) => Row::new(
                    "series",
                    case,
                    Status::NotApplicable,
                    format!("base direction is a root of unity of order {order}; the pairing is undefined"),
                    "",
                ),
                Err(e) => err_row("series", &case, &e, ""),
            }
        }));
    }
    rows.push(timed(timings, || {
        let shift = word
            .partition()
            .bounds()
            .iter()
            .find(|b| matches!(b, Bound::Rational(_)))
            .cloned()
            .unwrap_or_else(|| Bound::rational(Rational::from((1, 2))).unwrap());
        let m_max = 2_000u64;
        let run = || -> Result<Row, CoreError> {
            let hist = floor_count_exact(word.oracle(), &shift, m_max, ctx.prec)?;
            let mut seen = std::collections::BTreeSet::new();
            for m in 1..=m_max {
                let f = floor_count_formula(word.oracle(), &shift, m, ctx.prec)?;
                if f != hist[m as usize] {
                    return Ok(Row::new(
                        "series",
                        "floor-count",
                        Status::Fail,
                        format!(
                            "closed form gives {f} but enumeration gives {} at m = {m}",
                            hist[m as usize]
                        ),
                        "exact",
                    ));
                }
                seen.insert(f);
            }
            Ok(Row::new(
                "series",
                "floor-count",
                Status::Pass,
                format!(
                    "closed-form counts match enumeration for m <= {m_max} at shift {shift}; values {seen:?}"
                ),
                "exact",
            ))
        };
        run().unwrap_or_else(|e| err_row("series", "floor-count", &e, "exact"))
    }));
    rows
}

// ---------------------------------------------------------------------
// structure suite

fn suite_structure(ctx: &SuiteCtx, timings: bool) -> Vec<Row> {
    let cfg = &ctx.cfg;
    let word = &ctx.word;
    let windows = ctx.windows();
    let mut rows = Vec::new();
    let t0 = Instant::now();
    let levels = match ctx.levels_in_range() {
        Ok(l) if !l.is_empty() => l,
        Ok(_) => {
            return vec![Row::new(
                "structure",
                "setup",
                Status::Fail,
                format!("no distinct-denominator levels in {}..={}", cfg.n_from, cfg.n_to),
                "",
            )]
        }
        Err(e) => return vec![err_row("structure", "setup", &e, "")],
    };
    let eps = match cfg.eps_rational() {
        Ok(e) => e,
        Err(e) => return vec![err_row("structure", "setup", &e, "")],
    };

    let level_ids: Vec<usize> = levels.iter().map(|&(m, _)| m).collect();
    match gap_census(word, &ctx.expansion, &level_ids, &windows, &eps, cfg.horizon) {
        Ok(census) => {
            for row in &census.rows {
                // The progression claim is only made above the cutoff
                // q eta > 2 (w + 1); smaller cells are reported, not judged.
                let status = match certified_above_cutoff(word, row.q, row.window, ctx.prec) {
                    Ok(true) => status_of(row.set_equal),
                    Ok(false) => Status::NotApplicable,
                    Err(_) => Status::Inconclusive,
                };
                let note = match status {
                    Status::NotApplicable => ", below the structural cutoff",
                    Status::Inconclusive => ", cutoff undecided at the precision cap",
                    _ => "",
                };
                rows.push(Row::new(
                    "structure",
                    format!("census n={:02} w={:02}", row.level, row.window),
                    status,
                    format!(
                        "q={}, t={}, firsts={:?}, zone {}{}",
                        row.q,
                        row.t,
                        row.firsts,
                        if row.free { "free" } else { "hit" },
                        note
                    ),
                    "mismatch set equals its progression union",
                ));
            }
            // Horizon-skipped cells, named explicitly.
            for &(m, q) in &levels {
                for &w in &windows {
                    let kept = census
                        .rows
                        .iter()
                        .any(|r| r.level == m && r.window == w);
                    if !kept {
                        rows.push(Row::new(
                            "structure",
                            format!("census n={m:02} w={w:02}"),
                            Status::Inconclusive,
                            format!(
                                "cell skipped: q (1 + w) = {} reaches the horizon {}",
                                q.saturating_mul(1 + u64::from(w)),
                                cfg.horizon
                            ),
                            "",
                        ));
                    }
                }
            }
            rows.push(Row::new(
                "structure",
                "census-verdict",
                Status::Pass,
                format!(
                    "zone fraction {}: {} free rows, {} hit rows; any_free={}, every_hit={}{}",
                    eps,
                    census.free_rows,
                    census.hit_rows,
                    census.any_free(),
                    census.every_hit(),
                    if census.degenerate {
                        " (degenerate zone: every row free by construction)"
                    } else {
                        ""
                    }
                ),
                "evidence only",
            ));
        }
        Err(e) => rows.push(err_row("structure", "census-verdict", &e, "")),
    }

    for &w in &windows {
        let case = format!("iw w={w:02}");
        let pick = levels
            .iter()
            .rev()
            .find(|&&(_, q)| q.checked_mul(1 + u64::from(w)).is_some_and(|e| e <= cfg.horizon.min(200_000)));
        let Some(&(m, q)) = pick else {
            rows.push(Row::new(
                "structure",
                case,
                Status::Inconclusive,
                format!("no level in range fits q (1 + w) under the horizon {}", cfg.horizon),
                "",
            ));
            continue;
        };
        match compute_i_w(word, &ctx.expansion, m, w, ctx.prec) {
            Ok(rep) => rows.push(Row::new(
                "structure",
                case,
                status_of(rep.proximity_ok),
                format!(
                    "n={m} q={q}: {} shift-sensitive indices, all within (w+1)|q theta| of a boundary; cluster max {} per half-step",
                    rep.members.len(),
                    rep.cluster_max
                ),
                "distance <= (w+1) |q theta|",
            )),
            Err(e) => rows.push(err_row("structure", &case, &e, "")),
        }
    }

    let w_tail = windows[0];
    for &(m, q) in levels.iter().rev().take(2) {
        let case = format!("tails n={m:02}");
        let q_next = ctx.expansion.q_at(m as isize + 1);
        let limit_ok = q_next
            .to_u64()
            .and_then(|qn| q.checked_mul(qn))
            .is_some_and(|need| need <= cfg.horizon);
        if !limit_ok {
            rows.push(Row::new(
                "structure",
                case,
                Status::Inconclusive,
                format!(
                    "tail scan to q q_(n+1) = {} {} would pass the horizon {}",
                    q, q_next, cfg.horizon
                ),
                "",
            ));
            continue;
        }
        let want = 2 * word.partition().len() + 2;
        let run = || -> Result<TailChangeRecord, CoreError> {
            let approx = orbitword_core::approximant::PeriodicApproximant::build(
                word,
                &ctx.expansion,
                m,
                w_tail,
            )?;
            tail_changes(word, &ctx.expansion, &approx, None, want, ctx.prec)
        };
        match run() {
            Ok(rec) => rows.push(Row::new(
                "structure",
                case,
                Status::Pass,
                format!(
                    "first changes past the window at {:?}; gap {:?}, position ratio {:?}",
                    rec.changes.iter().map(|c| c.position).collect::<Vec<_>>(),
                    rec.gap,
                    rec.ratio
                ),
                "each change re-verified letter by letter",
            )),
            Err(CoreError::NotFound(d)) => rows.push(Row::new(
                "structure",
                case,
                Status::NotApplicable,
                format!("no tail change below the scan limit: {d}"),
                "",
            )),
            Err(e) => rows.push(err_row("structure", &case, &e, "")),
        }
    }
    stamp(timings, t0, &mut rows);
    rows
}
