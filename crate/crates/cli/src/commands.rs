//! One-shot subcommand implementations: each returns the text to print.

use orbitword_core::approximant::PeriodicApproximant;
use orbitword_core::cfrac;
use orbitword_core::coding::subword_complexity;
use orbitword_core::numerics::gauss::Base;
use orbitword_core::series::{cosine_pairing, eval_s, eval_t, sine_pairing, SeriesValue, TrigPairing};
use orbitword_core::structure::{compute_i_w, gap_census, tail_changes};
use orbitword_core::Error as CoreError;
use rug::{Integer, Rational};
use serde::Serialize;

use crate::config::{format_gauss, RunConfig};
use crate::report::Format;
use crate::suites::{approx_data, ball_decimal, mag_str, rat_mag, verify_rows, SuiteCtx, VerifyRow};

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Assemble the implied configuration of a one-shot command.
#[allow(clippy::too_many_arguments)]
pub fn implied_config(
    theta: String,
    bounds: Vec<String>,
    values: Option<&str>,
    svalues: Option<&str>,
    precision_cap: u32,
    horizon: u64,
) -> RunConfig {
    RunConfig {
        theta,
        bounds,
        values: split_list(values),
        svalues: split_list(svalues),
        precision_cap,
        horizon,
        ..RunConfig::default()
    }
}

fn split_list(s: Option<&str>) -> Vec<String> {
    s.map(|v| {
        v.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::to_string)
            .collect()
    })
    .unwrap_or_default()
}

pub fn parse_windows(s: &str) -> Result<Vec<u32>, CoreError> {
    let mut w: Vec<u32> = Vec::new();
    for piece in s.split(',') {
        let v: u32 = piece
            .trim()
            .parse()
            .map_err(|_| CoreError::construction(format!("bad window {piece:?}")))?;
        if v < 2 {
            return Err(CoreError::construction(format!(
                "window {v} is too small; every window must be at least 2"
            )));
        }
        w.push(v);
    }
    if w.is_empty() {
        return Err(CoreError::construction("at least one window is required"));
    }
    Ok(w)
}

// ---------------------------------------------------------------------

#[derive(Serialize)]
struct CfExpandOut {
    theta: String,
    depth: usize,
    precision_bits: u32,
    quotients: Vec<String>,
    convergents: Vec<[String; 2]>,
}

pub fn cf_expand(
    theta: &str,
    depth: usize,
    json: bool,
    cfg: &RunConfig,
) -> Result<String, CoreError> {
    let oracle = orbitword_core::numerics::theta::ThetaOracle::parse(theta)?;
    let exp = cfrac::expand(&oracle, depth, cfg.prec())?;
    if json {
        let out = CfExpandOut {
            theta: format!("{oracle}"),
            depth: exp.depth(),
            precision_bits: exp.bits_used,
            quotients: exp.quotients.iter().map(|a| a.to_string()).collect(),
            convergents: exp
                .convergents
                .iter()
                .map(|(p, q)| [p.to_string(), q.to_string()])
                .collect(),
        };
        return Ok(to_json(&out));
    }
    let mut s = format!("continued fraction of {oracle} to depth {}\n", exp.depth());
    s.push_str("m\ta_m\tp_m\tq_m\n");
    for (m, a) in exp.quotients.iter().enumerate() {
        let (p, q) = &exp.convergents[m];
        s.push_str(&format!("{m}\t{a}\t{p}\t{q}\n"));
    }
    Ok(s)
}

// ---------------------------------------------------------------------

pub fn code_word(cfg: &RunConfig, count: u64) -> Result<String, CoreError> {
    let word = cfg.word()?;
    let letters = word.letters(count)?;
    let line = if cfg.values.is_empty() {
        letters
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(",")
    } else {
        let weights = word
            .partition()
            .weights_t()
            .expect("configured weights are attached")
            .to_vec();
        letters
            .iter()
            .map(|&l| format_gauss(&weights[l as usize]))
            .collect::<Vec<_>>()
            .join(",")
    };
    Ok(format!("{line}\n"))
}

#[derive(Serialize)]
struct ComplexityPoint {
    n: usize,
    p: u64,
}

pub fn code_complexity(
    cfg: &RunConfig,
    nmax: u32,
    sample: Option<u64>,
    format: Format,
) -> Result<String, CoreError> {
    let word = cfg.word()?;
    let sample = sample
        .unwrap_or_else(|| 4_000.max(64 * u64::from(nmax)))
        .min(cfg.horizon);
    let letters = word.letters(sample)?;
    let p = subword_complexity(&letters, nmax as usize)?;
    let points: Vec<ComplexityPoint> = p
        .iter()
        .enumerate()
        .map(|(i, &c)| ComplexityPoint { n: i + 1, p: c })
        .collect();
    Ok(match format {
        Format::Json => to_json(&points),
        Format::Csv | Format::Table => {
            let mut s = String::from("n,p\n");
            for pt in points {
                s.push_str(&format!("{},{}\n", pt.n, pt.p));
            }
            s
        }
    })
}

// ---------------------------------------------------------------------

pub fn approx_verify(
    cfg: &RunConfig,
    digits_override: Option<u32>,
    format: Format,
) -> Result<String, CoreError> {
    let ctx = SuiteCtx::build(cfg)?;
    let data = approx_data(&ctx, digits_override)?;
    if !data.dropped.is_empty() {
        let (m, q) = data.dropped[0];
        return Err(CoreError::construction(format!(
            "level {m} (q = {q}) needs more letters than the horizon {} allows; raise --horizon or shrink the range",
            cfg.horizon
        )));
    }
    let rows = verify_rows(&data, 0);
    Ok(render_verify(&rows, format))
}

fn render_verify(rows: &[VerifyRow], format: Format) -> String {
    match format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = String::from("n,w,t_n,min_gap,L_n,err,bound,pass\n");
            for r in rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.n,
                    r.w,
                    r.t_n,
                    r.min_gap.map(|g| g.to_string()).unwrap_or_default(),
                    r.l_n.map(|l| l.to_string()).unwrap_or_default(),
                    r.err,
                    r.bound,
                    r.pass
                ));
            }
            s
        }
        Format::Table => {
            let mut s = String::from("n    w    t_n  min_gap  L_n    err          bound        pass\n");
            for r in rows {
                s.push_str(&format!(
                    "{:<4} {:<4} {:<4} {:<8} {:<6} {:<12} {:<12} {}\n",
                    r.n,
                    r.w,
                    r.t_n,
                    r.min_gap.map(|g| g.to_string()).unwrap_or_default(),
                    r.l_n.map(|l| l.to_string()).unwrap_or_default(),
                    r.err,
                    r.bound,
                    r.pass
                ));
            }
            s
        }
    }
}

// ---------------------------------------------------------------------

#[derive(Serialize)]
struct SeriesOut {
    kind: String,
    theta: String,
    base: String,
    digits: u32,
    value_re: String,
    value_im: String,
    error_exponent: i64,
    terms_used: u64,
    tail_bound: String,
    precision_bits: u32,
}

fn certified_error_exponent(v: &SeriesValue) -> i64 {
    let huge = || Rational::from(Integer::from(1) << 4096u32);
    let total = v.value.re.rad().to_rational().unwrap_or_else(huge)
        + v.value.im.rad().to_rational().unwrap_or_else(huge)
        + v.tail_bound.clone();
    rat_mag(&total).1
}

fn render_series(
    kind: &str,
    cfg: &RunConfig,
    base: &Base,
    v: &SeriesValue,
    digits: u32,
    emit_json: bool,
) -> String {
    if emit_json {
        return to_json(&SeriesOut {
            kind: kind.to_string(),
            theta: cfg.theta.clone(),
            base: format!("{base}"),
            digits,
            value_re: ball_decimal(&v.value.re, digits as usize),
            value_im: ball_decimal(&v.value.im, digits as usize),
            error_exponent: certified_error_exponent(v),
            terms_used: v.terms_used,
            tail_bound: mag_str(&v.tail_bound),
            precision_bits: v.bits,
        });
    }
    format!(
        "{kind}({base}) = {} + {} i\ncertified error <= 1e{} ({} terms, tail <= {})\n",
        ball_decimal(&v.value.re, digits as usize),
        ball_decimal(&v.value.im, digits as usize),
        certified_error_exponent(v),
        v.terms_used,
        mag_str(&v.tail_bound)
    )
}

pub fn series_t(
    cfg: &RunConfig,
    base_spec: &str,
    digits: u32,
    emit_json: bool,
) -> Result<String, CoreError> {
    let base = Base::parse(base_spec)?;
    let word = cfg.word()?;
    let v = eval_t(&base, &word, digits)?;
    Ok(render_series("T", cfg, &base, &v, digits, emit_json))
}

pub fn series_s(
    cfg: &RunConfig,
    base_spec: &str,
    digits: u32,
    emit_json: bool,
) -> Result<String, CoreError> {
    let base = Base::parse(base_spec)?;
    let word = cfg.word()?;
    if word.partition().weights_s().is_none() {
        return Err(CoreError::construction(
            "the boundary-indexed series needs boundary weights; pass --values v1,v2,...",
        ));
    }
    let v = eval_s(&base, word.oracle(), word.partition(), digits, cfg.prec())?;
    Ok(render_series("S", cfg, &base, &v, digits, emit_json))
}

#[derive(Serialize)]
struct PairingOut {
    kind: String,
    base: String,
    digits: u32,
    direct_re: String,
    combined_re: String,
    residual: String,
    tolerance: String,
    terms_cross_checked: u64,
    independence_pairs_checked: u64,
    pass: bool,
}

pub fn series_trig(
    base_spec: &str,
    digits: u32,
    sine: bool,
    emit_json: bool,
    cfg: &RunConfig,
) -> Result<String, CoreError> {
    let base = Base::parse(base_spec)?;
    let Some(unit) = base.unit() else {
        return Err(CoreError::construction(
            "the trigonometric pairing needs a complex base direction, e.g. --base 2e:3/5,4/5",
        ));
    };
    let kind = if sine { "sine" } else { "cosine" };
    let p: TrigPairing = if sine {
        sine_pairing(base.modulus(), unit, digits, cfg.prec())?
    } else {
        cosine_pairing(base.modulus(), unit, digits, cfg.prec())?
    };
    let pass = p.residual_upper <= p.tolerance;
    if emit_json {
        return Ok(to_json(&PairingOut {
            kind: kind.to_string(),
            base: format!("{base}"),
            digits,
            direct_re: ball_decimal(&p.direct.re, digits as usize),
            combined_re: ball_decimal(&p.combined.re, digits as usize),
            residual: format!("{:.3e}", p.residual_upper),
            tolerance: format!("{:.3e}", p.tolerance),
            terms_cross_checked: p.cross_checked,
            independence_pairs_checked: p.independence_pairs_checked,
            pass,
        }));
    }
    Ok(format!(
        "{kind} pairing at {base}\ndirect   = {}\ncombined = {}\nresidual <= {:.3e} (tolerance {:.3e}); {} terms cross-checked, {} independence pairs -> {}\n",
        ball_decimal(&p.direct.re, digits as usize),
        ball_decimal(&p.combined.re, digits as usize),
        p.residual_upper,
        p.tolerance,
        p.cross_checked,
        p.independence_pairs_checked,
        if pass { "PASS" } else { "FAIL" }
    ))
}

// ---------------------------------------------------------------------

#[derive(Serialize)]
struct CensusCell {
    n: usize,
    q: u64,
    w: u32,
    t: u64,
    firsts: Vec<u64>,
    free: bool,
    set_equal: bool,
}

#[derive(Serialize)]
struct CensusOut {
    theta: String,
    epsilon: String,
    horizon: u64,
    degenerate: bool,
    rows: Vec<CensusCell>,
    free_rows: usize,
    hit_rows: usize,
    any_free: bool,
    every_hit: bool,
}

pub fn structure_census(cfg: &RunConfig) -> Result<String, CoreError> {
    let ctx = SuiteCtx::build(cfg)?;
    let levels: Vec<usize> = ctx.levels_in_range()?.iter().map(|&(m, _)| m).collect();
    if levels.is_empty() {
        return Err(CoreError::construction(format!(
            "no distinct-denominator levels in {}..={}",
            cfg.n_from, cfg.n_to
        )));
    }
    let eps = cfg.eps_rational()?;
    let census = gap_census(
        &ctx.word,
        &ctx.expansion,
        &levels,
        &ctx.windows(),
        &eps,
        cfg.horizon,
    )?;
    let out = CensusOut {
        theta: cfg.theta.clone(),
        epsilon: eps.to_string(),
        horizon: cfg.horizon,
        degenerate: census.degenerate,
        rows: census
            .rows
            .iter()
            .map(|r| CensusCell {
                n: r.level,
                q: r.q,
                w: r.window,
                t: r.t,
                firsts: r.firsts.clone(),
                free: r.free,
                set_equal: r.set_equal,
            })
            .collect(),
        free_rows: census.free_rows,
        hit_rows: census.hit_rows,
        any_free: census.any_free(),
        every_hit: census.every_hit(),
    };
    Ok(to_json(&out))
}

#[derive(Serialize)]
struct IwMember {
    position: u64,
    nearest_boundary: usize,
    distance: f64,
    within_budget: bool,
}

#[derive(Serialize)]
struct IwOut {
    n: usize,
    q: u64,
    w: u32,
    step_norm: f64,
    proximity_ok: bool,
    cluster_max: u64,
    members: Vec<IwMember>,
}

pub fn structure_iw(cfg: &RunConfig, n: usize, w: u32) -> Result<String, CoreError> {
    let ctx = SuiteCtx::build(cfg)?;
    let rep = compute_i_w(&ctx.word, &ctx.expansion, n, w, ctx.prec)?;
    let out = IwOut {
        n: rep.level,
        q: rep.q,
        w: rep.window,
        step_norm: rep.step_norm,
        proximity_ok: rep.proximity_ok,
        cluster_max: rep.cluster_max,
        members: rep
            .members
            .iter()
            .map(|m| IwMember {
                position: m.position,
                nearest_boundary: m.nearest_boundary,
                distance: m.distance,
                within_budget: m.within_budget,
            })
            .collect(),
    };
    Ok(to_json(&out))
}

#[derive(Serialize)]
struct TailChangeOut {
    position: u64,
    letter: u8,
    periodized: u8,
}

#[derive(Serialize)]
struct TailResidualOut {
    first_boundary: usize,
    second_boundary: usize,
    residual: f64,
}

#[derive(Serialize)]
struct TailsOut {
    n: usize,
    w: u32,
    preperiod: u64,
    period: u64,
    search_limit: u64,
    changes: Vec<TailChangeOut>,
    gap: Option<u64>,
    ratio: Option<f64>,
    log_first: Option<f64>,
    residual: Option<TailResidualOut>,
}

pub fn structure_tails(
    cfg: &RunConfig,
    n: usize,
    w: u32,
    limit: Option<u64>,
    want: Option<usize>,
) -> Result<String, CoreError> {
    let ctx = SuiteCtx::build(cfg)?;
    let approx = PeriodicApproximant::build(&ctx.word, &ctx.expansion, n, w)?;
    let want = want.unwrap_or(2 * ctx.word.partition().len() + 2);
    let rec = tail_changes(&ctx.word, &ctx.expansion, &approx, limit, want, ctx.prec)?;
    let out = TailsOut {
        n: rec.level,
        w: rec.window,
        preperiod: rec.preperiod,
        period: rec.period,
        search_limit: rec.search_limit,
        changes: rec
            .changes
            .iter()
            .map(|c| TailChangeOut {
                position: c.position,
                letter: c.letter,
                periodized: c.periodized,
            })
            .collect(),
        gap: rec.gap,
        ratio: rec.ratio,
        log_first: rec.log_first,
        residual: rec.residual.as_ref().map(|r| TailResidualOut {
            first_boundary: r.first_boundary,
            second_boundary: r.second_boundary,
            residual: r.residual,
        }),
    };
    Ok(to_json(&out))
}
