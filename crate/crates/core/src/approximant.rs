//! Eventually periodic rewrites of a rotation coding word.
//!
//! At level `n` the word is rewritten as `U V V V...` where `U` is the
//! first `r = q_n` letters and `V` the next `s = q_n` letters.  The
//! rewrite agrees with the true word far beyond the block boundary; the
//! positions where they differ organise into a small number of
//! arithmetic progressions with common difference `s`.  This module
//! scans those mismatch sets exhaustively, verifies the progression
//! structure, measures gap growth and pattern stability along the
//! progressions, and certifies the evaluation-error bounds of the
//! rewrite at a concrete base.

use std::collections::{BTreeMap, BTreeSet};

use rug::{Integer, Rational};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::cfrac::{nearest_distance, CfExpansion};
use crate::coding::{orbit_bound_distance, CodingWord};
use crate::error::Error;
use crate::numerics::gauss::{Base, GaussRat};
use crate::numerics::{BallComplex, Prec};
use crate::series::eval_t;
use crate::Result;

/// Eventually periodic rewrite `U V V V...` of a coding word, with
/// preperiod block `U` of length `r` and period block `V` of length `s`
/// copied verbatim from the word.
#[derive(Clone, Debug)]
pub struct PeriodicApproximant {
    /// Convergent level supplying the block lengths.
    pub level: usize,
    /// Verification window `w`; positions below `r + w*s` are in scope.
    pub window: u32,
    /// Preperiod length `r` (the denominator at `level`).
    pub preperiod: u64,
    /// Period length `s` (equal to `r` by construction).
    pub period: u64,
    /// Letters `a_0 .. a_{r+s-1}` of the true word.
    pub prefix: Vec<u8>,
}

impl PeriodicApproximant {
    /// Copies the `U` and `V` blocks out of the word at the given level.
    /// The window must be at least 2 so that at least one full period is
    /// checked against the word beyond the copied blocks.
    pub fn build(
        word: &CodingWord,
        expansion: &CfExpansion,
        level: usize,
        window: u32,
    ) -> Result<Self> {
        if window < 2 {
            return Err(Error::domain("approximant window must be at least 2"));
        }
        if level > expansion.depth() {
            return Err(Error::construction(format!(
                "level {level} beyond expansion depth {}",
                expansion.depth()
            )));
        }
        let q = expansion
            .q_at(level as isize)
            .to_u64()
            .ok_or_else(|| Error::construction("denominator exceeds u64 range"))?;
        if q == 0 {
            return Err(Error::construction("zero denominator at requested level"));
        }
        let prefix = word.letters(2 * q)?;
        Ok(PeriodicApproximant {
            level,
            window,
            preperiod: q,
            period: q,
            prefix,
        })
    }

    /// Letter of the rewrite at position `k`: the true letter below
    /// `r + s`, then purely periodic with period `s`.
    pub fn letter(&self, k: u64) -> u8 {
        let r = self.preperiod;
        let s = self.period;
        if k < r + s {
            self.prefix[k as usize]
        } else {
            self.prefix[(r + (k - r) % s) as usize]
        }
    }

    /// Exact numerator `p = sum_{k<r+s} u(a_k) b^{r+s-k} -
    /// sum_{k<r} u(a_k) b^{r-k}`; the rewrite's value is
    /// `p / (b^r (b^s - 1))`.
    pub fn numerator(&self, base: &Base, weights: &[GaussRat]) -> GaussRat {
        let b = base.value();
        let full = weighted_prefix_numerator(&self.prefix, (self.preperiod + self.period) as usize, weights, &b);
        let head = weighted_prefix_numerator(&self.prefix, self.preperiod as usize, weights, &b);
        full.sub(&head)
    }

    /// Exact value of the rewrite under the digit map `u`:
    /// `sum_k u(a_k^{rewrite}) b^{-k}` in closed form.
    pub fn value(&self, base: &Base, weights: &[GaussRat]) -> Result<GaussRat> {
        let b = base.value();
        let denom = b
            .pow_i64(self.preperiod as i64)?
            .mul(&b.pow_i64(self.period as i64)?.sub(&GaussRat::one()));
        Ok(self.numerator(base, weights).mul(&denom.inv()?))
    }
}

/// `sum_{k<count} u(a_k) b^{count-k}` by Horner evaluation.
fn weighted_prefix_numerator(
    letters: &[u8],
    count: usize,
    weights: &[GaussRat],
    b: &GaussRat,
) -> GaussRat {
    let mut acc = GaussRat::zero();
    for &letter in &letters[..count] {
        acc = acc.mul(b).add(&weights[letter as usize]);
    }
    acc.mul(b)
}

/// Exhaustive comparison of a word against its periodic rewrite on
/// `[0, r + w*s)`, with the mismatch set decomposed into arithmetic
/// progressions keyed by their first hits.
#[derive(Clone, Debug)]
pub struct MismatchScan {
    /// Convergent level of the rewrite.
    pub level: usize,
    /// Scan window `w`.
    pub window: u32,
    /// Preperiod length `r`.
    pub preperiod: u64,
    /// Period length `s`.
    pub period: u64,
    /// Every mismatching position in `[r+s, r + w*s)`, ascending.
    pub positions: Vec<u64>,
    /// First mismatching position in each residue class mod `s`,
    /// ascending.
    pub firsts: Vec<u64>,
    /// Letter changes `a_i - a_{i-s}` at each first hit, same order.
    pub letter_changes: Vec<i64>,
    /// Number of first hits inside each length-`s` window
    /// `[r + j*s, r + (j+1)*s)` for `j = 1 .. w-1`.
    pub per_window: Vec<u64>,
    /// Whether the mismatch set equals the union of the progressions
    /// `first + k*s` exactly.
    pub set_equal: bool,
    /// A position in the symmetric difference when `set_equal` fails.
    pub set_witness: Option<u64>,
}

impl MismatchScan {
    /// Number of mismatch progressions `t`.
    pub fn t(&self) -> usize {
        self.firsts.len()
    }

    /// Largest per-window first-hit count; 0 when there are no hits.
    pub fn per_window_max(&self) -> u64 {
        self.per_window.iter().copied().max().unwrap_or(0)
    }

    /// Smallest gap between consecutive first hits; `None` below two
    /// progressions.
    pub fn min_first_gap(&self) -> Option<u64> {
        self.firsts
            .windows(2)
            .map(|w| w[1] - w[0])
            .min()
    }
}

/// Scans `[r+s, r + w*s)` comparing the word against the periodic
/// extension of its `[r, r+s)` block.  The slice must cover the whole
/// scan range.  Positions below `r + s` agree by construction.
pub fn scan_mismatches(
    letters: &[u8],
    level: usize,
    preperiod: u64,
    period: u64,
    window: u32,
) -> Result<MismatchScan> {
    if window < 2 {
        return Err(Error::domain("scan window must be at least 2"));
    }
    let r = preperiod;
    let s = period;
    let end = r + u64::from(window) * s;
    if (letters.len() as u64) < end {
        return Err(Error::construction(format!(
            "letter horizon {} too short for scan end {end}",
            letters.len()
        )));
    }
    let mut positions = Vec::new();
    let mut first: BTreeMap<u64, u64> = BTreeMap::new();
    for j in (r + s)..end {
        let actual = letters[j as usize];
        let rewound = letters[(r + (j - r) % s) as usize];
        if actual != rewound {
            positions.push(j);
            first.entry(j % s).or_insert(j);
        }
    }
    let mut firsts: Vec<u64> = first.values().copied().collect();
    firsts.sort_unstable();
    let letter_changes = firsts
        .iter()
        .map(|&f| i64::from(letters[f as usize]) - i64::from(letters[(f - s) as usize]))
        .collect();
    let mut per_window = Vec::with_capacity(window as usize - 1);
    for j in 1..u64::from(window) {
        let (lo, hi) = (r + j * s, r + (j + 1) * s);
        per_window.push(firsts.iter().filter(|&&f| lo <= f && f < hi).count() as u64);
    }
    let mut cover: BTreeSet<u64> = BTreeSet::new();
    for &f in &firsts {
        let mut k = f;
        while k < end {
            cover.insert(k);
            k += s;
        }
    }
    let actual_set: BTreeSet<u64> = positions.iter().copied().collect();
    let set_witness = cover
        .symmetric_difference(&actual_set)
        .next()
        .copied();
    Ok(MismatchScan {
        level,
        window,
        preperiod: r,
        period: s,
        positions,
        firsts,
        letter_changes,
        per_window,
        set_equal: set_witness.is_none(),
        set_witness,
    })
}

/// Materialises the word far enough and scans it against the rewrite.
pub fn mismatches(word: &CodingWord, approx: &PeriodicApproximant) -> Result<MismatchScan> {
    let end = approx.preperiod + u64::from(approx.window) * approx.period;
    let letters = word.letters(end)?;
    scan_mismatches(
        &letters,
        approx.level,
        approx.preperiod,
        approx.period,
        approx.window,
    )
}

/// Longest `m` such that every progression keeps its new letter for
/// `m` further steps of size `period` within the slice: the minimum
/// over first hits `i` of the largest `m` with
/// `a_{i + m' * period} = a_i` for all `m' <= m`.  Capped at `cap`;
/// `None` when there are no progressions.
pub fn stability_length(letters: &[u8], firsts: &[u64], period: u64, cap: u64) -> Option<u64> {
    if firsts.is_empty() {
        return None;
    }
    let horizon = letters.len() as u64;
    let mut overall = cap;
    for &i in firsts {
        let target = letters[i as usize];
        let mut m = 0u64;
        while m < cap
            && i + (m + 1) * period < horizon
            && letters[(i + (m + 1) * period) as usize] == target
        {
            m += 1;
        }
        overall = overall.min(m);
    }
    Some(overall)
}

/// One row of the progression-structure report at a `(level, window)`
/// pair.
#[derive(Clone, Debug)]
pub struct ConditionRow {
    /// Convergent level.
    pub level: usize,
    /// Denominator `q` at the level (both block lengths).
    pub q: u64,
    /// Scan window `w`.
    pub window: u32,
    /// Number of mismatch progressions.
    pub t: usize,
    /// First hit of each progression, ascending.
    pub firsts: Vec<u64>,
    /// Letter change at each first hit.
    pub letter_changes: Vec<i64>,
    /// Largest count of first hits in one length-`s` window.
    pub per_window_max: u64,
    /// Smallest gap between consecutive first hits.
    pub min_first_gap: Option<u64>,
    /// Exact progression-union identity for the mismatch set.
    pub set_equal: bool,
    /// Witness position when the identity fails.
    pub set_witness: Option<u64>,
    /// Certified `q * eta > 2 (w + 1)`: the level is large enough for
    /// the structural bounds to be in force.
    pub above_cutoff: bool,
    /// Twice the boundary count: the progression budget.
    pub progression_bound: u64,
    /// Per-window reading: above the cutoff, every window introduces at
    /// most `progression_bound` new progressions and the set identity
    /// holds.
    pub per_window_ok: bool,
    /// Global reading: above the cutoff, `t <= progression_bound` and
    /// the set identity holds.
    pub global_ok: bool,
}

/// Distinct denominators of the expansion in ascending order, with the
/// first level attaining each.
pub fn distinct_levels(expansion: &CfExpansion) -> Result<Vec<(usize, u64)>> {
    let mut out: Vec<(usize, u64)> = Vec::new();
    for m in 0..=expansion.depth() {
        // Denominators grow monotonically; once one leaves u64 range the
        // level (and every deeper one) is unreachable by position scans.
        let Some(q) = expansion.q_at(m as isize).to_u64() else {
            break;
        };
        if out.last().map(|&(_, prev)| prev == q).unwrap_or(false) {
            continue;
        }
        out.push((m, q));
    }
    Ok(out)
}

/// Certified strict comparison `q * eta > 2 (w + 1)` where `eta` is the
/// least gap of the partition's boundary set. Progression structure of the
/// mismatch set is only guaranteed above this cutoff.
pub fn certified_above_cutoff(
    word: &CodingWord,
    q: u64,
    window: u32,
    prec: Prec,
) -> Result<bool> {
    let part = word.partition();
    let oracle = word.oracle();
    let rhs = Rational::from(2 * (u64::from(window) + 1));
    if let Some(eta) = part.eta_exact(oracle) {
        return Ok(eta * Rational::from(q) > rhs);
    }
    let mut bits = prec.start.max(64);
    loop {
        let eta = part.eta(oracle, Prec { start: bits, cap: prec.cap })?;
        let lhs = eta.mul_rational(&Rational::from(q));
        if lhs.lo() > rhs {
            return Ok(true);
        }
        if lhs.hi() < rhs {
            return Ok(false);
        }
        if bits >= prec.cap {
            return Err(Error::PrecisionExhausted {
                bits,
                context: "deciding the structural window cutoff".to_string(),
            });
        }
        bits = bits.saturating_mul(2).min(prec.cap);
    }
}

/// Certified `max(1, floor(eta * q_next / 4))`: the stability-length
/// target at the next level.
fn certified_pattern_floor(word: &CodingWord, q_next: u64, prec: Prec) -> Result<u64> {
    let part = word.partition();
    let oracle = word.oracle();
    if let Some(eta) = part.eta_exact(oracle) {
        let x = eta * Rational::from(q_next) / Rational::from(4);
        let f = x.floor().into_numer_denom().0;
        return Ok(f.to_u64().unwrap_or(0).max(1));
    }
    let quarter = Rational::from((1, 4));
    let mut bits = prec.start.max(64);
    loop {
        let eta = part.eta(oracle, Prec { start: bits, cap: prec.cap })?;
        let x = eta
            .mul_integer(&Integer::from(q_next))
            .mul_rational(&quarter);
        if let Some(f) = x.floor_certified() {
            return Ok(f.to_u64().unwrap_or(0).max(1));
        }
        if bits >= prec.cap {
            return Err(Error::PrecisionExhausted {
                bits,
                context: "certifying the stability-length floor".to_string(),
            });
        }
        bits = bits.saturating_mul(2).min(prec.cap);
    }
}

/// Scans every distinct-denominator level up to `q_bound` at each
/// window, reporting progression counts, per-window budgets, gap data,
/// and the exact set identity.  One letters pass covers all rows.
pub fn condition_rows(
    word: &CodingWord,
    expansion: &CfExpansion,
    q_bound: u64,
    windows: &[u32],
    prec: Prec,
) -> Result<Vec<ConditionRow>> {
    if windows.is_empty() {
        return Err(Error::construction("no scan windows requested"));
    }
    if let Some(&w) = windows.iter().find(|&&w| w < 2) {
        return Err(Error::domain(format!("scan window {w} must be at least 2")));
    }
    let levels: Vec<(usize, u64)> = distinct_levels(expansion)?
        .into_iter()
        .filter(|&(_, q)| q <= q_bound)
        .collect();
    if levels.is_empty() {
        return Err(Error::construction("no levels below the denominator bound"));
    }
    let w_max = u64::from(*windows.iter().max().unwrap());
    let q_max = levels.last().unwrap().1;
    let letters = word.letters((1 + w_max) * q_max)?;
    let bound = 2 * word.partition().len() as u64;

    let mut cutoffs: BTreeMap<(u64, u32), bool> = BTreeMap::new();
    for &w in windows {
        for &(_, q) in &levels {
            cutoffs.insert((q, w), certified_above_cutoff(word, q, w, prec)?);
        }
    }

    let pairs: Vec<(u32, usize, u64)> = windows
        .iter()
        .flat_map(|&w| levels.iter().map(move |&(m, q)| (w, m, q)))
        .collect();
    let build_row = |&(w, m, q): &(u32, usize, u64)| -> Result<ConditionRow> {
        let scan = scan_mismatches(&letters, m, q, q, w)?;
        let above = cutoffs[&(q, w)];
        let structural = scan.set_equal;
        let t = scan.t();
        let per_window_max = scan.per_window_max();
        let min_first_gap = scan.min_first_gap();
        let per_window_ok = !above || (structural && scan.per_window.iter().all(|&c| c <= bound));
        let global_ok = !above || (structural && t as u64 <= bound);
        Ok(ConditionRow {
            level: m,
            q,
            window: w,
            t,
            per_window_max,
            min_first_gap,
            firsts: scan.firsts,
            letter_changes: scan.letter_changes,
            set_equal: structural,
            set_witness: scan.set_witness,
            above_cutoff: above,
            progression_bound: bound,
            per_window_ok,
            global_ok,
        })
    };
    #[cfg(feature = "parallel")]
    let rows = pairs.par_iter().map(build_row).collect::<Result<Vec<_>>>()?;
    #[cfg(not(feature = "parallel"))]
    let rows = pairs.iter().map(build_row).collect::<Result<Vec<_>>>()?;
    Ok(rows)
}

/// One row of the stability-length report.
#[derive(Clone, Debug)]
pub struct StabilityRow {
    /// Convergent level.
    pub level: usize,
    /// Denominator at the level.
    pub q: u64,
    /// Next distinct denominator.
    pub q_next: u64,
    /// Scan window used to collect the progressions.
    pub window: u32,
    /// Number of mismatch progressions.
    pub t: usize,
    /// Smallest gap between consecutive first hits.
    pub min_first_gap: Option<u64>,
    /// Target `max(1, floor(eta * q_next / 4))`.
    pub pattern_floor: u64,
    /// Measurement cap (`pattern_floor + 8`).
    pub cap: u64,
    /// Measured stability length, `None` when there are no
    /// progressions.
    pub stability: Option<u64>,
    /// Vacuous at `t = 0`, otherwise `stability >= pattern_floor`.
    pub stability_ok: bool,
}

/// Measures the stability length along every mismatch progression for
/// distinct-denominator levels up to `q_bound`, against the target
/// floor derived from the next denominator.
pub fn stability_rows(
    word: &CodingWord,
    expansion: &CfExpansion,
    q_bound: u64,
    window: u32,
    prec: Prec,
) -> Result<Vec<StabilityRow>> {
    if window < 2 {
        return Err(Error::domain("scan window must be at least 2"));
    }
    let all = distinct_levels(expansion)?;
    let mut picks: Vec<(usize, u64, u64)> = Vec::new();
    for pair in all.windows(2) {
        let (m, q) = pair[0];
        let (_, q_next) = pair[1];
        if q <= q_bound {
            picks.push((m, q, q_next));
        }
    }
    if picks.is_empty() {
        return Err(Error::construction(
            "no levels with a successor below the denominator bound",
        ));
    }
    let mut rows_meta = Vec::with_capacity(picks.len());
    let mut horizon = 0u64;
    for &(m, q, q_next) in &picks {
        let f0 = certified_pattern_floor(word, q_next, prec)?;
        let cap = f0 + 8;
        horizon = horizon.max((1 + u64::from(window) + cap + 2) * q);
        rows_meta.push((m, q, q_next, f0, cap));
    }
    let letters = word.letters(horizon)?;
    let mut rows = Vec::with_capacity(rows_meta.len());
    for (m, q, q_next, f0, cap) in rows_meta {
        let scan = scan_mismatches(&letters, m, q, q, window)?;
        let stability = stability_length(&letters, &scan.firsts, q, cap);
        let stability_ok = match stability {
            None => true,
            Some(l) => l >= f0,
        };
        rows.push(StabilityRow {
            level: m,
            q,
            q_next,
            window,
            t: scan.t(),
            min_first_gap: scan.min_first_gap(),
            pattern_floor: f0,
            cap,
            stability,
            stability_ok,
        });
    }
    Ok(rows)
}

/// Certified check that each first-hit orbit point lies within one
/// rotation step `|q_level * theta|` (distance to the nearest integer)
/// of some partition boundary, the origin included.
pub fn firsts_near_boundary(
    word: &CodingWord,
    expansion: &CfExpansion,
    level: usize,
    firsts: &[u64],
    prec: Prec,
) -> Result<bool> {
    let oracle = word.oracle();
    let part = word.partition();
    let q = expansion.q_at(level as isize);
    'outer: for &f in firsts {
        let mut bits = prec.start.max(64);
        loop {
            let scaled = Prec { start: bits, cap: prec.cap };
            let step = nearest_distance(oracle, &q, scaled)?.1;
            let (_, origin) = nearest_distance(oracle, &Integer::from(f), scaled)?;
            let mut candidates = vec![origin];
            for b in part.bounds() {
                candidates.push(orbit_bound_distance(oracle, b, f, scaled)?);
            }
            if candidates.iter().any(|d| d.hi() <= step.lo()) {
                continue 'outer;
            }
            if candidates.iter().all(|d| d.lo() > step.hi()) {
                return Ok(false);
            }
            if bits >= prec.cap {
                return Err(Error::PrecisionExhausted {
                    bits,
                    context: "comparing first-hit orbit distances against one step".to_string(),
                });
            }
            bits = bits.saturating_mul(2).min(prec.cap);
        }
    }
    Ok(true)
}

/// Certified error report for the rewrite's value at a base.
#[derive(Clone, Debug)]
pub struct ApproximantError {
    /// Convergent level.
    pub level: usize,
    /// Scan window.
    pub window: u32,
    /// Preperiod length `r`.
    pub preperiod: u64,
    /// Period length `s`.
    pub period: u64,
    /// Number of mismatch progressions.
    pub t: usize,
    /// First hits of the progressions.
    pub firsts: Vec<u64>,
    /// Decimal digits requested from the series evaluation.
    pub digits: u32,
    /// Series terms actually summed.
    pub terms_used: u64,
    /// Enclosure of the full series value.
    pub alpha: BallComplex,
    /// Exact value of the rewrite.
    pub alpha_n: GaussRat,
    /// Exact progression correction `sum c_l b^{r+s-i_l}` entering the
    /// multiplied-out linear form.
    pub correction: GaussRat,
    /// Enclosure of `alpha b^{r+s} - alpha b^r - p - correction`.
    pub small: BallComplex,
    /// Square of the stated bound `2H / |b|^{(w-1) s}`.
    pub small_bound_sq: Rational,
    /// Certified `|small| <= bound`.
    pub small_ok: bool,
    /// Enclosure of the normalised error
    /// `alpha - alpha_n - correction / (b^r (b^s - 1))`.
    pub big: BallComplex,
    /// Square of the stated bound `2H / |b|^{r + w s}`.
    pub big_bound_sq: Rational,
    /// Certified `|big| <= bound`.
    pub big_ok: bool,
    /// Exact square of the series enclosure radius.
    pub alpha_radius_sq: Rational,
    /// Square of the radius target `bound / 100`.
    pub radius_bound_sq: Rational,
    /// Radius target met.
    pub radius_ok: bool,
}

/// Decimal digits that push the series radius about four orders below
/// the normalised bound `2 sqrt(height_sq) / |b|^scale`.
fn auto_digits(base: &Base, height_sq: &Rational, scale: u64) -> u32 {
    let log10_b = base.modulus().to_f64().log10();
    let log10_2h = 0.5 * height_sq.to_f64().log10() + std::f64::consts::LOG10_2;
    let d = (scale as f64 * log10_b - log10_2h).ceil() as i64 + 4;
    d.max(12) as u32
}

/// Exact nonnegative rational equal to the square of a ball's radius
/// component sum.  A non-finite radius maps to an impossibly large
/// value so the radius check fails instead of passing vacuously.
fn radius_sq(value: &BallComplex) -> Rational {
    let huge = || Rational::from(Integer::from(1) << 4096u32);
    let re = value.re.rad().to_rational().unwrap_or_else(huge);
    let im = value.im.rad().to_rational().unwrap_or_else(huge);
    let sum = re + im;
    Rational::from(&sum * &sum)
}

/// Evaluates the series at the base, forms the multiplied-out linear
/// form `alpha b^{r+s} - alpha b^r - p - sum c_l b^{r+s-i_l}` and the
/// normalised error, and certifies both against their stated bounds.
///
/// `digits_override` forces the series precision; by default just
/// enough digits are used to decide the bounds with two spare orders
/// of magnitude.  A certified bound violation or a broken progression
/// structure is an error, never a silent flag.
pub fn approximant_error(
    base: &Base,
    word: &CodingWord,
    expansion: &CfExpansion,
    level: usize,
    window: u32,
    digits_override: Option<u32>,
) -> Result<ApproximantError> {
    let approx = PeriodicApproximant::build(word, expansion, level, window)?;
    let r = approx.preperiod;
    let s = approx.period;
    let letters = word.letters(r + u64::from(window) * s)?;
    let scan = scan_mismatches(&letters, level, r, s, window)?;
    if !scan.set_equal {
        return Err(Error::StructureViolation {
            level,
            window,
            witness: scan.set_witness.unwrap_or(0),
        });
    }
    let part = word.partition();
    let weights = part
        .weights_t()
        .ok_or_else(|| Error::construction("error bounds need interval weights"))?
        .to_vec();
    let height_sq = part
        .weight_t_height_sq()
        .ok_or_else(|| Error::construction("error bounds need interval weights"))?;

    let w = u64::from(window);
    let small_bound_sq = Rational::from(4 * &height_sq) * base.abs_pow(-2 * ((w - 1) * s) as i64);
    let big_bound_sq = Rational::from(4 * &height_sq) * base.abs_pow(-2 * (r + w * s) as i64);

    let digits = digits_override.unwrap_or_else(|| auto_digits(base, &height_sq, r + w * s));
    let alpha = eval_t(base, word, digits)?;

    let b = base.value();
    let p = approx.numerator(base, &weights);
    let mut correction = GaussRat::zero();
    for &f in &scan.firsts {
        let delta = weights[letters[f as usize] as usize]
            .sub(&weights[letters[(f - s) as usize] as usize]);
        correction = correction.add(&delta.mul(&b.pow_i64((r + s) as i64 - f as i64)?));
    }

    let log2_b = base.modulus().to_f64().log2().max(0.1);
    let shift_bits = (((r + w * s + 8) as f64) * log2_b).ceil() as u32 + 64;
    let work_bits = alpha.bits.saturating_add(shift_bits);

    let factor = b
        .pow_i64((r + s) as i64)?
        .sub(&b.pow_i64(r as i64)?);
    let constant = p.add(&correction);
    let small = alpha
        .value
        .mul(&factor.to_balls(work_bits))
        .sub(&constant.to_balls(work_bits));

    let denom_inv = b
        .pow_i64(r as i64)?
        .mul(&b.pow_i64(s as i64)?.sub(&GaussRat::one()))
        .inv()?;
    let alpha_n = p.mul(&denom_inv);
    let big = small.mul(&denom_inv.to_balls(work_bits));

    let small_abs_sq = small.abs_sq();
    if small_abs_sq.lo() > small_bound_sq {
        return Err(Error::BoundViolated { level, window });
    }
    let small_ok = small_abs_sq.hi() <= small_bound_sq;
    let big_abs_sq = big.abs_sq();
    if big_abs_sq.lo() > big_bound_sq {
        return Err(Error::BoundViolated { level, window });
    }
    let big_ok = big_abs_sq.hi() <= big_bound_sq;

    let alpha_radius_sq = radius_sq(&alpha.value);
    let radius_bound_sq = Rational::from(&big_bound_sq / Integer::from(10_000));
    let radius_ok = alpha_radius_sq <= radius_bound_sq;

    Ok(ApproximantError {
        level,
        window,
        preperiod: r,
        period: s,
        t: scan.t(),
        firsts: scan.firsts,
        digits,
        terms_used: alpha.terms_used,
        alpha: alpha.value,
        alpha_n,
        correction,
        small,
        small_bound_sq,
        small_ok,
        big,
        big_bound_sq,
        big_ok,
        alpha_radius_sq,
        radius_bound_sq,
        radius_ok,
    })
}
