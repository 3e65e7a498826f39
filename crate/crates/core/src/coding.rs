//! Codings of the rotation orbit `n -> frac(n * theta)`.
//!
//! A partition of the circle is given by boundary points; every orbit
//! point is classified into the half-open interval `[r_i, r_{i+1})` it
//! falls in. Boundary points carry structural tags: an exact rational, or
//! the class `frac(a*theta + c)` with exact rational `a, c`. Tags make two
//! questions exactly decidable that pure numerics cannot settle: whether
//! two boundaries coincide on the circle, and whether a pair is related by
//! `r_j = r_i + v*theta + u` with integers `v, u` (the relation that lets
//! a boundary be eliminated from a series). An untagged variant exists so
//! that the undecidable situation is represented honestly: questions about
//! untagged boundaries that fall below ball resolution report as
//! inconclusive instead of being guessed.
//!
//! Letters are produced by a fixed-point grid: positions `n * T mod 2^P`
//! with `T` a `P`-bit approximation of theta. A letter is accepted only
//! when the grid point clears every boundary by a margin dominating all
//! rounding error; the rare undecided positions fall back to interval
//! arithmetic at escalating precision, where exact boundary hits are
//! resolved through the tags (half-open intervals make a hit determinate).

use crate::error::Error;
use crate::numerics::gauss::GaussRat;
use crate::numerics::theta::ThetaOracle;
use crate::numerics::{certified_compare, BallReal, Cmp, Prec};
use crate::Result;
use rug::{Integer, Rational};
use std::collections::HashSet;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Grid resolution in bits for the fast letter scan.
const GRID_BITS: u32 = 192;
/// Positions per scan chunk; chunks are independent and deterministic.
const CHUNK: usize = 1 << 16;
/// In-band marker for "grid could not decide"; resolved by the slow path.
const UNDECIDED: u8 = 0xFF;

/// A circle boundary point.
#[derive(Clone, Debug, PartialEq)]
pub enum Bound {
    /// Exact rational point in (0, 1).
    Rational(Rational),
    /// The point `frac(a*theta + c)` with exact rational `a != 0` and `c`.
    ThetaLinear { a: Rational, c: Rational },
    /// Exact rational point treated as having unknown provenance: exact
    /// identity questions about it are answered only up to ball
    /// resolution.
    Opaque(Rational),
}

impl Bound {
    /// Rational boundary; must lie strictly inside (0, 1).
    pub fn rational(r: Rational) -> Result<Self> {
        check_unit_open(&r)?;
        Ok(Bound::Rational(r))
    }

    /// Untagged boundary; must lie strictly inside (0, 1).
    pub fn opaque(r: Rational) -> Result<Self> {
        check_unit_open(&r)?;
        Ok(Bound::Opaque(r))
    }

    /// Boundary `frac(a*theta + c)`. Rejects descriptions that place the
    /// point on the forward orbit of 0 (integer `a >= 0` with integer
    /// `c`), because the coding of such a partition is ill-posed: the
    /// orbit hits the boundary exactly. `a = 0` normalizes to a rational
    /// boundary.
    pub fn theta_linear(a: Rational, c: Rational) -> Result<Self> {
        if a.cmp0() == std::cmp::Ordering::Equal {
            let mut r = c;
            let f = r.clone().floor();
            r -= f;
            return Bound::rational(r);
        }
        if a.is_integer() && a.cmp0() != std::cmp::Ordering::Less && c.is_integer() {
            return Err(Error::construction(
                "boundary lies on the forward orbit of 0; the coding would hit it exactly",
            ));
        }
        Ok(Bound::ThetaLinear { a, c })
    }

    /// Internal constructor for the orbit boundary `frac(v*theta)` used by
    /// boundary elimination, where the single exact hit at `n = v` is
    /// determinate under half-open intervals.
    pub(crate) fn orbit_boundary(v: Integer) -> Bound {
        Bound::ThetaLinear {
            a: Rational::from(v),
            c: Rational::new(),
        }
    }

    /// The linear tag `(a, c)` with rational boundaries normalized to
    /// `a = 0`; `None` for untagged boundaries.
    pub fn tag(&self) -> Option<(Rational, Rational)> {
        match self {
            Bound::Rational(r) => Some((Rational::new(), r.clone())),
            Bound::ThetaLinear { a, c } => Some((a.clone(), c.clone())),
            Bound::Opaque(_) => None,
        }
    }

    /// Exact circle equality decided through tags (sound for irrational
    /// theta); untagged boundaries compare by stored value.
    pub fn same_point(&self, other: &Bound) -> bool {
        match (self.tag(), other.tag()) {
            (Some((a1, c1)), Some((a2, c2))) => a1 == a2 && Rational::from(&c1 - &c2).is_integer(),
            _ => {
                let v1 = self.raw_value();
                let v2 = other.raw_value();
                match (v1, v2) {
                    (Some(x), Some(y)) => x == y,
                    _ => false,
                }
            }
        }
    }

    fn raw_value(&self) -> Option<Rational> {
        match self {
            Bound::Rational(r) | Bound::Opaque(r) => Some(r.clone()),
            Bound::ThetaLinear { .. } => None,
        }
    }

    /// Interval enclosure of the boundary value at the given working
    /// precision; `None` when the fractional part did not certify yet.
    pub fn value_ball(&self, oracle: &ThetaOracle, bits: u32) -> Result<Option<BallReal>> {
        match self {
            Bound::Rational(r) | Bound::Opaque(r) => {
                Ok(Some(BallReal::from_rational(r, bits)))
            }
            Bound::ThetaLinear { a, c } => {
                let t = oracle.refine(bits)?;
                Ok(t.mul_rational(a).add_rational(c).frac_certified())
            }
        }
    }

    /// Exact value when theta itself is an exact rational.
    pub fn exact_value(&self, theta: &Rational) -> Rational {
        match self {
            Bound::Rational(r) | Bound::Opaque(r) => r.clone(),
            Bound::ThetaLinear { a, c } => {
                let mut x = Rational::from(a * theta) + c;
                let f = x.clone().floor();
                x -= f;
                x
            }
        }
    }

    /// Parse `p/q` (rational), `~p/q` (untagged), or `a,c` meaning
    /// `frac(a*theta + c)`.
    pub fn parse(s: &str) -> Result<Bound> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('~') {
            let r: Rational = rest
                .trim()
                .parse()
                .map_err(|_| Error::construction(format!("bad boundary value: {rest:?}")))?;
            return Bound::opaque(r);
        }
        if let Some((a, c)) = s.split_once(',') {
            let a: Rational = a
                .trim()
                .parse()
                .map_err(|_| Error::construction(format!("bad boundary coefficient: {a:?}")))?;
            let c: Rational = c
                .trim()
                .parse()
                .map_err(|_| Error::construction(format!("bad boundary offset: {c:?}")))?;
            return Bound::theta_linear(a, c);
        }
        let r: Rational = s
            .parse()
            .map_err(|_| Error::construction(format!("bad boundary value: {s:?}")))?;
        Bound::rational(r)
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Rational(r) => write!(f, "{r}"),
            Bound::Opaque(r) => write!(f, "~{r}"),
            Bound::ThetaLinear { a, c } => write!(f, "{a},{c}"),
        }
    }
}

fn check_unit_open(r: &Rational) -> Result<()> {
    if r.cmp0() != std::cmp::Ordering::Greater || *r >= 1u32 {
        return Err(Error::construction(
            "boundary value must lie strictly between 0 and 1",
        ));
    }
    Ok(())
}

/// A circle partition: boundaries sorted by certified value, plus optional
/// weight vectors. Interval `i` is `[r_i, r_{i+1})` with `r_0 = 0`, so a
/// partition with `l` boundaries has `l + 1` intervals.
#[derive(Clone, Debug)]
pub struct PartitionSpec {
    bounds: Vec<Bound>,
    /// One weight per interval (`l + 1` entries), consecutive entries
    /// distinct so every boundary is a genuine discontinuity.
    weights_t: Option<Vec<GaussRat>>,
    /// One weight per boundary (`l` entries), not all zero.
    weights_s: Option<Vec<GaussRat>>,
}

impl PartitionSpec {
    /// Sort the boundaries by certified value and reject duplicates.
    pub fn new(bounds: Vec<Bound>, oracle: &ThetaOracle, prec: Prec) -> Result<Self> {
        if bounds.len() > 250 {
            return Err(Error::construction("too many boundaries"));
        }
        for i in 0..bounds.len() {
            for j in (i + 1)..bounds.len() {
                if bounds[i].same_point(&bounds[j]) {
                    return Err(Error::construction(format!(
                        "duplicate boundary: {} and {}",
                        bounds[i], bounds[j]
                    )));
                }
            }
        }
        let sorted = if let Some(t) = oracle.exact_rational() {
            let mut keyed: Vec<(Rational, Bound)> = bounds
                .into_iter()
                .map(|b| (b.exact_value(&t), b))
                .collect();
            keyed.sort_by(|x, y| x.0.cmp(&y.0));
            for w in keyed.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::construction(format!(
                        "boundaries {} and {} coincide for this rational rotation",
                        w[0].1, w[1].1
                    )));
                }
            }
            keyed.into_iter().map(|(_, b)| b).collect()
        } else {
            sort_certified(bounds, oracle, prec)?
        };
        Ok(PartitionSpec {
            bounds: sorted,
            weights_t: None,
            weights_s: None,
        })
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    /// Number of boundaries `l`.
    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    /// Number of letters `l + 1`.
    pub fn alphabet_size(&self) -> usize {
        self.bounds.len() + 1
    }

    /// Attach interval weights (`l + 1` entries, consecutive distinct).
    pub fn with_weights_t(mut self, weights: Vec<GaussRat>) -> Result<Self> {
        if weights.len() != self.alphabet_size() {
            return Err(Error::construction(format!(
                "need {} interval weights, got {}",
                self.alphabet_size(),
                weights.len()
            )));
        }
        for w in weights.windows(2) {
            if w[0] == w[1] {
                return Err(Error::construction(
                    "consecutive interval weights must differ",
                ));
            }
        }
        self.weights_t = Some(weights);
        Ok(self)
    }

    /// Attach boundary weights (`l` entries, not all zero).
    pub fn with_weights_s(mut self, weights: Vec<GaussRat>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::construction(format!(
                "need {} boundary weights, got {}",
                self.len(),
                weights.len()
            )));
        }
        if weights.iter().all(|w| w.is_zero()) {
            return Err(Error::construction(
                "at least one boundary weight must be nonzero",
            ));
        }
        self.weights_s = Some(weights);
        Ok(self)
    }

    pub fn weights_t(&self) -> Option<&[GaussRat]> {
        self.weights_t.as_deref()
    }

    pub fn weights_s(&self) -> Option<&[GaussRat]> {
        self.weights_s.as_deref()
    }

    /// Largest squared weight magnitude among the interval weights.
    pub fn weight_t_height_sq(&self) -> Option<Rational> {
        self.weights_t
            .as_ref()
            .map(|ws| ws.iter().map(|w| w.abs_sq()).max().unwrap())
    }

    /// Interval enclosures of all boundary values, escalating until every
    /// fractional part certifies.
    pub fn values(&self, oracle: &ThetaOracle, prec: Prec) -> Result<Vec<BallReal>> {
        let mut bits = prec.start.max(16);
        loop {
            let mut out = Vec::with_capacity(self.bounds.len());
            let mut all = true;
            for b in &self.bounds {
                match b.value_ball(oracle, bits)? {
                    Some(v) => out.push(v),
                    None => {
                        all = false;
                        break;
                    }
                }
            }
            if all {
                return Ok(out);
            }
            if bits >= prec.cap {
                return Err(Error::PrecisionExhausted {
                    bits,
                    context: "resolving boundary values".to_string(),
                });
            }
            bits = bits.saturating_mul(2).min(prec.cap);
        }
    }

    /// Interval for the minimum gap between consecutive points of
    /// `{0} union boundaries` on the circle; 1 when there are no
    /// boundaries. The lower endpoint is a certified bound.
    pub fn eta(&self, oracle: &ThetaOracle, prec: Prec) -> Result<BallReal> {
        let bits = prec.start.max(64);
        if self.bounds.is_empty() {
            return Ok(BallReal::one(bits));
        }
        let values = self.values(oracle, prec)?;
        let mut gaps: Vec<BallReal> = Vec::with_capacity(values.len() + 1);
        gaps.push(values[0].clone());
        for w in values.windows(2) {
            gaps.push(w[1].sub(&w[0]));
        }
        let last = values.last().unwrap();
        gaps.push(BallReal::one(last.prec()).sub(last));
        let mut min = gaps[0].clone();
        for g in &gaps[1..] {
            min = ball_min(&min, g);
        }
        Ok(min)
    }

    /// Exact minimum gap, available when every boundary point has an
    /// exact rational location: either all boundaries are plain
    /// rationals, or the rotation number itself is exactly rational.
    pub fn eta_exact(&self, oracle: &ThetaOracle) -> Option<Rational> {
        if self.bounds.is_empty() {
            return Some(Rational::from(1));
        }
        let theta = oracle.exact_rational();
        let theta_free = self
            .bounds
            .iter()
            .all(|b| !matches!(b, Bound::ThetaLinear { .. }));
        if !theta_free && theta.is_none() {
            return None;
        }
        let t = theta.unwrap_or_default();
        let values: Vec<Rational> = self.bounds.iter().map(|b| b.exact_value(&t)).collect();
        let mut min = values[0].clone();
        for w in values.windows(2) {
            let gap = Rational::from(&w[1] - &w[0]);
            if gap < min {
                min = gap;
            }
        }
        let last = values.last().unwrap();
        let wrap = Rational::from(1) - last;
        if wrap < min {
            min = wrap;
        }
        Some(min)
    }
}

/// Interval containing `min(a, b)`.
fn ball_min(a: &BallReal, b: &BallReal) -> BallReal {
    let lo = a.lo().min(&b.lo());
    let hi = a.hi().min(&b.hi());
    BallReal::from_endpoints(lo, hi)
}

fn sort_certified(bounds: Vec<Bound>, oracle: &ThetaOracle, prec: Prec) -> Result<Vec<Bound>> {
    let mut bits = prec.start.max(64);
    loop {
        let mut balls = Vec::with_capacity(bounds.len());
        let mut pending = false;
        for b in &bounds {
            match b.value_ball(oracle, bits)? {
                Some(v) => balls.push(v),
                None => {
                    pending = true;
                    break;
                }
            }
        }
        if !pending {
            let mut idx: Vec<usize> = (0..bounds.len()).collect();
            idx.sort_by(|&x, &y| {
                balls[x]
                    .mid()
                    .partial_cmp(balls[y].mid())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let ordered = idx
                .windows(2)
                .all(|w| certified_compare(&balls[w[0]], &balls[w[1]]) == Cmp::Less);
            if ordered {
                return Ok(idx.into_iter().map(|i| bounds[i].clone()).collect());
            }
        }
        if bits >= prec.cap {
            return Err(Error::PrecisionExhausted {
                bits,
                context: "ordering boundary values".to_string(),
            });
        }
        bits = bits.saturating_mul(2).min(prec.cap);
    }
}

/// Outcome of the exact-relation scan over boundary pairs.
#[derive(Clone, Debug)]
pub enum ConditionCVerdict {
    /// No pair satisfies `r_j = r_i + v*theta + u` for any `1 <= v <=
    /// v_bound`; `min_residual` is the smallest certified circle distance
    /// observed across all candidate relations (reporting only).
    NoViolation { v_bound: u32, min_residual: f64 },
    /// Pair `(i, j)` satisfies the relation with the reported integers.
    Violation {
        i: usize,
        j: usize,
        v: Integer,
        u: Integer,
    },
}

/// Scan all ordered boundary pairs for the relation
/// `r_j = r_i + v*theta + u`, `1 <= v <= v_bound`, `u` integer. Tagged
/// pairs are decided exactly through the tags; relations involving an
/// untagged boundary are checked numerically and report as inconclusive
/// if a candidate cannot be separated from zero below the precision cap.
pub fn check_condition_c(
    part: &PartitionSpec,
    oracle: &ThetaOracle,
    v_bound: u32,
    prec: Prec,
) -> Result<ConditionCVerdict> {
    let bounds = part.bounds();
    // Exact pass over tagged pairs.
    for (j, bj) in bounds.iter().enumerate() {
        for (i, bi) in bounds.iter().enumerate() {
            if i == j {
                continue;
            }
            if let (Some((ai, ci)), Some((aj, cj))) = (bi.tag(), bj.tag()) {
                let da = Rational::from(&aj - &ai);
                let dc = Rational::from(&cj - &ci);
                if da.is_integer() && dc.is_integer() {
                    let v = da.numer().clone();
                    if v.cmp0() == std::cmp::Ordering::Greater && v <= v_bound {
                        // r_j - r_i - v*theta = dc + (wrap integers), so u
                        // is dc shifted by the fractional-part wraps; report
                        // the integer that the actual values satisfy.
                        let u = relation_offset(bi, bj, &v, oracle, prec)?;
                        return Ok(ConditionCVerdict::Violation { i, j, v, u });
                    }
                }
            }
        }
    }
    // Numeric pass: residuals for reporting, and honesty for untagged
    // boundaries.
    let mut min_residual = f64::INFINITY;
    for (j, bj) in bounds.iter().enumerate() {
        for (i, bi) in bounds.iter().enumerate() {
            if i == j {
                continue;
            }
            let tagged = bi.tag().is_some() && bj.tag().is_some();
            for v in 1..=v_bound {
                let d = circle_relation_distance(bi, bj, v, oracle, prec);
                match d {
                    Ok(dist) => {
                        let lo = dist.lo().to_f64();
                        if lo < min_residual {
                            min_residual = lo;
                        }
                    }
                    Err(Error::PrecisionExhausted { bits, .. }) => {
                        if tagged {
                            // Tags already proved non-coincidence; the
                            // numeric residual is merely tiny. Report it
                            // as at most the last resolution.
                            let tiny = 2f64.powi(-(bits as i32));
                            if tiny < min_residual {
                                min_residual = tiny;
                            }
                        } else {
                            return Err(Error::inconclusive(format!(
                                "cannot separate boundary {j} from boundary {i} + {v}*theta \
                                 modulo 1 below the precision cap; untagged boundaries \
                                 admit no exact certificate"
                            )));
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(ConditionCVerdict::NoViolation {
        v_bound,
        min_residual,
    })
}

/// Certified positive circle distance between `r_j` and `r_i + v*theta`,
/// escalating until the sign certifies.
fn circle_relation_distance(
    bi: &Bound,
    bj: &Bound,
    v: u32,
    oracle: &ThetaOracle,
    prec: Prec,
) -> Result<BallReal> {
    let mut bits = prec.start.max(64);
    loop {
        let vi = bi.value_ball(oracle, bits)?;
        let vj = bj.value_ball(oracle, bits)?;
        if let (Some(vi), Some(vj)) = (vi, vj) {
            let t = oracle.refine(bits)?;
            let d = vj.sub(&vi).sub(&t.mul_integer(&Integer::from(v)));
            if let Some((_, dist)) = d.nearest_int_distance() {
                if dist.sign_certified() == Some(1) {
                    return Ok(dist);
                }
            }
        }
        if bits >= prec.cap {
            return Err(Error::PrecisionExhausted {
                bits,
                context: "separating a boundary relation from zero".to_string(),
            });
        }
        bits = bits.saturating_mul(2).min(prec.cap);
    }
}

/// The exact integer `u` with `value(r_j) = value(r_i) + v*theta + u`,
/// certified by rounding an interval known to contain an integer.
fn relation_offset(
    bi: &Bound,
    bj: &Bound,
    v: &Integer,
    oracle: &ThetaOracle,
    prec: Prec,
) -> Result<Integer> {
    let mut bits = prec.start.max(64);
    loop {
        let vi = bi.value_ball(oracle, bits)?;
        let vj = bj.value_ball(oracle, bits)?;
        if let (Some(vi), Some(vj)) = (vi, vj) {
            let t = oracle.refine(bits)?;
            let d = vj.sub(&vi).sub(&t.mul_integer(v));
            if let Some((k, dist)) = d.nearest_int_distance() {
                if dist.hi() < 0.25 {
                    return Ok(k);
                }
            }
        }
        if bits >= prec.cap {
            return Err(Error::PrecisionExhausted {
                bits,
                context: "rounding a boundary relation offset".to_string(),
            });
        }
        bits = bits.saturating_mul(2).min(prec.cap);
    }
}

/// Data for eliminating a boundary of the form
/// `r_j = frac(value(r_i) + v*theta + u)`: the indicator series of `r_j`
/// splits into a finite prefix, a shifted copy of the series of `r_i`, the
/// orbit-boundary series of `frac(v*theta)`, and an explicit geometric
/// correction when the fractional part wraps.
#[derive(Clone, Debug)]
pub struct BoundaryReduction {
    /// Shift amount `v >= 1`.
    pub v: Integer,
    /// Integer offset `u` in the relation.
    pub u: Integer,
    /// The eliminated boundary `r_j`.
    pub eliminated: Bound,
    /// The surviving boundary `r_i`.
    pub base: Bound,
    /// The orbit boundary `frac(v*theta)`; its single exact orbit hit at
    /// `n = v` is determinate (the point lies in the upper interval).
    pub orbit_bound: Bound,
    /// Whether `value(r_j) < value(r_i)`, which switches on the geometric
    /// correction term.
    pub wraps: bool,
}

/// Construct the elimination data for `r_j = frac(value(r_i) + v*theta + u)`.
pub fn reduce_boundary(
    base: &Bound,
    v: &Integer,
    u: &Integer,
    oracle: &ThetaOracle,
    prec: Prec,
) -> Result<BoundaryReduction> {
    if v.cmp0() != std::cmp::Ordering::Greater {
        return Err(Error::construction(
            "boundary elimination needs a shift v >= 1",
        ));
    }
    let (a, c) = base
        .tag()
        .ok_or_else(|| Error::construction("cannot eliminate against an untagged boundary"))?;
    let aj = Rational::from(&a + v);
    let cj = Rational::from(&c + u);
    let eliminated = Bound::theta_linear(aj, cj)?;
    let wraps = {
        let mut bits = prec.start.max(64);
        loop {
            let vi = base.value_ball(oracle, bits)?;
            let vj = eliminated.value_ball(oracle, bits)?;
            if let (Some(vi), Some(vj)) = (vi, vj) {
                match certified_compare(&vj, &vi) {
                    Cmp::Less => break true,
                    Cmp::Greater => break false,
                    Cmp::Undecided => {}
                }
            }
            if bits >= prec.cap {
                return Err(Error::PrecisionExhausted {
                    bits,
                    context: "deciding whether the eliminated boundary wraps".to_string(),
                });
            }
            bits = bits.saturating_mul(2).min(prec.cap);
        }
    };
    Ok(BoundaryReduction {
        v: v.clone(),
        u: u.clone(),
        eliminated,
        base: base.clone(),
        orbit_bound: Bound::orbit_boundary(v.clone()),
        wraps,
    })
}

/// Letter generator for the coding of `n -> frac(n*theta)`.
#[derive(Clone, Debug)]
pub struct CodingWord {
    oracle: ThetaOracle,
    part: PartitionSpec,
    prec: Prec,
}

struct Grid {
    /// `2^GRID_BITS`.
    modulus: Integer,
    /// Grid step with `|frac(theta)*2^P - t| <= 2`.
    t: Integer,
    /// Boundary grid points with `|value_i*2^P - k_i| <= 2`.
    k: Vec<Integer>,
}

impl CodingWord {
    pub fn new(oracle: ThetaOracle, part: PartitionSpec, prec: Prec) -> Self {
        CodingWord { oracle, part, prec }
    }

    pub fn partition(&self) -> &PartitionSpec {
        &self.part
    }

    pub fn oracle(&self) -> &ThetaOracle {
        &self.oracle
    }

    fn build_grid(&self) -> Result<Grid> {
        let bits = GRID_BITS + 64;
        let modulus = Integer::from(1) << GRID_BITS;
        let mut attempt = bits;
        let t = loop {
            let theta = self.oracle.refine(attempt)?;
            match theta.frac_certified() {
                Some(f) => break f.mul_pow2(GRID_BITS as i32).lo().floor().to_integer().unwrap(),
                None => {
                    if attempt >= self.prec.cap.max(bits * 4) {
                        return Err(Error::PrecisionExhausted {
                            bits: attempt,
                            context: "reducing theta modulo 1 for the letter grid".to_string(),
                        });
                    }
                    attempt *= 2;
                }
            }
        };
        let values = self.part.values(&self.oracle, Prec::new(bits, self.prec.cap.max(bits)))?;
        let k = values
            .iter()
            .map(|v| v.mul_pow2(GRID_BITS as i32).lo().floor().to_integer().unwrap())
            .collect();
        Ok(Grid { modulus, t, k })
    }

    /// Letters `a_0 .. a_{count-1}`; data-parallel over chunks when the
    /// `parallel` feature is active, byte-identical to the sequential
    /// scan either way.
    pub fn letters(&self, count: u64) -> Result<Vec<u8>> {
        let grid = self.build_grid()?;
        let mut out = vec![0u8; count as usize];
        #[cfg(feature = "parallel")]
        {
            out.par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(ci, chunk)| {
                    scan_chunk(&grid, (ci * CHUNK) as u64, chunk);
                });
        }
        #[cfg(not(feature = "parallel"))]
        {
            for (ci, chunk) in out.chunks_mut(CHUNK).enumerate() {
                scan_chunk(&grid, (ci * CHUNK) as u64, chunk);
            }
        }
        self.resolve_undecided(&mut out)?;
        Ok(out)
    }

    /// Sequential scan regardless of features (benchmark baseline).
    pub fn letters_seq(&self, count: u64) -> Result<Vec<u8>> {
        let grid = self.build_grid()?;
        let mut out = vec![0u8; count as usize];
        for (ci, chunk) in out.chunks_mut(CHUNK).enumerate() {
            scan_chunk(&grid, (ci * CHUNK) as u64, chunk);
        }
        self.resolve_undecided(&mut out)?;
        Ok(out)
    }

    fn resolve_undecided(&self, out: &mut [u8]) -> Result<()> {
        for (n, slot) in out.iter_mut().enumerate() {
            if *slot == UNDECIDED {
                *slot = self.letter_at(n as u64)?;
            }
        }
        Ok(())
    }

    /// Certified letter at a single position via interval arithmetic,
    /// resolving exact boundary hits through the tags (a hit belongs to
    /// the upper half-open interval).
    pub fn letter_at(&self, n: u64) -> Result<u8> {
        if let Some(t) = self.oracle.exact_rational() {
            let mut x = Rational::from(&t * Integer::from(n));
            let f = x.clone().floor();
            x -= f;
            let mut letter = 0u8;
            for b in self.part.bounds() {
                if b.exact_value(&t) <= x {
                    letter += 1;
                }
            }
            return Ok(letter);
        }
        let n_int = Integer::from(n);
        let mut bits = self.prec.start.max(64);
        'retry: loop {
            let theta = self.oracle.refine(bits)?;
            let x = match theta.mul_integer(&n_int).frac_certified() {
                Some(x) => x,
                None => {
                    bits = self.bump(bits, n)?;
                    continue 'retry;
                }
            };
            let mut letter = 0u8;
            for b in self.part.bounds() {
                let vb = match b.value_ball(&self.oracle, bits)? {
                    Some(v) => v,
                    None => {
                        bits = self.bump(bits, n)?;
                        continue 'retry;
                    }
                };
                match certified_compare(&vb, &x) {
                    Cmp::Less => letter += 1,
                    Cmp::Greater => {}
                    Cmp::Undecided => {
                        if let Some((a, c)) = b.tag() {
                            // Exact hit test: frac(n*theta) equals
                            // frac(a*theta + c) only when a = n and c is
                            // an integer; any other coincidence would make
                            // theta rational.
                            if a == n_int && c.is_integer() {
                                letter += 1;
                                continue;
                            }
                        }
                        bits = self.bump(bits, n)?;
                        continue 'retry;
                    }
                }
            }
            return Ok(letter);
        }
    }

    fn bump(&self, bits: u32, n: u64) -> Result<u32> {
        if bits >= self.prec.cap {
            return Err(Error::PrecisionExhausted {
                bits,
                context: format!(
                    "classifying orbit position {n}; the rotation may be rational or the \
                     orbit passes a boundary closer than the precision cap resolves"
                ),
            });
        }
        Ok(bits.saturating_mul(2).min(self.prec.cap))
    }
}

/// Classify one chunk of grid positions; undecided letters get the marker.
fn scan_chunk(grid: &Grid, start: u64, out: &mut [u8]) {
    let mut x = Integer::from(start);
    x *= &grid.t;
    x %= &grid.modulus;
    for (off, slot) in out.iter_mut().enumerate() {
        let n = start + off as u64;
        *slot = classify(grid, &x, n);
        x += &grid.t;
        if x >= grid.modulus {
            x -= &grid.modulus;
        }
    }
}

fn classify(grid: &Grid, x: &Integer, n: u64) -> u8 {
    // Accumulated grid error: n steps of a step with error <= 2 units,
    // plus boundary placement error <= 2 units, plus strict-side slack.
    let margin = Integer::from(2 * n + 8);
    // Distance to the circle point 0.
    let to_zero = x.clone();
    let to_one = Integer::from(&grid.modulus - x);
    if to_zero < margin || to_one < margin {
        return UNDECIDED;
    }
    let mut letter = 0u8;
    for k in &grid.k {
        let d = Integer::from(x - k);
        let dist = d.clone().abs();
        let wrapped = Integer::from(&grid.modulus - &dist);
        if dist < margin || wrapped < margin {
            return UNDECIDED;
        }
        if d.cmp0() == std::cmp::Ordering::Greater {
            letter += 1;
        }
    }
    letter
}

/// Number of distinct length-`n` factors for `n = 1 ..= n_max`.
pub fn subword_complexity(letters: &[u8], n_max: usize) -> Result<Vec<u64>> {
    if n_max == 0 {
        return Err(Error::construction("factor length bound must be positive"));
    }
    if letters.len() < 2 * n_max {
        return Err(Error::construction(format!(
            "need at least {} letters to count factors of length {}",
            2 * n_max,
            n_max
        )));
    }
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut seen: HashSet<&[u8]> = HashSet::new();
        for w in letters.windows(n) {
            seen.insert(w);
        }
        out.push(seen.len() as u64);
    }
    Ok(out)
}

/// Eventually periodic control word: `pattern` repeated to `count` letters.
pub fn periodic_letters(pattern: &[u8], count: usize) -> Vec<u8> {
    assert!(!pattern.is_empty());
    (0..count).map(|i| pattern[i % pattern.len()]).collect()
}

/// Interval for the circle distance `||coeff*theta - offset||` (distance
/// to the nearest integer), refined until the nearest integer is certified.
pub fn circle_distance(
    oracle: &ThetaOracle,
    coeff: &Rational,
    offset: &Rational,
    prec: Prec,
) -> Result<BallReal> {
    let mut bits = prec.start.max(64);
    loop {
        let theta = oracle.refine(bits)?;
        let d = theta
            .mul_rational(coeff)
            .add_rational(&Rational::from(-offset));
        if let Some((_, dist)) = d.nearest_int_distance() {
            return Ok(dist);
        }
        if bits >= prec.cap {
            return Err(Error::PrecisionExhausted {
                bits,
                context: format!("circle distance of {coeff}*theta - {offset}"),
            });
        }
        bits = bits.saturating_mul(2).min(prec.cap);
    }
}

/// Interval for the circle distance between the orbit point
/// `frac(m*theta)` and a tagged boundary, computed through the tag so the
/// two occurrences of theta cancel exactly:
/// `||m*theta - (a*theta + c)|| = ||(m - a)*theta - c||`.
pub fn orbit_bound_distance(
    oracle: &ThetaOracle,
    bound: &Bound,
    m: u64,
    prec: Prec,
) -> Result<BallReal> {
    let (a, c) = bound
        .tag()
        .ok_or_else(|| Error::construction("orbit distance needs a tagged boundary"))?;
    let coeff = Rational::from(-&a) + Rational::from(m);
    circle_distance(oracle, &coeff, &c, prec)
}
