//! Rotation-number oracles: descriptions of a real number that can be
//! refined to an interval of any requested width.
//!
//! Supported descriptions: the golden ratio conjugate, fractional parts of
//! square roots, roots of integer quadratics, real parts of ratios of
//! complex logarithms, exact rational literals (useful as degenerate
//! controls), and numbers given by their partial-quotient sequence.
//! Each oracle may carry an exact rational scale factor.

use crate::error::Error;
use crate::Result;
use rug::{Integer, Rational};
use std::fmt;

use super::gauss::GaussRat;
use super::{BallComplex, BallReal};

/// Partial-quotient source for quotient-defined numbers. The sequence
/// includes the integer part `a_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuotRule {
    /// Finite explicit prefix `a_0, a_1, ...`; refinement fails once the
    /// prefix is exhausted.
    List(Vec<Integer>),
    /// `a_0 = 0`, `a_m = m + 1` for `m >= 1`.
    Linear,
    /// `a_0 = 0`, `a_m = 2^m` for `m >= 1`.
    Pow2,
}

impl QuotRule {
    fn get(&self, m: usize) -> Option<Integer> {
        match self {
            QuotRule::List(v) => v.get(m).cloned(),
            QuotRule::Linear => Some(if m == 0 {
                Integer::new()
            } else {
                Integer::from(m as u64 + 1)
            }),
            QuotRule::Pow2 => Some(if m == 0 {
                Integer::new()
            } else {
                Integer::from(1) << (m as u32)
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ThetaKind {
    /// (sqrt(5) - 1) / 2.
    Golden,
    /// Fractional part of sqrt(d), d a non-square integer >= 2.
    SqrtFrac { d: Integer },
    /// Root (-b + s*sqrt(b^2 - 4ac)) / (2a) with s = +1 or -1; the
    /// discriminant is positive and not a perfect square, so the value is
    /// a certified quadratic irrational. Normalized so a > 0.
    Quad {
        a: Integer,
        b: Integer,
        c: Integer,
        plus: bool,
    },
    /// Re(log z1 / log z2), principal branch, z1 and z2 exact complex
    /// rationals.
    LogRatio { z1: GaussRat, z2: GaussRat },
    /// Exact rational value; carries no irrationality certificate, and
    /// algorithms that need one will report precision exhaustion rather
    /// than silently treating it as irrational.
    Literal { value: Rational },
    /// Number defined by its continued-fraction partial quotients.
    Quotients { rule: QuotRule },
}

/// A refinable description of a real number, optionally scaled by an exact
/// nonzero rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaOracle {
    kind: ThetaKind,
    scale: Rational,
}

impl ThetaOracle {
    pub fn golden() -> Self {
        ThetaOracle {
            kind: ThetaKind::Golden,
            scale: Rational::from(1),
        }
    }

    pub fn sqrt_frac(d: Integer) -> Result<Self> {
        if d < 2 {
            return Err(Error::construction("sqrt oracle needs an integer >= 2"));
        }
        if d.is_perfect_square() {
            return Err(Error::construction(
                "sqrt oracle needs a non-square integer",
            ));
        }
        Ok(ThetaOracle {
            kind: ThetaKind::SqrtFrac { d },
            scale: Rational::from(1),
        })
    }

    pub fn quad(a: Integer, b: Integer, c: Integer, plus: bool) -> Result<Self> {
        if a.cmp0() == std::cmp::Ordering::Equal {
            return Err(Error::construction("quadratic oracle needs a != 0"));
        }
        let (a, b, c, plus) = if a.cmp0() == std::cmp::Ordering::Less {
            (-a, -b, -c, !plus)
        } else {
            (a, b, c, plus)
        };
        let disc = Integer::from(&b * &b) - Integer::from(4) * Integer::from(&a * &c);
        if disc.cmp0() != std::cmp::Ordering::Greater {
            return Err(Error::construction(
                "quadratic oracle needs two distinct real roots",
            ));
        }
        if disc.is_perfect_square() {
            return Err(Error::construction(
                "quadratic oracle discriminant is a perfect square; the root is rational",
            ));
        }
        Ok(ThetaOracle {
            kind: ThetaKind::Quad { a, b, c, plus },
            scale: Rational::from(1),
        })
    }

    pub fn log_ratio(z1: GaussRat, z2: GaussRat) -> Result<Self> {
        if z1.is_zero() {
            return Err(Error::construction("log-ratio oracle needs z1 != 0"));
        }
        if z2.is_zero() || z2 == GaussRat::one() {
            return Err(Error::construction(
                "log-ratio oracle needs z2 outside {0, 1}",
            ));
        }
        Ok(ThetaOracle {
            kind: ThetaKind::LogRatio { z1, z2 },
            scale: Rational::from(1),
        })
    }

    pub fn literal(value: Rational) -> Self {
        ThetaOracle {
            kind: ThetaKind::Literal { value },
            scale: Rational::from(1),
        }
    }

    pub fn quotients(rule: QuotRule) -> Result<Self> {
        if let QuotRule::List(v) = &rule {
            if v.len() < 2 {
                return Err(Error::construction(
                    "quotient list needs at least two entries",
                ));
            }
            if v[0].cmp0() == std::cmp::Ordering::Less {
                return Err(Error::construction("quotient a_0 must be >= 0"));
            }
            for a in &v[1..] {
                if *a < 1 {
                    return Err(Error::construction("quotients a_m (m >= 1) must be >= 1"));
                }
            }
        }
        Ok(ThetaOracle {
            kind: ThetaKind::Quotients { rule },
            scale: Rational::from(1),
        })
    }

    pub fn with_scale(mut self, scale: Rational) -> Result<Self> {
        if scale.cmp0() == std::cmp::Ordering::Equal {
            return Err(Error::construction("oracle scale must be nonzero"));
        }
        self.scale = Rational::from(&self.scale * &scale);
        Ok(self)
    }

    pub fn kind(&self) -> &ThetaKind {
        &self.kind
    }

    pub fn scale_factor(&self) -> &Rational {
        &self.scale
    }

    /// `Some` exactly when the described value is known rational.
    pub fn exact_rational(&self) -> Option<Rational> {
        match &self.kind {
            ThetaKind::Literal { value } => Some(Rational::from(value * &self.scale)),
            _ => None,
        }
    }

    /// True when the construction itself certifies irrationality.
    pub fn certified_irrational(&self) -> bool {
        match &self.kind {
            ThetaKind::Golden | ThetaKind::SqrtFrac { .. } | ThetaKind::Quad { .. } => true,
            ThetaKind::Quotients { rule } => !matches!(rule, QuotRule::List(_)),
            ThetaKind::LogRatio { .. } | ThetaKind::Literal { .. } => false,
        }
    }

    /// Enclose the value in an interval of radius at most `2^(1-bits)`.
    pub fn refine(&self, bits: u32) -> Result<BallReal> {
        let bits = bits.max(16);
        let mut work = bits + 32;
        let limit = (bits + 32).saturating_mul(1 << 12);
        loop {
            if let Some(ball) = self.kind_ball(work)? {
                let scaled = if self.scale == 1u32 {
                    ball
                } else {
                    ball.mul_rational(&self.scale)
                };
                if scaled.rad_le_pow2(1 - bits as i32) {
                    return Ok(scaled);
                }
            }
            if work >= limit {
                return Err(Error::PrecisionExhausted {
                    bits: work,
                    context: format!("refining oracle {self}"),
                });
            }
            work = work.saturating_mul(2).min(limit);
        }
    }

    /// One refinement pass at the given working precision. `Ok(None)`
    /// means the enclosure was too wide to finish and the caller should
    /// retry wider; errors are permanent.
    fn kind_ball(&self, work: u32) -> Result<Option<BallReal>> {
        match &self.kind {
            ThetaKind::Golden => {
                let five = BallReal::from_i64(5, work);
                let r = five.sqrt()?;
                Ok(Some(
                    r.sub(&BallReal::one(work)).mul_pow2(-1),
                ))
            }
            ThetaKind::SqrtFrac { d } => {
                let k = d.clone().sqrt();
                let r = BallReal::from_integer(d, work).sqrt()?;
                Ok(Some(r.sub(&BallReal::from_integer(&k, work))))
            }
            ThetaKind::Quad { a, b, c, plus } => {
                let disc = Integer::from(b * b) - Integer::from(4) * Integer::from(a * c);
                let root = BallReal::from_integer(&disc, work).sqrt()?;
                let signed = if *plus { root } else { root.neg() };
                let num = signed.sub(&BallReal::from_integer(b, work));
                let den = Rational::from((Integer::from(1), Integer::from(2) * a.clone()));
                Ok(Some(num.mul_rational(&den)))
            }
            ThetaKind::LogRatio { z1, z2 } => {
                let l1 = ln_ball(z1, work)?;
                let l2 = ln_ball(z2, work)?;
                match l1.div(&l2) {
                    Ok(q) => Ok(Some(q.re)),
                    // |log z2|^2 straddles zero only for lack of precision,
                    // because z2 outside {0, 1} has a nonzero principal log.
                    Err(Error::Domain(_)) => Ok(None),
                    Err(e) => Err(e),
                }
            }
            ThetaKind::Literal { value } => Ok(Some(BallReal::from_rational(value, work))),
            ThetaKind::Quotients { rule } => quotient_ball(rule, work).map(Some),
        }
    }

    /// Oracle for the reciprocal 1/theta, exact at the description level.
    pub fn reciprocal(&self) -> Result<ThetaOracle> {
        match &self.kind {
            ThetaKind::Literal { value } => {
                let v = Rational::from(value * &self.scale);
                if v.cmp0() == std::cmp::Ordering::Equal {
                    return Err(Error::domain("reciprocal of zero"));
                }
                Ok(ThetaOracle::literal(v.recip()))
            }
            ThetaKind::Golden => ThetaOracle::quad(
                Integer::from(1),
                Integer::from(1),
                Integer::from(-1),
                true,
            )?
            .with_scale(self.scale.clone())?
            .reciprocal(),
            ThetaKind::SqrtFrac { d } => {
                let k = d.clone().sqrt();
                let c = Integer::from(&k * &k) - d.clone();
                ThetaOracle::quad(Integer::from(1), Integer::from(2) * k, c, true)?
                    .with_scale(self.scale.clone())?
                    .reciprocal()
            }
            ThetaKind::Quad { a, b, c, plus } => {
                // Fold the scale s = p/q into the coefficients: if x solves
                // a x^2 + b x + c = 0 then y = s x solves
                // (a q^2) y^2 + (b p q) y + (c p^2) = 0, with the root
                // branch flipping when s < 0.
                let p = self.scale.numer().clone();
                let q = self.scale.denom().clone();
                let fa = Integer::from(a * &q) * &q;
                let fb = Integer::from(b * &p) * &q;
                let fc = Integer::from(c * &p) * &p;
                let fplus = if p.cmp0() == std::cmp::Ordering::Less {
                    !*plus
                } else {
                    *plus
                };
                // y = 1/x turns (fa, fb, fc) into (fc, fb, fa); fc != 0
                // because a zero root would force a perfect-square
                // discriminant, which construction rejects.
                let folded = ThetaOracle::quad(fa.clone(), fb.clone(), fc.clone(), fplus)?;
                let plus_cand = ThetaOracle::quad(fc.clone(), fb.clone(), fa.clone(), true)?;
                let minus_cand = ThetaOracle::quad(fc, fb, fa, false)?;
                select_matching_branch(&folded, plus_cand, minus_cand)
            }
            ThetaKind::LogRatio { z1, z2 } => {
                let one = Rational::from(1);
                if z1.abs_sq() != one || z2.abs_sq() != one {
                    return Err(Error::unsupported(
                        "log-ratio reciprocal needs both points on the unit circle",
                    ));
                }
                ThetaOracle::log_ratio(z2.clone(), z1.clone())?
                    .with_scale(self.scale.clone().recip())
            }
            ThetaKind::Quotients { rule } => {
                if self.scale != 1u32 {
                    return Err(Error::unsupported(
                        "reciprocal of a scaled quotient oracle",
                    ));
                }
                match rule {
                    QuotRule::List(v) => {
                        if v[0].cmp0() == std::cmp::Ordering::Equal {
                            if v.len() < 3 {
                                return Err(Error::construction(
                                    "quotient list too short to invert",
                                ));
                            }
                            ThetaOracle::quotients(QuotRule::List(v[1..].to_vec()))
                        } else {
                            let mut w = Vec::with_capacity(v.len() + 1);
                            w.push(Integer::new());
                            w.extend(v.iter().cloned());
                            ThetaOracle::quotients(QuotRule::List(w))
                        }
                    }
                    _ => Err(Error::unsupported(
                        "reciprocal of a rule-generated quotient oracle",
                    )),
                }
            }
        }
    }

    /// Parse the oracle mini-language:
    /// `golden`, `sqrt:D`, `quad:a,b,c:+|-`,
    /// `logratio:re1,im1,re2,im2`, `dec:DIGITS`, `rat:p/q`,
    /// `quot:lin`, `quot:pow2`, `quot:list:a1,a2,...`,
    /// `quot:full:a0,a1,...`; any form may end with `*p/q` to scale.
    pub fn parse(s: &str) -> Result<ThetaOracle> {
        let s = s.trim();
        let (body, scale) = match s.rsplit_once('*') {
            Some((b, sc)) => {
                let scale: Rational = sc.trim().parse().map_err(|_| {
                    Error::construction(format!("bad oracle scale: {sc:?}"))
                })?;
                (b.trim(), scale)
            }
            None => (s, Rational::from(1)),
        };
        let oracle = if body == "golden" {
            ThetaOracle::golden()
        } else if let Some(rest) = body.strip_prefix("sqrt:") {
            let d: Integer = rest
                .trim()
                .parse()
                .map_err(|_| Error::construction(format!("bad sqrt argument: {rest:?}")))?;
            ThetaOracle::sqrt_frac(d)?
        } else if let Some(rest) = body.strip_prefix("quad:") {
            let (coefs, branch) = rest
                .rsplit_once(':')
                .ok_or_else(|| Error::construction("quad oracle needs a trailing :+ or :-"))?;
            let plus = match branch.trim() {
                "+" => true,
                "-" => false,
                other => {
                    return Err(Error::construction(format!(
                        "quad branch must be + or -, got {other:?}"
                    )))
                }
            };
            let ints = parse_int_list(coefs)?;
            if ints.len() != 3 {
                return Err(Error::construction("quad oracle needs exactly a,b,c"));
            }
            ThetaOracle::quad(ints[0].clone(), ints[1].clone(), ints[2].clone(), plus)?
        } else if let Some(rest) = body.strip_prefix("logratio:") {
            let rats = parse_rat_list(rest)?;
            if rats.len() != 4 {
                return Err(Error::construction(
                    "log-ratio oracle needs exactly re1,im1,re2,im2",
                ));
            }
            ThetaOracle::log_ratio(
                GaussRat::new(rats[0].clone(), rats[1].clone()),
                GaussRat::new(rats[2].clone(), rats[3].clone()),
            )?
        } else if let Some(rest) = body.strip_prefix("dec:") {
            ThetaOracle::literal(decimal_to_rational(rest.trim())?)
        } else if let Some(rest) = body.strip_prefix("rat:") {
            let v: Rational = rest
                .trim()
                .parse()
                .map_err(|_| Error::construction(format!("bad rational: {rest:?}")))?;
            ThetaOracle::literal(v)
        } else if body == "quot:lin" {
            ThetaOracle::quotients(QuotRule::Linear)?
        } else if body == "quot:pow2" {
            ThetaOracle::quotients(QuotRule::Pow2)?
        } else if let Some(rest) = body.strip_prefix("quot:list:") {
            let mut v = vec![Integer::new()];
            v.extend(parse_int_list(rest)?);
            ThetaOracle::quotients(QuotRule::List(v))?
        } else if let Some(rest) = body.strip_prefix("quot:full:") {
            ThetaOracle::quotients(QuotRule::List(parse_int_list(rest)?))?
        } else {
            return Err(Error::construction(format!(
                "unrecognized oracle description: {body:?}"
            )));
        };
        if scale == 1u32 {
            Ok(oracle)
        } else {
            oracle.with_scale(scale)
        }
    }
}

// Display emits exactly the parse syntax so configs round-trip.
impl fmt::Display for ThetaOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ThetaKind::Golden => write!(f, "golden")?,
            ThetaKind::SqrtFrac { d } => write!(f, "sqrt:{d}")?,
            ThetaKind::Quad { a, b, c, plus } => {
                write!(f, "quad:{a},{b},{c}:{}", if *plus { "+" } else { "-" })?
            }
            ThetaKind::LogRatio { z1, z2 } => {
                write!(f, "logratio:{},{},{},{}", z1.re, z1.im, z2.re, z2.im)?
            }
            ThetaKind::Literal { value } => write!(f, "rat:{value}")?,
            ThetaKind::Quotients { rule } => match rule {
                QuotRule::Linear => write!(f, "quot:lin")?,
                QuotRule::Pow2 => write!(f, "quot:pow2")?,
                QuotRule::List(v) => {
                    let (label, items) = if v[0].cmp0() == std::cmp::Ordering::Equal {
                        ("quot:list:", &v[1..])
                    } else {
                        ("quot:full:", &v[..])
                    };
                    write!(f, "{label}")?;
                    for (i, a) in items.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                }
            },
        }
        if self.scale != 1u32 {
            write!(f, "*{}", self.scale)?;
        }
        Ok(())
    }
}

fn parse_int_list(s: &str) -> Result<Vec<Integer>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<Integer>()
                .map_err(|_| Error::construction(format!("bad integer: {t:?}")))
        })
        .collect()
}

fn parse_rat_list(s: &str) -> Result<Vec<Rational>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<Rational>()
                .map_err(|_| Error::construction(format!("bad rational: {t:?}")))
        })
        .collect()
}

/// Decimal literal (optional sign, optional fractional part) to an exact
/// rational.
pub fn decimal_to_rational(s: &str) -> Result<Rational> {
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match rest.split_once('.') {
        Some((a, b)) => (a, b),
        None => (rest, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::construction(format!("bad decimal literal: {s:?}")));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(Error::construction(format!("bad decimal literal: {s:?}")));
    }
    let digits = format!("{int_part}{frac_part}");
    let num: Integer = if digits.is_empty() {
        Integer::new()
    } else {
        digits
            .parse()
            .map_err(|_| Error::construction(format!("bad decimal literal: {s:?}")))?
    };
    let den = Integer::from(10).pow_u32(frac_part.len() as u32);
    let mut v = Rational::from((num, den));
    if neg {
        v = -v;
    }
    Ok(v)
}

trait PowU32 {
    fn pow_u32(self, e: u32) -> Integer;
}

impl PowU32 for Integer {
    fn pow_u32(self, e: u32) -> Integer {
        use rug::ops::Pow;
        self.pow(e)
    }
}

/// Principal complex logarithm of an exact complex rational, as a ball.
fn ln_ball(z: &GaussRat, prec: u32) -> Result<BallComplex> {
    if z.is_zero() {
        return Err(Error::domain("log of zero"));
    }
    let abs2 = z.abs_sq();
    let re = BallReal::from_rational(&abs2, prec).ln()?.mul_pow2(-1);
    let im = arg_ball(z, prec);
    Ok(BallComplex::new(re, im))
}

/// Principal argument of an exact complex rational via exact sign analysis
/// of the components; the only approximate steps are atan and pi.
fn arg_ball(z: &GaussRat, prec: u32) -> BallReal {
    use std::cmp::Ordering::*;
    let sre = z.re.cmp0();
    let sim = z.im.cmp0();
    match (sre, sim) {
        (Greater, Equal) => BallReal::zero(prec),
        (Less, Equal) => BallReal::pi(prec),
        (Equal, Greater) => BallReal::pi(prec).mul_pow2(-1),
        (Equal, Less) => BallReal::pi(prec).mul_pow2(-1).neg(),
        (Equal, Equal) => unreachable!("argument of zero"),
        _ => {
            let t = Rational::from(&z.im / &z.re);
            let at = BallReal::from_rational(&t, prec).atan();
            match (sre, sim) {
                (Greater, _) => at,
                (Less, Greater) => at.add(&BallReal::pi(prec)),
                (Less, Less) => at.sub(&BallReal::pi(prec)),
                _ => unreachable!(),
            }
        }
    }
}

/// Enclosure of a quotient-defined number from two consecutive convergents
/// whose denominators certify the requested width.
fn quotient_ball(rule: &QuotRule, work: u32) -> Result<BallReal> {
    let target = Integer::from(1) << (work + 2);
    let mut p_prev = Integer::from(1);
    let mut q_prev = Integer::new();
    let a0 = rule
        .get(0)
        .ok_or_else(|| Error::construction("empty quotient sequence"))?;
    let mut p = a0;
    let mut q = Integer::from(1);
    let mut m = 1usize;
    loop {
        let a = match rule.get(m) {
            Some(a) => a,
            None => {
                return Err(Error::PrecisionExhausted {
                    bits: work,
                    context: format!(
                        "quotient list exhausted after {m} terms; enclosure wider than requested"
                    ),
                })
            }
        };
        let p_next = Integer::from(&a * &p) + &p_prev;
        let q_next = Integer::from(&a * &q) + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        if Integer::from(&q * &q_prev) >= target {
            let r1 = Rational::from((p_prev.clone(), q_prev.clone()));
            let r2 = Rational::from((p.clone(), q.clone()));
            let (lo_r, hi_r) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let lo = rug::Float::with_val_round(work, &lo_r, rug::float::Round::Down).0;
            let hi = rug::Float::with_val_round(work, &hi_r, rug::float::Round::Up).0;
            return Ok(BallReal::from_endpoints(lo, hi));
        }
        m += 1;
        if m > 1_000_000 {
            return Err(Error::PrecisionExhausted {
                bits: work,
                context: "quotient sequence failed to converge".to_string(),
            });
        }
    }
}

/// Pick whichever candidate oracle matches the reciprocal of `folded`,
/// requiring the other candidate to be certifiably different.
fn select_matching_branch(
    folded: &ThetaOracle,
    plus_cand: ThetaOracle,
    minus_cand: ThetaOracle,
) -> Result<ThetaOracle> {
    let mut bits = 128u32;
    while bits <= 1 << 14 {
        let v = folded.refine(bits + 8)?;
        if let Ok(target) = v.recip() {
            let bp = plus_cand.refine(bits)?;
            let bm = minus_cand.refine(bits)?;
            let plus_hits = overlaps(&target, &bp);
            let minus_hits = overlaps(&target, &bm);
            match (plus_hits, minus_hits) {
                (true, false) => return Ok(plus_cand),
                (false, true) => return Ok(minus_cand),
                _ => {}
            }
        }
        bits *= 2;
    }
    Err(Error::PrecisionExhausted {
        bits: 1 << 14,
        context: "selecting reciprocal branch".to_string(),
    })
}

fn overlaps(a: &BallReal, b: &BallReal) -> bool {
    !(a.hi() < b.lo() || b.hi() < a.lo())
}
