//! Certified continued-fraction expansion driven by a refinable oracle.
//!
//! Indexing is zero-based: `a_0` is the floor of the value, convergents
//! satisfy `p_m = a_m p_{m-1} + p_{m-2}` with seeds `p_{-1} = 1, q_{-1} = 0`
//! and `p_{-2} = 0, q_{-2} = 1`. Two exact identities anchor the tests:
//! the determinant `p_m q_{m-1} - p_{m-1} q_m = (-1)^(m-1)` over the
//! integers, and the signed-error formula
//! `q_m theta - p_m = (-1)^m / (q_m theta_{m+1} + q_{m-1})`, where
//! `theta_{m+1}` is the complete quotient produced by the Gauss map.
//!
//! Every floor decision is certified on an interval; when a decision does
//! not resolve, the whole chain is recomputed at doubled precision, so a
//! value that behaves like a rational stalls with a precision report
//! instead of fabricating quotients.

use crate::error::Error;
use crate::numerics::theta::ThetaOracle;
use crate::numerics::{certified_compare, BallReal, Cmp, Prec};
use crate::Result;
use rug::{Integer, Rational};

/// A verified expansion prefix together with the interval data needed to
/// evaluate the anchoring identities.
#[derive(Clone, Debug)]
pub struct CfExpansion {
    /// Partial quotients `a_0 ..= a_depth`.
    pub quotients: Vec<Integer>,
    /// Convergents `(p_m, q_m)` for `m = 0 ..= depth`.
    pub convergents: Vec<(Integer, Integer)>,
    /// Complete quotients `theta_0 ..= theta_{depth+1}` as intervals.
    tails: Vec<BallReal>,
    /// The refined input value.
    pub theta: BallReal,
    /// Working precision at which the chain certified.
    pub bits_used: u32,
}

/// Expand the oracle's value to `depth + 1` certified partial quotients.
pub fn expand(oracle: &ThetaOracle, depth: usize, prec: Prec) -> Result<CfExpansion> {
    let mut bits = prec.start.max(16);
    loop {
        match try_chain(oracle, depth, bits)? {
            Some(exp) => return Ok(exp),
            None => {
                if bits >= prec.cap {
                    return Err(Error::PrecisionExhausted {
                        bits,
                        context: format!(
                            "continued-fraction expansion of {oracle} to depth {depth}; \
                             the value may be rational"
                        ),
                    });
                }
                bits = bits.saturating_mul(2).min(prec.cap);
            }
        }
    }
}

/// One full-chain attempt at fixed precision; `Ok(None)` asks the caller
/// to retry wider.
fn try_chain(oracle: &ThetaOracle, depth: usize, bits: u32) -> Result<Option<CfExpansion>> {
    let theta = oracle.refine(bits)?;
    let mut quotients = Vec::with_capacity(depth + 1);
    let mut convergents = Vec::with_capacity(depth + 1);
    let mut tails = Vec::with_capacity(depth + 2);
    let (mut p_prev2, mut q_prev2) = (Integer::new(), Integer::from(1));
    let (mut p_prev, mut q_prev) = (Integer::from(1), Integer::new());
    let mut t = theta.clone();
    tails.push(t.clone());
    for _ in 0..=depth {
        let a = match t.floor_certified() {
            Some(a) => a,
            None => return Ok(None),
        };
        let p = Integer::from(&a * &p_prev) + &p_prev2;
        let q = Integer::from(&a * &q_prev) + &q_prev2;
        let frac = t.sub(&BallReal::from_integer(&a, bits));
        let next = match frac.recip() {
            Ok(next) => next,
            Err(_) => return Ok(None),
        };
        quotients.push(a);
        convergents.push((p.clone(), q.clone()));
        p_prev2 = std::mem::replace(&mut p_prev, p);
        q_prev2 = std::mem::replace(&mut q_prev, q);
        t = next;
        tails.push(t.clone());
    }
    Ok(Some(CfExpansion {
        quotients,
        convergents,
        tails,
        theta,
        bits_used: bits,
    }))
}

impl CfExpansion {
    pub fn depth(&self) -> usize {
        self.quotients.len() - 1
    }

    /// Complete quotient `theta_m`, `0 <= m <= depth + 1`.
    pub fn tail(&self, m: usize) -> &BallReal {
        &self.tails[m]
    }

    /// Denominator `q_m`, with the seed `q_{-1} = 0` exposed at `m = -1`
    /// through [`CfExpansion::q_at`].
    pub fn q_at(&self, m: isize) -> Integer {
        if m < 0 {
            Integer::new()
        } else {
            self.convergents[m as usize].1.clone()
        }
    }

    /// Exact integer determinant check
    /// `p_m q_{m-1} - p_{m-1} q_m = (-1)^(m-1)` for all expanded `m`;
    /// returns the first failing index.
    pub fn determinant_violation(&self) -> Option<usize> {
        let (mut p_prev, mut q_prev) = (Integer::from(1), Integer::new());
        for (m, (p, q)) in self.convergents.iter().enumerate() {
            let det = Integer::from(p * &q_prev) - Integer::from(&p_prev * q);
            let expect = if m % 2 == 0 { -1i32 } else { 1i32 };
            if det != expect {
                return Some(m);
            }
            p_prev = p.clone();
            q_prev = q.clone();
        }
        None
    }

    /// Interval for the signed error `q_m theta - p_m`.
    pub fn signed_error(&self, m: usize) -> BallReal {
        let (p, q) = &self.convergents[m];
        self.theta.mul_integer(q).add_integer(&-p.clone())
    }

    /// Interval for the identity residual
    /// `q_m theta - p_m - (-1)^m / (q_m theta_{m+1} + q_{m-1})`;
    /// mathematically zero, so its width tracks the working precision.
    pub fn identity_residual(&self, m: usize) -> Result<BallReal> {
        let (_, q) = &self.convergents[m];
        let q_prev = self.q_at(m as isize - 1);
        let den = self.tails[m + 1]
            .mul_integer(q)
            .add_integer(&q_prev);
        let inv = den.recip()?;
        let signed = if m.is_multiple_of(2) { inv } else { inv.neg() };
        Ok(self.signed_error(m).sub(&signed))
    }

    /// Largest level `N` with `q_{N+1} <= bound`, if any.
    pub fn max_level_with_q_bound(&self, bound: &Integer) -> Option<usize> {
        let mut best = None;
        for n in 0..self.convergents.len().saturating_sub(1) {
            if &self.convergents[n + 1].1 <= bound {
                best = Some(n);
            }
        }
        best
    }
}

/// Interval for the distance `||M theta||` from `M theta` to the nearest
/// integer, together with that integer; refines until the rounding
/// decision certifies.
pub fn nearest_distance(
    oracle: &ThetaOracle,
    m: &Integer,
    prec: Prec,
) -> Result<(Integer, BallReal)> {
    let mut bits = prec.start.max(16);
    loop {
        let theta = oracle.refine(bits)?;
        if let Some(hit) = theta.mul_integer(m).nearest_int_distance() {
            return Ok(hit);
        }
        if bits >= prec.cap {
            return Err(Error::PrecisionExhausted {
                bits,
                context: format!("rounding {m} * theta to the nearest integer"),
            });
        }
        bits = bits.saturating_mul(2).min(prec.cap);
    }
}

/// Result of exhaustively checking that `q_N` minimizes `||M theta||`
/// among all `1 <= M < q_{N+1}`.
#[derive(Clone, Debug)]
pub struct BestApproxReport {
    pub level: usize,
    pub q_level: Integer,
    pub q_next: Integer,
    pub candidates_checked: u64,
    /// Smallest certified margin `||M theta|| - ||q_N theta||` over the
    /// scan, as a lower-bound float for reporting.
    pub min_margin: f64,
    pub bits_used: u32,
}

/// Certify the best-approximation property of `q_N` by exhaustive scan:
/// every `1 <= M < q_{N+1}` with `M != q_N` has `||M theta||` strictly
/// greater than `||q_N theta||`.
pub fn best_approximation_scan(
    oracle: &ThetaOracle,
    expansion: &CfExpansion,
    level: usize,
    prec: Prec,
) -> Result<BestApproxReport> {
    if level + 1 >= expansion.convergents.len() {
        return Err(Error::construction(
            "best-approximation scan needs the next convergent; expand deeper",
        ));
    }
    let q_level = expansion.convergents[level].1.clone();
    let q_next = expansion.convergents[level + 1].1.clone();
    let q_next_u64 = q_next
        .to_u64()
        .ok_or_else(|| Error::construction("scan bound exceeds u64"))?;
    let mut bits = prec.start.max(64);
    'retry: loop {
        let theta = oracle.refine(bits)?;
        let base = match theta.mul_integer(&q_level).nearest_int_distance() {
            Some((_, d)) => d,
            None => {
                bits = escalate_or_fail(bits, prec, "best-approximation base distance")?;
                continue 'retry;
            }
        };
        let mut min_margin = f64::INFINITY;
        let mut checked = 0u64;
        for m_val in 1..q_next_u64 {
            let m_int = Integer::from(m_val);
            if m_int == q_level {
                continue;
            }
            let d = match theta.mul_integer(&m_int).nearest_int_distance() {
                Some((_, d)) => d,
                None => {
                    bits = escalate_or_fail(bits, prec, "best-approximation candidate")?;
                    continue 'retry;
                }
            };
            match certified_compare(&base, &d) {
                Cmp::Less => {
                    let margin = d.lo().to_f64() - base.hi().to_f64();
                    if margin < min_margin {
                        min_margin = margin;
                    }
                    checked += 1;
                }
                Cmp::Greater => {
                    return Err(Error::StructureViolation {
                        level,
                        window: 0,
                        witness: m_val,
                    })
                }
                Cmp::Undecided => {
                    bits = escalate_or_fail(bits, prec, "best-approximation comparison")?;
                    continue 'retry;
                }
            }
        }
        return Ok(BestApproxReport {
            level,
            q_level,
            q_next,
            candidates_checked: checked,
            min_margin,
            bits_used: bits,
        });
    }
}

fn escalate_or_fail(bits: u32, prec: Prec, context: &str) -> Result<u32> {
    if bits >= prec.cap {
        return Err(Error::PrecisionExhausted {
            bits,
            context: context.to_string(),
        });
    }
    Ok(bits.saturating_mul(2).min(prec.cap))
}

/// Convenience: the value `q_m theta - p_m` as an exact rational when the
/// oracle is rational (used by degenerate-control tests).
pub fn rational_signed_error(theta: &Rational, p: &Integer, q: &Integer) -> Rational {
    Rational::from(theta * q) - p
}
