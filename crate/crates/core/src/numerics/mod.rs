//! Ball arithmetic over MPFR floats.
//!
//! A [`BallReal`] is a midpoint at the working precision plus a low-precision
//! radius that is always rounded up, so the interval
//! `[mid - rad, mid + rad]` contains the exact value through every
//! operation. Binary operations go through interval endpoints with directed
//! rounding; monotone elementary functions evaluate at the endpoints, and
//! the rest use a midpoint evaluation plus a Lipschitz inflation.

pub mod gauss;
pub mod theta;

use crate::error::Error;
use crate::Result;
use rug::float::{Constant, Round};
use rug::ops::NegAssign;
use rug::{Float, Integer, Rational};

/// Precision of the radius field: small, since the radius only needs a
/// couple of significant digits, but its rounding direction matters.
pub const RAD_PREC: u32 = 32;

/// Working-precision policy: where escalation starts and where it gives up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prec {
    pub start: u32,
    pub cap: u32,
}

impl Default for Prec {
    fn default() -> Self {
        Prec {
            start: 64,
            cap: 1 << 16,
        }
    }
}

impl Prec {
    pub fn new(start: u32, cap: u32) -> Self {
        Prec {
            start: start.max(16),
            cap: cap.max(start.max(16)),
        }
    }

    pub fn with_cap(cap: u32) -> Self {
        let d = Prec::default();
        Prec::new(d.start.min(cap), cap)
    }
}

/// Run `f` at doubling precision until it returns `Some`, or fail with
/// `PrecisionExhausted` once the cap has been tried.
pub fn escalate<T>(prec: Prec, context: &str, mut f: impl FnMut(u32) -> Option<T>) -> Result<T> {
    let mut bits = prec.start.max(16);
    loop {
        if let Some(v) = f(bits) {
            return Ok(v);
        }
        if bits >= prec.cap {
            return Err(Error::PrecisionExhausted {
                bits,
                context: context.to_string(),
            });
        }
        bits = bits.saturating_mul(2).min(prec.cap);
    }
}

/// Three-valued certified comparison outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Less,
    Greater,
    Undecided,
}

/// Real interval `[mid - rad, mid + rad]`; `rad` is nonnegative and every
/// operation keeps the exact image inside the output interval.
#[derive(Clone, Debug)]
pub struct BallReal {
    mid: Float,
    rad: Float,
}

fn rad_zero() -> Float {
    Float::with_val(RAD_PREC, 0)
}

fn rad_up(incomplete: Float) -> Float {
    // round an already-computed nonnegative float up into radius precision
    Float::with_val_round(RAD_PREC, &incomplete, Round::Up).0
}

impl BallReal {
    pub fn prec(&self) -> u32 {
        self.mid.prec()
    }

    pub fn mid(&self) -> &Float {
        &self.mid
    }

    pub fn rad(&self) -> &Float {
        &self.rad
    }

    /// Lower interval endpoint, rounded down.
    pub fn lo(&self) -> Float {
        Float::with_val_round(self.prec(), &self.mid - &self.rad, Round::Down).0
    }

    /// Upper interval endpoint, rounded up.
    pub fn hi(&self) -> Float {
        Float::with_val_round(self.prec(), &self.mid + &self.rad, Round::Up).0
    }

    /// Build the tightest representable ball around `[lo, hi]`.
    pub fn from_endpoints(lo: Float, hi: Float) -> Self {
        debug_assert!(lo <= hi, "from_endpoints: lo > hi");
        let prec = lo.prec().max(hi.prec());
        let mut mid = Float::with_val(prec, &lo + &hi);
        mid >>= 1;
        let up = Float::with_val_round(prec, &hi - &mid, Round::Up).0;
        let down = Float::with_val_round(prec, &mid - &lo, Round::Up).0;
        let rad = rad_up(up.max(&down));
        BallReal { mid, rad }
    }

    pub fn point(mid: Float) -> Self {
        BallReal {
            mid,
            rad: rad_zero(),
        }
    }

    pub fn from_integer(v: &Integer, prec: u32) -> Self {
        let lo = Float::with_val_round(prec, v, Round::Down).0;
        let hi = Float::with_val_round(prec, v, Round::Up).0;
        BallReal::from_endpoints(lo, hi)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        BallReal::from_integer(&Integer::from(v), prec)
    }

    pub fn from_rational(v: &Rational, prec: u32) -> Self {
        let lo = Float::with_val_round(prec, v, Round::Down).0;
        let hi = Float::with_val_round(prec, v, Round::Up).0;
        BallReal::from_endpoints(lo, hi)
    }

    pub fn zero(prec: u32) -> Self {
        BallReal::point(Float::with_val(prec, 0))
    }

    pub fn one(prec: u32) -> Self {
        BallReal::point(Float::with_val(prec, 1))
    }

    /// Ball containing pi.
    pub fn pi(prec: u32) -> Self {
        let lo = Float::with_val_round(prec, Constant::Pi, Round::Down).0;
        let hi = Float::with_val_round(prec, Constant::Pi, Round::Up).0;
        BallReal::from_endpoints(lo, hi)
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn contains_zero(&self) -> bool {
        self.lo() <= 0 && self.hi() >= 0
    }

    /// Certified sign: `Some(+1)`/`Some(-1)` only when zero is excluded.
    pub fn sign_certified(&self) -> Option<i32> {
        if self.lo() > 0 {
            Some(1)
        } else if self.hi() < 0 {
            Some(-1)
        } else {
            None
        }
    }

    /// Upper bound on |x| over the interval.
    pub fn abs_upper(&self) -> Float {
        let prec = self.prec();
        let l = Float::with_val_round(prec, self.lo().abs_ref(), Round::Up).0;
        let h = Float::with_val_round(prec, self.hi().abs_ref(), Round::Up).0;
        l.max(&h)
    }

    /// True when the radius is at most 2^exp.
    pub fn rad_le_pow2(&self, exp: i32) -> bool {
        if self.rad.is_zero() {
            return true;
        }
        let bound = Float::with_val(RAD_PREC, Float::i_exp(1, exp));
        self.rad <= bound
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec().max(other.prec());
        let lo = Float::with_val_round(prec, self.lo() + other.lo(), Round::Down).0;
        let hi = Float::with_val_round(prec, self.hi() + other.hi(), Round::Up).0;
        BallReal::from_endpoints(lo, hi)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let prec = self.prec().max(other.prec());
        let lo = Float::with_val_round(prec, self.lo() - other.hi(), Round::Down).0;
        let hi = Float::with_val_round(prec, self.hi() - other.lo(), Round::Up).0;
        BallReal::from_endpoints(lo, hi)
    }

    pub fn neg(&self) -> Self {
        let mut mid = self.mid.clone();
        mid.neg_assign();
        BallReal {
            mid,
            rad: self.rad.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec().max(other.prec());
        let (a, b) = (self.lo(), self.hi());
        let (c, d) = (other.lo(), other.hi());
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (x, y) in [(&a, &c), (&a, &d), (&b, &c), (&b, &d)] {
            let down = Float::with_val_round(prec, x * y, Round::Down).0;
            let up = Float::with_val_round(prec, x * y, Round::Up).0;
            lo = Some(match lo {
                None => down,
                Some(cur) => cur.min(&down),
            });
            hi = Some(match hi {
                None => up,
                Some(cur) => cur.max(&up),
            });
        }
        BallReal::from_endpoints(lo.unwrap(), hi.unwrap())
    }

    pub fn square(&self) -> Self {
        let prec = self.prec();
        let (a, b) = (self.lo(), self.hi());
        if a >= 0 {
            let lo = Float::with_val_round(prec, a.square_ref(), Round::Down).0;
            let hi = Float::with_val_round(prec, b.square_ref(), Round::Up).0;
            BallReal::from_endpoints(lo, hi)
        } else if b <= 0 {
            let lo = Float::with_val_round(prec, b.square_ref(), Round::Down).0;
            let hi = Float::with_val_round(prec, a.square_ref(), Round::Up).0;
            BallReal::from_endpoints(lo, hi)
        } else {
            let ha = Float::with_val_round(prec, a.square_ref(), Round::Up).0;
            let hb = Float::with_val_round(prec, b.square_ref(), Round::Up).0;
            BallReal::from_endpoints(Float::with_val(prec, 0), ha.max(&hb))
        }
    }

    /// Reciprocal; errors when the interval contains zero.
    pub fn recip(&self) -> Result<Self> {
        let prec = self.prec();
        let (a, b) = (self.lo(), self.hi());
        if a <= 0 && b >= 0 {
            return Err(Error::domain("reciprocal of interval containing zero"));
        }
        let lo = Float::with_val_round(prec, b.recip_ref(), Round::Down).0;
        let hi = Float::with_val_round(prec, a.recip_ref(), Round::Up).0;
        Ok(BallReal::from_endpoints(lo, hi))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn abs(&self) -> Self {
        let (a, b) = (self.lo(), self.hi());
        let prec = self.prec();
        if a >= 0 {
            self.clone()
        } else if b <= 0 {
            self.neg()
        } else {
            let na = Float::with_val_round(prec, a.abs_ref(), Round::Up).0;
            BallReal::from_endpoints(Float::with_val(prec, 0), na.max(&b))
        }
    }

    /// Exact scaling by 2^k.
    pub fn mul_pow2(&self, k: i32) -> Self {
        let mut mid = self.mid.clone();
        let mut rad = self.rad.clone();
        if k >= 0 {
            mid <<= k as u32;
            rad <<= k as u32;
        } else {
            mid >>= (-k) as u32;
            rad >>= (-k) as u32;
        }
        BallReal { mid, rad }
    }

    pub fn add_rational(&self, r: &Rational) -> Self {
        let prec = self.prec();
        let lo = Float::with_val_round(prec, self.lo() + r, Round::Down).0;
        let hi = Float::with_val_round(prec, self.hi() + r, Round::Up).0;
        BallReal::from_endpoints(lo, hi)
    }

    pub fn add_integer(&self, k: &Integer) -> Self {
        let prec = self.prec();
        let lo = Float::with_val_round(prec, self.lo() + k, Round::Down).0;
        let hi = Float::with_val_round(prec, self.hi() + k, Round::Up).0;
        BallReal::from_endpoints(lo, hi)
    }

    pub fn mul_rational(&self, r: &Rational) -> Self {
        let prec = self.prec();
        let (a, b) = (self.lo(), self.hi());
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for x in [&a, &b] {
            let down = Float::with_val_round(prec, x * r, Round::Down).0;
            let up = Float::with_val_round(prec, x * r, Round::Up).0;
            lo = Some(match lo {
                None => down,
                Some(cur) => cur.min(&down),
            });
            hi = Some(match hi {
                None => up,
                Some(cur) => cur.max(&up),
            });
        }
        BallReal::from_endpoints(lo.unwrap(), hi.unwrap())
    }

    pub fn mul_integer(&self, k: &Integer) -> Self {
        self.mul_rational(&Rational::from(k))
    }

    /// Monotone increasing map applied to both endpoints with directed
    /// rounding; `f` must be mathematically nondecreasing.
    fn monotone(&self, f: impl Fn(&Float, Round) -> Float) -> Self {
        let lo = f(&self.lo(), Round::Down);
        let hi = f(&self.hi(), Round::Up);
        BallReal::from_endpoints(lo, hi)
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.hi() < 0 {
            return Err(Error::domain("sqrt of negative interval"));
        }
        let prec = self.prec();
        let mut lo = self.lo();
        if lo < 0 {
            lo = Float::with_val(prec, 0);
        }
        let l = Float::with_val_round(prec, lo.sqrt_ref(), Round::Down).0;
        let h = Float::with_val_round(prec, self.hi().sqrt_ref(), Round::Up).0;
        Ok(BallReal::from_endpoints(l, h))
    }

    pub fn exp(&self) -> Self {
        let prec = self.prec();
        self.monotone(|x, r| Float::with_val_round(prec, x.exp_ref(), r).0)
    }

    pub fn ln(&self) -> Result<Self> {
        if self.lo() <= 0 {
            return Err(Error::domain("log of interval not strictly positive"));
        }
        let prec = self.prec();
        Ok(self.monotone(|x, r| Float::with_val_round(prec, x.ln_ref(), r).0))
    }

    pub fn atan(&self) -> Self {
        let prec = self.prec();
        self.monotone(|x, r| Float::with_val_round(prec, x.atan_ref(), r).0)
    }

    /// Midpoint evaluation inflated by the radius times a Lipschitz
    /// constant of 1 plus one output ulp (sound for sin and cos).
    fn lipschitz1(&self, f: impl Fn(&Float) -> Float) -> Self {
        let mid = f(&self.mid);
        let ulp = match mid.get_exp() {
            Some(e) => Float::with_val(RAD_PREC, Float::i_exp(1, e - mid.prec() as i32 + 1)),
            None => Float::with_val(RAD_PREC, Float::i_exp(1, -(mid.prec() as i32))),
        };
        let rad = rad_up(Float::with_val_round(RAD_PREC, &self.rad + &ulp, Round::Up).0);
        BallReal { mid, rad }
    }

    pub fn sin(&self) -> Self {
        let prec = self.prec();
        self.lipschitz1(|x| Float::with_val(prec, x.sin_ref()))
    }

    pub fn cos(&self) -> Self {
        let prec = self.prec();
        self.lipschitz1(|x| Float::with_val(prec, x.cos_ref()))
    }

    /// Floor, certified: `Some` only when both endpoints share their floor.
    pub fn floor_certified(&self) -> Option<Integer> {
        let fl = float_floor(&self.lo());
        let fh = float_floor(&self.hi());
        if fl == fh {
            Some(fl)
        } else {
            None
        }
    }

    /// Fractional part via a certified floor.
    pub fn frac_certified(&self) -> Option<BallReal> {
        let k = self.floor_certified()?;
        let prec = self.prec();
        let lo = Float::with_val_round(prec, self.lo() - &k, Round::Down).0;
        let hi = Float::with_val_round(prec, self.hi() - &k, Round::Up).0;
        Some(BallReal::from_endpoints(lo, hi))
    }

    /// Nearest integer and the distance ball ||x|| to it; the integer is
    /// certified only when the shifted floor is.
    pub fn nearest_int_distance(&self) -> Option<(Integer, BallReal)> {
        let prec = self.prec();
        let half = BallReal::from_rational(&Rational::from((1, 2)), prec);
        let k = self.add(&half).floor_certified()?;
        let d = self.sub(&BallReal::from_integer(&k, prec)).abs();
        Some((k, d))
    }

    /// Midpoint as f64 (reporting only; carries no certification).
    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn rad_f64(&self) -> f64 {
        self.rad.to_f64()
    }

    /// Decimal digits certified by the radius: the largest d with
    /// rad <= 10^-d / 2, clamped to the requested maximum.
    pub fn certified_decimals(&self, max_digits: usize) -> usize {
        if self.rad.is_zero() {
            return max_digits;
        }
        let mut d = 0usize;
        let mut bound = Float::with_val(RAD_PREC, Float::i_exp(1, -1));
        while d < max_digits {
            if self.rad <= bound {
                d += 1;
                bound = Float::with_val_round(RAD_PREC, &bound / 10u32, Round::Down).0;
            } else {
                break;
            }
        }
        d
    }
}

fn float_floor(x: &Float) -> Integer {
    let f = Float::with_val(x.prec(), x.floor_ref());
    f.to_integer()
        .expect("floor of a finite float is an integer")
}

/// Certified three-valued comparison: decided only on disjoint intervals.
pub fn certified_compare(a: &BallReal, b: &BallReal) -> Cmp {
    if a.hi() < b.lo() {
        Cmp::Less
    } else if b.hi() < a.lo() {
        Cmp::Greater
    } else {
        Cmp::Undecided
    }
}

/// Complex interval as a pair of real balls (a box in the plane).
#[derive(Clone, Debug)]
pub struct BallComplex {
    pub re: BallReal,
    pub im: BallReal,
}

impl BallComplex {
    pub fn new(re: BallReal, im: BallReal) -> Self {
        BallComplex { re, im }
    }

    pub fn from_real(re: BallReal) -> Self {
        let prec = re.prec();
        BallComplex {
            re,
            im: BallReal::zero(prec),
        }
    }

    pub fn zero(prec: u32) -> Self {
        BallComplex::from_real(BallReal::zero(prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn add(&self, other: &Self) -> Self {
        BallComplex {
            re: self.re.add(&other.re),
            im: self.im.add(&other.im),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        BallComplex {
            re: self.re.sub(&other.re),
            im: self.im.sub(&other.im),
        }
    }

    pub fn neg(&self) -> Self {
        BallComplex {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let re = self.re.mul(&other.re).sub(&self.im.mul(&other.im));
        let im = self.re.mul(&other.im).add(&self.im.mul(&other.re));
        BallComplex { re, im }
    }

    pub fn conj(&self) -> Self {
        BallComplex {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn abs_sq(&self) -> BallReal {
        self.re.square().add(&self.im.square())
    }

    pub fn abs(&self) -> Result<BallReal> {
        self.abs_sq().sqrt()
    }

    pub fn recip(&self) -> Result<Self> {
        let d = self.abs_sq();
        let inv = d.recip()?;
        Ok(BallComplex {
            re: self.re.mul(&inv),
            im: self.im.neg().mul(&inv),
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn pow_u32(&self, mut n: u32) -> Self {
        let prec = self.prec();
        let mut acc = BallComplex::from_real(BallReal::one(prec));
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    /// Upper bound on the distance between the two boxes' contents.
    pub fn max_abs_diff_upper(&self, other: &Self) -> Float {
        let d = self.sub(other);
        d.abs()
            .unwrap_or_else(|_| BallReal::zero(self.prec()))
            .hi()
    }
}
