//! Exact complex rationals and the evaluation base type.

use crate::error::Error;
use crate::Result;
use rug::ops::Pow;
use rug::{Integer, Rational};
use std::fmt;

use super::{BallComplex, BallReal};

/// A complex number with exact rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussRat {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRat {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussRat { re, im }
    }

    pub fn from_rational(re: Rational) -> Self {
        GaussRat {
            re,
            im: Rational::new(),
        }
    }

    pub fn from_i64(re: i64) -> Self {
        GaussRat::from_rational(Rational::from(re))
    }

    pub fn zero() -> Self {
        GaussRat::from_i64(0)
    }

    pub fn one() -> Self {
        GaussRat::from_i64(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.cmp0() == std::cmp::Ordering::Equal && self.im.cmp0() == std::cmp::Ordering::Equal
    }

    pub fn is_real(&self) -> bool {
        self.im.cmp0() == std::cmp::Ordering::Equal
    }

    pub fn add(&self, other: &Self) -> Self {
        GaussRat {
            re: Rational::from(&self.re + &other.re),
            im: Rational::from(&self.im + &other.im),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        GaussRat {
            re: Rational::from(&self.re - &other.re),
            im: Rational::from(&self.im - &other.im),
        }
    }

    pub fn neg(&self) -> Self {
        GaussRat {
            re: Rational::from(-&self.re),
            im: Rational::from(-&self.im),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let re = Rational::from(&self.re * &other.re) - Rational::from(&self.im * &other.im);
        let im = Rational::from(&self.re * &other.im) + Rational::from(&self.im * &other.re);
        GaussRat { re, im }
    }

    pub fn conj(&self) -> Self {
        GaussRat {
            re: self.re.clone(),
            im: Rational::from(-&self.im),
        }
    }

    /// |z|^2 as an exact rational.
    pub fn abs_sq(&self) -> Rational {
        Rational::from(&self.re * &self.re) + Rational::from(&self.im * &self.im)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::domain("inverse of zero"));
        }
        let d = self.abs_sq();
        Ok(GaussRat {
            re: Rational::from(&self.re / &d),
            im: -Rational::from(&self.im / &d),
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow_i64(&self, n: i64) -> Result<Self> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = GaussRat::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            sq = sq.mul(&sq);
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        GaussRat {
            re: Rational::from(&self.re * r),
            im: Rational::from(&self.im * r),
        }
    }

    /// Enclose the exact value in a complex box at the given precision.
    pub fn to_balls(&self, prec: u32) -> BallComplex {
        BallComplex::new(
            BallReal::from_rational(&self.re, prec),
            BallReal::from_rational(&self.im, prec),
        )
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_real() {
            write!(f, "{}", self.re)
        } else if self.re.cmp0() == std::cmp::Ordering::Equal {
            write!(f, "{}i", self.im)
        } else {
            write!(f, "{}{}{}i", self.re, if self.im.cmp0() == std::cmp::Ordering::Less { "" } else { "+" }, self.im)
        }
    }
}

/// Evaluation base `b = modulus * unit` with `modulus` an exact rational
/// greater than 1 and `unit` an exact point on the unit circle. Keeping the
/// polar split exact lets |b|-dependent tail bounds stay rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Base {
    modulus: Rational,
    unit: Option<GaussRat>,
}

impl Base {
    /// Real base, |b| = b > 1 required.
    pub fn real(modulus: Rational) -> Result<Self> {
        if modulus <= 1u32 {
            return Err(Error::construction("base modulus must exceed 1"));
        }
        Ok(Base {
            modulus,
            unit: None,
        })
    }

    /// Complex base from modulus and a unit-circle point; |unit| = 1 is
    /// checked exactly.
    pub fn with_unit(modulus: Rational, unit: GaussRat) -> Result<Self> {
        if modulus <= 1u32 {
            return Err(Error::construction("base modulus must exceed 1"));
        }
        if unit.abs_sq() != 1u32 {
            return Err(Error::construction(
                "base direction must lie exactly on the unit circle",
            ));
        }
        if unit.is_real() {
            let one = Rational::from(1);
            if unit.re == one {
                return Ok(Base {
                    modulus,
                    unit: None,
                });
            }
        }
        Ok(Base {
            modulus,
            unit: Some(unit),
        })
    }

    /// Parse `M`, or `Me:RE,IM` where M, RE, IM are rationals and RE+IM*i
    /// must be a unit.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((m, rest)) = s.split_once("e:") {
            let modulus: Rational = m
                .trim()
                .parse()
                .map_err(|_| Error::construction(format!("bad base modulus: {m:?}")))?;
            let mut parts = rest.split(',');
            let re: Rational = parts
                .next()
                .ok_or_else(|| Error::construction("base direction needs re,im"))?
                .trim()
                .parse()
                .map_err(|_| Error::construction("bad base direction real part"))?;
            let im: Rational = parts
                .next()
                .ok_or_else(|| Error::construction("base direction needs re,im"))?
                .trim()
                .parse()
                .map_err(|_| Error::construction("bad base direction imaginary part"))?;
            if parts.next().is_some() {
                return Err(Error::construction("base direction takes exactly re,im"));
            }
            Base::with_unit(modulus, GaussRat::new(re, im))
        } else {
            let modulus: Rational = s
                .parse()
                .map_err(|_| Error::construction(format!("bad base: {s:?}")))?;
            Base::real(modulus)
        }
    }

    pub fn modulus(&self) -> &Rational {
        &self.modulus
    }

    pub fn unit(&self) -> Option<&GaussRat> {
        self.unit.as_ref()
    }

    pub fn is_real(&self) -> bool {
        self.unit.is_none()
    }

    /// The base as an exact complex rational.
    pub fn value(&self) -> GaussRat {
        match &self.unit {
            None => GaussRat::from_rational(self.modulus.clone()),
            Some(u) => u.scale(&self.modulus),
        }
    }

    /// 1/b as an exact complex rational.
    pub fn inv_value(&self) -> GaussRat {
        self.value().inv().expect("base is nonzero")
    }

    /// |b|^2 as an exact rational.
    pub fn abs_sq(&self) -> Rational {
        Rational::from(&self.modulus * &self.modulus)
    }

    /// |b|^k as an exact rational (k may be negative).
    pub fn abs_pow(&self, k: i64) -> Rational {
        if k >= 0 {
            Rational::from((&self.modulus).pow(k as u32))
        } else {
            Rational::from((&self.modulus).pow((-k) as u32))
                .recip()
        }
    }

    pub fn conj(&self) -> Self {
        Base {
            modulus: self.modulus.clone(),
            unit: self.unit.as_ref().map(|u| u.conj()),
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.unit {
            None => write!(f, "{}", self.modulus),
            Some(u) => write!(f, "{}e:{},{}", self.modulus, u.re, u.im),
        }
    }
}

/// Exact integer square root check used by quadratic-irrational guards.
pub fn is_perfect_square(n: &Integer) -> bool {
    n.cmp0() != std::cmp::Ordering::Less && n.is_perfect_square()
}
