//! Exact rationals and ħ-adically truncated power series.
//!
//! Every coefficient in the crate is a [`Series`]: a polynomial in ħ with
//! exact rational coefficients, reduced modulo ħ^{N+1}. The truncation order
//! `N` is chosen once per run and carried by every value so that mixing two
//! runs is detected instead of silently re-truncated.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 6;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    s.trim()
        .parse::<Rational>()
        .map_err(|_| Error::Schema(format!("not a rational number: {s:?}")))
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// A truncated formal power series Σ_{n ≤ N} aₙ ħⁿ.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Series {
    coeffs: Vec<Rational>,
}

impl Series {
    pub fn zero(order: usize) -> Self {
        Series {
            coeffs: vec![Rational::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(order, Rational::one())
    }

    pub fn constant(order: usize, c: Rational) -> Self {
        Self::monomial(order, 0, c)
    }

    /// `c ħ^power`; vanishes when `power > order`.
    pub fn monomial(order: usize, power: usize, c: Rational) -> Self {
        let mut s = Self::zero(order);
        if power <= order {
            s.coeffs[power] = c;
        }
        s
    }

    pub fn hbar(order: usize) -> Self {
        Self::monomial(order, 1, Rational::one())
    }

    /// The truncation order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        Series { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &Rational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub(crate) fn coeff_mut(&mut self, n: usize) -> &mut Rational {
        &mut self.coeffs[n]
    }

    /// Nonzero coefficients as (power, value).
    pub(crate) fn sparse(&self) -> Vec<(usize, Rational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(n, c)| (n, c.clone()))
            .collect()
    }

    pub fn set_coeff(&mut self, n: usize, c: Rational) {
        if n <= self.order() {
            self.coeffs[n] = c;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Lowest ħ-power with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn check(&self, other: &Series) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::ConfigMismatch(self.order(), other.order()));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Series) -> Result<Series> {
        self.check(other)?;
        Ok(Series {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Series) -> Result<Series> {
        self.check(other)?;
        Ok(Series {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Cauchy product truncated at ħ^N.
    pub fn try_mul(&self, other: &Series) -> Result<Series> {
        self.check(other)?;
        let n = self.order();
        let mut out = Self::zero(n);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[i + j] += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Exact inverse modulo ħ^{N+1}.
    pub fn invert(&self) -> Result<Series> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(Error::NotInvertible);
        }
        let n = self.order();
        let inv0 = a0.recip();
        let mut out = Self::zero(n);
        out.coeffs[0] = inv0.clone();
        for k in 1..=n {
            let mut acc = Rational::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &out.coeffs[k - j];
                }
            }
            out.coeffs[k] = -(acc * &inv0);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplies by ħ^k.
    pub fn shift(&self, k: usize) -> Series {
        let n = self.order();
        let mut out = Self::zero(n);
        for i in 0..=n {
            if i + k <= n {
                out.coeffs[i + k] = self.coeffs[i].clone();
            }
        }
        out
    }

    /// Keeps coefficients up to and including ħ^k.
    pub fn truncated(&self, k: usize) -> Series {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut().skip(k + 1) {
            *c = Rational::zero();
        }
        out
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        self.try_add(rhs).expect("series order mismatch")
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        self.try_sub(rhs).expect("series order mismatch")
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        self.try_mul(rhs).expect("series order mismatch")
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl AddAssign<&Series> for Series {
    fn add_assign(&mut self, rhs: &Series) {
        assert_eq!(self.order(), rhs.order(), "series order mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if !b.is_zero() {
                *a += b;
            }
        }
    }
}

impl SubAssign<&Series> for Series {
    fn sub_assign(&mut self, rhs: &Series) {
        assert_eq!(self.order(), rhs.order(), "series order mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if !b.is_zero() {
                *a -= b;
            }
        }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match n {
                0 => write!(f, "{a}")?,
                _ if a.is_one() => write!(f, "ħ^{n}")?,
                _ => write!(f, "{a}·ħ^{n}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Sign ε(σ) defined by γ₁∧…∧γₖ = ε(σ) γ_{σ(1)}∧…∧γ_{σ(k)} for factors of
/// the given shifted degrees. `sigma[a]` is the original index placed at
/// position `a`.
pub fn koszul_sign(sigma: &[usize], degrees: &[i32]) -> Result<i32> {
    if sigma.len() != degrees.len() {
        return Err(Error::ConfigMismatch(sigma.len(), degrees.len()));
    }
    let mut seen = vec![false; sigma.len()];
    for &s in sigma {
        if s >= sigma.len() || seen[s] {
            return Err(Error::DomainError("not a permutation".into()));
        }
        seen[s] = true;
    }
    let mut sign = 1;
    for a in 0..sigma.len() {
        for b in a + 1..sigma.len() {
            if sigma[a] > sigma[b] && (degrees[sigma[a]] * degrees[sigma[b]]).rem_euclid(2) == 1 {
                sign = -sign;
            }
        }
    }
    Ok(sign)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(coeffs: &[i64]) -> Series {
        Series::from_coeffs(coeffs.iter().map(|&c| rat(c)).collect())
    }

    #[test]
    fn addition_examples() {
        assert_eq!(&s(&[1, 1, 0]) + &s(&[0, 2, 0]), s(&[1, 3, 0]));
        assert_eq!(&s(&[4, -1, 2]) + &Series::zero(2), s(&[4, -1, 2]));
        assert_eq!(s(&[1]).try_add(&s(&[1, 0])), Err(Error::ConfigMismatch(0, 1)));
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(&s(&[1, 1, 0, 0]) * &s(&[1, -1, 0, 0]), s(&[1, 0, -1, 0]));
        let a = s(&[3, 0, -2, 5]);
        assert_eq!(&a * &Series::one(3), a);
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(Series::one(4).invert().unwrap(), Series::one(4));
        assert_eq!(s(&[1, 1, 0, 0, 0]).invert().unwrap(), s(&[1, -1, 1, -1, 1]));
        let inv = s(&[2, 3, 0]).invert().unwrap();
        assert_eq!(inv.coeff(0), &ratio(1, 2));
        assert_eq!(inv.coeff(1), &ratio(-3, 4));
        assert_eq!(s(&[0, 1]).invert(), Err(Error::NotInvertible));
    }

    #[test]
    fn koszul_examples() {
        assert_eq!(koszul_sign(&[0, 1, 2], &[1, 1, 1]).unwrap(), 1);
        assert_eq!(koszul_sign(&[1, 0], &[1, 1]).unwrap(), -1);
        assert_eq!(koszul_sign(&[1, 0], &[2, 1]).unwrap(), 1);
        assert!(koszul_sign(&[0], &[1, 1]).is_err());
    }

    #[test]
    fn display() {
        assert_eq!(s(&[1, -3, 0, 1]).to_string(), "1 - 3·ħ^1 + ħ^3");
        assert_eq!(Series::zero(2).to_string(), "0");
    }
}
