//! Rational functions in `x` over `Rat`, kept in lowest terms with monic denominator.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Rat;

use super::poly::Poly;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self::zero();
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = (num.div_exact(&g), den.div_exact(&g));
        let lc = d.lc();
        if !lc.is_one() {
            let inv = lc.recip();
            n = n.scale(&inv);
            d = d.scale(&inv);
        }
        RatFunc { num: n, den: d }
    }

    pub fn zero() -> Self {
        RatFunc {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    pub fn constant(r: Rat) -> Self {
        Self::from_poly(Poly::constant(r))
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    /// `x^k` for any integer `k`.
    pub fn x_pow(k: i64) -> Self {
        if k >= 0 {
            Self::from_poly(Poly::monomial(Rat::one(), k as usize))
        } else {
            RatFunc {
                num: Poly::one(),
                den: Poly::monomial(Rat::one(), (-k) as usize),
            }
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_constant()
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        self.is_poly().then_some(&self.num)
    }

    pub fn is_constant(&self) -> bool {
        self.is_poly() && self.num.is_constant()
    }

    /// `deg num − deg den`; `None` for zero.
    pub fn degree(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.num.deg_i64() - self.den.deg_i64())
    }

    /// Order of vanishing at `c` (negative for poles); `None` for zero.
    pub fn valuation_at(&self, c: &Rat) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let vn = self.num.taylor_shift(c).valuation().unwrap() as i64;
        let vd = self.den.taylor_shift(c).valuation().unwrap() as i64;
        Some(vn - vd)
    }

    pub fn scale(&self, k: &Rat) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        RatFunc {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn recip(&self) -> Self {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn derivative(&self) -> Self {
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::new(n, &self.den * &self.den)
    }

    pub fn pow(&self, e: u32) -> Self {
        RatFunc {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }

    /// `f(x + c)`.
    pub fn shift(&self, c: &Rat) -> Self {
        Self::new(self.num.taylor_shift(c), self.den.taylor_shift(c))
    }

    /// `f(1/x)`.
    pub fn invert_var(&self) -> Self {
        let (dn, dd) = (self.num.deg_i64().max(0), self.den.deg_i64());
        // num(1/x) = rev(num) x^{-dn}, den(1/x) = rev(den) x^{-dd}
        let num = self.num.reverse();
        let den = self.den.reverse();
        let k = dd - dn;
        if k >= 0 {
            Self::new(num.shift_up(k as usize), den)
        } else {
            Self::new(num, den.shift_up((-k) as usize))
        }
    }

    pub fn eval(&self, x: &Rat) -> Option<Rat> {
        let d = self.den.eval(x);
        (!d.is_zero()).then(|| self.num.eval(x) / d)
    }

    /// Denominator is a power of `x`.
    pub fn is_laurent(&self) -> bool {
        self.den.coeffs().iter().rev().skip(1).all(Rat::is_zero)
    }

    /// Write a Laurent polynomial as `x^{-k} p(x)`; `None` if not Laurent.
    pub fn as_laurent(&self) -> Option<(Poly, usize)> {
        self.is_laurent()
            .then(|| (self.num.clone(), self.den.degree().unwrap()))
    }

    /// Coefficient of `x^k` in the Laurent expansion at 0.
    pub fn laurent_coeff(&self, k: i64) -> Rat {
        if self.is_zero() {
            return Rat::zero();
        }
        let v = self.den.valuation().unwrap();
        let d0 = self.den.shift_down(v);
        let target = k + v as i64;
        if target < 0 {
            return Rat::zero();
        }
        let target = target as usize;
        let inv = d0.coeff(0).recip();
        let mut s: Vec<Rat> = Vec::with_capacity(target + 1);
        for n in 0..=target {
            let mut acc = self.num.coeff(n);
            for j in 1..=n.min(d0.deg_i64().max(0) as usize) {
                acc -= &(&d0.coeff(j) * &s[n - j]);
            }
            s.push(&acc * &inv);
        }
        s.pop().unwrap()
    }

    /// Coefficient of `(x − c)^k` in the Laurent expansion at `c`.
    pub fn laurent_coeff_at(&self, c: &Rat, k: i64) -> Rat {
        self.shift(c).laurent_coeff(k)
    }

    /// Coefficient of `x^k` in the expansion at ∞.
    pub fn laurent_coeff_inf(&self, k: i64) -> Rat {
        self.invert_var().laurent_coeff(-k)
    }
}

impl From<Poly> for RatFunc {
    fn from(p: Poly) -> Self {
        Self::from_poly(p)
    }
}

impl From<Rat> for RatFunc {
    fn from(r: Rat) -> Self {
        Self::constant(r)
    }
}

impl Add<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.den == rhs.den {
            return RatFunc::new(&self.num + &rhs.num, self.den.clone());
        }
        RatFunc::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &-rhs
    }
}

impl Mul<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        if self.is_poly() && rhs.is_poly() {
            let lc = &self.den.lc() * &rhs.den.lc();
            return RatFunc::from_poly((&self.num * &rhs.num).scale(&lc.recip()));
        }
        RatFunc::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div<&RatFunc> for &RatFunc {
    type Output = RatFunc;
    fn div(self, rhs: &RatFunc) -> RatFunc {
        assert!(!rhs.is_zero(), "rational function division by zero");
        RatFunc::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Add for RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: RatFunc) -> RatFunc {
        &self + &rhs
    }
}

impl Sub for RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: RatFunc) -> RatFunc {
        &self - &rhs
    }
}

impl Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: RatFunc) -> RatFunc {
        &self * &rhs
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_poly() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        Poly::from_ints(c)
    }

    #[test]
    fn lowest_terms() {
        let f = RatFunc::new(p(&[-1, 0, 1]), p(&[2, 2]));
        assert_eq!(f.num(), &Poly::from_coeffs(vec![Rat::new(-1, 2), Rat::new(1, 2)]));
        assert_eq!(f.den(), &Poly::one());
        assert!(f.is_poly());
    }

    #[test]
    fn valuations_and_degree() {
        // x^2 / (x - 1)^3
        let f = RatFunc::new(p(&[0, 0, 1]), p(&[-1, 1]).pow(3));
        assert_eq!(f.valuation_at(&Rat::zero()), Some(2));
        assert_eq!(f.valuation_at(&Rat::one()), Some(-3));
        assert_eq!(f.degree(), Some(-1));
    }

    #[test]
    fn laurent_expansion() {
        // 1/(x(1 - x)) = x^{-1} + 1 + x + ...
        let f = RatFunc::new(Poly::one(), p(&[0, 1, -1]));
        assert_eq!(f.laurent_coeff(-1), Rat::one());
        assert_eq!(f.laurent_coeff(3), Rat::one());
        assert_eq!(f.laurent_coeff(-2), Rat::zero());
        // at infinity: 1/(x(1-x)) = -x^{-2} - x^{-3} - ...
        assert_eq!(f.laurent_coeff_inf(-2), Rat::from(-1));
        assert_eq!(f.laurent_coeff_inf(-5), Rat::from(-1));
        assert_eq!(f.laurent_coeff_inf(-1), Rat::zero());
    }

    #[test]
    fn invert_variable_round_trip() {
        let f = RatFunc::new(p(&[1, 2, 3]), p(&[5, 0, 0, 1]));
        assert_eq!(f.invert_var().invert_var(), f);
        let x3 = RatFunc::x_pow(3);
        assert_eq!(x3.invert_var(), RatFunc::x_pow(-3));
    }

    #[test]
    fn derivative_quotient_rule() {
        let f = RatFunc::x_pow(-2);
        assert_eq!(f.derivative(), RatFunc::x_pow(-3).scale(&Rat::from(-2)));
    }
}
