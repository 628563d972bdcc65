//! Differential operators `Σ a_i(x) D^i` with rational-function coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::One;

use crate::scalar::Rat;

use super::poly::Poly;
use super::ratfunc::RatFunc;

/// Normal-ordered operator: coefficient `i` multiplies `D^i` from the left.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct DiffOperator {
    coeffs: Vec<RatFunc>,
}

fn binom(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

impl DiffOperator {
    pub fn new(mut coeffs: Vec<RatFunc>) -> Self {
        while coeffs.last().is_some_and(RatFunc::is_zero) {
            coeffs.pop();
        }
        DiffOperator { coeffs }
    }

    pub fn from_polys(coeffs: Vec<Poly>) -> Self {
        Self::new(coeffs.into_iter().map(RatFunc::from_poly).collect())
    }

    pub fn zero() -> Self {
        DiffOperator { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::scalar(RatFunc::one())
    }

    /// Multiplication by a function.
    pub fn scalar(f: RatFunc) -> Self {
        Self::new(vec![f])
    }

    pub fn constant(r: Rat) -> Self {
        Self::scalar(RatFunc::constant(r))
    }

    /// The operator `x`.
    pub fn x() -> Self {
        Self::scalar(RatFunc::x_pow(1))
    }

    /// The operator `D = d/dx`.
    pub fn d() -> Self {
        Self::new(vec![RatFunc::zero(), RatFunc::one()])
    }

    /// `θ = x D`.
    pub fn theta() -> Self {
        Self::new(vec![RatFunc::zero(), RatFunc::x_pow(1)])
    }

    /// `f(x) D^i`.
    pub fn monomial(f: RatFunc, i: usize) -> Self {
        let mut c = vec![RatFunc::zero(); i + 1];
        c[i] = f;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[RatFunc] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> RatFunc {
        self.coeffs.get(i).cloned().unwrap_or_else(RatFunc::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Order in `D`; `None` for the zero operator.
    pub fn rank(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> RatFunc {
        self.coeffs.last().cloned().unwrap_or_else(RatFunc::zero)
    }

    pub fn has_poly_coeffs(&self) -> bool {
        self.coeffs.iter().all(RatFunc::is_poly)
    }

    /// Polynomial coefficients, if all are polynomial.
    pub fn poly_coeffs(&self) -> Option<Vec<Poly>> {
        self.coeffs
            .iter()
            .map(|c| c.as_poly().cloned())
            .collect()
    }

    /// Left multiplication by a function.
    pub fn lmul(&self, f: &RatFunc) -> Self {
        Self::new(self.coeffs.iter().map(|a| f * a).collect())
    }

    pub fn scale(&self, k: &Rat) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.scale(k)).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Substitute `D ↦ D − f`, the twist multiplying solutions by `exp(∫ f)`.
    pub fn twist(&self, f: &RatFunc) -> Self {
        let shifted = &Self::d() - &Self::scalar(f.clone());
        let mut acc = Self::zero();
        let mut power = Self::one();
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                power = &power * &shifted;
            }
            if !a.is_zero() {
                acc = &acc + &power.lmul(a);
            }
        }
        acc
    }

    /// Substitute `x ↦ x + c` in coefficients (`D` is unchanged).
    pub fn shift(&self, c: &Rat) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.shift(c)).collect())
    }

    /// Apply to a function: `Σ a_i f^{(i)}`.
    pub fn apply(&self, f: &RatFunc) -> RatFunc {
        let mut acc = RatFunc::zero();
        let mut g = f.clone();
        for (i, a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                g = g.derivative();
            }
            acc = &acc + &(a * &g);
        }
        acc
    }
}

impl Add<&DiffOperator> for &DiffOperator {
    type Output = DiffOperator;
    fn add(self, rhs: &DiffOperator) -> DiffOperator {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        DiffOperator::new((0..n).map(|i| &self.coeff(i) + &rhs.coeff(i)).collect())
    }
}

impl Sub<&DiffOperator> for &DiffOperator {
    type Output = DiffOperator;
    fn sub(self, rhs: &DiffOperator) -> DiffOperator {
        self + &-rhs
    }
}

impl Neg for &DiffOperator {
    type Output = DiffOperator;
    fn neg(self) -> DiffOperator {
        DiffOperator::new(self.coeffs.iter().map(|a| -a).collect())
    }
}

impl Mul<&DiffOperator> for &DiffOperator {
    type Output = DiffOperator;
    /// Leibniz: `D^i b = Σ_k C(i,k) b^{(k)} D^{i−k}`.
    fn mul(self, rhs: &DiffOperator) -> DiffOperator {
        if self.is_zero() || rhs.is_zero() {
            return DiffOperator::zero();
        }
        let n = self.coeffs.len() + rhs.coeffs.len() - 1;
        let mut out = vec![RatFunc::zero(); n];
        for (j, b) in rhs.coeffs.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            let mut derivs = vec![b.clone()];
            for (i, a) in self.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                while derivs.len() <= i {
                    let next = derivs.last().unwrap().derivative();
                    derivs.push(next);
                }
                for (k, bk) in derivs.iter().enumerate().take(i + 1) {
                    if bk.is_zero() {
                        continue;
                    }
                    let c = Rat::from(binom(i, k));
                    let term = (a * bk).scale(&c);
                    out[i - k + j] = &out[i - k + j] + &term;
                }
            }
        }
        DiffOperator::new(out)
    }
}

impl Add for DiffOperator {
    type Output = DiffOperator;
    fn add(self, rhs: DiffOperator) -> DiffOperator {
        &self + &rhs
    }
}

impl Sub for DiffOperator {
    type Output = DiffOperator;
    fn sub(self, rhs: DiffOperator) -> DiffOperator {
        &self - &rhs
    }
}

impl Mul for DiffOperator {
    type Output = DiffOperator;
    fn mul(self, rhs: DiffOperator) -> DiffOperator {
        &self * &rhs
    }
}

impl Neg for DiffOperator {
    type Output = DiffOperator;
    fn neg(self) -> DiffOperator {
        -&self
    }
}

impl fmt::Display for DiffOperator {
    /// Canonical form `Σ (coeff) * D^i`, lowest `i` first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let body = if a.is_poly() {
                format!("({})", a.num())
            } else {
                format!("({})/({})", a.num(), a.den())
            };
            match i {
                0 => f.write_str(&body)?,
                1 => write!(f, "{body}*D")?,
                _ => write!(f, "{body}*D^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffOperator[{self}]")
    }
}
