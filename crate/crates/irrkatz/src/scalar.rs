//! Exact scalars: big rationals and parameter-affine expressions.
//!
//! Parameters are generic: any expression that depends on a named
//! parameter is treated as non-integer.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("invalid rational literal `{0}`")]
    BadRational(String),
    #[error("invalid parameter expression `{text}` at byte {pos}")]
    BadExpr { text: String, pos: usize },
    #[error("division by zero")]
    DivisionByZero,
}

/// Reduced rational number with positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        let den = den.into();
        assert!(!den.is_zero(), "zero denominator");
        Rat(BigRational::new(num.into(), den))
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Rat(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_big(r: BigRational) -> Self {
        Rat(r)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Rat {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rat(self.0.recip())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Integer value, if this is an integer that fits in `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    pub fn pow(&self, e: u32) -> Rat {
        let mut acc = Rat::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rat {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || ScalarError::BadRational(s.to_string());
        match t.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(ScalarError::DivisionByZero);
                }
                Ok(Rat::new(n, d))
            }
            None => {
                let n: BigInt = t.parse().map_err(|_| bad())?;
                Ok(Rat::from_int(n))
            }
        }
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_int(n)
    }
}

impl From<i32> for Rat {
    fn from(n: i32) -> Self {
        Rat::from_int(n)
    }
}

impl From<BigInt> for Rat {
    fn from(n: BigInt) -> Self {
        Rat::from_int(n)
    }
}

macro_rules! rat_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat(&self.0 $op &rhs.0)
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(self.0 $op rhs.0)
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat(self.0 $op &rhs.0)
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(&self.0 $op rhs.0)
            }
        }
    };
}

rat_binop!(Add, add, +);
rat_binop!(Sub, sub, -);
rat_binop!(Mul, mul, *);

impl Div<&Rat> for &Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        Rat(&self.0 / &rhs.0)
    }
}

impl Div<Rat> for Rat {
    type Output = Rat;
    fn div(self, rhs: Rat) -> Rat {
        &self / &rhs
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

/// Least common multiple of the denominators of `rs` (1 for an empty list).
pub fn denominator_lcm<'a>(rs: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    rs.into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// `constant + Σ coeff·name`, with no zero coefficients stored.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ParamExpr {
    constant: Rat,
    terms: BTreeMap<String, Rat>,
}

impl ParamExpr {
    pub fn constant(c: Rat) -> Self {
        ParamExpr {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(Rat::zero())
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Rat::from(n))
    }

    pub fn param(name: &str) -> Self {
        Self::term(name, Rat::one())
    }

    pub fn term(name: &str, coeff: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(name.to_string(), coeff);
        }
        ParamExpr {
            constant: Rat::zero(),
            terms,
        }
    }

    pub fn constant_part(&self) -> &Rat {
        &self.constant
    }

    pub fn terms(&self) -> &BTreeMap<String, Rat> {
        &self.terms
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        self.is_constant().then_some(&self.constant)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    pub fn scale(&self, k: &Rat) -> ParamExpr {
        if k.is_zero() {
            return ParamExpr::zero();
        }
        ParamExpr {
            constant: &self.constant * k,
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (n.clone(), c * k))
                .collect(),
        }
    }

    pub fn scale_int(&self, k: i64) -> ParamExpr {
        self.scale(&Rat::from(k))
    }

    /// Substitute rational values; unknown names are kept symbolic.
    pub fn substitute(&self, values: &BTreeMap<String, Rat>) -> ParamExpr {
        let mut out = ParamExpr::constant(self.constant.clone());
        for (name, c) in &self.terms {
            match values.get(name) {
                Some(v) => out.constant += &(c * v),
                None => out.add_term(name, c),
            }
        }
        out
    }

    fn add_term(&mut self, name: &str, c: &Rat) {
        let e = self.terms.entry(name.to_string()).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(name);
        }
    }

    pub fn parse(text: &str) -> Result<Self, ScalarError> {
        ExprParser::new(text).parse()
    }
}

/// True iff `e` is parameter-free with an integer value.
pub fn is_generically_integer(e: &ParamExpr) -> bool {
    e.is_constant() && e.constant.is_integer()
}

/// True iff `e1 − e2` is generically an integer.
pub fn diff_in_integers(e1: &ParamExpr, e2: &ParamExpr) -> bool {
    is_generically_integer(&(e1 - e2))
}

/// Difference lies in ℤ∖{0}: the weaker separation used when equal
/// exponents are allowed.
pub fn diff_in_nonzero_integers(e1: &ParamExpr, e2: &ParamExpr) -> bool {
    let d = e1 - e2;
    is_generically_integer(&d) && !d.is_zero()
}

impl From<Rat> for ParamExpr {
    fn from(r: Rat) -> Self {
        ParamExpr::constant(r)
    }
}

impl From<i64> for ParamExpr {
    fn from(n: i64) -> Self {
        ParamExpr::int(n)
    }
}

impl Add<&ParamExpr> for &ParamExpr {
    type Output = ParamExpr;
    fn add(self, rhs: &ParamExpr) -> ParamExpr {
        let mut out = self.clone();
        out.constant += &rhs.constant;
        for (n, c) in &rhs.terms {
            out.add_term(n, c);
        }
        out
    }
}

impl Sub<&ParamExpr> for &ParamExpr {
    type Output = ParamExpr;
    fn sub(self, rhs: &ParamExpr) -> ParamExpr {
        let mut out = self.clone();
        out.constant -= &rhs.constant;
        for (n, c) in &rhs.terms {
            out.add_term(n, &-c);
        }
        out
    }
}

impl Add for ParamExpr {
    type Output = ParamExpr;
    fn add(self, rhs: ParamExpr) -> ParamExpr {
        &self + &rhs
    }
}

impl Sub for ParamExpr {
    type Output = ParamExpr;
    fn sub(self, rhs: ParamExpr) -> ParamExpr {
        &self - &rhs
    }
}

impl Neg for &ParamExpr {
    type Output = ParamExpr;
    fn neg(self) -> ParamExpr {
        self.scale(&-Rat::one())
    }
}

impl Neg for ParamExpr {
    type Output = ParamExpr;
    fn neg(self) -> ParamExpr {
        -&self
    }
}

impl fmt::Display for ParamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if !self.constant.is_zero() || self.terms.is_empty() {
            write!(f, "{}", self.constant)?;
            first = false;
        }
        for (name, c) in &self.terms {
            if first {
                write!(f, "{c}*{name}")?;
                first = false;
            } else if c.is_negative() {
                write!(f, " - {}*{name}", c.abs())?;
            } else {
                write!(f, " + {c}*{name}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ParamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for ParamExpr {
    type Err = ScalarError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParamExpr::parse(s)
    }
}

// expr   := ['+'|'-'] term (('+'|'-') term)*
// term   := rat ['*' name] | name
struct ExprParser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ExprParser<'a> {
    fn new(text: &'a str) -> Self {
        ExprParser {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn err(&self) -> ScalarError {
        ScalarError::BadExpr {
            text: self.text.to_string(),
            pos: self.pos,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<ParamExpr, ScalarError> {
        let mut out = ParamExpr::zero();
        let mut sign = Rat::one();
        match self.peek() {
            Some(b'-') => {
                sign = -Rat::one();
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            _ => {}
        }
        loop {
            let t = self.term()?;
            out = &out + &t.scale(&sign);
            match self.peek() {
                None => return Ok(out),
                Some(b'+') => sign = Rat::one(),
                Some(b'-') => sign = -Rat::one(),
                Some(_) => return Err(self.err()),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<ParamExpr, ScalarError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let r = self.rational()?;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    self.skip_ws();
                    let name = self.name()?;
                    Ok(ParamExpr::term(&name, r))
                } else {
                    Ok(ParamExpr::constant(r))
                }
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let name = self.name()?;
                Ok(ParamExpr::param(&name))
            }
            _ => Err(self.err()),
        }
    }

    fn digits(&mut self) -> Result<BigInt, ScalarError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.text[start..self.pos].parse().map_err(|_| self.err())
    }

    fn rational(&mut self) -> Result<Rat, ScalarError> {
        let n = self.digits()?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let d = self.digits()?;
            if d.is_zero() {
                return Err(ScalarError::DivisionByZero);
            }
            Ok(Rat::new(n, d))
        } else {
            Ok(Rat::from_int(n))
        }
    }

    fn name(&mut self) -> Result<String, ScalarError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos || self.bytes[start].is_ascii_digit() {
            return Err(self.err());
        }
        Ok(self.text[start..self.pos].to_string())
    }
}
