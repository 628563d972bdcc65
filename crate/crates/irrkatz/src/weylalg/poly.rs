//! Dense univariate polynomials over `Rat`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::{denominator_lcm, Rat};

/// Coefficients lowest degree first; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    c: Vec<Rat>,
}

impl Poly {
    pub fn from_coeffs(mut c: Vec<Rat>) -> Self {
        while c.last().is_some_and(Rat::is_zero) {
            c.pop();
        }
        Poly { c }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::from_coeffs(c.iter().map(|&n| Rat::from(n)).collect())
    }

    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(r: Rat) -> Self {
        Self::from_coeffs(vec![r])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::monomial(Rat::one(), 1)
    }

    pub fn monomial(coeff: Rat, deg: usize) -> Self {
        let mut c = vec![Rat::zero(); deg + 1];
        c[deg] = coeff;
        Self::from_coeffs(c)
    }

    /// `x − r`.
    pub fn linear_root(r: &Rat) -> Self {
        Self::from_coeffs(vec![-r, Rat::one()])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.c.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree with `deg 0 = −1` convention for the zero polynomial.
    pub fn deg_i64(&self) -> i64 {
        self.c.len() as i64 - 1
    }

    pub fn lc(&self) -> Rat {
        self.c.last().cloned().unwrap_or_else(Rat::zero)
    }

    /// Order of vanishing at 0; `None` for zero.
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|r| !r.is_zero())
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            c: self.c.iter().map(|a| a * k).collect(),
        }
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(&self.lc().recip())
    }

    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Rat::zero(); k];
        c.extend(self.c.iter().cloned());
        Poly { c }
    }

    /// Drop the lowest `k` coefficients (exact division by `x^k` when they vanish).
    pub fn shift_down(&self, k: usize) -> Poly {
        Poly::from_coeffs(self.c.iter().skip(k).cloned().collect())
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for a in self.c.iter().rev() {
            acc = &(&acc * x) + a;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_coeffs(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * &Rat::from(k as i64))
                .collect(),
        )
    }

    /// `p(x + s)`.
    pub fn taylor_shift(&self, s: &Rat) -> Poly {
        let mut out = Poly::zero();
        let lin = Poly::from_coeffs(vec![s.clone(), Rat::one()]);
        for a in self.c.iter().rev() {
            out = &(&out * &lin) + &Poly::constant(a.clone());
        }
        out
    }

    /// `x^d p(1/x)` with `d = deg p`.
    pub fn reverse(&self) -> Poly {
        Poly::from_coeffs(self.c.iter().rev().cloned().collect())
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.c.len() - 1;
        if self.c.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let inv = d.lc().recip();
        let mut rem = self.c.clone();
        let mut q = vec![Rat::zero(); rem.len() - dd];
        for k in (0..q.len()).rev() {
            let f = &rem[k + dd] * &inv;
            if f.is_zero() {
                continue;
            }
            for (i, b) in d.c.iter().enumerate() {
                rem[k + i] -= &(&f * b);
            }
            q[k] = f;
        }
        rem.truncate(dd);
        (Poly::from_coeffs(q), Poly::from_coeffs(rem))
    }

    /// Exact quotient; panics if the division leaves a remainder.
    pub fn div_exact(&self, d: &Poly) -> Poly {
        let (q, r) = self.div_rem(d);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Monic gcd (zero only if both inputs are zero).
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            // keep coefficients small
            b = r.monic();
        }
        a.monic()
    }

    /// Multiply by the lcm of denominators and divide by the integer content.
    /// Returns the primitive integer polynomial with positive leading coefficient.
    pub fn integer_primitive(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let l = denominator_lcm(self.c.iter());
        let mut ints: Vec<BigInt> = self
            .c
            .iter()
            .map(|a| (a.numer() * &l) / a.denom())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
        let sign = if ints.last().unwrap().is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        for v in &mut ints {
            *v = &*v / &g * &sign;
        }
        ints
    }

    /// Square-free decomposition: pairs `(f_k, k)` with `self = lc · Π f_k^k`.
    pub fn square_free(&self) -> Vec<(Poly, u32)> {
        let mut out = Vec::new();
        if self.is_constant() {
            return out;
        }
        // Yun's algorithm
        let f = self.monic();
        let fp = f.derivative();
        let a = f.gcd(&fp);
        let mut b = f.div_exact(&a);
        let mut d = &fp.div_exact(&a) - &b.derivative();
        let mut k = 1;
        while !b.is_constant() {
            let g = b.gcd(&d);
            if !g.is_constant() {
                out.push((g.clone(), k));
            }
            b = b.div_exact(&g);
            d = &d.div_exact(&g) - &b.derivative();
            k += 1;
        }
        out
    }

    /// Rational roots with multiplicity. Returns `(roots, complete)` where
    /// `complete` says whether the roots account for the full degree.
    pub fn rational_roots(&self) -> (Vec<(Rat, u32)>, bool) {
        let mut roots = Vec::new();
        let Some(deg) = self.degree() else {
            return (roots, false);
        };
        let mut found = 0usize;
        for (f, k) in self.square_free() {
            for r in squarefree_rational_roots(&f) {
                roots.push((r, k));
                found += k as usize;
            }
        }
        roots.sort();
        (roots, found == deg)
    }
}

fn squarefree_rational_roots(f: &Poly) -> Vec<Rat> {
    let mut out = Vec::new();
    let mut g = f.monic();
    // zero root
    if let Some(v) = g.valuation() {
        if v > 0 {
            out.push(Rat::zero());
            g = g.shift_down(v);
        }
    }
    loop {
        match g.degree() {
            None | Some(0) => return out,
            Some(1) => {
                out.push(-&(g.coeff(0) / g.coeff(1)));
                return out;
            }
            Some(2) => {
                out.extend(quadratic_roots(&g));
                return out;
            }
            Some(_) => {
                let Some(r) = find_one_root(&g) else {
                    return out;
                };
                out.push(r.clone());
                g = g.div_exact(&Poly::linear_root(&r));
            }
        }
    }
}

fn quadratic_roots(g: &Poly) -> Vec<Rat> {
    let (a, b, c) = (g.coeff(2), g.coeff(1), g.coeff(0));
    let disc = &(&b * &b) - &(&(&a * &c) * &Rat::from(4));
    if disc.is_negative() {
        return Vec::new();
    }
    let (n, d) = (disc.numer().clone(), disc.denom().clone());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    if &sn * &sn != n || &sd * &sd != d {
        return Vec::new();
    }
    let s = Rat::new(sn, sd);
    let two_a = &a * &Rat::from(2);
    let mut v = vec![&(&-&b + &s) / &two_a, &(&-&b - &s) / &two_a];
    v.sort();
    v.dedup();
    v
}

fn find_one_root(g: &Poly) -> Option<Rat> {
    let ints = g.integer_primitive();
    let a0 = ints[0].abs();
    let an = ints.last().unwrap().abs();
    if a0.is_zero() {
        return Some(Rat::zero());
    }
    let bound = cauchy_bound(g);
    let ps = divisors(&a0)?;
    let qs = divisors(&an)?;
    for q in &qs {
        for p in &ps {
            if !p.gcd(q).is_one() {
                continue;
            }
            let cand = Rat::new(p.clone(), q.clone());
            if cand > bound {
                continue;
            }
            for s in [cand.clone(), -cand] {
                if g.eval(&s).is_zero() {
                    return Some(s);
                }
            }
        }
    }
    None
}

fn cauchy_bound(g: &Poly) -> Rat {
    let lc = g.lc().abs();
    let m = g.coeffs()[..g.coeffs().len() - 1]
        .iter()
        .map(|a| a.abs() / lc.clone())
        .max()
        .unwrap_or_else(Rat::zero);
    &m + &Rat::one()
}

/// Positive divisors by trial division; gives up on very large cofactors.
fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let mut n = n.abs();
    let mut primes: Vec<(BigInt, u32)> = Vec::new();
    let mut p = BigInt::from(2);
    let limit = BigInt::from(2_000_000u64);
    while &p * &p <= n && p <= limit {
        let mut e = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        if e > 0 {
            primes.push((p.clone(), e));
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    if n > BigInt::one() {
        if &p * &p <= n {
            // cofactor not fully factored; treat as prime
        }
        primes.push((n, 1));
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in primes {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for d in &divs {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
            }
        }
        divs = next;
        if divs.len() > 200_000 {
            return None;
        }
    }
    divs.sort();
    Some(divs)
}

/// Falling factorial `t(t−1)⋯(t−k+1)`.
pub fn falling(k: usize) -> Poly {
    let mut acc = Poly::one();
    for j in 0..k {
        acc = &acc * &Poly::linear_root(&Rat::from(j as i64));
    }
    acc
}

/// Rising factorial `t(t+1)⋯(t+k−1)`.
pub fn rising(k: usize) -> Poly {
    let mut acc = Poly::one();
    for j in 0..k {
        acc = &acc * &Poly::linear_root(&Rat::from(-(j as i64)));
    }
    acc
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.c.len().max(rhs.c.len());
        let mut c = Vec::with_capacity(n);
        for k in 0..n {
            c.push(match (self.c.get(k), rhs.c.get(k)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        Poly::from_coeffs(c)
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &-rhs
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            c: self.c.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Rat::zero(); self.c.len() + rhs.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                c[i + j] += &(a * b);
            }
        }
        Poly::from_coeffs(c)
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Poly {
    /// Render with the given variable name, highest degree first.
    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (k, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let neg = a.is_negative();
            let mag = a.abs();
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mon = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            if k == 0 {
                s.push_str(&mag.to_string());
            } else if mag.is_one() {
                s.push_str(&mon);
            } else {
                s.push_str(&format!("{mag}*{mon}"));
            }
        }
        s
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}
