//! Global transforms: primitive component, additions, exponential twists,
//! Fourier-Laplace and the Euler transform.

use std::collections::BTreeMap;

use crate::scalar::Rat;

use super::local::{power_at, Location, NewtonPolygon};
use super::operator::DiffOperator;
use super::poly::Poly;
use super::ratfunc::RatFunc;
use super::WeylError;

/// Polynomial representative with coprime coefficients and monic top coefficient.
pub fn prim(p: &DiffOperator) -> Result<DiffOperator, WeylError> {
    if p.is_zero() {
        return Err(WeylError::ZeroOperator);
    }
    let mut den = Poly::one();
    for a in p.coeffs() {
        let g = den.gcd(a.den());
        den = (&den * a.den()).div_exact(&g);
    }
    let cleared: Vec<Poly> = p
        .coeffs()
        .iter()
        .map(|a| {
            let q = den.div_exact(a.den());
            &q * a.num()
        })
        .collect();
    let content = cleared.iter().fold(Poly::zero(), |g, a| g.gcd(a));
    let lc = cleared.last().unwrap().lc() * content.lc();
    let inv = lc.recip();
    Ok(DiffOperator::from_polys(
        cleared
            .iter()
            .map(|a| a.div_exact(&content).scale(&inv))
            .collect(),
    ))
}

/// Addition at `x = c`: `D ↦ D − λ/(x − c)`.
pub fn ad_power(p: &DiffOperator, c: &Rat, lambda: &Rat) -> DiffOperator {
    p.twist(&power_at(c, -1).scale(lambda))
}

/// The function `f` with `D ↦ D − f` for a θ-form exponential factor.
pub fn exp_factor_function(at: &Location, coeffs: &BTreeMap<u32, Rat>) -> RatFunc {
    let mut f = RatFunc::zero();
    for (&k, w) in coeffs {
        let term = match at {
            Location::Finite(c) => power_at(c, -(k as i64) - 1),
            Location::Inf => RatFunc::x_pow(k as i64 - 1),
        };
        f = &f + &term.scale(w);
    }
    f
}

/// Twist by `exp(∫ w dx/(x − c))` (resp. `exp(∫ w dx/x)` at ∞).
pub fn exp_twist(p: &DiffOperator, at: &Location, coeffs: &BTreeMap<u32, Rat>) -> DiffOperator {
    if coeffs.values().all(Rat::is_zero) {
        return p.clone();
    }
    p.twist(&exp_factor_function(at, coeffs))
}

fn substitute(
    p: &DiffOperator,
    x_image: &DiffOperator,
    d_image: &DiffOperator,
) -> Result<DiffOperator, WeylError> {
    let polys = p.poly_coeffs().ok_or(WeylError::RationalCoefficients)?;
    let mut acc = DiffOperator::zero();
    let mut d_pow = DiffOperator::one();
    for (i, a) in polys.iter().enumerate() {
        if i > 0 {
            d_pow = &d_pow * d_image;
        }
        let mut a_img = DiffOperator::zero();
        for c in a.coeffs().iter().rev() {
            a_img = &(&a_img * x_image) + &DiffOperator::constant(c.clone());
        }
        acc = &acc + &(&a_img * &d_pow);
    }
    Ok(acc)
}

/// Fourier-Laplace transform `x ↦ −D, D ↦ x`.
pub fn laplace(p: &DiffOperator) -> Result<DiffOperator, WeylError> {
    substitute(p, &-&DiffOperator::d(), &DiffOperator::x())
}

/// Inverse transform `x ↦ D, D ↦ −x`.
pub fn laplace_inv(p: &DiffOperator) -> Result<DiffOperator, WeylError> {
    substitute(p, &DiffOperator::d(), &-&DiffOperator::x())
}

/// `E(λ) = L ∘ Prim ∘ Ad(x^λ) ∘ L⁻¹ ∘ Prim`.
pub fn euler(p: &DiffOperator, lambda: &Rat) -> Result<DiffOperator, WeylError> {
    if lambda.is_integer() {
        return Err(WeylError::IntegerEulerParameter(lambda.clone()));
    }
    let q = laplace_inv(&prim(p)?)?;
    let q = prim(&ad_power(&q, &Rat::zero(), lambda))?;
    laplace(&q)
}

/// Maximal coefficient degree.
pub fn deg_of(p: &DiffOperator) -> Result<i64, WeylError> {
    let polys = p.poly_coeffs().ok_or(WeylError::RationalCoefficients)?;
    polys
        .iter()
        .map(Poly::deg_i64)
        .max()
        .ok_or(WeylError::ZeroOperator)
}

/// `deg P = deg a_n + Σ_{λ > 1} (λ − 1)·len` from the polygon at ∞.
pub fn degree_from_newton(np_inf: &NewtonPolygon, deg_leading: i64) -> Rat {
    let mut acc = Rat::from(deg_leading);
    for (s, len) in np_inf.slopes.iter().zip(np_inf.lengths()) {
        if *s > Rat::one() {
            acc += &(&(s - &Rat::one()) * &Rat::from(len));
        }
    }
    acc
}

/// `wt_∞ P = n − deg a_n − Σ λ·len`, summed over every edge of the polygon at ∞.
pub fn weight_inf_from_newton(np_inf: &NewtonPolygon, rank: i64, deg_leading: i64) -> Rat {
    let mut acc = Rat::from(rank - deg_leading);
    for (s, len) in np_inf.slopes.iter().zip(np_inf.lengths()) {
        acc -= &(s * &Rat::from(len));
    }
    acc
}
