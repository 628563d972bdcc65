//! Local invariants at a point: weights, characteristic polynomials,
//! Newton polygons and θ-expansions.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::scalar::Rat;

use super::operator::DiffOperator;
use super::poly::{falling, Poly};
use super::ratfunc::RatFunc;
use super::WeylError;

/// A point of the projective line. `Inf` sorts first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    Inf,
    Finite(Rat),
}

impl Location {
    pub fn finite(r: impl Into<Rat>) -> Self {
        Location::Finite(r.into())
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Location::Inf)
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Inf => f.write_str("inf"),
            Location::Finite(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Debug for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Location {
    type Err = crate::scalar::ScalarError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "inf" {
            Ok(Location::Inf)
        } else {
            Ok(Location::Finite(s.parse()?))
        }
    }
}

/// `(x − c)^k` as a rational function.
pub fn power_at(c: &Rat, k: i64) -> RatFunc {
    let base = RatFunc::from_poly(Poly::linear_root(c));
    if k >= 0 {
        base.pow(k as u32)
    } else {
        base.pow((-k) as u32).recip()
    }
}

/// The operator in the local coordinate at `at`, placed at the origin:
/// `x ↦ x + c` for finite points, `x ↦ 1/x, D ↦ −x²D` at ∞.
/// The map at ∞ is an involution.
pub fn localize(p: &DiffOperator, at: &Location) -> DiffOperator {
    match at {
        Location::Finite(c) => p.shift(c),
        Location::Inf => {
            let d_inf = DiffOperator::monomial(RatFunc::x_pow(2).scale(&Rat::from(-1)), 1);
            let mut acc = DiffOperator::zero();
            let mut power = DiffOperator::one();
            for (i, a) in p.coeffs().iter().enumerate() {
                if i > 0 {
                    power = &power * &d_inf;
                }
                if !a.is_zero() {
                    acc = &acc + &power.lmul(&a.invert_var());
                }
            }
            acc
        }
    }
}

/// Inverse of [`localize`].
pub fn delocalize(p: &DiffOperator, at: &Location) -> DiffOperator {
    match at {
        Location::Finite(c) => p.shift(&-c),
        Location::Inf => localize(p, at),
    }
}

/// Weight of the single term `a D^i`.
pub fn term_weight(a: &RatFunc, i: usize, at: &Location) -> Option<i64> {
    match at {
        Location::Finite(c) => a.valuation_at(c).map(|v| v - i as i64),
        Location::Inf => a.degree().map(|d| i as i64 - d),
    }
}

pub fn weight(p: &DiffOperator, at: &Location) -> Result<i64, WeylError> {
    p.coeffs()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| term_weight(a, i, at))
        .min()
        .ok_or(WeylError::ZeroOperator)
}

/// Sum of the monomials of weight exactly `k`.
pub fn homogeneous_part(p: &DiffOperator, at: &Location, k: i64) -> DiffOperator {
    let coeffs = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, a)| match at {
            Location::Finite(c) => {
                let e = k + i as i64;
                power_at(c, e).scale(&a.laurent_coeff_at(c, e))
            }
            Location::Inf => {
                let e = i as i64 - k;
                RatFunc::x_pow(e).scale(&a.laurent_coeff_inf(e))
            }
        })
        .collect();
    DiffOperator::new(coeffs)
}

/// Characteristic polynomial of the lowest-weight part. At ∞ this is the
/// characteristic polynomial of the localized operator at the origin, so a
/// root `λ` means solutions behave like `x^{−λ}`.
pub fn char_poly(p: &DiffOperator, at: &Location) -> Result<Poly, WeylError> {
    let (local, c) = match at {
        Location::Finite(c) => (p.clone(), c.clone()),
        Location::Inf => (localize(p, at), Rat::zero()),
    };
    let w = weight(&local, &Location::Finite(c.clone()))?;
    let mut acc = Poly::zero();
    for (j, a) in local.coeffs().iter().enumerate() {
        let coeff = a.laurent_coeff_at(&c, w + j as i64);
        if !coeff.is_zero() {
            acc = &acc + &falling(j).scale(&coeff);
        }
    }
    Ok(acc)
}

pub fn is_regular_singular(p: &DiffOperator, at: &Location) -> Result<bool, WeylError> {
    let cp = char_poly(p, at)?;
    Ok(cp.degree() == p.rank())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// Vertices `(i, j)` of the lower boundary, starting at the rightmost
    /// point of minimal weight.
    pub vertices: Vec<(i64, i64)>,
    /// Positive slopes of the edges between consecutive vertices.
    pub slopes: Vec<Rat>,
}

impl NewtonPolygon {
    /// Horizontal length of each edge.
    pub fn lengths(&self) -> Vec<i64> {
        self.vertices.windows(2).map(|w| w[1].0 - w[0].0).collect()
    }

    /// Rank of the factor with zero exponential factor.
    pub fn flat_rank(&self) -> i64 {
        self.vertices[0].0
    }

    /// Slopes of all local factors, including 0 for the flat part.
    pub fn factor_slopes(&self) -> Vec<Rat> {
        let mut out = Vec::new();
        if self.flat_rank() > 0 {
            out.push(Rat::zero());
        }
        out.extend(self.slopes.iter().cloned());
        out
    }

    /// Whether every slope is an integer.
    pub fn is_unramified(&self) -> bool {
        self.slopes.iter().all(Rat::is_integer)
    }
}

/// Lower-right convex boundary of a finite point set `(i, j)`.
pub fn lower_hull(points: &[(i64, i64)]) -> NewtonPolygon {
    let min_j = points.iter().map(|p| p.1).min().expect("empty point set");
    let start = points
        .iter()
        .filter(|p| p.1 == min_j)
        .max_by_key(|p| p.0)
        .copied()
        .unwrap();
    let mut vertices = vec![start];
    let mut slopes = Vec::new();
    let mut cur = start;
    loop {
        let mut best: Option<((i64, i64), Rat)> = None;
        for &q in points.iter().filter(|q| q.0 > cur.0) {
            let s = Rat::new(q.1 - cur.1, q.0 - cur.0);
            best = match best {
                None => Some((q, s)),
                Some((bq, bs)) => match s.cmp(&bs) {
                    Ordering::Less => Some((q, s)),
                    Ordering::Equal if q.0 > bq.0 => Some((q, s)),
                    _ => Some((bq, bs)),
                },
            };
        }
        let Some((q, s)) = best else { break };
        vertices.push(q);
        slopes.push(s);
        cur = q;
    }
    NewtonPolygon { vertices, slopes }
}

pub fn newton_polygon(p: &DiffOperator, at: &Location) -> Result<NewtonPolygon, WeylError> {
    let points: Vec<(i64, i64)> = p
        .coeffs()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| term_weight(a, i, at).map(|w| (i as i64, w)))
        .collect();
    if points.is_empty() {
        return Err(WeylError::ZeroOperator);
    }
    Ok(lower_hull(&points))
}

/// `P = Σ_k x^k p_k(θ)` in the local coordinate at `point`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaExpansion {
    pub point: Location,
    pub terms: BTreeMap<i64, Poly>,
}

impl ThetaExpansion {
    /// Lowest index `r` with `p_r ≠ 0`.
    pub fn min_index(&self) -> i64 {
        *self.terms.keys().next().expect("empty expansion")
    }

    pub fn max_index(&self) -> i64 {
        *self.terms.keys().next_back().expect("empty expansion")
    }

    /// `p_k`, zero when absent.
    pub fn term(&self, k: i64) -> Poly {
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    /// Leading polynomial `p_r`, the characteristic polynomial.
    pub fn leading(&self) -> Poly {
        self.term(self.min_index())
    }

    /// The triangular vanishing pattern
    /// `p_{r+k}(λ + j) = 0` for `0 ≤ k < m`, `0 ≤ j < m − k`.
    pub fn triangular_vanishing(&self, lambda: &Rat, m: usize) -> bool {
        let r = self.min_index();
        (0..m).all(|k| {
            let pk = self.term(r + k as i64);
            (0..m - k).all(|j| pk.eval(&(lambda + &Rat::from(j as i64))).is_zero())
        })
    }

    /// Whether `x^{−s}` times the local operator still has polynomial coefficients.
    pub fn divisible_by_power(&self, s: i64) -> bool {
        let r = self.min_index();
        if r >= s {
            return true;
        }
        self.triangular_vanishing(&Rat::zero(), (s - r) as usize)
    }

    /// The operator `Σ x^k p_k(θ)` in the local coordinate.
    pub fn local_operator(&self) -> DiffOperator {
        let theta = DiffOperator::theta();
        let mut acc = DiffOperator::zero();
        for (&k, pk) in &self.terms {
            let mut poly_theta = DiffOperator::zero();
            for c in pk.coeffs().iter().rev() {
                poly_theta = &(&poly_theta * &theta) + &DiffOperator::constant(c.clone());
            }
            acc = &acc + &poly_theta.lmul(&RatFunc::x_pow(k));
        }
        acc
    }

    /// Reassemble the operator in the global coordinate.
    pub fn reconstruct(&self) -> DiffOperator {
        delocalize(&self.local_operator(), &self.point)
    }
}

/// θ-expansion of an operator whose localized coefficients are Laurent polynomials.
pub fn theta_expand_local(local: &DiffOperator, point: Location) -> Result<ThetaExpansion, WeylError> {
    if local.is_zero() {
        return Err(WeylError::ZeroOperator);
    }
    let mut terms: BTreeMap<i64, Poly> = BTreeMap::new();
    for (i, a) in local.coeffs().iter().enumerate() {
        let Some((num, shift)) = a.as_laurent() else {
            return Err(WeylError::NotLaurent(point.to_string()));
        };
        let ff = falling(i);
        for (k, c) in num.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // x^e D^i = x^{e−i} falling(θ, i)
            let idx = k as i64 - shift as i64 - i as i64;
            let entry = terms.entry(idx).or_default();
            *entry = &*entry + &ff.scale(c);
        }
    }
    terms.retain(|_, p| !p.is_zero());
    Ok(ThetaExpansion { point, terms })
}

pub fn theta_expand(p: &DiffOperator, at: &Location) -> Result<ThetaExpansion, WeylError> {
    theta_expand_local(&localize(p, at), at.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weylalg::parse::parse_operator;
    use crate::weylalg::poly::rising;
    use proptest::prelude::*;

    fn op(s: &str) -> DiffOperator {
        parse_operator(s).unwrap()
    }

    fn zero() -> Location {
        Location::finite(0)
    }

    #[test]
    fn weights() {
        assert_eq!(weight(&op("x*D - 5"), &zero()).unwrap(), 0);
        assert_eq!(weight(&op("D^2 + (-x^2-7)*D + (-2*x+3)"), &Location::Inf).unwrap(), -1);
        assert_eq!(weight(&op("x^2*D^2 + x*D"), &zero()).unwrap(), 0);
        assert!(weight(&DiffOperator::zero(), &zero()).is_err());
    }

    #[test]
    fn weight_at_infinity_by_monomials() {
        // oracle: expand every coefficient into monomials x^a D^b, take min of b − a
        let p = op("D^2 + (-x^2-7)*D + (-2*x+3)");
        let mut best = i64::MAX;
        for (b, a) in p.coeffs().iter().enumerate() {
            for (deg, c) in a.num().coeffs().iter().enumerate() {
                if !c.is_zero() {
                    best = best.min(b as i64 - deg as i64);
                }
            }
        }
        assert_eq!(best, weight(&p, &Location::Inf).unwrap());
    }

    #[test]
    fn homogeneous_parts() {
        assert_eq!(homogeneous_part(&op("x*D + 1"), &zero(), 0), op("x*D + 1"));
        assert_eq!(homogeneous_part(&op("x*D + x^2"), &zero(), 2), op("x^2"));
        assert_eq!(homogeneous_part(&op("x^2*D + D"), &zero(), -1), op("D"));
        assert_eq!(homogeneous_part(&op("x^2*D + D"), &Location::Inf, -1), op("x^2*D"));
    }

    #[test]
    fn char_polys() {
        assert_eq!(char_poly(&op("x*D - 5"), &zero()).unwrap(), Poly::from_ints(&[-5, 1]));
        // t(t−1) + 3t + 1
        assert_eq!(
            char_poly(&op("x^2*D^2 + 3*x*D + 1"), &zero()).unwrap(),
            Poly::from_ints(&[1, 2, 1])
        );
        // x D − 5 has solution x^5 = (1/x)^{−5}
        assert_eq!(char_poly(&op("x*D - 5"), &Location::Inf).unwrap(), Poly::from_ints(&[-5, -1]));
    }

    #[test]
    fn heun_char_poly_at_zero() {
        // Heun with c = 1/3: t(t − 1) + c t
        let p = op("x*(x-1)*(x-2)*D^2 + (1/3*(x-1)*(x-2) + 1/5*x*(x-2) + 1/7*x*(x-1))*D + (3*x - 1)");
        let cp = char_poly(&p, &zero()).unwrap();
        let (roots, complete) = cp.rational_roots();
        assert!(complete);
        let rs: Vec<Rat> = roots.into_iter().map(|r| r.0).collect();
        assert_eq!(rs, vec![Rat::zero(), Rat::new(2, 3)]);
        assert!(is_regular_singular(&p, &zero()).unwrap());
        assert!(newton_polygon(&p, &zero()).unwrap().slopes.is_empty());
    }

    #[test]
    fn newton_polygons() {
        let tc = op("D^2 + (-x^2-7)*D + (-2*x+3)");
        let np = newton_polygon(&tc, &Location::Inf).unwrap();
        assert_eq!(np.vertices, vec![(1, -1), (2, 2)]);
        assert_eq!(np.factor_slopes(), vec![Rat::zero(), Rat::from(3)]);
        assert!(!is_regular_singular(&tc, &Location::Inf).unwrap());
    }

    #[test]
    fn theta_expansions() {
        let t = theta_expand(&op("x*D - 5"), &zero()).unwrap();
        assert_eq!(t.terms, BTreeMap::from([(0, Poly::from_ints(&[-5, 1]))]));
        let t = theta_expand(&op("D"), &zero()).unwrap();
        assert_eq!(t.terms, BTreeMap::from([(-1, Poly::from_ints(&[0, 1]))]));
        let t = theta_expand(&op("x^2*D"), &zero()).unwrap();
        assert_eq!(t.terms, BTreeMap::from([(1, Poly::from_ints(&[0, 1]))]));
        assert_eq!(t.reconstruct(), op("x^2*D"));
    }

    #[test]
    fn divisibility_examples() {
        // x^2 D^2 = θ(θ−1) is divisible by x^2 as D^2 ... in the sense x^{−2} P = D^2
        let t = theta_expand(&op("x^2*D^2"), &zero()).unwrap();
        assert!(t.divisible_by_power(2));
        let t = theta_expand(&op("x^2*D^2 + 1"), &zero()).unwrap();
        assert!(!t.divisible_by_power(1));
    }

    fn arb_op() -> impl Strategy<Value = DiffOperator> {
        prop::collection::vec(prop::collection::vec(-4i64..5, 0..4), 1..4).prop_map(|cs| {
            DiffOperator::from_polys(cs.iter().map(|c| Poly::from_ints(c)).collect())
        })
    }

    proptest! {
        #[test]
        fn reconstruction(p in arb_op(), c in -3i64..4) {
            prop_assume!(!p.is_zero());
            for at in [Location::finite(c), Location::Inf] {
                let t = theta_expand(&p, &at).unwrap();
                prop_assert_eq!(t.reconstruct(), p.clone());
                prop_assert_eq!(t.leading(), char_poly(&p, &at).unwrap());
                prop_assert_eq!(t.min_index(), weight(&p, &at).unwrap());
            }
        }

        #[test]
        fn localize_at_infinity_is_involution(p in arb_op()) {
            prop_assert_eq!(localize(&localize(&p, &Location::Inf), &Location::Inf), p);
        }

        #[test]
        fn char_poly_at_infinity_rising_oracle(p in arb_op()) {
            prop_assume!(!p.is_zero());
            // x^a D^b ↦ (−1)^b u^{b−a} rising(θ_u, b) in u = 1/x
            let w = weight(&p, &Location::Inf).unwrap();
            let mut oracle = Poly::zero();
            for (b, a) in p.coeffs().iter().enumerate() {
                let deg = b as i64 - w;
                let c = a.laurent_coeff_inf(deg);
                let sign = if b % 2 == 0 { Rat::one() } else { Rat::from(-1) };
                oracle = &oracle + &rising(b).scale(&(&c * &sign));
            }
            prop_assert_eq!(char_poly(&p, &Location::Inf).unwrap(), oracle);
        }

        #[test]
        fn char_poly_degree_bound(p in arb_op(), c in -3i64..4) {
            prop_assume!(!p.is_zero());
            let cp = char_poly(&p, &Location::finite(c)).unwrap();
            prop_assert!(cp.deg_i64() <= p.rank().unwrap() as i64);
        }
    }
}
