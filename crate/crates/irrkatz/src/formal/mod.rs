//! Formal data of an operator: singular points, exponential factors in θ-form
//! and spectral data.

pub mod extract;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{diff_in_nonzero_integers, ParamExpr, Rat, ScalarError};
use crate::weylalg::{DiffOperator, Location, ThetaExpansion, WeylError};

pub use extract::{extract_formal_data, group_chains};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormalError {
    #[error("malformed formal data: {0}")]
    Malformed(String),
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("ramified point at {0} (non-integer Newton slope)")]
    RamifiedPoint(String),
    #[error("characteristic polynomial does not split over Q at {0}")]
    NonSplitCharPoly(String),
    #[error("Oshima triangular conditions fail at {0}")]
    OshimaCheckFailed(String),
    #[error("irrational singular point (leading coefficient {0})")]
    IrrationalSingularPoint(String),
    #[error("local factor ranks at {point} sum to {found}, expected {expected}")]
    RankMismatch {
        point: String,
        found: usize,
        expected: usize,
    },
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// θ-form exponential factor: `Σ w_k (x−c)^{−k}` at finite `c`, `Σ w_k x^k` at ∞.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentialFactor {
    pub point: Location,
    pub coeffs: BTreeMap<u32, Rat>,
}

impl ExponentialFactor {
    pub fn new(point: Location, coeffs: BTreeMap<u32, Rat>) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        ExponentialFactor { point, coeffs }
    }

    pub fn zero(point: Location) -> Self {
        ExponentialFactor {
            point,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest order present (0 for the zero factor).
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    /// `−deg w`, with `wt(0) = 0`.
    pub fn weight(&self) -> i64 {
        -(self.degree() as i64)
    }

    pub fn sub(&self, other: &ExponentialFactor) -> ExponentialFactor {
        let mut c = self.coeffs.clone();
        for (k, v) in &other.coeffs {
            let e = c.entry(*k).or_insert_with(Rat::zero);
            *e = &*e - v;
        }
        ExponentialFactor::new(self.point.clone(), c)
    }

    pub fn neg(&self) -> ExponentialFactor {
        ExponentialFactor::zero(self.point.clone()).sub(self)
    }
}

impl fmt::Display for ExponentialFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, v) in self.coeffs.iter().rev() {
            let mon = match &self.point {
                Location::Inf if *k == 1 => "x".to_string(),
                Location::Inf => format!("x^{k}"),
                Location::Finite(c) => {
                    let base = if c.is_zero() { "x".to_string() } else { format!("(x - {c})") };
                    format!("{base}^-{k}")
                }
            };
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{v}*{mon}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ExponentialFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w[{}]({self})", self.point)
    }
}

/// Integer chains `(λ_s; m_s)`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SpectralData {
    pub chains: Vec<(ParamExpr, u32)>,
}

impl SpectralData {
    pub fn new(chains: Vec<(ParamExpr, u32)>) -> Self {
        SpectralData { chains }
    }

    pub fn rank(&self) -> usize {
        self.chains.iter().map(|c| c.1 as usize).sum()
    }

    /// Canonical chain order: longer chains first, then integer exponents,
    /// then by value.
    pub fn sorted(&self) -> SpectralData {
        let mut chains = self.chains.clone();
        chains.sort_by(|a, b| {
            b.1.cmp(&a.1)
                .then_with(|| is_int(&b.0).cmp(&is_int(&a.0)))
                .then_with(|| a.0.cmp(&b.0))
        });
        SpectralData { chains }
    }

    /// Drop zero-multiplicity chains.
    pub fn nonzero(&self) -> SpectralData {
        SpectralData {
            chains: self.chains.iter().filter(|c| c.1 > 0).cloned().collect(),
        }
    }
}

fn is_int(e: &ParamExpr) -> bool {
    e.as_rat().is_some_and(Rat::is_integer)
}

impl fmt::Display for SpectralData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ls: Vec<String> = self.chains.iter().map(|c| c.0.to_string()).collect();
        let ms: Vec<String> = self.chains.iter().map(|c| c.1.to_string()).collect();
        write!(f, "{{({});({})}}", ls.join(", "), ms.join(", "))
    }
}

impl fmt::Debug for SpectralData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LocalFactor {
    pub w: ExponentialFactor,
    pub spectral: SpectralData,
}

impl LocalFactor {
    pub fn rank(&self) -> usize {
        self.spectral.rank()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PointData {
    pub location: Location,
    pub factors: Vec<LocalFactor>,
}

impl PointData {
    pub fn rank(&self) -> usize {
        self.factors.iter().map(LocalFactor::rank).sum()
    }
}

/// Point 0 is ∞; the factor order at each point fixes the `(i, j)` indexing.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FormalData {
    pub points: Vec<PointData>,
}

#[derive(Serialize, Deserialize)]
struct FormalJson {
    points: Vec<PointJson>,
}

#[derive(Serialize, Deserialize)]
struct PointJson {
    location: String,
    factors: Vec<FactorJson>,
}

#[derive(Serialize, Deserialize)]
struct FactorJson {
    w: Vec<(u32, String)>,
    spectral: Vec<(String, u32)>,
}

impl FormalData {
    pub fn new(points: Vec<PointData>) -> Result<Self, FormalError> {
        let fd = FormalData { points };
        fd.validate()?;
        Ok(fd)
    }

    /// Global rank; checks that every point agrees.
    pub fn rank(&self) -> usize {
        self.points.first().map(PointData::rank).unwrap_or(0)
    }

    /// Number of finite points `p`.
    pub fn finite_count(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<(), FormalError> {
        let bad = |m: String| Err(FormalError::Malformed(m));
        if self.points.is_empty() || !self.points[0].location.is_inf() {
            return bad("point 0 must be inf".into());
        }
        for (i, a) in self.points.iter().enumerate() {
            if i > 0 && a.location.is_inf() {
                return bad("inf listed twice".into());
            }
            for b in &self.points[..i] {
                if a.location == b.location {
                    return bad(format!("duplicate location {}", a.location));
                }
            }
            if a.factors.is_empty() {
                return bad(format!("no factors at {}", a.location));
            }
            for (j, f) in a.factors.iter().enumerate() {
                if f.w.point != a.location {
                    return bad(format!("factor {j} at {} has a foreign location", a.location));
                }
                if f.w.coeffs.keys().any(|&k| k == 0) {
                    return bad("exponential factors have no constant term".into());
                }
                if a.factors[..j].iter().any(|g| g.w == f.w) {
                    return bad(format!("repeated exponential factor at {}", a.location));
                }
                if f.spectral.chains.is_empty() {
                    return bad(format!("empty spectral data at {}", a.location));
                }
            }
            if a.rank() != self.points[0].rank() {
                return bad(format!(
                    "rank {} at {} differs from rank {} at inf",
                    a.rank(),
                    a.location,
                    self.points[0].rank()
                ));
            }
        }
        Ok(())
    }

    /// The product of per-point factor indices, lexicographic.
    pub fn index_set(&self) -> Vec<Vec<usize>> {
        index_product(&self.points.iter().map(|p| p.factors.len()).collect::<Vec<_>>())
    }

    pub fn substitute(&self, values: &BTreeMap<String, Rat>) -> FormalData {
        let mut out = self.clone();
        for p in &mut out.points {
            for f in &mut p.factors {
                for c in &mut f.spectral.chains {
                    c.0 = c.0.substitute(values);
                }
            }
        }
        out
    }

    /// Canonical order of chains and factors (w = 0 first, then by degree).
    pub fn canonical(&self) -> FormalData {
        let mut out = self.clone();
        for p in &mut out.points {
            for f in &mut p.factors {
                f.spectral = f.spectral.nonzero().sorted();
            }
            p.factors.retain(|f| f.rank() > 0);
            p.factors.sort_by(|a, b| factor_order(&a.w, &b.w));
        }
        out.points.sort_by(|a, b| a.location.cmp(&b.location));
        out
    }

    pub fn to_json(&self) -> String {
        let j = FormalJson {
            points: self
                .points
                .iter()
                .map(|p| PointJson {
                    location: p.location.to_string(),
                    factors: p
                        .factors
                        .iter()
                        .map(|f| FactorJson {
                            w: f.w.coeffs.iter().map(|(k, v)| (*k, v.to_string())).collect(),
                            spectral: f
                                .spectral
                                .chains
                                .iter()
                                .map(|(l, m)| (l.to_string(), *m))
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string(&j).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, FormalError> {
        let j: FormalJson =
            serde_json::from_str(text).map_err(|e| FormalError::Json(e.to_string()))?;
        let mut points = Vec::new();
        for p in j.points {
            let location: Location = p.location.parse()?;
            let mut factors = Vec::new();
            for f in p.factors {
                let mut coeffs = BTreeMap::new();
                for (k, v) in f.w {
                    if k == 0 {
                        return Err(FormalError::Malformed("order 0 in w".into()));
                    }
                    coeffs.insert(k, v.parse::<Rat>()?);
                }
                let mut chains = Vec::new();
                for (l, m) in f.spectral {
                    if m == 0 {
                        return Err(FormalError::Malformed("zero multiplicity".into()));
                    }
                    chains.push((l.parse::<ParamExpr>()?, m));
                }
                factors.push(LocalFactor {
                    w: ExponentialFactor::new(location.clone(), coeffs),
                    spectral: SpectralData::new(chains),
                });
            }
            points.push(PointData { location, factors });
        }
        FormalData::new(points)
    }

    /// Human-readable table.
    pub fn table(&self) -> String {
        let mut s = String::from("point\tfactor\tw\tspectral\n");
        for p in &self.points {
            for (j, f) in p.factors.iter().enumerate() {
                s.push_str(&format!("{}\t{}\t{}\t{}\n", p.location, j + 1, f.w, f.spectral));
            }
        }
        s
    }
}

/// Factor order: `w = 0` first, then by degree, then by coefficients.
pub fn factor_order(a: &ExponentialFactor, b: &ExponentialFactor) -> std::cmp::Ordering {
    a.degree()
        .cmp(&b.degree())
        .then_with(|| {
            let ka: Vec<_> = a.coeffs.iter().rev().collect();
            let kb: Vec<_> = b.coeffs.iter().rev().collect();
            ka.cmp(&kb)
        })
}

/// Lexicographic Cartesian product `Π {0..k_i}`.
pub fn index_product(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &k in sizes {
        let mut next = Vec::with_capacity(out.len() * k);
        for prefix in &out {
            for j in 0..k {
                let mut t = prefix.clone();
                t.push(j);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Triangular vanishing conditions for every chain, with the chain
/// exponents pairwise not differing by a nonzero integer.
pub fn oshima_check(t: &ThetaExpansion, s: &SpectralData) -> bool {
    for (i, a) in s.chains.iter().enumerate() {
        for b in &s.chains[..i] {
            if diff_in_nonzero_integers(&a.0, &b.0) {
                return false;
            }
        }
    }
    s.chains.iter().all(|(l, m)| match l.as_rat() {
        Some(l) => t.triangular_vanishing(l, *m as usize),
        None => false,
    })
}

/// `δ(λ, m) + n(n − 1)`; zero iff the Fuchs relation holds.
pub fn fuchs_defect(f: &FormalData) -> ParamExpr {
    let n = f.rank() as i64;
    let p = f.finite_count() as i64;
    let mut acc = ParamExpr::zero();
    for pt in &f.points {
        for fac in &pt.factors {
            for (l, m) in &fac.spectral.chains {
                let m = *m as i64;
                // m(2λ + m − 1)/2
                acc = &acc + &l.scale_int(m);
                acc = &acc + &ParamExpr::constant(Rat::new(m * (m - 1), 2));
            }
        }
        for (j, a) in pt.factors.iter().enumerate() {
            for (jj, b) in pt.factors.iter().enumerate() {
                if j != jj {
                    let wt = a.w.sub(&b.w).weight();
                    let term = Rat::new(wt * a.rank() as i64 * b.rank() as i64, 2);
                    acc = &acc + &ParamExpr::constant(term);
                }
            }
        }
    }
    acc = &acc - &ParamExpr::constant(Rat::new((p + 1) * n * (n - 1), 2));
    &acc + &ParamExpr::int(n * (n - 1))
}

/// Re-export for callers twisting operators by a factor.
pub fn ad_exp(p: &DiffOperator, w: &ExponentialFactor) -> DiffOperator {
    crate::weylalg::exp_twist(p, &w.point, &w.coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weylalg::parse_operator;

    fn e(s: &str) -> ParamExpr {
        s.parse().unwrap()
    }

    fn regular(loc: Location, chains: &[(&str, u32)]) -> PointData {
        PointData {
            factors: vec![LocalFactor {
                w: ExponentialFactor::zero(loc.clone()),
                spectral: SpectralData::new(chains.iter().map(|(l, m)| (e(l), *m)).collect()),
            }],
            location: loc,
        }
    }

    fn heun() -> FormalData {
        FormalData::new(vec![
            regular(Location::Inf, &[("a", 1), ("b", 1)]),
            regular(Location::finite(0), &[("0", 1), ("1 - c", 1)]),
            regular(Location::finite(1), &[("0", 1), ("1 - d", 1)]),
            regular(Location::finite(2), &[("0", 1), ("c + d - a - b", 1)]),
        ])
        .unwrap()
    }

    #[test]
    fn heun_fuchs_and_index_set() {
        let h = heun();
        assert!(fuchs_defect(&h).is_zero());
        assert_eq!(h.index_set().len(), 1);
        let mut bent = h.clone();
        bent.points[1].factors[0].spectral.chains[0].0 = e("1/5");
        assert_eq!(fuchs_defect(&bent), e("1/5"));
    }

    #[test]
    fn rank_one_trivial_fuchs() {
        let f = FormalData::new(vec![
            regular(Location::Inf, &[("0", 1)]),
            regular(Location::finite(0), &[("0", 1)]),
        ])
        .unwrap();
        assert!(fuchs_defect(&f).is_zero());
    }

    #[test]
    fn index_sets() {
        assert_eq!(index_product(&[2, 1, 1]).len(), 2);
        assert_eq!(index_product(&[2, 2]), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let h = heun();
        let text = h.to_json();
        assert!(text.starts_with(r#"{"points":[{"location":"inf","factors":[{"w":[],"spectral":[["1*a",1],["1*b",1]]}]}"#));
        let back = FormalData::from_json(&text).unwrap();
        assert_eq!(back, h);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn malformed_inputs() {
        assert!(FormalData::from_json("{").is_err());
        let unbalanced = r#"{"points":[{"location":"inf","factors":[{"w":[],"spectral":[["0",2]]}]},{"location":"0","factors":[{"w":[],"spectral":[["0",1]]}]}]}"#;
        assert!(matches!(FormalData::from_json(unbalanced), Err(FormalError::Malformed(_))));
        let finite_first = r#"{"points":[{"location":"0","factors":[{"w":[],"spectral":[["0",1]]}]}]}"#;
        assert!(FormalData::from_json(finite_first).is_err());
    }

    #[test]
    fn oshima_examples() {
        let t = |terms: Vec<(i64, Vec<i64>)>| ThetaExpansion {
            point: Location::finite(0),
            terms: terms
                .into_iter()
                .map(|(k, c)| (k, crate::weylalg::Poly::from_ints(&c)))
                .collect(),
        };
        let half = crate::weylalg::Poly::from_coeffs(vec![Rat::zero(), Rat::new(-1, 2), Rat::one()]);
        let th = ThetaExpansion {
            point: Location::finite(0),
            terms: BTreeMap::from([(0, half)]),
        };
        let s = SpectralData::new(vec![(e("0"), 1), (e("1/2"), 1)]);
        assert!(oshima_check(&th, &s));
        // p_r = t(t−1), chain (0; 2) needs p_{r+1}(0) = 0
        let chain = SpectralData::new(vec![(e("0"), 2)]);
        assert!(oshima_check(&t(vec![(0, vec![0, -1, 1]), (1, vec![0, 3])]), &chain));
        assert!(!oshima_check(&t(vec![(0, vec![0, -1, 1]), (1, vec![1, 3])]), &chain));
        // the nonsingular point 1 · D at 0: θ-expansion of D is x^{-1} θ
        let d = crate::weylalg::theta_expand(&parse_operator("D").unwrap(), &Location::finite(0)).unwrap();
        assert!(oshima_check(&d, &SpectralData::new(vec![(e("0"), 1)])));
    }

    #[test]
    fn factor_weights() {
        let inf = Location::Inf;
        let w = ExponentialFactor::new(inf.clone(), BTreeMap::from([(1, Rat::from(7)), (3, Rat::one())]));
        assert_eq!(w.weight(), -3);
        assert_eq!(w.sub(&w).weight(), 0);
        assert_eq!(w.to_string(), "1*x^3 + 7*x");
    }
}
