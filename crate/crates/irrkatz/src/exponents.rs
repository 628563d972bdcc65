//! Local exponent vectors and the affine action of the twisted Euler
//! generators on them.

use std::fmt;

use crate::formal::FormalData;
use crate::lattice::{LatticeError, LatticeShape, LatticeVector};
use crate::scalar::{ParamExpr, Rat};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExponentVector {
    pub shape: LatticeShape,
    /// `entries[i][j][s]`: first exponent of chain `s` of factor `j` at point `i`.
    pub entries: Vec<Vec<Vec<ParamExpr>>>,
}

/// Order of `σ(t)σ(t′)`: finite, or the marker for infinite order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CoxeterOrder {
    Finite(u32),
    Infinite,
}

impl fmt::Display for CoxeterOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoxeterOrder::Finite(m) => write!(f, "{m}"),
            CoxeterOrder::Infinite => write!(f, "inf"),
        }
    }
}

impl ExponentVector {
    pub fn new(shape: LatticeShape, entries: Vec<Vec<Vec<ParamExpr>>>) -> Result<Self, LatticeError> {
        let fits = entries.len() == shape.points()
            && entries
                .iter()
                .zip(&shape.chain_lens)
                .all(|(e, ls)| e.len() == ls.len() && e.iter().zip(ls).all(|(c, &l)| c.len() == l));
        if !fits {
            return Err(LatticeError::ShapeMismatch("exponent entries".into()));
        }
        Ok(ExponentVector { shape, entries })
    }

    pub fn from_formal(f: &FormalData) -> Self {
        let entries = f
            .points
            .iter()
            .map(|p| {
                p.factors
                    .iter()
                    .map(|fac| fac.spectral.chains.iter().map(|(l, _)| l.clone()).collect())
                    .collect()
            })
            .collect();
        ExponentVector {
            shape: LatticeShape::from_formal(f),
            entries,
        }
    }

    /// One free parameter per slot, named `nu_i_j_s` (one-based `j`, `s`).
    pub fn generic(shape: &LatticeShape) -> Self {
        let entries = shape
            .chain_lens
            .iter()
            .enumerate()
            .map(|(i, ls)| {
                ls.iter()
                    .enumerate()
                    .map(|(j, &l)| {
                        (0..l)
                            .map(|s| ParamExpr::param(&format!("nu_{}_{}_{}", i, j + 1, s + 1)))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ExponentVector {
            shape: shape.clone(),
            entries,
        }
    }

    /// `ν(t) = Σ_i ν_{t_i, 1}`.
    pub fn nu_t(&self, t: &[usize]) -> ParamExpr {
        t.iter()
            .enumerate()
            .fold(ParamExpr::zero(), |acc, (i, &ti)| &acc + &self.entries[i][ti][0])
    }

    pub fn act_sigma_t(&self, t: &[usize]) -> Result<Self, LatticeError> {
        self.shape.check_tuple(t)?;
        let gap = &ParamExpr::one() - &self.nu_t(t);
        let mut out = self.clone();
        for (i, block) in out.entries.iter_mut().enumerate() {
            let shift = if i == 0 { -1 } else { 1 };
            for (j, chain) in block.iter_mut().enumerate() {
                for (s, v) in chain.iter_mut().enumerate() {
                    if j == t[i] && s == 0 {
                        if i == 0 {
                            *v = &*v + &gap.scale_int(2);
                        }
                        continue;
                    }
                    let k = -self.shape.weight(i, j, t[i]) + shift;
                    *v = &*v - &gap.scale_int(k);
                }
            }
        }
        Ok(out)
    }

    pub fn act_sigma_perm(&self, i: usize, j: usize, s: usize) -> Result<Self, LatticeError> {
        let l = self
            .shape
            .chain_lens
            .get(i)
            .and_then(|ls| ls.get(j))
            .ok_or_else(|| LatticeError::IndexOutOfRange(format!("factor ({i},{j})")))?;
        if s + 1 >= *l {
            return Err(LatticeError::IndexOutOfRange(format!("slot {s} of ({i},{j})")));
        }
        let mut out = self.clone();
        out.entries[i][j].swap(s, s + 1);
        Ok(out)
    }

    pub fn substitute(&self, values: &std::collections::BTreeMap<String, Rat>) -> Self {
        let mut out = self.clone();
        for v in out.entries.iter_mut().flatten().flatten() {
            *v = v.substitute(values);
        }
        out
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let points: Vec<String> = self
            .entries
            .iter()
            .map(|b| {
                b.iter()
                    .map(|c| c.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
                    .collect::<Vec<_>>()
                    .join(";")
            })
            .collect();
        write!(f, "{}", points.join("|"))
    }
}

/// Fuchs relation defect `δ(ν, m) + n(n − 1)` computed from a shape, exponents
/// and multiplicities. Agrees with `formal::fuchs_defect` on formal data.
pub fn fuchs_defect_of(nu: &ExponentVector, m: &LatticeVector) -> ParamExpr {
    let shape = &nu.shape;
    let n = m.rank();
    let p = shape.p() as i64;
    let mut acc = ParamExpr::zero();
    let mut half_int = 0i64;
    for i in 0..shape.points() {
        let k = shape.chain_lens[i].len();
        for j in 0..k {
            for (s, l) in nu.entries[i][j].iter().enumerate() {
                let mult = m.entries[i][j][s];
                acc = &acc + &l.scale_int(mult);
                half_int += mult * (mult - 1);
            }
            for jj in 0..k {
                if j != jj {
                    half_int += shape.weight(i, j, jj) * m.block_sum(i, j) * m.block_sum(i, jj);
                }
            }
        }
    }
    half_int -= (p + 1) * n * (n - 1);
    &(&acc + &ParamExpr::constant(Rat::new(half_int, 2))) + &ParamExpr::int(n * (n - 1))
}

/// `E = −Σ wt(w_{t_i} − w_{t′_i}) + (p − 1) − #{i : t_i = t′_i}`.
pub fn coxeter_e(shape: &LatticeShape, t: &[usize], u: &[usize]) -> i64 {
    let mut e = shape.p() as i64 - 1;
    for i in 0..shape.points() {
        e -= shape.weight(i, t[i], u[i]);
        if t[i] == u[i] {
            e -= 1;
        }
    }
    e
}

/// Order table for `σ(t)σ(t′)` as a function of `E`: 2, 3, 4, 6 for
/// `E = 0..=3`, infinite beyond. Iteration confirms only `E = 0, 1`;
/// see [`observed_order`].
pub fn coxeter_order(shape: &LatticeShape, t: &[usize], u: &[usize]) -> CoxeterOrder {
    match coxeter_e(shape, t, u) {
        0 => CoxeterOrder::Finite(2),
        1 => CoxeterOrder::Finite(3),
        2 => CoxeterOrder::Finite(4),
        3 => CoxeterOrder::Finite(6),
        _ => CoxeterOrder::Infinite,
    }
}

pub const ORDER_SEARCH_BOUND: u32 = 12;

/// Smallest `m ≤ bound` with `(σ(t′)σ(t))^m = id` on generic symbolic
/// exponents, else the infinite marker.
pub fn observed_order(shape: &LatticeShape, t: &[usize], u: &[usize], bound: u32) -> Result<CoxeterOrder, LatticeError> {
    let start = ExponentVector::generic(shape);
    let mut cur = start.clone();
    for m in 1..=bound {
        cur = cur.act_sigma_t(t)?.act_sigma_t(u)?;
        if cur == start {
            return Ok(CoxeterOrder::Finite(m));
        }
    }
    Ok(CoxeterOrder::Infinite)
}

/// The pairs `(μ^{(u)}(t), μ^{(u)}(t′))` for `u = 1..=steps`.
pub fn mu_sequence(
    shape: &LatticeShape,
    t: &[usize],
    u: &[usize],
    nu: &ExponentVector,
    steps: usize,
) -> Vec<(ParamExpr, ParamExpr)> {
    let e = coxeter_e(shape, t, u);
    let one = ParamExpr::one();
    let mut out = Vec::with_capacity(steps);
    if steps == 0 {
        return out;
    }
    let mut mt = &one - &nu.nu_t(t);
    let mut mu = &(&one - &nu.nu_t(u)) + &mt.scale_int(e);
    out.push((mt.clone(), mu.clone()));
    for _ in 1..steps {
        mt = &(-&mt) + &mu.scale_int(e);
        mu = &(-&mu) + &mt.scale_int(e);
        out.push((mt.clone(), mu.clone()));
    }
    out
}

/// Partial sums `(Σ_{u≤k} μ^{(u)}(t), Σ_{u≤k} μ^{(u)}(t′))` for `k = 1..=steps`.
pub fn mu_partial_sums(seq: &[(ParamExpr, ParamExpr)]) -> Vec<(ParamExpr, ParamExpr)> {
    let mut acc = (ParamExpr::zero(), ParamExpr::zero());
    seq.iter()
        .map(|(a, b)| {
            acc = (&acc.0 + a, &acc.1 + b);
            acc.clone()
        })
        .collect()
}

/// First `k ≤ bound` where both partial sums vanish identically.
pub fn mu_vanishing_order(shape: &LatticeShape, t: &[usize], u: &[usize], bound: u32) -> CoxeterOrder {
    let nu = ExponentVector::generic(shape);
    let sums = mu_partial_sums(&mu_sequence(shape, t, u, &nu, bound as usize));
    sums.iter()
        .position(|(a, b)| a.is_zero() && b.is_zero())
        .map(|k| CoxeterOrder::Finite(k as u32 + 1))
        .unwrap_or(CoxeterOrder::Infinite)
}

/// Single-point shape at ∞ with two factors of mutual weight `wt`, plus
/// `extra` regular points; used to realize prescribed `E`.
pub fn two_factor_shape(wt: i64, extra: usize) -> LatticeShape {
    let mut chain_lens = vec![vec![1, 1]];
    let mut weights = vec![vec![vec![0, wt], vec![wt, 0]]];
    for _ in 0..extra {
        chain_lens.push(vec![1]);
        weights.push(vec![vec![0]]);
    }
    LatticeShape::new(chain_lens, weights).expect("valid two-factor shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::{fuchs_defect, ExponentialFactor, LocalFactor, PointData, SpectralData};
    use crate::weylalg::Location;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn e(s: &str) -> ParamExpr {
        s.parse().unwrap()
    }

    fn heun_formal() -> FormalData {
        let pt = |loc: Location, a: &str, b: &str| PointData {
            location: loc.clone(),
            factors: vec![LocalFactor {
                w: ExponentialFactor::zero(loc),
                spectral: SpectralData::new(vec![(e(a), 1), (e(b), 1)]),
            }],
        };
        FormalData::new(vec![
            pt(Location::Inf, "a", "b"),
            pt(Location::finite(0), "0", "1 - c"),
            pt(Location::finite(1), "0", "1 - d"),
            pt(Location::Finite(Rat::new(1, 3)), "0", "c + d - a - b"),
        ])
        .unwrap()
    }

    #[test]
    fn heun_sigma_keeps_fuchs() {
        let f = heun_formal();
        let nu = ExponentVector::from_formal(&f);
        let m = LatticeVector::from_formal(&f);
        assert_eq!(fuchs_defect_of(&nu, &m), fuchs_defect(&f));
        assert!(fuchs_defect(&f).is_zero());
        let t = [0, 0, 0, 0];
        assert_eq!(nu.nu_t(&t), e("a"));
        let nu2 = nu.act_sigma_t(&t).unwrap();
        let m2 = m.sigma_t(&t).unwrap();
        assert!(fuchs_defect_of(&nu2, &m2).is_zero());
        assert_eq!(nu2.act_sigma_t(&t).unwrap(), nu);
    }

    #[test]
    fn fixed_when_nu_t_is_one() {
        let shape = LatticeShape::fuchsian(&[2, 2]);
        let nu = ExponentVector::new(
            shape,
            vec![vec![vec![e("1/3"), e("a")]], vec![vec![e("2/3"), e("b")]]],
        )
        .unwrap();
        assert_eq!(nu.act_sigma_t(&[0, 0]).unwrap(), nu);
    }

    #[test]
    fn permutation_swaps() {
        let f = heun_formal();
        let nu = ExponentVector::from_formal(&f);
        let sw = nu.act_sigma_perm(1, 0, 0).unwrap();
        assert_eq!(sw.entries[1][0], vec![e("1 - c"), e("0")]);
        assert_eq!(sw.act_sigma_perm(1, 0, 0).unwrap(), nu);
        assert!(nu.act_sigma_perm(1, 0, 1).is_err());
    }

    #[test]
    fn permutation_commutes_away_from_tuple() {
        let shape = LatticeShape::new(
            vec![vec![2, 1], vec![2]],
            vec![vec![vec![0, -1], vec![-1, 0]], vec![vec![0]]],
        )
        .unwrap();
        let nu = ExponentVector::generic(&shape);
        let t = [1, 0];
        // block (0, 0) is avoided by t_0 = 1
        let a = nu.act_sigma_perm(0, 0, 0).unwrap().act_sigma_t(&t).unwrap();
        let b = nu.act_sigma_t(&t).unwrap().act_sigma_perm(0, 0, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn e_values_of_small_shapes() {
        let dc = LatticeShape::new(
            vec![vec![1, 1], vec![1, 1]],
            vec![vec![vec![0, -1], vec![-1, 0]]; 2],
        )
        .unwrap();
        assert_eq!(coxeter_e(&dc, &[0, 0], &[1, 1]), 2);
        assert_eq!(coxeter_e(&dc, &[0, 0], &[0, 1]), 0);
        assert_eq!(coxeter_e(&two_factor_shape(-2, 0), &[0], &[1]), 1);
        assert_eq!(coxeter_e(&two_factor_shape(-4, 0), &[0], &[1]), 3);
        assert_eq!(coxeter_order(&dc, &[0, 0], &[0, 1]), CoxeterOrder::Finite(2));
        assert_eq!(coxeter_order(&two_factor_shape(-5, 0), &[0], &[1]), CoxeterOrder::Infinite);
    }

    #[test]
    fn observed_orders_for_small_e() {
        let dc = LatticeShape::new(
            vec![vec![1, 1], vec![1, 1]],
            vec![vec![vec![0, -1], vec![-1, 0]]; 2],
        )
        .unwrap();
        assert_eq!(observed_order(&dc, &[0, 0], &[0, 1], 12).unwrap(), CoxeterOrder::Finite(2));
        assert_eq!(mu_vanishing_order(&dc, &[0, 0], &[0, 1], 12), CoxeterOrder::Finite(2));
        let s = two_factor_shape(-2, 0);
        assert_eq!(observed_order(&s, &[0], &[1], 12).unwrap(), CoxeterOrder::Finite(3));
        assert_eq!(mu_vanishing_order(&s, &[0], &[1], 12), CoxeterOrder::Finite(3));
    }

    #[test]
    fn large_e_never_closes() {
        let s = two_factor_shape(-5, 0);
        assert_eq!(coxeter_e(&s, &[0], &[1]), 4);
        assert_eq!(observed_order(&s, &[0], &[1], 12).unwrap(), CoxeterOrder::Infinite);
        assert_eq!(mu_vanishing_order(&s, &[0], &[1], 12), CoxeterOrder::Infinite);
    }

    fn arb_rat() -> impl Strategy<Value = Rat> {
        (-20i64..20, 1i64..7).prop_map(|(n, d)| Rat::new(n, d))
    }

    proptest! {
        #[test]
        fn sigma_t_is_involutive(vals in prop::collection::vec(arb_rat(), 8), t in prop::collection::vec(0usize..2, 2)) {
            let shape = LatticeShape::new(
                vec![vec![2, 1], vec![1, 2]],
                vec![vec![vec![0, -2], vec![-2, 0]], vec![vec![0, -1], vec![-1, 0]]],
            ).unwrap();
            let nu = ExponentVector::generic(&shape);
            let mut values = BTreeMap::new();
            let names = ["nu_0_1_1", "nu_0_1_2", "nu_0_2_1", "nu_1_1_1", "nu_1_2_1", "nu_1_2_2"];
            for (n, v) in names.iter().zip(vals) {
                values.insert(n.to_string(), v);
            }
            let nu = nu.substitute(&values);
            prop_assert_eq!(nu.act_sigma_t(&t).unwrap().act_sigma_t(&t).unwrap(), nu);
        }
    }
}
