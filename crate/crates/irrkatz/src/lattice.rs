//! The multiplicity lattice, twisted-Euler endomorphisms and permutations.
//!
//! Indices are zero-based internally: point `i` (0 is ∞), factor `j`, slot `s`.

use std::fmt;

use thiserror::Error;

use crate::formal::{index_product, FormalData};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("block sums differ: {0:?}")]
    Unbalanced(Vec<i64>),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("cannot parse lattice vector `{0}`")]
    Parse(String),
    #[error("vector does not fit the shape: {0}")]
    ShapeMismatch(String),
}

/// Chain lengths per factor and pairwise factor weights per point.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct LatticeShape {
    /// `chain_lens[i][j]` = number of slots of factor `j` at point `i`.
    pub chain_lens: Vec<Vec<usize>>,
    /// `weights[i][j][j']` = weight of `w_{i,j} − w_{i,j'}` at point `i`.
    pub weights: Vec<Vec<Vec<i64>>>,
}

impl LatticeShape {
    pub fn new(chain_lens: Vec<Vec<usize>>, weights: Vec<Vec<Vec<i64>>>) -> Result<Self, LatticeError> {
        if chain_lens.len() != weights.len() || chain_lens.is_empty() {
            return Err(LatticeError::ShapeMismatch("point count".into()));
        }
        for (ls, w) in chain_lens.iter().zip(&weights) {
            if ls.is_empty() || ls.contains(&0) {
                return Err(LatticeError::ShapeMismatch("empty factor".into()));
            }
            if w.len() != ls.len() || w.iter().any(|r| r.len() != ls.len()) {
                return Err(LatticeError::ShapeMismatch("weight table size".into()));
            }
            for j in 0..ls.len() {
                for jj in 0..ls.len() {
                    let bad = if j == jj { w[j][jj] != 0 } else { w[j][jj] > -1 || w[j][jj] != w[jj][j] };
                    if bad {
                        return Err(LatticeError::ShapeMismatch(format!("weight table entry ({j},{jj})")));
                    }
                }
            }
        }
        Ok(LatticeShape { chain_lens, weights })
    }

    /// Shape with one regular factor per point.
    pub fn fuchsian(chain_lens: &[usize]) -> Self {
        LatticeShape {
            chain_lens: chain_lens.iter().map(|&l| vec![l]).collect(),
            weights: chain_lens.iter().map(|_| vec![vec![0]]).collect(),
        }
    }

    pub fn from_formal(f: &FormalData) -> Self {
        let chain_lens = f
            .points
            .iter()
            .map(|p| p.factors.iter().map(|fac| fac.spectral.chains.len()).collect())
            .collect();
        let weights = f
            .points
            .iter()
            .map(|p| {
                p.factors
                    .iter()
                    .map(|a| p.factors.iter().map(|b| a.w.sub(&b.w).weight()).collect())
                    .collect()
            })
            .collect();
        LatticeShape { chain_lens, weights }
    }

    /// Number of points, `p + 1`.
    pub fn points(&self) -> usize {
        self.chain_lens.len()
    }

    /// Number of finite points `p`.
    pub fn p(&self) -> usize {
        self.points() - 1
    }

    /// Factor counts `k_i`.
    pub fn factor_counts(&self) -> Vec<usize> {
        self.chain_lens.iter().map(Vec::len).collect()
    }

    /// The index set, lexicographic.
    pub fn index_set(&self) -> Vec<Vec<usize>> {
        index_product(&self.factor_counts())
    }

    pub fn slot_count(&self) -> usize {
        self.chain_lens.iter().flatten().sum()
    }

    pub fn weight(&self, i: usize, j: usize, jj: usize) -> i64 {
        self.weights[i][j][jj]
    }

    pub fn zero_vector(&self) -> LatticeVector {
        LatticeVector {
            shape: self.clone(),
            entries: self
                .chain_lens
                .iter()
                .map(|ls| ls.iter().map(|&l| vec![0; l]).collect())
                .collect(),
        }
    }

    pub fn check_tuple(&self, t: &[usize]) -> Result<(), LatticeError> {
        if t.len() != self.points() || t.iter().zip(&self.chain_lens).any(|(&j, ls)| j >= ls.len()) {
            return Err(LatticeError::IndexOutOfRange(format!("tuple {t:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LatticeVector {
    pub shape: LatticeShape,
    /// `entries[i][j][s]`.
    pub entries: Vec<Vec<Vec<i64>>>,
}

impl LatticeVector {
    pub fn new(shape: LatticeShape, entries: Vec<Vec<Vec<i64>>>) -> Result<Self, LatticeError> {
        let fits = entries.len() == shape.points()
            && entries.iter().zip(&shape.chain_lens).all(|(e, ls)| {
                e.len() == ls.len() && e.iter().zip(ls).all(|(c, &l)| c.len() == l)
            });
        if !fits {
            return Err(LatticeError::ShapeMismatch(format!("{entries:?}")));
        }
        Ok(LatticeVector { shape, entries })
    }

    /// Multiplicity vector of formal data.
    pub fn from_formal(f: &FormalData) -> Self {
        let entries = f
            .points
            .iter()
            .map(|p| {
                p.factors
                    .iter()
                    .map(|fac| fac.spectral.chains.iter().map(|c| c.1 as i64).collect())
                    .collect()
            })
            .collect();
        LatticeVector {
            shape: LatticeShape::from_formal(f),
            entries,
        }
    }

    /// Parse the `|`-separated text form against a shape.
    pub fn parse_with(shape: &LatticeShape, text: &str) -> Result<Self, LatticeError> {
        let err = || LatticeError::Parse(text.to_string());
        let entries: Vec<Vec<Vec<i64>>> = text
            .split('|')
            .map(|pt| {
                pt.split(';')
                    .map(|fac| {
                        fac.split(',')
                            .map(|v| v.trim().parse::<i64>().map_err(|_| err()))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(shape.clone(), entries)
    }

    /// Parse with a shape inferred from the text (one factor per point unless
    /// `;` separates factors, all factor weights −1).
    pub fn parse_text(text: &str) -> Result<Self, LatticeError> {
        let lens: Vec<Vec<usize>> = text
            .split('|')
            .map(|pt| pt.split(';').map(|f| f.split(',').count()).collect())
            .collect();
        let weights = lens
            .iter()
            .map(|ls| {
                (0..ls.len())
                    .map(|j| (0..ls.len()).map(|jj| if j == jj { 0 } else { -1 }).collect())
                    .collect()
            })
            .collect();
        let shape = LatticeShape::new(lens, weights)?;
        Self::parse_with(&shape, text)
    }

    pub fn block_sum(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j].iter().sum()
    }

    pub fn point_sum(&self, i: usize) -> i64 {
        self.entries[i].iter().flatten().sum()
    }

    pub fn is_balanced(&self) -> bool {
        (1..self.shape.points()).all(|i| self.point_sum(i) == self.point_sum(0))
    }

    pub fn check_balanced(&self) -> Result<(), LatticeError> {
        if self.is_balanced() {
            Ok(())
        } else {
            Err(LatticeError::Unbalanced(
                (0..self.shape.points()).map(|i| self.point_sum(i)).collect(),
            ))
        }
    }

    /// The common block sum.
    pub fn rank(&self) -> i64 {
        self.point_sum(0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().flatten().flatten().all(|&v| v >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().flatten().all(|&v| v == 0)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.entries.iter_mut().flatten().flatten().for_each(|v| *v = -*v);
        out
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.entries.iter_mut().flatten().flatten().for_each(|v| *v *= k);
        out
    }

    /// Flattened entries in `(i, j, s)` order.
    pub fn flat(&self) -> Vec<i64> {
        self.entries.iter().flatten().flatten().copied().collect()
    }

    /// `d(a; t)`.
    pub fn defect(&self, t: &[usize]) -> Result<i64, LatticeError> {
        self.shape.check_tuple(t)?;
        let mut d = 0;
        for (i, &ti) in t.iter().enumerate() {
            let shift = if i == 0 { -1 } else { 1 };
            for j in 0..self.entries[i].len() {
                d += (-self.shape.weight(i, j, ti) + shift) * self.block_sum(i, j);
            }
            d -= self.entries[i][ti][0];
        }
        Ok(d)
    }

    /// `σ(t)`: add the defect to the first slot of every chosen factor.
    pub fn sigma_t(&self, t: &[usize]) -> Result<Self, LatticeError> {
        let d = self.defect(t)?;
        let mut out = self.clone();
        for (i, &ti) in t.iter().enumerate() {
            out.entries[i][ti][0] += d;
        }
        Ok(out)
    }

    /// Swap slots `s` and `s + 1` of factor `(i, j)`.
    pub fn sigma_perm(&self, i: usize, j: usize, s: usize) -> Result<Self, LatticeError> {
        let len = self
            .shape
            .chain_lens
            .get(i)
            .and_then(|ls| ls.get(j))
            .copied()
            .unwrap_or(0);
        if s + 1 >= len {
            return Err(LatticeError::IndexOutOfRange(format!("({i},{j},{s})")));
        }
        let mut out = self.clone();
        out.entries[i][j].swap(s, s + 1);
        Ok(out)
    }

    /// Tuples whose chosen blocks are all nonzero.
    pub fn support_indices(&self) -> Vec<Vec<usize>> {
        self.shape
            .index_set()
            .into_iter()
            .filter(|t| {
                t.iter()
                    .enumerate()
                    .all(|(i, &ti)| self.entries[i][ti].iter().any(|&v| v != 0))
            })
            .collect()
    }

    /// `|`-separated text: `,` within a chain, `;` between factors.
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|pt| {
                pt.iter()
                    .map(|c| c.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
                    .collect::<Vec<_>>()
                    .join(";")
            })
            .collect::<Vec<_>>()
            .join("|")
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LatticeVector({})", self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn heun() -> LatticeVector {
        LatticeVector::parse_with(&LatticeShape::fuchsian(&[2, 2, 2, 2]), "1,1|1,1|1,1|1,1").unwrap()
    }

    fn gauss() -> LatticeVector {
        LatticeVector::parse_with(&LatticeShape::fuchsian(&[2, 2, 2]), "1,1|1,1|1,1").unwrap()
    }

    fn triconfluent() -> LatticeVector {
        let shape = LatticeShape::new(vec![vec![1, 1]], vec![vec![vec![0, -3], vec![-3, 0]]]).unwrap();
        LatticeVector::parse_with(&shape, "1;1").unwrap()
    }

    fn doubly() -> LatticeShape {
        let w = vec![vec![0, -1], vec![-1, 0]];
        LatticeShape::new(vec![vec![1, 1], vec![1, 1]], vec![w.clone(), w]).unwrap()
    }

    #[test]
    fn ranks() {
        assert_eq!(heun().rank(), 2);
        assert_eq!(gauss().rank(), 2);
        assert_eq!(heun().shape.zero_vector().rank(), 0);
    }

    #[test]
    fn defects() {
        assert_eq!(heun().defect(&[0, 0, 0, 0]).unwrap(), 0);
        assert_eq!(gauss().defect(&[0, 0, 0]).unwrap(), -1);
        assert_eq!(triconfluent().defect(&[0]).unwrap(), 0);
        assert!(heun().defect(&[0, 1, 0, 0]).is_err());
    }

    #[test]
    fn sigma_examples() {
        let g = gauss().sigma_t(&[0, 0, 0]).unwrap();
        assert_eq!(g.to_text(), "0,1|0,1|0,1");
        assert_eq!(g.rank(), 1);
        assert_eq!(heun().sigma_t(&[0, 0, 0, 0]).unwrap(), heun());
        let a = LatticeVector::parse_with(&LatticeShape::fuchsian(&[2, 2]), "2,1|1,2").unwrap();
        let b = a.sigma_perm(0, 0, 0).unwrap();
        assert_eq!(b.to_text(), "1,2|1,2");
        assert_eq!(b.sigma_perm(0, 0, 0).unwrap(), a);
        assert!(a.sigma_perm(0, 0, 1).is_err());
    }

    #[test]
    fn support() {
        assert_eq!(heun().support_indices(), vec![vec![0, 0, 0, 0]]);
        let a = LatticeVector::parse_with(&doubly(), "1;0|0;1").unwrap();
        assert_eq!(a.support_indices(), vec![vec![0, 1]]);
        assert!(heun().shape.zero_vector().support_indices().is_empty());
    }

    #[test]
    fn text_round_trip() {
        let a = LatticeVector::parse_with(&doubly(), "1;2|0;3").unwrap();
        assert_eq!(LatticeVector::parse_with(&doubly(), &a.to_text()).unwrap(), a);
        assert!(LatticeVector::parse_with(&doubly(), "1,1|1").is_err());
        assert_eq!(LatticeVector::parse_text("1;1|2").unwrap().shape.chain_lens, vec![vec![1, 1], vec![1]]);
    }

    fn arb_heun_vec() -> impl Strategy<Value = LatticeVector> {
        prop::collection::vec(-3i64..4, 7).prop_map(|v| {
            // fix the last slot of each point to balance against point 0
            let s0 = v[0] + v[1];
            let e = vec![
                vec![vec![v[0], v[1]]],
                vec![vec![v[2], s0 - v[2]]],
                vec![vec![v[3], s0 - v[3]]],
                vec![vec![v[4], s0 - v[4]]],
            ];
            LatticeVector::new(LatticeShape::fuchsian(&[2, 2, 2, 2]), e).unwrap()
        })
    }

    proptest! {
        #[test]
        fn sigma_t_properties(a in arb_heun_vec()) {
            let t = [0, 0, 0, 0];
            let b = a.sigma_t(&t).unwrap();
            prop_assert!(b.is_balanced());
            prop_assert_eq!(b.rank() - a.rank(), a.defect(&t).unwrap());
            prop_assert_eq!(b.sigma_t(&t).unwrap(), a);
        }

        #[test]
        fn sigma_perm_properties(a in arb_heun_vec(), i in 0usize..4) {
            let b = a.sigma_perm(i, 0, 0).unwrap();
            prop_assert!(b.is_balanced());
            prop_assert_eq!(b.rank(), a.rank());
            prop_assert_eq!(b.sigma_perm(i, 0, 0).unwrap(), a);
        }
    }
}
