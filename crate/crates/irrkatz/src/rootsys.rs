//! The root lattice on `{c_t} ∪ {c(i,j,s)}`, its bilinear form, the map to
//! the multiplicity lattice, and Dynkin diagrams.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::lattice::{LatticeError, LatticeShape, LatticeVector};
use crate::scalar::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootError {
    #[error("bilinear form has positive off-diagonal entry {value} between {a} and {b}")]
    PositiveOffDiagonal { a: String, b: String, value: i64 },
    #[error("root vector does not match the basis")]
    BasisMismatch,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Node {
    /// `c_t` for an index tuple.
    Tuple(Vec<usize>),
    /// `c(i, j, s)` between slots `s` and `s + 1` of factor `(i, j)`.
    Chain { i: usize, j: usize, s: usize },
}

impl fmt::Display for Node {
    /// Factor and slot indices are printed one-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Tuple(t) => {
                let parts: Vec<String> = t.iter().map(|j| (j + 1).to_string()).collect();
                write!(f, "c_t[{}]", parts.join(","))
            }
            Node::Chain { i, j, s } => write!(f, "c({},{},{})", i, j + 1, s + 1),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RootBasis {
    pub shape: LatticeShape,
    pub nodes: Vec<Node>,
    pub gram: Vec<Vec<i64>>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RootVector {
    pub coords: Vec<i64>,
}

impl RootVector {
    pub fn zero(n: usize) -> Self {
        RootVector { coords: vec![0; n] }
    }

    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = Self::zero(n);
        v.coords[k] = 1;
        v
    }

    pub fn add_scaled(&self, other: &RootVector, k: i64) -> RootVector {
        RootVector {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + k * b).collect(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coords.iter().all(|&c| c >= 0)
    }
}

impl RootBasis {
    pub fn build(shape: &LatticeShape) -> Result<Self, RootError> {
        let tuples = shape.index_set();
        let mut nodes: Vec<Node> = tuples.iter().cloned().map(Node::Tuple).collect();
        for (i, ls) in shape.chain_lens.iter().enumerate() {
            for (j, &l) in ls.iter().enumerate() {
                for s in 0..l.saturating_sub(1) {
                    nodes.push(Node::Chain { i, j, s });
                }
            }
        }
        let p = shape.p() as i64;
        let n = nodes.len();
        let mut gram = vec![vec![0i64; n]; n];
        for a in 0..n {
            for b in 0..n {
                gram[a][b] = match (&nodes[a], &nodes[b]) {
                    (Node::Tuple(t), Node::Tuple(u)) => {
                        let mut v = -(p - 1);
                        for (i, (&ti, &ui)) in t.iter().zip(u).enumerate() {
                            v += shape.weight(i, ti, ui);
                            if ti == ui {
                                v += 1;
                            }
                        }
                        v
                    }
                    (Node::Tuple(t), Node::Chain { i, j, s }) | (Node::Chain { i, j, s }, Node::Tuple(t)) => {
                        if t[*i] == *j && *s == 0 {
                            -1
                        } else {
                            0
                        }
                    }
                    (Node::Chain { i, j, s }, Node::Chain { i: i2, j: j2, s: s2 }) => {
                        if i != i2 || j != j2 {
                            0
                        } else if s == s2 {
                            2
                        } else if s.abs_diff(*s2) == 1 {
                            -1
                        } else {
                            0
                        }
                    }
                };
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a != b && gram[a][b] > 0 {
                    return Err(RootError::PositiveOffDiagonal {
                        a: nodes[a].to_string(),
                        b: nodes[b].to_string(),
                        value: gram[a][b],
                    });
                }
            }
        }
        Ok(RootBasis {
            shape: shape.clone(),
            nodes,
            gram,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_index(&self, node: &Node) -> Option<usize> {
        self.nodes.iter().position(|n| n == node)
    }

    pub fn tuple_index(&self, t: &[usize]) -> Option<usize> {
        self.node_index(&Node::Tuple(t.to_vec()))
    }

    pub fn pair(&self, a: &RootVector, b: &RootVector) -> i64 {
        let mut acc = 0;
        for (x, &ax) in a.coords.iter().enumerate() {
            if ax == 0 {
                continue;
            }
            for (y, &by) in b.coords.iter().enumerate() {
                acc += ax * self.gram[x][y] * by;
            }
        }
        acc
    }

    /// `⟨c_k, α⟩`.
    pub fn pair_node(&self, k: usize, a: &RootVector) -> i64 {
        self.gram[k].iter().zip(&a.coords).map(|(g, c)| g * c).sum()
    }

    /// Reflection in node `k` (all nodes have self-pairing 2).
    pub fn reflect(&self, a: &RootVector, k: usize) -> RootVector {
        let mut out = a.clone();
        out.coords[k] -= self.pair_node(k, a);
        out
    }

    /// `Φ`: root lattice to multiplicity lattice.
    pub fn phi(&self, a: &RootVector) -> LatticeVector {
        let mut v = self.shape.zero_vector();
        for (k, node) in self.nodes.iter().enumerate() {
            let c = a.coords[k];
            if c == 0 {
                continue;
            }
            match node {
                Node::Tuple(t) => {
                    for (i, &ti) in t.iter().enumerate() {
                        v.entries[i][ti][0] += c;
                    }
                }
                Node::Chain { i, j, s } => {
                    v.entries[*i][*j][*s] -= c;
                    v.entries[*i][*j][*s + 1] += c;
                }
            }
        }
        v
    }

    /// Explicit preimage of `a` built around the tuple `tau`.
    pub fn canonical_lift(&self, a: &LatticeVector, tau: &[usize]) -> Result<RootVector, RootError> {
        self.shape.check_tuple(tau)?;
        let mut out = RootVector::zero(self.len());
        let m = a.rank();
        let p = self.shape.p() as i64;
        let mut center = -p * m;
        for (i, &ti) in tau.iter().enumerate() {
            center += a.block_sum(i, ti);
            for j in 0..self.shape.chain_lens[i].len() {
                if j == ti {
                    continue;
                }
                let mut t = tau.to_vec();
                t[i] = j;
                let k = self.tuple_index(&t).unwrap();
                out.coords[k] += a.block_sum(i, j);
            }
        }
        let k = self.tuple_index(tau).unwrap();
        out.coords[k] += center;
        for (k, node) in self.nodes.iter().enumerate() {
            if let Node::Chain { i, j, s } = node {
                let partial: i64 = a.entries[*i][*j][..=*s].iter().sum();
                out.coords[k] = a.block_sum(*i, *j) - partial;
            }
        }
        Ok(out)
    }

    /// `idx a = ⟨α, α⟩` for any preimage `α`.
    pub fn idx(&self, a: &LatticeVector) -> i64 {
        let tau = vec![0; self.shape.points()];
        let lift = self.canonical_lift(a, &tau).expect("tuple of zeros is valid");
        self.pair(&lift, &lift)
    }

    /// Integer matrix of `Φ` (rows: slots, columns: nodes).
    pub fn phi_matrix(&self) -> Vec<Vec<i64>> {
        let n = self.len();
        let mut cols = Vec::with_capacity(n);
        for k in 0..n {
            cols.push(self.phi(&RootVector::unit(n, k)).flat());
        }
        let rows = self.shape.slot_count();
        (0..rows).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
    }

    /// Primitive integer basis of `Ker Φ`.
    pub fn kernel(&self) -> Vec<RootVector> {
        integer_nullspace(&self.phi_matrix(), self.len())
            .into_iter()
            .map(|coords| RootVector { coords })
            .collect()
    }

    /// Kernel vectors pair to zero with every node, and the kernel has the
    /// expected dimension `Π k_i − Σ k_i + p`.
    pub fn kernel_radical_check(&self) -> bool {
        let ker = self.kernel();
        let ks = self.shape.factor_counts();
        let expected = ks.iter().product::<usize>() as i64 - ks.iter().sum::<usize>() as i64
            + self.shape.p() as i64;
        ker.len() as i64 == expected
            && ker
                .iter()
                .all(|v| (0..self.len()).all(|k| self.pair_node(k, v) == 0))
    }

    /// Nonzero coordinates form a connected subgraph of the diagram.
    pub fn support_connected(&self, a: &RootVector) -> bool {
        let supp: Vec<usize> = (0..self.len()).filter(|&k| a.coords[k] != 0).collect();
        let Some(&first) = supp.first() else {
            return false;
        };
        let mut seen = vec![first];
        let mut stack = vec![first];
        while let Some(u) = stack.pop() {
            for &v in &supp {
                if !seen.contains(&v) && self.gram[u][v] != 0 {
                    seen.push(v);
                    stack.push(v);
                }
            }
        }
        seen.len() == supp.len()
    }

    /// Graphviz text with edge multiplicity `−⟨c, c'⟩`.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph Q {\n");
        for (k, node) in self.nodes.iter().enumerate() {
            s.push_str(&format!("  n{k} [label=\"{node}\"];\n"));
        }
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                let m = -self.gram[a][b];
                if m == 1 {
                    s.push_str(&format!("  n{a} -- n{b};\n"));
                } else if m >= 2 {
                    s.push_str(&format!("  n{a} -- n{b} [label=\"{m}\"];\n"));
                }
            }
        }
        s.push_str("}\n");
        s
    }

    /// Aligned text rendering of the Gram (Cartan) matrix.
    pub fn cartan_text(&self) -> String {
        let labels: Vec<String> = self.nodes.iter().map(Node::to_string).collect();
        let lw = labels.iter().map(String::len).max().unwrap_or(0);
        let mut s = String::new();
        for (a, row) in self.gram.iter().enumerate() {
            s.push_str(&format!("{:<lw$} ", labels[a]));
            for v in row {
                s.push_str(&format!("{v:>3}"));
            }
            s.push('\n');
        }
        s
    }

    /// Diagram label from the catalog, components joined by ` + `.
    pub fn classify(&self) -> String {
        classify_gram(&self.gram)
    }
}

/// Nullspace of an integer matrix as primitive integer vectors.
pub fn integer_nullspace(rows: &[Vec<i64>], ncols: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| Rat::from(v)).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(pr) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, pr);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..ncols {
                    let sub = &f * &m[row][c];
                    m[r][c] -= &sub;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rat::zero(); ncols];
        v[free] = Rat::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -&m[r][free];
        }
        let l = crate::scalar::denominator_lcm(v.iter());
        let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * &l / x.denom()).collect();
        let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        out.push(
            ints.iter()
                .map(|x| (x / &g).to_i64().expect("small kernel entries"))
                .collect(),
        );
    }
    out
}

fn components(adj: &[Vec<i64>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut k = 0;
        while k < comp.len() {
            let u = comp[k];
            for v in 0..n {
                if !seen[v] && adj[u][v] != 0 {
                    seen[v] = true;
                    comp.push(v);
                }
            }
            k += 1;
        }
        comp.sort();
        out.push(comp);
    }
    out
}

fn isomorphic(a: &[Vec<i64>], b: &[Vec<i64>]) -> bool {
    let n = a.len();
    if n != b.len() {
        return false;
    }
    let deg = |m: &[Vec<i64>], u: usize| -> i64 { m[u].iter().sum() };
    let mut da: Vec<i64> = (0..n).map(|u| deg(a, u)).collect();
    let mut db: Vec<i64> = (0..n).map(|u| deg(b, u)).collect();
    da.sort();
    db.sort();
    if da != db {
        return false;
    }
    fn extend(a: &[Vec<i64>], b: &[Vec<i64>], map: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        let u = map.len();
        if u == a.len() {
            return true;
        }
        for v in 0..b.len() {
            if used[v] || a[u][u] != b[v][v] {
                continue;
            }
            if (0..u).all(|w| a[u][w] == b[v][map[w]]) {
                map.push(v);
                used[v] = true;
                if extend(a, b, map, used) {
                    return true;
                }
                map.pop();
                used[v] = false;
            }
        }
        false
    }
    extend(a, b, &mut Vec::new(), &mut vec![false; n])
}

fn empty(n: usize) -> Vec<Vec<i64>> {
    vec![vec![0; n]; n]
}

fn edge(m: &mut [Vec<i64>], a: usize, b: usize, k: i64) {
    m[a][b] = k;
    m[b][a] = k;
}

/// Catalog diagrams with `n` nodes as (label, multigraph adjacency).
fn catalog(n: usize) -> Vec<(String, Vec<Vec<i64>>)> {
    let mut out = Vec::new();
    if n == 1 {
        out.push(("A1".to_string(), empty(1)));
    }
    if n == 2 {
        let mut m = empty(2);
        edge(&mut m, 0, 1, 2);
        out.push(("A1(1)".to_string(), m));
    }
    if n >= 2 {
        let mut path = empty(n);
        for k in 0..n - 1 {
            edge(&mut path, k, k + 1, 1);
        }
        out.push((format!("A{n}"), path));
    }
    if n >= 3 {
        let mut cycle = empty(n);
        for k in 0..n {
            edge(&mut cycle, k, (k + 1) % n, 1);
        }
        out.push((format!("A{}(1)", n - 1), cycle));
    }
    if n >= 4 {
        // D_n: path 0..n-2 with an extra leaf on node n-3
        let mut d = empty(n);
        for k in 0..n - 2 {
            edge(&mut d, k, k + 1, 1);
        }
        edge(&mut d, n - 3, n - 1, 1);
        out.push((format!("D{n}"), d));
    }
    if n >= 5 {
        // affine D_{n-1}: two forks joined by a path
        let mut d = empty(n);
        for k in 1..n - 2 {
            edge(&mut d, k, k + 1, 1);
        }
        edge(&mut d, 0, 2, 1);
        edge(&mut d, n - 3, n - 1, 1);
        out.push((format!("D{}(1)", n - 1), d));
    }
    out
}

/// Classify a Gram matrix with diagonal 2 by its diagram.
pub fn classify_gram(gram: &[Vec<i64>]) -> String {
    let n = gram.len();
    let adj: Vec<Vec<i64>> = (0..n)
        .map(|a| (0..n).map(|b| if a == b { 0 } else { -gram[a][b] }).collect())
        .collect();
    let mut labels = Vec::new();
    for comp in components(&adj) {
        let sub: Vec<Vec<i64>> = comp
            .iter()
            .map(|&a| comp.iter().map(|&b| adj[a][b]).collect())
            .collect();
        let label = catalog(comp.len())
            .into_iter()
            .find(|(_, g)| isomorphic(&sub, g))
            .map(|(l, _)| l)
            .unwrap_or_else(|| "unrecognized".to_string());
        labels.push(label);
    }
    labels.sort();
    labels.join(" + ")
}

/// Signed sum of the coordinates, for reporting.
pub fn height(a: &RootVector) -> i64 {
    a.coords.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn heun_shape() -> LatticeShape {
        LatticeShape::fuchsian(&[2, 2, 2, 2])
    }

    fn doubly_shape() -> LatticeShape {
        let w = vec![vec![0, -1], vec![-1, 0]];
        LatticeShape::new(vec![vec![1, 1], vec![1, 1]], vec![w.clone(), w]).unwrap()
    }

    fn tri_shape() -> LatticeShape {
        LatticeShape::new(vec![vec![1, 1]], vec![vec![vec![0, -3], vec![-3, 0]]]).unwrap()
    }

    #[test]
    fn heun_is_affine_d4() {
        let b = RootBasis::build(&heun_shape()).unwrap();
        assert_eq!(b.len(), 5);
        assert_eq!(b.classify(), "D4(1)");
        let m = LatticeVector::parse_with(&heun_shape(), "1,1|1,1|1,1|1,1").unwrap();
        let lift = b.canonical_lift(&m, &[0, 0, 0, 0]).unwrap();
        assert_eq!(lift.coords, vec![2, 1, 1, 1, 1]);
        assert_eq!(b.phi(&lift), m);
        assert_eq!(b.idx(&m), 0);
        for k in 0..b.len() {
            assert_eq!(b.reflect(&lift, k), lift);
        }
    }

    #[test]
    fn small_grams() {
        let t = RootBasis::build(&tri_shape()).unwrap();
        assert_eq!(t.gram, vec![vec![2, -2], vec![-2, 2]]);
        assert_eq!(t.classify(), "A1(1)");
        let d = RootBasis::build(&doubly_shape()).unwrap();
        assert_eq!(d.classify(), "A1(1) + A1(1)");
        assert!(d.kernel_radical_check());
        let ker = d.kernel();
        assert_eq!(ker.len(), 1);
        assert_eq!(ker[0].coords.iter().map(|c| c.abs()).collect::<Vec<_>>(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn gauss_idx_and_lift() {
        let shape = LatticeShape::fuchsian(&[2, 2, 2]);
        let b = RootBasis::build(&shape).unwrap();
        let m = LatticeVector::parse_with(&shape, "1,1|1,1|1,1").unwrap();
        assert_eq!(b.canonical_lift(&m, &[0, 0, 0]).unwrap().coords, vec![2, 1, 1, 1]);
        assert_eq!(b.idx(&m), 2);
        assert_eq!(b.classify(), "D4");
        assert!(b.kernel_radical_check());
    }

    #[test]
    fn phi_on_generators() {
        let b = RootBasis::build(&heun_shape()).unwrap();
        assert_eq!(b.phi(&RootVector::unit(5, 0)).to_text(), "1,0|1,0|1,0|1,0");
        assert_eq!(b.phi(&RootVector::unit(5, 2)).to_text(), "0,0|-1,1|0,0|0,0");
    }

    #[test]
    fn dot_and_cartan() {
        let b = RootBasis::build(&tri_shape()).unwrap();
        let dot = b.to_dot();
        assert!(dot.contains("label=\"2\""));
        assert!(dot.contains("c_t[1]"));
        assert!(b.cartan_text().contains(" -2"));
    }

    #[test]
    fn catalog_shapes() {
        let cyc = |n: usize| {
            let mut g = vec![vec![0; n]; n];
            for k in 0..n {
                g[k][k] = 2;
                g[k][(k + 1) % n] = -1;
                g[(k + 1) % n][k] = -1;
            }
            g
        };
        assert_eq!(classify_gram(&cyc(3)), "A2(1)");
        assert_eq!(classify_gram(&cyc(4)), "A3(1)");
        assert_eq!(classify_gram(&[vec![2, -3], vec![-3, 2]]), "unrecognized");
    }

    fn arb_root(n: usize) -> impl Strategy<Value = RootVector> {
        prop::collection::vec(-3i64..4, n).prop_map(|coords| RootVector { coords })
    }

    proptest! {
        #[test]
        fn reflection_is_isometry(a in arb_root(5), c in arb_root(5), k in 0usize..5) {
            let b = RootBasis::build(&heun_shape()).unwrap();
            let (ra, rc) = (b.reflect(&a, k), b.reflect(&c, k));
            prop_assert_eq!(b.pair(&ra, &rc), b.pair(&a, &c));
            prop_assert_eq!(b.reflect(&ra, k), a);
        }

        #[test]
        fn lift_is_a_preimage(a in arb_root(4)) {
            let b = RootBasis::build(&doubly_shape()).unwrap();
            let v = b.phi(&a);
            for tau in b.shape.index_set() {
                let lift = b.canonical_lift(&v, &tau).unwrap();
                prop_assert_eq!(b.phi(&lift), v.clone());
                prop_assert_eq!(b.pair(&lift, &lift), b.idx(&v));
            }
        }
    }
}
