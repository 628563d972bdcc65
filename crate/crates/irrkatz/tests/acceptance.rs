//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! `summary` runs them all and prints the full table.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use irrkatz::corpus::{corpus, find, CorpusEntry};
use irrkatz::exponents::{
    coxeter_e, coxeter_order, fuchs_defect_of, mu_vanishing_order, observed_order, two_factor_shape,
    CoxeterOrder, ExponentVector, ORDER_SEARCH_BOUND,
};
use irrkatz::formal::{extract_formal_data, fuchs_defect, FormalData};
use irrkatz::lattice::{LatticeShape, LatticeVector};
use irrkatz::reduce::{reduce, reduce_operator, StepKind, Verdict};
use irrkatz::rootsys::{Node, RootBasis, RootVector};
use irrkatz::scalar::Rat;
use irrkatz::weylalg::local::theta_expand;
use irrkatz::weylalg::transforms::{degree_from_newton, weight_inf_from_newton};
use irrkatz::weylalg::{
    ad_power, char_poly, deg_of, newton_polygon, parse_operator, prim, weight, DiffOperator, Location, Poly,
    RatFunc,
};

type Outcome = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn report(n: u32, title: &str, outcome: &Outcome) {
    match outcome {
        Ok(()) => println!("criterion {n} PASS  {title}"),
        Err(e) => println!("criterion {n} FAIL  {title}: {e}"),
    }
}

fn formal_of(name: &str) -> FormalData {
    let e = find(name).unwrap();
    e.symbolic_formal(&e.defaults())
}

fn basis_of(name: &str) -> (RootBasis, LatticeVector) {
    let f = formal_of(name);
    let m = LatticeVector::from_formal(&f);
    (RootBasis::build(&m.shape).unwrap(), m)
}

/// Edge multiplicities `−⟨c, c'⟩` and node degrees of a diagram.
fn degrees(b: &RootBasis) -> (Vec<usize>, Vec<i64>) {
    let n = b.len();
    let mut deg = vec![0; n];
    let mut mults = Vec::new();
    for a in 0..n {
        for c in 0..n {
            if a != c && b.gram[a][c] != 0 {
                deg[a] += 1;
                if a < c {
                    mults.push(-b.gram[a][c]);
                }
            }
        }
    }
    deg.sort();
    (deg, mults)
}

fn criterion_1() -> Outcome {
    let (b, m) = basis_of("Heun");
    let (deg, mults) = degrees(&b);
    ensure(deg == vec![1, 1, 1, 1, 4] && mults.iter().all(|&k| k == 1), || format!("degrees {deg:?}"))?;
    ensure(b.classify() == "D4(1)", || b.classify())?;
    // 2 c_t + Σ c(i,1,1)
    let center = b.tuple_index(&[0, 0, 0, 0]).unwrap();
    let mut expected = RootVector::zero(b.len());
    expected.coords[center] = 2;
    for i in 0..4 {
        expected.coords[b.node_index(&Node::Chain { i, j: 0, s: 0 }).unwrap()] = 1;
    }
    let lift = b.canonical_lift(&m, &[0, 0, 0, 0]).unwrap();
    ensure(lift == expected, || format!("preimage {:?}", lift.coords))?;
    ensure(b.phi(&expected) == m, || "phi of the preimage".into())?;
    ensure(b.idx(&m) == 0, || format!("idx {}", b.idx(&m)))?;
    ensure(m.sigma_t(&[0, 0, 0, 0]).unwrap() == m, || "sigma(t) moves m".into())
}

fn criterion_2() -> Outcome {
    let (b, m) = basis_of("cHeun");
    let (deg, mults) = degrees(&b);
    ensure(b.len() == 4 && deg == vec![2; 4] && mults.iter().all(|&k| k == 1), || {
        format!("degrees {deg:?}")
    })?;
    ensure(b.support_connected(&RootVector { coords: vec![1; 4] }), || "not connected".into())?;
    ensure(b.classify() == "A3(1)", || b.classify())?;
    let lift = b.canonical_lift(&m, &[0, 0, 0]).unwrap();
    ensure(lift.coords == vec![1; 4], || format!("delta {:?}", lift.coords))?;
    ensure(b.idx(&m) == 0, || format!("idx {}", b.idx(&m)))
}

fn criterion_3() -> Outcome {
    let (b, _) = basis_of("bHeun");
    let (deg, mults) = degrees(&b);
    ensure(b.len() == 3 && deg == vec![2; 3] && mults.iter().all(|&k| k == 1), || {
        format!("biconfluent degrees {deg:?}")
    })?;
    let (t, _) = basis_of("tHeun");
    ensure(t.len() == 2 && t.gram[0][1] == -2, || format!("triconfluent gram {:?}", t.gram))?;
    let (d, _) = basis_of("dHeun");
    ensure(d.len() == 4 && d.classify() == "A1(1) + A1(1)", || d.classify())?;
    let (deg, mults) = degrees(&d);
    ensure(deg == vec![1; 4] && mults.iter().all(|&k| k == 2), || format!("doubly confluent {deg:?}"))?;
    let ker = d.kernel();
    ensure(ker.len() == 1 && d.kernel_radical_check(), || format!("kernel {ker:?}"))?;
    // c_{11} + c_{22} − c_{12} − c_{21}
    let idx = |t: [usize; 2]| d.tuple_index(&t).unwrap();
    let mut expected = RootVector::zero(4);
    expected.coords[idx([0, 0])] = 1;
    expected.coords[idx([1, 1])] = 1;
    expected.coords[idx([0, 1])] = -1;
    expected.coords[idx([1, 0])] = -1;
    let k = &ker[0];
    ensure(*k == expected || k.add_scaled(&expected, 1).coords == vec![0; 4], || {
        format!("kernel vector {:?}", k.coords)
    })
}

fn criterion_4() -> Outcome {
    let (b, m) = basis_of("Gauss");
    ensure(b.idx(&m) == 2, || format!("idx {}", b.idx(&m)))?;
    let t = reduce(&m).map_err(|e| e.to_string())?;
    ensure(t.verdict == Verdict::RealRoot && t.euler_steps() == 1, || {
        format!("{} after {} steps", t.verdict, t.euler_steps())
    })?;
    let step = t.steps.iter().find(|s| matches!(s.kind, StepKind::TwistedEuler { .. })).unwrap();
    let StepKind::TwistedEuler { defect, .. } = step.kind else { unreachable!() };
    ensure(defect == -1, || format!("defect {defect}"))?;
    let p = parse_operator("x*(1-x)*D^2 + (3/5 - (1/7 + 2/11 + 1)*x)*D - (1/7)*(2/11)").unwrap();
    let r = reduce_operator(&p).map_err(|e| e.to_string())?;
    ensure(r.operator.rank() == Some(1), || format!("terminal rank {:?}", r.operator.rank()))?;
    // rank E(μ)P = rank P + d at every step
    let mut rank = p.rank().unwrap() as i64;
    let mut checkpoints = r.checkpoints.iter();
    for s in &r.transcript.steps {
        if let StepKind::TwistedEuler { defect, .. } = s.kind {
            rank += defect;
            let cp = checkpoints.next().unwrap();
            ensure(cp.rank() as i64 == rank, || format!("rank {} vs {rank}", cp.rank()))?;
        }
    }
    Ok(())
}

fn corpus_shapes() -> Vec<(String, LatticeShape)> {
    corpus()
        .iter()
        .map(|e| (e.name.to_string(), LatticeShape::from_formal(&e.symbolic_formal(&e.defaults()))))
        .collect()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut samples = 0;
    for (name, shape) in corpus_shapes() {
        let b = RootBasis::build(&shape).unwrap();
        for _ in 0..50 {
            let alpha = RootVector {
                coords: (0..b.len()).map(|_| rng.gen_range(-3i64..=3)).collect(),
            };
            samples += 1;
            let image = b.phi(&alpha);
            for (k, node) in b.nodes.iter().enumerate() {
                let lhs = b.phi(&b.reflect(&alpha, k));
                let rhs = match node {
                    Node::Tuple(t) => image.sigma_t(t).unwrap(),
                    Node::Chain { i, j, s } => image.sigma_perm(*i, *j, *s).unwrap(),
                };
                ensure(lhs == rhs, || format!("{name}: node {node} on {:?}", alpha.coords))?;
                if let Node::Tuple(t) = node {
                    let d = image.defect(t).unwrap();
                    ensure(d == -b.pair_node(k, &alpha), || format!("{name}: defect at {node}"))?;
                }
            }
        }
    }
    ensure(samples >= 200, || format!("only {samples} samples"))
}

/// `(label, shape, t, t′)` realizing `E = 0, 1, 2, 3`.
fn coxeter_cases() -> Vec<(i64, LatticeShape, Vec<usize>, Vec<usize>)> {
    let doubly = LatticeShape::new(vec![vec![1, 1], vec![1, 1]], vec![vec![vec![0, -1], vec![-1, 0]]; 2]).unwrap();
    vec![
        (0, doubly.clone(), vec![0, 0], vec![0, 1]),
        (1, two_factor_shape(-2, 0), vec![0], vec![1]),
        (2, doubly, vec![0, 0], vec![1, 1]),
        (3, two_factor_shape(-4, 0), vec![0], vec![1]),
    ]
}

fn coxeter_check(cases: &[(i64, LatticeShape, Vec<usize>, Vec<usize>)]) -> Outcome {
    let mut bad = Vec::new();
    for (e, shape, t, u) in cases {
        ensure(coxeter_e(shape, t, u) == *e, || format!("E = {} for case {e}", coxeter_e(shape, t, u)))?;
        let stated = coxeter_order(shape, t, u);
        let seen = observed_order(shape, t, u, ORDER_SEARCH_BOUND).unwrap();
        let sums = mu_vanishing_order(shape, t, u, ORDER_SEARCH_BOUND);
        if seen != stated || sums != stated {
            bad.push(format!("E={e}: stated {stated}, iteration {seen}, mu sums {sums}"));
        }
    }
    ensure(bad.is_empty(), || bad.join("; "))
}

fn criterion_6() -> Outcome {
    coxeter_check(&coxeter_cases())
}

fn criterion_6_small_e() -> Outcome {
    let cases: Vec<_> = coxeter_cases().into_iter().filter(|c| c.0 <= 1).collect();
    coxeter_check(&cases)?;
    ensure(
        cases.iter().map(|c| coxeter_order(&c.1, &c.2, &c.3)).collect::<Vec<_>>()
            == vec![CoxeterOrder::Finite(2), CoxeterOrder::Finite(3)],
        || "table".into(),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for e in corpus() {
        let f = e.symbolic_formal(&e.defaults());
        ensure(fuchs_defect(&f).is_zero(), || format!("{}: {}", e.name, fuchs_defect(&f)))?;
        let nu = ExponentVector::from_formal(&f);
        let m = LatticeVector::from_formal(&f);
        ensure(fuchs_defect_of(&nu, &m) == fuchs_defect(&f), || format!("{}: two defect formulas", e.name))?;
        let tuples = m.shape.index_set();
        for t in &tuples {
            let d = fuchs_defect_of(&nu.act_sigma_t(t).unwrap(), &m.sigma_t(t).unwrap());
            ensure(d.is_zero(), || format!("{} at {t:?}: {d}", e.name))?;
        }
        // random walks of joint steps
        for _ in 0..5 {
            let (mut nu, mut m) = (nu.clone(), m.clone());
            for _ in 0..12 {
                let t = &tuples[rng.gen_range(0..tuples.len())];
                nu = nu.act_sigma_t(t).unwrap();
                m = m.sigma_t(t).unwrap();
                let d = fuchs_defect_of(&nu, &m);
                ensure(d.is_zero(), || format!("{} walk: {d}", e.name))?;
            }
        }
    }
    Ok(())
}

fn finite_points(f: &FormalData) -> Vec<Rat> {
    f.points
        .iter()
        .filter_map(|p| match &p.location {
            Location::Finite(c) => Some(c.clone()),
            Location::Inf => None,
        })
        .collect()
}

/// `x^{−s}Q` has polynomial coefficients at `c`, checked directly.
fn directly_divisible(q: &DiffOperator, c: &Rat, s: i64) -> bool {
    q.coeffs().iter().all(|a| a.valuation_at(c).is_none_or(|v| v >= s))
}

fn criterion_8_operators() -> Vec<(String, DiffOperator)> {
    corpus()
        .iter()
        .map(|e: &CorpusEntry| (e.name.to_string(), e.operator(&e.defaults()).unwrap()))
        .collect()
}

fn criterion_8() -> Outcome {
    let mu = Rat::new(3, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut witnesses = (0, 0);
    for (name, p) in criterion_8_operators() {
        let p = prim(&p).unwrap();
        let f = extract_formal_data(&p).map_err(|e| e.to_string())?;
        for c in finite_points(&f) {
            let at = Location::Finite(c.clone());
            // characteristic polynomial shift
            let shifted = char_poly(&ad_power(&p, &c, &mu), &at).unwrap();
            let expected = char_poly(&p, &at).unwrap().taylor_shift(&-&mu);
            ensure(shifted == expected, || format!("{name}: shift at {c}"))?;
            // divisibility in both directions
            for s in 1..=3i64 {
                let xs = DiffOperator::scalar(RatFunc::from_poly(Poly::linear_root(&c).pow(s as u32)));
                let yes = &xs * &p;
                let extra = DiffOperator::monomial(
                    RatFunc::from_poly(Poly::linear_root(&c).pow(rng.gen_range(0..s) as u32)),
                    rng.gen_range(0..3),
                );
                let no = &yes + &extra;
                for (q, want) in [(&yes, true), (&no, false)] {
                    let direct = directly_divisible(q, &c, s);
                    let by_theta = theta_expand(q, &at).unwrap().divisible_by_power(s);
                    ensure(direct == want && by_theta == want, || {
                        format!("{name}: divisibility at {c}, s = {s}, expected {want}")
                    })?;
                    if want {
                        witnesses.0 += 1;
                    } else {
                        witnesses.1 += 1;
                    }
                }
            }
        }
        // degree and weight at ∞ from the Newton polygon
        let np = newton_polygon(&p, &Location::Inf).unwrap();
        let n = p.rank().unwrap() as i64;
        let lead = p.leading().num().deg_i64();
        ensure(degree_from_newton(&np, lead) == Rat::from(deg_of(&p).unwrap()), || {
            format!("{name}: degree from the Newton polygon")
        })?;
        ensure(
            weight_inf_from_newton(&np, n, lead) == Rat::from(weight(&p, &Location::Inf).unwrap()),
            || format!("{name}: weight at inf from the Newton polygon"),
        )?;
    }
    ensure(witnesses.0 > 0 && witnesses.1 > 0, || "no witnesses".into())?;
    // deg Q − deg P = m_0 − m_1
    let mut cases: Vec<(String, DiffOperator)> = criterion_8_operators();
    cases.push(("theta chain 2+1".into(), euler_operator(&[Rat::zero(), Rat::one(), Rat::new(2, 9)])));
    cases.push((
        "theta chain 3+2".into(),
        euler_operator(&[Rat::zero(), Rat::from(1), Rat::from(2), Rat::new(-4, 7), Rat::new(3, 7)]),
    ));
    let mut checked = 0;
    for (name, p) in cases {
        let p = prim(&p).unwrap();
        let f = extract_formal_data(&p).map_err(|e| e.to_string())?;
        for pt in &f.points {
            let Location::Finite(c) = &pt.location else { continue };
            for fac in pt.factors.iter().filter(|fac| fac.w.is_zero()) {
                let ch = &fac.spectral.chains;
                if ch.len() < 2 || !ch[0].0.is_zero() {
                    continue;
                }
                let l1 = ch[1].0.as_rat().unwrap().clone();
                let q = prim(&ad_power(&p, c, &-&l1)).unwrap();
                let diff = deg_of(&q).unwrap() - deg_of(&p).unwrap();
                let want = ch[0].1 as i64 - ch[1].1 as i64;
                ensure(diff == want, || format!("{name} at {c}: {diff} vs {want}"))?;
                checked += 1;
            }
        }
    }
    ensure(checked >= 8, || format!("only {checked} degree cases"))
}

/// `Π (θ − e)` for the given exponents at 0.
fn euler_operator(exps: &[Rat]) -> DiffOperator {
    let theta = DiffOperator::theta();
    exps.iter().fold(DiffOperator::one(), |acc, e| {
        &acc * &(&theta - &DiffOperator::constant(e.clone()))
    })
}

fn random_balanced(shape: &LatticeShape, rng: &mut ChaCha8Rng) -> LatticeVector {
    let n = rng.gen_range(1i64..=6);
    let entries = shape
        .chain_lens
        .iter()
        .map(|ls| {
            let slots: usize = ls.iter().sum();
            let mut flat = vec![0i64; slots];
            for _ in 0..n {
                flat[rng.gen_range(0..slots)] += 1;
            }
            let mut it = flat.into_iter();
            ls.iter().map(|&l| it.by_ref().take(l).collect()).collect()
        })
        .collect();
    LatticeVector::new(shape.clone(), entries).unwrap()
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for (name, shape) in corpus_shapes() {
        let b = RootBasis::build(&shape).unwrap();
        let f = formal_of(&name);
        let mut inputs = vec![LatticeVector::from_formal(&f)];
        inputs.extend((0..100).map(|_| random_balanced(&shape, &mut rng)));
        for a in inputs {
            let t = reduce(&a).map_err(|e| e.to_string())?;
            let idx = b.idx(&a);
            *tally.entry(t.verdict.to_string()).or_default() += 1;
            let ok = match t.verdict {
                Verdict::RealRoot => idx == 2,
                Verdict::ImaginaryRoot { .. } => idx <= 0,
                Verdict::NotRoot => true,
            };
            ensure(ok, || format!("{name}: {} with idx {idx} for {}", t.verdict, a.to_text()))?;
        }
    }
    ensure(tally.contains_key("RealRoot") && tally.contains_key("ImaginaryRoot"), || {
        format!("verdict tally {tally:?}")
    })
}

macro_rules! criterion_test {
    ($test:ident, $n:expr, $title:expr, $f:ident) => {
        #[test]
        fn $test() {
            let outcome = $f();
            report($n, $title, &outcome);
            assert!(outcome.is_ok(), "{:?}", outcome);
        }
    };
}

criterion_test!(criterion_1_heun, 1, "Heun diagram, preimage, idx, sigma(t)", criterion_1);
criterion_test!(criterion_2_confluent_heun, 2, "confluent Heun cycle and delta", criterion_2);
criterion_test!(criterion_3_other_confluent, 3, "bi-, tri- and doubly confluent diagrams", criterion_3);
criterion_test!(criterion_4_gauss, 4, "Gauss reduction at lattice and operator level", criterion_4);
criterion_test!(criterion_5_equivariance, 5, "Phi equivariance and defect pairing", criterion_5);
criterion_test!(criterion_6_orders_for_e_0_1, 6, "Coxeter orders for E = 0, 1", criterion_6_small_e);
criterion_test!(criterion_7_fuchs, 7, "Fuchs relation under joint steps", criterion_7);
criterion_test!(criterion_8_operator_engine, 8, "operator-engine conformance", criterion_8);
criterion_test!(criterion_9_verdicts, 9, "verdicts agree with idx", criterion_9);

/// The stated orders 4 and 6 for `E = 2, 3` do not hold: the recursion
/// matrix has trace `E² − 2 ≥ 2` there, so the μ-sums never vanish.
#[test]
#[ignore = "stated Coxeter orders for E = 2, 3 are not attained; run with --ignored to see the failure"]
fn criterion_6_orders_for_all_e() {
    let outcome = criterion_6();
    report(6, "Coxeter orders for E = 0, 1, 2, 3", &outcome);
    assert!(outcome.is_ok(), "{:?}", outcome);
}

#[test]
fn summary() {
    let all: Vec<(u32, &str, Outcome)> = vec![
        (1, "Heun diagram, preimage, idx, sigma(t)", criterion_1()),
        (2, "confluent Heun cycle and delta", criterion_2()),
        (3, "bi-, tri- and doubly confluent diagrams", criterion_3()),
        (4, "Gauss reduction at lattice and operator level", criterion_4()),
        (5, "Phi equivariance and defect pairing", criterion_5()),
        (6, "Coxeter orders for E = 0, 1, 2, 3", criterion_6()),
        (7, "Fuchs relation under joint steps", criterion_7()),
        (8, "operator-engine conformance", criterion_8()),
        (9, "verdicts agree with idx", criterion_9()),
    ];
    for (n, title, outcome) in &all {
        report(*n, title, outcome);
    }
    let failing: Vec<u32> = all.iter().filter(|c| c.2.is_err()).map(|c| c.0).collect();
    // criterion 6 is known to fail for E = 2, 3; everything else must pass
    assert_eq!(failing, vec![6], "failing criteria {failing:?}");
}
