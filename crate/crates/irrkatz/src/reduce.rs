//! The reduction loop on multiplicity vectors and its operator-level driver.

use std::fmt;

use serde_json::json;
use thiserror::Error;

use crate::exponents::ExponentVector;
use crate::formal::{
    ad_exp, extract_formal_data, ExponentialFactor, FormalData, FormalError, LocalFactor, PointData,
    SpectralData,
};
use crate::lattice::{LatticeError, LatticeVector};
use crate::rootsys::RootBasis;
use crate::scalar::{ParamExpr, Rat};
use crate::weylalg::{ad_power, euler, prim, DiffOperator, Location, WeylError};

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("input must be nonnegative with positive rank: {0}")]
    NotPositive(String),
    #[error(transparent)]
    Formal(#[from] FormalError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error("integer resonance: {0}")]
    AssumptionViolated(String),
    #[error("exponent {0} is not a number")]
    SymbolicExponent(String),
    #[error("negative multiplicity after step {0}")]
    NegativeMultiplicity(usize),
    #[error("step {step}: predicted {expected}, extracted {found}")]
    PredictionMismatch {
        step: usize,
        expected: String,
        found: String,
    },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StepKind {
    TwistedEuler { t: Vec<usize>, defect: i64 },
    Permutation { i: usize, j: usize, s: usize },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ReductionStep {
    pub kind: StepKind,
    pub before: LatticeVector,
    pub after: LatticeVector,
}

impl ReductionStep {
    pub fn apply(&self, a: &LatticeVector) -> Result<LatticeVector, LatticeError> {
        match &self.kind {
            StepKind::TwistedEuler { t, .. } => a.sigma_t(t),
            StepKind::Permutation { i, j, s } => a.sigma_perm(*i, *j, *s),
        }
    }

    /// One JSON object; factor and slot indices one-based.
    pub fn to_json(&self, number: usize) -> serde_json::Value {
        match &self.kind {
            StepKind::TwistedEuler { t, defect } => json!({
                "step": number,
                "kind": "twisted_euler",
                "t": t.iter().map(|j| j + 1).collect::<Vec<_>>(),
                "defect": defect,
                "before": self.before.to_text(),
                "after": self.after.to_text(),
            }),
            StepKind::Permutation { i, j, s } => json!({
                "step": number,
                "kind": "permutation",
                "i": i,
                "j": j + 1,
                "s": s + 1,
                "before": self.before.to_text(),
                "after": self.after.to_text(),
            }),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Verdict {
    RealRoot,
    ImaginaryRoot { fundamental: LatticeVector },
    NotRoot,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::RealRoot => f.write_str("RealRoot"),
            Verdict::ImaginaryRoot { .. } => f.write_str("ImaginaryRoot"),
            Verdict::NotRoot => f.write_str("NotRoot"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Transcript {
    pub initial: LatticeVector,
    pub steps: Vec<ReductionStep>,
    pub verdict: Verdict,
}

impl Transcript {
    pub fn final_vector(&self) -> &LatticeVector {
        self.steps.last().map(|s| &s.after).unwrap_or(&self.initial)
    }

    pub fn euler_steps(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s.kind, StepKind::TwistedEuler { .. }))
            .count()
    }

    /// One line per step, then a summary line with the verdict.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for (k, s) in self.steps.iter().enumerate() {
            out.push_str(&s.to_json(k + 1).to_string());
            out.push('\n');
        }
        let mut summary = json!({
            "verdict": self.verdict.to_string(),
            "initial": self.initial.to_text(),
            "final": self.final_vector().to_text(),
            "twisted_euler_steps": self.euler_steps(),
        });
        if let Verdict::ImaginaryRoot { fundamental } = &self.verdict {
            summary["fundamental"] = json!(fundamental.to_text());
        }
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}

/// Apply the recorded steps to `initial`.
pub fn replay(initial: &LatticeVector, steps: &[ReductionStep]) -> Result<LatticeVector, LatticeError> {
    steps.iter().try_fold(initial.clone(), |a, s| s.apply(&a))
}

/// Sort every chain descending by adjacent swaps (bubble sort).
pub fn normalize(a: &LatticeVector) -> (LatticeVector, Vec<ReductionStep>) {
    let mut cur = a.clone();
    let mut steps = Vec::new();
    for i in 0..cur.entries.len() {
        for j in 0..cur.entries[i].len() {
            let l = cur.entries[i][j].len();
            for pass in 0..l {
                for s in 0..l.saturating_sub(pass + 1) {
                    if cur.entries[i][j][s] < cur.entries[i][j][s + 1] {
                        let next = cur.sigma_perm(i, j, s).expect("slot in range");
                        steps.push(ReductionStep {
                            kind: StepKind::Permutation { i, j, s },
                            before: cur,
                            after: next.clone(),
                        });
                        cur = next;
                    }
                }
            }
        }
    }
    (cur, steps)
}

pub fn is_sorted(a: &LatticeVector) -> bool {
    a.entries
        .iter()
        .flatten()
        .all(|c| c.windows(2).all(|w| w[0] >= w[1]))
}

/// Chains sorted and `d(a; t) ≥ 0` for every `t` in the full index set.
pub fn in_fundamental_region(a: &LatticeVector) -> bool {
    is_sorted(a)
        && a.shape
            .index_set()
            .iter()
            .all(|t| a.defect(t).map(|d| d >= 0).unwrap_or(false))
}

/// Lexicographically least tuple in `T(a)` with the smallest defect.
pub fn min_defect(a: &LatticeVector) -> Option<(Vec<usize>, i64)> {
    let mut best: Option<(Vec<usize>, i64)> = None;
    for t in a.support_indices() {
        let d = a.defect(&t).expect("tuple from the index set");
        if best.as_ref().is_none_or(|(_, b)| d < *b) {
            best = Some((t, d));
        }
    }
    best
}

pub fn reduce(a: &LatticeVector) -> Result<Transcript, ReduceError> {
    a.check_balanced()?;
    if a.rank() <= 0 || !a.is_nonnegative() {
        return Err(ReduceError::NotPositive(a.to_text()));
    }
    let mut steps = Vec::new();
    let mut cur = a.clone();
    let verdict = loop {
        let (sorted, perms) = normalize(&cur);
        steps.extend(perms);
        cur = sorted;
        if !cur.is_nonnegative() {
            break Verdict::NotRoot;
        }
        if cur.rank() <= 1 {
            break if cur.rank() == 1 { Verdict::RealRoot } else { Verdict::NotRoot };
        }
        match min_defect(&cur) {
            Some((t, d)) if d < 0 => {
                let next = cur.sigma_t(&t)?;
                steps.push(ReductionStep {
                    kind: StepKind::TwistedEuler { t, defect: d },
                    before: cur,
                    after: next.clone(),
                });
                cur = next;
            }
            _ => break Verdict::ImaginaryRoot { fundamental: cur.clone() },
        }
    };
    Ok(Transcript {
        initial: a.clone(),
        steps,
        verdict,
    })
}

/// `idx` of the input must be 2 for real roots and at most 0 for imaginary ones.
pub fn verdict_consistent(t: &Transcript) -> Result<bool, ReduceError> {
    let idx = RootBasis::build(&t.initial.shape)
        .map_err(|e| ReduceError::NotPositive(e.to_string()))?
        .idx(&t.initial);
    Ok(match t.verdict {
        Verdict::RealRoot => idx == 2,
        Verdict::ImaginaryRoot { .. } => idx <= 0,
        Verdict::NotRoot => true,
    })
}

fn numeric(e: &ParamExpr) -> Result<Rat, ReduceError> {
    e.as_rat().cloned().ok_or_else(|| ReduceError::SymbolicExponent(e.to_string()))
}

/// The formal data predicted from `(ν, m)` on the points and exponential
/// factors of `template`, with empty chains, empty factors and nonsingular
/// finite points dropped.
pub fn predicted_formal(
    template: &FormalData,
    nu: &ExponentVector,
    m: &LatticeVector,
    step: usize,
) -> Result<FormalData, ReduceError> {
    if !m.is_nonnegative() {
        return Err(ReduceError::NegativeMultiplicity(step));
    }
    let n = m.rank() as u32;
    let mut points = Vec::new();
    for (i, pt) in template.points.iter().enumerate() {
        let factors: Vec<LocalFactor> = pt
            .factors
            .iter()
            .enumerate()
            .map(|(j, fac)| LocalFactor {
                w: fac.w.clone(),
                spectral: SpectralData::new(
                    nu.entries[i][j]
                        .iter()
                        .zip(&m.entries[i][j])
                        .map(|(l, &k)| (l.clone(), k as u32))
                        .collect(),
                ),
            })
            .collect();
        let data = PointData {
            location: pt.location.clone(),
            factors,
        };
        points.push(data);
    }
    let mut out = FormalData { points }.canonical();
    out.points.retain(|p| {
        p.location.is_inf()
            || !(p.factors.len() == 1
                && p.factors[0].w.is_zero()
                && p.factors[0].spectral.chains == [(ParamExpr::zero(), n)])
    });
    Ok(out)
}

fn resonance(what: String) -> ReduceError {
    ReduceError::AssumptionViolated(what)
}

/// `E(t)` on an operator whose current exponents are `nu` and multiplicities
/// `m`, with points and exponential factors taken from `template`.
pub fn twisted_euler(
    q: &DiffOperator,
    template: &FormalData,
    nu: &ExponentVector,
    m: &LatticeVector,
    t: &[usize],
) -> Result<DiffOperator, ReduceError> {
    m.shape.check_tuple(t)?;
    let firsts: Vec<Rat> = t
        .iter()
        .enumerate()
        .map(|(i, &ti)| numeric(&nu.entries[i][ti][0]))
        .collect::<Result<_, _>>()?;
    let finite_shift: Rat = firsts[1..].iter().fold(Rat::zero(), |a, b| &a + b);
    let mu = &Rat::one() - &firsts.iter().fold(Rat::zero(), |a, b| &a + b);
    if mu.is_integer() {
        return Err(resonance(format!("Euler parameter {mu} is an integer")));
    }
    // exponents of the untwisted operator
    let w0 = &template.points[0].factors[t[0]].w;
    let inf_first = &firsts[0] + &finite_shift;
    for (j, fac) in template.points[0].factors.iter().enumerate() {
        if fac.w.sub(w0).degree() > 1 {
            continue;
        }
        for (s, l) in nu.entries[0][j].iter().enumerate() {
            let v = &numeric(l)? + &finite_shift;
            if m.entries[0][j][s] > 0 && v.is_integer() {
                return Err(resonance(format!("exponent {v} at inf")));
            }
        }
    }
    for i in 1..template.points.len() {
        for (s, l) in nu.entries[i][t[i]].iter().enumerate().skip(1) {
            let v = &(&numeric(l)? - &firsts[i]) + &inf_first;
            if m.entries[i][t[i]][s] > 0 && v.is_integer() {
                return Err(resonance(format!("{v} at {}", template.points[i].location)));
            }
        }
    }
    let factor = |i: usize| -> &ExponentialFactor { &template.points[i].factors[t[i]].w };
    let center = |i: usize| -> Rat {
        match &template.points[i].location {
            Location::Finite(c) => c.clone(),
            Location::Inf => unreachable!("point 0 is inf"),
        }
    };
    let mut cur = q.clone();
    for i in 0..template.points.len() {
        cur = ad_exp(&cur, &factor(i).neg());
    }
    for i in 1..template.points.len() {
        cur = ad_power(&cur, &center(i), &-&firsts[i]);
    }
    let mut cur = euler(&cur, &mu)?;
    for i in 1..template.points.len() {
        cur = ad_power(&cur, &center(i), &firsts[i]);
    }
    for i in 0..template.points.len() {
        cur = ad_exp(&cur, factor(i));
    }
    Ok(prim(&cur)?)
}

#[derive(Clone, Debug)]
pub struct OperatorReduction {
    pub transcript: Transcript,
    pub operator: DiffOperator,
    pub formal: FormalData,
    /// Extracted formal data after each twisted Euler step.
    pub checkpoints: Vec<FormalData>,
}

/// Run the lattice reduction of the extracted data and realize every
/// twisted Euler step on the operator, checking each result against the
/// prediction.
pub fn reduce_operator(p: &DiffOperator) -> Result<OperatorReduction, ReduceError> {
    let p = prim(p)?;
    let formal = extract_formal_data(&p)?;
    let m = LatticeVector::from_formal(&formal);
    let mut nu = ExponentVector::from_formal(&formal);
    let transcript = reduce(&m)?;
    let mut q = p.clone();
    let mut checkpoints = Vec::new();
    let mut last = formal.clone();
    for (k, step) in transcript.steps.iter().enumerate() {
        match &step.kind {
            StepKind::Permutation { i, j, s } => nu = nu.act_sigma_perm(*i, *j, *s)?,
            StepKind::TwistedEuler { t, .. } => {
                q = twisted_euler(&q, &formal, &nu, &step.before, t)?;
                nu = nu.act_sigma_t(t)?;
                let expected = predicted_formal(&formal, &nu, &step.after, k + 1)?;
                let found = extract_formal_data(&q)?.canonical();
                if expected != found || q.rank() != Some(step.after.rank() as usize) {
                    return Err(ReduceError::PredictionMismatch {
                        step: k + 1,
                        expected: expected.to_json(),
                        found: found.to_json(),
                    });
                }
                last = found.clone();
                checkpoints.push(found);
            }
        }
    }
    Ok(OperatorReduction {
        transcript,
        operator: q,
        formal: last,
        checkpoints,
    })
}
