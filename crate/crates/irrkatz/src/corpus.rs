//! Built-in operators: the Heun family and the Gauss equation.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formal::{ExponentialFactor, FormalData, LocalFactor, PointData, SpectralData};
use crate::reduce::{reduce_operator, OperatorReduction, ReduceError};
use crate::scalar::{diff_in_integers, ParamExpr, Rat};
use crate::weylalg::{parse_operator, DiffOperator, Location, ParseError};

pub type Values = BTreeMap<String, Rat>;

/// Expected lattice-level results.
#[derive(Clone, Debug)]
pub struct Expected {
    pub label: &'static str,
    pub m: &'static str,
    pub idx: i64,
    pub verdict: &'static str,
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// Operator text with `{name}` placeholders.
    pub template: &'static str,
    pub params: &'static [&'static str],
    defaults: &'static [(&'static str, i64, i64)],
    /// Formal data with symbolic exponents; points and exponential factors
    /// depend on the numeric values.
    formal: fn(&Values) -> FormalData,
    pub expected: Expected,
}

/// Retries after an integer resonance in the operator-level driver.
pub const MAX_RETRIES: u64 = 3;

/// Seed offset between successive retries.
pub const RETRY_SEED_STRIDE: u64 = 1000;

impl CorpusEntry {
    pub fn defaults(&self) -> Values {
        self.defaults
            .iter()
            .map(|(k, n, d)| (k.to_string(), Rat::new(*n, *d)))
            .collect()
    }

    /// Seed 0 gives the defaults; other seeds draw every parameter from
    /// `ChaCha8Rng::seed_from_u64(seed)` as `n/d` with `d ∈ [2, 30]`,
    /// skipping integers, and redraw until [`CorpusEntry::is_generic`] holds.
    pub fn values_for_seed(&self, seed: u64) -> Values {
        if seed == 0 {
            return self.defaults();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let values: Values = self
                .params
                .iter()
                .map(|&name| {
                    let v = loop {
                        let r = Rat::new(rng.gen_range(-60i64..=60), rng.gen_range(2i64..=30));
                        if !r.is_integer() {
                            break r;
                        }
                    };
                    (name.to_string(), v)
                })
                .collect();
            if self.is_generic(&values) {
                return values;
            }
        }
    }

    /// No two chain exponents of one local factor differ by an integer.
    pub fn is_generic(&self, values: &Values) -> bool {
        self.numeric_formal(values).points.iter().all(|p| {
            p.factors.iter().all(|f| {
                let ls = &f.spectral.chains;
                (0..ls.len()).all(|a| {
                    (0..a).all(|b| !diff_in_integers(&ls[a].0, &ls[b].0))
                })
            })
        })
    }

    /// Template text with each placeholder replaced by `(value)`.
    pub fn instantiate(&self, values: &Values) -> String {
        let mut s = self.template.to_string();
        for (k, v) in values {
            s = s.replace(&format!("{{{k}}}"), &format!("({v})"));
        }
        s
    }

    pub fn operator(&self, values: &Values) -> Result<DiffOperator, ParseError> {
        parse_operator(&self.instantiate(values))
    }

    /// Formal data with symbolic exponents.
    pub fn symbolic_formal(&self, values: &Values) -> FormalData {
        (self.formal)(values)
    }

    /// Formal data with every parameter substituted.
    pub fn numeric_formal(&self, values: &Values) -> FormalData {
        self.symbolic_formal(values).substitute(values).canonical()
    }

    /// Operator-level reduction, re-drawing parameters on integer resonance.
    /// Returns the reduction, the values used and the number of retries.
    pub fn reduce_with_retries(&self, seed: u64) -> Result<(OperatorReduction, Values, u64), ReduceError> {
        let mut attempt = 0;
        loop {
            let s = seed.wrapping_add(attempt * RETRY_SEED_STRIDE);
            let values = self.values_for_seed(s);
            let p = self
                .operator(&values)
                .map_err(|e| ReduceError::AssumptionViolated(format!("template: {e}")))?;
            match reduce_operator(&p) {
                Err(ReduceError::AssumptionViolated(_)) if attempt < MAX_RETRIES => attempt += 1,
                Err(e) => return Err(e),
                Ok(r) => return Ok((r, values, attempt)),
            }
        }
    }
}

fn v(values: &Values, name: &str) -> Rat {
    values[name].clone()
}

fn e(text: &str) -> ParamExpr {
    text.parse().expect("corpus exponent")
}

fn factor(loc: &Location, w: &[(u32, Rat)], chains: &[&str]) -> LocalFactor {
    LocalFactor {
        w: ExponentialFactor::new(loc.clone(), w.iter().cloned().collect()),
        spectral: SpectralData::new(chains.iter().map(|c| (e(c), 1)).collect()),
    }
}

fn point(loc: Location, factors: Vec<LocalFactor>) -> PointData {
    PointData {
        location: loc,
        factors,
    }
}

fn regular(loc: Location, chains: &[&str]) -> PointData {
    let f = factor(&loc, &[], chains);
    point(loc, vec![f])
}

fn heun_formal(values: &Values) -> FormalData {
    FormalData {
        points: vec![
            regular(Location::Inf, &["a", "b"]),
            regular(Location::finite(0), &["0", "1 - c"]),
            regular(Location::finite(1), &["0", "1 - d"]),
            regular(Location::Finite(v(values, "t")), &["0", "c + d - a - b"]),
        ],
    }
}

fn cheun_formal(values: &Values) -> FormalData {
    let inf = Location::Inf;
    FormalData {
        points: vec![
            point(
                inf.clone(),
                vec![factor(&inf, &[], &["a"]), factor(&inf, &[(1, v(values, "t"))], &["c + d - a"])],
            ),
            regular(Location::finite(0), &["0", "1 - c"]),
            regular(Location::finite(1), &["0", "1 - d"]),
        ],
    }
}

fn bheun_formal(values: &Values) -> FormalData {
    let inf = Location::Inf;
    FormalData {
        points: vec![
            point(
                inf.clone(),
                vec![
                    factor(&inf, &[], &["a"]),
                    factor(&inf, &[(1, v(values, "t")), (2, Rat::one())], &["c + 1 - a"]),
                ],
            ),
            regular(Location::finite(0), &["0", "1 - c"]),
        ],
    }
}

fn theun_formal(values: &Values) -> FormalData {
    let inf = Location::Inf;
    FormalData {
        points: vec![point(
            inf.clone(),
            vec![
                factor(&inf, &[], &["a"]),
                factor(&inf, &[(1, v(values, "t")), (3, Rat::one())], &["2 - a"]),
            ],
        )],
    }
}

fn dheun_formal(values: &Values) -> FormalData {
    let inf = Location::Inf;
    let zero = Location::finite(0);
    FormalData {
        points: vec![
            point(
                inf.clone(),
                vec![factor(&inf, &[], &["a"]), factor(&inf, &[(1, Rat::one())], &["c - a"])],
            ),
            point(
                zero.clone(),
                vec![factor(&zero, &[], &["0"]), factor(&zero, &[(1, -&v(values, "t"))], &["2 - c"])],
            ),
        ],
    }
}

fn gauss_formal(_: &Values) -> FormalData {
    FormalData {
        points: vec![
            regular(Location::Inf, &["a", "b"]),
            regular(Location::finite(0), &["0", "1 - c"]),
            regular(Location::finite(1), &["0", "c - a - b"]),
        ],
    }
}

pub fn corpus() -> Vec<CorpusEntry> {
    vec![
        CorpusEntry {
            name: "Heun",
            description: "Heun, four regular singular points",
            template: "x*(x-1)*(x-{t})*D^2 + ({c}*(x-1)*(x-{t}) + {d}*x*(x-{t}) + ({a}+{b}+1-{c}-{d})*x*(x-1))*D + ({a}*{b}*x - {lambda})",
            params: &["a", "b", "c", "d", "t", "lambda"],
            defaults: &[("a", 1, 7), ("b", 2, 11), ("c", 3, 5), ("d", 5, 13), ("t", 3, 1), ("lambda", 1, 3)],
            formal: heun_formal,
            expected: Expected {
                label: "D4(1)",
                m: "1,1|1,1|1,1|1,1",
                idx: 0,
                verdict: "ImaginaryRoot",
            },
        },
        CorpusEntry {
            name: "cHeun",
            description: "confluent Heun",
            template: "x*(x-1)*D^2 + (-{t}*x*(x-1) + {c}*(x-1) + {d}*x)*D + (-{t}*{a}*x + {lambda})",
            params: &["a", "c", "d", "t", "lambda"],
            defaults: &[("a", 1, 7), ("c", 3, 5), ("d", 5, 13), ("t", 2, 1), ("lambda", 1, 3)],
            formal: cheun_formal,
            expected: Expected {
                label: "A3(1)",
                m: "1;1|1,1|1,1",
                idx: 0,
                verdict: "ImaginaryRoot",
            },
        },
        CorpusEntry {
            name: "bHeun",
            description: "biconfluent Heun",
            template: "x*D^2 + (-x^2 - {t}*x + {c})*D + (-{a}*x + {lambda})",
            params: &["a", "c", "t", "lambda"],
            defaults: &[("a", 1, 7), ("c", 3, 5), ("t", 2, 1), ("lambda", 1, 3)],
            formal: bheun_formal,
            expected: Expected {
                label: "A2(1)",
                m: "1;1|1,1",
                idx: 0,
                verdict: "ImaginaryRoot",
            },
        },
        CorpusEntry {
            name: "dHeun",
            description: "doubly confluent Heun",
            template: "x^2*D^2 + (-x^2 + {c}*x + {t})*D + (-{a}*x + {lambda})",
            params: &["a", "c", "t", "lambda"],
            defaults: &[("a", 1, 7), ("c", 3, 5), ("t", 2, 1), ("lambda", 1, 3)],
            formal: dheun_formal,
            expected: Expected {
                label: "A1(1) + A1(1)",
                m: "1;1|1;1",
                idx: 0,
                verdict: "ImaginaryRoot",
            },
        },
        CorpusEntry {
            name: "tHeun",
            description: "triconfluent Heun",
            template: "D^2 + (-x^2 - {t})*D + (-{a}*x + {lambda})",
            params: &["a", "t", "lambda"],
            defaults: &[("a", 1, 7), ("t", 2, 1), ("lambda", 1, 3)],
            formal: theun_formal,
            expected: Expected {
                label: "A1(1)",
                m: "1;1",
                idx: 0,
                verdict: "ImaginaryRoot",
            },
        },
        CorpusEntry {
            name: "Gauss",
            description: "Gauss hypergeometric",
            template: "x*(1-x)*D^2 + ({c} - ({a}+{b}+1)*x)*D - {a}*{b}",
            params: &["a", "b", "c"],
            defaults: &[("a", 1, 7), ("b", 2, 11), ("c", 3, 5)],
            formal: gauss_formal,
            expected: Expected {
                label: "D4",
                m: "1,1|1,1|1,1",
                idx: 2,
                verdict: "RealRoot",
            },
        },
    ]
}

pub fn find(name: &str) -> Option<CorpusEntry> {
    corpus().into_iter().find(|c| c.name.eq_ignore_ascii_case(name))
}
