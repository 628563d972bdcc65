//! Command-line front end for the `irrkatz` binary.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::corpus::{corpus, find, CorpusEntry, Values};
use crate::formal::{extract_formal_data, fuchs_defect, FormalData, FormalError};
use crate::lattice::{LatticeError, LatticeShape, LatticeVector};
use crate::reduce::{reduce, reduce_operator, verdict_consistent, ReduceError, Verdict};
use crate::rootsys::{RootBasis, RootError};
use crate::scalar::Rat;
use crate::weylalg::{parse_operator, DiffOperator, ParseError};

#[derive(Parser, Debug)]
#[command(name = "irrkatz", version, about = "Twisted Euler transforms and root lattices of differential operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Extract formal data; JSON on stdout, table on stderr.
    Analyze(AnalyzeArgs),
    /// Classify the root-lattice diagram of formal data.
    Diagram(DiagramArgs),
    /// Run the reduction on the multiplicity vector.
    Reduce(ReduceArgs),
    /// Check the Fuchs relation.
    Fuchs(FuchsArgs),
    /// List the built-in corpus, or check it with `--run`.
    Examples(ExamplesArgs),
}

/// Corpus selection shared by the subcommands.
#[derive(Args, Debug, Clone, Default)]
pub struct InstanceArgs {
    /// Corpus entry name.
    #[arg(long)]
    pub only: Option<String>,
    /// Parameter seed; 0 selects the corpus defaults.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Parameter override `name=p/q`, repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, Rat)>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Operator text, e.g. "x*D - 5".
    #[arg(long)]
    pub op: Option<String>,
    /// File holding the operator text.
    #[arg(long)]
    pub file: Option<String>,
    #[command(flatten)]
    pub instance: InstanceArgs,
}

#[derive(Args, Debug)]
pub struct DiagramArgs {
    /// Formal data JSON file (`-` for stdin).
    #[arg(long)]
    pub formal: Option<String>,
    /// Write Graphviz output here (`-` for stdout).
    #[arg(long)]
    pub dot: Option<String>,
    /// Print the Gram matrix.
    #[arg(long)]
    pub gram: bool,
    #[command(flatten)]
    pub instance: InstanceArgs,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    /// Formal data JSON file (`-` for stdin).
    #[arg(long)]
    pub formal: Option<String>,
    /// Multiplicity vector in `|` text form; with `--formal` the shape is
    /// taken from the formal data.
    #[arg(long)]
    pub vector: Option<String>,
    /// Also realize the reduction on this operator.
    #[arg(long)]
    pub operator: Option<String>,
    /// Emit only the JSON-lines transcript.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub instance: InstanceArgs,
}

#[derive(Args, Debug)]
pub struct FuchsArgs {
    /// Formal data JSON file (`-` for stdin).
    #[arg(long)]
    pub formal: Option<String>,
    #[command(flatten)]
    pub instance: InstanceArgs,
}

#[derive(Args, Debug)]
pub struct ExamplesArgs {
    /// Check every entry against its expected results.
    #[arg(long)]
    pub run: bool,
    /// Emit the listing as JSON.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub instance: InstanceArgs,
}

fn parse_param(s: &str) -> Result<(String, Rat), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s}"))?;
    let r: Rat = v.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((k.trim().to_string(), r))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("parse error at {}: {}", .0.pos, .0.msg)]
    Parse(ParseError),
    #[error(transparent)]
    Formal(#[from] FormalError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("{0}")]
    Check(String),
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e)
    }
}

fn formal_exit(e: &FormalError) -> i32 {
    match e {
        FormalError::Malformed(_) | FormalError::Json(_) | FormalError::Scalar(_) => 2,
        FormalError::OshimaCheckFailed(_) => 4,
        _ => 3,
    }
}

/// 2 parse or malformed input, 3 ramified or unsupported, 4 Oshima failure,
/// 5 integer resonance, 1 failed check.
pub fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Usage(_) | CliError::Io(_) | CliError::Parse(_) | CliError::Lattice(_) | CliError::Root(_) => 2,
        CliError::Formal(f) => formal_exit(f),
        CliError::Reduce(r) => match r {
            ReduceError::Lattice(_) | ReduceError::NotPositive(_) | ReduceError::SymbolicExponent(_) => 2,
            ReduceError::Formal(f) => formal_exit(f),
            ReduceError::Weyl(_) => 3,
            ReduceError::AssumptionViolated(_) => 5,
            ReduceError::NegativeMultiplicity(_) | ReduceError::PredictionMismatch { .. } => 1,
        },
        CliError::Check(_) => 1,
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(&a, out, err),
        Command::Diagram(a) => cmd_diagram(&a, out),
        Command::Reduce(a) => cmd_reduce(&a, out, err),
        Command::Fuchs(a) => cmd_fuchs(&a, out),
        Command::Examples(a) => cmd_examples(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn read_source(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn entry(name: &str) -> Result<CorpusEntry, CliError> {
    find(name).ok_or_else(|| CliError::Usage(format!("unknown corpus entry {name}")))
}

fn instance_values(e: &CorpusEntry, inst: &InstanceArgs) -> Result<Values, CliError> {
    let mut values = e.values_for_seed(inst.seed);
    for (k, v) in &inst.params {
        if !values.contains_key(k) {
            return Err(CliError::Usage(format!("{} has no parameter {k}", e.name)));
        }
        values.insert(k.clone(), v.clone());
    }
    Ok(values)
}

fn instance_operator(inst: &InstanceArgs) -> Result<Option<DiffOperator>, CliError> {
    match &inst.only {
        None => Ok(None),
        Some(name) => {
            let e = entry(name)?;
            Ok(Some(e.operator(&instance_values(&e, inst)?)?))
        }
    }
}

/// Formal data from `--formal`, else extracted from the selected corpus entry.
fn load_formal(path: &Option<String>, inst: &InstanceArgs) -> Result<FormalData, CliError> {
    if let Some(p) = path {
        return Ok(FormalData::from_json(&read_source(p)?)?);
    }
    match instance_operator(inst)? {
        Some(op) => Ok(extract_formal_data(&op)?.canonical()),
        None => Err(CliError::Usage("expected --formal or --only".into())),
    }
}

fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let op = match (&a.op, &a.file) {
        (Some(text), None) => parse_operator(text)?,
        (None, Some(path)) => parse_operator(read_source(path)?.trim())?,
        (None, None) => instance_operator(&a.instance)?
            .ok_or_else(|| CliError::Usage("expected --op, --file or --only".into()))?,
        _ => return Err(CliError::Usage("--op and --file are exclusive".into())),
    };
    let f = extract_formal_data(&op)?.canonical();
    writeln!(out, "{}", f.to_json())?;
    write!(err, "{}", f.table())?;
    writeln!(err, "rank {}, {} finite singular point(s)", f.rank(), f.finite_count())?;
    Ok(0)
}

fn write_dot(target: &str, dot: &str, out: &mut dyn Write) -> Result<(), CliError> {
    if target == "-" {
        write!(out, "{dot}")?;
    } else {
        std::fs::write(target, dot)?;
    }
    Ok(())
}

fn cmd_diagram(a: &DiagramArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let f = load_formal(&a.formal, &a.instance)?;
    let basis = RootBasis::build(&LatticeShape::from_formal(&f))?;
    writeln!(out, "{}", basis.classify())?;
    if a.gram {
        write!(out, "{}", basis.cartan_text())?;
    }
    if let Some(target) = &a.dot {
        write_dot(target, &basis.to_dot(), out)?;
    }
    Ok(0)
}

fn cmd_reduce(a: &ReduceArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let m = match (&a.vector, &a.formal, &a.instance.only) {
        (Some(text), Some(_), _) | (Some(text), None, Some(_)) => {
            let f = load_formal(&a.formal, &a.instance)?;
            LatticeVector::parse_with(&LatticeShape::from_formal(&f), text)?
        }
        (Some(text), None, None) => LatticeVector::parse_text(text)?,
        (None, _, _) => LatticeVector::from_formal(&load_formal(&a.formal, &a.instance)?),
    };
    let transcript = reduce(&m)?;
    let idx = RootBasis::build(&m.shape)?.idx(&m);
    write!(out, "{}", transcript.to_json_lines())?;
    if !a.json {
        writeln!(out, "verdict: {}", transcript.verdict)?;
        writeln!(out, "idx: {idx}")?;
        writeln!(out, "twisted Euler steps: {}", transcript.euler_steps())?;
    }
    if !verdict_consistent(&transcript)? {
        return Err(CliError::Check(format!("verdict {} with idx {idx}", transcript.verdict)));
    }
    let realized = if let Some(text) = &a.operator {
        Some(reduce_operator(&parse_operator(text)?)?)
    } else if a.formal.is_none() && a.vector.is_none() {
        match &a.instance.only {
            Some(name) if a.instance.params.is_empty() => Some(entry(name)?.reduce_with_retries(a.instance.seed)?.0),
            Some(_) => Some(reduce_operator(&instance_operator(&a.instance)?.expect("entry selected"))?),
            None => None,
        }
    } else {
        None
    };
    if let Some(r) = realized {
        writeln!(err, "terminal operator (rank {}): {}", r.operator.rank().unwrap_or(0), r.operator)?;
        if r.transcript.verdict != transcript.verdict {
            return Err(CliError::Check("operator reduction disagrees with the lattice".into()));
        }
    }
    Ok(0)
}

fn cmd_fuchs(a: &FuchsArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let f = match (&a.formal, &a.instance.only) {
        (None, Some(name)) => {
            let e = entry(name)?;
            let values = instance_values(&e, &a.instance)?;
            e.symbolic_formal(&values)
        }
        _ => load_formal(&a.formal, &a.instance)?,
    };
    let d = fuchs_defect(&f);
    writeln!(out, "{d}")?;
    Ok(if d.is_zero() { 0 } else { 1 })
}

/// Everything `examples --run` checks for one entry; empty on success.
pub fn check_entry(e: &CorpusEntry, values: &Values, seed: u64, verbose: &mut dyn Write) -> Result<Vec<String>, CliError> {
    let mut problems = Vec::new();
    let op = e.operator(values)?;
    let f = extract_formal_data(&op)?.canonical();
    if f != e.numeric_formal(values) {
        problems.push("extracted formal data differs from the expected data".to_string());
    }
    let m = LatticeVector::from_formal(&f);
    if m.to_text() != e.expected.m {
        problems.push(format!("m = {}, expected {}", m.to_text(), e.expected.m));
    }
    let basis = RootBasis::build(&m.shape)?;
    let label = basis.classify();
    if label != e.expected.label {
        problems.push(format!("diagram {label}, expected {}", e.expected.label));
    }
    let idx = basis.idx(&m);
    if idx != e.expected.idx {
        problems.push(format!("idx {idx}, expected {}", e.expected.idx));
    }
    let t = reduce(&m)?;
    if t.verdict.to_string() != e.expected.verdict {
        problems.push(format!("verdict {}, expected {}", t.verdict, e.expected.verdict));
    }
    if !verdict_consistent(&t)? {
        problems.push("verdict inconsistent with idx".into());
    }
    let defect = fuchs_defect(&e.symbolic_formal(values));
    if !defect.is_zero() {
        problems.push(format!("Fuchs defect {defect}"));
    }
    let realized = if e.params.iter().all(|p| values.get(*p) == e.values_for_seed(seed).get(*p)) {
        e.reduce_with_retries(seed).map(|r| r.0)
    } else {
        reduce_operator(&op)
    };
    match realized {
        Ok(r) => {
            let want = if t.verdict == Verdict::RealRoot { 1 } else { f.rank() };
            if r.operator.rank() != Some(want) {
                problems.push(format!("terminal operator rank {:?}, expected {want}", r.operator.rank()));
            }
        }
        Err(err) => problems.push(format!("operator reduction: {err}")),
    }
    writeln!(verbose, "{}: {} | m = {} | idx = {} | {}", e.name, label, m.to_text(), idx, t.verdict)?;
    Ok(problems)
}

fn cmd_examples(a: &ExamplesArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let entries: Vec<CorpusEntry> = match &a.instance.only {
        Some(name) => vec![entry(name)?],
        None => corpus(),
    };
    if !a.run {
        if a.json {
            let rows: Vec<serde_json::Value> = entries
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "name": e.name,
                        "operator": e.template,
                        "defaults": e.defaults().iter().map(|(k, v)| (k.clone(), v.to_string())).collect::<BTreeMap<_, _>>(),
                        "diagram": e.expected.label,
                        "m": e.expected.m,
                        "idx": e.expected.idx,
                        "verdict": e.expected.verdict,
                    })
                })
                .collect();
            writeln!(out, "{}", serde_json::Value::Array(rows))?;
        } else {
            for e in &entries {
                writeln!(
                    out,
                    "{:<6} {:<14} m = {:<16} idx = {:>2}  {:<13}  {}",
                    e.name, e.expected.label, e.expected.m, e.expected.idx, e.expected.verdict, e.template
                )?;
            }
        }
        return Ok(0);
    }
    let mut failed = 0;
    for e in &entries {
        let values = instance_values(e, &a.instance)?;
        let problems = match check_entry(e, &values, a.instance.seed, out) {
            Ok(p) => p,
            Err(err) => vec![err.to_string()],
        };
        if a.instance.only.is_some() {
            let f = e.numeric_formal(&values);
            let basis = RootBasis::build(&LatticeShape::from_formal(&f))?;
            write!(out, "{}", basis.to_dot())?;
        }
        if problems.is_empty() {
            writeln!(out, "PASS {}", e.name)?;
        } else {
            failed += 1;
            writeln!(out, "FAIL {}: {}", e.name, problems.join("; "))?;
        }
    }
    writeln!(out, "{} of {} entries passed", entries.len() - failed, entries.len())?;
    Ok(if failed == 0 { 0 } else { 1 })
}
