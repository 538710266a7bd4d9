use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quadpoly::engine::{cross_check, default_bound, predict_exceptions, Agreement, EngineError};
use quadpoly::io::{report, InstanceDocument};
use quadpoly::oracle::{self, OracleError, RepresentedSet};
use quadpoly::{analyze, Analysis, Decision};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "quadpoly", version, about = "Almost universality of shifted ternary quadratic forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full decision and print the JSON report.
    Analyze(Source),
    /// Local universality at 2 and at the odd primes of the discriminant.
    LocalScan {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        json: bool,
    },
    /// Brute-force values of the coset up to a bound.
    Enumerate {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1000)]
        bound: u64,
        /// List the missed members of the target progression instead.
        #[arg(long)]
        gaps: bool,
        /// Print a witness for one value and exit.
        #[arg(long, value_name = "V")]
        witness: Option<u64>,
        #[arg(long)]
        json: bool,
        /// Maximum number of lattice points to visit.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Predicted members of the exceptional family.
    Exceptions {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long)]
        json: bool,
    },
    /// Decide every row of a CSV file and cross-check with the oracle.
    Batch {
        /// CSV with columns g11,g12,g13,g22,g23,g33,n1,n2,n3,den[,label].
        path: PathBuf,
        /// Oracle bound; defaults to max(100000, twice the first predicted exception).
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        budget: Option<u64>,
    },
}

#[derive(Args)]
struct Source {
    /// JSON instance document, `-` for stdin.
    #[arg(conflicts_with_all = ["gram", "shift"], required_unless_present = "gram")]
    input: Option<PathBuf>,
    /// Upper triangle g11,g12,g13,g22,g23,g33.
    #[arg(long, requires = "shift", allow_hyphen_values = true)]
    gram: Option<String>,
    /// Shift n1,n2,n3/den.
    #[arg(long, requires = "gram", allow_hyphen_values = true)]
    shift: Option<String>,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::Lattice(e) => Failure::Input(e.to_string()),
        e => Failure::Internal(e.to_string()),
    }
}

impl Source {
    fn document(&self) -> Result<InstanceDocument, Failure> {
        if let (Some(g), Some(s)) = (&self.gram, &self.shift) {
            let (nums, den) = s.split_once('/').unwrap_or((s.as_str(), "1"));
            let mut fields: Vec<&str> = g.split(',').collect();
            fields.extend(nums.split(','));
            fields.push(den);
            return InstanceDocument::from_fields(&fields).map_err(|e| Failure::Input(e.to_string()));
        }
        let path = self.input.as_ref().expect("clap requires a source");
        let text = if path.as_os_str() == "-" {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        } else {
            std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        };
        InstanceDocument::from_json_str(&text).map_err(|e| Failure::Input(e.to_string()))
    }

    fn analysis(&self) -> Result<(InstanceDocument, Analysis), Failure> {
        let doc = self.document()?;
        let (gram, shift) = doc.parse().map_err(|e| Failure::Input(e.to_string()))?;
        let analysis = analyze(&gram, &shift).map_err(engine_failure)?;
        Ok((doc, analysis))
    }
}

fn print_json(v: &Value) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(|e| Failure::Internal(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn cmd_local_scan(source: &Source, as_json: bool) -> Result<(), Failure> {
    let (doc, analysis) = source.analysis()?;
    if as_json {
        return print_json(&report(&analysis, &doc)["locals"]);
    }
    for r in &analysis.locals {
        let method = serde_json::to_value(r.method).map_err(|e| Failure::Internal(e.to_string()))?;
        let method = method.as_str().unwrap_or_default();
        match r.missed_class {
            None => println!("q = {}: universal ({method}, precision {})", r.prime, r.precision_used),
            Some(c) => println!("q = {}: misses the class of {} ({method}, precision {})", r.prime, c.representative, r.precision_used),
        }
    }
    Ok(())
}

fn enumeration(analysis: &Analysis, bound: u64, budget: Option<u64>) -> Result<RepresentedSet, Failure> {
    match oracle::enumerate(&analysis.coset, bound, budget) {
        Ok(set) => Ok(set),
        Err(OracleError::BudgetExceeded { visited, partial }) => {
            eprintln!("warning: budget exhausted after {visited} points, listing is partial");
            Ok(*partial)
        }
        Err(OracleError::Enumeration(e)) => Err(Failure::Input(e.to_string())),
    }
}

fn cmd_enumerate(
    source: &Source,
    bound: u64,
    gaps: bool,
    witness: Option<u64>,
    as_json: bool,
    budget: Option<u64>,
) -> Result<(), Failure> {
    let (_, analysis) = source.analysis()?;
    if let Some(v) = witness {
        let found = oracle::witness(&analysis.coset, v).map_err(|e| Failure::Input(e.to_string()))?;
        if as_json {
            return print_json(&json!({ "value": v, "witness": found }));
        }
        match found {
            Some([a, b, c]) => println!("x = ({a},{b},{c})"),
            None => println!("{v} is not represented"),
        }
        return Ok(());
    }
    let progression = analysis.progression.filter(|&(s, m)| s >= 0 && m > 0).map(|(s, m)| (s as u64, m as u64));
    if gaps && progression.is_none() {
        return Err(Failure::Input("the coset has no integral target progression".into()));
    }
    if let Some((start, _)) = progression.filter(|&(s, _)| s > bound) {
        eprintln!("warning: bound {bound} is below the progression start {start}; the progression is empty");
    }
    let set = enumeration(&analysis, bound, budget)?;
    let mut out = io::stdout().lock();
    if as_json {
        let mut doc = json!({
            "fingerprint": set.fingerprint,
            "bound": bound,
            "authoritative": set.authoritative(),
            "stats": set.stats,
        });
        if let Some((start, step)) = progression {
            doc["progression"] = json!({ "start": start, "step": step });
        }
        if gaps {
            let (start, step) = progression.expect("checked above");
            let list = set.gaps(start, step);
            doc["gaps"] = json!(list.iter().map(|&n| json!({ "n": n, "value": start + step * n })).collect::<Vec<_>>());
            doc["stabilization"] = serde_json::to_value(set.stabilization(start, step, 0.5)).expect("plain enum");
        } else {
            doc["values"] = json!(set.values().collect::<Vec<_>>());
        }
        drop(out);
        return print_json(&doc);
    }
    if gaps {
        let (start, step) = progression.expect("checked above");
        writeln!(out, "n,value")?;
        for n in set.gaps(start, step) {
            writeln!(out, "{n},{}", start + step * n)?;
        }
    } else {
        writeln!(out, "value")?;
        for v in set.values() {
            writeln!(out, "{v}")?;
        }
    }
    Ok(())
}

fn cmd_exceptions(source: &Source, count: usize, as_json: bool) -> Result<(), Failure> {
    let (_, analysis) = source.analysis()?;
    let Some(family) = &analysis.family else {
        let branch = analysis.branch.map(|b| b.to_string()).unwrap_or_else(|| "none".into());
        if as_json {
            return print_json(&Value::Null);
        }
        eprintln!("no exceptional family (branch {branch})");
        return Ok(());
    };
    let predictions = predict_exceptions(family, count);
    if as_json {
        return print_json(&json!({ "family": family, "predictions": predictions }));
    }
    println!("q,value,n");
    for p in predictions {
        println!("{},{},{}", p.q, p.value, p.n);
    }
    Ok(())
}

struct Row {
    label: String,
    decision: String,
    branch: String,
    agreement: String,
    detail: String,
    inconsistent: bool,
}

impl Row {
    fn error(label: String, detail: String) -> Self {
        Row { label, decision: "error".into(), branch: String::new(), agreement: "skipped".into(), detail, inconsistent: false }
    }
}

fn batch_row(index: usize, record: &csv::StringRecord, bound: Option<u64>, budget: Option<u64>) -> Row {
    let fields: Vec<&str> = record.iter().collect();
    let doc = match InstanceDocument::from_fields(&fields) {
        Ok(d) => d,
        Err(e) => return Row::error(String::new(), format!("row {index}: {e}")),
    };
    let label = doc.label.clone().unwrap_or_default();
    let analysis = match doc.parse() {
        Ok((g, s)) => analyze(&g, &s),
        Err(e) => return Row::error(label, format!("row {index}: {e}")),
    };
    let analysis = match analysis {
        Ok(a) => a,
        Err(e) => return Row::error(label, format!("row {index}: {e}")),
    };
    let decision = match analysis.decision {
        Decision::AlmostUniversal => "AlmostUniversal",
        Decision::NotAlmostUniversal => "NotAlmostUniversal",
        Decision::HypothesisRejected => "HypothesisRejected",
    };
    let branch = analysis.branch.map(|b| b.to_string()).unwrap_or_default();
    let b = bound.unwrap_or_else(|| default_bound(&analysis));
    let agreement = match cross_check(&analysis, b, budget) {
        Ok(a) => a,
        Err(e) => Agreement::Skipped { detail: e.to_string() },
    };
    Row {
        label,
        decision: decision.into(),
        branch,
        agreement: agreement.label().into(),
        detail: agreement.detail().into(),
        inconsistent: matches!(agreement, Agreement::Inconsistent { .. }),
    }
}

fn cmd_batch(path: &PathBuf, bound: Option<u64>, jobs: Option<usize>, budget: Option<u64>) -> Result<bool, Failure> {
    use rayon::prelude::*;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (k, r) in reader.records().enumerate() {
        let r = r.map_err(|e| Failure::Input(format!("row {}: {e}", k + 1)))?;
        if k == 0 && r.get(0) == Some("g11") {
            continue;
        }
        if r.iter().all(str::is_empty) {
            continue;
        }
        let line = r.position().map(|p| p.line() as usize).unwrap_or(k + 1);
        records.push((line, r));
    }
    if records.is_empty() {
        return Ok(false);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Internal(e.to_string()))?;
    let rows: Vec<Row> = pool.install(|| records.par_iter().map(|(line, r)| batch_row(*line, r, bound, budget)).collect());
    let mut out = csv::Writer::from_writer(io::stdout().lock());
    let csv_err = |e: csv::Error| Failure::Internal(e.to_string());
    out.write_record(["row", "label", "decision", "branch", "agreement", "detail"]).map_err(csv_err)?;
    for ((line, _), row) in records.iter().zip(&rows) {
        out.write_record([&line.to_string(), &row.label, &row.decision, &row.branch, &row.agreement, &row.detail])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(rows.iter().any(|r| r.inconsistent))
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Analyze(source) => {
            let (doc, analysis) = source.analysis()?;
            print_json(&report(&analysis, &doc))?;
        }
        Command::LocalScan { source, json } => cmd_local_scan(&source, json)?,
        Command::Enumerate { source, bound, gaps, witness, json, budget } => {
            cmd_enumerate(&source, bound, gaps, witness, json, budget)?
        }
        Command::Exceptions { source, count, json } => cmd_exceptions(&source, count, json)?,
        Command::Batch { path, bound, jobs, budget } => {
            if cmd_batch(&path, bound, jobs, budget)? {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
