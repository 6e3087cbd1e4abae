//! `segre`: command-line front end for segre-core.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use segre_core::arith::{default_primes, is_prime_u64, primes_with_bits, PrimeField};
use segre_core::error::Error;
use segre_core::eval::{eval_at_sum, eval_pattern, random_points_fp};
use segre_core::flatten::{flattening, gss_sigma2_test};
use segre_core::forms::{catalog, FormJson, MinorProductForm, CATALOG_NAMES};
use segre_core::reproduce::{reproduce, ReproduceOptions, CASE_IDS};
use segre_core::schur::{
    cubic_closed_form_4, cubic_closed_form_printed, cubic_closed_form_symmetrized, cubic_ideal_dimension,
    cubic_ideal_families, decompose_symmetric_power,
};
use segre_core::secant::{scan_ideal, terracini_dimension, LabelStatus, ScanOptions, ScanReport, SecantSpec};
use segre_core::symgroup::{character_table, cycle_types, enumerate_partitions};
use segre_core::tensor::tensor_from_json;

use output::{render, Format, Output, Provenance};

const PRIME_FLOOR: u64 = 1 << 59;

#[derive(Parser, Debug)]
#[command(name = "segre", version, about = "Equations of secant varieties of Segre products")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Comma-separated primes above 2^59; two 61-bit primes by default.
    #[arg(long, global = true, value_delimiter = ',')]
    primes: Vec<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "SEGRE_THREADS")]
    threads: Option<usize>,
    /// Wall-clock budget for scans and reproduce runs.
    #[arg(long = "budget-sec", global = true)]
    budget_sec: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Shorthand for `--format json`, optionally with an output path.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "-")]
    json: Option<String>,
    /// Include elapsed time in the output.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Character table of S_d.
    Chars {
        #[arg(long)]
        d: usize,
    },
    /// Isotypic decomposition of S^d(A_1 ⊗ … ⊗ A_k).
    Decompose {
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
    },
    /// Module families and dimension of the cubics vanishing on σ₂.
    Cubics {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
    },
    /// Named highest weight vector forms.
    Catalog {
        #[arg(long)]
        list: bool,
        #[arg(long)]
        name: Option<String>,
    },
    /// Evaluate a form at the sum of r random rank-one points modulo a prime.
    Eval {
        /// Catalog name or path to a form JSON file.
        #[arg(long)]
        form: String,
        /// 1-based index among the forms of a catalog entry.
        #[arg(long, default_value_t = 1)]
        index: usize,
        #[arg(long)]
        r: usize,
        /// Multidegree component to evaluate instead of the whole value.
        #[arg(long, value_delimiter = ',')]
        pattern: Option<Vec<usize>>,
        #[arg(long = "prime-bits", default_value_t = 61)]
        prime_bits: u32,
    },
    /// Multiplicity of every module of S^d in the ideal of σ_r.
    Scan {
        #[arg(long)]
        d: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        r: usize,
        /// Comma-separated labels such as 321|321|3111.
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<String>>,
        /// Cross-check every label with the independent kernel oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Dimension of the affine cone over σ_r by Terracini's lemma.
    Terracini {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        r: usize,
    },
    /// Decide membership in σ₂ with a certificate.
    Gss {
        #[arg(long)]
        tensor: PathBuf,
    },
    /// Exact rank of a flattening, e.g. `--split 1,3|2,4`.
    FlattenRank {
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long)]
        split: String,
    },
    /// Recompute a published case and compare with the bundled manifest.
    Reproduce {
        #[arg(long = "case")]
        case_id: String,
        #[arg(long = "no-oracle")]
        no_oracle: bool,
        /// Also write `<case>.json` and `<case>.csv` here.
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
    },
}

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Ok = 0,
    Mismatch = 1,
    Usage = 2,
    Budget = 3,
    Internal = 4,
}

struct Failure {
    status: Status,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Budget(_) => Status::Budget,
            Error::Internal(_) => Status::Internal,
            Error::Config(_) | Error::Argument(_) | Error::Size(_) | Error::Lookup(_) => Status::Usage,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        status: Status::Usage,
        message: msg.into(),
    }
}

struct Context {
    seed: u64,
    primes: Vec<u64>,
    /// Whether `--primes` was given; `eval` otherwise picks by bit size.
    explicit_primes: bool,
    budget: Option<Duration>,
}

fn validate_primes(primes: &[u64]) -> Result<Vec<u64>, Failure> {
    if primes.is_empty() {
        return Ok(default_primes(2));
    }
    for (i, &p) in primes.iter().enumerate() {
        if p <= PRIME_FLOOR || !is_prime_u64(p) {
            return Err(usage(format!("{p} is not a prime above 2^59")));
        }
        if primes[..i].contains(&p) {
            return Err(usage(format!("prime {p} given twice")));
        }
    }
    Ok(primes.to_vec())
}

fn read_json(path: &PathBuf) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{} is not JSON: {e}", path.display())))
}

fn status_kind(s: &LabelStatus) -> String {
    match s {
        LabelStatus::Computed => "computed".into(),
        LabelStatus::IncompleteBasis { found } => format!("incomplete_basis({found})"),
        LabelStatus::CatalogOnly { found } => format!("catalog_only({found})"),
        LabelStatus::Transferred { via, inner } => format!("transferred({via}):{}", status_kind(inner)),
        LabelStatus::Dropped { reason } => format!(
            "dropped({})",
            serde_json::to_value(reason).unwrap().as_str().unwrap_or("")
        ),
        LabelStatus::Absent => "absent".into(),
        LabelStatus::BudgetExceeded => "budget_exceeded".into(),
    }
}

fn scan_rows(report: &ScanReport) -> Vec<Vec<String>> {
    report
        .entries
        .iter()
        .map(|e| {
            vec![
                e.label.clone(),
                e.multiplicity_in_sd.to_string(),
                e.multiplicity_in_ideal.to_string(),
                e.dimension_in_ideal.to_string(),
                status_kind(&e.status),
                e.oracle
                    .as_ref()
                    .map_or(String::new(), |o| o.multiplicity_in_ideal.to_string()),
            ]
        })
        .collect()
}

const SCAN_HEADERS: [&str; 6] = [
    "label",
    "multiplicity_in_sd",
    "multiplicity_in_ideal",
    "dimension_in_ideal",
    "status",
    "oracle",
];

fn load_form(spec: &str, index: usize) -> Result<MinorProductForm, Failure> {
    if CATALOG_NAMES.contains(&spec) {
        let (forms, _) = catalog(spec)?;
        let n = forms.len();
        return forms
            .into_iter()
            .nth(index.wrapping_sub(1))
            .ok_or_else(|| usage(format!("{spec} has {n} forms, index {index} is out of range")));
    }
    let path = PathBuf::from(spec);
    if !path.exists() {
        return Err(usage(format!("{spec:?} is neither a catalog name nor a file")));
    }
    let v = read_json(&path)?;
    let fj: FormJson = serde_json::from_value(v).map_err(|e| usage(format!("bad form file: {e}")))?;
    Ok(MinorProductForm::try_from(fj)?)
}

fn run(cmd: &Command, ctx: &Context) -> Result<(Output, Status), Failure> {
    let ok = |o: Output| Ok((o, Status::Ok));
    match cmd {
        Command::Chars { d } => {
            let parts = enumerate_partitions(*d)?;
            let classes = cycle_types(*d)?;
            let table = character_table(*d)?;
            let result = json!({
                "d": d,
                "partitions": parts.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "classes": classes.iter().map(|c| json!({
                    "cycle_type": c.cycle_lengths.to_string(),
                    "size": c.class_size,
                })).collect::<Vec<_>>(),
                "table": table,
            });
            let headers =
                std::iter::once("partition".to_string()).chain(classes.iter().map(|c| c.cycle_lengths.to_string()));
            let rows = parts
                .iter()
                .zip(&table)
                .map(|(p, row)| {
                    std::iter::once(p.to_string())
                        .chain(row.iter().map(i64::to_string))
                        .collect()
                })
                .collect();
            ok(Output::new("chars", result).table(headers, rows))
        }
        Command::Decompose { d, dims } => {
            let labels = decompose_symmetric_power(*d, dims)?;
            let total: u128 = labels
                .iter()
                .map(|l| l.multiplicity_in_sd as u128 * l.copy_dimension(dims))
                .sum();
            let result = json!({
                "d": d,
                "dims": dims,
                "labels": labels.iter().map(|l| json!({
                    "label": l.key(),
                    "multiplicity": l.multiplicity_in_sd,
                    "dimension": l.copy_dimension(dims).to_string(),
                })).collect::<Vec<_>>(),
                "total_dimension": total.to_string(),
            });
            let rows = labels
                .iter()
                .map(|l| {
                    vec![
                        l.key(),
                        l.multiplicity_in_sd.to_string(),
                        l.copy_dimension(dims).to_string(),
                    ]
                })
                .collect();
            ok(Output::new("decompose", result).table(["label", "multiplicity", "dimension"], rows))
        }
        Command::Cubics { dims } => {
            let families = cubic_ideal_families(dims);
            let dim = cubic_ideal_dimension(dims);
            let mut closed = serde_json::Map::new();
            let i = |x: usize| x as i64;
            match dims.as_slice() {
                [a, b, c] => {
                    closed.insert(
                        "printed".into(),
                        json!(cubic_closed_form_printed(i(*a), i(*b), i(*c)).to_string()),
                    );
                    closed.insert(
                        "symmetrized".into(),
                        json!(cubic_closed_form_symmetrized(i(*a), i(*b), i(*c)).to_string()),
                    );
                }
                [a, b, c, d] => {
                    closed.insert(
                        "printed".into(),
                        json!(cubic_closed_form_4(i(*a), i(*b), i(*c), i(*d)).to_string()),
                    );
                }
                _ => {}
            }
            let result = json!({
                "dims": dims,
                "families": families,
                "dimension": dim.to_string(),
                "closed_form": closed,
            });
            let rows = families
                .iter()
                .map(|f| vec![f.label.clone(), f.multiplicity.to_string(), f.dimension.to_string()])
                .chain(std::iter::once(vec!["total".into(), String::new(), dim.to_string()]))
                .collect();
            ok(Output::new("cubics", result).table(["label", "multiplicity", "dimension"], rows))
        }
        Command::Catalog { list, name } => match (list, name) {
            (_, Some(name)) => {
                let (forms, entry) = catalog(name)?;
                let fj: Vec<FormJson> = forms.iter().map(FormJson::from).collect();
                let result = json!({ "entry": entry, "forms": fj });
                let rows = (1..=forms.len())
                    .map(|i| vec![entry.name.to_string(), i.to_string(), entry.label.clone()])
                    .collect();
                ok(Output::new("catalog", result).table(["name", "index", "label"], rows))
            }
            (true, None) | (false, None) => {
                let mut entries = Vec::new();
                let mut rows = Vec::new();
                for n in CATALOG_NAMES {
                    let (forms, entry) = catalog(n)?;
                    rows.push(vec![
                        entry.name.to_string(),
                        entry.label.clone(),
                        entry.dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x"),
                        forms.len().to_string(),
                        entry.description.to_string(),
                    ]);
                    entries.push(json!({ "entry": entry, "forms": forms.len() }));
                }
                ok(Output::new("catalog", json!({ "entries": entries }))
                    .table(["name", "label", "dims", "forms", "description"], rows))
            }
        },
        Command::Eval {
            form,
            index,
            r,
            pattern,
            prime_bits,
        } => {
            let f = load_form(form, *index)?;
            let prime = if !ctx.explicit_primes {
                primes_with_bits(*prime_bits, 1)
                    .and_then(|v| v.first().copied())
                    .ok_or_else(|| usage(format!("no primes with {prime_bits} bits")))?
            } else {
                ctx.primes[0]
            };
            let field = PrimeField::new(prime).ok_or_else(|| usage(format!("{prime} is not a usable prime")))?;
            if *r == 0 {
                return Err(usage("r must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            let points = random_points_fp(&field, f.dims(), *r, &mut rng);
            let value = match pattern {
                Some(p) => eval_pattern(&field, &f, &points, p)?,
                None => eval_at_sum(&field, &f, &points)?,
            };
            let value = field.to_u64(value);
            let result = json!({
                "form": form,
                "index": index,
                "label": f.label_key(),
                "r": r,
                "prime": prime,
                "pattern": pattern,
                "value": value,
            });
            let rows = vec![vec![
                f.label_key(),
                r.to_string(),
                pattern.as_ref().map_or("sum".into(), |p| {
                    p.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
                }),
                prime.to_string(),
                value.to_string(),
            ]];
            ok(Output::new("eval", result).table(["label", "r", "pattern", "prime", "value"], rows))
        }
        Command::Scan {
            d,
            dims,
            r,
            labels,
            oracle,
        } => {
            let spec = SecantSpec::new(dims.clone(), *r, ctx.seed)?;
            let labels = labels
                .as_ref()
                .map(|ls| ls.iter().map(|l| l.parse()).collect::<Result<Vec<_>, Error>>())
                .transpose()?;
            let opts = ScanOptions {
                primes: ctx.primes.clone(),
                labels,
                budget: ctx.budget,
                oracle: *oracle,
            };
            let report = scan_ideal(*d, &spec, &opts)?;
            let status = if !report.consistent {
                Status::Internal
            } else if report.entries.iter().any(|e| e.status == LabelStatus::BudgetExceeded) {
                Status::Budget
            } else {
                Status::Ok
            };
            let rows = scan_rows(&report);
            let result = serde_json::to_value(&report).expect("serializable");
            Ok((Output::new("scan", result).table(SCAN_HEADERS, rows), status))
        }
        Command::Terracini { dims, r } => {
            let spec = SecantSpec::new(dims.clone(), *r, ctx.seed)?;
            let dim = terracini_dimension(&spec)?;
            let ambient: usize = dims.iter().product();
            let expected = (r * (dims.iter().map(|n| n - 1).sum::<usize>() + 1)).min(ambient);
            let result = json!({
                "dims": dims,
                "r": r,
                "dimension": dim,
                "ambient": ambient,
                "expected": expected,
                "fills": dim == ambient,
                "defect": expected - dim.min(expected),
            });
            let rows = vec![vec![
                dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x"),
                r.to_string(),
                dim.to_string(),
                ambient.to_string(),
                expected.to_string(),
                (dim == ambient).to_string(),
            ]];
            ok(
                Output::new("terracini", result)
                    .table(["dims", "r", "dimension", "ambient", "expected", "fills"], rows),
            )
        }
        Command::Gss { tensor } => {
            let t = tensor_from_json(&read_json(tensor)?)?;
            let cert = gss_sigma2_test(&t)?;
            let result = json!({
                "dims": t.dims,
                "in_sigma2": cert.in_sigma2(),
                "certificate": cert.to_json(),
            });
            let rows = vec![vec![
                t.dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x"),
                cert.in_sigma2().to_string(),
                cert.kind().to_string(),
            ]];
            ok(Output::new("gss", result).table(["dims", "in_sigma2", "certificate"], rows))
        }
        Command::FlattenRank { tensor, split } => {
            let t = tensor_from_json(&read_json(tensor)?)?;
            let parse = |s: &str| -> Result<Vec<usize>, Failure> {
                s.split(',')
                    .filter(|x| !x.trim().is_empty())
                    .map(|x| {
                        x.trim()
                            .parse::<usize>()
                            .ok()
                            .and_then(|i| i.checked_sub(1))
                            .ok_or_else(|| usage(format!("bad factor {x:?} in split (factors are 1-based)")))
                    })
                    .collect()
            };
            let (left, right) = match split.split_once('|') {
                Some((l, r)) => (parse(l)?, Some(parse(r)?)),
                None => (parse(split)?, None),
            };
            let f = flattening(&t, &left)?;
            if let Some(mut right) = right {
                right.sort_unstable();
                if right != f.cols {
                    return Err(usage(format!(
                        "split {split:?} does not partition the {} factors",
                        t.order()
                    )));
                }
            }
            let rank = segre_core::linalg::rank(&segre_core::arith::Rationals, &f.matrix);
            let one = |v: &[usize]| v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
            let result = json!({
                "dims": t.dims,
                "rows": f.rows.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "cols": f.cols.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "shape": [f.matrix.len(), f.matrix.first().map_or(0, Vec::len)],
                "rank": rank,
            });
            let rows = vec![vec![one(&f.rows), one(&f.cols), rank.to_string()]];
            ok(Output::new("flatten-rank", result).table(["rows", "cols", "rank"], rows))
        }
        Command::Reproduce {
            case_id,
            no_oracle,
            out_dir,
        } => {
            if !CASE_IDS.contains(&case_id.as_str()) {
                return Err(usage(format!(
                    "unknown case {case_id:?}; known: {}",
                    CASE_IDS.join(", ")
                )));
            }
            let opts = ReproduceOptions {
                seed: ctx.seed,
                primes: ctx.primes.clone(),
                budget: ctx.budget,
                oracle: !no_oracle,
            };
            let report = reproduce(case_id, &opts)?;
            let status = if !report.consistent {
                Status::Internal
            } else if report.budget_exceeded {
                Status::Budget
            } else if !report.matches {
                Status::Mismatch
            } else {
                Status::Ok
            };
            let rows: Vec<Vec<String>> = report
                .claims
                .iter()
                .map(|c| {
                    vec![
                        c.kind.clone(),
                        c.anchor.clone(),
                        c.expected.to_string(),
                        c.observed.to_string(),
                        if c.matches { "match" } else { "MISMATCH" }.to_string(),
                        c.note.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            let out = Output::new("reproduce", serde_json::to_value(&report).expect("serializable"))
                .table(["kind", "anchor", "expected", "observed", "verdict", "note"], rows);
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
                let prov = Provenance {
                    seed: ctx.seed,
                    primes: ctx.primes.clone(),
                    elapsed_ms: None,
                };
                for (ext, fmt) in [("json", Format::Json), ("csv", Format::Csv)] {
                    let path = dir.join(format!("{case_id}.{ext}"));
                    std::fs::write(&path, render(&out, &prov, fmt))
                        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
                }
            }
            Ok((out, status))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let code = match execute(&cli, start) {
        Ok(status) => status,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.status
        }
    };
    ExitCode::from(code as u8)
}

fn execute(cli: &Cli, start: Instant) -> Result<Status, Failure> {
    let run_args = &cli.run;
    let primes = validate_primes(&run_args.primes)?;
    if let Some(n) = run_args.threads {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure {
                status: Status::Internal,
                message: format!("thread pool: {e}"),
            })?;
    }
    let ctx = Context {
        seed: run_args.seed,
        primes,
        explicit_primes: !run_args.primes.is_empty(),
        budget: run_args.budget_sec.map(Duration::from_secs),
    };
    let (out, status) = run(&cli.command, &ctx)?;
    let (format, path) = match &run_args.json {
        Some(p) => (
            Format::Json,
            (p != "-").then(|| PathBuf::from(p)).or_else(|| run_args.output.clone()),
        ),
        None => (run_args.format, run_args.output.clone()),
    };
    let prov = Provenance {
        seed: ctx.seed,
        primes: ctx.primes.clone(),
        elapsed_ms: run_args.timings.then(|| start.elapsed().as_millis()),
    };
    let text = render(&out, &prov, format);
    match path {
        Some(p) => std::fs::write(&p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    Ok(status)
}
