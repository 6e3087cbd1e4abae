//! The bundled manifest of published results and the case runner that
//! recomputes each claim and diffs it.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::default_primes;
use crate::error::{Error, Result};
use crate::flatten::minor_span_dimension;
use crate::schur::{cubic_ideal_dimension, ModuleLabel};
use crate::secant::{scan_ideal, terracini_dimension, ScanOptions, ScanReport, SecantSpec};

const MANIFEST: &str = include_str!("../data/expected.json");

/// The oracle is skipped above this degree; its network evaluations at the
/// full dimensions dominate the run time there.
pub const ORACLE_MAX_DEGREE: usize = 9;

pub const CASE_IDS: [&str; 9] = [
    "6.2",
    "6.3",
    "6.4",
    "6.5",
    "6.6",
    "6.7",
    "6.8-deg5",
    "6.8-deg8",
    "6.8-deg12",
];

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Claim {
    /// Multiplicities of labels in `I_d(σ_r)`. With `exact`, `in_ideal` is
    /// the complete list; otherwise only the named labels are checked.
    Scan {
        anchor: String,
        dims: Vec<usize>,
        r: usize,
        degree: usize,
        #[serde(default)]
        labels: Option<Vec<String>>,
        #[serde(default)]
        exact: bool,
        #[serde(default)]
        in_ideal: BTreeMap<String, u64>,
        #[serde(default)]
        not_in_ideal: Vec<String>,
        #[serde(default)]
        dimension: Option<u64>,
        #[serde(default)]
        note: Option<String>,
    },
    Terracini {
        anchor: String,
        dims: Vec<usize>,
        r: usize,
        dimension: usize,
        #[serde(default)]
        note: Option<String>,
    },
    /// `I_3(σ_2)` equals the span of the 3×3 flattening minors.
    CubicsEqualFlattenings {
        anchor: String,
        dims: Vec<usize>,
        #[serde(default)]
        note: Option<String>,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct Case {
    pub id: String,
    pub title: String,
    pub claims: Vec<Claim>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct Manifest {
    pub version: u32,
    pub cases: Vec<Case>,
}

pub fn manifest() -> Manifest {
    serde_json::from_str(MANIFEST).expect("bundled manifest parses")
}

pub fn case(id: &str) -> Result<Case> {
    manifest()
        .cases
        .into_iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::Lookup(format!("unknown case {id:?}; known: {}", CASE_IDS.join(", "))))
}

#[derive(Clone, Debug)]
pub struct ReproduceOptions {
    pub seed: u64,
    pub primes: Vec<u64>,
    pub budget: Option<Duration>,
    pub oracle: bool,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            primes: default_primes(2),
            budget: None,
            oracle: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ClaimOutcome {
    pub kind: String,
    pub anchor: String,
    pub expected: Value,
    pub observed: Value,
    pub matches: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CaseReport {
    pub case: String,
    pub title: String,
    pub claims: Vec<ClaimOutcome>,
    pub scans: Vec<ScanReport>,
    pub matches: bool,
    pub budget_exceeded: bool,
    /// False if the kernel oracle disagreed with a scan.
    pub consistent: bool,
}

fn spec_for(dims: &[usize], r: usize, seed: u64) -> Result<SecantSpec> {
    SecantSpec::new(dims.to_vec(), r, seed)
}

fn scan_json(report: &ScanReport) -> Value {
    let in_ideal: BTreeMap<&str, u64> = report
        .entries
        .iter()
        .filter(|e| e.multiplicity_in_ideal > 0)
        .map(|e| (e.label.as_str(), e.multiplicity_in_ideal))
        .collect();
    json!({
        "in_ideal": in_ideal,
        "dimension": report.ideal_dimension,
        "complete": report.complete,
    })
}

struct Runner<'a> {
    opts: &'a ReproduceOptions,
    deadline: Option<Instant>,
    scans: Vec<ScanReport>,
    budget_exceeded: bool,
    consistent: bool,
}

impl Runner<'_> {
    fn remaining(&self) -> Option<Duration> {
        self.deadline.map(|t| t.saturating_duration_since(Instant::now()))
    }

    fn out_of_time(&self) -> bool {
        self.remaining().is_some_and(|d| d.is_zero())
    }

    fn scan(&mut self, d: usize, dims: &[usize], r: usize, labels: Option<&[String]>) -> Result<ScanReport> {
        let spec = spec_for(dims, r, self.opts.seed)?;
        let labels = labels
            .map(|ls| ls.iter().map(|l| l.parse::<ModuleLabel>()).collect::<Result<Vec<_>>>())
            .transpose()?;
        let opts = ScanOptions {
            primes: self.opts.primes.clone(),
            labels,
            budget: self.remaining(),
            oracle: self.opts.oracle && d <= ORACLE_MAX_DEGREE,
        };
        let report = scan_ideal(d, &spec, &opts)?;
        if !report.consistent {
            self.consistent = false;
        }
        if report
            .entries
            .iter()
            .any(|e| e.status == crate::secant::LabelStatus::BudgetExceeded)
        {
            self.budget_exceeded = true;
        }
        self.scans.push(report.clone());
        Ok(report)
    }

    fn run(&mut self, claim: &Claim) -> Result<ClaimOutcome> {
        let skipped = |kind: &str, anchor: &str, expected: Value, note: &Option<String>| ClaimOutcome {
            kind: kind.into(),
            anchor: anchor.into(),
            expected,
            observed: Value::Null,
            matches: false,
            note: note.clone(),
        };
        match claim {
            Claim::Scan {
                anchor,
                dims,
                r,
                degree,
                labels,
                exact,
                in_ideal,
                not_in_ideal,
                dimension,
                note,
            } => {
                let expected = json!({
                    "dims": dims, "r": r, "degree": degree,
                    "in_ideal": in_ideal, "not_in_ideal": not_in_ideal,
                    "dimension": dimension, "exact": exact,
                });
                if self.out_of_time() {
                    self.budget_exceeded = true;
                    return Ok(skipped("scan", anchor, expected, note));
                }
                let report = self.scan(*degree, dims, *r, labels.as_deref())?;
                let mult = |key: &str| report.entry(key).map_or(0, |e| e.multiplicity_in_ideal);
                let mut ok = report.complete;
                ok &= in_ideal.iter().all(|(k, &m)| mult(k) == m);
                ok &= not_in_ideal.iter().all(|k| report.entry(k).is_some() && mult(k) == 0);
                if *exact {
                    ok &= report.in_ideal.iter().all(|k| in_ideal.contains_key(k));
                }
                if let Some(dim) = dimension {
                    ok &= report.ideal_dimension == u128::from(*dim);
                }
                Ok(ClaimOutcome {
                    kind: "scan".into(),
                    anchor: anchor.clone(),
                    expected,
                    observed: scan_json(&report),
                    matches: ok,
                    note: note.clone(),
                })
            }
            Claim::Terracini {
                anchor,
                dims,
                r,
                dimension,
                note,
            } => {
                let expected = json!({ "dims": dims, "r": r, "dimension": dimension });
                if self.out_of_time() {
                    self.budget_exceeded = true;
                    return Ok(skipped("terracini", anchor, expected, note));
                }
                let got = terracini_dimension(&spec_for(dims, *r, self.opts.seed)?)?;
                Ok(ClaimOutcome {
                    kind: "terracini".into(),
                    anchor: anchor.clone(),
                    expected,
                    observed: json!({ "dimension": got }),
                    matches: got == *dimension,
                    note: note.clone(),
                })
            }
            Claim::CubicsEqualFlattenings { anchor, dims, note } => {
                let expected = json!({ "dims": dims, "equal": true });
                if self.out_of_time() {
                    self.budget_exceeded = true;
                    return Ok(skipped("cubics_equal_flattenings", anchor, expected, note));
                }
                let report = self.scan(3, dims, 2, None)?;
                let minors = minor_span_dimension(dims, 2)?;
                let modules = cubic_ideal_dimension(dims);
                let ok = report.complete && report.ideal_dimension == minors as u128 && modules == minors as u128;
                Ok(ClaimOutcome {
                    kind: "cubics_equal_flattenings".into(),
                    anchor: anchor.clone(),
                    expected,
                    observed: json!({
                        "scan_dimension": report.ideal_dimension,
                        "minor_span_dimension": minors,
                        "cubic_ideal_dimension": modules,
                    }),
                    matches: ok,
                    note: note.clone(),
                })
            }
        }
    }
}

/// Recompute every claim of a case. Budget exhaustion yields a partial
/// report with `budget_exceeded` set rather than an error.
pub fn reproduce(case_id: &str, opts: &ReproduceOptions) -> Result<CaseReport> {
    let case = case(case_id)?;
    let mut runner = Runner {
        opts,
        deadline: opts.budget.map(|b| Instant::now() + b),
        scans: Vec::new(),
        budget_exceeded: false,
        consistent: true,
    };
    let mut claims = Vec::with_capacity(case.claims.len());
    for claim in &case.claims {
        claims.push(runner.run(claim)?);
    }
    Ok(CaseReport {
        case: case.id,
        title: case.title,
        matches: claims.iter().all(|c| c.matches),
        claims,
        scans: runner.scans,
        budget_exceeded: runner.budget_exceeded,
        consistent: runner.consistent,
    })
}
