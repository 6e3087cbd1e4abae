//! Rendering of command results as versioned JSON, CSV or aligned text.

use std::io::Write;

use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// A command result: the full JSON payload plus a flat table for CSV and
/// text output.
pub struct Output {
    pub command: &'static str,
    pub result: Value,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Output {
    pub fn new(command: &'static str, result: Value) -> Self {
        Self {
            command,
            result,
            headers: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn table<S: Into<String>>(mut self, headers: impl IntoIterator<Item = S>, rows: Vec<Vec<String>>) -> Self {
        self.headers = headers.into_iter().map(Into::into).collect();
        self.rows = rows;
        self
    }
}

pub struct Provenance {
    pub seed: u64,
    pub primes: Vec<u64>,
    pub elapsed_ms: Option<u128>,
}

fn envelope(out: &Output, prov: &Provenance) -> Value {
    let mut v = json!({
        "schema_version": SCHEMA_VERSION,
        "version": env!("CARGO_PKG_VERSION"),
        "command": out.command,
        "seed": prov.seed,
        "primes": prov.primes,
        "result": out.result,
    });
    if let Some(ms) = prov.elapsed_ms {
        v["elapsed_ms"] = json!(ms);
    }
    v
}

fn header_line(out: &Output, prov: &Provenance) -> String {
    let primes: Vec<String> = prov.primes.iter().map(u64::to_string).collect();
    let mut s = format!(
        "# segre {} {} seed={} primes={}",
        env!("CARGO_PKG_VERSION"),
        out.command,
        prov.seed,
        primes.join(";")
    );
    if let Some(ms) = prov.elapsed_ms {
        s.push_str(&format!(" elapsed_ms={ms}"));
    }
    s
}

pub fn render(out: &Output, prov: &Provenance, format: Format) -> String {
    match format {
        // serde_json maps keep keys sorted, so identical inputs give
        // identical bytes
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&envelope(out, prov)).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut buf = Vec::new();
            writeln!(buf, "{}", header_line(out, prov)).unwrap();
            {
                let mut w = csv::WriterBuilder::new().from_writer(&mut buf);
                w.write_record(&out.headers).unwrap();
                for row in &out.rows {
                    w.write_record(row).unwrap();
                }
                w.flush().unwrap();
            }
            String::from_utf8(buf).expect("utf8")
        }
        Format::Text => {
            let mut s = header_line(out, prov);
            s.push('\n');
            let widths: Vec<usize> = (0..out.headers.len())
                .map(|i| {
                    out.rows
                        .iter()
                        .map(|r| r.get(i).map_or(0, |c| c.chars().count()))
                        .chain(std::iter::once(out.headers[i].chars().count()))
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: &[String]| -> String {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, &w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            s.push_str(&line(&out.headers));
            s.push('\n');
            for row in &out.rows {
                s.push_str(&line(row));
                s.push('\n');
            }
            s
        }
    }
}
