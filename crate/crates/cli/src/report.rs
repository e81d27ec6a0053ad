use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;

use anyhow::Context;

use crate::{CliResult, ReportArgs};

/// The results schema; `report` rejects anything else.
pub const HEADER: &str = "dataset,solver,rank,trial,seed,loss,seconds,iterations,params";

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub dataset: String,
    pub solver: String,
    pub rank: usize,
    pub trial: usize,
    pub seed: u64,
    pub loss: f64,
    pub seconds: f64,
    pub iterations: usize,
    pub params: usize,
}

impl Row {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{:.6},{},{}",
            self.dataset.replace(',', "_"),
            self.solver,
            self.rank,
            self.trial,
            self.seed,
            self.loss,
            self.seconds,
            self.iterations,
            self.params
        )
    }
}

pub fn results_csv(rows: &[Row]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}

/// Parses a results file; errors name the 1-based line.
pub fn parse_results(text: &str, source: &str) -> anyhow::Result<Vec<Row>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == HEADER => {}
        Some((_, h)) => anyhow::bail!("{source}: row 1: header must be '{HEADER}', found '{h}'"),
        None => anyhow::bail!("{source}: empty file, expected header '{HEADER}'"),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row_no = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 9 {
            anyhow::bail!(
                "{source}: row {row_no}: expected 9 fields, found {}",
                fields.len()
            );
        }
        fn field<T: std::str::FromStr>(
            v: &str,
            name: &str,
            source: &str,
            row: usize,
        ) -> anyhow::Result<T> {
            v.parse()
                .map_err(|_| anyhow::anyhow!("{source}: row {row}: invalid {name} '{v}'"))
        }
        let loss: f64 = field(fields[5], "loss", source, row_no)?;
        let seconds: f64 = field(fields[6], "seconds", source, row_no)?;
        if !loss.is_finite() || !seconds.is_finite() {
            anyhow::bail!("{source}: row {row_no}: loss and seconds must be finite");
        }
        rows.push(Row {
            dataset: fields[0].to_string(),
            solver: fields[1].to_string(),
            rank: field(fields[2], "rank", source, row_no)?,
            trial: field(fields[3], "trial", source, row_no)?,
            seed: field(fields[4], "seed", source, row_no)?,
            loss,
            seconds,
            iterations: field(fields[7], "iterations", source, row_no)?,
            params: field(fields[8], "params", source, row_no)?,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub dataset: String,
    pub solver: String,
    pub rank: usize,
    pub trials: usize,
    pub mean_loss: f64,
    pub mean_seconds: f64,
}

/// Means over trials per (dataset, solver, rank), in that order.
pub fn summarize(rows: &[Row]) -> Vec<Summary> {
    let mut groups: BTreeMap<(&str, &str, usize), (usize, f64, f64)> = BTreeMap::new();
    for row in rows {
        let e = groups
            .entry((&row.dataset, &row.solver, row.rank))
            .or_default();
        e.0 += 1;
        e.1 += row.loss;
        e.2 += row.seconds;
    }
    groups
        .into_iter()
        .map(|((dataset, solver, rank), (count, loss, secs))| Summary {
            dataset: dataset.to_string(),
            solver: solver.to_string(),
            rank,
            trials: count,
            mean_loss: loss / count as f64,
            mean_seconds: secs / count as f64,
        })
        .collect()
}

pub fn summary_table(summaries: &[Summary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:<18} {:>5} {:>7} {:>14} {:>12}",
        "dataset", "solver", "rank", "trials", "mean_loss", "mean_seconds"
    );
    for s in summaries {
        let _ = writeln!(
            out,
            "{:<16} {:<18} {:>5} {:>7} {:>14.6e} {:>12.6}",
            s.dataset, s.solver, s.rank, s.trials, s.mean_loss, s.mean_seconds
        );
    }
    out
}

pub fn summary_csv(summaries: &[Summary]) -> String {
    let mut out = String::from("dataset,solver,rank,trials,mean_loss,mean_seconds\n");
    for s in summaries {
        let _ = writeln!(
            out,
            "{},{},{},{},{:e},{:e}",
            s.dataset, s.solver, s.rank, s.trials, s.mean_loss, s.mean_seconds
        );
    }
    out
}

pub fn cmd_report(args: &ReportArgs) -> CliResult<()> {
    let source = args.results.display().to_string();
    let text = fs::read_to_string(&args.results).with_context(|| format!("reading {source}"))?;
    let mut rows = parse_results(&text, &source)?;
    if let Some(ranks) = &args.ranks {
        rows.retain(|r| ranks.contains(&r.rank));
    }
    let summaries = summarize(&rows);
    print!("{}", summary_table(&summaries));
    match &args.csv {
        Some(path) => fs::write(path, summary_csv(&summaries))
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("\n{}", summary_csv(&summaries)),
    }
    Ok(())
}
