//! History files for `suggest` and the `rounds.csv` written by `bench`.

use crate::error::{CliError, Result};
use crate::format::{g17, opt_g17};
use gpest::benchmarks::SuiteRun;
use gpest::gp::History;
use std::io::{Read, Write};

/// Parse `x_1,…,x_d,y` rows after a header line.
pub fn read_history(input: impl Read, dim: usize, name: &str) -> Result<History> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(|e| CliError::usage(format!("{name}: {e}")))?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(CliError::usage(format!("{name}: missing header line")));
    }
    if header.len() != dim + 1 {
        return Err(CliError::usage(format!(
            "{name}: header has {} columns, expected {} (x_1..x_{dim}, y)",
            header.len(),
            dim + 1
        )));
    }
    let mut history = History::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::usage(format!("{name}: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != dim + 1 {
            return Err(CliError::usage(format!(
                "{name}: line {line}: expected {} columns, found {}",
                dim + 1,
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(dim + 1);
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::usage(format!("{name}: line {line}, column {}: cannot parse {field:?} as a number", col + 1))
            })?;
            if !v.is_finite() {
                return Err(CliError::usage(format!("{name}: line {line}, column {}: value must be finite", col + 1)));
            }
            row.push(v);
        }
        let y = row.pop().expect("dim + 1 >= 1 columns");
        history.push(row, y).map_err(|e| CliError::usage(format!("{name}: line {line}: {e}")))?;
    }
    Ok(history)
}

pub fn rounds_header(dim: usize) -> Vec<String> {
    let mut h: Vec<String> = ["acquisition", "function_id", "t"].map(String::from).to_vec();
    h.extend((1..=dim).map(|i| format!("x{i}")));
    h.extend(["y", "simple_regret", "cumulative_regret", "m_hat", "nu_t"].map(String::from));
    h
}

/// One row per round of every run, in suite order.
pub fn write_rounds(out: impl Write, dim: usize, runs: &[SuiteRun]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::runtime(format!("writing rounds: {e}"));
    w.write_record(rounds_header(dim)).map_err(io)?;
    for run in runs {
        for r in &run.result.records {
            let mut row = vec![run.label.clone(), run.function_id.to_string(), r.t.to_string()];
            row.extend(r.x.iter().map(|v| g17(*v)));
            row.extend([g17(r.y), g17(r.simple_regret), g17(r.cumulative_regret), opt_g17(r.m_hat), opt_g17(r.nu_t)]);
            w.write_record(&row).map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::runtime(format!("writing rounds: {e}")))
}

/// The columns of a rounds file that the report needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRow {
    pub acquisition: String,
    pub function_id: usize,
    pub t: usize,
    pub simple_regret: f64,
    pub cumulative_regret: f64,
}

pub fn read_rounds(input: impl Read, name: &str) -> Result<Vec<RoundRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(|e| CliError::usage(format!("{name}: {e}")))?.clone();
    let col = |key: &str| {
        header
            .iter()
            .position(|h| h == key)
            .ok_or_else(|| CliError::usage(format!("{name}: missing column `{key}`")))
    };
    let (ia, ifn, it, is, ic) =
        (col("acquisition")?, col("function_id")?, col("t")?, col("simple_regret")?, col("cumulative_regret")?);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::usage(format!("{name}: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let bad = |key: &str, v: &str| CliError::usage(format!("{name}: line {line}: bad {key} {v:?}"));
        let parse_f = |i: usize, key: &str| field(i).parse::<f64>().map_err(|_| bad(key, field(i)));
        let parse_u = |i: usize, key: &str| field(i).parse::<usize>().map_err(|_| bad(key, field(i)));
        rows.push(RoundRow {
            acquisition: field(ia).to_string(),
            function_id: parse_u(ifn, "function_id")?,
            t: parse_u(it, "t")?,
            simple_regret: parse_f(is, "simple_regret")?,
            cumulative_regret: parse_f(ic, "cumulative_regret")?,
        });
    }
    if rows.is_empty() {
        return Err(CliError::usage(format!("{name}: no data rows")));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn history_parsing() {
        let h = read_history("x1,x2,y\n0.1,0.2,3\n0.5, 0.5 ,-1\n".as_bytes(), 2, "h").unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.points()[1], [0.5, 0.5]);
        assert!(read_history("x,y\n".as_bytes(), 1, "h").unwrap().is_empty());
    }

    #[test]
    fn history_errors_name_the_line() {
        let err = read_history("x,y\n0.1,1\n0.2\n".as_bytes(), 1, "h").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = read_history("x,y\n0.1,1\n0.2,abc\n".as_bytes(), 1, "h").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(read_history("x1,x2,y\n".as_bytes(), 1, "h").is_err());
        assert!(read_history("".as_bytes(), 1, "h").is_err());
    }

    #[test]
    fn empty_rounds_rejected() {
        let err = read_rounds("acquisition,function_id,t,x1,y,simple_regret,cumulative_regret,m_hat,nu_t\n".as_bytes(), "r")
            .unwrap_err();
        assert!(err.to_string().contains("no data rows"));
        assert_eq!(err.exit_code(), 2);
    }
}
