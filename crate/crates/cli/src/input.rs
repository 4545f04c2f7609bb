//! CSV ingestion: a header row with `successes`, `trials` and an optional
//! `group` column; `#` lines are comments.

use std::io::Read;
use std::path::Path;

use binmix::{BinomialSample, Record};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct InputSummary {
    pub n: usize,
    pub t_tilde: f64,
    pub min_trials: u64,
    pub max_trials: u64,
}

impl InputSummary {
    pub fn of(sample: &BinomialSample) -> Self {
        let trials = sample.trials();
        Self {
            n: sample.len(),
            t_tilde: sample.harmonic_mean_trials(),
            min_trials: trials.iter().copied().min().unwrap_or(0),
            max_trials: trials.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "# n={} t_tilde={} trials={}..{}",
            self.n, self.t_tilde, self.min_trials, self.max_trials
        )
    }
}

pub fn parse_input(path: &Path) -> CliResult<BinomialSample> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    parse_reader(file)
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn field_u64(row: &csv::StringRecord, idx: usize, name: &str, line: u64) -> CliResult<u64> {
    let raw = row.get(idx).unwrap_or("").trim();
    raw.parse::<u64>().map_err(|_| {
        CliError::Data(format!(
            "row {line}: `{name}` must be a nonnegative integer, got `{raw}`"
        ))
    })
}

pub fn parse_reader<R: Read>(reader: R) -> CliResult<BinomialSample> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("cannot read header: {e}")))?
        .clone();
    let (Some(xi), Some(ti)) = (column(&headers, "successes"), column(&headers, "trials")) else {
        return Err(CliError::Data(
            "header must contain `successes` and `trials` columns".into(),
        ));
    };
    let gi = column(&headers, "group");
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| CliError::Data(format!("malformed CSV: {e}")))?;
        let line = row.position().map_or(0, |p| p.line());
        let x = field_u64(&row, xi, "successes", line)?;
        let t = field_u64(&row, ti, "trials", line)?;
        if t == 0 {
            return Err(CliError::Data(format!("row {line}: trials must be at least 1")));
        }
        if x > t {
            return Err(CliError::Data(format!(
                "row {line}: successes {x} exceed trials {t}"
            )));
        }
        let record = match gi {
            Some(g) => {
                let gv = field_u64(&row, g, "group", line)?;
                if gv > 1 {
                    return Err(CliError::Data(format!(
                        "row {line}: group must be 0 or 1, got {gv}"
                    )));
                }
                Record::with_group(x, t, gv as u8)
            }
            None => Record::new(x, t),
        };
        records.push(record);
    }
    if records.is_empty() {
        return Err(CliError::Data("no data rows".into()));
    }
    Ok(BinomialSample::new(records)?)
}
