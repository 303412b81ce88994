//! Benchmark result records and their CSV / JSON-lines encodings.
//!
//! Columns, in order:
//!
//! | column | trial row | aggregate row |
//! |---|---|---|
//! | `instance` | instance name | instance name |
//! | `representation` | `cnf` / `xnf` / free text | same |
//! | `backend` | `reference`, `crossbar-ideal`, `crossbar-nonideal` | same |
//! | `seed` | trial seed | empty |
//! | `sigma` | noise level | noise level |
//! | `solved` | `true` / `false` | empty |
//! | `iterations` | flips performed | sum over trials |
//! | `wall_ns` | wall-clock time of the trial | sum over trials |
//! | `energy_pj` | modelled energy of the trial | sum over trials |
//! | `kind` | `trial` | `aggregate` |
//! | `n_trials` | empty | trials run |
//! | `n_solved` | empty | trials solved |
//! | `its99_opt` | empty | optimized ITS99, empty if censored |
//! | `its99_stderr` | empty | bootstrap standard error |
//! | `tts_s` | empty | time to solution in seconds |
//! | `ets_j` | empty | energy to solution in joules |
//! | `energy_per_iter_pj` | empty | mean modelled energy per iteration |

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ResultsError {
    #[error("csv")]
    Csv(#[from] csv::Error),
    #[error("json")]
    Json(#[from] serde_json::Error),
    #[error("i/o")]
    Io(#[from] std::io::Error),
    #[error("unknown results format '{0}', expected csv or jsonl")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Trial,
    Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub instance: String,
    pub representation: String,
    pub backend: String,
    pub seed: Option<u64>,
    pub sigma: f64,
    pub solved: Option<bool>,
    pub iterations: u64,
    pub wall_ns: u64,
    pub energy_pj: Option<f64>,
    pub kind: RecordKind,
    pub n_trials: Option<u64>,
    pub n_solved: Option<u64>,
    pub its99_opt: Option<f64>,
    pub its99_stderr: Option<f64>,
    pub tts_s: Option<f64>,
    pub ets_j: Option<f64>,
    pub energy_per_iter_pj: Option<f64>,
}

impl ResultRecord {
    pub fn trial(
        instance: &str,
        representation: &str,
        backend: &str,
        seed: u64,
        sigma: f64,
        solved: bool,
        iterations: u64,
    ) -> Self {
        ResultRecord {
            instance: instance.to_owned(),
            representation: representation.to_owned(),
            backend: backend.to_owned(),
            seed: Some(seed),
            sigma,
            solved: Some(solved),
            iterations,
            wall_ns: 0,
            energy_pj: None,
            kind: RecordKind::Trial,
            n_trials: None,
            n_solved: None,
            its99_opt: None,
            its99_stderr: None,
            tts_s: None,
            ets_j: None,
            energy_per_iter_pj: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultsFormat {
    Csv,
    JsonLines,
}

impl std::str::FromStr for ResultsFormat {
    type Err = ResultsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ResultsFormat::Csv),
            "jsonl" | "json-lines" => Ok(ResultsFormat::JsonLines),
            other => Err(ResultsError::UnknownFormat(other.to_owned())),
        }
    }
}

pub fn write_results<W: Write>(
    records: &[ResultRecord],
    format: ResultsFormat,
    mut out: W,
) -> Result<(), ResultsError> {
    match format {
        ResultsFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        ResultsFormat::JsonLines => {
            for r in records {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn results_to_string(
    records: &[ResultRecord],
    format: ResultsFormat,
) -> Result<String, ResultsError> {
    let mut buf = Vec::new();
    write_results(records, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("serializers emit UTF-8"))
}

pub fn read_results<R: BufRead>(
    input: R,
    format: ResultsFormat,
) -> Result<Vec<ResultRecord>, ResultsError> {
    match format {
        ResultsFormat::Csv => {
            let mut r = csv::Reader::from_reader(input);
            r.deserialize()
                .map(|x| x.map_err(ResultsError::from))
                .collect()
        }
        ResultsFormat::JsonLines => {
            let mut out = Vec::new();
            for line in input.lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                out.push(serde_json::from_str(&line)?);
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trial_csv_row() {
        let rec = ResultRecord::trial("toy", "xnf", "reference", 1, 2.5, true, 37);
        let text = results_to_string(&[rec], ResultsFormat::Csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "instance,representation,backend,seed,sigma,solved,iterations,wall_ns,energy_pj,\
             kind,n_trials,n_solved,its99_opt,its99_stderr,tts_s,ets_j,energy_per_iter_pj"
        );
        assert_eq!(
            lines.next().unwrap(),
            "toy,xnf,reference,1,2.5,true,37,0,,trial,,,,,,,"
        );
        assert!(lines.next().is_none());
    }

    #[test]
    fn csv_round_trip() {
        let mut rec = ResultRecord::trial("a,b", "cnf", "crossbar-ideal", 9, 0.0, false, 100);
        rec.energy_pj = Some(12.5);
        let text = results_to_string(&[rec.clone()], ResultsFormat::Csv).unwrap();
        let back = read_results(text.as_bytes(), ResultsFormat::Csv).unwrap();
        assert_eq!(back, vec![rec]);
    }

    #[test]
    fn format_names() {
        assert_eq!("csv".parse::<ResultsFormat>().unwrap(), ResultsFormat::Csv);
        assert_eq!(
            "jsonl".parse::<ResultsFormat>().unwrap(),
            ResultsFormat::JsonLines
        );
        assert!("xml".parse::<ResultsFormat>().is_err());
    }
}
